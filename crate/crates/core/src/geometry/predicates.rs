//! Floating-point geometric predicates with deterministic tie-breaking.
//!
//! All predicates work on flat point storage (`pts[i*dim..(i+1)*dim]`) plus a
//! per-point lifted height `h_i = |x_i|^2`. Delaunay conflict tests are signs
//! of determinants that are *linear in the heights*, which makes a symbolic
//! perturbation cheap: conceptually every height is shifted by `eps^(i+1)` for
//! global point index `i` (so lower indices dominate), and when the base
//! determinant vanishes the sign is taken from the height-column cofactor of
//! the smallest participating index with a nonzero cofactor. This resolves
//! cospherical configurations (for instance the `2^D` hypercube corners, which
//! all lie on one sphere) in a way that is consistent across predicates — it
//! is the sign the determinant would take for an actual, consistent height
//! assignment — so the incremental construction never sees a contradictory
//! answer for the same tie.
//!
//! Determinant signs are evaluated with plain f64 Gaussian elimination and an
//! absolute tie tolerance of 1e-12; coordinates are expected in (or near) the
//! unit cube, where that tolerance is meaningful. This is a documented
//! precision boundary, not exact arithmetic.

/// Absolute threshold below which a determinant is treated as a tie.
pub(super) const TIE_TOL: f64 = 1e-12;

/// In-place determinant by Gaussian elimination with partial pivoting.
/// `a` is row-major `n x n` and is destroyed.
pub(super) fn det_inplace(a: &mut [f64], n: usize) -> f64 {
    debug_assert_eq!(a.len(), n * n);
    let mut det = 1.0;
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].abs();
        for r in (col + 1)..n {
            let v = a[r * n + col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if piv != col {
            for c in col..n {
                a.swap(col * n + c, piv * n + c);
            }
            det = -det;
        }
        let d = a[col * n + col];
        det *= d;
        let inv = 1.0 / d;
        for r in (col + 1)..n {
            let f = a[r * n + col] * inv;
            if f != 0.0 {
                for c in (col + 1)..n {
                    a[r * n + c] -= f * a[col * n + c];
                }
            }
        }
    }
    det
}

#[inline]
pub(super) fn coords(pts: &[f64], dim: usize, i: u32) -> &[f64] {
    &pts[i as usize * dim..(i as usize + 1) * dim]
}

/// Orientation determinant of `dim+1` points: det of rows `v_i - v_0`.
/// Zero means affine degeneracy; the sign depends on the vertex order.
pub(super) fn orientation(pts: &[f64], dim: usize, verts: &[u32], scratch: &mut Vec<f64>) -> f64 {
    debug_assert_eq!(verts.len(), dim + 1);
    scratch.clear();
    scratch.resize(dim * dim, 0.0);
    let v0 = coords(pts, dim, verts[0]);
    for (r, &v) in verts[1..].iter().enumerate() {
        let vr = coords(pts, dim, v);
        for c in 0..dim {
            scratch[r * dim + c] = vr[c] - v0[c];
        }
    }
    det_inplace(scratch, dim)
}

/// Shared scratch for the conflict predicates (one per construction).
pub(super) struct PredScratch {
    mat: Vec<f64>,
    minor: Vec<f64>,
    cof: Vec<f64>,
}

impl PredScratch {
    pub(super) fn new() -> Self {
        Self { mat: Vec::new(), minor: Vec::new(), cof: Vec::new() }
    }
}

/// Sign of the height-perturbed in-sphere determinant for the simplex
/// `verts` (sorted by global index, `dim+1` entries) against query point `p`:
/// positive sign times the simplex orientation sign means `p` lies strictly
/// inside the (perturbed) circumsphere.
///
/// Returns `true` when `p` conflicts with the simplex.
pub(super) fn insphere_conflict(
    pts: &[f64],
    heights: &[f64],
    dim: usize,
    verts: &[u32],
    p: u32,
    scratch: &mut PredScratch,
) -> bool {
    let n = dim + 1;
    let orient = orientation(pts, dim, verts, &mut scratch.minor);
    debug_assert!(orient.abs() > 0.0, "conflict test against a flat simplex");
    // The determinant below is the orientation of the lifted simplex seen
    // from the lifted query: "query below the lifted hyperplane" (inside the
    // circumsphere) corresponds to det * orient * (-1)^D > 0.
    let side = if dim % 2 == 0 { orient } else { -orient };

    // Rows: [x_v - x_p | h_v - h_p] for each simplex vertex v.
    scratch.mat.clear();
    scratch.mat.resize(n * n, 0.0);
    let xp = coords(pts, dim, p);
    let hp = heights[p as usize];
    for (r, &v) in verts.iter().enumerate() {
        let xv = coords(pts, dim, v);
        for c in 0..dim {
            scratch.mat[r * n + c] = xv[c] - xp[c];
        }
        scratch.mat[r * n + dim] = heights[v as usize] - hp;
    }
    // det_inplace destroys the matrix; keep a copy for the cofactor pass.
    scratch.cof.clear();
    scratch.cof.extend_from_slice(&scratch.mat);
    let det = det_inplace(&mut scratch.mat, n);
    if det.abs() > TIE_TOL {
        return det * side > 0.0;
    }

    // Tie: cascade over the height-column cofactors in ascending global
    // index. Coefficient of vertex row j is C_j; of the query point, -sum C_j.
    let saved = std::mem::take(&mut scratch.cof);
    let mut cof = vec![0.0f64; n];
    for j in 0..n {
        // Minor: delete row j and the height column.
        scratch.minor.clear();
        scratch.minor.resize(dim * dim, 0.0);
        let mut rr = 0;
        for r in 0..n {
            if r == j {
                continue;
            }
            for c in 0..dim {
                scratch.minor[rr * dim + c] = saved[r * n + c];
            }
            rr += 1;
        }
        let minor = det_inplace(&mut scratch.minor, dim);
        let sign = if (j + dim) % 2 == 0 { 1.0 } else { -1.0 };
        cof[j] = sign * minor;
    }
    scratch.cof = saved;
    let cof_sum: f64 = cof.iter().sum();

    // Participants in ascending global index; verts are sorted already.
    let mut vi = 0usize;
    let mut p_done = false;
    loop {
        let coef = if !p_done && (vi == n || p < verts[vi]) {
            p_done = true;
            -cof_sum
        } else if vi < n {
            let c = cof[vi];
            vi += 1;
            c
        } else {
            // All participants degenerate beyond resolution: no conflict.
            return false;
        };
        if coef.abs() > TIE_TOL {
            return coef * side > 0.0;
        }
    }
}

/// Conflict test for a ghost cell (a hull facet extended to infinity).
///
/// `facet` holds the `dim` facet vertices (sorted), `opposite` is the vertex
/// of the adjacent real cell on the interior side. A query conflicts when it
/// lies strictly outside the facet's supporting hyperplane, or lies on the
/// hyperplane and inside the facet's circumsphere *within* that hyperplane
/// (the limit of the circumsphere of facet-plus-far-outside-point).
pub(super) fn ghost_conflict(
    pts: &[f64],
    heights: &[f64],
    dim: usize,
    facet: &[u32],
    opposite: u32,
    p: u32,
    scratch: &mut PredScratch,
) -> bool {
    debug_assert_eq!(facet.len(), dim);
    let or_p = facet_side(pts, dim, facet, coords(pts, dim, p), &mut scratch.minor);
    let or_in = facet_side(pts, dim, facet, coords(pts, dim, opposite), &mut scratch.minor);
    debug_assert!(or_in.abs() > TIE_TOL, "adjacent cell is flat");
    if or_p.abs() > TIE_TOL {
        return or_p.signum() != or_in.signum();
    }
    coplanar_infacet_sphere(pts, heights, dim, facet, p, scratch)
}

/// Signed volume of (facet, x): positive/negative tells the side of the
/// facet's hyperplane, zero means coplanar. Sign convention is arbitrary but
/// consistent for a fixed facet ordering.
fn facet_side(pts: &[f64], dim: usize, facet: &[u32], x: &[f64], scratch: &mut Vec<f64>) -> f64 {
    scratch.clear();
    scratch.resize(dim * dim, 0.0);
    let f0 = coords(pts, dim, facet[0]);
    for r in 1..dim {
        let fr = coords(pts, dim, facet[r]);
        for c in 0..dim {
            scratch[(r - 1) * dim + c] = fr[c] - f0[c];
        }
    }
    for c in 0..dim {
        scratch[(dim - 1) * dim + c] = x[c] - f0[c];
    }
    det_inplace(scratch, dim)
}

/// Lifted in-sphere test restricted to the facet's hyperplane, for a query
/// coplanar with the facet. The sign convention is calibrated with the facet
/// centroid, which lies strictly inside the facet's circumsphere; height ties
/// use the same index-ordered cofactor cascade as `insphere_conflict`.
fn coplanar_infacet_sphere(
    pts: &[f64],
    heights: &[f64],
    dim: usize,
    facet: &[u32],
    p: u32,
    scratch: &mut PredScratch,
) -> bool {
    let n = dim + 1;
    let f0 = coords(pts, dim, facet[0]);
    let h0 = heights[facet[0] as usize];

    // Normal of the facet within R^D via generalized cross product of the
    // edge rows (cofactor expansion along an appended unit row).
    let mut normal = vec![0.0f64; dim];
    for k in 0..dim {
        scratch.minor.clear();
        scratch.minor.resize((dim - 1) * (dim - 1), 0.0);
        let mut rr = 0;
        for r in 1..dim {
            let fr = coords(pts, dim, facet[r]);
            let mut cc = 0;
            for c in 0..dim {
                if c == k {
                    continue;
                }
                scratch.minor[rr * (dim - 1) + cc] = fr[c] - f0[c];
                cc += 1;
            }
            rr += 1;
        }
        let minor = if dim == 1 { 1.0 } else { det_inplace(&mut scratch.minor, dim - 1) };
        normal[k] = if k % 2 == 0 { minor } else { -minor };
    }

    // W(x, h): rows [f_i - f_0 | h_i - h_0] (i = 1..D-1), [x - f_0 | h - h_0],
    // [normal | 0]. Returns the matrix; caller takes the determinant.
    let fill = |mat: &mut Vec<f64>, x: &[f64], h: f64| {
        mat.clear();
        mat.resize(n * n, 0.0);
        for r in 1..dim {
            let fr = coords(pts, dim, facet[r]);
            for c in 0..dim {
                mat[(r - 1) * n + c] = fr[c] - f0[c];
            }
            mat[(r - 1) * n + dim] = heights[facet[r] as usize] - h0;
        }
        for c in 0..dim {
            mat[(dim - 1) * n + c] = x[c] - f0[c];
        }
        mat[(dim - 1) * n + dim] = h - h0;
        for c in 0..dim {
            mat[dim * n + c] = normal[c];
        }
        mat[dim * n + dim] = 0.0;
    };

    // Reference: facet centroid, lifted onto the paraboloid.
    let mut centroid = vec![0.0f64; dim];
    for &f in facet {
        let xf = coords(pts, dim, f);
        for c in 0..dim {
            centroid[c] += xf[c];
        }
    }
    let inv = 1.0 / dim as f64;
    let mut hc = 0.0;
    for c in 0..dim {
        centroid[c] *= inv;
        hc += centroid[c] * centroid[c];
    }
    fill(&mut scratch.mat, &centroid, hc);
    let det_ref = det_inplace(&mut scratch.mat, n);
    if det_ref.abs() <= TIE_TOL {
        // Facet numerically degenerate; be conservative and report no
        // conflict so the hull is not rewired through it.
        return false;
    }

    let xp = coords(pts, dim, p);
    fill(&mut scratch.mat, xp, heights[p as usize]);
    scratch.cof.clear();
    scratch.cof.extend_from_slice(&scratch.mat);
    let det_p = det_inplace(&mut scratch.mat, n);
    if det_p.abs() > TIE_TOL {
        return det_p.signum() == det_ref.signum();
    }

    // Height-cofactor cascade over participants {facet vertices, p}.
    // Row of f_i (i>=1) is i-1, row of p is dim-1; f_0 appears negated in
    // every height entry, so its coefficient is minus the sum of the others.
    let saved = std::mem::take(&mut scratch.cof);
    let col = dim;
    let cof_of_row = |row: usize, scratch_minor: &mut Vec<f64>| -> f64 {
        scratch_minor.clear();
        scratch_minor.resize(dim * dim, 0.0);
        let mut rr = 0;
        for r in 0..n {
            if r == row {
                continue;
            }
            for c in 0..dim {
                scratch_minor[rr * dim + c] = saved[r * n + c];
            }
            rr += 1;
        }
        let minor = det_inplace(scratch_minor, dim);
        if (row + col) % 2 == 0 {
            minor
        } else {
            -minor
        }
    };
    let mut cof_fi = vec![0.0f64; dim]; // index by facet position; [0] filled below
    let mut total = 0.0;
    for i in 1..dim {
        cof_fi[i] = cof_of_row(i - 1, &mut scratch.minor);
        total += cof_fi[i];
    }
    let cof_p = cof_of_row(dim - 1, &mut scratch.minor);
    total += cof_p;
    cof_fi[0] = -total;
    scratch.cof = saved;

    // Ascending global index over facet entries and p (facet is sorted).
    let mut fi = 0usize;
    let mut p_done = false;
    loop {
        let coef = if !p_done && (fi == dim || p < facet[fi]) {
            p_done = true;
            cof_p
        } else if fi < dim {
            let c = cof_fi[fi];
            fi += 1;
            c
        } else {
            return false;
        };
        if coef.abs() > TIE_TOL {
            return coef.signum() == det_ref.signum();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(points: &[&[f64]]) -> Vec<f64> {
        points.iter().flat_map(|p| p.iter().copied()).collect()
    }

    fn heights(pts: &[f64], dim: usize) -> Vec<f64> {
        pts.chunks(dim).map(|p| p.iter().map(|c| c * c).sum()).collect()
    }

    #[test]
    fn det_small_matrices() {
        let mut a = vec![3.0];
        assert_eq!(det_inplace(&mut a, 1), 3.0);
        let mut b = vec![1.0, 2.0, 3.0, 4.0];
        assert!((det_inplace(&mut b, 2) + 2.0).abs() < 1e-15);
        let mut c = vec![2.0, 0.0, 0.0, 0.0, 3.0, 0.0, 0.0, 0.0, 4.0];
        assert!((det_inplace(&mut c, 3) - 24.0).abs() < 1e-12);
        let mut s = vec![1.0, 2.0, 2.0, 4.0];
        assert_eq!(det_inplace(&mut s, 2), 0.0);
    }

    #[test]
    fn insphere_strict_cases() {
        // Unit right triangle; (0.25, 0.25) is inside its circumcircle,
        // (2, 2) is far outside.
        let pts = flat(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0], &[0.25, 0.25], &[2.0, 2.0]]);
        let h = heights(&pts, 2);
        let mut s = PredScratch::new();
        assert!(insphere_conflict(&pts, &h, 2, &[0, 1, 2], 3, &mut s));
        assert!(!insphere_conflict(&pts, &h, 2, &[0, 1, 2], 4, &mut s));
    }

    #[test]
    fn insphere_cocircular_tie_is_antisymmetric() {
        // Four cocircular points (unit square corners). Whichever diagonal
        // the cascade picks, it must pick it consistently: d in circle(a,b,c)
        // iff a in circle(b,c,d) fails for one of the two diagonals.
        let pts = flat(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]]);
        let h = heights(&pts, 2);
        let mut s = PredScratch::new();
        let d_in_abc = insphere_conflict(&pts, &h, 2, &[0, 1, 2], 3, &mut s);
        let a_in_bcd = insphere_conflict(&pts, &h, 2, &[1, 2, 3], 0, &mut s);
        // Exactly one of the two triangulations of the square is "Delaunay"
        // under the perturbation, so these answers must agree.
        assert_eq!(d_in_abc, a_in_bcd);
    }

    #[test]
    fn ghost_conflict_strict_and_coplanar() {
        let pts = flat(&[
            &[0.0, 0.0],
            &[1.0, 0.0],
            &[0.5, 1.0],
            &[0.5, -1.0], // strictly outside facet [0,1]
            &[0.5, 0.0],  // on the facet line, inside its diametral circle
            &[3.0, 0.0],  // on the facet line, outside its diametral circle
        ]);
        let h = heights(&pts, 2);
        let mut s = PredScratch::new();
        assert!(ghost_conflict(&pts, &h, 2, &[0, 1], 2, 3, &mut s));
        assert!(ghost_conflict(&pts, &h, 2, &[0, 1], 2, 4, &mut s));
        assert!(!ghost_conflict(&pts, &h, 2, &[0, 1], 2, 5, &mut s));
        // Interior-side point does not conflict.
        let pts2 = flat(&[&[0.0, 0.0], &[1.0, 0.0], &[0.5, 1.0], &[0.5, 0.5]]);
        let h2 = heights(&pts2, 2);
        assert!(!ghost_conflict(&pts2, &h2, 2, &[0, 1], 2, 3, &mut s));
    }
}
