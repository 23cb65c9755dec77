//! D-dimensional Delaunay triangulation of scattered points, with the simplex
//! queries the node-placement loop needs: point location, barycentric
//! coordinates, volumes and barycenters.
//!
//! The triangulation is built over normalized `[0,1]^D` coordinates and is
//! immutable once constructed; all queries are `&self` and safe to run
//! concurrently. Construction is equivalent to the paraboloid lifting map
//! (lower convex hull of points lifted by `|x|^2`): see [`build`] for the
//! incremental algorithm and [`predicates`] for the numeric tie-breaking.

mod build;
mod predicates;

use thiserror::Error;

pub use build::MAX_TRI_DIM;

use build::{solve_linear, BOUNDARY};
use predicates::det_inplace;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("need at least {needed} points for a {0}-simplex, got {got}", needed - 1)]
    TooFewPoints { needed: usize, got: usize },
    #[error("input points lie in a proper affine subspace")]
    DegenerateInput,
    #[error("points {a} and {b} coincide within 1e-12")]
    DuplicatePoint { a: usize, b: usize },
    #[error("coordinates must be finite")]
    NonFiniteCoordinate,
    #[error("dimension {dim} is outside the supported range 1..={MAX_TRI_DIM}")]
    UnsupportedDim { dim: usize },
    #[error("simplex {simplex} is numerically singular")]
    SingularSimplex { simplex: usize },
    #[error("inconsistent triangulation state: {0}")]
    Inconsistent(&'static str),
}

/// Barycentric weights of a query point with respect to one simplex.
/// Weights sum to 1 (renormalized after the solve); a point inside the
/// simplex has all weights `>= -1e-12`.
#[derive(Debug, Clone)]
pub struct BarycentricCoords {
    pub weights: Vec<f64>,
    pub simplex_id: usize,
}

/// Delaunay triangulation: simplices as `(D+1)`-tuples of vertex indices into
/// the input point list, plus facet adjacency and per-vertex incidence.
#[derive(Debug, Clone)]
pub struct Triangulation {
    dim: usize,
    vertices: Vec<f64>,
    simplices: Vec<u32>,
    neighbors: Vec<u32>,
    stars: Vec<Vec<u32>>,
}

/// Delaunay triangulation of the given points (each a `D`-vector).
///
/// Duplicate points (pairwise distance <= 1e-12) and affinely degenerate
/// inputs are rejected. Identical input lists produce identical simplex sets.
pub fn triangulate(points: &[Vec<f64>]) -> Result<Triangulation, GeometryError> {
    if points.is_empty() {
        return Err(GeometryError::TooFewPoints { needed: 2, got: 0 });
    }
    let dim = points[0].len();
    for p in points {
        if p.len() != dim {
            return Err(GeometryError::Inconsistent("mixed point dimensions"));
        }
    }
    let flat: Vec<f64> = points.iter().flat_map(|p| p.iter().copied()).collect();
    // Duplicate scan with early exit per pair.
    let tol2 = 1e-12f64 * 1e-12;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let mut d2 = 0.0;
            for c in 0..dim {
                let d = flat[i * dim + c] - flat[j * dim + c];
                d2 += d * d;
                if d2 > tol2 {
                    break;
                }
            }
            if d2 <= tol2 {
                return Err(GeometryError::DuplicatePoint { a: i, b: j });
            }
        }
    }
    Triangulation::from_flat(dim, flat)
}

impl Triangulation {
    /// Build from flat storage without the O(n^2) duplicate scan; used on
    /// hot paths where the caller already guarantees pairwise separation.
    pub(crate) fn from_flat(dim: usize, flat: Vec<f64>) -> Result<Self, GeometryError> {
        let raw = build::build(dim, &flat)?;
        let n_vertices = flat.len() / dim;
        let stride = dim + 1;
        let n_simplices = raw.simplices.len() / stride;
        let mut stars = vec![Vec::new(); n_vertices];
        for s in 0..n_simplices {
            for &v in &raw.simplices[s * stride..(s + 1) * stride] {
                stars[v as usize].push(s as u32);
            }
        }
        Ok(Self {
            dim,
            vertices: flat,
            simplices: raw.simplices,
            neighbors: raw.neighbors,
            stars,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len() / self.dim
    }

    pub fn simplex_count(&self) -> usize {
        self.simplices.len() / (self.dim + 1)
    }

    /// Vertex indices of simplex `s`, sorted ascending.
    pub fn simplex(&self, s: usize) -> &[u32] {
        let k = self.dim + 1;
        &self.simplices[s * k..(s + 1) * k]
    }

    /// Neighbor across the facet opposite `simplex(s)[k]`; `None` on the hull.
    pub fn neighbor(&self, s: usize, k: usize) -> Option<usize> {
        let n = self.neighbors[s * (self.dim + 1) + k];
        (n != BOUNDARY).then_some(n as usize)
    }

    pub fn vertex(&self, v: usize) -> &[f64] {
        &self.vertices[v * self.dim..(v + 1) * self.dim]
    }

    /// Simplices incident to vertex `v`.
    pub fn incident_simplices(&self, v: usize) -> &[u32] {
        &self.stars[v]
    }

    /// Simplex containing `q` (all barycentric weights `>= -1e-12`), or
    /// `None` when `q` lies outside the convex hull. Visibility walk from a
    /// start simplex with a brute-force fallback.
    pub fn locate(&self, q: &[f64]) -> Option<usize> {
        self.locate_with_hint(q, 0)
    }

    pub fn locate_with_hint(&self, q: &[f64], hint: usize) -> Option<usize> {
        debug_assert_eq!(q.len(), self.dim);
        let ns = self.simplex_count();
        let mut cur = if hint < ns { hint } else { 0 };
        let mut weights = vec![0.0f64; self.dim + 1];
        for _ in 0..=ns {
            match self.weights_into(cur, q, &mut weights) {
                Some(()) => {
                    let (slot, wmin) = min_slot(&weights);
                    if wmin >= -1e-12 {
                        return Some(cur);
                    }
                    match self.neighbor(cur, slot) {
                        // Crossing a hull facet outward: outside the hull.
                        None => return None,
                        Some(nb) => cur = nb,
                    }
                }
                None => break, // singular cell; fall back to scanning
            }
        }
        // Fallback: scan everything (covers walk cycles in degenerate data).
        for s in 0..ns {
            if self.weights_into(s, q, &mut weights).is_some() {
                let (_, wmin) = min_slot(&weights);
                if wmin >= -1e-12 {
                    return Some(s);
                }
            }
        }
        None
    }

    /// Barycentric coordinates of `q` in simplex `s`: solves the
    /// `(D+1) x (D+1)` affine system, then renormalizes to unit sum.
    pub fn barycentric(&self, s: usize, q: &[f64]) -> Result<BarycentricCoords, GeometryError> {
        let mut weights = vec![0.0f64; self.dim + 1];
        self.weights_into(s, q, &mut weights)
            .ok_or(GeometryError::SingularSimplex { simplex: s })?;
        let sum: f64 = weights.iter().sum();
        if !(sum.is_finite() && sum.abs() > 1e-300) {
            return Err(GeometryError::SingularSimplex { simplex: s });
        }
        for w in weights.iter_mut() {
            *w /= sum;
        }
        Ok(BarycentricCoords { weights, simplex_id: s })
    }

    fn weights_into(&self, s: usize, q: &[f64], out: &mut [f64]) -> Option<()> {
        let n = self.dim + 1;
        let mut mat = vec![0.0f64; n * n];
        for (col, &v) in self.simplex(s).iter().enumerate() {
            mat[col] = 1.0;
            let xv = self.vertex(v as usize);
            for r in 0..self.dim {
                mat[(r + 1) * n + col] = xv[r];
            }
        }
        out[0] = 1.0;
        out[1..].copy_from_slice(q);
        solve_linear(&mut mat, out, n).then_some(())
    }

    /// Volume of simplex `s`: `|det(edge matrix)| / D!`.
    pub fn simplex_volume(&self, s: usize) -> f64 {
        let verts = self.simplex(s);
        let mut mat = vec![0.0f64; self.dim * self.dim];
        let v0 = self.vertex(verts[0] as usize);
        for (r, &v) in verts[1..].iter().enumerate() {
            let xv = self.vertex(v as usize);
            for c in 0..self.dim {
                mat[r * self.dim + c] = xv[c] - v0[c];
            }
        }
        let mut fact = 1.0f64;
        for k in 2..=self.dim {
            fact *= k as f64;
        }
        det_inplace(&mut mat, self.dim).abs() / fact
    }

    /// Arithmetic mean of the simplex's vertices.
    pub fn barycenter(&self, s: usize) -> Vec<f64> {
        let verts = self.simplex(s);
        let mut out = vec![0.0f64; self.dim];
        for &v in verts {
            let xv = self.vertex(v as usize);
            for c in 0..self.dim {
                out[c] += xv[c];
            }
        }
        let inv = 1.0 / (self.dim as f64 + 1.0);
        for c in out.iter_mut() {
            *c *= inv;
        }
        out
    }

    /// Total volume of all simplices (the volume of the convex hull).
    pub fn total_volume(&self) -> f64 {
        (0..self.simplex_count()).map(|s| self.simplex_volume(s)).sum()
    }
}

fn min_slot(weights: &[f64]) -> (usize, f64) {
    let mut slot = 0;
    let mut wmin = f64::INFINITY;
    for (k, &w) in weights.iter().enumerate() {
        if w < wmin {
            wmin = w;
            slot = k;
        }
    }
    (slot, wmin)
}
