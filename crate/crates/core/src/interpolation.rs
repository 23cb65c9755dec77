//! The LUT container and simplex-linear interpolation, the spectral
//! relative-error metric, leave-one-out cross-validation and percentiles.
//!
//! A [`Lut`] pairs node inputs `X` (physical units) with output spectra `Y`
//! and keeps the `2^D` hypercube-corner nodes flagged: those vertex nodes pin
//! the convex hull to the whole input box so interpolation never needs to
//! extrapolate, and they are exempt from cross-validation (removing one would
//! open the hull).
//!
//! The error metric for a node is the worst spectral channel of the relative
//! interpolation error in percent. Denominators are guarded by
//! `max(|y|, 1e-9 * max_channel |y|)` so synthetic targets that cross zero do
//! not blow up the metric; guarded channels are counted and reported.

use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{GeometryError, Triangulation};
use crate::space::{InputSpace, SpaceError};

#[derive(Debug, Error)]
pub enum InterpolationError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("query point lies outside the LUT hull")]
    OutsideHull,
    #[error("triangulation has {tri} vertices but the LUT has {lut} nodes")]
    TriangulationMismatch { tri: usize, lut: usize },
    #[error("spectra have mismatched lengths ({a} vs {b})")]
    LengthMismatch { a: usize, b: usize },
    #[error("not enough nodes for leave-one-out ({0})")]
    InsufficientNodes(&'static str),
    #[error("percentile rank {0} outside [0, 100]")]
    InvalidPercentile(f64),
    #[error("empty value list")]
    EmptyValues,
    #[error("invalid LUT: {0}")]
    InvalidLut(String),
}

/// Scattered-node look-up table: inputs in physical units, outputs per
/// wavelength channel, and vertex flags for the `2^D` corner nodes.
#[derive(Debug, Clone)]
pub struct Lut {
    space: InputSpace,
    x_phys: Vec<Vec<f64>>,
    x_unit: Vec<Vec<f64>>,
    y: Vec<Vec<f64>>,
    wavelengths: Vec<f64>,
    is_vertex: Vec<bool>,
}

impl Lut {
    /// Assemble and validate a LUT. Requires unique nodes (pairwise distance
    /// in normalized coordinates > 1e-12), exactly `2^D` vertex-flagged rows
    /// matching the hypercube corners, finite outputs and a strictly
    /// increasing wavelength grid of the spectra's length.
    pub fn new(
        space: InputSpace,
        x_phys: Vec<Vec<f64>>,
        y: Vec<Vec<f64>>,
        wavelengths: Vec<f64>,
        is_vertex: Vec<bool>,
    ) -> Result<Self, InterpolationError> {
        let dim = space.dim();
        let m = x_phys.len();
        if y.len() != m || is_vertex.len() != m {
            return Err(InterpolationError::InvalidLut(format!(
                "row counts disagree: X={m}, Y={}, flags={}",
                y.len(),
                is_vertex.len()
            )));
        }
        if m == 0 {
            return Err(InterpolationError::InvalidLut("no nodes".into()));
        }
        let k = wavelengths.len();
        if k == 0 {
            return Err(InterpolationError::InvalidLut("empty wavelength grid".into()));
        }
        if !wavelengths.windows(2).all(|w| w[0] < w[1]) {
            return Err(InterpolationError::InvalidLut(
                "wavelength grid must be strictly increasing".into(),
            ));
        }
        let mut x_unit = Vec::with_capacity(m);
        for row in &x_phys {
            x_unit.push(space.normalize(row)?);
        }
        for (i, row) in y.iter().enumerate() {
            if row.len() != k {
                return Err(InterpolationError::LengthMismatch { a: row.len(), b: k });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(InterpolationError::InvalidLut(format!(
                    "non-finite output in node {i}"
                )));
            }
        }
        let lut = Self { space, x_phys, x_unit, y, wavelengths, is_vertex };
        lut.check_unique(0)?;
        lut.check_vertices(dim)?;
        Ok(lut)
    }

    fn check_unique(&self, from: usize) -> Result<(), InterpolationError> {
        let tol2 = 1e-12f64 * 1e-12;
        for i in from..self.x_unit.len() {
            for j in 0..i {
                let d2: f64 = self.x_unit[i]
                    .iter()
                    .zip(&self.x_unit[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                if d2 <= tol2 {
                    return Err(InterpolationError::InvalidLut(format!(
                        "nodes {j} and {i} coincide"
                    )));
                }
            }
        }
        Ok(())
    }

    fn check_vertices(&self, dim: usize) -> Result<(), InterpolationError> {
        let want = 1usize << dim;
        let mut seen = vec![false; want];
        let mut count = 0usize;
        for (i, flag) in self.is_vertex.iter().enumerate() {
            if !flag {
                continue;
            }
            count += 1;
            let mut corner = 0usize;
            for (d, &u) in self.x_unit[i].iter().enumerate() {
                if (u - 1.0).abs() <= 1e-9 {
                    corner |= 1 << (dim - 1 - d);
                } else if u.abs() > 1e-9 {
                    return Err(InterpolationError::InvalidLut(format!(
                        "vertex-flagged node {i} is not a hypercube corner"
                    )));
                }
            }
            seen[corner] = true;
        }
        if count != want || !seen.iter().all(|&s| s) {
            return Err(InterpolationError::InvalidLut(format!(
                "expected all {want} hypercube corners flagged, found {count}"
            )));
        }
        Ok(())
    }

    pub fn space(&self) -> &InputSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn node_count(&self) -> usize {
        self.x_phys.len()
    }

    pub fn output_len(&self) -> usize {
        self.wavelengths.len()
    }

    pub fn wavelengths(&self) -> &[f64] {
        &self.wavelengths
    }

    pub fn x_phys(&self, i: usize) -> &[f64] {
        &self.x_phys[i]
    }

    pub fn x_unit(&self, i: usize) -> &[f64] {
        &self.x_unit[i]
    }

    pub fn y(&self, i: usize) -> &[f64] {
        &self.y[i]
    }

    pub fn is_vertex(&self, i: usize) -> bool {
        self.is_vertex[i]
    }

    /// Non-vertex node indices (the leave-one-out subset), ascending.
    pub fn non_vertex_ids(&self) -> Vec<usize> {
        (0..self.node_count()).filter(|&i| !self.is_vertex[i]).collect()
    }

    /// Append evaluated nodes (never vertex-flagged). Enforces uniqueness
    /// against existing nodes and validates the new spectra.
    pub fn append_nodes(
        &mut self,
        phys: Vec<Vec<f64>>,
        spectra: Vec<Vec<f64>>,
    ) -> Result<(), InterpolationError> {
        if phys.len() != spectra.len() {
            return Err(InterpolationError::LengthMismatch { a: phys.len(), b: spectra.len() });
        }
        let first_new = self.node_count();
        for (x, y) in phys.into_iter().zip(spectra) {
            if y.len() != self.output_len() {
                return Err(InterpolationError::LengthMismatch {
                    a: y.len(),
                    b: self.output_len(),
                });
            }
            if y.iter().any(|v| !v.is_finite()) {
                return Err(InterpolationError::InvalidLut("non-finite appended output".into()));
            }
            let u = self.space.normalize(&x)?;
            self.x_phys.push(x);
            self.x_unit.push(u);
            self.y.push(y);
            self.is_vertex.push(false);
        }
        self.check_unique(first_new)
    }

    /// Normalized node coordinates flattened row-major (for triangulation).
    pub fn unit_flat(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.node_count() * self.dim());
        for row in &self.x_unit {
            flat.extend_from_slice(row);
        }
        flat
    }

    /// Delaunay triangulation of all nodes in normalized coordinates.
    /// Node uniqueness is a LUT invariant, so the duplicate scan is skipped.
    pub fn triangulate_nodes(&self) -> Result<Triangulation, InterpolationError> {
        Ok(Triangulation::from_flat(self.dim(), self.unit_flat())?)
    }
}

/// Worst-channel relative interpolation error for one node or query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeError {
    /// Maximum over channels of the relative error, in percent.
    pub delta_percent: f64,
    /// Channel index attaining the maximum (lowest index on ties).
    pub lambda_max: usize,
    /// Channels where the near-zero denominator guard was active.
    pub guarded_channels: usize,
}

/// Per-channel relative error in percent between an interpolated spectrum and
/// a reference, reduced to the worst channel.
pub fn relative_error(y_hat: &[f64], y_true: &[f64]) -> Result<RelativeError, InterpolationError> {
    if y_hat.len() != y_true.len() {
        return Err(InterpolationError::LengthMismatch { a: y_hat.len(), b: y_true.len() });
    }
    if y_true.is_empty() {
        return Err(InterpolationError::EmptyValues);
    }
    let max_abs = y_true.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = 1e-9 * max_abs;
    let mut best = f64::NEG_INFINITY;
    let mut best_k = 0usize;
    let mut guarded = 0usize;
    for (k, (&h, &t)) in y_hat.iter().zip(y_true).enumerate() {
        let mut denom = t.abs();
        if denom < floor {
            denom = floor;
            guarded += 1;
        }
        let denom = denom.max(f64::MIN_POSITIVE);
        let d = 100.0 * (h - t).abs() / denom;
        if d > best {
            best = d;
            best_k = k;
        }
    }
    Ok(RelativeError { delta_percent: best, lambda_max: best_k, guarded_channels: guarded })
}

/// Linear-interpolated order statistic with 1-based rank
/// `r = 1 + p (n - 1) / 100` over the sorted values.
pub fn percentile(values: &[f64], p: f64) -> Result<f64, InterpolationError> {
    if values.is_empty() {
        return Err(InterpolationError::EmptyValues);
    }
    if !(0.0..=100.0).contains(&p) || !p.is_finite() {
        return Err(InterpolationError::InvalidPercentile(p));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("non-comparable value"));
    let n = sorted.len();
    let rank = 1.0 + p * (n as f64 - 1.0) / 100.0;
    let lo = (rank.floor() as usize).clamp(1, n);
    let frac = rank - lo as f64;
    if lo >= n || frac == 0.0 {
        return Ok(sorted[lo - 1]);
    }
    Ok(sorted[lo - 1] + frac * (sorted[lo] - sorted[lo - 1]))
}

/// Simplex-linear interpolation of the LUT at a physical query point.
///
/// `tri` must be the triangulation of the LUT's nodes. Exact at nodes: when
/// the located simplex carries a weight within 1e-12 of one, the stored
/// spectrum of that node is returned as-is.
pub fn interpolate(
    lut: &Lut,
    tri: &Triangulation,
    q_phys: &[f64],
) -> Result<Vec<f64>, InterpolationError> {
    if tri.vertex_count() != lut.node_count() {
        return Err(InterpolationError::TriangulationMismatch {
            tri: tri.vertex_count(),
            lut: lut.node_count(),
        });
    }
    let unit = lut.space().normalize(q_phys)?;
    let simplex = tri.locate(&unit).ok_or(InterpolationError::OutsideHull)?;
    let bc = tri.barycentric(simplex, &unit)?;
    interpolate_weights(lut, tri.simplex(simplex), &bc.weights)
}

fn interpolate_weights(
    lut: &Lut,
    verts: &[u32],
    weights: &[f64],
) -> Result<Vec<f64>, InterpolationError> {
    for (&w, &v) in weights.iter().zip(verts) {
        if w >= 1.0 - 1e-12 {
            return Ok(lut.y(v as usize).to_vec());
        }
    }
    let k = lut.output_len();
    let mut out = vec![0.0f64; k];
    for (&w, &v) in weights.iter().zip(verts) {
        let row = lut.y(v as usize);
        for c in 0..k {
            out[c] += w * row[c];
        }
    }
    Ok(out)
}

/// Leave-one-out cross-validation report over the non-vertex nodes.
#[derive(Debug, Clone)]
pub struct ErrorReport {
    /// Non-vertex node indices, ascending; parallel to `delta`/`lambda_max`.
    pub node_ids: Vec<usize>,
    /// Worst-channel relative error of each node, percent.
    pub delta: Vec<f64>,
    /// Worst channel index per node.
    pub lambda_max: Vec<usize>,
    /// Total channels across nodes where the denominator guard was active.
    pub guarded_channels: usize,
    /// `percentile(delta, 95)`.
    pub p95: f64,
}

/// Leave-one-out errors: for each non-vertex node, re-triangulate all other
/// nodes from scratch, interpolate at the held-out input and compare against
/// its stored spectrum. Per-node jobs run in parallel and are merged in node
/// order, so the report is deterministic.
pub fn loo_errors(lut: &Lut) -> Result<ErrorReport, InterpolationError> {
    let dim = lut.dim();
    let m = lut.node_count();
    if m < dim + 2 {
        return Err(InterpolationError::InsufficientNodes(
            "need at least D+2 nodes to hold one out",
        ));
    }
    let node_ids = lut.non_vertex_ids();
    if node_ids.is_empty() {
        return Err(InterpolationError::InsufficientNodes("no non-vertex nodes"));
    }
    let flat = lut.unit_flat();

    let per_node: Vec<Result<RelativeError, InterpolationError>> = node_ids
        .par_iter()
        .map(|&j| {
            let mut sub = Vec::with_capacity((m - 1) * dim);
            sub.extend_from_slice(&flat[..j * dim]);
            sub.extend_from_slice(&flat[(j + 1) * dim..]);
            let tri = Triangulation::from_flat(dim, sub).map_err(|e| match e {
                GeometryError::DegenerateInput | GeometryError::TooFewPoints { .. } => {
                    InterpolationError::InsufficientNodes("held-out subset is degenerate")
                }
                other => InterpolationError::Geometry(other),
            })?;
            let q = lut.x_unit(j);
            let simplex = tri.locate(q).ok_or(InterpolationError::OutsideHull)?;
            let bc = tri.barycentric(simplex, q)?;
            // Subset indices >= j shift back up by one.
            let k = lut.output_len();
            let mut y_hat = vec![0.0f64; k];
            for (&w, &v) in bc.weights.iter().zip(tri.simplex(simplex)) {
                let g = if (v as usize) < j { v as usize } else { v as usize + 1 };
                let row = lut.y(g);
                for c in 0..k {
                    y_hat[c] += w * row[c];
                }
            }
            relative_error(&y_hat, lut.y(j))
        })
        .collect();

    let mut delta = Vec::with_capacity(node_ids.len());
    let mut lambda_max = Vec::with_capacity(node_ids.len());
    let mut guarded = 0usize;
    for r in per_node {
        let r = r?;
        delta.push(r.delta_percent);
        lambda_max.push(r.lambda_max);
        guarded += r.guarded_channels;
    }
    let p95 = percentile(&delta, 95.0)?;
    Ok(ErrorReport { node_ids, delta, lambda_max, guarded_channels: guarded, p95 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{hypercube_vertices, latin_hypercube, scale_to_space};
    use crate::space::Variable;
    use proptest::prelude::*;

    fn unit_space(dim: usize) -> InputSpace {
        InputSpace::new(
            (0..dim).map(|d| Variable::new(format!("x{d}"), 0.0, 1.0)).collect(),
        )
        .unwrap()
    }

    /// LUT over corners + LHS nodes evaluated through `f`.
    fn build_lut(
        space: &InputSpace,
        n_random: usize,
        seed: u64,
        f: &dyn Fn(&[f64]) -> Vec<f64>,
        wavelengths: Vec<f64>,
    ) -> Lut {
        let dim = space.dim();
        let mut unit = latin_hypercube(dim, n_random, seed).unwrap();
        let corners = hypercube_vertices(dim).unwrap();
        let mut flags = vec![false; unit.points.len()];
        unit.points.extend(corners.points);
        flags.extend(std::iter::repeat(true).take(1 << dim));
        let phys = scale_to_space(&unit, space).unwrap();
        let y: Vec<Vec<f64>> = phys.iter().map(|x| f(x)).collect();
        Lut::new(space.clone(), phys, y, wavelengths, flags).unwrap()
    }

    fn affine2(x: &[f64]) -> Vec<f64> {
        vec![3.0 + 2.0 * x[0] - 1.5 * x[1], 10.0 - 4.0 * x[0] + 0.5 * x[1]]
    }

    #[test]
    fn relative_error_hand_cases() {
        let r = relative_error(&[101.0, 99.0], &[100.0, 100.0]).unwrap();
        assert_eq!(r.delta_percent, 1.0);
        assert_eq!(r.lambda_max, 0);
        assert_eq!(r.guarded_channels, 0);

        let r = relative_error(&[100.0, 100.0], &[100.0, 100.0]).unwrap();
        assert_eq!(r.delta_percent, 0.0);
        assert_eq!(r.lambda_max, 0);

        let r = relative_error(&[100.0, 98.0], &[100.0, 100.0]).unwrap();
        assert_eq!(r.delta_percent, 2.0);
        assert_eq!(r.lambda_max, 1);
    }

    #[test]
    fn relative_error_guards_near_zero_denominators() {
        let r = relative_error(&[1.0, 0.5], &[1.0, 0.0]).unwrap();
        assert_eq!(r.guarded_channels, 1);
        assert!(r.delta_percent.is_finite());
        assert_eq!(r.lambda_max, 1);
    }

    #[test]
    fn percentile_hand_cases() {
        assert_eq!(percentile(&[1.0, 2.0, 3.0, 4.0, 5.0], 50.0).unwrap(), 3.0);
        assert_eq!(percentile(&[7.0], 30.0).unwrap(), 7.0);
        let v: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        assert!((percentile(&v, 95.0).unwrap() - 95.05).abs() < 1e-12);
        assert_eq!(percentile(&v, 0.0).unwrap(), 1.0);
        assert_eq!(percentile(&v, 100.0).unwrap(), 100.0);
        assert!(percentile(&[], 50.0).is_err());
        assert!(percentile(&[1.0], 101.0).is_err());
    }

    #[test]
    fn interpolation_exact_at_nodes() {
        let space = unit_space(2);
        let lut = build_lut(&space, 12, 5, &affine2, vec![500.0, 510.0]);
        let tri = lut.triangulate_nodes().unwrap();
        for i in 0..lut.node_count() {
            let got = interpolate(&lut, &tri, lut.x_phys(i)).unwrap();
            assert_eq!(got, lut.y(i), "node {i} not exact");
        }
    }

    #[test]
    fn interpolation_reproduces_affine_functions() {
        let space = unit_space(2);
        let lut = build_lut(&space, 15, 8, &affine2, vec![500.0, 510.0]);
        let tri = lut.triangulate_nodes().unwrap();
        for q in latin_hypercube(2, 200, 99).unwrap().points {
            let got = interpolate(&lut, &tri, &q).unwrap();
            let want = affine2(&q);
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() <= 1e-9, "q={q:?}: {got:?} vs {want:?}");
            }
        }
    }

    #[test]
    fn interpolation_edge_midpoint_averages_endpoints() {
        let space = unit_space(2);
        let lut = build_lut(&space, 10, 21, &affine2, vec![500.0, 510.0]);
        let tri = lut.triangulate_nodes().unwrap();
        let verts = tri.simplex(0);
        let (a, b) = (verts[0] as usize, verts[1] as usize);
        let mid: Vec<f64> = lut
            .x_phys(a)
            .iter()
            .zip(lut.x_phys(b))
            .map(|(p, q)| 0.5 * (p + q))
            .collect();
        let got = interpolate(&lut, &tri, &mid).unwrap();
        for (c, g) in got.iter().enumerate() {
            let want = 0.5 * (lut.y(a)[c] + lut.y(b)[c]);
            assert!((g - want).abs() < 1e-9);
        }
    }

    #[test]
    fn interpolant_is_continuous_across_shared_faces() {
        let space = unit_space(2);
        let f = |x: &[f64]| vec![(x[0] * 3.1).sin() + 2.0, (x[1] * 2.3).cos() + 3.0];
        let lut = build_lut(&space, 20, 13, &f, vec![500.0, 510.0]);
        let tri = lut.triangulate_nodes().unwrap();
        // Find an interior facet: simplex s and neighbor nb share D vertices.
        let mut checked = 0;
        for s in 0..tri.simplex_count() {
            for k in 0..=tri.dim() {
                let Some(nb) = tri.neighbor(s, k) else { continue };
                // Midpoint of the shared facet.
                let shared: Vec<usize> = tri
                    .simplex(s)
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != k)
                    .map(|(_, &v)| v as usize)
                    .collect();
                let mut q = vec![0.0f64; 2];
                for &v in &shared {
                    for c in 0..2 {
                        q[c] += tri.vertex(v)[c];
                    }
                }
                for c in q.iter_mut() {
                    *c /= shared.len() as f64;
                }
                let from_s = {
                    let bc = tri.barycentric(s, &q).unwrap();
                    interpolate_weights(&lut, tri.simplex(s), &bc.weights).unwrap()
                };
                let from_nb = {
                    let bc = tri.barycentric(nb, &q).unwrap();
                    interpolate_weights(&lut, tri.simplex(nb), &bc.weights).unwrap()
                };
                for (a, b) in from_s.iter().zip(&from_nb) {
                    assert!((a - b).abs() < 1e-9, "discontinuity at facet {s}/{nb}");
                }
                checked += 1;
            }
        }
        assert!(checked > 10);
    }

    #[test]
    fn interpolate_rejects_outside_queries() {
        let space = unit_space(2);
        let lut = build_lut(&space, 8, 2, &affine2, vec![500.0, 510.0]);
        let tri = lut.triangulate_nodes().unwrap();
        assert!(matches!(
            interpolate(&lut, &tri, &[-0.2, 0.5]),
            Err(InterpolationError::OutsideHull) | Err(InterpolationError::Space(_))
        ));
    }

    #[test]
    fn loo_affine_errors_vanish() {
        let space = unit_space(2);
        let lut = build_lut(&space, 20, 4, &affine2, vec![500.0, 510.0]);
        let report = loo_errors(&lut).unwrap();
        assert_eq!(report.node_ids.len(), 20);
        assert!(report.delta.iter().all(|&d| d < 1e-9), "{:?}", report.delta);
        assert!(report.p95 < 1e-9);
    }

    #[test]
    fn loo_counts_match_initial_layout() {
        // m0 = 24 nodes in 2-D: 20 LHS plus 4 corners leaves 20 held out.
        let space = unit_space(2);
        let f = |x: &[f64]| vec![(2.0 * x[0] + x[1]).exp()];
        let lut = build_lut(&space, 20, 42, &f, vec![500.0]);
        assert_eq!(lut.node_count(), 24);
        let report = loo_errors(&lut).unwrap();
        assert_eq!(report.delta.len(), 20);
        assert_eq!(report.p95, percentile(&report.delta, 95.0).unwrap());
    }

    /// Independent oracle: naive per-node re-triangulation written separately
    /// from `loo_errors` (spelled out with Vec-of-rows points and the public
    /// `triangulate` entry point).
    fn loo_oracle(lut: &Lut) -> Vec<f64> {
        let mut out = Vec::new();
        for j in lut.non_vertex_ids() {
            let mut pts: Vec<Vec<f64>> = Vec::new();
            let mut ids = Vec::new();
            for i in 0..lut.node_count() {
                if i != j {
                    pts.push(lut.x_unit(i).to_vec());
                    ids.push(i);
                }
            }
            let tri = crate::geometry::triangulate(&pts).unwrap();
            let s = tri.locate(lut.x_unit(j)).unwrap();
            let bc = tri.barycentric(s, lut.x_unit(j)).unwrap();
            let k = lut.output_len();
            let mut y_hat = vec![0.0; k];
            for (w, &v) in bc.weights.iter().zip(tri.simplex(s)) {
                for c in 0..k {
                    y_hat[c] += w * lut.y(ids[v as usize])[c];
                }
            }
            let mut worst = f64::NEG_INFINITY;
            let y_true = lut.y(j);
            let max_abs = y_true.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for c in 0..k {
                let denom = y_true[c].abs().max(1e-9 * max_abs).max(f64::MIN_POSITIVE);
                worst = worst.max(100.0 * (y_hat[c] - y_true[c]).abs() / denom);
            }
            out.push(worst);
        }
        out
    }

    #[test]
    fn loo_matches_naive_oracle() {
        let space = unit_space(2);
        let f = |x: &[f64]| vec![(1.3 * x[0] - 0.7 * x[1]).exp(), (x[0] * x[1] * 4.0).cos() + 2.0];
        for seed in [1u64, 2, 3] {
            let lut = build_lut(&space, 24, seed, &f, vec![500.0, 510.0]);
            let got = loo_errors(&lut).unwrap();
            let want = loo_oracle(&lut);
            for (g, w) in got.delta.iter().zip(&want) {
                let rel = (g - w).abs() / w.abs().max(1e-30);
                assert!(rel <= 1e-12, "driver {g} vs oracle {w}");
            }
        }
    }

    #[test]
    fn loo_requires_enough_nodes() {
        let space = unit_space(2);
        let corners = hypercube_vertices(2).unwrap();
        let phys = scale_to_space(&corners, &space).unwrap();
        let y: Vec<Vec<f64>> = phys.iter().map(|x| affine2(x)).collect();
        let lut = Lut::new(space, phys, y, vec![500.0, 510.0], vec![true; 4]).unwrap();
        assert!(matches!(
            loo_errors(&lut),
            Err(InterpolationError::InsufficientNodes(_))
        ));
    }

    #[test]
    fn lut_validation_rejects_bad_inputs() {
        let space = unit_space(2);
        let corners = hypercube_vertices(2).unwrap();
        let phys = scale_to_space(&corners, &space).unwrap();
        let y: Vec<Vec<f64>> = phys.iter().map(|x| affine2(x)).collect();

        // Missing vertex flags.
        assert!(Lut::new(space.clone(), phys.clone(), y.clone(), vec![500.0, 510.0], vec![false; 4]).is_err());
        // Non-increasing wavelengths.
        assert!(Lut::new(space.clone(), phys.clone(), y.clone(), vec![510.0, 500.0], vec![true; 4]).is_err());
        // Duplicate node.
        let mut phys_dup = phys.clone();
        let mut y_dup = y.clone();
        phys_dup.push(phys[0].clone());
        y_dup.push(y[0].clone());
        let mut flags = vec![true; 4];
        flags.push(false);
        assert!(Lut::new(space, phys_dup, y_dup, vec![500.0, 510.0], flags).is_err());
    }

    proptest! {
        /// Scaling both spectra leaves (delta, lambda_max) unchanged while
        /// the guard stays inactive.
        #[test]
        fn relative_error_scale_invariance(c in 1e-3f64..1e3) {
            let y_hat = [101.0, 99.5, 100.25];
            let y_true = [100.0, 100.0, 100.0];
            let a = relative_error(&y_hat, &y_true).unwrap();
            let yh: Vec<f64> = y_hat.iter().map(|v| v * c).collect();
            let yt: Vec<f64> = y_true.iter().map(|v| v * c).collect();
            let b = relative_error(&yh, &yt).unwrap();
            prop_assert!((a.delta_percent - b.delta_percent).abs() < 1e-9);
            prop_assert_eq!(a.lambda_max, b.lambda_max);
        }

        /// Percentiles are monotone in p.
        #[test]
        fn percentile_monotone(mut vals in proptest::collection::vec(0.0f64..100.0, 1..40), p1 in 0.0f64..100.0, p2 in 0.0f64..100.0) {
            let (lo, hi) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
            vals.iter_mut().for_each(|v| *v = (*v * 100.0).round() / 100.0);
            let a = percentile(&vals, lo).unwrap();
            let b = percentile(&vals, hi).unwrap();
            prop_assert!(a <= b + 1e-12);
        }
    }
}
