//! Point-set generators in the unit hypercube.
//!
//! Three generators feed the builder and the comparison harness:
//!
//! - [`latin_hypercube`]: stratified pseudo-random samples. Each axis is cut
//!   into `n` equal strata and each stratum receives exactly one point, with
//!   uniform jitter inside the stratum. The PRNG is ChaCha8 seeded via
//!   `seed_from_u64`, a counter-based generator whose stream is stable across
//!   platforms, so identical `(dim, count, seed)` reproduce bit-identical sets.
//! - [`hypercube_vertices`]: all `2^D` corners, in lexicographic order of the
//!   binary expansion (coordinate 0 is the most significant bit).
//! - [`sobol_sequence`]: the unscrambled Sobol sequence in Gray-code order,
//!   using the published Joe-Kuo "new-joe-kuo-6" direction numbers. The
//!   degenerate all-zeros point (index 0) is skipped: it would duplicate a
//!   hypercube vertex wherever the corners are also inserted.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::space::{InputSpace, SpaceError};

/// Largest supported dimension for [`hypercube_vertices`] (bounds `2^D`).
pub const MAX_VERTEX_DIM: usize = 20;

/// Largest dimension covered by the embedded Sobol direction-number table.
pub const MAX_SOBOL_DIM: usize = 8;

#[derive(Debug, Error)]
pub enum SamplingError {
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("dimension {dim} exceeds the 2^D vertex capacity bound ({MAX_VERTEX_DIM})")]
    VertexCapacity { dim: usize },
    #[error("Sobol dimension {dim} is unsupported (direction-number table covers 1..={MAX_SOBOL_DIM})")]
    UnsupportedSobolDim { dim: usize },
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// A set of points in `[0,1]^D`, tagged with the seed that produced it when
/// the generator is randomized.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitPointSet {
    pub points: Vec<Vec<f64>>,
    pub dim: usize,
    pub seed: Option<u64>,
}

impl UnitPointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Stratified Latin hypercube sample: `count` points, one per axis stratum.
///
/// The jitter inside each stratum is drawn from the open interval `(0,1)`, so
/// coordinates never land exactly on stratum boundaries.
pub fn latin_hypercube(dim: usize, count: usize, seed: u64) -> Result<UnitPointSet, SamplingError> {
    if dim < 1 {
        return Err(SamplingError::InvalidArgument("dimension must be >= 1"));
    }
    if count < 1 {
        return Err(SamplingError::InvalidArgument("count must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // One stratum permutation per axis, then per-point jitter.
    let mut perms: Vec<Vec<usize>> = Vec::with_capacity(dim);
    for _ in 0..dim {
        let mut perm: Vec<usize> = (0..count).collect();
        perm.shuffle(&mut rng);
        perms.push(perm);
    }

    let inv = 1.0 / count as f64;
    let mut points = Vec::with_capacity(count);
    for i in 0..count {
        let mut p = Vec::with_capacity(dim);
        for perm in &perms {
            let u = loop {
                let u: f64 = rng.random();
                if u > 0.0 {
                    break u;
                }
            };
            p.push((perm[i] as f64 + u) * inv);
        }
        points.push(p);
    }
    Ok(UnitPointSet { points, dim, seed: Some(seed) })
}

/// All `2^D` corners of the unit hypercube, lexicographic in the binary
/// expansion of the corner index.
pub fn hypercube_vertices(dim: usize) -> Result<UnitPointSet, SamplingError> {
    if dim < 1 {
        return Err(SamplingError::InvalidArgument("dimension must be >= 1"));
    }
    if dim > MAX_VERTEX_DIM {
        return Err(SamplingError::VertexCapacity { dim });
    }
    let n = 1usize << dim;
    let mut points = Vec::with_capacity(n);
    for i in 0..n {
        let p: Vec<f64> = (0..dim)
            .map(|j| ((i >> (dim - 1 - j)) & 1) as f64)
            .collect();
        points.push(p);
    }
    Ok(UnitPointSet { points, dim, seed: None })
}

/// First `count` points of the unscrambled Sobol sequence (index starts at 1;
/// the all-zeros point is skipped).
pub fn sobol_sequence(dim: usize, count: usize) -> Result<UnitPointSet, SamplingError> {
    if count < 1 {
        return Err(SamplingError::InvalidArgument("count must be >= 1"));
    }
    if dim < 1 || dim > MAX_SOBOL_DIM {
        return Err(SamplingError::UnsupportedSobolDim { dim });
    }
    let directions: Vec<[u32; 32]> = (0..dim).map(sobol_directions).collect();

    let scale = 1.0 / (1u64 << 32) as f64;
    let mut state = vec![0u32; dim];
    let mut points = Vec::with_capacity(count);
    for index in 1..=count as u64 {
        // Gray-code step: flip the direction number of the lowest set bit.
        let bit = index.trailing_zeros() as usize;
        let mut p = Vec::with_capacity(dim);
        for (x, dirs) in state.iter_mut().zip(&directions) {
            *x ^= dirs[bit];
            p.push(*x as f64 * scale);
        }
        points.push(p);
    }
    Ok(UnitPointSet { points, dim, seed: None })
}

/// Affine map from unit coordinates to the physical ranges of `space`.
pub fn scale_to_space(points: &UnitPointSet, space: &InputSpace) -> Result<Vec<Vec<f64>>, SamplingError> {
    if points.dim != space.dim() {
        return Err(SamplingError::Space(SpaceError::DimensionMismatch {
            expected: space.dim(),
            actual: points.dim,
        }));
    }
    points
        .points
        .iter()
        .map(|p| space.denormalize(p).map_err(SamplingError::Space))
        .collect()
}

// Joe-Kuo "new-joe-kuo-6" parameters per dimension d >= 2: the primitive
// polynomial coefficient encoding `a` and the initial direction values m_1..m_s
// (s = polynomial degree). Dimension 1 is the van der Corput sequence.
const JOE_KUO: [(u32, &[u32]); 7] = [
    (0, &[1]),              // d = 2
    (1, &[1, 3]),           // d = 3
    (1, &[1, 3, 1]),        // d = 4
    (2, &[1, 1, 1]),        // d = 5
    (1, &[1, 1, 3, 3]),     // d = 6
    (4, &[1, 3, 5, 13]),    // d = 7
    (2, &[1, 1, 5, 5, 17]), // d = 8
];

/// 32 direction numbers for zero-based dimension `d`, as binary fractions
/// packed into the high bits of a u32.
fn sobol_directions(d: usize) -> [u32; 32] {
    let mut v = [0u32; 32];
    if d == 0 {
        for (c, slot) in v.iter_mut().enumerate() {
            *slot = 1u32 << (31 - c);
        }
        return v;
    }
    let (a, m) = JOE_KUO[d - 1];
    let s = m.len();
    for c in 0..s.min(32) {
        v[c] = m[c] << (31 - c);
    }
    for c in s..32 {
        // v_c = v_{c-s} ^ (v_{c-s} >> s) ^ sum of a-selected earlier terms
        let mut val = v[c - s] ^ (v[c - s] >> s);
        for k in 1..s {
            if (a >> (s - 1 - k)) & 1 == 1 {
                val ^= v[c - k];
            }
        }
        v[c] = val;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Variable;
    use proptest::prelude::*;

    /// Every axis stratum of width 1/n must hold exactly one point.
    fn assert_stratified(set: &UnitPointSet) {
        let n = set.len();
        for d in 0..set.dim {
            let mut hits = vec![0usize; n];
            for p in &set.points {
                let k = ((p[d] * n as f64).floor() as usize).min(n - 1);
                hits[k] += 1;
            }
            assert!(hits.iter().all(|&h| h == 1), "axis {d} not stratified: {hits:?}");
        }
    }

    #[test]
    fn lhs_matches_initial_node_count_for_2d() {
        // 5 * 2^2 = 20 initial samples, one per stratum of width 0.05.
        let set = latin_hypercube(2, 20, 7).unwrap();
        assert_eq!(set.len(), 20);
        assert_stratified(&set);
    }

    #[test]
    fn lhs_single_point_single_stratum() {
        let set = latin_hypercube(1, 1, 3).unwrap();
        assert_eq!(set.len(), 1);
        assert!(set.points[0][0] >= 0.0 && set.points[0][0] < 1.0);
    }

    #[test]
    fn lhs_3d_eight_points_stratified() {
        let set = latin_hypercube(3, 8, 42).unwrap();
        assert_eq!(set.len(), 8);
        assert_stratified(&set);
    }

    #[test]
    fn lhs_is_deterministic_per_seed() {
        let a = latin_hypercube(4, 33, 99).unwrap();
        let b = latin_hypercube(4, 33, 99).unwrap();
        assert_eq!(a, b);
        let c = latin_hypercube(4, 33, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn lhs_rejects_bad_arguments() {
        assert!(latin_hypercube(0, 5, 0).is_err());
        assert!(latin_hypercube(2, 0, 0).is_err());
    }

    #[test]
    fn vertices_2d_lexicographic() {
        let set = hypercube_vertices(2).unwrap();
        let expect: Vec<Vec<f64>> = vec![
            vec![0.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
        ];
        assert_eq!(set.points, expect);
    }

    #[test]
    fn vertices_1d() {
        let set = hypercube_vertices(1).unwrap();
        assert_eq!(set.points, vec![vec![0.0], vec![1.0]]);
    }

    #[test]
    fn vertices_6d_counts() {
        let set = hypercube_vertices(6).unwrap();
        assert_eq!(set.len(), 64);
        assert!(set
            .points
            .iter()
            .all(|p| p.iter().all(|&c| c == 0.0 || c == 1.0)));
    }

    #[test]
    fn vertices_capacity_bound() {
        assert!(hypercube_vertices(21).is_err());
        assert!(hypercube_vertices(0).is_err());
    }

    #[test]
    fn sobol_first_points_2d() {
        let set = sobol_sequence(2, 3).unwrap();
        assert_eq!(
            set.points,
            vec![
                vec![0.5, 0.5],
                vec![0.75, 0.25],
                vec![0.25, 0.75],
            ]
        );
    }

    #[test]
    fn sobol_first_point_1d() {
        let set = sobol_sequence(1, 1).unwrap();
        assert_eq!(set.points, vec![vec![0.5]]);
    }

    /// Oracle: direct (non-Gray) Sobol evaluation from the binary expansion of
    /// the Gray code of the index. Independent of the incremental generator.
    fn sobol_oracle(dim: usize, index: u64) -> Vec<f64> {
        let gray = index ^ (index >> 1);
        let scale = 1.0 / (1u64 << 32) as f64;
        (0..dim)
            .map(|d| {
                let dirs = sobol_directions(d);
                let mut x = 0u32;
                for (bit, dir) in dirs.iter().enumerate() {
                    if (gray >> bit) & 1 == 1 {
                        x ^= dir;
                    }
                }
                x as f64 * scale
            })
            .collect()
    }

    #[test]
    fn sobol_matches_direct_expansion_oracle() {
        for dim in [1usize, 2, 3, 5, 8] {
            let set = sobol_sequence(dim, 64).unwrap();
            for (i, p) in set.points.iter().enumerate() {
                assert_eq!(p, &sobol_oracle(dim, i as u64 + 1), "dim {dim} index {}", i + 1);
            }
        }
    }

    /// Star-discrepancy estimate on a k x k grid of anchored boxes.
    fn discrepancy_2d(points: &[Vec<f64>], k: usize) -> f64 {
        let n = points.len() as f64;
        let mut worst: f64 = 0.0;
        for i in 1..=k {
            for j in 1..=k {
                let (a, b) = (i as f64 / k as f64, j as f64 / k as f64);
                let count = points.iter().filter(|p| p[0] < a && p[1] < b).count() as f64;
                worst = worst.max((count / n - a * b).abs());
            }
        }
        worst
    }

    #[test]
    fn sobol_beats_uniform_discrepancy() {
        let sobol = sobol_sequence(2, 1024).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let uniform: Vec<Vec<f64>> =
            (0..1024).map(|_| vec![rng.random(), rng.random()]).collect();
        let d_sobol = discrepancy_2d(&sobol.points, 64);
        let d_uniform = discrepancy_2d(&uniform, 64);
        assert!(
            d_sobol < d_uniform,
            "sobol {d_sobol} should beat uniform {d_uniform}"
        );
    }

    #[test]
    fn sobol_rejects_unsupported_dims() {
        assert!(sobol_sequence(0, 4).is_err());
        assert!(sobol_sequence(MAX_SOBOL_DIM + 1, 4).is_err());
    }

    #[test]
    fn scale_to_space_hits_range_ends() {
        let space = InputSpace::new(vec![
            Variable::new("AOT", 0.05, 0.4),
            Variable::new("SZA", 20.0, 70.0),
        ])
        .unwrap();
        let set = UnitPointSet { points: vec![vec![0.0, 1.0], vec![0.5, 0.5]], dim: 2, seed: None };
        let phys = scale_to_space(&set, &space).unwrap();
        assert_eq!(phys[0], vec![0.05, 70.0]);
        assert!((phys[1][0] - 0.225).abs() < 1e-15);
        assert!((phys[1][1] - 45.0).abs() < 1e-15);
    }

    #[test]
    fn scale_to_space_checks_dims() {
        let space = InputSpace::new(vec![Variable::new("x", 0.0, 1.0)]).unwrap();
        let set = UnitPointSet { points: vec![vec![0.0, 0.0]], dim: 2, seed: None };
        assert!(scale_to_space(&set, &space).is_err());
    }

    proptest! {
        /// Stratification holds for arbitrary (dim, count, seed).
        #[test]
        fn lhs_stratification_property(dim in 1usize..5, count in 1usize..40, seed in 0u64..1000) {
            let set = latin_hypercube(dim, count, seed).unwrap();
            assert_stratified(&set);
            for p in &set.points {
                prop_assert!(p.iter().all(|&c| (0.0..=1.0).contains(&c)));
            }
        }

        /// The first n Sobol points are a prefix of any longer run.
        #[test]
        fn sobol_prefix_property(dim in 1usize..=8, n in 1usize..60, k in 1usize..60) {
            let short = sobol_sequence(dim, n).unwrap();
            let long = sobol_sequence(dim, n + k).unwrap();
            prop_assert_eq!(&short.points[..], &long.points[..n]);
        }

        /// Unit -> physical -> unit round-trips to 1e-12 relative error.
        #[test]
        fn scale_round_trip(u0 in 0.0f64..=1.0, u1 in 0.0f64..=1.0) {
            let space = InputSpace::new(vec![
                Variable::new("AOT", 0.05, 0.4),
                Variable::new("SZA", 20.0, 70.0),
            ]).unwrap();
            let phys = space.denormalize(&[u0, u1]).unwrap();
            let back = space.normalize(&phys).unwrap();
            prop_assert!((back[0] - u0).abs() <= 1e-12);
            prop_assert!((back[1] - u1).abs() <= 1e-12);
        }
    }
}
