//! Named physical input variables and unit-hypercube normalization.
//!
//! All geometry in this crate runs in normalized `[0,1]^D` coordinates so that
//! gradients and simplex volumes are comparable across axes with different
//! physical units; `InputSpace` owns the affine map between the two frames.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpaceError {
    #[error("input space needs at least one variable")]
    Empty,
    #[error("variable {name:?} has an invalid range [{min}, {max}]")]
    InvalidRange { name: String, min: f64, max: f64 },
    #[error("expected a {expected}-dimensional vector, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
}

/// One physical input axis: a name and its closed range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub min: f64,
    pub max: f64,
}

impl Variable {
    pub fn new(name: impl Into<String>, min: f64, max: f64) -> Self {
        Self { name: name.into(), min, max }
    }

    pub fn width(&self) -> f64 {
        self.max - self.min
    }
}

/// Ordered set of input variables; owns normalization to the unit hypercube.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputSpace {
    variables: Vec<Variable>,
}

impl InputSpace {
    pub fn new(variables: Vec<Variable>) -> Result<Self, SpaceError> {
        if variables.is_empty() {
            return Err(SpaceError::Empty);
        }
        for v in &variables {
            if !(v.min.is_finite() && v.max.is_finite() && v.min < v.max) {
                return Err(SpaceError::InvalidRange {
                    name: v.name.clone(),
                    min: v.min,
                    max: v.max,
                });
            }
        }
        Ok(Self { variables })
    }

    pub fn dim(&self) -> usize {
        self.variables.len()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    /// Index of the variable with the given name (case-insensitive), if any.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.variables
            .iter()
            .position(|v| v.name.eq_ignore_ascii_case(name))
    }

    /// Physical -> unit-hypercube coordinates.
    pub fn normalize(&self, phys: &[f64]) -> Result<Vec<f64>, SpaceError> {
        self.check_dim(phys.len())?;
        Ok(self
            .variables
            .iter()
            .zip(phys)
            .map(|(v, &x)| (x - v.min) / v.width())
            .collect())
    }

    /// Unit-hypercube -> physical coordinates.
    pub fn denormalize(&self, unit: &[f64]) -> Result<Vec<f64>, SpaceError> {
        self.check_dim(unit.len())?;
        Ok(self
            .variables
            .iter()
            .zip(unit)
            .map(|(v, &u)| v.min + u * v.width())
            .collect())
    }

    /// True if every coordinate lies inside its range, within `tol` of the
    /// range width at each end.
    pub fn contains(&self, phys: &[f64], tol: f64) -> bool {
        phys.len() == self.dim()
            && self.variables.iter().zip(phys).all(|(v, &x)| {
                let slack = tol * v.width();
                x >= v.min - slack && x <= v.max + slack
            })
    }

    fn check_dim(&self, actual: usize) -> Result<(), SpaceError> {
        if actual != self.dim() {
            return Err(SpaceError::DimensionMismatch { expected: self.dim(), actual });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn aot_sza() -> InputSpace {
        InputSpace::new(vec![
            Variable::new("AOT", 0.05, 0.4),
            Variable::new("SZA", 20.0, 70.0),
        ])
        .unwrap()
    }

    #[test]
    fn normalize_denormalize_round_trip() {
        let space = aot_sza();
        let phys = vec![0.2, 47.5];
        let unit = space.normalize(&phys).unwrap();
        let back = space.denormalize(&unit).unwrap();
        for (a, b) in phys.iter().zip(&back) {
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn corners_map_to_unit_corners() {
        let space = aot_sza();
        assert_eq!(space.normalize(&[0.05, 70.0]).unwrap(), vec![0.0, 1.0]);
        assert_eq!(space.denormalize(&[0.0, 1.0]).unwrap(), vec![0.05, 70.0]);
    }

    #[test]
    fn midpoint_maps_to_half() {
        let space = aot_sza();
        let mid = space.denormalize(&[0.5, 0.5]).unwrap();
        assert!((mid[0] - 0.225).abs() < 1e-15);
        assert!((mid[1] - 45.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_ranges() {
        assert!(InputSpace::new(vec![]).is_err());
        assert!(InputSpace::new(vec![Variable::new("x", 1.0, 1.0)]).is_err());
        assert!(InputSpace::new(vec![Variable::new("x", f64::NAN, 1.0)]).is_err());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let space = aot_sza();
        assert!(matches!(
            space.normalize(&[0.1]),
            Err(SpaceError::DimensionMismatch { expected: 2, actual: 1 })
        ));
    }
}
