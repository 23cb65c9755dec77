//! Built-in target functions: a toy Lambertian top-of-atmosphere radiance
//! model with smooth analytic transfer functions, plus synthetic benchmark
//! targets with known behavior.
//!
//! # Toy radiance model
//!
//! The spectrum follows the Lambertian coupling formula
//!
//! ```text
//! L = L0 + (T_dir + T_dif) (E_dir cos(sza) + E_dif) rho / (pi (1 - S rho))
//! ```
//!
//! with transfer functions frozen as (lr = lambda / 550 nm, mu_s = cos sza,
//! mu_v = cos vza):
//!
//! ```text
//! tau    = aot * lr^(-alpha)                            aerosol optical depth
//! E0     = 1900 - 1.1 (lambda-475) - 0.009 (lambda-475)^2   solar irradiance
//! T_dir  = exp(-tau / mu_v)
//! T_dif  = (1 - T_dir) * ssa * (1 + g)/2 / (1 + tau)
//! E_dir  = E0 * exp(-tau / mu_s)
//! E_dif  = E0 * mu_s * ssa * (1 - exp(-tau / mu_s)) * (1 - g/2) / (1 + tau)
//! P      = (1 - g^2) / (1 + g^2 - 2 g cosTheta)^(3/2)   Henyey-Greenstein
//! cosTheta = -mu_s * mu_v                               (relative azimuth 90 deg)
//! L0     = E0 * mu_s * ssa * P * (1 - exp(-tau (1/mu_s + 1/mu_v)))
//!          / (4 pi (mu_s + mu_v))                       single scattering
//! S      = 0.3 * ssa * tau / (1 + tau) * (1 - g/2)      spherical albedo
//! ```
//!
//! The optical depth is purely aerosol-driven, so as `aot -> 0` the path
//! radiance, diffuse terms and spherical albedo all vanish and
//! `L -> E0 mu_s rho / pi` structurally. All terms are smooth, positive over
//! the supported ranges, `T_dir + T_dif <= 1` and `0 <= S < 1` by
//! construction, and `L0` increases with `aot` at fixed geometry. The
//! `1/cos` airmass factors make relative errors concentrate at high solar
//! zenith angles, where the radiance is low.
//!
//! Not a physical radiative-transfer model: the parameterization exists to
//! exercise the builder with realistic structure, not to predict radiances.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::builder::TargetFunction;
use crate::space::{InputSpace, Variable};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TargetError {
    #[error("input {index} = {value} outside [{min}, {max}]")]
    OutOfRange { index: usize, value: f64, min: f64, max: f64 },
    #[error("expected {expected} inputs, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("unknown target kind {0:?}")]
    UnknownKind(String),
    #[error("invalid target parameters: {0}")]
    InvalidParams(String),
}

/// Constants of the toy atmosphere. All fields are plain data so experiment
/// configs can override them declaratively.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ToyAtmosphereParams {
    /// Number of spectral channels.
    pub channels: usize,
    /// Wavelength grid bounds in nm (inclusive, uniform spacing).
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Lambertian surface reflectance.
    pub reflectance: f64,
    /// Extinction multiplier applied to the Angstrom law (total column optical
    /// depth per unit AOT; > 1 accounts for the non-aerosol column).
    pub extinction_scale: f64,
    /// Solar irradiance quadratic: `e0_base + e0_slope dl + e0_curve dl^2`
    /// with `dl = lambda - 475`.
    pub e0_base: f64,
    pub e0_slope: f64,
    pub e0_curve: f64,
    /// Spherical-albedo saturation scale.
    pub sph_albedo_scale: f64,
    /// Defaults for drivers that are not input dimensions.
    pub default_sza_deg: f64,
    pub default_vza_deg: f64,
    pub default_angstrom: f64,
    pub default_asymmetry: f64,
    pub default_ssa: f64,
}

impl Default for ToyAtmosphereParams {
    fn default() -> Self {
        Self {
            channels: 64,
            lambda_min: 400.0,
            lambda_max: 550.0,
            reflectance: 0.1,
            extinction_scale: 1.0,
            e0_base: 1900.0,
            e0_slope: -1.1,
            e0_curve: -0.009,
            sph_albedo_scale: 0.3,
            default_sza_deg: 55.0,
            default_vza_deg: 0.5,
            default_angstrom: 1.4,
            default_asymmetry: 0.8,
            default_ssa: 0.95,
        }
    }
}

impl ToyAtmosphereParams {
    pub fn wavelengths(&self) -> Vec<f64> {
        let k = self.channels;
        if k == 1 {
            return vec![self.lambda_min];
        }
        let step = (self.lambda_max - self.lambda_min) / (k as f64 - 1.0);
        (0..k).map(|i| self.lambda_min + i as f64 * step).collect()
    }

    pub fn validate(&self) -> Result<(), TargetError> {
        if self.channels == 0 {
            return Err(TargetError::InvalidParams("channels must be >= 1".into()));
        }
        if !(self.lambda_min < self.lambda_max) && self.channels > 1 {
            return Err(TargetError::InvalidParams("lambda_min must be < lambda_max".into()));
        }
        if !(0.0..1.0).contains(&self.reflectance) {
            return Err(TargetError::InvalidParams("reflectance must be in [0, 1)".into()));
        }
        Ok(())
    }
}

/// Physical drivers of one toy evaluation (angles in degrees).
#[derive(Debug, Clone, Copy)]
pub struct ToyInputs {
    pub aot: f64,
    pub sza_deg: f64,
    pub alpha: f64,
    pub g_hg: f64,
    pub ssa: f64,
    pub vza_deg: f64,
}

impl ToyInputs {
    pub fn defaults(params: &ToyAtmosphereParams) -> Self {
        Self {
            aot: 0.2,
            sza_deg: params.default_sza_deg,
            alpha: params.default_angstrom,
            g_hg: params.default_asymmetry,
            ssa: params.default_ssa,
            vza_deg: params.default_vza_deg,
        }
    }
}

/// Atmospheric transfer functions at one wavelength.
#[derive(Debug, Clone, Copy)]
pub struct TransferFunctions {
    pub path_radiance: f64,
    pub t_dir: f64,
    pub t_dif: f64,
    pub e_dir: f64,
    pub e_dif: f64,
    pub spherical_albedo: f64,
}

/// Transfer functions at wavelength `lambda` (nm) for the given drivers.
pub fn toy_transfer(
    inputs: &ToyInputs,
    params: &ToyAtmosphereParams,
    lambda: f64,
) -> TransferFunctions {
    let mu_s = inputs.sza_deg.to_radians().cos();
    let mu_v = inputs.vza_deg.to_radians().cos();
    let tau = params.extinction_scale * inputs.aot * (lambda / 550.0).powf(-inputs.alpha);
    let dl = lambda - 475.0;
    let e0 = params.e0_base + params.e0_slope * dl + params.e0_curve * dl * dl;
    let g = inputs.g_hg;
    let ssa = inputs.ssa;

    let t_dir = (-tau / mu_v).exp();
    let t_dif = (1.0 - t_dir) * ssa * (1.0 + g) / 2.0 / (1.0 + tau);
    let e_dir = e0 * (-tau / mu_s).exp();
    let e_dif = e0 * mu_s * ssa * (1.0 - (-tau / mu_s).exp()) * (1.0 - g / 2.0) / (1.0 + tau);
    let cos_theta = -mu_s * mu_v;
    let phase = (1.0 - g * g) / (1.0 + g * g - 2.0 * g * cos_theta).powf(1.5);
    let airmass = 1.0 / mu_s + 1.0 / mu_v;
    let path_radiance = e0 * mu_s * ssa * phase * (1.0 - (-tau * airmass).exp())
        / (4.0 * std::f64::consts::PI * (mu_s + mu_v));
    let spherical_albedo = params.sph_albedo_scale * ssa * tau / (1.0 + tau) * (1.0 - g / 2.0);

    TransferFunctions { path_radiance, t_dir, t_dif, e_dir, e_dif, spherical_albedo }
}

/// Lambertian TOA radiance spectrum for the given drivers.
pub fn toy_toa_radiance(inputs: &ToyInputs, params: &ToyAtmosphereParams) -> Vec<f64> {
    let mu_s = inputs.sza_deg.to_radians().cos();
    let rho = params.reflectance;
    params
        .wavelengths()
        .iter()
        .map(|&lambda| {
            let tf = toy_transfer(inputs, params, lambda);
            tf.path_radiance
                + (tf.t_dir + tf.t_dif) * (tf.e_dir * mu_s + tf.e_dif) * rho
                    / (std::f64::consts::PI * (1.0 - tf.spherical_albedo * rho))
        })
        .collect()
}

/// How one input axis feeds the toy model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ToyRole {
    Aot,
    Sza,
    Angstrom,
    Asymmetry,
    Ssa,
    Vza,
}

fn role_of(name: &str) -> Option<ToyRole> {
    match name.to_ascii_lowercase().as_str() {
        "aot" => Some(ToyRole::Aot),
        "sza" => Some(ToyRole::Sza),
        "alpha" | "angstrom" => Some(ToyRole::Angstrom),
        "g_hg" | "ghg" | "g" | "asymmetry" => Some(ToyRole::Asymmetry),
        "ssa" => Some(ToyRole::Ssa),
        "vza" => Some(ToyRole::Vza),
        _ => None,
    }
}

/// The toy radiance model bound to a named input space. Variables are mapped
/// to drivers by name (AOT, SZA, alpha, g_HG, SSA, VZA); drivers without a
/// matching variable stay at the configured defaults.
pub struct ToyRadianceTarget {
    space: InputSpace,
    roles: Vec<ToyRole>,
    params: ToyAtmosphereParams,
    wavelengths: Vec<f64>,
}

impl ToyRadianceTarget {
    pub fn new(space: InputSpace, params: ToyAtmosphereParams) -> Result<Self, TargetError> {
        params.validate()?;
        let mut roles = Vec::with_capacity(space.dim());
        for v in space.variables() {
            let role = role_of(&v.name).ok_or_else(|| {
                TargetError::InvalidParams(format!(
                    "variable {:?} is not a toy-model driver (expected AOT, SZA, alpha, g_HG, SSA or VZA)",
                    v.name
                ))
            })?;
            if roles.contains(&role) {
                return Err(TargetError::InvalidParams(format!(
                    "duplicate toy-model driver {:?}",
                    v.name
                )));
            }
            roles.push(role);
        }
        let wavelengths = params.wavelengths();
        Ok(Self { space, roles, params, wavelengths })
    }

    pub fn params(&self) -> &ToyAtmosphereParams {
        &self.params
    }

    pub fn inputs_for(&self, x: &[f64]) -> Result<ToyInputs, TargetError> {
        if x.len() != self.space.dim() {
            return Err(TargetError::DimensionMismatch {
                expected: self.space.dim(),
                actual: x.len(),
            });
        }
        for (i, (v, &value)) in self.space.variables().iter().zip(x).enumerate() {
            let slack = 1e-9 * v.width();
            if !(value >= v.min - slack && value <= v.max + slack) {
                return Err(TargetError::OutOfRange { index: i, value, min: v.min, max: v.max });
            }
        }
        let mut inputs = ToyInputs::defaults(&self.params);
        for (role, &value) in self.roles.iter().zip(x) {
            match role {
                ToyRole::Aot => inputs.aot = value,
                ToyRole::Sza => inputs.sza_deg = value,
                ToyRole::Angstrom => inputs.alpha = value,
                ToyRole::Asymmetry => inputs.g_hg = value,
                ToyRole::Ssa => inputs.ssa = value,
                ToyRole::Vza => inputs.vza_deg = value,
            }
        }
        Ok(inputs)
    }
}

impl TargetFunction for ToyRadianceTarget {
    fn dim(&self) -> usize {
        self.space.dim()
    }

    fn output_len(&self) -> usize {
        self.params.channels
    }

    fn wavelengths(&self) -> &[f64] {
        &self.wavelengths
    }

    fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>, TargetError> {
        let inputs = self.inputs_for(x)?;
        Ok(toy_toa_radiance(&inputs, &self.params))
    }
}

/// Synthetic analytic targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticKind {
    /// Per-channel affine maps; linear interpolation reproduces them exactly.
    Affine,
    /// `f_k(x) = exp(-sum_d a_kd x_d)` with distinct coefficient rows, so the
    /// worst channel varies across the input space.
    ProductExponential,
    /// A `1/cos` airmass factor on the second axis: relative errors
    /// concentrate at high zenith angles, like low-radiance regions do.
    AirmassLike,
}

impl std::str::FromStr for SyntheticKind {
    type Err = TargetError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "affine" => Ok(Self::Affine),
            "product-exponential" | "product_exponential" => Ok(Self::ProductExponential),
            "airmass-like" | "airmass_like" | "airmass" => Ok(Self::AirmassLike),
            other => Err(TargetError::UnknownKind(other.into())),
        }
    }
}

/// A deterministic synthetic target with a canonical input space.
pub struct SyntheticTarget {
    kind: SyntheticKind,
    space: InputSpace,
    wavelengths: Vec<f64>,
    /// Per-channel coefficient rows (meaning depends on `kind`).
    coeff: Vec<Vec<f64>>,
    offset: Vec<f64>,
}

/// Deterministic coefficient in [0, 1) from channel/axis indices.
fn mix(k: usize, d: usize) -> f64 {
    let t = 0.37 * (k + 1) as f64 + 0.61 * (d + 1) as f64 + 0.13 * ((k + 1) * (d + 1)) as f64;
    t.fract()
}

/// Construct a synthetic target of the given kind, dimension and channel
/// count.
pub fn synthetic_target(
    kind: SyntheticKind,
    dim: usize,
    channels: usize,
) -> Result<SyntheticTarget, TargetError> {
    if dim < 1 {
        return Err(TargetError::InvalidParams("dimension must be >= 1".into()));
    }
    if kind == SyntheticKind::AirmassLike && dim < 2 {
        return Err(TargetError::InvalidParams(
            "airmass-like target needs at least 2 dimensions".into(),
        ));
    }
    if channels < 1 {
        return Err(TargetError::InvalidParams("channels must be >= 1".into()));
    }
    let space = match kind {
        SyntheticKind::AirmassLike => {
            let mut vars = vec![Variable::new("depth", 0.05, 0.4), Variable::new("SZA", 20.0, 70.0)];
            vars.extend((2..dim).map(|d| Variable::new(format!("x{d}"), 0.0, 1.0)));
            InputSpace::new(vars)
        }
        _ => InputSpace::new(
            (0..dim).map(|d| Variable::new(format!("x{d}"), 0.0, 1.0)).collect(),
        ),
    }
    .map_err(|e| TargetError::InvalidParams(e.to_string()))?;

    let wavelengths: Vec<f64> = if channels == 1 {
        vec![400.0]
    } else {
        (0..channels)
            .map(|k| 400.0 + 150.0 * k as f64 / (channels as f64 - 1.0))
            .collect()
    };

    let (coeff, offset) = match kind {
        SyntheticKind::Affine => {
            let coeff = (0..channels)
                .map(|k| (0..dim).map(|d| 1.5 * mix(k, d) - 0.5).collect())
                .collect();
            let offset = (0..channels).map(|k| 5.0 + 2.0 * mix(k, dim)).collect();
            (coeff, offset)
        }
        SyntheticKind::ProductExponential => {
            let coeff = (0..channels)
                .map(|k| (0..dim).map(|d| 0.3 + mix(k, d)).collect())
                .collect();
            (coeff, vec![0.0; channels])
        }
        SyntheticKind::AirmassLike => {
            // coeff[k][0] = extinction per channel; offset[k] = scale.
            let coeff = (0..channels)
                .map(|k| {
                    let c = if channels == 1 {
                        2.0
                    } else {
                        1.0 + 2.0 * k as f64 / (channels as f64 - 1.0)
                    };
                    vec![c; 1]
                })
                .collect();
            let offset = (0..channels).map(|k| 1.0 + 0.5 * mix(k, 0)).collect();
            (coeff, offset)
        }
    };

    Ok(SyntheticTarget { kind, space, wavelengths, coeff, offset })
}

impl SyntheticTarget {
    pub fn kind(&self) -> SyntheticKind {
        self.kind
    }

    pub fn canonical_space(&self) -> &InputSpace {
        &self.space
    }
}

impl TargetFunction for SyntheticTarget {
    fn dim(&self) -> usize {
        self.space.dim()
    }

    fn output_len(&self) -> usize {
        self.wavelengths.len()
    }

    fn wavelengths(&self) -> &[f64] {
        &self.wavelengths
    }

    fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>, TargetError> {
        if x.len() != self.space.dim() {
            return Err(TargetError::DimensionMismatch {
                expected: self.space.dim(),
                actual: x.len(),
            });
        }
        for (i, (v, &value)) in self.space.variables().iter().zip(x).enumerate() {
            let slack = 1e-9 * v.width();
            if !(value >= v.min - slack && value <= v.max + slack) {
                return Err(TargetError::OutOfRange { index: i, value, min: v.min, max: v.max });
            }
        }
        let k = self.output_len();
        let mut out = Vec::with_capacity(k);
        match self.kind {
            SyntheticKind::Affine => {
                for c in 0..k {
                    let mut v = self.offset[c];
                    for (d, &xd) in x.iter().enumerate() {
                        v += self.coeff[c][d] * xd;
                    }
                    out.push(v);
                }
            }
            SyntheticKind::ProductExponential => {
                for c in 0..k {
                    let s: f64 = x.iter().enumerate().map(|(d, &xd)| self.coeff[c][d] * xd).sum();
                    out.push((-s).exp());
                }
            }
            SyntheticKind::AirmassLike => {
                let depth = x[0];
                let mu = x[1].to_radians().cos();
                let extra: f64 = x[2..]
                    .iter()
                    .enumerate()
                    .map(|(d, &xd)| 1.0 + 0.2 * mix(d, 1) * xd)
                    .product();
                for c in 0..k {
                    out.push(self.offset[c] * mu * (-self.coeff[c][0] * depth / mu).exp() * extra);
                }
            }
        }
        Ok(out)
    }
}
