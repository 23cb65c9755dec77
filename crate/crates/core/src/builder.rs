//! The driver loop: initialization, the interpolate/acquire/evaluate step,
//! the stop condition and history recording.
//!
//! One iteration computes the leave-one-out report once and uses it for both
//! the stop check and the geometry term. The stop condition is evaluated at
//! the start of the iteration, so a LUT that already meets the threshold is
//! never grown. Safety bounds (`max_iterations`, `max_nodes`) and the
//! distinct no-progress termination (every proposal deduplicated away while
//! the threshold is unmet) guard against non-convergence.

use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::acquisition::{
    beta, density_term, geometry_term, AcquisitionConfig, AcquisitionError, SourceTerm,
};
use crate::interpolation::{loo_errors, ErrorReport, InterpolationError, Lut};
use crate::sampling::{hypercube_vertices, latin_hypercube, scale_to_space, SamplingError};
use crate::space::InputSpace;
use crate::targets::TargetError;

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("invalid build config: {0}")]
    InvalidConfig(String),
    #[error("target evaluation failed at {input:?}: {source}")]
    Target { input: Vec<f64>, source: TargetError },
    #[error(transparent)]
    Acquisition(#[from] AcquisitionError),
    #[error(transparent)]
    Interpolation(#[from] InterpolationError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
}

/// The function being tabulated: a deterministic, pure map from a physical
/// input vector to a spectrum. Implementations must tolerate concurrent
/// evaluation.
pub trait TargetFunction: Sync {
    fn dim(&self) -> usize;
    fn output_len(&self) -> usize;
    /// Strictly increasing wavelength grid, `output_len` entries.
    fn wavelengths(&self) -> &[f64];
    fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>, TargetError>;
}

/// Full configuration of one build.
#[derive(Debug, Clone)]
pub struct BuildConfig {
    pub space: InputSpace,
    pub acquisition: AcquisitionConfig,
    pub seed: u64,
    /// Safety bound on acquisition iterations.
    pub max_iterations: usize,
    /// Hard cap on LUT size; must exceed the initial node count.
    pub max_nodes: usize,
}

impl BuildConfig {
    /// Defaults: `T = 3`, `max_iterations = 200`, `max_nodes = 10_000`.
    pub fn new(space: InputSpace, epsilon_t: f64, seed: u64) -> Self {
        let dim = space.dim();
        Self {
            space,
            acquisition: AcquisitionConfig::for_dim(dim, epsilon_t),
            seed,
            max_iterations: 200,
            max_nodes: 10_000,
        }
    }

    /// Initial node count `m0 = 5 * 2^D + 2^D`.
    pub fn initial_node_count(&self) -> usize {
        let corners = 1usize << self.space.dim();
        5 * corners + corners
    }

    pub fn validate(&self) -> Result<(), BuildError> {
        self.acquisition.validate()?;
        if self.max_iterations < 1 {
            return Err(BuildError::InvalidConfig("max_iterations must be >= 1".into()));
        }
        if self.max_nodes <= self.initial_node_count() {
            return Err(BuildError::InvalidConfig(format!(
                "max_nodes ({}) must exceed the initial node count ({})",
                self.max_nodes,
                self.initial_node_count()
            )));
        }
        Ok(())
    }
}

/// Which mechanism added nodes in a history record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermKind {
    Init,
    Geometry,
    Density,
}

impl From<SourceTerm> for TermKind {
    fn from(t: SourceTerm) -> Self {
        match t {
            SourceTerm::Geometry => TermKind::Geometry,
            SourceTerm::Density => TermKind::Density,
        }
    }
}

impl std::fmt::Display for TermKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TermKind::Init => "init",
            TermKind::Geometry => "geometry",
            TermKind::Density => "density",
        })
    }
}

impl std::str::FromStr for TermKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "init" => Ok(TermKind::Init),
            "geometry" => Ok(TermKind::Geometry),
            "density" => Ok(TermKind::Density),
            other => Err(format!("unknown term {other:?}")),
        }
    }
}

/// One history row. `node_count` is the LUT size after this row's additions;
/// `loo_p95` is the cross-validation p95 of the LUT the iteration *started*
/// from (for the init row, of the freshly initialized LUT). Use
/// [`BuildHistory::checkpoints`] for (size, p95-of-that-size) pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub node_count: usize,
    pub term: TermKind,
    pub nodes_added: usize,
    pub loo_p95: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminationReason {
    /// LOO p95 dropped below the threshold.
    Converged,
    MaxIterations,
    MaxNodes,
    /// The active term proposed nothing while the threshold was unmet.
    NoProgress,
}

impl std::fmt::Display for TerminationReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TerminationReason::Converged => "converged",
            TerminationReason::MaxIterations => "max-iterations",
            TerminationReason::MaxNodes => "max-nodes",
            TerminationReason::NoProgress => "no-progress",
        })
    }
}

impl std::str::FromStr for TerminationReason {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "converged" => Ok(Self::Converged),
            "max-iterations" => Ok(Self::MaxIterations),
            "max-nodes" => Ok(Self::MaxNodes),
            "no-progress" => Ok(Self::NoProgress),
            other => Err(format!("unknown termination reason {other:?}")),
        }
    }
}

/// Per-iteration records plus the termination reason and the LOO p95 of the
/// final LUT.
#[derive(Debug, Clone)]
pub struct BuildHistory {
    pub records: Vec<IterationRecord>,
    pub termination: TerminationReason,
    pub final_p95: f64,
}

impl BuildHistory {
    /// `(node_count, LOO p95 measured on that node count)` pairs along the
    /// build, in visit order. Re-pairs the lagged `loo_p95` column and drops
    /// rows that added nothing.
    pub fn checkpoints(&self) -> Vec<(usize, f64)> {
        let mut out = Vec::with_capacity(self.records.len());
        for (k, rec) in self.records.iter().enumerate() {
            let p95 = match self.records.get(k + 1) {
                Some(next) => next.loo_p95,
                None => self.final_p95,
            };
            if out.last().map_or(true, |&(m, _)| rec.node_count > m) {
                out.push((rec.node_count, p95));
            }
        }
        out
    }
}

/// Evaluate the target at a batch of physical points, in order, in parallel.
pub fn evaluate_batch(
    target: &dyn TargetFunction,
    points: &[Vec<f64>],
) -> Result<Vec<Vec<f64>>, BuildError> {
    points
        .par_iter()
        .map(|x| {
            target
                .evaluate(x)
                .map_err(|source| BuildError::Target { input: x.clone(), source })
        })
        .collect()
}

/// Initial LUT: `5 * 2^D` Latin hypercube nodes (seeded) plus all `2^D`
/// hypercube corners, evaluated through the target; corners carry the vertex
/// flag.
pub fn initialize(cfg: &BuildConfig, target: &dyn TargetFunction) -> Result<Lut, BuildError> {
    cfg.validate()?;
    let dim = cfg.space.dim();
    if target.dim() != dim {
        return Err(BuildError::InvalidConfig(format!(
            "target dimension {} does not match space dimension {dim}",
            target.dim()
        )));
    }
    let mut unit = latin_hypercube(dim, 5 * (1 << dim), cfg.seed)?;
    let n_random = unit.points.len();
    unit.points.extend(hypercube_vertices(dim)?.points);
    let phys = scale_to_space(&unit, &cfg.space)?;
    let spectra = evaluate_batch(target, &phys)?;
    let mut flags = vec![false; n_random];
    flags.extend(std::iter::repeat(true).take(1 << dim));
    Ok(Lut::new(
        cfg.space.clone(),
        phys,
        spectra,
        target.wavelengths().to_vec(),
        flags,
    )?)
}

/// Outcome of one acquisition iteration.
#[derive(Debug)]
pub struct StepOutcome {
    pub lut: Lut,
    /// LOO report of the LUT the step started from.
    pub report: ErrorReport,
    pub status: StepStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepStatus {
    /// Stop condition already met; the LUT is returned unchanged.
    Converged,
    Advanced { term: TermKind, added: usize },
    /// Active term proposed nothing (terminal, reported distinctly).
    NoProgress { term: TermKind },
}

/// One iteration: cross-validate, stop-check, dispatch the scheduled term,
/// evaluate the target at the proposals and append them.
pub fn step(
    lut: Lut,
    iteration: usize,
    cfg: &BuildConfig,
    target: &dyn TargetFunction,
) -> Result<StepOutcome, BuildError> {
    debug_assert!(iteration >= 1);
    let report = loo_errors(&lut)?;
    if report.p95 < cfg.acquisition.epsilon_t {
        return Ok(StepOutcome { lut, report, status: StepStatus::Converged });
    }
    let tri = lut.triangulate_nodes()?;
    let proposal = if beta(iteration, cfg.acquisition.period) == 1 {
        geometry_term(&lut, &tri, &report, &cfg.acquisition)
    } else {
        density_term(&tri, &cfg.acquisition)
    };
    let term = TermKind::from(proposal.term);
    if proposal.is_empty() {
        return Ok(StepOutcome { lut, report, status: StepStatus::NoProgress { term } });
    }
    let mut phys = Vec::with_capacity(proposal.len());
    for u in &proposal.points {
        phys.push(cfg.space.denormalize(u).map_err(InterpolationError::Space)?);
    }
    let spectra = evaluate_batch(target, &phys)?;
    let added = phys.len();
    let mut lut = lut;
    lut.append_nodes(phys, spectra)?;
    Ok(StepOutcome { lut, report, status: StepStatus::Advanced { term, added } })
}

/// Run the full loop until the stop condition, a safety bound, or
/// no-progress. Reproducible: identical `(cfg, target)` give identical
/// results.
pub fn run(
    cfg: &BuildConfig,
    target: &dyn TargetFunction,
) -> Result<(Lut, BuildHistory), BuildError> {
    cfg.validate()?;
    let t0 = Instant::now();
    let mut lut = initialize(cfg, target)?;
    let init_seconds = t0.elapsed().as_secs_f64();
    let m0 = lut.node_count();

    let mut records: Vec<IterationRecord> = Vec::new();
    let termination;
    let final_p95;

    let mut iteration = 0usize;
    loop {
        iteration += 1;
        let t_iter = Instant::now();
        let outcome = step(lut, iteration, cfg, target)?;
        lut = outcome.lut;
        if records.is_empty() {
            records.push(IterationRecord {
                iteration: 0,
                node_count: m0,
                term: TermKind::Init,
                nodes_added: m0,
                loo_p95: outcome.report.p95,
                seconds: init_seconds,
            });
        }
        match outcome.status {
            StepStatus::Converged => {
                termination = TerminationReason::Converged;
                final_p95 = outcome.report.p95;
                break;
            }
            StepStatus::NoProgress { term } => {
                records.push(IterationRecord {
                    iteration,
                    node_count: lut.node_count(),
                    term,
                    nodes_added: 0,
                    loo_p95: outcome.report.p95,
                    seconds: t_iter.elapsed().as_secs_f64(),
                });
                termination = TerminationReason::NoProgress;
                final_p95 = outcome.report.p95;
                break;
            }
            StepStatus::Advanced { term, added } => {
                records.push(IterationRecord {
                    iteration,
                    node_count: lut.node_count(),
                    term,
                    nodes_added: added,
                    loo_p95: outcome.report.p95,
                    seconds: t_iter.elapsed().as_secs_f64(),
                });
                if lut.node_count() >= cfg.max_nodes {
                    termination = TerminationReason::MaxNodes;
                    final_p95 = loo_errors(&lut)?.p95;
                    break;
                }
                if iteration >= cfg.max_iterations {
                    termination = TerminationReason::MaxIterations;
                    final_p95 = loo_errors(&lut)?.p95;
                    break;
                }
            }
        }
    }

    Ok((lut, BuildHistory { records, termination, final_p95 }))
}
