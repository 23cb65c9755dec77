//! Evaluation protocol: ground-truth LUTs, true-error percentiles, the
//! adaptive-vs-Sobol comparison with multi-seed averaging, 2-D error maps,
//! and CSV emission for external plotting.
//!
//! Arm fairness: the Sobol baseline (first Sobol points plus the `2^D`
//! hypercube corners, so neither arm extrapolates) is scored through exactly
//! the same triangulation, interpolation, error-metric and percentile code
//! paths as the adaptive arm.
//!
//! Multi-run aggregation: adaptive runs are aligned by iteration index; runs
//! that terminated early carry their final state forward, and the curve ends
//! at the first checkpoint where every run has terminated. The Sobol curve is
//! evaluated at the rounded mean node count of each adaptive checkpoint,
//! giving both arms a shared size axis.
//!
//! The Sobol nodes-to-criterion search scans node counts on a fixed-step grid
//! from the initial size upward and refines linearly inside the first
//! crossing bracket; the measured count (not a curve fit) is reported.

use std::io::{Read, Write};

use rayon::prelude::*;
use thiserror::Error;

use crate::builder::{
    evaluate_batch, initialize, step, BuildConfig, BuildError, IterationRecord, StepStatus,
    TargetFunction, TermKind, TerminationReason,
};
use crate::geometry::Triangulation;
use crate::interpolation::{
    interpolate, loo_errors, percentile, relative_error, InterpolationError, Lut,
};
use crate::sampling::{hypercube_vertices, latin_hypercube, scale_to_space, SamplingError};
use crate::space::InputSpace;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Interpolation(#[from] InterpolationError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error("error maps require a 2-dimensional space, got {0}")]
    WrongDimension(usize),
    #[error("invalid harness argument: {0}")]
    InvalidArgument(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse: {0}")]
    Parse(String),
}

/// A dense independently sampled evaluation set.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub points: Vec<Vec<f64>>,
    pub spectra: Vec<Vec<f64>>,
    pub seed: u64,
}

impl GroundTruth {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Latin hypercube sample of size `n` evaluated through the target.
pub fn make_ground_truth(
    space: &InputSpace,
    target: &dyn TargetFunction,
    n: usize,
    seed: u64,
) -> Result<GroundTruth, HarnessError> {
    if n < 1 {
        return Err(HarnessError::InvalidArgument("truth size must be >= 1".into()));
    }
    let unit = latin_hypercube(space.dim(), n, seed)?;
    let points = scale_to_space(&unit, space)?;
    let spectra = evaluate_batch(target, &points)?;
    Ok(GroundTruth { points, spectra, seed })
}

/// Interpolate the LUT at every truth point and reduce the worst-channel
/// relative errors to (P95, P97.5, P100).
pub fn true_error_percentiles(
    lut: &Lut,
    truth: &GroundTruth,
) -> Result<(f64, f64, f64), HarnessError> {
    let tri = lut.triangulate_nodes()?;
    true_error_percentiles_with(lut, &tri, truth)
}

/// As [`true_error_percentiles`] with a caller-provided triangulation.
pub fn true_error_percentiles_with(
    lut: &Lut,
    tri: &Triangulation,
    truth: &GroundTruth,
) -> Result<(f64, f64, f64), HarnessError> {
    let deltas: Vec<f64> = truth
        .points
        .par_iter()
        .zip(truth.spectra.par_iter())
        .map(|(x, y_true)| -> Result<f64, HarnessError> {
            let y_hat = interpolate(lut, tri, x)?;
            Ok(relative_error(&y_hat, y_true)?.delta_percent)
        })
        .collect::<Result<_, _>>()?;
    Ok((
        percentile(&deltas, 95.0)?,
        percentile(&deltas, 97.5)?,
        percentile(&deltas, 100.0)?,
    ))
}

/// Sobol-baseline LUT with `total_nodes` nodes: the `2^D` hypercube corners
/// plus the first `total_nodes - 2^D` Sobol points.
pub fn sobol_baseline_lut(
    space: &InputSpace,
    target: &dyn TargetFunction,
    total_nodes: usize,
) -> Result<Lut, HarnessError> {
    let dim = space.dim();
    let corners = 1usize << dim;
    if total_nodes <= corners {
        return Err(HarnessError::InvalidArgument(format!(
            "need more than {corners} nodes for a {dim}-D Sobol baseline"
        )));
    }
    let mut unit = crate::sampling::sobol_sequence(dim, total_nodes - corners)?;
    let n_sobol = unit.points.len();
    unit.points.extend(hypercube_vertices(dim)?.points);
    let phys = scale_to_space(&unit, space)?;
    let spectra = evaluate_batch(target, &phys)?;
    let mut flags = vec![false; n_sobol];
    flags.extend(std::iter::repeat(true).take(corners));
    Ok(Lut::new(space.clone(), phys, spectra, target.wavelengths().to_vec(), flags)?)
}

/// Smallest Sobol-baseline node count whose LOO p95 drops below `epsilon_t`,
/// found on a `scan_step` grid from the initial size and refined linearly
/// inside the first crossing bracket. `None` if `max_nodes` is reached first.
pub fn sobol_nodes_to_criterion(
    space: &InputSpace,
    target: &dyn TargetFunction,
    epsilon_t: f64,
    start: usize,
    max_nodes: usize,
    scan_step: usize,
) -> Result<Option<usize>, HarnessError> {
    let step = scan_step.max(1);
    let p95_of = |m: usize| -> Result<f64, HarnessError> {
        let lut = sobol_baseline_lut(space, target, m)?;
        Ok(loo_errors(&lut)?.p95)
    };
    let mut m = start;
    let mut crossing = None;
    while m <= max_nodes {
        if p95_of(m)? < epsilon_t {
            crossing = Some(m);
            break;
        }
        m += step;
    }
    let Some(hi) = crossing else { return Ok(None) };
    let mut best = hi;
    let lo = hi.saturating_sub(step - 1).max(start);
    for m in (lo..hi).rev() {
        if p95_of(m)? < epsilon_t {
            best = m;
        } else {
            break;
        }
    }
    Ok(Some(best))
}

/// One aggregated point of a performance curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub checkpoint: usize,
    /// Mean node count across runs (integral for the Sobol arm).
    pub node_count: f64,
    pub loo_p95_mean: f64,
    pub loo_p95_std: f64,
    pub true_p95: f64,
    pub true_p975: f64,
    pub true_p100: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerformanceCurve {
    pub method: String,
    pub points: Vec<CurvePoint>,
}

/// Per-seed summary of one adaptive run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub seed: u64,
    pub termination: TerminationReason,
    pub final_nodes: usize,
    pub final_loo_p95: f64,
    pub true_p95: f64,
    pub true_p975: f64,
    pub true_p100: f64,
}

/// Everything `compare` produces.
#[derive(Debug, Clone)]
pub struct ComparisonOutcome {
    pub adaptive: PerformanceCurve,
    pub sobol: PerformanceCurve,
    pub runs: Vec<RunSummary>,
    /// Mean final node count of the adaptive runs.
    pub adaptive_nodes_mean: f64,
    /// Sobol nodes-to-criterion (None if the cap was hit first).
    pub sobol_nodes_to_criterion: Option<usize>,
    /// adaptive_nodes_mean / sobol_nodes_to_criterion.
    pub node_ratio: Option<f64>,
    pub adaptive_true_p100_mean: f64,
    /// Mean true P100 of Sobol LUTs matched to each run's final node count.
    pub sobol_matched_true_p100_mean: f64,
}

struct Checkpoint {
    node_count: usize,
    loo_p95: f64,
    true_p95: f64,
    true_p975: f64,
    true_p100: f64,
}

struct RunTrace {
    checkpoints: Vec<Checkpoint>,
    termination: TerminationReason,
    final_nodes: usize,
    final_loo_p95: f64,
}

/// Drive the build loop while scoring every visited LUT against the truth.
fn instrumented_run(
    cfg: &BuildConfig,
    target: &dyn TargetFunction,
    truth: &GroundTruth,
) -> Result<RunTrace, HarnessError> {
    let mut lut = initialize(cfg, target)?;
    let mut checkpoints = Vec::new();
    let termination;
    let final_loo_p95;
    let mut iteration = 0usize;
    loop {
        iteration += 1;
        let node_count = lut.node_count();
        let tri = lut.triangulate_nodes()?;
        let (true_p95, true_p975, true_p100) = true_error_percentiles_with(&lut, &tri, truth)?;
        let outcome = step(lut, iteration, cfg, target)?;
        lut = outcome.lut;
        checkpoints.push(Checkpoint {
            node_count,
            loo_p95: outcome.report.p95,
            true_p95,
            true_p975,
            true_p100,
        });
        match outcome.status {
            StepStatus::Converged => {
                termination = TerminationReason::Converged;
                final_loo_p95 = outcome.report.p95;
                break;
            }
            StepStatus::NoProgress { .. } => {
                termination = TerminationReason::NoProgress;
                final_loo_p95 = outcome.report.p95;
                break;
            }
            StepStatus::Advanced { .. } => {
                if lut.node_count() >= cfg.max_nodes {
                    // Score the capped final state before stopping.
                    let tri = lut.triangulate_nodes()?;
                    let (a, b, c) = true_error_percentiles_with(&lut, &tri, truth)?;
                    let p95 = loo_errors(&lut)?.p95;
                    checkpoints.push(Checkpoint {
                        node_count: lut.node_count(),
                        loo_p95: p95,
                        true_p95: a,
                        true_p975: b,
                        true_p100: c,
                    });
                    termination = TerminationReason::MaxNodes;
                    final_loo_p95 = p95;
                    break;
                }
                if iteration >= cfg.max_iterations {
                    let tri = lut.triangulate_nodes()?;
                    let (a, b, c) = true_error_percentiles_with(&lut, &tri, truth)?;
                    let p95 = loo_errors(&lut)?.p95;
                    checkpoints.push(Checkpoint {
                        node_count: lut.node_count(),
                        loo_p95: p95,
                        true_p95: a,
                        true_p975: b,
                        true_p100: c,
                    });
                    termination = TerminationReason::MaxIterations;
                    final_loo_p95 = p95;
                    break;
                }
            }
        }
    }
    Ok(RunTrace {
        final_nodes: lut.node_count(),
        final_loo_p95,
        checkpoints,
        termination,
    })
}

/// Run the adaptive builder `n_runs` times (seeds `cfg.seed + r`), score
/// every checkpoint against the shared ground truth, and build the matched
/// Sobol baseline curve plus the nodes-to-criterion summary.
pub fn run_comparison(
    cfg: &BuildConfig,
    target: &dyn TargetFunction,
    truth: &GroundTruth,
    n_runs: usize,
    sobol_scan_step: usize,
) -> Result<ComparisonOutcome, HarnessError> {
    if n_runs < 1 {
        return Err(HarnessError::InvalidArgument("need at least one run".into()));
    }
    let mut traces = Vec::with_capacity(n_runs);
    for r in 0..n_runs {
        let mut run_cfg = cfg.clone();
        run_cfg.seed = cfg.seed + r as u64;
        traces.push(instrumented_run(&run_cfg, target, truth)?);
    }

    // Per-seed summaries (final state of each run).
    let runs: Vec<RunSummary> = traces
        .iter()
        .enumerate()
        .map(|(r, t)| {
            let last = t.checkpoints.last().expect("at least one checkpoint");
            RunSummary {
                seed: cfg.seed + r as u64,
                termination: t.termination,
                final_nodes: t.final_nodes,
                final_loo_p95: t.final_loo_p95,
                true_p95: last.true_p95,
                true_p975: last.true_p975,
                true_p100: last.true_p100,
            }
        })
        .collect();

    // Iteration-aligned aggregation with carry-forward after termination.
    let max_len = traces.iter().map(|t| t.checkpoints.len()).max().unwrap();
    let mut adaptive_points = Vec::with_capacity(max_len);
    for k in 0..max_len {
        let at = |t: &RunTrace| -> (f64, f64, f64, f64, f64) {
            let c = &t.checkpoints[k.min(t.checkpoints.len() - 1)];
            (c.node_count as f64, c.loo_p95, c.true_p95, c.true_p975, c.true_p100)
        };
        let n = traces.len() as f64;
        let vals: Vec<_> = traces.iter().map(at).collect();
        let mean = |f: &dyn Fn(&(f64, f64, f64, f64, f64)) -> f64| {
            vals.iter().map(f).sum::<f64>() / n
        };
        let m_mean = mean(&|v| v.0);
        let p95_mean = mean(&|v| v.1);
        let p95_std =
            (vals.iter().map(|v| (v.1 - p95_mean).powi(2)).sum::<f64>() / n).sqrt();
        adaptive_points.push(CurvePoint {
            checkpoint: k,
            node_count: m_mean,
            loo_p95_mean: p95_mean,
            loo_p95_std: p95_std,
            true_p95: mean(&|v| v.2),
            true_p975: mean(&|v| v.3),
            true_p100: mean(&|v| v.4),
        });
    }
    // The curve ends once every run has terminated (mean size stops growing).
    dedup_non_increasing(&mut adaptive_points);

    // Sobol arm at the matched (rounded mean) node counts.
    let corners = 1usize << cfg.space.dim();
    let mut sobol_points = Vec::new();
    let mut prev_m = 0usize;
    for (k, ap) in adaptive_points.iter().enumerate() {
        let m = (ap.node_count.round() as usize).max(corners + cfg.space.dim() + 2);
        if m <= prev_m {
            continue;
        }
        prev_m = m;
        let lut = sobol_baseline_lut(&cfg.space, target, m)?;
        let report = loo_errors(&lut)?;
        let tri = lut.triangulate_nodes()?;
        let (a, b, c) = true_error_percentiles_with(&lut, &tri, truth)?;
        sobol_points.push(CurvePoint {
            checkpoint: k,
            node_count: m as f64,
            loo_p95_mean: report.p95,
            loo_p95_std: 0.0,
            true_p95: a,
            true_p975: b,
            true_p100: c,
        });
    }

    // Headline numbers.
    let adaptive_nodes_mean =
        runs.iter().map(|r| r.final_nodes as f64).sum::<f64>() / runs.len() as f64;
    let start = cfg.initial_node_count();
    let sobol_needed = sobol_nodes_to_criterion(
        &cfg.space,
        target,
        cfg.acquisition.epsilon_t,
        start,
        cfg.max_nodes,
        sobol_scan_step,
    )?;
    let node_ratio = sobol_needed.map(|s| adaptive_nodes_mean / s as f64);
    let adaptive_true_p100_mean =
        runs.iter().map(|r| r.true_p100).sum::<f64>() / runs.len() as f64;
    let mut sobol_p100_sum = 0.0;
    for r in &runs {
        let lut = sobol_baseline_lut(&cfg.space, target, r.final_nodes)?;
        let (_, _, p100) = true_error_percentiles(&lut, truth)?;
        sobol_p100_sum += p100;
    }
    let sobol_matched_true_p100_mean = sobol_p100_sum / runs.len() as f64;

    Ok(ComparisonOutcome {
        adaptive: PerformanceCurve { method: "adaptive".into(), points: adaptive_points },
        sobol: PerformanceCurve { method: "sobol".into(), points: sobol_points },
        runs,
        adaptive_nodes_mean,
        sobol_nodes_to_criterion: sobol_needed,
        node_ratio,
        adaptive_true_p100_mean,
        sobol_matched_true_p100_mean,
    })
}

fn dedup_non_increasing(points: &mut Vec<CurvePoint>) {
    let mut keep = Vec::with_capacity(points.len());
    let mut last = f64::NEG_INFINITY;
    for p in points.drain(..) {
        if p.node_count > last {
            last = p.node_count;
            keep.push(p);
        }
    }
    *points = keep;
}

/// Cross-validation and true error maps on a `grid_n x grid_n` raster
/// (row-major over axis 0 then axis 1). Grid cells outside the hull of the
/// non-vertex nodes hold NaN in the cross-validation map.
#[derive(Debug, Clone)]
pub struct ErrorMaps {
    pub axis0: Vec<f64>,
    pub axis1: Vec<f64>,
    pub cv: Vec<f64>,
    pub truth: Vec<f64>,
}

/// Build both 2-D error maps for a LUT: the scattered leave-one-out errors
/// linearly interpolated onto the grid, and the true error of the LUT
/// interpolant against the target at every grid point.
pub fn error_map_2d(
    lut: &Lut,
    target: &dyn TargetFunction,
    grid_n: usize,
) -> Result<ErrorMaps, HarnessError> {
    if lut.dim() != 2 {
        return Err(HarnessError::WrongDimension(lut.dim()));
    }
    if grid_n < 2 {
        return Err(HarnessError::InvalidArgument("grid must be at least 2x2".into()));
    }
    let report = loo_errors(lut)?;
    let vars = lut.space().variables();
    let linspace = |min: f64, max: f64| -> Vec<f64> {
        (0..grid_n)
            .map(|i| min + (max - min) * i as f64 / (grid_n as f64 - 1.0))
            .collect()
    };
    let axis0 = linspace(vars[0].min, vars[0].max);
    let axis1 = linspace(vars[1].min, vars[1].max);

    // Scattered-LOO interpolant over the non-vertex nodes.
    let cv_points: Vec<Vec<f64>> = report
        .node_ids
        .iter()
        .map(|&j| lut.x_unit(j).to_vec())
        .collect();
    let cv_tri = crate::geometry::triangulate(&cv_points).map_err(InterpolationError::Geometry)?;

    let lut_tri = lut.triangulate_nodes()?;
    let cells: Vec<(usize, usize)> = (0..grid_n)
        .flat_map(|i| (0..grid_n).map(move |j| (i, j)))
        .collect();
    let results: Vec<(f64, f64)> = cells
        .par_iter()
        .map(|&(i, j)| -> Result<(f64, f64), HarnessError> {
            let phys = vec![axis0[i], axis1[j]];
            let unit = lut.space().normalize(&phys).map_err(InterpolationError::Space)?;
            let cv = match cv_tri.locate(&unit) {
                Some(s) => {
                    let bc = cv_tri.barycentric(s, &unit).map_err(InterpolationError::Geometry)?;
                    bc.weights
                        .iter()
                        .zip(cv_tri.simplex(s))
                        .map(|(w, &v)| w * report.delta[v as usize])
                        .sum()
                }
                None => f64::NAN,
            };
            let y_hat = interpolate(lut, &lut_tri, &phys)?;
            let y_true = target
                .evaluate(&phys)
                .map_err(|source| BuildError::Target { input: phys.clone(), source })?;
            let truth = relative_error(&y_hat, &y_true)?.delta_percent;
            Ok((cv, truth))
        })
        .collect::<Result<_, _>>()?;

    let (cv, truth) = results.into_iter().unzip();
    Ok(ErrorMaps { axis0, axis1, cv, truth })
}

// ---------------------------------------------------------------------------
// CSV emission and parsing. Floats use Rust's shortest round-trip formatting,
// so re-parsing a file reproduces the in-memory records exactly.

pub fn write_history_csv<W: Write>(
    records: &[IterationRecord],
    termination: TerminationReason,
    w: W,
) -> Result<(), HarnessError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["iteration", "node_count", "term", "nodes_added", "loo_p95", "seconds"])?;
    for r in records {
        out.write_record([
            r.iteration.to_string(),
            r.node_count.to_string(),
            r.term.to_string(),
            r.nodes_added.to_string(),
            r.loo_p95.to_string(),
            r.seconds.to_string(),
        ])?;
    }
    // Termination trailer row keeps the file self-describing.
    out.write_record(["termination", &termination.to_string(), "", "", "", ""])?;
    out.flush()?;
    Ok(())
}

pub fn read_history_csv<R: Read>(
    r: R,
) -> Result<(Vec<IterationRecord>, TerminationReason), HarnessError> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut records = Vec::new();
    let mut termination = None;
    for row in rdr.records() {
        let row = row?;
        if row.get(0) == Some("termination") {
            termination = Some(
                row.get(1)
                    .unwrap_or("")
                    .parse::<TerminationReason>()
                    .map_err(HarnessError::Parse)?,
            );
            continue;
        }
        let field = |i: usize| -> Result<&str, HarnessError> {
            row.get(i)
                .ok_or_else(|| HarnessError::Parse(format!("missing column {i}")))
        };
        records.push(IterationRecord {
            iteration: field(0)?.parse().map_err(|e| HarnessError::Parse(format!("{e}")))?,
            node_count: field(1)?.parse().map_err(|e| HarnessError::Parse(format!("{e}")))?,
            term: field(2)?.parse::<TermKind>().map_err(HarnessError::Parse)?,
            nodes_added: field(3)?.parse().map_err(|e| HarnessError::Parse(format!("{e}")))?,
            loo_p95: field(4)?.parse().map_err(|e| HarnessError::Parse(format!("{e}")))?,
            seconds: field(5)?.parse().map_err(|e| HarnessError::Parse(format!("{e}")))?,
        });
    }
    let termination =
        termination.ok_or_else(|| HarnessError::Parse("missing termination row".into()))?;
    Ok((records, termination))
}

pub fn write_curve_csv<W: Write>(curve: &PerformanceCurve, w: W) -> Result<(), HarnessError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "method",
        "checkpoint",
        "node_count",
        "loo_p95_mean",
        "loo_p95_std",
        "true_p95",
        "true_p975",
        "true_p100",
    ])?;
    for p in &curve.points {
        out.write_record([
            curve.method.clone(),
            p.checkpoint.to_string(),
            p.node_count.to_string(),
            p.loo_p95_mean.to_string(),
            p.loo_p95_std.to_string(),
            p.true_p95.to_string(),
            p.true_p975.to_string(),
            p.true_p100.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_curve_csv<R: Read>(r: R) -> Result<PerformanceCurve, HarnessError> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut method = String::new();
    let mut points = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let field = |i: usize| -> Result<&str, HarnessError> {
            row.get(i)
                .ok_or_else(|| HarnessError::Parse(format!("missing column {i}")))
        };
        let parse = |i: usize| -> Result<f64, HarnessError> {
            field(i)?.parse().map_err(|e| HarnessError::Parse(format!("{e}")))
        };
        method = field(0)?.to_string();
        points.push(CurvePoint {
            checkpoint: field(1)?.parse().map_err(|e| HarnessError::Parse(format!("{e}")))?,
            node_count: parse(2)?,
            loo_p95_mean: parse(3)?,
            loo_p95_std: parse(4)?,
            true_p95: parse(5)?,
            true_p975: parse(6)?,
            true_p100: parse(7)?,
        });
    }
    Ok(PerformanceCurve { method, points })
}

pub fn write_summary_csv<W: Write>(
    outcome: &ComparisonOutcome,
    w: W,
) -> Result<(), HarnessError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["key", "value"])?;
    let fmt_opt = |v: Option<f64>| v.map_or("unreached".to_string(), |x| x.to_string());
    out.write_record(["runs", &outcome.runs.len().to_string()])?;
    out.write_record(["adaptive_nodes_mean", &outcome.adaptive_nodes_mean.to_string()])?;
    out.write_record([
        "sobol_nodes_to_criterion",
        &fmt_opt(outcome.sobol_nodes_to_criterion.map(|v| v as f64)),
    ])?;
    out.write_record(["node_ratio", &fmt_opt(outcome.node_ratio)])?;
    out.write_record([
        "adaptive_true_p100_mean",
        &outcome.adaptive_true_p100_mean.to_string(),
    ])?;
    out.write_record([
        "sobol_matched_true_p100_mean",
        &outcome.sobol_matched_true_p100_mean.to_string(),
    ])?;
    for r in &outcome.runs {
        out.write_record([
            format!("run_{}", r.seed),
            format!(
                "termination={} nodes={} loo_p95={} true_p100={}",
                r.termination, r.final_nodes, r.final_loo_p95, r.true_p100
            ),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_percentiles_csv<W: Write>(
    p: (f64, f64, f64),
    w: W,
) -> Result<(), HarnessError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["true_p95", "true_p975", "true_p100"])?;
    out.write_record([p.0.to_string(), p.1.to_string(), p.2.to_string()])?;
    out.flush()?;
    Ok(())
}

/// Long-format map emission: one row per grid cell.
pub fn write_error_map_csv<W: Write>(
    maps: &ErrorMaps,
    names: (&str, &str),
    which: MapKind,
    w: W,
) -> Result<(), HarnessError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([names.0, names.1, "delta_percent"])?;
    let n = maps.axis0.len();
    let data = match which {
        MapKind::CrossValidation => &maps.cv,
        MapKind::Truth => &maps.truth,
    };
    for i in 0..n {
        for j in 0..n {
            out.write_record([
                maps.axis0[i].to_string(),
                maps.axis1[j].to_string(),
                data[i * n + j].to_string(),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    CrossValidation,
    Truth,
}
