//! Adaptive look-up-table construction for expensive vector-valued functions.
//!
//! Given a costly function `f: R^D -> R^K` (the motivating case is a radiative
//! transfer code emitting top-of-atmosphere radiance spectra), this crate
//! builds a scattered-node LUT by iterating an interpolate/acquire/evaluate
//! loop: a Delaunay-based linear interpolant is cross-validated leave-one-out,
//! and new nodes are placed either at the barycenters of the steepest-gradient
//! simplices incident to high-error nodes (geometry term) or at the barycenters
//! of the largest simplices (density term), alternating on a fixed period.
//! The loop stops once the 95th percentile of the leave-one-out relative error
//! drops below a threshold.
//!
//! Modules follow the processing chain:
//!
//! - [`space`]: named physical input ranges and unit-hypercube normalization
//! - [`sampling`]: Latin hypercube, hypercube vertices, Sobol sequences
//! - [`geometry`]: D-dimensional Delaunay triangulation and simplex queries
//! - [`interpolation`]: the LUT container, barycentric linear interpolation,
//!   the spectral relative-error metric and leave-one-out cross-validation
//! - [`acquisition`]: the geometry/density node-placement terms and schedule
//! - [`builder`]: the driver loop (initialize, step, run) and build history
//! - [`targets`]: built-in target functions (toy radiance model, synthetics)
//! - [`harness`]: ground-truth scoring, adaptive-vs-Sobol comparison curves,
//!   2-D error maps, CSV emission
//! - [`config`]: declarative TOML run configuration
//! - [`lutfile`]: the plain-text LUT file format

pub mod acquisition;
pub mod builder;
pub mod config;
pub mod geometry;
pub mod harness;
pub mod interpolation;
pub mod lutfile;
pub mod sampling;
pub mod space;
pub mod targets;




