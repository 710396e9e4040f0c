//! Fuzzy Henstock-Kurzweil delta integration on time scales.
//!
//! The crate computes gauge integrals of fuzzy-valued functions over
//! time scales (finite unions of closed intervals and isolated points)
//! and ships executable experiments for the structural facts the
//! integral satisfies: linearity, additivity over interior split
//! points, level-wise characterization, almost-everywhere invariance,
//! and dominated/monotone convergence of function sequences.
//!
//! The building blocks, bottom up:
//!
//! * [`timescale`]: jump operators, graininess, delta measure.
//! * [`fuzzy`]: fuzzy numbers as level-cut endpoint tables.
//! * [`fnspec`]: an expression mini-language and fuzzy function families.
//! * [`gauge`]: delta gauges, fine tagged divisions, Riemann sums.
//! * [`integrator`]: gauge-refinement integration with a Cauchy
//!   stopping rule, plus an independent quadrature oracle.
//! * [`convergence`]: sequence experiments and reports.
//! * [`cli`]: the scene-file front end behind the `fhk-delta` binary.
//!
//! Each major capability has a runnable demo under `examples/`.

pub mod cli;
pub mod convergence;
pub mod fnspec;
pub mod fuzzy;
pub mod gauge;
pub mod integrator;
pub mod timescale;

pub use fnspec::{FuzzyFn, FuzzyFnSpec};
pub use fuzzy::{hausdorff, FuzzyNumber, FuzzyNumberSpec};
pub use gauge::{cousin_divide, is_fine, riemann_sum, DeltaGauge, TaggedDivision, TagRule};
pub use integrator::{decomposition_oracle, IntegralResult, Integrator, RealIntegralResult};
pub use timescale::{PointClass, TimeScale};
