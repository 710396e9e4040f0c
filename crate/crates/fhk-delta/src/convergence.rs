//! Executable experiments for sequences of fuzzy integrands:
//! convergence of integrals under pointwise limits, uniform
//! integrability probes, dominated and monotone hypothesis checks, and
//! almost-everywhere invariance under pointwise overrides.
//!
//! The order on fuzzy values used by the dominated and monotone checks
//! is endpoint-wise at every membership level; every report that
//! depends on it says so. Experiments can refute this implementation,
//! not the underlying facts: a hypothesis-passing family whose
//! distances fail to shrink is reported as inconclusive, never as a
//! counterexample.

use thiserror::Error;

use crate::fnspec::{Expr, FuzzyFn, OverridePoint};
use crate::fuzzy::{hausdorff, FuzzyNumber};
use crate::gauge::{cousin_divide, riemann_sum, DeltaGauge};
use crate::integrator::{IntegralResult, IntegrateError, Integrator};
use crate::timescale::{TimeScale, TimeScaleError};
use crate::fnspec::expr::BinOp;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConvergenceError {
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
    #[error(transparent)]
    Scale(#[from] TimeScaleError),
    #[error("the limit integral did not converge")]
    LimitNotConverged,
    #[error("family member {0} is not defined")]
    MissingMember(usize),
    #[error("the experiment needs both bounding functions")]
    MissingBounds,
    #[error(
        "override at {x} is rejected: the point is right-scattered with graininess {graininess}"
    )]
    ScatteredOverride { x: f64, graininess: f64 },
}

/// Generator for a sequence of fuzzy integrands.
#[derive(Debug, Clone)]
pub enum SequenceFamily {
    /// `f_n(x) = x^n` times a fixed fuzzy number.
    PowerScaled { base: FuzzyNumber },
    /// Triangular family whose spreads shrink like `1 / n`.
    ShrinkingSpread { core: Expr, left: Expr, right: Expr },
    /// An explicit list; member `n` is the `n`-th entry.
    Members { members: Vec<FuzzyFn> },
}

/// A function sequence, its claimed pointwise limit, and optional
/// bounding functions for the dominated hypothesis.
#[derive(Debug, Clone)]
pub struct SequenceSpec {
    pub family: SequenceFamily,
    pub n_max: usize,
    pub limit: FuzzyFn,
    pub lower_bound: Option<FuzzyFn>,
    pub upper_bound: Option<FuzzyFn>,
}

impl SequenceSpec {
    pub fn new(family: SequenceFamily, n_max: usize, limit: FuzzyFn) -> Self {
        SequenceSpec {
            family,
            n_max,
            limit,
            lower_bound: None,
            upper_bound: None,
        }
    }

    pub fn with_bounds(mut self, lower: FuzzyFn, upper: FuzzyFn) -> Self {
        self.lower_bound = Some(lower);
        self.upper_bound = Some(upper);
        self
    }

    /// The `n`-th member of the sequence, 1-based.
    pub fn member(&self, n: usize) -> Result<FuzzyFn, ConvergenceError> {
        if n == 0 || n > self.n_max {
            return Err(ConvergenceError::MissingMember(n));
        }
        Ok(match &self.family {
            SequenceFamily::PowerScaled { base } => FuzzyFn::Scaled {
                scalar: Expr::var_power(n as u32),
                base: base.clone(),
            },
            SequenceFamily::ShrinkingSpread { core, left, right } => FuzzyFn::Triangular {
                core: core.clone(),
                left: Expr::binary(BinOp::Div, left.clone(), Expr::number(n as f64)),
                right: Expr::binary(BinOp::Div, right.clone(), Expr::number(n as f64)),
            },
            SequenceFamily::Members { members } => members
                .get(n - 1)
                .cloned()
                .ok_or(ConvergenceError::MissingMember(n))?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Converging,
    Inconclusive,
    HypothesisFailed,
}

/// Outcome of a pointwise hypothesis check on a dense sample.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisOutcome {
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceEntry {
    pub n: usize,
    pub result: IntegralResult,
    /// Distance from the member integral to the limit integral.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub entries: Vec<SequenceEntry>,
    pub limit: IntegralResult,
    pub verdict: Verdict,
    pub hypothesis: Option<HypothesisOutcome>,
    /// Whether the integral endpoint tables are monotone in `n`
    /// (checked by the monotone experiment only).
    pub integral_endpoints_monotone: Option<bool>,
    /// Members whose integration did not converge, excluded above.
    pub skipped: Vec<usize>,
}

/// Sample indices used when a caller does not pin them: all of
/// `1..=n_max` for short sequences, a sparse spread ending at `n_max`
/// otherwise.
pub fn default_samples(n_max: usize) -> Vec<usize> {
    if n_max <= 12 {
        (1..=n_max).collect()
    } else {
        let mut ns: Vec<usize> = [1, 2, 3, 4, 6, 9, 16, 25, 49]
            .into_iter()
            .filter(|&n| n < n_max)
            .collect();
        ns.push(n_max);
        ns
    }
}

/// Integrates the sampled members and the limit, recording distances.
pub fn run_sequence(
    spec: &SequenceSpec,
    ts: &TimeScale,
    a: f64,
    b: f64,
    integ: &Integrator,
) -> Result<ConvergenceReport, ConvergenceError> {
    run_sequence_at(spec, ts, a, b, integ, &default_samples(spec.n_max))
}

pub fn run_sequence_at(
    spec: &SequenceSpec,
    ts: &TimeScale,
    a: f64,
    b: f64,
    integ: &Integrator,
    ns: &[usize],
) -> Result<ConvergenceReport, ConvergenceError> {
    let limit = integ.integrate(&spec.limit, ts, a, b)?;
    if !limit.converged {
        return Err(ConvergenceError::LimitNotConverged);
    }
    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    for &n in ns {
        let member = spec.member(n)?;
        let result = integ.integrate(&member, ts, a, b)?;
        if result.converged {
            let distance = hausdorff(&result.value, &limit.value);
            entries.push(SequenceEntry { n, result, distance });
        } else {
            skipped.push(n);
        }
    }
    let verdict = judge(spec, ts, a, b, integ, &entries);
    Ok(ConvergenceReport {
        entries,
        limit,
        verdict,
        hypothesis: None,
        integral_endpoints_monotone: None,
        skipped,
    })
}

/// Family-specific distance envelope, when one is known in closed
/// form. Power scaling admits `C / (n + 1)` with `C` the distance from
/// the base to crisp zero; shrinking spreads admit `E / n` with `E`
/// the larger integrated spread.
fn predicted_envelope(
    spec: &SequenceSpec,
    ts: &TimeScale,
    a: f64,
    b: f64,
    integ: &Integrator,
) -> Option<Box<dyn Fn(usize) -> f64>> {
    match &spec.family {
        SequenceFamily::PowerScaled { base } => {
            let c = hausdorff(
                base,
                &FuzzyNumber::crisp_with_levels(0.0, base.levels()).ok()?,
            );
            Some(Box::new(move |n| c / (n as f64 + 1.0)))
        }
        SequenceFamily::ShrinkingSpread { left, right, .. } => {
            let il = integ.integrate_real(left, ts, a, b).ok()?;
            let ir = integ.integrate_real(right, ts, a, b).ok()?;
            if !(il.converged && ir.converged) {
                return None;
            }
            let e = il.value.abs().max(ir.value.abs());
            Some(Box::new(move |n| e / n as f64))
        }
        SequenceFamily::Members { .. } => None,
    }
}

fn judge(
    spec: &SequenceSpec,
    ts: &TimeScale,
    a: f64,
    b: f64,
    integ: &Integrator,
    entries: &[SequenceEntry],
) -> Verdict {
    if entries.is_empty() {
        return Verdict::Inconclusive;
    }
    let last = entries[entries.len() - 1].distance;
    if last <= 2.0 * integ.tol {
        return Verdict::Converging;
    }
    if let Some(env) = predicted_envelope(spec, ts, a, b, integ) {
        let tail = &entries[entries.len() / 2..];
        if tail
            .iter()
            .all(|e| e.distance <= env(e.n) + 10.0 * integ.tol)
        {
            return Verdict::Converging;
        }
    }
    if entries.len() >= 3 {
        let d = &entries[entries.len() - 3..];
        if d[0].distance > d[1].distance && d[1].distance > d[2].distance && last <= 10.0 * integ.tol
        {
            return Verdict::Converging;
        }
    }
    Verdict::Inconclusive
}

/// One row of the uniform-integrability table: a probe gauge base and
/// the worst member gap measured on the single division it generates.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRow {
    pub base: f64,
    pub sup_gap: f64,
    pub gaps: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniformIntegrabilityTable {
    pub probes: Vec<ProbeRow>,
}

impl UniformIntegrabilityTable {
    /// A family passes at `eps` when some probe keeps every member's
    /// gap below it simultaneously.
    pub fn passes_at(&self, eps: f64) -> bool {
        self.probes.iter().any(|p| p.sup_gap <= eps)
    }
}

/// For each probe base, builds one division of `[a, b]` and measures
/// how far every member's Riemann sum over that shared division sits
/// from its own integral.
pub fn check_uniform_integrability(
    spec: &SequenceSpec,
    ts: &TimeScale,
    a: f64,
    b: f64,
    probe_bases: &[f64],
    integ: &Integrator,
) -> Result<UniformIntegrabilityTable, ConvergenceError> {
    let ns = default_samples(spec.n_max);
    let mut integrals = Vec::new();
    for &n in &ns {
        let member = spec.member(n)?;
        let r = integ.integrate(&member, ts, a, b)?;
        if !r.converged {
            return Err(ConvergenceError::LimitNotConverged);
        }
        integrals.push((n, member, r.value));
    }
    let mut probes = Vec::new();
    for &base in probe_bases {
        let gauge = DeltaGauge::uniform(ts, a, b, base).map_err(IntegrateError::Division)?;
        let division = cousin_divide(ts, a, b, gauge).map_err(IntegrateError::Division)?;
        let mut gaps = Vec::new();
        let mut sup_gap = 0.0f64;
        for (n, member, integral) in &integrals {
            let sum = riemann_sum(member, &division, integ.levels)
                .map_err(IntegrateError::Function)?;
            let gap = hausdorff(&sum, integral);
            sup_gap = sup_gap.max(gap);
            gaps.push((*n, gap));
        }
        probes.push(ProbeRow { base, sup_gap, gaps });
    }
    Ok(UniformIntegrabilityTable { probes })
}

// Endpoint-wise comparison at the support and core levels, with a hair
// of slack for accumulated rounding.
fn leq_at_extreme_levels(u: &FuzzyNumber, v: &FuzzyNumber) -> bool {
    let slack = 1e-9;
    let m = u.levels();
    for k in [0, m] {
        if u.lower()[k] > v.lower()[k] + slack || u.upper()[k] > v.upper()[k] + slack {
            return false;
        }
    }
    true
}

/// Runs the sequence after verifying the sandwich hypothesis
/// `lower_bound <= f_n <= upper_bound` pointwise on a dense sample
/// (endpoint-wise at the support and core levels). A violation does
/// not stop the run; the report is labeled vacuous instead.
pub fn dominated_experiment(
    spec: &SequenceSpec,
    ts: &TimeScale,
    a: f64,
    b: f64,
    integ: &Integrator,
) -> Result<ConvergenceReport, ConvergenceError> {
    let lower = spec.lower_bound.as_ref().ok_or(ConvergenceError::MissingBounds)?;
    let upper = spec.upper_bound.as_ref().ok_or(ConvergenceError::MissingBounds)?;
    let samples = ts.sample_points(a, b, 257);
    let ns = default_samples(spec.n_max);
    let mut outcome = HypothesisOutcome {
        passed: true,
        detail: "sandwich holds on the sample (endpoint-wise order)".to_string(),
    };
    'scan: for &n in &ns {
        let member = spec.member(n)?;
        for &x in &samples {
            let g = lower.eval_fuzzy(x, integ.levels).map_err(IntegrateError::Function)?;
            let h = upper.eval_fuzzy(x, integ.levels).map_err(IntegrateError::Function)?;
            let fx = member.eval_fuzzy(x, integ.levels).map_err(IntegrateError::Function)?;
            if !leq_at_extreme_levels(&g, &fx) || !leq_at_extreme_levels(&fx, &h) {
                outcome = HypothesisOutcome {
                    passed: false,
                    detail: format!(
                        "sandwich fails at x = {x} for member {n} (endpoint-wise order); the run below is vacuous"
                    ),
                };
                break 'scan;
            }
        }
    }
    let mut report = run_sequence_at(spec, ts, a, b, integ, &ns)?;
    if !outcome.passed {
        report.verdict = Verdict::HypothesisFailed;
    }
    report.hypothesis = Some(outcome);
    Ok(report)
}

/// Runs the sequence after checking endpoint-wise monotonicity in `n`
/// on a dense sample, then also verifies the consequence that the
/// integral endpoint tables are monotone in `n` (within integration
/// tolerance).
pub fn monotone_experiment(
    spec: &SequenceSpec,
    ts: &TimeScale,
    a: f64,
    b: f64,
    integ: &Integrator,
) -> Result<ConvergenceReport, ConvergenceError> {
    let samples = ts.sample_points(a, b, 257);
    let ns = default_samples(spec.n_max);
    let mut direction = 0i8; // +1 nondecreasing, -1 nonincreasing
    let mut outcome = HypothesisOutcome {
        passed: true,
        detail: "sequence is endpoint-wise monotone on the sample".to_string(),
    };
    'scan: for pair in ns.windows(2) {
        let u = spec.member(pair[0])?;
        let v = spec.member(pair[1])?;
        let mut up = true;
        let mut down = true;
        for &x in &samples {
            let ux = u.eval_fuzzy(x, integ.levels).map_err(IntegrateError::Function)?;
            let vx = v.eval_fuzzy(x, integ.levels).map_err(IntegrateError::Function)?;
            if !leq_pointwise(&ux, &vx) {
                up = false;
            }
            if !leq_pointwise(&vx, &ux) {
                down = false;
            }
            if !up && !down {
                outcome = HypothesisOutcome {
                    passed: false,
                    detail: format!(
                        "members {} and {} are not ordered at x = {x} (endpoint-wise order); the run below is vacuous",
                        pair[0], pair[1]
                    ),
                };
                break 'scan;
            }
        }
        let step = if up && down {
            0
        } else if up {
            1
        } else {
            -1
        };
        if step != 0 {
            if direction == 0 {
                direction = step;
            } else if direction != step {
                outcome = HypothesisOutcome {
                    passed: false,
                    detail: format!(
                        "ordering direction flips between members {} and {}; the run below is vacuous",
                        pair[0], pair[1]
                    ),
                };
                break 'scan;
            }
        }
    }
    let mut report = run_sequence_at(spec, ts, a, b, integ, &ns)?;
    if !outcome.passed {
        report.verdict = Verdict::HypothesisFailed;
        report.integral_endpoints_monotone = None;
    } else {
        let slack = 2.0 * integ.tol;
        let mut monotone = true;
        for pair in report.entries.windows(2) {
            let (u, v) = (&pair[0].result.value, &pair[1].result.value);
            let ordered = |x: &FuzzyNumber, y: &FuzzyNumber| {
                (0..=x.levels()).all(|k| {
                    x.lower()[k] <= y.lower()[k] + slack && x.upper()[k] <= y.upper()[k] + slack
                })
            };
            let ok = match direction {
                1 => ordered(u, v),
                -1 => ordered(v, u),
                _ => ordered(u, v) && ordered(v, u),
            };
            if !ok {
                monotone = false;
            }
        }
        report.integral_endpoints_monotone = Some(monotone);
    }
    report.hypothesis = Some(outcome);
    Ok(report)
}

fn leq_pointwise(u: &FuzzyNumber, v: &FuzzyNumber) -> bool {
    let slack = 1e-9;
    (0..=u.levels()).all(|k| {
        u.lower()[k] <= v.lower()[k] + slack && u.upper()[k] <= v.upper()[k] + slack
    })
}

/// Integrates `f` and its overridden copy with the same schedule and
/// returns the distance between the two integrals. Override points
/// must be right-dense (their singleton delta measure is zero);
/// scattered points are rejected.
pub fn ae_invariance_experiment(
    f: &FuzzyFn,
    overrides: &[OverridePoint],
    ts: &TimeScale,
    a: f64,
    b: f64,
    integ: &Integrator,
) -> Result<f64, ConvergenceError> {
    for p in overrides {
        let g = ts.graininess(p.at)?;
        if g.forward > 0.0 {
            return Err(ConvergenceError::ScatteredOverride {
                x: p.at,
                graininess: g.forward,
            });
        }
    }
    ae_invariance_forced(f, overrides, ts, a, b, integ)
}

/// Test hook behind the invariance experiment: skips the density
/// check, so it can measure the shift a right-scattered override
/// inflicts (the graininess-weighted distance at the point).
pub fn ae_invariance_forced(
    f: &FuzzyFn,
    overrides: &[OverridePoint],
    ts: &TimeScale,
    a: f64,
    b: f64,
    integ: &Integrator,
) -> Result<f64, ConvergenceError> {
    let base = integ.integrate(f, ts, a, b)?;
    let overridden = FuzzyFn::Override {
        base: Box::new(f.clone()),
        points: overrides.to_vec(),
    };
    let shifted = integ.integrate(&overridden, ts, a, b)?;
    Ok(hausdorff(&base.value, &shifted.value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fnspec::parse;

    fn tri012() -> FuzzyNumber {
        FuzzyNumber::triangular(0.0, 1.0, 2.0).unwrap()
    }

    fn quick() -> Integrator {
        Integrator {
            tol: 1e-4,
            levels: 16,
            ..Integrator::default()
        }
    }

    fn unit() -> TimeScale {
        TimeScale::interval(0.0, 1.0).unwrap()
    }

    #[test]
    fn power_family_matches_closed_form_distances() {
        let spec = SequenceSpec::new(
            SequenceFamily::PowerScaled { base: tri012() },
            9,
            FuzzyFn::crisp("0").unwrap(),
        );
        let integ = quick();
        let report = run_sequence_at(&spec, &unit(), 0.0, 1.0, &integ, &[1, 9]).unwrap();
        assert_eq!(report.verdict, Verdict::Converging);
        assert!((report.entries[0].distance - 1.0).abs() <= 3.0 * integ.tol);
        assert!((report.entries[1].distance - 0.2).abs() <= 3.0 * integ.tol);
    }

    #[test]
    fn constant_family_is_converging() {
        let f = FuzzyFn::scaled("1", tri012()).unwrap();
        let spec = SequenceSpec::new(
            SequenceFamily::Members {
                members: vec![f.clone(); 4],
            },
            4,
            f,
        );
        let integ = quick();
        let report = run_sequence(&spec, &unit(), 0.0, 1.0, &integ).unwrap();
        assert_eq!(report.verdict, Verdict::Converging);
        assert!(report.entries.iter().all(|e| e.distance <= 2.0 * integ.tol));
    }

    #[test]
    fn shrinking_spreads_decay_like_reciprocal() {
        let spec = SequenceSpec::new(
            SequenceFamily::ShrinkingSpread {
                core: parse("x").unwrap(),
                left: parse("x").unwrap(),
                right: parse("x").unwrap(),
            },
            8,
            FuzzyFn::crisp("x").unwrap(),
        );
        let integ = quick();
        let report = run_sequence_at(&spec, &unit(), 0.0, 1.0, &integ, &[1, 2, 4, 8]).unwrap();
        assert_eq!(report.verdict, Verdict::Converging);
        for e in &report.entries {
            assert!((e.distance - 0.5 / e.n as f64).abs() <= 3.0 * integ.tol);
        }
    }

    #[test]
    fn uniform_probe_table() {
        let constant = FuzzyFn::scaled("1", tri012()).unwrap();
        let spec = SequenceSpec::new(
            SequenceFamily::Members {
                members: vec![constant.clone(); 3],
            },
            3,
            constant,
        );
        let integ = quick();
        let table =
            check_uniform_integrability(&spec, &unit(), 0.0, 1.0, &[0.25, 0.125], &integ).unwrap();
        assert!(table.probes.iter().all(|p| p.sup_gap <= 1e-12));
        assert!(table.passes_at(1e-6));

        let power = SequenceSpec::new(
            SequenceFamily::PowerScaled { base: tri012() },
            9,
            FuzzyFn::crisp("0").unwrap(),
        );
        let table = check_uniform_integrability(
            &power,
            &unit(),
            0.0,
            1.0,
            &[1.0 / 1024.0],
            &integ,
        )
        .unwrap();
        // Measured values are recorded, not judged; the one stated
        // bound is that this probe stays under a percent.
        assert!(table.probes[0].sup_gap < 1e-2);
        assert!(table.probes[0].gaps.len() == default_samples(9).len());
    }

    #[test]
    fn dominated_hypothesis_passes_and_fails() {
        let integ = quick();
        let spec = SequenceSpec::new(
            SequenceFamily::PowerScaled { base: tri012() },
            6,
            FuzzyFn::crisp("0").unwrap(),
        )
        .with_bounds(
            FuzzyFn::crisp("0").unwrap(),
            FuzzyFn::scaled("1", tri012()).unwrap(),
        );
        let report = dominated_experiment(&spec, &unit(), 0.0, 1.0, &integ).unwrap();
        assert!(report.hypothesis.as_ref().unwrap().passed);
        assert_eq!(report.verdict, Verdict::Converging);

        let wrong = SequenceSpec {
            upper_bound: Some(FuzzyFn::crisp("0.5").unwrap()),
            ..spec.clone()
        };
        let report = dominated_experiment(&wrong, &unit(), 0.0, 1.0, &integ).unwrap();
        let outcome = report.hypothesis.as_ref().unwrap();
        assert!(!outcome.passed);
        assert!(outcome.detail.contains("vacuous"));
        assert_eq!(report.verdict, Verdict::HypothesisFailed);

        let tight = SequenceSpec::new(
            SequenceFamily::Members {
                members: vec![FuzzyFn::crisp("x").unwrap(); 3],
            },
            3,
            FuzzyFn::crisp("x").unwrap(),
        )
        .with_bounds(FuzzyFn::crisp("x").unwrap(), FuzzyFn::crisp("x").unwrap());
        let report = dominated_experiment(&tight, &unit(), 0.0, 1.0, &integ).unwrap();
        assert!(report.hypothesis.as_ref().unwrap().passed);

        assert!(matches!(
            dominated_experiment(
                &SequenceSpec::new(
                    SequenceFamily::PowerScaled { base: tri012() },
                    3,
                    FuzzyFn::crisp("0").unwrap()
                ),
                &unit(),
                0.0,
                1.0,
                &integ
            ),
            Err(ConvergenceError::MissingBounds)
        ));
    }

    #[test]
    fn monotone_experiment_checks_both_layers() {
        let integ = quick();
        // (1 - x^n) times the base: nondecreasing in n on [0, 1].
        let members: Vec<FuzzyFn> = (1..=6)
            .map(|n| FuzzyFn::Scaled {
                scalar: Expr::binary(
                    BinOp::Sub,
                    Expr::number(1.0),
                    Expr::var_power(n as u32),
                ),
                base: tri012(),
            })
            .collect();
        let spec = SequenceSpec::new(
            SequenceFamily::Members { members },
            6,
            FuzzyFn::scaled("1", tri012()).unwrap(),
        );
        let report = monotone_experiment(&spec, &unit(), 0.0, 1.0, &integ).unwrap();
        assert!(report.hypothesis.as_ref().unwrap().passed);
        assert_eq!(report.integral_endpoints_monotone, Some(true));
        for e in &report.entries {
            assert!(e.distance <= 3.0 / (e.n as f64 + 1.0) + 3.0 * integ.tol);
        }

        let constant = SequenceSpec::new(
            SequenceFamily::Members {
                members: vec![FuzzyFn::crisp("x").unwrap(); 3],
            },
            3,
            FuzzyFn::crisp("x").unwrap(),
        );
        let report = monotone_experiment(&constant, &unit(), 0.0, 1.0, &integ).unwrap();
        assert!(report.hypothesis.as_ref().unwrap().passed);
        assert_eq!(report.integral_endpoints_monotone, Some(true));

        let alternating = SequenceSpec::new(
            SequenceFamily::Members {
                members: vec![
                    FuzzyFn::crisp("0").unwrap(),
                    FuzzyFn::crisp("1").unwrap(),
                    FuzzyFn::crisp("0").unwrap(),
                ],
            },
            3,
            FuzzyFn::crisp("0").unwrap(),
        );
        let report = monotone_experiment(&alternating, &unit(), 0.0, 1.0, &integ).unwrap();
        assert!(!report.hypothesis.as_ref().unwrap().passed);
        assert_eq!(report.verdict, Verdict::HypothesisFailed);
    }

    #[test]
    fn invariance_accepts_dense_overrides_only() {
        let ts = TimeScale::new([(0.0, 1.0), (1.5, 1.5), (2.0, 3.0)]).unwrap();
        let f = FuzzyFn::crisp("x^2").unwrap();
        let integ = quick();
        let overrides = vec![
            OverridePoint {
                at: 0.5,
                value: FuzzyNumber::crisp(99.0).unwrap(),
            },
            OverridePoint {
                at: 2.5,
                value: FuzzyNumber::crisp(99.0).unwrap(),
            },
        ];
        let d = ae_invariance_experiment(&f, &overrides, &ts, 0.0, 3.0, &integ).unwrap();
        assert!(d <= 2.0 * integ.tol);

        let none = ae_invariance_experiment(&f, &[], &ts, 0.0, 3.0, &integ).unwrap();
        assert_eq!(none, 0.0);

        let scattered = vec![OverridePoint {
            at: 1.0,
            value: FuzzyNumber::crisp(99.0).unwrap(),
        }];
        match ae_invariance_experiment(&f, &scattered, &ts, 0.0, 3.0, &integ) {
            Err(ConvergenceError::ScatteredOverride { x, graininess }) => {
                assert_eq!(x, 1.0);
                assert_eq!(graininess, 0.5);
            }
            other => panic!("expected rejection, got {other:?}"),
        }

        // Forced through the hook, the shift is the graininess-weighted
        // distance at the point: 0.5 * |1 - 99|.
        let d = ae_invariance_forced(&f, &scattered, &ts, 0.0, 3.0, &integ).unwrap();
        assert!((d - 49.0).abs() <= 2.0 * integ.tol);
    }
}
