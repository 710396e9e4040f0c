//! Scene-file front end: parses a JSON scene (time scale, function,
//! bounds, options), runs the requested computation, and renders the
//! outcome deterministically.
//!
//! Output numbers use the shortest round-trip representation capped at
//! 15 significant digits and JSON keys are emitted in a fixed order,
//! so identical invocations produce byte-identical output.
//!
//! Exit codes: 0 success, 1 for schema or configuration errors, 2 for
//! non-converged integrals, failed validation, or (under `--strict`) a
//! failed hypothesis.

use serde::Deserialize;

use crate::convergence::{
    dominated_experiment, monotone_experiment, run_sequence, ConvergenceReport, SequenceFamily,
    SequenceSpec, Verdict,
};
use crate::fnspec::{FuzzyFn, FuzzyFnSpec};
use crate::fuzzy::{FuzzyNumber, FuzzyNumberSpec, DEFAULT_LEVELS};
use crate::gauge::{cousin_divide, DeltaGauge, TaggedDivision};
use crate::integrator::{IntegralResult, Integrator};
use crate::timescale::{TimeScale, DEFAULT_SNAP_TOL};

/// A scene: the time scale, the integrand, the window, and options.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub timescale: TimeScale,
    pub function: FuzzyFnSpec,
    pub bounds: [f64; 2],
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default = "default_max_rounds")]
    pub max_rounds: u32,
    #[serde(default)]
    pub seed: u64,
}

fn default_tol() -> f64 {
    1e-6
}

fn default_levels() -> usize {
    DEFAULT_LEVELS
}

fn default_max_rounds() -> u32 {
    24
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Command-line overrides applied on top of the scene file. An unset
/// output format falls back to the command's native one (JSON
/// everywhere except `converge`, which reports CSV).
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub tol: Option<f64>,
    pub levels: Option<usize>,
    pub max_rounds: Option<u32>,
    pub output: Option<OutputFormat>,
    pub threads: usize,
    pub seed: Option<u64>,
    pub strict: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            tol: None,
            levels: None,
            max_rounds: None,
            output: None,
            threads: 1,
            seed: None,
            strict: false,
        }
    }
}

/// What a subcommand produced: stdout payload, stderr diagnostics,
/// and the process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CmdOutput {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl CmdOutput {
    fn ok(stdout: String) -> Self {
        CmdOutput {
            stdout,
            stderr: String::new(),
            code: 0,
        }
    }

    fn with_code(stdout: String, code: i32) -> Self {
        CmdOutput {
            stdout,
            stderr: String::new(),
            code,
        }
    }

    fn fail(code: i32, message: impl Into<String>) -> Self {
        CmdOutput {
            stdout: String::new(),
            stderr: format!("error: {}\n", message.into()),
            code,
        }
    }
}

struct Scene {
    config: SceneConfig,
    function: FuzzyFn,
    integrator: Integrator,
}

fn load_scene(config_text: &str, opts: &RunOptions) -> Result<Scene, CmdOutput> {
    let mut config: SceneConfig = serde_json::from_str(config_text)
        .map_err(|e| CmdOutput::fail(1, format!("config error: {e}")))?;
    if let Some(tol) = opts.tol {
        config.tol = tol;
    }
    if let Some(levels) = opts.levels {
        config.levels = levels;
    }
    if let Some(max_rounds) = opts.max_rounds {
        config.max_rounds = max_rounds;
    }
    if let Some(seed) = opts.seed {
        config.seed = seed;
    }
    if !(config.tol > 0.0) {
        return Err(CmdOutput::fail(1, format!("tol must be positive, got {}", config.tol)));
    }
    if config.levels == 0 {
        return Err(CmdOutput::fail(1, "levels must be at least 1"));
    }
    let [a, b] = config.bounds;
    if a > b {
        return Err(CmdOutput::fail(1, format!("bounds are inverted: {a} > {b}")));
    }
    for bound in [a, b] {
        if !config.timescale.contains(bound) {
            return Err(CmdOutput::fail(
                1,
                format!("bound {bound} is not in the time scale"),
            ));
        }
    }
    let function = config
        .function
        .compile(config.levels)
        .map_err(|e| CmdOutput::fail(1, format!("function error: {e}")))?;
    let integrator = Integrator {
        tol: config.tol,
        max_rounds: config.max_rounds,
        levels: config.levels,
        threads: opts.threads.max(1),
        ..Integrator::default()
    };
    Ok(Scene {
        config,
        function,
        integrator,
    })
}

/// `integrate <scene>`: the fuzzy integral over the scene bounds.
pub fn cmd_integrate(config_text: &str, opts: &RunOptions) -> CmdOutput {
    let scene = match load_scene(config_text, opts) {
        Ok(s) => s,
        Err(out) => return out,
    };
    let [a, b] = scene.config.bounds;
    if let Err(e) = scene.function.check_on(&scene.config.timescale, a, b, 1024) {
        return CmdOutput::fail(1, format!("function error: {e}"));
    }
    match scene
        .integrator
        .integrate(&scene.function, &scene.config.timescale, a, b)
    {
        Ok(result) => {
            let code = if result.converged { 0 } else { 2 };
            CmdOutput::with_code(integral_result_json(&result) + "\n", code)
        }
        Err(e) => CmdOutput::fail(1, e.to_string()),
    }
}

/// `divide <scene> --gauge <width>`: the fine division the scan builds.
pub fn cmd_divide(config_text: &str, gauge_width: f64, opts: &RunOptions) -> CmdOutput {
    let scene = match load_scene(config_text, opts) {
        Ok(s) => s,
        Err(out) => return out,
    };
    let [a, b] = scene.config.bounds;
    let ts = &scene.config.timescale;
    if b - a <= DEFAULT_SNAP_TOL {
        return CmdOutput::ok(division_json(&TaggedDivision::default()) + "\n");
    }
    let gauge = match DeltaGauge::uniform(ts, a, b, gauge_width) {
        Ok(g) => g,
        Err(e) => return CmdOutput::fail(1, e.to_string()),
    };
    match cousin_divide(ts, a, b, gauge) {
        Ok(division) => CmdOutput::ok(division_json(&division) + "\n"),
        Err(e) => CmdOutput::fail(1, e.to_string()),
    }
}

/// `validate <fuzzy-number-json>`: stacking checks with exit code 2 on
/// the first violation.
pub fn cmd_validate(text: &str, opts: &RunOptions) -> CmdOutput {
    let spec: FuzzyNumberSpec = match serde_json::from_str(text) {
        Ok(s) => s,
        Err(e) => return CmdOutput::fail(1, format!("fuzzy number error: {e}")),
    };
    let levels = opts.levels.unwrap_or(DEFAULT_LEVELS);
    let table = match spec.build_unvalidated(levels) {
        Ok(t) => t,
        Err(e) => return CmdOutput::fail(1, format!("fuzzy number error: {e}")),
    };
    match table.validate() {
        Ok(()) => CmdOutput::ok("{\"ok\":true,\"violation\":null}\n".to_string()),
        Err(v) => CmdOutput::with_code(
            format!("{{\"ok\":false,\"violation\":{}}}\n", json_string(&v.to_string())),
            2,
        ),
    }
}

/// `converge <scene> --family <name> --n-max <n>`: a sequence
/// experiment, reported as CSV by default or full JSON on request.
pub fn cmd_converge(config_text: &str, family: &str, n_max: usize, opts: &RunOptions) -> CmdOutput {
    let scene = match load_scene(config_text, opts) {
        Ok(s) => s,
        Err(out) => return out,
    };
    if n_max < 2 {
        return CmdOutput::fail(1, "n-max must be at least 2");
    }
    let [a, b] = scene.config.bounds;
    let ts = &scene.config.timescale;
    let levels = scene.config.levels;
    let report = match build_experiment(family, &scene, n_max) {
        Ok(Experiment::Plain(spec)) => run_sequence(&spec, ts, a, b, &scene.integrator),
        Ok(Experiment::Dominated(spec)) => {
            dominated_experiment(&spec, ts, a, b, &scene.integrator)
        }
        Ok(Experiment::Monotone(spec)) => monotone_experiment(&spec, ts, a, b, &scene.integrator),
        Err(out) => return out,
    };
    let report = match report {
        Ok(r) => r,
        Err(e) => return CmdOutput::fail(1, e.to_string()),
    };
    let hypothesis_failed = report.verdict == Verdict::HypothesisFailed;
    let body = match opts.output.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Csv => report_to_csv(&report, levels),
        OutputFormat::Json => report_to_json(&report) + "\n",
    };
    let code = if hypothesis_failed && opts.strict { 2 } else { 0 };
    CmdOutput::with_code(body, code)
}

enum Experiment {
    Plain(SequenceSpec),
    Dominated(SequenceSpec),
    Monotone(SequenceSpec),
}

// Families the command line can set up from the scene function. The
// power families need a scaled function spec (the base carries the
// fuzziness); shrinking spreads need a triangular one.
fn build_experiment(family: &str, scene: &Scene, n_max: usize) -> Result<Experiment, CmdOutput> {
    let levels = scene.config.levels;
    let scaled_base = || -> Result<FuzzyNumber, CmdOutput> {
        match &scene.config.function {
            FuzzyFnSpec::Scaled { base, .. } => base
                .build(levels)
                .map_err(|e| CmdOutput::fail(1, format!("function error: {e}"))),
            _ => Err(CmdOutput::fail(
                1,
                format!("family `{family}` needs a scaled function spec"),
            )),
        }
    };
    match family {
        "power_scaled" => {
            let base = scaled_base()?;
            let limit = FuzzyFn::crisp("0").expect("constant parses");
            Ok(Experiment::Plain(SequenceSpec::new(
                SequenceFamily::PowerScaled { base },
                n_max,
                limit,
            )))
        }
        "shrinking_spread" => match &scene.function {
            FuzzyFn::Triangular { core, left, right } => {
                let limit = FuzzyFn::Crisp { core: core.clone() };
                Ok(Experiment::Plain(SequenceSpec::new(
                    SequenceFamily::ShrinkingSpread {
                        core: core.clone(),
                        left: left.clone(),
                        right: right.clone(),
                    },
                    n_max,
                    limit,
                )))
            }
            _ => Err(CmdOutput::fail(
                1,
                "family `shrinking_spread` needs a triangular function spec",
            )),
        },
        "constant" => Ok(Experiment::Plain(SequenceSpec::new(
            SequenceFamily::Members {
                members: vec![scene.function.clone(); n_max],
            },
            n_max,
            scene.function.clone(),
        ))),
        "monotone_power" => {
            let base = scaled_base()?;
            let members: Vec<FuzzyFn> = (1..=n_max)
                .map(|n| {
                    FuzzyFn::scaled(&format!("1 - x^{n}"), base.clone()).expect("monomial parses")
                })
                .collect();
            let limit = FuzzyFn::scaled("1", base).expect("constant parses");
            Ok(Experiment::Monotone(SequenceSpec::new(
                SequenceFamily::Members { members },
                n_max,
                limit,
            )))
        }
        "dominated_power" => {
            let base = scaled_base()?;
            let upper = FuzzyFn::scaled("1", base.clone()).expect("constant parses");
            let spec = SequenceSpec::new(
                SequenceFamily::PowerScaled { base },
                n_max,
                FuzzyFn::crisp("0").expect("constant parses"),
            )
            .with_bounds(FuzzyFn::crisp("0").expect("constant parses"), upper);
            Ok(Experiment::Dominated(spec))
        }
        other => Err(CmdOutput::fail(1, format!("unknown family `{other}`"))),
    }
}

/// Shortest round-trip decimal representation, capped at 15
/// significant digits; negative zero prints as `0`.
pub fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let shortest = format!("{v}");
    if significant_digits(&shortest) <= 15 {
        return shortest;
    }
    let rounded: f64 = format!("{v:.14e}").parse().expect("formatted float reparses");
    format!("{rounded}")
}

fn significant_digits(s: &str) -> usize {
    let mantissa = s.split(['e', 'E']).next().unwrap_or(s);
    mantissa
        .chars()
        .filter(|c| c.is_ascii_digit())
        .collect::<String>()
        .trim_start_matches('0')
        .len()
}

fn json_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn join_nums(vs: &[f64]) -> String {
    vs.iter().map(|&v| fmt_num(v)).collect::<Vec<_>>().join(",")
}

pub fn fuzzy_json(u: &FuzzyNumber) -> String {
    format!(
        "{{\"levels\":{},\"lower\":[{}],\"upper\":[{}]}}",
        u.levels(),
        join_nums(u.lower()),
        join_nums(u.upper())
    )
}

pub fn integral_result_json(r: &IntegralResult) -> String {
    format!(
        "{{\"value\":{},\"cauchy_gap\":{},\"rounds\":{},\"final_cells\":{},\"converged\":{}}}",
        fuzzy_json(&r.value),
        fmt_num(r.cauchy_gap),
        r.rounds,
        r.final_cells,
        r.converged
    )
}

pub fn division_json(d: &TaggedDivision) -> String {
    let cells: Vec<String> = d
        .cells()
        .iter()
        .map(|c| {
            format!(
                "[{},{},{}]",
                fmt_num(c.left),
                fmt_num(c.right),
                fmt_num(c.tag)
            )
        })
        .collect();
    format!("{{\"cells\":[{}]}}", cells.join(","))
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Converging => "converging",
        Verdict::Inconclusive => "inconclusive",
        Verdict::HypothesisFailed => "hypothesis_failed",
    }
}

/// CSV report: one row per sampled member with the support and core
/// endpoints of its integral, the distance to the limit, and the
/// convergence flag. Members whose integration did not converge get a
/// row with empty value fields.
pub fn report_to_csv(report: &ConvergenceReport, levels: usize) -> String {
    let _ = levels;
    let mut out =
        String::from("n,value_lower_0,value_upper_0,value_lower_1,value_upper_1,d_n,converged\n");
    let mut rows: Vec<(usize, String)> = report
        .entries
        .iter()
        .map(|e| {
            let v = &e.result.value;
            let m = v.levels();
            (
                e.n,
                format!(
                    "{},{},{},{},{},{},true\n",
                    e.n,
                    fmt_num(v.lower()[0]),
                    fmt_num(v.upper()[0]),
                    fmt_num(v.lower()[m]),
                    fmt_num(v.upper()[m]),
                    fmt_num(e.distance)
                ),
            )
        })
        .collect();
    for &n in &report.skipped {
        rows.push((n, format!("{n},,,,,,false\n")));
    }
    rows.sort_by_key(|(n, _)| *n);
    for (_, row) in rows {
        out.push_str(&row);
    }
    out
}

/// JSON report with the full level tables of every integral.
pub fn report_to_json(report: &ConvergenceReport) -> String {
    let entries: Vec<String> = report
        .entries
        .iter()
        .map(|e| {
            format!(
                "{{\"n\":{},\"result\":{},\"d_n\":{}}}",
                e.n,
                integral_result_json(&e.result),
                fmt_num(e.distance)
            )
        })
        .collect();
    let hypothesis = match &report.hypothesis {
        Some(h) => format!(
            "{{\"passed\":{},\"detail\":{}}}",
            h.passed,
            json_string(&h.detail)
        ),
        None => "null".to_string(),
    };
    let monotone = match report.integral_endpoints_monotone {
        Some(flag) => flag.to_string(),
        None => "null".to_string(),
    };
    let skipped: Vec<String> = report.skipped.iter().map(|n| n.to_string()).collect();
    format!(
        "{{\"entries\":[{}],\"limit\":{},\"verdict\":\"{}\",\"hypothesis\":{},\"integral_endpoints_monotone\":{},\"skipped\":[{}]}}",
        entries.join(","),
        integral_result_json(&report.limit),
        verdict_name(report.verdict),
        hypothesis,
        monotone,
        skipped.join(",")
    )
}
