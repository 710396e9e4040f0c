//! Fuzzy-valued functions on a time scale, specified as text.
//!
//! A [`FuzzyFn`] maps a real point to a fuzzy number. The families are
//! built from real expressions: a crisp core, a triangular family with
//! spread expressions, a real scalar times a fixed fuzzy number, plus
//! pointwise overrides at finitely many points and finite linear
//! combinations. Evaluation always yields a table that passes the
//! stacking checks or fails with an error naming the point.

pub mod expr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fuzzy::{FuzzyError, FuzzyNumber, FuzzyNumberSpec};
use crate::timescale::{TimeScale, DEFAULT_SNAP_TOL};
pub use expr::{eval, parse, pretty, Expr, EvalError, ParseError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FnError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("negative {side} spread {value} at x = {x}")]
    NegativeSpread { side: &'static str, value: f64, x: f64 },
    #[error(transparent)]
    Fuzzy(#[from] FuzzyError),
}

// Reusable row buffers for nested evaluation, one pool per thread so
// the parallel accumulation path stays allocation-free too.
thread_local! {
    static ROW_POOL: std::cell::RefCell<Vec<Vec<f64>>> = const { std::cell::RefCell::new(Vec::new()) };
}

fn take_scratch(rows: usize) -> Vec<f64> {
    let mut buf = ROW_POOL
        .with(|pool| pool.borrow_mut().pop())
        .unwrap_or_default();
    buf.clear();
    buf.resize(2 * rows, 0.0);
    buf
}

fn give_scratch(buf: Vec<f64>) {
    ROW_POOL.with(|pool| pool.borrow_mut().push(buf));
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompileError {
    #[error("in field `{field}`: {source}")]
    Parse {
        field: &'static str,
        source: ParseError,
    },
    #[error(transparent)]
    Fuzzy(#[from] FuzzyError),
}

/// A pointwise replacement value used by the override family.
#[derive(Debug, Clone, PartialEq)]
pub struct OverridePoint {
    pub at: f64,
    pub value: FuzzyNumber,
}

/// A fuzzy-valued function of one real variable.
#[derive(Debug, Clone, PartialEq)]
pub enum FuzzyFn {
    /// A real expression lifted to a crisp fuzzy value.
    Crisp { core: Expr },
    /// Triangular value `[c - (1 - alpha) l, c + (1 - alpha) r]` with
    /// expressions for the core and both spreads.
    Triangular { core: Expr, left: Expr, right: Expr },
    /// A real expression times a fixed fuzzy number.
    Scaled { scalar: Expr, base: FuzzyNumber },
    /// A base function with replacement values at finitely many points.
    Override {
        base: Box<FuzzyFn>,
        points: Vec<OverridePoint>,
    },
    /// A finite linear combination of fuzzy functions.
    Combination { terms: Vec<(f64, FuzzyFn)> },
}

impl FuzzyFn {
    pub fn crisp(text: &str) -> Result<Self, ParseError> {
        Ok(FuzzyFn::Crisp { core: parse(text)? })
    }

    pub fn scaled(text: &str, base: FuzzyNumber) -> Result<Self, ParseError> {
        Ok(FuzzyFn::Scaled {
            scalar: parse(text)?,
            base,
        })
    }

    /// Deep copy with every embedded fuzzy table resampled to `levels`,
    /// so repeated evaluation avoids per-call regridding.
    pub fn with_levels(&self, levels: usize) -> FuzzyFn {
        match self {
            FuzzyFn::Crisp { .. } | FuzzyFn::Triangular { .. } => self.clone(),
            FuzzyFn::Scaled { scalar, base } => FuzzyFn::Scaled {
                scalar: scalar.clone(),
                base: base.resample(levels),
            },
            FuzzyFn::Override { base, points } => FuzzyFn::Override {
                base: Box::new(base.with_levels(levels)),
                points: points
                    .iter()
                    .map(|p| OverridePoint {
                        at: p.at,
                        value: p.value.resample(levels),
                    })
                    .collect(),
            },
            FuzzyFn::Combination { terms } => FuzzyFn::Combination {
                terms: terms
                    .iter()
                    .map(|(c, f)| (*c, f.with_levels(levels)))
                    .collect(),
            },
        }
    }

    /// Evaluates to a fuzzy number on `levels` membership levels.
    pub fn eval_fuzzy(&self, x: f64, levels: usize) -> Result<FuzzyNumber, FnError> {
        let rows = levels.max(1) + 1;
        let mut lower = vec![0.0; rows];
        let mut upper = vec![0.0; rows];
        self.eval_fuzzy_into(x, &mut lower, &mut upper)?;
        Ok(FuzzyNumber::from_raw(lower, upper).expect("rows share a length of at least 2"))
    }

    /// Evaluates directly into endpoint rows; the level count is taken
    /// from the slice lengths. This is the allocation-free path the
    /// Riemann sums run on.
    pub fn eval_fuzzy_into(
        &self,
        x: f64,
        lower: &mut [f64],
        upper: &mut [f64],
    ) -> Result<(), FnError> {
        debug_assert_eq!(lower.len(), upper.len());
        let m = lower.len() - 1;
        match self {
            FuzzyFn::Crisp { core } => {
                let v = eval(core, x)?;
                lower.fill(v);
                upper.fill(v);
            }
            FuzzyFn::Triangular { core, left, right } => {
                let c = eval(core, x)?;
                let l = eval(left, x)?;
                let r = eval(right, x)?;
                if l < 0.0 {
                    return Err(FnError::NegativeSpread {
                        side: "left",
                        value: l,
                        x,
                    });
                }
                if r < 0.0 {
                    return Err(FnError::NegativeSpread {
                        side: "right",
                        value: r,
                        x,
                    });
                }
                for k in 0..=m {
                    let slack = 1.0 - k as f64 / m as f64;
                    lower[k] = c - slack * l;
                    upper[k] = c + slack * r;
                }
            }
            FuzzyFn::Scaled { scalar, base } => {
                let s = eval(scalar, x)?;
                let resampled;
                let table = if base.levels() == m {
                    base
                } else {
                    resampled = base.resample(m);
                    &resampled
                };
                for k in 0..=m {
                    let (a, b) = (s * table.lower()[k], s * table.upper()[k]);
                    if s < 0.0 {
                        lower[k] = b;
                        upper[k] = a;
                    } else {
                        lower[k] = a;
                        upper[k] = b;
                    }
                }
            }
            FuzzyFn::Override { base, points } => {
                match points.iter().find(|p| (p.at - x).abs() <= DEFAULT_SNAP_TOL) {
                    Some(p) => {
                        let table = p.value.resample(m);
                        lower.copy_from_slice(table.lower());
                        upper.copy_from_slice(table.upper());
                    }
                    None => base.eval_fuzzy_into(x, lower, upper)?,
                }
            }
            FuzzyFn::Combination { terms } => {
                lower.fill(0.0);
                upper.fill(0.0);
                let mut rows = take_scratch(m + 1);
                let (sub_lo, sub_hi) = rows.split_at_mut(m + 1);
                let mut outcome = Ok(());
                for (coef, f) in terms {
                    if let Err(e) = f.eval_fuzzy_into(x, sub_lo, sub_hi) {
                        outcome = Err(e);
                        break;
                    }
                    for k in 0..=m {
                        if *coef < 0.0 {
                            lower[k] += coef * sub_hi[k];
                            upper[k] += coef * sub_lo[k];
                        } else {
                            lower[k] += coef * sub_lo[k];
                            upper[k] += coef * sub_hi[k];
                        }
                    }
                }
                give_scratch(rows);
                outcome?;
            }
        }
        Ok(())
    }

    /// Endpoints of the level cut at a single `alpha`, computed from
    /// the family formulas without building a table.
    pub fn eval_alpha_cut(&self, x: f64, alpha: f64) -> Result<(f64, f64), FnError> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(FuzzyError::AlphaOutOfRange(alpha).into());
        }
        match self {
            FuzzyFn::Crisp { core } => {
                let v = eval(core, x)?;
                Ok((v, v))
            }
            FuzzyFn::Triangular { core, left, right } => {
                let c = eval(core, x)?;
                let l = eval(left, x)?;
                let r = eval(right, x)?;
                if l < 0.0 {
                    return Err(FnError::NegativeSpread {
                        side: "left",
                        value: l,
                        x,
                    });
                }
                if r < 0.0 {
                    return Err(FnError::NegativeSpread {
                        side: "right",
                        value: r,
                        x,
                    });
                }
                Ok((c - (1.0 - alpha) * l, c + (1.0 - alpha) * r))
            }
            FuzzyFn::Scaled { scalar, base } => {
                let s = eval(scalar, x)?;
                let (lo, hi) = base.level_cut(alpha).map_err(FnError::Fuzzy)?;
                let (a, b) = (s * lo, s * hi);
                Ok(if s < 0.0 { (b, a) } else { (a, b) })
            }
            FuzzyFn::Override { base, points } => {
                match points.iter().find(|p| (p.at - x).abs() <= DEFAULT_SNAP_TOL) {
                    Some(p) => p.value.level_cut(alpha).map_err(FnError::Fuzzy),
                    None => base.eval_alpha_cut(x, alpha),
                }
            }
            FuzzyFn::Combination { terms } => {
                let mut lo = 0.0;
                let mut hi = 0.0;
                for (coef, f) in terms {
                    let (a, b) = f.eval_alpha_cut(x, alpha)?;
                    if *coef < 0.0 {
                        lo += coef * b;
                        hi += coef * a;
                    } else {
                        lo += coef * a;
                        hi += coef * b;
                    }
                }
                Ok((lo, hi))
            }
        }
    }

    /// Probes the support and core rows across a dense sample of the
    /// integration window, surfacing spread or domain faults before an
    /// integration starts.
    pub fn check_on(
        &self,
        ts: &TimeScale,
        a: f64,
        b: f64,
        samples_per_component: usize,
    ) -> Result<(), FnError> {
        for x in ts.sample_points(a, b, samples_per_component) {
            self.eval_alpha_cut(x, 0.0)?;
            self.eval_alpha_cut(x, 1.0)?;
        }
        Ok(())
    }
}

/// JSON form of a fuzzy function, tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FuzzyFnSpec {
    Crisp {
        core: String,
    },
    Triangular {
        core: String,
        left: String,
        right: String,
    },
    Scaled {
        scalar: String,
        base: FuzzyNumberSpec,
    },
    Override {
        base: Box<FuzzyFnSpec>,
        points: Vec<OverrideSpec>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverrideSpec {
    pub x: f64,
    pub value: FuzzyNumberSpec,
}

fn parse_field(field: &'static str, text: &str) -> Result<Expr, CompileError> {
    parse(text).map_err(|source| CompileError::Parse { field, source })
}

impl FuzzyFnSpec {
    /// Compiles the textual spec, building embedded fuzzy numbers on
    /// `levels` membership levels.
    pub fn compile(&self, levels: usize) -> Result<FuzzyFn, CompileError> {
        Ok(match self {
            FuzzyFnSpec::Crisp { core } => FuzzyFn::Crisp {
                core: parse_field("core", core)?,
            },
            FuzzyFnSpec::Triangular { core, left, right } => FuzzyFn::Triangular {
                core: parse_field("core", core)?,
                left: parse_field("left", left)?,
                right: parse_field("right", right)?,
            },
            FuzzyFnSpec::Scaled { scalar, base } => FuzzyFn::Scaled {
                scalar: parse_field("scalar", scalar)?,
                base: base.build(levels)?,
            },
            FuzzyFnSpec::Override { base, points } => FuzzyFn::Override {
                base: Box::new(base.compile(levels)?),
                points: points
                    .iter()
                    .map(|p| {
                        Ok(OverridePoint {
                            at: p.x,
                            value: p.value.build(levels)?,
                        })
                    })
                    .collect::<Result<_, CompileError>>()?,
            },
        })
    }
}
