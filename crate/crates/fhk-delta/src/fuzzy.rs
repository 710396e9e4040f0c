//! Fuzzy numbers stored as level-cut endpoint tables.
//!
//! A fuzzy number keeps its lower and upper endpoints on a uniform
//! grid of membership levels `alpha_k = k / M`. Row `M` is the core,
//! row 0 stores the support interval. Valid tables have nondecreasing
//! lower endpoints, nonincreasing upper endpoints, and a non-inverted
//! core; [`FuzzyNumber::validate`] reports the first broken row for
//! tables built from untrusted input.
//!
//! Between grid rows everything is interpolated linearly, so the
//! Hausdorff distance over all levels is attained on the grid and
//! [`hausdorff`] computes it by a row scan.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default number of membership levels `M` (tables then hold `M + 1` rows).
pub const DEFAULT_LEVELS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StackingViolation {
    #[error("endpoint at level index {index} is not finite")]
    NonFinite { index: usize },
    #[error("lower endpoints decrease at level index {index}")]
    LowerDecreases { index: usize },
    #[error("upper endpoints increase at level index {index}")]
    UpperIncreases { index: usize },
    #[error("core inverted: lower endpoint {lower} exceeds upper endpoint {upper}")]
    CoreInverted { lower: f64, upper: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FuzzyError {
    #[error("value {0} is not finite")]
    NonFinite(f64),
    #[error("triangular endpoints must satisfy a <= b <= c, got ({0}, {1}, {2})")]
    BadTriangle(f64, f64, f64),
    #[error("trapezoidal endpoints must satisfy a <= b <= c <= d, got ({0}, {1}, {2}, {3})")]
    BadTrapezoid(f64, f64, f64, f64),
    #[error("membership level {0} lies outside [0, 1]")]
    AlphaOutOfRange(f64),
    #[error("endpoint tables must have equal lengths of at least 2")]
    BadShape,
    #[error(transparent)]
    Stacking(#[from] StackingViolation),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawFuzzy {
    levels: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

/// A fuzzy number as a level-cut endpoint table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFuzzy", into = "RawFuzzy")]
pub struct FuzzyNumber {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl TryFrom<RawFuzzy> for FuzzyNumber {
    type Error = FuzzyError;

    fn try_from(raw: RawFuzzy) -> Result<Self, FuzzyError> {
        if raw.lower.len() != raw.levels + 1 || raw.upper.len() != raw.levels + 1 {
            return Err(FuzzyError::BadShape);
        }
        FuzzyNumber::from_raw(raw.lower, raw.upper)
    }
}

impl From<FuzzyNumber> for RawFuzzy {
    fn from(u: FuzzyNumber) -> RawFuzzy {
        RawFuzzy {
            levels: u.levels(),
            lower: u.lower,
            upper: u.upper,
        }
    }
}

impl FuzzyNumber {
    /// Wraps endpoint tables without checking the stacking conditions,
    /// so suspect tables can still be inspected and validated.
    pub fn from_raw(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, FuzzyError> {
        if lower.len() != upper.len() || lower.len() < 2 {
            return Err(FuzzyError::BadShape);
        }
        Ok(FuzzyNumber { lower, upper })
    }

    /// Wraps endpoint tables and requires them to form a fuzzy number.
    pub fn from_endpoints(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, FuzzyError> {
        let u = Self::from_raw(lower, upper)?;
        u.validate()?;
        Ok(u)
    }

    pub fn crisp(c: f64) -> Result<Self, FuzzyError> {
        Self::crisp_with_levels(c, DEFAULT_LEVELS)
    }

    pub fn crisp_with_levels(c: f64, levels: usize) -> Result<Self, FuzzyError> {
        if !c.is_finite() {
            return Err(FuzzyError::NonFinite(c));
        }
        let rows = levels.max(1) + 1;
        Ok(FuzzyNumber {
            lower: vec![c; rows],
            upper: vec![c; rows],
        })
    }

    pub fn triangular(a: f64, b: f64, c: f64) -> Result<Self, FuzzyError> {
        Self::triangular_with_levels(a, b, c, DEFAULT_LEVELS)
    }

    pub fn triangular_with_levels(a: f64, b: f64, c: f64, levels: usize) -> Result<Self, FuzzyError> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) || a > b || b > c {
            return Err(FuzzyError::BadTriangle(a, b, c));
        }
        Self::trapezoidal_with_levels(a, b, b, c, levels)
            .map_err(|_| FuzzyError::BadTriangle(a, b, c))
    }

    pub fn trapezoidal(a: f64, b: f64, c: f64, d: f64) -> Result<Self, FuzzyError> {
        Self::trapezoidal_with_levels(a, b, c, d, DEFAULT_LEVELS)
    }

    pub fn trapezoidal_with_levels(
        a: f64,
        b: f64,
        c: f64,
        d: f64,
        levels: usize,
    ) -> Result<Self, FuzzyError> {
        let finite = a.is_finite() && b.is_finite() && c.is_finite() && d.is_finite();
        if !finite || a > b || b > c || c > d {
            return Err(FuzzyError::BadTrapezoid(a, b, c, d));
        }
        let m = levels.max(1);
        let mut lower = Vec::with_capacity(m + 1);
        let mut upper = Vec::with_capacity(m + 1);
        for k in 0..=m {
            let alpha = k as f64 / m as f64;
            lower.push(a + alpha * (b - a));
            upper.push(d - alpha * (d - c));
        }
        Ok(FuzzyNumber { lower, upper })
    }

    /// Number of membership levels `M`; the table has `M + 1` rows.
    pub fn levels(&self) -> usize {
        self.lower.len() - 1
    }

    pub fn alpha(&self, k: usize) -> f64 {
        k as f64 / self.levels() as f64
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Checks the stacking conditions and reports the first violation.
    pub fn validate(&self) -> Result<(), StackingViolation> {
        let m = self.levels();
        for k in 0..=m {
            if !self.lower[k].is_finite() || !self.upper[k].is_finite() {
                return Err(StackingViolation::NonFinite { index: k });
            }
        }
        for k in 1..=m {
            if self.lower[k] < self.lower[k - 1] {
                return Err(StackingViolation::LowerDecreases { index: k });
            }
        }
        for k in 1..=m {
            if self.upper[k] > self.upper[k - 1] {
                return Err(StackingViolation::UpperIncreases { index: k });
            }
        }
        if self.lower[m] > self.upper[m] {
            return Err(StackingViolation::CoreInverted {
                lower: self.lower[m],
                upper: self.upper[m],
            });
        }
        Ok(())
    }

    /// Closed level cut at `alpha`, linearly interpolated between rows.
    pub fn level_cut(&self, alpha: f64) -> Result<(f64, f64), FuzzyError> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(FuzzyError::AlphaOutOfRange(alpha));
        }
        let m = self.levels();
        let t = alpha * m as f64;
        let i = (t.floor() as usize).min(m);
        if i == m {
            return Ok((self.lower[m], self.upper[m]));
        }
        let frac = t - i as f64;
        Ok((
            self.lower[i] + frac * (self.lower[i + 1] - self.lower[i]),
            self.upper[i] + frac * (self.upper[i + 1] - self.upper[i]),
        ))
    }

    /// Membership grade of `x`: the largest level whose cut contains it.
    pub fn membership(&self, x: f64) -> f64 {
        let m = self.levels();
        if x < self.lower[0] || x > self.upper[0] {
            return 0.0;
        }
        let mut k = 0;
        while k < m && self.lower[k + 1] <= x && x <= self.upper[k + 1] {
            k += 1;
        }
        if k == m {
            return 1.0;
        }
        let t_low = if self.lower[k + 1] > x {
            (x - self.lower[k]) / (self.lower[k + 1] - self.lower[k])
        } else {
            1.0
        };
        let t_up = if self.upper[k + 1] < x {
            (self.upper[k] - x) / (self.upper[k] - self.upper[k + 1])
        } else {
            1.0
        };
        (k as f64 + t_low.min(t_up)) / m as f64
    }

    /// Re-grids the table onto `levels` membership levels by linear
    /// interpolation; exact whenever the new grid contains the old.
    pub fn resample(&self, levels: usize) -> FuzzyNumber {
        let m = levels.max(1);
        if m == self.levels() {
            return self.clone();
        }
        let mut lower = Vec::with_capacity(m + 1);
        let mut upper = Vec::with_capacity(m + 1);
        for k in 0..=m {
            let (lo, hi) = self
                .level_cut(k as f64 / m as f64)
                .expect("grid level is within range");
            lower.push(lo);
            upper.push(hi);
        }
        FuzzyNumber { lower, upper }
    }

    /// Level-wise interval addition; mismatched grids are resampled to
    /// the finer one first.
    pub fn add(&self, other: &FuzzyNumber) -> FuzzyNumber {
        let m = self.levels().max(other.levels());
        let (a, b) = (self.resample(m), other.resample(m));
        let lower = a.lower.iter().zip(&b.lower).map(|(x, y)| x + y).collect();
        let upper = a.upper.iter().zip(&b.upper).map(|(x, y)| x + y).collect();
        FuzzyNumber { lower, upper }
    }

    /// Level-wise scalar multiple; negative factors swap the endpoints.
    pub fn scale(&self, factor: f64) -> FuzzyNumber {
        let map = |lo: f64, hi: f64| {
            let (a, b) = (factor * lo, factor * hi);
            if factor < 0.0 {
                (b, a)
            } else {
                (a, b)
            }
        };
        let mut lower = Vec::with_capacity(self.lower.len());
        let mut upper = Vec::with_capacity(self.upper.len());
        for k in 0..self.lower.len() {
            let (a, b) = map(self.lower[k], self.upper[k]);
            lower.push(a);
            upper.push(b);
        }
        FuzzyNumber { lower, upper }
    }
}

/// Hausdorff distance: the largest endpoint deviation over all levels.
/// Mismatched grids are resampled to the finer one.
pub fn hausdorff(a: &FuzzyNumber, b: &FuzzyNumber) -> f64 {
    if a.levels() != b.levels() {
        let m = a.levels().max(b.levels());
        return hausdorff(&a.resample(m), &b.resample(m));
    }
    let mut d = 0.0f64;
    for k in 0..a.lower.len() {
        d = d.max((a.lower[k] - b.lower[k]).abs());
        d = d.max((a.upper[k] - b.upper[k]).abs());
    }
    d
}

/// Shorthand and table forms accepted wherever a fuzzy number appears
/// in JSON input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FuzzyNumberSpec {
    Crisp { crisp: f64 },
    Triangular { triangular: [f64; 3] },
    Trapezoidal { trapezoidal: [f64; 4] },
    Table { levels: usize, lower: Vec<f64>, upper: Vec<f64> },
}

impl FuzzyNumberSpec {
    /// Builds a validated fuzzy number on `levels` membership levels.
    pub fn build(&self, levels: usize) -> Result<FuzzyNumber, FuzzyError> {
        let u = self.build_unvalidated(levels)?;
        u.validate()?;
        Ok(u)
    }

    /// Builds the table without checking the stacking conditions, for
    /// callers that want to run validation themselves.
    pub fn build_unvalidated(&self, levels: usize) -> Result<FuzzyNumber, FuzzyError> {
        match *self {
            FuzzyNumberSpec::Crisp { crisp } => FuzzyNumber::crisp_with_levels(crisp, levels),
            FuzzyNumberSpec::Triangular { triangular: [a, b, c] } => {
                FuzzyNumber::triangular_with_levels(a, b, c, levels)
            }
            FuzzyNumberSpec::Trapezoidal { trapezoidal: [a, b, c, d] } => {
                FuzzyNumber::trapezoidal_with_levels(a, b, c, d, levels)
            }
            FuzzyNumberSpec::Table { levels, ref lower, ref upper } => {
                if lower.len() != levels + 1 || upper.len() != levels + 1 {
                    return Err(FuzzyError::BadShape);
                }
                FuzzyNumber::from_raw(lower.clone(), upper.clone())
            }
        }
    }
}
