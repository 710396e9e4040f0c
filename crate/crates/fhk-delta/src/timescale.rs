//! Time scales represented as finite unions of closed intervals and
//! isolated points of the real line.
//!
//! A [`TimeScale`] supplies the jump operators, graininess, point
//! classification, and the delta measure that the division builder and
//! the integrator are built on. Components are normalized at
//! construction: sorted, with overlapping or touching pieces merged, so
//! every remaining gap is a genuine gap.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute snap tolerance for membership tests. Gauge arithmetic
/// produces endpoints like `0.3 + 0.3 + 0.3` that must still land on
/// `0.9`, so comparisons against component endpoints absorb this much
/// rounding.
pub const DEFAULT_SNAP_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TimeScaleError {
    #[error("a time scale needs at least one component")]
    Empty,
    #[error("component [{0}, {1}] has a non-finite endpoint")]
    NonFinite(f64, f64),
    #[error("component [{0}, {1}] is inverted")]
    Inverted(f64, f64),
    #[error("lattice step must be positive, got {0}")]
    BadStep(f64),
    #[error("point {0} is not in the time scale")]
    NotInScale(f64),
    #[error("subset component [{0}, {1}] is not contained in the time scale")]
    NotSubset(f64, f64),
}

/// Scatter/density flags for a point of a time scale.
///
/// The supremum counts as right-dense (its forward jump is itself by
/// convention) and the infimum as left-dense, so exactly one flag of
/// each pair is set for every point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PointClass {
    pub right_scattered: bool,
    pub right_dense: bool,
    pub left_scattered: bool,
    pub left_dense: bool,
}

/// Forward and backward graininess of a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Graininess {
    /// Distance to the next point on the right, zero when right-dense.
    pub forward: f64,
    /// Distance to the previous point on the left, zero when left-dense.
    pub backward: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawTimeScale {
    components: Vec<[f64; 2]>,
}

/// A nonempty closed subset of the reals that is a finite union of
/// closed intervals; a degenerate interval is an isolated point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTimeScale", into = "RawTimeScale")]
pub struct TimeScale {
    components: Vec<[f64; 2]>,
    snap: f64,
}

impl TryFrom<RawTimeScale> for TimeScale {
    type Error = TimeScaleError;

    fn try_from(raw: RawTimeScale) -> Result<Self, TimeScaleError> {
        TimeScale::new(raw.components.into_iter().map(|c| (c[0], c[1])))
    }
}

impl From<TimeScale> for RawTimeScale {
    fn from(ts: TimeScale) -> RawTimeScale {
        RawTimeScale {
            components: ts.components,
        }
    }
}

impl TimeScale {
    /// Builds a time scale from closed intervals, merging components
    /// that overlap or sit closer than the snap tolerance.
    pub fn new(components: impl IntoIterator<Item = (f64, f64)>) -> Result<Self, TimeScaleError> {
        let snap = DEFAULT_SNAP_TOL;
        let mut comps = Vec::new();
        for (l, r) in components {
            if !l.is_finite() || !r.is_finite() {
                return Err(TimeScaleError::NonFinite(l, r));
            }
            if l > r {
                return Err(TimeScaleError::Inverted(l, r));
            }
            comps.push([l, r]);
        }
        if comps.is_empty() {
            return Err(TimeScaleError::Empty);
        }
        comps.sort_by(|a, b| a[0].total_cmp(&b[0]));
        let mut merged: Vec<[f64; 2]> = Vec::with_capacity(comps.len());
        for c in comps {
            match merged.last_mut() {
                Some(last) if c[0] <= last[1] + snap => last[1] = last[1].max(c[1]),
                _ => merged.push(c),
            }
        }
        Ok(TimeScale {
            components: merged,
            snap,
        })
    }

    /// A single closed interval `[l, r]`.
    pub fn interval(l: f64, r: f64) -> Result<Self, TimeScaleError> {
        Self::new([(l, r)])
    }

    /// A finite set of isolated points.
    pub fn points(pts: &[f64]) -> Result<Self, TimeScaleError> {
        Self::new(pts.iter().map(|&p| (p, p)))
    }

    /// Equally spaced points `start, start + step, ...` up to `stop`.
    pub fn lattice(start: f64, step: f64, stop: f64) -> Result<Self, TimeScaleError> {
        if !(step > 0.0) {
            return Err(TimeScaleError::BadStep(step));
        }
        let mut pts = Vec::new();
        let mut k = 0u64;
        loop {
            let p = start + (k as f64) * step;
            if p > stop + DEFAULT_SNAP_TOL {
                break;
            }
            pts.push(p);
            k += 1;
        }
        Self::points(&pts)
    }

    pub fn components(&self) -> &[[f64; 2]] {
        &self.components
    }

    pub fn snap_tolerance(&self) -> f64 {
        self.snap
    }

    pub fn min_point(&self) -> f64 {
        self.components[0][0]
    }

    pub fn max_point(&self) -> f64 {
        self.components[self.components.len() - 1][1]
    }

    /// Index of the component containing `x`, within the snap tolerance.
    fn locate(&self, x: f64) -> Option<usize> {
        let j = self.components.partition_point(|c| c[0] <= x + self.snap);
        if j == 0 {
            return None;
        }
        let j = j - 1;
        (x <= self.components[j][1] + self.snap).then_some(j)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.locate(x).is_some()
    }

    /// Component index plus the coordinate snapped onto the component,
    /// so endpoint noise within the tolerance lands exactly on `l`/`r`.
    fn canonical(&self, x: f64) -> Result<(usize, f64), TimeScaleError> {
        let j = self.locate(x).ok_or(TimeScaleError::NotInScale(x))?;
        let [l, r] = self.components[j];
        Ok((j, x.clamp(l, r)))
    }

    /// Forward jump: the nearest point of the scale strictly to the
    /// right, or the point itself at the supremum.
    pub fn forward_jump(&self, x: f64) -> Result<f64, TimeScaleError> {
        let (j, xx) = self.canonical(x)?;
        let [_, r] = self.components[j];
        if r - xx <= self.snap {
            Ok(match self.components.get(j + 1) {
                Some(next) => next[0],
                None => r,
            })
        } else {
            Ok(xx)
        }
    }

    /// Backward jump: the nearest point strictly to the left, or the
    /// point itself at the infimum.
    pub fn backward_jump(&self, x: f64) -> Result<f64, TimeScaleError> {
        let (j, xx) = self.canonical(x)?;
        let [l, _] = self.components[j];
        if xx - l <= self.snap {
            Ok(if j == 0 { l } else { self.components[j - 1][1] })
        } else {
            Ok(xx)
        }
    }

    /// Both graininess values at `x`.
    pub fn graininess(&self, x: f64) -> Result<Graininess, TimeScaleError> {
        let (_, xx) = self.canonical(x)?;
        Ok(Graininess {
            forward: self.forward_jump(xx)? - xx,
            backward: xx - self.backward_jump(xx)?,
        })
    }

    pub fn classify(&self, x: f64) -> Result<PointClass, TimeScaleError> {
        let g = self.graininess(x)?;
        Ok(PointClass {
            right_scattered: g.forward > 0.0,
            right_dense: g.forward == 0.0,
            left_scattered: g.backward > 0.0,
            left_dense: g.backward == 0.0,
        })
    }

    /// Largest point of the scale that is `<= y`, or `None` when `y`
    /// lies left of the whole scale.
    pub fn prev_in(&self, y: f64) -> Option<f64> {
        let j = self.components.partition_point(|c| c[0] <= y + self.snap);
        if j == 0 {
            return None;
        }
        let [l, r] = self.components[j - 1];
        Some(y.clamp(l, r))
    }

    /// Right-scattered points in `[a, b)` with their forward graininess.
    pub fn right_scattered_in(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for j in 0..self.components.len().saturating_sub(1) {
            let t = self.components[j][1];
            if t > a - self.snap && t < b - self.snap {
                out.push((t, self.components[j + 1][0] - t));
            }
        }
        out
    }

    /// Dense sample of `[a, b]` in the scale: an even grid on each
    /// interval component plus every right-scattered point and both
    /// bounds.
    pub fn sample_points(&self, a: f64, b: f64, per_component: usize) -> Vec<f64> {
        let mut pts = vec![a, b];
        for &[l, r] in &self.components {
            let lo = l.max(a);
            let hi = r.min(b);
            if hi - lo > self.snap {
                let n = per_component.max(2);
                for i in 0..n {
                    pts.push(lo + (hi - lo) * (i as f64) / ((n - 1) as f64));
                }
            }
        }
        for (t, _) in self.right_scattered_in(a, b) {
            pts.push(t);
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Delta measure of a representable subset: its Lebesgue measure
    /// plus the forward graininess of every right-scattered point it
    /// contains.
    pub fn delta_measure(&self, subset: &TimeScale) -> Result<f64, TimeScaleError> {
        let mut total = 0.0;
        for &[ls, rs] in subset.components() {
            let j = self
                .locate(ls)
                .ok_or(TimeScaleError::NotSubset(ls, rs))?;
            if rs > self.components[j][1] + self.snap {
                return Err(TimeScaleError::NotSubset(ls, rs));
            }
            total += rs - ls;
        }
        for j in 0..self.components.len().saturating_sub(1) {
            let t = self.components[j][1];
            if subset.contains(t) {
                total += self.components[j + 1][0] - t;
            }
        }
        Ok(total)
    }

    /// Whether a subset is null in the delta sense: Lebesgue-null and
    /// free of right-scattered points.
    pub fn is_delta_null(&self, subset: &TimeScale) -> Result<bool, TimeScaleError> {
        Ok(self.delta_measure(subset)? == 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mixed() -> TimeScale {
        TimeScale::new([(0.0, 1.0), (2.0, 3.0)]).unwrap()
    }

    fn lattice4() -> TimeScale {
        TimeScale::points(&[0.0, 1.0, 2.0, 3.0]).unwrap()
    }

    #[test]
    fn construction_sorts_and_merges() {
        let ts = TimeScale::new([(2.0, 3.0), (0.0, 1.0), (1.0, 1.5)]).unwrap();
        assert_eq!(ts.components(), &[[0.0, 1.5], [2.0, 3.0]]);
        let ts = TimeScale::new([(0.0, 1.0), (0.5, 2.0)]).unwrap();
        assert_eq!(ts.components(), &[[0.0, 2.0]]);
        assert!(TimeScale::new(std::iter::empty()).is_err());
        assert!(TimeScale::new([(1.0, 0.0)]).is_err());
        assert!(TimeScale::new([(f64::NAN, 1.0)]).is_err());
    }

    #[test]
    fn lattice_generates_exact_points() {
        let ts = TimeScale::lattice(0.0, 0.25, 3.0).unwrap();
        assert_eq!(ts.components().len(), 13);
        assert!(ts.contains(0.75));
        assert!(!ts.contains(0.8));
    }

    #[test]
    fn membership_snaps_accumulated_rounding() {
        let ts = TimeScale::points(&[0.9]).unwrap();
        assert!(ts.contains(0.3 + 0.3 + 0.3));
    }

    #[test]
    fn forward_jump_cases() {
        assert_eq!(lattice4().forward_jump(1.0).unwrap(), 2.0);
        assert_eq!(mixed().forward_jump(0.5).unwrap(), 0.5);
        assert_eq!(mixed().forward_jump(3.0).unwrap(), 3.0);
        assert!(mixed().forward_jump(1.7).is_err());
    }

    #[test]
    fn backward_jump_cases() {
        assert_eq!(lattice4().backward_jump(1.0).unwrap(), 0.0);
        assert_eq!(mixed().backward_jump(2.0).unwrap(), 1.0);
        assert_eq!(mixed().backward_jump(0.0).unwrap(), 0.0);
        assert!(mixed().backward_jump(-0.5).is_err());
    }

    #[test]
    fn graininess_cases() {
        let g = mixed().graininess(1.0).unwrap();
        assert_eq!((g.forward, g.backward), (1.0, 0.0));
        let g = mixed().graininess(0.5).unwrap();
        assert_eq!((g.forward, g.backward), (0.0, 0.0));
        let g = lattice4().graininess(2.0).unwrap();
        assert_eq!((g.forward, g.backward), (1.0, 1.0));
    }

    #[test]
    fn classification_cases() {
        let c = mixed().classify(1.0).unwrap();
        assert!(c.right_scattered && c.left_dense);
        let c = mixed().classify(2.0).unwrap();
        assert!(c.right_dense && c.left_scattered);
        // The supremum counts as right-dense by the jump convention.
        let c = mixed().classify(3.0).unwrap();
        assert!(c.right_dense && c.left_dense);
    }

    #[test]
    fn classification_matches_graininess() {
        let ts = mixed();
        for x in [0.0, 0.25, 1.0, 2.0, 2.5, 3.0] {
            let c = ts.classify(x).unwrap();
            let g = ts.graininess(x).unwrap();
            assert_eq!(c.right_scattered, g.forward > 0.0);
            assert_ne!(c.right_scattered, c.right_dense);
            assert_ne!(c.left_scattered, c.left_dense);
        }
    }

    #[test]
    fn prev_in_cases() {
        assert_eq!(mixed().prev_in(1.7), Some(1.0));
        assert_eq!(mixed().prev_in(2.5), Some(2.5));
        assert_eq!(mixed().prev_in(-1.0), None);
        // The returned point is always a member.
        for y in [-0.1, 0.0, 0.3, 1.0, 1.2, 2.0, 3.5] {
            if let Some(p) = mixed().prev_in(y) {
                assert!(mixed().contains(p));
                assert!(p <= y + DEFAULT_SNAP_TOL);
            }
        }
    }

    #[test]
    fn jump_round_trip_across_gap() {
        let ts = mixed();
        let s = ts.forward_jump(1.0).unwrap();
        assert_eq!(s, 2.0);
        assert_eq!(ts.backward_jump(s).unwrap(), 1.0);
    }

    // Independent recomputation of the measure: Lebesgue length plus
    // graininess of the scattered points in the subset.
    fn measure_oracle(ts: &TimeScale, subset: &TimeScale) -> f64 {
        let mut m = 0.0;
        for &[l, r] in subset.components() {
            m += r - l;
        }
        for j in 0..ts.components().len() - 1 {
            let t = ts.components()[j][1];
            let mu = ts.components()[j + 1][0] - t;
            if subset.contains(t) {
                m += mu;
            }
        }
        m
    }

    #[test]
    fn delta_measure_cases() {
        let ts = mixed();
        let dense_point = TimeScale::points(&[0.5]).unwrap();
        assert_eq!(ts.delta_measure(&dense_point).unwrap(), 0.0);
        assert!(ts.is_delta_null(&dense_point).unwrap());

        let scattered_point = TimeScale::points(&[1.0]).unwrap();
        let expect = measure_oracle(&ts, &scattered_point);
        assert_eq!(ts.delta_measure(&scattered_point).unwrap(), expect);
        assert_eq!(expect, 1.0);

        let left_half = TimeScale::interval(0.0, 1.0).unwrap();
        let expect = measure_oracle(&ts, &left_half);
        assert_eq!(ts.delta_measure(&left_half).unwrap(), expect);
        assert_eq!(expect, 2.0);
    }

    #[test]
    fn delta_measure_rejects_non_subsets() {
        let ts = mixed();
        let outside = TimeScale::interval(0.5, 1.5).unwrap();
        assert!(matches!(
            ts.delta_measure(&outside),
            Err(TimeScaleError::NotSubset(_, _))
        ));
    }

    #[test]
    fn delta_measure_additive_over_disjoint_parts() {
        let ts = TimeScale::new([(0.0, 1.0), (1.5, 1.5), (2.0, 3.0)]).unwrap();
        let part1 = TimeScale::interval(0.0, 0.5).unwrap();
        let part2 = TimeScale::new([(0.75, 1.0), (1.5, 1.5)]).unwrap();
        let both = TimeScale::new([(0.0, 0.5), (0.75, 1.0), (1.5, 1.5)]).unwrap();
        let sum = ts.delta_measure(&part1).unwrap() + ts.delta_measure(&part2).unwrap();
        assert!((ts.delta_measure(&both).unwrap() - sum).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let ts = TimeScale::new([(0.1, 0.1 + 0.2), (1.5, 1.5), (2.0, 3.0)]).unwrap();
        let text = serde_json::to_string(&ts).unwrap();
        let back: TimeScale = serde_json::from_str(&text).unwrap();
        assert_eq!(ts, back);
        let parsed: TimeScale =
            serde_json::from_str(r#"{"components":[[0,1],[1.5,1.5],[2,3]]}"#).unwrap();
        assert_eq!(parsed.components(), &[[0.0, 1.0], [1.5, 1.5], [2.0, 3.0]]);
    }

    #[test]
    fn right_scattered_listing() {
        let ts = TimeScale::new([(0.0, 1.0), (1.5, 1.5), (2.0, 3.0)]).unwrap();
        assert_eq!(
            ts.right_scattered_in(0.0, 3.0),
            vec![(1.0, 0.5), (1.5, 0.5)]
        );
        assert_eq!(ts.right_scattered_in(0.0, 1.0), vec![]);
    }
}
