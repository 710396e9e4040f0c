//! Delta gauges, fine tagged divisions, and fuzzy Riemann sums.
//!
//! A gauge is a pair of radius functions controlling how wide a cell
//! around each tag may be; the right radius is floored by the forward
//! graininess so a division always exists. [`cousin_divide`] builds one
//! constructively with a greedy left-to-right scan: inside an interval
//! component it advances by the gauge base (never past the component
//! end), and from a right-scattered point it takes exactly one jump.
//! Every right-scattered point therefore shows up as a cell boundary
//! and no cell interior straddles a gap of the scale.
//!
//! Fineness uses the closed-right convention `x_i <= tag + right
//! radius`: with the minimal admissible gauge a jump cell attains
//! equality, so a strict inequality would make divisions impossible on
//! lattices. The left condition stays strict except at the division's
//! first point, where a zero left radius is allowed.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fnspec::{EvalError, Expr, FnError, FuzzyFn};
use crate::fuzzy::FuzzyNumber;
use crate::timescale::{TimeScale, TimeScaleError, DEFAULT_SNAP_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaugeError {
    #[error("gauge width must be positive, got {0}")]
    BadWidth(f64),
    #[error("gauge needs a nonempty window, got [{0}, {1}]")]
    EmptyWindow(f64, f64),
    #[error("bounds are inverted: {0} > {1}")]
    InvertedBounds(f64, f64),
    #[error(transparent)]
    Scale(#[from] TimeScaleError),
    #[error("division scan stalled at {0}")]
    Stalled(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DivisionError {
    #[error("cell {index} is inverted: left {left} exceeds right {right}")]
    InvertedCell { index: usize, left: f64, right: f64 },
    #[error("cell {index} tag {tag} lies outside [{left}, {right}]")]
    TagOutsideCell {
        index: usize,
        tag: f64,
        left: f64,
        right: f64,
    },
    #[error("cells {index} and {} are not adjacent: {right} != {next_left}", index + 1)]
    NotAdjacent {
        index: usize,
        right: f64,
        next_left: f64,
    },
    #[error("cell {index} coordinate {value} is not in the time scale")]
    NotInScale { index: usize, value: f64 },
    #[error(transparent)]
    Gauge(#[from] GaugeError),
}

/// Where the scan places tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TagRule {
    /// Tag every cell at its left endpoint.
    #[default]
    LeftEndpoint,
    /// Tag at the midpoint when the whole cell sits inside one
    /// interval component, at the left endpoint otherwise.
    Midpoint,
}

/// A uniform two-sided gauge; the right radius is floored by the
/// forward graininess at evaluation time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaGauge {
    base_left: f64,
    base_right: f64,
}

impl DeltaGauge {
    /// A gauge with equal base radii on `[a, b]` in the scale.
    pub fn uniform(ts: &TimeScale, a: f64, b: f64, width: f64) -> Result<Self, GaugeError> {
        if !(width > 0.0) {
            return Err(GaugeError::BadWidth(width));
        }
        if a >= b {
            return Err(GaugeError::EmptyWindow(a, b));
        }
        ts.classify(a)?;
        ts.classify(b)?;
        Ok(DeltaGauge {
            base_left: width,
            base_right: width,
        })
    }

    /// Halves both base radii. The floored right radius never grows,
    /// so fineness is preserved downward.
    pub fn refine(&self) -> DeltaGauge {
        DeltaGauge {
            base_left: self.base_left / 2.0,
            base_right: self.base_right / 2.0,
        }
    }

    pub fn base_left(&self) -> f64 {
        self.base_left
    }

    pub fn base_right(&self) -> f64 {
        self.base_right
    }

    pub fn left_radius(&self) -> f64 {
        self.base_left
    }

    /// Right radius at a tag: the base, floored by the graininess.
    pub fn right_radius(&self, ts: &TimeScale, x: f64) -> Result<f64, GaugeError> {
        Ok(self.base_right.max(ts.graininess(x)?.forward))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Cell {
    pub left: f64,
    pub right: f64,
    pub tag: f64,
}

impl From<[f64; 3]> for Cell {
    fn from(v: [f64; 3]) -> Cell {
        Cell {
            left: v[0],
            right: v[1],
            tag: v[2],
        }
    }
}

impl From<Cell> for [f64; 3] {
    fn from(c: Cell) -> [f64; 3] {
        [c.left, c.right, c.tag]
    }
}

impl Cell {
    pub fn width(&self) -> f64 {
        self.right - self.left
    }
}

/// An ordered tagged division of a window of the time scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct TaggedDivision {
    cells: Vec<Cell>,
}

impl TaggedDivision {
    pub fn new(cells: Vec<Cell>) -> Self {
        TaggedDivision { cells }
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Structural checks: ordered adjacent cells, contained tags, and
    /// every coordinate a member of the scale.
    pub fn validate(&self, ts: &TimeScale) -> Result<(), DivisionError> {
        for (index, cell) in self.cells.iter().enumerate() {
            if cell.left > cell.right {
                return Err(DivisionError::InvertedCell {
                    index,
                    left: cell.left,
                    right: cell.right,
                });
            }
            if cell.tag < cell.left - DEFAULT_SNAP_TOL || cell.tag > cell.right + DEFAULT_SNAP_TOL {
                return Err(DivisionError::TagOutsideCell {
                    index,
                    tag: cell.tag,
                    left: cell.left,
                    right: cell.right,
                });
            }
            for value in [cell.left, cell.right, cell.tag] {
                if !ts.contains(value) {
                    return Err(DivisionError::NotInScale { index, value });
                }
            }
            if index + 1 < self.cells.len() {
                let next_left = self.cells[index + 1].left;
                if (cell.right - next_left).abs() > DEFAULT_SNAP_TOL {
                    return Err(DivisionError::NotAdjacent {
                        index,
                        right: cell.right,
                        next_left,
                    });
                }
            }
        }
        Ok(())
    }

    /// True when no gap of the scale starts strictly inside a cell
    /// whose tag is not the gap's left endpoint.
    pub fn respects_gaps(&self, ts: &TimeScale) -> bool {
        self.cells.iter().all(|cell| {
            ts.right_scattered_in(cell.left, cell.right)
                .iter()
                .all(|&(t, _)| t <= cell.left + DEFAULT_SNAP_TOL || (t - cell.tag).abs() <= DEFAULT_SNAP_TOL)
        })
    }
}

/// Builds a fine tagged division of `[a, b]` with left-endpoint tags.
pub fn cousin_divide(
    ts: &TimeScale,
    a: f64,
    b: f64,
    gauge: DeltaGauge,
) -> Result<TaggedDivision, GaugeError> {
    cousin_divide_tagged(ts, a, b, gauge, TagRule::LeftEndpoint)
}

/// Builds a fine tagged division with the chosen tag rule.
pub fn cousin_divide_tagged(
    ts: &TimeScale,
    a: f64,
    b: f64,
    gauge: DeltaGauge,
    rule: TagRule,
) -> Result<TaggedDivision, GaugeError> {
    if a > b {
        return Err(GaugeError::InvertedBounds(a, b));
    }
    ts.classify(a)?;
    ts.classify(b)?;
    if b - a <= DEFAULT_SNAP_TOL {
        return Ok(TaggedDivision::default());
    }
    let mut cells = Vec::new();
    let mut cursor = a;
    let components = ts.components();
    while b - cursor > DEFAULT_SNAP_TOL {
        let j = components.partition_point(|c| c[0] <= cursor + DEFAULT_SNAP_TOL) - 1;
        let [_, r] = components[j];
        let next = if r - cursor <= DEFAULT_SNAP_TOL {
            // Right-scattered point: exactly one jump.
            ts.forward_jump(cursor)?.min(b)
        } else {
            let mut cand = cursor + gauge.right_radius(ts, cursor)?;
            if cand >= r - DEFAULT_SNAP_TOL {
                cand = r;
            }
            cand.min(b)
        };
        if next <= cursor {
            return Err(GaugeError::Stalled(cursor));
        }
        let in_component = next <= components[j][1] + DEFAULT_SNAP_TOL;
        let tag = match rule {
            TagRule::LeftEndpoint => cursor,
            TagRule::Midpoint if in_component => 0.5 * (cursor + next),
            TagRule::Midpoint => cursor,
        };
        cells.push(Cell {
            left: cursor,
            right: next,
            tag,
        });
        cursor = next;
    }
    Ok(TaggedDivision::new(cells))
}

/// Checks that a structurally valid division is fine for the gauge.
pub fn is_fine(
    division: &TaggedDivision,
    ts: &TimeScale,
    gauge: DeltaGauge,
) -> Result<bool, DivisionError> {
    division.validate(ts)?;
    let Some(first) = division.cells().first() else {
        return Ok(true);
    };
    let start = first.left;
    for cell in division.cells() {
        let right_radius = gauge.right_radius(ts, cell.tag)?;
        if cell.right > cell.tag + right_radius + DEFAULT_SNAP_TOL {
            return Ok(false);
        }
        let left_ok = cell.left == start
            || cell.left > cell.tag - gauge.left_radius() - DEFAULT_SNAP_TOL;
        if !left_ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Level-wise accumulation of `sum f(tag) * width` over the cells.
/// Tag tables are evaluated per cell (in parallel when `threads > 1`,
/// which cannot change the result: sums still fold in cell order) and
/// folded into one pair of endpoint rows.
pub(crate) fn accumulate_sums(
    f: &FuzzyFn,
    cells: &[Cell],
    levels: usize,
    threads: usize,
) -> Result<(Vec<f64>, Vec<f64>), FnError> {
    let rows = levels.max(1) + 1;
    let stride = 2 * rows;
    let mut total_lower = vec![0.0; rows];
    let mut total_upper = vec![0.0; rows];
    const BLOCK: usize = 2048;
    let mut scratch = vec![0.0; stride * BLOCK.min(cells.len().max(1))];
    for block in cells.chunks(BLOCK) {
        let used = &mut scratch[..stride * block.len()];
        if threads > 1 {
            used.par_chunks_mut(stride)
                .zip(block.par_iter())
                .try_for_each(|(row, cell)| {
                    let (lo, hi) = row.split_at_mut(rows);
                    f.eval_fuzzy_into(cell.tag, lo, hi)
                })?;
        } else {
            for (row, cell) in used.chunks_mut(stride).zip(block) {
                let (lo, hi) = row.split_at_mut(rows);
                f.eval_fuzzy_into(cell.tag, lo, hi)?;
            }
        }
        for (row, cell) in used.chunks(stride).zip(block) {
            let dx = cell.width();
            for k in 0..rows {
                total_lower[k] += dx * row[k];
                total_upper[k] += dx * row[rows + k];
            }
        }
    }
    Ok((total_lower, total_upper))
}

/// Fuzzy Riemann sum of `f` over a tagged division.
pub fn riemann_sum(
    f: &FuzzyFn,
    division: &TaggedDivision,
    levels: usize,
) -> Result<FuzzyNumber, FnError> {
    let (lower, upper) = accumulate_sums(f, division.cells(), levels, 1)?;
    Ok(FuzzyNumber::from_raw(lower, upper).expect("accumulated rows share a shape"))
}

/// Scalar Riemann sum of a real expression over a tagged division.
pub fn riemann_sum_real(g: &Expr, division: &TaggedDivision) -> Result<f64, EvalError> {
    let mut total = 0.0;
    for cell in division.cells() {
        total += crate::fnspec::eval(g, cell.tag)? * cell.width();
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fnspec::parse;

    fn unit() -> TimeScale {
        TimeScale::interval(0.0, 1.0).unwrap()
    }

    fn lattice4() -> TimeScale {
        TimeScale::points(&[0.0, 1.0, 2.0, 3.0]).unwrap()
    }

    fn approx(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12
    }

    #[test]
    fn uniform_gauge_applies_graininess_floor() {
        let lat = lattice4();
        let g = DeltaGauge::uniform(&lat, 0.0, 3.0, 0.1).unwrap();
        assert_eq!(g.right_radius(&lat, 0.0).unwrap(), 1.0);
        let cont = unit();
        let g = DeltaGauge::uniform(&cont, 0.0, 1.0, 0.1).unwrap();
        assert_eq!(g.right_radius(&cont, 0.5).unwrap(), 0.1);
        assert!(DeltaGauge::uniform(&cont, 0.0, 1.0, 0.0).is_err());
        assert!(DeltaGauge::uniform(&cont, 1.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn refinement_halves_and_keeps_floor() {
        let g = DeltaGauge::uniform(&unit(), 0.0, 1.0, 0.4).unwrap();
        let g2 = g.refine();
        assert_eq!(g2.base_right(), 0.2);
        assert_eq!(g2.refine().base_right(), 0.1);
        let lat = lattice4();
        let g = DeltaGauge::uniform(&lat, 0.0, 3.0, 0.4).unwrap();
        assert_eq!(g.refine().right_radius(&lat, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn scan_traces_unit_interval() {
        let ts = unit();
        let g = DeltaGauge::uniform(&ts, 0.0, 1.0, 0.3).unwrap();
        let d = cousin_divide(&ts, 0.0, 1.0, g).unwrap();
        let expected = [(0.0, 0.3), (0.3, 0.6), (0.6, 0.9), (0.9, 1.0)];
        assert_eq!(d.len(), expected.len());
        for (cell, (l, r)) in d.cells().iter().zip(expected) {
            assert!(approx(cell.left, l) && approx(cell.right, r));
            assert_eq!(cell.tag, cell.left);
        }
        assert!(is_fine(&d, &ts, g).unwrap());
    }

    #[test]
    fn scan_steps_across_lattice_jumps() {
        let ts = lattice4();
        let g = DeltaGauge::uniform(&ts, 0.0, 3.0, 0.1).unwrap();
        let d = cousin_divide(&ts, 0.0, 3.0, g).unwrap();
        let lefts: Vec<f64> = d.cells().iter().map(|c| c.left).collect();
        assert_eq!(lefts, vec![0.0, 1.0, 2.0]);
        assert_eq!(d.cells()[2].right, 3.0);
        assert!(is_fine(&d, &ts, g).unwrap());
    }

    #[test]
    fn degenerate_window_gives_empty_division() {
        let ts = unit();
        let g = DeltaGauge::uniform(&ts, 0.0, 1.0, 0.3).unwrap();
        let d = cousin_divide(&ts, 0.5, 0.5, g).unwrap();
        assert!(d.is_empty());
        assert!(is_fine(&d, &ts, g).unwrap());
    }

    #[test]
    fn wide_gauges_still_respect_gaps() {
        let ts = TimeScale::new([(0.0, 1.0), (2.0, 3.0)]).unwrap();
        let g = DeltaGauge::uniform(&ts, 0.0, 3.0, 5.0).unwrap();
        let d = cousin_divide(&ts, 0.0, 3.0, g).unwrap();
        let bounds: Vec<(f64, f64)> = d.cells().iter().map(|c| (c.left, c.right)).collect();
        assert_eq!(bounds, vec![(0.0, 1.0), (1.0, 2.0), (2.0, 3.0)]);
        assert!(d.respects_gaps(&ts));
        assert!(is_fine(&d, &ts, g).unwrap());
    }

    #[test]
    fn fineness_rejects_coarse_divisions() {
        let ts = unit();
        let coarse = DeltaGauge::uniform(&ts, 0.0, 1.0, 0.3).unwrap();
        let d = cousin_divide(&ts, 0.0, 1.0, coarse).unwrap();
        let fine = DeltaGauge::uniform(&ts, 0.0, 1.0, 0.05).unwrap();
        assert!(!is_fine(&d, &ts, fine).unwrap());
    }

    #[test]
    fn fineness_is_monotone_under_refinement() {
        let ts = TimeScale::new([(0.0, 1.0), (1.5, 1.5), (2.0, 3.0)]).unwrap();
        let g = DeltaGauge::uniform(&ts, 0.0, 3.0, 0.4).unwrap();
        let d = cousin_divide(&ts, 0.0, 3.0, g.refine()).unwrap();
        assert!(is_fine(&d, &ts, g.refine()).unwrap());
        assert!(is_fine(&d, &ts, g).unwrap());
    }

    #[test]
    fn single_wide_cell_is_fine() {
        let ts = unit();
        let g = DeltaGauge::uniform(&ts, 0.0, 1.0, 2.0).unwrap();
        let d = TaggedDivision::new(vec![Cell {
            left: 0.0,
            right: 1.0,
            tag: 0.0,
        }]);
        assert!(is_fine(&d, &ts, g).unwrap());
    }

    #[test]
    fn structural_validation_reports_faults() {
        let ts = unit();
        let g = DeltaGauge::uniform(&ts, 0.0, 1.0, 1.0).unwrap();
        let broken = TaggedDivision::new(vec![
            Cell { left: 0.0, right: 0.5, tag: 0.0 },
            Cell { left: 0.6, right: 1.0, tag: 0.6 },
        ]);
        assert!(matches!(
            is_fine(&broken, &ts, g),
            Err(DivisionError::NotAdjacent { .. })
        ));
        let outside = TaggedDivision::new(vec![Cell { left: 0.0, right: 0.5, tag: 0.9 }]);
        assert!(matches!(
            is_fine(&outside, &ts, g),
            Err(DivisionError::TagOutsideCell { .. })
        ));
        let stranger = TaggedDivision::new(vec![Cell { left: 0.0, right: 1.5, tag: 0.0 }]);
        assert!(matches!(
            is_fine(&stranger, &ts, g),
            Err(DivisionError::NotInScale { .. })
        ));
    }

    #[test]
    fn constant_integrand_sums_exactly() {
        let ts = unit();
        let f = FuzzyFn::scaled("1", FuzzyNumber::triangular(0.0, 1.0, 2.0).unwrap()).unwrap();
        let g = DeltaGauge::uniform(&ts, 0.0, 1.0, 0.125).unwrap();
        let d = cousin_divide(&ts, 0.0, 1.0, g).unwrap();
        let s = riemann_sum(&f, &d, 64).unwrap();
        assert_eq!(s, FuzzyNumber::triangular(0.0, 1.0, 2.0).unwrap());
    }

    #[test]
    fn lattice_sum_matches_discrete_oracle() {
        let ts = lattice4();
        let f = FuzzyFn::crisp("x").unwrap();
        let g = DeltaGauge::uniform(&ts, 0.0, 3.0, 0.1).unwrap();
        let d = cousin_divide(&ts, 0.0, 3.0, g).unwrap();
        let s = riemann_sum(&f, &d, 8).unwrap();
        // Discrete left sum: 0*1 + 1*1 + 2*1.
        assert_eq!(s, FuzzyNumber::crisp_with_levels(3.0, 8).unwrap());
    }

    #[test]
    fn empty_division_sums_to_zero() {
        let f = FuzzyFn::crisp("x").unwrap();
        let s = riemann_sum(&f, &TaggedDivision::default(), 8).unwrap();
        assert_eq!(s, FuzzyNumber::crisp_with_levels(0.0, 8).unwrap());
    }

    #[test]
    fn sums_are_additive_over_concatenation() {
        let ts = unit();
        let f = FuzzyFn::scaled("x", FuzzyNumber::triangular(0.0, 1.0, 2.0).unwrap()).unwrap();
        let g = DeltaGauge::uniform(&ts, 0.0, 1.0, 0.07).unwrap();
        let left = cousin_divide(&ts, 0.0, 0.5, g).unwrap();
        let right = cousin_divide(&ts, 0.5, 1.0, g).unwrap();
        let mut cells = left.cells().to_vec();
        cells.extend_from_slice(right.cells());
        let joined = TaggedDivision::new(cells);
        let split_sum = riemann_sum(&f, &left, 32)
            .unwrap()
            .add(&riemann_sum(&f, &right, 32).unwrap());
        let joint_sum = riemann_sum(&f, &joined, 32).unwrap();
        assert!(crate::fuzzy::hausdorff(&split_sum, &joint_sum) <= 1e-12);
    }

    #[test]
    fn crisp_sums_match_scalar_accumulation() {
        let ts = TimeScale::new([(0.0, 1.0), (2.0, 3.0)]).unwrap();
        let g = DeltaGauge::uniform(&ts, 0.0, 3.0, 0.21).unwrap();
        let d = cousin_divide(&ts, 0.0, 3.0, g).unwrap();
        let e = parse("x^2").unwrap();
        let f = FuzzyFn::Crisp { core: e.clone() };
        let fuzzy = riemann_sum(&f, &d, 16).unwrap();
        let real = riemann_sum_real(&e, &d).unwrap();
        assert!((fuzzy.lower()[0] - real).abs() <= 1e-12);
        assert!((fuzzy.upper()[16] - real).abs() <= 1e-12);
    }

    #[test]
    fn parallel_accumulation_is_bit_identical() {
        let ts = TimeScale::new([(0.0, 1.0), (1.5, 1.5), (2.0, 3.0)]).unwrap();
        let f = FuzzyFn::scaled("x^2", FuzzyNumber::triangular(-1.0, 0.5, 2.0).unwrap()).unwrap();
        let g = DeltaGauge::uniform(&ts, 0.0, 3.0, 0.001).unwrap();
        let d = cousin_divide(&ts, 0.0, 3.0, g).unwrap();
        let seq = accumulate_sums(&f, d.cells(), 16, 1).unwrap();
        let par = accumulate_sums(&f, d.cells(), 16, 4).unwrap();
        assert_eq!(seq, par);
    }

    #[test]
    fn division_round_trips_through_json() {
        let ts = unit();
        let g = DeltaGauge::uniform(&ts, 0.0, 1.0, 0.3).unwrap();
        let d = cousin_divide(&ts, 0.0, 1.0, g).unwrap();
        let text = serde_json::to_string(&d).unwrap();
        assert!(text.starts_with(r#"{"cells":[["#));
        let back: TaggedDivision = serde_json::from_str(&text).unwrap();
        assert_eq!(d, back);
    }
}
