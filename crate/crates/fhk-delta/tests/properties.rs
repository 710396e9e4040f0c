//! Property suites for the structural invariants: jump operators stay
//! in the scale, the distance is a metric, arithmetic preserves valid
//! tables, the division scan always yields fine divisions, and the
//! expression printer is a parse fixed point.

use proptest::prelude::*;

use fhk_delta::fnspec::expr::{self, BinOp, Expr, Func};
use fhk_delta::fnspec::FuzzyFn;
use fhk_delta::fuzzy::{hausdorff, FuzzyNumber};
use fhk_delta::gauge::{cousin_divide, is_fine, riemann_sum, DeltaGauge, TaggedDivision};
use fhk_delta::timescale::TimeScale;

// Random scale: up to four components separated by genuine gaps, with
// a chance of degenerate (isolated point) components.
fn arb_timescale() -> impl Strategy<Value = TimeScale> {
    (
        -10.0..10.0f64,
        prop::collection::vec(((0.0..1.5f64), (0.1..2.0f64), any::<bool>()), 1..=4),
    )
        .prop_map(|(start, parts)| {
            let mut comps = Vec::new();
            let mut cursor = start;
            for (len, gap, isolated) in parts {
                let len = if isolated { 0.0 } else { len };
                comps.push((cursor, cursor + len));
                cursor += len + gap;
            }
            TimeScale::new(comps).expect("generated components are ordered")
        })
}

fn point_in(ts: &TimeScale, which: usize, frac: f64) -> f64 {
    let comps = ts.components();
    let [l, r] = comps[which % comps.len()];
    l + frac * (r - l)
}

// Valid endpoint tables built from nonnegative increments.
fn arb_fuzzy(levels: usize) -> impl Strategy<Value = FuzzyNumber> {
    (
        -5.0..5.0f64,
        0.0..2.0f64,
        prop::collection::vec(0.0..1.0f64, levels),
        prop::collection::vec(0.0..1.0f64, levels),
    )
        .prop_map(move |(core_lo, core_gap, down, up)| {
            let mut lower = vec![0.0; levels + 1];
            let mut upper = vec![0.0; levels + 1];
            lower[levels] = core_lo;
            upper[levels] = core_lo + core_gap;
            for k in (0..levels).rev() {
                lower[k] = lower[k + 1] - down[k];
                upper[k] = upper[k + 1] + up[k];
            }
            FuzzyNumber::from_endpoints(lower, upper).expect("construction is monotone")
        })
}

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0.0..100.0f64).prop_map(Expr::number),
        Just(Expr::var()),
    ];
    leaf.prop_recursive(4, 48, 2, |inner| {
        prop_oneof![
            (
                prop_oneof![
                    Just(BinOp::Add),
                    Just(BinOp::Sub),
                    Just(BinOp::Mul),
                    Just(BinOp::Div),
                    Just(BinOp::Pow),
                ],
                inner.clone(),
                inner.clone()
            )
                .prop_map(|(op, a, b)| Expr::binary(op, a, b)),
            inner.clone().prop_map(Expr::neg),
            (
                prop_oneof![
                    Just(Func::Sin),
                    Just(Func::Cos),
                    Just(Func::Exp),
                    Just(Func::Log),
                    Just(Func::Abs),
                    Just(Func::Sqrt),
                ],
                inner
            )
                .prop_map(|(f, a)| Expr::call(f, a)),
        ]
    })
}

proptest! {
    #[test]
    fn jump_operators_stay_inside_the_scale(
        ts in arb_timescale(),
        which in 0usize..4,
        frac in 0.0..=1.0f64,
    ) {
        let x = point_in(&ts, which, frac);
        let forward = ts.forward_jump(x).unwrap();
        let backward = ts.backward_jump(x).unwrap();
        prop_assert!(forward >= x - 1e-12);
        prop_assert!(backward <= x + 1e-12);
        prop_assert!(ts.contains(forward));
        prop_assert!(ts.contains(backward));
        let g = ts.graininess(x).unwrap();
        let c = ts.classify(x).unwrap();
        prop_assert_eq!(c.right_scattered, g.forward > 0.0);
        prop_assert_eq!(c.left_scattered, g.backward > 0.0);
        prop_assert_ne!(c.right_scattered, c.right_dense);
    }

    #[test]
    fn prev_in_lands_in_the_scale(ts in arb_timescale(), y in -15.0..15.0f64) {
        if let Some(p) = ts.prev_in(y) {
            prop_assert!(ts.contains(p));
            prop_assert!(p <= y + 1e-12);
        } else {
            prop_assert!(y < ts.min_point());
        }
    }

    #[test]
    fn distance_is_a_metric(
        u in arb_fuzzy(8),
        v in arb_fuzzy(8),
        w in arb_fuzzy(8),
    ) {
        prop_assert_eq!(hausdorff(&u, &u), 0.0);
        prop_assert_eq!(hausdorff(&u, &v), hausdorff(&v, &u));
        prop_assert!(hausdorff(&u, &w) <= hausdorff(&u, &v) + hausdorff(&v, &w) + 1e-12);
        if hausdorff(&u, &v) == 0.0 {
            prop_assert_eq!(&u, &v);
        }
    }

    #[test]
    fn arithmetic_preserves_valid_tables(
        u in arb_fuzzy(8),
        v in arb_fuzzy(8),
        factor in -4.0..4.0f64,
    ) {
        prop_assert!(u.add(&v).validate().is_ok());
        prop_assert!(u.scale(factor).validate().is_ok());
    }

    #[test]
    fn cuts_nest_downward(u in arb_fuzzy(8), a1 in 0.0..=1.0f64, a2 in 0.0..=1.0f64) {
        let (low, high) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
        let outer = u.level_cut(low).unwrap();
        let inner = u.level_cut(high).unwrap();
        prop_assert!(outer.0 <= inner.0 + 1e-12);
        prop_assert!(inner.1 <= outer.1 + 1e-12);
    }

    #[test]
    fn scan_always_builds_fine_divisions(
        ts in arb_timescale(),
        wa in 0usize..4,
        fa in 0.0..=1.0f64,
        wb in 0usize..4,
        fb in 0.0..=1.0f64,
        width_frac in 0.01..=2.0f64,
    ) {
        let p = point_in(&ts, wa, fa);
        let q = point_in(&ts, wb, fb);
        let (a, b) = if p <= q { (p, q) } else { (q, p) };
        prop_assume!(b - a > 1e-6);
        let gauge = DeltaGauge::uniform(&ts, a, b, width_frac * (b - a)).unwrap();
        let division = cousin_divide(&ts, a, b, gauge).unwrap();
        prop_assert!(division.validate(&ts).is_ok());
        prop_assert!(is_fine(&division, &ts, gauge).unwrap());
        prop_assert!(division.respects_gaps(&ts));
        let cells = division.cells();
        prop_assert!(!cells.is_empty());
        prop_assert_eq!(cells[0].left, a);
        prop_assert_eq!(cells[cells.len() - 1].right, b);
        for cell in cells {
            prop_assert_eq!(cell.tag, cell.left);
        }
    }

    #[test]
    fn riemann_sums_concatenate(
        frac in 0.1..=0.9f64,
        width in 0.02..=0.4f64,
    ) {
        let ts = TimeScale::new([(0.0, 1.0), (1.5, 1.5), (2.0, 3.0)]).unwrap();
        let f = FuzzyFn::scaled("x", FuzzyNumber::triangular(0.0, 1.0, 2.0).unwrap()).unwrap();
        let c = ts.prev_in(3.0 * frac).unwrap();
        prop_assume!(c > 1e-6 && c < 3.0 - 1e-6);
        let gauge = DeltaGauge::uniform(&ts, 0.0, 3.0, width).unwrap();
        let head = cousin_divide(&ts, 0.0, c, gauge).unwrap();
        let tail = cousin_divide(&ts, c, 3.0, gauge).unwrap();
        let mut cells = head.cells().to_vec();
        cells.extend_from_slice(tail.cells());
        let joined = TaggedDivision::new(cells);
        let split = riemann_sum(&f, &head, 16).unwrap().add(&riemann_sum(&f, &tail, 16).unwrap());
        let joint = riemann_sum(&f, &joined, 16).unwrap();
        prop_assert!(hausdorff(&split, &joint) <= 1e-10);
    }

    #[test]
    fn printer_is_a_parse_fixed_point(e in arb_expr()) {
        let printed = expr::pretty(&e);
        let reparsed = expr::parse(&printed).unwrap();
        prop_assert_eq!(&reparsed, &e, "printed form `{}` changed the tree", printed);
        prop_assert_eq!(expr::pretty(&reparsed), printed);
    }
}
