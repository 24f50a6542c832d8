use crate::candidates::{heat_residual, CandidateSpec, ValueFunction};
use crate::lab::{cs_chain_check, cww_check, main_inequality_check, rubin_check};
use crate::martingale::{expectation, from_json, lp_ratio, to_json};
use crate::{DyadicMartingale, IncrementTree, SignSequence};
use proptest::prelude::*;

fn increments(max_depth: usize, root: std::ops::Range<f64>) -> impl Strategy<Value = IncrementTree> {
    (0..=max_depth, root).prop_flat_map(|(depth, root)| {
        let levels: Vec<_> = (0..depth)
            .map(|k| prop::collection::vec(-1.5f64..1.5, 1usize << k))
            .collect();
        levels.prop_map(move |deltas| IncrementTree { root, deltas })
    })
}

fn tree(max_depth: usize) -> impl Strategy<Value = DyadicMartingale> {
    increments(max_depth, -3.0..3.0).prop_map(|inc| DyadicMartingale::from_increments(inc).unwrap())
}

fn centered(max_depth: usize) -> impl Strategy<Value = DyadicMartingale> {
    increments(max_depth, 0.0..1.0)
        .prop_map(|inc| DyadicMartingale::from_increments(IncrementTree { root: 0.0, ..inc }).unwrap())
}

fn signs(len: usize) -> impl Strategy<Value = SignSequence> {
    prop::collection::vec(prop::bool::ANY, len)
        .prop_map(|v| SignSequence::new(v.into_iter().map(|b| if b { 1 } else { -1 }).collect()).unwrap())
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn increments_round_trip(inc in increments(8, -3.0..3.0)) {
        let m = DyadicMartingale::from_increments(inc.clone()).unwrap();
        prop_assert_eq!(m.increments(), inc);
        m.validate().unwrap();
    }

    #[test]
    fn leaves_round_trip(m in tree(8)) {
        let back = DyadicMartingale::from_leaf_values(m.leaves()).unwrap();
        prop_assert_eq!(back.leaves(), m.leaves());
        for (a, b) in back.levels().iter().flatten().zip(m.levels().iter().flatten()) {
            prop_assert!(close(*a, *b, 1e-12));
        }
    }

    #[test]
    fn json_is_byte_stable(m in tree(8)) {
        let text = to_json(&m);
        let back = from_json(&text).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(to_json(&back), text);
    }

    #[test]
    fn transform_is_an_involution_preserving_squares(
        (m, s) in tree(8).prop_flat_map(|m| { let d = m.depth(); (Just(m), signs(d)) })
    ) {
        let g = m.transform(&s).unwrap();
        prop_assert_eq!(g.square_function(0.0).unwrap(), m.square_function(0.0).unwrap());
        prop_assert_eq!(g.transform(&s).unwrap(), m.clone());
        prop_assert_eq!(g.root(), m.root());
    }

    #[test]
    fn mean_is_the_root(m in tree(8)) {
        let mean = expectation(&m, |v, _| v).unwrap();
        prop_assert!((mean - m.root()).abs() <= 1e-12 * (1.0 + m.root().abs()));
    }

    #[test]
    fn splice_averages_expectations(
        (a, b) in (1usize..=6).prop_flat_map(|d| (tree(d), tree(d)))
            .prop_filter("equal depths", |(a, b)| a.depth() == b.depth())
    ) {
        let root = (a.root() + b.root()) / 2.0;
        let s = DyadicMartingale::splice(&a, &b, root).unwrap();
        s.validate().unwrap();
        let payoff = |v: f64, _| (0.3 * v).sin() + v * v;
        let whole = expectation(&s, payoff).unwrap();
        let halves = 0.5 * (expectation(&a, payoff).unwrap() + expectation(&b, payoff).unwrap());
        prop_assert!(close(whole, halves, 1e-12));
    }

    #[test]
    fn truncation_shrinks_the_square_function(m in tree(8), cut in 0usize..8) {
        let n = cut.min(m.depth());
        let t = m.truncate(n);
        let fine = m.square_function(0.0).unwrap();
        let coarse = t.square_function(0.0).unwrap();
        let block = fine.len() / coarse.len();
        for (i, s) in fine.iter().enumerate() {
            prop_assert!(coarse[i / block] <= *s);
        }
    }

    #[test]
    fn l2_transform_ratio_is_one(
        (m, s) in centered(8)
            .prop_filter("nonzero", |m| m.leaves().iter().any(|&x| x != 0.0))
            .prop_flat_map(|m| { let d = m.depth(); (Just(m), signs(d)) })
    ) {
        let r = lp_ratio(&m, &s, 2.0).unwrap();
        prop_assert!((r - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn inequalities_hold_on_centered_trees(m in centered(8)) {
        prop_assert!(main_inequality_check(&m, 2.0).unwrap().satisfied);
        prop_assert!(cww_check(&m).unwrap().satisfied);
        for l in [0.5, 1.0, 2.0, 4.0] {
            prop_assert!(rubin_check(&m, l).unwrap().satisfied);
        }
        prop_assert!(cs_chain_check(&m).unwrap().iter().all(|r| r.satisfied));
    }

    #[test]
    fn value_function_homogeneity(
        alpha in 0.5f64..3.0,
        x in -5.0f64..5.0,
        y in 0.0f64..3.0,
        d in -3.0f64..3.0,
    ) {
        let v = ValueFunction::new(alpha).unwrap();
        let lhs = v.eval(x + d, y + d / alpha);
        let rhs = d.exp() * v.eval(x, y);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (d.exp() * (x.exp() + (alpha * y).exp())));
    }

    #[test]
    fn ode_lift_homogeneity(
        c1 in -2.0f64..2.0,
        c2 in -2.0f64..2.0,
        x in -4.0f64..4.0,
        y in 0.0f64..2.0,
        t in -1.0f64..1.0,
    ) {
        prop_assume!(t >= -y);
        let spec = CandidateSpec::ode_lift(c1, c2);
        let lhs = spec.eval(x + 2.0 * t, y + t);
        let rhs = (2.0 * t).exp() * spec.eval(x, y);
        let s = x - 2.0 * y;
        let size = (2.0 * (y + t)).exp() * (2.0 * s).exp() * (c1.abs() * s.abs() + c2.abs() + 1.0);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * size);
    }

    #[test]
    fn main_candidate_is_a_heat_subsolution(x in -5.0f64..3.0, y in 0.1f64..3.0) {
        let r = heat_residual(&CandidateSpec::main(), x, y, 1e-4).unwrap();
        prop_assert!((r + x.exp()).abs() <= 1e-3 * (1.0 + (2.0 * x).exp()), "{r}");
    }
}
