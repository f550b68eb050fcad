//! Randomized properties over the whole toolkit: planted solutions
//! survive every pass, annotations agree with the forward maps, and the
//! certifier never under-approximates.

use etr::formula::{zero6, Fragment, Instance, VarAnnotation};
use etr::oracle::{empirical_range, planted_ami, planted_etr, planted_small};
use etr::passes::ami::to_ami;
use etr::passes::compact::compactify;
use etr::passes::conj::to_conj;
use etr::passes::inv::to_inv;
use etr::passes::pipeline::lower;
use etr::passes::shift::to_shift;
use etr::passes::small::to_small;
use etr::passes::square::to_square;
use etr::passes::TowerMode;
use etr::range::{bound_rational, certified_range};
use etr::rational::{format_rat, parse_rat, rat, rat_int, Rat};
use etr::validate::validate_fragment;
use etr::witness::{round_trip_check, RoundTrip};
use num_bigint::BigInt;
use num_traits::One;
use proptest::prelude::*;

fn small_rat() -> impl Strategy<Value = Rat> {
    (-48i64..=48, 1i64..=8).prop_map(|(n, d)| rat(n, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Rational formatting round-trips through the parser.
    #[test]
    fn rational_text_round_trip(r in small_rat()) {
        prop_assert_eq!(parse_rat(&format_rat(&r)).unwrap(), r);
    }

    /// Planted front-end instances are satisfied by their planted point,
    /// and the conjunctive lowering keeps that point reachable.
    #[test]
    fn front_end_round_trip(n_vars in 1usize..4, n_clauses in 1usize..4, seed in 0u64..10_000) {
        let p = planted_etr(n_vars, n_clauses, seed);
        prop_assert!(p.instance.check_point(&p.point).unwrap());
        let (conj, w, _) = to_conj(&p.instance).unwrap();
        prop_assert!(validate_fragment(&conj).is_empty());
        prop_assert_eq!(round_trip_check(&w, &conj, &p.point), RoundTrip::Ok);
    }

    /// The three-atom lowering preserves planted solutions exactly.
    #[test]
    fn three_atom_round_trip(seed in 0u64..10_000) {
        let p = planted_etr(2, 2, seed);
        let (conj, w1, _) = to_conj(&p.instance).unwrap();
        let pt = w1.forward_apply(&p.point).unwrap();
        let (ami, w2, _) = to_ami(&conj).unwrap();
        prop_assert!(validate_fragment(&ami).is_empty());
        prop_assert_eq!(round_trip_check(&w2, &ami, &pt), RoundTrip::Ok);
    }

    /// Scaling works for any dyadic delta and any test tower height, and
    /// the emitted scale is exactly delta * 2^(-2^h).
    #[test]
    fn scaling_round_trip(l in 1u32..12, h in 1u32..7, seed in 0u64..10_000) {
        let delta = rat(1, 1i64 << l);
        let a = planted_ami(2, 3, seed);
        let (small, w, _) = to_small(&a.instance, &delta, TowerMode::Test(h)).unwrap();
        prop_assert!(validate_fragment(&small).is_empty());
        prop_assert_eq!(round_trip_check(&w, &small, &a.point), RoundTrip::Ok);
        let image = w.forward_apply(&a.point).unwrap();
        let eps = small.vars.lookup("[e]").unwrap();
        let expected = delta / Rat::from_integer(BigInt::one() << (1u64 << h));
        prop_assert_eq!(image[eps].clone(), expected);
    }

    /// The bounding pass puts the planted point inside the box it builds.
    #[test]
    fn bounding_preserves_satisfiability(h in 3u32..7, seed in 0u64..10_000) {
        let p = planted_etr(2, 1, seed);
        let (conj, w1, _) = to_conj(&p.instance).unwrap();
        let pt = w1.forward_apply(&p.point).unwrap();
        let (compact, w2, _) = compactify(&conj, TowerMode::Test(h)).unwrap();
        prop_assert!(validate_fragment(&compact).is_empty());
        // The pass is equisatisfiable-only, so the check is plain forward
        // satisfaction (point values stay far below 2^(2^h) for h >= 3).
        prop_assert_eq!(round_trip_check(&w2, &compact, &pt), RoundTrip::Ok);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// The interval stages preserve planted solutions exactly, and every
    /// output variable's annotation evaluates, at the planted sources, to
    /// the same value the forward witness map produces.
    #[test]
    fn interval_stages_round_trip_and_annotate(seed in 0u64..10_000) {
        let d_sm = rat(1, 1i64 << 20);
        let d_sh = &d_sm * rat_int(5);
        let d_sq = &d_sh * rat_int(10);
        let d_inv = &d_sq * rat_int(1800);
        let s = planted_small(&d_sm, 2, 2, seed);
        let (shift, w1, _) = to_shift(&s.instance, &d_sh).unwrap();
        prop_assert_eq!(round_trip_check(&w1, &shift, &s.point), RoundTrip::Ok);
        let pt1 = w1.forward_apply(&s.point).unwrap();
        let (square, w2, _) = to_square(&shift, &d_sq).unwrap();
        prop_assert_eq!(round_trip_check(&w2, &square, &pt1), RoundTrip::Ok);
        let pt2 = w2.forward_apply(&pt1).unwrap();
        let (inv, w3, _) = to_inv(&square, &d_inv).unwrap();
        prop_assert_eq!(round_trip_check(&w3, &inv, &pt2), RoundTrip::Ok);
        let pt3 = w3.forward_apply(&pt2).unwrap();

        for (stage, image) in [(&shift, &pt1), (&square, &pt2), (&inv, &pt3)] {
            for (i, ann) in stage.annotations.iter().enumerate() {
                let ann = ann.as_ref().unwrap();
                let src: Vec<Rat> = ann
                    .sources
                    .iter()
                    .map(|name| s.point[s.instance.vars.lookup(name).unwrap()].clone())
                    .collect();
                prop_assert_eq!(ann.eval(&src).unwrap(), image[i].clone());
            }
        }
    }

    /// Certified ranges really contain the values the witness produces,
    /// for the whole lowered pipeline.
    #[test]
    fn certified_ranges_contain_forward_values(seed in 0u64..10_000) {
        let d_sm = rat(1, 1i64 << 20);
        let d_sh = &d_sm * rat_int(5);
        let s = planted_small(&d_sm, 2, 2, seed);
        let (shift, w, _) = to_shift(&s.instance, &d_sh).unwrap();
        let image = w.forward_apply(&s.point).unwrap();
        for (i, ann) in shift.annotations.iter().enumerate() {
            let iv = certified_range(ann.as_ref().unwrap(), &d_sm).unwrap();
            prop_assert!(iv.contains(&image[i]), "var {}", shift.vars.name(i));
            let declared = shift.intervals[i].as_ref().unwrap();
            prop_assert!(declared.lo <= iv.lo && iv.hi <= declared.hi);
        }
    }

}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    /// End-to-end pipeline: lowering a planted front-end instance to the
    /// inversion stage keeps the planted point as an exact solution.
    #[test]
    fn pipeline_preserves_planted_solutions(seed in 0u64..200) {
        let p = planted_etr(2, 2, seed);
        let out = lower(
            &p.instance,
            Fragment::Inv,
            Some(&rat(1, 8)),
            TowerMode::Test(5),
        )
        .unwrap();
        prop_assert_eq!(
            round_trip_check(&out.witness, &out.instance, &p.point),
            RoundTrip::Ok
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// The analytic range bound contains the sampled range, for arbitrary
    /// two-source annotations whose denominator cannot vanish.
    #[test]
    fn range_bound_contains_samples(
        num in proptest::array::uniform6(small_rat()),
        den_small in proptest::array::uniform5((-2i64..=2, 4i64..=8).prop_map(|(n, d)| rat(n, d))),
        b6 in 1i64..=3,
        dexp in 1u32..=8,
    ) {
        let mut den = zero6();
        den[..5].clone_from_slice(&den_small);
        den[5] = rat_int(b6);
        let delta = rat(1, 1i64 << dexp);
        let ann = VarAnnotation {
            sources: vec!["s".into(), "t".into()],
            num: num.clone(),
            den: den.clone(),
            nonneg_source: false,
            note: String::new(),
        };
        let sampled = empirical_range(&ann, &delta, 5).unwrap();
        let bound = bound_rational(&num, &den, &delta).unwrap();
        prop_assert!(bound.lo <= sampled.lo);
        prop_assert!(sampled.hi <= bound.hi);
    }
}

/// Ill-typed inputs are rejected, not mangled: every pass refuses an
/// instance of the wrong fragment.
#[test]
fn passes_reject_wrong_fragments() {
    let etr = planted_etr(2, 1, 0).instance;
    let ami = planted_ami(2, 2, 0).instance;
    assert!(to_conj(&ami).is_err());
    assert!(compactify(&etr, TowerMode::Test(3)).is_err());
    assert!(to_ami(&etr).is_err());
    assert!(to_small(&etr, &rat(1, 4), TowerMode::Test(3)).is_err());
    assert!(to_shift(&ami, &rat(1, 5)).is_err());
    assert!(to_square(&ami, &rat(1, 5)).is_err());
    assert!(to_inv(&ami, &rat(1, 7)).is_err());

    let mut not_etr = Instance::new(Fragment::Etr);
    not_etr.add_var("x");
    assert!(to_conj(&not_etr).is_err(), "missing formula is rejected");
}
