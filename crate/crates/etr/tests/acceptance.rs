//! Acceptance suite: one test per release criterion, each printing a
//! single pass line when it holds.  Everything here is exact rational
//! arithmetic; there are no tolerances.

use std::time::Instant;

use etr::formula::{zero6, Constraint, Fragment, Instance, VarAnnotation};
use etr::length::{formula_length, instance_length};
use etr::oracle::{empirical_range, planted_ami, planted_etr, planted_small};
use etr::passes::ami::to_ami;
use etr::passes::compact::{compactify, paper_height};
use etr::passes::conj::to_conj;
use etr::passes::inv::to_inv;
use etr::passes::pipeline::lower;
use etr::passes::shift::to_shift;
use etr::passes::small::to_small;
use etr::passes::square::to_square;
use etr::passes::TowerMode;
use etr::parser::parse_etr;
use etr::range::{bound_case_a, bound_rational, certify_instance, required_delta_case_b};
use etr::rational::{rat, rat_int, Rat};
use etr::validate::validate_fragment;
use etr::witness::{round_trip_check, RoundTrip, WitnessMap};
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pow2_delta(l: u32) -> Rat {
    rat(1, 1i64 << l)
}

/// The canonical test ladder: delta for the scaled stage and the three
/// interval stages derived from it with the exact required ratios.
fn delta_ladder() -> (Rat, Rat, Rat, Rat) {
    let sm = pow2_delta(20);
    let sh = &sm * rat_int(5);
    let sq = &sh * rat_int(10);
    let inv = &sq * rat_int(1800);
    (sm, sh, sq, inv)
}

/// A tiny scaled-stage instance with one constraint of each kind.
fn small_mixed(delta: &Rat) -> (Instance, Vec<Rat>) {
    let mut inst = Instance::new(Fragment::Small);
    inst.delta = Some(delta.clone());
    let x = inst.add_var("x");
    let y = inst.add_var("y");
    let z = inst.add_var("z");
    let w = inst.add_var("w");
    let d = inst.add_var("d");
    inst.constraints = vec![
        Constraint::PlusEq(x, y, z),
        Constraint::TimesEq(x, y, w),
        Constraint::GeqZero(x),
        Constraint::EqDelta(d),
    ];
    let half = delta / rat_int(2);
    let point = vec![
        half.clone(),
        half.clone(),
        delta.clone(),
        &half * &half,
        delta.clone(),
    ];
    (inst, point)
}

#[test]
fn criterion_01_fragment_soundness() {
    let started = Instant::now();

    // 500 random front-end formulas of at most 40 tokens each compile to
    // clean conjunctive instances.
    let mut accepted = 0;
    let mut seed = 0u64;
    while accepted < 500 {
        assert!(seed < 50_000, "generator cannot hit 500 small formulas");
        let p = planted_etr(2, 1, seed);
        seed += 1;
        let f = p.instance.formula.as_ref().unwrap();
        if formula_length(f) > 40 {
            continue;
        }
        let (out, _, _) = to_conj(&p.instance).unwrap();
        assert_eq!(out.fragment, Fragment::Conj);
        assert!(validate_fragment(&out).is_empty(), "seed {}", seed - 1);
        accepted += 1;
    }

    // 100 planted inputs per downstream pass; every output passes its own
    // fragment validator.
    let (d_sm, d_sh, d_sq, d_inv) = delta_ladder();
    for seed in 0..100u64 {
        let p = planted_etr(3, 2, seed);
        let (conj, _, _) = to_conj(&p.instance).unwrap();
        let (compact, _, _) = compactify(&conj, TowerMode::Test(3)).unwrap();
        assert!(validate_fragment(&compact).is_empty(), "compact {seed}");
        let (ami, _, _) = to_ami(&conj).unwrap();
        assert!(validate_fragment(&ami).is_empty(), "ami {seed}");

        let a = planted_ami(3, 4, seed);
        let (small, _, _) = to_small(&a.instance, &rat(1, 4), TowerMode::Test(4)).unwrap();
        assert!(validate_fragment(&small).is_empty(), "small {seed}");

        let s = planted_small(&d_sm, 3, 3, seed);
        let (shift, _, _) = to_shift(&s.instance, &d_sh).unwrap();
        assert!(validate_fragment(&shift).is_empty(), "shift {seed}");
        let (square, _, _) = to_square(&shift, &d_sq).unwrap();
        assert!(validate_fragment(&square).is_empty(), "square {seed}");
        let (inv, _, _) = to_inv(&square, &d_inv).unwrap();
        assert!(validate_fragment(&inv).is_empty(), "inv {seed}");
    }

    assert!(started.elapsed().as_secs() < 60, "{:?}", started.elapsed());
    println!("criterion 1 (fragment soundness): pass");
}

#[test]
fn criterion_02_witness_round_trip() {
    let (d_sm, d_sh, d_sq, d_inv) = delta_ladder();
    let ok = |r: RoundTrip, what: &str, seed: u64| {
        assert_eq!(r, RoundTrip::Ok, "{what} seed {seed}");
    };
    for seed in 0..100u64 {
        // Front end to conjunctive, then on to the three-atom stage.
        let p = planted_etr(3, 2, seed);
        let (conj, w1, _) = to_conj(&p.instance).unwrap();
        ok(round_trip_check(&w1, &conj, &p.point), "conj", seed);
        let conj_pt = w1.forward_apply(&p.point).unwrap();
        let (ami, w2, _) = to_ami(&conj).unwrap();
        ok(round_trip_check(&w2, &ami, &conj_pt), "ami", seed);

        // Scaling.
        let a = planted_ami(3, 4, seed);
        let (small, w3, _) = to_small(&a.instance, &rat(1, 4), TowerMode::Test(5)).unwrap();
        ok(round_trip_check(&w3, &small, &a.point), "small", seed);

        // The three interval stages, chained from one planted scaled input.
        let s = planted_small(&d_sm, 3, 3, seed);
        let (shift, w4, _) = to_shift(&s.instance, &d_sh).unwrap();
        ok(round_trip_check(&w4, &shift, &s.point), "shift", seed);
        let shift_pt = w4.forward_apply(&s.point).unwrap();
        let (square, w5, _) = to_square(&shift, &d_sq).unwrap();
        ok(round_trip_check(&w5, &square, &shift_pt), "square", seed);
        let square_pt = w5.forward_apply(&shift_pt).unwrap();
        let (inv, w6, _) = to_inv(&square, &d_inv).unwrap();
        ok(round_trip_check(&w6, &inv, &square_pt), "inv", seed);
    }
    println!("criterion 2 (witness round-trip): pass");
}

/// The backward map must be, structurally, a projection followed by a
/// coordinatewise affine map: well-formed index list plus dyadic
/// scale/offset vectors of matching length.
fn assert_affine(w: &WitnessMap, n_out_vars: usize, n_in_vars: usize, what: &str) {
    let b = &w.backward;
    assert_eq!(b.n_in, n_out_vars, "{what}: backward domain");
    assert_eq!(b.proj.len(), n_in_vars, "{what}: backward range");
    assert_eq!(b.scale.len(), b.proj.len(), "{what}: scale length");
    assert_eq!(b.offset.len(), b.proj.len(), "{what}: offset length");
    for &i in &b.proj {
        assert!(i < b.n_in, "{what}: projection index out of range");
    }
}

#[test]
fn criterion_03_backward_maps_are_affine_projections() {
    let (d_sm, d_sh, d_sq, d_inv) = delta_ladder();
    for seed in 0..20u64 {
        let p = planted_etr(3, 2, seed);
        let n0 = p.instance.n_vars();
        let (conj, w1, _) = to_conj(&p.instance).unwrap();
        assert_affine(&w1, conj.n_vars(), n0, "conj");
        let (compact, w2, _) = compactify(&conj, TowerMode::Test(3)).unwrap();
        assert_affine(&w2, compact.n_vars(), conj.n_vars(), "compact");
        let (ami, w3, _) = to_ami(&conj).unwrap();
        assert_affine(&w3, ami.n_vars(), conj.n_vars(), "ami");

        let a = planted_ami(3, 4, seed);
        let (small, w4, _) = to_small(&a.instance, &rat(1, 4), TowerMode::Test(4)).unwrap();
        assert_affine(&w4, small.n_vars(), a.instance.n_vars(), "small");

        let s = planted_small(&d_sm, 3, 3, seed);
        let (shift, w5, _) = to_shift(&s.instance, &d_sh).unwrap();
        assert_affine(&w5, shift.n_vars(), s.instance.n_vars(), "shift");
        let (square, w6, _) = to_square(&shift, &d_sq).unwrap();
        assert_affine(&w6, square.n_vars(), shift.n_vars(), "square");
        let (inv, w7, _) = to_inv(&square, &d_inv).unwrap();
        assert_affine(&w7, inv.n_vars(), square.n_vars(), "inv");
    }

    // Composed pipeline witnesses stay in the same shape.
    let p = planted_etr(3, 2, 7);
    let out = lower(
        &p.instance,
        Fragment::Inv,
        Some(&rat(1, 8)),
        TowerMode::Test(5),
    )
    .unwrap();
    assert_affine(
        &out.witness,
        out.instance.n_vars(),
        p.instance.n_vars(),
        "pipeline",
    );
    println!("criterion 3 (backward maps are affine projections): pass");
}

#[test]
fn criterion_04_output_size_is_linear() {
    // Geometric ladder of input sizes; the per-pass length ratio must stay
    // under a frozen constant and must not grow past the smallest size.
    let targets: [u64; 5] = [16, 64, 256, 1024, 4096];

    let check = |what: &str, cap: f64, pairs: &[(u64, u64)]| {
        let ratios: Vec<f64> = pairs
            .iter()
            .map(|&(i, o)| o as f64 / i as f64)
            .collect();
        for (k, r) in ratios.iter().enumerate() {
            assert!(*r <= cap, "{what}: ratio {r} at rung {k} exceeds {cap}");
            if k >= 1 {
                assert!(
                    *r <= ratios[0],
                    "{what}: ratio grew past the smallest size ({ratios:?})"
                );
            }
        }
    };

    // Front end: replicate one fixed clause block, so the constraint mix
    // is identical at every rung and only the scale changes.
    let base = planted_etr(3, 2, 11);
    let base_f = base.instance.formula.clone().unwrap();
    let grow_etr = |t: u64| -> Instance {
        let mut inst = base.instance.clone();
        let mut parts = vec![base_f.clone()];
        loop {
            inst.formula = Some(etr::formula::FormulaNode::Conj(parts.clone()));
            if instance_length(&inst) >= t {
                return inst;
            }
            parts.push(base_f.clone());
        }
    };
    let mut conj_pairs = Vec::new();
    let mut ami_pairs = Vec::new();
    for &t in &targets {
        let inst = grow_etr(t);
        let (conj, _, r1) = to_conj(&inst).unwrap();
        conj_pairs.push((r1.input_length, r1.output_length));
        let (_, _, r2) = to_ami(&conj).unwrap();
        ami_pairs.push((r2.input_length, r2.output_length));
    }
    check("conj", 2.0, &conj_pairs);
    check("ami", 5.0, &ami_pairs);

    // Scaling: same idea at the structured stages, replicating the
    // constraint list over a fixed variable set; the fixed-height tower
    // overhead then amortizes away.
    let grow = |base: &Instance, t: u64| -> Instance {
        let mut inst = base.clone();
        while instance_length(&inst) < t {
            inst.constraints.extend(base.constraints.iter().cloned());
        }
        inst
    };
    let ami_base = planted_ami(3, 4, 11).instance;
    let mut small_pairs = Vec::new();
    for &t in &targets {
        let a = grow(&ami_base, t);
        let (_, _, r) = to_small(&a, &rat(1, 4), TowerMode::Test(4)).unwrap();
        small_pairs.push((r.input_length, r.output_length));
    }
    check("small", 5.0, &small_pairs);

    // Interval stages.  The shifting pass is linear in |input| + l where
    // the scale is 2^-l, so its ratio is measured against that sum.
    let (d_sm, d_sh, d_sq, d_inv) = delta_ladder();
    let l = 20u64;
    // Each stage gets a ladder over its own input with a fixed mix: a
    // minimal instance of the stage's input fragment, replicated.
    let small_base = planted_small(&d_sm, 2, 2, 11).instance;
    let (shift_base, _, _) = to_shift(&small_base, &d_sh).unwrap();
    let (square_base, _, _) = to_square(&shift_base, &d_sq).unwrap();
    let mut shift_pairs = Vec::new();
    let mut square_pairs = Vec::new();
    let mut inv_pairs = Vec::new();
    for &t in &targets {
        let (_, _, r) = to_shift(&grow(&small_base, t), &d_sh).unwrap();
        shift_pairs.push((r.input_length + l, r.output_length));
        let (_, _, r) = to_square(&grow(&shift_base, t), &d_sq).unwrap();
        square_pairs.push((r.input_length, r.output_length));
        let (_, _, r) = to_inv(&grow(&square_base, t), &d_inv).unwrap();
        inv_pairs.push((r.input_length, r.output_length));
    }
    check("shift", 8.0, &shift_pairs);
    check("square", 2.0, &square_pairs);
    check("inv", 2.5, &inv_pairs);

    println!("criterion 4 (output size is linear per pass): pass");
}

#[test]
fn criterion_05_certified_bounds_contain_empirical_ranges() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let deltas = [rat(1, 4), rat(1, 16), rat(1, 256)];
    let coeff = |rng: &mut ChaCha8Rng, span: i64, den: i64| -> Rat {
        rat(rng.gen_range(-span..=span), den)
    };
    for case in 0..200 {
        // Numerator: anything smallish.  Denominator: constant term at
        // least 1 and the rest small enough that it cannot vanish on the
        // box for any delta used here.
        let mut num = zero6();
        for slot in num.iter_mut() {
            let den = [1, 2, 4][rng.gen_range(0..3)];
            *slot = coeff(&mut rng, 6, den);
        }
        let mut den = zero6();
        for slot in den.iter_mut().take(5) {
            *slot = coeff(&mut rng, 2, 8);
        }
        den[5] = rat_int(rng.gen_range(1..=3));
        let ann = VarAnnotation {
            sources: vec!["s".into(), "t".into()],
            num: num.clone(),
            den: den.clone(),
            nonneg_source: false,
            note: String::new(),
        };

        for delta in &deltas {
            let got = empirical_range(&ann, delta, 8).unwrap();
            let want = bound_rational(&num, &den, delta).unwrap();
            assert!(
                want.lo <= got.lo && got.hi <= want.hi,
                "case {case} delta {delta}: {got:?} not within {want:?}"
            );

            // Trivial-denominator specialization: the simpler bound with a
            // single coefficient cap contains the rational bound.
            let mut trivial = zero6();
            trivial[5] = Rat::one();
            let c = num
                .iter()
                .take(5)
                .map(|a| a.abs())
                .max()
                .unwrap()
                .max(Rat::one());
            let simple = bound_case_a(&num, &c, delta).unwrap();
            let tight = bound_rational(&num, &trivial, delta).unwrap();
            assert!(
                simple.lo <= tight.lo && tight.hi <= simple.hi,
                "case {case}: polynomial bound escapes the coefficient cap"
            );
        }

        // Inverted reading: the scale that the threshold formula prescribes
        // for a wanted radius really does confine the bound to that radius
        // around the center.
        let eps = deltas[rng.gen_range(0..3)].clone();
        let a6 = num[5].abs();
        let b6 = den[5].clone();
        let c = num
            .iter()
            .take(5)
            .chain(den.iter().take(5))
            .map(|a| a.abs())
            .max()
            .unwrap()
            .max(Rat::one());
        let mut num_b = num.clone();
        num_b[5] = a6.clone();
        let dstar = required_delta_case_b(&eps, &c, &a6, &b6).unwrap();
        if dstar <= Rat::one() {
            let bounded = bound_rational(&num_b, &den, &dstar).unwrap();
            let center = &a6 / &b6;
            assert!(
                &center - &eps <= bounded.lo && bounded.hi <= &center + &eps,
                "case {case}: threshold scale misses the radius"
            );
        }
    }
    assert!(started.elapsed().as_secs() < 30, "{:?}", started.elapsed());
    println!("criterion 5 (certified bounds contain empirical ranges): pass");
}

#[test]
fn criterion_06_scale_ratio_constants() {
    let d1 = pow2_delta(8);
    let (sm, _) = small_mixed(&d1);

    // Shifting admits any target scale at least five times the input scale
    // (and under 1/4), and rejects anything smaller.
    assert!(to_shift(&sm, &(&d1 * rat_int(5))).is_ok());
    assert!(to_shift(&sm, &rat(1, 5)).is_ok());
    assert!(to_shift(&sm, &(&d1 * rat_int(4))).is_err());

    // Squaring demands exactly a factor of ten.
    let (shift, _, _) = to_shift(&sm, &(&d1 * rat_int(5))).unwrap();
    assert!(to_square(&shift, &(&d1 * rat_int(50))).is_ok());
    assert!(to_square(&shift, &(&d1 * rat_int(45))).is_err());
    assert!(to_square(&shift, &(&d1 * rat_int(55))).is_err());

    // Inversion demands exactly a factor of eighteen hundred, and that
    // constant is itself re-derived from the threshold formula: radius
    // eps, coefficient cap 15, and a center with numerator mass 24 give
    // eps * 1 / (5 * 15 * 24) = eps / 1800.
    let (d_sm, d_sh, d_sq, d_inv) = delta_ladder();
    let s = planted_small(&d_sm, 2, 2, 1);
    let (sh, _, _) = to_shift(&s.instance, &d_sh).unwrap();
    let (sq, _, _) = to_square(&sh, &d_sq).unwrap();
    assert!(to_inv(&sq, &d_inv).is_ok());
    assert!(to_inv(&sq, &(&d_sq * rat_int(1799))).is_err());
    for eps in [rat(1, 8), rat(1, 100)] {
        let a6 = rat_int(23) - &eps; // a6 + (1 + eps) * b6 == 24
        let got = required_delta_case_b(&eps, &rat_int(15), &a6, &Rat::one()).unwrap();
        assert_eq!(got, &eps / rat_int(1800));
    }
    println!("criterion 6 (scale ratio constants): pass");
}

#[test]
fn criterion_07_gadget_polynomial_identities() {
    // The multiplication gadget's head variable carries, symbolically,
    // the polynomial xy + x + y + 1 over the two sources.
    let mut inst = Instance::new(Fragment::Small);
    inst.delta = Some(pow2_delta(20));
    let x = inst.add_var("x");
    let y = inst.add_var("y");
    let z = inst.add_var("z");
    inst.constraints = vec![Constraint::TimesEq(x, y, z)];
    let (d_sm, d_sh, d_sq, d_inv) = delta_ladder();
    assert_eq!(d_sm, pow2_delta(20));
    let (shift, _, _) = to_shift(&inst, &d_sh).unwrap();
    let head = shift.vars.lookup("[xy+x+y+1]").unwrap();
    let ann = shift.annotations[head].as_ref().unwrap();
    assert_eq!(ann.sources, vec!["x".to_string(), "y".to_string()]);
    // Slots are [s^2, s*t, t^2, s, t, 1].
    let xy_poly = [
        Rat::zero(),
        Rat::one(),
        Rat::zero(),
        Rat::one(),
        Rat::one(),
        Rat::one(),
    ];
    assert_eq!(ann.num, xy_poly);
    let mut trivial = zero6();
    trivial[5] = Rat::one();
    assert_eq!(ann.den, trivial);

    // With both operands equal, the same head is the exact square
    // polynomial x^2 + 2x + 1, and it survives the squaring and inversion
    // stages unchanged (the inversion-stage gadget is checked symbolically
    // against it during construction).
    let mut inst2 = Instance::new(Fragment::Small);
    inst2.delta = Some(pow2_delta(20));
    let x = inst2.add_var("x");
    let w = inst2.add_var("w");
    inst2.constraints = vec![Constraint::TimesEq(x, x, w)];
    let (sh2, _, _) = to_shift(&inst2, &d_sh).unwrap();
    let (sq2, _, _) = to_square(&sh2, &d_sq).unwrap();
    let (inv2, _, _) = to_inv(&sq2, &d_inv).unwrap();
    let square_poly = [
        Rat::one(),
        Rat::zero(),
        Rat::zero(),
        rat_int(2),
        Rat::zero(),
        Rat::one(),
    ];
    for stage in [&sh2, &sq2, &inv2] {
        let head = stage.vars.lookup("[xx+x+x+1]").unwrap();
        let ann = stage.annotations[head].as_ref().unwrap();
        assert_eq!(ann.den, trivial, "denominator must stay trivial");
        if ann.sources == vec!["x".to_string()] {
            assert_eq!(ann.num, square_poly);
        } else {
            assert_eq!(ann.sources, vec!["x".to_string(), "x".to_string()]);
            assert_eq!(ann.num, xy_poly);
        }
    }
    println!("criterion 7 (gadget polynomial identities): pass");
}

#[test]
fn criterion_08_interval_stages_fully_certify() {
    let (f, vars) = parse_etr("x + y = z /\\ x >= 0").unwrap();
    let mut inst = Instance::new(Fragment::Etr);
    inst.vars = vars;
    inst.formula = Some(f);

    let run = |target: Fragment, delta: Rat| {
        let out = lower(&inst, target, Some(&delta), TowerMode::Test(4)).unwrap();
        let report = certify_instance(&out.instance).unwrap();
        assert!(report.ok, "{target:?} at {delta}: {report:?}");
        for v in &report.vars {
            assert!(v.ok, "{target:?}: variable {} fails", v.name);
        }
    };
    run(Fragment::Shift, rat(1, 8));
    run(Fragment::Square, rat(1, 8));
    run(Fragment::Inv, rat(1, 8));
    run(Fragment::Inv, rat(1, 7));
    println!("criterion 8 (interval stages fully certify): pass");
}

#[test]
fn criterion_09_tower_constructions() {
    // Height-3 test tower: the chain top really evaluates to 2^(2^3).
    let p = planted_etr(2, 1, 3);
    let (conj, w1, _) = to_conj(&p.instance).unwrap();
    let conj_pt = w1.forward_apply(&p.point).unwrap();
    let (compact, w2, r) = compactify(&conj, TowerMode::Test(3)).unwrap();
    assert_eq!(r.tower_height, Some(3));
    let image = w2.forward_apply(&conj_pt).unwrap();
    let top = compact.vars.lookup("[2^2^3]").unwrap();
    assert_eq!(image[top], rat_int(256));

    // Height-2 scaling tower: the emitted scale is delta / 2^(2^2).
    let a = planted_ami(2, 2, 3);
    let delta = rat(1, 4);
    let (small, w3, _) = to_small(&a.instance, &delta, TowerMode::Test(2)).unwrap();
    let image = w3.forward_apply(&a.point).unwrap();
    let eps = small.vars.lookup("[e]").unwrap();
    assert_eq!(image[eps], &delta / rat_int(16));

    // Size-derived heights match the hand-computed ceil(8 n log2 L).
    assert_eq!(paper_height(4, 1), 16);
    assert_eq!(paper_height(16, 2), 64);
    assert_eq!(paper_height(256, 3), 192);

    // Size-derived towers have exactly the promised shape even though
    // their constants are never materialized: k+1 chain constraints for
    // the bounding pass and L+6 chain constants for the scaling pass.
    let (exact, _, r) = compactify(&conj, TowerMode::PaperExact).unwrap();
    let k = paper_height(instance_length(&conj), conj.n_vars());
    assert_eq!(r.tower_height, Some(k));
    let chain_vars = exact
        .vars
        .names()
        .iter()
        .filter(|n| n.starts_with("[2^2^") && !n.contains('-'))
        .count() as u64;
    assert_eq!(chain_vars, k + 1);
    assert_eq!(
        exact.constraints.len() as u64,
        conj.constraints.len() as u64 + (k + 1) + 4 * conj.n_vars() as u64
    );

    let (exact_small, _, _) =
        to_small(&a.instance, &delta, TowerMode::PaperExact).unwrap();
    let l = instance_length(&a.instance);
    let scale_chain = exact_small
        .vars
        .names()
        .iter()
        .filter(|n| n.starts_with("[d*2^-2^"))
        .count() as u64;
    assert_eq!(scale_chain, l + 6);

    println!("criterion 9 (tower constructions): pass");
}

#[test]
fn criterion_10_torus_end_to_end() {
    let started = Instant::now();
    let text = "(x^2 + y^2 + z^2 + 24)^2 = 100 * (x^2 + y^2)";
    let (f, vars) = parse_etr(text).unwrap();
    assert_eq!(vars.names(), ["x", "y", "z"]);
    let mut inst = Instance::new(Fragment::Etr);
    inst.vars = vars;
    inst.formula = Some(f);

    let out = lower(&inst, Fragment::Inv, Some(&rat(1, 8)), TowerMode::Test(5)).unwrap();
    assert_eq!(out.instance.fragment, Fragment::Inv);
    assert!(validate_fragment(&out.instance).is_empty());

    // (6, 0, 0) lies on the torus; its forward image must satisfy every
    // output constraint exactly.
    let point = vec![rat_int(6), Rat::zero(), Rat::zero()];
    assert!(inst.check_point(&point).unwrap());
    let image = out.witness.forward_apply(&point).unwrap();
    assert!(out.instance.check_point(&image).unwrap());
    assert_eq!(
        round_trip_check(&out.witness, &out.instance, &point),
        RoundTrip::Ok
    );

    // A point off the surface must not slip through.
    let off = vec![rat_int(6), Rat::zero(), Rat::one()];
    assert!(!inst.check_point(&off).unwrap());

    assert!(started.elapsed().as_secs() < 10, "{:?}", started.elapsed());
    println!("criterion 10 (end-to-end torus lowering): pass");
}
