//! Squaring pass: multiplications between near-1 variables are replaced by
//! squarings via the polarization identity
//!
//! ```text
//! a * b = ((a + b) / 2)^2 - a^2 / 2 - b^2 / 2
//! ```
//!
//! Halving is expressed additively (h + h = t), so each general
//! multiplication becomes three squarings plus a ladder of additions between
//! the halved squares. Multiplications that already have a squaring shape
//! (a * a = c, or a pin against a constant-1 variable) are rewritten
//! directly.
//!
//! The pass re-derives the closed form of every fresh variable from the
//! operand forms, checks the polarization identity symbolically on those
//! forms, and certifies that each fresh interval really contains the range
//! of its closed form.

use std::time::Instant;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::formula::{Constraint, Fragment, Instance, Interval, VarAnnotation};
use crate::length::instance_length;
use crate::poly::Polynomial;
use crate::rational::{rat, rat_int, Dyadic, Rat};
use crate::validate::validate_fragment;
use crate::witness::{AffineProjection, ForwardComponent, RationalMap, WitnessMap};

use super::annot::{ann_add, ann_add_const, ann_center, ann_equivalent, ann_mul, ann_scale};
use super::{add_unique_var, PassReport};

pub fn to_square(input: &Instance, delta2: &Rat) -> Result<(Instance, WitnessMap, PassReport)> {
    let started = Instant::now();
    if input.fragment != Fragment::Shift {
        return Err(Error::Fragment(format!(
            "squaring expects a shifted instance, got {}",
            input.fragment
        )));
    }
    if let Some(v) = validate_fragment(input).first() {
        return Err(Error::Fragment(v.what.clone()));
    }
    let delta1 = input
        .delta
        .clone()
        .ok_or_else(|| Error::Param("input instance has no delta".into()))?;
    if &delta1 * rat_int(10) != *delta2 {
        return Err(Error::Param(
            "output delta must be exactly 10 times the input delta".into(),
        ));
    }
    if *delta2 >= rat(1, 4) {
        return Err(Error::Param("output delta must be below 1/4".into()));
    }
    let input_length = instance_length(input);
    let n = input.n_vars();

    let mut b = Builder {
        out: Instance::new(Fragment::Square),
        comps: Vec::new(),
        delta2: delta2.clone(),
    };
    b.out.delta = Some(delta2.clone());
    b.out.ann_source_delta = input.ann_source_delta.clone();

    // Everything carries over verbatim; the backward map is the projection
    // onto this prefix.
    for (i, name) in input.vars.names().to_vec().iter().enumerate() {
        let ann = input.annotations[i]
            .clone()
            .ok_or_else(|| Error::MissingAnnotation(name.clone()))?;
        b.add(name, ann, Polynomial::var(i), input.intervals[i].clone());
    }

    // A pinned 1 and a pinned 1/2 for the halving ladders.
    let k1 = b.constant("[1]", Rat::one());
    b.out.constraints.push(Constraint::SquareEq(k1, k1));
    let k12 = b.constant("[1/2]", rat(1, 2));
    b.out.constraints.push(Constraint::PlusEq(k12, k12, k1));

    for c in &input.constraints {
        match *c {
            Constraint::PlusEq(x, y, z) => {
                b.out.constraints.push(Constraint::PlusEq(x, y, z));
            }
            Constraint::TimesEq(x, y, z) if x == y => {
                // a * a = c is a squaring already (a * a = a pins a to 1).
                b.out.constraints.push(Constraint::SquareEq(x, z));
            }
            Constraint::TimesEq(x, y, z) if (y == z || x == z) && {
                let pinned = if y == z { y } else { x };
                is_constant_one(&input.annotations[pinned])
            } =>
            {
                // a * 1 = 1 forces a = 1; so does a^2 = 1 on the positive
                // side of the interval.
                let other = if y == z { x } else { y };
                b.out.constraints.push(Constraint::SquareEq(other, z));
            }
            Constraint::TimesEq(x, y, z) => b.multiplication(input, x, y, z)?,
            ref other => {
                return Err(Error::Fragment(format!("unexpected constraint {other:?}")))
            }
        }
    }

    certify_fresh(&b.out, n)?;

    let Builder { out, comps, .. } = b;
    let witness = WitnessMap {
        stage: "square".to_string(),
        equisat_only: false,
        forward: RationalMap {
            n_in: n,
            components: comps,
        },
        backward: AffineProjection {
            n_in: out.n_vars(),
            proj: (0..n).collect(),
            scale: vec![Dyadic::one(); n],
            offset: vec![Dyadic::from_rat(Rat::zero()); n],
        },
    };
    let report = PassReport::new("square", input_length, n, &out, None, started);
    Ok((out, witness, report))
}

fn is_constant_one(ann: &Option<VarAnnotation>) -> bool {
    match ann {
        Some(a) => {
            a.has_trivial_den()
                && a.num[5].is_one()
                && a.num[..5].iter().all(Rat::is_zero)
        }
        None => false,
    }
}

struct Builder {
    out: Instance,
    comps: Vec<ForwardComponent>,
    delta2: Rat,
}

impl Builder {
    fn add(
        &mut self,
        base: &str,
        ann: VarAnnotation,
        fwd: Polynomial,
        interval: Option<Interval>,
    ) -> usize {
        let iv = interval.unwrap_or_else(|| {
            let c = &ann.num[5] / &ann.den[5];
            let lo = &c - &self.delta2;
            let hi = &c + &self.delta2;
            Interval::new(lo.max(rat(1, 2)), hi.min(rat_int(2)))
        });
        let v = add_unique_var(&mut self.out, base);
        self.out.intervals[v] = Some(iv);
        self.out.annotations[v] = Some(ann);
        self.comps.push(ForwardComponent::poly(fwd));
        v
    }

    fn constant(&mut self, base: &str, c: Rat) -> usize {
        self.add(
            base,
            VarAnnotation::constant(c.clone(), base),
            Polynomial::constant(c),
            None,
        )
    }

    /// "h holds half of t": h + h = t.
    fn half(
        &mut self,
        base: &str,
        t_ann: &VarAnnotation,
        t_fwd: &Polynomial,
        t: usize,
    ) -> (usize, VarAnnotation, Polynomial) {
        let ann = ann_scale(t_ann, &rat(1, 2));
        let fwd = t_fwd.scale(&rat(1, 2));
        let h = self.add(base, ann.clone(), fwd.clone(), None);
        self.out.constraints.push(Constraint::PlusEq(h, h, t));
        (h, ann, fwd)
    }

    fn multiplication(&mut self, input: &Instance, x: usize, y: usize, z: usize) -> Result<()> {
        let k12 = self.out.vars.lookup("[1/2]").unwrap();
        let nx = input.vars.name(x).to_string();
        let ny = input.vars.name(y).to_string();
        let nz = input.vars.name(z).to_string();
        let ann_of = |v: usize| -> Result<VarAnnotation> {
            input.annotations[v]
                .clone()
                .ok_or_else(|| Error::MissingAnnotation(input.vars.name(v).to_string()))
        };
        let (ann_x, ann_y, ann_z) = (ann_of(x)?, ann_of(y)?, ann_of(z)?);
        for (v, ann) in [(x, &ann_x), (y, &ann_y)] {
            let linear = ann.num[..3].iter().all(Rat::is_zero);
            if !linear || !ann.has_trivial_den() || ann_center(ann)? != Rat::one() {
                return Err(Error::Fragment(format!(
                    "multiplicand {} is not in shifted normal form",
                    input.vars.name(v)
                )));
            }
        }
        let (px, py, pz) = (Polynomial::var(x), Polynomial::var(y), Polynomial::var(z));

        // Mean of the operands, via halves: u = (x + y) / 2.
        let ann_p1 = ann_add_const(&ann_x, &rat(1, 2));
        let fwd_p1 = px.shift(&rat(1, 2));
        let p1 = self.add(&format!("[{nx}+1/2]"), ann_p1.clone(), fwd_p1.clone(), None);
        self.out.constraints.push(Constraint::PlusEq(x, k12, p1));
        let (p2, ann_p2, fwd_p2) = self.half(&format!("[{nx}/2+1/4]"), &ann_p1, &fwd_p1, p1);
        let ann_q1 = ann_add_const(&ann_y, &rat(1, 2));
        let fwd_q1 = py.shift(&rat(1, 2));
        let q1 = self.add(&format!("[{ny}+1/2]"), ann_q1.clone(), fwd_q1.clone(), None);
        self.out.constraints.push(Constraint::PlusEq(y, k12, q1));
        let (q2, ann_q2, fwd_q2) = self.half(&format!("[{ny}/2+1/4]"), &ann_q1, &fwd_q1, q1);
        let ann_r1 = ann_add(&ann_p2, &ann_q2)?;
        let fwd_r1 = fwd_p2.add(&fwd_q2);
        let r1 = self.add(&format!("[({nx}+{ny})/2+1/2]"), ann_r1.clone(), fwd_r1.clone(), None);
        self.out.constraints.push(Constraint::PlusEq(p2, q2, r1));
        let ann_u = ann_add_const(&ann_r1, &rat(-1, 2));
        let fwd_u = fwd_r1.shift(&rat(-1, 2));
        let u = self.add(&format!("[({nx}+{ny})/2]"), ann_u.clone(), fwd_u.clone(), None);
        self.out.constraints.push(Constraint::PlusEq(u, k12, r1));

        // The three squares.
        let ann_uu = ann_mul(&ann_u, &ann_u)?;
        let fwd_uu = fwd_u.mul(&fwd_u);
        let uu = self.add(&format!("[(({nx}+{ny})/2)^2]"), ann_uu.clone(), fwd_uu.clone(), None);
        self.out.constraints.push(Constraint::SquareEq(u, uu));
        let ann_aa = ann_mul(&ann_x, &ann_x)?;
        let fwd_aa = px.mul(&px);
        let aa = self.add(&format!("[{nx}^2]"), ann_aa.clone(), fwd_aa.clone(), None);
        self.out.constraints.push(Constraint::SquareEq(x, aa));
        let ann_bb = ann_mul(&ann_y, &ann_y)?;
        let fwd_bb = py.mul(&py);
        let bb = self.add(&format!("[{ny}^2]"), ann_bb.clone(), fwd_bb.clone(), None);
        self.out.constraints.push(Constraint::SquareEq(y, bb));

        // hw = (x^2 + y^2 + 1) / 4 through halves.
        let ann_t1 = ann_add_const(&ann_aa, &rat(1, 2));
        let fwd_t1 = fwd_aa.shift(&rat(1, 2));
        let t1 = self.add(&format!("[{nx}^2+1/2]"), ann_t1.clone(), fwd_t1.clone(), None);
        self.out.constraints.push(Constraint::PlusEq(aa, k12, t1));
        let (ha, ann_ha, fwd_ha) = self.half(&format!("[{nx}^2/2+1/4]"), &ann_t1, &fwd_t1, t1);
        let ann_t2 = ann_add_const(&ann_bb, &rat(1, 2));
        let fwd_t2 = fwd_bb.shift(&rat(1, 2));
        let t2 = self.add(&format!("[{ny}^2+1/2]"), ann_t2.clone(), fwd_t2.clone(), None);
        self.out.constraints.push(Constraint::PlusEq(bb, k12, t2));
        let (hb, ann_hb, fwd_hb) = self.half(&format!("[{ny}^2/2+1/4]"), &ann_t2, &fwd_t2, t2);
        let ann_s1 = ann_add(&ann_ha, &ann_hb)?;
        let fwd_s1 = fwd_ha.add(&fwd_hb);
        let s1 = self.add(
            &format!("[({nx}^2+{ny}^2)/2+1/2]"),
            ann_s1.clone(),
            fwd_s1.clone(),
            None,
        );
        self.out.constraints.push(Constraint::PlusEq(ha, hb, s1));
        let (hw, ann_hw, _) =
            self.half(&format!("[({nx}^2+{ny}^2)/4+1/4]"), &ann_s1, &fwd_s1, s1);

        // hc = (z + 1/2) / 2, and the identity hc + hw = u^2 + 1/2.
        let ann_t3 = ann_add_const(&ann_z, &rat(1, 2));
        let fwd_t3 = pz.shift(&rat(1, 2));
        let t3 = self.add(&format!("[{nz}+1/2]"), ann_t3.clone(), fwd_t3.clone(), None);
        self.out.constraints.push(Constraint::PlusEq(z, k12, t3));
        let (hc, ann_hc, _) = self.half(&format!("[{nz}/2+1/4]"), &ann_t3, &fwd_t3, t3);
        let ann_v1 = ann_add_const(&ann_uu, &rat(1, 2));
        let fwd_v1 = fwd_uu.shift(&rat(1, 2));
        let v1 = self.add(
            &format!("[(({nx}+{ny})/2)^2+1/2]"),
            ann_v1.clone(),
            fwd_v1,
            None,
        );
        self.out.constraints.push(Constraint::PlusEq(uu, k12, v1));
        self.out.constraints.push(Constraint::PlusEq(hc, hw, v1));

        // The closed forms of the two sides of the final addition must agree
        // identically; this is exactly the statement that the block encodes
        // z = x * y and nothing else.
        let lhs = ann_add(&ann_hc, &ann_hw)?;
        if !ann_equivalent(&lhs, &ann_v1) {
            return Err(Error::GadgetCertification(format!(
                "polarization identity does not close for {nx} * {ny} = {nz}"
            )));
        }
        Ok(())
    }
}

/// Every freshly created variable (index >= n_carried) must have a center in
/// {3/4, 1, 3/2}, normalized coefficients in [0, 2], and a certified range
/// inside its declared interval.
fn certify_fresh(out: &Instance, n_carried: usize) -> Result<()> {
    let report = crate::range::certify_instance(out)?;
    for (v, cert) in report.vars.iter().enumerate() {
        if v < n_carried {
            continue;
        }
        let ann = out.annotations[v].as_ref().unwrap();
        let center = ann_center(ann)?;
        if center != rat(3, 4) && !center.is_one() && center != rat(3, 2) && center != rat(1, 2) {
            return Err(Error::GadgetCertification(format!(
                "variable {} has off-grid center {}",
                cert.name,
                crate::rational::format_rat(&center)
            )));
        }
        for c in ann.num.iter().chain(ann.den.iter()) {
            if c.is_negative() || *c > rat_int(2) {
                return Err(Error::GadgetCertification(format!(
                    "variable {} has a coefficient outside [0, 2]",
                    cert.name
                )));
            }
        }
        if !cert.ok {
            return Err(Error::GadgetCertification(format!(
                "variable {} escapes its declared interval",
                cert.name
            )));
        }
    }
    if !report.ok {
        return Err(Error::GadgetCertification(
            "carried interval certification failed".into(),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::passes::shift::to_shift;
    use crate::range::certify_instance;
    use crate::witness::{compose, round_trip_check, RoundTrip};

    fn shifted_input() -> (Instance, WitnessMap) {
        let mut inst = Instance::new(Fragment::Small);
        inst.delta = Some(rat(1, 512));
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
        let (out, wmap, _) = to_shift(&inst, &rat(1, 64)).unwrap();
        (out, wmap)
    }

    #[test]
    fn output_validates_and_certifies() {
        let (shifted, _) = shifted_input();
        let (out, _, _) = to_square(&shifted, &rat(5, 32)).unwrap();
        assert!(validate_fragment(&out).is_empty());
        assert!(certify_instance(&out).unwrap().ok);
        assert!(out
            .constraints
            .iter()
            .all(|c| matches!(c, Constraint::PlusEq(..) | Constraint::SquareEq(..))));
    }

    #[test]
    fn round_trip_through_both_passes() {
        let (shifted, w1) = shifted_input();
        let (out, w2, _) = to_square(&shifted, &rat(5, 32)).unwrap();
        let composed = compose(&w2, &w1).unwrap();
        let point = vec![
            rat(1, 1024),
            rat(1, 1024),
            rat(1, 512),
            rat(1, 1 << 20),
            rat(1, 512),
        ];
        assert_eq!(round_trip_check(&composed, &out, &point), RoundTrip::Ok);
    }

    #[test]
    fn squaring_shapes_are_recognized() {
        // x * x = y should become one squaring, no gadget.
        let mut inst = Instance::new(Fragment::Small);
        inst.delta = Some(rat(1, 512));
        let x = inst.add_var("x");
        let y = inst.add_var("y");
        inst.constraints = vec![Constraint::TimesEq(x, x, y)];
        let (shifted, _, _) = to_shift(&inst, &rat(1, 64)).unwrap();
        // The shift pass expands x * x = y into its own block; count squarings
        // in the squared output against multiplications in the shifted one.
        let times = shifted
            .constraints
            .iter()
            .filter(|c| matches!(c, Constraint::TimesEq(..)))
            .count();
        let (out, _, _) = to_square(&shifted, &rat(5, 32)).unwrap();
        let squares = out
            .constraints
            .iter()
            .filter(|c| matches!(c, Constraint::SquareEq(..)))
            .count();
        // Both multiplications already have a squaring shape (x * x = c and
        // the constant pin), so only the fresh constant 1 adds a squaring.
        assert_eq!(squares, times + 1);
        assert!(validate_fragment(&out).is_empty());
    }

    #[test]
    fn delta_ratio_is_enforced() {
        let (shifted, _) = shifted_input();
        assert!(matches!(
            to_square(&shifted, &rat(1, 5)),
            Err(Error::Param(_))
        ));
    }

    #[test]
    fn fresh_centers_stay_on_grid() {
        let (shifted, _) = shifted_input();
        let n = shifted.n_vars();
        let (out, _, _) = to_square(&shifted, &rat(5, 32)).unwrap();
        for v in n..out.n_vars() {
            let c = ann_center(out.annotations[v].as_ref().unwrap()).unwrap();
            assert!(
                [rat(1, 2), rat(3, 4), rat_int(1), rat(3, 2)].contains(&c),
                "center {c} of {}",
                out.vars.name(v)
            );
        }
    }
}
