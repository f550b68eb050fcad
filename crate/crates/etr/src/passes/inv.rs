//! Inversion pass: squarings between near-1 variables are replaced by
//! inversions. A squaring A = a^2 unfolds through a ladder of additions
//! around three inversions: with u = (a + 1/2) / 2, the two inversions
//! b1 = 1 / (7/4 - u) and b2 = 1 / (u + 1/4) have the property that the
//! inverse of their halved sum is exactly quadratic in a, and a short ladder
//! of additions recovers a^2 from it. Squarings that only pin a variable to
//! 1 (a^2 = a, or a^2 = w with w already pinned) become single inversions.
//!
//! As in the squaring pass, every fresh variable carries its closed form
//! over the original zero-centered variables. The closed form of the ladder
//! head is checked symbolically against the closed form of a^2 + 1/2; a
//! mismatch aborts the pass. Cross-multiplied coefficient sizes stay inside
//! fixed windows so the interval certificates never degrade.

use std::collections::HashSet;
use std::time::Instant;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::formula::{Constraint, Fragment, Instance, Interval, VarAnnotation};
use crate::length::instance_length;
use crate::poly::Polynomial;
use crate::range::certified_range;
use crate::rational::{rat, rat_int, Dyadic, Rat};
use crate::validate::validate_fragment;
use crate::witness::{AffineProjection, ForwardComponent, RationalMap, WitnessMap};

use super::annot::{ann_add, ann_add_const, ann_center, ann_equivalent, ann_inv, ann_scale, ann_sub};
use super::{add_unique_var, PassReport};

pub fn to_inv(input: &Instance, delta2: &Rat) -> Result<(Instance, WitnessMap, PassReport)> {
    let started = Instant::now();
    if input.fragment != Fragment::Square {
        return Err(Error::Fragment(format!(
            "inversion expects a squaring instance, got {}",
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
    if &delta1 * rat_int(1800) != *delta2 {
        return Err(Error::Param(
            "output delta must be exactly 1800 times the input delta".into(),
        ));
    }
    if *delta2 >= rat(1, 6) {
        return Err(Error::Param("output delta must be below 1/6".into()));
    }
    let delta_src = input
        .ann_source_delta
        .clone()
        .ok_or_else(|| Error::Param("instance does not record the annotation source scale".into()))?;
    let input_length = instance_length(input);
    let n = input.n_vars();

    let mut b = Builder {
        out: Instance::new(Fragment::Inv),
        comps: Vec::new(),
        delta2: delta2.clone(),
        delta_src,
    };
    b.out.delta = Some(delta2.clone());
    b.out.ann_source_delta = input.ann_source_delta.clone();

    for (i, name) in input.vars.names().to_vec().iter().enumerate() {
        let ann = input.annotations[i]
            .clone()
            .ok_or_else(|| Error::MissingAnnotation(name.clone()))?;
        b.add(name, ann, RF::var(i), input.intervals[i].clone());
    }

    // Pinned constants: 1/k = k forces k = 1 inside [1/2, 2], additions do
    // the rest.
    let k1 = b.constant("[1]", Rat::one());
    b.out.constraints.push(Constraint::InvEq(k1, k1));
    let k12 = b.constant("[1/2]", rat(1, 2));
    b.out.constraints.push(Constraint::PlusEq(k12, k12, k1));
    let k32 = b.constant("[3/2]", rat(3, 2));
    b.out.constraints.push(Constraint::PlusEq(k1, k12, k32));
    let k34 = b.constant("[3/4]", rat(3, 4));
    b.out.constraints.push(Constraint::PlusEq(k34, k34, k32));
    let k74 = b.constant("[7/4]", rat(7, 4));
    b.out.constraints.push(Constraint::PlusEq(k1, k34, k74));

    let mut pinned: HashSet<usize> = HashSet::new();
    pinned.insert(k1);

    for c in &input.constraints {
        match *c {
            Constraint::PlusEq(x, y, z) => {
                b.out.constraints.push(Constraint::PlusEq(x, y, z));
            }
            Constraint::SquareEq(x, z) if x == z => {
                // a^2 = a and 1/a = a pin a the same way on [1/2, 2].
                b.out.constraints.push(Constraint::InvEq(x, x));
                pinned.insert(x);
            }
            Constraint::SquareEq(x, z)
                if pinned.contains(&z) || is_constant_one(&input.annotations[z]) =>
            {
                // a^2 = 1 and a * 1 = 1 agree for positive a.
                b.out.constraints.push(Constraint::InvEq(x, z));
                pinned.insert(x);
            }
            Constraint::SquareEq(x, z) => {
                b.squaring(input, k1, k12, k34, k74, x, z)?;
            }
            ref other => {
                return Err(Error::Fragment(format!("unexpected constraint {other:?}")))
            }
        }
    }

    certify_fresh(&b.out, n, delta2)?;

    let Builder { out, comps, .. } = b;
    let witness = WitnessMap {
        stage: "inv".to_string(),
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
    let report = PassReport::new("inv", input_length, n, &out, None, started);
    Ok((out, witness, report))
}

fn is_constant_one(ann: &Option<VarAnnotation>) -> bool {
    match ann {
        Some(a) => {
            a.has_trivial_den() && a.num[5].is_one() && a.num[..5].iter().all(Rat::is_zero)
        }
        None => false,
    }
}

/// A rational function of the original variables, kept as an explicit
/// numerator/denominator pair; the forward map needs these because the
/// intermediate quantities of an inversion block are not polynomial.
#[derive(Clone)]
struct RF {
    num: Polynomial,
    den: Polynomial,
}

impl RF {
    fn var(i: usize) -> RF {
        RF {
            num: Polynomial::var(i),
            den: Polynomial::one(),
        }
    }

    fn constant(c: Rat) -> RF {
        RF {
            num: Polynomial::constant(c),
            den: Polynomial::one(),
        }
    }

    fn add(&self, other: &RF) -> RF {
        RF {
            num: self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            den: self.den.mul(&other.den),
        }
    }

    fn sub(&self, other: &RF) -> RF {
        RF {
            num: self.num.mul(&other.den).sub(&other.num.mul(&self.den)),
            den: self.den.mul(&other.den),
        }
    }

    fn add_const(&self, c: &Rat) -> RF {
        RF {
            num: self.num.add(&self.den.scale(c)),
            den: self.den.clone(),
        }
    }

    fn scale(&self, c: &Rat) -> RF {
        RF {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    fn inv(&self) -> RF {
        RF {
            num: self.den.clone(),
            den: self.num.clone(),
        }
    }

    fn component(&self) -> ForwardComponent {
        ForwardComponent {
            scale: Dyadic::one(),
            num: self.num.clone(),
            den: self.den.clone(),
            shift: Dyadic::zero(),
        }
    }
}

struct Builder {
    out: Instance,
    comps: Vec<ForwardComponent>,
    delta2: Rat,
    delta_src: Rat,
}

impl Builder {
    fn add(&mut self, base: &str, ann: VarAnnotation, fwd: RF, interval: Option<Interval>) -> usize {
        let iv = interval.unwrap_or_else(|| {
            let c = &ann.num[5] / &ann.den[5];
            let lo = &c - &self.delta2;
            let hi = &c + &self.delta2;
            Interval::new(lo.max(rat(1, 2)), hi.min(rat_int(2)))
        });
        let v = add_unique_var(&mut self.out, base);
        self.out.intervals[v] = Some(iv);
        self.out.annotations[v] = Some(ann);
        self.comps.push(fwd.component());
        v
    }

    fn constant(&mut self, base: &str, c: Rat) -> usize {
        self.add(
            base,
            VarAnnotation::constant(c.clone(), base),
            RF::constant(c),
            None,
        )
    }

    /// Inverts a closed form, refusing if its certified range touches zero.
    fn invert_ann(&self, ann: &VarAnnotation, what: &str) -> Result<VarAnnotation> {
        let range = certified_range(ann, &self.delta_src)?;
        if range.contains(&Rat::zero()) {
            return Err(Error::GadgetCertification(format!(
                "inverting {what}, whose range contains zero"
            )));
        }
        ann_inv(ann)
    }

    #[allow(clippy::too_many_arguments)]
    fn squaring(
        &mut self,
        input: &Instance,
        k1: usize,
        k12: usize,
        k34: usize,
        k74: usize,
        a: usize,
        big_a: usize,
    ) -> Result<()> {
        let na = input.vars.name(a).to_string();
        let tag = |t: &str| format!("[{na}^2:{t}]");
        let ann_a = input.annotations[a]
            .clone()
            .ok_or_else(|| Error::MissingAnnotation(na.clone()))?;
        let ann_big_a = input.annotations[big_a]
            .clone()
            .ok_or_else(|| Error::MissingAnnotation(input.vars.name(big_a).to_string()))?;
        let fa = RF::var(a);

        // u = (a + 1/2) / 2, the working copy near 3/4.
        let ann_t1 = ann_add_const(&ann_a, &rat(1, 2));
        let f_t1 = fa.add_const(&rat(1, 2));
        let t1 = self.add(&tag("t1"), ann_t1.clone(), f_t1.clone(), None);
        self.out.constraints.push(Constraint::PlusEq(a, k12, t1));
        let ann_u = ann_scale(&ann_t1, &rat(1, 2));
        let f_u = f_t1.scale(&rat(1, 2));
        let u = self.add(&tag("u"), ann_u.clone(), f_u.clone(), None);
        self.out.constraints.push(Constraint::PlusEq(u, u, t1));

        // The two inversion inputs m = 7/4 - u and p = u + 1/4.
        let ann_m = ann_sub(&VarAnnotation::constant(rat(7, 4), ""), &ann_u)?;
        let f_m = RF::constant(rat(7, 4)).sub(&f_u);
        let m = self.add(&tag("m"), ann_m.clone(), f_m.clone(), None);
        self.out.constraints.push(Constraint::PlusEq(m, u, k74));
        let ann_t2 = ann_add_const(&ann_u, &rat(3, 4));
        let f_t2 = f_u.add_const(&rat(3, 4));
        let t2 = self.add(&tag("t2"), ann_t2.clone(), f_t2.clone(), None);
        self.out.constraints.push(Constraint::PlusEq(u, k34, t2));
        let ann_p = ann_add_const(&ann_t2, &rat(-1, 2));
        let f_p = f_t2.add_const(&rat(-1, 2));
        let p = self.add(&tag("p"), ann_p.clone(), f_p.clone(), None);
        self.out.constraints.push(Constraint::PlusEq(p, k12, t2));

        let ann_b1 = self.invert_ann(&ann_m, "7/4 - u")?;
        let f_b1 = f_m.inv();
        let b1 = self.add(&tag("b1"), ann_b1.clone(), f_b1.clone(), None);
        self.out.constraints.push(Constraint::InvEq(m, b1));
        let ann_b2 = self.invert_ann(&ann_p, "u + 1/4")?;
        let f_b2 = f_p.inv();
        let b2 = self.add(&tag("b2"), ann_b2.clone(), f_b2.clone(), None);
        self.out.constraints.push(Constraint::InvEq(p, b2));

        // w = (b1 + b2) / 2 through halves; its inverse is quadratic in a.
        let ann_t3 = ann_add_const(&ann_b1, &rat(1, 2));
        let f_t3 = f_b1.add_const(&rat(1, 2));
        let t3 = self.add(&tag("t3"), ann_t3.clone(), f_t3.clone(), None);
        self.out.constraints.push(Constraint::PlusEq(b1, k12, t3));
        let ann_h1 = ann_scale(&ann_t3, &rat(1, 2));
        let f_h1 = f_t3.scale(&rat(1, 2));
        let h1 = self.add(&tag("h1"), ann_h1.clone(), f_h1.clone(), None);
        self.out.constraints.push(Constraint::PlusEq(h1, h1, t3));
        let ann_t4 = ann_add_const(&ann_b2, &rat(1, 2));
        let f_t4 = f_b2.add_const(&rat(1, 2));
        let t4 = self.add(&tag("t4"), ann_t4.clone(), f_t4.clone(), None);
        self.out.constraints.push(Constraint::PlusEq(b2, k12, t4));
        let ann_h2 = ann_scale(&ann_t4, &rat(1, 2));
        let f_h2 = f_t4.scale(&rat(1, 2));
        let h2 = self.add(&tag("h2"), ann_h2.clone(), f_h2.clone(), None);
        self.out.constraints.push(Constraint::PlusEq(h2, h2, t4));
        let ann_s = ann_add(&ann_h1, &ann_h2)?;
        let f_s = f_h1.add(&f_h2);
        let s = self.add(&tag("s"), ann_s.clone(), f_s.clone(), None);
        self.out.constraints.push(Constraint::PlusEq(h1, h2, s));
        let ann_w = ann_add_const(&ann_s, &rat(-1, 2));
        let f_w = f_s.add_const(&rat(-1, 2));
        let w = self.add(&tag("w"), ann_w.clone(), f_w.clone(), None);
        self.out.constraints.push(Constraint::PlusEq(w, k12, s));
        let ann_c = self.invert_ann(&ann_w, "(b1 + b2) / 2")?;
        let f_c = f_w.inv();
        let cc = self.add(&tag("c"), ann_c.clone(), f_c.clone(), None);
        self.out.constraints.push(Constraint::InvEq(w, cc));

        // Ladder back to A = a^2: q = u + 1 - c, A = 4q - 2.
        let ann_z = ann_add_const(&ann_u, &Rat::one());
        let f_z = f_u.add_const(&Rat::one());
        let z = self.add(&tag("z"), ann_z.clone(), f_z.clone(), None);
        self.out.constraints.push(Constraint::PlusEq(u, k1, z));
        let ann_q = ann_sub(&ann_z, &ann_c)?;
        let f_q = f_z.sub(&f_c);
        let q = self.add(&tag("q"), ann_q.clone(), f_q.clone(), None);
        self.out.constraints.push(Constraint::PlusEq(q, cc, z));
        let ann_tq = ann_scale(&ann_q, &rat_int(2));
        let f_tq = f_q.scale(&rat_int(2));
        let tq = self.add(&tag("tq"), ann_tq.clone(), f_tq.clone(), None);
        self.out.constraints.push(Constraint::PlusEq(q, q, tq));
        let ann_h = ann_add_const(&ann_tq, &rat(-3, 4));
        let f_h = f_tq.add_const(&rat(-3, 4));
        let h = self.add(&tag("h"), ann_h.clone(), f_h.clone(), None);
        self.out.constraints.push(Constraint::PlusEq(h, k34, tq));
        let ann_ta = ann_scale(&ann_h, &rat_int(2));
        let f_ta = f_h.scale(&rat_int(2));
        let ta = self.add(&tag("ta"), ann_ta.clone(), f_ta, None);
        self.out.constraints.push(Constraint::PlusEq(h, h, ta));
        self.out.constraints.push(Constraint::PlusEq(big_a, k12, ta));

        // The ladder head must equal A + 1/2 identically; this is the
        // symbolic statement that the block encodes A = a^2 and nothing
        // else.
        let rhs = ann_add_const(&ann_big_a, &rat(1, 2));
        if !ann_equivalent(&ann_ta, &rhs) {
            return Err(Error::GadgetCertification(format!(
                "inversion ladder does not close for {na}^2"
            )));
        }
        Ok(())
    }
}

/// Freshly created variables must keep their closed forms inside fixed
/// coefficient windows (cross-multiplied coefficients in [-4, 24], positive
/// denominator constant, bounded joint size) and inside their declared
/// intervals.
fn certify_fresh(out: &Instance, n_carried: usize, delta2: &Rat) -> Result<()> {
    let grid = [rat(1, 2), rat(3, 4), Rat::one(), rat(3, 2), rat(7, 4)];
    let report = crate::range::certify_instance(out)?;
    for (v, cert) in report.vars.iter().enumerate() {
        if v < n_carried {
            continue;
        }
        let ann = out.annotations[v].as_ref().unwrap();
        let center = ann_center(ann)?;
        if !grid.contains(&center) {
            return Err(Error::GadgetCertification(format!(
                "variable {} has off-grid center {}",
                cert.name,
                crate::rational::format_rat(&center)
            )));
        }
        for c in ann.num.iter().chain(ann.den.iter()) {
            if *c < rat_int(-4) || *c > rat_int(24) {
                return Err(Error::GadgetCertification(format!(
                    "variable {} has a coefficient outside [-4, 24]",
                    cert.name
                )));
            }
        }
        let b6 = &ann.den[5];
        if !b6.is_positive() || &ann.num[5] + (Rat::one() + delta2) * b6 > rat_int(48) {
            return Err(Error::GadgetCertification(format!(
                "variable {} has an oversized closed form",
                cert.name
            )));
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
