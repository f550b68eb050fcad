//! Shifting pass: every variable x with |x| <= delta1 is replaced by a
//! variable holding x + 1, confined to a narrow interval around 1, and all
//! constraints are re-expressed with additions and multiplications between
//! near-1 quantities.
//!
//! Constants 1, 1/2, 3/2, 3/4 are pinned first (1 by 1*1 = 1, the rest by
//! additions). A doubling chain builds D = 1 - delta1 from 1/2. Each
//! original variable x gets companions holding x + 3/2, x + 3/4 and x + D;
//! additions use the x + 3/4 forms, each multiplication becomes a block of
//! one multiplication and four additions around the product variable
//! x*y + x + y + 1, nonnegativity of x becomes the existence of x + 1/2
//! inside [1/2, 1/2 + delta2], and x = delta1 pins x + D to 1 by
//! multiplication with the constant 1.
//!
//! Every emitted variable carries its closed form over the original
//! zero-centered variables, and the interval certifier re-derives each
//! declared interval from that form.

use std::time::Instant;

use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::formula::{
    Constraint, Fragment, Instance, Interval, VarAnnotation,
};
use crate::length::instance_length;
use crate::poly::Polynomial;
use crate::rational::{neg_pow2_exponent, rat, rat_int, Dyadic, Rat};
use crate::validate::validate_fragment;
use crate::witness::{AffineProjection, ForwardComponent, RationalMap, WitnessMap};

use super::annot::{ann_add_const, ann_mul, ann_sub};
use super::{add_unique_var, PassReport};

pub fn to_shift(input: &Instance, delta2: &Rat) -> Result<(Instance, WitnessMap, PassReport)> {
    let started = Instant::now();
    if input.fragment != Fragment::Small {
        return Err(Error::Fragment(format!(
            "shifting expects a small-solution instance, got {}",
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
    let l = neg_pow2_exponent(&delta1).ok_or_else(|| {
        Error::Param(format!(
            "input delta must be a power of two, got {}",
            crate::rational::format_rat(&delta1)
        ))
    })?;
    if &delta1 * rat_int(5) > *delta2 {
        return Err(Error::Param("need 5 * input delta <= output delta".into()));
    }
    if *delta2 >= rat(1, 4) {
        return Err(Error::Param("output delta must be below 1/4".into()));
    }
    let input_length = instance_length(input);
    let n = input.n_vars();

    let mut b = Builder {
        out: Instance::new(Fragment::Shift),
        comps: Vec::new(),
        delta2: delta2.clone(),
    };
    b.out.delta = Some(delta2.clone());
    b.out.ann_source_delta = Some(delta1.clone());

    // Originals first: the backward map subtracts 1 and projects.
    for (i, name) in input.vars.names().to_vec().iter().enumerate() {
        b.add(
            &format!("[{name}+1]"),
            VarAnnotation::shifted(name, Rat::one()),
            Polynomial::var(i).shift(&Rat::one()),
            None,
        );
    }

    // Constants.
    let one = b.constant("[1]", rat_int(1));
    b.out.constraints.push(Constraint::TimesEq(one, one, one));
    let k12 = b.constant("[1/2]", rat(1, 2));
    b.out.constraints.push(Constraint::PlusEq(k12, k12, one));
    let k32 = b.constant("[3/2]", rat(3, 2));
    b.out.constraints.push(Constraint::PlusEq(one, k12, k32));
    let k34 = b.constant("[3/4]", rat(3, 4));
    b.out.constraints.push(Constraint::PlusEq(k34, k34, k32));

    // Doubling chain for D = 1 - 2^-l.
    let mut d_cur = k12; // 1 - 2^-1
    for i in 1..l {
        let t = b.constant(&format!("[2-2^-{i}]"), rat_int(2) - rat(1, 1 << i));
        b.out.constraints.push(Constraint::PlusEq(d_cur, one, t));
        let next = b.constant(
            &format!("[1-2^-{}]", i + 1),
            Rat::one() - rat(1, 1 << (i + 1)),
        );
        b.out.constraints.push(Constraint::PlusEq(next, next, t));
        d_cur = next;
    }
    let d_const = d_cur;
    let big_d = Rat::one() - &delta1;

    // Companion variables per original.
    let mut v32 = Vec::with_capacity(n);
    let mut v34 = Vec::with_capacity(n);
    let mut vd = Vec::with_capacity(n);
    for (i, name) in input.vars.names().to_vec().iter().enumerate() {
        let x = Polynomial::var(i);
        let x32 = b.add(
            &format!("[{name}+3/2]"),
            VarAnnotation::shifted(name, rat(3, 2)),
            x.shift(&rat(3, 2)),
            None,
        );
        b.out.constraints.push(Constraint::PlusEq(i, k12, x32));
        let x34 = b.add(
            &format!("[{name}+3/4]"),
            VarAnnotation::shifted(name, rat(3, 4)),
            x.shift(&rat(3, 4)),
            None,
        );
        b.out.constraints.push(Constraint::PlusEq(x34, k34, x32));
        let x34d = b.add(
            &format!("[{name}+3/4+D]"),
            VarAnnotation::shifted(name, rat(3, 4) + &big_d),
            x.shift(&(rat(3, 4) + &big_d)),
            None,
        );
        b.out.constraints.push(Constraint::PlusEq(x34, d_const, x34d));
        let xd = b.add(
            &format!("[{name}+D]"),
            VarAnnotation::shifted(name, big_d.clone()),
            x.shift(&big_d),
            // Tight one-sided interval: x = delta1 in any solution that
            // reaches this variable through the pin below, and the
            // multiplication promise needs the interval inside
            // [1 - delta2, 1 + delta2].
            Some(Interval::new(Rat::one() - &delta1 - &delta1, Rat::one())),
        );
        b.out.constraints.push(Constraint::PlusEq(xd, k34, x34d));
        v32.push(x32);
        v34.push(x34);
        vd.push(xd);
    }

    // Constraint translation.
    for c in &input.constraints {
        match *c {
            Constraint::PlusEq(x, y, z) => {
                b.out
                    .constraints
                    .push(Constraint::PlusEq(v34[x], v34[y], v32[z]));
            }
            Constraint::TimesEq(x, y, z) => {
                let nx = input.vars.name(x);
                let ny = input.vars.name(y);
                let ann_x1 = VarAnnotation::shifted(nx, Rat::one());
                let ann_y1 = VarAnnotation::shifted(ny, Rat::one());
                let ann_c1 = ann_mul(&ann_x1, &ann_y1)?;
                let px1 = Polynomial::var(x).shift(&Rat::one());
                let py1 = Polynomial::var(y).shift(&Rat::one());
                let pc1 = px1.mul(&py1);
                let c1 = b.add(&format!("[{nx}{ny}+{nx}+{ny}+1]"), ann_c1.clone(), pc1.clone(), None);
                b.out.constraints.push(Constraint::TimesEq(x, y, c1));
                let ann_c2 = ann_add_const(&ann_c1, &rat(1, 2));
                let c2 = b.add(
                    &format!("[{nx}{ny}+{nx}+{ny}+3/2]"),
                    ann_c2.clone(),
                    pc1.shift(&rat(1, 2)),
                    None,
                );
                b.out.constraints.push(Constraint::PlusEq(c1, k12, c2));
                let ann_c3 = ann_sub(&ann_c2, &VarAnnotation::shifted(ny, rat(3, 4)))?;
                let pc3 = pc1
                    .shift(&rat(1, 2))
                    .sub(&Polynomial::var(y).shift(&rat(3, 4)));
                let c3 = b.add(&format!("[{nx}{ny}+{nx}+3/4]"), ann_c3.clone(), pc3.clone(), None);
                b.out.constraints.push(Constraint::PlusEq(c3, v34[y], c2));
                let ann_c4 = ann_add_const(&ann_c3, &rat(3, 4));
                let c4 = b.add(
                    &format!("[{nx}{ny}+{nx}+3/2]"),
                    ann_c4,
                    pc3.shift(&rat(3, 4)),
                    None,
                );
                b.out.constraints.push(Constraint::PlusEq(c3, k34, c4));
                b.out
                    .constraints
                    .push(Constraint::PlusEq(v34[z], v34[x], c4));
            }
            Constraint::GeqZero(x) => {
                let name = input.vars.name(x).to_string();
                let mut ann = VarAnnotation::shifted(&name, rat(1, 2));
                ann.nonneg_source = true;
                let xh = b.add(
                    &format!("[{name}+1/2]"),
                    ann,
                    Polynomial::var(x).shift(&rat(1, 2)),
                    Some(Interval::new(rat(1, 2), rat(1, 2) + delta2)),
                );
                b.out.constraints.push(Constraint::PlusEq(xh, k12, x));
            }
            Constraint::EqDelta(x) => {
                b.out.constraints.push(Constraint::TimesEq(vd[x], one, one));
            }
            ref other => {
                return Err(Error::Fragment(format!(
                    "unexpected constraint {other:?}"
                )))
            }
        }
    }

    let Builder { out, comps, .. } = b;
    let witness = WitnessMap {
        stage: "shift".to_string(),
        equisat_only: false,
        forward: RationalMap {
            n_in: n,
            components: comps,
        },
        backward: AffineProjection {
            n_in: out.n_vars(),
            proj: (0..n).collect(),
            scale: vec![Dyadic::one(); n],
            offset: vec![Dyadic::from_rat(-Rat::one()); n],
        },
    };
    let report = PassReport::new("shift", input_length, n, &out, Some(l), started);
    Ok((out, witness, report))
}

struct Builder {
    out: Instance,
    comps: Vec<ForwardComponent>,
    delta2: Rat,
}

impl Builder {
    /// Interval [c - delta2, c + delta2] clipped to [1/2, 2].
    fn centered(&self, c: &Rat) -> Interval {
        let lo = c - &self.delta2;
        let hi = c + &self.delta2;
        Interval::new(lo.max(rat(1, 2)), hi.min(rat_int(2)))
    }

    fn add(
        &mut self,
        base: &str,
        ann: VarAnnotation,
        fwd: Polynomial,
        interval: Option<Interval>,
    ) -> usize {
        let center = &ann.num[5] / &ann.den[5];
        debug_assert!(center.is_positive());
        let iv = interval.unwrap_or_else(|| self.centered(&center));
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
}
