//! Scaling pass: shrinks every variable by a factor eps = delta * 2^-2^H so
//! all solution coordinates fit inside [-delta, delta].
//!
//! A squaring chain of tower constants realizes eps with O(H) constraints:
//! starting from the constant delta, each step halves the binary exponent
//! scale, d_{i+1} * delta = d_i^2 with d_i = delta * 2^-2^i. Additions scale
//! uniformly; each multiplication x*y = z needs the auxiliary variable
//! eps^2 * z tied in by two multiplications.

use std::time::Instant;

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{Error, Result};
use crate::formula::{Constraint, Fragment, Instance};
use crate::length::instance_length;
use crate::poly::Polynomial;
use crate::rational::{Dyadic, Rat};
use crate::validate::validate_fragment;
use crate::witness::{AffineProjection, ForwardComponent, RationalMap, WitnessMap};

use super::{add_unique_var, PassReport, TowerMode};

pub fn to_small(
    input: &Instance,
    delta: &Rat,
    mode: TowerMode,
) -> Result<(Instance, WitnessMap, PassReport)> {
    let started = Instant::now();
    if input.fragment != Fragment::Ami {
        return Err(Error::Fragment(format!(
            "scaling expects an addition/multiplication instance, got {}",
            input.fragment
        )));
    }
    if let Some(v) = validate_fragment(input).first() {
        return Err(Error::Fragment(v.what.clone()));
    }
    use num_traits::Signed;
    if !delta.is_positive() || *delta >= Rat::one() {
        return Err(Error::Param(format!(
            "delta must lie in (0,1), got {}",
            crate::rational::format_rat(delta)
        )));
    }
    if !crate::rational::is_pow2(&Rat::from_integer(delta.denom().clone())) {
        return Err(Error::Param(
            "delta must be dyadic (the shifting stage needs a power-of-two scale)".into(),
        ));
    }
    let input_length = instance_length(input);
    let n = input.n_vars();
    let height = match mode {
        TowerMode::PaperExact => input_length + 5,
        TowerMode::Test(h) => h as u64,
    };

    let mut out = Instance::new(Fragment::Small);
    out.delta = Some(delta.clone());

    // Scaled originals first, so the backward map is a plain projection.
    let mut components: Vec<ForwardComponent> = Vec::new();
    let eps_exp = -(BigInt::one() << height);
    let eps = Dyadic::new(delta.clone(), eps_exp.clone());
    for name in input.vars.names() {
        out.add_var(&format!("[e*{name}]"));
    }
    for x in 0..n {
        components.push(ForwardComponent {
            scale: eps.clone(),
            num: Polynomial::var(x),
            den: Polynomial::one(),
            shift: Dyadic::zero(),
        });
    }

    let mut constant = |out: &mut Instance, name: &str, value: Dyadic| -> usize {
        let v = add_unique_var(out, name);
        components.push(ForwardComponent::constant(value));
        v
    };

    // The chain: [d] = delta, [0], and tower constants d_i = delta * 2^-2^i.
    let d_var = constant(&mut out, "[d]", Dyadic::from_rat(delta.clone()));
    out.constraints.push(Constraint::EqDelta(d_var));
    let zero = constant(&mut out, "[0]", Dyadic::zero());
    out.constraints.push(Constraint::PlusEq(zero, d_var, d_var));
    let mut tower = Vec::with_capacity(height as usize + 1);
    tower.push(constant(
        &mut out,
        "[d*2^-2^0]",
        Dyadic::new(delta.clone(), -BigInt::one()),
    ));
    out.constraints
        .push(Constraint::PlusEq(tower[0], tower[0], d_var));
    let delta_sq = delta * delta;
    for i in 0..height {
        let sq = constant(
            &mut out,
            &format!("[d^2*2^-2^{}]", i + 1),
            Dyadic::new(delta_sq.clone(), -(BigInt::one() << (i + 1))),
        );
        let next = constant(
            &mut out,
            &format!("[d*2^-2^{}]", i + 1),
            Dyadic::new(delta.clone(), -(BigInt::one() << (i + 1))),
        );
        out.constraints
            .push(Constraint::TimesEq(tower[i as usize], tower[i as usize], sq));
        out.constraints.push(Constraint::TimesEq(next, d_var, sq));
        tower.push(next);
    }
    let eps_var = constant(&mut out, "[e]", eps.clone());
    out.constraints.push(Constraint::PlusEq(
        eps_var,
        zero,
        *tower.last().expect("tower is never empty"),
    ));

    // Transformed constraints.
    let eps_sq = Dyadic::new(delta_sq, eps_exp.clone() * 2);
    for c in &input.constraints {
        match *c {
            Constraint::PlusEq(x, y, z) => {
                out.constraints.push(Constraint::PlusEq(x, y, z));
            }
            Constraint::GeqZero(x) => out.constraints.push(Constraint::GeqZero(x)),
            Constraint::EqOne(x) => {
                out.constraints.push(Constraint::PlusEq(x, zero, eps_var));
            }
            Constraint::TimesEq(x, y, z) => {
                let aux = add_unique_var(
                    &mut out,
                    &format!("[e^2*{}]", input.vars.name(z)),
                );
                components.push(ForwardComponent {
                    scale: eps_sq.clone(),
                    num: Polynomial::var(z),
                    den: Polynomial::one(),
                    shift: Dyadic::zero(),
                });
                out.constraints.push(Constraint::TimesEq(x, y, aux));
                out.constraints
                    .push(Constraint::TimesEq(eps_var, z, aux));
            }
            ref other => {
                return Err(Error::Fragment(format!(
                    "unexpected constraint {other:?}"
                )))
            }
        }
    }

    let witness = WitnessMap {
        stage: "small".to_string(),
        equisat_only: false,
        forward: RationalMap {
            n_in: n,
            components,
        },
        backward: AffineProjection {
            n_in: out.n_vars(),
            proj: (0..n).collect(),
            scale: vec![eps.recip(); n],
            offset: vec![Dyadic::zero(); n],
        },
    };
    let report = PassReport::new("small", input_length, n, &out, Some(height), started);
    Ok((out, witness, report))
}
