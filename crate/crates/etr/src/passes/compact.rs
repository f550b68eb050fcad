//! Bounding pass: confines every variable of a conjunctive instance to
//! [-2^2^k, 2^2^k] so the solution set becomes compact.
//!
//! A squaring chain defines the constants 2^2^0, ..., 2^2^k; each original
//! variable x gets slack variables for x + 2^2^k and 2^2^k - x, both pinned
//! nonnegative. Satisfiability is preserved for solutions within the bound,
//! but the solution sets are not homeomorphic (the pass only extends
//! solutions forward), so the witness is marked equisatisfiable-only.

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

/// Chain height for an instance of length `len` with `n` variables:
/// the least k with 2^2^k >= 2^(len^(8n)), computed exactly.
pub fn paper_height(len: u64, n: usize) -> u64 {
    let l = len.max(4);
    // ceil(8 n log2 l) = bits(l^(8n) - 1)
    let m = BigInt::from(l).pow(8 * n as u32) - BigInt::one();
    m.bits()
}

pub fn compactify(
    input: &Instance,
    mode: TowerMode,
) -> Result<(Instance, WitnessMap, PassReport)> {
    let started = Instant::now();
    if input.fragment != Fragment::Conj {
        return Err(Error::Fragment(format!(
            "bounding pass expects a conjunctive instance, got {}",
            input.fragment
        )));
    }
    let violations = validate_fragment(input);
    if let Some(v) = violations.first() {
        return Err(Error::Fragment(v.what.clone()));
    }
    let input_length = instance_length(input);
    let n = input.n_vars();
    let k = match mode {
        TowerMode::PaperExact => paper_height(input_length, n),
        TowerMode::Test(h) => h as u64,
    };

    let mut out = Instance::new(Fragment::Compact);
    for name in input.vars.names() {
        out.add_var(name);
    }
    out.constraints = input.constraints.clone();

    let mut components: Vec<ForwardComponent> =
        (0..n).map(ForwardComponent::projection).collect();

    // Chain: c_0 = 2, c_{i+1} = c_i^2.
    let mut chain = Vec::with_capacity(k as usize + 1);
    for i in 0..=k {
        let c = add_unique_var(&mut out, &format!("[2^2^{i}]"));
        chain.push(c);
        components.push(ForwardComponent::constant(Dyadic::new(
            Rat::one(),
            BigInt::one() << i,
        )));
        let eq = if i == 0 {
            Polynomial::var(c).sub(&Polynomial::constant(crate::rational::rat_int(2)))
        } else {
            let prev = Polynomial::var(chain[i as usize - 1]);
            Polynomial::var(c).sub(&prev.mul(&prev))
        };
        out.constraints.push(Constraint::PolyEq(eq));
    }
    let top = *chain.last().expect("chain is never empty");
    let top_exp = BigInt::one() << k;

    for x in 0..n {
        let name = input.vars.name(x).to_string();
        let hi = add_unique_var(&mut out, &format!("[{name}+2^2^{k}]"));
        let lo = add_unique_var(&mut out, &format!("[2^2^{k}-{name}]"));
        // hi - x - top = 0, hi >= 0, lo - top + x = 0, lo >= 0.
        out.constraints.push(Constraint::PolyEq(
            Polynomial::var(hi)
                .sub(&Polynomial::var(x))
                .sub(&Polynomial::var(top)),
        ));
        out.constraints.push(Constraint::GeqZero(hi));
        out.constraints.push(Constraint::PolyEq(
            Polynomial::var(lo)
                .sub(&Polynomial::var(top))
                .add(&Polynomial::var(x)),
        ));
        out.constraints.push(Constraint::GeqZero(lo));
        components.push(ForwardComponent {
            scale: Dyadic::one(),
            num: Polynomial::var(x),
            den: Polynomial::one(),
            shift: Dyadic::new(Rat::one(), top_exp.clone()),
        });
        components.push(ForwardComponent {
            scale: Dyadic::one(),
            num: Polynomial::var(x).neg(),
            den: Polynomial::one(),
            shift: Dyadic::new(Rat::one(), top_exp.clone()),
        });
    }

    let witness = WitnessMap {
        stage: "compact".to_string(),
        equisat_only: true,
        forward: RationalMap {
            n_in: n,
            components,
        },
        backward: AffineProjection::truncating(out.n_vars(), n),
    };
    let report = PassReport::new("compact", input_length, n, &out, Some(k), started);
    Ok((out, witness, report))
}

/// Applies the forward extension to a known solution of the input, verifying
/// that the solution lies within the constructed bound. Needs the chain
/// constants materialized, so the tower height must be small.
pub fn extend_solution(
    output: &Instance,
    witness: &WitnessMap,
    point: &[Rat],
) -> Result<Vec<Rat>> {
    let image = witness.forward_apply(point)?;
    for c in &output.constraints {
        if let Constraint::GeqZero(v) = *c {
            if num_traits::Signed::is_negative(&image[v]) {
                return Err(Error::OutOfBound(format!(
                    "witness out of constructed bound: {} = {}",
                    output.vars.name(v),
                    crate::rational::format_rat(&image[v])
                )));
            }
        }
    }
    Ok(image)
}
