//! Flattening pass: conjunctive polynomial equations become chains of
//! `x + y = z`, `x * y = z`, `x >= 0`, `x = 1`.
//!
//! Constants are built once per instance: 1 directly, 0 from 1 + 0 = 1,
//! -1 from 1 + (-1) = 0, and larger integers by binary doubling-and-adding.
//! Rational coefficients are cleared per equation by scaling with the common
//! denominator. Every product and partial sum gets a fresh variable pinned by
//! a defining constraint; the terminal equation s = 0 becomes s + 0 = 0.

use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::formula::{Constraint, Fragment, Instance};
use crate::length::instance_length;
use crate::poly::{Monomial, Polynomial};
use crate::rational::Rat;
use crate::validate::validate_fragment;
use crate::witness::{AffineProjection, ForwardComponent, RationalMap, WitnessMap};

use super::{add_unique_var, PassReport};

pub fn to_ami(input: &Instance) -> Result<(Instance, WitnessMap, PassReport)> {
    let started = Instant::now();
    if !matches!(input.fragment, Fragment::Conj | Fragment::Compact) {
        return Err(Error::Fragment(format!(
            "flattening expects a conjunctive instance, got {}",
            input.fragment
        )));
    }
    if let Some(v) = validate_fragment(input).first() {
        return Err(Error::Fragment(v.what.clone()));
    }
    let input_length = instance_length(input);
    let n = input.n_vars();

    let mut out = Instance::new(Fragment::Ami);
    for name in input.vars.names() {
        out.add_var(name);
    }
    let mut st = State {
        out,
        defs: (0..n).map(Polynomial::var).collect(),
        one: None,
        zero: None,
        neg_one: None,
        ints: std::collections::BTreeMap::new(),
        powers: std::collections::BTreeMap::new(),
    };

    for c in &input.constraints {
        match c {
            Constraint::GeqZero(x) => st.out.constraints.push(Constraint::GeqZero(*x)),
            Constraint::PolyEq(p) => st.flatten_equation(p)?,
            other => {
                return Err(Error::Fragment(format!(
                    "unexpected constraint {other:?} in conjunctive instance"
                )))
            }
        }
    }

    let State { out, defs, .. } = st;
    let witness = WitnessMap {
        stage: "ami".to_string(),
        equisat_only: false,
        forward: RationalMap {
            n_in: n,
            components: defs.into_iter().map(ForwardComponent::poly).collect(),
        },
        backward: AffineProjection::truncating(out.n_vars(), n),
    };
    let report = PassReport::new("ami", input_length, n, &out, None, started);
    Ok((out, witness, report))
}

struct State {
    out: Instance,
    /// Defining polynomial of every output variable over the input variables.
    defs: Vec<Polynomial>,
    one: Option<usize>,
    zero: Option<usize>,
    neg_one: Option<usize>,
    ints: std::collections::BTreeMap<BigInt, usize>,
    powers: std::collections::BTreeMap<(usize, u32), usize>,
}

impl State {
    fn fresh(&mut self, base: &str, def: Polynomial) -> usize {
        let idx = add_unique_var(&mut self.out, base);
        debug_assert_eq!(idx, self.defs.len());
        self.defs.push(def);
        idx
    }

    fn one(&mut self) -> usize {
        if let Some(v) = self.one {
            return v;
        }
        let v = self.fresh("[1]", Polynomial::one());
        self.out.constraints.push(Constraint::EqOne(v));
        self.one = Some(v);
        v
    }

    fn zero(&mut self) -> usize {
        if let Some(v) = self.zero {
            return v;
        }
        let one = self.one();
        let v = self.fresh("[0]", Polynomial::zero());
        self.out.constraints.push(Constraint::PlusEq(one, v, one));
        self.zero = Some(v);
        v
    }

    fn neg_one(&mut self) -> usize {
        if let Some(v) = self.neg_one {
            return v;
        }
        let one = self.one();
        let zero = self.zero();
        let v = self.fresh("[-1]", Polynomial::constant(-Rat::one()));
        self.out.constraints.push(Constraint::PlusEq(one, v, zero));
        self.neg_one = Some(v);
        v
    }

    /// Variable pinned to the integer k, built by doubling and adding along
    /// the binary digits of |k|.
    fn int_const(&mut self, k: &BigInt) -> usize {
        if let Some(&v) = self.ints.get(k) {
            return v;
        }
        let v = if k.is_zero() {
            self.zero()
        } else if k.is_one() {
            self.one()
        } else if *k == -BigInt::one() {
            self.neg_one()
        } else if k.is_negative() {
            let pos = self.int_const(&-k);
            let neg1 = self.neg_one();
            let v = self.fresh(
                &format!("[{k}]"),
                Polynomial::constant(Rat::from_integer(k.clone())),
            );
            self.out.constraints.push(Constraint::TimesEq(pos, neg1, v));
            v
        } else {
            let bits: Vec<bool> = (0..k.bits()).rev().map(|i| k.bit(i)).collect();
            let mut acc = self.one();
            let mut val = BigInt::one();
            for &bit in &bits[1..] {
                val = &val * 2;
                acc = if let Some(&v) = self.ints.get(&val) {
                    v
                } else {
                    let doubled = self.named_int(&val);
                    self.out
                        .constraints
                        .push(Constraint::PlusEq(acc, acc, doubled));
                    doubled
                };
                if bit {
                    val += 1;
                    acc = if let Some(&v) = self.ints.get(&val) {
                        v
                    } else {
                        let one = self.one();
                        let next = self.named_int(&val);
                        self.out
                            .constraints
                            .push(Constraint::PlusEq(acc, one, next));
                        next
                    };
                }
            }
            acc
        };
        self.ints.insert(k.clone(), v);
        v
    }

    fn named_int(&mut self, val: &BigInt) -> usize {
        if let Some(&v) = self.ints.get(val) {
            return v;
        }
        let v = self.fresh(
            &format!("[{val}]"),
            Polynomial::constant(Rat::from_integer(val.clone())),
        );
        self.ints.insert(val.clone(), v);
        v
    }

    /// Variable equal to x^e, via squaring chains.
    fn power(&mut self, x: usize, e: u32) -> usize {
        if e == 1 {
            return x;
        }
        if let Some(&v) = self.powers.get(&(x, e)) {
            return v;
        }
        let v = if e % 2 == 0 {
            let h = self.power(x, e / 2);
            let v = self.fresh(
                &format!("[{}^{e}]", self.out.vars.name(x).to_string()),
                self.defs[h].mul(&self.defs[h]),
            );
            self.out.constraints.push(Constraint::TimesEq(h, h, v));
            v
        } else {
            let h = self.power(x, e - 1);
            let v = self.fresh(
                &format!("[{}^{e}]", self.out.vars.name(x).to_string()),
                self.defs[h].mul(&self.defs[x]),
            );
            self.out.constraints.push(Constraint::TimesEq(h, x, v));
            v
        };
        self.powers.insert((x, e), v);
        v
    }

    /// Variable equal to the monomial (a product of variable powers).
    fn monomial(&mut self, m: &Monomial) -> usize {
        let mut acc: Option<usize> = None;
        for &(x, e) in &m.0 {
            let p = self.power(x as usize, e);
            acc = Some(match acc {
                None => p,
                Some(a) => {
                    let v = self.fresh("[prod]", self.defs[a].mul(&self.defs[p]));
                    self.out.constraints.push(Constraint::TimesEq(a, p, v));
                    v
                }
            });
        }
        acc.unwrap_or_else(|| self.one())
    }

    /// Variable equal to c * m for an integer coefficient c.
    fn term(&mut self, c: &BigInt, m: &Monomial) -> usize {
        if m.is_unit() {
            return self.int_const(c);
        }
        let mv = self.monomial(m);
        if c.is_one() {
            return mv;
        }
        let cv = self.int_const(c);
        let def = self.defs[mv].scale(&Rat::from_integer(c.clone()));
        let v = self.fresh("[term]", def);
        self.out.constraints.push(Constraint::TimesEq(cv, mv, v));
        v
    }

    fn flatten_equation(&mut self, p: &Polynomial) -> Result<()> {
        if p.is_zero() {
            return Ok(());
        }
        // Clear denominators; p = 0 iff lcm * p = 0.
        let lcm = p.denominator_lcm();
        let scaled = p.scale(&Rat::from_integer(lcm));

        let mut term_vars = Vec::new();
        for (m, c) in scaled.terms() {
            let c_int = c.to_integer();
            term_vars.push(self.term(&c_int, m));
        }
        let mut sum = term_vars[0];
        for &t in &term_vars[1..] {
            let def = self.defs[sum].add(&self.defs[t]);
            let v = self.fresh("[sum]", def);
            self.out.constraints.push(Constraint::PlusEq(sum, t, v));
            sum = v;
        }
        let zero = self.zero();
        self.out
            .constraints
            .push(Constraint::PlusEq(sum, zero, zero));
        Ok(())
    }
}
