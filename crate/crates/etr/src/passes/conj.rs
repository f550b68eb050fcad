//! Lowering from arbitrary quantifier-free formulas to conjunctions of
//! polynomial equations and variable nonnegativity constraints.
//!
//! Four rewrites, applied in order:
//!   1. negations are pushed onto atoms and eliminated (`~(q > 0)` becomes
//!      `-q >= 0`, `~(q = 0)` becomes `q > 0 \/ -q > 0`, `~(q >= 0)` becomes
//!      `-q > 0`);
//!   2. each strict atom `q > 0` becomes `q*z - 1 = 0` with a fresh `z >= 0`
//!      appended (witness value z = 1/q);
//!   3. each atom `q >= 0` becomes `q - z = 0` with a fresh `z >= 0`
//!      appended (witness value z = q);
//!   4. disjunctions collapse to products (`p = 0 \/ q = 0` becomes
//!      `p*q = 0`), and conjunctions beneath a disjunction collapse through
//!      fresh variables pinned to the conjunct values (`u*u + v*v = 0` with
//!      `p - u = 0`, `q - v = 0` appended).
//!
//! The backward witness is the projection onto the original variables.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::formula::{AtomKind, Constraint, FormulaNode, Fragment, Instance};
use crate::length::instance_length;
use crate::poly::Polynomial;
use crate::witness::{AffineProjection, ForwardComponent, RationalMap, WitnessMap};

use super::{add_unique_var, PassReport};

pub fn to_conj(input: &Instance) -> Result<(Instance, WitnessMap, PassReport)> {
    let started = Instant::now();
    if input.fragment != Fragment::Etr {
        return Err(Error::Fragment(format!(
            "conjunctive lowering expects a front-end instance, got {}",
            input.fragment
        )));
    }
    let formula = input
        .formula
        .clone()
        .ok_or_else(|| Error::Fragment("front-end instance has no formula".into()))?;
    let input_length = instance_length(input);
    let n = input.n_vars();

    let mut out = Instance::new(Fragment::Conj);
    for name in input.vars.names() {
        out.add_var(name);
    }

    let mut st = State {
        out,
        // Rational function of each variable over the originals.
        subs: (0..n)
            .map(|i| (Polynomial::var(i), Polynomial::one()))
            .collect(),
        pending_nonneg: Vec::new(),
        counter: 0,
    };

    let f = nnf(&formula, false);
    let f = st.delete_inequalities(f);
    st.emit_top(f);
    for z in std::mem::take(&mut st.pending_nonneg) {
        st.out.constraints.push(Constraint::GeqZero(z));
    }

    let State { out, subs, .. } = st;
    let components = subs
        .into_iter()
        .map(|(num, den)| ForwardComponent {
            scale: crate::rational::Dyadic::one(),
            num,
            den,
            shift: crate::rational::Dyadic::zero(),
        })
        .collect();
    let witness = WitnessMap {
        stage: "conj".to_string(),
        equisat_only: false,
        forward: RationalMap {
            n_in: n,
            components,
        },
        backward: AffineProjection::truncating(out.n_vars(), n),
    };
    let report = PassReport::new("conj", input_length, n, &out, None, started);
    Ok((out, witness, report))
}

/// Pushes negations down to atoms and replaces negated atoms.
fn nnf(f: &FormulaNode, negated: bool) -> FormulaNode {
    match f {
        FormulaNode::Neg(inner) => nnf(inner, !negated),
        FormulaNode::Conj(parts) => {
            let parts = parts.iter().map(|p| nnf(p, negated)).collect();
            if negated {
                FormulaNode::Disj(parts)
            } else {
                FormulaNode::Conj(parts)
            }
        }
        FormulaNode::Disj(parts) => {
            let parts = parts.iter().map(|p| nnf(p, negated)).collect();
            if negated {
                FormulaNode::Conj(parts)
            } else {
                FormulaNode::Disj(parts)
            }
        }
        FormulaNode::Atom(kind, p) => {
            if !negated {
                return f.clone();
            }
            match kind {
                AtomKind::Gt => FormulaNode::Atom(AtomKind::Geq, p.neg()),
                AtomKind::Geq => FormulaNode::Atom(AtomKind::Gt, p.neg()),
                AtomKind::Eq => FormulaNode::Disj(vec![
                    FormulaNode::Atom(AtomKind::Gt, p.clone()),
                    FormulaNode::Atom(AtomKind::Gt, p.neg()),
                ]),
            }
        }
    }
}

struct State {
    out: Instance,
    subs: Vec<(Polynomial, Polynomial)>,
    pending_nonneg: Vec<usize>,
    counter: usize,
}

impl State {
    /// Fresh variable whose value on the input variety is num/den.
    fn fresh(&mut self, num: Polynomial, den: Polynomial) -> usize {
        self.counter += 1;
        let idx = add_unique_var(&mut self.out, &format!("z{}", self.counter));
        debug_assert_eq!(idx, self.subs.len());
        self.subs.push((num, den));
        idx
    }

    /// Steps 2 and 3: only equational atoms remain afterwards. The rewritten
    /// atoms mention fresh variables; the fresh variables' values are
    /// rational functions of the originals.
    fn delete_inequalities(&mut self, f: FormulaNode) -> FormulaNode {
        match f {
            FormulaNode::Atom(AtomKind::Gt, q) => {
                let z = self.fresh(Polynomial::one(), q.clone());
                self.pending_nonneg.push(z);
                let p = q.mul(&Polynomial::var(z)).sub(&Polynomial::one());
                FormulaNode::Atom(AtomKind::Eq, p)
            }
            FormulaNode::Atom(AtomKind::Geq, q) => {
                let z = self.fresh(q.clone(), Polynomial::one());
                self.pending_nonneg.push(z);
                FormulaNode::Atom(AtomKind::Eq, q.sub(&Polynomial::var(z)))
            }
            FormulaNode::Atom(AtomKind::Eq, _) => f,
            FormulaNode::Conj(parts) => FormulaNode::Conj(
                parts
                    .into_iter()
                    .map(|p| self.delete_inequalities(p))
                    .collect(),
            ),
            FormulaNode::Disj(parts) => FormulaNode::Disj(
                parts
                    .into_iter()
                    .map(|p| self.delete_inequalities(p))
                    .collect(),
            ),
            FormulaNode::Neg(_) => unreachable!("negations were eliminated"),
        }
    }

    /// Top-level conjunction: each conjunct becomes one equation.
    fn emit_top(&mut self, f: FormulaNode) {
        match f {
            FormulaNode::Conj(parts) => {
                for p in parts {
                    self.emit_top(p);
                }
            }
            FormulaNode::Atom(AtomKind::Eq, p) => {
                self.out.constraints.push(Constraint::PolyEq(p));
            }
            other => {
                let p = self.collapse(other);
                self.out.constraints.push(Constraint::PolyEq(p));
            }
        }
    }

    /// Single polynomial p with p = 0 equivalent to the subformula, valid
    /// beneath a disjunction. Side equations are appended to the output.
    fn collapse(&mut self, f: FormulaNode) -> Polynomial {
        match f {
            FormulaNode::Atom(AtomKind::Eq, p) => p,
            FormulaNode::Disj(parts) => {
                let mut acc = Polynomial::one();
                for p in parts {
                    let q = self.collapse(p);
                    acc = acc.mul(&q);
                }
                acc
            }
            FormulaNode::Conj(parts) => {
                let mut iter = parts.into_iter();
                let mut acc = match iter.next() {
                    Some(p) => self.collapse(p),
                    None => return Polynomial::zero(),
                };
                for p in iter {
                    let q = self.collapse(p);
                    let u = self.pin(&acc);
                    let v = self.pin(&q);
                    acc = Polynomial::var(u)
                        .mul(&Polynomial::var(u))
                        .add(&Polynomial::var(v).mul(&Polynomial::var(v)));
                }
                acc
            }
            other => unreachable!("unexpected node after steps 1-3: {other:?}"),
        }
    }

    /// Fresh variable pinned to the value of `p` by an appended equation.
    fn pin(&mut self, p: &Polynomial) -> usize {
        let (num, den) = p.substitute_rational(&self.subs);
        let u = self.fresh(num, den);
        self.out
            .constraints
            .push(Constraint::PolyEq(p.sub(&Polynomial::var(u))));
        u
    }
}
