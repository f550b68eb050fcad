//! Static well-formedness checks per fragment.

use num_traits::{One, Signed};

use crate::formula::{AtomKind, Constraint, Fragment, Instance, Interval};
use crate::rational::{rat_int, Rat};

/// A single well-formedness problem found in an instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub what: String,
}

impl Violation {
    fn new(what: impl Into<String>) -> Violation {
        Violation { what: what.into() }
    }
}

fn allowed_constraint(fragment: Fragment, c: &Constraint) -> bool {
    match fragment {
        Fragment::Etr => false,
        Fragment::Conj | Fragment::Compact => {
            matches!(c, Constraint::PolyEq(_) | Constraint::GeqZero(_))
        }
        Fragment::Ami => matches!(
            c,
            Constraint::PlusEq(..)
                | Constraint::TimesEq(..)
                | Constraint::GeqZero(_)
                | Constraint::EqOne(_)
        ),
        Fragment::Small => matches!(
            c,
            Constraint::PlusEq(..)
                | Constraint::TimesEq(..)
                | Constraint::GeqZero(_)
                | Constraint::EqDelta(_)
        ),
        Fragment::Shift | Fragment::Square => matches!(
            c,
            Constraint::PlusEq(..)
                | Constraint::TimesEq(..)
                | Constraint::SquareEq(..)
        ) && !(fragment == Fragment::Shift && matches!(c, Constraint::SquareEq(..))),
        Fragment::Inv => matches!(c, Constraint::PlusEq(..) | Constraint::InvEq(..)),
    }
}

/// Validates fragment-specific structural rules, returning all violations.
pub fn validate_fragment(inst: &Instance) -> Vec<Violation> {
    let mut out = Vec::new();
    let frag = inst.fragment;

    if frag == Fragment::Etr {
        if inst.formula.is_none() {
            out.push(Violation::new("front-end instance has no formula"));
        }
        if !inst.constraints.is_empty() {
            out.push(Violation::new(
                "front-end instance must not carry structured constraints",
            ));
        }
    } else {
        if inst.formula.is_some() {
            out.push(Violation::new(format!(
                "{frag} instance must use structured constraints, not a formula"
            )));
        }
        for (i, c) in inst.constraints.iter().enumerate() {
            if !allowed_constraint(frag, c) {
                out.push(Violation::new(format!(
                    "constraint #{i} ({c:?}) is not allowed in fragment {frag}"
                )));
            }
            for v in c.vars() {
                if v >= inst.n_vars() {
                    out.push(Violation::new(format!(
                        "constraint #{i} references undeclared variable index {v}"
                    )));
                }
            }
        }
    }

    // Strictness: conjunctions of equations and nonneg constraints never use
    // strict comparison; the front end may.
    if frag == Fragment::Conj || frag == Fragment::Compact {
        if let Some(f) = &inst.formula {
            f.for_each_atom(&mut |kind, _| {
                if kind == AtomKind::Gt {
                    out.push(Violation::new("strict inequality in conjunctive fragment"));
                }
            });
        }
    }

    // delta presence.
    let needs_delta = matches!(
        frag,
        Fragment::Small | Fragment::Shift | Fragment::Square | Fragment::Inv
    );
    match (&inst.delta, needs_delta) {
        (None, true) => out.push(Violation::new(format!("{frag} instance requires delta"))),
        (Some(d), _) if !d.is_positive() => {
            out.push(Violation::new("delta must be positive"))
        }
        _ => {}
    }

    if frag.has_intervals() {
        validate_intervals(inst, &mut out);
    } else {
        for (i, iv) in inst.intervals.iter().enumerate() {
            if iv.is_some() {
                out.push(Violation::new(format!(
                    "variable {} carries an interval outside an interval fragment",
                    inst.vars.name(i)
                )));
            }
        }
    }

    out
}

fn validate_intervals(inst: &Instance, out: &mut Vec<Violation>) {
    let Some(delta) = inst.delta.clone() else {
        return;
    };
    let two_delta = &delta * rat_int(2);
    let full = Interval::new(crate::rational::rat(1, 2), rat_int(2));
    let tight = Interval::new(Rat::one() - &delta, Rat::one() + &delta);

    let interval_of = |v: usize| -> Option<&Interval> { inst.intervals.get(v)?.as_ref() };

    for (i, iv) in inst.intervals.iter().enumerate() {
        let name = inst.vars.name(i);
        let Some(iv) = iv else {
            out.push(Violation::new(format!("variable {name} has no interval")));
            continue;
        };
        if iv.lo > iv.hi {
            out.push(Violation::new(format!("variable {name} has an empty interval")));
        }
        if !iv.subset_of(&full) {
            out.push(Violation::new(format!(
                "interval of {name} is {iv}, not within [1/2, 2]"
            )));
        }
        if iv.width() > two_delta {
            out.push(Violation::new(format!(
                "interval of {name} is wider than 2*delta"
            )));
        }
    }

    // Multiplication and squaring operands must be promised close to 1.
    for (ci, c) in inst.constraints.iter().enumerate() {
        let operands: &[usize] = match *c {
            Constraint::TimesEq(x, y, _) => &[x, y],
            Constraint::SquareEq(x, _) => &[x],
            _ => continue,
        };
        let operands = operands.to_vec();
        for v in operands {
            match interval_of(v) {
                Some(iv) if iv.subset_of(&tight) => {}
                Some(iv) => out.push(Violation::new(format!(
                    "constraint #{ci}: operand {} has interval {iv}, not within [1-delta, 1+delta]",
                    inst.vars.name(v)
                ))),
                None => {}
            }
        }
    }
}
