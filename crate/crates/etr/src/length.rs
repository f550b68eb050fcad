//! Symbol-count measure used for size bounds.
//!
//! Every variable occurrence, operator, comparison, and connective counts as
//! one symbol; an integer coefficient or constant with absolute value k >= 1
//! counts as the number of binary digits of k, and 0 counts as one symbol.
//! An atom is measured on its normalized form `p <op> 0`, e.g. x + y - z = 0
//! has length 8. Structured constraints are measured the same way: a ternary
//! arithmetic constraint has length 6, a unary one length 4.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::formula::{Constraint, FormulaNode, Instance};
use crate::poly::Polynomial;
use crate::rational::Rat;

fn int_symbols(k: &BigInt) -> u64 {
    if k.is_zero() {
        1
    } else {
        k.abs().bits()
    }
}

fn rat_symbols(c: &Rat) -> u64 {
    use num_traits::One;
    let n = int_symbols(c.numer());
    if c.denom().is_one() {
        n
    } else {
        // fraction bar plus denominator digits
        n + 1 + int_symbols(c.denom())
    }
}

/// Symbols in `p` rendered as a sign-separated sum of monomials.
pub fn poly_length(p: &Polynomial) -> u64 {
    if p.is_zero() {
        return 1;
    }
    let mut total = 0u64;
    let mut first = true;
    for (m, c) in p.terms() {
        if !first {
            total += 1; // + or - between terms
        } else {
            if c.is_negative() {
                total += 1; // leading sign
            }
            first = false;
        }
        use num_traits::One;
        let mag = c.abs();
        let coeff_is_one = mag.is_one();
        if !coeff_is_one || m.is_unit() {
            total += rat_symbols(&mag);
        }
        for &(_, e) in &m.0 {
            total += 1; // the variable; implicit multiplication is free
            if e > 1 {
                total += 1 + int_symbols(&BigInt::from(e)); // ^ and exponent digits
            }
        }
    }
    total
}

/// Symbols in an atom `p <op> 0`: the polynomial, the comparator, the zero,
/// and one delimiter closing the atom.
pub fn atom_length(p: &Polynomial) -> u64 {
    poly_length(p) + 3
}

pub fn formula_length(f: &FormulaNode) -> u64 {
    match f {
        FormulaNode::Atom(_, p) => atom_length(p),
        FormulaNode::Conj(parts) | FormulaNode::Disj(parts) => {
            let inner: u64 = parts.iter().map(formula_length).sum();
            inner + parts.len().saturating_sub(1) as u64
        }
        FormulaNode::Neg(inner) => 1 + formula_length(inner),
    }
}

/// Symbols in a structured constraint, measured on its normalized rendering
/// with the same per-atom delimiter as `atom_length`.
pub fn constraint_length(c: &Constraint, delta: Option<&Rat>) -> u64 {
    match c {
        Constraint::PolyEq(p) => atom_length(p),
        // x >= 0 and x = 1
        Constraint::GeqZero(_) | Constraint::EqOne(_) => 4,
        // x + y = z, x * y = z, x * x = y, x * y = 1
        Constraint::PlusEq(..)
        | Constraint::TimesEq(..)
        | Constraint::SquareEq(..)
        | Constraint::InvEq(..) => 6,
        Constraint::EqDelta(_) => 3 + delta.map(rat_symbols).unwrap_or(1),
    }
}

/// Total symbol count of an instance, whichever representation it uses.
pub fn instance_length(inst: &Instance) -> u64 {
    let mut total = 0u64;
    if let Some(f) = &inst.formula {
        total += formula_length(f);
    }
    for c in &inst.constraints {
        total += constraint_length(c, inst.delta.as_ref());
    }
    total
}
