//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! The canonical form is a sorted monomial map with no zero coefficients and
//! no duplicate monomials; equality is structural equality of that map.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{format_rat, Rat};

/// Product of variable powers, sorted by variable index, exponents >= 1.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(pub Vec<(u32, u32)>);

impl Monomial {
    pub fn unit() -> Monomial {
        Monomial(Vec::new())
    }

    pub fn var(idx: u32) -> Monomial {
        Monomial(vec![(idx, 1)])
    }

    pub fn is_unit(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out: Vec<(u32, u32)> = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            let (va, ea) = self.0[i];
            let (vb, eb) = other.0[j];
            match va.cmp(&vb) {
                std::cmp::Ordering::Less => {
                    out.push((va, ea));
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push((vb, eb));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((va, ea + eb));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Hash)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, Rat>,
}

impl Polynomial {
    pub fn zero() -> Polynomial {
        Polynomial::default()
    }

    pub fn one() -> Polynomial {
        Polynomial::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Polynomial {
        let mut p = Polynomial::default();
        if !c.is_zero() {
            p.terms.insert(Monomial::unit(), c);
        }
        p
    }

    pub fn var(idx: usize) -> Polynomial {
        let mut p = Polynomial::default();
        p.terms.insert(Monomial::var(idx as u32), Rat::one());
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, Rat)>) -> Polynomial {
        let mut p = Polynomial::default();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().map(|c| c.is_one()).unwrap_or(false)
    }

    /// Some(c) iff the polynomial is the constant c (including 0).
    pub fn as_constant(&self) -> Option<Rat> {
        match self.terms.len() {
            0 => Some(Rat::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_unit().then(|| c.clone())
            }
            _ => None,
        }
    }

    /// Some(idx) iff the polynomial is exactly one variable with coefficient 1.
    pub fn as_var(&self) -> Option<usize> {
        if self.terms.len() != 1 {
            return None;
        }
        let (m, c) = self.terms.iter().next().unwrap();
        if c.is_one() && m.0.len() == 1 && m.0[0].1 == 1 {
            Some(m.0[0].0 as usize)
        } else {
            None
        }
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Highest variable index occurring, if any.
    pub fn max_var(&self) -> Option<usize> {
        self.terms
            .keys()
            .flat_map(|m| m.0.iter().map(|&(v, _)| v as usize))
            .max()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rat {
        self.terms.get(m).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn constant_term(&self) -> Rat {
        self.coefficient(&Monomial::unit())
    }

    pub fn neg(&self) -> Polynomial {
        Polynomial {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Polynomial::default();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero();
        }
        Polynomial {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn shift(&self, c: &Rat) -> Polynomial {
        let mut out = self.clone();
        out.add_term(Monomial::unit(), c.clone());
        out
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut out = Polynomial::one();
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Least common multiple of coefficient denominators.
    pub fn denominator_lcm(&self) -> num_bigint::BigInt {
        use num_integer::Integer;
        let mut lcm = num_bigint::BigInt::one();
        for c in self.terms.values() {
            lcm = lcm.lcm(c.denom());
        }
        lcm
    }

    pub fn eval(&self, point: &[Rat]) -> Result<Rat> {
        let mut acc = Rat::zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for &(v, e) in &m.0 {
                let x = point.get(v as usize).ok_or(Error::ArityMismatch {
                    expected: v as usize + 1,
                    got: point.len(),
                })?;
                for _ in 0..e {
                    term *= x;
                }
            }
            acc += term;
        }
        Ok(acc)
    }

    /// Renumbers variables through `map`; every occurring variable must be mapped.
    pub fn map_vars(&self, map: impl Fn(usize) -> usize) -> Polynomial {
        let mut out = Polynomial::default();
        for (m, c) in &self.terms {
            let mut vars: Vec<(u32, u32)> =
                m.0.iter().map(|&(v, e)| (map(v as usize) as u32, e)).collect();
            vars.sort_unstable();
            // merge duplicates created by a non-injective map
            let mut merged: Vec<(u32, u32)> = Vec::with_capacity(vars.len());
            for (v, e) in vars {
                match merged.last_mut() {
                    Some((lv, le)) if *lv == v => *le += e,
                    _ => merged.push((v, e)),
                }
            }
            out.add_term(Monomial(merged), c.clone());
        }
        out
    }

    /// Substitutes variable `i` by the polynomial `subs[i]`.
    pub fn substitute(&self, subs: &[Polynomial]) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            let mut term = Polynomial::constant(c.clone());
            for &(v, e) in &m.0 {
                let s = &subs[v as usize];
                term = term.mul(&s.pow(e));
            }
            out = out.add(&term);
        }
        out
    }

    /// Substitutes variable `i` by the rational function `subs[i] = (num, den)`
    /// and returns the result as a (numerator, denominator) pair over a common
    /// denominator. No gcd cancellation is attempted.
    pub fn substitute_rational(&self, subs: &[(Polynomial, Polynomial)]) -> (Polynomial, Polynomial) {
        // max exponent of each variable, to build the common denominator
        let mut max_exp: BTreeMap<u32, u32> = BTreeMap::new();
        for m in self.terms.keys() {
            for &(v, e) in &m.0 {
                let cur = max_exp.entry(v).or_insert(0);
                *cur = (*cur).max(e);
            }
        }
        // skip variables whose substitute has denominator 1
        max_exp.retain(|v, _| !subs[*v as usize].1.is_one());
        let mut den = Polynomial::one();
        for (&v, &e) in &max_exp {
            den = den.mul(&subs[v as usize].1.pow(e));
        }
        let mut num = Polynomial::zero();
        for (m, c) in &self.terms {
            let mut term = Polynomial::constant(c.clone());
            let mut seen: BTreeMap<u32, u32> = BTreeMap::new();
            for &(v, e) in &m.0 {
                term = term.mul(&subs[v as usize].0.pow(e));
                if max_exp.contains_key(&v) {
                    seen.insert(v, e);
                }
            }
            for (&v, &cap) in &max_exp {
                let used = seen.get(&v).copied().unwrap_or(0);
                if used < cap {
                    term = term.mul(&subs[v as usize].1.pow(cap - used));
                }
            }
            num = num.add(&term);
        }
        (num, den)
    }

    /// Renders the polynomial with the given variable names.
    pub fn display<'a>(&'a self, names: &'a [String]) -> PolyDisplay<'a> {
        PolyDisplay { poly: self, names }
    }
}

pub struct PolyDisplay<'a> {
    poly: &'a Polynomial,
    names: &'a [String],
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.poly.terms() {
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mut printed = false;
            if !mag.is_one() || m.is_unit() {
                write!(f, "{}", format_rat(&mag))?;
                printed = true;
            }
            for &(v, e) in &m.0 {
                if printed {
                    write!(f, "*")?;
                }
                let name = self
                    .names
                    .get(v as usize)
                    .map(String::as_str)
                    .unwrap_or("?");
                write!(f, "{name}")?;
                if e > 1 {
                    write!(f, "^{e}")?;
                }
                printed = true;
            }
        }
        Ok(())
    }
}
