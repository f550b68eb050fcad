//! Core data model: fragments, formulas, structured constraints, instances.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::rational::{format_rat, Rat};

/// Which stage of the lowering chain an instance belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Fragment {
    Etr,
    Conj,
    Compact,
    Ami,
    Small,
    Shift,
    Square,
    Inv,
}

impl Fragment {
    pub fn name(self) -> &'static str {
        match self {
            Fragment::Etr => "etr",
            Fragment::Conj => "conj",
            Fragment::Compact => "compact",
            Fragment::Ami => "ami",
            Fragment::Small => "small",
            Fragment::Shift => "shift",
            Fragment::Square => "square",
            Fragment::Inv => "inv",
        }
    }

    pub fn parse(s: &str) -> Option<Fragment> {
        Some(match s {
            "etr" => Fragment::Etr,
            "conj" => Fragment::Conj,
            "compact" => Fragment::Compact,
            "ami" => Fragment::Ami,
            "small" => Fragment::Small,
            "shift" => Fragment::Shift,
            "square" => Fragment::Square,
            "inv" => Fragment::Inv,
            _ => return None,
        })
    }

    /// True for the stages whose variables live in explicit intervals.
    pub fn has_intervals(self) -> bool {
        matches!(self, Fragment::Shift | Fragment::Square | Fragment::Inv)
    }
}

impl fmt::Display for Fragment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Variable names in declaration order; indices are positions in this list.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VarTable {
    names: Vec<String>,
    index: BTreeMap<String, usize>,
}

impl VarTable {
    pub fn new() -> VarTable {
        VarTable::default()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.names[idx]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn lookup(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Returns the index of `name`, inserting it if new.
    pub fn intern(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), i);
        i
    }
}

/// Comparison against zero in an atomic predicate `p <op> 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomKind {
    Eq,
    Geq,
    Gt,
}

/// Quantifier-free formula over polynomial atoms.
#[derive(Debug, Clone, PartialEq)]
pub enum FormulaNode {
    Atom(AtomKind, Polynomial),
    Conj(Vec<FormulaNode>),
    Disj(Vec<FormulaNode>),
    Neg(Box<FormulaNode>),
}

impl FormulaNode {
    pub fn truth() -> FormulaNode {
        FormulaNode::Conj(Vec::new())
    }

    pub fn eval(&self, point: &[Rat]) -> Result<bool> {
        Ok(match self {
            FormulaNode::Atom(kind, p) => {
                let v = p.eval(point)?;
                match kind {
                    AtomKind::Eq => v.is_zero(),
                    AtomKind::Geq => !v.is_negative(),
                    AtomKind::Gt => v.is_positive(),
                }
            }
            FormulaNode::Conj(parts) => {
                for part in parts {
                    if !part.eval(point)? {
                        return Ok(false);
                    }
                }
                true
            }
            FormulaNode::Disj(parts) => {
                let mut any = false;
                for part in parts {
                    if part.eval(point)? {
                        any = true;
                    }
                }
                any
            }
            FormulaNode::Neg(inner) => !inner.eval(point)?,
        })
    }

    pub fn for_each_atom<'a>(&'a self, f: &mut impl FnMut(AtomKind, &'a Polynomial)) {
        match self {
            FormulaNode::Atom(kind, p) => f(*kind, p),
            FormulaNode::Conj(parts) | FormulaNode::Disj(parts) => {
                for part in parts {
                    part.for_each_atom(f);
                }
            }
            FormulaNode::Neg(inner) => inner.for_each_atom(f),
        }
    }

    pub fn atom_count(&self) -> usize {
        let mut n = 0;
        self.for_each_atom(&mut |_, _| n += 1);
        n
    }

    pub fn max_var(&self) -> Option<usize> {
        let mut max = None;
        self.for_each_atom(&mut |_, p| {
            if let Some(v) = p.max_var() {
                max = Some(max.map_or(v, |m: usize| m.max(v)));
            }
        });
        max
    }
}

/// Structured constraint forms used from the conjunctive stage onward.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Constraint {
    /// p = 0 for an arbitrary polynomial (conjunctive stage only).
    PolyEq(Polynomial),
    /// x >= 0.
    GeqZero(usize),
    /// x + y = z.
    PlusEq(usize, usize, usize),
    /// x * y = z.
    TimesEq(usize, usize, usize),
    /// x^2 = y.
    SquareEq(usize, usize),
    /// 1/x = y.
    InvEq(usize, usize),
    /// x = 1.
    EqOne(usize),
    /// x = delta (the instance's scale parameter).
    EqDelta(usize),
}

impl Constraint {
    pub fn vars(&self) -> Vec<usize> {
        match *self {
            Constraint::PolyEq(ref p) => {
                let mut vs = Vec::new();
                p.terms().for_each(|(m, _)| {
                    for &(v, _) in &m.0 {
                        vs.push(v as usize);
                    }
                });
                vs.sort_unstable();
                vs.dedup();
                vs
            }
            Constraint::GeqZero(x) | Constraint::EqOne(x) | Constraint::EqDelta(x) => vec![x],
            Constraint::SquareEq(x, y) | Constraint::InvEq(x, y) => vec![x, y],
            Constraint::PlusEq(x, y, z) | Constraint::TimesEq(x, y, z) => vec![x, y, z],
        }
    }

    pub fn holds(&self, point: &[Rat], delta: Option<&Rat>) -> Result<bool> {
        let get = |i: usize| -> Result<&Rat> {
            point.get(i).ok_or(Error::ArityMismatch {
                expected: i + 1,
                got: point.len(),
            })
        };
        Ok(match *self {
            Constraint::PolyEq(ref p) => p.eval(point)?.is_zero(),
            Constraint::GeqZero(x) => !get(x)?.is_negative(),
            Constraint::PlusEq(x, y, z) => get(x)? + get(y)? == *get(z)?,
            Constraint::TimesEq(x, y, z) => get(x)? * get(y)? == *get(z)?,
            Constraint::SquareEq(x, y) => get(x)? * get(x)? == *get(y)?,
            Constraint::InvEq(x, y) => {
                let xv = get(x)?;
                !xv.is_zero() && xv * get(y)? == Rat::one()
            }
            Constraint::EqOne(x) => get(x)?.is_one(),
            Constraint::EqDelta(x) => {
                let d = delta.ok_or_else(|| {
                    Error::Param("constraint references delta but the instance has none".into())
                })?;
                get(x)? == d
            }
        })
    }
}

/// Closed interval with rational endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: Rat,
    pub hi: Rat,
}

impl Interval {
    pub fn new(lo: Rat, hi: Rat) -> Interval {
        Interval { lo, hi }
    }

    pub fn point(v: Rat) -> Interval {
        Interval { lo: v.clone(), hi: v }
    }

    pub fn width(&self) -> Rat {
        &self.hi - &self.lo
    }

    pub fn contains(&self, v: &Rat) -> bool {
        self.lo <= *v && *v <= self.hi
    }

    pub fn subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    /// Strict containment in the open interval (other.lo, other.hi).
    pub fn inside_open(&self, other: &Interval) -> bool {
        other.lo < self.lo && self.hi < other.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", format_rat(&self.lo), format_rat(&self.hi))
    }
}

/// Degree-2 rational expression of a final-stage variable in terms of one or
/// two original (zero-centered) source values.
///
/// The value is (a1 s^2 + a2 s t + a3 t^2 + a4 s + a5 t + a6) /
/// (b1 s^2 + b2 s t + b3 t^2 + b4 s + b5 t + b6), where `s`, `t` are the
/// values of `sources[0]`, `sources[1]`. With a single source, the `t` terms
/// are zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarAnnotation {
    pub sources: Vec<String>,
    pub num: [Rat; 6],
    pub den: [Rat; 6],
    /// The source is additionally known to be nonnegative (not just in
    /// [-delta, delta]).
    pub nonneg_source: bool,
    pub note: String,
}

impl VarAnnotation {
    pub fn constant(c: Rat, note: &str) -> VarAnnotation {
        let mut num = zero6();
        num[5] = c;
        VarAnnotation {
            sources: Vec::new(),
            num,
            den: one_den(),
            nonneg_source: false,
            note: note.to_string(),
        }
    }

    /// s + center for a single zero-centered source.
    pub fn shifted(source: &str, center: Rat) -> VarAnnotation {
        let mut num = zero6();
        num[3] = Rat::one();
        num[5] = center;
        VarAnnotation {
            sources: vec![source.to_string()],
            num,
            den: one_den(),
            nonneg_source: false,
            note: String::new(),
        }
    }

    pub fn has_trivial_den(&self) -> bool {
        self.den[..5].iter().all(Rat::is_zero) && self.den[5].is_one()
    }

    pub fn eval(&self, src: &[Rat]) -> Result<Rat> {
        if src.len() != self.sources.len() {
            return Err(Error::ArityMismatch {
                expected: self.sources.len(),
                got: src.len(),
            });
        }
        let zero = Rat::zero();
        let s = src.first().unwrap_or(&zero);
        let t = src.get(1).unwrap_or(&zero);
        let eval6 = |c: &[Rat; 6]| -> Rat {
            &c[0] * s * s + &c[1] * s * t + &c[2] * t * t + &c[3] * s + &c[4] * t + &c[5]
        };
        let n = eval6(&self.num);
        let d = eval6(&self.den);
        if d.is_zero() {
            return Err(Error::DenominatorZero {
                component: format!("annotation over {:?}", self.sources),
            });
        }
        Ok(n / d)
    }
}

pub fn zero6() -> [Rat; 6] {
    [
        Rat::zero(),
        Rat::zero(),
        Rat::zero(),
        Rat::zero(),
        Rat::zero(),
        Rat::zero(),
    ]
}

pub fn one_den() -> [Rat; 6] {
    let mut d = zero6();
    d[5] = Rat::one();
    d
}

/// Complete problem instance at any stage of the chain.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub fragment: Fragment,
    pub vars: VarTable,
    /// General formula (used by the unstructured front-end stage).
    pub formula: Option<FormulaNode>,
    /// Structured constraints (used from the conjunctive stage onward).
    pub constraints: Vec<Constraint>,
    /// Scale parameter, where the fragment has one.
    pub delta: Option<Rat>,
    /// Per-variable range promises (interval stages only), indexed like vars.
    pub intervals: Vec<Option<Interval>>,
    /// Per-variable provenance annotations, indexed like vars.
    pub annotations: Vec<Option<VarAnnotation>>,
    /// Scale parameter of the stage the annotation sources live in.
    pub ann_source_delta: Option<Rat>,
}

impl Instance {
    pub fn new(fragment: Fragment) -> Instance {
        Instance {
            fragment,
            vars: VarTable::new(),
            formula: None,
            constraints: Vec::new(),
            delta: None,
            intervals: Vec::new(),
            annotations: Vec::new(),
            ann_source_delta: None,
        }
    }

    pub fn n_vars(&self) -> usize {
        self.vars.len()
    }

    /// Wraps a parsed formula as a front-end instance.
    pub fn from_formula(f: FormulaNode, vars: VarTable) -> Instance {
        let mut inst = Instance::new(Fragment::Etr);
        inst.vars = vars;
        inst.formula = Some(f);
        inst.sync_per_var();
        inst
    }

    fn sync_per_var(&mut self) {
        self.intervals.resize(self.vars.len(), None);
        self.annotations.resize(self.vars.len(), None);
    }

    pub fn add_var(&mut self, name: &str) -> usize {
        let i = self.vars.intern(name);
        self.sync_per_var();
        i
    }

    /// Checks whether `point` (indexed like vars) satisfies the instance,
    /// including any interval promises.
    pub fn check_point(&self, point: &[Rat]) -> Result<bool> {
        if point.len() != self.n_vars() {
            return Err(Error::ArityMismatch {
                expected: self.n_vars(),
                got: point.len(),
            });
        }
        for (i, iv) in self.intervals.iter().enumerate() {
            if let Some(iv) = iv {
                if !iv.contains(&point[i]) {
                    return Ok(false);
                }
            }
        }
        if let Some(f) = &self.formula {
            if !f.eval(point)? {
                return Ok(false);
            }
        }
        for c in &self.constraints {
            if !c.holds(point, self.delta.as_ref())? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}
