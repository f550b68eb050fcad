//! Independent reference machinery for the test suite and the CLI:
//! brute-force solution search on rational grids, empirical range
//! measurement for closed forms, and seeded generators for instances with a
//! planted (known) solution.
//!
//! Nothing here is used by the lowering passes themselves; the point is to
//! have a second, much dumber opinion to hold the passes against.

use num_traits::{One, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::formula::{
    AtomKind, Constraint, FormulaNode, Fragment, Instance, Interval, VarAnnotation,
};
use crate::poly::{Monomial, Polynomial};
use crate::rational::{rat, rat_int, Rat};

/// Hard cap on the number of grid points a search may visit.
pub const GRID_CAP: usize = 1_000_000;

/// An axis-aligned rational grid: `steps + 1` equally spaced values per
/// coordinate from `lo` to `hi`, endpoints exact.
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub lo: Rat,
    pub hi: Rat,
    pub steps: usize,
}

impl GridSpec {
    pub fn symmetric(bound: Rat, steps: usize) -> GridSpec {
        GridSpec {
            lo: -bound.clone(),
            hi: bound,
            steps,
        }
    }

    pub fn axis_values(&self) -> Vec<Rat> {
        if self.steps == 0 {
            return vec![self.lo.clone()];
        }
        let width = &self.hi - &self.lo;
        (0..=self.steps)
            .map(|i| &self.lo + &width * rat(i as i64, self.steps as i64))
            .collect()
    }
}

/// Exhaustively checks every grid point against the instance and returns
/// the solutions found.
pub fn sample_solutions(inst: &Instance, grid: &GridSpec) -> Result<Vec<Vec<Rat>>> {
    let axis = grid.axis_values();
    let n = inst.n_vars();
    let total = axis.len().checked_pow(n as u32).unwrap_or(usize::MAX);
    if total > GRID_CAP {
        return Err(Error::GridCap {
            points: total,
            cap: GRID_CAP,
        });
    }
    let mut found = Vec::new();
    let mut point = vec![axis[0].clone(); n];
    let mut idx = vec![0usize; n];
    loop {
        if inst.check_point(&point)? {
            found.push(point.clone());
        }
        let mut k = 0;
        loop {
            if k == n {
                return Ok(found);
            }
            idx[k] += 1;
            if idx[k] < axis.len() {
                point[k] = axis[idx[k]].clone();
                break;
            }
            idx[k] = 0;
            point[k] = axis[0].clone();
            k += 1;
        }
        if n == 0 {
            // A zero-dimensional instance has exactly one point.
            return Ok(found);
        }
    }
}

/// Measures the range of a closed form by evaluating it on a grid over
/// `[-delta, delta]` per source (the endpoints are hit exactly). This is a
/// lower bound on the true range, so it must always sit inside the
/// certified one.
pub fn empirical_range(ann: &VarAnnotation, delta: &Rat, steps: usize) -> Result<Interval> {
    let grid = GridSpec::symmetric(delta.clone(), steps).axis_values();
    let dims = ann.sources.len();
    let mut lo: Option<Rat> = None;
    let mut hi: Option<Rat> = None;
    let mut visit = |src: &[Rat]| -> Result<()> {
        let v = ann.eval(src)?;
        if lo.as_ref().map_or(true, |l| &v < l) {
            lo = Some(v.clone());
        }
        if hi.as_ref().map_or(true, |h| &v > h) {
            hi = Some(v);
        }
        Ok(())
    };
    match dims {
        0 => visit(&[])?,
        1 => {
            for s in &grid {
                visit(std::slice::from_ref(s))?;
            }
        }
        2 => {
            for s in &grid {
                for t in &grid {
                    visit(&[s.clone(), t.clone()])?;
                }
            }
        }
        d => {
            return Err(Error::Param(format!(
                "closed forms have at most two sources, got {d}"
            )))
        }
    }
    Ok(Interval::new(lo.unwrap(), hi.unwrap()))
}

/// An instance generated together with a point that satisfies it.
#[derive(Debug, Clone)]
pub struct Planted {
    pub instance: Instance,
    pub point: Vec<Rat>,
}

/// Seeded generator for satisfiable instances of the unstructured fragment.
///
/// Every inequality atom is arranged to hold at the planted point;
/// negations wrap atoms arranged to fail; equations may be planted dead,
/// but only inside a disjunction that another branch saves. This keeps the
/// point a genuine solution while still exercising every connective.
pub fn planted_etr(n_vars: usize, n_clauses: usize, seed: u64) -> Planted {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inst = Instance::new(Fragment::Etr);
    for i in 0..n_vars {
        inst.add_var(&format!("x{}", i + 1));
    }
    let point: Vec<Rat> = (0..n_vars)
        .map(|_| rat(rng.gen_range(-8..=8), 1 << rng.gen_range(0..3)))
        .collect();

    let mut clauses = Vec::with_capacity(n_clauses);
    for _ in 0..n_clauses {
        let clause = match rng.gen_range(0..5) {
            0 => atom_true(&mut rng, &point, AtomKind::Eq),
            1 => atom_true(&mut rng, &point, AtomKind::Geq),
            2 => atom_true(&mut rng, &point, AtomKind::Gt),
            3 => {
                // not (q >= 0) with q planted negative, or not (q > 0) with
                // q planted nonpositive.
                let kind = if rng.gen_bool(0.5) {
                    AtomKind::Geq
                } else {
                    AtomKind::Gt
                };
                FormulaNode::Neg(Box::new(atom_false(&mut rng, &point, kind)))
            }
            _ => {
                // A disjunction with at least one live branch; dead
                // equations are allowed here and nowhere else.
                let live = atom_true(&mut rng, &point, AtomKind::Geq);
                let dead = atom_false(&mut rng, &point, AtomKind::Eq);
                if rng.gen_bool(0.5) {
                    FormulaNode::Disj(vec![dead, live])
                } else {
                    let also = atom_true(&mut rng, &point, AtomKind::Eq);
                    FormulaNode::Disj(vec![live, FormulaNode::Conj(vec![also, dead_saver(&mut rng, &point)])])
                }
            }
        };
        clauses.push(clause);
    }
    inst.formula = Some(FormulaNode::Conj(clauses));
    Planted {
        instance: inst,
        point,
    }
}

fn random_poly(rng: &mut ChaCha8Rng, n_vars: usize) -> Polynomial {
    let mut p = Polynomial::zero();
    for _ in 0..rng.gen_range(1..=2) {
        let mut m = Monomial::unit();
        for _ in 0..rng.gen_range(1..=2) {
            m = m.mul(&Monomial::var(rng.gen_range(0..n_vars) as u32));
        }
        p.add_term(m, rat(rng.gen_range(-4..=4), 1 << rng.gen_range(0..2)));
    }
    p
}

/// An atom of the given kind that holds at the point.
fn atom_true(rng: &mut ChaCha8Rng, point: &[Rat], kind: AtomKind) -> FormulaNode {
    let p = random_poly(rng, point.len());
    let v = p.eval(point).expect("polynomial evaluation is total");
    let q = match kind {
        AtomKind::Eq => p.shift(&-v),
        AtomKind::Geq => p.shift(&(rat(rng.gen_range(0..=3), 2) - v)),
        AtomKind::Gt => p.shift(&(rat(rng.gen_range(1..=4), 2) - v)),
    };
    FormulaNode::Atom(kind, q)
}

/// An atom of the given kind that fails at the point.
fn atom_false(rng: &mut ChaCha8Rng, point: &[Rat], kind: AtomKind) -> FormulaNode {
    let p = random_poly(rng, point.len());
    let v = p.eval(point).expect("polynomial evaluation is total");
    let q = match kind {
        AtomKind::Eq => p.shift(&(Rat::one() - &v)),
        AtomKind::Geq => p.shift(&(rat(-rng.gen_range(1..=4), 2) - v)),
        AtomKind::Gt => p.shift(&-v), // q = 0 at the point, not > 0
    };
    FormulaNode::Atom(kind, q)
}

fn dead_saver(rng: &mut ChaCha8Rng, point: &[Rat]) -> FormulaNode {
    atom_true(rng, point, AtomKind::Gt)
}

/// Seeded generator for satisfiable addition-multiplication instances: a
/// value pool is grown by applying the allowed operations to planted
/// values, so every emitted constraint holds by construction.
pub fn planted_ami(n_seed: usize, n_ops: usize, seed: u64) -> Planted {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inst = Instance::new(Fragment::Ami);
    let mut vals: Vec<Rat> = Vec::new();
    let push = |inst: &mut Instance, vals: &mut Vec<Rat>, base: &str, v: Rat| -> usize {
        let i = inst.add_var(&format!("{base}{}", vals.len() + 1));
        vals.push(v);
        i
    };
    let one = push(&mut inst, &mut vals, "v", Rat::one());
    inst.constraints.push(Constraint::EqOne(one));
    for _ in 0..n_seed {
        let v = rat(rng.gen_range(-6..=6), 1 << rng.gen_range(0..3));
        let i = push(&mut inst, &mut vals, "v", v.clone());
        if !v.is_negative() {
            inst.constraints.push(Constraint::GeqZero(i));
        }
    }
    for _ in 0..n_ops {
        let x = rng.gen_range(0..vals.len());
        let y = rng.gen_range(0..vals.len());
        if rng.gen_bool(0.5) {
            let v = &vals[x] + &vals[y];
            let z = push(&mut inst, &mut vals, "v", v);
            inst.constraints.push(Constraint::PlusEq(x, y, z));
        } else {
            let v = &vals[x] * &vals[y];
            let z = push(&mut inst, &mut vals, "v", v);
            inst.constraints.push(Constraint::TimesEq(x, y, z));
        }
    }
    Planted {
        instance: inst,
        point: vals,
    }
}

/// Seeded generator for satisfiable small-solution instances; all planted
/// values stay inside `[-delta, delta]` so the promise really holds.
pub fn planted_small(delta: &Rat, n_seed: usize, n_ops: usize, seed: u64) -> Planted {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inst = Instance::new(Fragment::Small);
    inst.delta = Some(delta.clone());
    let mut vals: Vec<Rat> = Vec::new();
    let push = |inst: &mut Instance, vals: &mut Vec<Rat>, v: Rat| -> usize {
        let i = inst.add_var(&format!("s{}", vals.len() + 1));
        vals.push(v);
        i
    };
    let d = push(&mut inst, &mut vals, delta.clone());
    inst.constraints.push(Constraint::EqDelta(d));
    for _ in 0..n_seed {
        // Small dyadic multiples of delta, within [-delta/2, delta/2] so
        // sums of two stay inside the promise.
        let v = delta * rat(rng.gen_range(-4..=4), 8);
        let i = push(&mut inst, &mut vals, v.clone());
        if !v.is_negative() {
            inst.constraints.push(Constraint::GeqZero(i));
        }
    }
    for _ in 0..n_ops {
        let x = rng.gen_range(0..vals.len());
        let y = rng.gen_range(0..vals.len());
        if rng.gen_bool(0.5) {
            let v = &vals[x] + &vals[y];
            if v.abs() > *delta {
                continue;
            }
            let z = push(&mut inst, &mut vals, v);
            inst.constraints.push(Constraint::PlusEq(x, y, z));
        } else {
            let v = &vals[x] * &vals[y]; // |v| <= delta^2 <= delta
            let z = push(&mut inst, &mut vals, v);
            inst.constraints.push(Constraint::TimesEq(x, y, z));
        }
    }
    Planted {
        instance: inst,
        point: vals,
    }
}

/// Planted instances of the interval stages, obtained by pushing a planted
/// small-solution instance through the corresponding passes and mapping the
/// planted point forward.
pub fn planted_interval(target: Fragment, seed: u64) -> Result<Planted> {
    use crate::passes::{inv::to_inv, shift::to_shift, square::to_square};
    let delta_small = rat(1, 1 << 20);
    let base = planted_small(&delta_small, 3, 4, seed);
    let (shifted, w1, _) = to_shift(&base.instance, &rat(5, 1 << 20))?;
    let (inst, point) = match target {
        Fragment::Shift => (shifted.clone(), w1.forward_apply(&base.point)?),
        Fragment::Square | Fragment::Inv => {
            let (squared, w2, _) = to_square(&shifted, &rat(50, 1 << 20))?;
            let w12 = crate::witness::compose(&w2, &w1)?;
            if target == Fragment::Square {
                (squared.clone(), w12.forward_apply(&base.point)?)
            } else {
                let (inv, w3, _) = to_inv(&squared, &(rat(50, 1 << 20) * rat_int(1800)))?;
                let w = crate::witness::compose(&w3, &w12)?;
                (inv, w.forward_apply(&base.point)?)
            }
        }
        other => {
            return Err(Error::Param(format!(
                "planted interval instances cover shift, square, inv; got {other}"
            )))
        }
    };
    Ok(Planted {
        instance: inst,
        point,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::range::certified_range;
    use crate::validate::validate_fragment;

    #[test]
    fn grid_search_finds_the_circle_points() {
        // x^2 + y^2 = 1 on the quarter grid: (0, ±1), (±1, 0), and the
        // (±3/5, ±4/5) family is off-grid.
        let mut inst = Instance::new(Fragment::Etr);
        inst.add_var("x");
        inst.add_var("y");
        let p = "x * x + y * y - 1";
        let (f, _) = crate::parser::parse_etr(&format!("{p} = 0")).unwrap();
        inst.formula = Some(f);
        let sols = sample_solutions(&inst, &GridSpec::symmetric(Rat::one(), 8)).unwrap();
        assert_eq!(sols.len(), 4);
    }

    #[test]
    fn grid_cap_is_enforced() {
        let mut inst = Instance::new(Fragment::Etr);
        for i in 0..8 {
            inst.add_var(&format!("x{i}"));
        }
        inst.formula = Some(FormulaNode::truth());
        let err = sample_solutions(&inst, &GridSpec::symmetric(Rat::one(), 16)).unwrap_err();
        assert!(matches!(err, Error::GridCap { .. }));
    }

    #[test]
    fn empirical_range_stays_inside_certified_range() {
        let ann = VarAnnotation::shifted("x", Rat::one());
        let delta = rat(1, 16);
        let emp = empirical_range(&ann, &delta, 10).unwrap();
        let cert = certified_range(&ann, &delta).unwrap();
        assert!(emp.subset_of(&cert));
        assert_eq!(emp, cert); // linear forms attain their bounds at the ends
    }

    #[test]
    fn planted_etr_points_really_satisfy() {
        for seed in 0..20 {
            let p = planted_etr(3, 5, seed);
            assert!(
                p.instance.check_point(&p.point).unwrap(),
                "seed {seed} planted a non-solution"
            );
        }
    }

    #[test]
    fn planted_ami_and_small_are_valid_and_satisfied() {
        for seed in 0..10 {
            let a = planted_ami(3, 6, seed);
            assert!(validate_fragment(&a.instance).is_empty());
            assert!(a.instance.check_point(&a.point).unwrap());
            let s = planted_small(&rat(1, 64), 3, 6, seed);
            assert!(validate_fragment(&s.instance).is_empty());
            assert!(s.instance.check_point(&s.point).unwrap());
        }
    }

    #[test]
    fn planted_interval_instances_check_out() {
        for target in [Fragment::Shift, Fragment::Square, Fragment::Inv] {
            let p = planted_interval(target, 7).unwrap();
            assert_eq!(p.instance.fragment, target);
            assert!(validate_fragment(&p.instance).is_empty());
            assert!(p.instance.check_point(&p.point).unwrap());
        }
    }
}
