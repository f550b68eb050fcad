//! Exact arithmetic on variable annotations.
//!
//! Annotations are ratios of polynomials of total degree at most 2 in at most
//! two zero-centered source values. The interval-stage passes build each new
//! variable's annotation from the annotations of the variables defining it,
//! so the final instance carries a closed form for every variable. All
//! operations stay inside the degree-2 / two-source shape and report an error
//! if a construction would escape it (none of the emitted gadgets do).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::formula::{zero6, VarAnnotation};
use crate::rational::Rat;

/// Exponent pairs (source 0, source 1) of the six coefficient slots.
const SLOT_EXP: [(u32, u32); 6] = [(2, 0), (1, 1), (0, 2), (1, 0), (0, 1), (0, 0)];

fn slot_of(es: u32, et: u32) -> Option<usize> {
    SLOT_EXP.iter().position(|&(a, b)| (a, b) == (es, et))
}

fn vec_mul(a: &[Rat; 6], b: &[Rat; 6]) -> Result<[Rat; 6]> {
    let mut out = zero6();
    for (i, ca) in a.iter().enumerate() {
        if ca.is_zero() {
            continue;
        }
        for (j, cb) in b.iter().enumerate() {
            if cb.is_zero() {
                continue;
            }
            let (es, et) = (SLOT_EXP[i].0 + SLOT_EXP[j].0, SLOT_EXP[i].1 + SLOT_EXP[j].1);
            match slot_of(es, et) {
                Some(k) => out[k] = &out[k] + ca * cb,
                None => {
                    return Err(Error::GadgetCertification(
                        "annotation product exceeds degree 2".into(),
                    ))
                }
            }
        }
    }
    Ok(out)
}

fn vec_add(a: &[Rat; 6], b: &[Rat; 6]) -> [Rat; 6] {
    let mut out = zero6();
    for i in 0..6 {
        out[i] = &a[i] + &b[i];
    }
    out
}

fn vec_scale(a: &[Rat; 6], c: &Rat) -> [Rat; 6] {
    let mut out = zero6();
    for i in 0..6 {
        out[i] = &a[i] * c;
    }
    out
}

/// Maps a single-source coefficient vector onto the source slot `pos`
/// (0 keeps s-terms, 1 moves them to t-terms).
fn vec_remap_single(a: &[Rat; 6], pos: usize) -> [Rat; 6] {
    if pos == 0 {
        return a.clone();
    }
    let mut out = zero6();
    out[2] = a[0].clone();
    out[4] = a[3].clone();
    out[5] = a[5].clone();
    out
}

/// Union of two source lists with remapped coefficient vectors.
fn merge_sources(a: &VarAnnotation, b: &VarAnnotation) -> Result<MergedPair> {
    let mut sources = a.sources.clone();
    for s in &b.sources {
        if !sources.contains(s) {
            sources.push(s.clone());
        }
    }
    if sources.len() > 2 {
        return Err(Error::GadgetCertification(format!(
            "annotation would depend on {} sources",
            sources.len()
        )));
    }
    let remap = |ann: &VarAnnotation| -> Result<([Rat; 6], [Rat; 6])> {
        match ann.sources.len() {
            0 => Ok((ann.num.clone(), ann.den.clone())),
            1 => {
                let pos = sources.iter().position(|s| s == &ann.sources[0]).unwrap();
                Ok((
                    vec_remap_single(&ann.num, pos),
                    vec_remap_single(&ann.den, pos),
                ))
            }
            2 => {
                // Two-source vectors are only merged in their own order.
                if ann.sources == sources[..ann.sources.len()] {
                    Ok((ann.num.clone(), ann.den.clone()))
                } else {
                    Err(Error::GadgetCertification(
                        "annotation source order mismatch".into(),
                    ))
                }
            }
            n => Err(Error::GadgetCertification(format!(
                "annotation with {n} sources"
            ))),
        }
    };
    let (a_num, a_den) = remap(a)?;
    let (b_num, b_den) = remap(b)?;
    Ok(MergedPair {
        sources,
        a_num,
        a_den,
        b_num,
        b_den,
    })
}

struct MergedPair {
    sources: Vec<String>,
    a_num: [Rat; 6],
    a_den: [Rat; 6],
    b_num: [Rat; 6],
    b_den: [Rat; 6],
}

/// Rational content of a coefficient vector: gcd of numerators over lcm of
/// denominators, signed to make the constant slot positive.
fn content(v: &[Rat; 6]) -> Rat {
    let mut g = BigInt::zero();
    let mut l = BigInt::one();
    for c in v {
        if c.is_zero() {
            continue;
        }
        g = g.gcd(&c.numer().abs());
        l = l.lcm(c.denom());
    }
    if g.is_zero() {
        return Rat::one();
    }
    let mut c = Rat::new(g, l);
    if v[5].is_negative() {
        c = -c;
    }
    c
}

/// Scales num and den by the inverse of den's content, canonicalizing the
/// denominator (constant denominators become 1, the constant slot becomes
/// positive).
fn normalize(mut num: [Rat; 6], mut den: [Rat; 6], sources: Vec<String>) -> VarAnnotation {
    let c = content(&den);
    if !c.is_one() {
        let inv = Rat::one() / c;
        num = vec_scale(&num, &inv);
        den = vec_scale(&den, &inv);
    }
    // Drop a source that no coefficient mentions any more.
    let uses = |num: &[Rat; 6], den: &[Rat; 6], pos: usize| -> bool {
        let slots: &[usize] = if pos == 0 { &[0, 1, 3] } else { &[1, 2, 4] };
        slots
            .iter()
            .any(|&k| !num[k].is_zero() || !den[k].is_zero())
    };
    let mut sources = sources;
    if sources.len() == 2 && !uses(&num, &den, 1) {
        sources.pop();
    }
    if !sources.is_empty() && !uses(&num, &den, 0) {
        if sources.len() == 2 {
            // Shift source 1 down into the s-slots.
            let lower = |v: &mut [Rat; 6]| {
                v[0] = std::mem::replace(&mut v[2], Rat::zero());
                v[3] = std::mem::replace(&mut v[4], Rat::zero());
            };
            lower(&mut num);
            lower(&mut den);
            sources.remove(0);
        } else {
            sources.clear();
        }
    }
    VarAnnotation {
        sources,
        num,
        den,
        nonneg_source: false,
        note: String::new(),
    }
}

pub(crate) fn ann_add(a: &VarAnnotation, b: &VarAnnotation) -> Result<VarAnnotation> {
    let m = merge_sources(a, b)?;
    let num = vec_add(&vec_mul(&m.a_num, &m.b_den)?, &vec_mul(&m.b_num, &m.a_den)?);
    let den = vec_mul(&m.a_den, &m.b_den)?;
    Ok(normalize(num, den, m.sources))
}

pub(crate) fn ann_sub(a: &VarAnnotation, b: &VarAnnotation) -> Result<VarAnnotation> {
    let neg = VarAnnotation {
        num: vec_scale(&b.num, &-Rat::one()),
        ..b.clone()
    };
    ann_add(a, &neg)
}

pub(crate) fn ann_mul(a: &VarAnnotation, b: &VarAnnotation) -> Result<VarAnnotation> {
    let m = merge_sources(a, b)?;
    let num = vec_mul(&m.a_num, &m.b_num)?;
    let den = vec_mul(&m.a_den, &m.b_den)?;
    Ok(normalize(num, den, m.sources))
}

pub(crate) fn ann_scale(a: &VarAnnotation, c: &Rat) -> VarAnnotation {
    normalize(vec_scale(&a.num, c), a.den.clone(), a.sources.clone())
}

pub(crate) fn ann_add_const(a: &VarAnnotation, c: &Rat) -> VarAnnotation {
    let num = vec_add(&a.num, &vec_scale(&a.den, c));
    normalize(num, a.den.clone(), a.sources.clone())
}

/// Reciprocal: swaps numerator and denominator.
pub(crate) fn ann_inv(a: &VarAnnotation) -> Result<VarAnnotation> {
    if a.num[5].is_zero() {
        return Err(Error::GadgetCertification(
            "inverting an annotation whose center is 0".into(),
        ));
    }
    Ok(normalize(
        a.den.clone(),
        a.num.clone(),
        a.sources.clone(),
    ))
}

/// Center value p(0)/q(0).
pub(crate) fn ann_center(a: &VarAnnotation) -> Result<Rat> {
    if a.den[5].is_zero() {
        return Err(Error::GadgetCertification(
            "annotation denominator vanishes at the center".into(),
        ));
    }
    Ok(&a.num[5] / &a.den[5])
}

/// Structural equality after normalization (same sources, same reduced
/// coefficient vectors up to a common rational factor).
pub(crate) fn ann_equivalent(a: &VarAnnotation, b: &VarAnnotation) -> bool {
    if a.sources != b.sources {
        return false;
    }
    // a.num * b.den == b.num * a.den as coefficient vectors.
    match (vec_mul(&a.num, &b.den), vec_mul(&b.num, &a.den)) {
        (Ok(x), Ok(y)) => x == y,
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};

    fn lin(source: &str, center: Rat) -> VarAnnotation {
        VarAnnotation::shifted(source, center)
    }

    #[test]
    fn add_merges_distinct_sources() {
        let a = lin("x", rat_int(1));
        let b = lin("y", rat(3, 4));
        let s = ann_add(&a, &b).unwrap();
        assert_eq!(s.sources, vec!["x".to_string(), "y".to_string()]);
        assert_eq!(s.num[3], rat_int(1));
        assert_eq!(s.num[4], rat_int(1));
        assert_eq!(s.num[5], rat(7, 4));
        assert!(s.has_trivial_den());
    }

    #[test]
    fn mul_same_source_is_quadratic() {
        let a = lin("x", rat_int(1));
        let sq = ann_mul(&a, &a).unwrap();
        assert_eq!(sq.num[0], rat_int(1));
        assert_eq!(sq.num[3], rat_int(2));
        assert_eq!(sq.num[5], rat_int(1));
    }

    #[test]
    fn degree_overflow_rejected() {
        let a = lin("x", rat_int(1));
        let sq = ann_mul(&a, &a).unwrap();
        assert!(ann_mul(&sq, &a).is_err());
    }

    #[test]
    fn inversion_normalizes_denominator() {
        // 1 - s/2  ->  reciprocal 2 / (2 - s)
        let mut a = lin("x", rat_int(1));
        a.num[3] = rat(-1, 2);
        let inv = ann_inv(&a).unwrap();
        assert_eq!(inv.den[5], rat_int(2));
        assert_eq!(inv.den[3], rat_int(-1));
        assert_eq!(inv.num[5], rat_int(2));
        assert_eq!(ann_center(&inv).unwrap(), rat_int(1));
    }

    #[test]
    fn squaring_gadget_midpoint_identity() {
        // hc + hw = uu + 1/2 where uu = ((s+t)/2 + 1)^2, worked through the
        // same sequence the squaring pass emits.
        let a = lin("x", rat_int(1));
        let b = lin("y", rat_int(1));
        let half = rat(1, 2);
        let u = ann_scale(&ann_add(&a, &b).unwrap(), &half);
        let uu = ann_mul(&u, &u).unwrap();
        let aa = ann_mul(&a, &a).unwrap();
        let bb = ann_mul(&b, &b).unwrap();
        let hw = ann_scale(
            &ann_add(&ann_scale(&ann_add_const(&aa, &half), &half),
                     &ann_scale(&ann_add_const(&bb, &half), &half)).unwrap(),
            &half,
        );
        let c = ann_add_const(&ann_mul(&a, &b).unwrap(), &Rat::zero());
        let hc = ann_scale(&ann_add_const(&c, &half), &half);
        let lhs = ann_add(&hc, &hw).unwrap();
        let rhs = ann_add_const(&uu, &half);
        assert!(ann_equivalent(&lhs, &rhs));
    }

    #[test]
    fn inversion_chain_recovers_square() {
        // 1/(1 - e/2), 1/(1 + e/2) combine to 1/(1 - e^2/4): the sum halves
        // to a single inversion whose reciprocal is a polynomial again.
        let mut m = lin("x", rat_int(1));
        m.num[3] = rat(-1, 2);
        let mut p = lin("x", rat_int(1));
        p.num[3] = rat(1, 2);
        let s = ann_add(&ann_inv(&m).unwrap(), &ann_inv(&p).unwrap()).unwrap();
        let w = ann_scale(&s, &rat(1, 2));
        let c = ann_inv(&w).unwrap();
        assert!(c.has_trivial_den());
        assert_eq!(c.num[0], rat(-1, 4));
        assert_eq!(c.num[5], rat_int(1));
    }
}
