//! Interval certification for degree-2 rational expressions of variables
//! confined to [-delta, delta].
//!
//! For g = p/q with p = a1 s^2 + a2 st + a3 t^2 + a4 s + a5 t + a6 and
//! q likewise with constant term b6 > 0, and |s|, |t| <= delta <= 1, the
//! numerator stays within a6 +- alpha*delta and the denominator within
//! b6 +- beta*delta, where alpha and beta sum the absolute values of the
//! five nonconstant coefficients. The quotient bound below follows; when
//! the numerator cannot go negative it is exactly
//! [(a6 - alpha*delta)/(b6 + beta*delta), (a6 + alpha*delta)/(b6 - beta*delta)].

use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::formula::{Instance, Interval, VarAnnotation};
use crate::rational::{format_rat, Rat};

fn abs_sum_nonconstant(c: &[Rat; 6]) -> Rat {
    c[..5].iter().map(Signed::abs).sum()
}

/// Interval bound for the quotient of two degree-2 polynomials over
/// [-delta, delta]^2, from the coefficient vectors alone.
pub fn bound_rational(num: &[Rat; 6], den: &[Rat; 6], delta: &Rat) -> Result<Interval> {
    if !delta.is_positive() || delta > &Rat::one() {
        return Err(Error::Param(format!(
            "bound requires 0 < delta <= 1, got {}",
            format_rat(delta)
        )));
    }
    let b6 = &den[5];
    if !b6.is_positive() {
        return Err(Error::Param(
            "denominator constant term must be positive".into(),
        ));
    }
    let alpha = abs_sum_nonconstant(num);
    let beta = abs_sum_nonconstant(den);
    let q_lo = b6 - &beta * delta;
    let q_hi = b6 + &beta * delta;
    if !q_lo.is_positive() {
        return Err(Error::Param(
            "denominator can vanish: beta*delta >= b6".into(),
        ));
    }
    let a6 = &num[5];
    let p_lo = a6 - &alpha * delta;
    let p_hi = a6 + &alpha * delta;
    let lo = if p_lo.is_negative() {
        &p_lo / &q_lo
    } else {
        &p_lo / &q_hi
    };
    let hi = if p_hi.is_negative() {
        &p_hi / &q_hi
    } else {
        &p_hi / &q_lo
    };
    Ok(Interval::new(lo, hi))
}

/// Polynomial special case: denominator 1 and every nonconstant coefficient
/// within [-c, c] gives the coarser bound [a6 - 5c*delta, a6 + 5c*delta].
pub fn bound_case_a(num: &[Rat; 6], c: &Rat, delta: &Rat) -> Result<Interval> {
    if num[..5].iter().any(|a| &a.abs() > c) {
        return Err(Error::Param(format!(
            "a nonconstant coefficient exceeds the bound {}",
            format_rat(c)
        )));
    }
    if !delta.is_positive() || delta > &Rat::one() {
        return Err(Error::Param("bound requires 0 < delta <= 1".into()));
    }
    let slack = Rat::from_integer(5.into()) * c * delta;
    Ok(Interval::new(&num[5] - &slack, &num[5] + &slack))
}

/// Largest delta for which the quotient bound stays within
/// [g(0,0) - eps, g(0,0) + eps], given nonconstant coefficients bounded by c:
/// delta <= eps * b6^2 / (5c * (a6 + (1 + eps) * b6)).
pub fn required_delta_case_b(eps: &Rat, c: &Rat, a6: &Rat, b6: &Rat) -> Result<Rat> {
    if !eps.is_positive() || !c.is_positive() || !b6.is_positive() || a6.is_negative() {
        return Err(Error::Param(
            "threshold needs eps, c, b6 positive and a6 nonnegative".into(),
        ));
    }
    let five_c = Rat::from_integer(5.into()) * c;
    let denom = &five_c * (a6 + (Rat::one() + eps) * b6);
    Ok(eps * b6 * b6 / denom)
}

/// Certified range of one annotated variable when its sources lie in
/// [-delta, delta] (or [0, delta] for a nonnegative source).
pub fn certified_range(ann: &VarAnnotation, delta: &Rat) -> Result<Interval> {
    if ann.sources.len() > 2 {
        return Err(Error::Param(format!(
            "annotation has {} sources, at most 2 supported",
            ann.sources.len()
        )));
    }
    // One-sided refinement: a nonnegative source with a plain polynomial
    // value and nonnegative coefficients can only push the value up.
    if ann.nonneg_source
        && ann.sources.len() == 1
        && ann.has_trivial_den()
        && ann.num[..5].iter().all(|a| !a.is_negative())
    {
        let alpha = abs_sum_nonconstant(&ann.num);
        return Ok(Interval::new(
            ann.num[5].clone(),
            &ann.num[5] + alpha * delta,
        ));
    }
    bound_rational(&ann.num, &ann.den, delta)
}

/// One variable's certification outcome.
#[derive(Debug, Clone)]
pub struct VarCertificate {
    pub name: String,
    pub certified: Interval,
    pub declared: Interval,
    pub ok: bool,
}

#[derive(Debug, Clone)]
pub struct CertificationReport {
    pub fragment: String,
    pub delta_source: Rat,
    pub vars: Vec<VarCertificate>,
    pub ok: bool,
}

/// Proves every annotated variable of an interval-stage instance stays inside
/// its declared interval whenever the annotation sources lie in
/// [-delta_source, delta_source].
pub fn certify_instance(inst: &Instance) -> Result<CertificationReport> {
    if !inst.fragment.has_intervals() {
        return Err(Error::Param(format!(
            "certification applies to interval fragments, not {}",
            inst.fragment
        )));
    }
    let delta_source = inst.ann_source_delta.clone().ok_or_else(|| {
        Error::Param("instance does not record the annotation source scale".into())
    })?;
    let mut vars = Vec::with_capacity(inst.n_vars());
    let mut all_ok = true;
    for i in 0..inst.n_vars() {
        let name = inst.vars.name(i).to_string();
        let ann = inst.annotations[i]
            .as_ref()
            .ok_or_else(|| Error::MissingAnnotation(name.clone()))?;
        let declared = inst.intervals[i]
            .clone()
            .ok_or_else(|| Error::Fragment(format!("variable {name} has no interval")))?;
        let certified = certified_range(ann, &delta_source)?;
        let ok = certified.subset_of(&declared);
        all_ok &= ok;
        vars.push(VarCertificate {
            name,
            certified,
            declared,
            ok,
        });
    }
    Ok(CertificationReport {
        fragment: inst.fragment.name().to_string(),
        delta_source,
        vars,
        ok: all_ok,
    })
}
