//! Witness maps between solution sets of adjacent stages.
//!
//! Each lowering pass emits a forward map (rational functions sending a
//! solution of the input to a solution of the output) and a backward map.
//! Backward maps are restricted by construction to a coordinate projection
//! followed by a per-coordinate affine map, so the linearity claim is checked
//! structurally rather than by analysis.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::rational::{Dyadic, Rat, DEFAULT_BUDGET_BITS};

/// One output coordinate of a forward map: `scale * num(x)/den(x) + shift`.
///
/// The scale and shift stay in lazy dyadic form so that coordinates scaled by
/// tower constants remain representable; they are only materialized against
/// the expansion budget when the map is applied or folded.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardComponent {
    pub scale: Dyadic,
    pub num: Polynomial,
    pub den: Polynomial,
    pub shift: Dyadic,
}

impl ForwardComponent {
    pub fn poly(p: Polynomial) -> ForwardComponent {
        ForwardComponent {
            scale: Dyadic::one(),
            num: p,
            den: Polynomial::one(),
            shift: Dyadic::zero(),
        }
    }

    pub fn projection(i: usize) -> ForwardComponent {
        ForwardComponent::poly(Polynomial::var(i))
    }

    pub fn constant_rat(c: Rat) -> ForwardComponent {
        ForwardComponent::poly(Polynomial::constant(c))
    }

    pub fn constant(c: Dyadic) -> ForwardComponent {
        ForwardComponent {
            scale: Dyadic::zero(),
            num: Polynomial::zero(),
            den: Polynomial::one(),
            shift: c,
        }
    }

    pub fn eval(&self, point: &[Rat], budget_bits: u64, which: &str) -> Result<Rat> {
        let shift = self.shift.to_rat(budget_bits)?;
        if self.scale.is_zero() || self.num.is_zero() {
            return Ok(shift);
        }
        let d = self.den.eval(point)?;
        if d.is_zero() {
            return Err(Error::DenominatorZero {
                component: which.to_string(),
            });
        }
        let n = self.num.eval(point)?;
        Ok(self.scale.to_rat(budget_bits)? * n / d + shift)
    }

    /// Folds scale and shift into the polynomial pair, leaving a plain
    /// rational function (num', den'). Needs the dyadics materialized.
    fn to_rational_function(&self, budget_bits: u64) -> Result<(Polynomial, Polynomial)> {
        let scale = self.scale.to_rat(budget_bits)?;
        let shift = self.shift.to_rat(budget_bits)?;
        let num = self
            .num
            .scale(&scale)
            .add(&self.den.scale(&shift));
        Ok((num, self.den.clone()))
    }
}

/// Forward map from n_in coordinates to the output coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalMap {
    pub n_in: usize,
    pub components: Vec<ForwardComponent>,
}

impl RationalMap {
    pub fn identity(n: usize) -> RationalMap {
        RationalMap {
            n_in: n,
            components: (0..n).map(ForwardComponent::projection).collect(),
        }
    }

    pub fn n_out(&self) -> usize {
        self.components.len()
    }

    pub fn apply(&self, point: &[Rat], budget_bits: u64) -> Result<Vec<Rat>> {
        if point.len() != self.n_in {
            return Err(Error::ArityMismatch {
                expected: self.n_in,
                got: point.len(),
            });
        }
        self.components
            .iter()
            .enumerate()
            .map(|(i, c)| c.eval(point, budget_bits, &format!("forward component {i}")))
            .collect()
    }
}

/// Backward map: coordinate projection followed by an affine map,
/// `x_i = scale[i] * y[proj[i]] + offset[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineProjection {
    pub n_in: usize,
    pub proj: Vec<usize>,
    pub scale: Vec<Dyadic>,
    pub offset: Vec<Dyadic>,
}

impl AffineProjection {
    pub fn identity(n: usize) -> AffineProjection {
        AffineProjection {
            n_in: n,
            proj: (0..n).collect(),
            scale: vec![Dyadic::one(); n],
            offset: vec![Dyadic::zero(); n],
        }
    }

    /// Plain projection onto the first n_out of n_in coordinates.
    pub fn truncating(n_in: usize, n_out: usize) -> AffineProjection {
        AffineProjection {
            n_in,
            proj: (0..n_out).collect(),
            scale: vec![Dyadic::one(); n_out],
            offset: vec![Dyadic::zero(); n_out],
        }
    }

    pub fn n_out(&self) -> usize {
        self.proj.len()
    }

    pub fn apply(&self, point: &[Rat], budget_bits: u64) -> Result<Vec<Rat>> {
        if point.len() != self.n_in {
            return Err(Error::ArityMismatch {
                expected: self.n_in,
                got: point.len(),
            });
        }
        (0..self.proj.len())
            .map(|i| {
                let src = self.proj[i];
                if src >= point.len() {
                    return Err(Error::ArityMismatch {
                        expected: src + 1,
                        got: point.len(),
                    });
                }
                let s = self.scale[i].to_rat(budget_bits)?;
                let o = self.offset[i].to_rat(budget_bits)?;
                Ok(s * &point[src] + o)
            })
            .collect()
    }
}

/// Witness pair for one pass (or a composition of passes).
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessMap {
    pub stage: String,
    /// Set when the pass only preserves satisfiability pointwise (the
    /// backward map is valid on solutions but the solution sets are not
    /// homeomorphic).
    pub equisat_only: bool,
    pub forward: RationalMap,
    pub backward: AffineProjection,
}

impl WitnessMap {
    pub fn identity(stage: &str, n: usize) -> WitnessMap {
        WitnessMap {
            stage: stage.to_string(),
            equisat_only: false,
            forward: RationalMap::identity(n),
            backward: AffineProjection::identity(n),
        }
    }

    pub fn forward_apply(&self, point: &[Rat]) -> Result<Vec<Rat>> {
        self.forward.apply(point, DEFAULT_BUDGET_BITS)
    }

    pub fn backward_apply(&self, point: &[Rat]) -> Result<Vec<Rat>> {
        self.backward.apply(point, DEFAULT_BUDGET_BITS)
    }
}

/// Composes two witness maps along the chain: `inner` lowers V0 to V1 and
/// `outer` lowers V1 to V2; the result lowers V0 to V2. Forward components
/// are composed symbolically; backward maps compose in closed affine form.
pub fn compose(outer: &WitnessMap, inner: &WitnessMap) -> Result<WitnessMap> {
    compose_with_budget(outer, inner, DEFAULT_BUDGET_BITS)
}

pub fn compose_with_budget(
    outer: &WitnessMap,
    inner: &WitnessMap,
    budget_bits: u64,
) -> Result<WitnessMap> {
    if inner.forward.n_out() != outer.forward.n_in {
        return Err(Error::ArityMismatch {
            expected: outer.forward.n_in,
            got: inner.forward.n_out(),
        });
    }

    // Inner components as plain rational functions over the V0 variables.
    let subs: Vec<(Polynomial, Polynomial)> = inner
        .forward
        .components
        .iter()
        .map(|c| c.to_rational_function(budget_bits))
        .collect::<Result<_>>()?;

    let mut components = Vec::with_capacity(outer.forward.n_out());
    for oc in &outer.forward.components {
        let (num_n, num_d) = oc.num.substitute_rational(&subs);
        let (num, den) = if oc.den.is_one() {
            (num_n, num_d)
        } else {
            let (den_n, den_d) = oc.den.substitute_rational(&subs);
            (num_n.mul(&den_d), num_d.mul(&den_n))
        };
        components.push(ForwardComponent {
            scale: oc.scale.clone(),
            num,
            den,
            shift: oc.shift.clone(),
        });
    }
    let forward = RationalMap {
        n_in: inner.forward.n_in,
        components,
    };

    // backward = inner.backward after outer.backward
    let ib = &inner.backward;
    let ob = &outer.backward;
    if ob.n_out() != ib.n_in {
        return Err(Error::ArityMismatch {
            expected: ib.n_in,
            got: ob.n_out(),
        });
    }
    let mut proj = Vec::with_capacity(ib.n_out());
    let mut scale = Vec::with_capacity(ib.n_out());
    let mut offset = Vec::with_capacity(ib.n_out());
    for j in 0..ib.n_out() {
        let mid = ib.proj[j];
        proj.push(ob.proj[mid]);
        scale.push(ib.scale[j].mul(&ob.scale[mid]));
        offset.push(ib.scale[j].mul(&ob.offset[mid]).add(&ib.offset[j], budget_bits)?);
    }
    let backward = AffineProjection {
        n_in: ob.n_in,
        proj,
        scale,
        offset,
    };

    Ok(WitnessMap {
        stage: format!("{}+{}", inner.stage, outer.stage),
        equisat_only: inner.equisat_only || outer.equisat_only,
        forward,
        backward,
    })
}

/// Outcome of checking the witness pair at one planted solution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RoundTrip {
    /// Forward image satisfies the output and backward returns the point.
    Ok,
    /// The forward map is undefined at the point (a denominator vanished).
    Undefined(String),
    /// Something failed; the message says what.
    Failed(String),
}

/// Checks one planted input solution through a witness pair: the forward
/// image must satisfy `output` exactly, and the backward image of the forward
/// image must be the original point (skipped when the pair is marked
/// equisatisfiable-only).
pub fn round_trip_check(
    map: &WitnessMap,
    output: &crate::formula::Instance,
    point: &[Rat],
) -> RoundTrip {
    let image = match map.forward_apply(point) {
        Ok(v) => v,
        Err(Error::DenominatorZero { component }) => return RoundTrip::Undefined(component),
        Err(e) => return RoundTrip::Failed(e.to_string()),
    };
    match output.check_point(&image) {
        Ok(true) => {}
        Ok(false) => {
            return RoundTrip::Failed("forward image violates the output instance".to_string())
        }
        Err(e) => return RoundTrip::Failed(e.to_string()),
    }
    if map.equisat_only {
        return RoundTrip::Ok;
    }
    match map.backward_apply(&image) {
        Ok(back) if back == point => RoundTrip::Ok,
        Ok(_) => RoundTrip::Failed("backward of forward is not the identity".to_string()),
        Err(e) => RoundTrip::Failed(e.to_string()),
    }
}
