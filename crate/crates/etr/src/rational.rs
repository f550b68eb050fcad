//! Exact rational scalars, lazily scaled dyadic values, and tower constants.
//!
//! Everything numeric in this crate is an exact `BigRational`. Tower constants
//! of the form m * 2^(+-2^i) appear in some constructions with heights that
//! make the plain rational physically impossible to materialize, so they are
//! kept lazy and only expanded under an explicit bit budget.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rat = num_rational::BigRational;

/// Default expansion budget, in bits of the materialized power of two.
pub const DEFAULT_BUDGET_BITS: u64 = 1 << 20;

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Parses a rational serialized as `"p"` or `"p/q"`, insisting on the
/// canonical form: lowest terms, positive denominator, no `-0`.
pub fn parse_rat(text: &str) -> Result<Rat> {
    let err = |msg: &str| Error::Rational {
        text: text.to_string(),
        msg: msg.to_string(),
    };
    let (num_s, den_s) = match text.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (text, None),
    };
    let num: BigInt = num_s.parse().map_err(|_| err("bad numerator"))?;
    let den: BigInt = match den_s {
        Some(d) => d.parse().map_err(|_| err("bad denominator"))?,
        None => BigInt::one(),
    };
    if den.is_zero() {
        return Err(err("zero denominator"));
    }
    if den.is_negative() {
        return Err(err("negative denominator"));
    }
    if den_s.is_some() && den.is_one() {
        return Err(err("not in lowest terms"));
    }
    if !num.gcd(&den).is_one() && !num.is_zero() {
        return Err(err("not in lowest terms"));
    }
    if num.is_zero() && den_s.is_some() {
        return Err(err("not in lowest terms"));
    }
    Ok(Rat::new_raw(num, den))
}

/// Prints a rational in the canonical `"p"` / `"p/q"` form.
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// True iff `r` is a (possibly negative) power of two times an integer with
/// odd part one, i.e. r = 2^e for some integer e.
pub fn is_pow2(r: &Rat) -> bool {
    if r.numer().is_one() {
        pow2_exponent_of(r.denom()).is_some()
    } else if r.denom().is_one() {
        pow2_exponent_of(r.numer()).is_some()
    } else {
        false
    }
}

fn pow2_exponent_of(n: &BigInt) -> Option<u64> {
    if n.sign() != Sign::Plus {
        return None;
    }
    let tz = n.trailing_zeros()?;
    let shifted: BigInt = n >> tz;
    shifted.is_one().then_some(tz)
}

/// For dyadic `r = 2^-l`, returns `l`.
pub fn neg_pow2_exponent(r: &Rat) -> Option<u64> {
    if !r.numer().is_one() {
        return None;
    }
    pow2_exponent_of(r.denom())
}

/// Largest power of two `2^-l <= r`, for `0 < r <= 1`.
pub fn pow2_floor(r: &Rat) -> Option<Rat> {
    if !r.is_positive() || r > &Rat::one() {
        return None;
    }
    let mut p = Rat::one();
    let half = rat(1, 2);
    while &p > r {
        p *= &half;
    }
    Some(p)
}

/// A value `m * 2^(s*2^i)` with the tower exponent kept symbolic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TowerValue {
    pub mantissa: Rat,
    pub height: u32,
    pub negative: bool,
}

impl TowerValue {
    pub fn new(mantissa: Rat, height: u32, negative: bool) -> TowerValue {
        assert!(!mantissa.is_zero(), "tower mantissa must be nonzero");
        TowerValue {
            mantissa,
            height,
            negative,
        }
    }

    /// Bit count of the materialized power of two.
    pub fn required_bits(&self) -> u64 {
        if self.height >= 64 {
            u64::MAX
        } else {
            1u64 << self.height
        }
    }

    /// Exact expansion to a rational, refused when the tower is too tall.
    pub fn expand(&self, budget_bits: u64) -> Result<Rat> {
        let bits = self.required_bits();
        if bits > budget_bits {
            return Err(Error::BudgetExceeded {
                required_bits: bits,
                budget_bits,
            });
        }
        let exp = BigInt::one() << (bits as usize);
        let pow = Rat::from_integer(exp);
        Ok(if self.negative {
            &self.mantissa / pow
        } else {
            &self.mantissa * pow
        })
    }

    pub fn to_dyadic(&self) -> Dyadic {
        let mut e = BigInt::one() << (self.height as usize);
        if self.negative {
            e = -e;
        }
        Dyadic::new(self.mantissa.clone(), e)
    }
}

/// Expands a tower value under the default budget.
pub fn tower_expand(v: &TowerValue) -> Result<Rat> {
    v.expand(DEFAULT_BUDGET_BITS)
}

/// A rational scaled by a lazy power of two: `mantissa * 2^exp`.
///
/// Normalized so that the mantissa has odd numerator and denominator,
/// making equality structural.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dyadic {
    mantissa: Rat,
    exp: BigInt,
}

impl Dyadic {
    pub fn new(mantissa: Rat, exp: BigInt) -> Dyadic {
        if mantissa.is_zero() {
            return Dyadic {
                mantissa,
                exp: BigInt::zero(),
            };
        }
        let mut m = mantissa;
        let mut e = exp;
        if let Some(tz) = m.numer().trailing_zeros() {
            if tz > 0 {
                let shifted = m.numer() >> tz;
                m = Rat::new_raw(shifted, m.denom().clone());
                e += tz;
            }
        }
        if let Some(tz) = m.denom().trailing_zeros() {
            if tz > 0 {
                let shifted = m.denom() >> tz;
                m = Rat::new_raw(m.numer().clone(), shifted);
                e -= tz;
            }
        }
        Dyadic { mantissa: m, exp: e }
    }

    pub fn from_rat(r: Rat) -> Dyadic {
        Dyadic::new(r, BigInt::zero())
    }

    pub fn zero() -> Dyadic {
        Dyadic::from_rat(Rat::zero())
    }

    pub fn one() -> Dyadic {
        Dyadic::from_rat(Rat::one())
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.mantissa.is_one() && self.exp.is_zero()
    }

    pub fn mantissa(&self) -> &Rat {
        &self.mantissa
    }

    pub fn exp(&self) -> &BigInt {
        &self.exp
    }

    pub fn mul(&self, other: &Dyadic) -> Dyadic {
        Dyadic::new(&self.mantissa * &other.mantissa, &self.exp + &other.exp)
    }

    pub fn recip(&self) -> Dyadic {
        assert!(!self.is_zero());
        Dyadic::new(self.mantissa.recip(), -&self.exp)
    }

    /// Addition aligns the two exponents, which can cost up to |e1 - e2|
    /// mantissa bits; refused beyond the budget.
    pub fn add(&self, other: &Dyadic, budget_bits: u64) -> Result<Dyadic> {
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        let (lo, hi) = if self.exp <= other.exp {
            (self, other)
        } else {
            (other, self)
        };
        let gap = (&hi.exp - &lo.exp).to_u64().unwrap_or(u64::MAX);
        if gap > budget_bits {
            return Err(Error::BudgetExceeded {
                required_bits: gap,
                budget_bits,
            });
        }
        let scale = Rat::from_integer(BigInt::one() << (gap as usize));
        Ok(Dyadic::new(&lo.mantissa + &hi.mantissa * scale, lo.exp.clone()))
    }

    pub fn to_rat(&self, budget_bits: u64) -> Result<Rat> {
        if self.is_zero() {
            return Ok(Rat::zero());
        }
        let bits = self.exp.magnitude().to_u64().unwrap_or(u64::MAX);
        if bits > budget_bits {
            return Err(Error::BudgetExceeded {
                required_bits: bits,
                budget_bits,
            });
        }
        let pow = Rat::from_integer(BigInt::one() << (bits as usize));
        Ok(if self.exp.is_negative() {
            &self.mantissa / pow
        } else {
            &self.mantissa * pow
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_lowest_terms_only() {
        assert_eq!(parse_rat("3/4").unwrap(), rat(3, 4));
        assert_eq!(parse_rat("-7").unwrap(), rat_int(-7));
        assert_eq!(parse_rat("0").unwrap(), Rat::zero());
        assert!(parse_rat("6/4").is_err());
        assert!(parse_rat("3/-4").is_err());
        assert!(parse_rat("3/1").is_err());
        assert!(parse_rat("0/5").is_err());
        assert!(parse_rat("1/0").is_err());
    }

    #[test]
    fn format_round_trips() {
        for s in ["3/4", "-2/7", "5", "0", "-1"] {
            assert_eq!(format_rat(&parse_rat(s).unwrap()), s);
        }
    }

    #[test]
    fn tower_expand_examples() {
        // 1 * 2^(2^3) = 256
        let v = TowerValue::new(Rat::one(), 3, false);
        assert_eq!(tower_expand(&v).unwrap(), rat_int(256));
        // 3/4 * 2^(-2^2) = 3/64
        let v = TowerValue::new(rat(3, 4), 2, true);
        assert_eq!(tower_expand(&v).unwrap(), rat(3, 64));
        // 2^(2^60) blows the default budget
        let v = TowerValue::new(Rat::one(), 60, false);
        match tower_expand(&v) {
            Err(Error::BudgetExceeded { required_bits, .. }) => {
                assert_eq!(required_bits, 1u64 << 60)
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn dyadic_normalization() {
        let a = Dyadic::new(rat(6, 4), BigInt::zero());
        let b = Dyadic::new(rat(3, 1), BigInt::from(-1));
        assert_eq!(a, b);
        assert_eq!(a.to_rat(64).unwrap(), rat(3, 2));
    }

    #[test]
    fn pow2_helpers() {
        assert_eq!(neg_pow2_exponent(&rat(1, 8)), Some(3));
        assert_eq!(neg_pow2_exponent(&rat(3, 8)), None);
        assert_eq!(pow2_floor(&rat(1, 5)), Some(rat(1, 8)));
        assert_eq!(pow2_floor(&rat(1, 4)), Some(rat(1, 4)));
    }
}
