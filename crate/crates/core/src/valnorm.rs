//! Values taken by the model norm.
//!
//! Every nonzero norm value is a power `2^-(e)` with `e` a rational whose
//! denominator is a power of p; we store the exponent exactly, never a float.
//! Truncated arithmetic additionally produces "below precision" markers for
//! quantities that are only known to be at most `2^-(N)`.
//!
//! ```
//! use ultralattice_core::valnorm::{NormValue, nv_from_exponent};
//! let v = nv_from_exponent((3, 2).into(), 2).unwrap();
//! assert_eq!(v.render(), "2^-(3/2)");
//! assert_eq!(NormValue::parse("2^-(3/2)").unwrap(), v);
//! ```

use crate::error::{Error, Result};
use num_rational::Rational64;
use num_traits::{Signed, Zero};
use std::cmp::Ordering;

/// Exact exponent type: rationals with (validated) p-power denominators.
pub type Exp = Rational64;

/// Exponent bound used when clamping below-precision bookkeeping.
const BOUND_CAP: i64 = i64::MAX / 4;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum NormValue {
    /// The exact value `2^-(exponent)`.
    Exact(Exp),
    /// Literal zero.
    Zero,
    /// Known only to be `<= 2^-(bound)`. `lossy` records that the bound
    /// itself could not be maintained soundly (e.g. after multiplying by a
    /// value larger than 1) and should be treated as advisory.
    BelowPrecision { bound: i64, lossy: bool },
}

pub fn denom_is_p_power(e: &Exp, p: u32) -> bool {
    let mut d = *e.denom();
    if d < 0 {
        d = -d;
    }
    while d % i64::from(p) == 0 {
        d /= i64::from(p);
    }
    d == 1
}

/// Build `2^-(e)`, validating the denominator.
pub fn nv_from_exponent(e: Exp, p: u32) -> Result<NormValue> {
    if !denom_is_p_power(&e, p) {
        return Err(Error::NotPPowerDenominator { denom: *e.denom(), p });
    }
    Ok(NormValue::Exact(e))
}

impl NormValue {
    pub fn below(n: u32) -> Self {
        NormValue::BelowPrecision { bound: i64::from(n), lossy: false }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, NormValue::Zero)
    }

    /// Exact exponent, if this is an exact value.
    pub fn exponent(&self) -> Option<Exp> {
        match self {
            NormValue::Exact(e) => Some(*e),
            _ => None,
        }
    }

    /// Multiplication of values. Below-precision bounds only absorb exact
    /// factors that are at most 1 (nonnegative exponents); a factor larger
    /// than 1 would weaken the bound, which we record via `lossy` instead of
    /// silently claiming too much.
    pub fn mul(&self, other: &NormValue) -> NormValue {
        use NormValue::*;
        match (self, other) {
            (Zero, _) | (_, Zero) => Zero,
            (Exact(a), Exact(b)) => Exact(a + b),
            (BelowPrecision { bound, lossy }, Exact(e))
            | (Exact(e), BelowPrecision { bound, lossy }) => {
                if e.is_negative() {
                    BelowPrecision { bound: *bound, lossy: true }
                } else {
                    // 2^-(bound) * 2^-(e) <= 2^-(bound + floor(e)).
                    BelowPrecision {
                        bound: bound.saturating_add(e.floor().to_integer()).min(BOUND_CAP),
                        lossy: *lossy,
                    }
                }
            }
            (BelowPrecision { bound: a, lossy: la }, BelowPrecision { bound: b, lossy: lb }) => {
                BelowPrecision { bound: a.saturating_add(*b).min(BOUND_CAP), lossy: *la || *lb }
            }
        }
    }

    /// `self^m` for integer m >= 1.
    pub fn pow(&self, m: u32) -> NormValue {
        use NormValue::*;
        match self {
            Zero => Zero,
            Exact(e) => Exact(e * Rational64::from_integer(i64::from(m))),
            BelowPrecision { bound, lossy } => BelowPrecision {
                bound: bound.saturating_mul(i64::from(m)).min(BOUND_CAP),
                lossy: *lossy,
            },
        }
    }

    /// `self^(1/m)`; errors if the root exponent leaves the p-power grid.
    pub fn root(&self, m: u32, p: u32) -> Result<NormValue> {
        use NormValue::*;
        match self {
            Zero => Ok(Zero),
            Exact(e) => {
                let r = e / Rational64::from_integer(i64::from(m));
                nv_from_exponent(r, p)
            }
            BelowPrecision { bound, lossy } => Ok(BelowPrecision {
                bound: bound / i64::from(m),
                lossy: *lossy,
            }),
        }
    }

    /// Order by value (so `2^-(2) < 2^-(1)`). Comparisons that the precision
    /// window cannot settle are errors, never guesses.
    pub fn compare(&self, other: &NormValue) -> Result<Ordering> {
        use NormValue::*;
        match (self, other) {
            (Zero, Zero) => Ok(Ordering::Equal),
            (Zero, _) => Ok(Ordering::Less),
            (_, Zero) => Ok(Ordering::Greater),
            (Exact(a), Exact(b)) => Ok(b.cmp(a)),
            (BelowPrecision { bound, .. }, Exact(e)) => {
                if *e > Rational64::from_integer(*bound) {
                    Err(Error::IncomparableAtPrecision { exp: e.to_string(), n: *bound as u32 })
                } else {
                    Ok(Ordering::Less)
                }
            }
            (Exact(e), BelowPrecision { bound, .. }) => {
                if *e > Rational64::from_integer(*bound) {
                    Err(Error::IncomparableAtPrecision { exp: e.to_string(), n: *bound as u32 })
                } else {
                    Ok(Ordering::Greater)
                }
            }
            (BelowPrecision { bound: a, .. }, BelowPrecision { bound: b, .. }) => {
                if a == b {
                    Ok(Ordering::Equal)
                } else {
                    Err(Error::IncomparableAtPrecision {
                        exp: format!("<=2^-({})", b),
                        n: *a as u32,
                    })
                }
            }
        }
    }

    pub fn max(&self, other: &NormValue) -> Result<NormValue> {
        Ok(match self.compare(other)? {
            Ordering::Less => other.clone(),
            _ => self.clone(),
        })
    }

    pub fn min(&self, other: &NormValue) -> Result<NormValue> {
        Ok(match self.compare(other)? {
            Ordering::Greater => other.clone(),
            _ => self.clone(),
        })
    }

    pub fn render(&self) -> String {
        match self {
            NormValue::Zero => "0".to_string(),
            NormValue::Exact(e) => {
                if *e.denom() == 1 {
                    format!("2^-({})", e.numer())
                } else {
                    format!("2^-({}/{})", e.numer(), e.denom())
                }
            }
            NormValue::BelowPrecision { bound, .. } => format!("<=2^-({})", bound),
        }
    }

    pub fn parse(text: &str) -> Result<NormValue> {
        let s = text.trim();
        if s == "0" {
            return Ok(NormValue::Zero);
        }
        let (below, body) = match s.strip_prefix("<=") {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let inner = body
            .strip_prefix("2^-(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| Error::Syntax { pos: 0, expected: "`0` or `2^-(a/b)`".into() })?;
        let mut parts = inner.splitn(2, '/');
        let num: i64 = parts
            .next()
            .unwrap()
            .trim()
            .parse()
            .map_err(|_| Error::Syntax { pos: 0, expected: "integer numerator".into() })?;
        let den: i64 = match parts.next() {
            Some(d) => d
                .trim()
                .parse()
                .map_err(|_| Error::Syntax { pos: 0, expected: "integer denominator".into() })?,
            None => 1,
        };
        if den == 0 {
            return Err(Error::Syntax { pos: 0, expected: "nonzero denominator".into() });
        }
        if below {
            if den != 1 {
                return Err(Error::Syntax { pos: 0, expected: "integer below-precision bound".into() });
            }
            return Ok(NormValue::BelowPrecision { bound: num, lossy: false });
        }
        Ok(NormValue::Exact(Rational64::new(num, den)))
    }
}

/// Convenience: `2^-(n)` for an integer n.
pub fn nv_int(n: i64) -> NormValue {
    NormValue::Exact(Rational64::from_integer(n))
}

/// Convenience: exact rational exponent.
pub fn nv_rat(num: i64, den: i64) -> NormValue {
    NormValue::Exact(Rational64::new(num, den))
}

pub fn exp_is_zero(e: &Exp) -> bool {
    e.is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_exponent_validates_denominator() {
        assert_eq!(nv_from_exponent((1, 1).into(), 2).unwrap(), nv_int(1));
        assert_eq!(nv_from_exponent((3, 4).into(), 2).unwrap(), nv_rat(3, 4));
        assert!(matches!(
            nv_from_exponent((1, 3).into(), 2),
            Err(Error::NotPPowerDenominator { denom: 3, p: 2 })
        ));
    }

    #[test]
    fn ordering_matches_values() {
        // 2^-(2) < 2^-(1) < 2^-(0) and zero is below everything.
        assert_eq!(nv_int(2).compare(&nv_int(1)).unwrap(), Ordering::Less);
        assert_eq!(nv_int(0).compare(&nv_int(1)).unwrap(), Ordering::Greater);
        assert_eq!(NormValue::Zero.compare(&nv_int(100)).unwrap(), Ordering::Less);
        assert_eq!(NormValue::below(8).compare(&nv_int(3)).unwrap(), Ordering::Less);
    }

    #[test]
    fn below_precision_vs_smaller_exact_is_incomparable() {
        let err = NormValue::below(8).compare(&nv_int(10)).unwrap_err();
        assert!(matches!(err, Error::IncomparableAtPrecision { .. }));
    }

    #[test]
    fn multiplication_rules() {
        assert_eq!(nv_int(1).mul(&nv_rat(1, 2)), nv_rat(3, 2));
        assert_eq!(NormValue::Zero.mul(&nv_int(5)), NormValue::Zero);
        // Bound absorbs the floor of a nonnegative exponent.
        assert_eq!(
            NormValue::below(8).mul(&nv_rat(3, 2)),
            NormValue::BelowPrecision { bound: 9, lossy: false }
        );
        // A factor larger than one cannot tighten the bound: flagged.
        assert_eq!(
            NormValue::below(8).mul(&nv_int(-1)),
            NormValue::BelowPrecision { bound: 8, lossy: true }
        );
    }

    #[test]
    fn render_parse_round_trip() {
        for v in [
            NormValue::Zero,
            nv_int(0),
            nv_int(-3),
            nv_rat(3, 2),
            nv_rat(-7, 8),
            NormValue::below(16),
        ] {
            assert_eq!(NormValue::parse(&v.render()).unwrap(), v);
        }
    }

    #[test]
    fn powers_and_roots() {
        assert_eq!(nv_rat(1, 2).pow(3), nv_rat(3, 2));
        assert_eq!(nv_rat(3, 2).root(3, 2).unwrap(), nv_rat(1, 2));
        assert!(nv_int(1).root(3, 2).is_err()); // 1/3 leaves the 2-power grid
    }
}
