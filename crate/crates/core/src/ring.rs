//! The model ring: truncations of the perfected Laurent series field F_p((T))
//! at depth k and precision N, together with finite products of such rings.
//!
//! An element stores, per product factor, a finite sorted list of
//! `(exponent, coefficient)` pairs with exponents in `(1/p^k)Z`, all below N
//! and at or above the Laurent floor. Arithmetic is exact except that terms
//! at or above `T^N` are dropped and the element is flagged; a flagged
//! all-zero element is "zero below precision", distinct from literal zero.

use crate::error::{Error, Result};
use crate::valnorm::{denom_is_p_power, Exp, NormValue};
use num_rational::Rational64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RingConfig {
    pub p: u32,
    pub k: u32,
    #[serde(rename = "N")]
    pub precision: u32,
    pub factors: u32,
    /// Lowest representable exponent; defaults to -N.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub floor: Option<i64>,
    /// Guard band (in integer T-exponents) before N inside which pivots are
    /// treated as precision losses. Defaults to 4.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guard: Option<u32>,
}

pub const DEFAULT_GUARD: u32 = 4;

fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl RingConfig {
    pub fn new(p: u32, k: u32, precision: u32, factors: u32) -> Result<Self> {
        let cfg = RingConfig { p, k, precision, factors, floor: None, guard: None };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !is_prime(self.p) {
            return Err(Error::InvalidConfig(format!("p = {} is not prime", self.p)));
        }
        if self.precision == 0 {
            return Err(Error::InvalidConfig("N must be positive".into()));
        }
        if self.factors == 0 {
            return Err(Error::InvalidConfig("factors must be >= 1".into()));
        }
        if self.grid_den_checked().is_none() {
            return Err(Error::InvalidConfig(format!("p^k = {}^{} overflows", self.p, self.k)));
        }
        if let Some(f) = self.floor {
            if f > 0 {
                return Err(Error::InvalidConfig("floor must be <= 0".into()));
            }
        }
        Ok(())
    }

    pub fn floor_exp(&self) -> i64 {
        self.floor.unwrap_or(-i64::from(self.precision))
    }

    pub fn guard_band(&self) -> u32 {
        self.guard.unwrap_or(DEFAULT_GUARD)
    }

    fn grid_den_checked(&self) -> Option<i64> {
        let mut d: i64 = 1;
        for _ in 0..self.k {
            d = d.checked_mul(i64::from(self.p))?;
        }
        Some(d)
    }

    /// p^k, the denominator of the exponent grid.
    pub fn grid_den(&self) -> i64 {
        self.grid_den_checked().expect("validated config")
    }

    /// Two configs describe the same ring (guard band is advisory only).
    pub fn compatible(&self, other: &RingConfig) -> bool {
        self.p == other.p
            && self.k == other.k
            && self.precision == other.precision
            && self.factors == other.factors
            && self.floor_exp() == other.floor_exp()
    }

    pub fn require_compatible(&self, other: &RingConfig, what: &str) -> Result<()> {
        if self.compatible(other) {
            Ok(())
        } else {
            Err(Error::ConfigMismatch(what.to_string()))
        }
    }

    pub fn with_level(&self, k: u32) -> RingConfig {
        RingConfig { k, ..*self }
    }

    /// Check that an exponent is on the grid and inside the window.
    pub fn check_exponent(&self, e: &Exp) -> Result<()> {
        if !denom_is_p_power(e, self.p) {
            return Err(Error::NotPPowerDenominator { denom: *e.denom(), p: self.p });
        }
        if *e.denom() > self.grid_den() {
            return Err(Error::DepthExceeded { exp: e.to_string(), p: self.p, k: self.k });
        }
        if *e >= Rational64::from_integer(i64::from(self.precision)) {
            return Err(Error::PrecisionExceeded { exp: e.to_string(), n: self.precision });
        }
        if *e < Rational64::from_integer(self.floor_exp()) {
            return Err(Error::FloorExceeded { exp: e.to_string(), floor: self.floor_exp() });
        }
        Ok(())
    }
}

/// One factor of a (possibly product) ring element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct FactorPoly {
    /// Sorted by exponent; coefficients in 1..p.
    pub terms: Vec<(Exp, u32)>,
    /// Set when arithmetic dropped terms at or above T^N.
    pub lossy: bool,
}

impl FactorPoly {
    pub fn is_literal_zero(&self) -> bool {
        self.terms.is_empty() && !self.lossy
    }

    pub fn valuation(&self) -> Option<Exp> {
        self.terms.first().map(|(e, _)| *e)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RingElement {
    pub cfg: RingConfig,
    pub factors: Vec<FactorPoly>,
}

pub(crate) fn normalize_terms(p: u32, mut terms: Vec<(Exp, u32)>) -> Vec<(Exp, u32)> {
    terms.sort_by(|a, b| a.0.cmp(&b.0));
    let mut out: Vec<(Exp, u32)> = Vec::with_capacity(terms.len());
    for (e, c) in terms {
        let c = c % p;
        if c == 0 {
            continue;
        }
        match out.last_mut() {
            Some((le, lc)) if *le == e => {
                *lc = (*lc + c) % p;
                if *lc == 0 {
                    out.pop();
                }
            }
            _ => out.push((e, c)),
        }
    }
    out
}

impl RingElement {
    pub fn zero(cfg: &RingConfig) -> Self {
        RingElement {
            cfg: *cfg,
            factors: vec![FactorPoly::default(); cfg.factors as usize],
        }
    }

    pub fn one(cfg: &RingConfig) -> Self {
        let f = FactorPoly { terms: vec![(Rational64::zero(), 1)], lossy: false };
        RingElement { cfg: *cfg, factors: vec![f; cfg.factors as usize] }
    }

    /// `c * T^e` in every factor.
    pub fn monomial(cfg: &RingConfig, e: Exp, c: u32) -> Result<Self> {
        cfg.check_exponent(&e)?;
        let c = c % cfg.p;
        let f = if c == 0 {
            FactorPoly::default()
        } else {
            FactorPoly { terms: vec![(e, c)], lossy: false }
        };
        Ok(RingElement { cfg: *cfg, factors: vec![f; cfg.factors as usize] })
    }

    /// Assemble a product element from single-factor parts.
    pub fn from_parts(cfg: &RingConfig, parts: Vec<FactorPoly>) -> Result<Self> {
        if parts.len() != cfg.factors as usize {
            return Err(Error::ConfigMismatch(format!(
                "expected {} factors, got {}",
                cfg.factors,
                parts.len()
            )));
        }
        Ok(RingElement { cfg: *cfg, factors: parts })
    }

    pub fn single(&self) -> Result<&FactorPoly> {
        if self.factors.len() != 1 {
            return Err(Error::UnsupportedProductRing { op: "single-factor access" });
        }
        Ok(&self.factors[0])
    }

    pub fn is_literal_zero(&self) -> bool {
        self.factors.iter().all(|f| f.is_literal_zero())
    }

    pub fn is_lossy(&self) -> bool {
        self.factors.iter().any(|f| f.lossy)
    }

    pub fn add(&self, other: &RingElement) -> Result<RingElement> {
        self.cfg.require_compatible(&other.cfg, "add")?;
        let factors = self
            .factors
            .iter()
            .zip(&other.factors)
            .map(|(a, b)| {
                let mut terms = a.terms.clone();
                terms.extend_from_slice(&b.terms);
                FactorPoly { terms: normalize_terms(self.cfg.p, terms), lossy: a.lossy || b.lossy }
            })
            .collect();
        Ok(RingElement { cfg: self.cfg, factors })
    }

    pub fn neg(&self) -> RingElement {
        let p = self.cfg.p;
        let factors = self
            .factors
            .iter()
            .map(|f| FactorPoly {
                terms: f.terms.iter().map(|(e, c)| (*e, (p - c) % p)).collect(),
                lossy: f.lossy,
            })
            .collect();
        RingElement { cfg: self.cfg, factors }
    }

    pub fn sub(&self, other: &RingElement) -> Result<RingElement> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: u32) -> RingElement {
        let p = self.cfg.p;
        let c = c % p;
        let factors = self
            .factors
            .iter()
            .map(|f| FactorPoly {
                terms: normalize_terms(p, f.terms.iter().map(|(e, k)| (*e, k * c)).collect()),
                lossy: f.lossy,
            })
            .collect();
        RingElement { cfg: self.cfg, factors }
    }

    pub fn mul(&self, other: &RingElement) -> Result<RingElement> {
        self.cfg.require_compatible(&other.cfg, "mul")?;
        let n = Rational64::from_integer(i64::from(self.cfg.precision));
        let floor = Rational64::from_integer(self.cfg.floor_exp());
        let mut factors = Vec::with_capacity(self.factors.len());
        for (a, b) in self.factors.iter().zip(&other.factors) {
            let mut terms = Vec::with_capacity(a.terms.len() * b.terms.len());
            let mut lossy = a.lossy || b.lossy;
            for (ea, ca) in &a.terms {
                for (eb, cb) in &b.terms {
                    let e = ea + eb;
                    if e >= n {
                        lossy = true;
                        continue;
                    }
                    if e < floor {
                        return Err(Error::FloorExceeded {
                            exp: e.to_string(),
                            floor: self.cfg.floor_exp(),
                        });
                    }
                    terms.push((e, ca * cb));
                }
            }
            factors.push(FactorPoly { terms: normalize_terms(self.cfg.p, terms), lossy });
        }
        Ok(RingElement { cfg: self.cfg, factors })
    }

    pub fn pow(&self, m: u32) -> Result<RingElement> {
        let mut acc = RingElement::one(&self.cfg);
        for _ in 0..m {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Multiply by `T^e` (valid in every factor).
    pub fn shift(&self, e: Exp) -> Result<RingElement> {
        let n = Rational64::from_integer(i64::from(self.cfg.precision));
        let floor = Rational64::from_integer(self.cfg.floor_exp());
        if !denom_is_p_power(&e, self.cfg.p) || *e.denom() > self.cfg.grid_den() {
            return Err(Error::DepthExceeded { exp: e.to_string(), p: self.cfg.p, k: self.cfg.k });
        }
        let mut factors = Vec::with_capacity(self.factors.len());
        for f in &self.factors {
            let mut lossy = f.lossy;
            let mut terms = Vec::with_capacity(f.terms.len());
            for (ex, c) in &f.terms {
                let e2 = ex + e;
                if e2 >= n {
                    lossy = true;
                    continue;
                }
                if e2 < floor {
                    return Err(Error::FloorExceeded {
                        exp: e2.to_string(),
                        floor: self.cfg.floor_exp(),
                    });
                }
                terms.push((e2, *c));
            }
            factors.push(FactorPoly { terms, lossy });
        }
        Ok(RingElement { cfg: self.cfg, factors })
    }

    /// Norm of a single factor: 2^-(lowest exponent); literal zero maps to
    /// zero, truncated zero to a below-precision marker.
    fn factor_norm(&self, f: &FactorPoly) -> NormValue {
        match f.valuation() {
            Some(v) => NormValue::Exact(v),
            None if f.lossy => NormValue::below(self.cfg.precision),
            None => NormValue::Zero,
        }
    }

    /// The model norm: multiplicative on each factor, maximum over factors.
    pub fn norm(&self) -> NormValue {
        let mut best = NormValue::Zero;
        for f in &self.factors {
            let v = self.factor_norm(f);
            // Exponents are < N, so the max against a below-precision marker
            // bound N is always decidable.
            best = best.max(&v).expect("factor norms are comparable");
        }
        best
    }

    /// Inverse at working precision. Errors when some factor has no visible
    /// leading term (literal zero or truncated to zero).
    pub fn inverse(&self) -> Result<RingElement> {
        let p = self.cfg.p;
        let n = Rational64::from_integer(i64::from(self.cfg.precision));
        let floor = Rational64::from_integer(self.cfg.floor_exp());
        let mut factors = Vec::with_capacity(self.factors.len());
        for f in &self.factors {
            let (v, c0) = match f.terms.first() {
                Some(&(v, c)) => (v, c),
                None => return Err(Error::NotInvertible),
            };
            if -v < floor {
                return Err(Error::FloorExceeded {
                    exp: (-v).to_string(),
                    floor: self.cfg.floor_exp(),
                });
            }
            let c0_inv = mod_inv(c0, p);
            // x = c0 T^v (1 + y); invert the unit part by geometric series.
            let y: Vec<(Exp, u32)> = f
                .terms
                .iter()
                .skip(1)
                .map(|(e, c)| (e - v, (c * c0_inv) % p))
                .collect();
            // Accumulate sum_{j} (-y)^j, truncating exponents at N - (-v)
            // relative to the shift so the final element stays below N.
            let cut = n - (-v);
            let mut acc: Vec<(Exp, u32)> = vec![(Exp::zero(), 1)];
            let mut pow: Vec<(Exp, u32)> = vec![(Exp::zero(), 1)];
            let mut lossy = f.lossy;
            loop {
                // pow <- pow * (-y), truncated at `cut`
                let mut next: Vec<(Exp, u32)> = Vec::new();
                for (ea, ca) in &pow {
                    for (eb, cb) in &y {
                        let e = ea + eb;
                        if e >= cut {
                            lossy = true;
                            continue;
                        }
                        next.push((e, (ca * ((p - cb) % p)) % p));
                    }
                }
                pow = normalize_terms(p, next);
                if pow.is_empty() {
                    break;
                }
                acc.extend_from_slice(&pow);
                acc = normalize_terms(p, acc);
            }
            let terms: Vec<(Exp, u32)> = acc
                .into_iter()
                .map(|(e, c)| (e - v, (c * c0_inv) % p))
                .collect();
            factors.push(FactorPoly { terms: normalize_terms(p, terms), lossy });
        }
        Ok(RingElement { cfg: self.cfg, factors })
    }

    /// inf over 1 <= n <= n_max of norm(x^n)^(1/n). In this family of rings
    /// the norm is power-multiplicative, so the infimum always equals the
    /// norm; the computation performs the honest scan and asserts as much.
    pub fn spectral_seminorm(&self, n_max: u32) -> Result<NormValue> {
        if n_max == 0 {
            return Err(Error::Invalid("n_max must be >= 1".into()));
        }
        let direct = self.norm();
        if direct.is_zero() {
            return Ok(NormValue::Zero);
        }
        let mut best: Option<NormValue> = None;
        let mut x = RingElement::one(&self.cfg);
        for n in 1..=n_max {
            x = x.mul(self)?;
            if x.factors.iter().any(|f| f.terms.is_empty() && f.lossy) {
                return Err(Error::PrecisionExceeded {
                    exp: format!("x^{} truncates to zero", n),
                    n: self.cfg.precision,
                });
            }
            let root = x.norm().root(n, self.cfg.p)?;
            best = Some(match best {
                None => root,
                Some(b) => b.min(&root)?,
            });
        }
        let best = best.expect("n_max >= 1");
        assert_eq!(
            best, direct,
            "norm must be power-multiplicative in this ring family"
        );
        Ok(best)
    }

    /// True iff x is a unit with multiplicative norm: ||x|| * ||x^-1|| = 1.
    pub fn is_norm_multiplicative_unit(&self) -> Result<bool> {
        let inv = match self.inverse() {
            Ok(i) => i,
            Err(Error::NotInvertible) => return Ok(false),
            Err(e) => return Err(e),
        };
        Ok(self.norm().mul(&inv.norm()) == NormValue::Exact(Exp::zero()))
    }

    /// View the element in the ring refined to depth k' >= k.
    pub fn base_change_level(&self, k2: u32) -> Result<RingElement> {
        if k2 < self.cfg.k {
            return Err(Error::InvalidDepth { depth: k2, k: self.cfg.k });
        }
        let mut out = self.clone();
        out.cfg = self.cfg.with_level(k2);
        Ok(out)
    }

    pub fn render(&self) -> String {
        let parts: Vec<String> = self.factors.iter().map(|f| render_factor(f)).collect();
        if self.factors.len() == 1 {
            parts.into_iter().next().unwrap()
        } else {
            format!("({})", parts.join(" | "))
        }
    }
}

fn render_factor(f: &FactorPoly) -> String {
    if f.terms.is_empty() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (e, c)) in f.terms.iter().enumerate() {
        if i > 0 {
            out.push_str(" + ");
        }
        if e.is_zero() {
            out.push_str(&c.to_string());
            continue;
        }
        if *c != 1 {
            out.push_str(&format!("{}*", c));
        }
        if *e == Rational64::from_integer(1) {
            out.push('T');
        } else if *e.denom() == 1 {
            out.push_str(&format!("T^({})", e.numer()));
        } else {
            out.push_str(&format!("T^({}/{})", e.numer(), e.denom()));
        }
    }
    out
}

pub fn mod_inv(c: u32, p: u32) -> u32 {
    // p is a small prime; extended Euclid.
    let (mut t, mut new_t): (i64, i64) = (0, 1);
    let (mut r, mut new_r): (i64, i64) = (i64::from(p), i64::from(c % p));
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    assert_eq!(r, 1, "not invertible mod p");
    (t.rem_euclid(i64::from(p))) as u32
}
