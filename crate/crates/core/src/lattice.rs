//! Lattices in A^n and their gauge seminorms.
//!
//! A lattice is a finitely generated module of column vectors over a declared
//! coefficient ring: the unit ball A_{≤1} of the model ring, or a monomial
//! F_p-subalgebra of it. The gauge seminorm of a lattice only depends on the
//! A_{≤1}-span of its generators, so membership and gauge queries always run
//! against that span; the declared coefficient ring matters for reduction,
//! for the subring seminorm checks, and for the module-theoretic operations
//! in `almostmod`.

use num_traits::Signed;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{self, Col, Ctx, Reduced, SPoly};
use crate::parse::parse_element;
use crate::ring::{RingConfig, RingElement};
use crate::valnorm::{nv_from_exponent, Exp, NormValue};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoeffRing {
    /// A_{≤1} at the lattice's level.
    UnitBall,
    /// The F_p-span of monomials whose exponents lie in the monoid generated
    /// by `gens` (always including 0, i.e. the subring contains F_p).
    Monomial { gens: Vec<Exp> },
}

impl CoeffRing {
    pub fn is_unit_ball(&self) -> bool {
        matches!(self, CoeffRing::UnitBall)
    }
}

pub fn exp_to_string(e: &Exp) -> String {
    if *e.denom() == 1 {
        format!("{}", e.numer())
    } else {
        format!("{}/{}", e.numer(), e.denom())
    }
}

pub fn exp_from_str(s: &str) -> Result<Exp> {
    let parse_int = |t: &str| -> Result<i64> {
        t.trim()
            .parse::<i64>()
            .map_err(|_| Error::Invalid(format!("bad exponent literal {:?}", s)))
    };
    match s.split_once('/') {
        None => Ok(Exp::from_integer(parse_int(s)?)),
        Some((a, b)) => {
            let d = parse_int(b)?;
            if d == 0 {
                return Err(Error::Invalid(format!("zero denominator in {:?}", s)));
            }
            Ok(Exp::new(parse_int(a)?, d))
        }
    }
}

impl Serialize for CoeffRing {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            CoeffRing::UnitBall => ser.serialize_str("unit_ball"),
            CoeffRing::Monomial { gens } => {
                use serde::ser::SerializeMap;
                let mut m = ser.serialize_map(Some(1))?;
                m.serialize_entry(
                    "monomial",
                    &gens.iter().map(exp_to_string).collect::<Vec<_>>(),
                )?;
                m.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for CoeffRing {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Tag(String),
            Monomial { monomial: Vec<serde_json::Value> },
        }
        match Repr::deserialize(de)? {
            Repr::Tag(t) if t == "unit_ball" => Ok(CoeffRing::UnitBall),
            Repr::Tag(t) => Err(D::Error::custom(format!("unknown coefficient ring {:?}", t))),
            Repr::Monomial { monomial } => {
                let mut gens = Vec::with_capacity(monomial.len());
                for v in monomial {
                    let e = match &v {
                        serde_json::Value::Number(n) => n
                            .as_i64()
                            .map(Exp::from_integer)
                            .ok_or_else(|| D::Error::custom("non-integer numeric exponent")),
                        serde_json::Value::String(s) => {
                            exp_from_str(s).map_err(|e| D::Error::custom(e.to_string()))
                        }
                        _ => Err(D::Error::custom("exponent must be a number or string")),
                    }?;
                    gens.push(e);
                }
                Ok(CoeffRing::Monomial { gens })
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    pub cfg: RingConfig,
    pub rank: usize,
    pub coeff_ring: CoeffRing,
    pub generators: Vec<Vec<RingElement>>,
}

#[derive(Serialize, Deserialize)]
struct LatticeRepr {
    cfg: RingConfig,
    rank: usize,
    coeff_ring: CoeffRing,
    generators: Vec<Vec<String>>,
}

impl Serialize for Lattice {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        LatticeRepr {
            cfg: self.cfg.clone(),
            rank: self.rank,
            coeff_ring: self.coeff_ring.clone(),
            generators: self
                .generators
                .iter()
                .map(|g| g.iter().map(|e| e.render()).collect())
                .collect(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Lattice {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let repr = LatticeRepr::deserialize(de)?;
        let mut generators = Vec::with_capacity(repr.generators.len());
        for g in &repr.generators {
            let mut vec = Vec::with_capacity(g.len());
            for s in g {
                vec.push(parse_element(s, &repr.cfg).map_err(|e| D::Error::custom(e.to_string()))?);
            }
            generators.push(vec);
        }
        Lattice::new(repr.cfg, repr.rank, repr.coeff_ring, generators)
            .map_err(|e| D::Error::custom(e.to_string()))
    }
}

impl Lattice {
    pub fn new(
        cfg: RingConfig,
        rank: usize,
        coeff_ring: CoeffRing,
        generators: Vec<Vec<RingElement>>,
    ) -> Result<Lattice> {
        let lat = Lattice { cfg, rank, coeff_ring, generators };
        lat.validate()?;
        Ok(lat)
    }

    pub fn validate(&self) -> Result<()> {
        self.cfg.validate()?;
        if self.cfg.factors != 1 {
            return Err(Error::UnsupportedProductRing { op: "lattice" });
        }
        if self.rank == 0 {
            return Err(Error::InvalidConfig("lattice rank must be at least 1".into()));
        }
        for g in &self.generators {
            if g.len() != self.rank {
                return Err(Error::ConfigMismatch(format!(
                    "generator has {} coordinates, lattice rank is {}",
                    g.len(),
                    self.rank
                )));
            }
            for e in g {
                self.cfg.require_compatible(&e.cfg, "lattice generator")?;
                if e.is_lossy() {
                    return Err(Error::PrecisionLoss(
                        "lattice generators must be exact; a coordinate carries truncated terms"
                            .into(),
                    ));
                }
            }
        }
        if let CoeffRing::Monomial { gens } = &self.coeff_ring {
            for e in gens {
                if !e.is_positive() {
                    return Err(Error::Invalid(
                        "monomial subring exponents must be positive".into(),
                    ));
                }
                self.cfg.check_exponent(e)?;
            }
        }
        Ok(())
    }

    pub fn base_change_level(&self, k2: u32) -> Result<Lattice> {
        let generators = self
            .generators
            .iter()
            .map(|g| g.iter().map(|e| e.base_change_level(k2)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Lattice::new(self.cfg.with_level(k2), self.rank, self.coeff_ring.clone(), generators)
    }

    pub fn from_json(text: &str) -> Result<Lattice> {
        serde_json::from_str(text).map_err(|e| Error::Invalid(format!("lattice JSON: {}", e)))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("lattice serialization cannot fail")
    }
}

// ---------------------------------------------------------------------------
// Engine plumbing.

/// Scale a vector of ring elements into engine columns (exponent · den).
pub(crate) fn vec_to_col(v: &[RingElement], den: i64) -> Result<Col> {
    v.iter()
        .map(|e| {
            let f = e.single()?;
            let mut terms = Vec::with_capacity(f.terms.len());
            for (exp, c) in &f.terms {
                let scaled = exp * Exp::from_integer(den);
                debug_assert!(*scaled.denom() == 1, "exponent off the lattice grid");
                terms.push((*scaled.numer(), *c));
            }
            Ok(SPoly { terms, lossy: f.lossy })
        })
        .collect()
}

pub(crate) fn col_to_vec(col: &Col, cfg: &RingConfig) -> Result<Vec<RingElement>> {
    let den = cfg.grid_den();
    col.iter()
        .map(|s| {
            let mut terms = Vec::with_capacity(s.terms.len());
            for &(e, c) in &s.terms {
                let exp = Exp::new(e, den);
                cfg.check_exponent(&exp).map_err(|_| {
                    Error::PrecisionLoss(format!(
                        "reduced generator needs T^({}/{}) outside the representable window",
                        e, den
                    ))
                })?;
                terms.push((exp, c));
            }
            let mut out = RingElement::zero(cfg);
            out.factors[0].terms = terms;
            out.factors[0].lossy = s.lossy;
            Ok(out)
        })
        .collect()
}

/// Two reductions of the same generators, for two kinds of question.
///
/// Seminorm queries (membership at a shift, gauge searches, span comparison)
/// run against the *window* form: generators are pre-multiplied by T^{2N} and
/// reduced modulo T^{3N}, so the answer is membership in the precision-window
/// closure T^s·(span + T^N·A_{≤1}^n). Nothing representable distinguishes the
/// closure from the span, the fixed cut makes verdicts from different
/// generating sets directly comparable, and shifts up to two windows in
/// either direction stay inside the ring.
///
/// Module structure (syzygies, cokernels, membership certificates over the
/// original generators) runs against the *exact* form, whose cut is sized to
/// the data so that the reported relations are honest identities.
pub(crate) struct SpanEngine {
    pub den: i64,
    /// Window pre-shift in engine exponents: two precision windows.
    pub base: i64,
    /// Fixed-cut context (three windows) for the window form.
    pub wctx: Ctx,
    /// Canonical form of the generators times x^base, in `wctx`.
    pub wred: Reduced,
    /// Data-sized context for the exact form.
    pub xctx: Ctx,
    /// Canonical form of the raw generator columns, in `xctx`.
    pub xred: Reduced,
}

pub(crate) fn build_engine(lat: &Lattice, track: bool) -> Result<SpanEngine> {
    lat.validate()?;
    let den = lat.cfg.grid_den();
    let cols = lat
        .generators
        .iter()
        .map(|g| vec_to_col(g, den))
        .collect::<Result<Vec<_>>>()?;
    let xctx = Ctx::for_data(lat.cfg.p, lat.cfg.k, lat.cfg.precision, &cols);
    let window = i64::from(lat.cfg.precision) * den;
    let base = 2 * window;
    let wctx = Ctx { p: lat.cfg.p, level: lat.cfg.k, cut: 3 * window };
    let wcols: Vec<Col> = cols
        .iter()
        .map(|c| c.iter().map(|s| s.shift(base, &wctx)).collect())
        .collect();
    let wred = linalg::reduce_columns(&wctx, wcols, false);
    let xred = linalg::reduce_columns(&xctx, cols, track);
    Ok(SpanEngine { den, base, wctx, wred, xctx, xred })
}

impl SpanEngine {
    /// Is T^{-s}·x in the window closure of the span? `x` is a raw (unshifted)
    /// column; `s_scaled` is the shift in engine exponents. Content pushed to
    /// or beyond three windows is absorbed by the closure.
    pub fn solve_window(&self, x: &Col, s_scaled: i64) -> linalg::Solve {
        let shifted: Col = x.iter().map(|e| e.shift(self.base - s_scaled, &self.wctx)).collect();
        self.wred.solve(&shifted)
    }

    pub fn member_window(&self, x: &Col, s_scaled: i64) -> bool {
        matches!(self.solve_window(x, s_scaled), linalg::Solve::Member(_))
    }
}

// ---------------------------------------------------------------------------
// Membership and gauge.

fn check_query(x: &[RingElement], lat: &Lattice) -> Result<()> {
    if x.len() != lat.rank {
        return Err(Error::ConfigMismatch(format!(
            "vector has {} coordinates, lattice rank is {}",
            x.len(),
            lat.rank
        )));
    }
    for e in x {
        lat.cfg.require_compatible(&e.cfg, "membership query")?;
    }
    Ok(())
}

pub(crate) fn grid_scaled(s: &Exp, cfg: &RingConfig, what: &str) -> Result<i64> {
    let den = cfg.grid_den();
    let scaled = s * Exp::from_integer(den);
    if *scaled.denom() != 1 {
        return Err(Error::NotPPowerDenominator { denom: *s.denom(), p: cfg.p });
    }
    let v = *scaled.numer();
    let bound = 2 * i64::from(cfg.precision) * den;
    if v.abs() > bound {
        return Err(Error::Invalid(format!("{} exponent {} out of range", what, s)));
    }
    Ok(v)
}

/// Does x lie in T^s · (A_{≤1}-span of the lattice generators)?
pub fn membership(x: &[RingElement], lat: &Lattice, s: Exp) -> Result<bool> {
    check_query(x, lat)?;
    let s_scaled = grid_scaled(&s, &lat.cfg, "membership shift")?;
    if x.iter().all(|e| e.is_literal_zero()) {
        return Ok(true);
    }
    let eng = build_engine(lat, false)?;
    membership_scaled(&eng, x, lat, s_scaled)
}

/// Membership with lossy-query handling: a truncated coordinate carries an
/// unknown tail supported at or above T^N, so the verdict must not depend on
/// it.
pub(crate) fn membership_scaled(
    eng: &SpanEngine,
    x: &[RingElement],
    lat: &Lattice,
    s_scaled: i64,
) -> Result<bool> {
    let den = eng.den;
    let col = vec_to_col(x, den)?;
    let lossy_coords: Vec<usize> =
        x.iter().enumerate().filter(|(_, e)| e.is_lossy()).map(|(i, _)| i).collect();
    let shifted: Col = col.iter().map(|e| e.shift(-s_scaled, &eng.ctx)).collect();
    match eng.red.solve(&shifted) {
        linalg::Solve::Member(_) => {
            if lossy_coords.is_empty() {
                return Ok(true);
            }
            // The tail is any element supported at exponents ≥ N. It stays
            // irrelevant exactly when T^N·e_j already lies in T^s·L for each
            // truncated coordinate j.
            let n_scaled = i64::from(lat.cfg.precision) * den;
            for &j in &lossy_coords {
                let mut unit: Col = vec![SPoly::zero(); lat.rank];
                unit[j] = SPoly::monomial(n_scaled, 1, lat.cfg.p);
                if !eng.member_shifted(&unit, s_scaled) {
                    return Err(Error::PrecisionLoss(format!(
                        "membership depends on truncated terms of coordinate {}",
                        j
                    )));
                }
            }
            Ok(true)
        }
        linalg::Solve::NotMember { residual_val } => {
            if lossy_coords.is_empty() {
                return Ok(false);
            }
            // The unknown tail, shifted by -s, sits at exponents
            // ≥ N·den − s. A residual strictly below that cannot be mended.
            if residual_val < i64::from(lat.cfg.precision) * den - s_scaled {
                Ok(false)
            } else {
                Err(Error::PrecisionLoss(
                    "membership depends on truncated terms near the precision window".into(),
                ))
            }
        }
    }
}

/// Gauge seminorm of x against the lattice: sup of 2^{-s} ... more precisely
/// the norm value 2^{-s*} for the largest grid s* with x ∈ T^{s*}·L.
pub fn gauge(x: &[RingElement], lat: &Lattice) -> Result<NormValue> {
    check_query(x, lat)?;
    if x.iter().all(|e| e.is_literal_zero()) {
        return Ok(NormValue::Zero);
    }
    let eng = build_engine(lat, false)?;
    gauge_with_engine(&eng, x, lat, 1)
}

/// Gauge restricted to the grid (den/step)·Z; step 1 is the full grid.
pub(crate) fn gauge_with_engine(
    eng: &SpanEngine,
    x: &[RingElement],
    lat: &Lattice,
    step: i64,
) -> Result<NormValue> {
    let den = eng.den;
    let n = i64::from(lat.cfg.precision);
    // Scan bounds in grid steps: s = m·step for m in [-n·den/step, n·den/step].
    let m_hi = n * den / step;
    let m_lo = -m_hi;
    let member = |m: i64| -> Result<bool> { membership_scaled(eng, x, lat, m * step) };
    if !member(m_lo)? {
        return Err(Error::NotInSpan);
    }
    if member(m_hi)? {
        // At or below the precision window.
        return Ok(NormValue::below(lat.cfg.precision));
    }
    let (mut lo, mut hi) = (m_lo, m_hi);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if member(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    nv_from_exponent(Exp::new(lo * step, den), lat.cfg.p)
}

// ---------------------------------------------------------------------------
// Reduction and saturation.

fn reduced_lattice(lat: &Lattice, enforce_guard: bool) -> Result<(Lattice, SpanEngine)> {
    let eng = build_engine(lat, false)?;
    let den = eng.den;
    if enforce_guard {
        let guard = i64::from(lat.cfg.guard_band());
        let n = i64::from(lat.cfg.precision);
        for &(_, v) in &eng.red.pivots {
            if v >= (n - guard) * den {
                return Err(Error::PrecisionLoss(format!(
                    "reduced pivot valuation {}/{} is inside the guard band below T^{}",
                    v, den, n
                )));
            }
        }
    }
    let generators = eng
        .red
        .cols
        .iter()
        .map(|c| col_to_vec(c, &lat.cfg))
        .collect::<Result<Vec<_>>>()?;
    let out = Lattice::new(lat.cfg.clone(), lat.rank, CoeffRing::UnitBall, generators)?;
    Ok((out, eng))
}

/// Canonical generating set over A_{≤1}. Only unit-ball lattices: reducing a
/// monomial-subring lattice over A_{≤1} would silently change its module.
pub fn lattice_reduce(lat: &Lattice) -> Result<Lattice> {
    if !lat.coeff_ring.is_unit_ball() {
        return Err(Error::UnsupportedCoefficientRing { op: "lattice_reduce" });
    }
    Ok(reduced_lattice(lat, true)?.0)
}

/// The closed unit ball of the gauge: the canonical A_{≤1}-span of the
/// generators, whatever the declared coefficient ring.
pub fn closed_unit_ball(lat: &Lattice) -> Result<Lattice> {
    Ok(reduced_lattice(lat, false)?.0)
}

/// Span equality over A_{≤1} (canonical forms are unique, so this is a
/// structural comparison in a shared context).
pub fn same_span(a: &Lattice, b: &Lattice) -> Result<bool> {
    a.cfg.require_compatible(&b.cfg, "span comparison")?;
    if a.rank != b.rank {
        return Ok(false);
    }
    let den = a.cfg.grid_den();
    let cols_a = a.generators.iter().map(|g| vec_to_col(g, den)).collect::<Result<Vec<_>>>()?;
    let cols_b = b.generators.iter().map(|g| vec_to_col(g, den)).collect::<Result<Vec<_>>>()?;
    let mut all = cols_a.clone();
    all.extend(cols_b.iter().cloned());
    let ctx = Ctx::for_data(a.cfg.p, a.cfg.k, a.cfg.precision, &all);
    let ra = linalg::reduce_columns(&ctx, cols_a, false);
    let rb = linalg::reduce_columns(&ctx, cols_b, false);
    Ok(ra.same_span(&rb))
}

// ---------------------------------------------------------------------------
// Almost elements.

#[derive(Clone, Debug)]
pub struct AlmostElements {
    /// Canonical lattice of almost elements at the requested depth.
    pub lattice: Lattice,
    pub depth: u32,
    /// The depth-(K+1) recomputation agreed with the depth-K result.
    pub stabilized: bool,
}

/// Module of almost elements at depth K: the saturation of the lattice over
/// the level-K unit ball. The finite intersection ⋂_{n≤K} T^{-1/p^n}·S
/// collapses to T^{-1/p^K}·S; that identity is recomputed as an internal
/// certificate before the saturated lattice is returned.
pub fn almost_elements(lat: &Lattice, depth: u32) -> Result<AlmostElements> {
    if depth < lat.cfg.k {
        return Err(Error::InvalidDepth { depth, k: lat.cfg.k });
    }
    let lat_k = lat.base_change_level(depth)?;
    let (sat, eng) = reduced_lattice(&lat_k, false)?;

    // Certificate: the iterated engine intersections ⋂_{n=1..K} T^{-1/p^n}·S
    // must reproduce the collapsed form T^{-1/p^K}·S. Failure means the
    // engine contradicted an exact identity, which is a precision problem we
    // must surface, not paper over.
    if depth > 0 {
        let den = eng.den; // p^depth
        let base: Vec<Col> = eng.red.cols.clone();
        let shifted_span = |n: u32| -> Vec<Col> {
            let shift = den / i64::from(lat.cfg.p).pow(n);
            base.iter()
                .map(|c| c.iter().map(|s| s.shift(-shift, &eng.ctx)).collect())
                .collect()
        };
        // The chain runs over n = 1..=K only; the terms are nested downwards,
        // so the intersection is the n = K term.
        let mut chain = shifted_span(1);
        for n in 2..=depth {
            chain = linalg::intersect(&eng.ctx, &chain, &shifted_span(n))?;
        }
        // Collapsed form: shift by 1/p^K, i.e. one engine unit at level K.
        let expected: Vec<Col> = base
            .iter()
            .map(|c| c.iter().map(|s| s.shift(-1, &eng.ctx)).collect())
            .collect();
        let chain_red = linalg::reduce_columns(&eng.ctx, chain, false);
        let expect_red = linalg::reduce_columns(&eng.ctx, expected, false);
        if !chain_red.same_span(&expect_red) {
            return Err(Error::PrecisionUndecidable(
                "almost-element intersection certificate disagrees with the collapsed form".into(),
            ));
        }
    }

    // Stability: recompute one level deeper and compare saturations.
    let stabilized = match lat.base_change_level(depth + 1) {
        Err(_) => false,
        Ok(next) => {
            let sat_next = closed_unit_ball(&next)?;
            same_span(&sat.base_change_level(depth + 1)?, &sat_next)?
        }
    };
    Ok(AlmostElements { lattice: sat, depth, stabilized })
}

// ---------------------------------------------------------------------------
// Discrete-grid norms.

/// The canonical ϖ-adic seminorm at grid depth n ≤ k: the gauge restricted to
/// exponents in (1/p^n)·Z.
pub fn canonical_pi_adic_norm(x: &[RingElement], lat: &Lattice, n: u32) -> Result<NormValue> {
    if n > lat.cfg.k {
        return Err(Error::InvalidDepth { depth: n, k: lat.cfg.k });
    }
    check_query(x, lat)?;
    if x.iter().all(|e| e.is_literal_zero()) {
        return Ok(NormValue::Zero);
    }
    let eng = build_engine(lat, false)?;
    let step = i64::from(lat.cfg.p).pow(lat.cfg.k - n);
    gauge_with_engine(&eng, x, lat, step)
}

/// Infimum of the canonical seminorms over depths 0..=k. The depth-k term is
/// the full gauge, so for a saturated lattice this equals `gauge`; the scan
/// is kept honest rather than short-circuited.
pub fn discrete_norm_infimum(x: &[RingElement], lat: &Lattice) -> Result<NormValue> {
    check_query(x, lat)?;
    if x.iter().all(|e| e.is_literal_zero()) {
        return Ok(NormValue::Zero);
    }
    let eng = build_engine(lat, false)?;
    let mut best: Option<NormValue> = None;
    for n in 0..=lat.cfg.k {
        let step = i64::from(lat.cfg.p).pow(lat.cfg.k - n);
        let v = gauge_with_engine(&eng, x, lat, step)?;
        best = Some(match best {
            None => v,
            Some(b) => b.min(&v)?,
        });
    }
    Ok(best.expect("at least one grid depth"))
}

// ---------------------------------------------------------------------------
// Subring seminorms.
//
// The gauge seminorm attached to a subring lattice B_0 is insensitive to the
// coefficient ring: A_{≤r}·B_0 = A_{≤r}·(A_{≤1}·B_0), so the seminorm of the
// declared subring equals the gauge of its unit-ball span, and the checks
// below run against the ordinary engine gauge.

#[derive(Clone, Debug, Serialize)]
pub struct SubringFailure {
    pub law: String,
    pub x: String,
    pub y: Option<String>,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SubringReport {
    /// The declared generators multiply back into the subring and 1 is a
    /// member.
    pub closed_under_product: bool,
    /// The saturation of the lattice is all of A_{≤1}^rank.
    pub is_unit_ball: bool,
    pub submultiplicative_failures: Vec<SubringFailure>,
    pub power_multiplicative_failures: Vec<SubringFailure>,
    pub multiplicative_failures: Vec<SubringFailure>,
    pub samples_checked: usize,
}

impl SubringReport {
    pub fn seminorm_laws_hold(&self) -> bool {
        self.closed_under_product
            && self.submultiplicative_failures.is_empty()
            && self.power_multiplicative_failures.is_empty()
    }
}

/// Ring-seminorm diagnostics for a rank-1 subring lattice: submultiplicativity
/// on sample pairs, power-multiplicativity for squares and cubes, and full
/// multiplicativity (expected exactly when the lattice saturates to the unit
/// ball). Law violations are report entries, not errors.
pub fn subring_gauge_checks(lat: &Lattice, samples: &[RingElement]) -> Result<SubringReport> {
    if lat.rank != 1 {
        return Err(Error::Invalid("subring checks need a rank-1 lattice".into()));
    }
    let one = RingElement::one(&lat.cfg);
    let zero_s = Exp::from_integer(0);
    let mut closed = membership(std::slice::from_ref(&one), lat, zero_s)?;
    for a in &lat.generators {
        for b in &lat.generators {
            let prod = a[0].mul(&b[0])?;
            if prod.is_lossy() {
                continue; // product left the precision window; nothing to certify
            }
            if !membership(std::slice::from_ref(&prod), lat, zero_s)? {
                closed = false;
            }
        }
    }
    // The subring is the whole unit ball only if its saturation is the
    // standard lattice *and* the declared coefficients already cover the
    // full exponent grid (a monoid lacking the grid atom 1/p^k is a proper
    // subring even when its unit-ball span is everything).
    let ball = closed_unit_ball(lat)?;
    let spans_everything = ball.generators.len() == 1
        && ball.generators[0][0] == RingElement::one(&lat.cfg);
    let atom = Exp::new(1, lat.cfg.grid_den());
    let coeffs_full_grid = match &lat.coeff_ring {
        CoeffRing::UnitBall => true,
        CoeffRing::Monomial { gens } => gens.contains(&atom),
    };
    let is_unit_ball = spans_everything && coeffs_full_grid;

    let mut report = SubringReport {
        closed_under_product: closed,
        is_unit_ball,
        submultiplicative_failures: Vec::new(),
        power_multiplicative_failures: Vec::new(),
        multiplicative_failures: Vec::new(),
        samples_checked: 0,
    };
    let gauges: Vec<(usize, NormValue)> = samples
        .iter()
        .enumerate()
        .filter(|(_, x)| !x.is_literal_zero() && !x.is_lossy())
        .map(|(i, x)| Ok((i, gauge(std::slice::from_ref(x), lat)?)))
        .collect::<Result<Vec<_>>>()?;
    for (ia, va) in &gauges {
        let a = &samples[*ia];
        // Power-multiplicativity: ‖x^m‖ = ‖x‖^m for m = 2, 3.
        for m in [2u32, 3] {
            let xm = a.pow(m)?;
            if xm.is_lossy() {
                continue;
            }
            let lhs = gauge(std::slice::from_ref(&xm), lat)?;
            let rhs = va.pow(m);
            if lhs.compare(&rhs)? != std::cmp::Ordering::Equal {
                report.power_multiplicative_failures.push(SubringFailure {
                    law: format!("power-multiplicativity (m = {})", m),
                    x: a.render(),
                    y: None,
                    lhs: lhs.render(),
                    rhs: rhs.render(),
                });
            }
        }
        for (ib, vb) in &gauges {
            if ib < ia {
                continue;
            }
            let b = &samples[*ib];
            let prod = a.mul(b)?;
            if prod.is_lossy() {
                continue;
            }
            report.samples_checked += 1;
            let lhs = gauge(std::slice::from_ref(&prod), lat)?;
            let rhs = va.mul(vb);
            match lhs.compare(&rhs) {
                Err(_) => continue, // below-precision values: nothing to certify
                Ok(std::cmp::Ordering::Greater) => {
                    report.submultiplicative_failures.push(SubringFailure {
                        law: "submultiplicativity".into(),
                        x: a.render(),
                        y: Some(b.render()),
                        lhs: lhs.render(),
                        rhs: rhs.render(),
                    });
                }
                Ok(std::cmp::Ordering::Less) => {
                    report.multiplicative_failures.push(SubringFailure {
                        law: "multiplicativity".into(),
                        x: a.render(),
                        y: Some(b.render()),
                        lhs: lhs.render(),
                        rhs: rhs.render(),
                    });
                }
                Ok(std::cmp::Ordering::Equal) => {}
            }
        }
    }
    Ok(report)
}
