//! Tensor products of lattice spans over the model ring.
//!
//! The tensor product of two lattices L1 ⊂ A^{n1}, L2 ⊂ A^{n2} over a shared
//! coefficient ring is presented by the Kronecker generators g_i ⊗ h_j with
//! the relations of each factor tensored against the generators of the other.
//! Its torsion-free part embeds into A^{n1·n2} by (a, b) ↦ a·n2 + b, and the
//! tensor seminorm of that part is the gauge of the image lattice.  A
//! brute-force oracle recomputes the seminorm from monomial decompositions
//! and cross-checks the optimum against mixed (transvected) decompositions.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_rational::Rational64;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::almostmod::{
    combo_vec, sample_combos, span_relations, torsion_submodule, ModulePresentation, Outcome,
    Verdict,
};
use crate::error::{Error, Result};
use crate::lattice::{
    almost_elements, build_engine, gauge, gauge_with_engine, membership, same_span, Lattice,
    SpanEngine,
};
use crate::ring::{FactorPoly, RingConfig, RingElement};
use crate::valnorm::{Exp, NormValue};

/// Largest ambient rank per factor accepted by the decomposition oracle.
const ORACLE_MAX_RANK: usize = 2;
/// Largest number of monomials per factor generator accepted by the oracle.
const ORACLE_MAX_SUPPORT: usize = 4;

/// A tensor product of two lattice spans: its presentation by Kronecker
/// generators, and the torsion-free part embedded in ambient coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorResult {
    pub presentation: ModulePresentation,
    pub torsion_free_part: Lattice,
    pub lossy: bool,
}

impl Serialize for TensorResult {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Flags {
            lossy: bool,
        }
        let gens: Vec<Vec<String>> = self
            .torsion_free_part
            .generators
            .iter()
            .map(|g| g.iter().map(|e| e.render()).collect())
            .collect();
        let mut st = ser.serialize_struct("TensorResult", 3)?;
        st.serialize_field("presentation", &self.presentation)?;
        st.serialize_field("torsion_free_generators", &gens)?;
        st.serialize_field("flags", &Flags { lossy: self.lossy })?;
        st.end()
    }
}

/// Tensor two lattices over the same ring configuration and coefficient
/// ring.  Generators are ordered first-factor-major: g_i ⊗ h_j sits at index
/// i·m2 + j, and ambient coordinate (a, b) of A^{n1} ⊗ A^{n2} at a·n2 + b.
///
/// A generator product whose support truncates at the precision bound has no
/// faithful image in the window, so it is rejected rather than flagged.
pub fn tensor_lattices(l1: &Lattice, l2: &Lattice) -> Result<TensorResult> {
    l1.validate()?;
    l2.validate()?;
    l1.cfg.require_compatible(&l2.cfg, "tensor factors")?;
    if l1.coeff_ring != l2.coeff_ring {
        return Err(Error::ConfigMismatch("tensor factors must share a coefficient ring".into()));
    }
    let cfg = l1.cfg;
    let (n1, n2) = (l1.rank, l2.rank);
    let (m1, m2) = (l1.generators.len(), l2.generators.len());

    let mut kron = Vec::with_capacity(m1 * m2);
    for g in &l1.generators {
        for h in &l2.generators {
            let mut w = Vec::with_capacity(n1 * n2);
            for ga in g {
                for hb in h {
                    let prod = ga.mul(hb)?;
                    if prod.is_lossy() {
                        return Err(Error::PrecisionLoss(format!(
                            "tensor generator coordinate ({})·({}) truncates at T^{}",
                            ga.render(),
                            hb.render(),
                            cfg.precision
                        )));
                    }
                    w.push(prod);
                }
            }
            kron.push(w);
        }
    }

    // Relations: each factor relation against every generator index of the
    // other factor.
    let rel1 = span_relations(l1)?;
    let rel2 = span_relations(l2)?;
    let zero = RingElement::zero(&cfg);
    let mut relations = Vec::with_capacity(rel1.len() * m2 + rel2.len() * m1);
    for r in &rel1 {
        for j in 0..m2 {
            let mut rel = vec![zero.clone(); m1 * m2];
            for (i, c) in r.iter().enumerate() {
                rel[i * m2 + j] = c.clone();
            }
            relations.push(rel);
        }
    }
    for s in &rel2 {
        for i in 0..m1 {
            let mut rel = vec![zero.clone(); m1 * m2];
            for (j, c) in s.iter().enumerate() {
                rel[i * m2 + j] = c.clone();
            }
            relations.push(rel);
        }
    }

    let presentation = ModulePresentation::new(cfg, l1.coeff_ring.clone(), m1 * m2, relations)?;
    let lossy = kron.iter().flatten().any(|e| e.is_lossy());
    let torsion_free_part = Lattice::new(cfg, n1 * n2, l1.coeff_ring.clone(), kron)?;
    Ok(TensorResult { presentation, torsion_free_part, lossy })
}

/// Tensor seminorm of a vector of A^{n1·n2}: the gauge of the torsion-free
/// part of L1 ⊗ L2.
pub fn tensor_gauge(x: &[RingElement], l1: &Lattice, l2: &Lattice) -> Result<NormValue> {
    let t = tensor_lattices(l1, l2)?;
    gauge(x, &t.torsion_free_part)
}

struct Summand {
    a: usize,
    b: usize,
    e: i64,
    f: i64,
    coeff: u32,
    cost: NormValue,
}

/// Brute-force tensor seminorm from monomial decompositions.
///
/// Each monomial summand c·T^e at coordinate (a, b) is decomposed over every
/// grid split T^e = T^{e1}·T^{e2}; its cost is the product of the factor
/// gauges, minimised over splits, and the seminorm is the maximum cost over
/// summands.  When the optimum is exact and the query has several summands,
/// every transvected decomposition
///   x_i ⊗ y_i + x_j ⊗ y_j = (x_i + x_j) ⊗ y_i + x_j ⊗ (y_j − y_i)
/// is costed as well; one beating the optimum proves the true value lies
/// outside the monomial search space, so the oracle declines with a budget
/// error instead of certifying a wrong optimum.
///
/// The search is exponential in spirit, so the instance must be small: both
/// factors of ambient rank ≤ 2, every generator supported on ≤ 4 monomials,
/// and at most `budget` summands in the query.
pub fn tensor_norm_oracle(
    x: &[RingElement],
    l1: &Lattice,
    l2: &Lattice,
    budget: usize,
) -> Result<NormValue> {
    l1.validate()?;
    l2.validate()?;
    l1.cfg.require_compatible(&l2.cfg, "tensor factors")?;
    if l1.coeff_ring != l2.coeff_ring {
        return Err(Error::ConfigMismatch("tensor factors must share a coefficient ring".into()));
    }
    if l1.rank > ORACLE_MAX_RANK || l2.rank > ORACLE_MAX_RANK {
        return Err(Error::BudgetExceeded {
            budget,
            msg: format!("oracle factors must have ambient rank <= {ORACLE_MAX_RANK}"),
        });
    }
    for lat in [l1, l2] {
        for g in &lat.generators {
            let support: usize = g.iter().map(|e| e.single().map_or(0, |p| p.terms.len())).sum();
            if support > ORACLE_MAX_SUPPORT {
                return Err(Error::BudgetExceeded {
                    budget,
                    msg: format!(
                        "oracle generators must be supported on <= {ORACLE_MAX_SUPPORT} monomials"
                    ),
                });
            }
        }
    }

    let cfg = l1.cfg;
    let (n1, n2) = (l1.rank, l2.rank);
    if x.len() != n1 * n2 {
        return Err(Error::ConfigMismatch(format!(
            "query has {} coordinates, tensor ambient rank is {}",
            x.len(),
            n1 * n2
        )));
    }
    for e in x {
        cfg.require_compatible(&e.cfg, "tensor oracle query")?;
        if e.is_lossy() {
            return Err(Error::PrecisionLoss("oracle requires an exact query vector".into()));
        }
    }
    if x.iter().all(|e| e.is_literal_zero()) {
        return Ok(NormValue::Zero);
    }

    let den = cfg.grid_den();
    let nd = i64::from(cfg.precision) * den;
    let floor_sc = cfg.floor_exp() * den;

    // Flatten the query into monomial summands.
    let mut terms: Vec<(usize, usize, i64, u32)> = Vec::new();
    for (d, elem) in x.iter().enumerate() {
        let poly = elem.single()?;
        for (e, c) in &poly.terms {
            let scaled = e * Rational64::from_integer(den);
            terms.push((d / n2, d % n2, *scaled.numer(), *c));
        }
    }
    if terms.len() > budget {
        return Err(Error::BudgetExceeded {
            budget,
            msg: format!("query needs {} monomial summands", terms.len()),
        });
    }

    let eng1 = build_engine(l1, false)?;
    let eng2 = build_engine(l2, false)?;
    let mut memo1: HashMap<(usize, i64), Option<NormValue>> = HashMap::new();
    let mut memo2: HashMap<(usize, i64), Option<NormValue>> = HashMap::new();

    let mut summands = Vec::with_capacity(terms.len());
    for &(a, b, c, coeff) in &terms {
        let lo = std::cmp::max(floor_sc, c - (nd - 1));
        let hi = std::cmp::min(nd - 1, c - floor_sc);
        let mut best: Option<(NormValue, i64)> = None;
        let mut e = lo;
        while e <= hi {
            let g1 = monomial_gauge(&eng1, l1, &mut memo1, a, e)?;
            let g2 = monomial_gauge(&eng2, l2, &mut memo2, b, c - e)?;
            if let (Some(g1), Some(g2)) = (g1, g2) {
                let cost = g1.mul(&g2);
                let take = match &best {
                    None => true,
                    Some((cur, _)) => matches!(cost.compare(cur), Ok(Ordering::Less)),
                };
                if take {
                    best = Some((cost, e));
                }
            }
            e += 1;
        }
        let (cost, e) = best.ok_or(Error::NotInSpan)?;
        summands.push(Summand { a, b, e, f: c - e, coeff, cost });
    }

    let mut total = summands[0].cost.clone();
    for s in &summands[1..] {
        total = total.max(&s.cost)?;
    }

    // Transvection cross-check on exact optima.
    let all_exact = matches!(total, NormValue::Exact(_))
        && summands.iter().all(|s| matches!(s.cost, NormValue::Exact(_)));
    if summands.len() >= 2 && all_exact {
        for i in 0..summands.len() {
            for j in 0..summands.len() {
                if i == j {
                    continue;
                }
                let (si, sj) = (&summands[i], &summands[j]);
                let xi = mono_vec(&cfg, n1, si.a, si.e, si.coeff)?;
                let xj = mono_vec(&cfg, n1, sj.a, sj.e, sj.coeff)?;
                let yi = mono_vec(&cfg, n2, si.b, si.f, 1)?;
                let yj = mono_vec(&cfg, n2, sj.b, sj.f, 1)?;
                let x_sum = add_vecs(&xi, &xj)?;
                let y_diff = sub_vecs(&yj, &yi)?;
                let c1 = vector_gauge(&eng1, l1, &x_sum)?
                    .mul(&require_gauge(&eng2, l2, &mut memo2, si.b, si.f)?);
                let c2 = require_gauge(&eng1, l1, &mut memo1, sj.a, sj.e)?
                    .mul(&vector_gauge(&eng2, l2, &y_diff)?);
                let mut alt = c1.max(&c2).ok();
                for (l, s) in summands.iter().enumerate() {
                    if l == i || l == j {
                        continue;
                    }
                    alt = alt.and_then(|a| a.max(&s.cost).ok());
                }
                let Some(alt) = alt else { continue };
                if matches!(alt.compare(&total), Ok(Ordering::Less)) {
                    return Err(Error::BudgetExceeded {
                        budget,
                        msg: format!(
                            "a transvected decomposition of summands {i} and {j} costs {} \
                             against the monomial optimum {}; the true value lies outside \
                             the oracle's search space",
                            alt.render(),
                            total.render()
                        ),
                    });
                }
            }
        }
    }

    Ok(total)
}

/// Gauge of c·T^{e/den} at one ambient coordinate, memoised per coordinate
/// and exponent.  `None` marks an infeasible candidate: the exponent leaves
/// the representable window or the coordinate leaves the inverted span.
fn monomial_gauge(
    eng: &SpanEngine,
    lat: &Lattice,
    memo: &mut HashMap<(usize, i64), Option<NormValue>>,
    coord: usize,
    e_scaled: i64,
) -> Result<Option<NormValue>> {
    if let Some(v) = memo.get(&(coord, e_scaled)) {
        return Ok(v.clone());
    }
    let den = lat.cfg.grid_den();
    let out = match RingElement::monomial(&lat.cfg, Exp::new(e_scaled, den), 1) {
        Err(_) => None,
        Ok(elem) => {
            let mut v = vec![RingElement::zero(&lat.cfg); lat.rank];
            v[coord] = elem;
            match gauge_with_engine(eng, &v, lat, 1) {
                Ok(nv) => Some(nv),
                Err(Error::NotInSpan) => None,
                Err(e) => return Err(e),
            }
        }
    };
    memo.insert((coord, e_scaled), out.clone());
    Ok(out)
}

/// A memoised gauge that is known to be feasible (its summand was costed).
fn require_gauge(
    eng: &SpanEngine,
    lat: &Lattice,
    memo: &mut HashMap<(usize, i64), Option<NormValue>>,
    coord: usize,
    e_scaled: i64,
) -> Result<NormValue> {
    monomial_gauge(eng, lat, memo, coord, e_scaled)?.ok_or(Error::NotInSpan)
}

fn mono_vec(cfg: &RingConfig, rank: usize, coord: usize, e_scaled: i64, coeff: u32) -> Result<Vec<RingElement>> {
    let mut v = vec![RingElement::zero(cfg); rank];
    v[coord] = RingElement::monomial(cfg, Exp::new(e_scaled, cfg.grid_den()), coeff)?;
    Ok(v)
}

fn add_vecs(a: &[RingElement], b: &[RingElement]) -> Result<Vec<RingElement>> {
    a.iter().zip(b).map(|(x, y)| x.add(y)).collect()
}

fn sub_vecs(a: &[RingElement], b: &[RingElement]) -> Result<Vec<RingElement>> {
    a.iter().zip(b).map(|(x, y)| x.add(&y.neg())).collect()
}

fn vector_gauge(eng: &SpanEngine, lat: &Lattice, v: &[RingElement]) -> Result<NormValue> {
    if v.iter().all(|e| e.is_literal_zero()) {
        return Ok(NormValue::Zero);
    }
    gauge_with_engine(eng, v, lat, 1)
}

/// Unit ball of the tensor seminorm: the almost elements of the torsion-free
/// part at the given depth, certified by recomputing in a doubled precision
/// window and clipping back.  A disagreement means the answer depends on
/// coefficients the window cannot see.
pub fn tensor_unit_ball(l1: &Lattice, l2: &Lattice, depth: u32) -> Result<Lattice> {
    let t = tensor_lattices(l1, l2)?;
    let part = &t.torsion_free_part;
    let primary = almost_elements(part, depth)?;

    let cfg2 = RingConfig { precision: part.cfg.precision * 2, ..part.cfg };
    let wide = reprecision_lattice(part, &cfg2)?;
    let wide_ball = almost_elements(&wide, depth)?;
    let clipped = clip_lattice(&wide_ball.lattice, &primary.lattice.cfg)?;
    if !same_span(&clipped, &primary.lattice)? {
        return Err(Error::PrecisionUndecidable(
            "tensor unit ball changes when the precision window is doubled".into(),
        ));
    }
    Ok(primary.lattice)
}

/// Rebuild a lattice under a wider precision window (same p, k, floor).
fn reprecision_lattice(lat: &Lattice, cfg: &RingConfig) -> Result<Lattice> {
    let generators = lat
        .generators
        .iter()
        .map(|g| {
            g.iter()
                .map(|e| RingElement::from_parts(cfg, e.factors.clone()))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Lattice::new(*cfg, lat.rank, lat.coeff_ring.clone(), generators)
}

/// Clip a lattice computed in a wider window back to a narrower one: terms
/// at or above the narrow precision bound are invisible in the narrow model
/// and drop; support below the narrow floor cannot be clipped soundly.
fn clip_lattice(lat: &Lattice, cfg: &RingConfig) -> Result<Lattice> {
    let hi = Rational64::from_integer(i64::from(cfg.precision));
    let lo = Rational64::from_integer(cfg.floor_exp());
    let mut generators = Vec::with_capacity(lat.generators.len());
    for g in &lat.generators {
        let mut v = Vec::with_capacity(g.len());
        for e in g {
            let poly = e.single()?;
            let mut terms = Vec::new();
            for &(ex, c) in &poly.terms {
                if ex >= hi {
                    continue;
                }
                if ex < lo {
                    return Err(Error::PrecisionUndecidable(
                        "doubled-window unit ball has support below the narrow floor".into(),
                    ));
                }
                terms.push((ex, c));
            }
            v.push(RingElement::from_parts(cfg, vec![FactorPoly { terms, lossy: false }])?);
        }
        if v.iter().any(|e| !e.is_literal_zero()) {
            generators.push(v);
        }
    }
    Lattice::new(*cfg, lat.rank, lat.coeff_ring.clone(), generators)
}

/// Flatness in the torsion sense, for unit-ball coefficient rings: the
/// tensor product has no torsion, and on each factor the sampled kernel of
/// multiplication by T^s on L/T^{s+t}L equals T^t·(L/T^{s+t}L), i.e.
/// T^s·x ∈ T^{s+t}·L exactly when x ∈ T^t·L.
pub fn flatness_torsion_check(l1: &Lattice, l2: &Lattice) -> Result<Verdict> {
    if !(l1.coeff_ring.is_unit_ball() && l2.coeff_ring.is_unit_ball()) {
        return Err(Error::UnsupportedCoefficientRing { op: "flatness_torsion_check" });
    }
    let t = tensor_lattices(l1, l2)?;
    let precision = l1.cfg.precision;
    let tor = torsion_submodule(&t.presentation)?;
    if tor.presentation.gens > 0 {
        let witness =
            tor.inclusion.first().map(|v| v.iter().map(|e| e.render()).collect::<Vec<_>>());
        return Ok(Verdict { outcome: Outcome::No, depth: 0, precision, witness });
    }
    for lat in [l1, l2] {
        if let Some(w) = kernel_identity_counterexample(lat)? {
            return Ok(Verdict { outcome: Outcome::No, depth: 0, precision, witness: Some(w) });
        }
    }
    Ok(Verdict { outcome: Outcome::Yes, depth: 0, precision, witness: None })
}

/// Search sampled span elements for a violation of
/// ker(·T^s on L/T^{s+t}L) = T^t·(L/T^{s+t}L).
fn kernel_identity_counterexample(lat: &Lattice) -> Result<Option<Vec<String>>> {
    let cfg = &lat.cfg;
    let combos = sample_combos(cfg, lat.generators.len())?;
    for &(s, t) in &[(1i64, 1i64), (1, 2), (2, 1)] {
        for combo in &combos {
            let x = combo_vec(&lat.generators, cfg, lat.rank, combo)?;
            if x.iter().all(|e| e.is_literal_zero()) {
                continue;
            }
            // Skip samples whose shift leaves the representable window.
            let xs: Result<Vec<RingElement>> =
                x.iter().map(|e| e.shift(Exp::from_integer(s))).collect();
            let Ok(xs) = xs else { continue };
            let in_kernel = membership(&xs, lat, Exp::from_integer(s + t))?;
            let in_shifted = membership(&x, lat, Exp::from_integer(t))?;
            if in_kernel != in_shifted {
                return Ok(Some(x.iter().map(|e| e.render()).collect()));
            }
        }
    }
    Ok(None)
}
