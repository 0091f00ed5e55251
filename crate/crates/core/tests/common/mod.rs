//! Shared random generators for the law suites.
//!
//! All strategies stay well inside the precision window (supports in
//! [0, min(4, N/4)), coefficients with small nonnegative exponents) so that
//! the laws under test are exercised on exact arithmetic, never on
//! truncation noise.

#![allow(dead_code)] // each law suite uses its own subset of these helpers

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use ultralattice_core::lattice::{CoeffRing, Lattice};
use ultralattice_core::{Error, Exp, RingConfig, RingElement};

pub fn cfg(p: u32, k: u32, n: u32) -> RingConfig {
    RingConfig::new(p, k, n, 1).unwrap()
}

/// Desk-scale configurations covering p ∈ {2, 3, 5}, levels 0–2.
pub fn small_configs() -> Vec<RingConfig> {
    vec![cfg(2, 1, 16), cfg(3, 1, 12), cfg(2, 2, 16), cfg(5, 0, 12)]
}

pub fn config_strategy() -> impl Strategy<Value = RingConfig> {
    proptest::sample::select(small_configs())
}

/// Exact element with at most `max_terms` monomials, exponents drawn from
/// the grid inside [lo, hi) integer units.
pub fn element(
    cfg: RingConfig,
    max_terms: usize,
    lo: i64,
    hi: i64,
) -> impl Strategy<Value = RingElement> {
    let den = cfg.grid_den();
    proptest::collection::vec((lo * den..hi * den, 1..cfg.p), 0..=max_terms).prop_map(
        move |terms| {
            let mut out = RingElement::zero(&cfg);
            for (e, c) in terms {
                let m = RingElement::monomial(&cfg, Exp::new(e, den), c).unwrap();
                out = out.add(&m).unwrap();
            }
            out
        },
    )
}

pub fn nonzero_element(
    cfg: RingConfig,
    max_terms: usize,
    lo: i64,
    hi: i64,
) -> impl Strategy<Value = RingElement> {
    element(cfg, max_terms, lo, hi).prop_filter("nonzero", |e| !e.is_literal_zero())
}

/// Unit-ball lattice with bounded rank, generator count, and support, all
/// exponents nonnegative. All-zero generator vectors are dropped; if none
/// remain, the first coordinate vector stands in so the lattice is nonzero.
pub fn unit_lattice(
    cfg: RingConfig,
    max_rank: usize,
    max_gens: usize,
) -> impl Strategy<Value = Lattice> {
    let hi = (i64::from(cfg.precision) / 4).clamp(2, 4);
    (1..=max_rank, 1..=max_gens).prop_flat_map(move |(rank, gens)| {
        proptest::collection::vec(
            proptest::collection::vec(element(cfg, 2, 0, hi), rank),
            gens,
        )
        .prop_map(move |mut gv| {
            gv.retain(|g| g.iter().any(|e| !e.is_literal_zero()));
            if gv.is_empty() {
                let mut unit = vec![RingElement::zero(&cfg); rank];
                unit[0] = RingElement::one(&cfg);
                gv.push(unit);
            }
            Lattice::new(cfg, rank, CoeffRing::UnitBall, gv).unwrap()
        })
    })
}

/// Σ cᵢ·gᵢ over all generators of a lattice, exact by construction for the
/// bounded strategies above.
pub fn combo(lat: &Lattice, coeffs: &[RingElement]) -> Vec<RingElement> {
    let mut out = vec![RingElement::zero(&lat.cfg); lat.rank];
    for (c, g) in coeffs.iter().zip(&lat.generators) {
        for (o, e) in out.iter_mut().zip(g) {
            *o = o.add(&e.mul(c).unwrap()).unwrap();
        }
    }
    out
}

/// Coefficient vectors (one per generator) with small nonnegative supports.
pub fn coeffs_for(lat: &Lattice) -> BoxedStrategy<Vec<RingElement>> {
    let cfg = lat.cfg;
    proptest::collection::vec(element(cfg, 1, 0, 3), lat.generators.len()).boxed()
}

/// Canonicalization can honestly report that the precision window is too
/// small for an instance (a reduced generator or certificate would need a
/// term at or beyond T^N). Laws are quantified over representable instances,
/// so such cases are skipped; any other error still fails the test.
pub fn skip_precision<T>(r: ultralattice_core::Result<T>) -> Result<Option<T>, TestCaseError> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::PrecisionLoss(_)) | Err(Error::PrecisionUndecidable(_)) => Ok(None),
        Err(e) => Err(TestCaseError::fail(e.to_string())),
    }
}
