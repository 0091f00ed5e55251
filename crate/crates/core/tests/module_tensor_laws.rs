//! Module-level laws: torsion idempotence, almost-zero stability under
//! scaling, rank–nullity over the truncated window, the torsion/estimate
//! slack bound, and the tensor-product laws (oracle agreement, unit object,
//! symmetry, unit-ball consistency, and the torsion dichotomy).

mod common;

use common::{coeffs_for, combo, config_strategy, skip_precision, unit_lattice};
use proptest::prelude::*;
use ultralattice_core::almostmod::{
    is_almost_zero, rank_nullity_check, scale_presentation, strictness_bounds, torsion_submodule,
    LatticeMap, ModulePresentation, Outcome,
};
use ultralattice_core::lattice::{almost_elements, same_span, CoeffRing, Lattice};
use ultralattice_core::tensor::{tensor_gauge, tensor_lattices, tensor_norm_oracle, tensor_unit_ball};
use ultralattice_core::{Error, Exp, RingConfig, RingElement};

fn identity_lattice(cfg: &RingConfig, rank: usize) -> Lattice {
    let mut gens = Vec::new();
    for i in 0..rank {
        let mut v = vec![RingElement::zero(cfg); rank];
        v[i] = RingElement::one(cfg);
        gens.push(v);
    }
    Lattice::new(*cfg, rank, CoeffRing::UnitBall, gens).unwrap()
}

/// Random unit-ball presentation: small generator count, monomial relations.
fn presentation_strategy() -> impl Strategy<Value = ModulePresentation> {
    config_strategy().prop_flat_map(|c| {
        (1usize..=3).prop_flat_map(move |gens| {
            let entry = (0..=4i64 * c.grid_den(), 0..2u32).prop_map(move |(e, z)| {
                if z == 0 {
                    RingElement::zero(&c)
                } else {
                    RingElement::monomial(&c, Exp::new(e, c.grid_den()), 1).unwrap()
                }
            });
            proptest::collection::vec(proptest::collection::vec(entry, gens), 0..=3).prop_map(
                move |relations| {
                    ModulePresentation::new(c, CoeffRing::UnitBall, gens, relations).unwrap()
                },
            )
        })
    })
}

/// A map out of a free module: target lattice plus images that are random
/// combinations of its generators (so the span is preserved by construction).
fn free_map_strategy() -> impl Strategy<Value = LatticeMap> {
    proptest::sample::select(vec![
        RingConfig::new(2, 1, 12, 1).unwrap(),
        RingConfig::new(3, 1, 12, 1).unwrap(),
    ])
    .prop_flat_map(|c| unit_lattice(c, 2, 2))
    .prop_flat_map(|target| {
        let imgs = proptest::collection::vec(coeffs_for(&target), 1..=2);
        (Just(target), imgs)
    })
    .prop_map(|(target, coeff_sets)| {
        let images: Vec<Vec<RingElement>> =
            coeff_sets.iter().map(|cs| combo(&target, cs)).collect();
        let source = identity_lattice(&target.cfg, images.len());
        LatticeMap::new(source, target, images).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// The torsion submodule of P modulo its torsion submodule is zero.
    #[test]
    fn torsion_is_idempotent(p in presentation_strategy()) {
        let Ok(tor) = torsion_submodule(&p) else { return Ok(()) };
        if tor.presentation.gens == 0 {
            return Ok(());
        }
        let mut relations = p.relations.clone();
        relations.extend(tor.inclusion.iter().cloned());
        let quotient =
            ModulePresentation::new(p.cfg, CoeffRing::UnitBall, p.gens, relations).unwrap();
        let Ok(tor2) = torsion_submodule(&quotient) else { return Ok(()) };
        prop_assert_eq!(tor2.presentation.gens, 0);
    }

    /// Almost-vanishing is stable under scaling by nonnegative powers, and
    /// "no" verdicts carry witnesses.
    #[test]
    fn almost_zero_is_stable_under_scaling(
        c in config_strategy(),
        j in 1i64..4,
        s_int in 0i64..2,
    ) {
        let depth = c.k + 2;
        let up = c.with_level(depth);
        let r = Exp::new(j, up.grid_den());
        let pres = ModulePresentation::new(
            up,
            CoeffRing::UnitBall,
            1,
            vec![vec![RingElement::monomial(&up, r, 1).unwrap()]],
        )
        .unwrap();
        let v = is_almost_zero(&pres, depth).unwrap();
        match v.outcome {
            Outcome::Yes => {
                prop_assert_eq!(j, 1);
                for s in [Exp::from_integer(s_int), Exp::new(1, up.grid_den())] {
                    let scaled = scale_presentation(&pres, s).unwrap();
                    let vs = is_almost_zero(&scaled, depth).unwrap();
                    prop_assert_eq!(vs.outcome, Outcome::Yes);
                }
            }
            Outcome::No => {
                prop_assert!(j > 1);
                prop_assert!(v.witness.is_some());
            }
            Outcome::UndecidedAtPrecision => {}
        }
    }

    /// dim(source) = dim(kernel) + dim(image) over F_p at window precision.
    #[test]
    fn rank_nullity_holds(f in free_map_strategy()) {
        prop_assert!(rank_nullity_check(&f).unwrap());
    }

    /// Torsion exponent vs sampled norm-estimate exponent: the estimate
    /// holds on every sample and the slack bound m_tor ≤ m_est + 2/p^k.
    #[test]
    fn torsion_estimate_slack_holds(f in free_map_strategy()) {
        match strictness_bounds(&f) {
            Ok(s) => {
                prop_assert!(s.estimate_holds);
                prop_assert!(s.slack_holds);
            }
            Err(Error::PrecisionUndecidable(_)) => {}
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }
}

type TensorInstance = (Lattice, Lattice, Vec<(usize, usize, i64)>);

fn tensor_picks(l1: Lattice, l2: Lattice) -> impl Strategy<Value = TensorInstance> {
    let picks = proptest::collection::vec(
        (0..l1.generators.len(), 0..l2.generators.len(), 0i64..3),
        1..=2,
    );
    (Just(l1), Just(l2), picks)
}

/// Two small unit-ball factors plus indices for a query vector built from
/// shifted Kronecker products of their generators.
fn tensor_instance_strategy() -> impl Strategy<Value = TensorInstance> {
    let c = RingConfig::new(2, 1, 8, 1).unwrap();
    (unit_lattice(c, 2, 2), unit_lattice(c, 2, 2)).prop_flat_map(|(l1, l2)| tensor_picks(l1, l2))
}

/// Factors inside the decomposition oracle's domain: monomial diagonal
/// generators T^{d_i}·e_i, so every coordinate vector is resolvable at some
/// shift; an optional redundant generator T·g_0 leaves the span unchanged.
fn diagonal_lattice(c: RingConfig) -> impl Strategy<Value = Lattice> {
    (1usize..=2).prop_flat_map(move |rank| {
        let den = c.grid_den();
        (proptest::collection::vec(0..=2 * den, rank), proptest::bool::ANY).prop_map(
            move |(ds, extra)| {
                let mut gens = Vec::new();
                for (i, d) in ds.iter().enumerate() {
                    let mut v = vec![RingElement::zero(&c); rank];
                    v[i] = RingElement::monomial(&c, Exp::new(*d, den), 1).unwrap();
                    gens.push(v);
                }
                if extra {
                    let g0 = gens[0]
                        .iter()
                        .map(|e| e.shift(Exp::from_integer(1)).unwrap())
                        .collect();
                    gens.push(g0);
                }
                Lattice::new(c, rank, CoeffRing::UnitBall, gens).unwrap()
            },
        )
    })
}

fn diagonal_tensor_strategy() -> impl Strategy<Value = TensorInstance> {
    let c = RingConfig::new(2, 1, 8, 1).unwrap();
    (diagonal_lattice(c), diagonal_lattice(c)).prop_flat_map(|(l1, l2)| tensor_picks(l1, l2))
}

/// Σ T^s·(g_i ⊗ h_j) over the picked triples, in tensor coordinates.
fn kronecker_query(l1: &Lattice, l2: &Lattice, picks: &[(usize, usize, i64)]) -> Vec<RingElement> {
    let cfg = &l1.cfg;
    let mut out = vec![RingElement::zero(cfg); l1.rank * l2.rank];
    for &(i, j, s) in picks {
        for (a, ga) in l1.generators[i].iter().enumerate() {
            for (b, hb) in l2.generators[j].iter().enumerate() {
                let term = ga.mul(hb).unwrap().shift(Exp::from_integer(s)).unwrap();
                let slot = &mut out[a * l2.rank + b];
                *slot = slot.add(&term).unwrap();
            }
        }
    }
    out
}

fn transpose_query(x: &[RingElement], n1: usize, n2: usize) -> Vec<RingElement> {
    let mut out = Vec::with_capacity(n1 * n2);
    for b in 0..n2 {
        for a in 0..n1 {
            out.push(x[a * n2 + b].clone());
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// On factors inside the oracle's domain the lattice-side tensor gauge
    /// equals the decomposition oracle, and both are symmetric under
    /// swapping the factors.
    #[test]
    fn tensor_gauge_matches_oracle_and_is_symmetric(
        (l1, l2, picks) in diagonal_tensor_strategy(),
    ) {
        let x = kronecker_query(&l1, &l2, &picks);
        let g = tensor_gauge(&x, &l1, &l2).unwrap();
        let o = tensor_norm_oracle(&x, &l1, &l2, 32).unwrap();
        prop_assert_eq!(&g, &o);

        let xt = transpose_query(&x, l1.rank, l2.rank);
        prop_assert_eq!(&tensor_gauge(&xt, &l2, &l1).unwrap(), &g);
        prop_assert_eq!(&tensor_norm_oracle(&xt, &l2, &l1, 32).unwrap(), &o);
    }

    /// On arbitrary factors the oracle may decline a query — no feasible
    /// decomposition into pure tensors of coordinate monomials, or a
    /// transvected decomposition beating the monomial optimum — but whenever
    /// it does return a value, that value is the gauge.
    #[test]
    fn oracle_agrees_with_the_gauge_when_it_applies(
        (l1, l2, picks) in tensor_instance_strategy(),
    ) {
        let x = kronecker_query(&l1, &l2, &picks);
        match tensor_norm_oracle(&x, &l1, &l2, 32) {
            Ok(o) => {
                let Some(g) = skip_precision(tensor_gauge(&x, &l1, &l2))? else {
                    return Ok(());
                };
                prop_assert_eq!(g, o);
            }
            Err(Error::NotInSpan | Error::BudgetExceeded { .. }) => {}
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }

    /// Tensor squares of unit-ball lattices have zero torsion (structural
    /// dichotomy: torsion needs monomial-subring coefficients).
    #[test]
    fn unit_ball_tensors_are_torsion_free((l1, l2, _) in tensor_instance_strategy()) {
        let t = tensor_lattices(&l1, &l2).unwrap();
        let tor = torsion_submodule(&t.presentation).unwrap();
        prop_assert_eq!(tor.presentation.gens, 0);
    }

    /// Tensoring with the rank-1 unit lattice is the identity on spans.
    #[test]
    fn unit_lattice_is_the_tensor_identity((l, _, _) in tensor_instance_strategy()) {
        let unit = identity_lattice(&l.cfg, 1);
        let left = tensor_lattices(&unit, &l).unwrap();
        prop_assert!(same_span(&left.torsion_free_part, &l).unwrap());
        let right = tensor_lattices(&l, &unit).unwrap();
        prop_assert!(same_span(&right.torsion_free_part, &l).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    /// The tensor unit ball is the almost-element module of the torsion-free
    /// part — definitional consistency across modules.
    #[test]
    fn tensor_unit_ball_is_almost_elements((l1, l2, _) in tensor_instance_strategy()) {
        let depth = l1.cfg.k + 1;
        let Some(ball) = skip_precision(tensor_unit_ball(&l1, &l2, depth))? else {
            return Ok(());
        };
        let part = tensor_lattices(&l1, &l2).unwrap().torsion_free_part;
        let Some(alm) = skip_precision(almost_elements(&part, depth))? else {
            return Ok(());
        };
        prop_assert!(same_span(&ball, &alm.lattice).unwrap());
    }
}
