//! The gauge seminorm laws: subadditivity, submultiplicative scaling, the
//! almost-element fixed point, closed-unit-ball containments, idempotence,
//! max-norm recovery on free modules, and dominance under enlargement.

mod common;

use std::cmp::Ordering;

use common::{coeffs_for, combo, config_strategy, element, skip_precision, unit_lattice};
use proptest::prelude::*;
use ultralattice_core::lattice::{
    almost_elements, gauge, membership, same_span, CoeffRing, Lattice,
};
use ultralattice_core::{Exp, NormValue, RingConfig, RingElement};

type LatTwoCombos = (Lattice, Vec<RingElement>, Vec<RingElement>);

fn lattice_and_two_span_vectors() -> impl Strategy<Value = LatTwoCombos> {
    config_strategy()
        .prop_flat_map(|c| unit_lattice(c, 3, 3))
        .prop_flat_map(|l| {
            let c1 = coeffs_for(&l);
            let c2 = coeffs_for(&l);
            (Just(l), c1, c2)
        })
        .prop_map(|(l, c1, c2)| {
            let x = combo(&l, &c1);
            let y = combo(&l, &c2);
            (l, x, y)
        })
}

fn base_change_vec(x: &[RingElement], k2: u32) -> Vec<RingElement> {
    x.iter().map(|e| e.base_change_level(k2).unwrap()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// gauge(x+y) ≤ max(gauge x, gauge y) on span vectors.
    #[test]
    fn gauge_is_subadditive((l, x, y) in lattice_and_two_span_vectors()) {
        let sum: Vec<RingElement> =
            x.iter().zip(&y).map(|(a, b)| a.add(b).unwrap()).collect();
        let gx = gauge(&x, &l).unwrap();
        let gy = gauge(&y, &l).unwrap();
        let gs = gauge(&sum, &l).unwrap();
        let bound = gx.max(&gy).unwrap();
        prop_assert_ne!(gs.compare(&bound).unwrap(), Ordering::Greater);
    }

    /// gauge(f·x) ≤ ‖f‖·gauge(x) for ring multipliers f.
    #[test]
    fn gauge_scales_submultiplicatively(
        ((l, x, _), f) in lattice_and_two_span_vectors()
            .prop_flat_map(|t| {
                let c = t.0.cfg;
                (Just(t), element(c, 2, -2, 2))
            }),
    ) {
        let fx: Vec<RingElement> = x.iter().map(|e| e.mul(&f).unwrap()).collect();
        let lhs = gauge(&fx, &l).unwrap();
        let rhs = f.norm().mul(&gauge(&x, &l).unwrap());
        prop_assert_ne!(lhs.compare(&rhs).unwrap(), Ordering::Greater);
    }

    /// Passing to almost elements does not change the gauge.
    #[test]
    fn almost_elements_fix_the_gauge((l, x, _) in lattice_and_two_span_vectors()) {
        let depth = l.cfg.k + 1;
        let Some(alm) = skip_precision(almost_elements(&l, depth))? else {
            return Ok(());
        };
        let x_up = base_change_vec(&x, depth);
        prop_assert_eq!(gauge(&x_up, &alm.lattice).unwrap(), gauge(&x, &l).unwrap());
    }

    /// Every generator of the almost-element module has gauge ≤ 1 against
    /// the original lattice, and every sampled span vector of gauge ≤ 1 is a
    /// member of the almost-element module.
    #[test]
    fn almost_elements_are_the_closed_unit_ball((l, x, _) in lattice_and_two_span_vectors()) {
        let depth = l.cfg.k + 1;
        let Some(alm) = skip_precision(almost_elements(&l, depth))? else {
            return Ok(());
        };
        let l_up = l.base_change_level(depth).unwrap();
        for g in &alm.lattice.generators {
            match gauge(g, &l_up).unwrap() {
                NormValue::Exact(e) => prop_assert!(e >= Exp::from_integer(0)),
                NormValue::Zero | NormValue::BelowPrecision { .. } => {}
            }
        }
        let in_unit_ball = match gauge(&x, &l).unwrap() {
            NormValue::Exact(e) => e >= Exp::from_integer(0),
            NormValue::Zero | NormValue::BelowPrecision { .. } => true,
        };
        if in_unit_ball {
            let x_up = base_change_vec(&x, depth);
            prop_assert!(membership(&x_up, &alm.lattice, Exp::from_integer(0)).unwrap());
        }
    }

    /// almost_elements is idempotent at equal depth.
    #[test]
    fn almost_elements_idempotent((l, _, _) in lattice_and_two_span_vectors()) {
        let depth = l.cfg.k + 1;
        let Some(alm) = skip_precision(almost_elements(&l, depth))? else {
            return Ok(());
        };
        let Some(again) = skip_precision(almost_elements(&alm.lattice, depth))? else {
            return Ok(());
        };
        prop_assert_eq!(again.depth, alm.depth);
        prop_assert!(same_span(&again.lattice, &alm.lattice).unwrap());
    }

    /// On the free max-norm module the gauge recovers the coordinate norm.
    #[test]
    fn free_module_gauge_recovers_the_max_norm(
        (c, rank) in config_strategy().prop_flat_map(|c| (Just(c), 1usize..=3)),
        seed in any::<u64>(),
    ) {
        let mut gens = Vec::new();
        for i in 0..rank {
            let mut v = vec![RingElement::zero(&c); rank];
            v[i] = RingElement::one(&c);
            gens.push(v);
        }
        let free = Lattice::new(c, rank, CoeffRing::UnitBall, gens).unwrap();
        // Derive a deterministic vector from the seed: spread exponents.
        let den = c.grid_den();
        let x: Vec<RingElement> = (0..rank)
            .map(|i| {
                let e = ((seed >> (8 * i)) % 13) as i64 - 4;
                RingElement::monomial(&c, Exp::new(e, den), 1).unwrap()
            })
            .collect();
        let expect = x
            .iter()
            .map(|e| e.norm())
            .reduce(|a, b| a.max(&b).unwrap())
            .unwrap();
        prop_assert_eq!(gauge(&x, &free).unwrap(), expect);
    }

    /// Enlarging the lattice can only shrink the gauge.
    #[test]
    fn extra_generators_only_shrink_the_gauge(
        ((l, x, _), extra) in lattice_and_two_span_vectors()
            .prop_flat_map(|t| {
                let c = t.0.cfg;
                let rank = t.0.rank;
                let hi = (i64::from(c.precision) / 4).clamp(2, 4);
                (Just(t), proptest::collection::vec(element(c, 2, 0, hi), rank))
            }),
    ) {
        let mut gens = l.generators.clone();
        gens.push(extra);
        let bigger = Lattice::new(l.cfg, l.rank, CoeffRing::UnitBall, gens).unwrap();
        let g_small = gauge(&x, &l).unwrap();
        let g_big = gauge(&x, &bigger).unwrap();
        prop_assert_ne!(g_big.compare(&g_small).unwrap(), Ordering::Greater);
    }

    /// The gauge is the largest grid shift at which membership holds.
    #[test]
    fn gauge_is_the_membership_threshold((l, x, _) in lattice_and_two_span_vectors()) {
        if let NormValue::Exact(e) = gauge(&x, &l).unwrap() {
            let atom = Exp::new(1, l.cfg.grid_den());
            prop_assert!(membership(&x, &l, e).unwrap());
            prop_assert!(!membership(&x, &l, e + atom).unwrap());
        }
    }
}

/// The two worked saturation examples: (F_p + T·A_{≤1})·1 — the monoid
/// ⟨1, 3/2⟩ at p = 2, k = 1 — and the level-0 polynomial lattice F_p[T]·1
/// both saturate to the full unit ball at depth 3.
#[test]
fn monomial_lattices_saturate_to_the_unit_ball() {
    let unit_at = |c: &RingConfig, depth: u32| {
        let up = c.with_level(depth);
        Lattice::new(up, 1, CoeffRing::UnitBall, vec![vec![RingElement::one(&up)]]).unwrap()
    };

    let c = RingConfig::new(2, 1, 16, 1).unwrap();
    let fp_plus_ta = Lattice::new(
        c,
        1,
        CoeffRing::Monomial { gens: vec![Exp::from_integer(1), Exp::new(3, 2)] },
        vec![vec![RingElement::one(&c)]],
    )
    .unwrap();
    let alm = almost_elements(&fp_plus_ta, 3).unwrap();
    assert!(same_span(&alm.lattice, &unit_at(&c, 3)).unwrap());

    let c0 = RingConfig::new(2, 0, 16, 1).unwrap();
    let poly = Lattice::new(
        c0,
        1,
        CoeffRing::Monomial { gens: vec![Exp::from_integer(1)] },
        vec![vec![RingElement::one(&c0)]],
    )
    .unwrap();
    let alm0 = almost_elements(&poly, 3).unwrap();
    assert!(same_span(&alm0.lattice, &unit_at(&c0, 3)).unwrap());
}
