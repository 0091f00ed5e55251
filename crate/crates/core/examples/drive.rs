//! End-to-end drive of the public API with hand-checked values.
use ultralattice_core::almostmod::{
    is_almost_iso, is_almost_zero, isometry_check, present_cokernel, seminorm_comparison_bound,
    strictness_bounds, torsion_exponent, torsion_submodule, LatticeMap, ModulePresentation,
};
use ultralattice_core::lattice::{gauge, same_span, CoeffRing, Lattice};
use ultralattice_core::tensor::{
    flatness_torsion_check, tensor_gauge, tensor_lattices, tensor_norm_oracle, tensor_unit_ball,
};
use ultralattice_core::{parse_element, Exp, RingConfig};

fn main() {
    // 1. The element grammar + norm on the documented example.
    let c16 = RingConfig { p: 2, k: 1, precision: 16, factors: 1, floor: None, guard: None };
    let x = parse_element("T^(3/2)+T^2", &c16).unwrap();
    println!("norm(T^(3/2)+T^2) = {}", x.norm().render());

    // 2. Gauge against a two-generator lattice: e1 = T^(-1/2)*(T^(1/2) e1).
    let c = RingConfig { p: 2, k: 1, precision: 8, factors: 1, floor: None, guard: None };
    let el = |s: &str| parse_element(s, &c).unwrap();
    let lat = Lattice::new(
        c.clone(),
        1,
        CoeffRing::UnitBall,
        vec![vec![el("T^(1/2)")], vec![el("T")]],
    )
    .unwrap();
    println!("gauge(e1, span{{T^(1/2)e1, T e1}}) = {}", gauge(&[el("1")], &lat).unwrap().render());

    // 3. Lattice JSON in the documented wire format, written by hand.
    let raw = r#"{"cfg":{"p":2,"k":1,"N":8,"factors":1},"rank":2,"coeff_ring":"unit_ball",
                  "generators":[["T^(1/2)","0"],["0","1"]]}"#;
    let lat2 = Lattice::from_json(raw).unwrap();
    let g = gauge(&[el("T^2"), el("0")], &lat2).unwrap();
    println!("gauge(T^2 e1, JSON lattice) = {}", g.render());

    // 4. Cokernel of T^(1/2): A -> A, almost-zero at depth 2, verdict JSON.
    let a = Lattice::new(c.clone(), 1, CoeffRing::UnitBall, vec![vec![el("1")]]).unwrap();
    let f = LatticeMap::new(a.clone(), a.clone(), vec![vec![el("T^(1/2)")]]).unwrap();
    let coker = present_cokernel(&f).unwrap();
    println!("coker(T^(1/2)) = {}", coker.to_json());
    println!("is_almost_zero(coker, 2) = {}", serde_json::to_string(&is_almost_zero(&coker, 2).unwrap()).unwrap());
    println!("torsion_exponent(coker) = {:?}", torsion_exponent(&coker).unwrap());

    // 5. T·A -> A is not an almost iso; witness is the unit class.
    let ft = LatticeMap::new(a.clone(), a.clone(), vec![vec![el("T")]]).unwrap();
    println!("is_almost_iso(T, 3) = {}", serde_json::to_string(&is_almost_iso(&ft, 3).unwrap()).unwrap());

    // 6. Isometry verdicts: unit multiplier yes, T no.
    let fu = LatticeMap::new(a.clone(), a.clone(), vec![vec![el("1+T")]]).unwrap();
    println!("isometry(1+T) = {}", serde_json::to_string(&isometry_check(&fu).unwrap()).unwrap());
    println!("isometry(T)   = {}", serde_json::to_string(&isometry_check(&ft).unwrap()).unwrap());

    // 7. Strictness of T: torsion exponent 1, observed gap 1.
    let s = strictness_bounds(&ft).unwrap();
    println!("strictness(T) = {}", serde_json::to_string(&s.report()).unwrap());

    // 8. Comparison constant A vs T^(1/2)A: margin 1/2, constant 2^(-(-1)) = 2.
    let half = Lattice::new(c.clone(), 1, CoeffRing::UnitBall, vec![vec![el("T^(1/2)")]]).unwrap();
    let b = seminorm_comparison_bound(&a, &half).unwrap();
    println!("comparison(A, T^(1/2)A): margin = {:?}, constant = {}", b.margin, b.constant.render());

    // 9. Monomial torsion of the cusp tensor square at p = 5.
    let c5 = RingConfig { p: 5, k: 0, precision: 8, factors: 1, floor: None, guard: None };
    let e5 = |s: &str| parse_element(s, &c5).unwrap();
    let mono = CoeffRing::Monomial { gens: vec![Exp::from_integer(2), Exp::from_integer(3)] };
    let z = e5("0");
    let mut rels = Vec::new();
    for (a, b) in [(e5("T^3"), e5("T^2").neg()), (e5("T^4"), e5("T^3").neg())] {
        rels.push(vec![a.clone(), z.clone(), b.clone(), z.clone()]);
        rels.push(vec![z.clone(), a.clone(), z.clone(), b.clone()]);
        rels.push(vec![a.clone(), b.clone(), z.clone(), z.clone()]);
        rels.push(vec![z.clone(), z.clone(), a.clone(), b.clone()]);
    }
    let pres = ModulePresentation::new(c5.clone(), mono, 4, rels).unwrap();
    let tor = torsion_submodule(&pres).unwrap();
    println!(
        "cusp tensor-square torsion: gens = {}, exponent = {:?}, classes = {:?}",
        tor.presentation.gens,
        tor.exponent,
        tor.inclusion
            .iter()
            .map(|t| t.iter().map(|e| e.render()).collect::<Vec<_>>().join(", "))
            .collect::<Vec<_>>()
    );

    // 10. Tensor square of L = T^(1/2)A: gauge and oracle agree on e⊗e and
    //     on T·(e⊗e); the tensor unit ball at depth 2 is T·A.
    let t = tensor_lattices(&half, &half).unwrap();
    println!("tensor(T^(1/2)A, T^(1/2)A) = {}", serde_json::to_string(&t).unwrap());
    println!(
        "tensor_gauge(e⊗e)  = {} / oracle = {}",
        tensor_gauge(&[el("1")], &half, &half).unwrap().render(),
        tensor_norm_oracle(&[el("1")], &half, &half, 2).unwrap().render()
    );
    println!(
        "tensor_gauge(T e⊗e) = {} / oracle = {}",
        tensor_gauge(&[el("T")], &half, &half).unwrap().render(),
        tensor_norm_oracle(&[el("T")], &half, &half, 2).unwrap().render()
    );
    let ball = tensor_unit_ball(&half, &half, 2).unwrap();
    let c2 = c.with_level(2);
    let e2 = |s: &str| parse_element(s, &c2).unwrap();
    let t_lattice = Lattice::new(c2, 1, CoeffRing::UnitBall, vec![vec![e2("T")]]).unwrap();
    println!("tensor_unit_ball == T·A: {}", same_span(&ball, &t_lattice).unwrap());

    // 11. Flatness of unit-ball spans in the torsion sense.
    let v = flatness_torsion_check(&a, &half).unwrap();
    println!("flatness(A, T^(1/2)A) = {}", serde_json::to_string(&v).unwrap());
}
