//! Cross-module invariants: oracle equivalences and property-based checks.

use gridctl::controllability::{
    build_second_order, kalman_rank, pbh_test, ControlSet, ModelParams,
};
use gridctl::diophantine::{classify_quadruple, Quadruple, RationalAngle, SolutionClass};
use gridctl::graphs::{build_laplacian, kronecker_sum, node_coords, node_index, GraphSpec};
use gridctl::sim::controllability_gramian;
use gridctl::spectra::{eigenspaces, numeric_spectrum};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// PBH on closed-form eigenspaces agrees with the Kalman rank decision for
/// every product spec with at most 50 nodes, 200 random control sets each.
#[test]
fn pbh_agrees_with_kalman_everywhere() {
    let mut specs = Vec::new();
    for m in 1..=50usize {
        for n in 1..=50 / m {
            specs.push(GraphSpec::grid(m, n).unwrap());
            if m >= 3 && n >= 2 {
                specs.push(GraphSpec::cylinder(m, n).unwrap());
            }
        }
    }
    let mut rng = StdRng::seed_from_u64(0x0123);
    let mut checked = 0usize;
    for spec in &specs {
        let n = spec.node_count();
        let l = build_laplacian(spec).unwrap().to_f64();
        for _ in 0..200 {
            let size = rng.random_range(1..=n.min(4));
            let mut nodes: Vec<usize> = (0..n).collect();
            for i in 0..size {
                let j = rng.random_range(i..n);
                nodes.swap(i, j);
            }
            nodes.truncate(size);
            let set = ControlSet::new(n, nodes.clone()).unwrap();
            let pbh = pbh_test(spec, &set).unwrap().controllable;
            let kalman = kalman_rank(&l, &set.matrix()).unwrap() == n;
            assert_eq!(pbh, kalman, "{spec} nodes {nodes:?}");
            checked += 1;
        }
    }
    assert!(checked >= 200 * specs.len());
}

#[test]
fn gramian_is_symmetric() {
    let params = ModelParams::new(-0.05, 1.0, -1.0, -0.05, 0.5, 0.2).unwrap();
    for spec in [GraphSpec::grid(3, 3).unwrap(), GraphSpec::cylinder(4, 2).unwrap()] {
        let n = spec.node_count();
        let set = ControlSet::new(n, vec![0, 1]).unwrap();
        let system = build_second_order(&params, &spec, Some(&set), Some(&set)).unwrap();
        let w = controllability_gramian(&system, 4.0, 600).unwrap();
        let asym = (&w - w.transpose()).amax();
        assert!(asym <= 1e-10 * w.amax(), "{spec}: asymmetry {asym:e}");
    }
}

/// Exact spectra match the numeric eigensolver for randomly drawn specs.
#[test]
fn exact_spectrum_matches_numeric_for_random_specs() {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    for _ in 0..25 {
        let spec = match rng.random_range(0..4) {
            0 => GraphSpec::path(rng.random_range(1..=40)).unwrap(),
            1 => GraphSpec::cycle(rng.random_range(3..=40)).unwrap(),
            2 => GraphSpec::grid(rng.random_range(1..=18), rng.random_range(1..=18)).unwrap(),
            _ => GraphSpec::cylinder(rng.random_range(3..=18), rng.random_range(2..=18)).unwrap(),
        };
        if spec.node_count() > 400 {
            continue;
        }
        let mut exact = Vec::new();
        for space in eigenspaces(&spec).unwrap() {
            for _ in 0..space.multiplicity() {
                exact.push(space.eigenvalue.value());
            }
        }
        exact.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let numeric = numeric_spectrum(&build_laplacian(&spec).unwrap().to_f64(), 1e-8).unwrap();
        assert_eq!(exact.len(), numeric.values.len(), "{spec}");
        for (e, v) in exact.iter().zip(&numeric.values) {
            assert!((e - v).abs() <= 1e-8, "{spec}: {e} vs {v}");
        }
    }
}

fn factor_laplacian(cycle: bool, m: usize) -> nalgebra::DMatrix<f64> {
    let spec = if cycle {
        GraphSpec::cycle(m).unwrap()
    } else {
        GraphSpec::path(m).unwrap()
    };
    build_laplacian(&spec).unwrap().to_f64()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kronecker_sum_spectrum_is_pairwise_sums(
        m in 1usize..=12,
        n in 1usize..=12,
        first_cycle in any::<bool>(),
        second_cycle in any::<bool>(),
    ) {
        let first_cycle = first_cycle && m >= 3;
        let second_cycle = second_cycle && n >= 3;
        let p = factor_laplacian(first_cycle, m);
        let q = factor_laplacian(second_cycle, n);
        let sum = kronecker_sum(&p, &q).unwrap();
        let mut direct: Vec<f64> = numeric_spectrum(&sum, 1e-12).unwrap().values;
        let pv = numeric_spectrum(&p, 1e-12).unwrap().values;
        let qv = numeric_spectrum(&q, 1e-12).unwrap().values;
        let mut pairwise: Vec<f64> = pv.iter().flat_map(|a| qv.iter().map(move |b| a + b)).collect();
        direct.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pairwise.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (d, s) in direct.iter().zip(&pairwise) {
            prop_assert!((d - s).abs() <= 1e-9, "{d} vs {s}");
        }
    }

    #[test]
    fn node_index_round_trips(m in 1usize..=20, n in 1usize..=20, pick in any::<u64>()) {
        let spec = GraphSpec::grid(m, n).unwrap();
        let linear = (pick as usize) % spec.node_count();
        let coords = node_coords(&spec, linear).unwrap();
        prop_assert_eq!(node_index(&spec, coords.outer, coords.inner).unwrap().linear, linear);
        prop_assert_eq!(coords.linear, coords.outer * n + coords.inner);
    }

    #[test]
    fn two_thirds_family_members_are_solutions(p in 1i64..96, q in 2i64..=96) {
        // theta strictly inside (0, 1/3)
        prop_assume!(3 * p < q);
        let theta = RationalAngle::new(p, q).unwrap();
        let low = RationalAngle::folded(2 * q - 3 * p, 3 * q).unwrap(); // 2/3 - theta
        let high = RationalAngle::folded(2 * q + 3 * p, 3 * q).unwrap(); // 2/3 + theta
        let quad = Quadruple::new([theta, low, high, RationalAngle::HALF]);
        let class = classify_quadruple(&quad);
        prop_assert!(class.is_solution(), "{:?} -> {:?}", quad.angles(), class);
        prop_assert!(quad.cos_sum().abs() <= 1e-12);
        if let SolutionClass::FamilyTwoThirds { theta: witness } = class {
            prop_assert_eq!(witness, theta);
            // the three non-1/2 cosines cancel among themselves
            let rest = theta.cos_pi() + low.cos_pi() + high.cos_pi();
            prop_assert!(rest.abs() <= 1e-12);
        }
    }
}
