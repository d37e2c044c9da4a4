mod common;

use lpcompress::instances::presets;
use lpcompress::learner;
use lpcompress::linalg;
use lpcompress::lp::{self, Polytope, Tolerances};
use lpcompress::oracle::{self, dir_star, enumerate_vertices, reachable_in, PriorSpec};
use proptest::prelude::*;

fn has_point(set: &[Vec<f64>], x: &[f64]) -> bool {
    set.iter().any(|v| linalg::norm_inf(&linalg::sub(v, x)) < 1e-7)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sampled_optima_are_reachable(seed in any::<u64>(), d in 1usize..=4, extra in 0usize..=6, integral in any::<bool>()) {
        let mut g = common::rng(seed, 80);
        let p = common::random_polytope(&mut g, d, extra, integral);
        let prior = common::random_box(&mut g, d, 1.5);
        let vs = enumerate_vertices(&p).unwrap();
        let reach: Vec<Vec<f64>> = reachable_in(&vs, &p, &prior).unwrap().into_iter().map(|i| vs.vertices[i].clone()).collect();
        prop_assert!(!reach.is_empty());
        for c in common::sample_box(&mut g, &prior, 30) {
            let o = lp::solve_lp(&p, &c).unwrap().expect_optimal("sample").unwrap();
            if o.unique {
                prop_assert!(has_point(&reach, &o.x), "{:?} not reachable", o.x);
            }
        }
    }

    #[test]
    fn learned_range_stays_inside_the_reachable_span(seed in any::<u64>(), d in 1usize..=4, extra in 0usize..=6, n in 0usize..25) {
        let mut g = common::rng(seed, 81);
        let p = common::random_polytope(&mut g, d, extra, false);
        let prior = common::random_box(&mut g, d, 1.5);
        let (basis, dstar) = dir_star(&p, &prior).unwrap();
        prop_assert_eq!(basis.len(), dstar);
        let x0 = learner::make_anchor(&p, &common::box_center(&prior)).unwrap();
        let costs = common::sample_box(&mut g, &prior, n);
        let (model, _) = learner::learn(&p, &x0, &costs, &Tolerances::default()).unwrap();
        prop_assert!(model.rank() <= dstar);
        prop_assert!(linalg::containment_sine(model.q(), &basis) <= 1e-6);
    }

    #[test]
    fn vertices_are_distinct_and_supported(seed in any::<u64>(), d in 1usize..=4, extra in 0usize..=8, integral in any::<bool>()) {
        let mut g = common::rng(seed, 82);
        let p = common::random_polytope(&mut g, d, extra, integral);
        let vs = enumerate_vertices(&p).unwrap();
        let tol = Tolerances::default();
        prop_assert_eq!(vs.vertices.len(), vs.active_sets.len());
        for (i, v) in vs.vertices.iter().enumerate() {
            prop_assert!(p.is_vertex(v, 1e-7, &tol));
            prop_assert!(vs.active_sets[i].windows(2).all(|w| w[0] < w[1]));
            prop_assert!(vs.active_sets[i].len() >= d);
            for w in &vs.vertices[i + 1..] {
                prop_assert!(linalg::norm_inf(&linalg::sub(v, w)) > 1e-7);
            }
        }
    }
}

#[test]
fn vertex_counts_of_small_polytopes() {
    assert_eq!(enumerate_vertices(&Polytope::cube(2, -1.0, 1.0)).unwrap().len(), 4);
    assert_eq!(enumerate_vertices(&Polytope::cube(3, 0.0, 1.0)).unwrap().len(), 8);
    let simplex = Polytope::from_rows(
        &[vec![-1.0, 0.0, 0.0], vec![0.0, -1.0, 0.0], vec![0.0, 0.0, -1.0], vec![1.0, 1.0, 1.0]],
        vec![0.0, 0.0, 0.0, 1.0],
    )
    .unwrap();
    assert_eq!(enumerate_vertices(&simplex).unwrap().len(), 4);
    let redundant = Polytope::from_rows(
        &[vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0], vec![1.0, 1.0]],
        vec![1.0, 1.0, 1.0, 1.0, 2.0],
    )
    .unwrap();
    let vs = enumerate_vertices(&redundant).unwrap();
    assert_eq!(vs.len(), 4);
    let corner = vs.vertices.iter().position(|v| v == &vec![1.0, 1.0]).unwrap();
    assert_eq!(vs.active_sets[corner], vec![0, 2, 4]);
}

#[test]
fn example_one_has_one_decision_direction() {
    let inst = presets::example1(0.5).unwrap();
    let prior = inst.prior_spec().unwrap();
    let reach = oracle::reachable_vertices(&inst.polytope, &prior).unwrap();
    assert_eq!(reach.len(), 2);
    assert!(has_point(&reach, &[1.0, 1.0]) && has_point(&reach, &[1.0, -1.0]));
    let (basis, dstar) = dir_star(&inst.polytope, &prior).unwrap();
    assert_eq!(dstar, 1);
    assert!(basis[0][0].abs() < 1e-12 && (basis[0][1].abs() - 1.0).abs() < 1e-12);
}

#[test]
fn tiny_ball_reaches_a_single_vertex() {
    let square = Polytope::cube(2, -1.0, 1.0);
    let prior = PriorSpec::Ball {
        center: vec![0.3, -0.8],
        radius: 1e-3,
    };
    let reach = oracle::reachable_vertices(&square, &prior).unwrap();
    assert_eq!(reach, vec![vec![-1.0, 1.0]]);
    assert_eq!(dir_star(&square, &prior).unwrap().1, 0);
}

#[test]
fn sign_spanning_box_reaches_every_corner() {
    let square = Polytope::cube(2, -1.0, 1.0);
    let prior = PriorSpec::Box {
        lo: vec![-1.0, -1.0],
        hi: vec![1.0, 1.0],
    };
    assert_eq!(oracle::reachable_vertices(&square, &prior).unwrap().len(), 4);
    assert_eq!(dir_star(&square, &prior).unwrap().1, 2);
}

#[test]
fn scale_guard_rejects_large_polytopes() {
    assert!(enumerate_vertices(&Polytope::cube(oracle::MAX_DIM + 1, 0.0, 1.0)).is_err());
    let rows: Vec<Vec<f64>> = (0..oracle::MAX_ROWS + 1).map(|i| vec![1.0, i as f64]).collect();
    let tall = Polytope::from_rows(&rows, vec![1.0; oracle::MAX_ROWS + 1]).unwrap();
    assert!(enumerate_vertices(&tall).is_err());
}

#[test]
fn invalid_priors_are_rejected() {
    let square = Polytope::cube(2, -1.0, 1.0);
    let bad = [
        PriorSpec::Ball {
            center: vec![0.0, 0.0],
            radius: 0.0,
        },
        PriorSpec::Box {
            lo: vec![0.0, 1.0],
            hi: vec![1.0, 0.0],
        },
        PriorSpec::Box {
            lo: vec![0.0],
            hi: vec![1.0],
        },
    ];
    for prior in bad {
        assert!(oracle::reachable_vertices(&square, &prior).is_err(), "{prior:?}");
    }
}
