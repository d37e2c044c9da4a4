mod common;

use lpcompress::instances::{
    gen_instance, load_instance, presets, sample_costs, CostMode, CostParams, GenParams, Instance, MaxFlowParams,
    MinCostFlowParams, PackingParams, RandomLpParams, ShortestPathParams,
};
use lpcompress::linalg;
use lpcompress::lp::{self, Feasibility};
use lpcompress::oracle;
use proptest::prelude::*;

fn small_families() -> Vec<GenParams> {
    vec![
        GenParams::Packing(PackingParams {
            blocks: 2,
            items_per_block: 3,
            resources_per_block: 1,
            global_rows: 1,
            c0_norm: None,
            ..Default::default()
        }),
        GenParams::MaxFlow(MaxFlowParams {
            nodes: 5,
            arcs: 7,
            max_capacity: 3,
            c0_norm: None,
            ..Default::default()
        }),
        GenParams::MinCostFlow(MinCostFlowParams {
            nodes: 5,
            arcs: 8,
            max_capacity: 3,
            cost_lo: -10.0,
            cost_hi: 5.0,
            integral_costs: true,
        }),
        GenParams::ShortestPathGrid(ShortestPathParams {
            grid: 3,
            ..Default::default()
        }),
        GenParams::RandomLp(RandomLpParams {
            d: 3,
            m: 5,
            c0_norm: Some(1.0),
            ..Default::default()
        }),
    ]
}

fn cost(mode: CostMode, r_c: usize, alpha: f64, radius: f64) -> CostParams {
    CostParams {
        mode,
        r_c,
        alpha,
        beta: 0.8,
        radius,
        prior_radius: None,
        eta: 1.3,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generation_is_deterministic_and_bounded(seed in 0u64..10_000, family in 0usize..5) {
        let params = &small_families()[family];
        let cp = CostParams { r_c: 2, ..Default::default() };
        let a = gen_instance(params, &cp, seed).unwrap();
        let b = gen_instance(params, &cp, seed).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        prop_assert_eq!(a.c0.len(), a.dim());
        prop_assert_eq!(lp::check_feasible_bounded(&a.polytope).unwrap(), Feasibility::FeasibleBounded);
        prop_assert_eq!(sample_costs(&a, 5, seed), sample_costs(&b, 5, seed));
    }

    #[test]
    fn clipped_samples_stay_in_the_ball(seed in any::<u64>(), alpha in 0.1f64..5.0, radius in 0.0f64..3.0, r_c in 1usize..=4) {
        let params = &small_families()[4];
        let inst = gen_instance(params, &cost(CostMode::KnownPriorClipped, r_c.min(3), alpha, radius), 7).unwrap();
        for c in sample_costs(&inst, 200, seed) {
            prop_assert!(linalg::norm(&linalg::sub(&c, &inst.c0)) <= radius + 1e-12);
        }
    }

    #[test]
    fn factor_samples_lie_in_the_planted_range(seed in any::<u64>(), alpha in 0.1f64..5.0, r_c in 0usize..=3) {
        let params = &small_families()[4];
        let inst = gen_instance(params, &cost(CostMode::UnknownPriorFactor, r_c, alpha, 2.0), 11).unwrap();
        let cm = &inst.cost_model;
        prop_assert_eq!(cm.uc.len(), r_c);
        for (i, a) in cm.uc.iter().enumerate() {
            for (j, b) in cm.uc.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((linalg::dot(a, b) - want).abs() < 1e-12);
            }
        }
        prop_assert!(cm.sigmas.windows(2).all(|w| w[1] < w[0]));
        for c in sample_costs(&inst, 50, seed) {
            let mut r = linalg::sub(&c, &inst.c0);
            for u in &cm.uc {
                let t = linalg::dot(u, &r);
                linalg::axpy(-t, u, &mut r);
            }
            prop_assert!(linalg::norm(&r) <= 1e-9);
        }
    }
}

#[test]
fn degenerate_cost_laws_return_the_nominal_cost() {
    let params = &small_families()[4];
    for cp in [
        cost(CostMode::KnownPriorClipped, 2, 0.0, 1.0),
        cost(CostMode::KnownPriorClipped, 2, 1.0, 0.0),
        cost(CostMode::UnknownPriorFactor, 2, 0.0, 1.0),
    ] {
        let inst = gen_instance(params, &cp, 3).unwrap();
        for c in sample_costs(&inst, 20, 0) {
            assert_eq!(c, inst.c0);
        }
    }
}

#[test]
fn ambient_samples_spread_in_every_coordinate() {
    let inst = gen_instance(&small_families()[4], &cost(CostMode::UnknownPriorAmbient, 0, 1.0, 1.0), 3).unwrap();
    let costs = sample_costs(&inst, 2000, 0);
    for j in 0..inst.dim() {
        let var = costs.iter().map(|c| (c[j] - inst.c0[j]).powi(2)).sum::<f64>() / costs.len() as f64;
        assert!((var.sqrt() - 1.3).abs() < 0.1, "coordinate {j}: std {}", var.sqrt());
    }
}

#[test]
fn network_vertices_are_integral() {
    let tol = lp::Tolerances::default();
    for name in ["shortest-path-4", "mincostflow-desk"] {
        let inst = presets::build(name, 0, 0.5, None).unwrap();
        let mut g = common::rng(5, 60);
        for c in sample_costs(&inst, 50, 0).into_iter().chain((0..50).map(|_| common::gaussian(&mut g, inst.dim()))) {
            if let lp::SolveResult::Optimal(o) = lp::solve_lp(&inst.polytope, &c).unwrap() {
                assert!(common::is_integral(&o.x, 1e-6), "{name}: {:?}", o.x);
                assert!(inst.polytope.is_vertex(&o.x, 1e-7, &tol));
            }
        }
    }
}

#[test]
fn tiny_random_lp_matches_enumeration() {
    let inst = presets::build("randomlp-desk", 0, 0.5, None).unwrap();
    assert_eq!(inst.dim(), 3);
    let vs = oracle::enumerate_vertices(&inst.polytope).unwrap();
    assert!(vs.len() >= 4);
    let mut g = common::rng(1, 61);
    for _ in 0..50 {
        let c = common::gaussian(&mut g, 3);
        let o = lp::solve_lp(&inst.polytope, &c).unwrap().expect_optimal("desk").unwrap();
        let best = vs.vertices.iter().map(|v| linalg::dot(&c, v)).fold(f64::INFINITY, f64::min);
        assert!((o.value - best).abs() < 1e-9 * (1.0 + best.abs()));
        assert!(vs.vertices.iter().any(|v| linalg::norm_inf(&linalg::sub(v, &o.x)) < 1e-7));
    }
}

#[test]
fn packing_preset_clips_at_its_radius() {
    let inst = presets::build("packing-360", 0, 0.5, None).unwrap();
    assert_eq!(inst.dim(), 360);
    let worst = sample_costs(&inst, 10_000, 0)
        .iter()
        .map(|c| linalg::norm(&linalg::sub(c, &inst.c0)))
        .fold(0.0, f64::max);
    assert!(worst <= 1.524 + 1e-12, "{worst}");
    assert!(worst > 1.0);
}

#[test]
fn json_round_trip_is_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["example1", "randomlp-desk", "packing-desk"] {
        let inst = presets::build(name, 4, 0.5, None).unwrap();
        let path = dir.path().join(format!("{name}.json"));
        inst.save(&path).unwrap();
        let back = Instance::load(&path).unwrap();
        assert_eq!(back, inst);
        let via = load_instance(&path, None, 4).unwrap();
        assert_eq!(via.polytope, inst.polytope);
        assert!(inst
            .polytope
            .a()
            .as_slice()
            .iter()
            .zip(back.polytope.a().as_slice())
            .all(|(a, b)| a.to_bits() == b.to_bits()));
    }
}

#[test]
fn mps_fixture_loads_in_inequality_form() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fixture.mps");
    let text = "NAME FIX\nROWS\n N obj\n L c1\nCOLUMNS\n x obj -1 c1 1\n y obj -2 c1 1\nRHS\n rhs c1 1.5\nBOUNDS\n UP b x 1\n UP b y 1\nENDATA\n";
    std::fs::write(&path, text).unwrap();
    let cp = CostParams {
        r_c: 1,
        ..Default::default()
    };
    let inst = load_instance(&path, Some(&cp), 0).unwrap();
    assert_eq!(inst.dim(), 2);
    // One constraint row, then lower and upper bound rows per variable.
    assert_eq!(inst.polytope.rows(), 5);
    assert_eq!(inst.c0, vec![-1.0, -2.0]);
    assert_eq!(inst.meta["cost_params"]["r_c"], serde_json::json!(1));
    let o = lp::solve_lp(&inst.polytope, &inst.c0).unwrap().expect_optimal("fixture").unwrap();
    assert_eq!(o.x, vec![0.5, 1.0]);

    std::fs::write(&path, "NAME FIX\nROWS\n N obj\n L c1\nCOLUMNS\n x obj 1 c1 1\n").unwrap();
    assert!(load_instance(&path, None, 0).is_err());
}
