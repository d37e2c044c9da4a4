mod common;

use lpcompress::learner::{self, certificate_bound, replay_on_hard_subsequence};
use lpcompress::linalg;
use lpcompress::lp::Tolerances;
use proptest::prelude::*;

fn case() -> impl Strategy<Value = (u64, usize, usize, bool, usize)> {
    (any::<u64>(), 1usize..=5, 0usize..=8, any::<bool>(), 0usize..=30)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn learner_output_is_consistent((seed, d, extra, integral, n) in case()) {
        let mut g = common::rng(seed, 30);
        let p = common::random_polytope(&mut g, d, extra, integral);
        let prior = common::random_box(&mut g, d, 1.0);
        let x0 = learner::make_anchor(&p, &common::box_center(&prior)).unwrap();
        let costs = common::sample_box(&mut g, &prior, n);
        let tol = Tolerances::default();
        let (model, trace) = learner::learn(&p, &x0, &costs, &tol).unwrap();

        // Size.
        prop_assert!(model.rank() <= d);
        prop_assert_eq!(trace.final_rank, model.rank());
        prop_assert_eq!(trace.appended.len(), model.rank());
        prop_assert_eq!(trace.append_counts.iter().sum::<usize>(), model.rank());
        prop_assert!(trace.hard_set.len() <= model.rank().min(n));
        prop_assert_eq!(&trace.processed, &(0..n).collect::<Vec<_>>());
        prop_assert!(trace.rank_curve.windows(2).all(|w| w[0] <= w[1]));
        let hard: Vec<usize> = trace.append_counts.iter().enumerate().filter(|(_, c)| **c > 0).map(|(i, _)| i).collect();
        prop_assert_eq!(&hard, &trace.hard_set);
        prop_assert_eq!(&model.provenance.hard_indices, &trace.hard_set);

        // Every appended direction points at a vertex.
        for col in model.columns() {
            let v = linalg::add(model.x0(), col);
            prop_assert!(p.is_vertex(&v, 1e-6, &tol));
        }

        // Realizability on the training sample.
        for c in &costs {
            prop_assert!(model.check_exact(&p, c).unwrap());
        }

        // Stability: the hard subsequence alone reproduces the model.
        let again = replay_on_hard_subsequence(&p, &x0, &trace, &costs, &tol).unwrap();
        prop_assert_eq!(again.rank(), model.rank());
        for (a, b) in again.columns().iter().zip(model.columns()) {
            prop_assert!(a.iter().zip(b).all(|(u, v)| u.to_bits() == v.to_bits()));
        }

        // Rerun is bitwise identical.
        let (model2, trace2) = learner::learn(&p, &x0, &costs, &tol).unwrap();
        prop_assert_eq!(&trace2, &trace);
        prop_assert_eq!(model2.columns(), model.columns());
    }

    #[test]
    fn prefix_learning_is_a_prefix((seed, d, extra, integral, n) in case()) {
        let mut g = common::rng(seed, 31);
        let p = common::random_polytope(&mut g, d, extra, integral);
        let prior = common::random_box(&mut g, d, 1.5);
        let x0 = learner::make_anchor(&p, &common::box_center(&prior)).unwrap();
        let costs = common::sample_box(&mut g, &prior, n);
        let tol = Tolerances::default();
        let (_, full) = learner::learn(&p, &x0, &costs, &tol).unwrap();
        let half = n / 2;
        let (_, part) = learner::learn(&p, &x0, &costs[..half], &tol).unwrap();
        prop_assert_eq!(&full.rank_curve[..half], &part.rank_curve[..]);
        prop_assert_eq!(&full.appended[..part.appended.len()], &part.appended[..]);
    }

    #[test]
    fn certificate_matches_closed_form(n in 1usize..5000, frac in 0.0f64..1.0, delta in 0.001f64..0.999) {
        let t = ((n as f64) * frac) as usize;
        let cert = certificate_bound(n, t, delta).unwrap();
        let expected = (1.0 - 4.0 / n as f64 * (6.0 * t as f64 + (std::f64::consts::E / delta).ln())).max(0.0);
        prop_assert!((cert.lower_bound - expected).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&cert.lower_bound));
        if t < n {
            prop_assert!(certificate_bound(n, t + 1, delta).unwrap().lower_bound <= cert.lower_bound);
        }
        prop_assert!(certificate_bound(n + 1, t, delta).unwrap().lower_bound >= cert.lower_bound);
    }
}

#[test]
fn certificate_rejects_bad_arguments() {
    assert!(certificate_bound(0, 0, 0.05).is_err());
    assert!(certificate_bound(3, 4, 0.05).is_err());
    assert!(certificate_bound(3, 1, 0.0).is_err());
    assert!(certificate_bound(3, 1, 1.0).is_err());
}

#[test]
fn certificate_reference_values() {
    // 1 - (4/1000)(6 + 1 - ln 0.05)
    let c = certificate_bound(1000, 1, 0.05).unwrap();
    assert!((c.lower_bound - 0.960_017_070_905_784).abs() < 1e-12, "{}", c.lower_bound);
    assert_eq!(certificate_bound(10, 5, 0.05).unwrap().lower_bound, 0.0);
}

#[test]
fn infeasible_anchor_is_rejected() {
    let p = lpcompress::lp::Polytope::cube(2, 0.0, 1.0);
    let r = learner::learn(&p, &[2.0, 0.0], Vec::<Vec<f64>>::new(), &Tolerances::default());
    assert!(r.is_err());
}
