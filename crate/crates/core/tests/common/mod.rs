#![allow(dead_code)]

use lpcompress::compression::CompressionModel;
use lpcompress::linalg;
use lpcompress::lp::{self, Polytope, Tolerances};
use lpcompress::oracle::PriorSpec;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    lpcompress::rng::keyed(seed, 9_000 + stream, 0)
}

pub fn gaussian(g: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| StandardNormal.sample(g)).collect()
}

/// `[-1,1]^d` cut by `extra` random rows through a strictly interior
/// region. With `integral`, rows have entries in {-1,0,1} and unit right-hand
/// sides, which makes degenerate faces common.
pub fn random_polytope(g: &mut ChaCha8Rng, d: usize, extra: usize, integral: bool) -> Polytope {
    let mut rows = Vec::new();
    let mut b = Vec::new();
    for i in 0..d {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        rows.push(e.clone());
        b.push(1.0);
        e[i] = -1.0;
        rows.push(e);
        b.push(1.0);
    }
    let z: Vec<f64> = (0..d).map(|_| g.random_range(-0.3..0.3)).collect();
    while rows.len() < 2 * d + extra {
        if integral {
            let a: Vec<f64> = (0..d).map(|_| g.random_range(-1i32..=1) as f64).collect();
            if a.iter().filter(|x| **x != 0.0).count() < d.min(2) {
                continue;
            }
            rows.push(a);
            b.push(1.0);
        } else {
            let a = gaussian(g, d);
            let n = linalg::norm(&a);
            let a: Vec<f64> = a.iter().map(|x| x / n).collect();
            let rhs = linalg::dot(&a, &z) + g.random_range(0.05..0.5);
            rows.push(a);
            b.push(rhs);
        }
    }
    Polytope::from_rows(&rows, b).expect("well-formed rows")
}

/// A random axis-aligned box of cost vectors.
pub fn random_box(g: &mut ChaCha8Rng, d: usize, max_width: f64) -> PriorSpec {
    let center = gaussian(g, d);
    let width: Vec<f64> = (0..d).map(|_| g.random_range(0.01..max_width)).collect();
    PriorSpec::Box {
        lo: center.iter().zip(&width).map(|(c, w)| c - w / 2.0).collect(),
        hi: center.iter().zip(&width).map(|(c, w)| c + w / 2.0).collect(),
    }
}

pub fn box_center(prior: &PriorSpec) -> Vec<f64> {
    match prior {
        PriorSpec::Box { lo, hi } => lo.iter().zip(hi).map(|(l, h)| 0.5 * (l + h)).collect(),
        PriorSpec::Ball { center, .. } => center.clone(),
    }
}

pub fn sample_box(g: &mut ChaCha8Rng, prior: &PriorSpec, n: usize) -> Vec<Vec<f64>> {
    let PriorSpec::Box { lo, hi } = prior else {
        panic!("box prior expected")
    };
    (0..n)
        .map(|_| lo.iter().zip(hi).map(|(l, h)| g.random_range(*l..*h)).collect())
        .collect()
}

/// Vertex optimal for a random Gaussian cost.
pub fn random_vertex(g: &mut ChaCha8Rng, p: &Polytope) -> Vec<f64> {
    let c = gaussian(g, p.dim());
    lp::solve_lp(p, &c).unwrap().expect_optimal("random vertex").unwrap().x
}

/// Appends directions one at a time, skipping those already in range.
pub fn model_from(x0: Vec<f64>, dirs: &[Vec<f64>]) -> CompressionModel {
    let mut m = CompressionModel::new(x0, Tolerances::default());
    for w in dirs {
        let x = linalg::add(m.x0(), w);
        if let Ok(next) = m.append_direction(&x) {
            m = next;
        }
    }
    m
}

pub fn is_integral(x: &[f64], tol: f64) -> bool {
    x.iter().all(|v| (v - v.round()).abs() <= tol)
}
