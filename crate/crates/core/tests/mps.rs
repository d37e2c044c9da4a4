mod common;

use std::fmt::Write;

use lpcompress::instances::mps::parse_mps;
use lpcompress::lp::{GeneralLp, Relation, Sense};
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug)]
enum Kind {
    L,
    G,
    E,
}

#[derive(Clone, Copy, Debug)]
enum Bound {
    Default,
    Up(i32),
    Lo(i32),
    LoUp(i32, i32),
    Fx(i32),
    Fr,
    Mi,
    Bv,
}

/// A random LP described row by row, before any MPS encoding.
#[derive(Debug)]
struct Model {
    maximize: bool,
    obj: Vec<i32>,
    rows: Vec<(Kind, Vec<i32>, i32, Option<i32>)>,
    bounds: Vec<Bound>,
}

fn random_model(g: &mut ChaCha8Rng) -> Model {
    let n = g.random_range(1..=4);
    let rows = (0..g.random_range(1..=5))
        .map(|_| {
            let kind = [Kind::L, Kind::G, Kind::E][g.random_range(0..3)];
            let a: Vec<i32> = (0..n).map(|_| g.random_range(-3..=3)).collect();
            let range = g.random_bool(0.6).then(|| g.random_range(-4..=4));
            (kind, a, g.random_range(-5..=5), range)
        })
        .collect();
    let bounds = (0..n)
        .map(|_| match g.random_range(0..8) {
            0 => Bound::Default,
            1 => Bound::Up(g.random_range(-4..=4)),
            2 => Bound::Lo(g.random_range(-4..=4)),
            3 => {
                let lo = g.random_range(-4..=2);
                Bound::LoUp(lo, lo + g.random_range(0..=4))
            }
            4 => Bound::Fx(g.random_range(-3..=3)),
            5 => Bound::Fr,
            6 => Bound::Mi,
            _ => Bound::Bv,
        })
        .collect();
    Model {
        maximize: g.random_bool(0.5),
        obj: (0..n).map(|_| g.random_range(-3..=3)).collect(),
        rows,
        bounds,
    }
}

fn to_mps(m: &Model) -> String {
    let mut s = String::from("NAME          T\n");
    if m.maximize {
        s.push_str("OBJSENSE\n    MAX\n");
    }
    s.push_str("ROWS\n N  obj\n");
    for (i, (k, ..)) in m.rows.iter().enumerate() {
        writeln!(s, " {:?}  r{i}", k).unwrap();
    }
    s.push_str("COLUMNS\n");
    for j in 0..m.obj.len() {
        writeln!(s, "    x{j}  obj  {}", m.obj[j]).unwrap();
        for (i, (_, a, ..)) in m.rows.iter().enumerate() {
            if a[j] != 0 {
                writeln!(s, "    x{j}  r{i}  {}", a[j]).unwrap();
            }
        }
    }
    s.push_str("RHS\n");
    for (i, (.., b, _)) in m.rows.iter().enumerate() {
        writeln!(s, "    rhs  r{i}  {b}").unwrap();
    }
    s.push_str("RANGES\n");
    for (i, (.., r)) in m.rows.iter().enumerate() {
        if let Some(r) = r {
            writeln!(s, "    rng  r{i}  {r}").unwrap();
        }
    }
    s.push_str("BOUNDS\n");
    for (j, b) in m.bounds.iter().enumerate() {
        match *b {
            Bound::Default => {}
            Bound::Up(v) => writeln!(s, " UP bnd  x{j}  {v}").unwrap(),
            Bound::Lo(v) => writeln!(s, " LO bnd  x{j}  {v}").unwrap(),
            Bound::LoUp(l, u) => writeln!(s, " LO bnd  x{j}  {l}\n UP bnd  x{j}  {u}").unwrap(),
            Bound::Fx(v) => writeln!(s, " FX bnd  x{j}  {v}").unwrap(),
            Bound::Fr => writeln!(s, " FR bnd  x{j}").unwrap(),
            Bound::Mi => writeln!(s, " MI bnd  x{j}").unwrap(),
            Bound::Bv => writeln!(s, " BV bnd  x{j}").unwrap(),
        }
    }
    s.push_str("ENDATA\n");
    s
}

/// Row interval under the usual RANGES table.
fn row_interval(kind: Kind, b: i32, r: Option<i32>) -> (f64, f64) {
    let (b, inf) = (f64::from(b), f64::INFINITY);
    match (kind, r) {
        (Kind::L, None) => (-inf, b),
        (Kind::G, None) => (b, inf),
        (Kind::E, None) => (b, b),
        (Kind::L, Some(r)) => (b - f64::from(r.abs()), b),
        (Kind::G, Some(r)) => (b, b + f64::from(r.abs())),
        (Kind::E, Some(r)) if r >= 0 => (b, b + f64::from(r)),
        (Kind::E, Some(r)) => (b + f64::from(r), b),
    }
}

fn bound_interval(b: Bound) -> (f64, f64) {
    let inf = f64::INFINITY;
    match b {
        Bound::Default => (0.0, inf),
        Bound::Up(v) if v < 0 => (-inf, f64::from(v)),
        Bound::Up(v) => (0.0, f64::from(v)),
        Bound::Lo(v) => (f64::from(v), inf),
        Bound::LoUp(l, u) => (f64::from(l), f64::from(u)),
        Bound::Fx(v) => (f64::from(v), f64::from(v)),
        Bound::Fr => (-inf, inf),
        Bound::Mi => (-inf, inf),
        Bound::Bv => (0.0, 1.0),
    }
}

fn model_feasible(m: &Model, x: &[f64]) -> bool {
    let rows_ok = m.rows.iter().all(|(k, a, b, r)| {
        let lhs: f64 = a.iter().zip(x).map(|(a, x)| f64::from(*a) * x).sum();
        let (lo, hi) = row_interval(*k, *b, *r);
        lo <= lhs && lhs <= hi
    });
    let bounds_ok = m.bounds.iter().zip(x).all(|(b, x)| {
        let (lo, hi) = bound_interval(*b);
        lo <= *x && *x <= hi
    });
    rows_ok && bounds_ok
}

fn parsed_feasible(lp: &GeneralLp, x: &[f64]) -> bool {
    let rows_ok = lp.constraints.iter().all(|c| {
        let lhs: f64 = c.coeffs.iter().zip(x).map(|(a, x)| a * x).sum();
        match c.relation {
            Relation::Le => lhs <= c.rhs,
            Relation::Ge => lhs >= c.rhs,
            Relation::Eq => lhs == c.rhs,
        }
    });
    rows_ok && (0..x.len()).all(|j| lp.lower[j] <= x[j] && x[j] <= lp.upper[j])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn parsed_lp_has_the_encoded_feasible_set(seed in any::<u64>()) {
        let mut g = common::rng(seed, 50);
        let m = random_model(&mut g);
        let text = to_mps(&m);
        let lp = parse_mps(&text).unwrap();
        let n = m.obj.len();
        prop_assert_eq!(lp.num_vars(), n);
        prop_assert_eq!(lp.sense, if m.maximize { Sense::Maximize } else { Sense::Minimize });
        let obj: Vec<f64> = m.obj.iter().map(|v| f64::from(*v)).collect();
        prop_assert_eq!(&lp.objective, &obj);
        for (j, b) in m.bounds.iter().enumerate() {
            prop_assert_eq!((lp.lower[j], lp.upper[j]), bound_interval(*b), "column {} {:?}", j, b);
        }
        // Integer points straddling every row boundary.
        for _ in 0..200 {
            let x: Vec<f64> = (0..n).map(|_| f64::from(g.random_range(-6i32..=6))).collect();
            prop_assert_eq!(model_feasible(&m, &x), parsed_feasible(&lp, &x), "x = {:?}\n{}", x, text);
        }
    }
}

#[test]
fn fixed_format_matches_free_format() {
    let fixed = "\
NAME          TINY
ROWS
 N  COST
 L  LIM1
 E  MYEQN
COLUMNS
    X1        COST         1.0   LIM1         1.0
    X2        COST         2.0   MYEQN       -1.0
RHS
    RHS       LIM1         4.0   MYEQN        7.0
RANGES
    RNG       MYEQN       -2.0
BOUNDS
 UP BND       X1           4.0
 MI BND       X2
ENDATA
";
    let lp = parse_mps(fixed).unwrap();
    assert_eq!(lp.var_names, vec!["X1", "X2"]);
    assert_eq!(lp.objective, vec![1.0, 2.0]);
    assert_eq!((lp.lower[0], lp.upper[0]), (0.0, 4.0));
    assert_eq!((lp.lower[1], lp.upper[1]), (f64::NEG_INFINITY, f64::INFINITY));
    for (x2, ok) in [(-7.0, true), (-5.0, true), (-4.0, false), (-8.0, false)] {
        assert_eq!(parsed_feasible(&lp, &[1.0, x2]), ok, "x2 = {x2}");
    }
}

#[test]
fn malformed_input_is_rejected() {
    assert!(parse_mps("NAME X\nROWS\n N obj\nCOLUMNS\n    x  nosuchrow  1\nENDATA\n").is_err());
    assert!(parse_mps("NAME X\nROWS\n N obj\n Q  r\nENDATA\n").is_err());
    assert!(parse_mps("NAME X\nROWS\n N obj\nCOLUMNS\n    x  obj  abc\nENDATA\n").is_err());
}
