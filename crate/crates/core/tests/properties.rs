//! End-to-end properties through the public API.

use riesz_capacity::analysis::{estimate_capacity, solve_level};
use riesz_capacity::closedform::{closed_form_capacity, interval_capacity};
use riesz_capacity::solver::SolverConfig;
use riesz_capacity::{Scheme, SetSpec};

fn cfg() -> SolverConfig {
    SolverConfig {
        max_iters: 100_000,
        ..Default::default()
    }
}

fn cap(spec: &SetSpec, p: f64, n: usize) -> f64 {
    solve_level(spec, p, n, Scheme::Native, &cfg())
        .unwrap()
        .result
        .capacity()
        .unwrap()
}

#[test]
fn capacity_is_homogeneous_of_degree_one() {
    for (spec, p) in [
        (SetSpec::interval(-1.0, 1.0), -0.5),
        (SetSpec::interval(-1.0, 1.0), 0.0),
        (SetSpec::unit_ball(2), 1.0),
        (SetSpec::unit_sphere(3), 0.5),
    ] {
        let base = cap(&spec, p, 200);
        for s in [0.25, 3.0] {
            let scaled = cap(&spec.scaled(s), p, 200);
            assert!(
                (scaled / (s * base) - 1.0).abs() < 1e-9,
                "{spec:?} p={p} s={s}"
            );
        }
    }
}

#[test]
fn capacity_is_translation_invariant() {
    for p in [-1.5, 0.0, 0.5] {
        let a = cap(&SetSpec::interval(-1.0, 1.0), p, 128);
        let b = cap(&SetSpec::interval(3.0, 5.0), p, 128);
        assert!((a - b).abs() < 1e-9 * a, "p={p}");
    }
}

#[test]
fn subsets_have_smaller_capacity() {
    let whole = SetSpec::interval(-1.0, 1.0);
    let part = SetSpec::interval(-1.0, 0.2);
    for p in [-1.0, 0.0, 0.5] {
        assert!(cap(&part, p, 128) < cap(&whole, p, 128), "p={p}");
    }
}

#[test]
fn union_of_intervals_lies_between_part_and_hull() {
    let union = SetSpec::Union {
        parts: vec![SetSpec::interval(-1.0, -0.2), SetSpec::interval(0.2, 1.0)],
    };
    for p in [0.0, 0.5] {
        let u = estimate_capacity(&union, p, &[128, 256], Scheme::Native, &cfg())
            .unwrap()
            .capacity;
        let part = interval_capacity(p).unwrap() * 0.4;
        let hull = interval_capacity(p).unwrap();
        assert!(part < u && u < hull, "p={p}: {part} < {u} < {hull}");
    }
}

#[test]
fn capacity_vanishes_at_and_above_dimension() {
    let c = estimate_capacity(&SetSpec::unit_ball(2), 2.0, &[64], Scheme::Native, &cfg()).unwrap();
    assert_eq!(c.capacity, 0.0);
    let c =
        estimate_capacity(&SetSpec::unit_sphere(3), 2.5, &[64], Scheme::Native, &cfg()).unwrap();
    assert_eq!(c.capacity, 0.0);
    assert_eq!(closed_form_capacity(&SetSpec::unit_ball(3), 3.0), Some(0.0));
}

#[test]
fn set_json_round_trip() {
    let specs = [
        SetSpec::unit_ball(3),
        SetSpec::unit_sphere(2),
        SetSpec::interval(-2.0, 0.5),
        SetSpec::Box {
            lo: vec![0.0, 0.0],
            hi: vec![1.0, 2.0],
        },
        SetSpec::Points {
            coords: vec![vec![0.0, 1.0], vec![2.0, 3.0]],
        },
    ];
    for spec in specs {
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(SetSpec::from_json(&text).unwrap(), spec);
    }
    assert!(SetSpec::from_json(r#"{"type": "interval", "a": 1, "b": 0}"#).is_err());
    assert!(SetSpec::from_json(r#"{"type": "ball", "dim": 2, "radius": 1, "colour": 3}"#).is_err());
}

#[test]
fn runs_are_deterministic() {
    let spec = SetSpec::unit_ball(2);
    let a = estimate_capacity(&spec, 0.7, &[64, 128, 256], Scheme::Native, &cfg()).unwrap();
    let b = estimate_capacity(&spec, 0.7, &[64, 128, 256], Scheme::Native, &cfg()).unwrap();
    assert_eq!(a.capacity.to_bits(), b.capacity.to_bits());
    assert_eq!(a.level_capacities, b.level_capacities);
}
