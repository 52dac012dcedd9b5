use std::sync::Arc;

use nalgebra::dvector;

use sweep_core::constraint::{AffineConstraint, ConstraintSet, DiskExclusion, RegularityParameters};
use sweep_core::integrator::{ConstantField, PiecewiseConstantField, TargetSeeking};
use sweep_core::scenario::builtin_names;
use sweep_core::{
    builtin, estimate_order, regularity_report, simulate, step, Error, Perturbation, Problem,
};

fn max_closed_form_error(name: &str, n: usize, exact: impl Fn(f64) -> f64) -> f64 {
    let s = builtin(name).unwrap();
    let traj = simulate(&s.problem(), n).unwrap();
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(&t, q)| (q[0] - exact(t)).abs())
        .fold(0.0, f64::max)
}

#[test]
fn sticking_matches_closed_form() {
    for n in [10, 50, 100, 200] {
        let err = max_closed_form_error("sticking-1d", n, |t| (0.5 - t).max(0.0));
        assert!(err <= 1e-12, "n = {n}: {err:e}");
    }
}

#[test]
fn moving_half_line_matches_closed_form() {
    for n in [10, 50, 100, 200] {
        let err = max_closed_form_error("moving-half-line", n, |t| 0.5 * t);
        assert!(err <= 1e-12, "n = {n}: {err:e}");
    }
}

#[test]
fn zero_field_is_stationary() {
    let fam = ConstraintSet::new(2)
        .with(DiskExclusion::new("disk", dvector![0.0, 0.0], 1.0))
        .unwrap();
    let problem = Problem {
        family: Arc::new(fam),
        perturbation: Arc::new(ConstantField { value: dvector![0.0, 0.0] }),
        params: RegularityParameters {
            alpha: 1.0,
            beta: 1.0,
            big_m: 2.0,
            margin_c: 0.45,
            rho: 0.225,
            gamma: 1.0,
            p: 1,
        },
        q0: dvector![1.0, 0.0],
        horizon: 1.0,
    };
    let traj = simulate(&problem, 40).unwrap();
    assert!(traj.states.iter().all(|q| *q == problem.q0));
    let study = estimate_order(&problem, 40, 3).unwrap();
    assert!(study.exact);
    assert!(study.errors.iter().all(|&e| e == 0.0));
}

#[test]
fn sticking_order_flagged_exact() {
    let study = estimate_order(&builtin("sticking-1d").unwrap().problem(), 10, 3).unwrap();
    assert!(study.exact);
    assert!(study.order.is_none());
}

#[test]
fn disk_slide_is_first_order() {
    let study = estimate_order(&builtin("disk-slide").unwrap().problem(), 100, 5).unwrap();
    let order = study.order.unwrap();
    assert!((0.8..=1.2).contains(&order), "order {order}");
    for w in study.cauchy.windows(2) {
        assert!(w[0] / w[1] >= 1.5, "cauchy ratio {}", w[0] / w[1]);
    }
}

#[test]
fn runs_are_deterministic() {
    for name in builtin_names() {
        let p = builtin(name).unwrap().problem();
        assert_eq!(simulate(&p, 100).unwrap(), simulate(&p, 100).unwrap(), "{name}");
    }
}

#[test]
fn coarse_request_is_refined() {
    let s = builtin("labyrinth").unwrap();
    let h_max = regularity_report(&s.params).unwrap().h_max;
    let traj = simulate(&s.problem(), 50).unwrap();
    assert_eq!(traj.requested_n, 50);
    assert!(traj.h <= h_max / 2.0 * (1.0 + 1e-12));
}

#[test]
fn infeasible_start_is_reported_at_step_zero() {
    let mut p = builtin("disk-slide").unwrap().problem();
    p.q0 = dvector![0.5, 0.0];
    match simulate(&p, 100).unwrap_err() {
        Error::AtStep { k: 0, source } => assert!(matches!(*source, Error::Feasibility { .. })),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn step_rejects_large_steps() {
    let s = builtin("disk-slide").unwrap();
    let fam = s.family();
    let f = s.perturbation();
    let h_max = regularity_report(&s.params).unwrap().h_max;
    assert!(step(fam.as_ref(), &s.params, f.as_ref(), 0.0, h_max, &s.q0()).is_ok());
    assert!(matches!(
        step(fam.as_ref(), &s.params, f.as_ref(), 0.0, 1.5 * h_max, &s.q0()),
        Err(Error::StepTooLarge { .. })
    ));
}

#[test]
fn field_constants_hold_on_samples() {
    let fields: Vec<(Box<dyn Perturbation>, usize)> = vec![
        (Box::new(ConstantField { value: dvector![1.0, -2.0] }), 2),
        (
            Box::new(
                PiecewiseConstantField::new(vec![1.0], vec![dvector![0.0, 1.0], dvector![3.0, 0.0]])
                    .unwrap(),
            ),
            2,
        ),
        (
            Box::new(TargetSeeking {
                targets: vec![[0.0, 0.0], [1.0, 2.0]],
                speed: 1.5,
                saturation: 0.4,
            }),
            4,
        ),
    ];
    let mut seed = 1u64;
    let mut next = || {
        seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (seed >> 11) as f64 / (1u64 << 53) as f64 * 6.0 - 3.0
    };
    for (f, d) in fields {
        for _ in 0..500 {
            let t = next().abs();
            let q = nalgebra::DVector::from_fn(d, |_, _| next());
            let q2 = nalgebra::DVector::from_fn(d, |_, _| next());
            let lhs = (f.eval(t, &q) - f.eval(t, &q2)).norm();
            assert!(lhs <= f.lipschitz() * (&q - &q2).norm() * (1.0 + 1e-9) + 1e-15);
            assert!(f.eval(t, &q).norm() <= f.growth() * (1.0 + q.norm()) * (1.0 + 1e-9));
        }
    }
}

#[test]
fn affine_family_round_trip_through_step() {
    // one step onto a tilted half-plane equals the analytic projection
    let n = dvector![3.0, 4.0];
    let fam = ConstraintSet::new(2)
        .with(AffineConstraint::new("tilted", n.clone(), 0.0))
        .unwrap();
    let params = RegularityParameters {
        alpha: 5.0,
        beta: 5.0,
        big_m: 1e-3,
        margin_c: 1.0,
        rho: 0.5,
        gamma: 1.0,
        p: 1,
    };
    let f = ConstantField { value: dvector![-1.0, -1.0] };
    let q = dvector![0.0, 0.0];
    let (next, r) = step(&fam, &params, &f, 0.0, 0.01, &q).unwrap();
    let pred = dvector![-0.01, -0.01];
    let expected = &pred - &n * (n.dot(&pred) / n.norm_squared());
    assert!((next - expected).norm() < 1e-15);
    assert!((r.multipliers.0[0] - 0.07 / 25.0).abs() < 1e-15);
}
