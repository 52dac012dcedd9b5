#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::DVector;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use sweep_core::constraint::{HalfSpace, Polyhedron};
use sweep_core::crowd::{ContactGraph, CrowdConfiguration, CONTACT_TOL};

pub fn uniform_vec(rng: &mut ChaCha8Rng, d: usize, half_width: f64) -> DVector<f64> {
    DVector::from_fn(d, |_, _| rng.random_range(-half_width..half_width))
}

/// Random polyhedron containing a random point, so it is never empty.
pub fn random_polyhedron(rng: &mut ChaCha8Rng, d: usize, p: usize) -> Polyhedron {
    let inside = uniform_vec(rng, d, 1.0);
    let rows = (0..p)
        .map(|_| {
            let mut normal = uniform_vec(rng, d, 1.0);
            while normal.norm() < 0.1 {
                normal = uniform_vec(rng, d, 1.0);
            }
            let slack = rng.random_range(0.0..0.5);
            HalfSpace {
                offset: slack - normal.dot(&inside),
                normal,
            }
        })
        .collect();
    Polyhedron::new(d, rows)
}

/// Touching disks grown one at a time: each new disk is placed against
/// one disk at a random angle or nestled against two, and kept only if
/// it overlaps nothing. Always connected.
pub fn random_cluster(rng: &mut ChaCha8Rng, n: usize, r: f64) -> CrowdConfiguration {
    let mut pts: Vec<[f64; 2]> = vec![[0.0, 0.0]];
    let mut attempts = 0;
    while pts.len() < n {
        attempts += 1;
        assert!(attempts < 100_000, "cluster growth stalled");
        let candidate = if pts.len() >= 2 && rng.random_bool(0.6) {
            let i = rng.random_range(0..pts.len());
            let j = rng.random_range(0..pts.len());
            if i == j {
                continue;
            }
            let (a, b) = (pts[i], pts[j]);
            let dx = b[0] - a[0];
            let dy = b[1] - a[1];
            let dist = dx.hypot(dy);
            if dist > 4.0 * r {
                continue;
            }
            let h = (4.0 * r * r - dist * dist / 4.0).max(0.0).sqrt();
            let side = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            [
                a[0] + dx / 2.0 - side * h * dy / dist,
                a[1] + dy / 2.0 + side * h * dx / dist,
            ]
        } else {
            let i = rng.random_range(0..pts.len());
            let theta = rng.random_range(0.0..2.0 * PI);
            [pts[i][0] + 2.0 * r * theta.cos(), pts[i][1] + 2.0 * r * theta.sin()]
        };
        let ok = pts
            .iter()
            .all(|p| (p[0] - candidate[0]).hypot(p[1] - candidate[1]) - 2.0 * r >= -1e-12);
        if ok {
            pts.push(candidate);
        }
    }
    CrowdConfiguration::new(r, &pts)
}

/// Centre disk with a full hexagonal ring, `r = 0.5`.
pub fn hexagonal_cluster() -> CrowdConfiguration {
    let mut pts = vec![[0.0, 0.0]];
    for k in 0..6 {
        let a = k as f64 * PI / 3.0;
        pts.push([a.cos(), a.sin()]);
    }
    CrowdConfiguration::new(0.5, &pts)
}

/// `sum mu_k G_k` with random nonnegative weights, some zeroed.
pub fn random_cone_force(rng: &mut ChaCha8Rng, config: &CrowdConfiguration) -> DVector<f64> {
    let g = ContactGraph::build(config, CONTACT_TOL);
    let mu: Vec<f64> = (0..g.len())
        .map(|_| {
            if rng.random_bool(0.2) {
                0.0
            } else {
                rng.random_range(0.0..2.0)
            }
        })
        .collect();
    g.combine(&mu)
}
