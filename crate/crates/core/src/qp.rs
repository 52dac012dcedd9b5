//! Euclidean projection onto the linearized feasible set.
//!
//! The projection `p` of a target `y` onto `{x : <n_i, x> + b_i >= 0}` is
//! characterized by multipliers `lambda >= 0` with
//!
//! ```text
//!     p = y + sum_i lambda_i n_i
//!     <n_i, p> + b_i >= 0                    for all i
//!     sum_i lambda_i (<n_i, p> + b_i) = 0
//! ```
//!
//! Small systems (at most [`EXACT_PIVOT_LIMIT`] rows) are solved exactly as
//! a least-distance program reduced to nonnegative least squares. Larger
//! ones use Hildreth's projected coordinate ascent on the dual with the Gram
//! matrix of the normals. Either way the KKT residuals are recomputed from
//! the returned point and multipliers.

use nalgebra::{DMatrix, DVector};

use crate::constraint::{linearize, ConstraintFamily, Polyhedron};
use crate::error::{Error, Result};
use crate::nnls::nnls;

/// Row count up to which the exact active-set route is used.
pub const EXACT_PIVOT_LIMIT: usize = 32;

/// Target accuracy of all three KKT residuals.
pub const KKT_TOL: f64 = 1e-10;

/// Residual level above which a solve is reported as failed.
pub const KKT_FAIL_TOL: f64 = 1e-8;

pub const MAX_DUAL_SWEEPS: usize = 100_000;

/// Nonnegative multipliers, one per constraint row.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MultiplierVector(pub Vec<f64>);

impl MultiplierVector {
    pub fn zeros(p: usize) -> Self {
        Self(vec![0.0; p])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Indices of strictly positive multipliers.
    pub fn support(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| self.0[i] > 0.0).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KktResiduals {
    /// `|p - y - sum lambda_i n_i|`
    pub stationarity: f64,
    /// Largest violation `max(0, -slack_i)`.
    pub primal: f64,
    /// `sum lambda_i |slack_i|`
    pub complementarity: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.stationarity.max(self.primal).max(self.complementarity)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionResult {
    pub point: DVector<f64>,
    pub multipliers: MultiplierVector,
    pub iterations: usize,
    pub residuals: KktResiduals,
}

/// Recomputes the KKT residuals of `(point, lambda)` for projecting `target`.
pub fn polyhedron_residuals(
    poly: &Polyhedron,
    target: &DVector<f64>,
    point: &DVector<f64>,
    lambda: &[f64],
) -> KktResiduals {
    let mut moved = point - target;
    let mut primal = 0.0_f64;
    let mut complementarity = 0.0;
    for (row, &l) in poly.rows.iter().zip(lambda) {
        moved.axpy(-l, &row.normal, 1.0);
        let slack = row.slack(point);
        primal = primal.max(-slack);
        complementarity += l * slack.abs();
    }
    KktResiduals {
        stationarity: moved.norm(),
        primal: primal + 0.0,
        complementarity,
    }
}

/// Projects `target` onto `poly`, optionally seeded with multipliers from a
/// neighbouring solve.
pub fn project_polyhedron(
    poly: &Polyhedron,
    target: &DVector<f64>,
    warm: Option<&MultiplierVector>,
) -> Result<ProjectionResult> {
    let p = poly.len();
    if p == 0 {
        return Ok(ProjectionResult {
            point: target.clone(),
            multipliers: MultiplierVector::default(),
            iterations: 0,
            residuals: KktResiduals::default(),
        });
    }
    let warm = warm.filter(|w| w.len() == p);

    let (mut lambda, mut iterations) = if p <= EXACT_PIVOT_LIMIT {
        least_distance(poly, target, warm)?
    } else {
        let start = warm.map(|w| w.0.clone()).unwrap_or_else(|| vec![0.0; p]);
        (start, 0)
    };

    let mut point = assemble(poly, target, &lambda);
    let mut residuals = polyhedron_residuals(poly, target, &point, &lambda);
    if residuals.max() > KKT_TOL {
        let sweeps = hildreth(poly, target, &mut lambda, MAX_DUAL_SWEEPS)?;
        iterations += sweeps;
        point = assemble(poly, target, &lambda);
        residuals = polyhedron_residuals(poly, target, &point, &lambda);
    }
    if residuals.max() > KKT_FAIL_TOL {
        return Err(Error::Convergence {
            what: "polyhedral projection",
            iterations,
            residual: residuals.max(),
        });
    }
    Ok(ProjectionResult {
        point,
        multipliers: MultiplierVector(lambda),
        iterations,
        residuals,
    })
}

/// Projects `target` onto the linearization of `family` at `(t, q)`.
pub fn project_linearized<F: ConstraintFamily + ?Sized>(
    family: &F,
    t: f64,
    q: &DVector<f64>,
    target: &DVector<f64>,
) -> Result<ProjectionResult> {
    project_linearized_warm(family, t, q, target, None)
}

pub fn project_linearized_warm<F: ConstraintFamily + ?Sized>(
    family: &F,
    t: f64,
    q: &DVector<f64>,
    target: &DVector<f64>,
    warm: Option<&MultiplierVector>,
) -> Result<ProjectionResult> {
    let poly = linearize(family, t, q)?;
    project_polyhedron(&poly, target, warm)
}

/// Re-evaluates the KKT system of a projection from the constraint family.
pub fn kkt_residual<F: ConstraintFamily + ?Sized>(
    family: &F,
    t: f64,
    q: &DVector<f64>,
    target: &DVector<f64>,
    result: &ProjectionResult,
) -> KktResiduals {
    let mut moved = &result.point - target;
    let mut primal = 0.0_f64;
    let mut complementarity = 0.0;
    for (i, &l) in result.multipliers.0.iter().enumerate() {
        let grad = family.gradient(i, t, q);
        moved.axpy(-l, &grad, 1.0);
        let slack = family.value(i, t, q) + grad.dot(&(&result.point - q));
        primal = primal.max(-slack);
        complementarity += l * slack.abs();
    }
    KktResiduals {
        stationarity: moved.norm(),
        primal: primal + 0.0,
        complementarity,
    }
}

fn assemble(poly: &Polyhedron, target: &DVector<f64>, lambda: &[f64]) -> DVector<f64> {
    let mut x = target.clone();
    for (row, &l) in poly.rows.iter().zip(lambda) {
        if l != 0.0 {
            x.axpy(l, &row.normal, 1.0);
        }
    }
    x
}

/// Least-distance program `min |x|` s.t. `<n_i, x> >= -slack_i(target)`,
/// solved through the nonnegative least-squares problem
/// `min |E u - e_{d+1}|`, `E = [N^T; h^T]`.
fn least_distance(
    poly: &Polyhedron,
    target: &DVector<f64>,
    warm: Option<&MultiplierVector>,
) -> Result<(Vec<f64>, usize)> {
    let d = poly.dim;
    let p = poly.len();
    let mut e = DMatrix::zeros(d + 1, p);
    for (i, row) in poly.rows.iter().enumerate() {
        e.view_mut((0, i), (d, 1)).copy_from(&row.normal);
        e[(d, i)] = -row.slack(target);
    }
    let mut f = DVector::zeros(d + 1);
    f[d] = 1.0;
    let seed = warm.map(|w| w.support()).unwrap_or_default();
    let sol = nnls(&e, &f, 100 * p.max(1), &seed)?;
    // residual of the least-squares problem is f - E u; last entry is 1 - h^T u
    let denom = sol.residual[d];
    if denom <= 1e-14 {
        return Err(Error::InfeasiblePolyhedron);
    }
    let lambda = sol.x.iter().map(|u| u / denom).collect();
    Ok((lambda, sol.iterations))
}

/// Hildreth's method: cyclic exact minimization of the dual
/// `1/2 l^T G l + s^T l` over `l >= 0`, where `G` is the Gram matrix of
/// the normals and `s` the slacks at the target.
fn hildreth(
    poly: &Polyhedron,
    target: &DVector<f64>,
    lambda: &mut [f64],
    max_sweeps: usize,
) -> Result<usize> {
    let p = poly.len();
    let n = poly.normal_matrix();
    let gram = &n * n.transpose();
    let s = poly.slacks(target);
    // w = G lambda + s is the slack vector at the current primal point
    let lam = DVector::from_column_slice(lambda);
    let mut w = &gram * &lam + &s;
    let scale = 1.0 + s.amax();
    for sweep in 1..=max_sweeps {
        for i in 0..p {
            let gii = gram[(i, i)];
            if gii <= 0.0 {
                if w[i] < -KKT_TOL {
                    return Err(Error::InfeasiblePolyhedron);
                }
                continue;
            }
            let next = (lambda[i] - w[i] / gii).max(0.0);
            let delta = next - lambda[i];
            if delta != 0.0 {
                lambda[i] = next;
                w.axpy(delta, &gram.column(i), 1.0);
            }
        }
        let mut primal = 0.0_f64;
        let mut compl = 0.0;
        let mut big = 0.0_f64;
        for i in 0..p {
            primal = primal.max(-w[i]);
            compl += lambda[i] * w[i].abs();
            big = big.max(lambda[i]);
        }
        if big > 1e12 * scale {
            return Err(Error::InfeasiblePolyhedron);
        }
        if primal <= KKT_TOL * 0.5 && compl <= KKT_TOL * 0.5 {
            return Ok(sweep);
        }
        // refresh against drift every so often
        if sweep % 64 == 0 {
            let lam = DVector::from_column_slice(lambda);
            w = &gram * &lam + &s;
        }
    }
    Ok(max_sweeps)
}

/// Brute-force projection by enumerating candidate active sets.
///
/// Every subset of at most `d` rows with linearly independent normals is
/// treated as the active set: its equality-constrained least-distance
/// problem is solved, candidates with a negative multiplier or an
/// infeasible point are discarded, and the closest survivor is returned.
/// Exponential in the row count; limited to 20 rows.
pub fn oracle_project(poly: &Polyhedron, target: &DVector<f64>) -> Result<DVector<f64>> {
    let p = poly.len();
    if p > 20 {
        return Err(Error::Parameter(format!(
            "oracle projection limited to 20 rows, got {p}"
        )));
    }
    let slacks = poly.slacks(target);
    let scale = 1.0 + slacks.amax() + target.amax();
    let mut best: Option<(f64, DVector<f64>)> = None;
    for mask in 0u32..(1u32 << p) {
        let rows: Vec<usize> = (0..p).filter(|&i| mask & (1 << i) != 0).collect();
        if rows.len() > poly.dim {
            continue;
        }
        let mut x = target.clone();
        if !rows.is_empty() {
            let k = rows.len();
            let mut gram = DMatrix::zeros(k, k);
            let mut rhs = DVector::zeros(k);
            for (a, &i) in rows.iter().enumerate() {
                rhs[a] = -slacks[i];
                for (b, &j) in rows.iter().enumerate() {
                    gram[(a, b)] = poly.rows[i].normal.dot(&poly.rows[j].normal);
                }
            }
            let diag_max = gram.diagonal().amax();
            let Some(chol) = gram.clone().cholesky() else {
                continue;
            };
            let l = chol.l();
            let min_pivot = l.diagonal().iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
            if min_pivot * min_pivot < 1e-12 * diag_max {
                continue;
            }
            let mult = chol.solve(&rhs);
            if mult.iter().any(|&v| v < -1e-12 * scale) {
                continue;
            }
            for (a, &i) in rows.iter().enumerate() {
                x.axpy(mult[a], &poly.rows[i].normal, 1.0);
            }
        }
        if !poly.contains(&x, 1e-9 * scale) {
            continue;
        }
        let dist = (&x - target).norm();
        if best.as_ref().is_none_or(|(bd, _)| dist < *bd) {
            best = Some((dist, x));
        }
    }
    best.map(|(_, x)| x).ok_or(Error::EmptyPolyhedron)
}
