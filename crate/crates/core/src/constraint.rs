//! Constraint families `g_i(t, q) >= 0`, active sets and the linearized
//! inner approximation of the feasible set.
//!
//! A family bundles `p` scalar constraints over configurations in `R^d`.
//! Every `g_i(t, .)` is expected to be convex and smooth on an open set
//! `U_i(t)` containing `{g_i(t, .) >= 0}`; `in_domain` reports membership
//! of `U_i(t)`. Derivatives are analytic, supplied by the implementor.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on `g_i` for a constraint to count as active.
pub const TOL_ACTIVE: f64 = 1e-10;

/// Absolute tolerance on `min_i g_i` for a configuration to count as feasible.
pub const TOL_FEAS: f64 = 1e-9;

/// A finite family of smooth convex constraints `g_i(t, q) >= 0`.
///
/// Implementations must be pure: the solver calls them from several
/// threads when refinement levels run concurrently.
pub trait ConstraintFamily: Send + Sync {
    /// Number of constraints `p`.
    fn len(&self) -> usize;

    /// Configuration dimension `d`.
    fn dim(&self) -> usize;

    fn value(&self, i: usize, t: f64, q: &DVector<f64>) -> f64;

    /// Gradient with respect to `q`.
    fn gradient(&self, i: usize, t: f64, q: &DVector<f64>) -> DVector<f64>;

    /// Partial derivative with respect to `t`.
    fn time_derivative(&self, i: usize, t: f64, q: &DVector<f64>) -> f64;

    /// Whether `q` lies in the open set `U_i(t)` where `g_i(t, .)` is smooth.
    fn in_domain(&self, i: usize, t: f64, q: &DVector<f64>) -> bool;

    /// Human-readable label used in diagnostics.
    fn name(&self, i: usize) -> String {
        format!("g{}", i + 1)
    }

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl<F: ConstraintFamily + ?Sized> ConstraintFamily for Arc<F> {
    fn len(&self) -> usize {
        (**self).len()
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, i: usize, t: f64, q: &DVector<f64>) -> f64 {
        (**self).value(i, t, q)
    }
    fn gradient(&self, i: usize, t: f64, q: &DVector<f64>) -> DVector<f64> {
        (**self).gradient(i, t, q)
    }
    fn time_derivative(&self, i: usize, t: f64, q: &DVector<f64>) -> f64 {
        (**self).time_derivative(i, t, q)
    }
    fn in_domain(&self, i: usize, t: f64, q: &DVector<f64>) -> bool {
        (**self).in_domain(i, t, q)
    }
    fn name(&self, i: usize) -> String {
        (**self).name(i)
    }
}

/// A single scalar constraint, the building block of [`ConstraintSet`].
pub trait Constraint: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, t: f64, q: &DVector<f64>) -> f64;
    fn gradient(&self, t: f64, q: &DVector<f64>) -> DVector<f64>;
    fn time_derivative(&self, t: f64, q: &DVector<f64>) -> f64;
    fn in_domain(&self, t: f64, q: &DVector<f64>) -> bool;
    fn name(&self) -> &str;
}

/// `g(t, q) = <normal, q> + offset + rate * t`.
///
/// Linear in `q`, so its own linearization and smooth everywhere.
#[derive(Debug, Clone)]
pub struct AffineConstraint {
    pub name: String,
    pub normal: DVector<f64>,
    pub offset: f64,
    pub rate: f64,
}

impl AffineConstraint {
    pub fn new(name: impl Into<String>, normal: DVector<f64>, offset: f64) -> Self {
        Self {
            name: name.into(),
            normal,
            offset,
            rate: 0.0,
        }
    }

    pub fn with_rate(mut self, rate: f64) -> Self {
        self.rate = rate;
        self
    }
}

impl Constraint for AffineConstraint {
    fn dim(&self) -> usize {
        self.normal.len()
    }
    fn value(&self, t: f64, q: &DVector<f64>) -> f64 {
        self.normal.dot(q) + self.offset + self.rate * t
    }
    fn gradient(&self, _t: f64, _q: &DVector<f64>) -> DVector<f64> {
        self.normal.clone()
    }
    fn time_derivative(&self, _t: f64, _q: &DVector<f64>) -> f64 {
        self.rate
    }
    fn in_domain(&self, _t: f64, _q: &DVector<f64>) -> bool {
        true
    }
    fn name(&self) -> &str {
        &self.name
    }
}

/// Keeps `q` outside an open ball: `g(t, q) = |q - c(t)| - R` with
/// `c(t) = center + velocity * t`.
///
/// Smooth on `|q - c(t)| > R / 2`.
#[derive(Debug, Clone)]
pub struct DiskExclusion {
    pub name: String,
    pub center: DVector<f64>,
    pub radius: f64,
    pub velocity: DVector<f64>,
}

impl DiskExclusion {
    pub fn new(name: impl Into<String>, center: DVector<f64>, radius: f64) -> Self {
        let d = center.len();
        Self {
            name: name.into(),
            center,
            radius,
            velocity: DVector::zeros(d),
        }
    }

    pub fn with_velocity(mut self, velocity: DVector<f64>) -> Self {
        self.velocity = velocity;
        self
    }

    fn center_at(&self, t: f64) -> DVector<f64> {
        &self.center + &self.velocity * t
    }
}

impl Constraint for DiskExclusion {
    fn dim(&self) -> usize {
        self.center.len()
    }
    fn value(&self, t: f64, q: &DVector<f64>) -> f64 {
        (q - self.center_at(t)).norm() - self.radius
    }
    fn gradient(&self, t: f64, q: &DVector<f64>) -> DVector<f64> {
        let rel = q - self.center_at(t);
        let n = rel.norm();
        rel / n
    }
    fn time_derivative(&self, t: f64, q: &DVector<f64>) -> f64 {
        -self.gradient(t, q).dot(&self.velocity)
    }
    fn in_domain(&self, t: f64, q: &DVector<f64>) -> bool {
        (q - self.center_at(t)).norm() > 0.5 * self.radius
    }
    fn name(&self) -> &str {
        &self.name
    }
}

/// A family assembled from independent scalar constraints.
#[derive(Clone)]
pub struct ConstraintSet {
    dim: usize,
    items: Vec<Arc<dyn Constraint>>,
}

impl ConstraintSet {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            items: Vec::new(),
        }
    }

    pub fn push(&mut self, c: impl Constraint + 'static) -> Result<()> {
        if c.dim() != self.dim {
            return Err(Error::Parameter(format!(
                "constraint {} has dimension {}, expected {}",
                c.name(),
                c.dim(),
                self.dim
            )));
        }
        self.items.push(Arc::new(c));
        Ok(())
    }

    pub fn with(mut self, c: impl Constraint + 'static) -> Result<Self> {
        self.push(c)?;
        Ok(self)
    }
}

impl ConstraintFamily for ConstraintSet {
    fn len(&self) -> usize {
        self.items.len()
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, i: usize, t: f64, q: &DVector<f64>) -> f64 {
        self.items[i].value(t, q)
    }
    fn gradient(&self, i: usize, t: f64, q: &DVector<f64>) -> DVector<f64> {
        self.items[i].gradient(t, q)
    }
    fn time_derivative(&self, i: usize, t: f64, q: &DVector<f64>) -> f64 {
        self.items[i].time_derivative(t, q)
    }
    fn in_domain(&self, i: usize, t: f64, q: &DVector<f64>) -> bool {
        self.items[i].in_domain(t, q)
    }
    fn name(&self, i: usize) -> String {
        self.items[i].name().to_string()
    }
}

/// One row `<normal, x> + offset >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace {
    pub normal: DVector<f64>,
    pub offset: f64,
}

impl HalfSpace {
    pub fn slack(&self, x: &DVector<f64>) -> f64 {
        self.normal.dot(x) + self.offset
    }
}

/// Intersection of finitely many closed half-spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyhedron {
    pub dim: usize,
    pub rows: Vec<HalfSpace>,
}

impl Polyhedron {
    pub fn new(dim: usize, rows: Vec<HalfSpace>) -> Self {
        Self { dim, rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn slacks(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.rows.len(), self.rows.iter().map(|r| r.slack(x)))
    }

    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        self.rows.iter().all(|r| r.slack(x) >= -tol)
    }

    /// Rows stacked as a `p x d` matrix.
    pub fn normal_matrix(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows.len(), self.dim);
        for (i, r) in self.rows.iter().enumerate() {
            m.row_mut(i).copy_from(&r.normal.transpose());
        }
        m
    }
}

pub fn evaluate_all<F: ConstraintFamily + ?Sized>(
    family: &F,
    t: f64,
    q: &DVector<f64>,
) -> DVector<f64> {
    DVector::from_iterator(family.len(), (0..family.len()).map(|i| family.value(i, t, q)))
}

/// Indices with `g_i(t, q) <= threshold` (up to [`TOL_ACTIVE`]).
///
/// `threshold = 0` gives the active set; `threshold = rho` its widened
/// version used by the advance-direction construction.
pub fn active_set<F: ConstraintFamily + ?Sized>(
    family: &F,
    t: f64,
    q: &DVector<f64>,
    threshold: f64,
) -> Vec<usize> {
    (0..family.len())
        .filter(|&i| family.value(i, t, q) <= threshold + TOL_ACTIVE)
        .collect()
}

/// Index and value of the most violated (smallest) constraint.
pub fn min_constraint<F: ConstraintFamily + ?Sized>(
    family: &F,
    t: f64,
    q: &DVector<f64>,
) -> Option<(usize, f64)> {
    (0..family.len())
        .map(|i| (i, family.value(i, t, q)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

pub fn is_feasible<F: ConstraintFamily + ?Sized>(
    family: &F,
    t: f64,
    q: &DVector<f64>,
    tol: f64,
) -> bool {
    min_constraint(family, t, q).is_none_or(|(_, v)| v >= -tol)
}

/// First-order expansion of every constraint at `q`:
/// row `i` reads `g_i(t,q) + <grad g_i(t,q), x - q> >= 0`.
pub fn linearize<F: ConstraintFamily + ?Sized>(
    family: &F,
    t: f64,
    q: &DVector<f64>,
) -> Result<Polyhedron> {
    let mut rows = Vec::with_capacity(family.len());
    for i in 0..family.len() {
        if !family.in_domain(i, t, q) {
            return Err(Error::Domain { index: i, t });
        }
        let normal = family.gradient(i, t, q);
        let offset = family.value(i, t, q) - normal.dot(q);
        rows.push(HalfSpace { normal, offset });
    }
    Ok(Polyhedron::new(family.dim(), rows))
}

/// Regularity constants of a constraint family.
///
/// `alpha <= |grad g_i| <= beta` on `U_i(t)`, `|d/dt g_i| <= beta`,
/// second and mixed derivatives bounded by `big_m`, `margin_c` separates
/// each `Q_i(t)` from the complement of `U_i(t)`, and `gamma` is the
/// inverse triangle constant over constraints with `g_i <= rho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularityParameters {
    pub alpha: f64,
    pub beta: f64,
    pub big_m: f64,
    pub margin_c: f64,
    pub rho: f64,
    pub gamma: f64,
    pub p: usize,
}

impl RegularityParameters {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("big_m", self.big_m),
            ("margin_c", self.margin_c),
            ("rho", self.rho),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Parameter(format!("{name} must be positive, got {v}")));
            }
        }
        if self.alpha > self.beta {
            return Err(Error::Parameter(format!(
                "alpha = {} exceeds beta = {}",
                self.alpha, self.beta
            )));
        }
        if !(self.gamma.is_finite() && self.gamma >= 1.0) {
            return Err(Error::Parameter(format!("gamma must be >= 1, got {}", self.gamma)));
        }
        if self.p == 0 {
            return Err(Error::Parameter("constraint count p must be positive".into()));
        }
        Ok(())
    }
}

/// Derivative magnitudes observed on sample points inside the domains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledBounds {
    pub grad_min: f64,
    pub grad_max: f64,
    pub dt_max: f64,
    pub hessian_max: f64,
    pub mixed_max: f64,
    pub samples: usize,
}

impl SampledBounds {
    /// Checks the observed magnitudes against `params`, with relative slack `rel`.
    pub fn check(&self, params: &RegularityParameters, rel: f64) -> Result<()> {
        let lo = |bound: f64| bound * (1.0 - rel);
        let hi = |bound: f64| bound * (1.0 + rel);
        if self.samples == 0 {
            return Ok(());
        }
        if self.grad_min < lo(params.alpha) {
            return Err(Error::Parameter(format!(
                "observed |grad g| = {} below alpha = {}",
                self.grad_min, params.alpha
            )));
        }
        if self.grad_max > hi(params.beta) || self.dt_max > hi(params.beta) {
            return Err(Error::Parameter(format!(
                "observed |grad g| = {} / |dt g| = {} above beta = {}",
                self.grad_max, self.dt_max, params.beta
            )));
        }
        if self.hessian_max > hi(params.big_m) || self.mixed_max > hi(params.big_m) {
            return Err(Error::Parameter(format!(
                "observed second derivative {} / mixed {} above M = {}",
                self.hessian_max, self.mixed_max, params.big_m
            )));
        }
        Ok(())
    }
}

/// Estimates derivative bounds of `family` over the given `(t, q)` samples.
///
/// Second derivatives come from central differences of the analytic
/// gradient; the Hessian norm is the largest absolute eigenvalue of the
/// symmetrized difference matrix.
pub fn sample_bounds<F, I>(family: &F, samples: I) -> SampledBounds
where
    F: ConstraintFamily + ?Sized,
    I: IntoIterator<Item = (f64, DVector<f64>)>,
{
    let mut out = SampledBounds {
        grad_min: f64::INFINITY,
        grad_max: 0.0,
        dt_max: 0.0,
        hessian_max: 0.0,
        mixed_max: 0.0,
        samples: 0,
    };
    let d = family.dim();
    for (t, q) in samples {
        for i in 0..family.len() {
            out.dt_max = out.dt_max.max(family.time_derivative(i, t, &q).abs());
            if !family.in_domain(i, t, &q) {
                continue;
            }
            out.samples += 1;
            let g = family.gradient(i, t, &q).norm();
            out.grad_min = out.grad_min.min(g);
            out.grad_max = out.grad_max.max(g);

            let step = 1e-5 * (1.0 + q.norm());
            let mut hess = DMatrix::zeros(d, d);
            let mut ok = true;
            for k in 0..d {
                let mut plus = q.clone();
                let mut minus = q.clone();
                plus[k] += step;
                minus[k] -= step;
                if !family.in_domain(i, t, &plus) || !family.in_domain(i, t, &minus) {
                    ok = false;
                    break;
                }
                let col = (family.gradient(i, t, &plus) - family.gradient(i, t, &minus))
                    / (2.0 * step);
                hess.set_column(k, &col);
            }
            if ok {
                let sym = (&hess + hess.transpose()) * 0.5;
                let eig = SymmetricEigen::new(sym);
                let norm = eig.eigenvalues.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                out.hessian_max = out.hessian_max.max(norm);
            }
            let dt_step = 1e-5 * (1.0 + t.abs());
            if family.in_domain(i, t + dt_step, &q) && family.in_domain(i, t - dt_step, &q) {
                let mixed = (family.gradient(i, t + dt_step, &q)
                    - family.gradient(i, t - dt_step, &q))
                    / (2.0 * dt_step);
                out.mixed_max = out.mixed_max.max(mixed.norm());
            }
        }
    }
    if out.samples == 0 {
        out.grad_min = 0.0;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dv(v: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(v)
    }

    fn half_line() -> ConstraintSet {
        ConstraintSet::new(1)
            .with(AffineConstraint::new("q", dv(&[1.0]), 0.0))
            .unwrap()
    }

    fn quadrant() -> ConstraintSet {
        ConstraintSet::new(2)
            .with(AffineConstraint::new("x1", dv(&[1.0, 0.0]), 0.0))
            .unwrap()
            .with(AffineConstraint::new("x2", dv(&[0.0, 1.0]), 0.0))
            .unwrap()
    }

    #[test]
    fn evaluate_identity() {
        let v = evaluate_all(&half_line(), 0.0, &dv(&[2.0]));
        assert_eq!(v.as_slice(), &[2.0]);
    }

    #[test]
    fn active_sets_by_threshold() {
        let f = quadrant();
        let q = dv(&[0.0, 0.5]);
        assert_eq!(active_set(&f, 0.0, &q, 0.0), vec![0]);
        assert_eq!(active_set(&f, 0.0, &q, 0.6), vec![0, 1]);
    }

    #[test]
    fn feasibility_tolerance() {
        let f = half_line();
        assert!(is_feasible(&f, 0.0, &dv(&[1.0]), 0.0));
        assert!(!is_feasible(&f, 0.0, &dv(&[-1e-3]), 1e-9));
    }

    #[test]
    fn linear_constraint_is_its_own_linearization() {
        let p = linearize(&half_line(), 0.0, &dv(&[0.3])).unwrap();
        assert_eq!(p.rows.len(), 1);
        assert_eq!(p.rows[0].normal.as_slice(), &[1.0]);
        assert!(p.rows[0].offset.abs() < 1e-15);
        assert!(p.contains(&dv(&[0.0]), 0.0));
        assert!(!p.contains(&dv(&[-1e-6]), 0.0));
    }

    #[test]
    fn disk_linearization_is_tangent_line() {
        let f = ConstraintSet::new(2)
            .with(DiskExclusion::new("disk", dv(&[0.0, 0.0]), 1.0))
            .unwrap();
        let p = linearize(&f, 0.0, &dv(&[2.0, 0.0])).unwrap();
        assert!((&p.rows[0].normal - dv(&[1.0, 0.0])).norm() < 1e-15);
        // membership x1 >= 1
        assert!((p.rows[0].slack(&dv(&[1.0, 7.0]))).abs() < 1e-15);
    }

    #[test]
    fn linearize_rejects_points_outside_domain() {
        let f = ConstraintSet::new(2)
            .with(DiskExclusion::new("disk", dv(&[0.0, 0.0]), 1.0))
            .unwrap();
        let err = linearize(&f, 0.0, &dv(&[0.2, 0.0])).unwrap_err();
        assert!(matches!(err, Error::Domain { index: 0, .. }));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let mut s = ConstraintSet::new(2);
        assert!(s.push(AffineConstraint::new("bad", dv(&[1.0]), 0.0)).is_err());
    }

    #[test]
    fn parameter_validation() {
        let good = RegularityParameters {
            alpha: 1.0,
            beta: 1.0,
            big_m: 1.0,
            margin_c: 1.0,
            rho: 0.5,
            gamma: 1.0,
            p: 1,
        };
        assert!(good.validate().is_ok());
        assert!(RegularityParameters { gamma: 0.5, ..good }.validate().is_err());
        assert!(RegularityParameters { alpha: 2.0, ..good }.validate().is_err());
        assert!(RegularityParameters { rho: 0.0, ..good }.validate().is_err());
    }

    #[test]
    fn sampled_bounds_of_unit_disk() {
        let f = ConstraintSet::new(2)
            .with(DiskExclusion::new("disk", dv(&[0.0, 0.0]), 1.0))
            .unwrap();
        let pts = (0..20).map(|k| {
            let a = k as f64 * 0.3;
            (0.0, dv(&[2.0 * a.cos(), 2.0 * a.sin()]))
        });
        let b = sample_bounds(&f, pts);
        assert!((b.grad_min - 1.0).abs() < 1e-12);
        assert!((b.grad_max - 1.0).abs() < 1e-12);
        // Hessian of |q| at radius 2 has norm 1/2
        assert!((b.hessian_max - 0.5).abs() < 1e-6);
    }
}
