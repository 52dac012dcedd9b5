//! Finitely generated cones, advance directions and feasibility restoration.
//!
//! For a closed convex cone `K` with polar `K°`, every vector splits
//! orthogonally as `w = P_K(w) + P_K°(w)`. With `K` generated by the
//! negated gradients of the nearly active constraints, the polar parts of
//! those gradients sum to a direction along which every such constraint
//! increases at a uniform rate.

use nalgebra::DVector;

use crate::constraint::{
    active_set, is_feasible, ConstraintFamily, HalfSpace, Polyhedron, RegularityParameters,
};
use crate::error::{Error, Result};
use crate::nnls::nnls;
use crate::qp::project_polyhedron;

/// Orthogonal split `w = cone_part + polar_part`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeDecomposition {
    pub input: DVector<f64>,
    /// Projection of the input onto the cone.
    pub cone_part: DVector<f64>,
    /// Projection onto the polar cone.
    pub polar_part: DVector<f64>,
    /// Nonnegative weights with `cone_part = sum coefficients_j * generator_j`.
    pub coefficients: Vec<f64>,
}

/// Projects `w` onto the cone generated by `generators`.
pub fn project_onto_cone(generators: &[DVector<f64>], w: &DVector<f64>) -> Result<ConeDecomposition> {
    let d = w.len();
    if generators.is_empty() {
        return Ok(ConeDecomposition {
            input: w.clone(),
            cone_part: DVector::zeros(d),
            polar_part: w.clone(),
            coefficients: Vec::new(),
        });
    }
    for (j, g) in generators.iter().enumerate() {
        if g.len() != d {
            return Err(Error::Parameter(format!(
                "generator {j} has dimension {}, expected {d}",
                g.len()
            )));
        }
        if g.norm() == 0.0 {
            return Err(Error::Parameter(format!("generator {j} is zero")));
        }
    }
    let a = nalgebra::DMatrix::from_columns(generators);
    let sol = nnls(&a, w, 100 * generators.len(), &[])?;
    let cone_part = &a * &sol.x;
    Ok(ConeDecomposition {
        input: w.clone(),
        polar_part: w - &cone_part,
        cone_part,
        coefficients: sol.x.iter().copied().collect(),
    })
}

/// Constants derived from [`RegularityParameters`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityReport {
    /// Uniform advance rate `alpha^2 / (2 gamma^2 p beta)`.
    pub delta: f64,
    /// Prox-regularity of a single constraint set, `alpha / M`.
    pub eta0: f64,
    /// Prox-regularity of the intersection, `eta0 / gamma`.
    pub eta: f64,
    /// Lipschitz constant of the moving set, `beta / delta`.
    pub k_lipschitz: f64,
    /// Bound on the distance from `q_k` to the next linearized set per unit step, `2 beta / delta`.
    pub dist_constant: f64,
    /// Largest admissible step: `min(c / K_L, delta / (2 M), rho / (2 beta))`.
    pub h_max: f64,
    /// Advance length limit `min(c, rho / (beta + delta))`.
    pub h_l: f64,
    /// Longest time interval bridged by one advance, `beta h_l / delta`.
    pub ell: f64,
}

pub fn regularity_report(params: &RegularityParameters) -> Result<RegularityReport> {
    params.validate()?;
    let RegularityParameters {
        alpha,
        beta,
        big_m,
        margin_c,
        rho,
        gamma,
        p,
    } = *params;
    let delta = alpha * alpha / (2.0 * gamma * gamma * p as f64 * beta);
    let eta0 = alpha / big_m;
    let k_lipschitz = beta / delta;
    let h_l = margin_c.min(rho / (beta + delta));
    Ok(RegularityReport {
        delta,
        eta0,
        eta: eta0 / gamma,
        k_lipschitz,
        dist_constant: 2.0 * beta / delta,
        h_max: (margin_c / k_lipschitz)
            .min(delta / (2.0 * big_m))
            .min(rho / (2.0 * beta)),
        h_l,
        ell: beta * h_l / delta,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdvanceDirection {
    /// Unit vector.
    pub u: DVector<f64>,
    /// `min_i <grad g_i, u>` over the nearly active constraints; `+inf` if none.
    pub margin: f64,
    /// The constraints with `g_i <= rho`.
    pub active: Vec<usize>,
}

/// Direction along which every constraint with `g_i(t, q) <= rho` grows.
///
/// Each such gradient is split against the cone generated by the negated
/// gradients of the group; the normalized sum of the polar parts is
/// returned. When no constraint is within `rho`, `u` is the first basis
/// vector and the margin is infinite.
pub fn advance_direction<F: ConstraintFamily + ?Sized>(
    family: &F,
    params: &RegularityParameters,
    t: f64,
    q: &DVector<f64>,
) -> Result<AdvanceDirection> {
    let active = active_set(family, t, q, params.rho);
    let d = family.dim();
    if active.is_empty() {
        let mut u = DVector::zeros(d);
        if d > 0 {
            u[0] = 1.0;
        }
        return Ok(AdvanceDirection {
            u,
            margin: f64::INFINITY,
            active,
        });
    }
    let grads: Vec<DVector<f64>> = active.iter().map(|&i| family.gradient(i, t, q)).collect();
    let generators: Vec<DVector<f64>> = grads.iter().map(|g| -g).collect();
    let mut sum = DVector::zeros(d);
    for g in &grads {
        sum += project_onto_cone(&generators, g)?.polar_part;
    }
    let norm = sum.norm();
    if norm < 1e-12 {
        return Err(Error::DegenerateCone { norm });
    }
    let u = sum / norm;
    let margin = grads
        .iter()
        .map(|g| g.dot(&u))
        .fold(f64::INFINITY, f64::min);
    Ok(AdvanceDirection { u, margin, active })
}

/// Moves `q` from `Q(t)` into `Q(s)`.
///
/// `[t, s]` is cut into `ceil(|t - s| / ell)` equal pieces. On each piece
/// of length `tau`, if the current point is not yet feasible at the piece
/// end it advances by `(beta / delta) * tau` along the advance direction
/// at the piece start. The total displacement is at most `K_L |t - s|`.
pub fn restore_feasibility<F: ConstraintFamily + ?Sized>(
    family: &F,
    params: &RegularityParameters,
    q: &DVector<f64>,
    t: f64,
    s: f64,
) -> Result<DVector<f64>> {
    if s == t {
        return Ok(q.clone());
    }
    let report = regularity_report(params)?;
    let span = (s - t).abs();
    let pieces = (span / report.ell).ceil().max(1.0) as usize;
    let tau = span / pieces as f64;
    let dir = (s - t).signum();
    let mut cur = q.clone();
    let mut t_cur = t;
    for k in 0..pieces {
        let t_next = if k + 1 == pieces {
            s
        } else {
            t + dir * tau * (k + 1) as f64
        };
        if !is_feasible(family, t_next, &cur, 0.0) {
            let adv = advance_direction(family, params, t_cur, &cur)?;
            cur.axpy(report.k_lipschitz * tau, &adv.u, 1.0);
        }
        t_cur = t_next;
    }
    Ok(cur)
}

/// Smallest `gamma` with `sum l_i |g_i| <= gamma |sum l_i g_i|` for all
/// `l >= 0`.
///
/// Equals `1 / dist(0, conv{g_i / |g_i|})`, computed as the norm of the
/// least-norm point of `{x : <g_i / |g_i|, x> >= 1}`. Infinite when the
/// normalized gradients are not positively independent.
pub fn inverse_triangle_constant(gradients: &[DVector<f64>]) -> Result<f64> {
    if gradients.is_empty() {
        return Ok(1.0);
    }
    let d = gradients[0].len();
    let rows = gradients
        .iter()
        .map(|g| HalfSpace {
            normal: g / g.norm(),
            offset: -1.0,
        })
        .collect();
    let poly = Polyhedron::new(d, rows);
    match project_polyhedron(&poly, &DVector::zeros(d), None) {
        Ok(r) => Ok(r.point.norm().max(1.0)),
        Err(Error::InfeasiblePolyhedron) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

/// [`inverse_triangle_constant`] of the constraints with `g_i(t, q) <= threshold`.
pub fn inverse_triangle_at<F: ConstraintFamily + ?Sized>(
    family: &F,
    t: f64,
    q: &DVector<f64>,
    threshold: f64,
) -> Result<f64> {
    let grads: Vec<_> = active_set(family, t, q, threshold)
        .into_iter()
        .map(|i| family.gradient(i, t, q))
        .collect();
    inverse_triangle_constant(&grads)
}
