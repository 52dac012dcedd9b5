//! Checks a computed trajectory against the regularity constants it was
//! computed with.

use crate::cone::{advance_direction, inverse_triangle_at, regularity_report};
use crate::constraint::active_set;
use crate::error::Result;
use crate::integrator::{Problem, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryAudit {
    /// Smallest `g_i(t_k, q_k)` over the run.
    pub min_constraint: f64,
    /// Largest inverse triangle constant of the `rho`-active gradients.
    pub gamma_max: f64,
    /// Smallest advance margin over states with a `rho`-active constraint.
    pub margin_min: f64,
    pub delta: f64,
    /// Largest `dist_pred / (D h)`; at most 1 when the distance bound holds.
    pub dist_ratio_max: f64,
    /// Largest KKT residual over all steps.
    pub kkt_max: f64,
    /// States with at least one `rho`-active constraint.
    pub active_states: usize,
}

impl TrajectoryAudit {
    pub fn gamma_ok(&self, gamma: f64) -> bool {
        self.gamma_max <= gamma
    }

    pub fn margin_ok(&self) -> bool {
        self.margin_min >= self.delta
    }
}

pub fn audit_trajectory(problem: &Problem, traj: &Trajectory) -> Result<TrajectoryAudit> {
    let report = regularity_report(&problem.params)?;
    let family = problem.family.as_ref();
    let mut out = TrajectoryAudit {
        min_constraint: traj.min_constraint(family),
        gamma_max: 1.0,
        margin_min: f64::INFINITY,
        delta: report.delta,
        dist_ratio_max: 0.0,
        kkt_max: 0.0,
        active_states: 0,
    };
    for (k, (&t, q)) in traj.times.iter().zip(&traj.states).enumerate() {
        if !active_set(family, t, q, problem.params.rho).is_empty() {
            out.active_states += 1;
            out.gamma_max = out
                .gamma_max
                .max(inverse_triangle_at(family, t, q, problem.params.rho)?);
            let adv = advance_direction(family, &problem.params, t, q)?;
            out.margin_min = out.margin_min.min(adv.margin);
        }
        if k > 0 {
            let rec = &traj.records[k];
            out.dist_ratio_max = out
                .dist_ratio_max
                .max(rec.dist_pred / (report.dist_constant * traj.h));
            out.kkt_max = out.kkt_max.max(rec.residuals.max());
        }
    }
    Ok(out)
}
