//! Numerical solver for perturbed sweeping processes
//!
//! ```text
//! dq/dt + N(Q(t), q) ∋ f(t, q),     Q(t) = { q : g_i(t, q) >= 0, i = 1..p }
//! ```
//!
//! with each `g_i(t, .)` smooth and convex. Time stepping projects an
//! explicit Euler prediction onto the polyhedron obtained by linearizing
//! the constraints at the current state; see [`integrator`].
//!
//! The [`crowd`] module covers rigid disks that may not overlap, including
//! explicit bounded contact multipliers. Builtin and file-based scenarios
//! live in [`scenario`].

pub mod cone;
pub mod audit;
pub mod constraint;
pub mod crowd;
pub mod error;
pub mod hull;
pub mod integrator;
pub mod nnls;
pub mod qp;
pub mod scenario;

pub use audit::{audit_trajectory, TrajectoryAudit};
pub use cone::{
    advance_direction, inverse_triangle_at, inverse_triangle_constant, project_onto_cone,
    regularity_report, restore_feasibility, AdvanceDirection, ConeDecomposition,
    RegularityReport,
};
pub use constraint::{
    active_set, evaluate_all, is_feasible, linearize, min_constraint, AffineConstraint,
    Constraint, ConstraintFamily, ConstraintSet, DiskExclusion, HalfSpace, Polyhedron,
    RegularityParameters, TOL_ACTIVE, TOL_FEAS,
};
pub use crowd::{
    crowd_constants, crowd_family, eliminate_multipliers, moreau_velocity, polydisperse_bound,
    ContactGraph, CrowdConfiguration, CrowdConstants, CrowdFamily, MultiplierCertificate,
};
pub use error::{Error, Result};
pub use integrator::{
    estimate_order, simulate, step, ConvergenceStudy, Perturbation, Problem, Trajectory,
};
pub use qp::{
    kkt_residual, oracle_project, project_linearized, project_polyhedron, KktResiduals,
    MultiplierVector, ProjectionResult,
};
pub use scenario::{
    builtin, load_scenario, parse_scenario, write_trajectory, Scenario, ScenarioSpec,
};
