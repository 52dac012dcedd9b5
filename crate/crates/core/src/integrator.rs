//! Prediction-correction time stepping for perturbed sweeping processes.
//!
//! One step predicts with explicit Euler, `q_k + h f(t_k, q_k)`, then
//! projects the prediction onto the linearization of the constraints at
//! `(t_{k+1}, q_k)`. Convexity of every `g_i(t, .)` makes the linearized
//! set an inner approximation, so each iterate is feasible.

use std::sync::Arc;

use nalgebra::DVector;
use rayon::prelude::*;

use crate::cone::regularity_report;
use crate::constraint::{
    active_set, linearize, min_constraint, ConstraintFamily, RegularityParameters, TOL_FEAS,
};
use crate::error::{Error, Result};
use crate::qp::{project_polyhedron, KktResiduals, MultiplierVector, ProjectionResult};

/// The right-hand side `f(t, q)` with its Lipschitz (`K`) and linear-growth
/// (`L`) constants.
pub trait Perturbation: Send + Sync {
    fn eval(&self, t: f64, q: &DVector<f64>) -> DVector<f64>;

    /// `|f(t,q) - f(t,q')| <= K |q - q'|`
    fn lipschitz(&self) -> f64;

    /// `|f(t,q)| <= L (1 + |q|)`
    fn growth(&self) -> f64;
}

#[derive(Debug, Clone)]
pub struct ConstantField {
    pub value: DVector<f64>,
}

impl Perturbation for ConstantField {
    fn eval(&self, _t: f64, _q: &DVector<f64>) -> DVector<f64> {
        self.value.clone()
    }
    fn lipschitz(&self) -> f64 {
        0.0
    }
    fn growth(&self) -> f64 {
        self.value.norm()
    }
}

/// `values[j]` applies on `[breaks[j-1], breaks[j])`, with `breaks`
/// increasing and one more value than breaks.
#[derive(Debug, Clone)]
pub struct PiecewiseConstantField {
    pub breaks: Vec<f64>,
    pub values: Vec<DVector<f64>>,
}

impl PiecewiseConstantField {
    pub fn new(breaks: Vec<f64>, values: Vec<DVector<f64>>) -> Result<Self> {
        if values.len() != breaks.len() + 1 {
            return Err(Error::Parameter(format!(
                "{} values for {} breaks; expected one more value than breaks",
                values.len(),
                breaks.len()
            )));
        }
        if breaks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parameter("breaks must be strictly increasing".into()));
        }
        Ok(Self { breaks, values })
    }
}

impl Perturbation for PiecewiseConstantField {
    fn eval(&self, t: f64, _q: &DVector<f64>) -> DVector<f64> {
        let piece = self.breaks.partition_point(|&b| b <= t);
        self.values[piece].clone()
    }
    fn lipschitz(&self) -> f64 {
        0.0
    }
    fn growth(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Planar agents each heading to a target:
/// `U_i = speed (x_i - q_i) / max(|x_i - q_i|, saturation)`.
///
/// Full speed far from the target, slowing linearly inside the saturation
/// radius.
#[derive(Debug, Clone)]
pub struct TargetSeeking {
    pub targets: Vec<[f64; 2]>,
    pub speed: f64,
    pub saturation: f64,
}

impl Perturbation for TargetSeeking {
    fn eval(&self, _t: f64, q: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(q.len());
        for (i, x) in self.targets.iter().enumerate() {
            let dx = x[0] - q[2 * i];
            let dy = x[1] - q[2 * i + 1];
            let scale = self.speed / dx.hypot(dy).max(self.saturation);
            out[2 * i] = dx * scale;
            out[2 * i + 1] = dy * scale;
        }
        out
    }
    fn lipschitz(&self) -> f64 {
        self.speed / self.saturation
    }
    fn growth(&self) -> f64 {
        self.speed * (self.targets.len() as f64).sqrt()
    }
}

/// Everything needed to integrate one sweeping process.
#[derive(Clone)]
pub struct Problem {
    pub family: Arc<dyn ConstraintFamily>,
    pub perturbation: Arc<dyn Perturbation>,
    pub params: RegularityParameters,
    pub q0: DVector<f64>,
    pub horizon: f64,
}

/// Per-step bookkeeping. Entry `k` describes the step that produced `q_k`;
/// entry 0 only carries the active set of the initial state.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StepRecord {
    /// Active set of `q_k` at `t_k`.
    pub active: Vec<usize>,
    pub multipliers: MultiplierVector,
    pub residuals: KktResiduals,
    /// Distance from `q_{k-1}` to the linearized set used by the step.
    pub dist_pred: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Grid count actually used.
    pub n: usize,
    /// Grid count requested by the caller.
    pub requested_n: usize,
    pub h: f64,
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub records: Vec<StepRecord>,
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, |q| q.len())
    }

    pub fn last(&self) -> &DVector<f64> {
        self.states.last().expect("trajectory has at least the initial state")
    }

    /// Piecewise-linear interpolation between grid points, clamped to the
    /// time range.
    pub fn at(&self, t: f64) -> DVector<f64> {
        let last = self.times.len() - 1;
        if t <= self.times[0] {
            return self.states[0].clone();
        }
        if t >= self.times[last] {
            return self.states[last].clone();
        }
        let k = ((t - self.times[0]) / self.h).floor() as usize;
        let k = k.min(last - 1);
        let theta = ((t - self.times[k]) / (self.times[k + 1] - self.times[k])).clamp(0.0, 1.0);
        &self.states[k] * (1.0 - theta) + &self.states[k + 1] * theta
    }

    /// Smallest constraint value over all states, each at its own time.
    pub fn min_constraint<F: ConstraintFamily + ?Sized>(&self, family: &F) -> f64 {
        self.times
            .iter()
            .zip(&self.states)
            .filter_map(|(&t, q)| min_constraint(family, t, q).map(|(_, v)| v))
            .fold(f64::INFINITY, f64::min)
    }
}

struct StepOutput {
    next: DVector<f64>,
    projection: ProjectionResult,
    dist_pred: f64,
}

fn advance<F: ConstraintFamily + ?Sized, P: Perturbation + ?Sized>(
    family: &F,
    perturbation: &P,
    t_k: f64,
    h: f64,
    q_k: &DVector<f64>,
    warm: Option<&MultiplierVector>,
) -> Result<StepOutput> {
    let t_next = t_k + h;
    let poly = linearize(family, t_next, q_k)?;
    let prediction = q_k + perturbation.eval(t_k, q_k) * h;
    let projection = project_polyhedron(&poly, &prediction, warm)?;
    let dist_pred = (project_polyhedron(&poly, q_k, Some(&projection.multipliers))?.point - q_k).norm();
    if let Some((index, value)) = min_constraint(family, t_next, &projection.point) {
        if value < -TOL_FEAS {
            return Err(Error::Feasibility {
                index,
                t: t_next,
                value,
            });
        }
    }
    Ok(StepOutput {
        next: projection.point.clone(),
        projection,
        dist_pred,
    })
}

/// One prediction-correction step from `(t_k, q_k)` with step `h`.
pub fn step<F: ConstraintFamily + ?Sized, P: Perturbation + ?Sized>(
    family: &F,
    params: &RegularityParameters,
    perturbation: &P,
    t_k: f64,
    h: f64,
    q_k: &DVector<f64>,
) -> Result<(DVector<f64>, ProjectionResult)> {
    let h_max = regularity_report(params)?.h_max;
    if h > h_max * (1.0 + 1e-12) {
        return Err(Error::StepTooLarge { h, h_max });
    }
    let out = advance(family, perturbation, t_k, h, q_k, None)?;
    Ok((out.next, out.projection))
}

/// Grid count actually used for a requested `n`: the step is capped at
/// `h_max / 2`, refining the grid when needed.
pub fn effective_grid(horizon: f64, n: usize, h_max: f64) -> usize {
    let needed = (2.0 * horizon / h_max).ceil();
    if needed.is_finite() && needed > n as f64 {
        needed as usize
    } else {
        n.max(1)
    }
}

/// Integrates `problem` on a uniform grid of (at least) `n` steps.
pub fn simulate(problem: &Problem, n: usize) -> Result<Trajectory> {
    if !(problem.horizon > 0.0) {
        return Err(Error::Parameter(format!(
            "horizon must be positive, got {}",
            problem.horizon
        )));
    }
    if n == 0 {
        return Err(Error::Parameter("grid count must be positive".into()));
    }
    let report = regularity_report(&problem.params)?;
    let family = problem.family.as_ref();
    let grid = effective_grid(problem.horizon, n, report.h_max);
    let h = problem.horizon / grid as f64;

    if let Some((index, value)) = min_constraint(family, 0.0, &problem.q0) {
        if value < -TOL_FEAS {
            return Err(Error::AtStep {
                k: 0,
                source: Box::new(Error::Feasibility { index, t: 0.0, value }),
            });
        }
    }

    let time = |k: usize| k as f64 * problem.horizon / grid as f64;
    let mut times = Vec::with_capacity(grid + 1);
    let mut states = Vec::with_capacity(grid + 1);
    let mut records = Vec::with_capacity(grid + 1);
    times.push(0.0);
    states.push(problem.q0.clone());
    records.push(StepRecord {
        active: active_set(family, 0.0, &problem.q0, 0.0),
        ..StepRecord::default()
    });

    let mut warm: Option<MultiplierVector> = None;
    for k in 0..grid {
        let t_k = time(k);
        let t_next = time(k + 1);
        let q_k = &states[k];
        let out = advance(
            family,
            problem.perturbation.as_ref(),
            t_k,
            t_next - t_k,
            q_k,
            warm.as_ref(),
        )
        .map_err(|e| Error::AtStep {
            k,
            source: Box::new(e),
        })?;
        records.push(StepRecord {
            active: active_set(family, t_next, &out.next, 0.0),
            multipliers: out.projection.multipliers.clone(),
            residuals: out.projection.residuals,
            dist_pred: out.dist_pred,
            iterations: out.projection.iterations,
        });
        warm = Some(out.projection.multipliers);
        times.push(t_next);
        states.push(out.next);
    }
    Ok(Trajectory {
        n: grid,
        requested_n: n,
        h,
        times,
        states,
        records,
    })
}

/// Below this sup-error the scheme is considered to reproduce the reference.
pub const EXACT_TOL: f64 = 1e-12;

/// Levels between the finest measured grid and the reference grid.
pub const REFERENCE_GAP: usize = 4;

/// Dyadic refinement study.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    /// `n0 * 2^j` for `j < levels`.
    pub grids: Vec<usize>,
    /// `n0 * 2^(levels - 1 + REFERENCE_GAP)`.
    pub reference: usize,
    /// Sup-distance to the reference trajectory at each level's grid points.
    pub errors: Vec<f64>,
    /// Sup-distance between consecutive levels at the coarser grid points.
    pub cauchy: Vec<f64>,
    /// Mean of `log2(errors[j] / errors[j+1])`; `None` when exact.
    pub order: Option<f64>,
    /// Mean of `log2(cauchy[j] / cauchy[j+1])`.
    pub cauchy_order: Option<f64>,
    pub exact: bool,
}

fn mean_slope(values: &[f64]) -> Option<f64> {
    let slopes: Vec<f64> = values
        .windows(2)
        .filter(|w| w[0] > 0.0 && w[1] > 0.0)
        .map(|w| (w[0] / w[1]).log2())
        .collect();
    if slopes.is_empty() {
        None
    } else {
        Some(slopes.iter().sum::<f64>() / slopes.len() as f64)
    }
}

/// Estimates the convergence order on the grids `n0 * 2^j`, `j < levels`.
///
/// Errors are measured against a reference run `2^REFERENCE_GAP` times
/// finer than the finest level, at the coarse grid points. A reference
/// equal to the finest level would bias the slope upward: an exactly
/// first-order error `C h` gives `log2(2^(L-1) - 1) / (L - 2)` over `L`
/// levels instead of 1.
pub fn estimate_order(problem: &Problem, n0: usize, levels: usize) -> Result<ConvergenceStudy> {
    if levels < 3 {
        return Err(Error::Parameter(format!("need at least 3 levels, got {levels}")));
    }
    let report = regularity_report(&problem.params)?;
    if effective_grid(problem.horizon, n0, report.h_max) != n0 {
        return Err(Error::Parameter(format!(
            "coarsest grid n0 = {n0} violates the step bound h_max = {:e}",
            report.h_max
        )));
    }
    let mut all: Vec<usize> = (0..levels).map(|j| n0 << j).collect();
    all.push(n0 << (levels - 1 + REFERENCE_GAP));
    let runs: Vec<Trajectory> = all
        .par_iter()
        .map(|&n| simulate(problem, n))
        .collect::<Result<_>>()?;
    let reference = &runs[levels];
    let sup_diff = |coarse: &Trajectory, fine: &Trajectory| {
        let ratio = fine.n / coarse.n;
        coarse
            .states
            .iter()
            .enumerate()
            .map(|(k, q)| (q - &fine.states[k * ratio]).norm())
            .fold(0.0, f64::max)
    };
    let errors: Vec<f64> = runs[..levels].iter().map(|r| sup_diff(r, reference)).collect();
    let cauchy: Vec<f64> = runs[..levels].windows(2).map(|w| sup_diff(&w[0], &w[1])).collect();
    let exact = errors.iter().all(|&e| e <= EXACT_TOL);
    Ok(ConvergenceStudy {
        grids: all[..levels].to_vec(),
        reference: all[levels],
        order: if exact { None } else { mean_slope(&errors) },
        cauchy_order: if exact { None } else { mean_slope(&cauchy) },
        errors,
        cauchy,
        exact,
    })
}
