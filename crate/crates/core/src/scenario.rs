//! Scenario files, the builtin catalog and trajectory CSV output.
//!
//! A scenario is a JSON document. When `kind` names a builtin scenario,
//! top-level keys missing from the document are taken from the builtin,
//! so a file may override only what it changes.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::constraint::{
    AffineConstraint, ConstraintFamily, ConstraintSet, DiskExclusion, RegularityParameters,
    TOL_FEAS,
};
use crate::crowd::{CrowdConfiguration, CrowdFamily};
use crate::error::{Error, Result};
use crate::integrator::{
    ConstantField, Perturbation, PiecewiseConstantField, Problem, TargetSeeking, Trajectory,
};

const BUILTINS: &[(&str, &str)] = &[
    ("sticking-1d", include_str!("../scenarios/sticking-1d.json")),
    ("moving-half-line", include_str!("../scenarios/moving-half-line.json")),
    ("disk-slide", include_str!("../scenarios/disk-slide.json")),
    ("labyrinth", include_str!("../scenarios/labyrinth.json")),
    ("crowd", include_str!("../scenarios/crowd.json")),
];

pub fn builtin_names() -> Vec<&'static str> {
    BUILTINS.iter().map(|(n, _)| *n).collect()
}

fn builtin_text(name: &str) -> Option<&'static str> {
    BUILTINS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConstraintSpec {
    /// `<normal, q> + offset + rate t >= 0`
    Affine {
        name: String,
        normal: Vec<f64>,
        offset: f64,
        #[serde(default)]
        rate: f64,
    },
    /// `|q - center - velocity t| - radius >= 0`
    DiskExclusion {
        name: String,
        center: Vec<f64>,
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        velocity: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrowdSpec {
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PerturbationSpec {
    Constant {
        value: Vec<f64>,
    },
    PiecewiseConstant {
        breaks: Vec<f64>,
        values: Vec<Vec<f64>>,
    },
    TargetSeeking {
        targets: Vec<[f64; 2]>,
        speed: f64,
        saturation: f64,
    },
}

/// Regularity constants as written in a file; `rho` defaults to
/// `margin_c / 2` and `p` to the number of constraints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularitySpec {
    pub alpha: f64,
    pub beta: f64,
    pub big_m: f64,
    pub margin_c: f64,
    #[serde(default)]
    pub rho: Option<f64>,
    pub gamma: f64,
    #[serde(default)]
    pub p: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetRegion {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl TargetRegion {
    pub fn contains(&self, q: &DVector<f64>) -> bool {
        q.len() == self.center.len()
            && q.iter()
                .zip(&self.center)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
                <= self.radius
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_grid")]
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
}

fn default_grid() -> usize {
    200
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            n: default_grid(),
            csv: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub horizon: f64,
    pub q0: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constraints: Vec<ConstraintSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crowd: Option<CrowdSpec>,
    pub perturbation: PerturbationSpec,
    pub regularity: RegularitySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetRegion>,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub seed: u64,
}

/// A validated scenario with its constraint family and field built.
#[derive(Clone)]
pub struct Scenario {
    /// The document with defaults resolved.
    pub spec: ScenarioSpec,
    pub params: RegularityParameters,
    family: Arc<dyn ConstraintFamily>,
    perturbation: Arc<dyn Perturbation>,
}

impl std::fmt::Debug for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Scenario")
            .field("spec", &self.spec)
            .field("params", &self.params)
            .finish_non_exhaustive()
    }
}

impl PartialEq for Scenario {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl Scenario {
    pub fn from_spec(mut spec: ScenarioSpec) -> Result<Self> {
        let d = spec.q0.len();
        if d == 0 {
            return Err(Error::Parse("q0 is empty".into()));
        }
        if !(spec.horizon.is_finite() && spec.horizon > 0.0) {
            return Err(Error::Parse(format!("horizon must be positive, got {}", spec.horizon)));
        }
        if spec.q0.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parse("q0 has non-finite entries".into()));
        }
        let family: Arc<dyn ConstraintFamily> = match &spec.crowd {
            Some(crowd) => {
                if !spec.constraints.is_empty() {
                    return Err(Error::Parse(
                        "a crowd scenario cannot also list constraints".into(),
                    ));
                }
                if d % 2 != 0 {
                    return Err(Error::Parse(format!("crowd q0 has odd length {d}")));
                }
                if !(crowd.radius > 0.0) {
                    return Err(Error::Parse(format!(
                        "crowd radius must be positive, got {}",
                        crowd.radius
                    )));
                }
                Arc::new(CrowdFamily::new(d / 2, crowd.radius))
            }
            None => Arc::new(build_constraints(d, &spec.constraints)?),
        };
        let perturbation = build_perturbation(d, &spec.perturbation)?;

        let r = spec.regularity;
        let params = RegularityParameters {
            alpha: r.alpha,
            beta: r.beta,
            big_m: r.big_m,
            margin_c: r.margin_c,
            rho: r.rho.unwrap_or(r.margin_c / 2.0),
            gamma: r.gamma,
            p: r.p.unwrap_or(family.len().max(1)),
        };
        params.validate()?;
        spec.regularity.rho = Some(params.rho);
        spec.regularity.p = Some(params.p);
        if let Some(target) = &spec.target {
            if target.center.len() != d {
                return Err(Error::Parse(format!(
                    "target centre has dimension {}, expected {d}",
                    target.center.len()
                )));
            }
        }

        let q0 = DVector::from_vec(spec.q0.clone());
        for i in 0..family.len() {
            let value = family.value(i, 0.0, &q0);
            if value < -TOL_FEAS || !family.in_domain(i, 0.0, &q0) {
                return Err(Error::Validation {
                    index: i,
                    name: family.name(i),
                    value,
                });
            }
        }
        Ok(Self {
            spec,
            params,
            family,
            perturbation,
        })
    }

    pub fn name(&self) -> &str {
        &self.spec.kind
    }

    pub fn dim(&self) -> usize {
        self.spec.q0.len()
    }

    pub fn family(&self) -> Arc<dyn ConstraintFamily> {
        Arc::clone(&self.family)
    }

    pub fn perturbation(&self) -> Arc<dyn Perturbation> {
        Arc::clone(&self.perturbation)
    }

    pub fn q0(&self) -> DVector<f64> {
        DVector::from_vec(self.spec.q0.clone())
    }

    pub fn problem(&self) -> Problem {
        Problem {
            family: self.family(),
            perturbation: self.perturbation(),
            params: self.params,
            q0: self.q0(),
            horizon: self.spec.horizon,
        }
    }

    /// Initial crowd configuration, for crowd scenarios.
    pub fn crowd(&self) -> Option<CrowdConfiguration> {
        self.spec
            .crowd
            .as_ref()
            .map(|c| CrowdConfiguration::new(c.radius, &positions(&self.spec.q0)))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.spec).expect("scenario serializes") + "\n"
    }
}

fn positions(q: &[f64]) -> Vec<[f64; 2]> {
    q.chunks_exact(2).map(|c| [c[0], c[1]]).collect()
}

fn check_len(what: &str, v: &[f64], d: usize) -> Result<()> {
    if v.len() != d {
        return Err(Error::Parse(format!(
            "{what} has dimension {}, expected {d}",
            v.len()
        )));
    }
    Ok(())
}

fn build_constraints(d: usize, specs: &[ConstraintSpec]) -> Result<ConstraintSet> {
    let mut set = ConstraintSet::new(d);
    for spec in specs {
        match spec {
            ConstraintSpec::Affine {
                name,
                normal,
                offset,
                rate,
            } => {
                check_len(&format!("normal of {name}"), normal, d)?;
                if normal.iter().all(|&v| v == 0.0) {
                    return Err(Error::Parse(format!("normal of {name} is zero")));
                }
                set.push(
                    AffineConstraint::new(name.clone(), DVector::from_vec(normal.clone()), *offset)
                        .with_rate(*rate),
                )?;
            }
            ConstraintSpec::DiskExclusion {
                name,
                center,
                radius,
                velocity,
            } => {
                check_len(&format!("centre of {name}"), center, d)?;
                if !(*radius > 0.0) {
                    return Err(Error::Parse(format!("radius of {name} must be positive")));
                }
                let mut c = DiskExclusion::new(name.clone(), DVector::from_vec(center.clone()), *radius);
                if let Some(v) = velocity {
                    check_len(&format!("velocity of {name}"), v, d)?;
                    c = c.with_velocity(DVector::from_vec(v.clone()));
                }
                set.push(c)?;
            }
        }
    }
    Ok(set)
}

fn build_perturbation(d: usize, spec: &PerturbationSpec) -> Result<Arc<dyn Perturbation>> {
    Ok(match spec {
        PerturbationSpec::Constant { value } => {
            check_len("constant field", value, d)?;
            Arc::new(ConstantField {
                value: DVector::from_vec(value.clone()),
            })
        }
        PerturbationSpec::PiecewiseConstant { breaks, values } => {
            for v in values {
                check_len("piecewise field value", v, d)?;
            }
            let values = values.iter().map(|v| DVector::from_vec(v.clone())).collect();
            Arc::new(
                PiecewiseConstantField::new(breaks.clone(), values)
                    .map_err(|e| Error::Parse(e.to_string()))?,
            )
        }
        PerturbationSpec::TargetSeeking {
            targets,
            speed,
            saturation,
        } => {
            if 2 * targets.len() != d {
                return Err(Error::Parse(format!(
                    "{} targets for a configuration of dimension {d}",
                    targets.len()
                )));
            }
            if !(*speed >= 0.0 && *saturation > 0.0) {
                return Err(Error::Parse(
                    "target seeking needs speed >= 0 and saturation > 0".into(),
                ));
            }
            Arc::new(TargetSeeking {
                targets: targets.clone(),
                speed: *speed,
                saturation: *saturation,
            })
        }
    })
}

/// Parses a scenario document, filling missing top-level keys from the
/// builtin named by `kind`, if any.
pub fn parse_scenario_str(text: &str) -> Result<Scenario> {
    let mut value: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| Error::Parse("scenario must be a JSON object".into()))?;
    let kind = obj
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Parse("missing string field \"kind\"".into()))?
        .to_string();
    if let Some(base) = builtin_text(&kind) {
        let base: Value = serde_json::from_str(base).expect("builtin scenarios are valid JSON");
        if let Value::Object(base) = base {
            for (k, v) in base {
                obj.entry(k).or_insert(v);
            }
        }
    }
    let spec: ScenarioSpec = serde_json::from_value(value).map_err(|e| Error::Parse(e.to_string()))?;
    Scenario::from_spec(spec)
}

pub fn parse_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    parse_scenario_str(&text)
}

pub fn builtin(name: &str) -> Result<Scenario> {
    let text = builtin_text(name).ok_or_else(|| {
        Error::Parse(format!(
            "unknown builtin scenario {name:?}; available: {}",
            builtin_names().join(", ")
        ))
    })?;
    parse_scenario_str(text)
}

/// Accepts `builtin:<name>` or a file path.
pub fn load_scenario(arg: &str) -> Result<Scenario> {
    match arg.strip_prefix("builtin:") {
        Some(name) => builtin(name),
        None => parse_scenario(arg),
    }
}

pub fn write_scenario(scenario: &Scenario, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, scenario.to_json())?;
    Ok(())
}

pub const CSV_TAIL: [&str; 6] = [
    "n_active",
    "lambda_sum",
    "kkt_stationarity",
    "kkt_primal",
    "kkt_complementarity",
    "dist_pred",
];

/// One row per grid point. Floats use the shortest representation that
/// reads back to the same value.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let d = traj.dim();
    let mut out = String::from("t");
    for j in 1..=d {
        let _ = write!(out, ",q_{j}");
    }
    for col in CSV_TAIL {
        out.push(',');
        out.push_str(col);
    }
    out.push('\n');
    for ((t, q), rec) in traj.times.iter().zip(&traj.states).zip(&traj.records) {
        let _ = write!(out, "{t:?}");
        for v in q.iter() {
            let _ = write!(out, ",{v:?}");
        }
        let r = &rec.residuals;
        let _ = writeln!(
            out,
            ",{},{:?},{:?},{:?},{:?},{:?}",
            rec.active.len(),
            rec.multipliers.sum(),
            r.stationarity,
            r.primal,
            r.complementarity,
            rec.dist_pred
        );
    }
    out
}

pub fn write_trajectory(traj: &Trajectory, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, trajectory_csv(traj))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::simulate;

    #[test]
    fn every_builtin_parses() {
        for name in builtin_names() {
            let s = builtin(name).unwrap();
            assert_eq!(s.name(), name);
        }
    }

    #[test]
    fn sticking_fixture() {
        let s = builtin("sticking-1d").unwrap();
        assert_eq!(s.dim(), 1);
        assert_eq!(s.spec.q0, vec![0.5]);
        assert_eq!(s.spec.horizon, 1.0);
        assert_eq!(s.params.rho, 0.5);
        assert_eq!(s.params.p, 1);
    }

    #[test]
    fn override_merges_with_builtin() {
        let s = parse_scenario_str(r#"{"kind": "disk-slide", "horizon": 2.0}"#).unwrap();
        assert_eq!(s.spec.horizon, 2.0);
        assert_eq!(s.spec.q0, vec![-2.0, 0.3]);
    }

    #[test]
    fn overlapping_start_names_the_hole() {
        let err = parse_scenario_str(r#"{"kind": "labyrinth", "q0": [4.0, 1.5]}"#).unwrap_err();
        match err {
            Error::Validation { name, value, .. } => {
                assert_eq!(name, "hole:B");
                assert!(value < 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_is_parse_error() {
        assert!(matches!(parse_scenario_str("{"), Err(Error::Parse(_))));
        assert!(matches!(
            parse_scenario_str(r#"{"kind": "sticking-1d", "bogus": 1}"#),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn sticking_csv_row() {
        let s = builtin("sticking-1d").unwrap();
        let traj = simulate(&s.problem(), 10).unwrap();
        let csv = trajectory_csv(&traj);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 12);
        assert!(lines[0].starts_with("t,q_1,n_active"));
        let row: Vec<&str> = lines[6].split(',').collect();
        assert_eq!(row[0].parse::<f64>().unwrap(), 0.5);
        assert!(row[1].parse::<f64>().unwrap().abs() < 1e-12);
        assert_eq!(row[2], "1");
    }
}
