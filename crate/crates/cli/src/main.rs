use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sweep_core::constraint::sample_bounds;
use sweep_core::scenario::trajectory_csv;
use sweep_core::{
    audit_trajectory, crowd_constants, estimate_order, linearize, load_scenario,
    project_polyhedron, regularity_report, simulate, Error, Scenario,
};

/// Simulate and analyze perturbed sweeping processes.
///
/// A scenario is a JSON file path or `builtin:<name>` with name one of
/// sticking-1d, moving-half-line, disk-slide, labyrinth, crowd.
#[derive(Parser)]
#[command(name = "sweep", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a scenario and write the trajectory CSV.
    Simulate {
        scenario: String,
        /// Grid count (refined when the step would exceed h_max / 2).
        #[arg(long)]
        n: Option<usize>,
        /// Output CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Project a point onto the linearized feasible set.
    Project {
        scenario: String,
        #[arg(long)]
        at: f64,
        /// Comma-separated point to project.
        #[arg(long)]
        point: String,
        /// Comma-separated linearization point; defaults to the initial state.
        #[arg(long)]
        base: Option<String>,
    },
    /// Print derived constants and sampled checks of the regularity parameters.
    Analyze {
        scenario: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random points sampled around the trajectory.
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Dyadic refinement study.
    Converge {
        scenario: String,
        #[arg(long, default_value_t = 100)]
        n0: usize,
        #[arg(long, default_value_t = 5)]
        levels: usize,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e.root() {
        Error::Parse(_) | Error::Validation { .. } | Error::Parameter(_) | Error::Io(_) => 2,
        Error::Feasibility { .. } => 4,
        _ => 3,
    }
}

fn parse_vector(text: &str, d: usize) -> Result<DVector<f64>, Error> {
    let v: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| Error::Parse(format!("bad vector {text:?}: {e}")))?;
    if v.len() != d {
        return Err(Error::Parse(format!(
            "vector {text:?} has {} entries, expected {d}",
            v.len()
        )));
    }
    Ok(DVector::from_vec(v))
}

fn fmt_vec(v: &DVector<f64>) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")
}

fn run(cli: Cli) -> Result<(), Error> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Simulate { scenario, n, out: path } => {
            let s = load_scenario(&scenario)?;
            let n = n.unwrap_or(s.spec.output.n);
            let traj = simulate(&s.problem(), n)?;
            let csv = trajectory_csv(&traj);
            let path = path.or_else(|| s.spec.output.csv.as_ref().map(PathBuf::from));
            match path {
                Some(p) => std::fs::write(p, csv)?,
                None => out.write_all(csv.as_bytes())?,
            }
            eprintln!(
                "{}: {} steps (requested {}), h = {:e}, min g = {:e}",
                s.name(),
                traj.n,
                traj.requested_n,
                traj.h,
                traj.min_constraint(s.family().as_ref())
            );
            if let Some(target) = &s.spec.target {
                eprintln!("final state inside target: {}", target.contains(traj.last()));
            }
        }
        Command::Project {
            scenario,
            at,
            point,
            base,
        } => {
            let s = load_scenario(&scenario)?;
            let d = s.dim();
            let target = parse_vector(&point, d)?;
            let base = match base {
                Some(b) => parse_vector(&b, d)?,
                None => s.q0(),
            };
            let family = s.family();
            let poly = linearize(family.as_ref(), at, &base)?;
            let r = project_polyhedron(&poly, &target, None)?;
            writeln!(out, "point {}", fmt_vec(&r.point))?;
            writeln!(out, "multipliers {}", fmt_vec(&DVector::from_vec(r.multipliers.0.clone())))?;
            writeln!(
                out,
                "residuals stationarity={:e} primal={:e} complementarity={:e}",
                r.residuals.stationarity, r.residuals.primal, r.residuals.complementarity
            )?;
            writeln!(out, "iterations {}", r.iterations)?;
        }
        Command::Analyze {
            scenario,
            seed,
            samples,
        } => analyze(&mut out, &load_scenario(&scenario)?, seed, samples)?,
        Command::Converge { scenario, n0, levels } => {
            let s = load_scenario(&scenario)?;
            let study = estimate_order(&s.problem(), n0, levels)?;
            writeln!(out, "reference grid {}", study.reference)?;
            writeln!(out, "n,error,cauchy")?;
            for (j, (&n, e)) in study.grids.iter().zip(&study.errors).enumerate() {
                let c = study.cauchy.get(j).map_or(String::from(""), |c| format!("{c:e}"));
                writeln!(out, "{n},{e:e},{c}")?;
            }
            match (study.exact, study.order) {
                (true, _) => writeln!(out, "order exact")?,
                (false, Some(o)) => writeln!(
                    out,
                    "order {o:.4} (cauchy {:.4})",
                    study.cauchy_order.unwrap_or(f64::NAN)
                )?,
                (false, None) => writeln!(out, "order undetermined")?,
            }
        }
    }
    Ok(())
}

fn analyze(out: &mut impl Write, s: &Scenario, seed: u64, samples: usize) -> Result<(), Error> {
    let p = s.params;
    let r = regularity_report(&p)?;
    writeln!(out, "scenario {}", s.name())?;
    writeln!(
        out,
        "parameters alpha={} beta={} M={} c={} rho={} gamma={} p={}",
        p.alpha, p.beta, p.big_m, p.margin_c, p.rho, p.gamma, p.p
    )?;
    writeln!(out, "delta {:e}", r.delta)?;
    writeln!(out, "eta0 {:e}", r.eta0)?;
    writeln!(out, "eta {:e}", r.eta)?;
    writeln!(out, "K_L {:e}", r.k_lipschitz)?;
    writeln!(out, "D {:e}", r.dist_constant)?;
    writeln!(out, "h_max {:e}", r.h_max)?;
    if let Some(config) = s.crowd() {
        match crowd_constants(config.len(), config.radius) {
            Ok(k) => writeln!(
                out,
                "crowd N={} gamma(N) {:e} eta(N) {:e} a {:e}",
                config.len(),
                k.gamma,
                k.eta,
                k.a
            )?,
            Err(e) => writeln!(out, "crowd constants unavailable: {e}")?,
        }
    }

    let problem = s.problem();
    let traj = simulate(&problem, s.spec.output.n)?;
    let audit = audit_trajectory(&problem, &traj)?;
    writeln!(out, "trajectory steps {} min g {:e}", traj.n, audit.min_constraint)?;
    writeln!(
        out,
        "observed gamma {:e} ({})",
        audit.gamma_max,
        if audit.gamma_ok(p.gamma) { "ok" } else { "EXCEEDS gamma" }
    )?;
    writeln!(
        out,
        "advance margin {:e} vs delta {:e} ({})",
        audit.margin_min,
        audit.delta,
        if audit.margin_ok() { "ok" } else { "BELOW delta" }
    )?;
    writeln!(out, "distance ratio {:e}", audit.dist_ratio_max)?;

    let family = s.family();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spread = p.rho;
    let pts: Vec<(f64, DVector<f64>)> = (0..samples)
        .map(|_| {
            let k = rng.random_range(0..traj.states.len());
            let q = traj.states[k].map(|x| x + spread * rng.random_range(-1.0..1.0));
            (traj.times[k], q)
        })
        .collect();
    let bounds = sample_bounds(family.as_ref(), pts);
    writeln!(
        out,
        "sampled |grad g| in [{:e}, {:e}], |dt g| <= {:e}, |D2 g| <= {:e}, |dt grad g| <= {:e} over {} evaluations",
        bounds.grad_min, bounds.grad_max, bounds.dt_max, bounds.hessian_max, bounds.mixed_max, bounds.samples
    )?;
    match bounds.check(&p, 1e-6) {
        Ok(()) => writeln!(out, "sampled bounds consistent with parameters")?,
        Err(e) => writeln!(out, "sampled bounds: {e}")?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_root_cause() {
        let infeasible = Error::AtStep {
            k: 3,
            source: Box::new(Error::Feasibility { index: 0, t: 0.1, value: -1.0 }),
        };
        assert_eq!(exit_code(&infeasible), 4);
        assert_eq!(exit_code(&Error::Parse("x".into())), 2);
        assert_eq!(exit_code(&Error::InfeasiblePolyhedron), 3);
    }
}
