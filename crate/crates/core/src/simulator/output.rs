use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::OutputFormat;
use super::experiment::{ExperimentResult, SweepResult};
use crate::error::{Error, Result};
use crate::learning::BeliefState;
use crate::probability::{Hypothesis, LikelihoodModel};

/// Shortest round-trip decimal, in exponent form for very small or large
/// magnitudes.
fn num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

pub const TRAJECTORY_HEADER: &str = "step,agent_id,role,belief_theta1,log_ratio,seed";

/// One row per recorded (seed, step, agent), in that order. `log_ratio` is
/// `ln(mu(wrong) / mu(truth))`.
pub fn trajectory_csv(result: &ExperimentResult) -> String {
    let truth = result.config.theta_true;
    let roles: Vec<String> = (0..result.config.n_agents())
        .map(|k| {
            if k < result.config.agents.n_malicious {
                "malicious".to_string()
            } else {
                "normal".to_string()
            }
        })
        .collect();
    let mut s = String::from(TRAJECTORY_HEADER);
    s.push('\n');
    for t in &result.trajectories {
        for p in &t.points {
            let state = BeliefState::from_log_odds(p.log_odds.clone());
            for (k, role) in roles.iter().enumerate() {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{}",
                    p.step,
                    k,
                    role,
                    num(state.belief(k)[0]),
                    num(state.log_ratio(k, truth)),
                    t.seed
                );
            }
        }
    }
    s
}

pub fn summary_csv(result: &ExperimentResult) -> String {
    let mut s = String::from(
        "seed,final_mean_belief_true,empirical_rate,predicted_rate,predicted,empirical,agrees\n",
    );
    for r in &result.runs {
        let empirical = match r.empirical {
            super::EmpiricalOutcome::Misled => "misled",
            super::EmpiricalOutcome::LearnsTruth => "learns_truth",
        };
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.seed,
            num(r.final_mean_belief_true),
            num(r.empirical_rate),
            num(r.predicted_rate),
            r.predicted,
            empirical,
            r.agrees
        );
    }
    s
}

/// One row per (grid point, seed).
pub fn sweep_csv(result: &SweepResult) -> String {
    let mut s = format!(
        "{},seed,final_mean_belief_true,margin,verdict\n",
        result.parameter
    );
    for p in &result.points {
        for f in &p.finals {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                p.value,
                f.seed,
                num(f.final_mean_belief_true),
                num(p.margin),
                p.verdict
            );
        }
    }
    s
}

/// Forged likelihoods as `state,z1,...` rows with 17 significant digits.
pub fn format_forged_model(model: &LikelihoodModel) -> String {
    let n = model.alphabet_size();
    let mut s = String::from("state");
    for z in 1..=n {
        let _ = write!(s, ",z{z}");
    }
    s.push('\n');
    for h in Hypothesis::ALL {
        s.push_str(&h.to_string());
        for z in 0..n {
            let _ = write!(s, ",{:.16e}", model.likelihood(z, h));
        }
        s.push('\n');
    }
    s
}

fn write(dir: &Path, name: &str, body: &str, out: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, body).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    out.push(path);
    Ok(())
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::InvalidInput(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn prepare(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))
}

/// Writes `trajectory.csv` (when anything was recorded) and `summary.csv`
/// for tabular output, `result.json` for structured output.
pub fn emit_results(
    result: &ExperimentResult,
    format: OutputFormat,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    prepare(dir)?;
    let mut out = Vec::new();
    if format != OutputFormat::Structured {
        if result.trajectories.iter().any(|t| !t.points.is_empty()) {
            write(dir, "trajectory.csv", &trajectory_csv(result), &mut out)?;
        }
        write(dir, "summary.csv", &summary_csv(result), &mut out)?;
    }
    if format != OutputFormat::Tabular {
        write(dir, "result.json", &json(result)?, &mut out)?;
    }
    Ok(out)
}

pub fn emit_sweep(result: &SweepResult, format: OutputFormat, dir: &Path) -> Result<Vec<PathBuf>> {
    prepare(dir)?;
    let mut out = Vec::new();
    if format != OutputFormat::Structured {
        write(dir, "sweep.csv", &sweep_csv(result), &mut out)?;
    }
    if format != OutputFormat::Tabular {
        write(dir, "sweep.json", &json(result)?, &mut out)?;
    }
    Ok(out)
}
