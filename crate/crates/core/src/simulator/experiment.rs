use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, SweepParameter};
use super::scenario::Scenario;
use crate::analysis::{critical_parameter, DeceptionReport, Verdict};
use crate::attacks::AttackPlan;
use crate::error::{Error, Result};
use crate::learning::{run, RunOptions, Trajectory};

/// Majority side of the final network-average belief.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmpiricalOutcome {
    Misled,
    LearnsTruth,
}

impl EmpiricalOutcome {
    pub fn from_belief(mean_belief_true: f64) -> Self {
        if mean_belief_true < 0.5 {
            EmpiricalOutcome::Misled
        } else {
            EmpiricalOutcome::LearnsTruth
        }
    }

    pub fn matches(self, v: Verdict) -> bool {
        matches!(
            (self, v),
            (EmpiricalOutcome::Misled, Verdict::Misled)
                | (EmpiricalOutcome::LearnsTruth, Verdict::LearnsTruth)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    pub final_mean_belief_true: f64,
    /// `ln(mu_k(wrong) / mu_k(truth))` per agent at the horizon.
    pub final_log_ratios: Vec<f64>,
    /// Network average of the final log ratios divided by the horizon.
    pub empirical_rate: f64,
    pub predicted_rate: f64,
    pub predicted: Verdict,
    pub empirical: EmpiricalOutcome,
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub plan: AttackPlan,
    pub report: DeceptionReport,
    pub runs: Vec<RunSummary>,
    #[serde(skip)]
    pub trajectories: Vec<Trajectory>,
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))
}

fn simulate(sc: &Scenario, seed: u64, stride: usize) -> Result<Trajectory> {
    run(
        &sc.network,
        &sc.agents,
        sc.config.theta_true,
        RunOptions {
            horizon: sc.config.horizon,
            seed,
            stride,
        },
    )
}

fn summarize(sc: &Scenario, t: &Trajectory) -> RunSummary {
    let truth = sc.config.theta_true;
    let ratios = t.final_log_ratios();
    let empirical_rate = t.empirical_rates().iter().sum::<f64>() / ratios.len() as f64;
    let predicted = sc.report.verdict_for(truth);
    let final_mean = t.final_mean_belief_true();
    let empirical = EmpiricalOutcome::from_belief(final_mean);
    RunSummary {
        seed: t.seed,
        final_mean_belief_true: final_mean,
        final_log_ratios: ratios,
        empirical_rate,
        predicted_rate: crate::analysis::asymptotic_rate(&sc.perron, &sc.agents, truth),
        predicted,
        empirical,
        agrees: empirical.matches(predicted),
    }
}

/// Runs every seed of `cfg`. `jobs == 0` uses all cores.
pub fn run_experiment(cfg: &ExperimentConfig, jobs: usize) -> Result<ExperimentResult> {
    let sc = Scenario::build(cfg)?;
    let trajectories: Vec<Trajectory> = pool(jobs)?.install(|| {
        cfg.seeds
            .par_iter()
            .map(|&seed| simulate(&sc, seed, cfg.stride))
            .collect::<Result<_>>()
    })?;
    let runs = trajectories.iter().map(|t| summarize(&sc, t)).collect();
    Ok(ExperimentResult {
        config: sc.config.clone(),
        plan: sc.plan.clone(),
        report: sc.report.clone(),
        runs,
        trajectories,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedFinal {
    pub seed: u64,
    pub final_mean_belief_true: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    /// Verdict margin for the configured true state.
    pub margin: f64,
    pub verdict: Verdict,
    pub mean_final_belief_true: f64,
    pub finals: Vec<SeedFinal>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: ExperimentConfig,
    pub parameter: SweepParameter,
    pub points: Vec<SweepPoint>,
    /// Root of the verdict margin inside the bracket.
    pub critical: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub critical_note: Option<String>,
    /// First crossing of the mean final belief through 0.5, interpolated
    /// linearly between grid points.
    pub empirical_crossing: Option<f64>,
}

/// Runs all seeds at every grid point of `cfg.sweep`.
pub fn run_sweep(cfg: &ExperimentConfig, jobs: usize) -> Result<SweepResult> {
    cfg.validate()?;
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("config has no [sweep] table".into()))?;
    if sweep.values.is_empty() {
        return Err(Error::InvalidInput("sweep grid is empty".into()));
    }
    let param = sweep.parameter;
    let pool = pool(jobs)?;
    let scenarios: Vec<Scenario> = pool.install(|| {
        sweep
            .values
            .par_iter()
            .map(|&v| Scenario::build(&cfg.with_parameter(param, v)))
            .collect::<Result<_>>()
    })?;
    let jobs_list: Vec<(usize, u64)> = (0..scenarios.len())
        .flat_map(|i| cfg.seeds.iter().map(move |&s| (i, s)))
        .collect();
    let finals: Vec<f64> = pool.install(|| {
        jobs_list
            .par_iter()
            .map(|&(i, seed)| simulate(&scenarios[i], seed, 0).map(|t| t.final_mean_belief_true()))
            .collect::<Result<_>>()
    })?;
    let per = cfg.seeds.len();
    let points: Vec<SweepPoint> = scenarios
        .iter()
        .enumerate()
        .map(|(i, sc)| {
            let f: Vec<SeedFinal> = cfg
                .seeds
                .iter()
                .zip(&finals[i * per..(i + 1) * per])
                .map(|(&seed, &b)| SeedFinal {
                    seed,
                    final_mean_belief_true: b,
                })
                .collect();
            let mean = f.iter().map(|s| s.final_mean_belief_true).sum::<f64>() / per as f64;
            SweepPoint {
                value: sweep.values[i],
                margin: sc.margin(),
                verdict: sc.report.verdict_for(cfg.theta_true),
                mean_final_belief_true: mean,
                finals: f,
            }
        })
        .collect();

    let [lo, hi] = sweep.bracket.unwrap_or_else(|| {
        let lo = sweep.values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = sweep
            .values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        [lo, hi]
    });
    let (critical, critical_note) = match critical_parameter(
        |v| Scenario::build(&cfg.with_parameter(param, v)).map(|s| s.margin()),
        lo,
        hi,
    ) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let empirical_crossing = crossing(
        &points
            .iter()
            .map(|p| (p.value, p.mean_final_belief_true))
            .collect::<Vec<_>>(),
        0.5,
    );
    Ok(SweepResult {
        config: cfg.clone(),
        parameter: param,
        points,
        critical,
        critical_note,
        empirical_crossing,
    })
}

fn crossing(curve: &[(f64, f64)], level: f64) -> Option<f64> {
    curve.windows(2).find_map(|w| {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        let (a, b) = (y0 - level, y1 - level);
        if a == 0.0 {
            Some(x0)
        } else if a * b < 0.0 || b == 0.0 {
            Some(x0 + (x1 - x0) * a / (a - b))
        } else {
            None
        }
    })
}
