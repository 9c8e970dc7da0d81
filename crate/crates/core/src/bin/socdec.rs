use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use social_deception::attacks::{
    known_divergence_attack, random_attack, unknown_divergence_attack, Selectors,
};
use social_deception::probability::{bsc_model, LikelihoodModel};
use social_deception::simulator::{
    emit_results, emit_sweep, format_forged_model, load_config, run_experiment, run_sweep,
    ExperimentConfig, OutputFormat, Scenario,
};
use social_deception::{Error, Result};

#[derive(Parser)]
#[command(
    name = "socdec",
    version,
    about = "Social learning under inferential attacks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a configuration and print it with every default filled in.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Simulate every seed and write trajectories, summaries and the report.
    Run(RunArgs),
    /// Run a parameter sweep.
    Sweep(RunArgs),
    /// Print the closed-form deception report without simulating.
    Predict {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print forged likelihoods.
    Attack(AttackArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Run this seed only.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    stride: Option<usize>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args)]
struct AttackArgs {
    /// Take models, centralities and divergences from a configuration.
    #[arg(long, conflicts_with_all = ["bsc", "model"])]
    config: Option<PathBuf>,
    /// Binary symmetric model with this parameter.
    #[arg(long, conflicts_with = "model")]
    bsc: Option<f64>,
    /// Explicit model `a,b,...;c,d,...` (theta1 row; theta2 row).
    #[arg(long)]
    model: Option<String>,
    #[arg(long, value_enum)]
    strategy: Option<StrategyArg>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Adversary centrality for the known-divergence attack.
    #[arg(long)]
    centrality: Option<f64>,
    #[arg(long)]
    s1: Option<f64>,
    #[arg(long)]
    s2: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// With --config: use the adversaries' total centrality for each one.
    #[arg(long)]
    aggregate_centrality: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Tabular,
    Structured,
    Both,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Tabular => OutputFormat::Tabular,
            Format::Structured => OutputFormat::Structured,
            Format::Both => OutputFormat::Both,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    KnownDivergences,
    UnknownDivergences,
    Random,
}

fn read_config(path: &Path) -> Result<ExperimentConfig> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    load_config(&text)
}

fn apply_overrides(cfg: &mut ExperimentConfig, a: &RunArgs) -> Result<()> {
    if let Some(s) = a.seed {
        cfg.seeds = vec![s];
    }
    if let Some(h) = a.horizon {
        cfg.horizon = h;
    }
    if let Some(s) = a.stride {
        cfg.stride = s;
    }
    if let Some(o) = &a.out {
        cfg.output.dir = o.display().to_string();
    }
    if let Some(f) = a.format {
        cfg.output.format = f.into();
    }
    cfg.validate()
}

fn parse_model(s: &str) -> Result<LikelihoodModel> {
    let rows: Vec<Vec<f64>> = s
        .split(';')
        .map(|r| {
            r.split(',')
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::InvalidInput(format!("bad number {x:?}: {e}")))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    match rows.as_slice() {
        [a, b] => LikelihoodModel::from_rows(a, b),
        _ => Err(Error::InvalidInput(
            "model needs two rows separated by ';'".into(),
        )),
    }
}

fn attack(a: &AttackArgs) -> Result<String> {
    if let Some(path) = &a.config {
        let mut cfg = read_config(path)?;
        if let Some(s) = a.strategy {
            cfg.attack.strategy = match s {
                StrategyArg::KnownDivergences => {
                    social_deception::attacks::Strategy::KnownDivergences
                }
                StrategyArg::UnknownDivergences => {
                    social_deception::attacks::Strategy::UnknownDivergences
                }
                StrategyArg::Random => social_deception::attacks::Strategy::Random,
            };
        }
        if let Some(e) = a.epsilon {
            cfg.attack.epsilon = e;
        }
        if let Some(s) = a.seed {
            cfg.attack.seed = s;
        }
        if let (Some(s1), Some(s2)) = (a.s1, a.s2) {
            cfg.attack.divergences = Some([s1, s2]);
        }
        cfg.attack.aggregate_centrality |= a.aggregate_centrality;
        let sc = Scenario::build(&cfg)?;
        let mut out = String::new();
        for f in &sc.plan.adversaries {
            out.push_str(&format!("# agent {}\n", f.agent));
            out.push_str(&format_forged_model(&f.forged));
        }
        return Ok(out);
    }
    let model = match (a.bsc, &a.model) {
        (Some(p), None) => bsc_model(p)?,
        (None, Some(m)) => parse_model(m)?,
        _ => {
            return Err(Error::InvalidInput(
                "give one of --bsc, --model or --config".into(),
            ))
        }
    };
    let eps = a.epsilon.unwrap_or(1e-3);
    let forged = match a.strategy.unwrap_or(StrategyArg::UnknownDivergences) {
        StrategyArg::UnknownDivergences => unknown_divergence_attack(&model, eps)?,
        StrategyArg::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed.unwrap_or(0));
            random_attack(&model, eps, &mut rng)?
        }
        StrategyArg::KnownDivergences => {
            let need = |v: Option<f64>, name: &str| {
                v.ok_or_else(|| Error::InvalidInput(format!("known_divergences needs --{name}")))
            };
            known_divergence_attack(
                &model,
                need(a.centrality, "centrality")?,
                need(a.s1, "s1")?,
                need(a.s2, "s2")?,
                eps,
                Selectors::default(),
            )?
            .forged
        }
    };
    Ok(format_forged_model(&forged))
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Validate { config } => {
            let cfg = read_config(&config)?;
            print!("{}", cfg.to_toml()?);
        }
        Command::Predict { config } => {
            let sc = Scenario::build(&read_config(&config)?)?;
            let doc = serde_json::json!({ "plan": sc.plan, "report": sc.report });
            println!(
                "{}",
                serde_json::to_string_pretty(&doc)
                    .map_err(|e| Error::InvalidInput(e.to_string()))?
            );
        }
        Command::Run(a) => {
            let mut cfg = read_config(&a.config)?;
            apply_overrides(&mut cfg, &a)?;
            let result = run_experiment(&cfg, a.jobs)?;
            let truth = cfg.theta_true;
            println!(
                "predicted {} (margin {:.6e})",
                result.report.verdict_for(truth),
                result.report.margin_for(truth)
            );
            for r in &result.runs {
                println!(
                    "seed {}: final mean belief in {} = {:.6}, agrees = {}",
                    r.seed, truth, r.final_mean_belief_true, r.agrees
                );
            }
            for p in emit_results(&result, cfg.output.format, Path::new(&cfg.output.dir))? {
                println!("wrote {}", p.display());
            }
        }
        Command::Sweep(a) => {
            let mut cfg = read_config(&a.config)?;
            apply_overrides(&mut cfg, &a)?;
            let result = run_sweep(&cfg, a.jobs)?;
            for p in &result.points {
                println!(
                    "{} = {}: mean final belief {:.6}, margin {:.6e}",
                    result.parameter, p.value, p.mean_final_belief_true, p.margin
                );
            }
            match (result.critical, &result.critical_note) {
                (Some(c), _) => println!("critical {}: {c}", result.parameter),
                (None, Some(n)) => println!("critical {}: none ({n})", result.parameter),
                (None, None) => {}
            }
            if let Some(c) = result.empirical_crossing {
                println!("empirical crossing: {c}");
            }
            for p in emit_sweep(&result, cfg.output.format, Path::new(&cfg.output.dir))? {
                println!("wrote {}", p.display());
            }
        }
        Command::Attack(a) => print!("{}", attack(&a)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Validation(v)) => {
            eprintln!("invalid configuration:");
            for x in v {
                eprintln!("  - {x}");
            }
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
