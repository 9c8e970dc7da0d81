use serde::{Deserialize, Serialize};

use crate::attacks::Strategy;
use crate::error::{Error, Result};
use crate::network::Topology;
use crate::probability::{bsc_model, kl_divergence, Hypothesis, LikelihoodModel};

/// Observation model as written in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelSpec {
    Bsc { bsc: f64 },
    Explicit { theta1: Vec<f64>, theta2: Vec<f64> },
}

impl ModelSpec {
    pub fn build(&self) -> Result<LikelihoodModel> {
        match self {
            ModelSpec::Bsc { bsc } => bsc_model(*bsc),
            ModelSpec::Explicit { theta1, theta2 } => LikelihoodModel::from_rows(theta1, theta2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentOverride {
    pub agent: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_belief: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentsSpec {
    /// Agents `0..n_malicious` are adversaries.
    #[serde(default)]
    pub n_malicious: usize,
    /// Model of every agent without an override.
    pub model: ModelSpec,
    #[serde(default = "uniform_belief")]
    pub initial_belief: [f64; 2],
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub overrides: Vec<AgentOverride>,
}

fn uniform_belief() -> [f64; 2] {
    [0.5, 0.5]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackSpec {
    #[serde(default = "default_strategy")]
    pub strategy: Strategy,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Known-divergence attack: use the adversaries' total centrality in
    /// place of each adversary's own.
    #[serde(default)]
    pub aggregate_centrality: bool,
    /// Known-divergence attack: externally supplied `[S1, S2]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub divergences: Option<[f64; 2]>,
    #[serde(default = "half")]
    pub x1_fraction: f64,
    #[serde(default = "half")]
    pub beta_fraction: f64,
    /// Seed of the random strategy.
    #[serde(default)]
    pub seed: u64,
}

fn default_strategy() -> Strategy {
    Strategy::None
}

fn default_epsilon() -> f64 {
    1e-3
}

fn half() -> f64 {
    0.5
}

impl Default for AttackSpec {
    fn default() -> Self {
        AttackSpec {
            strategy: Strategy::None,
            epsilon: default_epsilon(),
            aggregate_centrality: false,
            divergences: None,
            x1_fraction: 0.5,
            beta_fraction: 0.5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// BSC parameter shared by every agent.
    BscP,
    /// Target of a `centrality_mix` topology.
    AdversaryCentrality,
    Epsilon,
}

impl std::fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SweepParameter::BscP => "bsc_p",
            SweepParameter::AdversaryCentrality => "adversary_centrality",
            SweepParameter::Epsilon => "epsilon",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSweep")]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    /// Bracket for the root of the verdict margin; the grid range if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bracket: Option<[f64; 2]>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    parameter: SweepParameter,
    values: Option<Vec<f64>>,
    start: Option<f64>,
    stop: Option<f64>,
    step: Option<f64>,
    bracket: Option<[f64; 2]>,
}

impl TryFrom<RawSweep> for SweepSpec {
    type Error = String;
    fn try_from(r: RawSweep) -> std::result::Result<Self, String> {
        let values = match (r.values, r.start, r.stop, r.step) {
            (Some(v), None, None, None) => v,
            (None, Some(start), Some(stop), Some(step)) => grid(start, stop, step)?,
            _ => {
                return Err("sweep needs either `values` or all of `start`, `stop`, `step`".into())
            }
        };
        Ok(SweepSpec {
            parameter: r.parameter,
            values,
            bracket: r.bracket,
        })
    }
}

/// `start, start + step, ..., stop`, rounded to 12 decimals.
pub fn grid(start: f64, stop: f64, step: f64) -> std::result::Result<Vec<f64>, String> {
    if !(step > 0.0) || !(stop >= start) {
        return Err(format!("bad sweep range {start}..{stop} step {step}"));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if n > 1_000_000 {
        return Err(format!("sweep grid of {n} points is too large"));
    }
    Ok((0..n)
        .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Tabular,
    Structured,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: String,
    #[serde(default = "default_format")]
    pub format: OutputFormat,
}

fn default_dir() -> String {
    "results".into()
}

fn default_format() -> OutputFormat {
    OutputFormat::Tabular
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: default_dir(),
            format: default_format(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default = "default_theta")]
    pub theta_true: Hypothesis,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Trajectory recording stride; 0 writes summaries only.
    #[serde(default)]
    pub stride: usize,
    pub topology: Topology,
    pub agents: AgentsSpec,
    #[serde(default)]
    pub attack: AttackSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_name() -> String {
    "experiment".into()
}

fn default_theta() -> Hypothesis {
    Hypothesis::Theta1
}

fn default_horizon() -> usize {
    2000
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

impl ExperimentConfig {
    pub fn n_agents(&self) -> usize {
        self.topology.n_agents()
    }

    /// Model spec of agent `k` after overrides.
    pub fn model_spec(&self, k: usize) -> &ModelSpec {
        self.agents
            .overrides
            .iter()
            .rev()
            .find(|o| o.agent == k && o.model.is_some())
            .and_then(|o| o.model.as_ref())
            .unwrap_or(&self.agents.model)
    }

    pub fn initial_belief(&self, k: usize) -> [f64; 2] {
        self.agents
            .overrides
            .iter()
            .rev()
            .find(|o| o.agent == k && o.initial_belief.is_some())
            .and_then(|o| o.initial_belief)
            .unwrap_or(self.agents.initial_belief)
    }

    /// Every problem with the configuration; empty when valid.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let n = self.n_agents();
        let m = self.agents.n_malicious;
        if self.horizon == 0 {
            v.push("horizon must be at least 1".into());
        }
        if self.seeds.is_empty() {
            v.push("seeds must not be empty".into());
        }
        if m >= n.max(1) {
            v.push(format!(
                "agents.n_malicious = {m} leaves no normal agent among {n}"
            ));
        }
        v.extend(self.topology.check(m));
        for o in &self.agents.overrides {
            if o.agent >= n {
                v.push(format!(
                    "agents.overrides: agent {} does not exist",
                    o.agent
                ));
            }
        }
        let mut min_inv_alphabet = f64::INFINITY;
        let mut models_ok = true;
        for k in 0..n {
            match self.model_spec(k).build() {
                Ok(model) => {
                    min_inv_alphabet = min_inv_alphabet.min(1.0 / model.alphabet_size() as f64);
                    for h in Hypothesis::ALL {
                        if kl_divergence(model.given(h), model.given(h.other())).is_err() {
                            v.push(format!(
                                "agent {k}: D(L(.|{h}) || L(.|{})) is infinite",
                                h.other()
                            ));
                        }
                    }
                }
                Err(e) => {
                    models_ok = false;
                    v.push(format!("agent {k}: {e}"));
                }
            }
            let [b1, b2] = self.initial_belief(k);
            if !(b1 > 0.0 && b2 > 0.0 && (b1 + b2 - 1.0).abs() <= 1e-9) {
                v.push(format!(
                    "agent {k}: initial belief [{b1}, {b2}] must be positive and sum to 1"
                ));
            }
        }
        let a = &self.attack;
        if models_ok && !(a.epsilon > 0.0 && a.epsilon < min_inv_alphabet) {
            v.push(format!(
                "attack.epsilon = {} must lie in (0, {min_inv_alphabet}) (below 1 / alphabet size)",
                a.epsilon
            ));
        }
        for (name, f) in [
            ("x1_fraction", a.x1_fraction),
            ("beta_fraction", a.beta_fraction),
        ] {
            if !(f > 0.0 && f < 1.0) {
                v.push(format!("attack.{name} = {f} must lie in (0, 1)"));
            }
        }
        if let Some(s) = a.divergences {
            if !s.iter().all(|x| *x >= 0.0 && x.is_finite()) {
                v.push(format!(
                    "attack.divergences = {s:?} must be finite and non-negative"
                ));
            }
        }
        if let Some(sw) = &self.sweep {
            v.extend(self.sweep_violations(sw));
        }
        v
    }

    fn sweep_violations(&self, sw: &SweepSpec) -> Vec<String> {
        let mut v = Vec::new();
        if sw.values.is_empty() {
            v.push("sweep grid is empty".into());
        }
        let in_unit = |x: &f64| *x > 0.0 && *x < 1.0;
        match sw.parameter {
            SweepParameter::BscP => {
                let all_bsc = (0..self.n_agents())
                    .all(|k| matches!(self.model_spec(k), ModelSpec::Bsc { .. }));
                if !all_bsc {
                    v.push("bsc_p sweeps require BSC models for every agent".into());
                }
                if !sw.values.iter().all(in_unit) {
                    v.push("bsc_p sweep values must lie in (0, 1)".into());
                }
            }
            SweepParameter::AdversaryCentrality => {
                if !matches!(self.topology, Topology::CentralityMix { .. }) {
                    v.push("adversary_centrality sweeps require a centrality_mix topology".into());
                }
                if self.agents.n_malicious == 0 {
                    v.push("adversary_centrality sweeps require adversaries".into());
                }
                if !sw.values.iter().all(in_unit) {
                    v.push("adversary_centrality sweep values must lie in (0, 1)".into());
                }
            }
            SweepParameter::Epsilon => {
                if !sw.values.iter().all(|x| *x > 0.0 && *x < 0.5) {
                    v.push("epsilon sweep values must lie in (0, 0.5)".into());
                }
            }
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }

    /// Copy with one sweep parameter set to `value`.
    pub fn with_parameter(&self, parameter: SweepParameter, value: f64) -> ExperimentConfig {
        let mut c = self.clone();
        match parameter {
            SweepParameter::BscP => {
                c.agents.model = ModelSpec::Bsc { bsc: value };
                for o in &mut c.agents.overrides {
                    if o.model.is_some() {
                        o.model = Some(ModelSpec::Bsc { bsc: value });
                    }
                }
            }
            SweepParameter::AdversaryCentrality => {
                if let Topology::CentralityMix {
                    adversary_centrality,
                    ..
                } = &mut c.topology
                {
                    *adversary_centrality = value;
                }
            }
            SweepParameter::Epsilon => c.attack.epsilon = value,
        }
        c
    }

    /// Canonical TOML with every default written out.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidInput(e.to_string()))
    }
}

/// Parses and validates a TOML configuration.
pub fn load_config(text: &str) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| parse_error(text, &e))?;
    cfg.validate()?;
    Ok(cfg)
}

fn parse_error(text: &str, e: &toml::de::Error) -> Error {
    let message = e.message().to_string();
    let (line, field) = match e.span() {
        Some(span) => {
            let start = span.start.min(text.len());
            let line = text[..start].matches('\n').count() + 1;
            let src = text.lines().nth(line - 1).unwrap_or("").trim();
            if src.starts_with('[') {
                // tagged tables are reported as a whole; look for the offending key
                locate_in_table(text, line, &message).unwrap_or_else(|| {
                    (line, src.trim_matches(|c| c == '[' || c == ']').to_string())
                })
            } else {
                (line, key_of(src))
            }
        }
        None => (0, String::new()),
    };
    Error::Parse {
        line,
        field,
        message,
    }
}

fn key_of(src: &str) -> String {
    src.split('=').next().unwrap_or("").trim().to_string()
}

/// Finds the line of the table starting at `header` whose key or value
/// matches the literal quoted in `message`.
fn locate_in_table(text: &str, header: usize, message: &str) -> Option<(usize, String)> {
    let quoted = |open: char, close: char| -> Option<&str> {
        let a = message.find(open)? + 1;
        let b = message[a..].find(close)? + a;
        Some(&message[a..b])
    };
    let by_key = message.contains("field `");
    let needle = if by_key {
        quoted('`', '`')?
    } else {
        quoted('"', '"').or_else(|| quoted('`', '`'))?
    };
    text.lines()
        .enumerate()
        .skip(header)
        .take_while(|(_, l)| !l.trim_start().starts_with('['))
        .find(|(_, l)| {
            let (k, v) = l.split_once('=').unwrap_or((l, ""));
            if by_key {
                k.trim() == needle
            } else {
                v.contains(needle)
            }
        })
        .map(|(i, l)| (i + 1, key_of(l.trim())))
}
