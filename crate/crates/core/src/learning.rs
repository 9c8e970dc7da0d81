//! Log-linear social learning: Bayesian adapt, geometric combine.
//!
//! The state is kept as per-agent log-odds `ln(mu(theta1) / mu(theta2))`;
//! belief pairs are computed from it on demand. The log recursion is exact
//! and does not underflow, whereas belief pairs become unrepresentable once
//! the log-odds leave the double range (around 745 nats).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Network, Role};
use crate::probability::{Hypothesis, LikelihoodModel};

pub type BeliefPair = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub role: Role,
    pub true_model: LikelihoodModel,
    /// Present iff the agent is malicious.
    pub forged_model: Option<LikelihoodModel>,
    pub initial_belief: BeliefPair,
    /// RNG stream of this agent's observations.
    pub stream: u64,
}

impl AgentConfig {
    pub fn normal(true_model: LikelihoodModel, stream: u64) -> Self {
        AgentConfig {
            role: Role::Normal,
            true_model,
            forged_model: None,
            initial_belief: [0.5, 0.5],
            stream,
        }
    }

    pub fn malicious(
        true_model: LikelihoodModel,
        forged_model: LikelihoodModel,
        stream: u64,
    ) -> Self {
        AgentConfig {
            role: Role::Malicious,
            true_model,
            forged_model: Some(forged_model),
            initial_belief: [0.5, 0.5],
            stream,
        }
    }

    /// The model used in the adapt step.
    pub fn working_model(&self) -> &LikelihoodModel {
        match (self.role, &self.forged_model) {
            (Role::Malicious, Some(f)) => f,
            _ => &self.true_model,
        }
    }
}

/// Checks agents against the network and each other.
pub fn check_agents(net: &Network, agents: &[AgentConfig]) -> Result<()> {
    if agents.len() != net.n_agents() {
        return Err(Error::InvalidInput(format!(
            "{} agents for a {}-agent network",
            agents.len(),
            net.n_agents()
        )));
    }
    for (k, a) in agents.iter().enumerate() {
        if a.role != net.role(k) {
            return Err(Error::InvalidInput(format!(
                "agent {k} role disagrees with the network"
            )));
        }
        if (a.role == Role::Malicious) != a.forged_model.is_some() {
            return Err(Error::InvalidInput(format!(
                "agent {k}: a forged model is required for malicious agents only"
            )));
        }
        if let Some(f) = &a.forged_model {
            if f.alphabet_size() != a.true_model.alphabet_size() {
                return Err(Error::AlphabetMismatch(
                    f.alphabet_size(),
                    a.true_model.alphabet_size(),
                ));
            }
        }
        let [b1, b2] = a.initial_belief;
        if !(b1 > 0.0 && b2 > 0.0 && ((b1 + b2) - 1.0).abs() <= 1e-9) {
            return Err(Error::InvalidInput(format!(
                "agent {k}: initial belief {:?} must be positive and sum to 1",
                a.initial_belief
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefState {
    log_odds: Vec<f64>,
}

impl BeliefState {
    pub fn from_log_odds(log_odds: Vec<f64>) -> Self {
        BeliefState { log_odds }
    }

    pub fn from_beliefs(beliefs: &[BeliefPair]) -> Result<Self> {
        let mut log_odds = Vec::with_capacity(beliefs.len());
        for b in beliefs {
            if !(b[0] > 0.0 && b[1] > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "belief {b:?} is not strictly positive"
                )));
            }
            log_odds.push(b[0].ln() - b[1].ln());
        }
        Ok(BeliefState { log_odds })
    }

    pub fn initial(agents: &[AgentConfig]) -> Result<Self> {
        BeliefState::from_beliefs(&agents.iter().map(|a| a.initial_belief).collect::<Vec<_>>())
    }

    pub fn n_agents(&self) -> usize {
        self.log_odds.len()
    }

    pub fn log_odds(&self) -> &[f64] {
        &self.log_odds
    }

    pub fn belief(&self, k: usize) -> BeliefPair {
        logistic_pair(self.log_odds[k])
    }

    pub fn beliefs(&self) -> Vec<BeliefPair> {
        self.log_odds.iter().map(|&x| logistic_pair(x)).collect()
    }

    /// `ln(mu_k(wrong) / mu_k(truth))`.
    pub fn log_ratio(&self, k: usize, truth: Hypothesis) -> f64 {
        match truth {
            Hypothesis::Theta1 => -self.log_odds[k],
            Hypothesis::Theta2 => self.log_odds[k],
        }
    }

    /// Average belief in `h` over all agents.
    pub fn mean_belief(&self, h: Hypothesis) -> f64 {
        let s: f64 = self
            .log_odds
            .iter()
            .map(|&x| logistic_pair(x)[h.index()])
            .sum();
        s / self.log_odds.len() as f64
    }
}

/// `(1/(1+e^-x), 1/(1+e^x))` without cancellation.
pub fn logistic_pair(x: f64) -> BeliefPair {
    if x >= 0.0 {
        let e = (-x).exp();
        [1.0 / (1.0 + e), e / (1.0 + e)]
    } else {
        let e = x.exp();
        [e / (1.0 + e), 1.0 / (1.0 + e)]
    }
}

/// Bayesian update of `prior` by the likelihood row of the observed symbol.
pub fn adapt(prior: BeliefPair, row: [f64; 2]) -> Result<BeliefPair> {
    if !(prior[0] > 0.0 && prior[1] > 0.0) {
        return Err(Error::InvalidInput(format!(
            "prior {prior:?} is not strictly positive"
        )));
    }
    if row[0] == 0.0 && row[1] == 0.0 {
        return Err(Error::ZeroLikelihood);
    }
    let a = row[0] * prior[0];
    let b = row[1] * prior[1];
    let s = a + b;
    Ok([a / s, b / s])
}

/// Weighted geometric pooling of neighbor beliefs. Zero weights are skipped.
pub fn combine(neighbor_psis: &[BeliefPair], weights: &[f64]) -> BeliefPair {
    let mut s = [0.0f64; 2];
    for (psi, &w) in neighbor_psis.iter().zip(weights) {
        if w > 0.0 {
            s[0] += w * psi[0].ln();
            s[1] += w * psi[1].ln();
        }
    }
    let m = s[0].max(s[1]);
    let e = [(s[0] - m).exp(), (s[1] - m).exp()];
    let z = e[0] + e[1];
    [e[0] / z, e[1] / z]
}

/// One synchronous round in the belief domain. Observations are symbol
/// indices, one per agent.
pub fn step(
    state: &BeliefState,
    net: &Network,
    agents: &[AgentConfig],
    observations: &[usize],
) -> Result<BeliefState> {
    let n = net.n_agents();
    let mut psis = Vec::with_capacity(n);
    for k in 0..n {
        let row = agents[k].working_model().row(observations[k]);
        psis.push(adapt(state.belief(k), row)?);
    }
    let a = net.combination();
    let log_odds = (0..n)
        .map(|k| {
            let mu = combine(&psis, &a.column(k));
            mu[0].ln() - mu[1].ln()
        })
        .collect();
    Ok(BeliefState { log_odds })
}

/// Per-agent `ln(L(z|theta1) / L(z|theta2))` using each agent's working model.
pub fn log_likelihood_ratios(agents: &[AgentConfig], observations: &[usize]) -> Result<Vec<f64>> {
    agents
        .iter()
        .zip(observations)
        .map(|(a, &z)| {
            let [l1, l2] = a.working_model().row(z);
            if l1 == 0.0 && l2 == 0.0 {
                Err(Error::ZeroLikelihood)
            } else {
                Ok(l1.ln() - l2.ln())
            }
        })
        .collect()
}

/// `lambda_k = sum_l a_lk (llr_l + prev_l)`, i.e. `A^T (llr + prev)`.
pub fn log_ratio_recursion(prev: &[f64], llr: &[f64], net: &Network) -> Vec<f64> {
    let x: Vec<f64> = prev.iter().zip(llr).map(|(p, l)| p + l).collect();
    net.combination().apply_transpose(&x)
}

/// Independent observation streams, one per agent, all derived from one seed.
#[derive(Debug, Clone)]
pub struct ObservationStreams {
    rngs: Vec<ChaCha8Rng>,
}

impl ObservationStreams {
    pub fn new(seed: u64, agents: &[AgentConfig]) -> Self {
        let rngs = agents
            .iter()
            .map(|a| {
                let mut r = ChaCha8Rng::seed_from_u64(seed);
                r.set_stream(a.stream);
                r
            })
            .collect();
        ObservationStreams { rngs }
    }

    /// One symbol per agent from its true model under `truth`.
    pub fn draw(&mut self, agents: &[AgentConfig], truth: Hypothesis) -> Vec<usize> {
        agents
            .iter()
            .zip(self.rngs.iter_mut())
            .map(|(a, r)| a.true_model.given(truth).sample(r))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub horizon: usize,
    pub seed: u64,
    /// Record the state every `stride` steps; 0 records nothing.
    pub stride: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub step: usize,
    pub log_odds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub seed: u64,
    pub theta_true: Hypothesis,
    pub horizon: usize,
    pub points: Vec<TrajectoryPoint>,
    /// Network-average belief in the true state after steps `1..=horizon`.
    pub mean_belief_true: Vec<f64>,
    pub final_state: BeliefState,
}

impl Trajectory {
    pub fn final_mean_belief_true(&self) -> f64 {
        *self.mean_belief_true.last().expect("horizon >= 1")
    }

    /// `ln(mu_k(wrong) / mu_k(truth))` at the horizon.
    pub fn final_log_ratios(&self) -> Vec<f64> {
        (0..self.final_state.n_agents())
            .map(|k| self.final_state.log_ratio(k, self.theta_true))
            .collect()
    }

    /// Final log ratios divided by the horizon.
    pub fn empirical_rates(&self) -> Vec<f64> {
        let h = self.horizon as f64;
        self.final_log_ratios().into_iter().map(|x| x / h).collect()
    }
}

/// Simulates `opts.horizon` rounds with the log-domain recursion.
pub fn run(
    net: &Network,
    agents: &[AgentConfig],
    theta_true: Hypothesis,
    opts: RunOptions,
) -> Result<Trajectory> {
    if opts.horizon == 0 {
        return Err(Error::InvalidInput("horizon must be at least 1".into()));
    }
    check_agents(net, agents)?;
    let mut streams = ObservationStreams::new(opts.seed, agents);
    let mut state = BeliefState::initial(agents)?;
    let mut points = Vec::new();
    let mut mean_belief_true = Vec::with_capacity(opts.horizon);
    for i in 1..=opts.horizon {
        let obs = streams.draw(agents, theta_true);
        let llr = log_likelihood_ratios(agents, &obs)?;
        state = BeliefState::from_log_odds(log_ratio_recursion(&state.log_odds, &llr, net));
        mean_belief_true.push(state.mean_belief(theta_true));
        if opts.stride > 0 && i % opts.stride == 0 {
            points.push(TrajectoryPoint {
                step: i,
                log_odds: state.log_odds.clone(),
            });
        }
    }
    Ok(Trajectory {
        seed: opts.seed,
        theta_true,
        horizon: opts.horizon,
        points,
        mean_belief_true,
        final_state: state,
    })
}
