use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::ExperimentConfig;
use crate::analysis::{deception_report, normal_divergence, DeceptionReport};
use crate::attacks::{
    multi_adversary_known, random_attack, unknown_divergence_attack, AdversaryForgery, AttackPlan,
    KnownParams, MultiOutcome, Selectors, Strategy,
};
use crate::error::Result;
use crate::learning::AgentConfig;
use crate::network::{adversary_centrality, perron_vector, Network, PerronVector, Role};
use crate::probability::{Hypothesis, LikelihoodModel};

/// A configuration turned into a network, agents with forged models and the
/// closed-form prediction.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ExperimentConfig,
    pub network: Network,
    pub perron: PerronVector,
    pub agents: Vec<AgentConfig>,
    pub plan: AttackPlan,
    pub report: DeceptionReport,
}

impl Scenario {
    pub fn build(config: &ExperimentConfig) -> Result<Scenario> {
        config.validate()?;
        let n = config.n_agents();
        let m = config.agents.n_malicious;
        let roles: Vec<Role> = (0..n)
            .map(|k| if k < m { Role::Malicious } else { Role::Normal })
            .collect();
        let network = Network::new(config.topology.combination(m)?, roles)?;
        let perron = perron_vector(&network)?;
        let models = (0..n)
            .map(|k| config.model_spec(k).build())
            .collect::<Result<Vec<_>>>()?;
        // honest placeholders, replaced by the plan below
        let mut agents: Vec<AgentConfig> = (0..n)
            .map(|k| AgentConfig {
                role: network.role(k),
                true_model: models[k].clone(),
                forged_model: (k < m).then(|| models[k].clone()),
                initial_belief: config.initial_belief(k),
                stream: k as u64,
            })
            .collect();
        let plan = build_plan(config, &perron, &agents)?;
        for f in &plan.adversaries {
            agents[f.agent].forged_model = Some(f.forged.clone());
        }
        let report = deception_report(&perron, &agents)?;
        Ok(Scenario {
            config: config.clone(),
            network,
            perron,
            agents,
            plan,
            report,
        })
    }

    pub fn margin(&self) -> f64 {
        self.report.margin_for(self.config.theta_true)
    }
}

fn build_plan(
    config: &ExperimentConfig,
    u: &PerronVector,
    agents: &[AgentConfig],
) -> Result<AttackPlan> {
    let spec = &config.attack;
    let adversaries: Vec<usize> = (0..agents.len())
        .filter(|&k| agents[k].role == Role::Malicious)
        .collect();
    let true_of = |k: usize| -> &LikelihoodModel { &agents[k].true_model };
    let mut plan = AttackPlan {
        strategy: spec.strategy,
        epsilon: spec.epsilon,
        seed: None,
        divergences: None,
        selectors: None,
        aggregate_centrality: spec.aggregate_centrality,
        adversaries: Vec::new(),
    };
    let keep = |k: usize| AdversaryForgery {
        agent: k,
        forged: true_of(k).clone(),
        known: None,
    };
    match spec.strategy {
        Strategy::None => {
            plan.adversaries = adversaries.iter().map(|&k| keep(k)).collect();
        }
        Strategy::UnknownDivergences => {
            for &k in &adversaries {
                let m = true_of(k);
                plan.adversaries.push(if m.is_informative() {
                    AdversaryForgery {
                        agent: k,
                        forged: unknown_divergence_attack(m, spec.epsilon)?,
                        known: None,
                    }
                } else {
                    keep(k)
                });
            }
        }
        Strategy::Random => {
            plan.seed = Some(spec.seed);
            for &k in &adversaries {
                let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
                rng.set_stream(k as u64);
                plan.adversaries.push(AdversaryForgery {
                    agent: k,
                    forged: random_attack(true_of(k), spec.epsilon, &mut rng)?,
                    known: None,
                });
            }
        }
        Strategy::KnownDivergences => {
            let s = match spec.divergences {
                Some(s) => s,
                None => [
                    normal_divergence(u, agents, Hypothesis::Theta1)?,
                    normal_divergence(u, agents, Hypothesis::Theta2)?,
                ],
            };
            let roles: Vec<Role> = agents.iter().map(|a| a.role).collect();
            let total = adversary_centrality(u, &roles);
            let centralities: Vec<f64> = adversaries
                .iter()
                .map(|&k| {
                    if spec.aggregate_centrality {
                        total
                    } else {
                        u.get(k)
                    }
                })
                .collect();
            let models: Vec<LikelihoodModel> =
                adversaries.iter().map(|&k| true_of(k).clone()).collect();
            let selectors = Selectors {
                x1_fraction: spec.x1_fraction,
                beta_fraction: spec.beta_fraction,
                pair: None,
            };
            let outcomes =
                multi_adversary_known(&models, &centralities, s[0], s[1], spec.epsilon, selectors)?;
            plan.divergences = Some(s);
            plan.selectors = Some(selectors);
            for (&k, o) in adversaries.iter().zip(outcomes) {
                plan.adversaries.push(match o {
                    MultiOutcome::Constructed(attack) => AdversaryForgery {
                        agent: k,
                        known: Some(KnownParams::from(&attack)),
                        forged: attack.forged,
                    },
                    MultiOutcome::Unchanged(model) => AdversaryForgery {
                        agent: k,
                        forged: model,
                        known: None,
                    },
                });
            }
        }
    }
    Ok(plan)
}
