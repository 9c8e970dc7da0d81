use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{uniform_combination, CombinationMatrix};
use crate::error::{Error, Result};

const ER_MAX_ATTEMPTS: usize = 10_000;

/// Graph families. All builders except `CentralityMix` add self-loops to
/// every agent and use uniform weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Topology {
    Complete {
        n_agents: usize,
    },
    Star {
        n_agents: usize,
        #[serde(default)]
        hub: usize,
    },
    Path {
        n_agents: usize,
    },
    Cycle {
        n_agents: usize,
    },
    /// G(n, p) resampled until connected.
    ErdosRenyi {
        n_agents: usize,
        edge_probability: f64,
        seed: u64,
    },
    EdgeList {
        n_agents: usize,
        edges: Vec<[usize; 2]>,
    },
    /// `A = (1 - mixing) I + mixing v 1^T`, whose Perron vector is exactly
    /// `v`: adversaries share `adversary_centrality` evenly and normal agents
    /// share the rest.
    CentralityMix {
        n_agents: usize,
        adversary_centrality: f64,
        #[serde(default = "default_mixing")]
        mixing: f64,
    },
}

fn default_mixing() -> f64 {
    0.5
}

impl Topology {
    pub fn n_agents(&self) -> usize {
        match *self {
            Topology::Complete { n_agents }
            | Topology::Star { n_agents, .. }
            | Topology::Path { n_agents }
            | Topology::Cycle { n_agents }
            | Topology::ErdosRenyi { n_agents, .. }
            | Topology::EdgeList { n_agents, .. }
            | Topology::CentralityMix { n_agents, .. } => n_agents,
        }
    }

    /// Problems with the parameters, empty when buildable in principle.
    pub fn check(&self, n_malicious: usize) -> Vec<String> {
        let mut v = Vec::new();
        let n = self.n_agents();
        if n == 0 {
            v.push("topology.n_agents must be positive".into());
        }
        match self {
            Topology::Star { hub, .. } if *hub >= n => {
                v.push(format!("topology.hub = {hub} is not an agent index"));
            }
            Topology::ErdosRenyi {
                edge_probability, ..
            } if !(*edge_probability > 0.0 && *edge_probability <= 1.0) => {
                v.push(format!(
                    "topology.edge_probability = {edge_probability} must lie in (0, 1]"
                ));
            }
            Topology::EdgeList { edges, .. } => {
                for e in edges {
                    if e[0] >= n || e[1] >= n {
                        v.push(format!(
                            "topology.edges entry {e:?} references a missing agent"
                        ));
                    }
                }
            }
            Topology::CentralityMix {
                adversary_centrality,
                mixing,
                ..
            } => {
                if !(*mixing > 0.0 && *mixing <= 1.0) {
                    v.push(format!("topology.mixing = {mixing} must lie in (0, 1]"));
                }
                let c = *adversary_centrality;
                let ok = if n_malicious == 0 {
                    c == 0.0
                } else {
                    c > 0.0 && c < 1.0
                };
                if !ok {
                    v.push(format!(
                        "topology.adversary_centrality = {c} is incompatible with {n_malicious} adversaries"
                    ));
                }
            }
            _ => {}
        }
        v
    }

    /// Undirected adjacency without self-loops, `None` for `CentralityMix`.
    pub fn adjacency(&self) -> Result<Option<Vec<Vec<bool>>>> {
        let n = self.n_agents();
        let mut adj = vec![vec![false; n]; n];
        let mut link = |i: usize, j: usize| {
            if i != j {
                adj[i][j] = true;
                adj[j][i] = true;
            }
        };
        match self {
            Topology::Complete { .. } => {
                for i in 0..n {
                    for j in 0..i {
                        link(i, j);
                    }
                }
            }
            Topology::Star { hub, .. } => {
                for j in 0..n {
                    link(*hub, j);
                }
            }
            Topology::Path { .. } => {
                for i in 1..n {
                    link(i - 1, i);
                }
            }
            Topology::Cycle { .. } => {
                for i in 1..n {
                    link(i - 1, i);
                }
                if n > 2 {
                    link(n - 1, 0);
                }
            }
            Topology::EdgeList { edges, .. } => {
                for e in edges {
                    link(e[0], e[1]);
                }
            }
            Topology::ErdosRenyi {
                edge_probability,
                seed,
                ..
            } => return erdos_renyi(n, *edge_probability, *seed).map(Some),
            Topology::CentralityMix { .. } => return Ok(None),
        }
        Ok(Some(adj))
    }

    /// Builds the combination matrix; adversaries are agents `0..n_malicious`.
    pub fn combination(&self, n_malicious: usize) -> Result<CombinationMatrix> {
        let problems = self.check(n_malicious);
        if !problems.is_empty() {
            return Err(Error::Validation(problems));
        }
        match self {
            Topology::CentralityMix {
                n_agents,
                adversary_centrality,
                mixing,
            } => Ok(centrality_mix(
                *n_agents,
                n_malicious,
                *adversary_centrality,
                *mixing,
            )),
            _ => {
                let adj = self.adjacency()?.expect("graph topology");
                uniform_combination(&adj, &vec![true; adj.len()])
            }
        }
    }
}

fn centrality_mix(n: usize, m: usize, c: f64, gamma: f64) -> CombinationMatrix {
    let v: Vec<f64> = (0..n)
        .map(|k| {
            if k < m {
                c / m as f64
            } else {
                (1.0 - c) / (n - m) as f64
            }
        })
        .collect();
    let rows = (0..n)
        .map(|l| {
            (0..n)
                .map(|k| gamma * v[l] + if l == k { 1.0 - gamma } else { 0.0 })
                .collect()
        })
        .collect();
    CombinationMatrix::from_rows(rows).expect("square by construction")
}

fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Vec<Vec<bool>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..ER_MAX_ATTEMPTS {
        let mut adj = vec![vec![false; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.random::<f64>() < p {
                    adj[i][j] = true;
                    adj[j][i] = true;
                }
            }
        }
        if connected(&adj) {
            return Ok(adj);
        }
    }
    Err(Error::InvalidInput(format!(
        "no connected G({n}, {p}) graph after {ER_MAX_ATTEMPTS} draws"
    )))
}

fn connected(adj: &[Vec<bool>]) -> bool {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for w in 0..n {
            if adj[v][w] && !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen.into_iter().all(|s| s)
}
