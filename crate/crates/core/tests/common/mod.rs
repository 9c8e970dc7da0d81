#![allow(dead_code)]

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use social_deception::learning::AgentConfig;
use social_deception::network::{uniform_combination, Network, Role};
use social_deception::probability::{Hypothesis, LikelihoodModel, Pmf};

use Hypothesis::{Theta1, Theta2};

/// Strictly positive pmf of the given size.
pub fn pmf_of(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, n).prop_map(|w| {
        let s: f64 = w.iter().sum();
        w.into_iter().map(|x| x / s).collect()
    })
}

pub fn model_of(n: usize) -> impl Strategy<Value = LikelihoodModel> {
    (pmf_of(n), pmf_of(n)).prop_map(|(a, b)| LikelihoodModel::from_rows(&a, &b).unwrap())
}

pub fn informative_model(
    sizes: std::ops::RangeInclusive<usize>,
) -> impl Strategy<Value = LikelihoodModel> {
    sizes
        .prop_flat_map(model_of)
        .prop_filter("informative", |m| m.is_informative())
}

pub fn random_pmf<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| 0.01 + rng.random::<f64>()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

pub fn random_model<R: Rng>(rng: &mut R, n: usize) -> LikelihoodModel {
    loop {
        let m = LikelihoodModel::from_rows(&random_pmf(rng, n), &random_pmf(rng, n)).unwrap();
        if m.is_informative() {
            return m;
        }
    }
}

/// Connected undirected graph: a random spanning tree plus extra edges.
pub fn random_adjacency<R: Rng>(rng: &mut R, n: usize, extra: f64) -> Vec<Vec<bool>> {
    let mut adj = vec![vec![false; n]; n];
    for k in 1..n {
        let j = rng.random_range(0..k);
        adj[k][j] = true;
        adj[j][k] = true;
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < extra {
                adj[i][j] = true;
                adj[j][i] = true;
            }
        }
    }
    adj
}

/// Uniform-weight network with self-loops and the first `m` agents malicious.
pub fn random_network<R: Rng>(rng: &mut R, n: usize, m: usize) -> Network {
    let a = uniform_combination(&random_adjacency(rng, n, 0.3), &vec![true; n]).unwrap();
    let roles = (0..n)
        .map(|k| if k < m { Role::Malicious } else { Role::Normal })
        .collect();
    Network::new(a, roles).unwrap()
}

/// Agents with random models; adversaries get random forged models with a
/// floor of `eps`.
pub fn random_agents<R: Rng>(
    rng: &mut R,
    net: &Network,
    alphabet: usize,
    eps: f64,
) -> Vec<AgentConfig> {
    (0..net.n_agents())
        .map(|k| {
            let m = random_model(rng, alphabet);
            let mut a = match net.role(k) {
                Role::Normal => AgentConfig::normal(m, k as u64),
                Role::Malicious => {
                    let mut floored = || {
                        let p = random_pmf(rng, alphabet);
                        let scale = 1.0 - alphabet as f64 * eps;
                        Pmf::new(p.iter().map(|x| eps + scale * x).collect()).unwrap()
                    };
                    let f = LikelihoodModel::new(floored(), floored()).unwrap();
                    AgentConfig::malicious(m, f, k as u64)
                }
            };
            let b = 0.05 + 0.9 * rng.random::<f64>();
            a.initial_belief = [b, 1.0 - b];
            a
        })
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Best `min(R_1 - S_1, R_2 - S_2)` over two-symbol forgeries on `pair` with
/// floor `eps`, by grid search over the two free masses. Positive means a
/// forgery beating both thresholds exists.
pub fn two_symbol_margin(
    m: &LikelihoodModel,
    pair: (usize, usize),
    u: f64,
    s: [f64; 2],
    eps: f64,
    points: usize,
) -> f64 {
    let n = m.alphabet_size() as f64;
    let alpha = 1.0 - (n - 2.0) * eps;
    let (i, j) = pair;
    let l = |z: usize, h: Hypothesis| m.likelihood(z, h);
    // logistic spacing crowds the grid near both floors, endpoints included
    let grid: Vec<f64> = (0..=points)
        .map(|k| {
            let t = -40.0 + 80.0 * k as f64 / points as f64;
            let s = match k {
                0 => 0.0,
                _ if k == points => 1.0,
                _ => 1.0 / (1.0 + (-t).exp()),
            };
            eps + (alpha - 2.0 * eps) * s
        })
        .collect();
    let mut best = f64::NEG_INFINITY;
    for &a in &grid {
        for &b in &grid {
            // a = F(z_i|theta1), b = F(z_i|theta2)
            let (la, lb) = (a.ln(), b.ln());
            let (lca, lcb) = ((alpha - a).ln(), (alpha - b).ln());
            let r1 = u * (l(i, Theta1) * (lb - la) + l(j, Theta1) * (lcb - lca));
            let r2 = u * (l(i, Theta2) * (la - lb) + l(j, Theta2) * (lca - lcb));
            best = best.max((r1 - s[0]).min(r2 - s[1]));
        }
    }
    best
}
