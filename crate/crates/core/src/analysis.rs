//! Closed-form predictions for a network with fixed (possibly forged)
//! likelihoods.
//!
//! For a candidate true state `theta_j` the network is misled iff the
//! adversaries' total contribution `sum_k R_kj` exceeds the normal
//! sub-network divergence `S_j`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learning::AgentConfig;
use crate::network::{adversary_centrality, perron_vector, Network, PerronVector, Role};
use crate::probability::{kl_divergence, Hypothesis, LikelihoodModel};

pub const VERDICT_TOL: f64 = 1e-9;

/// `S_j = sum_{k normal} u_k D(L_k(.|theta_j) || L_k(.|theta_j'))`.
pub fn normal_divergence(u: &PerronVector, agents: &[AgentConfig], j: Hypothesis) -> Result<f64> {
    let mut s = 0.0;
    for (k, a) in agents.iter().enumerate() {
        if a.role == Role::Normal {
            let m = &a.true_model;
            s += u.get(k) * kl_divergence(m.given(j), m.given(j.other()))?;
        }
    }
    Ok(s)
}

/// `R_kj = u_k E_{L_k(.|theta_j)}[ln(F(z|theta_j') / F(z|theta_j))]`.
pub fn adversary_contribution(
    u_k: f64,
    true_model: &LikelihoodModel,
    forged: &LikelihoodModel,
    j: Hypothesis,
) -> f64 {
    let l = true_model.given(j);
    let mut r = 0.0;
    for z in 0..l.len() {
        let p = l.get(z);
        if p > 0.0 {
            r += p * (forged.likelihood(z, j.other()).ln() - forged.likelihood(z, j).ln());
        }
    }
    u_k * r
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Misled,
    LearnsTruth,
    Boundary,
}

impl Verdict {
    pub fn from_margin(margin: f64) -> Verdict {
        if margin > VERDICT_TOL {
            Verdict::Misled
        } else if margin < -VERDICT_TOL {
            Verdict::LearnsTruth
        } else {
            Verdict::Boundary
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Misled => "misled",
            Verdict::LearnsTruth => "learns_truth",
            Verdict::Boundary => "boundary",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversaryContribution {
    pub agent: usize,
    pub centrality: f64,
    /// `[R_k1, R_k2]`.
    pub r: [f64; 2],
}

/// Index 0 refers to the candidate true state theta1, index 1 to theta2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeceptionReport {
    pub perron: Vec<f64>,
    pub adversary_centrality: f64,
    pub s: [f64; 2],
    pub adversaries: Vec<AdversaryContribution>,
    /// `sum_k R_kj - S_j`.
    pub margin: [f64; 2],
    pub verdict: [Verdict; 2],
    /// Expected cost of the adversaries, `S_j - sum_k R_kj`, evaluated
    /// directly from its own definition.
    pub cost: [f64; 2],
    /// `sum_k u_k [D(L_k(theta_j) || F_k(theta_j)) - D(L_k(theta_j) || F_k(theta_j'))]`.
    pub kl_form: [f64; 2],
}

impl DeceptionReport {
    pub fn verdict_for(&self, truth: Hypothesis) -> Verdict {
        self.verdict[truth.index()]
    }

    pub fn margin_for(&self, truth: Hypothesis) -> f64 {
        self.margin[truth.index()]
    }

    pub fn total_contribution(&self, j: Hypothesis) -> f64 {
        self.adversaries.iter().map(|a| a.r[j.index()]).sum()
    }
}

pub fn deception_verdict(net: &Network, agents: &[AgentConfig]) -> Result<DeceptionReport> {
    crate::learning::check_agents(net, agents)?;
    let u = perron_vector(net)?;
    deception_report(&u, agents)
}

/// Same as [`deception_verdict`] for an already computed Perron vector.
pub fn deception_report(u: &PerronVector, agents: &[AgentConfig]) -> Result<DeceptionReport> {
    let roles: Vec<Role> = agents.iter().map(|a| a.role).collect();
    let s = [
        normal_divergence(u, agents, Hypothesis::Theta1)?,
        normal_divergence(u, agents, Hypothesis::Theta2)?,
    ];
    let mut adversaries = Vec::new();
    let mut kl_form = [0.0; 2];
    let mut cost = [0.0; 2];
    for (k, a) in agents.iter().enumerate() {
        let uk = u.get(k);
        let f = a.working_model();
        match a.role {
            Role::Malicious => {
                let r = Hypothesis::ALL.map(|j| adversary_contribution(uk, &a.true_model, f, j));
                for j in Hypothesis::ALL {
                    let l = a.true_model.given(j);
                    kl_form[j.index()] += uk
                        * (kl_divergence(l, f.given(j))? - kl_divergence(l, f.given(j.other()))?);
                    let mut c = 0.0;
                    for z in 0..l.len() {
                        if l.get(z) > 0.0 {
                            c += l.get(z) * (f.likelihood(z, j) / f.likelihood(z, j.other())).ln();
                        }
                    }
                    cost[j.index()] += uk * c;
                }
                adversaries.push(AdversaryContribution {
                    agent: k,
                    centrality: uk,
                    r,
                });
            }
            Role::Normal => {
                for j in Hypothesis::ALL {
                    let m = &a.true_model;
                    cost[j.index()] += uk * kl_divergence(m.given(j), m.given(j.other()))?;
                }
            }
        }
    }
    let margin = Hypothesis::ALL
        .map(|j| adversaries.iter().map(|a| a.r[j.index()]).sum::<f64>() - s[j.index()]);
    for j in 0..2 {
        let total = margin[j] + s[j];
        let scale = 1.0f64.max(total.abs());
        if (kl_form[j] - total).abs() > 1e-10 * scale {
            return Err(Error::InvalidInput(format!(
                "relative-entropy form {} disagrees with direct form {}",
                kl_form[j], total
            )));
        }
    }
    Ok(DeceptionReport {
        perron: u.entries().to_vec(),
        adversary_centrality: adversary_centrality(u, &roles),
        s,
        adversaries,
        margin,
        verdict: margin.map(Verdict::from_margin),
        cost,
        kl_form,
    })
}

/// Predicted limit of `lambda_{k,i}(wrong) / i`, where lambda is the log of
/// wrong-state over true-state belief. Positive means the network is misled.
pub fn asymptotic_rate(u: &PerronVector, agents: &[AgentConfig], truth: Hypothesis) -> f64 {
    let wrong = truth.other();
    agents
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let w = a.working_model();
            let l = a.true_model.given(truth);
            let e: f64 = (0..l.len())
                .filter(|&z| l.get(z) > 0.0)
                .map(|z| l.get(z) * (w.likelihood(z, wrong).ln() - w.likelihood(z, truth).ln()))
                .sum();
            u.get(k) * e
        })
        .sum()
}

pub const ROOT_MARGIN_TOL: f64 = 1e-10;
pub const ROOT_WIDTH_TOL: f64 = 1e-9;

/// Bisection for the sign change of `margin` on `[lo, hi]`.
pub fn critical_parameter<F>(mut margin: F, lo: f64, hi: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut fa = margin(a)?;
    let fb = margin(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::NoSignChange { lo: a, hi: b });
    }
    loop {
        let mid = 0.5 * (a + b);
        let fm = margin(mid)?;
        if fm.abs() < ROOT_MARGIN_TOL || b - a < ROOT_WIDTH_TOL {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
}
