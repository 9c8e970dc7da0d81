//! Forged-likelihood constructions.
//!
//! * [`unknown_divergence_attack`]: closed-form minimizer of the expected
//!   cost when the adversary does not know the normal agents' divergences.
//! * [`known_divergence_attack`]: two-symbol construction that beats given
//!   divergences `S1`, `S2` for both candidate true states.
//! * [`random_attack`]: baseline forgery drawn uniformly from the floored
//!   simplex.
//! * [`oracle_optimal_attack`]: brute-force check of the closed form.
//!
//! Every forged entry is at least `epsilon`.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::analysis::adversary_contribution;
use crate::error::{Error, Result};
use crate::probability::{Hypothesis, LikelihoodModel, Pmf};

/// Strict inequalities are checked with this margin.
pub const STRICT_MARGIN: f64 = 1e-9;
const DEGENERATE_DET: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidencePartition {
    /// `L(z|theta1) - L(z|theta2)` per symbol.
    pub z: Vec<f64>,
    /// Symbols with `z >= 0`.
    pub d1: Vec<usize>,
    pub d2: Vec<usize>,
}

pub fn confidence_partition(m: &LikelihoodModel) -> ConfidencePartition {
    let z: Vec<f64> = (0..m.alphabet_size())
        .map(|s| m.likelihood(s, Hypothesis::Theta1) - m.likelihood(s, Hypothesis::Theta2))
        .collect();
    let (d1, d2) = (0..z.len()).partition(|&s| z[s] >= 0.0);
    ConfidencePartition { z, d1, d2 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparabilityReport {
    /// Mass of `d1` under theta1 and theta2.
    pub xi1: f64,
    pub xi2: f64,
    /// Mass of `d2` under theta1 and theta2.
    pub sigma1: f64,
    pub sigma2: f64,
    /// `c_j = sum_{d1} L(z|theta_j) ln(Z(z) / sum_{d1} Z)`; symbols with
    /// `Z = 0` are left out since their log weight is undefined.
    pub c1: f64,
    pub c2: f64,
    /// Same as `c_j` over `d2`.
    pub b1: f64,
    pub b2: f64,
    pub separable: bool,
}

pub fn separability(m: &LikelihoodModel) -> Result<SeparabilityReport> {
    if !m.is_informative() {
        return Err(Error::UninformativeModel);
    }
    let part = confidence_partition(m);
    let mass = |set: &[usize], h| set.iter().map(|&s| m.likelihood(s, h)).sum::<f64>();
    let log_weighted = |set: &[usize], h| {
        let total: f64 = set.iter().map(|&s| part.z[s]).sum();
        set.iter()
            .filter(|&&s| part.z[s] != 0.0)
            .map(|&s| m.likelihood(s, h) * (part.z[s] / total).ln())
            .sum::<f64>()
    };
    let (t1, t2) = (Hypothesis::Theta1, Hypothesis::Theta2);
    let xi1 = mass(&part.d1, t1);
    let xi2 = mass(&part.d1, t2);
    let sigma1 = mass(&part.d2, t1);
    let sigma2 = mass(&part.d2, t2);
    Ok(SeparabilityReport {
        xi1,
        xi2,
        sigma1,
        sigma2,
        c1: log_weighted(&part.d1, t1),
        c2: log_weighted(&part.d1, t2),
        b1: log_weighted(&part.d2, t1),
        b2: log_weighted(&part.d2, t2),
        separable: sigma1 < xi1 && sigma2 > xi2,
    })
}

fn check_epsilon(eps: f64, n: usize) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0 / n as f64) {
        return Err(Error::OutOfRange {
            name: "epsilon",
            value: eps,
        });
    }
    Ok(())
}

/// Expected-cost objective `sum_z Z(z) (ln F(z|theta1) - ln F(z|theta2))`
/// that the unknown-divergence attack minimizes.
pub fn attack_objective(m: &LikelihoodModel, forged: &LikelihoodModel) -> f64 {
    let part = confidence_partition(m);
    part.z
        .iter()
        .enumerate()
        .filter(|(_, &z)| z != 0.0)
        .map(|(s, &z)| {
            z * (forged.likelihood(s, Hypothesis::Theta1).ln()
                - forged.likelihood(s, Hypothesis::Theta2).ln())
        })
        .sum()
}

/// Closed-form optimal forgery without knowledge of the divergences.
///
/// Under theta_j the symbols of `d_j` get `epsilon`; the remaining mass goes
/// to the other symbols in proportion to `|Z|`. Symbols with `Z = 0` also get
/// `epsilon`. Fails with `FloorViolation` if a proportional share drops below
/// `epsilon`.
pub fn unknown_divergence_attack(m: &LikelihoodModel, eps: f64) -> Result<LikelihoodModel> {
    if !m.is_informative() {
        return Err(Error::UninformativeModel);
    }
    let n = m.alphabet_size();
    check_epsilon(eps, n)?;
    let part = confidence_partition(m);
    let column = |active: &dyn Fn(f64) -> bool| -> Result<Pmf> {
        let floored = part.z.iter().filter(|&&z| !active(z)).count();
        let total: f64 = part.z.iter().filter(|&&z| active(z)).sum();
        let mass = 1.0 - floored as f64 * eps;
        let mut col = vec![eps; n];
        for (s, &z) in part.z.iter().enumerate() {
            if active(z) {
                let v = mass * (z / total);
                if v < eps {
                    return Err(Error::FloorViolation {
                        symbol: s,
                        value: v,
                    });
                }
                col[s] = v;
            }
        }
        Pmf::new(col)
    };
    let theta1 = column(&|z| z < 0.0)?;
    let theta2 = column(&|z| z > 0.0)?;
    LikelihoodModel::new(theta1, theta2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSolution {
    pub forged: LikelihoodModel,
    pub objective: f64,
}

/// Grid search over the floored simplex followed by a compass search over
/// pairwise mass transfers. `grid_resolution` is the spacing of the coarse
/// grid in simplex coordinates.
pub fn oracle_optimal_attack(
    m: &LikelihoodModel,
    eps: f64,
    grid_resolution: f64,
) -> Result<OracleSolution> {
    let n = m.alphabet_size();
    if n > 4 {
        return Err(Error::InvalidInput(format!(
            "oracle supports at most 4 symbols, got {n}"
        )));
    }
    check_epsilon(eps, n)?;
    if !(grid_resolution > 0.0 && grid_resolution <= 0.5) {
        return Err(Error::OutOfRange {
            name: "grid_resolution",
            value: grid_resolution,
        });
    }
    let z = confidence_partition(m).z;
    // theta1 column minimizes sum Z ln x, theta2 column maximizes it
    let c1: Vec<f64> = z.clone();
    let c2: Vec<f64> = z.iter().map(|v| -v).collect();
    let (x1, f1) = minimize_column(&c1, eps, grid_resolution);
    let (x2, f2) = minimize_column(&c2, eps, grid_resolution);
    let forged = LikelihoodModel::new(Pmf::new(x1)?, Pmf::new(x2)?)?;
    Ok(OracleSolution {
        forged,
        objective: f1 + f2,
    })
}

fn column_value(c: &[f64], x: &[f64]) -> f64 {
    c.iter()
        .zip(x)
        .filter(|(c, _)| **c != 0.0)
        .map(|(c, x)| c * x.ln())
        .sum()
}

fn minimize_column(c: &[f64], eps: f64, h: f64) -> (Vec<f64>, f64) {
    let n = c.len();
    let k = (1.0 / h).round().max(1.0) as usize;
    let scale = 1.0 - n as f64 * eps;
    let mut best: Vec<(f64, Vec<f64>)> = Vec::new();
    const KEEP: usize = 4;
    let mut counts = vec![0usize; n];
    let mut visit = |counts: &[usize]| {
        let x: Vec<f64> = counts
            .iter()
            .map(|&ci| eps + scale * ci as f64 / k as f64)
            .collect();
        let f = column_value(c, &x);
        if best.len() < KEEP || f < best[best.len() - 1].0 {
            let at = best.partition_point(|(g, _)| *g <= f);
            best.insert(at, (f, x));
            best.truncate(KEEP);
        }
    };
    compositions(&mut counts, 0, k, &mut visit);

    let mut out = (Vec::new(), f64::INFINITY);
    for (_, start) in best {
        let (x, f) = compass(c, eps, start, scale / k as f64);
        if f < out.1 {
            out = (x, f);
        }
    }
    out
}

fn compositions(counts: &mut [usize], i: usize, left: usize, visit: &mut dyn FnMut(&[usize])) {
    if i + 1 == counts.len() {
        counts[i] = left;
        visit(counts);
        return;
    }
    for c in 0..=left {
        counts[i] = c;
        compositions(counts, i + 1, left - c, visit);
    }
}

fn compass(c: &[f64], eps: f64, mut x: Vec<f64>, mut step: f64) -> (Vec<f64>, f64) {
    let n = x.len();
    let mut f = column_value(c, &x);
    while step > 1e-16 {
        let mut improved = false;
        for i in 0..n {
            for j in 0..n {
                if i == j || x[i] <= eps {
                    continue;
                }
                let delta = step.min(x[i] - eps);
                let mut y = x.clone();
                if delta == x[i] - eps {
                    y[i] = eps;
                } else {
                    y[i] -= delta;
                }
                y[j] += delta;
                let g = column_value(c, &y);
                if g < f {
                    x = y;
                    f = g;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (x, f)
}

/// `L(i|theta1) L(j|theta2) - L(i|theta2) L(j|theta1)`.
pub fn support_determinant(m: &LikelihoodModel, pair: (usize, usize)) -> f64 {
    let (i, j) = pair;
    let (t1, t2) = (Hypothesis::Theta1, Hypothesis::Theta2);
    m.likelihood(i, t1) * m.likelihood(j, t2) - m.likelihood(i, t2) * m.likelihood(j, t1)
}

/// First pair `(i, j)`, `i < j`, in lexicographic order that maximizes the
/// absolute determinant.
pub fn select_support_pair(m: &LikelihoodModel) -> Result<(usize, usize)> {
    if !m.is_informative() {
        return Err(Error::UninformativeModel);
    }
    let n = m.alphabet_size();
    let mut best = ((0, 1), 0.0);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = support_determinant(m, (i, j)).abs();
            if d > best.1 {
                best = ((i, j), d);
            }
        }
    }
    if best.1 <= DEGENERATE_DET {
        return Err(Error::UninformativeModel);
    }
    Ok(best.0)
}

/// Geometry of the known-divergence construction in the transformed
/// coordinates `x1 = ln(F(z1|theta2) / F(z1|theta1))` and
/// `x2 = ln(F(z2|theta2) / F(z2|theta1))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionRegion {
    pub support_pair: (usize, usize),
    /// `[L(z1|theta1), L(z1|theta2), L(z2|theta1), L(z2|theta2)]`.
    pub likelihoods: [f64; 4],
    pub centrality: f64,
    pub divergences: [f64; 2],
    pub epsilon: f64,
    pub alphabet_size: usize,
    pub d: f64,
    pub n1: f64,
    pub n2: f64,
    /// Apex of the cone where both inequalities are tight.
    pub x1_prime: f64,
    pub x2_prime: f64,
    pub alpha: f64,
    pub x_minus: f64,
    pub x_plus: f64,
    /// Largest epsilon for which the apex lies inside the box `[x-, x+]^2`.
    pub epsilon_bound: f64,
    /// The stricter bound `min_i exp(-(|x_i'| + |Z| - 1))`.
    pub strict_epsilon_bound: f64,
    pub empty: bool,
}

impl DistortionRegion {
    /// `R_1 = u (L(z1|theta1) x1 + L(z2|theta1) x2)`.
    pub fn r_theta1(&self, x1: f64, x2: f64) -> f64 {
        let [l11, _, l21, _] = self.likelihoods;
        self.centrality * (l11 * x1 + l21 * x2)
    }

    /// `R_2 = -u (L(z1|theta2) x1 + L(z2|theta2) x2)`.
    pub fn r_theta2(&self, x1: f64, x2: f64) -> f64 {
        let [_, l12, _, l22] = self.likelihoods;
        -self.centrality * (l12 * x1 + l22 * x2)
    }

    /// Boundary line where `R_1 = S_1`, as `x2` over `x1`.
    pub fn r1(&self, x1: f64) -> f64 {
        let [l11, _, l21, _] = self.likelihoods;
        (self.divergences[0] - self.centrality * l11 * x1) / (self.centrality * l21)
    }

    /// Boundary line where `R_2 = S_2`.
    pub fn r2(&self, x1: f64) -> f64 {
        let [_, l12, _, l22] = self.likelihoods;
        -(self.divergences[1] + self.centrality * l12 * x1) / (self.centrality * l22)
    }

    /// Both inequalities hold strictly and the point lies in the box.
    pub fn contains(&self, x1: f64, x2: f64) -> bool {
        let inside = |x: f64| x > self.x_minus && x < self.x_plus;
        inside(x1)
            && inside(x2)
            && self.r_theta1(x1, x2) > self.divergences[0]
            && self.r_theta2(x1, x2) > self.divergences[1]
    }
}

pub fn distortion_region(
    m: &LikelihoodModel,
    u: f64,
    s1: f64,
    s2: f64,
    eps: f64,
    pair: (usize, usize),
) -> Result<DistortionRegion> {
    if !m.is_informative() {
        return Err(Error::UninformativeModel);
    }
    if !(u > 0.0 && u <= 1.0) {
        return Err(Error::OutOfRange {
            name: "u",
            value: u,
        });
    }
    for (name, s) in [("S1", s1), ("S2", s2)] {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(Error::OutOfRange { name, value: s });
        }
    }
    let n = m.alphabet_size();
    let (i, j) = pair;
    if i == j || i >= n || j >= n {
        return Err(Error::InvalidInput(format!("bad support pair {pair:?}")));
    }
    let d = support_determinant(m, pair);
    if d.abs() <= DEGENERATE_DET {
        return Err(Error::DegeneratePair(i, j));
    }
    let (t1, t2) = (Hypothesis::Theta1, Hypothesis::Theta2);
    let likelihoods = [
        m.likelihood(i, t1),
        m.likelihood(i, t2),
        m.likelihood(j, t1),
        m.likelihood(j, t2),
    ];
    let n1 = m.likelihood(i, t2) * s1 + m.likelihood(i, t1) * s2;
    let n2 = m.likelihood(j, t2) * s1 + m.likelihood(j, t1) * s2;
    let x1_prime = n2 / (u * d);
    let x2_prime = -n1 / (u * d);
    let alpha = 1.0 - (n as f64 - 2.0) * eps;
    let x_plus = ((alpha - eps) / eps).ln();
    let extra = n as f64 - 1.0;
    let epsilon_bound =
        (1.0 / (x1_prime.abs().exp() + extra)).min(1.0 / (x2_prime.abs().exp() + extra));
    let strict_epsilon_bound = (-(x1_prime.abs().max(x2_prime.abs()) + extra)).exp();
    let empty = !(eps > 0.0 && eps < epsilon_bound);
    Ok(DistortionRegion {
        support_pair: pair,
        likelihoods,
        centrality: u,
        divergences: [s1, s2],
        epsilon: eps,
        alphabet_size: n,
        d,
        n1,
        n2,
        x1_prime,
        x2_prime,
        alpha,
        x_minus: -x_plus,
        x_plus,
        epsilon_bound,
        strict_epsilon_bound,
        empty,
    })
}

/// Free choices of the known-divergence construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Selectors {
    /// Position of `x1` inside its admissible open interval, in (0, 1).
    pub x1_fraction: f64,
    /// Position of the slope inside its admissible open interval, in (0, 1).
    pub beta_fraction: f64,
    /// Support pair; the max-determinant pair when absent.
    pub pair: Option<(usize, usize)>,
}

impl Default for Selectors {
    fn default() -> Self {
        Selectors {
            x1_fraction: 0.5,
            beta_fraction: 0.5,
            pair: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnownAttack {
    pub forged: LikelihoodModel,
    pub region: DistortionRegion,
    pub x1: f64,
    pub x2: f64,
    pub beta: f64,
    /// `F(z1|theta2)`.
    pub p1: f64,
    /// `F(z2|theta1)`.
    pub p2: f64,
}

/// `ln|e^x - 1|`.
fn ln_abs_expm1(x: f64) -> f64 {
    if x > 0.0 {
        x + (-(-x).exp()).ln_1p()
    } else {
        (-x.exp_m1()).ln()
    }
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Forged masses `(F(z1|theta1), F(z2|theta1), F(z1|theta2), F(z2|theta2))`
/// for given transformed coordinates.
fn masses_from_coordinates(alpha: f64, x1: f64, x2: f64) -> [f64; 4] {
    let lxy = x1.max(x2) + ln_abs_expm1(-(x1 - x2).abs());
    let (l1, l2) = (ln_abs_expm1(x1), ln_abs_expm1(x2));
    [
        alpha * (l2 - lxy).exp(),
        alpha * (l1 - lxy).exp(),
        alpha * (x1 + l2 - lxy).exp(),
        alpha * (x2 + l1 - lxy).exp(),
    ]
}

/// Two-symbol forgery that satisfies `R_1 > S_1` and `R_2 > S_2`.
///
/// `x1` moves from the apex along a ray of slope `beta` until the floor
/// constraints fail; the admissible stretch is found exactly (the
/// constraints are convex along the ray) and `x1_fraction` picks a point on
/// it. When the ray picked by `beta_fraction` misses the floor-feasible set,
/// other slopes of the cone are scanned and the one reaching deepest into it
/// is used.
pub fn known_divergence_attack(
    m: &LikelihoodModel,
    u: f64,
    s1: f64,
    s2: f64,
    eps: f64,
    selectors: Selectors,
) -> Result<KnownAttack> {
    for (name, f) in [
        ("x1_fraction", selectors.x1_fraction),
        ("beta_fraction", selectors.beta_fraction),
    ] {
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::OutOfRange { name, value: f });
        }
    }
    let pair = match selectors.pair {
        Some(p) => p,
        None => select_support_pair(m)?,
    };
    let region = distortion_region(m, u, s1, s2, eps, pair)?;
    if region.empty {
        return Err(Error::EpsilonTooLarge {
            epsilon: eps,
            bound: region.epsilon_bound,
        });
    }
    let [l11, l12, l21, l22] = region.likelihoods;
    let slope = |a: f64, b: f64| if b > 0.0 { -a / b } else { f64::NEG_INFINITY };
    let (sa, sb) = (slope(l11, l21), slope(l12, l22));
    let (lo, hi) = (sa.min(sb), sa.max(sb));
    let beta = if lo.is_finite() {
        lo + selectors.beta_fraction * (hi - lo)
    } else {
        hi - 1.0
    };
    let attempt = |beta: f64| {
        let ray = Ray::new(&region, eps, beta);
        let (t_left, t_right) = ray.stretch().ok_or(Error::EmptyRegion)?;
        let t = t_left + selectors.x1_fraction * (t_right - t_left);
        if !(t > 0.0 && ray.h(t) < 0.0) {
            return Err(Error::EmptyRegion);
        }
        let (x1, x2) = ray.at(t);
        forge(m, u, [s1, s2], eps, &region, x1, x2, beta)
    };
    let first = attempt(beta);
    if first.is_ok() {
        return first;
    }
    // the feasible set can be a thin sliver along one boundary line, so
    // slopes are spread evenly in angle
    let (a, b) = (lo.atan(), hi.atan());
    let mut scan: Vec<(f64, f64)> = (1..BETA_SCAN)
        .map(|k| (a + (b - a) * k as f64 / BETA_SCAN as f64).tan())
        .filter_map(|beta| {
            let depth = Ray::new(&region, eps, beta).depth()?;
            (depth < 0.0).then_some((depth, beta))
        })
        .collect();
    scan.sort_by(|x, y| x.0.total_cmp(&y.0));
    scan.into_iter()
        .map(|(_, beta)| attempt(beta))
        .find(|r| r.is_ok())
        .unwrap_or(first)
}

const BETA_SCAN: usize = 512;

/// Points `(x1' + t span, x2' + beta t span)` for `t` in `[0, 1]`, with the
/// floor constraints as the convex function `h` (feasible where negative).
struct Ray {
    x1p: f64,
    x2p: f64,
    span: f64,
    beta: f64,
    t_box: f64,
    positive: bool,
    ln_a: f64,
    ln_e: f64,
    ln_ae: f64,
}

impl Ray {
    fn new(region: &DistortionRegion, eps: f64, beta: f64) -> Ray {
        let positive = region.d > 0.0;
        let (x1p, x2p) = (region.x1_prime, region.x2_prime);
        let (end, x2_target) = if positive {
            (region.x_plus, region.x_minus)
        } else {
            (region.x_minus, region.x_plus)
        };
        let span = end - x1p;
        // largest t keeping |x2| within the box
        let t_box = ((x2_target - x2p) / (beta * span)).clamp(0.0, 1.0);
        let alpha = region.alpha;
        Ray {
            x1p,
            x2p,
            span,
            beta,
            t_box: if t_box.is_nan() { 0.0 } else { t_box },
            positive,
            ln_a: alpha.ln(),
            ln_e: eps.ln(),
            ln_ae: (alpha - eps).ln(),
        }
    }

    fn at(&self, t: f64) -> (f64, f64) {
        let x1 = self.x1p + t * self.span;
        (x1, self.x2p + self.beta * (x1 - self.x1p))
    }

    fn h(&self, t: f64) -> f64 {
        let (x1, x2) = self.at(t);
        let (e, ae) = (self.ln_e, self.ln_ae);
        let (g1, g2) = if self.positive {
            (log_sum_exp(e + x1, ae + x2), log_sum_exp(ae - x1, e - x2))
        } else {
            (log_sum_exp(ae + x1, e + x2), log_sum_exp(ae - x2, e - x1))
        };
        g1.max(g2) - self.ln_a
    }

    fn minimum(&self) -> Option<f64> {
        (self.t_box > 0.0).then(|| golden_section_min(&|t| self.h(t), 0.0, self.t_box))
    }

    fn depth(&self) -> Option<f64> {
        self.minimum().map(|t| self.h(t))
    }

    /// Feasible stretch `[t_left, t_right]`.
    fn stretch(&self) -> Option<(f64, f64)> {
        let t_min = self.minimum()?;
        let h = |t: f64| self.h(t);
        if !(h(t_min) < 0.0) {
            return None;
        }
        let t_left = if h(0.0) < 0.0 {
            0.0
        } else {
            bisect_root(&h, 0.0, t_min)
        };
        let t_right = if h(self.t_box) < 0.0 {
            self.t_box
        } else {
            bisect_root(&h, self.t_box, t_min)
        };
        Some((t_left, t_right))
    }
}

#[allow(clippy::too_many_arguments)]
fn forge(
    m: &LikelihoodModel,
    u: f64,
    s: [f64; 2],
    eps: f64,
    region: &DistortionRegion,
    x1: f64,
    x2: f64,
    beta: f64,
) -> Result<KnownAttack> {
    let [f11, f21, f12, f22] = masses_from_coordinates(region.alpha, x1, x2);
    let n = m.alphabet_size();
    let (i, j) = region.support_pair;
    let mut col1 = vec![eps; n];
    let mut col2 = vec![eps; n];
    col1[i] = f11;
    col1[j] = f21;
    col2[i] = f12;
    col2[j] = f22;
    if [f11, f21, f12, f22].iter().any(|&v| !(v >= eps)) {
        return Err(Error::EmptyRegion);
    }
    let forged = LikelihoodModel::new(Pmf::new(col1)?, Pmf::new(col2)?)?;
    for (h, s) in Hypothesis::ALL.into_iter().zip(s) {
        if !(adversary_contribution(u, m, &forged, h) - s > STRICT_MARGIN) {
            return Err(Error::EmptyRegion);
        }
    }
    Ok(KnownAttack {
        forged,
        region: region.clone(),
        x1,
        x2,
        beta,
        p1: f12,
        p2: f21,
    })
}

fn golden_section_min(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
        if b - a <= 1e-15 * (1.0 + a.abs()) {
            break;
        }
    }
    let mid = 0.5 * (a + b);
    [a, b, mid, c, d]
        .into_iter()
        .min_by(|x, y| f(*x).total_cmp(&f(*y)))
        .unwrap_or(mid)
}

/// Root of `f` between `outside` (f >= 0) and `inside` (f < 0), returning a
/// point on the inside.
fn bisect_root(f: &dyn Fn(f64) -> f64, mut outside: f64, mut inside: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (outside + inside);
        if mid == outside || mid == inside {
            break;
        }
        if f(mid) < 0.0 {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}

/// Per-adversary result of [`multi_adversary_known`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MultiOutcome {
    Constructed(KnownAttack),
    /// Uninformative adversary keeps its true model.
    Unchanged(LikelihoodModel),
}

impl MultiOutcome {
    pub fn forged(&self) -> &LikelihoodModel {
        match self {
            MultiOutcome::Constructed(k) => &k.forged,
            MultiOutcome::Unchanged(m) => m,
        }
    }
}

/// Known-divergence construction for several adversaries at once.
pub fn multi_adversary_known(
    models: &[LikelihoodModel],
    u: &[f64],
    s1: f64,
    s2: f64,
    eps: f64,
    selectors: Selectors,
) -> Result<Vec<MultiOutcome>> {
    if models.len() != u.len() {
        return Err(Error::InvalidInput(
            "one centrality per adversary model is required".into(),
        ));
    }
    if !models.iter().any(LikelihoodModel::is_informative) {
        return Err(Error::AllUninformative);
    }
    let mut bound = f64::INFINITY;
    for (m, &uk) in models.iter().zip(u) {
        if m.is_informative() {
            let pair = match selectors.pair {
                Some(p) => p,
                None => select_support_pair(m)?,
            };
            bound = bound.min(distortion_region(m, uk, s1, s2, eps, pair)?.epsilon_bound);
        }
    }
    if !(eps < bound) {
        return Err(Error::EpsilonTooLarge {
            epsilon: eps,
            bound,
        });
    }
    models
        .iter()
        .zip(u)
        .map(|(m, &uk)| {
            if m.is_informative() {
                known_divergence_attack(m, uk, s1, s2, eps, selectors)
                    .map(MultiOutcome::Constructed)
            } else {
                Ok(MultiOutcome::Unchanged(m.clone()))
            }
        })
        .collect()
}

/// Whether some forgery with `F(z1|theta2) = F(z2|theta1)`, i.e. on the line
/// `x2 = -x1`, satisfies both inequalities inside the box.
pub fn one_variable_feasibility(
    m: &LikelihoodModel,
    u: f64,
    s1: f64,
    s2: f64,
    eps: f64,
    pair: (usize, usize),
) -> Result<bool> {
    let region = distortion_region(m, u, s1, s2, eps, pair)?;
    if region.empty {
        return Ok(false);
    }
    // on x2 = -x1 the inequalities read c1 x > S1 and c2 x > S2
    let [l11, l12, l21, l22] = region.likelihoods;
    let c1 = u * (l11 - l21);
    let c2 = u * (l22 - l12);
    let mut lo = region.x_minus;
    let mut hi = region.x_plus;
    for (c, s) in [(c1, s1), (c2, s2)] {
        let s = s + STRICT_MARGIN;
        if c > 0.0 {
            lo = lo.max(s / c);
        } else if c < 0.0 {
            hi = hi.min(s / c);
        } else if s >= 0.0 {
            return Ok(false);
        }
    }
    Ok(lo < hi)
}

/// Two independent uniform draws from the simplex, mapped affinely onto the
/// floored simplex `{x : x >= eps, sum x = 1}`.
pub fn random_attack<R: Rng + ?Sized>(
    m: &LikelihoodModel,
    eps: f64,
    rng: &mut R,
) -> Result<LikelihoodModel> {
    let n = m.alphabet_size();
    check_epsilon(eps, n)?;
    let mut draw = || -> Result<Pmf> {
        let e: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
        let total: f64 = e.iter().sum();
        let scale = 1.0 - n as f64 * eps;
        Pmf::new(e.iter().map(|x| eps + scale * x / total).collect())
    };
    let theta1 = draw()?;
    let theta2 = draw()?;
    LikelihoodModel::new(theta1, theta2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    KnownDivergences,
    UnknownDivergences,
    Random,
    None,
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Strategy::KnownDivergences => "known_divergences",
            Strategy::UnknownDivergences => "unknown_divergences",
            Strategy::Random => "random",
            Strategy::None => "none",
        })
    }
}

/// Parameters that reproduce a known-divergence forgery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnownParams {
    pub support_pair: (usize, usize),
    pub centrality: f64,
    pub x1: f64,
    pub x2: f64,
    pub beta: f64,
    pub p1: f64,
    pub p2: f64,
    pub alpha: f64,
    pub epsilon_bound: f64,
}

impl From<&KnownAttack> for KnownParams {
    fn from(k: &KnownAttack) -> Self {
        KnownParams {
            support_pair: k.region.support_pair,
            centrality: k.region.centrality,
            x1: k.x1,
            x2: k.x2,
            beta: k.beta,
            p1: k.p1,
            p2: k.p2,
            alpha: k.region.alpha,
            epsilon_bound: k.region.epsilon_bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversaryForgery {
    pub agent: usize,
    pub forged: LikelihoodModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub known: Option<KnownParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackPlan {
    pub strategy: Strategy,
    pub epsilon: f64,
    /// Seed of the random strategy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Divergences `[S1, S2]` the known-divergence construction targeted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub divergences: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selectors: Option<Selectors>,
    pub aggregate_centrality: bool,
    pub adversaries: Vec<AdversaryForgery>,
}
