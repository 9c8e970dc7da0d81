//! Finite-alphabet distributions and binary observation models.
//!
//! All logarithms are natural.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance applied when validating user-supplied mass vectors.
pub const INPUT_TOL: f64 = 1e-9;
/// Tolerance for comparisons between computed quantities.
pub const INVARIANT_TOL: f64 = 1e-12;

/// Probability mass function over `0..len()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Pmf {
    mass: Vec<f64>,
}

impl Pmf {
    /// Validates `mass` without renormalizing it.
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        if mass.len() < 2 {
            return Err(Error::AlphabetTooSmall(mass.len()));
        }
        for (index, &value) in mass.iter().enumerate() {
            if value.is_nan() || value < 0.0 {
                return Err(Error::NegativeMass { index, value });
            }
        }
        let sum: f64 = mass.iter().sum();
        if !((sum - 1.0).abs() <= INPUT_TOL) {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Pmf { mass })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Pmf::new(vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn get(&self, symbol: usize) -> f64 {
        self.mass[symbol]
    }

    /// Draws one symbol by inverting the cumulative distribution.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let target: f64 = rng.random();
        let mut acc = 0.0;
        let mut last_positive = 0;
        for (i, &m) in self.mass.iter().enumerate() {
            if m > 0.0 {
                acc += m;
                last_positive = i;
                if target < acc {
                    return i;
                }
            }
        }
        // rounding left the cumulative sum just below target
        last_positive
    }

    /// Relabels symbols: entry `i` of the result is entry `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Pmf {
        Pmf {
            mass: perm.iter().map(|&j| self.mass[j]).collect(),
        }
    }
}

impl TryFrom<Vec<f64>> for Pmf {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Pmf::new(v)
    }
}

impl From<Pmf> for Vec<f64> {
    fn from(p: Pmf) -> Vec<f64> {
        p.mass
    }
}

/// Convenience wrapper over [`Pmf::new`].
pub fn make_pmf(mass: &[f64]) -> Result<Pmf> {
    Pmf::new(mass.to_vec())
}

/// `D(p || q)` in nats.
pub fn kl_divergence(p: &Pmf, q: &Pmf) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::AlphabetMismatch(p.len(), q.len()));
    }
    let mut total = 0.0;
    for (i, (&pi, &qi)) in p.mass.iter().zip(&q.mass).enumerate() {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return Err(Error::InfiniteDivergence(i));
        }
        total += pi * (pi / qi).ln();
    }
    // Jensen guarantees non-negativity; clip the rounding residue
    Ok(total.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    Theta1,
    Theta2,
}

impl Hypothesis {
    pub const ALL: [Hypothesis; 2] = [Hypothesis::Theta1, Hypothesis::Theta2];

    pub fn index(self) -> usize {
        match self {
            Hypothesis::Theta1 => 0,
            Hypothesis::Theta2 => 1,
        }
    }

    pub fn other(self) -> Hypothesis {
        match self {
            Hypothesis::Theta1 => Hypothesis::Theta2,
            Hypothesis::Theta2 => Hypothesis::Theta1,
        }
    }
}

impl std::fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Hypothesis::Theta1 => "theta1",
            Hypothesis::Theta2 => "theta2",
        })
    }
}

/// Pair of per-state observation distributions, either true or forged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel", into = "RawModel")]
pub struct LikelihoodModel {
    given_theta1: Pmf,
    given_theta2: Pmf,
}

#[derive(Serialize, Deserialize)]
struct RawModel {
    theta1: Pmf,
    theta2: Pmf,
}

impl TryFrom<RawModel> for LikelihoodModel {
    type Error = Error;
    fn try_from(r: RawModel) -> Result<Self> {
        LikelihoodModel::new(r.theta1, r.theta2)
    }
}

impl From<LikelihoodModel> for RawModel {
    fn from(m: LikelihoodModel) -> RawModel {
        RawModel {
            theta1: m.given_theta1,
            theta2: m.given_theta2,
        }
    }
}

impl LikelihoodModel {
    pub fn new(given_theta1: Pmf, given_theta2: Pmf) -> Result<Self> {
        if given_theta1.len() != given_theta2.len() {
            return Err(Error::AlphabetMismatch(
                given_theta1.len(),
                given_theta2.len(),
            ));
        }
        Ok(LikelihoodModel {
            given_theta1,
            given_theta2,
        })
    }

    pub fn from_rows(theta1: &[f64], theta2: &[f64]) -> Result<Self> {
        LikelihoodModel::new(make_pmf(theta1)?, make_pmf(theta2)?)
    }

    pub fn given(&self, h: Hypothesis) -> &Pmf {
        match h {
            Hypothesis::Theta1 => &self.given_theta1,
            Hypothesis::Theta2 => &self.given_theta2,
        }
    }

    pub fn alphabet_size(&self) -> usize {
        self.given_theta1.len()
    }

    /// `L(symbol | h)`.
    pub fn likelihood(&self, symbol: usize, h: Hypothesis) -> f64 {
        self.given(h).get(symbol)
    }

    /// Likelihoods of `symbol` under (theta1, theta2).
    pub fn row(&self, symbol: usize) -> [f64; 2] {
        [self.given_theta1.get(symbol), self.given_theta2.get(symbol)]
    }

    pub fn is_informative(&self) -> bool {
        is_informative(self)
    }

    /// Swaps the two hypotheses.
    pub fn swapped_states(&self) -> LikelihoodModel {
        LikelihoodModel {
            given_theta1: self.given_theta2.clone(),
            given_theta2: self.given_theta1.clone(),
        }
    }

    /// Relabels symbols in both columns (see [`Pmf::permuted`]).
    pub fn permuted(&self, perm: &[usize]) -> LikelihoodModel {
        LikelihoodModel {
            given_theta1: self.given_theta1.permuted(perm),
            given_theta2: self.given_theta2.permuted(perm),
        }
    }

    /// Smallest entry over both columns.
    pub fn min_entry(&self) -> f64 {
        self.given_theta1
            .mass()
            .iter()
            .chain(self.given_theta2.mass())
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Binary symmetric channel with `L(z1|theta1) = L(z2|theta2) = p`.
pub fn bsc_model(p: f64) -> Result<LikelihoodModel> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::OutOfRange {
            name: "p",
            value: p,
        });
    }
    LikelihoodModel::from_rows(&[p, 1.0 - p], &[1.0 - p, p])
}

pub fn is_informative(m: &LikelihoodModel) -> bool {
    m.given_theta1
        .mass()
        .iter()
        .zip(m.given_theta2.mass())
        .any(|(a, b)| (a - b).abs() > INVARIANT_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn make_pmf_examples() {
        assert!(make_pmf(&[0.5, 0.5]).is_ok());
        assert!(make_pmf(&[0.8, 0.2]).is_ok());
        assert!(matches!(
            make_pmf(&[0.5, 0.6]),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(
            make_pmf(&[1.2, -0.2]),
            Err(Error::NegativeMass { index: 1, .. })
        ));
        assert!(matches!(make_pmf(&[1.0]), Err(Error::AlphabetTooSmall(1))));
        assert!(matches!(
            make_pmf(&[f64::NAN, 1.0]),
            Err(Error::NegativeMass { .. })
        ));
        // within input tolerance, kept as given
        let p = make_pmf(&[0.5, 0.5 + 5e-10]).unwrap();
        assert_eq!(p.get(1), 0.5 + 5e-10);
    }

    #[test]
    fn kl_examples() {
        let p = make_pmf(&[0.8, 0.2]).unwrap();
        let q = make_pmf(&[0.2, 0.8]).unwrap();
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
        let direct = 0.8 * (0.8f64 / 0.2).ln() + 0.2 * (0.2f64 / 0.8).ln();
        let d = kl_divergence(&p, &q).unwrap();
        assert!((d - direct).abs() < 1e-15);
        assert!((d - 0.6 * 4f64.ln()).abs() < 1e-15);
        assert!((d - 0.831776617).abs() < 1e-9);

        let p = make_pmf(&[0.9, 0.1]).unwrap();
        let q = make_pmf(&[0.1, 0.9]).unwrap();
        assert!((kl_divergence(&p, &q).unwrap() - 0.8 * 9f64.ln()).abs() < 1e-15);
        assert!((kl_divergence(&p, &q).unwrap() - 1.7577796619).abs() < 1e-9);
    }

    #[test]
    fn kl_zero_handling() {
        let p = make_pmf(&[1.0, 0.0]).unwrap();
        let q = make_pmf(&[0.5, 0.5]).unwrap();
        assert!((kl_divergence(&p, &q).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(kl_divergence(&q, &p), Err(Error::InfiniteDivergence(1)));
        let r = make_pmf(&[0.2, 0.3, 0.5]).unwrap();
        assert!(matches!(
            kl_divergence(&p, &r),
            Err(Error::AlphabetMismatch(2, 3))
        ));
    }

    #[test]
    fn sample_degenerate_and_deterministic() {
        let p = make_pmf(&[1.0, 0.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!((0..10_000).all(|_| p.sample(&mut rng) == 0));
        let p = make_pmf(&[0.0, 0.3, 0.0, 0.7, 0.0]).unwrap();
        assert!((0..10_000).all(|_| matches!(p.sample(&mut rng), 1 | 3)));

        let q = make_pmf(&[0.2, 0.3, 0.5]).unwrap();
        let mut a = ChaCha8Rng::seed_from_u64(42);
        let mut b = ChaCha8Rng::seed_from_u64(42);
        let xs: Vec<usize> = (0..1000).map(|_| q.sample(&mut a)).collect();
        let ys: Vec<usize> = (0..1000).map(|_| q.sample(&mut b)).collect();
        assert_eq!(xs, ys);
    }

    #[test]
    fn sample_fair_coin_frequency() {
        let p = make_pmf(&[0.5, 0.5]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 1_000_000;
        let zeros = (0..n).filter(|_| p.sample(&mut rng) == 0).count();
        let f = zeros as f64 / n as f64;
        assert!((0.498..=0.502).contains(&f), "frequency {f}");
    }

    #[test]
    fn bsc_examples() {
        let m = bsc_model(0.9).unwrap();
        assert_eq!(m.given(Hypothesis::Theta1).mass(), &[0.9, 1.0 - 0.9]);
        assert_eq!(m.given(Hypothesis::Theta2).mass(), &[1.0 - 0.9, 0.9]);
        assert!(m.is_informative());
        assert!(!bsc_model(0.5).unwrap().is_informative());
        let m = bsc_model(0.8).unwrap();
        assert_eq!(m.row(0), [0.8, 1.0 - 0.8]);
        assert!(bsc_model(1.0).is_err());
        assert!(bsc_model(0.0).is_err());
        let third = 1.0 / 3.0;
        let u = LikelihoodModel::from_rows(&[third; 3], &[third; 3]).unwrap();
        assert!(!is_informative(&u));
    }

    #[test]
    fn serde_plain_arrays() {
        let m = bsc_model(0.8).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(
            s,
            r#"{"theta1":[0.8,0.19999999999999996],"theta2":[0.19999999999999996,0.8]}"#
        );
        let back: LikelihoodModel = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<Pmf>("[0.5, 0.6]").is_err());
    }
}
