//! Combination matrices, roles and Perron centrality.
//!
//! Entry `(l, k)` of the combination matrix is the weight agent `k` puts on
//! neighbor `l`, so every column sums to one.

mod topology;

pub use topology::Topology;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const STOCHASTIC_TOL: f64 = 1e-12;
const PERRON_TOL: f64 = 1e-13;
const PERRON_MAX_ITER: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Normal,
    Malicious,
}

impl std::fmt::Display for Role {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Role::Normal => "normal",
            Role::Malicious => "malicious",
        })
    }
}

/// Square matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct CombinationMatrix {
    n: usize,
    data: Vec<f64>,
}

impl CombinationMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidInput("combination matrix is empty".into()));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput(
                "combination matrix is not square".into(),
            ));
        }
        Ok(CombinationMatrix {
            n,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for k in 0..n {
            data[k * n + k] = 1.0;
        }
        CombinationMatrix { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `a_{lk}`.
    #[inline]
    pub fn get(&self, l: usize, k: usize) -> f64 {
        self.data[l * self.n + k]
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        (0..self.n).map(|l| self.get(l, k)).collect()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    /// `A v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.data
            .chunks(self.n)
            .map(|row| row.iter().zip(v).map(|(a, x)| a * x).sum())
            .collect()
    }

    /// `A^T v`.
    pub fn apply_transpose(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|k| (0..self.n).map(|l| self.get(l, k) * v[l]).sum())
            .collect()
    }

    /// Relabels agents: agent `i` of the result is agent `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] = self.get(perm[i], perm[j]);
            }
        }
        CombinationMatrix { n, data }
    }
}

impl TryFrom<Vec<Vec<f64>>> for CombinationMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        CombinationMatrix::from_rows(rows)
    }
}

impl From<CombinationMatrix> for Vec<Vec<f64>> {
    fn from(m: CombinationMatrix) -> Self {
        m.rows()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NotLeftStochastic {
        column: usize,
        sum: f64,
    },
    EntryOutOfRange {
        row: usize,
        column: usize,
        value: f64,
    },
    NotStronglyConnected,
    NoSelfLoop,
    NoNormalAgent,
    AdversariesNotFirst,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    combination: CombinationMatrix,
    roles: Vec<Role>,
}

impl Network {
    /// Builds a network and rejects it unless [`Network::validate`] is clean.
    pub fn new(combination: CombinationMatrix, roles: Vec<Role>) -> Result<Self> {
        let net = Network::from_parts(combination, roles)?;
        let violations = net.validate();
        if violations.is_empty() {
            Ok(net)
        } else {
            Err(Error::InvalidNetwork(violations))
        }
    }

    /// Only checks that the shapes agree.
    pub fn from_parts(combination: CombinationMatrix, roles: Vec<Role>) -> Result<Self> {
        if roles.len() != combination.n() {
            return Err(Error::InvalidInput(format!(
                "{} roles for {} agents",
                roles.len(),
                combination.n()
            )));
        }
        Ok(Network { combination, roles })
    }

    pub fn n_agents(&self) -> usize {
        self.roles.len()
    }

    pub fn combination(&self) -> &CombinationMatrix {
        &self.combination
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn role(&self, k: usize) -> Role {
        self.roles[k]
    }

    pub fn validate(&self) -> Vec<Violation> {
        validate(self)
    }

    pub fn permuted(&self, perm: &[usize]) -> Network {
        Network {
            combination: self.combination.permuted(perm),
            roles: perm.iter().map(|&j| self.roles[j]).collect(),
        }
    }
}

/// Uniform weights over each closed neighborhood.
pub fn uniform_combination(
    adjacency: &[Vec<bool>],
    self_loops: &[bool],
) -> Result<CombinationMatrix> {
    let n = adjacency.len();
    if self_loops.len() != n || adjacency.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidInput(
            "adjacency must be square and match the self-loop mask".into(),
        ));
    }
    for i in 0..n {
        for j in 0..i {
            if adjacency[i][j] != adjacency[j][i] {
                return Err(Error::InvalidInput(format!(
                    "adjacency is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    let linked = |l: usize, k: usize| {
        if l == k {
            self_loops[k]
        } else {
            adjacency[l][k]
        }
    };
    let mut rows = vec![vec![0.0; n]; n];
    for k in 0..n {
        let degree = (0..n).filter(|&l| linked(l, k)).count();
        if degree == 0 {
            return Err(Error::IsolatedAgent(k));
        }
        let w = 1.0 / degree as f64;
        for (l, row) in rows.iter_mut().enumerate() {
            if linked(l, k) {
                row[k] = w;
            }
        }
    }
    CombinationMatrix::from_rows(rows)
}

pub fn validate(net: &Network) -> Vec<Violation> {
    let a = &net.combination;
    let n = a.n();
    let mut out = Vec::new();
    for l in 0..n {
        for k in 0..n {
            let v = a.get(l, k);
            if !(0.0..=1.0).contains(&v) {
                out.push(Violation::EntryOutOfRange {
                    row: l,
                    column: k,
                    value: v,
                });
            }
        }
    }
    for k in 0..n {
        let sum: f64 = (0..n).map(|l| a.get(l, k)).sum();
        if !((sum - 1.0).abs() <= STOCHASTIC_TOL) {
            out.push(Violation::NotLeftStochastic { column: k, sum });
        }
    }
    if !strongly_connected(a) {
        out.push(Violation::NotStronglyConnected);
    }
    if !(0..n).any(|k| a.get(k, k) > 0.0) {
        out.push(Violation::NoSelfLoop);
    }
    if !net.roles.contains(&Role::Normal) {
        out.push(Violation::NoNormalAgent);
    }
    if net
        .roles
        .windows(2)
        .any(|w| w[0] == Role::Normal && w[1] == Role::Malicious)
    {
        out.push(Violation::AdversariesNotFirst);
    }
    out
}

fn strongly_connected(a: &CombinationMatrix) -> bool {
    let n = a.n();
    let sweep = |forward: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for w in 0..n {
                let w_edge = if forward { a.get(v, w) } else { a.get(w, v) };
                if w_edge > 0.0 && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    sweep(true) && sweep(false)
}

/// Positive eigenvector of `A` for eigenvalue one, normalized to sum one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PerronVector {
    u: Vec<f64>,
}

impl PerronVector {
    pub fn entries(&self) -> &[f64] {
        &self.u
    }

    pub fn get(&self, k: usize) -> f64 {
        self.u[k]
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }
}

pub fn perron_vector(net: &Network) -> Result<PerronVector> {
    let violations = net.validate();
    if !violations.is_empty() {
        return Err(Error::InvalidNetwork(violations));
    }
    perron_of(net.combination())
}

/// Power iteration without the role checks of [`perron_vector`].
pub fn perron_of(a: &CombinationMatrix) -> Result<PerronVector> {
    let n = a.n();
    let mut u = vec![1.0 / n as f64; n];
    for _ in 0..PERRON_MAX_ITER {
        let next = a.apply(&u);
        let diff = next
            .iter()
            .zip(&u)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        u = next;
        if diff < PERRON_TOL {
            let s: f64 = u.iter().sum();
            u.iter_mut().for_each(|x| *x /= s);
            return Ok(PerronVector { u });
        }
    }
    Err(Error::NoConvergence(PERRON_MAX_ITER))
}

/// Total centrality of the malicious agents.
pub fn adversary_centrality(u: &PerronVector, roles: &[Role]) -> f64 {
    u.u.iter()
        .zip(roles)
        .filter(|(_, r)| **r == Role::Malicious)
        .fold(0.0, |acc, (x, _)| acc + x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: usize) -> Vec<Vec<bool>> {
        (0..n).map(|i| (0..n).map(|j| i != j).collect()).collect()
    }

    fn star(n: usize) -> Vec<Vec<bool>> {
        (0..n)
            .map(|i| (0..n).map(|j| i != j && (i == 0 || j == 0)).collect())
            .collect()
    }

    fn path(n: usize) -> Vec<Vec<bool>> {
        (0..n)
            .map(|i| (0..n).map(|j| i.abs_diff(j) == 1).collect())
            .collect()
    }

    #[test]
    fn uniform_combination_examples() {
        let a = uniform_combination(&complete(2), &[true, true]).unwrap();
        assert!(a.rows().iter().flatten().all(|&x| x == 0.5));

        let a = uniform_combination(&star(15), &[true; 15]).unwrap();
        assert!(a.column(0).iter().all(|&x| x == 1.0 / 15.0));
        assert_eq!(a.column(3)[0], 0.5);
        assert_eq!(a.column(3)[3], 0.5);

        let a = uniform_combination(&path(3), &[true; 3]).unwrap();
        assert_eq!(a.column(1), vec![1.0 / 3.0; 3]);
        assert_eq!(a.column(0), vec![0.5, 0.5, 0.0]);

        let mut iso = path(3);
        iso[1][2] = false;
        iso[2][1] = false;
        assert_eq!(
            uniform_combination(&iso, &[true, true, false]),
            Err(Error::IsolatedAgent(2))
        );
        let mut asym = path(3);
        asym[0][2] = true;
        assert!(matches!(
            uniform_combination(&asym, &[true; 3]),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn validate_examples() {
        let mut adj = vec![vec![false; 4]; 4];
        adj[0][1] = true;
        adj[1][0] = true;
        adj[2][3] = true;
        adj[3][2] = true;
        let a = uniform_combination(&adj, &[true; 4]).unwrap();
        let net = Network::from_parts(a, vec![Role::Normal; 4]).unwrap();
        assert_eq!(net.validate(), vec![Violation::NotStronglyConnected]);

        let a = uniform_combination(&star(15), &[true; 15]).unwrap();
        let mut roles = vec![Role::Normal; 15];
        roles[0] = Role::Malicious;
        assert!(Network::new(a, roles).is_ok());

        let a = CombinationMatrix::from_rows(vec![vec![0.5, 0.5], vec![0.4, 0.5]]).unwrap();
        let net = Network::from_parts(a, vec![Role::Normal; 2]).unwrap();
        assert_eq!(
            net.validate(),
            vec![Violation::NotLeftStochastic {
                column: 0,
                sum: 0.9
            }]
        );

        let a = CombinationMatrix::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let net = Network::from_parts(a, vec![Role::Normal, Role::Malicious]).unwrap();
        assert_eq!(
            net.validate(),
            vec![Violation::NoSelfLoop, Violation::AdversariesNotFirst]
        );

        let a = CombinationMatrix::identity(1);
        let net = Network::from_parts(a, vec![Role::Malicious]).unwrap();
        assert_eq!(net.validate(), vec![Violation::NoNormalAgent]);
    }

    #[test]
    fn perron_examples() {
        let a = CombinationMatrix::from_rows(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let net = Network::new(a, vec![Role::Normal; 2]).unwrap();
        assert_eq!(perron_vector(&net).unwrap().entries(), &[0.5, 0.5]);

        let mut cyc = path(3);
        cyc[0][2] = true;
        cyc[2][0] = true;
        let net = Network::new(
            uniform_combination(&cyc, &[true; 3]).unwrap(),
            vec![Role::Normal; 3],
        )
        .unwrap();
        let u = perron_vector(&net).unwrap();
        assert!(u.entries().iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-14));
    }

    #[test]
    fn star_perron_is_degree_share() {
        let net = Network::new(
            uniform_combination(&star(15), &[true; 15]).unwrap(),
            vec![Role::Normal; 15],
        )
        .unwrap();
        let u = perron_vector(&net).unwrap();
        // closed neighbourhood sizes: hub 15, leaves 2; total 43
        assert!((u.get(0) - 15.0 / 43.0).abs() < 1e-12);
        assert!((u.get(7) - 2.0 / 43.0).abs() < 1e-12);
        let residual = net
            .combination()
            .apply(u.entries())
            .iter()
            .zip(u.entries())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(residual < 1e-10);
    }

    #[test]
    fn centrality_examples() {
        let net = Network::new(
            uniform_combination(&star(15), &[true; 15]).unwrap(),
            vec![Role::Normal; 15],
        )
        .unwrap();
        let u = perron_vector(&net).unwrap();
        assert_eq!(adversary_centrality(&u, &[Role::Normal; 15]), 0.0);
        assert!((adversary_centrality(&u, &[Role::Malicious; 15]) - 1.0).abs() < 1e-12);
        let mut roles = vec![Role::Normal; 15];
        roles[0] = Role::Malicious;
        assert_eq!(adversary_centrality(&u, &roles), u.get(0));
    }

    #[test]
    fn invalid_network_has_no_perron_vector() {
        let a = CombinationMatrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let net = Network::from_parts(a, vec![Role::Normal; 2]).unwrap();
        assert!(matches!(perron_vector(&net), Err(Error::InvalidNetwork(_))));
    }
}
