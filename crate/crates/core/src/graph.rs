// SPDX-License-Identifier: Apache-2.0

//! Networks, node sets and certified game specifications.
//!
//! A [`Network`] is an undirected simple graph with a dense 0/1 adjacency
//! matrix. Nodes are addressed internally by their rank under
//! [`natural_cmp`] of the labels, so every index-based tie-break downstream
//! is deterministic.
//!
//! A [`GameSpec`] couples a network with characteristics `theta` and a
//! synergy `delta`. Construction certifies `delta * lambda_max < 1 - 1e-9`
//! and caches a Cholesky factorization of `I - delta G`, which every
//! equilibrium computation reuses.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// Safety margin on the spectral condition.
pub const SPECTRAL_MARGIN: f64 = 1e-9;

const POWER_TOL: f64 = 1e-12;
const POWER_MAX_ITER: usize = 10_000;

/// Orders labels so that runs of ASCII digits compare numerically
/// ("2" < "10"). Labels that compare equal that way fall back to byte order,
/// so the result is a total order.
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    let (mut x, mut y) = (a.as_bytes(), b.as_bytes());
    loop {
        match (x.first(), y.first()) {
            (None, None) => return a.cmp(b),
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some(cx), Some(cy)) => {
                if cx.is_ascii_digit() && cy.is_ascii_digit() {
                    let nx = x.iter().take_while(|c| c.is_ascii_digit()).count();
                    let ny = y.iter().take_while(|c| c.is_ascii_digit()).count();
                    let dx = trim_zeros(&x[..nx]);
                    let dy = trim_zeros(&y[..ny]);
                    let ord = dx.len().cmp(&dy.len()).then_with(|| dx.cmp(dy));
                    if ord != Ordering::Equal {
                        return ord;
                    }
                    x = &x[nx..];
                    y = &y[ny..];
                } else {
                    let ord = cx.cmp(cy);
                    if ord != Ordering::Equal {
                        return ord;
                    }
                    x = &x[1..];
                    y = &y[1..];
                }
            }
        }
    }
}

fn trim_zeros(d: &[u8]) -> &[u8] {
    let k = d.iter().take_while(|&&c| c == b'0').count();
    &d[k..]
}

fn check_label(label: &str) -> Result<()> {
    if label.is_empty() || label.contains('#') || label.chars().any(char::is_whitespace) {
        return Err(Error::InvalidNetwork(format!(
            "label `{label}` must be nonempty and contain no whitespace or `#`"
        )));
    }
    Ok(())
}

/// Undirected simple graph over labelled nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    labels: Vec<String>,
    index: BTreeMap<String, usize>,
    adjacency: DMatrix<f64>,
    neighbors: Vec<Vec<usize>>,
}

impl Network {
    /// Builds a network from node labels and label pairs. Labels appearing
    /// only in `edges` are added automatically; duplicate edges collapse.
    pub fn from_edges<L, E, S>(labels: L, edges: E) -> Result<Network>
    where
        L: IntoIterator<Item = S>,
        E: IntoIterator<Item = (S, S)>,
        S: Into<String>,
    {
        let mut names: BTreeSet<String> = BTreeSet::new();
        for l in labels {
            let l = l.into();
            check_label(&l)?;
            names.insert(l);
        }
        let mut pairs = Vec::new();
        for (u, v) in edges {
            let (u, v) = (u.into(), v.into());
            check_label(&u)?;
            check_label(&v)?;
            if u == v {
                return Err(Error::SelfLoop { line: 0, label: u });
            }
            names.insert(u.clone());
            names.insert(v.clone());
            pairs.push((u, v));
        }
        let mut labels: Vec<String> = names.into_iter().collect();
        labels.sort_by(|a, b| natural_cmp(a, b));
        let index: BTreeMap<String, usize> = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect();
        let n = labels.len();
        let mut adjacency = DMatrix::zeros(n, n);
        for (u, v) in &pairs {
            let (i, j) = (index[u], index[v]);
            adjacency[(i, j)] = 1.0;
            adjacency[(j, i)] = 1.0;
        }
        Ok(Self::assemble(labels, index, adjacency))
    }

    fn assemble(
        labels: Vec<String>,
        index: BTreeMap<String, usize>,
        adjacency: DMatrix<f64>,
    ) -> Network {
        let n = labels.len();
        let neighbors = (0..n)
            .map(|i| (0..n).filter(|&j| adjacency[(i, j)] != 0.0).collect())
            .collect();
        Network {
            labels,
            index,
            adjacency,
            neighbors,
        }
    }

    /// Same labels, new adjacency. Caller guarantees symmetry and 0/1 entries.
    pub(crate) fn with_adjacency(&self, adjacency: DMatrix<f64>) -> Network {
        debug_assert_eq!(adjacency.nrows(), self.n());
        Self::assemble(self.labels.clone(), self.index.clone(), adjacency)
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.adjacency
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[(i, j)] != 0.0
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    /// Edges as index pairs `(i, j)` with `i < j`, ascending.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n() {
            for &j in &self.neighbors[i] {
                if i < j {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Sub-network induced by `keep`, with the original labels.
    pub fn induced(&self, keep: &NodeSet) -> Network {
        let labels: Vec<String> = keep.iter().map(|i| self.labels[i].clone()).collect();
        let index = labels
            .iter()
            .enumerate()
            .map(|(k, l)| (l.clone(), k))
            .collect();
        let idx = keep.as_slice();
        let adjacency = DMatrix::from_fn(idx.len(), idx.len(), |r, c| {
            self.adjacency[(idx[r], idx[c])]
        });
        Self::assemble(labels, index, adjacency)
    }

    /// Union of two networks with disjoint label sets and no edges between them.
    pub fn disjoint_union(&self, other: &Network) -> Result<Network> {
        if let Some(dup) = self.labels.iter().find(|l| other.index.contains_key(*l)) {
            return Err(Error::InvalidNetwork(format!(
                "label `{dup}` appears in both networks"
            )));
        }
        let labels = self.labels.iter().chain(other.labels.iter()).cloned();
        let edges = self
            .edges()
            .into_iter()
            .map(|(i, j)| (self.labels[i].clone(), self.labels[j].clone()))
            .chain(
                other
                    .edges()
                    .into_iter()
                    .map(|(i, j)| (other.labels[i].clone(), other.labels[j].clone())),
            )
            .collect::<Vec<_>>();
        Network::from_edges(labels, edges)
    }

    /// Canonical edge-list text: edges ascending by endpoint order, then
    /// isolated nodes one per line.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for (i, j) in self.edges() {
            let _ = writeln!(out, "{} {}", self.labels[i], self.labels[j]);
        }
        for i in 0..self.n() {
            if self.degree(i) == 0 {
                let _ = writeln!(out, "{}", self.labels[i]);
            }
        }
        out
    }
}

/// Parses whitespace-separated edge-list text. `#` starts a comment, a line
/// with one label declares a (possibly isolated) node.
pub fn parse_edge_list(text: &str) -> Result<Network> {
    let mut labels = Vec::new();
    let mut edges = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let body = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = body.split_whitespace().collect();
        match tokens.as_slice() {
            [] => {}
            [u] => labels.push(u.to_string()),
            [u, v] => {
                if u == v {
                    return Err(Error::SelfLoop {
                        line: line_no,
                        label: u.to_string(),
                    });
                }
                edges.push((u.to_string(), v.to_string()));
            }
            _ => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected `u v` or `u`, found {} fields", tokens.len()),
                })
            }
        }
    }
    Network::from_edges(labels, edges)
}

/// Sorted, duplicate-free set of node indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, serde::Serialize)]
#[serde(transparent)]
pub struct NodeSet(Vec<usize>);

impl NodeSet {
    /// Validates that every member lies in `0..n`; sorts and deduplicates.
    pub fn new(members: impl IntoIterator<Item = usize>, n: usize) -> Result<NodeSet> {
        let mut v: Vec<usize> = members.into_iter().collect();
        if let Some(&bad) = v.iter().find(|&&i| i >= n) {
            return Err(Error::Precondition(format!(
                "node index {bad} out of range for {n} nodes"
            )));
        }
        v.sort_unstable();
        v.dedup();
        Ok(NodeSet(v))
    }

    pub(crate) fn from_sorted(v: Vec<usize>) -> NodeSet {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        NodeSet(v)
    }

    pub fn from_labels<S: AsRef<str>>(net: &Network, labels: &[S]) -> Result<NodeSet> {
        let idx = labels
            .iter()
            .map(|l| net.index_of(l.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        NodeSet::new(idx, net.n())
    }

    pub fn all(n: usize) -> NodeSet {
        NodeSet((0..n).collect())
    }

    pub fn complement(&self, n: usize) -> NodeSet {
        NodeSet(
            (0..n)
                .filter(|i| self.0.binary_search(i).is_err())
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn is_disjoint(&self, other: &NodeSet) -> bool {
        self.0.iter().all(|i| !other.contains(*i))
    }

    pub fn union(&self, other: &NodeSet) -> NodeSet {
        let mut v: Vec<usize> = self.0.iter().chain(other.0.iter()).copied().collect();
        v.sort_unstable();
        v.dedup();
        NodeSet(v)
    }

    pub fn labels<'a>(&self, net: &'a Network) -> Vec<&'a str> {
        self.0.iter().map(|&i| net.label(i)).collect()
    }
}

/// Largest adjacency eigenvalue by shifted power iteration.
///
/// Iterates on `G + I` from an all-ones start and reports the Rayleigh
/// quotient of `G`.
pub fn spectral_radius(net: &Network) -> f64 {
    adjacency_spectral_radius(net.adjacency())
}

pub(crate) fn adjacency_spectral_radius(g: &DMatrix<f64>) -> f64 {
    let n = g.nrows();
    if n == 0 || g.iter().all(|&x| x == 0.0) {
        return 0.0;
    }
    let mut x = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut quotient = f64::NAN;
    for _ in 0..POWER_MAX_ITER {
        let gx = g * &x;
        let next = gx.dot(&x);
        let y = &gx + &x;
        let norm = y.norm();
        x = y / norm;
        let converged = (next - quotient).abs() < POWER_TOL;
        quotient = next;
        if converged {
            break;
        }
    }
    let gx = g * &x;
    gx.dot(&x)
}

/// Certified linear-quadratic network game.
#[derive(Debug, Clone)]
pub struct GameSpec {
    network: Network,
    theta: DVector<f64>,
    delta: f64,
    lambda_max: f64,
    factor: Cholesky<f64, Dyn>,
    b: DVector<f64>,
    b_unit: DVector<f64>,
}

/// Certifies `net` at synergy `delta` with `theta = 1`.
pub fn certify(net: Network, delta: f64) -> Result<GameSpec> {
    GameSpec::new(net, None, delta)
}

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::Precondition(format!(
            "delta must be a positive finite number, got {delta}"
        )));
    }
    Ok(())
}

/// Checks `delta * lambda < 1 - SPECTRAL_MARGIN`.
pub(crate) fn check_spectral(lambda_max: f64, delta: f64) -> Result<()> {
    if delta * lambda_max < 1.0 - SPECTRAL_MARGIN {
        Ok(())
    } else {
        Err(Error::SpectralCondition {
            lambda_max,
            delta,
            max_delta: (1.0 - SPECTRAL_MARGIN) / lambda_max,
        })
    }
}

impl GameSpec {
    /// `theta = None` means the all-ones vector.
    pub fn new(net: Network, theta: Option<DVector<f64>>, delta: f64) -> Result<GameSpec> {
        check_delta(delta)?;
        let n = net.n();
        let theta = theta.unwrap_or_else(|| DVector::from_element(n, 1.0));
        check_theta(&theta, n)?;
        let lambda_max = spectral_radius(&net);
        check_spectral(lambda_max, delta)?;
        let system = DMatrix::identity(n, n) - net.adjacency() * delta;
        let factor = Cholesky::new(system).ok_or_else(|| {
            Error::Singular("I - delta G is not positive definite after certification".into())
        })?;
        let b_unit = factor.solve(&DVector::from_element(n, 1.0));
        let b = factor.solve(&theta);
        Ok(GameSpec {
            network: net,
            theta,
            delta,
            lambda_max,
            factor,
            b,
            b_unit,
        })
    }

    /// Same network and delta, new characteristics. Reuses the factorization.
    pub fn with_theta(&self, theta: DVector<f64>) -> Result<GameSpec> {
        check_theta(&theta, self.n())?;
        let b = self.factor.solve(&theta);
        Ok(GameSpec {
            theta,
            b,
            ..self.clone()
        })
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn n(&self) -> usize {
        self.network.n()
    }

    pub fn theta(&self) -> &DVector<f64> {
        &self.theta
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    pub fn is_unit_theta(&self) -> bool {
        self.theta.iter().all(|&t| t == 1.0)
    }

    pub(crate) fn require_unit_theta(&self, what: &str) -> Result<()> {
        if self.is_unit_theta() {
            Ok(())
        } else {
            Err(Error::Precondition(format!("{what} requires theta = 1")))
        }
    }

    /// Equilibrium `b(G, theta)`.
    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    /// Unweighted centrality `b(G, 1)`.
    pub fn b_unit(&self) -> &DVector<f64> {
        &self.b_unit
    }

    /// Solves `(I - delta G) x = rhs` against the cached factorization.
    pub fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        self.factor.solve(rhs)
    }

    /// Columns of the Leontief inverse indexed by `cols`: an `n x |cols|` matrix.
    pub fn leontief_columns(&self, cols: &NodeSet) -> DMatrix<f64> {
        let n = self.n();
        let mut rhs = DMatrix::zeros(n, cols.len());
        for (c, j) in cols.iter().enumerate() {
            rhs[(j, c)] = 1.0;
        }
        self.factor.solve(&rhs)
    }

    /// The full Leontief inverse `M(G)`, one solve per column.
    pub fn leontief(&self) -> DMatrix<f64> {
        self.leontief_columns(&NodeSet::all(self.n()))
    }
}

fn check_theta(theta: &DVector<f64>, n: usize) -> Result<()> {
    if theta.len() != n {
        return Err(Error::Precondition(format!(
            "theta has length {} but the network has {n} nodes",
            theta.len()
        )));
    }
    if theta.iter().any(|t| !t.is_finite()) {
        return Err(Error::Precondition("theta entries must be finite".into()));
    }
    Ok(())
}
