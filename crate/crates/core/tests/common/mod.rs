// SPDX-License-Identifier: Apache-2.0

//! Test-side oracles that avoid the library's own solvers.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use netsurgeon::{GameSpec, Network, NodeSet, StructuralIntervention};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Cross-method agreement.
pub const AGREE: f64 = 1e-9;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

pub fn assert_vec_close(a: &DVector<f64>, b: &DVector<f64>, tol: f64, what: &str) {
    assert_eq!(a.len(), b.len(), "{what}: length");
    for i in 0..a.len() {
        assert!(close(a[i], b[i], tol), "{what}[{i}]: {} vs {}", a[i], b[i]);
    }
}

/// Largest eigenvalue from a full symmetric eigendecomposition.
pub fn lambda_max(g: &DMatrix<f64>) -> f64 {
    if g.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(g.clone())
        .eigenvalues
        .iter()
        .fold(f64::NEG_INFINITY, |m, &x| m.max(x))
}

/// `(I - delta G)^{-1}` by explicit LU inversion.
pub fn leontief_oracle(g: &DMatrix<f64>, delta: f64) -> DMatrix<f64> {
    let n = g.nrows();
    (DMatrix::identity(n, n) - g * delta)
        .try_inverse()
        .expect("certified matrix is invertible")
}

/// `(I - delta G)^{-1} theta` by LU solve.
pub fn solve_oracle(g: &DMatrix<f64>, theta: &DVector<f64>, delta: f64) -> DVector<f64> {
    let n = g.nrows();
    (DMatrix::identity(n, n) - g * delta)
        .lu()
        .solve(theta)
        .expect("certified matrix is invertible")
}

/// Truncated Neumann series `sum_{k<=terms} (delta G)^k`.
pub fn neumann_oracle(g: &DMatrix<f64>, delta: f64, terms: usize) -> DMatrix<f64> {
    let n = g.nrows();
    let mut acc = DMatrix::identity(n, n);
    let mut power = DMatrix::identity(n, n);
    for _ in 0..terms {
        power = &power * g * delta;
        acc += &power;
    }
    acc
}

/// Adjacency from an edge list over node indices 0..n.
pub fn adjacency(n: usize, edges: &[(usize, usize)]) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(n, n);
    for &(i, j) in edges {
        g[(i, j)] = 1.0;
        g[(j, i)] = 1.0;
    }
    g
}

/// Network with zero-padded labels so label order equals index order.
pub fn network(n: usize, edges: &[(usize, usize)]) -> Network {
    let labels: Vec<String> = (0..n).map(|i| format!("v{i:02}")).collect();
    let named: Vec<(String, String)> = edges
        .iter()
        .map(|&(i, j)| (labels[i].clone(), labels[j].clone()))
        .collect();
    Network::from_edges(labels, named).expect("valid random network")
}

pub fn random_edges(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                edges.push((i, j));
            }
        }
    }
    edges
}

/// Connected random graph: a random spanning tree plus extra edges.
pub fn random_connected_edges(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges: Vec<(usize, usize)> = (1..n)
        .map(|k| {
            let parent = order[rng.gen_range(0..k)];
            let (a, b) = (order[k], parent);
            (a.min(b), a.max(b))
        })
        .collect();
    for (i, j) in random_edges(rng, n, p) {
        if !edges.contains(&(i, j)) {
            edges.push((i, j));
        }
    }
    edges
}

/// A delta with `delta * lambda` uniformly in `[0.1, 0.9]` for the given
/// spectral radius.
pub fn random_delta(rng: &mut ChaCha8Rng, lambda: f64) -> f64 {
    let frac = rng.gen_range(0.1..0.9);
    if lambda > 0.0 {
        frac / lambda
    } else {
        frac
    }
}

pub fn random_theta(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.gen_range(0.5..2.0))
}

/// Random legal link changes confined to at most `max_support` nodes.
pub fn random_change(
    rng: &mut ChaCha8Rng,
    g: &DMatrix<f64>,
    max_support: usize,
) -> (StructuralIntervention, Vec<(usize, usize, f64)>) {
    let n = g.nrows();
    let k = rng.gen_range(2..=max_support.min(n));
    let mut nodes: Vec<usize> = (0..n).collect();
    nodes.shuffle(rng);
    nodes.truncate(k);
    let mut iv = StructuralIntervention::new();
    let mut toggles = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            if rng.gen_bool(0.5) {
                let (i, j) = (nodes[a].min(nodes[b]), nodes[a].max(nodes[b]));
                let present = g[(i, j)] != 0.0;
                let change = if present {
                    netsurgeon::LinkChange::Remove
                } else {
                    netsurgeon::LinkChange::Add
                };
                iv.push(i, j, change).unwrap();
                toggles.push((i, j, if present { -1.0 } else { 1.0 }));
            }
        }
    }
    if toggles.is_empty() {
        let (i, j) = (nodes[0].min(nodes[1]), nodes[0].max(nodes[1]));
        let present = g[(i, j)] != 0.0;
        let change = if present {
            netsurgeon::LinkChange::Remove
        } else {
            netsurgeon::LinkChange::Add
        };
        iv.push(i, j, change).unwrap();
        toggles.push((i, j, if present { -1.0 } else { 1.0 }));
    }
    (iv, toggles)
}

pub fn apply_toggles(g: &DMatrix<f64>, toggles: &[(usize, usize, f64)]) -> DMatrix<f64> {
    let mut h = g.clone();
    for &(i, j, s) in toggles {
        h[(i, j)] += s;
        h[(j, i)] += s;
    }
    h
}

/// Random game and legal change with both `G` and `G + C` certified.
pub struct Instance {
    pub spec: GameSpec,
    pub g: DMatrix<f64>,
    pub iv: StructuralIntervention,
    pub post: DMatrix<f64>,
}

pub fn random_instance(
    rng: &mut ChaCha8Rng,
    n_range: std::ops::RangeInclusive<usize>,
    unit_theta: bool,
) -> Instance {
    let n = rng.gen_range(n_range);
    let p = rng.gen_range(0.15..0.6);
    let edges = random_edges(rng, n, p);
    let g = adjacency(n, &edges);
    let (iv, toggles) = random_change(rng, &g, 4);
    let post = apply_toggles(&g, &toggles);
    let lambda = lambda_max(&g).max(lambda_max(&post));
    let delta = random_delta(rng, lambda);
    let theta = if unit_theta {
        None
    } else {
        Some(random_theta(rng, n))
    };
    let spec = GameSpec::new(network(n, &edges), theta, delta).expect("certified instance");
    Instance { spec, g, iv, post }
}

pub fn random_subset(rng: &mut ChaCha8Rng, n: usize, k: usize) -> NodeSet {
    let mut nodes: Vec<usize> = (0..n).collect();
    nodes.shuffle(rng);
    NodeSet::new(nodes.into_iter().take(k), n).unwrap()
}

/// Sub-matrix by index lists.
pub fn block(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |r, c| m[(rows[r], cols[c])])
}

/// Sum of `delta^len` over walks `i -> j` with interior nodes outside `s`,
/// by explicit depth-first enumeration up to `max_len` steps.
pub fn dfs_walks(
    g: &DMatrix<f64>,
    delta: f64,
    i: usize,
    j: usize,
    s: &[usize],
    max_len: usize,
) -> f64 {
    struct Walker<'a> {
        g: &'a DMatrix<f64>,
        delta: f64,
        j: usize,
        s: &'a [usize],
        max_len: usize,
    }
    impl Walker<'_> {
        fn go(&self, at: usize, used: usize, weight: f64) -> f64 {
            let mut total = if at == self.j { weight } else { 0.0 };
            if used == self.max_len || (used > 0 && self.s.contains(&at)) {
                return total;
            }
            for next in 0..self.g.nrows() {
                if self.g[(at, next)] != 0.0 {
                    total += self.go(next, used + 1, weight * self.delta);
                }
            }
            total
        }
    }
    Walker {
        g,
        delta,
        j,
        s,
        max_len,
    }
    .go(i, 0, 1.0)
}
