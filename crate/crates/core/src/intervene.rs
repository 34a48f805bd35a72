// SPDX-License-Identifier: Apache-2.0

//! Characteristic, structural and hybrid interventions.
//!
//! A structural change `C` to the adjacency matrix moves the equilibrium
//! exactly as a characteristic shift supported on the touched nodes `S`:
//!
//! ```text
//! dtheta*_S = delta C_SS (I - delta M_SS C_SS)^{-1} b_S(G, theta)
//! ```
//!
//! so only `M_{N,S}` (|S| solves against the cached factorization) and an
//! `|S| x |S|` system are needed; the post-intervention network is never
//! factorized.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::centrality::{select_rows, subvector};
use crate::error::{Error, Result};
use crate::graph::{adjacency_spectral_radius, check_spectral, GameSpec, Network, NodeSet};

/// Tolerance separating `b'Cb > 0` from `b'Cb = 0`.
pub const STRICTNESS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicIntervention {
    delta_theta: DVector<f64>,
}

impl CharacteristicIntervention {
    pub fn new(delta_theta: DVector<f64>) -> Self {
        CharacteristicIntervention { delta_theta }
    }

    pub fn zero(n: usize) -> Self {
        Self::new(DVector::zeros(n))
    }

    /// Later entries for the same node accumulate.
    pub fn sparse(n: usize, entries: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        let mut v = DVector::zeros(n);
        for (i, x) in entries {
            if i >= n {
                return Err(Error::Precondition(format!(
                    "node index {i} out of range for {n} nodes"
                )));
            }
            v[i] += x;
        }
        Ok(Self::new(v))
    }

    pub fn dense(&self) -> &DVector<f64> {
        &self.delta_theta
    }

    pub fn len(&self) -> usize {
        self.delta_theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support().is_empty()
    }

    pub fn support(&self) -> NodeSet {
        NodeSet::from_sorted(
            self.delta_theta
                .iter()
                .enumerate()
                .filter(|(_, &x)| x != 0.0)
                .map(|(i, _)| i)
                .collect(),
        )
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self::new(&self.delta_theta * alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkChange {
    Add,
    Remove,
}

impl LinkChange {
    pub fn sign(self) -> f64 {
        match self {
            LinkChange::Add => 1.0,
            LinkChange::Remove => -1.0,
        }
    }

    fn flipped(self) -> Self {
        match self {
            LinkChange::Add => LinkChange::Remove,
            LinkChange::Remove => LinkChange::Add,
        }
    }
}

/// Symmetric `{-1, 0, 1}` change to the adjacency matrix, stored as
/// `(i, j) -> change` with `i < j`. Independent of any concrete network;
/// legality is checked when applied.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StructuralIntervention {
    entries: BTreeMap<(usize, usize), LinkChange>,
}

impl StructuralIntervention {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, i: usize, j: usize, change: LinkChange) -> Result<()> {
        if i == j {
            return Err(Error::IllegalIntervention {
                i: i.to_string(),
                j: j.to_string(),
                reason: "diagonal entries of C must be zero".into(),
            });
        }
        let key = (i.min(j), i.max(j));
        if self.entries.contains_key(&key) {
            return Err(Error::IllegalIntervention {
                i: key.0.to_string(),
                j: key.1.to_string(),
                reason: "pair listed twice; entries of C are limited to -1, 0, 1".into(),
            });
        }
        self.entries.insert(key, change);
        Ok(())
    }

    pub fn with(mut self, i: usize, j: usize, change: LinkChange) -> Result<Self> {
        self.push(i, j, change)?;
        Ok(self)
    }

    pub fn add_link(i: usize, j: usize) -> Result<Self> {
        Self::new().with(i, j, LinkChange::Add)
    }

    pub fn remove_link(i: usize, j: usize) -> Result<Self> {
        Self::new().with(i, j, LinkChange::Remove)
    }

    /// Cut `i-j` and create `i-l`.
    pub fn swap(i: usize, j: usize, l: usize) -> Result<Self> {
        Self::new()
            .with(i, j, LinkChange::Remove)?
            .with(i, l, LinkChange::Add)
    }

    /// Remove every link incident to `i` in `net`.
    pub fn isolate(net: &Network, i: usize) -> Result<Self> {
        let mut iv = Self::new();
        for &j in net.neighbors(i) {
            iv.push(i, j, LinkChange::Remove)?;
        }
        Ok(iv)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, LinkChange)> + '_ {
        self.entries.iter().map(|(&(i, j), &c)| (i, j, c))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn negated(&self) -> Self {
        StructuralIntervention {
            entries: self
                .entries
                .iter()
                .map(|(&k, &c)| (k, c.flipped()))
                .collect(),
        }
    }

    /// Nodes touched by some nonzero entry.
    pub fn support(&self) -> NodeSet {
        let mut v: Vec<usize> = self.entries.keys().flat_map(|&(i, j)| [i, j]).collect();
        v.sort_unstable();
        v.dedup();
        NodeSet::from_sorted(v)
    }

    /// `C_SS` for the given (sorted) support.
    pub fn block(&self, support: &NodeSet) -> DMatrix<f64> {
        let s = support.as_slice();
        let mut c = DMatrix::zeros(s.len(), s.len());
        for (i, j, ch) in self.entries() {
            let (a, b) = (
                s.binary_search(&i).expect("support contains endpoint"),
                s.binary_search(&j).expect("support contains endpoint"),
            );
            c[(a, b)] = ch.sign();
            c[(b, a)] = ch.sign();
        }
        c
    }

    /// Adds only absent links and removes only present ones.
    pub fn check_legal(&self, net: &Network) -> Result<()> {
        let n = net.n();
        for (i, j, ch) in self.entries() {
            if j >= n {
                return Err(Error::Precondition(format!(
                    "node index {j} out of range for {n} nodes"
                )));
            }
            let illegal = |reason: &str| Error::IllegalIntervention {
                i: net.label(i).to_string(),
                j: net.label(j).to_string(),
                reason: reason.to_string(),
            };
            match (ch, net.has_edge(i, j)) {
                (LinkChange::Add, true) => return Err(illegal("link already exists")),
                (LinkChange::Remove, false) => return Err(illegal("link does not exist")),
                _ => {}
            }
        }
        Ok(())
    }

    /// `G + C` as a new network.
    pub fn apply(&self, net: &Network) -> Result<Network> {
        self.check_legal(net)?;
        let mut adj = net.adjacency().clone();
        for (i, j, ch) in self.entries() {
            let v = match ch {
                LinkChange::Add => 1.0,
                LinkChange::Remove => 0.0,
            };
            adj[(i, j)] = v;
            adj[(j, i)] = v;
        }
        Ok(net.with_adjacency(adj))
    }
}

/// Vector supported on a node set.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector {
    pub support: NodeSet,
    pub values: DVector<f64>,
}

impl SparseVector {
    pub fn to_dense(&self, n: usize) -> DVector<f64> {
        let mut v = DVector::zeros(n);
        for (k, i) in self.support.iter().enumerate() {
            v[i] = self.values[k];
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectReport {
    pub delta_x: DVector<f64>,
    pub delta_aggregate: f64,
    pub equivalent_delta_theta: SparseVector,
    pub post_b: DVector<f64>,
}

fn report(
    spec: &GameSpec,
    support: NodeSet,
    shift: DVector<f64>,
    columns: &DMatrix<f64>,
) -> EffectReport {
    let delta_x = columns * &shift;
    // aggregate response is b_S(G, 1)' dtheta_S
    let delta_aggregate = subvector(spec.b_unit(), &support).dot(&shift);
    let post_b = spec.b() + &delta_x;
    EffectReport {
        delta_x,
        delta_aggregate,
        equivalent_delta_theta: SparseVector {
            support,
            values: shift,
        },
        post_b,
    }
}

pub fn characteristic_effect(
    spec: &GameSpec,
    iv: &CharacteristicIntervention,
) -> Result<EffectReport> {
    if iv.len() != spec.n() {
        return Err(Error::Precondition(format!(
            "characteristic intervention has length {} but the network has {} nodes",
            iv.len(),
            spec.n()
        )));
    }
    let support = iv.support();
    let columns = spec.leontief_columns(&support);
    let shift = subvector(iv.dense(), &support);
    Ok(report(spec, support, shift, &columns))
}

/// Certifies `G + C` at the game's delta by power iteration on the new adjacency.
fn certify_post(spec: &GameSpec, iv: &StructuralIntervention) -> Result<()> {
    let post = iv.apply(spec.network())?;
    check_spectral(adjacency_spectral_radius(post.adjacency()), spec.delta())
}

/// Returns `(dtheta*_S, M_{N,S})`.
fn equivalent_shift(
    spec: &GameSpec,
    iv: &StructuralIntervention,
) -> Result<(SparseVector, DMatrix<f64>)> {
    certify_post(spec, iv)?;
    let support = iv.support();
    let columns = spec.leontief_columns(&support);
    if support.is_empty() {
        let values = DVector::zeros(0);
        return Ok((SparseVector { support, values }, columns));
    }
    let m_ss = select_rows(&columns, &support);
    let c_ss = iv.block(&support);
    let b_s = subvector(spec.b(), &support);
    let k = support.len();
    let delta = spec.delta();
    let system = DMatrix::identity(k, k) - (&m_ss * &c_ss) * delta;
    let y = system.lu().solve(&b_s).ok_or_else(|| {
        Error::Singular("I - delta M_SS C_SS is singular although G and G + C are certified".into())
    })?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular(
            "non-finite solution of I - delta M_SS C_SS".into(),
        ));
    }
    let values = (&c_ss * y) * delta;
    Ok((SparseVector { support, values }, columns))
}

/// The characteristic shift on `S` that reproduces the equilibrium of `G + C`.
pub fn equivalent_theta(spec: &GameSpec, iv: &StructuralIntervention) -> Result<SparseVector> {
    equivalent_shift(spec, iv).map(|(v, _)| v)
}

pub fn structural_effect(spec: &GameSpec, iv: &StructuralIntervention) -> Result<EffectReport> {
    let (shift, columns) = equivalent_shift(spec, iv)?;
    Ok(report(spec, shift.support, shift.values, &columns))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SufficientCheck {
    /// `b'Cb` summed over ordered pairs.
    pub quadratic_form: f64,
    /// `b'Cb >= 0`: aggregate action cannot fall.
    pub guaranteed_increase: bool,
    /// `b'Cb > 0`: aggregate action strictly rises.
    pub strict_increase: bool,
}

/// Lower bound check `b(G + C) - b(G) >= delta b'Cb` for `theta = 1`.
pub fn sufficient_increase_check(
    spec: &GameSpec,
    iv: &StructuralIntervention,
) -> Result<SufficientCheck> {
    spec.require_unit_theta("the l-value sufficient condition")?;
    iv.check_legal(spec.network())?;
    let b = spec.b();
    let quadratic_form: f64 = iv
        .entries()
        .map(|(i, j, ch)| 2.0 * ch.sign() * b[i] * b[j])
        .sum();
    Ok(SufficientCheck {
        quadratic_form,
        guaranteed_increase: quadratic_form >= -STRICTNESS_TOL,
        strict_increase: quadratic_form > STRICTNESS_TOL,
    })
}

/// Structural change `c` together with characteristic change `dtheta`,
/// reduced to one characteristic shift of the original game.
pub fn hybrid_effect(
    spec: &GameSpec,
    c: &StructuralIntervention,
    dtheta: &CharacteristicIntervention,
) -> Result<EffectReport> {
    let n = spec.n();
    if dtheta.len() != n {
        return Err(Error::Precondition(format!(
            "characteristic intervention has length {} but the network has {n} nodes",
            dtheta.len()
        )));
    }
    let shifted = spec.with_theta(spec.theta() + dtheta.dense())?;
    let structural = equivalent_theta(&shifted, c)?;
    let total = dtheta.dense() + structural.to_dense(n);
    let support = dtheta.support().union(&structural.support);
    let columns = spec.leontief_columns(&support);
    let shift = subvector(&total, &support);
    Ok(report(spec, support, shift, &columns))
}
