// SPDX-License-Identifier: Apache-2.0

//! Bridge indices between separate networks and link values within one.
//!
//! All indices are stated for `theta = 1`: `b` is the unweighted
//! Katz-Bonacich vector and `m_ii` the self-loops.

use std::cmp::Ordering;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{adjacency_spectral_radius, check_spectral, GameSpec, NodeSet};
use crate::keygroup::tied;

/// Strictness margin for Pareto domination.
pub const FRONTIER_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BridgeScore {
    /// Node of the first network.
    pub i: usize,
    /// Node of the second network.
    pub j: usize,
    pub index: f64,
    /// `delta * index`, the change in aggregate action.
    pub predicted_delta_aggregate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkKind {
    Potential,
    Existing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkValue {
    pub i: usize,
    pub j: usize,
    pub kind: LinkKind,
    /// `L_ij(G)` for a potential link, `l_ij(G)` for an existing one.
    pub value: f64,
}

pub(crate) fn self_loops(spec: &GameSpec) -> DVector<f64> {
    let n = spec.n();
    let mut out = DVector::zeros(n);
    let mut e = DVector::zeros(n);
    for i in 0..n {
        e[i] = 1.0;
        out[i] = spec.solve(&e)[i];
        e[i] = 0.0;
    }
    out
}

fn check_pair(spec1: &GameSpec, spec2: &GameSpec) -> Result<()> {
    spec1.require_unit_theta("the bridge index")?;
    spec2.require_unit_theta("the bridge index")?;
    if spec1.delta() != spec2.delta() {
        return Err(Error::Precondition(format!(
            "both networks need the same delta (got {} and {})",
            spec1.delta(),
            spec2.delta()
        )));
    }
    Ok(())
}

/// `(delta m_jj b_i^2 + delta m_ii b_j^2 + 2 b_i b_j) / (1 - delta^2 m_ii m_jj)`.
pub fn bridge_formula(delta: f64, b_i: f64, m_ii: f64, b_j: f64, m_jj: f64) -> f64 {
    (delta * m_jj * b_i * b_i + delta * m_ii * b_j * b_j + 2.0 * b_i * b_j)
        / (1.0 - delta * delta * m_ii * m_jj)
}

fn score(
    delta: f64,
    i: usize,
    j: usize,
    b1: &DVector<f64>,
    m1: &DVector<f64>,
    b2: &DVector<f64>,
    m2: &DVector<f64>,
) -> BridgeScore {
    let index = bridge_formula(delta, b1[i], m1[i], b2[j], m2[j]);
    BridgeScore {
        i,
        j,
        index,
        predicted_delta_aggregate: delta * index,
    }
}

/// Bridge index of linking node `i` of the first network to node `j` of
/// the second.
pub fn bridge_index(spec1: &GameSpec, spec2: &GameSpec, i: usize, j: usize) -> Result<BridgeScore> {
    check_pair(spec1, spec2)?;
    if i >= spec1.n() || j >= spec2.n() {
        return Err(Error::Precondition("bridge endpoint out of range".into()));
    }
    let (m1, m2) = (self_loops(spec1), self_loops(spec2));
    Ok(score(
        spec1.delta(),
        i,
        j,
        spec1.b_unit(),
        &m1,
        spec2.b_unit(),
        &m2,
    ))
}

fn frontier_of(b: &DVector<f64>, m: &DVector<f64>) -> NodeSet {
    let n = b.len();
    let kept = (0..n).filter(|&i| {
        !(0..n).any(|k| {
            k != i
                && b[k] >= b[i] - FRONTIER_TOL
                && m[k] >= m[i] - FRONTIER_TOL
                && (b[k] > b[i] + FRONTIER_TOL || m[k] > m[i] + FRONTIER_TOL)
        })
    });
    NodeSet::new(kept, n).expect("indices in range")
}

/// Nodes not strictly dominated in `(b_i, m_ii)`.
pub fn pareto_frontier(spec: &GameSpec) -> Result<NodeSet> {
    spec.require_unit_theta("the Pareto frontier")?;
    Ok(frontier_of(spec.b_unit(), &self_loops(spec)))
}

fn by_index_then_pair(a: &BridgeScore, b: &BridgeScore) -> Ordering {
    if tied(a.index, b.index) {
        (a.i, a.j).cmp(&(b.i, b.j))
    } else {
        b.index.total_cmp(&a.index)
    }
}

/// Every cross pair, best first.
pub fn all_bridges(spec1: &GameSpec, spec2: &GameSpec) -> Result<Vec<BridgeScore>> {
    check_pair(spec1, spec2)?;
    let (m1, m2) = (self_loops(spec1), self_loops(spec2));
    let (b1, b2) = (spec1.b_unit(), spec2.b_unit());
    let delta = spec1.delta();
    let mut out: Vec<BridgeScore> = (0..spec1.n())
        .into_par_iter()
        .flat_map_iter(|i| (0..spec2.n()).map(move |j| (i, j)))
        .map(|(i, j)| score(delta, i, j, b1, &m1, b2, &m2))
        .collect();
    out.sort_by(|a, b| {
        b.index
            .total_cmp(&a.index)
            .then((a.i, a.j).cmp(&(b.i, b.j)))
    });
    regroup_ties(&mut out);
    Ok(out)
}

fn regroup_ties(out: &mut [BridgeScore]) {
    let mut start = 0;
    while start < out.len() {
        let mut end = start + 1;
        while end < out.len() && tied(out[end - 1].index, out[end].index) {
            end += 1;
        }
        out[start..end].sort_by_key(|s| (s.i, s.j));
        start = end;
    }
}

/// The bridge maximizing aggregate action, searched over the product of
/// the two Pareto frontiers. Ties go to the smallest `(i, j)`.
pub fn key_bridge(spec1: &GameSpec, spec2: &GameSpec) -> Result<BridgeScore> {
    check_pair(spec1, spec2)?;
    let (m1, m2) = (self_loops(spec1), self_loops(spec2));
    let (b1, b2) = (spec1.b_unit(), spec2.b_unit());
    let (f1, f2) = (frontier_of(b1, &m1), frontier_of(b2, &m2));
    let delta = spec1.delta();
    f1.iter()
        .flat_map(|i| f2.iter().map(move |j| (i, j)))
        .map(|(i, j)| score(delta, i, j, b1, &m1, b2, &m2))
        .min_by(by_index_then_pair)
        .ok_or_else(|| Error::Precondition("both networks must be nonempty".into()))
}

struct PairEntries {
    b_i: f64,
    b_j: f64,
    m_ii: f64,
    m_jj: f64,
    m_ij: f64,
}

fn pair_entries(spec: &GameSpec, i: usize, j: usize) -> Result<PairEntries> {
    spec.require_unit_theta("link values")?;
    let n = spec.n();
    if i >= n || j >= n {
        return Err(Error::Precondition("link endpoint out of range".into()));
    }
    if i == j {
        return Err(Error::Precondition(
            "a link needs two distinct endpoints".into(),
        ));
    }
    let cols = spec.leontief_columns(&NodeSet::new([i, j], n)?);
    let (ci, cj) = if i < j { (0, 1) } else { (1, 0) };
    Ok(PairEntries {
        b_i: spec.b_unit()[i],
        b_j: spec.b_unit()[j],
        m_ii: cols[(i, ci)],
        m_jj: cols[(j, cj)],
        m_ij: cols[(i, cj)],
    })
}

/// `L_ij(G)`: adding the absent link `ij` raises aggregate action by
/// `delta L_ij(G)`.
pub fn link_value_potential(spec: &GameSpec, i: usize, j: usize) -> Result<LinkValue> {
    let p = pair_entries(spec, i, j)?;
    let net = spec.network();
    if net.has_edge(i, j) {
        return Err(Error::Precondition(format!(
            "link ({}, {}) already exists",
            net.label(i),
            net.label(j)
        )));
    }
    let mut g = net.adjacency().clone();
    g[(i, j)] = 1.0;
    g[(j, i)] = 1.0;
    check_spectral(adjacency_spectral_radius(&g), spec.delta())?;
    let d = spec.delta();
    let a = 1.0 - d * p.m_ij;
    let value = (d * p.m_ii * p.b_j * p.b_j + d * p.m_jj * p.b_i * p.b_i + 2.0 * a * p.b_i * p.b_j)
        / (a * a - d * d * p.m_ii * p.m_jj);
    Ok(LinkValue {
        i,
        j,
        kind: LinkKind::Potential,
        value,
    })
}

/// `l_ij(G)`: removing the existing link `ij` lowers aggregate action by
/// `delta l_ij(G)`.
pub fn link_value_existing(spec: &GameSpec, i: usize, j: usize) -> Result<LinkValue> {
    let p = pair_entries(spec, i, j)?;
    let net = spec.network();
    if !net.has_edge(i, j) {
        return Err(Error::Precondition(format!(
            "link ({}, {}) does not exist",
            net.label(i),
            net.label(j)
        )));
    }
    let d = spec.delta();
    let a = 1.0 + d * p.m_ij;
    let value = (2.0 * a * p.b_i * p.b_j
        - (d * p.m_ii * p.b_j * p.b_j + d * p.m_jj * p.b_i * p.b_i))
        / (a * a - d * d * p.m_ii * p.m_jj);
    Ok(LinkValue {
        i,
        j,
        kind: LinkKind::Existing,
        value,
    })
}

fn rank_links(mut v: Vec<LinkValue>) -> Vec<LinkValue> {
    v.sort_by(|a, b| {
        b.value
            .total_cmp(&a.value)
            .then((a.i, a.j).cmp(&(b.i, b.j)))
    });
    let mut start = 0;
    while start < v.len() {
        let mut end = start + 1;
        while end < v.len() && tied(v[end - 1].value, v[end].value) {
            end += 1;
        }
        v[start..end].sort_by_key(|s| (s.i, s.j));
        start = end;
    }
    v
}

/// Values of every absent link whose addition keeps the game certified,
/// best first.
pub fn all_potential_links(spec: &GameSpec) -> Result<Vec<LinkValue>> {
    spec.require_unit_theta("link values")?;
    let n = spec.n();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| !spec.network().has_edge(i, j))
        .collect();
    let values: Vec<Option<LinkValue>> = pairs
        .into_par_iter()
        .map(|(i, j)| match link_value_potential(spec, i, j) {
            Ok(v) => Ok(Some(v)),
            Err(Error::SpectralCondition { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    Ok(rank_links(values.into_iter().flatten().collect()))
}

/// Values of every existing link, best first; the first entry is the key
/// link.
pub fn all_existing_links(spec: &GameSpec) -> Result<Vec<LinkValue>> {
    spec.require_unit_theta("link values")?;
    let values = spec
        .network()
        .edges()
        .into_iter()
        .map(|(i, j)| link_value_existing(spec, i, j))
        .collect::<Result<Vec<_>>>()?;
    Ok(rank_links(values))
}
