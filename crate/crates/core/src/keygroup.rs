// SPDX-License-Identifier: Apache-2.0

//! Group intercentrality and the key-group search.
//!
//! Removing a group `S` lowers aggregate action by
//! `d_S = b_S(G, 1)' M_SS^{-1} b_S(G, theta)`, which only needs the
//! `|S| x |S|` principal block of the Leontief inverse.

use nalgebra::{Cholesky, DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::centrality::{submatrix, subvector};
use crate::error::{Error, Result};
use crate::graph::{GameSpec, NodeSet};

/// Default limit on the number of subsets the exhaustive search visits.
pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

/// Relative tolerance under which two scores count as tied.
pub const TIE_TOL: f64 = 1e-10;

/// Slack on entrywise comparisons in the dominance test.
const DOMINANCE_SLACK: f64 = 1e-12;

/// Groups up to this size are matched under every permutation.
const DOMINANCE_PERMUTE_MAX: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupScore {
    pub group: NodeSet,
    pub intercentrality: f64,
    /// `sum_{l in S} b_l(G, theta)`.
    pub direct_effect: f64,
    pub indirect_effect: f64,
}

pub(crate) fn tied(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Shared centrality data for scoring many groups of one game.
struct Scorer {
    m: DMatrix<f64>,
    b: DVector<f64>,
    b_unit: DVector<f64>,
}

impl Scorer {
    fn new(spec: &GameSpec) -> Scorer {
        Scorer {
            m: spec.leontief(),
            b: spec.b().clone(),
            b_unit: spec.b_unit().clone(),
        }
    }

    fn score(&self, group: NodeSet) -> Result<GroupScore> {
        score_from_blocks(
            group.clone(),
            submatrix(&self.m, &group, &group),
            subvector(&self.b_unit, &group),
            subvector(&self.b, &group),
        )
    }
}

fn score_from_blocks(
    group: NodeSet,
    m_ss: DMatrix<f64>,
    b_unit_s: DVector<f64>,
    b_s: DVector<f64>,
) -> Result<GroupScore> {
    let chol = Cholesky::new(m_ss)
        .ok_or_else(|| Error::Singular("principal block M_SS is not positive definite".into()))?;
    let v = chol.solve(&b_s);
    let intercentrality = b_unit_s.dot(&v);
    let direct_effect = b_s.sum();
    Ok(GroupScore {
        group,
        intercentrality,
        direct_effect,
        indirect_effect: intercentrality - direct_effect,
    })
}

fn check_group(spec: &GameSpec, s: &NodeSet) -> Result<()> {
    if s.is_empty() {
        return Err(Error::Precondition("group must be nonempty".into()));
    }
    if let Some(&last) = s.as_slice().last() {
        if last >= spec.n() {
            return Err(Error::Precondition(format!(
                "node index {last} out of range for {} nodes",
                spec.n()
            )));
        }
    }
    Ok(())
}

/// Intercentrality `d_S` from one `|S| x |S|` solve. `S = N` yields the
/// full aggregate `b(G, theta)`.
pub fn intercentrality(spec: &GameSpec, s: &NodeSet) -> Result<GroupScore> {
    check_group(spec, s)?;
    let columns = spec.leontief_columns(s);
    let m_ss = DMatrix::from_fn(s.len(), s.len(), |r, c| columns[(s.as_slice()[r], c)]);
    score_from_blocks(
        s.clone(),
        m_ss,
        subvector(spec.b_unit(), s),
        subvector(spec.b(), s),
    )
}

/// `b(G, theta) - b(G_{S^C S^C}, theta_{S^C})` by solving the residual game.
pub fn removal_effect(spec: &GameSpec, s: &NodeSet) -> Result<f64> {
    check_group(spec, s)?;
    let rest = s.complement(spec.n());
    let before = spec.b().sum();
    if rest.is_empty() {
        return Ok(before);
    }
    let residual = GameSpec::new(
        spec.network().induced(&rest),
        Some(subvector(spec.theta(), &rest)),
        spec.delta(),
    )?;
    Ok(before - residual.b().sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    pub cap: u128,
    /// Keep only the best `top` groups (ties at the cut are kept).
    pub top: Option<usize>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            cap: DEFAULT_ENUMERATION_CAP,
            top: None,
        }
    }
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// Colex successor of a strictly increasing combination bounded by `limit`.
fn next_colex(c: &mut [usize], limit: usize) -> bool {
    let k = c.len();
    for i in 0..k {
        let cap = if i + 1 < k { c[i + 1] } else { limit };
        if c[i] + 1 < cap {
            c[i] += 1;
            for (r, slot) in c.iter_mut().enumerate().take(i) {
                *slot = r;
            }
            return true;
        }
    }
    false
}

/// Descending score, ascending member list; scores within [`TIE_TOL`] are
/// regrouped by member list so near-equal floats cannot reorder ties.
pub(crate) fn rank(mut scores: Vec<GroupScore>) -> Vec<GroupScore> {
    scores.sort_by(|a, b| {
        b.intercentrality
            .total_cmp(&a.intercentrality)
            .then_with(|| a.group.cmp(&b.group))
    });
    let mut start = 0;
    while start < scores.len() {
        let mut end = start + 1;
        while end < scores.len()
            && tied(scores[end - 1].intercentrality, scores[end].intercentrality)
        {
            end += 1;
        }
        scores[start..end].sort_by(|a, b| a.group.cmp(&b.group));
        start = end;
    }
    scores
}

fn keep_top(scores: Vec<GroupScore>, top: Option<usize>) -> Vec<GroupScore> {
    let mut ranked = rank(scores);
    if let Some(m) = top {
        if ranked.len() > m && m > 0 {
            let cut = ranked[m - 1].intercentrality;
            let keep = ranked
                .iter()
                .position(|g| g.intercentrality < cut && !tied(g.intercentrality, cut))
                .unwrap_or(ranked.len());
            ranked.truncate(keep.max(m));
        } else if m == 0 {
            ranked.clear();
        }
    }
    ranked
}

/// Scores every group of size exactly `k`, best first.
///
/// Work is split by the largest member; each worker ranks locally and the
/// merge re-ranks, so the result does not depend on the thread count.
pub fn key_group_exhaustive(
    spec: &GameSpec,
    k: usize,
    opts: &SearchOptions,
) -> Result<Vec<GroupScore>> {
    let n = spec.n();
    if k == 0 || k > n {
        return Err(Error::Precondition(format!(
            "group size k = {k} must lie in 1..={n}"
        )));
    }
    let subsets = binomial(n, k);
    if subsets > opts.cap {
        return Err(Error::EnumerationCap {
            subsets,
            cap: opts.cap,
        });
    }
    let scorer = Scorer::new(spec);
    let flush_at = opts.top.map(|m| 4 * m + 1024);
    let partials: Vec<Vec<GroupScore>> = (k - 1..n)
        .into_par_iter()
        .map(|largest| -> Result<Vec<GroupScore>> {
            let mut local = Vec::new();
            let mut c: Vec<usize> = (0..k - 1).collect();
            loop {
                let mut members = c.clone();
                members.push(largest);
                local.push(scorer.score(NodeSet::from_sorted(members))?);
                if let Some(limit) = flush_at {
                    if local.len() > limit {
                        local = keep_top(local, opts.top);
                    }
                }
                if !next_colex(&mut c, largest) {
                    break;
                }
            }
            Ok(keep_top(local, opts.top))
        })
        .collect::<Result<_>>()?;
    Ok(keep_top(partials.into_iter().flatten().collect(), opts.top))
}

/// Sequentially removes the node with the largest single-node
/// intercentrality in the current residual network. The returned score is
/// measured in the original network.
pub fn key_group_greedy(spec: &GameSpec, k: usize) -> Result<GroupScore> {
    let n = spec.n();
    if k == 0 || k > n {
        return Err(Error::Precondition(format!(
            "group size k = {k} must lie in 1..={n}"
        )));
    }
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    for _ in 0..k {
        let rest = NodeSet::new((0..n).filter(|i| !chosen.contains(i)), n)?;
        let residual = GameSpec::new(
            spec.network().induced(&rest),
            Some(subvector(spec.theta(), &rest)),
            spec.delta(),
        )?;
        let m = residual.leontief();
        let mut best: Option<(usize, f64)> = None;
        for (local, global) in rest.iter().enumerate() {
            let d = residual.b_unit()[local] * residual.b()[local] / m[(local, local)];
            match best {
                Some((_, bd)) if d <= bd || tied(d, bd) => {}
                _ => best = Some((global, d)),
            }
        }
        let (pick, _) = best.expect("residual network is nonempty");
        chosen.push(pick);
    }
    intercentrality(spec, &NodeSet::new(chosen, n)?)
}

/// Does `strong` dominate `weak`: `b_weak <= b_strong` and
/// `M_weak >= M_strong` entrywise under some alignment of members?
fn dominates(m: &DMatrix<f64>, b: &DVector<f64>, strong: &NodeSet, weak: &NodeSet) -> bool {
    let (s, w) = (strong.as_slice(), weak.as_slice());
    let k = s.len();
    let fits = |perm: &[usize]| -> bool {
        for r in 0..k {
            if b[w[r]] > b[s[perm[r]]] + DOMINANCE_SLACK {
                return false;
            }
        }
        for r in 0..k {
            for c in 0..k {
                if m[(w[r], w[c])] + DOMINANCE_SLACK < m[(s[perm[r]], s[perm[c]])] {
                    return false;
                }
            }
        }
        true
    };
    if k <= DOMINANCE_PERMUTE_MAX {
        let mut perm: Vec<usize> = (0..k).collect();
        loop {
            if fits(&perm) {
                return true;
            }
            if !next_permutation(&mut perm) {
                return false;
            }
        }
    }
    // align both groups by descending centrality
    let order = |g: &[usize]| {
        let mut idx: Vec<usize> = (0..g.len()).collect();
        idx.sort_by(|&x, &y| b[g[y]].total_cmp(&b[g[x]]).then(x.cmp(&y)));
        idx
    };
    let (os, ow) = (order(s), order(w));
    let mut perm = vec![0; k];
    for r in 0..k {
        perm[ow[r]] = os[r];
    }
    fits(&perm)
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Drops candidates dominated by another candidate of the same size
/// (`theta = 1` only). Of two mutually dominating groups the earlier one
/// in `candidates` survives.
pub fn dominance_prune(spec: &GameSpec, candidates: &[NodeSet]) -> Result<Vec<NodeSet>> {
    spec.require_unit_theta("dominance pruning")?;
    let Some(first) = candidates.first() else {
        return Ok(Vec::new());
    };
    if candidates.iter().any(|c| c.len() != first.len()) {
        return Err(Error::Precondition(
            "dominance pruning needs candidates of equal size".into(),
        ));
    }
    for c in candidates {
        check_group(spec, c)?;
    }
    let m = spec.leontief();
    let b = spec.b_unit();
    let kept = candidates
        .iter()
        .enumerate()
        .filter(|&(i, weak)| {
            !candidates.iter().enumerate().any(|(j, strong)| {
                j != i
                    && dominates(&m, b, strong, weak)
                    && (j < i || !dominates(&m, b, weak, strong))
            })
        })
        .map(|(_, c)| c.clone())
        .collect();
    Ok(kept)
}
