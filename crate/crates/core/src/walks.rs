// SPDX-License-Identifier: Apache-2.0

//! Discounted walks that avoid a node set.
//!
//! `w_ij(G, S)` sums `delta^len` over walks from `i` to `j` whose interior
//! nodes lie outside `S`; endpoints may belong to `S`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::Serialize;

use crate::centrality::{submatrix, subvector};
use crate::error::{Error, Result};
use crate::graph::{GameSpec, Network, NodeSet};
use crate::keygroup::intercentrality;

/// Cross-method agreement tolerance, relative to the entry magnitude.
pub const AGREEMENT_TOL: f64 = 1e-9;

/// Default truncation length for the walk enumeration.
pub const DEFAULT_MAX_LEN: usize = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct WalkMatrix {
    pub excluded: NodeSet,
    pub rest: NodeSet,
    /// `W_{S^C S^C}`
    pub rest_rest: DMatrix<f64>,
    /// `W_{S^C S}`
    pub rest_excluded: DMatrix<f64>,
    /// `W_{S S^C}`
    pub excluded_rest: DMatrix<f64>,
    /// `W_{SS}`
    pub excluded_excluded: DMatrix<f64>,
}

impl WalkMatrix {
    /// Entry `w_ij(G, S)` by global node index.
    pub fn w(&self, i: usize, j: usize) -> f64 {
        let locate = |k: usize| match self.excluded.as_slice().binary_search(&k) {
            Ok(p) => (true, p),
            Err(_) => (
                false,
                self.rest
                    .as_slice()
                    .binary_search(&k)
                    .expect("node index within network"),
            ),
        };
        match (locate(i), locate(j)) {
            ((false, r), (false, c)) => self.rest_rest[(r, c)],
            ((false, r), (true, c)) => self.rest_excluded[(r, c)],
            ((true, r), (false, c)) => self.excluded_rest[(r, c)],
            ((true, r), (true, c)) => self.excluded_excluded[(r, c)],
        }
    }

    /// The full `n x n` matrix in global index order.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.excluded.len() + self.rest.len();
        DMatrix::from_fn(n, n, |i, j| self.w(i, j))
    }
}

fn spd_factor(m: DMatrix<f64>, what: &str) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(m).ok_or_else(|| Error::Singular(format!("{what} is not positive definite")))
}

fn agree(a: &DMatrix<f64>, b: &DMatrix<f64>, what: &str) -> Result<()> {
    for (x, y) in a.iter().zip(b.iter()) {
        let gap = (x - y).abs();
        if gap.is_nan() || gap > AGREEMENT_TOL * x.abs().max(y.abs()).max(1.0) {
            return Err(Error::Invariant(format!(
                "{what}: {x} disagrees with {y} beyond {AGREEMENT_TOL}"
            )));
        }
    }
    Ok(())
}

fn check_proper(spec: &GameSpec, s: &NodeSet) -> Result<()> {
    if s.is_empty() || s.len() >= spec.n() {
        return Err(Error::Precondition(
            "excluded set must be a nonempty proper subset of the nodes".into(),
        ));
    }
    if s.as_slice().last().is_some_and(|&k| k >= spec.n()) {
        return Err(Error::Precondition(
            "excluded node index out of range".into(),
        ));
    }
    Ok(())
}

/// Builds `W(G, S)` from blocks of `M(G)` and, independently, from the game
/// on the remaining network, and checks that both agree.
pub fn walk_matrix(spec: &GameSpec, s: &NodeSet) -> Result<WalkMatrix> {
    check_proper(spec, s)?;
    let n = spec.n();
    let rest = s.complement(n);
    let k = s.len();
    let m = spec.leontief();
    let m_ss = submatrix(&m, s, s);
    let m_rs = submatrix(&m, &rest, s);
    let m_sr = submatrix(&m, s, &rest);
    let m_rr = submatrix(&m, &rest, &rest);

    let m_ss_chol = spd_factor(m_ss, "M_SS")?;
    let m_ss_inv = m_ss_chol.inverse();
    let rest_excluded = &m_rs * &m_ss_inv;
    let excluded_rest = m_ss_chol.solve(&m_sr);
    let rest_rest = &m_rr - &m_rs * &excluded_rest;
    let excluded_excluded = DMatrix::identity(k, k) * 2.0 - &m_ss_inv;

    agree(
        &rest_excluded.transpose(),
        &excluded_rest,
        "W_{S^C S} symmetry",
    )?;

    // remaining-network route
    let delta = spec.delta();
    let g = spec.network().adjacency();
    let dg_rr = submatrix(g, &rest, &rest) * delta;
    let dg_rs = submatrix(g, &rest, s) * delta;
    let dg_ss = submatrix(g, s, s) * delta;
    let r_chol = spd_factor(
        DMatrix::identity(rest.len(), rest.len()) - dg_rr,
        "I - delta G_{S^C S^C}",
    )?;
    let alt_rest_rest = r_chol.inverse();
    let alt_rest_excluded = r_chol.solve(&dg_rs);
    let alt_excluded_excluded =
        DMatrix::identity(k, k) + dg_ss + dg_rs.transpose() * &alt_rest_excluded;

    agree(&rest_rest, &alt_rest_rest, "W_{S^C S^C}")?;
    agree(&rest_excluded, &alt_rest_excluded, "W_{S^C S}")?;
    agree(&excluded_excluded, &alt_excluded_excluded, "W_{SS}")?;

    Ok(WalkMatrix {
        excluded: s.clone(),
        rest,
        rest_rest,
        rest_excluded,
        excluded_rest,
        excluded_excluded,
    })
}

/// `W_AB(G, A u B)`, rows in `a` order and columns in `b` order, from both
/// Schur-complement factorizations.
pub fn avoidance_block(spec: &GameSpec, a: &NodeSet, b: &NodeSet) -> Result<DMatrix<f64>> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Precondition(
            "both node sets must be nonempty".into(),
        ));
    }
    if !a.is_disjoint(b) {
        return Err(Error::Precondition("node sets must be disjoint".into()));
    }
    let n = spec.n();
    if a.iter().chain(b.iter()).any(|k| k >= n) {
        return Err(Error::Precondition("node index out of range".into()));
    }
    let ab = a.union(b);
    let cols = spec.leontief_columns(&ab);
    let pos = |k: usize| ab.as_slice().binary_search(&k).expect("member of union");
    let block = |r: &NodeSet, c: &NodeSet| {
        DMatrix::from_fn(r.len(), c.len(), |i, j| {
            cols[(r.as_slice()[i], pos(c.as_slice()[j]))]
        })
    };
    let (m_aa, m_ab, m_ba, m_bb) = (block(a, a), block(a, b), block(b, a), block(b, b));

    let aa = spd_factor(m_aa.clone(), "M_AA")?;
    let bb = spd_factor(m_bb.clone(), "M_BB")?;
    let w_bb_given_a = spd_factor(&m_bb - &m_ba * aa.solve(&m_ab), "W_BB(G, A)")?;
    let w_aa_given_b = spd_factor(&m_aa - &m_ab * bb.solve(&m_ba), "W_AA(G, B)")?;

    // M_AA^{-1} M_AB W_BB(G,A)^{-1}
    let left = aa.solve(&m_ab) * w_bb_given_a.inverse();
    // W_AA(G,B)^{-1} M_AB M_BB^{-1}
    let right = w_aa_given_b.solve(&(&m_ab * bb.inverse()));
    agree(&left, &right, "W_AB(G, A u B)")?;
    Ok(left)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Decomposition {
    /// Walks that start in `S`: `sum_{l in S} b_l`.
    pub term_i: f64,
    /// Walks from outside `S` that first hit `S` at their end.
    pub term_ii: f64,
}

/// Splits `d_S(G, 1)` into direct and through-walk parts.
pub fn intercentrality_decomposition(spec: &GameSpec, s: &NodeSet) -> Result<Decomposition> {
    spec.require_unit_theta("the intercentrality decomposition")?;
    let w = walk_matrix(spec, s)?;
    let b_s = subvector(spec.b(), s);
    let term_i = b_s.sum();
    let term_ii = (&w.rest_excluded * &b_s).sum();
    let d = intercentrality(spec, s)?.intercentrality;
    let total = term_i + term_ii;
    if (total - d).abs() > AGREEMENT_TOL * d.abs().max(1.0) {
        return Err(Error::Invariant(format!(
            "decomposition {total} does not sum to intercentrality {d}"
        )));
    }
    Ok(Decomposition { term_i, term_ii })
}

/// Sum of `delta^len` over walks `i -> j` of length at most `max_len` whose
/// interior nodes avoid `s`.
pub fn enumerate_avoiding_walks(
    net: &Network,
    delta: f64,
    i: usize,
    j: usize,
    s: &NodeSet,
    max_len: usize,
) -> f64 {
    let n = net.n();
    let mut current = DVector::<f64>::zeros(n);
    current[i] = 1.0;
    let mut total = current[j];
    for _ in 0..max_len {
        let mut next = DVector::<f64>::zeros(n);
        for (from, &weight) in current.iter().enumerate() {
            if weight == 0.0 {
                continue;
            }
            for &to in net.neighbors(from) {
                next[to] += delta * weight;
            }
        }
        total += next[j];
        // walks continuing past a node of S would use it as an interior node
        for k in s.iter() {
            next[k] = 0.0;
        }
        current = next;
    }
    total
}

/// Bound on the omitted walks of length above `max_len`:
/// `(delta lambda)^{max_len + 1} / (1 - delta lambda)`.
pub fn walk_tail_bound(delta: f64, lambda_max: f64, max_len: usize) -> f64 {
    let r = delta * lambda_max;
    r.powi(max_len as i32 + 1) / (1.0 - r)
}
