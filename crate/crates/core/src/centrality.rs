// SPDX-License-Identifier: Apache-2.0

//! Katz-Bonacich centralities and blocks of the Leontief inverse
//! `M(G) = (I - delta G)^{-1}`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::graph::{GameSpec, NodeSet};

#[derive(Debug, Clone, PartialEq)]
pub struct CentralityReport {
    /// `b(G, theta)`, the equilibrium profile.
    pub b: DVector<f64>,
    pub b_unweighted: DVector<f64>,
    pub aggregate: f64,
    /// Diagonal of `M(G)`.
    pub self_loops: DVector<f64>,
}

#[derive(Debug, Serialize)]
struct CentralityJson<'a> {
    labels: &'a [String],
    b: Vec<f64>,
    self_loops: Vec<f64>,
    aggregate: f64,
}

impl CentralityReport {
    /// `{"labels": [...], "b": [...], "self_loops": [...], "aggregate": x}`
    /// with vectors in label order and full float precision.
    pub fn to_json(&self, labels: &[String]) -> serde_json::Value {
        serde_json::to_value(CentralityJson {
            labels,
            b: self.b.iter().copied().collect(),
            self_loops: self.self_loops.iter().copied().collect(),
            aggregate: self.aggregate,
        })
        .expect("centrality report serializes")
    }
}

pub fn katz_bonacich(spec: &GameSpec) -> CentralityReport {
    let n = spec.n();
    let mut self_loops = DVector::zeros(n);
    let mut e = DVector::zeros(n);
    for i in 0..n {
        e[i] = 1.0;
        self_loops[i] = spec.solve(&e)[i];
        e[i] = 0.0;
    }
    let b = spec.b().clone();
    let aggregate = b.sum();
    CentralityReport {
        b,
        b_unweighted: spec.b_unit().clone(),
        aggregate,
        self_loops,
    }
}

/// `M_{rows, cols}` with explicit row and column index lists.
#[derive(Debug, Clone, PartialEq)]
pub struct LeontiefBlock {
    pub rows: NodeSet,
    pub cols: NodeSet,
    pub values: DMatrix<f64>,
}

impl LeontiefBlock {
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[(r, c)]
    }
}

/// One solve per column index; cost scales with `|cols|`.
pub fn leontief_block(spec: &GameSpec, rows: &NodeSet, cols: &NodeSet) -> LeontiefBlock {
    let full_cols = spec.leontief_columns(cols);
    let values = select_rows(&full_cols, rows);
    LeontiefBlock {
        rows: rows.clone(),
        cols: cols.clone(),
        values,
    }
}

pub(crate) fn select_rows(m: &DMatrix<f64>, rows: &NodeSet) -> DMatrix<f64> {
    let r = rows.as_slice();
    DMatrix::from_fn(r.len(), m.ncols(), |i, j| m[(r[i], j)])
}

pub(crate) fn submatrix(m: &DMatrix<f64>, rows: &NodeSet, cols: &NodeSet) -> DMatrix<f64> {
    let (r, c) = (rows.as_slice(), cols.as_slice());
    DMatrix::from_fn(r.len(), c.len(), |i, j| m[(r[i], c[j])])
}

pub(crate) fn subvector(v: &DVector<f64>, idx: &NodeSet) -> DVector<f64> {
    DVector::from_iterator(idx.len(), idx.iter().map(|i| v[i]))
}
