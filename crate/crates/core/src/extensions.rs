// SPDX-License-Identifier: Apache-2.0

//! Variant games whose equilibria are combinations of Katz-Bonacich
//! vectors: two interdependent activities, congestion at distance two, and
//! global substitution.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{adjacency_spectral_radius, check_spectral, GameSpec, Network};
use crate::intervene::{structural_effect, StructuralIntervention};

/// Tolerance for first-order-condition residuals and dual-route checks.
pub const RESIDUAL_TOL: f64 = 1e-9;

/// Smallest admissible eigenvalue of `I - delta G + gamma G^2`.
pub const PD_MARGIN: f64 = 1e-9;

/// Decomposition is skipped when `beta_1 - beta_2` falls below this
/// fraction of `delta`.
const ROOT_SEPARATION: f64 = 1e-6;

/// `b(G, theta, delta) = (I - delta G)^{-1} theta`, with `b = theta` at
/// `delta = 0`. The caller guarantees `I - delta G` is positive definite.
pub fn katz_bonacich_at(
    g: &DMatrix<f64>,
    theta: &DVector<f64>,
    delta: f64,
) -> Result<DVector<f64>> {
    if delta == 0.0 {
        return Ok(theta.clone());
    }
    let n = g.nrows();
    let a = DMatrix::identity(n, n) - g * delta;
    let chol = Cholesky::new(a)
        .ok_or_else(|| Error::Singular(format!("I - {delta} G is not positive definite")))?;
    Ok(chol.solve(theta))
}

fn check_vector(v: &DVector<f64>, n: usize, what: &str) -> Result<()> {
    if v.len() != n {
        return Err(Error::Precondition(format!(
            "{what} has length {} but the network has {n} nodes",
            v.len()
        )));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Precondition(format!("{what} must be finite")));
    }
    Ok(())
}

fn check_nonnegative(x: f64, what: &str) -> Result<()> {
    if !(x.is_finite() && x >= 0.0) {
        return Err(Error::Precondition(format!(
            "{what} must be finite and nonnegative, got {x}"
        )));
    }
    Ok(())
}

fn close(residual: f64, scale: f64) -> bool {
    residual <= RESIDUAL_TOL * scale.max(1.0)
}

fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m: f64, x| m.max(x.abs()))
}

#[derive(Debug, Clone)]
pub struct MultiActivitySpec {
    network: Network,
    theta_a: DVector<f64>,
    theta_b: DVector<f64>,
    delta: f64,
    beta: f64,
    lambda_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiActivityEquilibrium {
    pub x_a: Vec<f64>,
    pub x_b: Vec<f64>,
}

impl MultiActivitySpec {
    /// Requires `|beta| < 1` and `delta lambda_max / (1 - |beta|)` below one.
    pub fn new(
        network: Network,
        theta_a: DVector<f64>,
        theta_b: DVector<f64>,
        delta: f64,
        beta: f64,
    ) -> Result<Self> {
        let n = network.n();
        check_vector(&theta_a, n, "theta_A")?;
        check_vector(&theta_b, n, "theta_B")?;
        check_nonnegative(delta, "delta")?;
        if !(beta.is_finite() && beta.abs() < 1.0) {
            return Err(Error::Precondition(format!(
                "beta must lie in (-1, 1), got {beta}"
            )));
        }
        let lambda_max = adjacency_spectral_radius(network.adjacency());
        if delta > 0.0 {
            check_spectral(lambda_max, delta / (1.0 - beta.abs()))?;
        }
        Ok(MultiActivitySpec {
            network,
            theta_a,
            theta_b,
            delta,
            beta,
            lambda_max,
        })
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    /// Sum and difference games: `(theta_A + theta_B, delta / (1 + beta))`
    /// and `(theta_A - theta_B, delta / (1 - beta))`.
    fn constituents(&self) -> [(DVector<f64>, f64, f64); 2] {
        [
            (
                &self.theta_a + &self.theta_b,
                self.delta / (1.0 + self.beta),
                1.0 + self.beta,
            ),
            (
                &self.theta_a - &self.theta_b,
                self.delta / (1.0 - self.beta),
                1.0 - self.beta,
            ),
        ]
    }
}

fn combine(plus: &DVector<f64>, minus: &DVector<f64>, beta: f64) -> (DVector<f64>, DVector<f64>) {
    let p = plus * (0.5 / (1.0 + beta));
    let m = minus * (0.5 / (1.0 - beta));
    (&p + &m, &p - &m)
}

pub fn multi_activity_residual(
    spec: &MultiActivitySpec,
    x_a: &DVector<f64>,
    x_b: &DVector<f64>,
) -> f64 {
    let g = spec.network.adjacency();
    let r_a = x_a + x_b * spec.beta - g * x_a * spec.delta - &spec.theta_a;
    let r_b = x_b + x_a * spec.beta - g * x_b * spec.delta - &spec.theta_b;
    inf_norm(&r_a).max(inf_norm(&r_b))
}

pub fn multi_activity_equilibrium(spec: &MultiActivitySpec) -> Result<MultiActivityEquilibrium> {
    let g = spec.network.adjacency();
    let [(t_plus, d_plus, _), (t_minus, d_minus, _)] = spec.constituents();
    let b_plus = katz_bonacich_at(g, &t_plus, d_plus)?;
    let b_minus = katz_bonacich_at(g, &t_minus, d_minus)?;
    let (x_a, x_b) = combine(&b_plus, &b_minus, spec.beta);
    let residual = multi_activity_residual(spec, &x_a, &x_b);
    if !close(
        residual,
        inf_norm(&spec.theta_a).max(inf_norm(&spec.theta_b)),
    ) {
        return Err(Error::Invariant(format!(
            "multi-activity equilibrium has first-order residual {residual}"
        )));
    }
    Ok(MultiActivityEquilibrium {
        x_a: x_a.iter().copied().collect(),
        x_b: x_b.iter().copied().collect(),
    })
}

/// Changes `(dx_A, dx_B)` from a structural intervention, obtained by
/// applying the equivalence formula to each constituent game.
pub fn multi_activity_structural_effect(
    spec: &MultiActivitySpec,
    iv: &StructuralIntervention,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let post = iv.apply(&spec.network)?;
    if spec.delta > 0.0 {
        check_spectral(
            adjacency_spectral_radius(post.adjacency()),
            spec.delta / (1.0 - spec.beta.abs()),
        )?;
    }
    let n = spec.network.n();
    let mut shifts = Vec::with_capacity(2);
    for (theta, delta, _) in spec.constituents() {
        if delta == 0.0 {
            shifts.push(DVector::zeros(n));
            continue;
        }
        let game = GameSpec::new(spec.network.clone(), Some(theta), delta)?;
        shifts.push(structural_effect(&game, iv)?.delta_x);
    }
    Ok(combine(&shifts[0], &shifts[1], spec.beta))
}

#[derive(Debug, Clone)]
pub struct CongestionSpec {
    network: Network,
    theta: DVector<f64>,
    delta: f64,
    gamma: f64,
    min_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CongestionEquilibrium {
    pub x: Vec<f64>,
    /// `(beta_1, beta_2)` when the two-centrality decomposition was checked.
    pub roots: Option<(f64, f64)>,
}

fn congestion_matrix(g: &DMatrix<f64>, delta: f64, gamma: f64) -> DMatrix<f64> {
    let n = g.nrows();
    DMatrix::identity(n, n) - g * delta + (g * g) * gamma
}

impl CongestionSpec {
    /// Requires `I - delta G + gamma G^2` to be positive definite.
    pub fn new(network: Network, theta: DVector<f64>, delta: f64, gamma: f64) -> Result<Self> {
        check_vector(&theta, network.n(), "theta")?;
        check_nonnegative(delta, "delta")?;
        check_nonnegative(gamma, "gamma")?;
        let a = congestion_matrix(network.adjacency(), delta, gamma);
        let min_eigenvalue = SymmetricEigen::new(a)
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |m, &x| m.min(x));
        if min_eigenvalue.is_nan() || min_eigenvalue <= PD_MARGIN {
            return Err(Error::Precondition(format!(
                "I - delta G + gamma G^2 is not positive definite (smallest eigenvalue {min_eigenvalue})"
            )));
        }
        Ok(CongestionSpec {
            network,
            theta,
            delta,
            gamma,
            min_eigenvalue,
        })
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    /// Real distinct roots `beta_{1,2} = (delta +- sqrt(delta^2 - 4 gamma)) / 2`.
    pub fn roots(&self) -> Option<(f64, f64)> {
        let disc = self.delta * self.delta - 4.0 * self.gamma;
        if disc <= 0.0 {
            return None;
        }
        let s = disc.sqrt();
        if s < ROOT_SEPARATION * self.delta {
            return None;
        }
        Some(((self.delta + s) / 2.0, (self.delta - s) / 2.0))
    }
}

pub fn congestion_residual(spec: &CongestionSpec, x: &DVector<f64>) -> f64 {
    let a = congestion_matrix(spec.network.adjacency(), spec.delta, spec.gamma);
    inf_norm(&(a * x - &spec.theta))
}

fn lu_katz(g: &DMatrix<f64>, theta: &DVector<f64>, beta: f64) -> Option<DVector<f64>> {
    let n = g.nrows();
    (DMatrix::identity(n, n) - g * beta).lu().solve(theta)
}

/// Direct solve of `(I - delta G + gamma G^2) x = theta`, cross-checked
/// against the two-centrality decomposition when the roots are real and
/// distinct.
pub fn congestion_equilibrium(spec: &CongestionSpec) -> Result<CongestionEquilibrium> {
    let g = spec.network.adjacency();
    let a = congestion_matrix(g, spec.delta, spec.gamma);
    let x = Cholesky::new(a)
        .ok_or_else(|| Error::Singular("certified congestion matrix failed to factor".into()))?
        .solve(&spec.theta);
    let residual = congestion_residual(spec, &x);
    if !close(residual, inf_norm(&spec.theta)) {
        return Err(Error::Invariant(format!(
            "congestion equilibrium has first-order residual {residual}"
        )));
    }
    let mut roots = None;
    if let Some((b1, b2)) = spec.roots() {
        if let (Some(k1), Some(k2)) = (lu_katz(g, &spec.theta, b1), lu_katz(g, &spec.theta, b2)) {
            let alt = k1 * (b1 / (b1 - b2)) - k2 * (b2 / (b1 - b2));
            let gap = inf_norm(&(&alt - &x));
            if !close(gap, inf_norm(&x)) {
                return Err(Error::Invariant(format!(
                    "congestion decomposition differs from direct solve by {gap}"
                )));
            }
            roots = Some((b1, b2));
        }
    }
    Ok(CongestionEquilibrium {
        x: x.iter().copied().collect(),
        roots,
    })
}

#[derive(Debug, Clone)]
pub struct GlobalSubstitutionSpec {
    network: Network,
    delta: f64,
    phi: f64,
    /// `b(G, 1, delta / (1 - phi))`
    b: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlobalSubstitutionEquilibrium {
    pub x: Vec<f64>,
    pub aggregate: f64,
}

impl GlobalSubstitutionSpec {
    /// Requires `0 <= phi < 1`, `delta lambda_max / (1 - phi)` below one,
    /// and a positive normalizing denominator.
    pub fn new(network: Network, delta: f64, phi: f64) -> Result<Self> {
        check_nonnegative(delta, "delta")?;
        if !(phi.is_finite() && (0.0..1.0).contains(&phi)) {
            return Err(Error::Precondition(format!(
                "phi must lie in [0, 1), got {phi}"
            )));
        }
        let scaled = delta / (1.0 - phi);
        if scaled > 0.0 {
            check_spectral(adjacency_spectral_radius(network.adjacency()), scaled)?;
        }
        let ones = DVector::from_element(network.n(), 1.0);
        let b = katz_bonacich_at(network.adjacency(), &ones, scaled)?;
        let denom = 1.0 - phi + phi * b.sum();
        if denom.is_nan() || denom <= 1e-12 {
            return Err(Error::Precondition(format!(
                "normalizing denominator {denom} is not positive"
            )));
        }
        Ok(GlobalSubstitutionSpec {
            network,
            delta,
            phi,
            b,
        })
    }
}

pub fn global_substitution_residual(spec: &GlobalSubstitutionSpec, x: &DVector<f64>) -> f64 {
    let g = spec.network.adjacency();
    let total = x.sum();
    let gx = g * x;
    (0..x.len())
        .map(|i| (x[i] - (1.0 - spec.phi * (total - x[i]) + spec.delta * gx[i])).abs())
        .fold(0.0, f64::max)
}

pub fn global_substitution_equilibrium(
    spec: &GlobalSubstitutionSpec,
) -> Result<GlobalSubstitutionEquilibrium> {
    let denom = 1.0 - spec.phi + spec.phi * spec.b.sum();
    let x = &spec.b / denom;
    let residual = global_substitution_residual(spec, &x);
    if !close(residual, 1.0) {
        return Err(Error::Invariant(format!(
            "global-substitution equilibrium has first-order residual {residual}"
        )));
    }
    Ok(GlobalSubstitutionEquilibrium {
        aggregate: x.sum(),
        x: x.iter().copied().collect(),
    })
}
