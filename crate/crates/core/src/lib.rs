// SPDX-License-Identifier: Apache-2.0

//! Targeted interventions in network games with local complementarities.
//!
//! Equilibrium actions in the linear-quadratic game are Katz-Bonacich
//! centralities `b(G, theta) = (I - delta G)^{-1} theta`. This crate computes
//! them, evaluates characteristic and structural interventions, searches for
//! key groups and key bridges, and decomposes intercentralities into walks
//! that avoid a target set.

pub mod bridge;
pub mod centrality;
pub mod cli;
pub mod error;
pub mod extensions;
pub mod graph;
pub mod intervene;
pub mod keygroup;
pub mod reproduce;
pub mod walks;

pub use centrality::{katz_bonacich, leontief_block, CentralityReport, LeontiefBlock};
pub use error::{Error, Result};
pub use graph::{certify, parse_edge_list, spectral_radius, GameSpec, Network, NodeSet};
pub use intervene::{
    characteristic_effect, equivalent_theta, hybrid_effect, structural_effect,
    sufficient_increase_check, CharacteristicIntervention, EffectReport, LinkChange, SparseVector,
    StructuralIntervention, SufficientCheck,
};
pub use keygroup::{
    dominance_prune, intercentrality, key_group_exhaustive, key_group_greedy, removal_effect,
    GroupScore, SearchOptions,
};

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
struct ReadmeDoctests;
