// SPDX-License-Identifier: Apache-2.0

//! C ABI for netsurgeon.
//!
//! Networks and games are opaque handles owned by the caller and released
//! with the matching `_free` function. Every fallible call returns an
//! [`NsStatus`]; on failure [`ns_last_error`] describes the problem until the
//! next call on the same thread.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use libc::{c_char, size_t};
use nalgebra::DVector;
use netsurgeon::bridge::{bridge_index, link_value_existing, link_value_potential};
use netsurgeon::{
    key_group_exhaustive, key_group_greedy, structural_effect, Error, GameSpec, LinkChange,
    Network, NodeSet, SearchOptions, StructuralIntervention,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidNetwork = 4,
    UnknownLabel = 5,
    SpectralCondition = 6,
    Precondition = 7,
    IllegalIntervention = 8,
    EnumerationCap = 9,
    BufferTooSmall = 10,
    Io = 11,
    Singular = 12,
    Internal = 13,
    Panic = 14,
}

/// Direction of one link change; values of the `change` field.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NsChange {
    Add = 1,
    Remove = -1,
}

/// One entry of a structural intervention, by node index.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NsLinkChange {
    pub i: size_t,
    pub j: size_t,
    /// `NS_CHANGE_ADD` or `NS_CHANGE_REMOVE`.
    pub change: i32,
}

/// Key-group search strategy; values of the `search` argument.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NsSearch {
    Exhaustive = 0,
    Greedy = 1,
}

/// Opaque network handle.
pub struct NsNetwork {
    net: Network,
    labels: Vec<CString>,
}

/// Opaque certified game handle.
pub struct NsGame {
    spec: GameSpec,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(NsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Parse { .. } | Error::SelfLoop { .. } => NsStatus::Parse,
            Error::InvalidNetwork(_) => NsStatus::InvalidNetwork,
            Error::UnknownLabel(_) => NsStatus::UnknownLabel,
            Error::SpectralCondition { .. } => NsStatus::SpectralCondition,
            Error::Precondition(_) => NsStatus::Precondition,
            Error::IllegalIntervention { .. } => NsStatus::IllegalIntervention,
            Error::EnumerationCap { .. } => NsStatus::EnumerationCap,
            Error::Io(_) => NsStatus::Io,
            Error::Singular(_) => NsStatus::Singular,
            Error::Invariant(_) => NsStatus::Internal,
        };
        Failure(status, e.to_string())
    }
}

fn set_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> NsStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NsStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(&message);
            status
        }
        Err(_) => {
            set_error("panic inside netsurgeon");
            NsStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(NsStatus::NullPointer, format!("{what} is null"))
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(NsStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn input<'a, T>(p: *const T, len: size_t, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a, T>(
    p: *mut T,
    len: size_t,
    need: usize,
    what: &str,
) -> Result<&'a mut [T], Failure> {
    if len < need {
        return Err(Failure(
            NsStatus::BufferTooSmall,
            format!("{what} holds {len} entries, {need} needed"),
        ));
    }
    if need == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts_mut(p, need))
}

fn node(spec: &GameSpec, i: size_t) -> Result<usize, Failure> {
    if i < spec.n() {
        Ok(i)
    } else {
        Err(Failure(
            NsStatus::Precondition,
            format!("node index {i} out of range for {} nodes", spec.n()),
        ))
    }
}

/// Message for the most recent failure on this thread, or an empty string.
/// Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn ns_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ns_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses an edge list. On success `*out_network` owns a new network.
#[no_mangle]
pub unsafe extern "C" fn ns_network_parse(
    edge_list: *const c_char,
    out_network: *mut *mut NsNetwork,
) -> NsStatus {
    guard(|| {
        let slot = out(out_network, "out_network")?;
        *slot = ptr::null_mut();
        let net = netsurgeon::parse_edge_list(text(edge_list, "edge_list")?)?;
        let labels = net
            .labels()
            .iter()
            .map(|l| CString::new(l.as_str()).unwrap_or_default())
            .collect();
        *slot = Box::into_raw(Box::new(NsNetwork { net, labels }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ns_network_free(network: *mut NsNetwork) {
    if !network.is_null() {
        drop(Box::from_raw(network));
    }
}

/// Number of nodes, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn ns_network_node_count(network: *const NsNetwork) -> size_t {
    network.as_ref().map_or(0, |n| n.net.n())
}

/// Label of node `i`, owned by the network handle; null when out of range.
#[no_mangle]
pub unsafe extern "C" fn ns_network_label(network: *const NsNetwork, i: size_t) -> *const c_char {
    network
        .as_ref()
        .and_then(|n| n.labels.get(i))
        .map_or(ptr::null(), |l| l.as_ptr())
}

#[no_mangle]
pub unsafe extern "C" fn ns_network_index_of(
    network: *const NsNetwork,
    label: *const c_char,
    out_index: *mut size_t,
) -> NsStatus {
    guard(|| {
        let net = get(network, "network")?;
        *out(out_index, "out_index")? = net.net.index_of(text(label, "label")?)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ns_spectral_radius(
    network: *const NsNetwork,
    out_radius: *mut f64,
) -> NsStatus {
    guard(|| {
        let net = get(network, "network")?;
        *out(out_radius, "out_radius")? = netsurgeon::spectral_radius(&net.net);
        Ok(())
    })
}

/// Certifies a game on `network`. `theta` may be null for unit
/// characteristics; otherwise it holds `theta_len` entries, one per node.
#[no_mangle]
pub unsafe extern "C" fn ns_game_new(
    network: *const NsNetwork,
    theta: *const f64,
    theta_len: size_t,
    delta: f64,
    out_game: *mut *mut NsGame,
) -> NsStatus {
    guard(|| {
        let slot = out(out_game, "out_game")?;
        *slot = ptr::null_mut();
        let net = get(network, "network")?;
        let theta = if theta.is_null() {
            None
        } else {
            Some(DVector::from_column_slice(input(
                theta, theta_len, "theta",
            )?))
        };
        let spec = GameSpec::new(net.net.clone(), theta, delta)?;
        *slot = Box::into_raw(Box::new(NsGame { spec }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ns_game_free(game: *mut NsGame) {
    if !game.is_null() {
        drop(Box::from_raw(game));
    }
}

/// Largest adjacency eigenvalue found during certification.
#[no_mangle]
pub unsafe extern "C" fn ns_game_lambda_max(game: *const NsGame, out_lambda: *mut f64) -> NsStatus {
    guard(|| {
        *out(out_lambda, "out_lambda")? = get(game, "game")?.spec.lambda_max();
        Ok(())
    })
}

/// Katz-Bonacich centralities into `out_b` (at least n entries).
#[no_mangle]
pub unsafe extern "C" fn ns_centrality(
    game: *const NsGame,
    out_b: *mut f64,
    len: size_t,
) -> NsStatus {
    guard(|| {
        let spec = &get(game, "game")?.spec;
        output(out_b, len, spec.n(), "out_b")?.copy_from_slice(spec.b().as_slice());
        Ok(())
    })
}

/// Closed-walk counts `m_ii` into `out_m` (at least n entries).
#[no_mangle]
pub unsafe extern "C" fn ns_self_loops(
    game: *const NsGame,
    out_m: *mut f64,
    len: size_t,
) -> NsStatus {
    guard(|| {
        let spec = &get(game, "game")?.spec;
        let report = netsurgeon::katz_bonacich(spec);
        output(out_m, len, spec.n(), "out_m")?.copy_from_slice(report.self_loops.as_slice());
        Ok(())
    })
}

/// Aggregate loss from removing the group `nodes`.
#[no_mangle]
pub unsafe extern "C" fn ns_intercentrality(
    game: *const NsGame,
    nodes: *const size_t,
    count: size_t,
    out_value: *mut f64,
) -> NsStatus {
    guard(|| {
        let spec = &get(game, "game")?.spec;
        let group = NodeSet::new(input(nodes, count, "nodes")?.iter().copied(), spec.n())?;
        *out(out_value, "out_value")? = netsurgeon::intercentrality(spec, &group)?.intercentrality;
        Ok(())
    })
}

/// Equilibrium change from a set of link changes. `out_delta_x` receives
/// per-node changes (at least n entries, may be null when `len` is 0);
/// `out_delta_aggregate` receives their sum.
#[no_mangle]
pub unsafe extern "C" fn ns_structural_effect(
    game: *const NsGame,
    changes: *const NsLinkChange,
    count: size_t,
    out_delta_x: *mut f64,
    len: size_t,
    out_delta_aggregate: *mut f64,
) -> NsStatus {
    guard(|| {
        let spec = &get(game, "game")?.spec;
        let mut iv = StructuralIntervention::new();
        for c in input(changes, count, "changes")? {
            let change = match c.change {
                x if x == NsChange::Add as i32 => LinkChange::Add,
                x if x == NsChange::Remove as i32 => LinkChange::Remove,
                x => {
                    return Err(Failure(
                        NsStatus::Precondition,
                        format!("unknown link change {x}"),
                    ))
                }
            };
            iv.push(c.i, c.j, change)?;
        }
        let effect = structural_effect(spec, &iv)?;
        let total = out(out_delta_aggregate, "out_delta_aggregate")?;
        if len > 0 {
            output(out_delta_x, len, spec.n(), "out_delta_x")?
                .copy_from_slice(effect.delta_x.as_slice());
        }
        *total = effect.delta_aggregate;
        Ok(())
    })
}

/// Best group of size `k`. Writes its members (ascending) to `out_nodes`
/// and its intercentrality to `out_value`.
#[no_mangle]
pub unsafe extern "C" fn ns_key_group(
    game: *const NsGame,
    k: size_t,
    search: i32,
    out_nodes: *mut size_t,
    len: size_t,
    out_value: *mut f64,
) -> NsStatus {
    guard(|| {
        let spec = &get(game, "game")?.spec;
        let value = out(out_value, "out_value")?;
        let best = match search {
            x if x == NsSearch::Exhaustive as i32 => {
                key_group_exhaustive(spec, k, &SearchOptions::default())?
                    .into_iter()
                    .next()
                    .ok_or_else(|| Failure(NsStatus::Internal, "empty ranking".into()))?
            }
            x if x == NsSearch::Greedy as i32 => key_group_greedy(spec, k)?,
            x => {
                return Err(Failure(
                    NsStatus::Precondition,
                    format!("unknown search strategy {x}"),
                ))
            }
        };
        output(out_nodes, len, best.group.len(), "out_nodes")?
            .copy_from_slice(best.group.as_slice());
        *value = best.intercentrality;
        Ok(())
    })
}

/// Value of toggling link `(i, j)`: the potential-link index when the link
/// is absent and the existing-link index when present. The aggregate
/// changes by `delta * value` on addition and `-delta * value` on removal.
#[no_mangle]
pub unsafe extern "C" fn ns_link_value(
    game: *const NsGame,
    i: size_t,
    j: size_t,
    out_value: *mut f64,
) -> NsStatus {
    guard(|| {
        let spec = &get(game, "game")?.spec;
        let (i, j) = (node(spec, i)?, node(spec, j)?);
        let value = out(out_value, "out_value")?;
        let link = if spec.network().has_edge(i, j) {
            link_value_existing(spec, i, j)?
        } else {
            link_value_potential(spec, i, j)?
        };
        *value = link.value;
        Ok(())
    })
}

/// Bridge index for linking node `i` of `first` to node `j` of `second`.
#[no_mangle]
pub unsafe extern "C" fn ns_bridge_index(
    first: *const NsGame,
    second: *const NsGame,
    i: size_t,
    j: size_t,
    out_value: *mut f64,
) -> NsStatus {
    guard(|| {
        let (a, b) = (&get(first, "first")?.spec, &get(second, "second")?.spec);
        let (i, j) = (node(a, i)?, node(b, j)?);
        *out(out_value, "out_value")? = bridge_index(a, b, i, j)?.index;
        Ok(())
    })
}
