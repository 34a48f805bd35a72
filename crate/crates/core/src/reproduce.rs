// SPDX-License-Identifier: Apache-2.0

//! Recomputes the reference tables from bundled fixture networks.
//!
//! A fixture counts as valid only when every cell and check of every table
//! built on it passes.

use std::path::Path;

use serde::Serialize;

use crate::bridge::{bridge_index, key_bridge, link_value_potential, self_loops};
use crate::error::{Error, Result};
use crate::graph::{certify, parse_edge_list, GameSpec, Network, NodeSet};
use crate::intervene::{structural_effect, StructuralIntervention};
use crate::keygroup::{intercentrality, key_group_exhaustive, key_group_greedy, SearchOptions};

/// Absolute tolerance for cells printed to four decimals.
pub const CELL_TOL: f64 = 1e-3;
/// Tolerance for values printed as integers.
pub const INTEGER_TOL: f64 = 1.0;
/// Tolerance for values printed to two decimals.
pub const TWO_DECIMAL_TOL: f64 = 5e-3;

pub const TABLES: [u8; 7] = [1, 2, 3, 4, 5, 6, 7];

/// Fixture network that a group of tables is computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Anchor {
    /// Ten-node cubic network.
    KeyPlayer,
    /// Star and nine-node component.
    Bridge,
    /// Two four-cycles.
    TwoCycles,
}

impl Anchor {
    pub fn tables(self) -> &'static [u8] {
        match self {
            Anchor::KeyPlayer => &[1, 2],
            Anchor::Bridge => &[3, 4, 5, 6],
            Anchor::TwoCycles => &[7],
        }
    }

    pub fn of_table(table: u8) -> Result<Anchor> {
        match table {
            1 | 2 => Ok(Anchor::KeyPlayer),
            3..=6 => Ok(Anchor::Bridge),
            7 => Ok(Anchor::TwoCycles),
            t => Err(Error::Precondition(format!(
                "no table {t}; tables are 1 to 7"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub row: String,
    pub column: String,
    pub expected: f64,
    pub computed: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub description: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableReport {
    pub table: u8,
    pub anchor: Anchor,
    pub cells: Vec<Cell>,
    pub checks: Vec<Check>,
    /// Every table on the same fixture passes.
    pub fixture_valid: bool,
}

impl TableReport {
    pub fn passed(&self) -> bool {
        self.cells.iter().all(|c| c.passed) && self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone)]
pub struct Fixtures {
    pub regular10: Network,
    pub star: Network,
    pub star17: Network,
    pub cluster: Network,
    pub two_cycles: Network,
}

const FIXTURE_FILES: [&str; 5] = [
    "regular10.txt",
    "star.txt",
    "star17.txt",
    "cluster.txt",
    "two_cycles.txt",
];

impl Fixtures {
    pub fn embedded() -> Fixtures {
        let parse = |text: &str| parse_edge_list(text).expect("bundled fixture parses");
        Fixtures {
            regular10: parse(include_str!("../fixtures/regular10.txt")),
            star: parse(include_str!("../fixtures/star.txt")),
            star17: parse(include_str!("../fixtures/star17.txt")),
            cluster: parse(include_str!("../fixtures/cluster.txt")),
            two_cycles: parse(include_str!("../fixtures/two_cycles.txt")),
        }
    }

    /// Reads `regular10.txt`, `star.txt`, `star17.txt`, `cluster.txt`
    /// and `two_cycles.txt` from `dir`.
    pub fn from_dir(dir: &Path) -> Result<Fixtures> {
        let mut nets = Vec::with_capacity(FIXTURE_FILES.len());
        for name in FIXTURE_FILES {
            let path = dir.join(name);
            let text = std::fs::read_to_string(&path).map_err(|e| {
                Error::Io(format!(
                    "cannot read fixture {}: {e}; transcribe the network as an edge list at this path",
                    path.display()
                ))
            })?;
            nets.push(parse_edge_list(&text).map_err(|e| match e {
                Error::Parse { line, message } => Error::Parse {
                    line,
                    message: format!("{}: {message}", path.display()),
                },
                other => other,
            })?);
        }
        let mut it = nets.into_iter();
        let mut next = || it.next().expect("five fixtures");
        Ok(Fixtures {
            regular10: next(),
            star: next(),
            star17: next(),
            cluster: next(),
            two_cycles: next(),
        })
    }
}

fn cell(
    row: impl Into<String>,
    column: &str,
    expected: f64,
    computed: f64,
    tolerance: f64,
) -> Cell {
    Cell {
        row: row.into(),
        column: column.to_string(),
        expected,
        computed,
        tolerance,
        passed: (computed - expected).abs() <= tolerance,
    }
}

fn check(description: impl Into<String>, passed: bool) -> Check {
    Check {
        description: description.into(),
        passed,
    }
}

fn group(spec: &GameSpec, labels: &[&str]) -> Result<NodeSet> {
    NodeSet::from_labels(spec.network(), labels)
}

fn show(spec: &GameSpec, s: &NodeSet) -> String {
    format!("{{{}}}", s.labels(spec.network()).join(","))
}

fn table1(f: &Fixtures) -> Result<(Vec<Cell>, Vec<Check>)> {
    let spec = certify(f.regular10.clone(), 0.2)?;
    let m = self_loops(&spec);
    let mut cells = Vec::new();
    for (label, m_exp, d_exp) in [
        ("1", 1.1688, 5.3474),
        ("2", 1.1981, 5.2166),
        ("3", 1.2162, 5.1390),
    ] {
        let s = group(&spec, &[label])?;
        let row = format!("{{{label}}}");
        cells.push(cell(&row, "m_SS", m_exp, m[s.as_slice()[0]], CELL_TOL));
        cells.push(cell(
            &row,
            "d_S",
            d_exp,
            intercentrality(&spec, &s)?.intercentrality,
            CELL_TOL,
        ));
    }
    let best = &key_group_exhaustive(&spec, 1, &SearchOptions::default())?[0];
    let checks = vec![check(
        format!("key player is {{1}} (found {})", show(&spec, &best.group)),
        best.group == group(&spec, &["1"])?,
    )];
    Ok((cells, checks))
}

const TABLE2: [(&str, &str, f64); 11] = [
    ("1", "2", 8.4725),
    ("1", "3", 9.3419),
    ("1", "6", 8.7506),
    ("1", "7", 10.0150),
    ("1", "8", 10.2081),
    ("2", "3", 8.0331),
    ("2", "5", 8.9529),
    ("2", "7", 10.2938),
    ("2", "8", 10.2863),
    ("3", "4", 7.8174),
    ("3", "8", 10.2431),
];

fn table2(f: &Fixtures) -> Result<(Vec<Cell>, Vec<Check>)> {
    let spec = certify(f.regular10.clone(), 0.2)?;
    let mut cells = Vec::new();
    for (a, b, expected) in TABLE2 {
        let s = group(&spec, &[a, b])?;
        cells.push(cell(
            format!("{{{a},{b}}}"),
            "d_S",
            expected,
            intercentrality(&spec, &s)?.intercentrality,
            CELL_TOL,
        ));
    }
    let best = &key_group_exhaustive(&spec, 2, &SearchOptions::default())?[0];
    let greedy = key_group_greedy(&spec, 2)?;
    let checks = vec![
        check(
            format!("key group is {{2,7}} (found {})", show(&spec, &best.group)),
            best.group == group(&spec, &["2", "7"])?,
        ),
        check(
            format!(
                "greedy group {} scores {:.4}, strictly below {:.4}",
                show(&spec, &greedy.group),
                greedy.intercentrality,
                best.intercentrality
            ),
            greedy.intercentrality < best.intercentrality - CELL_TOL,
        ),
    ];
    Ok((cells, checks))
}

fn centrality_table(f: &Fixtures, delta: f64, rows: [(&str, f64, f64); 7]) -> Result<Vec<Cell>> {
    let n1 = certify(f.star.clone(), delta)?;
    let n2 = certify(f.cluster.clone(), delta)?;
    let mut cells = Vec::new();
    for (label, m_exp, b_exp) in rows {
        let spec = if n1.network().index_of(label).is_ok() {
            &n1
        } else {
            &n2
        };
        let i = spec.network().index_of(label)?;
        let m = self_loops(spec);
        let row = if label == "l1" { "l" } else { label };
        cells.push(cell(row, "m_ii", m_exp, m[i], CELL_TOL));
        cells.push(cell(row, "b_i", b_exp, spec.b()[i], CELL_TOL));
    }
    Ok(cells)
}

fn table3(f: &Fixtures) -> Result<(Vec<Cell>, Vec<Check>)> {
    let cells = centrality_table(
        f,
        0.25,
        [
            ("a1", 1.5686, 4.7059),
            ("a2", 1.5980, 4.6765),
            ("a3", 1.2686, 3.2059),
            ("a4", 1.4255, 4.1471),
            ("a5", 1.0980, 2.1765),
            ("h", 1.7778, 4.8889),
            ("l1", 1.1111, 2.2222),
        ],
    )?;
    let n2 = certify(f.cluster.clone(), 0.25)?;
    let frontier = crate::bridge::pareto_frontier(&n2)?;
    let checks = vec![check(
        format!(
            "Pareto frontier of the second network is {{a1,a2}} (found {})",
            show(&n2, &frontier)
        ),
        frontier == group(&n2, &["a1", "a2"])?,
    )];
    Ok((cells, checks))
}

fn bridge_table(
    n1: &Network,
    n2: &Network,
    delta: f64,
    rows: &[(&str, f64, f64)],
    winner: &str,
) -> Result<(Vec<Cell>, Vec<Check>)> {
    let s1 = certify(n1.clone(), delta)?;
    let s2 = certify(n2.clone(), delta)?;
    let h = s1.network().index_of("h")?;
    let mut cells = Vec::new();
    for &(j, expected, tol) in rows {
        let score = bridge_index(&s1, &s2, h, s2.network().index_of(j)?)?;
        cells.push(cell(format!("h-{j}"), "L_ij", expected, score.index, tol));
    }
    let best = key_bridge(&s1, &s2)?;
    let found = format!(
        "{}-{}",
        s1.network().label(best.i),
        s2.network().label(best.j)
    );
    let checks = vec![check(
        format!("key bridge is h-{winner} (found {found})"),
        found == format!("h-{winner}"),
    )];
    Ok((cells, checks))
}

fn table4(f: &Fixtures) -> Result<(Vec<Cell>, Vec<Check>)> {
    bridge_table(
        &f.star,
        &f.cluster,
        0.25,
        &[("a1", 78.9970, CELL_TOL), ("a2", 79.0258, CELL_TOL)],
        "a2",
    )
}

fn table5(f: &Fixtures) -> Result<(Vec<Cell>, Vec<Check>)> {
    let cells = centrality_table(
        f,
        0.23,
        [
            ("a1", 1.4213, 3.8423),
            ("a2", 1.4300, 3.7545),
            ("a3", 1.1969, 2.6348),
            ("a4", 1.3063, 3.3533),
            ("a5", 1.0752, 1.8837),
            ("h", 1.5881, 4.1448),
            ("l1", 1.0840, 1.9533),
        ],
    )?;
    Ok((cells, Vec::new()))
}

fn table6(f: &Fixtures) -> Result<(Vec<Cell>, Vec<Check>)> {
    let (mut cells, mut checks) = bridge_table(
        &f.star,
        &f.cluster,
        0.23,
        &[("a1", 48.6711, CELL_TOL), ("a2", 47.6461, CELL_TOL)],
        "a1",
    )?;
    // seventeen-leaf periphery
    let (large_cells, large_checks) = bridge_table(
        &f.star17,
        &f.cluster,
        0.23,
        &[("a1", 4680.0, INTEGER_TOL), ("a2", 4744.0, INTEGER_TOL)],
        "a2",
    )?;
    let large = certify(f.star17.clone(), 0.23)?;
    let h = large.network().index_of("h")?;
    cells.push(cell(
        "h (17 leaves)",
        "b_i",
        48.76,
        large.b()[h],
        TWO_DECIMAL_TOL,
    ));
    cells.extend(large_cells.into_iter().map(|mut c| {
        c.row.push_str(" (17 leaves)");
        c
    }));
    checks.extend(large_checks.into_iter().map(|mut c| {
        c.description.push_str(" with 17 leaves");
        c
    }));
    Ok((cells, checks))
}

fn with_links(spec: &GameSpec, links: &[(&str, &str)]) -> Result<StructuralIntervention> {
    let net = spec.network();
    let mut iv = StructuralIntervention::new();
    for (a, b) in links {
        iv.push(
            net.index_of(a)?,
            net.index_of(b)?,
            crate::intervene::LinkChange::Add,
        )?;
    }
    Ok(iv)
}

fn aggregate_after(spec: &GameSpec, links: &[(&str, &str)]) -> Result<f64> {
    let effect = structural_effect(spec, &with_links(spec, links)?)?;
    Ok(spec.b().sum() + effect.delta_aggregate)
}

type Links<'a> = &'a [(&'a str, &'a str)];

fn table7(f: &Fixtures) -> Result<(Vec<Cell>, Vec<Check>)> {
    let spec = certify(f.two_cycles.clone(), 0.21)?;
    let networks: [(&str, Links, f64); 5] = [
        ("Ghat1", &[("2", "5")], 15.4198),
        ("Ghat2", &[("2", "3")], 15.4689),
        ("Gbar1", &[("2", "3"), ("2", "5")], 17.7010),
        ("Gbar2", &[("1", "4"), ("2", "3")], 17.7074),
        ("Gbar3", &[("2", "5"), ("2", "7")], 17.7547),
    ];
    let mut cells = Vec::new();
    for (name, links, expected) in networks {
        cells.push(cell(
            name,
            "b",
            expected,
            aggregate_after(&spec, links)?,
            CELL_TOL,
        ));
    }
    let mut checks = Vec::new();
    let idx = |l: &str| spec.network().index_of(l);
    let l23 = link_value_potential(&spec, idx("2")?, idx("3")?)?.value;
    let l25 = link_value_potential(&spec, idx("2")?, idx("5")?)?.value;
    checks.push(check(
        format!("intra-group link (2,3) beats bridge (2,5): L = {l23:.4} > {l25:.4}"),
        l23 > l25,
    ));
    let dominated: [(Links, Links); 5] = [
        (&[("2", "5"), ("4", "7")], &[("2", "5"), ("2", "7")]),
        (&[("2", "5"), ("2", "8")], &[("2", "5"), ("2", "7")]),
        (&[("2", "3"), ("6", "7")], &[("1", "4"), ("2", "3")]),
        (&[("2", "5"), ("6", "7")], &[("5", "8"), ("6", "7")]),
        (&[("2", "3"), ("2", "5")], &[("1", "4"), ("2", "3")]),
    ];
    let fmt = |links: &[(&str, &str)]| {
        links
            .iter()
            .map(|(a, b)| format!("({a},{b})"))
            .collect::<Vec<_>>()
            .join("+")
    };
    for (weak, strong) in dominated {
        let (w, s) = (
            aggregate_after(&spec, weak)?,
            aggregate_after(&spec, strong)?,
        );
        checks.push(check(
            format!("{} = {w:.4} < {} = {s:.4}", fmt(weak), fmt(strong)),
            w < s,
        ));
    }
    Ok((cells, checks))
}

fn compute(f: &Fixtures, table: u8) -> Result<(Vec<Cell>, Vec<Check>)> {
    match table {
        1 => table1(f),
        2 => table2(f),
        3 => table3(f),
        4 => table4(f),
        5 => table5(f),
        6 => table6(f),
        7 => table7(f),
        t => Err(Error::Precondition(format!(
            "no table {t}; tables are 1 to 7"
        ))),
    }
}

/// Recomputes one table and gates it on all tables of its fixture.
pub fn reproduce_table(fixtures: &Fixtures, table: u8) -> Result<TableReport> {
    let anchor = Anchor::of_table(table)?;
    let (cells, checks) = compute(fixtures, table)?;
    let mut fixture_valid = cells.iter().all(|c| c.passed) && checks.iter().all(|c| c.passed);
    for &other in anchor.tables() {
        if other != table && fixture_valid {
            let (c, k) = compute(fixtures, other)?;
            fixture_valid = c.iter().all(|c| c.passed) && k.iter().all(|c| c.passed);
        }
    }
    Ok(TableReport {
        table,
        anchor,
        cells,
        checks,
        fixture_valid,
    })
}

pub fn reproduce_all(fixtures: &Fixtures) -> Result<Vec<TableReport>> {
    TABLES
        .iter()
        .map(|&t| reproduce_table(fixtures, t))
        .collect()
}
