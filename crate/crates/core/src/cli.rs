// SPDX-License-Identifier: Apache-2.0

//! The `netsurgeon` command line.
//!
//! Exit status is 0 on success, 1 for bad input or a violated
//! precondition, and 2 when an internal consistency check fails.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use serde_json::{json, Value};

use crate::bridge::{
    all_bridges, all_existing_links, all_potential_links, key_bridge, link_value_existing,
    link_value_potential, pareto_frontier, LinkValue,
};
use crate::centrality::katz_bonacich;
use crate::error::Error;
use crate::extensions::{
    congestion_equilibrium, global_substitution_equilibrium, multi_activity_equilibrium,
    CongestionSpec, GlobalSubstitutionSpec, MultiActivitySpec,
};
use crate::graph::{parse_edge_list, GameSpec, Network, NodeSet};
use crate::intervene::{
    characteristic_effect, hybrid_effect, structural_effect, sufficient_increase_check,
    CharacteristicIntervention, EffectReport, LinkChange, StructuralIntervention,
};
use crate::keygroup::{key_group_exhaustive, key_group_greedy, GroupScore, SearchOptions};
use crate::reproduce::{reproduce_all, reproduce_table, Fixtures, TableReport};
use crate::walks::{avoidance_block, intercentrality_decomposition, walk_matrix};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "NETSURGEON_THREADS";

const SIGNIFICANT_DIGITS: usize = 6;

#[derive(Debug, Parser)]
#[command(
    name = "netsurgeon",
    version,
    about = "Intervention analysis for linear-quadratic network games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Args)]
struct GameArgs {
    /// Edge list: one `u v` pair or one isolated node per line.
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    delta: f64,
    /// File of `label value` lines, or `ones`.
    #[arg(long, default_value = "ones")]
    theta: String,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Katz-Bonacich centralities and self-loops.
    Centrality {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Effect of adding or removing links and shifting characteristics.
    Intervene {
        #[command(flatten)]
        game: GameArgs,
        /// Link to create, as `u,v`.
        #[arg(long, value_name = "U,V")]
        add: Vec<String>,
        /// Link to delete, as `u,v`.
        #[arg(long, value_name = "U,V")]
        remove: Vec<String>,
        /// Characteristic shift, as `label=value`.
        #[arg(long, value_name = "LABEL=VALUE")]
        dtheta: Vec<String>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Group whose removal lowers aggregate action the most.
    KeyGroup {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value = "exhaustive")]
        mode: Mode,
        /// Report the best `m` groups (ties at the cut are kept).
        #[arg(long)]
        top: Option<usize>,
        /// Largest number of subsets the exhaustive search may visit.
        #[arg(long, default_value_t = crate::keygroup::DEFAULT_ENUMERATION_CAP)]
        cap: u128,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Best link between two separate networks.
    KeyBridge {
        #[arg(long)]
        graph1: PathBuf,
        #[arg(long)]
        graph2: PathBuf,
        #[arg(long)]
        delta: f64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Value of adding an absent link or removing a present one.
    LinkValue {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        delta: f64,
        #[arg(long, value_name = "U,V", conflicts_with_all = ["all_potential", "all_existing"])]
        pair: Option<String>,
        #[arg(long, conflicts_with = "all_existing")]
        all_potential: bool,
        #[arg(long)]
        all_existing: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Discounted walks avoiding a node set.
    Walks {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        delta: f64,
        /// Comma-separated labels; interior nodes of counted walks avoid them.
        #[arg(long, value_name = "LABELS")]
        exclude: Option<String>,
        /// With `--to`: block `W_AB(G, A u B)` for comma-separated sets.
        #[arg(long, value_name = "LABELS", requires = "to")]
        from: Option<String>,
        #[arg(long, value_name = "LABELS", requires = "from")]
        to: Option<String>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Equilibria of the variant games.
    Extension {
        #[arg(long, value_enum)]
        model: Model,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        delta: f64,
        /// Cross-activity cost (multi).
        #[arg(long)]
        beta: Option<f64>,
        /// Distance-two substitution (congestion).
        #[arg(long)]
        gamma: Option<f64>,
        /// Global substitution (global).
        #[arg(long)]
        phi: Option<f64>,
        /// Characteristics for congestion, `label value` file or `ones`.
        #[arg(long, default_value = "ones")]
        theta: String,
        #[arg(long, default_value = "ones")]
        theta_a: String,
        #[arg(long, default_value = "ones")]
        theta_b: String,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Recompute the reference tables from the bundled networks.
    Reproduce {
        /// Table number 1 to 7; all tables when omitted.
        #[arg(long)]
        table: Option<u8>,
        /// Directory with replacement fixture edge lists.
        #[arg(long)]
        fixtures: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exhaustive,
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Model {
    Multi,
    Congestion,
    Global,
}

/// A failure annotated with the flag it concerns.
#[derive(Debug)]
struct Failure {
    context: Option<String>,
    error: Error,
}

impl Failure {
    fn code(&self) -> i32 {
        if self.error.is_internal() {
            2
        } else {
            1
        }
    }
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Failure {
            context: None,
            error,
        }
    }
}

trait Context<T> {
    fn flag(self, flag: &str) -> Result<T, Failure>;
}

impl<T> Context<T> for crate::error::Result<T> {
    fn flag(self, flag: &str) -> Result<T, Failure> {
        self.map_err(|error| Failure {
            context: Some(flag.to_string()),
            error,
        })
    }
}

fn user(flag: &str, message: impl Into<String>) -> Failure {
    Failure {
        context: Some(flag.to_string()),
        error: Error::Precondition(message.into()),
    }
}

/// Tabular rendering of a result.
struct Table {
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(headers: &[&str]) -> Table {
        Table {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

struct Output {
    json: Value,
    table: Table,
    /// Exit status after successful rendering.
    status: i32,
}

/// Parses `argv` (including the program name), runs the command and writes
/// its result to `out`. Returns the process exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    if let Err(f) = configure_threads() {
        let _ = writeln!(err, "error: {}", describe(&f));
        return f.code();
    }
    match execute(cli.command) {
        Ok((output, format)) => match render(&output, format, out) {
            Ok(()) => output.status,
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => output.status,
            Err(e) => {
                let _ = writeln!(err, "error: cannot write output: {e}");
                1
            }
        },
        Err(f) => {
            let _ = writeln!(err, "error: {}", describe(&f));
            f.code()
        }
    }
}

fn describe(f: &Failure) -> String {
    match &f.context {
        Some(flag) => format!("{flag}: {}", f.error),
        None => f.error.to_string(),
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| {
        user(
            THREADS_ENV,
            format!("expected a positive integer, got `{raw}`"),
        )
    })?;
    // a pool may already exist when running in-process
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
    Ok(())
}

fn read_graph(path: &Path, flag: &str) -> Result<Network, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| user(flag, format!("cannot read {}: {e}", path.display())))?;
    parse_edge_list(&text).flag(&format!("{flag} {}", path.display()))
}

fn read_theta(net: &Network, source: &str, flag: &str) -> Result<Option<DVector<f64>>, Failure> {
    if source == "ones" {
        return Ok(None);
    }
    let text = std::fs::read_to_string(source)
        .map_err(|e| user(flag, format!("cannot read {source}: {e}")))?;
    let mut theta = vec![None; net.n()];
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let [label, value] = tokens[..] else {
            return Err(user(
                flag,
                format!("line {}: expected `label value`", no + 1),
            ));
        };
        let i = net.index_of(label).flag(flag)?;
        let v: f64 = value
            .parse()
            .map_err(|_| user(flag, format!("line {}: `{value}` is not a number", no + 1)))?;
        theta[i] = Some(v);
    }
    let values = theta
        .iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| user(flag, format!("no value for node `{}`", net.label(i)))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Some(DVector::from_vec(values)))
}

fn load_game(args: &GameArgs) -> Result<GameSpec, Failure> {
    let net = read_graph(&args.graph, "--graph")?;
    let theta = read_theta(&net, &args.theta, "--theta")?;
    GameSpec::new(net, theta, args.delta).flag("--delta")
}

fn parse_pair(net: &Network, raw: &str, flag: &str) -> Result<(usize, usize), Failure> {
    let Some((a, b)) = raw.split_once(',') else {
        return Err(user(flag, format!("expected `u,v`, got `{raw}`")));
    };
    Ok((
        net.index_of(a.trim()).flag(flag)?,
        net.index_of(b.trim()).flag(flag)?,
    ))
}

fn parse_labels(net: &Network, raw: &str, flag: &str) -> Result<NodeSet, Failure> {
    let labels: Vec<&str> = raw
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    NodeSet::from_labels(net, &labels).flag(flag)
}

/// Rounds to six significant digits so printed output is stable.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .unwrap_or(x)
}

fn fmt_num(x: f64) -> String {
    let r = round_sig(x);
    if r == 0.0 {
        // avoid printing negative zero
        "0".to_string()
    } else {
        format!("{r}")
    }
}

fn round_json(v: &mut Value) {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => {
            if let Some(x) = n.as_f64() {
                let r = round_sig(x);
                *v = serde_json::Number::from_f64(if r == 0.0 { 0.0 } else { r })
                    .map(Value::Number)
                    .unwrap_or(Value::Null);
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_json),
        Value::Object(o) => o.values_mut().for_each(round_json),
        _ => {}
    }
}

fn render(output: &Output, format: Format, out: &mut dyn Write) -> std::io::Result<()> {
    match format {
        Format::Json => {
            let mut v = output.json.clone();
            round_json(&mut v);
            serde_json::to_writer_pretty(&mut *out, &v)?;
            writeln!(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(&output.table.headers)?;
            for row in &output.table.rows {
                w.write_record(row)?;
            }
            w.flush()
        }
        Format::Table => {
            let t = &output.table;
            let mut widths: Vec<usize> = t.headers.iter().map(|h| h.chars().count()).collect();
            for row in &t.rows {
                for (w, cell) in widths.iter_mut().zip(row) {
                    *w = (*w).max(cell.chars().count());
                }
            }
            let line = |cells: &[String]| {
                cells
                    .iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{c:<w$}"))
                    .collect::<Vec<_>>()
                    .join("  ")
                    .trim_end()
                    .to_string()
            };
            writeln!(out, "{}", line(&t.headers))?;
            for row in &t.rows {
                writeln!(out, "{}", line(row))?;
            }
            Ok(())
        }
    }
}

fn execute(command: Command) -> Result<(Output, Format), Failure> {
    match command {
        Command::Centrality { game, format } => Ok((centrality(&game)?, format)),
        Command::Intervene {
            game,
            add,
            remove,
            dtheta,
            format,
        } => Ok((intervene(&game, &add, &remove, &dtheta)?, format)),
        Command::KeyGroup {
            game,
            k,
            mode,
            top,
            cap,
            format,
        } => Ok((key_group(&game, k, mode, top, cap)?, format)),
        Command::KeyBridge {
            graph1,
            graph2,
            delta,
            format,
        } => Ok((bridge(&graph1, &graph2, delta)?, format)),
        Command::LinkValue {
            graph,
            delta,
            pair,
            all_potential,
            all_existing,
            format,
        } => Ok((
            link_value(&graph, delta, pair.as_deref(), all_potential, all_existing)?,
            format,
        )),
        Command::Walks {
            graph,
            delta,
            exclude,
            from,
            to,
            format,
        } => Ok((
            walks(
                &graph,
                delta,
                exclude.as_deref(),
                from.as_deref(),
                to.as_deref(),
            )?,
            format,
        )),
        Command::Extension {
            model,
            graph,
            delta,
            beta,
            gamma,
            phi,
            theta,
            theta_a,
            theta_b,
            format,
        } => {
            let params = ExtensionParams {
                beta,
                gamma,
                phi,
                theta,
                theta_a,
                theta_b,
            };
            Ok((extension(model, &graph, delta, &params)?, format))
        }
        Command::Reproduce {
            table,
            fixtures,
            format,
        } => Ok((reproduce(table, fixtures.as_deref())?, format)),
    }
}

fn vec_json(v: &DVector<f64>) -> Value {
    json!(v.iter().copied().collect::<Vec<f64>>())
}

fn centrality(game: &GameArgs) -> Result<Output, Failure> {
    let spec = load_game(game)?;
    let report = katz_bonacich(&spec);
    let labels = spec.network().labels();
    let mut table = Table::new(&["label", "b", "self_loop"]);
    for (i, label) in labels.iter().enumerate() {
        table.push(vec![
            label.clone(),
            fmt_num(report.b[i]),
            fmt_num(report.self_loops[i]),
        ]);
    }
    Ok(Output {
        json: report.to_json(labels),
        table,
        status: 0,
    })
}

fn effect_output(spec: &GameSpec, r: &EffectReport, extra: Option<Value>) -> Output {
    let net = spec.network();
    let mut json = json!({
        "labels": net.labels(),
        "delta_x": vec_json(&r.delta_x),
        "delta_aggregate": r.delta_aggregate,
        "equivalent_delta_theta": {
            "support": r.equivalent_delta_theta.support.labels(net),
            "values": vec_json(&r.equivalent_delta_theta.values),
        },
        "post_b": vec_json(&r.post_b),
    });
    if let (Some(extra), Value::Object(o)) = (extra, &mut json) {
        o.insert("sufficient_check".to_string(), extra);
    }
    let mut table = Table::new(&["label", "delta_x", "post_b", "equivalent_delta_theta"]);
    let theta_star = r.equivalent_delta_theta.to_dense(net.n());
    for i in 0..net.n() {
        table.push(vec![
            net.label(i).to_string(),
            fmt_num(r.delta_x[i]),
            fmt_num(r.post_b[i]),
            fmt_num(theta_star[i]),
        ]);
    }
    table.push(vec![
        "aggregate".to_string(),
        fmt_num(r.delta_aggregate),
        fmt_num(r.post_b.sum()),
        String::new(),
    ]);
    Output {
        json,
        table,
        status: 0,
    }
}

fn intervene(
    game: &GameArgs,
    add: &[String],
    remove: &[String],
    dtheta: &[String],
) -> Result<Output, Failure> {
    let spec = load_game(game)?;
    let net = spec.network();
    let mut c = StructuralIntervention::new();
    for raw in add {
        let (i, j) = parse_pair(net, raw, "--add")?;
        c.push(i, j, LinkChange::Add).flag("--add")?;
    }
    for raw in remove {
        let (i, j) = parse_pair(net, raw, "--remove")?;
        c.push(i, j, LinkChange::Remove).flag("--remove")?;
    }
    let mut shifts = Vec::new();
    for raw in dtheta {
        let Some((label, value)) = raw.split_once('=') else {
            return Err(user(
                "--dtheta",
                format!("expected `label=value`, got `{raw}`"),
            ));
        };
        let i = net.index_of(label.trim()).flag("--dtheta")?;
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| user("--dtheta", format!("`{value}` is not a number")))?;
        shifts.push((i, v));
    }
    let characteristic = CharacteristicIntervention::sparse(net.n(), shifts).flag("--dtheta")?;
    if !c.is_empty() {
        c.check_legal(net).flag(if add.is_empty() {
            "--remove"
        } else {
            "--add/--remove"
        })?;
    }
    let report = match (c.is_empty(), characteristic.support().is_empty()) {
        (true, _) => characteristic_effect(&spec, &characteristic),
        (false, true) => structural_effect(&spec, &c),
        (false, false) => hybrid_effect(&spec, &c, &characteristic),
    }
    .flag("--delta")?;
    let extra = if !c.is_empty() && spec.is_unit_theta() && characteristic.support().is_empty() {
        Some(serde_json::to_value(sufficient_increase_check(&spec, &c)?).expect("serializable"))
    } else {
        None
    };
    Ok(effect_output(&spec, &report, extra))
}

fn group_json(net: &Network, g: &GroupScore) -> Value {
    json!({
        "group": g.group.labels(net),
        "intercentrality": g.intercentrality,
        "direct_effect": g.direct_effect,
        "indirect_effect": g.indirect_effect,
    })
}

fn key_group(
    game: &GameArgs,
    k: usize,
    mode: Mode,
    top: Option<usize>,
    cap: u128,
) -> Result<Output, Failure> {
    let spec = load_game(game)?;
    let net = spec.network();
    let groups = match mode {
        Mode::Exhaustive => {
            key_group_exhaustive(&spec, k, &SearchOptions { cap, top }).flag("--k")?
        }
        Mode::Greedy => vec![key_group_greedy(&spec, k).flag("--k")?],
    };
    let mut table = Table::new(&["rank", "group", "intercentrality", "direct", "indirect"]);
    for (r, g) in groups.iter().enumerate() {
        table.push(vec![
            (r + 1).to_string(),
            g.group.labels(net).join(" "),
            fmt_num(g.intercentrality),
            fmt_num(g.direct_effect),
            fmt_num(g.indirect_effect),
        ]);
    }
    let json = json!({
        "mode": match mode { Mode::Exhaustive => "exhaustive", Mode::Greedy => "greedy" },
        "k": k,
        "groups": groups.iter().map(|g| group_json(net, g)).collect::<Vec<_>>(),
    });
    Ok(Output {
        json,
        table,
        status: 0,
    })
}

fn bridge(graph1: &Path, graph2: &Path, delta: f64) -> Result<Output, Failure> {
    let n1 = read_graph(graph1, "--graph1")?;
    let n2 = read_graph(graph2, "--graph2")?;
    let s1 = GameSpec::new(n1, None, delta).flag("--delta")?;
    let s2 = GameSpec::new(n2, None, delta).flag("--delta")?;
    let best = key_bridge(&s1, &s2)?;
    let ranked = all_bridges(&s1, &s2)?;
    let (l1, l2) = (s1.network(), s2.network());
    let mut table = Table::new(&["i", "j", "index", "delta_aggregate"]);
    for s in &ranked {
        table.push(vec![
            l1.label(s.i).to_string(),
            l2.label(s.j).to_string(),
            fmt_num(s.index),
            fmt_num(s.predicted_delta_aggregate),
        ]);
    }
    let score_json = |s: &crate::bridge::BridgeScore| {
        json!({
            "i": l1.label(s.i),
            "j": l2.label(s.j),
            "index": s.index,
            "predicted_delta_aggregate": s.predicted_delta_aggregate,
        })
    };
    let json = json!({
        "key_bridge": score_json(&best),
        "frontier1": pareto_frontier(&s1)?.labels(l1),
        "frontier2": pareto_frontier(&s2)?.labels(l2),
        "bridges": ranked.iter().map(score_json).collect::<Vec<_>>(),
    });
    Ok(Output {
        json,
        table,
        status: 0,
    })
}

fn link_value(
    graph: &Path,
    delta: f64,
    pair: Option<&str>,
    all_potential: bool,
    all_existing: bool,
) -> Result<Output, Failure> {
    let net = read_graph(graph, "--graph")?;
    let spec = GameSpec::new(net, None, delta).flag("--delta")?;
    let net = spec.network();
    let values: Vec<LinkValue> = match (pair, all_potential, all_existing) {
        (Some(raw), _, _) => {
            let (i, j) = parse_pair(net, raw, "--pair")?;
            let v = if net.has_edge(i, j) {
                link_value_existing(&spec, i, j)
            } else {
                link_value_potential(&spec, i, j)
            };
            vec![v.flag("--pair")?]
        }
        (None, true, _) => all_potential_links(&spec)?,
        (None, false, true) => all_existing_links(&spec)?,
        (None, false, false) => {
            return Err(user(
                "--pair",
                "give --pair u,v, --all-potential or --all-existing",
            ))
        }
    };
    let mut table = Table::new(&["i", "j", "kind", "value", "delta_aggregate"]);
    let mut rows = Vec::new();
    for v in &values {
        let (kind, change) = match v.kind {
            crate::bridge::LinkKind::Potential => ("potential", delta * v.value),
            crate::bridge::LinkKind::Existing => ("existing", -delta * v.value),
        };
        table.push(vec![
            net.label(v.i).to_string(),
            net.label(v.j).to_string(),
            kind.to_string(),
            fmt_num(v.value),
            fmt_num(change),
        ]);
        rows.push(json!({
            "i": net.label(v.i),
            "j": net.label(v.j),
            "kind": kind,
            "value": v.value,
            "delta_aggregate": change,
        }));
    }
    Ok(Output {
        json: json!({ "links": rows }),
        table,
        status: 0,
    })
}

fn matrix_json(m: &nalgebra::DMatrix<f64>) -> Value {
    json!((0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect::<Vec<f64>>())
        .collect::<Vec<_>>())
}

fn walks(
    graph: &Path,
    delta: f64,
    exclude: Option<&str>,
    from: Option<&str>,
    to: Option<&str>,
) -> Result<Output, Failure> {
    let net = read_graph(graph, "--graph")?;
    let spec = GameSpec::new(net, None, delta).flag("--delta")?;
    let net = spec.network();
    if let (Some(a), Some(b)) = (from, to) {
        let a = parse_labels(net, a, "--from")?;
        let b = parse_labels(net, b, "--to")?;
        let w = avoidance_block(&spec, &a, &b).flag("--from/--to")?;
        let mut table = Table::new(&["from", "to", "w"]);
        for (r, i) in a.iter().enumerate() {
            for (c, j) in b.iter().enumerate() {
                table.push(vec![
                    net.label(i).to_string(),
                    net.label(j).to_string(),
                    fmt_num(w[(r, c)]),
                ]);
            }
        }
        let json = json!({
            "rows": a.labels(net),
            "cols": b.labels(net),
            "w": matrix_json(&w),
        });
        return Ok(Output {
            json,
            table,
            status: 0,
        });
    }
    let Some(raw) = exclude else {
        return Err(user("--exclude", "give --exclude or both --from and --to"));
    };
    let s = parse_labels(net, raw, "--exclude")?;
    let w = walk_matrix(&spec, &s).flag("--exclude")?;
    let dense = w.to_dense();
    let decomposition = intercentrality_decomposition(&spec, &s).flag("--exclude")?;
    let mut headers = vec!["from".to_string()];
    headers.extend(net.labels().iter().cloned());
    let mut table = Table {
        headers,
        rows: Vec::new(),
    };
    for i in 0..net.n() {
        let mut row = vec![net.label(i).to_string()];
        row.extend((0..net.n()).map(|j| fmt_num(dense[(i, j)])));
        table.push(row);
    }
    let json = json!({
        "excluded": s.labels(net),
        "labels": net.labels(),
        "w": matrix_json(&dense),
        "term_i": decomposition.term_i,
        "term_ii": decomposition.term_ii,
        "intercentrality": decomposition.term_i + decomposition.term_ii,
    });
    Ok(Output {
        json,
        table,
        status: 0,
    })
}

struct ExtensionParams {
    beta: Option<f64>,
    gamma: Option<f64>,
    phi: Option<f64>,
    theta: String,
    theta_a: String,
    theta_b: String,
}

fn theta_or_ones(net: &Network, source: &str, flag: &str) -> Result<DVector<f64>, Failure> {
    Ok(read_theta(net, source, flag)?.unwrap_or_else(|| DVector::from_element(net.n(), 1.0)))
}

fn extension(
    model: Model,
    graph: &Path,
    delta: f64,
    p: &ExtensionParams,
) -> Result<Output, Failure> {
    let net = read_graph(graph, "--graph")?;
    let labels = net.labels().to_vec();
    let (json, table) = match model {
        Model::Multi => {
            let beta = p
                .beta
                .ok_or_else(|| user("--beta", "required for --model multi"))?;
            let ta = theta_or_ones(&net, &p.theta_a, "--theta-a")?;
            let tb = theta_or_ones(&net, &p.theta_b, "--theta-b")?;
            let spec = MultiActivitySpec::new(net, ta, tb, delta, beta).flag("--delta/--beta")?;
            let eq = multi_activity_equilibrium(&spec)?;
            let mut table = Table::new(&["label", "x_a", "x_b"]);
            for (i, l) in labels.iter().enumerate() {
                table.push(vec![l.clone(), fmt_num(eq.x_a[i]), fmt_num(eq.x_b[i])]);
            }
            (
                json!({ "model": "multi", "labels": labels, "x_a": eq.x_a, "x_b": eq.x_b }),
                table,
            )
        }
        Model::Congestion => {
            let gamma = p
                .gamma
                .ok_or_else(|| user("--gamma", "required for --model congestion"))?;
            let theta = theta_or_ones(&net, &p.theta, "--theta")?;
            let spec = CongestionSpec::new(net, theta, delta, gamma).flag("--delta/--gamma")?;
            let eq = congestion_equilibrium(&spec)?;
            let mut table = Table::new(&["label", "x"]);
            for (i, l) in labels.iter().enumerate() {
                table.push(vec![l.clone(), fmt_num(eq.x[i])]);
            }
            let roots = eq.roots.map(|(a, b)| json!([a, b]));
            (
                json!({ "model": "congestion", "labels": labels, "x": eq.x, "roots": roots }),
                table,
            )
        }
        Model::Global => {
            let phi = p
                .phi
                .ok_or_else(|| user("--phi", "required for --model global"))?;
            let spec = GlobalSubstitutionSpec::new(net, delta, phi).flag("--delta/--phi")?;
            let eq = global_substitution_equilibrium(&spec)?;
            let mut table = Table::new(&["label", "x"]);
            for (i, l) in labels.iter().enumerate() {
                table.push(vec![l.clone(), fmt_num(eq.x[i])]);
            }
            (
                json!({ "model": "global", "labels": labels, "x": eq.x, "aggregate": eq.aggregate }),
                table,
            )
        }
    };
    Ok(Output {
        json,
        table,
        status: 0,
    })
}

fn reproduce(table: Option<u8>, fixtures: Option<&Path>) -> Result<Output, Failure> {
    let fixtures = match fixtures {
        Some(dir) => Fixtures::from_dir(dir).flag("--fixtures")?,
        None => Fixtures::embedded(),
    };
    let reports: Vec<TableReport> = match table {
        Some(t) => vec![reproduce_table(&fixtures, t).flag("--table")?],
        None => reproduce_all(&fixtures)?,
    };
    let mut out = Table::new(&["table", "row", "column", "expected", "computed", "status"]);
    for r in &reports {
        for c in &r.cells {
            out.push(vec![
                r.table.to_string(),
                c.row.clone(),
                c.column.clone(),
                format!("{}", c.expected),
                fmt_num(c.computed),
                if c.passed { "pass" } else { "FAIL" }.to_string(),
            ]);
        }
        for c in &r.checks {
            out.push(vec![
                r.table.to_string(),
                c.description.clone(),
                "check".to_string(),
                String::new(),
                String::new(),
                if c.passed { "pass" } else { "FAIL" }.to_string(),
            ]);
        }
        out.push(vec![
            r.table.to_string(),
            "fixture".to_string(),
            "valid".to_string(),
            String::new(),
            String::new(),
            if r.fixture_valid { "pass" } else { "FAIL" }.to_string(),
        ]);
    }
    let all_passed = reports.iter().all(|r| r.passed() && r.fixture_valid);
    let json = json!({
        "tables": serde_json::to_value(&reports).expect("serializable"),
        "all_passed": all_passed,
    });
    Ok(Output {
        json,
        table: out,
        status: if all_passed { 0 } else { 1 },
    })
}
