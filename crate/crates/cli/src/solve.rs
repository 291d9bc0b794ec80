use anyhow::{anyhow, bail, Result};
use clap::Subcommand;
use nemesis_core::exact::{best_response_fugitive, cat_value, solve, with_stack, Outcome, SearchConfig, Verdict};
use nemesis_core::fast::{blizzard_wsets, find_bet_near, tree_condition_deg3, tree_condition_tree};
use nemesis_core::graph::simplify;
use nemesis_core::reductions::grid_instance;
use nemesis_core::strategy::CornerCut;
use nemesis_core::{Instance, Variant};
use serde_json::{json, Value};

use crate::{print_json, Code, Common, Method, SCHEMA_VERSION};

/// `verify` refuses larger instances unless forced (total multiplicity).
pub const ORACLE_LIMIT: u64 = 40;

#[derive(Subcommand)]
pub enum Experiment {
    /// Square grid: exact verdict, tree condition, and best response against
    /// the corner-cut adversary.
    Grid {
        #[arg(long, default_value_t = 11)]
        size: usize,
        /// Start cell as `row,col`; the center by default.
        #[arg(long)]
        start: Option<String>,
    },
}

fn config(c: &Common) -> SearchConfig {
    SearchConfig {
        node_budget: c.budget,
        round_cap: c.cap,
        ..SearchConfig::default()
    }
}

/// Method `auto` would pick. The classification is made on the simplified
/// graph, which is what the fast solvers look at.
pub fn classify(inst: &Instance) -> Method {
    match inst.variant {
        Variant::Blizzard => Method::Blizzard,
        Variant::CatHerding => Method::Exact,
        Variant::Nemesis => {
            let s = simplify(inst);
            if s.graph.is_exit(&s.start) || s.graph.is_tree() {
                Method::Tree
            } else if s.graph.is_simple() && s.graph.max_degree() <= 3 {
                Method::Deg3
            } else {
                Method::Exact
            }
        }
    }
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Auto => "auto",
        Method::Exact => "exact",
        Method::Tree => "tree",
        Method::Deg3 => "deg3",
        Method::Blizzard => "blizzard",
    }
}

fn fast(inst: &Instance, method: Method) -> Result<Verdict> {
    let v = match method {
        Method::Tree => tree_condition_tree(inst),
        Method::Deg3 => tree_condition_deg3(inst),
        Method::Blizzard => blizzard_wsets(inst).map(|(_, v)| v),
        Method::Auto | Method::Exact => unreachable!("not a fast method"),
    };
    v.map_err(|e| anyhow!("method {} does not apply: {e}", method_name(method)))
}

fn run_method(c: &Common, inst: &Instance, method: Method) -> Result<Verdict> {
    match method {
        Method::Exact => {
            let cfg = config(c);
            Ok(with_stack(|| solve(inst, &cfg)))
        }
        m => fast(inst, m),
    }
}

fn verdict_json(method: Method, v: &Verdict, certificate: bool) -> Value {
    let mut out = serde_json::to_value(v).expect("verdict serializes");
    let obj = out.as_object_mut().expect("verdict is an object");
    if !certificate {
        obj.remove("certificate");
    }
    obj.insert("schema".into(), json!(SCHEMA_VERSION));
    obj.insert("method".into(), json!(method_name(method)));
    out
}

fn describe(method: Method, v: &Verdict) -> String {
    let who = match v.winner {
        Outcome::Fugitive => "fugitive wins",
        Outcome::Adversary => "adversary wins",
        Outcome::Unknown => "unknown (budget exhausted)",
    };
    format!("{who} [method {}, {} nodes]", method_name(method), v.nodes_explored)
}

pub fn run(c: &Common, inst: &Instance, method: Method) -> Result<Code> {
    let chosen = if method == Method::Auto { classify(inst) } else { method };
    if inst.variant == Variant::CatHerding {
        if chosen != Method::Exact {
            bail!("method {} does not apply to cat herding", method_name(chosen));
        }
        let cfg = config(c);
        let v = with_stack(|| cat_value(inst, &cfg))?;
        if c.json {
            let mut out = serde_json::to_value(v)?;
            out["schema"] = json!(SCHEMA_VERSION);
            out["method"] = json!("exact");
            print_json(&out);
        } else if let Some(value) = v.value {
            println!("cat survives {value} rounds [{} nodes]", v.nodes);
        } else {
            println!("cat survives between {} and {} rounds (budget exhausted) [{} nodes]", v.lower, v.upper, v.nodes);
        }
        return Ok(if v.exact { Code::Done } else { Code::Unknown });
    }
    let v = run_method(c, inst, chosen)?;
    if c.json {
        print_json(&verdict_json(chosen, &v, c.certificate));
    } else {
        println!("{}", describe(chosen, &v));
        if let Some(pv) = &v.principal_variation {
            let line: Vec<String> = pv.iter().map(|m| m.to_string()).collect();
            println!("line: {}", line.join(", "));
        }
        if c.certificate {
            if let Some(cert) = &v.certificate {
                println!("certificate: {cert}");
            }
        }
    }
    Ok(v.winner.into())
}

/// Fast solver against the exact solver. Exit 0 on agreement, 1 on mismatch.
pub fn verify(c: &Common, inst: &Instance, force: bool) -> Result<Code> {
    let method = classify(inst);
    if inst.variant == Variant::CatHerding || method == Method::Exact {
        bail!("no fast solver applies to this instance");
    }
    let size = inst.graph.total_multiplicity();
    if size > ORACLE_LIMIT && !force {
        bail!("instance has {size} edge copies, above the oracle limit of {ORACLE_LIMIT}; use --force");
    }
    let f = fast(inst, method)?;
    let cfg = config(c);
    let e = with_stack(|| solve(inst, &cfg));
    let agree = e.winner == f.winner;
    if c.json {
        print_json(&json!({
            "schema": SCHEMA_VERSION,
            "method": method_name(method),
            "fast": f.winner,
            "exact": e.winner,
            "nodes": e.nodes_explored,
            "agree": agree,
        }));
    } else if e.winner == Outcome::Unknown {
        println!("undecided: exact search exhausted its budget (fast says {:?})", f.winner);
    } else if agree {
        println!("agree: {}", serde_json::to_value(f.winner)?.as_str().unwrap_or_default());
    } else {
        println!("MISMATCH: {} says {:?}, exact says {:?}", method_name(method), f.winner, e.winner);
    }
    Ok(match (e.winner, agree) {
        (Outcome::Unknown, _) => Code::Unknown,
        (_, true) => Code::Done,
        (_, false) => Code::Adversary,
    })
}

pub fn parse_cell(s: &str) -> Result<(usize, usize)> {
    let (r, c) = s.split_once(',').ok_or_else(|| anyhow!("expected row,col, got `{s}`"))?;
    Ok((r.trim().parse()?, c.trim().parse()?))
}

pub fn experiment(c: &Common, kind: Experiment) -> Result<Code> {
    let Experiment::Grid { size, start } = kind;
    let start = start.as_deref().map(parse_cell).transpose()?;
    let grid = grid_instance(size, size, start)?;
    let (r, col) = start.unwrap_or((size / 2, size / 2));
    let distance = r.min(col).min(size - 1 - r).min(size - 1 - col) + 1;
    let budget = c.budget.unwrap_or(10_000_000);
    let cfg = SearchConfig { round_cap: c.cap, ..SearchConfig::with_budget(budget) };
    let exact = with_stack(|| solve(&grid, &cfg));
    let simple = simplify(&grid);
    let tree = find_bet_near(&simple.graph, &simple.start, Some(budget)).ok().flatten().is_some();
    let response = with_stack(|| best_response_fugitive(&grid, &CornerCut, &cfg));
    if c.json {
        print_json(&json!({
            "schema": SCHEMA_VERSION,
            "size": size,
            "start": [r, col],
            "exit_distance": distance,
            "exact": exact.winner,
            "exact_nodes": exact.nodes_explored,
            "tree_condition": tree,
            "vs_corner_cut": response.winner,
            "vs_corner_cut_nodes": response.nodes_explored,
        }));
    } else {
        println!("{size}x{size} grid, start ({r},{col}), distance {distance} to the exits");
        println!("exact solver: {:?} ({} nodes)", exact.winner, exact.nodes_explored);
        println!("tree condition at start: {}", if tree { "holds" } else { "fails" });
        println!("best fugitive vs corner-cut: {:?} ({} nodes)", response.winner, response.nodes_explored);
    }
    Ok(Code::Done)
}
