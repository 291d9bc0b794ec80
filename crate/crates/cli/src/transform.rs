use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Subcommand, ValueEnum};
use nemesis_core::graph::serialize_instance;
use nemesis_core::reductions::{
    check_catherding, check_grid, check_lsat_bet, check_sat_instance, check_simple_translation, check_two_exits,
    default_copies, grid_instance, lsat_to_bet_instance, merge_exits, multigraph_to_simple, nemesis_to_catherding,
    parse_dimacs, parse_qdimacs, qsat_to_nemesis, sat_to_nemesis, to_two_exits, ReductionParams,
};
use nemesis_core::{Instance, Variant};
use serde_json::json;

use crate::{print_json, Code, Common, SCHEMA_VERSION};

#[derive(Subcommand)]
pub enum Generate {
    /// Grid whose border vertices each have one exit edge.
    Grid {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        /// Start cell as `row,col`; the center by default.
        #[arg(long)]
        start: Option<String>,
    },
    /// Instance from a DIMACS CNF formula.
    Sat {
        file: PathBuf,
        /// Overrides such as `K=4,L=20`.
        #[arg(long)]
        params: Option<String>,
    },
    /// Instance from a QDIMACS quantified formula.
    Qsat {
        file: PathBuf,
        #[arg(long)]
        params: Option<String>,
    },
    /// Tree-shaped instance from an LSAT formula (DIMACS).
    LsatBet { file: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Reduction {
    TwoExits,
    MergeExits,
    Simple,
    Catherding,
}

fn checked(what: &str, r: Result<(), Vec<String>>) -> Result<()> {
    r.map_err(|errs| anyhow!("{what} failed its structural check: {}", errs.join("; ")))
}

fn emit(inst: &Instance, output: Option<&Path>) -> Result<()> {
    let text = serialize_instance(inst);
    match output {
        Some(p) => std::fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn report(c: &Common, inst: &Instance, output: Option<&Path>, extra: serde_json::Value) -> Result<Code> {
    if c.json && output.is_some() {
        let mut summary = json!({
            "schema": SCHEMA_VERSION,
            "vertices": inst.graph.vertex_count(),
            "edges": inst.graph.total_multiplicity(),
            "digest": inst.digest(),
        });
        if let (Some(obj), Some(more)) = (summary.as_object_mut(), extra.as_object()) {
            obj.extend(more.clone());
        }
        emit(inst, output)?;
        print_json(&summary);
    } else {
        emit(inst, output)?;
        if let Some(obj) = extra.as_object() {
            for (k, v) in obj {
                eprintln!("{k}: {v}");
            }
        }
    }
    Ok(Code::Done)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn params(p: Option<&str>) -> Result<ReductionParams> {
    Ok(p.map(str::parse).transpose()?.unwrap_or_default())
}

pub fn generate(c: &Common, kind: Generate, output: Option<&Path>) -> Result<Code> {
    match kind {
        Generate::Grid { rows, cols, start } => {
            let start = start.as_deref().map(crate::solve::parse_cell).transpose()?;
            let inst = grid_instance(rows, cols, start)?;
            checked("grid", check_grid(&inst, rows, cols))?;
            report(c, &inst, output, json!({}))
        }
        Generate::Sat { file, params: p } => {
            let f = parse_dimacs(&read(&file)?)?;
            let red = sat_to_nemesis(&f, &params(p.as_deref())?)?;
            checked("sat instance", check_sat_instance(&red))?;
            let extra = json!({"k": red.params.k, "l": red.params.l});
            report(c, &red.instance, output, extra)
        }
        Generate::Qsat { file, params: p } => {
            let q = parse_qdimacs(&read(&file)?)?;
            let red = qsat_to_nemesis(&q, &params(p.as_deref())?)?;
            checked("qsat instance", check_sat_instance(&red))?;
            let extra = json!({"k": red.params.k, "l": red.params.l});
            report(c, &red.instance, output, extra)
        }
        Generate::LsatBet { file } => {
            let f = parse_dimacs(&read(&file)?)?;
            let (g, root) = lsat_to_bet_instance(&f)?;
            checked("lsat tree", check_lsat_bet(&f, &g, &root).map(|_| ()))?;
            report(c, &Instance::new(g, root, Variant::Nemesis), output, json!({}))
        }
    }
}

pub fn reduce(c: &Common, r: Reduction, inst: &Instance, copies: Option<u32>, output: Option<&Path>) -> Result<Code> {
    if copies.is_some() && r != Reduction::Simple {
        bail!("--copies only applies to the simple reduction");
    }
    match r {
        Reduction::TwoExits => {
            let out = to_two_exits(inst)?;
            checked("two-exit reduction", check_two_exits(inst, &out))?;
            report(c, &out, output, json!({}))
        }
        Reduction::MergeExits => report(c, &merge_exits(inst), output, json!({})),
        Reduction::Simple => {
            let n = copies.unwrap_or_else(|| default_copies(inst));
            let out = multigraph_to_simple(inst, Some(n))?;
            checked("simple translation", check_simple_translation(inst, &out, n))?;
            report(c, &out, output, json!({"copies": n}))
        }
        Reduction::Catherding => {
            let red = nemesis_to_catherding(inst)?;
            checked("cat herding reduction", check_catherding(inst, &red))?;
            report(c, &red.instance, output, json!({"threshold": red.threshold}))
        }
    }
}
