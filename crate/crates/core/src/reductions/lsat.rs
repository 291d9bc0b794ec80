//! Escape-tree instance built from an LSAT formula.
//!
//! The formula is satisfiable exactly when the graph has a binary escape tree
//! rooted at `r`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::graph::{MultiGraph, VertexId, VertexKind};

use super::formula::{CnfFormula, Lit};
use super::{id, ReductionError};

/// Vertex counts of the emitted graph, broken down by gadget.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LsatCensus {
    pub variable_gadget: usize,
    pub clause_gadget: usize,
    pub spine: usize,
    pub total: usize,
    pub max_degree: u32,
}

fn x_root(i: usize) -> VertexId {
    id(format!("X{i}"))
}

fn spine_var(i: usize) -> VertexId {
    id(format!("X'{i}"))
}

fn spine_clause(j: usize) -> VertexId {
    id(format!("C'{j}"))
}

fn lit_node(i: usize, positive: bool) -> VertexId {
    id(if positive { format!("x{i}") } else { format!("~x{i}") })
}

fn leaf(i: usize, positive: bool, k: usize) -> VertexId {
    id(if positive { format!("x{i}^{k}") } else { format!("~x{i}^{k}") })
}

fn clause_node(j: usize, half: usize) -> VertexId {
    id(format!("C{j}^{half}"))
}

fn exit_of(v: &VertexId, k: usize) -> VertexId {
    id(format!("{v}.o{k}"))
}

fn add_exit(g: &mut MultiGraph, v: &VertexId, k: usize) {
    let x = exit_of(v, k);
    g.add_vertex(x.clone(), VertexKind::Exit).unwrap();
    g.add_edge(v.clone(), x, 1).unwrap();
}

fn add(g: &mut MultiGraph, v: &VertexId) {
    g.add_vertex(v.clone(), VertexKind::Regular).unwrap();
}

/// For each clause and literal position, the leaf that literal is wired to:
/// the opposite literal's first leaf on its first occurrence, the second
/// leaf on its second.
pub(crate) fn wiring(f: &CnfFormula) -> Vec<Vec<VertexId>> {
    let mut seen: BTreeMap<Lit, usize> = BTreeMap::new();
    f.clauses
        .iter()
        .map(|c| {
            c.iter()
                .map(|&l| {
                    let k = seen.entry(l).or_insert(0);
                    *k += 1;
                    leaf(l.var, !l.positive, *k)
                })
                .collect()
        })
        .collect()
}

/// Builds the graph and returns it with the root `r`.
pub fn lsat_to_bet_instance(f: &CnfFormula) -> Result<(MultiGraph, VertexId), ReductionError> {
    if let Some(why) = f.lsat_violation() {
        return Err(ReductionError::NotLsat(why));
    }
    if f.num_vars == 0 {
        return Err(ReductionError::Formula("no variables".into()));
    }
    let wires = wiring(f);
    let mut g = MultiGraph::new();
    let r = id("r");
    add(&mut g, &r);
    add_exit(&mut g, &r, 1);
    let mut prev = r.clone();
    for i in 1..=f.num_vars {
        let sp = spine_var(i);
        add(&mut g, &sp);
        g.add_edge(prev.clone(), sp.clone(), 1)?;
        let x = x_root(i);
        add(&mut g, &x);
        g.add_edge(sp.clone(), x.clone(), 1)?;
        add_exit(&mut g, &x, 1);
        for positive in [true, false] {
            let l = lit_node(i, positive);
            add(&mut g, &l);
            g.add_edge(x.clone(), l.clone(), 1)?;
            for k in 1..=2 {
                let lf = leaf(i, positive, k);
                add(&mut g, &lf);
                g.add_edge(l.clone(), lf.clone(), 1)?;
                add_exit(&mut g, &lf, 1);
                add_exit(&mut g, &lf, 2);
            }
        }
        prev = sp;
    }
    for (j, c) in f.clauses.iter().enumerate() {
        let j = j + 1;
        let sp = spine_clause(j);
        add(&mut g, &sp);
        g.add_edge(prev.clone(), sp.clone(), 1)?;
        let (c1, c2) = (clause_node(j, 1), clause_node(j, 2));
        add(&mut g, &c1);
        add(&mut g, &c2);
        g.add_edge(sp.clone(), c1.clone(), 1)?;
        g.add_edge(c1.clone(), c2.clone(), 1)?;
        add_exit(&mut g, &c1, 1);
        add_exit(&mut g, &c2, 1);
        for (k, target) in wires[j - 1].iter().enumerate().take(c.len()) {
            let owner = if k == 0 { &c1 } else { &c2 };
            g.add_edge(owner.clone(), target.clone(), 1)?;
        }
        prev = sp;
    }
    add_exit(&mut g, &prev, 1);
    Ok((g, r))
}

/// Independent pass over an emitted graph: gadget shapes, wiring, degree bound.
pub fn check_lsat_bet(f: &CnfFormula, g: &MultiGraph, root: &VertexId) -> Result<LsatCensus, Vec<String>> {
    let mut errors = Vec::new();
    let exit_count = |v: &VertexId| g.neighbors(v).filter(|(y, _)| g.is_exit(y)).count();
    let has = |u: &VertexId, v: &VertexId| g.multiplicity(u, v) == 1;
    if !g.is_simple() {
        errors.push("graph is not simple".into());
    }
    if exit_count(root) != 1 {
        errors.push("root must have one exit".into());
    }
    let mut variable_gadget = 0;
    for i in 1..=f.num_vars {
        let x = x_root(i);
        if exit_count(&x) != 1 || !has(&spine_var(i), &x) {
            errors.push(format!("variable root {x} malformed"));
        }
        variable_gadget += 2;
        for positive in [true, false] {
            let l = lit_node(i, positive);
            if !has(&x, &l) {
                errors.push(format!("{l} not a child of {x}"));
            }
            variable_gadget += 1;
            for k in 1..=2 {
                let lf = leaf(i, positive, k);
                if !has(&l, &lf) || exit_count(&lf) != 2 {
                    errors.push(format!("leaf {lf} malformed"));
                }
                variable_gadget += 3;
            }
        }
    }
    let wires = wiring(f);
    let mut clause_gadget = 0;
    for (j, c) in f.clauses.iter().enumerate() {
        let j = j + 1;
        let (c1, c2) = (clause_node(j, 1), clause_node(j, 2));
        if !has(&spine_clause(j), &c1) || !has(&c1, &c2) || exit_count(&c1) != 1 || exit_count(&c2) != 1 {
            errors.push(format!("clause gadget {j} malformed"));
        }
        for (k, l) in c.iter().enumerate() {
            let owner = if k == 0 { &c1 } else { &c2 };
            let target = &wires[j - 1][k];
            let opposite = target.as_str().starts_with('~') == l.positive;
            if !has(owner, target) || !opposite {
                errors.push(format!("clause {j} literal {l} not wired to {target}"));
            }
        }
        clause_gadget += 4;
    }
    let spine = 1 + f.num_vars + f.num_clauses() + 2;
    let total = g.vertex_count();
    if total != spine + variable_gadget + clause_gadget {
        errors.push(format!(
            "vertex count {total} differs from census {}",
            spine + variable_gadget + clause_gadget
        ));
    }
    let max_degree = g.max_degree();
    if max_degree > 4 {
        errors.push(format!("maximum degree {max_degree} exceeds 4"));
    }
    if errors.is_empty() {
        Ok(LsatCensus {
            variable_gadget,
            clause_gadget,
            spine,
            total,
            max_degree,
        })
    } else {
        Err(errors)
    }
}
