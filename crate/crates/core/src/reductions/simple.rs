//! Translation of a multigraph instance into a simple graph.
//!
//! Every regular vertex becomes N copies. Unbreakable edges become complete
//! bipartite graphs between the copies, single edges become matchings, and an
//! exit edge of multiplicity k becomes k intermediate vertices, each with two
//! private exits and joined to every copy of its regular endpoint.

use crate::graph::{Instance, MultiGraph, VertexId, VertexKind, Variant};

use super::{id, ReductionError};

fn copy(v: &VertexId, i: u32) -> VertexId {
    id(format!("{v}#{i}"))
}

fn relay(u: &VertexId, x: &VertexId, j: u32) -> VertexId {
    id(format!("{u}>{x}.p{j}"))
}

fn relay_exit(p: &VertexId, k: u32) -> VertexId {
    id(format!("{p}.o{k}"))
}

/// One more than the number of regular vertices: no loop-free play of the
/// source lasts that many rounds.
pub fn default_copies(inst: &Instance) -> u32 {
    inst.graph.vertices().filter(|(_, k)| *k == VertexKind::Regular).count() as u32 + 1
}

/// Multiplicity from which an edge counts as unbreakable: the vertex count.
fn unbreakable(inst: &Instance) -> u32 {
    inst.graph.vertex_count() as u32
}

pub fn multigraph_to_simple(inst: &Instance, copies: Option<u32>) -> Result<Instance, ReductionError> {
    let n = copies.unwrap_or_else(|| default_copies(inst));
    let g = &inst.graph;
    if inst.variant != Variant::Nemesis {
        return Err(ReductionError::Input(format!("expected a nemesis instance, got {}", inst.variant)));
    }
    if n < 2 {
        return Err(ReductionError::Params(format!("N = {n} must be at least 2")));
    }
    if g.is_exit(&inst.start) {
        return Err(ReductionError::Input("start vertex is an exit".into()));
    }
    let cap = unbreakable(inst);
    let mut out = MultiGraph::new();
    for v in g.vertex_ids().filter(|v| !g.is_exit(v)) {
        for i in 1..=n {
            out.add_vertex(copy(v, i), VertexKind::Regular)?;
        }
    }
    for (u, v, m) in g.edges() {
        match (g.is_exit(u), g.is_exit(v)) {
            (true, true) => {}
            (false, false) if m == 1 => {
                for i in 1..=n {
                    out.add_edge(copy(u, i), copy(v, i), 1)?;
                }
            }
            (false, false) if m >= cap => {
                for i in 1..=n {
                    for j in 1..=n {
                        out.add_edge(copy(u, i), copy(v, j), 1)?;
                    }
                }
            }
            (false, false) => {
                return Err(ReductionError::Input(format!(
                    "edge {u}-{v} has multiplicity {m}; only 1 or at least {cap} can be translated"
                )))
            }
            (ue, _) => {
                let (inner, x) = if ue { (v, u) } else { (u, v) };
                for j in 1..=m {
                    let p = relay(inner, x, j);
                    out.add_vertex(p.clone(), VertexKind::Regular)?;
                    for k in 1..=2 {
                        let o = relay_exit(&p, k);
                        out.add_vertex(o.clone(), VertexKind::Exit)?;
                        out.add_edge(p.clone(), o, 1)?;
                    }
                    for i in 1..=n {
                        out.add_edge(copy(inner, i), p.clone(), 1)?;
                    }
                }
            }
        }
    }
    let layout = inst.layout.as_ref().map(|l| {
        let mut out_layout = std::collections::BTreeMap::new();
        for (v, p) in l {
            for i in 1..=n {
                let c = copy(v, i);
                if out.contains(&c) {
                    out_layout.insert(c, [p[0] + 0.15 * (i - 1) as f64, p[1] + 0.15 * (i - 1) as f64]);
                }
            }
        }
        out_layout
    });
    Ok(Instance {
        graph: out,
        start: copy(&inst.start, 1),
        variant: Variant::Nemesis,
        layout,
    })
}

/// Checks copies, bicliques, matchings and exit relays against the source.
pub fn check_simple_translation(src: &Instance, out: &Instance, n: u32) -> Result<(), Vec<String>> {
    let (g, h) = (&src.graph, &out.graph);
    let cap = unbreakable(src);
    let mut errors = Vec::new();
    if !h.is_simple() {
        errors.push("output is not simple".into());
    }
    if out.start != copy(&src.start, 1) {
        errors.push("start is not the first copy of the source start".into());
    }
    let regular: Vec<&VertexId> = g.vertex_ids().filter(|v| !g.is_exit(v)).collect();
    for v in &regular {
        for i in 1..=n {
            if h.kind(&copy(v, i)) != Some(VertexKind::Regular) {
                errors.push(format!("missing copy {}", copy(v, i)));
            }
        }
        if h.contains(&copy(v, n + 1)) {
            errors.push(format!("{v} has more than {n} copies"));
        }
    }
    let mut relays = 0;
    let mut exit_total = 0;
    for (u, v, m) in g.edges() {
        match (g.is_exit(u), g.is_exit(v)) {
            (true, true) => {}
            (false, false) => {
                for i in 1..=n {
                    for j in 1..=n {
                        let want = u32::from(m >= cap || i == j);
                        if h.multiplicity(&copy(u, i), &copy(v, j)) != want {
                            let kind = if m >= cap { "biclique" } else { "matching" };
                            errors.push(format!("{kind} {u}-{v} wrong at copies {i},{j}"));
                        }
                    }
                }
            }
            (ue, _) => {
                let (inner, x) = if ue { (v, u) } else { (u, v) };
                exit_total += 2 * m;
                for j in 1..=m {
                    let p = relay(inner, x, j);
                    relays += 1;
                    let exits: Vec<&VertexId> = h.neighbors(&p).map(|(y, _)| y).filter(|y| h.is_exit(y)).collect();
                    if exits.len() != 2 || exits.iter().any(|y| h.degree(y) != 1) {
                        errors.push(format!("relay {p} does not have two private exits"));
                    }
                    if (1..=n).any(|i| h.multiplicity(&copy(inner, i), &p) != 1) || h.degree(&p) != n + 2 {
                        errors.push(format!("relay {p} is not joined to exactly the copies of {inner}"));
                    }
                }
            }
        }
    }
    let expected = regular.len() as u32 * n + relays + exit_total;
    if h.vertex_count() as u32 != expected {
        errors.push(format!("expected {expected} vertices, found {}", h.vertex_count()));
    }
    if h.exits().count() as u32 != exit_total {
        errors.push(format!("expected {exit_total} exits, found {}", h.exits().count()));
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}
