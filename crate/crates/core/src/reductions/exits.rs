//! Exit merging and the reduction to two exits.

use std::collections::BTreeMap;

use crate::graph::{Instance, MultiGraph, VertexId, VertexKind, Variant};

use super::ReductionError;

/// Replaces all exits by a single exit `t`; each regular vertex keeps the sum
/// of its former exit-edge multiplicities as its edge to `t`.
pub fn merge_exits(inst: &Instance) -> Instance {
    let g = &inst.graph;
    if g.exits().count() <= 1 {
        return inst.clone();
    }
    let mut out = MultiGraph::new();
    for (v, kind) in g.vertices() {
        if kind == VertexKind::Regular {
            out.add_vertex(v.clone(), kind).unwrap();
        }
    }
    let t = out.fresh_id("t");
    out.add_vertex(t.clone(), VertexKind::Exit).unwrap();
    for (u, v, m) in g.edges() {
        match (g.is_exit(u), g.is_exit(v)) {
            (false, false) => out.add_edge(u.clone(), v.clone(), m).unwrap(),
            (true, false) => out.add_edge(v.clone(), t.clone(), m).unwrap(),
            (false, true) => out.add_edge(u.clone(), t.clone(), m).unwrap(),
            (true, true) => {}
        }
    }
    let start = if g.is_exit(&inst.start) { t.clone() } else { inst.start.clone() };
    let layout = inst.layout.as_ref().map(|l| {
        let mut kept: BTreeMap<VertexId, [f64; 2]> =
            l.iter().filter(|(v, _)| out.contains(v)).map(|(v, p)| (v.clone(), *p)).collect();
        let exits: Vec<[f64; 2]> = g.exits().filter_map(|x| l.get(x).copied()).collect();
        if !exits.is_empty() {
            let k = exits.len() as f64;
            let sx = exits.iter().map(|p| p[0]).sum::<f64>() / k;
            let sy = exits.iter().map(|p| p[1]).sum::<f64>() / k;
            kept.insert(t.clone(), [sx, sy]);
        }
        kept
    });
    Instance {
        graph: out,
        start,
        variant: inst.variant,
        layout,
    }
}

/// Adds `n + 1` hub vertices joined to every old exit and to two new exits.
/// Old exits become regular vertices.
pub fn to_two_exits(inst: &Instance) -> Result<Instance, ReductionError> {
    let g = &inst.graph;
    if inst.variant != Variant::Nemesis {
        return Err(ReductionError::Input(format!("expected a nemesis instance, got {}", inst.variant)));
    }
    if !g.is_simple() {
        return Err(ReductionError::Input("multigraph input; the construction needs a simple graph".into()));
    }
    if g.is_exit(&inst.start) {
        return Err(ReductionError::Input("start vertex is an exit".into()));
    }
    let n = g.vertex_count();
    let old_exits: Vec<VertexId> = g.exits().cloned().collect();
    let mut out = MultiGraph::new();
    for v in g.vertex_ids() {
        out.add_vertex(v.clone(), VertexKind::Regular).unwrap();
    }
    for (u, v, m) in g.edges() {
        if !(g.is_exit(u) && g.is_exit(v)) {
            out.add_edge(u.clone(), v.clone(), m).unwrap();
        }
    }
    let hubs: Vec<VertexId> = (1..=n + 1)
        .map(|i| {
            let y = out.fresh_id(&format!("y{i}"));
            out.add_vertex(y.clone(), VertexKind::Regular).unwrap();
            y
        })
        .collect();
    let exits: Vec<VertexId> = ["t1", "t2"]
        .iter()
        .map(|base| {
            let t = out.fresh_id(base);
            out.add_vertex(t.clone(), VertexKind::Exit).unwrap();
            t
        })
        .collect();
    for y in &hubs {
        for x in &old_exits {
            out.add_edge(x.clone(), y.clone(), 1)?;
        }
        for t in &exits {
            out.add_edge(y.clone(), t.clone(), 1)?;
        }
    }
    Ok(Instance::new(out, inst.start.clone(), Variant::Nemesis))
}

/// Structural check of a two-exit instance against its source.
pub fn check_two_exits(src: &Instance, out: &Instance) -> Result<(), Vec<String>> {
    let (g, h) = (&src.graph, &out.graph);
    let n = g.vertex_count();
    let mut errors = Vec::new();
    if h.vertex_count() != 2 * n + 3 {
        errors.push(format!("expected {} vertices, found {}", 2 * n + 3, h.vertex_count()));
    }
    if !h.is_simple() {
        errors.push("output is not simple".into());
    }
    let exits: Vec<&VertexId> = h.exits().collect();
    if exits.len() != 2 {
        errors.push(format!("expected 2 exits, found {}", exits.len()));
    }
    for v in g.vertex_ids() {
        if h.kind(v) != Some(VertexKind::Regular) {
            errors.push(format!("source vertex {v} is not regular in the output"));
        }
    }
    for (u, v, m) in g.edges() {
        if !(g.is_exit(u) && g.is_exit(v)) && h.multiplicity(u, v) != m {
            errors.push(format!("source edge {u}-{v} not preserved"));
        }
    }
    let hubs: Vec<&VertexId> = h.vertex_ids().filter(|v| !g.contains(v) && !h.is_exit(v)).collect();
    if hubs.len() != n + 1 {
        errors.push(format!("expected {} hub vertices, found {}", n + 1, hubs.len()));
    }
    let old_exits: Vec<&VertexId> = g.exits().collect();
    for y in &hubs {
        let ok = old_exits.iter().all(|x| h.multiplicity(x, y) == 1)
            && exits.iter().all(|t| h.multiplicity(y, t) == 1)
            && h.degree(y) as usize == old_exits.len() + 2;
        if !ok {
            errors.push(format!("hub {y} is not wired to every old exit and both new exits"));
        }
    }
    for t in &exits {
        if h.degree(t) as usize != n + 1 {
            errors.push(format!("exit {t} does not see every hub"));
        }
    }
    if out.start != src.start {
        errors.push("start changed".into());
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}
