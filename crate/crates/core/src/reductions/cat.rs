//! Nemesis with two exits as a Cat Herding threshold question.

use std::collections::BTreeSet;

use crate::graph::{Instance, MultiGraph, VertexId, VertexKind, Variant};

use super::{id, ReductionError};

#[derive(Clone, Debug, PartialEq)]
pub struct CatReduction {
    pub instance: Instance,
    /// The fugitive wins the source iff the cat survives more than this many rounds.
    pub threshold: u64,
    pub clique_size: usize,
    /// The former exits, one per clique.
    pub anchors: Vec<VertexId>,
}

fn member(anchor: &VertexId, k: usize) -> VertexId {
    id(format!("{anchor}+{k}"))
}

/// Attaches a clique of size 2m at each of the two exits, which become
/// ordinary vertices; m is the number of edges of the source.
pub fn nemesis_to_catherding(inst: &Instance) -> Result<CatReduction, ReductionError> {
    let g = &inst.graph;
    if inst.variant != Variant::Nemesis {
        return Err(ReductionError::Input(format!("expected a nemesis instance, got {}", inst.variant)));
    }
    if !g.is_simple() {
        return Err(ReductionError::Input("multigraph input; the construction needs a simple graph".into()));
    }
    let anchors: Vec<VertexId> = g.exits().cloned().collect();
    if anchors.len() != 2 {
        return Err(ReductionError::Input(format!(
            "expected exactly 2 exits, found {}; apply the two-exit reduction first",
            anchors.len()
        )));
    }
    if g.is_exit(&inst.start) {
        return Err(ReductionError::Input("start vertex is an exit".into()));
    }
    let mut out = MultiGraph::new();
    for v in g.vertex_ids() {
        out.add_vertex(v.clone(), VertexKind::Regular)?;
    }
    for (u, v, m) in g.edges() {
        if !(g.is_exit(u) && g.is_exit(v)) {
            out.add_edge(u.clone(), v.clone(), m)?;
        }
    }
    let m = out.edge_count();
    if m == 0 {
        return Err(ReductionError::Input("source has no edges".into()));
    }
    let size = 2 * m;
    for a in &anchors {
        let mut clique = vec![a.clone()];
        for k in 1..size {
            let v = member(a, k);
            out.add_vertex(v.clone(), VertexKind::Regular)?;
            clique.push(v);
        }
        for (i, x) in clique.iter().enumerate() {
            for y in &clique[i + 1..] {
                out.add_edge(x.clone(), y.clone(), 1)?;
            }
        }
    }
    Ok(CatReduction {
        instance: Instance::new(out, inst.start.clone(), Variant::CatHerding),
        threshold: size as u64,
        clique_size: size,
        anchors,
    })
}

/// Clique sizes, threshold, absence of exits and preservation of the source.
pub fn check_catherding(src: &Instance, red: &CatReduction) -> Result<(), Vec<String>> {
    let (g, h) = (&src.graph, &red.instance.graph);
    let mut errors = Vec::new();
    let m = g.edges().filter(|(u, v, _)| !(g.is_exit(u) && g.is_exit(v))).count();
    if red.instance.variant != Variant::CatHerding {
        errors.push("output variant is not catherding".into());
    }
    if h.exits().next().is_some() {
        errors.push("output contains exits".into());
    }
    if red.threshold != 2 * m as u64 || red.clique_size != 2 * m {
        errors.push(format!("threshold {} / clique {} differ from 2m = {}", red.threshold, red.clique_size, 2 * m));
    }
    for (u, v, mult) in g.edges() {
        if !(g.is_exit(u) && g.is_exit(v)) && h.multiplicity(u, v) != mult {
            errors.push(format!("source edge {u}-{v} not preserved"));
        }
    }
    let src_exits: BTreeSet<&VertexId> = g.exits().collect();
    for a in &src_exits {
        let members: Vec<&VertexId> = h.vertex_ids().filter(|v| !g.contains(v) && v.as_str().starts_with(&format!("{a}+"))).collect();
        let mut clique: Vec<&VertexId> = members.clone();
        clique.push(a);
        if clique.len() != 2 * m {
            errors.push(format!("clique at {a} has {} vertices, expected {}", clique.len(), 2 * m));
        }
        for (i, x) in clique.iter().enumerate() {
            for y in &clique[i + 1..] {
                if h.multiplicity(x, y) != 1 {
                    errors.push(format!("clique at {a} misses edge {x}-{y}"));
                }
            }
        }
        for x in &members {
            if h.degree(x) as usize != clique.len() - 1 {
                errors.push(format!("clique vertex {x} has outside edges"));
            }
        }
    }
    let expected = g.vertex_count() + src_exits.len() * (2 * m).saturating_sub(1);
    if h.vertex_count() != expected {
        errors.push(format!("expected {expected} vertices, found {}", h.vertex_count()));
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::named;
    use crate::reductions::to_two_exits;

    #[test]
    fn i1_cliques() {
        let src = named("i1").unwrap();
        let red = nemesis_to_catherding(&src).unwrap();
        assert_eq!(red.threshold, 6);
        assert_eq!(red.clique_size, 6);
        check_catherding(&src, &red).unwrap();
        assert_eq!(red.instance.graph.exits().count(), 0);
    }

    #[test]
    fn i2_needs_two_exits() {
        let src = named("i2").unwrap();
        assert!(nemesis_to_catherding(&src).is_err());
        let two = to_two_exits(&src).unwrap();
        let red = nemesis_to_catherding(&two).unwrap();
        check_catherding(&two, &red).unwrap();
    }
}
