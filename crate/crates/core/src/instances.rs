//! Small named instances used throughout the tests and the CLI gallery.

use crate::graph::{Instance, MultiGraph, VertexKind, Variant};

fn build(regular: &[&str], exits: &[&str], edges: &[(&str, &str, u32)], start: &str) -> Instance {
    let mut g = MultiGraph::new();
    for v in regular {
        g.add_vertex(*v, VertexKind::Regular).unwrap();
    }
    for x in exits {
        g.add_vertex(*x, VertexKind::Exit).unwrap();
    }
    for (u, v, m) in edges {
        g.add_edge(*u, *v, *m).unwrap();
    }
    Instance::new(g, start, Variant::Nemesis)
}

/// Two-door: s–a, a–t1, a–t2.
pub fn i1() -> Instance {
    build(&["s", "a"], &["t1", "t2"], &[("s", "a", 1), ("a", "t1", 1), ("a", "t2", 1)], "s")
}

/// One-door: s–a–t.
pub fn i2() -> Instance {
    build(&["s", "a"], &["t"], &[("s", "a", 1), ("a", "t", 1)], "s")
}

/// Double-edge door: s–a, a–x with multiplicity 2.
pub fn i3() -> Instance {
    build(&["s", "a"], &["x"], &[("s", "a", 1), ("a", "x", 2)], "s")
}

/// Trap cycle: 4-cycle s–a–b–c with a single exit hanging off b.
pub fn i4() -> Instance {
    build(
        &["s", "a", "b", "c"],
        &["t"],
        &[("s", "a", 1), ("a", "b", 1), ("b", "c", 1), ("c", "s", 1), ("b", "t", 1)],
        "s",
    )
}

/// Rank chain: s–c, c adjacent to p and q, each with two exit edges.
pub fn i5() -> Instance {
    build(
        &["s", "c", "p", "q"],
        &["x1", "x2", "x3", "x4"],
        &[
            ("s", "c", 1),
            ("c", "p", 1),
            ("c", "q", 1),
            ("p", "x1", 1),
            ("p", "x2", 1),
            ("q", "x3", 1),
            ("q", "x4", 1),
        ],
        "s",
    )
}

pub fn named(name: &str) -> Option<Instance> {
    match name.to_ascii_lowercase().as_str() {
        "i1" => Some(i1()),
        "i2" => Some(i2()),
        "i3" => Some(i3()),
        "i4" => Some(i4()),
        "i5" => Some(i5()),
        _ => None,
    }
}
