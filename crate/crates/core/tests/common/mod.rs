//! Instance generators shared by the integration test targets.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use nemesis_core::graph::validate;
use nemesis_core::{Instance, MultiGraph, VertexKind, Variant};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn vid(i: usize) -> String {
    format!("v{i}")
}

/// Builds an instance on `v0..v{n-1}` with `v0` as start; exit–exit edges
/// are dropped by validation.
pub fn assemble(n: usize, exits: &BTreeSet<usize>, edges: &[(usize, usize, u32)], variant: Variant) -> Instance {
    let mut g = MultiGraph::new();
    for i in 0..n {
        let kind = if exits.contains(&i) { VertexKind::Exit } else { VertexKind::Regular };
        g.add_vertex(vid(i), kind).unwrap();
    }
    for &(u, v, m) in edges {
        g.add_edge(vid(u), vid(v), m).unwrap();
    }
    let mut inst = Instance::new(g, vid(0), variant);
    validate(&mut inst).unwrap();
    inst
}

/// Random multigraph: up to `max_v` vertices, up to `max_e` distinct pairs,
/// multiplicities in 1..=max_mult. Start `v0` is regular.
pub fn random_multigraph(rng: &mut impl Rng, max_v: usize, max_e: usize, max_mult: u32, variant: Variant) -> Instance {
    let n = rng.gen_range(2..=max_v);
    let exits: BTreeSet<usize> = if variant == Variant::CatHerding {
        BTreeSet::new()
    } else {
        (1..n).filter(|_| rng.gen_bool(0.35)).collect()
    };
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    pairs.shuffle(rng);
    let e = rng.gen_range(1..=max_e.min(pairs.len()));
    let edges: Vec<(usize, usize, u32)> = pairs[..e].iter().map(|&(u, v)| (u, v, rng.gen_range(1..=max_mult))).collect();
    assemble(n, &exits, &edges, variant)
}

/// Random simple graph with at most `max_v` vertices and edge probability `p`.
pub fn random_simple(rng: &mut impl Rng, max_v: usize, p: f64, variant: Variant) -> Instance {
    let n = rng.gen_range(2..=max_v);
    let exits: BTreeSet<usize> = (1..n).filter(|_| rng.gen_bool(0.3)).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v, 1));
            }
        }
    }
    assemble(n, &exits, &edges, variant)
}

/// Random connected simple graph with maximum degree 3.
pub fn random_deg3(rng: &mut impl Rng, max_v: usize) -> Instance {
    let n = rng.gen_range(2..=max_v);
    let mut deg = vec![0usize; n];
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for v in 1..n {
        let open: Vec<usize> = (0..v).filter(|&u| deg[u] < 3).collect();
        let u = *open.choose(rng).expect("a tree with max degree 3 always has an open vertex");
        edges.insert((u, v));
        deg[u] += 1;
        deg[v] += 1;
    }
    for _ in 0..rng.gen_range(0..=n) {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let key = (u.min(v), u.max(v));
        if u != v && deg[u] < 3 && deg[v] < 3 && edges.insert(key) {
            deg[u] += 1;
            deg[v] += 1;
        }
    }
    let exits: BTreeSet<usize> = (1..n).filter(|_| rng.gen_bool(0.35)).collect();
    let list: Vec<(usize, usize, u32)> = edges.into_iter().map(|(u, v)| (u, v, 1)).collect();
    assemble(n, &exits, &list, Variant::Nemesis)
}

/// Canonical string of a tree rooted at `r` (AHU encoding).
fn encode(adj: &[Vec<usize>], r: usize, parent: usize) -> String {
    let mut parts: Vec<String> = adj[r].iter().filter(|&&c| c != parent).map(|&c| encode(adj, c, r)).collect();
    parts.sort();
    format!("({})", parts.concat())
}

fn centers(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    if n <= 2 {
        return (0..n).collect();
    }
    let mut deg: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut leaves: Vec<usize> = (0..n).filter(|&v| deg[v] == 1).collect();
    let mut left = n;
    while left > 2 {
        left -= leaves.len();
        let mut next = Vec::new();
        for &l in &leaves {
            for &y in &adj[l] {
                if deg[y] == 0 {
                    continue;
                }
                deg[y] -= 1;
                if deg[y] == 1 {
                    next.push(y);
                }
            }
            deg[l] = 0;
        }
        leaves = next;
    }
    leaves
}

fn canonical(adj: &[Vec<usize>]) -> String {
    centers(adj).iter().map(|&c| encode(adj, c, usize::MAX)).min().unwrap()
}

/// All unlabeled trees with exactly `n` vertices, as adjacency lists.
pub fn all_trees(n: usize) -> Vec<Vec<Vec<usize>>> {
    let mut level: BTreeMap<String, Vec<Vec<usize>>> = BTreeMap::new();
    level.insert(canonical(&[vec![]]), vec![vec![]]);
    for size in 2..=n {
        let mut next = BTreeMap::new();
        for t in level.values() {
            for v in 0..size - 1 {
                let mut adj = t.clone();
                adj.push(vec![v]);
                adj[v].push(size - 1);
                next.entry(canonical(&adj)).or_insert(adj);
            }
        }
        level = next;
    }
    level.into_values().collect()
}

/// Every exit labeling of a tree: a start vertex plus an independent exit
/// set avoiding it.
pub fn tree_labelings(adj: &[Vec<usize>]) -> Vec<Instance> {
    let n = adj.len();
    let mut out = Vec::new();
    for start in 0..n {
        for mask in 0u32..1 << n {
            if mask >> start & 1 == 1 {
                continue;
            }
            let independent = (0..n).all(|u| mask >> u & 1 == 0 || adj[u].iter().all(|&v| mask >> v & 1 == 0));
            if !independent {
                continue;
            }
            // Relabel so that the start becomes v0.
            let map = |x: usize| if x == start { 0 } else if x == 0 { start } else { x };
            let exits: BTreeSet<usize> = (0..n).filter(|&u| mask >> u & 1 == 1).map(map).collect();
            let mut edges = Vec::new();
            for u in 0..n {
                for &v in &adj[u] {
                    if u < v {
                        edges.push((map(u), map(v), 1));
                    }
                }
            }
            out.push(assemble(n, &exits, &edges, Variant::Nemesis));
        }
    }
    out
}
