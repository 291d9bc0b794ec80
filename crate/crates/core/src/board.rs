//! Index-based view of an instance used by the referee and the solvers.

use std::collections::VecDeque;

use rustc_hash::FxHashMap;

use crate::graph::{Instance, VertexId, VertexKind, Variant};

/// Vertices and edges of an instance numbered in canonical order.
#[derive(Debug, Clone)]
pub struct Board {
    pub ids: Vec<VertexId>,
    pub exit: Vec<bool>,
    /// Edge endpoints, lower index first.
    pub ends: Vec<(usize, usize)>,
    pub init: Vec<u32>,
    /// Per vertex: (neighbor, edge index), neighbors ascending.
    pub adj: Vec<Vec<(usize, usize)>>,
    pub start: usize,
    pub variant: Variant,
    pub digest: String,
    index: FxHashMap<VertexId, usize>,
    edge_index: FxHashMap<(usize, usize), usize>,
    instance: Instance,
}

impl Board {
    /// Panics if `inst.start` is not a vertex; callers validate first.
    pub fn new(inst: &Instance) -> Board {
        let g = &inst.graph;
        let ids: Vec<VertexId> = g.vertex_ids().cloned().collect();
        let index: FxHashMap<VertexId, usize> =
            ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
        let exit = ids.iter().map(|id| g.kind(id) == Some(VertexKind::Exit)).collect();
        let mut ends = Vec::new();
        let mut init = Vec::new();
        let mut adj = vec![Vec::new(); ids.len()];
        let mut edge_index = FxHashMap::default();
        for (u, v, m) in g.edges() {
            let (a, b) = (index[u], index[v]);
            let e = ends.len();
            ends.push((a, b));
            init.push(m);
            adj[a].push((b, e));
            adj[b].push((a, e));
            edge_index.insert((a, b), e);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Board {
            start: index[&inst.start],
            ids,
            exit,
            ends,
            init,
            adj,
            variant: inst.variant,
            digest: inst.digest(),
            index,
            edge_index,
            instance: inst.clone(),
        }
    }

    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.ends.len()
    }

    pub fn vertex(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn edge(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_index.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn other(&self, e: usize, x: usize) -> usize {
        let (a, b) = self.ends[e];
        if a == x {
            b
        } else {
            a
        }
    }

    pub fn total_multiplicity(&self) -> u64 {
        self.init.iter().map(|&m| m as u64).sum()
    }

    /// Default round cap: total multiplicity plus vertex count.
    pub fn default_cap(&self) -> u64 {
        self.total_multiplicity() + self.n() as u64
    }

    /// BFS distances to the nearest exit in the initial graph (`u32::MAX` if none).
    pub fn exit_distance(&self) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.n()];
        let mut queue = VecDeque::new();
        for v in 0..self.n() {
            if self.exit[v] {
                dist[v] = 0;
                queue.push_back(v);
            }
        }
        while let Some(x) = queue.pop_front() {
            for &(y, _) in &self.adj[x] {
                if dist[y] == u32::MAX {
                    dist[y] = dist[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        dist
    }
}
