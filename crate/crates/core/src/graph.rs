//! Multigraph substrate, instance files and the two-phase simplification.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Vertex identifier. Ordering is lexicographic on the string and is the
/// canonical order used for every tie-break in the crate.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(String);

impl VertexId {
    pub fn new(id: impl Into<String>) -> Self {
        VertexId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for VertexId {
    fn from(s: &str) -> Self {
        VertexId(s.to_owned())
    }
}

impl From<String> for VertexId {
    fn from(s: String) -> Self {
        VertexId(s)
    }
}

impl Borrow<str> for VertexId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexKind {
    Regular,
    Exit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Nemesis,
    Blizzard,
    #[serde(rename = "catherding")]
    CatHerding,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Nemesis => "nemesis",
            Variant::Blizzard => "blizzard",
            Variant::CatHerding => "catherding",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex `{0}` does not exist")]
    UnknownVertex(VertexId),
    #[error("vertex `{0}` declared twice")]
    DuplicateVertex(VertexId),
    #[error("self-loop on vertex `{0}`")]
    SelfLoop(VertexId),
    #[error("edge {0}-{1} has multiplicity {2}; must be at least 1")]
    BadMultiplicity(VertexId, VertexId, i64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InstanceError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("start vertex `{0}` is not declared")]
    MissingStart(VertexId),
    #[error("catherding instance contains exit `{0}`")]
    ExitInCatHerding(VertexId),
}

/// Undirected multigraph. Edges are stored once per unordered pair together
/// with their multiplicity; the adjacency index is kept symmetric.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MultiGraph {
    kinds: BTreeMap<VertexId, VertexKind>,
    adj: BTreeMap<VertexId, BTreeMap<VertexId, u32>>,
}

impl MultiGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, id: impl Into<VertexId>, kind: VertexKind) -> Result<(), GraphError> {
        let id = id.into();
        if self.kinds.contains_key(&id) {
            return Err(GraphError::DuplicateVertex(id));
        }
        self.adj.insert(id.clone(), BTreeMap::new());
        self.kinds.insert(id, kind);
        Ok(())
    }

    pub fn set_kind(&mut self, id: &VertexId, kind: VertexKind) -> Result<(), GraphError> {
        match self.kinds.get_mut(id) {
            Some(k) => {
                *k = kind;
                Ok(())
            }
            None => Err(GraphError::UnknownVertex(id.clone())),
        }
    }

    /// Adds `mult` copies of the edge {u, v}; copies of an existing pair are summed.
    pub fn add_edge(
        &mut self,
        u: impl Into<VertexId>,
        v: impl Into<VertexId>,
        mult: u32,
    ) -> Result<(), GraphError> {
        let (u, v) = (u.into(), v.into());
        for x in [&u, &v] {
            if !self.kinds.contains_key(x) {
                return Err(GraphError::UnknownVertex(x.clone()));
            }
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        if mult == 0 {
            return Err(GraphError::BadMultiplicity(u, v, 0));
        }
        *self.adj.get_mut(&u).unwrap().entry(v.clone()).or_insert(0) += mult;
        *self.adj.get_mut(&v).unwrap().entry(u).or_insert(0) += mult;
        Ok(())
    }

    /// Sets the multiplicity of {u, v}; zero removes the edge.
    pub fn set_multiplicity(&mut self, u: &VertexId, v: &VertexId, mult: u32) -> Result<(), GraphError> {
        if mult == 0 {
            self.remove_edge(u, v);
            return Ok(());
        }
        self.remove_edge(u, v);
        self.add_edge(u.clone(), v.clone(), mult)
    }

    pub fn remove_edge(&mut self, u: &VertexId, v: &VertexId) -> Option<u32> {
        let m = self.adj.get_mut(u)?.remove(v)?;
        self.adj.get_mut(v).map(|n| n.remove(u));
        Some(m)
    }

    pub fn remove_vertex(&mut self, id: &VertexId) -> Option<VertexKind> {
        let kind = self.kinds.remove(id)?;
        if let Some(nbrs) = self.adj.remove(id) {
            for n in nbrs.keys() {
                self.adj.get_mut(n).map(|m| m.remove(id));
            }
        }
        Some(kind)
    }

    pub fn contains(&self, id: &VertexId) -> bool {
        self.kinds.contains_key(id)
    }

    pub fn kind(&self, id: &VertexId) -> Option<VertexKind> {
        self.kinds.get(id).copied()
    }

    pub fn is_exit(&self, id: &VertexId) -> bool {
        self.kind(id) == Some(VertexKind::Exit)
    }

    /// Vertices in canonical order.
    pub fn vertices(&self) -> impl Iterator<Item = (&VertexId, VertexKind)> + '_ {
        self.kinds.iter().map(|(k, v)| (k, *v))
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = &VertexId> + '_ {
        self.kinds.keys()
    }

    pub fn exits(&self) -> impl Iterator<Item = &VertexId> + '_ {
        self.vertices().filter(|(_, k)| *k == VertexKind::Exit).map(|(id, _)| id)
    }

    /// Edges as (u, v, multiplicity) with u < v, in canonical order.
    pub fn edges(&self) -> impl Iterator<Item = (&VertexId, &VertexId, u32)> + '_ {
        self.adj
            .iter()
            .flat_map(|(u, nbrs)| nbrs.iter().filter(move |(v, _)| u < *v).map(move |(v, m)| (u, v, *m)))
    }

    pub fn neighbors(&self, id: &VertexId) -> impl Iterator<Item = (&VertexId, u32)> + '_ {
        self.adj.get(id).into_iter().flat_map(|n| n.iter().map(|(v, m)| (v, *m)))
    }

    pub fn multiplicity(&self, u: &VertexId, v: &VertexId) -> u32 {
        self.adj.get(u).and_then(|n| n.get(v)).copied().unwrap_or(0)
    }

    /// Sum of multiplicities of incident edges.
    pub fn degree(&self, id: &VertexId) -> u32 {
        self.neighbors(id).map(|(_, m)| m).sum()
    }

    pub fn vertex_count(&self) -> usize {
        self.kinds.len()
    }

    /// Number of distinct vertex pairs carrying an edge.
    pub fn edge_count(&self) -> usize {
        self.adj.values().map(|n| n.len()).sum::<usize>() / 2
    }

    pub fn total_multiplicity(&self) -> u64 {
        self.edges().map(|(_, _, m)| m as u64).sum()
    }

    pub fn max_degree(&self) -> u32 {
        self.kinds.keys().map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn is_simple(&self) -> bool {
        self.edges().all(|(_, _, m)| m == 1)
    }

    pub fn component(&self, from: &VertexId) -> BTreeSet<VertexId> {
        let mut seen = BTreeSet::new();
        if !self.contains(from) {
            return seen;
        }
        let mut queue = VecDeque::from([from.clone()]);
        seen.insert(from.clone());
        while let Some(x) = queue.pop_front() {
            for (y, _) in self.neighbors(&x) {
                if seen.insert(y.clone()) {
                    queue.push_back(y.clone());
                }
            }
        }
        seen
    }

    pub fn is_connected(&self) -> bool {
        match self.kinds.keys().next() {
            None => true,
            Some(first) => self.component(first).len() == self.vertex_count(),
        }
    }

    /// Simple, connected and acyclic.
    pub fn is_tree(&self) -> bool {
        self.is_simple() && self.is_connected() && self.edge_count() + 1 == self.vertex_count()
    }

    /// Returns `base` if unused, otherwise `base'`, `base''`, ...
    pub fn fresh_id(&self, base: &str) -> VertexId {
        let mut id = base.to_owned();
        while self.kinds.contains_key(id.as_str()) {
            id.push('\'');
        }
        VertexId(id)
    }

    /// Subgraph induced by `keep`.
    pub fn induced(&self, keep: &BTreeSet<VertexId>) -> MultiGraph {
        let mut g = MultiGraph::new();
        for (id, kind) in self.vertices().filter(|(id, _)| keep.contains(*id)) {
            g.add_vertex(id.clone(), kind).unwrap();
        }
        for (u, v, m) in self.edges() {
            if keep.contains(u) && keep.contains(v) {
                g.add_edge(u.clone(), v.clone(), m).unwrap();
            }
        }
        g
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub graph: MultiGraph,
    pub start: VertexId,
    pub variant: Variant,
    /// Display-only coordinates, passed through untouched.
    pub layout: Option<BTreeMap<VertexId, [f64; 2]>>,
}

impl Instance {
    pub fn new(graph: MultiGraph, start: impl Into<VertexId>, variant: Variant) -> Self {
        Instance {
            graph,
            start: start.into(),
            variant,
            layout: None,
        }
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    /// SHA-256 of the canonical serialization, hex encoded.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(serialize_instance(self).as_bytes()))
    }
}

#[derive(Serialize, Deserialize)]
struct VertexRecord {
    id: VertexId,
    kind: VertexKind,
}

#[derive(Serialize, Deserialize)]
struct EdgeRecord {
    u: VertexId,
    v: VertexId,
    mult: i64,
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    variant: Variant,
    start: VertexId,
    vertices: Vec<VertexRecord>,
    edges: Vec<EdgeRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    layout: Option<BTreeMap<VertexId, [f64; 2]>>,
}

/// Decodes an instance file. Duplicate edge entries are summed.
pub fn parse_instance(text: &str) -> Result<Instance, InstanceError> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| InstanceError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut graph = MultiGraph::new();
    for v in file.vertices {
        graph.add_vertex(v.id, v.kind)?;
    }
    for e in file.edges {
        if e.mult < 1 || e.mult > u32::MAX as i64 {
            return Err(GraphError::BadMultiplicity(e.u, e.v, e.mult).into());
        }
        graph.add_edge(e.u, e.v, e.mult as u32)?;
    }
    if !graph.contains(&file.start) {
        return Err(InstanceError::MissingStart(file.start));
    }
    Ok(Instance {
        graph,
        start: file.start,
        variant: file.variant,
        layout: file.layout,
    })
}

/// Canonical JSON: sorted vertices, edges with u < v in sorted order.
pub fn serialize_instance(inst: &Instance) -> String {
    let file = InstanceFile {
        variant: inst.variant,
        start: inst.start.clone(),
        vertices: inst
            .graph
            .vertices()
            .map(|(id, kind)| VertexRecord { id: id.clone(), kind })
            .collect(),
        edges: inst
            .graph
            .edges()
            .map(|(u, v, m)| EdgeRecord {
                u: u.clone(),
                v: v.clone(),
                mult: m as i64,
            })
            .collect(),
        layout: inst.layout.clone(),
    };
    let mut out = serde_json::to_string_pretty(&file).expect("instance serializes");
    out.push('\n');
    out
}

/// Normalizes `inst` in place and checks its invariants.
///
/// Exit–exit edges are dropped, one note per dropped edge.
pub fn validate(inst: &mut Instance) -> Result<Vec<String>, InstanceError> {
    if !inst.graph.contains(&inst.start) {
        return Err(InstanceError::MissingStart(inst.start.clone()));
    }
    if inst.variant == Variant::CatHerding {
        if let Some(x) = inst.graph.exits().next() {
            return Err(InstanceError::ExitInCatHerding(x.clone()));
        }
    }
    let exit_pairs: Vec<(VertexId, VertexId, u32)> = inst
        .graph
        .edges()
        .filter(|(u, v, _)| inst.graph.is_exit(u) && inst.graph.is_exit(v))
        .map(|(u, v, m)| (u.clone(), v.clone(), m))
        .collect();
    let mut notes = Vec::new();
    for (u, v, m) in exit_pairs {
        inst.graph.remove_edge(&u, &v);
        notes.push(format!("dropped edge {u}-{v} (multiplicity {m}) between two exits"));
    }
    if let Some(layout) = &inst.layout {
        for id in layout.keys() {
            if !inst.graph.contains(id) {
                notes.push(format!("layout entry for unknown vertex `{id}` ignored"));
            }
        }
    }
    Ok(notes)
}

/// Parses and validates in one step.
pub fn load_instance(text: &str) -> Result<(Instance, Vec<String>), InstanceError> {
    let mut inst = parse_instance(text)?;
    let notes = validate(&mut inst)?;
    Ok((inst, notes))
}

/// Gives every copy of every exit edge its own degree-1 exit.
///
/// An exit that already has degree exactly 1 keeps its id; other copies are
/// named `x@u#k`. Isolated exits are dropped.
pub fn duplicate_exits(g: &MultiGraph) -> MultiGraph {
    let mut out = MultiGraph::new();
    for (id, kind) in g.vertices() {
        if kind == VertexKind::Regular {
            out.add_vertex(id.clone(), kind).unwrap();
        }
    }
    for (u, v, m) in g.edges() {
        if !g.is_exit(u) && !g.is_exit(v) {
            out.add_edge(u.clone(), v.clone(), m).unwrap();
        }
    }
    // Reserve the ids of degree-1 exits first so renamed copies never collide.
    for x in g.exits() {
        if g.degree(x) == 1 {
            out.add_vertex(x.clone(), VertexKind::Exit).unwrap();
        }
    }
    for x in g.exits() {
        let deg = g.degree(x);
        for (u, m) in g.neighbors(x) {
            if g.is_exit(u) {
                continue;
            }
            if deg == 1 {
                out.add_edge(u.clone(), x.clone(), 1).unwrap();
                continue;
            }
            for k in 1..=m {
                let id = out.fresh_id(&format!("{x}@{u}#{k}"));
                out.add_vertex(id.clone(), VertexKind::Exit).unwrap();
                out.add_edge(u.clone(), id, 1).unwrap();
            }
        }
    }
    out
}

/// Iteratively removes regular vertices of degree at most 2 (except `s`), then
/// every component that does not contain `s`.
pub fn prune(g: &MultiGraph, s: &VertexId) -> MultiGraph {
    let mut work = g.clone();
    let mut queue: VecDeque<VertexId> = work
        .vertices()
        .filter(|(id, k)| *k == VertexKind::Regular && *id != s)
        .filter(|(id, _)| work.degree(id) <= 2)
        .map(|(id, _)| id.clone())
        .collect();
    while let Some(v) = queue.pop_front() {
        if !work.contains(&v) || work.degree(&v) > 2 {
            continue;
        }
        let nbrs: Vec<VertexId> = work.neighbors(&v).map(|(n, _)| n.clone()).collect();
        work.remove_vertex(&v);
        for n in nbrs {
            if &n != s && !work.is_exit(&n) && work.degree(&n) <= 2 {
                queue.push_back(n);
            }
        }
    }
    let keep = work.component(s);
    work.induced(&keep)
}

/// Exit duplication followed by pruning. The start vertex is always kept.
pub fn simplify(inst: &Instance) -> Instance {
    let dup = duplicate_exits(&inst.graph);
    let graph = if dup.contains(&inst.start) {
        prune(&dup, &inst.start)
    } else {
        // Start on an exit: the game is already over, keep the bare start.
        let mut g = MultiGraph::new();
        g.add_vertex(inst.start.clone(), VertexKind::Exit).unwrap();
        g
    };
    let layout = inst.layout.as_ref().map(|l| {
        l.iter()
            .filter(|(id, _)| graph.contains(id))
            .map(|(id, p)| (id.clone(), *p))
            .collect()
    });
    Instance {
        graph,
        start: inst.start.clone(),
        variant: inst.variant,
        layout,
    }
}
