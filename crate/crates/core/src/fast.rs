//! Polynomial solvers for trees, subcubic graphs and Blizzard, together
//! with binary escape trees: search, verification and the descent strategy.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{Outcome, Verdict};
use crate::graph::{simplify, Instance, MultiGraph, VertexId, Variant};
use crate::rules::{Action, GameState, Phase, Strategy};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FastError {
    #[error("expected a {expected} instance, got {found}")]
    WrongVariant { expected: Variant, found: Variant },
    #[error("graph is not a tree after simplification")]
    NotATree,
    #[error("graph has parallel edges after simplification")]
    NotSimple,
    #[error("maximum degree {0} exceeds 3 after simplification")]
    DegreeTooHigh(u32),
    #[error("vertex `{0}` is not in the graph")]
    UnknownVertex(VertexId),
    #[error("search budget exhausted")]
    Budget,
}

fn expect(inst: &Instance, expected: Variant) -> Result<(), FastError> {
    if inst.variant == expected {
        Ok(())
    } else {
        Err(FastError::WrongVariant {
            expected,
            found: inst.variant,
        })
    }
}

/// Rooted full binary subtree whose leaves are exits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryEscapeTree {
    pub root: VertexId,
    pub children: BTreeMap<VertexId, (VertexId, VertexId)>,
    pub leaves: BTreeSet<VertexId>,
}

impl BinaryEscapeTree {
    pub fn vertices(&self) -> BTreeSet<VertexId> {
        let mut out = BTreeSet::from([self.root.clone()]);
        for (a, b) in self.children.values() {
            out.insert(a.clone());
            out.insert(b.clone());
        }
        out
    }

    pub fn height(&self) -> usize {
        self.height_of(&self.root)
    }

    fn height_of(&self, v: &VertexId) -> usize {
        match self.children.get(v) {
            None => 0,
            Some((a, b)) => 1 + self.height_of(a).max(self.height_of(b)),
        }
    }

    /// Tree edges below `v`, as (parent, child).
    pub fn edges_below(&self, v: &VertexId) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::new();
        let mut stack = vec![v.clone()];
        while let Some(x) = stack.pop() {
            if let Some((a, b)) = self.children.get(&x) {
                out.push((x.clone(), a.clone()));
                out.push((x.clone(), b.clone()));
                stack.push(a.clone());
                stack.push(b.clone());
            }
        }
        out
    }
}

/// Checks every escape-tree invariant against `g`; returns the violations.
pub fn verify_bet(g: &MultiGraph, t: &BinaryEscapeTree) -> Result<(), Vec<String>> {
    let mut reasons = Vec::new();
    if !g.contains(&t.root) {
        reasons.push(format!("root {} is not in the graph", t.root));
    }
    let mut seen = BTreeSet::from([t.root.clone()]);
    let mut stack = vec![t.root.clone()];
    let mut found_leaves = BTreeSet::new();
    while let Some(x) = stack.pop() {
        match t.children.get(&x) {
            None => {
                found_leaves.insert(x.clone());
                if !g.is_exit(&x) {
                    reasons.push(format!("leaf {x} is not an exit"));
                }
            }
            Some((a, b)) => {
                for c in [a, b] {
                    if g.multiplicity(&x, c) == 0 {
                        reasons.push(format!("edge {x}-{c} is not in the graph"));
                    }
                    if !seen.insert(c.clone()) {
                        reasons.push(format!("vertex {c} is used twice"));
                        continue;
                    }
                    stack.push(c.clone());
                }
            }
        }
    }
    for v in t.children.keys() {
        if !seen.contains(v) {
            reasons.push(format!("internal node {v} is not reachable from the root"));
        }
    }
    if found_leaves != t.leaves {
        reasons.push("declared leaf set does not match the tree".to_owned());
    }
    if reasons.is_empty() {
        Ok(())
    } else {
        Err(reasons)
    }
}

fn bet_verdict(tree: Option<BinaryEscapeTree>) -> Verdict {
    let win = tree.is_some();
    Verdict {
        certificate: tree.and_then(|t| serde_json::to_value(t).ok()),
        ..Verdict::decided(win, 0)
    }
}

/// Builds the escape tree spanned by `root` in a rooted forest described by
/// `kids` (children lists).
fn collect_tree(root: &VertexId, kids: &BTreeMap<VertexId, Vec<VertexId>>, g: &MultiGraph) -> BinaryEscapeTree {
    let mut t = BinaryEscapeTree {
        root: root.clone(),
        children: BTreeMap::new(),
        leaves: BTreeSet::new(),
    };
    let mut stack = vec![root.clone()];
    while let Some(x) = stack.pop() {
        if g.is_exit(&x) {
            t.leaves.insert(x);
            continue;
        }
        let c = &kids[&x];
        t.children.insert(x.clone(), (c[0].clone(), c[1].clone()));
        stack.push(c[0].clone());
        stack.push(c[1].clone());
    }
    t
}

/// Tree condition on trees: `s` or a neighbor roots an escape tree.
pub fn tree_condition_tree(inst: &Instance) -> Result<Verdict, FastError> {
    expect(inst, Variant::Nemesis)?;
    let simple = simplify(inst);
    let g = &simple.graph;
    let s = &simple.start;
    if g.is_exit(s) {
        return Ok(bet_verdict(Some(single_exit(s))));
    }
    if !g.is_tree() {
        return Err(FastError::NotATree);
    }
    // Root at s; process vertices in reverse BFS order.
    let mut order = vec![s.clone()];
    let mut parent: BTreeMap<VertexId, VertexId> = BTreeMap::new();
    let mut head = 0;
    while head < order.len() {
        let x = order[head].clone();
        head += 1;
        for (y, _) in g.neighbors(&x) {
            if parent.get(&x) != Some(y) && y != s {
                parent.insert(y.clone(), x.clone());
                order.push(y.clone());
            }
        }
    }
    let mut can: BTreeMap<VertexId, bool> = BTreeMap::new();
    let mut good_kids: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
    for v in order.iter().rev() {
        let kids: Vec<VertexId> = g
            .neighbors(v)
            .map(|(y, _)| y.clone())
            .filter(|y| parent.get(v) != Some(y) && can.get(y) == Some(&true))
            .collect();
        can.insert(v.clone(), g.is_exit(v) || kids.len() >= 2);
        good_kids.insert(v.clone(), kids);
    }
    let mut root = None;
    if good_kids[s].len() >= 2 {
        root = Some(s.clone());
    } else if let Some((v, _)) = g.neighbors(s).find(|(v, _)| can[*v]) {
        root = Some(v.clone());
    }
    Ok(bet_verdict(root.map(|r| collect_tree(&r, &good_kids, g))))
}

fn single_exit(x: &VertexId) -> BinaryEscapeTree {
    BinaryEscapeTree {
        root: x.clone(),
        children: BTreeMap::new(),
        leaves: BTreeSet::from([x.clone()]),
    }
}

/// Branch-BFS from `c`. Returns the enabled branch roots together with the
/// BFS children lists.
fn branch_bfs(g: &MultiGraph, c: &VertexId) -> (Vec<VertexId>, BTreeMap<VertexId, Vec<VertexId>>) {
    let branches: Vec<VertexId> = g.neighbors(c).map(|(y, _)| y.clone()).collect();
    let mut enabled = vec![true; branches.len()];
    let mut label: BTreeMap<VertexId, usize> = BTreeMap::new();
    let mut parent: BTreeMap<VertexId, VertexId> = BTreeMap::new();
    let mut kids: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
    let mut queue = VecDeque::new();
    for (i, b) in branches.iter().enumerate() {
        label.insert(b.clone(), i);
        parent.insert(b.clone(), c.clone());
        queue.push_back(b.clone());
    }
    kids.insert(c.clone(), branches.clone());
    while let Some(x) = queue.pop_front() {
        let bx = label[&x];
        if g.is_exit(&x) {
            continue;
        }
        if g.degree(&x) < 3 {
            enabled[bx] = false;
        }
        let mut mine = Vec::new();
        for (y, _) in g.neighbors(&x) {
            if parent.get(&x) == Some(y) {
                continue;
            }
            if y == c {
                enabled[bx] = false;
                continue;
            }
            match label.get(y) {
                Some(&by) => {
                    enabled[bx] = false;
                    enabled[by] = false;
                }
                None => {
                    label.insert(y.clone(), bx);
                    parent.insert(y.clone(), x.clone());
                    mine.push(y.clone());
                    queue.push_back(y.clone());
                }
            }
        }
        kids.insert(x, mine);
    }
    let on = branches.into_iter().zip(enabled).filter(|(_, e)| *e).map(|(b, _)| b).collect();
    (on, kids)
}

/// Tree condition on graphs of maximum degree 3 via branch-BFS.
/// The certificate uses vertex names of the simplified graph.
pub fn tree_condition_deg3(inst: &Instance) -> Result<Verdict, FastError> {
    expect(inst, Variant::Nemesis)?;
    let simple = simplify(inst);
    let g = &simple.graph;
    let s = &simple.start;
    if g.is_exit(s) {
        return Ok(bet_verdict(Some(single_exit(s))));
    }
    if !g.is_simple() {
        return Err(FastError::NotSimple);
    }
    if g.max_degree() > 3 {
        return Err(FastError::DegreeTooHigh(g.max_degree()));
    }
    let mut candidates = vec![s.clone()];
    candidates.extend(g.neighbors(s).map(|(v, _)| v.clone()));
    for c in &candidates {
        if g.is_exit(c) {
            return Ok(bet_verdict(Some(single_exit(c))));
        }
        let (on, mut kids) = branch_bfs(g, c);
        if on.len() >= 2 {
            kids.insert(c.clone(), on[..2].to_vec());
            return Ok(bet_verdict(Some(collect_tree(c, &kids, g))));
        }
    }
    Ok(bet_verdict(None))
}

/// Blizzard winning-position ranks: 0 for exits, k for vertices with at
/// least two edge-copies into lower ranks.
pub fn wsets(g: &MultiGraph) -> BTreeMap<VertexId, u32> {
    let mut rank: BTreeMap<VertexId, u32> = BTreeMap::new();
    let mut count: BTreeMap<&VertexId, u32> = BTreeMap::new();
    let mut wave: Vec<&VertexId> = g.exits().collect();
    for x in &wave {
        rank.insert((*x).clone(), 0);
    }
    let mut k = 0;
    while !wave.is_empty() {
        k += 1;
        let mut next = Vec::new();
        for x in wave {
            for (y, m) in g.neighbors(x) {
                if rank.contains_key(y) {
                    continue;
                }
                let c = count.entry(y).or_insert(0);
                let before = *c;
                *c += m;
                if before < 2 && *c >= 2 {
                    next.push(y);
                }
            }
        }
        for y in &next {
            rank.insert((*y).clone(), k);
        }
        wave = next;
    }
    rank
}

/// Linear-time Blizzard solver: the trapper wins iff he starts on an exit or
/// has an edge into W.
pub fn blizzard_wsets(inst: &Instance) -> Result<(BTreeMap<VertexId, u32>, Verdict), FastError> {
    expect(inst, Variant::Blizzard)?;
    let ranks = wsets(&inst.graph);
    let s = &inst.start;
    let win = inst.graph.is_exit(s) || inst.graph.neighbors(s).any(|(y, _)| ranks.contains_key(y));
    let verdict = Verdict {
        certificate: serde_json::to_value(&ranks).ok(),
        ..Verdict::decided(win, 0)
    };
    Ok((ranks, verdict))
}

struct BetSearch<'a> {
    g: &'a MultiGraph,
    used: BTreeSet<VertexId>,
    open: Vec<VertexId>,
    kids: BTreeMap<VertexId, (VertexId, VertexId)>,
    nodes: u64,
    budget: Option<u64>,
}

impl BetSearch<'_> {
    fn free(&self, v: &VertexId) -> Vec<VertexId> {
        self.g
            .neighbors(v)
            .map(|(y, _)| y)
            .filter(|y| !self.used.contains(*y))
            .cloned()
            .collect()
    }

    fn run(&mut self) -> Result<bool, FastError> {
        self.nodes += 1;
        if self.budget.is_some_and(|b| self.nodes > b) {
            return Err(FastError::Budget);
        }
        if self.open.is_empty() {
            return Ok(true);
        }
        // Most constrained open vertex first.
        let (idx, _) = self
            .open
            .iter()
            .enumerate()
            .map(|(i, v)| (i, self.free(v).len()))
            .min_by_key(|&(i, n)| (n, i))
            .unwrap();
        let v = self.open.swap_remove(idx);
        let free = self.free(&v);
        for i in 0..free.len() {
            for j in i + 1..free.len() {
                let (a, b) = (&free[i], &free[j]);
                self.used.insert(a.clone());
                self.used.insert(b.clone());
                let before = self.open.len();
                for c in [a, b] {
                    if !self.g.is_exit(c) {
                        self.open.push(c.clone());
                    }
                }
                self.kids.insert(v.clone(), (a.clone(), b.clone()));
                if self.run()? {
                    return Ok(true);
                }
                self.kids.remove(&v);
                self.open.truncate(before);
                self.used.remove(a);
                self.used.remove(b);
            }
        }
        self.open.push(v);
        let last = self.open.len() - 1;
        self.open.swap(idx.min(last), last);
        Ok(false)
    }
}

/// Exhaustive search for an escape tree rooted at `root`. Exponential in
/// the worst case; `budget` bounds the number of search nodes.
pub fn find_bet(g: &MultiGraph, root: &VertexId, budget: Option<u64>) -> Result<Option<BinaryEscapeTree>, FastError> {
    if !g.contains(root) {
        return Err(FastError::UnknownVertex(root.clone()));
    }
    if g.is_exit(root) {
        return Ok(Some(single_exit(root)));
    }
    let mut s = BetSearch {
        g,
        used: BTreeSet::from([root.clone()]),
        open: vec![root.clone()],
        kids: BTreeMap::new(),
        nodes: 0,
        budget,
    };
    if !s.run()? {
        return Ok(None);
    }
    let mut t = BinaryEscapeTree {
        root: root.clone(),
        children: s.kids,
        leaves: BTreeSet::new(),
    };
    t.leaves = t
        .vertices()
        .into_iter()
        .filter(|v| !t.children.contains_key(v))
        .collect();
    Ok(Some(t))
}

/// Escape tree rooted at the start or one of its neighbors, if any.
pub fn find_bet_near(g: &MultiGraph, s: &VertexId, budget: Option<u64>) -> Result<Option<BinaryEscapeTree>, FastError> {
    if let Some(t) = find_bet(g, s, budget)? {
        return Ok(Some(t));
    }
    for (v, _) in g.neighbors(s) {
        if let Some(t) = find_bet(g, v, budget)? {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

/// Fugitive strategy descending an escape tree: step onto the root first,
/// then always into a child whose subtree has not been touched.
pub struct BetDescent {
    tree: BinaryEscapeTree,
}

pub fn bet_strategy(tree: BinaryEscapeTree) -> BetDescent {
    BetDescent { tree }
}

impl BetDescent {
    fn intact(&self, state: &GameState, parent: &VertexId, child: &VertexId) -> bool {
        let b = &state.board;
        let full = |u: &VertexId, v: &VertexId| {
            let (Some(x), Some(y)) = (b.vertex(u.as_str()), b.vertex(v.as_str())) else {
                return false;
            };
            b.edge(x, y).is_some_and(|e| state.remaining[e] == b.init[e])
        };
        full(parent, child) && self.tree.edges_below(child).iter().all(|(u, v)| full(u, v))
    }
}

impl Strategy for BetDescent {
    fn name(&self) -> String {
        "bet-descent".into()
    }

    fn choose(&self, state: &GameState) -> Option<Action> {
        if state.phase != Phase::FugitiveToMove {
            return None;
        }
        let b = &state.board;
        let pos = state.position_id().clone();
        if state.round == 0 && pos != self.tree.root {
            let r = b.vertex(self.tree.root.as_str())?;
            let e = b.edge(state.position, r)?;
            return (state.remaining[e] > 0).then_some(Action::Step(r));
        }
        let (c1, c2) = self.tree.children.get(&pos)?;
        let (lo, hi) = if c1 <= c2 { (c1, c2) } else { (c2, c1) };
        let pick = [lo, hi].into_iter().find(|c| self.intact(state, &pos, c))?;
        b.vertex(pick.as_str()).map(Action::Step)
    }

    fn reads_visited(&self) -> bool {
        false
    }
}

/// Fast verdict for the classes with a linear-time characterization.
pub fn fast_outcome(inst: &Instance) -> Result<Outcome, FastError> {
    let v = match inst.variant {
        Variant::Blizzard => blizzard_wsets(inst)?.1,
        _ => match tree_condition_tree(inst) {
            Err(FastError::NotATree) => tree_condition_deg3(inst)?,
            other => other?,
        },
    };
    Ok(v.winner)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{solve, SearchConfig};
    use crate::graph::tests::graph_of;
    use crate::instances;
    use crate::rules::{run_match, Status};

    fn nem(g: MultiGraph, s: &str) -> Instance {
        Instance::new(g, s, Variant::Nemesis)
    }

    #[test]
    fn tree_examples() {
        let g = graph_of(
            &["s", "v", "a", "b"],
            &["e1", "e2", "e3", "e4"],
            &[
                ("s", "v", 1),
                ("v", "a", 1),
                ("v", "b", 1),
                ("a", "e1", 1),
                ("a", "e2", 1),
                ("b", "e3", 1),
                ("b", "e4", 1),
            ],
        );
        let inst = nem(g, "s");
        let v = tree_condition_tree(&inst).unwrap();
        assert_eq!(v.winner, Outcome::Fugitive);
        assert_eq!(solve(&inst, &SearchConfig::default()).winner, Outcome::Fugitive);
        assert_eq!(tree_condition_tree(&instances::i2()).unwrap().winner, Outcome::Adversary);
        let g = graph_of(&["s"], &["x"], &[("s", "x", 1)]);
        assert_eq!(tree_condition_tree(&nem(g, "s")).unwrap().winner, Outcome::Fugitive);
        assert_eq!(tree_condition_tree(&instances::i4()).unwrap().winner, Outcome::Adversary);
    }

    #[test]
    fn deg3_theta_is_adversary() {
        // Two branches from s meet again at m; both disabled.
        let g = graph_of(
            &["s", "a", "b", "m", "p"],
            &["x1", "x2", "x3", "x4"],
            &[
                ("s", "a", 1),
                ("s", "b", 1),
                ("a", "m", 1),
                ("b", "m", 1),
                ("a", "x1", 1),
                ("b", "x2", 1),
                ("m", "p", 1),
                ("p", "x3", 1),
                ("p", "x4", 1),
            ],
        );
        let inst = nem(g, "s");
        assert_eq!(tree_condition_tree(&inst), Err(FastError::NotATree));
        let fast = tree_condition_deg3(&inst).unwrap().winner;
        assert_eq!(fast, solve(&inst, &SearchConfig::default()).winner);
    }

    #[test]
    fn deg3_on_named() {
        assert_eq!(tree_condition_deg3(&instances::i1()).unwrap().winner, Outcome::Fugitive);
        assert_eq!(tree_condition_deg3(&instances::i2()).unwrap().winner, Outcome::Adversary);
        assert_eq!(tree_condition_deg3(&instances::i4()).unwrap().winner, Outcome::Adversary);
        assert_eq!(tree_condition_deg3(&instances::i5()).unwrap().winner, Outcome::Fugitive);
    }

    #[test]
    fn wsets_examples() {
        let (r, v) = blizzard_wsets(&instances::i1().with_variant(Variant::Blizzard)).unwrap();
        assert_eq!(r.get("a"), Some(&1));
        assert_eq!(v.winner, Outcome::Fugitive);
        let (r, v) = blizzard_wsets(&instances::i2().with_variant(Variant::Blizzard)).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(v.winner, Outcome::Adversary);
        let (r, _) = blizzard_wsets(&instances::i5().with_variant(Variant::Blizzard)).unwrap();
        assert_eq!(r.get("c"), Some(&2));
    }

    #[test]
    fn find_and_verify() {
        let g = instances::i1().graph;
        let t = find_bet(&g, &"a".into(), None).unwrap().unwrap();
        assert!(verify_bet(&g, &t).is_ok());
        assert_eq!(t.height(), 1);
        let cyc = graph_of(&["a", "b", "c"], &[], &[("a", "b", 1), ("b", "c", 1), ("c", "a", 1)]);
        assert_eq!(find_bet(&cyc, &"a".into(), None).unwrap(), None);
        let mut bad = t.clone();
        bad.children.insert("t1".into(), ("a".into(), "s".into()));
        assert!(verify_bet(&g, &bad).is_err());
        let reg_leaf = BinaryEscapeTree {
            root: "a".into(),
            children: BTreeMap::from([("a".into(), ("s".into(), "t1".into()))]),
            leaves: BTreeSet::from(["s".into(), "t1".into()]),
        };
        assert!(verify_bet(&g, &reg_leaf).unwrap_err().iter().any(|r| r.contains("not an exit")));
    }

    struct CutLeft;
    impl Strategy for CutLeft {
        fn name(&self) -> String {
            "cut-left".into()
        }
        fn choose(&self, state: &GameState) -> Option<Action> {
            let b = &state.board;
            let e = b.edge(b.vertex("r")?, b.vertex("a")?)?;
            if state.remaining[e] > 0 {
                return Some(Action::Delete(e));
            }
            (0..b.edge_count()).find(|&e| state.remaining[e] > 0).map(Action::Delete)
        }
    }

    #[test]
    fn descent_avoids_damaged_subtree() {
        let g = graph_of(
            &["s", "r", "a", "b"],
            &["e1", "e2", "e3", "e4"],
            &[("s", "r", 1), ("r", "a", 1), ("r", "b", 1), ("a", "e1", 1), ("a", "e2", 1), ("b", "e3", 1), ("b", "e4", 1)],
        );
        let t = find_bet(&g, &"r".into(), None).unwrap().unwrap();
        let inst = nem(g, "s");
        let tr = run_match(&inst, &bet_strategy(t), &CutLeft, None);
        assert!(matches!(tr.status, Status::FugitiveWon { round: 3 }));
        assert_eq!(tr.moves[2], crate::rules::Move::Step { to: "b".into() });
    }
}
