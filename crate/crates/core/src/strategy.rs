//! Scripted players and the engine used for interactive play.

use std::collections::VecDeque;
use std::hash::{Hash, Hasher};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHasher;
use thiserror::Error;

use crate::board::Board;
use crate::exact::{solve_state, Outcome, SearchConfig};
use crate::fast::{bet_strategy, find_bet_near};
use crate::graph::{Instance, MultiGraph, VertexKind, Variant};
use crate::rules::{Action, GameState, Phase, Role, Strategy};

pub const SCRIPT_NAMES: [&str; 6] = ["bet-descent", "corner-cut", "reactive-blocker", "random", "shortest-path", "engine"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScriptError {
    #[error("unknown script `{0}`; expected one of {SCRIPT_NAMES:?}")]
    Unknown(String),
    #[error("script `{0}` cannot play the {1:?} side")]
    WrongSide(String, Role),
    #[error("no binary escape tree within distance 1 of the start")]
    NoEscapeTree,
}

/// Looks up a script by name for the given side.
pub fn script_by_name(name: &str, role: Role, inst: &Instance, seed: u64) -> Result<Box<dyn Strategy>, ScriptError> {
    let wrong = || ScriptError::WrongSide(name.to_owned(), role);
    match (name, role) {
        ("bet-descent", Role::Fugitive) => {
            let t = find_bet_near(&inst.graph, &inst.start, Some(1_000_000))
                .ok()
                .flatten()
                .ok_or(ScriptError::NoEscapeTree)?;
            Ok(Box::new(bet_strategy(t)))
        }
        ("corner-cut", Role::Adversary) => Ok(Box::new(CornerCut)),
        ("reactive-blocker", Role::Adversary) => Ok(Box::new(ReactiveBlocker)),
        ("random", _) => Ok(Box::new(RandomPlayer { seed })),
        ("shortest-path", Role::Fugitive) => Ok(Box::new(ShortestPath)),
        ("engine", _) => Ok(Box::new(Engine::new(role, 200_000))),
        ("bet-descent" | "shortest-path", _) | ("corner-cut" | "reactive-blocker", _) => Err(wrong()),
        _ => Err(ScriptError::Unknown(name.to_owned())),
    }
}

/// BFS distances from `from` over edges with remaining copies; exits are
/// not expanded.
pub fn distances(state: &GameState, from: usize) -> Vec<u32> {
    let b = &state.board;
    let mut dist = vec![u32::MAX; b.n()];
    dist[from] = 0;
    let mut queue = VecDeque::from([from]);
    while let Some(x) = queue.pop_front() {
        if b.exit[x] && x != from {
            continue;
        }
        for &(y, e) in &b.adj[x] {
            if state.remaining[e] > 0 && dist[y] == u32::MAX {
                dist[y] = dist[x] + 1;
                queue.push_back(y);
            }
        }
    }
    dist
}

/// Multi-source BFS distance to the nearest exit in the remaining graph.
fn exit_distances(state: &GameState) -> Vec<u32> {
    let b = &state.board;
    let mut dist = vec![u32::MAX; b.n()];
    let mut queue = VecDeque::new();
    for v in 0..b.n() {
        if b.exit[v] {
            dist[v] = 0;
            queue.push_back(v);
        }
    }
    while let Some(x) = queue.pop_front() {
        for &(y, e) in &b.adj[x] {
            if state.remaining[e] > 0 && dist[y] == u32::MAX && !b.exit[y] {
                dist[y] = dist[x] + 1;
                queue.push_back(y);
            }
        }
    }
    dist
}

fn exit_edges_at(state: &GameState, v: usize) -> impl Iterator<Item = usize> + '_ {
    let b = &state.board;
    b.adj[v]
        .iter()
        .filter(move |&&(y, e)| b.exit[y] && state.remaining[e] > 0)
        .map(|&(_, e)| e)
}

fn is_exit_edge(b: &Board, e: usize) -> bool {
    let (u, v) = b.ends[e];
    b.exit[u] || b.exit[v]
}

/// Adversary for grids: first removes one exit edge at every corner, then
/// cuts the exit edge under the fugitive, or else the farthest one.
pub struct CornerCut;

impl Strategy for CornerCut {
    fn name(&self) -> String {
        "corner-cut".into()
    }

    fn choose(&self, state: &GameState) -> Option<Action> {
        if state.phase != Phase::AdversaryToDelete {
            return None;
        }
        let b = &state.board;
        // A corner still holding both of its exit edges.
        for v in 0..b.n() {
            if b.exit[v] {
                continue;
            }
            let exits: Vec<usize> = b.adj[v].iter().filter(|&&(y, _)| b.exit[y]).map(|&(_, e)| e).collect();
            if exits.len() == 2 && exits.iter().all(|&e| state.remaining[e] > 0) {
                return Some(Action::Delete(exits[0]));
            }
        }
        if let Some(e) = exit_edges_at(state, state.position).next() {
            return Some(Action::Delete(e));
        }
        let dist = distances(state, state.position);
        let far = (0..b.edge_count())
            .filter(|&e| state.remaining[e] > 0 && is_exit_edge(b, e))
            .max_by_key(|&e| {
                let (u, v) = b.ends[e];
                let inner = if b.exit[u] { v } else { u };
                (dist[inner], std::cmp::Reverse(e))
            });
        far.or_else(|| (0..b.edge_count()).find(|&e| state.deletable(e)))
            .map(Action::Delete)
            .or(Some(Action::Pass))
    }

    fn reads_visited(&self) -> bool {
        false
    }

    fn reads_round(&self) -> bool {
        false
    }

    fn guards_exits(&self) -> bool {
        true
    }
}

/// Adversary that cuts the exit edge nearest to the fugitive.
pub struct ReactiveBlocker;

impl Strategy for ReactiveBlocker {
    fn name(&self) -> String {
        "reactive-blocker".into()
    }

    fn choose(&self, state: &GameState) -> Option<Action> {
        if state.phase != Phase::AdversaryToDelete {
            return None;
        }
        let b = &state.board;
        let dist = distances(state, state.position);
        let exit_dist = exit_distances(state);
        (0..b.edge_count())
            .filter(|&e| state.deletable(e))
            .min_by_key(|&e| {
                let (u, v) = b.ends[e];
                (
                    !is_exit_edge(b, e),
                    dist[u].min(dist[v]),
                    exit_dist[u].min(exit_dist[v]),
                    e,
                )
            })
            .map(Action::Delete)
            .or(Some(Action::Pass))
    }

    fn reads_visited(&self) -> bool {
        false
    }

    fn reads_round(&self) -> bool {
        false
    }

    fn guards_exits(&self) -> bool {
        true
    }

    fn reads_counts(&self) -> bool {
        false
    }
}

/// Fugitive that walks along a shortest path to the nearest exit.
pub struct ShortestPath;

impl Strategy for ShortestPath {
    fn name(&self) -> String {
        "shortest-path".into()
    }

    fn choose(&self, state: &GameState) -> Option<Action> {
        if state.phase != Phase::FugitiveToMove {
            return None;
        }
        let dist = exit_distances(state);
        state.board.adj[state.position]
            .iter()
            .filter(|&&(_, e)| state.remaining[e] > 0)
            .min_by_key(|&&(y, _)| (dist[y], y))
            .map(|&(y, _)| Action::Step(y))
    }

    fn reads_visited(&self) -> bool {
        false
    }

    fn reads_round(&self) -> bool {
        false
    }

    fn reads_counts(&self) -> bool {
        false
    }
}

/// Uniform choice among legal moves, seeded by the seed and the state, so
/// repeated runs replay identically.
pub struct RandomPlayer {
    pub seed: u64,
}

impl Strategy for RandomPlayer {
    fn name(&self) -> String {
        format!("random:{}", self.seed)
    }

    fn choose(&self, state: &GameState) -> Option<Action> {
        let mut h = FxHasher::default();
        (self.seed, state.round, state.position, state.phase as u8).hash(&mut h);
        state.remaining.hash(&mut h);
        let mut rng = ChaCha8Rng::seed_from_u64(h.finish());
        state.raw_actions(false).choose(&mut rng).copied()
    }

    fn reads_visited(&self) -> bool {
        false
    }
}

/// Engine player: exact search within a node budget, falling back to a
/// heuristic when the budget runs out.
pub struct Engine {
    pub role: Role,
    pub budget: u64,
}

impl Engine {
    pub fn new(role: Role, budget: u64) -> Engine {
        Engine { role, budget }
    }

    /// Returns the move and whether it came from an exact search.
    pub fn decide(&self, state: &GameState) -> Option<(Action, Outcome)> {
        if state.status().is_terminal() || Role::to_move(state.phase) != self.role {
            return None;
        }
        if state.variant() != Variant::CatHerding {
            let v = solve_state(state, &SearchConfig::with_budget(self.budget));
            if v.exact {
                if let Some(m) = v.principal_variation.as_ref().and_then(|pv| pv.first()) {
                    if let Ok(a) = state.to_action(m) {
                        if state.check(a).is_ok() {
                            return Some((a, v.winner));
                        }
                    }
                }
            }
        }
        heuristic(state).map(|a| (a, Outcome::Unknown))
    }
}

impl Strategy for Engine {
    fn name(&self) -> String {
        format!("engine:{}", self.budget)
    }

    fn choose(&self, state: &GameState) -> Option<Action> {
        self.decide(state).map(|(a, _)| a)
    }
}

/// Fallback move for the side to play.
pub fn heuristic(state: &GameState) -> Option<Action> {
    match state.phase {
        Phase::FugitiveToMove => heuristic_fugitive(state),
        Phase::AdversaryToDelete => heuristic_adversary(state),
    }
}

fn remaining_graph(state: &GameState) -> MultiGraph {
    let b = &state.board;
    let mut g = MultiGraph::new();
    for (i, id) in b.ids.iter().enumerate() {
        let kind = if b.exit[i] { VertexKind::Exit } else { VertexKind::Regular };
        g.add_vertex(id.clone(), kind).unwrap();
    }
    for (e, &(u, v)) in b.ends.iter().enumerate() {
        if state.remaining[e] > 0 {
            g.add_edge(b.ids[u].clone(), b.ids[v].clone(), state.remaining[e]).unwrap();
        }
    }
    g
}

fn heuristic_fugitive(state: &GameState) -> Option<Action> {
    let b = &state.board;
    if let Some(e) = exit_edges_at(state, state.position).next() {
        return Some(Action::Step(b.other(e, state.position)));
    }
    let g = remaining_graph(state);
    if let Ok(Some(t)) = find_bet_near(&g, state.position_id(), Some(100_000)) {
        let target = if &t.root == state.position_id() {
            t.children.get(&t.root).map(|(x, y)| x.min(y).clone())
        } else {
            Some(t.root.clone())
        };
        if let Some(v) = target.and_then(|v| b.vertex(v.as_str())) {
            return Some(Action::Step(v));
        }
    }
    // Head for the nearest vertex with two exit copies, else any exit.
    let dist = distances(state, state.position);
    let doors = (0..b.n()).filter(|&v| !b.exit[v] && exit_edges_at(state, v).map(|e| state.remaining[e]).sum::<u32>() >= 2);
    let target = doors
        .min_by_key(|&v| (dist[v], v))
        .filter(|&v| dist[v] != u32::MAX)
        .or_else(|| (0..b.n()).filter(|&v| b.exit[v] && dist[v] != u32::MAX).min_by_key(|&v| (dist[v], v)));
    let Some(target) = target else {
        return ShortestPath.choose(state);
    };
    let back = distances(state, target);
    b.adj[state.position]
        .iter()
        .filter(|&&(_, e)| state.remaining[e] > 0)
        .min_by_key(|&&(y, _)| (back[y], y))
        .map(|&(y, _)| Action::Step(y))
}

fn heuristic_adversary(state: &GameState) -> Option<Action> {
    if state.variant() == Variant::Blizzard || state.variant() == Variant::CatHerding {
        return ReactiveBlocker.choose(state);
    }
    min_cut_edge(state)
        .map(Action::Delete)
        .or_else(|| ReactiveBlocker.choose(state))
}

/// Canonically smallest edge of a minimum cut separating the fugitive from
/// every exit, with multiplicities as capacities (Edmonds–Karp).
pub fn min_cut_edge(state: &GameState) -> Option<usize> {
    let b = &state.board;
    let n = b.n();
    let sink = n;
    // Arc list: (to, capacity, reverse arc index)
    let mut arcs: Vec<Vec<(usize, u64, usize)>> = vec![Vec::new(); n + 1];
    let add = |arcs: &mut Vec<Vec<(usize, u64, usize)>>, u: usize, v: usize, c: u64, back: u64| {
        let iu = arcs[u].len();
        let iv = arcs[v].len();
        arcs[u].push((v, c, iv));
        arcs[v].push((u, back, iu));
    };
    for (e, &(u, v)) in b.ends.iter().enumerate() {
        let c = state.remaining[e] as u64;
        if c > 0 {
            add(&mut arcs, u, v, c, c);
        }
    }
    for v in 0..n {
        if b.exit[v] {
            add(&mut arcs, v, sink, u64::MAX / 4, 0);
        }
    }
    let src = state.position;
    if b.exit[src] {
        return None;
    }
    loop {
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; n + 1];
        let mut queue = VecDeque::from([src]);
        let mut seen = vec![false; n + 1];
        seen[src] = true;
        while let Some(x) = queue.pop_front() {
            for (i, &(y, c, _)) in arcs[x].iter().enumerate() {
                if c > 0 && !seen[y] {
                    seen[y] = true;
                    prev[y] = Some((x, i));
                    queue.push_back(y);
                }
            }
        }
        if !seen[sink] {
            let mut cut: Vec<usize> = (0..b.edge_count())
                .filter(|&e| {
                    let (u, v) = b.ends[e];
                    state.remaining[e] > 0 && seen[u] != seen[v]
                })
                .collect();
            cut.sort_unstable();
            return cut.first().copied();
        }
        let mut bottleneck = u64::MAX;
        let mut v = sink;
        while let Some((u, i)) = prev[v] {
            bottleneck = bottleneck.min(arcs[u][i].1);
            v = u;
        }
        let mut v = sink;
        while let Some((u, i)) = prev[v] {
            arcs[u][i].1 -= bottleneck;
            let r = arcs[u][i].2;
            arcs[v][r].1 += bottleneck;
            v = u;
        }
    }
}
