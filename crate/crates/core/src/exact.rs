//! Exhaustive game-tree search: the reference oracle for every variant, plus
//! best-response searches against scripted opponents.

use std::collections::VecDeque;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::board::Board;
use crate::graph::{Instance, Variant};
use crate::rules::{Action, GameState, Move, Phase, Status, Strategy};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    /// P1: the fugitive never returns to a visited vertex.
    pub no_revisit: bool,
    pub node_budget: Option<u64>,
    /// P2: initial multiplicities are capped here; `None` means |V|.
    /// Only applied to the Nemesis search.
    pub multiplicity_cap: Option<u32>,
    /// P3 plus relevance: deletions that can never matter are not explored.
    pub dominated_deletion_pruning: bool,
    /// Round cap for best-response searches; `None` means the default cap.
    pub round_cap: Option<u64>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            no_revisit: true,
            node_budget: None,
            multiplicity_cap: None,
            dominated_deletion_pruning: true,
            round_cap: None,
        }
    }
}

impl SearchConfig {
    pub fn with_budget(budget: u64) -> Self {
        SearchConfig {
            node_budget: Some(budget),
            ..Self::default()
        }
    }

    /// Every pruning off: plain minimax under the standard rules.
    pub fn unpruned() -> Self {
        SearchConfig {
            no_revisit: false,
            node_budget: None,
            multiplicity_cap: Some(u32::MAX),
            dominated_deletion_pruning: false,
            round_cap: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Fugitive,
    Adversary,
    Unknown,
}

impl Outcome {
    fn from_bool(fugitive_wins: bool) -> Outcome {
        if fugitive_wins {
            Outcome::Fugitive
        } else {
            Outcome::Adversary
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub winner: Outcome,
    pub exact: bool,
    #[serde(rename = "nodes")]
    pub nodes_explored: u64,
    #[serde(rename = "pv", skip_serializing_if = "Option::is_none")]
    pub principal_variation: Option<Vec<Move>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<serde_json::Value>,
}

impl Verdict {
    pub fn decided(fugitive_wins: bool, nodes: u64) -> Verdict {
        Verdict {
            winner: Outcome::from_bool(fugitive_wins),
            exact: true,
            nodes_explored: nodes,
            principal_variation: None,
            certificate: None,
        }
    }

    pub fn unknown(nodes: u64) -> Verdict {
        Verdict {
            winner: Outcome::Unknown,
            exact: false,
            nodes_explored: nodes,
            principal_variation: None,
            certificate: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatValue {
    pub value: Option<u64>,
    pub lower: u64,
    pub upper: u64,
    pub exact: bool,
    pub nodes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("expected a {expected} instance, got {found}")]
    WrongVariant { expected: Variant, found: Variant },
    #[error("scripted fugitive revisited a vertex while the no-revisit rule is on")]
    ScriptRevisit,
}

fn expect_variant(found: Variant, expected: Variant) -> Result<(), SolveError> {
    if found == expected {
        Ok(())
    } else {
        Err(SolveError::WrongVariant { expected, found })
    }
}

#[derive(Debug)]
struct Exhausted;

/// Append-only bit packer for memo keys.
#[derive(Default)]
struct KeyBuf {
    words: Vec<u64>,
    bit: u32,
}

impl KeyBuf {
    fn push(&mut self, value: u64, width: u32) {
        if width == 0 {
            return;
        }
        let value = if width < 64 { value & ((1 << width) - 1) } else { value };
        if self.bit == 0 {
            self.words.push(0);
        }
        let last = self.words.len() - 1;
        self.words[last] |= value << self.bit;
        let room = 64 - self.bit;
        if width > room {
            self.words.push(value >> room);
        }
        self.bit = (self.bit + width) % 64;
    }

    fn finish(self) -> Box<[u64]> {
        self.words.into_boxed_slice()
    }
}

fn width_for(max: u64) -> u32 {
    64 - max.leading_zeros()
}

fn bump(nodes: &mut u64, budget: Option<u64>) -> Result<(), Exhausted> {
    *nodes += 1;
    match budget {
        Some(b) if *nodes > b => Err(Exhausted),
        _ => Ok(()),
    }
}

// ---------------------------------------------------------------------------
// Nemesis

struct NemesisSearch<'a> {
    b: &'a Board,
    no_revisit: bool,
    prune: bool,
    budget: Option<u64>,
    nodes: u64,
    rem: Vec<u32>,
    visited: Vec<bool>,
    pos: usize,
    /// Edges whose multiplicity enters the memo key, with their bit widths.
    dynamic: Vec<(usize, u32)>,
    exit_dist: Vec<u32>,
    memo: FxHashMap<Box<[u64]>, bool>,
    // BFS scratch
    in_r: Vec<bool>,
    dist: Vec<u32>,
    r_list: Vec<usize>,
}

impl<'a> NemesisSearch<'a> {
    fn new(b: &'a Board, rem: &[u32], pos: usize, cfg: &SearchConfig) -> Self {
        let n = b.n();
        let cap = cfg.multiplicity_cap.unwrap_or(n as u32).max(1);
        let rem: Vec<u32> = rem.iter().map(|&m| m.min(cap)).collect();
        let prune = cfg.dominated_deletion_pruning;
        let no_revisit = cfg.no_revisit;
        let dynamic = (0..b.edge_count())
            .filter(|&e| !(prune && no_revisit && rem[e] as usize > n.saturating_sub(1)))
            .map(|e| (e, width_for(rem[e] as u64)))
            .collect();
        let mut visited = vec![false; n];
        visited[pos] = true;
        NemesisSearch {
            b,
            no_revisit,
            prune,
            budget: cfg.node_budget,
            nodes: 0,
            rem,
            visited,
            pos,
            dynamic,
            exit_dist: b.exit_distance(),
            memo: FxHashMap::default(),
            in_r: vec![false; n],
            dist: vec![u32::MAX; n],
            r_list: Vec::new(),
        }
    }

    fn allowed(&self, v: usize) -> bool {
        !self.no_revisit || !self.visited[v]
    }

    /// BFS from the position over usable vertices; exits are reached but not
    /// expanded. Fills `in_r`, `dist`, `r_list` and returns whether an exit
    /// was reached.
    fn reach(&mut self) -> bool {
        for &v in &self.r_list {
            self.in_r[v] = false;
            self.dist[v] = u32::MAX;
        }
        self.r_list.clear();
        let b = self.b;
        self.in_r[self.pos] = true;
        self.dist[self.pos] = 0;
        self.r_list.push(self.pos);
        let mut found = false;
        let mut head = 0;
        while head < self.r_list.len() {
            let x = self.r_list[head];
            head += 1;
            if b.exit[x] {
                continue;
            }
            for &(y, e) in &b.adj[x] {
                if self.rem[e] == 0 || self.in_r[y] || !self.allowed(y) {
                    continue;
                }
                self.in_r[y] = true;
                self.dist[y] = self.dist[x] + 1;
                self.r_list.push(y);
                found |= b.exit[y];
            }
        }
        found
    }

    fn key(&self, phase: Phase) -> Box<[u64]> {
        let n = self.b.n();
        let mut k = KeyBuf::default();
        k.push(matches!(phase, Phase::AdversaryToDelete) as u64, 1);
        k.push(self.pos as u64, width_for(n as u64));
        for v in 0..n {
            k.push(self.in_r[v] as u64, 1);
        }
        let u = self.r_list.len() as u64 - 1;
        for &(e, w) in &self.dynamic {
            let (a, c) = self.b.ends[e];
            let mut val = 0;
            if self.in_r[a] && self.in_r[c] {
                val = self.rem[e] as u64;
                if self.prune && self.no_revisit {
                    val = val.min(u + 1);
                }
            }
            k.push(val, w);
        }
        k.finish()
    }

    fn exit_copies(&self) -> (u32, Option<usize>) {
        let mut copies = 0;
        let mut edge = None;
        for &(y, e) in &self.b.adj[self.pos] {
            if self.b.exit[y] && self.rem[e] > 0 {
                copies += self.rem[e];
                edge = Some(e);
            }
        }
        (copies, edge)
    }

    fn steps(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.b.adj[self.pos]
            .iter()
            .filter(|&&(y, e)| self.rem[e] > 0 && self.allowed(y))
            .map(|&(y, _)| y)
            .collect();
        out.sort_by_key(|&y| (self.exit_dist[y], y));
        out
    }

    /// Deletions worth exploring; expects `reach` to be current.
    fn candidates(&self) -> Vec<usize> {
        let b = self.b;
        let mut out: Vec<(u32, usize)> = Vec::new();
        let u = self.r_list.len() as u32 - 1;
        for e in 0..b.edge_count() {
            if self.rem[e] == 0 {
                continue;
            }
            let (a, c) = b.ends[e];
            if self.prune {
                if !(self.in_r[a] && self.in_r[c]) {
                    continue;
                }
                if self.no_revisit && self.rem[e] > u {
                    continue;
                }
            }
            let d = self.dist[a].min(self.dist[c]);
            out.push((d, e));
        }
        out.sort_unstable();
        out.into_iter().map(|(_, e)| e).collect()
    }

    fn step(&mut self, y: usize) -> (usize, bool) {
        let from = self.pos;
        let prev = self.visited[y];
        self.pos = y;
        self.visited[y] = true;
        (from, prev)
    }

    fn unstep(&mut self, y: usize, from: usize, prev: bool) {
        self.visited[y] = prev;
        self.pos = from;
    }

    fn fugitive(&mut self) -> Result<bool, Exhausted> {
        bump(&mut self.nodes, self.budget)?;
        if self.b.exit[self.pos] || self.exit_copies().0 > 0 {
            return Ok(true);
        }
        if !self.reach() {
            return Ok(false);
        }
        let key = self.key(Phase::FugitiveToMove);
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let mut result = false;
        for y in self.steps() {
            let (from, prev) = self.step(y);
            let r = self.adversary();
            self.unstep(y, from, prev);
            if r? {
                result = true;
                break;
            }
        }
        self.memo.insert(key, result);
        Ok(result)
    }

    fn adversary(&mut self) -> Result<bool, Exhausted> {
        bump(&mut self.nodes, self.budget)?;
        if self.b.exit[self.pos] {
            return Ok(true);
        }
        match self.exit_copies() {
            (c, _) if c >= 2 => return Ok(true),
            (1, Some(e)) => {
                self.rem[e] -= 1;
                let r = self.fugitive();
                self.rem[e] += 1;
                return r;
            }
            _ => {}
        }
        if !self.reach() {
            return Ok(false);
        }
        let key = self.key(Phase::AdversaryToDelete);
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let cands = self.candidates();
        let result = if cands.is_empty() {
            self.fugitive()?
        } else {
            let mut all = true;
            for e in cands {
                self.rem[e] -= 1;
                let r = self.fugitive();
                self.rem[e] += 1;
                if !r? {
                    all = false;
                    break;
                }
            }
            all
        };
        self.memo.insert(key, result);
        Ok(result)
    }

    /// Walks the memo along optimal play, emitting real moves into `gs`.
    fn principal_variation(&mut self, gs: &mut GameState) -> Result<(), Exhausted> {
        loop {
            let st = if self.no_revisit {
                gs.status_no_revisit()
            } else {
                gs.status()
            };
            if st.is_terminal() {
                return Ok(());
            }
            let action = match gs.phase {
                Phase::FugitiveToMove => {
                    let exit_step = self.b.adj[self.pos]
                        .iter()
                        .find(|&&(y, e)| self.b.exit[y] && self.rem[e] > 0)
                        .map(|&(y, _)| y);
                    match exit_step {
                        Some(y) => Action::Step(y),
                        None => {
                            let want = self.fugitive()?;
                            let steps = self.steps();
                            let mut pick = None;
                            for &y in &steps {
                                let (from, prev) = self.step(y);
                                let r = self.adversary();
                                self.unstep(y, from, prev);
                                if r? == want {
                                    pick = Some(y);
                                    break;
                                }
                            }
                            match pick.or(steps.first().copied()) {
                                Some(y) => Action::Step(y),
                                None => return Ok(()),
                            }
                        }
                    }
                }
                Phase::AdversaryToDelete => self.adversary_choice(gs)?,
            };
            match action {
                Action::Step(y) => {
                    self.step(y);
                }
                Action::Delete(e) => self.rem[e] -= 1,
                Action::Pass => {}
            }
            gs.apply_unchecked(action);
        }
    }

    fn adversary_choice(&mut self, gs: &GameState) -> Result<Action, Exhausted> {
        let filler = || {
            (0..gs.board.edge_count())
                .find(|&e| gs.remaining[e] > 0)
                .map(Action::Delete)
                .unwrap_or(Action::Pass)
        };
        match self.exit_copies() {
            (c, Some(e)) if c >= 1 => return Ok(Action::Delete(e)),
            _ => {}
        }
        let want = self.adversary()?;
        if !self.reach() {
            return Ok(filler());
        }
        let cands = self.candidates();
        for &e in &cands {
            self.rem[e] -= 1;
            let r = self.fugitive();
            self.rem[e] += 1;
            if r? == want {
                return Ok(Action::Delete(e));
            }
        }
        Ok(filler())
    }
}

/// Exact Nemesis winner from the initial position.
pub fn solve_nemesis(inst: &Instance, cfg: &SearchConfig) -> Result<Verdict, SolveError> {
    expect_variant(inst.variant, Variant::Nemesis)?;
    Ok(solve_state(&GameState::from_instance(inst), cfg))
}

/// Exact verdict from an arbitrary state; the visited set is reset to the
/// current position, so any finished history is ignored.
pub fn solve_state(state: &GameState, cfg: &SearchConfig) -> Verdict {
    match state.variant() {
        Variant::Nemesis => nemesis_from(state, cfg),
        Variant::Blizzard => blizzard_from(state, cfg),
        Variant::CatHerding => {
            let cv = cat_from(state, cfg);
            Verdict {
                winner: Outcome::Adversary,
                exact: cv.exact,
                nodes_explored: cv.nodes,
                principal_variation: None,
                certificate: serde_json::to_value(cv).ok(),
            }
        }
    }
}

fn nemesis_from(state: &GameState, cfg: &SearchConfig) -> Verdict {
    let b = state.board.as_ref();
    let mut search = NemesisSearch::new(b, &state.remaining, state.position, cfg);
    let root = match state.phase {
        Phase::FugitiveToMove => search.fugitive(),
        Phase::AdversaryToDelete => search.adversary(),
    };
    let nodes = search.nodes;
    let Ok(win) = root else {
        return Verdict::unknown(nodes);
    };
    let mut gs = fresh_view(state);
    let pv = search.principal_variation(&mut gs).ok().map(|_| pv_moves(state, &gs));
    Verdict {
        principal_variation: pv,
        ..Verdict::decided(win, nodes)
    }
}

/// Copy of `state` with history cleared and visited reset to the position.
fn fresh_view(state: &GameState) -> GameState {
    let mut gs = state.clone();
    gs.history.clear();
    gs.visited.iter_mut().for_each(|v| *v = false);
    gs.visited[gs.position] = true;
    gs
}

fn pv_moves(start: &GameState, end: &GameState) -> Vec<Move> {
    let mut replay = fresh_view(start);
    end.history
        .iter()
        .map(|&a| {
            let m = replay.to_move(a);
            replay.apply_unchecked(a);
            m
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Blizzard

struct BlizzardSearch<'a> {
    b: &'a Board,
    budget: Option<u64>,
    nodes: u64,
    rem: Vec<u32>,
    pos: usize,
    widths: Vec<u32>,
    exit_dist: Vec<u32>,
    memo: FxHashMap<Box<[u64]>, bool>,
    prune: bool,
}

impl<'a> BlizzardSearch<'a> {
    fn new(b: &'a Board, rem: &[u32], pos: usize, cfg: &SearchConfig) -> Self {
        BlizzardSearch {
            b,
            budget: cfg.node_budget,
            nodes: 0,
            rem: rem.to_vec(),
            pos,
            widths: rem.iter().map(|&m| width_for(m as u64)).collect(),
            exit_dist: b.exit_distance(),
            memo: FxHashMap::default(),
            prune: cfg.dominated_deletion_pruning,
        }
    }

    /// Component of the position (exits not expanded) and whether it holds an exit.
    fn component(&self) -> (Vec<bool>, bool) {
        let b = self.b;
        let mut seen = vec![false; b.n()];
        seen[self.pos] = true;
        let mut queue = VecDeque::from([self.pos]);
        let mut found = false;
        while let Some(x) = queue.pop_front() {
            if b.exit[x] {
                found = true;
                continue;
            }
            for &(y, e) in &b.adj[x] {
                if self.rem[e] > 0 && !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        (seen, found)
    }

    fn key(&self, phase: Phase, comp: &[bool]) -> Box<[u64]> {
        let mut k = KeyBuf::default();
        k.push(matches!(phase, Phase::AdversaryToDelete) as u64, 1);
        k.push(self.pos as u64, width_for(self.b.n() as u64));
        for e in 0..self.b.edge_count() {
            let (a, c) = self.b.ends[e];
            let live = !self.prune || (comp[a] && comp[c]);
            k.push(if live { self.rem[e] as u64 } else { 0 }, self.widths[e]);
        }
        k.finish()
    }

    fn exit_copies(&self) -> (u32, Option<usize>) {
        let mut copies = 0;
        let mut edge = None;
        for &(y, e) in &self.b.adj[self.pos] {
            if self.b.exit[y] && self.rem[e] > 0 {
                copies += self.rem[e];
                edge = Some(e);
            }
        }
        (copies, edge)
    }

    fn fugitive(&mut self) -> Result<bool, Exhausted> {
        bump(&mut self.nodes, self.budget)?;
        if self.b.exit[self.pos] || self.exit_copies().0 > 0 {
            return Ok(true);
        }
        let (comp, found) = self.component();
        if !found {
            return Ok(false);
        }
        let key = self.key(Phase::FugitiveToMove, &comp);
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let mut steps: Vec<usize> = self.b.adj[self.pos]
            .iter()
            .filter(|&&(_, e)| self.rem[e] > 0)
            .map(|&(y, _)| y)
            .collect();
        steps.sort_by_key(|&y| (self.exit_dist[y], y));
        let mut result = false;
        for y in steps {
            let from = self.pos;
            self.pos = y;
            let r = self.storm();
            self.pos = from;
            if r? {
                result = true;
                break;
            }
        }
        self.memo.insert(key, result);
        Ok(result)
    }

    fn storm(&mut self) -> Result<bool, Exhausted> {
        bump(&mut self.nodes, self.budget)?;
        if self.b.exit[self.pos] {
            return Ok(true);
        }
        match self.exit_copies() {
            (c, _) if c >= 2 => return Ok(true),
            (1, Some(e)) => {
                self.rem[e] -= 1;
                let r = self.fugitive();
                self.rem[e] += 1;
                return r;
            }
            _ => {}
        }
        let (comp, found) = self.component();
        if !found {
            return Ok(false);
        }
        let key = self.key(Phase::AdversaryToDelete, &comp);
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let incident: Vec<usize> = self.b.adj[self.pos]
            .iter()
            .filter(|&&(_, e)| self.rem[e] > 0)
            .map(|&(_, e)| e)
            .collect();
        let result = if incident.is_empty() {
            self.fugitive()?
        } else {
            let mut all = true;
            for e in incident {
                self.rem[e] -= 1;
                let r = self.fugitive();
                self.rem[e] += 1;
                if !r? {
                    all = false;
                    break;
                }
            }
            all
        };
        self.memo.insert(key, result);
        Ok(result)
    }
}

/// Exact Blizzard winner. The storm deletes one edge per round, so every
/// line is finite and plain memoized recursion suffices.
pub fn solve_blizzard(inst: &Instance, cfg: &SearchConfig) -> Result<Verdict, SolveError> {
    expect_variant(inst.variant, Variant::Blizzard)?;
    Ok(solve_state(&GameState::from_instance(inst), cfg))
}

fn blizzard_from(state: &GameState, cfg: &SearchConfig) -> Verdict {
    let b = state.board.as_ref();
    let mut search = BlizzardSearch::new(b, &state.remaining, state.position, cfg);
    let root = match state.phase {
        Phase::FugitiveToMove => search.fugitive(),
        Phase::AdversaryToDelete => search.storm(),
    };
    let nodes = search.nodes;
    let Ok(win) = root else {
        return Verdict::unknown(nodes);
    };
    let pv = blizzard_pv(&mut search, state).ok();
    Verdict {
        principal_variation: pv,
        ..Verdict::decided(win, nodes)
    }
}

fn blizzard_pv(s: &mut BlizzardSearch<'_>, start: &GameState) -> Result<Vec<Move>, Exhausted> {
    let mut gs = fresh_view(start);
    while !gs.status().is_terminal() {
        let action = match gs.phase {
            Phase::FugitiveToMove => {
                let want = s.fugitive()?;
                let steps = gs.raw_actions(false);
                let mut pick = steps.iter().copied().find(|a| matches!(a, Action::Step(y) if s.b.exit[*y]));
                if pick.is_none() {
                    for &a in &steps {
                        let Action::Step(y) = a else { continue };
                        let from = s.pos;
                        s.pos = y;
                        let r = s.storm();
                        s.pos = from;
                        if r? == want {
                            pick = Some(a);
                            break;
                        }
                    }
                }
                match pick {
                    Some(a) => a,
                    None => break,
                }
            }
            Phase::AdversaryToDelete => {
                let want = s.storm()?;
                let options = gs.raw_actions(false);
                let mut pick = options[0];
                for &a in &options {
                    let Action::Delete(e) = a else { continue };
                    s.rem[e] -= 1;
                    let r = s.fugitive();
                    s.rem[e] += 1;
                    if r? == want {
                        pick = a;
                        break;
                    }
                }
                pick
            }
        };
        match action {
            Action::Step(y) => s.pos = y,
            Action::Delete(e) => s.rem[e] -= 1,
            Action::Pass => {}
        }
        gs.apply_unchecked(action);
    }
    Ok(pv_moves(start, &gs))
}

// ---------------------------------------------------------------------------
// Cat Herding

struct CatSearch<'a> {
    b: &'a Board,
    budget: Option<u64>,
    nodes: u64,
    rem: Vec<u32>,
    pos: usize,
    widths: Vec<u32>,
    memo: FxHashMap<Box<[u64]>, u64>,
}

impl<'a> CatSearch<'a> {
    fn key(&self, phase: Phase) -> Box<[u64]> {
        let mut k = KeyBuf::default();
        k.push(matches!(phase, Phase::AdversaryToDelete) as u64, 1);
        k.push(self.pos as u64, width_for(self.b.n() as u64));
        for (e, &w) in self.widths.iter().enumerate() {
            k.push(self.rem[e] as u64, w);
        }
        k.finish()
    }

    /// Rounds the cat still survives, cat to move.
    fn cat(&mut self) -> Result<u64, Exhausted> {
        bump(&mut self.nodes, self.budget)?;
        let steps: Vec<usize> = self.b.adj[self.pos]
            .iter()
            .filter(|&&(_, e)| self.rem[e] > 0)
            .map(|&(y, _)| y)
            .collect();
        if steps.is_empty() {
            return Ok(0);
        }
        let key = self.key(Phase::FugitiveToMove);
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let mut best = 0;
        for y in steps {
            let from = self.pos;
            self.pos = y;
            let r = self.herder();
            self.pos = from;
            best = best.max(1 + r?);
        }
        self.memo.insert(key, best);
        Ok(best)
    }

    fn herder(&mut self) -> Result<u64, Exhausted> {
        bump(&mut self.nodes, self.budget)?;
        let key = self.key(Phase::AdversaryToDelete);
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let mut best = u64::MAX;
        for e in 0..self.b.edge_count() {
            if self.rem[e] == 0 {
                continue;
            }
            self.rem[e] -= 1;
            let r = self.cat();
            self.rem[e] += 1;
            best = best.min(r?);
            if best == 0 {
                break;
            }
        }
        if best == u64::MAX {
            best = self.cat()?;
        }
        self.memo.insert(key, best);
        Ok(best)
    }
}

/// Number of rounds the cat survives under optimal play by both sides.
pub fn cat_value(inst: &Instance, cfg: &SearchConfig) -> Result<CatValue, SolveError> {
    expect_variant(inst.variant, Variant::CatHerding)?;
    Ok(cat_from(&GameState::from_instance(inst), cfg))
}

fn cat_from(state: &GameState, cfg: &SearchConfig) -> CatValue {
    let b = state.board.as_ref();
    let mut s = CatSearch {
        b,
        budget: cfg.node_budget,
        nodes: 0,
        rem: state.remaining.clone(),
        pos: state.position,
        widths: state.remaining.iter().map(|&m| width_for(m as u64)).collect(),
        memo: FxHashMap::default(),
    };
    let r = match state.phase {
        Phase::FugitiveToMove => s.cat(),
        Phase::AdversaryToDelete => s.herder(),
    };
    let total: u64 = state.remaining.iter().map(|&m| m as u64).sum();
    match r {
        Ok(v) => CatValue {
            value: Some(v),
            lower: v,
            upper: v,
            exact: true,
            nodes: s.nodes,
        },
        Err(Exhausted) => {
            let free = b.adj[state.position].iter().any(|&(_, e)| state.remaining[e] > 0);
            CatValue {
                value: None,
                lower: u64::from(free && state.phase == Phase::FugitiveToMove),
                upper: total + u64::from(state.phase == Phase::FugitiveToMove),
                exact: false,
                nodes: s.nodes,
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Best responses against scripts

fn encode_state(gs: &GameState, widths: &[u32], round: bool, visited: bool, clamp: Option<u32>) -> Box<[u64]> {
    let b = &gs.board;
    let mut k = KeyBuf::default();
    k.push(matches!(gs.phase, Phase::AdversaryToDelete) as u64, 1);
    k.push(gs.position as u64, width_for(b.n() as u64));
    for (e, &w) in widths.iter().enumerate() {
        let r = gs.remaining[e];
        let r = clamp.map_or(r, |c| r.min(c));
        k.push(r as u64, w);
    }
    if round {
        k.push(gs.round as u64, 32);
    }
    if visited {
        for &v in &gs.visited {
            k.push(v as u64, 1);
        }
    }
    k.finish()
}

struct FugitiveBest<'a> {
    gs: GameState,
    script: &'a dyn Strategy,
    no_revisit: bool,
    cap: u64,
    budget: Option<u64>,
    nodes: u64,
    widths: Vec<u32>,
    exit_dist: Vec<u32>,
    memo: FxHashMap<Box<[u64]>, bool>,
}

impl FugitiveBest<'_> {
    fn key(&self) -> Box<[u64]> {
        encode_state(
            &self.gs,
            &self.widths,
            self.script.reads_round(),
            self.no_revisit || self.script.reads_visited(),
            None,
        )
    }

    fn fugitive(&mut self) -> Result<bool, Exhausted> {
        bump(&mut self.nodes, self.budget)?;
        match self.gs.status() {
            Status::FugitiveWon { .. } => return Ok(true),
            Status::Ongoing => {}
            _ => return Ok(false),
        }
        if self.gs.round as u64 >= self.cap {
            return Ok(false);
        }
        if self.script.guards_exits() && exits_guarded(&self.gs) {
            return Ok(false);
        }
        let key = self.key();
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let mut steps: Vec<usize> = self
            .gs
            .raw_actions(self.no_revisit)
            .into_iter()
            .filter_map(|a| match a {
                Action::Step(y) => Some(y),
                _ => None,
            })
            .collect();
        steps.sort_by_key(|&y| (self.exit_dist[y], y));
        let mut result = false;
        for y in steps {
            if self.gs.board.exit[y] {
                result = true;
                break;
            }
            let from = self.gs.position;
            let prev = self.gs.visited[y];
            self.gs.apply_unchecked(Action::Step(y));
            let r = self.reply();
            self.gs.undo(Action::Step(y), from, prev);
            if r? {
                result = true;
                break;
            }
        }
        self.memo.insert(key, result);
        Ok(result)
    }

    fn reply(&mut self) -> Result<bool, Exhausted> {
        if self.gs.status().is_terminal() {
            return Ok(self.gs.status().winner() == Some(crate::rules::Role::Fugitive));
        }
        let Some(a) = self.script.choose(&self.gs).filter(|&a| self.gs.check(a).is_ok()) else {
            return Ok(true);
        };
        let pos = self.gs.position;
        self.gs.apply_unchecked(a);
        let r = self.fugitive();
        self.gs.undo(a, pos, true);
        r
    }
}

/// No vertex holds more than one remaining exit copy and the fugitive's
/// vertex holds none.
fn exits_guarded(gs: &GameState) -> bool {
    let b = &gs.board;
    (0..b.n()).filter(|&v| !b.exit[v]).all(|v| {
        let copies: u32 = b.adj[v].iter().filter(|&&(y, _)| b.exit[y]).map(|&(_, e)| gs.remaining[e]).sum();
        copies <= 1 && (copies == 0 || v != gs.position)
    })
}

/// Whether any fugitive line beats the scripted adversary. A script that
/// resigns or plays illegally forfeits.
pub fn best_response_fugitive(inst: &Instance, script: &dyn Strategy, cfg: &SearchConfig) -> Verdict {
    let gs = GameState::from_instance(inst);
    let b = gs.board.clone();
    let mut s = FugitiveBest {
        cap: cfg.round_cap.unwrap_or_else(|| b.default_cap()),
        widths: b.init.iter().map(|&m| width_for(m as u64)).collect(),
        exit_dist: b.exit_distance(),
        gs,
        script,
        no_revisit: cfg.no_revisit,
        budget: cfg.node_budget,
        nodes: 0,
        memo: FxHashMap::default(),
    };
    match s.fugitive() {
        Ok(win) => {
            let pv = win.then(|| fugitive_best_line(&mut s)).flatten();
            Verdict {
                principal_variation: pv,
                ..Verdict::decided(win, s.nodes)
            }
        }
        Err(Exhausted) => Verdict::unknown(s.nodes),
    }
}

fn fugitive_best_line(s: &mut FugitiveBest<'_>) -> Option<Vec<Move>> {
    let mut line = Vec::new();
    loop {
        if s.gs.status().is_terminal() {
            return Some(line);
        }
        let mut chosen = None;
        for a in s.gs.raw_actions(s.no_revisit) {
            let Action::Step(y) = a else { continue };
            if s.gs.board.exit[y] {
                chosen = Some(a);
                break;
            }
            let from = s.gs.position;
            let prev = s.gs.visited[y];
            s.gs.apply_unchecked(a);
            let r = s.reply().ok()?;
            s.gs.undo(a, from, prev);
            if r {
                chosen = Some(a);
                break;
            }
        }
        let a = chosen?;
        line.push(s.gs.to_move(a));
        s.gs.apply_unchecked(a);
        if s.gs.status().is_terminal() {
            return Some(line);
        }
        let reply = s.script.choose(&s.gs).filter(|&r| s.gs.check(r).is_ok());
        match reply {
            Some(r) => {
                line.push(s.gs.to_move(r));
                s.gs.apply_unchecked(r);
            }
            None => return Some(line),
        }
    }
}

struct AdversaryBest<'a> {
    gs: GameState,
    script: &'a dyn Strategy,
    no_revisit: bool,
    prune: bool,
    cap: u64,
    budget: Option<u64>,
    nodes: u64,
    widths: Vec<u32>,
    memo: FxHashMap<Box<[u64]>, bool>,
}

impl AdversaryBest<'_> {
    /// Multiplicities above this can never run out before the game ends.
    fn horizon(&self) -> Option<u32> {
        (self.prune && self.no_revisit && !self.script.reads_counts()).then(|| self.gs.unvisited_count() as u32)
    }

    fn key(&self) -> Box<[u64]> {
        encode_state(
            &self.gs,
            &self.widths,
            self.script.reads_round(),
            self.no_revisit || self.script.reads_visited(),
            self.horizon().map(|h| h + 1),
        )
    }

    /// True when the adversary can force a win. Fugitive (script) to move.
    fn fugitive(&mut self) -> Result<bool, Result<Exhausted, SolveError>> {
        bump(&mut self.nodes, self.budget).map_err(Ok)?;
        match self.gs.status() {
            Status::FugitiveWon { .. } => return Ok(false),
            Status::Ongoing => {}
            _ => return Ok(true),
        }
        if self.gs.round as u64 >= self.cap {
            return Ok(true);
        }
        let key = self.key();
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let Some(a) = self.script.choose(&self.gs).filter(|&a| self.gs.check(a).is_ok()) else {
            self.memo.insert(key, true);
            return Ok(true);
        };
        let Action::Step(y) = a else { unreachable!("checked fugitive move") };
        if self.no_revisit && self.gs.visited[y] {
            return Err(Err(SolveError::ScriptRevisit));
        }
        let from = self.gs.position;
        let prev = self.gs.visited[y];
        self.gs.apply_unchecked(a);
        let r = self.adversary();
        self.gs.undo(a, from, prev);
        let r = r?;
        self.memo.insert(key, r);
        Ok(r)
    }

    fn options(&self) -> Vec<Action> {
        let all = self.gs.raw_actions(false);
        let Some(h) = self.horizon() else { return all };
        let mut live = Vec::new();
        let mut spare = None;
        for a in all {
            match a {
                Action::Delete(e) if self.gs.remaining[e] > h => {
                    spare.get_or_insert(a);
                }
                _ => live.push(a),
            }
        }
        live.extend(spare);
        live
    }

    fn adversary(&mut self) -> Result<bool, Result<Exhausted, SolveError>> {
        bump(&mut self.nodes, self.budget).map_err(Ok)?;
        match self.gs.status() {
            Status::FugitiveWon { .. } => return Ok(false),
            Status::Ongoing => {}
            _ => return Ok(true),
        }
        let key = self.key();
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let mut result = false;
        for a in self.options() {
            let pos = self.gs.position;
            self.gs.apply_unchecked(a);
            let r = self.fugitive();
            self.gs.undo(a, pos, true);
            if r? {
                result = true;
                break;
            }
        }
        self.memo.insert(key, result);
        Ok(result)
    }
}

/// Whether some adversary line beats the scripted fugitive.
///
/// With `no_revisit` on, the script is required never to revisit; with
/// pruning on and a count-blind script, deletions that cannot exhaust an
/// edge in time are represented by a single one of them.
pub fn best_response_adversary(
    inst: &Instance,
    script: &dyn Strategy,
    cfg: &SearchConfig,
) -> Result<Verdict, SolveError> {
    let gs = GameState::from_instance(inst);
    let b = gs.board.clone();
    let mut s = AdversaryBest {
        cap: cfg.round_cap.unwrap_or_else(|| b.default_cap()),
        widths: b.init.iter().map(|&m| width_for(m as u64)).collect(),
        gs,
        script,
        no_revisit: cfg.no_revisit,
        prune: cfg.dominated_deletion_pruning,
        budget: cfg.node_budget,
        nodes: 0,
        memo: FxHashMap::default(),
    };
    match s.fugitive() {
        Ok(adv) => Ok(Verdict::decided(!adv, s.nodes)),
        Err(Ok(Exhausted)) => Ok(Verdict::unknown(s.nodes)),
        Err(Err(e)) => Err(e),
    }
}

/// Convenience wrapper that dispatches on the variant with default settings.
pub fn solve(inst: &Instance, cfg: &SearchConfig) -> Verdict {
    solve_state(&GameState::from_instance(inst), cfg)
}

/// Runs `f` on a thread with a large stack; deep searches recurse once per ply.
pub fn with_stack<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    std::thread::scope(|scope| {
        std::thread::Builder::new()
            .stack_size(512 << 20)
            .spawn_scoped(scope, f)
            .expect("spawn search thread")
            .join()
            .expect("search thread panicked")
    })
}
