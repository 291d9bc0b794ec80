//! Referee: legal moves, transitions, terminal detection and matches.

use std::collections::VecDeque;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::board::Board;
use crate::graph::{Instance, VertexId, Variant};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Phase {
    FugitiveToMove,
    AdversaryToDelete,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Fugitive,
    Adversary,
}

impl Role {
    pub fn to_move(phase: Phase) -> Role {
        match phase {
            Phase::FugitiveToMove => Role::Fugitive,
            Phase::AdversaryToDelete => Role::Adversary,
        }
    }

    pub fn other(self) -> Role {
        match self {
            Role::Fugitive => Role::Adversary,
            Role::Adversary => Role::Fugitive,
        }
    }
}

/// Move in board indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Action {
    Step(usize),
    Delete(usize),
    Pass,
}

/// Move in vertex ids, as exchanged with the outside world.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "t", rename_all = "lowercase")]
pub enum Move {
    Step { to: VertexId },
    #[serde(rename = "del")]
    Delete { u: VertexId, v: VertexId },
    Pass,
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::Step { to } => write!(f, "step {to}"),
            Move::Delete { u, v } => write!(f, "delete {u}-{v}"),
            Move::Pass => f.write_str("pass"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "camelCase")]
pub enum Status {
    Ongoing,
    FugitiveWon { round: u32 },
    AdversaryWon { round: u32 },
    Trapped { round: u32 },
}

impl Status {
    pub fn is_terminal(self) -> bool {
        self != Status::Ongoing
    }

    /// Trapped counts as an adversary win.
    pub fn winner(self) -> Option<Role> {
        match self {
            Status::Ongoing => None,
            Status::FugitiveWon { .. } => Some(Role::Fugitive),
            Status::AdversaryWon { .. } | Status::Trapped { .. } => Some(Role::Adversary),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MoveError {
    #[error("game is over")]
    GameOver,
    #[error("it is the {0:?} phase")]
    WrongPhase(Phase),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("no remaining edge between {0} and {1}")]
    NoEdge(VertexId, VertexId),
    #[error("vertex {0} was already visited")]
    Revisit(VertexId),
    #[error("blizzard deletions must touch the current position {0}")]
    NotIncident(VertexId),
    #[error("pass is only legal when nothing can be deleted")]
    PassNotAllowed,
}

#[derive(Clone, Debug)]
pub struct GameState {
    pub board: Arc<Board>,
    pub remaining: Vec<u32>,
    pub position: usize,
    pub phase: Phase,
    pub round: u32,
    pub visited: Vec<bool>,
    pub history: Vec<Action>,
}

impl GameState {
    pub fn new(board: Arc<Board>) -> GameState {
        let mut visited = vec![false; board.n()];
        visited[board.start] = true;
        GameState {
            remaining: board.init.clone(),
            position: board.start,
            phase: Phase::FugitiveToMove,
            round: 0,
            visited,
            history: Vec::new(),
            board,
        }
    }

    pub fn from_instance(inst: &Instance) -> GameState {
        GameState::new(Arc::new(Board::new(inst)))
    }

    pub fn variant(&self) -> Variant {
        self.board.variant
    }

    pub fn position_id(&self) -> &VertexId {
        &self.board.ids[self.position]
    }

    pub fn deletable(&self, e: usize) -> bool {
        if self.remaining[e] == 0 {
            return false;
        }
        match self.board.variant {
            Variant::Blizzard => {
                let (a, b) = self.board.ends[e];
                a == self.position || b == self.position
            }
            _ => true,
        }
    }

    /// Legal actions in canonical order; empty once the game is over.
    pub fn legal_actions(&self, no_revisit: bool) -> Vec<Action> {
        if self.status().is_terminal() {
            return Vec::new();
        }
        self.raw_actions(no_revisit)
    }

    /// Legal actions ignoring terminal detection.
    pub(crate) fn raw_actions(&self, no_revisit: bool) -> Vec<Action> {
        match self.phase {
            Phase::FugitiveToMove => self.board.adj[self.position]
                .iter()
                .filter(|&&(y, e)| self.remaining[e] > 0 && !(no_revisit && self.visited[y]))
                .map(|&(y, _)| Action::Step(y))
                .collect(),
            Phase::AdversaryToDelete => {
                let dels: Vec<Action> = (0..self.board.edge_count())
                    .filter(|&e| self.deletable(e))
                    .map(Action::Delete)
                    .collect();
                if dels.is_empty() {
                    vec![Action::Pass]
                } else {
                    dels
                }
            }
        }
    }

    pub fn legal_moves(&self, no_revisit: bool) -> Vec<Move> {
        self.legal_actions(no_revisit).into_iter().map(|a| self.to_move(a)).collect()
    }

    pub fn to_move(&self, a: Action) -> Move {
        let ids = &self.board.ids;
        match a {
            Action::Step(y) => Move::Step { to: ids[y].clone() },
            Action::Delete(e) => {
                let (u, v) = self.board.ends[e];
                Move::Delete {
                    u: ids[u].clone(),
                    v: ids[v].clone(),
                }
            }
            Action::Pass => Move::Pass,
        }
    }

    pub fn to_action(&self, m: &Move) -> Result<Action, MoveError> {
        let vertex = |id: &VertexId| {
            self.board
                .vertex(id.as_str())
                .ok_or_else(|| MoveError::UnknownVertex(id.to_string()))
        };
        match m {
            Move::Step { to } => Ok(Action::Step(vertex(to)?)),
            Move::Delete { u, v } => {
                let (a, b) = (vertex(u)?, vertex(v)?);
                self.board
                    .edge(a, b)
                    .map(Action::Delete)
                    .ok_or_else(|| MoveError::NoEdge(u.clone(), v.clone()))
            }
            Move::Pass => Ok(Action::Pass),
        }
    }

    /// Checks legality under the standard rules (revisits allowed).
    pub fn check(&self, a: Action) -> Result<(), MoveError> {
        self.check_with(a, false)
    }

    pub fn check_with(&self, a: Action, no_revisit: bool) -> Result<(), MoveError> {
        if self.status().is_terminal() {
            return Err(MoveError::GameOver);
        }
        let ids = &self.board.ids;
        match (self.phase, a) {
            (Phase::FugitiveToMove, Action::Step(y)) => {
                let live = self.board.edge(self.position, y).is_some_and(|e| self.remaining[e] > 0);
                if y == self.position || !live {
                    return Err(MoveError::NoEdge(ids[self.position].clone(), ids[y].clone()));
                }
                if no_revisit && self.visited[y] {
                    return Err(MoveError::Revisit(ids[y].clone()));
                }
                Ok(())
            }
            (Phase::AdversaryToDelete, Action::Delete(e)) => {
                let (u, v) = self.board.ends[e];
                if self.remaining[e] == 0 {
                    return Err(MoveError::NoEdge(ids[u].clone(), ids[v].clone()));
                }
                if !self.deletable(e) {
                    return Err(MoveError::NotIncident(ids[self.position].clone()));
                }
                Ok(())
            }
            (Phase::AdversaryToDelete, Action::Pass) => {
                if (0..self.board.edge_count()).any(|e| self.deletable(e)) {
                    Err(MoveError::PassNotAllowed)
                } else {
                    Ok(())
                }
            }
            (phase, _) => Err(MoveError::WrongPhase(phase)),
        }
    }

    /// Pure transition; the receiver is left untouched.
    pub fn apply(&self, a: Action) -> Result<GameState, MoveError> {
        self.check(a)?;
        let mut next = self.clone();
        next.apply_unchecked(a);
        Ok(next)
    }

    pub fn apply_move(&self, m: &Move) -> Result<GameState, MoveError> {
        self.apply(self.to_action(m)?)
    }

    /// In-place transition without legality checks.
    pub fn apply_unchecked(&mut self, a: Action) {
        match a {
            Action::Step(y) => {
                self.position = y;
                self.visited[y] = true;
                self.round += 1;
                self.phase = Phase::AdversaryToDelete;
            }
            Action::Delete(e) => {
                self.remaining[e] -= 1;
                self.phase = Phase::FugitiveToMove;
            }
            Action::Pass => self.phase = Phase::FugitiveToMove,
        }
        self.history.push(a);
    }

    /// Reverts the last in-place transition. `prev_visited` is the visited
    /// flag of the target before a step.
    pub fn undo(&mut self, a: Action, from: usize, prev_visited: bool) {
        self.history.pop();
        match a {
            Action::Step(y) => {
                self.visited[y] = prev_visited;
                self.position = from;
                self.round -= 1;
                self.phase = Phase::FugitiveToMove;
            }
            Action::Delete(e) => {
                self.remaining[e] += 1;
                self.phase = Phase::AdversaryToDelete;
            }
            Action::Pass => self.phase = Phase::AdversaryToDelete,
        }
    }

    pub fn status(&self) -> Status {
        let round = self.round;
        let b = &self.board;
        if b.exit[self.position] {
            return Status::FugitiveWon { round };
        }
        if b.variant == Variant::CatHerding {
            let free = b.adj[self.position].iter().any(|&(_, e)| self.remaining[e] > 0);
            return if free { Status::Ongoing } else { Status::Trapped { round } };
        }
        if self.exit_reachable(|_| true) {
            Status::Ongoing
        } else {
            Status::AdversaryWon { round }
        }
    }

    /// Like `status`, but a fugitive that cannot reach an exit through
    /// unvisited vertices has already lost.
    pub fn status_no_revisit(&self) -> Status {
        match self.status() {
            Status::Ongoing if self.board.variant != Variant::CatHerding => {
                if self.exit_reachable(|v| !self.visited[v]) {
                    Status::Ongoing
                } else {
                    Status::AdversaryWon { round: self.round }
                }
            }
            s => s,
        }
    }

    fn exit_reachable(&self, allowed: impl Fn(usize) -> bool) -> bool {
        let b = &self.board;
        let mut seen = vec![false; b.n()];
        seen[self.position] = true;
        let mut queue = VecDeque::from([self.position]);
        while let Some(x) = queue.pop_front() {
            for &(y, e) in &b.adj[x] {
                if self.remaining[e] == 0 || seen[y] || !allowed(y) {
                    continue;
                }
                if b.exit[y] {
                    return true;
                }
                seen[y] = true;
                queue.push_back(y);
            }
        }
        false
    }

    pub fn history_moves(&self) -> Vec<Move> {
        let mut replay = GameState::new(self.board.clone());
        let mut out = Vec::with_capacity(self.history.len());
        for &a in &self.history {
            out.push(replay.to_move(a));
            replay.apply_unchecked(a);
        }
        out
    }

    pub fn unvisited_count(&self) -> usize {
        self.visited.iter().filter(|v| !**v).count()
    }
}

/// A player. Strategies see the full state; search contexts may keep the
/// history field empty.
pub trait Strategy: Send + Sync {
    fn name(&self) -> String;

    /// `None` resigns.
    fn choose(&self, state: &GameState) -> Option<Action>;

    /// Whether decisions depend on the visited set.
    fn reads_visited(&self) -> bool {
        true
    }

    /// Whether decisions depend on the round counter.
    fn reads_round(&self) -> bool {
        true
    }

    /// Whether decisions depend on a multiplicity `m` other than through
    /// `min(m, unvisited + 1)`, where `unvisited` counts unvisited vertices.
    fn reads_counts(&self) -> bool {
        true
    }

    /// Adversary promise: never resigns, and once no vertex has more than one
    /// remaining exit copy, a fugitive standing on a vertex with an exit copy
    /// sees that copy deleted. From such a state the fugitive never escapes.
    fn guards_exits(&self) -> bool {
        false
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Transcript {
    pub instance: String,
    pub fugitive: String,
    pub adversary: String,
    pub moves: Vec<Move>,
    #[serde(flatten)]
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub forfeit: Option<Role>,
    pub adjudicated: bool,
}

/// Plays a full match. A strategy that resigns or returns an illegal move
/// forfeits; reaching `cap` rounds adjudicates to the adversary.
pub fn run_match(inst: &Instance, fugitive: &dyn Strategy, adversary: &dyn Strategy, cap: Option<u64>) -> Transcript {
    let mut state = GameState::from_instance(inst);
    let cap = cap.unwrap_or_else(|| state.board.default_cap());
    let mut forfeit = None;
    let mut adjudicated = false;
    let status = loop {
        let st = state.status();
        if st.is_terminal() {
            break st;
        }
        if state.phase == Phase::FugitiveToMove && state.round as u64 >= cap {
            adjudicated = true;
            break Status::AdversaryWon { round: state.round };
        }
        let (side, player) = match state.phase {
            Phase::FugitiveToMove => (Role::Fugitive, fugitive),
            Phase::AdversaryToDelete => (Role::Adversary, adversary),
        };
        match player.choose(&state).filter(|&a| state.check(a).is_ok()) {
            Some(a) => state.apply_unchecked(a),
            None => {
                forfeit = Some(side);
                break match side {
                    Role::Fugitive => Status::AdversaryWon { round: state.round },
                    Role::Adversary => Status::FugitiveWon { round: state.round },
                };
            }
        }
    };
    Transcript {
        instance: state.board.digest.clone(),
        fugitive: fugitive.name(),
        adversary: adversary.name(),
        moves: state.history_moves(),
        status,
        forfeit,
        adjudicated,
    }
}

/// Re-applies a transcript's moves to the initial state.
pub fn replay(inst: &Instance, moves: &[Move]) -> Result<GameState, (usize, MoveError)> {
    let mut state = GameState::from_instance(inst);
    for (i, m) in moves.iter().enumerate() {
        state = state.apply_move(m).map_err(|e| (i, e))?;
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;

    fn del(u: &str, v: &str) -> Move {
        Move::Delete { u: u.into(), v: v.into() }
    }

    fn step(to: &str) -> Move {
        Move::Step { to: to.into() }
    }

    #[test]
    fn legal_moves_on_i1() {
        let s = GameState::from_instance(&instances::i1());
        assert_eq!(s.legal_moves(false), vec![step("a")]);
        let s = s.apply_move(&step("a")).unwrap();
        assert_eq!(s.legal_moves(false), vec![del("a", "s"), del("a", "t1"), del("a", "t2")]);
        let b = GameState::from_instance(&instances::i1().with_variant(Variant::Blizzard));
        let b = b.apply_move(&step("a")).unwrap();
        assert_eq!(b.legal_moves(false).len(), 3);
    }

    #[test]
    fn blizzard_restricts_deletions() {
        let mut inst = instances::i1().with_variant(Variant::Blizzard);
        inst.graph.add_vertex("z", crate::graph::VertexKind::Regular).unwrap();
        inst.graph.add_edge("s", "z", 1).unwrap();
        let s = GameState::from_instance(&inst).apply_move(&step("a")).unwrap();
        assert!(s.apply_move(&del("s", "z")).is_err());
        assert!(s.apply_move(&del("a", "t1")).is_ok());
    }

    #[test]
    fn deletion_decrements_multiplicity() {
        let s = GameState::from_instance(&instances::i3()).apply_move(&step("a")).unwrap();
        let e = s.board.edge(s.board.vertex("a").unwrap(), s.board.vertex("x").unwrap()).unwrap();
        let s2 = s.apply_move(&del("a", "x")).unwrap();
        assert_eq!(s2.remaining[e], 1);
        assert_eq!(s.remaining[e], 2);
        assert_eq!(s2.status(), Status::Ongoing);
        let won = s2.apply_move(&step("x")).unwrap();
        assert_eq!(won.status(), Status::FugitiveWon { round: 2 });
    }

    #[test]
    fn i2_cut_is_adversary_win() {
        let s = GameState::from_instance(&instances::i2()).apply_move(&step("a")).unwrap();
        let s = s.apply_move(&del("a", "t")).unwrap();
        assert_eq!(s.status(), Status::AdversaryWon { round: 1 });
        assert!(s.legal_moves(false).is_empty());
    }

    #[test]
    fn exit_start_and_isolated_cat() {
        let mut g = crate::graph::MultiGraph::new();
        g.add_vertex("x", crate::graph::VertexKind::Exit).unwrap();
        let s = GameState::from_instance(&Instance::new(g, "x", Variant::Nemesis));
        assert_eq!(s.status(), Status::FugitiveWon { round: 0 });
        let mut g = crate::graph::MultiGraph::new();
        g.add_vertex("c", crate::graph::VertexKind::Regular).unwrap();
        let s = GameState::from_instance(&Instance::new(g, "c", Variant::CatHerding));
        assert_eq!(s.status(), Status::Trapped { round: 0 });
    }

    #[test]
    fn illegal_moves_are_rejected() {
        let s = GameState::from_instance(&instances::i1());
        assert!(matches!(s.apply_move(&step("t1")), Err(MoveError::NoEdge(..))));
        assert!(matches!(s.apply_move(&del("s", "a")), Err(MoveError::WrongPhase(_))));
        assert!(matches!(s.apply_move(&step("nope")), Err(MoveError::UnknownVertex(_))));
        let s = s.apply_move(&step("a")).unwrap();
        assert!(matches!(s.apply_move(&Move::Pass), Err(MoveError::PassNotAllowed)));
    }

    #[test]
    fn move_json_shape() {
        assert_eq!(serde_json::to_string(&step("a")).unwrap(), r#"{"t":"step","to":"a"}"#);
        assert_eq!(serde_json::to_string(&del("a", "b")).unwrap(), r#"{"t":"del","u":"a","v":"b"}"#);
        assert_eq!(serde_json::to_string(&Move::Pass).unwrap(), r#"{"t":"pass"}"#);
    }

    struct Fixed(Vec<Move>);

    impl Strategy for Fixed {
        fn name(&self) -> String {
            "fixed".into()
        }
        fn choose(&self, state: &GameState) -> Option<Action> {
            let k = state.history.len() / 2;
            self.0.get(k).and_then(|m| state.to_action(m).ok())
        }
    }

    #[test]
    fn cap_zero_adjudicates() {
        let t = run_match(&instances::i1(), &Fixed(vec![]), &Fixed(vec![]), Some(0));
        assert_eq!(t.status, Status::AdversaryWon { round: 0 });
        assert!(t.adjudicated);
    }

    #[test]
    fn forfeit_and_replay() {
        let inst = instances::i1();
        let f = Fixed(vec![step("a"), step("t2")]);
        let a = Fixed(vec![del("a", "t1")]);
        let t = run_match(&inst, &f, &a, None);
        assert_eq!(t.status, Status::FugitiveWon { round: 2 });
        assert_eq!(replay(&inst, &t.moves).unwrap().status(), t.status);
        let bad = Fixed(vec![step("t1")]);
        let t = run_match(&inst, &bad, &a, None);
        assert_eq!(t.forfeit, Some(Role::Fugitive));
    }
}
