//! JSON bodies exchanged with clients.

use nemesis_core::exact::Outcome;
use nemesis_core::{GameState, Move, Phase, Role, Status, VertexId, VertexKind, Variant};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
pub struct CreateRequest {
    /// An instance in the file schema.
    pub instance: serde_json::Value,
    /// The side played by the client.
    pub role: Role,
    pub budget: Option<u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct VertexView {
    pub id: VertexId,
    pub kind: VertexKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pos: Option<[f64; 2]>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct EdgeView {
    pub u: VertexId,
    pub v: VertexId,
    pub initial: u32,
    pub remaining: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct StateView {
    pub schema: u32,
    pub id: String,
    pub variant: Variant,
    pub human_role: Role,
    pub to_move: Role,
    pub phase: Phase,
    pub current_round: u32,
    pub position: VertexId,
    pub visited: Vec<VertexId>,
    pub vertices: Vec<VertexView>,
    pub edges: Vec<EdgeView>,
    pub legal_moves: Vec<Move>,
    #[serde(flatten)]
    pub status: Status,
    pub moves: Vec<Move>,
    pub budget: u64,
    pub created: u64,
    pub updated: u64,
}

impl StateView {
    pub fn build(id: &str, state: &GameState, human: Role, budget: u64, created: u64, updated: u64) -> StateView {
        let b = &state.board;
        let layout = b.instance().layout.as_ref();
        StateView {
            schema: SCHEMA_VERSION,
            id: id.to_owned(),
            variant: b.variant,
            human_role: human,
            to_move: Role::to_move(state.phase),
            phase: state.phase,
            current_round: state.round,
            position: state.position_id().clone(),
            visited: (0..b.n()).filter(|&v| state.visited[v]).map(|v| b.ids[v].clone()).collect(),
            vertices: (0..b.n())
                .map(|v| VertexView {
                    id: b.ids[v].clone(),
                    kind: if b.exit[v] { VertexKind::Exit } else { VertexKind::Regular },
                    pos: layout.and_then(|l| l.get(&b.ids[v]).copied()),
                })
                .collect(),
            edges: b
                .ends
                .iter()
                .enumerate()
                .map(|(e, &(u, v))| EdgeView {
                    u: b.ids[u].clone(),
                    v: b.ids[v].clone(),
                    initial: b.init[e],
                    remaining: state.remaining[e],
                })
                .collect(),
            legal_moves: state.legal_moves(false),
            status: state.status(),
            moves: state.history_moves(),
            budget,
            created,
            updated,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MoveResponse {
    pub state: StateView,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub engine_move: Option<Move>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct HintView {
    pub winner_from_here: Outcome,
    pub suggested_move: Option<Move>,
    pub exact: bool,
    pub nodes: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ErrorBody {
    pub error: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state: Option<StateView>,
}
