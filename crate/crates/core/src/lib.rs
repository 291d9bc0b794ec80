//! Engine, solvers and reductions for the Nemesis edge-deletion escape game
//! and its Blizzard and Cat Herding variants.

pub mod board;
pub mod graph;
pub mod instances;
pub mod exact;
pub mod fast;
pub mod reductions;
pub mod rules;
pub mod strategy;

pub use board::Board;
pub use graph::{Instance, MultiGraph, VertexId, VertexKind, Variant};
pub use rules::{Action, GameState, Move, Phase, Role, Status, Strategy};
