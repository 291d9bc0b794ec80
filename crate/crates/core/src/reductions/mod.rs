//! Instance generators and transformers, each with an independent structural checker.

mod cat;
mod exits;
mod formula;
mod grid;
mod lsat;
mod sat;
mod simple;

use std::str::FromStr;

use thiserror::Error;

use crate::graph::{GraphError, VertexId};

pub use cat::{check_catherding, nemesis_to_catherding, CatReduction};
pub use exits::{check_two_exits, merge_exits, to_two_exits};
pub use formula::{parse_dimacs, parse_qdimacs, CnfFormula, Lit, Quantifier, Qbf};
pub use grid::{check_grid, grid_instance};
pub use lsat::{check_lsat_bet, lsat_to_bet_instance, LsatCensus};
pub use sat::{
    check_sat_instance, qsat_to_nemesis, sat_to_nemesis, AssignmentFollower, CycleInfo, Gadget, ReductionNemesis,
    ResolvedParams, SatReduction,
};
pub use simple::{check_simple_translation, default_copies, multigraph_to_simple};

#[derive(Debug, Error, PartialEq)]
pub enum ReductionError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid formula: {0}")]
    Formula(String),
    #[error("formula is not LSAT: {0}")]
    NotLsat(String),
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("unsupported input: {0}")]
    Input(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// User overrides for the constructions; unset fields take their defaults.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ReductionParams {
    /// Quarter length of each variable cycle.
    pub k: Option<u32>,
    /// Length of each clause path.
    pub l: Option<u32>,
    /// Copies per vertex in the simple-graph translation.
    pub n: Option<u32>,
}

/// Extra cycle length given to instances carrying electric gadgets.
pub const GADGET_BUMP: u32 = 3;

impl FromStr for ReductionParams {
    type Err = ReductionError;

    /// Parses `K=..,L=..,N=..` (any subset, any order).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = ReductionParams::default();
        for part in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| ReductionError::Params(format!("expected KEY=VALUE, got `{part}`")))?;
            let value: u32 = value
                .trim()
                .parse()
                .map_err(|_| ReductionError::Params(format!("bad value in `{part}`")))?;
            match key.trim() {
                "K" | "k" => p.k = Some(value),
                "L" | "l" => p.l = Some(value),
                "N" | "n" => p.n = Some(value),
                other => return Err(ReductionError::Params(format!("unknown parameter `{other}`"))),
            }
        }
        Ok(p)
    }
}

pub(crate) fn id(s: impl Into<String>) -> VertexId {
    VertexId::new(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_parse() {
        let p: ReductionParams = "K=4, L=20".parse().unwrap();
        assert_eq!(p, ReductionParams { k: Some(4), l: Some(20), n: None });
        assert_eq!("".parse::<ReductionParams>().unwrap(), ReductionParams::default());
        assert!("Q=1".parse::<ReductionParams>().is_err());
        assert!("K".parse::<ReductionParams>().is_err());
    }
}
