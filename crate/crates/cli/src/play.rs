use std::io::{BufRead, Write};

use anyhow::Result;
use nemesis_core::exact::with_stack;
use nemesis_core::rules::run_match;
use nemesis_core::strategy::{script_by_name, Engine};
use nemesis_core::{GameState, Instance, Move, Role, Status};

use crate::{print_json, Code, Common, SCHEMA_VERSION};

const ENGINE_BUDGET: u64 = 200_000;

fn code_for(winner: Role) -> Code {
    match winner {
        Role::Fugitive => Code::Fugitive,
        Role::Adversary => Code::Adversary,
    }
}

fn status_line(s: Status) -> String {
    match s {
        Status::Ongoing => "ongoing".into(),
        Status::FugitiveWon { round } => format!("fugitive escapes in round {round}"),
        Status::AdversaryWon { round } => format!("adversary wins in round {round}"),
        Status::Trapped { round } => format!("fugitive trapped after {round} rounds"),
    }
}

pub fn simulate(c: &Common, inst: &Instance, fugitive: &str, adversary: &str) -> Result<Code> {
    let f = script_by_name(fugitive, Role::Fugitive, inst, c.seed)?;
    let a = script_by_name(adversary, Role::Adversary, inst, c.seed)?;
    let t = with_stack(|| run_match(inst, &*f, &*a, c.cap));
    if c.json {
        let mut out = serde_json::to_value(&t)?;
        out["schema"] = serde_json::json!(SCHEMA_VERSION);
        print_json(&out);
    } else {
        println!("{} vs {}", t.fugitive, t.adversary);
        for (i, m) in t.moves.iter().enumerate() {
            println!("{:>4}. {m}", i + 1);
        }
        let mut last = status_line(t.status);
        if let Some(side) = t.forfeit {
            last.push_str(&format!(" ({side:?} forfeits)"));
        }
        if t.adjudicated {
            last.push_str(" (round cap reached)");
        }
        println!("{last}");
    }
    Ok(t.status.winner().map(code_for).unwrap_or(Code::Unknown))
}

fn render(out: &mut impl Write, state: &GameState, human: Role) -> std::io::Result<()> {
    let b = &state.board;
    writeln!(out)?;
    writeln!(out, "round {}, fugitive at {}", state.round, state.position_id())?;
    let edges: Vec<String> = b
        .ends
        .iter()
        .enumerate()
        .filter(|&(e, _)| state.remaining[e] > 0)
        .map(|(e, &(u, v))| {
            let x = state.remaining[e];
            if x > 1 {
                format!("{}-{} x{x}", b.ids[u], b.ids[v])
            } else {
                format!("{}-{}", b.ids[u], b.ids[v])
            }
        })
        .collect();
    writeln!(out, "edges: {}", edges.join(", "))?;
    if Role::to_move(state.phase) == human {
        for (i, m) in state.legal_moves(false).iter().enumerate() {
            writeln!(out, "  {}) {m}", i + 1)?;
        }
    }
    Ok(())
}

/// Accepts a move number, a vertex name, `u-v`, `pass`, or a move as printed.
fn parse_input(line: &str, legal: &[Move]) -> Option<Move> {
    let s = line.trim();
    if let Ok(k) = s.parse::<usize>() {
        return k.checked_sub(1).and_then(|i| legal.get(i)).cloned();
    }
    legal
        .iter()
        .find(|m| match m {
            Move::Step { to } => to.as_str() == s,
            Move::Delete { u, v } => {
                s == format!("{u}-{v}") || s == format!("{v}-{u}") || s == format!("{u} {v}") || s == format!("{v} {u}")
            }
            Move::Pass => s == "pass",
        })
        .or_else(|| legal.iter().find(|m| m.to_string() == s))
        .cloned()
}

/// With `--json` the session itself goes to stderr and this is the only stdout.
fn summary(c: &Common, state: &GameState, aborted: bool) -> Result<()> {
    if c.json {
        let mut out = serde_json::to_value(state.status())?;
        out["schema"] = serde_json::json!(SCHEMA_VERSION);
        out["moves"] = serde_json::to_value(state.history_moves())?;
        out["aborted"] = serde_json::json!(aborted);
        print_json(&out);
    }
    Ok(())
}

pub fn play(c: &Common, inst: &Instance, human: Role, mut input: impl BufRead, mut out: impl Write) -> Result<Code> {
    let mut state = GameState::from_instance(inst);
    let engine = Engine::new(human.other(), c.budget.unwrap_or(ENGINE_BUDGET));
    let side = if human == Role::Fugitive { "fugitive" } else { "adversary" };
    writeln!(out, "you play the {side}; enter a move number, a vertex, u-v, or pass")?;
    loop {
        let status = state.status();
        if let Some(w) = status.winner() {
            render(&mut out, &state, human)?;
            let banner = if w == human { "you win" } else { "you lose" };
            writeln!(out, "*** {banner}: {} ***", status_line(status))?;
            summary(c, &state, false)?;
            return Ok(code_for(w));
        }
        if Role::to_move(state.phase) == human {
            render(&mut out, &state, human)?;
            let legal = state.legal_moves(false);
            write!(out, "> ")?;
            out.flush()?;
            let mut line = String::new();
            if input.read_line(&mut line)? == 0 {
                writeln!(out, "\naborted")?;
                summary(c, &state, true)?;
                return Ok(Code::Unknown);
            }
            match parse_input(&line, &legal) {
                Some(m) => state = state.apply_move(&m)?,
                None => writeln!(out, "not a legal move: `{}`", line.trim())?,
            }
        } else {
            let snapshot = state.clone();
            let choice = with_stack(|| engine.decide(&snapshot).map(|(a, _)| a));
            match choice.filter(|&a| state.check(a).is_ok()) {
                Some(a) => {
                    writeln!(out, "engine: {}", state.to_move(a))?;
                    state = state.apply(a)?;
                }
                None => {
                    writeln!(out, "*** you win: the engine resigns ***")?;
                    summary(c, &state, false)?;
                    return Ok(code_for(human));
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn input_forms() {
        let legal = vec![
            Move::Step { to: "a".into() },
            Move::Delete { u: "a".into(), v: "t1".into() },
            Move::Pass,
        ];
        assert_eq!(parse_input("1\n", &legal), Some(legal[0].clone()));
        assert_eq!(parse_input(" a ", &legal), Some(legal[0].clone()));
        assert_eq!(parse_input("t1-a", &legal), Some(legal[1].clone()));
        assert_eq!(parse_input("delete a-t1", &legal), Some(legal[1].clone()));
        assert_eq!(parse_input("pass", &legal), Some(Move::Pass));
        assert_eq!(parse_input("0", &legal), None);
        assert_eq!(parse_input("4", &legal), None);
        assert_eq!(parse_input("b", &legal), None);
    }
}
