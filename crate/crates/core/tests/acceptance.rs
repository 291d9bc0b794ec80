//! Acceptance suite. One line per criterion; exits non-zero if any fails.
//!
//! Run with `cargo test --release -p nemesis-core --test acceptance`.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use nemesis_core::exact::{
    best_response_adversary, best_response_fugitive, cat_value, solve_blizzard, solve_nemesis, with_stack, Outcome,
    SearchConfig, Verdict,
};
use nemesis_core::fast::{bet_strategy, blizzard_wsets, find_bet, find_bet_near, tree_condition_deg3, tree_condition_tree};
use nemesis_core::graph::simplify;
use nemesis_core::instances;
use nemesis_core::reductions::{
    check_catherding, check_grid, check_lsat_bet, check_sat_instance, check_simple_translation, check_two_exits,
    default_copies, grid_instance, lsat_to_bet_instance, merge_exits, multigraph_to_simple, nemesis_to_catherding,
    qsat_to_nemesis, sat_to_nemesis, to_two_exits, AssignmentFollower, CnfFormula, Lit, Qbf, ReductionNemesis,
    ReductionParams, SatReduction,
};
use nemesis_core::rules::{run_match, Action, GameState, Role, Status};
use nemesis_core::strategy::{CornerCut, ShortestPath};
use nemesis_core::{Instance, MultiGraph, VertexKind, Variant};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 0x5EED_2024;
const TREE_MAX_VERTICES: usize = 9;
const RANDOM_CASES: usize = 500;
const SMALL_CASES: usize = 200;
const MINIMAL_BUDGET: u64 = 100_000_000;
const GRID_BUDGET: u64 = 10_000_000;
const TRANSLATION_BUDGET: u64 = 20_000_000;
/// Translations above this size are checked structurally only; every search
/// node keys on the full edge vector.
const TRANSLATION_EDGE_LIMIT: usize = 100_000;
const PRUNING_CASES: usize = 400;

struct Report {
    pass: bool,
    detail: String,
}

fn report(pass: bool, detail: impl Into<String>) -> Report {
    Report { pass, detail: detail.into() }
}

fn nemesis(inst: &Instance) -> Outcome {
    solve_nemesis(inst, &SearchConfig::default()).unwrap().winner
}

fn blizzard(inst: &Instance) -> Outcome {
    solve_blizzard(inst, &SearchConfig::default()).unwrap().winner
}

fn tree_corpus() -> Vec<Instance> {
    (1..=TREE_MAX_VERTICES).flat_map(|n| common::all_trees(n)).flat_map(|t| common::tree_labelings(&t)).collect()
}

fn deg3_corpus() -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    (0..RANDOM_CASES).map(|_| common::random_deg3(&mut rng, 10)).collect()
}

fn blizzard_corpus() -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    (0..RANDOM_CASES).map(|_| common::random_simple(&mut rng, 10, 0.3, Variant::Blizzard)).collect()
}

fn mismatches<'a>(corpus: &'a [Instance], f: impl Fn(&Instance) -> bool) -> Vec<&'a Instance> {
    corpus.iter().filter(|i| !f(i)).collect()
}

fn first_failure(bad: &[&Instance]) -> String {
    bad.first().map(|i| format!("; first: {}", nemesis_core::graph::serialize_instance(i).replace('\n', " "))).unwrap_or_default()
}

fn c1(trees: &[Instance]) -> Report {
    let bad = mismatches(trees, |i| tree_condition_tree(i).unwrap().winner == nemesis(i));
    report(bad.is_empty(), format!("{} labeled trees, {} mismatches{}", trees.len(), bad.len(), first_failure(&bad)))
}

fn c2(deg3: &[Instance]) -> Report {
    let bad = mismatches(deg3, |i| tree_condition_deg3(i).unwrap().winner == nemesis(i));
    report(bad.is_empty(), format!("{} graphs, {} mismatches{}", deg3.len(), bad.len(), first_failure(&bad)))
}

fn c3(bl: &[Instance]) -> Report {
    let bad = mismatches(bl, |i| blizzard_wsets(i).unwrap().1.winner == blizzard(i));
    report(bad.is_empty(), format!("{} graphs, {} mismatches{}", bl.len(), bad.len(), first_failure(&bad)))
}

fn c4(trees: &[Instance], deg3: &[Instance]) -> Report {
    let (mut tried, mut bad) = (0, Vec::new());
    for inst in trees.iter().chain(deg3) {
        let Some(tree) = find_bet_near(&inst.graph, &inst.start, None).unwrap() else {
            continue;
        };
        tried += 1;
        let v = best_response_adversary(inst, &bet_strategy(tree), &SearchConfig::default()).unwrap();
        if !(v.exact && v.winner == Outcome::Fugitive) {
            bad.push(inst);
        }
    }
    report(bad.is_empty() && tried > 0, format!("{tried} instances with a nearby escape tree, {} lost{}", bad.len(), first_failure(&bad)))
}

fn c5(trees: &[Instance], deg3: &[Instance], bl: &[Instance]) -> Report {
    let mut bad = mismatches(trees, |i| nemesis(i) == nemesis(&simplify(i)));
    bad.extend(mismatches(deg3, |i| nemesis(i) == nemesis(&simplify(i))));
    bad.extend(mismatches(bl, |i| blizzard(i) == blizzard(&simplify(i))));
    let total = trees.len() + deg3.len() + bl.len();
    report(bad.is_empty(), format!("{total} instances, {} changed winner{}", bad.len(), first_failure(&bad)))
}

fn c6() -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let (mut cases, mut bad, mut size_bad) = (0, Vec::new(), 0);
    while cases < SMALL_CASES {
        let inst = common::random_simple(&mut rng, 4, 0.5, Variant::Nemesis);
        if inst.graph.edge_count() > 6 {
            continue;
        }
        cases += 1;
        let out = to_two_exits(&inst).unwrap();
        if out.graph.vertex_count() != 2 * inst.graph.vertex_count() + 3 || check_two_exits(&inst, &out).is_err() {
            size_bad += 1;
        }
        if nemesis(&inst) != nemesis(&out) {
            bad.push(inst);
        }
    }
    report(
        bad.is_empty() && size_bad == 0,
        format!("{cases} instances, {} changed winner, {size_bad} with |V'| != 2n+3{}", bad.len(), first_failure(&bad.iter().collect::<Vec<_>>())),
    )
}

fn c7() -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let corpus: Vec<Instance> = (0..SMALL_CASES).map(|_| common::random_multigraph(&mut rng, 8, 8, 3, Variant::Nemesis)).collect();
    let bad = mismatches(&corpus, |i| {
        let m = merge_exits(i);
        m.graph.exits().count() <= 1 && nemesis(i) == nemesis(&m)
    });
    report(bad.is_empty(), format!("{} multigraphs, {} changed winner{}", corpus.len(), bad.len(), first_failure(&bad)))
}

/// Every clause over variables 1..=n with 1 to 3 distinct variables.
fn all_clauses(n: usize) -> Vec<Vec<Lit>> {
    let mut out = Vec::new();
    for vars in 1u32..1 << n {
        if vars.count_ones() > 3 {
            continue;
        }
        let chosen: Vec<usize> = (0..n).filter(|i| vars >> i & 1 == 1).map(|i| i + 1).collect();
        for signs in 0u32..1 << chosen.len() {
            out.push(chosen.iter().enumerate().map(|(k, &v)| Lit { var: v, positive: signs >> k & 1 == 0 }).collect());
        }
    }
    out
}

fn c8() -> Report {
    let (mut checked, mut sat, mut bad, mut degree_bad) = (0, 0, Vec::new(), 0);
    for n in 1..=3 {
        let clauses = all_clauses(n);
        let mut formulas: Vec<Vec<Vec<Lit>>> = clauses.iter().map(|c| vec![c.clone()]).collect();
        for a in &clauses {
            for b in &clauses {
                formulas.push(vec![a.clone(), b.clone()]);
            }
        }
        for cl in formulas {
            let f = CnfFormula::new(n, cl).unwrap();
            if !f.is_lsat() {
                continue;
            }
            checked += 1;
            let (g, root) = lsat_to_bet_instance(&f).unwrap();
            if g.max_degree() > 4 || check_lsat_bet(&f, &g, &root).is_err() {
                degree_bad += 1;
            }
            let satisfiable = f.brute_force_sat().is_some();
            sat += usize::from(satisfiable);
            if find_bet(&g, &root, None).unwrap().is_some() != satisfiable {
                bad.push(f.to_dimacs().replace('\n', " "));
            }
        }
    }
    report(
        bad.is_empty() && degree_bad == 0,
        format!(
            "{checked} formulas ({sat} satisfiable), {} disagreements, {degree_bad} structural failures{}",
            bad.len(),
            bad.first().map(|f| format!("; first: {f}")).unwrap_or_default()
        ),
    )
}

fn cnf(n: usize, clauses: &[&[i64]]) -> CnfFormula {
    CnfFormula::from_ints(n, clauses).unwrap()
}

/// Exact verdict with the large budget, then the script harness. The harness
/// runs the scripted fugitive when the expected winner is the fugitive and the
/// scripted nemesis otherwise.
fn decide(red: &SatReduction, expected: Outcome) -> (bool, String) {
    let exact = solve_nemesis(&red.instance, &SearchConfig::with_budget(MINIMAL_BUDGET)).unwrap();
    let harness: Verdict = if expected == Outcome::Fugitive {
        best_response_adversary(&red.instance, &AssignmentFollower::new(red), &SearchConfig::default()).unwrap()
    } else {
        best_response_fugitive(&red.instance, &ReductionNemesis::new(red), &SearchConfig::default())
    };
    let ok = match exact.winner {
        Outcome::Unknown => harness.exact && harness.winner == expected,
        w => w == expected && (!harness.exact || harness.winner == expected),
    };
    let detail = format!(
        "|V|={} exact={:?} ({} nodes) harness={:?} ({} nodes)",
        red.instance.graph.vertex_count(),
        exact.winner,
        exact.nodes_explored,
        harness.winner,
        harness.nodes_explored
    );
    (ok, detail)
}

fn c9() -> Report {
    let params = ReductionParams::default();
    let sat = sat_to_nemesis(&cnf(1, &[&[1]]), &params).unwrap();
    let unsat = sat_to_nemesis(&cnf(1, &[&[1], &[-1]]), &params).unwrap();
    let structural = check_sat_instance(&sat).is_ok() && check_sat_instance(&unsat).is_ok();
    let (a, da) = decide(&sat, Outcome::Fugitive);
    let (b, db) = decide(&unsat, Outcome::Adversary);
    report(structural && a && b, format!("{{(x1)}}: {da}; {{(x1),(~x1)}}: {db}; structure ok: {structural}"))
}

fn qbf(clauses: &[&[i64]]) -> Qbf {
    Qbf { matrix: cnf(2, clauses) }
}

fn minimal_qbfs() -> (SatReduction, SatReduction) {
    let params = ReductionParams::default();
    let t = qsat_to_nemesis(&qbf(&[&[1, 2], &[1, -2]]), &params).unwrap();
    let f = qsat_to_nemesis(&qbf(&[&[1, 2], &[-1, 2]]), &params).unwrap();
    (t, f)
}

/// Fuses and derivation paths, counted directly on the graph.
fn gadget_errors(red: &SatReduction) -> Vec<String> {
    let g = &red.instance.graph;
    let mut errors = Vec::new();
    for c in &red.cycles {
        let universal = red.universal[c.var - 1];
        let Some(gd) = &c.gadget else {
            if universal {
                errors.push(format!("universal x{} has no gadget", c.var));
            }
            continue;
        };
        if !universal {
            errors.push(format!("existential x{} has a gadget", c.var));
        }
        let fuses = [(&gd.u, &gd.v), (&gd.nu, &gd.nv)];
        if fuses.iter().any(|(a, b)| g.multiplicity(a, b) != 1) {
            errors.push(format!("x{}: fuse multiplicity is not 1", c.var));
        }
        for (a, mid, b) in [(&gd.nu, &gd.w, &gd.v), (&gd.u, &gd.nw, &gd.nv)] {
            let path = g.multiplicity(a, mid) > 0 && g.multiplicity(mid, b) > 0 && g.degree(mid) == 2 * g.multiplicity(a, mid);
            if !path || g.multiplicity(a, mid) != g.multiplicity(mid, b) {
                errors.push(format!("x{}: derivation {a}-{mid}-{b} is not a length-2 path", c.var));
            }
        }
    }
    let ones = g.edges().filter(|(_, _, m)| *m == 1).count();
    let expected = 2 * red.universal.iter().filter(|u| **u).count();
    if ones != expected {
        errors.push(format!("{ones} multiplicity-1 edges, expected {expected}"));
    }
    errors
}

fn c10() -> Report {
    let (t, f) = minimal_qbfs();
    let mut errors = gadget_errors(&t);
    errors.extend(gadget_errors(&f));
    for red in [&t, &f] {
        if let Err(e) = check_sat_instance(red) {
            errors.extend(e);
        }
    }
    let (a, da) = decide(&t, Outcome::Fugitive);
    let (b, db) = decide(&f, Outcome::Adversary);
    report(
        errors.is_empty() && a && b,
        format!("true QBF: {da}; false QBF: {db}; structural errors: {}{}", errors.len(), errors.first().map(|e| format!(" ({e})")).unwrap_or_default()),
    )
}

fn c11() -> Report {
    let mut parts = Vec::new();
    let mut pass = true;
    let i3 = instances::i3();
    let (qt, _) = minimal_qbfs();
    for (name, src) in [("I3", &i3), ("QSAT", &qt.instance)] {
        let src_winner = nemesis(src);
        let n = default_copies(src);
        for copies in [n, n + 1] {
            let out = multigraph_to_simple(src, Some(copies)).unwrap();
            let structural = check_simple_translation(src, &out, copies).is_ok();
            let v = if out.graph.edge_count() <= TRANSLATION_EDGE_LIMIT {
                solve_nemesis(&out, &SearchConfig::with_budget(TRANSLATION_BUDGET)).unwrap().winner
            } else {
                Outcome::Unknown
            };
            let verdict = match v {
                Outcome::Unknown => "budget-skipped".to_string(),
                w if w == src_winner => format!("{w:?} preserved"),
                w => {
                    pass = false;
                    format!("{w:?} != source {src_winner:?}")
                }
            };
            pass &= structural;
            parts.push(format!(
                "{name} N={copies}: {} vertices, {} edges, structure {}, exact {verdict}",
                out.graph.vertex_count(),
                out.graph.edge_count(),
                if structural { "ok" } else { "BAD" }
            ));
        }
    }
    // I3 must be decided outright.
    pass &= parts.iter().filter(|p| p.starts_with("I3")).all(|p| p.contains("preserved"));
    report(pass, parts.join("; "))
}

/// Plain minimax over the rules, no memo and no pruning: rounds survived.
fn cat_oracle(state: &GameState) -> u32 {
    match state.status() {
        Status::Trapped { round } | Status::AdversaryWon { round } | Status::FugitiveWon { round } => return round,
        Status::Ongoing => {}
    }
    let values = state.legal_actions(false).into_iter().map(|a: Action| cat_oracle(&state.apply(a).unwrap()));
    if Role::to_move(state.phase) == Role::Fugitive {
        values.max().unwrap()
    } else {
        values.min().unwrap()
    }
}

fn c12() -> Report {
    let shapes: [(&str, &[(&str, &str)], u64); 3] =
        [("vertex", &[], 0), ("edge", &[("a", "b")], 1), ("triangle", &[("a", "b"), ("b", "c"), ("a", "c")], 2)];
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, edges, expected) in shapes {
        let mut g = MultiGraph::new();
        g.add_vertex("a", VertexKind::Regular).unwrap();
        for (u, v) in edges {
            for x in [u, v] {
                if !g.contains(&(*x).into()) {
                    g.add_vertex(*x, VertexKind::Regular).unwrap();
                }
            }
            g.add_edge(*u, *v, 1).unwrap();
        }
        let inst = Instance::new(g, "a", Variant::CatHerding);
        let v = cat_value(&inst, &SearchConfig::default()).unwrap();
        let oracle = cat_oracle(&GameState::from_instance(&inst)) as u64;
        pass &= v.exact && v.value == Some(expected) && oracle == expected;
        parts.push(format!("{name}={:?} (oracle {oracle})", v.value));
    }
    let i1 = instances::i1();
    let two = to_two_exits(&instances::i2()).unwrap();
    for (name, src) in [("I1", &i1), ("two-exit I2", &two)] {
        let red = nemesis_to_catherding(src).unwrap();
        let ok = check_catherding(src, &red).is_ok() && red.instance.graph.exits().count() == 0;
        pass &= ok;
        parts.push(format!("{name}: clique {} threshold {} structure {}", red.clique_size, red.threshold, if ok { "ok" } else { "BAD" }));
    }
    report(pass, parts.join("; "))
}

fn c13() -> Report {
    let grid = grid_instance(13, 13, None).unwrap();
    let structural = check_grid(&grid, 13, 13).is_ok();
    let cfg = SearchConfig::with_budget(GRID_BUDGET);
    let v = best_response_fugitive(&grid, &CornerCut, &cfg);
    let t = run_match(&grid, &ShortestPath, &CornerCut, None);
    let pass = structural && v.exact && v.winner == Outcome::Adversary && t.status.winner() == Some(Role::Adversary);
    report(
        pass,
        format!(
            "best response vs corner-cut: {:?} in {} nodes (exact {}); shortest-path vs corner-cut: {:?} after {} moves",
            v.winner,
            v.nodes_explored,
            v.exact,
            t.status,
            t.moves.len()
        ),
    )
}

fn c14() -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    let corpus: Vec<Instance> = (0..PRUNING_CASES).map(|_| common::random_multigraph(&mut rng, 7, 10, 3, Variant::Nemesis)).collect();
    let configs = [
        ("P1 off", SearchConfig { no_revisit: false, ..SearchConfig::default() }),
        ("P2 off", SearchConfig { multiplicity_cap: Some(u32::MAX), ..SearchConfig::default() }),
        ("P3 off", SearchConfig { dominated_deletion_pruning: false, ..SearchConfig::default() }),
        ("all off", SearchConfig::unpruned()),
    ];
    let mut bad = Vec::new();
    for inst in &corpus {
        let w = nemesis(inst);
        for (name, cfg) in &configs {
            if solve_nemesis(inst, cfg).unwrap().winner != w {
                bad.push((*name, inst));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 5);
    let bl: Vec<Instance> = (0..PRUNING_CASES).map(|_| common::random_multigraph(&mut rng, 7, 10, 3, Variant::Blizzard)).collect();
    for inst in &bl {
        let w = blizzard(inst);
        for (name, cfg) in &configs {
            if solve_blizzard(inst, cfg).unwrap().winner != w {
                bad.push((*name, inst));
            }
        }
    }
    report(
        bad.is_empty(),
        format!(
            "{} nemesis + {} blizzard instances x {} configurations, {} disagreements{}",
            corpus.len(),
            bl.len(),
            configs.len(),
            bad.len(),
            bad.first().map(|(n, i)| format!("; first ({n}): {}", nemesis_core::graph::serialize_instance(i).replace('\n', " "))).unwrap_or_default()
        ),
    )
}

fn main() -> ExitCode {
    with_stack(|| {
        let trees = tree_corpus();
        let deg3 = deg3_corpus();
        let bl = blizzard_corpus();
        let criteria: Vec<(u32, &str, Box<dyn Fn() -> Report + Sync + '_>)> = vec![
            (1, "tree condition on trees", Box::new(|| c1(&trees))),
            (2, "tree condition on max degree 3", Box::new(|| c2(&deg3))),
            (3, "blizzard winning sets", Box::new(|| c3(&bl))),
            (4, "escape tree strategy soundness", Box::new(|| c4(&trees, &deg3))),
            (5, "simplification preserves winner", Box::new(|| c5(&trees, &deg3, &bl))),
            (6, "two-exit reduction", Box::new(c6)),
            (7, "exit merge", Box::new(c7)),
            (8, "LSAT escape tree generator", Box::new(c8)),
            (9, "SAT reduction, minimal instances", Box::new(c9)),
            (10, "QSAT gadget and minimal QBFs", Box::new(c10)),
            (11, "multigraph to simple graph", Box::new(c11)),
            (12, "cat herding", Box::new(c12)),
            (13, "13x13 grid", Box::new(c13)),
            (14, "pruning soundness", Box::new(c14)),
        ];
        let mut failed = 0;
        for (n, name, run) in &criteria {
            let t = Instant::now();
            let r = run();
            failed += usize::from(!r.pass);
            println!(
                "criterion {n:>2} [{}] {name} ({:.1}s): {}",
                if r.pass { "PASS" } else { "FAIL" },
                t.elapsed().as_secs_f64(),
                r.detail
            );
        }
        println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
        if failed == 0 {
            ExitCode::SUCCESS
        } else {
            ExitCode::FAILURE
        }
    })
}
