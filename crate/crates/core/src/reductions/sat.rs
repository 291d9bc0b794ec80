//! SAT and QSAT formulas as Nemesis multigraph instances.
//!
//! Each variable is a cycle of length 4K entered at one vertex and left at the
//! opposite one; the two sides carry `t_i` and `f_i`. Cycles are chained from
//! `s` to `r`, where the main exit hangs. Each clause is a vertex `c_h` with
//! its own exit, joined by length-L paths to the `t`/`f` vertices of its
//! literals. Universal variables get an electric gadget: a fuse of
//! multiplicity one after the first edge of each side, plus two crossing
//! derivation paths of length two.

use std::collections::{BTreeMap, VecDeque};

use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::board::Board;
use crate::graph::{Instance, MultiGraph, VertexId, VertexKind, Variant};
use crate::rules::{Action, GameState, Phase, Strategy};

use super::formula::{CnfFormula, Qbf};
use super::{id, ReductionError, ReductionParams, GADGET_BUMP};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ResolvedParams {
    pub k: u32,
    pub l: u32,
    pub p: u32,
    pub main_mult: u32,
    pub clause_mult: u32,
    /// Multiplicity of unbreakable edges: the vertex count of the instance.
    pub cap: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Gadget {
    pub u: VertexId,
    pub v: VertexId,
    pub nu: VertexId,
    pub nv: VertexId,
    /// Middle of the derivation path `nu - w - v`.
    pub w: VertexId,
    /// Middle of the derivation path `u - nw - nv`.
    pub nw: VertexId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CycleInfo {
    pub var: usize,
    pub entry: VertexId,
    pub exit: VertexId,
    /// Interior of the side through `t`, from entry to exit.
    pub true_side: Vec<VertexId>,
    pub false_side: Vec<VertexId>,
    pub t: VertexId,
    pub f: VertexId,
    pub gadget: Option<Gadget>,
}

impl CycleInfo {
    pub fn side(&self, value: bool) -> &[VertexId] {
        if value {
            &self.true_side
        } else {
            &self.false_side
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClauseInfo {
    pub vertex: VertexId,
    pub exit: VertexId,
    /// One path per literal, from its `t`/`f` vertex to the clause vertex.
    pub paths: Vec<Vec<VertexId>>,
}

/// A generated instance together with the roles of its vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct SatReduction {
    pub instance: Instance,
    pub params: ResolvedParams,
    pub matrix: CnfFormula,
    /// Quantifier of each variable, index 0 for x1.
    pub universal: Vec<bool>,
    pub cycles: Vec<CycleInfo>,
    pub clauses: Vec<ClauseInfo>,
    pub r: VertexId,
    pub main_exit: VertexId,
}

pub fn sat_to_nemesis(f: &CnfFormula, params: &ReductionParams) -> Result<SatReduction, ReductionError> {
    build(f, &vec![false; f.num_vars], params)
}

pub fn qsat_to_nemesis(q: &Qbf, params: &ReductionParams) -> Result<SatReduction, ReductionError> {
    let universal: Vec<bool> = (1..=q.matrix.num_vars).map(|v| q.is_universal(v)).collect();
    build(&q.matrix, &universal, params)
}

fn resolve(f: &CnfFormula, gadgets: bool, p: &ReductionParams) -> Result<(u32, u32, u32), ReductionError> {
    let m = f.num_clauses() as u32;
    let n = f.num_vars as u32;
    if n == 0 {
        return Err(ReductionError::Formula("no variables".into()));
    }
    let min_k = m + 1 + if gadgets { GADGET_BUMP } else { 0 };
    let k = p.k.unwrap_or(min_k);
    if k < min_k {
        return Err(ReductionError::Params(format!("K = {k} must be at least {min_k}")));
    }
    let path = 2 * n * k;
    let l = p.l.unwrap_or(path + 1);
    if l <= path {
        return Err(ReductionError::Params(format!("L = {l} must exceed the path length {path}")));
    }
    Ok((k, path, l))
}

fn join(i: usize, n: usize) -> VertexId {
    match i {
        0 => id("s"),
        i if i == n => id("r"),
        i => id(format!("j{i}")),
    }
}

fn side_vertex(i: usize, value: bool, k: u32, pos: u32, gadget: bool) -> VertexId {
    let neg = if value { "" } else { "~" };
    match pos {
        p if p == k => id(if value { format!("t{i}") } else { format!("f{i}") }),
        1 if gadget => id(format!("{neg}u{i}")),
        2 if gadget => id(format!("{neg}v{i}")),
        p => id(format!("{}{i}_{p}", if value { "a" } else { "b" })),
    }
}

fn build(f: &CnfFormula, universal: &[bool], p: &ReductionParams) -> Result<SatReduction, ReductionError> {
    let gadgets = universal.iter().any(|&u| u);
    let (k, path, l) = resolve(f, gadgets, p)?;
    let n = f.num_vars;
    let m = f.num_clauses() as u32;
    let main_mult = path - m + 1;
    let clause_mult = l + 1;

    let mut g = MultiGraph::new();
    let mut layout: BTreeMap<VertexId, [f64; 2]> = BTreeMap::new();
    // Edges whose multiplicity is fixed; everything else becomes unbreakable.
    let mut fixed: Vec<(VertexId, VertexId, u32)> = Vec::new();
    let mut solid: Vec<(VertexId, VertexId)> = Vec::new();
    let add = |g: &mut MultiGraph, layout: &mut BTreeMap<VertexId, [f64; 2]>, v: &VertexId, at: [f64; 2]| {
        g.add_vertex(v.clone(), VertexKind::Regular).unwrap();
        layout.insert(v.clone(), at);
    };

    let width = 2.0 * k as f64;
    for i in 0..=n {
        add(&mut g, &mut layout, &join(i, n), [i as f64 * width, 0.0]);
    }
    let mut cycles = Vec::new();
    for i in 1..=n {
        let gadget = universal[i - 1];
        let (entry, exit) = (join(i - 1, n), join(i, n));
        let x0 = (i - 1) as f64 * width;
        let mut sides = [Vec::new(), Vec::new()];
        for (slot, value) in [(0, true), (1, false)] {
            let y = if value { -1.0 } else { 1.0 };
            let mut prev = entry.clone();
            for pos in 1..2 * k {
                let v = side_vertex(i, value, k, pos, gadget);
                let lift = (pos.min(2 * k - pos) as f64).min(3.0) / 3.0 * 2.0;
                add(&mut g, &mut layout, &v, [x0 + pos as f64, y * lift]);
                if gadget && pos == 2 {
                    fixed.push((prev.clone(), v.clone(), 1));
                } else {
                    solid.push((prev.clone(), v.clone()));
                }
                sides[slot].push(v.clone());
                prev = v;
            }
            solid.push((prev, exit.clone()));
        }
        let gadget_info = gadget.then(|| {
            let [ts, fs] = &sides;
            let (u, v, nu, nv) = (ts[0].clone(), ts[1].clone(), fs[0].clone(), fs[1].clone());
            let (w, nw) = (id(format!("w{i}")), id(format!("~w{i}")));
            add(&mut g, &mut layout, &w, [x0 + 1.5, -0.4]);
            add(&mut g, &mut layout, &nw, [x0 + 1.5, 0.4]);
            solid.extend([
                (nu.clone(), w.clone()),
                (w.clone(), v.clone()),
                (u.clone(), nw.clone()),
                (nw.clone(), nv.clone()),
            ]);
            Gadget { u, v, nu, nv, w, nw }
        });
        let [true_side, false_side] = sides;
        cycles.push(CycleInfo {
            var: i,
            entry,
            exit,
            t: true_side[k as usize - 1].clone(),
            f: false_side[k as usize - 1].clone(),
            true_side,
            false_side,
            gadget: gadget_info,
        });
    }

    let r = join(n, n);
    let main_exit = id("exit");
    g.add_vertex(main_exit.clone(), VertexKind::Exit)?;
    layout.insert(main_exit.clone(), [n as f64 * width + 1.5, 0.0]);
    fixed.push((r.clone(), main_exit.clone(), main_mult));

    let total_width = n as f64 * width;
    let mut clauses = Vec::new();
    for (h, clause) in f.clauses.iter().enumerate() {
        let h = h + 1;
        let c = id(format!("c{h}"));
        let x = id(format!("exit_c{h}"));
        let cy = 3.0 + 1.5 * h as f64;
        let cx = total_width * h as f64 / (m as f64 + 1.0);
        add(&mut g, &mut layout, &c, [cx, cy]);
        g.add_vertex(x.clone(), VertexKind::Exit)?;
        layout.insert(x.clone(), [cx, cy + 1.0]);
        fixed.push((c.clone(), x.clone(), clause_mult));
        let mut paths = Vec::new();
        for (q, lit) in clause.iter().enumerate() {
            let cyc = &cycles[lit.var - 1];
            let from = if lit.positive { cyc.t.clone() } else { cyc.f.clone() };
            let a = layout[&from];
            let mut walk = vec![from.clone()];
            let mut prev = from;
            for step in 1..l {
                let v = id(format!("p{h}_{}_{step}", q + 1));
                let t = step as f64 / l as f64;
                add(&mut g, &mut layout, &v, [a[0] + (cx - a[0]) * t, a[1] + (cy - a[1]) * t]);
                solid.push((prev, v.clone()));
                walk.push(v.clone());
                prev = v;
            }
            solid.push((prev, c.clone()));
            walk.push(c.clone());
            paths.push(walk);
        }
        clauses.push(ClauseInfo { vertex: c, exit: x, paths });
    }

    let cap = g.vertex_count() as u32;
    for (u, v, mult) in fixed {
        g.add_edge(u, v, mult)?;
    }
    for (u, v) in solid {
        g.add_edge(u, v, cap)?;
    }
    let mut instance = Instance::new(g, join(0, n), Variant::Nemesis);
    instance.layout = Some(layout);
    Ok(SatReduction {
        instance,
        params: ResolvedParams {
            k,
            l,
            p: path,
            main_mult,
            clause_mult,
            cap,
        },
        matrix: f.clone(),
        universal: universal.to_vec(),
        cycles,
        clauses,
        r,
        main_exit,
    })
}

fn bfs(g: &MultiGraph, from: &VertexId, allowed: &dyn Fn(&VertexId) -> bool) -> BTreeMap<VertexId, usize> {
    let mut dist = BTreeMap::new();
    dist.insert(from.clone(), 0);
    let mut queue = VecDeque::from([from.clone()]);
    while let Some(x) = queue.pop_front() {
        let d = dist[&x];
        for (y, _) in g.neighbors(&x) {
            if allowed(y) && !dist.contains_key(y) {
                dist.insert(y.clone(), d + 1);
                queue.push_back(y.clone());
            }
        }
    }
    dist
}

/// Re-derives every structural claim of a SAT/QSAT instance from its graph.
pub fn check_sat_instance(red: &SatReduction) -> Result<(), Vec<String>> {
    let g = &red.instance.graph;
    let f = &red.matrix;
    let prm = red.params;
    let mut errors = Vec::new();
    let cap = g.vertex_count() as u32;
    let m = f.num_clauses() as u32;
    let n = f.num_vars;
    if prm.cap != cap {
        errors.push(format!("cap {} differs from vertex count {cap}", prm.cap));
    }
    if prm.l <= prm.p {
        errors.push("L must exceed P".into());
    }
    if g.exits().count() != f.num_clauses() + 1 {
        errors.push(format!("expected {} exits, found {}", f.num_clauses() + 1, g.exits().count()));
    }

    // Direct paths: restrict to cycle interiors and joins.
    let on_cycle: std::collections::BTreeSet<VertexId> = red
        .cycles
        .iter()
        .flat_map(|c| c.true_side.iter().chain(&c.false_side).chain([&c.entry, &c.exit]))
        .cloned()
        .collect();
    let within = |v: &VertexId| on_cycle.contains(v);
    let ds = bfs(g, &red.instance.start, &within);
    let dr = bfs(g, &red.r, &within);
    let p = ds.get(&red.r).copied().unwrap_or(usize::MAX);
    if p != prm.p as usize {
        errors.push(format!("s-r distance {p} differs from P = {}", prm.p));
    }
    for v in &on_cycle {
        let through = ds.get(v).zip(dr.get(v)).map(|(a, b)| a + b);
        if through != Some(p) {
            errors.push(format!("{v} does not lie on a direct s-r path of length P"));
        }
        let inner = g.neighbors(v).filter(|(y, _)| within(y)).count();
        let is_join = red.cycles.iter().any(|c| &c.entry == v || &c.exit == v);
        if !is_join && inner != 2 {
            errors.push(format!("cycle vertex {v} has {inner} cycle neighbors"));
        }
    }
    for c in &red.cycles {
        if c.true_side.len() != 2 * prm.k as usize - 1 || c.false_side.len() != 2 * prm.k as usize - 1 {
            errors.push(format!("cycle {} does not have length 4K", c.var));
        }
        let k = prm.k as usize;
        if c.true_side.get(k - 1) != Some(&c.t) || c.false_side.get(k - 1) != Some(&c.f) {
            errors.push(format!("t/f of cycle {} not at distance K from the entry", c.var));
        }
    }

    let mult_main = g.multiplicity(&red.r, &red.main_exit);
    if mult_main != prm.p - m + 1 || g.degree(&red.main_exit) != mult_main {
        errors.push(format!("main exit multiplicity {mult_main}, expected {}", prm.p - m + 1));
    }

    let mut special: Vec<(VertexId, VertexId)> = vec![(red.r.clone(), red.main_exit.clone())];
    for (h, (cl, info)) in f.clauses.iter().zip(&red.clauses).enumerate() {
        if g.multiplicity(&info.vertex, &info.exit) != prm.l + 1 || g.degree(&info.exit) != prm.l + 1 {
            errors.push(format!("clause {} exit multiplicity is not L+1", h + 1));
        }
        special.push((info.vertex.clone(), info.exit.clone()));
        if info.paths.len() != cl.len() {
            errors.push(format!("clause {} has {} paths for {} literals", h + 1, info.paths.len(), cl.len()));
        }
        for (lit, walk) in cl.iter().zip(&info.paths) {
            let cyc = &red.cycles[lit.var - 1];
            let want = if lit.positive { &cyc.t } else { &cyc.f };
            if walk.first() != Some(want) || walk.last() != Some(&info.vertex) {
                errors.push(format!("clause {} path for {lit} has wrong endpoints", h + 1));
            }
            if walk.len() != prm.l as usize + 1 {
                errors.push(format!("clause {} path for {lit} has length {}", h + 1, walk.len() - 1));
            }
            for pair in walk.windows(2) {
                if g.multiplicity(&pair[0], &pair[1]) != cap {
                    errors.push(format!("clause path edge {}-{} is not unbreakable", pair[0], pair[1]));
                }
            }
            for v in &walk[1..walk.len() - 1] {
                if g.degree(v) != 2 * cap {
                    errors.push(format!("clause path vertex {v} has extra edges"));
                }
            }
        }
    }

    for (i, c) in red.cycles.iter().enumerate() {
        match (&c.gadget, red.universal[i]) {
            (Some(gd), true) => {
                for (a, b) in [(&gd.u, &gd.v), (&gd.nu, &gd.nv)] {
                    if g.multiplicity(a, b) != 1 {
                        errors.push(format!("fuse {a}-{b} does not have multiplicity 1"));
                    }
                    special.push((a.clone(), b.clone()));
                }
                if c.true_side.get(1) != Some(&gd.v) || c.false_side[0] != gd.nu || c.false_side.get(1) != Some(&gd.nv) {
                    errors.push(format!("fuses of cycle {} not after the first edge", c.var));
                }
                for (a, mid, b) in [(&gd.nu, &gd.w, &gd.v), (&gd.u, &gd.nw, &gd.nv)] {
                    let ok = g.multiplicity(a, mid) == cap && g.multiplicity(mid, b) == cap && g.degree(mid) == 2 * cap;
                    if !ok {
                        errors.push(format!("derivation path {a}-{mid}-{b} malformed"));
                    }
                }
            }
            (None, false) => {}
            _ => errors.push(format!("cycle {} gadget does not match its quantifier", c.var)),
        }
    }

    let fuses = g.edges().filter(|(_, _, m)| *m == 1).count();
    let expected_fuses = 2 * red.universal.iter().filter(|&&u| u).count();
    if fuses != expected_fuses {
        errors.push(format!("found {fuses} multiplicity-1 edges, expected {expected_fuses} fuses"));
    }
    for (u, v, mult) in g.edges() {
        let listed = special.iter().any(|(a, b)| (a == u && b == v) || (a == v && b == u));
        if !listed && mult != cap {
            errors.push(format!("edge {u}-{v} has multiplicity {mult}, expected the cap {cap}"));
        }
    }

    if n > 0 && m > 0 && (g.vertex_count() as u64) > 100 * (n as u64 * m as u64).pow(2) {
        errors.push(format!("instance size {} exceeds 100 n^2 m^2", g.vertex_count()));
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

/// Value of the quantified formula once variables before `var` are fixed.
fn prefix_wins(f: &CnfFormula, universal: &[bool], a: &mut Vec<bool>, var: usize) -> bool {
    if var > f.num_vars {
        return f.eval(a);
    }
    let branch = |b: bool, a: &mut Vec<bool>| {
        a[var - 1] = b;
        prefix_wins(f, universal, a, var + 1)
    };
    if universal[var - 1] {
        branch(true, a) && branch(false, a)
    } else {
        branch(true, a) || branch(false, a)
    }
}

/// Board indices of the reduction's landmarks.
struct Plan {
    universal: Vec<bool>,
    matrix: CnfFormula,
    cycles: Vec<PlanCycle>,
    /// Join vertex to the cycle it enters.
    entry_of: FxHashMap<usize, usize>,
    /// Side vertex to (cycle, value, index along the side).
    on_side: FxHashMap<usize, (usize, bool, usize)>,
    /// Derivation middle to the vertex it leads to.
    detour: FxHashMap<usize, usize>,
    r: usize,
}

struct PlanCycle {
    exit: usize,
    sides: [Vec<usize>; 2],
    t: usize,
    gadget: Option<PlanGadget>,
}

struct PlanGadget {
    u: usize,
    nu: usize,
    w: usize,
    nw: usize,
    fuse_true: usize,
    fuse_false: usize,
}

impl Plan {
    fn new(red: &SatReduction) -> Plan {
        let b = Board::new(&red.instance);
        let ix = |v: &VertexId| b.vertex(v.as_str()).expect("reduction vertex on board");
        let mut entry_of = FxHashMap::default();
        let mut on_side = FxHashMap::default();
        let mut detour = FxHashMap::default();
        let cycles = red
            .cycles
            .iter()
            .enumerate()
            .map(|(ci, c)| {
                entry_of.insert(ix(&c.entry), ci);
                let sides = [
                    c.true_side.iter().map(ix).collect::<Vec<_>>(),
                    c.false_side.iter().map(ix).collect::<Vec<_>>(),
                ];
                for (value, side) in [(true, &sides[0]), (false, &sides[1])] {
                    for (k, &v) in side.iter().enumerate() {
                        on_side.insert(v, (ci, value, k));
                    }
                }
                let gadget = c.gadget.as_ref().map(|gd| {
                    detour.insert(ix(&gd.w), ix(&gd.v));
                    detour.insert(ix(&gd.nw), ix(&gd.nv));
                    PlanGadget {
                        u: ix(&gd.u),
                        nu: ix(&gd.nu),
                        w: ix(&gd.w),
                        nw: ix(&gd.nw),
                        fuse_true: b.edge(ix(&gd.u), ix(&gd.v)).unwrap(),
                        fuse_false: b.edge(ix(&gd.nu), ix(&gd.nv)).unwrap(),
                    }
                });
                PlanCycle {
                    exit: ix(&c.exit),
                    t: ix(&c.t),
                    sides,
                    gadget,
                }
            })
            .collect();
        Plan {
            universal: red.universal.clone(),
            matrix: red.matrix.clone(),
            cycles,
            entry_of,
            on_side,
            detour,
            r: ix(&red.r),
        }
    }

    /// Values of variables before cycle `ci`, read off the visited `t` vertices.
    fn assignment(&self, state: &GameState, ci: usize) -> Vec<bool> {
        let mut a = vec![false; self.matrix.num_vars];
        for (j, c) in self.cycles.iter().enumerate().take(ci) {
            a[j] = state.visited[c.t];
        }
        a
    }

    /// Whether fixing variable `ci + 1` to `value` keeps the formula true.
    fn good(&self, state: &GameState, ci: usize, value: bool) -> bool {
        let mut a = self.assignment(state, ci);
        a[ci] = value;
        prefix_wins(&self.matrix, &self.universal, &mut a, ci + 2)
    }

    fn edge_live(state: &GameState, a: usize, b: usize) -> bool {
        state.board.edge(a, b).is_some_and(|e| state.remaining[e] > 0)
    }
}

/// First step toward an exit edge the adversary can no longer cut in time:
/// one whose remaining copies exceed the distance to its inner endpoint
/// along unvisited vertices.
fn threat(state: &GameState) -> Option<usize> {
    let b = &state.board;
    let pos = state.position;
    let mut dist = vec![u32::MAX; b.n()];
    let mut parent = vec![usize::MAX; b.n()];
    dist[pos] = 0;
    let mut queue = VecDeque::from([pos]);
    let mut best: Option<(u32, usize, usize)> = None;
    while let Some(x) = queue.pop_front() {
        for &(y, e) in &b.adj[x] {
            if state.remaining[e] == 0 {
                continue;
            }
            if b.exit[y] {
                if state.remaining[e] > dist[x] && best.map_or(true, |(d, be, _)| (dist[x], e) < (d, be)) {
                    best = Some((dist[x], e, x));
                }
            } else if !state.visited[y] && dist[y] == u32::MAX {
                dist[y] = dist[x] + 1;
                parent[y] = x;
                queue.push_back(y);
            }
        }
    }
    let (_, e, mut inner) = best?;
    if inner == pos {
        return Some(b.other(e, pos));
    }
    while parent[inner] != pos {
        inner = parent[inner];
    }
    Some(inner)
}

/// Fugitive that walks the cycles along a winning assignment, letting the
/// adversary pick universal sides through the fuses, and runs for any exit
/// the adversary has left uncovered.
pub struct AssignmentFollower {
    plan: Plan,
}

impl AssignmentFollower {
    pub fn new(red: &SatReduction) -> AssignmentFollower {
        AssignmentFollower { plan: Plan::new(red) }
    }

    fn next(&self, state: &GameState) -> Option<usize> {
        let plan = &self.plan;
        let pos = state.position;
        if let Some(step) = threat(state) {
            return Some(step);
        }
        if pos == plan.r {
            return None;
        }
        if let Some(&ci) = plan.entry_of.get(&pos) {
            let value = plan.universal[ci] || plan.good(state, ci, true) || !plan.good(state, ci, false);
            return Some(plan.cycles[ci].sides[usize::from(!value)][0]);
        }
        if let Some(&to) = plan.detour.get(&pos) {
            return Some(to);
        }
        let &(ci, value, k) = plan.on_side.get(&pos)?;
        let c = &plan.cycles[ci];
        if let Some(gd) = &c.gadget {
            if pos == gd.u && state.remaining[gd.fuse_true] == 0 {
                return Some(gd.nw);
            }
            if pos == gd.nu && state.remaining[gd.fuse_false] == 0 {
                return Some(gd.w);
            }
        }
        let side = &c.sides[usize::from(!value)];
        Some(side.get(k + 1).copied().unwrap_or(c.exit))
    }
}

impl Strategy for AssignmentFollower {
    fn name(&self) -> String {
        "assignment-follower".into()
    }

    fn choose(&self, state: &GameState) -> Option<Action> {
        if state.phase != Phase::FugitiveToMove {
            return None;
        }
        let to = self.next(state)?;
        Plan::edge_live(state, state.position, to).then_some(Action::Step(to))
    }

    fn reads_round(&self) -> bool {
        false
    }

    fn reads_counts(&self) -> bool {
        false
    }
}

/// Adversary for reduction instances: sets universal variables against the
/// formula through the fuses, otherwise cuts the exit edge with the least
/// slack (distance plus one, minus remaining copies).
pub struct ReductionNemesis {
    plan: Plan,
}

impl ReductionNemesis {
    pub fn new(red: &SatReduction) -> ReductionNemesis {
        ReductionNemesis { plan: Plan::new(red) }
    }

    fn fuse_cut(&self, state: &GameState) -> Option<usize> {
        let pos = state.position;
        let &(ci, value, k) = self.plan.on_side.get(&pos)?;
        let gd = self.plan.cycles[ci].gadget.as_ref()?;
        if k != 0 || !self.plan.universal[ci] {
            return None;
        }
        let want = !self.plan.good(state, ci, true);
        let fuse = if pos == gd.u { gd.fuse_true } else { gd.fuse_false };
        (value != want && state.remaining[fuse] > 0).then_some(fuse)
    }
}

impl Strategy for ReductionNemesis {
    fn name(&self) -> String {
        "reduction-nemesis".into()
    }

    fn choose(&self, state: &GameState) -> Option<Action> {
        if state.phase != Phase::AdversaryToDelete {
            return None;
        }
        if let Some(e) = self.fuse_cut(state) {
            return Some(Action::Delete(e));
        }
        let b = &state.board;
        let dist = crate::strategy::distances(state, state.position);
        let urgent = (0..b.edge_count())
            .filter(|&e| state.remaining[e] > 0)
            .filter_map(|e| {
                let (u, v) = b.ends[e];
                let inner = match (b.exit[u], b.exit[v]) {
                    (false, true) => u,
                    (true, false) => v,
                    _ => return None,
                };
                let d = dist[inner];
                (d != u32::MAX).then(|| (d as i64 + 1 - state.remaining[e] as i64, e))
            })
            .min();
        match urgent {
            Some((_, e)) => Some(Action::Delete(e)),
            None => (0..b.edge_count())
                .find(|&e| state.deletable(e))
                .map(Action::Delete)
                .or(Some(Action::Pass)),
        }
    }

    fn reads_round(&self) -> bool {
        false
    }
}
