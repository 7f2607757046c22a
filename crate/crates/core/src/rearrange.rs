//! Rainbow walks of full length with few repeated vertices in Cayley
//! graphs, read back as orderings of the generating set with mostly
//! distinct partial products.
//!
//! The walk grows in stages. Each stage grows a reachable set `Z` from the
//! current end by repeatedly adding the colour with the most edges leaving
//! `Z`. If `Z` gets large the colours used form a joining set: a short
//! greedy path in fresh colours is translated to start somewhere in `Z`
//! with little overlap, and appended. If `Z` stalls it is dense in the
//! remaining colours, and a long path found there by the dense-digraph
//! pipeline finishes the walk. Whatever is left is completed greedily, and
//! the result is never worse than a pure greedy walk.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audit::Audit;
use crate::connector::long_path_dense_digraph;
use crate::graph::{Colour, ColouredDigraph, RainbowPath, RainbowWalk, Vertex};
use crate::greedy::{greedy_path_from, Restriction};
use crate::group::{
    cayley_graph, walk_to_rearrangement, CayleyGraph, GeneratorSet, GroupError, GroupTable, Rearrangement,
};
use crate::params::ParamSet;
use crate::rng::stage_seed;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RearrangeError {
    #[error("the generating set contains the identity; remove it first")]
    IdentityInS,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// Vertices reached from a root by the growth process, each with the step
/// that reached it. Walks to members are rainbow in the process colours.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReachSet {
    pub root: Vertex,
    pub members: Vec<Vertex>,
    /// Colours in the order they joined.
    pub colours: Vec<Colour>,
    /// Longest walk from the root to a member.
    pub depth: usize,
    via: Vec<Option<(Vertex, Colour)>>,
    seeded: Vec<bool>,
}

impl ReachSet {
    /// Rainbow walk from the root to member `x`.
    pub fn walk_to(&self, x: Vertex) -> RainbowWalk {
        let mut steps = Vec::new();
        let mut at = x;
        loop {
            let (prev, c) = self.via[at].expect("walk_to needs a member");
            steps.push((c, at));
            if self.seeded[at] {
                break;
            }
            at = prev;
        }
        let mut w = RainbowWalk::start_at(self.root);
        for &(c, v) in steps.iter().rev() {
            w.push(c, v);
        }
        w
    }

    pub fn contains(&self, x: Vertex) -> bool {
        self.via.get(x).is_some_and(|s| s.is_some())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expansion {
    /// At least `kd` vertices reached with few colours.
    Found(ReachSet),
    /// The process ran out of colours with many edges leaving the set;
    /// every other allowed colour has at most `γ'd` such edges.
    Stalled(ReachSet),
}

impl Expansion {
    pub fn reach(&self) -> &ReachSet {
        match self {
            Expansion::Found(r) | Expansion::Stalled(r) => r,
        }
    }
}

/// Growth settings in absolute numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthLimits {
    /// Out-neighbours taken at the start.
    pub seeds: usize,
    /// Reach at which the set counts as expanding.
    pub goal: usize,
    /// Edges leaving the set a colour needs in order to join.
    pub escape: f64,
}

impl GrowthLimits {
    pub fn from_params(d: usize, theta: f64, k: usize, gamma_prime: f64) -> Self {
        GrowthLimits {
            seeds: ((theta * d as f64 / 2.0).ceil() as usize).max(1),
            goal: k * d,
            escape: gamma_prime * d as f64,
        }
    }
}

/// Seeds `Z` with out-neighbours of `v` along `seed_colours`, then keeps
/// adding the colour in `grow_colours` with the most edges leaving `Z`
/// while that count is at least `escape`.
pub fn expanding_colour_set(
    g: &ColouredDigraph,
    v: Vertex,
    seed_colours: &[bool],
    grow_colours: &[bool],
    limits: GrowthLimits,
) -> Expansion {
    let n = g.n();
    let mut via: Vec<Option<(Vertex, Colour)>> = vec![None; n];
    let mut seeded = vec![false; n];
    let mut level = vec![0usize; n];
    let mut members = Vec::new();
    let mut colours = Vec::new();
    let mut in_c = vec![false; g.colour_count()];
    for &(c, w) in g.out_edges_by_colour(v) {
        if members.len() >= limits.seeds {
            break;
        }
        if seed_colours[c] && via[w].is_none() {
            via[w] = Some((v, c));
            seeded[w] = true;
            level[w] = 1;
            members.push(w);
            colours.push(c);
            in_c[c] = true;
        }
    }
    let done = |members: &Vec<Vertex>| members.len() >= limits.goal.min(n);
    while !done(&members) {
        // Best colour by edges leaving the set, lowest id on ties.
        let best = (0..g.colour_count())
            .filter(|&c| grow_colours[c] && !in_c[c])
            .map(|c| {
                let out = members.iter().filter(|&&z| g.out_neighbour(z, c).is_some_and(|w| via[w].is_none())).count();
                (c, out)
            })
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)));
        let Some((c, out)) = best else { break };
        if out == 0 || (out as f64) < limits.escape - 1e-9 {
            break;
        }
        in_c[c] = true;
        colours.push(c);
        let frontier: Vec<(Vertex, Vertex)> = members
            .iter()
            .filter_map(|&z| g.out_neighbour(z, c).filter(|&w| via[w].is_none()).map(|w| (z, w)))
            .collect();
        for (z, w) in frontier {
            if via[w].is_none() {
                via[w] = Some((z, c));
                level[w] = level[z] + 1;
                members.push(w);
            }
        }
    }
    let depth = members.iter().map(|&z| level[z]).max().unwrap_or(0);
    let found = done(&members) && !members.is_empty() && limits.goal <= n;
    let reach = ReachSet { root: v, members, colours, depth, via, seeded };
    if found {
        Expansion::Found(reach)
    } else {
        Expansion::Stalled(reach)
    }
}

/// Left translate `x·w⁻¹·Q` of `q` (starting at `w`) for the `x` in
/// `candidates` whose translate meets `occupied` least. Returns `x` and the
/// overlap; lowest `x` wins ties.
pub fn pick_translate(
    group: &GroupTable,
    candidates: &[Vertex],
    q: &RainbowPath,
    occupied: &[bool],
) -> Option<(Vertex, usize)> {
    let w_inv = group.inv(q.start());
    let shape: Vec<usize> = q.vertices.iter().map(|&u| group.mul(w_inv, u)).collect();
    candidates
        .par_iter()
        .map(|&x| (x, shape.iter().filter(|&&u| occupied[group.mul(x, u)]).count()))
        .min_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)))
}

fn translate(group: &GroupTable, x: Vertex, q: &RainbowPath) -> RainbowPath {
    let w_inv = group.inv(q.start());
    RainbowPath {
        vertices: q.vertices.iter().map(|&u| group.mul(x, group.mul(w_inv, u))).collect(),
        colours: q.colours.clone(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageKind {
    Expanding,
    Dense,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub kind: StageKind,
    /// Colours on the walk after the stage.
    pub colours_after: usize,
    pub join_len: usize,
    pub piece_len: usize,
    pub overlap: usize,
    /// Overlap the counting argument promises, when it applies.
    pub overlap_cap: f64,
    pub reach: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WalkSource {
    Stages,
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RearrangeRun {
    pub walk: RainbowWalk,
    pub rearrangement: Rearrangement,
    pub repetition_count: usize,
    pub source: WalkSource,
    pub stages: Vec<StageRecord>,
    /// Repetitions of the staged walk after greedy completion.
    pub staged_repetitions: usize,
    pub greedy_repetitions: usize,
    /// `⌊d/2⌋`.
    pub hard_cap: usize,
    /// `εd`.
    pub soft_target: f64,
    pub audit: Audit,
}

/// Extends `walk` by every colour not yet used, preferring at each step the
/// lowest colour that reaches an unvisited vertex.
pub fn greedy_complete(g: &ColouredDigraph, walk: &mut RainbowWalk) {
    let mut used = vec![false; g.colour_count()];
    for &c in &walk.colours {
        used[c] = true;
    }
    let mut seen = vec![false; g.n()];
    for &v in &walk.vertices {
        seen[v] = true;
    }
    while walk.len() < g.colour_count() {
        let v = walk.end();
        let step = g
            .out_edges_by_colour(v)
            .iter()
            .find(|&&(c, w)| !used[c] && !seen[w])
            .or_else(|| g.out_edges_by_colour(v).iter().find(|&&(c, _)| !used[c]));
        let Some(&(c, w)) = step else { break };
        used[c] = true;
        seen[w] = true;
        walk.push(c, w);
    }
}

/// Pure greedy walk from the identity; at most `⌊d/2⌋` repetitions.
pub fn greedy_walk(group: &GroupTable, g: &ColouredDigraph) -> RainbowWalk {
    let mut w = RainbowWalk::start_at(group.identity());
    greedy_complete(g, &mut w);
    w
}

fn append(walk: &mut RainbowWalk, tail: &RainbowWalk) {
    assert_eq!(walk.end(), tail.vertices[0], "appended piece must start at the walk end");
    for (&c, &v) in tail.colours.iter().zip(&tail.vertices[1..]) {
        walk.push(c, v);
    }
}

fn assert_disjoint(k: usize, sets: &[&[Colour]]) {
    let mut seen = vec![false; k];
    for s in sets {
        for &c in *s {
            assert!(!std::mem::replace(&mut seen[c], true), "colour {c} would be used twice");
        }
    }
}

/// Checks the walk against the group: vertex `t` is the start times the
/// `t`-th partial product of the colour sequence.
pub fn check_walk_products(group: &GroupTable, cay: &CayleyGraph, walk: &RainbowWalk) -> bool {
    let seq: Vec<usize> = walk.colours.iter().map(|&c| cay.element_of(c)).collect();
    let start = walk.vertices[0];
    group.prefix_products(&seq).iter().zip(&walk.vertices[1..]).all(|(&p, &v)| group.mul(start, p) == v)
}

struct Stage {
    before: RainbowWalk,
    join: Vec<Colour>,
    reach: ReachSet,
}

/// Full-length rainbow walk in `Cay(Γ, S)` and the ordering of `S` it
/// spells. Never fails once the inputs are valid: internal shortfalls are
/// audited and the greedy walk is used when it is better.
pub fn rearrangement_walk(
    group: &GroupTable,
    s: &GeneratorSet,
    params: &ParamSet,
    seed: u64,
) -> Result<RearrangeRun, RearrangeError> {
    if s.contains_identity(group) {
        return Err(RearrangeError::IdentityInS);
    }
    let eps = params.eps;
    let theta = params.theta();
    let delta = params.delta();
    let gamma_prime = params.gamma_prime();
    if !(eps > 0.0 && eps < 1.0) {
        return Err(RearrangeError::InvalidParameter(format!("eps must lie in (0,1), got {eps}")));
    }
    if theta <= 0.0 || delta <= 0.0 || gamma_prime < 0.0 || params.k == 0 {
        return Err(RearrangeError::InvalidParameter("theta, delta and k must be positive".into()));
    }
    let cay = cayley_graph(group, s)?;
    let g = &cay.graph;
    let d = s.len();
    let k = g.colour_count();
    let mut audit = Audit::default();
    let step = (delta * d as f64).ceil() as usize;
    if theta * d as f64 <= 2.0 {
        audit.unmet("preflight", format!("θd = {:.2} is not above 2", theta * d as f64));
    }
    let spare = (eps / 2.0 - theta) * d as f64;
    if spare < 2.0 * step as f64 {
        audit.unmet("preflight", format!("εd/2 - θd = {spare:.2} is below 2⌈δd⌉ = {}", 2 * step));
    }
    let limits = GrowthLimits::from_params(d, theta, params.k, gamma_prime);
    if limits.goal > group.order() {
        audit.note(
            "preflight",
            format!("kd = {} exceeds |Γ| = {}; only the dense stage can apply", limits.goal, group.order()),
        );
    }
    let goal_colours = ((1.0 - eps / 2.0) * d as f64).ceil() as usize;

    let mut walk = RainbowWalk::start_at(group.identity());
    let mut stages: Vec<Stage> = Vec::new();
    let mut records = Vec::new();
    let mut dense_walk: Option<RainbowWalk> = None;
    let max_stages = (1.0 / delta).ceil() as usize + 1;
    for i in 1..=max_stages {
        if walk.len() >= goal_colours {
            break;
        }
        let mut used = vec![false; k];
        for &c in &walk.colours {
            used[c] = true;
        }
        let grow: Vec<bool> = used.iter().map(|&u| !u).collect();
        let mut seed_cols = grow.clone();
        if let Some(prev) = stages.last() {
            for &c in &prev.join {
                seed_cols[c] = false;
            }
        }
        match expanding_colour_set(g, walk.end(), &seed_cols, &grow, limits) {
            Expansion::Found(reach) => {
                let join = reach.colours.clone();
                let mut fresh = grow.clone();
                for &c in &join {
                    fresh[c] = false;
                }
                let q = greedy_path_from(g, group.identity(), Restriction { colours: Some(&fresh), vertices: None })
                    .truncated(step);
                if q.colours.is_empty() {
                    audit.fallback(&format!("stage-{i}"), "no fresh colour left for the stage path");
                    break;
                }
                if q.len() < step {
                    audit.note(&format!("stage-{i}"), format!("stage path has length {} < ⌈δd⌉ = {step}", q.len()));
                }
                let mut occupied = vec![false; g.n()];
                for &v in &walk.vertices {
                    occupied[v] = true;
                }
                let (x, overlap) = pick_translate(group, &reach.members, &q, &occupied).expect("reach set is nonempty");
                let join_walk = reach.walk_to(x);
                let piece = translate(group, x, &q);
                assert_disjoint(k, &[&walk.colours, &join_walk.colours, &piece.colours]);
                let before = walk.clone();
                append(&mut walk, &join_walk);
                append(&mut walk, &RainbowWalk::from(piece));
                assert!(check_walk_products(group, &cay, &walk));
                records.push(StageRecord {
                    kind: StageKind::Expanding,
                    colours_after: walk.len(),
                    join_len: join_walk.len(),
                    piece_len: q.len(),
                    overlap,
                    overlap_cap: 2.0 * delta * d as f64 / params.k as f64,
                    reach: reach.members.len(),
                });
                stages.push(Stage { before, join, reach });
            }
            Expansion::Stalled(reach) => {
                let dense = dense_stage(group, &cay, &walk, &stages, &reach, &seed_cols, params, seed, i, &mut audit);
                if let Some((w, rec)) = dense {
                    records.push(rec);
                    dense_walk = Some(w);
                }
                break;
            }
        }
    }
    let mut staged = dense_walk.unwrap_or(walk);
    if staged.len() < goal_colours {
        audit.note("stages", format!("staged walk covers {} of the {goal_colours} colours aimed for", staged.len()));
    }
    greedy_complete(g, &mut staged);
    assert_eq!(staged.len(), d, "greedy completion uses every colour");
    assert!(check_walk_products(group, &cay, &staged));
    let greedy = greedy_walk(group, g);
    let staged_repetitions = staged.repetition_count();
    let greedy_repetitions = greedy.repetition_count();
    let (walk, source) = if staged_repetitions <= greedy_repetitions {
        (staged, WalkSource::Stages)
    } else {
        audit.fallback(
            "result",
            format!("greedy walk has {greedy_repetitions} repetitions, staged walk {staged_repetitions}"),
        );
        (greedy, WalkSource::Greedy)
    };
    let repetition_count = walk.repetition_count();
    let hard_cap = d / 2;
    assert!(repetition_count <= hard_cap, "greedy floor guarantees at most ⌊d/2⌋ repetitions");
    let soft_target = eps * d as f64;
    if repetition_count as f64 > soft_target {
        audit.note("result", format!("{repetition_count} repetitions exceed εd = {soft_target:.1}"));
    }
    let rearrangement = walk_to_rearrangement(group, &cay, &walk)?;
    debug_assert!(rearrangement.distinct_prefix_count + repetition_count >= d);
    Ok(RearrangeRun {
        walk,
        rearrangement,
        repetition_count,
        source,
        stages: records,
        staged_repetitions,
        greedy_repetitions,
        hard_cap,
        soft_target,
        audit,
    })
}

/// The stalled case: a long path in the dense part of the stalled set,
/// translated behind the walk from two stages back (or standing alone at
/// the first stage).
#[allow(clippy::too_many_arguments)]
fn dense_stage(
    group: &GroupTable,
    cay: &CayleyGraph,
    walk: &RainbowWalk,
    stages: &[Stage],
    reach: &ReachSet,
    allowed: &[bool],
    params: &ParamSet,
    seed: u64,
    i: usize,
    audit: &mut Audit,
) -> Option<(RainbowWalk, StageRecord)> {
    let g = &cay.graph;
    let k = g.colour_count();
    let d = k;
    let tag = format!("stage-{i}/dense");
    // Dense colours: allowed minus the process colours.
    let mut dense_c = allowed.to_vec();
    for &c in &reach.colours {
        dense_c[c] = false;
    }
    let c_count = dense_c.iter().filter(|&&b| b).count();
    let mut in_z = vec![false; g.n()];
    for &z in &reach.members {
        in_z[z] = true;
    }
    let r = params.gamma_prime().sqrt() * d as f64;
    let floor = c_count as f64 - r;
    let keep: Vec<bool> = (0..g.n())
        .map(|v| {
            in_z[v]
                && g.out_degree_into(v, &in_z, &dense_c) as f64 >= floor
                && g.in_degree_from(v, &in_z, &dense_c) as f64 >= floor
        })
        .collect();
    let sub = g.induced_subgraph(&keep, &dense_c);
    let n1 = sub.graph.n();
    if n1 < 2 {
        audit.fallback(&tag, format!("dense part has {n1} vertices"));
        return None;
    }
    let semi = sub.graph.min_semidegree();
    let alpha = params.alpha.unwrap_or(params.eps / (8.0 * params.k as f64));
    if (semi as f64) < alpha * n1 as f64 {
        audit.fallback(&tag, format!("minimum semidegree {semi} is below αn' = {:.1}", alpha * n1 as f64));
        return None;
    }
    let inner = ParamSet { eps: params.eps / 4.0, ..params.clone() };
    let run = match long_path_dense_digraph(&sub.graph, &inner, stage_seed(seed, &tag)) {
        Ok(run) => run,
        Err(e) => {
            audit.fallback(&tag, e.to_string());
            return None;
        }
    };
    audit.absorb(&tag, run.audit.clone());
    let q = sub.path_to_parent(&run.path);
    if q.is_empty() {
        return None;
    }
    let record = |overlap: usize, cap: f64, join_len: usize, after: usize| StageRecord {
        kind: StageKind::Dense,
        colours_after: after,
        join_len,
        piece_len: q.len(),
        overlap,
        overlap_cap: cap,
        reach: reach.members.len(),
    };
    match stages.last() {
        None => {
            let w = RainbowWalk::from(q.clone());
            let rec = record(0, 0.0, 0, w.len());
            Some((w, rec))
        }
        Some(prev) => {
            let mut occupied = vec![false; g.n()];
            for &v in &prev.before.vertices {
                occupied[v] = true;
            }
            let (x, overlap) = pick_translate(group, &prev.reach.members, &q, &occupied)?;
            let join_walk = prev.reach.walk_to(x);
            let piece = translate(group, x, &q);
            assert_disjoint(k, &[&prev.before.colours, &join_walk.colours, &piece.colours]);
            let mut w = prev.before.clone();
            append(&mut w, &join_walk);
            append(&mut w, &RainbowWalk::from(piece));
            assert!(check_walk_products(group, cay, &w));
            if w.len() <= walk.len() {
                audit.fallback(
                    &tag,
                    format!("dense walk has {} colours, no more than the {} already placed", w.len(), walk.len()),
                );
                return None;
            }
            let rec = record(overlap, params.eps * d as f64 / 4.0, join_walk.len(), w.len());
            Some((w, rec))
        }
    }
}
