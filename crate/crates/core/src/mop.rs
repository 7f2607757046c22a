//! Mops: a rainbow handle plus many short strands fanning out from its
//! end. Growing the strands one step at a time multiplies the number of
//! ends while the ends leak edges outward; appending a strand to the
//! handle then restarts the fan from a longer handle. A mop whose ends do
//! not leak marks a dense region, which the undirected pipeline exploits
//! with the dense-digraph machinery.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audit::Audit;
use crate::connector::{connect_pair, sample_reservoir, Exclusions};
use crate::dense_core::{pass_to_expander, PassConfig};
use crate::forest::{grow_switching_forest, iterated_path_forest};
use crate::graph::{validate_rainbow, ColouredDigraph, PathForest, RainbowPath, Vertex};
use crate::greedy::{greedy_min_outdeg_path, StartPolicy};
use crate::params::ParamSet;
use crate::rng::stage_seed;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MopError {
    #[error("graph must be symmetric (an undirected graph)")]
    NotSymmetric,
    #[error("invalid mop: {0}")]
    InvalidMop(String),
    #[error("mop is not leaky: {0:?}")]
    NotLeaky(LeakyVerdict),
    #[error("end {vertex} has {degree} edges into the bad set, cap {cap}")]
    BadDegreeCapViolated { vertex: Vertex, degree: usize, cap: f64 },
    #[error("bad set contains end {0}")]
    BadSetMeetsEnds(Vertex),
}

/// Handle `P` ending at `v = P.end()`, ends `U` and one strand per end.
/// Each strand runs from `v` to its end, and `P ∪ Q_u` is a rainbow path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mop {
    pub handle: RainbowPath,
    pub ends: Vec<Vertex>,
    pub strands: Vec<RainbowPath>,
    /// Bound on strand length.
    pub max_strand: usize,
}

impl Mop {
    /// A single vertex with up to `t` of its neighbours as ends.
    pub fn star(g: &ColouredDigraph, v: Vertex, t: usize) -> Mop {
        let mut ends = Vec::new();
        let mut strands = Vec::new();
        for &(w, c) in g.out_edges(v).iter().take(t) {
            let mut q = RainbowPath::single(v);
            q.push(c, w);
            ends.push(w);
            strands.push(q);
        }
        Mop { handle: RainbowPath::single(v), ends, strands, max_strand: 1 }
    }

    pub fn centre(&self) -> Vertex {
        self.handle.end()
    }

    pub fn handle_len(&self) -> usize {
        self.handle.len()
    }

    pub fn end_count(&self) -> usize {
        self.ends.len()
    }

    /// `P ∪ Q_u` for the end at position `i`.
    pub fn path_through(&self, i: usize) -> RainbowPath {
        let mut p = self.handle.clone();
        p.join(&self.strands[i]);
        p
    }

    /// Longest `P ∪ Q_u` over all ends, or the handle if there are none.
    pub fn best_path(&self) -> RainbowPath {
        (0..self.ends.len())
            .map(|i| self.path_through(i))
            .max_by(|a, b| a.len().cmp(&b.len()).then(b.end().cmp(&a.end())))
            .unwrap_or_else(|| self.handle.clone())
    }

    pub fn validate(&self, g: &ColouredDigraph) -> Result<(), MopError> {
        let bad = |m: String| Err(MopError::InvalidMop(m));
        if self.handle.is_empty() {
            return bad("empty handle".into());
        }
        validate_rainbow(g, &self.handle).or_else(|e| bad(format!("handle: {e:?}")))?;
        if self.ends.len() != self.strands.len() {
            return bad("one strand per end is required".into());
        }
        let mut seen = vec![false; g.n()];
        for (i, (&u, q)) in self.ends.iter().zip(&self.strands).enumerate() {
            if u >= g.n() || std::mem::replace(&mut seen[u], true) {
                return bad(format!("end {u} repeated or out of range"));
            }
            if q.is_empty() || q.start() != self.centre() || q.end() != u {
                return bad(format!("strand {i} does not run from the centre to {u}"));
            }
            if q.len() > self.max_strand {
                return bad(format!("strand {i} has length {} > {}", q.len(), self.max_strand));
            }
            validate_rainbow(g, &self.path_through(i)).or_else(|e| bad(format!("handle + strand {i}: {e:?}")))?;
        }
        Ok(())
    }

    fn handle_colours(&self, k: usize) -> Vec<bool> {
        let mut used = vec![false; k];
        for &c in &self.handle.colours {
            used[c] = true;
        }
        used
    }
}

/// Edges leaving the ends in colours off the handle, against
/// `γ(d-ℓ)|U|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakyVerdict {
    pub boundary_count: usize,
    pub threshold: f64,
    pub leaky: bool,
}

pub fn leaky_test(g: &ColouredDigraph, m: &Mop, d: usize, gamma: f64) -> LeakyVerdict {
    let mut in_u = vec![false; g.n()];
    for &u in &m.ends {
        in_u[u] = true;
    }
    let handle = m.handle_colours(g.colour_count());
    let boundary_count =
        m.ends.iter().map(|&u| g.out_edges(u).iter().filter(|&&(w, c)| !in_u[w] && !handle[c]).count()).sum();
    let threshold = gamma * d.saturating_sub(m.handle_len()) as f64 * m.ends.len() as f64;
    LeakyVerdict { boundary_count, threshold, leaky: boundary_count as f64 >= threshold - 1e-9 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extension {
    pub mop: Mop,
    pub added: usize,
    /// The guaranteed lower bound on `added`; may be negative.
    pub bound: f64,
}

/// One step of strand growth. New ends are vertices outside `U ∪ B` with a
/// neighbour `u ∈ U` such that `Q_u + uw` keeps `P ∪ Q_u + uw` rainbow.
/// Requires the mop to be leaky and every end to have at most `Δ'` edges
/// into `B` in colours off the handle.
pub fn extend_ends(
    g: &ColouredDigraph,
    m: &Mop,
    bad: &[bool],
    delta_prime: f64,
    d: usize,
    gamma: f64,
) -> Result<Extension, MopError> {
    if !g.is_symmetric() {
        return Err(MopError::NotSymmetric);
    }
    let verdict = leaky_test(g, m, d, gamma);
    if !verdict.leaky {
        return Err(MopError::NotLeaky(verdict));
    }
    let off_handle: Vec<bool> = m.handle_colours(g.colour_count()).iter().map(|&b| !b).collect();
    for &u in &m.ends {
        if bad[u] {
            return Err(MopError::BadSetMeetsEnds(u));
        }
        let degree = g.out_degree_into(u, bad, &off_handle);
        if degree as f64 > delta_prime + 1e-9 {
            return Err(MopError::BadDegreeCapViolated { vertex: u, degree, cap: delta_prime });
        }
    }
    Ok(grow_ends(g, m, bad, delta_prime, d, gamma))
}

fn grow_ends(g: &ColouredDigraph, m: &Mop, bad: &[bool], delta_prime: f64, d: usize, gamma: f64) -> Extension {
    let n = g.n();
    let mut end_index = vec![usize::MAX; n];
    for (i, &u) in m.ends.iter().enumerate() {
        end_index[u] = i;
    }
    let mut on_handle = vec![false; n];
    for &x in &m.handle.vertices {
        on_handle[x] = true;
    }
    let handle_colours = m.handle_colours(g.colour_count());
    // For every candidate vertex, the end with the shortest usable strand.
    let found: Vec<(Vertex, usize, usize)> = (0..n)
        .into_par_iter()
        .filter(|&w| end_index[w] == usize::MAX && !bad[w] && !on_handle[w])
        .filter_map(|w| {
            g.out_edges(w)
                .iter()
                .filter(|&&(u, c)| end_index[u] != usize::MAX && !handle_colours[c])
                .map(|&(u, c)| (end_index[u], c))
                .filter(|&(i, c)| {
                    let q = &m.strands[i];
                    !q.vertices.contains(&w) && !q.colours.contains(&c)
                })
                .min_by_key(|&(i, _)| (m.strands[i].len(), m.ends[i]))
                .map(|(i, c)| (w, i, c))
        })
        .collect();
    let mut next = m.clone();
    next.max_strand = m.max_strand + 1;
    for &(w, i, c) in &found {
        let mut q = m.strands[i].clone();
        q.push(c, w);
        next.ends.push(w);
        next.strands.push(q);
    }
    let dmax = g.max_out_degree().max(1) as f64;
    let off_bad = m.handle.vertices.iter().filter(|&&x| !bad[x]).count() as f64;
    let s = m.max_strand as f64;
    let bound = (gamma * d.saturating_sub(m.handle_len()) as f64 - delta_prime - 2.0 * s) / dmax * m.ends.len() as f64
        - off_bad;
    Extension { mop: next, added: found.len(), bound }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Initialise,
    Boost,
    Extend,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MopStep {
    pub phase: Phase,
    pub handle_len: usize,
    pub max_strand: usize,
    pub ends: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MopOutcome {
    Path(RainbowPath),
    /// A mop within the size limits whose ends do not leak.
    Witness(Box<Mop>, LeakyVerdict),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MopRun {
    pub outcome: MopOutcome,
    /// True when the handle passed `(1-ε)d`.
    pub reached_target: bool,
    pub trace: Vec<MopStep>,
    pub audit: Audit,
}

struct MopParams {
    d: usize,
    eps: f64,
    gamma: f64,
    alpha: f64,
    big_k: f64,
    s0: usize,
    s1: usize,
}

impl MopParams {
    /// End count the boost and extend phases aim for at strand length `s`.
    fn target(&self, s: usize) -> f64 {
        (1.0 + self.gamma * self.eps / (2.0 * self.big_k)).powi(s as i32 - 1) * self.eps * self.d as f64 / 2.0
    }

    fn init_target(&self, s: usize) -> f64 {
        (1.0 + self.gamma / (2.0 * self.big_k)).powi(s as i32 - 1) * self.d as f64
    }

    /// Whether the leaky property is promised for this mop.
    fn in_scope(&self, m: &Mop) -> bool {
        m.max_strand <= self.s0 && m.end_count() as f64 <= self.d.saturating_sub(m.handle_len()) as f64 / self.alpha
    }
}

enum Grow {
    Grown(Mop),
    Witness(Mop, LeakyVerdict),
}

struct Engine<'a> {
    g: &'a ColouredDigraph,
    p: MopParams,
    trace: Vec<MopStep>,
    audit: Audit,
}

impl Engine<'_> {
    fn record(&mut self, phase: Phase, m: &Mop) {
        self.trace.push(MopStep { phase, handle_len: m.handle_len(), max_strand: m.max_strand, ends: m.end_count() });
    }

    /// Raises the strand bound to `s`, growing ends while below `target`.
    fn grow_to(
        &mut self,
        mut m: Mop,
        upto: usize,
        bad: &dyn Fn(usize) -> Vec<bool>,
        cap: f64,
        target: &dyn Fn(usize) -> f64,
        phase: Phase,
    ) -> Grow {
        while m.max_strand < upto {
            let s = m.max_strand + 1;
            if m.end_count() as f64 >= target(s) {
                m.max_strand = s;
                continue;
            }
            let verdict = leaky_test(self.g, &m, self.p.d, self.p.gamma);
            if !verdict.leaky {
                if self.p.in_scope(&m) {
                    return Grow::Witness(m, verdict);
                }
                self.audit.note("mop", format!("non-leaky mop with {} ends is outside the size limit", m.end_count()));
            }
            let b = bad(s);
            let ext = grow_ends(self.g, &m, &b, cap, self.p.d, self.p.gamma);
            if (ext.added as f64) < ext.bound - 1e-9 {
                self.audit.note("mop", format!("grew {} ends, below the bound {:.1}", ext.added, ext.bound));
            }
            m = ext.mop;
            assert_eq!(m.validate(self.g), Ok(()), "strand growth must keep the mop valid");
            self.record(phase, &m);
        }
        Grow::Grown(m)
    }
}

/// Runs initialise, boost and extend until the handle is longer than
/// `(1-ε)d`, a non-leaky mop in scope turns up, or the construction stalls
/// (in which case the longest handle-plus-strand path is returned and the
/// stall is audited).
pub fn mop_long_path(g: &ColouredDigraph, params: &ParamSet) -> Result<MopRun, MopError> {
    if !g.is_symmetric() {
        return Err(MopError::NotSymmetric);
    }
    let n = g.n();
    let d = g.min_out_degree();
    let mut audit = Audit::default();
    if n == 0 || d == 0 {
        let path = if n == 0 { RainbowPath::default() } else { RainbowPath::single(0) };
        return Ok(MopRun { outcome: MopOutcome::Path(path), reached_target: d == 0, trace: Vec::new(), audit });
    }
    let big_k = params.big_k.unwrap_or(g.max_out_degree() as f64 / d as f64).max(1.0);
    let p = MopParams {
        d,
        eps: params.eps,
        gamma: params.gamma,
        alpha: params.alpha.unwrap_or(0.01),
        big_k,
        s0: params.s0.max(1),
        s1: params.s1.clamp(1, params.s0.max(1)),
    };
    if p.gamma * p.eps * d as f64 <= 2.0 * p.s0 as f64 {
        audit.unmet(
            "mop",
            format!(
                "γεd = {:.2} does not exceed 2·s₀ = {}; end growth is not guaranteed",
                p.gamma * p.eps * d as f64,
                2 * p.s0
            ),
        );
    }
    let goal = (1.0 - p.eps) * d as f64;
    let mut e = Engine { g, p, trace: Vec::new(), audit };
    let no_bad = vec![false; n];

    let m = Mop::star(g, 0, d);
    e.record(Phase::Initialise, &m);
    let init_target = |s: usize| e.p.init_target(s);
    let init_target: Vec<f64> = (0..=e.p.s0 + 1).map(init_target).collect();
    let s0 = e.p.s0;
    let mut m = match e.grow_to(m, s0, &|_| no_bad.clone(), 0.0, &|s| init_target[s], Phase::Initialise) {
        Grow::Grown(m) => m,
        Grow::Witness(m, v) => return Ok(finish_witness(e, m, v)),
    };
    let mut best = m.best_path();

    loop {
        if m.handle_len() as f64 > goal {
            let run = MopRun {
                outcome: MopOutcome::Path(m.handle.clone()),
                reached_target: true,
                trace: e.trace,
                audit: e.audit,
            };
            return Ok(run);
        }
        // Boost to strands of length s0.
        let targets: Vec<f64> = (0..=s0 + 1).map(|s| e.p.target(s)).collect();
        if m.max_strand < s0 {
            m = match e.grow_to(m, s0, &|_| no_bad.clone(), 0.0, &|s| targets[s], Phase::Boost) {
                Grow::Grown(m) => m,
                Grow::Witness(m, v) => return Ok(finish_witness(e, m, v)),
            };
        }
        if m.best_path().len() > best.len() {
            best = m.best_path();
        }
        // Extend: pick an end far from the handle.
        let Some(next) = extend_handle(&mut e, &m) else {
            e.audit.fallback("mop", format!("extension stalled with handle length {}", m.handle_len()));
            let run = MopRun { outcome: MopOutcome::Path(best), reached_target: false, trace: e.trace, audit: e.audit };
            return Ok(run);
        };
        let s1 = e.p.s1;
        let prev_len = m.handle_len();
        m = match next {
            Grow::Witness(m, v) => return Ok(finish_witness(e, m, v)),
            Grow::Grown(m) => m,
        };
        assert!(m.handle_len() > prev_len, "extension must lengthen the handle");
        debug_assert!(m.max_strand <= s1);
        if m.best_path().len() > best.len() {
            best = m.best_path();
        }
        if m.ends.is_empty() {
            if m.handle_len() as f64 > goal {
                continue;
            }
            e.audit.fallback("mop", "no fresh ends after extending the handle");
            let run = MopRun { outcome: MopOutcome::Path(best), reached_target: false, trace: e.trace, audit: e.audit };
            return Ok(run);
        }
    }
}

fn finish_witness(e: Engine, m: Mop, v: LeakyVerdict) -> MopRun {
    MopRun { outcome: MopOutcome::Witness(Box::new(m), v), reached_target: false, trace: e.trace, audit: e.audit }
}

/// Bad-set ladder `B_0 = V(P)`, `B_i = B_{i-1} ∪ {x : deg(x, B_{i-1}; C') ≥ γd'/4}`.
fn bad_ladder(
    g: &ColouredDigraph,
    handle: &RainbowPath,
    off_handle: &[bool],
    cap: f64,
    levels: usize,
) -> Vec<Vec<bool>> {
    let mut b0 = vec![false; g.n()];
    for &x in &handle.vertices {
        b0[x] = true;
    }
    let mut ladder = vec![b0];
    for _ in 0..levels {
        let prev = ladder.last().expect("ladder starts with the handle");
        let next: Vec<bool> =
            (0..g.n()).map(|x| prev[x] || g.out_degree_into(x, prev, off_handle) as f64 >= cap - 1e-9).collect();
        ladder.push(next);
    }
    ladder
}

fn extend_handle(e: &mut Engine, m: &Mop) -> Option<Grow> {
    let g = e.g;
    let s1 = e.p.s1;
    let d_rest = e.p.d.saturating_sub(m.handle_len()) as f64;
    let cap = e.p.gamma * d_rest / 4.0;
    let off_handle: Vec<bool> = m.handle_colours(g.colour_count()).iter().map(|&b| !b).collect();
    let ladder = bad_ladder(g, &m.handle, &off_handle, cap, s1);
    // Depth of an end: the first ladder level containing it.
    let depth = |u: Vertex| ladder.iter().position(|b| b[u]).unwrap_or(s1 + 1);
    let pick = (0..m.end_count()).filter(|&i| !m.strands[i].colours.is_empty()).max_by(|&a, &b| {
        let key = |i: usize| (depth(m.ends[i]), std::cmp::Reverse(m.strands[i].len()), std::cmp::Reverse(m.ends[i]));
        key(a).cmp(&key(b))
    })?;
    let u = m.ends[pick];
    let reach = depth(u);
    // `reach - 1` is the deepest ladder level avoiding u; s1 means u ∉ B_{s1}.
    let top = reach.saturating_sub(1).min(s1);
    if top < s1 {
        e.audit.note("mop", format!("every end lies in B_{}; extending through an end outside B_{top}", top + 1));
    }
    let handle = m.path_through(pick);
    let avoid = |level: Option<usize>| -> Vec<bool> {
        let mut b = match level {
            Some(j) => ladder[j].clone(),
            None => vec![false; g.n()],
        };
        for &x in &handle.vertices {
            b[x] = true;
        }
        b
    };
    // Layer 1: fresh neighbours of u off the ladder level top-1.
    let layer1 = avoid(top.checked_sub(1));
    let mut used = vec![false; g.colour_count()];
    for &c in &handle.colours {
        used[c] = true;
    }
    let mut ends = Vec::new();
    let mut strands = Vec::new();
    for &(w, c) in g.out_edges(u) {
        if !used[c] && !layer1[w] {
            let mut q = RainbowPath::single(u);
            q.push(c, w);
            ends.push(w);
            strands.push(q);
        }
    }
    let next = Mop { handle: handle.clone(), ends, strands, max_strand: 1 };
    assert_eq!(next.validate(g), Ok(()), "rebuilt mop must be valid");
    e.record(Phase::Extend, &next);
    let targets: Vec<f64> = (0..=s1 + 1).map(|s| e.p.target(s)).collect();
    // Layer i avoids B_{top-i} (or just the handle once the ladder runs out).
    let bad_for = |s: usize| avoid(top.checked_sub(s));
    Some(e.grow_to(next, s1, &bad_for, cap, &|s| targets[s], Phase::Extend))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForestBranch {
    /// Few high-degree vertices relative to the core: the iterated forest.
    Sparse,
    /// Strip high-escape vertices and use the switching forest.
    Switching,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchrijverSource {
    /// The mop handle reached the target.
    Mop,
    /// Handle, strand and the stitched forest inside the non-leaky ends.
    DenseEnds,
    /// The longest handle-plus-strand path of the mop run.
    MopBest,
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchrijverRun {
    pub path: RainbowPath,
    pub source: SchrijverSource,
    pub d: usize,
    pub target: usize,
    pub mop: MopRun,
    pub ends_initial: usize,
    pub ends_peeled: usize,
    pub core_size: usize,
    pub branch: Option<ForestBranch>,
    pub forest_edges: usize,
    pub connections: usize,
    pub failed_connections: usize,
    /// Length of every candidate that was compared.
    pub candidates: Vec<(SchrijverSource, usize)>,
    pub audit: Audit,
}

/// Long rainbow path in an undirected properly coloured graph of minimum
/// degree `d` and maximum degree at most `Kd`.
pub fn schrijver_long_path(g: &ColouredDigraph, params: &ParamSet, seed: u64) -> Result<SchrijverRun, MopError> {
    let mop = mop_long_path(g, params)?;
    let d = g.min_out_degree();
    let eps = params.eps;
    let target = ((1.0 - eps) * d as f64 - 1e-9).ceil().max(0.0) as usize;
    let mut audit = Audit::default();
    audit.absorb("mop", mop.audit.clone());
    let mut run = SchrijverRun {
        path: RainbowPath::default(),
        source: SchrijverSource::MopBest,
        d,
        target,
        mop: mop.clone(),
        ends_initial: 0,
        ends_peeled: 0,
        core_size: 0,
        branch: None,
        forest_edges: 0,
        connections: 0,
        failed_connections: 0,
        candidates: Vec::new(),
        audit: Audit::default(),
    };
    let mut candidates: Vec<(RainbowPath, SchrijverSource)> = Vec::new();
    match &mop.outcome {
        MopOutcome::Path(p) => {
            let src = if mop.reached_target { SchrijverSource::Mop } else { SchrijverSource::MopBest };
            candidates.push((p.clone(), src));
        }
        MopOutcome::Witness(m, _) => {
            candidates.push((m.best_path(), SchrijverSource::MopBest));
            if let Some(p) = dense_ends_path(g, m, params, seed, &mut run, &mut audit) {
                candidates.push((p, SchrijverSource::DenseEnds));
            }
        }
    }
    if g.n() > 0 {
        candidates.push((greedy_min_outdeg_path(g, StartPolicy::EveryVertex), SchrijverSource::Greedy));
    }
    run.candidates = candidates.iter().map(|(p, s)| (*s, p.len())).collect();
    // Longest wins; earlier candidates win ties.
    let mut best: Option<(RainbowPath, SchrijverSource)> = None;
    for (p, s) in candidates {
        if best.as_ref().is_none_or(|(b, _)| p.len() > b.len()) {
            best = Some((p, s));
        }
    }
    if let Some((p, s)) = best {
        assert_eq!(validate_rainbow(g, &p), Ok(()), "every candidate path must be rainbow");
        if s == SchrijverSource::Greedy {
            audit.fallback("result", "greedy path is the longest candidate");
        }
        run.path = p;
        run.source = s;
    }
    if run.path.len() < target {
        audit.note("result", format!("length {} below target {target}", run.path.len()));
    }
    run.audit = audit;
    Ok(run)
}

/// The non-leaky route: peel the ends, pass to an expander with escape
/// weights, grow a forest outside a reservoir, cut out the strand, then
/// join everything behind `P ∪ Q_u`.
fn dense_ends_path(
    g: &ColouredDigraph,
    m: &Mop,
    params: &ParamSet,
    seed: u64,
    run: &mut SchrijverRun,
    audit: &mut Audit,
) -> Option<RainbowPath> {
    let n = g.n();
    let d = g.min_out_degree();
    let gamma = params.gamma;
    let eps = params.eps;
    let d_rest = d.saturating_sub(m.handle_len()) as f64;
    let off_handle: Vec<bool> = m.handle_colours(g.colour_count()).iter().map(|&b| !b).collect();
    let mut in_u = vec![false; n];
    for &u in &m.ends {
        in_u[u] = true;
    }
    run.ends_initial = m.ends.len();

    // Peel to a minimal set keeping the boundary below γd'|U|.
    let floor = (1.0 - gamma) * d_rest / 2.0;
    loop {
        let low = (0..n).find(|&u| in_u[u] && (g.out_degree_into(u, &in_u, &off_handle) as f64) < floor - 1e-9);
        match low {
            Some(u) => in_u[u] = false,
            None => break,
        }
    }
    let peeled: Vec<Vertex> = (0..n).filter(|&u| in_u[u]).collect();
    run.ends_peeled = peeled.len();
    if peeled.len() < 2 {
        audit.fallback("dense-ends", "peeling left fewer than two ends");
        return None;
    }
    let outside: Vec<bool> = in_u.iter().map(|&b| !b).collect();
    let boundary: usize = peeled.iter().map(|&u| g.out_degree_into(u, &outside, &off_handle)).sum();
    if boundary as f64 >= gamma * d_rest * peeled.len() as f64 {
        audit.note("dense-ends", format!("peeled boundary {boundary} is not below γd'|U|"));
    }

    // Pass to an expander inside G[U₁; C'] with escape weights.
    let u1 = g.induced_subgraph(&in_u, &off_handle);
    let h = &u1.graph;
    let weights: Vec<f64> = u1.to_parent.iter().map(|&v| g.out_degree_into(v, &outside, &off_handle) as f64).collect();
    let alpha = (h.min_semidegree() as f64 / h.n() as f64).max(1.0 / h.n() as f64);
    let cfg = PassConfig {
        delta: (gamma * d_rest / h.n() as f64).max(1.0 / h.n() as f64),
        tau: params.tau.unwrap_or(alpha / 2.0).clamp(1e-9, 0.5),
        alpha: alpha.min(1.0),
        rho0: params.rho0,
        ratio: params.ratio,
        cert_samples: params.cert_samples,
        seed: stage_seed(seed, "ends-pass"),
        local_search_restarts: 4,
    };
    let (core_vertices, nu): (Vec<Vertex>, f64) = match pass_to_expander(h, &weights, &cfg) {
        Ok(p) => {
            audit.absorb("dense-ends/pass", p.audit.clone());
            (u1.vertices_to_parent(&p.subgraph().to_parent), p.nu)
        }
        Err(e) => {
            audit.fallback("dense-ends", format!("{e}; using the peeled ends"));
            (peeled.clone(), params.nu.unwrap_or(0.0))
        }
    };
    run.core_size = core_vertices.len();
    let mut in_core = vec![false; n];
    for &v in &core_vertices {
        in_core[v] = true;
    }
    let core = g.induced_subgraph(&in_core, &off_handle);
    let gc = &core.graph;
    let n1 = gc.n();

    // Designate the end whose strand joins the handle to the forest: any
    // end with a strand is fine; prefer one inside the core.
    let pick = (0..m.ends.len()).filter(|&i| in_core[m.ends[i]]).min_by_key(|&i| (m.strands[i].len(), m.ends[i]))?;
    let head = m.path_through(pick);
    let u_parent = m.ends[pick];
    let u_local = core.from_parent[u_parent].expect("chosen end lies in the core");

    // Strand and handle are off limits for the forest and connectors.
    let mut blocked_v = vec![false; n1];
    let mut blocked_c = vec![false; g.colour_count()];
    for &x in &head.vertices {
        if let Some(lx) = core.from_parent[x] {
            blocked_v[lx] = x != u_parent;
        }
    }
    for &c in &head.colours {
        blocked_c[c] = true;
    }

    let p_rate = params.p_or(gamma);
    let mut best: Option<RainbowPath> = None;
    for attempt in 0..=params.resamples {
        let sampling = ParamSet { nu: Some(nu), ..params.clone() };
        let res = match sample_reservoir(gc, p_rate, &sampling, stage_seed(seed, &format!("ends-reservoir-{attempt}")))
        {
            Ok(r) => r,
            Err(e) => {
                audit.fallback("dense-ends", e.to_string());
                break;
            }
        };
        // Forest graph: core minus reservoir minus the strand, keeping u.
        let keep_v: Vec<bool> = (0..n1).map(|x| (!res.vertices[x] || x == u_local) && !blocked_v[x]).collect();
        let keep_c: Vec<bool> = (0..g.colour_count()).map(|c| !res.colours[c] && !blocked_c[c]).collect();
        let g2 = gc.induced_subgraph(&keep_v, &keep_c);
        let kd = params.big_k.unwrap_or(g.max_out_degree() as f64 / d.max(1) as f64) * d as f64;
        let (branch, forest) = if kd <= eps * g2.graph.n() as f64 / 16.0 {
            let f = iterated_path_forest(&g2.graph, eps / 4.0).ok()?;
            (ForestBranch::Sparse, f.forest)
        } else {
            // Strip vertices with many escaping edges.
            let limit = (3.0 * gamma * d_rest * n1 as f64).sqrt();
            let off_core: Vec<bool> = in_core.iter().map(|&b| !b).collect();
            let keep: Vec<bool> = (0..g2.graph.n())
                .map(|x| {
                    let v = core.to_parent[g2.to_parent[x]];
                    v == u_parent || (g.out_degree_into(v, &off_core, &off_handle) as f64) < limit
                })
                .collect();
            let g3 = g2.graph.induced_subgraph(&keep, &vec![true; g.colour_count()]);
            let f = grow_switching_forest(&g3.graph, eps / 4.0, usize::MAX).ok()?;
            (ForestBranch::Switching, g3.forest_to_parent(&f.forest))
        };
        if attempt == 0 {
            audit.note("dense-ends", format!("forest branch {branch:?}"));
        }
        run.branch = Some(branch);
        let forest = g2.forest_to_parent(&forest);
        run.forest_edges = forest.edge_count();

        // Orient so that u starts the first component.
        let ordered = order_from(&forest, u_local);
        let mut excl = Exclusions::new(n1, g.colour_count());
        let mut joined = RainbowPath::single(u_local);
        for (x, c) in head.vertices.iter().zip(&head.colours) {
            if let Some(lx) = core.from_parent[*x] {
                if *x != u_parent && !excl.vertices[lx] {
                    excl.vertices[lx] = true;
                    excl.vertex_count += 1;
                }
            }
            if !excl.colours[*c] {
                excl.colours[*c] = true;
                excl.colour_count += 1;
            }
        }
        let (mut connections, mut failures) = (0, 0);
        for comp in ordered {
            if comp.start() == u_local {
                joined.join(&comp);
                continue;
            }
            match connect_pair(gc, &res, joined.end(), comp.start(), &excl, nu, params.connect_budget) {
                Ok(conn) => {
                    excl.add_path(&conn.path);
                    joined.join(&conn.path);
                    joined.join(&comp);
                    connections += 1;
                }
                Err(_) => failures += 1,
            }
        }
        run.connections = connections;
        run.failed_connections = failures;
        let mut full = head.clone();
        full.join(&core.path_to_parent(&joined));
        if best.as_ref().is_none_or(|b| full.len() > b.len()) {
            best = Some(full);
        }
        if failures == 0 {
            break;
        }
    }
    if run.failed_connections > 0 {
        audit.fallback("dense-ends", format!("{} connections failed", run.failed_connections));
    }
    best
}

/// Components longest first, with the one ending at `u` flipped to start
/// at `u` and moved to the front.
fn order_from(forest: &PathForest, u: Vertex) -> Vec<RainbowPath> {
    let mut paths = forest.paths.clone();
    if let Some(i) = paths.iter().position(|p| p.start() == u || p.end() == u) {
        let mut first = paths.remove(i);
        if first.start() != u {
            first = first.reversed();
        }
        paths.insert(0, first);
    }
    paths
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;
    use crate::io::{complete_proper, random_regular_proper};

    #[test]
    fn star_is_a_valid_mop() {
        let g = complete_proper(8).unwrap();
        let m = Mop::star(&g, 0, 7);
        assert_eq!(m.validate(&g), Ok(()));
        assert_eq!((m.handle_len(), m.end_count(), m.max_strand), (0, 7, 1));
    }

    #[test]
    fn invalid_mops_are_rejected() {
        let g = complete_proper(6).unwrap();
        let mut m = Mop::star(&g, 0, 3);
        m.max_strand = 0;
        assert!(m.validate(&g).is_err());
        let mut m = Mop::star(&g, 0, 3);
        m.ends[0] = m.ends[1];
        assert!(m.validate(&g).is_err());
    }

    #[test]
    fn leaky_extremes() {
        let g = complete_proper(6).unwrap();
        let all = Mop {
            handle: RainbowPath::single(0),
            ends: (0..6).collect(),
            strands: std::iter::once(RainbowPath::single(0))
                .chain((1..6).map(|w| RainbowPath { vertices: vec![0, w], colours: vec![g.colour_of(0, w).unwrap()] }))
                .collect(),
            max_strand: 1,
        };
        assert_eq!(all.validate(&g), Ok(()));
        let v = leaky_test(&g, &all, 5, 0.1);
        assert_eq!(v.boundary_count, 0);
        assert!(!v.leaky);
        assert!(leaky_test(&g, &all, 5, 0.0).leaky);
        // Small U in a complete graph leaks.
        let small = Mop::star(&g, 0, 1);
        let v = leaky_test(&g, &small, 5, 0.5);
        assert_eq!(v.boundary_count, 5);
        assert!(v.leaky);
    }

    #[test]
    fn k4_extension_by_hand() {
        // K4 with colours {01,23}=0, {02,13}=1, {03,12}=2.
        let g = complete_proper(4).unwrap();
        let m = Mop::star(&g, 0, 3);
        let ext = extend_ends(&g, &m, &[false; 4], 0.0, 3, 0.1).unwrap();
        // Every vertex is already an end or the centre.
        assert_eq!(ext.added, 0);
        assert_eq!(ext.mop.max_strand, 2);
        assert_eq!(ext.mop.validate(&g), Ok(()));
    }

    #[test]
    fn extension_adds_second_layer() {
        // Path 0-1-2 plus a pendant 3 on 1: the star at 0 reaches 1, then 2 and 3.
        let g = ColouredDigraph::from_undirected(4, 3, &[Edge::new(0, 1, 0), Edge::new(1, 2, 1), Edge::new(1, 3, 2)])
            .unwrap();
        let m = Mop::star(&g, 0, 1);
        let ext = extend_ends(&g, &m, &[false; 4], 0.0, 1, 0.5).unwrap();
        assert_eq!(ext.added, 2);
        assert_eq!(ext.mop.validate(&g), Ok(()));
        let bad = [false, false, true, false];
        let ext = extend_ends(&g, &m, &bad, 1.0, 1, 0.5).unwrap();
        assert_eq!(ext.mop.ends, vec![1, 3]);
        assert!(matches!(extend_ends(&g, &m, &bad, 0.0, 1, 0.5), Err(MopError::BadDegreeCapViolated { .. })));
        assert!(matches!(
            extend_ends(&g, &m, &[false, true, false, false], 9.0, 1, 0.5),
            Err(MopError::BadSetMeetsEnds(1))
        ));
    }

    #[test]
    fn not_leaky_is_refused() {
        let g = complete_proper(4).unwrap();
        let m = Mop::star(&g, 0, 3);
        assert!(matches!(extend_ends(&g, &m, &[false; 4], 0.0, 3, 1.0), Err(MopError::NotLeaky(_))));
    }

    #[test]
    fn complete_graph_mop_run() {
        let g = complete_proper(60).unwrap();
        let params = ParamSet { eps: 0.3, ..ParamSet::default() };
        let run = mop_long_path(&g, &params).unwrap();
        match &run.outcome {
            MopOutcome::Path(p) => assert_eq!(validate_rainbow(&g, p), Ok(())),
            MopOutcome::Witness(m, v) => {
                assert_eq!(m.validate(&g), Ok(()));
                assert!(!v.leaky);
                assert_eq!(&leaky_test(&g, m, 59, params.gamma), v);
            }
        }
        let extends: Vec<usize> =
            run.trace.iter().filter(|s| s.phase == Phase::Extend && s.max_strand == 1).map(|s| s.handle_len).collect();
        assert!(extends.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn two_cliques_give_a_witness_and_a_confined_path() {
        // Two disjoint copies of K8.
        let k = complete_proper(8).unwrap();
        let edges: Vec<Edge> = k
            .edges()
            .filter(|e| e.tail < e.head)
            .flat_map(|e| [e, Edge::new(e.tail + 8, e.head + 8, e.colour)])
            .collect();
        let g = ColouredDigraph::from_undirected(16, 7, &edges).unwrap();
        let run = schrijver_long_path(&g, &ParamSet::default(), 1).unwrap();
        assert_eq!(validate_rainbow(&g, &run.path), Ok(()));
        let side = run.path.vertices[0] < 8;
        assert!(run.path.vertices.iter().all(|&v| (v < 8) == side));
        assert!(run.path.len() >= 4);
    }

    #[test]
    fn k4_schrijver() {
        let g = complete_proper(4).unwrap();
        let run = schrijver_long_path(&g, &ParamSet::default(), 0).unwrap();
        assert!(run.path.len() >= 2);
        assert_eq!(validate_rainbow(&g, &run.path), Ok(()));
    }

    #[test]
    fn directed_input_is_rejected() {
        let g = ColouredDigraph::new(2, 1, &[Edge::new(0, 1, 0)]).unwrap();
        assert_eq!(mop_long_path(&g, &ParamSet::default()).unwrap_err(), MopError::NotSymmetric);
    }

    #[test]
    fn random_regular_runs_are_valid() {
        for seed in 0..4 {
            let g = random_regular_proper(40, 6, seed).unwrap();
            let run = schrijver_long_path(&g, &ParamSet::default(), seed).unwrap();
            assert_eq!(validate_rainbow(&g, &run.path), Ok(()));
            assert!(run.path.len() >= 3);
        }
    }
}
