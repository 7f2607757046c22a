//! Zooming into a robustly expanding subgraph of a dense digraph.
//!
//! While the current vertex set has a sparse cut with both sides of linear
//! size, recurse into the side of lower average weight. Cut thresholds grow
//! geometrically with depth. Finally strip vertices that lost too many
//! edges to the discarded parts.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audit::Audit;
use crate::expander::{check_robust_expander, CheckMode, ExpanderCert};
use crate::graph::{ColouredDigraph, Subgraph, Vertex};
use crate::rng::stage_rng;

/// Graphs up to this size get an exhaustive cut search.
pub const EXHAUSTIVE_CUT_LIMIT: usize = 18;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PassError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("core shrank to {size} vertices, needed more than {needed:.1}")]
    NoDenseCoreFound { size: usize, needed: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassConfig {
    /// Allowed degree loss, as a fraction of `n`.
    pub delta: f64,
    pub tau: f64,
    pub alpha: f64,
    pub rho0: f64,
    pub ratio: f64,
    pub cert_samples: u64,
    pub seed: u64,
    pub local_search_restarts: usize,
}

impl Default for PassConfig {
    fn default() -> Self {
        PassConfig {
            delta: 0.1,
            tau: 0.1,
            alpha: 0.5,
            rho0: 1e-4,
            ratio: 8.0,
            cert_samples: 1000,
            seed: 0,
            local_search_restarts: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutMethod {
    Exhaustive,
    Components,
    Spectral,
    LocalSearch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutRecord {
    pub level: usize,
    pub vertices_before: usize,
    pub kept: usize,
    pub boundary: usize,
    pub threshold: f64,
    pub method: CutMethod,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PassResult {
    #[serde(skip)]
    pub core: Option<Subgraph>,
    pub core_size: usize,
    pub nu: f64,
    pub tau: f64,
    pub depth: usize,
    pub rho_ladder: Vec<f64>,
    pub cuts: Vec<CutRecord>,
    pub stripped: Vec<Vertex>,
    pub repaired: Vec<Vertex>,
    /// Every kept vertex lost at most `δn` out- and in-edges.
    pub degree_loss_ok: bool,
    /// Average weight on the core is at most twice the original average.
    pub weight_ok: bool,
    pub out_cert: ExpanderCert,
    pub in_cert: ExpanderCert,
    pub cut_search_incomplete: bool,
    pub audit: Audit,
}

impl PassResult {
    pub fn subgraph(&self) -> &Subgraph {
        self.core.as_ref().expect("core is present on results built by pass_to_expander")
    }
}

/// Finds an induced subgraph `G'` that is (as far as the cut search can
/// tell) a robust expander, keeps degrees within `δn` of those in `G`, and
/// keeps the average of `weights` within a factor 2.
pub fn pass_to_expander(g: &ColouredDigraph, weights: &[f64], cfg: &PassConfig) -> Result<PassResult, PassError> {
    let n = g.n();
    if weights.len() != n {
        return Err(PassError::InvalidParameter("one weight per vertex is required".into()));
    }
    if !(cfg.tau > 0.0 && cfg.tau <= 0.5) || !(cfg.alpha > 0.0 && cfg.alpha <= 1.0) || cfg.delta <= 0.0 {
        return Err(PassError::InvalidParameter(format!(
            "need 0 < τ <= 1/2, 0 < α <= 1, δ > 0 (got τ={}, α={}, δ={})",
            cfg.tau, cfg.alpha, cfg.delta
        )));
    }
    let mut audit = Audit::default();
    let nf = n as f64;
    let semi = g.min_semidegree();
    if (semi as f64) < cfg.alpha * nf {
        audit.unmet("pass-to-expander", format!("minimum semidegree {semi} below αn = {:.1}", cfg.alpha * nf));
    }
    let imbalance = (0..n).map(|v| g.out_degree(v).abs_diff(g.in_degree(v))).max().unwrap_or(0);
    if imbalance as f64 > cfg.rho0 * nf {
        audit.unmet("pass-to-expander", format!("out/in degree imbalance {imbalance}"));
    }

    let t = ((cfg.alpha / 2.0).ln() / (1.0 - cfg.tau / 2.0).ln()).floor().max(0.0) as usize;
    let rho_cap = (cfg.tau * cfg.alpha * cfg.alpha / 16.0).min(cfg.delta * cfg.delta / 9.0);
    let rho: Vec<f64> = (0..=t + 1).map(|i| (cfg.rho0 * cfg.ratio.powi(i as i32)).min(rho_cap)).collect();
    if cfg.rho0 > rho_cap {
        audit.note("pass-to-expander", format!("ρ₀ clamped to {rho_cap:.2e}"));
    }
    let needed = cfg.alpha * nf / 2.0;

    let mut current = vec![true; n];
    let mut cuts = Vec::new();
    let mut depth = t + 1;
    let mut incomplete = false;
    for (level, &rho_i) in rho.iter().enumerate().take(t + 1) {
        let sub = induced(g, &current);
        let h = &sub.graph;
        if (h.n() as f64) <= needed {
            return Err(PassError::NoDenseCoreFound { size: h.n(), needed });
        }
        let threshold = rho_i * nf * nf;
        let seed = crate::rng::stage_seed(cfg.seed, &format!("cut-{level}"));
        let found = find_sparse_cut(h, cfg.tau, seed, cfg.local_search_restarts);
        match found {
            Some(cut) if cut.boundary as f64 <= threshold => {
                let inside_w =
                    avg(cut.side.iter().enumerate().filter(|x| *x.1).map(|(v, _)| weights[sub.to_parent[v]]));
                let outside_w =
                    avg(cut.side.iter().enumerate().filter(|x| !*x.1).map(|(v, _)| weights[sub.to_parent[v]]));
                let keep_inside = inside_w < outside_w
                    || (inside_w == outside_w && cut.side.iter().filter(|&&b| b).count() * 2 >= h.n());
                current = vec![false; n];
                for v in 0..h.n() {
                    if cut.side[v] == keep_inside {
                        current[sub.to_parent[v]] = true;
                    }
                }
                cuts.push(CutRecord {
                    level,
                    vertices_before: h.n(),
                    kept: current.iter().filter(|&&b| b).count(),
                    boundary: cut.boundary,
                    threshold,
                    method: cut.method,
                });
            }
            _ => {
                depth = level;
                incomplete = h.n() > EXHAUSTIVE_CUT_LIMIT;
                break;
            }
        }
    }
    let core_n = current.iter().filter(|&&b| b).count();
    if (core_n as f64) <= needed {
        return Err(PassError::NoDenseCoreFound { size: core_n, needed });
    }
    if depth == t + 1 {
        audit.note("pass-to-expander", "every level found a sparse cut");
    }

    // Strip vertices with many edges to the discarded parts.
    let mut stripped = Vec::new();
    if depth > 0 {
        let thr = rho[depth - 1].sqrt() * nf;
        for v in 0..n {
            if current[v] {
                let lost = g.out_edges(v).iter().filter(|&&(w, _)| !current[w]).count()
                    + g.in_edges(v).iter().filter(|&&(w, _)| !current[w]).count();
                if lost as f64 >= thr {
                    stripped.push(v);
                }
            }
        }
        for &v in &stripped {
            current[v] = false;
        }
    }

    // Remove any vertex that still lost more than δn edges on one side.
    let allowed = cfg.delta * nf;
    let mut repaired = Vec::new();
    loop {
        let bad: Vec<Vertex> = (0..n)
            .filter(|&v| current[v])
            .filter(|&v| {
                let out_lost = g.out_edges(v).iter().filter(|&&(w, _)| !current[w]).count();
                let in_lost = g.in_edges(v).iter().filter(|&&(w, _)| !current[w]).count();
                out_lost as f64 > allowed + 1e-9 || in_lost as f64 > allowed + 1e-9
            })
            .collect();
        if bad.is_empty() {
            break;
        }
        for v in bad {
            current[v] = false;
            repaired.push(v);
        }
    }
    if !repaired.is_empty() {
        audit.note("pass-to-expander", format!("removed {} vertices to keep the degree-loss bound", repaired.len()));
    }
    let core = induced(g, &current);
    if core.graph.n() == 0 {
        return Err(PassError::NoDenseCoreFound { size: 0, needed });
    }

    let degree_loss_ok = core.to_parent.iter().enumerate().all(|(i, &v)| {
        core.graph.out_degree(i) as f64 + allowed + 1e-9 >= g.out_degree(v) as f64
            && core.graph.in_degree(i) as f64 + allowed + 1e-9 >= g.in_degree(v) as f64
    });
    let all_avg = avg(weights.iter().copied());
    let core_avg = avg(core.to_parent.iter().map(|&v| weights[v]));
    let weight_ok = core_avg <= 2.0 * all_avg + 1e-12 * all_avg.abs().max(1.0);

    let nu = rho[depth.min(rho.len() - 1)] / 16.0;
    let mode = CheckMode::Auto { samples: cfg.cert_samples, seed: crate::rng::stage_seed(cfg.seed, "core-cert") };
    let out_cert = check_robust_expander(&core.graph, nu, cfg.tau, mode).expect("parameters were validated");
    let in_cert = check_robust_expander(&core.graph.transpose(), nu, cfg.tau, mode).expect("parameters were validated");
    if incomplete {
        audit.note("pass-to-expander", "cut search was heuristic at the final level");
    }
    Ok(PassResult {
        core_size: core.graph.n(),
        core: Some(core),
        nu,
        tau: cfg.tau,
        depth,
        rho_ladder: rho,
        cuts,
        stripped,
        repaired,
        degree_loss_ok,
        weight_ok,
        out_cert,
        in_cert,
        cut_search_incomplete: incomplete,
        audit,
    })
}

fn induced(g: &ColouredDigraph, keep: &[bool]) -> Subgraph {
    g.induced_subgraph(keep, &vec![true; g.colour_count()])
}

fn avg(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, c) = xs.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    if c == 0 {
        0.0
    } else {
        s / c as f64
    }
}

#[derive(Debug, Clone)]
pub struct Cut {
    pub side: Vec<bool>,
    /// Edges crossing the cut, in either direction.
    pub boundary: usize,
    pub method: CutMethod,
}

/// Searches for a set `U` with `τn/2 <= |U| <= (1-τ/2)n` crossed by as few
/// edges as possible. Exhaustive for small graphs; otherwise components,
/// a spectral sweep and seeded local search, keeping the best.
pub fn find_sparse_cut(h: &ColouredDigraph, tau: f64, seed: u64, restarts: usize) -> Option<Cut> {
    let n = h.n();
    let lo = ((tau * n as f64 / 2.0) - 1e-9).ceil().max(1.0) as usize;
    let hi = (((1.0 - tau / 2.0) * n as f64) + 1e-9).floor() as usize;
    let hi = hi.min(n.saturating_sub(1));
    if n < 2 || lo > hi {
        return None;
    }
    if n <= EXHAUSTIVE_CUT_LIMIT {
        return exhaustive_cut(h, lo, hi);
    }
    let nbrs = sym_neighbours(h);
    let mut best: Option<Cut> = None;
    let offer = |best: &mut Option<Cut>, c: Cut| {
        if best.as_ref().is_none_or(|b| c.boundary < b.boundary) {
            *best = Some(c);
        }
    };
    if let Some(c) = component_cut(h, &nbrs, lo, hi) {
        offer(&mut best, c);
    }
    if best.as_ref().is_some_and(|b| b.boundary == 0) {
        return best;
    }
    if let Some(c) = spectral_cut(&nbrs, lo, hi, seed) {
        let refined = local_search(&nbrs, c.side.clone(), lo, hi);
        offer(&mut best, c);
        offer(&mut best, refined);
    }
    let mut rng = stage_rng(seed, "local-search");
    for _ in 0..restarts {
        let size = rng.gen_range(lo..=hi);
        let mut order: Vec<Vertex> = (0..n).collect();
        rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
        let mut side = vec![false; n];
        for &v in &order[..size] {
            side[v] = true;
        }
        offer(&mut best, local_search(&nbrs, side, lo, hi));
    }
    best
}

/// Neighbour lists of the underlying multigraph: `w` appears once per
/// edge between `v` and `w`, whichever direction.
fn sym_neighbours(h: &ColouredDigraph) -> Vec<Vec<Vertex>> {
    (0..h.n()).map(|v| h.out_edges(v).iter().chain(h.in_edges(v)).map(|&(w, _)| w).collect()).collect()
}

fn boundary_of(nbrs: &[Vec<Vertex>], side: &[bool]) -> usize {
    (0..nbrs.len()).filter(|&v| side[v]).map(|v| nbrs[v].iter().filter(|&&w| !side[w]).count()).sum()
}

fn exhaustive_cut(h: &ColouredDigraph, lo: usize, hi: usize) -> Option<Cut> {
    let n = h.n();
    let mask_of = |adj: &[(Vertex, usize)]| adj.iter().fold(0u32, |m, &(w, _)| m | 1 << w);
    let outs: Vec<u32> = (0..n).map(|v| mask_of(h.out_edges(v))).collect();
    let ins: Vec<u32> = (0..n).map(|v| mask_of(h.in_edges(v))).collect();
    let full = (1u32 << n) - 1;
    (1u32..full)
        .into_par_iter()
        .filter(|m| {
            let s = m.count_ones() as usize;
            s >= lo && s <= hi
        })
        .map(|m| {
            let rest = full & !m;
            let b: u32 = (0..n)
                .filter(|&v| m >> v & 1 == 1)
                .map(|v| (outs[v] & rest).count_ones() + (ins[v] & rest).count_ones())
                .sum();
            (b as usize, m)
        })
        .min()
        .map(|(b, m)| Cut {
            side: (0..n).map(|v| m >> v & 1 == 1).collect(),
            boundary: b,
            method: CutMethod::Exhaustive,
        })
}

fn component_cut(h: &ColouredDigraph, nbrs: &[Vec<Vertex>], lo: usize, hi: usize) -> Option<Cut> {
    let n = h.n();
    let mut comp = vec![usize::MAX; n];
    let mut sizes = Vec::new();
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        let mut stack = vec![s];
        comp[s] = id;
        let mut size = 0;
        while let Some(v) = stack.pop() {
            size += 1;
            for &w in &nbrs[v] {
                if comp[w] == usize::MAX {
                    comp[w] = id;
                    stack.push(w);
                }
            }
        }
        sizes.push(size);
    }
    if sizes.len() < 2 {
        return None;
    }
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by_key(|&c| (std::cmp::Reverse(sizes[c]), c));
    let mut chosen = vec![false; sizes.len()];
    let mut total = 0;
    for &c in &order {
        if total >= lo {
            break;
        }
        if total + sizes[c] <= hi {
            chosen[c] = true;
            total += sizes[c];
        }
    }
    if total < lo || total > hi {
        return None;
    }
    Some(Cut { side: (0..n).map(|v| chosen[comp[v]]).collect(), boundary: 0, method: CutMethod::Components })
}

/// Sweep over the second eigenvector of the normalised symmetrised
/// adjacency matrix, found by power iteration with deflation.
fn spectral_cut(nbrs: &[Vec<Vertex>], lo: usize, hi: usize, seed: u64) -> Option<Cut> {
    let n = nbrs.len();
    let deg: Vec<f64> = nbrs.iter().map(|a| a.len() as f64).collect();
    if deg.contains(&0.0) {
        return None;
    }
    let sq: Vec<f64> = deg.iter().map(|d| d.sqrt()).collect();
    let top_norm = sq.iter().map(|x| x * x).sum::<f64>().sqrt();
    let top: Vec<f64> = sq.iter().map(|x| x / top_norm).collect();
    let mut rng = stage_rng(seed, "spectral");
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let deflate = |x: &mut Vec<f64>| {
        let dot: f64 = x.iter().zip(&top).map(|(a, b)| a * b).sum();
        x.iter_mut().zip(&top).for_each(|(a, b)| *a -= dot * b);
        let norm = x.iter().map(|a| a * a).sum::<f64>().sqrt().max(1e-300);
        x.iter_mut().for_each(|a| *a /= norm);
    };
    deflate(&mut x);
    for _ in 0..400 {
        // y = (I + D^{-1/2} A D^{-1/2}) x / 2
        let y: Vec<f64> = (0..n)
            .map(|v| {
                let s: f64 = nbrs[v].iter().map(|&w| x[w] / sq[w]).sum();
                (x[v] + s / sq[v]) / 2.0
            })
            .collect();
        x = y;
        deflate(&mut x);
    }
    let mut order: Vec<Vertex> = (0..n).collect();
    let key: Vec<f64> = (0..n).map(|v| x[v] / sq[v]).collect();
    order.sort_by(|&a, &b| key[a].total_cmp(&key[b]).then(a.cmp(&b)));
    let mut side = vec![false; n];
    let mut boundary: isize = 0;
    let mut best: Option<(isize, usize)> = None;
    for (i, &v) in order.iter().enumerate() {
        let into: isize = nbrs[v].iter().filter(|&&w| side[w]).count() as isize;
        boundary += nbrs[v].len() as isize - 2 * into;
        side[v] = true;
        let size = i + 1;
        if size >= lo && size <= hi && best.is_none_or(|(b, _)| boundary < b) {
            best = Some((boundary, size));
        }
    }
    let (b, size) = best?;
    let mut side = vec![false; n];
    for &v in &order[..size] {
        side[v] = true;
    }
    Some(Cut { side, boundary: b as usize, method: CutMethod::Spectral })
}

/// Single-vertex moves that shrink the boundary, within the size window.
fn local_search(nbrs: &[Vec<Vertex>], mut side: Vec<bool>, lo: usize, hi: usize) -> Cut {
    let n = nbrs.len();
    let mut size = side.iter().filter(|&&b| b).count();
    // For each vertex: edges to its own side and to the other side.
    let mut same: Vec<isize> = vec![0; n];
    let mut other: Vec<isize> = vec![0; n];
    for v in 0..n {
        for &w in &nbrs[v] {
            if side[w] == side[v] {
                same[v] += 1;
            } else {
                other[v] += 1;
            }
        }
    }
    loop {
        let mut improved = false;
        for v in 0..n {
            let gain = other[v] - same[v];
            let allowed = if side[v] { size > lo } else { size < hi };
            if gain > 0 && allowed {
                side[v] = !side[v];
                size = if side[v] { size + 1 } else { size - 1 };
                std::mem::swap(&mut same[v], &mut other[v]);
                for &w in &nbrs[v] {
                    if side[w] == side[v] {
                        same[w] += 1;
                        other[w] -= 1;
                    } else {
                        same[w] -= 1;
                        other[w] += 1;
                    }
                }
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    let boundary = boundary_of(nbrs, &side);
    Cut { side, boundary, method: CutMethod::LocalSearch }
}
