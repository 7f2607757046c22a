//! Robust expansion, local sparsity, brooms and the Pollard inequality.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{ColouredDigraph, RainbowPath, Vertex};
use crate::rng::stage_rng;

/// Largest `n` for exhaustive expander checks.
pub const EXACT_EXPANDER_LIMIT: usize = 20;
/// Largest `n` for exhaustive local-sparsity checks.
pub const EXACT_SPARSITY_LIMIT: usize = 22;

const TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExpanderError {
    #[error("exact check needs n <= {limit}, got {n}")]
    ExactTooLarge { n: usize, limit: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckMode {
    Exact,
    Sampled {
        samples: u64,
        seed: u64,
    },
    /// Exact when small enough, otherwise sampled.
    Auto {
        samples: u64,
        seed: u64,
    },
}

fn count_meets(count: usize, nu: f64, n: usize) -> bool {
    count as f64 >= nu * n as f64 - TOL
}

/// Vertices with at least `νn` in-neighbours in `u`.
pub fn robust_out_neighbourhood(g: &ColouredDigraph, u: &[bool], nu: f64) -> Vec<bool> {
    (0..g.n()).map(|v| count_meets(g.in_edges(v).iter().filter(|&&(w, _)| u[w]).count(), nu, g.n())).collect()
}

/// Vertices with at least `νn` out-neighbours in `u`.
pub fn robust_in_neighbourhood(g: &ColouredDigraph, u: &[bool], nu: f64) -> Vec<bool> {
    (0..g.n()).map(|v| count_meets(g.out_edges(v).iter().filter(|&&(w, _)| u[w]).count(), nu, g.n())).collect()
}

/// Outcome of a robust out-expansion check. `counterexample` is a set `U`
/// in the size window whose robust out-neighbourhood has fewer than `νn`
/// vertices outside `U`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpanderCert {
    pub nu: f64,
    pub tau: f64,
    pub exact: bool,
    pub subsets_checked: u64,
    pub counterexample: Option<Vec<Vertex>>,
}

impl ExpanderCert {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

fn size_window(n: usize, tau: f64) -> (usize, usize) {
    let lo = (tau * n as f64 - TOL).ceil().max(0.0) as usize;
    let hi = ((1.0 - tau) * n as f64 + TOL).floor().max(0.0) as usize;
    (lo, hi)
}

fn check_params(nu: f64, tau: f64) -> Result<(), ExpanderError> {
    if !(nu > 0.0 && nu <= 1.0) || !(0.0..=0.5).contains(&tau) {
        return Err(ExpanderError::InvalidParameter(format!("need 0 < ν <= 1 and 0 <= τ <= 1/2, got ν={nu}, τ={tau}")));
    }
    Ok(())
}

/// Checks that every `U` with `τn <= |U| <= (1-τ)n` has at least `νn`
/// robust out-neighbours outside `U`.
pub fn check_robust_expander(
    g: &ColouredDigraph,
    nu: f64,
    tau: f64,
    mode: CheckMode,
) -> Result<ExpanderCert, ExpanderError> {
    check_params(nu, tau)?;
    let n = g.n();
    let exact = match mode {
        CheckMode::Exact => {
            if n > EXACT_EXPANDER_LIMIT {
                return Err(ExpanderError::ExactTooLarge { n, limit: EXACT_EXPANDER_LIMIT });
            }
            true
        }
        CheckMode::Sampled { .. } => false,
        CheckMode::Auto { .. } => n <= EXACT_EXPANDER_LIMIT,
    };
    let (lo, hi) = size_window(n, tau);
    let need = nu * n as f64 - TOL;
    if exact {
        let in_mask: Vec<u32> = (0..n).map(|v| g.in_edges(v).iter().fold(0u32, |m, &(w, _)| m | 1 << w)).collect();
        let bad = (0u32..1 << n).into_par_iter().find_first(|&mask| {
            let size = mask.count_ones() as usize;
            if size < lo || size > hi {
                return false;
            }
            let outside = (0..n)
                .filter(|&v| mask >> v & 1 == 0 && count_meets((in_mask[v] & mask).count_ones() as usize, nu, n))
                .count();
            (outside as f64) < need
        });
        let checked = (0..=n).filter(|&s| s >= lo && s <= hi).map(|s| binomial(n, s)).sum();
        return Ok(ExpanderCert {
            nu,
            tau,
            exact: true,
            subsets_checked: checked,
            counterexample: bad.map(|m| (0..n).filter(|&v| m >> v & 1 == 1).collect()),
        });
    }
    let (samples, seed) = match mode {
        CheckMode::Sampled { samples, seed } | CheckMode::Auto { samples, seed } => (samples, seed),
        CheckMode::Exact => unreachable!(),
    };
    if lo > hi || n == 0 {
        return Ok(ExpanderCert { nu, tau, exact: false, subsets_checked: 0, counterexample: None });
    }
    let mut rng = stage_rng(seed, "expander-check");
    let mut order: Vec<Vertex> = (0..n).collect();
    let mut inside = vec![false; n];
    for i in 0..samples {
        let size = rng.gen_range(lo..=hi);
        order.shuffle(&mut rng);
        inside.iter_mut().for_each(|x| *x = false);
        for &v in &order[..size] {
            inside[v] = true;
        }
        let rn = robust_out_neighbourhood(g, &inside, nu);
        let outside = (0..n).filter(|&v| rn[v] && !inside[v]).count();
        if (outside as f64) < need {
            let mut u: Vec<Vertex> = order[..size].to_vec();
            u.sort_unstable();
            return Ok(ExpanderCert { nu, tau, exact: false, subsets_checked: i + 1, counterexample: Some(u) });
        }
    }
    Ok(ExpanderCert { nu, tau, exact: false, subsets_checked: samples, counterexample: None })
}

fn binomial(n: usize, k: usize) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SparsityMode {
    Exact,
    /// Random `d`-sets plus greedy densest-set growth from each vertex.
    Heuristic {
        samples: u64,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparsityVerdict {
    pub eps: f64,
    pub d: usize,
    pub exact: bool,
    /// Largest `e(U, U)` seen over sets with `|U| <= d`.
    pub densest_edges: usize,
    pub densest_set: Vec<Vertex>,
    pub sparse: bool,
}

/// Tests `e(U, U) <= εd²` for every `U` with `|U| <= d`. Since `e(U, U)`
/// only grows with `U`, only sets of size `min(d, n)` are examined.
pub fn local_sparsity_check(
    g: &ColouredDigraph,
    eps: f64,
    d: usize,
    mode: SparsityMode,
) -> Result<SparsityVerdict, ExpanderError> {
    let n = g.n();
    let size = d.min(n);
    let bound = eps * (d * d) as f64 + TOL;
    let (best, set, exact) = match mode {
        SparsityMode::Exact => {
            if n > EXACT_SPARSITY_LIMIT {
                return Err(ExpanderError::ExactTooLarge { n, limit: EXACT_SPARSITY_LIMIT });
            }
            let out_mask: Vec<u64> =
                (0..n).map(|v| g.out_edges(v).iter().fold(0u64, |m, &(w, _)| m | 1 << w)).collect();
            let inner = |m: u64| -> usize {
                (0..n).filter(|&v| m >> v & 1 == 1).map(|v| (out_mask[v] & m).count_ones() as usize).sum()
            };
            let mut best = (0usize, 0u64);
            if size > 0 {
                let limit: u64 = 1 << n;
                let mut m: u64 = (1 << size) - 1;
                while m < limit {
                    let e = inner(m);
                    if e > best.0 || best.1 == 0 {
                        best = (e, m);
                    }
                    // Gosper's hack: next mask with the same popcount.
                    let c = m & m.wrapping_neg();
                    let r = m + c;
                    m = (((r ^ m) >> 2) / c) | r;
                }
            }
            let set = (0..n).filter(|&v| best.1 >> v & 1 == 1).collect();
            (best.0, set, true)
        }
        SparsityMode::Heuristic { samples, seed } => {
            let mut best = (0usize, Vec::new());
            let mut consider = |u: Vec<Vertex>| {
                let e = edges_within(g, &u);
                if e > best.0 || best.1.is_empty() {
                    best = (e, u);
                }
            };
            let starts: Vec<Vertex> = if n <= 256 { (0..n).collect() } else { (0..n).step_by(n / 256 + 1).collect() };
            for v in starts {
                consider(grow_dense_set(g, v, size));
            }
            let mut rng = stage_rng(seed, "sparsity");
            let mut order: Vec<Vertex> = (0..n).collect();
            for _ in 0..samples {
                order.shuffle(&mut rng);
                consider(order[..size].to_vec());
            }
            let (e, mut u) = best;
            u.sort_unstable();
            (e, u, false)
        }
    };
    Ok(SparsityVerdict { eps, d, exact, densest_edges: best, sparse: (best as f64) <= bound, densest_set: set })
}

pub fn edges_within(g: &ColouredDigraph, u: &[Vertex]) -> usize {
    let mut inside = vec![false; g.n()];
    for &v in u {
        inside[v] = true;
    }
    u.iter().map(|&v| g.out_edges(v).iter().filter(|&&(w, _)| inside[w]).count()).sum()
}

fn grow_dense_set(g: &ColouredDigraph, start: Vertex, size: usize) -> Vec<Vertex> {
    let n = g.n();
    let mut inside = vec![false; n];
    let mut gain = vec![0usize; n];
    let mut set = Vec::with_capacity(size);
    let add = |v: Vertex, inside: &mut Vec<bool>, gain: &mut Vec<usize>, set: &mut Vec<Vertex>| {
        inside[v] = true;
        set.push(v);
        for &(w, _) in g.out_edges(v).iter().chain(g.in_edges(v)) {
            gain[w] += 1;
        }
    };
    add(start, &mut inside, &mut gain, &mut set);
    while set.len() < size {
        let next = (0..n).filter(|&v| !inside[v]).max_by_key(|&v| (gain[v], std::cmp::Reverse(v)));
        match next {
            Some(v) => add(v, &mut inside, &mut gain, &mut set),
            None => break,
        }
    }
    set
}

/// Result of the broom construction. `path` is the handle plus one edge of
/// the final star.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BroomRun {
    pub path: RainbowPath,
    pub handle_len: usize,
    pub star_size: usize,
}

/// Grows a rainbow path whose end vertex keeps a star of `⌈εd/2⌉` fresh
/// out-edges, moving the end into a star leaf that has a full star of its
/// own. Tries each start vertex until a path of length `(1-ε)d` appears.
pub fn broom_path(g: &ColouredDigraph, eps: f64, d: usize) -> Result<BroomRun, ExpanderError> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(ExpanderError::InvalidParameter(format!("epsilon must lie in (0, 1], got {eps}")));
    }
    let k = ((eps * d as f64) / 2.0 - TOL).ceil().max(1.0) as usize;
    let goal = (1.0 - eps) * d as f64 - TOL;
    let mut best: Option<BroomRun> = None;
    for v in 0..g.n() {
        if g.out_degree(v) < k {
            continue;
        }
        let run = broom_from(g, v, k);
        let better = best.as_ref().is_none_or(|b| run.path.len() > b.path.len());
        if better {
            let done = run.path.len() as f64 >= goal;
            best = Some(run);
            if done {
                break;
            }
        }
    }
    let path = if g.n() == 0 { RainbowPath::default() } else { RainbowPath::single(0) };
    Ok(best.unwrap_or(BroomRun { path, handle_len: 0, star_size: k }))
}

fn broom_from(g: &ColouredDigraph, start: Vertex, k: usize) -> BroomRun {
    let mut on = vec![false; g.n()];
    let mut used = vec![false; g.colour_count()];
    let mut handle = RainbowPath::single(start);
    on[start] = true;
    let fresh = |v: Vertex, on: &[bool], used: &[bool], skip: Option<usize>| -> Vec<(Vertex, usize)> {
        g.out_edges(v).iter().filter(|&&(w, c)| !on[w] && !used[c] && Some(c) != skip).copied().collect()
    };
    let mut star: Vec<(Vertex, usize)> = fresh(start, &on, &used, None);
    star.truncate(k);
    loop {
        let mut moved = false;
        for &(u, cu) in &star {
            on[u] = true;
            let next = fresh(u, &on, &used, Some(cu));
            on[u] = false;
            if next.len() >= k {
                handle.push(cu, u);
                on[u] = true;
                used[cu] = true;
                star = next;
                star.truncate(k);
                moved = true;
                break;
            }
        }
        if !moved {
            break;
        }
    }
    let handle_len = handle.len();
    let mut path = handle;
    if let Some(&(w, c)) = star.first() {
        path.push(c, w);
    }
    BroomRun { path, handle_len, star_size: k }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PollardError {
    #[error("{0} is not prime")]
    NotPrime(usize),
    #[error("t must satisfy 1 <= t <= min(|A|, |B|)")]
    BadT,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PollardCheck {
    pub lhs: usize,
    pub rhs: usize,
}

impl PollardCheck {
    pub fn holds(&self) -> bool {
        self.lhs >= self.rhs
    }
}

pub fn is_prime(n: usize) -> bool {
    n >= 2 && (2..).take_while(|i| i * i <= n).all(|i| !n.is_multiple_of(i))
}

/// Compares `Σ_{i<=t} |A +_i B|` with `t·min(n, |A|+|B|-t)` in `Z_n`, where
/// `A +_i B` holds the sums with at least `i` representations.
pub fn pollard_check(n: usize, a: &[usize], b: &[usize], t: usize) -> Result<PollardCheck, PollardError> {
    if !is_prime(n) {
        return Err(PollardError::NotPrime(n));
    }
    let dedup = |s: &[usize]| {
        let mut v: Vec<usize> = s.iter().map(|x| x % n).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let (a, b) = (dedup(a), dedup(b));
    if t == 0 || t > a.len().min(b.len()) {
        return Err(PollardError::BadT);
    }
    let mut reps = vec![0usize; n];
    for &x in &a {
        for &y in &b {
            reps[(x + y) % n] += 1;
        }
    }
    let lhs = reps.iter().map(|&r| r.min(t)).sum();
    let rhs = t * n.min(a.len() + b.len() - t);
    Ok(PollardCheck { lhs, rhs })
}

/// Expansion parameters `ν = d²/(8n²)`, `τ = d/(2n)` for a Cayley digraph
/// of `Z_n` with `d` generators.
pub fn zp_expansion_params(n: usize, d: usize) -> (f64, f64) {
    let (n, d) = (n as f64, d as f64);
    (d * d / (8.0 * n * n), d / (2.0 * n))
}
