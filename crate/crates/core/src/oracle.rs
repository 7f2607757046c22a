//! Exact brute-force references for desk-sized inputs.

use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expander::{is_prime, pollard_check};
use crate::graph::{ColouredDigraph, RainbowPath, Vertex};
use crate::greedy::{greedy_min_outdeg_path, StartPolicy};
use crate::group::GroupTable;
use crate::rng::stage_rng;

/// Largest set `brute_rearrangeable` accepts.
pub const REARRANGE_CAP: usize = 14;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("set of size {size} exceeds the exhaustive cap {cap}")]
    TooLarge { size: usize, cap: usize },
    #[error("{0} is not prime")]
    NotPrime(usize),
    #[error("{0}")]
    BadRequest(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LongestPath {
    pub length: usize,
    pub path: RainbowPath,
    /// The whole search space was covered.
    pub exact: bool,
    pub nodes: u64,
}

struct Search<'a> {
    g: &'a ColouredDigraph,
    timed_out: &'a AtomicBool,
    deadline: Instant,
    cap: usize,
    on_path: Vec<bool>,
    vertices: Vec<Vertex>,
    colours: Vec<usize>,
    best: RainbowPath,
    nodes: u64,
}

impl Search<'_> {
    fn dfs(&mut self, v: Vertex, used: u64) {
        self.nodes += 1;
        if self.nodes.is_multiple_of(4096) && Instant::now() >= self.deadline {
            self.timed_out.store(true, Ordering::Relaxed);
        }
        if self.timed_out.load(Ordering::Relaxed) {
            return;
        }
        let len = self.colours.len();
        if len > self.best.len() {
            self.best = RainbowPath { vertices: self.vertices.clone(), colours: self.colours.clone() };
        }
        // Nothing can beat `cap`. Starts stop independently so the chosen
        // path does not depend on thread timing.
        if len >= self.cap || self.best.len() >= self.cap {
            return;
        }
        for &(w, c) in self.g.out_edges(v) {
            if self.on_path[w] || used >> c & 1 == 1 {
                continue;
            }
            self.on_path[w] = true;
            self.vertices.push(w);
            self.colours.push(c);
            self.dfs(w, used | 1 << c);
            self.colours.pop();
            self.vertices.pop();
            self.on_path[w] = false;
        }
    }
}

/// Longest rainbow path by exhaustive DFS with a colour bitmask. Inputs
/// tagged vertex-transitive search from vertex 0 only. More than 64
/// colours, or running out of `budget`, gives a lower bound.
pub fn brute_longest_rainbow_path(g: &ColouredDigraph, budget: Duration) -> LongestPath {
    let n = g.n();
    if n == 0 {
        return LongestPath { length: 0, path: RainbowPath::default(), exact: true, nodes: 0 };
    }
    if g.colour_count() > 64 {
        let path = greedy_min_outdeg_path(g, StartPolicy::EveryVertex);
        return LongestPath { length: path.len(), path, exact: false, nodes: 0 };
    }
    let present = g.colours_present().iter().filter(|&&b| b).count();
    let cap = present.min(n - 1);
    let starts: Vec<Vertex> = if g.is_vertex_transitive() { vec![0] } else { (0..n).collect() };
    let timed_out = AtomicBool::new(false);
    let deadline = Instant::now() + budget;
    let results: Vec<(RainbowPath, u64)> = starts
        .par_iter()
        .map(|&s| {
            let mut search = Search {
                g,
                timed_out: &timed_out,
                deadline,
                cap,
                on_path: vec![false; n],
                vertices: vec![s],
                colours: Vec::new(),
                best: RainbowPath::single(s),
                nodes: 0,
            };
            search.on_path[s] = true;
            search.dfs(s, 0);
            (search.best, search.nodes)
        })
        .collect();
    let nodes = results.iter().map(|r| r.1).sum();
    // Longest, earliest start on ties.
    let path = results.into_iter().map(|r| r.0).fold(RainbowPath::default(), |a, b| {
        if b.len() > a.len() || a.is_empty() {
            b
        } else {
            a
        }
    });
    LongestPath { length: path.len(), path, exact: !timed_out.load(Ordering::Relaxed), nodes }
}

/// An ordering of `s` whose partial products are all distinct, by
/// backtracking on prefixes. `s` may contain the identity.
pub fn brute_rearrangeable(group: &GroupTable, s: &[usize]) -> Result<Option<Vec<usize>>, OracleError> {
    if s.len() > REARRANGE_CAP {
        return Err(OracleError::TooLarge { size: s.len(), cap: REARRANGE_CAP });
    }
    let mut items = s.to_vec();
    items.sort_unstable();
    items.dedup();
    if items.len() != s.len() {
        return Err(OracleError::BadRequest("set has repeated elements".into()));
    }
    if let Some(&a) = items.iter().find(|&&a| a >= group.order()) {
        return Err(OracleError::BadRequest(format!("element {a} is outside the group")));
    }
    let mut seen = vec![false; group.order()];
    let mut taken = vec![false; items.len()];
    let mut order = Vec::with_capacity(items.len());
    fn go(
        g: &GroupTable,
        items: &[usize],
        taken: &mut [bool],
        seen: &mut [bool],
        order: &mut Vec<usize>,
        prod: usize,
    ) -> bool {
        if order.len() == items.len() {
            return true;
        }
        for i in 0..items.len() {
            if taken[i] {
                continue;
            }
            let next = if order.is_empty() { items[i] } else { g.mul(prod, items[i]) };
            if seen[next] {
                continue;
            }
            taken[i] = true;
            seen[next] = true;
            order.push(items[i]);
            if go(g, items, taken, seen, order, next) {
                return true;
            }
            order.pop();
            seen[next] = false;
            taken[i] = false;
        }
        false
    }
    let found = go(group, &items, &mut taken, &mut seen, &mut order, group.identity());
    Ok(found.then_some(order))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrahamReport {
    pub p: usize,
    pub subsets: usize,
    pub rearrangeable: usize,
    pub failures: Vec<Vec<usize>>,
    pub elapsed_ms: u128,
}

/// Every nonempty subset of `Z_p \ {0}` checked for an ordering with
/// distinct partial sums.
pub fn graham_sweep(p: usize) -> Result<GrahamReport, OracleError> {
    if !is_prime(p) {
        return Err(OracleError::NotPrime(p));
    }
    if p > 13 {
        return Err(OracleError::TooLarge { size: p - 1, cap: 12 });
    }
    let start = Instant::now();
    let z = GroupTable::cyclic(p);
    let m = p - 1;
    let mut failures: Vec<Vec<usize>> = (1u32..1 << m)
        .into_par_iter()
        .filter_map(|mask| {
            let s: Vec<usize> = (0..m).filter(|&i| mask >> i & 1 == 1).map(|i| i + 1).collect();
            match brute_rearrangeable(&z, &s) {
                Ok(Some(_)) => None,
                _ => Some(s),
            }
        })
        .collect();
    failures.sort();
    let subsets = (1usize << m) - 1;
    Ok(GrahamReport {
        p,
        subsets,
        rearrangeable: subsets - failures.len(),
        failures,
        elapsed_ms: start.elapsed().as_millis(),
    })
}

/// Whether the whole group can be ordered with distinct partial products.
pub fn sequenceable_check(group: &GroupTable) -> Result<bool, OracleError> {
    let all: Vec<usize> = (0..group.order()).collect();
    Ok(brute_rearrangeable(group, &all)?.is_some())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PollardMode {
    /// Every pair of nonempty subsets and every valid `t`; `n ≤ 7`.
    Exhaustive {
        n: usize,
    },
    Sampled {
        n: usize,
        trials: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PollardViolation {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub t: usize,
    pub lhs: usize,
    pub rhs: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PollardReport {
    pub mode: PollardMode,
    pub checks: u64,
    pub violations: Vec<PollardViolation>,
}

fn subset(n: usize, mask: u32) -> Vec<usize> {
    (0..n).filter(|&i| mask >> i & 1 == 1).collect()
}

fn check_all_t(n: usize, a: &[usize], b: &[usize]) -> (u64, Vec<PollardViolation>) {
    let mut out = Vec::new();
    let top = a.len().min(b.len());
    for t in 1..=top {
        let c = pollard_check(n, a, b, t).expect("valid by construction");
        if !c.holds() {
            out.push(PollardViolation { a: a.to_vec(), b: b.to_vec(), t, lhs: c.lhs, rhs: c.rhs });
        }
    }
    (top as u64, out)
}

pub fn pollard_sweep(mode: PollardMode) -> Result<PollardReport, OracleError> {
    let (n, results): (usize, Vec<(u64, Vec<PollardViolation>)>) = match mode {
        PollardMode::Exhaustive { n } => {
            if n > 7 {
                return Err(OracleError::TooLarge { size: n, cap: 7 });
            }
            if !is_prime(n) {
                return Err(OracleError::NotPrime(n));
            }
            let full = 1u32 << n;
            let r = (1..full)
                .into_par_iter()
                .flat_map_iter(|ma| (1..full).map(move |mb| check_all_t(n, &subset(n, ma), &subset(n, mb))))
                .collect();
            (n, r)
        }
        PollardMode::Sampled { n, trials, seed } => {
            if !is_prime(n) {
                return Err(OracleError::NotPrime(n));
            }
            let mut rng = stage_rng(seed, "pollard");
            let mut pairs = Vec::with_capacity(trials);
            let all: Vec<usize> = (0..n).collect();
            for _ in 0..trials {
                let (la, lb) = (rng.gen_range(1..=n), rng.gen_range(1..=n));
                let a: Vec<usize> = all.choose_multiple(&mut rng, la).copied().collect();
                let b: Vec<usize> = all.choose_multiple(&mut rng, lb).copied().collect();
                pairs.push((a, b));
            }
            (n, pairs.par_iter().map(|(a, b)| check_all_t(n, a, b)).collect())
        }
    };
    debug_assert!(n >= 2);
    let checks = results.iter().map(|r| r.0).sum();
    let violations = results.into_iter().flat_map(|r| r.1).collect();
    Ok(PollardReport { mode, checks, violations })
}
