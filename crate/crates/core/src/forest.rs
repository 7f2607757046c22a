//! Rainbow path forests with few components.
//!
//! Two constructions. [`iterated_path_forest`] takes greedy paths from what
//! is left after deleting the vertices and colours already used.
//! [`switching_path_forest`] keeps a fixed number of components and grows
//! the forest one edge at a time; when no free colour is directly usable it
//! re-routes a chain of out-edges so that the colour it needs is released.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audit::Audit;
use crate::graph::{Colour, ColouredDigraph, PathForest, RainbowPath, Vertex};
use crate::greedy::{greedy_avg_degree_restricted, greedy_path_from, Restriction};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ForestError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("augmentation stalled at {edges} edges (target {target})")]
    AugmentationStalled { forest: Box<PathForest>, edges: usize, target: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestRun {
    /// Components with at least one edge, longest first.
    pub forest: PathForest,
    pub component_cap: usize,
    pub target_edges: usize,
    pub rounds: usize,
    pub stalled: bool,
    pub audit: Audit,
}

fn check_eps(eps: f64) -> Result<(), ForestError> {
    if eps > 0.0 && eps <= 1.0 {
        Ok(())
    } else {
        Err(ForestError::InvalidParameter(format!("epsilon must lie in (0, 1], got {eps}")))
    }
}

fn sort_longest_first(paths: &mut [RainbowPath]) {
    paths.sort_by(|a, b| b.len().cmp(&a.len()).then(a.start().cmp(&b.start())));
}

fn ceil_tol(x: f64) -> usize {
    (x - 1e-9).ceil().max(0.0) as usize
}

/// `max(1, ⌈log_{8/7}(1/ε)⌉)`.
pub fn iterated_component_cap(eps: f64) -> usize {
    ((1.0 / eps).ln() / (8.0f64 / 7.0).ln() - 1e-9).ceil().max(1.0) as usize
}

/// Forest for a symmetric digraph of average degree `d`: at most
/// [`iterated_component_cap`] paths, stopping once `(1-ε)d` edges are
/// collected. Each round takes a greedy path in the graph left after
/// removing earlier paths' vertices and colours.
pub fn iterated_path_forest(g: &ColouredDigraph, eps: f64) -> Result<ForestRun, ForestError> {
    check_eps(eps)?;
    let mut audit = Audit::default();
    let n = g.n();
    let d = if n == 0 { 0.0 } else { g.edge_count() as f64 / n as f64 };
    let cap = iterated_component_cap(eps);
    let target = ceil_tol((1.0 - eps) * d);
    if !g.is_symmetric() {
        audit.unmet("iterated-forest", "input is not symmetric");
    }
    let d0 = (1.0 / eps) * ((1.0 / eps).ln() / (8.0f64 / 7.0).ln());
    if d < d0 {
        audit.unmet("iterated-forest", format!("average degree {d:.2} below {d0:.2}"));
    }
    let max_deg = g.max_out_degree();
    if max_deg as f64 > eps * n as f64 / 4.0 {
        audit.unmet("iterated-forest", format!("maximum degree {max_deg} exceeds εn/4"));
    }
    let mut free_v = vec![true; n];
    let mut free_c = vec![true; g.colour_count()];
    let mut paths = Vec::new();
    let mut edges = 0;
    let mut rounds = 0;
    while paths.len() < cap && edges < target {
        rounds += 1;
        let p = greedy_avg_degree_restricted(g, Restriction { colours: Some(&free_c), vertices: Some(&free_v) });
        if p.colours.is_empty() {
            break;
        }
        for &v in &p.vertices {
            free_v[v] = false;
        }
        for &c in &p.colours {
            free_c[c] = false;
        }
        edges += p.len();
        paths.push(p);
    }
    sort_longest_first(&mut paths);
    Ok(ForestRun {
        forest: PathForest { paths },
        component_cap: cap,
        target_edges: target,
        rounds,
        stalled: edges < target,
        audit,
    })
}

/// Mutable forest with O(1) edge insertion and removal.
struct Forest {
    next: Vec<Option<(Vertex, Colour)>>,
    prev: Vec<Option<Vertex>>,
    member: Vec<bool>,
    /// Tail of the forest edge carrying each colour.
    owner: Vec<Option<Vertex>>,
    edges: usize,
}

impl Forest {
    fn new(n: usize, k: usize) -> Self {
        Forest { next: vec![None; n], prev: vec![None; n], member: vec![false; n], owner: vec![None; k], edges: 0 }
    }

    fn start_of(&self, mut v: Vertex) -> Vertex {
        while let Some(u) = self.prev[v] {
            v = u;
        }
        v
    }

    fn add_edge(&mut self, v: Vertex, u: Vertex, c: Colour) {
        debug_assert!(self.next[v].is_none() && self.prev[u].is_none() && self.owner[c].is_none());
        self.member[v] = true;
        self.member[u] = true;
        self.next[v] = Some((u, c));
        self.prev[u] = Some(v);
        self.owner[c] = Some(v);
        self.edges += 1;
    }

    fn remove_out_edge(&mut self, v: Vertex) -> (Vertex, Colour) {
        let (w, c) = self.next[v].take().expect("vertex has an out-edge");
        self.prev[w] = None;
        self.owner[c] = None;
        self.edges -= 1;
        (w, c)
    }

    fn starts(&self) -> Vec<Vertex> {
        (0..self.member.len()).filter(|&v| self.member[v] && self.prev[v].is_none()).collect()
    }

    fn components(&self) -> usize {
        self.starts().len()
    }

    fn paths(&self) -> Vec<RainbowPath> {
        self.starts()
            .into_iter()
            .map(|s| {
                let mut p = RainbowPath::single(s);
                let mut v = s;
                while let Some((w, c)) = self.next[v] {
                    p.push(c, w);
                    v = w;
                }
                p
            })
            .collect()
    }

    fn to_path_forest(&self) -> PathForest {
        let mut paths: Vec<RainbowPath> = self.paths().into_iter().filter(|p| !p.colours.is_empty()).collect();
        sort_longest_first(&mut paths);
        PathForest { paths }
    }
}

/// `q = s = ⌈2/ε⌉`; the forest keeps `q·s` components.
pub fn switching_block_size(eps: f64) -> usize {
    (2.0 / eps - 1e-9).ceil().max(1.0) as usize
}

/// Forest with at most `⌈2/ε⌉²` components and at least `(1-ε)δ⁻` edges.
/// Returns [`ForestError::AugmentationStalled`] if no switching chain can
/// be started before the target is reached.
pub fn switching_path_forest(g: &ColouredDigraph, eps: f64) -> Result<ForestRun, ForestError> {
    check_eps(eps)?;
    let target = ceil_tol((1.0 - eps) * g.min_in_degree() as f64);
    let run = grow_switching_forest(g, eps, target)?;
    if run.stalled {
        let edges = run.forest.edge_count();
        return Err(ForestError::AugmentationStalled { forest: Box::new(run.forest), edges, target });
    }
    Ok(run)
}

/// Runs the switching construction until `target` edges or until no chain
/// can start. Passing `usize::MAX` grows the forest as far as it goes;
/// `stalled` is then always set and carries no error meaning.
pub fn grow_switching_forest(g: &ColouredDigraph, eps: f64, target: usize) -> Result<ForestRun, ForestError> {
    check_eps(eps)?;
    let mut audit = Audit::default();
    let n = g.n();
    let k = g.colour_count();
    let q = switching_block_size(eps);
    let s = q;
    let cap = q * s;
    let min_in = g.min_in_degree();
    let need = 9.0 / eps.powi(3);
    if (min_in as f64) < need {
        audit.unmet("switching-forest", format!("minimum in-degree {min_in} below 9/ε³ = {need:.1}"));
    }
    let present = g.colours_present();
    let mut f = Forest::new(n, k);

    // Initial forest: greedy paths from the lowest free vertex.
    let mut free_v = vec![true; n];
    let mut free_c = present.clone();
    while f.components() < cap {
        let Some(start) = (0..n).find(|&v| free_v[v]) else { break };
        let p = greedy_path_from(g, start, Restriction { colours: Some(&free_c), vertices: Some(&free_v) });
        f.member[start] = true;
        free_v[start] = false;
        for (i, c) in p.colours.iter().enumerate() {
            f.add_edge(p.vertices[i], p.vertices[i + 1], *c);
            free_v[p.vertices[i + 1]] = false;
            free_c[*c] = false;
        }
    }

    let mut rounds = 0;
    let mut stalled = false;
    while f.edges < target {
        match find_violation(g, &f, q, s, &present) {
            Some((level, v, tiers, block_of)) => {
                augment(g, &mut f, level, v, &tiers, &block_of);
                rounds += 1;
                while f.components() < cap {
                    match (0..n).find(|&v| !f.member[v]) {
                        Some(v) => f.member[v] = true,
                        None => break,
                    }
                }
            }
            None => {
                stalled = true;
                break;
            }
        }
    }
    debug_assert!(f.components() <= cap);
    Ok(ForestRun { forest: f.to_path_forest(), component_cap: cap, target_edges: target, rounds, stalled, audit })
}

type Violation = (usize, Vertex, Vec<Option<usize>>, Vec<Option<usize>>);

/// Builds the colour tiers `C_0 ⊆ C_1 ⊆ …` and looks for the first vertex
/// from which a switching chain can start. Returns its level, the vertex,
/// each colour's tier and each start vertex's block.
fn find_violation(g: &ColouredDigraph, f: &Forest, q: usize, s: usize, present: &[bool]) -> Option<Violation> {
    let n = g.n();
    let starts = f.starts();
    let mut block_of = vec![None; n];
    for (idx, &u) in starts.iter().enumerate() {
        if idx / q < s {
            block_of[u] = Some(idx / q);
        }
    }
    let mut tier: Vec<Option<usize>> =
        (0..g.colour_count()).map(|c| (present[c] && f.owner[c].is_none()).then_some(0)).collect();
    let mut count = vec![0usize; n];
    for i in 1..=s {
        let block: Vec<Vertex> = starts.iter().skip((i - 1) * q).take(q).copied().collect();
        if block.is_empty() {
            break;
        }
        count.iter_mut().for_each(|c| *c = 0);
        let mut touched = Vec::new();
        for &u in &block {
            for &(v, c) in g.in_edges(u) {
                if tier[c].is_some_and(|t| t < i) {
                    if count[v] == 0 {
                        touched.push(v);
                    }
                    count[v] += 1;
                }
            }
        }
        touched.sort_unstable();
        for &v in &touched {
            let is_end = f.member[v] && f.next[v].is_none();
            if (count[v] >= 2 && is_end) || !f.member[v] {
                return Some((i, v, tier, block_of));
            }
        }
        for &v in &touched {
            if count[v] >= 2 {
                let (_, c) = f.next[v].expect("non-end forest vertex has an out-edge");
                if tier[c].is_none() {
                    tier[c] = Some(i);
                }
            }
        }
    }
    None
}

/// Adds the edge out of `v` and follows the chain of released colours
/// down the tiers until a free colour is used.
fn augment(
    g: &ColouredDigraph,
    f: &mut Forest,
    level: usize,
    v: Vertex,
    tier: &[Option<usize>],
    block_of: &[Option<usize>],
) {
    let (mut level, mut v) = (level, v);
    loop {
        let own_start = if f.member[v] { Some(f.start_of(v)) } else { None };
        let pick = g
            .out_edges(v)
            .iter()
            .filter(|&&(u, c)| {
                block_of[u] == Some(level - 1)
                    && f.prev[u].is_none()
                    && Some(u) != own_start
                    && tier[c].is_some_and(|t| t < level)
            })
            .min_by_key(|&&(u, c)| (tier[c], u))
            .copied();
        let (u, c) = pick.expect("switching chain vertex has an admissible out-edge");
        let released = f.owner[c];
        if let Some(tail) = released {
            f.remove_out_edge(tail);
        }
        f.add_edge(v, u, c);
        match released {
            None => return,
            Some(tail) => {
                level = tier[c].expect("owned colour has a tier");
                v = tail;
            }
        }
    }
}
