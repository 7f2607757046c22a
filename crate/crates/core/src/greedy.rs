//! Greedy rainbow paths.
//!
//! A path that cannot be extended at its end has length at least half the
//! minimum out-degree: the unused colours at the end vertex all lead back
//! onto the path.

use crate::graph::{Colour, ColouredDigraph, RainbowPath, Vertex};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartPolicy {
    Vertex(Vertex),
    /// The lowest-id vertex with positive out-degree.
    LowestId,
    /// Try every vertex and keep the longest path.
    EveryVertex,
}

/// Optional restrictions on a greedy run.
#[derive(Debug, Clone, Copy, Default)]
pub struct Restriction<'a> {
    pub colours: Option<&'a [bool]>,
    pub vertices: Option<&'a [bool]>,
}

impl Restriction<'_> {
    fn colour_ok(&self, c: Colour) -> bool {
        self.colours.is_none_or(|m| m[c])
    }

    fn vertex_ok(&self, v: Vertex) -> bool {
        self.vertices.is_none_or(|m| m[v])
    }
}

/// Extends from `start` until stuck, always stepping to the lowest-id
/// out-neighbour that is off the path and reached by an unused colour.
pub fn greedy_path_from(g: &ColouredDigraph, start: Vertex, r: Restriction) -> RainbowPath {
    let mut on_path = vec![false; g.n()];
    let mut used = vec![false; g.colour_count()];
    let mut path = RainbowPath::single(start);
    on_path[start] = true;
    let mut v = start;
    while let Some(&(w, c)) =
        g.out_edges(v).iter().find(|&&(w, c)| !on_path[w] && !used[c] && r.colour_ok(c) && r.vertex_ok(w))
    {
        on_path[w] = true;
        used[c] = true;
        path.push(c, w);
        v = w;
    }
    path
}

/// Greedy path with length at least `⌈δ⁺/2⌉`.
pub fn greedy_min_outdeg_path(g: &ColouredDigraph, start: StartPolicy) -> RainbowPath {
    greedy_restricted(g, start, Restriction::default())
}

pub fn greedy_restricted(g: &ColouredDigraph, start: StartPolicy, r: Restriction) -> RainbowPath {
    if g.n() == 0 {
        return RainbowPath::default();
    }
    match start {
        StartPolicy::Vertex(v) => greedy_path_from(g, v, r),
        StartPolicy::LowestId => {
            let v = (0..g.n()).find(|&v| r.vertex_ok(v) && g.out_degree(v) > 0).unwrap_or(0);
            greedy_path_from(g, v, r)
        }
        StartPolicy::EveryVertex => longest_from(g, (0..g.n()).filter(|&v| r.vertex_ok(v)), r),
    }
}

fn longest_from(g: &ColouredDigraph, starts: impl Iterator<Item = Vertex>, r: Restriction) -> RainbowPath {
    let mut best: Option<RainbowPath> = None;
    let cap = g.n().saturating_sub(1);
    for v in starts {
        let p = greedy_path_from(g, v, r);
        if best.as_ref().is_none_or(|b| p.len() > b.len()) {
            let done = p.len() >= cap;
            best = Some(p);
            if done {
                break;
            }
        }
    }
    best.unwrap_or_default()
}

/// Repeatedly deletes vertices whose remaining out-degree is below
/// `threshold`; returns the survivors.
pub fn peel_to_core(g: &ColouredDigraph, threshold: f64) -> Vec<bool> {
    let mut alive = vec![true; g.n()];
    let mut deg: Vec<usize> = (0..g.n()).map(|v| g.out_degree(v)).collect();
    let mut stack: Vec<Vertex> = (0..g.n()).filter(|&v| (deg[v] as f64) < threshold).collect();
    while let Some(v) = stack.pop() {
        if !alive[v] {
            continue;
        }
        alive[v] = false;
        for &(u, _) in g.in_edges(v) {
            if alive[u] {
                deg[u] -= 1;
                if (deg[u] as f64) < threshold && (deg[u] + 1) as f64 >= threshold {
                    stack.push(u);
                }
            }
        }
    }
    alive
}

/// For a symmetric digraph with average degree `d`: peels to the subgraph
/// of minimum degree at least `d/2`, then keeps the longest greedy path
/// started from a vertex of that core. Length is at least `d/4`.
pub fn greedy_avg_degree_path(g: &ColouredDigraph) -> RainbowPath {
    greedy_avg_degree_restricted(g, Restriction::default())
}

pub fn greedy_avg_degree_restricted(g: &ColouredDigraph, r: Restriction) -> RainbowPath {
    let live: Vec<bool> = (0..g.n()).map(|v| r.vertex_ok(v)).collect();
    let colours: Vec<bool> = (0..g.colour_count()).map(|c| r.colour_ok(c)).collect();
    let sub = g.induced_subgraph(&live, &colours);
    let h = &sub.graph;
    if h.n() == 0 {
        return RainbowPath::default();
    }
    let d = h.edge_count() as f64 / h.n() as f64;
    let core = peel_to_core(h, d / 2.0);
    let from_core = longest_from(h, (0..h.n()).filter(|&v| core[v]), Restriction::default());
    let mut best = from_core;
    if best.colours.is_empty() {
        best = longest_from(h, 0..h.n(), Restriction::default());
    }
    sub.path_to_parent(&best)
}
