//! Edge-coloured digraphs and the rainbow structures that live in them.
//!
//! Vertices and colours are dense `usize` ids. An undirected graph is stored
//! as a symmetric digraph in which an edge and its mirror share a colour.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Vertex = usize;
pub type Colour = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub tail: Vertex,
    pub head: Vertex,
    pub colour: Colour,
}

impl Edge {
    pub fn new(tail: Vertex, head: Vertex, colour: Colour) -> Self {
        Edge { tail, head, colour }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error("colouring is not proper ({} violating pairs)", .0.len())]
    ImproperColouring(Vec<ColourClash>),
}

/// Two edges at the same vertex, on the same side, with the same colour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColourClash {
    pub vertex: Vertex,
    pub side: Side,
    pub first: Edge,
    pub second: Edge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Out,
    In,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColouredDigraph {
    n: usize,
    colour_count: usize,
    // Both sorted by neighbour id.
    out_adj: Vec<Vec<(Vertex, Colour)>>,
    in_adj: Vec<Vec<(Vertex, Colour)>>,
    // Both sorted by colour id.
    out_by_colour: Vec<Vec<(Colour, Vertex)>>,
    in_by_colour: Vec<Vec<(Colour, Vertex)>>,
    edge_count: usize,
    symmetric: bool,
    vertex_transitive: bool,
}

impl ColouredDigraph {
    /// Builds a digraph from directed edges. Loops, out-of-range ids and
    /// repeated ordered pairs are rejected; an improper colouring is not
    /// (see [`validate_proper_colouring`]).
    pub fn new(n: usize, colour_count: usize, edges: &[Edge]) -> Result<Self, GraphError> {
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        for e in edges {
            if e.tail >= n || e.head >= n {
                return Err(GraphError::MalformedInput(format!(
                    "edge {}->{} has an endpoint outside 0..{n}",
                    e.tail, e.head
                )));
            }
            if e.colour >= colour_count {
                return Err(GraphError::MalformedInput(format!(
                    "edge {}->{} has colour {} outside 0..{colour_count}",
                    e.tail, e.head, e.colour
                )));
            }
            if e.tail == e.head {
                return Err(GraphError::MalformedInput(format!("loop at vertex {}", e.tail)));
            }
            out_adj[e.tail].push((e.head, e.colour));
            in_adj[e.head].push((e.tail, e.colour));
        }
        for (v, adj) in out_adj.iter_mut().enumerate() {
            adj.sort_unstable();
            if let Some(w) = adj.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(GraphError::MalformedInput(format!("more than one edge {v}->{}", w[0].0)));
            }
        }
        for adj in in_adj.iter_mut() {
            adj.sort_unstable();
        }
        let by_colour = |adj: &Vec<Vec<(Vertex, Colour)>>| -> Vec<Vec<(Colour, Vertex)>> {
            adj.iter()
                .map(|a| {
                    let mut b: Vec<_> = a.iter().map(|&(w, c)| (c, w)).collect();
                    b.sort_unstable();
                    b
                })
                .collect()
        };
        let out_by_colour = by_colour(&out_adj);
        let in_by_colour = by_colour(&in_adj);
        let mut g = ColouredDigraph {
            n,
            colour_count,
            out_adj,
            in_adj,
            out_by_colour,
            in_by_colour,
            edge_count: edges.len(),
            symmetric: false,
            vertex_transitive: false,
        };
        let symmetric = g.edges().all(|e| g.colour_of(e.head, e.tail) == Some(e.colour));
        g.symmetric = symmetric;
        Ok(g)
    }

    /// Builds the symmetric digraph of an undirected edge list; each
    /// `(u, v, c)` yields `u->v` and `v->u`, both coloured `c`.
    pub fn from_undirected(n: usize, colour_count: usize, edges: &[Edge]) -> Result<Self, GraphError> {
        let mut all = Vec::with_capacity(2 * edges.len());
        for e in edges {
            all.push(*e);
            all.push(Edge::new(e.head, e.tail, e.colour));
        }
        ColouredDigraph::new(n, colour_count, &all)
    }

    pub fn with_vertex_transitive(mut self, flag: bool) -> Self {
        self.vertex_transitive = flag;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn colour_count(&self) -> usize {
        self.colour_count
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// True when every edge has a mirror of the same colour.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Set by constructors that know the automorphism group acts
    /// transitively (Cayley graphs); exact searches may fix a start vertex.
    pub fn is_vertex_transitive(&self) -> bool {
        self.vertex_transitive
    }

    pub fn out_edges(&self, v: Vertex) -> &[(Vertex, Colour)] {
        &self.out_adj[v]
    }

    pub fn in_edges(&self, v: Vertex) -> &[(Vertex, Colour)] {
        &self.in_adj[v]
    }

    /// Out-edges of `v` as `(colour, head)`, sorted by colour.
    pub fn out_edges_by_colour(&self, v: Vertex) -> &[(Colour, Vertex)] {
        &self.out_by_colour[v]
    }

    pub fn in_edges_by_colour(&self, v: Vertex) -> &[(Colour, Vertex)] {
        &self.in_by_colour[v]
    }

    pub fn out_degree(&self, v: Vertex) -> usize {
        self.out_adj[v].len()
    }

    pub fn in_degree(&self, v: Vertex) -> usize {
        self.in_adj[v].len()
    }

    pub fn out_neighbour(&self, v: Vertex, c: Colour) -> Option<Vertex> {
        let adj = &self.out_by_colour[v];
        adj.binary_search_by_key(&c, |&(col, _)| col).ok().map(|i| adj[i].1)
    }

    pub fn in_neighbour(&self, v: Vertex, c: Colour) -> Option<Vertex> {
        let adj = &self.in_by_colour[v];
        adj.binary_search_by_key(&c, |&(col, _)| col).ok().map(|i| adj[i].1)
    }

    pub fn colour_of(&self, u: Vertex, v: Vertex) -> Option<Colour> {
        let adj = &self.out_adj[u];
        adj.binary_search_by_key(&v, |&(w, _)| w).ok().map(|i| adj[i].1)
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.colour_of(u, v).is_some()
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.out_adj.iter().enumerate().flat_map(|(u, adj)| adj.iter().map(move |&(v, c)| Edge::new(u, v, c)))
    }

    /// Colours that appear on at least one edge.
    pub fn colours_present(&self) -> Vec<bool> {
        let mut present = vec![false; self.colour_count];
        for e in self.edges() {
            present[e.colour] = true;
        }
        present
    }

    pub fn transpose(&self) -> ColouredDigraph {
        let edges: Vec<Edge> = self.edges().map(|e| Edge::new(e.head, e.tail, e.colour)).collect();
        ColouredDigraph::new(self.n, self.colour_count, &edges)
            .expect("transpose of a valid digraph is valid")
            .with_vertex_transitive(self.vertex_transitive)
    }

    /// Subgraph induced by the vertices with `keep_vertex[v]` and the edges
    /// whose colour has `keep_colour[c]`. Vertex ids are renumbered in
    /// increasing order; colour ids are kept.
    pub fn induced_subgraph(&self, keep_vertex: &[bool], keep_colour: &[bool]) -> Subgraph {
        assert_eq!(keep_vertex.len(), self.n);
        assert_eq!(keep_colour.len(), self.colour_count);
        let mut from_parent = vec![None; self.n];
        let mut to_parent = Vec::new();
        for v in 0..self.n {
            if keep_vertex[v] {
                from_parent[v] = Some(to_parent.len());
                to_parent.push(v);
            }
        }
        let edges: Vec<Edge> = self
            .edges()
            .filter(|e| keep_colour[e.colour])
            .filter_map(|e| Some(Edge::new(from_parent[e.tail]?, from_parent[e.head]?, e.colour)))
            .collect();
        let graph = ColouredDigraph::new(to_parent.len(), self.colour_count, &edges)
            .expect("induced subgraph of a valid digraph is valid");
        Subgraph { graph, to_parent, from_parent }
    }

    /// Induced subgraph on a vertex list, all colours kept.
    pub fn induced_on(&self, vertices: &[Vertex]) -> Subgraph {
        let mut keep = vec![false; self.n];
        for &v in vertices {
            keep[v] = true;
        }
        self.induced_subgraph(&keep, &vec![true; self.colour_count])
    }

    pub fn min_out_degree(&self) -> usize {
        (0..self.n).map(|v| self.out_degree(v)).min().unwrap_or(0)
    }

    pub fn min_in_degree(&self) -> usize {
        (0..self.n).map(|v| self.in_degree(v)).min().unwrap_or(0)
    }

    pub fn max_out_degree(&self) -> usize {
        (0..self.n).map(|v| self.out_degree(v)).max().unwrap_or(0)
    }

    /// Minimum semidegree, `min(δ⁺, δ⁻)`.
    pub fn min_semidegree(&self) -> usize {
        self.min_out_degree().min(self.min_in_degree())
    }

    /// Number of out-edges of `v` whose head is marked in `into` and whose
    /// colour is marked in `colours`.
    pub fn out_degree_into(&self, v: Vertex, into: &[bool], colours: &[bool]) -> usize {
        self.out_adj[v].iter().filter(|&&(w, c)| into[w] && colours[c]).count()
    }

    pub fn in_degree_from(&self, v: Vertex, from: &[bool], colours: &[bool]) -> usize {
        self.in_adj[v].iter().filter(|&&(w, c)| from[w] && colours[c]).count()
    }
}

/// An induced subgraph together with the map back to its parent's ids.
#[derive(Debug, Clone)]
pub struct Subgraph {
    pub graph: ColouredDigraph,
    pub to_parent: Vec<Vertex>,
    pub from_parent: Vec<Option<Vertex>>,
}

impl Subgraph {
    pub fn path_to_parent(&self, p: &RainbowPath) -> RainbowPath {
        RainbowPath { vertices: p.vertices.iter().map(|&v| self.to_parent[v]).collect(), colours: p.colours.clone() }
    }

    pub fn forest_to_parent(&self, f: &PathForest) -> PathForest {
        PathForest { paths: f.paths.iter().map(|p| self.path_to_parent(p)).collect() }
    }

    pub fn vertices_to_parent(&self, vs: &[Vertex]) -> Vec<Vertex> {
        vs.iter().map(|&v| self.to_parent[v]).collect()
    }
}

/// Every pair of same-coloured edges sharing a tail or sharing a head.
pub fn validate_proper_colouring(g: &ColouredDigraph) -> Vec<ColourClash> {
    let mut clashes = Vec::new();
    for v in 0..g.n() {
        for (side, adj) in [(Side::Out, g.out_edges_by_colour(v)), (Side::In, g.in_edges_by_colour(v))] {
            for i in 0..adj.len() {
                for j in i + 1..adj.len() {
                    if adj[i].0 != adj[j].0 {
                        break;
                    }
                    let mk = |(c, w): (Colour, Vertex)| match side {
                        Side::Out => Edge::new(v, w, c),
                        Side::In => Edge::new(w, v, c),
                    };
                    clashes.push(ColourClash { vertex: v, side, first: mk(adj[i]), second: mk(adj[j]) });
                }
            }
        }
    }
    clashes
}

/// `Ok` when the colouring is proper, otherwise every clash.
pub fn ensure_proper(g: &ColouredDigraph) -> Result<(), GraphError> {
    let clashes = validate_proper_colouring(g);
    if clashes.is_empty() {
        Ok(())
    } else {
        Err(GraphError::ImproperColouring(clashes))
    }
}

/// Symmetric digraph of a properly coloured undirected graph.
pub fn symmetrize(n: usize, colour_count: usize, edges: &[Edge]) -> Result<ColouredDigraph, GraphError> {
    let g = ColouredDigraph::from_undirected(n, colour_count, edges)?;
    ensure_proper(&g)?;
    Ok(g)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeStats {
    pub n: usize,
    pub edges: usize,
    pub min_out: usize,
    pub max_out: usize,
    pub min_in: usize,
    pub max_in: usize,
    pub avg_out: f64,
    /// Edge count per colour id.
    pub colour_counts: Vec<usize>,
}

pub fn degree_stats(g: &ColouredDigraph) -> DegreeStats {
    let outs = (0..g.n()).map(|v| g.out_degree(v));
    let ins = (0..g.n()).map(|v| g.in_degree(v));
    let mut colour_counts = vec![0; g.colour_count()];
    for e in g.edges() {
        colour_counts[e.colour] += 1;
    }
    DegreeStats {
        n: g.n(),
        edges: g.edge_count(),
        min_out: outs.clone().min().unwrap_or(0),
        max_out: outs.max().unwrap_or(0),
        min_in: ins.clone().min().unwrap_or(0),
        max_in: ins.max().unwrap_or(0),
        avg_out: if g.n() == 0 { 0.0 } else { g.edge_count() as f64 / g.n() as f64 },
        colour_counts,
    }
}

/// A path given by its vertex sequence and the colours of its edges
/// (`colours.len() + 1 == vertices.len()`). Rainbowness is checked by
/// [`validate_rainbow`], not by construction.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RainbowPath {
    pub vertices: Vec<Vertex>,
    pub colours: Vec<Colour>,
}

impl RainbowPath {
    pub fn single(v: Vertex) -> Self {
        RainbowPath { vertices: vec![v], colours: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.colours.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn start(&self) -> Vertex {
        self.vertices[0]
    }

    pub fn end(&self) -> Vertex {
        *self.vertices.last().expect("empty path has no end")
    }

    pub fn push(&mut self, colour: Colour, v: Vertex) {
        self.colours.push(colour);
        self.vertices.push(v);
    }

    /// Appends `other`, which must start at this path's end.
    pub fn join(&mut self, other: &RainbowPath) {
        assert_eq!(self.end(), other.start(), "paths do not meet");
        self.vertices.extend_from_slice(&other.vertices[1..]);
        self.colours.extend_from_slice(&other.colours);
    }

    pub fn reversed(&self) -> RainbowPath {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        let mut colours = self.colours.clone();
        colours.reverse();
        RainbowPath { vertices, colours }
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.colours.iter().enumerate().map(move |(i, &c)| Edge::new(self.vertices[i], self.vertices[i + 1], c))
    }

    /// The first `k` edges.
    pub fn truncated(&self, k: usize) -> RainbowPath {
        let k = k.min(self.len());
        RainbowPath { vertices: self.vertices[..=k].to_vec(), colours: self.colours[..k].to_vec() }
    }
}

/// A walk that may revisit vertices but uses each colour at most once.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RainbowWalk {
    pub vertices: Vec<Vertex>,
    pub colours: Vec<Colour>,
}

impl RainbowWalk {
    pub fn start_at(v: Vertex) -> Self {
        RainbowWalk { vertices: vec![v], colours: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.colours.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn end(&self) -> Vertex {
        *self.vertices.last().expect("empty walk has no end")
    }

    pub fn push(&mut self, colour: Colour, v: Vertex) {
        self.colours.push(colour);
        self.vertices.push(v);
    }

    pub fn distinct_vertices(&self) -> usize {
        let mut vs = self.vertices.clone();
        vs.sort_unstable();
        vs.dedup();
        vs.len()
    }

    /// Number of colours used plus one, minus the number of distinct
    /// vertices visited; zero exactly when the walk is a path.
    pub fn repetition_count(&self) -> usize {
        (self.len() + 1).saturating_sub(self.distinct_vertices())
    }
}

impl From<RainbowPath> for RainbowWalk {
    fn from(p: RainbowPath) -> Self {
        RainbowWalk { vertices: p.vertices, colours: p.colours }
    }
}

/// Vertex-disjoint, colour-disjoint rainbow paths.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PathForest {
    pub paths: Vec<RainbowPath>,
}

impl PathForest {
    pub fn edge_count(&self) -> usize {
        self.paths.iter().map(|p| p.len()).sum()
    }

    pub fn component_count(&self) -> usize {
        self.paths.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.paths.iter().flat_map(|p| p.vertices.iter().copied())
    }

    pub fn colours(&self) -> impl Iterator<Item = Colour> + '_ {
        self.paths.iter().flat_map(|p| p.colours.iter().copied())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum RainbowViolation {
    #[error("structure has no vertices")]
    Empty,
    #[error("{vertices} vertices but {colours} colours")]
    LengthMismatch { vertices: usize, colours: usize },
    #[error("vertex {0} is out of range")]
    VertexOutOfRange(Vertex),
    #[error("step {index}: {tail}->{head} is not an edge")]
    NotAnEdge { index: usize, tail: Vertex, head: Vertex },
    #[error("step {index}: edge has colour {actual}, structure says {claimed}")]
    WrongColour { index: usize, claimed: Colour, actual: Colour },
    #[error("colour {0} is used twice")]
    ColourRepeated(Colour),
    #[error("vertex {0} is visited twice")]
    VertexRepeated(Vertex),
    #[error("vertex {0} lies on two paths")]
    VertexShared(Vertex),
    #[error("colour {0} is used on two paths")]
    ColourShared(Colour),
}

/// Anything that can be checked with [`validate_rainbow`].
pub trait RainbowStructure {
    fn check_in(&self, g: &ColouredDigraph) -> Result<(), RainbowViolation>;
}

pub fn validate_rainbow<S: RainbowStructure + ?Sized>(g: &ColouredDigraph, s: &S) -> Result<(), RainbowViolation> {
    s.check_in(g)
}

fn check_sequence(
    g: &ColouredDigraph,
    vertices: &[Vertex],
    colours: &[Colour],
    allow_revisit: bool,
) -> Result<(), RainbowViolation> {
    if vertices.is_empty() {
        return Err(RainbowViolation::Empty);
    }
    if vertices.len() != colours.len() + 1 {
        return Err(RainbowViolation::LengthMismatch { vertices: vertices.len(), colours: colours.len() });
    }
    if let Some(&v) = vertices.iter().find(|&&v| v >= g.n()) {
        return Err(RainbowViolation::VertexOutOfRange(v));
    }
    for (i, &c) in colours.iter().enumerate() {
        let (u, v) = (vertices[i], vertices[i + 1]);
        match g.colour_of(u, v) {
            None => return Err(RainbowViolation::NotAnEdge { index: i, tail: u, head: v }),
            Some(actual) if actual != c => return Err(RainbowViolation::WrongColour { index: i, claimed: c, actual }),
            _ => {}
        }
    }
    let mut seen = vec![false; g.colour_count()];
    for &c in colours {
        if std::mem::replace(&mut seen[c], true) {
            return Err(RainbowViolation::ColourRepeated(c));
        }
    }
    if !allow_revisit {
        let mut on = vec![false; g.n()];
        for &v in vertices {
            if std::mem::replace(&mut on[v], true) {
                return Err(RainbowViolation::VertexRepeated(v));
            }
        }
    }
    Ok(())
}

impl RainbowStructure for RainbowPath {
    fn check_in(&self, g: &ColouredDigraph) -> Result<(), RainbowViolation> {
        check_sequence(g, &self.vertices, &self.colours, false)
    }
}

impl RainbowStructure for RainbowWalk {
    fn check_in(&self, g: &ColouredDigraph) -> Result<(), RainbowViolation> {
        check_sequence(g, &self.vertices, &self.colours, true)
    }
}

impl RainbowStructure for PathForest {
    fn check_in(&self, g: &ColouredDigraph) -> Result<(), RainbowViolation> {
        let mut vertex_seen = vec![false; g.n()];
        let mut colour_seen = vec![false; g.colour_count()];
        for p in &self.paths {
            p.check_in(g)?;
            for &v in &p.vertices {
                if std::mem::replace(&mut vertex_seen[v], true) {
                    return Err(RainbowViolation::VertexShared(v));
                }
            }
            for &c in &p.colours {
                if std::mem::replace(&mut colour_seen[c], true) {
                    return Err(RainbowViolation::ColourShared(c));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn e(u: usize, v: usize, c: usize) -> Edge {
        Edge::new(u, v, c)
    }

    #[test]
    fn clash_is_reported_once() {
        let g = ColouredDigraph::new(3, 1, &[e(0, 1, 0), e(0, 2, 0)]).unwrap();
        let clashes = validate_proper_colouring(&g);
        assert_eq!(clashes.len(), 1);
        assert_eq!(clashes[0].vertex, 0);
        assert_eq!(clashes[0].side, Side::Out);
        assert_eq!((clashes[0].first, clashes[0].second), (e(0, 1, 0), e(0, 2, 0)));
    }

    #[test]
    fn in_side_clash() {
        let g = ColouredDigraph::new(3, 2, &[e(0, 2, 1), e(1, 2, 1)]).unwrap();
        let clashes = validate_proper_colouring(&g);
        assert_eq!(clashes.len(), 1);
        assert_eq!(clashes[0].side, Side::In);
    }

    #[test]
    fn rejects_loops_and_parallel_edges() {
        assert!(matches!(ColouredDigraph::new(2, 2, &[e(0, 0, 0)]), Err(GraphError::MalformedInput(_))));
        assert!(matches!(ColouredDigraph::new(2, 2, &[e(0, 1, 0), e(0, 1, 1)]), Err(GraphError::MalformedInput(_))));
        // Antiparallel is fine.
        assert!(ColouredDigraph::new(2, 2, &[e(0, 1, 0), e(1, 0, 1)]).is_ok());
    }

    #[test]
    fn symmetrize_rejects_improper_input() {
        let r = symmetrize(3, 1, &[e(0, 1, 0), e(1, 2, 0)]);
        assert!(matches!(r, Err(GraphError::ImproperColouring(_))));
        let g = symmetrize(3, 2, &[e(0, 1, 0), e(1, 2, 1)]).unwrap();
        assert!(g.is_symmetric());
        assert_eq!(g.edge_count(), 4);
    }

    #[test]
    fn repeated_colour_on_path() {
        let g = ColouredDigraph::new(3, 1, &[e(0, 1, 0), e(1, 2, 0)]).unwrap();
        let p = RainbowPath { vertices: vec![0, 1, 2], colours: vec![0, 0] };
        assert_eq!(validate_rainbow(&g, &p), Err(RainbowViolation::ColourRepeated(0)));
    }

    #[test]
    fn walk_may_revisit_but_path_may_not() {
        let g = ColouredDigraph::new(2, 2, &[e(0, 1, 0), e(1, 0, 1)]).unwrap();
        let w = RainbowWalk { vertices: vec![0, 1, 0], colours: vec![0, 1] };
        assert_eq!(validate_rainbow(&g, &w), Ok(()));
        assert_eq!(w.repetition_count(), 1);
        let p = RainbowPath { vertices: vec![0, 1, 0], colours: vec![0, 1] };
        assert_eq!(validate_rainbow(&g, &p), Err(RainbowViolation::VertexRepeated(0)));
    }

    #[test]
    fn forest_sharing() {
        let g = ColouredDigraph::new(4, 2, &[e(0, 1, 0), e(2, 3, 0), e(1, 2, 1)]).unwrap();
        let f = PathForest {
            paths: vec![
                RainbowPath { vertices: vec![0, 1], colours: vec![0] },
                RainbowPath { vertices: vec![2, 3], colours: vec![0] },
            ],
        };
        assert_eq!(validate_rainbow(&g, &f), Err(RainbowViolation::ColourShared(0)));
        let f = PathForest {
            paths: vec![
                RainbowPath { vertices: vec![0, 1], colours: vec![0] },
                RainbowPath { vertices: vec![1, 2], colours: vec![1] },
            ],
        };
        assert_eq!(validate_rainbow(&g, &f), Err(RainbowViolation::VertexShared(1)));
    }

    #[test]
    fn wrong_colour_and_missing_edge() {
        let g = ColouredDigraph::new(3, 2, &[e(0, 1, 0)]).unwrap();
        let p = RainbowPath { vertices: vec![0, 1], colours: vec![1] };
        assert!(matches!(validate_rainbow(&g, &p), Err(RainbowViolation::WrongColour { .. })));
        let p = RainbowPath { vertices: vec![1, 2], colours: vec![0] };
        assert!(matches!(validate_rainbow(&g, &p), Err(RainbowViolation::NotAnEdge { .. })));
    }

    #[test]
    fn induced_keeps_back_map() {
        let g = ColouredDigraph::new(4, 3, &[e(0, 1, 0), e(1, 2, 1), e(2, 3, 2), e(3, 0, 0)]).unwrap();
        let sub = g.induced_subgraph(&[false, true, true, true], &[true, true, false]);
        assert_eq!(sub.to_parent, vec![1, 2, 3]);
        assert_eq!(sub.graph.edge_count(), 1);
        assert_eq!(sub.graph.colour_of(0, 1), Some(1));
    }

    #[test]
    fn stats_of_directed_triangle() {
        let g = ColouredDigraph::new(3, 2, &[e(0, 1, 0), e(1, 2, 0), e(2, 0, 1)]).unwrap();
        let s = degree_stats(&g);
        assert_eq!((s.min_out, s.max_out, s.min_in, s.max_in), (1, 1, 1, 1));
        assert_eq!(s.colour_counts, vec![2, 1]);
        assert!((s.avg_out - 1.0).abs() < 1e-12);
    }

    fn arb_graph() -> impl Strategy<Value = ColouredDigraph> {
        (2usize..9, 1usize..6).prop_flat_map(|(n, k)| {
            proptest::collection::vec((0..n, 0..n, 0..k), 0..30).prop_map(move |raw| {
                let mut seen = std::collections::HashSet::new();
                let edges: Vec<Edge> = raw
                    .into_iter()
                    .filter(|&(u, v, _)| u != v && seen.insert((u, v)))
                    .map(|(u, v, c)| e(u, v, c))
                    .collect();
                ColouredDigraph::new(n, k, &edges).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn transpose_is_an_involution(g in arb_graph()) {
            prop_assert_eq!(g.transpose().transpose(), g);
        }

        #[test]
        fn clashes_vanish_iff_proper(g in arb_graph()) {
            let clashes = validate_proper_colouring(&g);
            let mut proper = true;
            for v in 0..g.n() {
                let mut outs: Vec<_> = g.out_edges(v).iter().map(|x| x.1).collect();
                let mut ins: Vec<_> = g.in_edges(v).iter().map(|x| x.1).collect();
                outs.sort(); ins.sort();
                proper &= outs.windows(2).all(|w| w[0] != w[1]);
                proper &= ins.windows(2).all(|w| w[0] != w[1]);
            }
            prop_assert_eq!(clashes.is_empty(), proper);
        }

        #[test]
        fn induced_subgraph_loses_no_qualifying_edge(g in arb_graph(), mask in any::<u16>(), cmask in any::<u8>()) {
            let keep: Vec<bool> = (0..g.n()).map(|v| mask >> v & 1 == 1).collect();
            let keep_c: Vec<bool> = (0..g.colour_count()).map(|c| cmask >> c & 1 == 1).collect();
            let sub = g.induced_subgraph(&keep, &keep_c);
            let expected = g.edges().filter(|e| keep[e.tail] && keep[e.head] && keep_c[e.colour]).count();
            prop_assert_eq!(sub.graph.edge_count(), expected);
            for e in sub.graph.edges() {
                prop_assert_eq!(g.colour_of(sub.to_parent[e.tail], sub.to_parent[e.head]), Some(e.colour));
            }
        }
    }
}
