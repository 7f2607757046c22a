//! Instance files and instance generators.
//!
//! File format, one item per line:
//!
//! ```text
//! RWG1 <directed|undirected> n m k
//! # key=value            (zero or more metadata lines)
//! u v c                  (m edge lines; undirected files list u<v once)
//! ```

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use thiserror::Error;

use crate::graph::{ensure_proper, ColouredDigraph, Edge, GraphError};
use crate::group::{cayley_graph, GeneratorSet, GroupError, GroupTable};
use crate::rng::stage_rng;

pub const MAGIC: &str = "RWG1";

/// Attempts per matching, and whole-graph restarts, before giving up.
const MATCHING_TRIES: usize = 2000;
const RESTARTS: usize = 50;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("unrecognised generator `{0}`")]
    UnknownGenerator(String),
    #[error("generator gave up: {0}")]
    GenFailed(String),
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub graph: ColouredDigraph,
    pub undirected: bool,
    pub meta: Vec<(String, String)>,
    /// Edge lines in file order.
    lines: Vec<Edge>,
}

impl Instance {
    /// Wraps a graph; undirected when the graph is symmetric and
    /// `undirected` is requested.
    pub fn from_graph(graph: ColouredDigraph, undirected: bool, meta: Vec<(String, String)>) -> Self {
        let undirected = undirected && graph.is_symmetric();
        let lines = graph.edges().filter(|e| !undirected || e.tail < e.head).collect();
        Instance { graph, undirected, meta, lines }
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn parse(text: &str) -> Result<Self, IoError> {
        let mut lines = text.lines().enumerate();
        let perr = |line: usize, message: &str| IoError::Parse { line: line + 1, message: message.to_string() };
        let (_, header) = lines.next().ok_or_else(|| perr(0, "empty file"))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 5 || h[0] != MAGIC {
            return Err(perr(0, "expected `RWG1 <directed|undirected> n m k`"));
        }
        let undirected = match h[1] {
            "directed" => false,
            "undirected" => true,
            _ => return Err(perr(0, "orientation must be directed or undirected")),
        };
        let num = |s: &str| s.parse::<usize>().map_err(|_| perr(0, "n, m, k must be integers"));
        let (n, m, k) = (num(h[2])?, num(h[3])?, num(h[4])?);
        let mut meta = Vec::new();
        let mut edges = Vec::with_capacity(m);
        for (i, line) in lines {
            if let Some(rest) = line.strip_prefix('#') {
                if !edges.is_empty() {
                    return Err(perr(i, "metadata after edge lines"));
                }
                let (key, value) = rest.trim().split_once('=').ok_or_else(|| perr(i, "metadata must be key=value"))?;
                meta.push((key.trim().to_string(), value.trim().to_string()));
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let t: Vec<usize> = line
                .split_whitespace()
                .map(|x| x.parse::<usize>())
                .collect::<Result<_, _>>()
                .map_err(|_| perr(i, "edge line must be three integers"))?;
            if t.len() != 3 {
                return Err(perr(i, "edge line must be three integers"));
            }
            if undirected && t[0] >= t[1] {
                return Err(perr(i, "undirected edges are stored with u < v"));
            }
            edges.push(Edge::new(t[0], t[1], t[2]));
        }
        if edges.len() != m {
            return Err(perr(0, &format!("header says {m} edges, found {}", edges.len())));
        }
        let graph = if undirected {
            ColouredDigraph::from_undirected(n, k, &edges)?
        } else {
            ColouredDigraph::new(n, k, &edges)?
        };
        let vt = meta.iter().any(|(k, v)| k == "vertex_transitive" && v == "true");
        Ok(Instance { graph: graph.with_vertex_transitive(vt), undirected, meta, lines: edges })
    }

    pub fn to_text(&self) -> String {
        let g = &self.graph;
        let orientation = if self.undirected { "undirected" } else { "directed" };
        let mut out = format!("{MAGIC} {orientation} {} {} {}\n", g.n(), self.lines.len(), g.colour_count());
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k}={v}");
        }
        for e in &self.lines {
            let _ = writeln!(out, "{} {} {}", e.tail, e.head, e.colour);
        }
        out
    }
}

/// Union of `d` edge-disjoint random perfect matchings on `n` (even)
/// vertices, matching `i` coloured `i`. Each matching is built by random
/// greedy pairing that avoids earlier edges, retried when it gets stuck; when `2d > n` the matchings are instead drawn
/// from a randomly relabelled round-robin factorisation.
pub fn random_regular_proper(n: usize, d: usize, seed: u64) -> Result<ColouredDigraph, IoError> {
    if n % 2 == 1 || d >= n.max(1) {
        return Err(IoError::GenFailed(format!("need even n and d < n, got n={n}, d={d}")));
    }
    let mut rng = stage_rng(seed, "regular-proper");
    let mut vertices: Vec<usize> = (0..n).collect();
    if 2 * d <= n {
        'restart: for _ in 0..RESTARTS {
            let mut used: HashSet<(usize, usize)> = HashSet::new();
            let mut edges = Vec::with_capacity(n * d / 2);
            for c in 0..d {
                let mut placed = false;
                for _ in 0..MATCHING_TRIES {
                    if let Some(pairs) = random_matching_avoiding(&mut vertices, &used, &mut rng) {
                        for (u, v) in pairs {
                            used.insert((u, v));
                            edges.push(Edge::new(u, v, c));
                        }
                        placed = true;
                        break;
                    }
                }
                if !placed {
                    continue 'restart;
                }
            }
            return Ok(ColouredDigraph::from_undirected(n, d, &edges)?);
        }
        return Err(IoError::GenFailed(format!("no {d} disjoint matchings on {n} vertices")));
    }
    vertices.shuffle(&mut rng);
    let mut rounds: Vec<usize> = (0..n - 1).collect();
    rounds.shuffle(&mut rng);
    let mut edges = Vec::new();
    for (c, &r) in rounds[..d].iter().enumerate() {
        for (u, v) in round_robin_round(n, r) {
            let (a, b) = (vertices[u], vertices[v]);
            edges.push(Edge::new(a.min(b), a.max(b), c));
        }
    }
    Ok(ColouredDigraph::from_undirected(n, d, &edges)?)
}

/// Pairs the shuffled vertices greedily, each with a uniformly random
/// unmatched partner not already joined to it. `None` when stuck.
fn random_matching_avoiding(
    vertices: &mut [usize],
    used: &HashSet<(usize, usize)>,
    rng: &mut impl rand::Rng,
) -> Option<Vec<(usize, usize)>> {
    vertices.shuffle(rng);
    let mut free: Vec<usize> = vertices.to_vec();
    let mut pairs = Vec::with_capacity(free.len() / 2);
    while let Some(v) = free.pop() {
        let options: Vec<usize> =
            (0..free.len()).filter(|&i| !used.contains(&(v.min(free[i]), v.max(free[i])))).collect();
        let &i = options.choose(rng)?;
        let w = free.swap_remove(i);
        pairs.push((v.min(w), v.max(w)));
    }
    Some(pairs)
}

/// Round `r` of the circle-method 1-factorisation of `K_n`.
fn round_robin_round(n: usize, r: usize) -> Vec<(usize, usize)> {
    let m = n - 1;
    let mut pairs = vec![(m, r)];
    for i in 1..n / 2 {
        pairs.push(((r + i) % m, (r + m - i) % m));
    }
    pairs
}

/// `K_n` (n even) coloured by the round-robin 1-factorisation.
pub fn complete_proper(n: usize) -> Result<ColouredDigraph, IoError> {
    if n < 2 || n % 2 == 1 {
        return Err(IoError::GenFailed(format!("complete-proper needs even n >= 2, got {n}")));
    }
    let mut edges = Vec::new();
    for r in 0..n - 1 {
        for (u, v) in round_robin_round(n, r) {
            edges.push(Edge::new(u.min(v), u.max(v), r));
        }
    }
    Ok(ColouredDigraph::from_undirected(n, n - 1, &edges)?)
}

/// Builds an instance from a generator spec; see the crate README for the
/// accepted forms.
pub fn generate(spec: &str) -> Result<Instance, IoError> {
    let unknown = || IoError::UnknownGenerator(spec.to_string());
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| unknown());
    let mut meta = vec![("generator".to_string(), spec.to_string())];
    match parts[0] {
        "regular-proper" if parts.len() == 4 => {
            let (n, d) = (num(parts[1])?, num(parts[2])?);
            let seed = parts[3].parse::<u64>().map_err(|_| unknown())?;
            meta.push(("seed".into(), seed.to_string()));
            let g = random_regular_proper(n, d, seed)?;
            Ok(Instance::from_graph(g, true, meta))
        }
        "complete-proper" if parts.len() == 2 => {
            let g = complete_proper(num(parts[1])?)?;
            Ok(Instance::from_graph(g, true, meta))
        }
        "circulant" if parts.len() == 3 => {
            let n = num(parts[1])?;
            let group = GroupTable::cyclic(n);
            let elems = parse_elements(parts[2], n).ok_or_else(unknown)?;
            cayley_instance(&group, GeneratorSet::new(&group, elems)?, meta)
        }
        "cayley" => {
            let rest = &spec["cayley:".len()..];
            if let Some(idx) = rest.find(":random:") {
                let group = GroupTable::from_spec(&rest[..idx])?;
                let tail: Vec<&str> = rest[idx + ":random:".len()..].split(':').collect();
                if tail.len() != 2 {
                    return Err(unknown());
                }
                let d = num(tail[0])?;
                let seed = tail[1].parse::<u64>().map_err(|_| unknown())?;
                meta.push(("seed".into(), seed.to_string()));
                let s = GeneratorSet::random(&group, d, &mut stage_rng(seed, "cayley-subset"))?;
                cayley_instance(&group, s, meta)
            } else {
                let (gspec, list) = rest.rsplit_once(':').ok_or_else(unknown)?;
                let group = GroupTable::from_spec(gspec)?;
                let s = if list == "all" {
                    GeneratorSet::all_nonidentity(&group)
                } else {
                    GeneratorSet::new(&group, parse_elements(list, usize::MAX).ok_or_else(unknown)?)?
                };
                cayley_instance(&group, s, meta)
            }
        }
        _ => Err(unknown()),
    }
}

fn parse_elements(list: &str, modulus: usize) -> Option<Vec<usize>> {
    list.split(',')
        .map(|t| {
            let t = t.trim();
            if modulus != usize::MAX {
                let x: i64 = t.parse().ok()?;
                Some(x.rem_euclid(modulus as i64) as usize)
            } else {
                t.parse().ok()
            }
        })
        .collect()
}

fn cayley_instance(group: &GroupTable, s: GeneratorSet, mut meta: Vec<(String, String)>) -> Result<Instance, IoError> {
    let cay = cayley_graph(group, &s)?;
    ensure_proper(&cay.graph)?;
    meta.push(("group".into(), group.label().to_string()));
    let list: Vec<String> = s.elements().iter().map(|a| a.to_string()).collect();
    meta.push(("elements".into(), list.join(",")));
    meta.push(("vertex_transitive".into(), "true".into()));
    let undirected = cay.graph.is_symmetric();
    Ok(Instance::from_graph(cay.graph, undirected, meta))
}

/// Recovers the group and generating set recorded by a Cayley generator.
pub fn cayley_parts(inst: &Instance) -> Option<Result<(GroupTable, GeneratorSet), IoError>> {
    let group = inst.meta("group")?;
    let elems = inst.meta("elements")?;
    Some((|| {
        let group = GroupTable::from_spec(group)?;
        let list = parse_elements(elems, usize::MAX)
            .ok_or_else(|| IoError::Parse { line: 0, message: "bad elements list".into() })?;
        let s = GeneratorSet::new(&group, list)?;
        Ok((group, s))
    })())
}
