//! Reservoir sampling, short rainbow connections through the reservoir,
//! and the long-path pipelines built on them.
//!
//! The pipelines set aside a random vertex and colour reservoir, grow a
//! path forest in the rest, then join consecutive components by short
//! rainbow paths that only use reservoir vertices and colours.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audit::Audit;
use crate::dense_core::{pass_to_expander, CutRecord, PassConfig, PassError};
use crate::expander::{is_prime, robust_out_neighbourhood, zp_expansion_params};
use crate::forest::{switching_path_forest, ForestError};
use crate::graph::{validate_rainbow, Colour, ColouredDigraph, PathForest, RainbowPath, Vertex};
use crate::greedy::{greedy_min_outdeg_path, StartPolicy};
use crate::group::{cayley_graph, GeneratorSet, GroupTable};
use crate::params::ParamSet;
use crate::rng::{stage_rng, stage_seed};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConnectError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no reservoir met the size and degree conditions in {draws} draws")]
    ReservoirFailed { draws: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// `closest_layer` is the smallest layer index (distance class from
    /// `u`) any backward chain reached before the search gave up.
    #[error("no rainbow connection {u} -> {v} (closest layer {closest_layer}, {explored} nodes explored)")]
    ConnectFailed { u: Vertex, v: Vertex, closest_layer: usize, explored: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("reservoir: {0}")]
    Reservoir(ConnectError),
    #[error("path forest: {0}")]
    Forest(ForestError),
    #[error("connection: {0}")]
    Connect(ConnectError),
    #[error("pass to expander: {0}")]
    Pass(PassError),
}

/// Random vertex and colour sets held back for connections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reservoir {
    pub vertices: Vec<bool>,
    pub colours: Vec<bool>,
    pub p: f64,
    pub seed: u64,
    /// Draws used, including the accepted one.
    pub draws: usize,
    /// At most `2pn` vertices.
    pub size_ok: bool,
    /// Every vertex keeps a `(1-3p)` fraction of its out- and in-degree
    /// outside the reservoir.
    pub degrees_ok: bool,
    /// Exclusion budget per connection, as a fraction of `n`.
    pub beta: f64,
    /// Reject connections whose exclusions exceed `βn`.
    pub strict: bool,
}

impl Reservoir {
    pub fn vertex_count(&self) -> usize {
        self.vertices.iter().filter(|&&b| b).count()
    }

    pub fn colour_count(&self) -> usize {
        self.colours.iter().filter(|&&b| b).count()
    }

    pub fn complement_vertices(&self) -> Vec<bool> {
        self.vertices.iter().map(|&b| !b).collect()
    }

    pub fn complement_colours(&self) -> Vec<bool> {
        self.colours.iter().map(|&b| !b).collect()
    }
}

/// Draws `V₀` and `C₀` as independent `p`-random sets until both the size
/// and the degree-retention conditions hold, at most `params.retry_cap`
/// times. `beta` defaults to `p³ν/100` with `ν = params.nu` (or 0).
pub fn sample_reservoir(g: &ColouredDigraph, p: f64, params: &ParamSet, seed: u64) -> Result<Reservoir, ConnectError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(ConnectError::InvalidParameter(format!("sampling rate must lie in [0, 1], got {p}")));
    }
    let n = g.n();
    let draws = params.retry_cap.max(1);
    for draw in 0..draws {
        let mut rng = stage_rng(seed, &format!("reservoir-{draw}"));
        let vertices: Vec<bool> = (0..n).map(|_| rng.gen_bool(p)).collect();
        let colours: Vec<bool> = (0..g.colour_count()).map(|_| rng.gen_bool(p)).collect();
        let size_ok = vertices.iter().filter(|&&b| b).count() as f64 <= 2.0 * p * n as f64;
        let degrees_ok = retains_degrees(g, &vertices, &colours, p);
        if size_ok && degrees_ok {
            let beta = params.beta_for(p, params.nu.unwrap_or(0.0));
            return Ok(Reservoir {
                vertices,
                colours,
                p,
                seed,
                draws: draw + 1,
                size_ok,
                degrees_ok,
                beta,
                strict: params.strict,
            });
        }
    }
    Err(ConnectError::ReservoirFailed { draws })
}

fn retains_degrees(g: &ColouredDigraph, vertices: &[bool], colours: &[bool], p: f64) -> bool {
    let keep = 1.0 - 3.0 * p;
    (0..g.n()).all(|v| {
        let out = g.out_edges(v).iter().filter(|&&(w, c)| !vertices[w] && !colours[c]).count();
        let inn = g.in_edges(v).iter().filter(|&&(w, c)| !vertices[w] && !colours[c]).count();
        out as f64 >= keep * g.out_degree(v) as f64 - 1e-9 && inn as f64 >= keep * g.in_degree(v) as f64 - 1e-9
    })
}

/// Vertices and colours consumed by earlier connections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exclusions {
    pub vertices: Vec<bool>,
    pub colours: Vec<bool>,
    pub vertex_count: usize,
    pub colour_count: usize,
}

impl Exclusions {
    pub fn new(n: usize, colour_count: usize) -> Self {
        Exclusions { vertices: vec![false; n], colours: vec![false; colour_count], vertex_count: 0, colour_count: 0 }
    }

    /// Marks the internal vertices and all colours of `path`.
    pub fn add_path(&mut self, path: &RainbowPath) {
        let k = path.vertices.len();
        for &v in path.vertices.iter().skip(1).take(k.saturating_sub(2)) {
            if !self.vertices[v] {
                self.vertices[v] = true;
                self.vertex_count += 1;
            }
        }
        for &c in &path.colours {
            if !self.colours[c] {
                self.colours[c] = true;
                self.colour_count += 1;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Connection {
    pub path: RainbowPath,
    /// Layers of the distance structure around `u`.
    pub layers: usize,
    /// Found by the layered backward chain rather than the unordered
    /// fallback search.
    pub layered: bool,
    /// The exclusions were larger than `βn` (only possible when not strict).
    pub beta_exceeded: bool,
    pub explored: usize,
}

/// Longest connection the construction can produce: `⌊1/ν⌋ + 1`.
pub fn connection_length_cap(nu: f64, n: usize) -> usize {
    if nu <= 0.0 {
        return n.max(1);
    }
    ((1.0 / nu + 1e-9).floor() as usize).saturating_add(1).min(n.max(1))
}

/// Rainbow path from `u` to `v` with internal vertices in `V₀∖V₁` and
/// colours in `C₀∖C₁`, of length at most `⌊1/ν⌋+1`.
///
/// Builds the layers `N₁ = N⁺(u)`, `N_{i+1} = N_i ∪ RN⁺_ν(N_i)`, then walks
/// back from `v` through in-neighbours in strictly earlier layers, and
/// closes with either an edge from `u` or a hop `u → x → w` through `N₁`.
/// Candidates are tried lowest layer first; the search backtracks within
/// `budget` nodes. If the layered search fails, whatever budget is left goes
/// to an iterative-deepening search that drops the layer order, so the
/// shortest available connection is found (and fewest colours consumed).
pub fn connect_pair(
    g: &ColouredDigraph,
    res: &Reservoir,
    u: Vertex,
    v: Vertex,
    excl: &Exclusions,
    nu: f64,
    budget: usize,
) -> Result<Connection, ConnectError> {
    let n = g.n();
    if u >= n || v >= n {
        return Err(ConnectError::Precondition(format!("vertex out of range ({u}, {v}) for n = {n}")));
    }
    if u == v {
        return Err(ConnectError::Precondition("endpoints must differ".into()));
    }
    let limit = res.beta * n as f64;
    let beta_exceeded = excl.vertex_count as f64 > limit || excl.colour_count as f64 > limit;
    if beta_exceeded && res.strict {
        return Err(ConnectError::Precondition(format!(
            "exclusions ({} vertices, {} colours) exceed βn = {limit:.2}",
            excl.vertex_count, excl.colour_count
        )));
    }
    let level = layers_from(g, u, nu);
    let layers = level.iter().filter(|&&l| l != usize::MAX).max().copied().unwrap_or(0);
    let mut search = Search {
        g,
        res,
        excl,
        u,
        level: &level,
        cap: connection_length_cap(nu, n),
        on_chain: vec![false; n],
        used: vec![false; g.colour_count()],
        chain: vec![v],
        colours: Vec::new(),
        explored: 0,
        budget,
        closest: level[v],
        layered: true,
    };
    search.on_chain[v] = true;
    if let Some(path) = search.run() {
        return Ok(Connection { path, layers, layered: true, beta_exceeded, explored: search.explored });
    }
    search.layered = false;
    let full_cap = search.cap;
    for cap in 1..=full_cap {
        if search.explored > search.budget {
            break;
        }
        search.cap = cap;
        if let Some(path) = search.run() {
            return Ok(Connection { path, layers, layered: false, beta_exceeded, explored: search.explored });
        }
    }
    Err(ConnectError::ConnectFailed { u, v, closest_layer: search.closest.min(layers + 1), explored: search.explored })
}

/// `level[x]` is the least `i` with `x ∈ N_i(u)`, or `usize::MAX`.
fn layers_from(g: &ColouredDigraph, u: Vertex, nu: f64) -> Vec<usize> {
    let n = g.n();
    let mut level = vec![usize::MAX; n];
    let mut current = vec![false; n];
    for &(w, _) in g.out_edges(u) {
        level[w] = 1;
        current[w] = true;
    }
    let mut i = 1;
    loop {
        let next = robust_out_neighbourhood(g, &current, nu);
        let mut grew = false;
        for x in 0..n {
            if next[x] && !current[x] {
                current[x] = true;
                level[x] = i + 1;
                grew = true;
            }
        }
        if !grew {
            break;
        }
        i += 1;
    }
    level
}

struct Search<'a> {
    g: &'a ColouredDigraph,
    res: &'a Reservoir,
    excl: &'a Exclusions,
    u: Vertex,
    level: &'a [usize],
    cap: usize,
    on_chain: Vec<bool>,
    used: Vec<bool>,
    /// `chain[0] = v`; each later vertex has an edge to its predecessor.
    chain: Vec<Vertex>,
    colours: Vec<Colour>,
    explored: usize,
    budget: usize,
    closest: usize,
    /// Only step back to strictly earlier layers.
    layered: bool,
}

impl Search<'_> {
    fn colour_free(&self, c: Colour) -> bool {
        self.res.colours[c] && !self.excl.colours[c] && !self.used[c]
    }

    fn vertex_free(&self, x: Vertex) -> bool {
        x != self.u && self.res.vertices[x] && !self.excl.vertices[x] && !self.on_chain[x]
    }

    fn run(&mut self) -> Option<RainbowPath> {
        self.explored += 1;
        if self.explored > self.budget {
            return None;
        }
        let w = *self.chain.last().expect("chain starts at v");
        let k = self.colours.len();
        self.closest = self.closest.min(self.level[w]);
        if k < self.cap {
            if let Some(c) = self.g.colour_of(self.u, w) {
                if self.colour_free(c) {
                    let mut p = RainbowPath::single(self.u);
                    p.push(c, w);
                    return Some(self.append_chain(p));
                }
            }
        }
        if k + 2 <= self.cap {
            for &(x, c1) in self.g.out_edges(self.u) {
                if !self.vertex_free(x) || !self.colour_free(c1) {
                    continue;
                }
                if let Some(c2) = self.g.colour_of(x, w) {
                    if c2 != c1 && self.colour_free(c2) {
                        let mut p = RainbowPath::single(self.u);
                        p.push(c1, x);
                        p.push(c2, w);
                        return Some(self.append_chain(p));
                    }
                }
            }
        }
        if k + 3 > self.cap {
            return None;
        }
        let mut cands: Vec<(usize, Vertex, Colour)> = self
            .g
            .in_edges(w)
            .iter()
            .filter(|&&(x, c)| {
                self.vertex_free(x) && self.colour_free(c) && (!self.layered || self.level[x] < self.level[w])
            })
            .map(|&(x, c)| (self.level[x], x, c))
            .collect();
        cands.sort_unstable();
        for (_, x, c) in cands {
            self.on_chain[x] = true;
            self.used[c] = true;
            self.chain.push(x);
            self.colours.push(c);
            if let Some(p) = self.run() {
                return Some(p);
            }
            self.chain.pop();
            self.colours.pop();
            self.used[c] = false;
            self.on_chain[x] = false;
            if self.explored > self.budget {
                return None;
            }
        }
        None
    }

    /// `p` runs from `u` to the last chain vertex; follow the chain to `v`.
    fn append_chain(&self, mut p: RainbowPath) -> RainbowPath {
        for j in (0..self.colours.len()).rev() {
            p.push(self.colours[j], self.chain[j]);
        }
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathSource {
    /// The path forest joined through the reservoir.
    Stitched,
    /// The greedy comparator was longer.
    Greedy,
    /// Only a single forest component survived.
    ForestComponent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongPathRun {
    pub path: RainbowPath,
    pub source: PathSource,
    /// `⌈(1-ε)δ±⌉` for the graph the path lives in.
    pub target: usize,
    pub min_semidegree: usize,
    pub forest_edges: usize,
    pub forest_components: usize,
    pub connections: usize,
    pub failed_connections: usize,
    pub resamples: usize,
    pub greedy_length: usize,
    /// Vertices of the subgraph the forest was grown in.
    pub core_size: usize,
    pub cuts: Vec<CutRecord>,
    pub audit: Audit,
}

struct Stitch {
    path: RainbowPath,
    connections: usize,
    failures: usize,
    forest_edges: usize,
    forest_components: usize,
    last_error: Option<ConnectError>,
}

/// Joins components in order, dropping any that cannot be reached.
fn stitch(g: &ColouredDigraph, res: &Reservoir, forest: &PathForest, nu: f64, budget: usize) -> Stitch {
    let mut out = Stitch {
        path: RainbowPath::default(),
        connections: 0,
        failures: 0,
        forest_edges: forest.edge_count(),
        forest_components: forest.component_count(),
        last_error: None,
    };
    let Some(first) = forest.paths.first() else {
        return out;
    };
    let mut current = first.clone();
    let mut excl = Exclusions::new(g.n(), g.colour_count());
    for comp in &forest.paths[1..] {
        match connect_pair(g, res, current.end(), comp.start(), &excl, nu, budget) {
            Ok(conn) => {
                debug_assert!(conn.path.colours.iter().all(|&c| res.colours[c]));
                excl.add_path(&conn.path);
                current.join(&conn.path);
                current.join(comp);
                out.connections += 1;
            }
            Err(e) => {
                out.failures += 1;
                out.last_error = Some(e);
            }
        }
    }
    out.path = current;
    out
}

fn ceil_tol(x: f64) -> usize {
    (x - 1e-9).ceil().max(0.0) as usize
}

/// Long rainbow path in a robust `(ν, τ)`-out-expander.
///
/// Uses reservoir rate `params.p` (default `ε/6`), a switching path forest
/// at `ε/2` outside the reservoir, and [`connect_pair`] between consecutive
/// components. A failed connection triggers a fresh reservoir, up to
/// `params.resamples` times. Unless `params.strict` is set, the longest of
/// the best stitched path and the greedy comparator is returned.
pub fn long_path_robust_expander(
    g: &ColouredDigraph,
    eps: f64,
    nu: f64,
    tau: f64,
    params: &ParamSet,
    seed: u64,
) -> Result<LongPathRun, PipelineError> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(PipelineError::InvalidParameter(format!("epsilon must lie in (0, 1], got {eps}")));
    }
    let n = g.n();
    let d = g.min_semidegree();
    let target = ceil_tol((1.0 - eps) * d as f64);
    let mut audit = Audit::default();
    let mut run = LongPathRun {
        path: if n == 0 { RainbowPath::default() } else { RainbowPath::single(0) },
        source: PathSource::Greedy,
        target,
        min_semidegree: d,
        forest_edges: 0,
        forest_components: 0,
        connections: 0,
        failed_connections: 0,
        resamples: 0,
        greedy_length: 0,
        core_size: n,
        cuts: Vec::new(),
        audit: Audit::default(),
    };
    if n <= 1 || g.edge_count() == 0 {
        return Ok(run);
    }
    let alpha = params.alpha.unwrap_or(d as f64 / n as f64);
    let p = params.p_or(eps / 6.0);
    for w in params.reservoir_warnings(n, nu, tau, alpha, p) {
        audit.unmet("reservoir", w);
    }
    let sampling = ParamSet { nu: Some(nu), ..params.clone() };

    let mut best: Option<Stitch> = None;
    for attempt in 0..=params.resamples {
        let res = match sample_reservoir(g, p, &sampling, stage_seed(seed, &format!("attempt-{attempt}"))) {
            Ok(r) => r,
            Err(e) if params.strict => return Err(PipelineError::Reservoir(e)),
            Err(e) => {
                audit.fallback("reservoir", e.to_string());
                break;
            }
        };
        let sub = g.induced_subgraph(&res.complement_vertices(), &res.complement_colours());
        let forest = match switching_path_forest(&sub.graph, eps / 2.0) {
            Ok(f) => {
                if attempt == 0 {
                    audit.absorb("forest", f.audit);
                }
                f.forest
            }
            Err(ForestError::AugmentationStalled { forest, edges, target }) => {
                if params.strict {
                    return Err(PipelineError::Forest(ForestError::AugmentationStalled { forest, edges, target }));
                }
                audit.fallback(
                    "forest",
                    format!("augmentation stalled at {edges} of {target} edges; using the partial forest"),
                );
                *forest
            }
            Err(e) => return Err(PipelineError::Forest(e)),
        };
        let forest = sub.forest_to_parent(&forest);
        let s = stitch(g, &res, &forest, nu, params.connect_budget);
        run.resamples = attempt;
        let done = s.failures == 0;
        if best.as_ref().is_none_or(|b| s.path.len() > b.path.len() || (done && b.failures > 0)) {
            best = Some(s);
        }
        if done {
            break;
        }
    }
    if let Some(b) = &best {
        if b.failures > 0 {
            let msg = format!(
                "{} of {} connections failed after {} resamples",
                b.failures,
                b.forest_components.saturating_sub(1),
                run.resamples
            );
            if params.strict {
                return Err(PipelineError::Connect(b.last_error.clone().expect("failures record an error")));
            }
            audit.fallback("connect", msg);
        }
    }

    let greedy = greedy_min_outdeg_path(g, StartPolicy::EveryVertex);
    run.greedy_length = greedy.len();
    match best {
        Some(b) if b.path.len() >= greedy.len() && !b.path.is_empty() => {
            run.source = if b.forest_components > 1 && b.connections == 0 {
                PathSource::ForestComponent
            } else {
                PathSource::Stitched
            };
            run.path = b.path;
            run.forest_edges = b.forest_edges;
            run.forest_components = b.forest_components;
            run.connections = b.connections;
            run.failed_connections = b.failures;
        }
        other => {
            if let Some(b) = other {
                run.forest_edges = b.forest_edges;
                run.forest_components = b.forest_components;
                run.connections = b.connections;
                run.failed_connections = b.failures;
            }
            audit.fallback("stitch", format!("greedy path ({}) is longer than the stitched path", greedy.len()));
            run.path = greedy;
        }
    }
    if run.path.len() < target {
        audit.note("result", format!("length {} below target {target}", run.path.len()));
    }
    assert_eq!(validate_rainbow(g, &run.path), Ok(()), "stitched path must be rainbow");
    run.audit = audit;
    Ok(run)
}

/// Long rainbow path in a dense, nearly Eulerian digraph: pass to a robust
/// expander with uniform weights, then run [`long_path_robust_expander`]
/// there at `ε/2`. The path stays inside the core, greedy fallback
/// included.
pub fn long_path_dense_digraph(
    g: &ColouredDigraph,
    params: &ParamSet,
    seed: u64,
) -> Result<LongPathRun, PipelineError> {
    let n = g.n();
    let eps = params.eps;
    if n <= 1 || g.edge_count() == 0 {
        return long_path_robust_expander(g, eps, 0.0, 0.0, params, seed);
    }
    let d = g.min_semidegree();
    let alpha = params.alpha.unwrap_or(d as f64 / n as f64).max(1.0 / n as f64);
    let tau = params.tau.unwrap_or(alpha / 2.0).clamp(1e-9, 0.5);
    let cfg = PassConfig {
        delta: params.degree_loss,
        tau,
        alpha: alpha.min(1.0),
        rho0: params.rho0,
        ratio: params.ratio,
        cert_samples: params.cert_samples,
        seed: stage_seed(seed, "pass"),
        local_search_restarts: 4,
    };
    let mut audit = Audit::default();
    let pass = match pass_to_expander(g, &vec![1.0; n], &cfg) {
        Ok(p) => Some(p),
        Err(e) if params.strict => return Err(PipelineError::Pass(e)),
        Err(e) => {
            audit.fallback("pass", format!("{e}; running on the whole graph"));
            None
        }
    };
    let (mut run, core_size, cuts) = match &pass {
        Some(p) => {
            audit.absorb("pass", p.audit.clone());
            let core = p.subgraph();
            let inner = ParamSet { alpha: None, ..params.clone() };
            let mut run =
                long_path_robust_expander(&core.graph, eps / 2.0, p.nu, p.tau, &inner, stage_seed(seed, "core"))?;
            run.path = core.path_to_parent(&run.path);
            (run, p.core_size, p.cuts.clone())
        }
        None => {
            let (nu, tau) = (params.nu.unwrap_or(0.0), tau);
            (long_path_robust_expander(g, eps, nu, tau, params, stage_seed(seed, "core"))?, n, Vec::new())
        }
    };
    audit.absorb("expander", std::mem::take(&mut run.audit));
    run.min_semidegree = d;
    run.target = ceil_tol((1.0 - eps) * d as f64);
    run.core_size = core_size;
    run.cuts = cuts;
    run.audit = audit;
    assert_eq!(validate_rainbow(g, &run.path), Ok(()), "dense pipeline path must be rainbow");
    Ok(run)
}

/// Long rainbow path in `Cay(Z_n, S)` for prime `n`, using the expansion
/// certificate `ν = d²/(8n²)`, `τ = d/(2n)`.
pub fn long_path_zp(n: usize, s: &[usize], params: &ParamSet, seed: u64) -> Result<LongPathRun, PipelineError> {
    if !is_prime(n) {
        return Err(PipelineError::InvalidParameter(format!("{n} is not prime")));
    }
    let group = GroupTable::cyclic(n);
    let gens = GeneratorSet::new(&group, s.to_vec()).map_err(|e| PipelineError::InvalidParameter(e.to_string()))?;
    let cay = cayley_graph(&group, &gens).map_err(|e| PipelineError::InvalidParameter(e.to_string()))?;
    let d = gens.len();
    let (nu, tau) = zp_expansion_params(n, d);
    let mut audit = Audit::default();
    let nf = n as f64;
    let dense_enough = 4.0 * nf.powf(0.75) * nf.ln().sqrt();
    if (d as f64) < dense_enough {
        audit.unmet("zp", format!("|S| = {d} is below 4n^(3/4)·√(ln n) = {dense_enough:.1}"));
    }
    let inner = ParamSet { alpha: Some(d as f64 / nf), ..params.clone() };
    let mut run = long_path_robust_expander(&cay.graph, params.eps, nu, tau, &inner, seed)?;
    audit.extend(std::mem::take(&mut run.audit));
    run.audit = audit;
    Ok(run)
}
