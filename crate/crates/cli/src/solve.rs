//! `rwalk solve`: run one algorithm on one instance and produce a
//! validated result record.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use rwalk::audit::Audit;
use rwalk::connector::{long_path_dense_digraph, long_path_zp};
use rwalk::expander::broom_path;
use rwalk::forest::{iterated_path_forest, switching_path_forest, ForestRun};
use rwalk::graph::{validate_rainbow, PathForest, RainbowPath, RainbowWalk};
use rwalk::greedy::{greedy_min_outdeg_path, StartPolicy};
use rwalk::io::{cayley_parts, Instance};
use rwalk::mop::{mop_long_path, schrijver_long_path, MopOutcome};
use rwalk::oracle::{brute_longest_rainbow_path, brute_rearrangeable};
use rwalk::params::ParamSet;
use rwalk::rearrange::rearrangement_walk;
use rwalk::rng::GENERATOR_ID;

pub const ALGOS: &[&str] = &[
    "greedy",
    "forest31",
    "forest32",
    "broom",
    "dense",
    "zp",
    "mop",
    "schrijver",
    "rearrange",
    "oracle-path",
    "oracle-rearrange",
];

/// Oracle budget when `--budget-ms` is not given.
pub const DEFAULT_ORACLE_BUDGET_MS: u64 = 10_000;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Floors {
    /// `⌈δ⁺/2⌉`, what the greedy path always reaches.
    pub greedy_path: usize,
    /// `⌊d/2⌋`, the most repetitions a greedy walk can have.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub walk_repetitions: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveRecord {
    pub instance_digest: String,
    pub algo: String,
    pub seed: u64,
    /// The random generator behind `seed`.
    #[serde(default)]
    pub rng: String,
    pub params: ParamSet,
    pub n: usize,
    pub min_out_degree: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub achieved_length: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ordering: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distinct_prefix_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub repetition_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<bool>,
    pub floors: Floors,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<RainbowPath>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub forest: Option<PathForest>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub walk: Option<RainbowWalk>,
    pub audit: Audit,
    pub hypotheses_met: bool,
    pub wall_time_ms: u128,
}

impl SolveRecord {
    /// Exit status: 0 when every hypothesis held, 2 for a best-effort result.
    pub fn exit_code(&self) -> i32 {
        if self.hypotheses_met && self.exact != Some(false) {
            0
        } else {
            2
        }
    }
}

pub fn digest(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

fn ceil_half(d: usize) -> usize {
    d.div_ceil(2)
}

fn forest_record(rec: &mut SolveRecord, run: ForestRun) {
    rec.achieved_length = Some(run.forest.edge_count());
    rec.target = Some(run.target_edges as f64);
    rec.audit = run.audit;
    rec.forest = Some(run.forest);
}

/// Runs `algo` on the instance text. The returned record has already been
/// checked against the instance.
pub fn solve(
    text: &str,
    algo: &str,
    params: &ParamSet,
    seed: u64,
    budget: Option<Duration>,
) -> Result<SolveRecord, String> {
    let inst = Instance::parse(text).map_err(|e| e.to_string())?;
    let g = &inst.graph;
    let started = Instant::now();
    let d = g.min_out_degree();
    let mut rec = SolveRecord {
        instance_digest: digest(text),
        algo: algo.to_string(),
        seed,
        rng: GENERATOR_ID.to_string(),
        params: params.clone(),
        n: g.n(),
        min_out_degree: d,
        achieved_length: None,
        target: None,
        ordering: None,
        distinct_prefix_count: None,
        repetition_count: None,
        exact: None,
        floors: Floors { greedy_path: ceil_half(g.min_out_degree()), walk_repetitions: None },
        path: None,
        forest: None,
        walk: None,
        audit: Audit::default(),
        hypotheses_met: true,
        wall_time_ms: 0,
    };
    let eps = params.eps;
    let cayley =
        || cayley_parts(&inst).ok_or_else(|| format!("{algo} needs a Cayley instance"))?.map_err(|e| e.to_string());
    match algo {
        "greedy" => {
            let p = greedy_min_outdeg_path(g, StartPolicy::EveryVertex);
            rec.target = Some(rec.floors.greedy_path as f64);
            rec.path = Some(p);
        }
        "forest31" => forest_record(&mut rec, iterated_path_forest(g, eps).map_err(|e| e.to_string())?),
        "forest32" => forest_record(&mut rec, switching_path_forest(g, eps).map_err(|e| e.to_string())?),
        "broom" => {
            let run = broom_path(g, eps, d).map_err(|e| e.to_string())?;
            rec.target = Some((1.0 - eps) * d as f64);
            rec.path = Some(run.path);
        }
        "dense" => {
            let run = long_path_dense_digraph(g, params, seed).map_err(|e| e.to_string())?;
            rec.target = Some(run.target as f64);
            rec.audit = run.audit;
            rec.path = Some(run.path);
        }
        "zp" => {
            let (group, s) = cayley()?;
            let n: usize = group
                .label()
                .strip_prefix("cyclic:")
                .and_then(|x| x.parse().ok())
                .ok_or("zp needs a cyclic group instance")?;
            let run = long_path_zp(n, s.elements(), params, seed).map_err(|e| e.to_string())?;
            rec.target = Some(run.target as f64);
            rec.audit = run.audit;
            rec.path = Some(run.path);
        }
        "mop" => {
            let run = mop_long_path(g, params).map_err(|e| e.to_string())?;
            rec.target = Some((1.0 - eps) * d as f64);
            rec.audit = run.audit;
            rec.path = Some(match run.outcome {
                MopOutcome::Path(p) => p,
                MopOutcome::Witness(m, _) => {
                    rec.audit.note(
                        "mop",
                        format!("non-leaky mop with {} ends; reporting its best handle path", m.end_count()),
                    );
                    m.best_path()
                }
            });
        }
        "schrijver" => {
            let run = schrijver_long_path(g, params, seed).map_err(|e| e.to_string())?;
            rec.target = Some(run.target as f64);
            rec.audit = run.audit;
            rec.path = Some(run.path);
        }
        "rearrange" => {
            let (group, s) = cayley()?;
            let run = rearrangement_walk(&group, &s, params, seed).map_err(|e| e.to_string())?;
            let dd = s.len();
            rec.floors.walk_repetitions = Some(run.hard_cap);
            rec.target = Some((1.0 - eps) * dd as f64);
            rec.achieved_length = Some(run.rearrangement.distinct_prefix_count);
            rec.distinct_prefix_count = Some(run.rearrangement.distinct_prefix_count);
            rec.repetition_count = Some(run.repetition_count);
            if group.distinct_prefix_count(&run.rearrangement.ordering) != run.rearrangement.distinct_prefix_count {
                return Err("rearrangement prefix count does not match the group".into());
            }
            rec.ordering = Some(run.rearrangement.ordering);
            rec.audit = run.audit;
            rec.walk = Some(run.walk);
        }
        "oracle-path" => {
            let budget = budget.unwrap_or(Duration::from_millis(DEFAULT_ORACLE_BUDGET_MS));
            let r = brute_longest_rainbow_path(g, budget);
            rec.exact = Some(r.exact);
            if !r.exact {
                rec.audit.note("oracle", "budget ran out; the length is a lower bound");
            }
            rec.path = Some(r.path);
        }
        "oracle-rearrange" => {
            let (group, s) = cayley()?;
            let found = brute_rearrangeable(&group, s.elements()).map_err(|e| e.to_string())?;
            rec.exact = Some(true);
            match found {
                Some(o) => {
                    let count = group.distinct_prefix_count(&o);
                    if count != o.len() {
                        return Err("oracle ordering has a repeated partial product".into());
                    }
                    rec.distinct_prefix_count = Some(count);
                    rec.achieved_length = Some(count);
                    rec.ordering = Some(o);
                }
                None => rec.audit.note("oracle", "no ordering with distinct partial products"),
            }
        }
        other => return Err(format!("unknown algorithm `{other}`; expected one of {}", ALGOS.join(", "))),
    }
    if let Some(p) = &rec.path {
        validate_rainbow(g, p).map_err(|e| format!("invalid path: {e}"))?;
        rec.achieved_length = Some(p.len());
    }
    if let Some(f) = &rec.forest {
        validate_rainbow(g, f).map_err(|e| format!("invalid forest: {e}"))?;
    }
    if let Some(w) = &rec.walk {
        validate_rainbow(g, w).map_err(|e| format!("invalid walk: {e}"))?;
    }
    rec.hypotheses_met = rec.audit.hypotheses_met();
    rec.wall_time_ms = started.elapsed().as_millis();
    if let Some(b) = budget {
        if started.elapsed() > b && algo != "oracle-path" {
            rec.audit.note("budget", format!("run took {} ms, over the {} ms budget", rec.wall_time_ms, b.as_millis()));
        }
    }
    Ok(rec)
}
