//! `rwalk bench`: run a suite of (generator, algorithm, seeds) jobs on the
//! worker pool and tabulate the results in suite order.

use std::collections::HashMap;
use std::time::Duration;

use rayon::prelude::*;
use serde::Serialize;

use rwalk::io::generate;
use rwalk::params::ParamSet;

use crate::solve::solve;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub instance: String,
    pub algo: String,
    pub seed: u64,
    pub length: Option<usize>,
    pub target: Option<f64>,
    pub time_ms: u128,
    /// `ok`, `best_effort` or `error: ...`.
    pub status: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Job {
    pub spec: String,
    pub algo: String,
    pub seed: u64,
}

fn parse_seeds(s: &str) -> Option<Vec<u64>> {
    if let Some((a, b)) = s.split_once("..") {
        let (a, b): (u64, u64) = (a.parse().ok()?, b.parse().ok()?);
        return Some((a..b).collect());
    }
    s.split(',').map(|x| x.trim().parse().ok()).collect()
}

/// One job line is `<generator-spec> <algo> [seeds]`, seeds being `a..b`
/// (half open) or a comma list; default `0`. `#` starts a comment.
pub fn parse_suite(text: &str) -> Result<Vec<Job>, String> {
    let mut jobs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() < 2 || f.len() > 3 {
            return Err(format!("suite line {}: expected `<spec> <algo> [seeds]`", i + 1));
        }
        let seeds = match f.get(2) {
            Some(s) => parse_seeds(s).ok_or_else(|| format!("suite line {}: bad seeds `{s}`", i + 1))?,
            None => vec![0],
        };
        for seed in seeds {
            jobs.push(Job { spec: f[0].to_string(), algo: f[1].to_string(), seed });
        }
    }
    Ok(jobs)
}

pub fn run(jobs: &[Job], params: &ParamSet, budget: Option<Duration>) -> Vec<Row> {
    let mut specs: Vec<&str> = jobs.iter().map(|j| j.spec.as_str()).collect();
    specs.sort_unstable();
    specs.dedup();
    let instances: HashMap<&str, Result<String, String>> =
        specs.par_iter().map(|&s| (s, generate(s).map(|i| i.to_text()).map_err(|e| e.to_string()))).collect();
    jobs.par_iter()
        .map(|job| {
            let base = Row {
                instance: job.spec.clone(),
                algo: job.algo.clone(),
                seed: job.seed,
                length: None,
                target: None,
                time_ms: 0,
                status: String::new(),
            };
            let text = match &instances[job.spec.as_str()] {
                Ok(t) => t,
                Err(e) => return Row { status: format!("error: {e}"), ..base },
            };
            match solve(text, &job.algo, params, job.seed, budget) {
                Ok(rec) => Row {
                    length: rec.achieved_length,
                    target: rec.target,
                    time_ms: rec.wall_time_ms,
                    status: if rec.exit_code() == 0 { "ok".into() } else { "best_effort".into() },
                    ..base
                },
                Err(e) => Row { status: format!("error: {e}"), ..base },
            }
        })
        .collect()
}

pub fn to_csv(rows: &[Row]) -> String {
    let opt = |x: Option<String>| x.unwrap_or_default();
    let mut out = String::from("instance,algo,seed,length,target,time_ms,status\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},\"{}\"\n",
            r.instance,
            r.algo,
            r.seed,
            opt(r.length.map(|x| x.to_string())),
            opt(r.target.map(|x| format!("{x:.2}"))),
            r.time_ms,
            r.status.replace('"', "'")
        ));
    }
    out
}
