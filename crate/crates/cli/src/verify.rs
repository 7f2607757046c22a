//! `rwalk verify`: structural checks and the exhaustive sweeps.

use serde_json::{json, Value};

use rwalk::graph::{validate_proper_colouring, validate_rainbow};
use rwalk::group::GroupTable;
use rwalk::io::Instance;
use rwalk::oracle::{graham_sweep, pollard_sweep, sequenceable_check, PollardMode};

use crate::solve::{digest, SolveRecord};

/// A report and whether the checked property holds.
pub struct Verdict {
    pub report: Value,
    pub holds: bool,
}

fn read(path: Option<&str>, what: &str) -> Result<String, String> {
    let path = path.ok_or_else(|| format!("`{what}` needs an input file"))?;
    std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))
}

/// `what` is `proper`, `rainbow:<results.jsonl>`, `graham:<p>`,
/// `pollard:exhaustive:<n>`, `pollard:sampled:<n>:<trials>` or
/// `sequenceable`. `input` is the instance file, or the group spec for
/// `sequenceable`.
pub fn verify(what: &str, input: Option<&str>, seed: u64) -> Result<Verdict, String> {
    let parts: Vec<&str> = what.splitn(2, ':').collect();
    match parts[0] {
        "proper" => {
            let text = read(input, what)?;
            let inst = Instance::parse(&text).map_err(|e| e.to_string())?;
            let clashes = validate_proper_colouring(&inst.graph);
            let report = json!({ "what": "proper", "instance_digest": digest(&text), "clashes": clashes.len() });
            Ok(Verdict { report, holds: clashes.is_empty() })
        }
        "rainbow" => {
            let results = parts.get(1).ok_or("rainbow needs a results file: rainbow:<file>")?;
            let text = read(input, what)?;
            let inst = Instance::parse(&text).map_err(|e| e.to_string())?;
            let dig = digest(&text);
            let lines = std::fs::read_to_string(results).map_err(|e| format!("{results}: {e}"))?;
            let mut checked = 0;
            let mut problems = Vec::new();
            for (i, line) in lines.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
                let rec: SolveRecord = serde_json::from_str(line).map_err(|e| format!("{results}:{}: {e}", i + 1))?;
                if rec.instance_digest != dig {
                    problems.push(format!("line {}: result is for a different instance", i + 1));
                    continue;
                }
                let checks = [
                    rec.path.as_ref().map(|p| validate_rainbow(&inst.graph, p)),
                    rec.forest.as_ref().map(|f| validate_rainbow(&inst.graph, f)),
                    rec.walk.as_ref().map(|w| validate_rainbow(&inst.graph, w)),
                ];
                for c in checks.into_iter().flatten() {
                    checked += 1;
                    if let Err(e) = c {
                        problems.push(format!("line {}: {e}", i + 1));
                    }
                }
            }
            let report = json!({ "what": "rainbow", "structures": checked, "problems": problems });
            Ok(Verdict { report, holds: problems.is_empty() })
        }
        "graham" => {
            let p: usize = parts.get(1).and_then(|x| x.parse().ok()).ok_or("graham needs a prime: graham:<p>")?;
            let r = graham_sweep(p).map_err(|e| e.to_string())?;
            let holds = r.failures.is_empty();
            Ok(Verdict { report: json!({ "what": "graham", "report": r }), holds })
        }
        "pollard" => {
            let rest: Vec<&str> = parts.get(1).map(|r| r.split(':').collect()).unwrap_or_default();
            let num = |s: Option<&&str>| s.and_then(|x| x.parse::<usize>().ok());
            let mode = match rest.first().copied() {
                Some("exhaustive") => PollardMode::Exhaustive { n: num(rest.get(1)).ok_or("pollard:exhaustive:<n>")? },
                Some("sampled") => PollardMode::Sampled {
                    n: num(rest.get(1)).ok_or("pollard:sampled:<n>:<trials>")?,
                    trials: num(rest.get(2)).ok_or("pollard:sampled:<n>:<trials>")?,
                    seed,
                },
                _ => return Err("pollard mode must be exhaustive:<n> or sampled:<n>:<trials>".into()),
            };
            let r = pollard_sweep(mode).map_err(|e| e.to_string())?;
            let holds = r.violations.is_empty();
            Ok(Verdict { report: json!({ "what": "pollard", "report": r }), holds })
        }
        "sequenceable" => {
            let spec = input.ok_or("sequenceable needs a group spec, e.g. dihedral:6")?;
            let group = GroupTable::from_spec(spec).map_err(|e| e.to_string())?;
            let yes = sequenceable_check(&group).map_err(|e| e.to_string())?;
            // Answering the question is success either way.
            Ok(Verdict {
                report: json!({ "what": "sequenceable", "group": group.label(), "sequenceable": yes }),
                holds: true,
            })
        }
        other => Err(format!("unknown check `{other}`")),
    }
}
