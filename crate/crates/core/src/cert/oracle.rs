//! Falsification of the invariance and attractivity notions by simulation,
//! independent of any certificate.

use crate::arc::{settling_time, HybridArc, Termination};
use crate::error::{check_dim, Error, Result};
use crate::monitor::{check_strong_until, MonitorWitness, PropositionPair, Verdict};
use crate::set::SetSpec;
use crate::sim::{simulate, Policy, SimBudget};
use crate::system::HybridSystem;
use crate::time::HybridTime;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Notion {
    CI,
    PreCI,
    ECI,
    PreECI,
    FTA,
    PreFTA,
}

impl Notion {
    fn is_pre(self) -> bool {
        matches!(self, Notion::PreCI | Notion::PreECI | Notion::PreFTA)
    }
}

impl std::str::FromStr for Notion {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "ci" => Notion::CI,
            "preci" => Notion::PreCI,
            "eci" => Notion::ECI,
            "preeci" => Notion::PreECI,
            "fta" => Notion::FTA,
            "prefta" => Notion::PreFTA,
            _ => return Err(Error::Invalid(format!("unknown notion '{s}'"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleVerdict {
    Violated,
    NotFalsified,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub notion: Notion,
    pub verdict: OracleVerdict,
    pub witness: Option<MonitorWitness>,
    /// Initial point of the falsifying arc.
    pub from: Option<Vec<f64>>,
    pub reason: String,
    pub arcs: usize,
}

type Falsified = (Option<MonitorWitness>, String);

// arcs simulated from one start, and the first falsifying start if any
type StartOutcome = (usize, Option<(Vec<f64>, Falsified)>);

fn at_end(arc: &HybridArc) -> Option<MonitorWitness> {
    Some(MonitorWitness {
        time: arc.final_time(),
        x: arc.final_state().to_vec(),
    })
}

// first departure from `a` along the arc, located between samples
fn first_exit(arc: &HybridArc, a: &SetSpec) -> Result<Option<MonitorWitness>> {
    let pq = PropositionPair::new(a.clone(), SetSpec::empty(a.dim()))?;
    let r = check_strong_until(arc, &pq, HybridTime::zero())?;
    Ok(match (r.verdict, r.reason.starts_with("left")) {
        (Verdict::Violated, true) => r.witness,
        _ => None,
    })
}

// second time the arc leaves `a` after having been inside
fn repeated_departure(arc: &HybridArc, a: &SetSpec) -> Option<MonitorWitness> {
    let mut inside = false;
    let mut departures = 0;
    for p in arc.points() {
        let now = a.contains(p.x);
        if inside && !now {
            departures += 1;
            if departures >= 2 {
                return Some(MonitorWitness {
                    time: p.time,
                    x: p.x.to_vec(),
                });
            }
        }
        inside = now;
    }
    None
}

fn judge(arc: &HybridArc, a: &SetSpec, notion: Notion) -> Result<Option<Falsified>> {
    let maximal_incomplete = arc.flags.maximal_heuristic && !arc.flags.complete_heuristic;
    let ends_outside = !a.contains(arc.final_state());
    match notion {
        Notion::CI | Notion::PreCI => {
            if let Some(w) = first_exit(arc, a)? {
                return Ok(Some((Some(w), "solution leaves the set".into())));
            }
            if notion == Notion::CI && arc.termination == Termination::FiniteEscape {
                return Ok(Some((at_end(arc), "solution escapes in finite time".into())));
            }
        }
        Notion::ECI | Notion::PreECI => {
            if !notion.is_pre() && maximal_incomplete && ends_outside {
                return Ok(Some((at_end(arc), "maximal solution ends outside A".into())));
            }
            if let Some(w) = repeated_departure(arc, a) {
                return Ok(Some((Some(w), "solution leaves A repeatedly after reaching it".into())));
            }
        }
        Notion::FTA | Notion::PreFTA => {
            if !notion.is_pre() && maximal_incomplete && ends_outside {
                return Ok(Some((at_end(arc), "maximal solution ends outside A".into())));
            }
            if arc.flags.complete_heuristic && settling_time(arc, a).time.is_none() {
                return Ok(Some((
                    at_end(arc),
                    "complete-flagged solution does not reach A within the horizon".into(),
                )));
            }
        }
    }
    Ok(None)
}

/// Simulates every solution from `starts` and looks for a violation of `notion` for `A`.
pub fn empirical_notion_oracle(
    h: &HybridSystem,
    starts: &[Vec<f64>],
    a: &SetSpec,
    notion: Notion,
    budget: &SimBudget,
    policy: Policy,
) -> Result<OracleReport> {
    check_dim(h.dim(), a.dim())?;
    let start_set = h.c.closure().union(&h.d)?;
    let found: Vec<StartOutcome> = starts
        .par_iter()
        .filter(|x| start_set.contains(x))
        .map(|x0| -> Result<_> {
            let arcs = simulate(h, x0, budget, policy)?;
            for arc in &arcs {
                if let Some(f) = judge(arc, a, notion)? {
                    return Ok((arcs.len(), Some((x0.clone(), f))));
                }
            }
            Ok((arcs.len(), None))
        })
        .collect::<Result<_>>()?;
    let arcs = found.iter().map(|(n, _)| n).sum();
    let hit = found.into_iter().find_map(|(_, f)| f);
    Ok(match hit {
        Some((x0, (witness, reason))) => OracleReport {
            notion,
            verdict: OracleVerdict::Violated,
            witness,
            from: Some(x0),
            reason,
            arcs,
        },
        None => OracleReport {
            notion,
            verdict: OracleVerdict::NotFalsified,
            witness: None,
            from: None,
            reason: format!("no violation on {arcs} simulated solutions"),
            arcs,
        },
    })
}
