//! Until semantics evaluated on sampled arcs, with three-valued verdicts.

use crate::arc::HybridArc;
use crate::error::{check_dim, Error, Result};
use crate::set::SetSpec;
use crate::sim::{simulate, Policy, SimBudget};
use crate::system::HybridSystem;
use crate::time::HybridTime;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Satisfied,
    Violated,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum UntilMode {
    Strong,
    Weak,
}

impl std::str::FromStr for UntilMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strong" => Ok(UntilMode::Strong),
            "weak" => Ok(UntilMode::Weak),
            _ => Err(Error::Invalid(format!("unknown until mode '{s}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PropositionPair {
    pub p: SetSpec,
    pub q: SetSpec,
}

impl PropositionPair {
    pub fn new(p: SetSpec, q: SetSpec) -> Result<Self> {
        check_dim(p.dim(), q.dim())?;
        Ok(PropositionPair { p, q })
    }

    pub fn p_or_q(&self) -> SetSpec {
        self.p.union(&self.q).expect("same dim").labeled("P u Q")
    }

    pub fn p_minus_q(&self) -> SetSpec {
        self.p.difference(&self.q).expect("same dim").labeled("P \\ Q")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MonitorWitness {
    pub time: HybridTime,
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MonitorResult {
    pub verdict: Verdict,
    pub witness: Option<MonitorWitness>,
    pub reason: String,
}

impl MonitorResult {
    fn new(verdict: Verdict, at: Option<(HybridTime, Vec<f64>)>, reason: &str) -> Self {
        MonitorResult {
            verdict,
            witness: at.map(|(time, x)| MonitorWitness { time, x }),
            reason: reason.to_string(),
        }
    }
}

const REFINE_ITERS: usize = 60;

// First time in (t_a, t_b] of segment `seg` between samples k-1 and k where `hit` holds.
fn refine(arc: &HybridArc, seg: usize, k: usize, t_a: f64, hit: impl Fn(&[f64]) -> bool) -> (f64, Vec<f64>) {
    let s = &arc.segments[seg];
    let (mut lo, mut hi) = (t_a, s.samples[k].t);
    let mut x_hi = s.samples[k].x.clone();
    for _ in 0..REFINE_ITERS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let xm = s.interpolate(k - 1, mid);
        if hit(&xm) {
            hi = mid;
            x_hi = xm;
        } else {
            lo = mid;
        }
    }
    (hi, x_hi)
}

enum Scan {
    Reached(HybridTime, Vec<f64>),
    Left(HybridTime, Vec<f64>),
    Exhausted,
}

fn scan(arc: &HybridArc, pq: &PropositionPair, start: HybridTime) -> Result<Scan> {
    check_dim(arc.dim(), pq.p.dim())?;
    if !arc.contains_time(start) {
        return Err(Error::Invalid(format!("start {start:?} is not in the arc domain")));
    }
    let seg0 = &arc.segments[start.j];
    let x0 = seg0.state_at(start.t);
    if pq.q.contains(&x0) {
        return Ok(Scan::Reached(start, x0));
    }
    if !pq.p.contains(&x0) {
        return Ok(Scan::Left(start, x0));
    }
    let mut prev_t = start.t;
    for (si, seg) in arc.segments.iter().enumerate().skip(start.j) {
        for (k, smp) in seg.samples.iter().enumerate() {
            if si == start.j && smp.t <= start.t {
                continue;
            }
            let between = k > 0 && smp.t > prev_t && seg.samples[k - 1].t < smp.t;
            let time = HybridTime::new(smp.t, seg.j);
            if pq.q.contains(&smp.x) {
                if between {
                    let (t, x) = refine(arc, si, k, prev_t, |y| pq.q.contains(y));
                    return Ok(Scan::Reached(HybridTime::new(t, seg.j), x));
                }
                return Ok(Scan::Reached(time, smp.x.clone()));
            }
            if !pq.p.contains(&smp.x) {
                if between {
                    let (t, x) = refine(arc, si, k, prev_t, |y| !pq.p.contains(y));
                    return Ok(Scan::Left(HybridTime::new(t, seg.j), x));
                }
                return Ok(Scan::Left(time, smp.x.clone()));
            }
            prev_t = smp.t;
        }
    }
    Ok(Scan::Exhausted)
}

/// Strong until at `start`: Q reached, with P holding strictly before.
pub fn check_strong_until(arc: &HybridArc, pq: &PropositionPair, start: HybridTime) -> Result<MonitorResult> {
    Ok(match scan(arc, pq, start)? {
        Scan::Reached(t, x) => MonitorResult::new(Verdict::Satisfied, Some((t, x)), "Q reached with P before"),
        Scan::Left(t, x) => MonitorResult::new(Verdict::Violated, Some((t, x)), "left P before reaching Q"),
        Scan::Exhausted if arc.flags.maximal_heuristic => MonitorResult::new(
            Verdict::Violated,
            Some((arc.final_time(), arc.final_state().to_vec())),
            "maximal solution ends without reaching Q",
        ),
        Scan::Exhausted => MonitorResult::new(
            Verdict::Unknown,
            None,
            "Q not reached before the end of the sampled arc",
        ),
    })
}

/// Weak until at `start`: strong until, or P on the whole remaining domain.
pub fn check_weak_until(arc: &HybridArc, pq: &PropositionPair, start: HybridTime) -> Result<MonitorResult> {
    Ok(match scan(arc, pq, start)? {
        Scan::Reached(t, x) => MonitorResult::new(Verdict::Satisfied, Some((t, x)), "Q reached with P before"),
        Scan::Left(t, x) => MonitorResult::new(Verdict::Violated, Some((t, x)), "left P before reaching Q"),
        Scan::Exhausted if arc.flags.maximal_heuristic => MonitorResult::new(
            Verdict::Satisfied,
            None,
            "P holds on the whole domain of a maximal solution",
        ),
        Scan::Exhausted if arc.flags.complete_heuristic => MonitorResult::new(
            Verdict::Satisfied,
            None,
            "P holds up to the simulation horizon (completeness heuristic)",
        ),
        Scan::Exhausted => MonitorResult::new(Verdict::Unknown, None, "P holds on a truncated prefix"),
    })
}

pub fn check_until(arc: &HybridArc, pq: &PropositionPair, start: HybridTime, mode: UntilMode) -> Result<MonitorResult> {
    match mode {
        UntilMode::Strong => check_strong_until(arc, pq, start),
        UntilMode::Weak => check_weak_until(arc, pq, start),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InitialResult {
    pub x0: Vec<f64>,
    pub verdict: Verdict,
    pub arcs: Vec<MonitorResult>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FormulaResult {
    pub mode: UntilMode,
    pub verdict: Verdict,
    pub satisfied: usize,
    pub violated: usize,
    pub unknown: usize,
    /// Sampled points skipped because they are not in cl(C) u D.
    pub skipped: usize,
    pub per_initial: Vec<InitialResult>,
}

/// Combines verdicts: any violation wins, then any unknown.
pub fn combine(vs: impl IntoIterator<Item = Verdict>) -> Verdict {
    let mut out = Verdict::Satisfied;
    for v in vs {
        match v {
            Verdict::Violated => return Verdict::Violated,
            Verdict::Unknown => out = Verdict::Unknown,
            Verdict::Satisfied => {}
        }
    }
    out
}

/// Evaluates the until formula at `(0, 0)` on every simulated solution from
/// each initial point in `init` that lies in cl(C) u D.
pub fn check_formula_over(
    h: &HybridSystem,
    pq: &PropositionPair,
    init: &[Vec<f64>],
    mode: UntilMode,
    budget: &SimBudget,
    policy: Policy,
) -> Result<FormulaResult> {
    check_dim(h.dim(), pq.p.dim())?;
    let start_set = h.c.closure().union(&h.d)?;
    let pqs = pq.p_or_q();
    let usable: Vec<&Vec<f64>> = init
        .iter()
        .filter(|x| start_set.contains(x) && pqs.contains(x))
        .collect();
    let skipped = init.len() - usable.len();
    let per_initial: Vec<InitialResult> = usable
        .par_iter()
        .map(|x0| -> Result<InitialResult> {
            let arcs = simulate(h, x0, budget, policy)?;
            let rs: Vec<MonitorResult> = arcs
                .iter()
                .map(|a| check_until(a, pq, HybridTime::zero(), mode))
                .collect::<Result<_>>()?;
            Ok(InitialResult {
                x0: x0.to_vec(),
                verdict: combine(rs.iter().map(|r| r.verdict)),
                arcs: rs,
            })
        })
        .collect::<Result<_>>()?;
    let count = |v: Verdict| per_initial.iter().filter(|r| r.verdict == v).count();
    Ok(FormulaResult {
        mode,
        verdict: if per_initial.is_empty() {
            Verdict::Unknown
        } else {
            combine(per_initial.iter().map(|r| r.verdict))
        },
        satisfied: count(Verdict::Satisfied),
        violated: count(Verdict::Violated),
        unknown: count(Verdict::Unknown),
        skipped,
        per_initial,
    })
}
