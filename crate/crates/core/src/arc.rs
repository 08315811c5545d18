//! Hybrid arcs produced by the simulator, and queries on them.

use crate::error::{Error, Result};
use crate::func::dist;
use crate::set::SetSpec;
use crate::system::HybridSystem;
use crate::time::HybridTime;
use serde::Serialize;
use std::path::Path;

#[derive(Debug, Clone, Serialize)]
pub struct Sample {
    pub t: f64,
    pub x: Vec<f64>,
    /// Flow derivative used at this sample (Hermite interpolation between samples).
    pub dx: Vec<f64>,
}

/// The piece of an arc with jump counter `j`. The first sample is the state
/// right after jump `j` (or the initial state), the last one the state right
/// before jump `j + 1`.
#[derive(Debug, Clone, Serialize)]
pub struct Segment {
    pub j: usize,
    pub samples: Vec<Sample>,
}

impl Segment {
    pub fn t_start(&self) -> f64 {
        self.samples[0].t
    }

    pub fn t_end(&self) -> f64 {
        self.samples[self.samples.len() - 1].t
    }

    pub fn duration(&self) -> f64 {
        self.t_end() - self.t_start()
    }

    /// Cubic Hermite interpolation between samples `k` and `k + 1`.
    pub fn interpolate(&self, k: usize, t: f64) -> Vec<f64> {
        let a = &self.samples[k];
        let b = &self.samples[k + 1];
        let h = b.t - a.t;
        if h <= 0.0 {
            return a.x.clone();
        }
        let s = ((t - a.t) / h).clamp(0.0, 1.0);
        let h00 = 2.0 * s.powi(3) - 3.0 * s * s + 1.0;
        let h10 = s.powi(3) - 2.0 * s * s + s;
        let h01 = -2.0 * s.powi(3) + 3.0 * s * s;
        let h11 = s.powi(3) - s * s;
        (0..a.x.len())
            .map(|i| h00 * a.x[i] + h10 * h * a.dx[i] + h01 * b.x[i] + h11 * h * b.dx[i])
            .collect()
    }

    /// State at time `t` within the segment.
    pub fn state_at(&self, t: f64) -> Vec<f64> {
        let k = self
            .samples
            .windows(2)
            .position(|w| t >= w[0].t && t <= w[1].t)
            .unwrap_or(self.samples.len().saturating_sub(2));
        if self.samples.len() < 2 {
            return self.samples[0].x.clone();
        }
        self.interpolate(k, t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Termination {
    /// Ordinary time reached `t_max`.
    TimeHorizon,
    /// Jump counter reached `j_max`.
    JumpHorizon,
    /// Neither flowing nor jumping is possible.
    DeadEnd,
    /// Norm exceeded the escape threshold.
    FiniteEscape,
    /// Jumps accumulate; `t_limit` is the extrapolated accumulation time.
    ZenoLimit { t_limit: f64 },
    /// Arc cut by [`HybridArc::prefix`] or built by hand.
    Prefix,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ArcFlags {
    pub budget_truncated: bool,
    pub maximal_heuristic: bool,
    pub complete_heuristic: bool,
    pub eventually_continuous: bool,
    pub eventually_discrete: bool,
    pub genuinely_zeno: bool,
    pub finite_escape: bool,
    /// A post-jump state repeated an earlier one.
    pub recurrent: bool,
    /// Some branch alternative along this arc was not explored (branch cap).
    pub branch_pruned: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct HybridArc {
    pub segments: Vec<Segment>,
    pub termination: Termination,
    pub flags: ArcFlags,
    /// `(t_max, j_max)` the arc was simulated with.
    pub horizon: (f64, usize),
}

/// A visited point of an arc, in hybrid time order.
#[derive(Debug, Clone, Copy)]
pub struct ArcPoint<'a> {
    pub time: HybridTime,
    pub x: &'a [f64],
    pub seg: usize,
    pub idx: usize,
}

impl HybridArc {
    /// Builds an arc from segments; flags are recomputed by [`classify_arc`].
    pub fn from_segments(segments: Vec<Segment>, termination: Termination, horizon: (f64, usize)) -> Result<Self> {
        if segments.is_empty() || segments.iter().any(|s| s.samples.is_empty()) {
            return Err(Error::Invalid("arc needs non-empty segments".into()));
        }
        for (k, s) in segments.iter().enumerate() {
            if s.j != k {
                return Err(Error::Invalid("segment jump counters must be 0, 1, 2, ...".into()));
            }
            if s.samples.windows(2).any(|w| w[1].t < w[0].t) {
                return Err(Error::Invalid("sample times must be nondecreasing".into()));
            }
            if k > 0 && s.t_start() != segments[k - 1].t_end() {
                return Err(Error::Invalid("a jump cannot advance ordinary time".into()));
            }
        }
        let mut arc = HybridArc {
            segments,
            termination,
            flags: ArcFlags::default(),
            horizon,
        };
        arc.flags = classify_arc(&arc);
        Ok(arc)
    }

    pub fn dim(&self) -> usize {
        self.segments[0].samples[0].x.len()
    }

    pub fn initial_state(&self) -> &[f64] {
        &self.segments[0].samples[0].x
    }

    pub fn final_state(&self) -> &[f64] {
        let s = self.segments.last().unwrap();
        &s.samples.last().unwrap().x
    }

    pub fn final_time(&self) -> HybridTime {
        let s = self.segments.last().unwrap();
        HybridTime::new(s.t_end(), s.j)
    }

    pub fn jumps(&self) -> usize {
        self.segments.len() - 1
    }

    pub fn sup_t(&self) -> f64 {
        match self.termination {
            Termination::ZenoLimit { t_limit } => t_limit,
            _ => self.final_time().t,
        }
    }

    /// Jump extent of the domain: unbounded for a Zeno-terminated arc.
    pub fn sup_j_extent(&self) -> f64 {
        match self.termination {
            Termination::ZenoLimit { .. } => f64::INFINITY,
            _ => self.sup_j() as f64,
        }
    }

    pub fn sup_j(&self) -> usize {
        self.final_time().j
    }

    pub fn points(&self) -> impl Iterator<Item = ArcPoint<'_>> {
        self.segments.iter().enumerate().flat_map(|(si, s)| {
            s.samples.iter().enumerate().map(move |(k, smp)| ArcPoint {
                time: HybridTime::new(smp.t, s.j),
                x: &smp.x,
                seg: si,
                idx: k,
            })
        })
    }

    pub fn num_samples(&self) -> usize {
        self.segments.iter().map(|s| s.samples.len()).sum()
    }

    /// Jump pairs `(t, pre, post)`.
    pub fn jump_pairs(&self) -> impl Iterator<Item = (f64, &[f64], &[f64])> {
        self.segments.windows(2).map(|w| {
            (
                w[0].t_end(),
                w[0].samples.last().unwrap().x.as_slice(),
                w[1].samples[0].x.as_slice(),
            )
        })
    }

    /// Is `(t, j)` in the (sampled) domain.
    pub fn contains_time(&self, time: HybridTime) -> bool {
        self.segments
            .get(time.j)
            .map(|s| time.t >= s.t_start() - 1e-12 && time.t <= s.t_end() + 1e-12)
            .unwrap_or(false)
    }

    /// The first `n` samples, marked as a truncated prefix.
    pub fn prefix(&self, n: usize) -> HybridArc {
        let n = n.max(1);
        let mut segs = Vec::new();
        let mut left = n;
        for s in &self.segments {
            if left == 0 {
                break;
            }
            let take = left.min(s.samples.len());
            segs.push(Segment {
                j: s.j,
                samples: s.samples[..take].to_vec(),
            });
            left -= take;
        }
        let mut arc = HybridArc {
            segments: segs,
            termination: Termination::Prefix,
            flags: ArcFlags::default(),
            horizon: self.horizon,
        };
        arc.flags = classify_arc(&arc);
        arc.flags.branch_pruned = self.flags.branch_pruned;
        arc
    }
}

/// Heuristic solution-class flags for an arc.
pub fn classify_arc(arc: &HybridArc) -> ArcFlags {
    let (t_max, _) = arc.horizon;
    let term = arc.termination;
    let mut f = ArcFlags {
        branch_pruned: arc.flags.branch_pruned,
        ..ArcFlags::default()
    };
    f.budget_truncated = matches!(
        term,
        Termination::TimeHorizon | Termination::JumpHorizon | Termination::Prefix
    );
    f.complete_heuristic = matches!(
        term,
        Termination::TimeHorizon | Termination::JumpHorizon | Termination::ZenoLimit { .. }
    );
    f.maximal_heuristic = matches!(term, Termination::DeadEnd | Termination::FiniteEscape);
    f.finite_escape = term == Termination::FiniteEscape;
    f.genuinely_zeno = matches!(term, Termination::ZenoLimit { .. });
    // no jump in the second half of the time horizon
    let last_jump_t = if arc.segments.len() > 1 {
        arc.segments.last().unwrap().t_start()
    } else {
        f64::NEG_INFINITY
    };
    f.eventually_continuous = term == Termination::TimeHorizon && last_jump_t <= 0.5 * t_max;
    // ordinary time stalled over the final jumps
    let tail = arc.segments.len().min(10);
    f.eventually_discrete = term == Termination::JumpHorizon
        && tail >= 3
        && arc.segments[arc.segments.len() - tail..]
            .iter()
            .all(|s| s.duration() == 0.0);
    let posts: Vec<&[f64]> = arc.segments.iter().skip(1).map(|s| s.samples[0].x.as_slice()).collect();
    f.recurrent = posts.iter().enumerate().any(|(k, p)| {
        posts[..k]
            .iter()
            .any(|q| dist(p, q) <= 1e-9 * (1.0 + p.iter().map(|v| v.abs()).sum::<f64>()))
    });
    f
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Settling {
    /// `t + j` at the first point in the target, `+inf` if never reached.
    pub value: f64,
    pub time: Option<HybridTime>,
    /// Entry was located between samples by bisection.
    pub refined: bool,
    /// Not reached and the arc was cut by a budget.
    pub budget_truncated: bool,
}

const BISECT_ITERS: usize = 80;

/// Settling time `min { t + j : x(t, j) in A }` over the sampled arc.
pub fn settling_time(arc: &HybridArc, a: &SetSpec) -> Settling {
    for seg in &arc.segments {
        for (k, smp) in seg.samples.iter().enumerate() {
            if a.contains(&smp.x) {
                if k == 0 || seg.samples[k - 1].t == smp.t {
                    return Settling {
                        value: smp.t + seg.j as f64,
                        time: Some(HybridTime::new(smp.t, seg.j)),
                        refined: false,
                        budget_truncated: false,
                    };
                }
                let (mut lo, mut hi) = (seg.samples[k - 1].t, smp.t);
                for _ in 0..BISECT_ITERS {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if a.contains(&seg.interpolate(k - 1, mid)) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                return Settling {
                    value: hi + seg.j as f64,
                    time: Some(HybridTime::new(hi, seg.j)),
                    refined: true,
                    budget_truncated: false,
                };
            }
        }
    }
    Settling {
        value: f64::INFINITY,
        time: None,
        refined: false,
        budget_truncated: arc.flags.budget_truncated,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ArcValidation {
    pub s0_violation: f64,
    pub flow_set_violation: f64,
    pub flow_residual: f64,
    pub jump_set_violation: f64,
    pub jump_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Checks S0, S1 and S2 along a sampled arc. The flow residual is the
/// Simpson-rule defect of the integral equation per unit time, minimized over
/// the flow selections.
pub fn validate_arc(h: &HybridSystem, arc: &HybridArc, tol: f64) -> ArcValidation {
    let cl_c = h.c.closure();
    let start = cl_c.union(&h.d).expect("same dim");
    let s0_violation = start.violation(arc.initial_state());
    let mut flow_set_violation: f64 = 0.0;
    let mut flow_residual: f64 = 0.0;
    for seg in &arc.segments {
        if seg.samples.len() < 2 {
            continue;
        }
        for smp in &seg.samples {
            flow_set_violation = flow_set_violation.max(cl_c.violation(&smp.x));
        }
        for (k, w) in seg.samples.windows(2).enumerate() {
            let dt = w[1].t - w[0].t;
            if dt <= 0.0 {
                continue;
            }
            let xm = seg.interpolate(k, w[0].t + 0.5 * dt);
            let best =
                h.f.selections()
                    .iter()
                    .map(|f| {
                        let (fa, fm, fb) = (f.eval(&w[0].x), f.eval(&xm), f.eval(&w[1].x));
                        (0..fa.len())
                            .map(|i| {
                                let integral = dt / 6.0 * (fa[i] + 4.0 * fm[i] + fb[i]);
                                ((w[1].x[i] - w[0].x[i] - integral) / dt).abs()
                            })
                            .fold(0.0, f64::max)
                    })
                    .fold(f64::INFINITY, f64::min);
            flow_residual = flow_residual.max(best);
        }
    }
    let mut jump_set_violation: f64 = 0.0;
    let mut jump_residual: f64 = 0.0;
    for (_, pre, post) in arc.jump_pairs() {
        jump_set_violation = jump_set_violation.max(h.d.violation(pre));
        let best = h
            .jump_values(pre)
            .iter()
            .map(|g| dist(g, post))
            .fold(f64::INFINITY, f64::min);
        jump_residual = jump_residual.max(best);
    }
    let pass = s0_violation <= tol
        && flow_set_violation <= tol
        && flow_residual <= tol
        && jump_set_violation <= tol
        && jump_residual <= tol;
    ArcValidation {
        s0_violation,
        flow_set_violation,
        flow_residual,
        jump_set_violation,
        jump_residual,
        tolerance: tol,
        pass,
    }
}

/// Union of all arc samples.
pub fn reachable_sample(arcs: &[HybridArc]) -> Vec<Vec<f64>> {
    arcs.iter().flat_map(|a| a.points().map(|p| p.x.to_vec())).collect()
}

/// Writes one delimiter-separated record per sample: `t, j, x..., in_C, in_D`.
pub fn export_trajectory(h: &HybridSystem, arc: &HybridArc, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(e.to_string()))?;
    let mut header = vec!["t".to_string(), "j".to_string()];
    header.extend(h.coords.iter().cloned());
    header.push("in_C".into());
    header.push("in_D".into());
    w.write_record(&header).map_err(|e| Error::Io(e.to_string()))?;
    for p in arc.points() {
        let mut rec = vec![format!("{}", p.time.t), p.time.j.to_string()];
        rec.extend(p.x.iter().map(|v| format!("{v}")));
        rec.push((h.in_c(p.x) as u8).to_string());
        rec.push((h.in_d(p.x) as u8).to_string());
        w.write_record(&rec).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
