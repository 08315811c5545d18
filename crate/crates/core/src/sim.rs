//! Simulation of hybrid inclusions: RK4 flows, bisection event location,
//! branching over flow/jump alternatives.

use crate::arc::{classify_arc, ArcFlags, HybridArc, Sample, Segment, Termination};
use crate::error::{Error, Result};
use crate::func::norm;
use crate::set::{Atom, Rel, SetSpec, TAU_SET};
use crate::system::HybridSystem;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SimBudget {
    pub t_max: f64,
    pub j_max: usize,
    pub branch_max: usize,
    pub dt: f64,
    pub tau_evt: f64,
    pub eps_zeno: f64,
    pub n_zeno: usize,
    pub escape_norm: f64,
}

impl Default for SimBudget {
    fn default() -> Self {
        SimBudget {
            t_max: 20.0,
            j_max: 200,
            branch_max: 8,
            dt: 1e-3,
            tau_evt: 1e-10,
            eps_zeno: 1e-6,
            n_zeno: 10,
            escape_norm: 1e9,
        }
    }
}

impl SimBudget {
    pub fn with_horizon(mut self, t_max: f64, j_max: usize) -> Self {
        self.t_max = t_max;
        self.j_max = j_max;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.t_max >= 0.0
            && self.dt > 0.0
            && self.branch_max >= 1
            && self.tau_evt > 0.0
            && self.eps_zeno > 0.0
            && self.n_zeno >= 2
            && self.escape_norm > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Invalid(format!("bad simulation budget {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Policy {
    /// Explore both flowing and jumping at points of C n D.
    Branch,
    /// Jump whenever a jump is possible.
    JumpPriority,
}

impl std::str::FromStr for Policy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "branch" => Ok(Policy::Branch),
            "jump-priority" => Ok(Policy::JumpPriority),
            _ => Err(Error::Invalid(format!("unknown policy '{s}'"))),
        }
    }
}

fn rk4(h: &HybridSystem, sel: usize, x: &[f64], dt: f64) -> Vec<f64> {
    let f = &h.f.selections()[sel];
    let add = |a: &[f64], b: &[f64], s: f64| -> Vec<f64> { a.iter().zip(b).map(|(p, q)| p + s * q).collect() };
    let k1 = f.eval(x);
    let k2 = f.eval(&add(x, &k1, dt / 2.0));
    let k3 = f.eval(&add(x, &k2, dt / 2.0));
    let k4 = f.eval(&add(x, &k3, dt));
    (0..x.len())
        .map(|i| x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

fn finite(x: &[f64]) -> bool {
    x.iter().all(|v| v.is_finite())
}

/// Can the flow selection `sel` leave `x` while staying in C.
fn can_flow(h: &HybridSystem, sel: usize, x: &[f64], budget: &SimBudget) -> bool {
    let fx = h.f.selections()[sel].eval(x);
    if !finite(&fx) {
        return false;
    }
    if norm(&fx) == 0.0 {
        return h.in_c(x);
    }
    let probe = budget.dt.min(1e-6);
    let y = rk4(h, sel, x, probe);
    finite(&y) && h.in_c(&y) && !heads_out(&h.c, x, &fx)
}

/// A short probe can stay within the set tolerance while the flow leaves `C`.
/// True when every region of `C` containing `x` has an active constraint whose
/// value increases to first order along `f`.
fn heads_out(c: &SetSpec, x: &[f64], f: &[f64]) -> bool {
    let mut any = false;
    for r in c.regions() {
        if !r.contains(x, TAU_SET) {
            continue;
        }
        any = true;
        let out = r.atoms().iter().any(|a| match a {
            Atom::Scalar { g, rel } => {
                let v = g.eval(x);
                let gr = g.grad(x);
                let d: f64 = gr.iter().zip(f).map(|(a, b)| a * b).sum();
                let thr = 1e-9 * (1.0 + norm(&gr) * norm(f));
                match rel {
                    Rel::Le | Rel::Lt => v.abs() <= TAU_SET && d > thr,
                    Rel::Eq => d.abs() > thr,
                }
            }
            Atom::Discrete { .. } => false,
        });
        if !out {
            return false;
        }
    }
    any
}

struct Partial {
    segments: Vec<Segment>,
    flags: ArcFlags,
    flow_blocked: bool,
    forced_flow: Option<usize>,
    key: f64,
    order: usize,
}

impl PartialEq for Partial {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Partial {}
impl PartialOrd for Partial {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Partial {
    // min-heap on (t + j, creation order)
    fn cmp(&self, o: &Self) -> Ordering {
        o.key.total_cmp(&self.key).then_with(|| o.order.cmp(&self.order))
    }
}

impl Partial {
    fn state(&self) -> &[f64] {
        &self.segments.last().unwrap().samples.last().unwrap().x
    }
    fn t(&self) -> f64 {
        self.segments.last().unwrap().t_end()
    }
    fn j(&self) -> usize {
        self.segments.len() - 1
    }
    fn rekey(&mut self) {
        self.key = self.t() + self.j() as f64;
    }
}

enum Choice {
    Flow(usize),
    Jump(Vec<f64>),
}

enum FlowEnd {
    Horizon,
    Escape,
    Decision,
    NoProgress,
}

/// Simulates all (up to `branch_max`) solutions from `x0`. Arcs are returned
/// in creation order; branches are advanced in order of `t + j`.
pub fn simulate(h: &HybridSystem, x0: &[f64], budget: &SimBudget, policy: Policy) -> Result<Vec<HybridArc>> {
    crate::error::check_dim(h.dim(), x0.len())?;
    budget.validate()?;
    let in_start = h.c.closure().contains(x0) || h.in_d(x0);
    if !in_start || !finite(x0) {
        return Err(Error::InitialState(x0.to_vec()));
    }
    let dx0 = h.f.selections()[0].eval(x0);
    let mut heap = BinaryHeap::new();
    heap.push(Partial {
        segments: vec![Segment {
            j: 0,
            samples: vec![Sample {
                t: 0.0,
                x: x0.to_vec(),
                dx: dx0,
            }],
        }],
        flags: ArcFlags::default(),
        flow_blocked: false,
        forced_flow: None,
        key: 0.0,
        order: 0,
    });
    let mut arcs_total = 1usize;
    let mut done: Vec<(usize, HybridArc)> = Vec::new();

    while let Some(mut p) = heap.pop() {
        match advance(h, &mut p, budget, policy, &mut arcs_total, &mut heap) {
            Some(term) => {
                let mut arc = HybridArc {
                    segments: p.segments,
                    termination: term,
                    flags: p.flags,
                    horizon: (budget.t_max, budget.j_max),
                };
                arc.flags = classify_arc(&arc);
                done.push((p.order, arc));
            }
            None => {
                p.rekey();
                heap.push(p);
            }
        }
    }
    done.sort_by_key(|(id, _)| *id);
    Ok(done.into_iter().map(|(_, a)| a).collect())
}

/// One decision and one action. Returns the termination reason when the arc ends.
fn advance(
    h: &HybridSystem,
    p: &mut Partial,
    budget: &SimBudget,
    policy: Policy,
    arcs_total: &mut usize,
    heap: &mut BinaryHeap<Partial>,
) -> Option<Termination> {
    let x = p.state().to_vec();
    let (t, j) = (p.t(), p.j());
    if j >= budget.j_max {
        return Some(Termination::JumpHorizon);
    }
    if let Some(t_limit) = zeno_limit(&p.segments, budget) {
        return Some(Termination::ZenoLimit { t_limit });
    }
    let first = if let Some(sel) = p.forced_flow.take() {
        Choice::Flow(sel)
    } else {
        let flows: Vec<usize> = if t < budget.t_max && !p.flow_blocked {
            (0..h.f.selections().len())
                .filter(|&s| can_flow(h, s, &x, budget))
                .collect()
        } else {
            vec![]
        };
        let jumps: Vec<Vec<f64>> = if h.in_d(&x) { h.jump_values(&x) } else { vec![] };
        if flows.is_empty() && jumps.is_empty() {
            return Some(if t >= budget.t_max {
                Termination::TimeHorizon
            } else {
                Termination::DeadEnd
            });
        }
        let mut choices: Vec<Choice> = Vec::new();
        let flow_choices = flows.iter().map(|&s| Choice::Flow(s));
        match policy {
            Policy::Branch => {
                choices.extend(flow_choices);
                choices.extend(jumps.into_iter().map(Choice::Jump));
            }
            Policy::JumpPriority if jumps.is_empty() => choices.extend(flow_choices),
            Policy::JumpPriority => choices.extend(jumps.into_iter().map(Choice::Jump)),
        }
        let mut it = choices.into_iter();
        let first = it.next().expect("nonempty");
        for alt in it {
            if *arcs_total >= budget.branch_max {
                p.flags.branch_pruned = true;
                continue;
            }
            let mut q = Partial {
                segments: p.segments.clone(),
                flags: p.flags,
                flow_blocked: false,
                forced_flow: None,
                key: 0.0,
                order: *arcs_total,
            };
            *arcs_total += 1;
            match alt {
                Choice::Jump(post) => push_jump(h, &mut q, post),
                Choice::Flow(sel) => q.forced_flow = Some(sel),
            }
            q.rekey();
            heap.push(q);
        }
        first
    };
    match first {
        Choice::Jump(post) => {
            push_jump(h, p, post);
            None
        }
        Choice::Flow(sel) => match flow(h, sel, p, budget) {
            FlowEnd::Decision => {
                p.flow_blocked = false;
                None
            }
            FlowEnd::NoProgress => {
                p.flow_blocked = true;
                None
            }
            FlowEnd::Horizon => Some(Termination::TimeHorizon),
            FlowEnd::Escape => Some(Termination::FiniteEscape),
        },
    }
}

fn push_jump(h: &HybridSystem, p: &mut Partial, post: Vec<f64>) {
    let t = p.t();
    let j = p.j();
    let dx = h.f.selections()[0].eval(&post);
    p.segments.push(Segment {
        j: j + 1,
        samples: vec![Sample { t, x: post, dx }],
    });
    p.flow_blocked = false;
}

/// Jump accumulation over the last `n_zeno` jumps, with pairwise distinct
/// post-jump states (so not a fixed point or cycle of `G`), detected when the
/// inter-jump flow times are either all below `eps_zeno` with some nonzero
/// flow, or positive and shrinking at a consistent geometric ratio. The second
/// rule is needed because flow times bottom out near the set tolerance before
/// reaching `eps_zeno`. Returns the limit time from a geometric-series fit.
fn zeno_limit(segs: &[Segment], b: &SimBudget) -> Option<f64> {
    let n = b.n_zeno;
    if segs.len() < n + 1 {
        return None;
    }
    let window = &segs[segs.len() - n..];
    for (i, a) in window.iter().enumerate() {
        if window[i + 1..].iter().any(|c| c.samples[0].x == a.samples[0].x) {
            return None;
        }
    }
    let gaps: Vec<f64> = window[..n - 1].iter().map(|s| s.duration()).collect();
    let small = gaps.iter().all(|g| *g < b.eps_zeno) && gaps.iter().any(|g| *g > 0.0);
    let ratios: Vec<f64> = gaps.windows(2).filter(|w| w[0] > 0.0).map(|w| w[1] / w[0]).collect();
    let q = if ratios.is_empty() {
        1.0
    } else {
        ratios.iter().sum::<f64>() / ratios.len() as f64
    };
    let geometric = gaps.iter().all(|g| *g > 0.0)
        && q < ZENO_MAX_RATIO
        && ratios.iter().all(|r| (r - q).abs() <= ZENO_RATIO_SPREAD * q);
    if !(small || geometric) {
        return None;
    }
    let t_last = segs.last().unwrap().t_start();
    let last = *gaps.last().unwrap();
    let tail = if q < 1.0 { last * q / (1.0 - q) } else { 0.0 };
    Some(t_last + tail)
}

/// Largest common ratio of inter-jump times accepted as geometric decay.
const ZENO_MAX_RATIO: f64 = 0.9;
/// Allowed relative spread of the ratios around their mean.
const ZENO_RATIO_SPREAD: f64 = 0.1;

fn sign_change(a: f64, b: f64) -> bool {
    (a <= 0.0 && b > 0.0) || (a >= 0.0 && b < 0.0) || (a < 0.0 && b >= 0.0) || (a > 0.0 && b <= 0.0)
}

/// Earliest step fraction in `(0, dt]` at which the flow from `x` enters `d`.
fn d_entry(h: &HybridSystem, sel: usize, x: &[f64], dt: f64, x_new: &[f64], d: &SetSpec, tau: f64) -> Option<f64> {
    let mut best: Option<f64> = None;
    let mut consider = |s: f64| {
        if best.map(|b| s < b).unwrap_or(true) {
            best = Some(s);
        }
    };
    if d.contains(x_new) {
        let (mut lo, mut hi) = (0.0, dt);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if d.contains(&rk4(h, sel, x, mid)) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        consider(hi);
    }
    for r in d.regions() {
        for a in r.atoms() {
            let Atom::Scalar { g, .. } = a else { continue };
            let (ga, gb) = (g.eval(x), g.eval(x_new));
            if !sign_change(ga, gb) || ga == 0.0 {
                continue;
            }
            let (mut lo, mut hi) = (0.0, dt);
            let mut mid = hi;
            for _ in 0..100 {
                mid = 0.5 * (lo + hi);
                let gm = g.eval(&rk4(h, sel, x, mid));
                if gm.abs() <= tau || mid <= lo || mid >= hi {
                    break;
                }
                if sign_change(ga, gm) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            if r.contains(&rk4(h, sel, x, mid), crate::set::TAU_SET) {
                consider(mid);
            }
        }
    }
    best
}

fn flow(h: &HybridSystem, sel: usize, p: &mut Partial, b: &SimBudget) -> FlowEnd {
    let f = &h.f.selections()[sel];
    let start_t = p.t();
    let mut watch_d = !h.in_d(p.state());
    loop {
        let x = p.state().to_vec();
        let t = p.t();
        if t >= b.t_max {
            return FlowEnd::Horizon;
        }
        let mut step = b.dt.min(b.t_max - t);
        let mut x_new = rk4(h, sel, &x, step);
        let mut halvings = 0;
        while !finite(&x_new) && halvings < 40 {
            step *= 0.5;
            x_new = rk4(h, sel, &x, step);
            halvings += 1;
        }
        if !finite(&x_new) {
            return FlowEnd::Escape;
        }
        let mut end = step;
        let mut decision = false;
        if !h.in_c(&x_new) {
            let (mut lo, mut hi) = (0.0, step);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let y = rk4(h, sel, &x, mid);
                if h.in_c(&y) {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 1e-15 * (1.0 + t) && h.c.violation(&rk4(h, sel, &x, hi)) <= b.tau_evt {
                    break;
                }
            }
            end = lo;
            decision = true;
        }
        if watch_d {
            if let Some(s) = d_entry(h, sel, &x, step, &x_new, &h.d, b.tau_evt) {
                if s <= end {
                    end = s;
                    decision = true;
                }
            }
        }
        if decision && end <= 1e-14 * (1.0 + t) {
            return if t == start_t {
                FlowEnd::NoProgress
            } else {
                FlowEnd::Decision
            };
        }
        let y = if end == step { x_new } else { rk4(h, sel, &x, end) };
        let dx = f.eval(&y);
        let seg = p.segments.last_mut().unwrap();
        seg.samples.push(Sample {
            t: t + end,
            x: y.clone(),
            dx,
        });
        if norm(&y) > b.escape_norm {
            return FlowEnd::Escape;
        }
        if decision {
            return FlowEnd::Decision;
        }
        if !watch_d && !h.in_d(&y) {
            watch_d = true;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::{ScalarFn, VectorFn};
    use crate::set::Region;
    use crate::system::SetValuedMap;

    fn timer() -> HybridSystem {
        let c = SetSpec::region(1, Region::new().bounds(1, &[(0, 0.0, 1.0)]));
        let d = SetSpec::region(1, Region::new().ge(ScalarFn::coord(0, 1, 1.0)));
        HybridSystem::new(
            "timer",
            &["x"],
            c,
            SetValuedMap::single(VectorFn::new("1", |_| vec![1.0])),
            d,
            SetValuedMap::single(VectorFn::new("0", |_| vec![0.0])),
        )
        .unwrap()
    }

    #[test]
    fn timer_cycles() {
        let b = SimBudget::default().with_horizon(5.0, 100);
        let arcs = simulate(&timer(), &[0.3], &b, Policy::Branch).unwrap();
        assert_eq!(arcs.len(), 1);
        let a = &arcs[0];
        assert_eq!(a.termination, Termination::TimeHorizon);
        assert_eq!(a.jumps(), 5);
        let (t1, pre, post) = a.jump_pairs().next().unwrap();
        assert!((t1 - 0.7).abs() < 1e-9 && (pre[0] - 1.0).abs() < 1e-9 && post[0] == 0.0);
        assert!(a.flags.complete_heuristic && a.flags.recurrent);
    }

    #[test]
    fn s0_rejected() {
        let b = SimBudget::default();
        assert!(matches!(
            simulate(&timer(), &[-0.5], &b, Policy::Branch),
            Err(Error::InitialState(_))
        ));
    }
}
