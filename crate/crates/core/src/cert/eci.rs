use super::barrier::ci_items;
use super::scalar::{is_nondecreasing, iterate_scalar_jump, simulate_scalar_flow, ScalarOutcome};
use super::{
    finite_escape_item, flow_item, jump_item, jump_subset_item, nontrivial_item, subset_item, thin, CheckConfig,
    CheckReport, CheckVerdict, EciCertificate, EciVariant, ItemReport,
};
use crate::arc::{settling_time, HybridArc};
use crate::aux::{build_hr, build_hw, strict_sublevel};
use crate::error::{Error, Result};
use crate::func::{ScalarFn, ScalarMap};
use crate::set::{Region, SetSpec};
use crate::sim::{simulate, Policy, SimBudget};
use crate::system::HybridSystem;
use rayon::prelude::*;
use serde::Serialize;

/// Every scalar flow from the values of `f` on the samples reaches `(-inf, r)`.
pub(crate) fn scalar_flow_item(
    id: &str,
    description: &str,
    f: &ScalarFn,
    starts: &[Vec<f64>],
    f_c: &ScalarMap,
    r: f64,
    cfg: &CheckConfig,
) -> ItemReport {
    let mut ys: Vec<f64> = starts.iter().map(|x| f.eval(x)).filter(|y| y.is_finite()).collect();
    let mut item = ItemReport::new(id, description, CheckVerdict::Pass);
    item.samples = ys.len();
    if ys.is_empty() {
        item.verdict = CheckVerdict::Inconclusive;
        return item.note("no initial samples");
    }
    ys.sort_by(f64::total_cmp);
    ys.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
    let y_max = *ys.last().unwrap();
    // solutions of a scalar ODE are ordered; when f_c < 0 on [r, y_max] the
    // largest start is the slowest
    let decreasing = y_max < r
        || (0..=1000).all(|k| {
            let y = r + (y_max - r) * k as f64 / 1000.0;
            f_c.eval(y) < 0.0
        });
    let check: Vec<f64> = if decreasing { vec![y_max] } else { thin(ys, 200) };
    if decreasing {
        item.notes
            .push("f_c < 0 above r: checked the largest start only".into());
    }
    let outs: Vec<(f64, ScalarOutcome)> = check
        .par_iter()
        .map(|&y0| (y0, simulate_scalar_flow(f_c, y0, r, cfg.scalar_t_max, cfg.tau_cert)))
        .collect();
    let mut t_star: f64 = 0.0;
    for (y0, o) in outs {
        match o {
            ScalarOutcome::Converged { at } => t_star = t_star.max(at),
            ScalarOutcome::Tie => {
                if item.verdict == CheckVerdict::Pass {
                    item.verdict = CheckVerdict::Inconclusive;
                }
                item.notes.push(format!("tie at r from y0 = {y0}"));
            }
            ScalarOutcome::NotConverged { last } => {
                item.verdict = CheckVerdict::Fail;
                item = item.with_witness(vec![y0], last - r);
            }
        }
    }
    item.residual_max = item.residual_max.max(0.0);
    item.note(format!("max hitting time {t_star:.6}"))
}

/// Every iteration of `f_d` from the values of `f` on the samples gets below `r`.
pub(crate) fn scalar_jump_item(
    id: &str,
    description: &str,
    f: &ScalarFn,
    starts: &[Vec<f64>],
    f_d: &ScalarMap,
    r: f64,
    cfg: &CheckConfig,
) -> ItemReport {
    let mut zs: Vec<f64> = starts.iter().map(|x| f.eval(x)).filter(|z| z.is_finite()).collect();
    let mut item = ItemReport::new(id, description, CheckVerdict::Pass);
    item.samples = zs.len();
    if zs.is_empty() {
        item.verdict = CheckVerdict::Inconclusive;
        return item.note("no initial samples");
    }
    zs.sort_by(f64::total_cmp);
    zs.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
    let mut j_star: f64 = 0.0;
    for z0 in thin(zs, 400) {
        match iterate_scalar_jump(f_d, z0, r, cfg.scalar_j_max, cfg.tau_cert) {
            ScalarOutcome::Converged { at } => j_star = j_star.max(at),
            ScalarOutcome::Tie => {
                if item.verdict == CheckVerdict::Pass {
                    item.verdict = CheckVerdict::Inconclusive;
                }
                item.notes.push(format!("tie at r from z0 = {z0}"));
            }
            ScalarOutcome::NotConverged { last } => {
                item.verdict = CheckVerdict::Fail;
                item = item.with_witness(vec![z0], last - r);
            }
        }
    }
    item.residual_max = item.residual_max.max(0.0);
    item.note(format!("max jump count {j_star}"))
}

/// Rejects `f_d` that is not nondecreasing on the range of `w` over the samples.
pub(crate) fn monotone_gate(f_d: &ScalarMap, w: &ScalarFn, pts: &[Vec<f64>], r2: f64) -> ItemReport {
    let mut lo = r2;
    let mut hi = r2;
    for x in pts {
        let v = w.eval(x);
        if v.is_finite() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let pad = 0.1 * (hi - lo).max(1.0);
    let item = ItemReport::new(
        "f_d-monotone",
        "f_d nondecreasing on the working interval",
        CheckVerdict::Pass,
    );
    match is_nondecreasing(f_d, lo - pad, hi + pad, 4001) {
        Ok(()) => item.note(format!("tested on [{:.4}, {:.4}]", lo - pad, hi + pad)),
        Err((a, b)) => {
            let mut it = item.with_witness(vec![a, b], f_d.eval(a) - f_d.eval(b));
            it.verdict = CheckVerdict::Fail;
            it
        }
    }
}

/// Simulates from up to `max_arc_starts` samples of `o`.
pub(crate) fn arcs_from(h: &HybridSystem, o: &SetSpec, cfg: &CheckConfig) -> Vec<HybridArc> {
    let starts = cfg.arc_starts(o);
    let start_set = h.c.closure().union(&h.d).expect("dim");
    starts
        .par_iter()
        .filter(|x| start_set.contains(x))
        .map(|x| simulate(h, x, &cfg.budget, Policy::Branch).unwrap_or_default())
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// Solution-class precondition of a variant, judged on simulated arcs.
pub(crate) fn class_item(variant: EciVariant, arcs: &[HybridArc]) -> ItemReport {
    let complete: Vec<&HybridArc> = arcs.iter().filter(|a| a.flags.complete_heuristic).collect();
    let mut item = ItemReport::new(
        "solution-class",
        "complete solutions belong to the variant's class",
        CheckVerdict::Pass,
    );
    item.samples = complete.len();
    item.residual_max = 0.0;
    let mut unclassified = 0;
    for a in &complete {
        let f = a.flags;
        let (bad, unknown) = match variant {
            EciVariant::A => (f.eventually_discrete || f.genuinely_zeno, !f.eventually_continuous),
            EciVariant::B => (f.eventually_continuous || f.genuinely_zeno, !f.eventually_discrete),
            EciVariant::C => (f.genuinely_zeno, false),
            EciVariant::D => (false, false),
        };
        if bad {
            item.verdict = CheckVerdict::Fail;
            item = item.with_witness(a.initial_state().to_vec(), 1.0);
        } else if unknown {
            unclassified += 1;
        }
    }
    if unclassified > 0 && item.verdict == CheckVerdict::Pass {
        item.verdict = CheckVerdict::Inconclusive;
        item.notes
            .push(format!("{unclassified} complete arcs could not be classified"));
    }
    if variant == EciVariant::D {
        item = item.note("no class restriction");
    }
    item
}

/// The pre-ECI conditions for `A` from `O`.
pub fn check_pre_eci(
    h: &HybridSystem,
    o: &SetSpec,
    a: &SetSpec,
    cert: &EciCertificate,
    variant: EciVariant,
    cfg: &CheckConfig,
) -> Result<CheckReport> {
    let pc = cfg.sample(&h.c);
    let pd = cfg.sample(&h.d);
    let po = cfg.sample(o);
    let mut gate_pts = cfg.sample(&h.c_union_d());
    gate_pts.extend(po.iter().cloned());
    let gate = monotone_gate(&cert.f_d, &cert.w, &gate_pts, cert.r2);
    if gate.verdict == CheckVerdict::Fail {
        return Ok(CheckReport::new("pre-eci", vec![gate]));
    }
    let (v, w) = (&cert.v, &cert.w);
    let mut items = vec![gate];
    items.push(flow_item(
        "1a-flow",
        "<grad v, eta> <= f_c(v) on C",
        h,
        &pc,
        &h.c,
        v,
        |x| cert.f_c.eval(v.eval(x)),
        cfg,
    ));
    items.push(jump_item(
        "1a-jump",
        "v(eta) <= v(x) on D",
        h,
        &pd,
        |x, eta| v.eval(eta) - v.eval(x),
        cfg,
    ));
    items.push(scalar_flow_item(
        "1b",
        "y' = f_c(y) from v(O) reaches (-inf, r1)",
        v,
        &po,
        &cert.f_c,
        cert.r1,
        cfg,
    ));
    items.push(flow_item(
        "2a-flow",
        "<grad w, eta> <= 0 on C",
        h,
        &pc,
        &h.c,
        w,
        |_| 0.0,
        cfg,
    ));
    items.push(jump_item(
        "2a-jump",
        "w(eta) <= f_d(w(x)) on D",
        h,
        &pd,
        |x, eta| w.eval(eta) - cert.f_d.eval(w.eval(x)),
        cfg,
    ));
    items.push(scalar_jump_item(
        "2b",
        "z+ = f_d(z) from w(O) reaches (-inf, r2)",
        w,
        &po,
        &cert.f_d,
        cert.r2,
        cfg,
    ));
    let s1 = strict_sublevel(&h.c, v, cert.r1)?;
    let s2 = strict_sublevel(&h.d, w, cert.r2)?;
    items.extend(variant_items(h, variant, &s1, &s2, &h.c, a, o, cfg, "3")?);
    Ok(CheckReport::new("pre-eci", items))
}

pub(crate) fn variant_items(
    h: &HybridSystem,
    variant: EciVariant,
    s1: &SetSpec,
    s2: &SetSpec,
    flow_region: &SetSpec,
    a: &SetSpec,
    o: &SetSpec,
    cfg: &CheckConfig,
    tag: &str,
) -> Result<Vec<ItemReport>> {
    let p1 = cfg.sample(s1);
    let p2 = cfg.sample(s2);
    let mut items = vec![];
    if variant != EciVariant::B {
        items.push(subset_item(&format!("{tag}-S1"), "S1 inside the target", &p1, a));
    }
    if variant != EciVariant::A {
        items.push(subset_item(&format!("{tag}-S2"), "S2 inside the target", &p2, a));
    }
    if variant == EciVariant::D {
        items.push(jump_subset_item(
            &format!("{tag}-G(S2)"),
            "G(S2) n C inside S1",
            h,
            &p2,
            Some(flow_region),
            s1,
        ));
    } else {
        let arcs = arcs_from(h, o, cfg);
        items.push(class_item(variant, &arcs).prefixed(&format!("{tag}-")));
    }
    Ok(items)
}

/// pre-ECI through flows: `S1 in A`, hitting time within each arc's time
/// extent, and either `G(A n D) in A` or eventually continuous solutions.
pub fn check_pre_eci_flows(
    h: &HybridSystem,
    o: &SetSpec,
    a: &SetSpec,
    v: &ScalarFn,
    f_c: &ScalarMap,
    r1: f64,
    cfg: &CheckConfig,
) -> Result<CheckReport> {
    let pc = cfg.sample(&h.c);
    let pd = cfg.sample(&h.d);
    let po = cfg.sample(o);
    let mut items = vec![
        flow_item(
            "1a-flow",
            "<grad v, eta> <= f_c(v) on C",
            h,
            &pc,
            &h.c,
            v,
            |x| f_c.eval(v.eval(x)),
            cfg,
        ),
        jump_item(
            "1a-jump",
            "v(eta) <= v(x) on D",
            h,
            &pd,
            |x, eta| v.eval(eta) - v.eval(x),
            cfg,
        ),
        scalar_flow_item("1b", "y' = f_c(y) from v(O) reaches (-inf, r1)", v, &po, f_c, r1, cfg),
    ];
    let s1 = strict_sublevel(&h.c, v, r1)?;
    items.push(subset_item("S1", "S1 inside A", &cfg.sample(&s1), a));
    let arcs = arcs_from(h, o, cfg);
    items.push(arc_time_item(
        &arcs,
        |arc| {
            let y0 = v.eval(arc.initial_state());
            simulate_scalar_flow(f_c, y0, r1, cfg.scalar_t_max, cfg.tau_cert)
                .at()
                .map(|t| t - arc.sup_t())
        },
        "t-star",
        "hitting time t* within sup_t of each complete arc",
    ));
    let ad = a.intersection(&h.d)?;
    let g_in_a = jump_subset_item("G(A n D)", "G(A n D) inside A", h, &cfg.sample(&ad), None, a);
    if g_in_a.verdict == CheckVerdict::Pass {
        items.push(g_in_a);
    } else {
        let cls = class_item(EciVariant::A, &arcs);
        let mut alt = g_in_a.note("falls back to the eventually-continuous alternative");
        alt.verdict = cls.verdict;
        items.push(alt);
        items.push(cls);
    }
    Ok(CheckReport::new("pre-eci-flows", items))
}

pub(crate) fn arc_time_item(
    arcs: &[HybridArc],
    excess: impl Fn(&HybridArc) -> Option<f64>,
    id: &str,
    desc: &str,
) -> ItemReport {
    let mut item = ItemReport::new(id, desc, CheckVerdict::Pass);
    item.residual_max = f64::NEG_INFINITY;
    for arc in arcs.iter().filter(|a| a.flags.complete_heuristic) {
        item.samples += 1;
        match excess(arc) {
            Some(e) => {
                item.residual_max = item.residual_max.max(e);
                if e > 0.0 {
                    // sup_t of a horizon-truncated arc is only a lower bound
                    if arc.flags.budget_truncated {
                        if item.verdict == CheckVerdict::Pass {
                            item.verdict = CheckVerdict::Inconclusive;
                        }
                    } else {
                        item.verdict = CheckVerdict::Fail;
                        item = item.with_witness(arc.initial_state().to_vec(), e);
                    }
                }
            }
            None => {
                item.verdict = CheckVerdict::Fail;
                item = item.with_witness(arc.initial_state().to_vec(), f64::INFINITY);
            }
        }
    }
    if item.samples == 0 {
        item.residual_max = 0.0;
        item.notes.push("vacuous: no complete arcs".into());
    }
    item
}

/// pre-ECI through jumps: `{x in C u D : w < r2} in A` and the jump count
/// within each arc's jump extent.
pub fn check_pre_eci_jumps(
    h: &HybridSystem,
    o: &SetSpec,
    a: &SetSpec,
    w: &ScalarFn,
    f_d: &ScalarMap,
    r2: f64,
    cfg: &CheckConfig,
) -> Result<CheckReport> {
    let pc = cfg.sample(&h.c);
    let pd = cfg.sample(&h.d);
    let po = cfg.sample(o);
    let mut gate_pts = pc.clone();
    gate_pts.extend(pd.iter().cloned());
    gate_pts.extend(po.iter().cloned());
    let gate = monotone_gate(f_d, w, &gate_pts, r2);
    if gate.verdict == CheckVerdict::Fail {
        return Ok(CheckReport::new("pre-eci-jumps", vec![gate]));
    }
    let mut items = vec![
        gate,
        flow_item("2a-flow", "<grad w, eta> <= 0 on C", h, &pc, &h.c, w, |_| 0.0, cfg),
        jump_item(
            "2a-jump",
            "w(eta) <= f_d(w(x)) on D",
            h,
            &pd,
            |x, eta| w.eval(eta) - f_d.eval(w.eval(x)),
            cfg,
        ),
        scalar_jump_item("2b", "z+ = f_d(z) from w(O) reaches (-inf, r2)", w, &po, f_d, r2, cfg),
    ];
    let s2 = strict_sublevel(&h.c_union_d(), w, r2)?;
    items.push(subset_item("S2", "{x in C u D : w < r2} inside A", &cfg.sample(&s2), a));
    let arcs = arcs_from(h, o, cfg);
    items.push(arc_time_item(
        &arcs,
        |arc| {
            let z0 = w.eval(arc.initial_state());
            iterate_scalar_jump(f_d, z0, r2, cfg.scalar_j_max, cfg.tau_cert)
                .at()
                .map(|j| j - arc.sup_j_extent())
        },
        "j-star",
        "jump count j* within sup_j of each complete arc",
    ));
    Ok(CheckReport::new("pre-eci-jumps", items))
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowLengths {
    pub tau_m: f64,
    pub interval: (f64, f64),
    pub observed: (f64, f64),
    pub intervals: usize,
}

/// Hull of the flow durations between jumps while outside `K`, inflated by
/// `rho` (0.1 = 10%).
pub fn estimate_flow_lengths(
    h: &HybridSystem,
    starts: &[Vec<f64>],
    k: &SetSpec,
    budget: &SimBudget,
    rho: f64,
) -> Result<FlowLengths> {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    let mut count = 0;
    for x0 in starts {
        for arc in simulate(h, x0, budget, Policy::JumpPriority)? {
            for seg in &arc.segments {
                if k.contains(&seg.samples[0].x) {
                    break;
                }
                let ends_in_jump = seg.j < arc.segments.len() - 1;
                let ends_in_k = seg.samples.iter().any(|s| k.contains(&s.x));
                if !(ends_in_jump || ends_in_k) {
                    continue;
                }
                let d = seg.duration();
                lo = lo.min(d);
                hi = hi.max(d);
                count += 1;
            }
        }
    }
    if count == 0 {
        return Err(Error::Invalid("no flow intervals observed outside K".into()));
    }
    Ok(FlowLengths {
        tau_m: hi * (1.0 + rho),
        interval: (lo / (1.0 + rho), hi * (1.0 + rho)),
        observed: (lo, hi),
        intervals: count,
    })
}

/// pre-ECI from flow lengths: `v` decreases like `f_c` on `C \ K`, like `f_d`
/// over jumps on `D \ K`, `{C u D : v < r} in A`, and every solution of H_r
/// from `v(O) x {0}` reaches `y < r`.
pub fn check_pre_eci_flowlengths(
    h: &HybridSystem,
    o: &SetSpec,
    a: &SetSpec,
    k: &SetSpec,
    v: &ScalarFn,
    f_c: &ScalarMap,
    f_d: &ScalarMap,
    r: f64,
    lengths: &FlowLengths,
    cfg: &CheckConfig,
) -> Result<CheckReport> {
    let ck = h.c.difference(k)?;
    let dk = h.d.difference(k)?;
    let pc = cfg.sample(&ck);
    let pd = cfg.sample(&dk);
    let mut items = vec![
        flow_item(
            "flow",
            "<grad v, eta> <= f_c(v) on C \\ K",
            h,
            &pc,
            &h.c,
            v,
            |x| f_c.eval(v.eval(x)),
            cfg,
        ),
        jump_item(
            "jump",
            "v(eta) <= f_d(v(x)) on D \\ K",
            h,
            &pd,
            |x, eta| v.eval(eta) - f_d.eval(v.eval(x)),
            cfg,
        ),
    ];
    let s = strict_sublevel(&h.c_union_d(), v, r)?;
    items.push(subset_item("S", "{x in C u D : v < r} inside A", &cfg.sample(&s), a));
    let hr = build_hr(f_c, f_d, lengths.tau_m, lengths.interval)?;
    let ys: Vec<f64> = cfg.sample(o).iter().map(|x| v.eval(x)).collect();
    let mut hr_item = ItemReport::new(
        "H_r",
        "solutions of H_r from v(O) x {0} reach y < r",
        CheckVerdict::Pass,
    );
    hr_item.residual_max = f64::NEG_INFINITY;
    let target = SetSpec::region(2, Region::new().lt(ScalarFn::coord(0, 2, r - cfg.tau_cert)));
    let mut max_j = 0usize;
    let mut ys_sorted = ys.clone();
    ys_sorted.sort_by(f64::total_cmp);
    ys_sorted.dedup();
    for y0 in thin(ys_sorted, 32) {
        for arc in simulate(&hr, &[y0, 0.0], &cfg.budget, Policy::Branch)? {
            hr_item.samples += 1;
            let s = settling_time(&arc, &target);
            match s.time {
                Some(t) => max_j = max_j.max(t.j),
                None => {
                    let last = arc.final_state()[0];
                    hr_item.residual_max = hr_item.residual_max.max(last - r);
                    hr_item = hr_item.with_witness(vec![y0, 0.0], last - r);
                    hr_item.verdict = if arc.flags.maximal_heuristic || hr_item.verdict == CheckVerdict::Fail {
                        CheckVerdict::Fail
                    } else {
                        CheckVerdict::Inconclusive
                    };
                }
            }
        }
    }
    if hr_item.samples == 0 {
        hr_item.verdict = CheckVerdict::Inconclusive;
    }
    hr_item.residual_max = hr_item.residual_max.max(0.0);
    items.push(hr_item.note(format!(
        "tau_M = {:.6}, I = [{:.6}, {:.6}], max jumps to reach y < r: {max_j}",
        lengths.tau_m, lengths.interval.0, lengths.interval.1
    )));
    Ok(CheckReport::new("pre-eci-flowlengths", items))
}

/// pre to non-pre: `O u A in S in C u D u A` and `S = {B_S <= 0}` forward
/// invariant for H_w with `Q = A`.
pub fn check_pre_to_nonpre(
    h: &HybridSystem,
    o: &SetSpec,
    a: &SetSpec,
    s: &SetSpec,
    b_s: &ScalarFn,
    cfg: &CheckConfig,
) -> Result<CheckReport> {
    let oa = o.union(a)?;
    let cda = h.c_union_d().union(a)?;
    let mut items = vec![
        subset_item("O u A in S", "O u A inside S", &cfg.sample(&oa), s),
        subset_item("S in C u D u A", "S inside C u D u A", &cfg.sample(s), &cda),
    ];
    let hw = build_hw(h, a)?;
    let cd = hw.c_union_d();
    let xu = s.complement()?;
    items.extend(super::check_barrier_candidate(&cd, b_s, s, &xu, cfg)?.into_items("fi-"));
    items.extend(
        ci_items(&hw, b_s, &cd, &hw.c, &hw.c, &hw.d, &cd, cfg)?
            .into_iter()
            .map(|i| i.prefixed("fi-")),
    );
    let kc = s.intersection(&hw.c)?;
    items.push(finite_escape_item(&hw, &kc, cfg).prefixed("fi-"));
    items.push(nontrivial_item(&hw, s, &kc, cfg)?.prefixed("fi-"));
    Ok(CheckReport::new("pre-to-nonpre", items))
}
