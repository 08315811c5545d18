//! Until certification: composes the certificate checks into the weak and
//! strong until theorems. Item ids follow the theorem items ("1", "2.1", ...).

use crate::arc::HybridArc;
use crate::aux::strict_sublevel;
use crate::cert::barrier::ci_items;
use crate::cert::eci::{arcs_from, monotone_gate, scalar_flow_item, scalar_jump_item, variant_items};
use crate::cert::iterate_scalar_jump;
use crate::cert::simulate_scalar_flow;
use crate::cert::{
    check_barrier_candidate, finite_escape_item, flow_item, jump_item, nontrivial_item, subset_item, CheckConfig,
    CheckReport, CheckVerdict, EciCertificate, EciVariant, FtaCertificate, ItemReport,
};
use crate::error::{check_dim, Result};
use crate::func::{ScalarFn, ScalarMap};
use crate::monitor::{PropositionPair, Verdict};
use crate::set::{Region, SetSpec};
use crate::system::HybridSystem;
use serde::Serialize;

/// Sets shared by the until theorems.
struct UntilSets {
    p_minus_q: SetSpec,
    /// `C \ Q`, the flow set of H_w.
    c_w: SetSpec,
    /// `cl((C \ Q) n P)`.
    cl_cs: SetSpec,
    /// `(D n P) u Q`.
    d_s: SetSpec,
    d_p: SetSpec,
}

impl UntilSets {
    fn new(h: &HybridSystem, pq: &PropositionPair) -> Result<Self> {
        check_dim(h.dim(), pq.p.dim())?;
        let c_w = h.c.difference(&pq.q)?;
        let cs = c_w.intersection(&pq.p)?;
        let d_p = h.d.intersection(&pq.p)?;
        Ok(UntilSets {
            p_minus_q: pq.p_minus_q(),
            cl_cs: cs.closure().labeled("cl(C_s)"),
            d_s: d_p.union(&pq.q)?.labeled("D_s"),
            d_p,
            c_w,
        })
    }
}

/// Weak until via a barrier `B` for `K = {x in C u D u Q : B(x) <= 0}`.
pub fn certify_weak_until(
    h: &HybridSystem,
    pq: &PropositionPair,
    b: &ScalarFn,
    cfg: &CheckConfig,
) -> Result<CheckReport> {
    let s = UntilSets::new(h, pq)?;
    let cdq = h.c_union_d().union(&pq.q)?;
    let mut items = vec![subset_item(
        "assumption",
        "P inside C u D",
        &cfg.sample(&pq.p),
        &h.c_union_d(),
    )];
    let xu = pq.p_or_q().complement()?;
    items.extend(check_barrier_candidate(&h.c_union_d(), b, &s.p_minus_q, &xu, cfg)?.items);
    let d_w = h.d.difference(&pq.q)?;
    let ci = ci_items(h, b, &cdq, &s.c_w, &s.c_w, &d_w, &cdq, cfg)?;
    for (item, id) in ci.into_iter().zip(["1", "2", "3"]) {
        items.push(ItemReport { id: id.into(), ..item });
    }
    Ok(CheckReport::new("weak", items))
}

fn weak_part(h: &HybridSystem, pq: &PropositionPair, b: &ScalarFn, cfg: &CheckConfig) -> Result<Vec<ItemReport>> {
    Ok(certify_weak_until(h, pq, b, cfg)?.into_items("1."))
}

fn v_items(
    h: &HybridSystem,
    s: &UntilSets,
    v: &ScalarFn,
    f_c: &ScalarMap,
    r1: f64,
    cfg: &CheckConfig,
    tag: &str,
) -> Vec<ItemReport> {
    let pcs = cfg.sample(&s.cl_cs);
    let pdp = cfg.sample(&s.d_p);
    let ppq = cfg.sample(&s.p_minus_q);
    vec![
        flow_item(
            &format!("{tag}.1"),
            "<grad v, eta> <= f_c(v) on cl(C_s)",
            h,
            &pcs,
            &s.cl_cs,
            v,
            |x| f_c.eval(v.eval(x)),
            cfg,
        ),
        jump_item(
            &format!("{tag}.2"),
            "v(eta) <= v(x) on D n P",
            h,
            &pdp,
            |x, eta| v.eval(eta) - v.eval(x),
            cfg,
        ),
        scalar_flow_item(
            &format!("{tag}.3"),
            "y' = f_c(y) from v(P \\ Q) reaches (-inf, r1)",
            v,
            &ppq,
            f_c,
            r1,
            cfg,
        ),
    ]
}

fn w_items(
    h: &HybridSystem,
    s: &UntilSets,
    w: &ScalarFn,
    f_d: &ScalarMap,
    r2: f64,
    cfg: &CheckConfig,
    tag: &str,
) -> Vec<ItemReport> {
    let pcs = cfg.sample(&s.cl_cs);
    let pdp = cfg.sample(&s.d_p);
    let ppq = cfg.sample(&s.p_minus_q);
    let mut all = pcs.clone();
    all.extend(pdp.iter().cloned());
    all.extend(ppq.iter().cloned());
    vec![
        monotone_gate(f_d, w, &all, r2).prefixed(&format!("{tag}.")),
        flow_item(
            &format!("{tag}.1"),
            "<grad w, eta> <= 0 on cl(C_s)",
            h,
            &pcs,
            &s.cl_cs,
            w,
            |_| 0.0,
            cfg,
        ),
        jump_item(
            &format!("{tag}.2"),
            "w(eta) <= f_d(w(x)) on D n P",
            h,
            &pdp,
            |x, eta| w.eval(eta) - f_d.eval(w.eval(x)),
            cfg,
        ),
        scalar_jump_item(
            &format!("{tag}.3"),
            "z+ = f_d(z) from w(P \\ Q) reaches (-inf, r2)",
            w,
            &ppq,
            f_d,
            r2,
            cfg,
        ),
    ]
}

fn escape_and_nontrivial(h: &HybridSystem, s: &UntilSets, cfg: &CheckConfig, first: usize) -> Result<Vec<ItemReport>> {
    let pqc = s.p_minus_q.intersection(&h.c)?;
    Ok(vec![
        finite_escape_item(h, &pqc, cfg).prefixed(&format!("{first}.")),
        nontrivial_item(h, &s.p_minus_q, &h.c, cfg)?.prefixed(&format!("{}.", first + 1)),
    ])
}

/// Strong until via the ECI conditions. Report items are numbered 1 to 6.
pub fn certify_strong_until_eci(
    h: &HybridSystem,
    pq: &PropositionPair,
    b: &ScalarFn,
    cert: &EciCertificate,
    variant: EciVariant,
    cfg: &CheckConfig,
) -> Result<CheckReport> {
    let s = UntilSets::new(h, pq)?;
    let mut items = weak_part(h, pq, b, cfg)?;
    items.extend(v_items(h, &s, &cert.v, &cert.f_c, cert.r1, cfg, "2"));
    let w = w_items(h, &s, &cert.w, &cert.f_d, cert.r2, cfg, "3");
    let gate_failed = w[0].verdict == CheckVerdict::Fail;
    items.extend(w);
    if gate_failed {
        return Ok(CheckReport::new("strong-eci", items));
    }
    let s1 = strict_sublevel(&s.cl_cs, &cert.v, cert.r1)?.labeled("S1");
    let s2 = strict_sublevel(&s.d_s, &cert.w, cert.r2)?.labeled("S2");
    let var = variant_items(h, variant, &s1, &s2, &s.cl_cs, &pq.q, &s.p_minus_q, cfg, "4")?;
    items.extend(var);
    items.extend(escape_and_nontrivial(h, &s, cfg, 5)?);
    Ok(CheckReport::new("strong-eci", items))
}

fn per_arc_item(arcs: &[HybridArc], id: &str, desc: &str, excess: impl Fn(&HybridArc) -> Option<f64>) -> ItemReport {
    let mut item = ItemReport::new(id, desc, CheckVerdict::Pass);
    item.residual_max = 0.0;
    for arc in arcs {
        item.samples += 1;
        match excess(arc) {
            Some(e) if e <= 0.0 => {}
            Some(e) if arc.flags.budget_truncated => {
                // the extent of a truncated arc is only a lower bound
                item.residual_max = item.residual_max.max(e);
                if item.verdict == CheckVerdict::Pass {
                    item.verdict = CheckVerdict::Inconclusive;
                }
            }
            Some(e) => {
                item.verdict = CheckVerdict::Fail;
                item = item.with_witness(arc.initial_state().to_vec(), e);
            }
            None => {
                item.verdict = CheckVerdict::Fail;
                item = item.with_witness(arc.initial_state().to_vec(), f64::INFINITY);
            }
        }
    }
    if item.samples == 0 {
        item.notes.push("vacuous: no solutions from P \\ Q".into());
    }
    item
}

/// Strong until via ECI through flows.
pub fn certify_strong_until_eci_flows(
    h: &HybridSystem,
    pq: &PropositionPair,
    b: &ScalarFn,
    v: &ScalarFn,
    f_c: &ScalarMap,
    r1: f64,
    cfg: &CheckConfig,
) -> Result<CheckReport> {
    let s = UntilSets::new(h, pq)?;
    let mut items = weak_part(h, pq, b, cfg)?;
    items.extend(v_items(h, &s, v, f_c, r1, cfg, "2"));
    let s1 = strict_sublevel(&s.cl_cs, v, r1)?;
    items.push(subset_item(
        "2.3-S1",
        "S1 = {x in cl(C_s) : v < r1} inside Q",
        &cfg.sample(&s1),
        &pq.q,
    ));
    let arcs = arcs_from(h, &s.p_minus_q, cfg);
    items.push(per_arc_item(
        &arcs,
        "3",
        "t* <= sup_t on every solution from P \\ Q",
        |arc| {
            let y0 = v.eval(arc.initial_state());
            simulate_scalar_flow(f_c, y0, r1, cfg.scalar_t_max, cfg.tau_cert)
                .at()
                .map(|t| t - arc.sup_t())
        },
    ));
    Ok(CheckReport::new("strong-eci-flows", items))
}

/// Strong until via ECI through jumps.
pub fn certify_strong_until_eci_jumps(
    h: &HybridSystem,
    pq: &PropositionPair,
    b: &ScalarFn,
    w: &ScalarFn,
    f_d: &ScalarMap,
    r2: f64,
    cfg: &CheckConfig,
) -> Result<CheckReport> {
    let s = UntilSets::new(h, pq)?;
    let mut items = weak_part(h, pq, b, cfg)?;
    let wi = w_items(h, &s, w, f_d, r2, cfg, "2");
    let gate_failed = wi[0].verdict == CheckVerdict::Fail;
    items.extend(wi);
    if gate_failed {
        return Ok(CheckReport::new("strong-eci-jumps", items));
    }
    let s2 = strict_sublevel(&s.d_s.union(&s.cl_cs)?, w, r2)?;
    items.push(subset_item(
        "2.3-S2",
        "S2 = {x in D_s u cl(C_s) : w < r2} inside Q",
        &cfg.sample(&s2),
        &pq.q,
    ));
    let arcs = arcs_from(h, &s.p_minus_q, cfg);
    items.push(per_arc_item(
        &arcs,
        "3",
        "j* <= sup_j on every solution from P \\ Q",
        |arc| {
            let z0 = w.eval(arc.initial_state());
            iterate_scalar_jump(f_d, z0, r2, cfg.scalar_j_max, cfg.tau_cert)
                .at()
                .map(|j| j - arc.sup_j_extent())
        },
    ));
    Ok(CheckReport::new("strong-eci-jumps", items))
}

/// Strong until via FTA: `V`, `W` positive definite with respect to `Q` on `N`.
pub fn certify_strong_until_fta(
    h: &HybridSystem,
    pq: &PropositionPair,
    b: &ScalarFn,
    cert: &FtaCertificate,
    cfg: &CheckConfig,
) -> Result<CheckReport> {
    cert.validate()?;
    let s = UntilSets::new(h, pq)?;
    let mut items = weak_part(h, pq, b, cfg)?;
    let q = &pq.q;
    let cdn = h.c_union_d().intersection(&cert.n)?;
    let pn = cfg.sample(&cdn);
    let pd = |f: &ScalarFn, id: &str| {
        crate::cert::residual_item(
            id,
            "positive definite with respect to Q on (C u D) n N",
            &pn,
            0.0,
            |x| {
                let v = f.eval(x);
                let r = if q.contains(x) {
                    (v.abs() - cfg.tau_cert).max(0.0)
                } else if v > 0.0 {
                    0.0
                } else {
                    f64::MIN_POSITIVE - v
                };
                vec![(r, None)]
            },
        )
    };
    items.push(pd(&cert.v, "pre.V-pd"));
    items.push(pd(&cert.w, "pre.W-pd"));
    let ppq = cfg.sample(&s.p_minus_q);
    for (f, name) in [(&cert.v, "V"), (&cert.w, "W")] {
        let lr = SetSpec::region(h.dim(), Region::new().le(f.shifted(cert.r)))
            .intersection(&h.c_union_d())?
            .intersection(&cert.n)?;
        items.push(subset_item(
            &format!("pre.L_{name}"),
            "P \\ Q inside L(r) n (C u D) n N",
            &ppq,
            &lr,
        ));
    }
    let cnp = h.c.intersection(&cert.n)?.intersection(&pq.p)?.difference(q)?;
    let dnp = h.d.intersection(&cert.n)?.intersection(&pq.p)?.difference(q)?;
    let pc = cfg.sample(&cnp);
    let pdn = cfg.sample(&dnp);
    let (v, w) = (&cert.v, &cert.w);
    let (c1, c2, c) = (cert.c1, cert.c2, cert.c);
    items.push(flow_item(
        "2.flow",
        "<grad V, eta> <= -c1 V^c2 on (C n N n P) \\ Q",
        h,
        &pc,
        &h.c,
        v,
        |x| -c1 * v.eval(x).max(0.0).powf(c2),
        cfg,
    ));
    items.push(jump_item(
        "2.jump",
        "V(eta) <= V(x) on (D n N n P) \\ Q",
        h,
        &pdn,
        |x, eta| v.eval(eta) - v.eval(x),
        cfg,
    ));
    items.push(flow_item(
        "3.flow",
        "<grad W, eta> <= 0 on (C n N n P) \\ Q",
        h,
        &pc,
        &h.c,
        w,
        |_| 0.0,
        cfg,
    ));
    items.push(jump_item(
        "3.jump",
        "W(eta) - W(x) <= -min(c, W(x)) on (D n N n P) \\ Q",
        h,
        &pdn,
        |x, eta| {
            let wx = w.eval(x);
            w.eval(eta) - wx + c.min(wx)
        },
        cfg,
    ));
    items.extend(escape_and_nontrivial(h, &s, cfg, 4)?);
    Ok(CheckReport::new("strong-fta", items))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quadrant {
    CertifiedSatisfied,
    /// The theorems are sufficient conditions, so this indicates a checker bug.
    CertifiedViolated,
    UncertifiedSatisfied,
    UncertifiedViolated,
    Undetermined,
}

#[derive(Debug, Clone, Serialize)]
pub struct CrossReference {
    pub quadrant: Quadrant,
    pub monitor: Verdict,
    pub certificate: CheckVerdict,
    pub summary: String,
}

/// Places a monitor verdict and a certification outcome in one of the four quadrants.
pub fn cross_reference(monitor: Verdict, cert: &CheckReport) -> CrossReference {
    let quadrant = match (cert.verdict, monitor) {
        (CheckVerdict::Pass, Verdict::Satisfied) => Quadrant::CertifiedSatisfied,
        (CheckVerdict::Pass, Verdict::Violated) => Quadrant::CertifiedViolated,
        (CheckVerdict::Fail, Verdict::Satisfied) => Quadrant::UncertifiedSatisfied,
        (CheckVerdict::Fail, Verdict::Violated) => Quadrant::UncertifiedViolated,
        _ => Quadrant::Undetermined,
    };
    let summary = match quadrant {
        Quadrant::CertifiedSatisfied => "certified and satisfied on every simulated solution",
        Quadrant::CertifiedViolated => "certified but violated by a simulated solution: checker bug",
        Quadrant::UncertifiedSatisfied => {
            "satisfied on simulated solutions but not certified (conditions are only sufficient)"
        }
        Quadrant::UncertifiedViolated => "not certified and violated",
        Quadrant::Undetermined => "monitor unknown or certification inconclusive",
    };
    CrossReference {
        quadrant,
        monitor,
        certificate: cert.verdict,
        summary: format!("{} ({})", summary, cert.check),
    }
}
