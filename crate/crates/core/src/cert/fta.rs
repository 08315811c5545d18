use super::{
    flow_item, jump_item, jump_subset_item, residual_item, subset_item, CheckConfig, CheckReport, FtaCertificate,
    ItemReport,
};
use crate::error::Result;
use crate::func::ScalarFn;
use crate::set::{Region, SetSpec};
use crate::system::HybridSystem;
use serde::Serialize;

/// Upper bounds on the hybrid time to reach `A` from `x`.
#[derive(Debug, Clone, Serialize)]
pub struct FtaBound {
    pub x: Vec<f64>,
    pub t_star: f64,
    pub j_star: u64,
}

pub fn fta_bounds(cert: &FtaCertificate, x: &[f64]) -> FtaBound {
    let v = cert.v.eval(x).max(0.0);
    let w = cert.w.eval(x).max(0.0);
    let e = 1.0 - cert.c2;
    FtaBound {
        x: x.to_vec(),
        t_star: v.powf(e) / (cert.c1 * e),
        j_star: (w / cert.c).ceil() as u64,
    }
}

// zero on A, positive elsewhere on the sampled region
fn pd_item(id: &str, f: &ScalarFn, pts: &[Vec<f64>], a: &SetSpec, tol: f64) -> ItemReport {
    residual_item(id, "positive definite with respect to A", pts, 0.0, |x| {
        let v = f.eval(x);
        let r = if a.contains(x) {
            (v.abs() - tol).max(0.0)
        } else if v > 0.0 {
            0.0
        } else {
            f64::MIN_POSITIVE - v
        };
        vec![(r, None)]
    })
}

/// The pre-FTA conditions for `A` from `O` with certificate `(V, W, c1, c2, c, N)`.
pub fn check_pre_fta(
    h: &HybridSystem,
    o: &SetSpec,
    a: &SetSpec,
    cert: &FtaCertificate,
    cfg: &CheckConfig,
) -> Result<CheckReport> {
    cert.validate()?;
    let cdn = h.c_union_d().intersection(&cert.n)?;
    let pn = cfg.sample(&cdn);
    let cn = h.c.intersection(&cert.n)?.difference(a)?;
    let dn = h.d.intersection(&cert.n)?.difference(a)?;
    let pc = cfg.sample(&cn);
    let pd = cfg.sample(&dn);
    let (v, w) = (&cert.v, &cert.w);
    let (c1, c2, c) = (cert.c1, cert.c2, cert.c);
    let mut items = vec![
        pd_item("V-pd", v, &pn, a, cfg.tau_cert),
        pd_item("W-pd", w, &pn, a, cfg.tau_cert),
        flow_item(
            "V-flow",
            "<grad V, eta> <= -c1 V^c2 on (C n N) \\ A",
            h,
            &pc,
            &h.c,
            v,
            |x| -c1 * v.eval(x).max(0.0).powf(c2),
            cfg,
        ),
        jump_item(
            "V-jump",
            "V(eta) <= V(x) on (D n N) \\ A",
            h,
            &pd,
            |x, eta| v.eval(eta) - v.eval(x),
            cfg,
        ),
        flow_item(
            "W-flow",
            "<grad W, eta> <= 0 on (C n N) \\ A",
            h,
            &pc,
            &h.c,
            w,
            |_| 0.0,
            cfg,
        ),
        jump_item(
            "W-jump",
            "W(eta) - W(x) <= -min(c, W(x)) on (D n N) \\ A",
            h,
            &pd,
            |x, eta| {
                let wx = w.eval(x);
                w.eval(eta) - wx + c.min(wx)
            },
            cfg,
        ),
    ];
    let nd = cert.n.intersection(&h.d)?;
    items.push(jump_subset_item(
        "G(N n D)",
        "G(N n D) inside N",
        h,
        &cfg.sample(&nd),
        None,
        &cert.n,
    ));
    let lv = SetSpec::region(h.dim(), Region::new().le(v.shifted(cert.r)));
    let lvn = lv.intersection(&cert.n)?;
    items.push(subset_item(
        "O in L_V(r)",
        "O inside {V <= r} n N",
        &cfg.sample(o),
        &lvn,
    ));
    Ok(CheckReport::new("pre-fta", items))
}

/// pre-FTA through jumps alone: `W` positive definite with respect to `A`,
/// nonincreasing along flows and dropping by `min(c, W)` over jumps, and every
/// complete solution from `O` makes at least `ceil(W / c)` jumps.
#[allow(clippy::too_many_arguments)]
pub fn check_pre_fta_jumps(
    h: &HybridSystem,
    o: &SetSpec,
    a: &SetSpec,
    w: &ScalarFn,
    c: f64,
    n: &SetSpec,
    r: f64,
    cfg: &CheckConfig,
) -> Result<CheckReport> {
    if !(c > 0.0) {
        return Err(crate::error::Error::Invalid(format!("c must be positive, got {c}")));
    }
    let pn = cfg.sample(&h.c_union_d().intersection(n)?);
    let pc = cfg.sample(&h.c.intersection(n)?.difference(a)?);
    let pd = cfg.sample(&h.d.intersection(n)?.difference(a)?);
    let mut items = vec![
        pd_item("W-pd", w, &pn, a, cfg.tau_cert),
        flow_item(
            "W-flow",
            "<grad W, eta> <= 0 on (C n N) \\ A",
            h,
            &pc,
            &h.c,
            w,
            |_| 0.0,
            cfg,
        ),
        jump_item(
            "W-jump",
            "W(eta) - W(x) <= -min(c, W(x)) on (D n N) \\ A",
            h,
            &pd,
            |x, eta| {
                let wx = w.eval(x);
                w.eval(eta) - wx + c.min(wx)
            },
            cfg,
        ),
    ];
    let nd = n.intersection(&h.d)?;
    items.push(jump_subset_item(
        "G(N n D)",
        "G(N n D) inside N",
        h,
        &cfg.sample(&nd),
        None,
        n,
    ));
    let lw = SetSpec::region(h.dim(), Region::new().le(w.shifted(r))).intersection(n)?;
    items.push(subset_item("O in L_W(r)", "O inside {W <= r} n N", &cfg.sample(o), &lw));
    let arcs = super::eci::arcs_from(h, o, cfg);
    items.push(super::eci::arc_time_item(
        &arcs,
        |arc| Some((w.eval(arc.initial_state()).max(0.0) / c).ceil() - arc.sup_j_extent()),
        "J*",
        "complete solutions from O make at least ceil(W/c) jumps",
    ));
    Ok(CheckReport::new("pre-fta-jumps", items))
}
