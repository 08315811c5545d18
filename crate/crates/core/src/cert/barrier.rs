use super::{
    flow_item, jump_item, jump_subset_item, near, on_boundary, residual_item, CheckConfig, CheckReport, CheckVerdict,
    ItemReport,
};
use crate::error::Result;
use crate::func::{norm, ScalarFn};
use crate::set::{boundary_shell, sublevel, SetSpec};
use crate::system::HybridSystem;
use crate::tangent::tangent_cone_member;

/// `B <= tau` on `O` and `B > 0` on `(C u D) n Xu`.
pub fn check_barrier_candidate(
    cd: &SetSpec,
    b: &ScalarFn,
    o: &SetSpec,
    xu: &SetSpec,
    cfg: &CheckConfig,
) -> Result<CheckReport> {
    let po = cfg.sample(o);
    let pu = cfg.sample(&cd.intersection(xu)?);
    let mut items = vec![
        residual_item("candidate-O", "B <= 0 on O", &po, cfg.tau_cert, |x| {
            vec![(b.eval(x), None)]
        }),
        // strict side: residual is -B, must be < 0
        residual_item("candidate-unsafe", "B > 0 on (C u D) n Xu", &pu, 0.0, |x| {
            let v = b.eval(x);
            vec![(if v > 0.0 { -v } else { f64::MIN_POSITIVE - v }, None)]
        }),
    ];
    if po.is_empty() && pu.is_empty() {
        for i in &mut items {
            i.verdict = CheckVerdict::Inconclusive;
        }
    }
    Ok(CheckReport::new("barrier-candidate", items))
}

/// Conditions (i)-(iii) for a sublevel set `K = {x in C u D : B(x) <= 0}`.
/// `tset` is the set whose tangent cone filters flow values, `shell_base` the
/// flow region intersected with the shell, `jump_base` the jump region.
pub(crate) fn ci_items(
    h: &HybridSystem,
    b: &ScalarFn,
    k_cd: &SetSpec,
    shell_base: &SetSpec,
    tset: &SetSpec,
    jump_base: &SetSpec,
    land: &SetSpec,
    cfg: &CheckConfig,
) -> Result<Vec<ItemReport>> {
    let shell = boundary_shell(shell_base, b, cfg.delta())?;
    let ps = cfg.sample(&shell);
    let dk = jump_base.intersection(&sublevel(k_cd, b)?)?;
    let pd = cfg.sample(&dk);
    Ok(vec![
        flow_item(
            "flow",
            "<grad B, eta> <= 0 on the shell outside K",
            h,
            &ps,
            tset,
            b,
            |_| 0.0,
            cfg,
        ),
        jump_item(
            "jump",
            "B(eta) <= 0 for eta in G(x), x in D n K",
            h,
            &pd,
            |_, eta| b.eval(eta),
            cfg,
        ),
        jump_subset_item("jump-lands", "G(D n K) inside the landing set", h, &pd, None, land),
    ])
}

/// Contractive invariance of `K = {x in C u D : B(x) <= 0}` from `O`, with unsafe set `Xu`.
pub fn check_ci(h: &HybridSystem, b: &ScalarFn, o: &SetSpec, xu: &SetSpec, cfg: &CheckConfig) -> Result<CheckReport> {
    let cd = h.c_union_d();
    let mut items = check_barrier_candidate(&cd, b, o, xu, cfg)?.items;
    items.extend(ci_items(h, b, &cd, &h.c, &h.c, &h.d, &cd, cfg)?);
    Ok(CheckReport::new("ci", items))
}

/// Finite escape excluded: `K n C` compact inside the box, or `F` of linear growth on it.
pub fn finite_escape_item(h: &HybridSystem, kc: &SetSpec, cfg: &CheckConfig) -> ItemReport {
    let pts = cfg.sample(kc);
    let mut item = ItemReport::new("finite-escape", "no finite escape from K n C", CheckVerdict::Pass);
    item.samples = pts.len();
    item.residual_max = 0.0;
    if pts.is_empty() {
        return item.note("vacuous: no grid samples in the set");
    }
    if !pts.iter().any(|x| cfg.grid.on_box_boundary(x)) {
        return item.note("K n C is compact inside the grid box");
    }
    let ratio = |x: &[f64]| {
        h.flow_values(x)
            .iter()
            .map(|f| norm(f) / (1.0 + norm(x)))
            .fold(0.0, f64::max)
    };
    let (mut inner, mut outer) = (0.0f64, 0.0f64);
    for x in &pts {
        if cfg.grid.on_box_boundary(x) {
            outer = outer.max(ratio(x));
        } else {
            inner = inner.max(ratio(x));
        }
    }
    item.residual_max = outer - 2.0 * inner.max(1e-12);
    if outer <= 2.0 * inner.max(1e-12) + 1e-9 || outer <= 1.0 {
        item.note(format!(
            "linear growth: |F(x)| <= {:.3e} (1 + |x|) on samples",
            outer.max(inner)
        ))
    } else {
        item.verdict = CheckVerdict::Inconclusive;
        item.note(format!(
            "growth ratio near the box boundary {outer:.3e} exceeds twice the inner ratio {inner:.3e}"
        ))
    }
}

/// Nontriviality: at boundary points of `C` in `region` outside `D`, some flow
/// value is tangent to `tset`.
pub fn nontrivial_item(h: &HybridSystem, region: &SetSpec, tset: &SetSpec, cfg: &CheckConfig) -> Result<ItemReport> {
    let cand = region.intersection(&h.c)?.difference(&h.d)?;
    let boundary: Vec<Vec<f64>> = cfg
        .sample(&cand)
        .into_iter()
        .filter(|x| on_boundary(&h.c, x, &h.discrete))
        .collect();
    // points within the probe radius of D cannot be told apart from D
    let n = boundary.len();
    let pts: Vec<Vec<f64>> = boundary.into_iter().filter(|x| !near(&h.d, x)).collect();
    let tp = cfg.tangent();
    let item = residual_item(
        "nontrivial",
        "some flow value is tangent at boundary points of C outside D",
        &pts,
        0.0,
        |x| {
            let ok = h
                .flow_values(x)
                .iter()
                .any(|eta| tangent_cone_member(tset, x, eta, &tp));
            vec![(if ok { 0.0 } else { 1.0 }, None)]
        },
    );
    Ok(if pts.len() < n {
        item.note(format!("{} points next to D skipped", n - pts.len()))
    } else {
        item
    })
}

/// Forward invariance of `K = {x in C u D : B(x) <= 0}`: the CI conditions with
/// `O = K`, plus no finite escape and nontriviality on the boundary of `C`.
pub fn check_forward_invariance(h: &HybridSystem, b: &ScalarFn, k: &SetSpec, cfg: &CheckConfig) -> Result<CheckReport> {
    let cd = h.c_union_d();
    let xu = k.complement()?;
    let mut items = check_barrier_candidate(&cd, b, k, &xu, cfg)?.items;
    items.extend(ci_items(h, b, &cd, &h.c, &h.c, &h.d, &cd, cfg)?);
    let kc = k.intersection(&h.c)?;
    items.push(finite_escape_item(h, &kc, cfg));
    items.push(nontrivial_item(h, k, &kc, cfg)?);
    Ok(CheckReport::new("forward-invariance", items))
}
