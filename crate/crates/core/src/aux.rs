//! Auxiliary systems: H_w and H_s for until formulas, and the scalar
//! timer system H_r used by the flow-length test.

use crate::arc::{validate_arc, HybridArc};
use crate::error::{check_dim, Error, Result};
use crate::func::{ScalarFn, ScalarMap, VectorFn};
use crate::set::{Region, SetSpec};
use crate::sim::{simulate, Policy, SimBudget};
use crate::system::{HybridSystem, SetValuedMap};
use serde::Serialize;

// G on the complement of `q`, identity on `q`.
fn stop_on(g: &SetValuedMap, q: &SetSpec) -> SetValuedMap {
    let sels = g
        .selections()
        .iter()
        .map(|s| {
            let s = s.clone();
            let q = q.clone();
            VectorFn::new(format!("{} off Q, id on Q", s.label()), move |x| {
                if q.contains(x) {
                    x.to_vec()
                } else {
                    s.eval(x)
                }
            })
        })
        .collect();
    SetValuedMap::new(sels).expect("nonempty")
}

/// `H_w`: flows on `C \ Q`, jumps on `D u Q`, identity jumps on `Q`.
pub fn build_hw(h: &HybridSystem, q: &SetSpec) -> Result<HybridSystem> {
    check_dim(h.dim(), q.dim())?;
    let coords: Vec<&str> = h.coords.iter().map(|s| s.as_str()).collect();
    let mut hw = HybridSystem::new_unchecked_closure(
        format!("{}_w", h.name),
        &coords,
        h.c.difference(q)?.labeled("C \\ Q"),
        h.f.clone(),
        h.d.union(q)?.labeled("D u Q"),
        stop_on(&h.g, q),
    )?;
    hw.discrete = h.discrete.clone();
    Ok(hw)
}

/// `H_s`: flows on `(C \ Q) n P`, jumps on `(D n P) u Q`, identity jumps on `Q`.
pub fn build_hs(h: &HybridSystem, p: &SetSpec, q: &SetSpec) -> Result<HybridSystem> {
    check_dim(h.dim(), p.dim())?;
    check_dim(h.dim(), q.dim())?;
    let coords: Vec<&str> = h.coords.iter().map(|s| s.as_str()).collect();
    let mut hs = HybridSystem::new_unchecked_closure(
        format!("{}_s", h.name),
        &coords,
        h.c.difference(q)?.intersection(p)?.labeled("(C \\ Q) n P"),
        h.f.clone(),
        h.d.intersection(p)?.union(q)?.labeled("(D n P) u Q"),
        stop_on(&h.g, q),
    )?;
    hs.discrete = h.discrete.clone();
    Ok(hs)
}

/// `H_r` on `(y, tau)`: flow `(f_c(y), 1)` on `R x [0, tau_m]`, jump
/// `(f_d(y), 0)` on `R x I`.
pub fn build_hr(f_c: &ScalarMap, f_d: &ScalarMap, tau_m: f64, interval: (f64, f64)) -> Result<HybridSystem> {
    let (lo, hi) = interval;
    if !(tau_m > 0.0) || !(lo <= hi) || lo < 0.0 || hi > tau_m {
        return Err(Error::Invalid(format!(
            "need nonempty I = [{lo}, {hi}] inside [0, tau_M] with tau_M = {tau_m} > 0"
        )));
    }
    let n = 2;
    let c = SetSpec::region(n, Region::new().bounds(n, &[(1, 0.0, tau_m)])).labeled("R x [0, tau_M]");
    let d = SetSpec::region(n, Region::new().bounds(n, &[(1, lo, hi)])).labeled("R x I");
    let (fc, fd) = (f_c.clone(), f_d.clone());
    HybridSystem::new(
        "H_r",
        &["y", "tau"],
        c,
        SetValuedMap::single(VectorFn::new("(f_c(y), 1)", move |x| vec![fc.eval(x[0]), 1.0])),
        d,
        SetValuedMap::single(VectorFn::new("(f_d(y), 0)", move |x| vec![fd.eval(x[0]), 0.0])),
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrespondenceReport {
    pub arcs_checked: usize,
    pub max_residual: f64,
    pub pass: bool,
    pub failures: Vec<String>,
}

// the arc up to and including its first sample in `q`
fn cut_at(arc: &HybridArc, q: &SetSpec) -> HybridArc {
    let n = arc
        .points()
        .position(|p| q.contains(p.x))
        .map(|k| k + 1)
        .unwrap_or_else(|| arc.num_samples());
    arc.prefix(n)
}

/// Empirical check that, up to reaching `Q`, solutions of `H_w` are solutions
/// of `H` and vice versa.
pub fn correspondence_test(
    h: &HybridSystem,
    q: &SetSpec,
    x0: &[f64],
    budget: &SimBudget,
) -> Result<CorrespondenceReport> {
    let hw = build_hw(h, q)?;
    let mut failures = Vec::new();
    let mut max_residual: f64 = 0.0;
    let mut arcs_checked = 0;
    let tol = 1e-6;
    for (src, dst, name) in [(&hw, h, "H_w arc as H"), (h, &hw, "H arc as H_w")] {
        let arcs = match simulate(src, x0, budget, Policy::Branch) {
            Ok(a) => a,
            Err(Error::InitialState(_)) => continue,
            Err(e) => return Err(e),
        };
        for a in &arcs {
            let cut = cut_at(a, q);
            let v = validate_arc(dst, &cut, tol);
            arcs_checked += 1;
            let r = v
                .flow_residual
                .max(v.flow_set_violation)
                .max(v.jump_residual)
                .max(v.jump_set_violation);
            max_residual = max_residual.max(r);
            if !v.pass {
                failures.push(format!("{name}: residual {r:e}"));
            }
        }
    }
    Ok(CorrespondenceReport {
        arcs_checked,
        max_residual,
        pass: failures.is_empty(),
        failures,
    })
}

/// `{x in S : f(x) < r}`.
pub(crate) fn strict_sublevel(s: &SetSpec, f: &ScalarFn, r: f64) -> Result<SetSpec> {
    s.restrict(Region::new().lt(f.shifted(r)))
}
