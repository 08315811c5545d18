//! Grid-based checks of the sufficient conditions, and an empirical oracle.

pub(crate) mod barrier;
pub(crate) mod eci;
mod fta;
mod oracle;
mod scalar;

pub use barrier::{check_barrier_candidate, check_ci, check_forward_invariance, finite_escape_item, nontrivial_item};
pub use eci::{
    check_pre_eci, check_pre_eci_flowlengths, check_pre_eci_flows, check_pre_eci_jumps, check_pre_to_nonpre,
    estimate_flow_lengths, FlowLengths,
};
pub use fta::{check_pre_fta, check_pre_fta_jumps, fta_bounds, FtaBound};
pub use oracle::{empirical_notion_oracle, Notion, OracleReport, OracleVerdict};
pub use scalar::{is_nondecreasing, iterate_scalar_jump, simulate_scalar_flow, ScalarOutcome};

use crate::func::{dot, ScalarFn, ScalarMap};
use crate::grid::GridSpec;
use crate::set::SetSpec;
use crate::sim::SimBudget;
use crate::system::HybridSystem;
use crate::tangent::{tangent_cone_member, TangentParams};
use rayon::prelude::*;
use serde::Serialize;

pub const TAU_CERT: f64 = 1e-7;
const MAX_WITNESSES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckVerdict {
    Pass,
    Fail,
    Inconclusive,
}

impl CheckVerdict {
    /// Fail dominates inconclusive, which dominates pass.
    pub fn combine(vs: impl IntoIterator<Item = CheckVerdict>) -> CheckVerdict {
        let mut out = CheckVerdict::Pass;
        for v in vs {
            match v {
                CheckVerdict::Fail => return CheckVerdict::Fail,
                CheckVerdict::Inconclusive => out = CheckVerdict::Inconclusive,
                CheckVerdict::Pass => {}
            }
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub point: Vec<f64>,
    /// Flow or jump value involved, if any.
    pub image: Option<Vec<f64>>,
    /// Residual of the condition at this point (positive means violated).
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ItemReport {
    pub id: String,
    pub description: String,
    pub verdict: CheckVerdict,
    pub residual_max: f64,
    pub samples: usize,
    pub witnesses: Vec<Witness>,
    pub notes: Vec<String>,
}

impl ItemReport {
    pub fn new(id: &str, description: &str, verdict: CheckVerdict) -> Self {
        ItemReport {
            id: id.to_string(),
            description: description.to_string(),
            verdict,
            residual_max: f64::NEG_INFINITY,
            samples: 0,
            witnesses: vec![],
            notes: vec![],
        }
    }

    pub fn note(mut self, n: impl Into<String>) -> Self {
        self.notes.push(n.into());
        self
    }

    pub fn with_witness(mut self, point: Vec<f64>, residual: f64) -> Self {
        self.witnesses.push(Witness {
            point,
            image: None,
            residual,
        });
        self.residual_max = self.residual_max.max(residual);
        self
    }

    pub fn prefixed(mut self, p: &str) -> Self {
        self.id = format!("{p}{}", self.id);
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub verdict: CheckVerdict,
    pub items: Vec<ItemReport>,
}

impl CheckReport {
    pub fn new(check: &str, items: Vec<ItemReport>) -> Self {
        CheckReport {
            check: check.to_string(),
            verdict: CheckVerdict::combine(items.iter().map(|i| i.verdict)),
            items,
        }
    }

    pub fn item(&self, id: &str) -> Option<&ItemReport> {
        self.items.iter().find(|i| i.id == id)
    }

    /// Items of a sub-check, ids prefixed with `prefix`.
    pub fn into_items(self, prefix: &str) -> Vec<ItemReport> {
        self.items.into_iter().map(|i| i.prefixed(prefix)).collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckConfig {
    pub grid: GridSpec,
    pub tau_cert: f64,
    /// Width of the shell outside a sublevel set; defaults to 5% of the box diagonal.
    pub delta_shell: Option<f64>,
    pub tangent_h: Vec<f64>,
    pub tangent_tol: f64,
    pub budget: SimBudget,
    /// Horizon for scalar comparison flows.
    pub scalar_t_max: f64,
    /// Horizon for scalar comparison iterations.
    pub scalar_j_max: usize,
    /// Initial points used for arc-based sub-checks.
    pub max_arc_starts: usize,
}

impl CheckConfig {
    pub fn new(grid: GridSpec) -> Self {
        let tp = TangentParams::default();
        CheckConfig {
            grid,
            tau_cert: TAU_CERT,
            delta_shell: None,
            tangent_h: tp.h_seq,
            tangent_tol: tp.tol,
            budget: SimBudget::default(),
            scalar_t_max: 100.0,
            scalar_j_max: 1000,
            max_arc_starts: 24,
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta_shell.unwrap_or(0.05 * self.grid.diameter())
    }

    pub fn tangent(&self) -> TangentParams {
        TangentParams {
            h_seq: self.tangent_h.clone(),
            tol: self.tangent_tol,
        }
    }

    pub fn sample(&self, s: &SetSpec) -> Vec<Vec<f64>> {
        self.grid.sample(s)
    }

    /// Evenly spaced subset of samples for arc simulation.
    pub fn arc_starts(&self, s: &SetSpec) -> Vec<Vec<f64>> {
        let pts = self.sample(s);
        thin(pts, self.max_arc_starts)
    }
}

pub(crate) fn thin<T: Clone>(pts: Vec<T>, max: usize) -> Vec<T> {
    if pts.len() <= max || max == 0 {
        return pts;
    }
    (0..max)
        .map(|k| pts[k * (pts.len() - 1) / (max - 1).max(1)].clone())
        .collect()
}

/// Evaluates `cond` at each point; each returned value is a residual that
/// must be `<= tol`. The item fails when some residual exceeds `tol`.
pub(crate) fn residual_item(
    id: &str,
    description: &str,
    points: &[Vec<f64>],
    tol: f64,
    cond: impl Fn(&[f64]) -> Vec<(f64, Option<Vec<f64>>)> + Sync,
) -> ItemReport {
    let results: Vec<Vec<(f64, Option<Vec<f64>>)>> = points.par_iter().map(|x| cond(x)).collect();
    let mut item = ItemReport::new(id, description, CheckVerdict::Pass);
    item.samples = points.len();
    let mut evaluated = 0usize;
    let mut worst: Option<Witness> = None;
    for (x, rs) in points.iter().zip(results) {
        for (r, image) in rs {
            evaluated += 1;
            let r = if r.is_nan() { f64::INFINITY } else { r };
            item.residual_max = item.residual_max.max(r);
            if r > tol {
                item.verdict = CheckVerdict::Fail;
                let w = Witness {
                    point: x.clone(),
                    image,
                    residual: r,
                };
                if worst.as_ref().map(|b| r > b.residual).unwrap_or(true) {
                    worst = Some(w.clone());
                }
                if item.witnesses.len() < MAX_WITNESSES {
                    item.witnesses.push(w);
                }
            }
        }
    }
    if let Some(w) = worst {
        if !item
            .witnesses
            .iter()
            .any(|v| v.point == w.point && v.residual == w.residual)
        {
            item.witnesses.push(w);
        }
    }
    if evaluated == 0 {
        item.residual_max = 0.0;
        item.notes.push("vacuous: no grid samples in the set".into());
    }
    item
}

/// `<grad f, eta> <= rhs(x)` for flow values `eta` in the tangent cone of `tset`.
pub(crate) fn flow_item(
    id: &str,
    description: &str,
    h: &HybridSystem,
    points: &[Vec<f64>],
    tset: &SetSpec,
    f: &ScalarFn,
    rhs: impl Fn(&[f64]) -> f64 + Sync,
    cfg: &CheckConfig,
) -> ItemReport {
    let tp = cfg.tangent();
    let mut filtered = 0usize;
    let counter = std::sync::atomic::AtomicUsize::new(0);
    let item = residual_item(id, description, points, cfg.tau_cert, |x| {
        let g = f.grad(x);
        let bound = rhs(x);
        h.flow_values(x)
            .into_iter()
            .filter(|eta| {
                let keep = tangent_cone_member(tset, x, eta, &tp);
                if !keep {
                    counter.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                }
                keep
            })
            .map(|eta| (dot(&g, &eta) - bound, Some(eta)))
            .collect()
    });
    filtered += counter.into_inner();
    if filtered > 0 {
        item.note(format!("{filtered} flow values outside the tangent cone skipped"))
    } else {
        item
    }
}

/// `lhs(x, eta) <= 0` for jump values `eta`.
pub(crate) fn jump_item(
    id: &str,
    description: &str,
    h: &HybridSystem,
    points: &[Vec<f64>],
    lhs: impl Fn(&[f64], &[f64]) -> f64 + Sync,
    cfg: &CheckConfig,
) -> ItemReport {
    residual_item(id, description, points, cfg.tau_cert, |x| {
        h.jump_values(x)
            .into_iter()
            .map(|eta| (lhs(x, &eta), Some(eta)))
            .collect()
    })
}

/// Every sample of the first set lies in `target`.
pub(crate) fn subset_item(id: &str, description: &str, points: &[Vec<f64>], target: &SetSpec) -> ItemReport {
    residual_item(id, description, points, 0.0, |x| {
        let r = if target.contains(x) {
            0.0
        } else {
            target.violation(x).max(f64::MIN_POSITIVE)
        };
        vec![(r, None)]
    })
}

/// Every jump value from the samples that lies in `within` also lies in `target`.
pub(crate) fn jump_subset_item(
    id: &str,
    description: &str,
    h: &HybridSystem,
    points: &[Vec<f64>],
    within: Option<&SetSpec>,
    target: &SetSpec,
) -> ItemReport {
    residual_item(id, description, points, 0.0, |x| {
        h.jump_values(x)
            .into_iter()
            .filter(|eta| within.map(|w| w.contains(eta)).unwrap_or(true))
            .map(|eta| {
                let r = if target.contains(&eta) {
                    0.0
                } else {
                    target.violation(&eta).max(f64::MIN_POSITIVE)
                };
                (r, Some(eta))
            })
            .collect()
    })
}

/// Scalar comparison data for the pre-ECI conditions.
#[derive(Debug, Clone)]
pub struct EciCertificate {
    pub v: ScalarFn,
    pub f_c: ScalarMap,
    pub r1: f64,
    pub w: ScalarFn,
    pub f_d: ScalarMap,
    pub r2: f64,
}

/// Which solution-class variant of the pre-ECI theorem to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EciVariant {
    /// Eventually continuous solutions, `S1 in A`.
    A,
    /// Eventually discrete solutions, `S2 in A`.
    B,
    /// Eventually continuous, eventually discrete, or unbounded in both; `S1, S2 in A`.
    C,
    /// `S1, S2 in A` and `G(S2) n C in S1`.
    D,
}

impl std::str::FromStr for EciVariant {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        match s.trim_start_matches(|c: char| c.is_ascii_digit()) {
            "a" => Ok(EciVariant::A),
            "b" => Ok(EciVariant::B),
            "c" => Ok(EciVariant::C),
            "d" => Ok(EciVariant::D),
            _ => Err(crate::Error::Invalid(format!("unknown variant '{s}'"))),
        }
    }
}

/// Lyapunov-like data for the pre-FTA conditions.
#[derive(Debug, Clone)]
pub struct FtaCertificate {
    pub v: ScalarFn,
    pub w: ScalarFn,
    pub c1: f64,
    pub c2: f64,
    pub c: f64,
    /// Sublevel `L_V(r)` that must contain the initial set.
    pub r: f64,
    pub n: SetSpec,
}

impl FtaCertificate {
    pub fn validate(&self) -> crate::Result<()> {
        if !(self.c1 > 0.0) {
            return Err(crate::Error::Invalid(format!("c1 must be positive, got {}", self.c1)));
        }
        if !(0.0..1.0).contains(&self.c2) {
            return Err(crate::Error::Invalid(format!("c2 must be in [0, 1), got {}", self.c2)));
        }
        if !(self.c > 0.0) {
            return Err(crate::Error::Invalid(format!("c must be positive, got {}", self.c)));
        }
        Ok(())
    }
}

/// Is `x` on the boundary of `s`: some coordinate perturbation leaves `s`.
/// Is `x` within the boundary probe radius (see [`on_boundary`]) of `s`,
/// measured by constraint violation.
pub(crate) fn near(s: &SetSpec, x: &[f64]) -> bool {
    let r = 1e-6 * (1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    s.contains(x) || s.violation(x) <= r
}

pub(crate) fn on_boundary(s: &SetSpec, x: &[f64], discrete: &[Option<Vec<f64>>]) -> bool {
    if !s.contains(x) {
        return false;
    }
    let mut y = x.to_vec();
    for i in 0..x.len() {
        if discrete.get(i).map(|d| d.is_some()).unwrap_or(false) {
            continue;
        }
        let h = 1e-6 * (1.0 + x[i].abs());
        for s_ in [h, -h] {
            y[i] = x[i] + s_;
            if !s.contains(&y) {
                return true;
            }
        }
        y[i] = x[i];
    }
    false
}
