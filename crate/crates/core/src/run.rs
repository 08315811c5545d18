//! Settings and drivers shared by the command line and the C interface.

use crate::cert::{
    check_forward_invariance, check_pre_eci, check_pre_eci_flowlengths, check_pre_eci_flows, check_pre_eci_jumps,
    check_pre_fta, check_pre_fta_jumps, check_pre_to_nonpre, empirical_notion_oracle, estimate_flow_lengths,
    fta_bounds, CheckConfig, CheckReport, CheckVerdict, EciVariant, OracleReport, OracleVerdict,
};
use crate::certify::{
    certify_strong_until_eci, certify_strong_until_eci_flows, certify_strong_until_eci_jumps, certify_strong_until_fta,
    certify_weak_until, cross_reference, CrossReference,
};
use crate::error::{Error, Result};
use crate::grid::{DEFAULT_REFINE, DEFAULT_RES};
use crate::monitor::{check_formula_over, FormulaResult, UntilMode, Verdict};
use crate::scenarios::{Scenario, UntilSpec};
use crate::set::SetSpec;
use crate::sim::{Policy, SimBudget};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// Exit codes of the command line tool.
pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILED: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const S0: i32 = 3;
    pub const UNKNOWN: i32 = 4;
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    pub grid_res: usize,
    pub refine: usize,
    pub tau_cert: f64,
    pub delta_shell: Option<f64>,
    pub budget: SimBudget,
    pub policy: Policy,
    pub seed: u64,
    /// Initial points for monitoring, subsampled from the grid.
    pub monitor_samples: usize,
    pub max_arc_starts: usize,
    pub scalar_t_max: f64,
    pub scalar_j_max: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            grid_res: DEFAULT_RES,
            refine: DEFAULT_REFINE,
            tau_cert: crate::cert::TAU_CERT,
            delta_shell: None,
            budget: SimBudget::default(),
            policy: Policy::Branch,
            seed: 0,
            monitor_samples: 64,
            max_arc_starts: 24,
            scalar_t_max: 100.0,
            scalar_j_max: 1000,
        }
    }
}

impl Settings {
    pub fn validate(&self) -> Result<()> {
        self.budget.validate()?;
        if self.grid_res < 2 || !(self.tau_cert >= 0.0) || self.monitor_samples == 0 {
            return Err(Error::Config(format!("bad settings {self:?}")));
        }
        Ok(())
    }

    pub fn check_config(&self, s: &Scenario) -> CheckConfig {
        let mut grid = s.grid.clone().with_res(self.grid_res);
        grid.refine = self.refine;
        let mut cfg = CheckConfig::new(grid);
        cfg.tau_cert = self.tau_cert;
        cfg.delta_shell = self.delta_shell;
        cfg.budget = self.budget.clone();
        cfg.max_arc_starts = self.max_arc_starts;
        cfg.scalar_t_max = self.scalar_t_max;
        cfg.scalar_j_max = self.scalar_j_max;
        cfg
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    Weak,
    StrongEci,
    StrongEciFlows,
    StrongEciJumps,
    StrongFta,
    PreEci,
    PreEciFlows,
    PreEciJumps,
    PreEciFlowlengths,
    PreToNonpre,
    PreFta,
    PreFtaJumps,
    Oracle,
}

impl Theorem {
    pub const ALL: [(&'static str, Theorem); 13] = [
        ("weak", Theorem::Weak),
        ("strong-eci", Theorem::StrongEci),
        ("strong-eci-flows", Theorem::StrongEciFlows),
        ("strong-eci-jumps", Theorem::StrongEciJumps),
        ("strong-fta", Theorem::StrongFta),
        ("pre-eci", Theorem::PreEci),
        ("pre-eci-flows", Theorem::PreEciFlows),
        ("pre-eci-jumps", Theorem::PreEciJumps),
        ("pre-eci-flowlengths", Theorem::PreEciFlowlengths),
        ("pre-to-nonpre", Theorem::PreToNonpre),
        ("pre-fta", Theorem::PreFta),
        ("pre-fta-jumps", Theorem::PreFtaJumps),
        ("oracle", Theorem::Oracle),
    ];

    pub fn name(self) -> &'static str {
        Self::ALL.iter().find(|(_, t)| *t == self).unwrap().0
    }
}

impl std::str::FromStr for Theorem {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.iter().find(|(n, _)| *n == s).map(|(_, t)| *t).ok_or_else(|| {
            let names: Vec<&str> = Self::ALL.iter().map(|(n, _)| *n).collect();
            Error::Config(format!("unknown theorem '{s}' (known: {})", names.join(", ")))
        })
    }
}

/// Result of one `certify` run. `reports[0]` decides the exit code; later
/// reports are supplementary.
#[derive(Debug, Clone, Serialize)]
pub struct CertifyOutcome {
    pub theorem: Theorem,
    pub reports: Vec<CheckReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleReport>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub extra: Value,
}

impl CertifyOutcome {
    pub fn exit_code(&self) -> i32 {
        if let Some(o) = &self.oracle {
            return match o.verdict {
                OracleVerdict::Violated => exit::FAILED,
                OracleVerdict::NotFalsified => exit::OK,
            };
        }
        match self.reports.first().map(|r| r.verdict) {
            Some(CheckVerdict::Pass) => exit::OK,
            Some(CheckVerdict::Fail) => exit::FAILED,
            _ => exit::UNKNOWN,
        }
    }
}

fn missing(s: &Scenario, what: &str) -> Error {
    Error::Config(format!("scenario '{}' has no {what}", s.id))
}

fn until_of(s: &Scenario) -> Result<&UntilSpec> {
    s.until.as_ref().ok_or_else(|| missing(s, "until formula"))
}

pub fn certify(
    s: &Scenario,
    theorem: Theorem,
    variant: Option<EciVariant>,
    settings: &Settings,
) -> Result<CertifyOutcome> {
    settings.validate()?;
    let cfg = settings.check_config(s);
    let h = &s.system;
    let mut extra = Value::Null;
    let mut oracle = None;
    let barrier = |u: &UntilSpec| u.barrier.clone().ok_or_else(|| missing(s, "barrier function"));
    // Scenarios without an until formula carry their ECI data as pre-ECI data
    // for (O, A); the strong-ECI names then check those conditions.
    let theorem = match theorem {
        Theorem::StrongEci if s.until.is_none() && s.pre_eci.is_some() => Theorem::PreEci,
        Theorem::StrongEciFlows if s.until.is_none() && s.pre_eci.is_some() => Theorem::PreEciFlows,
        Theorem::StrongEciJumps if s.until.is_none() && s.pre_eci.is_some() => Theorem::PreEciJumps,
        t => t,
    };
    let reports = match theorem {
        Theorem::Weak => {
            let u = until_of(s)?;
            vec![certify_weak_until(h, &u.pq, &barrier(u)?, &cfg)?]
        }
        Theorem::StrongEci | Theorem::StrongEciFlows | Theorem::StrongEciJumps => {
            let u = until_of(s)?;
            let e = u.eci.as_ref().ok_or_else(|| missing(s, "ECI certificate"))?;
            let b = barrier(u)?;
            vec![match theorem {
                Theorem::StrongEci => certify_strong_until_eci(h, &u.pq, &b, e, variant.unwrap_or(u.variant), &cfg)?,
                Theorem::StrongEciFlows => certify_strong_until_eci_flows(h, &u.pq, &b, &e.v, &e.f_c, e.r1, &cfg)?,
                _ => certify_strong_until_eci_jumps(h, &u.pq, &b, &e.w, &e.f_d, e.r2, &cfg)?,
            }]
        }
        Theorem::StrongFta => {
            let u = until_of(s)?;
            let f = u.fta.as_ref().ok_or_else(|| missing(s, "FTA certificate"))?;
            let pts = cfg.arc_starts(&u.pq.p_minus_q());
            extra = json!({ "bounds": pts.iter().take(10).map(|x| fta_bounds(f, x)).collect::<Vec<_>>() });
            vec![certify_strong_until_fta(h, &u.pq, &barrier(u)?, f, &cfg)?]
        }
        Theorem::PreEci | Theorem::PreEciFlows | Theorem::PreEciJumps => {
            let p = s.pre_eci.as_ref().ok_or_else(|| missing(s, "pre-ECI data"))?;
            let e = &p.cert;
            vec![match theorem {
                Theorem::PreEci => check_pre_eci(h, &p.o, &p.a, e, variant.unwrap_or(p.variant), &cfg)?,
                Theorem::PreEciFlows => check_pre_eci_flows(h, &p.o, &p.a, &e.v, &e.f_c, e.r1, &cfg)?,
                _ => check_pre_eci_jumps(h, &p.o, &p.a, &e.w, &e.f_d, e.r2, &cfg)?,
            }]
        }
        Theorem::PreEciFlowlengths => {
            let p = s.flow_lengths.as_ref().ok_or_else(|| missing(s, "flow-length data"))?;
            let mut items = Vec::new();
            for (name, set, b) in &p.invariants {
                items.extend(check_forward_invariance(h, b, set, &cfg)?.into_items(&format!("{name}.")));
            }
            let lengths = estimate_flow_lengths(h, &cfg.arc_starts(&p.o), &p.k, &cfg.budget, p.rho)?;
            let r = check_pre_eci_flowlengths(h, &p.o, &p.a, &p.k, &p.v, &p.f_c, &p.f_d, p.r, &lengths, &cfg)?;
            items.extend(r.items);
            extra = json!({ "flow_lengths": lengths });
            vec![CheckReport::new("pre-eci-flowlengths", items)]
        }
        Theorem::PreToNonpre => {
            let p = s.pre_eci.as_ref().ok_or_else(|| missing(s, "pre-ECI data"))?;
            if p.s.is_empty() {
                return Err(missing(s, "enlargement S"));
            }
            p.s.iter()
                .map(|(set, b)| {
                    let mut r = check_pre_to_nonpre(h, &p.o, &p.a, set, b, &cfg)?;
                    r.check = format!("pre-to-nonpre[S = {}]", set.label());
                    Ok(r)
                })
                .collect::<Result<_>>()?
        }
        Theorem::PreFta => {
            let p = s.pre_fta.as_ref().ok_or_else(|| missing(s, "pre-FTA data"))?;
            let pts = cfg.arc_starts(&p.o);
            extra = json!({ "bounds": pts.iter().take(10).map(|x| fta_bounds(&p.cert, x)).collect::<Vec<_>>() });
            vec![check_pre_fta(h, &p.o, &p.a, &p.cert, &cfg)?]
        }
        Theorem::PreFtaJumps => {
            let p = s
                .pre_fta_jumps
                .as_ref()
                .ok_or_else(|| missing(s, "jump-route pre-FTA data"))?;
            vec![check_pre_fta_jumps(h, &p.o, &p.a, &p.w, p.c, &p.n, p.r, &cfg)?]
        }
        Theorem::Oracle => {
            let o = s.oracle.as_ref().ok_or_else(|| missing(s, "oracle data"))?;
            let starts = cfg.arc_starts(&o.starts);
            oracle = Some(empirical_notion_oracle(
                &o.system,
                &starts,
                &o.a,
                o.notion,
                &cfg.budget,
                settings.policy,
            )?);
            vec![]
        }
    };
    Ok(CertifyOutcome {
        theorem,
        reports,
        oracle,
        extra,
    })
}

/// Grid samples of `set`, reduced to at most `max` by a seeded random choice.
pub fn subsample(pts: Vec<Vec<f64>>, max: usize, seed: u64) -> Vec<Vec<f64>> {
    if pts.len() <= max {
        return pts;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = sample(&mut rng, pts.len(), max).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| pts[i].clone()).collect()
}

/// Initial points for monitoring: samples of `(P u Q) n (cl(C) u D)`.
pub fn monitor_points(s: &Scenario, settings: &Settings) -> Result<Vec<Vec<f64>>> {
    let u = until_of(s)?;
    let starts: SetSpec = u.pq.p_or_q().intersection(&s.system.c.closure().union(&s.system.d)?)?;
    let pts = settings.check_config(s).sample(&starts);
    Ok(subsample(pts, settings.monitor_samples, settings.seed))
}

pub fn monitor(s: &Scenario, mode: Option<UntilMode>, settings: &Settings) -> Result<FormulaResult> {
    settings.validate()?;
    let u = until_of(s)?;
    let init = monitor_points(s, settings)?;
    check_formula_over(
        &s.system,
        &u.pq,
        &init,
        mode.unwrap_or(u.mode),
        &settings.budget,
        settings.policy,
    )
}

pub fn monitor_exit_code(v: Verdict) -> i32 {
    match v {
        Verdict::Satisfied => exit::OK,
        Verdict::Violated => exit::FAILED,
        Verdict::Unknown => exit::UNKNOWN,
    }
}

/// Monitor verdict placed against the first report of a certification.
pub fn cross(monitor: &FormulaResult, outcome: &CertifyOutcome) -> Option<CrossReference> {
    outcome.reports.first().map(|r| cross_reference(monitor.verdict, r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsample_is_seeded() {
        let pts: Vec<Vec<f64>> = (0..100).map(|i| vec![i as f64]).collect();
        let a = subsample(pts.clone(), 10, 7);
        assert_eq!(a, subsample(pts.clone(), 10, 7));
        assert_eq!(a.len(), 10);
        assert!(a.windows(2).all(|w| w[0][0] < w[1][0]));
        assert_eq!(subsample(pts.clone(), 200, 1).len(), 100);
    }

    #[test]
    fn theorem_names_round_trip() {
        for (n, t) in Theorem::ALL {
            assert_eq!(n.parse::<Theorem>().unwrap(), t);
            assert_eq!(t.name(), n);
        }
        assert!("strong".parse::<Theorem>().is_err());
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ArcSummary {
    pub termination: crate::arc::Termination,
    pub flags: crate::arc::ArcFlags,
    pub sup_t: f64,
    pub sup_j: usize,
    pub samples: usize,
    pub initial: Vec<f64>,
    pub final_state: Vec<f64>,
    pub validation: crate::arc::ArcValidation,
}

/// Tolerance for the solution-property checks reported by `simulate`.
pub const ARC_TOL: f64 = 1e-6;

pub fn summarize(h: &crate::system::HybridSystem, arcs: &[crate::arc::HybridArc]) -> Vec<ArcSummary> {
    arcs.iter()
        .map(|a| ArcSummary {
            termination: a.termination,
            flags: a.flags,
            sup_t: a.sup_t(),
            sup_j: a.sup_j(),
            samples: a.num_samples(),
            initial: a.initial_state().to_vec(),
            final_state: a.final_state().to_vec(),
            validation: crate::arc::validate_arc(h, a, ARC_TOL),
        })
        .collect()
}
