//! Built-in example systems with their propositions and certificates.

use crate::aux::{build_hs, build_hw};
use crate::cert::{EciCertificate, EciVariant, FtaCertificate, Notion};
use crate::dsl::Dsl;
use crate::error::{Error, Result};
use crate::func::{ScalarFn, ScalarMap};
use crate::grid::GridSpec;
use crate::monitor::{PropositionPair, UntilMode};
use crate::set::SetSpec;
use crate::system::{HybridSystem, SetValuedMap};

pub const IDS: [&str; 7] = [
    "timer",
    "bouncing-ball",
    "thermostat",
    "planar",
    "cx-weak",
    "cx-strong",
    "cx-zeno",
];

/// An until formula `P U Q` together with whatever certificate data exists for it.
#[derive(Debug, Clone)]
pub struct UntilSpec {
    pub pq: PropositionPair,
    pub mode: UntilMode,
    pub barrier: Option<ScalarFn>,
    pub eci: Option<EciCertificate>,
    pub variant: EciVariant,
    pub fta: Option<FtaCertificate>,
}

/// pre-ECI data for `A` from `O`; `s` is an optional enlargement for the
/// pre to non-pre check.
#[derive(Debug, Clone)]
pub struct PreEciSpec {
    pub o: SetSpec,
    pub a: SetSpec,
    pub cert: EciCertificate,
    pub variant: EciVariant,
    pub s: Vec<(SetSpec, ScalarFn)>,
}

/// pre-ECI through bounded flow lengths.
#[derive(Debug, Clone)]
pub struct FlowLengthSpec {
    pub o: SetSpec,
    pub a: SetSpec,
    pub k: SetSpec,
    /// Forward invariant sets with their barrier functions (`K` first).
    pub invariants: Vec<(String, SetSpec, ScalarFn)>,
    pub v: ScalarFn,
    pub f_c: ScalarMap,
    pub f_d: ScalarMap,
    pub r: f64,
    pub rho: f64,
}

#[derive(Debug, Clone)]
pub struct PreFtaSpec {
    pub o: SetSpec,
    pub a: SetSpec,
    pub cert: FtaCertificate,
}

#[derive(Debug, Clone)]
pub struct PreFtaJumpSpec {
    pub o: SetSpec,
    pub a: SetSpec,
    pub w: ScalarFn,
    pub c: f64,
    pub n: SetSpec,
    pub r: f64,
}

/// A notion that simulation is expected to falsify, on `system` (often auxiliary).
#[derive(Debug, Clone)]
pub struct OracleSpec {
    pub system: HybridSystem,
    pub starts: SetSpec,
    pub a: SetSpec,
    pub notion: Notion,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub id: String,
    pub system: HybridSystem,
    pub grid: GridSpec,
    /// Default initial state for `simulate`.
    pub x0: Vec<f64>,
    pub until: Option<UntilSpec>,
    pub pre_eci: Option<PreEciSpec>,
    pub flow_lengths: Option<FlowLengthSpec>,
    pub pre_fta: Option<PreFtaSpec>,
    pub pre_fta_jumps: Option<PreFtaJumpSpec>,
    pub oracle: Option<OracleSpec>,
    pub dsl: Dsl,
}

impl Scenario {
    fn new(id: &str, dsl: Dsl, system: HybridSystem, lo: Vec<f64>, hi: Vec<f64>, x0: Vec<f64>) -> Self {
        let grid = GridSpec::for_system(&system, lo, hi);
        Scenario {
            id: id.into(),
            system,
            grid,
            x0,
            until: None,
            pre_eci: None,
            flow_lengths: None,
            pre_fta: None,
            pre_fta_jumps: None,
            oracle: None,
            dsl,
        }
    }
}

pub(crate) fn system(d: &Dsl, name: &str, c: &str, f: &[&[&str]], dset: &str, g: &[&[&str]]) -> Result<HybridSystem> {
    let coords: Vec<&str> = d.scope.coords.iter().map(String::as_str).collect();
    let fs = SetValuedMap::new(f.iter().map(|s| d.vector(s)).collect::<Result<_>>()?)?;
    let gs = SetValuedMap::new(g.iter().map(|s| d.vector(s)).collect::<Result<_>>()?)?;
    let mut h = HybridSystem::new(name, &coords, d.set(c)?, fs, d.set(dset)?, gs)?;
    for (i, vals) in d.discrete.iter().enumerate() {
        if let Some(v) = vals {
            h = h.with_discrete(i, v);
        }
    }
    Ok(h)
}

fn until(d: &Dsl, p: &str, q: &str, mode: UntilMode, b: &str) -> Result<UntilSpec> {
    Ok(UntilSpec {
        pq: PropositionPair::new(d.set(p)?, d.set(q)?)?,
        mode,
        barrier: Some(d.scalar(b)?),
        eci: None,
        variant: EciVariant::C,
        fta: None,
    })
}

fn eci(d: &Dsl, v: &str, f_c: &str, r1: f64, w: &str, f_d: &str, r2: f64) -> Result<EciCertificate> {
    Ok(EciCertificate {
        v: d.scalar(v)?,
        f_c: d.map(f_c)?,
        r1,
        w: d.scalar(w)?,
        f_d: d.map(f_d)?,
        r2,
    })
}

/// `C = [0, 1]`, `F = 1`, `D = [1, inf)`, `G = 0`, with `[1/2, 1] U [1, inf)`.
pub fn build_timer() -> Result<Scenario> {
    let d = Dsl::new(&["x"]);
    let h = system(&d, "timer", "x >= 0 & x <= 1", &[&["1"]], "x >= 1", &[&["0"]])?;
    let mut s = Scenario::new("timer", d, h, vec![-0.5], vec![2.0], vec![0.5]);
    s.until = Some(until(
        &s.dsl,
        "x >= 0.5 & x <= 1",
        "x >= 1",
        UntilMode::Weak,
        "0.5 - x",
    )?);
    Ok(s)
}

#[derive(Debug, Clone, Copy)]
pub struct BallParams {
    pub gamma: f64,
    pub lambda: f64,
    pub eps: f64,
}

impl Default for BallParams {
    fn default() -> Self {
        BallParams {
            gamma: 1.0,
            lambda: 0.5,
            eps: 0.2,
        }
    }
}

/// Height `x1`, velocity `x2`; gravity `gamma`, restitution `lambda`.
pub fn build_bouncing_ball(p: BallParams) -> Result<Scenario> {
    if !(p.gamma > 0.0) {
        return Err(Error::Invalid(format!("gamma must be positive, got {}", p.gamma)));
    }
    if !(p.lambda > 0.0 && p.lambda < 1.0) {
        return Err(Error::Invalid(format!("lambda must be in (0, 1), got {}", p.lambda)));
    }
    if !(p.eps > 0.0) {
        return Err(Error::Invalid(format!("eps must be positive, got {}", p.eps)));
    }
    let d = Dsl::new(&["x1", "x2"])
        .param("gamma", p.gamma)
        .param("lambda", p.lambda)
        .param("eps", p.eps);
    let h = system(
        &d,
        "bouncing-ball",
        "x1 >= 0",
        &[&["x2", "-gamma"]],
        "x1 == 0 & x2 <= 0",
        &[&["0", "-lambda * x2"]],
    )?;
    let mut s = Scenario::new("bouncing-ball", d, h, vec![-0.5, -4.0], vec![5.0, 4.0], vec![0.0, 2.0]);
    let d = &s.dsl;
    s.until = Some(until(
        d,
        "x1 >= 0 & x1 <= eps & x2 <= 0",
        "x1 >= 0 & x2 >= 0",
        UntilMode::Weak,
        "x1 - eps",
    )?);
    let energy = "2 * gamma * x1 + x2^2";
    let o = d.set("x1 == 0 & x2 >= 2 & x2 <= 3")?;
    s.flow_lengths = Some(FlowLengthSpec {
        o: o.clone(),
        a: d.set("x1 >= 0 & x1 <= 1 & x2 >= -1 & x2 <= 1")?,
        k: d.set(&format!("x1 >= 0 & {energy} <= 0.5"))?,
        invariants: vec![
            (
                "K".into(),
                d.set(&format!("x1 >= 0 & {energy} <= 0.5"))?,
                d.scalar(&format!("{energy} - 0.5"))?,
            ),
            (
                "K1".into(),
                d.set(&format!("x1 >= 0 & {energy} <= 9"))?,
                d.scalar(&format!("{energy} - 9"))?,
            ),
        ],
        v: d.scalar(energy)?,
        f_c: d.map("0")?,
        f_d: d.map("lambda^2 * y")?,
        r: 0.5,
        rho: 0.1,
    });
    s.pre_fta = Some(PreFtaSpec {
        o: d.set("x1 == 0 & x2 >= 0.5 & x2 <= 3")?,
        a: d.set("x2 <= 0")?,
        cert: FtaCertificate {
            v: d.scalar("max(x2, 0)")?,
            w: d.scalar("max(x2, 0)")?,
            c1: p.gamma,
            c2: 0.0,
            c: 1.0,
            r: 3.0,
            n: SetSpec::all(2),
        },
    });
    s.pre_fta_jumps = Some(PreFtaJumpSpec {
        o,
        a: d.set(&format!("x1 >= 0 & {energy} <= 1"))?,
        w: d.scalar(&format!("max({energy} - 1, 0)"))?,
        c: 1.0 - p.lambda * p.lambda,
        n: SetSpec::all(2),
        r: 9.0,
    });
    Ok(s)
}

#[derive(Debug, Clone, Copy)]
pub struct ThermostatParams {
    pub z_o: f64,
    pub z_delta: f64,
    pub z_min: f64,
    pub z_max: f64,
}

impl Default for ThermostatParams {
    fn default() -> Self {
        ThermostatParams {
            z_o: 0.0,
            z_delta: 2.0,
            z_min: 0.5,
            z_max: 1.0,
        }
    }
}

/// Heater mode `h` in {0, 1}, temperature `z`. While heating, `z` stays at
/// most `z_max` until the heater is off with `z >= z_min`.
pub fn build_thermostat(p: ThermostatParams) -> Result<Scenario> {
    if !(p.z_delta > 0.0 && p.z_o < p.z_min && p.z_min < p.z_max && p.z_max < p.z_o + p.z_delta) {
        return Err(Error::Invalid(format!(
            "need z_o < z_min < z_max < z_o + z_delta, got {p:?}"
        )));
    }
    let d = Dsl::new(&["h", "z"])
        .with_discrete(0, &[0.0, 1.0])
        .param("zo", p.z_o)
        .param("zd", p.z_delta)
        .param("zmin", p.z_min)
        .param("zmax", p.z_max);
    let h = system(
        &d,
        "thermostat",
        "h == 0 & z >= zmin | h == 1 & z <= zmax",
        &[&["0", "-z + zo + zd * h"]],
        "h == 0 & z <= zmin | h == 1 & z >= zmax",
        &[&["1 - h", "z"]],
    )?;
    let lo = p.z_o - 0.5;
    let hi = p.z_o + p.z_delta + 0.5;
    let mut s = Scenario::new(
        "thermostat",
        d,
        h,
        vec![0.0, lo],
        vec![1.0, hi],
        vec![1.0, p.z_min + 0.1],
    );
    let d = &s.dsl;
    let mut u = until(
        d,
        "h == 1 & z <= zmax",
        "h == 0 & z >= zmin",
        UntilMode::Strong,
        "(2 * h - 1) * (z - zmax)",
    )?;
    u.eci = Some(eci(
        d,
        "-z + zo + zd",
        "-y",
        p.z_o + p.z_delta - p.z_max,
        "-z + zmax + h",
        "z / 2",
        p.z_max - p.z_min,
    )?);
    u.variant = EciVariant::C;
    let v = "h * (zo + zd - z) + (1 - h) * max(zmin - z, 0)";
    u.fta = Some(FtaCertificate {
        v: d.scalar(v)?,
        w: d.scalar(v)?,
        c1: p.z_o + p.z_delta - p.z_max,
        c2: 0.0,
        c: p.z_max - p.z_min,
        r: f64::INFINITY,
        n: d.set("h == 0 | h == 1 & z < zo + zd")?,
    });
    s.until = Some(u);
    Ok(s)
}

/// A spiral flowing in the wedge `x1 >= max(0, x2)` and jumping from the
/// negative `x2` axis onto the diagonal.
pub fn build_planar() -> Result<Scenario> {
    let d = Dsl::new(&["x1", "x2"]);
    let h = system(
        &d,
        "planar",
        "x1 >= 0 & x1 >= x2",
        &[&["-x1 - x2", "x1 - x2"]],
        "x1 == 0 & x2 <= 0",
        &[&["-x2 / sqrt(2)", "-x2 / sqrt(2)"]],
    )?;
    let mut s = Scenario::new("planar", d, h, vec![-0.5, -3.0], vec![2.0, 2.0], vec![0.5, -1.5]);
    let d = &s.dsl;
    let o = d.set("x1 >= 0 & x1 <= 1 & x2 <= -1")?;
    let a = d.set("x1 >= 0 & x2 >= -0.5")?;
    s.pre_eci = Some(PreEciSpec {
        cert: eci(d, "x1^2 + x2^2", "-2 * y", 0.25, "-x2", "min(z, z / 2)", 0.5)?,
        variant: EciVariant::D,
        s: vec![
            (
                o.union(&a)?.labeled("O u A"),
                d.scalar("min(max(max(-x1, x1 - 1), x2 + 1), max(-x1, -x2 - 0.5))")?,
            ),
            (d.set("x1 >= 0")?, d.scalar("-x1")?),
        ],
        o,
        a,
    });
    Ok(s)
}

fn cx_system(d: &Dsl, name: &str) -> Result<HybridSystem> {
    system(d, name, "x >= 0", &[&["1"]], "x >= 1", &[&["0"]])
}

/// Satisfies the weak until while `P u Q` is not conditionally invariant for `H_w`.
pub fn build_cx_weak() -> Result<Scenario> {
    let d = Dsl::new(&["x"]);
    let h = cx_system(&d, "cx-weak")?;
    let mut s = Scenario::new("cx-weak", d, h, vec![-1.5], vec![3.0], vec![0.5]);
    let u = until(&s.dsl, "x >= 0.5", "x >= -1 & x <= 0", UntilMode::Weak, "0.5 - x")?;
    s.oracle = Some(OracleSpec {
        system: build_hw(&s.system, &u.pq.q)?,
        starts: u.pq.p_minus_q(),
        a: u.pq.p_or_q(),
        notion: Notion::CI,
    });
    s.until = Some(u);
    Ok(s)
}

/// Satisfies the strong until while `Q` is not eventually conditionally invariant for `H_s`.
pub fn build_cx_strong() -> Result<Scenario> {
    let d = Dsl::new(&["x"]).param("eps", 0.5);
    let h = cx_system(&d, "cx-strong")?;
    let mut s = Scenario::new("cx-strong", d, h, vec![-1.5], vec![3.0], vec![0.5]);
    let d = &s.dsl;
    let mut u = until(
        d,
        "x >= 0 & x <= 1 + eps",
        "x >= -1 & x <= 0 | x >= 1 + eps",
        UntilMode::Strong,
        "x - 1 - eps",
    )?;
    u.eci = Some(eci(d, "1 + eps - x", "-1", 0.25, "1 + eps - x", "y / 2", 0.25)?);
    u.variant = EciVariant::C;
    s.oracle = Some(OracleSpec {
        system: build_hs(&s.system, &u.pq.p, &u.pq.q)?,
        starts: u.pq.p_minus_q(),
        a: u.pq.q.clone(),
        notion: Notion::ECI,
    });
    s.until = Some(u);
    Ok(s)
}

/// Number of accumulating jump points kept in the Zeno counterexample.
pub const ZENO_POINTS: usize = 25;

/// Jump points `u_1 = 0`, `u_{n+1} = (u_n + 3/2) / 2`.
pub fn zeno_points() -> Vec<f64> {
    let mut u = vec![0.0];
    while u.len() < ZENO_POINTS {
        let last = *u.last().unwrap();
        u.push((last + 1.5) / 2.0);
    }
    u
}

/// All pre-ECI conditions hold except `G(S2) n C in S1`, and `A` is not pre-ECI.
pub fn build_cx_zeno() -> Result<Scenario> {
    let d = Dsl::new(&["x"]);
    let u = zeno_points();
    let mut dset: Vec<String> = u.iter().map(|v| format!("x == {v:?}")).collect();
    dset.push("x == 1.5".into());
    let h = system(
        &d,
        "cx-zeno",
        "x >= 0",
        &[&["1"]],
        &dset.join(" | "),
        &[&["max(x, (x + 1.5) / 2)"]],
    )?;
    let mut s = Scenario::new("cx-zeno", d, h, vec![-0.5], vec![3.0], vec![0.0]);
    let d = &s.dsl;
    let mut a_src = vec!["x >= 2".to_string()];
    a_src.extend(u.iter().filter(|v| **v >= 1.0).map(|v| format!("x == {v:?}")));
    a_src.push("x == 1.5".into());
    let a = d.set(&a_src.join(" | "))?.labeled("A");
    let o = d.set("x == 0")?;
    s.pre_eci = Some(PreEciSpec {
        o: o.clone(),
        a: a.clone(),
        cert: eci(d, "-x + 4", "-1", 2.0, "-x + 2", "z / 2 + 1/4", 1.0)?,
        variant: EciVariant::D,
        s: vec![],
    });
    s.oracle = Some(OracleSpec {
        system: s.system.clone(),
        starts: o,
        a,
        notion: Notion::PreECI,
    });
    Ok(s)
}

pub fn by_id(id: &str) -> Result<Scenario> {
    match id {
        "timer" => build_timer(),
        "bouncing-ball" => build_bouncing_ball(BallParams::default()),
        "thermostat" => build_thermostat(ThermostatParams::default()),
        "planar" => build_planar(),
        "cx-weak" => build_cx_weak(),
        "cx-strong" => build_cx_strong(),
        "cx-zeno" => build_cx_zeno(),
        _ => Err(Error::Config(format!(
            "unknown scenario '{id}' (known: {})",
            IDS.join(", ")
        ))),
    }
}
