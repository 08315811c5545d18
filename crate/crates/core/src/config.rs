//! User-defined scenarios in TOML.
//!
//! ```toml
//! name = "timer"
//! coords = ["x"]
//! x0 = [0.5]
//! [params]
//! rate = 1.0
//! [system]
//! C = "x >= 0 & x <= 1"
//! F = ["rate"]
//! D = "x >= 1"
//! G = ["0"]
//! [grid]
//! lo = [-0.5]
//! hi = [2.0]
//! [until]
//! P = "x >= 0.5 & x <= 1"
//! Q = "x >= 1"
//! mode = "weak"
//! barrier = "0.5 - x"
//! ```
//!
//! `F` and `G` take one selection (a list of strings) or several (a list of
//! lists). Optional tables: `[discrete]` (coordinate to value list),
//! `[until.eci]`, `[until.fta]`, `[pre_eci]`, `[pre_fta]` and `[settings]`.

use crate::cert::{EciCertificate, EciVariant, FtaCertificate};
use crate::dsl::Dsl;
use crate::error::{Error, Result};
use crate::monitor::{PropositionPair, UntilMode};
use crate::run::Settings;
use crate::scenarios::{system, PreEciSpec, PreFtaSpec, Scenario, UntilSpec};
use crate::set::SetSpec;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Selections {
    One(Vec<String>),
    Many(Vec<Vec<String>>),
}

impl Selections {
    fn lists(&self) -> Vec<Vec<&str>> {
        match self {
            Selections::One(v) => vec![v.iter().map(String::as_str).collect()],
            Selections::Many(vs) => vs.iter().map(|v| v.iter().map(String::as_str).collect()).collect(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemToml {
    #[serde(rename = "C")]
    c: String,
    #[serde(rename = "F")]
    f: Selections,
    #[serde(rename = "D")]
    d: String,
    #[serde(rename = "G")]
    g: Selections,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridToml {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EciToml {
    v: String,
    f_c: String,
    r1: f64,
    w: String,
    f_d: String,
    r2: f64,
    #[serde(default)]
    variant: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FtaToml {
    #[serde(rename = "V")]
    v: String,
    #[serde(rename = "W")]
    w: String,
    c1: f64,
    #[serde(default)]
    c2: f64,
    c: f64,
    #[serde(default = "infinite")]
    r: f64,
    #[serde(rename = "N", default = "all")]
    n: String,
}

fn infinite() -> f64 {
    f64::INFINITY
}

fn all() -> String {
    "all".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct UntilToml {
    #[serde(rename = "P")]
    p: String,
    #[serde(rename = "Q")]
    q: String,
    #[serde(default = "strong")]
    mode: String,
    barrier: Option<String>,
    eci: Option<EciToml>,
    fta: Option<FtaToml>,
}

fn strong() -> String {
    "strong".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PreEciToml {
    #[serde(rename = "O")]
    o: String,
    #[serde(rename = "A")]
    a: String,
    #[serde(flatten)]
    eci: EciToml,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PreFtaToml {
    #[serde(rename = "O")]
    o: String,
    #[serde(rename = "A")]
    a: String,
    #[serde(flatten)]
    fta: FtaToml,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigToml {
    name: String,
    coords: Vec<String>,
    x0: Option<Vec<f64>>,
    #[serde(default)]
    params: BTreeMap<String, f64>,
    #[serde(default)]
    discrete: BTreeMap<String, Vec<f64>>,
    system: SystemToml,
    grid: GridToml,
    until: Option<UntilToml>,
    pre_eci: Option<PreEciToml>,
    pre_fta: Option<PreFtaToml>,
    settings: Option<Settings>,
}

fn eci(d: &Dsl, e: &EciToml) -> Result<(EciCertificate, EciVariant)> {
    let cert = EciCertificate {
        v: d.scalar(&e.v)?,
        f_c: d.map(&e.f_c)?,
        r1: e.r1,
        w: d.scalar(&e.w)?,
        f_d: d.map(&e.f_d)?,
        r2: e.r2,
    };
    let variant = e.variant.as_deref().unwrap_or("d").parse()?;
    Ok((cert, variant))
}

fn fta(d: &Dsl, f: &FtaToml) -> Result<FtaCertificate> {
    let cert = FtaCertificate {
        v: d.scalar(&f.v)?,
        w: d.scalar(&f.w)?,
        c1: f.c1,
        c2: f.c2,
        c: f.c,
        r: f.r,
        n: d.set(&f.n)?,
    };
    cert.validate()?;
    Ok(cert)
}

/// A scenario and the settings found in its `[settings]` table, if any.
pub fn parse(src: &str) -> Result<(Scenario, Option<Settings>)> {
    let t: ConfigToml = toml::from_str(src).map_err(|e| Error::Config(e.message().to_string()))?;
    let n = t.coords.len();
    if n == 0 {
        return Err(Error::Config("coords must not be empty".into()));
    }
    if t.grid.lo.len() != n || t.grid.hi.len() != n {
        return Err(Error::Config(format!("grid bounds need {n} entries")));
    }
    if t.grid.lo.iter().zip(&t.grid.hi).any(|(l, h)| !(l < h)) {
        return Err(Error::Config("grid needs lo < hi in every coordinate".into()));
    }
    let coords: Vec<&str> = t.coords.iter().map(String::as_str).collect();
    let mut d = Dsl::new(&coords);
    for (k, v) in &t.params {
        d = d.param(k, *v);
    }
    for (name, vals) in &t.discrete {
        let i = coords
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Config(format!("discrete coordinate '{name}' is not in coords")))?;
        d = d.with_discrete(i, vals);
    }
    let f = t.system.f.lists();
    let g = t.system.g.lists();
    let fs: Vec<&[&str]> = f.iter().map(Vec::as_slice).collect();
    let gs: Vec<&[&str]> = g.iter().map(Vec::as_slice).collect();
    let h = system(&d, &t.name, &t.system.c, &fs, &t.system.d, &gs)?;
    let x0 =
        t.x0.unwrap_or_else(|| t.grid.lo.iter().zip(&t.grid.hi).map(|(l, h)| (l + h) / 2.0).collect());
    if x0.len() != n {
        return Err(Error::Config(format!("x0 needs {n} entries")));
    }
    let grid = crate::grid::GridSpec::for_system(&h, t.grid.lo, t.grid.hi);
    let mut s = Scenario {
        id: t.name,
        system: h,
        grid,
        x0,
        until: None,
        pre_eci: None,
        flow_lengths: None,
        pre_fta: None,
        pre_fta_jumps: None,
        oracle: None,
        dsl: d,
    };
    let d = &s.dsl;
    if let Some(u) = &t.until {
        let mode: UntilMode = u.mode.parse()?;
        let (cert, variant) = match &u.eci {
            Some(e) => {
                let (c, v) = eci(d, e)?;
                (Some(c), v)
            }
            None => (None, EciVariant::D),
        };
        s.until = Some(UntilSpec {
            pq: PropositionPair::new(d.set(&u.p)?, d.set(&u.q)?)?,
            mode,
            barrier: u.barrier.as_deref().map(|b| d.scalar(b)).transpose()?,
            eci: cert,
            variant,
            fta: u.fta.as_ref().map(|f| fta(d, f)).transpose()?,
        });
    }
    if let Some(p) = &t.pre_eci {
        let (cert, variant) = eci(d, &p.eci)?;
        s.pre_eci = Some(PreEciSpec {
            o: d.set(&p.o)?,
            a: d.set(&p.a)?,
            cert,
            variant,
            s: Vec::<(SetSpec, _)>::new(),
        });
    }
    if let Some(p) = &t.pre_fta {
        s.pre_fta = Some(PreFtaSpec {
            o: d.set(&p.o)?,
            a: d.set(&p.a)?,
            cert: fta(d, &p.fta)?,
        });
    }
    Ok((s, t.settings))
}

pub fn load(path: &Path) -> Result<(Scenario, Option<Settings>)> {
    let src = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse(&src)
}
