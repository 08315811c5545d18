use clap::{Args, Parser, Subcommand};
use hyuntil::arc::export_trajectory;
use hyuntil::cert::EciVariant;
use hyuntil::monitor::UntilMode;
use hyuntil::run::{self, exit, Settings, Theorem};
use hyuntil::scenarios::{self, Scenario};
use hyuntil::sim::{simulate, Policy};
use hyuntil::{config, report, Error, Result};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Simulate, monitor and certify until formulas on hybrid inclusions.
#[derive(Parser, Debug)]
#[command(name = "hyuntil", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// Grid points per continuous coordinate.
    #[arg(long, global = true, env = "HYUNTIL_GRID_RES")]
    grid_res: Option<usize>,
    /// Certification tolerance.
    #[arg(long, global = true, env = "HYUNTIL_TOL")]
    tol: Option<f64>,
    /// Ordinary time horizon.
    #[arg(long, global = true, env = "HYUNTIL_TMAX")]
    tmax: Option<f64>,
    /// Jump horizon.
    #[arg(long, global = true, env = "HYUNTIL_JMAX")]
    jmax: Option<usize>,
    /// Maximum number of solutions per initial point.
    #[arg(long, global = true, env = "HYUNTIL_BRANCHES")]
    branches: Option<usize>,
    #[arg(long, global = true, env = "HYUNTIL_SEED")]
    seed: Option<u64>,
    /// branch or jump-priority.
    #[arg(long, global = true, env = "HYUNTIL_POLICY")]
    policy: Option<String>,
    /// Output directory for report.json (and arc_<k>.csv from simulate).
    #[arg(long, global = true, env = "HYUNTIL_OUT")]
    out: Option<PathBuf>,
    /// Print the effective settings and exit.
    #[arg(long, global = true)]
    print_config: bool,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Simulate solutions from one initial state.
    Simulate {
        /// Built-in scenario id or TOML file.
        scenario: String,
        /// Initial state, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x0: Option<Vec<f64>>,
    },
    /// Evaluate the scenario's until formula on simulated solutions.
    Monitor {
        scenario: String,
        /// strong or weak; defaults to the scenario's mode.
        #[arg(long)]
        mode: Option<String>,
        /// Number of sampled initial points.
        #[arg(long, env = "HYUNTIL_SAMPLES")]
        samples: Option<usize>,
    },
    /// Check the sufficient conditions of a theorem.
    Certify {
        scenario: String,
        #[arg(long)]
        theorem: Option<String>,
        /// Solution-class variant a, b, c or d.
        #[arg(long)]
        variant: Option<String>,
        /// Also monitor the formula and report the agreement quadrant.
        #[arg(long)]
        cross: bool,
    },
}

fn load(id: &str) -> Result<(Scenario, Option<Settings>)> {
    if scenarios::IDS.contains(&id) {
        return Ok((scenarios::by_id(id)?, None));
    }
    let p = Path::new(id);
    if p.exists() {
        return config::load(p);
    }
    Err(Error::Config(format!(
        "'{id}' is neither a scenario ({}) nor a file",
        scenarios::IDS.join(", ")
    )))
}

fn settings(c: &Common, base: Option<Settings>) -> Result<Settings> {
    let mut s = base.unwrap_or_default();
    if let Some(v) = c.grid_res {
        s.grid_res = v;
    }
    if let Some(v) = c.tol {
        s.tau_cert = v;
    }
    if let Some(v) = c.tmax {
        s.budget.t_max = v;
    }
    if let Some(v) = c.jmax {
        s.budget.j_max = v;
    }
    if let Some(v) = c.branches {
        s.budget.branch_max = v;
    }
    if let Some(v) = c.seed {
        s.seed = v;
    }
    if let Some(p) = &c.policy {
        s.policy = match p.as_str() {
            "branch" => Policy::Branch,
            "jump-priority" => Policy::JumpPriority,
            _ => return Err(Error::Config(format!("unknown policy '{p}'"))),
        };
    }
    s.validate()?;
    Ok(s)
}

/// Prints the report and, with `--out`, also writes it to `<out>/report.json`.
fn emit(c: &Common, command: &str, scenario: &str, body: &impl serde::Serialize) -> Result<()> {
    let text = report::render(command, scenario, body);
    if let Some(dir) = &c.out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), &text)?;
    }
    print!("{text}");
    Ok(())
}

fn run(cli: Cli) -> Result<i32> {
    let c = &cli.common;
    let id = match &cli.cmd {
        Cmd::Simulate { scenario, .. } | Cmd::Monitor { scenario, .. } | Cmd::Certify { scenario, .. } => scenario,
    };
    let (scenario, base) = load(id)?;
    let mut set = settings(c, base)?;
    if let Cmd::Monitor { samples: Some(n), .. } = &cli.cmd {
        set.monitor_samples = *n;
    }
    if c.print_config {
        let text = toml::to_string(&set).map_err(|e| Error::Config(e.to_string()))?;
        print!("# scenario = \"{}\"\n{text}", scenario.id);
        return Ok(exit::OK);
    }
    match &cli.cmd {
        Cmd::Simulate { x0, .. } => {
            let x0 = x0.clone().unwrap_or_else(|| scenario.x0.clone());
            let arcs = simulate(&scenario.system, &x0, &set.budget, set.policy)?;
            let summary = run::summarize(&scenario.system, &arcs);
            let body = json!({ "x0": x0, "policy": set.policy, "arcs": summary });
            if let Some(dir) = &c.out {
                std::fs::create_dir_all(dir)?;
                for (k, a) in arcs.iter().enumerate() {
                    export_trajectory(&scenario.system, a, &dir.join(format!("arc_{k}.csv")))?;
                }
            }
            emit(c, "simulate", &scenario.id, &body)?;
            Ok(exit::OK)
        }
        Cmd::Monitor { mode, .. } => {
            let mode: Option<UntilMode> = mode.as_deref().map(str::parse).transpose()?;
            let r = run::monitor(&scenario, mode, &set)?;
            emit(c, "monitor", &scenario.id, &r)?;
            Ok(run::monitor_exit_code(r.verdict))
        }
        Cmd::Certify {
            theorem,
            variant,
            cross,
            ..
        } => {
            let theorem: Theorem = match theorem {
                Some(t) => t.parse()?,
                None => match &scenario.until {
                    Some(u) if u.mode == UntilMode::Weak => Theorem::Weak,
                    Some(_) => Theorem::StrongEci,
                    None => Theorem::PreEci,
                },
            };
            let variant: Option<EciVariant> = variant.as_deref().map(str::parse).transpose()?;
            let out = run::certify(&scenario, theorem, variant, &set)?;
            let code = out.exit_code();
            if *cross {
                let m = run::monitor(&scenario, None, &set)?;
                let x = run::cross(&m, &out);
                emit(
                    c,
                    "certify",
                    &scenario.id,
                    &json!({ "certify": out, "monitor": m.verdict, "cross": x }),
                )?;
            } else {
                emit(c, "certify", &scenario.id, &out)?;
            }
            Ok(code)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::InitialState(_) => exit::S0,
                _ => exit::CONFIG,
            };
            ExitCode::from(code as u8)
        }
    }
}
