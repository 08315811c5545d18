#![allow(dead_code)]

use hyuntil::arc::{HybridArc, Sample, Segment, Termination};
use hyuntil::run::Settings;
use rand::Rng;
use std::process::{Command, Output};

pub const BIN: &str = env!("CARGO_BIN_EXE_hyuntil");

/// Runs the CLI with a clean environment for the `HYUNTIL_*` variables.
pub fn cli(args: &[&str]) -> Output {
    let mut c = Command::new(BIN);
    for (k, _) in std::env::vars() {
        if k.starts_with("HYUNTIL_") {
            c.env_remove(k);
        }
    }
    c.args(args).output().expect("binary runs")
}

pub fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

/// Report body without the header line (which carries a timestamp).
pub fn body(o: &Output) -> String {
    let s = String::from_utf8_lossy(&o.stdout);
    s.split_once('\n').map(|(_, b)| b.to_string()).unwrap_or_default()
}

pub fn json(o: &Output) -> serde_json::Value {
    serde_json::from_str(&body(o)).expect("report body is JSON")
}

/// Settings small enough for quick assertions.
pub fn quick() -> Settings {
    Settings {
        grid_res: 24,
        monitor_samples: 24,
        max_arc_starts: 12,
        ..Settings::default()
    }
}

/// A random hand-built arc in dimension `n`: a few segments of a random walk,
/// with random termination.
pub fn random_arc(rng: &mut impl Rng, n: usize) -> HybridArc {
    let segs = rng.gen_range(1..=4);
    let mut t = 0.0;
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut out = Vec::new();
    for j in 0..segs {
        if j > 0 {
            for v in &mut x {
                *v = rng.gen_range(-1.5..1.5);
            }
        }
        let k = rng.gen_range(1..=12);
        let mut samples = Vec::with_capacity(k);
        for i in 0..k {
            if i > 0 {
                t += rng.gen_range(0.0..0.3);
                for v in &mut x {
                    *v += rng.gen_range(-0.4..0.4);
                }
            }
            samples.push(Sample {
                t,
                x: x.clone(),
                dx: vec![0.0; n],
            });
        }
        out.push(Segment { j, samples });
    }
    let term = match rng.gen_range(0..4) {
        0 => Termination::TimeHorizon,
        1 => Termination::DeadEnd,
        2 => Termination::JumpHorizon,
        _ => Termination::Prefix,
    };
    HybridArc::from_segments(out, term, (t.max(1.0), segs)).expect("valid arc")
}
