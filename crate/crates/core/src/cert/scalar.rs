//! Scalar comparison systems `y' = f_c(y)` and `z+ = f_d(z)`.

use crate::func::ScalarMap;
use serde::Serialize;

const BLOWUP: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarOutcome {
    /// Strictly below `r - tau` from `at` (time or jump count) on, within the horizon.
    Converged { at: f64 },
    /// Never strictly below, or went back above.
    NotConverged { last: f64 },
    /// Stuck at `r` within the tolerance.
    Tie,
}

impl ScalarOutcome {
    pub fn converged(&self) -> bool {
        matches!(self, ScalarOutcome::Converged { .. })
    }

    pub fn at(&self) -> Option<f64> {
        match self {
            ScalarOutcome::Converged { at } => Some(*at),
            _ => None,
        }
    }
}

fn rk4(f: &ScalarMap, y: f64, h: f64) -> f64 {
    let k1 = f.eval(y);
    let k2 = f.eval(y + 0.5 * h * k1);
    let k3 = f.eval(y + 0.5 * h * k2);
    let k4 = f.eval(y + h * k3);
    y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Integrates `y' = f_c(y)` from `y0` up to `t_max` and reports the first
/// time with `y < r1 - tau`, checking that `y` stays below `r1` afterwards.
pub fn simulate_scalar_flow(f_c: &ScalarMap, y0: f64, r1: f64, t_max: f64, tau: f64) -> ScalarOutcome {
    let below = |y: f64| y < r1 - tau;
    let dt = (t_max / 1e5).clamp(1e-5, 1e-3);
    let mut t = 0.0;
    let mut y = y0;
    let mut hit: Option<f64> = if below(y) { Some(0.0) } else { None };
    while t < t_max {
        if y < -BLOWUP {
            // escape to -inf counts as convergence
            return ScalarOutcome::Converged { at: hit.unwrap_or(t) };
        }
        if !y.is_finite() || y > BLOWUP {
            return ScalarOutcome::NotConverged { last: y };
        }
        let h = dt.min(t_max - t);
        let y_new = rk4(f_c, y, h);
        if hit.is_none() && below(y_new) {
            let (mut lo, mut hi) = (0.0, h);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if below(rk4(f_c, y, mid)) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            hit = Some(t + hi);
        } else if hit.is_some() && y_new >= r1 {
            return ScalarOutcome::NotConverged { last: y_new };
        }
        y = y_new;
        t += h;
    }
    match hit {
        Some(at) => ScalarOutcome::Converged { at },
        None if (y - r1).abs() <= tau => ScalarOutcome::Tie,
        None => ScalarOutcome::NotConverged { last: y },
    }
}

/// Iterates `z+ = f_d(z)` from `z0` and reports the first `j` with `z_j < r2 - tau`,
/// checking that later iterates stay below `r2`.
pub fn iterate_scalar_jump(f_d: &ScalarMap, z0: f64, r2: f64, j_max: usize, tau: f64) -> ScalarOutcome {
    let below = |z: f64| z < r2 - tau;
    let mut z = z0;
    let mut hit: Option<usize> = if below(z) { Some(0) } else { None };
    for j in 1..=j_max {
        if z < -BLOWUP {
            return ScalarOutcome::Converged {
                at: hit.unwrap_or(j - 1) as f64,
            };
        }
        z = f_d.eval(z);
        if !z.is_finite() || z > BLOWUP {
            return ScalarOutcome::NotConverged { last: z };
        }
        if hit.is_none() && below(z) {
            hit = Some(j);
        } else if hit.is_some() && z >= r2 {
            return ScalarOutcome::NotConverged { last: z };
        }
    }
    match hit {
        Some(at) => ScalarOutcome::Converged { at: at as f64 },
        None if (z - r2).abs() <= tau => ScalarOutcome::Tie,
        None => ScalarOutcome::NotConverged { last: z },
    }
}

/// Nondecreasing on `[lo, hi]`, tested on a uniform grid. Returns the first
/// decreasing pair when the test fails.
pub fn is_nondecreasing(f: &ScalarMap, lo: f64, hi: f64, n: usize) -> Result<(), (f64, f64)> {
    let n = n.max(2);
    let mut prev_y = lo;
    let mut prev = f.eval(lo);
    for k in 1..n {
        let y = lo + (hi - lo) * k as f64 / (n - 1) as f64;
        let v = f.eval(y);
        if v < prev - 1e-12 * (1.0 + prev.abs()) {
            return Err((prev_y, y));
        }
        prev = v;
        prev_y = y;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_time() {
        let f = ScalarMap::new("-2y", |y| -2.0 * y);
        let out = simulate_scalar_flow(&f, 1.0, 0.5, 10.0, 1e-7);
        let t = out.at().unwrap();
        assert!((t - 0.5f64.ln() / -2.0).abs() < 1e-6, "{t}");
        let tie = simulate_scalar_flow(&ScalarMap::new("0", |_| 0.0), 0.5, 0.5, 1.0, 1e-7);
        assert_eq!(tie, ScalarOutcome::Tie);
        let esc = simulate_scalar_flow(&ScalarMap::new("-y^2", |y| -y * y), -1.0, -5.0, 10.0, 1e-7);
        assert!(esc.converged());
    }

    #[test]
    fn halving_map() {
        let f = ScalarMap::new("z/2", |z| z / 2.0);
        assert_eq!(iterate_scalar_jump(&f, 1.0, 0.5, 50, 1e-7).at(), Some(2.0));
        let id = ScalarMap::new("z", |z| z);
        assert!(!iterate_scalar_jump(&id, 2.0, 1.0, 50, 1e-7).converged());
        assert!(is_nondecreasing(&f, -3.0, 3.0, 100).is_ok());
        let bad = ScalarMap::new("-z", |z| -z);
        assert!(is_nondecreasing(&bad, -1.0, 1.0, 10).is_err());
    }
}
