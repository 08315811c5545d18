//! Numerical tangent cone membership and local distance to a set.

use crate::func::{dist, dot};
use crate::set::{Atom, Region, Rel, SetSpec, TAU_SET};

pub const H_SEQ: [f64; 3] = [1e-3, 1e-4, 1e-5];
pub const TANGENT_TOL: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct TangentParams {
    pub h_seq: Vec<f64>,
    pub tol: f64,
}

impl Default for TangentParams {
    fn default() -> Self {
        TangentParams {
            h_seq: H_SEQ.to_vec(),
            tol: TANGENT_TOL,
        }
    }
}

/// Approximate distance from `y` to `s` by alternating projections onto the
/// violated constraints of each region. Infinite when no region is reached.
pub fn local_distance(s: &SetSpec, y: &[f64]) -> f64 {
    if s.contains(y) {
        return 0.0;
    }
    s.regions()
        .iter()
        .filter_map(|r| project_region(r, y).map(|p| dist(&p, y)))
        .fold(f64::INFINITY, f64::min)
}

pub(crate) fn project_region(r: &Region, y: &[f64]) -> Option<Vec<f64>> {
    let mut z = y.to_vec();
    for _ in 0..30 {
        if r.contains(&z, TAU_SET) {
            return Some(z);
        }
        for a in r.atoms() {
            if a.holds(&z, TAU_SET) {
                continue;
            }
            match a {
                Atom::Scalar { g, rel } => {
                    let target = match rel {
                        Rel::Lt => -4.0 * TAU_SET,
                        _ => 0.0,
                    };
                    newton_to_level(g, &mut z, target);
                }
                Atom::Discrete { coord, allowed, .. } => {
                    let cur = z[*coord];
                    if let Some(best) = allowed
                        .iter()
                        .copied()
                        .min_by(|a, b| (a - cur).abs().total_cmp(&(b - cur).abs()))
                    {
                        z[*coord] = best;
                    }
                }
            }
        }
    }
    r.contains(&z, TAU_SET).then_some(z)
}

/// A few Newton steps moving `z` along the gradient of `g` to `g(z) = target`.
pub(crate) fn newton_to_level(g: &crate::func::ScalarFn, z: &mut [f64], target: f64) {
    for _ in 0..8 {
        let v = g.eval(z) - target;
        if v.abs() <= 0.1 * TAU_SET {
            return;
        }
        let gr = g.grad(z);
        let nn = dot(&gr, &gr);
        if !(nn > 1e-300) || !nn.is_finite() {
            return;
        }
        for (zi, gi) in z.iter_mut().zip(&gr) {
            *zi -= v * gi / nn;
        }
    }
}

/// `v` is (numerically) in the tangent cone of `s` at `x`: for each step `h`
/// the point `x + h v` is within `tol * h` of `s`.
pub fn tangent_cone_member(s: &SetSpec, x: &[f64], v: &[f64], p: &TangentParams) -> bool {
    p.h_seq.iter().all(|&h| {
        let y: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + h * b).collect();
        local_distance(s, &y) / h <= p.tol
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::ScalarFn;

    #[test]
    fn half_line() {
        let s = SetSpec::region(1, Region::new().ge(ScalarFn::coord(0, 1, 0.0)));
        let p = TangentParams::default();
        assert!(!tangent_cone_member(&s, &[0.0], &[-1.0], &p));
        assert!(tangent_cone_member(&s, &[0.0], &[1.0], &p));
        assert!(tangent_cone_member(&s, &[2.0], &[-1.0], &p));
    }

    #[test]
    fn wedge_and_circle() {
        let n = 2;
        // C = {x1 >= 0, x1 >= x2}
        let c = SetSpec::region(
            n,
            Region::new()
                .ge(ScalarFn::coord(0, n, 0.0))
                .ge(ScalarFn::affine("x1-x2", vec![1.0, -1.0], 0.0)),
        );
        let p = TangentParams::default();
        assert!(tangent_cone_member(&c, &[0.0, -1.0], &[1.0, 1.0], &p));
        assert!(!tangent_cone_member(&c, &[1.0, 1.0], &[-1.0, 0.0], &p));
        // tangent direction to a disk boundary is admissible (distance is O(h^2))
        let disk = SetSpec::region(
            n,
            Region::new().le(ScalarFn::new("r", |x| x[0] * x[0] + x[1] * x[1] - 1.0)),
        );
        assert!(tangent_cone_member(&disk, &[1.0, 0.0], &[0.0, 1.0], &p));
        assert!(!tangent_cone_member(&disk, &[1.0, 0.0], &[1.0, 0.0], &p));
        assert!((local_distance(&disk, &[2.0, 0.0]) - 1.0).abs() < 1e-6);
    }
}
