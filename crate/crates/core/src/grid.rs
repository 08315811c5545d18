//! Deterministic sampling of sets on a box.
//!
//! A tensor grid over the box is filtered by membership; grid points close to
//! a constraint's zero set are additionally projected onto it and refined, so
//! lower-dimensional pieces (hyperplanes, single points) get samples too.

use crate::func::norm;
use crate::set::{Atom, Rel, SetSpec, TAU_SET};
use crate::system::HybridSystem;
use crate::tangent::{newton_to_level, project_region};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

pub const DEFAULT_RES: usize = 64;
pub const DEFAULT_REFINE: usize = 4;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GridSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub res: usize,
    pub refine: usize,
    /// Enumerated values for discrete coordinates (replaces the linear grid).
    pub discrete: Vec<Option<Vec<f64>>>,
}

impl GridSpec {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        let n = lo.len();
        GridSpec {
            lo,
            hi,
            res: DEFAULT_RES,
            refine: DEFAULT_REFINE,
            discrete: vec![None; n],
        }
    }

    pub fn for_system(h: &HybridSystem, lo: Vec<f64>, hi: Vec<f64>) -> Self {
        let mut g = GridSpec::new(lo, hi);
        g.discrete = h.discrete.clone();
        g
    }

    pub fn with_res(mut self, res: usize) -> Self {
        self.res = res.max(2);
        self
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn cell(&self, i: usize) -> f64 {
        (self.hi[i] - self.lo[i]) / (self.res - 1) as f64
    }

    /// Euclidean diagonal over continuous coordinates.
    pub fn diameter(&self) -> f64 {
        (0..self.dim())
            .filter(|&i| self.discrete[i].is_none())
            .map(|i| (self.hi[i] - self.lo[i]).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    fn axis(&self, i: usize) -> Vec<f64> {
        match &self.discrete[i] {
            Some(v) => v.clone(),
            None => (0..self.res)
                .map(|k| {
                    if k + 1 == self.res {
                        self.hi[i]
                    } else {
                        self.lo[i] + k as f64 * self.cell(i)
                    }
                })
                .collect(),
        }
    }

    /// All tensor grid points, last coordinate fastest.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> = (0..self.dim()).map(|i| self.axis(i)).collect();
        let mut out = vec![vec![]];
        for ax in &axes {
            let mut next = Vec::with_capacity(out.len() * ax.len());
            for p in &out {
                for v in ax {
                    let mut q = p.clone();
                    q.push(*v);
                    next.push(q);
                }
            }
            out = next;
        }
        out
    }

    pub fn in_box(&self, x: &[f64]) -> bool {
        x.iter().enumerate().all(|(i, v)| {
            let slack = 1e-9 * (1.0 + self.hi[i].abs().max(self.lo[i].abs()));
            *v >= self.lo[i] - slack && *v <= self.hi[i] + slack
        })
    }

    /// Is `x` on the outer layer of the box (used for the compactness test).
    pub fn on_box_boundary(&self, x: &[f64]) -> bool {
        (0..self.dim()).any(|i| {
            self.discrete[i].is_none() && {
                let c = 0.5 * self.cell(i);
                x[i] <= self.lo[i] + c || x[i] >= self.hi[i] - c
            }
        })
    }

    /// Sample points of `s` inside the box, deterministic order.
    pub fn sample(&self, s: &SetSpec) -> Vec<Vec<f64>> {
        let base = self.points();
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        let mut push = |p: Vec<f64>, out: &mut Vec<Vec<f64>>| {
            let key: Vec<u64> = p.iter().map(|v| (v + 0.0).to_bits()).collect();
            if seen.insert(key) {
                out.push(p);
            }
        };
        let maxcell = (0..self.dim())
            .filter(|&i| self.discrete[i].is_none())
            .map(|i| self.cell(i))
            .fold(0.0, f64::max);
        let cont: Vec<usize> = (0..self.dim()).filter(|&i| self.discrete[i].is_none()).collect();
        let k = self.refine.max(1);
        let n_sub = k.pow(cont.len() as u32);
        for region in s.regions() {
            for p in &base {
                if region.contains(p, TAU_SET) {
                    push(p.clone(), &mut out);
                }
            }
            for atom in region.atoms() {
                let Atom::Scalar { g, rel } = atom else { continue };
                let target = if *rel == Rel::Lt { -4.0 * TAU_SET } else { 0.0 };
                for p in &base {
                    let v = g.eval(p);
                    if !v.is_finite() {
                        continue;
                    }
                    let gn = norm(&g.grad(p));
                    if !(v.abs() <= 2.0 * maxcell * gn) {
                        continue;
                    }
                    let mut q = p.clone();
                    newton_to_level(g, &mut q, target);
                    if let Some(z) = project_region(region, &q) {
                        if self.in_box(&z) {
                            push(z, &mut out);
                        }
                    }
                    if k > 1 && maxcell > 0.0 && n_sub <= 64 {
                        for m in 0..n_sub {
                            let mut z = p.clone();
                            let mut idx = m;
                            for &i in &cont {
                                let step = idx % k;
                                idx /= k;
                                let off = (step as f64 + 0.5) / k as f64 - 0.5;
                                z[i] += off * self.cell(i);
                            }
                            if self.in_box(&z) && region.contains(&z, TAU_SET) {
                                push(z, &mut out);
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::ScalarFn;
    use crate::set::Region;

    #[test]
    fn hits_hyperplane_and_point() {
        let n = 2;
        let g = GridSpec::new(vec![-1.0, -1.0], vec![1.0, 1.0]).with_res(16);
        let line = SetSpec::region(
            n,
            Region::new()
                .eq(ScalarFn::coord(0, n, 0.3))
                .le(ScalarFn::coord(1, n, 0.0)),
        );
        let pts = g.sample(&line);
        assert!(!pts.is_empty());
        assert!(pts.iter().all(|p| (p[0] - 0.3).abs() <= 1e-9 && p[1] <= 1e-9));
        let point = SetSpec::region(
            n,
            Region::new()
                .eq(ScalarFn::coord(0, n, 0.3))
                .eq(ScalarFn::coord(1, n, -0.7)),
        );
        assert!(!g.sample(&point).is_empty());
    }

    #[test]
    fn discrete_axis() {
        let mut g = GridSpec::new(vec![0.0, -1.0], vec![1.0, 2.0]).with_res(8);
        g.discrete[0] = Some(vec![0.0, 1.0]);
        assert_eq!(g.points().len(), 16);
        let s = SetSpec::region(
            2,
            Region::new()
                .discrete(0, &[1.0], &[0.0, 1.0])
                .ge(ScalarFn::coord(1, 2, 1.0))
                .le(ScalarFn::coord(1, 2, 1.0)),
        );
        let pts = g.sample(&s);
        assert!(pts.iter().any(|p| p == &vec![1.0, 1.0]));
    }
}
