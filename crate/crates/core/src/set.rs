//! Sets as finite unions of conjunctive regions.
//!
//! Every scalar constraint is kept in one of the forms `g <= 0`, `g < 0`,
//! `g = 0`. Discrete coordinates carry their finite domain so complements
//! stay inside it.

use crate::error::{Error, Result};
use crate::func::ScalarFn;
use std::fmt;

/// Default membership tolerance.
pub const TAU_SET: f64 = 1e-9;

const MAX_REGIONS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Le,
    Lt,
    Eq,
}

#[derive(Debug, Clone)]
pub enum Atom {
    Scalar {
        g: ScalarFn,
        rel: Rel,
    },
    Discrete {
        coord: usize,
        allowed: Vec<f64>,
        domain: Vec<f64>,
    },
}

impl Atom {
    pub fn holds(&self, x: &[f64], tol: f64) -> bool {
        match self {
            Atom::Scalar { g, rel } => {
                let v = g.eval(x);
                match rel {
                    Rel::Le => v <= tol,
                    Rel::Lt => v < -tol,
                    Rel::Eq => v.abs() <= tol,
                }
            }
            Atom::Discrete { coord, allowed, .. } => allowed.iter().any(|a| (x[*coord] - a).abs() <= tol),
        }
    }

    /// Amount by which `x` fails the atom (zero when it holds without tolerance).
    pub fn violation(&self, x: &[f64]) -> f64 {
        match self {
            Atom::Scalar { g, rel } => {
                let v = g.eval(x);
                match rel {
                    Rel::Le | Rel::Lt => v.max(0.0),
                    Rel::Eq => v.abs(),
                }
            }
            Atom::Discrete { coord, allowed, .. } => allowed
                .iter()
                .map(|a| (x[*coord] - a).abs())
                .fold(f64::INFINITY, f64::min),
        }
    }

    fn negate(&self) -> Vec<Atom> {
        match self {
            Atom::Scalar { g, rel } => match rel {
                Rel::Le => vec![Atom::Scalar {
                    g: g.negated(),
                    rel: Rel::Lt,
                }],
                Rel::Lt => vec![Atom::Scalar {
                    g: g.negated(),
                    rel: Rel::Le,
                }],
                Rel::Eq => vec![
                    Atom::Scalar {
                        g: g.clone(),
                        rel: Rel::Lt,
                    },
                    Atom::Scalar {
                        g: g.negated(),
                        rel: Rel::Lt,
                    },
                ],
            },
            Atom::Discrete { coord, allowed, domain } => vec![Atom::Discrete {
                coord: *coord,
                allowed: domain.iter().copied().filter(|d| !allowed.contains(d)).collect(),
                domain: domain.clone(),
            }],
        }
    }

    fn closure(&self) -> Atom {
        match self {
            Atom::Scalar { g, rel: Rel::Lt } => Atom::Scalar {
                g: g.clone(),
                rel: Rel::Le,
            },
            a => a.clone(),
        }
    }
}

/// A conjunction of atoms. The empty conjunction is the whole space.
#[derive(Debug, Clone, Default)]
pub struct Region {
    atoms: Vec<Atom>,
}

impl Region {
    pub fn new() -> Self {
        Region::default()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    fn push(mut self, a: Atom) -> Self {
        self.atoms.push(a);
        self
    }

    /// `g <= 0`
    pub fn le(self, g: ScalarFn) -> Self {
        self.push(Atom::Scalar { g, rel: Rel::Le })
    }

    /// `g < 0`
    pub fn lt(self, g: ScalarFn) -> Self {
        self.push(Atom::Scalar { g, rel: Rel::Lt })
    }

    /// `g >= 0`
    pub fn ge(self, g: ScalarFn) -> Self {
        self.push(Atom::Scalar {
            g: g.negated(),
            rel: Rel::Le,
        })
    }

    /// `g > 0`
    pub fn gt(self, g: ScalarFn) -> Self {
        self.push(Atom::Scalar {
            g: g.negated(),
            rel: Rel::Lt,
        })
    }

    /// `g = 0`
    pub fn eq(self, g: ScalarFn) -> Self {
        self.push(Atom::Scalar { g, rel: Rel::Eq })
    }

    /// `x[coord]` takes one of `allowed`, out of the finite `domain`.
    pub fn discrete(self, coord: usize, allowed: &[f64], domain: &[f64]) -> Self {
        self.push(Atom::Discrete {
            coord,
            allowed: allowed.to_vec(),
            domain: domain.to_vec(),
        })
    }

    /// `lo <= x[i] <= hi` for each coordinate with finite bounds.
    pub fn bounds(mut self, n: usize, b: &[(usize, f64, f64)]) -> Self {
        for &(i, lo, hi) in b {
            if lo.is_finite() {
                self = self.ge(ScalarFn::coord(i, n, lo));
            }
            if hi.is_finite() {
                self = self.le(ScalarFn::coord(i, n, hi));
            }
        }
        self
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.atoms.iter().all(|a| a.holds(x, tol))
    }

    pub fn violation(&self, x: &[f64]) -> f64 {
        self.atoms.iter().map(|a| a.violation(x)).fold(0.0, f64::max)
    }

    // None when two discrete atoms on one coordinate have no common value.
    fn and(&self, other: &Region) -> Option<Region> {
        let mut atoms = self.atoms.clone();
        for a in &other.atoms {
            if let Atom::Discrete { coord, allowed, domain } = a {
                if let Some(Atom::Discrete { allowed: mine, .. }) = atoms
                    .iter_mut()
                    .find(|b| matches!(b, Atom::Discrete { coord: c, .. } if c == coord))
                {
                    mine.retain(|v| allowed.contains(v));
                    if mine.is_empty() {
                        return None;
                    }
                    continue;
                }
                if allowed.is_empty() {
                    return None;
                }
                atoms.push(Atom::Discrete {
                    coord: *coord,
                    allowed: allowed.clone(),
                    domain: domain.clone(),
                });
            } else {
                atoms.push(a.clone());
            }
        }
        if atoms
            .iter()
            .any(|a| matches!(a, Atom::Discrete { allowed, .. } if allowed.is_empty()))
        {
            return None;
        }
        Some(Region { atoms })
    }
}

/// A subset of R^n given as a finite union of regions.
#[derive(Clone)]
pub struct SetSpec {
    dim: usize,
    regions: Vec<Region>,
    label: String,
}

impl SetSpec {
    pub fn empty(dim: usize) -> Self {
        SetSpec {
            dim,
            regions: vec![],
            label: "{}".into(),
        }
    }

    pub fn all(dim: usize) -> Self {
        SetSpec {
            dim,
            regions: vec![Region::new()],
            label: format!("R^{dim}"),
        }
    }

    pub fn region(dim: usize, r: Region) -> Self {
        SetSpec::union_of(dim, vec![r])
    }

    pub fn union_of(dim: usize, regions: Vec<Region>) -> Self {
        SetSpec {
            dim,
            regions,
            label: String::new(),
        }
    }

    pub fn labeled(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn is_empty_syntactically(&self) -> bool {
        self.regions.is_empty()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.contains_tol(x, TAU_SET)
    }

    pub fn contains_tol(&self, x: &[f64], tol: f64) -> bool {
        debug_assert_eq!(x.len(), self.dim);
        self.regions.iter().any(|r| r.contains(x, tol))
    }

    /// Smallest region violation; zero iff `x` belongs to the closure of some region.
    pub fn violation(&self, x: &[f64]) -> f64 {
        self.regions
            .iter()
            .map(|r| r.violation(x))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn union(&self, other: &SetSpec) -> Result<SetSpec> {
        self.same_dim(other)?;
        let mut regions = self.regions.clone();
        regions.extend(other.regions.iter().cloned());
        Ok(SetSpec {
            dim: self.dim,
            regions,
            label: format!("({} u {})", self.label, other.label),
        })
    }

    pub fn intersection(&self, other: &SetSpec) -> Result<SetSpec> {
        self.same_dim(other)?;
        let mut regions = Vec::new();
        for a in &self.regions {
            for b in &other.regions {
                if let Some(r) = a.and(b) {
                    regions.push(r);
                }
            }
        }
        if regions.len() > MAX_REGIONS {
            return Err(Error::Invalid("set expression too large".into()));
        }
        Ok(SetSpec {
            dim: self.dim,
            regions,
            label: format!("({} n {})", self.label, other.label),
        })
    }

    pub fn complement(&self) -> Result<SetSpec> {
        // not(R1 u ... u Rk) = and_i or_{a in R_i} not(a)
        let mut acc = SetSpec::all(self.dim);
        for r in &self.regions {
            let alts: Vec<Region> = r
                .atoms
                .iter()
                .flat_map(|a| a.negate())
                .map(|a| Region { atoms: vec![a] })
                .collect();
            let neg = SetSpec::union_of(self.dim, alts);
            acc = acc.intersection(&neg)?;
        }
        acc.label = format!("~{}", self.label);
        Ok(acc)
    }

    pub fn difference(&self, other: &SetSpec) -> Result<SetSpec> {
        let d = self.intersection(&other.complement()?)?;
        Ok(d.labeled(format!("({} \\ {})", self.label, other.label)))
    }

    /// Syntactic closure: strict inequalities relaxed.
    pub fn closure(&self) -> SetSpec {
        SetSpec {
            dim: self.dim,
            regions: self
                .regions
                .iter()
                .map(|r| Region {
                    atoms: r.atoms.iter().map(|a| a.closure()).collect(),
                })
                .collect(),
            label: format!("cl({})", self.label),
        }
    }

    /// True when no strict inequality appears.
    pub fn is_closed(&self) -> bool {
        self.regions
            .iter()
            .all(|r| r.atoms.iter().all(|a| !matches!(a, Atom::Scalar { rel: Rel::Lt, .. })))
    }

    /// `{x in self : g(x) <= 0}` etc., a one-atom restriction.
    pub fn restrict(&self, r: Region) -> Result<SetSpec> {
        let label = self.label.clone();
        Ok(self.intersection(&SetSpec::region(self.dim, r))?.labeled(label))
    }

    fn same_dim(&self, other: &SetSpec) -> Result<()> {
        crate::error::check_dim(self.dim, other.dim)
    }
}

impl fmt::Debug for SetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SetSpec({}, {} regions)", self.label, self.regions.len())
    }
}

/// `{x in S : 0 < B(x) <= delta}`, a thin layer outside the zero sublevel set of `B`.
pub fn boundary_shell(s: &SetSpec, b: &ScalarFn, delta: f64) -> Result<SetSpec> {
    if !(delta > 0.0) {
        return Err(Error::Invalid("shell width must be positive".into()));
    }
    s.restrict(Region::new().gt(b.clone()).le(b.shifted(delta)))
        .map(|r| r.labeled(format!("shell({}, {})", s.label(), b.label())))
}

/// `{x in S : B(x) <= 0}`.
pub fn sublevel(s: &SetSpec, b: &ScalarFn) -> Result<SetSpec> {
    s.restrict(Region::new().le(b.clone()))
        .map(|r| r.labeled(format!("{{{} : {} <= 0}}", s.label(), b.label())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval(lo: f64, hi: f64) -> SetSpec {
        SetSpec::region(1, Region::new().bounds(1, &[(0, lo, hi)]))
    }

    #[test]
    fn interval_algebra() {
        let a = interval(0.0, 2.0);
        let b = interval(1.0, 3.0);
        let i = a.intersection(&b).unwrap();
        assert!(i.contains(&[1.5]) && !i.contains(&[0.5]));
        let d = a.difference(&b).unwrap();
        assert!(d.contains(&[0.5]) && !d.contains(&[1.5]));
        // [0,2] \ [1,3] = [0,1): the point 1 is on the open side
        assert!(!d.contains(&[1.0]));
        assert!(d.closure().contains(&[1.0]));
        assert!(!d.is_closed());
        let c = a.complement().unwrap();
        assert!(c.contains(&[-1.0]) && c.contains(&[2.5]) && !c.contains(&[1.0]));
    }

    #[test]
    fn equality_complement_and_discrete() {
        let n = 2;
        let line = SetSpec::region(n, Region::new().eq(ScalarFn::coord(0, n, 0.0)));
        let off = line.complement().unwrap();
        assert!(off.contains(&[0.1, 5.0]) && !off.contains(&[0.0, 5.0]));
        assert!(off.closure().contains(&[0.0, 5.0]));

        let h1 = SetSpec::region(n, Region::new().discrete(0, &[1.0], &[0.0, 1.0]));
        let h0 = h1.complement().unwrap();
        assert!(h0.contains(&[0.0, 3.0]) && !h0.contains(&[1.0, 3.0]));
        assert!(h0.intersection(&h1).unwrap().is_empty_syntactically());
    }

    #[test]
    fn shell() {
        let s = SetSpec::all(1);
        let b = ScalarFn::coord(0, 1, 0.5).negated(); // 1/2 - x
        let sh = boundary_shell(&s, &b, 0.1).unwrap();
        assert!(sh.contains(&[0.45]) && !sh.contains(&[0.5]) && !sh.contains(&[0.3]));
        assert!(boundary_shell(&s, &b, 0.0).is_err());
    }
}
