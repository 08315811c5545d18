//! Text forms of sets, functions and maps over named coordinates.
//!
//! Sets are unions (`|`) of conjunctions (`&`) of comparisons between
//! expressions: `x1 >= 0 & x2 <= 0 | x1 == 0`. A comparison `h == c` or
//! `h in {a, b}` on a discrete coordinate becomes a discrete constraint.
//! `all` and `empty` are the whole space and the empty set.

use crate::error::{Error, Result};
use crate::expr::{Expr, Scope};
use crate::func::{ScalarFn, ScalarMap, VectorFn};
use crate::set::{Region, SetSpec};

#[derive(Debug, Clone)]
pub struct Dsl {
    pub scope: Scope,
    pub discrete: Vec<Option<Vec<f64>>>,
}

fn err(src: &str, msg: impl Into<String>) -> Error {
    Error::Parse {
        pos: 0,
        msg: format!("{} in '{src}'", msg.into()),
    }
}

impl Dsl {
    pub fn new(coords: &[&str]) -> Self {
        Dsl {
            scope: Scope::new(coords),
            discrete: vec![None; coords.len()],
        }
    }

    pub fn param(mut self, name: &str, value: f64) -> Self {
        self.scope = self.scope.with_param(name, value);
        self
    }

    pub fn with_discrete(mut self, coord: usize, values: &[f64]) -> Self {
        self.discrete[coord] = Some(values.to_vec());
        self
    }

    pub fn dim(&self) -> usize {
        self.scope.coords.len()
    }

    pub fn expr(&self, src: &str) -> Result<Expr> {
        Expr::parse(src, &self.scope)
    }

    pub fn scalar(&self, src: &str) -> Result<ScalarFn> {
        Ok(ScalarFn::from_expr(src.trim(), self.expr(src)?))
    }

    pub fn vector(&self, srcs: &[&str]) -> Result<VectorFn> {
        if srcs.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: srcs.len(),
            });
        }
        let es = srcs.iter().map(|s| self.expr(s)).collect::<Result<Vec<_>>>()?;
        Ok(VectorFn::from_exprs(format!("({})", srcs.join(", ")), es))
    }

    /// A map of one variable, written in `y` or `z`.
    pub fn map(&self, src: &str) -> Result<ScalarMap> {
        let mut last = None;
        for var in ["y", "z"] {
            let mut scope = Scope::new(&[var]);
            scope.params = self.scope.params.clone();
            match Expr::parse(src, &scope) {
                Ok(e) => return Ok(ScalarMap::from_expr(src.trim(), e)),
                Err(e) => last = Some(e),
            }
        }
        Err(last.unwrap())
    }

    fn constant(&self, src: &str) -> Option<f64> {
        let mut scope = Scope::new(&[]);
        scope.params = self.scope.params.clone();
        Expr::parse(src, &scope).ok().map(|e| e.eval(&[]))
    }

    fn discrete_coord(&self, src: &str) -> Option<usize> {
        let i = self.scope.coords.iter().position(|c| c == src.trim())?;
        self.discrete[i].as_ref().map(|_| i)
    }

    fn atom(&self, region: Region, src: &str) -> Result<Region> {
        if let Some((lhs, rhs)) = src.split_once(" in ") {
            let i = self
                .discrete_coord(lhs)
                .ok_or_else(|| err(src, "'in' needs a discrete coordinate"))?;
            let body = rhs.trim().trim_start_matches('{').trim_end_matches('}');
            let vals = body
                .split(',')
                .map(|v| self.constant(v).ok_or_else(|| err(src, "expected constants")))
                .collect::<Result<Vec<f64>>>()?;
            return Ok(region.discrete(i, &vals, self.discrete[i].as_ref().unwrap()));
        }
        let ops = ["<=", ">=", "==", "<", ">"];
        let (pos, op) = ops
            .iter()
            .filter_map(|op| src.find(op).map(|p| (p, *op)))
            .min_by_key(|(p, op)| (*p, std::cmp::Reverse(op.len())))
            .ok_or_else(|| err(src, "expected a comparison"))?;
        let (lhs, rhs) = (&src[..pos], &src[pos + op.len()..]);
        if op == "==" {
            if let (Some(i), Some(c)) = (self.discrete_coord(lhs), self.constant(rhs)) {
                return Ok(region.discrete(i, &[c], self.discrete[i].as_ref().unwrap()));
            }
        }
        let g = Expr::Bin(
            crate::expr::Op::Sub,
            Box::new(self.expr(lhs)?),
            Box::new(self.expr(rhs)?),
        );
        let f = ScalarFn::from_expr(format!("{} - ({})", lhs.trim(), rhs.trim()), g);
        Ok(match op {
            "<=" => region.le(f),
            ">=" => region.ge(f),
            "<" => region.lt(f),
            ">" => region.gt(f),
            _ => region.eq(f),
        })
    }

    pub fn set(&self, src: &str) -> Result<SetSpec> {
        let n = self.dim();
        let s = src.trim();
        if s == "all" {
            return Ok(SetSpec::all(n).labeled(s));
        }
        if s == "empty" {
            return Ok(SetSpec::empty(n).labeled(s));
        }
        let mut out = SetSpec::empty(n);
        for conj in s.split('|') {
            let mut r = Region::new();
            for atom in conj.split('&') {
                r = self.atom(r, atom)?;
            }
            out = out.union(&SetSpec::region(n, r))?;
        }
        Ok(out.labeled(s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sets_and_discrete() {
        let d = Dsl::new(&["h", "z"]).with_discrete(0, &[0.0, 1.0]).param("zmax", 1.0);
        let c = d.set("h == 0 & z >= 0.5 | h == 1 & z <= zmax").unwrap();
        assert!(c.contains(&[0.0, 0.7]));
        assert!(!c.contains(&[0.0, 0.2]));
        assert!(c.contains(&[1.0, 0.2]));
        assert!(!c.contains(&[1.0, 1.2]));
        let q = d.set("h in {0} & z >= 0.5").unwrap();
        assert!(q.contains(&[0.0, 3.0]) && !q.contains(&[1.0, 3.0]));
        assert!(d.set("all").unwrap().contains(&[1.0, -9.0]));
        assert!(d.set("z >> 1").is_err());
    }

    #[test]
    fn strict_and_maps() {
        let d = Dsl::new(&["x"]);
        let s = d.set("x < 1 & x > -1").unwrap();
        assert!(s.contains(&[0.0]) && !s.contains(&[1.0]));
        assert_eq!(d.map("z/2").unwrap().eval(3.0), 1.5);
        assert_eq!(d.map("-y").unwrap().eval(3.0), -3.0);
    }
}
