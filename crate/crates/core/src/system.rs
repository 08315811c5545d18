use crate::error::{check_dim, Error, Result};
use crate::func::VectorFn;
use crate::set::SetSpec;

/// A set-valued map given by finitely many single-valued selections.
#[derive(Debug, Clone)]
pub struct SetValuedMap {
    selections: Vec<VectorFn>,
}

impl SetValuedMap {
    pub fn new(selections: Vec<VectorFn>) -> Result<Self> {
        if selections.is_empty() {
            return Err(Error::Invalid("set-valued map needs at least one selection".into()));
        }
        Ok(SetValuedMap { selections })
    }

    pub fn single(f: VectorFn) -> Self {
        SetValuedMap { selections: vec![f] }
    }

    pub fn selections(&self) -> &[VectorFn] {
        &self.selections
    }

    /// Values of all selections at `x`, duplicates removed, in selection order.
    pub fn sample(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(self.selections.len());
        for s in &self.selections {
            let v = s.eval(x);
            if !out.contains(&v) {
                out.push(v);
            }
        }
        out
    }
}

/// Hybrid inclusion `H = (C, F, D, G)` on R^n.
#[derive(Debug, Clone)]
pub struct HybridSystem {
    pub name: String,
    pub coords: Vec<String>,
    pub c: SetSpec,
    pub f: SetValuedMap,
    pub d: SetSpec,
    pub g: SetValuedMap,
    /// Finite value set for coordinates that only take discrete values.
    pub discrete: Vec<Option<Vec<f64>>>,
}

impl HybridSystem {
    /// Builds a system, requiring `C` to be syntactically closed.
    pub fn new(
        name: impl Into<String>,
        coords: &[&str],
        c: SetSpec,
        f: SetValuedMap,
        d: SetSpec,
        g: SetValuedMap,
    ) -> Result<Self> {
        if !c.is_closed() {
            return Err(Error::Invalid("flow set must be closed".into()));
        }
        Self::new_unchecked_closure(name, coords, c, f, d, g)
    }

    /// Same as [`HybridSystem::new`] without the closedness requirement
    /// (auxiliary systems have open flow sets).
    pub fn new_unchecked_closure(
        name: impl Into<String>,
        coords: &[&str],
        c: SetSpec,
        f: SetValuedMap,
        d: SetSpec,
        g: SetValuedMap,
    ) -> Result<Self> {
        let n = coords.len();
        check_dim(n, c.dim())?;
        check_dim(n, d.dim())?;
        Ok(HybridSystem {
            name: name.into(),
            coords: coords.iter().map(|s| s.to_string()).collect(),
            c,
            f,
            d,
            g,
            discrete: vec![None; n],
        })
    }

    pub fn with_discrete(mut self, coord: usize, values: &[f64]) -> Self {
        self.discrete[coord] = Some(values.to_vec());
        self
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn in_c(&self, x: &[f64]) -> bool {
        self.c.contains(x)
    }

    pub fn in_d(&self, x: &[f64]) -> bool {
        self.d.contains(x)
    }

    /// `C u D`.
    pub fn c_union_d(&self) -> SetSpec {
        self.c.union(&self.d).expect("same dimension").labeled("C u D")
    }

    pub fn flow_values(&self, x: &[f64]) -> Vec<Vec<f64>> {
        self.f.sample(x)
    }

    pub fn jump_values(&self, x: &[f64]) -> Vec<Vec<f64>> {
        self.g.sample(x)
    }
}
