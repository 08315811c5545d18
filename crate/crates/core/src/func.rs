//! Scalar and vector functions of the state.

use crate::expr::Expr;
use std::fmt;
use std::sync::Arc;

type ScalarImpl = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradImpl = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type VectorImpl = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type MapImpl = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A real-valued function on the state space with an optional analytic gradient.
/// Without one, the gradient is taken by central differences.
#[derive(Clone)]
pub struct ScalarFn {
    label: String,
    f: ScalarImpl,
    grad: Option<GradImpl>,
}

impl ScalarFn {
    pub fn new(label: impl Into<String>, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        ScalarFn {
            label: label.into(),
            f: Arc::new(f),
            grad: None,
        }
    }

    pub fn with_grad(mut self, g: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.grad = Some(Arc::new(g));
        self
    }

    pub fn from_expr(label: impl Into<String>, e: Expr) -> Self {
        let e = Arc::new(e);
        let e2 = e.clone();
        ScalarFn {
            label: label.into(),
            f: Arc::new(move |x| e.eval(x)),
            grad: Some(Arc::new(move |x| e2.eval_grad(x).1)),
        }
    }

    /// Constant function.
    pub fn constant(c: f64) -> Self {
        ScalarFn::new(format!("{c}"), move |_| c).with_grad(|x| vec![0.0; x.len()])
    }

    /// Affine function `a . x + b`.
    pub fn affine(label: impl Into<String>, a: Vec<f64>, b: f64) -> Self {
        let a2 = a.clone();
        ScalarFn::new(label, move |x| a.iter().zip(x).map(|(p, q)| p * q).sum::<f64>() + b)
            .with_grad(move |_| a2.clone())
    }

    /// Coordinate `x[i] - c`.
    pub fn coord(i: usize, n: usize, c: f64) -> Self {
        let mut a = vec![0.0; n];
        a[i] = 1.0;
        ScalarFn::affine(format!("x{i} - {c}"), a, -c)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        match &self.grad {
            Some(g) => g(x),
            None => {
                let mut y = x.to_vec();
                (0..x.len())
                    .map(|i| {
                        let h = 1e-6 * (1.0 + x[i].abs());
                        y[i] = x[i] + h;
                        let a = self.eval(&y);
                        y[i] = x[i] - h;
                        let b = self.eval(&y);
                        y[i] = x[i];
                        (a - b) / (2.0 * h)
                    })
                    .collect()
            }
        }
    }

    pub fn has_analytic_grad(&self) -> bool {
        self.grad.is_some()
    }

    /// `self - c`.
    pub fn shifted(&self, c: f64) -> ScalarFn {
        let f = self.clone();
        let g = self.clone();
        ScalarFn::new(format!("{} - {c}", self.label), move |x| f.eval(x) - c).with_grad(move |x| g.grad(x))
    }

    /// `-self`.
    pub fn negated(&self) -> ScalarFn {
        let f = self.clone();
        let g = self.clone();
        ScalarFn::new(format!("-({})", self.label), move |x| -f.eval(x))
            .with_grad(move |x| g.grad(x).into_iter().map(|d| -d).collect())
    }
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarFn({})", self.label)
    }
}

/// A vector-valued map R^n -> R^n, one selection of a set-valued map.
#[derive(Clone)]
pub struct VectorFn {
    label: String,
    f: VectorImpl,
}

impl VectorFn {
    pub fn new(label: impl Into<String>, f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        VectorFn {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    pub fn from_exprs(label: impl Into<String>, es: Vec<Expr>) -> Self {
        VectorFn::new(label, move |x| es.iter().map(|e| e.eval(x)).collect())
    }

    pub fn identity() -> Self {
        VectorFn::new("id", |x| x.to_vec())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        (self.f)(x)
    }
}

impl fmt::Debug for VectorFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VectorFn({})", self.label)
    }
}

/// A scalar map R -> R (comparison dynamics f_c, f_d).
#[derive(Clone)]
pub struct ScalarMap {
    label: String,
    f: MapImpl,
}

impl ScalarMap {
    pub fn new(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        ScalarMap {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    pub fn from_expr(label: impl Into<String>, e: Expr) -> Self {
        ScalarMap::new(label, move |y| e.eval(&[y]))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, y: f64) -> f64 {
        (self.f)(y)
    }
}

impl fmt::Debug for ScalarMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarMap({})", self.label)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_difference_fallback() {
        let f = ScalarFn::new("q", |x| x[0] * x[0] + 3.0 * x[1]);
        let g = f.grad(&[2.0, -1.0]);
        assert!((g[0] - 4.0).abs() < 1e-6 && (g[1] - 3.0).abs() < 1e-6);
        assert!(!f.has_analytic_grad());
        let s = f.shifted(1.0).negated();
        assert_eq!(s.eval(&[2.0, -1.0]), 0.0);
    }
}
