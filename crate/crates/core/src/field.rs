//! Scalar fields on a graph surface, written in the graph coordinates `x`.
//!
//! A field is extended to the ambient space constant in `y`; tangential
//! derivatives do not depend on the extension, so value, gradient and
//! Hessian in `x` are all the calculus needs.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::ad::{hessian_of, DualFn, Jet2, Scalar};
use crate::error::{Error, Result};

pub trait SurfaceField: Send + Sync {
    /// Number of graph coordinates.
    fn dim(&self) -> usize;

    /// Value, gradient and Hessian at `x`.
    fn jet(&self, x: &[f64]) -> Jet2;

    fn value(&self, x: &[f64]) -> f64 {
        self.jet(x).v
    }
}

impl<T: SurfaceField + ?Sized> SurfaceField for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn jet(&self, x: &[f64]) -> Jet2 {
        (**self).jet(x)
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constant {
    pub n: usize,
    pub c: f64,
}

impl SurfaceField for Constant {
    fn dim(&self) -> usize {
        self.n
    }
    fn jet(&self, _x: &[f64]) -> Jet2 {
        Jet2::constant(self.c, self.n)
    }
    fn value(&self, _x: &[f64]) -> f64 {
        self.c
    }
}

/// `coeff · Π x_k^{powers[k]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: f64,
    pub powers: Vec<u32>,
}

impl Term {
    pub fn degree(&self) -> u32 {
        self.powers.iter().sum()
    }

    /// The derivative `∂^order` of the term at `x`.
    fn derivative(&self, x: &[f64], order: &[usize]) -> f64 {
        let mut e: SmallVec<[i32; 4]> = self.powers.iter().map(|&p| p as i32).collect();
        let mut factor = self.coeff;
        for &k in order {
            if e[k] == 0 {
                return 0.0;
            }
            factor *= e[k] as f64;
            e[k] -= 1;
        }
        factor * x.iter().zip(&e).map(|(xi, &ek)| xi.powi(ek)).product::<f64>()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    n: usize,
    terms: Vec<Term>,
}

impl Polynomial {
    pub fn new(n: usize, terms: Vec<Term>) -> Result<Self> {
        for t in &terms {
            if t.powers.len() != n {
                return Err(Error::Spec(format!(
                    "term {:?} has {} exponents, expected {n}",
                    t.powers,
                    t.powers.len()
                )));
            }
            if !t.coeff.is_finite() {
                return Err(Error::Spec(format!("non-finite coefficient in term {:?}", t.powers)));
            }
        }
        Ok(Polynomial { n, terms })
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn constant_term(&self) -> f64 {
        self.terms.iter().filter(|t| t.degree() == 0).map(|t| t.coeff).sum()
    }

    /// `Some(d)` when every term with a nonzero coefficient has degree `d`.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut it = self.terms.iter().filter(|t| t.coeff != 0.0).map(Term::degree);
        let d = it.next()?;
        it.all(|e| e == d).then_some(d)
    }
}

impl SurfaceField for Polynomial {
    fn dim(&self) -> usize {
        self.n
    }

    fn jet(&self, x: &[f64]) -> Jet2 {
        let n = self.n;
        let mut j = Jet2::constant(0.0, n);
        for t in &self.terms {
            j.v += t.derivative(x, &[]);
            for i in 0..n {
                j.g[i] += t.derivative(x, &[i]);
                for k in i..n {
                    let d = t.derivative(x, &[i, k]);
                    j.h[i * n + k] += d;
                    if k != i {
                        j.h[k * n + i] += d;
                    }
                }
            }
        }
        j
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.derivative(x, &[])).sum()
    }
}

/// Smooth compactly supported bump `amp · exp(1 - 1/(1 - |x-c|²/R²))`,
/// with maximum `amp` at the centre.
#[derive(Clone, Debug, PartialEq)]
pub struct Bump {
    pub center: Vec<f64>,
    pub radius: f64,
    pub amp: f64,
}

impl SurfaceField for Bump {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn jet(&self, x: &[f64]) -> Jet2 {
        let n = self.dim();
        let r2 = self.radius * self.radius;
        let t0: f64 = x.iter().zip(&self.center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>() / r2;
        if t0 >= 1.0 {
            return Jet2::constant(0.0, n);
        }
        let mut t = Jet2::constant(0.0, n);
        for i in 0..n {
            let d = Jet2::variable(x[i] - self.center[i], i, n);
            t = t + d.square();
        }
        let t = t / r2;
        let w = t.lift(1.0) - t;
        (w.recip() * -1.0 + 1.0).exp() * self.amp
    }
}

/// A field given by a hyper-dual expression in the graph coordinates.
#[derive(Clone)]
pub struct DualField {
    n: usize,
    f: DualFn,
}

impl DualField {
    pub fn new(n: usize, f: DualFn) -> Self {
        DualField { n, f }
    }
}

impl SurfaceField for DualField {
    fn dim(&self) -> usize {
        self.n
    }

    fn jet(&self, x: &[f64]) -> Jet2 {
        hessian_of(&self.f, x)
    }
}

/// A radial profile `φ` with its first two derivatives.
pub trait Profile: Send + Sync {
    /// `(φ(r), φ'(r), φ''(r))`.
    fn eval(&self, r: f64) -> (f64, f64, f64);
}

/// `coeff · r^k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerProfile {
    pub coeff: f64,
    pub k: f64,
}

impl Profile for PowerProfile {
    fn eval(&self, r: f64) -> (f64, f64, f64) {
        let (c, k) = (self.coeff, self.k);
        if k == 0.0 {
            return (c, 0.0, 0.0);
        }
        (
            c * r.powf(k),
            c * k * r.powf(k - 1.0),
            c * k * (k - 1.0) * r.powf(k - 2.0),
        )
    }
}
