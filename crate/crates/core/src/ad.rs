//! Forward-mode automatic differentiation.
//!
//! Three number types share the [`Scalar`] trait so that expressions such as
//! the gauge function can be written once and evaluated in any of them:
//!
//! - [`Dual<T>`]: a single-direction dual number, nestable. `Dual<Dual<f64>>`
//!   ([`HyperDual`]) yields exact mixed second derivatives and is the
//!   reference oracle for every closed-form derivative in the crate.
//! - [`Jet1`]: value plus full gradient in `n` variables.
//! - [`Jet2`]: value, gradient and Hessian in `n` variables.

use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use smallvec::{smallvec, SmallVec};

/// Arithmetic shared by `f64` and the AD number types.
pub trait Scalar:
    Clone
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    /// A constant with the same shape (dimension) as `self`.
    fn lift(&self, c: f64) -> Self;
    /// The real part.
    fn re(&self) -> f64;
    fn sqrt(self) -> Self;
    fn powf(self, p: f64) -> Self;
    fn ln(self) -> Self;
    fn exp(self) -> Self;

    fn recip(self) -> Self {
        self.lift(1.0) / self
    }

    fn square(self) -> Self {
        self.clone() * self
    }
}

impl Scalar for f64 {
    fn lift(&self, c: f64) -> Self {
        c
    }
    fn re(&self) -> f64 {
        *self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
}

// ---------------------------------------------------------------------------
// Dual<T>

/// Dual number `re + eps·ε` with `ε² = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T> {
    pub re: T,
    pub eps: T,
}

/// Second-order nested dual number.
pub type HyperDual = Dual<Dual<f64>>;

impl<T: Scalar> Dual<T> {
    pub fn new(re: T, eps: T) -> Self {
        Dual { re, eps }
    }

    fn chain(self, f: T, df: T) -> Self {
        Dual {
            re: f,
            eps: df * self.eps,
        }
    }
}

impl HyperDual {
    /// A variable with value `x`, seeded with `d1` in the inner direction and
    /// `d2` in the outer direction.
    pub fn variable(x: f64, d1: f64, d2: f64) -> Self {
        Dual {
            re: Dual { re: x, eps: d1 },
            eps: Dual { re: d2, eps: 0.0 },
        }
    }

    pub fn constant(x: f64) -> Self {
        Self::variable(x, 0.0, 0.0)
    }

    /// `∂²/∂d1∂d2` of the computed expression.
    pub fn mixed(&self) -> f64 {
        self.eps.eps
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Dual::new(self.re + o.re, self.eps + o.eps)
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Dual::new(self.re - o.re, self.eps - o.eps)
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let eps = self.re.clone() * o.eps + self.eps * o.re.clone();
        Dual::new(self.re * o.re, eps)
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let inv = o.re.clone().recip();
        let re = self.re.clone() * inv.clone();
        let eps = (self.eps - re.clone() * o.eps) * inv;
        Dual::new(re, eps)
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual::new(-self.re, -self.eps)
    }
}

impl<T: Scalar> Add<f64> for Dual<T> {
    type Output = Self;
    fn add(self, c: f64) -> Self {
        Dual::new(self.re + c, self.eps)
    }
}

impl<T: Scalar> Sub<f64> for Dual<T> {
    type Output = Self;
    fn sub(self, c: f64) -> Self {
        Dual::new(self.re - c, self.eps)
    }
}

impl<T: Scalar> Mul<f64> for Dual<T> {
    type Output = Self;
    fn mul(self, c: f64) -> Self {
        Dual::new(self.re * c, self.eps * c)
    }
}

impl<T: Scalar> Div<f64> for Dual<T> {
    type Output = Self;
    fn div(self, c: f64) -> Self {
        Dual::new(self.re / c, self.eps / c)
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    fn lift(&self, c: f64) -> Self {
        Dual::new(self.re.lift(c), self.re.lift(0.0))
    }
    fn re(&self) -> f64 {
        self.re.re()
    }
    fn sqrt(self) -> Self {
        let s = self.re.clone().sqrt();
        let ds = (s.clone() * 2.0).recip();
        self.chain(s, ds)
    }
    fn powf(self, p: f64) -> Self {
        let f = self.re.clone().powf(p);
        let df = self.re.clone().powf(p - 1.0) * p;
        self.chain(f, df)
    }
    fn ln(self) -> Self {
        let f = self.re.clone().ln();
        let df = self.re.clone().recip();
        self.chain(f, df)
    }
    fn exp(self) -> Self {
        let f = self.re.clone().exp();
        self.chain(f.clone(), f)
    }
}

/// A user-supplied scalar function of `d` variables evaluated on hyper-duals.
pub type DualFn = Arc<dyn Fn(&[HyperDual]) -> HyperDual + Send + Sync>;

/// Value, gradient and Hessian of `f` at `x` using `d(d+1)/2` hyper-dual
/// evaluations.
pub fn hessian_of(f: &DualFn, x: &[f64]) -> Jet2 {
    let d = x.len();
    let mut out = Jet2::constant(0.0, d);
    let mut args: Vec<HyperDual> = Vec::with_capacity(d);
    if d == 0 {
        out.v = f(&[]).re.re;
        return out;
    }
    for i in 0..d {
        for j in i..d {
            args.clear();
            args.extend(x.iter().enumerate().map(|(k, &xk)| {
                HyperDual::variable(xk, (k == i) as u8 as f64, (k == j) as u8 as f64)
            }));
            let r = f(&args);
            out.v = r.re.re;
            out.g[i] = r.re.eps;
            out.g[j] = r.eps.re;
            out.h[i * d + j] = r.eps.eps;
            out.h[j * d + i] = r.eps.eps;
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Jet1

pub type Grad = SmallVec<[f64; 4]>;

/// First-order jet in `n` variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet1 {
    pub v: f64,
    pub g: Grad,
}

impl Jet1 {
    pub fn constant(v: f64, n: usize) -> Self {
        Jet1 {
            v,
            g: smallvec![0.0; n],
        }
    }

    /// The `i`-th coordinate function with value `v`.
    pub fn variable(v: f64, i: usize, n: usize) -> Self {
        let mut j = Self::constant(v, n);
        j.g[i] = 1.0;
        j
    }

    pub fn from_parts(v: f64, g: &[f64]) -> Self {
        Jet1 {
            v,
            g: SmallVec::from_slice(g),
        }
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    fn chain(mut self, f: f64, df: f64) -> Self {
        self.v = f;
        for d in self.g.iter_mut() {
            *d *= df;
        }
        self
    }

    fn zip(mut self, o: &Jet1, a: f64, b: f64) -> Self {
        debug_assert_eq!(self.g.len(), o.g.len());
        for (d, od) in self.g.iter_mut().zip(o.g.iter()) {
            *d = a * *d + b * od;
        }
        self
    }
}

impl Add for Jet1 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let v = self.v + o.v;
        let mut r = self.zip(&o, 1.0, 1.0);
        r.v = v;
        r
    }
}

impl Sub for Jet1 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let v = self.v - o.v;
        let mut r = self.zip(&o, 1.0, -1.0);
        r.v = v;
        r
    }
}

impl Mul for Jet1 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (a, b) = (self.v, o.v);
        let mut r = self.zip(&o, b, a);
        r.v = a * b;
        r
    }
}

impl Div for Jet1 {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let q = self.v / o.v;
        let inv = 1.0 / o.v;
        let mut r = self.zip(&o, inv, -q * inv);
        r.v = q;
        r
    }
}

impl Neg for Jet1 {
    type Output = Self;
    fn neg(self) -> Self {
        self * -1.0
    }
}

impl Add<f64> for Jet1 {
    type Output = Self;
    fn add(mut self, c: f64) -> Self {
        self.v += c;
        self
    }
}

impl Sub<f64> for Jet1 {
    type Output = Self;
    fn sub(mut self, c: f64) -> Self {
        self.v -= c;
        self
    }
}

impl Mul<f64> for Jet1 {
    type Output = Self;
    fn mul(mut self, c: f64) -> Self {
        self.v *= c;
        for d in self.g.iter_mut() {
            *d *= c;
        }
        self
    }
}

impl Div<f64> for Jet1 {
    type Output = Self;
    fn div(self, c: f64) -> Self {
        self * (1.0 / c)
    }
}

impl Scalar for Jet1 {
    fn lift(&self, c: f64) -> Self {
        Jet1::constant(c, self.dim())
    }
    fn re(&self) -> f64 {
        self.v
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s)
    }
    fn powf(self, p: f64) -> Self {
        let f = self.v.powf(p);
        let df = p * self.v.powf(p - 1.0);
        self.chain(f, df)
    }
    fn ln(self) -> Self {
        let f = self.v.ln();
        let df = 1.0 / self.v;
        self.chain(f, df)
    }
    fn exp(self) -> Self {
        let f = self.v.exp();
        self.chain(f, f)
    }
}

// ---------------------------------------------------------------------------
// Jet2

pub type Hess = SmallVec<[f64; 16]>;

/// Second-order jet in `n` variables. The Hessian is stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    pub g: Grad,
    pub h: Hess,
}

impl Jet2 {
    pub fn constant(v: f64, n: usize) -> Self {
        Jet2 {
            v,
            g: smallvec![0.0; n],
            h: smallvec![0.0; n * n],
        }
    }

    pub fn variable(v: f64, i: usize, n: usize) -> Self {
        let mut j = Self::constant(v, n);
        j.g[i] = 1.0;
        j
    }

    pub fn from_parts(v: f64, g: &[f64], h: &[f64]) -> Self {
        debug_assert_eq!(g.len() * g.len(), h.len());
        Jet2 {
            v,
            g: SmallVec::from_slice(g),
            h: SmallVec::from_slice(h),
        }
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    pub fn hess(&self, i: usize, j: usize) -> f64 {
        self.h[i * self.dim() + j]
    }

    /// Drops the Hessian.
    pub fn to_jet1(&self) -> Jet1 {
        Jet1 {
            v: self.v,
            g: self.g.clone(),
        }
    }

    /// The `i`-th partial derivative as a first-order jet.
    pub fn partial(&self, i: usize) -> Jet1 {
        let n = self.dim();
        Jet1::from_parts(self.g[i], &self.h[i * n..(i + 1) * n])
    }

    fn chain(mut self, f: f64, df: f64, d2f: f64) -> Self {
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                self.h[i * n + j] = df * self.h[i * n + j] + d2f * self.g[i] * self.g[j];
            }
        }
        for d in self.g.iter_mut() {
            *d *= df;
        }
        self.v = f;
        self
    }

    fn lin(mut self, o: &Jet2, a: f64, b: f64) -> Self {
        for (d, od) in self.g.iter_mut().zip(o.g.iter()) {
            *d = a * *d + b * od;
        }
        for (d, od) in self.h.iter_mut().zip(o.h.iter()) {
            *d = a * *d + b * od;
        }
        self.v = a * self.v + b * o.v;
        self
    }
}

impl Add for Jet2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        self.lin(&o, 1.0, 1.0)
    }
}

impl Sub for Jet2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self.lin(&o, 1.0, -1.0)
    }
}

impl Mul for Jet2 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let n = self.dim();
        let (a, b) = (self.v, o.v);
        let mut h: Hess = smallvec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                h[i * n + j] = a * o.h[i * n + j]
                    + b * self.h[i * n + j]
                    + self.g[i] * o.g[j]
                    + o.g[i] * self.g[j];
            }
        }
        let g = self
            .g
            .iter()
            .zip(o.g.iter())
            .map(|(da, db)| a * db + b * da)
            .collect();
        Jet2 { v: a * b, g, h }
    }
}

impl Div for Jet2 {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl Neg for Jet2 {
    type Output = Self;
    fn neg(self) -> Self {
        self * -1.0
    }
}

impl Add<f64> for Jet2 {
    type Output = Self;
    fn add(mut self, c: f64) -> Self {
        self.v += c;
        self
    }
}

impl Sub<f64> for Jet2 {
    type Output = Self;
    fn sub(mut self, c: f64) -> Self {
        self.v -= c;
        self
    }
}

impl Mul<f64> for Jet2 {
    type Output = Self;
    fn mul(mut self, c: f64) -> Self {
        self.v *= c;
        self.g.iter_mut().for_each(|d| *d *= c);
        self.h.iter_mut().for_each(|d| *d *= c);
        self
    }
}

impl Div<f64> for Jet2 {
    type Output = Self;
    fn div(self, c: f64) -> Self {
        self * (1.0 / c)
    }
}

impl Scalar for Jet2 {
    fn lift(&self, c: f64) -> Self {
        Jet2::constant(c, self.dim())
    }
    fn re(&self) -> f64 {
        self.v
    }
    fn recip(self) -> Self {
        let inv = 1.0 / self.v;
        self.chain(inv, -inv * inv, 2.0 * inv * inv * inv)
    }
    fn sqrt(self) -> Self {
        let x = self.v;
        let s = x.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * x))
    }
    fn powf(self, p: f64) -> Self {
        let x = self.v;
        let f = x.powf(p);
        let df = p * x.powf(p - 1.0);
        let d2f = p * (p - 1.0) * x.powf(p - 2.0);
        self.chain(f, df, d2f)
    }
    fn ln(self) -> Self {
        let x = self.v;
        self.chain(x.ln(), 1.0 / x, -1.0 / (x * x))
    }
    fn exp(self) -> Self {
        let f = self.v.exp();
        self.chain(f, f, f)
    }
}

/// Sum of squares of the entries, generic over [`Scalar`].
pub fn sum_sq<T: Scalar>(xs: &[T]) -> T {
    let mut it = xs.iter();
    let first = it.next().expect("sum_sq of an empty slice");
    it.fold(first.clone().square(), |acc, x| acc + x.clone().square())
}
