//! Ambient Grushin calculus on `ℝⁿ × ℝ`.
//!
//! The frame is `X_i = ∂/∂x_i` for `i < n` and `X_n = |x|^α ∂/∂y` (zero-based).
//! The gauge `ρ = (|x|^{2(α+1)} + (α+1)² y²)^{1/(2(α+1))}` is homogeneous of
//! degree one for the dilations `(x, y) ↦ (λx, λ^{α+1} y)`.
//!
//! Derivatives of the gauge are available twice: as closed forms and through
//! hyper-dual differentiation of [`gauge`]. The two routes are independent
//! and the test suite holds them against each other.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::ad::{hessian_of, sum_sq, DualFn, HyperDual, Scalar};
use crate::error::{Error, Result};

/// Below this scale a point is treated as the pole.
const ORIGIN_EPS: f64 = 1e-300;

/// The pair `(n, α)` fixing the ambient structure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GrushinParams {
    n: usize,
    alpha: f64,
}

impl GrushinParams {
    pub fn new(n: usize, alpha: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Argument("n must be at least 1".into()));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::Argument(format!("alpha must be positive, got {alpha}")));
        }
        Ok(GrushinParams { n, alpha })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `α + 1`, the vertical dilation weight.
    pub fn beta(&self) -> f64 {
        self.alpha + 1.0
    }

    /// `n + α`, the exponent of `r` in the mean-value normalisation.
    pub fn homogeneous_dim(&self) -> f64 {
        self.n as f64 + self.alpha
    }
}

/// A point `ξ = (x, y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AmbientPoint {
    pub x: Vec<f64>,
    pub y: f64,
}

impl AmbientPoint {
    pub fn new(x: Vec<f64>, y: f64) -> Self {
        AmbientPoint { x, y }
    }

    pub fn horizontal_norm(&self) -> f64 {
        self.x.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_origin(&self) -> bool {
        self.x.iter().all(|v| v.abs() < ORIGIN_EPS) && self.y.abs() < ORIGIN_EPS
    }

    fn check_dim(&self, params: &GrushinParams) -> Result<()> {
        if self.x.len() != params.n {
            return Err(Error::Argument(format!(
                "point has {} horizontal coordinates, expected {}",
                self.x.len(),
                params.n
            )));
        }
        Ok(())
    }

    fn require_not_origin(&self, what: &str) -> Result<()> {
        if self.is_origin() {
            return Err(Error::Domain(format!("{what} is undefined at the origin")));
        }
        Ok(())
    }
}

/// The gauge written once for any [`Scalar`].
pub fn gauge<T: Scalar>(params: &GrushinParams, x: &[T], y: T) -> T {
    let b = params.beta();
    let horizontal = sum_sq(x).powf(b);
    (horizontal + y.square() * (b * b)).powf(0.5 / b)
}

pub fn rho(params: &GrushinParams, p: &AmbientPoint) -> f64 {
    let b = params.beta();
    let s2: f64 = p.x.iter().map(|v| v * v).sum();
    (s2.powf(b) + b * b * p.y * p.y).powf(0.5 / b)
}

/// `Γ = ρ^{1-n-α}`, the fundamental solution with pole at the origin (up to
/// normalisation).
pub fn fundamental_solution(params: &GrushinParams, p: &AmbientPoint) -> Result<f64> {
    p.check_dim(params)?;
    p.require_not_origin("the fundamental solution")?;
    Ok(rho(params, p).powf(1.0 - params.homogeneous_dim()))
}

/// Anisotropic dilation `(λx, λ^{α+1} y)`.
pub fn dilate(params: &GrushinParams, p: &AmbientPoint, lambda: f64) -> Result<AmbientPoint> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::Argument(format!("dilation factor must be positive, got {lambda}")));
    }
    Ok(AmbientPoint {
        x: p.x.iter().map(|v| lambda * v).collect(),
        y: lambda.powf(params.beta()) * p.y,
    })
}

/// Value, gradient and Hessian of an ambient function in the Euclidean
/// coordinates `(x₁, …, x_n, y)`. The Hessian is row-major `(n+1)²`.
#[derive(Clone, Debug, PartialEq)]
pub struct AmbientJet {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
}

impl AmbientJet {
    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn hess(&self, i: usize, j: usize) -> f64 {
        self.hess[i * self.dim() + j]
    }
}

/// A `C²` function on the ambient space.
pub trait AmbientField: Send + Sync {
    fn jet(&self, p: &AmbientPoint) -> AmbientJet;
}

/// An ambient field given by a hyper-dual expression in `(x₁, …, x_n, y)`.
#[derive(Clone)]
pub struct AmbientFn {
    n: usize,
    f: DualFn,
}

impl AmbientFn {
    pub fn new(n: usize, f: DualFn) -> Self {
        AmbientFn { n, f }
    }

    /// The gauge, differentiated by hyper-duals.
    pub fn gauge(params: GrushinParams) -> Self {
        let n = params.n();
        AmbientFn::new(n, Arc::new(move |v: &[HyperDual]| gauge(&params, &v[..n], v[n])))
    }

    /// `ρ^{1-n-α}`, differentiated by hyper-duals.
    pub fn fundamental(params: GrushinParams) -> Self {
        let n = params.n();
        let e = 1.0 - params.homogeneous_dim();
        AmbientFn::new(
            n,
            Arc::new(move |v: &[HyperDual]| gauge(&params, &v[..n], v[n]).powf(e)),
        )
    }
}

impl AmbientField for AmbientFn {
    fn jet(&self, p: &AmbientPoint) -> AmbientJet {
        debug_assert_eq!(p.x.len(), self.n);
        let mut z = p.x.clone();
        z.push(p.y);
        let j = hessian_of(&self.f, &z);
        AmbientJet {
            value: j.v,
            grad: j.g.to_vec(),
            hess: j.h.to_vec(),
        }
    }
}

/// The gauge with closed-form derivatives.
#[derive(Clone, Copy, Debug)]
pub struct GaugeField {
    pub params: GrushinParams,
}

impl AmbientField for GaugeField {
    fn jet(&self, p: &AmbientPoint) -> AmbientJet {
        gauge_jet(&self.params, p)
    }
}

/// Euclidean value, gradient and Hessian of `ρ` from the closed forms.
/// Undefined (non-finite) at the origin.
pub fn gauge_jet(params: &GrushinParams, p: &AmbientPoint) -> AmbientJet {
    let n = params.n();
    let a = params.alpha();
    let b = params.beta();
    let s2: f64 = p.x.iter().map(|v| v * v).sum();
    let s = s2.sqrt();
    let y = p.y;
    let r = rho(params, p);
    let big_p = r.powf(2.0 * b);
    let g = r.powf(-(2.0 * a + 1.0));
    let s2a = s.powf(2.0 * a);
    // x_i x_j |x|^{2α-2}, zero on the axis
    let s2a_m2 = if s > 0.0 { s.powf(2.0 * a - 2.0) } else { 0.0 };
    let k = 2.0 * a + 1.0;

    let d = n + 1;
    let mut grad = vec![0.0; d];
    let mut hess = vec![0.0; d * d];
    for i in 0..n {
        grad[i] = p.x[i] * s2a * g;
    }
    grad[n] = b * y * g;
    for i in 0..n {
        for j in 0..n {
            let xx = p.x[i] * p.x[j];
            let delta = if i == j { 1.0 } else { 0.0 };
            hess[i * d + j] =
                g * (s2a * delta + 2.0 * a * xx * s2a_m2 - k * xx * s2a * s2a / big_p);
        }
        let mixed = -k * b * s2a * p.x[i] * y * g / big_p;
        hess[i * d + n] = mixed;
        hess[n * d + i] = mixed;
    }
    hess[n * d + n] = b * g * (1.0 - k * b * y * y / big_p);
    AmbientJet {
        value: r,
        grad,
        hess,
    }
}

/// X-gradient and X-Hessian `(X_i X_j φ)` of an ambient function from its
/// Euclidean jet at `p`. The X-Hessian is not symmetric: `X_i` and `X_n`
/// do not commute off the axis.
pub fn x_frame(params: &GrushinParams, p: &AmbientPoint, jet: &AmbientJet) -> (DVector<f64>, DMatrix<f64>) {
    let n = params.n();
    let a = params.alpha();
    let s = p.horizontal_norm();
    let sa = s.powf(a);
    // α |x|^{α-2} x_i = ∂_i |x|^α
    let dsa: Vec<f64> = p
        .x
        .iter()
        .map(|xi| if s > 0.0 { a * xi * s.powf(a - 2.0) } else { 0.0 })
        .collect();
    let mut xg = DVector::zeros(n + 1);
    let mut xh = DMatrix::zeros(n + 1, n + 1);
    for i in 0..n {
        xg[i] = jet.grad[i];
        for j in 0..n {
            xh[(i, j)] = jet.hess(i, j);
        }
        xh[(i, n)] = dsa[i] * jet.grad[n] + sa * jet.hess(i, n);
        xh[(n, i)] = sa * jet.hess(n, i);
    }
    xg[n] = sa * jet.grad[n];
    xh[(n, n)] = sa * sa * jet.hess(n, n);
    (xg, xh)
}

/// X-gradient of `ρ`. Vanishes identically on the axis `x = 0`.
pub fn x_gradient(params: &GrushinParams, p: &AmbientPoint) -> Result<DVector<f64>> {
    p.check_dim(params)?;
    p.require_not_origin("the gauge gradient")?;
    let jet = gauge_jet(params, p);
    let sa = p.horizontal_norm().powf(params.alpha());
    let mut xg = DVector::from_column_slice(&jet.grad);
    xg[params.n()] *= sa;
    Ok(xg)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaugeDerivatives {
    pub x_gradient: DVector<f64>,
    pub x_hessian: DMatrix<f64>,
    /// `𝓛ρ = (n+α)|Xρ|²/ρ`.
    pub l_rho: f64,
}

impl GaugeDerivatives {
    pub fn x_gradient_norm_sq(&self) -> f64 {
        self.x_gradient.norm_squared()
    }
}

/// Closed-form first and second X-derivatives of the gauge.
///
/// On the axis `x = 0` the entries carrying `x_i |x|^{α-2}` are set to zero.
pub fn gauge_derivatives(params: &GrushinParams, p: &AmbientPoint) -> Result<GaugeDerivatives> {
    p.check_dim(params)?;
    p.require_not_origin("gauge derivatives")?;
    let n = params.n();
    let a = params.alpha();
    let b = params.beta();
    let k = 2.0 * a + 1.0;
    let s = p.horizontal_norm();
    let y = p.y;
    let r = rho(params, p);
    let big_p = r.powf(2.0 * b);
    let g = r.powf(-k);
    let s2a = s.powf(2.0 * a);
    let s3a = s.powf(3.0 * a);
    let xi_sa_m2 = |xi: f64| if s > 0.0 { xi * s.powf(a - 2.0) } else { 0.0 };

    let mut xg = DVector::zeros(n + 1);
    let mut xh = DMatrix::zeros(n + 1, n + 1);
    for i in 0..n {
        let xi = p.x[i];
        xg[i] = xi * s2a * g;
        for j in 0..n {
            let xj = p.x[j];
            let delta = if i == j { 1.0 } else { 0.0 };
            let xx_s2 = if s > 0.0 { xi * xj / (s * s) } else { 0.0 };
            xh[(i, j)] = s2a * g * (delta + 2.0 * a * xx_s2 - k * xi * xj * s2a / big_p);
        }
        xh[(i, n)] = b * y * g * (a * xi_sa_m2(xi) - k * xi * s3a / big_p);
        xh[(n, i)] = -k * b * s3a * xi * y * g / big_p;
    }
    xg[n] = b * y * s.powf(a) * g;
    xh[(n, n)] = b * s2a * g * (1.0 - k * b * y * y / big_p);
    let l_rho = params.homogeneous_dim() * xg.norm_squared() / r;
    Ok(GaugeDerivatives {
        x_gradient: xg,
        x_hessian: xh,
        l_rho,
    })
}

/// Reference X-derivatives of the gauge by nested dual numbers.
pub fn gauge_derivatives_ad(params: &GrushinParams, p: &AmbientPoint) -> Result<GaugeDerivatives> {
    p.check_dim(params)?;
    p.require_not_origin("gauge derivatives")?;
    let jet = AmbientFn::gauge(*params).jet(p);
    let (xg, xh) = x_frame(params, p, &jet);
    let l_rho = (0..=params.n()).map(|i| xh[(i, i)]).sum();
    Ok(GaugeDerivatives {
        x_gradient: xg,
        x_hessian: xh,
        l_rho,
    })
}

/// Closed form of the quadratic form `⟨(X²ρ)w, w⟩` for `w = (w̄, w_{n+1})`.
///
/// With `g = ρ^{-(2α+1)}`, `P = ρ^{2(α+1)}` and `N = ⟨x, w̄⟩`:
///
/// ```text
/// |x|^{2α} g [ |w̄|² + 2α N²/|x|² - (2α+1)|x|^{2α} N²/P ]
///   + (α+1) y g N w_{n+1} [ α|x|^{α-2} - 2(2α+1)|x|^{3α}/P ]
///   + (α+1) |x|^{2α} g w_{n+1}² [ 1 - (2α+1)(α+1) y²/P ]
/// ```
///
/// The cross term is linear in `N`; the non-symmetric X-Hessian contributes
/// both mixed entries.
pub fn hessian_form(params: &GrushinParams, p: &AmbientPoint, w_bar: &[f64], w_last: f64) -> Result<f64> {
    p.check_dim(params)?;
    p.require_not_origin("gauge derivatives")?;
    let a = params.alpha();
    let b = params.beta();
    let k = 2.0 * a + 1.0;
    let s = p.horizontal_norm();
    let y = p.y;
    let r = rho(params, p);
    let big_p = r.powf(2.0 * b);
    let g = r.powf(-k);
    let s2a = s.powf(2.0 * a);
    let nn: f64 = p.x.iter().zip(w_bar).map(|(x, w)| x * w).sum();
    let wb2: f64 = w_bar.iter().map(|w| w * w).sum();
    let (n_sq_s2, cross_sing) = if s > 0.0 {
        (nn * nn / (s * s), a * s.powf(a - 2.0) * nn)
    } else {
        (0.0, 0.0)
    };
    let horizontal = s2a * g * (wb2 + 2.0 * a * n_sq_s2 - k * s2a * nn * nn / big_p);
    let cross = b * y * g * w_last * (cross_sing - 2.0 * k * s.powf(3.0 * a) * nn / big_p);
    let vertical = b * s2a * g * w_last * w_last * (1.0 - k * b * y * y / big_p);
    Ok(horizontal + cross + vertical)
}

/// `𝓛φ = Δ_x φ + |x|^{2α} ∂²_y φ` at `p`.
pub fn grushin_operator(params: &GrushinParams, field: &dyn AmbientField, p: &AmbientPoint) -> f64 {
    let jet = field.jet(p);
    let n = params.n();
    let lap_x: f64 = (0..n).map(|i| jet.hess(i, i)).sum();
    lap_x + p.horizontal_norm().powf(2.0 * params.alpha()) * jet.hess(n, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p2(x1: f64, x2: f64, y: f64) -> AmbientPoint {
        AmbientPoint::new(vec![x1, x2], y)
    }

    fn params() -> GrushinParams {
        GrushinParams::new(2, 1.0).unwrap()
    }

    #[test]
    fn rejects_bad_params() {
        assert!(GrushinParams::new(0, 1.0).is_err());
        assert!(GrushinParams::new(2, 0.0).is_err());
        assert!(GrushinParams::new(2, f64::NAN).is_err());
    }

    #[test]
    fn rho_on_axes() {
        let pr = params();
        assert_relative_eq!(rho(&pr, &p2(0.5, 0.0, 0.0)), 0.5, epsilon = 1e-15);
        assert_relative_eq!(rho(&pr, &p2(0.0, 0.0, 0.5)), 1.0, epsilon = 1e-15);
        assert_eq!(rho(&pr, &p2(0.0, 0.0, 0.0)), 0.0);
    }

    #[test]
    fn x_gradient_examples() {
        let pr = params();
        let d = gauge_derivatives(&pr, &p2(1.0, 0.0, 0.0)).unwrap();
        assert_relative_eq!(d.x_gradient[0], 1.0, epsilon = 1e-15);
        assert_eq!(d.x_gradient[1], 0.0);
        assert_eq!(d.x_gradient[2], 0.0);
        assert_relative_eq!(d.x_gradient_norm_sq(), 1.0, epsilon = 1e-15);

        let d = gauge_derivatives(&pr, &p2(0.0, 0.0, 0.3)).unwrap();
        assert!(d.x_gradient.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn x_gradient_matches_central_differences() {
        let pr = GrushinParams::new(2, 1.5).unwrap();
        let p = p2(0.4, -0.3, 0.2);
        let d = gauge_derivatives(&pr, &p).unwrap();
        let h = 1e-6;
        for i in 0..2 {
            let mut a = p.clone();
            let mut b = p.clone();
            a.x[i] += h;
            b.x[i] -= h;
            let fd = (rho(&pr, &a) - rho(&pr, &b)) / (2.0 * h);
            assert_relative_eq!(d.x_gradient[i], fd, max_relative = 1e-8);
        }
        let mut a = p.clone();
        let mut b = p.clone();
        a.y += h;
        b.y -= h;
        let fd = p.horizontal_norm().powf(1.5) * (rho(&pr, &a) - rho(&pr, &b)) / (2.0 * h);
        assert_relative_eq!(d.x_gradient[2], fd, max_relative = 1e-8);
    }

    #[test]
    fn derivatives_reject_origin() {
        let pr = params();
        assert!(matches!(gauge_derivatives(&pr, &p2(0.0, 0.0, 0.0)), Err(Error::Domain(_))));
        assert!(fundamental_solution(&pr, &p2(0.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn fundamental_solution_values() {
        let pr = params();
        assert_relative_eq!(fundamental_solution(&pr, &p2(1.0, 0.0, 0.0)).unwrap(), 1.0);
        assert_relative_eq!(fundamental_solution(&pr, &p2(2.0, 0.0, 0.0)).unwrap(), 0.25);
        let p = p2(0.3, -0.2, 0.1);
        let lam = 1.7;
        let q = dilate(&pr, &p, lam).unwrap();
        assert_relative_eq!(
            fundamental_solution(&pr, &q).unwrap(),
            lam.powf(-2.0) * fundamental_solution(&pr, &p).unwrap(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn dilation_examples() {
        let pr = params();
        let p = p2(1.0, 0.0, 1.0);
        assert_eq!(dilate(&pr, &p, 1.0).unwrap(), p);
        assert_eq!(dilate(&pr, &p, 2.0).unwrap(), p2(2.0, 0.0, 4.0));
        assert!(dilate(&pr, &p, 0.0).is_err());
        assert!(dilate(&pr, &p, -1.0).is_err());
    }

    #[test]
    fn grushin_operator_of_y_squared() {
        let pr = params();
        let f = AmbientFn::new(2, Arc::new(|v: &[HyperDual]| v[2] * v[2]));
        let p = p2(0.3, 0.4, -1.1);
        assert_relative_eq!(grushin_operator(&pr, &f, &p), 2.0 * 0.25, max_relative = 1e-14);
    }

    #[test]
    fn closed_form_x_hessian_matches_ad() {
        for (alpha, p) in [
            (1.0, p2(0.4, -0.3, 0.2)),
            (2.5, p2(-0.1, 0.6, -0.35)),
            (0.5, p2(0.05, 0.02, 0.9)),
        ] {
            let pr = GrushinParams::new(2, alpha).unwrap();
            let c = gauge_derivatives(&pr, &p).unwrap();
            let d = gauge_derivatives_ad(&pr, &p).unwrap();
            for i in 0..3 {
                assert_relative_eq!(c.x_gradient[i], d.x_gradient[i], max_relative = 1e-12, epsilon = 1e-15);
                for j in 0..3 {
                    assert_relative_eq!(c.x_hessian[(i, j)], d.x_hessian[(i, j)], max_relative = 1e-10, epsilon = 1e-13);
                }
            }
            assert_relative_eq!(c.l_rho, d.l_rho, max_relative = 1e-10);
            // the mixed entries genuinely differ off the axis
            assert!((c.x_hessian[(0, 2)] - c.x_hessian[(2, 0)]).abs() > 1e-6);
        }
    }

    #[test]
    fn hessian_form_matches_ad_quadratic_form() {
        let pr = GrushinParams::new(2, 1.5).unwrap();
        let p = p2(0.3, -0.25, 0.4);
        let w = [0.3, -0.6, 0.742];
        let d = gauge_derivatives_ad(&pr, &p).unwrap();
        let mut q = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                q += w[i] * w[j] * d.x_hessian[(i, j)];
            }
        }
        let c = hessian_form(&pr, &p, &w[..2], w[2]).unwrap();
        assert_relative_eq!(c, q, max_relative = 1e-11);
    }

    #[test]
    fn grushin_operator_of_gauge_and_fundamental_solution() {
        let pr = GrushinParams::new(2, 1.0).unwrap();
        let p = p2(0.5, -0.4, 0.3);
        let l = grushin_operator(&pr, &AmbientFn::gauge(pr), &p);
        let d = gauge_derivatives(&pr, &p).unwrap();
        assert_relative_eq!(l * rho(&pr, &p), 3.0 * d.x_gradient_norm_sq(), max_relative = 1e-12);
        assert!(grushin_operator(&pr, &AmbientFn::fundamental(pr), &p).abs() < 1e-10);
    }

    #[test]
    fn closed_form_jet_matches_ad_jet() {
        let pr = GrushinParams::new(3, 0.7).unwrap();
        let p = AmbientPoint::new(vec![0.2, -0.5, 0.35], -0.4);
        let a = gauge_jet(&pr, &p);
        let b = AmbientFn::gauge(pr).jet(&p);
        assert_relative_eq!(a.value, b.value, max_relative = 1e-14);
        for (u, v) in a.grad.iter().zip(&b.grad) {
            assert_relative_eq!(u, v, max_relative = 1e-12);
        }
        for (u, v) in a.hess.iter().zip(&b.hess) {
            assert_relative_eq!(u, v, max_relative = 1e-10, epsilon = 1e-13);
        }
    }
}
