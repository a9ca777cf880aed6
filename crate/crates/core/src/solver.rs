//! Dirichlet problems for `L_Σ` on a patch of a two-dimensional graph.
//!
//! In graph coordinates `v L_Σ F = div(A∇F)` with `A = vI - ∇u∇uᵀ/v`.
//! The lattice is vertex-centred with the origin as a vertex; fluxes use
//! face-midpoint coefficients, mixed terms use diagonal differences over the
//! four cells around a node, and curved boundaries enter through shortened
//! arms ending at the exact boundary crossing.

use std::sync::Arc;

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ad::Jet2;
use crate::cubature::bracket_root;
use crate::error::{Error, Result};
use crate::field::SurfaceField;
use crate::surface::GraphSurface;
use crate::tangential::{surface_laplacian, LaplacianMethod};

pub type BoundaryFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum SolveDomain {
    Disk { radius: f64 },
    Annulus { inner: f64, outer: f64 },
    Box { lo: [f64; 2], hi: [f64; 2] },
}

impl SolveDomain {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            SolveDomain::Disk { radius } => radius > 0.0 && radius.is_finite(),
            SolveDomain::Annulus { inner, outer } => inner > 0.0 && inner < outer && outer.is_finite(),
            SolveDomain::Box { lo, hi } => {
                lo[0] < 0.0 && lo[1] < 0.0 && hi[0] > 0.0 && hi[1] > 0.0 && hi.iter().all(|h| h.is_finite())
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Argument(format!("invalid solve domain {self:?}")))
        }
    }

    /// Negative inside.
    pub fn level(&self, x: &[f64]) -> f64 {
        let s = x[0].hypot(x[1]);
        match *self {
            SolveDomain::Disk { radius } => s - radius,
            SolveDomain::Annulus { inner, outer } => (s - outer).max(inner - s),
            SolveDomain::Box { lo, hi } => (lo[0] - x[0]).max(x[0] - hi[0]).max(lo[1] - x[1]).max(x[1] - hi[1]),
        }
    }

    pub fn bounds(&self) -> ([f64; 2], [f64; 2]) {
        match *self {
            SolveDomain::Disk { radius: r } | SolveDomain::Annulus { outer: r, .. } => ([-r, -r], [r, r]),
            SolveDomain::Box { lo, hi } => (lo, hi),
        }
    }
}

/// Nodes `(i·h, j·h)` for `i ∈ [lo[0], lo[0]+nx)`, `j ∈ [lo[1], lo[1]+ny)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Lattice {
    pub h: f64,
    pub lo: [i64; 2],
    pub nx: usize,
    pub ny: usize,
}

impl Lattice {
    fn covering(lo: [f64; 2], hi: [f64; 2], h: f64) -> Self {
        // one node of margin beyond the domain so every arm ends on the lattice
        let i0 = [(lo[0] / h).floor() as i64 - 1, (lo[1] / h).floor() as i64 - 1];
        let i1 = [(hi[0] / h).ceil() as i64 + 1, (hi[1] / h).ceil() as i64 + 1];
        Lattice {
            h,
            lo: i0,
            nx: (i1[0] - i0[0] + 1) as usize,
            ny: (i1[1] - i0[1] + 1) as usize,
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn coord(&self, i: usize, j: usize) -> [f64; 2] {
        [(self.lo[0] + i as i64) as f64 * self.h, (self.lo[1] + j as i64) as f64 * self.h]
    }

    /// Lattice indices of the node at `x`, if `x` is (up to rounding) a node.
    pub fn node_at(&self, x: &[f64]) -> Option<(usize, usize)> {
        let fi = x[0] / self.h - self.lo[0] as f64;
        let fj = x[1] / self.h - self.lo[1] as f64;
        let (i, j) = (fi.round(), fj.round());
        let ok = (fi - i).abs() < 1e-9 && (fj - j).abs() < 1e-9 && i >= 0.0 && j >= 0.0;
        (ok && (i as usize) < self.nx && (j as usize) < self.ny).then(|| (i as usize, j as usize))
    }
}

#[derive(Clone)]
pub struct SolveProblem {
    surface: GraphSurface,
    domain: SolveDomain,
    h: f64,
    boundary: BoundaryFn,
}

impl std::fmt::Debug for SolveProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SolveProblem")
            .field("surface", &self.surface)
            .field("domain", &self.domain)
            .field("h", &self.h)
            .finish_non_exhaustive()
    }
}

impl SolveProblem {
    pub fn new(surface: GraphSurface, domain: SolveDomain, h: f64, boundary: BoundaryFn) -> Result<Self> {
        if surface.n() != 2 {
            return Err(Error::Argument(format!("the solver needs n = 2, got n = {}", surface.n())));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Argument(format!("grid spacing must be positive, got {h}")));
        }
        domain.validate()?;
        let (lo, hi) = domain.bounds();
        let (dlo, dhi) = surface.domain().bounds(2);
        // the coefficient is sampled up to one cell beyond the domain
        for k in 0..2 {
            if lo[k] - h < dlo[k] || hi[k] + h > dhi[k] {
                return Err(Error::Region(format!(
                    "solve domain {domain:?} plus one cell exceeds the surface domain"
                )));
            }
        }
        if let SolveDomain::Disk { radius } | SolveDomain::Annulus { outer: radius, .. } = domain {
            if radius + h > surface.domain().inradius() && !surface.domain().contains(&[radius + h, 0.0]) {
                return Err(Error::Region(format!("disk of radius {radius} exceeds the surface domain")));
            }
        }
        Ok(SolveProblem { surface, domain, h, boundary })
    }

    pub fn surface(&self) -> &GraphSurface {
        &self.surface
    }

    pub fn domain(&self) -> &SolveDomain {
        &self.domain
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn lattice(&self) -> Lattice {
        let (lo, hi) = self.domain.bounds();
        Lattice::covering(lo, hi, self.h)
    }

    pub fn boundary_value(&self, x: &[f64]) -> f64 {
        (self.boundary)(x)
    }
}

/// `A(x) = vI - ∇u∇uᵀ/v` as `[A₁₁, A₁₂, A₂₂]`.
pub fn coefficient(surface: &GraphSurface, x: &[f64]) -> [f64; 3] {
    let pt = surface.point_at(x);
    let (g0, g1, v) = (pt.grad[0], pt.grad[1], pt.v);
    [v - g0 * g0 / v, -g0 * g1 / v, v - g1 * g1 / v]
}

/// The assembled system `K F = b` over interior nodes, rows scaled by `h²`.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    pub lattice: Lattice,
    /// Unknown number of each lattice node, `None` outside the domain.
    pub unknown: Vec<Option<usize>>,
    /// Lattice node of each unknown.
    pub nodes: Vec<usize>,
    /// Rows sorted by unknown, each with entries sorted by column.
    pub rows: Vec<Vec<(usize, f64)>>,
    pub rhs: Vec<f64>,
    /// Rows whose arms are all full length.
    pub regular: Vec<bool>,
}

impl LinearSystem {
    pub fn unknowns(&self) -> usize {
        self.nodes.len()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        let r = &self.rows[row];
        r.binary_search_by_key(&col, |e| e.0).map(|k| r[k].1).unwrap_or(0.0)
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .par_iter()
            .map(|r| r.iter().map(|&(c, a)| a * x[c]).sum())
            .collect()
    }

    /// Largest `|K_pq - K_qp|` over pairs of regular rows.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for (p, row) in self.rows.iter().enumerate() {
            if !self.regular[p] {
                continue;
            }
            for &(q, a) in row {
                if self.regular[q] {
                    worst = worst.max((a - self.entry(q, p)).abs());
                }
            }
        }
        worst
    }
}

const DIRS: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

struct Arm {
    theta: f64,
    /// Neighbour node when the arm is full length and the neighbour is inside.
    node: Option<usize>,
    boundary: f64,
}

pub fn assemble(problem: &SolveProblem) -> Result<LinearSystem> {
    let lat = problem.lattice();
    let h = lat.h;
    let dom = &problem.domain;
    let inside: Vec<bool> = (0..lat.len())
        .map(|k| dom.level(&lat.coord(k % lat.nx, k / lat.nx)) < 0.0)
        .collect();
    let mut unknown = vec![None; lat.len()];
    let mut nodes = Vec::new();
    for k in 0..lat.len() {
        if inside[k] {
            unknown[k] = Some(nodes.len());
            nodes.push(k);
        }
    }
    if nodes.is_empty() {
        return Err(Error::Argument("the lattice has no interior nodes".into()));
    }
    let surface = &problem.surface;
    let flat = surface.is_flat();

    let rows: Vec<(Vec<(usize, f64)>, f64, bool)> = nodes
        .par_iter()
        .map(|&k| {
            let (i, j) = (k % lat.nx, k / lat.nx);
            let p = lat.coord(i, j);
            let arm = |di: i64, dj: i64| -> Arm {
                let (qi, qj) = ((i as i64 + di) as usize, (j as i64 + dj) as usize);
                let q = lat.index(qi, qj);
                if inside[q] {
                    return Arm { theta: 1.0, node: Some(q), boundary: 0.0 };
                }
                let at = |t: f64| [p[0] + t * h * di as f64, p[1] + t * h * dj as f64];
                let lp = dom.level(&p);
                let lq = dom.level(&at(1.0));
                let t = if lq == 0.0 {
                    1.0
                } else {
                    bracket_root(&mut |t| dom.level(&at(t)), 0.0, lp, 1.0, lq)
                };
                let theta = t.max(1e-6);
                Arm { theta, node: None, boundary: problem.boundary_value(&at(theta)) }
            };
            let mut entries: Vec<(usize, f64)> = Vec::with_capacity(9);
            let mut rhs = 0.0;
            let mut diag = 0.0;
            let mut regular = true;
            for axis in 0..2 {
                let (d_plus, d_minus) = (DIRS[2 * axis], DIRS[2 * axis + 1]);
                let plus = arm(d_plus.0, d_plus.1);
                let minus = arm(d_minus.0, d_minus.1);
                regular &= plus.node.is_some() && minus.node.is_some();
                let half = 0.5 * (plus.theta + minus.theta);
                for (a, d) in [(&plus, d_plus), (&minus, d_minus)] {
                    let mid = [p[0] + 0.5 * a.theta * h * d.0 as f64, p[1] + 0.5 * a.theta * h * d.1 as f64];
                    let c = coefficient(surface, &mid)[2 * axis];
                    let w = c / (a.theta * half);
                    diag -= w;
                    match a.node {
                        Some(q) => entries.push((unknown[q].expect("inside"), w)),
                        None => rhs -= w * a.boundary,
                    }
                }
            }
            if !flat {
                for (sx, sy) in [(1i64, 1i64), (-1, -1), (-1, 1), (1, -1)] {
                    let centre = [p[0] + 0.5 * h * sx as f64, p[1] + 0.5 * h * sy as f64];
                    let w = (sx * sy) as f64 * 0.5 * coefficient(surface, &centre)[1];
                    if w == 0.0 {
                        continue;
                    }
                    diag -= w;
                    let q = lat.index((i as i64 + sx) as usize, (j as i64 + sy) as usize);
                    match unknown[q] {
                        Some(u) => entries.push((u, w)),
                        None => {
                            regular = false;
                            rhs -= w * problem.boundary_value(&lat.coord(
                                (i as i64 + sx) as usize,
                                (j as i64 + sy) as usize,
                            ));
                        }
                    }
                }
            }
            entries.push((unknown[k].expect("inside"), diag));
            entries.sort_by_key(|e| e.0);
            (entries, rhs, regular)
        })
        .collect();

    let mut sys = LinearSystem {
        lattice: lat,
        unknown,
        nodes,
        rows: Vec::with_capacity(rows.len()),
        rhs: Vec::with_capacity(rows.len()),
        regular: Vec::with_capacity(rows.len()),
    };
    for (r, b, reg) in rows {
        sys.rows.push(r);
        sys.rhs.push(b);
        sys.regular.push(reg);
    }
    Ok(sys)
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveDiagnostics {
    pub unknowns: usize,
    pub nnz: usize,
    /// `‖b - KF‖₂`.
    pub residual: f64,
    pub rhs_norm: f64,
    pub refinement_steps: usize,
}

#[derive(Clone, Debug)]
pub struct SolveSolution {
    pub lattice: Lattice,
    /// `F` at every lattice node; nodes outside the domain hold `g`.
    pub values: Vec<f64>,
    pub inside: Vec<bool>,
    pub diagnostics: SolveDiagnostics,
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn solve_dirichlet(problem: &SolveProblem) -> Result<SolveSolution> {
    let sys = assemble(problem)?;
    let m = sys.unknowns();
    let triplets: Vec<Triplet<usize, usize, f64>> = sys
        .rows
        .iter()
        .enumerate()
        .flat_map(|(r, row)| row.iter().map(move |&(c, a)| Triplet::new(r, c, a)))
        .collect();
    let mat = SparseColMat::<usize, f64>::try_new_from_triplets(m, m, &triplets)
        .map_err(|e| Error::Solver { message: format!("matrix assembly failed: {e:?}"), residual: f64::NAN })?;
    let lu = mat
        .sp_lu()
        .map_err(|e| Error::Solver { message: format!("sparse LU failed: {e:?}"), residual: f64::NAN })?;
    let solve = |b: &[f64]| -> Vec<f64> {
        let rhs = faer::col::Col::from_fn(m, |i| b[i]);
        let x = lu.solve(&rhs);
        (0..m).map(|i| x[i]).collect()
    };

    let rhs_norm = norm(&sys.rhs);
    let target = 1e-10 * rhs_norm.max(f64::MIN_POSITIVE);
    let mut x = solve(&sys.rhs);
    let residual_of = |x: &[f64]| {
        let kx = sys.apply(x);
        sys.rhs.iter().zip(&kx).map(|(b, k)| b - k).collect::<Vec<f64>>()
    };
    let mut r = residual_of(&x);
    let mut steps = 0;
    while norm(&r) > target && steps < 3 {
        let dx = solve(&r);
        x.iter_mut().zip(&dx).for_each(|(a, d)| *a += d);
        r = residual_of(&x);
        steps += 1;
    }
    let residual = norm(&r);
    if !(residual <= target) {
        return Err(Error::Solver {
            message: format!("residual {residual:e} above 1e-10·‖b‖ = {target:e}"),
            residual,
        });
    }

    let lat = sys.lattice;
    let mut values: Vec<f64> = (0..lat.len())
        .map(|k| problem.boundary_value(&lat.coord(k % lat.nx, k / lat.nx)))
        .collect();
    let mut inside = vec![false; lat.len()];
    for (u, &k) in sys.nodes.iter().enumerate() {
        values[k] = x[u];
        inside[k] = true;
    }
    Ok(SolveSolution {
        lattice: lat,
        values,
        inside,
        diagnostics: SolveDiagnostics {
            unknowns: m,
            nnz: sys.nnz(),
            residual,
            rhs_norm,
            refinement_steps: steps,
        },
    })
}

impl SolveSolution {
    pub fn h(&self) -> f64 {
        self.lattice.h
    }

    /// `F` at a lattice node given by coordinates.
    pub fn node_value(&self, x: &[f64]) -> Option<f64> {
        self.lattice.node_at(x).map(|(i, j)| self.values[self.lattice.index(i, j)])
    }

    /// Interior nodes as `(x₁, x₂, F)`.
    pub fn interior(&self) -> impl Iterator<Item = ([f64; 2], f64)> + '_ {
        (0..self.lattice.len())
            .filter(|&k| self.inside[k])
            .map(|k| (self.lattice.coord(k % self.lattice.nx, k / self.lattice.nx), self.values[k]))
    }

    /// `max |F - exact|` over interior nodes.
    pub fn max_error(&self, exact: &dyn Fn(&[f64]) -> f64) -> f64 {
        self.interior().map(|(x, f)| (f - exact(&x)).abs()).fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x1,x2,F\n");
        for (x, f) in self.interior() {
            out.push_str(&format!("{},{},{}\n", x[0], x[1], f));
        }
        out
    }

    pub fn interpolant(&self) -> LatticeInterpolant {
        LatticeInterpolant::new(self.lattice, self.values.clone())
    }
}

/// Bicubic Hermite interpolant of lattice values, with nodal derivatives
/// from fourth-order central differences.
#[derive(Clone, Debug)]
pub struct LatticeInterpolant {
    lattice: Lattice,
    f: Vec<f64>,
    fx: Vec<f64>,
    fy: Vec<f64>,
    fxy: Vec<f64>,
}

fn derivative_along(values: &[f64], n: usize, stride: usize, at: usize, h: f64) -> f64 {
    let v = |k: usize| values[k * stride];
    if at >= 2 && at + 2 < n {
        (-v(at + 2) + 8.0 * v(at + 1) - 8.0 * v(at - 1) + v(at - 2)) / (12.0 * h)
    } else if at >= 1 && at + 1 < n {
        (v(at + 1) - v(at - 1)) / (2.0 * h)
    } else if at == 0 {
        (v(1) - v(0)) / h
    } else {
        (v(at) - v(at - 1)) / h
    }
}

fn basis(t: f64, order: usize) -> [f64; 4] {
    let t2 = t * t;
    match order {
        0 => [2.0 * t2 * t - 3.0 * t2 + 1.0, -2.0 * t2 * t + 3.0 * t2, t2 * t - 2.0 * t2 + t, t2 * t - t2],
        1 => [6.0 * t2 - 6.0 * t, -6.0 * t2 + 6.0 * t, 3.0 * t2 - 4.0 * t + 1.0, 3.0 * t2 - 2.0 * t],
        _ => [12.0 * t - 6.0, -12.0 * t + 6.0, 6.0 * t - 4.0, 6.0 * t - 2.0],
    }
}

impl LatticeInterpolant {
    pub fn new(lattice: Lattice, f: Vec<f64>) -> Self {
        let (nx, ny, h) = (lattice.nx, lattice.ny, lattice.h);
        let along_x = |vals: &[f64]| -> Vec<f64> {
            (0..nx * ny)
                .map(|k| {
                    let (i, j) = (k % nx, k / nx);
                    derivative_along(&vals[j * nx..], nx, 1, i, h)
                })
                .collect()
        };
        let fx = along_x(&f);
        let fy: Vec<f64> = (0..nx * ny)
            .map(|k| {
                let (i, j) = (k % nx, k / nx);
                derivative_along(&f[i..], ny, nx, j, h)
            })
            .collect();
        let fxy = along_x(&fy);
        LatticeInterpolant { lattice, f, fx, fy, fxy }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }
}

impl SurfaceField for LatticeInterpolant {
    fn dim(&self) -> usize {
        2
    }

    fn jet(&self, x: &[f64]) -> Jet2 {
        let lat = &self.lattice;
        let h = lat.h;
        let locate = |xk: f64, lo: i64, n: usize| -> (usize, f64) {
            let s = xk / h - lo as f64;
            let c = (s.floor().max(0.0) as usize).min(n - 2);
            (c, s - c as f64)
        };
        let (ci, t) = locate(x[0], lat.lo[0], lat.nx);
        let (cj, u) = locate(x[1], lat.lo[1], lat.ny);
        let mut coef = [[0.0; 4]; 4];
        for a in 0..2 {
            for b in 0..2 {
                let k = lat.index(ci + a, cj + b);
                coef[a][b] = self.f[k];
                coef[a + 2][b] = h * self.fx[k];
                coef[a][b + 2] = h * self.fy[k];
                coef[a + 2][b + 2] = h * h * self.fxy[k];
            }
        }
        let eval = |dt: usize, du: usize| -> f64 {
            let (bt, bu) = (basis(t, dt), basis(u, du));
            let mut s = 0.0;
            for p in 0..4 {
                for q in 0..4 {
                    s += coef[p][q] * bt[p] * bu[q];
                }
            }
            s / h.powi((dt + du) as i32)
        };
        let (hxy, hxx, hyy) = (eval(1, 1), eval(2, 0), eval(0, 2));
        Jet2::from_parts(eval(0, 0), &[eval(1, 0), eval(0, 1)], &[hxx, hxy, hxy, hyy])
    }
}

/// `max |L_Σ F|` of the bicubic interpolant over `points`.
pub fn residual_check(surface: &GraphSurface, solution: &SolveSolution, points: &[[f64; 2]]) -> Result<f64> {
    let interp = solution.interpolant();
    let vals: Result<Vec<f64>> = points
        .par_iter()
        .map(|x| surface_laplacian(surface, &interp, x, LaplacianMethod::Divergence).map(f64::abs))
        .collect();
    Ok(vals?.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::GrushinParams;
    use crate::surface::{make_surface, Domain, SurfaceSpec};
    use approx::assert_relative_eq;

    fn flat() -> GraphSurface {
        make_surface(GrushinParams::new(2, 1.0).unwrap(), &SurfaceSpec::Flat, Domain::ball(1.5)).unwrap()
    }

    fn annulus(h: f64) -> SolveProblem {
        let g: BoundaryFn = Arc::new(|x: &[f64]| if x[0].hypot(x[1]) > 0.6 { 1.0 } else { 2.0 });
        SolveProblem::new(flat(), SolveDomain::Annulus { inner: 0.2, outer: 1.0 }, h, g).unwrap()
    }

    fn exact(x: &[f64]) -> f64 {
        0.75 + 0.25 / x[0].hypot(x[1])
    }

    #[test]
    fn coefficient_eigenstructure() {
        let p = GrushinParams::new(2, 1.0).unwrap();
        let s = make_surface(p, &SurfaceSpec::RadialPower { c: 0.7, m: 3.0 }, Domain::ball(1.0)).unwrap();
        // on the x₁-axis ∇u ∥ e₁, so A = diag(a²/v, v)
        let x = [0.4, 0.0];
        let pt = s.point(&x).unwrap();
        let a = coefficient(&s, &x);
        assert_relative_eq!(a[0], pt.a * pt.a / pt.v, max_relative = 1e-13);
        assert_eq!(a[1], 0.0);
        assert_relative_eq!(a[2], pt.v, max_relative = 1e-13);
        // off-axis: trace v + a²/v, determinant a²
        let x = [0.3, -0.2];
        let pt = s.point(&x).unwrap();
        let a = coefficient(&s, &x);
        assert_relative_eq!(a[0] + a[2], pt.v + pt.a * pt.a / pt.v, max_relative = 1e-13);
        assert_relative_eq!(a[0] * a[2] - a[1] * a[1], pt.a * pt.a, max_relative = 1e-12);
    }

    #[test]
    fn flat_scheme_is_weighted_five_point() {
        let sys = assemble(&annulus(1.0 / 16.0)).unwrap();
        assert!(sys.rows.iter().all(|r| r.len() <= 5));
        assert!(sys.asymmetry() < 1e-12);
        // M-matrix sign pattern
        for (p, row) in sys.rows.iter().enumerate() {
            for &(q, a) in row {
                if p == q {
                    assert!(a < 0.0);
                } else {
                    assert!(a > 0.0);
                }
            }
        }
    }

    #[test]
    fn constants_are_reproduced() {
        let p = GrushinParams::new(2, 1.0).unwrap();
        let s = make_surface(p, &SurfaceSpec::Monomial { terms: vec![crate::field::Term { coeff: 0.5, powers: vec![1, 1] }] }, Domain::ball(1.5)).unwrap();
        let g: BoundaryFn = Arc::new(|_: &[f64]| 3.0);
        let prob = SolveProblem::new(s, SolveDomain::Disk { radius: 1.0 }, 1.0 / 16.0, g).unwrap();
        let sys = assemble(&prob).unwrap();
        let ones = vec![3.0; sys.unknowns()];
        let k1 = sys.apply(&ones);
        for (a, b) in k1.iter().zip(&sys.rhs) {
            assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()));
        }
        let sol = solve_dirichlet(&prob).unwrap();
        assert!(sol.max_error(&|_| 3.0) < 1e-12);
        assert!(sys.asymmetry() < 1e-12);
    }

    #[test]
    fn annulus_converges_at_second_order() {
        let errs: Vec<f64> = [16.0, 32.0, 64.0]
            .iter()
            .map(|k| solve_dirichlet(&annulus(1.0 / k)).unwrap().max_error(&exact))
            .collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order > 1.5 && order < 2.5, "errors {errs:?}");
        }
        let sol = solve_dirichlet(&annulus(1.0 / 64.0)).unwrap();
        assert!((sol.node_value(&[0.5, 0.0]).unwrap() - 1.25).abs() < 5e-3);
        assert!(sol.interior().all(|(_, f)| f >= 1.0 - 1e-12 && f <= 2.0 + 1e-12));
    }

    #[test]
    fn interpolant_is_exact_on_cubics() {
        let lat = Lattice::covering([-1.0, -1.0], [1.0, 1.0], 0.125);
        let f = |x: [f64; 2]| x[0] * x[0] * x[1] - 0.5 * x[1] * x[1] * x[1] + x[0];
        let vals = (0..lat.len()).map(|k| f(lat.coord(k % lat.nx, k / lat.nx))).collect();
        let it = LatticeInterpolant::new(lat, vals);
        let x = [0.31, -0.47];
        let j = it.jet(&x);
        assert_relative_eq!(j.v, f(x), max_relative = 1e-12);
        assert_relative_eq!(j.g[0], 2.0 * x[0] * x[1] + 1.0, max_relative = 1e-11);
        assert_relative_eq!(j.hess(0, 1), 2.0 * x[0], max_relative = 1e-10);
        assert_relative_eq!(j.hess(1, 1), -3.0 * x[1], max_relative = 1e-10);
    }

    #[test]
    fn residual_decreases_under_refinement() {
        let pts: Vec<[f64; 2]> = (0..12)
            .map(|k| {
                let t = k as f64 * 0.5236 + 0.1;
                let s = 0.45 + 0.03 * k as f64;
                [s * t.cos(), s * t.sin()]
            })
            .collect();
        let r1 = residual_check(&flat(), &solve_dirichlet(&annulus(1.0 / 32.0)).unwrap(), &pts).unwrap();
        let r2 = residual_check(&flat(), &solve_dirichlet(&annulus(1.0 / 64.0)).unwrap(), &pts).unwrap();
        assert!(r2 < r1 / 2.5, "{r1} -> {r2}");
    }

    #[test]
    fn problem_validation() {
        let g: BoundaryFn = Arc::new(|_: &[f64]| 0.0);
        assert!(SolveProblem::new(flat(), SolveDomain::Disk { radius: 1.6 }, 0.1, g.clone()).is_err());
        assert!(SolveProblem::new(flat(), SolveDomain::Disk { radius: 1.0 }, 0.0, g.clone()).is_err());
        assert!(SolveProblem::new(flat(), SolveDomain::Annulus { inner: 0.5, outer: 0.4 }, 0.1, g).is_err());
    }
}
