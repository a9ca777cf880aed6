//! Adaptive tensor-product cubature on boxes with level-set clipping.
//!
//! Each cell carries an embedded Gauss 7 / Kronrod 15 pair in every
//! direction. The integrand is restricted to `{level(x) < 0}`: along one axis
//! per cell (the one most transverse to the boundary) every quadrature line is clipped at the roots of the level function,
//! so cells cut by a smooth boundary keep the full order of the rule instead
//! of seeing a jump. Cells are refined by bisection in all directions,
//! largest error first. Cells touching the origin are refined a few extra
//! levels up front because integrands may carry `|x|^α` cusps there.
//!
//! Results are reproducible bit-for-bit: children are evaluated in parallel
//! but collected in creation order, and the final value is a pairwise sum
//! over cells sorted by id.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Signed level function: negative inside.
pub type LevelFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

// Gauss-Kronrod 15 abscissae on [-1, 1] (non-negative half, descending) and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss 7 weights at XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// The 15 nodes on [-1, 1] in ascending order, with Kronrod and Gauss weights
/// (Gauss weight zero at Kronrod-only nodes).
struct Rule {
    nodes: [f64; 15],
    wk: [f64; 15],
    wg: [f64; 15],
}

const fn build_rule() -> Rule {
    let mut nodes = [0.0; 15];
    let mut wk = [0.0; 15];
    let mut wg = [0.0; 15];
    let mut i = 0;
    while i < 7 {
        nodes[i] = -XGK[i];
        nodes[14 - i] = XGK[i];
        wk[i] = WGK[i];
        wk[14 - i] = WGK[i];
        if i % 2 == 1 {
            wg[i] = WG[i / 2];
            wg[14 - i] = WG[i / 2];
        }
        i += 1;
    }
    nodes[7] = 0.0;
    wk[7] = WGK[7];
    wg[7] = WG[3];
    Rule { nodes, wk, wg }
}

const RULE: Rule = build_rule();

/// Integration region: an axis-aligned bounding box intersected with any
/// number of sublevel sets `{f < 0}`.
#[derive(Clone)]
pub struct Region {
    lo: Vec<f64>,
    hi: Vec<f64>,
    constraints: Vec<LevelFn>,
}

impl std::fmt::Debug for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Region")
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .field("constraints", &self.constraints.len())
            .finish()
    }
}

impl Region {
    pub fn cube(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::Argument("box corners must have equal, nonzero length".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(Error::Argument(format!("degenerate box {lo:?} .. {hi:?}")));
        }
        Ok(Region {
            lo,
            hi,
            constraints: Vec::new(),
        })
    }

    /// Euclidean ball `{|x - c| < r}`.
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Argument(format!("ball radius must be positive, got {radius}")));
        }
        let lo = center.iter().map(|c| c - radius).collect();
        let hi = center.iter().map(|c| c + radius).collect();
        let c = center.clone();
        Ok(Region::cube(lo, hi)?.with_constraint(Arc::new(move |x: &[f64]| {
            x.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() - radius
        })))
    }

    /// Annulus `{inner ≤ |x| < outer}` around the origin.
    pub fn annulus(dim: usize, inner: f64, outer: f64) -> Result<Self> {
        if !(inner >= 0.0 && inner < outer) {
            return Err(Error::Argument(format!("bad annulus radii {inner}, {outer}")));
        }
        Ok(Region::ball(vec![0.0; dim], outer)?.with_constraint(Arc::new(move |x: &[f64]| {
            inner - x.iter().map(|v| v * v).sum::<f64>().sqrt()
        })))
    }

    pub fn with_constraint(mut self, f: LevelFn) -> Self {
        self.constraints.push(f);
        self
    }

    /// Shrinks the bounding box to its intersection with `[lo, hi]`.
    pub fn clip_box(mut self, lo: &[f64], hi: &[f64]) -> Result<Self> {
        for k in 0..self.dim() {
            self.lo[k] = self.lo[k].max(lo[k]);
            self.hi[k] = self.hi[k].min(hi[k]);
            if !(self.lo[k] < self.hi[k]) {
                return Err(Error::Argument("empty box intersection".into()));
            }
        }
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn bounds(&self) -> (&[f64], &[f64]) {
        (&self.lo, &self.hi)
    }

    pub fn level(&self, x: &[f64]) -> f64 {
        self.constraints
            .iter()
            .map(|f| f(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (a, b))| *a <= *v && *v <= *b)
            && self.level(x) < 0.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CubatureOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_cells: usize,
    /// Extra dyadic refinement levels around the origin.
    pub origin_levels: u32,
    /// Cells refined per sweep.
    pub batch: usize,
}

impl Default for CubatureOptions {
    fn default() -> Self {
        CubatureOptions {
            abs_tol: 1e-10,
            rel_tol: 0.0,
            max_cells: 200_000,
            origin_levels: 3,
            batch: 16,
        }
    }
}

impl CubatureOptions {
    pub fn with_abs_tol(tol: f64) -> Self {
        CubatureOptions {
            abs_tol: tol,
            ..Default::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub cells: usize,
    /// False when the cell budget ran out before the tolerance was met.
    pub converged: bool,
}

#[derive(Clone, Debug)]
struct Cell {
    lo: Vec<f64>,
    hi: Vec<f64>,
    value: f64,
    error: f64,
}

#[derive(PartialEq)]
struct Ranked {
    error: f64,
    id: usize,
}

impl Eq for Ranked {}

impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.id.cmp(&self.id))
    }
}

/// Sum with O(log n) error growth and a fixed association order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

fn rule_on(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = 0.0;
    let mut g = 0.0;
    for i in 0..15 {
        let v = f(c + h * RULE.nodes[i]);
        k += RULE.wk[i] * v;
        g += RULE.wg[i] * v;
    }
    (k * h, g * h)
}

/// Root of `f` on `[a, b]` given `f(a) < 0 <= f(b)` or the reverse.
pub(crate) fn bracket_root(f: &mut dyn FnMut(f64) -> f64, mut a: f64, mut fa: f64, mut b: f64, mut fb: f64) -> f64 {
    // Illinois variant of regula falsi, falling back to bisection.
    let tol = 1e-15 * (b - a).abs().max(a.abs().max(b.abs()) * 1e-3);
    let mut side = 0i8;
    for it in 0..100 {
        if (b - a).abs() <= tol {
            break;
        }
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !c.is_finite() || c <= a.min(b) || c >= a.max(b) || it % 8 == 7 {
            c = 0.5 * (a + b);
        }
        let fc = f(c);
        if fc == 0.0 {
            return c;
        }
        if (fc < 0.0) == (fb < 0.0) {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    0.5 * (a + b)
}

/// Kronrod and Gauss estimates of the integral of `f` over the part of the
/// segment `pt[axis] ∈ [a, b]` inside the region.
fn line_integral(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    region: &Region,
    pt: &mut [f64],
    axis: usize,
    a: f64,
    b: f64,
) -> (f64, f64) {
    if region.constraints.is_empty() {
        return rule_on(
            &mut |t| {
                pt[axis] = t;
                f(pt)
            },
            a,
            b,
        );
    }

    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut ts = [0.0; 17];
    ts[0] = a;
    for i in 0..15 {
        ts[i + 1] = c + h * RULE.nodes[i];
    }
    ts[16] = b;
    let mut lv = [0.0; 17];
    let level = |t: f64, pt: &mut [f64]| {
        pt[axis] = t;
        region.level(pt)
    };
    for i in 0..17 {
        lv[i] = level(ts[i], pt);
    }
    if lv.iter().all(|l| *l < 0.0) {
        return rule_on(
            &mut |t| {
                pt[axis] = t;
                f(pt)
            },
            a,
            b,
        );
    }
    if lv.iter().all(|l| *l >= 0.0) {
        return (0.0, 0.0);
    }

    let mut k = 0.0;
    let mut g = 0.0;
    let mut add = |pt: &mut [f64], lo: f64, hi: f64| {
        if hi > lo {
            let (dk, dg) = rule_on(
                &mut |t| {
                    pt[axis] = t;
                    f(pt)
                },
                lo,
                hi,
            );
            k += dk;
            g += dg;
        }
    };
    let mut start = if lv[0] < 0.0 { Some(a) } else { None };
    for i in 0..16 {
        let inside_l = lv[i] < 0.0;
        let inside_r = lv[i + 1] < 0.0;
        if inside_l == inside_r {
            continue;
        }
        let root = {
            let mut lf = |t: f64| level(t, pt);
            bracket_root(&mut lf, ts[i], lv[i], ts[i + 1], lv[i + 1])
        };
        if inside_l {
            if let Some(s) = start.take() {
                add(pt, s, root);
            }
        } else {
            start = Some(root);
        }
    }
    if let Some(s) = start {
        add(pt, s, b);
    }
    (k, g)
}

/// The axis along which the region boundary is crossed most steeply near
/// the cell centre; lines along it see the boundary as a graph of slope at
/// most `√(d-1)` over the remaining axes.
fn clip_axis(region: &Region, lo: &[f64], hi: &[f64]) -> usize {
    let d = lo.len();
    if region.constraints.is_empty() || d == 1 {
        return d - 1;
    }
    let mut c: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
    let mut best = (d - 1, -1.0);
    for k in 0..d {
        let h = 1e-3 * (hi[k] - lo[k]);
        let x0 = c[k];
        c[k] = x0 + h;
        let fp = region.level(&c);
        c[k] = x0 - h;
        let fm = region.level(&c);
        c[k] = x0;
        let slope = ((fp - fm) / (2.0 * h) * (hi[k] - lo[k])).abs();
        if slope.is_finite() && slope > best.1 {
            best = (k, slope);
        }
    }
    best.0
}

/// Points in `(a, b)` where the region boundary crosses the segment
/// `pt[axis] ∈ [a, b]`, in ascending order.
fn boundary_crossings(region: &Region, pt: &mut [f64], axis: usize, a: f64, b: f64, out: &mut Vec<f64>) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut prev = (a, {
        pt[axis] = a;
        region.level(pt)
    });
    for i in 0..=15 {
        let t = if i < 15 { c + h * RULE.nodes[i] } else { b };
        pt[axis] = t;
        let l = region.level(pt);
        if (l < 0.0) != (prev.1 < 0.0) {
            let mut lf = |t: f64| {
                pt[axis] = t;
                region.level(pt)
            };
            out.push(bracket_root(&mut lf, prev.0, prev.1, t, l));
        }
        prev = (t, l);
    }
}

fn evaluate_cell(f: &(dyn Fn(&[f64]) -> f64 + Sync), region: &Region, lo: &[f64], hi: &[f64]) -> (f64, f64) {
    let d = lo.len();
    let axis = clip_axis(region, lo, hi);
    let mut pt = vec![0.0; d];
    if d == 1 {
        let (k, g) = line_integral(f, region, &mut pt, axis, lo[0], hi[0]);
        return (k, (k - g).abs());
    }
    if d == 2 {
        // The clipped line integral is only piecewise smooth in the outer
        // variable: it has kinks where the boundary leaves through the faces
        // pt[axis] = lo or hi. Integrate each smooth piece separately.
        let o = 1 - axis;
        let mut breaks = vec![lo[o]];
        if !region.constraints.is_empty() {
            for face in [lo[axis], hi[axis]] {
                pt[axis] = face;
                boundary_crossings(region, &mut pt, o, lo[o], hi[o], &mut breaks);
            }
        }
        breaks.push(hi[o]);
        breaks.sort_by(f64::total_cmp);
        let mut total_k = 0.0;
        let mut total_g = 0.0;
        for w in breaks.windows(2) {
            if w[1] <= w[0] {
                continue;
            }
            let (k, g) = rule_on(
                &mut |t| {
                    pt[o] = t;
                    line_integral(f, region, &mut pt, axis, lo[axis], hi[axis]).0
                },
                w[0],
                w[1],
            );
            total_k += k;
            total_g += g;
        }
        return (total_k, (total_k - total_g).abs());
    }

    let outer: Vec<usize> = (0..d).filter(|k| *k != axis).collect();
    let mut idx = vec![0usize; outer.len()];
    let mut total_k = 0.0;
    let mut total_g = 0.0;
    let scale: f64 = outer.iter().map(|&k| 0.5 * (hi[k] - lo[k])).product();
    loop {
        let mut wk = 1.0;
        let mut wg = 1.0;
        for (m, &k) in outer.iter().enumerate() {
            let c = 0.5 * (lo[k] + hi[k]);
            let h = 0.5 * (hi[k] - lo[k]);
            pt[k] = c + h * RULE.nodes[idx[m]];
            wk *= RULE.wk[idx[m]];
            wg *= RULE.wg[idx[m]];
        }
        let (lk, lg) = line_integral(f, region, &mut pt, axis, lo[axis], hi[axis]);
        total_k += wk * lk;
        total_g += wg * lg;

        // odometer over the outer multi-index
        let mut m = 0;
        while m < outer.len() {
            idx[m] += 1;
            if idx[m] < 15 {
                break;
            }
            idx[m] = 0;
            m += 1;
        }
        if m == outer.len() {
            break;
        }
    }
    (total_k * scale, (total_k - total_g).abs() * scale)
}

fn split(lo: &[f64], hi: &[f64]) -> Vec<(Vec<f64>, Vec<f64>)> {
    let d = lo.len();
    (0..1usize << d)
        .map(|mask| {
            let mut clo = lo.to_vec();
            let mut chi = hi.to_vec();
            for k in 0..d {
                let mid = 0.5 * (lo[k] + hi[k]);
                if mask & (1 << k) == 0 {
                    chi[k] = mid;
                } else {
                    clo[k] = mid;
                }
            }
            (clo, chi)
        })
        .collect()
}

fn touches_origin(lo: &[f64], hi: &[f64]) -> bool {
    lo.iter().zip(hi).all(|(a, b)| *a <= 0.0 && *b >= 0.0)
}

/// Initial partition: split at 0 along every axis where 0 is interior, then
/// refine the cells adjacent to the origin.
fn initial_boxes(region: &Region, origin_levels: u32) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut boxes = vec![(region.lo.clone(), region.hi.clone())];
    for k in 0..region.dim() {
        if region.lo[k] < 0.0 && region.hi[k] > 0.0 {
            boxes = boxes
                .into_iter()
                .flat_map(|(lo, hi)| {
                    let mut l1 = hi.clone();
                    l1[k] = 0.0;
                    let mut l2 = lo.clone();
                    l2[k] = 0.0;
                    [(lo, l1), (l2, hi)]
                })
                .collect();
        }
    }
    for _ in 0..origin_levels {
        boxes = boxes
            .into_iter()
            .flat_map(|(lo, hi)| {
                if touches_origin(&lo, &hi) {
                    split(&lo, &hi)
                } else {
                    vec![(lo, hi)]
                }
            })
            .collect();
    }
    boxes
}

/// `∫_region f(x) dx` to within `max(abs_tol, rel_tol·|value|)`.
pub fn integrate(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    region: &Region,
    opts: &CubatureOptions,
) -> Result<Integral> {
    if !(opts.abs_tol > 0.0 || opts.rel_tol > 0.0) {
        return Err(Error::Argument("cubature needs a positive tolerance".into()));
    }
    let eval = |boxes: Vec<(Vec<f64>, Vec<f64>)>| -> Vec<Cell> {
        boxes
            .into_par_iter()
            .map(|(lo, hi)| {
                let (value, error) = evaluate_cell(f, region, &lo, &hi);
                Cell { lo, hi, value, error }
            })
            .collect()
    };

    let mut cells: Vec<Cell> = eval(initial_boxes(region, opts.origin_levels));
    let mut alive = vec![true; cells.len()];
    let mut heap: BinaryHeap<Ranked> = cells
        .iter()
        .enumerate()
        .map(|(id, c)| Ranked { error: c.error, id })
        .collect();
    let mut value: f64 = cells.iter().map(|c| c.value).sum();
    let mut error: f64 = cells.iter().map(|c| c.error).sum();
    let mut n_alive = cells.len();
    let min_width = region
        .lo
        .iter()
        .zip(&region.hi)
        .map(|(a, b)| b - a)
        .fold(f64::INFINITY, f64::min)
        * 1e-12;

    let target = |v: f64| opts.abs_tol.max(opts.rel_tol * v.abs());
    while error > target(value) && n_alive < opts.max_cells {
        let mut parents = Vec::with_capacity(opts.batch);
        while parents.len() < opts.batch {
            let Some(top) = heap.pop() else { break };
            let c = &cells[top.id];
            let width = c.lo.iter().zip(&c.hi).map(|(a, b)| b - a).fold(f64::INFINITY, f64::min);
            if width < min_width {
                continue;
            }
            parents.push(top.id);
        }
        if parents.is_empty() {
            break;
        }
        let boxes: Vec<_> = parents
            .iter()
            .flat_map(|&id| split(&cells[id].lo, &cells[id].hi))
            .collect();
        let children = eval(boxes);
        for &id in &parents {
            alive[id] = false;
            value -= cells[id].value;
            error -= cells[id].error;
            n_alive -= 1;
        }
        for child in children {
            value += child.value;
            error += child.error;
            heap.push(Ranked {
                error: child.error,
                id: cells.len(),
            });
            cells.push(child);
            alive.push(true);
            n_alive += 1;
        }
    }

    let values: Vec<f64> = cells
        .iter()
        .zip(&alive)
        .filter(|(_, a)| **a)
        .map(|(c, _)| c.value)
        .collect();
    let errors: Vec<f64> = cells
        .iter()
        .zip(&alive)
        .filter(|(_, a)| **a)
        .map(|(c, _)| c.error)
        .collect();
    let value = pairwise_sum(&values);
    let error = pairwise_sum(&errors);
    Ok(Integral {
        value,
        error,
        cells: values.len(),
        converged: error <= target(value),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        // K15 is exact to degree 22, G7 to degree 13
        let (k, g) = rule_on(&mut |t| t.powi(12), -1.0, 1.0);
        assert!((k - 2.0 / 13.0).abs() < 1e-15);
        assert!((g - 2.0 / 13.0).abs() < 1e-15);
        let (k, _) = rule_on(&mut |t| t.powi(20), 0.0, 1.0);
        assert!((k - 1.0 / 21.0).abs() < 1e-15);
    }

    #[test]
    fn unit_disk_area() {
        let r = Region::ball(vec![0.0, 0.0], 1.0).unwrap();
        let res = integrate(&|_| 1.0, &r, &CubatureOptions::with_abs_tol(1e-12)).unwrap();
        assert!(res.converged);
        assert!((res.value - PI).abs() < 1e-11, "{res:?}");
    }

    #[test]
    fn cusp_at_origin() {
        // ∫_{|x|<1} |x| dx = 2π/3
        let r = Region::ball(vec![0.0, 0.0], 1.0).unwrap();
        let f = |x: &[f64]| (x[0] * x[0] + x[1] * x[1]).sqrt();
        let res = integrate(&f, &r, &CubatureOptions::with_abs_tol(1e-11)).unwrap();
        assert!((res.value - 2.0 * PI / 3.0).abs() < 1e-10, "{res:?}");
    }

    #[test]
    fn annulus_and_interval() {
        let r = Region::annulus(2, 0.5, 1.0).unwrap();
        let res = integrate(&|_| 1.0, &r, &CubatureOptions::with_abs_tol(1e-11)).unwrap();
        assert!((res.value - PI * 0.75).abs() < 1e-10);

        let r = Region::ball(vec![0.0], 0.7).unwrap();
        let res = integrate(&|x| x[0] * x[0], &r, &CubatureOptions::with_abs_tol(1e-13)).unwrap();
        assert!((res.value - 2.0 * 0.7f64.powi(3) / 3.0).abs() < 1e-13);
    }

    #[test]
    fn three_dimensional_ball() {
        let r = Region::ball(vec![0.0; 3], 1.0).unwrap();
        let opts = CubatureOptions {
            abs_tol: 1e-8,
            origin_levels: 0,
            ..Default::default()
        };
        let res = integrate(&|_| 1.0, &r, &opts).unwrap();
        assert!((res.value - 4.0 * PI / 3.0).abs() < 1e-7, "{res:?}");
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let r = Region::ball(vec![0.0, 0.0], 1.0).unwrap();
        let opts = CubatureOptions {
            abs_tol: 1e-300,
            max_cells: 40,
            ..Default::default()
        };
        let res = integrate(&|x| x[0].abs().sqrt(), &r, &opts).unwrap();
        assert!(!res.converged);
    }

    #[test]
    fn deterministic() {
        let r = Region::ball(vec![0.1, -0.2], 0.8).unwrap();
        let f = |x: &[f64]| (x[0] * 3.0).sin() * (x[1] * x[1] + 0.1).ln();
        let opts = CubatureOptions::with_abs_tol(1e-11);
        let a = integrate(&f, &r, &opts).unwrap();
        let b = integrate(&f, &r, &opts).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.error.to_bits(), b.error.to_bits());
    }
}
