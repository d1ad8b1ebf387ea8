//! Zeros of `Θ` in the upper half-plane and the counterexample experiment.
//!
//! `Θ(z) = 0` exactly when `Kμ(z) = 1`, i.e. when
//!
//! ```text
//! g(z) = Σ w_n/(a_n - z) - C - πi = 0,    C = Σ c_n.
//! ```
//!
//! For `N` atoms, `g·∏(z - a_n)` is a polynomial of degree `N` with leading
//! coefficient `-(C + πi)`, so there are exactly `N` zeros, all in `ℂ₊`.

use crate::clark::{build_measure, WeightStrategy};
use crate::error::{Error, Result};
use crate::mif::InnerFunctionModel;
use crate::sequences::{generate, Family, IndexWindow};
use crate::sum::{ComplexSum, NeumaierSum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroMethod {
    Polynomial,
    Contour,
}

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        if !(x0 < x1 && y0 < y1) || ![x0, x1, y0, y1].iter().all(|v| v.is_finite()) {
            return Err(Error::Parameter(format!("invalid rectangle [{x0}, {x1}] x [{y0}, {y1}]")));
        }
        Ok(Self { x0, x1, y0, y1 })
    }

    /// Open-box membership, as used for counting.
    pub fn contains(&self, z: Complex64) -> bool {
        z.re > self.x0 && z.re < self.x1 && z.im > self.y0 && z.im < self.y1
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.x0, self.y0),
            Complex64::new(self.x1, self.y0),
            Complex64::new(self.x1, self.y1),
            Complex64::new(self.x0, self.y1),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroSet {
    pub zeros: Vec<Complex64>,
    /// `|Kμ(z_n) - 1|` per zero.
    pub residuals: Vec<f64>,
    pub method: ZeroMethod,
    /// Zero count confirmed by the argument principle.
    pub certified_count: usize,
    pub certified: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<Rect>,
}

impl ZeroSet {
    pub fn min_height(&self) -> Option<f64> {
        self.zeros.iter().map(|z| z.im).min_by(f64::total_cmp)
    }

    pub fn count_in(&self, r: &Rect) -> usize {
        self.zeros.iter().filter(|z| r.contains(**z)).count()
    }
}

pub const RESIDUAL_TARGET: f64 = 1e-9;

/// `g` and `g'` for a finite atom set.
struct G<'a> {
    a: &'a [f64],
    w: &'a [f64],
    shift: Complex64,
}

impl<'a> G<'a> {
    fn new(model: &'a InnerFunctionModel) -> Self {
        let m = model.measure();
        let mut c = NeumaierSum::new();
        for &v in m.compensators() {
            c += v;
        }
        Self { a: m.positions(), w: m.weights(), shift: Complex64::new(c.sum(), PI) }
    }

    fn eval(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut g = ComplexSum::new();
        let mut dg = ComplexSum::new();
        for (&a, &w) in self.a.iter().zip(self.w) {
            let r = 1.0 / (a - z);
            g += r * w;
            dg += r * r * w;
        }
        (g.sum() - self.shift, dg.sum())
    }

    fn value(&self, z: Complex64) -> Complex64 {
        self.eval(z).0
    }

    fn residual(&self, z: Complex64) -> f64 {
        self.value(z).norm() / PI
    }

    /// `p'/p` for `p = g·∏(z - a_n)`.
    fn poly_log_derivative(&self, z: Complex64) -> Complex64 {
        let (g, dg) = self.eval(z);
        let mut s = ComplexSum::new();
        for &a in self.a {
            s += 1.0 / (z - a);
        }
        dg / g + s.sum()
    }

    fn nearest_atom_distance(&self, z: Complex64) -> f64 {
        let i = self.a.partition_point(|&a| a < z.re);
        let mut d = f64::INFINITY;
        for j in [i.wrapping_sub(1), i] {
            if let Some(&a) = self.a.get(j) {
                d = d.min((z - a).norm());
            }
        }
        d
    }

    /// Damped Newton on `g`, keeping the iterate only while the residual drops.
    fn newton(&self, mut z: Complex64) -> Complex64 {
        let (mut g, mut dg) = self.eval(z);
        for _ in 0..80 {
            let step = g / dg;
            if !step.is_finite() {
                break;
            }
            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let cand = z - step * lambda;
                let (gc, dgc) = self.eval(cand);
                if gc.norm() < g.norm() {
                    z = cand;
                    g = gc;
                    dg = dgc;
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
            if !accepted || step.norm() * lambda <= 4.0 * f64::EPSILON * z.norm().max(1e-300) {
                break;
            }
        }
        z
    }
}

/// Aberth iteration; `logd` is the logarithmic derivative of the target.
fn aberth(mut z: Vec<Complex64>, logd: impl Fn(Complex64) -> Complex64 + Sync, max_iter: usize) -> Vec<Complex64> {
    let n = z.len();
    for _ in 0..max_iter {
        let snapshot = z.clone();
        let steps: Vec<Complex64> = (0..n)
            .into_par_iter()
            .map(|i| {
                let zi = snapshot[i];
                let r = 1.0 / logd(zi);
                let mut s = ComplexSum::new();
                for (j, &zj) in snapshot.iter().enumerate() {
                    if j != i {
                        s += 1.0 / (zi - zj);
                    }
                }
                let step = r / (1.0 - r * s.sum());
                if step.is_finite() {
                    step
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        let mut done = true;
        for (zi, s) in z.iter_mut().zip(&steps) {
            *zi -= s;
            if s.norm() > 1e-15 * zi.norm().max(1.0) {
                done = false;
            }
        }
        if done {
            break;
        }
    }
    z
}

fn sort_zeros(z: &mut [Complex64]) {
    z.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Continuous change of `arg g` along the segment `p → q`, divided by `2π`.
fn winding_segment(g: &G, p: Complex64, q: Complex64, hazards: &[Complex64]) -> Option<f64> {
    let len = (q - p).norm();
    let mut t = 0.0;
    let mut gp = g.value(p);
    let mut total = 0.0;
    let mut steps = 0usize;
    while t < 1.0 {
        let z = p + (q - p) * t;
        let mut d = g.nearest_atom_distance(z);
        for h in hazards {
            d = d.min((z - h).norm());
        }
        let mut h = (0.25 * d / len).min(1.0 - t).max(1e-15);
        loop {
            let zn = p + (q - p) * (t + h);
            let gn = g.value(zn);
            let ratio = gn / gp;
            if (ratio - 1.0).norm() <= 0.3 || h <= 1e-14 {
                total += ratio.arg();
                gp = gn;
                t += h;
                break;
            }
            h *= 0.5;
        }
        steps += 1;
        if steps > 50_000_000 || !gp.is_finite() {
            return None;
        }
    }
    Some(total / (2.0 * PI))
}

/// Zero count of `g` inside `r` (no atoms may lie inside or on `r`).
fn winding(g: &G, r: &Rect, hazards: &[Complex64]) -> Option<usize> {
    let c = r.corners();
    let mut w = 0.0;
    for i in 0..4 {
        w += winding_segment(g, c[i], c[(i + 1) % 4], hazards)?;
    }
    let n = w.round();
    ((w - n).abs() < 0.05 && n >= 0.0).then_some(n as usize)
}

/// All zeros (`region = None`) or the zeros inside a rectangle of `ℂ₊`.
pub fn find_zeros(model: &InnerFunctionModel, region: Option<Rect>) -> Result<ZeroSet> {
    if model.exp_factor() != 0.0 {
        return Err(Error::Parameter("zero finding needs exp_factor = 0 (finite Blaschke model)".into()));
    }
    match region {
        None => polynomial_zeros(model),
        Some(r) => contour_zeros(model, r),
    }
}

fn polynomial_zeros(model: &InnerFunctionModel) -> Result<ZeroSet> {
    let g = G::new(model);
    let a = g.a;
    let n = a.len();
    let seeds: Vec<Complex64> = (0..n)
        .map(|k| {
            let gap = if k + 1 < n { a[k + 1] - a[k] } else if k > 0 { a[k] - a[k - 1] } else { 1.0 };
            Complex64::new(a[k] + 0.5 * gap, 0.5 * gap)
        })
        .collect();
    let z = aberth(seeds, |z| g.poly_log_derivative(z), 2000);
    let mut zeros: Vec<Complex64> = z.par_iter().map(|&z| g.newton(z)).collect();
    sort_zeros(&mut zeros);
    let residuals: Vec<f64> = zeros.iter().map(|&z| g.residual(z)).collect();

    let distinct = zeros.windows(2).all(|w| (w[1] - w[0]).norm() > 1e-12 * w[0].norm().max(1.0));
    let ymin = zeros.iter().map(|z| z.im).fold(f64::INFINITY, f64::min);
    let ymax = zeros.iter().map(|z| z.im).fold(0.0, f64::max);
    let mut certified_count = 0;
    if ymin > 0.0 && zeros.iter().all(|z| z.is_finite()) {
        let span = (a[n - 1] - a[0]).max(1.0);
        let xs = zeros.iter().map(|z| z.re);
        let lo = xs.clone().fold(a[0], f64::min) - span;
        let hi = xs.fold(a[n - 1], f64::max) + span;
        let boxed = Rect { x0: lo, x1: hi, y0: 0.5 * ymin, y1: 2.0 * ymax + span };
        certified_count = winding(&g, &boxed, &zeros).unwrap_or(0);
    }
    let certified =
        distinct && certified_count == n && residuals.iter().all(|&r| r <= RESIDUAL_TARGET) && ymin > 0.0;
    Ok(ZeroSet { zeros, residuals, method: ZeroMethod::Polynomial, certified_count, certified, region: None })
}

fn contour_zeros(model: &InnerFunctionModel, r: Rect) -> Result<ZeroSet> {
    let r = Rect::new(r.x0, r.x1, r.y0, r.y1)?;
    if r.y0 <= model.exclusion_radius() {
        return Err(Error::Region(format!(
            "region bottom {} is within the exclusion radius of the real axis",
            r.y0
        )));
    }
    let g = G::new(model);
    let total = winding(&g, &r, &[]).ok_or_else(|| Error::Region("winding count along the region boundary failed".into()))?;
    let mut zeros = Vec::new();
    let mut complete = true;
    subdivide(&g, r, total, 0, &mut zeros, &mut complete);
    sort_zeros(&mut zeros);
    let residuals: Vec<f64> = zeros.iter().map(|&z| g.residual(z)).collect();
    let certified = complete && zeros.len() == total && residuals.iter().all(|&v| v <= RESIDUAL_TARGET);
    Ok(ZeroSet { zeros, residuals, method: ZeroMethod::Contour, certified_count: total, certified, region: Some(r) })
}

fn subdivide(g: &G, r: Rect, count: usize, depth: usize, out: &mut Vec<Complex64>, complete: &mut bool) {
    if count == 0 {
        return;
    }
    if count <= 4 {
        if let Some(z) = local_solve(g, &r, count) {
            out.extend(z);
            return;
        }
    }
    if depth >= 40 {
        *complete = false;
        return;
    }
    // split the longer side, nudging the cut off any zero sitting on it
    for nudge in [0.5, 0.5173, 0.4791, 0.5419, 0.4563] {
        let (a, b) = if r.x1 - r.x0 >= r.y1 - r.y0 {
            let m = r.x0 + nudge * (r.x1 - r.x0);
            (Rect { x1: m, ..r }, Rect { x0: m, ..r })
        } else {
            let m = r.y0 + nudge * (r.y1 - r.y0);
            (Rect { y1: m, ..r }, Rect { y0: m, ..r })
        };
        if let (Some(ca), Some(cb)) = (winding(g, &a, &[]), winding(g, &b, &[])) {
            if ca + cb == count {
                subdivide(g, a, ca, depth + 1, out, complete);
                subdivide(g, b, cb, depth + 1, out, complete);
                return;
            }
        }
    }
    *complete = false;
}

/// Aberth on `g` alone from seeds on a small circle; accepted only when every
/// root lands inside `r`, distinct and refined.
fn local_solve(g: &G, r: &Rect, count: usize) -> Option<Vec<Complex64>> {
    let c = Complex64::new(0.5 * (r.x0 + r.x1), 0.5 * (r.y0 + r.y1));
    let rad = 0.25 * (r.x1 - r.x0).min(r.y1 - r.y0);
    let seeds: Vec<Complex64> =
        (0..count).map(|k| c + Complex64::from_polar(rad, 2.0 * PI * (k as f64 + 0.25) / count as f64)).collect();
    let z = aberth(seeds, |z| {
        let (v, d) = g.eval(z);
        d / v
    }, 500);
    let z: Vec<Complex64> = z.into_iter().map(|z| g.newton(z)).collect();
    let scale = (r.x1 - r.x0).max(r.y1 - r.y0);
    let ok = z.iter().all(|&v| v.is_finite() && r.contains(v) && g.residual(v) <= RESIDUAL_TARGET)
        && z.iter().enumerate().all(|(i, a)| z[i + 1..].iter().all(|b| (a - b).norm() > 1e-10 * scale));
    ok.then_some(z)
}

/// Phase derivative rebuilt from zeros: `a + Σ 2 y_n / ((x - x_n)² + y_n²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlaschkeValue {
    pub value: f64,
    pub certified: bool,
}

pub fn blaschke_phase_derivative(zeros: &ZeroSet, exp_factor: f64, x: f64) -> BlaschkeValue {
    let mut s = NeumaierSum::new();
    s += exp_factor;
    for z in &zeros.zeros {
        let dx = x - z.re;
        s += 2.0 * z.im / (dx * dx + z.im * z.im);
    }
    BlaschkeValue { value: s.sum(), certified: zeros.certified }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxReport {
    pub n: usize,
    pub d: f64,
    pub t1: f64,
    pub strategy: WeightStrategy,
    pub box_s: Rect,
    pub box_t: Rect,
    /// Zeros inside `S`.
    pub z: usize,
    pub z_in_t: usize,
    pub min_height: f64,
    pub sup_phase_derivative: f64,
    pub sup_argmax: f64,
    pub sup_window: (f64, f64),
    pub certified: bool,
}

/// Cluster of `n` points with spacing `d`, preceded by a gap of `n·d` after `t1`.
pub fn counterexample_experiment(n: usize, d: f64, t1: f64, strategy: WeightStrategy) -> Result<BoxReport> {
    if n < 4 {
        return Err(Error::Parameter(format!("counterexample needs N >= 4, got {n}")));
    }
    if matches!(strategy, WeightStrategy::Custom | WeightStrategy::KreinResidue) {
        return Err(Error::Parameter("counterexample strategy must be unit or gap".into()));
    }
    if !t1.is_finite() {
        return Err(Error::Parameter(format!("t1 must be finite, got {t1}")));
    }
    // the model is built with t1 at the origin so that the report translates exactly with t1
    let seq = generate(&Family::ClusterGap { t1: 0.0, n, d }, IndexWindow::new(1, n as i64))?;
    let measure = build_measure(&seq, strategy, None)?;
    let model = InnerFunctionModel::clark(measure, 0.0, Default::default())?;
    let zs = find_zeros(&model, None)?;
    let t = seq.points();
    let (t2, tn) = (t[1], t[n - 1]);
    let h = (n as f64 * d).sqrt();
    let box_s = Rect { x0: t2, x1: tn, y0: 0.0, y1: h };
    let box_t = Rect { x0: t[0], x1: t2, y0: 0.0, y1: h };
    let a_mid = 0.5 * (t2 + tn);
    let tc = 2.0 * t2 - a_mid;
    let sup = model.sup_derivative((tc, tn))?;
    let shift = |r: Rect| Rect { x0: r.x0 + t1, x1: r.x1 + t1, ..r };
    Ok(BoxReport {
        n,
        d,
        t1,
        strategy,
        box_s: shift(box_s),
        box_t: shift(box_t),
        z: zs.count_in(&box_s),
        z_in_t: zs.count_in(&box_t),
        min_height: zs.min_height().unwrap_or(f64::NAN),
        sup_phase_derivative: sup.sup,
        sup_argmax: sup.argmax + t1,
        sup_window: (tc + t1, tn + t1),
        certified: zs.certified,
    })
}

/// Runs the experiment for each `N`, in order.
pub fn counterexample_sweep(ns: &[usize], d: f64, t1: f64, strategy: WeightStrategy) -> Result<Vec<BoxReport>> {
    ns.iter().map(|&n| counterexample_experiment(n, d, t1, strategy)).collect()
}

/// `∫_t^0 Σ_{n=1}^{M} 2/((x-n)² + 1) dx` in closed form.
pub fn counting_integral(m: usize, t: f64) -> Result<f64> {
    if !(t <= 0.0 && t.is_finite()) || m == 0 {
        return Err(Error::Parameter(format!("counting integral needs t <= 0 and M >= 1, got t = {t}, M = {m}")));
    }
    let mut s = NeumaierSum::new();
    for n in 1..=m {
        let n = n as f64;
        // atan(n - t) - atan(n) = atan(-t / (1 + n(n - t)))
        s += 2.0 * (-t / (1.0 + n * (n - t))).atan();
    }
    Ok(s.sum())
}

/// Spectral count on `(t, 0)` for zeros `n + i`, `1 ≤ n ≤ M`, normalized by `ln|t|`.
pub fn counting_check(m: usize, t: f64) -> Result<f64> {
    if !(t < -1.0) {
        return Err(Error::Parameter(format!("counting check needs t < -1, got {t}")));
    }
    if (m as f64) < 10.0 * t.abs() {
        return Err(Error::Parameter(format!("counting check needs M >= 10|t|, got M = {m}")));
    }
    Ok(counting_integral(m, t)? / t.abs().ln())
}
