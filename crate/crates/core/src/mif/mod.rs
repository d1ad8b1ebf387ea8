//! The inner function `Θ = e^{iaz} (Kμ - 1)/(Kμ + 1)` and its boundary phase.
//!
//! Boundary values are computed in coordinates anchored at the nearest atom:
//! with `x = a_k + t`,
//!
//! ```text
//! s(x) = (w_k + t Q) / (π t),     Q = c_k - Σ_{n≠k} term_n(x)
//! |Θ'(x)| = a + 2π (w_k + t² P) / (π² t² + (w_k + t Q)²),   P = Σ_{n≠k} w_n / (x - a_n)²
//! ```
//!
//! which is exact, smooth through `t = 0`, and keeps full relative precision
//! next to atoms of any magnitude.

mod krein;

pub use krein::{krein_build, KreinModel, StepFunction};

use crate::clark::ClarkMeasure;
use crate::error::{Error, Result};
use crate::quad::{integrate_with_breaks, QuadConfig};
use crate::sum::NeumaierSum;
use crate::transform::{cauchy_transform, raw_sum, term_real, EvaluationConfig, Evaluation};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Clark,
    Krein,
}

/// Which formula produced a boundary value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Regular,
    /// Inside the exclusion radius of an atom: the removable-singularity limit.
    AtomLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub x: f64,
    pub theta: Complex64,
    pub phase_derivative: f64,
    pub branch: Branch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseIncrement {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileSample {
    pub x: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupReport {
    pub window: (f64, f64),
    pub sup: f64,
    pub argmax: f64,
    /// Atom nearest to the maximiser and the offset from it.
    pub argmax_atom: usize,
    pub argmax_offset: f64,
    pub profile: Vec<ProfileSample>,
}

/// Meromorphic inner function given by a Clark measure (optionally produced by
/// the Krein route) and a singular factor `e^{i a z}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelRepr", into = "ModelRepr")]
pub struct InnerFunctionModel {
    kind: ModelKind,
    measure: ClarkMeasure,
    krein: Option<KreinModel>,
    exp_factor: f64,
    cfg: EvaluationConfig,
}

#[derive(Serialize, Deserialize)]
struct ModelRepr {
    kind: ModelKind,
    exp_factor: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    measure: Option<ClarkMeasure>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    krein_data: Option<KreinModel>,
    #[serde(default)]
    cfg: EvaluationConfig,
}

impl TryFrom<ModelRepr> for InnerFunctionModel {
    type Error = Error;

    fn try_from(r: ModelRepr) -> Result<Self> {
        match (r.kind, r.measure, r.krein_data) {
            (ModelKind::Clark, Some(m), _) => Self::clark(m, r.exp_factor, r.cfg),
            (ModelKind::Krein, _, Some(k)) => Self::from_krein(k, r.exp_factor, r.cfg),
            (kind, _, _) => Err(Error::Serialization(format!("{kind:?} model is missing its data"))),
        }
    }
}

impl From<InnerFunctionModel> for ModelRepr {
    fn from(m: InnerFunctionModel) -> Self {
        let is_krein = m.kind == ModelKind::Krein;
        ModelRepr {
            kind: m.kind,
            exp_factor: m.exp_factor,
            measure: (!is_krein).then_some(m.measure),
            krein_data: m.krein,
            cfg: m.cfg,
        }
    }
}

/// Anchored sums at `x = a_k + t`.
struct Local {
    wk: f64,
    q: f64,
    p: f64,
}

// (samples, best) from one half-cell scan; entries are (atom, offset, value).
type HalfScan = (Vec<(usize, f64, f64)>, (usize, f64, f64));

impl InnerFunctionModel {
    pub fn clark(measure: ClarkMeasure, exp_factor: f64, cfg: EvaluationConfig) -> Result<Self> {
        if !(exp_factor >= 0.0 && exp_factor.is_finite()) {
            return Err(Error::Parameter(format!("exp_factor must be >= 0, got {exp_factor}")));
        }
        cfg.validate()?;
        Ok(Self { kind: ModelKind::Clark, measure, krein: None, exp_factor, cfg })
    }

    pub(crate) fn from_krein(k: KreinModel, exp_factor: f64, cfg: EvaluationConfig) -> Result<Self> {
        let measure = k.measure()?;
        let mut m = Self::clark(measure, exp_factor, cfg)?;
        m.kind = ModelKind::Krein;
        m.krein = Some(k);
        Ok(m)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn measure(&self) -> &ClarkMeasure {
        &self.measure
    }

    pub fn krein_data(&self) -> Option<&KreinModel> {
        self.krein.as_ref()
    }

    pub fn exp_factor(&self) -> f64 {
        self.exp_factor
    }

    pub fn config(&self) -> &EvaluationConfig {
        &self.cfg
    }

    pub fn with_config(mut self, cfg: EvaluationConfig) -> Result<Self> {
        cfg.validate()?;
        self.cfg = cfg;
        Ok(self)
    }

    pub fn with_exp_factor(mut self, exp_factor: f64) -> Result<Self> {
        if !(exp_factor >= 0.0 && exp_factor.is_finite()) {
            return Err(Error::Parameter(format!("exp_factor must be >= 0, got {exp_factor}")));
        }
        self.exp_factor = exp_factor;
        Ok(self)
    }

    pub fn exclusion_radius(&self) -> f64 {
        self.cfg.exclusion_radius(self.measure.separation())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    fn local(&self, k: usize, t: f64) -> Local {
        let pos = self.measure.positions();
        let w = self.measure.weights();
        let ak = pos[k];
        let x = ak + t;
        let mut sum = NeumaierSum::new();
        let mut p = NeumaierSum::new();
        for n in (0..pos.len()).filter(|&n| n != k) {
            let d = (pos[n] - ak) - t;
            sum += term_real(pos[n], w[n], x, d);
            p += w[n] / d / d;
        }
        Local { wk: w[k], q: self.measure.compensators()[k] - sum.sum(), p: p.sum() }
    }

    /// Möbius part of `Θ` and `|Θ'|` (without the singular factor) at `a_k + t`.
    fn local_values(&self, k: usize, t: f64) -> (Complex64, f64) {
        let l = self.local(k, t);
        if t.abs() <= 1.0 {
            let num = l.wk + t * l.q;
            let th = Complex64::new(-PI * t, num) / Complex64::new(PI * t, num);
            let d = 2.0 * PI * (l.wk + t * t * l.p) / (PI * PI * t * t + num * num);
            (th, d)
        } else {
            let num = l.wk / t + l.q;
            let th = Complex64::new(-PI, num) / Complex64::new(PI, num);
            let d = 2.0 * PI * (l.wk / t / t + l.p) / (PI * PI + num * num);
            (th, d)
        }
    }

    fn singular(&self, x: f64) -> Complex64 {
        if self.exp_factor == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::from_polar(1.0, self.exp_factor * x)
        }
    }

    /// Boundary value at `a_k + t`, honouring the exclusion radius.
    pub fn boundary_local(&self, k: usize, t: f64) -> BoundaryPoint {
        let x = self.measure.positions()[k] + t;
        if t.abs() < self.exclusion_radius() {
            let ak = self.measure.positions()[k];
            return BoundaryPoint {
                x: ak,
                theta: self.singular(ak),
                phase_derivative: self.exp_factor + 2.0 * PI / self.measure.weights()[k],
                branch: Branch::AtomLimit,
            };
        }
        let (th, d) = self.local_values(k, t);
        BoundaryPoint { x, theta: th * self.singular(x), phase_derivative: self.exp_factor + d, branch: Branch::Regular }
    }

    pub fn boundary(&self, x: f64) -> BoundaryPoint {
        let k = self.measure.nearest_atom(x);
        self.boundary_local(k, x - self.measure.positions()[k])
    }

    /// `|Θ'(x)| = φ'(x)`.
    pub fn theta_prime_abs(&self, x: f64) -> f64 {
        self.boundary(x).phase_derivative
    }

    /// `|Θ'|` at `a_k + t` from the exact anchored formula (no radius switchover).
    pub fn theta_prime_local(&self, k: usize, t: f64) -> f64 {
        self.exp_factor + self.local_values(k, t).1
    }

    /// `Θ(z)` on the closed plane; lower half-plane values satisfy `Θ(z̄) = 1/conj Θ(z)`.
    pub fn theta(&self, z: Complex64) -> Complex64 {
        if z.im == 0.0 {
            return self.boundary(z.re).theta;
        }
        let k = raw_sum(&self.measure, z) * Complex64::new(0.0, -1.0 / PI);
        (k - 1.0) / (k + 1.0) * (Complex64::i() * self.exp_factor * z).exp()
    }

    /// `Θ(z)` with the transform's tail status attached.
    pub fn theta_eval(&self, z: Complex64) -> Result<Evaluation> {
        if z.im == 0.0 {
            let b = self.boundary(z.re);
            if b.branch == Branch::AtomLimit {
                return Ok(Evaluation { value: b.theta, tail: crate::transform::TailStatus::WindowOnly });
            }
        }
        let k = cauchy_transform(&self.measure, z, &self.cfg)?;
        Ok(Evaluation { value: self.theta(z), tail: k.tail })
    }

    /// `∫_u^v φ'(x) dx` by adaptive quadrature in atom-anchored coordinates.
    pub fn phase_increment(&self, u: f64, v: f64) -> Result<PhaseIncrement> {
        if !(u < v) || !u.is_finite() || !v.is_finite() {
            return Err(Error::Parameter(format!("phase_increment needs u < v, got [{u}, {v}]")));
        }
        let pos = self.measure.positions();
        let w = self.measure.weights();
        let cfg = QuadConfig { abs_tol: 1e-14, rel_tol: 1e-12, max_intervals: 4000 };
        // pieces in local coordinates: (anchor, t0, t1)
        let mut pieces = Vec::new();
        let first = pos.partition_point(|&a| a <= u);
        let last = pos.partition_point(|&a| a < v);
        let inside: Vec<usize> = (first..last).collect();
        let start_anchor = self.measure.nearest_atom(u);
        if inside.is_empty() {
            let k = self.measure.nearest_atom(0.5 * (u + v));
            pieces.push((k, u - pos[k], v - pos[k]));
        } else {
            let k0 = inside[0];
            pieces.push(self.split_to_atom(start_anchor, u, k0));
            for win in inside.windows(2) {
                let (i, j) = (win[0], win[1]);
                let half = 0.5 * (pos[j] - pos[i]);
                pieces.push((i, 0.0, half));
                pieces.push((j, -half, 0.0));
            }
            let kl = *inside.last().unwrap();
            let end_anchor = self.measure.nearest_atom(v);
            let (k, t0, t1) = self.split_to_atom(end_anchor, v, kl);
            pieces.push((k, t1.min(t0), t1.max(t0)));
        }
        let mut total = NeumaierSum::new();
        let mut error = 0.0;
        let mut converged = true;
        for (k, t0, t1) in pieces.into_iter().flat_map(|p| self.anchor_pieces(p)) {
            if t1 <= t0 {
                continue;
            }
            let scale = w[k] / PI;
            let breaks: Vec<f64> = (-20..=200)
                .map(|j| scale * 10f64.powf(j as f64 / 4.0))
                .flat_map(|b| [b, -b])
                .chain(std::iter::once(0.0))
                .collect();
            let q = integrate_with_breaks(|t| self.local_values(k, t).1, t0, t1, &breaks, &cfg);
            total += q.value;
            error += q.error;
            converged &= q.converged;
        }
        total += self.exp_factor * (v - u);
        Ok(PhaseIncrement { value: total.sum(), error, converged })
    }

    /// Piece from `x` to atom `k`, anchored at `k` (as `(k, t_lo, t_hi)`).
    fn split_to_atom(&self, _anchor: usize, x: f64, k: usize) -> (usize, f64, f64) {
        let t = x - self.measure.positions()[k];
        (k, t.min(0.0), t.max(0.0))
    }

    /// Splits a local piece that reaches past the next atom so every
    /// sub-piece is anchored at its nearest atom.
    fn anchor_pieces(&self, (k, t0, t1): (usize, f64, f64)) -> Vec<(usize, f64, f64)> {
        let pos = self.measure.positions();
        let ak = pos[k];
        let mut out = Vec::new();
        let mut lo = t0;
        // atoms strictly inside (ak + t0, ak + t1) other than k are split at midpoints
        let mut cuts: Vec<(f64, usize)> = Vec::new();
        for (n, &a) in pos.iter().enumerate() {
            let d = a - ak;
            if n != k && d > t0 && d < t1 {
                cuts.push((d, n));
            }
        }
        if cuts.is_empty() {
            return vec![(k, t0, t1)];
        }
        let mut anchor = k;
        let mut anchor_off = 0.0;
        for (d, n) in cuts {
            let mid = 0.5 * (anchor_off + d);
            out.push((anchor, lo - anchor_off, mid - anchor_off));
            out.push((n, mid - d, 0.0));
            lo = d;
            anchor = n;
            anchor_off = d;
        }
        out.push((anchor, lo - anchor_off, t1 - anchor_off));
        out
    }

    /// Supremum of `|Θ'|` over a real window containing at least one atom.
    pub fn sup_derivative(&self, window: (f64, f64)) -> Result<SupReport> {
        let (lo, hi) = window;
        if !(lo < hi) {
            return Err(Error::Parameter(format!("invalid window [{lo}, {hi}]")));
        }
        let pos = self.measure.positions();
        let first = pos.partition_point(|&a| a < lo);
        let last = pos.partition_point(|&a| a <= hi);
        if first >= last {
            return Err(Error::InsufficientData(format!("window [{lo}, {hi}] contains no atom")));
        }
        // half-cells: (anchor, direction, length)
        let mut halves: Vec<(usize, f64, f64)> = Vec::new();
        halves.push((first, -1.0, pos[first] - lo));
        for k in first..last - 1 {
            let half = 0.5 * (pos[k + 1] - pos[k]);
            halves.push((k, 1.0, half));
            halves.push((k + 1, -1.0, half));
        }
        halves.push((last - 1, 1.0, hi - pos[last - 1]));
        let results: Vec<HalfScan> =
            halves.par_iter().map(|&(k, dir, len)| self.scan_half(k, dir, len)).collect();
        let mut best = (first, 0.0, f64::NEG_INFINITY);
        let mut profile = Vec::new();
        for (samples, b) in results {
            if b.2 > best.2 {
                best = b;
            }
            profile.extend(samples.into_iter().map(|(k, t, v)| ProfileSample { x: pos[k] + t, value: v }));
        }
        profile.sort_by(|a, b| a.x.total_cmp(&b.x));
        profile.dedup_by(|a, b| a.x == b.x);
        let (k, t, sup) = best;
        Ok(SupReport { window, sup, argmax: pos[k] + t, argmax_atom: k, argmax_offset: t, profile })
    }

    /// Samples one half-cell `t ∈ dir·[0, len]`, refines and returns the local best.
    fn scan_half(&self, k: usize, dir: f64, len: f64) -> HalfScan {
        let wk = self.measure.weights()[k];
        let atom_value = self.exp_factor + 2.0 * PI / wk;
        if !(len > 0.0) {
            return (vec![(k, 0.0, atom_value)], (k, 0.0, atom_value));
        }
        let eps = (len / 64.0).min(wk / (8.0 * PI)).max(len * 1e-12);
        let mut ts: Vec<f64> = vec![0.0];
        let mut t = eps;
        while t < len {
            ts.push(t);
            t *= 1.25;
        }
        ts.extend((1..=16).map(|i| len * i as f64 / 16.0));
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        let f = |t: f64| if t == 0.0 { atom_value } else { self.theta_prime_local(k, dir * t) };
        let mut vals: Vec<f64> = ts.iter().map(|&t| f(t)).collect();
        // refine where the profile bends sharply
        for _ in 0..4 {
            let vmax = vals.iter().copied().fold(0.0, f64::max);
            let mut add = Vec::new();
            for i in 1..ts.len() - 1 {
                let dd = (vals[i - 1] - 2.0 * vals[i] + vals[i + 1]).abs();
                if dd > 0.05 * vmax {
                    add.push(0.5 * (ts[i - 1] + ts[i]));
                    add.push(0.5 * (ts[i] + ts[i + 1]));
                }
            }
            if add.is_empty() {
                break;
            }
            let mut merged: Vec<(f64, f64)> = ts.iter().copied().zip(vals.iter().copied()).collect();
            merged.extend(add.into_iter().map(|t| (t, f(t))));
            merged.sort_by(|a, b| a.0.total_cmp(&b.0));
            merged.dedup_by(|a, b| a.0 == b.0);
            ts = merged.iter().map(|p| p.0).collect();
            vals = merged.iter().map(|p| p.1).collect();
        }
        let (mut bi, mut bv) = (0, vals[0]);
        for (i, &v) in vals.iter().enumerate() {
            if v > bv {
                bi = i;
                bv = v;
            }
        }
        let mut bt = ts[bi];
        if bi > 0 && bi + 1 < ts.len() {
            let (gt, gv) = golden_max(&f, ts[bi - 1], ts[bi + 1]);
            if gv > bv {
                bt = gt;
                bv = gv;
            }
        } else if bi + 1 < ts.len() && bi == 0 {
            // maximum at the atom: check whether the true peak sits just off it
            let (gt, gv) = golden_max(&f, 0.0, ts[1]);
            if gv > bv {
                bt = gt;
                bv = gv;
            }
        }
        let samples = ts.iter().zip(&vals).map(|(&t, &v)| (k, dir * t, v)).collect();
        (samples, (k, dir * bt, bv))
    }
}

fn golden_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
        if (b - a).abs() <= 1e-15 * (a.abs() + b.abs()) {
            break;
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clark::{build_measure, WeightStrategy};
    use crate::sequences::SeparatedSequence;
    use proptest::prelude::*;

    fn model(a: &[f64], w: &[f64]) -> InnerFunctionModel {
        let s = SeparatedSequence::from_points(a.to_vec()).unwrap();
        let m = build_measure(&s, WeightStrategy::Custom, Some(w)).unwrap();
        InnerFunctionModel::clark(m, 0.0, EvaluationConfig::default()).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_atom_closed_forms() {
        let m = model(&[0.0], &[PI]);
        for z in [c(0.0, 1.0), c(0.3, 0.2), c(-4.0, 3.0), c(2.0, 0.0), c(-0.5, 0.0)] {
            let exact = -(z - Complex64::i()) / (z + Complex64::i());
            assert!((m.theta(z) - exact).norm() < 1e-15, "{z}");
        }
        assert_eq!(m.theta(c(0.0, 0.0)), c(1.0, 0.0));
        assert!(m.theta(c(0.0, 1.0)).norm() < 1e-16);
        for x in [0.0, 0.5, -3.0, 100.0] {
            assert!((m.theta_prime_abs(x) - 2.0 / (1.0 + x * x)).abs() < 1e-15);
        }
    }

    #[test]
    fn two_atom_values() {
        let m = model(&[-1.0, 1.0], &[1.0, 1.0]);
        assert!((m.theta(c(0.0, 1.0)) - c((1.0 - PI) / (1.0 + PI), 0.0)).norm() < 1e-15);
        assert!((m.theta_prime_abs(0.0) - 4.0 / PI).abs() < 1e-15);
        let b = m.boundary(1.0);
        assert_eq!(b.branch, Branch::AtomLimit);
        assert_eq!(b.phase_derivative, 2.0 * PI);
    }

    #[test]
    fn phase_increments() {
        let m = model(&[-1.0, 1.0], &[1.0, 1.0]);
        let p = m.phase_increment(-1.0, 1.0).unwrap();
        assert!((p.value - 2.0 * PI).abs() < 1e-10 && p.converged);
        let m = model(&[0.0], &[PI]);
        let p = m.phase_increment(-1e6, 1e6).unwrap();
        assert!((p.value - 4.0 * 1e6f64.atan()).abs() < 1e-9);
        let m = model(&[0.0, 4.0, 5.0, 6.0], &[1.0; 4]);
        let p = m.phase_increment(0.0, 6.0).unwrap();
        assert!((p.value - 6.0 * PI).abs() < 1e-9);
        assert!(m.phase_increment(1.0, 1.0).is_err());
    }

    #[test]
    fn exp_factor_adds_linear_phase() {
        let s = SeparatedSequence::from_points(vec![0.0]).unwrap();
        let meas = build_measure(&s, WeightStrategy::Custom, Some(&[PI])).unwrap();
        let m = InnerFunctionModel::clark(meas, 1.5, EvaluationConfig::default()).unwrap();
        assert!((m.theta_prime_abs(2.0) - (1.5 + 0.4)).abs() < 1e-15);
        let p = m.phase_increment(-1.0, 1.0).unwrap();
        assert!((p.value - (3.0 + 4.0 * 1f64.atan())).abs() < 1e-10);
        let z = c(0.4, 0.7);
        assert!((m.theta(z.conj()) * m.theta(z).conj() - 1.0).norm() < 1e-12);
    }

    #[test]
    fn sup_examples() {
        let m = model(&[0.0], &[PI]);
        let r = m.sup_derivative((-10.0, 10.0)).unwrap();
        assert!((r.sup - 2.0).abs() < 1e-15 && r.argmax == 0.0);
        // the peak sits just inside each atom, slightly above the atom value 2π
        let m = model(&[-1.0, 1.0], &[1.0, 1.0]);
        let r = m.sup_derivative((-5.0, 5.0)).unwrap();
        let grid = (0..=100_000).map(|i| -5.0 + 1e-4 * i as f64).map(|x| m.theta_prime_abs(x)).fold(0.0, f64::max);
        assert!(r.sup >= grid - 1e-12 && r.sup <= grid * (1.0 + 1e-6));
        assert!(r.sup > 2.0 * PI && (r.argmax.abs() - 0.9466).abs() < 1e-3);
        assert!(m.sup_derivative((2.0, 3.0)).is_err());
    }

    #[test]
    fn sup_finds_interior_peak() {
        // heavy outer atoms, light inner one: the inner atom value 2π/0.01 dominates
        let m = model(&[-1.0, 0.0, 1.0], &[5.0, 0.01, 5.0]);
        let r = m.sup_derivative((-2.0, 2.0)).unwrap();
        assert!((r.sup - 200.0 * PI).abs() < 1e-9);
        // a nearly-real zero produces an off-atom peak
        let m = model(&[0.0, 10.0, 10.5], &[10.0, 0.5, 0.5]);
        let r = m.sup_derivative((-1.0, 11.0)).unwrap();
        let grid = (0..=1_200_000).map(|i| -1.0 + 1e-5 * i as f64).map(|x| m.theta_prime_abs(x)).fold(0.0, f64::max);
        assert!(r.sup >= grid * (1.0 - 1e-9));
    }

    #[test]
    fn json_round_trip() {
        let m = model(&[-1.0, 1.0], &[1.0, 2.0]);
        let back = InnerFunctionModel::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
        assert!(InnerFunctionModel::from_json(r#"{"kind":"clark","exp_factor":0.0}"#).is_err());
        let neg = m.to_json().unwrap().replace("\"exp_factor\": 0.0", "\"exp_factor\": -1.0");
        assert!(InnerFunctionModel::from_json(&neg).is_err());
    }

    fn arb_model() -> impl Strategy<Value = InnerFunctionModel> {
        prop::collection::vec((0.5f64..4.0, 0.1f64..10.0), 1..20).prop_map(|v| {
            let mut a = -10.0;
            let (mut pos, mut w) = (Vec::new(), Vec::new());
            for (g, wt) in v {
                a += g;
                pos.push(a);
                w.push(wt);
            }
            model(&pos, &w)
        })
    }

    proptest! {
        #[test]
        fn unimodular_and_positive(m in arb_model(), x in -30.0f64..30.0) {
            let b = m.boundary(x);
            prop_assert!((b.theta.norm() - 1.0).abs() < 1e-12);
            prop_assert!(b.phase_derivative > 0.0);
        }

        #[test]
        fn antisymmetry_and_contraction(m in arb_model(), x in -30.0f64..30.0, y in 1e-4f64..20.0) {
            let z = c(x, y);
            let t = m.theta(z);
            prop_assert!(t.norm() <= 1.0);
            prop_assert!((m.theta(z.conj()) * t.conj() - 1.0).norm() < 1e-10);
        }

        #[test]
        fn local_formula_matches_global(m in arb_model(), x in -30.0f64..30.0) {
            let k = m.measure().nearest_atom(x);
            prop_assume!((x - m.measure().positions()[k]).abs() > 1e-2);
            let s = crate::transform::boundary_s(m.measure(), x, m.config()).unwrap();
            let th = c(-1.0, s) / c(1.0, s);
            prop_assert!((th - m.boundary(x).theta).norm() < 1e-10);
            let d = crate::transform::raw_derivative_sum(m.measure(), c(x, 0.0)).re;
            let expected = 2.0 / PI * d / (1.0 + s * s);
            prop_assert!((expected - m.theta_prime_abs(x)).abs() <= 1e-10 * expected);
        }
    }
}
