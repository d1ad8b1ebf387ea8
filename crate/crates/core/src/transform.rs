//! Cauchy transform `Kμ(z) = (1/πi) Σ [w_n/(a_n - z) - w_n a_n/(1 + a_n²)]`.
//!
//! On the real line the transform is purely imaginary, `Kμ(x) = i s(x)`.

use crate::clark::ClarkMeasure;
use crate::error::{Error, Result};
use crate::sum::{ComplexSum, NeumaierSum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// `w a / (1 + a²)`, stable for huge `|a|`.
#[inline]
pub(crate) fn compensator(a: f64, w: f64) -> f64 {
    if a.abs() >= 1.0 {
        let u = 1.0 / a;
        w * u / (1.0 + u * u)
    } else {
        w * a / (1.0 + a * a)
    }
}

/// `w/(a - x) - w a/(1 + a²) = w (1 + a x) / ((a - x)(1 + a²))` with `a - x` given.
#[inline]
pub(crate) fn term_real(a: f64, w: f64, x: f64, diff: f64) -> f64 {
    if a.abs() >= 1.0 {
        let u = 1.0 / a;
        w * u * (u + x) / ((1.0 + u * u) * diff)
    } else {
        w * (1.0 + a * x) / ((1.0 + a * a) * diff)
    }
}

#[inline]
pub(crate) fn term_complex(a: f64, w: f64, z: Complex64) -> Complex64 {
    let diff = Complex64::new(a - z.re, -z.im);
    if a.abs() >= 1.0 {
        let u = 1.0 / a;
        (z + u) * (w * u / (1.0 + u * u)) / diff
    } else {
        (z * a + 1.0) * (w / (1.0 + a * a)) / diff
    }
}

/// `Σ term_n(z)`; `Kμ(z) = -i/π` times this.
pub(crate) fn raw_sum(m: &ClarkMeasure, z: Complex64) -> Complex64 {
    let mut acc = ComplexSum::new();
    for (&a, &w) in m.positions().iter().zip(m.weights()) {
        acc += term_complex(a, w, z);
    }
    acc.sum()
}

/// `Σ w_n / (a_n - z)²`.
pub(crate) fn raw_derivative_sum(m: &ClarkMeasure, z: Complex64) -> Complex64 {
    let mut acc = ComplexSum::new();
    for (&a, &w) in m.positions().iter().zip(m.weights()) {
        let d = Complex64::new(a - z.re, -z.im);
        acc += w / d / d;
    }
    acc.sum()
}

const NEG_I_OVER_PI: Complex64 = Complex64 { re: 0.0, im: -1.0 / PI };

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvaluationConfig {
    pub rel_tolerance: f64,
    /// Fixed radius; `None` means `max(1e-8, 1e-6 · separation)`.
    pub atom_exclusion_radius: Option<f64>,
    pub max_terms: usize,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self { rel_tolerance: 1e-9, atom_exclusion_radius: None, max_terms: 10_000_000 }
    }
}

impl EvaluationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tolerance > 0.0 && self.rel_tolerance <= 1e-2) {
            return Err(Error::Parameter(format!("rel_tolerance {} outside (0, 1e-2]", self.rel_tolerance)));
        }
        if let Some(r) = self.atom_exclusion_radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::Parameter(format!("exclusion radius {r} must be positive")));
            }
        }
        if self.max_terms == 0 {
            return Err(Error::Parameter("max_terms must be positive".into()));
        }
        Ok(())
    }

    pub fn exclusion_radius(&self, separation: f64) -> f64 {
        self.atom_exclusion_radius.unwrap_or_else(|| (1e-6 * separation).max(1e-8))
    }
}

/// How the truncated part of an infinite spectrum was accounted for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TailStatus {
    /// Integral-comparison bound on the missing terms, within tolerance.
    Bounded { bound: f64 },
    /// Bound available but larger than the tolerance allows.
    ToleranceNotMet { bound: Option<f64> },
    /// No family information: the value is exact for the stored window only.
    WindowOnly,
}

impl TailStatus {
    pub fn tolerance_met(&self) -> bool {
        !matches!(self, TailStatus::ToleranceNotMet { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub value: Complex64,
    pub tail: TailStatus,
}

fn check_args(m: &ClarkMeasure, z: Complex64, cfg: &EvaluationConfig) -> Result<()> {
    cfg.validate()?;
    if m.len() > cfg.max_terms {
        return Err(Error::Range(format!("{} atoms exceed max_terms {}", m.len(), cfg.max_terms)));
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Parameter(format!("non-finite evaluation point {z}")));
    }
    let k = m.nearest_atom(z.re);
    let a = m.positions()[k];
    if z.im == 0.0 && (z.re - a).abs() < cfg.exclusion_radius(m.separation()) {
        return Err(Error::Pole { x: z.re, atom: k, position: a });
    }
    Ok(())
}

/// Tail classification for a sum whose missing terms are bounded by `envelope`.
fn tail_status(
    m: &ClarkMeasure,
    scale: f64,
    cfg: &EvaluationConfig,
    bound: impl FnOnce(&crate::clark::TailModel) -> Option<f64>,
) -> TailStatus {
    match m.tail_model() {
        None => TailStatus::WindowOnly,
        Some(t) => match bound(t) {
            Some(b) if b <= cfg.rel_tolerance * scale => TailStatus::Bounded { bound: b },
            b => TailStatus::ToleranceNotMet { bound: b },
        },
    }
}

/// Windowed Cauchy transform with compensated summation and a tail report.
pub fn cauchy_transform(m: &ClarkMeasure, z: Complex64, cfg: &EvaluationConfig) -> Result<Evaluation> {
    check_args(m, z, cfg)?;
    let raw = raw_sum(m, z);
    let r = z.norm();
    let tail = tail_status(m, raw.norm(), cfg, |t| {
        t.bound(
            |a, w| term_complex(a, w, z).norm(),
            |a, w| w * (1.0 + a * r) / ((a - r) * (1.0 + a * a)),
            r,
        )
    });
    Ok(Evaluation { value: raw * NEG_I_OVER_PI, tail })
}

/// `Kμ'(z) = (1/πi) Σ w_n / (a_n - z)²`.
pub fn cauchy_derivative(m: &ClarkMeasure, z: Complex64, cfg: &EvaluationConfig) -> Result<Evaluation> {
    check_args(m, z, cfg)?;
    let raw = raw_derivative_sum(m, z);
    let r = z.norm();
    let tail = tail_status(m, raw.norm(), cfg, |t| {
        t.bound(
            |a, w| w / Complex64::new(a - z.re, -z.im).norm_sqr(),
            |a, w| w / ((a - r) * (a - r)),
            r,
        )
    });
    Ok(Evaluation { value: raw * NEG_I_OVER_PI, tail })
}

/// `s(x)` with `Kμ(x) = i s(x)` on the real line.
pub fn boundary_s(m: &ClarkMeasure, x: f64, cfg: &EvaluationConfig) -> Result<f64> {
    check_args(m, Complex64::new(x, 0.0), cfg)?;
    let mut acc = NeumaierSum::new();
    for (&a, &w) in m.positions().iter().zip(m.weights()) {
        acc += term_real(a, w, x, a - x);
    }
    Ok(-acc.sum() / PI)
}

/// Evaluates the transform at many points; order of the output matches the input.
pub fn cauchy_transform_batch(m: &ClarkMeasure, zs: &[Complex64], cfg: &EvaluationConfig) -> Vec<Result<Complex64>> {
    use rayon::prelude::*;
    zs.par_iter()
        .map(|&z| {
            check_args(m, z, cfg)?;
            Ok(raw_sum(m, z) * NEG_I_OVER_PI)
        })
        .collect()
}
