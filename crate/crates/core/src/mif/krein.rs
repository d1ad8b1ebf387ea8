//! Krein shift models.
//!
//! Over a window of atoms `a_1 < … < a_M` with midpoints `b_j`, the step
//! function `u = 1_E - 1/2`, `E = ∪ (a_j, b_j)`, gives
//!
//! ```text
//! F(z) = exp(πi (Ku(z) + ic)),    πi Ku(z) = Σ v [ln(q - z) - ln(p - z)] - comp
//! ```
//!
//! summed over the pieces `(p, q, v)` of `u`. The atom weights are the residues
//! of `1/F` at the `a_n`, which reduce to closed-form logarithms per cell.

use super::InnerFunctionModel;
use crate::clark::{ClarkMeasure, WeightStrategy};
use crate::error::{Error, Result};
use crate::quad::{integrate_with_breaks, QuadConfig};
use crate::sequences::{IndexWindow, SeparatedSequence};
use crate::sum::{ComplexSum, NeumaierSum};
use crate::transform::EvaluationConfig;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Piecewise constant function `Σ v·1_(p,q)` with its regularized Cauchy integral.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    pub pieces: Vec<(f64, f64, f64)>,
}

/// `ln((1+q²)/(1+p²))` without cancellation.
fn ln_norm_ratio(p: f64, q: f64) -> f64 {
    ((q - p) * (q + p) / (1.0 + p * p)).ln_1p()
}

/// Principal `ln(p - z)` with the boundary taken from above (`z = x + i0`).
fn ln_from_above(p: f64, z: Complex64) -> Complex64 {
    Complex64::new(p - z.re, -z.im - 0.0).ln()
}

impl StepFunction {
    pub fn new(pieces: Vec<(f64, f64, f64)>) -> Result<Self> {
        if pieces.iter().any(|&(p, q, v)| !(p < q) || !v.is_finite()) {
            return Err(Error::Parameter("step pieces need p < q and finite values".into()));
        }
        Ok(Self { pieces })
    }

    /// `Σ v·½ ln((1+q²)/(1+p²))`, the real constant removed by the regularization.
    pub fn compensator(&self) -> f64 {
        let mut s = NeumaierSum::new();
        for &(p, q, v) in &self.pieces {
            s += 0.5 * v * ln_norm_ratio(p, q);
        }
        s.sum()
    }

    /// `πi Ku(z)` for `Im z ≥ 0`.
    pub fn pi_i_ku(&self, z: Complex64) -> Complex64 {
        let mut s = ComplexSum::new();
        for &(p, q, v) in &self.pieces {
            s += (ln_from_above(q, z) - ln_from_above(p, z)) * v;
        }
        s.sum() - self.compensator()
    }

    /// `Ku(z) = (1/πi) ∫ u(t) (1/(t-z) - t/(1+t²)) dt`.
    pub fn ku(&self, z: Complex64) -> Complex64 {
        self.pi_i_ku(z) / Complex64::new(0.0, PI)
    }

    /// `∫ u(t)/(t - x) dt` for real `x` off the support, by quadrature.
    pub fn real_integral_quadrature(&self, x: f64) -> f64 {
        let cfg = QuadConfig { abs_tol: 1e-15, rel_tol: 1e-13, max_intervals: 2000 };
        let mut s = NeumaierSum::new();
        for &(p, q, v) in &self.pieces {
            let near = if q <= x { q } else { p };
            let breaks: Vec<f64> = (0..40).map(|i| near + (near - x).abs() * 2f64.powi(i) * (q - p).signum()).collect();
            s += integrate_with_breaks(|t| v / (t - x), p, q, &breaks, &cfg).value;
        }
        s.sum()
    }
}

/// Krein interval system over a window of atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KreinModel {
    pub sequence: SeparatedSequence,
    pub window: IndexWindow,
    /// `b_0 < a_1 < b_1 < … < a_M < b_M`; the two ends are virtual half-gap extensions.
    pub midpoints: Vec<f64>,
    pub c: f64,
    pub derived_alpha: Vec<f64>,
    /// Residue estimates at the interior midpoints `b_1 … b_{M-1}` (derived by analogy).
    pub derived_beta: Vec<f64>,
    pub notes: Vec<String>,
}

impl KreinModel {
    pub fn atoms(&self) -> &[f64] {
        self.sequence.points()
    }

    pub fn step_function(&self) -> StepFunction {
        let a = self.atoms();
        let b = &self.midpoints;
        let pieces = (0..a.len()).flat_map(|j| [(b[j], a[j], -0.5), (a[j], b[j + 1], 0.5)]).collect();
        StepFunction { pieces }
    }

    /// `∫_cell_j u(t)/(t - x) dt` in closed form, `x` outside cell `j`.
    pub fn cell_integral(&self, j: usize, x: f64) -> f64 {
        let (bl, a, br) = (self.midpoints[j], self.atoms()[j], self.midpoints[j + 1]);
        -0.5 * ((a - bl) / (bl - x)).ln_1p() + 0.5 * ((br - a) / (a - x)).ln_1p()
    }

    pub fn cell_integral_quadrature(&self, j: usize, x: f64) -> f64 {
        let (bl, a, br) = (self.midpoints[j], self.atoms()[j], self.midpoints[j + 1]);
        StepFunction { pieces: vec![(bl, a, -0.5), (a, br, 0.5)] }.real_integral_quadrature(x)
    }

    /// Largest gap between closed-form and quadrature cell integrals over a
    /// strided sample of (cell, atom) pairs.
    pub fn log_integral_discrepancy(&self, max_pairs: usize) -> f64 {
        let m = self.atoms().len();
        let stride = ((m * m) as f64 / max_pairs.max(1) as f64).sqrt().ceil().max(1.0) as usize;
        let mut worst: f64 = 0.0;
        for n in (0..m).step_by(stride) {
            for j in (0..m).step_by(stride).filter(|&j| j != n) {
                let x = self.atoms()[n];
                let d = (self.cell_integral(j, x) - self.cell_integral_quadrature(j, x)).abs();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// `F(z) = exp(πi Ku(z) - πc)`.
    pub fn f(&self, z: Complex64) -> Complex64 {
        (self.step_function().pi_i_ku(z) - PI * self.c).exp()
    }

    pub(crate) fn measure(&self) -> Result<ClarkMeasure> {
        ClarkMeasure::new(self.sequence.clone(), self.derived_alpha.clone(), WeightStrategy::KreinResidue)
    }

    fn check(&self) -> Result<()> {
        let a = self.atoms();
        let b = &self.midpoints;
        if b.len() != a.len() + 1 || self.derived_alpha.len() != a.len() || self.derived_beta.len() + 1 != a.len() {
            return Err(Error::Invariant("krein data lengths disagree".into()));
        }
        for (j, &aj) in a.iter().enumerate() {
            if !(b[j] < aj && aj < b[j + 1]) {
                return Err(Error::Invariant(format!("midpoints do not interlace at atom {j}")));
            }
        }
        if self.derived_alpha.iter().chain(&self.derived_beta).any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::Invariant("residue estimates must be positive and finite".into()));
        }
        Ok(())
    }
}

/// Builds the Krein shift model on `window` and returns it as an inner function.
pub fn krein_build(seq: &SeparatedSequence, window: IndexWindow, c: f64) -> Result<InnerFunctionModel> {
    if !c.is_finite() {
        return Err(Error::Parameter(format!("krein constant must be finite, got {c}")));
    }
    let sub = seq.restrict(window)?;
    let a = sub.points().to_vec();
    let m = a.len();
    if m < 3 {
        return Err(Error::InsufficientData(format!("krein build needs >= 3 atoms in {window}, got {m}")));
    }
    let mut b = Vec::with_capacity(m + 1);
    b.push(a[0] - 0.5 * (a[1] - a[0]));
    b.extend(a.windows(2).map(|w| w[0] + 0.5 * (w[1] - w[0])));
    b.push(a[m - 1] + 0.5 * (a[m - 1] - a[m - 2]));

    let mut model = KreinModel {
        sequence: sub,
        window,
        midpoints: b,
        c,
        derived_alpha: Vec::new(),
        derived_beta: Vec::new(),
        notes: vec![
            "u is zero outside the window; values are window approximations".into(),
            "derived_beta follows the atom residue route at midpoints (by analogy)".into(),
        ],
    };
    let comp = model.step_function().compensator();
    let shift = comp + PI * c;
    let (a, b) = (model.atoms().to_vec(), model.midpoints.clone());

    let outer = |x: f64, skip: &[usize]| -> f64 {
        let mut s = NeumaierSum::new();
        for j in (0..m).filter(|j| !skip.contains(j)) {
            s += model.cell_integral(j, x);
        }
        s.sum()
    };
    let alpha: Vec<f64> = (0..m)
        .map(|n| PI * ((b[n + 1] - a[n]) * (a[n] - b[n])).sqrt() * (outer(a[n], &[n]) - shift).exp())
        .collect();
    let beta: Vec<f64> = (0..m - 1)
        .map(|n| {
            let gap = a[n + 1] - a[n];
            let e = (outer(b[n + 1], &[n, n + 1]) - shift).exp();
            PI * gap * gap / (4.0 * ((b[n + 1] - b[n]) * (b[n + 2] - b[n + 1])).sqrt() * e)
        })
        .collect();
    model.derived_alpha = alpha;
    model.derived_beta = beta;
    model.check()?;
    branch_check(&model)?;
    InnerFunctionModel::from_krein(model, 0.0, EvaluationConfig::default())
}

/// On the real line `F` must be purely imaginary away from the atoms and midpoints.
fn branch_check(model: &KreinModel) -> Result<()> {
    let a = model.atoms();
    let m = a.len();
    let step = (m / 32).max(1);
    let sf = model.step_function();
    for j in (0..m).step_by(step) {
        for x in [0.5 * (model.midpoints[j] + a[j]), 0.5 * (a[j] + model.midpoints[j + 1])] {
            let im = sf.pi_i_ku(Complex64::new(x, 0.0)).im;
            if im.cos().abs() > 1e-8 {
                return Err(Error::NumericBranch(format!("boundary value of F at {x} is not imaginary")));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::{generate, Family};

    #[test]
    fn three_atom_layout_and_factors() {
        let s = SeparatedSequence::from_points(vec![0.0, 2.0, 4.0]).unwrap();
        let m = krein_build(&s, IndexWindow::new(1, 3), 0.0).unwrap();
        let k = m.krein_data().unwrap();
        assert_eq!(k.midpoints, vec![-1.0, 1.0, 3.0, 5.0]);
        // e^{πi K(u on cell 1)} = √((b_1 - z)(b_0 - z)) / (a_1 - z) up to the compensator
        let cell = StepFunction { pieces: vec![(1.0, 2.0, -0.5), (2.0, 3.0, 0.5)] };
        let z = Complex64::new(0.7, 0.4);
        let lhs = (cell.pi_i_ku(z) + cell.compensator()).exp();
        let rhs = ((Complex64::new(3.0, 0.0) - z) * (Complex64::new(1.0, 0.0) - z)).sqrt() / (2.0 - z);
        assert!((lhs - rhs).norm() < 1e-14);
        assert!(k.log_integral_discrepancy(100) < 1e-8);
        for j in 0..3 {
            for x in [-7.0, 8.5, 100.0] {
                assert!((k.cell_integral(j, x) - k.cell_integral_quadrature(j, x)).abs() < 1e-12);
            }
        }
        assert!(k.derived_alpha.iter().all(|&v| v > 0.0));
        assert_eq!(k.derived_beta.len(), 2);
    }

    #[test]
    fn spectrum_is_the_window() {
        let s = SeparatedSequence::from_points(vec![0.0, 1.0, 3.0, 4.5, 7.0]).unwrap();
        let m = krein_build(&s, IndexWindow::new(2, 5), 0.3).unwrap();
        assert_eq!(m.measure().positions(), &[1.0, 3.0, 4.5, 7.0]);
        for &a in m.measure().positions() {
            assert_eq!(m.theta(Complex64::new(a, 0.0)), Complex64::new(1.0, 0.0));
        }
        let back = InnerFunctionModel::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn alpha_matches_residue_of_one_over_f() {
        let s = SeparatedSequence::from_points(vec![0.0, 1.5, 2.5, 5.0, 6.0]).unwrap();
        let m = krein_build(&s, IndexWindow::new(1, 5), 0.2).unwrap();
        let k = m.krein_data().unwrap();
        // F = -Kμ, so |F(a + iy)| ≈ α / (π y) near atoms and |1/F| ≈ β / (π y) near midpoints
        for (n, &a) in k.atoms().iter().enumerate() {
            let y = 1e-7;
            let f = k.f(Complex64::new(a, y));
            let est = PI * y * f.norm();
            assert!((est / k.derived_alpha[n] - 1.0).abs() < 1e-5, "{n}");
        }
        for (n, w) in k.midpoints[1..k.midpoints.len() - 1].iter().enumerate() {
            let y = 1e-7;
            let f = k.f(Complex64::new(*w, y));
            let est = PI * y / f.norm();
            assert!((est / k.derived_beta[n] - 1.0).abs() < 1e-5, "{n}");
        }
    }

    #[test]
    fn constant_minus_half_has_constant_modulus() {
        let sf = StepFunction::new(vec![(-3.0, 3.0, -0.5)]).unwrap();
        for x in [-2.5, -1.0, 0.0, 0.3, 2.9] {
            let v = sf.ku(Complex64::new(x, 0.0)).exp().norm();
            assert!((v - (-0.5f64).exp()).abs() < 1e-14);
        }
        assert!(StepFunction::new(vec![(1.0, 1.0, 0.5)]).is_err());
    }

    #[test]
    fn log_gap_residues() {
        let s = generate(&Family::LogGap { a1: 10.0, c: 1.0 }, IndexWindow::new(1, 200)).unwrap();
        let m = krein_build(&s, IndexWindow::new(1, 200), 0.0).unwrap();
        let k = m.krein_data().unwrap();
        assert!(k.log_integral_discrepancy(400) < 1e-8);
    }

    #[test]
    fn rejects_small_windows() {
        let s = SeparatedSequence::from_points(vec![0.0, 1.0, 2.0]).unwrap();
        assert!(matches!(krein_build(&s, IndexWindow::new(1, 2), 0.0), Err(Error::InsufficientData(_))));
        assert!(krein_build(&s, IndexWindow::new(1, 3), f64::NAN).is_err());
    }
}
