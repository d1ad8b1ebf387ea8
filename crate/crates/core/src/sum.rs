//! Compensated (Neumaier) accumulation for real and complex sums.

use num_complex::Complex64;
use std::ops::AddAssign;

/// Real summator with protection against catastrophic cancellation.
#[derive(Debug, Default, Clone, Copy)]
pub struct NeumaierSum {
    s: f64,
    c: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn sum(&self) -> f64 {
        self.s + self.c
    }
}

impl AddAssign<f64> for NeumaierSum {
    #[inline]
    fn add_assign(&mut self, rhs: f64) {
        let t = self.s + rhs;
        if self.s.abs() >= rhs.abs() {
            self.c += (self.s - t) + rhs;
        } else {
            self.c += (rhs - t) + self.s;
        }
        self.s = t;
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::new();
        for x in iter {
            acc += x;
        }
        acc
    }
}

/// Componentwise compensated complex summator.
#[derive(Debug, Default, Clone, Copy)]
pub struct ComplexSum {
    re: NeumaierSum,
    im: NeumaierSum,
}

impl ComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn sum(&self) -> Complex64 {
        Complex64::new(self.re.sum(), self.im.sum())
    }
}

impl AddAssign<Complex64> for ComplexSum {
    #[inline]
    fn add_assign(&mut self, rhs: Complex64) {
        self.re += rhs.re;
        self.im += rhs.im;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_small_terms_next_to_large_ones() {
        let mut s = NeumaierSum::new();
        s += 1e100;
        s += 1.0;
        s += -1e100;
        assert_eq!(s.sum(), 1.0);
    }

    #[test]
    fn complex_parts_are_independent() {
        let mut s = ComplexSum::new();
        s += Complex64::new(1e20, 1.0);
        s += Complex64::new(3.0, -1e20);
        s += Complex64::new(-1e20, 1e20);
        assert_eq!(s.sum(), Complex64::new(3.0, 1.0));
    }
}
