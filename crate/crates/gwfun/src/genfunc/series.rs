//! Truncated power series over complex coefficients.
//!
//! A series carries coefficients for z^0 through z^N and nothing beyond;
//! every operation stays inside that window, and binary operations on
//! mismatched orders truncate to the smaller one. Division and the
//! logarithmic derivative are the only fallible operations: both need a
//! nonzero coefficient to divide out.

use num_complex::Complex64;

use crate::error::{GwError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TruncSeries {
    coeffs: Vec<Complex64>,
}

impl TruncSeries {
    pub fn zero(order: usize) -> TruncSeries {
        TruncSeries {
            coeffs: vec![Complex64::new(0.0, 0.0); order + 1],
        }
    }

    pub fn constant(c: Complex64, order: usize) -> TruncSeries {
        let mut s = TruncSeries::zero(order);
        s.coeffs[0] = c;
        s
    }

    /// Series with the given coefficients; the order is one less than the
    /// length, so the vector must be nonempty.
    pub fn from_coeffs(coeffs: Vec<Complex64>) -> TruncSeries {
        assert!(!coeffs.is_empty());
        TruncSeries { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient of z^n; zero beyond the truncation order.
    pub fn coeff(&self, n: usize) -> Complex64 {
        self.coeffs.get(n).copied().unwrap_or_default()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn set_coeff(&mut self, n: usize, c: Complex64) {
        self.coeffs[n] = c;
    }

    pub fn truncated(&self, order: usize) -> TruncSeries {
        let mut coeffs = self.coeffs.clone();
        coeffs.truncate(order + 1);
        coeffs.resize(order + 1, Complex64::new(0.0, 0.0));
        TruncSeries { coeffs }
    }

    pub fn add(&self, other: &TruncSeries) -> TruncSeries {
        let order = self.order().min(other.order());
        let mut out = TruncSeries::zero(order);
        for n in 0..=order {
            out.coeffs[n] = self.coeffs[n] + other.coeffs[n];
        }
        out
    }

    pub fn sub(&self, other: &TruncSeries) -> TruncSeries {
        let order = self.order().min(other.order());
        let mut out = TruncSeries::zero(order);
        for n in 0..=order {
            out.coeffs[n] = self.coeffs[n] - other.coeffs[n];
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> TruncSeries {
        TruncSeries {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// Cauchy product, truncated to the smaller order.
    pub fn mul(&self, other: &TruncSeries) -> TruncSeries {
        let order = self.order().min(other.order());
        let mut out = TruncSeries::zero(order);
        for i in 0..=order {
            let a = self.coeffs[i];
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..=order - i {
                out.coeffs[i + j] += a * other.coeffs[j];
            }
        }
        out
    }

    /// Elementwise coefficient product.
    pub fn hadamard(&self, other: &TruncSeries) -> TruncSeries {
        let order = self.order().min(other.order());
        let mut out = TruncSeries::zero(order);
        for n in 0..=order {
            out.coeffs[n] = self.coeffs[n] * other.coeffs[n];
        }
        out
    }

    /// Multiplication by z at fixed order; the top coefficient falls off.
    pub fn shift_up(&self) -> TruncSeries {
        let mut out = TruncSeries::zero(self.order());
        for n in 1..=self.order() {
            out.coeffs[n] = self.coeffs[n - 1];
        }
        out
    }

    /// 1 / self, requiring a nonzero constant term.
    pub fn recip(&self) -> Result<TruncSeries> {
        TruncSeries::constant(Complex64::new(1.0, 0.0), self.order()).div(self)
    }

    /// self / other by long division, requiring other to have a nonzero
    /// constant term.
    pub fn div(&self, other: &TruncSeries) -> Result<TruncSeries> {
        let b0 = other.coeffs[0];
        if b0 == Complex64::new(0.0, 0.0) {
            return Err(GwError::DivisionByZeroLeadingCoefficient);
        }
        let order = self.order().min(other.order());
        let mut out = TruncSeries::zero(order);
        for n in 0..=order {
            let mut acc = self.coeffs[n];
            for k in 1..=n {
                acc -= other.coeffs[k] * out.coeffs[n - k];
            }
            out.coeffs[n] = acc / b0;
        }
        Ok(out)
    }

    /// exp(self). A nonzero constant term is factored out as a scalar
    /// exp; the rest runs the derivative recurrence n e_n = sum k a_k
    /// e_{n-k}.
    pub fn exp_series(&self) -> TruncSeries {
        let order = self.order();
        let mut out = TruncSeries::zero(order);
        out.coeffs[0] = Complex64::new(1.0, 0.0);
        for n in 1..=order {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 1..=n {
                acc += (k as f64) * self.coeffs[k] * out.coeffs[n - k];
            }
            out.coeffs[n] = acc / n as f64;
        }
        let a0 = self.coeffs[0];
        if a0 != Complex64::new(0.0, 0.0) {
            out = out.scale(a0.exp());
        }
        out
    }

    /// z self'(z) / self(z) for a series with zero constant term and
    /// nonzero z coefficient; the valuation-1 factor is divided out first,
    /// which costs one order of truncation.
    pub fn zlogderiv(&self) -> Result<TruncSeries> {
        if self.order() < 1
            || self.coeffs[0] != Complex64::new(0.0, 0.0)
            || self.coeffs[1] == Complex64::new(0.0, 0.0)
        {
            return Err(GwError::DivisionByZeroLeadingCoefficient);
        }
        let order = self.order() - 1;
        let mut num = TruncSeries::zero(order);
        let mut den = TruncSeries::zero(order);
        for n in 0..=order {
            num.coeffs[n] = ((n + 1) as f64) * self.coeffs[n + 1];
            den.coeffs[n] = self.coeffs[n + 1];
        }
        num.div(&den)
    }
}

pub fn series_mul(a: &TruncSeries, b: &TruncSeries) -> TruncSeries {
    a.mul(b)
}

pub fn series_hadamard(a: &TruncSeries, b: &TruncSeries) -> TruncSeries {
    a.hadamard(b)
}

pub fn series_zlogderiv(a: &TruncSeries) -> Result<TruncSeries> {
    a.zlogderiv()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn real_series(vals: &[f64]) -> TruncSeries {
        TruncSeries::from_coeffs(vals.iter().map(|&v| c(v, 0.0)).collect())
    }

    #[test]
    fn mul_by_one_minus_z_telescopes() {
        // (1 - z) * sum z^n = 1
        let ones = real_series(&[1.0; 12]);
        let lin = {
            let mut s = TruncSeries::zero(11);
            s.set_coeff(0, c(1.0, 0.0));
            s.set_coeff(1, c(-1.0, 0.0));
            s
        };
        let prod = lin.mul(&ones);
        assert_eq!(prod.coeff(0), c(1.0, 0.0));
        for n in 1..=11 {
            assert_eq!(prod.coeff(n), c(0.0, 0.0));
        }
    }

    #[test]
    fn hadamard_with_geometric_is_identity() {
        // 1/(1-z) has all coefficients 1, so it is the Hadamard unit
        let a = TruncSeries::from_coeffs(
            (0..10)
                .map(|n| c((n as f64).powi(3) + 0.25, -0.5 * n as f64))
                .collect(),
        );
        let ones = real_series(&[1.0; 10]);
        assert_eq!(a.hadamard(&ones), a);
    }

    #[test]
    fn division_round_trip() {
        let b = TruncSeries::from_coeffs(
            (0..16)
                .map(|n| c(2.0 - 0.3 * n as f64, 0.1 * (n as f64).sin()))
                .collect(),
        );
        let r = b.recip().unwrap();
        let prod = b.mul(&r);
        assert_abs_diff_eq!(prod.coeff(0).re, 1.0, epsilon = 1e-14);
        for n in 1..=15 {
            assert_abs_diff_eq!(prod.coeff(n).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn division_needs_nonzero_constant() {
        let a = real_series(&[1.0, 2.0, 3.0]);
        let b = real_series(&[0.0, 1.0, 0.0]);
        assert_eq!(
            a.div(&b).unwrap_err(),
            GwError::DivisionByZeroLeadingCoefficient
        );
    }

    #[test]
    fn exp_of_linear_term_gives_factorials() {
        // exp(c z) has coefficients c^n / n!
        let lam = c(0.7, 0.4);
        let mut a = TruncSeries::zero(14);
        a.set_coeff(1, lam);
        let e = a.exp_series();
        let mut expect = c(1.0, 0.0);
        for n in 0..=14 {
            assert_abs_diff_eq!((e.coeff(n) - expect).norm(), 0.0, epsilon = 1e-14);
            expect = expect * lam / (n as f64 + 1.0);
        }
    }

    #[test]
    fn exp_factors_out_constant_term() {
        let mut a = TruncSeries::zero(8);
        a.set_coeff(0, c(-1.0, 0.0));
        a.set_coeff(1, c(1.0, 0.0));
        let e = a.exp_series();
        assert_abs_diff_eq!(e.coeff(0).re, (-1.0f64).exp(), epsilon = 1e-16);
        assert_abs_diff_eq!(e.coeff(3).re, (-1.0f64).exp() / 6.0, epsilon = 1e-16);
    }

    #[test]
    fn zlogderiv_of_pure_power() {
        // z d/dz log(c z (1 + z)) = 1 + z/(1+z) = 1 + z - z^2 + z^3 - ...
        let mut a = TruncSeries::zero(10);
        a.set_coeff(1, c(3.0, 0.0));
        a.set_coeff(2, c(3.0, 0.0));
        let w = a.zlogderiv().unwrap();
        assert_abs_diff_eq!(w.coeff(0).re, 1.0, epsilon = 1e-15);
        for n in 1..=9 {
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            assert_abs_diff_eq!(w.coeff(n).re, sign, epsilon = 1e-12);
        }
    }

    #[test]
    fn zlogderiv_requires_valuation_one() {
        assert_eq!(
            real_series(&[1.0, 1.0]).zlogderiv().unwrap_err(),
            GwError::DivisionByZeroLeadingCoefficient
        );
        assert_eq!(
            real_series(&[0.0, 0.0, 1.0]).zlogderiv().unwrap_err(),
            GwError::DivisionByZeroLeadingCoefficient
        );
    }

    #[test]
    fn mismatched_orders_truncate_to_smaller() {
        let a = real_series(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let b = real_series(&[1.0, 1.0]);
        assert_eq!(a.add(&b).order(), 1);
        assert_eq!(a.mul(&b).order(), 1);
        assert_eq!(a.hadamard(&b).order(), 1);
        assert_eq!(a.mul(&b).coeff(1), c(3.0, 0.0));
    }
}
