//! Neumaier-compensated accumulators.
//!
//! Every coefficient sum in the crate goes through these; the double series
//! can run to ~10^9 terms at small `alpha`.

use num_complex::Complex64;
use std::iter::Sum;
use std::ops::AddAssign;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl AddAssign<f64> for CompensatedSum {
    #[inline]
    fn add_assign(&mut self, rhs: f64) {
        self.add(rhs);
    }
}

impl AddAssign<CompensatedSum> for CompensatedSum {
    fn add_assign(&mut self, rhs: CompensatedSum) {
        self.add(rhs.sum);
        self.add(rhs.comp);
    }
}

impl Sum<f64> for CompensatedSum {
    fn sum<I: Iterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator of reals.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().sum::<CompensatedSum>().value()
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ComplexSum {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl ComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

impl AddAssign<Complex64> for ComplexSum {
    #[inline]
    fn add_assign(&mut self, rhs: Complex64) {
        self.add(rhs);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_small_terms_lost_by_naive_summation() {
        let xs = [1.0, 1e100, 1.0, -1e100];
        let naive: f64 = xs.iter().sum();
        assert_eq!(naive, 0.0);
        assert_eq!(compensated_sum(xs), 2.0);
    }

    #[test]
    fn long_alternating_harmonic_series() {
        // sum_{k>=1} (-1)^{k+1}/k = ln 2; partial sum error ~ 1/(2n)
        let n = 1_000_000u32;
        let s = compensated_sum((1..=n).map(|k| if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64));
        let expected = std::f64::consts::LN_2 - 0.5 / n as f64;
        assert!((s - expected).abs() < 1e-12, "{s} vs {expected}");
    }

    #[test]
    fn complex_accumulator() {
        let mut acc = ComplexSum::new();
        acc += Complex64::new(1e16, 1.0);
        acc += Complex64::new(1.0, 1e-16);
        acc += Complex64::new(-1e16, -1.0);
        let v = acc.value();
        assert_eq!(v.re, 1.0);
        assert!((v.im - 1e-16).abs() < 1e-30);
    }
}
