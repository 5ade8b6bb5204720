//! Special functions used by the closed forms: the real dilogarithm on
//! `[-1, 0]`, the Riemann zeta function for real `s > 1`, and `ln(1 + x)`.

use crate::error::{Error, Result};
use crate::summation::CompensatedSum;
use serde::Serialize;

/// A value together with a bound on its truncation error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EvalResult {
    pub value: f64,
    /// Upper bound on the truncation error plus a few ulps of rounding.
    pub est_error: f64,
    pub terms_used: u32,
}

/// Past this magnitude the dilogarithm is evaluated through the reflection
/// `Li2(z) = -Li2(z/(z-1)) - ln^2(1-z)/2`, which keeps both branches under
/// 60 series terms.
const DILOG_REFLECTION: f64 = 0.5;

/// Real dilogarithm `Li2(z) = sum_{k>0} z^k / k^2` for `z` in `[-1, 0]`.
pub fn dilog(z: f64) -> Result<EvalResult> {
    if !(-1.0..=0.0).contains(&z) {
        return Err(Error::invalid(format!(
            "dilog argument {z} outside [-1, 0]"
        )));
    }
    if z == 0.0 {
        return Ok(EvalResult {
            value: 0.0,
            est_error: 0.0,
            terms_used: 0,
        });
    }
    if z.abs() <= DILOG_REFLECTION {
        // alternating with decreasing magnitude: remainder below the first omitted term
        let (value, next, terms) = power_series_li2(z);
        return Ok(EvalResult {
            value,
            est_error: next + 4.0 * f64::EPSILON * value.abs(),
            terms_used: terms,
        });
    }
    let w = z / (z - 1.0);
    let (li2_w, next, terms) = power_series_li2(w);
    // positive terms whose ratio stays below w
    let remainder = next / (1.0 - w);
    let log_term = (-z).ln_1p();
    let value = -li2_w - 0.5 * log_term * log_term;
    Ok(EvalResult {
        value,
        est_error: remainder + 8.0 * f64::EPSILON * value.abs(),
        terms_used: terms,
    })
}

/// Sums `x^k/k^2` until the next term is negligible; returns (sum, |next term|, terms).
fn power_series_li2(x: f64) -> (f64, f64, u32) {
    let mut acc = CompensatedSum::new();
    let mut power = x;
    let mut k = 1u32;
    loop {
        let kf = k as f64;
        let term = power / (kf * kf);
        acc.add(term);
        power *= x;
        let next = (power / ((kf + 1.0) * (kf + 1.0))).abs();
        if next <= 0.25 * f64::EPSILON * acc.value().abs() || next == 0.0 {
            return (acc.value(), next, k);
        }
        k += 1;
    }
}

/// Bernoulli numbers B_2, B_4, ..., B_10.
const BERNOULLI_EVEN: [f64; 5] = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0];

const ZETA_DIRECT_TERMS: u32 = 20;
const ZETA_CORRECTIONS: usize = 4;

/// Riemann zeta for real `s > 1`: direct sum below `n0 = 20`, then the
/// Euler–Maclaurin tail with four Bernoulli corrections. The first omitted
/// correction bounds the remainder because every derivative of `x^-s` keeps
/// a fixed sign.
pub fn zeta(s: f64) -> Result<EvalResult> {
    if !(s > 1.0) {
        return Err(Error::invalid(format!("zeta(s) requires s > 1, got {s}")));
    }
    let n0 = ZETA_DIRECT_TERMS;
    let mut acc = CompensatedSum::new();
    for n in 1..n0 {
        acc.add((n as f64).powf(-s));
    }
    let big_n = n0 as f64;
    let n_pow = big_n.powf(-s);
    acc.add(big_n * n_pow / (s - 1.0));
    acc.add(0.5 * n_pow);

    // rising factorial s (s+1) ... (s+2j-2), accumulated two factors at a time
    let mut rising = s;
    let mut factorial = 2.0;
    let mut n_power = n_pow / big_n;
    let mut omitted = 0.0;
    for (j, b) in BERNOULLI_EVEN.iter().enumerate() {
        let term = b / factorial * rising * n_power;
        if j < ZETA_CORRECTIONS {
            acc.add(term);
        } else {
            omitted = term.abs();
        }
        let m = 2.0 * j as f64;
        rising *= (s + m + 1.0) * (s + m + 2.0);
        factorial *= (m + 3.0) * (m + 4.0);
        n_power /= big_n * big_n;
    }
    let value = acc.value();
    Ok(EvalResult {
        value,
        est_error: omitted + 4.0 * f64::EPSILON * value,
        terms_used: n0 + ZETA_CORRECTIONS as u32 + 1,
    })
}

/// `ln(1 + x)` for `x > -1`, accurate for tiny `|x|`.
pub fn ln1p(x: f64) -> Result<f64> {
    if !(x > -1.0) {
        return Err(Error::invalid(format!("ln1p requires x > -1, got {x}")));
    }
    Ok(x.ln_1p())
}
