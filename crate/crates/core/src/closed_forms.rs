//! Closed forms for the exponential family `C_n = e^{-alpha |n|}` and the
//! zeta-ratio `L_z` variance of the polynomial family `C_n = |n|^{-alpha}`.
//!
//! Exponential family, with `q = e^{-2 alpha}` and `t = tanh alpha`:
//!
//! - `|A|^2 = t / (2 pi)`
//! - `sigma_Lz^2 = 1 / (2 sinh^2 alpha) = 2 q / (1 - q)^2`
//! - `g(alpha) = -4 t ln(1 + e^{-alpha})`
//! - `sigma_phi^2 = pi^2/3 + 4 Li2(-e^{-alpha}) + g(alpha)`
//! - `<cos phi> = 1 / cosh alpha`, `<sin phi> = 0`
//! - `<cos 2 phi> = (1 + 2 t) q`
//! - `sigma_sin^2 = (1 - q)^2 / (2 (1 + q))`, `sigma_cos^2 = (1 - q)^3 / (2 (1 + q)^2)`
//! - `f(pi) = A tanh(alpha / 2)`
//!
//! Everything is written in `q` and `expm1` so nothing overflows at large
//! alpha and nothing cancels catastrophically at small alpha.

use crate::error::{Error, Result};
use crate::moments::phi_moments;
use crate::special::{dilog, zeta};
use crate::spectrum::{build_spectrum, BuildOptions, CoefficientFamily};
use crate::summation::CompensatedSum;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExpFamilyEval {
    pub alpha: f64,
    pub var_phi: f64,
    pub var_lz: f64,
    pub g_value: f64,
    pub dilog_value: f64,
    pub mean_cos: f64,
    pub var_sin: f64,
    pub var_cos: f64,
    pub mean_cos_sq: f64,
    pub mean_sin_sq: f64,
    pub norm_sq: f64,
    pub state_bound: f64,
    pub product_sq: f64,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "alpha = {alpha} must be positive and finite"
        )))
    }
}

/// `g(alpha) = -4 tanh(alpha) ln(1 + e^{-alpha})`.
pub fn g_function(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(-4.0 * alpha.tanh() * (-alpha).exp().ln_1p())
}

pub fn exp_closed(alpha: f64) -> Result<ExpFamilyEval> {
    check_alpha(alpha)?;
    let e = (-alpha).exp();
    let q = (-2.0 * alpha).exp();
    let one_minus_q = -(-2.0 * alpha).exp_m1();
    let t = alpha.tanh();

    let var_lz = 2.0 * q / (one_minus_q * one_minus_q);
    let g_value = g_function(alpha)?;
    let dilog_value = dilog(-e)?.value;
    let var_phi = PI * PI / 3.0 + 4.0 * dilog_value + g_value;

    let mean_cos = 2.0 * e / (1.0 + q);
    let cos2 = (1.0 + 2.0 * t) * q;
    let var_sin = one_minus_q * one_minus_q / (2.0 * (1.0 + q));
    let var_cos = one_minus_q.powi(3) / (2.0 * (1.0 + q) * (1.0 + q));
    let half = (0.5 * alpha).tanh();

    Ok(ExpFamilyEval {
        alpha,
        var_phi,
        var_lz,
        g_value,
        dilog_value,
        mean_cos,
        var_sin,
        var_cos,
        mean_cos_sq: 0.5 + 0.5 * cos2,
        mean_sin_sq: var_sin,
        norm_sq: t / (2.0 * PI),
        state_bound: 0.5 * (1.0 - t * half * half).abs(),
        product_sq: var_phi * var_lz,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PolyFamilyEval {
    pub alpha: f64,
    pub var_lz: f64,
    pub var_phi: f64,
    pub norm_sq: f64,
    pub product_sq: f64,
    /// Cutoff of the spectrum used for `var_phi`.
    pub cutoff: usize,
}

/// `|A|^2 = 1 / (4 pi zeta(2 alpha))`, defined for `alpha > 1/2`.
pub fn poly_norm_sq(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if alpha <= 0.5 {
        return Err(Error::invalid(format!(
            "polynomial family is not normalizable at alpha = {alpha} <= 1/2"
        )));
    }
    Ok(1.0 / (4.0 * PI * zeta(2.0 * alpha)?.value))
}

/// `sigma_Lz^2 = zeta(2 alpha - 2) / zeta(2 alpha)`, finite only for `alpha > 3/2`.
pub fn poly_var_lz(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if alpha <= 1.5 {
        return Err(Error::DivergentMoment {
            what: format!("sigma_Lz^2 of the polynomial family needs alpha > 3/2, got {alpha}"),
        });
    }
    Ok(zeta(2.0 * alpha - 2.0)?.value / zeta(2.0 * alpha)?.value)
}

pub fn poly_closed(alpha: f64) -> Result<PolyFamilyEval> {
    poly_closed_with(alpha, &BuildOptions::default())
}

/// As [`poly_closed`]; `opts` controls the spectrum behind `var_phi`.
pub fn poly_closed_with(alpha: f64, opts: &BuildOptions) -> Result<PolyFamilyEval> {
    let norm_sq = poly_norm_sq(alpha)?;
    let var_lz = poly_var_lz(alpha)?;
    let s = build_spectrum(&CoefficientFamily::polynomial(), alpha, opts)?;
    let var_phi = phi_moments(&s).var;
    Ok(PolyFamilyEval {
        alpha,
        var_lz,
        var_phi,
        norm_sq,
        product_sq: var_phi * var_lz,
        cutoff: s.cutoff(),
    })
}

/// `xi(alpha) = 2 sum_{k>=1} (-1)^k / k^2 (coth alpha + k) e^{-alpha k}`.
///
/// Term magnitudes decrease in `k`, so the first omitted term bounds the
/// remainder; summation stops once that bound is below 1e-16 of the running
/// value (or absolutely below 1e-300).
pub fn exp_xi_resummed(alpha: f64, k_max: u64) -> Result<f64> {
    check_alpha(alpha)?;
    let coth = 1.0 / alpha.tanh();
    let term = |k: u64| {
        let kf = k as f64;
        2.0 * (coth + kf) * (-alpha * kf).exp() / (kf * kf)
    };
    let mut acc = CompensatedSum::new();
    for k in 1..=k_max {
        let t = term(k);
        acc += if k % 2 == 0 { t } else { -t };
        let next = term(k + 1);
        if next <= 1e-16 * acc.value().abs() || next < 1e-300 {
            return Ok(acc.value());
        }
    }
    Err(Error::NonConvergent {
        what: format!("xi resummation at alpha = {alpha}"),
        reached: k_max,
    })
}
