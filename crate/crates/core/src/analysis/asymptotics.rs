//! Limit laws of the exponential family at both ends of the alpha range.
//!
//! Small alpha: `sigma_phi^2 ~ alpha^2`, `sigma_Lz^2 ~ 1 / (2 alpha^2)`, so the
//! squared product tends to 1/2. Large alpha: `sigma_Lz^2 ~ 2 e^{-2 alpha}`
//! and `sigma_phi^2 -> pi^2/3`. The approach to `pi^2/3` is only `e^{-alpha}`
//! fast (the deviation is about `-8 e^{-alpha}`), so the angle check at large
//! alpha asks for that rate instead of a fixed tolerance at every point.

use super::fit::fit_polynomial;
use super::Evaluator;
use crate::error::{Error, Result};
use crate::spectrum::{CoefficientFamily, FamilyKind};
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    SmallAlpha,
    LargeAlpha,
}

impl Regime {
    pub fn grid(self) -> [f64; 3] {
        match self {
            Regime::SmallAlpha => [1e-3, 2e-3, 4e-3],
            Regime::LargeAlpha => [6.0, 8.0, 10.0],
        }
    }
}

/// `phi_stat` is `sigma_phi^2 / alpha^2` (small) or `sigma_phi^2 - pi^2/3`
/// (large); `lz_stat` is `2 alpha^2 sigma_Lz^2` (small) or
/// `e^{2 alpha} sigma_Lz^2 / 2` (large).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AsymptoticRow {
    pub alpha: f64,
    pub var_phi: f64,
    pub var_lz: f64,
    pub product_sq: f64,
    pub phi_stat: f64,
    pub lz_stat: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticReport {
    pub regime: Regime,
    pub rows: Vec<AsymptoticRow>,
    /// Small: `max |phi_stat - 1|`. Large: `max |phi_stat| e^{alpha}`.
    pub phi_deviation: f64,
    pub phi_tolerance: f64,
    /// `max |lz_stat - 1|`.
    pub lz_deviation: f64,
    pub lz_tolerance: f64,
    /// Small only: `max |2 product_sq - 1|`.
    pub product_deviation: Option<f64>,
    /// Small: linear fits of the two stats in alpha, intercepts first.
    /// Large: fit of `ln |phi_stat|` against alpha (slope should be -1).
    pub phi_fit: Vec<f64>,
    pub lz_fit: Vec<f64>,
    pub pass: bool,
}

pub fn asymptotic_check(
    family: &CoefficientFamily,
    regime: Regime,
    evaluator: &Evaluator,
) -> Result<AsymptoticReport> {
    if family.kind() != FamilyKind::Exponential {
        return Err(Error::invalid(format!(
            "asymptotic laws are only known for the exponential family, not {}",
            family.name()
        )));
    }
    let rows: Vec<AsymptoticRow> = regime
        .grid()
        .iter()
        .map(|&a| {
            let p = evaluator.evaluate(family, a)?;
            let (phi_stat, lz_stat) = match regime {
                Regime::SmallAlpha => (p.var_phi / (a * a), 2.0 * a * a * p.var_lz),
                Regime::LargeAlpha => (p.var_phi - PI * PI / 3.0, p.var_lz * (2.0 * a).exp() / 2.0),
            };
            Ok(AsymptoticRow {
                alpha: a,
                var_phi: p.var_phi,
                var_lz: p.var_lz,
                product_sq: p.var_phi * p.var_lz,
                phi_stat,
                lz_stat,
            })
        })
        .collect::<Result<_>>()?;
    let alphas: Vec<f64> = rows.iter().map(|r| r.alpha).collect();
    let max_of = |f: &dyn Fn(&AsymptoticRow) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    let lz_deviation = max_of(&|r| (r.lz_stat - 1.0).abs());
    let lz_fit = fit_polynomial(
        &alphas,
        &rows.iter().map(|r| r.lz_stat).collect::<Vec<_>>(),
        1,
    )?;

    let report = match regime {
        Regime::SmallAlpha => {
            let phi_deviation = max_of(&|r| (r.phi_stat - 1.0).abs());
            let product_deviation = max_of(&|r| (2.0 * r.product_sq - 1.0).abs());
            let phi_fit = fit_polynomial(
                &alphas,
                &rows.iter().map(|r| r.phi_stat).collect::<Vec<_>>(),
                1,
            )?;
            AsymptoticReport {
                regime,
                pass: phi_deviation <= 0.02 && lz_deviation <= 0.02 && product_deviation <= 0.01,
                rows,
                phi_deviation,
                phi_tolerance: 0.02,
                lz_deviation,
                lz_tolerance: 0.02,
                product_deviation: Some(product_deviation),
                phi_fit,
                lz_fit,
            }
        }
        Regime::LargeAlpha => {
            let phi_deviation = max_of(&|r| r.phi_stat.abs() * r.alpha.exp());
            let logs: Vec<f64> = rows.iter().map(|r| r.phi_stat.abs().ln()).collect();
            let phi_fit = fit_polynomial(&alphas, &logs, 1)?;
            let last = rows.last().unwrap().phi_stat.abs();
            AsymptoticReport {
                regime,
                pass: phi_deviation <= 10.0 && last < 1e-3 && lz_deviation <= 1e-4,
                rows,
                phi_deviation,
                phi_tolerance: 10.0,
                lz_deviation,
                lz_tolerance: 1e-4,
                product_deviation: None,
                phi_fit,
                lz_fit,
            }
        }
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_alpha_laws() {
        let r = asymptotic_check(
            &CoefficientFamily::exponential(),
            Regime::SmallAlpha,
            &Evaluator::default(),
        )
        .unwrap();
        assert!(r.pass, "{r:#?}");
        // sigma_phi^2 = alpha^2 + c alpha^3 with c ~ 0.59
        assert!((r.phi_fit[0] - 1.0).abs() < 1e-3, "{:?}", r.phi_fit);
        assert!((r.phi_fit[1] - 0.59).abs() < 0.05, "{:?}", r.phi_fit);
        assert!((r.lz_fit[0] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn large_alpha_laws() {
        let r = asymptotic_check(
            &CoefficientFamily::exponential(),
            Regime::LargeAlpha,
            &Evaluator::default(),
        )
        .unwrap();
        assert!(r.pass, "{r:#?}");
        assert!(r.lz_deviation < 1e-4);
        assert!((r.phi_fit[1] + 1.0).abs() < 0.01, "{:?}", r.phi_fit);
        assert!((r.rows[0].phi_stat * 6f64.exp() + 8.0).abs() < 0.1);
    }

    #[test]
    fn other_families_are_rejected() {
        let r = asymptotic_check(
            &CoefficientFamily::polynomial(),
            Regime::LargeAlpha,
            &Evaluator::default(),
        );
        assert!(matches!(r, Err(Error::InvalidParameter(_))));
    }
}
