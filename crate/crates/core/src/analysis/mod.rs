//! Family-level analysis over alpha grids: dominance and admissibility
//! checks, the search for alpha with a small uncertainty product, crossings
//! of the naive bound, asymptotic laws and sweeps.

pub mod admissibility;
pub mod asymptotics;
pub mod dominance;
pub mod fit;
pub mod search;
pub mod sweep;

pub use admissibility::{
    check_admissibility, AdmissibilityReport, ChainReading, CondI, CondII, CondIII,
};
pub use asymptotics::{asymptotic_check, AsymptoticReport, AsymptoticRow, Regime};
pub use dominance::{check_dominance, check_dominance_with, DominanceVerdict, RatioTrace, Verdict};
pub use fit::{fit_polynomial, fit_powers};
pub use search::{find_alpha_star, find_bound_crossing, AlphaStar, Crossing};
pub use sweep::{alpha_grid, sweep, Scale, SweepRow};

use crate::closed_forms::{exp_closed, poly_var_lz};
use crate::error::{Error, Result};
use crate::moments::{phi_moments, state_bound, uncertainty_report};
use crate::spectrum::{build_spectrum, BuildOptions, CoefficientFamily, FamilyKind};
use serde::Serialize;

/// Where point values come from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    /// Closed forms where they exist: everything for the exponential family,
    /// the zeta ratio for `sigma_Lz^2` of the polynomial family. The series
    /// engine otherwise.
    #[default]
    Auto,
    /// Always build the spectrum and sum the series.
    Series,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Evaluator {
    pub engine: Engine,
    pub build: BuildOptions,
}

/// Moments of one state, in units of hbar.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PointEval {
    pub alpha: f64,
    pub var_phi: f64,
    pub var_lz: f64,
    /// `sigma_phi * sigma_Lz`
    pub product: f64,
    pub state_bound: f64,
    /// Cutoff of the spectrum, `None` for closed-form values.
    pub cutoff: Option<usize>,
}

impl PointEval {
    fn new(alpha: f64, var_phi: f64, var_lz: f64, state_bound: f64, cutoff: Option<usize>) -> Self {
        Self {
            alpha,
            var_phi,
            var_lz,
            product: (var_phi * var_lz).max(0.0).sqrt(),
            state_bound,
            cutoff,
        }
    }
}

impl Evaluator {
    pub fn series() -> Self {
        Self {
            engine: Engine::Series,
            ..Default::default()
        }
    }

    pub fn evaluate(&self, family: &CoefficientFamily, alpha: f64) -> Result<PointEval> {
        match (self.engine, family.kind()) {
            (Engine::Auto, FamilyKind::Exponential) => {
                let e = exp_closed(alpha)?;
                Ok(PointEval::new(
                    alpha,
                    e.var_phi,
                    e.var_lz,
                    e.state_bound,
                    None,
                ))
            }
            (Engine::Auto, FamilyKind::Polynomial) => {
                let var_lz = poly_var_lz(alpha)?;
                let s = build_spectrum(family, alpha, &self.build)?;
                let var_phi = phi_moments(&s).var;
                Ok(PointEval::new(
                    alpha,
                    var_phi,
                    var_lz,
                    state_bound(&s),
                    Some(s.cutoff()),
                ))
            }
            _ => {
                let s = build_spectrum(family, alpha, &self.build)?;
                let r = uncertainty_report(&s)?;
                Ok(PointEval::new(
                    alpha,
                    r.var_phi,
                    r.var_lz,
                    r.state_bound,
                    Some(s.cutoff()),
                ))
            }
        }
    }

    /// `sigma_phi * sigma_Lz` at `alpha`.
    pub fn product(&self, family: &CoefficientFamily, alpha: f64) -> Result<f64> {
        Ok(self.evaluate(family, alpha)?.product)
    }

    /// `sigma_phi^2` alone; finite even where `sigma_Lz^2` diverges.
    pub fn var_phi(&self, family: &CoefficientFamily, alpha: f64) -> Result<f64> {
        match (self.engine, family.kind()) {
            (Engine::Auto, FamilyKind::Exponential) => Ok(exp_closed(alpha)?.var_phi),
            _ => {
                let s = build_spectrum(family, alpha, &self.build)?;
                Ok(phi_moments(&s).var)
            }
        }
    }
}

/// Product for searches: a divergent or non-convergent point counts as `+inf`.
pub(crate) fn product_or_inf(
    ev: &Evaluator,
    family: &CoefficientFamily,
    alpha: f64,
) -> Result<f64> {
    match ev.product(family, alpha) {
        Ok(p) => Ok(p),
        Err(Error::DivergentMoment { .. }) | Err(Error::NonConvergent { .. }) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("empty alpha grid"));
    }
    if grid.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
        return Err(Error::invalid(
            "alpha grid must hold positive finite values",
        ));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("alpha grid must be strictly increasing"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn engines_agree_on_exponential() {
        let f = CoefficientFamily::exponential();
        for a in [0.25, 1.0, 4.0] {
            let x = Evaluator::default().evaluate(&f, a).unwrap();
            let y = Evaluator::series().evaluate(&f, a).unwrap();
            assert!((x.var_phi - y.var_phi).abs() < 1e-9 * x.var_phi);
            assert!((x.var_lz - y.var_lz).abs() < 1e-9 * x.var_lz);
            // pointwise values from a window cut carry about sqrt(rel_tol) error
            assert!((x.state_bound - y.state_bound).abs() < 1e-5);
            assert!(x.cutoff.is_none() && y.cutoff.is_some());
        }
    }

    #[test]
    fn engines_agree_on_polynomial() {
        let f = CoefficientFamily::polynomial();
        let x = Evaluator::default().evaluate(&f, 2.5).unwrap();
        let y = Evaluator::series().evaluate(&f, 2.5).unwrap();
        assert!((x.var_lz - y.var_lz).abs() < 1e-10 * x.var_lz);
        assert_eq!(x.var_phi, y.var_phi);
        assert!(matches!(
            Evaluator::default().evaluate(&f, 1.5),
            Err(Error::DivergentMoment { .. })
        ));
    }

    #[test]
    fn grid_checks() {
        assert!(check_grid(&[1.0, 2.0]).is_ok());
        assert!(check_grid(&[]).is_err());
        assert!(check_grid(&[1.0, 1.0]).is_err());
        assert!(check_grid(&[2.0, 1.0]).is_err());
        assert!(check_grid(&[-1.0, 1.0]).is_err());
    }
}
