//! Least-squares fits on monomial bases, solved by SVD on a rescaled design
//! matrix so that columns like `x^3` on `[1e-3, 5e-2]` stay well conditioned.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Coefficients `c_i` of `y ~ sum_i c_i x^{powers[i]}`.
pub fn fit_powers(xs: &[f64], ys: &[f64], powers: &[i32]) -> Result<Vec<f64>> {
    if xs.len() != ys.len() {
        return Err(Error::invalid("x and y lengths differ"));
    }
    if powers.is_empty() || xs.len() < powers.len() {
        return Err(Error::invalid(format!(
            "{} points cannot determine {} coefficients",
            xs.len(),
            powers.len()
        )));
    }
    let scale = xs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::invalid("x values must be finite and not all zero"));
    }
    let design = DMatrix::from_fn(xs.len(), powers.len(), |i, j| {
        (xs[i] / scale).powi(powers[j])
    });
    let rhs = DVector::from_column_slice(ys);
    let c = design
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::invalid(format!("least squares failed: {e}")))?;
    Ok(powers
        .iter()
        .zip(c.iter())
        .map(|(&p, &ci)| ci / scale.powi(p))
        .collect())
}

/// Coefficients `c_0..=c_degree` of the least-squares polynomial.
pub fn fit_polynomial(xs: &[f64], ys: &[f64], degree: usize) -> Result<Vec<f64>> {
    let powers: Vec<i32> = (0..=degree as i32).collect();
    fit_powers(xs, ys, &powers)
}
