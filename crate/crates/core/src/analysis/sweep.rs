use super::{check_grid, Evaluator, PointEval};
use crate::error::{Error, Result};
use crate::spectrum::CoefficientFamily;
use crate::HR_BOUND;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Linear,
    Log,
}

/// One row of a sweep table; `product = sqrt(var_phi * var_lz)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub var_phi: f64,
    pub var_lz: f64,
    pub product: f64,
    pub hr_bound: f64,
    pub state_bound: f64,
    /// Spectrum cutoff behind the row, `None` for closed-form values.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
}

impl From<PointEval> for SweepRow {
    fn from(p: PointEval) -> Self {
        Self {
            alpha: p.alpha,
            var_phi: p.var_phi,
            var_lz: p.var_lz,
            product: p.product,
            hr_bound: HR_BOUND,
            state_bound: p.state_bound,
            cutoff: p.cutoff,
        }
    }
}

/// `steps` points from `min` to `max` inclusive.
pub fn alpha_grid(min: f64, max: f64, steps: usize, scale: Scale) -> Result<Vec<f64>> {
    if !(min > 0.0 && min.is_finite() && max.is_finite() && min < max) {
        return Err(Error::invalid(format!(
            "need 0 < min < max, got min = {min}, max = {max}"
        )));
    }
    if steps < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 steps, got {steps}"
        )));
    }
    let last = (steps - 1) as f64;
    let grid: Vec<f64> = (0..steps)
        .map(|i| {
            let t = i as f64 / last;
            match scale {
                Scale::Linear => min + (max - min) * t,
                Scale::Log => (min.ln() + (max.ln() - min.ln()) * t).exp(),
            }
        })
        .collect();
    let mut grid = grid;
    grid[0] = min;
    grid[steps - 1] = max;
    check_grid(&grid)?;
    Ok(grid)
}

/// Evaluates every grid point; rows come back in grid order whatever the
/// thread count.
pub fn sweep(
    family: &CoefficientFamily,
    grid: &[f64],
    evaluator: &Evaluator,
) -> Result<Vec<Result<SweepRow>>> {
    check_grid(grid)?;
    Ok(grid
        .par_iter()
        .map(|&a| evaluator.evaluate(family, a).map(SweepRow::from))
        .collect())
}
