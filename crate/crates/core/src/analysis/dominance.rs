//! Numerical stand-in for the dominance condition: one index `k` with
//! `liminf |C_n / C_k| = 0` for every other `n` as alpha grows. A liminf is
//! not decidable from a finite grid, so the verdict is read off the grid tail
//! and says "inconclusive" when the traces do not settle.

use super::check_grid;
use crate::error::{Error, Result};
use crate::spectrum::CoefficientFamily;
use serde::Serialize;

pub const DEFAULT_THRESHOLD: f64 = 1e-3;
/// Two magnitudes within this relative distance count as tied.
const TIE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Dominant,
    NoUniqueDominant,
    Inconclusive,
}

/// `|C_n(alpha) / C_k(alpha)|` along the grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioTrace {
    pub n: i64,
    pub ratios: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DominanceVerdict {
    pub verdict: Verdict,
    pub dominant_index: Option<i64>,
    /// Indices sharing the largest magnitude at the end of the grid.
    pub tied: Vec<i64>,
    pub ratio_trace: Vec<RatioTrace>,
    pub grid: Vec<f64>,
    pub threshold: f64,
    /// Probe indices whose trace kept the verdict from being `dominant`.
    pub offenders: Vec<i64>,
}

pub fn check_dominance(
    family: &CoefficientFamily,
    alpha_grid: &[f64],
    n_probe: u64,
) -> Result<DominanceVerdict> {
    check_dominance_with(family, alpha_grid, n_probe, DEFAULT_THRESHOLD)
}

pub fn check_dominance_with(
    family: &CoefficientFamily,
    alpha_grid: &[f64],
    n_probe: u64,
    threshold: f64,
) -> Result<DominanceVerdict> {
    check_grid(alpha_grid)?;
    if alpha_grid.len() < 8 {
        return Err(Error::invalid(format!(
            "dominance needs at least 8 grid points, got {}",
            alpha_grid.len()
        )));
    }
    if alpha_grid[alpha_grid.len() - 1] < 10.0 * alpha_grid[0] {
        return Err(Error::invalid(
            "dominance grid must span at least one decade",
        ));
    }
    if n_probe < 1 {
        return Err(Error::invalid("n_probe must be at least 1"));
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::invalid(format!(
            "threshold {threshold} not in (0, 1)"
        )));
    }
    let probe = n_probe as i64;
    let g = alpha_grid.len();
    // mags[j][i] = |C_{i - probe}(alpha_j)|
    let mags: Vec<Vec<f64>> = alpha_grid
        .iter()
        .map(|&a| {
            (-probe..=probe)
                .map(|n| family.coefficient(n, a).norm())
                .collect()
        })
        .collect();
    let index = |i: usize| i as i64 - probe;

    let last = &mags[g - 1];
    let top = last.iter().copied().fold(0.0, f64::max);
    let report = |verdict, dominant_index, tied, ratio_trace, offenders| DominanceVerdict {
        verdict,
        dominant_index,
        tied,
        ratio_trace,
        grid: alpha_grid.to_vec(),
        threshold,
        offenders,
    };
    if top == 0.0 {
        return Ok(report(Verdict::Inconclusive, None, vec![], vec![], vec![]));
    }
    let tied: Vec<usize> = (0..last.len())
        .filter(|&i| last[i] >= (1.0 - TIE) * top)
        .collect();
    let third = (g / 3).max(1);
    let tail = g - third..g;

    if tied.len() > 1 {
        // a tie only counts if it persists over the whole grid tail
        let lasting = tail.clone().all(|j| {
            let m = tied.iter().map(|&i| mags[j][i]).fold(0.0, f64::max);
            tied.iter()
                .all(|&i| mags[j][i] >= (1.0 - TIE) * m && m > 0.0)
        });
        let verdict = if lasting {
            Verdict::NoUniqueDominant
        } else {
            Verdict::Inconclusive
        };
        let tied: Vec<i64> = tied.into_iter().map(index).collect();
        return Ok(report(verdict, None, tied, vec![], vec![]));
    }

    let k = tied[0];
    let traces: Vec<RatioTrace> = (0..last.len())
        .filter(|&i| i != k)
        .map(|i| RatioTrace {
            n: index(i),
            ratios: (0..g)
                .map(|j| {
                    let (num, den) = (mags[j][i], mags[j][k]);
                    if num == 0.0 {
                        0.0
                    } else if den == 0.0 {
                        f64::INFINITY
                    } else {
                        num / den
                    }
                })
                .collect(),
        })
        .collect();

    let offenders: Vec<i64> = traces
        .iter()
        .filter(|t| {
            let r = &t.ratios;
            if r.iter().all(|&x| x == 0.0) {
                return false;
            }
            let first_min = r[..third].iter().copied().fold(f64::INFINITY, f64::min);
            let tail_max = r[tail.clone()].iter().copied().fold(0.0, f64::max);
            !(r[g - 1] < threshold && tail_max < first_min)
        })
        .map(|t| t.n)
        .collect();
    let verdict = if offenders.is_empty() {
        Verdict::Dominant
    } else {
        Verdict::Inconclusive
    };
    Ok(report(
        verdict,
        Some(index(k)),
        vec![index(k)],
        traces,
        offenders,
    ))
}
