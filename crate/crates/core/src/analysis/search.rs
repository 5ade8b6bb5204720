//! Searches over alpha: the smallest-product search (`alpha*` with
//! `sigma_phi sigma_Lz < eps`) and crossings of a fixed product level.

use super::{product_or_inf, Evaluator};
use crate::error::{Error, Result};
use crate::spectrum::CoefficientFamily;
use serde::Serialize;

/// Doubling stops here.
pub const ALPHA_CEILING: f64 = 1e4;
/// Halving (when the hint already satisfies eps) stops here.
pub const ALPHA_FLOOR: f64 = 1e-3;
const CROSSING_LO: f64 = 1e-3;
const CROSSING_HI: f64 = 50.0;
const CROSSING_POINTS: usize = 128;
const CROSSING_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AlphaStar {
    pub alpha: f64,
    pub product: f64,
    pub epsilon: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Crossing {
    pub alpha: f64,
    pub product: f64,
    pub target: f64,
}

/// Finds an alpha with `sigma_phi sigma_Lz < epsilon`.
///
/// Starting from `alpha_hint` (default 1) alpha is doubled up to
/// [`ALPHA_CEILING`]; the first success is bisected back towards the last
/// failure, so the returned alpha sits just past the `epsilon` level. If the
/// hint itself succeeds, alpha is halved down to [`ALPHA_FLOOR`] first. When
/// nothing succeeds the smallest product seen is refined by golden-section
/// search and returned inside [`Error::NotAttainable`].
pub fn find_alpha_star(
    family: &CoefficientFamily,
    epsilon: f64,
    alpha_hint: Option<f64>,
    evaluator: &Evaluator,
) -> Result<AlphaStar> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid(format!(
            "epsilon = {epsilon} must be positive"
        )));
    }
    let hint = alpha_hint.unwrap_or(1.0);
    if !(hint > 0.0 && hint.is_finite()) {
        return Err(Error::invalid(format!(
            "alpha hint = {hint} must be positive"
        )));
    }
    let f = |a: f64| product_or_inf(evaluator, family, a);
    let done = |alpha, product| {
        Ok(AlphaStar {
            alpha,
            product,
            epsilon,
        })
    };

    let mut a = hint;
    let mut p = f(a)?;
    let mut best = (p, a);
    if p < epsilon {
        loop {
            let lo = 0.5 * a;
            if lo < ALPHA_FLOOR {
                return done(a, p);
            }
            let pl = f(lo)?;
            if pl >= epsilon {
                let (x, px) = bisect_level(&f, epsilon, lo, a, p)?;
                return done(x, px);
            }
            (a, p) = (lo, pl);
        }
    }
    while a < ALPHA_CEILING {
        let next = (2.0 * a).min(ALPHA_CEILING);
        let pn = f(next)?;
        if pn < best.0 {
            best = (pn, next);
        }
        if pn < epsilon {
            let (x, px) = bisect_level(&f, epsilon, a, next, pn)?;
            return done(x, px);
        }
        a = next;
    }

    let (best_product, best_alpha) = golden_min(&f, best.1)?;
    let (best_product, best_alpha) = if best_product < best.0 {
        (best_product, best_alpha)
    } else {
        best
    };
    Err(Error::NotAttainable {
        epsilon,
        best_product,
        best_alpha,
    })
}

/// `f(lo) >= level > f(hi) = f_hi`; returns a point just past the level.
fn bisect_level(
    f: &impl Fn(f64) -> Result<f64>,
    level: f64,
    mut lo: f64,
    mut hi: f64,
    mut f_hi: f64,
) -> Result<(f64, f64)> {
    for _ in 0..200 {
        if hi - lo <= 1e-10 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm < level {
            (hi, f_hi) = (mid, fm);
        } else {
            lo = mid;
        }
    }
    Ok((hi, f_hi))
}

/// Golden-section minimum of `f` over `[center / 2, center * 2]` in log alpha.
fn golden_min(f: &impl Fn(f64) -> Result<f64>, center: f64) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (
        (0.5 * center).max(ALPHA_FLOOR).ln(),
        (2.0 * center).min(ALPHA_CEILING).ln(),
    );
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c.exp())?, f(d.exp())?);
    for _ in 0..80 {
        if (b - a).abs() < 1e-10 {
            break;
        }
        if fc < fd {
            b = d;
            (d, fd) = (c, fc);
            c = b - inv_phi * (b - a);
            fc = f(c.exp())?;
        } else {
            a = c;
            (c, fc) = (d, fd);
            d = a + inv_phi * (b - a);
            fd = f(d.exp())?;
        }
    }
    Ok(if fc < fd {
        (fc, c.exp())
    } else {
        (fd, d.exp())
    })
}

/// Alpha where `sigma_phi sigma_Lz` crosses `target`, bracketed on 128
/// log-spaced points over `[1e-3, 50]` and bisected to `|d alpha| < 1e-6`.
/// The first sign change (smallest alpha) wins.
pub fn find_bound_crossing(
    family: &CoefficientFamily,
    target: f64,
    evaluator: &Evaluator,
) -> Result<Crossing> {
    if !target.is_finite() {
        return Err(Error::invalid(format!("target = {target} must be finite")));
    }
    let f = |a: f64| product_or_inf(evaluator, family, a);
    let grid: Vec<f64> = (0..CROSSING_POINTS)
        .map(|i| {
            let t = i as f64 / (CROSSING_POINTS - 1) as f64;
            (CROSSING_LO.ln() + (CROSSING_HI.ln() - CROSSING_LO.ln()) * t).exp()
        })
        .collect();
    // points that fail for reasons other than divergence are skipped
    let values: Vec<Option<f64>> = grid.iter().map(|&a| f(a).ok()).collect();
    let above = |v: f64| v >= target;
    let mut bracket = None;
    let mut last: Option<(f64, f64)> = None;
    for (&a, v) in grid.iter().zip(&values) {
        let Some(v) = *v else { continue };
        if let Some((pa, pv)) = last {
            if above(pv) != above(v) {
                bracket = Some((pa, pv, a));
                break;
            }
        }
        last = Some((a, v));
    }
    let Some((mut lo, f_lo, mut hi)) = bracket else {
        return Err(Error::NoBracket {
            target,
            lo: CROSSING_LO,
            hi: CROSSING_HI,
        });
    };
    let lo_above = above(f_lo);
    while hi - lo >= CROSSING_TOL {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if above(fm) == lo_above {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let alpha = 0.5 * (lo + hi);
    Ok(Crossing {
        alpha,
        product: f(alpha)?,
        target,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_alpha_star_for_each_epsilon() {
        let f = CoefficientFamily::exponential();
        let ev = Evaluator::default();
        for eps in [0.5, 0.1, 0.01, 0.001] {
            let s = find_alpha_star(&f, eps, None, &ev).unwrap();
            assert!(s.product < eps, "eps={eps}: {s:?}");
            assert!(ev.product(&f, s.alpha).unwrap() < eps);
        }
        let s = find_alpha_star(&f, 0.5, None, &ev).unwrap();
        assert!(s.alpha > 1.29639 && s.alpha < 1.2965, "{}", s.alpha);
        let s = find_alpha_star(&f, 0.1, None, &ev).unwrap();
        assert!((s.alpha - 2.0).abs() < 1.5);
    }

    #[test]
    fn hint_past_the_level_walks_back() {
        let f = CoefficientFamily::exponential();
        let s = find_alpha_star(&f, 0.5, Some(40.0), &Evaluator::default()).unwrap();
        assert!(s.alpha > 1.29639 && s.alpha < 1.2965, "{}", s.alpha);
    }

    #[test]
    fn polynomial_product_is_not_attainable() {
        let r = find_alpha_star(
            &CoefficientFamily::polynomial(),
            1.0,
            None,
            &Evaluator::default(),
        );
        let Err(Error::NotAttainable {
            best_product,
            best_alpha,
            ..
        }) = r
        else {
            panic!("{r:?}")
        };
        // the product dips to about 1.8604 near alpha = 2.9 before climbing
        // back to sqrt(pi^2/3 + 1/2) = 1.94675
        assert!((best_product - 1.8604).abs() < 1e-3, "{best_product}");
        assert!((best_alpha - 2.9).abs() < 0.1, "{best_alpha}");
        assert!(best_product > 1.0);
    }

    #[test]
    fn exponential_crossing() {
        let f = CoefficientFamily::exponential();
        let c = find_bound_crossing(&f, 0.5, &Evaluator::default()).unwrap();
        assert!((c.alpha - 1.29639).abs() < 5e-4, "{}", c.alpha);
        assert!((c.alpha - 1.296_390_061_737_13).abs() < 2e-6);
        assert!((c.product - 0.5).abs() < 1e-5);
    }

    #[test]
    fn missing_brackets() {
        let ev = Evaluator::default();
        assert!(matches!(
            find_bound_crossing(&CoefficientFamily::exponential(), 10.0, &ev),
            Err(Error::NoBracket { .. })
        ));
        assert!(matches!(
            find_bound_crossing(&CoefficientFamily::polynomial(), 0.5, &ev),
            Err(Error::NoBracket { .. })
        ));
    }

    #[test]
    fn rejects_bad_inputs() {
        let f = CoefficientFamily::exponential();
        let ev = Evaluator::default();
        assert!(find_alpha_star(&f, 0.0, None, &ev).is_err());
        assert!(find_alpha_star(&f, 0.1, Some(-1.0), &ev).is_err());
        assert!(find_bound_crossing(&f, f64::NAN, &ev).is_err());
    }
}
