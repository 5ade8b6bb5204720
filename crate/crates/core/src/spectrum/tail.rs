//! Tail estimates for nonnegative series `sum_{n > M} t_n` from the terms
//! already computed.
//!
//! The classification looks at the last eight terms. Per-step log ratios that
//! never increase mean geometric-or-faster decay, and the tail is bounded by
//! the geometric majorant. Ratios that creep up towards one indicate a power
//! law `c n^-p`. That tail is then either bounded by the integral
//! `t_M M / (p - 1)` or estimated by Euler–Maclaurin, whichever has the
//! smaller error. The exponent is fitted over `[M/4, M/2, M]` rather than
//! adjacent terms so that rounding in the terms does not leak into `p`.

use serde::Serialize;

const PROBE: usize = 8;
/// Smallest `M` for which a power-law fit over `[M/4, M]` is attempted.
const MIN_POWER_FIT: usize = 32;
/// Exponents this close to one are treated as non-summable.
const DIVERGENCE_MARGIN: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailKind {
    /// Trailing terms vanish.
    Zero,
    Geometric {
        ratio: f64,
    },
    Power {
        exponent: f64,
    },
    Divergent {
        exponent: f64,
    },
    /// Terms are still growing, or the probe window is too short to tell.
    Unresolved,
}

/// The tail lies in `[value - error, value + error]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailEstimate {
    pub kind: TailKind,
    pub value: f64,
    pub error: f64,
}

impl TailEstimate {
    pub fn zero() -> Self {
        Self {
            kind: TailKind::Zero,
            value: 0.0,
            error: 0.0,
        }
    }

    pub(crate) fn unresolved() -> Self {
        Self {
            kind: TailKind::Unresolved,
            value: 0.0,
            error: f64::INFINITY,
        }
    }

    /// Upper bound on the tail sum.
    pub fn bound(&self) -> f64 {
        self.value + self.error
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self.kind, TailKind::Divergent { .. })
    }
}

/// Estimates `sum_{n > M} t_n` where `terms[n] = t_n >= 0` for `n = 0..=M`.
pub fn estimate_tail(terms: &[f64]) -> TailEstimate {
    let m = match terms.len().checked_sub(1) {
        Some(m) if m >= PROBE => m,
        _ => return TailEstimate::unresolved(),
    };
    if terms[m] == 0.0 && terms[m - 1] == 0.0 {
        return TailEstimate::zero();
    }
    let window: Vec<(usize, f64)> = (m + 1 - PROBE..=m)
        .filter(|&n| terms[n] > 0.0)
        .map(|n| (n, terms[n]))
        .collect();
    if window.len() < 2 {
        return TailEstimate::unresolved();
    }
    // per-unit-step log ratios between consecutive nonzero terms
    let lambdas: Vec<f64> = window
        .windows(2)
        .map(|w| (w[1].1 / w[0].1).ln() / (w[1].0 - w[0].0) as f64)
        .collect();
    let nonincreasing = lambdas
        .windows(2)
        .all(|l| l[1] - l[0] <= 1e-10 * l[0].abs() + 1e-300);
    let t_last = window.last().unwrap().1;

    if nonincreasing {
        let lambda = *lambdas.last().unwrap();
        if lambda >= 0.0 {
            return TailEstimate::unresolved();
        }
        let ratio = lambda.exp();
        let majorant = t_last * ratio / -lambda.exp_m1();
        return TailEstimate {
            kind: TailKind::Geometric { ratio },
            value: 0.0,
            error: majorant,
        };
    }

    power_tail(terms, m)
}

fn power_tail(terms: &[f64], m: usize) -> TailEstimate {
    if m < MIN_POWER_FIT {
        return TailEstimate::unresolved();
    }
    let (q, h) = (m / 4, m / 2);
    let (tq, th, tm) = (terms[q], terms[h], terms[m]);
    if tq <= 0.0 || th <= 0.0 || tm <= 0.0 {
        return TailEstimate::unresolved();
    }
    let p_near = (th / tm).ln() / (m as f64 / h as f64).ln();
    let p_far = (tq / th).ln() / (h as f64 / q as f64).ln();
    if p_near <= 1.0 + DIVERGENCE_MARGIN {
        return TailEstimate {
            kind: TailKind::Divergent { exponent: p_near },
            value: f64::INFINITY,
            error: f64::INFINITY,
        };
    }
    // extrapolate the drift of the local exponent one more octave
    let p_worst = if p_far > p_near {
        2.0 * p_near - p_far
    } else {
        p_near
    };
    let kind = TailKind::Power { exponent: p_near };
    let mf = m as f64;
    let majorant = if p_worst > 1.0 {
        tm * mf / (p_worst - 1.0)
    } else {
        f64::INFINITY
    };

    let (value, remainder) = euler_maclaurin_power_tail(tm, mf, p_near);
    let drift = if p_worst > 1.0 {
        (euler_maclaurin_power_tail(tm, mf, p_worst).0 - value).abs()
    } else {
        f64::INFINITY
    };
    // a few ulps of rounding in the terms move p by ~4 eps / ln 2, and with
    // t_M fixed the tail moves by 1/(p - 1) of that, relatively
    let dp = 4.0 * f64::EPSILON / std::f64::consts::LN_2;
    let rounding = value * (dp / (p_near - 1.0) + 8.0 * f64::EPSILON);
    let em_error = remainder + drift + rounding;

    if majorant <= em_error {
        TailEstimate {
            kind,
            value: 0.0,
            error: majorant,
        }
    } else {
        TailEstimate {
            kind,
            value,
            error: em_error,
        }
    }
}

/// `sum_{n > M} c n^-p` with `c M^-p = t_m`: integral, half-term and three
/// Bernoulli corrections. Returns (estimate, |first omitted correction|).
pub(crate) fn euler_maclaurin_power_tail(t_m: f64, m: f64, p: f64) -> (f64, f64) {
    const B: [f64; 4] = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0];
    let mut bracket = m / (p - 1.0) - 0.5;
    let mut rising = p;
    let mut factorial = 2.0;
    let mut inv_pow = 1.0 / m;
    let mut omitted = 0.0;
    for (j, b) in B.iter().enumerate() {
        let term = b / factorial * rising * inv_pow;
        if j < 3 {
            bracket += term;
        } else {
            omitted = term.abs();
        }
        let k = 2.0 * j as f64;
        rising *= (p + k + 1.0) * (p + k + 2.0);
        factorial *= (k + 3.0) * (k + 4.0);
        inv_pow /= m * m;
    }
    (t_m * bracket, t_m * omitted)
}
