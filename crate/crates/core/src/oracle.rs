//! Moments by direct adaptive quadrature of the explicitly evaluated state.
//!
//! Nothing here touches the series formulas in [`crate::moments`]: the state
//! and its derivative are evaluated pointwise from the stored window and
//! integrated over `[-pi, pi]`.

use crate::error::{Error, Result};
use crate::moments::{lz_moments, lz_moments_window, phi_moments, trig_report};
use crate::spectrum::{evaluate_state, evaluate_state_with_derivative, TruncatedSpectrum};
use crate::summation::CompensatedSum;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub max_evals: u64,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            max_evals: 2_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub est_error: f64,
    pub evaluations: u64,
}

const MAX_DEPTH: u32 = 48;

struct Segment<const D: usize> {
    a: f64,
    b: f64,
    fa: [f64; D],
    fm: [f64; D],
    fb: [f64; D],
    whole: [f64; D],
    eps: f64,
    depth: u32,
}

fn simpson<const D: usize>(h: f64, fa: &[f64; D], fm: &[f64; D], fb: &[f64; D]) -> [f64; D] {
    std::array::from_fn(|i| h / 6.0 * (fa[i] + 4.0 * fm[i] + fb[i]))
}

/// Adaptive Simpson on `[-pi, pi]` for a vector-valued integrand, starting
/// from `panels` equal panels, each with an error budget proportional to its
/// width. Every component must meet `abs_tol`.
///
/// Refinement stops at a rounding floor of a few ulps of the panel value, so
/// a noisy integrand cannot exhaust the budget; the floor is still counted in
/// the reported error.
pub fn integrate<const D: usize>(
    f: impl Fn(f64) -> [f64; D],
    panels: usize,
    opts: &QuadOptions,
) -> Result<[QuadratureResult; D]> {
    if !(opts.abs_tol > 0.0) {
        return Err(Error::invalid("quadrature tolerance must be positive"));
    }
    let panels = panels.max(1);
    let width = 2.0 * PI / panels as f64;
    let node = |i: usize| -PI + width * i as f64;

    let evals = std::cell::Cell::new(0u64);
    let eval = |x: f64| {
        evals.set(evals.get() + 1);
        f(x)
    };
    let mut left = eval(node(0));
    let mut segments = Vec::with_capacity(panels);
    for i in 0..panels {
        let (a, b) = (node(i), if i + 1 == panels { PI } else { node(i + 1) });
        let fm = eval(0.5 * (a + b));
        let fb = eval(b);
        let whole = simpson(b - a, &left, &fm, &fb);
        segments.push(Segment {
            a,
            b,
            fa: left,
            fm,
            fb,
            whole,
            eps: opts.abs_tol * (b - a) / (2.0 * PI),
            depth: 0,
        });
        left = fb;
    }
    // depth-first from the left so the summation order is fixed
    segments.reverse();

    let mut total: [CompensatedSum; D] = std::array::from_fn(|_| CompensatedSum::new());
    let mut error = [0.0f64; D];
    let mut capped = false;
    while let Some(seg) = segments.pop() {
        let m = 0.5 * (seg.a + seg.b);
        if capped || evals.get() + 2 > opts.max_evals {
            capped = true;
            for i in 0..D {
                total[i] += seg.whole[i];
                // no refinement available: charge the whole budget and more
                error[i] += seg.eps.max(seg.whole[i].abs());
            }
            continue;
        }
        let lm = eval(0.5 * (seg.a + m));
        let rm = eval(0.5 * (m + seg.b));
        let h = 0.5 * (seg.b - seg.a);
        let sl = simpson(h, &seg.fa, &lm, &seg.fm);
        let sr = simpson(h, &seg.fm, &rm, &seg.fb);
        let diff: [f64; D] = std::array::from_fn(|i| sl[i] + sr[i] - seg.whole[i]);
        let accept = (0..D).all(|i| {
            let floor = 64.0 * f64::EPSILON * (sl[i].abs() + sr[i].abs());
            diff[i].abs() <= 15.0 * seg.eps.max(floor)
        });
        if accept || seg.depth >= MAX_DEPTH {
            for i in 0..D {
                total[i] += sl[i] + sr[i] + diff[i] / 15.0;
                error[i] += diff[i].abs() / 15.0;
            }
            continue;
        }
        let eps = 0.5 * seg.eps;
        let depth = seg.depth + 1;
        segments.push(Segment {
            a: m,
            b: seg.b,
            fa: seg.fm,
            fm: rm,
            fb: seg.fb,
            whole: sr,
            eps,
            depth,
        });
        segments.push(Segment {
            a: seg.a,
            b: m,
            fa: seg.fa,
            fm: lm,
            fb: seg.fm,
            whole: sl,
            eps,
            depth,
        });
    }
    let worst = error.iter().copied().fold(0.0, f64::max);
    if capped && worst > opts.abs_tol {
        let estimate = total
            .iter()
            .zip(&error)
            .max_by(|x, y| x.1.total_cmp(y.1))
            .map_or(0.0, |(t, _)| t.value());
        return Err(Error::ToleranceNotMet {
            estimate,
            tolerance: opts.abs_tol,
            evaluations: evals.get(),
        });
    }
    Ok(std::array::from_fn(|i| QuadratureResult {
        value: total[i].value(),
        est_error: error[i],
        evaluations: evals.get(),
    }))
}

/// Initial panel count: a few per oscillation of the highest mode.
fn panels_for(s: &TruncatedSpectrum) -> usize {
    4 * s.cutoff() + 16
}

/// `int |f|^2`.
pub fn quad_norm(s: &TruncatedSpectrum, opts: &QuadOptions) -> Result<QuadratureResult> {
    let [r] = integrate(
        |x| [evaluate_state(s, x).value.norm_sqr()],
        panels_for(s),
        opts,
    )?;
    Ok(r)
}

/// `int phi^power |f|^2` for `power` in {1, 2}.
pub fn quad_phi_moment(
    s: &TruncatedSpectrum,
    power: u32,
    opts: &QuadOptions,
) -> Result<QuadratureResult> {
    if !(1..=2).contains(&power) {
        return Err(Error::invalid(format!(
            "phi moment power must be 1 or 2, got {power}"
        )));
    }
    let [r] = integrate(
        |x| [x.powi(power as i32) * evaluate_state(s, x).value.norm_sqr()],
        panels_for(s),
        opts,
    )?;
    Ok(r)
}

/// `power = 2`: `int |f'|^2`; `power = 1`: `int Im(f^* f')`, i.e.
/// `<L_z> = int f^* (-i f')`.
pub fn quad_lz_moment(
    s: &TruncatedSpectrum,
    power: u32,
    opts: &QuadOptions,
) -> Result<QuadratureResult> {
    let g: fn(num_complex::Complex64, num_complex::Complex64) -> f64 = match power {
        1 => |f, d| (f.conj() * d).im,
        2 => |_, d| d.norm_sqr(),
        _ => {
            return Err(Error::invalid(format!(
                "L_z moment power must be 1 or 2, got {power}"
            )))
        }
    };
    let [r] = integrate(
        |x| {
            let (f, d) = evaluate_state_with_derivative(s, x);
            [g(f, d)]
        },
        panels_for(s),
        opts,
    )?;
    Ok(r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrigWeight {
    Sin,
    Cos,
    SinSq,
    CosSq,
}

impl TrigWeight {
    fn apply(self, x: f64) -> f64 {
        match self {
            TrigWeight::Sin => x.sin(),
            TrigWeight::Cos => x.cos(),
            TrigWeight::SinSq => x.sin().powi(2),
            TrigWeight::CosSq => x.cos().powi(2),
        }
    }
}

pub fn quad_trig_moment(
    s: &TruncatedSpectrum,
    which: TrigWeight,
    opts: &QuadOptions,
) -> Result<QuadratureResult> {
    let [r] = integrate(
        |x| [which.apply(x) * evaluate_state(s, x).value.norm_sqr()],
        panels_for(s),
        opts,
    )?;
    Ok(r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareRow {
    pub quantity: &'static str,
    pub series: Option<f64>,
    pub quadrature: Option<f64>,
    pub abs_diff: Option<f64>,
    pub status: RowStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareReport {
    pub alpha: f64,
    pub cutoff: usize,
    pub tol: f64,
    pub rows: Vec<CompareRow>,
    pub evaluations: u64,
    pub all_pass: bool,
}

/// Every series moment against its quadrature twin, all from one pass over
/// `phi` (the integrand is vector-valued).
///
/// L_z rows compare window sums, since quadrature only sees the window; when
/// the full series diverges those rows are marked not applicable.
pub fn compare_report(s: &TruncatedSpectrum, tol: f64) -> CompareReport {
    let opts = QuadOptions {
        abs_tol: (0.1 * tol).min(1e-10),
        ..Default::default()
    };
    let quad = integrate(
        |x| {
            let (f, d) = evaluate_state_with_derivative(s, x);
            let rho = f.norm_sqr();
            let (sin, cos) = x.sin_cos();
            [
                rho,
                x * rho,
                x * x * rho,
                d.norm_sqr(),
                (f.conj() * d).im,
                sin * rho,
                cos * rho,
                sin * sin * rho,
                cos * cos * rho,
            ]
        },
        panels_for(s),
        &opts,
    );

    let phi = phi_moments(s);
    let lz_full = lz_moments(s);
    let lz = lz_moments_window(s);
    let trig = trig_report(s).ok();

    let mut rows = Vec::new();
    let mut evaluations = 0;
    match quad {
        Ok(q) => {
            evaluations = q[0].evaluations;
            let v: [f64; 9] = std::array::from_fn(|i| q[i].value);
            let pairs: [(&'static str, Option<f64>, f64, bool); 13] = [
                ("norm", Some(1.0), v[0], false),
                ("mean_phi", Some(phi.mean), v[1], false),
                ("second_phi", Some(phi.second), v[2], false),
                ("var_phi", Some(phi.var), v[2] - v[1] * v[1], false),
                ("mean_lz", Some(lz.mean), v[4], true),
                ("second_lz", Some(lz.second), v[3], true),
                ("var_lz", Some(lz.var), v[3] - v[4] * v[4], true),
                ("mean_sin", trig.map(|t| t.mean_sin), v[5], false),
                ("mean_cos", trig.map(|t| t.mean_cos), v[6], false),
                ("mean_sin_sq", trig.map(|t| t.mean_sin_sq), v[7], false),
                ("mean_cos_sq", trig.map(|t| t.mean_cos_sq), v[8], false),
                (
                    "var_sin",
                    trig.map(|t| t.var_sin),
                    v[7] - v[5] * v[5],
                    false,
                ),
                (
                    "var_cos",
                    trig.map(|t| t.var_cos),
                    v[8] - v[6] * v[6],
                    false,
                ),
            ];
            for (quantity, series, quadrature, is_lz) in pairs {
                if is_lz {
                    if let Err(e @ Error::DivergentMoment { .. }) = &lz_full {
                        rows.push(CompareRow {
                            quantity,
                            series: None,
                            quadrature: Some(quadrature),
                            abs_diff: None,
                            status: RowStatus::NotApplicable,
                            note: Some(e.to_string()),
                        });
                        continue;
                    }
                }
                let Some(series) = series else {
                    rows.push(CompareRow {
                        quantity,
                        series: None,
                        quadrature: Some(quadrature),
                        abs_diff: None,
                        status: RowStatus::Fail,
                        note: Some("series side failed".into()),
                    });
                    continue;
                };
                let diff = (series - quadrature).abs();
                rows.push(CompareRow {
                    quantity,
                    series: Some(series),
                    quadrature: Some(quadrature),
                    abs_diff: Some(diff),
                    status: if diff <= tol {
                        RowStatus::Pass
                    } else {
                        RowStatus::Fail
                    },
                    note: None,
                });
            }
        }
        Err(e) => rows.push(CompareRow {
            quantity: "quadrature",
            series: None,
            quadrature: None,
            abs_diff: None,
            status: RowStatus::Fail,
            note: Some(e.to_string()),
        }),
    }
    let all_pass = rows.iter().all(|r| r.status != RowStatus::Fail);
    CompareReport {
        alpha: s.alpha(),
        cutoff: s.cutoff(),
        tol,
        rows,
        evaluations,
        all_pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{build_spectrum, BuildOptions, CoefficientFamily};
    use num_complex::Complex64;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn two_mode() -> TruncatedSpectrum {
        TruncatedSpectrum::from_coefficients(1.0, vec![c(0.5), c(0.0), c(0.5)]).unwrap()
    }

    fn exp_spectrum(a: f64) -> TruncatedSpectrum {
        build_spectrum(
            &CoefficientFamily::exponential(),
            a,
            &BuildOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn simpson_integrates_smooth_functions() {
        let opts = QuadOptions::default();
        let [a, b] = integrate(|x| [x.cos().powi(2), (3.0 * x).sin().exp()], 4, &opts).unwrap();
        assert!((a.value - PI).abs() < 1e-10);
        // int e^{sin 3x} over a period = 2 pi I0(1)
        assert!((b.value - 2.0 * PI * 1.266_065_877_752_008_4).abs() < 1e-10);
        assert!(a.evaluations <= opts.max_evals);
    }

    #[test]
    fn evaluation_cap_raises() {
        let opts = QuadOptions {
            abs_tol: 1e-14,
            max_evals: 50,
        };
        let r = integrate(|x| [(13.7 * x).sin().exp()], 2, &opts);
        assert!(matches!(r, Err(Error::ToleranceNotMet { .. })));
    }

    #[test]
    fn uniform_state() {
        let s = build_spectrum(
            &CoefficientFamily::single_mode(0),
            1.0,
            &BuildOptions::default(),
        )
        .unwrap();
        let o = QuadOptions::default();
        assert!((quad_phi_moment(&s, 2, &o).unwrap().value - PI * PI / 3.0).abs() < 1e-10);
        assert!((quad_trig_moment(&s, TrigWeight::CosSq, &o).unwrap().value - 0.5).abs() < 1e-10);
        assert!(
            quad_trig_moment(&s, TrigWeight::Sin, &o)
                .unwrap()
                .value
                .abs()
                < 1e-10
        );
        assert!(quad_phi_moment(&s, 3, &o).is_err());
    }

    #[test]
    fn eigenstate_lz() {
        let s = build_spectrum(
            &CoefficientFamily::single_mode(3),
            1.0,
            &BuildOptions::default(),
        )
        .unwrap();
        let o = QuadOptions::default();
        assert!((quad_lz_moment(&s, 2, &o).unwrap().value - 9.0).abs() < 1e-10);
        assert!((quad_lz_moment(&s, 1, &o).unwrap().value - 3.0).abs() < 1e-10);
    }

    #[test]
    fn two_mode_fixture() {
        let s = two_mode();
        let o = QuadOptions::default();
        let want = PI * PI / 3.0 + 0.5;
        assert!((quad_phi_moment(&s, 2, &o).unwrap().value - want).abs() < 1e-10);
        assert!((quad_lz_moment(&s, 2, &o).unwrap().value - 1.0).abs() < 1e-10);
        assert!(quad_lz_moment(&s, 1, &o).unwrap().value.abs() < 1e-10);
    }

    #[test]
    fn exponential_at_one() {
        let s = exp_spectrum(1.0);
        let o = QuadOptions::default();
        assert!(quad_phi_moment(&s, 1, &o).unwrap().value.abs() < 1e-10);
        let l2 = quad_lz_moment(&s, 2, &o).unwrap().value;
        assert!((l2 - 0.5 / 1f64.sinh().powi(2)).abs() < 1e-9);
        let cos = quad_trig_moment(&s, TrigWeight::Cos, &o).unwrap().value;
        assert!((cos - 1.0 / 1f64.cosh()).abs() < 1e-10);
        let sin2 = quad_trig_moment(&s, TrigWeight::SinSq, &o).unwrap().value;
        assert!((sin2 - 0.329_261_797_574_071).abs() < 1e-10);
        assert!((quad_norm(&s, &o).unwrap().value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn compare_report_passes_for_exponential() {
        for a in [0.5, 1.0, 2.0] {
            let r = compare_report(&exp_spectrum(a), 1e-8);
            assert!(r.all_pass, "{r:#?}");
            assert_eq!(r.rows.len(), 13);
        }
    }

    #[test]
    fn compare_report_marks_divergent_rows() {
        let s = TruncatedSpectrum::with_cutoff(&CoefficientFamily::polynomial(), 1.4, 256).unwrap();
        let r = compare_report(&s, 1e-8);
        let var_lz = r.rows.iter().find(|row| row.quantity == "var_lz").unwrap();
        assert_eq!(var_lz.status, RowStatus::NotApplicable);
        assert!(r.all_pass, "{r:#?}");
    }

    #[test]
    fn norm_closes_at_small_alpha() {
        let s = exp_spectrum(0.05);
        let q = quad_norm(&s, &QuadOptions::default()).unwrap();
        assert!((q.value - 1.0).abs() < 1e-10);
    }
}
