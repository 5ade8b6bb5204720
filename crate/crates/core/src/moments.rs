//! Series expressions for the angle, `L_z` and trigonometric moments of a
//! truncated spectrum.
//!
//! With `R(k) = sum_m C_m^* C_{m+k}` (so `R(-k) = conj R(k)`) and the window
//! sums `S_j = sum n^j |C_n|^2`:
//!
//! - `xi = sum_{k >= 1} (-1)^k / k^2 * 2 Re R(k)`
//! - `<phi^2> = pi^2/3 + 4 pi |A|^2 xi`
//! - `<phi> = 4 pi |A|^2 sum_{k >= 1} (-1)^k Im R(k) / k`
//! - `<L_z^j> = 2 pi |A|^2 S_j`
//! - `<cos phi> = 2 pi |A|^2 Re R(1)`, `<sin phi> = -2 pi |A|^2 Im R(1)`,
//!   `<cos 2 phi> = 2 pi |A|^2 Re R(2)`
//!
//! The `<phi>` sign follows from `int phi e^{i j phi} = 2 pi (-1)^j / (i j)`
//! and is checked against quadrature in the oracle tests. Pairing `k` with
//! `-k` makes `xi` and `<phi>` real by construction, so no imaginary residue
//! is left to test.

use crate::error::{Error, Result};
use crate::spectrum::{boundary_density, TailKind, TruncatedSpectrum};
use crate::summation::{CompensatedSum, ComplexSum};
use crate::HR_BOUND;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;
use std::f64::consts::PI;

/// How `R(k)` is computed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CorrelationMethod {
    /// Shells for small windows, FFT once `K_eff * L` passes [`FFT_THRESHOLD`].
    #[default]
    Auto,
    /// Direct compensated sum per shell `k = n - m`, O(L K_eff).
    Shells,
    /// Zero-padded FFT, O(L log L).
    Fft,
}

/// Work (multiply-adds) above which [`CorrelationMethod::Auto`] uses the FFT.
pub const FFT_THRESHOLD: f64 = 1e9;

/// Shells beyond `K_eff` are skipped once their rigorous bound drops below
/// this fraction of `S0`.
const SHELL_TOL: f64 = 1e-16;

/// `R(0..=k_eff)` over the stored window.
#[derive(Clone, Debug)]
pub struct Autocorrelation {
    pub lags: Vec<Complex64>,
    pub k_eff: usize,
    /// Bound on `sum_{k > k_eff} 2 |R(k)| / k^2`.
    pub xi_remainder: f64,
    /// Bound on `sum_{k > k_eff} 2 |R(k)| / k`.
    pub mean_remainder: f64,
    pub used_fft: bool,
}

/// `|R(k)| <= 2 sqrt(S0 W(ceil(k/2)))` with `W(j) = sum_{|n| >= j} |C_n|^2`:
/// one of `m`, `m + k` has modulus at least `k/2`, then Cauchy–Schwarz.
fn shell_cut(s: &TruncatedSpectrum, s0: f64, need_mean: bool) -> (usize, f64, f64) {
    let n0 = s.cutoff();
    let kmax = 2 * n0;
    if kmax == 0 {
        return (0, 0.0, 0.0);
    }
    // w[j] = W(j) for j = 0..=n0+1
    let c = s.coeffs();
    let mut w = vec![0.0; n0 + 2];
    let mut acc = CompensatedSum::new();
    for j in (0..=n0).rev() {
        acc += c[n0 + j].norm_sqr();
        if j > 0 {
            acc += c[n0 - j].norm_sqr();
        }
        w[j] = acc.value();
    }
    let bound = |k: usize| 2.0 * (s0 * w[k.div_ceil(2)]).sqrt();
    // suffix sums over k in (K, kmax]
    let mut rem_xi = vec![0.0; kmax + 1];
    let mut rem_mean = vec![0.0; kmax + 1];
    for k in (1..kmax).rev() {
        let b = 2.0 * bound(k + 1);
        let kf = (k + 1) as f64;
        rem_xi[k] = rem_xi[k + 1] + b / (kf * kf);
        rem_mean[k] = rem_mean[k + 1] + b / kf;
    }
    let floor = kmax.min(2);
    let ok =
        |k: usize| rem_xi[k] <= SHELL_TOL * s0 && (!need_mean || rem_mean[k] <= SHELL_TOL * s0);
    let k_eff = (floor..=kmax).find(|&k| ok(k)).unwrap_or(kmax);
    (
        k_eff,
        rem_xi[k_eff],
        if need_mean { rem_mean[k_eff] } else { 0.0 },
    )
}

/// `R(k)` for `k = 0..=K_eff`.
pub fn autocorrelation(s: &TruncatedSpectrum, method: CorrelationMethod) -> Autocorrelation {
    let c = s.coeffs();
    let len = c.len();
    let s0 = s.window_sums().s0;
    let need_mean = !s.is_real();
    let (k_eff, xi_remainder, mean_remainder) = shell_cut(s, s0, need_mean);
    let use_fft = match method {
        CorrelationMethod::Shells => false,
        CorrelationMethod::Fft => true,
        CorrelationMethod::Auto => (k_eff as f64) * (len as f64) > FFT_THRESHOLD,
    };
    let lags = if use_fft {
        lags_fft(c, k_eff)
    } else if s.is_real() {
        lags_real(c, k_eff)
    } else {
        lags_complex(c, k_eff)
    };
    Autocorrelation {
        lags,
        k_eff,
        xi_remainder,
        mean_remainder,
        used_fft: use_fft,
    }
}

fn lags_real(c: &[Complex64], k_eff: usize) -> Vec<Complex64> {
    let x: Vec<f64> = c.iter().map(|z| z.re).collect();
    (0..=k_eff)
        .map(|k| {
            let mut acc = CompensatedSum::new();
            for (a, b) in x.iter().zip(&x[k..]) {
                acc += a * b;
            }
            Complex64::new(acc.value(), 0.0)
        })
        .collect()
}

fn lags_complex(c: &[Complex64], k_eff: usize) -> Vec<Complex64> {
    (0..=k_eff)
        .map(|k| {
            let mut acc = ComplexSum::new();
            for (a, b) in c.iter().zip(&c[k..]) {
                acc += a.conj() * b;
            }
            acc.value()
        })
        .collect()
}

fn lags_fft(c: &[Complex64], k_eff: usize) -> Vec<Complex64> {
    let m = (2 * c.len()).next_power_of_two();
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    buf[..c.len()].copy_from_slice(c);
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(m).process(&mut buf);
    for z in buf.iter_mut() {
        *z = Complex64::new(z.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(m).process(&mut buf);
    let scale = 1.0 / m as f64;
    buf.truncate(k_eff + 1);
    buf.iter_mut().for_each(|z| *z *= scale);
    buf
}

/// `xi = sum_{m != n} C_m^* C_n (-1)^{n-m} / (n-m)^2` over the window.
pub fn xi_sum(s: &TruncatedSpectrum) -> f64 {
    xi_from(&autocorrelation(s, CorrelationMethod::Auto))
}

pub fn xi_sum_with(s: &TruncatedSpectrum, method: CorrelationMethod) -> f64 {
    xi_from(&autocorrelation(s, method))
}

fn xi_from(r: &Autocorrelation) -> f64 {
    let mut acc = CompensatedSum::new();
    for (k, z) in r.lags.iter().enumerate().skip(1) {
        let kf = k as f64;
        let sign = if k % 2 == 0 { 2.0 } else { -2.0 };
        acc += sign * z.re / (kf * kf);
    }
    acc.value()
}

fn mean_phi_from(r: &Autocorrelation, norm_sq: f64) -> f64 {
    let mut acc = CompensatedSum::new();
    for (k, z) in r.lags.iter().enumerate().skip(1) {
        if z.im == 0.0 {
            continue;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * z.im / k as f64;
    }
    4.0 * PI * norm_sq * acc.value()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhiMoments {
    pub mean: f64,
    pub second: f64,
    pub var: f64,
    pub xi: f64,
}

/// `(<phi>, <phi^2>, sigma_phi^2)` and `xi`.
pub fn phi_moments(s: &TruncatedSpectrum) -> PhiMoments {
    phi_moments_with(s, CorrelationMethod::Auto)
}

pub fn phi_moments_with(s: &TruncatedSpectrum, method: CorrelationMethod) -> PhiMoments {
    let r = autocorrelation(s, method);
    let xi = xi_from(&r);
    let second = PI * PI / 3.0 + 4.0 * PI * s.norm_sq() * xi;
    let mean = mean_phi_from(&r, s.norm_sq());
    PhiMoments {
        mean,
        second,
        var: second - mean * mean,
        xi,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LzMoments {
    pub mean: f64,
    pub second: f64,
    pub var: f64,
}

fn lz_from(s1: f64, s2: f64, s0: f64) -> LzMoments {
    let mean = s1 / s0;
    let second = s2 / s0;
    LzMoments {
        mean,
        second,
        var: (second - mean * mean).max(0.0),
    }
}

/// `(<L_z>, <L_z^2>, sigma_Lz^2)` in units of hbar, including the estimated
/// contribution of the coefficients beyond the window.
pub fn lz_moments(s: &TruncatedSpectrum) -> Result<LzMoments> {
    let w = s.window_sums();
    let (t1, t2) = (s.first_tail(), s.second_tail());
    if let TailKind::Divergent { exponent } = t2.kind {
        return Err(Error::DivergentMoment {
            what: format!(
                "<L_z^2>: sum n^2 |C_n|^2 diverges at alpha = {} (terms decay like n^-{exponent:.4})",
                s.alpha()
            ),
        });
    }
    if t1.is_divergent() {
        return Err(Error::DivergentMoment {
            what: format!("<L_z>: sum n |C_n|^2 diverges at alpha = {}", s.alpha()),
        });
    }
    if !t2.error.is_finite() || !t1.error.is_finite() {
        return Err(Error::NonConvergent {
            what: format!(
                "L_z tail beyond cutoff {} is unresolved at alpha = {}",
                s.cutoff(),
                s.alpha()
            ),
            reached: s.cutoff() as u64,
        });
    }
    Ok(lz_from(w.s1 + t1.value, w.s2 + t2.value, w.s0))
}

/// L_z moments of the window alone, ignoring whatever lies beyond it. This is
/// what quadrature of the window state measures.
pub fn lz_moments_window(s: &TruncatedSpectrum) -> LzMoments {
    let w = s.window_sums();
    lz_from(w.s1, w.s2, w.s0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentReport {
    pub alpha: f64,
    pub cutoff: usize,
    pub mean_phi: f64,
    pub second_phi: f64,
    pub var_phi: f64,
    pub mean_lz: f64,
    pub second_lz: f64,
    pub var_lz: f64,
    pub xi: f64,
    pub product_sq: f64,
    pub hr_bound_sq: f64,
    pub state_bound: f64,
}

impl MomentReport {
    /// `sigma_phi * sigma_Lz`.
    pub fn product(&self) -> f64 {
        self.product_sq.sqrt()
    }
}

/// `(1/2) |1 - 2 pi |f(pi)|^2|` in units of hbar.
pub fn state_bound(s: &TruncatedSpectrum) -> f64 {
    0.5 * (1.0 - 2.0 * PI * boundary_density(s)).abs()
}

pub fn uncertainty_report(s: &TruncatedSpectrum) -> Result<MomentReport> {
    let lz = lz_moments(s)?;
    let phi = phi_moments(s);
    Ok(MomentReport {
        alpha: s.alpha(),
        cutoff: s.cutoff(),
        mean_phi: phi.mean,
        second_phi: phi.second,
        var_phi: phi.var,
        mean_lz: lz.mean,
        second_lz: lz.second,
        var_lz: lz.var,
        xi: phi.xi,
        product_sq: phi.var * lz.var,
        hr_bound_sq: HR_BOUND * HR_BOUND,
        state_bound: state_bound(s),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrigReport {
    pub mean_sin: f64,
    pub mean_cos: f64,
    pub mean_sin_sq: f64,
    pub mean_cos_sq: f64,
    pub var_sin: f64,
    pub var_cos: f64,
    /// `sigma_Lz^2 sigma_sin^2 - <cos phi>^2 / 4`; `+inf` when `sigma_Lz^2` diverges.
    pub sin_relation_residual: f64,
    /// `sigma_Lz^2 sigma_cos^2 - <sin phi>^2 / 4`; `+inf` when `sigma_Lz^2` diverges.
    pub cos_relation_residual: f64,
}

fn lag(c: &[Complex64], k: usize) -> Complex64 {
    let mut acc = ComplexSum::new();
    for (a, b) in c.iter().zip(c.iter().skip(k)) {
        acc += a.conj() * b;
    }
    acc.value()
}

/// Trig expectations and the `sin`/`cos` relation residuals.
pub fn trig_report(s: &TruncatedSpectrum) -> Result<TrigReport> {
    let w = 2.0 * PI * s.norm_sq();
    let c = s.coeffs();
    let (r1, r2) = (lag(c, 1), lag(c, 2));
    let mean_cos = w * r1.re;
    let mean_sin = -w * r1.im;
    let cos2 = w * r2.re;
    let mean_cos_sq = 0.5 + 0.5 * cos2;
    let mean_sin_sq = 0.5 - 0.5 * cos2;
    let var_cos = mean_cos_sq - mean_cos * mean_cos;
    let var_sin = mean_sin_sq - mean_sin * mean_sin;
    let (sin_res, cos_res) = match lz_moments(s) {
        Ok(lz) => (
            lz.var * var_sin - 0.25 * mean_cos * mean_cos,
            lz.var * var_cos - 0.25 * mean_sin * mean_sin,
        ),
        Err(Error::DivergentMoment { .. }) => (f64::INFINITY, f64::INFINITY),
        Err(e) => return Err(e),
    };
    Ok(TrigReport {
        mean_sin,
        mean_cos,
        mean_sin_sq,
        mean_cos_sq,
        var_sin,
        var_cos,
        sin_relation_residual: sin_res,
        cos_relation_residual: cos_res,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{build_spectrum, BuildOptions, CoefficientFamily};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

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

    /// O(N^2) pair enumeration straight from the definition.
    fn xi_pairs(s: &TruncatedSpectrum) -> Complex64 {
        let n0 = s.cutoff() as i64;
        let mut acc = ComplexSum::new();
        for m in -n0..=n0 {
            for n in -n0..=n0 {
                if m == n {
                    continue;
                }
                let d = (n - m) as f64;
                let sign = if (n - m) % 2 == 0 { 1.0 } else { -1.0 };
                acc += s.coefficient(m).conj() * s.coefficient(n) * (sign / (d * d));
            }
        }
        acc.value()
    }

    #[test]
    fn two_mode_fixture_is_exact() {
        let s = two_mode();
        assert!((s.norm_sq() - 1.0 / PI).abs() < 1e-16);
        assert!((xi_sum(&s) - 0.125).abs() < 1e-16);
        let r = uncertainty_report(&s).unwrap();
        assert!((r.var_lz - 1.0).abs() < 1e-15);
        assert!((r.var_phi - (PI * PI / 3.0 + 0.5)).abs() < 1e-14);
        assert_eq!(r.mean_phi, 0.0);
        assert_eq!(r.mean_lz, 0.0);
    }

    #[test]
    fn single_mode_is_uniform() {
        for m in [-2i64, 0, 5] {
            let s = build_spectrum(
                &CoefficientFamily::single_mode(m),
                1.0,
                &BuildOptions::default(),
            )
            .unwrap();
            let r = uncertainty_report(&s).unwrap();
            assert_eq!(r.xi, 0.0);
            assert_eq!(r.var_phi, PI * PI / 3.0);
            assert_eq!(r.var_lz, 0.0);
            assert_eq!(r.mean_lz, m as f64);
            assert_eq!(r.product_sq, 0.0);
            assert!(r.state_bound < 1e-15);
            let t = trig_report(&s).unwrap();
            assert!(t.mean_sin.abs() < 1e-16 && t.mean_cos.abs() < 1e-16);
            assert!((t.mean_cos_sq - 0.5).abs() < 1e-16);
        }
    }

    #[test]
    fn exponential_at_one() {
        let s = exp_spectrum(1.0);
        let r = uncertainty_report(&s).unwrap();
        let var_lz = 0.5 / 1f64.sinh().powi(2);
        assert!((r.var_lz - var_lz).abs() < 1e-12 * var_lz);
        assert!((r.var_lz - 0.36203).abs() < 1e-5);
        assert!((r.var_phi - 0.980_963_066).abs() < 1e-8, "{}", r.var_phi);
        assert!(
            (r.product_sq - 0.355_138_873).abs() < 1e-8,
            "{}",
            r.product_sq
        );
        assert!(r.product_sq > r.hr_bound_sq);
        assert_eq!(r.mean_phi, 0.0);

        let t = trig_report(&s).unwrap();
        assert_eq!(t.mean_sin, 0.0);
        assert!((t.mean_cos - 1.0 / 1f64.cosh()).abs() < 1e-13);
        assert!((t.mean_cos - 0.64805).abs() < 1e-5);
        // 1/2 - (1 + 2 tanh a) e^{-2a} / 2
        let var_sin = 0.5 - 0.5 * (1.0 + 2.0 * 1f64.tanh()) * (-2.0f64).exp();
        assert!((t.var_sin - var_sin).abs() < 1e-13);
        assert!((t.var_sin - 0.329_262).abs() < 1e-6);
    }

    #[test]
    fn hr_bound_fails_past_the_crossing() {
        let r = uncertainty_report(&exp_spectrum(2.0)).unwrap();
        assert!(r.product_sq < 0.25);
    }

    #[test]
    fn shell_and_pair_sums_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let n = rng.gen_range(1..=8);
            let coeffs: Vec<Complex64> = (0..2 * n + 1)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let s = TruncatedSpectrum::from_coefficients(1.0, coeffs).unwrap();
            let pairs = xi_pairs(&s);
            assert!(pairs.im.abs() < 1e-14);
            for m in [CorrelationMethod::Shells, CorrelationMethod::Fft] {
                assert!((xi_sum_with(&s, m) - pairs.re).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn fft_matches_shells_on_wide_window() {
        let s = exp_spectrum(0.01);
        let a = phi_moments_with(&s, CorrelationMethod::Shells);
        let b = phi_moments_with(&s, CorrelationMethod::Fft);
        assert!((a.var - b.var).abs() < 1e-14, "{} {}", a.var, b.var);
    }

    #[test]
    fn divergent_second_moment_is_reported() {
        let opts = BuildOptions {
            rel_tol: 1e-6,
            ..Default::default()
        };
        let s = build_spectrum(&CoefficientFamily::polynomial(), 1.2, &opts).unwrap();
        assert!(matches!(lz_moments(&s), Err(Error::DivergentMoment { .. })));
        assert!(matches!(
            uncertainty_report(&s),
            Err(Error::DivergentMoment { .. })
        ));
        let t = trig_report(&s).unwrap();
        assert_eq!(t.sin_relation_residual, f64::INFINITY);
        // the phi side is still finite
        let p = phi_moments(&s);
        assert!(p.var > 0.0 && p.var < PI * PI);
    }

    #[test]
    fn polynomial_lz_uses_tail_correction() {
        let s = build_spectrum(
            &CoefficientFamily::polynomial(),
            2.0,
            &BuildOptions::default(),
        )
        .unwrap();
        let lz = lz_moments(&s).unwrap();
        // zeta(2) / zeta(4) = 15 / pi^2
        assert!((lz.var - 15.0 / (PI * PI)).abs() < 1e-10, "{}", lz.var);
    }

    #[test]
    fn first_moment_sign_of_lopsided_state() {
        let s = TruncatedSpectrum::from_coefficients(
            1.0,
            vec![c(0.0), c(0.0), c(1.0), c(0.0), Complex64::new(0.0, 1.0)],
        )
        .unwrap();
        let lz = lz_moments(&s).unwrap();
        assert!((lz.mean - 1.0).abs() < 1e-15);
        assert!((lz.var - 1.0).abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn exponential_bounds_hold(a in 0.05f64..10.0) {
            let s = exp_spectrum(a);
            let r = uncertainty_report(&s).unwrap();
            prop_assert!(r.var_phi >= 0.0 && r.var_phi <= PI * PI);
            prop_assert!((r.var_phi - (r.second_phi - r.mean_phi * r.mean_phi)).abs() < 1e-12);
            prop_assert!(r.product_sq >= r.state_bound * r.state_bound - 1e-12);
            let t = trig_report(&s).unwrap();
            prop_assert!(t.sin_relation_residual >= -1e-12);
            prop_assert!(t.cos_relation_residual >= -1e-12);
            prop_assert!((t.mean_sin_sq + t.mean_cos_sq - 1.0).abs() < 1e-15);
        }

        #[test]
        fn random_spectra_stay_in_range(seed in any::<u64>(), n in 0usize..8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let coeffs: Vec<Complex64> = (0..2 * n + 1)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let s = TruncatedSpectrum::from_coefficients(1.0, coeffs).unwrap();
            let r = uncertainty_report(&s).unwrap();
            prop_assert!(r.var_phi > -1e-12 && r.var_phi <= PI * PI);
            prop_assert!(r.mean_phi.abs() <= PI);
            prop_assert!(r.var_lz >= 0.0);
            let t = trig_report(&s).unwrap();
            prop_assert!(t.mean_sin.abs() <= 1.0 + 1e-12 && t.mean_cos.abs() <= 1.0 + 1e-12);
            prop_assert!(t.var_sin >= -1e-12 && t.var_sin <= 1.0 + 1e-12);
            prop_assert!(t.var_cos >= -1e-12 && t.var_cos <= 1.0 + 1e-12);
        }
    }
}
