//! Coefficient families, normalized truncated spectra and the state they
//! describe.

pub mod custom;
pub mod family;
pub mod tail;

pub use custom::{load_family, EntryExpr, EntrySpec, FamilySpec};
pub use family::{CoefficientFamily, CoefficientRule, FamilyKind};
pub use tail::{estimate_tail, TailEstimate, TailKind};

use crate::error::{Error, Result};
use crate::summation::{CompensatedSum, ComplexSum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// How far [`build_spectrum`] is allowed to go and how small the dropped
/// tails must be.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildOptions {
    pub rel_tol: f64,
    pub n_max: u64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            n_max: 2_000_000,
        }
    }
}

impl BuildOptions {
    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::invalid(format!(
                "rel_tol = {} not in (0, 1)",
                self.rel_tol
            )));
        }
        if self.n_max < 1 {
            return Err(Error::invalid("n_max must be at least 1"));
        }
        Ok(())
    }
}

/// Normalized coefficients `C_{-N}..C_N` of one state plus estimates of what
/// the window leaves out.
///
/// `norm_sq = |A|^2` normalizes the window exactly:
/// `2 pi |A|^2 sum_{|n|<=N} |C_n|^2 = 1`. The three tails are the unnormalized
/// sums `sum_{|n|>N} |n|^j |C_n|^2` for `j = 0, 2` and
/// `sum_{|n|>N} n |C_n|^2` for the first moment.
#[derive(Clone, Debug)]
pub struct TruncatedSpectrum {
    alpha: f64,
    cutoff: usize,
    coeffs: Vec<Complex64>,
    norm_sq: f64,
    norm_tail: TailEstimate,
    first_tail: TailEstimate,
    second_tail: TailEstimate,
    is_real: bool,
    is_symmetric: bool,
}

/// Unnormalized window sums `S_j = sum_{|n|<=N} n^j |C_n|^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowSums {
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StateSample {
    pub phi: f64,
    pub value: Complex64,
}

impl TruncatedSpectrum {
    /// Wraps an explicit window `C_{-N}..C_N` (odd length). Nothing outside
    /// the window exists, so all tails are zero.
    pub fn from_coefficients(alpha: f64, coeffs: Vec<Complex64>) -> Result<Self> {
        check_alpha(alpha)?;
        if coeffs.len().is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "coefficient window must have odd length, got {}",
                coeffs.len()
            )));
        }
        if coeffs
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::invalid("non-finite coefficient"));
        }
        let cutoff = coeffs.len() / 2;
        let s0: f64 = coeffs
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<CompensatedSum>()
            .value();
        if s0 == 0.0 {
            return Err(Error::DegenerateState);
        }
        let is_real = coeffs.iter().all(|c| c.im == 0.0);
        let is_symmetric = (0..=cutoff).all(|k| {
            let (a, b) = (coeffs[cutoff + k].norm(), coeffs[cutoff - k].norm());
            (a - b).abs() <= 1e-14 * a.max(b)
        });
        Ok(Self {
            alpha,
            cutoff,
            coeffs,
            norm_sq: 1.0 / (2.0 * PI * s0),
            norm_tail: TailEstimate::zero(),
            first_tail: TailEstimate::zero(),
            second_tail: TailEstimate::zero(),
            is_real,
            is_symmetric,
        })
    }

    /// Fixed window `|n| <= cutoff`, no convergence requirement. Tails are
    /// still estimated and may be unresolved.
    pub fn with_cutoff(family: &CoefficientFamily, alpha: f64, cutoff: usize) -> Result<Self> {
        check_alpha(alpha)?;
        let mut scan = Scan::new(family, alpha)?;
        for n in 1..=cutoff {
            scan.push(family, alpha, n)?;
        }
        if scan.s0_at(cutoff) == 0.0 {
            return Err(Error::DegenerateState);
        }
        let inside = family.support().is_some_and(|s| s <= cutoff as u64);
        let (t0, t1, t2) = if inside {
            (
                TailEstimate::zero(),
                TailEstimate::zero(),
                TailEstimate::zero(),
            )
        } else {
            let t2 = estimate_tail(&scan.v);
            (estimate_tail(&scan.u), scan.first_model(), t2)
        };
        Ok(scan.assemble(family, alpha, cutoff, t0, t1, t2))
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// `C_{-N}..C_N`; index `i` holds `C_{i - N}`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `C_n`, zero outside the window.
    pub fn coefficient(&self, n: i64) -> Complex64 {
        let i = n + self.cutoff as i64;
        if i < 0 || i as usize >= self.coeffs.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[i as usize]
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    /// `A = sqrt(norm_sq)`, the positive real root.
    pub fn amplitude(&self) -> f64 {
        self.norm_sq.sqrt()
    }

    pub fn norm_tail(&self) -> &TailEstimate {
        &self.norm_tail
    }

    pub fn first_tail(&self) -> &TailEstimate {
        &self.first_tail
    }

    pub fn second_tail(&self) -> &TailEstimate {
        &self.second_tail
    }

    /// Uncertainty in the dropped part of `sum n^2 |C_n|^2`, infinite when
    /// that sum diverges.
    pub fn tail_bound(&self) -> f64 {
        if self.second_tail.is_divergent() {
            f64::INFINITY
        } else {
            self.second_tail.error
        }
    }

    pub fn is_real(&self) -> bool {
        self.is_real
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_symmetric
    }

    pub fn hbar_convention(&self) -> &'static str {
        "hbar = 1"
    }

    pub fn window_sums(&self) -> WindowSums {
        let (mut s0, mut s1, mut s2) = (
            CompensatedSum::new(),
            CompensatedSum::new(),
            CompensatedSum::new(),
        );
        let n0 = self.cutoff as i64;
        for (i, c) in self.coeffs.iter().enumerate() {
            let n = (i as i64 - n0) as f64;
            let p = c.norm_sqr();
            s0 += p;
            s1 += n * p;
            s2 += n * n * p;
        }
        WindowSums {
            s0: s0.value(),
            s1: s1.value(),
            s2: s2.value(),
        }
    }

    /// `2 pi |A|^2 sum |C_n|^2 - 1`.
    pub fn normalization_residual(&self) -> f64 {
        2.0 * PI * self.norm_sq * self.window_sums().s0 - 1.0
    }
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

/// Criterion checks are cheap but not free; after n = 64 look every n/64 steps.
fn check_due(n: usize) -> bool {
    n < 64 || n.is_multiple_of(n / 64)
}

/// Coefficients and per-shell terms for n = 0..=M.
struct Scan {
    pos: Vec<Complex64>,
    neg: Vec<Complex64>,
    /// `|C_n|^2 + |C_-n|^2` (just `|C_0|^2` at n = 0)
    u: Vec<f64>,
    /// `n^2 u_n`
    v: Vec<f64>,
    /// `n (|C_n|^2 - |C_-n|^2)`
    w: Vec<f64>,
    pre0: Vec<f64>,
    pre2: Vec<f64>,
    acc0: CompensatedSum,
    acc2: CompensatedSum,
}

impl Scan {
    fn new(family: &CoefficientFamily, alpha: f64) -> Result<Self> {
        let c0 = coefficient_checked(family, 0, alpha)?;
        let p0 = c0.norm_sqr();
        let mut acc0 = CompensatedSum::new();
        acc0 += p0;
        Ok(Self {
            pos: vec![c0],
            neg: vec![c0],
            u: vec![p0],
            v: vec![0.0],
            w: vec![0.0],
            pre0: vec![p0],
            pre2: vec![0.0],
            acc0,
            acc2: CompensatedSum::new(),
        })
    }

    fn push(&mut self, family: &CoefficientFamily, alpha: f64, n: usize) -> Result<()> {
        let cp = coefficient_checked(family, n as i64, alpha)?;
        let cm = coefficient_checked(family, -(n as i64), alpha)?;
        let (a, b) = (cp.norm_sqr(), cm.norm_sqr());
        let nf = n as f64;
        let u = a + b;
        let v = nf * nf * u;
        self.pos.push(cp);
        self.neg.push(cm);
        self.u.push(u);
        self.v.push(v);
        self.w.push(nf * (a - b));
        self.acc0 += u;
        self.acc2 += v;
        self.pre0.push(self.acc0.value());
        self.pre2.push(self.acc2.value());
        Ok(())
    }

    fn s0_at(&self, n: usize) -> f64 {
        self.pre0[n]
    }

    /// Tail model for the signed first-moment terms, fitted on `|w|`.
    fn first_model(&self) -> TailEstimate {
        if self.w.iter().all(|&x| x == 0.0) {
            return TailEstimate::zero();
        }
        let abs: Vec<f64> = self.w.iter().map(|x| x.abs()).collect();
        let mut t = estimate_tail(&abs);
        let sign = self
            .w
            .iter()
            .rev()
            .find(|&&x| x != 0.0)
            .map_or(1.0, |x| x.signum());
        t.value *= sign;
        t
    }

    /// Builds the spectrum for window `keep <= M` given tail models at M.
    fn assemble(
        &self,
        family: &CoefficientFamily,
        alpha: f64,
        keep: usize,
        t0: TailEstimate,
        t1: TailEstimate,
        t2: TailEstimate,
    ) -> TruncatedSpectrum {
        let m = self.u.len() - 1;
        let between = |xs: &[f64]| {
            xs[keep + 1..=m]
                .iter()
                .copied()
                .sum::<CompensatedSum>()
                .value()
        };
        let (x0, x1, x2) = (between(&self.u), between(&self.w), between(&self.v));

        let norm_tail = TailEstimate {
            kind: t0.kind,
            value: 0.0,
            error: x0 + t0.bound(),
        };
        let second_tail = match t2.kind {
            TailKind::Zero | TailKind::Geometric { .. } => TailEstimate {
                kind: t2.kind,
                value: 0.0,
                error: x2 + t2.bound(),
            },
            TailKind::Power { .. } | TailKind::Unresolved => TailEstimate {
                value: x2 + t2.value,
                ..t2
            },
            TailKind::Divergent { .. } => t2,
        };
        let first_tail = match (t1.kind, t2.kind) {
            (TailKind::Zero, _) if x1 == 0.0 => TailEstimate::zero(),
            // |n| |C_n|^2 <= n^2 |C_n|^2 / (N + 1) beyond the window
            (_, TailKind::Zero | TailKind::Geometric { .. }) => TailEstimate {
                kind: t2.kind,
                value: 0.0,
                error: second_tail.error / (keep as f64 + 1.0),
            },
            (TailKind::Divergent { .. }, _) => t1,
            _ => TailEstimate {
                value: x1 + t1.value,
                ..t1
            },
        };

        let mut coeffs = Vec::with_capacity(2 * keep + 1);
        coeffs.extend(self.neg[1..=keep].iter().rev());
        coeffs.extend(&self.pos[..=keep]);
        TruncatedSpectrum {
            alpha,
            cutoff: keep,
            coeffs,
            norm_sq: 1.0 / (2.0 * PI * self.pre0[keep]),
            norm_tail,
            first_tail,
            second_tail,
            is_real: family.is_real(),
            is_symmetric: family.is_symmetric(),
        }
    }
}

fn coefficient_checked(family: &CoefficientFamily, n: i64, alpha: f64) -> Result<Complex64> {
    let c = family.coefficient(n, alpha);
    if c.re.is_finite() && c.im.is_finite() {
        Ok(c)
    } else {
        Err(Error::InvalidFamily(format!(
            "{}: C_{n}({alpha}) = {c} is not finite",
            family.name()
        )))
    }
}

/// Builds the normalized spectrum of `family` at `alpha`.
///
/// Coefficients are scanned outwards until both the dropped normalization
/// mass and the tail of `sum n^2 |C_n|^2` are below `rel_tol` of what is
/// kept, then the window is shrunk to the smallest cutoff that still meets
/// both. A power-law tail of the second moment is kept as an estimated
/// correction (its uncertainty must meet `rel_tol`), and a divergent one is
/// recorded rather than rejected so that the error surfaces where the moment
/// is actually needed.
pub fn build_spectrum(
    family: &CoefficientFamily,
    alpha: f64,
    opts: &BuildOptions,
) -> Result<TruncatedSpectrum> {
    check_alpha(alpha)?;
    opts.validate()?;
    let rel = opts.rel_tol;
    let mut scan = Scan::new(family, alpha)?;

    if let Some(support) = family.support() {
        if support > opts.n_max {
            return Err(Error::NonConvergent {
                what: format!("support of {} exceeds n_max", family.name()),
                reached: opts.n_max,
            });
        }
        for n in 1..=support as usize {
            scan.push(family, alpha, n)?;
        }
        if scan.acc0.value() == 0.0 {
            return Err(Error::DegenerateState);
        }
        let zero = TailEstimate::zero();
        let keep = shrink(&scan, rel, zero, None);
        return Ok(scan.assemble(family, alpha, keep, zero, zero, zero));
    }

    let mut accepted = None;
    for n in 1..=opts.n_max as usize {
        scan.push(family, alpha, n)?;
        if n < 8 || !check_due(n) {
            continue;
        }
        let s0 = scan.acc0.value();
        if s0 == 0.0 {
            continue;
        }
        let t0 = estimate_tail(&scan.u);
        if t0.is_divergent() {
            return Err(Error::NonConvergent {
                what: format!(
                    "normalization sum of {} diverges at alpha = {alpha}",
                    family.name()
                ),
                reached: n as u64,
            });
        }
        if !(t0.bound() <= rel * s0) {
            continue;
        }
        let s2 = scan.acc2.value();
        let t2 = estimate_tail(&scan.v);
        let ok = match t2.kind {
            TailKind::Zero | TailKind::Geometric { .. } => t2.bound() <= rel * s2,
            TailKind::Power { .. } => t2.error <= rel * (s2 + t2.value),
            TailKind::Divergent { .. } => true,
            TailKind::Unresolved => false,
        };
        if ok {
            accepted = Some((t0, t2));
            break;
        }
    }
    let Some((t0, t2)) = accepted else {
        if scan.acc0.value() == 0.0 {
            return Err(Error::DegenerateState);
        }
        return Err(Error::NonConvergent {
            what: format!("tail criterion for {} at alpha = {alpha}", family.name()),
            reached: opts.n_max,
        });
    };
    let t1 = scan.first_model();
    let keep = shrink(&scan, rel, t0, Some(t2));
    Ok(scan.assemble(family, alpha, keep, t0, t1, t2))
}

/// Smallest cutoff whose dropped masses (explicit terms plus model tail)
/// still meet the criterion.
fn shrink(scan: &Scan, rel: f64, t0: TailEstimate, t2: Option<TailEstimate>) -> usize {
    let m = scan.u.len() - 1;
    let geometric2 = match t2 {
        None => true,
        Some(t) => matches!(t.kind, TailKind::Zero | TailKind::Geometric { .. }),
    };
    let mut dropped0 = CompensatedSum::new();
    dropped0 += t0.bound();
    let mut dropped2 = CompensatedSum::new();
    dropped2 += t2.map_or(0.0, |t| if geometric2 { t.bound() } else { 0.0 });
    let mut keep = m;
    for n in (0..m).rev() {
        dropped0 += scan.u[n + 1];
        dropped2 += scan.v[n + 1];
        let ok0 = dropped0.value() <= rel * scan.pre0[n];
        let ok2 = !geometric2 || dropped2.value() <= rel * scan.pre2[n];
        if ok0 && ok2 {
            keep = n;
        } else {
            break;
        }
    }
    keep
}

/// `(sum_n C_n e^{i n phi}, sum_n i n C_n e^{i n phi})` over the window, with
/// the powers of `e^{i phi}` generated by recurrence and re-anchored every 64
/// steps.
pub(crate) fn window_series(
    s: &TruncatedSpectrum,
    phi: f64,
    derivative: bool,
) -> (Complex64, Complex64) {
    let n0 = s.cutoff;
    let c = &s.coeffs;
    let step = Complex64::from_polar(1.0, phi);
    let mut z = Complex64::new(1.0, 0.0);
    let mut f = c[n0];
    let mut d = Complex64::new(0.0, 0.0);
    for k in 1..=n0 {
        z = if k % 64 == 0 {
            Complex64::from_polar(1.0, k as f64 * phi)
        } else {
            z * step
        };
        let (cp, cm) = (c[n0 + k], c[n0 - k]);
        let zc = z.conj();
        let (tp, tm) = (cp * z, cm * zc);
        f += tp + tm;
        if derivative {
            d += (tp - tm) * k as f64;
        }
    }
    (f, Complex64::new(-d.im, d.re))
}

/// `f(phi) = A sum_{|n|<=N} C_n e^{i n phi}`. Any real `phi` is accepted;
/// the state is 2 pi periodic.
pub fn evaluate_state(s: &TruncatedSpectrum, phi: f64) -> StateSample {
    let (f, _) = window_series(s, phi, false);
    StateSample {
        phi,
        value: f * s.amplitude(),
    }
}

/// `(f(phi), f'(phi))`.
pub fn evaluate_state_with_derivative(s: &TruncatedSpectrum, phi: f64) -> (Complex64, Complex64) {
    let (f, d) = window_series(s, phi, true);
    let a = s.amplitude();
    (f * a, d * a)
}

/// `|f(pi)|^2`, summed with exact signs `(-1)^n` rather than through `e^{i n pi}`.
pub fn boundary_density(s: &TruncatedSpectrum) -> f64 {
    let mut acc = ComplexSum::new();
    let n0 = s.cutoff as i64;
    for (i, c) in s.coeffs.iter().enumerate() {
        if (i as i64 - n0) % 2 == 0 {
            acc += *c;
        } else {
            acc += -*c;
        }
    }
    s.norm_sq * acc.value().norm_sqr()
}

/// `T_N(alpha) = sum_{|n|>N} n^2 |C_n(alpha)|^2` for each alpha in the grid.
///
/// Terms are summed explicitly until the tail model beyond the last one is
/// below 1e-14 of the retained sum. A power-law tail converges far too slowly
/// for that; its Euler–Maclaurin estimate is added instead once the
/// estimate's own uncertainty is below 1e-12 of the total.
pub fn tail_second_moment(
    family: &CoefficientFamily,
    alpha_grid: &[f64],
    n: u64,
) -> Result<Vec<f64>> {
    if alpha_grid.is_empty() {
        return Err(Error::invalid("empty alpha grid"));
    }
    if n < 1 {
        return Err(Error::invalid("N must be at least 1"));
    }
    alpha_grid
        .iter()
        .map(|&a| {
            check_alpha(a)?;
            tail_second_moment_at(family, a, n)
        })
        .collect()
}

const TAIL_PROBE_TOL: f64 = 1e-14;
/// An Euler–Maclaurin power-law estimate cannot be trusted to 1e-14: the
/// fitted exponent alone carries a few ulps.
const TAIL_POWER_TOL: f64 = 1e-12;
const TAIL_PROBE_EXTRA: u64 = 2_000_000;

fn tail_second_moment_at(family: &CoefficientFamily, alpha: f64, n: u64) -> Result<f64> {
    if family.support().is_some_and(|s| s <= n) {
        return Ok(0.0);
    }
    let n = n as usize;
    let mut v = vec![0.0];
    let mut retained = CompensatedSum::new();
    let limit = n + TAIL_PROBE_EXTRA as usize;
    for k in 1..=limit {
        let cp = coefficient_checked(family, k as i64, alpha)?;
        let cm = coefficient_checked(family, -(k as i64), alpha)?;
        let vk = (k * k) as f64 * (cp.norm_sqr() + cm.norm_sqr());
        v.push(vk);
        if k > n {
            retained += vk;
        }
        if family.support() == Some(k as u64) {
            return Ok(retained.value());
        }
        if k < n + 8 || !check_due(k - n) {
            continue;
        }
        let t = estimate_tail(&v);
        let r = retained.value();
        match t.kind {
            TailKind::Zero => return Ok(r),
            TailKind::Geometric { .. } => {
                if t.bound() <= TAIL_PROBE_TOL * r || t.bound() < f64::MIN_POSITIVE {
                    return Ok(r);
                }
            }
            TailKind::Power { .. } => {
                if t.error <= TAIL_POWER_TOL * (r + t.value) {
                    return Ok(r + t.value);
                }
            }
            TailKind::Divergent { exponent } => {
                return Err(Error::NonConvergent {
                    what: format!(
                        "second-moment tail of {} diverges at alpha = {alpha} (terms ~ n^-{exponent:.3})",
                        family.name()
                    ),
                    reached: k as u64,
                })
            }
            TailKind::Unresolved => {}
        }
    }
    Err(Error::NonConvergent {
        what: format!("second-moment tail of {} at alpha = {alpha}", family.name()),
        reached: limit as u64,
    })
}
