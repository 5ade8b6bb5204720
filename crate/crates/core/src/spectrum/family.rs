use crate::error::{Error, Result};
use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

/// Rule `(n, alpha) -> C_n(alpha)`.
pub type CoefficientRule = Arc<dyn Fn(i64, f64) -> Complex64 + Send + Sync>;

/// Which family a [`CoefficientFamily`] is. Closed-form fast paths key off this.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyKind {
    /// `C_n = e^{-alpha |n|}`.
    Exponential,
    /// `C_n = |n|^{-alpha}` for `n != 0`, `C_0 = 0`.
    Polynomial,
    /// A single nonzero coefficient `C_m = 1`.
    SingleMode(i64),
    Custom,
}

/// A one-parameter family of Fourier coefficients `{C_n(alpha)}` (before
/// normalization).
#[derive(Clone)]
pub struct CoefficientFamily {
    name: String,
    rule: CoefficientRule,
    is_real: bool,
    is_symmetric: bool,
    support: Option<u64>,
    kind: FamilyKind,
}

impl fmt::Debug for CoefficientFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientFamily")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .field("is_real", &self.is_real)
            .field("is_symmetric", &self.is_symmetric)
            .field("support", &self.support)
            .finish()
    }
}

impl CoefficientFamily {
    /// `C_n(alpha) = e^{-alpha |n|}`.
    pub fn exponential() -> Self {
        Self {
            name: "exp".into(),
            rule: Arc::new(|n, a| Complex64::new((-a * n.unsigned_abs() as f64).exp(), 0.0)),
            is_real: true,
            is_symmetric: true,
            support: None,
            kind: FamilyKind::Exponential,
        }
    }

    /// `C_n(alpha) = |n|^{-alpha}`, `C_0 = 0`.
    pub fn polynomial() -> Self {
        Self {
            name: "poly".into(),
            rule: Arc::new(|n, a| {
                if n == 0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new((n.unsigned_abs() as f64).powf(-a), 0.0)
                }
            }),
            is_real: true,
            is_symmetric: true,
            support: None,
            kind: FamilyKind::Polynomial,
        }
    }

    /// The `L_z` eigenstate `e^{i m phi}`, independent of `alpha`.
    pub fn single_mode(m: i64) -> Self {
        Self {
            name: format!("single{m}"),
            rule: Arc::new(move |n, _| {
                if n == m {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }),
            is_real: true,
            is_symmetric: m == 0,
            support: Some(m.unsigned_abs()),
            kind: FamilyKind::SingleMode(m),
        }
    }

    /// A family that ignores `alpha` and returns fixed coefficients.
    pub fn fixed(name: impl Into<String>, coeffs: &[(i64, Complex64)]) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidFamily("no coefficients given".into()));
        }
        let table: Vec<(i64, Complex64)> = coeffs.to_vec();
        let support = table.iter().map(|(n, _)| n.unsigned_abs()).max();
        let is_real = table.iter().all(|(_, c)| c.im == 0.0);
        let is_symmetric = table.iter().all(|&(n, c)| {
            let partner = table
                .iter()
                .find(|(m, _)| *m == -n)
                .map(|(_, d)| d.norm())
                .unwrap_or(0.0);
            partner == c.norm()
        });
        Ok(Self {
            name: name.into(),
            rule: Arc::new(move |n, _| {
                table
                    .iter()
                    .find(|(m, _)| *m == n)
                    .map(|(_, c)| *c)
                    .unwrap_or_default()
            }),
            is_real,
            is_symmetric,
            support,
            kind: FamilyKind::Custom,
        })
    }

    /// Arbitrary rule. `support`, when given, is the largest `|n|` with a
    /// nonzero coefficient; spectra are then scanned exactly that far.
    pub fn custom(
        name: impl Into<String>,
        rule: CoefficientRule,
        is_real: bool,
        is_symmetric: bool,
        support: Option<u64>,
    ) -> Self {
        Self {
            name: name.into(),
            rule,
            is_real,
            is_symmetric,
            support,
            kind: FamilyKind::Custom,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn is_real(&self) -> bool {
        self.is_real
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_symmetric
    }

    pub fn support(&self) -> Option<u64> {
        self.support
    }

    #[inline]
    pub fn coefficient(&self, n: i64, alpha: f64) -> Complex64 {
        (self.rule)(n, alpha)
    }

    /// Same family with every coefficient multiplied by `factor`. Loses any
    /// closed-form identity.
    pub fn scaled(&self, factor: f64) -> Self {
        let rule = self.rule.clone();
        Self {
            name: format!("{}*{factor}", self.name),
            rule: Arc::new(move |n, a| rule(n, a) * factor),
            kind: FamilyKind::Custom,
            ..self.clone()
        }
    }

    /// Checks the `is_real` / `is_symmetric` flags on a finite grid.
    pub fn validate(&self, alphas: &[f64], max_index: i64) -> Result<()> {
        for &a in alphas {
            for n in -max_index..=max_index {
                let c = self.coefficient(n, a);
                if !c.re.is_finite() || !c.im.is_finite() {
                    return Err(Error::InvalidFamily(format!(
                        "{}: non-finite coefficient at n = {n}, alpha = {a}",
                        self.name
                    )));
                }
                if self.is_real && c.im != 0.0 {
                    return Err(Error::InvalidFamily(format!(
                        "{}: declared real but C_{n}({a}) = {c}",
                        self.name
                    )));
                }
                if self.is_symmetric {
                    let d = self.coefficient(-n, a);
                    let scale = c.norm().max(d.norm());
                    if (c.norm() - d.norm()).abs() > 1e-14 * scale {
                        return Err(Error::InvalidFamily(format!(
                            "{}: declared symmetric but |C_{n}| != |C_{}| at alpha = {a}",
                            self.name, -n
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}
