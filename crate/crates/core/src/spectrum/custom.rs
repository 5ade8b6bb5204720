//! Custom coefficient families read from JSON.
//!
//! ```json
//! {
//!   "name": "lopsided",
//!   "symmetric": false,
//!   "real": false,
//!   "entries": [
//!     { "n": 0, "expr": "exp" },
//!     { "n": 1, "expr": "poly" },
//!     { "n": -2, "expr": "table" }
//!   ],
//!   "table": {
//!     "0.5": [[-2, 0.3, 0.1]],
//!     "2.0": [[-2, 0.1, 0.0]]
//!   }
//! }
//! ```
//!
//! Each entry switches on one coefficient; every index not listed is zero.
//! - `exp`: `C_n = e^{-alpha |n|}`
//! - `poly`: `C_n = |n|^{-alpha}` (not allowed for `n = 0`)
//! - `table`: `C_n = re + i im` taken from `table`. Keys are alpha values
//!   written as strings; between keys the real and imaginary parts are
//!   interpolated linearly in alpha, outside the key range the nearest row is
//!   used. An index missing from a row counts as zero at that alpha.
//!
//! `real` and `symmetric` are checked against the rule at every table key and
//! at alpha in {0.1, 1, 10}; a family whose flags lie is rejected.

use super::family::CoefficientFamily;
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::Arc;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub name: String,
    pub symmetric: bool,
    pub real: bool,
    pub entries: Vec<EntrySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<BTreeMap<String, Vec<[f64; 3]>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntrySpec {
    pub n: i64,
    pub expr: EntryExpr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryExpr {
    Exp,
    Poly,
    Table,
}

#[derive(Clone, Copy, Debug)]
enum Rule {
    Exp,
    Poly,
    Table(usize),
}

impl FamilySpec {
    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn into_family(self) -> Result<CoefficientFamily> {
        let bad = |msg: String| Error::InvalidFamily(format!("{}: {msg}", self.name));
        if self.entries.is_empty() {
            return Err(bad("no entries".into()));
        }
        let mut seen = BTreeSet::new();
        for e in &self.entries {
            if !seen.insert(e.n) {
                return Err(bad(format!("index {} listed twice", e.n)));
            }
            if e.n == 0 && e.expr == EntryExpr::Poly {
                return Err(bad("poly entry at n = 0 is undefined".into()));
            }
        }
        let table_indices: Vec<i64> = self
            .entries
            .iter()
            .filter(|e| e.expr == EntryExpr::Table)
            .map(|e| e.n)
            .collect();

        // alpha keys with one (re, im) column per table entry
        let mut keys: Vec<(f64, Vec<Complex64>)> = Vec::new();
        match (&self.table, table_indices.is_empty()) {
            (None, false) => return Err(bad("table entries without a table".into())),
            (Some(t), _) if !table_indices.is_empty() && t.is_empty() => {
                return Err(bad("empty table".into()))
            }
            (Some(t), _) => {
                for (key, rows) in t {
                    let a: f64 = key
                        .trim()
                        .parse()
                        .map_err(|_| bad(format!("table key {key:?} is not a number")))?;
                    if !(a > 0.0 && a.is_finite()) {
                        return Err(bad(format!("table key {key:?} must be a positive alpha")));
                    }
                    let mut column = vec![Complex64::new(0.0, 0.0); table_indices.len()];
                    for row in rows {
                        let [n, re, im] = *row;
                        if n.fract() != 0.0 {
                            return Err(bad(format!("row index {n} is not an integer")));
                        }
                        let slot = table_indices
                            .iter()
                            .position(|&m| m as f64 == n)
                            .ok_or_else(|| bad(format!("row index {n} has no table entry")))?;
                        column[slot] = Complex64::new(re, im);
                    }
                    keys.push((a, column));
                }
                keys.sort_by(|x, y| x.0.total_cmp(&y.0));
                if keys.windows(2).any(|w| w[0].0 == w[1].0) {
                    return Err(bad("duplicate alpha in table".into()));
                }
            }
            (None, true) => {}
        }

        let support = self.entries.iter().map(|e| e.n.unsigned_abs()).max();
        let rules: BTreeMap<i64, Rule> = self
            .entries
            .iter()
            .map(|e| {
                let r = match e.expr {
                    EntryExpr::Exp => Rule::Exp,
                    EntryExpr::Poly => Rule::Poly,
                    EntryExpr::Table => {
                        Rule::Table(table_indices.iter().position(|&m| m == e.n).unwrap())
                    }
                };
                (e.n, r)
            })
            .collect();
        let keys = Arc::new(keys);
        let probe: Vec<f64> = [0.1, 1.0, 10.0]
            .into_iter()
            .chain(keys.iter().map(|k| k.0))
            .collect();

        let lookup = keys.clone();
        let rule = Arc::new(move |n: i64, a: f64| match rules.get(&n) {
            None => Complex64::new(0.0, 0.0),
            Some(Rule::Exp) => Complex64::new((-a * n.unsigned_abs() as f64).exp(), 0.0),
            Some(Rule::Poly) => Complex64::new((n.unsigned_abs() as f64).powf(-a), 0.0),
            Some(Rule::Table(slot)) => interpolate(&lookup, *slot, a),
        });
        let family =
            CoefficientFamily::custom(self.name.clone(), rule, self.real, self.symmetric, support);
        family.validate(&probe, support.unwrap_or(0) as i64 + 1)?;
        Ok(family)
    }
}

fn interpolate(keys: &[(f64, Vec<Complex64>)], slot: usize, a: f64) -> Complex64 {
    let i = keys.partition_point(|k| k.0 <= a);
    if i == 0 {
        return keys[0].1[slot];
    }
    if i == keys.len() {
        return keys[i - 1].1[slot];
    }
    let (a0, c0) = (keys[i - 1].0, keys[i - 1].1[slot]);
    let (a1, c1) = (keys[i].0, keys[i].1[slot]);
    let t = (a - a0) / (a1 - a0);
    c0 + (c1 - c0) * t
}

/// Reads a JSON family definition from `path`.
pub fn load_family(path: impl AsRef<Path>) -> Result<CoefficientFamily> {
    FamilySpec::load(path)?.into_family()
}

#[cfg(test)]
mod tests {
    use super::*;

    const LOPSIDED: &str = r#"{
        "name": "lopsided", "symmetric": false, "real": false,
        "entries": [{"n": 0, "expr": "exp"}, {"n": 1, "expr": "poly"}, {"n": -2, "expr": "table"}],
        "table": {"0.5": [[-2, 0.3, 0.1]], "2.0": [[-2, 0.1, 0.0]]}
    }"#;

    #[test]
    fn table_interpolates_and_clamps() {
        let f = FamilySpec::from_json_str(LOPSIDED)
            .unwrap()
            .into_family()
            .unwrap();
        assert_eq!(f.support(), Some(2));
        assert_eq!(f.coefficient(-2, 0.1), Complex64::new(0.3, 0.1));
        assert_eq!(f.coefficient(-2, 9.0), Complex64::new(0.1, 0.0));
        let mid = f.coefficient(-2, 1.25);
        assert!((mid.re - 0.2).abs() < 1e-15 && (mid.im - 0.05).abs() < 1e-15);
        assert_eq!(f.coefficient(1, 2.0).re, 1.0);
        assert_eq!(f.coefficient(0, 2.0).re, 1.0);
        assert_eq!(f.coefficient(5, 2.0).norm(), 0.0);
    }

    #[test]
    fn single_mode_file() {
        let text = r#"{"name": "one", "symmetric": true, "real": true,
                       "entries": [{"n": 0, "expr": "table"}], "table": {"1": [[0, 1, 0]]}}"#;
        let f = FamilySpec::from_json_str(text)
            .unwrap()
            .into_family()
            .unwrap();
        assert_eq!(f.support(), Some(0));
        assert_eq!(f.coefficient(0, 7.0).re, 1.0);
    }

    #[test]
    fn rejects_malformed_definitions() {
        let cases = [
            r#"{"name":"x","symmetric":true,"real":true,"entries":[]}"#,
            r#"{"name":"x","symmetric":true,"real":true,"entries":[{"n":0,"expr":"poly"}]}"#,
            r#"{"name":"x","symmetric":true,"real":true,"entries":[{"n":1,"expr":"table"}]}"#,
            r#"{"name":"x","symmetric":true,"real":true,"entries":[{"n":1,"expr":"exp"},{"n":1,"expr":"exp"}]}"#,
            r#"{"name":"x","symmetric":true,"real":true,"entries":[{"n":1,"expr":"cosh"}]}"#,
            // symmetric flag is false in fact
            r#"{"name":"x","symmetric":true,"real":true,"entries":[{"n":1,"expr":"exp"}]}"#,
            // real flag is false in fact
            r#"{"name":"x","symmetric":false,"real":true,"entries":[{"n":1,"expr":"table"}],
                "table":{"1.0":[[1,0.0,1.0]]}}"#,
            r#"{"name":"x","symmetric":false,"real":false,"entries":[{"n":1,"expr":"table"}],
                "table":{"abc":[[1,0.0,1.0]]}}"#,
        ];
        for text in cases {
            let r = FamilySpec::from_json_str(text).and_then(FamilySpec::into_family);
            assert!(matches!(r, Err(Error::InvalidFamily(_))), "{text}");
        }
    }

    #[test]
    fn round_trips_through_serde() {
        let spec = FamilySpec::from_json_str(LOPSIDED).unwrap();
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(FamilySpec::from_json_str(&text).unwrap(), spec);
    }
}
