//! Executable numerical checks on top of the core modules.
//!
//! Every check returns a [`CheckReport`]. Scaling laws are judged as fitted
//! exponents inside windows, never against absolute constants.

mod kernels;
mod series;
mod sobolev;

pub use kernels::{density_growth, endpoint_suite, green_convergence, q_bound_suite, truncation_convergence, EndpointOptions};
pub use series::{
    coefficient_convergence, factorial_growth_fit, growth_strength_scan, optimality_probe, series_vs_mc, GrowthFit,
};
pub use sobolev::{abs_counterexample, product_ratio, sobolev_product_check, BandLimited};

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// `f64` that survives JSON even when infinite or NaN (written as a string).
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Default)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        let v = self.0;
        if v.is_finite() {
            s.serialize_f64(v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Num;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> core::result::Result<Num, E> {
                Ok(Num(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> core::result::Result<Num, E> {
                Ok(Num(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> core::result::Result<Num, E> {
                Ok(Num(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> core::result::Result<Num, E> {
                match v {
                    "inf" => Ok(Num(f64::INFINITY)),
                    "-inf" => Ok(Num(f64::NEG_INFINITY)),
                    "nan" => Ok(Num(f64::NAN)),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// A named, tabular artifact (one CSV per table).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Num>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: &[f64]) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row.iter().map(|&v| Num(v)).collect());
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j].0).collect())
    }
}

/// One pass/fail decision inside a check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
    /// Informational verdicts are recorded but do not decide the report.
    #[serde(default = "yes")]
    pub gating: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CheckReport {
    pub check_id: String,
    pub inputs: BTreeMap<String, String>,
    pub metrics: BTreeMap<String, Num>,
    pub verdicts: Vec<Verdict>,
    pub pass: bool,
    pub tables: Vec<Table>,
    /// Filled in by whoever writes the tables to disk.
    pub artifacts: Vec<String>,
}

impl CheckReport {
    pub fn new(id: &str) -> Self {
        Self {
            check_id: id.into(),
            inputs: BTreeMap::new(),
            metrics: BTreeMap::new(),
            verdicts: Vec::new(),
            pass: true,
            tables: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    pub fn input(&mut self, k: &str, v: impl fmt::Display) -> &mut Self {
        self.inputs.insert(k.into(), format!("{v}"));
        self
    }

    pub fn metric(&mut self, k: &str, v: f64) -> &mut Self {
        self.metrics.insert(k.into(), Num(v));
        self
    }

    pub fn get(&self, k: &str) -> Option<f64> {
        self.metrics.get(k).map(|n| n.0)
    }

    pub fn require(&mut self, name: &str, pass: bool, detail: impl Into<String>) -> &mut Self {
        self.pass &= pass;
        self.verdicts.push(Verdict { name: name.into(), pass, detail: detail.into(), gating: true });
        self
    }

    pub fn note(&mut self, name: &str, pass: bool, detail: impl Into<String>) -> &mut Self {
        self.verdicts.push(Verdict { name: name.into(), pass, detail: detail.into(), gating: false });
        self
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    pub fn table(&mut self, t: Table) -> &mut Self {
        self.tables.push(t);
        self
    }

    pub fn get_table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

/// Local exponents `log(Δ_{j+1}/Δ_j) / log(x_{j+2}/x_{j+1})` of the
/// successive increments of `y`. A constant offset in `y` drops out.
pub fn differenced_exponents(x: &[f64], y: &[f64]) -> Vec<f64> {
    let inc: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    (0..inc.len().saturating_sub(1))
        .map(|j| libm::log(inc[j + 1] / inc[j]) / libm::log(x[j + 2] / x[j + 1]))
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| libm::log(*v)).collect();
    let ly: Vec<f64> = y.iter().map(|v| libm::log(*v)).collect();
    crate::num::linear_fit(&lx, &ly).0
}

pub(crate) fn within(x: f64, lo: f64, hi: f64) -> bool {
    x >= lo && x <= hi
}
