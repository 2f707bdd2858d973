//! Statistical engine: descriptives, t-tests, dummy-variable regression,
//! Mann-Whitney U, Cohen's kappa and percent agreement.
//!
//! All p-values are two-sided.

mod agreement;
mod descriptive;
mod mann_whitney;
mod parametric;
pub mod special;

use serde::{Deserialize, Serialize};

pub use agreement::{cohens_kappa, percent_agreement, AgreementResult};
pub use descriptive::{descriptive, Descriptive};
pub use mann_whitney::{mann_whitney_u, u_variance, MwMode, EXACT_CAP};
pub use parametric::{ols_group_regression, t_test, TVariant};

use crate::error::StatsError;

/// A labeled vector of observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub label: String,
    pub values: Vec<f64>,
}

impl Sample {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Self {
        Self { label: label.into(), values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub(crate) fn check(&self, min_len: usize) -> Result<(), StatsError> {
        if self.values.is_empty() {
            return Err(StatsError::EmptySample(self.label.clone()));
        }
        if self.values.len() < min_len {
            return Err(StatsError::Undersized { label: self.label.clone(), needed: min_len, got: self.values.len() });
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite(self.label.clone()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    WelchT,
    PooledT,
    OlsSlope,
    MannWhitneyNormal,
    MannWhitneyExact,
}

impl Method {
    pub fn is_t_based(self) -> bool {
        matches!(self, Method::WelchT | Method::PooledT | Method::OlsSlope)
    }
}

/// Marks results that were defined by convention rather than computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResultFlag {
    /// No variation anywhere; p is 1 by definition.
    Degenerate,
    /// Groups differ with zero within-group variance; p is 0.
    ExactSeparation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub method: Method,
    /// t for t-based methods, U of the first sample for Mann-Whitney.
    #[serde(with = "float_or_string")]
    pub statistic: f64,
    pub degrees_of_freedom: Option<f64>,
    pub p_value: f64,
    /// Continuity-corrected z (Mann-Whitney normal mode only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flag: Option<ResultFlag>,
}

/// JSON cannot carry infinities; encode them as strings.
mod float_or_string {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("bad float {other:?}"))),
            },
        }
    }
}

pub const METRICS: [&str; 3] = ["FRE", "GFI", "ARI"];
pub const MATRIX_TESTS: [&str; 3] = ["welch_t", "ols_slope", "mann_whitney"];

/// Per-metric readability samples for one arm, in [`METRICS`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSamples {
    pub fre: Sample,
    pub gfi: Sample,
    pub ari: Sample,
}

impl MetricSamples {
    pub fn by_index(&self, i: usize) -> &Sample {
        match i {
            0 => &self.fre,
            1 => &self.gfi,
            _ => &self.ari,
        }
    }
}

/// Rows FRE/GFI/ARI by columns Welch t, OLS slope, Mann-Whitney.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PValueMatrix {
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    pub cells: Vec<Vec<TestResult>>,
}

pub fn pvalue_matrix(original: &MetricSamples, generated: &MetricSamples) -> Result<PValueMatrix, StatsError> {
    let mut cells = Vec::with_capacity(3);
    for i in 0..METRICS.len() {
        let a = original.by_index(i);
        let b = generated.by_index(i);
        a.check(1)?;
        b.check(1)?;

        let welch = t_test(a, b, TVariant::Welch)?;

        let mut values = a.values.clone();
        values.extend_from_slice(&b.values);
        let groups: Vec<bool> = std::iter::repeat_n(false, a.len()).chain(std::iter::repeat_n(true, b.len())).collect();
        let ols = ols_group_regression(&Sample::new(format!("{}+{}", a.label, b.label), values), &groups)?;

        let mw = mann_whitney_u(a, b, MwMode::Auto)?;
        cells.push(vec![welch, ols, mw]);
    }
    Ok(PValueMatrix {
        rows: METRICS.iter().map(|s| s.to_string()).collect(),
        columns: MATRIX_TESTS.iter().map(|s| s.to_string()).collect(),
        cells,
    })
}
