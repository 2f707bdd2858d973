use serde::{Deserialize, Serialize};

use super::Sample;
use crate::error::StatsError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Descriptive {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n − 1); `None` below two observations.
    pub sd: Option<f64>,
    pub median: f64,
    /// Adjusted Fisher–Pearson G1; `None` below three observations or at zero variance.
    pub skewness: Option<f64>,
    pub min: f64,
    pub max: f64,
}

pub fn descriptive(sample: &Sample) -> Result<Descriptive, StatsError> {
    sample.check(1)?;
    let values = &sample.values;
    let n = values.len();
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;

    let m2 = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / nf;
    let m3 = values.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / nf;

    let sd = (n >= 2).then(|| (m2 * nf / (nf - 1.0)).sqrt());
    let skewness = (n >= 3 && m2 > 0.0).then(|| {
        let g1 = m3 / m2.powf(1.5);
        g1 * (nf * (nf - 1.0)).sqrt() / (nf - 2.0)
    });

    let mut sorted = values.clone();
    sorted.sort_by(f64::total_cmp);
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };

    Ok(Descriptive { n, mean, sd, median, skewness, min: sorted[0], max: sorted[n - 1] })
}
