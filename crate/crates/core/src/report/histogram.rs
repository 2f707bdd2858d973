use serde::{Deserialize, Serialize};

use crate::error::ReportError;
use crate::grading::Arm;

/// How to bin a sample.
#[derive(Debug, Clone, PartialEq)]
pub enum Bins {
    /// Equal-width bins spanning `[min, max]` of the data.
    Count(usize),
    /// Explicit strictly increasing edges; every value must lie inside.
    Edges(Vec<f64>),
}

/// Bins are `[edges[i], edges[i+1])`, except the last, which is closed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramSpec {
    pub metric: String,
    pub arm: Arm,
    pub bin_edges: Vec<f64>,
    pub counts: Vec<usize>,
}

/// Equal-width edges over `[lo, hi]`; a zero-width range is widened to
/// `[lo − 0.5, lo + 0.5]`.
pub fn equal_width_edges(lo: f64, hi: f64, bins: usize) -> Result<Vec<f64>, ReportError> {
    if bins == 0 {
        return Err(ReportError::InvalidBins("bin count must be at least 1".into()));
    }
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(ReportError::InvalidBins(format!("bad range [{lo}, {hi}]")));
    }
    let (lo, hi) = if lo == hi { (lo - 0.5, hi + 0.5) } else { (lo, hi) };
    let width = (hi - lo) / bins as f64;
    let mut edges: Vec<f64> = (0..bins).map(|i| lo + i as f64 * width).collect();
    edges.push(hi);
    if edges.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(ReportError::InvalidBins(format!("range [{lo}, {hi}] too narrow for {bins} bins")));
    }
    Ok(edges)
}

fn bin_of(edges: &[f64], x: f64) -> Option<usize> {
    let last = edges.len() - 2;
    if x < edges[0] || x > edges[last + 1] {
        return None;
    }
    // number of interior edges ≤ x
    let i = edges[1..=last].partition_point(|&e| e <= x);
    Some(i.min(last))
}

pub fn histogram(values: &[f64], bins: Bins) -> Result<Histogram, ReportError> {
    if values.is_empty() {
        return Err(ReportError::EmptyHistogram);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(ReportError::InvalidBins("non-finite value".into()));
    }
    let edges = match bins {
        Bins::Count(n) => {
            let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            equal_width_edges(lo, hi, n)?
        }
        Bins::Edges(edges) => {
            if edges.len() < 2 || edges.windows(2).any(|w| !(w[0] < w[1])) || edges.iter().any(|e| !e.is_finite()) {
                return Err(ReportError::InvalidBins("edges must be finite and strictly increasing".into()));
            }
            edges
        }
    };
    let mut counts = vec![0usize; edges.len() - 1];
    for &v in values {
        let i = bin_of(&edges, v).ok_or_else(|| ReportError::InvalidBins(format!("value {v} outside the edges")))?;
        counts[i] += 1;
    }
    Ok(Histogram { edges, counts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_bins_over_one_to_four() {
        let h = histogram(&[1.0, 2.0, 3.0, 4.0], Bins::Count(2)).unwrap();
        assert_eq!(h.edges, [1.0, 2.5, 4.0]);
        assert_eq!(h.counts, [2, 2]);
    }

    #[test]
    fn constant_sample_widened() {
        let h = histogram(&[7.0; 5], Bins::Count(4)).unwrap();
        assert_eq!((h.edges[0], h.edges[4]), (6.5, 7.5));
        assert_eq!(h.counts.iter().filter(|&&c| c > 0).count(), 1);
        assert_eq!(h.counts.iter().sum::<usize>(), 5);
    }

    #[test]
    fn errors() {
        assert!(matches!(histogram(&[], Bins::Count(3)), Err(ReportError::EmptyHistogram)));
        assert!(histogram(&[1.0], Bins::Count(0)).is_err());
        assert!(histogram(&[1.0], Bins::Edges(vec![2.0, 1.0])).is_err());
        assert!(histogram(&[5.0], Bins::Edges(vec![0.0, 1.0])).is_err());
    }

    #[test]
    fn right_open_except_last() {
        let h = histogram(&[0.0, 1.0, 2.0], Bins::Edges(vec![0.0, 1.0, 2.0])).unwrap();
        assert_eq!(h.counts, [1, 2]);
    }

    proptest! {
        #[test]
        fn counts_conserve_sample_size(values in prop::collection::vec(-1e6f64..1e6, 1..200), bins in 1usize..40) {
            let h = histogram(&values, Bins::Count(bins)).unwrap();
            prop_assert_eq!(h.counts.iter().sum::<usize>(), values.len());
            prop_assert_eq!(h.counts.len(), bins);
            prop_assert!(h.edges.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
