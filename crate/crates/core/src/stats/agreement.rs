use serde::{Deserialize, Serialize};

use crate::error::StatsError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementResult<T> {
    pub percent_agreement: f64,
    /// `None` when chance agreement is 1 but observed agreement is not.
    pub kappa: Option<f64>,
    pub observed: f64,
    pub expected: f64,
    pub n_items: usize,
    pub categories: Vec<T>,
}

fn check_lengths<T>(r1: &[T], r2: &[T]) -> Result<(), StatsError> {
    if r1.len() != r2.len() {
        return Err(StatsError::LengthMismatch(r1.len(), r2.len()));
    }
    if r1.is_empty() {
        return Err(StatsError::NoRatings);
    }
    Ok(())
}

/// Fraction of positions where both raters chose the same category.
pub fn percent_agreement<T: PartialEq>(r1: &[T], r2: &[T]) -> Result<f64, StatsError> {
    check_lengths(r1, r2)?;
    let matches = r1.iter().zip(r2).filter(|(a, b)| a == b).count();
    Ok(matches as f64 / r1.len() as f64)
}

/// Cohen's kappa over a declared category set.
///
/// With chance agreement of 1 (both raters constant on the same category)
/// kappa is 1 when observed agreement is also 1, and undefined otherwise.
pub fn cohens_kappa<T: PartialEq + Clone>(r1: &[T], r2: &[T], categories: &[T]) -> Result<AgreementResult<T>, StatsError> {
    check_lengths(r1, r2)?;
    let index = |r: &T, pos: usize| categories.iter().position(|c| c == r).ok_or(StatsError::UnknownCategory(pos));

    let k = categories.len();
    let mut left = vec![0usize; k];
    let mut right = vec![0usize; k];
    let mut matches = 0usize;
    for (pos, (a, b)) in r1.iter().zip(r2).enumerate() {
        let (i, j) = (index(a, pos)?, index(b, pos)?);
        left[i] += 1;
        right[j] += 1;
        if i == j {
            matches += 1;
        }
    }

    let n = r1.len() as f64;
    let observed = matches as f64 / n;
    let expected: f64 = left.iter().zip(&right).map(|(&l, &r)| (l as f64 / n) * (r as f64 / n)).sum();
    let kappa = if left == right && left.iter().filter(|c| **c > 0).count() == 1 {
        // both raters used one and the same category throughout: p_e = 1
        (matches == r1.len()).then_some(1.0)
    } else {
        Some((observed - expected) / (1.0 - expected))
    };

    Ok(AgreementResult { percent_agreement: observed, kappa, observed, expected, n_items: r1.len(), categories: categories.to_vec() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percent_examples() {
        assert_eq!(percent_agreement(&[0, 1, 2], &[0, 1, 2]).unwrap(), 1.0);
        assert_eq!(percent_agreement(&[0], &[2]).unwrap(), 0.0);
        let r1 = vec![1u8; 500];
        let mut r2 = r1.clone();
        for x in r2.iter_mut().take(69) {
            *x = 2;
        }
        assert_eq!(percent_agreement(&r1, &r2).unwrap(), 431.0 / 500.0);
        assert_eq!(percent_agreement(&r1, &r2).unwrap(), 0.862);
        assert!(matches!(percent_agreement(&[1], &[1, 2]), Err(StatsError::LengthMismatch(1, 2))));
        assert!(matches!(percent_agreement::<u8>(&[], &[]), Err(StatsError::NoRatings)));
    }

    #[test]
    fn kappa_examples() {
        let r = cohens_kappa(&[0, 1, 2, 2, 1], &[0, 1, 2, 2, 1], &[0, 1, 2]).unwrap();
        assert_eq!(r.kappa, Some(1.0));

        let r = cohens_kappa(&[0, 0, 1, 1], &[0, 1, 0, 1], &[0, 1]).unwrap();
        assert_eq!((r.observed, r.expected, r.kappa), (0.5, 0.5, Some(0.0)));

        let r = cohens_kappa(&[2, 2, 2], &[2, 2, 2], &[0, 1, 2]).unwrap();
        assert_eq!((r.expected, r.kappa), (1.0, Some(1.0)));
    }

    #[test]
    fn kappa_hand_computed() {
        // 2x2 table [[20, 5], [10, 15]]: p_o = 0.7, p_e = 0.5·0.6 + 0.5·0.4 = 0.5
        let mut r1 = Vec::new();
        let mut r2 = Vec::new();
        for (a, b, count) in [("y", "y", 20), ("y", "n", 5), ("n", "y", 10), ("n", "n", 15)] {
            for _ in 0..count {
                r1.push(a);
                r2.push(b);
            }
        }
        let r = cohens_kappa(&r1, &r2, &["y", "n"]).unwrap();
        assert!((r.kappa.unwrap() - 0.4).abs() < 1e-12);
    }

    #[test]
    fn kappa_errors() {
        assert!(matches!(cohens_kappa(&[0, 3], &[0, 1], &[0, 1, 2]), Err(StatsError::UnknownCategory(1))));
        assert!(matches!(cohens_kappa(&[0], &[0, 1], &[0, 1]), Err(StatsError::LengthMismatch(1, 2))));
    }
}
