use serde::{Deserialize, Serialize};

use super::special::student_t_two_sided;
use super::{Method, ResultFlag, Sample, TestResult};
use crate::error::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TVariant {
    Welch,
    Pooled,
}

fn mean_var(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Result for zero standard error: equal means are degenerate (p = 1),
/// different means are exactly separated (p = 0).
fn zero_variance(method: Method, diff: f64, df: f64) -> TestResult {
    if diff == 0.0 {
        TestResult { method, statistic: 0.0, degrees_of_freedom: Some(df), p_value: 1.0, z: None, flag: Some(ResultFlag::Degenerate) }
    } else {
        TestResult {
            method,
            statistic: diff.signum() * f64::INFINITY,
            degrees_of_freedom: Some(df),
            p_value: 0.0,
            z: None,
            flag: Some(ResultFlag::ExactSeparation),
        }
    }
}

/// Two-sample t-test of `mean(a) − mean(b)`.
pub fn t_test(a: &Sample, b: &Sample, variant: TVariant) -> Result<TestResult, StatsError> {
    a.check(2)?;
    b.check(2)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, va) = mean_var(&a.values);
    let (mb, vb) = mean_var(&b.values);
    let diff = ma - mb;

    let (method, se2, df) = match variant {
        TVariant::Welch => {
            let (wa, wb) = (va / na, vb / nb);
            let se2 = wa + wb;
            let df = se2 * se2 / (wa * wa / (na - 1.0) + wb * wb / (nb - 1.0));
            (Method::WelchT, se2, df)
        }
        TVariant::Pooled => {
            let df = na + nb - 2.0;
            let pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / df;
            (Method::PooledT, pooled * (1.0 / na + 1.0 / nb), df)
        }
    };

    if se2 == 0.0 {
        return Ok(zero_variance(method, diff, na + nb - 2.0));
    }
    let t = diff / se2.sqrt();
    Ok(TestResult { method, statistic: t, degrees_of_freedom: Some(df), p_value: student_t_two_sided(t, df), z: None, flag: None })
}

/// Least-squares fit of `y = β0 + β1·x` with a binary group indicator `x`
/// (`true` = 1). Reports the slope t statistic with `n − 2` degrees of freedom.
pub fn ols_group_regression(values: &Sample, group: &[bool]) -> Result<TestResult, StatsError> {
    values.check(3)?;
    if group.len() != values.len() {
        return Err(StatsError::LengthMismatch(values.len(), group.len()));
    }
    let n1 = group.iter().filter(|g| **g).count();
    if n1 == 0 || n1 == group.len() {
        return Err(StatsError::SingleGroup);
    }

    let n = values.len() as f64;
    let xs: Vec<f64> = group.iter().map(|&g| if g { 1.0 } else { 0.0 }).collect();
    let ys = &values.values;
    let x_bar = xs.iter().sum::<f64>() / n;
    let y_bar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - x_bar).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - x_bar) * (y - y_bar)).sum();
    let slope = sxy / sxx;
    let intercept = y_bar - slope * x_bar;
    let df = n - 2.0;

    let constant_within = |flag: bool| {
        let mut it = ys.iter().zip(group).filter(|(_, g)| **g == flag).map(|(y, _)| *y);
        let first = it.next();
        it.all(|y| Some(y) == first)
    };
    if constant_within(false) && constant_within(true) {
        let mean_of = |flag: bool| ys.iter().zip(group).find(|(_, g)| **g == flag).map(|(y, _)| *y).unwrap();
        return Ok(zero_variance(Method::OlsSlope, mean_of(true) - mean_of(false), df));
    }

    let sse: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let se = (sse / df / sxx).sqrt();
    let t = slope / se;
    Ok(TestResult {
        method: Method::OlsSlope,
        statistic: t,
        degrees_of_freedom: Some(df),
        p_value: student_t_two_sided(t, df),
        z: None,
        flag: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[f64]) -> Sample {
        Sample::new("s", v.to_vec())
    }

    #[test]
    fn identical_samples() {
        let a = s(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        for variant in [TVariant::Welch, TVariant::Pooled] {
            let r = t_test(&a, &a, variant).unwrap();
            assert_eq!(r.statistic, 0.0);
            assert!((r.p_value - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn pooled_reference() {
        // mean diff −2, both variances 2.5, se = sqrt(2.5·0.4) = 1, df = 8.
        // Two-sided p for t = −2 at df = 8 from the closed form of the t CDF with
        // even df: P(|T| ≥ 2) = 1 − sin θ·(1 + cos²θ/2 + 3cos⁴θ/8 + 5cos⁶θ/16), θ = atan(2/√8).
        let r = t_test(&s(&[1.0, 2.0, 3.0, 4.0, 5.0]), &s(&[3.0, 4.0, 5.0, 6.0, 7.0]), TVariant::Pooled).unwrap();
        assert!((r.statistic + 2.0).abs() < 1e-12);
        assert_eq!(r.degrees_of_freedom, Some(8.0));
        let theta = (2.0 / 8.0f64.sqrt()).atan();
        let c2 = theta.cos().powi(2);
        let expected = 1.0 - theta.sin() * (1.0 + c2 / 2.0 + 3.0 * c2 * c2 / 8.0 + 5.0 * c2 * c2 * c2 / 16.0);
        assert!((r.p_value - expected).abs() < 1e-12, "{} vs {}", r.p_value, expected);
        assert!((r.p_value - 0.080_516_237_957_262_57).abs() < 1e-12);
    }

    #[test]
    fn welch_small_samples() {
        let r = t_test(&s(&[1.0, 2.0]), &s(&[1.0, 2.0, 3.0]), TVariant::Welch).unwrap();
        assert!(r.p_value > 0.0 && r.p_value <= 1.0);
        assert!(r.degrees_of_freedom.unwrap() > 0.0);
    }

    #[test]
    fn welch_df_equal_sizes_equal_variance() {
        let r = t_test(&s(&[1.0, 2.0, 3.0, 4.0, 5.0]), &s(&[3.0, 4.0, 5.0, 6.0, 7.0]), TVariant::Welch).unwrap();
        assert!((r.degrees_of_freedom.unwrap() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn undersized_sample() {
        assert!(matches!(
            t_test(&s(&[1.0]), &s(&[1.0, 2.0]), TVariant::Welch),
            Err(StatsError::Undersized { needed: 2, got: 1, .. })
        ));
    }

    #[test]
    fn constant_samples() {
        let r = t_test(&s(&[3.0, 3.0]), &s(&[3.0, 3.0, 3.0]), TVariant::Pooled).unwrap();
        assert_eq!((r.p_value, r.flag), (1.0, Some(ResultFlag::Degenerate)));
        let r = t_test(&s(&[3.0, 3.0]), &s(&[4.0, 4.0]), TVariant::Welch).unwrap();
        assert_eq!((r.p_value, r.flag), (0.0, Some(ResultFlag::ExactSeparation)));
        assert_eq!(r.statistic, f64::NEG_INFINITY);
    }

    #[test]
    fn ols_identical_groups() {
        let v = s(&[1.0, 2.0, 3.0, 1.0, 2.0, 3.0]);
        let g = [false, false, false, true, true, true];
        let r = ols_group_regression(&v, &g).unwrap();
        assert!(r.statistic.abs() < 1e-12);
        assert!((r.p_value - 1.0).abs() < 1e-12);
        assert_eq!(r.degrees_of_freedom, Some(4.0));
    }

    #[test]
    fn ols_matches_pooled() {
        let a = [2.0, 4.5, 3.1, 5.0];
        let b = [6.0, 5.5, 7.25, 8.0, 6.6];
        let pooled = t_test(&s(&a), &s(&b), TVariant::Pooled).unwrap();
        let values: Vec<f64> = a.iter().chain(&b).copied().collect();
        let group: Vec<bool> = (0..9).map(|i| i < 4).collect();
        let ols = ols_group_regression(&s(&values), &group).unwrap();
        assert!((ols.statistic - pooled.statistic).abs() < 1e-9);
        assert_eq!(ols.degrees_of_freedom, pooled.degrees_of_freedom);
        assert!((ols.p_value - pooled.p_value).abs() < 1e-9);
    }

    #[test]
    fn ols_errors() {
        assert!(matches!(ols_group_regression(&s(&[1.0, 2.0]), &[true, false]), Err(StatsError::Undersized { .. })));
        assert!(matches!(ols_group_regression(&s(&[1.0, 2.0, 3.0]), &[true, true, true]), Err(StatsError::SingleGroup)));
        assert!(matches!(ols_group_regression(&s(&[1.0, 2.0, 3.0]), &[true, false]), Err(StatsError::LengthMismatch(3, 2))));
    }

    #[test]
    fn ols_exact_separation() {
        let r = ols_group_regression(&s(&[1.0, 1.0, 5.0, 5.0]), &[false, false, true, true]).unwrap();
        assert_eq!((r.p_value, r.flag), (0.0, Some(ResultFlag::ExactSeparation)));
        assert_eq!(r.statistic, f64::INFINITY);
    }
}
