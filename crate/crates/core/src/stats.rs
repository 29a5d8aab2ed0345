//! Estimators shared by the experiments: means, standard errors, normal
//! confidence bands, cross-graph variance and a two-sample KS statistic.

use serde::Serialize;

use crate::error::{Error, Result};

/// Compensated (Neumaier) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// Two-sided 97.5% standard normal quantile.
const Z_975: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummaryStat {
    pub n_samples: usize,
    pub mean: f64,
    pub std_error: f64,
    pub ci95_lo: f64,
    pub ci95_hi: f64,
}

impl SummaryStat {
    /// True when `value` is within `k` standard errors of the mean.
    pub fn within_sigmas(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.std_error
    }
}

fn sample_mean_and_variance(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = compensated_sum(samples.iter().copied()) / n;
    let ss = compensated_sum(samples.iter().map(|x| (x - mean) * (x - mean)));
    (mean, ss / (n - 1.0))
}

/// Mean, standard error `sd/sqrt(N)` and a normal 95% interval.
pub fn summarize(samples: &[f64]) -> Result<SummaryStat> {
    if samples.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: samples.len(),
        });
    }
    let (mean, var) = sample_mean_and_variance(samples);
    let std_error = (var / samples.len() as f64).sqrt();
    Ok(SummaryStat {
        n_samples: samples.len(),
        mean,
        std_error,
        ci95_lo: mean - Z_975 * std_error,
        ci95_hi: mean + Z_975 * std_error,
    })
}

/// Sample variance (divisor N-1) of per-graph quenched means.
pub fn cross_graph_variance(per_graph_means: &[f64]) -> Result<f64> {
    if per_graph_means.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: per_graph_means.len(),
        });
    }
    Ok(sample_mean_and_variance(per_graph_means).1)
}

/// Two-sample Kolmogorov-Smirnov statistic `sup |F_a - F_b|`.
///
/// Ties are handled by advancing both empirical CDFs past equal values before
/// comparing, so discrete samples (step counts) are treated correctly.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::TooFewSamples {
            needed: 1,
            got: a.len().min(b.len()),
        });
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Asymptotic critical value of the two-sample KS statistic at level `alpha`.
pub fn ks_critical_value(alpha: f64, na: usize, nb: usize) -> f64 {
    let c = (-0.5 * (alpha / 2.0).ln()).sqrt();
    let (na, nb) = (na as f64, nb as f64);
    c * ((na + nb) / (na * nb)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_samples_have_zero_error() {
        let s = summarize(&[3.0; 10]).unwrap();
        assert_eq!(s.mean, 3.0);
        assert_eq!(s.std_error, 0.0);
        assert_eq!(s.ci95_lo, s.ci95_hi);
    }

    #[test]
    fn two_point_summary_by_hand() {
        // sd = sqrt(0.5), se = sqrt(0.5)/sqrt(2) = 0.5
        let s = summarize(&[0.0, 1.0]).unwrap();
        assert!((s.mean - 0.5).abs() < 1e-15);
        assert!((s.std_error - 0.5).abs() < 1e-15);
        assert!(s.ci95_lo < s.mean && s.mean < s.ci95_hi);
    }

    #[test]
    fn too_few_samples_rejected() {
        assert!(matches!(
            summarize(&[1.0]),
            Err(Error::TooFewSamples { needed: 2, got: 1 })
        ));
        assert!(cross_graph_variance(&[0.4]).is_err());
    }

    #[test]
    fn cross_graph_variance_by_hand() {
        assert_eq!(cross_graph_variance(&[0.3, 0.3, 0.3]).unwrap(), 0.0);
        // mean 0.41, deviations +-0.01, (1e-4 + 1e-4) / 1
        let v = cross_graph_variance(&[0.4, 0.42]).unwrap();
        assert!((v - 2e-4).abs() < 1e-15);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut xs = vec![1e16, 1.0, -1e16];
        xs.extend(std::iter::repeat_n(1.0, 10));
        assert_eq!(compensated_sum(xs), 11.0);
    }

    #[test]
    fn ks_identical_and_disjoint() {
        let a = [1.0, 2.0, 3.0];
        assert_eq!(ks_two_sample(&a, &a).unwrap(), 0.0);
        assert_eq!(ks_two_sample(&a, &[10.0, 11.0]).unwrap(), 1.0);
        // ties across samples
        let d = ks_two_sample(&[1.0, 1.0, 2.0, 2.0], &[1.0, 2.0]).unwrap();
        assert_eq!(d, 0.0);
    }

    proptest! {
        #[test]
        fn summarize_is_permutation_invariant(
            xs in prop::collection::vec(-1e3f64..1e3, 2..60),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            let mut shuffled = xs.clone();
            shuffled.shuffle(&mut crate::seed::rng_from_seed(seed));
            let a = summarize(&xs).unwrap();
            let b = summarize(&shuffled).unwrap();
            prop_assert!((a.mean - b.mean).abs() <= 1e-12 * (1.0 + a.mean.abs()));
            prop_assert!((a.std_error - b.std_error).abs() <= 1e-9 * (1.0 + a.std_error));
        }
    }
}
