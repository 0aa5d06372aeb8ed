//! Empirical hyperdegree statistics: exact integer histogram, pdf, CCDF,
//! geometric log-binning for heavy-tailed plotting, tail fits and the
//! Kolmogorov–Smirnov distance against a theory curve.

use serde::Serialize;

use super::AnalyticsError;

/// Exact integer histogram of a hyperdegree sample with derived
/// distributions.
#[derive(Debug, Clone)]
pub struct EmpiricalDistribution {
    /// `(k, count)` sorted by `k`.
    counts: Vec<(u64, u64)>,
    /// `(k, observations with K >= k)`, same order.
    suffix: Vec<(u64, u64)>,
    n: u64,
}

impl EmpiricalDistribution {
    pub fn from_hyperdegrees(seq: &[u64]) -> Result<Self, AnalyticsError> {
        if seq.is_empty() {
            return Err(AnalyticsError::InvalidArgument(
                "empty hyperdegree sequence".into(),
            ));
        }
        let mut sorted = seq.to_vec();
        sorted.sort_unstable();
        let mut counts: Vec<(u64, u64)> = Vec::new();
        for &k in &sorted {
            match counts.last_mut() {
                Some((kk, c)) if *kk == k => *c += 1,
                _ => counts.push((k, 1)),
            }
        }
        let mut suffix = counts.clone();
        let mut acc = 0u64;
        for entry in suffix.iter_mut().rev() {
            acc += entry.1;
            entry.1 = acc;
        }
        Ok(EmpiricalDistribution {
            counts,
            suffix,
            n: seq.len() as u64,
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn min_k(&self) -> u64 {
        self.counts.first().expect("nonempty").0
    }

    pub fn max_k(&self) -> u64 {
        self.counts.last().expect("nonempty").0
    }

    /// `(k, count)` pairs in ascending `k`.
    pub fn counts(&self) -> &[(u64, u64)] {
        &self.counts
    }

    /// Normalized point masses.
    pub fn pdf(&self) -> Vec<(u64, f64)> {
        self.counts
            .iter()
            .map(|&(k, c)| (k, c as f64 / self.n as f64))
            .collect()
    }

    /// `P(K >= k)` at each observed `k`; equals 1 at the smallest.
    pub fn ccdf(&self) -> Vec<(u64, f64)> {
        self.suffix
            .iter()
            .map(|&(k, c)| (k, c as f64 / self.n as f64))
            .collect()
    }

    /// Number of observations at or above `k`.
    pub fn ccdf_count(&self, k: u64) -> u64 {
        match self.suffix.binary_search_by_key(&k, |&(kk, _)| kk) {
            Ok(i) => self.suffix[i].1,
            Err(i) if i < self.suffix.len() => self.suffix[i].1,
            Err(_) => 0,
        }
    }

    /// Geometric log-binning: bin edges grow by `ratio` from the smallest
    /// observed `k`; each bin's density is `count / (width * n)` so the
    /// densities integrate to exactly 1. Empty bins are dropped.
    pub fn log_binned_pdf(&self, ratio: f64) -> Vec<LogBin> {
        assert!(ratio > 1.0, "bin ratio must exceed 1");
        let mut bins = Vec::new();
        let mut lo = self.min_k() as f64;
        let max_k = self.max_k() as f64;
        let mut idx = 0usize;
        while lo <= max_k {
            let hi = lo * ratio;
            let mut count = 0u64;
            while idx < self.counts.len() && (self.counts[idx].0 as f64) < hi {
                count += self.counts[idx].1;
                idx += 1;
            }
            if count > 0 {
                bins.push(LogBin {
                    lo,
                    hi,
                    center: (lo * hi).sqrt(),
                    count,
                    density: count as f64 / ((hi - lo) * self.n as f64),
                });
            }
            lo = hi;
        }
        bins
    }
}

/// One geometric bin of a log-binned density.
#[derive(Debug, Clone, Serialize)]
pub struct LogBin {
    pub lo: f64,
    pub hi: f64,
    pub center: f64,
    pub count: u64,
    pub density: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailModel {
    PowerLaw,
    Exponential,
}

/// Competing tail fits of the empirical CCDF over a window.
#[derive(Debug, Clone, Serialize)]
pub struct TailFit {
    pub k_lo: u64,
    pub k_hi: u64,
    pub points: usize,
    /// Slope of log CCDF vs log k; `-slope` estimates the CCDF exponent,
    /// so the pdf exponent estimate is `-slope + 1`.
    pub power_slope: f64,
    pub power_r2: f64,
    /// Decay rate of log CCDF vs k.
    pub exp_rate: f64,
    pub exp_r2: f64,
    pub preferred: TailModel,
}

impl TailFit {
    /// Estimated pdf tail exponent (the CCDF exponent plus one).
    pub fn pdf_exponent(&self) -> f64 {
        -self.power_slope + 1.0
    }
}

/// Least-squares tail fit of the CCDF from `k_lo` up to the largest `k`
/// still backed by at least 10 observations. Both a power-law and an
/// exponential model are fitted; the better R^2 wins.
pub fn fit_tail(dist: &EmpiricalDistribution, k_lo: u64) -> Result<TailFit, AnalyticsError> {
    let n = dist.n() as f64;
    let mut ks: Vec<f64> = Vec::new();
    let mut log_ccdf: Vec<f64> = Vec::new();
    let mut k_hi = k_lo;
    for &(k, _) in dist.counts() {
        if k < k_lo.max(1) {
            continue;
        }
        let tail = dist.ccdf_count(k);
        if tail < 10 {
            break;
        }
        k_hi = k;
        ks.push(k as f64);
        log_ccdf.push((tail as f64 / n).ln());
    }
    if ks.len() < 10 {
        return Err(AnalyticsError::InsufficientData(format!(
            "tail window [{k_lo}, ..] holds {} usable points, need 10",
            ks.len()
        )));
    }
    let log_ks: Vec<f64> = ks.iter().map(|k| k.ln()).collect();
    let (power_slope, _, power_r2) = linear_fit(&log_ks, &log_ccdf);
    let (exp_slope, _, exp_r2) = linear_fit(&ks, &log_ccdf);
    let preferred = if power_r2 >= exp_r2 {
        TailModel::PowerLaw
    } else {
        TailModel::Exponential
    };
    Ok(TailFit {
        k_lo,
        k_hi,
        points: ks.len(),
        power_slope,
        power_r2,
        exp_rate: -exp_slope,
        exp_r2,
        preferred,
    })
}

/// Ordinary least squares `(slope, intercept, r2)`.
fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mean_x: f64 = xs.iter().sum::<f64>() / n;
    let mean_y: f64 = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
        syy += (y - mean_y) * (y - mean_y);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let r2 = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    (slope, intercept, r2)
}

/// Largest absolute gap between the empirical CCDF and a theory CCDF over
/// the observed hyperdegrees.
pub fn ks_distance<F: Fn(f64) -> f64>(dist: &EmpiricalDistribution, theory_ccdf: F) -> f64 {
    dist.ccdf()
        .iter()
        .map(|&(k, emp)| (emp - theory_ccdf(k as f64)).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_sample_pdf_and_ccdf() {
        let d = EmpiricalDistribution::from_hyperdegrees(&[2, 2, 3]).unwrap();
        assert_eq!(d.n(), 3);
        let pdf = d.pdf();
        assert_eq!(pdf.len(), 2);
        assert!((pdf[0].1 - 2.0 / 3.0).abs() < 1e-15);
        assert!((pdf[1].1 - 1.0 / 3.0).abs() < 1e-15);
        let ccdf = d.ccdf();
        assert_eq!(ccdf[0], (2, 1.0));
        assert!((ccdf[1].1 - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(d.ccdf_count(1), 3);
        assert_eq!(d.ccdf_count(3), 1);
        assert_eq!(d.ccdf_count(4), 0);
    }

    #[test]
    fn all_equal_sequence_is_single_point() {
        let d = EmpiricalDistribution::from_hyperdegrees(&[5; 40]).unwrap();
        assert_eq!(d.pdf(), vec![(5, 1.0)]);
        let bins = d.log_binned_pdf(1.25);
        assert_eq!(bins.len(), 1);
        assert_eq!(bins[0].count, 40);
    }

    #[test]
    fn empty_sequence_is_rejected() {
        assert!(EmpiricalDistribution::from_hyperdegrees(&[]).is_err());
    }

    #[test]
    fn ccdf_is_nonincreasing_and_starts_at_one() {
        let d = EmpiricalDistribution::from_hyperdegrees(&[1, 1, 2, 3, 5, 8, 13, 13]).unwrap();
        let ccdf = d.ccdf();
        assert_eq!(ccdf[0].1, 1.0);
        assert!(ccdf.windows(2).all(|w| w[1].1 <= w[0].1));
    }

    #[test]
    fn synthetic_power_law_fit_recovers_slope() {
        // construct counts whose CCDF is (k/10)^-2 on k = 10..=300 almost
        // exactly: count(k) proportional to k^-2 - (k+1)^-2, plus a
        // catch-all at 301 holding the remaining tail mass so the suffix
        // sums stay on the pure power law instead of a truncated one
        let mut seq = Vec::new();
        for k in 10u64..=300 {
            let mass = (10.0 / k as f64).powi(2) - (10.0 / (k as f64 + 1.0)).powi(2);
            let copies = (1e6 * mass).round() as u64;
            for _ in 0..copies {
                seq.push(k);
            }
        }
        let tail = (1e6 * (10.0 / 301.0f64).powi(2)).round() as u64;
        seq.extend(std::iter::repeat_n(301, tail as usize));
        let d = EmpiricalDistribution::from_hyperdegrees(&seq).unwrap();
        let fit = fit_tail(&d, 10).unwrap();
        assert!(
            (fit.power_slope + 2.0).abs() < 0.01,
            "slope {}",
            fit.power_slope
        );
        assert_eq!(fit.preferred, TailModel::PowerLaw);
        assert!((fit.pdf_exponent() - 3.0).abs() < 0.011);
    }

    #[test]
    fn synthetic_exponential_prefers_exponential() {
        // CCDF exp(-k/10) on k = 1..: counts from successive differences
        let mut seq = Vec::new();
        for k in 1u64..=120 {
            let mass = (-(k as f64) / 10.0).exp() - (-((k + 1) as f64) / 10.0).exp();
            let copies = (3e5 * mass).round() as u64;
            for _ in 0..copies {
                seq.push(k);
            }
        }
        let d = EmpiricalDistribution::from_hyperdegrees(&seq).unwrap();
        let fit = fit_tail(&d, 5).unwrap();
        assert_eq!(fit.preferred, TailModel::Exponential);
        assert!((fit.exp_rate - 0.1).abs() < 0.005, "rate {}", fit.exp_rate);
    }

    #[test]
    fn fit_needs_enough_tail_points() {
        let d = EmpiricalDistribution::from_hyperdegrees(&[2; 100]).unwrap();
        assert!(matches!(
            fit_tail(&d, 2),
            Err(AnalyticsError::InsufficientData(_))
        ));
    }

    #[test]
    fn ks_distance_examples() {
        let d = EmpiricalDistribution::from_hyperdegrees(&[2, 2, 3, 4]).unwrap();
        let ccdf = d.ccdf();
        let lookup = move |k: f64| {
            ccdf.iter()
                .rev()
                .find(|&&(kk, _)| kk as f64 <= k)
                .map_or(1.0, |&(_, v)| v)
        };
        // identical curves
        assert_eq!(ks_distance(&d, lookup.clone()), 0.0);
        // constant offset of 0.03
        let shifted = move |k: f64| lookup(k) - 0.03;
        assert!((ks_distance(&d, shifted) - 0.03).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn prop_log_bins_integrate_to_one(
            seq in proptest::collection::vec(1u64..500, 1..300),
            ratio in 1.05f64..3.0,
        ) {
            let d = EmpiricalDistribution::from_hyperdegrees(&seq).unwrap();
            let bins = d.log_binned_pdf(ratio);
            let total: f64 = bins.iter().map(|b| b.density * (b.hi - b.lo)).sum();
            prop_assert!((total - 1.0).abs() < 1e-6, "total {}", total);
            let counted: u64 = bins.iter().map(|b| b.count).sum();
            prop_assert_eq!(counted, seq.len() as u64);
        }
    }
}
