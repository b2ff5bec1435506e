//! Small statistics toolkit shared by the estimators and the validation tests.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, StudentsT};

/// Sum with a fixed pairwise reduction tree, so the result depends only on
/// the order of `xs` and not on how the values were produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 16;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Mean and standard error of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
}

impl MeanEstimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                stderr: f64::NAN,
                count: 0,
            };
        }
        let mean = pairwise_sum(xs) / n as f64;
        let stderr = if n > 1 {
            let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
            (pairwise_sum(&dev) / (n as f64 - 1.0) / n as f64).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            stderr,
            count: n,
        }
    }

    /// Symmetric confidence interval `mean ± z·stderr`.
    pub fn interval(&self, z: f64) -> (f64, f64) {
        (self.mean - z * self.stderr, self.mean + z * self.stderr)
    }
}

/// Whether `value` lies within `k` standard errors of `expected`.
pub fn within_sigma(value: f64, expected: f64, stderr: f64, k: f64) -> bool {
    (value - expected).abs() <= k * stderr
}

/// Pearson chi-square goodness of fit. Bins with expected count below
/// `min_expected` are pooled into a single tail bin.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

pub fn chi_square_gof(observed: &[u64], expected: &[f64], min_expected: f64) -> ChiSquareResult {
    assert_eq!(observed.len(), expected.len());
    let mut stat = 0.0;
    let mut bins = 0usize;
    let (mut pool_o, mut pool_e) = (0.0, 0.0);
    for (&o, &e) in observed.iter().zip(expected) {
        if e < min_expected {
            pool_o += o as f64;
            pool_e += e;
        } else {
            stat += (o as f64 - e).powi(2) / e;
            bins += 1;
        }
    }
    if pool_e > 0.0 {
        if pool_e >= min_expected || bins == 0 {
            stat += (pool_o - pool_e).powi(2) / pool_e;
            bins += 1;
        } else if pool_o > 0.0 {
            // A tiny tail bin that still received counts is a hard mismatch.
            stat += (pool_o - pool_e).powi(2) / pool_e.max(f64::MIN_POSITIVE);
            bins += 1;
        }
    }
    let dof = bins.saturating_sub(1).max(1);
    let p_value = 1.0 - ChiSquared::new(dof as f64).expect("dof > 0").cdf(stat);
    ChiSquareResult {
        statistic: stat,
        dof,
        p_value,
    }
}

/// Asymptotic Kolmogorov distribution survival function P(K > x).
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov–Smirnov test against a continuous CDF.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

pub fn ks_one_sample(samples: &[f64], cdf: impl Fn(f64) -> f64) -> KsResult {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    let en = n.sqrt();
    KsResult {
        statistic: d,
        p_value: kolmogorov_sf((en + 0.12 + 0.11 / en) * d),
    }
}

/// Empirical CDF of sorted data at `x` (fraction of samples ≤ x).
fn ecdf(sorted: &[f64], x: f64) -> f64 {
    sorted.partition_point(|&s| s <= x) as f64 / sorted.len() as f64
}

/// One-sided two-sample KS statistic sup_x (F_b(x) − F_a(x)).
///
/// If `a` is stochastically dominated by `b` (a ⪯ b) then F_a ≥ F_b
/// everywhere and the statistic stays near zero.
pub fn ks_one_sided(a: &[f64], b: &[f64]) -> KsResult {
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(f64::total_cmp);
    sb.sort_by(f64::total_cmp);
    let mut d = 0.0f64;
    for &x in sa.iter().chain(sb.iter()) {
        d = d.max(ecdf(&sb, x) - ecdf(&sa, x));
    }
    let (m, n) = (sa.len() as f64, sb.len() as f64);
    let ne = m * n / (m + n);
    KsResult {
        statistic: d,
        // Smirnov's one-sided asymptotic tail.
        p_value: (-2.0 * ne * d * d).exp().min(1.0),
    }
}

/// Ordinary least squares `y = a + b·x` with the standard error of `b`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: f64,
    pub slope_stderr: f64,
    pub dof: usize,
}

impl LinearFit {
    /// Two-sided confidence interval for the slope at `level`.
    pub fn slope_interval(&self, level: f64) -> (f64, f64) {
        let t = StudentsT::new(0.0, 1.0, self.dof.max(1) as f64)
            .expect("valid t")
            .inverse_cdf(0.5 + level / 2.0);
        (
            self.slope - t * self.slope_stderr,
            self.slope + t * self.slope_stderr,
        )
    }
}

/// Weighted least squares; pass unit weights for the ordinary fit.
pub fn linear_fit(xs: &[f64], ys: &[f64], weights: &[f64]) -> LinearFit {
    assert!(xs.len() == ys.len() && xs.len() == weights.len() && xs.len() >= 3);
    let sw: f64 = weights.iter().sum();
    let mx = xs.iter().zip(weights).map(|(x, w)| x * w).sum::<f64>() / sw;
    let my = ys.iter().zip(weights).map(|(y, w)| y * w).sum::<f64>() / sw;
    let sxx: f64 = xs.iter().zip(weights).map(|(x, w)| w * (x - mx).powi(2)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(ys)
        .zip(weights)
        .map(|((x, y), w)| w * (x - mx) * (y - my))
        .sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let dof = xs.len() - 2;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .zip(weights)
        .map(|((x, y), w)| w * (y - intercept - slope * x).powi(2))
        .sum();
    let slope_stderr = (rss / dof as f64 / sxx).sqrt();
    LinearFit {
        intercept,
        slope,
        slope_stderr,
        dof,
    }
}
