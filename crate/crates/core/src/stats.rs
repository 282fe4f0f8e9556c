//! Estimators shared by the Monte Carlo modules.

use serde::Serialize;

/// Mean, sample standard deviation and standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub stderr: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let count = values.len();
        if count == 0 {
            return Self {
                count,
                mean: f64::NAN,
                std_dev: f64::NAN,
                stderr: f64::NAN,
            };
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        let var = if count > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64
        } else {
            0.0
        };
        let std_dev = var.sqrt();
        Self {
            count,
            mean,
            std_dev,
            stderr: std_dev / (count as f64).sqrt(),
        }
    }
}

/// Linear-interpolated quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, 0.5)
}

/// Median-of-means estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MedianOfMeans {
    pub value: f64,
    pub stderr: f64,
    pub groups: usize,
    /// Largest relative deviation of a group mean from the median.
    pub spread: f64,
}

/// Group `k` collects the values with index `k mod groups`, so the estimate
/// depends only on the indexed values and not on evaluation order.
pub fn median_of_means(values: &[f64], groups: usize) -> MedianOfMeans {
    let groups = groups.clamp(1, values.len().max(1));
    let mut sums = vec![0.0; groups];
    let mut counts = vec![0usize; groups];
    for (i, v) in values.iter().enumerate() {
        sums[i % groups] += v;
        counts[i % groups] += 1;
    }
    let means: Vec<f64> = sums
        .iter()
        .zip(&counts)
        .filter(|(_, &n)| n > 0)
        .map(|(s, &n)| s / n as f64)
        .collect();
    if means.is_empty() {
        return MedianOfMeans {
            value: f64::NAN,
            stderr: f64::NAN,
            groups: 0,
            spread: f64::NAN,
        };
    }
    let value = median(&means);
    let g = means.len() as f64;
    // sd(median of g normal means) ≈ √(π/2)·sd(mean)/√g
    let stderr = if means.len() > 1 {
        (std::f64::consts::FRAC_PI_2).sqrt() * Summary::of(&means).std_dev / g.sqrt()
    } else {
        f64::NAN
    };
    let spread = if value != 0.0 {
        means.iter().map(|m| ((m - value) / value).abs()).fold(0.0, f64::max)
    } else {
        0.0
    };
    MedianOfMeans {
        value,
        stderr,
        groups: means.len(),
        spread,
    }
}

/// Standard error of a Bernoulli proportion.
pub fn binomial_stderr(p: f64, n: usize) -> f64 {
    if n == 0 {
        return f64::NAN;
    }
    (p * (1.0 - p) / n as f64).max(0.0).sqrt()
}

/// Weighted least-squares line `y = intercept + slope·x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Weighted fit; pass unit weights for ordinary least squares. Needs at
/// least two distinct abscissae.
pub fn fit_line(x: &[f64], y: &[f64], weights: &[f64]) -> Option<LineFit> {
    assert_eq!(x.len(), y.len());
    assert_eq!(x.len(), weights.len());
    let n = x.len();
    if n < 2 {
        return None;
    }
    let sw: f64 = weights.iter().sum();
    let mx = x.iter().zip(weights).map(|(a, w)| a * w).sum::<f64>() / sw;
    let my = y.iter().zip(weights).map(|(a, w)| a * w).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for i in 0..n {
        let dx = x[i] - mx;
        let dy = y[i] - my;
        sxx += weights[i] * dx * dx;
        sxy += weights[i] * dx * dy;
        syy += weights[i] * dy * dy;
    }
    if !(sxx > 0.0) {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = (0..n)
        .map(|i| weights[i] * (y[i] - intercept - slope * x[i]).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let slope_stderr = if n > 2 {
        (sse / (n - 2) as f64 / sxx).sqrt()
    } else {
        f64::NAN
    };
    Some(LineFit {
        slope,
        intercept,
        slope_stderr,
        r_squared,
        points: n,
    })
}

/// Kolmogorov–Smirnov distance between a sample and a continuous CDF.
pub fn ks_distance(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            f64::max(f - i as f64 / n, (i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Trapezoid rule on an arbitrary increasing grid.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}
