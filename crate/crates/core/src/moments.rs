//! Monte Carlo estimators for resolvent tails, fractional moments and
//! spatial decay, plus the Hölder gap and the stochastic domination check.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ensemble::{sample_block_band, BandMatrixSpec, BlockBandMatrix};
use crate::error::{Error, FitFailure, Result};
use crate::parallel::map_indexed;
use crate::resolvent::Resolvent;
use crate::rng::SeedSequence;
use crate::stats::{binomial_stderr, fit_line, median_of_means, LineFit, Summary};

/// Median-of-means group count.
pub const GROUPS: usize = 16;
/// Largest fractional exponent accepted.
pub const MAX_EXPONENT: f64 = 0.9;
/// Rejection rate at which an estimate is flagged unreliable.
pub const MAX_REJECTION_RATE: f64 = 0.05;
/// Largest relative deviation of a group mean before flagging.
pub const MAX_GROUP_SPREAD: f64 = 1.0;
/// Redraws per sample index before giving up.
pub const MAX_ATTEMPTS: u32 = 64;

/// Sample count and worker count of a Monte Carlo run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonteCarlo {
    pub samples: usize,
    pub workers: usize,
}

impl MonteCarlo {
    pub fn new(samples: usize) -> Self {
        Self { samples, workers: 1 }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    fn check(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidArgument("samples must be positive".into()));
        }
        Ok(())
    }
}

/// `λ_k = -r + 2rk/(points-1)`.
pub fn lambda_grid(r: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points)
            .map(|k| -r + 2.0 * r * k as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// Draw sample `index` and evaluate `f`, redrawing on a singular block.
/// Returns the value and the number of rejected draws.
pub fn with_retries<T>(
    spec: &BandMatrixSpec,
    seeds: &SeedSequence,
    index: u64,
    mut f: impl FnMut(&BlockBandMatrix) -> Result<T>,
) -> Result<(T, u64)> {
    for attempt in 0..MAX_ATTEMPTS {
        let m = sample_block_band(spec, &seeds.sample(index).retry(attempt))?;
        match f(&m) {
            Ok(v) => return Ok((v, u64::from(attempt))),
            Err(Error::SingularBlock { .. }) | Err(Error::SingularShift) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::TooManyRejections {
        rejected: u64::from(MAX_ATTEMPTS),
        attempted: u64::from(MAX_ATTEMPTS),
    })
}

fn check_exponent(s: f64) -> Result<()> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidArgument(format!("s = {s} must lie in (0,1)")));
    }
    if s > MAX_EXPONENT {
        return Err(Error::InvalidArgument(format!(
            "s = {s} exceeds the cap {MAX_EXPONENT}"
        )));
    }
    Ok(())
}

fn check_site(spec: &BandMatrixSpec, site: usize, name: &str) -> Result<()> {
    if !(1..=spec.dim()).contains(&site) {
        return Err(Error::InvalidArgument(format!(
            "{name} = {site} outside 1..={}",
            spec.dim()
        )));
    }
    Ok(())
}

/// Monte Carlo estimate of a nonnegative expectation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub value: f64,
    pub stderr: f64,
    pub groups: usize,
    pub samples: usize,
    pub rejected: u64,
    pub s: f64,
    pub reliable: bool,
}

impl MomentEstimate {
    pub fn from_values(values: &[f64], rejected: u64, s: f64) -> Self {
        let mom = median_of_means(values, GROUPS);
        let samples = values.len();
        let rate = rejected as f64 / samples.max(1) as f64;
        Self {
            value: mom.value,
            stderr: mom.stderr,
            groups: mom.groups,
            samples,
            rejected,
            s,
            reliable: rate < MAX_REJECTION_RATE && mom.spread <= MAX_GROUP_SPREAD,
        }
    }

    /// `|value - reference| ≤ k·stderr`.
    pub fn agrees_with(&self, reference: f64, k: f64) -> bool {
        (self.value - reference).abs() <= k * self.stderr
    }
}

/// `|G(x0, y)|^s` for every target, one row of the resolvent per draw.
fn moment_samples(
    spec: &BandMatrixSpec,
    lambda: f64,
    x0: usize,
    targets: &[usize],
    s: f64,
    mc: MonteCarlo,
) -> Result<(Vec<Vec<f64>>, u64)> {
    let seeds = spec.seeds();
    let last = targets.iter().copied().filter(|&y| y >= x0).max();
    let per_sample = map_indexed(mc.samples as u64, mc.workers, |i| {
        with_retries(spec, &seeds, i, |m| {
            let r = Resolvent::new(m, lambda)?;
            let row = match last {
                Some(hi) => r.row(x0, hi)?,
                None => Vec::new(),
            };
            targets
                .iter()
                .map(|&y| {
                    let g = if y >= x0 { row[y - x0] } else { r.entry(y, x0)?.value };
                    Ok(g.norm().powf(s))
                })
                .collect::<Result<Vec<f64>>>()
        })
    });
    let mut columns = vec![Vec::with_capacity(mc.samples); targets.len()];
    let mut rejected = 0;
    for item in per_sample {
        let (values, rej) = item?;
        rejected += rej;
        for (col, v) in columns.iter_mut().zip(values) {
            col.push(v);
        }
    }
    Ok((columns, rejected))
}

/// `E |⟨e_x, (M - λ)⁻¹ e_y⟩|^s` by median of means.
pub fn fractional_moment(
    spec: &BandMatrixSpec,
    lambda: f64,
    x: usize,
    y: usize,
    s: f64,
    mc: MonteCarlo,
) -> Result<MomentEstimate> {
    check_exponent(s)?;
    check_site(spec, x, "x")?;
    check_site(spec, y, "y")?;
    mc.check()?;
    let (columns, rejected) = moment_samples(spec, lambda, x, &[y], s, mc)?;
    Ok(MomentEstimate::from_values(&columns[0], rejected, s))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailPoint {
    pub t: f64,
    pub probability: f64,
    pub stderr: f64,
    /// `κ W^σ / t` when a reference was requested.
    pub reference: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailCurve {
    pub lambda: f64,
    pub x: usize,
    pub y: usize,
    pub samples: usize,
    pub rejected: u64,
    pub points: Vec<TailPoint>,
}

pub(crate) fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() || t_grid.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(Error::InvalidArgument("t grid must be positive and finite".into()));
    }
    if t_grid.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::InvalidArgument("t grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Empirical survival function of `|x|` on a grid, with binomial errors.
pub(crate) fn survival(abs_values: &[f64], t_grid: &[f64], reference: impl Fn(f64) -> Option<f64>) -> Vec<TailPoint> {
    let n = abs_values.len();
    t_grid
        .iter()
        .map(|&t| {
            let count = abs_values.iter().filter(|&&g| g > t).count();
            let p = count as f64 / n as f64;
            TailPoint {
                t,
                probability: p,
                stderr: binomial_stderr(p, n),
                reference: reference(t),
            }
        })
        .collect()
}

/// `P(|G(x,y)| > t)` on `t_grid`. `reference = Some((κ, σ))` adds the curve
/// `κ W^σ / t`.
pub fn tail_probability(
    spec: &BandMatrixSpec,
    lambda: f64,
    x: usize,
    y: usize,
    t_grid: &[f64],
    reference: Option<(f64, f64)>,
    mc: MonteCarlo,
) -> Result<TailCurve> {
    check_grid(t_grid)?;
    check_site(spec, x, "x")?;
    check_site(spec, y, "y")?;
    mc.check()?;
    let (columns, rejected) = moment_samples(spec, lambda, x, &[y], 1.0, mc)?;
    let w = spec.w as f64;
    let points = survival(&columns[0], t_grid, |t| {
        reference.map(|(kappa, sigma)| kappa * w.powf(sigma) / t)
    });
    Ok(TailCurve {
        lambda,
        x,
        y,
        samples: mc.samples,
        rejected,
        points,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayPoint {
    pub dist: usize,
    pub estimate: MomentEstimate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub r_squared: f64,
    pub points: usize,
    /// `-1/slope`.
    pub xi: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayProfile {
    pub lambda: f64,
    pub s: f64,
    pub x0: usize,
    pub fit_window: usize,
    pub points: Vec<DecayPoint>,
    pub fit: Result<DecayFit, FitFailure>,
}

impl DecayProfile {
    pub fn require_fit(&self) -> Result<&DecayFit> {
        self.fit.as_ref().map_err(|f| Error::FitDegenerate(f.clone()))
    }
}

/// Weighted fit of `ln E|G|^s` against distance over `d > fit_window`, with
/// weights `(value/stderr)²` (unit weights if any error bar vanishes).
pub fn fit_decay(points: &[DecayPoint], fit_window: usize) -> Result<DecayFit, FitFailure> {
    if points.iter().filter(|p| p.dist > 0).all(|p| p.estimate.value == 0.0) {
        return Err(FitFailure::NoPropagation);
    }
    let usable: Vec<&DecayPoint> = points
        .iter()
        .filter(|p| p.dist > fit_window && p.estimate.value > 0.0 && p.estimate.value.is_finite())
        .collect();
    if usable.len() < 3 {
        return Err(FitFailure::TooFewPoints(usable.len()));
    }
    let x: Vec<f64> = usable.iter().map(|p| p.dist as f64).collect();
    let y: Vec<f64> = usable.iter().map(|p| p.estimate.value.ln()).collect();
    let weights: Vec<f64> = if usable.iter().all(|p| p.estimate.stderr > 0.0) {
        usable
            .iter()
            .map(|p| (p.estimate.value / p.estimate.stderr).powi(2))
            .collect()
    } else {
        vec![1.0; usable.len()]
    };
    let LineFit {
        slope,
        intercept,
        slope_stderr,
        r_squared,
        points,
    } = fit_line(&x, &y, &weights).ok_or(FitFailure::TooFewPoints(usable.len()))?;
    if !(slope < 0.0) {
        return Err(FitFailure::NonNegativeSlope(slope));
    }
    Ok(DecayFit {
        slope,
        intercept,
        slope_stderr,
        r_squared,
        points,
        xi: -1.0 / slope,
    })
}

/// Fractional moments `E|G(x0, x0+d)|^s` for each `d` and their decay fit.
pub fn decay_profile(
    spec: &BandMatrixSpec,
    lambda: f64,
    s: f64,
    x0: usize,
    distances: &[usize],
    fit_window: usize,
    mc: MonteCarlo,
) -> Result<DecayProfile> {
    check_exponent(s)?;
    check_site(spec, x0, "x0")?;
    mc.check()?;
    if fit_window < 3 * spec.w {
        return Err(Error::InvalidArgument(format!(
            "fit_window = {fit_window} must be at least 3W = {}",
            3 * spec.w
        )));
    }
    if !distances.iter().any(|&d| d > fit_window) {
        return Err(Error::InvalidArgument("no distance exceeds the fit window".into()));
    }
    let targets: Vec<usize> = distances.iter().map(|d| x0 + d).collect();
    for &y in &targets {
        check_site(spec, y, "x0 + d")?;
    }
    let (columns, rejected) = moment_samples(spec, lambda, x0, &targets, s, mc)?;
    let points: Vec<DecayPoint> = distances
        .iter()
        .zip(&columns)
        .map(|(&dist, col)| DecayPoint {
            dist,
            estimate: MomentEstimate::from_values(col, rejected, s),
        })
        .collect();
    let fit = fit_decay(&points, fit_window);
    Ok(DecayProfile {
        lambda,
        s,
        x0,
        fit_window,
        points,
        fit,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub w: usize,
    pub dim: usize,
    /// Localization length; `0` when nothing propagates, `None` for other
    /// degenerate fits.
    pub xi: Option<f64>,
    pub r_squared: Option<f64>,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanTable {
    pub lambda: f64,
    pub s: f64,
    pub rows: Vec<ScanRow>,
    /// Slope of `ln ξ` against `ln W` over rows with `ξ > 0`; `None` with
    /// fewer than two such rows.
    pub exponent: Option<LineFit>,
}

/// `ξ(W)` for a family of ensembles sharing their laws, from the decay of
/// row `x0 = 1` over all distances beyond `3W`.
pub fn localization_length_scan(
    specs: &[BandMatrixSpec],
    lambda: f64,
    s: f64,
    mc: MonteCarlo,
) -> Result<ScanTable> {
    let Some(first) = specs.first() else {
        return Err(Error::InvalidArgument("empty ensemble family".into()));
    };
    if specs.iter().any(|sp| {
        sp.symmetry != first.symmetry
            || std::mem::discriminant(&sp.diag_law) != std::mem::discriminant(&first.diag_law)
            || std::mem::discriminant(&sp.offdiag_law) != std::mem::discriminant(&first.offdiag_law)
    }) {
        return Err(Error::InvalidArgument("scan family must share its block laws".into()));
    }
    let mut rows = Vec::with_capacity(specs.len());
    for spec in specs {
        let dim = spec.dim();
        let fit_window = 3 * spec.w;
        if dim <= fit_window + 3 {
            return Err(Error::InvalidArgument(format!(
                "N = {dim} too small for W = {}",
                spec.w
            )));
        }
        let distances: Vec<usize> = (0..dim).collect();
        let profile = decay_profile(spec, lambda, s, 1, &distances, fit_window, mc)?;
        let row = match &profile.fit {
            Ok(fit) => ScanRow {
                w: spec.w,
                dim,
                xi: Some(fit.xi),
                r_squared: Some(fit.r_squared),
                failure: None,
            },
            Err(f) => ScanRow {
                w: spec.w,
                dim,
                xi: (*f == FitFailure::NoPropagation).then_some(0.0),
                r_squared: None,
                failure: Some(f.to_string()),
            },
        };
        rows.push(row);
    }
    let positive: Vec<&ScanRow> = rows.iter().filter(|r| r.xi.is_some_and(|x| x > 0.0)).collect();
    let lx: Vec<f64> = positive.iter().map(|r| (r.w as f64).ln()).collect();
    let ly: Vec<f64> = positive.iter().map(|r| r.xi.unwrap().ln()).collect();
    let exponent = fit_line(&lx, &ly, &vec![1.0; lx.len()]);
    Ok(ScanTable {
        lambda,
        s,
        rows,
        exponent,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HolderGapReport {
    pub r: f64,
    pub s: f64,
    pub samples: usize,
    /// `(r/s) ln Ê e^{sX} - ln Ê e^{rX}`.
    pub h_direct: f64,
    /// Batch-means standard error of `h_direct`.
    pub h_direct_stderr: f64,
    /// `(1/s) ∫₀ˢ min(r,q)(s - max(r,q)) Var_q(X) dq` by the trapezoid rule.
    pub h_integral: f64,
    /// `(q, Var_q(X))` under the tilted empirical measure `∝ e^{qX}`.
    pub var_profile: Vec<(f64, f64)>,
}

/// `ln Ê e^{qX}` by log-sum-exp.
fn log_mgf(x: &[f64], q: f64) -> f64 {
    let m = x.iter().map(|v| q * v).fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = x.iter().map(|v| (q * v - m).exp()).sum();
    m + (sum / x.len() as f64).ln()
}

/// Variance of `X` under weights `∝ e^{qX}`.
fn tilted_variance(x: &[f64], q: f64) -> f64 {
    let m = x.iter().map(|v| q * v).fold(f64::NEG_INFINITY, f64::max);
    let mut w_sum = 0.0;
    let mut mean = 0.0;
    for v in x {
        let w = (q * v - m).exp();
        w_sum += w;
        mean += w * v;
    }
    mean /= w_sum;
    let var: f64 = x
        .iter()
        .map(|v| (q * v - m).exp() * (v - mean).powi(2))
        .sum::<f64>()
        / w_sum;
    var.max(0.0)
}

fn h_direct(x: &[f64], r: f64, s: f64) -> f64 {
    (r / s) * log_mgf(x, s) - log_mgf(x, r)
}

/// Hölder gap of an empirical sample, directly and as the weighted integral
/// of tilted variances. `q_points` uniform nodes on `[0, s]`, with `r`
/// added as a node so the kernel's kink is resolved.
pub fn holder_gap(samples: &[f64], r: f64, s: f64, q_points: usize) -> Result<HolderGapReport> {
    if !(r > 0.0 && r < s) {
        return Err(Error::InvalidArgument(format!("need 0 < r < s, got r = {r}, s = {s}")));
    }
    if samples.len() < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    if q_points < 2 {
        return Err(Error::InvalidArgument("need at least two quadrature nodes".into()));
    }
    if let Some(bad) = samples.iter().find(|v| !v.is_finite()) {
        return Err(Error::Overflow(format!("sample {bad} is not finite")));
    }
    let direct = h_direct(samples, r, s);
    if !direct.is_finite() {
        return Err(Error::Overflow("exponential moment is not finite".into()));
    }
    let mut q: Vec<f64> = (0..q_points)
        .map(|k| s * k as f64 / (q_points - 1) as f64)
        .collect();
    if !q.iter().any(|&v| v == r) {
        q.push(r);
        q.sort_by(f64::total_cmp);
    }
    let var_profile: Vec<(f64, f64)> = q.iter().map(|&qq| (qq, tilted_variance(samples, qq))).collect();
    let integrand: Vec<f64> = var_profile
        .iter()
        .map(|&(qq, v)| qq.min(r) * (s - qq.max(r)) * v)
        .collect();
    let h_integral = crate::stats::trapezoid(&q, &integrand) / s;

    let groups = GROUPS.min(samples.len() / 2).max(1);
    let batch: Vec<f64> = (0..groups)
        .map(|g| {
            let part: Vec<f64> = samples.iter().skip(g).step_by(groups).copied().collect();
            h_direct(&part, r, s)
        })
        .collect();
    let h_direct_stderr = if groups > 1 {
        Summary::of(&batch).std_dev / (groups as f64).sqrt()
    } else {
        f64::NAN
    };
    Ok(HolderGapReport {
        r,
        s,
        samples: samples.len(),
        h_direct: direct,
        h_direct_stderr,
        h_integral,
        var_profile,
    })
}

/// Nonnegative sequences `U_1..U_n` with `P(U_j ≥ δ | past) ≥ p` built in.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DependencyModel {
    /// `U_j ≡ δ`.
    Constant,
    /// `U_j = δ·B_j`, `B_j` i.i.d. Bernoulli(`p`).
    Iid { p: f64 },
    /// `U_j = δ·max(B_j, C_j)` with `B_j` i.i.d. Bernoulli(`p`) and `C` a
    /// symmetric two-state chain that keeps its state with probability
    /// `stickiness`, started uniformly. `B_j` is independent of everything
    /// else, so the conditional probability is at least `p`.
    MarkovCoupled { p: f64, stickiness: f64 },
}

impl DependencyModel {
    /// The conditional lower bound guaranteed by construction.
    pub fn guaranteed_p0(&self) -> f64 {
        match *self {
            DependencyModel::Constant => 1.0,
            DependencyModel::Iid { p } | DependencyModel::MarkovCoupled { p, .. } => p,
        }
    }

    fn validate(&self) -> Result<()> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        match *self {
            DependencyModel::Constant => Ok(()),
            DependencyModel::Iid { p } if unit(p) => Ok(()),
            DependencyModel::MarkovCoupled { p, stickiness } if unit(p) && unit(stickiness) => Ok(()),
            _ => Err(Error::InvalidArgument(format!("probabilities out of [0,1] in {self:?}"))),
        }
    }

    /// `E e^{-ΣU_j}` in closed form.
    pub fn exact(&self, n: usize, delta: f64) -> f64 {
        let miss = |p: f64| (1.0 - p) + p * (-delta).exp();
        match *self {
            DependencyModel::Constant => (-delta * n as f64).exp(),
            DependencyModel::Iid { p } => miss(p).powi(n as i32),
            DependencyModel::MarkovCoupled { p, stickiness } => {
                // forward vector over the state of C, weighted by e^{-U_j}
                let factor = [miss(p), (-delta).exp()];
                let mut v = [0.5 * factor[0], 0.5 * factor[1]];
                for _ in 1..n {
                    let stay = stickiness;
                    let flip = 1.0 - stickiness;
                    v = [
                        (v[0] * stay + v[1] * flip) * factor[0],
                        (v[0] * flip + v[1] * stay) * factor[1],
                    ];
                }
                v[0] + v[1]
            }
        }
    }

    fn sample_sum<R: Rng + ?Sized>(&self, n: usize, delta: f64, rng: &mut R) -> f64 {
        match *self {
            DependencyModel::Constant => delta * n as f64,
            DependencyModel::Iid { p } => {
                delta * (0..n).filter(|_| rng.gen::<f64>() < p).count() as f64
            }
            DependencyModel::MarkovCoupled { p, stickiness } => {
                let mut c = rng.gen::<bool>();
                let mut hits = 0;
                for j in 0..n {
                    if j > 0 && rng.gen::<f64>() >= stickiness {
                        c = !c;
                    }
                    let b = rng.gen::<f64>() < p;
                    hits += usize::from(b || c);
                }
                delta * hits as f64
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DominationReport {
    pub n: usize,
    pub delta: f64,
    pub p0: f64,
    pub samples: usize,
    /// Monte Carlo mean of `e^{-ΣU_j}`.
    pub empirical: f64,
    pub stderr: f64,
    /// `e^{-(1 - e^{-δ}) p0 n}`.
    pub bound: f64,
    /// Closed-form value of the model.
    pub exact: f64,
    /// `empirical ≤ bound·(1 + 3·stderr)`.
    pub dominated: bool,
}

/// Compare `E e^{-ΣU_j}` with the domination bound for a built-in model.
pub fn conditional_domination_check(
    n: usize,
    delta: f64,
    p0: f64,
    model: DependencyModel,
    mc: MonteCarlo,
    seed: u64,
) -> Result<DominationReport> {
    mc.check()?;
    model.validate()?;
    if n == 0 || !(delta > 0.0 && delta.is_finite()) || !(0.0..=1.0).contains(&p0) {
        return Err(Error::InvalidArgument("need n ≥ 1, δ > 0 finite, p0 ∈ [0,1]".into()));
    }
    if p0 > model.guaranteed_p0() {
        return Err(Error::InvalidArgument(format!(
            "model only guarantees P(U ≥ δ | past) ≥ {}, not {p0}",
            model.guaranteed_p0()
        )));
    }
    let seeds = SeedSequence::new(seed);
    let values = map_indexed(mc.samples as u64, mc.workers, |i| {
        let mut rng = seeds.sample(i).block(0);
        (-model.sample_sum(n, delta, &mut rng)).exp()
    });
    let summary = Summary::of(&values);
    let bound = (-(1.0 - (-delta).exp()) * p0 * n as f64).exp();
    Ok(DominationReport {
        n,
        delta,
        p0,
        samples: mc.samples,
        empirical: summary.mean,
        stderr: summary.stderr,
        bound,
        exact: model.exact(n, delta),
        dominated: summary.mean <= bound * (1.0 + 3.0 * summary.stderr),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{DiagonalBlockLaw, OffDiagonalBlockLaw, ScalarLaw, SymmetryClass};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn scalar(law: ScalarLaw, n: usize, seed: u64) -> BandMatrixSpec {
        BandMatrixSpec {
            w: 1,
            n,
            symmetry: SymmetryClass::Real,
            diag_law: DiagonalBlockLaw::ScalarDensity { law },
            offdiag_law: OffDiagonalBlockLaw::zero(1),
            seed,
        }
    }

    /// ∫ f over ℝ₊ after x = e^y, composite Simpson on [-60, 60].
    fn half_line(f: impl Fn(f64) -> f64) -> f64 {
        let (a, b, n) = (-60.0f64, 60.0f64, 120_000);
        let h = (b - a) / n as f64;
        let g = |y: f64| f(y.exp()) * y.exp();
        let mut s = g(a) + g(b);
        for k in 1..n {
            s += g(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn quadrature_oracles() {
        let pi = std::f64::consts::PI;
        let cauchy = 2.0 * half_line(|x| x.sqrt() / (pi * (1.0 + x * x)));
        assert!((cauchy - 2f64.sqrt()).abs() < 1e-9, "{cauchy}");
        let gauss = 2.0 * half_line(|x| x.powf(-0.5) * (-x * x / 2.0).exp() / (2.0 * pi).sqrt());
        let closed = 2f64.powf(-0.25) * libm::tgamma(0.25) / pi.sqrt();
        assert!((gauss - closed).abs() < 1e-9, "{gauss} vs {closed}");
    }

    #[test]
    fn decoupled_off_diagonal_moment_is_zero() {
        let spec = scalar(ScalarLaw::Gaussian, 3, 1);
        let est = fractional_moment(&spec, 0.0, 1, 3, 0.5, MonteCarlo::new(200)).unwrap();
        assert_eq!(est.value, 0.0);
        assert_eq!(est.stderr, 0.0);
        assert!(est.reliable);
    }

    #[test]
    fn cauchy_half_moment() {
        let spec = scalar(ScalarLaw::Cauchy, 1, 11);
        let est = fractional_moment(&spec, 0.0, 1, 1, 0.5, MonteCarlo::new(40_000)).unwrap();
        assert!(est.agrees_with(2f64.sqrt(), 3.0), "{est:?}");
    }

    #[test]
    fn gaussian_inverse_half_moment() {
        let pi = std::f64::consts::PI;
        let oracle = 2.0 * half_line(|x| x.powf(-0.5) * (-x * x / 2.0).exp() / (2.0 * pi).sqrt());
        let spec = scalar(ScalarLaw::Gaussian, 1, 12);
        let est = fractional_moment(&spec, 0.0, 1, 1, 0.5, MonteCarlo::new(40_000)).unwrap();
        assert!(est.agrees_with(oracle, 3.0), "{est:?} vs {oracle}");
    }

    #[test]
    fn exponent_and_site_checks() {
        let spec = scalar(ScalarLaw::Gaussian, 2, 1);
        for s in [0.0, 1.0, 1.5, 0.95] {
            assert!(fractional_moment(&spec, 0.0, 1, 1, s, MonteCarlo::new(10)).is_err());
        }
        assert!(fractional_moment(&spec, 0.0, 3, 1, 0.5, MonteCarlo::new(10)).is_err());
        assert!(fractional_moment(&spec, 0.0, 1, 1, 0.5, MonteCarlo::new(0)).is_err());
    }

    #[test]
    fn uniform_scalar_tail_is_one_over_t() {
        let spec = scalar(ScalarLaw::Uniform { a: -1.0, b: 1.0 }, 1, 13);
        let grid = [0.5, 1.0, 2.0, 4.0, 8.0, 16.0];
        let curve = tail_probability(&spec, 0.0, 1, 1, &grid, Some((2.0, 0.5)), MonteCarlo::new(20_000)).unwrap();
        for p in &curve.points {
            let exact = (1.0 / p.t).min(1.0);
            if p.t >= 1.0 {
                assert!((p.probability - exact).abs() <= 3.0 * p.stderr.max(1e-12), "{p:?}");
            } else {
                assert_eq!(p.probability, 1.0);
            }
            assert_eq!(p.reference, Some(2.0 / p.t));
        }
        assert!(curve.points.windows(2).all(|w| w[1].probability <= w[0].probability));
        assert!(tail_probability(&spec, 0.0, 1, 1, &[1.0, 1.0], None, MonteCarlo::new(5)).is_err());
    }

    #[test]
    fn deterministic_tail_below_minimum_is_one() {
        let spec = BandMatrixSpec {
            diag_law: DiagonalBlockLaw::ScalarDensity {
                law: ScalarLaw::Uniform { a: 2.0, b: 3.0 },
            },
            ..scalar(ScalarLaw::Gaussian, 1, 2)
        };
        let curve = tail_probability(&spec, 0.0, 1, 1, &[0.1, 0.2], None, MonteCarlo::new(100)).unwrap();
        assert!(curve.points.iter().all(|p| p.probability == 1.0));
    }

    #[test]
    fn layer_cake_matches_moment() {
        // s∫₀^∞ P(|G| > t) t^{s-1} dt = E|G|^s; here E = 1/(1-s) = 2
        let spec = scalar(ScalarLaw::Uniform { a: -1.0, b: 1.0 }, 1, 14);
        let s = 0.5;
        let mc = MonteCarlo::new(20_000);
        let top = 1e4f64;
        let grid: Vec<f64> = (0..=400).map(|k| top.powf(k as f64 / 400.0)).collect();
        let curve = tail_probability(&spec, 0.0, 1, 1, &grid, None, mc).unwrap();
        let t: Vec<f64> = curve.points.iter().map(|p| p.t).collect();
        let f: Vec<f64> = curve.points.iter().map(|p| s * p.probability * p.t.powf(s - 1.0)).collect();
        let cake = 1.0 + crate::stats::trapezoid(&t, &f) + s * top.powf(s - 1.0) / (1.0 - s);
        let est = fractional_moment(&spec, 0.0, 1, 1, s, mc).unwrap();
        assert!((cake - est.value).abs() <= 3.0 * est.stderr + 0.01, "{cake} vs {est:?}");
        assert!((cake - 2.0).abs() < 0.05);
    }

    #[test]
    fn moment_rows_match_single_entries() {
        let spec = BandMatrixSpec::gaussian_band(2, 6, SymmetryClass::Complex, 5);
        let mc = MonteCarlo::new(64);
        let profile = decay_profile(&spec, 0.3, 0.5, 3, &[0, 1, 7, 8, 9], 6, mc).unwrap();
        for p in &profile.points {
            let single = fractional_moment(&spec, 0.3, 3, 3 + p.dist, 0.5, mc).unwrap();
            assert!((single.value - p.estimate.value).abs() <= 1e-12 * single.value);
        }
        let back = fractional_moment(&spec, 0.3, 9, 3, 0.5, mc).unwrap();
        let fwd = fractional_moment(&spec, 0.3, 3, 9, 0.5, mc).unwrap();
        assert!((back.value - fwd.value).abs() <= 1e-10 * fwd.value);
    }

    #[test]
    fn worker_count_is_invisible() {
        let spec = BandMatrixSpec::gaussian_band(2, 8, SymmetryClass::Real, 6);
        let a = fractional_moment(&spec, 0.0, 1, 9, 0.5, MonteCarlo::new(101)).unwrap();
        let b = fractional_moment(&spec, 0.0, 1, 9, 0.5, MonteCarlo::new(101).with_workers(4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn decay_of_decoupled_chain_is_degenerate() {
        let spec = BandMatrixSpec::gaussian_band(1, 20, SymmetryClass::Real, 2);
        let d: Vec<usize> = (0..20).collect();
        let p = decay_profile(&spec, 0.0, 0.5, 1, &d, 3, MonteCarlo::new(50)).unwrap();
        assert_eq!(p.fit, Err(FitFailure::NoPropagation));
        assert!(matches!(p.require_fit(), Err(Error::FitDegenerate(_))));
        assert!(decay_profile(&spec, 0.0, 0.5, 1, &d, 2, MonteCarlo::new(5)).is_err());
    }

    #[test]
    fn decay_of_short_gaussian_band() {
        let spec = BandMatrixSpec::gaussian_band(2, 20, SymmetryClass::Complex, 3);
        let d: Vec<usize> = (0..40).collect();
        let p = decay_profile(&spec, 0.0, 0.5, 1, &d, 6, MonteCarlo::new(2000)).unwrap();
        let fit = p.require_fit().unwrap();
        assert!(fit.slope < 0.0 && fit.xi > 0.0 && fit.r_squared > 0.8, "{fit:?}");
    }

    #[test]
    fn fit_uses_only_far_points() {
        let est = |v: f64| MomentEstimate::from_values(&[v; 32], 0, 0.5);
        // huge outliers inside the window must not affect the fit
        let points: Vec<DecayPoint> = (0..20)
            .map(|d| DecayPoint {
                dist: d,
                estimate: est(if d <= 6 { 1e9 } else { (-0.5 * d as f64).exp() }),
            })
            .collect();
        let fit = fit_decay(&points, 6).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12 && (fit.xi - 2.0).abs() < 1e-10);
        assert_eq!(fit.points, 13);
        assert_eq!(fit_decay(&points[..9], 6), Err(FitFailure::TooFewPoints(2)));
        let rising: Vec<DecayPoint> = (0..10).map(|d| DecayPoint { dist: d, estimate: est(1.0 + d as f64) }).collect();
        assert!(matches!(fit_decay(&rising, 3), Err(FitFailure::NonNegativeSlope(_))));
    }

    #[test]
    fn scan_reports_zero_length_without_propagation() {
        let specs: Vec<BandMatrixSpec> = [1, 2]
            .iter()
            .map(|&w| BandMatrixSpec::gaussian_band(w, 20, SymmetryClass::Complex, 4))
            .collect();
        let table = localization_length_scan(&specs, 0.0, 0.5, MonteCarlo::new(400)).unwrap();
        assert_eq!(table.rows[0].xi, Some(0.0));
        assert!(table.rows[1].xi.unwrap() > 0.0);
        // a single positive row leaves the exponent undefined
        assert!(table.exponent.is_none());
        let zero = BandMatrixSpec {
            offdiag_law: OffDiagonalBlockLaw::zero(2),
            ..specs[1].clone()
        };
        let t = localization_length_scan(&[zero], 0.0, 0.5, MonteCarlo::new(10)).unwrap();
        assert!(t.rows[0].failure.is_some());
    }

    #[test]
    fn moment_does_not_grow_with_dimension() {
        // sup over a λ grid at N = 64, 128, 256: bars overlap or decrease
        let grid = lambda_grid(0.5, 3);
        let sup = |n: usize| {
            let spec = BandMatrixSpec::gaussian_band(4, n / 4, SymmetryClass::Complex, 9);
            grid.iter()
                .map(|&l| fractional_moment(&spec, l, n / 2, n / 2 + 8, 0.5, MonteCarlo::new(400)).unwrap())
                .max_by(|a, b| a.value.total_cmp(&b.value))
                .unwrap()
        };
        let ests: Vec<MomentEstimate> = [64, 128, 256].iter().map(|&n| sup(n)).collect();
        for pair in ests.windows(2) {
            assert!(pair[1].value <= pair[0].value + 3.0 * (pair[0].stderr + pair[1].stderr), "{ests:?}");
        }
    }

    #[test]
    fn lambda_grid_endpoints() {
        let g = lambda_grid(1.0, 21);
        assert_eq!(g.len(), 21);
        assert_eq!(g[0], -1.0);
        assert_eq!(g[20], 1.0);
        assert!(g[10].abs() < 1e-15);
    }

    fn normal_samples(n: usize, mean: f64, seed: u64) -> Vec<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| mean + <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
            .collect()
    }

    #[test]
    fn constant_sample_has_no_gap() {
        let g = holder_gap(&[3.0; 100], 0.25, 0.5, 64).unwrap();
        assert!(g.h_direct.abs() < 1e-15);
        assert!(g.var_profile.iter().all(|&(_, v)| v == 0.0));
        assert_eq!(g.var_profile.len(), 65);
    }

    #[test]
    fn gaussian_gap_is_mean_invariant() {
        let a = holder_gap(&normal_samples(200_000, 0.0, 1), 0.25, 0.5, 64).unwrap();
        let b = holder_gap(&normal_samples(200_000, 5.0, 2), 0.25, 0.5, 64).unwrap();
        for g in [&a, &b] {
            assert!((g.h_direct - 1.0 / 32.0).abs() <= 3.0 * g.h_direct_stderr, "{}", g.h_direct);
            assert!((g.h_direct - g.h_integral).abs() < 1e-3);
        }
        let both = (a.h_direct_stderr.powi(2) + b.h_direct_stderr.powi(2)).sqrt();
        assert!((a.h_direct - b.h_direct).abs() <= 3.0 * both);
    }

    #[test]
    fn two_point_gap_matches_enumeration() {
        let x: Vec<f64> = (0..10_000).map(|i| (i % 2) as f64).collect();
        let (r, s) = (0.25f64, 0.5f64);
        let exact = (r / s) * ((1.0 + s.exp()) / 2.0).ln() - ((1.0 + r.exp()) / 2.0).ln();
        let g = holder_gap(&x, r, s, 64).unwrap();
        assert!((g.h_direct - exact).abs() < 1e-12);
        assert!((g.h_integral - exact).abs() < 1e-3);
    }

    #[test]
    fn holder_gap_argument_checks() {
        assert!(holder_gap(&[1.0, 2.0], 0.5, 0.25, 64).is_err());
        assert!(matches!(holder_gap(&[1.0, f64::INFINITY], 0.25, 0.5, 64), Err(Error::Overflow(_))));
        // log-sum-exp keeps large samples finite
        let g = holder_gap(&[1e4, 1e4 + 1.0], 0.25, 0.5, 64).unwrap();
        assert!(g.h_direct.is_finite() && g.h_direct >= -1e-9);
    }

    proptest! {
        #[test]
        fn holder_gap_is_nonnegative_and_matches_integral(
            x in proptest::collection::vec(-3.0f64..3.0, 2..60),
            r in 0.05f64..0.45,
        ) {
            let g = holder_gap(&x, r, 0.5, 64).unwrap();
            prop_assert!(g.h_direct >= -1e-12);
            prop_assert!((g.h_direct - g.h_integral).abs() < 1e-3);
            prop_assert!(g.var_profile.iter().all(|&(_, v)| v >= 0.0));
        }

        #[test]
        fn markov_exact_is_bounded(n in 1usize..40, p in 0.0f64..1.0, rho in 0.0f64..1.0, delta in 0.01f64..5.0) {
            let m = DependencyModel::MarkovCoupled { p, stickiness: rho };
            let e = m.exact(n, delta);
            let bound = (-(1.0 - (-delta).exp()) * p * n as f64).exp();
            prop_assert!(e <= bound * (1.0 + 1e-12));
            prop_assert!(e > 0.0);
        }
    }

    #[test]
    fn constant_model_is_deterministic() {
        let r = conditional_domination_check(5, 0.7, 1.0, DependencyModel::Constant, MonteCarlo::new(10), 1).unwrap();
        assert_eq!(r.empirical, (-3.5f64).exp());
        assert_eq!(r.stderr, 0.0);
        assert!(r.dominated);
    }

    #[test]
    fn iid_model_matches_closed_form() {
        let model = DependencyModel::Iid { p: 0.5 };
        let r = conditional_domination_check(10, 1.0, 0.5, model, MonteCarlo::new(50_000), 3).unwrap();
        let exact = (0.5 + 0.5 * (-1.0f64).exp()).powi(10);
        assert!((r.exact - exact).abs() < 1e-15);
        assert!((r.empirical - exact).abs() <= 3.0 * r.stderr);
        assert!(r.bound > exact && r.dominated);
    }

    #[test]
    fn markov_model_matches_transfer_matrix() {
        let model = DependencyModel::MarkovCoupled { p: 0.3, stickiness: 0.9 };
        let r = conditional_domination_check(30, 0.5, 0.3, model, MonteCarlo::new(50_000), 4).unwrap();
        assert!((r.empirical - r.exact).abs() <= 3.0 * r.stderr, "{r:?}");
        assert!(r.dominated);
        // stickiness 1/2 makes C i.i.d. Bernoulli(1/2)
        let mix = DependencyModel::MarkovCoupled { p: 0.3, stickiness: 0.5 };
        let q = 1.0 - 0.7 * 0.5;
        let iid = DependencyModel::Iid { p: q }.exact(7, 0.5);
        assert!((mix.exact(7, 0.5) - iid).abs() < 1e-14);
    }

    #[test]
    fn overclaimed_p0_is_rejected() {
        let model = DependencyModel::MarkovCoupled { p: 0.2, stickiness: 0.9 };
        assert!(conditional_domination_check(10, 1.0, 0.5, model, MonteCarlo::new(10), 1).is_err());
    }
}
