//! Spectral statistics of sampled ensembles: density of states, spacings,
//! pair rates, eigenvector correlations and block Wegner tails.

use faer::{c64, Mat, MatRef};
use serde::{Deserialize, Serialize};

use crate::ensemble::{
    sample_block_band, BandMatrixSpec, BlockBandMatrix, BlockLaw, DiagonalBlockLaw, SymmetryClass,
};
use crate::error::{Error, FitFailure, Result};
use crate::linalg::{self, CMat};
use crate::moments::{check_grid, fit_decay, survival, DecayFit, DecayPoint, MomentEstimate, MonteCarlo, TailPoint};
use crate::parallel::map_indexed;
use crate::rng::SeedSequence;
use crate::stats::{fit_line, LineFit, Summary};

/// Largest dimension accepted by the dense eigensolver.
pub const DEFAULT_EIGEN_CAP: usize = 4096;
/// Pooled spacing count below which spacing statistics are refused.
pub const MIN_SPACINGS: usize = 1000;
/// Gaps below this count as degenerate.
pub const GAP_THRESHOLD: f64 = 1e-10;

/// Eigenvalues (ascending) of one draw, optionally with eigenvectors.
#[derive(Clone, Debug)]
pub struct SpectrumSample {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in eigenvalue order.
    pub eigenvectors: Option<CMat>,
    pub spec: BandMatrixSpec,
    pub seed_index: Option<u64>,
}

impl SpectrumSample {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `max_k ‖Mv_k - λ_k v_k‖ / ‖M‖` and `max |V†V - I|`.
    pub fn defects(&self, m: &BlockBandMatrix) -> Option<(f64, f64)> {
        let v = self.eigenvectors.as_ref()?;
        let dense = m.to_dense();
        let norm = linalg::operator_norm(dense.as_ref()).ok()?.max(f64::MIN_POSITIVE);
        let mv = &dense * v;
        let mut residual = 0.0f64;
        for k in 0..v.ncols() {
            let r: f64 = (0..v.nrows())
                .map(|i| (mv[(i, k)] - v[(i, k)] * self.eigenvalues[k]).norm_sqr())
                .sum();
            residual = residual.max(r.sqrt() / norm);
        }
        let gram = v.adjoint() * v - Mat::<c64>::identity(v.ncols(), v.ncols());
        Some((residual, gram.norm_max()))
    }
}

/// Full spectrum of `m`; eigenvectors on request.
pub fn eigen_decompose(m: &BlockBandMatrix, want_vectors: bool) -> Result<SpectrumSample> {
    eigen_decompose_capped(m, want_vectors, DEFAULT_EIGEN_CAP)
}

pub fn eigen_decompose_capped(m: &BlockBandMatrix, want_vectors: bool, cap: usize) -> Result<SpectrumSample> {
    if m.dim() > cap {
        return Err(Error::InvalidArgument(format!(
            "eigensolver limited to N ≤ {cap}, got {}",
            m.dim()
        )));
    }
    if !want_vectors && m.block_width() == 1 && (1..m.blocks()).all(|j| m.t(j)[(0, 0)] == c64::new(0.0, 0.0)) {
        // diagonal matrix
        let mut eigenvalues: Vec<f64> = (1..=m.blocks()).map(|j| m.v(j)[(0, 0)].re).collect();
        eigenvalues.sort_by(f64::total_cmp);
        return Ok(SpectrumSample {
            eigenvalues,
            eigenvectors: None,
            spec: m.spec().clone(),
            seed_index: None,
        });
    }
    let dense = m.to_dense();
    let (eigenvalues, eigenvectors) = if want_vectors {
        let (vals, vecs) = linalg::hermitian_eigen(dense.as_ref())?;
        (vals, Some(vecs))
    } else {
        (linalg::hermitian_eigenvalues(dense.as_ref())?, None)
    };
    Ok(SpectrumSample {
        eigenvalues,
        eigenvectors,
        spec: m.spec().clone(),
        seed_index: None,
    })
}

/// Evaluate `f` on the spectrum of every draw, in sample order.
pub fn map_spectra<T: Send>(
    spec: &BandMatrixSpec,
    want_vectors: bool,
    mc: MonteCarlo,
    f: impl Fn(SpectrumSample) -> T + Sync,
) -> Result<Vec<T>> {
    spec.validate()?;
    if mc.samples == 0 {
        return Err(Error::InvalidArgument("samples must be positive".into()));
    }
    let seeds = spec.seeds();
    map_indexed(mc.samples as u64, mc.workers, |i| {
        let m = sample_block_band(spec, &seeds.sample(i))?;
        let mut sample = eigen_decompose(&m, want_vectors)?;
        sample.seed_index = Some(i);
        Ok(f(sample))
    })
    .into_iter()
    .collect()
}

/// Spectra of `mc.samples` independent draws.
pub fn sample_spectra(spec: &BandMatrixSpec, want_vectors: bool, mc: MonteCarlo) -> Result<Vec<SpectrumSample>> {
    map_spectra(spec, want_vectors, mc, |s| s)
}

/// `√(4σ² - λ²) / (2πσ²)` on `[-2σ, 2σ]`.
pub fn semicircle_density(lambda: f64, sigma: f64) -> f64 {
    let r = 4.0 * sigma * sigma - lambda * lambda;
    if r <= 0.0 {
        0.0
    } else {
        r.sqrt() / (2.0 * std::f64::consts::PI * sigma * sigma)
    }
}

/// Distribution function of the semicircle law with variance `σ²`.
pub fn semicircle_cdf(lambda: f64, sigma: f64) -> f64 {
    let x = (lambda / sigma).clamp(-2.0, 2.0);
    0.5 + (x * (4.0 - x * x).sqrt() / 2.0 + 2.0 * (x / 2.0).asin()) / (2.0 * std::f64::consts::PI)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DosHistogram {
    /// Scale the eigenvalues were divided by.
    pub sigma: f64,
    /// Bin edges in units of `σ`.
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
    /// Between-draw standard error per bin.
    pub stderr: Vec<f64>,
    /// Semicircle density averaged over each bin.
    pub reference: Vec<f64>,
    /// `max |density - reference|` over bins centred in `[-window, window]`.
    pub sup_deviation: f64,
    /// `Σ |density - reference|·width` over all bins.
    pub l1_deviation: f64,
    /// `Σ |density(λ) - density(-λ)|·width`.
    pub asymmetry: f64,
    pub window: f64,
    pub draws: usize,
}

/// Pooled eigenvalue histogram of `λ/σ` over `[-half_range, half_range]`
/// with `σ²` the bulk row variance of the ensemble.
pub fn dos_histogram(
    spec: &BandMatrixSpec,
    bins: usize,
    half_range: f64,
    window: f64,
    mc: MonteCarlo,
) -> Result<DosHistogram> {
    if bins == 0 || !(half_range > 2.0) {
        return Err(Error::InvalidArgument("need bins ≥ 1 and a range beyond ±2σ".into()));
    }
    let sigma = spec
        .bulk_row_variance()
        .filter(|v| *v > 0.0)
        .ok_or_else(|| Error::InvalidArgument("ensemble has no finite row variance".into()))?
        .sqrt();
    let width = 2.0 * half_range / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|k| -half_range + k as f64 * width).collect();
    let dim = spec.dim() as f64;
    let per_draw = map_spectra(spec, false, mc, |s| {
        let mut counts = vec![0u64; bins];
        for &l in &s.eigenvalues {
            let x = l / sigma;
            let k = ((x + half_range) / width).floor();
            if k >= 0.0 && (k as usize) < bins {
                counts[k as usize] += 1;
            }
        }
        counts
    })?;
    let draws = per_draw.len();
    let mut density = vec![0.0; bins];
    let mut stderr = vec![0.0; bins];
    for k in 0..bins {
        let values: Vec<f64> = per_draw.iter().map(|c| c[k] as f64 / (dim * width)).collect();
        let s = Summary::of(&values);
        density[k] = s.mean;
        stderr[k] = if draws > 1 { s.stderr } else { f64::NAN };
    }
    let reference: Vec<f64> = edges
        .windows(2)
        .map(|e| (semicircle_cdf(e[1], 1.0) - semicircle_cdf(e[0], 1.0)) / width)
        .collect();
    let sup_deviation = (0..bins)
        .filter(|&k| (0.5 * (edges[k] + edges[k + 1])).abs() <= window)
        .map(|k| (density[k] - reference[k]).abs())
        .fold(0.0, f64::max);
    let l1_deviation = (0..bins).map(|k| (density[k] - reference[k]).abs() * width).sum();
    let asymmetry = (0..bins)
        .map(|k| (density[k] - density[bins - 1 - k]).abs() * width)
        .sum::<f64>()
        / 2.0;
    Ok(DosHistogram {
        sigma,
        edges,
        density,
        stderr,
        reference,
        sup_deviation,
        l1_deviation,
        asymmetry,
        window,
        draws,
    })
}

/// Local rescaling `λ̃_j = N(λ_j - λ0)` around a point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointProcessWindow {
    pub lambda0: f64,
    pub rescaled: Vec<f64>,
    pub window_halfwidth: f64,
}

pub fn rescale_near(sample: &SpectrumSample, lambda0: f64, window: f64) -> PointProcessWindow {
    let n = sample.dim() as f64;
    PointProcessWindow {
        lambda0,
        rescaled: sample
            .eigenvalues
            .iter()
            .map(|l| n * (l - lambda0))
            .filter(|v| v.abs() <= window)
            .collect(),
        window_halfwidth: window,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unfolding {
    /// Pooled integrated eigenvalue staircase.
    Empirical,
    /// `N·F_sc(λ/σ)` with the ensemble's row variance.
    Semicircle,
}

/// Spacing density `(32/π²) s² e^{-4s²/π}`.
pub fn surmise_density(s: f64) -> f64 {
    let pi = std::f64::consts::PI;
    32.0 / (pi * pi) * s * s * (-4.0 * s * s / pi).exp()
}

pub fn surmise_cdf(s: f64) -> f64 {
    let pi = std::f64::consts::PI;
    if s <= 0.0 {
        return 0.0;
    }
    libm::erf(2.0 * s / pi.sqrt()) - 4.0 * s / pi * (-4.0 * s * s / pi).exp()
}

pub fn poisson_cdf(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        1.0 - (-s).exp()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpacingReport {
    pub lambda0: f64,
    pub window: f64,
    pub unfolding: Unfolding,
    pub spacings: Vec<f64>,
    pub mean_spacing: f64,
    /// Histogram of the spacings on `[0, edges.last]`, unit mass.
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
    pub poisson: Vec<f64>,
    pub surmise: Vec<f64>,
    pub ks_poisson: f64,
    pub ks_surmise: f64,
}

/// Piecewise-linear staircase through every `stride`-th pooled eigenvalue.
struct Staircase {
    knots: Vec<(f64, f64)>,
}

impl Staircase {
    fn new(spectra: &[&[f64]]) -> Self {
        let mut pooled: Vec<f64> = spectra.iter().flat_map(|s| s.iter().copied()).collect();
        pooled.sort_by(f64::total_cmp);
        let m = spectra.len() as f64;
        // about eight mean spacings between knots
        let stride = (8 * spectra.len()).max(1);
        let mut knots: Vec<(f64, f64)> = pooled
            .iter()
            .enumerate()
            .step_by(stride)
            .map(|(k, &l)| (l, (k as f64 + 0.5) / m))
            .collect();
        let last = pooled.len() - 1;
        if last % stride != 0 {
            knots.push((pooled[last], (last as f64 + 0.5) / m));
        }
        knots.dedup_by(|a, b| a.0 == b.0);
        Self { knots }
    }

    fn eval(&self, l: f64) -> f64 {
        let k = &self.knots;
        if k.len() == 1 {
            return k[0].1;
        }
        let i = k.partition_point(|p| p.0 <= l).clamp(1, k.len() - 1);
        let (a, b) = (k[i - 1], k[i]);
        a.1 + (l - a.0) * (b.1 - a.1) / (b.0 - a.0)
    }
}

/// Nearest-neighbour spacings of unfolded eigenvalues in
/// `[lambda0 - window, lambda0 + window]`, pooled over spectra, with
/// Kolmogorov–Smirnov distances to the Poisson and surmise laws.
pub fn spacing_distribution(
    spectra: &[&[f64]],
    lambda0: f64,
    window: f64,
    unfolding: Unfolding,
    sigma: Option<f64>,
) -> Result<SpacingReport> {
    if spectra.is_empty() || spectra.iter().any(|s| s.is_empty()) {
        return Err(Error::InsufficientStatistics("no eigenvalues".into()));
    }
    let unfold: Box<dyn Fn(f64, usize) -> f64> = match unfolding {
        Unfolding::Empirical => {
            let stair = Staircase::new(spectra);
            Box::new(move |l, _| stair.eval(l))
        }
        Unfolding::Semicircle => {
            let sigma = sigma
                .filter(|s| *s > 0.0)
                .ok_or_else(|| Error::InvalidArgument("semicircle unfolding needs σ".into()))?;
            Box::new(move |l, n| n as f64 * semicircle_cdf(l, sigma))
        }
    };
    let mut spacings = Vec::new();
    for s in spectra {
        let inside: Vec<f64> = s
            .iter()
            .copied()
            .filter(|l| (l - lambda0).abs() <= window)
            .map(|l| unfold(l, s.len()))
            .collect();
        spacings.extend(inside.windows(2).map(|p| p[1] - p[0]));
    }
    if spacings.len() < MIN_SPACINGS {
        return Err(Error::InsufficientStatistics(format!(
            "{} spacings, need {MIN_SPACINGS}",
            spacings.len()
        )));
    }
    let mean_spacing = spacings.iter().sum::<f64>() / spacings.len() as f64;
    let top = spacings.iter().copied().fold(4.0, f64::max).ceil();
    let bins = (top * 10.0) as usize;
    let width = top / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|k| k as f64 * width).collect();
    let mut counts = vec![0usize; bins];
    for &s in &spacings {
        counts[((s / width) as usize).min(bins - 1)] += 1;
    }
    let total = spacings.len() as f64;
    let density = counts.iter().map(|&c| c as f64 / (total * width)).collect();
    let bin_mass = |cdf: fn(f64) -> f64| -> Vec<f64> {
        edges.windows(2).map(|e| (cdf(e[1]) - cdf(e[0])) / width).collect()
    };
    Ok(SpacingReport {
        lambda0,
        window,
        unfolding,
        ks_poisson: crate::stats::ks_distance(&spacings, poisson_cdf),
        ks_surmise: crate::stats::ks_distance(&spacings, surmise_cdf),
        mean_spacing,
        poisson: bin_mass(poisson_cdf),
        surmise: bin_mass(surmise_cdf),
        edges,
        density,
        spacings,
    })
}

/// Number of eigenvalues (sorted) in the closed interval of length `len`
/// centred at `center`.
pub fn count_in_interval(sorted: &[f64], center: f64, len: f64) -> usize {
    let lo = center - len / 2.0;
    let hi = center + len / 2.0;
    sorted.partition_point(|&l| l <= hi) - sorted.partition_point(|&l| l < lo)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MinamiRow {
    pub length: f64,
    /// `P̂[# ≥ 2]` pooled over draws and centres.
    pub pair_probability: f64,
    pub stderr: f64,
    /// `P̂[# ≥ 2] / N²`.
    pub rate: f64,
    /// `P̂[# ≥ 1]`.
    pub single_probability: f64,
    /// Mean eigenvalue count in the interval.
    pub mean_count: f64,
    pub events: usize,
    pub trials: usize,
    pub resolved: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinamiTable {
    pub dim: usize,
    pub centers: Vec<f64>,
    pub rows: Vec<MinamiRow>,
    /// Weighted log-log fit over the resolved rows.
    pub fit: LineFit,
}

/// Criteria for a length to count as resolved in the pair-rate fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    /// Fewest pair events.
    pub min_events: usize,
    /// Largest pair probability; beyond it three-point clusters matter.
    pub max_probability: f64,
}

impl Default for Resolution {
    fn default() -> Self {
        Self {
            min_events: 20,
            max_probability: 0.05,
        }
    }
}

/// Pair probabilities for intervals of each length centred at every point of
/// `centers`, and the log-log slope over the resolved lengths, which must
/// span at least one decade.
pub fn minami_pair_rate(
    spec: &BandMatrixSpec,
    lengths: &[f64],
    centers: &[f64],
    resolution: Resolution,
    mc: MonteCarlo,
) -> Result<MinamiTable> {
    if lengths.iter().any(|l| !(*l >= 0.0 && l.is_finite())) || centers.is_empty() {
        return Err(Error::InvalidArgument("lengths must be nonnegative, centres nonempty".into()));
    }
    let per_draw = map_spectra(spec, false, mc, |s| {
        lengths
            .iter()
            .map(|&len| {
                let mut pair = 0usize;
                let mut single = 0usize;
                let mut count = 0usize;
                for &c in centers {
                    let k = count_in_interval(&s.eigenvalues, c, len);
                    pair += usize::from(k >= 2);
                    single += usize::from(k >= 1);
                    count += k;
                }
                (pair, single, count)
            })
            .collect::<Vec<_>>()
    })?;
    let dim = spec.dim();
    let trials = mc.samples * centers.len();
    let rows: Vec<MinamiRow> = lengths
        .iter()
        .enumerate()
        .map(|(i, &length)| {
            let (mut pair, mut single, mut count) = (0, 0, 0);
            for d in &per_draw {
                pair += d[i].0;
                single += d[i].1;
                count += d[i].2;
            }
            let p = pair as f64 / trials as f64;
            MinamiRow {
                length,
                pair_probability: p,
                stderr: crate::stats::binomial_stderr(p, trials),
                rate: p / (dim * dim) as f64,
                single_probability: single as f64 / trials as f64,
                mean_count: count as f64 / trials as f64,
                events: pair,
                trials,
                resolved: length > 0.0
                    && pair >= resolution.min_events
                    && p <= resolution.max_probability,
            }
        })
        .collect();
    let resolved: Vec<&MinamiRow> = rows.iter().filter(|r| r.resolved).collect();
    let span = match (resolved.first(), resolved.last()) {
        (Some(a), Some(b)) => b.length / a.length,
        _ => 0.0,
    };
    if resolved.len() < 3 || span < 10.0 {
        return Err(Error::InsufficientStatistics(format!(
            "resolved lengths span a factor {span:.2}, need one decade"
        )));
    }
    let x: Vec<f64> = resolved.iter().map(|r| r.length.ln()).collect();
    let y: Vec<f64> = resolved.iter().map(|r| r.pair_probability.ln()).collect();
    let w: Vec<f64> = resolved.iter().map(|r| r.events as f64).collect();
    let fit = fit_line(&x, &y, &w)
        .ok_or_else(|| Error::InsufficientStatistics("degenerate pair-rate fit".into()))?;
    Ok(MinamiTable {
        dim,
        centers: centers.to_vec(),
        rows,
        fit,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CorrelatorPoint {
    pub i: usize,
    pub j: usize,
    pub dist: usize,
    pub estimate: MomentEstimate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrelatorReport {
    pub r: f64,
    pub points: Vec<CorrelatorPoint>,
    /// Draws with no eigenvalue in `[-r, r]`; they contribute zero.
    pub empty_draws: usize,
    /// Decay fit over `|i - j| > fit_window`.
    pub fit: Result<DecayFit, FitFailure>,
    pub fit_window: usize,
}

/// `E sup_{λ_k ∈ [-r, r]} |v_k(i) v_k(j)|` for each pair of 1-based sites.
pub fn eigenvector_correlator(
    spec: &BandMatrixSpec,
    r: f64,
    site_pairs: &[(usize, usize)],
    fit_window: usize,
    mc: MonteCarlo,
) -> Result<CorrelatorReport> {
    let dim = spec.dim();
    if site_pairs.iter().any(|&(i, j)| !(1..=dim).contains(&i) || !(1..=dim).contains(&j)) {
        return Err(Error::InvalidArgument(format!("site pair outside 1..={dim}")));
    }
    if fit_window < 3 * spec.w {
        return Err(Error::InvalidArgument(format!(
            "fit_window = {fit_window} must be at least 3W = {}",
            3 * spec.w
        )));
    }
    let per_draw = map_spectra(spec, true, mc, |s| {
        let v = s.eigenvectors.as_ref().expect("vectors requested");
        let in_window: Vec<usize> = (0..s.dim()).filter(|&k| s.eigenvalues[k].abs() <= r).collect();
        let values: Vec<f64> = site_pairs
            .iter()
            .map(|&(i, j)| {
                in_window
                    .iter()
                    .map(|&k| (v[(i - 1, k)] * v[(j - 1, k)]).norm())
                    .fold(0.0, f64::max)
            })
            .collect();
        (values, in_window.is_empty())
    })?;
    let empty_draws = per_draw.iter().filter(|d| d.1).count();
    let points: Vec<CorrelatorPoint> = site_pairs
        .iter()
        .enumerate()
        .map(|(p, &(i, j))| {
            let col: Vec<f64> = per_draw.iter().map(|d| d.0[p]).collect();
            CorrelatorPoint {
                i,
                j,
                dist: i.abs_diff(j),
                estimate: MomentEstimate::from_values(&col, 0, 1.0),
            }
        })
        .collect();
    let decay: Vec<DecayPoint> = points
        .iter()
        .map(|p| DecayPoint {
            dist: p.dist,
            estimate: p.estimate,
        })
        .collect();
    Ok(CorrelatorReport {
        r,
        fit: fit_decay(&decay, fit_window),
        points,
        empty_draws,
        fit_window,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimplicityReport {
    /// Smallest gap of each spectrum (`∞` for a single eigenvalue).
    pub min_gaps: Vec<f64>,
    /// Number of gaps below [`GAP_THRESHOLD`] over all spectra.
    pub degenerate_gaps: usize,
    pub smallest: f64,
}

pub fn min_gap(sorted: &[f64]) -> f64 {
    sorted.windows(2).map(|p| p[1] - p[0]).fold(f64::INFINITY, f64::min)
}

/// Minimal gaps and the count of near-degenerate gaps of given spectra.
pub fn simplicity_check(spectra: &[&[f64]]) -> SimplicityReport {
    let min_gaps: Vec<f64> = spectra.iter().map(|s| min_gap(s)).collect();
    let degenerate_gaps = spectra
        .iter()
        .map(|s| s.windows(2).filter(|p| p[1] - p[0] < GAP_THRESHOLD).count())
        .sum();
    SimplicityReport {
        smallest: min_gaps.iter().copied().fold(f64::INFINITY, f64::min),
        min_gaps,
        degenerate_gaps,
    }
}

/// [`simplicity_check`] over fresh draws of an ensemble, without keeping
/// the spectra.
pub fn simplicity_scan(spec: &BandMatrixSpec, mc: MonteCarlo) -> Result<SimplicityReport> {
    let per_draw = map_spectra(spec, false, mc, |s| {
        let r = simplicity_check(&[&s.eigenvalues]);
        (r.smallest, r.degenerate_gaps)
    })?;
    Ok(SimplicityReport {
        smallest: per_draw.iter().map(|d| d.0).fold(f64::INFINITY, f64::min),
        degenerate_gaps: per_draw.iter().map(|d| d.1).sum(),
        min_gaps: per_draw.into_iter().map(|d| d.0).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WegnerCurve {
    pub w: usize,
    /// `2π sup h`.
    pub kappa: f64,
    pub samples: usize,
    /// `P(‖(V - A)⁻¹‖ > t W^{3/2})` with reference `κ/t`.
    pub single: Vec<TailPoint>,
    /// `P(‖(H - A⊕A)⁻¹‖ > t W^{3/2})` for `H = [[V1, C], [C†, V2]]`, with
    /// reference `2κ/t`.
    pub two_block: Option<Vec<TailPoint>>,
}

/// `1 / dist(0, spec(a))` for Hermitian `a`.
fn inverse_norm(a: MatRef<'_, c64>) -> Result<f64> {
    let ev = linalg::hermitian_eigenvalues(a)?;
    Ok(1.0 / ev.iter().map(|l| l.abs()).fold(f64::INFINITY, f64::min))
}

/// Block-level Wegner tail of a diagonal block law shifted by a fixed
/// Hermitian `shift`, optionally with the two-block variant coupled by
/// `coupling`.
#[allow(clippy::too_many_arguments)]
pub fn wegner_block_tail(
    diag_law: &DiagonalBlockLaw,
    w: usize,
    symmetry: SymmetryClass,
    shift: MatRef<'_, c64>,
    coupling: Option<MatRef<'_, c64>>,
    t_grid: &[f64],
    mc: MonteCarlo,
    seed: u64,
) -> Result<WegnerCurve> {
    diag_law.validate()?;
    check_grid(t_grid)?;
    if shift.nrows() != w || shift.ncols() != w || coupling.is_some_and(|c| c.nrows() != w || c.ncols() != w) {
        return Err(Error::InvalidArgument(format!("shift and coupling must be {w}×{w}")));
    }
    if linalg::hermitian_defect(shift) > 1e-12 * shift.norm_max().max(1.0) {
        return Err(Error::InvalidArgument("shift must be Hermitian".into()));
    }
    if matches!(diag_law, DiagonalBlockLaw::ScalarDensity { .. }) && w != 1 {
        return Err(Error::InvalidArgument("scalar laws need W = 1".into()));
    }
    if mc.samples == 0 {
        return Err(Error::InvalidArgument("samples must be positive".into()));
    }
    let kappa = 2.0 * std::f64::consts::PI * diag_law.sup_diagonal_density();
    let scale = (w as f64).powf(1.5);
    let seeds = SeedSequence::new(seed);
    let draws: Vec<Result<(f64, Option<f64>)>> = map_indexed(mc.samples as u64, mc.workers, |i| {
        let stream = seeds.sample(i);
        let v1 = diag_law.sample_block(w, symmetry, &mut stream.block(0));
        let single = inverse_norm((&v1 - shift).as_ref())? / scale;
        let double = match coupling {
            None => None,
            Some(c) => {
                let v2 = diag_law.sample_block(w, symmetry, &mut stream.block(1));
                let mut h = Mat::<c64>::zeros(2 * w, 2 * w);
                h.as_mut().submatrix_mut(0, 0, w, w).copy_from(&v1 - shift);
                h.as_mut().submatrix_mut(w, w, w, w).copy_from(&v2 - shift);
                h.as_mut().submatrix_mut(0, w, w, w).copy_from(c);
                h.as_mut().submatrix_mut(w, 0, w, w).copy_from(c.adjoint());
                Some(inverse_norm(h.as_ref())? / scale)
            }
        };
        Ok((single, double))
    });
    let draws: Vec<(f64, Option<f64>)> = draws.into_iter().collect::<Result<_>>()?;
    let singles: Vec<f64> = draws.iter().map(|d| d.0).collect();
    let single = survival(&singles, t_grid, |t| Some(kappa / t));
    let two_block = coupling.map(|_| {
        let doubles: Vec<f64> = draws.iter().map(|d| d.1.unwrap()).collect();
        survival(&doubles, t_grid, |t| Some(2.0 * kappa / t))
    });
    Ok(WegnerCurve {
        w,
        kappa,
        samples: mc.samples,
        single,
        two_block,
    })
}
