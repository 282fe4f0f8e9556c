//! Experiment configuration: one JSON document per run.

use serde::{Deserialize, Serialize};

use crate::ensemble::{
    BandMatrixSpec, DeterministicBlock, DiagonalBlockLaw, OffDiagonalBlockLaw, SymmetryClass,
};
use crate::moments::{DependencyModel, MAX_EXPONENT};
use crate::spectra::Unfolding;

/// Ensemble section. Give either `n` (blocks) or `N` (dimension).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    #[serde(rename = "W")]
    pub w: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    pub symmetry: SymmetryClass,
    pub diag_law: DiagonalBlockLaw,
    pub offdiag_law: OffDiagonalBlockLaw,
    #[serde(default)]
    pub seed: u64,
}

impl EnsembleConfig {
    pub fn from_spec(spec: &BandMatrixSpec) -> Self {
        Self {
            w: spec.w,
            n: Some(spec.n),
            dim: None,
            symmetry: spec.symmetry,
            diag_law: spec.diag_law.clone(),
            offdiag_law: spec.offdiag_law.clone(),
            seed: spec.seed,
        }
    }

    /// Block count implied by `n`/`N`, with consistency errors.
    fn blocks(&self) -> Result<usize, String> {
        if self.w == 0 {
            return Err("W must be positive".into());
        }
        match (self.n, self.dim) {
            (None, None) => Err("one of n or N is required".into()),
            (Some(n), None) => Ok(n),
            (None, Some(dim)) => {
                if dim % self.w != 0 {
                    Err(format!("N = {dim} is not a multiple of W = {}", self.w))
                } else {
                    Ok(dim / self.w)
                }
            }
            (Some(n), Some(dim)) => {
                if n * self.w != dim {
                    Err(format!("N = {dim} differs from n·W = {}", n * self.w))
                } else {
                    Ok(n)
                }
            }
        }
    }

    pub fn to_spec(&self) -> Result<BandMatrixSpec, String> {
        let spec = BandMatrixSpec {
            w: self.w,
            n: self.blocks()?,
            symmetry: self.symmetry,
            diag_law: self.diag_law.clone(),
            offdiag_law: self.offdiag_law.clone(),
            seed: self.seed,
        };
        spec.validate().map_err(|e| e.to_string())?;
        Ok(spec)
    }
}

/// Law of the scalar samples fed to the Hölder gap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SampleLaw {
    Gaussian { mean: f64, sd: f64 },
    Uniform { a: f64, b: f64 },
    /// `a` with probability `1 - p`, `b` with probability `p`.
    TwoPoint { a: f64, b: f64, p: f64 },
}

/// Hermitian shift for Wegner tails.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShiftSpec {
    Zero,
    Scalar { value: f64 },
    /// A Gaussian Wigner block drawn once from the run seed.
    Random,
    Block { block: DeterministicBlock },
}

fn default_half() -> f64 {
    0.5
}

fn default_q_points() -> usize {
    64
}

fn default_bins() -> usize {
    32
}

fn default_half_range() -> f64 {
    2.2
}

fn default_dos_window() -> f64 {
    1.8
}

fn default_min_events() -> usize {
    20
}

fn default_max_probability() -> f64 {
    0.05
}

fn default_centers() -> Vec<f64> {
    vec![0.0]
}

fn default_unfolding() -> Unfolding {
    Unfolding::Empirical
}

/// What to compute.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Estimator {
    /// Dump the entries of draws `0..samples`.
    Sample,
    /// Resolvent entry per draw, with the dense oracle when affordable.
    Resolvent { lambda: f64, x: usize, y: usize },
    Moment {
        lambda: f64,
        x: usize,
        y: usize,
        #[serde(default = "default_half")]
        s: f64,
    },
    Tail {
        lambda: f64,
        x: usize,
        y: usize,
        t_grid: Vec<f64>,
        #[serde(default)]
        kappa: Option<f64>,
        #[serde(default)]
        sigma: Option<f64>,
    },
    Decay {
        lambda: f64,
        #[serde(default = "default_half")]
        s: f64,
        x0: usize,
        distances: Vec<usize>,
        fit_window: usize,
    },
    /// Rows use the ensemble laws with each width and `n` blocks.
    Scan {
        widths: Vec<usize>,
        n: usize,
        lambda: f64,
        #[serde(default = "default_half")]
        s: f64,
    },
    Dos {
        #[serde(default = "default_bins")]
        bins: usize,
        #[serde(default = "default_half_range")]
        half_range: f64,
        #[serde(default = "default_dos_window")]
        window: f64,
    },
    Spacing {
        lambda0: f64,
        window: f64,
        #[serde(default = "default_unfolding")]
        unfolding: Unfolding,
    },
    Minami {
        lengths: Vec<f64>,
        #[serde(default = "default_centers")]
        centers: Vec<f64>,
        #[serde(default = "default_min_events")]
        min_events: usize,
        #[serde(default = "default_max_probability")]
        max_probability: f64,
    },
    Eigvec {
        r: f64,
        site_pairs: Vec<(usize, usize)>,
        fit_window: usize,
    },
    Simplicity,
    Wegner {
        shift: ShiftSpec,
        #[serde(default)]
        coupling: Option<DeterministicBlock>,
        t_grid: Vec<f64>,
    },
    /// Operator norm of diagonal blocks.
    Norm,
    Holder {
        law: SampleLaw,
        r: f64,
        s: f64,
        #[serde(default = "default_q_points")]
        q_points: usize,
    },
    Domination {
        n: usize,
        delta: f64,
        p0: f64,
        model: DependencyModel,
    },
    /// The full acceptance suite.
    Acceptance,
}

impl Estimator {
    pub const KINDS: [&'static str; 16] = [
        "sample",
        "resolvent",
        "moment",
        "tail",
        "decay",
        "scan",
        "dos",
        "spacing",
        "minami",
        "eigvec",
        "simplicity",
        "wegner",
        "norm",
        "holder",
        "domination",
        "acceptance",
    ];

    pub fn kind(&self) -> &'static str {
        match self {
            Estimator::Sample => "sample",
            Estimator::Resolvent { .. } => "resolvent",
            Estimator::Moment { .. } => "moment",
            Estimator::Tail { .. } => "tail",
            Estimator::Decay { .. } => "decay",
            Estimator::Scan { .. } => "scan",
            Estimator::Dos { .. } => "dos",
            Estimator::Spacing { .. } => "spacing",
            Estimator::Minami { .. } => "minami",
            Estimator::Eigvec { .. } => "eigvec",
            Estimator::Simplicity => "simplicity",
            Estimator::Wegner { .. } => "wegner",
            Estimator::Norm => "norm",
            Estimator::Holder { .. } => "holder",
            Estimator::Domination { .. } => "domination",
            Estimator::Acceptance => "acceptance",
        }
    }

    /// Whether the estimator draws matrices from the ensemble section.
    pub fn needs_ensemble(&self) -> bool {
        !matches!(
            self,
            Estimator::Holder { .. } | Estimator::Domination { .. } | Estimator::Acceptance
        )
    }
}

fn default_workers() -> usize {
    1
}

fn default_output_dir() -> String {
    "out".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleConfig>,
    pub estimator: Estimator,
    pub samples: usize,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    /// Overrides `ensemble.seed`; the seed of estimators without an ensemble.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// A configuration problem located by a dotted field path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationError {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for ValidationError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// All problems found in one pass.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationErrors(pub Vec<ValidationError>);

impl std::fmt::Display for ValidationErrors {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (k, e) in self.0.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationErrors {}

impl ValidationErrors {
    fn single(path: &str, message: impl Into<String>) -> Self {
        Self(vec![ValidationError {
            path: path.into(),
            message: message.into(),
        }])
    }
}

/// Tagged enums buffer their content, so a type error inside the estimator
/// is reported without the field. Find it by dropping one field at a time.
fn offending_estimator_field(config: &serde_json::Value, message: &str) -> Option<String> {
    let fields = config.get("estimator")?.as_object()?;
    if message.starts_with("missing field") || message.starts_with("unknown field") {
        return None;
    }
    fields.keys().filter(|k| *k != "kind").find_map(|key| {
        let mut trimmed = fields.clone();
        trimmed.remove(key);
        match serde_json::from_value::<Estimator>(serde_json::Value::Object(trimmed)) {
            Ok(_) => Some(key.clone()),
            Err(e) if e.to_string() == format!("missing field `{key}`") => Some(key.clone()),
            Err(_) => None,
        }
    })
}

impl ExperimentConfig {
    /// Parse a JSON document. Unknown estimator kinds and type errors are
    /// reported with the offending field path.
    pub fn from_json(text: &str) -> Result<Self, ValidationErrors> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| ValidationErrors::single("$", e.to_string()))?;
        if let Some(kind) = value.pointer("/estimator/kind") {
            let known = kind.as_str().is_some_and(|k| !k.is_empty() && Estimator::KINDS.contains(&k));
            if !known {
                return Err(ValidationErrors::single(
                    "estimator.kind",
                    format!(
                        "unknown estimator {kind}; expected one of {}",
                        Estimator::KINDS.join(", ")
                    ),
                ));
            }
        }
        serde_path_to_error::deserialize(value.clone()).map_err(|e| {
            let mut path = e.path().to_string();
            let message = e.into_inner().to_string();
            if path == "estimator" {
                if let Some(field) = offending_estimator_field(&value, &message) {
                    path = format!("estimator.{field}");
                }
            }
            ValidationErrors::single(&path, message)
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// The seed in effect after overrides.
    pub fn effective_seed(&self) -> u64 {
        self.seed
            .or_else(|| self.ensemble.as_ref().map(|e| e.seed))
            .unwrap_or(0)
    }

    /// Ensemble with the effective seed applied.
    pub fn spec(&self) -> Option<Result<BandMatrixSpec, String>> {
        self.ensemble.as_ref().map(|e| {
            let mut spec = e.to_spec()?;
            spec.seed = self.effective_seed();
            Ok(spec)
        })
    }

    /// Cross-field validation; every problem is reported.
    pub fn validate(&self) -> Result<(), ValidationErrors> {
        let mut errors = Vec::new();
        let mut err = |path: &str, message: String| {
            errors.push(ValidationError {
                path: path.into(),
                message,
            })
        };
        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|ch| ch.is_ascii_alphanumeric() || "-_.".contains(ch))
        {
            err("name", format!("{:?} must be nonempty [A-Za-z0-9._-]", self.name));
        }
        if self.samples == 0 {
            err("samples", "must be positive".into());
        }
        if self.workers == 0 {
            err("workers", "must be positive".into());
        }
        if self.output_dir.is_empty() {
            err("output_dir", "must be nonempty".into());
        }
        let spec = match self.spec() {
            Some(Ok(s)) => Some(s),
            Some(Err(m)) => {
                err("ensemble", m);
                None
            }
            None => {
                if self.estimator.needs_ensemble() {
                    err("ensemble", format!("required by estimator {}", self.estimator.kind()));
                }
                None
            }
        };
        let dim = spec.as_ref().map(BandMatrixSpec::dim);
        let w = spec.as_ref().map(|s| s.w);
        let mut site = |path: &str, v: usize| {
            if let Some(d) = dim {
                if !(1..=d).contains(&v) {
                    err(path, format!("{v} outside 1..={d}"));
                }
            }
        };
        let mut problems: Vec<(String, String)> = Vec::new();
        let mut bad = |path: &str, message: String| problems.push((path.into(), message));
        let exponent = |s: f64| s > 0.0 && s < 1.0 && s <= MAX_EXPONENT;
        let grid_ok = |g: &[f64]| {
            !g.is_empty() && g.iter().all(|t| *t > 0.0 && t.is_finite()) && g.windows(2).all(|p| p[1] > p[0])
        };
        match &self.estimator {
            Estimator::Sample | Estimator::Simplicity | Estimator::Acceptance => {}
            Estimator::Resolvent { x, y, .. } => {
                site("estimator.x", *x);
                site("estimator.y", *y);
            }
            Estimator::Moment { x, y, s, .. } => {
                site("estimator.x", *x);
                site("estimator.y", *y);
                if !exponent(*s) {
                    bad("estimator.s", format!("{s} must lie in (0,1) and not exceed {MAX_EXPONENT}"));
                }
            }
            Estimator::Tail { x, y, t_grid, kappa, sigma, .. } => {
                site("estimator.x", *x);
                site("estimator.y", *y);
                if !grid_ok(t_grid) {
                    bad("estimator.t_grid", "must be positive and strictly increasing".into());
                }
                if kappa.is_some() != sigma.is_some() {
                    bad("estimator.kappa", "kappa and sigma go together".into());
                }
            }
            Estimator::Decay {
                s,
                x0,
                distances,
                fit_window,
                ..
            } => {
                site("estimator.x0", *x0);
                if !exponent(*s) {
                    bad("estimator.s", format!("{s} must lie in (0,1) and not exceed {MAX_EXPONENT}"));
                }
                if let Some(w) = w {
                    if *fit_window < 3 * w {
                        bad("estimator.fit_window", format!("{fit_window} is below 3W = {}", 3 * w));
                    }
                }
                if !distances.iter().any(|d| d > fit_window) {
                    bad("estimator.distances", "no distance exceeds fit_window".into());
                }
                if let Some(d) = dim {
                    if let Some(far) = distances.iter().find(|&&dd| x0 + dd > d) {
                        bad("estimator.distances", format!("x0 + {far} exceeds N = {d}"));
                    }
                }
            }
            Estimator::Scan { widths, n, s, .. } => {
                if widths.is_empty() || widths.contains(&0) {
                    bad("estimator.widths", "must be nonempty and positive".into());
                }
                if !exponent(*s) {
                    bad("estimator.s", format!("{s} must lie in (0,1) and not exceed {MAX_EXPONENT}"));
                }
                if *n < 4 {
                    bad("estimator.n", "need at least 4 blocks".into());
                }
            }
            Estimator::Dos {
                bins,
                half_range,
                window,
            } => {
                if *bins == 0 {
                    bad("estimator.bins", "must be positive".into());
                }
                if !(*half_range > 2.0) {
                    bad("estimator.half_range", "must exceed 2 (units of σ)".into());
                }
                if !(*window > 0.0 && window <= half_range) {
                    bad("estimator.window", "must lie in (0, half_range]".into());
                }
            }
            Estimator::Spacing { window, .. } => {
                if !(*window > 0.0) {
                    bad("estimator.window", "must be positive".into());
                }
            }
            Estimator::Minami {
                lengths,
                centers,
                max_probability,
                ..
            } => {
                if lengths.iter().any(|l| !(*l >= 0.0 && l.is_finite())) || lengths.is_empty() {
                    bad("estimator.lengths", "must be nonempty and nonnegative".into());
                }
                let positive: Vec<f64> = lengths.iter().copied().filter(|l| *l > 0.0).collect();
                let lo = positive.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = positive.iter().copied().fold(0.0, f64::max);
                if !(hi / lo >= 10.0) {
                    bad("estimator.lengths", "must span at least one decade".into());
                }
                if centers.is_empty() {
                    bad("estimator.centers", "must be nonempty".into());
                }
                if !(*max_probability > 0.0 && *max_probability <= 1.0) {
                    bad("estimator.max_probability", "must lie in (0,1]".into());
                }
            }
            Estimator::Eigvec {
                r,
                site_pairs,
                fit_window,
            } => {
                if !(*r > 0.0) {
                    bad("estimator.r", "must be positive".into());
                }
                for (k, &(i, j)) in site_pairs.iter().enumerate() {
                    site(&format!("estimator.site_pairs[{k}]"), i);
                    site(&format!("estimator.site_pairs[{k}]"), j);
                }
                if let Some(w) = w {
                    if *fit_window < 3 * w {
                        bad("estimator.fit_window", format!("{fit_window} is below 3W = {}", 3 * w));
                    }
                }
            }
            Estimator::Wegner { shift, coupling, t_grid } => {
                if !grid_ok(t_grid) {
                    bad("estimator.t_grid", "must be positive and strictly increasing".into());
                }
                if let Some(w) = w {
                    if let ShiftSpec::Block { block } = shift {
                        if block.dim() != w {
                            bad("estimator.shift", format!("block must be {w}×{w}"));
                        }
                    }
                    if coupling.as_ref().is_some_and(|c| c.dim() != w) {
                        bad("estimator.coupling", format!("block must be {w}×{w}"));
                    }
                }
            }
            Estimator::Norm => {}
            Estimator::Holder { law, r, s, q_points } => {
                if !(*r > 0.0 && r < s) {
                    bad("estimator.r", format!("need 0 < r < s, got r = {r}, s = {s}"));
                }
                if *q_points < 2 {
                    bad("estimator.q_points", "need at least 2".into());
                }
                let law_ok = match *law {
                    SampleLaw::Gaussian { sd, .. } => sd >= 0.0,
                    SampleLaw::Uniform { a, b } => a < b,
                    SampleLaw::TwoPoint { p, .. } => (0.0..=1.0).contains(&p),
                };
                if !law_ok {
                    bad("estimator.law", format!("invalid parameters {law:?}"));
                }
            }
            Estimator::Domination { n, delta, p0, model } => {
                if *n == 0 {
                    bad("estimator.n", "must be positive".into());
                }
                if !(*delta > 0.0 && delta.is_finite()) {
                    bad("estimator.delta", "must be positive and finite".into());
                }
                if !(0.0..=1.0).contains(p0) {
                    bad("estimator.p0", "must lie in [0,1]".into());
                } else if *p0 > model.guaranteed_p0() {
                    bad(
                        "estimator.p0",
                        format!("model only guarantees {}", model.guaranteed_p0()),
                    );
                }
            }
        }
        for (path, message) in problems {
            errors.push(ValidationError { path, message });
        }
        if let (Estimator::Spacing { unfolding: Unfolding::Semicircle, .. }, Some(spec)) = (&self.estimator, &spec) {
            if spec.bulk_row_variance().is_none() {
                errors.push(ValidationError {
                    path: "estimator.unfolding".into(),
                    message: "semicircle unfolding needs a finite row variance".into(),
                });
            }
        }
        if let (Estimator::Norm, Some(spec)) = (&self.estimator, &spec) {
            if spec.diag_law.diagonal_second_moment().is_none() {
                errors.push(ValidationError {
                    path: "ensemble.diag_law".into(),
                    message: "norm statistic needs a law with a second moment".into(),
                });
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(ValidationErrors(errors))
        }
    }

    /// Apply command-line overrides of top-level fields.
    pub fn apply_overrides(
        &mut self,
        seed: Option<u64>,
        workers: Option<usize>,
        out: Option<&str>,
        samples: Option<usize>,
    ) {
        if seed.is_some() {
            self.seed = seed;
        }
        if let Some(w) = workers {
            self.workers = w;
        }
        if let Some(o) = out {
            self.output_dir = o.to_string();
        }
        if let Some(s) = samples {
            self.samples = s;
        }
    }
}
