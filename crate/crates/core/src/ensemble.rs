//! Random band-matrix ensembles.
//!
//! A band matrix of width `W` and dimension `N = nW` is stored in block
//! tridiagonal form: Hermitian diagonal blocks `V_1..V_n` and off-diagonal
//! blocks `T_1..T_{n-1}`, with `T_j` coupling block `j` to block `j+1`.
//!
//! Scale conventions: a Wigner block is `V = M / √W` where `M` has i.i.d.
//! diagonal entries `d` and upper entries `a`. In the complex class a
//! Gaussian entry is `a = (x + iy)/√2` so that `E|a|² = 1`. Triangular
//! off-diagonal laws are strictly lower triangular and carry the same
//! `1/√W` factor, which makes the Gaussian choices reproduce the Gaussian
//! band ensemble with `E|X_ij|² = 1/W` for `|i - j| < W`.

use faer::{c64, Mat, MatRef};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat};
use crate::rng::{SeedSequence, Stream};

/// Real symmetric (β = 1) or complex Hermitian (β = 2).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymmetryClass {
    Real,
    Complex,
}

impl SymmetryClass {
    pub fn beta(self) -> u8 {
        match self {
            SymmetryClass::Real => 1,
            SymmetryClass::Complex => 2,
        }
    }
}

/// A law on the real line, used for `W = 1` runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarLaw {
    Gaussian,
    Cauchy,
    Uniform { a: f64, b: f64 },
}

impl ScalarLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ScalarLaw::Uniform { a, b } if !(a < b && a.is_finite() && b.is_finite()) => Err(
                Error::InvalidSpec(format!("uniform law needs a < b, got ({a}, {b})")),
            ),
            _ => Ok(()),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ScalarLaw::Gaussian => rng.sample(StandardNormal),
            ScalarLaw::Cauchy => {
                let u: f64 = rng.gen();
                (std::f64::consts::PI * (u - 0.5)).tan()
            }
            ScalarLaw::Uniform { a, b } => rng.gen_range(a..b),
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        use std::f64::consts::PI;
        match *self {
            ScalarLaw::Gaussian => (-0.5 * x * x).exp() / (2.0 * PI).sqrt(),
            ScalarLaw::Cauchy => 1.0 / (PI * (1.0 + x * x)),
            ScalarLaw::Uniform { a, b } => {
                if (a..=b).contains(&x) {
                    1.0 / (b - a)
                } else {
                    0.0
                }
            }
        }
    }

    pub fn sup_density(&self) -> f64 {
        self.density(match *self {
            ScalarLaw::Uniform { a, .. } => a,
            _ => 0.0,
        })
    }

    pub fn second_moment(&self) -> Option<f64> {
        match *self {
            ScalarLaw::Gaussian => Some(1.0),
            ScalarLaw::Cauchy => None,
            ScalarLaw::Uniform { a, b } => Some((a * a + a * b + b * b) / 3.0),
        }
    }
}

/// Law of the diagonal blocks `V_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiagonalBlockLaw {
    /// Unit Gaussian entries (GOE/GUE-type Wigner block).
    GaussianWigner,
    /// Entries with density `c_α e^{-|x|^α}` (radial on ℂ in the complex class).
    HolderWigner { alpha: f64 },
    /// Diagonal entries uniform on `[-D, D]`; upper entries uniform on the
    /// interval `[-A, A]` (real) or the disc `|a| < A` (complex).
    BoxWigner { diagonal_half_width: f64, offdiag_half_width: f64 },
    /// A 1×1 block drawn from a named scalar law.
    ScalarDensity { law: ScalarLaw },
}

/// Density `c_α e^{-|x|^α}` on the real line.
#[derive(Clone, Copy, Debug)]
pub struct HolderDensity {
    alpha: f64,
    norm: f64,
}

impl HolderDensity {
    /// Normalizes by quadrature of `∫ e^{-|x|^α} dx`.
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidSpec(format!("Hölder exponent {alpha} not in (0, 1]")));
        }
        // x = e^y turns the slowly decaying tail into a double-exponential one,
        // where the trapezoid rule converges geometrically.
        let step = 1e-3;
        let lo = -40.0;
        let hi = (60.0f64).ln() / alpha;
        let count = ((hi - lo) / step).ceil() as usize;
        let f = |y: f64| (-(alpha * y).exp()).exp() * y.exp();
        let mut half = 0.5 * (f(lo) + f(hi));
        for k in 1..count {
            half += f(lo + k as f64 * (hi - lo) / count as f64);
        }
        half *= (hi - lo) / count as f64;
        Ok(Self {
            alpha,
            norm: 1.0 / (2.0 * half),
        })
    }

    pub fn normalization(&self) -> f64 {
        self.norm
    }

    pub fn density(&self, x: f64) -> f64 {
        self.norm * (-x.abs().powf(self.alpha)).exp()
    }
}

impl DiagonalBlockLaw {
    pub fn validate(&self) -> Result<()> {
        match self {
            DiagonalBlockLaw::GaussianWigner => Ok(()),
            DiagonalBlockLaw::HolderWigner { alpha } => HolderDensity::new(*alpha).map(|_| ()),
            DiagonalBlockLaw::BoxWigner {
                diagonal_half_width,
                offdiag_half_width,
            } => {
                if *diagonal_half_width > 0.0 && *offdiag_half_width > 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidSpec("box half-widths must be positive".into()))
                }
            }
            DiagonalBlockLaw::ScalarDensity { law } => law.validate(),
        }
    }

    /// Supremum of the density of a raw diagonal entry `d`.
    pub fn sup_diagonal_density(&self) -> f64 {
        match self {
            DiagonalBlockLaw::GaussianWigner => ScalarLaw::Gaussian.sup_density(),
            DiagonalBlockLaw::HolderWigner { alpha } => HolderDensity::new(*alpha)
                .map(|h| h.normalization())
                .unwrap_or(f64::NAN),
            DiagonalBlockLaw::BoxWigner {
                diagonal_half_width, ..
            } => 0.5 / diagonal_half_width,
            DiagonalBlockLaw::ScalarDensity { law } => law.sup_density(),
        }
    }

    /// `E d²` for a raw diagonal entry.
    pub fn diagonal_second_moment(&self) -> Option<f64> {
        match self {
            DiagonalBlockLaw::GaussianWigner => Some(1.0),
            DiagonalBlockLaw::HolderWigner { alpha } => Some(gamma_ratio(3.0 / alpha, 1.0 / alpha)),
            DiagonalBlockLaw::BoxWigner {
                diagonal_half_width, ..
            } => Some(diagonal_half_width.powi(2) / 3.0),
            DiagonalBlockLaw::ScalarDensity { law } => law.second_moment(),
        }
    }

    /// `σ² = E|a|²` for a raw upper entry; `None` when the block has none.
    pub fn offdiag_second_moment(&self, symmetry: SymmetryClass) -> Option<f64> {
        match (self, symmetry) {
            (DiagonalBlockLaw::GaussianWigner, _) => Some(1.0),
            (DiagonalBlockLaw::HolderWigner { alpha }, SymmetryClass::Real) => {
                Some(gamma_ratio(3.0 / alpha, 1.0 / alpha))
            }
            (DiagonalBlockLaw::HolderWigner { alpha }, SymmetryClass::Complex) => {
                Some(gamma_ratio(4.0 / alpha, 2.0 / alpha))
            }
            (DiagonalBlockLaw::BoxWigner { offdiag_half_width, .. }, SymmetryClass::Real) => {
                Some(offdiag_half_width.powi(2) / 3.0)
            }
            (DiagonalBlockLaw::BoxWigner { offdiag_half_width, .. }, SymmetryClass::Complex) => {
                Some(offdiag_half_width.powi(2) / 2.0)
            }
            (DiagonalBlockLaw::ScalarDensity { .. }, _) => None,
        }
    }

    fn sample_diagonal<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            DiagonalBlockLaw::GaussianWigner => rng.sample(StandardNormal),
            DiagonalBlockLaw::HolderWigner { alpha } => sample_holder_real(*alpha, rng),
            DiagonalBlockLaw::BoxWigner {
                diagonal_half_width, ..
            } => rng.gen_range(-diagonal_half_width..*diagonal_half_width),
            DiagonalBlockLaw::ScalarDensity { law } => law.sample(rng),
        }
    }

    fn sample_offdiag<R: Rng + ?Sized>(&self, symmetry: SymmetryClass, rng: &mut R) -> c64 {
        match (self, symmetry) {
            (DiagonalBlockLaw::GaussianWigner, s) => gaussian_entry(s, rng),
            (DiagonalBlockLaw::HolderWigner { alpha }, SymmetryClass::Real) => {
                c(sample_holder_real(*alpha, rng))
            }
            (DiagonalBlockLaw::HolderWigner { alpha }, SymmetryClass::Complex) => {
                // radial density ∝ e^{-r^α} r dr, so r^α ~ Gamma(2/α)
                let g: f64 = Gamma::new(2.0 / alpha, 1.0).unwrap().sample(rng);
                let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                c64::from_polar(g.powf(1.0 / alpha), phase)
            }
            (DiagonalBlockLaw::BoxWigner { offdiag_half_width, .. }, s) => {
                uniform_entry(*offdiag_half_width, s, rng)
            }
            (DiagonalBlockLaw::ScalarDensity { .. }, _) => c(0.0),
        }
    }

    /// Log-density of a raw diagonal entry, up to a constant; `None` outside
    /// the support.
    fn log_diagonal_density(&self, d: f64) -> Option<f64> {
        match self {
            DiagonalBlockLaw::GaussianWigner => Some(-0.5 * d * d),
            DiagonalBlockLaw::HolderWigner { alpha } => Some(-d.abs().powf(*alpha)),
            DiagonalBlockLaw::BoxWigner {
                diagonal_half_width, ..
            } => (d.abs() <= *diagonal_half_width).then_some(0.0),
            DiagonalBlockLaw::ScalarDensity { law } => {
                let p = law.density(d);
                (p > 0.0).then(|| p.ln())
            }
        }
    }

    fn log_offdiag_density(&self, a: c64, symmetry: SymmetryClass) -> Option<f64> {
        if symmetry == SymmetryClass::Real && a.im != 0.0 {
            return None;
        }
        match self {
            DiagonalBlockLaw::GaussianWigner => Some(match symmetry {
                SymmetryClass::Real => -0.5 * a.re * a.re,
                SymmetryClass::Complex => -a.norm_sqr(),
            }),
            DiagonalBlockLaw::HolderWigner { alpha } => Some(-a.norm().powf(*alpha)),
            DiagonalBlockLaw::BoxWigner { offdiag_half_width, .. } => {
                (a.norm() <= *offdiag_half_width).then_some(0.0)
            }
            DiagonalBlockLaw::ScalarDensity { .. } => (a == c(0.0)).then_some(0.0),
        }
    }
}

fn gamma_ratio(a: f64, b: f64) -> f64 {
    libm::tgamma(a) / libm::tgamma(b)
}

fn sample_holder_real<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    // |x|^α ~ Gamma(1/α), symmetric sign
    let g: f64 = Gamma::new(1.0 / alpha, 1.0).unwrap().sample(rng);
    let x = g.powf(1.0 / alpha);
    if rng.gen::<bool>() {
        x
    } else {
        -x
    }
}

fn gaussian_entry<R: Rng + ?Sized>(symmetry: SymmetryClass, rng: &mut R) -> c64 {
    match symmetry {
        SymmetryClass::Real => c(rng.sample(StandardNormal)),
        SymmetryClass::Complex => {
            let x: f64 = rng.sample(StandardNormal);
            let y: f64 = rng.sample(StandardNormal);
            c64::new(x, y) * std::f64::consts::FRAC_1_SQRT_2
        }
    }
}

fn uniform_entry<R: Rng + ?Sized>(half_width: f64, symmetry: SymmetryClass, rng: &mut R) -> c64 {
    match symmetry {
        SymmetryClass::Real => c(rng.gen_range(-half_width..half_width)),
        SymmetryClass::Complex => {
            let u: f64 = rng.gen();
            let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            c64::from_polar(half_width * u.sqrt(), phase)
        }
    }
}

/// A fixed W×W coupling block. The operator norm is computed once on
/// construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DeterministicRepr", into = "DeterministicRepr")]
pub struct DeterministicBlock {
    dim: usize,
    entries: Vec<c64>,
    norm: f64,
}

#[derive(Clone, Serialize, Deserialize)]
struct DeterministicRepr {
    re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    im: Vec<Vec<f64>>,
}

impl TryFrom<DeterministicRepr> for DeterministicBlock {
    type Error = String;

    fn try_from(repr: DeterministicRepr) -> std::result::Result<Self, String> {
        let dim = repr.re.len();
        if repr.re.iter().any(|row| row.len() != dim) {
            return Err("deterministic block must be square".into());
        }
        if !repr.im.is_empty()
            && (repr.im.len() != dim || repr.im.iter().any(|row| row.len() != dim))
        {
            return Err("imaginary part must match the real part's shape".into());
        }
        let m = Mat::from_fn(dim, dim, |i, j| {
            c64::new(repr.re[i][j], repr.im.get(i).map_or(0.0, |row| row[j]))
        });
        Ok(DeterministicBlock::new(m.as_ref()))
    }
}

impl From<DeterministicBlock> for DeterministicRepr {
    fn from(b: DeterministicBlock) -> Self {
        let m = b.matrix();
        let re = (0..b.dim).map(|i| (0..b.dim).map(|j| m[(i, j)].re).collect()).collect();
        let im = if b.entries.iter().all(|z| z.im == 0.0) {
            Vec::new()
        } else {
            (0..b.dim).map(|i| (0..b.dim).map(|j| m[(i, j)].im).collect()).collect()
        };
        DeterministicRepr { re, im }
    }
}

impl DeterministicBlock {
    pub fn new(m: MatRef<'_, c64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "coupling block must be square");
        let dim = m.nrows();
        let entries = (0..dim).flat_map(|i| (0..dim).map(move |j| m[(i, j)])).collect();
        let norm = linalg::operator_norm(m).unwrap_or(f64::NAN);
        Self { dim, entries, norm }
    }

    pub fn identity(w: usize) -> Self {
        Self::new(Mat::<c64>::identity(w, w).as_ref())
    }

    pub fn zero(w: usize) -> Self {
        Self::new(Mat::<c64>::zeros(w, w).as_ref())
    }

    /// 1×1 coupling `t`.
    pub fn scalar(t: f64) -> Self {
        Self::new(Mat::from_fn(1, 1, |_, _| c(t)).as_ref())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn matrix(&self) -> CMat {
        Mat::from_fn(self.dim, self.dim, |i, j| self.entries[i * self.dim + j])
    }

    fn frobenius_sq(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    fn is_real(&self) -> bool {
        self.entries.iter().all(|z| z.im == 0.0)
    }
}

/// Law of the off-diagonal blocks `T_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OffDiagonalBlockLaw {
    /// Strictly lower triangular, unit Gaussian entries, scaled by `1/√W`.
    GaussianTriangular,
    /// Strictly lower triangular, entries uniform on the interval / disc of
    /// the given radius, scaled by `1/√W`.
    UniformTriangular { half_width: f64 },
    /// The same block at every position.
    Deterministic { block: DeterministicBlock },
}

impl OffDiagonalBlockLaw {
    pub fn identity(w: usize) -> Self {
        OffDiagonalBlockLaw::Deterministic {
            block: DeterministicBlock::identity(w),
        }
    }

    pub fn zero(w: usize) -> Self {
        OffDiagonalBlockLaw::Deterministic {
            block: DeterministicBlock::zero(w),
        }
    }

    pub fn scalar(t: f64) -> Self {
        OffDiagonalBlockLaw::Deterministic {
            block: DeterministicBlock::scalar(t),
        }
    }

    /// `E‖T‖_F²`; `None` only for laws without a second moment.
    pub fn frobenius_second_moment(&self, w: usize, symmetry: SymmetryClass) -> Option<f64> {
        let pairs = (w * w.saturating_sub(1)) as f64 / 2.0;
        match self {
            OffDiagonalBlockLaw::GaussianTriangular => Some(pairs / w as f64),
            OffDiagonalBlockLaw::UniformTriangular { half_width } => {
                let m2 = match symmetry {
                    SymmetryClass::Real => half_width.powi(2) / 3.0,
                    SymmetryClass::Complex => half_width.powi(2) / 2.0,
                };
                Some(pairs * m2 / w as f64)
            }
            OffDiagonalBlockLaw::Deterministic { block } => Some(block.frobenius_sq()),
        }
    }

    /// True when every draw is exactly zero.
    pub fn is_zero(&self, w: usize) -> bool {
        match self {
            OffDiagonalBlockLaw::Deterministic { block } => block.frobenius_sq() == 0.0,
            _ => w == 1,
        }
    }
}

/// Something that produces W×W blocks.
pub trait BlockLaw {
    fn sample_block<R: Rng + ?Sized>(&self, w: usize, symmetry: SymmetryClass, rng: &mut R) -> CMat;

    /// Entry variance σ² governing the limiting spectral edge `2σ`, when it
    /// applies.
    fn edge_variance(&self, symmetry: SymmetryClass) -> Option<f64>;
}

impl BlockLaw for DiagonalBlockLaw {
    fn sample_block<R: Rng + ?Sized>(&self, w: usize, symmetry: SymmetryClass, rng: &mut R) -> CMat {
        let scale = 1.0 / (w as f64).sqrt();
        let mut v = Mat::<c64>::zeros(w, w);
        for i in 0..w {
            v[(i, i)] = c(self.sample_diagonal(rng) * scale);
            for j in (i + 1)..w {
                let a = self.sample_offdiag(symmetry, rng) * scale;
                v[(i, j)] = a;
                v[(j, i)] = a.conj();
            }
        }
        v
    }

    fn edge_variance(&self, symmetry: SymmetryClass) -> Option<f64> {
        self.offdiag_second_moment(symmetry)
    }
}

impl BlockLaw for OffDiagonalBlockLaw {
    fn sample_block<R: Rng + ?Sized>(&self, w: usize, symmetry: SymmetryClass, rng: &mut R) -> CMat {
        let scale = 1.0 / (w as f64).sqrt();
        match self {
            OffDiagonalBlockLaw::GaussianTriangular => {
                let mut t = Mat::<c64>::zeros(w, w);
                for i in 1..w {
                    for j in 0..i {
                        t[(i, j)] = gaussian_entry(symmetry, rng) * scale;
                    }
                }
                t
            }
            OffDiagonalBlockLaw::UniformTriangular { half_width } => {
                let mut t = Mat::<c64>::zeros(w, w);
                for i in 1..w {
                    for j in 0..i {
                        t[(i, j)] = uniform_entry(*half_width, symmetry, rng) * scale;
                    }
                }
                t
            }
            OffDiagonalBlockLaw::Deterministic { block } => block.matrix(),
        }
    }

    fn edge_variance(&self, _symmetry: SymmetryClass) -> Option<f64> {
        None
    }
}

/// Everything needed to draw one matrix of an ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandMatrixSpec {
    #[serde(rename = "W")]
    pub w: usize,
    pub n: usize,
    pub symmetry: SymmetryClass,
    pub diag_law: DiagonalBlockLaw,
    pub offdiag_law: OffDiagonalBlockLaw,
    pub seed: u64,
}

impl BandMatrixSpec {
    /// The Gaussian band ensemble: GOE/GUE-type diagonal blocks and Gaussian
    /// strictly-lower-triangular couplings.
    pub fn gaussian_band(w: usize, n: usize, symmetry: SymmetryClass, seed: u64) -> Self {
        Self {
            w,
            n,
            symmetry,
            diag_law: DiagonalBlockLaw::GaussianWigner,
            offdiag_law: OffDiagonalBlockLaw::GaussianTriangular,
            seed,
        }
    }

    /// Build from the total dimension, which must be a multiple of `W`.
    pub fn with_dimension(
        w: usize,
        dim: usize,
        symmetry: SymmetryClass,
        diag_law: DiagonalBlockLaw,
        offdiag_law: OffDiagonalBlockLaw,
        seed: u64,
    ) -> Result<Self> {
        if w == 0 || w > dim {
            return Err(Error::InvalidSpec(format!("band width {w} incompatible with N = {dim}")));
        }
        if dim % w != 0 {
            return Err(Error::InvalidSpec(format!("N = {dim} is not a multiple of W = {w}")));
        }
        let spec = Self {
            w,
            n: dim / w,
            symmetry,
            diag_law,
            offdiag_law,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        self.n * self.w
    }

    pub fn seeds(&self) -> SeedSequence {
        SeedSequence::new(self.seed)
    }

    pub fn validate(&self) -> Result<()> {
        if self.w == 0 {
            return Err(Error::InvalidSpec("W must be at least 1".into()));
        }
        if self.n == 0 {
            return Err(Error::InvalidSpec("n must be at least 1".into()));
        }
        self.diag_law.validate()?;
        if matches!(self.diag_law, DiagonalBlockLaw::ScalarDensity { .. }) && self.w != 1 {
            return Err(Error::InvalidSpec("scalar diagonal laws require W = 1".into()));
        }
        match &self.offdiag_law {
            OffDiagonalBlockLaw::UniformTriangular { half_width } if !(*half_width > 0.0) => {
                return Err(Error::InvalidSpec("triangular half-width must be positive".into()));
            }
            OffDiagonalBlockLaw::Deterministic { block } => {
                if block.dim() != self.w {
                    return Err(Error::InvalidSpec(format!(
                        "deterministic block is {}×{}, expected W = {}",
                        block.dim(),
                        block.dim(),
                        self.w
                    )));
                }
                if self.symmetry == SymmetryClass::Real && !block.is_real() {
                    return Err(Error::InvalidSpec("complex coupling in the real class".into()));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Mean of `Σ_y E|X_xy|²` over rows, ignoring the two boundary blocks.
    /// This is the second moment of the limiting density of states and
    /// fixes the semicircle radius `2σ`.
    pub fn bulk_row_variance(&self) -> Option<f64> {
        let w = self.w as f64;
        let diag = self.diag_law.diagonal_second_moment()?;
        let upper = self.diag_law.offdiag_second_moment(self.symmetry).unwrap_or(0.0);
        let trace_v2 = diag + (w - 1.0) * upper;
        let coupling = if self.n > 1 {
            self.offdiag_law.frobenius_second_moment(self.w, self.symmetry)?
        } else {
            0.0
        };
        Some((trace_v2 + 2.0 * coupling) / w)
    }

    /// True when every coupling block is identically zero.
    pub fn is_decoupled(&self) -> bool {
        self.n == 1 || self.offdiag_law.is_zero(self.w)
    }
}

/// A sampled matrix in block tridiagonal form.
#[derive(Clone, Debug)]
pub struct BlockBandMatrix {
    spec: BandMatrixSpec,
    diag: Vec<CMat>,
    offdiag: Vec<CMat>,
}

impl BlockBandMatrix {
    /// Assemble from explicit blocks; diagonal blocks must be Hermitian.
    pub fn from_blocks(spec: BandMatrixSpec, diag: Vec<CMat>, offdiag: Vec<CMat>) -> Result<Self> {
        let w = spec.w;
        if diag.len() != spec.n || offdiag.len() + 1 != spec.n {
            return Err(Error::InvalidSpec(format!(
                "expected {} diagonal and {} coupling blocks, got {} and {}",
                spec.n,
                spec.n - 1,
                diag.len(),
                offdiag.len()
            )));
        }
        for b in diag.iter().chain(offdiag.iter()) {
            if b.nrows() != w || b.ncols() != w {
                return Err(Error::InvalidSpec(format!("block is not {w}×{w}")));
            }
        }
        for (j, v) in diag.iter().enumerate() {
            let tol = 1e-12 * v.norm_max().max(1.0);
            if linalg::hermitian_defect(v.as_ref()) > tol {
                return Err(Error::InvalidSpec(format!("diagonal block {} is not Hermitian", j + 1)));
            }
        }
        Ok(Self { spec, diag, offdiag })
    }

    /// Build a `W = 1` (Jacobi) matrix from its diagonal and couplings.
    pub fn jacobi(diagonal: &[f64], couplings: &[f64]) -> Result<Self> {
        let n = diagonal.len();
        let spec = BandMatrixSpec {
            w: 1,
            n,
            symmetry: SymmetryClass::Real,
            diag_law: DiagonalBlockLaw::GaussianWigner,
            offdiag_law: OffDiagonalBlockLaw::GaussianTriangular,
            seed: 0,
        };
        let diag = diagonal.iter().map(|&d| Mat::from_fn(1, 1, |_, _| c(d))).collect();
        let offdiag = couplings.iter().map(|&t| Mat::from_fn(1, 1, |_, _| c(t))).collect();
        Self::from_blocks(spec, diag, offdiag)
    }

    pub fn spec(&self) -> &BandMatrixSpec {
        &self.spec
    }

    pub fn block_width(&self) -> usize {
        self.spec.w
    }

    pub fn blocks(&self) -> usize {
        self.spec.n
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    /// `V_j`, 1-based.
    pub fn v(&self, j: usize) -> MatRef<'_, c64> {
        self.diag[j - 1].as_ref()
    }

    /// `T_j`, 1-based, coupling block `j` to block `j + 1`.
    pub fn t(&self, j: usize) -> MatRef<'_, c64> {
        self.offdiag[j - 1].as_ref()
    }

    /// The same matrix with block order reversed: `V_n..V_1`, `T_{n-1}†..T_1†`.
    pub fn reversed(&self) -> Self {
        Self {
            spec: self.spec.clone(),
            diag: self.diag.iter().rev().cloned().collect(),
            offdiag: self.offdiag.iter().rev().map(|t| t.adjoint().to_owned()).collect(),
        }
    }

    /// The leading `k`-block principal submatrix.
    pub fn truncated(&self, k: usize) -> Self {
        assert!((1..=self.spec.n).contains(&k));
        let mut spec = self.spec.clone();
        spec.n = k;
        Self {
            spec,
            diag: self.diag[..k].to_vec(),
            offdiag: self.offdiag[..k - 1].to_vec(),
        }
    }

    /// The trailing principal submatrix starting at block `first`.
    pub fn tail(&self, first: usize) -> Self {
        assert!((1..=self.spec.n).contains(&first));
        let mut spec = self.spec.clone();
        spec.n = self.spec.n - first + 1;
        Self {
            spec,
            diag: self.diag[first - 1..].to_vec(),
            offdiag: self.offdiag[first - 1..].to_vec(),
        }
    }

    /// Dense N×N expansion.
    pub fn to_dense(&self) -> CMat {
        let w = self.spec.w;
        let mut m = Mat::<c64>::zeros(self.dim(), self.dim());
        for (j, v) in self.diag.iter().enumerate() {
            m.as_mut().submatrix_mut(j * w, j * w, w, w).copy_from(v);
        }
        for (j, t) in self.offdiag.iter().enumerate() {
            m.as_mut().submatrix_mut(j * w, (j + 1) * w, w, w).copy_from(t);
            m.as_mut().submatrix_mut((j + 1) * w, j * w, w, w).copy_from(t.adjoint());
        }
        m
    }
}

/// Draw a matrix with arbitrary block laws. `V_j` uses block `2j` of the
/// stream and `T_j` block `2j + 1`, so blocks are independent and each is
/// reproducible on its own.
pub fn sample_block_band(spec: &BandMatrixSpec, stream: &Stream) -> Result<BlockBandMatrix> {
    spec.validate()?;
    let (w, n) = (spec.w, spec.n);
    let diag = (0..n)
        .map(|j| {
            let mut rng = stream.block(2 * j as u64);
            spec.diag_law.sample_block(w, spec.symmetry, &mut rng)
        })
        .collect();
    let offdiag = (0..n.saturating_sub(1))
        .map(|j| {
            let mut rng = stream.block(2 * j as u64 + 1);
            spec.offdiag_law.sample_block(w, spec.symmetry, &mut rng)
        })
        .collect();
    Ok(BlockBandMatrix {
        spec: spec.clone(),
        diag,
        offdiag,
    })
}

/// Draw from the Gaussian band ensemble.
pub fn sample_gaussian_band(spec: &BandMatrixSpec, stream: &Stream) -> Result<BlockBandMatrix> {
    if spec.diag_law != DiagonalBlockLaw::GaussianWigner
        || spec.offdiag_law != OffDiagonalBlockLaw::GaussianTriangular
    {
        return Err(Error::InvalidSpec(
            "Gaussian band sampling needs GaussianWigner / GaussianTriangular laws".into(),
        ));
    }
    sample_block_band(spec, stream)
}

/// `ρ_W(V1) / ρ_W(V2)` for the law of a Wigner diagonal block.
///
/// Returns 0 when `V1` lies outside the support and
/// [`Error::DegenerateDensity`] when `V2` does.
pub fn density_ratio(
    law: &DiagonalBlockLaw,
    symmetry: SymmetryClass,
    v1: MatRef<'_, c64>,
    v2: MatRef<'_, c64>,
) -> Result<f64> {
    let w = v1.nrows();
    if v2.nrows() != w || v1.ncols() != w || v2.ncols() != w {
        return Err(Error::InvalidArgument("blocks must have equal square shape".into()));
    }
    let log2 = log_block_density(law, symmetry, v2).ok_or(Error::DegenerateDensity)?;
    let Some(log1) = log_block_density(law, symmetry, v1) else {
        return Ok(0.0);
    };
    Ok((log1 - log2).exp())
}

/// Closed form for the complex Gaussian Wigner law:
/// `ρ(V) ∝ exp(-(W/2) tr V²)`.
pub fn gaussian_trace_ratio(v1: MatRef<'_, c64>, v2: MatRef<'_, c64>) -> f64 {
    let w = v1.nrows() as f64;
    let tr_sq = |v: MatRef<'_, c64>| -> f64 { (v * v).diagonal().column_vector().iter().map(|z| z.re).sum() };
    (-(w / 2.0) * (tr_sq(v1) - tr_sq(v2))).exp()
}

fn log_block_density(law: &DiagonalBlockLaw, symmetry: SymmetryClass, v: MatRef<'_, c64>) -> Option<f64> {
    let w = v.nrows();
    let root = (w as f64).sqrt();
    let mut total = 0.0;
    for i in 0..w {
        if v[(i, i)].im != 0.0 {
            return None;
        }
        total += law.log_diagonal_density(v[(i, i)].re * root)?;
        for j in (i + 1)..w {
            if v[(j, i)] != v[(i, j)].conj() {
                return None;
            }
            total += law.log_offdiag_density(v[(i, j)] * root, symmetry)?;
        }
    }
    Some(total)
}

/// Empirical distribution of the operator norm of sampled blocks.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormSummary {
    pub samples: usize,
    pub mean: f64,
    pub stderr: f64,
    pub min: f64,
    pub median: f64,
    pub max: f64,
    /// `2σ` when the law has a Wigner edge.
    pub reference: Option<f64>,
}

/// Operator norms of `samples` independent blocks from `law`.
pub fn operator_norm_statistic<L: BlockLaw>(
    law: &L,
    w: usize,
    symmetry: SymmetryClass,
    samples: usize,
    seeds: &SeedSequence,
) -> Result<NormSummary> {
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let mut norms = Vec::with_capacity(samples);
    for k in 0..samples {
        let mut rng = seeds.sample(k as u64).block(0);
        let block = law.sample_block(w, symmetry, &mut rng);
        norms.push(linalg::operator_norm(block.as_ref())?);
    }
    let stats = crate::stats::Summary::of(&norms);
    norms.sort_by(f64::total_cmp);
    Ok(NormSummary {
        samples,
        mean: stats.mean,
        stderr: stats.stderr,
        min: norms[0],
        median: crate::stats::quantile_sorted(&norms, 0.5),
        max: norms[samples - 1],
        reference: law.edge_variance(symmetry).map(|s2| 2.0 * s2.sqrt()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(w: usize, n: usize, symmetry: SymmetryClass) -> BlockBandMatrix {
        let spec = BandMatrixSpec::gaussian_band(w, n, symmetry, 11);
        sample_gaussian_band(&spec, &spec.seeds().sample(0)).unwrap()
    }

    #[test]
    fn width_one_gaussian_band_is_diagonal() {
        let m = small(1, 3, SymmetryClass::Complex).to_dense();
        for i in 0..3 {
            assert_eq!(m[(i, i)].im, 0.0);
            for j in 0..3 {
                if i != j {
                    assert_eq!(m[(i, j)], c(0.0));
                }
            }
        }
    }

    #[test]
    fn dense_is_hermitian_and_banded() {
        for sym in [SymmetryClass::Real, SymmetryClass::Complex] {
            let w = 4;
            let m = small(w, 5, sym).to_dense();
            assert_eq!(linalg::hermitian_defect(m.as_ref()), 0.0);
            for x in 0..m.nrows() {
                for y in 0..m.ncols() {
                    let gap = x.abs_diff(y);
                    if gap >= w {
                        assert_eq!(m[(x, y)], c(0.0), "({x},{y})");
                    } else {
                        assert_ne!(m[(x, y)], c(0.0), "({x},{y})");
                    }
                    if sym == SymmetryClass::Real {
                        assert_eq!(m[(x, y)].im, 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn to_dense_layouts() {
        let one = BlockBandMatrix::jacobi(&[3.5], &[]).unwrap();
        assert_eq!(one.to_dense()[(0, 0)], c(3.5));
        let two = BlockBandMatrix::jacobi(&[0.0, 0.0], &[1.0]).unwrap().to_dense();
        assert_eq!(two[(0, 1)], c(1.0));
        assert_eq!(two[(1, 0)], c(1.0));
        assert_eq!(two[(0, 0)], c(0.0));
        assert_eq!(two[(1, 1)], c(0.0));
    }

    #[test]
    fn deterministic_identity_coupling() {
        let spec = BandMatrixSpec {
            w: 3,
            n: 4,
            symmetry: SymmetryClass::Real,
            diag_law: DiagonalBlockLaw::GaussianWigner,
            offdiag_law: OffDiagonalBlockLaw::identity(3),
            seed: 2,
        };
        let m = sample_block_band(&spec, &spec.seeds().sample(0)).unwrap();
        for j in 1..4 {
            assert_eq!(m.t(j).to_owned(), Mat::<c64>::identity(3, 3));
        }
        let norm = operator_norm_statistic(&spec.offdiag_law, 3, SymmetryClass::Real, 3, &spec.seeds()).unwrap();
        assert!((norm.mean - 1.0).abs() < 1e-14 && norm.max == norm.min);
        assert!(norm.reference.is_none());
    }

    #[test]
    fn jacobi_case_with_uniform_diagonal() {
        let spec = BandMatrixSpec {
            w: 1,
            n: 6,
            symmetry: SymmetryClass::Real,
            diag_law: DiagonalBlockLaw::ScalarDensity {
                law: ScalarLaw::Uniform { a: -1.0, b: 1.0 },
            },
            offdiag_law: OffDiagonalBlockLaw::scalar(1.0),
            seed: 5,
        };
        let m = sample_block_band(&spec, &spec.seeds().sample(3)).unwrap().to_dense();
        for i in 0..6 {
            assert!(m[(i, i)].re.abs() < 1.0);
            if i + 1 < 6 {
                assert_eq!(m[(i, i + 1)], c(1.0));
            }
        }
    }

    #[test]
    fn sampling_is_reproducible_per_sample() {
        let spec = BandMatrixSpec::gaussian_band(3, 4, SymmetryClass::Complex, 99);
        let a = sample_block_band(&spec, &spec.seeds().sample(17)).unwrap().to_dense();
        let b = sample_block_band(&spec, &spec.seeds().sample(17)).unwrap().to_dense();
        let c2 = sample_block_band(&spec, &spec.seeds().sample(18)).unwrap().to_dense();
        assert_eq!(a, b);
        assert_ne!(a, c2);
    }

    #[test]
    fn triangular_laws_have_zero_diagonal_and_upper_part() {
        let mut rng = SeedSequence::new(1).sample(0).block(0);
        for law in [
            OffDiagonalBlockLaw::GaussianTriangular,
            OffDiagonalBlockLaw::UniformTriangular { half_width: 2.0 },
        ] {
            let t = law.sample_block(5, SymmetryClass::Complex, &mut rng);
            for i in 0..5 {
                for j in i..5 {
                    assert_eq!(t[(i, j)], c(0.0));
                }
            }
        }
    }

    #[test]
    fn spec_validation() {
        let law = || DiagonalBlockLaw::GaussianWigner;
        let off = || OffDiagonalBlockLaw::GaussianTriangular;
        assert!(BandMatrixSpec::with_dimension(4, 10, SymmetryClass::Real, law(), off(), 0).is_err());
        assert!(BandMatrixSpec::with_dimension(8, 4, SymmetryClass::Real, law(), off(), 0).is_err());
        let ok = BandMatrixSpec::with_dimension(4, 12, SymmetryClass::Real, law(), off(), 0).unwrap();
        assert_eq!(ok.n, 3);
        let mut bad = ok.clone();
        bad.diag_law = DiagonalBlockLaw::HolderWigner { alpha: 1.5 };
        assert!(bad.validate().is_err());
        let mut bad = ok.clone();
        bad.offdiag_law = OffDiagonalBlockLaw::identity(2);
        assert!(bad.validate().is_err());
        let mut bad = ok;
        bad.diag_law = DiagonalBlockLaw::ScalarDensity { law: ScalarLaw::Cauchy };
        assert!(bad.validate().is_err());
        assert!(sample_gaussian_band(&bad, &bad.seeds().sample(0)).is_err());
    }

    #[test]
    fn gaussian_band_row_variance() {
        let spec = BandMatrixSpec::gaussian_band(16, 64, SymmetryClass::Complex, 0);
        assert!((spec.bulk_row_variance().unwrap() - 31.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let spec = BandMatrixSpec {
            w: 2,
            n: 3,
            symmetry: SymmetryClass::Complex,
            diag_law: DiagonalBlockLaw::BoxWigner {
                diagonal_half_width: 1.0,
                offdiag_half_width: 0.5,
            },
            offdiag_law: OffDiagonalBlockLaw::identity(2),
            seed: 42,
        };
        let text = serde_json::to_string(&spec).unwrap();
        assert!(text.contains("\"W\":2"));
        let back: BandMatrixSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
        if let OffDiagonalBlockLaw::Deterministic { block } = back.offdiag_law {
            assert!((block.norm() - 1.0).abs() < 1e-14);
        }
    }

    // --- density ratios -------------------------------------------------

    fn scalar_block(x: f64) -> CMat {
        Mat::from_fn(1, 1, |_, _| c(x))
    }

    #[test]
    fn density_ratio_identical_arguments() {
        let mut rng = SeedSequence::new(3).sample(0).block(0);
        let v = DiagonalBlockLaw::GaussianWigner.sample_block(4, SymmetryClass::Complex, &mut rng);
        let r = density_ratio(&DiagonalBlockLaw::GaussianWigner, SymmetryClass::Complex, v.as_ref(), v.as_ref());
        assert_eq!(r.unwrap(), 1.0);
    }

    #[test]
    fn gaussian_scalar_ratio() {
        // unit Gaussian d with V = d/√W at W = 1: ratio = exp(-(0.1² - 0.2²)/2)
        let r = density_ratio(
            &DiagonalBlockLaw::GaussianWigner,
            SymmetryClass::Complex,
            scalar_block(0.1).as_ref(),
            scalar_block(0.2).as_ref(),
        )
        .unwrap();
        assert!((r - (0.015f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn complex_gaussian_ratio_matches_trace_formula() {
        let mut rng = SeedSequence::new(4).sample(0).block(0);
        for w in [1, 2, 5] {
            let v1 = DiagonalBlockLaw::GaussianWigner.sample_block(w, SymmetryClass::Complex, &mut rng);
            let v2 = DiagonalBlockLaw::GaussianWigner.sample_block(w, SymmetryClass::Complex, &mut rng);
            let entrywise =
                density_ratio(&DiagonalBlockLaw::GaussianWigner, SymmetryClass::Complex, v1.as_ref(), v2.as_ref())
                    .unwrap();
            let closed = gaussian_trace_ratio(v1.as_ref(), v2.as_ref());
            assert!((entrywise / closed - 1.0).abs() < 1e-10, "{entrywise} {closed}");
        }
    }

    #[test]
    fn box_ratio_inside_and_outside() {
        let law = DiagonalBlockLaw::BoxWigner {
            diagonal_half_width: 1.0,
            offdiag_half_width: 1.0,
        };
        let s = SymmetryClass::Real;
        let inside1 = scalar_block(0.3);
        let inside2 = scalar_block(-0.9);
        let outside = scalar_block(1.5);
        assert_eq!(density_ratio(&law, s, inside1.as_ref(), inside2.as_ref()).unwrap(), 1.0);
        assert_eq!(density_ratio(&law, s, outside.as_ref(), inside2.as_ref()).unwrap(), 0.0);
        assert!(matches!(
            density_ratio(&law, s, inside1.as_ref(), outside.as_ref()),
            Err(Error::DegenerateDensity)
        ));
    }

    #[test]
    fn real_class_rejects_imaginary_entries() {
        let v = Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => c64::new(0.1, 0.2),
            (1, 0) => c64::new(0.1, -0.2),
            _ => c(0.0),
        });
        let z = Mat::<c64>::zeros(2, 2);
        let law = DiagonalBlockLaw::GaussianWigner;
        assert_eq!(density_ratio(&law, SymmetryClass::Real, v.as_ref(), z.as_ref()).unwrap(), 0.0);
    }

    #[test]
    fn holder_normalization_matches_gamma() {
        for alpha in [0.3, 0.5, 0.8, 1.0] {
            let h = HolderDensity::new(alpha).unwrap();
            let exact = alpha / (2.0 * libm::tgamma(1.0 / alpha));
            assert!((h.normalization() / exact - 1.0).abs() < 1e-9, "{alpha}");
        }
    }

    #[test]
    fn scalar_laws_integrate_to_one() {
        // composite Simpson on a wide window; the Cauchy tail beyond ±L is 2/(πL)
        let simpson = |f: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize| {
            let h = (b - a) / n as f64;
            let mut s = f(a) + f(b);
            for k in 1..n {
                s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
            }
            s * h / 3.0
        };
        let g = simpson(&|x| ScalarLaw::Gaussian.density(x), -12.0, 12.0, 4000);
        assert!((g - 1.0).abs() < 1e-10);
        let l = 1e4;
        let cauchy = simpson(&|x| ScalarLaw::Cauchy.density(x), -l, l, 2_000_000)
            + 2.0 / (std::f64::consts::PI * l);
        assert!((cauchy - 1.0).abs() < 1e-6, "{cauchy}");
        let u = simpson(&|x| ScalarLaw::Uniform { a: -1.0, b: 3.0 }.density(x), -1.0, 3.0, 100);
        assert!((u - 1.0).abs() < 1e-12);
        let h = HolderDensity::new(0.5).unwrap();
        // x = u² removes the cusp at the origin
        let hol = 2.0 * simpson(&|u| 2.0 * u * h.density(u * u), 0.0, 60.0, 200_000);
        assert!((hol - 1.0).abs() < 1e-6, "{hol}");
    }

    #[test]
    fn half_normal_mean_for_width_one() {
        // ‖V‖ = |d| for W = 1, mean √(2/π)
        let norms = operator_norm_statistic(
            &DiagonalBlockLaw::GaussianWigner,
            1,
            SymmetryClass::Real,
            40_000,
            &SeedSequence::new(8),
        )
        .unwrap();
        let exact = (2.0 / std::f64::consts::PI).sqrt();
        assert!((norms.mean - exact).abs() < 3.0 * norms.stderr, "{norms:?}");
        assert_eq!(norms.reference, Some(2.0));
    }
}
