//! Resolvent of a block tridiagonal matrix by Schur-complement chains.
//!
//! With `G_k` the resolvent of the leading `k`-block truncation, the
//! matrices `Γ_k = G_k(k,k)⁻¹` obey
//!
//! ```text
//! Γ_1 = V_1 - λ,    Γ_k = V_k - λ - T_{k-1}† Γ_{k-1}⁻¹ T_{k-1}.
//! ```
//!
//! The mirror chain `Γ̂_k` runs from block `n` down and inverts to the corner
//! block of the trailing truncation. Together they give every block of the
//! full resolvent:
//!
//! ```text
//! G(j,j) = (Γ_j - T_j Γ̂_{j+1}⁻¹ T_j†)⁻¹
//! G(i,j) = (-1)^{j-i} Γ_i⁻¹T_i ⋯ Γ_{j-1}⁻¹T_{j-1} G(j,j),   i ≤ j.
//! ```
//!
//! Each `Γ_k` is factorized once (Bunch–Kaufman) and reused; no inverse is
//! formed except when a caller asks for a full block.

use faer::{c64, Mat, MatRef};
use serde::Serialize;

use crate::ensemble::BlockBandMatrix;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, HermitianFactor};

/// Condition estimate above which a block counts as singular.
pub const DEFAULT_MAX_CONDITION: f64 = 1e12;

/// Largest dimension the dense oracle accepts by default.
pub const DEFAULT_ORACLE_CAP: usize = 2048;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainDirection {
    Forward,
    Backward,
}

/// `Γ_1..Γ_n` (forward) or `Γ̂_1..Γ̂_n` (backward) at a fixed real `λ`.
/// Position `k - 1` always holds the matrix attached to block `k`.
pub struct GammaChain {
    lambda: f64,
    direction: ChainDirection,
    gamma: Vec<CMat>,
    factors: Vec<HermitianFactor>,
}

impl GammaChain {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn direction(&self) -> ChainDirection {
        self.direction
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }

    /// The chain matrix at block `k` (1-based).
    pub fn gamma(&self, k: usize) -> MatRef<'_, c64> {
        self.gamma[k - 1].as_ref()
    }

    /// Condition estimates, one per block.
    pub fn conditions(&self) -> Vec<f64> {
        self.factors.iter().map(HermitianFactor::condition).collect()
    }

    pub fn max_condition(&self) -> f64 {
        self.factors.iter().map(HermitianFactor::condition).fold(0.0, f64::max)
    }

    /// Inverse of the chain matrix at block `k`: for the forward chain this
    /// is the `(k,k)` block of the resolvent of the leading `k`-block
    /// truncation, for the backward chain the corner block of the trailing
    /// truncation starting at `k`.
    pub fn inverse(&self, k: usize) -> CMat {
        self.factors[k - 1].inverse()
    }

    fn factor(&self, k: usize) -> &HermitianFactor {
        &self.factors[k - 1]
    }
}

/// One step `V - λ - B† A⁻¹ B` of either chain.
fn chain_step(
    v: MatRef<'_, c64>,
    lambda: f64,
    prev: &HermitianFactor,
    prev_gamma: MatRef<'_, c64>,
    coupling: MatRef<'_, c64>,
) -> CMat {
    if v.nrows() == 1 {
        // scalar recursion γ = v - λ - |t|²/γ_prev
        let t = coupling[(0, 0)];
        let g = v[(0, 0)].re - lambda - t.norm_sqr() / prev_gamma[(0, 0)].re;
        return Mat::from_fn(1, 1, |_, _| c(g));
    }
    let solved = prev.solve(coupling);
    let mut next = linalg::shifted(v, lambda) - coupling.adjoint() * &solved;
    linalg::symmetrize(&mut next);
    next
}

fn build_chain(
    m: &BlockBandMatrix,
    lambda: f64,
    direction: ChainDirection,
    max_condition: f64,
) -> Result<GammaChain> {
    let n = m.blocks();
    let order: Vec<usize> = match direction {
        ChainDirection::Forward => (1..=n).collect(),
        ChainDirection::Backward => (1..=n).rev().collect(),
    };
    let mut gamma: Vec<Option<CMat>> = (0..n).map(|_| None).collect();
    let mut factors: Vec<Option<HermitianFactor>> = (0..n).map(|_| None).collect();
    let mut prev: Option<usize> = None;
    for &k in &order {
        let g = match prev {
            None => linalg::shifted(m.v(k), lambda),
            Some(p) => {
                // forward: coupling from block k-1 is T_{k-1}; backward: the
                // coupling seen from block k+1 is T_k†.
                let coupling = match direction {
                    ChainDirection::Forward => m.t(p).to_owned(),
                    ChainDirection::Backward => m.t(k).adjoint().to_owned(),
                };
                chain_step(
                    m.v(k),
                    lambda,
                    factors[p - 1].as_ref().unwrap(),
                    gamma[p - 1].as_ref().unwrap().as_ref(),
                    coupling.as_ref(),
                )
            }
        };
        let f = HermitianFactor::new(g.as_ref(), max_condition, k)?;
        gamma[k - 1] = Some(g);
        factors[k - 1] = Some(f);
        prev = Some(k);
    }
    Ok(GammaChain {
        lambda,
        direction,
        gamma: gamma.into_iter().map(Option::unwrap).collect(),
        factors: factors.into_iter().map(Option::unwrap).collect(),
    })
}

/// `Γ_1..Γ_n`.
pub fn forward_gamma_chain(m: &BlockBandMatrix, lambda: f64) -> Result<GammaChain> {
    build_chain(m, lambda, ChainDirection::Forward, DEFAULT_MAX_CONDITION)
}

/// `Γ̂_n..Γ̂_1`, the same recursion run from the last block.
pub fn backward_ghat_chain(m: &BlockBandMatrix, lambda: f64) -> Result<GammaChain> {
    build_chain(m, lambda, ChainDirection::Backward, DEFAULT_MAX_CONDITION)
}

/// A single resolvent entry with its conditioning diagnostic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResolventEntry {
    pub value: c64,
    /// 1-based site indices.
    pub x: usize,
    pub y: usize,
    pub lambda: f64,
    pub max_condition: f64,
}

/// Both chains plus the factorized inverse diagonal blocks, enough to read
/// off any block or entry of `(M - λ)⁻¹`.
pub struct Resolvent<'a> {
    matrix: &'a BlockBandMatrix,
    forward: GammaChain,
    backward: GammaChain,
    /// Factorizations of `G(j,j)⁻¹ = Γ_j - T_j Γ̂_{j+1}⁻¹ T_j†`.
    schur: Vec<HermitianFactor>,
}

impl<'a> Resolvent<'a> {
    pub fn new(matrix: &'a BlockBandMatrix, lambda: f64) -> Result<Self> {
        Self::with_threshold(matrix, lambda, DEFAULT_MAX_CONDITION)
    }

    pub fn with_threshold(matrix: &'a BlockBandMatrix, lambda: f64, max_condition: f64) -> Result<Self> {
        let forward = build_chain(matrix, lambda, ChainDirection::Forward, max_condition)?;
        let backward = build_chain(matrix, lambda, ChainDirection::Backward, max_condition)?;
        let n = matrix.blocks();
        let mut schur = Vec::with_capacity(n);
        for j in 1..=n {
            let f = if j == n {
                HermitianFactor::new(forward.gamma(n), max_condition, n)?
            } else {
                let t = matrix.t(j);
                let solved = backward.factor(j + 1).solve(t.adjoint().to_owned().as_ref());
                let mut s = forward.gamma(j).to_owned() - t * &solved;
                linalg::symmetrize(&mut s);
                HermitianFactor::new(s.as_ref(), max_condition, j)?
            };
            schur.push(f);
        }
        Ok(Self {
            matrix,
            forward,
            backward,
            schur,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.forward.lambda()
    }

    pub fn forward(&self) -> &GammaChain {
        &self.forward
    }

    pub fn backward(&self) -> &GammaChain {
        &self.backward
    }

    pub fn max_condition(&self) -> f64 {
        self.schur
            .iter()
            .map(HermitianFactor::condition)
            .fold(self.forward.max_condition().max(self.backward.max_condition()), f64::max)
    }

    fn check_block(&self, j: usize) -> Result<()> {
        if (1..=self.matrix.blocks()).contains(&j) {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "block index {j} outside 1..={}",
                self.matrix.blocks()
            )))
        }
    }

    /// `G(j,j)`.
    pub fn diag_block(&self, j: usize) -> Result<CMat> {
        self.check_block(j)?;
        Ok(self.schur[j - 1].inverse())
    }

    /// `G(i,j)` for any pair of blocks.
    pub fn offdiag_block(&self, i: usize, j: usize) -> Result<CMat> {
        self.check_block(i)?;
        self.check_block(j)?;
        if i > j {
            return Ok(self.offdiag_block(j, i)?.adjoint().to_owned());
        }
        if i == j {
            return self.diag_block(i);
        }
        let w = self.matrix.block_width();
        let mut product = Mat::<c64>::identity(w, w);
        for k in i..j {
            let left = self.forward.factor(k).solve_right(product.as_ref());
            product = left * self.matrix.t(k);
        }
        let mut g = self.schur[j - 1].solve_right(product.as_ref());
        if (j - i) % 2 == 1 {
            g = -g;
        }
        Ok(g)
    }

    /// `⟨e_x, (M - λ)⁻¹ e_y⟩` with 1-based sites.
    pub fn entry(&self, x: usize, y: usize) -> Result<ResolventEntry> {
        let dim = self.matrix.dim();
        if !(1..=dim).contains(&x) || !(1..=dim).contains(&y) {
            return Err(Error::InvalidArgument(format!("site outside 1..={dim}")));
        }
        let value = if x <= y {
            self.row(x, y)?[y - x]
        } else {
            self.row(y, x)?[x - y].conj()
        };
        Ok(ResolventEntry {
            value,
            x,
            y,
            lambda: self.lambda(),
            max_condition: self.max_condition(),
        })
    }

    /// `G(x, y)` for `y = x, x+1, ..., last` (1-based, `x ≤ last`), propagating
    /// a single row vector through the product formula at `O(W²)` per block.
    pub fn row(&self, x: usize, last: usize) -> Result<Vec<c64>> {
        let w = self.matrix.block_width();
        let dim = self.matrix.dim();
        if !(1..=dim).contains(&x) || !(x..=dim).contains(&last) {
            return Err(Error::InvalidArgument(format!("row range {x}..={last} invalid")));
        }
        let first_block = (x - 1) / w + 1;
        let last_block = (last - 1) / w + 1;
        let mut u = Mat::<c64>::zeros(1, w);
        u[(0, (x - 1) % w)] = c(1.0);
        let mut out = Vec::with_capacity(last - x + 1);
        for k in first_block..=last_block {
            let g_row = self.schur[k - 1].solve_right(u.as_ref());
            let base = (k - 1) * w;
            for col in 0..w {
                let y = base + col + 1;
                if y >= x && y <= last {
                    out.push(g_row[(0, col)]);
                }
            }
            if k < last_block {
                let left = self.forward.factor(k).solve_right(u.as_ref());
                u = -(left * self.matrix.t(k));
            }
        }
        Ok(out)
    }
}

pub fn diag_block(m: &BlockBandMatrix, lambda: f64, j: usize) -> Result<CMat> {
    Resolvent::new(m, lambda)?.diag_block(j)
}

pub fn offdiag_block(m: &BlockBandMatrix, lambda: f64, i: usize, j: usize) -> Result<CMat> {
    Resolvent::new(m, lambda)?.offdiag_block(i, j)
}

pub fn entry(m: &BlockBandMatrix, lambda: f64, x: usize, y: usize) -> Result<ResolventEntry> {
    Resolvent::new(m, lambda)?.entry(x, y)
}

/// Full inverse of `to_dense(M) - λ` by a dense Bunch–Kaufman solve. For
/// verification only.
pub fn dense_resolvent_oracle(m: &BlockBandMatrix, lambda: f64) -> Result<CMat> {
    dense_resolvent_oracle_capped(m, lambda, DEFAULT_ORACLE_CAP)
}

pub fn dense_resolvent_oracle_capped(m: &BlockBandMatrix, lambda: f64, cap: usize) -> Result<CMat> {
    if m.dim() > cap {
        return Err(Error::InvalidArgument(format!(
            "dense oracle limited to N ≤ {cap}, got {}",
            m.dim()
        )));
    }
    dense_inverse(m.to_dense().as_ref(), lambda)
}

/// `(a - λ)⁻¹` for a dense Hermitian `a`.
pub fn dense_inverse(a: MatRef<'_, c64>, lambda: f64) -> Result<CMat> {
    let shifted = linalg::shifted(a, lambda);
    let f = HermitianFactor::new(shifted.as_ref(), DEFAULT_MAX_CONDITION, 0)
        .map_err(|_| Error::SingularShift)?;
    Ok(f.inverse())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{sample_block_band, BandMatrixSpec, DiagonalBlockLaw, OffDiagonalBlockLaw, SymmetryClass};

    fn rel_err(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> f64 {
        (a - b).norm_max() / b.norm_max().max(1e-300)
    }

    fn two_site() -> BlockBandMatrix {
        BlockBandMatrix::jacobi(&[0.0, 0.0], &[1.0]).unwrap()
    }

    fn random(w: usize, n: usize, sample: u64) -> BlockBandMatrix {
        let spec = BandMatrixSpec::gaussian_band(w, n, SymmetryClass::Complex, 1234);
        sample_block_band(&spec, &spec.seeds().sample(sample)).unwrap()
    }

    #[test]
    fn single_scalar_block() {
        let m = BlockBandMatrix::jacobi(&[2.0], &[]).unwrap();
        let chain = forward_gamma_chain(&m, 0.0).unwrap();
        assert_eq!(chain.gamma(1)[(0, 0)], c(2.0));
        assert_eq!(entry(&m, 0.0, 1, 1).unwrap().value, c(0.5));
        let back = backward_ghat_chain(&m, 0.0).unwrap();
        assert_eq!(back.gamma(1)[(0, 0)], c(2.0));
    }

    #[test]
    fn two_site_chain_and_blocks() {
        // dense: [[-2, 1], [1, -2]]⁻¹ = [[-2/3, -1/3], [-1/3, -2/3]]
        let m = two_site();
        let chain = forward_gamma_chain(&m, 2.0).unwrap();
        assert_eq!(chain.gamma(1)[(0, 0)], c(-2.0));
        assert_eq!(chain.gamma(2)[(0, 0)], c(-1.5));
        let r = Resolvent::new(&m, 2.0).unwrap();
        let g11 = r.diag_block(1).unwrap()[(0, 0)];
        let g22 = r.diag_block(2).unwrap()[(0, 0)];
        let g12 = r.offdiag_block(1, 2).unwrap()[(0, 0)];
        let g21 = r.offdiag_block(2, 1).unwrap()[(0, 0)];
        for (got, want) in [(g11, -2.0 / 3.0), (g22, -2.0 / 3.0), (g12, -1.0 / 3.0), (g21, -1.0 / 3.0)] {
            assert!((got - c(want)).norm() < 1e-15, "{got} vs {want}");
        }
        let oracle = dense_resolvent_oracle(&m, 2.0).unwrap();
        assert!((oracle[(0, 0)] - c(-2.0 / 3.0)).norm() < 1e-15);
        assert!((oracle[(0, 1)] - c(-1.0 / 3.0)).norm() < 1e-15);
    }

    #[test]
    fn oracle_of_identity_is_identity() {
        let m = BlockBandMatrix::jacobi(&[1.0; 4], &[0.0; 3]).unwrap();
        let inv = dense_resolvent_oracle(&m, 0.0).unwrap();
        assert_eq!(inv, Mat::<c64>::identity(4, 4));
    }

    #[test]
    fn oracle_residual() {
        let m = random(3, 7, 0);
        let inv = dense_resolvent_oracle(&m, 0.3).unwrap();
        let shifted = linalg::shifted(m.to_dense().as_ref(), 0.3);
        let resid = &inv * &shifted - Mat::<c64>::identity(21, 21);
        assert!(resid.norm_max() < 1e-10);
    }

    #[test]
    fn oracle_rejects_singular_shift_and_large_input() {
        let m = two_site();
        assert!(matches!(dense_resolvent_oracle(&m, 1.0), Err(Error::SingularShift)));
        let big = random(1, 10, 0);
        assert!(dense_resolvent_oracle_capped(&big, 0.0, 4).is_err());
    }

    #[test]
    fn forward_chain_inverts_to_truncated_corner() {
        let m = random(4, 10, 1);
        let chain = forward_gamma_chain(&m, 0.2).unwrap();
        for k in 1..=10 {
            let trunc = m.truncated(k);
            let dense = dense_resolvent_oracle(&trunc, 0.2).unwrap();
            let corner = dense.as_ref().submatrix((k - 1) * 4, (k - 1) * 4, 4, 4);
            assert!(rel_err(chain.inverse(k).as_ref(), corner) < 1e-8, "k = {k}");
            let g = chain.gamma(k);
            assert!(linalg::hermitian_defect(g) <= 1e-10 * g.norm_max());
        }
    }

    #[test]
    fn backward_chain_inverts_to_trailing_corner() {
        let m = random(3, 8, 2);
        let back = backward_ghat_chain(&m, -0.4).unwrap();
        for k in 1..=8 {
            let tail = m.tail(k);
            let dense = dense_resolvent_oracle(&tail, -0.4).unwrap();
            let corner = dense.as_ref().submatrix(0, 0, 3, 3);
            assert!(rel_err(back.inverse(k).as_ref(), corner) < 1e-8, "k = {k}");
        }
        let one = m.truncated(1);
        let b1 = backward_ghat_chain(&one, -0.4).unwrap();
        assert_eq!(b1.gamma(1).to_owned(), linalg::shifted(one.v(1), -0.4));
    }

    #[test]
    fn backward_chain_is_forward_chain_of_reversal() {
        let m = random(3, 6, 3);
        let back = backward_ghat_chain(&m, 0.1).unwrap();
        let fwd_rev = forward_gamma_chain(&m.reversed(), 0.1).unwrap();
        for k in 1..=6 {
            let a = back.gamma(k);
            let b = fwd_rev.gamma(7 - k);
            assert!(rel_err(a, b) < 1e-12);
        }
    }

    #[test]
    fn every_block_matches_oracle() {
        let m = random(4, 10, 4);
        let lambda = 0.7;
        let r = Resolvent::new(&m, lambda).unwrap();
        let dense = dense_resolvent_oracle(&m, lambda).unwrap();
        for i in 1..=10 {
            for j in 1..=10 {
                let block = r.offdiag_block(i, j).unwrap();
                let want = dense.as_ref().submatrix((i - 1) * 4, (j - 1) * 4, 4, 4);
                assert!(rel_err(block.as_ref(), want) < 1e-8, "({i},{j})");
            }
        }
    }

    #[test]
    fn entries_and_rows_match_oracle() {
        let m = random(2, 9, 5);
        let lambda = -1.5;
        let r = Resolvent::new(&m, lambda).unwrap();
        let dense = dense_resolvent_oracle(&m, lambda).unwrap();
        let scale = dense.norm_max();
        for x in 1..=18 {
            let row = r.row(x, 18).unwrap();
            for y in 1..=18 {
                let e = r.entry(x, y).unwrap();
                assert!((e.value - dense[(x - 1, y - 1)]).norm() <= 1e-8 * scale);
                let back = r.entry(y, x).unwrap().value;
                assert!((e.value - back.conj()).norm() <= 1e-8 * e.value.norm().max(1.0));
                if y >= x {
                    assert_eq!(row[y - x], e.value);
                }
            }
        }
    }

    #[test]
    fn diagonal_matrix_resolvent() {
        let d = [0.5, -1.0, 2.0, 3.0];
        let m = BlockBandMatrix::jacobi(&d, &[0.0; 3]).unwrap();
        let r = Resolvent::new(&m, 0.0).unwrap();
        for x in 1..=4 {
            for y in 1..=4 {
                let v = r.entry(x, y).unwrap().value;
                if x == y {
                    assert_eq!(v, c(1.0 / d[x - 1]));
                } else {
                    assert_eq!(v, c(0.0));
                }
            }
        }
    }

    #[test]
    fn scalar_chain_reproduces_scalar_recursion_bitwise() {
        let v = [0.3, -1.2, 0.8, 2.2, -0.1];
        let t = [0.7, -1.1, 0.4, 1.9];
        let lambda = 0.25;
        let m = BlockBandMatrix::jacobi(&v, &t).unwrap();
        let chain = forward_gamma_chain(&m, lambda).unwrap();
        let mut g = v[0] - lambda;
        assert_eq!(chain.gamma(1)[(0, 0)].re, g);
        for k in 1..5 {
            g = v[k] - lambda - t[k - 1] * t[k - 1] / g;
            assert_eq!(chain.gamma(k + 1)[(0, 0)].re, g);
        }
    }

    #[test]
    fn singular_truncation_is_reported() {
        let m = BlockBandMatrix::jacobi(&[1.0, 0.0], &[1.0]).unwrap();
        assert!(matches!(
            forward_gamma_chain(&m, 1.0),
            Err(Error::SingularBlock { block: 1, .. })
        ));
    }

    #[test]
    fn out_of_range_indices() {
        let m = random(2, 3, 6);
        let r = Resolvent::new(&m, 0.0).unwrap();
        assert!(r.diag_block(0).is_err());
        assert!(r.offdiag_block(1, 4).is_err());
        assert!(r.entry(7, 1).is_err());
    }

    #[test]
    fn deterministic_coupling_ensembles() {
        let spec = BandMatrixSpec {
            w: 3,
            n: 5,
            symmetry: SymmetryClass::Real,
            diag_law: DiagonalBlockLaw::BoxWigner {
                diagonal_half_width: 1.0,
                offdiag_half_width: 0.5,
            },
            offdiag_law: OffDiagonalBlockLaw::identity(3),
            seed: 3,
        };
        let m = sample_block_band(&spec, &spec.seeds().sample(0)).unwrap();
        let r = Resolvent::new(&m, 0.05).unwrap();
        let dense = dense_resolvent_oracle(&m, 0.05).unwrap();
        let g = r.offdiag_block(2, 5).unwrap();
        assert!(rel_err(g.as_ref(), dense.as_ref().submatrix(3, 12, 3, 3)) < 1e-8);
    }
}
