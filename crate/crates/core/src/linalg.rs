//! Small dense helpers on top of faer.

use faer::linalg::solvers::{DenseSolveCore, Lblt, Solve};
use faer::{c64, Mat, MatRef, Side};

use crate::error::{Error, Result};

pub type CMat = Mat<c64>;

pub fn c(re: f64) -> c64 {
    c64::new(re, 0.0)
}

/// Shift the diagonal: `a - lambda I`.
pub fn shifted(a: MatRef<'_, c64>, lambda: f64) -> CMat {
    let mut out = a.to_owned();
    for i in 0..out.nrows() {
        out[(i, i)] -= c(lambda);
    }
    out
}

/// Largest entrywise deviation from Hermitian symmetry.
pub fn hermitian_defect(a: MatRef<'_, c64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Replace `a` by `(a + a†)/2`.
pub fn symmetrize(a: &mut CMat) {
    let n = a.nrows();
    for j in 0..n {
        a[(j, j)] = c(a[(j, j)].re);
        for i in (j + 1)..n {
            let v = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            a[(i, j)] = v;
            a[(j, i)] = v.conj();
        }
    }
}

fn norm_one(a: MatRef<'_, c64>) -> f64 {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Bunch–Kaufman factorization of a Hermitian block together with a
/// 1-norm condition estimate.
pub struct HermitianFactor {
    lblt: Lblt<c64>,
    condition: f64,
    dim: usize,
}

impl HermitianFactor {
    /// Factorize; `block` is only used to label a [`Error::SingularBlock`].
    pub fn new(a: MatRef<'_, c64>, max_condition: f64, block: usize) -> Result<Self> {
        let dim = a.nrows();
        let lblt = Lblt::new(a, Side::Lower);
        let mut factor = Self {
            lblt,
            condition: f64::INFINITY,
            dim,
        };
        let inv_norm = factor.inverse_norm_one_estimate();
        let condition = norm_one(a) * inv_norm;
        factor.condition = condition;
        if !condition.is_finite() || condition > max_condition {
            return Err(Error::SingularBlock { block, condition });
        }
        Ok(factor)
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `A⁻¹ B`
    pub fn solve(&self, rhs: MatRef<'_, c64>) -> CMat {
        self.lblt.solve(rhs)
    }

    /// `B A⁻¹`, using `A = A†`.
    pub fn solve_right(&self, lhs: MatRef<'_, c64>) -> CMat {
        // (B A⁻¹)† = A⁻¹ B†
        let rhs = lhs.adjoint().to_owned();
        self.lblt.solve(rhs.as_ref()).adjoint().to_owned()
    }

    /// Explicit inverse. Only for callers that must return a full block.
    pub fn inverse(&self) -> CMat {
        let mut inv = self.lblt.inverse();
        symmetrize(&mut inv);
        inv
    }

    /// Hager's estimator of ‖A⁻¹‖₁, a handful of solves instead of an inverse.
    fn inverse_norm_one_estimate(&self) -> f64 {
        let n = self.dim;
        if n == 0 {
            return 0.0;
        }
        let mut x = Mat::<c64>::from_fn(n, 1, |_, _| c(1.0 / n as f64));
        let mut estimate = 0.0;
        let mut last_index = usize::MAX;
        for _ in 0..5 {
            let y = self.lblt.solve(x.as_ref());
            let norm: f64 = (0..n).map(|i| y[(i, 0)].norm()).sum();
            if !norm.is_finite() {
                return f64::INFINITY;
            }
            estimate = f64::max(estimate, norm);
            let sign = Mat::<c64>::from_fn(n, 1, |i, _| {
                let v = y[(i, 0)];
                let r = v.norm();
                if r > 0.0 { v / r } else { c(1.0) }
            });
            // A is Hermitian, so A⁻† = A⁻¹.
            let z = self.lblt.solve(sign.as_ref());
            let (index, zmax) = (0..n)
                .map(|i| (i, z[(i, 0)].norm()))
                .fold((0, f64::NEG_INFINITY), |acc, v| if v.1 > acc.1 { v } else { acc });
            if !zmax.is_finite() {
                return f64::INFINITY;
            }
            let zx: f64 = (0..n).map(|i| (z[(i, 0)].conj() * x[(i, 0)]).re).sum();
            if zmax <= zx || index == last_index {
                break;
            }
            last_index = index;
            x = Mat::zeros(n, 1);
            x[(index, 0)] = c(1.0);
        }
        // Higham's alternating-sign safeguard.
        let alt = Mat::<c64>::from_fn(n, 1, |i, _| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            c(sign * (1.0 + i as f64 / (n.max(2) - 1) as f64))
        });
        let y = self.lblt.solve(alt.as_ref());
        let alt_est = 2.0 * (0..n).map(|i| y[(i, 0)].norm()).sum::<f64>() / (3.0 * n as f64);
        if !alt_est.is_finite() {
            return f64::INFINITY;
        }
        estimate.max(alt_est)
    }
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(a: MatRef<'_, c64>) -> Result<Vec<f64>> {
    a.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::NoConvergence)
}

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns).
pub fn hermitian_eigen(a: MatRef<'_, c64>) -> Result<(Vec<f64>, CMat)> {
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::NoConvergence)?;
    let values = (0..a.nrows()).map(|i| evd.S()[i].re).collect();
    Ok((values, evd.U().to_owned()))
}

/// Largest singular value.
pub fn operator_norm(a: MatRef<'_, c64>) -> Result<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(0.0);
    }
    let sv = a.singular_values().map_err(|_| Error::NoConvergence)?;
    Ok(sv.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hilbert(n: usize) -> CMat {
        Mat::from_fn(n, n, |i, j| c(1.0 / (i + j + 1) as f64))
    }

    #[test]
    fn solve_and_right_solve_agree_with_inverse() {
        let a = Mat::from_fn(3, 3, |i, j| {
            if i == j {
                c(2.0 + i as f64)
            } else if i < j {
                c64::new(0.5, 0.25 * (i + j) as f64)
            } else {
                c64::new(0.5, -0.25 * (i + j) as f64)
            }
        });
        let f = HermitianFactor::new(a.as_ref(), 1e12, 0).unwrap();
        let b = Mat::from_fn(3, 2, |i, j| c64::new(i as f64 - j as f64, 1.0));
        let x = f.solve(b.as_ref());
        let r = &a * &x - &b;
        assert!(r.norm_max() < 1e-12);
        let bt = b.adjoint().to_owned();
        let y = f.solve_right(bt.as_ref());
        let r = &y * &a - &bt;
        assert!(r.norm_max() < 1e-12);
        assert!(hermitian_defect(f.inverse().as_ref()) == 0.0);
    }

    #[test]
    fn condition_estimate_tracks_true_condition() {
        // Hilbert matrices have cond₁ known to grow like e^{3.5 n}.
        let h = hilbert(6);
        let f = HermitianFactor::new(h.as_ref(), 1e12, 0).unwrap();
        let exact = norm_one(h.as_ref()) * norm_one(f.inverse().as_ref());
        assert!(f.condition() <= exact * (1.0 + 1e-6));
        assert!(f.condition() >= exact / 10.0);
        assert!(matches!(
            HermitianFactor::new(hilbert(12).as_ref(), 1e12, 4),
            Err(Error::SingularBlock { block: 4, .. })
        ));
    }

    #[test]
    fn exactly_singular_is_rejected() {
        let z = Mat::<c64>::zeros(2, 2);
        assert!(HermitianFactor::new(z.as_ref(), 1e12, 1).is_err());
        let mut one = Mat::<c64>::zeros(2, 2);
        one[(0, 0)] = c(1.0);
        assert!(HermitianFactor::new(one.as_ref(), 1e12, 1).is_err());
    }

    #[test]
    fn eigen_of_swap_matrix() {
        let a = Mat::from_fn(2, 2, |i, j| c(if i == j { 0.0 } else { 1.0 }));
        let ev = hermitian_eigenvalues(a.as_ref()).unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);
        assert!((operator_norm(a.as_ref()).unwrap() - 1.0).abs() < 1e-14);
    }
}
