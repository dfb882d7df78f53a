//! Structure-aware dense real linear algebra.
//!
//! Everything in the crate works on real matrices in the quadrature
//! ordering `(q_1..q_n, p_1..p_n)`. This module provides the canonical
//! symplectic form, the symplectic (sharp) adjoint, the real image of the
//! doubled-up matrix calculus, the Hamiltonian-matrix test, plus the
//! numerical kernels the rest of the pipeline leans on (matrix exponential,
//! Gramian integrals, null spaces and subspace comparison).

mod expm;
mod spaces;
mod svd;

pub use expm::{mat_exp, van_loan_gramian};
pub use spaces::{
    intersection, max_principal_angle, null_space, null_space_scaled, orthonormalize_against, principal_angles,
    projector, range_basis, rank, NullSpace,
};
pub use svd::{complex_singular_values, singular_values, svd, Svd};

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense real matrix. All system, Gramian and transformation matrices use it.
pub type RealMatrix = DMatrix<f64>;

/// Machine epsilon for `f64`.
pub const EPS: f64 = f64::EPSILON;

/// Complex matrix stored as separate real and imaginary parts.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    re: RealMatrix,
    im: RealMatrix,
}

impl ComplexMatrix {
    pub fn new(re: RealMatrix, im: RealMatrix) -> Result<Self> {
        if re.shape() != im.shape() {
            return Err(Error::Dimension {
                context: "complex matrix parts",
                expected: format!("{}x{}", re.nrows(), re.ncols()),
                found: format!("{}x{}", im.nrows(), im.ncols()),
            });
        }
        Ok(Self { re, im })
    }

    pub fn from_real(re: RealMatrix) -> Self {
        let im = RealMatrix::zeros(re.nrows(), re.ncols());
        Self { re, im }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_real(RealMatrix::zeros(rows, cols))
    }

    pub fn from_complex(m: &DMatrix<Complex<f64>>) -> Self {
        Self {
            re: m.map(|z| z.re),
            im: m.map(|z| z.im),
        }
    }

    pub fn to_complex(&self) -> DMatrix<Complex<f64>> {
        self.re.zip_map(&self.im, Complex::new)
    }

    pub fn re(&self) -> &RealMatrix {
        &self.re
    }

    pub fn im(&self) -> &RealMatrix {
        &self.im
    }

    pub fn nrows(&self) -> usize {
        self.re.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.re.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.re.shape()
    }

    /// Entrywise complex conjugate, `X^#`.
    pub fn conj(&self) -> Self {
        Self {
            re: self.re.clone(),
            im: -&self.im,
        }
    }

    /// Right multiplication by a real matrix.
    pub fn mul_real(&self, rhs: &RealMatrix) -> Self {
        Self {
            re: &self.re * rhs,
            im: &self.im * rhs,
        }
    }
}

/// Thresholds shared by every numerical decision in the pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    /// Singular values at or below `rank_rel_tol * sigma_max` count as zero.
    pub rank_rel_tol: f64,
    /// Largest absolute entry a matrix residual may have and still count as zero.
    pub residual_tol: f64,
    /// A gap ratio across the rank threshold below this value raises a warning.
    pub gap_warn_factor: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            rank_rel_tol: 1e-12,
            residual_tol: 1e-9,
            gap_warn_factor: 10.0,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !ok(self.rank_rel_tol) {
            return Err(Error::InvalidTolerance(format!(
                "rank_rel_tol must be positive, got {}",
                self.rank_rel_tol
            )));
        }
        if !ok(self.residual_tol) {
            return Err(Error::InvalidTolerance(format!(
                "residual_tol must be positive, got {}",
                self.residual_tol
            )));
        }
        if !(self.gap_warn_factor.is_finite() && self.gap_warn_factor > 1.0) {
            return Err(Error::InvalidTolerance(format!(
                "gap_warn_factor must exceed 1, got {}",
                self.gap_warn_factor
            )));
        }
        Ok(())
    }

    pub fn with_rank_rel_tol(mut self, tol: f64) -> Self {
        self.rank_rel_tol = tol;
        self
    }
}

/// Largest absolute entry; zero for an empty matrix.
pub fn max_abs(m: &RealMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub(crate) fn ensure_finite(m: &RealMatrix, what: &'static str) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { what })
    }
}

pub(crate) fn ensure_square(m: &RealMatrix, what: &'static str) -> Result<usize> {
    if m.is_square() {
        Ok(m.nrows())
    } else {
        Err(Error::NotSquare {
            what,
            rows: m.nrows(),
            cols: m.ncols(),
        })
    }
}

fn half_dims(m: &RealMatrix, what: &'static str) -> Result<(usize, usize)> {
    let (rows, cols) = m.shape();
    if rows % 2 != 0 || cols % 2 != 0 {
        return Err(Error::OddDimension { what, rows, cols });
    }
    Ok((rows / 2, cols / 2))
}

/// The canonical symplectic form `J_k = [[0, I_k], [-I_k, 0]]`.
pub fn j_form(k: usize) -> RealMatrix {
    let mut j = RealMatrix::zeros(2 * k, 2 * k);
    for i in 0..k {
        j[(i, k + i)] = 1.0;
        j[(k + i, i)] = -1.0;
    }
    j
}

/// Block-diagonal matrix of symplectic forms, e.g. `blkdiag(J_{n3}, J_{n1}, J_{n2})`.
pub fn block_j_form(sizes: &[usize]) -> RealMatrix {
    let blocks: Vec<RealMatrix> = sizes.iter().map(|&k| j_form(k)).collect();
    block_diag(&blocks)
}

pub fn block_diag(blocks: &[RealMatrix]) -> RealMatrix {
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = RealMatrix::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), b.shape()).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// Horizontal concatenation of matrices with a common row count.
pub fn hstack(rows: usize, parts: &[&RealMatrix]) -> RealMatrix {
    let cols = parts.iter().map(|p| p.ncols()).sum();
    let mut out = RealMatrix::zeros(rows, cols);
    let mut c = 0;
    for p in parts {
        debug_assert_eq!(p.nrows(), rows);
        out.view_mut((0, c), p.shape()).copy_from(*p);
        c += p.ncols();
    }
    out
}

/// Vertical concatenation of matrices with a common column count.
pub fn vstack(cols: usize, parts: &[&RealMatrix]) -> RealMatrix {
    let rows = parts.iter().map(|p| p.nrows()).sum();
    let mut out = RealMatrix::zeros(rows, cols);
    let mut r = 0;
    for p in parts {
        debug_assert_eq!(p.ncols(), cols);
        out.view_mut((r, 0), p.shape()).copy_from(*p);
        r += p.nrows();
    }
    out
}

/// Sharp adjoint `X^# = -J_r X^T J_k` of a real `2k x 2r` matrix.
///
/// It plays the role of the transpose for the symplectic form:
/// `(X^#)^# = X` and `(XY)^# = Y^# X^#`.
pub fn sharp_adjoint(x: &RealMatrix) -> Result<RealMatrix> {
    let (k, r) = half_dims(x, "sharp adjoint argument")?;
    Ok(-(j_form(r) * x.transpose() * j_form(k)))
}

/// Real image of the doubled-up matrix `Delta(M, N)`:
/// `[[Re(M+N), -Im(M-N)], [Im(M+N), Re(M-N)]]`.
pub fn tilde_delta(m: &ComplexMatrix, n: &ComplexMatrix) -> Result<RealMatrix> {
    if m.shape() != n.shape() {
        return Err(Error::Dimension {
            context: "tilde_delta arguments",
            expected: format!("{}x{}", m.nrows(), m.ncols()),
            found: format!("{}x{}", n.nrows(), n.ncols()),
        });
    }
    let (k, l) = m.shape();
    let mut out = RealMatrix::zeros(2 * k, 2 * l);
    out.view_mut((0, 0), (k, l)).copy_from(&(m.re() + n.re()));
    out.view_mut((0, l), (k, l)).copy_from(&-(m.im() - n.im()));
    out.view_mut((k, 0), (k, l)).copy_from(&(m.im() + n.im()));
    out.view_mut((k, l), (k, l)).copy_from(&(m.re() - n.re()));
    Ok(out)
}

/// Outcome of [`is_hamiltonian`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HamiltonianCheck {
    pub is_hamiltonian: bool,
    /// `max |JM - (JM)^T|`.
    pub residual: f64,
    /// `max |JM^2 + (JM^2)^T|`; squares of Hamiltonian matrices are skew-Hamiltonian.
    pub square_skew_residual: f64,
}

/// Tests `(JM)^T = JM` for a square even-sized `M` against the form `j`.
pub fn is_hamiltonian(m: &RealMatrix, j: &RealMatrix, tol: f64) -> Result<HamiltonianCheck> {
    let size = ensure_square(m, "Hamiltonian test matrix")?;
    half_dims(m, "Hamiltonian test matrix")?;
    if j.shape() != (size, size) {
        return Err(Error::Dimension {
            context: "symplectic form for Hamiltonian test",
            expected: format!("{size}x{size}"),
            found: format!("{}x{}", j.nrows(), j.ncols()),
        });
    }
    let jm = j * m;
    let residual = max_abs(&(&jm - jm.transpose()));
    let jm2 = &jm * m;
    let square_skew_residual = max_abs(&(&jm2 + jm2.transpose()));
    Ok(HamiltonianCheck {
        is_hamiltonian: residual <= tol,
        residual,
        square_skew_residual,
    })
}
