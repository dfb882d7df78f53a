//! Physical (S, L, H) description and its real quadrature state-space model.
//!
//! The scattering matrix is fixed to the identity; a general unitary `S`
//! only relabels the input (`D u` becomes the new input) and does not
//! affect the decomposition.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::symplectic::{ensure_finite, j_form, max_abs, sharp_adjoint, ComplexMatrix, RealMatrix};

/// `n` oscillator modes driven by `m` fields, with Hamiltonian
/// `H = x^T Ham x / 2` and coupling `L = Lambda x`.
#[derive(Clone, Debug, PartialEq)]
pub struct SlhModel {
    n: usize,
    m: usize,
    hamiltonian: RealMatrix,
    coupling: ComplexMatrix,
}

impl SlhModel {
    /// Validates shapes and finiteness; `n` and `m` must be positive. An
    /// asymmetric Hamiltonian within `residual_tol` is replaced by its
    /// symmetric part; beyond it the model is rejected.
    pub fn new(hamiltonian: RealMatrix, coupling: ComplexMatrix, residual_tol: f64) -> Result<Self> {
        let (rows, cols) = hamiltonian.shape();
        if rows != cols {
            return Err(Error::NotSquare {
                what: "Hamiltonian matrix",
                rows,
                cols,
            });
        }
        if rows % 2 != 0 {
            return Err(Error::OddDimension {
                what: "Hamiltonian matrix",
                rows,
                cols,
            });
        }
        if rows == 0 || coupling.nrows() == 0 {
            return Err(Error::InvalidInput(vec![
                "a model needs at least one mode and one field".into(),
            ]));
        }
        if coupling.ncols() != rows {
            return Err(Error::Dimension {
                context: "coupling matrix columns",
                expected: rows.to_string(),
                found: coupling.ncols().to_string(),
            });
        }
        ensure_finite(&hamiltonian, "Hamiltonian matrix")?;
        ensure_finite(coupling.re(), "coupling matrix (real part)")?;
        ensure_finite(coupling.im(), "coupling matrix (imaginary part)")?;
        let asym = max_abs(&(&hamiltonian - hamiltonian.transpose()));
        if asym > residual_tol {
            return Err(Error::Asymmetric {
                what: "Hamiltonian matrix",
                residual: asym,
            });
        }
        let hamiltonian = (&hamiltonian + hamiltonian.transpose()) * 0.5;
        Ok(Self {
            n: rows / 2,
            m: coupling.nrows(),
            hamiltonian,
            coupling,
        })
    }

    pub fn modes(&self) -> usize {
        self.n
    }

    pub fn fields(&self) -> usize {
        self.m
    }

    pub fn hamiltonian(&self) -> &RealMatrix {
        &self.hamiltonian
    }

    pub fn coupling(&self) -> &ComplexMatrix {
        &self.coupling
    }

    /// Generator `J_n Ham` of the closed (coupling-free) dynamics.
    pub fn generator(&self) -> RealMatrix {
        j_form(self.n) * &self.hamiltonian
    }
}

/// Real quadrature model `dx = A x + B u`, `y = C x + D u`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureSystem {
    pub n: usize,
    pub m: usize,
    pub a: RealMatrix,
    pub b: RealMatrix,
    pub c: RealMatrix,
    pub d: RealMatrix,
}

impl QuadratureSystem {
    /// Assembles a system from raw matrices after shape checks only. Used to
    /// examine hand-written quadruples that need not be physical.
    pub fn from_matrices(a: RealMatrix, b: RealMatrix, c: RealMatrix, d: RealMatrix) -> Result<Self> {
        let (ar, ac) = a.shape();
        if ar != ac || ar % 2 != 0 {
            return Err(Error::Dimension {
                context: "A matrix",
                expected: "square with even size".into(),
                found: format!("{ar}x{ac}"),
            });
        }
        let (br, bc) = b.shape();
        if br != ar || bc % 2 != 0 {
            return Err(Error::Dimension {
                context: "B matrix",
                expected: format!("{ar}x(even)"),
                found: format!("{br}x{bc}"),
            });
        }
        if c.shape() != (bc, ar) {
            return Err(Error::Dimension {
                context: "C matrix",
                expected: format!("{bc}x{ar}"),
                found: format!("{}x{}", c.nrows(), c.ncols()),
            });
        }
        if d.shape() != (bc, bc) {
            return Err(Error::Dimension {
                context: "D matrix",
                expected: format!("{bc}x{bc}"),
                found: format!("{}x{}", d.nrows(), d.ncols()),
            });
        }
        for (m, what) in [(&a, "A matrix"), (&b, "B matrix"), (&c, "C matrix"), (&d, "D matrix")] {
            ensure_finite(m, what)?;
        }
        Ok(Self {
            n: ar / 2,
            m: bc / 2,
            a,
            b,
            c,
            d,
        })
    }
}

/// `C = sqrt(2) [Re Lambda; Im Lambda]`, `B = -C^#`, `A = J Ham - C^# C / 2`, `D = I`.
pub fn build_quadrature(model: &SlhModel) -> QuadratureSystem {
    let (n, m) = (model.n, model.m);
    let lambda = model.coupling();
    let mut c = RealMatrix::zeros(2 * m, 2 * n);
    c.view_mut((0, 0), (m, 2 * n)).copy_from(lambda.re());
    c.view_mut((m, 0), (m, 2 * n)).copy_from(lambda.im());
    c *= std::f64::consts::SQRT_2;
    let c_sharp = sharp_adjoint(&c).expect("C has even shape by construction");
    let a = model.generator() - (&c_sharp * &c) * 0.5;
    QuadratureSystem {
        n,
        m,
        a,
        b: -c_sharp,
        c,
        d: RealMatrix::identity(2 * m, 2 * m),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RealizabilityReport {
    /// `max |A + A^# + B B^#|`
    pub residual_pr1: f64,
    /// `max |B + C^# D^#|`
    pub residual_pr2: f64,
    pub pass: bool,
}

/// Evaluates the two physical-realizability identities.
pub fn check_physical_realizability(sys: &QuadratureSystem, tol: f64) -> RealizabilityReport {
    let sharp = |x: &RealMatrix| sharp_adjoint(x).expect("system matrices have even shapes");
    let b_sharp = sharp(&sys.b);
    let residual_pr1 = max_abs(&(&sys.a + sharp(&sys.a) + &sys.b * b_sharp));
    let residual_pr2 = max_abs(&(&sys.b + sharp(&sys.c) * sharp(&sys.d)));
    RealizabilityReport {
        residual_pr1,
        residual_pr2,
        pass: residual_pr1 <= tol && residual_pr2 <= tol,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CommutationReport {
    /// `max |T^T J_n T - J_target|`
    pub residual: f64,
    pub pass: bool,
}

/// Checks that the coordinates `T^T x` keep the commutation matrix `J_target`.
pub fn check_commutation_preserving(t: &RealMatrix, j_target: &RealMatrix, tol: f64) -> Result<CommutationReport> {
    let (rows, cols) = t.shape();
    if rows % 2 != 0 {
        return Err(Error::OddDimension {
            what: "coordinate transformation",
            rows,
            cols,
        });
    }
    if j_target.shape() != (cols, cols) {
        return Err(Error::Dimension {
            context: "target commutation matrix",
            expected: format!("{cols}x{cols}"),
            found: format!("{}x{}", j_target.nrows(), j_target.ncols()),
        });
    }
    let residual = max_abs(&(t.transpose() * j_form(rows / 2) * t - j_target));
    Ok(CommutationReport {
        residual,
        pass: residual <= tol,
    })
}
