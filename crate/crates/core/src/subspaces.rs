//! The four Kalman subspaces from the SVD of the observability Gramian.
//!
//! With `W_o = U1 S1 U1^T`, `P1 = U1 U1^T` and `P2 = I - P1`:
//!
//! * `R_co = Ker(I + (J P1)^2)`
//! * `R_cbarobar = Ker(I + (J P2)^2)`
//! * `R_cobar = {x : P2 x = x, J^T P1 J x = x}`
//! * `R_cbaro = J^T R_cobar`

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gramians::StructuredKalmanMatrices;
use crate::symplectic::{
    hstack, intersection, j_form, max_abs, max_principal_angle, null_space, null_space_scaled, projector, vstack,
    RealMatrix, ToleranceConfig,
};

/// Largest principal angle accepted between two routes to the same subspace.
pub const CROSS_CHECK_ANGLE: f64 = 1e-7;

#[derive(Clone, Debug)]
pub struct GramianSvd {
    /// Orthonormal basis of `Im W_o`.
    pub u1: RealMatrix,
    /// Orthonormal basis of `Ker W_o`.
    pub u2: RealMatrix,
    /// Singular values above the threshold, descending.
    pub sigma1: Vec<f64>,
    pub rank: usize,
    pub gap: Option<f64>,
    pub ill_conditioned: bool,
}

impl GramianSvd {
    pub fn state_dim(&self) -> usize {
        self.u1.nrows()
    }

    pub fn p1(&self) -> RealMatrix {
        projector(&self.u1)
    }

    pub fn p2(&self) -> RealMatrix {
        projector(&self.u2)
    }
}

/// Splits the right singular vectors of `W_o` at the rank threshold.
pub fn svd_split(wo: &RealMatrix, cfg: &ToleranceConfig) -> Result<GramianSvd> {
    let (rows, cols) = wo.shape();
    if rows != cols || rows % 2 != 0 {
        return Err(Error::Dimension {
            context: "observability Gramian",
            expected: "square with even size".into(),
            found: format!("{rows}x{cols}"),
        });
    }
    let asym = max_abs(&(wo - wo.transpose()));
    if asym > cfg.residual_tol * max_abs(wo).max(1.0) {
        return Err(Error::Asymmetric {
            what: "observability Gramian",
            residual: asym,
        });
    }
    let ns = null_space(wo, cfg);
    let rank = ns.complement.ncols();
    Ok(GramianSvd {
        u1: with_rows(ns.complement, rows),
        u2: with_rows(ns.basis, rows),
        sigma1: ns.singular_values[..rank].to_vec(),
        rank,
        gap: ns.gap,
        ill_conditioned: ns.ill_conditioned,
    })
}

/// Keeps the row count of an empty basis at the state dimension.
fn with_rows(basis: RealMatrix, rows: usize) -> RealMatrix {
    if basis.ncols() == 0 {
        RealMatrix::zeros(rows, 0)
    } else {
        basis
    }
}

fn skew_square_kernel(p: &RealMatrix, cfg: &ToleranceConfig) -> RealMatrix {
    let d = p.nrows();
    let jp = j_form(d / 2) * p;
    let m = RealMatrix::identity(d, d) + &jp * &jp;
    with_rows(null_space_scaled(&m, 1.0, cfg).basis, d)
}

fn even(name: &'static str, basis: RealMatrix) -> Result<RealMatrix> {
    if !basis.ncols().is_multiple_of(2) {
        return Err(Error::OddSubspace {
            name,
            dim: basis.ncols(),
        });
    }
    Ok(basis)
}

/// Orthonormal basis of `R_co`.
pub fn co_subspace(svd: &GramianSvd, cfg: &ToleranceConfig) -> Result<RealMatrix> {
    even("R_co", skew_square_kernel(&svd.p1(), cfg))
}

/// Orthonormal basis of `R_cbarobar`.
pub fn cbar_obar_subspace(svd: &GramianSvd, cfg: &ToleranceConfig) -> Result<RealMatrix> {
    even("R_cbarobar", skew_square_kernel(&svd.p2(), cfg))
}

/// Orthonormal basis of `R_cobar` from the stacked linear system
/// `[I - P2; I - J^T P1 J] x = 0`.
pub fn cobar_subspace(svd: &GramianSvd, cfg: &ToleranceConfig) -> RealMatrix {
    let d = svd.state_dim();
    if svd.u1.ncols() == 0 || svd.u2.ncols() == 0 {
        return RealMatrix::zeros(d, 0);
    }
    let id = RealMatrix::identity(d, d);
    let j = j_form(d / 2);
    let top = &id - svd.p2();
    let bottom = &id - j.transpose() * svd.p1() * &j;
    with_rows(null_space_scaled(&vstack(d, &[&top, &bottom]), 1.0, cfg).basis, d)
}

/// `J^T` applied to the `R_cobar` basis, with the principal angle to
/// `Ker(I + J P2 J P1)` as a cross-check.
pub fn cbaro_subspace(cobar: &RealMatrix, svd: &GramianSvd, cfg: &ToleranceConfig) -> Result<(RealMatrix, f64)> {
    let d = svd.state_dim();
    let j = j_form(d / 2);
    let basis = j.transpose() * cobar;
    let product = RealMatrix::identity(d, d) + &j * svd.p2() * &j * svd.p1();
    let check = with_rows(null_space_scaled(&product, 1.0, cfg).basis, d);
    let angle = max_principal_angle(&basis, &check);
    if angle > CROSS_CHECK_ANGLE {
        return Err(Error::CrossCheck {
            what: "R_cbaro against Ker(I + J P2 J P1)",
            angle,
        });
    }
    Ok((basis, angle))
}

#[derive(Clone, Debug)]
pub struct KalmanSubspaces {
    pub co: RealMatrix,
    pub cobar: RealMatrix,
    pub cbaro: RealMatrix,
    pub cbarobar: RealMatrix,
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    pub cross_check_angle: f64,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct SubspaceProjectors {
    pub co: RealMatrix,
    pub cobar: RealMatrix,
    pub cbaro: RealMatrix,
    pub cbarobar: RealMatrix,
}

impl KalmanSubspaces {
    pub fn state_dim(&self) -> usize {
        self.co.nrows()
    }

    pub fn projectors(&self) -> SubspaceProjectors {
        SubspaceProjectors {
            co: projector(&self.co),
            cobar: projector(&self.cobar),
            cbaro: projector(&self.cbaro),
            cbarobar: projector(&self.cbarobar),
        }
    }

    /// `[cobar | co | cbarobar | cbaro]`
    pub fn stacked(&self) -> RealMatrix {
        hstack(self.state_dim(), &[&self.cobar, &self.co, &self.cbarobar, &self.cbaro])
    }
}

/// Extracts all four subspaces and checks that the dimensions add up.
pub fn extract_subspaces(svd: &GramianSvd, cfg: &ToleranceConfig) -> Result<KalmanSubspaces> {
    let co = co_subspace(svd, cfg)?;
    let cbarobar = cbar_obar_subspace(svd, cfg)?;
    let cobar = cobar_subspace(svd, cfg);
    let (cbaro, cross_check_angle) = cbaro_subspace(&cobar, svd, cfg)?;
    let (n1, n2, n3) = (co.ncols() / 2, cbarobar.ncols() / 2, cobar.ncols());
    let state_dim = svd.state_dim();
    if 2 * (n1 + n2 + n3) != state_dim {
        return Err(Error::DimensionBookkeeping { n1, n2, n3, state_dim });
    }
    let mut warnings = Vec::new();
    if svd.ill_conditioned {
        warnings.push(format!(
            "observability Gramian rank {} sits on a small spectral gap ({:?})",
            svd.rank, svd.gap
        ));
    }
    Ok(KalmanSubspaces {
        co,
        cobar,
        cbaro,
        cbarobar,
        n1,
        n2,
        n3,
        cross_check_angle,
        warnings,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SubspaceLawReport {
    /// Largest distance from an eigenvalue of `J Pj J Pk` to `{0, -1}`.
    pub eigen_law: f64,
    /// `max |Q^T Q - I|` for all four bases side by side.
    pub completeness: f64,
    /// Largest residual of the defining projector equations.
    pub membership: f64,
    /// Largest principal angle between each basis and its
    /// structured-matrix intersection.
    pub intersection_angle: f64,
    /// `J`-invariance of `R_co`, `R_cbarobar` and `J R_cbaro = R_cobar`.
    pub j_invariance: f64,
    /// `max |G^T J G|` for the `R_cobar` basis `G`.
    pub cobar_isotropy: f64,
    /// `rank W_o = 2 n1 + n3`
    pub rank_consistent: bool,
    pub pass: bool,
}

/// Distance of the spectrum of `J Pj J Pk` from `{0, -1}`.
///
/// Its nonzero eigenvalues coincide with those of the symmetric matrix
/// `-Pk J Pj J^T Pk`, which is evaluated instead.
fn eigen_distance(j: &RealMatrix, pj: &RealMatrix, pk: &RealMatrix) -> f64 {
    let s = -(pk * j * pj * j.transpose() * pk);
    let s = (&s + s.transpose()) * 0.5;
    s.symmetric_eigenvalues()
        .iter()
        .map(|&x| x.abs().min((x + 1.0).abs()))
        .fold(0.0, f64::max)
}

fn outside(p: &RealMatrix, basis: &RealMatrix) -> f64 {
    if basis.ncols() == 0 {
        return 0.0;
    }
    max_abs(&(basis - p * basis))
}

/// Orthonormal basis of the orthogonal complement of an orthonormal basis.
fn complement(basis: &RealMatrix, cfg: &ToleranceConfig) -> RealMatrix {
    if basis.ncols() == 0 {
        let d = basis.nrows();
        return RealMatrix::identity(d, d);
    }
    null_space_scaled(&projector(basis), 1.0, cfg).basis
}

/// Checks the eigenvalue law, completeness, the projector characterizations,
/// the intersections with the structured matrices, and `J`-invariance.
pub fn verify_subspace_laws(
    subs: &KalmanSubspaces,
    svd: &GramianSvd,
    structured: &StructuredKalmanMatrices,
    cfg: &ToleranceConfig,
    tol: f64,
    angle_tol: f64,
) -> SubspaceLawReport {
    let d = subs.state_dim();
    let j = j_form(d / 2);
    let (p1, p2) = (svd.p1(), svd.p2());

    let mut eigen_law: f64 = 0.0;
    for a in [&p1, &p2] {
        for b in [&p1, &p2] {
            eigen_law = eigen_law.max(eigen_distance(&j, a, b));
        }
    }

    let q = subs.stacked();
    let completeness = max_abs(&(q.transpose() * &q - RealMatrix::identity(d, d)));

    // Im(J U1) has projector J P1 J^T, Im(J U2) has J P2 J^T.
    let jp1 = &j * &p1 * j.transpose();
    let jp2 = &j * &p2 * j.transpose();
    let membership = [
        outside(&jp1, &subs.cobar),
        outside(&p2, &subs.cobar),
        outside(&jp1, &subs.co),
        outside(&p1, &subs.co),
        outside(&jp2, &subs.cbarobar),
        outside(&p2, &subs.cbarobar),
        outside(&jp2, &subs.cbaro),
        outside(&p1, &subs.cbaro),
    ]
    .into_iter()
    .fold(0.0, f64::max);

    let im_cs = structured.controllable_basis(cfg);
    let im_ost = structured.observable_basis(cfg);
    let ker_os = complement(&im_ost, cfg);
    let ker_cst = complement(&im_cs, cfg);
    let intersection_angle = [
        (&im_cs, &ker_os, &subs.cobar),
        (&im_cs, &im_ost, &subs.co),
        (&ker_cst, &ker_os, &subs.cbarobar),
        (&ker_cst, &im_ost, &subs.cbaro),
    ]
    .into_iter()
    .map(|(a, b, basis)| max_principal_angle(&intersection(a, b, cfg), basis))
    .fold(0.0, f64::max);

    let p = subs.projectors();
    let id = RealMatrix::identity(d, d);
    let j_invariance = [
        max_abs(&((&id - &p.co) * &j * &p.co)),
        max_abs(&((&id - &p.cbarobar) * &j * &p.cbarobar)),
        max_abs(&((&id - &p.cobar) * &j * &p.cbaro)),
    ]
    .into_iter()
    .fold(0.0, f64::max);

    let cobar_isotropy = if subs.n3 == 0 {
        0.0
    } else {
        max_abs(&(subs.cobar.transpose() * &j * &subs.cobar))
    };

    let rank_consistent = svd.rank == 2 * subs.n1 + subs.n3;
    let pass = eigen_law <= tol
        && completeness <= tol
        && membership <= tol
        && intersection_angle <= angle_tol
        && j_invariance <= tol
        && cobar_isotropy <= tol
        && rank_consistent;
    SubspaceLawReport {
        eigen_law,
        completeness,
        membership,
        intersection_angle,
        j_invariance,
        cobar_isotropy,
        rank_consistent,
        pass,
    }
}
