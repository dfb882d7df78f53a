//! Rank decisions, null spaces and subspace comparison.

use nalgebra::DVector;

use super::svd::{singular_values, svd};
use super::{vstack, RealMatrix, ToleranceConfig};

/// Orthonormal null-space basis together with the evidence behind the rank call.
#[derive(Clone, Debug)]
pub struct NullSpace {
    /// Columns form an orthonormal basis of the numerical kernel.
    pub basis: RealMatrix,
    /// Right singular vectors above the threshold, spanning the row space.
    pub complement: RealMatrix,
    /// All singular values, descending.
    pub singular_values: Vec<f64>,
    pub threshold: f64,
    /// Ratio between the singular values on either side of the threshold
    /// (the threshold itself stands in for an empty side). `None` when the
    /// ratio is infinite.
    pub gap: Option<f64>,
    /// Set when `gap` falls below the configured warning factor.
    pub ill_conditioned: bool,
}

impl NullSpace {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }
}

fn gap_ratio(kept: Option<f64>, dropped: Option<f64>, threshold: f64) -> Option<f64> {
    let ratio = |num: f64, den: f64| if den > 0.0 { Some(num / den) } else { None };
    match (kept, dropped) {
        (Some(a), Some(b)) => ratio(a, b),
        (Some(a), None) => ratio(a, threshold),
        (None, Some(b)) => ratio(threshold, b),
        (None, None) => None,
    }
}

/// Numerical kernel of `m`: right singular vectors whose singular values are
/// at most `rank_rel_tol * sigma_max`.
pub fn null_space(m: &RealMatrix, cfg: &ToleranceConfig) -> NullSpace {
    null_space_scaled(m, 0.0, cfg)
}

/// Like [`null_space`] with threshold `rank_rel_tol * max(sigma_max, scale)`.
///
/// `scale` is the natural size of the matrix family. Expressions such as
/// `I + (J P)^2` built from projectors have scale 1 and can vanish in exact
/// arithmetic, in which case `sigma_max` is pure round-off.
pub fn null_space_scaled(m: &RealMatrix, scale: f64, cfg: &ToleranceConfig) -> NullSpace {
    let cols = m.ncols();
    if cols == 0 {
        return NullSpace {
            basis: RealMatrix::zeros(0, 0),
            complement: RealMatrix::zeros(0, 0),
            singular_values: Vec::new(),
            threshold: 0.0,
            gap: None,
            ill_conditioned: false,
        };
    }
    let svd = svd(m);
    let sigma_max = svd.singular_values[0];
    let threshold = cfg.rank_rel_tol * sigma_max.max(scale);
    let rank = svd.singular_values.iter().take_while(|&&s| s > threshold).count();
    let kept = rank.checked_sub(1).map(|i| svd.singular_values[i]);
    let dropped = svd.singular_values.get(rank).copied();
    let gap = gap_ratio(kept, dropped, threshold);
    NullSpace {
        basis: svd.v.columns(rank, cols - rank).into_owned(),
        complement: svd.v.columns(0, rank).into_owned(),
        singular_values: svd.singular_values,
        threshold,
        gap,
        ill_conditioned: gap.is_some_and(|g| g < cfg.gap_warn_factor),
    }
}

/// Numerical rank with threshold `rank_rel_tol * sigma_max`.
pub fn rank(m: &RealMatrix, cfg: &ToleranceConfig) -> usize {
    if m.is_empty() {
        return 0;
    }
    let s = singular_values(m);
    let sigma_max = s.first().copied().unwrap_or(0.0);
    s.iter().filter(|&&x| x > cfg.rank_rel_tol * sigma_max).count()
}

/// Orthonormal basis of the column space of `m`.
pub fn range_basis(m: &RealMatrix, cfg: &ToleranceConfig) -> RealMatrix {
    let rows = m.nrows();
    if rows == 0 {
        return RealMatrix::zeros(0, 0);
    }
    let svd = svd(m);
    let sigma_max = svd.singular_values.first().copied().unwrap_or(0.0);
    let r = svd
        .singular_values
        .iter()
        .take_while(|&&s| s > cfg.rank_rel_tol * sigma_max && s > 0.0)
        .count();
    svd.u.columns(0, r).into_owned()
}

/// Orthogonal projector `B B^T` onto the span of an orthonormal basis.
pub fn projector(basis: &RealMatrix) -> RealMatrix {
    basis * basis.transpose()
}

/// Orthonormal basis of `span(a) ∩ span(b)` for orthonormal `a`, `b` in `R^d`.
pub fn intersection(a: &RealMatrix, b: &RealMatrix, cfg: &ToleranceConfig) -> RealMatrix {
    let d = a.nrows().max(b.nrows());
    let id = RealMatrix::identity(d, d);
    let pa = &id - projector(a);
    let pb = &id - projector(b);
    null_space_scaled(&vstack(d, &[&pa, &pb]), 1.0, cfg).basis
}

/// Removes the components of `v` along the orthonormal columns of `basis`
/// (two Gram–Schmidt passes) and normalizes. `None` when the remainder has
/// norm at most `tol`.
pub fn orthonormalize_against(v: &DVector<f64>, basis: &RealMatrix, tol: f64) -> Option<DVector<f64>> {
    let mut w = v.clone();
    if basis.ncols() > 0 {
        for _ in 0..2 {
            let coeffs = basis.tr_mul(&w);
            w -= basis * coeffs;
        }
    }
    let norm = w.norm();
    (norm > tol).then(|| w / norm)
}

/// Principal angles between the spans of two orthonormal bases, ascending.
///
/// When the dimensions differ the surplus directions are reported as
/// right angles. Small angles come from sines, large ones from cosines.
pub fn principal_angles(a: &RealMatrix, b: &RealMatrix) -> Vec<f64> {
    let (ka, kb) = (a.ncols(), b.ncols());
    let (small, large) = if ka <= kb { (a, b) } else { (b, a) };
    let k = small.ncols();
    let mut angles = Vec::with_capacity(ka.max(kb));
    if k > 0 {
        let cosines: Vec<f64> = singular_values(&(large.transpose() * small))
            .into_iter()
            .map(|c| c.min(1.0))
            .collect();
        let residual = small - large * (large.transpose() * small);
        let mut sines: Vec<f64> = singular_values(&residual).into_iter().map(|s| s.min(1.0)).collect();
        sines.sort_by(|x, y| x.total_cmp(y));
        for i in 0..k {
            let c = cosines.get(i).copied().unwrap_or(0.0);
            let s = sines.get(i).copied().unwrap_or(1.0);
            angles.push(if c * c < 0.5 { c.acos() } else { s.asin() });
        }
    }
    angles.resize(ka.max(kb), std::f64::consts::FRAC_PI_2);
    angles.sort_by(|x, y| x.total_cmp(y));
    angles
}

/// Largest principal angle; zero when both spans are trivial.
pub fn max_principal_angle(a: &RealMatrix, b: &RealMatrix) -> f64 {
    principal_angles(a, b).into_iter().fold(0.0, f64::max)
}
