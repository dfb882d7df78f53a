//! Finite-horizon Gramians, structured observability/controllability
//! matrices, and the duality between the two Gramians.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{QuadratureSystem, SlhModel};
use crate::symplectic::{
    j_form, max_abs, max_principal_angle, null_space, rank, svd, van_loan_gramian, RealMatrix, ToleranceConfig,
};

/// Product of generator norm and horizon length above which the horizon is shrunk.
pub const STIFFNESS_LIMIT: f64 = 50.0;

/// Integration window `(t, s)` with `t < s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Horizon {
    pub t: f64,
    pub s: f64,
}

impl Horizon {
    pub fn new(t: f64, s: f64) -> Result<Self> {
        if !(t.is_finite() && s.is_finite() && t < s) {
            return Err(Error::InvalidHorizon { t, s });
        }
        Ok(Self { t, s })
    }

    pub fn duration(&self) -> f64 {
        self.s - self.t
    }
}

impl Default for Horizon {
    fn default() -> Self {
        Self { t: 0.0, s: 1.0 }
    }
}

fn checked(h: Horizon) -> Result<Horizon> {
    Horizon::new(h.t, h.s)
}

/// `W_c(t, s)`, generated by `J Ham` (not by `A`).
pub fn controllability_gramian(sys: &QuadratureSystem, model: &SlhModel, horizon: Horizon) -> Result<RealMatrix> {
    let h = checked(horizon)?;
    let q = &sys.b * sys.b.transpose();
    van_loan_gramian(&(-model.generator()), &q, h.duration())
}

/// `W_o(t, s)`, generated by `J Ham`.
pub fn observability_gramian(sys: &QuadratureSystem, model: &SlhModel, horizon: Horizon) -> Result<RealMatrix> {
    let h = checked(horizon)?;
    let q = sys.c.transpose() * &sys.c;
    van_loan_gramian(&model.generator().transpose(), &q, h.duration())
}

#[derive(Clone, Debug)]
pub struct GramianPair {
    pub wo: RealMatrix,
    pub wc: RealMatrix,
    /// Horizon actually integrated over.
    pub horizon: Horizon,
    pub requested: Horizon,
    pub warnings: Vec<String>,
}

/// Both Gramians over `horizon`, shrinking it when `||J Ham||_1 (s - t)`
/// exceeds [`STIFFNESS_LIMIT`]. Ranks and kernels do not depend on the horizon.
pub fn gramian_pair(sys: &QuadratureSystem, model: &SlhModel, horizon: Horizon) -> Result<GramianPair> {
    let requested = checked(horizon)?;
    let norm = one_norm(&model.generator());
    let mut warnings = Vec::new();
    let mut effective = requested;
    if norm * requested.duration() > STIFFNESS_LIMIT {
        effective = Horizon::new(requested.t, requested.t + STIFFNESS_LIMIT / norm)?;
        warnings.push(format!(
            "horizon ({}, {}) is stiff for ||J H||_1 = {norm:.3e}; integrating over ({}, {}) instead",
            requested.t, requested.s, effective.t, effective.s
        ));
    }
    Ok(GramianPair {
        wo: observability_gramian(sys, model, effective)?,
        wc: controllability_gramian(sys, model, effective)?,
        horizon: effective,
        requested,
        warnings,
    })
}

fn one_norm(m: &RealMatrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug)]
pub struct StructuredKalmanMatrices {
    /// `[C; C G; ...; C G^(2n-1)]` with `G = J Ham`
    pub os: RealMatrix,
    /// `[B, G B, ..., G^(2n-1) B]`
    pub cs: RealMatrix,
    pub generator: RealMatrix,
    pub b: RealMatrix,
    pub c: RealMatrix,
}

impl StructuredKalmanMatrices {
    /// Orthonormal basis of `Im C_s`.
    pub fn controllable_basis(&self, cfg: &ToleranceConfig) -> RealMatrix {
        krylov_basis(&self.generator, &self.b, cfg)
    }

    /// Orthonormal basis of `Im O_s^T`, the orthogonal complement of `Ker O_s`.
    pub fn observable_basis(&self, cfg: &ToleranceConfig) -> RealMatrix {
        krylov_basis(&self.generator.transpose(), &self.c.transpose(), cfg)
    }
}

/// Orthonormal basis of `span{M^k X : k >= 0}`, grown one power at a time.
/// Each new block is orthogonalized twice against the basis so far; a
/// direction is kept when its residual exceeds `rank_rel_tol` times the
/// block's scale: the largest column norm of `X` for the first block and
/// `||M||_F` afterwards, since later blocks are `M` applied to unit vectors.
/// Same span as the stacked powers, without their growth in magnitude.
pub fn krylov_basis(m: &RealMatrix, x: &RealMatrix, cfg: &ToleranceConfig) -> RealMatrix {
    let d = m.nrows();
    let mut basis = RealMatrix::zeros(d, 0);
    let mut frontier = x.clone();
    let mut scale = frontier.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    while frontier.ncols() > 0 && basis.ncols() < d {
        if scale == 0.0 {
            break;
        }
        let mut r = frontier;
        for _ in 0..2 {
            r -= &basis * (basis.transpose() * &r);
        }
        let f = svd(&r);
        let keep = f
            .singular_values
            .iter()
            .take_while(|&&s| s > cfg.rank_rel_tol * scale)
            .count()
            .min(d - basis.ncols());
        if keep == 0 {
            break;
        }
        let new = f.u.columns(0, keep).into_owned();
        let mut grown = RealMatrix::zeros(d, basis.ncols() + new.ncols());
        grown.columns_mut(0, basis.ncols()).copy_from(&basis);
        grown.columns_mut(basis.ncols(), new.ncols()).copy_from(&new);
        basis = grown;
        frontier = m * new;
        scale = m.norm();
    }
    basis
}

/// Stacks `C M^k` and `M^k B` for `k = 0..dim(M)`.
pub fn power_stacks(m: &RealMatrix, b: &RealMatrix, c: &RealMatrix) -> (RealMatrix, RealMatrix) {
    let dim = m.nrows();
    let (p, q) = (c.nrows(), b.ncols());
    let mut obs = RealMatrix::zeros(p * dim, dim);
    let mut ctr = RealMatrix::zeros(dim, q * dim);
    let mut row = c.clone();
    let mut col = b.clone();
    for k in 0..dim {
        obs.view_mut((k * p, 0), (p, dim)).copy_from(&row);
        ctr.view_mut((0, k * q), (dim, q)).copy_from(&col);
        row = &row * m;
        col = m * &col;
    }
    (obs, ctr)
}

pub fn structured_matrices(sys: &QuadratureSystem, model: &SlhModel) -> StructuredKalmanMatrices {
    let generator = model.generator();
    let (os, cs) = power_stacks(&generator, &sys.b, &sys.c);
    StructuredKalmanMatrices {
        os,
        cs,
        generator,
        b: sys.b.clone(),
        c: sys.c.clone(),
    }
}

/// Classical `(O_G, C_G)` built from powers of `A`.
pub fn standard_matrices(sys: &QuadratureSystem) -> (RealMatrix, RealMatrix) {
    power_stacks(&sys.a, &sys.b, &sys.c)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DualityReport {
    /// `max |W_o - J^T W_c J|`
    pub residual: f64,
    pub rank_wo: usize,
    pub rank_wc: usize,
    pub pass: bool,
}

pub fn verify_duality(pair: &GramianPair, cfg: &ToleranceConfig) -> DualityReport {
    let j = j_form(pair.wo.nrows() / 2);
    let residual = max_abs(&(&pair.wo - j.transpose() * &pair.wc * &j));
    let rank_wo = rank(&pair.wo, cfg);
    let rank_wc = rank(&pair.wc, cfg);
    DualityReport {
        residual,
        rank_wo,
        rank_wc,
        pass: residual <= cfg.residual_tol && rank_wo == rank_wc,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HorizonReport {
    pub horizons: Vec<Horizon>,
    pub ranks: Vec<usize>,
    /// Largest principal angle between `Ker W_o` at the first horizon and at the others.
    pub max_kernel_angle: f64,
    pub pass: bool,
}

/// Observability-Gramian rank and kernel across several horizons.
pub fn verify_horizon_independence(
    sys: &QuadratureSystem,
    model: &SlhModel,
    horizons: &[Horizon],
    cfg: &ToleranceConfig,
    angle_tol: f64,
) -> Result<HorizonReport> {
    let mut ranks = Vec::with_capacity(horizons.len());
    let mut kernels = Vec::with_capacity(horizons.len());
    for &h in horizons {
        let wo = gramian_pair(sys, model, h)?.wo;
        ranks.push(rank(&wo, cfg));
        kernels.push(null_space(&wo, cfg).basis);
    }
    let max_kernel_angle = kernels
        .iter()
        .skip(1)
        .map(|k| max_principal_angle(&kernels[0], k))
        .fold(0.0, f64::max);
    let pass = ranks.windows(2).all(|w| w[0] == w[1]) && max_kernel_angle <= angle_tol;
    Ok(HorizonReport {
        horizons: horizons.to_vec(),
        ranks,
        max_kernel_angle,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::build_quadrature;
    use crate::symplectic::{mat_exp, range_basis, ComplexMatrix};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn example() -> (SlhModel, QuadratureSystem) {
        let model = fixtures::gzpg17(2.0, 1.0, fixtures::DEFAULT_GAMMA);
        let sys = build_quadrature(&model);
        (model, sys)
    }

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    /// Fraction-free Gaussian elimination over the integers.
    fn exact_rank(m: &RealMatrix) -> usize {
        let mut a: Vec<Vec<i128>> = (0..m.nrows())
            .map(|i| {
                (0..m.ncols())
                    .map(|j| {
                        let v = m[(i, j)];
                        assert_eq!(v, v.round(), "exact rank needs integer entries");
                        v as i128
                    })
                    .collect()
            })
            .collect();
        let (rows, cols) = (m.nrows(), m.ncols());
        let mut rank = 0;
        let mut prev = 1i128;
        for col in 0..cols {
            let Some(p) = (rank..rows).find(|&r| a[r][col] != 0) else {
                continue;
            };
            a.swap(rank, p);
            for r in rank + 1..rows {
                for c in col + 1..cols {
                    a[r][c] = (a[rank][col] * a[r][c] - a[r][col] * a[rank][c]) / prev;
                }
                a[r][col] = 0;
            }
            prev = a[rank][col];
            rank += 1;
            if rank == rows {
                break;
            }
        }
        rank
    }

    #[test]
    fn exact_rank_oracle_sanity() {
        assert_eq!(exact_rank(&RealMatrix::identity(3, 3)), 3);
        assert_eq!(exact_rank(&RealMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0])), 1);
        assert_eq!(exact_rank(&RealMatrix::zeros(2, 3)), 0);
        let m = RealMatrix::from_row_slice(3, 3, &[0.0, 2.0, 4.0, 1.0, 1.0, 1.0, 2.0, 4.0, 6.0]);
        assert_eq!(exact_rank(&m), 2);
    }

    #[test]
    fn horizon_validation() {
        assert!(Horizon::new(0.0, 1.0).is_ok());
        assert!(matches!(Horizon::new(1.0, 1.0), Err(Error::InvalidHorizon { .. })));
        assert!(Horizon::new(2.0, 1.0).is_err());
        assert!(Horizon::new(f64::NAN, 1.0).is_err());
        let (model, sys) = example();
        assert!(controllability_gramian(&sys, &model, Horizon { t: 1.0, s: 0.0 }).is_err());
    }

    #[test]
    fn gramians_vanish_without_coupling() {
        let model = fixtures::uncoupled(2, 1);
        let sys = build_quadrature(&model);
        let pair = gramian_pair(&sys, &model, Horizon::default()).unwrap();
        assert_eq!(max_abs(&pair.wc), 0.0);
        assert_eq!(max_abs(&pair.wo), 0.0);
        assert!(verify_duality(&pair, &cfg()).pass);
    }

    #[test]
    fn gramians_are_linear_in_time_without_hamiltonian() {
        let re = RealMatrix::from_row_slice(1, 4, &[0.3, -0.2, 0.7, 0.1]);
        let im = RealMatrix::from_row_slice(1, 4, &[0.5, 0.4, -0.6, 0.2]);
        let model = SlhModel::new(RealMatrix::zeros(4, 4), ComplexMatrix::new(re, im).unwrap(), 0.0).unwrap();
        let sys = build_quadrature(&model);
        let h = Horizon::new(-0.5, 2.0).unwrap();
        let wc = controllability_gramian(&sys, &model, h).unwrap();
        let wo = observability_gramian(&sys, &model, h).unwrap();
        assert!(max_abs(&(wc - &sys.b * sys.b.transpose() * 2.5)) < 1e-14);
        assert!(max_abs(&(wo - sys.c.transpose() * &sys.c * 2.5)) < 1e-14);
    }

    #[test]
    fn example_gramians_have_rank_three() {
        let (model, sys) = example();
        let pair = gramian_pair(&sys, &model, Horizon::default()).unwrap();
        assert_eq!(rank(&pair.wc, &cfg()), 3);
        assert_eq!(rank(&pair.wo, &cfg()), 3);
        assert!(pair.warnings.is_empty());
    }

    #[test]
    fn example_duality() {
        let (model, sys) = example();
        let pair = gramian_pair(&sys, &model, Horizon::default()).unwrap();
        let report = verify_duality(&pair, &cfg());
        assert!(report.pass);
        assert!(report.residual <= 1e-9);
        assert_eq!((report.rank_wo, report.rank_wc), (3, 3));
    }

    #[test]
    fn perturbed_duality_fails() {
        let (model, sys) = example();
        let mut pair = gramian_pair(&sys, &model, Horizon::default()).unwrap();
        pair.wc[(0, 0)] += 1e-3;
        let report = verify_duality(&pair, &cfg());
        assert!(!report.pass);
        assert!((report.residual - 1e-3).abs() < 1e-9);
    }

    #[test]
    fn example_controllability_gramian_matches_quadrature() {
        // 200-panel composite Simpson rule on the defining integral over (0, 1)
        let (model, sys) = example();
        let h = Horizon::default();
        let wc = controllability_gramian(&sys, &model, h).unwrap();
        let g = model.generator();
        let bbt = &sys.b * sys.b.transpose();
        let panels = 200;
        let step = h.duration() / panels as f64;
        let mut acc = RealMatrix::zeros(6, 6);
        for k in 0..=panels {
            let tau = h.t + k as f64 * step;
            let e = mat_exp(&(&g * (h.t - tau))).unwrap();
            let w = match k {
                0 => 1.0,
                k if k == panels => 1.0,
                k if k % 2 == 1 => 4.0,
                _ => 2.0,
            };
            acc += w * (&e * &bbt * e.transpose());
        }
        acc *= step / 3.0;
        assert!(max_abs(&(wc - acc)) <= 1e-8);
    }

    #[test]
    fn structured_matrices_of_free_output() {
        let c = RealMatrix::identity(2, 2);
        let (os, cs) = power_stacks(&RealMatrix::zeros(2, 2), &c, &c);
        assert_eq!(os.shape(), (4, 2));
        assert_eq!(os.rows(0, 2).into_owned(), c);
        assert_eq!(max_abs(&os.rows(2, 2).into_owned()), 0.0);
        assert_eq!(cs.columns(0, 2).into_owned(), c);
    }

    #[test]
    fn example_structured_ranks_match_exact_elimination() {
        // With omega = 2, lambda = 1, gamma = sqrt2 the generator is an
        // integer matrix and B / gamma, C / gamma are 0/1 selections.
        let (model, sys) = example();
        let s = structured_matrices(&sys, &model);
        let g = fixtures::DEFAULT_GAMMA;
        assert_eq!(s.os.shape(), (4 * 3, 6));
        assert_eq!(s.cs.shape(), (6, 4 * 3));
        assert_eq!(exact_rank(&(&s.os / g)), 3);
        assert_eq!(exact_rank(&(&s.cs / g)), 3);
        assert_eq!(rank(&s.os, &cfg()), 3);
        assert_eq!(rank(&s.cs, &cfg()), 3);
    }

    #[test]
    fn example_structured_and_standard_kernels_agree() {
        let (model, sys) = example();
        let s = structured_matrices(&sys, &model);
        let (og, cg) = standard_matrices(&sys);
        let k_os = null_space(&s.os, &cfg()).basis;
        let k_og = null_space(&og, &cfg()).basis;
        assert_eq!(k_os.ncols(), 3);
        assert!(max_principal_angle(&k_os, &k_og) < 1e-10);
        let i_cs = range_basis(&s.cs, &cfg());
        let i_cg = range_basis(&cg, &cfg());
        assert!(max_principal_angle(&i_cs, &i_cg) < 1e-10);
    }

    #[test]
    fn horizon_independence_cases() {
        let horizons = [
            Horizon::new(0.0, 1.0).unwrap(),
            Horizon::new(0.0, 0.1).unwrap(),
            Horizon::new(-2.0, 3.0).unwrap(),
        ];
        let cases = [
            (fixtures::gzpg17(2.0, 1.0, fixtures::DEFAULT_GAMMA), 3),
            (fixtures::uncoupled(2, 1), 0),
            (fixtures::passive_cavity(1.0, 0.5), 2),
        ];
        for (model, expected) in cases {
            let sys = build_quadrature(&model);
            let report = verify_horizon_independence(&sys, &model, &horizons, &cfg(), 1e-8).unwrap();
            assert!(report.pass, "{report:?}");
            assert_eq!(report.ranks, vec![expected; 3]);
        }
    }

    #[test]
    fn stiff_horizon_is_shrunk() {
        let (model, sys) = example();
        let pair = gramian_pair(&sys, &model, Horizon::new(0.0, 100.0).unwrap()).unwrap();
        assert_eq!(pair.warnings.len(), 1);
        assert!(pair.horizon.duration() < 100.0);
        assert_eq!(pair.requested.s, 100.0);
        assert_eq!(rank(&pair.wo, &cfg()), 3);
    }

    fn arb_system() -> impl Strategy<Value = (SlhModel, QuadratureSystem)> {
        (any::<u64>(), 1usize..=3, 1usize..=2, any::<bool>()).prop_map(|(seed, n, m, planted)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let model = if planted && n >= 2 {
                fixtures::random_planted(&mut rng, n, m).model
            } else {
                fixtures::random_dense(&mut rng, n, m)
            };
            let sys = build_quadrature(&model);
            (model, sys)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn interleaved_sign_identity((model, sys) in arb_system()) {
            // blkdiag(J_m, -J_m, J_m, ...) C_s^T J_n = O_s
            let s = structured_matrices(&sys, &model);
            let (n, m) = (sys.n, sys.m);
            let mut signs = RealMatrix::zeros(2 * m * 2 * n, 2 * m * 2 * n);
            for k in 0..2 * n {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                signs.view_mut((2 * m * k, 2 * m * k), (2 * m, 2 * m)).copy_from(&(j_form(m) * sign));
            }
            let lhs = signs * s.cs.transpose() * j_form(n);
            let scale = max_abs(&s.os).max(1.0);
            prop_assert!(max_abs(&(lhs - &s.os)) <= 1e-12 * scale);
        }

        #[test]
        fn gramian_kernels_match_structured_matrices((model, sys) in arb_system()) {
            let pair = gramian_pair(&sys, &model, Horizon::default()).unwrap();
            let s = structured_matrices(&sys, &model);
            let k_wo = null_space(&pair.wo, &cfg()).basis;
            let k_os = null_space(&s.os, &cfg()).basis;
            prop_assert_eq!(k_wo.ncols(), k_os.ncols());
            prop_assert!(max_principal_angle(&k_wo, &k_os) <= 1e-7);
            let i_wc = range_basis(&pair.wc, &cfg());
            let i_cs = range_basis(&s.cs, &cfg());
            prop_assert_eq!(i_wc.ncols(), i_cs.ncols());
            prop_assert!(max_principal_angle(&i_wc, &i_cs) <= 1e-7);
        }

        #[test]
        fn duality_holds((model, sys) in arb_system()) {
            let pair = gramian_pair(&sys, &model, Horizon::default()).unwrap();
            let report = verify_duality(&pair, &cfg());
            prop_assert!(report.pass, "{:?}", report);
            prop_assert_eq!(&pair.wo, &pair.wo.transpose());
        }
    }
}
