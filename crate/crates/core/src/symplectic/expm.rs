//! Matrix exponential via scaling-and-squaring with a degree-13 Padé
//! approximant, and the block-exponential evaluation of Gramian integrals.

use super::{ensure_finite, ensure_square, max_abs, RealMatrix};
use crate::error::{Error, Result};

/// Padé(13,13) numerator coefficients `b_0..b_13`.
const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

/// Largest 1-norm for which the unscaled degree-13 approximant meets unit roundoff.
const THETA_13: f64 = 5.371_920_351_148_152;

fn one_norm(m: &RealMatrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `e^M` for a square real matrix.
pub fn mat_exp(m: &RealMatrix) -> Result<RealMatrix> {
    let n = ensure_square(m, "matrix exponential argument")?;
    ensure_finite(m, "matrix exponential argument")?;
    if n == 0 {
        return Ok(RealMatrix::zeros(0, 0));
    }

    let norm = one_norm(m);
    let squarings = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as i32
    } else {
        0
    };
    let scaled = m * 2f64.powi(-squarings);

    let id = RealMatrix::identity(n, n);
    let a2 = &scaled * &scaled;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &PADE13;

    let u_inner = &a6 * (b[13] * &a6 + b[11] * &a4 + b[9] * &a2) + b[7] * &a6 + b[5] * &a4 + b[3] * &a2 + b[1] * &id;
    let u = &scaled * u_inner;
    let v = &a6 * (b[12] * &a6 + b[10] * &a4 + b[8] * &a2) + b[6] * &a6 + b[4] * &a4 + b[2] * &a2 + b[0] * &id;

    let mut r = (&v - &u)
        .lu()
        .solve(&(&v + &u))
        .ok_or(Error::Numerical("singular Padé denominator"))?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    ensure_finite(&r, "matrix exponential result")?;
    Ok(r)
}

/// `∫_0^h e^{Mσ} Q e^{M^T σ} dσ` via Van Loan's block exponential.
///
/// `exp(h [[-M, Q], [0, M^T]]) = [[F11, F12], [0, F22]]` and the integral
/// equals `F22^T F12`. The result is symmetrized.
pub fn van_loan_gramian(m: &RealMatrix, q: &RealMatrix, h: f64) -> Result<RealMatrix> {
    let n = ensure_square(m, "Gramian generator")?;
    if q.shape() != (n, n) {
        return Err(Error::Dimension {
            context: "Gramian weight matrix",
            expected: format!("{n}x{n}"),
            found: format!("{}x{}", q.nrows(), q.ncols()),
        });
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidDuration(h));
    }
    let asym = max_abs(&(q - q.transpose()));
    if asym > 1e-12 * max_abs(q).max(1.0) {
        return Err(Error::Asymmetric {
            what: "Gramian weight matrix",
            residual: asym,
        });
    }

    let mut block = RealMatrix::zeros(2 * n, 2 * n);
    block.view_mut((0, 0), (n, n)).copy_from(&(-m));
    block.view_mut((0, n), (n, n)).copy_from(q);
    block.view_mut((n, n), (n, n)).copy_from(&m.transpose());
    let f = mat_exp(&(block * h))?;
    let f12 = f.view((0, n), (n, n));
    let f22 = f.view((n, n), (n, n));
    let w = f22.transpose() * f12;
    Ok((&w + w.transpose()) * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::j_form;
    use nalgebra::dmatrix;
    use proptest::prelude::*;

    fn close(a: &RealMatrix, b: &RealMatrix, tol: f64) -> bool {
        a.shape() == b.shape() && max_abs(&(a - b)) <= tol
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let e = mat_exp(&RealMatrix::zeros(3, 3)).unwrap();
        assert_eq!(e, RealMatrix::identity(3, 3));
        assert_eq!(mat_exp(&RealMatrix::zeros(0, 0)).unwrap().shape(), (0, 0));
    }

    #[test]
    fn exp_of_rotation_generator() {
        for theta in [0.3, std::f64::consts::FRAC_PI_2, 2.0, 17.0] {
            let e = mat_exp(&(j_form(1) * theta)).unwrap();
            let (s, c) = theta.sin_cos();
            assert!(close(&e, &dmatrix![c, s; -s, c], 1e-13), "theta = {theta}");
        }
    }

    #[test]
    fn exp_of_diagonal() {
        let e = mat_exp(&dmatrix![1.0, 0.0; 0.0, 2.0]).unwrap();
        let expected = dmatrix![1f64.exp(), 0.0; 0.0, 2f64.exp()];
        assert!(close(&e, &expected, 1e-14 * 2f64.exp()));
    }

    #[test]
    fn exp_of_nilpotent() {
        // e^N = I + N + N^2/2 for N strictly upper triangular 3x3
        let nil = dmatrix![0.0, 1.0, 2.0; 0.0, 0.0, 3.0; 0.0, 0.0, 0.0];
        let expected = RealMatrix::identity(3, 3) + &nil + (&nil * &nil) * 0.5;
        assert!(close(&mat_exp(&nil).unwrap(), &expected, 1e-14));
    }

    #[test]
    fn exp_rejects_non_square() {
        assert!(matches!(
            mat_exp(&RealMatrix::zeros(2, 3)),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn gramian_constant_integrand() {
        let w = van_loan_gramian(&RealMatrix::zeros(2, 2), &RealMatrix::identity(2, 2), 1.0).unwrap();
        assert!(close(&w, &RealMatrix::identity(2, 2), 1e-15));
    }

    #[test]
    fn gramian_lyapunov_limit() {
        let m = -RealMatrix::identity(2, 2);
        let w = van_loan_gramian(&m, &RealMatrix::identity(2, 2), 40.0).unwrap();
        assert!(close(&w, &(RealMatrix::identity(2, 2) * 0.5), 1e-14));
    }

    #[test]
    fn gramian_argument_errors() {
        let m = RealMatrix::zeros(2, 2);
        let q = dmatrix![1.0, 2.0; 0.0, 1.0];
        assert!(matches!(van_loan_gramian(&m, &q, 1.0), Err(Error::Asymmetric { .. })));
        let i = RealMatrix::identity(2, 2);
        assert!(matches!(van_loan_gramian(&m, &i, 0.0), Err(Error::InvalidDuration(_))));
        assert!(matches!(van_loan_gramian(&m, &i, -1.0), Err(Error::InvalidDuration(_))));
    }

    /// Composite Simpson quadrature of the defining integral, independent of
    /// the block-exponential route. `e^{Mσ}` is advanced by repeated
    /// multiplication with a single step exponential.
    fn simpson_gramian(m: &RealMatrix, q: &RealMatrix, h: f64, panels: usize) -> RealMatrix {
        assert!(panels.is_multiple_of(2));
        let n = m.nrows();
        let step = h / panels as f64;
        let step_exp = mat_exp(&(m * step)).unwrap();
        let mut e = RealMatrix::identity(n, n);
        let mut acc = RealMatrix::zeros(n, n);
        for k in 0..=panels {
            let weight = if k == 0 || k == panels {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += weight * (&e * q * e.transpose());
            e = &e * &step_exp;
        }
        acc * (step / 3.0)
    }

    fn scaled_generator(entries: &[f64], bound: f64) -> RealMatrix {
        let mut m = RealMatrix::from_row_slice(4, 4, entries);
        let inf_norm = m
            .row_iter()
            .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        if inf_norm > bound {
            m *= bound / inf_norm;
        }
        m
    }

    #[test]
    fn gramian_matches_quadrature_at_large_norm() {
        // ||M|| = 10, h = 2: entries grow like e^{40}, so compare relatively.
        let entries: Vec<f64> = (0..16).map(|k| ((k * 7 % 11) as f64 - 5.0) / 5.0).collect();
        let m = scaled_generator(&entries, 10.0);
        let b = RealMatrix::from_fn(4, 2, |i, j| if i == j { 1.0 } else { 0.25 });
        let q = &b * b.transpose();
        let w = van_loan_gramian(&m, &q, 2.0).unwrap();
        let oracle = simpson_gramian(&m, &q, 2.0, 40_000);
        let scale = max_abs(&oracle);
        assert!(max_abs(&(&w - &oracle)) <= 1e-8 * scale);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn gramian_matches_quadrature(
            entries in proptest::collection::vec(-1.0..1.0f64, 16),
            weights in proptest::collection::vec(-1.0..1.0f64, 8),
            h in 0.2..2.0f64,
        ) {
            let m = scaled_generator(&entries, 1.5);
            let b = RealMatrix::from_row_slice(4, 2, &weights);
            let q = &b * b.transpose();
            let w = van_loan_gramian(&m, &q, h).unwrap();
            let oracle = simpson_gramian(&m, &q, h, 2000);
            prop_assert!(close(&w, &oracle, 1e-8));
            prop_assert_eq!(&w, &w.transpose());
            let eig = w.clone().symmetric_eigenvalues();
            prop_assert!(eig.iter().all(|&l| l >= -1e-12));
        }

        #[test]
        fn exp_satisfies_group_law(
            entries in proptest::collection::vec(-2.0..2.0f64, 9),
            t in 0.1..1.5f64,
        ) {
            let m = RealMatrix::from_row_slice(3, 3, &entries);
            let lhs = mat_exp(&(&m * t)).unwrap() * mat_exp(&(&m * (1.0 - t))).unwrap();
            let rhs = mat_exp(&m).unwrap();
            let scale = max_abs(&rhs).max(1.0);
            prop_assert!(close(&lhs, &rhs, 1e-12 * scale));
        }
    }
}
