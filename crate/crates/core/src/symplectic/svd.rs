//! Singular value decompositions backed by faer.

use faer::{c64, Mat};
use nalgebra::{Complex, DMatrix};

use super::RealMatrix;

/// Full SVD `M = U diag(s) V^T` with square `U`, `V` and `s` descending.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: RealMatrix,
    pub singular_values: Vec<f64>,
    pub v: RealMatrix,
}

fn to_faer(m: &RealMatrix) -> Mat<f64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Full SVD of a real matrix of any shape.
pub fn svd(m: &RealMatrix) -> Svd {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Svd {
            u: RealMatrix::identity(rows, rows),
            singular_values: Vec::new(),
            v: RealMatrix::identity(cols, cols),
        };
    }
    let f = to_faer(m).svd().expect("SVD iteration converges");
    let (u, s, v) = (f.U(), f.S().column_vector(), f.V());
    Svd {
        u: RealMatrix::from_fn(rows, rows, |i, j| u[(i, j)]),
        singular_values: (0..s.nrows()).map(|i| s[i]).collect(),
        v: RealMatrix::from_fn(cols, cols, |i, j| v[(i, j)]),
    }
}

/// Singular values of a real matrix, descending.
pub fn singular_values(m: &RealMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    to_faer(m).singular_values().expect("SVD iteration converges")
}

/// Singular values of a complex matrix, descending.
pub fn complex_singular_values(m: &DMatrix<Complex<f64>>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let f = Mat::<c64>::from_fn(m.nrows(), m.ncols(), |i, j| c64::new(m[(i, j)].re, m[(i, j)].im));
    f.singular_values().expect("SVD iteration converges")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::max_abs;
    use proptest::prelude::*;

    fn reconstruct(f: &Svd, rows: usize, cols: usize) -> RealMatrix {
        let mut sigma = RealMatrix::zeros(rows, cols);
        for (i, s) in f.singular_values.iter().enumerate() {
            sigma[(i, i)] = *s;
        }
        &f.u * sigma * f.v.transpose()
    }

    #[test]
    fn rank_three_product_has_exact_trailing_zeros() {
        // Rank-3 product that tripped the previous backend.
        #[rustfmt::skip]
        let m = RealMatrix::from_row_slice(8, 7, &[
            -0.36771717208626664, -0.10929106778448883, -0.39385766906055597, -0.24529801137595386, -0.3991993602673813, -0.45511185299275825, 1.4979223906445704,
            -0.1935746345228406, 0.7747101980362563, -0.14256523185525485, -0.41799126440469697, -0.17002082098818905, 0.5052904923340955, -0.3498650004730226,
            -0.6840744350133415, 0.24752987001744184, -0.4927179728168892, 0.44823340507408493, 0.08996114791170423, -0.5204550339422646, -0.2203506689443643,
            0.49355287447540275, -0.6611794595732075, 0.4040830721556451, 0.29022563067796303, 0.2527557278107722, -0.08892871871893127, -0.18589339938688015,
            0.5254653102473661, -0.28619836300717316, 0.28390587239360854, -0.7619780438516432, -0.41840280998759816, 0.34666980637155154, 1.3166755801383778,
            -0.2904643684005609, 0.16912805931080016, -0.21755178142691112, 0.09911539664179875, -0.011434887038210335, -0.15866029508690344, -0.02573159634345229,
            -0.8263958879499202, 0.6403937895125084, -0.6290056887588042, 0.11051253976124167, -0.11367289231906882, -0.30043812091437017, -0.029175537110786354,
            0.34981135022811927, -0.800210415158877, 0.3445033801710342, 0.7553200526007351, 0.49522617987968587, -0.3914712342107417, -0.6570576216828548,
        ]);
        let f = svd(&m);
        assert!(max_abs(&(reconstruct(&f, 8, 7) - &m)) < 1e-13);
        let expected = [2.49763450, 2.22760365, 1.57414830];
        for (s, e) in f.singular_values.iter().zip(expected) {
            assert!((s - e).abs() < 1e-8, "{s} vs {e}");
        }
        assert!(f.singular_values[3..].iter().all(|&s| s < 1e-14));
    }

    #[test]
    fn empty_shapes() {
        let f = svd(&RealMatrix::zeros(3, 0));
        assert_eq!(f.u.shape(), (3, 3));
        assert!(f.singular_values.is_empty());
        assert!(singular_values(&RealMatrix::zeros(0, 2)).is_empty());
    }

    #[test]
    fn hermitian_singular_values_are_absolute_eigenvalues() {
        let i = Complex::new(0.0, 1.0);
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[Complex::new(3.0, 0.0), 4.0 * i, -4.0 * i, Complex::new(3.0, 0.0)],
        );
        // Hermitian with eigenvalues 3 +- 4.
        let s = complex_singular_values(&m);
        assert!((s[0] - 7.0).abs() < 1e-14 && (s[1] - 1.0).abs() < 1e-14, "{s:?}");
    }

    proptest! {
        #[test]
        fn rank_deficient_products_reconstruct(
            rows in 1usize..9,
            cols in 1usize..9,
            k in 0usize..9,
            seed in proptest::collection::vec(-1.0..1.0f64, 128),
        ) {
            let k = k.min(rows).min(cols);
            let left = RealMatrix::from_fn(rows, k, |i, j| seed[i * 8 + j]);
            let right = RealMatrix::from_fn(k, cols, |i, j| seed[64 + i * 8 + j]);
            let m = &left * &right;
            let f = svd(&m);
            prop_assert!(max_abs(&(reconstruct(&f, rows, cols) - &m)) < 1e-13);
            prop_assert!(max_abs(&(f.u.transpose() * &f.u - RealMatrix::identity(rows, rows))) < 1e-13);
            prop_assert!(max_abs(&(f.v.transpose() * &f.v - RealMatrix::identity(cols, cols))) < 1e-13);
            prop_assert!(f.singular_values.windows(2).all(|w| w[0] >= w[1]));
        }
    }
}
