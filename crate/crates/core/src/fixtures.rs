//! Built-in models: the three-mode SISO example with its published
//! canonical form, simple reference systems, and random generators.

use nalgebra::{Complex, DMatrix};
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::SlhModel;
use crate::symplectic::{ComplexMatrix, RealMatrix};

pub const DEFAULT_OMEGA: f64 = 2.0;
pub const DEFAULT_LAMBDA: f64 = 1.0;
pub const DEFAULT_GAMMA: f64 = std::f64::consts::SQRT_2;

/// Names accepted by [`builtin_example`].
pub const EXAMPLE_NAMES: [&str; 1] = ["gzpg17"];

/// Three modes with `H = w (q3^2 + p3^2)/2 + l q1 q3 + l q2 q3` and
/// `L = g (q3 + i p3)/sqrt2`.
pub fn gzpg17(omega: f64, lambda: f64, gamma: f64) -> SlhModel {
    let mut h = RealMatrix::zeros(6, 6);
    h[(0, 2)] = lambda;
    h[(2, 0)] = lambda;
    h[(1, 2)] = lambda;
    h[(2, 1)] = lambda;
    h[(2, 2)] = omega;
    h[(5, 5)] = omega;
    let g = gamma / std::f64::consts::SQRT_2;
    let mut re = RealMatrix::zeros(1, 6);
    let mut im = RealMatrix::zeros(1, 6);
    re[(0, 2)] = g;
    im[(0, 5)] = g;
    SlhModel::new(h, ComplexMatrix::new(re, im).expect("shapes agree"), 0.0).expect("example parameters are finite")
}

/// Looks up a built-in example by name.
pub fn builtin_example(name: &str, omega: f64, lambda: f64, gamma: f64) -> Result<SlhModel> {
    match name {
        "gzpg17" => {
            for (label, v) in [("omega", omega), ("lambda", lambda), ("gamma", gamma)] {
                if !v.is_finite() {
                    return Err(Error::InvalidInput(vec![format!("{label} must be finite, got {v}")]));
                }
            }
            Ok(gzpg17(omega, lambda, gamma))
        }
        other => Err(Error::UnknownExample(other.to_string())),
    }
}

/// Published transformation `[T_h | T_co | T_cbarobar]` for the example.
pub fn gzpg17_transformation() -> RealMatrix {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    #[rustfmt::skip]
    let entries = [
        0.0,  r,    0.0,  0.0,  0.5,  0.5,
        0.0,  r,    0.0,  0.0, -0.5, -0.5,
        0.0,  0.0, -r,   -r,    0.0,  0.0,
        -r,   0.0,  0.0,  0.0, -0.5,  0.5,
        -r,   0.0,  0.0,  0.0,  0.5, -0.5,
        0.0,  0.0,  r,   -r,    0.0,  0.0,
    ];
    RealMatrix::from_row_slice(6, 6, &entries)
}

/// Published secondary change of basis taking the canonical coordinates to
/// `(q3, (q1+q2)/sqrt2, (q1-q2)/sqrt2, p3, (p1+p2)/sqrt2, (p1-p2)/sqrt2)`.
pub fn gzpg17_secondary_transformation() -> RealMatrix {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    #[rustfmt::skip]
    let entries = [
        0.0,  0.0, -r,   -r,    0.0,  0.0,
        0.0,  1.0,  0.0,  0.0,  0.0,  0.0,
        0.0,  0.0,  0.0,  0.0,  r,    r,
        0.0,  0.0,  r,   -r,    0.0,  0.0,
        -1.0, 0.0,  0.0,  0.0,  0.0,  0.0,
        0.0,  0.0,  0.0,  0.0, -r,    r,
    ];
    RealMatrix::from_row_slice(6, 6, &entries)
}

/// Published canonical-form matrices of the example in the
/// `(cobar, cbaro | co | cbarobar)` coordinates.
#[derive(Clone, Debug)]
pub struct PublishedCanonicalForm {
    pub a_bar: RealMatrix,
    pub b_bar: RealMatrix,
    pub c_bar: RealMatrix,
    pub h_bar: RealMatrix,
    pub lambda_bar: ComplexMatrix,
}

pub fn gzpg17_canonical_form(omega: f64, lambda: f64, gamma: f64) -> PublishedCanonicalForm {
    let (w, l) = (omega, lambda);
    let k = gamma * gamma / 2.0;
    let g = gamma / std::f64::consts::SQRT_2;
    #[rustfmt::skip]
    let a_bar = RealMatrix::from_row_slice(6, 6, &[
        0.0, 0.0, -l,  -l,  0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, -l,  -k,  w,   0.0, 0.0,
        0.0, l,   -w,  -k,  0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
    ]);
    #[rustfmt::skip]
    let b_bar = RealMatrix::from_row_slice(6, 2, &[
        0.0, 0.0,
        0.0, 0.0,
        g,   -g,
        g,   g,
        0.0, 0.0,
        0.0, 0.0,
    ]);
    #[rustfmt::skip]
    let c_bar = RealMatrix::from_row_slice(2, 6, &[
        0.0, 0.0, -g, -g, 0.0, 0.0,
        0.0, 0.0, g,  -g, 0.0, 0.0,
    ]);
    #[rustfmt::skip]
    let h_bar = RealMatrix::from_row_slice(6, 6, &[
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, -l,  -l,  0.0, 0.0,
        0.0, -l,  w,   0.0, 0.0, 0.0,
        0.0, -l,  0.0, w,   0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
    ]);
    let half = gamma / 2.0;
    let mut lb_re = RealMatrix::zeros(1, 6);
    let mut lb_im = RealMatrix::zeros(1, 6);
    // -(1 - i) g/2 and -(1 + i) g/2
    lb_re[(0, 2)] = -half;
    lb_im[(0, 2)] = half;
    lb_re[(0, 3)] = -half;
    lb_im[(0, 3)] = -half;
    PublishedCanonicalForm {
        a_bar,
        b_bar,
        c_bar,
        h_bar,
        lambda_bar: ComplexMatrix::new(lb_re, lb_im).expect("shapes agree"),
    }
}

/// Single mode `H = w (q^2 + p^2)/2` with damping `L = sqrt(k/2) (q + i p)`.
pub fn passive_cavity(omega: f64, kappa: f64) -> SlhModel {
    let h = RealMatrix::identity(2, 2) * omega;
    let c = (kappa / 2.0).sqrt();
    let re = RealMatrix::from_row_slice(1, 2, &[c, 0.0]);
    let im = RealMatrix::from_row_slice(1, 2, &[0.0, c]);
    SlhModel::new(h, ComplexMatrix::new(re, im).expect("shapes agree"), 0.0).expect("parameters are finite")
}

/// `n` unit-frequency oscillators with no field coupling.
pub fn uncoupled(n: usize, m: usize) -> SlhModel {
    SlhModel::new(RealMatrix::identity(2 * n, 2 * n), ComplexMatrix::zeros(m, 2 * n), 0.0)
        .expect("identity is symmetric")
}

/// Dense model with uniform entries in `[-1, 1]`; generically fully
/// controllable and observable.
pub fn random_dense<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize) -> SlhModel {
    let x = RealMatrix::from_fn(2 * n, 2 * n, |_, _| rng.random_range(-1.0..1.0));
    let re = RealMatrix::from_fn(m, 2 * n, |_, _| rng.random_range(-1.0..1.0));
    let im = RealMatrix::from_fn(m, 2 * n, |_, _| rng.random_range(-1.0..1.0));
    SlhModel::new(
        (&x + x.transpose()) * 0.5,
        ComplexMatrix::new(re, im).expect("shapes agree"),
        0.0,
    )
    .expect("symmetric by construction")
}

/// A model with known subspace dimensions.
#[derive(Clone, Debug)]
pub struct PlantedModel {
    pub model: SlhModel,
    /// `(n1, n2, n3)`
    pub dims: (usize, usize, usize),
}

/// Random model with dimensions `(1, n - 2, 1)` for `n >= 2`.
///
/// Mode 1 is a damped oscillator driven by every field, mode 2 couples to it
/// through `q1 q2` only, and the remaining modes are free oscillators. The
/// state is then mixed by a random passive unitary, which keeps every
/// subspace dimension.
pub fn random_planted<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize) -> PlantedModel {
    assert!(n >= 2 && m >= 1, "planted models need n >= 2 and m >= 1");
    let mut h = RealMatrix::zeros(2 * n, 2 * n);
    let w0 = rng.random_range(0.5..2.0);
    h[(0, 0)] = w0;
    h[(n, n)] = w0;
    let coupling = rng.random_range(0.5..1.5) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    h[(0, 1)] = coupling;
    h[(1, 0)] = coupling;
    for k in 2..n {
        let w = rng.random_range(0.5..2.0);
        h[(k, k)] = w;
        h[(n + k, n + k)] = w;
    }
    let mut re = RealMatrix::zeros(m, 2 * n);
    let mut im = RealMatrix::zeros(m, 2 * n);
    for row in 0..m {
        re[(row, 0)] = rng.random_range(-1.0..1.0);
        im[(row, 0)] = rng.random_range(-1.0..1.0);
        re[(row, n)] = rng.random_range(-1.0..1.0);
        im[(row, n)] = rng.random_range(-1.0..1.0);
    }
    let o = random_passive_orthogonal(rng, n);
    let h = &o * h * o.transpose();
    let h = (&h + h.transpose()) * 0.5;
    let re = re * o.transpose();
    let im = im * o.transpose();
    let model =
        SlhModel::new(h, ComplexMatrix::new(re, im).expect("shapes agree"), 0.0).expect("symmetric by construction");
    PlantedModel {
        model,
        dims: (1, n - 2, 1),
    }
}

/// `[[Re U, -Im U], [Im U, Re U]]` for a random unitary `U`; orthogonal and
/// symplectic.
pub fn random_passive_orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> RealMatrix {
    let z = DMatrix::from_fn(n, n, |_, _| {
        Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let u = z.qr().q();
    let ur = u.map(|c| c.re);
    let ui = u.map(|c| c.im);
    let mut o = RealMatrix::zeros(2 * n, 2 * n);
    o.view_mut((0, 0), (n, n)).copy_from(&ur);
    o.view_mut((0, n), (n, n)).copy_from(&(-&ui));
    o.view_mut((n, 0), (n, n)).copy_from(&ui);
    o.view_mut((n, n), (n, n)).copy_from(&ur);
    o
}
