//! Block-symplectic orthogonal transformation to Kalman canonical form.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gramians::GramianPair;
use crate::model::{QuadratureSystem, SlhModel};
use crate::subspaces::KalmanSubspaces;
use crate::symplectic::{
    block_j_form, complex_singular_values, hstack, is_hamiltonian, j_form, max_abs, orthonormalize_against, projector,
    ComplexMatrix, RealMatrix,
};

/// Seed vectors whose residual falls below this are skipped.
pub const SEED_TOL: f64 = 1e-8;

/// Column order of the transformation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ordering {
    /// `cobar | co | cbarobar | cbaro`
    #[serde(rename = "T")]
    T,
    /// `cobar | cbaro | co | cbarobar`
    #[default]
    #[serde(rename = "Ttilde")]
    Ttilde,
}

impl FromStr for Ordering {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "T" => Ok(Ordering::T),
            "Ttilde" => Ok(Ordering::Ttilde),
            other => Err(Error::InvalidInput(vec![format!(
                "ordering must be \"T\" or \"Ttilde\", got {other:?}"
            )])),
        }
    }
}

impl fmt::Display for Ordering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ordering::T => "T",
            Ordering::Ttilde => "Ttilde",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Block {
    Cobar,
    Co,
    Cbarobar,
    Cbaro,
}

impl Block {
    pub const ALL: [Block; 4] = [Block::Cobar, Block::Co, Block::Cbarobar, Block::Cbaro];

    pub fn label(self) -> &'static str {
        match self {
            Block::Cobar => "cobar",
            Block::Co => "co",
            Block::Cbarobar => "cbarobar",
            Block::Cbaro => "cbaro",
        }
    }
}

/// `(n1, n2, n3)`: `R_co` has dimension `2 n1`, `R_cbarobar` has `2 n2`,
/// `R_cobar` and `R_cbaro` have `n3` each.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
}

impl Dims {
    pub fn state_dim(&self) -> usize {
        2 * (self.n1 + self.n2 + self.n3)
    }

    pub fn width(&self, b: Block) -> usize {
        match b {
            Block::Cobar | Block::Cbaro => self.n3,
            Block::Co => 2 * self.n1,
            Block::Cbarobar => 2 * self.n2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockLayout {
    pub ordering: Ordering,
    pub dims: Dims,
}

impl BlockLayout {
    pub fn order(&self) -> [Block; 4] {
        match self.ordering {
            Ordering::T => [Block::Cobar, Block::Co, Block::Cbarobar, Block::Cbaro],
            Ordering::Ttilde => [Block::Cobar, Block::Cbaro, Block::Co, Block::Cbarobar],
        }
    }

    /// Row/column range of a block in transformed coordinates.
    pub fn range(&self, b: Block) -> Range<usize> {
        let mut start = 0;
        for x in self.order() {
            let w = self.dims.width(x);
            if x == b {
                return start..start + w;
            }
            start += w;
        }
        unreachable!("every block appears in the ordering")
    }

    /// Form `T^T J T` expected from a block-symplectic `T`.
    pub fn target_form(&self) -> RealMatrix {
        let d = self.dims;
        match self.ordering {
            Ordering::Ttilde => block_j_form(&[d.n3, d.n1, d.n2]),
            Ordering::T => {
                // The h pair is split around co and cbarobar.
                let dim = d.state_dim();
                let mut f = RealMatrix::zeros(dim, dim);
                let co = self.range(Block::Co);
                let cc = self.range(Block::Cbarobar);
                f.view_mut((co.start, co.start), (co.len(), co.len()))
                    .copy_from(&j_form(d.n1));
                f.view_mut((cc.start, cc.start), (cc.len(), cc.len()))
                    .copy_from(&j_form(d.n2));
                let a = self.range(Block::Cobar);
                let b = self.range(Block::Cbaro);
                for k in 0..d.n3 {
                    f[(a.start + k, b.start + k)] = 1.0;
                    f[(b.start + k, a.start + k)] = -1.0;
                }
                f
            }
        }
    }
}

/// `[V | J^T V]` spanning a `J`-invariant subspace, with
/// `block^T block = I` and `block^T J block = J_k`.
#[derive(Clone, Debug)]
pub struct SymplecticBlockBasis {
    pub block: RealMatrix,
}

impl SymplecticBlockBasis {
    pub fn k(&self) -> usize {
        self.block.ncols() / 2
    }
}

/// Pairs up an orthonormal basis of a `J`-invariant subspace.
///
/// Standard basis vectors are projected onto the subspace in index order;
/// the first with a residual above [`SEED_TOL`] after removing the vectors
/// collected so far gives a unit `w = [e; f]`. Then `u = (w + J w)/sqrt2 =
/// [e + f; f - e]/sqrt2` and its partner `J^T u = [e - f; e + f]/sqrt2` are
/// collected, all `u` first, then all partners.
pub fn symplectic_pair_basis(basis: &RealMatrix, tol: f64) -> Result<SymplecticBlockBasis> {
    let (d, dim) = basis.shape();
    if dim % 2 != 0 || d % 2 != 0 {
        return Err(Error::OddSubspace {
            name: "pairing input",
            dim,
        });
    }
    let n = d / 2;
    let k = dim / 2;
    let j = j_form(n);
    let p = projector(basis);
    let residual = max_abs(&((RealMatrix::identity(d, d) - &p) * &j * &p));
    if residual > tol {
        return Err(Error::NotJInvariant { residual });
    }

    let mut collected = RealMatrix::zeros(d, 0);
    let mut firsts = Vec::with_capacity(k);
    let mut partners = Vec::with_capacity(k);
    while firsts.len() < k {
        let w = (0..d).find_map(|i| {
            let v = p.column(i).into_owned();
            orthonormalize_against(&v, &collected, SEED_TOL)
        });
        let Some(w) = w else {
            return Err(Error::PairingExhausted {
                found: firsts.len(),
                wanted: k,
            });
        };
        let sum: DVector<f64> = &w + &j * &w;
        let norm = sum.norm();
        if norm < SEED_TOL {
            // |w + J w|^2 = 2 for every unit w since w^T J w = 0.
            return Err(Error::Numerical("degenerate pairing vector"));
        }
        let u = sum / norm;
        let partner = j.transpose() * &u;
        collected = hstack(
            d,
            &[&collected, &RealMatrix::from_columns(&[u.clone(), partner.clone()])],
        );
        firsts.push(u);
        partners.push(partner);
    }
    let mut block = RealMatrix::zeros(d, 2 * k);
    for (i, (u, v)) in firsts.iter().zip(&partners).enumerate() {
        block.set_column(i, u);
        block.set_column(k + i, v);
    }
    Ok(SymplecticBlockBasis { block })
}

/// Column blocks of the transformation.
#[derive(Clone, Debug)]
pub struct Transformation {
    pub cobar: RealMatrix,
    pub co: RealMatrix,
    pub cbarobar: RealMatrix,
    pub cbaro: RealMatrix,
    pub dims: Dims,
}

impl Transformation {
    pub fn block(&self, b: Block) -> &RealMatrix {
        match b {
            Block::Cobar => &self.cobar,
            Block::Co => &self.co,
            Block::Cbarobar => &self.cbarobar,
            Block::Cbaro => &self.cbaro,
        }
    }

    pub fn state_dim(&self) -> usize {
        self.dims.state_dim()
    }

    pub fn matrix(&self, ordering: Ordering) -> RealMatrix {
        let layout = BlockLayout {
            ordering,
            dims: self.dims,
        };
        let parts: Vec<&RealMatrix> = layout.order().iter().map(|&b| self.block(b)).collect();
        hstack(self.state_dim(), &parts)
    }

    /// `[T_cobar | T_cbaro]`
    pub fn t_h(&self) -> RealMatrix {
        hstack(self.state_dim(), &[&self.cobar, &self.cbaro])
    }

    /// Splits a full transformation matrix into its blocks.
    pub fn from_matrix(t: &RealMatrix, layout: BlockLayout) -> Result<Self> {
        let d = layout.dims.state_dim();
        if t.shape() != (d, d) {
            return Err(Error::Dimension {
                context: "transformation matrix",
                expected: format!("{d}x{d}"),
                found: format!("{}x{}", t.nrows(), t.ncols()),
            });
        }
        let cols = |b: Block| {
            let r = layout.range(b);
            t.columns(r.start, r.len()).into_owned()
        };
        Ok(Self {
            cobar: cols(Block::Cobar),
            co: cols(Block::Co),
            cbarobar: cols(Block::Cbarobar),
            cbaro: cols(Block::Cbaro),
            dims: layout.dims,
        })
    }
}

/// `T_cobar` is the `R_cobar` basis, `T_cbaro = J^T T_cobar`, and `T_co`,
/// `T_cbarobar` come from [`symplectic_pair_basis`].
pub fn build_transformation(subs: &KalmanSubspaces, tol: f64) -> Result<Transformation> {
    let d = subs.state_dim();
    let j = j_form(d / 2);
    let co = symplectic_pair_basis(&subs.co, tol)?.block;
    let cbarobar = symplectic_pair_basis(&subs.cbarobar, tol)?.block;
    let cobar = subs.cobar.clone();
    let cbaro = j.transpose() * &cobar;
    Ok(Transformation {
        cobar,
        co,
        cbarobar,
        cbaro,
        dims: Dims {
            n1: subs.n1,
            n2: subs.n2,
            n3: subs.n3,
        },
    })
}

/// System matrices in the coordinates `x_bar = T^T x`.
#[derive(Clone, Debug)]
pub struct CanonicalForm {
    pub layout: BlockLayout,
    pub t: RealMatrix,
    pub a_raw: RealMatrix,
    pub a_clean: RealMatrix,
    pub b_raw: RealMatrix,
    pub b_clean: RealMatrix,
    pub c_raw: RealMatrix,
    pub c_clean: RealMatrix,
    /// `T^T Ham T`
    pub h_bar: RealMatrix,
    /// `Lambda T`
    pub lambda_bar: ComplexMatrix,
}

impl CanonicalForm {
    pub fn a_block(&self, row: Block, col: Block) -> RealMatrix {
        sub_block(&self.a_raw, self.layout.range(row), self.layout.range(col))
    }

    pub fn b_block(&self, row: Block) -> RealMatrix {
        let r = self.layout.range(row);
        self.b_raw.rows(r.start, r.len()).into_owned()
    }

    pub fn c_block(&self, col: Block) -> RealMatrix {
        let r = self.layout.range(col);
        self.c_raw.columns(r.start, r.len()).into_owned()
    }
}

fn sub_block(m: &RealMatrix, rows: Range<usize>, cols: Range<usize>) -> RealMatrix {
    m.view((rows.start, cols.start), (rows.len(), cols.len())).into_owned()
}

fn clean(m: &RealMatrix, tol: f64) -> RealMatrix {
    m.map(|x| if x.abs() <= tol { 0.0 } else { x })
}

/// `A_bar = T^T A T`, `B_bar = T^T B`, `C_bar = C T`, `H_bar = T^T Ham T`,
/// `Lambda_bar = Lambda T`. Cleaned copies zero entries at most `clean_tol`.
pub fn apply_transformation(
    sys: &QuadratureSystem,
    model: &SlhModel,
    t: &RealMatrix,
    layout: BlockLayout,
    clean_tol: f64,
) -> Result<CanonicalForm> {
    let d = 2 * sys.n;
    if t.shape() != (d, d) || layout.dims.state_dim() != d {
        return Err(Error::Dimension {
            context: "transformation matrix",
            expected: format!("{d}x{d}"),
            found: format!("{}x{}", t.nrows(), t.ncols()),
        });
    }
    let a_raw = t.transpose() * &sys.a * t;
    let b_raw = t.transpose() * &sys.b;
    let c_raw = &sys.c * t;
    Ok(CanonicalForm {
        layout,
        t: t.clone(),
        a_clean: clean(&a_raw, clean_tol),
        b_clean: clean(&b_raw, clean_tol),
        c_clean: clean(&c_raw, clean_tol),
        a_raw,
        b_raw,
        c_raw,
        h_bar: t.transpose() * model.hamiltonian() * t,
        lambda_bar: model.coupling().mul_real(t),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StructureReport {
    /// `max |T^T T - I|`
    pub orthogonality: f64,
    /// `max |T^T J T - target|` for the block symplectic form of the ordering.
    pub block_symplectic: f64,
    /// Largest structurally zero entry of `A_bar`, `B_bar`, `C_bar`,
    /// relative to `max(1, max |M|)`.
    pub structural_zeros: f64,
    /// Largest structurally zero entry of `T^T W_c T` and `T^T W_o T`,
    /// relative to `max(1, max |W|)`.
    pub gramian_pattern: f64,
    /// Hamiltonian-matrix residual of the `h` block.
    pub hamiltonian_h: f64,
    /// Hamiltonian-matrix residual of the `cbarobar` block.
    pub hamiltonian_cbarobar: f64,
    /// Largest residual of the invariance inclusions for `A`, `B`, `C`.
    pub invariance: f64,
    pub structure_pass: bool,
    pub hamiltonian_pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StructureTolerances {
    pub orthogonality: f64,
    pub structural: f64,
    pub hamiltonian: f64,
}

impl Default for StructureTolerances {
    fn default() -> Self {
        Self {
            orthogonality: 1e-10,
            structural: 1e-8,
            hamiltonian: 1e-8,
        }
    }
}

fn rel_max_over(m: &RealMatrix, layout: &BlockLayout, zeros: &[(Option<Block>, Option<Block>)]) -> f64 {
    let scale = max_abs(m).max(1.0);
    let whole = |len: usize| 0..len;
    zeros
        .iter()
        .map(|&(r, c)| {
            let rows = r.map_or_else(|| whole(m.nrows()), |b| layout.range(b));
            let cols = c.map_or_else(|| whole(m.ncols()), |b| layout.range(b));
            max_abs(&sub_block(m, rows, cols))
        })
        .fold(0.0, f64::max)
        / scale
}

/// `A_h = [[A_h11, A_h12], [A_h21, A_h22]]` from the `cobar` and `cbaro` blocks.
pub fn h_block(form: &CanonicalForm) -> RealMatrix {
    let n3 = form.layout.dims.n3;
    let mut a = RealMatrix::zeros(2 * n3, 2 * n3);
    let parts = [Block::Cobar, Block::Cbaro];
    for (i, &r) in parts.iter().enumerate() {
        for (k, &c) in parts.iter().enumerate() {
            a.view_mut((i * n3, k * n3), (n3, n3)).copy_from(&form.a_block(r, c));
        }
    }
    a
}

/// Zero patterns, Gramian patterns, Hamiltonian blocks and invariance.
pub fn verify_canonical_structure(
    sys: &QuadratureSystem,
    form: &CanonicalForm,
    gram: &GramianPair,
    tol: &StructureTolerances,
) -> Result<StructureReport> {
    use Block::*;
    let layout = form.layout;
    let dims = layout.dims;
    let d = dims.state_dim();
    let t = &form.t;
    let id = RealMatrix::identity(d, d);

    let orthogonality = max_abs(&(t.transpose() * t - &id));
    let block_symplectic = max_abs(&(t.transpose() * j_form(d / 2) * t - layout.target_form()));

    let a_zero = [
        (Some(Co), Some(Cobar)),
        (Some(Co), Some(Cbarobar)),
        (Some(Cbarobar), Some(Cobar)),
        (Some(Cbarobar), Some(Co)),
        (Some(Cbaro), Some(Cobar)),
        (Some(Cbaro), Some(Co)),
        (Some(Cbaro), Some(Cbarobar)),
    ];
    let b_zero = [(Some(Cbarobar), None), (Some(Cbaro), None)];
    let c_zero = [(None, Some(Cobar)), (None, Some(Cbarobar))];
    let structural_zeros = rel_max_over(&form.a_raw, &layout, &a_zero)
        .max(rel_max_over(&form.b_raw, &layout, &b_zero))
        .max(rel_max_over(&form.c_raw, &layout, &c_zero));

    // T^T W_c T lives on cobar/co, T^T W_o T on co/cbaro.
    let wc = t.transpose() * &gram.wc * t;
    let wo = t.transpose() * &gram.wo * t;
    let outside = |keep: [Block; 2]| -> Vec<(Option<Block>, Option<Block>)> {
        let drop: Vec<Block> = Block::ALL.into_iter().filter(|b| !keep.contains(b)).collect();
        drop.iter().flat_map(|&b| [(Some(b), None), (None, Some(b))]).collect()
    };
    let gramian_pattern =
        rel_max_over(&wc, &layout, &outside([Cobar, Co])).max(rel_max_over(&wo, &layout, &outside([Co, Cbaro])));

    let hamiltonian_h = if dims.n3 == 0 {
        0.0
    } else {
        is_hamiltonian(&h_block(form), &j_form(dims.n3), 0.0)?.residual
    };
    let hamiltonian_cbarobar = if dims.n2 == 0 {
        0.0
    } else {
        is_hamiltonian(&form.a_block(Cbarobar, Cbarobar), &j_form(dims.n2), 0.0)?.residual
    };

    let proj = |b: Block| projector(&t.columns(layout.range(b).start, dims.width(b)).into_owned());
    let (p_cobar, p_co, p_cbarobar) = (proj(Cobar), proj(Co), proj(Cbarobar));
    let a = &sys.a;
    let a_scale = max_abs(a).max(1.0);
    let invariance = [
        max_abs(&((&id - &p_cobar) * a * &p_cobar)) / a_scale,
        max_abs(&((&id - &p_cobar - &p_co) * a * &p_co)) / a_scale,
        max_abs(&((&id - &p_cobar - &p_cbarobar) * a * &p_cbarobar)) / a_scale,
        max_abs(&((&id - &p_cobar - &p_co) * &sys.b)) / max_abs(&sys.b).max(1.0),
        max_abs(&(&sys.c * (&p_cobar + &p_cbarobar))) / max_abs(&sys.c).max(1.0),
    ]
    .into_iter()
    .fold(0.0, f64::max);

    let structure_pass = orthogonality <= tol.orthogonality
        && block_symplectic <= tol.orthogonality
        && structural_zeros <= tol.structural
        && gramian_pattern <= tol.structural
        && invariance <= tol.structural;
    let hamiltonian_pass = hamiltonian_h <= tol.hamiltonian && hamiltonian_cbarobar <= tol.hamiltonian;
    Ok(StructureReport {
        orthogonality,
        block_symplectic,
        structural_zeros,
        gramian_pattern,
        hamiltonian_h,
        hamiltonian_cbarobar,
        invariance,
        structure_pass,
        hamiltonian_pass,
    })
}

#[derive(Clone, Debug)]
pub struct StateSpace {
    pub a: RealMatrix,
    pub b: RealMatrix,
    pub c: RealMatrix,
}

impl StateSpace {
    pub fn dim(&self) -> usize {
        self.a.nrows()
    }
}

#[derive(Clone, Debug)]
pub struct Subsystems {
    /// Controllable and observable part.
    pub co: StateSpace,
    /// `h` part: `(cobar, cbaro)` with `B = [B_h; 0]` and `C = [0, C_h]`.
    pub h: StateSpace,
    /// Drift of the decoherence-free part.
    pub cbarobar: RealMatrix,
}

pub fn extract_subsystems(form: &CanonicalForm) -> Subsystems {
    use Block::*;
    let n3 = form.layout.dims.n3;
    let (p, q) = (form.c_raw.nrows(), form.b_raw.ncols());
    let mut b_h = RealMatrix::zeros(2 * n3, q);
    b_h.view_mut((0, 0), (n3, q)).copy_from(&form.b_block(Cobar));
    let mut c_h = RealMatrix::zeros(p, 2 * n3);
    c_h.view_mut((0, n3), (p, n3)).copy_from(&form.c_block(Cbaro));
    Subsystems {
        co: StateSpace {
            a: form.a_block(Co, Co),
            b: form.b_block(Co),
            c: form.c_block(Co),
        },
        h: StateSpace {
            a: h_block(form),
            b: b_h,
            c: c_h,
        },
        cbarobar: form.a_block(Cbarobar, Cbarobar),
    }
}

fn complexify(m: &RealMatrix) -> DMatrix<Complex<f64>> {
    m.map(|x| Complex::new(x, 0.0))
}

/// `C (s I - A)^-1 B`; fails when `s I - A` is numerically singular.
pub fn transfer_function(ss: &StateSpace, s: Complex<f64>) -> Result<DMatrix<Complex<f64>>> {
    let k = ss.dim();
    let (p, q) = (ss.c.nrows(), ss.b.ncols());
    if k == 0 {
        return Ok(DMatrix::zeros(p, q));
    }
    let m = DMatrix::from_diagonal_element(k, k, s) - complexify(&ss.a);
    let sv = complex_singular_values(&m);
    let scale = sv[0].max(1.0);
    if sv[k - 1] <= 1e-10 * scale {
        return Err(Error::SingularResolvent { re: s.re, im: s.im });
    }
    let x = m
        .lu()
        .solve(&complexify(&ss.b))
        .ok_or(Error::SingularResolvent { re: s.re, im: s.im })?;
    Ok(complexify(&ss.c) * x)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransferReport {
    /// Sample points as `(re, im)`.
    pub points: Vec<(f64, f64)>,
    pub max_residual: f64,
    pub pass: bool,
}

/// Compares the full transfer function with that of the `co` subsystem.
pub fn transfer_function_invariance(
    sys: &QuadratureSystem,
    form: &CanonicalForm,
    points: &[Complex<f64>],
    tol: f64,
) -> Result<TransferReport> {
    let full = StateSpace {
        a: sys.a.clone(),
        b: sys.b.clone(),
        c: sys.c.clone(),
    };
    let co = extract_subsystems(form).co;
    let mut max_residual: f64 = 0.0;
    for &s in points {
        let g = transfer_function(&full, s)?;
        let g_co = transfer_function(&co, s)?;
        let diff = (g - g_co).iter().map(|z| z.norm()).fold(0.0, f64::max);
        max_residual = max_residual.max(diff);
    }
    Ok(TransferReport {
        points: points.iter().map(|z| (z.re, z.im)).collect(),
        max_residual,
        pass: max_residual <= tol,
    })
}

/// `count` deterministic points `i w` on the imaginary axis at which both
/// resolvents are well conditioned.
pub fn imaginary_axis_samples(sys: &QuadratureSystem, form: &CanonicalForm, count: usize) -> Vec<Complex<f64>> {
    let full = StateSpace {
        a: sys.a.clone(),
        b: sys.b.clone(),
        c: sys.c.clone(),
    };
    let co = extract_subsystems(form).co;
    let scale = max_abs(&sys.a).max(1.0);
    let mut out = Vec::with_capacity(count);
    let mut k = 0u32;
    while out.len() < count && k < 1000 {
        k += 1;
        // irrational spacing avoids landing on rational eigenvalues
        let w = scale * (0.173 + 0.618_033_988_749_895 * f64::from(k)) * if k.is_multiple_of(2) { -1.0 } else { 1.0 };
        let s = Complex::new(0.0, w);
        if transfer_function(&full, s).is_ok() && transfer_function(&co, s).is_ok() {
            out.push(s);
        }
    }
    out
}

/// Matrices after the further change of basis `x_breve = T_extra x_bar`.
#[derive(Clone, Debug)]
pub struct SecondaryForm {
    pub t_extra: RealMatrix,
    /// `T T_extra^T`, so that `x_breve = total^T x`.
    pub total: RealMatrix,
    pub a: RealMatrix,
    pub b: RealMatrix,
    pub c: RealMatrix,
    pub h: RealMatrix,
    pub lambda: ComplexMatrix,
}

pub fn change_basis(form: &CanonicalForm, t_extra: &RealMatrix, tol: f64) -> Result<SecondaryForm> {
    let d = form.t.nrows();
    if t_extra.shape() != (d, d) {
        return Err(Error::Dimension {
            context: "secondary transformation",
            expected: format!("{d}x{d}"),
            found: format!("{}x{}", t_extra.nrows(), t_extra.ncols()),
        });
    }
    let residual = max_abs(&(t_extra.transpose() * t_extra - RealMatrix::identity(d, d)));
    if residual > tol {
        return Err(Error::NotOrthogonal {
            what: "secondary transformation",
            residual,
        });
    }
    let tt = t_extra.transpose();
    Ok(SecondaryForm {
        t_extra: t_extra.clone(),
        total: &form.t * &tt,
        a: t_extra * &form.a_raw * &tt,
        b: t_extra * &form.b_raw,
        c: &form.c_raw * &tt,
        h: t_extra * &form.h_bar * &tt,
        lambda: form.lambda_bar.mul_real(&tt),
    })
}

/// Each new coordinate `x_bar_k = sum_i T_ik x_i` written out in terms of
/// `q1..qn, p1..pn`, dropping coefficients at most `tol`.
pub fn describe_coordinates(t: &RealMatrix, tol: f64) -> Vec<String> {
    let n = t.nrows() / 2;
    let name = |i: usize| {
        if i < n {
            format!("q{}", i + 1)
        } else {
            format!("p{}", i - n + 1)
        }
    };
    t.column_iter()
        .map(|col| {
            let mut out = String::new();
            for (i, &c) in col.iter().enumerate() {
                if c.abs() <= tol {
                    continue;
                }
                let sign = if c < 0.0 { "-" } else { "+" };
                if out.is_empty() {
                    if c < 0.0 {
                        out.push('-');
                    }
                } else {
                    out.push_str(&format!(" {sign} "));
                }
                out.push_str(&format!("{:.6} {}", c.abs(), name(i)));
            }
            if out.is_empty() {
                out.push('0');
            }
            out
        })
        .collect()
}
