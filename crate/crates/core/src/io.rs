//! JSON input files and reports.
//!
//! Matrices are arrays of rows. Every floating-point number is written with
//! 17 significant digits, so files round-trip bit for bit.

use std::collections::BTreeMap;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use crate::decomposition::{describe_coordinates, Dims, Ordering};
use crate::error::{Error, Result};
use crate::gramians::Horizon;
use crate::model::{QuadratureSystem, RealizabilityReport, SlhModel};
use crate::pipeline::{DecomposeOptions, KalmanDecomposition};
use crate::symplectic::{max_abs, ComplexMatrix, RealMatrix, ToleranceConfig};

pub type Rows = Vec<Vec<f64>>;

pub fn to_rows(m: &RealMatrix) -> Rows {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Options stored alongside a model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileOptions {
    /// `[t, s]`
    pub horizon: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank_tol: Option<f64>,
    pub ordering: Ordering,
}

impl Default for FileOptions {
    fn default() -> Self {
        Self {
            horizon: [0.0, 1.0],
            rank_tol: None,
            ordering: Ordering::Ttilde,
        }
    }
}

impl FileOptions {
    fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        let [t, s] = self.horizon;
        if Horizon::new(t, s).is_err() {
            out.push(format!("options.horizon: need finite t < s, got [{t}, {s}]"));
        }
        if let Some(r) = self.rank_tol {
            if !(r.is_finite() && r > 0.0) {
                out.push(format!("options.rank_tol: must be positive, got {r}"));
            }
        }
        out
    }

    pub fn decompose_options(&self) -> Result<DecomposeOptions> {
        let problems = self.problems();
        if !problems.is_empty() {
            return Err(Error::InvalidInput(problems));
        }
        let mut tolerances = ToleranceConfig::default();
        if let Some(r) = self.rank_tol {
            tolerances.rank_rel_tol = r;
        }
        Ok(DecomposeOptions {
            horizon: Horizon::new(self.horizon[0], self.horizon[1])?,
            tolerances,
            ordering: self.ordering,
            ..Default::default()
        })
    }
}

/// On-disk form of a model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub n: usize,
    pub m: usize,
    pub hamiltonian: Rows,
    pub coupling_re: Rows,
    pub coupling_im: Rows,
    #[serde(default)]
    pub options: FileOptions,
}

impl SystemFile {
    pub fn from_model(model: &SlhModel, options: FileOptions) -> Self {
        Self {
            n: model.modes(),
            m: model.fields(),
            hamiltonian: to_rows(model.hamiltonian()),
            coupling_re: to_rows(model.coupling().re()),
            coupling_im: to_rows(model.coupling().im()),
            options,
        }
    }
}

/// Field-by-field mirror of [`SystemFile`] so that every problem can be
/// reported in one pass.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystemFile {
    n: Option<usize>,
    m: Option<usize>,
    hamiltonian: Option<Rows>,
    coupling_re: Option<Rows>,
    coupling_im: Option<Rows>,
    #[serde(default)]
    options: FileOptions,
}

#[derive(Clone, Debug)]
pub struct LoadedSystem {
    pub model: SlhModel,
    pub options: FileOptions,
}

/// Checks that `rows` is `r x c` and converts it.
fn matrix_from_rows(name: &str, rows: &Rows, r: usize, c: usize, problems: &mut Vec<String>) -> Option<RealMatrix> {
    let mut ok = true;
    if rows.len() != r {
        problems.push(format!("{name}: expected {r} rows, found {}", rows.len()));
        ok = false;
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != c {
            problems.push(format!("{name}: row {} has {} entries, expected {c}", i + 1, row.len()));
            ok = false;
        }
    }
    if !ok {
        return None;
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Some(RealMatrix::from_row_slice(r, c, &flat))
}

/// Parses and validates a system description, listing every problem found.
pub fn parse_system_str(text: &str) -> Result<LoadedSystem> {
    let raw: RawSystemFile = serde_json::from_str(text)?;
    let residual_tol = ToleranceConfig::default().residual_tol;
    let mut problems = Vec::new();
    for (field, missing) in [
        ("n", raw.n.is_none()),
        ("m", raw.m.is_none()),
        ("hamiltonian", raw.hamiltonian.is_none()),
        ("coupling_re", raw.coupling_re.is_none()),
        ("coupling_im", raw.coupling_im.is_none()),
    ] {
        if missing {
            problems.push(format!("missing field {field:?}"));
        }
    }
    if raw.n == Some(0) {
        problems.push("n: need at least one mode".into());
    }
    if raw.m == Some(0) {
        problems.push("m: need at least one field".into());
    }
    problems.extend(raw.options.problems());

    let (mut h, mut re, mut im) = (None, None, None);
    if let (Some(n), Some(m)) = (raw.n, raw.m) {
        if let Some(rows) = &raw.hamiltonian {
            h = matrix_from_rows("hamiltonian", rows, 2 * n, 2 * n, &mut problems);
        }
        if let Some(rows) = &raw.coupling_re {
            re = matrix_from_rows("coupling_re", rows, m, 2 * n, &mut problems);
        }
        if let Some(rows) = &raw.coupling_im {
            im = matrix_from_rows("coupling_im", rows, m, 2 * n, &mut problems);
        }
    }
    if let Some(h) = &h {
        let asym = max_abs(&(h - h.transpose()));
        if asym > residual_tol {
            problems.push(format!(
                "hamiltonian: not symmetric (max |H - H^T| = {asym:e}, tolerance {residual_tol:e})"
            ));
        }
    }
    if !problems.is_empty() {
        return Err(Error::InvalidInput(problems));
    }
    let (Some(h), Some(re), Some(im)) = (h, re, im) else {
        unreachable!("all matrices parsed when no problem was recorded");
    };
    let model = SlhModel::new(h, ComplexMatrix::new(re, im)?, residual_tol)?;
    Ok(LoadedSystem {
        model,
        options: raw.options,
    })
}

pub fn parse_system_file(path: &Path) -> Result<LoadedSystem> {
    parse_system_str(&std::fs::read_to_string(path)?)
}

/// Hand-written quadrature matrices; `D` defaults to the identity.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbcdFile {
    #[serde(rename = "A")]
    pub a: Rows,
    #[serde(rename = "B")]
    pub b: Rows,
    #[serde(rename = "C")]
    pub c: Rows,
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub d: Option<Rows>,
}

fn rows_to_matrix(name: &str, rows: &Rows, problems: &mut Vec<String>) -> Option<RealMatrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    matrix_from_rows(name, rows, r, c, problems)
}

pub fn parse_abcd_str(text: &str) -> Result<QuadratureSystem> {
    let raw: AbcdFile = serde_json::from_str(text)?;
    let mut problems = Vec::new();
    let a = rows_to_matrix("A", &raw.a, &mut problems);
    let b = rows_to_matrix("B", &raw.b, &mut problems);
    let c = rows_to_matrix("C", &raw.c, &mut problems);
    let d = match &raw.d {
        Some(rows) => rows_to_matrix("D", rows, &mut problems),
        None => c.as_ref().map(|c| RealMatrix::identity(c.nrows(), c.nrows())),
    };
    if !problems.is_empty() {
        return Err(Error::InvalidInput(problems));
    }
    let (Some(a), Some(b), Some(c), Some(d)) = (a, b, c, d) else {
        unreachable!("all matrices parsed when no problem was recorded");
    };
    QuadratureSystem::from_matrices(a, b, c, d)
}

pub fn parse_abcd_file(path: &Path) -> Result<QuadratureSystem> {
    parse_abcd_str(&std::fs::read_to_string(path)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub n: usize,
    pub m: usize,
    pub residual_pr1: f64,
    pub residual_pr2: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckReport {
    pub fn new(sys: &QuadratureSystem, report: &RealizabilityReport, tolerance: f64) -> Self {
        Self {
            n: sys.n,
            m: sys.m,
            residual_pr1: report.residual_pr1,
            residual_pr2: report.residual_pr2,
            tolerance,
            pass: report.pass,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportMatrices {
    #[serde(rename = "T")]
    pub t: Rows,
    #[serde(rename = "T_tilde")]
    pub t_tilde: Rows,
    #[serde(rename = "A_bar_raw")]
    pub a_bar_raw: Rows,
    #[serde(rename = "A_bar_clean")]
    pub a_bar_clean: Rows,
    #[serde(rename = "B_bar")]
    pub b_bar: Rows,
    #[serde(rename = "C_bar")]
    pub c_bar: Rows,
    #[serde(rename = "H_bar")]
    pub h_bar: Rows,
    #[serde(rename = "Lambda_bar_re")]
    pub lambda_bar_re: Rows,
    #[serde(rename = "Lambda_bar_im")]
    pub lambda_bar_im: Rows,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportProjectors {
    #[serde(rename = "P_co")]
    pub co: Rows,
    #[serde(rename = "P_cobar")]
    pub cobar: Rows,
    #[serde(rename = "P_cbaro")]
    pub cbaro: Rows,
    #[serde(rename = "P_cbarobar")]
    pub cbarobar: Rows,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportResiduals {
    pub physical_realizability: f64,
    pub gramian_duality: f64,
    pub orthogonality: f64,
    pub block_symplectic: f64,
    pub structural_zeros: f64,
    pub gramian_pattern: f64,
    pub invariance: f64,
    pub hamiltonian_block: f64,
    pub transfer_invariance: f64,
    pub eigen_law: f64,
    pub subspace_completeness: f64,
    pub subspace_membership: f64,
    pub subspace_intersection_angle: f64,
    pub j_invariance: f64,
    pub cobar_isotropy: f64,
    pub cross_check_angle: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecompositionReport {
    pub n: usize,
    pub m: usize,
    pub ordering: Ordering,
    pub horizon: [f64; 2],
    pub horizon_used: [f64; 2],
    pub tolerances: ToleranceConfig,
    pub dims: Dims,
    pub rank_wo: usize,
    /// Transformed coordinates in terms of the original quadratures.
    pub coordinates: Vec<String>,
    pub matrices: ReportMatrices,
    pub projectors: ReportProjectors,
    pub residuals: ReportResiduals,
    pub checks: BTreeMap<String, bool>,
    pub pass: bool,
    pub warnings: Vec<String>,
}

impl DecompositionReport {
    pub fn new(dec: &KalmanDecomposition) -> Self {
        let form = &dec.form;
        let proj = dec.subspaces.projectors();
        let g = &dec.gramians;
        Self {
            n: dec.system.n,
            m: dec.system.m,
            ordering: dec.options.ordering,
            horizon: [g.requested.t, g.requested.s],
            horizon_used: [g.horizon.t, g.horizon.s],
            tolerances: dec.options.tolerances,
            dims: dec.dims(),
            rank_wo: dec.svd.rank,
            coordinates: describe_coordinates(&form.t, 1e-12),
            matrices: ReportMatrices {
                t: to_rows(&dec.transformation.matrix(Ordering::T)),
                t_tilde: to_rows(&dec.transformation.matrix(Ordering::Ttilde)),
                a_bar_raw: to_rows(&form.a_raw),
                a_bar_clean: to_rows(&form.a_clean),
                b_bar: to_rows(&form.b_raw),
                c_bar: to_rows(&form.c_raw),
                h_bar: to_rows(&form.h_bar),
                lambda_bar_re: to_rows(form.lambda_bar.re()),
                lambda_bar_im: to_rows(form.lambda_bar.im()),
            },
            projectors: ReportProjectors {
                co: to_rows(&proj.co),
                cobar: to_rows(&proj.cobar),
                cbaro: to_rows(&proj.cbaro),
                cbarobar: to_rows(&proj.cbarobar),
            },
            residuals: ReportResiduals {
                physical_realizability: dec.realizability.residual_pr1.max(dec.realizability.residual_pr2),
                gramian_duality: dec.duality.residual,
                orthogonality: dec.structure.orthogonality,
                block_symplectic: dec.structure.block_symplectic,
                structural_zeros: dec.structure.structural_zeros,
                gramian_pattern: dec.structure.gramian_pattern,
                invariance: dec.structure.invariance,
                hamiltonian_block: dec.structure.hamiltonian_h.max(dec.structure.hamiltonian_cbarobar),
                transfer_invariance: dec.transfer.max_residual,
                eigen_law: dec.laws.eigen_law,
                subspace_completeness: dec.laws.completeness,
                subspace_membership: dec.laws.membership,
                subspace_intersection_angle: dec.laws.intersection_angle,
                j_invariance: dec.laws.j_invariance,
                cobar_isotropy: dec.laws.cobar_isotropy,
                cross_check_angle: dec.subspaces.cross_check_angle,
            },
            checks: dec.checks().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            pass: dec.passed(),
            warnings: dec.warnings.clone(),
        }
    }
}

/// Pretty JSON with 17 significant digits per float and arrays of scalars
/// kept on one line.
#[derive(Default)]
pub struct PreciseFormatter {
    indent: usize,
    /// One entry per open array: `(has_value, inline)`.
    arrays: Vec<(bool, bool)>,
    pending: bool,
    object_has_value: Vec<bool>,
}

impl PreciseFormatter {
    fn newline<W: ?Sized + Write>(&self, w: &mut W) -> io::Result<()> {
        w.write_all(b"\n")?;
        for _ in 0..self.indent {
            w.write_all(b"  ")?;
        }
        Ok(())
    }

    /// Writes the whitespace deferred by `begin_array_value`.
    fn start_value<W: ?Sized + Write>(&mut self, w: &mut W, scalar: bool) -> io::Result<()> {
        if !self.pending {
            return Ok(());
        }
        self.pending = false;
        let Some(frame) = self.arrays.last_mut() else {
            return Ok(());
        };
        let first = !frame.0;
        frame.0 = true;
        if first {
            frame.1 = scalar;
        }
        if frame.1 {
            if !first {
                w.write_all(b" ")?;
            }
            Ok(())
        } else {
            self.newline(w)
        }
    }
}

macro_rules! scalar_hooks {
    ($($name:ident: $t:ty),* $(,)?) => {
        $(
            fn $name<W: ?Sized + Write>(&mut self, w: &mut W, value: $t) -> io::Result<()> {
                self.start_value(w, true)?;
                write!(w, "{value}")
            }
        )*
    };
}

impl Formatter for PreciseFormatter {
    scalar_hooks!(
        write_i8: i8, write_i16: i16, write_i32: i32, write_i64: i64, write_i128: i128,
        write_u8: u8, write_u16: u16, write_u32: u32, write_u64: u64, write_u128: u128,
        write_bool: bool,
    );

    fn write_null<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.start_value(w, true)?;
        w.write_all(b"null")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }

    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        self.start_value(w, true)?;
        write!(w, "{value:.16e}")
    }

    fn write_number_str<W: ?Sized + Write>(&mut self, w: &mut W, value: &str) -> io::Result<()> {
        self.start_value(w, true)?;
        w.write_all(value.as_bytes())
    }

    fn begin_string<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.start_value(w, true)?;
        w.write_all(b"\"")
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.start_value(w, false)?;
        self.arrays.push((false, false));
        self.indent += 1;
        w.write_all(b"[")
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.indent -= 1;
        let (has_value, inline) = self.arrays.pop().unwrap_or((false, true));
        if has_value && !inline {
            self.newline(w)?;
        }
        w.write_all(b"]")
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        if !first {
            w.write_all(b",")?;
        }
        self.pending = true;
        Ok(())
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, _w: &mut W) -> io::Result<()> {
        Ok(())
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.start_value(w, false)?;
        self.object_has_value.push(false);
        self.indent += 1;
        w.write_all(b"{")
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.indent -= 1;
        if self.object_has_value.pop().unwrap_or(false) {
            self.newline(w)?;
        }
        w.write_all(b"}")
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        if !first {
            w.write_all(b",")?;
        }
        if let Some(v) = self.object_has_value.last_mut() {
            *v = true;
        }
        self.newline(w)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        w.write_all(b": ")
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, _w: &mut W) -> io::Result<()> {
        Ok(())
    }
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, PreciseFormatter::default());
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json_string(value)?)?;
    Ok(())
}
