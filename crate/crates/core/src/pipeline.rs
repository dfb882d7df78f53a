//! End-to-end decomposition with every verification attached.

use serde::Serialize;

use crate::decomposition::{
    apply_transformation, build_transformation, imaginary_axis_samples, transfer_function_invariance,
    verify_canonical_structure, BlockLayout, CanonicalForm, Dims, Ordering, StructureReport, StructureTolerances,
    TransferReport, Transformation,
};
use crate::error::Result;
use crate::gramians::{gramian_pair, structured_matrices, verify_duality, DualityReport, GramianPair, Horizon};
use crate::model::{build_quadrature, check_physical_realizability, QuadratureSystem, RealizabilityReport, SlhModel};
use crate::subspaces::{
    extract_subspaces, svd_split, verify_subspace_laws, GramianSvd, KalmanSubspaces, SubspaceLawReport,
};
use crate::symplectic::ToleranceConfig;

/// Pass/fail thresholds for the verification stages.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CheckTolerances {
    pub realizability: f64,
    pub duality: f64,
    pub subspace: f64,
    pub subspace_angle: f64,
    pub structure: StructureTolerances,
    pub transfer: f64,
    pub transfer_samples: usize,
}

impl Default for CheckTolerances {
    fn default() -> Self {
        Self {
            realizability: 1e-10,
            duality: 1e-9,
            subspace: 1e-8,
            subspace_angle: 1e-7,
            structure: StructureTolerances::default(),
            transfer: 1e-9,
            transfer_samples: 10,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DecomposeOptions {
    pub horizon: Horizon,
    pub tolerances: ToleranceConfig,
    pub ordering: Ordering,
    pub checks: CheckTolerances,
}

#[derive(Clone, Debug)]
pub struct KalmanDecomposition {
    pub options: DecomposeOptions,
    pub model: SlhModel,
    pub system: QuadratureSystem,
    pub gramians: GramianPair,
    pub svd: GramianSvd,
    pub subspaces: KalmanSubspaces,
    pub transformation: Transformation,
    pub form: CanonicalForm,
    pub realizability: RealizabilityReport,
    pub duality: DualityReport,
    pub laws: SubspaceLawReport,
    pub structure: StructureReport,
    pub transfer: TransferReport,
    pub warnings: Vec<String>,
}

impl KalmanDecomposition {
    pub fn dims(&self) -> Dims {
        self.transformation.dims
    }

    /// Named pass/fail outcomes of every check.
    pub fn checks(&self) -> Vec<(&'static str, bool)> {
        vec![
            ("physical_realizability", self.realizability.pass),
            ("gramian_duality", self.duality.pass),
            ("subspace_laws", self.laws.pass),
            ("canonical_structure", self.structure.structure_pass),
            ("hamiltonian_blocks", self.structure.hamiltonian_pass),
            ("transfer_invariance", self.transfer.pass),
        ]
    }

    pub fn passed(&self) -> bool {
        self.checks().iter().all(|(_, ok)| *ok)
    }
}

/// Builds the quadrature model, Gramians, subspaces and transformation, and
/// runs every check. Failed checks are recorded, not raised.
pub fn decompose(model: &SlhModel, options: &DecomposeOptions) -> Result<KalmanDecomposition> {
    options.tolerances.validate()?;
    let cfg = &options.tolerances;
    let checks = &options.checks;
    let system = build_quadrature(model);
    let realizability = check_physical_realizability(&system, checks.realizability);

    let gramians = gramian_pair(&system, model, options.horizon)?;
    let mut warnings = gramians.warnings.clone();
    let mut duality = verify_duality(&gramians, cfg);
    duality.pass = duality.residual <= checks.duality && duality.rank_wo == duality.rank_wc;

    let svd = svd_split(&gramians.wo, cfg)?;
    let subspaces = extract_subspaces(&svd, cfg)?;
    warnings.extend(subspaces.warnings.iter().cloned());
    let structured = structured_matrices(&system, model);
    let laws = verify_subspace_laws(
        &subspaces,
        &svd,
        &structured,
        cfg,
        checks.subspace,
        checks.subspace_angle,
    );

    let transformation = build_transformation(&subspaces, checks.subspace)?;
    let layout = BlockLayout {
        ordering: options.ordering,
        dims: transformation.dims,
    };
    let form = apply_transformation(
        &system,
        model,
        &transformation.matrix(options.ordering),
        layout,
        cfg.residual_tol,
    )?;
    let structure = verify_canonical_structure(&system, &form, &gramians, &checks.structure)?;
    if !structure.hamiltonian_pass {
        warnings.push(format!(
            "block drift matrices are not Hamiltonian: h residual {:e}, cbarobar residual {:e}",
            structure.hamiltonian_h, structure.hamiltonian_cbarobar
        ));
    }

    let samples = imaginary_axis_samples(&system, &form, checks.transfer_samples);
    if samples.len() < checks.transfer_samples {
        warnings.push(format!(
            "only {} of {} transfer-function sample points avoid the spectrum",
            samples.len(),
            checks.transfer_samples
        ));
    }
    let transfer = transfer_function_invariance(&system, &form, &samples, checks.transfer)?;

    Ok(KalmanDecomposition {
        options: *options,
        model: model.clone(),
        system,
        gramians,
        svd,
        subspaces,
        transformation,
        form,
        realizability,
        duality,
        laws,
        structure,
        transfer,
        warnings,
    })
}
