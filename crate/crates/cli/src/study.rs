//! The ℓ-sweep convergence study.

use std::fmt;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use hpdg_core::analysis::{error_norms, Abscissa, ErrorColumn, FitResult};
use hpdg_core::scf::solve_ground_state_from;
use hpdg_core::{
    build_graded_mesh, fit_exponential, ConvergenceRecord, DiscreteField, HpSpace, PenaltyConfig, ScfConfig,
    ScfReport,
};

use crate::config::StudyConfig;
use crate::formats;

/// Where a study failed.
#[derive(Debug)]
pub struct StudyError {
    /// `None` for the reference solve.
    pub level: Option<usize>,
    pub phase: &'static str,
    pub source: anyhow::Error,
}

impl fmt::Display for StudyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.level {
            Some(l) => write!(f, "level {l}, {}: {:#}", self.phase, self.source),
            None => write!(f, "reference, {}: {:#}", self.phase, self.source),
        }
    }
}

impl std::error::Error for StudyError {}

#[derive(Debug, Clone)]
pub struct LevelSummary {
    pub ell: usize,
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
    pub lambda_history: Vec<f64>,
    pub residual_history: Vec<f64>,
    /// `‖u‖_L²` of the final state.
    pub l2_norm: f64,
    /// `|λ - uᵀA(u)u|` recomputed from the returned state.
    pub rayleigh_defect: f64,
}

#[derive(Debug, Clone)]
pub struct StudyOutcome {
    pub config: StudyConfig,
    pub records: Vec<ConvergenceRecord>,
    pub reference: LevelSummary,
    pub reference_lambda: f64,
    pub reference_ndofs: usize,
    pub levels: Vec<LevelSummary>,
    pub fits: Vec<(ErrorColumn, Abscissa, Option<FitResult>)>,
}

impl StudyOutcome {
    pub fn all_converged(&self) -> bool {
        self.reference.converged && self.levels.iter().all(|l| l.converged)
    }

    pub fn fit(&self, column: ErrorColumn, abscissa: Abscissa) -> Option<FitResult> {
        self.fits.iter().find(|(c, a, _)| *c == column && *a == abscissa).and_then(|(_, _, f)| *f)
    }
}

fn space_for(cfg: &StudyConfig, ell: usize, p0: usize) -> anyhow::Result<Arc<HpSpace>> {
    let mesh = Arc::new(build_graded_mesh(cfg.dim, cfg.sigma, ell)?);
    Ok(Arc::new(HpSpace::new(mesh, p0, cfg.slope, cfg.rounding)?))
}

pub fn scf_config(cfg: &StudyConfig) -> ScfConfig {
    let mut scf = ScfConfig::for_dim(cfg.dim, cfg.nonlinearity, cfg.potential());
    scf.penalty = PenaltyConfig { alpha0: cfg.penalty };
    scf.tol = cfg.tolerance();
    scf.max_iter = cfg.max_iter;
    scf.theta = cfg.theta;
    scf
}

fn summarize(ell: usize, report: &ScfReport, scf: &ScfConfig) -> anyhow::Result<LevelSummary> {
    let space = report.solution.space();
    let m = hpdg_core::assemble_mass(space);
    let u = report.solution.coeffs();
    let mut a = hpdg_core::assemble_sip(space, &scf.potential, &scf.penalty)?;
    if let Some(delta) = scf.nonlinearity.delta() {
        let n = hpdg_core::assemble_nonlinear_mass(space, &report.solution, delta)?;
        a = a.add_scaled(&n, scf.coupling)?;
    }
    Ok(LevelSummary {
        ell,
        converged: report.converged,
        iterations: report.iterations,
        residual: report.residual,
        lambda_history: report.lambda_history.clone(),
        residual_history: report.residual_history.clone(),
        l2_norm: m.quad_form(u).sqrt(),
        rayleigh_defect: (a.quad_form(u) - report.lambda).abs(),
    })
}

/// Solves the reference, then every level from `ell_min` to `levels` with
/// chained warm starts, and fits the error columns.
pub fn run_study(cfg: &StudyConfig) -> Result<StudyOutcome, StudyError> {
    cfg.validate().map_err(|e| StudyError { level: None, phase: "config", source: e.into() })?;
    let scf = scf_config(cfg);
    let fail = |level: Option<usize>, phase: &'static str| move |e: anyhow::Error| StudyError { level, phase, source: e };

    let ref_space = space_for(cfg, cfg.reference_level(), cfg.reference_degree()).map_err(fail(None, "setup"))?;
    let reference = solve_ground_state_from(&ref_space, &scf, None).map_err(|e| fail(None, "solve")(e.into()))?;
    let reference_summary = summarize(cfg.reference_level(), &reference, &scf).map_err(fail(None, "check"))?;

    let mut records = Vec::new();
    let mut levels = Vec::new();
    let mut previous: Option<DiscreteField> = None;
    for ell in cfg.ell_min..=cfg.levels {
        let lv = Some(ell);
        let space = space_for(cfg, ell, cfg.p0).map_err(fail(lv, "setup"))?;
        let start = match &previous {
            Some(prev) => Some(prev.transfer_to(&space).map_err(|e| fail(lv, "transfer")(e.into()))?),
            None => None,
        };
        let report = solve_ground_state_from(&space, &scf, start.as_ref()).map_err(|e| fail(lv, "solve")(e.into()))?;
        let norms = error_norms(&report.solution, &reference.solution).map_err(|e| fail(lv, "errors")(e.into()))?;
        records.push(ConvergenceRecord {
            ell,
            ndofs: space.ndofs(),
            lambda: report.lambda,
            err_l2: norms.l2,
            err_dg: norms.dg,
            err_linf: norms.linf,
            err_lambda: (report.lambda - reference.lambda).abs(),
        });
        levels.push(summarize(ell, &report, &scf).map_err(fail(lv, "check"))?);
        previous = Some(report.solution);
    }

    let mut fits = Vec::new();
    for column in ErrorColumn::ALL {
        for abscissa in [Abscissa::Level, Abscissa::DofRoot(cfg.dim)] {
            fits.push((column, abscissa, fit_exponential(&records, column, abscissa).ok()));
        }
    }
    Ok(StudyOutcome {
        config: cfg.clone(),
        records,
        reference_lambda: reference.lambda,
        reference_ndofs: ref_space.ndofs(),
        reference: reference_summary,
        levels,
        fits,
    })
}

/// Writes `convergence.csv`, `fit.txt`, `err_*.dat`, the SCF logs and the
/// effective configuration into `dir`.
pub fn write_outputs(outcome: &StudyOutcome, dir: &Path) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("convergence.csv"), formats::convergence_csv(&outcome.records))?;
    fs::write(dir.join("fit.txt"), formats::fit_lines(&outcome.fits))?;
    for column in ErrorColumn::ALL {
        fs::write(dir.join(format!("{}.dat", column.name())), formats::error_dat(&outcome.records, column))?;
    }
    let r = &outcome.reference;
    fs::write(dir.join("scf_reference.log"), formats::scf_log(&r.lambda_history, &r.residual_history))?;
    for l in &outcome.levels {
        fs::write(dir.join(format!("scf_level_{}.log", l.ell)), formats::scf_log(&l.lambda_history, &l.residual_history))?;
    }
    fs::write(dir.join("config.txt"), outcome.config.to_kv_string())?;
    Ok(())
}
