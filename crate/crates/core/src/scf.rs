//! Self-consistent field iteration for the nonlinear ground state.
//!
//! Each step freezes `|u_k|^(δ-1)`, solves the linear eigenproblem for the
//! smallest pair, aligns its sign with `u_k` and mixes it in with weight
//! `theta`. The residual of a step is `|u_{k+1}ᵀ A(u_{k+1}) u_{k+1} - λ_k|`,
//! with `λ_k` the eigenvalue of the frozen problem and `u_{k+1}` M-normalized.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::assembly::{assemble_mass, assemble_nonlinear_mass, assemble_sip, PenaltyConfig, Potential};
use crate::eigsolve::{default_shift, smallest_eigenpair_with, EigOptions, ShiftedFactor};
use crate::float;
use crate::hpspace::{DiscreteField, HpSpace};
use crate::sparse::SymSparseMatrix;
use crate::{Error, Result};

/// Expansions of one eigensolve after which the preconditioner is renewed.
const REFACTOR_AFTER: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nonlinearity {
    /// The plain linear eigenproblem.
    Linear,
    /// `|u|^(δ-1) u` with `δ ∈ {2, 3, 4}`.
    Power(u32),
}

impl Nonlinearity {
    pub fn delta(self) -> Option<u32> {
        match self {
            Nonlinearity::Linear => None,
            Nonlinearity::Power(d) => Some(d),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScfConfig {
    pub nonlinearity: Nonlinearity,
    pub potential: Potential,
    pub penalty: PenaltyConfig,
    pub tol: f64,
    pub max_iter: usize,
    /// Damping weight of the new eigenvector.
    pub theta: f64,
    /// Strength of the nonlinear term; `1` for the model problem.
    pub coupling: f64,
    pub eig: EigOptions,
}

impl ScfConfig {
    /// Defaults for dimension `d`: tolerance `1e-10` in 2D, `1e-7` in 3D.
    pub fn for_dim(d: usize, nonlinearity: Nonlinearity, potential: Potential) -> Self {
        ScfConfig {
            nonlinearity,
            potential,
            penalty: PenaltyConfig::default(),
            tol: if d == 3 { 1e-7 } else { 1e-10 },
            max_iter: 100,
            theta: 1.0,
            coupling: 1.0,
            eig: EigOptions::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter { name: "tol", reason: "must be positive" });
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::InvalidParameter { name: "theta", reason: "must lie in (0, 1]" });
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter { name: "max_iter", reason: "must be positive" });
        }
        if !self.coupling.is_finite() {
            return Err(Error::InvalidParameter { name: "coupling", reason: "must be finite" });
        }
        if let Nonlinearity::Power(d) = self.nonlinearity {
            if !(2..=4).contains(&d) {
                return Err(Error::InvalidParameter { name: "delta", reason: "must be 2, 3 or 4" });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ScfReport {
    pub solution: DiscreteField,
    /// `uᵀ A(u) u` for the final M-normalized state.
    pub lambda: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub lambda_history: Vec<f64>,
    pub residual_history: Vec<f64>,
}

/// Ground state from a cold start (the normalized constant).
pub fn solve_ground_state(space: &Arc<HpSpace>, cfg: &ScfConfig) -> Result<ScfReport> {
    solve_ground_state_from(space, cfg, None)
}

/// Ground state starting from `initial`, typically a coarser solution
/// transferred with [`DiscreteField::transfer_to`].
pub fn solve_ground_state_from(space: &Arc<HpSpace>, cfg: &ScfConfig, initial: Option<&DiscreteField>) -> Result<ScfReport> {
    cfg.validate()?;
    let a0 = assemble_sip(space, &cfg.potential, &cfg.penalty)?;
    let m = assemble_mass(space);
    let mut u = match initial {
        Some(f) if f.coeffs().len() == space.ndofs() => f.coeffs().to_vec(),
        Some(f) => return Err(Error::DimensionMismatch { expected: space.ndofs(), found: f.coeffs().len() }),
        None => space.constant(1.0).into_coeffs(),
    };
    m_normalize(&m, &mut u)?;

    let operator = |u: &[f64]| -> Result<SymSparseMatrix> {
        match (cfg.nonlinearity, cfg.coupling) {
            (Nonlinearity::Power(delta), c) if c != 0.0 => {
                let field = space.field(u.to_vec())?;
                a0.add_scaled(&assemble_nonlinear_mass(space, &field, delta)?, c)
            }
            _ => Ok(a0.clone()),
        }
    };

    let mut lambda_history = Vec::new();
    let mut residual_history = Vec::new();
    let mut a_u = operator(&u)?;
    // One factorization serves as preconditioner for several steps; it is
    // renewed near the current eigenvalue once the first step has located it,
    // and whenever a step needs many expansions.
    let mut pre = ShiftedFactor::below(&a_u, &m, cfg.eig.shift.unwrap_or_else(|| default_shift(&a_u, &m, &u)))?;
    let max_iter = if cfg.nonlinearity == Nonlinearity::Linear { 1 } else { cfg.max_iter };
    let mut converged = false;
    let mut iterations = 0;
    for k in 0..max_iter {
        iterations += 1;
        let opts = EigOptions { reference: Some(u.clone()), ..cfg.eig.clone() };
        let eig = match smallest_eigenpair_with(&a_u, &m, Some(&u), &opts, &pre) {
            Err(Error::EigNotConverged { lambda, .. }) if lambda.is_finite() => {
                pre = ShiftedFactor::below(&a_u, &m, lambda - 1.0)?;
                smallest_eigenpair_with(&a_u, &m, Some(&u), &opts, &pre)?
            }
            other => other?,
        };
        let mut next: Vec<f64> = u.iter().zip(&eig.x).map(|(a, b)| (1.0 - cfg.theta) * a + cfg.theta * b).collect();
        m_normalize(&m, &mut next)?;
        u = next;
        a_u = operator(&u)?;
        let rayleigh = a_u.quad_form(&u);
        let residual = (rayleigh - eig.lambda).abs();
        lambda_history.push(eig.lambda);
        residual_history.push(residual);
        if residual <= cfg.tol {
            converged = true;
            break;
        }
        let stale = (k == 0 && eig.lambda - pre.shift() > 2.0) || eig.iterations > REFACTOR_AFTER;
        if stale && k + 1 < max_iter {
            pre = ShiftedFactor::below(&a_u, &m, eig.lambda - 1.0)?;
        }
    }
    let lambda = a_u.quad_form(&u);
    let residual = *residual_history.last().unwrap_or(&f64::INFINITY);
    Ok(ScfReport {
        solution: space.field(u)?,
        lambda,
        residual,
        iterations,
        converged,
        lambda_history,
        residual_history,
    })
}

fn m_normalize(m: &SymSparseMatrix, u: &mut [f64]) -> Result<()> {
    let n2 = m.quad_form(u);
    if !(n2 > 0.0 && n2.is_finite()) {
        return Err(Error::InvalidParameter { name: "initial", reason: "state has no finite M-norm" });
    }
    let s = 1.0 / float::sqrt(n2);
    u.iter_mut().for_each(|v| *v *= s);
    Ok(())
}
