//! Scalar observables extracted from density matrices.
//!
//! Sign convention for codeword coherence: `codeword_coherence` reports
//! `<psi_0| rho |psi_1>`. For an initial superposition
//! `(|psi_0> + e^{i phi} |psi_1>)/sqrt(2)` that matrix element equals
//! `(1/2) e^{-i phi}` — the *argument carries the opposite sign* of the
//! superposition phase. Consumers that want the recovered superposition phase
//! should read `arg <psi_1| rho |psi_0>` (the conjugate element).

use crate::error::{AqecError, Result};
use crate::ops::{Ket, Operator, C64};

/// Linear entropy `S_lin = 1 - tr(rho^2)`, zero for pure states.
pub fn linear_entropy(rho: &Operator) -> Result<f64> {
    let sq = rho.mul(rho)?;
    Ok(1.0 - sq.trace().re)
}

/// Purity `tr(rho^2)`.
pub fn purity(rho: &Operator) -> Result<f64> {
    let sq = rho.mul(rho)?;
    Ok(sq.trace().re)
}

/// Population of a pure state: `<psi| rho |psi>`.
pub fn population(rho: &Operator, psi: &Ket) -> Result<f64> {
    let rp = rho.apply(psi)?;
    Ok(psi.dot(&rp)?.re)
}

/// Codeword coherence matrix element `<psi_i| rho |psi_j>`.
pub fn codeword_coherence(rho: &Operator, psi_i: &Ket, psi_j: &Ket) -> Result<C64> {
    let rp = rho.apply(psi_j)?;
    psi_i.dot(&rp)
}

/// Fidelity of `rho` against a pure target: `<psi| rho |psi>`.
///
/// Errors if the target is not normalized (tolerance 1e-10).
pub fn fidelity_pure(rho: &Operator, psi: &Ket) -> Result<f64> {
    if (psi.norm() - 1.0).abs() > 1e-10 {
        return Err(AqecError::InvalidParameter(format!(
            "fidelity target not normalized (norm {})",
            psi.norm()
        )));
    }
    population(rho, psi)
}

/// One row of the standard metrics trajectory for a two-codeword model.
#[derive(Debug, Clone, Copy)]
pub struct MetricsRow {
    pub t: f64,
    pub s_lin: f64,
    pub pop_cw0: f64,
    pub pop_cw1: f64,
    /// `<psi_0| rho |psi_1>` (see module docs for the sign convention).
    pub coherence: C64,
}

/// Evaluate the standard metrics set along a trajectory.
pub fn metrics_trajectory(
    times: &[f64],
    states: &[Operator],
    cw0: &Ket,
    cw1: &Ket,
) -> Result<Vec<MetricsRow>> {
    if times.len() != states.len() {
        return Err(AqecError::DimensionMismatch(format!(
            "{} times vs {} states",
            times.len(),
            states.len()
        )));
    }
    times
        .iter()
        .zip(states.iter())
        .map(|(&t, rho)| {
            Ok(MetricsRow {
                t,
                s_lin: linear_entropy(rho)?,
                pop_cw0: population(rho, cw0)?,
                pop_cw1: population(rho, cw1)?,
                coherence: codeword_coherence(rho, cw0, cw1)?,
            })
        })
        .collect()
}
