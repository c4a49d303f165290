//! Scalar diagnostics: twin-beam entanglement entropy, photon-number
//! moments, and difference-number squeezing in closed form and from moments.

use crate::error::{Error, Result};
use crate::fock::{DensityOperator, FockOperator};
use crate::ips::p11_effective_closed;
use crate::util::hermitian_eigenvalues;

/// Eigenvalues below this are dropped from λ ln λ sums.
const ENTROPY_EIGENVALUE_CLAMP: f64 = 1e-15;

/// Photon-number correlation summary of a two-mode state.
#[derive(Clone, Copy, Debug)]
pub struct CorrelationReport {
    /// ⟨n_a⟩
    pub mean_a: f64,
    /// ⟨n_b⟩
    pub mean_b: f64,
    /// ⟨d²⟩ − ⟨d⟩² with d = n_a − n_b
    pub var_diff: f64,
    /// var_diff / (mean_a + mean_b)
    pub delta_ab: f64,
}

/// Excess von Neumann entropy of the twin beam,
/// Δ(x) = −ln(1−x²) − x² ln(x²)/(1−x²). Natural logarithm throughout.
pub fn twb_entanglement(x: f64) -> f64 {
    let x2 = x * x;
    -(1.0 - x2).ln() - x2 * x2.ln() / (1.0 - x2)
}

/// The same entropy written in terms of the mean photon number,
/// ln(1+N/2) + (N/2)ln(1+2/N); agrees with `twb_entanglement` at
/// N = 2x²/(1−x²).
pub fn twb_entanglement_from_photons(n_mean: f64) -> f64 {
    (1.0 + n_mean / 2.0).ln() + n_mean / 2.0 * (1.0 + 2.0 / n_mean).ln()
}

/// Total mean photon number N = 2x²/(1−x²) of the twin beam.
pub fn twb_mean_photons(x: f64) -> f64 {
    2.0 * x * x / (1.0 - x * x)
}

/// Von Neumann entropy −Tr{ρ ln ρ} by Hermitian eigendecomposition.
pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    hermitian_eigenvalues(rho.elems())
        .into_iter()
        .filter(|&l| l > ENTROPY_EIGENVALUE_CLAMP)
        .map(|l| -l * l.ln())
        .sum()
}

/// (⟨n_a⟩, ⟨n_b⟩) of a two-mode state.
pub fn mean_photons_numerical(rho: &DensityOperator) -> Result<(f64, f64)> {
    if rho.n_modes() != 2 {
        return Err(Error::DimensionMismatch {
            expected: "2 modes".into(),
            got: format!("{} modes", rho.n_modes()),
        });
    }
    let n_a = FockOperator::number_operator(rho.trunc().clone(), 0)?;
    let n_b = FockOperator::number_operator(rho.trunc().clone(), 1)?;
    Ok((
        rho.expectation(&n_a)?.re,
        rho.expectation(&n_b)?.re,
    ))
}

/// Difference-number squeezing of the heralded state in closed form,
///
/// Δ_{a,b}(x, τ_eff) = (1−τ_eff)(1−x²τ_eff²)²(2−x²−x⁴τ_eff)
///                     / [(1+τ_eff)(1−x²τ_eff)(2−x²(1+τ_eff+τ_eff²)+x⁶τ_eff³)].
///
/// Valid on the ideal-detector family (η = 1, τ = τ_eff); approaches
/// (1−τ_eff)/2 independently of x as τ_eff → 1, and 0 at τ_eff = 1
/// (the twin beam itself is perfectly number-correlated).
pub fn difference_squeezing_closed(x: f64, tau_eff: f64) -> f64 {
    if tau_eff >= 1.0 {
        return 0.0;
    }
    let x2 = x * x;
    let te = tau_eff;
    let num = (1.0 - te) * (1.0 - x2 * te * te).powi(2) * (2.0 - x2 - x2 * x2 * te);
    let den = (1.0 + te)
        * (1.0 - x2 * te)
        * (2.0 - x2 * (1.0 + te + te * te) + x2 * x2 * x2 * te * te * te);
    num / den
}

/// Total mean photon number ⟨n_a + n_b⟩ of the heralded state on the
/// ideal-detector family, by geometric resummation of the state diagonal:
///
/// E(x, τ_eff) = 2x²τ_eff(1−x²) [ (1−x²)⁻² − (1+τ_eff)(1−x²τ_eff)⁻²
///               + τ_eff(1−x²τ_eff²)⁻² ] / p₁₁(x, τ_eff).
///
/// Cross-checked against `mean_photons_numerical` on the simulated state.
pub fn ips_total_mean_photons(x: f64, tau_eff: f64) -> f64 {
    let x2 = x * x;
    let te = tau_eff;
    let series = 1.0 / (1.0 - x2).powi(2) - (1.0 + te) / (1.0 - x2 * te).powi(2)
        + te / (1.0 - x2 * te * te).powi(2);
    (1.0 - x2) * 2.0 * x2 * te * series / p11_effective_closed(x, te)
}

/// Photon-number moments of a two-mode state and the resulting
/// difference-number squeezing ratio.
pub fn correlation_report(rho: &DensityOperator) -> Result<CorrelationReport> {
    if rho.n_modes() != 2 {
        return Err(Error::DimensionMismatch {
            expected: "2 modes".into(),
            got: format!("{} modes", rho.n_modes()),
        });
    }
    let trunc = rho.trunc().clone();
    let n_a = FockOperator::number_operator(trunc.clone(), 0)?;
    let n_b = FockOperator::number_operator(trunc.clone(), 1)?;
    let n_a2 = n_a.compose(&n_a)?;
    let n_b2 = n_b.compose(&n_b)?;
    let n_ab = n_a.compose(&n_b)?;

    let mean_a = rho.expectation(&n_a)?.re;
    let mean_b = rho.expectation(&n_b)?.re;
    let mean_a2 = rho.expectation(&n_a2)?.re;
    let mean_b2 = rho.expectation(&n_b2)?.re;
    let mean_ab = rho.expectation(&n_ab)?.re;

    let total = mean_a + mean_b;
    if total <= 1e-14 {
        return Err(Error::UndefinedDiagnostic(
            "difference-number squeezing undefined at zero total energy".into(),
        ));
    }
    let mean_d = mean_a - mean_b;
    let mean_d2 = mean_a2 + mean_b2 - 2.0 * mean_ab;
    let var_diff = mean_d2 - mean_d * mean_d;
    Ok(CorrelationReport {
        mean_a,
        mean_b,
        var_diff,
        delta_ab: var_diff / total,
    })
}
