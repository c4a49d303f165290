//! Coherent-state teleportation on a shared two-mode resource: heterodyne
//! conditioning of Alice's mode, Bob's corrective displacement, conditional
//! and average fidelities.
//!
//! The heterodyne element for input |α⟩ and outcome β is implemented in its
//! rank-1 form Π_a(β) = (1/π)|(α+β)*⟩⟨(α+β)*|, the transposition convention
//! that reproduces the twin-beam benchmark F̄ = (1+x)/2 through the full
//! numerical pipeline. Bob displaces his mode as ρ_out = D†(β) ρ_b D(β).

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{DensityOperator, FockOperator, TruncationConfig};
use crate::optics::{coherent_amplitudes, displacement_block};
use crate::util::{gauss_legendre, pairwise_sum, poisson_tail};

/// Everything conditioned on a single heterodyne outcome β.
#[derive(Clone, Debug)]
pub struct TeleportOutcome {
    /// Measured displacement β = x₋ + i p₊.
    pub beta: C64,
    /// Outcome probability density p(β).
    pub prob_density: f64,
    /// Bob's state after the corrective displacement.
    pub rho_out: DensityOperator,
    /// ⟨α|ρ_out|α⟩.
    pub fidelity: f64,
}

/// Polar quadrature rule over the outcome plane, centered on the Gaussian
/// weight of the integrand: Gauss-Legendre radially, trapezoid in angle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureGrid {
    pub radial: usize,
    pub angular: usize,
    pub radius: f64,
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        Self {
            radial: 40,
            angular: 64,
            radius: 6.0,
        }
    }
}

impl QuadratureGrid {
    /// Default rule with the radius widened for large input amplitudes.
    pub fn for_input(alpha: C64) -> Self {
        Self {
            radius: 6.0_f64.max(alpha.norm() + 6.0),
            ..Self::default()
        }
    }

    /// Estimated probability mass beyond the integration disk; the Gaussian
    /// overlap factor e^{−|α+β|²} bounds the integrand tail.
    pub fn neglected_mass(&self) -> f64 {
        (1.0 + self.radius * self.radius) * (-self.radius * self.radius).exp()
    }

    fn check(&self) -> Result<()> {
        if self.radial == 0 || self.angular == 0 {
            return Err(Error::InvalidParameter {
                name: "quadrature nodes",
                value: 0.0,
                requirement: "at least one radial and one angular node",
            });
        }
        let mass = self.neglected_mass();
        if mass > 1e-8 {
            return Err(Error::QuadratureTail {
                radius: self.radius,
                mass,
            });
        }
        Ok(())
    }
}

fn expect_two_mode_square(rho: &DensityOperator) -> Result<usize> {
    if rho.n_modes() != 2 || rho.trunc().mode_dim(0) != rho.trunc().mode_dim(1) {
        return Err(Error::DimensionMismatch {
            expected: "2 modes with equal cutoffs".into(),
            got: format!("{:?}", rho.trunc().dims()),
        });
    }
    Ok(rho.trunc().mode_dim(0))
}

/// Heterodyne POVM element (1/π)|(α+β)*⟩⟨(α+β)*| on Alice's mode.
/// Rank 1, positive, trace 1/π up to the coherent tail beyond the cutoff.
pub fn heterodyne_povm(alpha: C64, beta: C64, trunc: &TruncationConfig) -> Result<FockOperator> {
    if trunc.n_modes() != 1 {
        return Err(Error::DimensionMismatch {
            expected: "1 mode".into(),
            got: format!("{} modes", trunc.n_modes()),
        });
    }
    let gamma = (alpha + beta).conj();
    let d = trunc.mode_dim(0);
    let tail = poisson_tail(d, gamma.norm_sqr());
    if tail > trunc.tail_tol() {
        return Err(Error::TruncationTail {
            mass: tail,
            tol: trunc.tail_tol(),
            context: format!("heterodyne element at |alpha+beta|^2 = {}", gamma.norm_sqr()),
        });
    }
    let c = coherent_amplitudes(gamma, d);
    let mut elems = DMatrix::<C64>::zeros(d, d);
    let inv_pi = 1.0 / std::f64::consts::PI;
    for j in 0..d {
        let cj = c[j].conj() * inv_pi;
        for i in 0..d {
            elems[(i, j)] = c[i] * cj;
        }
    }
    FockOperator::new(trunc.clone(), elems)
}

/// Projects Alice's mode of a two-mode ρ onto the (unnormalized) coherent
/// vector |γ⟩ and returns (p, ρ_b) with p = Tr ρ_b/π the outcome density
/// and ρ_b normalized when p > 0.
fn condition_on_coherent(rho: &DensityOperator, d: usize, gamma: C64) -> (f64, DMatrix<C64>) {
    let c = coherent_amplitudes(gamma, d);
    let elems = rho.elems();
    // partial[j, (i', j')] = Σ_i c*_i rho[(i,j),(i',j')]
    let joint = d * d;
    let mut partial = DMatrix::<C64>::zeros(d, joint);
    for i in 0..d {
        let ci = c[i].conj();
        if ci == C64::new(0.0, 0.0) {
            continue;
        }
        let base = i * d;
        for col in 0..joint {
            for j in 0..d {
                partial[(j, col)] += ci * elems[(base + j, col)];
            }
        }
    }
    // rho_b[j, j'] = Σ_i' partial[j, (i', j')] c_{i'}
    let mut rho_b = DMatrix::<C64>::zeros(d, d);
    for ip in 0..d {
        let cip = c[ip];
        if cip == C64::new(0.0, 0.0) {
            continue;
        }
        let base = ip * d;
        for jp in 0..d {
            let w = cip;
            for j in 0..d {
                rho_b[(j, jp)] += partial[(j, base + jp)] * w;
            }
        }
    }
    let trace: f64 = (0..d).map(|j| rho_b[(j, j)].re).sum();
    let p = trace / std::f64::consts::PI;
    if trace > 0.0 {
        rho_b /= C64::new(trace, 0.0);
    }
    (p, rho_b)
}

/// Outcome density p(β) = Tr{ρ Π_a(β) ⊗ 𝟙}; nonnegative and normalized to
/// 1 over the β plane.
pub fn outcome_probability(rho: &DensityOperator, alpha: C64, beta: C64) -> Result<f64> {
    let d = expect_two_mode_square(rho)?;
    let gamma = (alpha + beta).conj();
    Ok(condition_on_coherent(rho, d, gamma).0)
}

/// Working cutoff large enough that Bob's displaced state and the coherent
/// target both fit with negligible tails.
fn displacement_work_dim(state_dim: usize, beta: C64, alpha: C64) -> usize {
    let reach = ((state_dim - 1) as f64).sqrt() + beta.norm() + alpha.norm();
    let dim = (reach * reach + 4.0 * reach).ceil() as usize + 16;
    dim.max(state_dim)
}

/// Bob's conditional state after the corrective displacement,
/// ρ_out = D†(β) ρ_b D(β), on an enlarged cutoff chosen so the displacement
/// is numerically unitary.
pub fn teleported_state(rho: &DensityOperator, alpha: C64, beta: C64) -> Result<DensityOperator> {
    let d = expect_two_mode_square(rho)?;
    let gamma = (alpha + beta).conj();
    let (p, rho_b) = condition_on_coherent(rho, d, gamma);
    if p <= 1e-300 {
        return Err(Error::ConditioningUndefined(format!(
            "outcome beta = {beta} has vanishing probability"
        )));
    }
    let out = displace_conditional(&rho_b, d, beta, alpha)?;
    Ok(out)
}

fn displace_conditional(
    rho_b: &DMatrix<C64>,
    d: usize,
    beta: C64,
    alpha: C64,
) -> Result<DensityOperator> {
    let d_work = displacement_work_dim(d, beta, alpha);
    // D†(β)|m⟩ = D(−β)|m⟩: columns of the rectangular block
    let block = displacement_block(-beta, d_work, d);
    let out = &block * rho_b * block.adjoint();
    let trunc = TruncationConfig::single_mode(d_work)?;
    DensityOperator::new(trunc, out)
}

/// Conditional fidelity F(β) = ⟨α|ρ_out|α⟩.
pub fn conditional_fidelity(rho: &DensityOperator, alpha: C64, beta: C64) -> Result<f64> {
    Ok(teleport_outcome(rho, alpha, beta)?.fidelity)
}

/// Runs the full conditional pipeline for one outcome β.
pub fn teleport_outcome(rho: &DensityOperator, alpha: C64, beta: C64) -> Result<TeleportOutcome> {
    let d = expect_two_mode_square(rho)?;
    let gamma = (alpha + beta).conj();
    let (p, rho_b) = condition_on_coherent(rho, d, gamma);
    if p <= 1e-300 {
        return Err(Error::ConditioningUndefined(format!(
            "outcome beta = {beta} has vanishing probability"
        )));
    }
    let rho_out = displace_conditional(&rho_b, d, beta, alpha)?;
    let target = coherent_amplitudes(alpha, rho_out.trunc().mode_dim(0));
    let fidelity = (target.adjoint() * rho_out.elems() * &target)[(0, 0)].re;
    Ok(TeleportOutcome {
        beta,
        prob_density: p,
        rho_out,
        fidelity,
    })
}

/// Average fidelity and total probability mass from one quadrature pass.
#[derive(Clone, Copy, Debug)]
pub struct TeleportQuadrature {
    /// ∫ d²β p(β) F(β)
    pub avg_fidelity: f64,
    /// ∫ d²β p(β); a normalization diagnostic, 1 within the rule accuracy
    pub probability_mass: f64,
}

/// Integrates p(β) and p(β)F(β) over the outcome plane on a polar grid
/// centered at β = −α. Nodes are evaluated independently (in parallel) and
/// reduced pairwise in a fixed order, so results are reproducible.
pub fn integrate_average_fidelity(
    rho: &DensityOperator,
    alpha: C64,
    grid: &QuadratureGrid,
    jobs: Option<usize>,
) -> Result<TeleportQuadrature> {
    grid.check()?;
    let d = expect_two_mode_square(rho)?;
    let (gl_nodes, gl_weights) = gauss_legendre(grid.radial);
    let d_theta = 2.0 * std::f64::consts::PI / grid.angular as f64;

    let mut nodes = Vec::with_capacity(grid.radial * grid.angular);
    for (xi, wi) in gl_nodes.iter().zip(&gl_weights) {
        let r = 0.5 * grid.radius * (xi + 1.0);
        let wr = 0.5 * grid.radius * wi;
        for k in 0..grid.angular {
            let theta = k as f64 * d_theta;
            nodes.push((r, wr * r * d_theta, theta));
        }
    }

    let eval = |&(r, w, theta): &(f64, f64, f64)| -> (f64, f64) {
        let beta = -alpha + C64::from_polar(r, theta);
        let gamma = (alpha + beta).conj();
        let (p, rho_b) = condition_on_coherent(rho, d, gamma);
        if p <= 1e-300 {
            return (0.0, 0.0);
        }
        let d_work = displacement_work_dim(d, beta, alpha);
        let block = displacement_block(-beta, d_work, d);
        let rho_out = &block * &rho_b * block.adjoint();
        let target = coherent_amplitudes(alpha, d_work);
        let fidelity = (target.adjoint() * &rho_out * &target)[(0, 0)].re;
        (w * p, w * p * fidelity)
    };

    let contributions: Vec<(f64, f64)> = match jobs {
        Some(1) => nodes.iter().map(eval).collect(),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidSweep(format!("thread pool: {e}")))?;
            pool.install(|| nodes.par_iter().map(eval).collect())
        }
        None => nodes.par_iter().map(eval).collect(),
    };
    let mass: Vec<f64> = contributions.iter().map(|c| c.0).collect();
    let weighted: Vec<f64> = contributions.iter().map(|c| c.1).collect();
    Ok(TeleportQuadrature {
        avg_fidelity: pairwise_sum(&weighted),
        probability_mass: pairwise_sum(&mass),
    })
}

/// Average fidelity F̄ = ∫ d²β p(β) F(β) by quadrature over the full
/// numerical pipeline.
pub fn average_fidelity_quadrature(
    rho: &DensityOperator,
    alpha: C64,
    grid: &QuadratureGrid,
) -> Result<f64> {
    Ok(integrate_average_fidelity(rho, alpha, grid, None)?.avg_fidelity)
}

/// Closed-form average fidelity of teleportation with the heralded state on
/// the ideal-detector family,
///
/// F̄(x, τ_eff) = ½ (1+x)(1+xτ_eff)(1−x²τ_eff)(2−2xτ_eff+x²τ_eff)
///               / { (1+x²τ_eff)[1+(1−τ_eff)x][2−(2+(1−τ_eff)x)xτ_eff] }.
///
/// At τ_eff = 1 this reduces to the conclusive photon-subtraction result.
pub fn average_fidelity_closed(x: f64, tau_eff: f64) -> f64 {
    let te = tau_eff;
    let first = (1.0 + x) * (1.0 + x * te) * (1.0 - x * x * te)
        / ((1.0 + x * x * te) * (1.0 + (1.0 - te) * x));
    let second = (2.0 - 2.0 * x * te + x * x * te) / (2.0 - (2.0 + (1.0 - te) * x) * x * te);
    0.5 * first * second
}

/// Twin-beam benchmark F̄_TWB(x) = (1+x)/2.
pub fn twb_average_fidelity(x: f64) -> f64 {
    (1.0 + x) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ips::{ips_state_simulated, IpsParams};
    use crate::optics::{twb_state, TwbSpec};
    use approx::assert_abs_diff_eq;

    fn twb_resource(x: f64) -> DensityOperator {
        let spec = TwbSpec::new(x).unwrap();
        let trunc = spec.trunc(1e-12).unwrap();
        twb_state(&spec, &trunc).unwrap().density()
    }

    #[test]
    fn heterodyne_element_is_rank_one_with_trace_inv_pi() {
        let trunc = TruncationConfig::single_mode(40).unwrap();
        let alpha = C64::new(0.4, 0.1);
        let beta = C64::new(-0.2, 0.6);
        let povm = heterodyne_povm(alpha, beta, &trunc).unwrap();
        let trace: f64 = (0..40).map(|i| povm.elems()[(i, i)].re).sum();
        assert_abs_diff_eq!(trace, 1.0 / std::f64::consts::PI, epsilon = 1e-10);
        // vacuum element (1/π) e^{−|α+β|²}
        let expect = (-(alpha + beta).norm_sqr()).exp() / std::f64::consts::PI;
        assert_abs_diff_eq!(povm.entry(&[0], &[0]).re, expect, epsilon = 1e-12);
    }

    #[test]
    fn heterodyne_element_at_origin_is_vacuum_projector() {
        let trunc = TruncationConfig::single_mode(10).unwrap();
        let povm = heterodyne_povm(C64::new(0.0, 0.0), C64::new(0.0, 0.0), &trunc).unwrap();
        assert_abs_diff_eq!(
            povm.entry(&[0], &[0]).re,
            1.0 / std::f64::consts::PI,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(povm.entry(&[1], &[1]).re, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn heterodyne_element_rejects_outcomes_beyond_the_cutoff() {
        let trunc = TruncationConfig::single_mode(6).unwrap();
        assert!(matches!(
            heterodyne_povm(C64::new(0.0, 0.0), C64::new(4.0, 0.0), &trunc),
            Err(Error::TruncationTail { .. })
        ));
    }

    #[test]
    fn vacuum_resource_outcome_density_is_gaussian() {
        // x -> 0 resource at alpha = 0: p(beta) = e^{-|beta|^2}/π
        let trunc = TruncationConfig::uniform(2, 8).unwrap();
        let rho = crate::fock::PureState::basis_state(trunc, &[0, 0])
            .unwrap()
            .density();
        for &(re, im) in &[(0.0, 0.0), (0.7, -0.3), (1.5, 1.0)] {
            let beta = C64::new(re, im);
            let p = outcome_probability(&rho, C64::new(0.0, 0.0), beta).unwrap();
            let expect = (-beta.norm_sqr()).exp() / std::f64::consts::PI;
            assert_abs_diff_eq!(p, expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn outcome_density_is_shift_covariant_in_alpha() {
        // p(β; α) = p(β + α − α'; α')
        let params = IpsParams::from_effective(0.3, 0.9).unwrap();
        let trunc = params.state_trunc(1e-12).unwrap();
        let rho = ips_state_simulated(&params, &trunc).unwrap();
        let alpha = C64::new(0.5, -0.2);
        let alpha_p = C64::new(-0.1, 0.4);
        let beta = C64::new(0.3, 0.8);
        let lhs = outcome_probability(&rho, alpha, beta).unwrap();
        let rhs = outcome_probability(&rho, alpha_p, beta + alpha - alpha_p).unwrap();
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-13);
    }

    #[test]
    fn vacuum_resource_teleports_vacuum_at_zero_outcome() {
        let trunc = TruncationConfig::uniform(2, 8).unwrap();
        let rho = crate::fock::PureState::basis_state(trunc, &[0, 0])
            .unwrap()
            .density();
        let out = teleport_outcome(&rho, C64::new(0.0, 0.0), C64::new(0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(out.fidelity, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out.rho_out.entry(&[0], &[0]).re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out.rho_out.trace(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn teleported_state_has_unit_trace_before_renormalization() {
        let params = IpsParams::from_effective(0.3, 0.9).unwrap();
        let trunc = params.state_trunc(1e-12).unwrap();
        let rho = ips_state_simulated(&params, &trunc).unwrap();
        let d = trunc.mode_dim(0);
        let beta = C64::new(1.1, -0.7);
        let alpha = C64::new(0.3, 0.2);
        let gamma = (alpha + beta).conj();
        let (_, rho_b) = condition_on_coherent(&rho, d, gamma);
        let d_work = displacement_work_dim(d, beta, alpha);
        let block = displacement_block(-beta, d_work, d);
        let out = &block * &rho_b * block.adjoint();
        let trace: f64 = (0..d_work).map(|i| out[(i, i)].re).sum();
        assert_abs_diff_eq!(trace, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn displacement_covariance_of_the_output() {
        // ρ_out(β) = D†(β) ρ_b D(β) entrywise for one spot-checked β
        let params = IpsParams::from_effective(0.3, 0.9).unwrap();
        let trunc = params.state_trunc(1e-12).unwrap();
        let rho = ips_state_simulated(&params, &trunc).unwrap();
        let d = trunc.mode_dim(0);
        let alpha = C64::new(0.0, 0.0);
        let beta = C64::new(0.8, 0.5);

        let out = teleport_outcome(&rho, alpha, beta).unwrap();
        let d_work = out.rho_out.trunc().mode_dim(0);

        // independent route: embed ρ_b, then conjugate with the square D(β)
        let (_, rho_b) = condition_on_coherent(&rho, d, (alpha + beta).conj());
        let mut embedded = DMatrix::<C64>::zeros(d_work, d_work);
        embedded.view_mut((0, 0), (d, d)).copy_from(&rho_b);
        let disp = displacement_block(beta, d_work, d_work);
        let direct = disp.adjoint() * embedded * &disp;
        let dev = (out.rho_out.elems() - &direct)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-10, "covariance deviation {dev}");
    }

    #[test]
    fn conditional_fidelity_stays_within_bounds() {
        let params = IpsParams::from_effective(0.3, 0.8).unwrap();
        let trunc = params.state_trunc(1e-12).unwrap();
        let rho = ips_state_simulated(&params, &trunc).unwrap();
        for &(re, im) in &[(0.0, 0.0), (0.9, 0.4), (-1.3, 0.2), (2.0, -2.0)] {
            let f = conditional_fidelity(&rho, C64::new(0.1, 0.1), C64::new(re, im)).unwrap();
            assert!(({ -1e-10 }..=1.0 + 1e-10).contains(&f), "fidelity {f}");
        }
    }

    #[test]
    fn quadrature_grid_guards() {
        let mut grid = QuadratureGrid::default();
        grid.radius = 2.0;
        let trunc = TruncationConfig::uniform(2, 4).unwrap();
        let rho = crate::fock::PureState::basis_state(trunc, &[0, 0])
            .unwrap()
            .density();
        assert!(matches!(
            average_fidelity_quadrature(&rho, C64::new(0.0, 0.0), &grid),
            Err(Error::QuadratureTail { .. })
        ));
        assert!(QuadratureGrid::for_input(C64::new(2.0, 0.0)).radius >= 8.0);
    }

    #[test]
    fn twb_quadrature_recovers_the_closed_benchmark() {
        // mid-density check; the acceptance suite runs the full grid
        let rho = twb_resource(0.4);
        let out =
            integrate_average_fidelity(&rho, C64::new(0.0, 0.0), &QuadratureGrid::default(), None)
                .unwrap();
        assert_abs_diff_eq!(out.avg_fidelity, 0.7, epsilon = 1e-5);
        assert_abs_diff_eq!(out.probability_mass, 1.0, epsilon = 1e-5);
    }

    #[test]
    fn ips_quadrature_matches_the_closed_form() {
        let params = IpsParams::from_effective(0.3, 0.9).unwrap();
        let trunc = params.state_trunc(1e-12).unwrap();
        let rho = ips_state_simulated(&params, &trunc).unwrap();
        let fbar =
            average_fidelity_quadrature(&rho, C64::new(0.0, 0.0), &QuadratureGrid::default())
                .unwrap();
        assert_abs_diff_eq!(fbar, average_fidelity_closed(0.3, 0.9), epsilon = 1e-4);
    }

    #[test]
    fn quadrature_is_deterministic_across_thread_counts() {
        let rho = twb_resource(0.3);
        let grid = QuadratureGrid {
            radial: 20,
            angular: 32,
            radius: 6.0,
        };
        let serial =
            integrate_average_fidelity(&rho, C64::new(0.0, 0.0), &grid, Some(1)).unwrap();
        let parallel =
            integrate_average_fidelity(&rho, C64::new(0.0, 0.0), &grid, Some(4)).unwrap();
        assert_eq!(serial.avg_fidelity.to_bits(), parallel.avg_fidelity.to_bits());
        assert_eq!(
            serial.probability_mass.to_bits(),
            parallel.probability_mass.to_bits()
        );
    }

    #[test]
    fn closed_form_reference_values() {
        assert_abs_diff_eq!(
            average_fidelity_closed(0.5, 0.9),
            0.8057571719440179,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(average_fidelity_closed(0.5, 1.0), 0.84375, epsilon = 1e-14);
        // x -> 0: the classical boundary
        assert_abs_diff_eq!(average_fidelity_closed(0.0, 0.9), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn conclusive_subtraction_limit_beats_the_twin_beam_everywhere() {
        for i in 1..100 {
            let x = i as f64 / 100.0;
            assert!(average_fidelity_closed(x, 1.0) > twb_average_fidelity(x));
        }
    }

    #[test]
    fn twb_fidelity_reference_points() {
        assert_abs_diff_eq!(twb_average_fidelity(1.0 / 3.0), 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(twb_average_fidelity(0.0), 0.5, epsilon = 1e-15);
    }
}
