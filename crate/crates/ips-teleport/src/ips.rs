//! ON/OFF conditioning on the reflected arms: POVM construction, the double
//! click probability, and the heralded two-mode state by two independent
//! routes (brute-force four-mode simulation and the explicit double sum).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{DensityOperator, FockOperator, PureState, TruncationConfig};
use crate::optics::{post_bs_state, BeamSplitterSpec, TwbSpec};
use crate::util::binomial;

/// Physical knobs of the conditioning stage: twin-beam parameter x,
/// transmissivity τ and detector efficiency η.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IpsParams {
    x: f64,
    tau: f64,
    eta: f64,
}

impl IpsParams {
    pub fn new(x: f64, tau: f64, eta: f64) -> Result<Self> {
        TwbSpec::new(x)?;
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "tau",
                value: tau,
                requirement: "0 < tau <= 1",
            });
        }
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "eta",
                value: eta,
                requirement: "0 < eta <= 1",
            });
        }
        Ok(Self { x, tau, eta })
    }

    /// Ideal-detector parameterization (η = 1, τ = τ_eff); the family on
    /// which the closed forms for the conditional state are exact.
    pub fn from_effective(x: f64, tau_eff: f64) -> Result<Self> {
        Self::new(x, tau_eff, 1.0)
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn tau_eff(&self) -> f64 {
        effective_transmissivity(self.tau, self.eta)
    }

    pub fn twb(&self) -> TwbSpec {
        TwbSpec::new(self.x).expect("validated at construction")
    }

    /// Two-mode layout at the rule cutoff for this x.
    pub fn state_trunc(&self, tail_tol: f64) -> Result<TruncationConfig> {
        self.twb().trunc(tail_tol)
    }
}

/// τ_eff = 1 − η(1−τ): inefficient detection behind a splitter of
/// transmissivity τ clicks exactly like ideal detection behind τ_eff.
pub fn effective_transmissivity(tau: f64, eta: f64) -> f64 {
    1.0 - eta * (1.0 - tau)
}

/// Diagonal of the no-click element: ⟨j|Π₀(η)|j⟩ = (1−η)^j.
fn no_click_diagonal(eta: f64, dim: usize) -> Vec<f64> {
    let mut diag = vec![0.0; dim];
    let mut v = 1.0;
    for entry in diag.iter_mut() {
        *entry = v;
        v *= 1.0 - eta;
    }
    diag
}

/// ON/OFF POVM {Π₀, Π₁} of a single detector with efficiency η.
/// Π₁ is stored as 1 − (1−η)^j entrywise, so Π₀ + Π₁ = 𝟙 holds exactly.
pub fn on_off_povm(eta: f64, trunc: &TruncationConfig) -> Result<(FockOperator, FockOperator)> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "eta",
            value: eta,
            requirement: "0 < eta <= 1",
        });
    }
    if trunc.n_modes() != 1 {
        return Err(Error::DimensionMismatch {
            expected: "1 mode".into(),
            got: format!("{} modes", trunc.n_modes()),
        });
    }
    let dim = trunc.mode_dim(0);
    let off = no_click_diagonal(eta, dim);
    let on: Vec<f64> = off.iter().map(|p| 1.0 - p).collect();
    Ok((
        FockOperator::from_real_diagonal(trunc.clone(), &off)?,
        FockOperator::from_real_diagonal(trunc.clone(), &on)?,
    ))
}

/// Double-click element Π₁,c ⊗ Π₁,d on the two reflected modes.
pub fn product_povm_11(eta: f64, trunc: &TruncationConfig) -> Result<FockOperator> {
    if trunc.n_modes() != 2 {
        return Err(Error::DimensionMismatch {
            expected: "2 modes".into(),
            got: format!("{} modes", trunc.n_modes()),
        });
    }
    let single_c = TruncationConfig::new(vec![trunc.mode_dim(0)], trunc.tail_tol())?;
    let single_d = TruncationConfig::new(vec![trunc.mode_dim(1)], trunc.tail_tol())?;
    let (_, on_c) = on_off_povm(eta, &single_c)?;
    let (_, on_d) = on_off_povm(eta, &single_d)?;
    on_c.tensor(&on_d)
}

/// Double-click probability p₁₁(x, τ, η) in closed form.
pub fn p11_closed(params: &IpsParams) -> f64 {
    let (x, tau, eta) = (params.x, params.tau, params.eta);
    let te = effective_transmissivity(tau, eta);
    let x2 = x * x;
    x2 * eta * eta * (1.0 - tau) * (1.0 - tau) * (1.0 + x2 * te)
        / ((1.0 - x2 * te) * (1.0 - x2 * te * te))
}

/// The same probability in the effective-transmissivity form
/// p₁₁(x, τ_eff) = x²(1−τ_eff)²(1+x²τ_eff) / [(1−x²τ_eff)(1−x²τ_eff²)];
/// algebraically identical to `p11_closed` under τ_eff = 1 − η(1−τ).
pub fn p11_effective_closed(x: f64, tau_eff: f64) -> f64 {
    let x2 = x * x;
    let r = 1.0 - tau_eff;
    x2 * r * r * (1.0 + x2 * tau_eff) / ((1.0 - x2 * tau_eff) * (1.0 - x2 * tau_eff * tau_eff))
}

fn expect_rule_cutoff(params: &IpsParams, trunc: &TruncationConfig) -> Result<()> {
    let d = trunc.dims().iter().copied().min().unwrap_or(0);
    let mass = params.x.powi(2 * d as i32);
    if mass > trunc.tail_tol() {
        return Err(Error::TruncationTail {
            mass,
            tol: trunc.tail_tol(),
            context: format!("twin-beam cutoff {d} too small for x = {}", params.x),
        });
    }
    Ok(())
}

fn four_mode_trunc(trunc: &TruncationConfig) -> Result<TruncationConfig> {
    if trunc.n_modes() != 2 {
        return Err(Error::DimensionMismatch {
            expected: "2 modes".into(),
            got: format!("{} modes", trunc.n_modes()),
        });
    }
    let d0 = trunc.mode_dim(0);
    let d1 = trunc.mode_dim(1);
    TruncationConfig::new(vec![d0, d1, d0, d1], trunc.tail_tol())
}

/// Brute-force double-click probability: builds the four-mode post-splitter
/// state and sums ⟨ψ|𝟙⊗𝟙⊗Π₁₁|ψ⟩ over the Fock basis.
pub fn p11_numerical(params: &IpsParams, trunc: &TruncationConfig) -> Result<f64> {
    expect_rule_cutoff(params, trunc)?;
    let four = four_mode_trunc(trunc)?;
    let psi = post_bs_state(
        &params.twb(),
        &BeamSplitterSpec::new(params.tau)?,
        &four,
    )?;
    let w_c = click_diag(params.eta, four.mode_dim(2));
    let w_d = click_diag(params.eta, four.mode_dim(3));
    Ok(click_weighted_norm(&psi, &w_c, &w_d))
}

fn click_diag(eta: f64, dim: usize) -> Vec<f64> {
    no_click_diagonal(eta, dim)
        .into_iter()
        .map(|p| 1.0 - p)
        .collect()
}

fn click_weighted_norm(psi: &PureState, w_c: &[f64], w_d: &[f64]) -> f64 {
    let dims = psi.trunc().dims();
    let (da, db, dc, dd) = (dims[0], dims[1], dims[2], dims[3]);
    let amps = psi.amplitudes();
    let mut acc = 0.0;
    let mut flat = 0;
    for _a in 0..da {
        for _b in 0..db {
            for wc in w_c.iter().take(dc) {
                for wd in w_d.iter().take(dd) {
                    let m = amps[flat].norm_sqr();
                    if m != 0.0 {
                        acc += wc * wd * m;
                    }
                    flat += 1;
                }
            }
        }
    }
    acc
}

/// Pre-normalized conditional operator Tr_cd{|ψ⟩⟨ψ| (𝟙⊗𝟙⊗W_c⊗W_d)} for
/// diagonal click weights, together with its trace.
fn conditioned_two_mode(psi: &PureState, w_c: &[f64], w_d: &[f64]) -> (DMatrix<C64>, f64) {
    let dims = psi.trunc().dims();
    let d_ab = dims[0] * dims[1];
    let d_cd = dims[2] * dims[3];
    let amps = psi.amplitudes();

    // T[pq, ab] = amplitude — the flat layout is column-major for this shape
    let t = DMatrix::<C64>::from_column_slice(d_cd, d_ab, amps.as_slice());
    let mut tw = t.clone();
    for (pq_index, mut row) in tw.row_iter_mut().enumerate() {
        let w = w_c[pq_index / dims[3]] * w_d[pq_index % dims[3]];
        row *= C64::new(w, 0.0);
    }
    let m = tw.transpose() * t.conjugate();
    let trace = (0..d_ab).map(|i| m[(i, i)].re).sum();
    (m, trace)
}

/// Heralded IPS state by full simulation: four-mode state, double-click POVM
/// on the reflected arms, partial trace, normalization.
pub fn ips_state_simulated(params: &IpsParams, trunc: &TruncationConfig) -> Result<DensityOperator> {
    expect_rule_cutoff(params, trunc)?;
    if params.tau_eff() >= 1.0 {
        return Err(Error::ConditioningUndefined(format!(
            "tau_eff = {} leaves nothing to subtract (p11 = 0)",
            params.tau_eff()
        )));
    }
    let four = four_mode_trunc(trunc)?;
    let psi = post_bs_state(
        &params.twb(),
        &BeamSplitterSpec::new(params.tau)?,
        &four,
    )?;
    let w_c = click_diag(params.eta, four.mode_dim(2));
    let w_d = click_diag(params.eta, four.mode_dim(3));
    let (m, trace) = conditioned_two_mode(&psi, &w_c, &w_d);
    if trace <= 1e-300 {
        return Err(Error::ConditioningUndefined(
            "double-click probability vanished".into(),
        ));
    }
    DensityOperator::new(trunc.clone(), m / C64::new(trace, 0.0))
}

/// Weight f_{h,k}(τ,η) = [1−(1−η)^h][1−(1−η)^k]((1−τ)/τ)^{h+k} of the term
/// in the conditional state where h and k photons left through the splitters.
pub fn click_pair_weight(tau: f64, eta: f64, h: usize, k: usize) -> f64 {
    let miss = 1.0 - eta;
    (1.0 - miss.powi(h as i32))
        * (1.0 - miss.powi(k as i32))
        * ((1.0 - tau) / tau).powi((h + k) as i32)
}

/// Heralded IPS state from the explicit double-sum matrix elements, with the
/// sums truncated at the state cutoff (residual of order (xτ)^(2d)).
pub fn ips_state_direct(params: &IpsParams, trunc: &TruncationConfig) -> Result<DensityOperator> {
    expect_rule_cutoff(params, trunc)?;
    if params.tau_eff() >= 1.0 {
        return Err(Error::ConditioningUndefined(format!(
            "tau_eff = {} leaves nothing to subtract (p11 = 0)",
            params.tau_eff()
        )));
    }
    if trunc.n_modes() != 2 {
        return Err(Error::DimensionMismatch {
            expected: "2 modes".into(),
            got: format!("{} modes", trunc.n_modes()),
        });
    }
    let d = trunc.mode_dim(0).min(trunc.mode_dim(1));
    let (x, tau, eta) = (params.x, params.tau, params.eta);
    let dim = trunc.joint_dim();
    let mut elems = DMatrix::<C64>::zeros(dim, dim);

    let xt = x * tau;
    for n in 0..d {
        for m in 0..d {
            let xt_pow = xt.powi((n + m) as i32);
            let top = n.min(m);
            for h in 0..=top {
                for k in 0..=top {
                    let f = click_pair_weight(tau, eta, h, k);
                    if f == 0.0 {
                        continue;
                    }
                    let w = xt_pow
                        * f
                        * (binomial(n, h) * binomial(n, k) * binomial(m, h) * binomial(m, k))
                            .sqrt();
                    let row = trunc.flat_index(&[n - k, n - h]);
                    let col = trunc.flat_index(&[m - k, m - h]);
                    elems[(row, col)] += C64::new(w, 0.0);
                }
            }
        }
    }
    // constructor renormalizes; the (1−x²)/p11 prefactor cancels there
    DensityOperator::new(trunc.clone(), elems)
}

/// Probabilities of the four ON/OFF outcome pairs (00, 01, 10, 11) on the
/// reflected modes. The 11 entry is the heralding probability.
pub fn outcome_probabilities(params: &IpsParams, trunc: &TruncationConfig) -> Result<[f64; 4]> {
    expect_rule_cutoff(params, trunc)?;
    let four = four_mode_trunc(trunc)?;
    let psi = post_bs_state(
        &params.twb(),
        &BeamSplitterSpec::new(params.tau)?,
        &four,
    )?;
    let off_c = no_click_diagonal(params.eta, four.mode_dim(2));
    let off_d = no_click_diagonal(params.eta, four.mode_dim(3));
    let on_c = click_diag(params.eta, four.mode_dim(2));
    let on_d = click_diag(params.eta, four.mode_dim(3));
    Ok([
        click_weighted_norm(&psi, &off_c, &off_d),
        click_weighted_norm(&psi, &off_c, &on_d),
        click_weighted_norm(&psi, &on_c, &off_d),
        click_weighted_norm(&psi, &on_c, &on_d),
    ])
}
