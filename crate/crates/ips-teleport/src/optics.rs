//! Optical building blocks: twin beams, coherent states, beam splitters,
//! displacement operators, and the four-mode state after the two splitters.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{tensor_product, FockOperator, PureState, TruncationConfig};
use crate::util::{binomial, poisson_tail};

/// Twin-beam parameter x (squeezing parameter, 0 < x < 1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwbSpec {
    x: f64,
}

impl TwbSpec {
    pub fn new(x: f64) -> Result<Self> {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::InvalidParameter {
                name: "x",
                value: x,
                requirement: "0 < x < 1",
            });
        }
        Ok(Self { x })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    /// Smallest per-mode cutoff d with x^(2d) <= tail_tol; the neglected
    /// twin-beam mass is exactly x^(2d).
    pub fn cutoff(&self, tail_tol: f64) -> usize {
        let mut d = 1;
        while self.x.powi(2 * d as i32) > tail_tol {
            d += 1;
        }
        d
    }

    /// Two-mode layout at the rule cutoff.
    pub fn trunc(&self, tail_tol: f64) -> Result<TruncationConfig> {
        TruncationConfig::new(vec![self.cutoff(tail_tol); 2], tail_tol)
    }
}

/// Beam-splitter transmissivity τ with mixing angle λ_τ = arctan√((1−τ)/τ).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeamSplitterSpec {
    tau: f64,
}

impl BeamSplitterSpec {
    pub fn new(tau: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::InvalidParameter {
                name: "tau",
                value: tau,
                requirement: "0 <= tau <= 1",
            });
        }
        Ok(Self { tau })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn mixing_angle(&self) -> f64 {
        ((1.0 - self.tau) / self.tau).sqrt().atan()
    }
}

/// |twb⟩⟩ = √(1−x²) Σ xⁿ |n,n⟩ on a two-mode layout, renormalized after
/// truncation (the pre-normalization norm is 1 − x^(2d)).
pub fn twb_state(spec: &TwbSpec, trunc: &TruncationConfig) -> Result<PureState> {
    if trunc.n_modes() != 2 {
        return Err(Error::DimensionMismatch {
            expected: "2 modes".into(),
            got: format!("{} modes", trunc.n_modes()),
        });
    }
    let d = trunc.mode_dim(0).min(trunc.mode_dim(1));
    let mut amps = DVector::zeros(trunc.joint_dim());
    let pref = (1.0 - spec.x() * spec.x()).sqrt();
    let mut coeff = pref;
    for n in 0..d {
        amps[trunc.flat_index(&[n, n])] = C64::new(coeff, 0.0);
        coeff *= spec.x();
    }
    PureState::new(trunc.clone(), amps)
}

/// Truncated coherent amplitudes e^(−|γ|²/2) γⁿ/√n!, NOT renormalized.
/// The dropped tail is the Poisson(|γ|²) mass at or above `dim`.
pub(crate) fn coherent_amplitudes(gamma: C64, dim: usize) -> DVector<C64> {
    let mut amps = DVector::zeros(dim);
    amps[0] = C64::new((-gamma.norm_sqr() / 2.0).exp(), 0.0);
    for n in 1..dim {
        amps[n] = amps[n - 1] * gamma / C64::new((n as f64).sqrt(), 0.0);
    }
    amps
}

/// Coherent state |α⟩, renormalized after truncation. Errors when the
/// Poisson tail beyond the cutoff exceeds the tail tolerance.
pub fn coherent_state(alpha: C64, trunc: &TruncationConfig) -> Result<PureState> {
    if trunc.n_modes() != 1 {
        return Err(Error::DimensionMismatch {
            expected: "1 mode".into(),
            got: format!("{} modes", trunc.n_modes()),
        });
    }
    let tail = poisson_tail(trunc.mode_dim(0), alpha.norm_sqr());
    if tail > trunc.tail_tol() {
        return Err(Error::TruncationTail {
            mass: tail,
            tol: trunc.tail_tol(),
            context: format!("coherent state with |alpha|^2 = {}", alpha.norm_sqr()),
        });
    }
    PureState::new(trunc.clone(), coherent_amplitudes(alpha, trunc.mode_dim(0)))
}

/// Two-mode beam-splitter unitary exp[λ_τ(ac† − a†c)], built blockwise per
/// total photon number (the generator commutes with n_a + n_c, so every
/// cross-sector entry is exactly zero). Sectors fully below the cutoff carry
/// the exact mixing matrix; clipped sectors are still exactly unitary.
pub fn beam_splitter_unitary(
    spec: &BeamSplitterSpec,
    trunc: &TruncationConfig,
) -> Result<FockOperator> {
    if trunc.n_modes() != 2 {
        return Err(Error::DimensionMismatch {
            expected: "2 modes".into(),
            got: format!("{} modes", trunc.n_modes()),
        });
    }
    if spec.tau() == 0.0 {
        return Err(Error::InvalidParameter {
            name: "tau",
            value: 0.0,
            requirement: "tau > 0 (total reflection has a divergent mixing angle)",
        });
    }
    let (da, dc) = (trunc.mode_dim(0), trunc.mode_dim(1));
    let lambda = spec.mixing_angle();
    let n = trunc.joint_dim();
    let mut elems = DMatrix::<C64>::zeros(n, n);

    for s in 0..(da + dc - 1) {
        // basis |a, s-a> with both levels inside the cutoffs
        let a_lo = s.saturating_sub(dc - 1);
        let a_hi = s.min(da - 1);
        let size = a_hi - a_lo + 1;
        let mut gen = DMatrix::<f64>::zeros(size, size);
        for (row, a) in (a_lo..=a_hi).enumerate() {
            let c = s - a;
            // a c† : |a, c> -> sqrt(a (c+1)) |a-1, c+1>
            if a > a_lo {
                gen[(row - 1, row)] += (a as f64 * (c + 1) as f64).sqrt();
            }
            // -a† c : |a, c> -> -sqrt((a+1) c) |a+1, c-1>
            if a < a_hi {
                gen[(row + 1, row)] -= ((a + 1) as f64 * c as f64).sqrt();
            }
        }
        let block = real_matrix_exp(&(gen * lambda));
        for (row, a_out) in (a_lo..=a_hi).enumerate() {
            let r = trunc.flat_index(&[a_out, s - a_out]);
            for (col, a_in) in (a_lo..=a_hi).enumerate() {
                let c = trunc.flat_index(&[a_in, s - a_in]);
                elems[(r, c)] = C64::new(block[(row, col)], 0.0);
            }
        }
    }
    FockOperator::new(trunc.clone(), elems)
}

/// Scaling-and-squaring Taylor exponential for small real matrices.
fn real_matrix_exp(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let norm = m.iter().map(|v| v.abs()).fold(0.0, f64::max) * n as f64;
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = m / 2f64.powi(squarings as i32);
    let mut result = DMatrix::<f64>::identity(n, n);
    let mut term = DMatrix::<f64>::identity(n, n);
    for k in 1..=24 {
        term = (&term * &scaled) / k as f64;
        result += &term;
        if term.iter().map(|v| v.abs()).fold(0.0, f64::max) < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Matrix elements ⟨n|D(γ)|m⟩ for n < rows, m < cols, via per-diagonal
/// normalized three-term recurrences seeded by coherent amplitudes. Each
/// entry is the exact infinite-space element, so the block of a large-enough
/// `rows` is numerically unitary on its columns.
pub(crate) fn displacement_block(gamma: C64, rows: usize, cols: usize) -> DMatrix<C64> {
    let z = gamma.norm_sqr();
    let mut out = DMatrix::<C64>::zeros(rows, cols);

    // upper triangle n = m + a: seeds <a|D|0> are the coherent amplitudes
    let seeds = coherent_amplitudes(gamma, rows.max(1));
    for a in 0..rows {
        run_diagonal(z, a, seeds[a], cols.min(rows - a), |k, t| {
            out[(k + a, k)] = t;
        });
    }
    // lower triangle m = n + a: seeds <0|D|a> = c_a(-conj(gamma))
    let seeds = coherent_amplitudes(-gamma.conj(), cols.max(1));
    for a in 1..cols {
        run_diagonal(z, a, seeds[a], rows.min(cols - a), |k, t| {
            out[(k, k + a)] = t;
        });
    }
    out
}

/// Walks one displacement diagonal: t_k = ⟨k+a|D|k⟩ (or its mirror image),
/// in a normalization where the three-term Laguerre recurrence acts on the
/// bounded matrix entries themselves.
fn run_diagonal<F: FnMut(usize, C64)>(z: f64, a: usize, seed: C64, len: usize, mut emit: F) {
    let mut t_prev = C64::new(0.0, 0.0);
    let mut t = seed;
    for k in 0..len {
        emit(k, t);
        let kf = k as f64;
        let af = a as f64;
        let coeff_t = (2.0 * kf + 1.0 + af - z) * ((kf + 1.0) / (kf + 1.0 + af)).sqrt();
        let coeff_prev = if k >= 1 {
            (kf * (kf + af) * (kf + 1.0) / (kf + 1.0 + af)).sqrt()
        } else {
            0.0
        };
        let t_next = (t * coeff_t - t_prev * coeff_prev) / C64::new(kf + 1.0, 0.0);
        t_prev = t;
        t = t_next;
    }
}

/// Single-mode displacement operator D(β) = exp(βa† − β*a) on the truncated
/// space. Errors when |β|² is too large for the cutoff to hold D(β)|0⟩.
pub fn displacement_operator(beta: C64, trunc: &TruncationConfig) -> Result<FockOperator> {
    if trunc.n_modes() != 1 {
        return Err(Error::DimensionMismatch {
            expected: "1 mode".into(),
            got: format!("{} modes", trunc.n_modes()),
        });
    }
    let d = trunc.mode_dim(0);
    let tail = poisson_tail(d, beta.norm_sqr());
    if tail > trunc.tail_tol() {
        return Err(Error::TruncationTail {
            mass: tail,
            tol: trunc.tail_tol(),
            context: format!("displacement with |beta|^2 = {}", beta.norm_sqr()),
        });
    }
    FockOperator::new(trunc.clone(), displacement_block(beta, d, d))
}

/// Four-mode state U_ac(τ) U_bd(τ) (|twb⟩⟩ ⊗ |0⟩_c ⊗ |0⟩_d), mode order
/// (a, b, c, d).
pub fn post_bs_state(
    twb: &TwbSpec,
    bs: &BeamSplitterSpec,
    trunc: &TruncationConfig,
) -> Result<PureState> {
    if trunc.n_modes() != 4 {
        return Err(Error::DimensionMismatch {
            expected: "4 modes".into(),
            got: format!("{} modes", trunc.n_modes()),
        });
    }
    let dims = trunc.dims();
    let two_mode = TruncationConfig::new(vec![dims[0], dims[1]], trunc.tail_tol())?;
    let twb_psi = twb_state(twb, &two_mode)?;
    let vac_c = PureState::basis_state(
        TruncationConfig::new(vec![dims[2]], trunc.tail_tol())?,
        &[0],
    )?;
    let vac_d = PureState::basis_state(
        TruncationConfig::new(vec![dims[3]], trunc.tail_tol())?,
        &[0],
    )?;
    let joint = tensor_product(&[twb_psi, vac_c, vac_d])?;

    let u_ac = beam_splitter_unitary(
        bs,
        &TruncationConfig::new(vec![dims[0], dims[2]], trunc.tail_tol())?,
    )?;
    let after_ac = joint.apply_two_mode_unitary(&u_ac, (0, 2))?;
    let u_bd = beam_splitter_unitary(
        bs,
        &TruncationConfig::new(vec![dims[1], dims[3]], trunc.tail_tol())?,
    )?;
    after_ac.apply_two_mode_unitary(&u_bd, (1, 3))
}

/// Coefficient of |n−p, n−q, p, q⟩ in the explicit double-sum form of the
/// post-splitter state (before renormalization).
pub fn post_bs_amplitude(x: f64, tau: f64, n: usize, p: usize, q: usize) -> f64 {
    if p > n || q > n {
        return 0.0;
    }
    (1.0 - x * x).sqrt()
        * (x * tau).powi(n as i32)
        * ((1.0 - tau) / tau).powf((p + q) as f64 / 2.0)
        * (binomial(n, p) * binomial(n, q)).sqrt()
}
