//! Decision curves over the twin-beam parameter: where conditioning beats
//! the bare twin beam, where the average fidelity crosses the 2/3 security
//! level, and the window satisfying both.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::teleport::{average_fidelity_closed, twb_average_fidelity};

/// Bisection tolerance on x.
const ROOT_TOL: f64 = 1e-10;
/// Clipped search domain and scan resolution for bracket detection.
const X_MIN: f64 = 1e-6;
const X_MAX: f64 = 1.0 - 1e-6;
const SCAN_POINTS: usize = 512;

/// Roots of the improvement and security conditions on a τ_eff grid.
#[derive(Clone, Debug)]
pub struct ThresholdCurve {
    pub tau_eff_grid: Vec<f64>,
    /// x_th: F̄(x, τ_eff) = F̄_TWB(x), where a sign change exists.
    pub x_th: Vec<Option<f64>>,
    /// x_2/3: F̄(x, τ_eff) = 2/3, where a sign change exists.
    pub x_23: Vec<Option<f64>>,
    /// (x_2/3, x_th) where both exist in that order.
    pub window: Vec<Option<(f64, f64)>>,
}

/// F̄(x, τ_eff) − F̄_TWB(x); positive where conditioning improves
/// teleportation.
pub fn improvement_gap(x: f64, tau_eff: f64) -> f64 {
    average_fidelity_closed(x, tau_eff) - twb_average_fidelity(x)
}

fn bisect<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = f(lo);
    if f_lo == 0.0 {
        return lo;
    }
    if f(hi) == 0.0 {
        return hi;
    }
    while hi - lo > ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Scans (X_MIN, X_MAX), demands at most one sign change, and bisects it.
/// Monotonicity of the objective is not assumed; several brackets raise an
/// ambiguity error listing them all.
fn single_root<F: Fn(f64) -> f64>(f: F, quantity: &'static str) -> Result<Option<f64>> {
    let step = (X_MAX - X_MIN) / SCAN_POINTS as f64;
    let mut brackets = Vec::new();
    let mut prev_x = X_MIN;
    let mut prev_f = f(prev_x);
    for i in 1..=SCAN_POINTS {
        let x = X_MIN + step * i as f64;
        let fx = f(x);
        if prev_f == 0.0 || prev_f.signum() != fx.signum() {
            brackets.push((prev_x, x));
        }
        prev_x = x;
        prev_f = fx;
    }
    match brackets.len() {
        0 => Ok(None),
        1 => Ok(Some(bisect(&f, brackets[0].0, brackets[0].1))),
        _ => Err(Error::AmbiguousBrackets {
            quantity,
            brackets,
        }),
    }
}

/// Improvement threshold x_th(τ_eff): below it the conditioned resource
/// outperforms the bare twin beam. None when no crossing exists (all of
/// τ_eff ≤ 0.5).
pub fn x_threshold(tau_eff: f64) -> Result<Option<f64>> {
    single_root(|x| improvement_gap(x, tau_eff), "x_th")
}

/// Security threshold x_2/3(τ_eff): where F̄ reaches the no-cloning level
/// 2/3. None when the fidelity never gets there.
pub fn x_two_thirds(tau_eff: f64) -> Result<Option<f64>> {
    single_root(|x| average_fidelity_closed(x, tau_eff) - 2.0 / 3.0, "x_23")
}

/// The interval (x_2/3, x_th) on which teleportation is simultaneously
/// improved and secure; None when the roots do not order that way.
pub fn secure_window(tau_eff: f64) -> Result<Option<(f64, f64)>> {
    let th = x_threshold(tau_eff)?;
    let two_thirds = x_two_thirds(tau_eff)?;
    Ok(match (two_thirds, th) {
        (Some(lo), Some(hi)) if lo < hi => Some((lo, hi)),
        _ => None,
    })
}

/// Evaluates all three curves over a τ_eff grid (grid points in parallel,
/// results assembled in grid order).
pub fn threshold_curve(tau_eff_grid: &[f64]) -> Result<ThresholdCurve> {
    let rows: Result<Vec<_>> = tau_eff_grid
        .par_iter()
        .map(|&te| {
            let th = x_threshold(te)?;
            let two_thirds = x_two_thirds(te)?;
            let window = match (two_thirds, th) {
                (Some(lo), Some(hi)) if lo < hi => Some((lo, hi)),
                _ => None,
            };
            Ok((th, two_thirds, window))
        })
        .collect();
    let rows = rows?;
    Ok(ThresholdCurve {
        tau_eff_grid: tau_eff_grid.to_vec(),
        x_th: rows.iter().map(|r| r.0).collect(),
        x_23: rows.iter().map(|r| r.1).collect(),
        window: rows.iter().map(|r| r.2).collect(),
    })
}
