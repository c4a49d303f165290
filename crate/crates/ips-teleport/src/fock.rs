//! Dense linear algebra on truncated multimode Fock spaces: pure states,
//! density operators, tensor products, partial traces and expectations.
//!
//! Mode ordering is fixed at construction and flat indices run with the last
//! mode fastest, so a two-mode basis ket |n_a, n_b⟩ sits at n_a·d_b + n_b.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::util::hermitian_eigenvalues;

/// Max |ρ - ρ†| entry accepted by the density-operator constructor.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Normalization slack for states and traces.
pub const NORM_TOL: f64 = 1e-10;
/// Eigenvalue floor for the positive-semidefiniteness check.
pub const PSD_FLOOR: f64 = -1e-10;
/// Default probability mass tolerated beyond the Fock cutoff.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

/// Per-mode Fock cutoffs for a joint truncated space. Mode m holds the
/// levels 0..dims[m]-1.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncationConfig {
    dims: Vec<usize>,
    tail_tol: f64,
}

impl TruncationConfig {
    pub fn new(dims: Vec<usize>, tail_tol: f64) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidTruncation("no modes".into()));
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidTruncation(format!(
                "every mode needs at least one level, got {dims:?}"
            )));
        }
        if !(tail_tol > 0.0 && tail_tol < 1.0) {
            return Err(Error::InvalidTruncation(format!(
                "tail tolerance must lie in (0, 1), got {tail_tol}"
            )));
        }
        Ok(Self { dims, tail_tol })
    }

    /// Uniform cutoff over `modes` modes with the default tail tolerance.
    pub fn uniform(modes: usize, dim: usize) -> Result<Self> {
        Self::new(vec![dim; modes], DEFAULT_TAIL_TOL)
    }

    pub fn single_mode(dim: usize) -> Result<Self> {
        Self::uniform(1, dim)
    }

    pub fn with_tail_tol(mut self, tail_tol: f64) -> Result<Self> {
        if !(tail_tol > 0.0 && tail_tol < 1.0) {
            return Err(Error::InvalidTruncation(format!(
                "tail tolerance must lie in (0, 1), got {tail_tol}"
            )));
        }
        self.tail_tol = tail_tol;
        Ok(self)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn tail_tol(&self) -> f64 {
        self.tail_tol
    }

    pub fn n_modes(&self) -> usize {
        self.dims.len()
    }

    pub fn joint_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn mode_dim(&self, mode: usize) -> usize {
        self.dims[mode]
    }

    /// Flat index of a Fock multi-index (last mode fastest).
    pub fn flat_index(&self, levels: &[usize]) -> usize {
        debug_assert_eq!(levels.len(), self.dims.len());
        let mut idx = 0;
        for (l, d) in levels.iter().zip(&self.dims) {
            debug_assert!(l < d);
            idx = idx * d + l;
        }
        idx
    }

    /// Fock multi-index of a flat index.
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for m in (0..self.dims.len()).rev() {
            out[m] = flat % self.dims[m];
            flat /= self.dims[m];
        }
        out
    }

    /// Layout for a subset of modes, keeping their original order.
    pub fn select(&self, modes: &[usize]) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::EmptyKeepSet);
        }
        let mut dims = Vec::with_capacity(modes.len());
        for &m in modes {
            let d = self.dims.get(m).copied().ok_or_else(|| {
                Error::InvalidTruncation(format!("mode {m} out of range for {:?}", self.dims))
            })?;
            dims.push(d);
        }
        Self::new(dims, self.tail_tol)
    }

    fn expect_same_layout(&self, other: &Self) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch {
                expected: format!("{:?}", self.dims),
                got: format!("{:?}", other.dims),
            });
        }
        Ok(())
    }
}

/// Pure state on a truncated joint Fock space; normalized at construction.
#[derive(Clone, Debug)]
pub struct PureState {
    trunc: TruncationConfig,
    amps: DVector<C64>,
}

impl PureState {
    /// Wraps and normalizes an amplitude vector.
    pub fn new(trunc: TruncationConfig, mut amps: DVector<C64>) -> Result<Self> {
        if amps.len() != trunc.joint_dim() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} amplitudes", trunc.joint_dim()),
                got: format!("{}", amps.len()),
            });
        }
        let norm = amps.norm();
        if !(norm.is_finite() && norm > 1e-300) {
            return Err(Error::InvalidParameter {
                name: "norm",
                value: norm,
                requirement: "a normalizable amplitude vector",
            });
        }
        amps /= C64::new(norm, 0.0);
        Ok(Self { trunc, amps })
    }

    /// Fock basis ket |levels⟩.
    pub fn basis_state(trunc: TruncationConfig, levels: &[usize]) -> Result<Self> {
        if levels.len() != trunc.n_modes() || levels.iter().zip(trunc.dims()).any(|(l, d)| l >= d) {
            return Err(Error::DimensionMismatch {
                expected: format!("levels below {:?}", trunc.dims()),
                got: format!("{levels:?}"),
            });
        }
        let mut amps = DVector::zeros(trunc.joint_dim());
        amps[trunc.flat_index(levels)] = C64::new(1.0, 0.0);
        Ok(Self { trunc, amps })
    }

    pub fn trunc(&self) -> &TruncationConfig {
        &self.trunc
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn amplitude(&self, levels: &[usize]) -> C64 {
        self.amps[self.trunc.flat_index(levels)]
    }

    pub fn n_modes(&self) -> usize {
        self.trunc.n_modes()
    }

    /// ⟨self|other⟩.
    pub fn overlap(&self, other: &PureState) -> Result<C64> {
        self.trunc.expect_same_layout(&other.trunc)?;
        Ok(self.amps.dotc(&other.amps))
    }

    /// Reduced density operator of the kept modes, contracted directly from
    /// the amplitudes (the full |ψ⟩⟨ψ| is never materialized).
    pub fn reduced_density(&self, keep: &[usize]) -> Result<DensityOperator> {
        if keep.is_empty() {
            return Err(Error::EmptyKeepSet);
        }
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if keep.iter().any(|&m| m >= self.n_modes()) {
            return Err(Error::InvalidTruncation(format!(
                "keep set {keep:?} out of range for {} modes",
                self.n_modes()
            )));
        }
        let out_trunc = self.trunc.select(&keep)?;
        let kept_dim = out_trunc.joint_dim();
        let traced_dim = self.trunc.joint_dim() / kept_dim;

        // gather B[traced, kept]; rho = B† B  gives rho[k, k'] = Σ_t ψ*[k,t] ψ[k',t]
        let dims = self.trunc.dims();
        let n_modes = dims.len();
        let mut levels = vec![0usize; n_modes];
        let mut gathered = DMatrix::<C64>::zeros(traced_dim, kept_dim);
        for flat in 0..self.trunc.joint_dim() {
            let mut f = flat;
            for m in (0..n_modes).rev() {
                levels[m] = f % dims[m];
                f /= dims[m];
            }
            let mut k = 0usize;
            let mut t = 0usize;
            for m in 0..n_modes {
                if keep.contains(&m) {
                    k = k * dims[m] + levels[m];
                } else {
                    t = t * dims[m] + levels[m];
                }
            }
            gathered[(t, k)] = self.amps[flat];
        }
        let rho = gathered.adjoint() * &gathered;
        // rho[k,k'] = Σ_t ψ*[t,k] ψ[t,k'] — conjugate to get ⟨k|ρ|k'⟩ = Σ ψ[k,t]ψ*[k',t]
        DensityOperator::new(out_trunc, rho.conjugate())
    }

    /// |ψ⟩⟨ψ| as a density operator.
    pub fn density(&self) -> DensityOperator {
        let n = self.amps.len();
        let mut elems = DMatrix::zeros(n, n);
        for j in 0..n {
            let cj = self.amps[j].conj();
            if cj == C64::new(0.0, 0.0) {
                continue;
            }
            for i in 0..n {
                elems[(i, j)] = self.amps[i] * cj;
            }
        }
        DensityOperator {
            trunc: self.trunc.clone(),
            elems,
        }
    }

    /// Applies a two-mode operator to modes (i, j); `u` must be laid out as
    /// d_i x d_j with mode j fastest. Unitarity is the caller's business, but
    /// any norm lost beyond the tail tolerance is rejected.
    pub fn apply_two_mode_unitary(&self, u: &FockOperator, modes: (usize, usize)) -> Result<Self> {
        let (mi, mj) = modes;
        if mi == mj || mi >= self.n_modes() || mj >= self.n_modes() {
            return Err(Error::InvalidTruncation(format!(
                "mode pair ({mi}, {mj}) invalid for a {}-mode state",
                self.n_modes()
            )));
        }
        let (di, dj) = (self.trunc.mode_dim(mi), self.trunc.mode_dim(mj));
        if u.trunc.dims() != [di, dj] {
            return Err(Error::DimensionMismatch {
                expected: format!("[{di}, {dj}]"),
                got: format!("{:?}", u.trunc.dims()),
            });
        }

        let pair_dim = di * dj;
        let joint_dim = self.trunc.joint_dim();
        let rest_dim = joint_dim / pair_dim;

        // Row/column coordinates of every flat index: pair index (n_i, n_j)
        // and a mixed-radix key over the remaining modes.
        let dims = self.trunc.dims();
        let n_modes = dims.len();
        let mut levels = vec![0usize; n_modes];
        let mut pair_of = vec![0usize; joint_dim];
        let mut rest_of = vec![0usize; joint_dim];
        for flat in 0..joint_dim {
            let mut f = flat;
            for m in (0..n_modes).rev() {
                levels[m] = f % dims[m];
                f /= dims[m];
            }
            pair_of[flat] = levels[mi] * dj + levels[mj];
            let mut key = 0usize;
            for m in 0..n_modes {
                if m != mi && m != mj {
                    key = key * dims[m] + levels[m];
                }
            }
            rest_of[flat] = key;
        }

        // Gather into B[rest, pair] so columns are contiguous per pair index.
        let mut gathered = DMatrix::<C64>::zeros(rest_dim, pair_dim);
        for flat in 0..joint_dim {
            gathered[(rest_of[flat], pair_of[flat])] = self.amps[flat];
        }

        // out.column(r) += u[(r, rp)] * gathered.column(rp); exact zeros in u
        // (e.g. photon-number blocks of a beam splitter) are skipped.
        let mut out = DMatrix::<C64>::zeros(rest_dim, pair_dim);
        let zero = C64::new(0.0, 0.0);
        for r in 0..pair_dim {
            for rp in 0..pair_dim {
                let w = u.elems[(r, rp)];
                if w == zero {
                    continue;
                }
                let src = gathered.column(rp);
                let mut dst = out.column_mut(r);
                for k in 0..rest_dim {
                    dst[k] += w * src[k];
                }
            }
        }

        // Scatter back.
        let mut amps = DVector::<C64>::zeros(joint_dim);
        for flat in 0..joint_dim {
            amps[flat] = out[(rest_of[flat], pair_of[flat])];
        }

        let norm_sq = amps.norm_squared();
        let leakage = (1.0 - norm_sq).abs();
        if leakage > self.trunc.tail_tol() {
            return Err(Error::TruncationLeakage {
                mode_a: mi,
                mode_b: mj,
                leakage,
                tol: self.trunc.tail_tol(),
            });
        }
        PureState::new(self.trunc.clone(), amps)
    }
}

/// Tensor product of pure states; mode ordering is the concatenation order.
pub fn tensor_product(parts: &[PureState]) -> Result<PureState> {
    if parts.is_empty() {
        return Err(Error::InvalidTruncation("tensor product of no states".into()));
    }
    let mut dims = Vec::new();
    for p in parts {
        dims.extend_from_slice(p.trunc.dims());
    }
    let trunc = TruncationConfig::new(dims, parts[0].trunc.tail_tol())?;
    let mut amps = parts[0].amps.clone();
    for p in &parts[1..] {
        let mut next = DVector::zeros(amps.len() * p.amps.len());
        for (i, a) in amps.iter().enumerate() {
            if *a == C64::new(0.0, 0.0) {
                continue;
            }
            let base = i * p.amps.len();
            for (j, b) in p.amps.iter().enumerate() {
                next[base + j] = a * b;
            }
        }
        amps = next;
    }
    PureState::new(trunc, amps)
}

/// Mixed state on a truncated joint Fock space. The constructor symmetrizes
/// and renormalizes; the full invariant check (including positivity) is
/// `validate`, kept separate because it costs an eigendecomposition.
#[derive(Clone, Debug)]
pub struct DensityOperator {
    trunc: TruncationConfig,
    elems: DMatrix<C64>,
}

impl DensityOperator {
    pub fn new(trunc: TruncationConfig, elems: DMatrix<C64>) -> Result<Self> {
        let n = trunc.joint_dim();
        if elems.nrows() != n || elems.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: format!("{n} x {n}"),
                got: format!("{} x {}", elems.nrows(), elems.ncols()),
            });
        }
        let mut dev = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((elems[(i, j)] - elems[(j, i)].conj()).norm());
            }
        }
        if dev > HERMITICITY_TOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let mut sym = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                sym[(i, j)] = (elems[(i, j)] + elems[(j, i)].conj()) * 0.5;
            }
        }
        let trace: f64 = (0..n).map(|i| sym[(i, i)].re).sum();
        if !(trace.is_finite() && trace > 1e-300) {
            return Err(Error::InvalidParameter {
                name: "trace",
                value: trace,
                requirement: "a positive finite trace",
            });
        }
        sym /= C64::new(trace, 0.0);
        Ok(Self { trunc, elems: sym })
    }

    pub fn from_pure(psi: &PureState) -> Self {
        psi.density()
    }

    pub fn trunc(&self) -> &TruncationConfig {
        &self.trunc
    }

    pub fn elems(&self) -> &DMatrix<C64> {
        &self.elems
    }

    pub fn entry(&self, bra: &[usize], ket: &[usize]) -> C64 {
        self.elems[(self.trunc.flat_index(bra), self.trunc.flat_index(ket))]
    }

    pub fn n_modes(&self) -> usize {
        self.trunc.n_modes()
    }

    pub fn trace(&self) -> f64 {
        (0..self.elems.nrows()).map(|i| self.elems[(i, i)].re).sum()
    }

    /// Full invariant check: Hermiticity, unit trace and positivity down to
    /// the eigenvalue floor.
    pub fn validate(&self) -> Result<()> {
        let n = self.elems.nrows();
        let mut dev = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self.elems[(i, j)] - self.elems[(j, i)].conj()).norm());
            }
        }
        if dev > HERMITICITY_TOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidParameter {
                name: "trace",
                value: tr,
                requirement: "unit trace within 1e-10",
            });
        }
        let min_eig = hermitian_eigenvalues(&self.elems)
            .first()
            .copied()
            .unwrap_or(0.0);
        if min_eig < PSD_FLOOR {
            return Err(Error::InvalidParameter {
                name: "min_eigenvalue",
                value: min_eig,
                requirement: "positivity down to -1e-10",
            });
        }
        Ok(())
    }

    /// Traces out every mode not listed in `keep` (original order retained).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityOperator> {
        if keep.is_empty() {
            return Err(Error::EmptyKeepSet);
        }
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if keep.iter().any(|&m| m >= self.n_modes()) {
            return Err(Error::InvalidTruncation(format!(
                "keep set {keep:?} out of range for {} modes",
                self.n_modes()
            )));
        }
        let traced: Vec<usize> = (0..self.n_modes()).filter(|m| !keep.contains(m)).collect();
        let out_trunc = self.trunc.select(&keep)?;
        if traced.is_empty() {
            return Ok(self.clone());
        }

        let kept_dim = out_trunc.joint_dim();
        let traced_dim: usize = traced.iter().map(|&m| self.trunc.mode_dim(m)).product();
        let mut out = DMatrix::<C64>::zeros(kept_dim, kept_dim);

        let dims = self.trunc.dims();
        // flat = sum over modes of level * stride
        let mut strides = vec![1usize; dims.len()];
        for m in (0..dims.len().saturating_sub(1)).rev() {
            strides[m] = strides[m + 1] * dims[m + 1];
        }
        let decode = |mut idx: usize, modes: &[usize]| -> usize {
            let mut flat = 0;
            for &m in modes.iter().rev() {
                flat += (idx % dims[m]) * strides[m];
                idx /= dims[m];
            }
            flat
        };

        for kr in 0..kept_dim {
            let base_r = decode(kr, &keep);
            for kc in 0..kept_dim {
                let base_c = decode(kc, &keep);
                let mut acc = C64::new(0.0, 0.0);
                for t in 0..traced_dim {
                    let off = decode(t, &traced);
                    acc += self.elems[(base_r + off, base_c + off)];
                }
                out[(kr, kc)] = acc;
            }
        }
        // trace is preserved by construction; renormalization in the
        // constructor only removes rounding at the 1e-16 level
        DensityOperator::new(out_trunc, out)
    }

    /// Tr{ρ · op}.
    pub fn expectation(&self, op: &FockOperator) -> Result<C64> {
        self.trunc.expect_same_layout(&op.trunc)?;
        let n = self.elems.nrows();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                let o = op.elems[(j, i)];
                if o != C64::new(0.0, 0.0) {
                    acc += self.elems[(i, j)] * o;
                }
            }
        }
        Ok(acc)
    }

    /// ⟨ψ|ρ|ψ⟩ for a pure target state.
    pub fn fidelity_with_pure(&self, psi: &PureState) -> Result<f64> {
        self.trunc.expect_same_layout(&psi.trunc)?;
        let v = &self.elems * &psi.amps;
        Ok(psi.amps.dotc(&v).re)
    }

    /// Tr{ρ²}; equals Σ|ρ_ij|² for Hermitian ρ.
    pub fn purity(&self) -> f64 {
        self.elems.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Trace distance ½·Tr|ρ − σ|.
    pub fn trace_distance(&self, other: &DensityOperator) -> Result<f64> {
        self.trunc.expect_same_layout(&other.trunc)?;
        let diff = &self.elems - &other.elems;
        let vals = hermitian_eigenvalues(&diff);
        Ok(0.5 * vals.iter().map(|v| v.abs()).sum::<f64>())
    }
}

/// General operator on a truncated Fock space: POVM elements, displacement,
/// number operators, beam-splitter unitaries.
#[derive(Clone, Debug)]
pub struct FockOperator {
    trunc: TruncationConfig,
    elems: DMatrix<C64>,
}

impl FockOperator {
    pub fn new(trunc: TruncationConfig, elems: DMatrix<C64>) -> Result<Self> {
        let n = trunc.joint_dim();
        if elems.nrows() != n || elems.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: format!("{n} x {n}"),
                got: format!("{} x {}", elems.nrows(), elems.ncols()),
            });
        }
        Ok(Self { trunc, elems })
    }

    pub fn identity(trunc: TruncationConfig) -> Self {
        let n = trunc.joint_dim();
        Self {
            trunc,
            elems: DMatrix::identity(n, n),
        }
    }

    pub fn from_real_diagonal(trunc: TruncationConfig, diag: &[f64]) -> Result<Self> {
        let n = trunc.joint_dim();
        if diag.len() != n {
            return Err(Error::DimensionMismatch {
                expected: format!("{n} diagonal entries"),
                got: format!("{}", diag.len()),
            });
        }
        let mut elems = DMatrix::zeros(n, n);
        for (i, &v) in diag.iter().enumerate() {
            elems[(i, i)] = C64::new(v, 0.0);
        }
        Ok(Self { trunc, elems })
    }

    /// n̂ acting on one mode of the joint space.
    pub fn number_operator(trunc: TruncationConfig, mode: usize) -> Result<Self> {
        if mode >= trunc.n_modes() {
            return Err(Error::InvalidTruncation(format!(
                "mode {mode} out of range for {} modes",
                trunc.n_modes()
            )));
        }
        let n = trunc.joint_dim();
        let mut diag = vec![0.0; n];
        for (flat, entry) in diag.iter_mut().enumerate() {
            *entry = trunc.multi_index(flat)[mode] as f64;
        }
        Self::from_real_diagonal(trunc, &diag)
    }

    pub fn trunc(&self) -> &TruncationConfig {
        &self.trunc
    }

    pub fn elems(&self) -> &DMatrix<C64> {
        &self.elems
    }

    pub fn entry(&self, bra: &[usize], ket: &[usize]) -> C64 {
        self.elems[(self.trunc.flat_index(bra), self.trunc.flat_index(ket))]
    }

    pub fn adjoint(&self) -> Self {
        Self {
            trunc: self.trunc.clone(),
            elems: self.elems.adjoint(),
        }
    }

    /// Operator product on the same layout.
    pub fn compose(&self, other: &FockOperator) -> Result<Self> {
        self.trunc.expect_same_layout(&other.trunc)?;
        Ok(Self {
            trunc: self.trunc.clone(),
            elems: &self.elems * &other.elems,
        })
    }

    pub fn add(&self, other: &FockOperator) -> Result<Self> {
        self.trunc.expect_same_layout(&other.trunc)?;
        Ok(Self {
            trunc: self.trunc.clone(),
            elems: &self.elems + &other.elems,
        })
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            trunc: self.trunc.clone(),
            elems: &self.elems * factor,
        }
    }

    /// Kronecker product; resulting mode order is self's modes then other's.
    pub fn tensor(&self, other: &FockOperator) -> Result<Self> {
        let mut dims = self.trunc.dims().to_vec();
        dims.extend_from_slice(other.trunc.dims());
        let trunc = TruncationConfig::new(dims, self.trunc.tail_tol())?;
        Ok(Self {
            trunc,
            elems: self.elems.kronecker(&other.elems),
        })
    }

    /// Max deviation of U†U from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let n = self.elems.nrows();
        let prod = self.elems.adjoint() * &self.elems;
        let mut dev = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((prod[(i, j)] - C64::new(expect, 0.0)).norm());
            }
        }
        dev
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn flat_and_multi_index_round_trip() {
        let t = TruncationConfig::new(vec![3, 4, 2], 1e-12).unwrap();
        assert_eq!(t.joint_dim(), 24);
        for flat in 0..24 {
            assert_eq!(t.flat_index(&t.multi_index(flat)), flat);
        }
        assert_eq!(t.flat_index(&[1, 2, 1]), 1 * 8 + 2 * 2 + 1);
    }

    #[test]
    fn truncation_rejects_bad_configs() {
        assert!(TruncationConfig::new(vec![], 1e-12).is_err());
        assert!(TruncationConfig::new(vec![3, 0], 1e-12).is_err());
        assert!(TruncationConfig::new(vec![3], 0.0).is_err());
        assert!(TruncationConfig::new(vec![3], 1.5).is_err());
    }

    #[test]
    fn tensor_product_of_basis_states() {
        let t1 = TruncationConfig::single_mode(3).unwrap();
        let vac = PureState::basis_state(t1.clone(), &[0]).unwrap();
        let one = PureState::basis_state(t1, &[1]).unwrap();

        let prod = tensor_product(&[vac.clone(), vac.clone()]).unwrap();
        assert_abs_diff_eq!(prod.amplitude(&[0, 0]).re, 1.0, epsilon = 1e-15);

        let prod = tensor_product(&[one, vac]).unwrap();
        assert_abs_diff_eq!(prod.amplitude(&[1, 0]).re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(prod.amplitude(&[0, 1]).re, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn tensor_product_requires_parts() {
        assert!(tensor_product(&[]).is_err());
    }

    #[test]
    fn partial_trace_of_product_state_returns_factor() {
        let t = TruncationConfig::single_mode(4).unwrap();
        let mut amps = DVector::zeros(4);
        amps[0] = c(0.6);
        amps[2] = c(0.8);
        let psi = PureState::new(t.clone(), amps).unwrap();
        let vac = PureState::basis_state(t, &[0]).unwrap();
        let joint = tensor_product(&[psi.clone(), vac]).unwrap().density();

        let reduced = joint.partial_trace(&[0]).unwrap();
        let expect = psi.density();
        let max_dev = (reduced.elems() - expect.elems())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(max_dev <= 1e-12, "deviation {max_dev}");
        assert_abs_diff_eq!(reduced.trace(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn partial_trace_of_vacuum_projector() {
        let t = TruncationConfig::uniform(2, 3).unwrap();
        let rho = PureState::basis_state(t, &[0, 0]).unwrap().density();
        let reduced = rho.partial_trace(&[0]).unwrap();
        assert_abs_diff_eq!(reduced.entry(&[0], &[0]).re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(reduced.entry(&[1], &[1]).re, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn partial_trace_rejects_empty_keep() {
        let t = TruncationConfig::uniform(2, 2).unwrap();
        let rho = PureState::basis_state(t, &[0, 0]).unwrap().density();
        assert!(matches!(
            rho.partial_trace(&[]),
            Err(Error::EmptyKeepSet)
        ));
    }

    #[test]
    fn expectation_of_identity_and_number() {
        let t = TruncationConfig::single_mode(5).unwrap();
        let rho = PureState::basis_state(t.clone(), &[0]).unwrap().density();
        let n_op = FockOperator::number_operator(t.clone(), 0).unwrap();
        let id = FockOperator::identity(t);
        assert_abs_diff_eq!(rho.expectation(&n_op).unwrap().re, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(rho.expectation(&id).unwrap().re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn expectation_rejects_mismatched_layouts() {
        let t1 = TruncationConfig::single_mode(5).unwrap();
        let t2 = TruncationConfig::single_mode(4).unwrap();
        let rho = PureState::basis_state(t1, &[0]).unwrap().density();
        let op = FockOperator::identity(t2);
        assert!(rho.expectation(&op).is_err());
    }

    #[test]
    fn expectation_is_linear_in_op() {
        let t = TruncationConfig::single_mode(4).unwrap();
        let mut amps = DVector::zeros(4);
        amps[0] = c(0.5);
        amps[1] = C64::new(0.5, 0.5);
        amps[3] = c(0.5);
        let rho = PureState::new(t.clone(), amps).unwrap().density();
        let a = FockOperator::number_operator(t.clone(), 0).unwrap();
        let b = FockOperator::identity(t);
        let lhs = rho
            .expectation(&a.scale(c(2.0)).add(&b.scale(c(-0.5))).unwrap())
            .unwrap();
        let rhs = rho.expectation(&a).unwrap() * 2.0 - rho.expectation(&b).unwrap() * 0.5;
        assert_abs_diff_eq!(lhs.re, rhs.re, epsilon = 1e-13);
        assert_abs_diff_eq!(lhs.im, rhs.im, epsilon = 1e-13);
    }

    #[test]
    fn fidelity_between_basis_states() {
        let t = TruncationConfig::single_mode(3).unwrap();
        let rho0 = PureState::basis_state(t.clone(), &[0]).unwrap().density();
        let psi0 = PureState::basis_state(t.clone(), &[0]).unwrap();
        let psi1 = PureState::basis_state(t, &[1]).unwrap();
        assert_abs_diff_eq!(rho0.fidelity_with_pure(&psi0).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(rho0.fidelity_with_pure(&psi1).unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn purity_of_pure_and_maximally_mixed() {
        let t = TruncationConfig::single_mode(2).unwrap();
        let pure = PureState::basis_state(t.clone(), &[0]).unwrap().density();
        assert_abs_diff_eq!(pure.purity(), 1.0, epsilon = 1e-14);
        let mixed = DensityOperator::new(t, DMatrix::identity(2, 2)).unwrap();
        assert_abs_diff_eq!(mixed.purity(), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn constructor_enforces_hermiticity() {
        let t = TruncationConfig::single_mode(2).unwrap();
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 0)] = c(0.5);
        m[(1, 1)] = c(0.5);
        m[(0, 1)] = c(0.3);
        m[(1, 0)] = c(-0.3); // not the conjugate
        assert!(matches!(
            DensityOperator::new(t, m),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn validate_accepts_proper_states_and_rejects_negative_ones() {
        let t = TruncationConfig::single_mode(3).unwrap();
        let mut amps = DVector::zeros(3);
        amps[0] = c(1.0);
        amps[2] = C64::new(0.0, 1.0);
        let rho = PureState::new(t.clone(), amps).unwrap().density();
        rho.validate().unwrap();

        // indefinite Hermitian matrix normalized to unit trace
        let mut m = DMatrix::zeros(3, 3);
        m[(0, 0)] = c(1.5);
        m[(1, 1)] = c(-0.5);
        let bad = DensityOperator::new(t, m).unwrap();
        assert!(bad.validate().is_err());
    }

    #[test]
    fn identity_two_mode_unitary_is_a_noop() {
        let t = TruncationConfig::uniform(2, 4).unwrap();
        let mut amps = DVector::zeros(16);
        amps[t.flat_index(&[1, 2])] = c(0.6);
        amps[t.flat_index(&[3, 0])] = C64::new(0.0, 0.8);
        let psi = PureState::new(t.clone(), amps).unwrap();
        let u = FockOperator::identity(TruncationConfig::uniform(2, 4).unwrap());
        let out = psi.apply_two_mode_unitary(&u, (0, 1)).unwrap();
        let dev = (out.amplitudes() - psi.amplitudes())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-14);
    }

    #[test]
    fn two_mode_unitary_addresses_the_right_modes() {
        // swap-like permutation on modes (0, 2) of a three-mode state
        let t = TruncationConfig::uniform(3, 2).unwrap();
        let psi = PureState::basis_state(t, &[1, 0, 0]).unwrap();
        let pair = TruncationConfig::uniform(2, 2).unwrap();
        let mut swap = DMatrix::zeros(4, 4);
        // |n_i, n_j> -> |n_j, n_i>
        swap[(0, 0)] = c(1.0);
        swap[(1, 2)] = c(1.0);
        swap[(2, 1)] = c(1.0);
        swap[(3, 3)] = c(1.0);
        let u = FockOperator::new(pair, swap).unwrap();
        let out = psi.apply_two_mode_unitary(&u, (0, 2)).unwrap();
        assert_abs_diff_eq!(out.amplitude(&[0, 0, 1]).re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn trace_distance_basics() {
        let t = TruncationConfig::single_mode(2).unwrap();
        let a = PureState::basis_state(t.clone(), &[0]).unwrap().density();
        let b = PureState::basis_state(t, &[1]).unwrap().density();
        assert_abs_diff_eq!(a.trace_distance(&a).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a.trace_distance(&b).unwrap(), 1.0, epsilon = 1e-12);
    }
}
