//! Dense states and operators over a truncated multi-mode Fock space.
//!
//! Basis ordering is row-major over modes: the occupation tuple
//! `(n_1, …, n_m)` sits at index `Σ_k n_k · Π_{j>k} D_j`, so the last mode
//! varies fastest. Every multimode routine in the crate assumes this layout.

use std::ops::BitOr;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};

/// Hard limit on `1 - Tr ρ`; states beyond it are rejected.
pub const TRACE_BUDGET: f64 = 1e-6;
/// Tail-mass budget used to pick recommended cutoffs.
pub const TAIL_BUDGET: f64 = 1e-8;
pub const HERMITIAN_TOL: f64 = 1e-10;
pub const EIGEN_FLOOR: f64 = -1e-10;

/// Warnings that travel with a value instead of failing it.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct Flags {
    /// A builder ran below its recommended cutoff.
    pub truncation: bool,
    /// Non-negligible population sits on the top Fock level of some mode.
    pub boundary: bool,
}

impl Flags {
    pub fn any(&self) -> bool {
        self.truncation || self.boundary
    }

    pub fn labels(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.truncation {
            out.push("truncation");
        }
        if self.boundary {
            out.push("boundary");
        }
        out
    }
}

impl BitOr for Flags {
    type Output = Flags;
    fn bitor(self, rhs: Flags) -> Flags {
        Flags {
            truncation: self.truncation || rhs.truncation,
            boundary: self.boundary || rhs.boundary,
        }
    }
}

/// Shape of a truncated multi-mode Fock space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Basis {
    cutoffs: Vec<usize>,
    strides: Vec<usize>,
    dim: usize,
}

impl Basis {
    pub fn new(cutoffs: &[usize]) -> Result<Self> {
        if cutoffs.is_empty() {
            return Err(Error::InvalidDimension("at least one mode is required".into()));
        }
        if let Some(&c) = cutoffs.iter().find(|&&c| c == 0) {
            return Err(Error::InvalidDimension(format!("cutoff {c} leaves an empty space")));
        }
        let mut strides = vec![1; cutoffs.len()];
        for k in (0..cutoffs.len() - 1).rev() {
            strides[k] = strides[k + 1] * cutoffs[k + 1];
        }
        let dim = strides[0] * cutoffs[0];
        Ok(Basis { cutoffs: cutoffs.to_vec(), strides, dim })
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    pub fn modes(&self) -> usize {
        self.cutoffs.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn stride(&self, mode: usize) -> usize {
        self.strides[mode]
    }

    pub fn index(&self, occ: &[usize]) -> usize {
        occ.iter().zip(&self.strides).map(|(n, s)| n * s).sum()
    }

    pub fn contains(&self, occ: &[usize]) -> bool {
        occ.iter().zip(&self.cutoffs).all(|(n, c)| n < c)
    }

    /// Occupation of `mode` in basis state `index`.
    pub fn occupation(&self, index: usize, mode: usize) -> usize {
        (index / self.strides[mode]) % self.cutoffs[mode]
    }

    pub fn occupations(&self, index: usize) -> Vec<usize> {
        (0..self.modes()).map(|k| self.occupation(index, k)).collect()
    }

    pub fn total(&self, index: usize) -> usize {
        (0..self.modes()).map(|k| self.occupation(index, k)).sum()
    }
}

#[derive(Debug, Clone)]
pub struct FockState {
    basis: Basis,
    matrix: CMatrix,
    pure: Option<CVector>,
    trace_deficit: f64,
    flags: Flags,
}

impl FockState {
    /// Pure state `|ψ⟩⟨ψ|`. The vector is not renormalized.
    pub fn from_pure(cutoffs: &[usize], psi: CVector) -> Result<Self> {
        let basis = Basis::new(cutoffs)?;
        if psi.len() != basis.dim() {
            return Err(Error::ShapeMismatch(format!(
                "vector of length {} for a space of dimension {}",
                psi.len(),
                basis.dim()
            )));
        }
        let deficit = 1.0 - psi.norm_squared();
        check_deficit(deficit)?;
        let matrix = &psi * psi.adjoint();
        let mut state = FockState { basis, matrix, pure: Some(psi), trace_deficit: deficit, flags: Flags::default() };
        state.flags.boundary = state.boundary_population() > TAIL_BUDGET;
        Ok(state)
    }

    /// General mixed state. Checks Hermiticity and the trace budget; positivity
    /// is checked by [`FockState::validate`].
    pub fn from_matrix(cutoffs: &[usize], matrix: CMatrix) -> Result<Self> {
        let basis = Basis::new(cutoffs)?;
        if matrix.nrows() != basis.dim() || matrix.ncols() != basis.dim() {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} matrix for a space of dimension {}",
                matrix.nrows(),
                matrix.ncols(),
                basis.dim()
            )));
        }
        let defect = linalg::hermiticity_defect(&matrix);
        if defect > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("matrix is not Hermitian (defect {defect:.3e})")));
        }
        let deficit = 1.0 - matrix.trace().re;
        check_deficit(deficit)?;
        let mut state = FockState { basis, matrix, pure: None, trace_deficit: deficit, flags: Flags::default() };
        state.flags.boundary = state.boundary_population() > TAIL_BUDGET;
        Ok(state)
    }

    /// Diagonal state from populations.
    pub fn from_diagonal(cutoffs: &[usize], populations: &[f64]) -> Result<Self> {
        let m = DMatrix::from_diagonal(&CVector::from_iterator(
            populations.len(),
            populations.iter().map(|&p| C64::new(p, 0.0)),
        ));
        Self::from_matrix(cutoffs, m)
    }

    /// Basis projector `|n⟩⟨n|` for the occupation tuple `occ`.
    pub fn basis_projector(cutoffs: &[usize], occ: &[usize]) -> Result<Self> {
        let basis = Basis::new(cutoffs)?;
        if occ.len() != basis.modes() || !basis.contains(occ) {
            return Err(Error::InvalidDimension(format!("occupation {occ:?} outside cutoffs {cutoffs:?}")));
        }
        let mut psi = CVector::zeros(basis.dim());
        psi[basis.index(occ)] = C64::new(1.0, 0.0);
        Self::from_pure(cutoffs, psi)
    }

    pub fn vacuum(cutoffs: &[usize]) -> Result<Self> {
        Self::basis_projector(cutoffs, &vec![0; cutoffs.len()])
    }

    pub(crate) fn with_flags(mut self, flags: Flags) -> Self {
        self.flags = self.flags | flags;
        self
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn cutoffs(&self) -> &[usize] {
        self.basis.cutoffs()
    }

    pub fn modes(&self) -> usize {
        self.basis.modes()
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn pure_vector(&self) -> Option<&CVector> {
        self.pure.as_ref()
    }

    pub fn is_pure_backed(&self) -> bool {
        self.pure.is_some()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn trace_deficit(&self) -> f64 {
        self.trace_deficit
    }

    pub fn flags(&self) -> Flags {
        self.flags
    }

    /// Largest population on the top Fock level of any mode.
    pub fn boundary_population(&self) -> f64 {
        let b = &self.basis;
        (0..b.modes())
            .map(|k| {
                let top = b.cutoffs()[k] - 1;
                if top == 0 {
                    return 0.0;
                }
                (0..b.dim()).filter(|&i| b.occupation(i, k) == top).map(|i| self.matrix[(i, i)].re).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Full validation: Hermiticity, trace budget and the eigenvalue floor.
    pub fn validate(&self) -> Result<()> {
        let defect = linalg::hermiticity_defect(&self.matrix);
        if defect > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("matrix is not Hermitian (defect {defect:.3e})")));
        }
        check_deficit(self.trace_deficit)?;
        if self.pure.is_none() {
            let ev = linalg::hermitian_eigenvalues(&self.matrix);
            if let Some(&min) = ev.first() {
                if min < EIGEN_FLOOR {
                    return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
                }
            }
        }
        Ok(())
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.matrix)
    }

    pub fn purity(&self) -> Result<f64> {
        self.overlap(self)
    }

    /// `Tr[ρ τ]`, real by construction for Hermitian operands.
    pub fn overlap(&self, other: &FockState) -> Result<f64> {
        self.require_same_shape(other)?;
        let (a, b) = (&self.matrix, &other.matrix);
        let n = a.nrows();
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..n {
            for i in 0..n {
                acc += a[(i, j)] * b[(j, i)];
            }
        }
        real_part(acc, "overlap")
    }

    /// Hilbert–Schmidt norm `√Tr ρ²`.
    pub fn hs_norm(&self) -> Result<f64> {
        Ok(self.purity()?.sqrt())
    }

    pub fn tensor(&self, other: &FockState) -> Result<FockState> {
        let mut cutoffs = self.cutoffs().to_vec();
        cutoffs.extend_from_slice(other.cutoffs());
        let basis = Basis::new(&cutoffs)?;
        let pure = match (&self.pure, &other.pure) {
            (Some(a), Some(b)) => Some(a.kronecker(b)),
            _ => None,
        };
        let matrix = match &pure {
            Some(v) => v * v.adjoint(),
            None => self.matrix.kronecker(&other.matrix),
        };
        let trace_deficit = 1.0 - (1.0 - self.trace_deficit) * (1.0 - other.trace_deficit);
        check_deficit(trace_deficit)?;
        Ok(FockState { basis, matrix, pure, trace_deficit, flags: self.flags | other.flags })
    }

    /// Trace out the listed modes; the remaining modes keep their order.
    pub fn partial_trace(&self, traced: &[usize]) -> Result<FockState> {
        let b = &self.basis;
        if let Some(&m) = traced.iter().find(|&&m| m >= b.modes()) {
            return Err(Error::ShapeMismatch(format!("mode {m} out of range for {} modes", b.modes())));
        }
        let kept: Vec<usize> = (0..b.modes()).filter(|m| !traced.contains(m)).collect();
        if kept.is_empty() {
            return Err(Error::ShapeMismatch("cannot trace out every mode".into()));
        }
        let kept_cut: Vec<usize> = kept.iter().map(|&m| b.cutoffs()[m]).collect();
        let traced_cut: Vec<usize> = traced.iter().map(|&m| b.cutoffs()[m]).collect();
        let kb = Basis::new(&kept_cut)?;
        let tb = Basis::new(&traced_cut)?;
        let full_index = |ki: usize, ti: usize| -> usize {
            let mut idx = 0;
            for (pos, &m) in kept.iter().enumerate() {
                idx += kb.occupation(ki, pos) * b.stride(m);
            }
            for (pos, &m) in traced.iter().enumerate() {
                idx += tb.occupation(ti, pos) * b.stride(m);
            }
            idx
        };
        let mut out = CMatrix::zeros(kb.dim(), kb.dim());
        for i in 0..kb.dim() {
            for j in 0..kb.dim() {
                let mut acc = C64::new(0.0, 0.0);
                for t in 0..tb.dim() {
                    acc += self.matrix[(full_index(i, t), full_index(j, t))];
                }
                out[(i, j)] = acc;
            }
        }
        let mut state = FockState::from_matrix(&kept_cut, out)?;
        state.flags = state.flags | Flags { truncation: self.flags.truncation, boundary: false };
        Ok(state)
    }

    /// Zero-pad into a larger box (every new cutoff must be ≥ the old one).
    pub fn embed(&self, cutoffs: &[usize]) -> Result<FockState> {
        if cutoffs.len() != self.modes() || cutoffs.iter().zip(self.cutoffs()).any(|(n, o)| n < o) {
            return Err(Error::ShapeMismatch(format!("cannot embed {:?} into {cutoffs:?}", self.cutoffs())));
        }
        let nb = Basis::new(cutoffs)?;
        let map: Vec<usize> = (0..self.dim()).map(|i| nb.index(&self.basis.occupations(i))).collect();
        let pure = self.pure.as_ref().map(|v| {
            let mut w = CVector::zeros(nb.dim());
            for (i, &t) in map.iter().enumerate() {
                w[t] = v[i];
            }
            w
        });
        let mut m = CMatrix::zeros(nb.dim(), nb.dim());
        for (i, &ti) in map.iter().enumerate() {
            for (j, &tj) in map.iter().enumerate() {
                m[(ti, tj)] = self.matrix[(i, j)];
            }
        }
        let mut state = FockState { basis: nb, matrix: m, pure, trace_deficit: self.trace_deficit, flags: self.flags };
        state.flags.boundary = state.boundary_population() > TAIL_BUDGET;
        Ok(state)
    }

    /// `U ρ U†`.
    pub fn conjugate(&self, op: &FockOperator) -> Result<FockState> {
        if op.basis != self.basis {
            return Err(Error::ShapeMismatch(format!(
                "operator on {:?} applied to state on {:?}",
                op.cutoffs(),
                self.cutoffs()
            )));
        }
        let out = match &self.pure {
            Some(v) => {
                let w = &op.matrix * v;
                FockState::from_pure(self.cutoffs(), w)?
            }
            None => {
                let m = linalg::zmul_adj(&linalg::zmul(&op.matrix, &self.matrix), &op.matrix);
                let m = (&m + m.adjoint()).scale(0.5);
                FockState::from_matrix(self.cutoffs(), m)?
            }
        };
        Ok(out.with_flags(self.flags | op.flags))
    }

    pub(crate) fn require_same_shape(&self, other: &FockState) -> Result<()> {
        if self.basis != other.basis {
            return Err(Error::ShapeMismatch(format!("{:?} vs {:?}", self.cutoffs(), other.cutoffs())));
        }
        Ok(())
    }
}

fn check_deficit(deficit: f64) -> Result<()> {
    if deficit.abs() > TRACE_BUDGET {
        return Err(Error::TraceDeficit { deficit, budget: TRACE_BUDGET });
    }
    Ok(())
}

pub(crate) fn real_part(z: C64, what: &str) -> Result<f64> {
    if z.im.abs() > HERMITIAN_TOL * z.re.abs().max(1.0) {
        return Err(Error::NumericIntegrity(format!("{what} has imaginary part {:.3e}", z.im)));
    }
    Ok(z.re)
}

/// Dense operator on a truncated Fock space; not necessarily Hermitian.
#[derive(Debug, Clone)]
pub struct FockOperator {
    basis: Basis,
    matrix: CMatrix,
    flags: Flags,
}

impl FockOperator {
    pub fn new(cutoffs: &[usize], matrix: CMatrix) -> Result<Self> {
        let basis = Basis::new(cutoffs)?;
        if matrix.nrows() != basis.dim() || matrix.ncols() != basis.dim() {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} matrix for dimension {}",
                matrix.nrows(),
                matrix.ncols(),
                basis.dim()
            )));
        }
        Ok(FockOperator { basis, matrix, flags: Flags::default() })
    }

    pub fn identity(cutoffs: &[usize]) -> Result<Self> {
        let dim = Basis::new(cutoffs)?.dim();
        Self::new(cutoffs, CMatrix::identity(dim, dim))
    }

    pub fn cutoffs(&self) -> &[usize] {
        self.basis.cutoffs()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn flags(&self) -> Flags {
        self.flags
    }

    pub fn adjoint(&self) -> FockOperator {
        FockOperator { basis: self.basis.clone(), matrix: self.matrix.adjoint(), flags: self.flags }
    }

    pub fn compose(&self, rhs: &FockOperator) -> Result<FockOperator> {
        if self.basis != rhs.basis {
            return Err(Error::ShapeMismatch(format!("{:?} vs {:?}", self.cutoffs(), rhs.cutoffs())));
        }
        Ok(FockOperator {
            basis: self.basis.clone(),
            matrix: linalg::zmul(&self.matrix, &rhs.matrix),
            flags: self.flags | rhs.flags,
        })
    }

    pub fn kron(&self, rhs: &FockOperator) -> Result<FockOperator> {
        let mut cutoffs = self.cutoffs().to_vec();
        cutoffs.extend_from_slice(rhs.cutoffs());
        let mut op = FockOperator::new(&cutoffs, self.matrix.kronecker(&rhs.matrix))?;
        op.flags = self.flags | rhs.flags;
        Ok(op)
    }

    pub fn apply(&self, psi: &CVector) -> CVector {
        &self.matrix * psi
    }

    /// `max |U†U − I|` over the lower 90% of the basis (by total occupation
    /// relative to the cutoff), where truncation does not bite.
    pub fn unitarity_defect(&self) -> f64 {
        let b = &self.basis;
        let keep: Vec<usize> = (0..b.dim())
            .filter(|&i| (0..b.modes()).all(|k| (b.occupation(i, k) as f64) < 0.9 * b.cutoffs()[k] as f64))
            .collect();
        let g = self.matrix.adjoint() * &self.matrix;
        let mut worst = 0.0f64;
        for &i in &keep {
            for &j in &keep {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - C64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

fn require_cutoff(cutoff: usize) -> Result<()> {
    if cutoff < 2 {
        return Err(Error::InvalidDimension(format!("cutoff {cutoff} < 2")));
    }
    Ok(())
}

/// Annihilation operator, `a|n⟩ = √n |n−1⟩`.
pub fn ladder(cutoff: usize) -> Result<FockOperator> {
    require_cutoff(cutoff)?;
    let mut m = CMatrix::zeros(cutoff, cutoff);
    for n in 1..cutoff {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    FockOperator::new(&[cutoff], m)
}

/// `⌈|α|² + 6|α| + 10⌉`.
pub fn coherent_cutoff(alpha: f64) -> usize {
    let a = alpha.abs();
    (a * a + 6.0 * a + 10.0).ceil() as usize
}

/// `⌈10 e^{2r}⌉`.
pub fn squeezed_cutoff(r: f64) -> usize {
    (10.0 * (2.0 * r.abs()).exp()).ceil() as usize
}

/// Smallest `D` with `(n/(1+n))^D ≤ tail`.
pub fn thermal_cutoff(n_t: f64, tail: f64) -> usize {
    if n_t <= 0.0 {
        return 1;
    }
    let q = n_t / (1.0 + n_t);
    (tail.ln() / q.ln()).ceil().max(1.0) as usize
}

/// `exp(α a† − α* a)` by dense matrix exponential of the truncated generator.
pub fn displacement(alpha: C64, cutoff: usize) -> Result<FockOperator> {
    let a = ladder(cutoff)?;
    let am = a.matrix();
    let g = am.adjoint().scale(1.0) * alpha - am * alpha.conj();
    let mut op = FockOperator::new(&[cutoff], linalg::expm(&g))?;
    op.flags.truncation = coherent_cutoff(alpha.norm()) > cutoff;
    Ok(op)
}

/// `exp(½ζ a†² − ½ζ* a²)` by dense matrix exponential of the truncated generator.
pub fn squeeze(zeta: C64, cutoff: usize) -> Result<FockOperator> {
    let a = ladder(cutoff)?;
    let am = a.matrix();
    let a2 = am * am;
    let g = a2.adjoint() * (zeta * 0.5) - a2 * (zeta.conj() * 0.5);
    let mut op = FockOperator::new(&[cutoff], linalg::expm(&g))?;
    op.flags.truncation = squeezed_cutoff(zeta.norm()) > cutoff;
    Ok(op)
}

/// Quadratic two-mode gates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TwoModeGate {
    /// `exp(ξ a₁†a₂† − ξ* a₁a₂)`.
    TwoModeSqueeze(C64),
    /// `exp[iθ(a₁†a₂ + a₂†a₁)]`, transmissivity `cos²θ`.
    BeamSplitter(f64),
}

pub fn two_mode_gate(gate: TwoModeGate, cutoffs: [usize; 2]) -> Result<FockOperator> {
    require_cutoff(cutoffs[0])?;
    require_cutoff(cutoffs[1])?;
    let a1 = ladder(cutoffs[0])?.matrix().kronecker(&CMatrix::identity(cutoffs[1], cutoffs[1]));
    let a2 = CMatrix::identity(cutoffs[0], cutoffs[0]).kronecker(ladder(cutoffs[1])?.matrix());
    let (g, truncation) = match gate {
        TwoModeGate::TwoModeSqueeze(xi) => {
            let pair = &a1 * &a2;
            let g = pair.adjoint() * xi - pair * xi.conj();
            // Each mode of S₂(ξ)|0,0⟩ is thermal with n = sinh²|ξ|.
            let n = xi.norm().sinh().powi(2);
            (g, cutoffs.iter().any(|&c| thermal_cutoff(n, TAIL_BUDGET) > c))
        }
        TwoModeGate::BeamSplitter(theta) => {
            let hop = a1.adjoint() * &a2;
            let g = (&hop + hop.adjoint()) * C64::new(0.0, theta);
            (g, false)
        }
    };
    let mut op = FockOperator::new(&cutoffs, linalg::expm(&g))?;
    op.flags.truncation = truncation;
    Ok(op)
}

/// `ν(n) = (1+n)^{-1} [n/(1+n)]^{a†a}` truncated at `cutoff`.
pub fn thermal_state(n_t: f64, cutoff: usize) -> Result<FockState> {
    if !(n_t >= 0.0) {
        return Err(Error::Domain(format!("thermal occupation {n_t} < 0")));
    }
    let q = n_t / (1.0 + n_t);
    let pops: Vec<f64> = (0..cutoff).map(|k| q.powi(k as i32) / (1.0 + n_t)).collect();
    let state = FockState::from_diagonal(&[cutoff], &pops)?;
    let tail = q.powi(cutoff as i32);
    Ok(state.with_flags(Flags { truncation: tail > TAIL_BUDGET, boundary: false }))
}
