//! First and second moments of the quadratures `R = (q₁, p₁, …, q_n, p_n)`
//! with `q = (a + a†)/√2` and `p = (a − a†)/(i√2)`.

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{FockState, HERMITIAN_TOL, TAIL_BUDGET};
use crate::linalg::{CMatrix, RMatrix};
use crate::symplectic;

#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub mean: DVector<f64>,
    pub cov: RMatrix,
    /// Top-level population above the tail budget; the moments are biased.
    pub boundary: bool,
}

impl Moments {
    pub fn new(mean: DVector<f64>, cov: RMatrix) -> Result<Self> {
        let n2 = mean.len();
        if n2 == 0 || !n2.is_multiple_of(2) || cov.nrows() != n2 || cov.ncols() != n2 {
            return Err(Error::ShapeMismatch(format!(
                "mean of length {n2} with a {}x{} covariance",
                cov.nrows(),
                cov.ncols()
            )));
        }
        Ok(Moments { mean, cov, boundary: false })
    }

    pub fn vacuum(modes: usize) -> Self {
        Moments { mean: DVector::zeros(2 * modes), cov: RMatrix::identity(2 * modes, 2 * modes) * 0.5, boundary: false }
    }

    pub fn modes(&self) -> usize {
        self.mean.len() / 2
    }

    /// `⟨a_k⟩ = (X_{2k} + i X_{2k+1})/√2`.
    pub fn complex_mean(&self, mode: usize) -> C64 {
        C64::new(self.mean[2 * mode], self.mean[2 * mode + 1]) / std::f64::consts::SQRT_2
    }

    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        symplectic::symplectic_eigenvalues(&self.cov)
    }

    pub fn max_abs_diff(&self, other: &Moments) -> f64 {
        let dm = (&self.mean - &other.mean).amax();
        let dc = (&self.cov - &other.cov).amax();
        dm.max(dc)
    }
}

/// Normally ordered expectations `⟨a_k⟩`, `⟨a_k a_j⟩`, `⟨a_k† a_j⟩` of the
/// truncated ladder operators.
pub(crate) struct LadderExpectations {
    pub a: Vec<C64>,
    pub aa: CMatrix,
    pub ada: CMatrix,
}

pub(crate) fn ladder_expectations(state: &FockState) -> LadderExpectations {
    let b = state.basis();
    let n = b.modes();
    let rho = state.matrix();
    let mut a = vec![C64::new(0.0, 0.0); n];
    let mut aa = CMatrix::zeros(n, n);
    let mut ada = CMatrix::zeros(n, n);
    // Tr[ρ O] = Σ_i ρ[i, j] O[j, i] where O|i⟩ ∝ |j⟩.
    for i in 0..b.dim() {
        let occ = b.occupations(i);
        for k in 0..n {
            if occ[k] == 0 {
                continue;
            }
            let sk = b.stride(k);
            let nk = occ[k] as f64;
            a[k] += rho[(i, i - sk)] * nk.sqrt();
            for j in 0..n {
                // a_j a_k: remove one from k, then one from j.
                let nj_after = if j == k { occ[j] - 1 } else { occ[j] };
                if nj_after > 0 {
                    let t = i - sk - b.stride(j);
                    aa[(j, k)] += rho[(i, t)] * (nk * nj_after as f64).sqrt();
                }
                // a_j† a_k: remove one from k, add one to j.
                let nj_before = if j == k { occ[j] - 1 } else { occ[j] };
                if nj_before + 1 < b.cutoffs()[j] {
                    let t = i - sk + b.stride(j);
                    ada[(j, k)] += rho[(i, t)] * (nk * (nj_before + 1) as f64).sqrt();
                }
            }
        }
    }
    LadderExpectations { a, aa, ada }
}

pub fn moments(state: &FockState) -> Result<Moments> {
    let n = state.modes();
    let e = ladder_expectations(state);
    for k in 0..n {
        let im = e.ada[(k, k)].im;
        if im.abs() > HERMITIAN_TOL {
            return Err(Error::NumericIntegrity(format!("⟨a†a⟩ of mode {k} has imaginary part {im:.3e}")));
        }
    }
    let s2 = std::f64::consts::SQRT_2;
    let mut mean = DVector::zeros(2 * n);
    for k in 0..n {
        mean[2 * k] = s2 * e.a[k].re;
        mean[2 * k + 1] = s2 * e.a[k].im;
    }
    let mut cov = RMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        for j in 0..n {
            let m = e.aa[(k, j)];
            let nn = e.ada[(k, j)];
            let d = if k == j { 0.5 } else { 0.0 };
            cov[(2 * k, 2 * j)] = m.re + nn.re + d - mean[2 * k] * mean[2 * j];
            cov[(2 * k + 1, 2 * j + 1)] = -m.re + nn.re + d - mean[2 * k + 1] * mean[2 * j + 1];
            cov[(2 * k, 2 * j + 1)] = m.im + nn.im - mean[2 * k] * mean[2 * j + 1];
        }
    }
    for k in 0..n {
        for j in 0..n {
            cov[(2 * j + 1, 2 * k)] = cov[(2 * k, 2 * j + 1)];
        }
    }
    let cov = (&cov + cov.transpose()) * 0.5;
    Ok(Moments { mean, cov, boundary: state.boundary_population() > TAIL_BUDGET })
}

pub fn mean_vector(state: &FockState) -> Result<DVector<f64>> {
    Ok(moments(state)?.mean)
}

pub fn covariance_matrix(state: &FockState) -> Result<RMatrix> {
    Ok(moments(state)?.cov)
}
