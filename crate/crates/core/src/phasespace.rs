//! Characteristic functions `χ[ρ](λ) = Tr[ρ D(λ)]` and trapezoidal
//! quadrature over `ℂⁿ` for one and two modes.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::elements;
use crate::error::{Error, Result};
use crate::fock::FockState;
use crate::gaussian::GaussianSpec;
use crate::linalg::CMatrix;
use crate::measure;
use crate::moments::{self, Moments};
use crate::symplectic;

/// Boundary samples above this mean the grid misses part of `χ`.
pub const COVERAGE_TOL: f64 = 1e-6;

/// `Tr[ρ D(λ₁) ⊗ … ⊗ D(λ_n)]`.
pub fn char_function(state: &FockState, lambda: &[C64]) -> Result<C64> {
    if lambda.len() != state.modes() {
        return Err(Error::ShapeMismatch(format!("{} displacements for {} modes", lambda.len(), state.modes())));
    }
    let blocks: Vec<CMatrix> = lambda
        .iter()
        .zip(state.cutoffs())
        .map(|(&l, &c)| elements::displacement_block(l, c, c))
        .collect();
    let b = state.basis();
    let rho = state.matrix();
    let mut acc = C64::new(0.0, 0.0);
    // Σ ρ[i, j] ⟨j|D|i⟩ with ⟨j|D|i⟩ = Π_k D_k[j_k, i_k].
    for i in 0..b.dim() {
        let oi = b.occupations(i);
        for j in 0..b.dim() {
            let r = rho[(i, j)];
            if r == C64::new(0.0, 0.0) {
                continue;
            }
            let oj = b.occupations(j);
            let mut d = C64::new(1.0, 0.0);
            for (k, block) in blocks.iter().enumerate() {
                d *= block[(oj[k], oi[k])];
            }
            acc += r * d;
        }
    }
    Ok(acc)
}

/// `exp(−½ Λᵀ Ωᵀ σ Ω Λ + i Xᵀ Ω Λ)` with `Λ = √2 (Re λ₁, Im λ₁, …)`.
pub fn gaussian_char_function(spec: &GaussianSpec, lambda: &[C64]) -> Result<C64> {
    gaussian_char_from_moments(&spec.moments, lambda)
}

fn gaussian_char_from_moments(m: &Moments, lambda: &[C64]) -> Result<C64> {
    let n = m.modes();
    if lambda.len() != n {
        return Err(Error::ShapeMismatch(format!("{} displacements for {} modes", lambda.len(), n)));
    }
    let s2 = std::f64::consts::SQRT_2;
    // ΩΛ per mode is √2 (Im λ, −Re λ).
    let k = DVector::from_iterator(2 * n, lambda.iter().flat_map(|l| [s2 * l.im, -s2 * l.re]));
    let quad = k.dot(&(&m.cov * &k));
    let lin = m.mean.dot(&k);
    Ok(C64::from_polar((-0.5 * quad).exp(), lin))
}

/// Uniform grid over the `2n` real coordinates `(Re λ₁, Im λ₁, …)`, each
/// axis spanning `[−R, R]` in steps of `h`, with sampled values.
#[derive(Debug, Clone, PartialEq)]
pub struct CharFunctionGrid {
    modes: usize,
    range: Vec<f64>,
    step: Vec<f64>,
    axes: Vec<Vec<f64>>,
    pub values: Vec<C64>,
}

impl CharFunctionGrid {
    pub fn new(modes: usize, range: &[f64], step: &[f64]) -> Result<Self> {
        if !(1..=2).contains(&modes) {
            return Err(Error::ShapeMismatch(format!("quadrature supports one or two modes; got {modes}")));
        }
        if range.len() != 2 * modes || step.len() != 2 * modes {
            return Err(Error::ShapeMismatch(format!("need {} ranges and steps", 2 * modes)));
        }
        if range.iter().chain(step).any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::Domain("grid ranges and steps must be positive".into()));
        }
        let axes = range
            .iter()
            .zip(step)
            .map(|(&r, &h)| {
                let half = (r / h).round() as i64;
                (-half..=half).map(|i| i as f64 * h).collect()
            })
            .collect();
        Ok(CharFunctionGrid { modes, range: range.to_vec(), step: step.to_vec(), axes, values: Vec::new() })
    }

    pub fn uniform(modes: usize, range: f64, step: f64) -> Result<Self> {
        Self::new(modes, &vec![range; 2 * modes], &vec![step; 2 * modes])
    }

    /// Length unit for a state with covariance `cov`:
    /// `max(1, √(2σ_max), 1/√(2σ_min))`.
    pub fn unit(cov: &crate::linalg::RMatrix) -> f64 {
        let eig = cov.clone().symmetric_eigen().eigenvalues;
        let max = eig.max();
        let min = eig.min().max(1e-300);
        1f64.max((2.0 * max).sqrt()).max(1.0 / (2.0 * min).sqrt())
    }

    /// `R = 6`, `h = 0.05` for one mode and `R = 4`, `h = 0.1` for two, in
    /// units of [`CharFunctionGrid::unit`].
    pub fn default_for(state: &FockState) -> Result<Self> {
        let m = moments::moments(state)?;
        let u = Self::unit(&m.cov);
        match state.modes() {
            1 => Self::uniform(1, 6.0 * u, 0.05 * u),
            2 => Self::uniform(2, 4.0 * u, 0.1 * u),
            n => Err(Error::ShapeMismatch(format!("quadrature supports one or two modes; got {n}"))),
        }
    }

    /// Same ranges with every step multiplied by `factor`.
    pub fn rescaled(&self, factor: f64) -> Result<Self> {
        let step: Vec<f64> = self.step.iter().map(|h| h * factor).collect();
        Self::new(self.modes, &self.range, &step)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn range(&self) -> &[f64] {
        &self.range
    }

    pub fn step(&self) -> &[f64] {
        &self.step
    }

    /// Sample points along axis `k`, symmetric about zero.
    pub fn axis(&self, k: usize) -> &[f64] {
        &self.axes[k]
    }

    pub fn len(&self) -> usize {
        (0..2 * self.modes).map(|k| self.axis(k).len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `λ` at flat index `idx`, last coordinate fastest.
    pub fn point(&self, idx: usize) -> Vec<C64> {
        let c = self.coords(idx);
        c[..2 * self.modes].chunks(2).map(|c| C64::new(c[0], c[1])).collect()
    }

    fn coords(&self, mut idx: usize) -> [f64; 4] {
        let mut c = [0.0; 4];
        for k in (0..2 * self.modes).rev() {
            let axis = &self.axes[k];
            c[k] = axis[idx % axis.len()];
            idx /= axis.len();
        }
        c
    }

    fn on_boundary(&self, mut idx: usize) -> bool {
        for k in (0..2 * self.modes).rev() {
            let len = self.axes[k].len();
            let i = idx % len;
            if i == 0 || i + 1 == len {
                return true;
            }
            idx /= len;
        }
        false
    }

    /// Fills `values` with `χ[state]`.
    pub fn sample_state(&mut self, state: &FockState) -> Result<()> {
        if state.modes() != self.modes {
            return Err(Error::ShapeMismatch(format!("{}-mode grid for a {}-mode state", self.modes, state.modes())));
        }
        self.values = match self.modes {
            1 => self.sample_single(state),
            _ => self.sample_pair(state),
        };
        Ok(())
    }

    /// Fills `values` with the Gaussian `χ` of `spec`.
    pub fn sample_gaussian(&mut self, spec: &GaussianSpec) -> Result<()> {
        if spec.modes() != self.modes {
            return Err(Error::ShapeMismatch(format!("{}-mode grid for a {}-mode spec", self.modes, spec.modes())));
        }
        let m = &spec.moments;
        let n2 = 2 * self.modes;
        let s2 = std::f64::consts::SQRT_2;
        self.values = (0..self.len())
            .into_par_iter()
            .map(|i| {
                let c = self.coords(i);
                let mut k = [0.0; 4];
                for j in 0..self.modes {
                    k[2 * j] = s2 * c[2 * j + 1];
                    k[2 * j + 1] = -s2 * c[2 * j];
                }
                let mut quad = 0.0;
                let mut lin = 0.0;
                for a in 0..n2 {
                    lin += m.mean[a] * k[a];
                    for b in 0..n2 {
                        quad += k[a] * m.cov[(a, b)] * k[b];
                    }
                }
                C64::from_polar((-0.5 * quad).exp(), lin)
            })
            .collect();
        Ok(())
    }

    /// Displacement blocks over the `(Re λ, Im λ)` plane of mode `k`.
    fn plane_blocks(&self, k: usize, cutoff: usize) -> Vec<CMatrix> {
        let re = self.axis(2 * k);
        let im = self.axis(2 * k + 1);
        re.par_iter()
            .flat_map_iter(|&x| im.iter().map(move |&y| elements::displacement_block(C64::new(x, y), cutoff, cutoff)))
            .collect()
    }

    fn sample_single(&self, state: &FockState) -> Vec<C64> {
        let c = state.cutoffs()[0];
        let rho = state.matrix();
        self.plane_blocks(0, c)
            .par_iter()
            .map(|d| {
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..c {
                    for j in 0..c {
                        acc += rho[(i, j)] * d[(j, i)];
                    }
                }
                acc
            })
            .collect()
    }

    fn sample_pair(&self, state: &FockState) -> Vec<C64> {
        let (c1, c2) = (state.cutoffs()[0], state.cutoffs()[1]);
        let b = state.basis();
        let rho = state.matrix();
        let first = self.plane_blocks(0, c1);
        // Partial contraction over mode 2 for every point of its plane:
        // M[n₁, m₁] = Σ ρ[(n₁ n₂), (m₁ m₂)] D₂[m₂, n₂].
        let partial: Vec<CMatrix> = self
            .plane_blocks(1, c2)
            .par_iter()
            .map(|d2| {
                let mut m = CMatrix::zeros(c1, c1);
                for n1 in 0..c1 {
                    for m1 in 0..c1 {
                        let mut acc = C64::new(0.0, 0.0);
                        for n2 in 0..c2 {
                            for m2 in 0..c2 {
                                acc += rho[(b.index(&[n1, n2]), b.index(&[m1, m2]))] * d2[(m2, n2)];
                            }
                        }
                        m[(n1, m1)] = acc;
                    }
                }
                m
            })
            .collect();
        first
            .par_iter()
            .flat_map_iter(|d1| {
                partial.iter().map(move |m| {
                    let mut acc = C64::new(0.0, 0.0);
                    for n1 in 0..c1 {
                        for m1 in 0..c1 {
                            acc += d1[(m1, n1)] * m[(n1, m1)];
                        }
                    }
                    acc
                })
            })
            .collect()
    }

    /// `∫ f(χ(λ)) d²ⁿλ / πⁿ` by the trapezoidal rule.
    pub fn integrate(&self, f: impl Fn(C64) -> f64 + Sync) -> Result<f64> {
        if self.values.len() != self.len() {
            return Err(Error::ShapeMismatch("grid has not been sampled".into()));
        }
        let weights: Vec<Vec<f64>> = (0..2 * self.modes)
            .map(|k| {
                let n = self.axes[k].len();
                (0..n).map(|i| if i == 0 || i + 1 == n { 0.5 * self.step[k] } else { self.step[k] }).collect()
            })
            .collect();
        let total: f64 = self
            .values
            .par_iter()
            .enumerate()
            .map(|(mut idx, &v)| {
                let mut w = 1.0;
                for k in (0..2 * self.modes).rev() {
                    let n = weights[k].len();
                    w *= weights[k][idx % n];
                    idx /= n;
                }
                w * f(v)
            })
            .sum();
        Ok(total / PI.powi(self.modes as i32))
    }

    /// Largest `|χ|` over the grid boundary.
    pub fn boundary_max(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .filter(|(i, _)| self.on_boundary(*i))
            .map(|(_, v)| v.norm())
            .fold(0.0, f64::max)
    }

    fn require_coverage(&self) -> Result<()> {
        let edge = self.boundary_max();
        if edge > COVERAGE_TOL {
            return Err(Error::GridCoverage(edge));
        }
        Ok(())
    }
}

/// `(1/πⁿ) ∫ |χ[ρ]|² d²ⁿλ`, which equals `Tr[ρ²]`.
pub fn purity_quadrature(state: &FockState, grid: &CharFunctionGrid) -> Result<f64> {
    let mut g = grid.clone();
    g.sample_state(state)?;
    g.require_coverage()?;
    g.integrate(|v| v.norm_sqr())
}

/// `½ (1/πⁿ) ∫ |χ[ρ] − χ[τ]|² d²ⁿλ` for the reference `τ` of `rho`.
///
/// With `cutoffs`, `χ[τ]` comes from `τ` synthesized in that box; without,
/// from the closed Gaussian form.
pub fn lemma3_distance(rho: &FockState, cutoffs: Option<&[usize]>, grid: &CharFunctionGrid) -> Result<f64> {
    let m = moments::moments(rho)?;
    symplectic::check_physical(&m.cov)?;
    let mut g_rho = grid.clone();
    g_rho.sample_state(rho)?;
    g_rho.require_coverage()?;
    let mut g_tau = grid.clone();
    match cutoffs {
        Some(c) => {
            let tau = measure::reference_state_in(rho, c)?;
            g_tau.sample_state(&tau)?;
        }
        None => {
            let spec = GaussianSpec::from_moments(&m)?;
            g_tau.sample_gaussian(&spec)?;
        }
    }
    g_tau.require_coverage()?;
    let mut diff = g_rho;
    for (d, t) in diff.values.iter_mut().zip(&g_tau.values) {
        *d -= t;
    }
    Ok(0.5 * diff.integrate(|v| v.norm_sqr())?)
}
