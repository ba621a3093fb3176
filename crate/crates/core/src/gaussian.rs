//! Gaussian states from their moments, and their Fock representation.
//!
//! A Gaussian state with covariance `σ = S D_ν Sᵀ` and `S = O₁ Z O₂` is
//!
//! ```text
//! τ = D(α) U(O₁) ⊗S(r_k) U(O₂) ⊗ν(n_k) U(O₂)† ⊗S(r_k)† U(O₁)† D(α)†
//! ```
//!
//! and is handled as the ensemble `τ = Σ_k p_k |v_k⟩⟨v_k|` with
//! `v_k = D U₁ Z U₂ |k⟩`. Overlaps with a state `ρ` need `v_k` only on `ρ`'s
//! own box, and every stage below is built from row-exact blocks.

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use crate::elements;
use crate::error::{Error, Result};
use crate::fock::{self, Basis, Flags, FockState};
use crate::linalg::{CMatrix, RMatrix};
use crate::moments::{self, Moments};
use crate::passive;
use crate::symplectic::{self, EulerDecomposition, SymplecticFactorization};

/// Thermal components lighter than this are dropped from the ensemble.
const WEIGHT_FLOOR: f64 = 1e-16;
/// Tail mass allowed when a stage has to be cut by a tail guard.
const STAGE_TAIL: f64 = 1e-12;
pub const MOMENT_TOL: f64 = 1e-6;
pub const MOMENT_FAIL: f64 = 1e-5;
const OCCUPATION_FLOOR: f64 = -1e-9;
/// Ensemble columns pushed through the stages at a time.
const STAGE_CHUNK: usize = 64;
/// Mass per row of `D(α)` discarded when cropping its columns.
const REACH_TOL: f64 = 1e-14;
/// Columns past the reach that must carry no mass before it is trusted.
const REACH_SLACK: usize = 4;

/// Synthesis order: thermal product, then `P₂`, squeezers, `P₁`, displacement.
#[derive(Debug, Clone)]
pub struct Recipe {
    pub displacement: Vec<C64>,
    /// Mode matrix of `P₁` (`U† a_k U = Σ_j u_kj a_j`).
    pub outer: CMatrix,
    pub squeezing: Vec<f64>,
    pub inner: CMatrix,
    pub thermal: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct GaussianSpec {
    pub moments: Moments,
    pub factorization: SymplecticFactorization,
    pub euler: EulerDecomposition,
    pub recipe: Recipe,
}

impl GaussianSpec {
    pub fn from_moments(m: &Moments) -> Result<Self> {
        let fac = symplectic::williamson(&m.cov)?;
        let euler = symplectic::euler_decompose(&fac.s)?;
        let n = m.modes();
        let mut thermal = Vec::with_capacity(n);
        for &nu in &fac.nu {
            let occ = nu - 0.5;
            if occ < OCCUPATION_FLOOR {
                return Err(Error::Domain(format!("symplectic eigenvalue {nu} below 1/2")));
            }
            thermal.push(occ.max(0.0));
        }
        let recipe = Recipe {
            displacement: (0..n).map(|k| m.complex_mean(k)).collect(),
            outer: symplectic::passive_to_unitary(&euler.o1),
            squeezing: euler.r.clone(),
            inner: symplectic::passive_to_unitary(&euler.o2),
            thermal,
        };
        Ok(GaussianSpec { moments: Moments { boundary: false, ..m.clone() }, factorization: fac, euler, recipe })
    }

    /// `D(α) S(ζ) ν(n_t) S(ζ)† D(α)†`.
    pub fn single_mode(alpha: C64, zeta: C64, n_t: f64) -> Result<Self> {
        if !(n_t >= 0.0) {
            return Err(Error::Domain(format!("thermal occupation {n_t} < 0")));
        }
        let s = symplectic::squeeze_symplectic(zeta);
        let cov = &s * s.transpose() * (n_t + 0.5);
        let s2 = std::f64::consts::SQRT_2;
        let mean = DVector::from_vec(vec![s2 * alpha.re, s2 * alpha.im]);
        Self::from_moments(&Moments::new(mean, (&cov + cov.transpose()) * 0.5)?)
    }

    pub fn modes(&self) -> usize {
        self.moments.modes()
    }

    /// `σ` rebuilt from the recipe, `O₁ Z O₂ D_ν (O₁ Z O₂)ᵀ`.
    pub fn reconstructed_cov(&self) -> RMatrix {
        let s = self.euler.reconstruct();
        let d: Vec<f64> = self.recipe.thermal.iter().flat_map(|&n| [n + 0.5; 2]).collect();
        &s * RMatrix::from_diagonal(&DVector::from_vec(d)) * s.transpose()
    }

    /// `μ[τ] = 1/√det(2σ) = Π_k 1/(2ν_k)`.
    pub fn purity(&self) -> f64 {
        self.recipe.thermal.iter().map(|&n| 1.0 / (2.0 * n + 1.0)).product()
    }

    /// Per-mode cutoffs that keep the truncated `τ` within the moment tolerance.
    pub fn recommended_cutoffs(&self) -> Vec<usize> {
        (0..self.modes())
            .map(|k| {
                let block = self.moments.cov.view((2 * k, 2 * k), (2, 2)).into_owned();
                let lam = block.symmetric_eigenvalues().max();
                let alpha = self.recipe.displacement[k].norm();
                tail_guard(lam, STAGE_TAIL).max(2) + fock::coherent_cutoff(alpha)
            })
            .collect()
    }

    /// `(α, ζ, n_t)` of a single-mode spec.
    pub fn single_mode_params(&self) -> Result<(C64, C64, f64)> {
        single_mode_params(&self.moments)
    }

    /// `(ξ, N)` when `σ` has the two-mode squeezed thermal form
    /// `S₂(ξ)[ν(N) ⊗ ν(N)]S₂(ξ)†` with real `ξ`.
    pub fn two_mode_squeezed_thermal(&self) -> Option<(f64, f64)> {
        if self.modes() != 2 {
            return None;
        }
        let c = &self.moments.cov;
        let a = c[(0, 0)];
        let off = c[(0, 2)];
        let z = RMatrix::from_row_slice(
            4,
            4,
            &[a, 0.0, off, 0.0, 0.0, a, 0.0, -off, off, 0.0, a, 0.0, 0.0, -off, 0.0, a],
        );
        if crate::linalg::max_abs_diff(c, &z) > 1e-8 || a <= off.abs() {
            return None;
        }
        let nu = (a * a - off * off).sqrt();
        Some((0.5 * (off / a).atanh(), nu - 0.5))
    }

    /// Weighted pure-state ensemble of `τ` restricted to `rows`.
    pub fn ensemble(&self, rows: &Basis) -> Result<Ensemble> {
        if rows.modes() != self.modes() {
            return Err(Error::ShapeMismatch(format!(
                "{}-mode box for a {}-mode Gaussian",
                rows.modes(),
                self.modes()
            )));
        }
        if self.modes() == 1 {
            self.ensemble_single(rows)
        } else {
            self.ensemble_staged(rows)
        }
    }

    fn ensemble_single(&self, rows: &Basis) -> Result<Ensemble> {
        let (alpha, zeta, n_t) = self.single_mode_params()?;
        let (ks, weights) = thermal_components(&[n_t]);
        let kmax = ks.iter().map(|k| k[0]).max().unwrap_or(0) + 1;
        let r = rows.dim();
        let v = if alpha.norm() == 0.0 {
            elements::squeeze_block(zeta, r, kmax)
        } else {
            let j = displacement_reach(r, alpha.norm());
            let d = elements::displacement_block(alpha, r, j);
            crate::linalg::zmul(&d, &elements::squeeze_block(zeta, j, kmax))
        };
        let cols: Vec<usize> = ks.iter().map(|k| k[0]).collect();
        Ok(Ensemble { vectors: v.select_columns(&cols), weights })
    }

    /// Stage-by-stage synthesis; works for any mode count.
    pub(crate) fn ensemble_staged(&self, rows: &Basis) -> Result<Ensemble> {
        let n = self.modes();
        let rec = &self.recipe;
        let (ks, weights) = thermal_components(&rec.thermal);
        let ktot = ks.iter().map(|k| k.iter().sum::<usize>()).max().unwrap_or(0);

        let displaced = rec.displacement.iter().any(|a| a.norm() > 0.0);
        let squeezed = rec.squeezing.iter().any(|&r| r > 0.0);
        let inner_trivial = rec.thermal.windows(2).all(|w| (w[0] - w[1]).abs() <= 1e-12) || is_diagonal(&rec.inner);
        let outer_trivial = is_identity(&rec.outer);

        // The centered state U₁ Z U₂ ν U₂† Z† U₁† has covariance σ, so its
        // photon-number tail decays at the rate set by λ_max(σ).
        let lam = self.moments.cov.symmetric_eigenvalues().max();
        let guard = tail_guard(lam, STAGE_TAIL).max(2) + 10;
        // Box after P₁ (before the displacement).
        let after_outer: Vec<usize> = if displaced {
            (0..n)
                .map(|k| {
                    let reach = displacement_reach(rows.cutoffs()[k], rec.displacement[k].norm());
                    reach.min(guard.max(rows.cutoffs()[k]))
                })
                .collect()
        } else {
            rows.cutoffs().to_vec()
        };
        // Box after the squeezers. P₁ conserves photon number, so the total
        // count of `after_outer` bounds what can reach it.
        let after_squeeze: Vec<usize> = if outer_trivial {
            after_outer.clone()
        } else if let Some(perm) = phased_permutation(&rec.outer) {
            let mut cut = vec![0; n];
            for (k, &j) in perm.iter().enumerate() {
                cut[j] = after_outer[k];
            }
            cut
        } else {
            let budget: usize = after_outer.iter().map(|c| c - 1).sum::<usize>() + 1;
            if displaced && squeezed {
                let widest = after_outer.iter().copied().max().unwrap_or(2);
                vec![budget.min(guard.max(widest)); n]
            } else {
                vec![budget; n]
            }
        };
        // Box of U(O₂)|k⟩: exact, since the total photon number is |k|.
        let kbox = Basis::new(&vec![ktot + 1; n])?;
        let start_cols: Vec<usize> = ks.iter().map(|k| kbox.index(k)).collect();
        let v = if inner_trivial {
            let mut e = CMatrix::zeros(kbox.dim(), start_cols.len());
            for (c, &i) in start_cols.iter().enumerate() {
                e[(i, c)] = C64::new(1.0, 0.0);
            }
            e
        } else {
            passive::passive_columns(&rec.inner, &kbox, &ks)?
        };
        let mut vectors = CMatrix::zeros(rows.dim(), v.ncols());
        for start in (0..v.ncols()).step_by(STAGE_CHUNK) {
            let width = STAGE_CHUNK.min(v.ncols() - start);
            let mut part = v.columns(start, width).into_owned();
            let mut basis = kbox.clone();
            for m in 0..n {
                let op = elements::squeeze_block(C64::new(rec.squeezing[m], 0.0), after_squeeze[m], basis.cutoffs()[m]);
                let (nv, nb) = apply_mode(&part, &basis, m, &op)?;
                part = nv;
                basis = nb;
            }
            if !outer_trivial {
                let target = Basis::new(&after_outer)?;
                part = passive::apply_passive(&rec.outer, &part, &basis, &target)?;
                basis = target;
            }
            for m in 0..n {
                let op = elements::displacement_block(rec.displacement[m], rows.cutoffs()[m], basis.cutoffs()[m]);
                let (nv, nb) = apply_mode(&part, &basis, m, &op)?;
                part = nv;
                basis = nb;
            }
            debug_assert_eq!(basis.cutoffs(), rows.cutoffs());
            vectors.columns_mut(start, width).copy_from(&part);
        }
        Ok(Ensemble { vectors, weights })
    }

    /// Dense `τ` in the given box.
    pub fn to_state(&self, cutoffs: &[usize]) -> Result<FockState> {
        let basis = Basis::new(cutoffs)?;
        let ens = self.ensemble(&basis)?;
        let scaled = CMatrix::from_fn(ens.vectors.nrows(), ens.vectors.ncols(), |i, j| {
            ens.vectors[(i, j)] * ens.weights[j].sqrt()
        });
        let m = crate::linalg::zmul_adj(&scaled, &scaled);
        let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        let state = FockState::from_matrix(cutoffs, m)?;
        let tail = self.recommended_cutoffs().iter().zip(cutoffs).any(|(r, c)| c < r);
        Ok(state.with_flags(Flags { truncation: tail, boundary: false }))
    }
}

/// `τ = Σ_k p_k |v_k⟩⟨v_k|` restricted to a box.
#[derive(Debug, Clone)]
pub struct Ensemble {
    /// One column per thermal component.
    pub vectors: CMatrix,
    pub weights: Vec<f64>,
}

impl Ensemble {
    /// `Tr[ρ τ]`.
    pub fn overlap(&self, rho: &FockState) -> Result<f64> {
        if rho.dim() != self.vectors.nrows() {
            return Err(Error::ShapeMismatch(format!(
                "state of dimension {} against an ensemble of dimension {}",
                rho.dim(),
                self.vectors.nrows()
            )));
        }
        let acc: f64 = match rho.pure_vector() {
            Some(psi) => {
                let amps = self.vectors.adjoint() * psi;
                amps.iter().zip(&self.weights).map(|(a, w)| w * a.norm_sqr()).sum()
            }
            None => {
                let rv = crate::linalg::zmul(rho.matrix(), &self.vectors);
                let mut acc = C64::new(0.0, 0.0);
                for (c, w) in self.weights.iter().enumerate() {
                    acc += self.vectors.column(c).dotc(&rv.column(c)) * *w;
                }
                fock::real_part(acc, "overlap")?
            }
        };
        Ok(acc)
    }
}

/// `(α, ζ, n_t)` with `σ = (n_t + ½) S(ζ) S(ζ)ᵀ` and `α = (X₁ + iX₂)/√2`.
pub fn single_mode_params(m: &Moments) -> Result<(C64, C64, f64)> {
    if m.modes() != 1 {
        return Err(Error::ShapeMismatch(format!("{} modes, expected 1", m.modes())));
    }
    let c = &m.cov;
    let det = c[(0, 0)] * c[(1, 1)] - c[(0, 1)] * c[(1, 0)];
    if det < 0.25 - 1e-8 {
        return Err(Error::Domain(format!("det σ = {det} below 1/4")));
    }
    let nu = det.max(0.25).sqrt();
    let eig = c.clone().symmetric_eigen();
    let (imax, imin) = if eig.eigenvalues[0] >= eig.eigenvalues[1] { (0, 1) } else { (1, 0) };
    let ratio = eig.eigenvalues[imax] / eig.eigenvalues[imin];
    let r = 0.25 * ratio.ln();
    let zeta = if r > 1e-12 {
        let v = eig.eigenvectors.column(imax);
        let psi = v[1].atan2(v[0]);
        C64::from_polar(r, 2.0 * psi)
    } else {
        C64::new(0.0, 0.0)
    };
    Ok((m.complex_mean(0), zeta, (nu - 0.5).max(0.0)))
}

/// `τ` for `state` in `cutoffs` (default: the larger of the state's box and
/// the recommended one). The moments of `τ` are checked against the
/// state's; the box grows on mismatch before giving up.
pub fn reference_gaussian(state: &FockState, cutoffs: Option<&[usize]>) -> Result<(GaussianSpec, FockState)> {
    let m = moments::moments(state)?;
    let spec = GaussianSpec::from_moments(&m)?;
    let mut boxc: Vec<usize> = match cutoffs {
        Some(c) => c.to_vec(),
        None => spec
            .recommended_cutoffs()
            .iter()
            .zip(state.cutoffs())
            .map(|(r, s)| (*r).max(*s))
            .collect(),
    };
    let mut worst = f64::INFINITY;
    for attempt in 0..3 {
        let tau = spec.to_state(&boxc)?;
        let mt = moments::moments(&tau)?;
        worst = mt.max_abs_diff(&m);
        if worst <= MOMENT_TOL {
            return Ok((spec, tau));
        }
        if attempt == 2 || cutoffs.is_some() {
            if worst <= MOMENT_FAIL {
                return Ok((spec, tau.with_flags(Flags { truncation: true, boundary: false })));
            }
            break;
        }
        boxc = boxc.iter().map(|&c| c + c / 2 + 1).collect();
    }
    Err(Error::SynthesisFailure(format!("moment mismatch {worst:.3e} in box {boxc:?}")))
}

/// Smallest `W` with `q^W ≤ tail` for the thermal ratio of variance `lam`.
fn tail_guard(lam: f64, tail: f64) -> usize {
    if lam <= 0.5 + 1e-12 {
        return 1;
    }
    let q = (lam - 0.5) / (lam + 0.5);
    (tail.ln() / q.ln()).ceil() as usize
}

/// Columns of `D(α)` needed so rows `< rows` are exact to roundoff: the
/// narrowest width whose row norms reach 1, starting from the spread of
/// `D(−α)|m⟩` and capped by a generous closed-form bound.
fn displacement_reach(rows: usize, alpha: f64) -> usize {
    if alpha == 0.0 {
        return rows;
    }
    let s = ((rows.max(1) - 1) as f64).sqrt() + alpha + 7.0;
    let cap = ((s * s).ceil() as usize).max(rows);
    let spread = alpha * alpha + 8.0 * alpha * ((2 * rows + 1) as f64).sqrt();
    let mut j = (rows + spread.ceil() as usize + 8).min(cap);
    loop {
        let d = elements::displacement_block(C64::new(alpha, 0.0), rows, j);
        // Discarded mass summed from the right edge, free of 1 − ‖row‖² cancellation.
        let mut tail = vec![0.0f64; rows];
        let mut reach = j;
        while reach > rows {
            for (m, t) in tail.iter_mut().enumerate() {
                *t += d[(m, reach - 1)].norm_sqr();
            }
            if tail.iter().any(|&t| t > REACH_TOL) {
                break;
            }
            reach -= 1;
        }
        if reach + REACH_SLACK.max(j / 8) <= j || j >= cap {
            return reach;
        }
        j = (j + j / 4 + 8).min(cap);
    }
}

/// Occupation tuples and weights of `⊗ν(n_k)` down to the weight floor.
fn thermal_components(occupations: &[f64]) -> (Vec<Vec<usize>>, Vec<f64>) {
    let n = occupations.len();
    let ratios: Vec<f64> = occupations.iter().map(|&x| x / (1.0 + x)).collect();
    let limits: Vec<usize> = ratios
        .iter()
        .map(|&q| if q <= 0.0 { 1 } else { (WEIGHT_FLOOR.ln() / q.ln()).ceil() as usize + 1 })
        .collect();
    let mut ks = Vec::new();
    let mut ws = Vec::new();
    let mut k = vec![0usize; n];
    loop {
        let w: f64 = (0..n).map(|m| (1.0 - ratios[m]) * ratios[m].powi(k[m] as i32)).product();
        if w >= WEIGHT_FLOOR {
            ks.push(k.clone());
            ws.push(w);
        }
        let mut m = n;
        loop {
            if m == 0 {
                return (ks, ws);
            }
            m -= 1;
            k[m] += 1;
            if k[m] < limits[m] {
                break;
            }
            k[m] = 0;
        }
    }
}

fn is_identity(u: &CMatrix) -> bool {
    let n = u.nrows();
    (0..n).all(|i| (0..n).all(|j| (u[(i, j)] - if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }).norm() <= 1e-13))
}

fn is_diagonal(u: &CMatrix) -> bool {
    let n = u.nrows();
    (0..n).all(|i| (0..n).all(|j| i == j || u[(i, j)].norm() <= 1e-13))
}

/// `Some(π)` when row `k` of `u` has its only non-negligible entry in
/// column `π[k]`: the passive unitary then just relabels occupations.
fn phased_permutation(u: &CMatrix) -> Option<Vec<usize>> {
    let n = u.nrows();
    let mut perm = Vec::with_capacity(n);
    for i in 0..n {
        let big: Vec<usize> = (0..n).filter(|&j| u[(i, j)].norm() > 1e-13).collect();
        if big.len() != 1 || perm.contains(&big[0]) {
            return None;
        }
        perm.push(big[0]);
    }
    Some(perm)
}

/// Apply a single-mode block `op` (rows × cols) to mode `mode` of every column.
fn apply_mode(v: &CMatrix, basis: &Basis, mode: usize, op: &CMatrix) -> Result<(CMatrix, Basis)> {
    let cin = basis.cutoffs()[mode];
    if op.ncols() != cin {
        return Err(Error::ShapeMismatch(format!("operator with {} columns on a mode of size {cin}", op.ncols())));
    }
    let mut cut = basis.cutoffs().to_vec();
    cut[mode] = op.nrows();
    let out_b = Basis::new(&cut)?;
    // Row-major index = (modes before) · cin · inner + n_mode · inner + (modes after).
    let inner = basis.stride(mode);
    let outer = basis.dim() / (cin * inner);
    let rout = op.nrows();
    let width = outer * inner * v.ncols();
    let mut x = CMatrix::zeros(cin, width);
    for c in 0..v.ncols() {
        for o in 0..outer {
            for j in 0..cin {
                for i in 0..inner {
                    x[(j, (c * outer + o) * inner + i)] = v[(o * cin * inner + j * inner + i, c)];
                }
            }
        }
    }
    let y = crate::linalg::zmul(op, &x);
    let mut out = CMatrix::zeros(out_b.dim(), v.ncols());
    for c in 0..v.ncols() {
        for o in 0..outer {
            for r in 0..rout {
                for i in 0..inner {
                    out[(o * rout * inner + r * inner + i, c)] = y[(r, (c * outer + o) * inner + i)];
                }
            }
        }
    }
    Ok((out, out_b))
}
