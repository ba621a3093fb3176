//! The non-Gaussianity `δ[ρ] = D²_HS[ρ, τ] / μ[ρ]` and its relatives.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::channels::ChannelParams;
use crate::elements;
use crate::error::{Error, Result};
use crate::fock::{Basis, Flags, FockState};
use crate::gaussian::{self, Ensemble, GaussianSpec};
use crate::linalg;
use crate::moments;
use crate::optimize::NelderMead;
use crate::special::{laguerre, scaled_hyp2f1_loss};

/// Negative `δ` down to this is roundoff and clamps to zero.
pub const NEGATIVE_TOL: f64 = 1e-9;
/// Single-mode values above this are flagged for review.
pub const SINGLE_MODE_LIMIT: f64 = 0.5 + 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct NonGaussianityResult {
    pub delta: f64,
    pub purity_rho: f64,
    pub purity_tau: f64,
    pub overlap: f64,
    pub flags: Flags,
    /// A single-mode state scored above ½.
    pub above_half: bool,
}

impl NonGaussianityResult {
    pub fn assemble(purity_rho: f64, purity_tau: f64, overlap: f64, flags: Flags, modes: usize) -> Result<Self> {
        let raw = (purity_rho + purity_tau - 2.0 * overlap) / (2.0 * purity_rho);
        let delta = clamp_delta(raw)?;
        Ok(NonGaussianityResult {
            delta,
            purity_rho,
            purity_tau,
            overlap,
            flags,
            above_half: modes == 1 && delta > SINGLE_MODE_LIMIT,
        })
    }
}

fn clamp_delta(raw: f64) -> Result<f64> {
    if raw.is_nan() {
        return Err(Error::NumericIntegrity("δ is NaN".into()));
    }
    if raw < -NEGATIVE_TOL {
        return Err(Error::NumericIntegrity(format!("δ = {raw:.3e} is negative beyond roundoff")));
    }
    Ok(raw.max(0.0))
}

/// `½ Tr[(ρ − τ)²]`.
pub fn hs_distance_sq(rho: &FockState, tau: &FockState) -> Result<f64> {
    rho.require_same_shape(tau)?;
    let d = 0.5 * (rho.purity()? + tau.purity()? - 2.0 * rho.overlap(tau)?);
    if d < -1e-10 {
        return Err(Error::NumericIntegrity(format!("squared distance {d:.3e} is negative")));
    }
    Ok(d.max(0.0))
}

/// `μ[τ]` and `κ[ρ, τ]` for the moment-matched Gaussian of `rho`.
///
/// `τ` is never materialized: `μ[τ]` is analytic and the overlap uses the
/// ensemble of `τ` restricted to `rho`'s box.
pub fn reference_terms(rho: &FockState) -> Result<(GaussianSpec, f64, f64)> {
    let m = moments::moments(rho)?;
    let spec = GaussianSpec::from_moments(&m)?;
    let ens = spec.ensemble(rho.basis())?;
    let kappa = ens.overlap(rho)?;
    Ok((spec.clone(), spec.purity(), kappa))
}

pub fn non_gaussianity(rho: &FockState) -> Result<NonGaussianityResult> {
    let (_, mu_tau, kappa) = reference_terms(rho)?;
    let mu_rho = rho.purity()?;
    let mut flags = rho.flags();
    flags.boundary |= rho.boundary_population() > crate::fock::TAIL_BUDGET;
    NonGaussianityResult::assemble(mu_rho, mu_tau, kappa, flags, rho.modes())
}

/// `δ` of `⊗_k ρ_k` from per-factor purities and overlaps. The reference of a
/// product is the product of references, so every term factorizes.
pub fn delta_product(parts: &[FockState]) -> Result<f64> {
    if parts.is_empty() {
        return Err(Error::ShapeMismatch("empty product".into()));
    }
    let (mut mr, mut mt, mut k) = (1.0, 1.0, 1.0);
    for part in parts {
        let (_, mu_tau, kappa) = reference_terms(part)?;
        mr *= part.purity()?;
        mt *= mu_tau;
        k *= kappa;
    }
    clamp_delta((mr + mt - 2.0 * k) / (2.0 * mr))
}

/// `(p/(p+1))^p / (p+1)`, the overlap of `|p⟩` with `ν(p)`.
fn fock_thermal_overlap(p: u64) -> f64 {
    if p == 0 {
        return 1.0;
    }
    let pf = p as f64;
    (pf * (-1.0 / (pf + 1.0)).ln_1p() - (pf + 1.0).ln()).exp()
}

/// `δ_p = ½(1 + 1/(2p+1)) − (1/(p+1))(p/(p+1))^p`.
pub fn delta_fock_analytic(p: u64) -> f64 {
    let pf = p as f64;
    0.5 * (1.0 + 1.0 / (2.0 * pf + 1.0)) - fock_thermal_overlap(p)
}

/// `δ` of `|p⟩^{⊗n}`: `½[1 + (2p+1)^{−n}] − [(1/(p+1))(p/(p+1))^p]^n`.
pub fn delta_fock_multimode(p: u64, n: u32) -> f64 {
    let pf = p as f64;
    0.5 * (1.0 + (1.0 / (2.0 * pf + 1.0)).powi(n as i32)) - fock_thermal_overlap(p).powi(n as i32)
}

/// `argmax_{1 ≤ n ≤ n_max} δ[|p⟩^{⊗n}]`, smallest `n` on ties.
pub fn optimal_copies(p: u64, n_max: u32) -> u32 {
    let mut best = (1, delta_fock_multimode(p, 1));
    for n in 2..=n_max.max(1) {
        let v = delta_fock_multimode(p, n);
        if v > best.1 {
            best = (n, v);
        }
    }
    best.0
}

/// `δ` of `|p⟩` after loss `η`:
///
/// ```text
/// δ_{pη} = [A + 1/(1+2pη) − 2(1+(p−1)η)^p/(1+pη)^{p+1}] / (2A)
/// A = (1−η)^{2p} ₂F₁(−p, −p; 1; η²/(1−η)²) = Σ_k C(p,k)² η^{2k} (1−η)^{2(p−k)}
/// ```
pub fn delta_loss_analytic(p: u64, eta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::Domain(format!("η = {eta} outside [0, 1]")));
    }
    if p == 0 {
        return Ok(0.0);
    }
    let a = scaled_hyp2f1_loss(p, eta);
    let pf = p as f64;
    let kappa = (pf * (eta * (pf - 1.0)).ln_1p() - (pf + 1.0) * (pf * eta).ln_1p()).exp();
    clamp_delta((a + 1.0 / (1.0 + 2.0 * pf * eta) - 2.0 * kappa) / (2.0 * a))
}

/// `κ[|p⟩⟨p|, D(C)ν(p)D(C)†]`.
pub fn overlap_fock_displaced_thermal(p: u64, c: f64) -> f64 {
    let c2 = c * c;
    if p == 0 {
        return (-c2).exp();
    }
    let pf = p as f64;
    (-c2 / (1.0 + pf)).exp() * fock_thermal_overlap(p) * laguerre(p as usize, -c2 / (pf * (1.0 + pf)))
}

/// `κ[ρ_p(η), D(C)ν(pη)D(C)†]`.
pub fn overlap_loss_displaced_thermal(p: u64, eta: f64, c: f64) -> f64 {
    let c2 = c * c;
    if p == 0 {
        return (-c2).exp();
    }
    let pf = p as f64;
    let pre = (pf * (eta * (pf - 1.0)).ln_1p() - (pf + 1.0) * (pf * eta).ln_1p()).exp();
    let x = eta * c2 / ((1.0 + pf * eta) * (eta * (1.0 - pf) - 1.0));
    pre * laguerre(p as usize, x) * (-c2 / (1.0 + pf * eta)).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaPrime {
    pub delta: f64,
    /// Optimal displacement `C` of the reference.
    pub mean: C64,
    pub evaluations: usize,
}

/// `δ′[ρ] = min_C D²_HS[ρ, D(C) τ₀ D(C)†] / μ[ρ]`, with `τ₀` the centered
/// reference sharing `ρ`'s covariance. Single-mode only.
pub fn delta_prime(rho: &FockState) -> Result<DeltaPrime> {
    if rho.modes() != 1 {
        return Err(Error::ShapeMismatch(format!("δ′ is single-mode; got {} modes", rho.modes())));
    }
    let m = moments::moments(rho)?;
    let spec = GaussianSpec::from_moments(&m)?;
    let (alpha0, zeta, n_t) = spec.single_mode_params()?;
    let centered = GaussianSpec::single_mode(C64::new(0.0, 0.0), zeta, n_t)?;
    let mu_rho = rho.purity()?;
    let mu_tau = spec.purity();
    let rows = rho.dim();

    // The squeezed thermal columns do not depend on C; only D(C) is rebuilt.
    let reach = |c: f64| -> usize {
        let s = ((rows - 1) as f64).sqrt() + c + 7.0;
        ((s * s).ceil() as usize).max(rows)
    };
    let span = reach(alpha0.norm() + 4.0);
    let cols = centered.ensemble(&Basis::new(&[span])?)?;
    let objective = |x: &[f64]| -> Result<f64> {
        let c = C64::new(x[0], x[1]);
        let j = reach(c.norm());
        let ens = if j <= span {
            let d = elements::displacement_block(c, rows, span);
            Ensemble { vectors: linalg::zmul(&d, &cols.vectors), weights: cols.weights.clone() }
        } else {
            GaussianSpec::single_mode(c, zeta, n_t)?.ensemble(rho.basis())?
        };
        let kappa = ens.overlap(rho)?;
        Ok((mu_rho + mu_tau - 2.0 * kappa) / (2.0 * mu_rho))
    };
    let nm = NelderMead::default();
    let min = nm.minimize(&[alpha0.re, alpha0.im], objective)?;
    if !min.converged {
        return Err(Error::Convergence { evaluations: min.evaluations, best: min.value });
    }
    Ok(DeltaPrime { delta: clamp_delta(min.value)?, mean: C64::new(min.x[0], min.x[1]), evaluations: min.evaluations })
}

/// Box over real single-mode Gaussian inputs `D(α)S(r)ν(n_t)S(r)†D(α)†`.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchBox {
    pub alpha: (f64, f64),
    pub r: (f64, f64),
    pub n_t: (f64, f64),
    /// Points per axis of the coarse grid.
    pub grid: usize,
    /// Rounds of local refinement around the incumbent.
    pub refinements: usize,
}

impl Default for SearchBox {
    fn default() -> Self {
        SearchBox { alpha: (0.0, 1.0), r: (0.0, 1.0), n_t: (0.0, 1.0), grid: 11, refinements: 3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapResult {
    pub value: f64,
    /// `(α, r, n_t)` of the best input found.
    pub argmax: [f64; 3],
    /// Finite box and grid: the value bounds `δ[ℰ]` from below.
    pub lower_bound: bool,
    pub evaluations: usize,
    /// Inputs with click probability at or below the conditioning floor.
    pub skipped: usize,
}

/// `δ[ℰ(ρ_G)]` for one Gaussian input; `None` when conditioning is impossible.
pub fn map_point(channel: &ChannelParams, alpha: f64, r: f64, n_t: f64) -> Result<Option<f64>> {
    let spec = GaussianSpec::single_mode(C64::new(alpha, 0.0), C64::new(r, 0.0), n_t)?;
    let input = spec.to_state(&spec.recommended_cutoffs())?;
    let output = match channel.apply(&input) {
        Ok(s) => s,
        Err(Error::Conditioning(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    Ok(Some(non_gaussianity(&output)?.delta))
}

/// `δ[ℰ] = max_{ρ ∈ G} δ[ℰ(ρ)]` over the search box: a coarse grid, then
/// shrinking local grids around the incumbent. Ties keep the point that
/// comes first in `(α, r, n_t)` order.
pub fn map_non_gaussianity(channel: &ChannelParams, search: &SearchBox) -> Result<MapResult> {
    channel.validate()?;
    let axis = |(lo, hi): (f64, f64), n: usize| -> Vec<f64> {
        if n <= 1 || hi <= lo {
            return vec![lo];
        }
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    };
    let coarse: Vec<[f64; 3]> = {
        let (a, r, n) = (axis(search.alpha, search.grid), axis(search.r, search.grid), axis(search.n_t, search.grid));
        grid3(&a, &r, &n)
    };
    let mut evaluations = 0;
    let mut skipped = 0;
    let mut best: Option<(f64, [f64; 3])> = None;
    let mut consider = |pts: &[[f64; 3]], best: &mut Option<(f64, [f64; 3])>| -> Result<()> {
        let vals: Vec<Result<Option<f64>>> =
            pts.par_iter().map(|p| map_point(channel, p[0], p[1], p[2])).collect();
        for (p, v) in pts.iter().zip(vals) {
            evaluations += 1;
            match v? {
                None => skipped += 1,
                Some(v) => {
                    let better = match best {
                        None => true,
                        Some((b, bp)) => v > *b || (v == *b && p < bp),
                    };
                    if better {
                        *best = Some((v, *p));
                    }
                }
            }
        }
        Ok(())
    };
    consider(&coarse, &mut best)?;
    let step = |(lo, hi): (f64, f64)| if search.grid > 1 { (hi - lo) / (search.grid - 1) as f64 } else { 0.0 };
    let mut h = [step(search.alpha), step(search.r), step(search.n_t)];
    let bounds = [search.alpha, search.r, search.n_t];
    for _ in 0..search.refinements {
        let Some((_, centre)) = best else { break };
        h = h.map(|x| x / 2.0);
        let local_axis = |k: usize| -> Vec<f64> {
            let mut v: Vec<f64> = (-2..=2)
                .map(|i| (centre[k] + i as f64 * h[k]).clamp(bounds[k].0, bounds[k].1))
                .collect();
            v.dedup();
            v
        };
        let (a, r, n) = (local_axis(0), local_axis(1), local_axis(2));
        let pts = grid3(&a, &r, &n);
        consider(&pts, &mut best)?;
    }
    let (value, argmax) = best.unwrap_or((0.0, [search.alpha.0, search.r.0, search.n_t.0]));
    Ok(MapResult { value, argmax, lower_bound: true, evaluations, skipped })
}

fn grid3(a: &[f64], r: &[f64], n: &[f64]) -> Vec<[f64; 3]> {
    let mut pts = Vec::with_capacity(a.len() * r.len() * n.len());
    for &x in a {
        for &y in r {
            for &z in n {
                pts.push([x, y, z]);
            }
        }
    }
    pts
}

/// The reference `τ` of `rho` materialized in the box `cutoffs`.
pub fn reference_state_in(rho: &FockState, cutoffs: &[usize]) -> Result<FockState> {
    Ok(gaussian::reference_gaussian(rho, Some(cutoffs))?.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock;

    #[test]
    fn hs_distance_examples() {
        let zero = FockState::vacuum(&[4]).unwrap();
        let one = FockState::basis_projector(&[4], &[1]).unwrap();
        assert!(hs_distance_sq(&zero, &zero).unwrap().abs() < 1e-15);
        assert!((hs_distance_sq(&zero, &one).unwrap() - 1.0).abs() < 1e-15);
        let one = FockState::basis_projector(&[80], &[1]).unwrap();
        let th = fock::thermal_state(1.0, 80).unwrap();
        assert!((hs_distance_sq(&one, &th).unwrap() - 5.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn fock_one_is_five_twelfths() {
        let one = FockState::basis_projector(&[3], &[1]).unwrap();
        let r = non_gaussianity(&one).unwrap();
        assert!((r.delta - 5.0 / 12.0).abs() < 1e-12);
        assert!((r.purity_tau - 1.0 / 3.0).abs() < 1e-15);
        assert!((r.overlap - 0.25).abs() < 1e-12);
        assert!((delta_fock_analytic(1) - 5.0 / 12.0).abs() < 1e-15);
        assert_eq!(delta_fock_analytic(0), 0.0);
    }

    #[test]
    fn negative_delta_policy() {
        assert_eq!(clamp_delta(-5e-10).unwrap(), 0.0);
        assert!(matches!(clamp_delta(-1e-6), Err(Error::NumericIntegrity(_))));
    }

    #[test]
    fn multimode_formula_at_one() {
        assert!((delta_fock_multimode(1, 2) - (0.5 * (1.0 + 1.0 / 9.0) - 1.0 / 16.0)).abs() < 1e-15);
        assert!((delta_fock_multimode(7, 1) - delta_fock_analytic(7)).abs() < 1e-15);
    }

    #[test]
    fn product_of_fock_and_gaussian() {
        let one = FockState::basis_projector(&[3], &[1]).unwrap();
        let th = fock::thermal_state(3.0, 120).unwrap();
        let d = delta_product(&[one.clone(), th]).unwrap();
        assert!((d - 5.0 / 12.0).abs() < 1e-8);
        let dd = delta_product(&[one.clone(), one]).unwrap();
        assert!((dd - 0.493_055_555_555_555_6).abs() < 1e-12);
    }

    #[test]
    fn loss_closed_form_limits() {
        for p in [0u64, 1, 3, 10, 1000] {
            assert!((delta_loss_analytic(p, 1.0).unwrap() - delta_fock_analytic(p)).abs() < 1e-12);
            assert!(delta_loss_analytic(p, 0.0).unwrap().abs() < 1e-15);
        }
        // Continuity at the ends.
        assert!((delta_loss_analytic(4, 1.0 - 1e-9).unwrap() - delta_fock_analytic(4)).abs() < 1e-7);
        assert!(delta_loss_analytic(4, 1e-9).unwrap() < 1e-7);
    }

    #[test]
    fn laguerre_overlaps_reduce_at_origin() {
        assert!((overlap_fock_displaced_thermal(1, 0.0) - 0.25).abs() < 1e-15);
        for p in [1u64, 2, 5] {
            for eta in [0.2, 0.7] {
                let direct: f64 = {
                    let diag = crate::channels::loss_fock_diagonal(p as usize, eta).unwrap();
                    let n = p as f64 * eta;
                    diag.iter().enumerate().map(|(l, a)| a * (n / (1.0 + n)).powi(l as i32) / (1.0 + n)).sum()
                };
                assert!((overlap_loss_displaced_thermal(p, eta, 0.0) - direct).abs() < 1e-14);
            }
            assert!((overlap_loss_displaced_thermal(p, 1.0, 0.6) - overlap_fock_displaced_thermal(p, 0.6)).abs() < 1e-14);
        }
    }

    #[test]
    fn optimal_copies_tie_break_is_smallest() {
        assert_eq!(optimal_copies(0, 10), 1);
        assert_eq!(optimal_copies(1, 1), 1);
    }
}
