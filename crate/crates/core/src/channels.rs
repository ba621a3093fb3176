//! Zero-temperature loss and inconclusive photon subtraction (IPS).
//!
//! Both act through the Kraus family of a beam splitter with the vacuum,
//! `V_m = [(1−η)^m/m!]^{1/2} a^m η^{(a†a − m)/2}`:
//!
//! ```text
//! (V_m ρ V_m†)_{l,l'} = √(C(l+m,m) C(l'+m,m)) (1−η)^m η^{(l+l')/2} ρ_{l+m,l'+m}
//! ```
//!
//! Loss keeps every `m`; IPS keeps `m` reflected photons with the on/off
//! click probability `1 − (1−ε)^m` and renormalizes.

use num_complex::Complex64 as C64;

use crate::elements;
use crate::error::{Error, Result};
use crate::fock::{self, Flags, FockState, TAIL_BUDGET};
use crate::linalg::{self, CMatrix};
use crate::special::{ln_binomial, ln_factorials};

/// Smallest click probability that may be conditioned on.
pub const CLICK_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelParams {
    Identity,
    /// Survival probability `η = e^{−γt}`.
    Loss { eta: f64 },
    /// Beam splitter of transmissivity `T` followed by an on/off detector
    /// of efficiency `ε` on the reflected arm.
    Ips { transmissivity: f64, efficiency: f64 },
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ChannelParams::Identity => Ok(()),
            ChannelParams::Loss { eta } => unit_interval("η", eta),
            ChannelParams::Ips { transmissivity, efficiency } => {
                unit_interval("T", transmissivity)?;
                if !(efficiency > 0.0 && efficiency <= 1.0) {
                    return Err(Error::Domain(format!("efficiency ε = {efficiency} outside (0, 1]")));
                }
                Ok(())
            }
        }
    }

    pub fn is_gaussian(&self) -> bool {
        !matches!(self, ChannelParams::Ips { .. })
    }

    /// `ℰ(ρ)`; IPS outputs are conditioned and renormalized.
    pub fn apply(&self, state: &FockState) -> Result<FockState> {
        match *self {
            ChannelParams::Identity => Ok(state.clone()),
            ChannelParams::Loss { eta } => loss_apply(state, eta),
            ChannelParams::Ips { transmissivity, efficiency } => Ok(ips_apply(state, transmissivity, efficiency)?.0),
        }
    }
}

fn unit_interval(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("{name} = {x} outside [0, 1]")));
    }
    Ok(())
}

fn single_mode(state: &FockState) -> Result<usize> {
    if state.modes() != 1 {
        return Err(Error::ShapeMismatch(format!("single-mode channel applied to {} modes", state.modes())));
    }
    Ok(state.cutoffs()[0])
}

/// `x · ln y` with `0 · ln 0 = 0`.
fn xlny(x: f64, ln_y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * ln_y
    }
}

/// `Σ_m w_m V_m ρ V_m†` for the loss Kraus family at `η`.
fn kraus_sum(rho: &CMatrix, eta: f64, weight: impl Fn(usize) -> f64) -> CMatrix {
    let d = rho.nrows();
    let lf = ln_factorials(2 * d + 1);
    let (le, lq) = (eta.ln(), (1.0 - eta).ln());
    let mut out = CMatrix::zeros(d, d);
    for m in 0..d {
        let w = weight(m);
        if w == 0.0 {
            continue;
        }
        let base = w.ln() + xlny(m as f64, lq);
        if base == f64::NEG_INFINITY {
            continue;
        }
        // √(w C(l+m, m) ηˡ (1−η)ᵐ) for each l; every factor is at most one.
        let amp: Vec<f64> =
            (0..d - m).map(|l| (0.5 * (base + lf[l + m] - lf[l] - lf[m]) + xlny(0.5 * l as f64, le)).exp()).collect();
        for lp in 0..d - m {
            let b = amp[lp];
            if b == 0.0 {
                continue;
            }
            for l in 0..d - m {
                out[(l, lp)] += rho[(l + m, lp + m)] * (amp[l] * b);
            }
        }
    }
    out
}

/// Loss channel by its Kraus sum, truncated at `m = cutoff`.
pub fn loss_apply(state: &FockState, eta: f64) -> Result<FockState> {
    unit_interval("η", eta)?;
    single_mode(state)?;
    let out = kraus_sum(state.matrix(), eta, |_| 1.0);
    let out = (&out + out.adjoint()) * C64::new(0.5, 0.0);
    let before = state.trace();
    let result = FockState::from_matrix(state.cutoffs(), out)?;
    let drift = (result.trace() - before).abs();
    if drift > 1e-9 {
        return Err(Error::NumericIntegrity(format!("loss channel changed the trace by {drift:.3e}")));
    }
    Ok(result.with_flags(state.flags()))
}

/// `α_{l,p}(η) = C(p,l) (1−η)^{p−l} η^l`, `l = 0..=p`.
pub fn loss_fock_diagonal(p: usize, eta: f64) -> Result<Vec<f64>> {
    unit_interval("η", eta)?;
    let (le, lq) = (eta.ln(), (1.0 - eta).ln());
    Ok((0..=p)
        .map(|l| (ln_binomial(p as u64, l as u64) + xlny(l as f64, le) + xlny((p - l) as f64, lq)).exp())
        .collect())
}

/// Conditional IPS output of a single-mode state and its click probability.
pub fn ips_apply(state: &FockState, transmissivity: f64, efficiency: f64) -> Result<(FockState, f64)> {
    ChannelParams::Ips { transmissivity, efficiency }.validate()?;
    single_mode(state)?;
    let miss = 1.0 - efficiency;
    let out = kraus_sum(state.matrix(), transmissivity, |m| if m == 0 { 0.0 } else { 1.0 - miss.powi(m as i32) });
    let prob = out.trace().re;
    if !(prob > CLICK_FLOOR) {
        return Err(Error::Conditioning(prob.max(0.0)));
    }
    let out = (&out + out.adjoint()) * C64::new(0.5 / prob, 0.0);
    let result = FockState::from_matrix(state.cutoffs(), out)?;
    Ok((result.with_flags(state.flags()), prob))
}

/// `S(r)|0⟩ ⊗ |0⟩` through a beam splitter of transmissivity `T`, an on/off
/// click of efficiency `ε` on the reflected mode, which is then traced out.
/// Returns the renormalized transmitted state and the click probability.
pub fn ips_state(r: f64, transmissivity: f64, efficiency: f64, cutoff: Option<usize>) -> Result<(FockState, f64)> {
    ChannelParams::Ips { transmissivity, efficiency }.validate()?;
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("squeezing r = {r} < 0")));
    }
    let guard = fock::squeezed_cutoff(r);
    let d = cutoff.unwrap_or(guard);
    if d < 2 {
        return Err(Error::InvalidDimension(format!("cutoff {d} < 2")));
    }
    let psi = elements::squeezed_vacuum_amplitudes(C64::new(r, 0.0), d);
    let input_deficit = 1.0 - psi.norm_squared();
    let (c, s) = (transmissivity.sqrt(), (1.0 - transmissivity).sqrt());
    let (lc, ls) = (c.ln(), s.ln());
    let miss = 1.0 - efficiency;
    // Column k − 1 holds √w_k ⟨·, k| R |ψ, 0⟩ for k reflected photons;
    // R|n,0⟩ = Σ_k √C(n,k) c^{n−k} (is)^k |n−k, k⟩.
    let mut phi = CMatrix::zeros(d, d - 1);
    for k in 1..d {
        let w = 1.0 - miss.powi(k as i32);
        let phase = C64::new(0.0, 1.0).powu(k as u32) * w.sqrt();
        for n in k..d {
            if psi[n].norm() == 0.0 {
                continue;
            }
            let mag = (0.5 * ln_binomial(n as u64, k as u64) + xlny((n - k) as f64, lc) + xlny(k as f64, ls)).exp();
            phi[(n - k, k - 1)] = psi[n] * phase * mag;
        }
    }
    let rho = linalg::zmul_adj(&phi, &phi);
    let prob = rho.trace().re;
    if !(prob > CLICK_FLOOR) {
        return Err(Error::Conditioning(prob.max(0.0)));
    }
    let rho = (&rho + rho.adjoint()) * C64::new(0.5 / prob, 0.0);
    let state = FockState::from_matrix(&[d], rho)?;
    let flags = Flags { truncation: d < guard || input_deficit > TAIL_BUDGET, boundary: false };
    Ok((state.with_flags(flags), prob))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff_c;

    #[test]
    fn loss_identity_and_vacuum_limits() {
        let th = fock::thermal_state(0.5, 40).unwrap();
        let same = loss_apply(&th, 1.0).unwrap();
        assert!(max_abs_diff_c(same.matrix(), th.matrix()) < 1e-14);
        let three = FockState::basis_projector(&[6], &[3]).unwrap();
        let vac = loss_apply(&three, 0.0).unwrap();
        assert!((vac.matrix()[(0, 0)].re - 1.0).abs() < 1e-14);
        assert!((vac.trace() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn loss_fock_diagonal_examples() {
        let a = loss_fock_diagonal(1, 0.3).unwrap();
        assert!((a[0] - 0.7).abs() < 1e-15 && (a[1] - 0.3).abs() < 1e-15);
        let b = loss_fock_diagonal(2, 0.5).unwrap();
        for (x, y) in b.iter().zip([0.25, 0.5, 0.25]) {
            assert!((x - y).abs() < 1e-15);
        }
        for p in [0usize, 5, 40, 300] {
            let s: f64 = loss_fock_diagonal(p, 0.37).unwrap().iter().sum();
            assert!((s - 1.0).abs() < 1e-13, "p = {p}: {s}");
        }
    }

    #[test]
    fn loss_of_fock_matches_binomial() {
        for p in 1..=5 {
            let state = FockState::basis_projector(&[p + 2], &[p]).unwrap();
            for eta in [0.1, 0.5, 0.9] {
                let out = loss_apply(&state, eta).unwrap();
                let diag = loss_fock_diagonal(p, eta).unwrap();
                for l in 0..=p {
                    assert!((out.matrix()[(l, l)].re - diag[l]).abs() < 1e-10);
                }
                assert!(out.matrix().iter().enumerate().all(|(i, z)| i % (p + 3) == 0 || z.norm() < 1e-15));
            }
        }
    }

    #[test]
    fn loss_of_coherent_state_is_coherent() {
        let alpha = C64::new(0.8, 0.3);
        let d = 40;
        let coh = FockState::from_pure(&[d], elements::coherent_amplitudes(alpha, d)).unwrap();
        let out = loss_apply(&coh, 0.6).unwrap();
        let target = FockState::from_pure(&[d], elements::coherent_amplitudes(alpha * 0.6f64.sqrt(), d)).unwrap();
        assert!(max_abs_diff_c(out.matrix(), target.matrix()) < 1e-10);
    }

    #[test]
    fn ips_vacuum_input_cannot_click() {
        assert!(matches!(ips_state(0.0, 0.5, 0.8, None), Err(Error::Conditioning(_))));
    }

    #[test]
    fn ips_state_matches_general_map() {
        let r = 0.4;
        let (literal, p1) = ips_state(r, 0.7, 0.6, Some(60)).unwrap();
        let sv = FockState::from_pure(&[60], elements::squeezed_vacuum_amplitudes(C64::new(r, 0.0), 60)).unwrap();
        let (general, p2) = ips_apply(&sv, 0.7, 0.6).unwrap();
        assert!((p1 - p2).abs() < 1e-12);
        assert!(max_abs_diff_c(literal.matrix(), general.matrix()) < 1e-12);
        assert!((literal.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ips_click_probability_oracle() {
        // Ideal detector: P = 1 − Tr[ρ T^{a†a}] for a squeezed vacuum,
        // Σ_n |ψ_n|² T^n evaluated term by term.
        let r = 0.5f64;
        let t: f64 = 0.8;
        let psi = elements::squeezed_vacuum_amplitudes(C64::new(r, 0.0), 200);
        let no_click: f64 = psi.iter().enumerate().map(|(n, a)| a.norm_sqr() * t.powi(n as i32)).sum();
        let (_, p) = ips_state(r, t, 1.0, Some(200)).unwrap();
        assert!((p - (1.0 - no_click)).abs() < 1e-12);
    }

    #[test]
    fn channel_validation() {
        assert!(ChannelParams::Loss { eta: 1.2 }.validate().is_err());
        assert!(ChannelParams::Ips { transmissivity: 0.5, efficiency: 0.0 }.validate().is_err());
        assert!(ChannelParams::Ips { transmissivity: 0.5, efficiency: 1.0 }.validate().is_ok());
    }
}
