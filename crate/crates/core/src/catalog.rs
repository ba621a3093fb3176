//! Constructors for the states studied here, and the random-state sampler.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::elements;
use crate::error::{Error, Result};
use crate::fock::{self, Basis, Flags, FockState};
use crate::linalg::{CMatrix, CVector};

/// Largest photon number of a random state.
pub const RANDOM_MAX_D: usize = 20;

const HAAR_STREAM: u64 = 1;
const SIMPLEX_STREAM: u64 = 2;
const STUDY_STREAM: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Fock { p: usize },
    /// `|p⟩^{⊗n}`.
    FockCopies { p: usize, n: usize },
    Cat { alpha: f64, phi: f64 },
    BellPhi { phi: f64 },
    BellPsi { phi: f64 },
    SqueezedVacuum { r: f64 },
    Coherent { alpha: C64 },
    Thermal { n_t: f64 },
    Random { d: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatalogSpec {
    pub family: Family,
    /// Per-mode cutoff; `None` picks the family default.
    pub cutoff: Option<usize>,
}

impl CatalogSpec {
    pub fn new(family: Family) -> Self {
        CatalogSpec { family, cutoff: None }
    }

    pub fn with_cutoff(mut self, cutoff: usize) -> Self {
        self.cutoff = Some(cutoff);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |name: &str, x: f64| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(Error::Domain(format!("{name} = {x} is not finite")))
            }
        };
        match self.family {
            Family::FockCopies { n: 0, .. } => Err(Error::Domain("copy count must be at least 1".into())),
            Family::Cat { alpha, phi } => {
                finite("α", alpha)?;
                if alpha <= 0.0 {
                    return Err(Error::Domain(format!("cat amplitude α = {alpha} must be positive")));
                }
                phase_in_range(phi)
            }
            Family::BellPhi { phi } | Family::BellPsi { phi } => phase_in_range(phi),
            Family::SqueezedVacuum { r } => finite("r", r),
            Family::Coherent { alpha } => finite("|α|", alpha.norm()),
            Family::Thermal { n_t } if !(n_t >= 0.0) || !n_t.is_finite() => {
                Err(Error::Domain(format!("thermal occupation {n_t} must be finite and nonnegative")))
            }
            Family::Random { d, .. } if d > RANDOM_MAX_D => {
                Err(Error::Domain(format!("random states need d ≤ {RANDOM_MAX_D}; got {d}")))
            }
            _ => Ok(()),
        }
    }

    pub fn default_cutoff(&self) -> usize {
        match self.family {
            Family::Fock { p } | Family::FockCopies { p, .. } => p + 3,
            Family::Cat { alpha, .. } => cat_cutoff(alpha),
            Family::BellPhi { .. } | Family::BellPsi { .. } => 3,
            Family::SqueezedVacuum { r } => fock::squeezed_cutoff(r),
            Family::Coherent { alpha } => fock::coherent_cutoff(alpha.norm()),
            Family::Thermal { n_t } => fock::thermal_cutoff(n_t, 1e-12).max(2),
            Family::Random { d, .. } => d + 1,
        }
    }

    pub fn build(&self) -> Result<FockState> {
        self.validate()?;
        let c = self.cutoff.unwrap_or_else(|| self.default_cutoff());
        match self.family {
            Family::Fock { p } => make_basic(Basic::Fock(p), c),
            Family::FockCopies { p, n } => fock_copies(p, n, c),
            Family::Cat { alpha, phi } => make_cat(alpha, phi, c),
            Family::BellPhi { phi } => make_bell_like(BellKind::Phi, phi, [c, c]),
            Family::BellPsi { phi } => make_bell_like(BellKind::Psi, phi, [c, c]),
            Family::SqueezedVacuum { r } => make_basic(Basic::SqueezedVacuum(r), c),
            Family::Coherent { alpha } => make_basic(Basic::Coherent(alpha), c),
            Family::Thermal { n_t } => make_basic(Basic::Thermal(n_t), c),
            Family::Random { d, seed } => {
                let rho = random_state(d, seed)?;
                if self.cutoff.is_some_and(|c| c != d + 1) {
                    return rho.embed(&[c.max(d + 1)]);
                }
                Ok(rho)
            }
        }
    }
}

fn phase_in_range(phi: f64) -> Result<()> {
    if !(-PI..=PI).contains(&phi) {
        return Err(Error::Domain(format!("φ = {phi} outside [−π, π]")));
    }
    Ok(())
}

/// `⌈α² + 6α + 15⌉`.
pub fn cat_cutoff(alpha: f64) -> usize {
    let a = alpha.abs();
    (a * a + 6.0 * a + 15.0).ceil() as usize
}

/// `(cos φ|α⟩ + sin φ|−α⟩)/√N` with `N = 1 + sin 2φ e^{−2α²}`.
pub fn make_cat(alpha: f64, phi: f64, cutoff: usize) -> Result<FockState> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!("cat amplitude α = {alpha} must be positive")));
    }
    let norm = 1.0 + (2.0 * phi).sin() * (-2.0 * alpha * alpha).exp();
    if norm <= 1e-300 {
        return Err(Error::Domain(format!("cat state with α = {alpha}, φ = {phi} has zero norm")));
    }
    let plus = elements::coherent_amplitudes(C64::new(alpha, 0.0), cutoff);
    let minus = elements::coherent_amplitudes(C64::new(-alpha, 0.0), cutoff);
    let psi = (plus * C64::new(phi.cos(), 0.0) + minus * C64::new(phi.sin(), 0.0)) / C64::new(norm.sqrt(), 0.0);
    let state = FockState::from_pure(&[cutoff], psi)?;
    Ok(state.with_flags(Flags { truncation: cat_cutoff(alpha) > cutoff, boundary: false }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BellKind {
    /// `cos φ|0,0⟩ + sin φ|1,1⟩`.
    Phi,
    /// `cos φ|0,1⟩ + sin φ|1,0⟩`.
    Psi,
}

pub fn make_bell_like(kind: BellKind, phi: f64, cutoffs: [usize; 2]) -> Result<FockState> {
    if cutoffs.iter().any(|&c| c < 2) {
        return Err(Error::InvalidDimension(format!("Bell-like states need cutoffs ≥ 2; got {cutoffs:?}")));
    }
    let b = Basis::new(&cutoffs)?;
    let (first, second) = match kind {
        BellKind::Phi => ([0, 0], [1, 1]),
        BellKind::Psi => ([0, 1], [1, 0]),
    };
    let mut psi = CVector::zeros(b.dim());
    psi[b.index(&first)] = C64::new(phi.cos(), 0.0);
    psi[b.index(&second)] = C64::new(phi.sin(), 0.0);
    FockState::from_pure(&cutoffs, psi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Basic {
    Fock(usize),
    SqueezedVacuum(f64),
    Coherent(C64),
    Thermal(f64),
}

pub fn make_basic(kind: Basic, cutoff: usize) -> Result<FockState> {
    match kind {
        Basic::Fock(p) => FockState::basis_projector(&[cutoff], &[p]),
        Basic::SqueezedVacuum(r) => {
            let s = fock::squeeze(C64::new(r, 0.0), cutoff)?;
            let mut vac = CVector::zeros(cutoff);
            vac[0] = C64::new(1.0, 0.0);
            Ok(FockState::from_pure(&[cutoff], s.apply(&vac))?.with_flags(s.flags()))
        }
        Basic::Coherent(alpha) => {
            let psi = elements::coherent_amplitudes(alpha, cutoff);
            let flags = Flags { truncation: fock::coherent_cutoff(alpha.norm()) > cutoff, boundary: false };
            Ok(FockState::from_pure(&[cutoff], psi)?.with_flags(flags))
        }
        Basic::Thermal(n_t) => fock::thermal_state(n_t, cutoff),
    }
}

/// `|p⟩⟨p|` in a single mode.
pub fn fock(p: usize, cutoff: usize) -> Result<FockState> {
    make_basic(Basic::Fock(p), cutoff)
}

/// `(|p⟩⟨p|)^{⊗n}`.
pub fn fock_copies(p: usize, n: usize, cutoff: usize) -> Result<FockState> {
    if n == 0 {
        return Err(Error::Domain("copy count must be at least 1".into()));
    }
    let b = Basis::new(&vec![cutoff; n])?;
    let occ = vec![p; n];
    if !b.contains(&occ) {
        return Err(Error::InvalidDimension(format!("|{p}⟩ needs cutoff > {p}; got {cutoff}")));
    }
    FockState::basis_projector(&vec![cutoff; n], &occ)
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Haar-random unitary: QR of a complex Ginibre matrix, with the phases of
/// `diag R` moved into `Q`.
pub fn haar_unitary(dim: usize, seed: u64) -> CMatrix {
    haar_from(dim, &mut stream(seed, HAAR_STREAM))
}

fn haar_from(dim: usize, rng: &mut impl Rng) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = DMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * s, im * s)
    });
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= ph;
        }
    }
    q
}

/// Uniform point on the probability simplex of dimension `dim`.
pub fn simplex_point(dim: usize, seed: u64) -> Vec<f64> {
    simplex_from(dim, &mut stream(seed, SIMPLEX_STREAM))
}

fn simplex_from(dim: usize, rng: &mut impl Rng) -> Vec<f64> {
    let e: Vec<f64> = (0..dim).map(|_| rng.sample(Exp1)).collect();
    let total: f64 = e.iter().sum();
    e.into_iter().map(|x| x / total).collect()
}

/// `U Λ U†` on `d + 1` levels with `Λ` uniform on the simplex and `U` Haar.
pub fn random_state(d: usize, seed: u64) -> Result<FockState> {
    if d > RANDOM_MAX_D {
        return Err(Error::Domain(format!("random states need d ≤ {RANDOM_MAX_D}; got {d}")));
    }
    let dim = d + 1;
    let u = haar_unitary(dim, seed);
    let lambda = simplex_point(dim, seed);
    let mut ul = u.clone();
    for (j, &l) in lambda.iter().enumerate() {
        ul.column_mut(j).scale_mut(l);
    }
    let rho = &ul * u.adjoint();
    let rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    let state = FockState::from_matrix(&[dim], rho)?;
    // The top level is populated by construction.
    Ok(state.with_flags(Flags { truncation: false, boundary: false }))
}

/// Seeds of the `samples` states drawn for dimension `d` from `seed`.
pub fn study_seeds(d: usize, samples: usize, seed: u64) -> Vec<u64> {
    let mut rng = stream(seed, STUDY_STREAM);
    rng.set_word_pos((d as u128) << 40);
    (0..samples).map(|_| rng.next_u64()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::non_gaussianity;

    #[test]
    fn cat_reduces_to_coherent() {
        let cat = make_cat(1.2, 0.0, cat_cutoff(1.2)).unwrap();
        assert!((cat.trace() - 1.0).abs() < 1e-9);
        assert!(non_gaussianity(&cat).unwrap().delta < 1e-6);
    }

    #[test]
    fn cat_norm() {
        for phi in [-PI / 4.0, 0.3, PI / 4.0, PI / 2.0, -PI] {
            for alpha in [0.5, 2.0, 5.0] {
                let cat = make_cat(alpha, phi, cat_cutoff(alpha)).unwrap();
                assert!((cat.trace() - 1.0).abs() < 1e-9, "α={alpha} φ={phi}: {}", cat.trace());
            }
        }
    }

    #[test]
    fn bell_like_states() {
        let vac = make_bell_like(BellKind::Phi, 0.0, [2, 2]).unwrap();
        assert!(non_gaussianity(&vac).unwrap().delta.abs() < 1e-12);
        // A beam splitter on |1,0⟩: the same value as |1⟩ alone.
        let psi = make_bell_like(BellKind::Psi, PI / 4.0, [3, 3]).unwrap();
        assert!((non_gaussianity(&psi).unwrap().delta - 5.0 / 12.0).abs() < 1e-12);
        // Two-mode squeezed thermal reference: μ[τ] = 1/3, κ = 13/32.
        let phi = make_bell_like(BellKind::Phi, PI / 4.0, [3, 3]).unwrap();
        assert!((non_gaussianity(&phi).unwrap().delta - 25.0 / 96.0).abs() < 1e-12);
        let one_one = make_bell_like(BellKind::Phi, PI / 2.0, [3, 3]).unwrap();
        assert!((non_gaussianity(&one_one).unwrap().delta - 0.493_055_555_555_555_6).abs() < 1e-8);
        assert!(make_bell_like(BellKind::Psi, 0.1, [1, 3]).is_err());
    }

    #[test]
    fn basic_gaussians_score_zero() {
        for kind in [Basic::SqueezedVacuum(0.5), Basic::Thermal(1.0), Basic::Coherent(C64::new(0.7, -0.2))] {
            let spec = match kind {
                Basic::SqueezedVacuum(r) => CatalogSpec::new(Family::SqueezedVacuum { r }),
                Basic::Thermal(n_t) => CatalogSpec::new(Family::Thermal { n_t }),
                Basic::Coherent(alpha) => CatalogSpec::new(Family::Coherent { alpha }),
                Basic::Fock(p) => CatalogSpec::new(Family::Fock { p }),
            };
            let d = non_gaussianity(&spec.build().unwrap()).unwrap().delta;
            assert!(d < 1e-6, "{kind:?}: {d}");
        }
        let three = make_basic(Basic::Fock(3), 6).unwrap();
        assert_eq!(three.matrix()[(3, 3)], C64::new(1.0, 0.0));
    }

    #[test]
    fn haar_is_unitary_and_seeded() {
        let u = haar_unitary(7, 11);
        let defect = (u.adjoint() * &u - CMatrix::identity(7, 7)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(defect < 1e-10);
        assert_eq!(u, haar_unitary(7, 11));
        assert_ne!(u, haar_unitary(7, 12));
    }

    #[test]
    fn simplex_point_sums_to_one() {
        let p = simplex_point(9, 4);
        assert!(p.iter().all(|&x| x >= 0.0));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_state_is_valid() {
        let rho = random_state(0, 3).unwrap();
        assert!(non_gaussianity(&rho).unwrap().delta.abs() < 1e-12);
        let rho = random_state(6, 3).unwrap();
        rho.validate().unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-12);
        assert!(random_state(21, 0).is_err());
    }

    #[test]
    fn study_seeds_differ_by_dimension() {
        let a = study_seeds(2, 5, 0);
        assert_eq!(a, study_seeds(2, 5, 0));
        assert_ne!(a, study_seeds(10, 5, 0));
        assert_eq!(&study_seeds(2, 8, 0)[..5], &a[..]);
    }
}
