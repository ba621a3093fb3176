//! Symplectic linear algebra on `2n`-dimensional phase space.
//!
//! A unitary `U` with Heisenberg action `U† R U = S R` transforms moments as
//! `X → S X`, `σ → S σ Sᵀ`. Every matrix returned here follows that reading.

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, RMatrix, I};

pub const SYMPLECTIC_TOL: f64 = 1e-8;
pub const PHYSICAL_TOL: f64 = 1e-8;

/// `Ω = ⊕ [[0, 1], [−1, 0]]`.
pub fn omega(modes: usize) -> RMatrix {
    let mut o = RMatrix::zeros(2 * modes, 2 * modes);
    for k in 0..modes {
        o[(2 * k, 2 * k + 1)] = 1.0;
        o[(2 * k + 1, 2 * k)] = -1.0;
    }
    o
}

/// `max |Sᵀ Ω S − Ω|`.
pub fn symplectic_residual(s: &RMatrix) -> f64 {
    let o = omega(s.nrows() / 2);
    linalg::max_abs_diff(&(s.transpose() * &o * s), &o)
}

fn check_even_square(m: &RMatrix, what: &str) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() == 0 || !m.nrows().is_multiple_of(2) {
        return Err(Error::ShapeMismatch(format!("{what} must be 2n x 2n, got {}x{}", m.nrows(), m.ncols())));
    }
    Ok(m.nrows() / 2)
}

/// Smallest eigenvalue of `σ + iΩ/2`; non-negative for physical states.
pub fn uncertainty_margin(cov: &RMatrix) -> Result<f64> {
    let n = check_even_square(cov, "covariance")?;
    let m = linalg::to_complex(cov) + linalg::to_complex(&omega(n)) * (I * 0.5);
    Ok(linalg::hermitian_eigenvalues(&m)[0])
}

pub fn check_physical(cov: &RMatrix) -> Result<()> {
    let asym = linalg::max_abs_diff(cov, &cov.transpose());
    if asym > 1e-10 {
        return Err(Error::Domain(format!("covariance is not symmetric (defect {asym:.3e})")));
    }
    let margin = uncertainty_margin(cov)?;
    if margin < -PHYSICAL_TOL {
        return Err(Error::Domain(format!("covariance violates the uncertainty principle (σ + iΩ/2 has eigenvalue {margin:.3e})")));
    }
    Ok(())
}

/// Symplectic eigenvalues, descending. These are the positive eigenvalues of
/// `i σ^{1/2} Ω σ^{1/2}`, which share the spectrum of `iΩσ`.
pub fn symplectic_eigenvalues(cov: &RMatrix) -> Result<Vec<f64>> {
    let n = check_even_square(cov, "covariance")?;
    let (sq, _) = linalg::sqrtm_spd(cov)?;
    let h = linalg::to_complex(&(&sq * omega(n) * &sq)) * I;
    let mut ev = linalg::hermitian_eigenvalues(&h);
    ev.reverse();
    ev.truncate(n);
    Ok(ev)
}

/// `σ = S · diag(ν₁, ν₁, …, ν_n, ν_n) · Sᵀ`.
#[derive(Debug, Clone)]
pub struct SymplecticFactorization {
    pub s: RMatrix,
    /// Descending.
    pub nu: Vec<f64>,
}

impl SymplecticFactorization {
    pub fn diagonal(&self) -> RMatrix {
        let d: Vec<f64> = self.nu.iter().flat_map(|&v| [v, v]).collect();
        RMatrix::from_diagonal(&DVector::from_vec(d))
    }

    pub fn reconstruct(&self) -> RMatrix {
        &self.s * self.diagonal() * self.s.transpose()
    }
}

pub fn williamson(cov: &RMatrix) -> Result<SymplecticFactorization> {
    let n = check_even_square(cov, "covariance")?;
    check_physical(cov)?;
    let (sq, isq) = linalg::sqrtm_spd(cov)?;
    let k = &isq * omega(n) * &isq;
    let h = linalg::to_complex(&k) * I;
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..2 * n).filter(|&i| eig.eigenvalues[i] > 0.0).collect();
    if order.len() != n {
        return Err(Error::Domain("covariance has a singular symplectic spectrum".into()));
    }
    // λ = 1/ν, so ascending λ is descending ν.
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut o = RMatrix::zeros(2 * n, 2 * n);
    let mut nu = Vec::with_capacity(n);
    let s2 = std::f64::consts::SQRT_2;
    for (pair, &idx) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(idx);
        for row in 0..2 * n {
            o[(row, 2 * pair)] = s2 * v[row].im;
            o[(row, 2 * pair + 1)] = s2 * v[row].re;
        }
        nu.push(1.0 / eig.eigenvalues[idx]);
    }
    let scale: Vec<f64> = nu.iter().flat_map(|&v| [v.powf(-0.5); 2]).collect();
    let mut s = sq * o * RMatrix::from_diagonal(&DVector::from_vec(scale));
    canonicalize_pairs(&mut s);
    Ok(SymplecticFactorization { s, nu })
}

/// Rotate each column pair so that, on the physical mode carrying most of
/// its weight, the `q` row reads `(positive, 0)`. Column-pair rotations
/// commute with the Williamson diagonal, so the factorization is unchanged.
fn canonicalize_pairs(s: &mut RMatrix) {
    let n = s.ncols() / 2;
    let mut used = vec![false; n];
    for pair in 0..n {
        let weight = |m: usize| -> f64 {
            (0..2).flat_map(|r| (0..2).map(move |c| (r, c))).map(|(r, c)| s[(2 * m + r, 2 * pair + c)].powi(2)).sum()
        };
        let mode = (0..n)
            .filter(|&m| !used[m])
            .max_by(|&a, &b| weight(a).total_cmp(&weight(b)).then(b.cmp(&a)))
            .unwrap_or(0);
        used[mode] = true;
        let (x, y) = (s[(2 * mode, 2 * pair)], s[(2 * mode, 2 * pair + 1)]);
        let h = x.hypot(y);
        if h == 0.0 {
            continue;
        }
        let (c, sn) = (x / h, y / h);
        for row in 0..2 * n {
            let (u, v) = (s[(row, 2 * pair)], s[(row, 2 * pair + 1)]);
            s[(row, 2 * pair)] = c * u + sn * v;
            s[(row, 2 * pair + 1)] = -sn * u + c * v;
        }
    }
}

/// `S = O₁ · diag(e^{r₁}, e^{−r₁}, …) · O₂` with orthogonal-symplectic `O₁`, `O₂`
/// and `r_k ≥ 0`.
#[derive(Debug, Clone)]
pub struct EulerDecomposition {
    pub o1: RMatrix,
    pub r: Vec<f64>,
    pub o2: RMatrix,
}

impl EulerDecomposition {
    pub fn squeezer(&self) -> RMatrix {
        let d: Vec<f64> = self.r.iter().flat_map(|&r| [r.exp(), (-r).exp()]).collect();
        RMatrix::from_diagonal(&DVector::from_vec(d))
    }

    pub fn reconstruct(&self) -> RMatrix {
        &self.o1 * self.squeezer() * &self.o2
    }
}

const CLUSTER_TOL: f64 = 1e-9;

pub fn euler_decompose(s: &RMatrix) -> Result<EulerDecomposition> {
    let n = check_even_square(s, "symplectic matrix")?;
    let res = symplectic_residual(s);
    if res > SYMPLECTIC_TOL {
        return Err(Error::Domain(format!("matrix is not symplectic (residual {res:.3e})")));
    }
    let sst = s * s.transpose();
    let sst = (&sst + sst.transpose()) * 0.5;
    let eig = sst.clone().symmetric_eigen();
    let mut idx: Vec<usize> = (0..2 * n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    // Candidate directions, descending eigenvalue; each degenerate cluster is
    // replaced by projections of the unit vectors so the choice is basis-aligned.
    let mut candidates: Vec<(f64, DVector<f64>)> = Vec::new();
    let mut i = 0;
    while i < idx.len() {
        let lead = eig.eigenvalues[idx[i]];
        let mut j = i + 1;
        while j < idx.len() && (eig.eigenvalues[idx[j]] - lead).abs() <= CLUSTER_TOL * lead.max(1.0) {
            j += 1;
        }
        if j - i == 1 {
            candidates.push((lead, eig.eigenvectors.column(idx[i]).into_owned()));
        } else {
            let basis: Vec<DVector<f64>> = idx[i..j].iter().map(|&c| eig.eigenvectors.column(c).into_owned()).collect();
            for e in 0..2 * n {
                let mut p = DVector::zeros(2 * n);
                for b in &basis {
                    p += b * b[e];
                }
                candidates.push((lead, p));
            }
        }
        i = j;
    }

    let om_t = omega(n).transpose();
    let mut accepted: Vec<(f64, DVector<f64>)> = Vec::new();
    for (lambda, cand) in candidates {
        if accepted.len() == n {
            break;
        }
        if lambda < 1.0 - 1e-7 {
            break;
        }
        let mut w = cand.clone();
        for (_, v) in &accepted {
            let pv = &om_t * v;
            w -= v * v.dot(&w);
            w -= &pv * pv.dot(&w);
        }
        let norm = w.norm();
        if norm < 0.5 * cand.norm().max(1e-300) || norm < 1e-6 {
            continue;
        }
        w /= norm;
        accepted.push((lambda, w));
    }
    if accepted.len() != n {
        return Err(Error::Domain("could not isolate the squeezing directions".into()));
    }

    // Place each direction on the physical mode where it is concentrated.
    let mode_weight = |v: &DVector<f64>, m: usize| v[2 * m].powi(2) + v[2 * m + 1].powi(2);
    let mut slots: Vec<Option<(f64, DVector<f64>)>> = vec![None; n];
    let mut pending: Vec<(f64, DVector<f64>)> = Vec::new();
    for (lambda, v) in accepted {
        let best = (0..n).filter(|&m| slots[m].is_none()).max_by(|&a, &b| {
            mode_weight(&v, a).total_cmp(&mode_weight(&v, b)).then(b.cmp(&a))
        });
        match best {
            Some(m) => slots[m] = Some((lambda, v)),
            None => pending.push((lambda, v)),
        }
    }
    let mut o1 = RMatrix::zeros(2 * n, 2 * n);
    let mut r = vec![0.0; n];
    for (m, slot) in slots.into_iter().enumerate() {
        let (lambda, mut v) = slot.expect("every mode receives one direction");
        let lead = v.iamax();
        if v[lead] < 0.0 {
            v = -v;
        }
        let pv = &om_t * &v;
        o1.set_column(2 * m, &v);
        o1.set_column(2 * m + 1, &pv);
        r[m] = 0.5 * lambda.max(1.0).ln();
    }
    debug_assert!(pending.is_empty());
    let zinv: Vec<f64> = r.iter().flat_map(|&x| [(-x).exp(), x.exp()]).collect();
    let o2 = RMatrix::from_diagonal(&DVector::from_vec(zinv)) * o1.transpose() * s;
    Ok(EulerDecomposition { o1, r, o2 })
}

/// Orthogonal-symplectic `O` to the mode matrix `u` of `U† a_k U = Σ_j u_kj a_j`.
pub fn passive_to_unitary(o: &RMatrix) -> CMatrix {
    let n = o.nrows() / 2;
    CMatrix::from_fn(n, n, |k, j| C64::new(o[(2 * k, 2 * j)], o[(2 * k + 1, 2 * j)]))
}

pub fn unitary_to_passive(u: &CMatrix) -> RMatrix {
    let a = u.clone();
    let b = CMatrix::zeros(u.nrows(), u.ncols());
    heisenberg_to_symplectic(&a, &b)
}

/// Symplectic matrix of the Bogoliubov map `a' = A a + B a†`.
pub fn heisenberg_to_symplectic(a: &CMatrix, b: &CMatrix) -> RMatrix {
    let n = a.nrows();
    let mut s = RMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        for j in 0..n {
            let (p, m) = (a[(k, j)] + b[(k, j)], a[(k, j)] - b[(k, j)]);
            s[(2 * k, 2 * j)] = p.re;
            s[(2 * k, 2 * j + 1)] = -m.im;
            s[(2 * k + 1, 2 * j)] = p.im;
            s[(2 * k + 1, 2 * j + 1)] = m.re;
        }
    }
    s
}

/// `S(ζ) = exp(½ζa†² − ½ζ*a²)`: `a → cosh r · a + e^{iθ} sinh r · a†`.
pub fn squeeze_symplectic(zeta: C64) -> RMatrix {
    let r = zeta.norm();
    let ph = if r > 0.0 { zeta / r } else { C64::new(1.0, 0.0) };
    heisenberg_to_symplectic(
        &CMatrix::from_element(1, 1, C64::new(r.cosh(), 0.0)),
        &CMatrix::from_element(1, 1, ph * r.sinh()),
    )
}

/// `F(φ) = e^{iφ a†a}`: `a → e^{iφ} a`.
pub fn rotation_symplectic(phi: f64) -> RMatrix {
    unitary_to_passive(&CMatrix::from_element(1, 1, C64::from_polar(1.0, phi)))
}

/// `R(θ) = exp[iθ(a₁†a₂ + a₂†a₁)]`.
pub fn beam_splitter_symplectic(theta: f64) -> RMatrix {
    let (c, s) = (C64::new(theta.cos(), 0.0), I * theta.sin());
    unitary_to_passive(&CMatrix::from_row_slice(2, 2, &[c, s, s, c]))
}

/// `S₂(ξ) = exp(ξ a₁†a₂† − ξ* a₁a₂)`: `a₁ → cosh r · a₁ + e^{iθ} sinh r · a₂†`.
pub fn two_mode_squeeze_symplectic(xi: C64) -> RMatrix {
    let r = xi.norm();
    let ph = if r > 0.0 { xi / r } else { C64::new(1.0, 0.0) };
    let z = C64::new(0.0, 0.0);
    let ch = C64::new(r.cosh(), 0.0);
    let sh = ph * r.sinh();
    heisenberg_to_symplectic(&CMatrix::from_row_slice(2, 2, &[ch, z, z, ch]), &CMatrix::from_row_slice(2, 2, &[z, sh, sh, z]))
}

/// Embed a `2m × 2m` block acting on consecutive modes starting at `first`.
pub fn embed(block: &RMatrix, first: usize, modes: usize) -> RMatrix {
    let mut s = RMatrix::identity(2 * modes, 2 * modes);
    let w = block.nrows();
    s.view_mut((2 * first, 2 * first), (w, w)).copy_from(block);
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_symplectic(n: usize, rng: &mut ChaCha8Rng) -> RMatrix {
        let mut s = RMatrix::identity(2 * n, 2 * n);
        for _ in 0..3 {
            for m in 0..n {
                let z = C64::from_polar(rng.random_range(0.0..0.8), rng.random_range(-3.0..3.0));
                s = embed(&squeeze_symplectic(z), m, n) * s;
                s = embed(&rotation_symplectic(rng.random_range(-3.0..3.0)), m, n) * s;
            }
            if n == 2 {
                s = beam_splitter_symplectic(rng.random_range(-1.5..1.5)) * s;
                s = two_mode_squeeze_symplectic(C64::from_polar(rng.random_range(0.0..0.5), 0.3)) * s;
            }
        }
        s
    }

    pub(crate) fn random_physical_cov(n: usize, rng: &mut ChaCha8Rng) -> RMatrix {
        let s = random_symplectic(n, rng);
        let d: Vec<f64> = (0..n).flat_map(|_| [0.5 + rng.random_range(0.0..2.0); 2]).collect();
        let cov = &s * RMatrix::from_diagonal(&DVector::from_vec(d)) * s.transpose();
        (&cov + cov.transpose()) * 0.5
    }

    #[test]
    fn omega_properties() {
        let o = omega(3);
        assert!(max_abs_diff(&(&o * &o), &(-RMatrix::identity(6, 6))) == 0.0);
        assert!(max_abs_diff(&(o.transpose() * &o), &RMatrix::identity(6, 6)) == 0.0);
    }

    #[test]
    fn gate_matrices_are_symplectic() {
        assert!(symplectic_residual(&squeeze_symplectic(C64::from_polar(0.9, 0.4))) < 1e-14);
        assert!(symplectic_residual(&beam_splitter_symplectic(0.7)) < 1e-14);
        assert!(symplectic_residual(&two_mode_squeeze_symplectic(C64::from_polar(0.6, -1.0))) < 1e-13);
        assert!(symplectic_residual(&rotation_symplectic(2.0)) < 1e-14);
    }

    #[test]
    fn williamson_thermal() {
        let cov = RMatrix::identity(2, 2) * 3.5;
        let f = williamson(&cov).unwrap();
        assert!((f.nu[0] - 3.5).abs() < 1e-12);
        assert!(max_abs_diff(&f.s, &RMatrix::identity(2, 2)) < 1e-12);
    }

    #[test]
    fn williamson_squeezed_vacuum() {
        let r = 0.5f64;
        let cov = RMatrix::from_diagonal(&DVector::from_vec(vec![(2.0 * r).exp() / 2.0, (-2.0 * r).exp() / 2.0]));
        let f = williamson(&cov).unwrap();
        assert!((f.nu[0] - 0.5).abs() < 1e-12);
        let expect = RMatrix::from_diagonal(&DVector::from_vec(vec![r.exp(), (-r).exp()]));
        assert!(max_abs_diff(&f.s, &expect) < 1e-12);
    }

    #[test]
    fn williamson_random_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=2 {
            for _ in 0..100 {
                let cov = random_physical_cov(n, &mut rng);
                let f = williamson(&cov).unwrap();
                assert!(symplectic_residual(&f.s) < 1e-8);
                assert!(max_abs_diff(&f.reconstruct(), &cov) < 1e-8);
                assert!(f.nu.windows(2).all(|w| w[0] >= w[1]));
            }
        }
    }

    #[test]
    fn williamson_rejects_unphysical() {
        let cov = RMatrix::identity(2, 2) * 0.3;
        assert!(matches!(williamson(&cov), Err(Error::Domain(_))));
    }

    #[test]
    fn symplectic_eigenvalues_of_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = random_symplectic(2, &mut rng);
        let d = RMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 2.0, 0.7, 0.7]));
        let ev = symplectic_eigenvalues(&(&s * d * s.transpose())).unwrap();
        assert!((ev[0] - 2.0).abs() < 1e-9 && (ev[1] - 0.7).abs() < 1e-9);
    }

    #[test]
    fn euler_of_passive_is_trivial() {
        let o = beam_splitter_symplectic(0.4) * embed(&rotation_symplectic(1.0), 1, 2);
        let e = euler_decompose(&o).unwrap();
        assert!(e.r.iter().all(|&r| r.abs() < 1e-12));
        assert!(max_abs_diff(&(&e.o1 * &e.o2), &o) < 1e-12);
    }

    #[test]
    fn euler_of_diagonal_squeezer() {
        let r = 0.5f64;
        let s = RMatrix::from_diagonal(&DVector::from_vec(vec![r.exp(), (-r).exp()]));
        let e = euler_decompose(&s).unwrap();
        assert!((e.r[0] - r).abs() < 1e-12);
        assert!(max_abs_diff(&e.o1, &RMatrix::identity(2, 2)) < 1e-12);
        assert!(max_abs_diff(&e.o2, &RMatrix::identity(2, 2)) < 1e-12);
        let s2 = embed(&s, 1, 2);
        let e2 = euler_decompose(&s2).unwrap();
        assert!(e2.r[0].abs() < 1e-12 && (e2.r[1] - r).abs() < 1e-12);
        assert!(max_abs_diff(&e2.o1, &RMatrix::identity(4, 4)) < 1e-12);
    }

    #[test]
    fn euler_random_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..=2 {
            for _ in 0..100 {
                let s = random_symplectic(n, &mut rng);
                let e = euler_decompose(&s).unwrap();
                assert!(max_abs_diff(&e.reconstruct(), &s) < 1e-7);
                for o in [&e.o1, &e.o2] {
                    assert!(symplectic_residual(o) < 1e-8);
                    assert!(max_abs_diff(&(o.transpose() * o), &RMatrix::identity(2 * n, 2 * n)) < 1e-8);
                }
            }
        }
    }

    #[test]
    fn euler_rejects_non_symplectic() {
        let s = RMatrix::identity(2, 2) * 2.0;
        assert!(matches!(euler_decompose(&s), Err(Error::Domain(_))));
    }

    #[test]
    fn passive_round_trip() {
        let o = beam_splitter_symplectic(0.3);
        let u = passive_to_unitary(&o);
        assert!(max_abs_diff(&unitary_to_passive(&u), &o) < 1e-15);
    }
}
