//! Small dense linear-algebra helpers shared by the numerics modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;
pub type RMatrix = DMatrix<f64>;

pub(crate) const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Complex product through four real products, which run on the blocked
/// real kernel instead of the generic complex loop.
pub fn zmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.nrows(), "zmul: inner dimensions differ");
    let (ar, ai) = split(a);
    let (br, bi) = split(b);
    let re = &ar * &br - &ai * &bi;
    let im = &ar * &bi + &ai * &br;
    join(&re, &im)
}

/// `a * b^†`.
pub fn zmul_adj(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.ncols(), "zmul_adj: inner dimensions differ");
    let (ar, ai) = split(a);
    let (br, bi) = split(b);
    let brt = br.transpose();
    let bit = bi.transpose();
    let re = &ar * &brt + &ai * &bit;
    let im = &ai * &brt - &ar * &bit;
    join(&re, &im)
}

pub fn split(a: &CMatrix) -> (RMatrix, RMatrix) {
    (a.map(|z| z.re), a.map(|z| z.im))
}

pub fn join(re: &RMatrix, im: &RMatrix) -> CMatrix {
    re.zip_map(im, C64::new)
}

pub fn to_complex(a: &RMatrix) -> CMatrix {
    a.map(|x| C64::new(x, 0.0))
}

/// Largest entrywise modulus of `a - a^†`.
pub fn hermiticity_defect(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn max_abs_diff(a: &RMatrix, b: &RMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn max_abs_diff_c(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = a.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Symmetric square root and inverse square root of a positive-definite matrix.
pub fn sqrtm_spd(a: &RMatrix) -> Result<(RMatrix, RMatrix)> {
    let eig = a.clone().symmetric_eigen();
    if let Some(&min) = eig.eigenvalues.iter().min_by(|x, y| x.total_cmp(y)) {
        if min <= 0.0 {
            return Err(Error::Domain(format!(
                "matrix is not positive definite (smallest eigenvalue {min:.3e})"
            )));
        }
    }
    let v = &eig.eigenvectors;
    let sq = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let isq = DMatrix::from_diagonal(&eig.eigenvalues.map(|x| 1.0 / x.sqrt()));
    Ok((v * sq * v.transpose(), v * isq * v.transpose()))
}

/// `exp(g)` for a complex generator (scaling and squaring with Padé).
pub fn expm(g: &CMatrix) -> CMatrix {
    g.exp()
}

pub fn expm_real(g: &RMatrix) -> RMatrix {
    g.exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zmul_matches_native_product() {
        let a = CMatrix::from_fn(5, 3, |i, j| C64::new(i as f64 - j as f64, (i * j) as f64 * 0.3));
        let b = CMatrix::from_fn(3, 4, |i, j| C64::new(0.5 * j as f64, 1.0 - i as f64));
        assert!(max_abs_diff_c(&zmul(&a, &b), &(&a * &b)) < 1e-12);
        let c = CMatrix::from_fn(4, 3, |i, j| C64::new(i as f64, -(j as f64)));
        assert!(max_abs_diff_c(&zmul_adj(&a, &c), &(&a * c.adjoint())) < 1e-12);
    }

    #[test]
    fn sqrtm_rejects_indefinite() {
        let m = RMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(sqrtm_spd(&m).is_err());
    }
}
