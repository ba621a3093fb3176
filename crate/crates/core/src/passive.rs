//! Fock representation of passive (number-conserving) linear optics.
//!
//! For `U† a_k U = Σ_j u_kj a_j` the creation operators map as
//! `U a_j† U† = Σ_k u_kj a_k†`, so
//! `U|m⟩ = b_k† U|m − e_k⟩ / √m_k` with `b_k† = Σ_j u_jk a_j†`.
//! Creation operators only add photons, which makes any row crop exact.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{Basis, FockOperator};
use crate::linalg::CMatrix;

/// `⟨n|U|m⟩` for `n` in `rows` and `m` in `cols`; both boxes have the same mode count.
pub fn passive_block(u: &CMatrix, rows: &Basis, cols: &Basis) -> Result<CMatrix> {
    let modes = u.nrows();
    if u.ncols() != modes || rows.modes() != modes || cols.modes() != modes {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} mode matrix for boxes with {} and {} modes",
            u.nrows(),
            u.ncols(),
            rows.modes(),
            cols.modes()
        )));
    }
    let mut out = CMatrix::zeros(rows.dim(), cols.dim());
    let vac = vec![0usize; modes];
    out[(rows.index(&vac), cols.index(&vac))] = C64::new(1.0, 0.0);
    let sqrt: Vec<f64> = (0..=rows.cutoffs().iter().copied().max().unwrap_or(1)).map(|k| (k as f64).sqrt()).collect();
    // Column m − e_k has a smaller index than m, so index order is a valid build order.
    for ci in 1..cols.dim() {
        let occ = cols.occupations(ci);
        let k = occ.iter().position(|&x| x > 0).expect("only the vacuum has no photons");
        let mut prev = occ.clone();
        prev[k] -= 1;
        let pi = cols.index(&prev);
        let norm = 1.0 / (occ[k] as f64).sqrt();
        for ri in 0..rows.dim() {
            let src = out[(ri, pi)];
            if src.re == 0.0 && src.im == 0.0 {
                continue;
            }
            for j in 0..modes {
                let nj = rows.occupation(ri, j);
                if nj + 1 >= rows.cutoffs()[j] {
                    continue;
                }
                let c = u[(j, k)];
                if c.re == 0.0 && c.im == 0.0 {
                    continue;
                }
                let ti = ri + rows.stride(j);
                let add = src * c * (sqrt[nj + 1] * norm);
                out[(ti, ci)] += add;
            }
        }
    }
    Ok(out)
}

/// `U|m⟩` restricted to `rows` for each occupation `m` in `cols`. Every
/// `m − e_k` (with `k` the first occupied mode) must appear before `m`,
/// which holds for any set closed under removing photons.
pub fn passive_columns(u: &CMatrix, rows: &Basis, cols: &[Vec<usize>]) -> Result<CMatrix> {
    let modes = u.nrows();
    if u.ncols() != modes || rows.modes() != modes || cols.iter().any(|c| c.len() != modes) {
        return Err(Error::ShapeMismatch(format!("{}x{} mode matrix for {}-mode boxes", u.nrows(), u.ncols(), rows.modes())));
    }
    let mut out = CMatrix::zeros(rows.dim(), cols.len());
    let mut seen = std::collections::HashMap::with_capacity(cols.len());
    let sqrt: Vec<f64> = (0..=rows.cutoffs().iter().copied().max().unwrap_or(1)).map(|k| (k as f64).sqrt()).collect();
    for (ci, occ) in cols.iter().enumerate() {
        seen.insert(occ.clone(), ci);
        let Some(k) = occ.iter().position(|&x| x > 0) else {
            out[(rows.index(&vec![0; modes]), ci)] = C64::new(1.0, 0.0);
            continue;
        };
        let mut prev = occ.clone();
        prev[k] -= 1;
        let pi = *seen
            .get(&prev)
            .ok_or_else(|| Error::ShapeMismatch(format!("column {occ:?} listed before {prev:?}")))?;
        let norm = 1.0 / (occ[k] as f64).sqrt();
        for ri in 0..rows.dim() {
            let src = out[(ri, pi)];
            if src.re == 0.0 && src.im == 0.0 {
                continue;
            }
            for j in 0..modes {
                let nj = rows.occupation(ri, j);
                if nj + 1 >= rows.cutoffs()[j] {
                    continue;
                }
                let add = src * u[(j, k)] * (sqrt[nj + 1] * norm);
                out[(ri + rows.stride(j), ci)] += add;
            }
        }
    }
    Ok(out)
}

/// `P v` with `P = passive_block(u, rows, cols)`, without forming `P`.
/// Number conservation splits `P` into blocks of fixed total photon number,
/// each built from the one below it.
pub fn apply_passive(u: &CMatrix, v: &CMatrix, cols: &Basis, rows: &Basis) -> Result<CMatrix> {
    let modes = u.nrows();
    if u.ncols() != modes || rows.modes() != modes || cols.modes() != modes || v.nrows() != cols.dim() {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} mode matrix, {}-row input for a box of dimension {}",
            u.nrows(),
            u.ncols(),
            v.nrows(),
            cols.dim()
        )));
    }
    let groups = |b: &Basis| -> (Vec<Vec<usize>>, Vec<usize>) {
        let top = b.cutoffs().iter().map(|c| c - 1).sum::<usize>();
        let mut g = vec![Vec::new(); top + 1];
        let mut pos = vec![0; b.dim()];
        for i in 0..b.dim() {
            let t = b.total(i);
            pos[i] = g[t].len();
            g[t].push(i);
        }
        (g, pos)
    };
    let (cg, cpos) = groups(cols);
    let (rg, rpos) = groups(rows);
    let sqrt: Vec<f64> = (0..=rows.cutoffs().iter().copied().max().unwrap_or(1)).map(|k| (k as f64).sqrt()).collect();
    let mut out = CMatrix::zeros(rows.dim(), v.ncols());
    let mut prev = CMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    for total in 0..cg.len().min(rg.len()) {
        let (cs, rs) = (&cg[total], &rg[total]);
        let block = if total == 0 {
            prev.clone()
        } else {
            let mut b = CMatrix::zeros(rs.len(), cs.len());
            for (cj, &ci) in cs.iter().enumerate() {
                let mut occ = cols.occupations(ci);
                let k = occ.iter().position(|&x| x > 0).expect("nonzero total");
                let norm = 1.0 / (occ[k] as f64).sqrt();
                occ[k] -= 1;
                let pj = cpos[cols.index(&occ)];
                for (pr, &ri) in rg[total - 1].iter().enumerate() {
                    let src = prev[(pr, pj)];
                    if src.re == 0.0 && src.im == 0.0 {
                        continue;
                    }
                    for j in 0..modes {
                        let nj = rows.occupation(ri, j);
                        if nj + 1 >= rows.cutoffs()[j] {
                            continue;
                        }
                        b[(rpos[ri + rows.stride(j)], cj)] += src * u[(j, k)] * (sqrt[nj + 1] * norm);
                    }
                }
            }
            b
        };
        if !rs.is_empty() && !cs.is_empty() {
            let part = CMatrix::from_fn(cs.len(), v.ncols(), |i, c| v[(cs[i], c)]);
            let prod = crate::linalg::zmul(&block, &part);
            for (rj, &ri) in rs.iter().enumerate() {
                for c in 0..v.ncols() {
                    out[(ri, c)] = prod[(rj, c)];
                }
            }
        }
        prev = block;
    }
    Ok(out)
}

pub fn passive_operator(u: &CMatrix, cutoffs: &[usize]) -> Result<FockOperator> {
    let b = Basis::new(cutoffs)?;
    FockOperator::new(cutoffs, passive_block(u, &b, &b)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{self, TwoModeGate};
    use crate::linalg::I;

    #[test]
    fn beam_splitter_matches_exponential() {
        let theta = 0.7f64;
        let u = CMatrix::from_row_slice(2, 2, &[C64::new(theta.cos(), 0.0), I * theta.sin(), I * theta.sin(), C64::new(theta.cos(), 0.0)]);
        let exact = passive_operator(&u, &[10, 10]).unwrap();
        let expm = fock::two_mode_gate(TwoModeGate::BeamSplitter(theta), [10, 10]).unwrap();
        // Number conservation makes low-photon columns exact in both constructions.
        let b = Basis::new(&[10, 10]).unwrap();
        for c in 0..b.dim() {
            if b.total(c) >= 10 {
                continue;
            }
            for r in 0..b.dim() {
                assert!((exact.matrix()[(r, c)] - expm.matrix()[(r, c)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn column_subset_matches_block() {
        let u = CMatrix::from_row_slice(2, 2, &[C64::new(0.6, 0.0), C64::new(0.0, 0.8), C64::new(0.0, 0.8), C64::new(0.6, 0.0)]);
        let rows = Basis::new(&[7, 7]).unwrap();
        let cols = Basis::new(&[4, 4]).unwrap();
        let full = passive_block(&u, &rows, &cols).unwrap();
        let occs: Vec<Vec<usize>> = vec![vec![0, 0], vec![0, 1], vec![0, 2], vec![1, 0], vec![1, 2], vec![2, 0]];
        let sub = passive_columns(&u, &rows, &occs).unwrap();
        for (c, occ) in occs.iter().enumerate() {
            let j = cols.index(occ);
            for r in 0..rows.dim() {
                assert!((sub[(r, c)] - full[(r, j)]).norm() < 1e-14);
            }
        }
        assert!(passive_columns(&u, &rows, &[vec![1, 1]]).is_err());
    }

    #[test]
    fn blockwise_application_matches_dense() {
        let u = CMatrix::from_row_slice(2, 2, &[C64::new(0.6, 0.0), C64::new(0.0, 0.8), C64::new(0.0, 0.8), C64::new(0.6, 0.0)]);
        let cols = Basis::new(&[6, 5]).unwrap();
        let rows = Basis::new(&[4, 7]).unwrap();
        let v = CMatrix::from_fn(cols.dim(), 3, |i, j| C64::new((i as f64 * 0.37 + j as f64).sin(), (i as f64 * 0.11).cos()));
        let dense = passive_block(&u, &rows, &cols).unwrap() * &v;
        let fast = apply_passive(&u, &v, &cols, &rows).unwrap();
        assert!(crate::linalg::max_abs_diff_c(&dense, &fast) < 1e-13);
    }

    #[test]
    fn single_mode_phase() {
        let u = CMatrix::from_element(1, 1, C64::from_polar(1.0, 0.4));
        let p = passive_operator(&u, &[6]).unwrap();
        for n in 0..6 {
            assert!((p.matrix()[(n, n)] - C64::from_polar(1.0, 0.4 * n as f64)).norm() < 1e-14);
        }
    }

    #[test]
    fn cropping_is_exact() {
        let u = CMatrix::from_row_slice(2, 2, &[C64::new(0.6, 0.0), C64::new(0.0, 0.8), C64::new(0.0, 0.8), C64::new(0.6, 0.0)]);
        let big = Basis::new(&[9, 9]).unwrap();
        let small = Basis::new(&[4, 3]).unwrap();
        let cols = Basis::new(&[3, 3]).unwrap();
        let full = passive_block(&u, &big, &cols).unwrap();
        let crop = passive_block(&u, &small, &cols).unwrap();
        for r in 0..small.dim() {
            let occ = small.occupations(r);
            let rb = big.index(&occ);
            for c in 0..cols.dim() {
                assert!((crop[(r, c)] - full[(rb, c)]).norm() < 1e-15);
            }
        }
    }
}
