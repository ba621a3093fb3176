//! Closed-form Fock matrix elements of displacement and squeezing.
//!
//! Both recursions only reach into rows `≤ m`, so a `rows × cols` block is
//! exact no matter how small `rows` is. That is what lets the reference
//! synthesis crop to the target box without a truncation error from the
//! operator itself.

use num_complex::Complex64 as C64;

use crate::linalg::{CMatrix, CVector};
use crate::special::ln_factorials;

/// `⟨m|D(α)|n⟩` for `m < rows`, `n < cols`.
///
/// Each diagonal `n − m = k` is `(−α*)^k e^{−|α|²/2} √(m!/n!) L_m^{(k)}(|α|²)`
/// (and `α^k` below the diagonal), run as a three-term recurrence in `m` on
/// rescaled values.
pub fn displacement_block(alpha: C64, rows: usize, cols: usize) -> CMatrix {
    let mut d = CMatrix::zeros(rows, cols);
    if rows == 0 || cols == 0 {
        return d;
    }
    let x = alpha.norm_sqr();
    let mag = alpha.norm();
    let unit = if mag > 0.0 { alpha / mag } else { C64::new(1.0, 0.0) };
    let lf = ln_factorials(rows.max(cols) + 1);
    let kmax = rows.max(cols);
    for k in 0..kmax {
        // Length of the diagonal in either triangle.
        let above = if k < cols { rows.min(cols - k) } else { 0 };
        let below = if k > 0 && k < rows { cols.min(rows - k) } else { 0 };
        let len = above.max(below);
        if len == 0 {
            continue;
        }
        let h = laguerre_diagonal(k, x, mag, &lf, len);
        let up = (-unit.conj()).powu(k as u32);
        let down = unit.powu(k as u32);
        for (j, &v) in h.iter().enumerate() {
            if j < above {
                d[(j, j + k)] = up * v;
            }
            if j < below {
                d[(j + k, j)] = down * v;
            }
        }
    }
    d
}

/// `h_j = |α|^k e^{−x/2} √(j!/(j+k)!) L_j^{(k)}(x)` for `j < len`.
fn laguerre_diagonal(k: usize, x: f64, mag: f64, lf: &[f64], len: usize) -> Vec<f64> {
    let ln_h0 = if k == 0 { -0.5 * x } else { k as f64 * mag.ln() - 0.5 * lf[k] - 0.5 * x };
    let kf = k as f64;
    scaled_recurrence(ln_h0, len, |j, prev, cur| {
        let jf = j as f64;
        ((2.0 * jf + 1.0 + kf - x) * cur - (jf * (jf + kf)).sqrt() * prev) / ((jf + 1.0) * (jf + 1.0 + kf)).sqrt()
    })
}

/// `h_0 = e^{ln_h0}`, `h_{j+1} = step(j, h_{j−1}, h_j)`, carried as mantissa
/// and log-scale so that neither end over- or underflows.
fn scaled_recurrence(ln_h0: f64, len: usize, step: impl Fn(usize, f64, f64) -> f64) -> Vec<f64> {
    let mut out = vec![0.0; len];
    if len == 0 || ln_h0 == f64::NEG_INFINITY {
        return out;
    }
    const BIG: f64 = 1e150;
    let emit = |v: f64, scale: f64, factor: f64| {
        if factor.is_normal() {
            v * factor
        } else if v == 0.0 {
            0.0
        } else {
            v.signum() * (v.abs().ln() + scale).exp()
        }
    };
    let mut scale = ln_h0;
    let mut factor = scale.exp();
    let (mut prev, mut cur) = (0.0, 1.0);
    out[0] = emit(cur, scale, factor);
    for j in 0..len - 1 {
        let next = step(j, prev, cur);
        prev = cur;
        cur = next;
        if cur.abs() > BIG {
            prev /= BIG;
            cur /= BIG;
            scale += BIG.ln();
            factor = scale.exp();
        }
        out[j + 1] = emit(cur, scale, factor);
    }
    out
}

/// `⟨m|S(ζ)|n⟩` for `S(ζ) = exp(½ζa†² − ½ζ*a²)`.
///
/// With `ζ = r e^{iθ}`, `⟨n+2q|S|n⟩ = e^{iqθ} √sech r (tanh r / 2)^q h_n` where
/// `h_n = √((n+2q)! n!)/(n+q)! · P_n^{(q,q)}(sech r)`, and
/// `⟨n|S|n+2q⟩ = (−e^{−iθ})^q` times the same.
pub fn squeeze_block(zeta: C64, rows: usize, cols: usize) -> CMatrix {
    let mut s = CMatrix::zeros(rows, cols);
    if rows == 0 || cols == 0 {
        return s;
    }
    let r = zeta.norm();
    let phase = if r > 0.0 { zeta / r } else { C64::new(1.0, 0.0) };
    let x = 1.0 / r.cosh();
    let half_t = 0.5 * r.tanh();
    let lf = ln_factorials(2 * rows.max(cols) + 2);
    for q in 0..=rows.max(cols) / 2 {
        let k = 2 * q;
        let below = if k < rows { cols.min(rows - k) } else { 0 };
        let above = if k > 0 && k < cols { rows.min(cols - k) } else { 0 };
        let len = below.max(above);
        if len == 0 {
            continue;
        }
        let qf = q as f64;
        let ln_h0 = if q == 0 { 0.5 * x.ln() } else { qf * half_t.ln() + 0.5 * lf[k] - lf[q] + 0.5 * x.ln() };
        let h = scaled_recurrence(ln_h0, len, |j, prev, cur| {
            let n = (j + 1) as f64;
            ((2.0 * n + 2.0 * qf - 1.0) * x * cur - ((n - 1.0) * (n + 2.0 * qf - 1.0)).sqrt() * prev)
                / (n * (n + 2.0 * qf)).sqrt()
        });
        let down = phase.powu(q as u32);
        let up = (-phase.conj()).powu(q as u32);
        for (n, &v) in h.iter().enumerate() {
            if n < below {
                s[(n + k, n)] = down * v;
            }
            if n < above {
                s[(n, n + k)] = up * v;
            }
        }
    }
    s
}

/// Coherent-state amplitudes `e^{−|α|²/2} αⁿ/√n!`.
pub fn coherent_amplitudes(alpha: C64, len: usize) -> CVector {
    displacement_block(alpha, len, 1).column(0).into_owned()
}

/// `S(ζ)|0⟩` amplitudes.
pub fn squeezed_vacuum_amplitudes(zeta: C64, len: usize) -> CVector {
    squeeze_block(zeta, len, 1).column(0).into_owned()
}

/// `diag(e^{iφn})`, the phase rotation `F(φ) = e^{iφ a†a}`.
pub fn rotation_phases(phi: f64, len: usize) -> Vec<C64> {
    (0..len).map(|n| C64::from_polar(1.0, phi * n as f64)).collect()
}
