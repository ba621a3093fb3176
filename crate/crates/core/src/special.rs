//! Special functions used by the closed-form results.

/// `ln n!` for `n = 0..len`.
pub fn ln_factorials(len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len.max(1));
    out.push(0.0);
    for n in 1..len {
        out.push(out[n - 1] + (n as f64).ln());
    }
    out.truncate(len.max(1));
    out
}

/// `ln C(n, k)` by summing logs; exact enough for n in the thousands.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    (1..=k).map(|j| ((n - k + j) as f64 / j as f64).ln()).sum()
}

pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for j in 1..=k {
        acc = acc * (n - k + j) as f64 / j as f64;
    }
    acc.round()
}

/// Laguerre polynomial `L_n(x)` by the three-term recurrence.
pub fn laguerre(n: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - x) * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `₂F₁(-n, b; c; x)` as its terminating sum (n+1 terms).
pub fn hyp2f1_terminating(n: u32, b: f64, c: f64, x: f64) -> f64 {
    let a = -(n as f64);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..n {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * x;
        sum += term;
    }
    sum
}

/// `Σ_k C(p,k)² η^{2k} (1-η)^{2(p-k)}`, i.e. `(1-η)^{2p} ₂F₁(-p,-p;1;η²/(1-η)²)`
/// with the prefactor folded into each term so it stays finite at η = 1 and
/// for large p.
pub fn scaled_hyp2f1_loss(p: u64, eta: f64) -> f64 {
    if p == 0 {
        return 1.0;
    }
    if eta <= 0.0 {
        return 1.0;
    }
    if eta >= 1.0 {
        return 1.0;
    }
    let (le, lq) = (eta.ln(), (1.0 - eta).ln());
    (0..=p)
        .map(|k| {
            let lt = 2.0 * ln_binomial(p, k) + 2.0 * k as f64 * le + 2.0 * (p - k) as f64 * lq;
            lt.exp()
        })
        .sum()
}
