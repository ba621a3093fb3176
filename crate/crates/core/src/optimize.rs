//! Derivative-free Nelder–Mead simplex minimization.

#[derive(Debug, Clone)]
pub struct NelderMead {
    /// Initial simplex edge along each coordinate.
    pub step: f64,
    /// Stop once every vertex lies within this distance of the best one.
    pub tol: f64,
    pub max_evals: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        NelderMead { step: 0.1, tol: 1e-8, max_evals: 500 }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl NelderMead {
    pub fn minimize<F, E>(&self, x0: &[f64], mut f: F) -> Result<Minimum, E>
    where
        F: FnMut(&[f64]) -> Result<f64, E>,
    {
        let n = x0.len();
        let mut evals = 0usize;
        let mut eval = |x: &[f64], evals: &mut usize| -> Result<f64, E> {
            *evals += 1;
            f(x)
        };
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        let v0 = eval(x0, &mut evals)?;
        simplex.push((x0.to_vec(), v0));
        for i in 0..n {
            let mut x = x0.to_vec();
            x[i] += self.step;
            let v = eval(&x, &mut evals)?;
            simplex.push((x, v));
        }
        let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> { a.iter().zip(b).map(|(p, q)| p + t * (q - p)).collect() };
        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let best = simplex[0].0.clone();
            let diameter = simplex[1..]
                .iter()
                .map(|(x, _)| x.iter().zip(&best).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt())
                .fold(0.0, f64::max);
            if diameter < self.tol {
                return Ok(Minimum { x: best, value: simplex[0].1, evaluations: evals, converged: true });
            }
            if evals >= self.max_evals {
                return Ok(Minimum { x: best, value: simplex[0].1, evaluations: evals, converged: false });
            }
            let worst = simplex[n].clone();
            let centroid: Vec<f64> =
                (0..n).map(|i| simplex[..n].iter().map(|(x, _)| x[i]).sum::<f64>() / n as f64).collect();
            let reflected = lerp(&centroid, &worst.0, -1.0);
            let fr = eval(&reflected, &mut evals)?;
            if fr < simplex[0].1 {
                let expanded = lerp(&centroid, &worst.0, -2.0);
                let fe = eval(&expanded, &mut evals)?;
                simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
                continue;
            }
            if fr < simplex[n - 1].1 {
                simplex[n] = (reflected, fr);
                continue;
            }
            let (contracted, fc) = if fr < worst.1 {
                let c = lerp(&centroid, &reflected, 0.5);
                let v = eval(&c, &mut evals)?;
                (c, v)
            } else {
                let c = lerp(&centroid, &worst.0, 0.5);
                let v = eval(&c, &mut evals)?;
                (c, v)
            };
            if fc < worst.1.min(fr) {
                simplex[n] = (contracted, fc);
                continue;
            }
            for i in 1..=n {
                let x = lerp(&best, &simplex[i].0, 0.5);
                let v = eval(&x, &mut evals)?;
                simplex[i] = (x, v);
            }
        }
    }
}
