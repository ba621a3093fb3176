//! Datasets behind the figures.

use std::f64::consts::PI;

use nongauss::catalog::{self, CatalogSpec, Family};
use nongauss::{channels, measure, non_gaussianity};

use crate::error::CliResult;
use crate::sweep::ordered_map;
use crate::table::{Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FigureId {
    F1Top,
    F1Bottom,
    F2,
    F3Left,
    F3Right,
    F4,
}

pub struct FigureOptions {
    pub seed: u64,
    pub samples: usize,
    pub threads: Option<usize>,
}

pub const F1_MAX_P: u64 = 250;
pub const MAX_COPIES: u32 = 20;
pub const STUDY_DIMS: [usize; 3] = [2, 10, 20];
pub const HISTOGRAM_BINS: usize = 25;
pub const LOSS_PHOTONS: [u64; 4] = [1, 10, 100, 1000];
/// Largest `p` also run through the numeric loss channel.
pub const LOSS_NUMERIC_MAX_P: u64 = 10;
pub const IPS_EFFICIENCIES: [f64; 4] = [0.2, 0.4, 0.6, 0.8];
pub const IPS_SQUEEZING: f64 = 0.5;
pub const CAT_AMPLITUDES: [f64; 2] = [0.5, 5.0];

/// `n` points uniformly on `[lo, hi]`.
fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn phi_grid(n: usize) -> Vec<f64> {
    linspace(-PI / 2.0, PI / 2.0, n)
}

pub fn figure(id: FigureId, opts: &FigureOptions) -> CliResult<Vec<Table>> {
    match id {
        FigureId::F1Top => Ok(vec![f1_top()]),
        FigureId::F1Bottom => f1_bottom(opts).map(|t| vec![t]),
        FigureId::F2 => f2(opts),
        FigureId::F3Left => f3_left(opts).map(|t| vec![t]),
        FigureId::F3Right => f3_right(opts).map(|t| vec![t]),
        FigureId::F4 => f4(opts).map(|t| vec![t]),
    }
}

fn f1_top() -> Table {
    let mut t = Table::new("f1-top", &["p", "delta_p", "delta_bar_p", "n_opt"]);
    for p in 1..=F1_MAX_P {
        let n = measure::optimal_copies(p, MAX_COPIES);
        t.push(vec![
            p.into(),
            measure::delta_fock_analytic(p).into(),
            measure::delta_fock_multimode(p, n).into(),
            Cell::Int(n as i64),
        ]);
    }
    t.notes.push(format!("closed form; copies searched over n = 1..{MAX_COPIES}"));
    t
}

fn delta_of(family: Family) -> CliResult<f64> {
    Ok(non_gaussianity(&CatalogSpec::new(family).build()?)?.delta)
}

fn f1_bottom(opts: &FigureOptions) -> CliResult<Table> {
    let mut t = Table::new("f1-bottom", &["phi", "delta_bell_phi", "delta_bell_psi", "delta_cat_0.5", "delta_cat_5"]);
    let rows = ordered_map(&phi_grid(41), opts.threads, |&phi| {
        Ok(vec![
            phi.into(),
            delta_of(Family::BellPhi { phi })?.into(),
            delta_of(Family::BellPsi { phi })?.into(),
            delta_of(Family::Cat { alpha: 0.5, phi })?.into(),
            delta_of(Family::Cat { alpha: 5.0, phi })?.into(),
        ])
    })?;
    rows.into_iter().for_each(|r| t.push(r));
    Ok(t)
}

fn f2(opts: &FigureOptions) -> CliResult<Vec<Table>> {
    let mut hist = Table::new("histogram", &["d", "bin_lo", "bin_hi", "count", "density"]);
    let mut summary = Table::new("summary", &["d", "samples", "mean", "variance", "above_half"]);
    let width = 0.5 / HISTOGRAM_BINS as f64;
    for d in STUDY_DIMS {
        let seeds = catalog::study_seeds(d, opts.samples, opts.seed);
        let deltas: Vec<(f64, bool)> = ordered_map(&seeds, opts.threads, |&s| {
            let r = non_gaussianity(&catalog::random_state(d, s)?)?;
            Ok((r.delta, r.above_half))
        })?;
        let mut counts = [0usize; HISTOGRAM_BINS];
        for &(x, _) in &deltas {
            counts[((x / width) as usize).min(HISTOGRAM_BINS - 1)] += 1;
        }
        for (k, &c) in counts.iter().enumerate() {
            let density = if deltas.is_empty() { 0.0 } else { c as f64 / (deltas.len() as f64 * width) };
            hist.push(vec![d.into(), (k as f64 * width).into(), ((k + 1) as f64 * width).into(), c.into(), density.into()]);
        }
        let n = deltas.len() as f64;
        let mean = deltas.iter().map(|x| x.0).sum::<f64>() / n;
        let var = deltas.iter().map(|x| (x.0 - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let above = deltas.iter().filter(|x| x.1).count();
        summary.push(vec![d.into(), deltas.len().into(), mean.into(), var.into(), above.into()]);
    }
    summary.notes.push(format!("seed {}; unbiased sample variance", opts.seed));
    hist.notes.push("values at or above 0.5 fall in the last bin".into());
    Ok(vec![hist, summary])
}

fn f3_left(opts: &FigureOptions) -> CliResult<Table> {
    let mut t = Table::new("f3-left", &["p", "one_minus_eta", "delta", "delta_channel", "method"]);
    let grid: Vec<(u64, f64)> =
        LOSS_PHOTONS.iter().flat_map(|&p| linspace(0.0, 1.0, 21).into_iter().map(move |x| (p, x))).collect();
    let rows = ordered_map(&grid, opts.threads, |&(p, loss)| {
        let eta = 1.0 - loss;
        let closed = measure::delta_loss_analytic(p, eta)?;
        let (numeric, method) = if p <= LOSS_NUMERIC_MAX_P {
            let rho = catalog::fock(p as usize, p as usize + 1)?;
            (Some(non_gaussianity(&channels::loss_apply(&rho, eta)?)?.delta), "closed-form+channel")
        } else {
            (None, "closed-form-only")
        };
        Ok(vec![p.into(), loss.into(), closed.into(), numeric.into(), method.into()])
    })?;
    rows.into_iter().for_each(|r| t.push(r));
    t.notes.push(format!("p > {LOSS_NUMERIC_MAX_P}: closed form only, no numeric channel"));
    Ok(t)
}

fn f3_right(opts: &FigureOptions) -> CliResult<Table> {
    let mut t = Table::new("f3-right", &["epsilon", "transmissivity", "delta", "click_probability"]);
    let grid: Vec<(f64, f64)> = IPS_EFFICIENCIES
        .iter()
        .flat_map(|&e| linspace(0.05, 0.95, 19).into_iter().map(move |tr| (e, tr)))
        .collect();
    let rows = ordered_map(&grid, opts.threads, |&(eps, tr)| {
        let (rho, prob) = channels::ips_state(IPS_SQUEEZING, tr, eps, None)?;
        Ok(vec![eps.into(), tr.into(), non_gaussianity(&rho)?.delta.into(), prob.into()])
    })?;
    rows.into_iter().for_each(|r| t.push(r));
    t.notes.push(format!("squeezed vacuum input, r = {IPS_SQUEEZING}"));
    Ok(t)
}

fn f4(opts: &FigureOptions) -> CliResult<Table> {
    let mut t = Table::new("f4", &["alpha", "phi", "delta", "delta_prime", "c_re", "c_im"]);
    let grid: Vec<(f64, f64)> =
        CAT_AMPLITUDES.iter().flat_map(|&a| phi_grid(21).into_iter().map(move |phi| (a, phi))).collect();
    let rows = ordered_map(&grid, opts.threads, |&(alpha, phi)| {
        let rho = CatalogSpec::new(Family::Cat { alpha, phi }).build()?;
        let d = non_gaussianity(&rho)?.delta;
        let dp = measure::delta_prime(&rho)?;
        Ok(vec![alpha.into(), phi.into(), d.into(), dp.delta.into(), dp.mean.re.into(), dp.mean.im.into()])
    })?;
    rows.into_iter().for_each(|r| t.push(r));
    t.notes.push("delta uses C = Tr[a rho]; delta_prime minimizes over C".into());
    Ok(t)
}
