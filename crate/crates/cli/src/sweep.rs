//! Parameter sweeps with an ordered parallel reduction.

use rayon::prelude::*;

use crate::error::{CliError, CliResult};
use crate::point::{Plan, Point, Record, SUMMARY_COLUMNS};
use crate::table::{Cell, Table};

/// Runs `f` over `items` on `threads` workers (all cores when `None`) and
/// returns results in input order; the first failure in input order wins.
pub fn ordered_map<T, R, F>(items: &[T], threads: Option<usize>, f: F) -> CliResult<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> CliResult<R> + Sync,
{
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::usage("--parallelism must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::usage(format!("thread pool: {e}")))?;
    let results: Vec<CliResult<R>> = pool.install(|| items.par_iter().map(&f).collect());
    results.into_iter().collect()
}

pub fn sweep(plan: &Plan, threads: Option<usize>) -> CliResult<Table> {
    let points: Vec<Point> = plan.points();
    let mut columns: Vec<&str> = plan.axes.iter().map(|(p, _)| p.name()).collect();
    columns.extend(SUMMARY_COLUMNS);
    if plan.has_ips() {
        columns.push("click_probability");
    }
    let mut table = Table::new("sweep", &columns);
    let records: Vec<Record> = ordered_map(&points, threads, |pt| plan.evaluate(pt))?;
    for rec in records {
        let mut row: Vec<Cell> = plan.axes.iter().map(|(p, _)| rec.point.values[p].into()).collect();
        row.extend(rec.summary_cells());
        if plan.has_ips() {
            row.push(rec.click.into());
        }
        table.push(row);
    }
    Ok(table)
}
