//! Two-phase programs: an inner threshold solve with the budget pinned at
//! `α`, and an outer one-dimensional search over `α` of a ratio or welfare.
//!
//! Outer searches scan a dense grid first and refine with golden-section
//! between the neighbours of the best grid point. The grid scan is the
//! correctness path; results carry a `multimodal` flag when the scan shows
//! more than one local minimum.

mod clearing;
mod regulation;
mod storage;

pub use clearing::{clearing_optimal, compose_holding, ClearingProblem, ClearingResult, HoldingCost};
pub use regulation::{regulation_optimal, regulation_set, regulation_welfare, RegulationProblem, RegulationResult};
pub use storage::{storage_cost, storage_inner, storage_rate, StorageProblem, StorageResult};

use std::cell::RefCell;

use crate::error::{Error, Result};
use crate::exec;
use crate::numeric::{count_local_minima, golden_section};

/// Default number of outer grid points.
pub const OUTER_GRID: usize = 400;

pub(crate) struct OuterMin {
    pub arg: f64,
    pub value: f64,
    pub multimodal: bool,
    /// `(x, f(x))` at the grid points.
    pub grid: Vec<(f64, f64)>,
}

/// Minimizes `f` over `[lo, hi]`: grid of `points` values, then golden-section
/// between the neighbours of the best one.
pub(crate) fn outer_minimize<F>(f: F, lo: f64, hi: f64, points: usize, rel_tol: f64) -> Result<OuterMin>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let points = points.max(3);
    let grid: Vec<f64> = (0..points)
        .map(|k| if k == points - 1 { hi } else { (lo + (hi - lo) * k as f64 / (points - 1) as f64).min(hi) })
        .collect();
    let values = exec::map_heavy(points, |k| f(grid[k])).into_iter().collect::<Result<Vec<f64>>>()?;
    let best = values
        .iter()
        .enumerate()
        .fold(0, |b, (k, &v)| if v < values[b] { k } else { b });
    let a = grid[best.saturating_sub(1)];
    let b = grid[(best + 1).min(points - 1)];
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let (arg, value) = golden_section(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::INFINITY
            }
        },
        a,
        b,
        rel_tol,
        300,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let (arg, value) = if values[best] <= value { (grid[best], values[best]) } else { (arg, value) };
    let multimodal = count_local_minima(&values) > 1;
    Ok(OuterMin { arg, value, multimodal, grid: grid.into_iter().zip(values).collect() })
}
