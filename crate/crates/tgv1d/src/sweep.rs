use rayon::prelude::*;
use tgv1d_core::analysis::{sweep_cell, NumericSettings, RegimeMap, SweepMode};
use tgv1d_core::{RegParams, ShapeSpec};

/// Largest accepted number of map cells.
pub const MAX_CELLS: usize = 10_000;

/// Labels every `(α, β)` pair on a pool of `jobs` worker threads (`None`
/// means one per logical core). Cells are labelled independently, so the
/// result does not depend on the thread count.
pub fn sweep_parallel(
    shape: &ShapeSpec,
    alphas: &[f64],
    betas: &[f64],
    mode: SweepMode,
    settings: &NumericSettings,
    jobs: Option<usize>,
) -> anyhow::Result<RegimeMap> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.unwrap_or(0)).build()?;
    let cells: Vec<(usize, usize)> = (0..betas.len()).flat_map(|i| (0..alphas.len()).map(move |j| (i, j))).collect();
    let labels: Vec<&'static str> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(i, j)| sweep_cell(shape, RegParams::new(alphas[j], betas[i])?, mode, settings))
            .collect::<tgv1d_core::Result<_>>()
    })?;
    let rows = labels.chunks(alphas.len().max(1)).map(|r| r.iter().map(|l| l.to_string()).collect()).collect();
    Ok(RegimeMap::new(alphas.to_vec(), betas.to_vec(), rows, mode)?)
}
