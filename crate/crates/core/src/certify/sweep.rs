//! Independent guessing problems over a grid of observed values.

use rayon::prelude::*;

use super::guessing::{CertifyOptions, GuessingCertificate, GuessingSetup};
use super::CertifyError;

#[derive(Debug)]
pub struct SweepPoint {
    pub beta_obs: f64,
    pub result: Result<GuessingCertificate, CertifyError>,
}

/// `steps` evenly spaced values from `start` to `end` inclusive; a single
/// step yields `[start]`.
pub fn linspace(start: f64, end: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let h = (end - start) / (steps - 1) as f64;
            (0..steps)
                .map(|k| if k == steps - 1 { end } else { start + h * k as f64 })
                .collect()
        }
    }
}

/// Certifies every grid point on a pool of `threads` workers. Output order
/// follows the grid; a failing point does not stop the others.
pub fn sweep(
    setup: &GuessingSetup,
    grid: &[f64],
    x_star: usize,
    opts: &CertifyOptions,
    threads: usize,
) -> Result<Vec<SweepPoint>, CertifyError> {
    if let Some(index) = grid.windows(2).position(|w| !(w[0] <= w[1])) {
        return Err(CertifyError::UnsortedGrid { index: index + 1 });
    }
    setup.functional().scenario().check_input(x_star)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| CertifyError::InvalidOption(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        grid.par_iter()
            .map(|&beta_obs| SweepPoint {
                beta_obs,
                result: setup.certify(beta_obs, x_star, opts),
            })
            .collect()
    }))
}
