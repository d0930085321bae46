//! Primal-dual iterations for sparse coding (plain and with anisotropic TV),
//! the dictionary update, and their alternation for dictionary learning.

mod cdl;
mod config;
mod csc;
mod dict;
mod objective;
mod trace;

pub use cdl::{cdl_cp, cdl_objective, CdlResult};
pub use config::SolverConfig;
pub use csc::{csc_atv_cp, csc_cp, CscSolver, CscState, CscVariant, MetricFn};
pub use dict::{dict_update_cp, pad_bank, random_bank, truncate_atoms, DictSolver, DictState};
pub use objective::{objective_atv, objective_csc, Objective};
pub use trace::{IterationRecord, IterationTrace, TraceEvent};

use std::time::Instant;

use crate::error::{Error, Result};
use crate::operators::{spectral_norm, LinearMap};

/// Seconds elapsed since `start`, on the monotonic clock.
pub(crate) fn elapsed(start: Instant) -> f64 {
    start.elapsed().as_secs_f64()
}

pub(crate) fn lipschitz(op: &dyn LinearMap, cfg: &SolverConfig) -> Result<f64> {
    Ok(spectral_norm(op, &cfg.norm)?.lipschitz)
}

pub(crate) fn ensure_finite(values: &[f64], iteration: usize) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Divergence { iteration })
    }
}

pub(crate) fn l2_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
