//! Linear operators used by the primal-dual solvers and the power-iteration
//! estimate of their spectral norm.

mod conv;
mod dictionary;
mod gradient;
mod padding;
mod stacked;

pub use conv::{apply_d, apply_dt, ConvDictionary};
pub use dictionary::{apply_x, apply_xt, CodeOperator};
pub use gradient::{apply_grad, apply_grad_t, Axis, GradientOperator};
pub use padding::{pad_p, truncate_pt};
pub use stacked::AtvOperator;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::rng;

/// A real linear map between flat vector spaces, with its adjoint.
///
/// Vectors are the row-major flattening of the operator's structured
/// inputs and outputs (see each implementor for its layout).
pub trait LinearMap {
    fn domain_len(&self) -> usize;
    fn range_len(&self) -> usize;
    fn forward_flat(&self, x: &[f64]) -> Vec<f64>;
    fn adjoint_flat(&self, y: &[f64]) -> Vec<f64>;
}

/// Dense matrix of `op`, built column by column from unit vectors.
/// Only sensible for small instances.
pub fn materialize(op: &dyn LinearMap) -> Array2<f64> {
    let (n, m) = (op.domain_len(), op.range_len());
    let mut out = Array2::zeros((m, n));
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = op.forward_flat(&e);
        for (i, v) in col.into_iter().enumerate() {
            out[(i, j)] = v;
        }
        e[j] = 0.0;
    }
    out
}

/// Power-iteration settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormSettings {
    /// Stop once the relative change of the estimate falls below this.
    pub tol: f64,
    pub max_iters: usize,
    pub seed: u64,
    /// Factor applied to the converged estimate to obtain `L`.
    pub inflation: f64,
}

impl Default for NormSettings {
    fn default() -> Self {
        Self {
            tol: 1e-4,
            max_iters: 200,
            seed: 0x5eed,
            inflation: 1.05,
        }
    }
}

/// Result of [`spectral_norm`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEstimate {
    /// Power-iteration estimate of ‖K‖₂ (approaches it from below).
    pub estimate: f64,
    /// `estimate · inflation`, the value used as `L`.
    pub lipschitz: f64,
    pub iterations: usize,
}

const MAX_RETRIES: usize = 3;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Estimates ‖K‖₂ by power iteration on KᵀK from a seeded Gaussian start.
///
/// For unit `v`, `sqrt(‖KᵀK v‖)` never exceeds ‖K‖₂; the loop stops when
/// successive estimates differ by less than `tol` relatively.
pub fn spectral_norm(op: &dyn LinearMap, settings: &NormSettings) -> Result<NormEstimate> {
    if settings.max_iters == 0 {
        return Err(Error::invalid("spectral norm needs max_iters >= 1"));
    }
    if !(settings.tol >= 0.0) {
        return Err(Error::invalid("spectral norm tolerance must be nonnegative"));
    }
    let n = op.domain_len();
    for attempt in 0..=MAX_RETRIES {
        let mut stream = rng::seeded(settings.seed.wrapping_add(attempt as u64));
        let mut v = rng::standard_normal_vec(&mut stream, n);
        let nv = norm(&v);
        if nv == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= nv);

        let mut estimate = 0.0;
        let mut iterations = 0;
        let mut degenerate = false;
        for it in 1..=settings.max_iters {
            let w = op.adjoint_flat(&op.forward_flat(&v));
            let nw = norm(&w);
            if !nw.is_finite() {
                return Err(Error::Divergence { iteration: 0 }.context("spectral norm"));
            }
            if nw == 0.0 {
                degenerate = true;
                break;
            }
            let next = nw.sqrt();
            iterations = it;
            let converged = it > 1 && (next - estimate).abs() <= settings.tol * next;
            estimate = next;
            v = w.into_iter().map(|x| x / nw).collect();
            if converged {
                break;
            }
        }
        if degenerate {
            continue;
        }
        return Ok(NormEstimate {
            estimate,
            lipschitz: estimate * settings.inflation,
            iterations,
        });
    }
    Err(Error::DegenerateOperator { retries: MAX_RETRIES })
}
