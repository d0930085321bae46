use crate::error::{Error, Result};
use crate::operators::NormSettings;

/// Iteration budgets, penalty weights and spectral-norm settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Iteration budget (outer iterations for dictionary learning).
    pub iter_n: usize,
    /// Extrapolation weight; only `1.0` is accepted.
    pub theta: f64,
    pub lambda: f64,
    pub beta1: f64,
    pub beta2: f64,
    /// Early stop once `‖x_{n+1} − x_n‖ / max(‖x_n‖, 1e-12) < rel_tol`; 0 disables.
    pub rel_tol: f64,
    pub norm: NormSettings,
    /// Seed for random initialization (dictionary learning).
    pub seed: u64,
    /// Keep primal and dual variables between outer dictionary-learning iterations.
    pub warm_start: bool,
    pub inner_csc_iters: usize,
    pub inner_dict_iters: usize,
    /// Multiplies `τ = σ = 1/L`. Values above 1 void the convergence guarantee;
    /// used to exercise divergence handling.
    pub step_scale: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            iter_n: 500,
            theta: 1.0,
            lambda: 0.05,
            beta1: 0.0,
            beta2: 0.0,
            rel_tol: 0.0,
            norm: NormSettings::default(),
            seed: 0,
            warm_start: true,
            inner_csc_iters: 10,
            inner_dict_iters: 10,
            step_scale: 1.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iter_n == 0 {
            return Err(Error::invalid("iteration budget must be at least 1"));
        }
        if self.theta != 1.0 {
            return Err(Error::invalid(format!("theta must be 1, got {}", self.theta)));
        }
        for (name, v) in [
            ("lambda", self.lambda),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
            ("rel_tol", self.rel_tol),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be nonnegative and finite, got {v}")));
            }
        }
        if self.inner_csc_iters == 0 || self.inner_dict_iters == 0 {
            return Err(Error::invalid("inner iteration counts must be at least 1"));
        }
        if self.norm.max_iters == 0 {
            return Err(Error::invalid("norm_max_iters must be at least 1"));
        }
        if !(self.norm.tol >= 0.0) {
            return Err(Error::invalid("norm_tol must be nonnegative"));
        }
        if !(self.step_scale > 0.0 && self.step_scale.is_finite()) {
            return Err(Error::invalid("step_scale must be positive"));
        }
        Ok(())
    }
}
