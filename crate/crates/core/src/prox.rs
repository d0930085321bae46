//! Closed-form proximal maps. All are elementwise except the unit-sphere
//! projection, which normalizes a whole atom.

use crate::error::{Error, Result};
use crate::types::Image;

/// Step sizes and penalty weights shared by the primal-dual updates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProxParams {
    pub sigma: f64,
    pub tau: f64,
    pub lambda: f64,
    pub beta1: f64,
    pub beta2: f64,
}

impl ProxParams {
    /// `τ = σ = scale / L`.
    pub fn from_lipschitz(l: f64, scale: f64, lambda: f64, beta1: f64, beta2: f64) -> Result<Self> {
        let params = Self {
            sigma: scale / l,
            tau: scale / l,
            lambda,
            beta1,
            beta2,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite() && self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::invalid(format!(
                "step sizes must be positive and finite (sigma={}, tau={})",
                self.sigma, self.tau
            )));
        }
        for (name, v) in [("lambda", self.lambda), ("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be nonnegative, got {v}")));
            }
        }
        Ok(())
    }
}

/// Prox of `σ·F*` for `F(y) = ½‖y − s‖²`: `(y − σ s) / (1 + σ)`.
pub fn prox_quadratic_conjugate(y: &[f64], s: &[f64], sigma: f64) -> Result<Vec<f64>> {
    if y.len() != s.len() {
        return Err(Error::invalid(format!(
            "prox argument length {} does not match data length {}",
            y.len(),
            s.len()
        )));
    }
    if !(sigma > 0.0) {
        return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
    }
    let denom = 1.0 + sigma;
    Ok(y.iter().zip(s).map(|(a, b)| (a - sigma * b) / denom).collect())
}

#[inline]
pub(crate) fn shrink(x: f64, t: f64) -> f64 {
    let mag = x.abs() - t;
    // NaN must propagate so divergence stays detectable
    if !(mag <= 0.0) {
        x.signum() * mag
    } else {
        0.0
    }
}

/// `sign(x)·max(|x| − t, 0)` elementwise.
pub fn soft_threshold(x: &[f64], t: f64) -> Result<Vec<f64>> {
    if !(t >= 0.0) {
        return Err(Error::invalid(format!("threshold must be nonnegative, got {t}")));
    }
    Ok(x.iter().map(|&v| shrink(v, t)).collect())
}

#[inline]
pub(crate) fn clamp(v: f64, beta: f64) -> f64 {
    // β·v / max(β, |v|), with 0/0 := 0
    if v.abs() <= beta {
        v
    } else {
        beta * v.signum()
    }
}

/// Projection onto the ℓ∞ ball of radius `beta`.
pub fn clamp_linf(v: &[f64], beta: f64) -> Result<Vec<f64>> {
    if !(beta >= 0.0) {
        return Err(Error::invalid(format!("ball radius must be nonnegative, got {beta}")));
    }
    Ok(v.iter().map(|&x| clamp(x, beta)).collect())
}

/// Atom norms below this are treated as zero by [`project_unit_padded`].
pub const DEGENERATE_ATOM_NORM: f64 = 1e-12;

/// Projects one padded H×W atom (row-major) in place onto the unit sphere of
/// its top-left r×r support. Returns `true` when the atom was degenerate and
/// got reset to the unit impulse at the origin.
pub(crate) fn project_unit_padded_in_place(atom: &mut [f64], width: usize, r: usize) -> bool {
    let mut norm_sq = 0.0;
    for (k, v) in atom.iter_mut().enumerate() {
        if k / width < r && k % width < r {
            norm_sq += *v * *v;
        } else {
            *v = 0.0;
        }
    }
    let norm = norm_sq.sqrt();
    if norm < DEGENERATE_ATOM_NORM {
        atom.fill(0.0);
        atom[0] = 1.0;
        return true;
    }
    atom.iter_mut().for_each(|v| *v /= norm);
    false
}

/// Output of [`project_unit_padded`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedAtom {
    pub atom: Image,
    /// Set when the support was (numerically) all zero and the atom was
    /// replaced by the unit impulse.
    pub reset: bool,
}

/// `P Pᵀ d / ‖P Pᵀ d‖₂`: restrict to the top-left r×r corner, then normalize.
pub fn project_unit_padded(d: &Image, r: usize) -> Result<ProjectedAtom> {
    let (h, w) = d.shape();
    if r == 0 || r > h || r > w {
        return Err(Error::invalid(format!("support {r}x{r} does not fit in {h}x{w}")));
    }
    let mut atom = d.clone();
    let reset = project_unit_padded_in_place(atom.as_slice_mut(), w, r);
    Ok(ProjectedAtom { atom, reset })
}
