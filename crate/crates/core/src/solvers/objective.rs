use crate::error::{Error, Result};
use crate::operators::{apply_d, apply_grad, Axis};
use crate::types::{CoefficientMaps, FilterBank, Image};

/// Objective value split into its weighted terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Objective {
    pub total: f64,
    /// `½‖Dx − s‖²`
    pub data_term: f64,
    /// `λ‖x‖₁`
    pub l1_term: f64,
    /// `β₁‖Φ₀x‖₁`
    pub tv_h_term: f64,
    /// `β₂‖Φ₁x‖₁`
    pub tv_v_term: f64,
}

impl Objective {
    pub(crate) fn new(data_term: f64, l1_term: f64, tv_h_term: f64, tv_v_term: f64) -> Self {
        Self {
            total: data_term + l1_term + tv_h_term + tv_v_term,
            data_term,
            l1_term,
            tv_h_term,
            tv_v_term,
        }
    }
}

pub(crate) fn half_residual_sq(dx: &[f64], s: &[f64]) -> f64 {
    0.5 * dx.iter().zip(s).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
}

fn check_image(s: &Image, x: &CoefficientMaps) -> Result<()> {
    if s.shape() != x.map_shape() {
        return Err(Error::invalid(format!(
            "image {:?} does not match coefficient maps {:?}",
            s.shape(),
            x.map_shape()
        )));
    }
    Ok(())
}

/// `½‖Dx − s‖² + λ‖x‖₁`.
pub fn objective_csc(bank: &FilterBank, x: &CoefficientMaps, s: &Image, lambda: f64) -> Result<Objective> {
    check_image(s, x)?;
    let dx = apply_d(bank, x)?;
    Ok(Objective::new(
        half_residual_sq(dx.as_slice(), s.as_slice()),
        lambda * x.l1_norm(),
        0.0,
        0.0,
    ))
}

/// `½‖Dx − s‖² + λ‖x‖₁ + β₁‖Φ₀x‖₁ + β₂‖Φ₁x‖₁`.
pub fn objective_atv(
    bank: &FilterBank,
    x: &CoefficientMaps,
    s: &Image,
    lambda: f64,
    beta1: f64,
    beta2: f64,
) -> Result<Objective> {
    let base = objective_csc(bank, x, s, lambda)?;
    let h = beta1 * apply_grad(Axis::Horizontal, x).l1_norm();
    let v = beta2 * apply_grad(Axis::Vertical, x).l1_norm();
    Ok(Objective::new(base.data_term, base.l1_term, h, v))
}
