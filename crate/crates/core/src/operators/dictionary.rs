use ndarray::{Array2, Array3};
use num_complex::Complex64;

use super::LinearMap;
use crate::error::{Error, Result};
use crate::fft::Fft2Plan;
use crate::types::{CoefficientMaps, Image};

/// The dictionary-update operator `X`: for fixed codes `x_{v,m}`, maps padded
/// atoms `d` to the per-image reconstructions `Σ_m x_{v,m} ⊛ d_m`.
///
/// Flat layout: domain is the padded atoms `(M, H, W)`, range is the images
/// `(V, H, W)`, both row-major.
#[derive(Debug, Clone)]
pub struct CodeOperator {
    plan: Fft2Plan,
    m_count: usize,
    /// `spectra[v][m]`
    spectra: Vec<Vec<Vec<Complex64>>>,
}

impl CodeOperator {
    pub fn new(codes: &[CoefficientMaps]) -> Result<Self> {
        let first = codes
            .first()
            .ok_or_else(|| Error::invalid("dictionary update needs at least one code set"))?;
        let (m_count, shape) = (first.m_count(), first.map_shape());
        if let Some(bad) = codes
            .iter()
            .position(|c| c.m_count() != m_count || c.map_shape() != shape)
        {
            return Err(Error::invalid(format!(
                "code set {bad} does not share M={m_count} and shape {shape:?}"
            )));
        }
        let plan = Fft2Plan::new(shape.0, shape.1)?;
        let spectra = codes
            .iter()
            .map(|c| (0..m_count).map(|m| plan.forward_view(c.map(m))).collect())
            .collect();
        Ok(Self { plan, m_count, spectra })
    }

    pub fn image_count(&self) -> usize {
        self.spectra.len()
    }

    pub fn m_count(&self) -> usize {
        self.m_count
    }

    pub fn shape(&self) -> (usize, usize) {
        self.plan.shape()
    }

    fn forward_raw(&self, d: &[f64]) -> Vec<f64> {
        let n = self.plan.len();
        let fd: Vec<Vec<Complex64>> = d.chunks_exact(n).map(|c| self.plan.forward_real(c)).collect();
        let mut out = Vec::with_capacity(self.image_count() * n);
        for per_image in &self.spectra {
            let mut acc = vec![Complex64::new(0.0, 0.0); n];
            for (xs, ds) in per_image.iter().zip(&fd) {
                for ((a, x), s) in acc.iter_mut().zip(xs).zip(ds) {
                    *a += x * s;
                }
            }
            out.extend(self.plan.inverse_real(acc));
        }
        out
    }

    fn adjoint_raw(&self, y: &[f64]) -> Vec<f64> {
        let n = self.plan.len();
        let fy: Vec<Vec<Complex64>> = y.chunks_exact(n).map(|c| self.plan.forward_real(c)).collect();
        let mut out = Vec::with_capacity(self.m_count * n);
        for m in 0..self.m_count {
            let mut acc = vec![Complex64::new(0.0, 0.0); n];
            for (per_image, ys) in self.spectra.iter().zip(&fy) {
                for ((a, x), s) in acc.iter_mut().zip(&per_image[m]).zip(ys) {
                    *a += x.conj() * s;
                }
            }
            out.extend(self.plan.inverse_real(acc));
        }
        out
    }

    /// `X d`, one image per code set.
    pub fn apply(&self, atoms: &CoefficientMaps) -> Result<Vec<Image>> {
        if atoms.m_count() != self.m_count || atoms.map_shape() != self.shape() {
            return Err(Error::invalid(format!(
                "atoms {}x{:?} do not match codes {}x{:?}",
                atoms.m_count(),
                atoms.map_shape(),
                self.m_count,
                self.shape()
            )));
        }
        let (h, w) = self.shape();
        let flat = self.forward_raw(atoms.as_slice());
        Ok(flat
            .chunks_exact(h * w)
            .map(|c| Image::from_array_unchecked(Array2::from_shape_vec((h, w), c.to_vec()).expect("shape")))
            .collect())
    }

    /// `Xᵀ y`: per atom, `Σ_v` correlation of `x_{v,m}` with `y_v`.
    pub fn apply_adjoint(&self, residuals: &[Image]) -> Result<CoefficientMaps> {
        if residuals.len() != self.image_count() {
            return Err(Error::invalid(format!(
                "expected {} residual images, got {}",
                self.image_count(),
                residuals.len()
            )));
        }
        if let Some(bad) = residuals.iter().position(|r| r.shape() != self.shape()) {
            return Err(Error::invalid(format!("residual {bad} has the wrong shape")));
        }
        let flat: Vec<f64> = residuals.iter().flat_map(|r| r.as_slice().iter().copied()).collect();
        let (h, w) = self.shape();
        Ok(CoefficientMaps::from_array_unchecked(
            Array3::from_shape_vec((self.m_count, h, w), self.adjoint_raw(&flat)).expect("shape"),
        ))
    }
}

impl LinearMap for CodeOperator {
    fn domain_len(&self) -> usize {
        self.m_count * self.plan.len()
    }
    fn range_len(&self) -> usize {
        self.image_count() * self.plan.len()
    }
    fn forward_flat(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.domain_len());
        self.forward_raw(x)
    }
    fn adjoint_flat(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.range_len());
        self.adjoint_raw(y)
    }
}

/// `X d` for a batch of code sets and padded atoms.
pub fn apply_x(batch: &[CoefficientMaps], atoms: &CoefficientMaps) -> Result<Vec<Image>> {
    CodeOperator::new(batch)?.apply(atoms)
}

/// `Xᵀ y` for a batch of code sets and residual images.
pub fn apply_xt(batch: &[CoefficientMaps], residuals: &[Image]) -> Result<CoefficientMaps> {
    CodeOperator::new(batch)?.apply_adjoint(residuals)
}
