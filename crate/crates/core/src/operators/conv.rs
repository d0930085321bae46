use ndarray::{Array2, Array3};
use num_complex::Complex64;

use super::{pad_p, LinearMap};
use crate::error::{Error, Result};
use crate::fft::Fft2Plan;
use crate::types::{CoefficientMaps, FilterBank, Image};

/// The synthesis operator `D x = Σ_m d_m ⊛ x_m` for one filter bank at one
/// grid size. Filter spectra are computed once at construction; build a new
/// operator whenever the bank changes.
///
/// Flat layout: domain is the `(M, H, W)` maps row-major, range is `(H, W)`.
#[derive(Debug, Clone)]
pub struct ConvDictionary {
    plan: Fft2Plan,
    m_count: usize,
    filter_size: usize,
    spectra: Vec<Vec<Complex64>>,
}

impl ConvDictionary {
    pub fn new(bank: &FilterBank, shape: (usize, usize)) -> Result<Self> {
        let plan = Fft2Plan::new(shape.0, shape.1)?;
        let spectra = (0..bank.m_count())
            .map(|m| {
                let padded = pad_p(bank.filter(m), shape)?;
                Ok(plan.forward_real(padded.as_slice()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            plan,
            m_count: bank.m_count(),
            filter_size: bank.filter_size(),
            spectra,
        })
    }

    /// Builds the operator directly from padded H×W atoms (an `(M, H, W)` array).
    pub fn from_padded(atoms: &CoefficientMaps, filter_size: usize) -> Result<Self> {
        let (h, w) = atoms.map_shape();
        let plan = Fft2Plan::new(h, w)?;
        let spectra = (0..atoms.m_count())
            .map(|m| plan.forward_view(atoms.map(m)))
            .collect();
        Ok(Self {
            plan,
            m_count: atoms.m_count(),
            filter_size,
            spectra,
        })
    }

    pub fn m_count(&self) -> usize {
        self.m_count
    }

    pub fn filter_size(&self) -> usize {
        self.filter_size
    }

    pub fn shape(&self) -> (usize, usize) {
        self.plan.shape()
    }

    pub fn plan(&self) -> &Fft2Plan {
        &self.plan
    }

    fn check_maps(&self, x: &CoefficientMaps) -> Result<()> {
        if x.m_count() != self.m_count || x.map_shape() != self.shape() {
            return Err(Error::invalid(format!(
                "coefficient maps {}x{:?} do not match operator {}x{:?}",
                x.m_count(),
                x.map_shape(),
                self.m_count,
                self.shape()
            )));
        }
        Ok(())
    }

    fn check_image(&self, y: &Image) -> Result<()> {
        if y.shape() != self.shape() {
            return Err(Error::invalid(format!(
                "image {:?} does not match operator grid {:?}",
                y.shape(),
                self.shape()
            )));
        }
        Ok(())
    }

    fn forward_raw(&self, x: &[f64]) -> Vec<f64> {
        let n = self.plan.len();
        let mut acc = vec![Complex64::new(0.0, 0.0); n];
        for (chunk, spec) in x.chunks_exact(n).zip(&self.spectra) {
            let fx = self.plan.forward_real(chunk);
            for ((a, f), s) in acc.iter_mut().zip(&fx).zip(spec) {
                *a += f * s;
            }
        }
        self.plan.inverse_real(acc)
    }

    fn adjoint_raw(&self, y: &[f64]) -> Vec<f64> {
        let fy = self.plan.forward_real(y);
        let mut out = Vec::with_capacity(self.m_count * y.len());
        for spec in &self.spectra {
            let prod: Vec<Complex64> = fy.iter().zip(spec).map(|(a, s)| a * s.conj()).collect();
            out.extend(self.plan.inverse_real(prod));
        }
        out
    }

    pub fn apply(&self, x: &CoefficientMaps) -> Result<Image> {
        self.check_maps(x)?;
        let (h, w) = self.shape();
        let out = self.forward_raw(x.as_slice());
        Ok(Image::from_array_unchecked(
            Array2::from_shape_vec((h, w), out).expect("shape"),
        ))
    }

    /// `Dᵀ y`: correlation of `y` with each filter.
    pub fn apply_adjoint(&self, y: &Image) -> Result<CoefficientMaps> {
        self.check_image(y)?;
        let (h, w) = self.shape();
        let out = self.adjoint_raw(y.as_slice());
        Ok(CoefficientMaps::from_array_unchecked(
            Array3::from_shape_vec((self.m_count, h, w), out).expect("shape"),
        ))
    }
}

impl LinearMap for ConvDictionary {
    fn domain_len(&self) -> usize {
        self.m_count * self.plan.len()
    }
    fn range_len(&self) -> usize {
        self.plan.len()
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

/// `Σ_m d_m ⊛ x_m` with the filters zero-padded to the map size.
pub fn apply_d(bank: &FilterBank, x: &CoefficientMaps) -> Result<Image> {
    if x.m_count() != bank.m_count() {
        return Err(Error::invalid(format!(
            "bank has {} filters but {} coefficient maps were given",
            bank.m_count(),
            x.m_count()
        )));
    }
    ConvDictionary::new(bank, x.map_shape())?.apply(x)
}

/// Adjoint of [`apply_d`].
pub fn apply_dt(bank: &FilterBank, y: &Image) -> Result<CoefficientMaps> {
    ConvDictionary::new(bank, y.shape())?.apply_adjoint(y)
}
