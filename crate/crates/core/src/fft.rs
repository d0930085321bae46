//! 2-D discrete Fourier transforms.
//!
//! Convention: unnormalized forward transform, `1/N` on the inverse, so that
//! `fft2(a ⊛ b) = fft2(a) ⊙ fft2(b)` with no extra scale factors.

use std::sync::Arc;

use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::types::Image;

/// Complex H×W spectrum of a real grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    data: Array2<Complex64>,
}

impl Spectrum {
    pub fn new(data: Array2<Complex64>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::invalid("spectrum dimensions must be positive"));
        }
        Ok(Self {
            data: data.as_standard_layout().into_owned(),
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        self.data.dim()
    }

    pub fn array(&self) -> &Array2<Complex64> {
        &self.data
    }

    pub fn as_slice(&self) -> &[Complex64] {
        self.data.as_slice().expect("standard layout")
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data.into_raw_vec_and_offset().0
    }
}

/// Precomputed row/column FFT plans for one grid shape. Immutable once built,
/// so a plan can be shared between threads.
#[derive(Clone)]
pub struct Fft2Plan {
    height: usize,
    width: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2Plan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2Plan")
            .field("height", &self.height)
            .field("width", &self.width)
            .finish()
    }
}

impl Fft2Plan {
    pub fn new(height: usize, width: usize) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::invalid("FFT dimensions must be positive"));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            height,
            width,
            row_fwd: planner.plan_fft_forward(width),
            row_inv: planner.plan_fft_inverse(width),
            col_fwd: planner.plan_fft_forward(height),
            col_inv: planner.plan_fft_inverse(height),
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn len(&self) -> usize {
        self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn transform(&self, buf: &mut [Complex64], rows: &dyn Fft<f64>, cols: &dyn Fft<f64>) {
        let (h, w) = (self.height, self.width);
        debug_assert_eq!(buf.len(), h * w);
        // rustfft processes every contiguous chunk of its length
        rows.process(buf);
        if h > 1 {
            let mut t = transpose(buf, h, w);
            cols.process(&mut t);
            buf.copy_from_slice(&transpose(&t, w, h));
        }
    }

    /// In-place forward transform of a row-major buffer.
    pub fn forward_in_place(&self, buf: &mut [Complex64]) {
        self.transform(buf, self.row_fwd.as_ref(), self.col_fwd.as_ref());
    }

    /// In-place inverse transform (including the `1/N` factor).
    pub fn inverse_in_place(&self, buf: &mut [Complex64]) {
        self.transform(buf, self.row_inv.as_ref(), self.col_inv.as_ref());
        let scale = 1.0 / (self.len() as f64);
        for v in buf.iter_mut() {
            *v *= scale;
        }
    }

    /// Forward transform of a real row-major buffer.
    pub fn forward_real(&self, values: &[f64]) -> Vec<Complex64> {
        assert_eq!(values.len(), self.len(), "FFT input length");
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward_in_place(&mut buf);
        buf
    }

    /// Inverse transform keeping only the real part.
    pub fn inverse_real(&self, mut buf: Vec<Complex64>) -> Vec<f64> {
        assert_eq!(buf.len(), self.len(), "FFT input length");
        self.inverse_in_place(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    pub fn forward_view(&self, grid: ArrayView2<'_, f64>) -> Vec<Complex64> {
        assert_eq!(grid.dim(), (self.height, self.width), "FFT input shape");
        let mut buf: Vec<Complex64> = grid.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward_in_place(&mut buf);
        buf
    }
}

fn transpose(src: &[Complex64], rows: usize, cols: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); src.len()];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = src[r * cols + c];
        }
    }
    out
}

/// Forward 2-D DFT of an image.
pub fn fft2(img: &Image) -> Result<Spectrum> {
    let (h, w) = img.shape();
    let plan = Fft2Plan::new(h, w)?;
    let buf = plan.forward_real(img.as_slice());
    Spectrum::new(Array2::from_shape_vec((h, w), buf).expect("shape"))
}

/// Inverse 2-D DFT, returning the real part. The input must be the spectrum
/// of a real signal up to rounding; a clearly complex result is rejected.
pub fn ifft2(spec: &Spectrum) -> Result<Image> {
    let (h, w) = spec.shape();
    let plan = Fft2Plan::new(h, w)?;
    let mut buf = spec.as_slice().to_vec();
    plan.inverse_in_place(&mut buf);
    let scale = buf.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
    let max_im = buf.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    if max_im > 1e-9 * scale {
        return Err(Error::invalid(format!(
            "spectrum is not conjugate-symmetric (imaginary residue {max_im:e})"
        )));
    }
    Image::from_vec(h, w, buf.into_iter().map(|c| c.re).collect())
}
