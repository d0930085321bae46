//! Dense real grids: single images, stacked coefficient maps and filter banks.

use ndarray::{Array2, Array3, ArrayView2, ArrayViewMut2, Axis};

use crate::error::{Error, Result};

fn check_finite<'a>(mut values: impl Iterator<Item = &'a f64>, what: &str) -> Result<()> {
    if values.all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what} contains non-finite values")))
    }
}

/// A single-channel H×W image with finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    data: Array2<f64>,
}

impl Image {
    pub fn new(data: Array2<f64>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::invalid("image dimensions must be positive"));
        }
        check_finite(data.iter(), "image")?;
        Ok(Self {
            data: data.as_standard_layout().into_owned(),
        })
    }

    pub fn zeros(height: usize, width: usize) -> Result<Self> {
        Self::new(Array2::zeros((height, width)))
    }

    pub fn from_vec(height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        let data = Array2::from_shape_vec((height, width), values)
            .map_err(|e| Error::invalid(format!("image shape: {e}")))?;
        Self::new(data)
    }

    pub fn from_fn(height: usize, width: usize, f: impl FnMut((usize, usize)) -> f64) -> Result<Self> {
        Self::new(Array2::from_shape_fn((height, width), f))
    }

    /// Unit impulse at `(row, col)`.
    pub fn impulse(height: usize, width: usize, at: (usize, usize)) -> Result<Self> {
        let mut img = Self::zeros(height, width)?;
        if at.0 >= height || at.1 >= width {
            return Err(Error::invalid("impulse position outside the image"));
        }
        img.data[at] = 1.0;
        Ok(img)
    }

    /// Wraps an array that the caller guarantees is valid (non-empty, finite, standard layout).
    pub(crate) fn from_array_unchecked(data: Array2<f64>) -> Self {
        debug_assert!(!data.is_empty());
        Self { data }
    }

    pub fn height(&self) -> usize {
        self.data.nrows()
    }

    pub fn width(&self) -> usize {
        self.data.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.data.dim()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn array(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn array_mut(&mut self) -> &mut Array2<f64> {
        &mut self.data
    }

    pub fn into_array(self) -> Array2<f64> {
        self.data
    }

    /// Row-major pixel values.
    pub fn as_slice(&self) -> &[f64] {
        self.data.as_slice().expect("standard layout")
    }

    pub fn as_slice_mut(&mut self) -> &mut [f64] {
        self.data.as_slice_mut().expect("standard layout")
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn dot(&self, other: &Image) -> f64 {
        dot(self.as_slice(), other.as_slice())
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }
}

/// M coefficient maps, all sharing one H×W shape. Stored as an `(M, H, W)` array.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMaps {
    data: Array3<f64>,
}

impl CoefficientMaps {
    pub fn new(data: Array3<f64>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::invalid("coefficient maps need M, H, W > 0"));
        }
        check_finite(data.iter(), "coefficient maps")?;
        Ok(Self {
            data: data.as_standard_layout().into_owned(),
        })
    }

    pub fn zeros(m_count: usize, height: usize, width: usize) -> Result<Self> {
        Self::new(Array3::zeros((m_count, height, width)))
    }

    pub(crate) fn from_array_unchecked(data: Array3<f64>) -> Self {
        debug_assert!(!data.is_empty());
        Self { data }
    }

    pub fn m_count(&self) -> usize {
        self.data.len_of(Axis(0))
    }

    pub fn map_shape(&self) -> (usize, usize) {
        let (_, h, w) = self.data.dim();
        (h, w)
    }

    pub fn map(&self, m: usize) -> ArrayView2<'_, f64> {
        self.data.index_axis(Axis(0), m)
    }

    pub fn map_mut(&mut self, m: usize) -> ArrayViewMut2<'_, f64> {
        self.data.index_axis_mut(Axis(0), m)
    }

    pub fn array(&self) -> &Array3<f64> {
        &self.data
    }

    pub fn array_mut(&mut self) -> &mut Array3<f64> {
        &mut self.data
    }

    pub fn into_array(self) -> Array3<f64> {
        self.data
    }

    pub fn as_slice(&self) -> &[f64] {
        self.data.as_slice().expect("standard layout")
    }

    pub fn as_slice_mut(&mut self) -> &mut [f64] {
        self.data.as_slice_mut().expect("standard layout")
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn l1_norm(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).sum()
    }

    pub fn dot(&self, other: &CoefficientMaps) -> f64 {
        dot(self.as_slice(), other.as_slice())
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }
}

/// Tolerance on ‖d_m‖₂ − 1 for a bank to count as normalized.
pub const NORM_TOL: f64 = 1e-12;

/// M square r×r filters, stored as an `(M, r, r)` array.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    filters: Array3<f64>,
}

impl FilterBank {
    pub fn new(filters: Array3<f64>) -> Result<Self> {
        let (m, rh, rw) = filters.dim();
        if m == 0 || rh == 0 {
            return Err(Error::invalid("filter bank needs M > 0 and r > 0"));
        }
        if rh != rw {
            return Err(Error::invalid(format!("filters must be square, got {rh}x{rw}")));
        }
        check_finite(filters.iter(), "filter bank")?;
        Ok(Self {
            filters: filters.as_standard_layout().into_owned(),
        })
    }

    pub fn m_count(&self) -> usize {
        self.filters.len_of(Axis(0))
    }

    pub fn filter_size(&self) -> usize {
        self.filters.len_of(Axis(1))
    }

    pub fn filter(&self, m: usize) -> ArrayView2<'_, f64> {
        self.filters.index_axis(Axis(0), m)
    }

    pub fn filters(&self) -> &Array3<f64> {
        &self.filters
    }

    pub fn as_slice(&self) -> &[f64] {
        self.filters.as_slice().expect("standard layout")
    }

    pub fn atom_norms(&self) -> Vec<f64> {
        self.filters
            .outer_iter()
            .map(|f| f.iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect()
    }

    /// True when every filter has unit ℓ₂ norm within [`NORM_TOL`].
    pub fn is_normalized(&self) -> bool {
        self.atom_norms().iter().all(|n| (n - 1.0).abs() <= NORM_TOL)
    }

    /// Scales every filter to unit norm; all-zero filters become a unit impulse.
    pub fn normalized(&self) -> Self {
        let mut filters = self.filters.clone();
        for mut f in filters.outer_iter_mut() {
            let norm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < 1e-12 {
                f.fill(0.0);
                f[(0, 0)] = 1.0;
            } else {
                f.mapv_inplace(|v| v / norm);
            }
        }
        Self { filters }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
