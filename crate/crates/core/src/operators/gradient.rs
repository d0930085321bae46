use ndarray::Array3;

use super::LinearMap;
use crate::error::{Error, Result};
use crate::types::CoefficientMaps;

/// Difference direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// Along a row (column index increases).
    Horizontal,
    /// Along a column (row index increases).
    Vertical,
}

/// Periodic forward difference on a row-major `(maps, h, w)` buffer.
fn forward_diff(axis: Axis, x: &[f64], h: usize, w: usize) -> Vec<f64> {
    let n = h * w;
    let mut out = vec![0.0; x.len()];
    for (src, dst) in x.chunks_exact(n).zip(out.chunks_exact_mut(n)) {
        for i in 0..h {
            for j in 0..w {
                let next = match axis {
                    Axis::Horizontal => i * w + (j + 1) % w,
                    Axis::Vertical => ((i + 1) % h) * w + j,
                };
                dst[i * w + j] = src[next] - src[i * w + j];
            }
        }
    }
    out
}

/// Adjoint of [`forward_diff`]: negative periodic backward difference.
fn forward_diff_adjoint(axis: Axis, v: &[f64], h: usize, w: usize) -> Vec<f64> {
    let n = h * w;
    let mut out = vec![0.0; v.len()];
    for (src, dst) in v.chunks_exact(n).zip(out.chunks_exact_mut(n)) {
        for i in 0..h {
            for j in 0..w {
                let prev = match axis {
                    Axis::Horizontal => i * w + (j + w - 1) % w,
                    Axis::Vertical => ((i + h - 1) % h) * w + j,
                };
                dst[i * w + j] = src[prev] - src[i * w + j];
            }
        }
    }
    out
}

/// Blockwise forward difference applied to every coefficient map.
pub fn apply_grad(axis: Axis, x: &CoefficientMaps) -> CoefficientMaps {
    let (h, w) = x.map_shape();
    let out = forward_diff(axis, x.as_slice(), h, w);
    CoefficientMaps::from_array_unchecked(
        Array3::from_shape_vec((x.m_count(), h, w), out).expect("shape"),
    )
}

/// Exact adjoint of [`apply_grad`].
pub fn apply_grad_t(axis: Axis, v: &CoefficientMaps) -> CoefficientMaps {
    let (h, w) = v.map_shape();
    let out = forward_diff_adjoint(axis, v.as_slice(), h, w);
    CoefficientMaps::from_array_unchecked(
        Array3::from_shape_vec((v.m_count(), h, w), out).expect("shape"),
    )
}

/// [`apply_grad`] as a [`LinearMap`] over `(M, H, W)` maps.
#[derive(Debug, Clone, Copy)]
pub struct GradientOperator {
    pub axis: Axis,
    pub m_count: usize,
    pub shape: (usize, usize),
}

impl GradientOperator {
    pub fn new(axis: Axis, m_count: usize, shape: (usize, usize)) -> Result<Self> {
        if m_count == 0 || shape.0 == 0 || shape.1 == 0 {
            return Err(Error::invalid("gradient operator needs positive dimensions"));
        }
        Ok(Self { axis, m_count, shape })
    }

    pub(crate) fn forward_raw(&self, x: &[f64]) -> Vec<f64> {
        forward_diff(self.axis, x, self.shape.0, self.shape.1)
    }

    pub(crate) fn adjoint_raw(&self, v: &[f64]) -> Vec<f64> {
        forward_diff_adjoint(self.axis, v, self.shape.0, self.shape.1)
    }
}

impl LinearMap for GradientOperator {
    fn domain_len(&self) -> usize {
        self.m_count * self.shape.0 * self.shape.1
    }
    fn range_len(&self) -> usize {
        self.domain_len()
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_example() {
        let x = CoefficientMaps::new(Array3::from_shape_vec((1, 1, 4), vec![0.0, 1.0, 0.0, 0.0]).unwrap()).unwrap();
        let g = apply_grad(Axis::Horizontal, &x);
        assert_eq!(g.as_slice(), &[1.0, -1.0, 0.0, 0.0]);
        // a single row has no vertical variation
        let v = apply_grad(Axis::Vertical, &x);
        assert!(v.as_slice().iter().all(|t| *t == 0.0));
    }

    #[test]
    fn column_example() {
        let x = CoefficientMaps::new(Array3::from_shape_vec((1, 3, 1), vec![2.0, 5.0, 1.0]).unwrap()).unwrap();
        let g = apply_grad(Axis::Vertical, &x);
        assert_eq!(g.as_slice(), &[3.0, -4.0, 1.0]);
        let gt = apply_grad_t(Axis::Vertical, &x);
        assert_eq!(gt.as_slice(), &[1.0 - 2.0, 2.0 - 5.0, 5.0 - 1.0]);
    }

    #[test]
    fn constants_have_zero_gradient() {
        let x = CoefficientMaps::new(Array3::from_elem((2, 4, 3), 1.7)).unwrap();
        for axis in [Axis::Horizontal, Axis::Vertical] {
            assert!(apply_grad(axis, &x).as_slice().iter().all(|v| *v == 0.0));
            assert!(apply_grad_t(axis, &x).as_slice().iter().all(|v| *v == 0.0));
        }
    }
}
