//! Spatial-domain image operations: circular convolution and the
//! lowpass/highpass split.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::fft::Fft2Plan;
use crate::types::Image;

/// Periodic convolution of two equally sized images, evaluated via FFT.
pub fn circular_convolve(a: &Image, b: &Image) -> Result<Image> {
    if a.shape() != b.shape() {
        return Err(Error::invalid(format!(
            "convolution shape mismatch: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let (h, w) = a.shape();
    let plan = Fft2Plan::new(h, w)?;
    let mut fa = plan.forward_real(a.as_slice());
    let fb = plan.forward_real(b.as_slice());
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    Ok(Image::from_array_unchecked(
        Array2::from_shape_vec((h, w), plan.inverse_real(fa)).expect("shape"),
    ))
}

/// Mirror index into `0..n` using symmetric (edge-repeating) extension:
/// `-1 → 0`, `n → n-1`.
fn mirror(i: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * n;
    let mut k = i.rem_euclid(period);
    if k >= n {
        k = period - 1 - k;
    }
    k as usize
}

/// 3×3 box filter with symmetric boundary extension.
pub fn mean_filter_3x3(img: &Image) -> Image {
    let (h, w) = img.shape();
    let src = img.array();
    let out = Array2::from_shape_fn((h, w), |(i, j)| {
        let mut acc = 0.0;
        for di in -1..=1isize {
            let r = mirror(i as isize + di, h);
            for dj in -1..=1isize {
                acc += src[(r, mirror(j as isize + dj, w))];
            }
        }
        acc / 9.0
    });
    Image::from_array_unchecked(out)
}

/// Returns `(high, low)` with `low = mean_filter_3x3(img)` and `high = img - low`.
pub fn split_high_low(img: &Image) -> (Image, Image) {
    let low = mean_filter_3x3(img);
    let high = Image::from_array_unchecked(img.array() - low.array());
    (high, low)
}
