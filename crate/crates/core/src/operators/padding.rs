use ndarray::{s, Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::types::Image;

/// Zero-pads an r×r filter into the top-left corner of an H×W grid.
pub fn pad_p(filter: ArrayView2<'_, f64>, shape: (usize, usize)) -> Result<Image> {
    let (rh, rw) = filter.dim();
    let (h, w) = shape;
    if rh > h || rw > w {
        return Err(Error::invalid(format!(
            "filter {rh}x{rw} does not fit in a {h}x{w} grid"
        )));
    }
    let mut out = Array2::zeros(shape);
    out.slice_mut(s![..rh, ..rw]).assign(&filter);
    Image::new(out)
}

/// Extracts the top-left r×r corner of `img`.
pub fn truncate_pt(img: &Image, r: usize) -> Result<Array2<f64>> {
    let (h, w) = img.shape();
    if r == 0 || r > h || r > w {
        return Err(Error::invalid(format!("cannot truncate a {h}x{w} grid to {r}x{r}")));
    }
    Ok(img.array().slice(s![..r, ..r]).to_owned())
}
