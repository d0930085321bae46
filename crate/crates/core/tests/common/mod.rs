#![allow(dead_code)]

use cpcsc::{CoefficientMaps, FilterBank, Image};
use cpcsc_oracles::Grid;
use ndarray::{Array2, Array3};

pub fn image(g: &Grid) -> Image {
    Image::from_vec(g.h, g.w, g.v.clone()).unwrap()
}

pub fn grid(img: &Image) -> Grid {
    Grid::new(img.height(), img.width(), img.as_slice().to_vec())
}

pub fn bank(filters: &[Grid]) -> FilterBank {
    let r = filters[0].h;
    let flat: Vec<f64> = filters.iter().flat_map(|f| f.v.iter().copied()).collect();
    FilterBank::new(Array3::from_shape_vec((filters.len(), r, r), flat).unwrap()).unwrap()
}

pub fn maps(grids: &[Grid]) -> CoefficientMaps {
    let (h, w) = (grids[0].h, grids[0].w);
    let flat: Vec<f64> = grids.iter().flat_map(|g| g.v.iter().copied()).collect();
    CoefficientMaps::new(Array3::from_shape_vec((grids.len(), h, w), flat).unwrap()).unwrap()
}

pub fn grids(x: &CoefficientMaps) -> Vec<Grid> {
    let (h, w) = x.map_shape();
    (0..x.m_count())
        .map(|m| Grid::new(h, w, x.map(m).iter().copied().collect()))
        .collect()
}

pub fn padded(filters: &[Grid], h: usize, w: usize) -> Vec<Grid> {
    filters
        .iter()
        .map(|f| {
            let mut a = Array2::zeros((h, w));
            for i in 0..f.h {
                for j in 0..f.w {
                    a[(i, j)] = f.at(i, j);
                }
            }
            Grid::new(h, w, a.into_raw_vec_and_offset().0)
        })
        .collect()
}
