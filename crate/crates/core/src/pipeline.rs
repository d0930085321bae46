//! Image-quality metrics, noise synthesis and the highpass-split denoising
//! workflow.

use std::str::FromStr;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::operators::ConvDictionary;
use crate::rng;
use crate::signal::split_high_low;
use crate::solvers::{CscSolver, CscVariant, IterationTrace, SolverConfig};
use crate::types::{CoefficientMaps, FilterBank, Image};

/// PSNR / SSIM of one image against a reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    /// Decibels at peak 1.0; `+inf` for identical images.
    pub psnr_db: f64,
    pub ssim: f64,
}

/// Adds seeded i.i.d. `N(0, std²)` noise. Values are not clipped.
pub fn add_gaussian_noise(img: &Image, std: f64, seed: u64) -> Result<Image> {
    if !(std >= 0.0 && std.is_finite()) {
        return Err(Error::invalid(format!("noise std must be nonnegative, got {std}")));
    }
    let mut stream = rng::seeded(seed);
    let noise = rng::standard_normal_vec(&mut stream, img.len());
    let (h, w) = img.shape();
    let values = img.as_slice().iter().zip(noise).map(|(v, n)| v + std * n).collect();
    Image::from_vec(h, w, values)
}

fn check_same_shape(a: &Image, b: &Image) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::invalid(format!("image shapes differ: {:?} vs {:?}", a.shape(), b.shape())));
    }
    Ok(())
}

pub fn mse(a: &Image, b: &Image) -> Result<f64> {
    check_same_shape(a, b)?;
    let sum: f64 = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(sum / a.len() as f64)
}

/// `10·log10(peak² / MSE)`, `+inf` when the images are identical.
pub fn psnr(a: &Image, b: &Image, peak: f64) -> Result<f64> {
    if !(peak > 0.0) {
        return Err(Error::invalid(format!("peak must be positive, got {peak}")));
    }
    let err = mse(a, b)?;
    if err == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (peak * peak / err).log10())
}

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

/// Normalized 1-D Gaussian taps of the SSIM window.
pub fn ssim_taps() -> [f64; SSIM_WINDOW] {
    let c = (SSIM_WINDOW / 2) as f64;
    let mut taps = [0.0; SSIM_WINDOW];
    for (i, t) in taps.iter_mut().enumerate() {
        let d = i as f64 - c;
        *t = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    taps
}

/// Separable Gaussian filtering, valid region only.
fn gaussian_valid(src: &Array2<f64>, taps: &[f64]) -> Array2<f64> {
    let (h, w) = src.dim();
    let k = taps.len();
    let rows: Array2<f64> = Array2::from_shape_fn((h, w - k + 1), |(i, j)| (0..k).map(|t| taps[t] * src[(i, j + t)]).sum::<f64>());
    Array2::from_shape_fn((h - k + 1, w - k + 1), |(i, j)| (0..k).map(|t| taps[t] * rows[(i + t, j)]).sum::<f64>())
}

/// Mean structural similarity with an 11×11 Gaussian window (σ = 1.5),
/// `K₁ = 0.01`, `K₂ = 0.03`, dynamic range 1, over the valid window positions.
pub fn ssim(a: &Image, b: &Image) -> Result<f64> {
    check_same_shape(a, b)?;
    let (h, w) = a.shape();
    if h < SSIM_WINDOW || w < SSIM_WINDOW {
        return Err(Error::invalid(format!(
            "SSIM needs images of at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {h}x{w}"
        )));
    }
    let taps = ssim_taps();
    let (x, y) = (a.array(), b.array());
    let mu_x = gaussian_valid(x, &taps);
    let mu_y = gaussian_valid(y, &taps);
    let xx = gaussian_valid(&(x * x), &taps);
    let yy = gaussian_valid(&(y * y), &taps);
    let xy = gaussian_valid(&(x * y), &taps);
    let c1 = SSIM_K1 * SSIM_K1;
    let c2 = SSIM_K2 * SSIM_K2;
    let mut total = 0.0;
    for ((((mx, my), sxx), syy), sxy) in mu_x.iter().zip(&mu_y).zip(&xx).zip(&yy).zip(&xy) {
        let vx = sxx - mx * mx;
        let vy = syy - my * my;
        let cov = sxy - mx * my;
        total += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
    }
    Ok(total / mu_x.len() as f64)
}

pub fn evaluate(a: &Image, reference: &Image) -> Result<MetricReport> {
    Ok(MetricReport {
        psnr_db: psnr(a, reference, 1.0)?,
        ssim: ssim(a, reference)?,
    })
}

/// Which coder [`denoise`] runs on the highpass component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Csc,
    CscAtv,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csc" => Ok(Method::Csc),
            "csc_atv" => Ok(Method::CscAtv),
            other => Err(Error::invalid(format!("unknown method {other:?} (expected csc or csc_atv)"))),
        }
    }
}

impl From<Method> for CscVariant {
    fn from(m: Method) -> Self {
        match m {
            Method::Csc => CscVariant::Plain,
            Method::CscAtv => CscVariant::Atv,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Denoised {
    /// `low + D x̂`
    pub restored: Image,
    pub low: Image,
    pub high: Image,
    pub codes: CoefficientMaps,
    pub trace: IterationTrace,
}

/// Splits `img` into lowpass and highpass parts, sparse-codes the highpass
/// part over `bank` and returns `low + D x̂`.
///
/// When `reference` is given, every trace record also carries PSNR and SSIM
/// of the running restoration against it.
pub fn denoise(
    img: &Image,
    bank: &FilterBank,
    method: Method,
    cfg: &SolverConfig,
    reference: Option<&Image>,
) -> Result<Denoised> {
    if let Some(r) = reference {
        check_same_shape(img, r)?;
    }
    let (high, low) = split_high_low(img);
    let op = ConvDictionary::new(bank, img.shape())?;
    let solver = CscSolver::new(&op, method.into(), cfg)?;
    let mut state = solver.initial_state()?;
    let monitor = |dx: &Image| {
        let restored = Image::from_array_unchecked(low.array() + dx.array());
        let r = reference.expect("monitor only installed with a reference");
        let p = psnr(&restored, r, 1.0).unwrap_or(f64::NAN);
        let s = ssim(&restored, r).unwrap_or(f64::NAN);
        (p, s)
    };
    let metrics: Option<&(dyn Fn(&Image) -> (f64, f64) + Sync)> = reference.map(|_| &monitor as _);
    let trace = solver.run(&high, &mut state, cfg.iter_n, metrics)?;
    let recon = op.apply(&state.x)?;
    let restored = Image::new(low.array() + recon.array())?;
    Ok(Denoised {
        restored,
        low,
        high,
        codes: state.x,
        trace,
    })
}
