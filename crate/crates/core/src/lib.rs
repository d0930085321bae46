//! Convolutional sparse representations solved with the first-order
//! primal-dual (Chambolle-Pock) method.
//!
//! * [`solvers::csc_cp`]: sparse coding `min ½‖Σ d_m ⊛ x_m − s‖² + λ Σ‖x_m‖₁`
//! * [`solvers::csc_atv_cp`]: the same with an anisotropic TV penalty on the maps
//! * [`solvers::dict_update_cp`] / [`solvers::cdl_cp`]: dictionary update and learning
//! * [`pipeline::denoise`]: highpass-split denoising around the coders
//!
//! All linear operators are evaluated with FFTs under periodic boundaries.

pub mod error;
pub mod fft;
pub mod io;
pub mod operators;
pub mod pipeline;
pub mod prox;
pub mod rng;
pub mod signal;
pub mod solvers;
pub mod types;

pub use error::{Error, Result};
pub use types::{CoefficientMaps, FilterBank, Image};
