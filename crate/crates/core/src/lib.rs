//! Diagnostics for contrastively trained multimodal representations.
//!
//! - [`contrastive`]: InfoNCE critics, pairings and supervision schedules,
//!   with analytic gradients.
//! - [`toy`]: twin two-layer encoders trained on synthetic paired data.
//! - [`metrics`]: MSE, correlation, SSIM, α-AMD and the Fréchet distance.
//! - [`registration`]: SIFT, ratio matching and RANSAC rigid registration,
//!   plus the synthetic-pair scoring protocol.
//! - [`embedding`]: Sammon MDS and singular-value spectra.
//! - [`io`]: matrix, image and table files and the experiment config.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod contrastive;
pub mod embedding;
pub mod error;
pub mod image;
pub mod io;
pub mod matrix;
pub mod metrics;
pub mod registration;
pub mod rng;
pub mod toy;

pub use error::{Error, Result};
pub use image::Image;
pub use matrix::Matrix;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/contrastive.md")]
    mod contrastive {}
    #[doc = include_str!("../../../book/src/toy.md")]
    mod toy {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/registration.md")]
    mod registration {}
    #[doc = include_str!("../../../book/src/embedding.md")]
    mod embedding {}
    #[doc = include_str!("../../../book/src/files.md")]
    mod files {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
