//! Image similarity measures used to compare a registered pair or two
//! modalities of the same scene.

mod amd;
mod edt;
mod frechet;
mod pixel;
mod ssim;

pub use amd::{alpha_amd, AmdConfig, REFERENCE_ALPHA_PX, REFERENCE_SIZE_PX};
pub use edt::{edt, squared_edt};
pub use frechet::{frechet_distance, FeatureSet};
pub use pixel::{image_correlation, image_mse, median, pcc};
pub use ssim::{image_ssim, SsimConfig};
