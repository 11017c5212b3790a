//! α-truncated average minimal distance between two images.
//!
//! Each image is cut into `Q` level sets `S_q = {x : I(x) ≥ (q − ½)/Q}`,
//! `q = 1..=Q`, which together describe its quantised intensity as a fuzzy
//! set. The directed distance from `A` to `B` averages, over every point of
//! every level set of `A`, the Euclidean distance to the nearest point of the
//! same level set of `B`, truncated at `α`. Points in higher level sets
//! therefore count once per level they belong to, which weights them by
//! their membership. The reported value is the mean of both directions.

use serde::{Deserialize, Serialize};

use super::edt::squared_edt;
use crate::error::{Error, Result};
use crate::image::Image;

/// Truncation distance in pixels used for 834 px images; scaled with image
/// size by [`AmdConfig::for_size`].
pub const REFERENCE_ALPHA_PX: f64 = 40.0;
pub const REFERENCE_SIZE_PX: f64 = 834.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmdConfig {
    pub alpha: f64,
    pub levels: usize,
}

impl AmdConfig {
    /// Eight levels and `α = 40 px · max(W, H) / 834`.
    pub fn for_size(width: usize, height: usize) -> Self {
        AmdConfig {
            alpha: REFERENCE_ALPHA_PX * width.max(height) as f64 / REFERENCE_SIZE_PX,
            levels: 8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        if self.levels == 0 {
            return Err(Error::Config("alpha-AMD needs at least one level".into()));
        }
        Ok(())
    }
}

fn level_sets(img: &Image, other: &Image, levels: usize) -> Vec<Vec<bool>> {
    (1..=levels)
        .map(|q| {
            let cut = (q as f64 - 0.5) / levels as f64;
            img.data()
                .iter()
                .enumerate()
                .map(|(i, &v)| v >= cut && img.is_valid_index(i) && other.is_valid_index(i))
                .collect()
        })
        .collect()
}

/// `(Σ truncated distances, number of level-set points)` from `from` to `to`.
fn directed(
    from: &[Vec<bool>],
    to: &[Vec<bool>],
    width: usize,
    height: usize,
    alpha: f64,
) -> (f64, usize) {
    let mut total = 0.0;
    let mut count = 0usize;
    let alpha_sq = alpha * alpha;
    for (src, dst) in from.iter().zip(to) {
        if !src.iter().any(|&s| s) {
            continue;
        }
        let dist_sq = squared_edt(dst, width, height);
        for (i, _) in src.iter().enumerate().filter(|(_, &s)| s) {
            let d2 = dist_sq[i];
            total += if d2 >= alpha_sq { alpha } else { d2.sqrt() };
            count += 1;
        }
    }
    (total, count)
}

pub fn alpha_amd(a: &Image, b: &Image, cfg: &AmdConfig) -> Result<f64> {
    cfg.validate()?;
    a.check_same_size(b, "alpha_amd")?;
    if a.data()
        .iter()
        .chain(b.data())
        .any(|v| !(0.0..=1.0).contains(v))
    {
        return Err(Error::Domain(
            "alpha-AMD expects intensities in [0, 1]".into(),
        ));
    }
    let (w, h) = (a.width(), a.height());
    let sets_a = level_sets(a, b, cfg.levels);
    let sets_b = level_sets(b, a, cfg.levels);
    let (sum_ab, n_a) = directed(&sets_a, &sets_b, w, h, cfg.alpha);
    let (sum_ba, n_b) = directed(&sets_b, &sets_a, w, h, cfg.alpha);
    let mean = |sum: f64, n: usize, other_n: usize| {
        if n > 0 {
            sum / n as f64
        } else if other_n > 0 {
            // Nothing to transport from an empty image; every point of the
            // other image is at the truncation distance.
            cfg.alpha
        } else {
            0.0
        }
    };
    Ok(0.5 * (mean(sum_ab, n_a, n_b) + mean(sum_ba, n_b, n_a)))
}
