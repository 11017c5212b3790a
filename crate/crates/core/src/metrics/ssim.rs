use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SsimConfig {
    pub window_size: usize,
    pub gaussian_sigma: f64,
    pub dynamic_range: f64,
}

impl Default for SsimConfig {
    fn default() -> Self {
        SsimConfig {
            window_size: 11,
            gaussian_sigma: 1.5,
            dynamic_range: 1.0,
        }
    }
}

impl SsimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_size < 3 || self.window_size.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "SSIM window must be odd and >= 3, got {}",
                self.window_size
            )));
        }
        if !(self.gaussian_sigma > 0.0) || !(self.dynamic_range > 0.0) {
            return Err(Error::Config(
                "SSIM sigma and dynamic range must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn c1(&self) -> f64 {
        (0.01 * self.dynamic_range).powi(2)
    }

    pub fn c2(&self) -> f64 {
        (0.03 * self.dynamic_range).powi(2)
    }

    /// Normalised 1-D Gaussian taps; the 2-D window is their outer product.
    pub fn kernel_1d(&self) -> Vec<f64> {
        let r = (self.window_size / 2) as f64;
        let taps: Vec<f64> = (0..self.window_size)
            .map(|i| {
                let d = i as f64 - r;
                (-d * d / (2.0 * self.gaussian_sigma * self.gaussian_sigma)).exp()
            })
            .collect();
        let total: f64 = taps.iter().sum();
        taps.into_iter().map(|t| t / total).collect()
    }
}

/// Local SSIM from Gaussian-weighted window statistics.
#[inline]
pub(crate) fn local_ssim(
    mu_a: f64,
    mu_b: f64,
    var_a: f64,
    var_b: f64,
    cov: f64,
    c1: f64,
    c2: f64,
) -> f64 {
    ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2))
        / ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2))
}

/// Valid-mode separable filtering: output is `(H−w+1) × (W−w+1)`.
fn filter_valid(src: &[f64], width: usize, height: usize, kernel: &[f64]) -> Vec<f64> {
    let k = kernel.len();
    let ow = width - k + 1;
    let oh = height - k + 1;
    let mut horiz = vec![0.0; ow * height];
    for y in 0..height {
        let row = &src[y * width..(y + 1) * width];
        for x in 0..ow {
            horiz[y * ow + x] = kernel.iter().zip(&row[x..x + k]).map(|(w, v)| w * v).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = kernel
                .iter()
                .enumerate()
                .map(|(j, w)| w * horiz[(y + j) * ow + x])
                .sum();
        }
    }
    out
}

/// Mean local SSIM over every window position that lies fully inside the
/// image and fully inside the joint validity mask.
pub fn image_ssim(a: &Image, b: &Image, cfg: &SsimConfig) -> Result<f64> {
    cfg.validate()?;
    a.check_same_size(b, "image_ssim")?;
    let (w, h, k) = (a.width(), a.height(), cfg.window_size);
    if w < k || h < k {
        return Err(Error::Contract(format!(
            "{w}x{h} image is smaller than the {k}x{k} SSIM window"
        )));
    }
    let kernel = cfg.kernel_1d();
    let (da, db) = (a.data(), b.data());
    let sq = |d: &[f64]| d.iter().map(|v| v * v).collect::<Vec<_>>();
    let prod: Vec<f64> = da.iter().zip(db).map(|(x, y)| x * y).collect();
    let mu_a = filter_valid(da, w, h, &kernel);
    let mu_b = filter_valid(db, w, h, &kernel);
    let ea2 = filter_valid(&sq(da), w, h, &kernel);
    let eb2 = filter_valid(&sq(db), w, h, &kernel);
    let eab = filter_valid(&prod, w, h, &kernel);

    let window_ok = valid_windows(a, b, k);
    let (c1, c2) = (cfg.c1(), cfg.c2());
    let mut total = 0.0;
    let mut count = 0usize;
    for i in 0..mu_a.len() {
        if !window_ok[i] {
            continue;
        }
        let (ma, mb) = (mu_a[i], mu_b[i]);
        total += local_ssim(
            ma,
            mb,
            ea2[i] - ma * ma,
            eb2[i] - mb * mb,
            eab[i] - ma * mb,
            c1,
            c2,
        );
        count += 1;
    }
    if count == 0 {
        return Err(Error::Domain(
            "no SSIM window lies entirely inside the valid region".into(),
        ));
    }
    Ok(total / count as f64)
}

/// For each top-left window position, whether all `k × k` pixels are valid
/// in both images (summed-area table over invalid pixels).
fn valid_windows(a: &Image, b: &Image, k: usize) -> Vec<bool> {
    let (w, h) = (a.width(), a.height());
    let ow = w - k + 1;
    let oh = h - k + 1;
    if a.mask().is_none() && b.mask().is_none() {
        return vec![true; ow * oh];
    }
    let mut sat = vec![0usize; (w + 1) * (h + 1)];
    for y in 0..h {
        for x in 0..w {
            let bad = usize::from(!(a.is_valid(x, y) && b.is_valid(x, y)));
            sat[(y + 1) * (w + 1) + x + 1] =
                bad + sat[y * (w + 1) + x + 1] + sat[(y + 1) * (w + 1) + x] - sat[y * (w + 1) + x];
        }
    }
    let mut out = vec![false; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            let s = sat[(y + k) * (w + 1) + x + k] + sat[y * (w + 1) + x]
                - sat[y * (w + 1) + x + k]
                - sat[(y + k) * (w + 1) + x];
            out[y * ow + x] = s == 0;
        }
    }
    out
}
