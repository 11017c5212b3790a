//! Synthetic test pairs and the corner-displacement scoring used to decide
//! whether a pair was registered.

use rand::Rng;
use rand_distr::StandardNormal;

use super::transform::{Point, RigidTransform};
use crate::error::{Error, Result};
use crate::image::Image;

/// The four corners at pixel-centre coordinates.
pub fn image_corners(width: usize, height: usize) -> [Point; 4] {
    let (w, h) = (width as f64 - 1.0, height as f64 - 1.0);
    [[0.0, 0.0], [w, 0.0], [0.0, h], [w, h]]
}

/// Mean distance between the image corners mapped by `ground_truth` and by
/// `estimated`.
pub fn registration_error(
    estimated: &RigidTransform,
    ground_truth: &RigidTransform,
    width: usize,
    height: usize,
) -> f64 {
    image_corners(width, height)
        .iter()
        .map(|&c| {
            let (p, q) = (estimated.apply(c), ground_truth.apply(c));
            (p[0] - q[0]).hypot(p[1] - q[1])
        })
        .sum::<f64>()
        / 4.0
}

/// Percentage of errors strictly below `threshold`. Failed registrations
/// are expected as `+∞`, so they count against the rate.
pub fn registration_success_rate(errors: &[f64], threshold: f64) -> Result<f64> {
    if errors.is_empty() {
        return Err(Error::Contract("success rate of an empty test set".into()));
    }
    if errors.iter().any(|e| e.is_nan() || *e < 0.0) {
        return Err(Error::Domain(
            "registration errors must be non-negative (use +inf for failures)".into(),
        ));
    }
    let hits = errors.iter().filter(|&&e| e < threshold).count();
    Ok(100.0 * hits as f64 / errors.len() as f64)
}

/// Success threshold given as a fraction of the larger image side.
pub fn threshold_from_fraction(fraction: f64, width: usize, height: usize) -> f64 {
    fraction * width.max(height) as f64
}

/// Resamples `img` so that content at `p` moves to `t(p)`. Pixels whose
/// preimage falls outside the valid source region are masked out and set
/// to zero.
pub fn warp(img: &Image, t: &RigidTransform) -> Result<Image> {
    let inv = t.inverse();
    let (w, h) = (img.width(), img.height());
    let mut data = Vec::with_capacity(w * h);
    let mut mask = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let src = inv.apply([x as f64, y as f64]);
            match img.bilinear_valid(src[0], src[1]) {
                Some(v) => {
                    data.push(v);
                    mask.push(true);
                }
                None => {
                    data.push(0.0);
                    mask.push(false);
                }
            }
        }
    }
    Image::new(w, h, data)?.with_mask(mask)
}

/// Draws `θ ~ U(±max_theta_deg)` and `t ~ U(±max_translation_px)²` about the
/// image centre and warps `img` by it. Returns the moving image and the
/// exact fixed→moving transform.
pub fn synthesize_test_pair(
    img: &Image,
    max_theta_deg: f64,
    max_translation_px: f64,
    seed: u64,
) -> Result<(Image, RigidTransform)> {
    if !(max_theta_deg >= 0.0 && max_translation_px >= 0.0)
        || !max_theta_deg.is_finite()
        || !max_translation_px.is_finite()
    {
        return Err(Error::Config(
            "synthesis bounds must be finite and non-negative".into(),
        ));
    }
    let mut rng = crate::rng::seeded(seed);
    let mut symmetric = |bound: f64| bound * (2.0 * rng.gen::<f64>() - 1.0);
    let theta = symmetric(max_theta_deg).to_radians();
    let tx = symmetric(max_translation_px);
    let ty = symmetric(max_translation_px);
    let gt = RigidTransform::new(
        theta,
        tx,
        ty,
        RigidTransform::image_center(img.width(), img.height()),
    )?;
    if theta == 0.0 && tx == 0.0 && ty == 0.0 {
        return Ok((img.clone(), gt));
    }
    Ok((warp(img, &gt)?, gt))
}

/// Seed for the `pair_id`-th pair of a run.
pub fn pair_seed(run_seed: u64, pair_id: usize) -> u64 {
    crate::rng::substream(run_seed, 1000 + pair_id as u64).gen()
}

/// Grey-level texture of randomly placed Gaussian blobs of mixed size and
/// polarity over a mid-grey background, normalised to `[0, 1]`. Gives a
/// feature detector plenty of well-separated, rotation-stable structure.
pub fn textured_image(width: usize, height: usize, seed: u64) -> Result<Image> {
    if width == 0 || height == 0 {
        return Err(Error::Contract("texture size must be positive".into()));
    }
    let mut rng = crate::rng::seeded(seed);
    let area = (width * height) as f64;
    let count = (area / 1500.0).ceil() as usize;
    let mut acc = vec![0.0f64; width * height];
    for _ in 0..count {
        let cx = rng.gen_range(0.0..width as f64);
        let cy = rng.gen_range(0.0..height as f64);
        let sigma = 2.0 * 6f64.powf(rng.gen::<f64>());
        let amp: f64 = rng.sample::<f64, _>(StandardNormal);
        let r = (3.5 * sigma).ceil();
        let (x0, x1) = (
            (cx - r).max(0.0) as usize,
            ((cx + r) as usize).min(width - 1),
        );
        let (y0, y1) = (
            (cy - r).max(0.0) as usize,
            ((cy + r) as usize).min(height - 1),
        );
        let k = 1.0 / (2.0 * sigma * sigma);
        for y in y0..=y1 {
            let dy = y as f64 - cy;
            for x in x0..=x1 {
                let dx = x as f64 - cx;
                acc[y * width + x] += amp * (-(dx * dx + dy * dy) * k).exp();
            }
        }
    }
    let lo = acc.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = acc.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    Image::new(
        width,
        height,
        acc.into_iter().map(|v| (v - lo) / span).collect(),
    )
}
