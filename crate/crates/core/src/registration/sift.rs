//! Scale-invariant keypoints and 128-bin gradient descriptors.
//!
//! A straightforward reimplementation: Gaussian scale space with
//! `steps_per_octave` intervals, difference-of-Gaussian extrema over 26
//! neighbours, contrast and edge-response rejection, 36-bin orientation
//! histograms and 4×4×8 descriptors with trilinear binning. It is not bit
//! compatible with any particular reference implementation.

use std::f64::consts::TAU;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image;
use crate::metrics::edt;

pub const DESCRIPTOR_LEN: usize = 128;
const DESCRIPTOR_CELLS: usize = 4;
const DESCRIPTOR_BINS: usize = 8;
const DESCRIPTOR_CELL_WIDTH: f64 = 3.0;
const DESCRIPTOR_CLAMP: f64 = 0.2;
const ORIENTATION_BINS: usize = 36;
const ORIENTATION_SIGMA_FACTOR: f64 = 1.5;
const ORIENTATION_PEAK_RATIO: f64 = 0.8;
const EXTREMUM_BORDER: usize = 5;
const REFINEMENT_STEPS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SiftConfig {
    /// Octaves are built while the shorter side is at least this long.
    pub min_octave_size: usize,
    /// Inputs whose longer side exceeds this are halved until it fits.
    pub max_octave_size: usize,
    pub steps_per_octave: usize,
    pub initial_sigma: f64,
    /// Blur already present in the input.
    pub assumed_blur: f64,
    /// Extrema with `|DoG| < contrast_threshold / steps_per_octave` are
    /// dropped (intensities in `[0, 1]`).
    pub contrast_threshold: f64,
    /// Maximum ratio of principal curvatures.
    pub edge_threshold: f64,
    pub ratio_test_threshold: f64,
    /// Fit a 3-D quadratic to each extremum for sub-pixel, sub-scale
    /// localisation.
    pub subpixel_refinement: bool,
}

impl Default for SiftConfig {
    fn default() -> Self {
        SiftConfig {
            min_octave_size: 128,
            max_octave_size: 1024,
            steps_per_octave: 3,
            initial_sigma: 1.6,
            assumed_blur: 0.5,
            contrast_threshold: 0.04,
            edge_threshold: 10.0,
            ratio_test_threshold: 0.8,
            subpixel_refinement: false,
        }
    }
}

impl SiftConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.initial_sigma,
            self.contrast_threshold,
            self.edge_threshold,
            self.ratio_test_threshold,
        ];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Config(
                "SIFT sigma and thresholds must be positive".into(),
            ));
        }
        if !(0.0..self.initial_sigma).contains(&self.assumed_blur) {
            return Err(Error::Config(
                "assumed input blur must lie in [0, initial_sigma)".into(),
            ));
        }
        if self.steps_per_octave == 0 {
            return Err(Error::Config("steps_per_octave must be at least 1".into()));
        }
        if self.min_octave_size < 2 * EXTREMUM_BORDER + 3
            || self.min_octave_size > self.max_octave_size
        {
            return Err(Error::Config(format!(
                "octave range [{}, {}] is invalid",
                self.min_octave_size, self.max_octave_size
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Keypoint {
    pub x: f64,
    pub y: f64,
    /// Gaussian scale in input pixels.
    pub scale: f64,
    /// Dominant gradient direction, radians in `(−π, π]`.
    pub orientation: f64,
    /// DoG value at the extremum.
    pub response: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Descriptor(pub [f64; DESCRIPTOR_LEN]);

impl Descriptor {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn distance_sq(&self, other: &Descriptor) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }
}

/// Intermediate descriptor vectors, for checking the normalisation steps.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorStages {
    pub raw: [f64; DESCRIPTOR_LEN],
    pub normalized: [f64; DESCRIPTOR_LEN],
    /// `normalized` with every entry capped at 0.2, before renormalising.
    pub clamped: [f64; DESCRIPTOR_LEN],
    pub descriptor: Descriptor,
}

/// Keypoints that received a descriptor, with descriptors in the same order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Features {
    pub keypoints: Vec<Keypoint>,
    pub descriptors: Vec<Descriptor>,
}

impl Features {
    pub fn len(&self) -> usize {
        self.keypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keypoints.is_empty()
    }
}

/// Single-channel `f64` plane.
#[derive(Debug, Clone)]
struct Plane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Plane {
    #[inline]
    fn at(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    fn halve_by_averaging(&self) -> Plane {
        let (w, h) = (self.width / 2, self.height / 2);
        let mut data = Vec::with_capacity(w * h);
        for y in 0..h {
            for x in 0..w {
                let s = self.at(2 * x, 2 * y)
                    + self.at(2 * x + 1, 2 * y)
                    + self.at(2 * x, 2 * y + 1)
                    + self.at(2 * x + 1, 2 * y + 1);
                data.push(0.25 * s);
            }
        }
        Plane {
            width: w,
            height: h,
            data,
        }
    }

    fn decimate(&self) -> Plane {
        let (w, h) = (self.width.div_ceil(2), self.height.div_ceil(2));
        let mut data = Vec::with_capacity(w * h);
        for y in 0..h {
            for x in 0..w {
                data.push(self.at(2 * x, 2 * y));
            }
        }
        Plane {
            width: w,
            height: h,
            data,
        }
    }

    /// Separable Gaussian blur with edge replication.
    fn blur(&self, sigma: f64) -> Plane {
        if sigma <= 0.0 {
            return self.clone();
        }
        let radius = (4.0 * sigma).ceil() as isize;
        let mut kernel: Vec<f64> = (-radius..=radius)
            .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
            .collect();
        let total: f64 = kernel.iter().sum();
        kernel.iter_mut().for_each(|k| *k /= total);

        let (w, h) = (self.width, self.height);
        let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;
        let mut tmp = vec![0.0; w * h];
        for y in 0..h {
            let row = &self.data[y * w..(y + 1) * w];
            for x in 0..w {
                let mut acc = 0.0;
                for (k, kv) in kernel.iter().enumerate() {
                    acc += kv * row[clamp(x as isize + k as isize - radius, w)];
                }
                tmp[y * w + x] = acc;
            }
        }
        let mut out = vec![0.0; w * h];
        for y in 0..h {
            for (k, kv) in kernel.iter().enumerate() {
                let src = clamp(y as isize + k as isize - radius, h);
                let src_row = &tmp[src * w..(src + 1) * w];
                let dst = &mut out[y * w..(y + 1) * w];
                for (d, s) in dst.iter_mut().zip(src_row) {
                    *d += kv * s;
                }
            }
        }
        Plane {
            width: w,
            height: h,
            data: out,
        }
    }

    /// Central-difference gradient magnitude and direction at an interior pixel.
    #[inline]
    fn gradient(&self, x: usize, y: usize) -> (f64, f64) {
        let gx = self.at(x + 1, y) - self.at(x - 1, y);
        let gy = self.at(x, y + 1) - self.at(x, y - 1);
        ((gx * gx + gy * gy).sqrt(), gy.atan2(gx))
    }
}

struct Octave {
    /// Size of one octave pixel in input pixels.
    step: f64,
    gaussians: Vec<Plane>,
    dogs: Vec<Plane>,
}

/// Gaussian and difference-of-Gaussian pyramid of one image.
pub(crate) struct ScaleSpace {
    cfg: SiftConfig,
    octaves: Vec<Octave>,
    width: usize,
    height: usize,
}

impl ScaleSpace {
    pub(crate) fn build(img: &Image, cfg: &SiftConfig) -> Result<Self> {
        cfg.validate()?;
        let (w, h) = (img.width(), img.height());
        if w.min(h) < cfg.min_octave_size {
            return Err(Error::Contract(format!(
                "{w}x{h} image is smaller than the {} px minimum octave size",
                cfg.min_octave_size
            )));
        }
        let mut base = Plane {
            width: w,
            height: h,
            data: img.data().to_vec(),
        };
        let mut step = 1.0;
        while base.width.max(base.height) > cfg.max_octave_size
            && base.width.min(base.height) / 2 >= cfg.min_octave_size
        {
            base = base.halve_by_averaging();
            step *= 2.0;
        }
        let s = cfg.steps_per_octave;
        let k = 2f64.powf(1.0 / s as f64);
        let sigmas: Vec<f64> = (0..s + 3)
            .map(|i| cfg.initial_sigma * k.powi(i as i32))
            .collect();
        let increments: Vec<f64> = (1..s + 3)
            .map(|i| (sigmas[i].powi(2) - sigmas[i - 1].powi(2)).sqrt())
            .collect();

        let mut first = base.blur((cfg.initial_sigma.powi(2) - cfg.assumed_blur.powi(2)).sqrt());
        let mut octaves = Vec::new();
        while first.width.min(first.height) >= cfg.min_octave_size {
            let mut gaussians = Vec::with_capacity(s + 3);
            gaussians.push(first);
            for inc in &increments {
                let next = gaussians.last().unwrap().blur(*inc);
                gaussians.push(next);
            }
            let dogs = gaussians
                .windows(2)
                .map(|pair| Plane {
                    width: pair[0].width,
                    height: pair[0].height,
                    data: pair[1]
                        .data
                        .iter()
                        .zip(&pair[0].data)
                        .map(|(b, a)| b - a)
                        .collect(),
                })
                .collect();
            first = gaussians[s].decimate();
            octaves.push(Octave {
                step,
                gaussians,
                dogs,
            });
            step *= 2.0;
        }
        Ok(ScaleSpace {
            cfg: *cfg,
            octaves,
            width: w,
            height: h,
        })
    }

    /// Octave-local scale of a (possibly fractional) layer.
    fn layer_sigma(&self, layer: f64) -> f64 {
        self.cfg.initial_sigma * 2f64.powf(layer / self.cfg.steps_per_octave as f64)
    }

    /// Octave and nearest Gaussian layer holding a keypoint of this scale.
    fn locate(&self, scale: f64) -> (usize, usize) {
        let s = self.cfg.steps_per_octave as f64;
        let base_step = self.octaves[0].step;
        let total = s * (scale / (self.cfg.initial_sigma * base_step)).log2();
        let octave = ((total - 0.5) / s)
            .floor()
            .clamp(0.0, (self.octaves.len() - 1) as f64);
        let layer = (total - octave * s).round().clamp(0.0, s + 2.0);
        (octave as usize, layer as usize)
    }

    pub(crate) fn detect(&self) -> Vec<Keypoint> {
        let s = self.cfg.steps_per_octave;
        let threshold = self.cfg.contrast_threshold / s as f64;
        let prelim = if self.cfg.subpixel_refinement {
            0.5 * threshold
        } else {
            threshold
        };
        let mut out = Vec::new();
        for (o, oct) in self.octaves.iter().enumerate() {
            let (w, h) = (oct.dogs[0].width, oct.dogs[0].height);
            if w <= 2 * EXTREMUM_BORDER || h <= 2 * EXTREMUM_BORDER {
                continue;
            }
            for layer in 1..=s {
                for y in EXTREMUM_BORDER..h - EXTREMUM_BORDER {
                    for x in EXTREMUM_BORDER..w - EXTREMUM_BORDER {
                        let v = oct.dogs[layer].at(x, y);
                        if v.abs() < prelim || !is_extremum(&oct.dogs, layer, x, y) {
                            continue;
                        }
                        let Some(c) = self.localize(o, layer, x, y, threshold) else {
                            continue;
                        };
                        self.assign_orientations(o, c, &mut out);
                    }
                }
            }
        }
        out
    }

    /// Contrast/edge tests and optional quadratic refinement. Returns the
    /// octave-local candidate `(x, y, layer, response)`.
    fn localize(
        &self,
        o: usize,
        layer: usize,
        x: usize,
        y: usize,
        threshold: f64,
    ) -> Option<Candidate> {
        let dogs = &self.octaves[o].dogs;
        let (w, h) = (dogs[0].width, dogs[0].height);
        let s = self.cfg.steps_per_octave;
        let (mut xi, mut yi, mut li) = (x, y, layer);
        let mut offset = Vector3::zeros();
        let mut response = dogs[li].at(xi, yi);
        if self.cfg.subpixel_refinement {
            let mut converged = false;
            for _ in 0..REFINEMENT_STEPS {
                let (grad, hess) = derivatives_3d(dogs, li, xi, yi);
                offset = -hess.lu().solve(&grad)?;
                if offset.iter().all(|v| v.abs() < 0.5) {
                    response = dogs[li].at(xi, yi) + 0.5 * grad.dot(&offset);
                    converged = true;
                    break;
                }
                let nx = xi as f64 + offset[0].round();
                let ny = yi as f64 + offset[1].round();
                let nl = li as f64 + offset[2].round();
                let border = EXTREMUM_BORDER as f64;
                if nl < 1.0
                    || nl > s as f64
                    || nx < border
                    || ny < border
                    || nx >= (w - EXTREMUM_BORDER) as f64
                    || ny >= (h - EXTREMUM_BORDER) as f64
                {
                    return None;
                }
                (xi, yi, li) = (nx as usize, ny as usize, nl as usize);
            }
            if !converged {
                return None;
            }
        }
        if response.abs() < threshold
            || !passes_edge_test(&dogs[li], xi, yi, self.cfg.edge_threshold)
        {
            return None;
        }
        Some(Candidate {
            x: xi as f64 + offset[0],
            y: yi as f64 + offset[1],
            layer: li as f64 + offset[2],
            response,
        })
    }

    fn assign_orientations(&self, o: usize, c: Candidate, out: &mut Vec<Keypoint>) {
        let oct = &self.octaves[o];
        let sigma = self.layer_sigma(c.layer);
        let img = &oct.gaussians[(c.layer.round() as usize).min(oct.gaussians.len() - 1)];
        let weight_sigma = ORIENTATION_SIGMA_FACTOR * sigma;
        let radius = (3.0 * weight_sigma).round() as isize;
        let (xi, yi) = (c.x.round() as isize, c.y.round() as isize);
        let mut hist = [0.0; ORIENTATION_BINS];
        for dy in -radius..=radius {
            let py = yi + dy;
            if py < 1 || py >= img.height as isize - 1 {
                continue;
            }
            for dx in -radius..=radius {
                let px = xi + dx;
                if px < 1 || px >= img.width as isize - 1 {
                    continue;
                }
                let (mag, angle) = img.gradient(px as usize, py as usize);
                let weight =
                    (-((dx * dx + dy * dy) as f64) / (2.0 * weight_sigma * weight_sigma)).exp();
                let bin = ((ORIENTATION_BINS as f64 * angle / TAU).round() as isize)
                    .rem_euclid(ORIENTATION_BINS as isize);
                hist[bin as usize] += weight * mag;
            }
        }
        let hist = smooth_circular(&hist);
        let peak = hist.iter().cloned().fold(0.0, f64::max);
        if peak <= 0.0 {
            return;
        }
        let n = ORIENTATION_BINS;
        for i in 0..n {
            let (l, r) = (hist[(i + n - 1) % n], hist[(i + 1) % n]);
            let v = hist[i];
            if v > l && v > r && v >= ORIENTATION_PEAK_RATIO * peak {
                let bin = i as f64 + 0.5 * (l - r) / (l - 2.0 * v + r);
                out.push(Keypoint {
                    x: c.x * oct.step,
                    y: c.y * oct.step,
                    scale: sigma * oct.step,
                    orientation: super::transform::wrap_angle(TAU * bin / n as f64),
                    response: c.response,
                });
            }
        }
    }

    /// Support radius of the descriptor window, in input pixels.
    fn descriptor_radius(&self, kp: &Keypoint) -> f64 {
        let (o, _) = self.locate(kp.scale);
        let step = self.octaves[o].step;
        (descriptor_window_radius(kp.scale / step) + 1) as f64 * step
    }

    pub(crate) fn describe(&self, kp: &Keypoint) -> Option<DescriptorStages> {
        let (o, layer) = self.locate(kp.scale);
        let oct = &self.octaves[o];
        let img = &oct.gaussians[layer];
        let sigma = kp.scale / oct.step;
        let (xi, yi) = (
            (kp.x / oct.step).round() as isize,
            (kp.y / oct.step).round() as isize,
        );
        let radius = descriptor_window_radius(sigma) as isize;
        if xi - radius - 1 < 0
            || yi - radius - 1 < 0
            || xi + radius + 1 >= img.width as isize
            || yi + radius + 1 >= img.height as isize
        {
            return None;
        }
        let d = DESCRIPTOR_CELLS as f64;
        let cell = DESCRIPTOR_CELL_WIDTH * sigma;
        let (sin_t, cos_t) = kp.orientation.sin_cos();
        let mut raw = [0.0; DESCRIPTOR_LEN];
        for i in -radius..=radius {
            for j in -radius..=radius {
                let x_rot = (cos_t * j as f64 + sin_t * i as f64) / cell;
                let y_rot = (-sin_t * j as f64 + cos_t * i as f64) / cell;
                let rbin = y_rot + 0.5 * d - 0.5;
                let cbin = x_rot + 0.5 * d - 0.5;
                if rbin <= -1.0 || rbin >= d || cbin <= -1.0 || cbin >= d {
                    continue;
                }
                let (mag, angle) = img.gradient((xi + j) as usize, (yi + i) as usize);
                let weight =
                    (-(x_rot * x_rot + y_rot * y_rot) / (2.0 * (0.5 * d) * (0.5 * d))).exp();
                let obin = (angle - kp.orientation).rem_euclid(TAU) * DESCRIPTOR_BINS as f64 / TAU;
                trilinear_add(&mut raw, rbin, cbin, obin, mag * weight);
            }
        }
        let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return None;
        }
        let normalized = raw.map(|v| v / norm);
        let clamped = normalized.map(|v| v.min(DESCRIPTOR_CLAMP));
        let norm2 = clamped.iter().map(|v| v * v).sum::<f64>().sqrt();
        Some(DescriptorStages {
            raw,
            normalized,
            clamped,
            descriptor: Descriptor(clamped.map(|v| v / norm2)),
        })
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    x: f64,
    y: f64,
    layer: f64,
    response: f64,
}

fn descriptor_window_radius(sigma: f64) -> usize {
    let cell = DESCRIPTOR_CELL_WIDTH * sigma;
    (cell * std::f64::consts::SQRT_2 * (DESCRIPTOR_CELLS as f64 + 1.0) * 0.5).round() as usize
}

fn is_extremum(dogs: &[Plane], layer: usize, x: usize, y: usize) -> bool {
    let v = dogs[layer].at(x, y);
    let (mut is_max, mut is_min) = (true, true);
    for plane in &dogs[layer - 1..=layer + 1] {
        for ny in y - 1..=y + 1 {
            for nx in x - 1..=x + 1 {
                if std::ptr::eq(plane, &dogs[layer]) && nx == x && ny == y {
                    continue;
                }
                let n = plane.at(nx, ny);
                is_max &= v > n;
                is_min &= v < n;
                if !is_max && !is_min {
                    return false;
                }
            }
        }
    }
    true
}

fn passes_edge_test(dog: &Plane, x: usize, y: usize, r: f64) -> bool {
    let v = dog.at(x, y);
    let dxx = dog.at(x + 1, y) + dog.at(x - 1, y) - 2.0 * v;
    let dyy = dog.at(x, y + 1) + dog.at(x, y - 1) - 2.0 * v;
    let dxy = 0.25
        * (dog.at(x + 1, y + 1) - dog.at(x - 1, y + 1) - dog.at(x + 1, y - 1)
            + dog.at(x - 1, y - 1));
    let tr = dxx + dyy;
    let det = dxx * dyy - dxy * dxy;
    det > 0.0 && tr * tr * r < (r + 1.0) * (r + 1.0) * det
}

fn derivatives_3d(dogs: &[Plane], l: usize, x: usize, y: usize) -> (Vector3<f64>, Matrix3<f64>) {
    let d = |dl: isize, dx: isize, dy: isize| {
        dogs[(l as isize + dl) as usize].at((x as isize + dx) as usize, (y as isize + dy) as usize)
    };
    let v = d(0, 0, 0);
    let grad = Vector3::new(
        0.5 * (d(0, 1, 0) - d(0, -1, 0)),
        0.5 * (d(0, 0, 1) - d(0, 0, -1)),
        0.5 * (d(1, 0, 0) - d(-1, 0, 0)),
    );
    let dxx = d(0, 1, 0) + d(0, -1, 0) - 2.0 * v;
    let dyy = d(0, 0, 1) + d(0, 0, -1) - 2.0 * v;
    let dss = d(1, 0, 0) + d(-1, 0, 0) - 2.0 * v;
    let dxy = 0.25 * (d(0, 1, 1) - d(0, -1, 1) - d(0, 1, -1) + d(0, -1, -1));
    let dxs = 0.25 * (d(1, 1, 0) - d(1, -1, 0) - d(-1, 1, 0) + d(-1, -1, 0));
    let dys = 0.25 * (d(1, 0, 1) - d(1, 0, -1) - d(-1, 0, 1) + d(-1, 0, -1));
    let hess = Matrix3::new(dxx, dxy, dxs, dxy, dyy, dys, dxs, dys, dss);
    (grad, hess)
}

/// Two passes of a circular `[1, 2, 1] / 4` filter.
fn smooth_circular(hist: &[f64; ORIENTATION_BINS]) -> [f64; ORIENTATION_BINS] {
    let n = ORIENTATION_BINS;
    let pass = |h: &[f64; ORIENTATION_BINS]| {
        let mut out = [0.0; ORIENTATION_BINS];
        for i in 0..n {
            out[i] = 0.25 * h[(i + n - 1) % n] + 0.5 * h[i] + 0.25 * h[(i + 1) % n];
        }
        out
    };
    pass(&pass(hist))
}

fn trilinear_add(hist: &mut [f64; DESCRIPTOR_LEN], rbin: f64, cbin: f64, obin: f64, v: f64) {
    let (r0, c0, o0) = (rbin.floor(), cbin.floor(), obin.floor());
    let (dr, dc, dobin) = (rbin - r0, cbin - c0, obin - o0);
    for (ri, wr) in [(r0 as isize, 1.0 - dr), (r0 as isize + 1, dr)] {
        if ri < 0 || ri >= DESCRIPTOR_CELLS as isize {
            continue;
        }
        for (ci, wc) in [(c0 as isize, 1.0 - dc), (c0 as isize + 1, dc)] {
            if ci < 0 || ci >= DESCRIPTOR_CELLS as isize {
                continue;
            }
            for (oi, wo) in [(o0 as usize, 1.0 - dobin), (o0 as usize + 1, dobin)] {
                let o = oi % DESCRIPTOR_BINS;
                let idx = (ri as usize * DESCRIPTOR_CELLS + ci as usize) * DESCRIPTOR_BINS + o;
                hist[idx] += v * wr * wc * wo;
            }
        }
    }
}

/// Drops keypoints whose descriptor window reaches an invalid pixel.
fn filter_by_mask(space: &ScaleSpace, img: &Image, kps: Vec<Keypoint>) -> Vec<Keypoint> {
    let Some(mask) = img.mask() else {
        return kps;
    };
    let invalid: Vec<bool> = mask.iter().map(|&m| !m).collect();
    let dist = edt(&invalid, space.width, space.height);
    kps.into_iter()
        .filter(|kp| {
            let (x, y) = (kp.x.round() as usize, kp.y.round() as usize);
            let idx = y.min(space.height - 1) * space.width + x.min(space.width - 1);
            dist[idx] > space.descriptor_radius(kp)
        })
        .collect()
}

/// Difference-of-Gaussian keypoints with their dominant orientations. A
/// constant image yields no keypoints.
pub fn detect_keypoints(img: &Image, cfg: &SiftConfig) -> Result<Vec<Keypoint>> {
    let space = ScaleSpace::build(img, cfg)?;
    let kps = space.detect();
    Ok(filter_by_mask(&space, img, kps))
}

/// Descriptors for the given keypoints; keypoints whose window leaves the
/// image are skipped.
pub fn compute_descriptors(img: &Image, kps: &[Keypoint], cfg: &SiftConfig) -> Result<Features> {
    let space = ScaleSpace::build(img, cfg)?;
    Ok(describe_all(&space, kps))
}

/// Like [`compute_descriptors`] but keeps the intermediate vectors.
pub fn compute_descriptor_stages(
    img: &Image,
    kps: &[Keypoint],
    cfg: &SiftConfig,
) -> Result<Vec<(Keypoint, DescriptorStages)>> {
    let space = ScaleSpace::build(img, cfg)?;
    Ok(kps
        .iter()
        .filter_map(|kp| space.describe(kp).map(|d| (*kp, d)))
        .collect())
}

fn describe_all(space: &ScaleSpace, kps: &[Keypoint]) -> Features {
    let mut features = Features::default();
    for kp in kps {
        if let Some(stages) = space.describe(kp) {
            features.keypoints.push(*kp);
            features.descriptors.push(stages.descriptor);
        }
    }
    features
}

/// Detection and description sharing one scale space.
pub fn extract_features(img: &Image, cfg: &SiftConfig) -> Result<Features> {
    let space = ScaleSpace::build(img, cfg)?;
    let kps = filter_by_mask(&space, img, space.detect());
    Ok(describe_all(&space, &kps))
}
