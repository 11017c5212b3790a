//! Grayscale image with an optional validity mask.

use crate::error::{Error, Result};

/// `H × W` intensities (nominally in `[0, 1]`), row-major, plus an optional
/// mask where `true` marks a valid pixel. Pixels outside the mask (for
/// instance the border exposed by a rigid transform) are ignored by every
/// comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    data: Vec<f64>,
    mask: Option<Vec<bool>>,
}

impl Image {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Contract(format!(
                "image must be non-empty, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::shape("Image::new", width * height, data.len()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("image intensities must be finite".into()));
        }
        Ok(Image {
            width,
            height,
            data,
            mask: None,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Image::new(width, height, data)
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self> {
        Image::new(width, height, vec![value; width * height])
    }

    pub fn with_mask(mut self, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != self.data.len() {
            return Err(Error::shape(
                "Image::with_mask",
                self.data.len(),
                mask.len(),
            ));
        }
        self.mask = if mask.iter().all(|&m| m) {
            None
        } else {
            Some(mask)
        };
        Ok(self)
    }

    pub fn without_mask(mut self) -> Self {
        self.mask = None;
        self
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn mask(&self) -> Option<&[bool]> {
        self.mask.as_deref()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn is_valid(&self, x: usize, y: usize) -> bool {
        self.mask.as_ref().is_none_or(|m| m[y * self.width + x])
    }

    #[inline]
    pub fn is_valid_index(&self, i: usize) -> bool {
        self.mask.as_ref().is_none_or(|m| m[i])
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Image> {
        let mut out = Image::new(
            self.width,
            self.height,
            self.data.iter().map(|&v| f(v)).collect(),
        )?;
        out.mask = self.mask.clone();
        Ok(out)
    }

    pub(crate) fn check_same_size(&self, other: &Image, context: &'static str) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::shape(
                context,
                format!("{}x{}", self.width, self.height),
                format!("{}x{}", other.width, other.height),
            ));
        }
        Ok(())
    }

    /// Indices valid in both images.
    pub(crate) fn joint_valid(&self, other: &Image) -> Vec<usize> {
        (0..self.data.len())
            .filter(|&i| self.is_valid_index(i) && other.is_valid_index(i))
            .collect()
    }

    /// Samples at a subpixel location with bilinear interpolation. Returns
    /// `None` outside `[0, W−1] × [0, H−1]`.
    pub fn bilinear(&self, x: f64, y: f64) -> Option<f64> {
        let (w, h) = (self.width as f64, self.height as f64);
        if !(x >= 0.0 && y >= 0.0 && x <= w - 1.0 && y <= h - 1.0) {
            return None;
        }
        let x0 = x.floor() as usize;
        let y0 = y.floor() as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let fx = x - x0 as f64;
        let fy = y - y0 as f64;
        let top = if fx == 0.0 {
            self.get(x0, y0)
        } else {
            self.get(x0, y0) * (1.0 - fx) + self.get(x1, y0) * fx
        };
        if fy == 0.0 {
            return Some(top);
        }
        let bottom = if fx == 0.0 {
            self.get(x0, y1)
        } else {
            self.get(x0, y1) * (1.0 - fx) + self.get(x1, y1) * fx
        };
        Some(top * (1.0 - fy) + bottom * fy)
    }

    /// Like [`Image::bilinear`], but also `None` when any pixel that carries
    /// interpolation weight is masked out.
    pub fn bilinear_valid(&self, x: f64, y: f64) -> Option<f64> {
        let v = self.bilinear(x, y)?;
        if self.mask.is_some() {
            let (x0, y0) = (x.floor() as usize, y.floor() as usize);
            let xs: &[usize] = if x > x0 as f64 { &[x0, x0 + 1] } else { &[x0] };
            let ys: &[usize] = if y > y0 as f64 { &[y0, y0 + 1] } else { &[y0] };
            for &yy in ys {
                for &xx in xs {
                    if !self.is_valid(xx, yy) {
                        return None;
                    }
                }
            }
        }
        Some(v)
    }

    /// Rotates by 90° clockwise (in display orientation, y pointing down).
    pub fn rotate90(&self) -> Image {
        let (w, h) = (self.width, self.height);
        let mut data = vec![0.0; w * h];
        let mut mask = self.mask.as_ref().map(|_| vec![false; w * h]);
        for y in 0..h {
            for x in 0..w {
                // (x, y) -> (h-1-y, x) in the rotated (h wide, w tall) image.
                let dst = x * h + (h - 1 - y);
                data[dst] = self.get(x, y);
                if let Some(m) = mask.as_mut() {
                    m[dst] = self.is_valid(x, y);
                }
            }
        }
        Image {
            width: h,
            height: w,
            data,
            mask,
        }
    }
}
