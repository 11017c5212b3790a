use crate::error::{Error, Result};
use crate::image::Image;

/// Mean squared intensity difference over the jointly valid pixels.
pub fn image_mse(a: &Image, b: &Image) -> Result<f64> {
    a.check_same_size(b, "image_mse")?;
    let idx = a.joint_valid(b);
    if idx.is_empty() {
        return Err(Error::Domain("images share no valid pixels".into()));
    }
    let (da, db) = (a.data(), b.data());
    let sum: f64 = idx.iter().map(|&i| (da[i] - db[i]) * (da[i] - db[i])).sum();
    Ok(sum / idx.len() as f64)
}

/// Pearson correlation of the two pixel populations (2-D correlation
/// coefficient) over the jointly valid pixels.
pub fn image_correlation(a: &Image, b: &Image) -> Result<f64> {
    a.check_same_size(b, "image_correlation")?;
    let idx = a.joint_valid(b);
    let (da, db) = (a.data(), b.data());
    let xs: Vec<f64> = idx.iter().map(|&i| da[i]).collect();
    let ys: Vec<f64> = idx.iter().map(|&i| db[i]).collect();
    pcc(&xs, &ys)
}

/// Pearson correlation coefficient, accumulated in a single streaming pass
/// of co-moment updates.
pub fn pcc(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::shape("pcc", x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(Error::Domain(format!(
            "correlation needs at least 2 samples, got {}",
            x.len()
        )));
    }
    let (mut mx, mut my) = (0.0, 0.0);
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (k, (&xi, &yi)) in x.iter().zip(y).enumerate() {
        let n = (k + 1) as f64;
        let dx = xi - mx;
        let dy = yi - my;
        mx += dx / n;
        my += dy / n;
        sxx += dx * (xi - mx);
        syy += dy * (yi - my);
        sxy += dx * (yi - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(Error::Domain(
            "correlation is undefined for a constant sequence".into(),
        ));
    }
    // sqrt(s·s) is exactly s, so identical inputs give exactly 1.
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Median of a sequence; the mean of the two middle values for even counts.
pub fn median(values: &[f64]) -> Option<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    })
}
