use rand::Rng;
use serde::{Deserialize, Serialize};

use super::transform::{Point, RigidTransform};
use crate::error::{Error, Result};

/// Point pairs closer than this are treated as coincident.
const DEGENERATE_SEPARATION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RansacConfig {
    pub iterations: usize,
    pub inlier_threshold_px: f64,
    pub min_inliers: usize,
    pub seed: u64,
}

impl Default for RansacConfig {
    fn default() -> Self {
        RansacConfig {
            iterations: 1000,
            inlier_threshold_px: 5.0,
            min_inliers: 4,
            seed: 0,
        }
    }
}

impl RansacConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Config("RANSAC needs at least one iteration".into()));
        }
        if !(self.inlier_threshold_px > 0.0 && self.inlier_threshold_px.is_finite()) {
            return Err(Error::Config(
                "RANSAC inlier threshold must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Best consensus found. `transform` is `None` when that consensus is
/// smaller than `min_inliers`; `inliers` is reported either way.
#[derive(Debug, Clone, PartialEq)]
pub struct RansacOutcome {
    pub transform: Option<RigidTransform>,
    pub inliers: Vec<usize>,
}

/// Exact rigid transform (pivot at the origin) taking `a0 → b0` and the
/// direction `a0→a1` onto `b0→b1`, translated so the pair centroids
/// coincide. `None` for coincident points.
pub fn rigid_from_two(a: [Point; 2], b: [Point; 2]) -> Option<RigidTransform> {
    let va = [a[1][0] - a[0][0], a[1][1] - a[0][1]];
    let vb = [b[1][0] - b[0][0], b[1][1] - b[0][1]];
    if va[0].hypot(va[1]) < DEGENERATE_SEPARATION || vb[0].hypot(vb[1]) < DEGENERATE_SEPARATION {
        return None;
    }
    let theta = vb[1].atan2(vb[0]) - va[1].atan2(va[0]);
    let ca = [0.5 * (a[0][0] + a[1][0]), 0.5 * (a[0][1] + a[1][1])];
    let cb = [0.5 * (b[0][0] + b[1][0]), 0.5 * (b[0][1] + b[1][1])];
    Some(with_centroids(super::transform::wrap_angle(theta), ca, cb))
}

fn with_centroids(theta: f64, ca: Point, cb: Point) -> RigidTransform {
    let (s, c) = theta.sin_cos();
    RigidTransform {
        theta,
        tx: cb[0] - (c * ca[0] - s * ca[1]),
        ty: cb[1] - (s * ca[0] + c * ca[1]),
        cx: 0.0,
        cy: 0.0,
    }
}

/// Least-squares rotation + translation (no scale, no reflection) mapping
/// `a[i]` onto `b[i]`.
pub fn procrustes_rigid(a: &[Point], b: &[Point]) -> Result<RigidTransform> {
    if a.len() != b.len() {
        return Err(Error::shape("procrustes_rigid", a.len(), b.len()));
    }
    if a.len() < 2 {
        return Err(Error::Contract(
            "a rigid fit needs at least 2 correspondences".into(),
        ));
    }
    let n = a.len() as f64;
    let mean = |pts: &[Point]| {
        let s = pts
            .iter()
            .fold([0.0, 0.0], |acc, p| [acc[0] + p[0], acc[1] + p[1]]);
        [s[0] / n, s[1] / n]
    };
    let (ca, cb) = (mean(a), mean(b));
    let (mut dot, mut cross) = (0.0, 0.0);
    for (p, q) in a.iter().zip(b) {
        let (px, py) = (p[0] - ca[0], p[1] - ca[1]);
        let (qx, qy) = (q[0] - cb[0], q[1] - cb[1]);
        dot += px * qx + py * qy;
        cross += px * qy - py * qx;
    }
    if dot == 0.0 && cross == 0.0 {
        return Err(Error::Numerical(
            "correspondences do not determine a rotation".into(),
        ));
    }
    Ok(with_centroids(cross.atan2(dot), ca, cb))
}

fn inliers_of(t: &RigidTransform, a: &[Point], b: &[Point], threshold_sq: f64) -> Vec<usize> {
    (0..a.len())
        .filter(|&i| {
            let p = t.apply(a[i]);
            (p[0] - b[i][0]).powi(2) + (p[1] - b[i][1]).powi(2) <= threshold_sq
        })
        .collect()
}

/// Two-point RANSAC for `b ≈ T(a)`, refit on the largest consensus.
/// The returned transform pivots about the origin.
pub fn ransac_rigid(a: &[Point], b: &[Point], cfg: &RansacConfig) -> Result<RansacOutcome> {
    cfg.validate()?;
    if a.len() != b.len() {
        return Err(Error::shape("ransac_rigid", a.len(), b.len()));
    }
    if a.len() < 2 {
        return Err(Error::Contract(format!(
            "RANSAC needs at least 2 matches, got {}",
            a.len()
        )));
    }
    let n = a.len();
    let threshold_sq = cfg.inlier_threshold_px * cfg.inlier_threshold_px;
    let mut rng = crate::rng::seeded(cfg.seed);
    let mut best: Vec<usize> = Vec::new();
    for _ in 0..cfg.iterations {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let Some(t) = rigid_from_two([a[i], a[j]], [b[i], b[j]]) else {
            continue;
        };
        let inliers = inliers_of(&t, a, b, threshold_sq);
        if inliers.len() > best.len() {
            best = inliers;
        }
    }
    if best.len() < cfg.min_inliers.max(2) {
        return Ok(RansacOutcome {
            transform: None,
            inliers: best,
        });
    }
    let pick = |pts: &[Point], idx: &[usize]| idx.iter().map(|&k| pts[k]).collect::<Vec<_>>();
    let refit = procrustes_rigid(&pick(a, &best), &pick(b, &best))?;
    let final_inliers = inliers_of(&refit, a, b, threshold_sq);
    // A refit that loses support falls back to the consensus it came from.
    let inliers = if final_inliers.len() >= best.len() {
        final_inliers
    } else {
        best
    };
    Ok(RansacOutcome {
        transform: Some(refit),
        inliers,
    })
}
