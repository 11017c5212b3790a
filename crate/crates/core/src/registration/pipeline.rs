use std::fmt;

use serde::{Deserialize, Serialize};

use super::matching::match_descriptors;
use super::protocol::registration_error;
use super::ransac::{ransac_rigid, RansacConfig};
use super::sift::{extract_features, Features, SiftConfig};
use super::transform::{Point, RigidTransform};
use crate::error::Result;
use crate::image::Image;

/// The pipeline stage that left nothing to work with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureStage {
    FixedFeatures,
    MovingFeatures,
    Matching,
    Consensus,
}

impl fmt::Display for FailureStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FailureStage::FixedFeatures => "fixed_features",
            FailureStage::MovingFeatures => "moving_features",
            FailureStage::Matching => "matching",
            FailureStage::Consensus => "consensus",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RegistrationDiagnostics {
    pub keypoints_fixed: usize,
    pub keypoints_moving: usize,
    pub matches: usize,
    pub inliers: usize,
    pub failure: Option<FailureStage>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegistrationResult {
    /// Estimated fixed→moving transform pivoting about the image centre, or
    /// `None` when registration failed.
    pub transform: Option<RigidTransform>,
    pub diagnostics: RegistrationDiagnostics,
}

impl RegistrationResult {
    /// Corner error against `ground_truth`; `+∞` for a failed registration.
    pub fn error_against(&self, ground_truth: &RigidTransform, width: usize, height: usize) -> f64 {
        self.transform.map_or(f64::INFINITY, |t| {
            registration_error(&t, ground_truth, width, height)
        })
    }
}

/// Matches precomputed features and fits `moving ≈ T(fixed)`.
pub fn register_features(
    fixed: &Features,
    moving: &Features,
    center: Point,
    sift: &SiftConfig,
    ransac: &RansacConfig,
) -> Result<RegistrationResult> {
    let mut diagnostics = RegistrationDiagnostics {
        keypoints_fixed: fixed.len(),
        keypoints_moving: moving.len(),
        ..Default::default()
    };
    let fail = |mut d: RegistrationDiagnostics, stage| {
        d.failure = Some(stage);
        Ok(RegistrationResult {
            transform: None,
            diagnostics: d,
        })
    };
    if fixed.is_empty() {
        return fail(diagnostics, FailureStage::FixedFeatures);
    }
    if moving.is_empty() {
        return fail(diagnostics, FailureStage::MovingFeatures);
    }
    let matches = match_descriptors(
        &fixed.descriptors,
        &moving.descriptors,
        sift.ratio_test_threshold,
    );
    diagnostics.matches = matches.len();
    if matches.len() < 2 {
        return fail(diagnostics, FailureStage::Matching);
    }
    let pa: Vec<Point> = matches
        .iter()
        .map(|&(i, _)| [fixed.keypoints[i].x, fixed.keypoints[i].y])
        .collect();
    let pb: Vec<Point> = matches
        .iter()
        .map(|&(_, j)| [moving.keypoints[j].x, moving.keypoints[j].y])
        .collect();
    let outcome = ransac_rigid(&pa, &pb, ransac)?;
    diagnostics.inliers = outcome.inliers.len();
    match outcome.transform {
        Some(t) => Ok(RegistrationResult {
            transform: Some(t.recentered(center)),
            diagnostics,
        }),
        None => fail(diagnostics, FailureStage::Consensus),
    }
}

/// Detect, describe, match and fit. Failures at any stage are reported in
/// the result rather than as errors; errors are reserved for invalid input.
pub fn register_pair(
    fixed: &Image,
    moving: &Image,
    sift: &SiftConfig,
    ransac: &RansacConfig,
) -> Result<RegistrationResult> {
    fixed.check_same_size(moving, "register_pair")?;
    let ff = extract_features(fixed, sift)?;
    let fm = extract_features(moving, sift)?;
    register_features(
        &ff,
        &fm,
        RigidTransform::image_center(fixed.width(), fixed.height()),
        sift,
        ransac,
    )
}
