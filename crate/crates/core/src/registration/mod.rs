//! Feature-based rigid registration and the synthetic evaluation protocol.

mod matching;
mod pipeline;
mod protocol;
mod ransac;
mod sift;
mod transform;

pub use matching::match_descriptors;
pub use pipeline::{
    register_features, register_pair, FailureStage, RegistrationDiagnostics, RegistrationResult,
};
pub use protocol::{
    image_corners, pair_seed, registration_error, registration_success_rate, synthesize_test_pair,
    textured_image, threshold_from_fraction, warp,
};
pub use ransac::{procrustes_rigid, ransac_rigid, rigid_from_two, RansacConfig, RansacOutcome};
pub use sift::{
    compute_descriptor_stages, compute_descriptors, detect_keypoints, extract_features, Descriptor,
    DescriptorStages, Features, Keypoint, SiftConfig, DESCRIPTOR_LEN,
};
pub use transform::{wrap_angle, Point, RigidTransform};
