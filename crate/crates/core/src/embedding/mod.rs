//! Embedding-space analysis: pairwise dissimilarities, planar MDS under
//! Sammon's stress, and covariance spectra for spotting collapsed
//! dimensions.

mod dissimilarity;
mod mds;
mod sammon;
mod spectrum;

pub use dissimilarity::{
    pooled_embedding_dissimilarity, pooled_image_dissimilarity, DissimilarityMatrix,
    DissimilarityMetric, ItemLabel, PooledDissimilarity,
};
pub use mds::{classical_mds, mds_fit, MdsConfig, MdsInit, MdsSolution};
pub use sammon::{sammon_gradient, sammon_stress, SammonGradient, ZERO_WEIGHT_FRACTION};
pub use spectrum::{
    collapse_metrics, sv_spectrum, CollapseMetrics, SvSpectrum, DEFAULT_COLLAPSE_EPSILON,
};
