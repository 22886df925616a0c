//! Spatial-embedding detection for labeled graphs.
//!
//! The pipeline computes four local degree statistics per node, whitens them
//! with a PCA fit so Euclidean distance becomes Mahalanobis distance, and then
//! scores each label group (country, region) against a random-set null model
//! whose spread follows a fitted power law in the set size.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! at the bottom of this file pin the common `f64` instantiation.

pub mod error;
pub mod feature_space;
pub mod features;
pub mod fmt;
pub mod graph;
pub mod rng;
pub mod scalar;
pub mod significance;
pub mod synth;

pub use error::{Error, Result};
pub use feature_space::{
    distance, fit_embedding, mean_pairwise_distance, EmbeddedPoint, EmbeddingModel,
    MeanDistanceResult,
};
pub use features::{compute_all_features, global_degree_stats, node_feature_vector};
pub use features::{FeatureTable, GlobalDegreeStats, NodeFeatures};
pub use graph::{build_graph, parse_geo, parse_links, EdgeList, GeoLabels, GeoRecords, Graph, Level};
pub use scalar::Scalar;
pub use significance::{
    fit_null_scaling, group_mean_distance, sample_null, summarize, z_score, GroupTestResult,
    NullModel, NullSamples, NullSamplingConfig, SignificanceSummary,
};

pub type FeatureTable64 = FeatureTable<f64>;
pub type FeatureTable32 = FeatureTable<f32>;
pub type NodeFeatures64 = NodeFeatures<f64>;
pub type EmbeddingModel64 = EmbeddingModel<f64>;
pub type EmbeddingModel32 = EmbeddingModel<f32>;
pub type EmbeddedPoint64 = EmbeddedPoint<f64>;
pub type NullSamples64 = NullSamples<f64>;
pub type NullModel64 = NullModel<f64>;
pub type GroupTestResult64 = GroupTestResult<f64>;
