//! Texture classification with heterogeneous window patterns.
//!
//! An image is tiled into small windows, each described by 32 co-occurrence
//! statistics. The windows of one image are clustered into `k` patterns, the
//! outlying windows of each pattern are trimmed, and the image is summarized by
//! its pattern means. Two images are compared by the cheapest one-to-one
//! matching of their patterns. A whole-image descriptor serves as the baseline.

pub mod benchmark;
pub mod classify;
pub mod config;
pub mod error;
pub mod features;
pub mod glcm;
pub mod gray;
pub mod haralick;
pub mod manifest;
pub mod matching;
pub mod pattern;
pub mod pgm;
pub mod store;
pub mod synth;
pub mod window;

pub use classify::{image_distance, knn_classify, plan_folds, FoldPlan, Method};
pub use config::{MethodSelection, RunConfig};
pub use error::{Error, ErrorKind, Result};
pub use glcm::{compute_glcm, glcm_marginals, Angle, Glcm, GlcmSpec, Marginals};
pub use gray::{load_grayscale, load_video_frames, QuantizedImage};
pub use haralick::{describe, Descriptor32};
pub use manifest::{read_manifest, CorpusEntry, EntryKind, Manifest};
pub use matching::{match_signatures, pattern_distance, MatchResult};
pub use pattern::{
    build_signature, cluster_windows, fit_normalization, trim_survivors, ImageSignature,
    NormalizationStats, PatternSignature, SegmentationMap, SignatureParams,
};
pub use window::{decompose, pool_video, WindowedImage};
