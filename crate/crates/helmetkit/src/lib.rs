//! Model-agnostic building blocks for a helmet-violation detection
//! pipeline on motorcycle traffic video.
//!
//! The crate covers everything around the detector itself:
//!
//! - [`bbox`]: box geometry, IoU, clipping, normalized-center
//!   conversions.
//! - [`detection`]: the seven-class rider/helmet schema and detection
//!   records addressed by (video, frame).
//! - [`imaging`]: 8-bit RGB rasters, binary PPM I/O, and the pixel
//!   transforms the augmentations build on.
//! - [`augment`]: label-aware flip, rotation, blur, mosaic, and the
//!   seeded train/validation split.
//! - [`fusion`]: per-model non-maximum suppression and cross-model
//!   detection fusion.
//! - [`eval`]: greedy matching, precision recall curves, average
//!   precision with all-point interpolation, and the class-mean score.
//! - [`video`]: frame sequences on disk and median background
//!   estimation.
//! - [`submission`]: bit-exact challenge submission and ground-truth
//!   text I/O plus rule validation.
//! - [`rng`]: the seeded generator every randomized operation draws
//!   from, chosen for cross-platform reproducibility.
//!
//! Everything randomized takes an explicit seed and everything else is
//! pure, so identical inputs give identical outputs on any platform.

pub mod augment;
pub mod bbox;
pub mod detection;
pub mod eval;
pub mod fusion;
pub mod imaging;
pub mod rng;
pub mod submission;
pub mod video;

pub use augment::{
    augment_blur, augment_flip, augment_rotate, augment_rotate_arbitrary, mosaic, split_dataset,
    AugmentError, LabeledSample, MosaicConfig,
};
pub use bbox::{
    clip_box, from_normalized_center, iou, to_normalized_center, BoundingBox, FrameDims,
    GeometryError,
};
pub use detection::{ClassId, Detection, FrameAddress, GroundTruthRecord, RecordError};
pub use eval::{
    average_precision, evaluate, evaluate_per_frame, match_detections, pr_curve, EvalError,
    EvalReport, MatchResult, PRCurve,
};
pub use fusion::{
    fuse, nms, nms_per_frame, EnsembleManifest, FusionConfig, FusionError, FusionMode, ModelOutput,
    ModelTrainingRecord,
};
pub use imaging::{ImageBuffer, ImagingError};
pub use rng::SplitMix64;
pub use submission::{
    emit_ground_truth, emit_submission, parse_ground_truth, parse_submission, validate_submission,
    SubmissionError, SubmissionFile, ValidationReport,
};
pub use video::{median_background, sample_frame_indices, FrameSequence, VideoError};
