//! Per-model non-maximum suppression and cross-model detection fusion.
//!
//! Fusion clusters overlapping same-class boxes greedily in descending
//! confidence, then averages each cluster into one detection, either as
//! a plain arithmetic mean or as a confidence-weighted mean whose
//! confidence is scaled by how many of the ensemble's models
//! contributed. The whole pipeline is deterministic: confidence ties
//! break on box geometry, and output order follows frame address and
//! class.

use crate::bbox::{iou, BoundingBox};
use crate::detection::{ClassId, Detection, FrameAddress};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

pub const DEFAULT_CLUSTER_IOU: f64 = 0.55;
pub const DEFAULT_SKIP_THRESHOLD: f64 = 0.0;
pub const DEFAULT_NMS_IOU: f64 = 0.5;

#[derive(Debug, Error)]
pub enum FusionError {
    #[error("IoU threshold must lie in [0, 1] (got {0})")]
    ThresholdOutOfRange(f64),
    #[error("detections span more than one frame address")]
    MixedFrameAddresses,
    #[error("fusion needs at least one model output")]
    NoModels,
    #[error("model id {0:?} appears more than once")]
    DuplicateModelId(String),
    #[error("an ensemble holds 1 to 5 models (got {0})")]
    ManifestSize(usize),
    #[error("model {model_id:?}: {field} must be positive")]
    NonPositiveField {
        model_id: String,
        field: &'static str,
    },
    #[error("model {model_id:?}: iou threshold must lie in (0, 1] (got {value})")]
    ManifestIouOutOfRange { model_id: String, value: f64 },
    #[error("manifest is not valid JSON: {0}")]
    ManifestJson(#[from] serde_json::Error),
}

/// The detections one model produced, tagged with its identity.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelOutput {
    pub model_id: String,
    pub detections: Vec<Detection>,
}

impl ModelOutput {
    pub fn new(model_id: impl Into<String>, detections: Vec<Detection>) -> Self {
        Self {
            model_id: model_id.into(),
            detections,
        }
    }
}

/// How a cluster of overlapping boxes collapses into one detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FusionMode {
    /// Arithmetic mean of member coordinates and confidences.
    Mean,
    /// Confidence-weighted mean of coordinates; confidence is the mean
    /// member confidence scaled by (distinct contributing models /
    /// ensemble size), so boxes seen by fewer models score lower.
    #[default]
    Weighted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionConfig {
    iou_cluster_threshold: f64,
    mode: FusionMode,
    skip_threshold: f64,
}

impl FusionConfig {
    pub fn new(
        iou_cluster_threshold: f64,
        mode: FusionMode,
        skip_threshold: f64,
    ) -> Result<Self, FusionError> {
        for t in [iou_cluster_threshold, skip_threshold] {
            if !(0.0..=1.0).contains(&t) {
                return Err(FusionError::ThresholdOutOfRange(t));
            }
        }
        Ok(Self {
            iou_cluster_threshold,
            mode,
            skip_threshold,
        })
    }

    pub fn iou_cluster_threshold(&self) -> f64 {
        self.iou_cluster_threshold
    }

    pub fn mode(&self) -> FusionMode {
        self.mode
    }

    pub fn skip_threshold(&self) -> f64 {
        self.skip_threshold
    }
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            iou_cluster_threshold: DEFAULT_CLUSTER_IOU,
            mode: FusionMode::default(),
            skip_threshold: DEFAULT_SKIP_THRESHOLD,
        }
    }
}

/// Greedy non-maximum suppression over one frame's detections: walk in
/// descending confidence and keep a detection iff its IoU with every
/// already-kept detection of the same class stays below `iou_threshold`.
/// Kept detections come back in that walk order.
pub fn nms(dets: &[Detection], iou_threshold: f64) -> Result<Vec<Detection>, FusionError> {
    if !(0.0..=1.0).contains(&iou_threshold) {
        return Err(FusionError::ThresholdOutOfRange(iou_threshold));
    }
    if let Some(first) = dets.first() {
        if dets.iter().any(|d| d.addr != first.addr) {
            return Err(FusionError::MixedFrameAddresses);
        }
    }
    let mut ordered: Vec<&Detection> = dets.iter().collect();
    ordered.sort_by(|a, b| Detection::ranking_order(a, b));
    let mut kept: Vec<Detection> = Vec::new();
    for det in ordered {
        let suppressed = kept
            .iter()
            .any(|k| k.class == det.class && iou(&k.bbox, &det.bbox) >= iou_threshold);
        if !suppressed {
            kept.push(*det);
        }
    }
    Ok(kept)
}

/// [`nms`] applied independently to every frame of a mixed detection
/// list; output is grouped by ascending frame address.
pub fn nms_per_frame(
    dets: &[Detection],
    iou_threshold: f64,
) -> Result<Vec<Detection>, FusionError> {
    let mut by_frame: BTreeMap<FrameAddress, Vec<Detection>> = BTreeMap::new();
    for det in dets {
        by_frame.entry(det.addr).or_default().push(*det);
    }
    let mut out = Vec::with_capacity(dets.len());
    for frame_dets in by_frame.values() {
        out.extend(nms(frame_dets, iou_threshold)?);
    }
    Ok(out)
}

struct Cluster {
    members: Vec<(usize, Detection)>,
    fused: Detection,
}

/// Fuses the detections of several models into one detection list.
///
/// Within each (frame, class) group, detections are walked in the
/// deterministic confidence order and each joins the first cluster
/// whose current fused box overlaps it with IoU at or above the cluster
/// threshold, or opens a new cluster. Fused detections with confidence
/// below `skip_threshold` are dropped. Output is sorted by frame
/// address, then class, then cluster creation order.
pub fn fuse(outputs: &[ModelOutput], cfg: &FusionConfig) -> Result<Vec<Detection>, FusionError> {
    if outputs.is_empty() {
        return Err(FusionError::NoModels);
    }
    for (i, out) in outputs.iter().enumerate() {
        if outputs[..i].iter().any(|o| o.model_id == out.model_id) {
            return Err(FusionError::DuplicateModelId(out.model_id.clone()));
        }
    }
    let total_models = outputs.len();

    let mut groups: BTreeMap<(FrameAddress, ClassId), Vec<(usize, Detection)>> = BTreeMap::new();
    for (model_idx, output) in outputs.iter().enumerate() {
        for det in &output.detections {
            groups
                .entry((det.addr, det.class))
                .or_default()
                .push((model_idx, *det));
        }
    }

    let mut fused = Vec::new();
    for mut members in groups.into_values() {
        members.sort_by(|(am, a), (bm, b)| Detection::ranking_order(a, b).then(am.cmp(bm)));
        let mut clusters: Vec<Cluster> = Vec::new();
        for (model_idx, det) in members {
            match clusters
                .iter_mut()
                .find(|c| iou(&c.fused.bbox, &det.bbox) >= cfg.iou_cluster_threshold)
            {
                Some(cluster) => {
                    cluster.members.push((model_idx, det));
                    cluster.fused = collapse(&cluster.members, cfg.mode, total_models);
                }
                None => clusters.push(Cluster {
                    fused: collapse(&[(model_idx, det)], cfg.mode, total_models),
                    members: vec![(model_idx, det)],
                }),
            }
        }
        fused.extend(
            clusters
                .into_iter()
                .map(|c| c.fused)
                .filter(|d| d.confidence() >= cfg.skip_threshold),
        );
    }
    Ok(fused)
}

/// Averages a cluster's members into its fused detection.
fn collapse(members: &[(usize, Detection)], mode: FusionMode, total_models: usize) -> Detection {
    let n = members.len() as f64;
    let mean_conf = members.iter().map(|(_, d)| d.confidence()).sum::<f64>() / n;
    let (bbox, confidence) = match mode {
        FusionMode::Mean => {
            let bbox = weighted_box(members, |_| 1.0);
            (bbox, mean_conf)
        }
        FusionMode::Weighted => {
            let total_weight: f64 = members.iter().map(|(_, d)| d.confidence()).sum();
            // all-zero confidences carry no weight; fall back to the mean
            let bbox = if total_weight > 0.0 {
                weighted_box(members, |d| d.confidence())
            } else {
                weighted_box(members, |_| 1.0)
            };
            let mut model_ids: Vec<usize> = members.iter().map(|(m, _)| *m).collect();
            model_ids.sort_unstable();
            model_ids.dedup();
            let support = model_ids.len() as f64 / total_models as f64;
            (bbox, mean_conf * support)
        }
    };
    let (addr, class) = (members[0].1.addr, members[0].1.class);
    Detection::new(addr, bbox, class, confidence).expect("averaged confidence stays in [0, 1]")
}

fn weighted_box(members: &[(usize, Detection)], weight: impl Fn(&Detection) -> f64) -> BoundingBox {
    let mut acc = [0f64; 4];
    let mut total = 0f64;
    for (_, det) in members {
        let w = weight(det);
        acc[0] += w * det.bbox.left();
        acc[1] += w * det.bbox.top();
        acc[2] += w * det.bbox.width();
        acc[3] += w * det.bbox.height();
        total += w;
    }
    BoundingBox::new(
        acc[0] / total,
        acc[1] / total,
        acc[2] / total,
        acc[3] / total,
    )
    .expect("positive-weight average of valid boxes is valid")
}

/// Training metadata for one ensemble member. Descriptive only; fusion
/// never reads these numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelTrainingRecord {
    pub model_id: String,
    pub learning_rate: f64,
    pub image_size: u32,
    pub optimizer: String,
    pub epochs: u32,
    pub momentum: f64,
    pub weight_decay: f64,
    pub warmup_epochs: u32,
    pub iou_threshold: f64,
}

/// The ensemble roster: one training record per model, 1 to 5 entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ManifestWire")]
pub struct EnsembleManifest {
    models: Vec<ModelTrainingRecord>,
}

#[derive(Deserialize)]
struct ManifestWire {
    models: Vec<ModelTrainingRecord>,
}

impl TryFrom<ManifestWire> for EnsembleManifest {
    type Error = FusionError;

    fn try_from(wire: ManifestWire) -> Result<Self, FusionError> {
        EnsembleManifest::new(wire.models)
    }
}

impl EnsembleManifest {
    pub fn new(models: Vec<ModelTrainingRecord>) -> Result<Self, FusionError> {
        if models.is_empty() || models.len() > 5 {
            return Err(FusionError::ManifestSize(models.len()));
        }
        for (i, m) in models.iter().enumerate() {
            if models[..i].iter().any(|o| o.model_id == m.model_id) {
                return Err(FusionError::DuplicateModelId(m.model_id.clone()));
            }
            let positive_reals = [
                (m.learning_rate, "learning_rate"),
                (m.momentum, "momentum"),
                (m.weight_decay, "weight_decay"),
            ];
            for (value, field) in positive_reals {
                if !(value.is_finite() && value > 0.0) {
                    return Err(FusionError::NonPositiveField {
                        model_id: m.model_id.clone(),
                        field,
                    });
                }
            }
            let positive_counts = [
                (m.image_size, "image_size"),
                (m.epochs, "epochs"),
                (m.warmup_epochs, "warmup_epochs"),
            ];
            for (value, field) in positive_counts {
                if value == 0 {
                    return Err(FusionError::NonPositiveField {
                        model_id: m.model_id.clone(),
                        field,
                    });
                }
            }
            if !(m.iou_threshold > 0.0 && m.iou_threshold <= 1.0) {
                return Err(FusionError::ManifestIouOutOfRange {
                    model_id: m.model_id.clone(),
                    value: m.iou_threshold,
                });
            }
        }
        Ok(Self { models })
    }

    pub fn models(&self) -> &[ModelTrainingRecord] {
        &self.models
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, FusionError> {
        Ok(serde_json::from_str(text)?)
    }
}
