//! Detection scoring: greedy matching against ground truth, precision
//! recall curves, and mean average precision.
//!
//! Average precision uses all-point interpolation: the area under the
//! monotone (non-increasing) envelope of the precision recall curve.
//! The envelope sum is carried in exact rational arithmetic and
//! converted to f64 once per class, so analytically clean fixtures
//! score their exact values.

use crate::bbox::iou;
use crate::detection::{ClassId, Detection, FrameAddress, GroundTruthRecord};
use num::{BigInt, BigRational, ToPrimitive, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

pub const DEFAULT_MATCH_IOU: f64 = 0.5;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("IoU threshold must lie in [0, 1] (got {0})")]
    ThresholdOutOfRange(f64),
    #[error("ground truth is empty; nothing can be scored")]
    EmptyGroundTruth,
}

/// Outcome for one detection, in ranked processing order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DetectionOutcome {
    pub is_true_positive: bool,
    /// Index into the ground-truth slice this detection claimed, when TP.
    pub matched_gt: Option<usize>,
}

/// Result of matching one (video, frame, class) group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchResult {
    /// One outcome per detection, ordered by [`Detection::ranking_order`].
    pub outcomes: Vec<DetectionOutcome>,
    /// Ground-truth boxes no detection claimed.
    pub unmatched_gt: usize,
}

impl MatchResult {
    pub fn true_positives(&self) -> usize {
        self.outcomes.iter().filter(|o| o.is_true_positive).count()
    }
}

/// Greedy matching within one (video, frame, class) group: detections
/// are walked in ranked order and each claims the unmatched ground
/// truth with the highest IoU (lowest index on ties) when that IoU
/// reaches `iou_threshold`; otherwise it is a false positive. Each
/// ground truth is claimed at most once.
pub fn match_detections(
    dets: &[Detection],
    gts: &[GroundTruthRecord],
    iou_threshold: f64,
) -> MatchResult {
    let mut ordered: Vec<&Detection> = dets.iter().collect();
    ordered.sort_by(|a, b| Detection::ranking_order(a, b));
    let mut claimed = vec![false; gts.len()];
    let mut outcomes = Vec::with_capacity(dets.len());
    for det in ordered {
        let mut best: Option<(usize, f64)> = None;
        for (i, gt) in gts.iter().enumerate() {
            if claimed[i] {
                continue;
            }
            let overlap = iou(&det.bbox, &gt.bbox);
            if best.is_none_or(|(_, b)| overlap > b) {
                best = Some((i, overlap));
            }
        }
        match best {
            Some((i, overlap)) if overlap >= iou_threshold => {
                claimed[i] = true;
                outcomes.push(DetectionOutcome {
                    is_true_positive: true,
                    matched_gt: Some(i),
                });
            }
            _ => outcomes.push(DetectionOutcome {
                is_true_positive: false,
                matched_gt: None,
            }),
        }
    }
    let unmatched_gt = claimed.iter().filter(|c| !**c).count();
    MatchResult {
        outcomes,
        unmatched_gt,
    }
}

/// Precision recall curve over a ranked TP/FP sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct PRCurve {
    points: Vec<(f64, f64)>,
    flags: Vec<bool>,
    n_gt: usize,
}

/// Builds the curve from ranked TP/FP flags: after the k-th detection,
/// precision is TP/k and recall is TP/n_gt. With no ground truth the
/// recall coordinate is fixed at zero.
pub fn pr_curve(flags: &[bool], n_gt: usize) -> PRCurve {
    let mut points = Vec::with_capacity(flags.len());
    let mut tp = 0usize;
    for (k, &flag) in flags.iter().enumerate() {
        if flag {
            tp += 1;
        }
        let precision = tp as f64 / (k + 1) as f64;
        let recall = if n_gt == 0 {
            0.0
        } else {
            tp as f64 / n_gt as f64
        };
        points.push((recall, precision));
    }
    PRCurve {
        points,
        flags: flags.to_vec(),
        n_gt,
    }
}

impl PRCurve {
    /// `(recall, precision)` per rank, recall non-decreasing.
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn n_gt(&self) -> usize {
        self.n_gt
    }
}

/// Area under the monotone precision envelope (all-point
/// interpolation). Returns `None` when the class has no ground truth:
/// such classes are excluded from averaging rather than scored zero.
pub fn average_precision(curve: &PRCurve) -> Option<f64> {
    if curve.n_gt == 0 {
        return None;
    }
    // recall advances by exactly 1/n_gt at each TP rank, so the area is
    // the sum of envelope precisions at TP ranks divided by n_gt; the
    // envelope at rank k is the best precision at any rank >= k
    let flags = &curve.flags;
    let mut cum_tp = Vec::with_capacity(flags.len());
    let mut tp = 0usize;
    for &flag in flags {
        if flag {
            tp += 1;
        }
        cum_tp.push(tp);
    }
    let mut sum = BigRational::zero();
    let mut best = (0u64, 1u64);
    for k in (0..flags.len()).rev() {
        let frac = (cum_tp[k] as u64, k as u64 + 1);
        if frac.0 as u128 * best.1 as u128 > best.0 as u128 * frac.1 as u128 {
            best = frac;
        }
        if flags[k] {
            sum += BigRational::new(BigInt::from(best.0), BigInt::from(best.1));
        }
    }
    let ap = sum / BigRational::from_integer(BigInt::from(curve.n_gt as u64));
    Some(ap.to_f64().expect("finite rational in [0, 1]"))
}

/// Per-class scores and their mean.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    per_class: Vec<(ClassId, Option<f64>)>,
    map: f64,
}

impl EvalReport {
    fn from_aps(per_class: Vec<(ClassId, Option<f64>)>) -> Self {
        let scored: Vec<f64> = per_class.iter().filter_map(|(_, ap)| *ap).collect();
        let map = if scored.is_empty() {
            0.0
        } else {
            scored.iter().sum::<f64>() / scored.len() as f64
        };
        Self { per_class, map }
    }

    /// AP per class in schema order; `None` marks classes with no
    /// ground truth, which do not enter the mean.
    pub fn per_class(&self) -> &[(ClassId, Option<f64>)] {
        &self.per_class
    }

    pub fn ap(&self, class: ClassId) -> Option<f64> {
        self.per_class
            .iter()
            .find(|(c, _)| *c == class)
            .and_then(|(_, ap)| *ap)
    }

    /// Number of classes that entered the mean.
    pub fn classes_scored(&self) -> usize {
        self.per_class.iter().filter(|(_, ap)| ap.is_some()).count()
    }

    /// Arithmetic mean of the scored per-class APs.
    pub fn map(&self) -> f64 {
        self.map
    }

    /// Human-readable report: one `class AP` line per scored class and
    /// a final `mAP` line, six decimal places.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (class, ap) in &self.per_class {
            match ap {
                Some(ap) => {
                    out.push_str(&format!("{} {:.6}\n", class.id(), ap));
                }
                None => {
                    out.push_str(&format!("{} excluded (no ground truth)\n", class.id()));
                }
            }
        }
        out.push_str(&format!("mAP {:.6}\n", self.map));
        out
    }

    /// Machine-readable `key=value` lines mirroring [`Self::to_text`].
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        for (class, ap) in &self.per_class {
            if let Some(ap) = ap {
                out.push_str(&format!("ap_{}={:.6}\n", class.id(), ap));
            }
        }
        out.push_str(&format!("classes_scored={}\n", self.classes_scored()));
        out.push_str(&format!("map={:.6}\n", self.map));
        out
    }
}

/// Scores a detection list against ground truth: per class, detections
/// are matched frame by frame, the outcomes are pooled across all
/// videos and frames in ranked order (frame address breaking exact
/// ties), and one AP is computed per class. The mean runs over classes
/// that appear in the ground truth.
pub fn evaluate(
    dets: &[Detection],
    gts: &[GroundTruthRecord],
    iou_threshold: f64,
) -> Result<EvalReport, EvalError> {
    if !(0.0..=1.0).contains(&iou_threshold) {
        return Err(EvalError::ThresholdOutOfRange(iou_threshold));
    }
    if gts.is_empty() {
        return Err(EvalError::EmptyGroundTruth);
    }
    let mut per_class = Vec::with_capacity(ClassId::ALL.len());
    for class in ClassId::ALL {
        let class_dets: Vec<Detection> =
            dets.iter().filter(|d| d.class == class).copied().collect();
        let class_gts: Vec<GroundTruthRecord> =
            gts.iter().filter(|g| g.class == class).copied().collect();
        if class_gts.is_empty() {
            per_class.push((class, None));
            continue;
        }
        let flags = pooled_flags(&class_dets, &class_gts, iou_threshold);
        let curve = pr_curve(&flags, class_gts.len());
        per_class.push((class, average_precision(&curve)));
    }
    Ok(EvalReport::from_aps(per_class))
}

/// Matches per frame and pools the flags across frames in global
/// ranked order.
fn pooled_flags(dets: &[Detection], gts: &[GroundTruthRecord], iou_threshold: f64) -> Vec<bool> {
    let mut gt_by_frame: BTreeMap<FrameAddress, Vec<GroundTruthRecord>> = BTreeMap::new();
    for gt in gts {
        gt_by_frame.entry(gt.addr).or_default().push(*gt);
    }
    let mut det_by_frame: BTreeMap<FrameAddress, Vec<Detection>> = BTreeMap::new();
    for det in dets {
        det_by_frame.entry(det.addr).or_default().push(*det);
    }
    let mut ranked: Vec<(Detection, bool)> = Vec::with_capacity(dets.len());
    for (addr, frame_dets) in det_by_frame {
        let empty = Vec::new();
        let frame_gts = gt_by_frame.get(&addr).unwrap_or(&empty);
        let result = match_detections(&frame_dets, frame_gts, iou_threshold);
        let mut ordered: Vec<&Detection> = frame_dets.iter().collect();
        ordered.sort_by(|a, b| Detection::ranking_order(a, b));
        for (det, outcome) in ordered.into_iter().zip(result.outcomes) {
            ranked.push((*det, outcome.is_true_positive));
        }
    }
    ranked.sort_by(|(a, _), (b, _)| Detection::ranking_order(a, b).then(a.addr.cmp(&b.addr)));
    ranked.into_iter().map(|(_, flag)| flag).collect()
}

/// Variant metric: one AP per frame, detections and ground truth pooled
/// over classes inside the frame (matching stays class-aware), averaged
/// over frames that contain at least one ground-truth box. Frames
/// without ground truth contribute nothing; with no such frames at all
/// the score is zero.
pub fn evaluate_per_frame(
    dets: &[Detection],
    gts: &[GroundTruthRecord],
    iou_threshold: f64,
) -> Result<f64, EvalError> {
    if !(0.0..=1.0).contains(&iou_threshold) {
        return Err(EvalError::ThresholdOutOfRange(iou_threshold));
    }
    let mut gt_by_frame: BTreeMap<FrameAddress, Vec<GroundTruthRecord>> = BTreeMap::new();
    for gt in gts {
        gt_by_frame.entry(gt.addr).or_default().push(*gt);
    }
    let mut det_by_frame: BTreeMap<FrameAddress, Vec<Detection>> = BTreeMap::new();
    for det in dets {
        det_by_frame.entry(det.addr).or_default().push(*det);
    }
    let mut total = 0.0;
    let mut frames = 0usize;
    for (addr, frame_gts) in &gt_by_frame {
        let empty = Vec::new();
        let frame_dets = det_by_frame.get(addr).unwrap_or(&empty);
        let mut ranked: Vec<(Detection, bool)> = Vec::with_capacity(frame_dets.len());
        for class in ClassId::ALL {
            let class_dets: Vec<Detection> = frame_dets
                .iter()
                .filter(|d| d.class == class)
                .copied()
                .collect();
            let class_gts: Vec<GroundTruthRecord> = frame_gts
                .iter()
                .filter(|g| g.class == class)
                .copied()
                .collect();
            let result = match_detections(&class_dets, &class_gts, iou_threshold);
            let mut ordered: Vec<&Detection> = class_dets.iter().collect();
            ordered.sort_by(|a, b| Detection::ranking_order(a, b));
            for (det, outcome) in ordered.into_iter().zip(result.outcomes) {
                ranked.push((*det, outcome.is_true_positive));
            }
        }
        ranked.sort_by(|(a, _), (b, _)| Detection::ranking_order(a, b).then(a.class.cmp(&b.class)));
        let flags: Vec<bool> = ranked.into_iter().map(|(_, flag)| flag).collect();
        let curve = pr_curve(&flags, frame_gts.len());
        total += average_precision(&curve).expect("frame has ground truth");
        frames += 1;
    }
    if frames == 0 {
        return Ok(0.0);
    }
    Ok(total / frames as f64)
}
