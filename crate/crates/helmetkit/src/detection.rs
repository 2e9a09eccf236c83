//! Detection records and the fixed seven-class rider/helmet schema.

use crate::bbox::BoundingBox;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RecordError {
    #[error("class id {0} outside 1..=7")]
    ClassOutOfRange(i64),
    #[error("video id must be >= 1")]
    VideoIdOutOfRange,
    #[error("frame number must be >= 1")]
    FrameOutOfRange,
    #[error("confidence {0} outside [0, 1]")]
    ConfidenceOutOfRange(f64),
}

/// The seven object classes: the motorcycle itself, then each rider
/// position split by helmet status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum ClassId {
    Motorcycle = 1,
    DriverWithHelmet = 2,
    DriverNoHelmet = 3,
    Passenger1WithHelmet = 4,
    Passenger1NoHelmet = 5,
    Passenger2WithHelmet = 6,
    Passenger2NoHelmet = 7,
}

impl ClassId {
    pub const ALL: [ClassId; 7] = [
        ClassId::Motorcycle,
        ClassId::DriverWithHelmet,
        ClassId::DriverNoHelmet,
        ClassId::Passenger1WithHelmet,
        ClassId::Passenger1NoHelmet,
        ClassId::Passenger2WithHelmet,
        ClassId::Passenger2NoHelmet,
    ];

    pub fn from_id(id: i64) -> Result<Self, RecordError> {
        match id {
            1 => Ok(ClassId::Motorcycle),
            2 => Ok(ClassId::DriverWithHelmet),
            3 => Ok(ClassId::DriverNoHelmet),
            4 => Ok(ClassId::Passenger1WithHelmet),
            5 => Ok(ClassId::Passenger1NoHelmet),
            6 => Ok(ClassId::Passenger2WithHelmet),
            7 => Ok(ClassId::Passenger2NoHelmet),
            other => Err(RecordError::ClassOutOfRange(other)),
        }
    }

    pub fn id(&self) -> u8 {
        *self as u8
    }

    pub fn name(&self) -> &'static str {
        match self {
            ClassId::Motorcycle => "motorcycle",
            ClassId::DriverWithHelmet => "driver-with-helmet",
            ClassId::DriverNoHelmet => "driver-no-helmet",
            ClassId::Passenger1WithHelmet => "passenger1-with-helmet",
            ClassId::Passenger1NoHelmet => "passenger1-no-helmet",
            ClassId::Passenger2WithHelmet => "passenger2-with-helmet",
            ClassId::Passenger2NoHelmet => "passenger2-no-helmet",
        }
    }
}

/// Position of a frame within the corpus: the 1-based video rank (videos
/// sorted alphanumerically) plus the 1-based frame count within the video.
/// Challenge-conformant videos have at most 200 frames (20 s at 10 fps);
/// that ceiling is a validation rule, not a type invariant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FrameAddress {
    video_id: u32,
    frame: u32,
}

impl FrameAddress {
    pub fn new(video_id: u32, frame: u32) -> Result<Self, RecordError> {
        if video_id == 0 {
            return Err(RecordError::VideoIdOutOfRange);
        }
        if frame == 0 {
            return Err(RecordError::FrameOutOfRange);
        }
        Ok(Self { video_id, frame })
    }

    pub fn video_id(&self) -> u32 {
        self.video_id
    }

    pub fn frame(&self) -> u32 {
        self.frame
    }
}

/// One model prediction: a box with class and confidence on a frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub addr: FrameAddress,
    pub bbox: BoundingBox,
    pub class: ClassId,
    confidence: f64,
}

impl Detection {
    pub fn new(
        addr: FrameAddress,
        bbox: BoundingBox,
        class: ClassId,
        confidence: f64,
    ) -> Result<Self, RecordError> {
        if !(0.0..=1.0).contains(&confidence) {
            return Err(RecordError::ConfidenceOutOfRange(confidence));
        }
        Ok(Self {
            addr,
            bbox,
            class,
            confidence,
        })
    }

    pub fn confidence(&self) -> f64 {
        self.confidence
    }

    /// Canonical processing order for ranked algorithms: confidence
    /// descending, ties broken by box geometry ascending so equal
    /// confidences sort identically on every platform.
    pub fn ranking_order(a: &Detection, b: &Detection) -> std::cmp::Ordering {
        b.confidence
            .total_cmp(&a.confidence)
            .then(a.bbox.left().total_cmp(&b.bbox.left()))
            .then(a.bbox.top().total_cmp(&b.bbox.top()))
            .then(a.bbox.width().total_cmp(&b.bbox.width()))
            .then(a.bbox.height().total_cmp(&b.bbox.height()))
    }
}

/// One annotated box: same shape as [`Detection`] minus the confidence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthRecord {
    pub addr: FrameAddress,
    pub bbox: BoundingBox,
    pub class: ClassId,
}

impl GroundTruthRecord {
    pub fn new(addr: FrameAddress, bbox: BoundingBox, class: ClassId) -> Self {
        Self { addr, bbox, class }
    }
}
