//! Axis-aligned box geometry in continuous pixel coordinates.
//!
//! Boxes are corner+size `(left, top, width, height)`, matching the
//! challenge submission fields directly. Conversion to the corner-pair
//! form used by the overlap math stays internal.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("box width and height must be positive and finite (got {width}x{height})")]
    DegenerateBox { width: f64, height: f64 },
    #[error("box coordinates must be finite")]
    NonFiniteCoordinate,
    #[error("frame dimensions must be positive")]
    EmptyFrame,
    #[error("normalized {field} {value} outside [0, 1]")]
    NormalizedOutOfRange { field: &'static str, value: f64 },
}

/// Pixel dimensions of a video frame. Challenge videos are 1920x1080.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameDims {
    width: u32,
    height: u32,
}

impl FrameDims {
    pub fn new(width: u32, height: u32) -> Result<Self, GeometryError> {
        if width == 0 || height == 0 {
            return Err(GeometryError::EmptyFrame);
        }
        Ok(Self { width, height })
    }

    /// The 1920x1080 challenge default.
    pub fn challenge_default() -> Self {
        Self {
            width: 1920,
            height: 1080,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }
}

/// Axis-aligned rectangle with positive area.
///
/// `left`/`top` may be negative (a box can legally describe geometry that
/// hangs off the frame; in-frame containment is a validation concern, not
/// a construction one), but `width` and `height` are strictly positive so
/// every box has positive area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    left: f64,
    top: f64,
    width: f64,
    height: f64,
}

impl BoundingBox {
    pub fn new(left: f64, top: f64, width: f64, height: f64) -> Result<Self, GeometryError> {
        if !left.is_finite() || !top.is_finite() {
            return Err(GeometryError::NonFiniteCoordinate);
        }
        if !(width.is_finite() && height.is_finite() && width > 0.0 && height > 0.0) {
            return Err(GeometryError::DegenerateBox { width, height });
        }
        Ok(Self {
            left,
            top,
            width,
            height,
        })
    }

    pub fn left(&self) -> f64 {
        self.left
    }

    pub fn top(&self) -> f64 {
        self.top
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn right(&self) -> f64 {
        self.left + self.width
    }

    pub fn bottom(&self) -> f64 {
        self.top + self.height
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }
}

/// Intersection over union of two boxes. Touching-but-not-overlapping
/// boxes score exactly 0 (the intersection is treated as open).
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let iw = a.right().min(b.right()) - a.left().max(b.left());
    let ih = a.bottom().min(b.bottom()) - a.top().max(b.top());
    if iw <= 0.0 || ih <= 0.0 {
        return 0.0;
    }
    let inter = iw * ih;
    // areas use the same edge differences as the intersection, which
    // pins iou(x, x) to exactly 1.0 and caps every result at 1.0
    let area_a = (a.right() - a.left()) * (a.bottom() - a.top());
    let area_b = (b.right() - b.left()) * (b.bottom() - b.top());
    inter / (area_a + area_b - inter)
}

/// Intersection of `rect` with the frame `[0, width] x [0, height]`.
/// `None` when the intersection has zero area.
pub fn clip_box(rect: &BoundingBox, dims: FrameDims) -> Option<BoundingBox> {
    let left = rect.left().max(0.0);
    let top = rect.top().max(0.0);
    let right = rect.right().min(dims.width() as f64);
    let bottom = rect.bottom().min(dims.height() as f64);
    if right <= left || bottom <= top {
        return None;
    }
    Some(BoundingBox {
        left,
        top,
        width: right - left,
        height: bottom - top,
    })
}

/// Normalized center form `(cx, cy, w, h)` used by annotation sidecar
/// files: each component is the pixel quantity divided by the frame
/// dimension, so a full-frame box maps to `(0.5, 0.5, 1, 1)`.
pub fn to_normalized_center(rect: &BoundingBox, dims: FrameDims) -> (f64, f64, f64, f64) {
    let w = dims.width() as f64;
    let h = dims.height() as f64;
    (
        (rect.left() + rect.width() / 2.0) / w,
        (rect.top() + rect.height() / 2.0) / h,
        rect.width() / w,
        rect.height() / h,
    )
}

/// Inverse of [`to_normalized_center`]. Rejects components outside
/// `[0, 1]` and degenerate (zero-size) boxes.
pub fn from_normalized_center(
    cx: f64,
    cy: f64,
    w: f64,
    h: f64,
    dims: FrameDims,
) -> Result<BoundingBox, GeometryError> {
    for (field, value) in [("cx", cx), ("cy", cy), ("w", w), ("h", h)] {
        if !(0.0..=1.0).contains(&value) {
            return Err(GeometryError::NormalizedOutOfRange { field, value });
        }
    }
    let fw = dims.width() as f64;
    let fh = dims.height() as f64;
    BoundingBox::new(
        cx * fw - w * fw / 2.0,
        cy * fh - h * fh / 2.0,
        w * fw,
        h * fh,
    )
}
