//! Bounding-box-aware augmentation. Every operation transforms the
//! pixels and the labels with the same geometry so a box keeps framing
//! the same content, and every output satisfies the [`LabeledSample`]
//! invariant that all boxes lie inside the frame.

use crate::bbox::{clip_box, BoundingBox, FrameDims, GeometryError};
use crate::detection::ClassId;
use crate::imaging::{
    self, gaussian_blur, resize_bilinear, rotate_point_forward, ImageBuffer, ImagingError,
};
use crate::rng::SplitMix64;
use thiserror::Error;

/// Fraction of a remapped box that must stay visible for the box to
/// survive arbitrary rotation or mosaic cropping.
pub const DEFAULT_MIN_VISIBILITY: f64 = 0.25;

#[derive(Debug, Error)]
pub enum AugmentError {
    #[error("box ({left},{top}) {width}x{height} extends outside the {dims_w}x{dims_h} image")]
    BoxOutOfFrame {
        left: f64,
        top: f64,
        width: f64,
        height: f64,
        dims_w: u32,
        dims_h: u32,
    },
    #[error("mosaic requires exactly 4 samples (got {0})")]
    WrongSampleCount(usize),
    #[error("visibility threshold must lie in [0, 1] (got {0})")]
    VisibilityOutOfRange(f64),
    #[error("validation fraction must lie strictly between 0 and 1 (got {0})")]
    FractionOutOfRange(f64),
    #[error("cannot split an empty manifest")]
    EmptyManifest,
    #[error(transparent)]
    Imaging(#[from] ImagingError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// An image together with its object annotations.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    image: ImageBuffer,
    boxes: Vec<(BoundingBox, ClassId)>,
}

impl LabeledSample {
    /// Builds a sample, rejecting any box that is not fully inside the
    /// image.
    pub fn new(
        image: ImageBuffer,
        boxes: Vec<(BoundingBox, ClassId)>,
    ) -> Result<Self, AugmentError> {
        let dims = image.dims();
        for (rect, _) in &boxes {
            let inside = rect.left() >= 0.0
                && rect.top() >= 0.0
                && rect.right() <= dims.width() as f64
                && rect.bottom() <= dims.height() as f64;
            if !inside {
                return Err(AugmentError::BoxOutOfFrame {
                    left: rect.left(),
                    top: rect.top(),
                    width: rect.width(),
                    height: rect.height(),
                    dims_w: dims.width(),
                    dims_h: dims.height(),
                });
            }
        }
        Ok(Self { image, boxes })
    }

    pub fn image(&self) -> &ImageBuffer {
        &self.image
    }

    pub fn boxes(&self) -> &[(BoundingBox, ClassId)] {
        &self.boxes
    }

    pub fn dims(&self) -> FrameDims {
        self.image.dims()
    }

    pub fn into_parts(self) -> (ImageBuffer, Vec<(BoundingBox, ClassId)>) {
        (self.image, self.boxes)
    }
}

/// Mirrors the sample across the vertical axis; a box at `left` moves
/// to `W - left - width`.
pub fn augment_flip(sample: &LabeledSample) -> LabeledSample {
    let w = sample.image.width() as f64;
    let image = imaging::flip_horizontal(&sample.image);
    let boxes = sample
        .boxes
        .iter()
        .map(|(rect, class)| {
            let flipped = BoundingBox::new(
                w - rect.left() - rect.width(),
                rect.top(),
                rect.width(),
                rect.height(),
            )
            .expect("mirrored box keeps its size");
            (flipped, *class)
        })
        .collect();
    LabeledSample::new(image, boxes).expect("mirroring keeps boxes in frame")
}

/// Rotates the sample by `quarter_turns` x 90 degrees counter-clockwise.
/// Each turn maps a box `(l, t, w, h)` on a `W`-wide image to
/// `(t, W - l - w, h, w)` on the swapped canvas; the mapping is exact.
pub fn augment_rotate(
    sample: &LabeledSample,
    quarter_turns: u32,
) -> Result<LabeledSample, AugmentError> {
    let image = imaging::rotate90(&sample.image, quarter_turns)?;
    let mut boxes = sample.boxes.clone();
    let mut width = sample.image.width() as f64;
    let mut height = sample.image.height() as f64;
    for _ in 0..quarter_turns {
        for (rect, _) in &mut boxes {
            *rect = BoundingBox::new(
                rect.top(),
                width - rect.left() - rect.width(),
                rect.height(),
                rect.width(),
            )
            .expect("quarter-turn swaps box sides");
        }
        std::mem::swap(&mut width, &mut height);
    }
    Ok(LabeledSample::new(image, boxes).expect("quarter turns keep boxes in frame"))
}

/// Rotates the sample by an arbitrary angle (degrees, counter-clockwise)
/// about the image center on a fixed canvas. Each box becomes the
/// axis-aligned hull of its four rotated corners, clipped to the frame;
/// boxes keeping less than `min_visibility` of the hull area are dropped.
pub fn augment_rotate_arbitrary(
    sample: &LabeledSample,
    angle_degrees: f64,
    fill: [u8; 3],
    min_visibility: f64,
) -> Result<LabeledSample, AugmentError> {
    if !(0.0..=1.0).contains(&min_visibility) {
        return Err(AugmentError::VisibilityOutOfRange(min_visibility));
    }
    let image = imaging::rotate_arbitrary(&sample.image, angle_degrees, fill)?;
    let dims = sample.dims();
    let mut boxes = Vec::with_capacity(sample.boxes.len());
    for (rect, class) in &sample.boxes {
        let corners = [
            (rect.left(), rect.top()),
            (rect.right(), rect.top()),
            (rect.left(), rect.bottom()),
            (rect.right(), rect.bottom()),
        ];
        let mut min_x = f64::INFINITY;
        let mut min_y = f64::INFINITY;
        let mut max_x = f64::NEG_INFINITY;
        let mut max_y = f64::NEG_INFINITY;
        for (x, y) in corners {
            let (rx, ry) = rotate_point_forward(x, y, angle_degrees, dims);
            min_x = min_x.min(rx);
            min_y = min_y.min(ry);
            max_x = max_x.max(rx);
            max_y = max_y.max(ry);
        }
        let hull = BoundingBox::new(min_x, min_y, max_x - min_x, max_y - min_y)?;
        if let Some(clipped) = clip_box(&hull, dims) {
            if clipped.area() / hull.area() >= min_visibility || min_visibility == 0.0 {
                boxes.push((clipped, *class));
            }
        }
    }
    Ok(LabeledSample::new(image, boxes).expect("clipping keeps boxes in frame"))
}

/// Blurs the pixels and leaves every label untouched.
pub fn augment_blur(sample: &LabeledSample, sigma: f64) -> Result<LabeledSample, AugmentError> {
    let image = gaussian_blur(&sample.image, sigma)?;
    Ok(LabeledSample::new(image, sample.boxes.clone()).expect("labels are unchanged"))
}

/// Parameters for [`mosaic`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MosaicConfig {
    target_dims: FrameDims,
    min_box_visibility: f64,
    seed: u64,
}

impl MosaicConfig {
    pub fn new(
        target_dims: FrameDims,
        min_box_visibility: f64,
        seed: u64,
    ) -> Result<Self, AugmentError> {
        if !(0.0..=1.0).contains(&min_box_visibility) {
            return Err(AugmentError::VisibilityOutOfRange(min_box_visibility));
        }
        Ok(Self {
            target_dims,
            min_box_visibility,
            seed,
        })
    }

    pub fn target_dims(&self) -> FrameDims {
        self.target_dims
    }

    pub fn min_box_visibility(&self) -> f64 {
        self.min_box_visibility
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Crop origin used by [`mosaic`] for a given config: x then y, each
/// uniform over the valid placements of a `target_dims` window on the
/// doubled canvas. Exposed so pipelines can log or reproduce the draw.
pub fn mosaic_crop_origin(cfg: &MosaicConfig) -> (u32, u32) {
    let mut rng = SplitMix64::new(cfg.seed);
    let x = rng.next_below(cfg.target_dims.width() as u64 + 1) as u32;
    let y = rng.next_below(cfg.target_dims.height() as u64 + 1) as u32;
    (x, y)
}

/// Combines four samples into one: each input is resized to
/// `target_dims`, the results are tiled 2x2 in input order (top-left,
/// top-right, bottom-left, bottom-right), and a seeded `target_dims`
/// crop of the doubled canvas becomes the output. Boxes are rescaled,
/// offset into the canvas, clipped to the crop, and dropped when the
/// visible fraction of the rescaled box falls below
/// `min_box_visibility`.
pub fn mosaic(
    samples: &[LabeledSample],
    cfg: &MosaicConfig,
) -> Result<LabeledSample, AugmentError> {
    if samples.len() != 4 {
        return Err(AugmentError::WrongSampleCount(samples.len()));
    }
    let (tw, th) = (cfg.target_dims.width(), cfg.target_dims.height());
    let (crop_x, crop_y) = mosaic_crop_origin(cfg);

    let mut canvas = ImageBuffer::filled(tw * 2, th * 2, [0, 0, 0])?;
    let offsets = [(0, 0), (tw, 0), (0, th), (tw, th)];
    let mut boxes = Vec::new();
    for (sample, (ox, oy)) in samples.iter().zip(offsets) {
        let tile = resize_bilinear(&sample.image, cfg.target_dims);
        for y in 0..th {
            for x in 0..tw {
                canvas.set_pixel(ox + x, oy + y, tile.pixel(x, y));
            }
        }
        let sx = tw as f64 / sample.image.width() as f64;
        let sy = th as f64 / sample.image.height() as f64;
        for (rect, class) in &sample.boxes {
            let scaled = BoundingBox::new(
                rect.left() * sx + ox as f64 - crop_x as f64,
                rect.top() * sy + oy as f64 - crop_y as f64,
                rect.width() * sx,
                rect.height() * sy,
            )
            .expect("positive scale keeps sides positive");
            if let Some(clipped) = clip_box(&scaled, cfg.target_dims) {
                let visible = clipped.area() / scaled.area();
                if visible >= cfg.min_box_visibility || cfg.min_box_visibility == 0.0 {
                    boxes.push((clipped, *class));
                }
            }
        }
    }
    let image = imaging::crop(&canvas, crop_x, crop_y, tw, th)?;
    Ok(LabeledSample::new(image, boxes).expect("clipping keeps boxes in frame"))
}

/// Splits a manifest into train and validation lists: the manifest is
/// shuffled with a seeded Fisher-Yates pass, the first
/// `floor(n * val_fraction)` entries become the validation set, and the
/// rest (in shuffled order) become the training set. The two lists are
/// always an exact partition of the input.
pub fn split_dataset<T: Clone>(
    manifest: &[T],
    val_fraction: f64,
    seed: u64,
) -> Result<(Vec<T>, Vec<T>), AugmentError> {
    if manifest.is_empty() {
        return Err(AugmentError::EmptyManifest);
    }
    if !(val_fraction > 0.0 && val_fraction < 1.0) {
        return Err(AugmentError::FractionOutOfRange(val_fraction));
    }
    let mut shuffled: Vec<T> = manifest.to_vec();
    let mut rng = SplitMix64::new(seed);
    for i in (1..shuffled.len()).rev() {
        let j = rng.next_below(i as u64 + 1) as usize;
        shuffled.swap(i, j);
    }
    let n_val = (manifest.len() as f64 * val_fraction).floor() as usize;
    let train = shuffled.split_off(n_val);
    Ok((train, shuffled))
}
