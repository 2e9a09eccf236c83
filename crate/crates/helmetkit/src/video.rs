//! Frame sequences on disk and median background estimation.
//!
//! A video is a directory of `frame_NNNNNN.ppm` files numbered
//! contiguously from 000001, matching the 1-based frame field of
//! [`FrameAddress`](crate::detection::FrameAddress). The background of
//! a clip is the per-pixel temporal median over a seeded sample of its
//! frames: moving traffic occupies any given pixel in a minority of
//! frames, so the median recovers the static scene.

use crate::imaging::{ppm, ImageBuffer};
use crate::rng::SplitMix64;
use std::io;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const DEFAULT_FPS: u32 = 10;
pub const DEFAULT_SAMPLE_COUNT: u32 = 25;

#[derive(Debug, Error)]
pub enum VideoError {
    #[error("no frame_NNNNNN.ppm files found in {0}")]
    NoFrames(PathBuf),
    #[error(
        "frame files are not contiguous: expected frame {expected:06}, found frame {found:06}"
    )]
    NonContiguousFrames { expected: u32, found: u32 },
    #[error("frame {0} is outside the sequence")]
    FrameOutOfRange(u32),
    #[error("frame dimensions differ: {first_w}x{first_h} then {got_w}x{got_h}")]
    DimensionMismatch {
        first_w: u32,
        first_h: u32,
        got_w: u32,
        got_h: u32,
    },
    #[error("sample count must satisfy 1 <= k <= total (k={k}, total={total})")]
    InvalidSampleCount { k: u32, total: u32 },
    #[error("cannot take the median of an empty frame list")]
    EmptyFrameList,
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Canonical file name of a 1-based frame number.
pub fn frame_file_name(frame: u32) -> String {
    format!("frame_{frame:06}.ppm")
}

fn parse_frame_file_name(name: &str) -> Option<u32> {
    let digits = name.strip_prefix("frame_")?.strip_suffix(".ppm")?;
    if digits.len() != 6 || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

/// An ordered, contiguously numbered set of frame files.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    paths: Vec<PathBuf>,
    fps: u32,
}

impl FrameSequence {
    /// Scans a directory for `frame_NNNNNN.ppm` files. Numbering must
    /// start at 000001 and have no gaps; other files are ignored.
    pub fn from_dir<P: AsRef<Path>>(dir: P) -> Result<Self, VideoError> {
        let dir = dir.as_ref();
        let mut numbered: Vec<(u32, PathBuf)> = Vec::new();
        for entry in std::fs::read_dir(dir)? {
            let entry = entry?;
            let name = entry.file_name();
            if let Some(frame) = name.to_str().and_then(parse_frame_file_name) {
                numbered.push((frame, entry.path()));
            }
        }
        if numbered.is_empty() {
            return Err(VideoError::NoFrames(dir.to_path_buf()));
        }
        numbered.sort();
        for (i, (frame, _)) in numbered.iter().enumerate() {
            let expected = i as u32 + 1;
            if *frame != expected {
                return Err(VideoError::NonContiguousFrames {
                    expected,
                    found: *frame,
                });
            }
        }
        Ok(Self {
            paths: numbered.into_iter().map(|(_, p)| p).collect(),
            fps: DEFAULT_FPS,
        })
    }

    pub fn with_fps(mut self, fps: u32) -> Self {
        self.fps = fps.max(1);
        self
    }

    pub fn len(&self) -> u32 {
        self.paths.len() as u32
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn fps(&self) -> u32 {
        self.fps
    }

    /// Nominal clip length implied by frame count and rate.
    pub fn duration_seconds(&self) -> f64 {
        self.paths.len() as f64 / self.fps as f64
    }

    /// Path of a 1-based frame number.
    pub fn frame_path(&self, frame: u32) -> Result<&Path, VideoError> {
        if frame == 0 || frame > self.len() {
            return Err(VideoError::FrameOutOfRange(frame));
        }
        Ok(&self.paths[frame as usize - 1])
    }

    pub fn load_frame(&self, frame: u32) -> Result<ImageBuffer, VideoError> {
        Ok(ppm::read_ppm_file(self.frame_path(frame)?)?)
    }

    /// Loads the given 1-based frames, enforcing that they all share
    /// one set of dimensions.
    pub fn load_frames(&self, frames: &[u32]) -> Result<Vec<ImageBuffer>, VideoError> {
        let mut images: Vec<ImageBuffer> = Vec::with_capacity(frames.len());
        for &frame in frames {
            let img = self.load_frame(frame)?;
            if let Some(first) = images.first() {
                if (img.width(), img.height()) != (first.width(), first.height()) {
                    return Err(VideoError::DimensionMismatch {
                        first_w: first.width(),
                        first_h: first.height(),
                        got_w: img.width(),
                        got_h: img.height(),
                    });
                }
            }
            images.push(img);
        }
        Ok(images)
    }
}

/// Draws `k` distinct 1-based frame indices uniformly without
/// replacement from `1..=total` (seeded partial Fisher-Yates), returned
/// sorted ascending.
pub fn sample_frame_indices(total: u32, k: u32, seed: u64) -> Result<Vec<u32>, VideoError> {
    if k == 0 || k > total {
        return Err(VideoError::InvalidSampleCount { k, total });
    }
    let mut pool: Vec<u32> = (1..=total).collect();
    let mut rng = SplitMix64::new(seed);
    for i in 0..k as usize {
        let j = i + rng.next_below((total as usize - i) as u64) as usize;
        pool.swap(i, j);
    }
    let mut sample = pool[..k as usize].to_vec();
    sample.sort_unstable();
    Ok(sample)
}

/// Per-pixel, per-channel median over a stack of equal-sized frames.
/// Each channel value is found with a 256-bin histogram; even counts
/// take the lower middle order statistic, so every output value occurs
/// in some input frame at that position.
pub fn median_background(frames: &[ImageBuffer]) -> Result<ImageBuffer, VideoError> {
    let first = frames.first().ok_or(VideoError::EmptyFrameList)?;
    for img in frames {
        if (img.width(), img.height()) != (first.width(), first.height()) {
            return Err(VideoError::DimensionMismatch {
                first_w: first.width(),
                first_h: first.height(),
                got_w: img.width(),
                got_h: img.height(),
            });
        }
    }
    // 0-based rank (n-1)/2 means cumulative count must reach ceil(n/2)
    let target = frames.len().div_ceil(2);
    let mut out = first.clone();
    let n_pixels = first.width() as usize * first.height() as usize;
    for idx in 0..n_pixels {
        let mut median = [0u8; 3];
        for c in 0..3 {
            let mut counts = [0u32; 256];
            for img in frames {
                counts[img.pixels()[idx][c] as usize] += 1;
            }
            let mut cum = 0usize;
            for (value, count) in counts.iter().enumerate() {
                cum += *count as usize;
                if cum >= target {
                    median[c] = value as u8;
                    break;
                }
            }
        }
        let (w, x, y) = (
            first.width(),
            idx as u32 % first.width(),
            idx as u32 / first.width(),
        );
        debug_assert_eq!(idx as u32, y * w + x);
        out.set_pixel(x, y, median);
    }
    Ok(out)
}
