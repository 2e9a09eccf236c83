//! Minimal raster engine: 8-bit RGB buffers and the pixel transforms the
//! augmentations are built from. Frames are interchanged as binary P6
//! portable pixmaps (see [`ppm`]); no video containers, no other codecs.

pub mod ppm;

use crate::bbox::FrameDims;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ImagingError {
    #[error("image dimensions must be at least 1x1")]
    EmptyImage,
    #[error("pixel buffer holds {got} pixels, expected {expected}")]
    PixelCountMismatch { expected: usize, got: usize },
    #[error("quarter turns must be 0..=3 (got {0})")]
    TurnsOutOfRange(u32),
    #[error("blur sigma must be positive and finite (got {0})")]
    NonPositiveSigma(f64),
    #[error("rotation angle must be finite")]
    NonFiniteAngle,
    #[error("crop rectangle ({x},{y}) {w}x{h} exceeds image bounds {width}x{height}")]
    CropOutOfBounds {
        x: u32,
        y: u32,
        w: u32,
        h: u32,
        width: u32,
        height: u32,
    },
    #[error("PPM data does not start with a P6 magic number")]
    BadMagic,
    #[error("PPM header field is missing or not a number")]
    MalformedHeader,
    #[error("only maxval 255 is supported (got {0})")]
    UnsupportedMaxval(u64),
    #[error("pixel payload truncated: expected {expected} bytes, found {got}")]
    TruncatedPixels { expected: usize, got: usize },
    #[error("{0} trailing bytes after pixel payload")]
    TrailingData(usize),
}

/// Row-major H x W raster of `[r, g, b]` bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageBuffer {
    width: u32,
    height: u32,
    pixels: Vec<[u8; 3]>,
}

impl ImageBuffer {
    /// Uniform image of the given color.
    pub fn filled(width: u32, height: u32, color: [u8; 3]) -> Result<Self, ImagingError> {
        if width == 0 || height == 0 {
            return Err(ImagingError::EmptyImage);
        }
        Ok(Self {
            width,
            height,
            pixels: vec![color; width as usize * height as usize],
        })
    }

    pub fn from_pixels(
        width: u32,
        height: u32,
        pixels: Vec<[u8; 3]>,
    ) -> Result<Self, ImagingError> {
        if width == 0 || height == 0 {
            return Err(ImagingError::EmptyImage);
        }
        let expected = width as usize * height as usize;
        if pixels.len() != expected {
            return Err(ImagingError::PixelCountMismatch {
                expected,
                got: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> FrameDims {
        FrameDims::new(self.width, self.height).expect("buffer dims are nonzero")
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        debug_assert!(x < self.width && y < self.height);
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    pub fn set_pixel(&mut self, x: u32, y: u32, color: [u8; 3]) {
        debug_assert!(x < self.width && y < self.height);
        self.pixels[y as usize * self.width as usize + x as usize] = color;
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }
}

/// Mirror across the vertical axis: pixel `(x, y)` moves to `(W-1-x, y)`.
pub fn flip_horizontal(img: &ImageBuffer) -> ImageBuffer {
    let (w, h) = (img.width, img.height);
    let mut out = img.clone();
    for y in 0..h {
        for x in 0..w {
            out.set_pixel(w - 1 - x, y, img.pixel(x, y));
        }
    }
    out
}

/// Exact lossless rotation by `quarter_turns` x 90 degrees
/// counter-clockwise. Dimensions swap on odd turn counts.
pub fn rotate90(img: &ImageBuffer, quarter_turns: u32) -> Result<ImageBuffer, ImagingError> {
    if quarter_turns > 3 {
        return Err(ImagingError::TurnsOutOfRange(quarter_turns));
    }
    let mut out = img.clone();
    for _ in 0..quarter_turns {
        out = rotate_once_ccw(&out);
    }
    Ok(out)
}

fn rotate_once_ccw(img: &ImageBuffer) -> ImageBuffer {
    let (w, h) = (img.width, img.height);
    let mut pixels = vec![[0u8; 3]; img.pixels.len()];
    // output is h x w; input (x, y) lands at (y, w-1-x)
    for y in 0..h {
        for x in 0..w {
            pixels[(w - 1 - x) as usize * h as usize + y as usize] = img.pixel(x, y);
        }
    }
    ImageBuffer {
        width: h,
        height: w,
        pixels,
    }
}

/// Rotation by an arbitrary angle (degrees, counter-clockwise positive)
/// about the image center. The canvas keeps the input dimensions; each
/// output pixel is inverse-mapped and sampled nearest-neighbor, with
/// samples falling outside the source taking `fill`.
pub fn rotate_arbitrary(
    img: &ImageBuffer,
    angle_degrees: f64,
    fill: [u8; 3],
) -> Result<ImageBuffer, ImagingError> {
    if !angle_degrees.is_finite() {
        return Err(ImagingError::NonFiniteAngle);
    }
    let (w, h) = (img.width, img.height);
    let (cx, cy) = (w as f64 / 2.0, h as f64 / 2.0);
    let theta = angle_degrees.to_radians();
    let (sin, cos) = theta.sin_cos();
    let mut out = img.clone();
    for y in 0..h {
        for x in 0..w {
            let dx = x as f64 + 0.5 - cx;
            let dy = y as f64 + 0.5 - cy;
            // inverse of the screen-CCW forward map
            let sx = cx + dx * cos - dy * sin;
            let sy = cy + dx * sin + dy * cos;
            let (ix, iy) = (sx.floor(), sy.floor());
            let color = if ix >= 0.0 && ix < w as f64 && iy >= 0.0 && iy < h as f64 {
                img.pixel(ix as u32, iy as u32)
            } else {
                fill
            };
            out.set_pixel(x, y, color);
        }
    }
    Ok(out)
}

/// Forward corner map matching [`rotate_arbitrary`]: where a content
/// point of the input lands on the output canvas. Used by the
/// augmentation layer to remap box corners consistently with the pixels.
pub fn rotate_point_forward(x: f64, y: f64, angle_degrees: f64, dims: FrameDims) -> (f64, f64) {
    let (cx, cy) = (dims.width() as f64 / 2.0, dims.height() as f64 / 2.0);
    let theta = angle_degrees.to_radians();
    let (sin, cos) = theta.sin_cos();
    let (dx, dy) = (x - cx, y - cy);
    (cx + dx * cos + dy * sin, cy - dx * sin + dy * cos)
}

/// Separable Gaussian blur, kernel truncated at radius `ceil(3 sigma)`
/// and renormalized to sum 1. Edges are handled clamp-to-edge; channels
/// blur independently. Intermediate sums stay in f64 and are rounded
/// once at the end.
pub fn gaussian_blur(img: &ImageBuffer, sigma: f64) -> Result<ImageBuffer, ImagingError> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(ImagingError::NonPositiveSigma(sigma));
    }
    let weights = gaussian_kernel(sigma);
    let radius = (weights.len() / 2) as i64;
    let (w, h) = (img.width as i64, img.height as i64);

    // horizontal pass
    let mut mid = vec![[0f64; 3]; img.pixels.len()];
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0f64; 3];
            for (k, wt) in weights.iter().enumerate() {
                let sx = (x + k as i64 - radius).clamp(0, w - 1);
                let px = img.pixel(sx as u32, y as u32);
                for c in 0..3 {
                    acc[c] += wt * px[c] as f64;
                }
            }
            mid[(y * w + x) as usize] = acc;
        }
    }

    // vertical pass
    let mut out = img.clone();
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0f64; 3];
            for (k, wt) in weights.iter().enumerate() {
                let sy = (y + k as i64 - radius).clamp(0, h - 1);
                let px = mid[(sy * w + x) as usize];
                for c in 0..3 {
                    acc[c] += wt * px[c];
                }
            }
            out.set_pixel(x as u32, y as u32, round_rgb(acc));
        }
    }
    Ok(out)
}

/// Normalized 1-D Gaussian taps for radius `ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as i64;
    let mut weights: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    weights
}

fn round_rgb(acc: [f64; 3]) -> [u8; 3] {
    [
        acc[0].round().clamp(0.0, 255.0) as u8,
        acc[1].round().clamp(0.0, 255.0) as u8,
        acc[2].round().clamp(0.0, 255.0) as u8,
    ]
}

/// Bilinear resampling with half-pixel centers: output pixel `(x, y)`
/// samples the source at `((x+0.5) * Win/Wout - 0.5, ...)`, edge-clamped.
pub fn resize_bilinear(img: &ImageBuffer, new_dims: FrameDims) -> ImageBuffer {
    let (ow, oh) = (new_dims.width(), new_dims.height());
    let (iw, ih) = (img.width, img.height);
    let sx_ratio = iw as f64 / ow as f64;
    let sy_ratio = ih as f64 / oh as f64;
    let mut pixels = Vec::with_capacity(ow as usize * oh as usize);
    for y in 0..oh {
        let sy = ((y as f64 + 0.5) * sy_ratio - 0.5).clamp(0.0, (ih - 1) as f64);
        let y0 = sy.floor() as u32;
        let y1 = (y0 + 1).min(ih - 1);
        let fy = sy - y0 as f64;
        for x in 0..ow {
            let sx = ((x as f64 + 0.5) * sx_ratio - 0.5).clamp(0.0, (iw - 1) as f64);
            let x0 = sx.floor() as u32;
            let x1 = (x0 + 1).min(iw - 1);
            let fx = sx - x0 as f64;
            let (p00, p10) = (img.pixel(x0, y0), img.pixel(x1, y0));
            let (p01, p11) = (img.pixel(x0, y1), img.pixel(x1, y1));
            let mut acc = [0f64; 3];
            for c in 0..3 {
                let top = (1.0 - fx) * p00[c] as f64 + fx * p10[c] as f64;
                let bot = (1.0 - fx) * p01[c] as f64 + fx * p11[c] as f64;
                acc[c] = (1.0 - fy) * top + fy * bot;
            }
            pixels.push(round_rgb(acc));
        }
    }
    ImageBuffer {
        width: ow,
        height: oh,
        pixels,
    }
}

/// Exact pixel copy of the `w x h` window at `(x, y)`.
pub fn crop(
    img: &ImageBuffer,
    x: u32,
    y: u32,
    w: u32,
    h: u32,
) -> Result<ImageBuffer, ImagingError> {
    let in_bounds = w >= 1
        && h >= 1
        && x.checked_add(w).is_some_and(|r| r <= img.width)
        && y.checked_add(h).is_some_and(|b| b <= img.height);
    if !in_bounds {
        return Err(ImagingError::CropOutOfBounds {
            x,
            y,
            w,
            h,
            width: img.width,
            height: img.height,
        });
    }
    let mut pixels = Vec::with_capacity(w as usize * h as usize);
    for row in y..y + h {
        for col in x..x + w {
            pixels.push(img.pixel(col, row));
        }
    }
    Ok(ImageBuffer {
        width: w,
        height: h,
        pixels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn checker2x2() -> ImageBuffer {
        ImageBuffer::from_pixels(
            2,
            2,
            vec![[0, 0, 0], [255, 255, 255], [255, 255, 255], [0, 0, 0]],
        )
        .unwrap()
    }

    fn test_card(w: u32, h: u32, seed: u64) -> ImageBuffer {
        let mut rng = crate::rng::SplitMix64::new(seed);
        let pixels = (0..w as usize * h as usize)
            .map(|_| {
                let v = rng.next_u64();
                [v as u8, (v >> 8) as u8, (v >> 16) as u8]
            })
            .collect();
        ImageBuffer::from_pixels(w, h, pixels).unwrap()
    }

    #[test]
    fn flip_uniform_is_identity() {
        let img = ImageBuffer::filled(5, 3, [9, 8, 7]).unwrap();
        assert_eq!(flip_horizontal(&img), img);
    }

    #[test]
    fn flip_is_involution() {
        let img = test_card(7, 5, 1);
        assert_eq!(flip_horizontal(&flip_horizontal(&img)), img);
    }

    #[test]
    fn flip_two_pixel_row() {
        let img = ImageBuffer::from_pixels(2, 1, vec![[1, 1, 1], [2, 2, 2]]).unwrap();
        let flipped = flip_horizontal(&img);
        assert_eq!(flipped.pixel(0, 0), [2, 2, 2]);
        assert_eq!(flipped.pixel(1, 0), [1, 1, 1]);
    }

    #[test]
    fn rotate_zero_turns_is_identity() {
        let img = test_card(4, 3, 2);
        assert_eq!(rotate90(&img, 0).unwrap(), img);
    }

    #[test]
    fn rotate_four_quarters_is_identity() {
        let img = test_card(6, 4, 3);
        let mut cur = img.clone();
        for _ in 0..4 {
            cur = rotate90(&cur, 1).unwrap();
        }
        assert_eq!(cur, img);
    }

    #[test]
    fn rotate_two_pixel_row_ccw() {
        // [A, B] rotated CCW once becomes a column with B on top
        let img = ImageBuffer::from_pixels(2, 1, vec![[1, 1, 1], [2, 2, 2]]).unwrap();
        let rotated = rotate90(&img, 1).unwrap();
        assert_eq!((rotated.width(), rotated.height()), (1, 2));
        assert_eq!(rotated.pixel(0, 0), [2, 2, 2]);
        assert_eq!(rotated.pixel(0, 1), [1, 1, 1]);
    }

    #[test]
    fn rotate_rejects_extra_turns() {
        let img = checker2x2();
        assert_eq!(rotate90(&img, 4), Err(ImagingError::TurnsOutOfRange(4)));
    }

    #[test]
    fn arbitrary_rotation_identity_angles() {
        let img = test_card(9, 7, 4);
        assert_eq!(rotate_arbitrary(&img, 0.0, [0, 0, 0]).unwrap(), img);
        assert_eq!(rotate_arbitrary(&img, 360.0, [0, 0, 0]).unwrap(), img);
    }

    #[test]
    fn arbitrary_rotation_of_uniform_field() {
        let color = [100, 150, 200];
        let img = ImageBuffer::filled(8, 8, color).unwrap();
        for angle in [17.0, 45.0, 90.0, 133.7] {
            assert_eq!(rotate_arbitrary(&img, angle, color).unwrap(), img);
        }
    }

    #[test]
    fn arbitrary_180_matches_two_quarter_turns() {
        let img = test_card(10, 6, 5);
        assert_eq!(
            rotate_arbitrary(&img, 180.0, [0, 0, 0]).unwrap(),
            rotate90(&img, 2).unwrap()
        );
    }

    #[test]
    fn blur_uniform_is_identity() {
        let img = ImageBuffer::filled(9, 9, [42, 43, 44]).unwrap();
        assert_eq!(gaussian_blur(&img, 1.0).unwrap(), img);
    }

    #[test]
    fn blur_rejects_bad_sigma() {
        let img = checker2x2();
        assert!(gaussian_blur(&img, 0.0).is_err());
        assert!(gaussian_blur(&img, -1.0).is_err());
        assert!(gaussian_blur(&img, f64::NAN).is_err());
    }

    #[test]
    fn blur_impulse_center_weight() {
        // single white pixel on black: the blurred center must equal the
        // squared 1-D center tap times 255, rounded
        let mut img = ImageBuffer::filled(9, 9, [0, 0, 0]).unwrap();
        img.set_pixel(4, 4, [255, 255, 255]);
        let blurred = gaussian_blur(&img, 1.0).unwrap();
        let kernel = gaussian_kernel(1.0);
        let center = kernel[kernel.len() / 2];
        let expected = (center * center * 255.0).round() as u8;
        assert_eq!(expected, 41); // frozen from the kernel arithmetic
        assert_eq!(blurred.pixel(4, 4), [expected; 3]);
    }

    #[test]
    fn blur_matches_direct_convolution_oracle() {
        let img = test_card(16, 16, 6);
        let sigma = 1.0;
        let blurred = gaussian_blur(&img, sigma).unwrap();

        // direct 2-D convolution with the outer-product kernel
        let weights = gaussian_kernel(sigma);
        let radius = (weights.len() / 2) as i64;
        for y in 0..16i64 {
            for x in 0..16i64 {
                let mut acc = [0f64; 3];
                for (ky, wy) in weights.iter().enumerate() {
                    for (kx, wx) in weights.iter().enumerate() {
                        let sx = (x + kx as i64 - radius).clamp(0, 15) as u32;
                        let sy = (y + ky as i64 - radius).clamp(0, 15) as u32;
                        let px = img.pixel(sx, sy);
                        for c in 0..3 {
                            acc[c] += wy * wx * px[c] as f64;
                        }
                    }
                }
                assert_eq!(blurred.pixel(x as u32, y as u32), round_rgb(acc));
            }
        }
    }

    #[test]
    fn blur_preserves_interior_mass() {
        // content kept 3 pixels clear of every border (sigma 1 -> radius 3)
        // so no mass crosses the image edge
        let mut img = ImageBuffer::filled(16, 16, [0, 0, 0]).unwrap();
        let card = test_card(10, 10, 7);
        for y in 0..10 {
            for x in 0..10 {
                img.set_pixel(x + 3, y + 3, card.pixel(x, y));
            }
        }
        let blurred = gaussian_blur(&img, 1.0).unwrap();
        for c in 0..3 {
            let before: f64 = img.pixels().iter().map(|p| p[c] as f64).sum();
            let after: f64 = blurred.pixels().iter().map(|p| p[c] as f64).sum();
            assert!(
                (after - before).abs() <= 0.005 * before,
                "channel {c}: {before} -> {after}"
            );
        }
    }

    #[test]
    fn blur_stays_within_input_range() {
        let img = test_card(12, 12, 8);
        let blurred = gaussian_blur(&img, 1.7).unwrap();
        for c in 0..3 {
            let min = img.pixels().iter().map(|p| p[c]).min().unwrap();
            let max = img.pixels().iter().map(|p| p[c]).max().unwrap();
            for p in blurred.pixels() {
                assert!(p[c] >= min && p[c] <= max);
            }
        }
    }

    #[test]
    fn resize_same_dims_is_identity() {
        let img = test_card(8, 5, 9);
        assert_eq!(resize_bilinear(&img, FrameDims::new(8, 5).unwrap()), img);
    }

    #[test]
    fn resize_uniform_stays_uniform() {
        let img = ImageBuffer::filled(7, 11, [13, 14, 15]).unwrap();
        let resized = resize_bilinear(&img, FrameDims::new(19, 3).unwrap());
        assert!(resized.pixels().iter().all(|p| *p == [13, 14, 15]));
    }

    #[test]
    fn resize_checkerboard_to_single_pixel_averages() {
        let img = checker2x2();
        let resized = resize_bilinear(&img, FrameDims::new(1, 1).unwrap());
        // (0 + 255 + 255 + 0) / 4 = 127.5, rounds to 128
        assert_eq!(resized.pixel(0, 0), [128, 128, 128]);
    }

    #[test]
    fn crop_full_rect_is_identity() {
        let img = test_card(6, 6, 10);
        assert_eq!(crop(&img, 0, 0, 6, 6).unwrap(), img);
    }

    #[test]
    fn crop_window_copies_exactly() {
        let img = test_card(6, 6, 11);
        let window = crop(&img, 2, 1, 3, 4).unwrap();
        for y in 0..4 {
            for x in 0..3 {
                assert_eq!(window.pixel(x, y), img.pixel(x + 2, y + 1));
            }
        }
    }

    #[test]
    fn crop_out_of_bounds_is_rejected() {
        let img = checker2x2();
        assert!(crop(&img, 1, 1, 2, 2).is_err());
        assert!(crop(&img, 0, 0, 0, 1).is_err());
    }

    #[test]
    fn crop_of_resize_equals_resize() {
        let img = test_card(5, 4, 12);
        let dims = FrameDims::new(9, 7).unwrap();
        let resized = resize_bilinear(&img, dims);
        assert_eq!(crop(&resized, 0, 0, 9, 7).unwrap(), resized);
    }
}
