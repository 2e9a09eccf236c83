//! Binary portable pixmap (P6, maxval 255) reader and writer.
//!
//! The writer always emits the canonical header `P6 {w} {h} 255\n`
//! followed by the raw payload, so identical images produce identical
//! bytes. The reader accepts any legal header: arbitrary whitespace
//! between fields and `#` comments running to end of line.

use super::{ImageBuffer, ImagingError};
use std::fs;
use std::io::{self, Write};
use std::path::Path;

/// Serializes the image in canonical form.
pub fn write_ppm<W: Write>(img: &ImageBuffer, mut out: W) -> io::Result<()> {
    writeln!(out, "P6 {} {} 255", img.width(), img.height())?;
    let mut payload = Vec::with_capacity(img.pixels().len() * 3);
    for px in img.pixels() {
        payload.extend_from_slice(px);
    }
    out.write_all(&payload)
}

pub fn write_ppm_file<P: AsRef<Path>>(img: &ImageBuffer, path: P) -> io::Result<()> {
    let mut buf = Vec::new();
    write_ppm(img, &mut buf)?;
    fs::write(path, buf)
}

pub fn to_ppm_bytes(img: &ImageBuffer) -> Vec<u8> {
    let mut buf = Vec::new();
    write_ppm(img, &mut buf).expect("writes into a Vec cannot fail");
    buf
}

/// Parses a binary P6 pixmap. Only maxval 255 is accepted; bytes left
/// over after the payload are an error.
pub fn read_ppm(data: &[u8]) -> Result<ImageBuffer, ImagingError> {
    let mut cursor = Cursor { data, pos: 0 };
    if cursor.take(2) != Some(b"P6".as_slice()) {
        return Err(ImagingError::BadMagic);
    }
    let width = cursor.read_header_number()?;
    let height = cursor.read_header_number()?;
    let maxval = cursor.read_header_number()?;
    if maxval != 255 {
        return Err(ImagingError::UnsupportedMaxval(maxval));
    }
    // exactly one whitespace byte separates the header from the payload
    match cursor.next_byte() {
        Some(b) if b.is_ascii_whitespace() => {}
        _ => return Err(ImagingError::MalformedHeader),
    }
    let (width, height) = (
        u32::try_from(width).map_err(|_| ImagingError::MalformedHeader)?,
        u32::try_from(height).map_err(|_| ImagingError::MalformedHeader)?,
    );
    if width == 0 || height == 0 {
        return Err(ImagingError::EmptyImage);
    }
    let expected = width as usize * height as usize * 3;
    let payload = cursor.take(expected).ok_or(ImagingError::TruncatedPixels {
        expected,
        got: cursor.remaining(),
    })?;
    if cursor.remaining() != 0 {
        return Err(ImagingError::TrailingData(cursor.remaining()));
    }
    let pixels = payload
        .chunks_exact(3)
        .map(|c| [c[0], c[1], c[2]])
        .collect();
    ImageBuffer::from_pixels(width, height, pixels)
}

pub fn read_ppm_file<P: AsRef<Path>>(path: P) -> Result<ImageBuffer, io::Error> {
    let data = fs::read(&path)?;
    read_ppm(&data).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn remaining(&self) -> usize {
        self.data.len() - self.pos
    }

    fn next_byte(&mut self) -> Option<u8> {
        let b = self.data.get(self.pos).copied();
        if b.is_some() {
            self.pos += 1;
        }
        b
    }

    fn peek(&self) -> Option<u8> {
        self.data.get(self.pos).copied()
    }

    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let end = self.pos.checked_add(n)?;
        let slice = self.data.get(self.pos..end)?;
        self.pos = end;
        Some(slice)
    }

    fn skip_whitespace_and_comments(&mut self) {
        loop {
            match self.peek() {
                Some(b) if b.is_ascii_whitespace() => {
                    self.pos += 1;
                }
                Some(b'#') => {
                    while let Some(b) = self.next_byte() {
                        if b == b'\n' {
                            break;
                        }
                    }
                }
                _ => return,
            }
        }
    }

    fn read_header_number(&mut self) -> Result<u64, ImagingError> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.peek().is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(ImagingError::MalformedHeader);
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or(ImagingError::MalformedHeader)
    }
}
