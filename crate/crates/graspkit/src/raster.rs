//! 8-bit grayscale raster with binary PGM (P5) reading and writing.

use std::fs;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("image dimensions {width}x{height} do not match {len} pixels")]
    DimensionMismatch { width: usize, height: usize, len: usize },
    #[error("image dimensions must be nonzero")]
    EmptyImage,
    #[error("crop ({x},{y}) {width}x{height} exceeds image bounds {img_width}x{img_height}")]
    CropOutOfBounds {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
        img_width: usize,
        img_height: usize,
    },
    #[error("not a binary PGM: expected magic P5")]
    BadMagic,
    #[error("malformed PGM header")]
    BadHeader,
    #[error("unsupported PGM maxval {0}, only 255 is accepted")]
    BadMaxval(u32),
    #[error("PGM pixel data truncated: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Row-major 8-bit grayscale image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, fill: u8) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be nonzero");
        Self { width, height, pixels: vec![fill; width * height] }
    }

    pub fn from_pixels(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::EmptyImage);
        }
        if pixels.len() != width * height {
            return Err(RasterError::DimensionMismatch { width, height, len: pixels.len() });
        }
        Ok(Self { width, height, pixels })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    /// Pixel value, or None when (x, y) is outside the image.
    pub fn get(&self, x: i64, y: i64) -> Option<u8> {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            None
        } else {
            Some(self.pixels[y as usize * self.width + x as usize])
        }
    }

    /// Pixel value at an in-bounds coordinate. Panics when out of bounds.
    pub fn pixel(&self, x: usize, y: usize) -> u8 {
        assert!(x < self.width && y < self.height, "pixel ({x},{y}) out of bounds");
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        assert!(x < self.width && y < self.height, "pixel ({x},{y}) out of bounds");
        self.pixels[y * self.width + x] = value;
    }

    pub fn crop(&self, x: usize, y: usize, width: usize, height: usize) -> Result<GrayImage, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::EmptyImage);
        }
        if x + width > self.width || y + height > self.height {
            return Err(RasterError::CropOutOfBounds {
                x,
                y,
                width,
                height,
                img_width: self.width,
                img_height: self.height,
            });
        }
        let mut pixels = Vec::with_capacity(width * height);
        for row in y..y + height {
            let start = row * self.width + x;
            pixels.extend_from_slice(&self.pixels[start..start + width]);
        }
        Ok(GrayImage { width, height, pixels })
    }

    /// Half-turn rotation; an involution on any image.
    pub fn rotate180(&self) -> GrayImage {
        let mut pixels = self.pixels.clone();
        pixels.reverse();
        GrayImage { width: self.width, height: self.height, pixels }
    }

    pub fn to_pgm(&self) -> Vec<u8> {
        let header = format!("P5\n{} {}\n255\n", self.width, self.height);
        let mut out = Vec::with_capacity(header.len() + self.pixels.len());
        out.extend_from_slice(header.as_bytes());
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn from_pgm(bytes: &[u8]) -> Result<Self, RasterError> {
        let mut cursor = 0usize;
        let magic = read_token(bytes, &mut cursor).ok_or(RasterError::BadMagic)?;
        if magic != b"P5" {
            return Err(RasterError::BadMagic);
        }
        let width = read_number(bytes, &mut cursor)?;
        let height = read_number(bytes, &mut cursor)?;
        let maxval = read_number(bytes, &mut cursor)?;
        if maxval != 255 {
            return Err(RasterError::BadMaxval(maxval as u32));
        }
        if width == 0 || height == 0 {
            return Err(RasterError::EmptyImage);
        }
        // Exactly one whitespace byte separates the header from pixel data.
        if cursor >= bytes.len() || !bytes[cursor].is_ascii_whitespace() {
            return Err(RasterError::BadHeader);
        }
        cursor += 1;
        let expected = width * height;
        let data = &bytes[cursor..];
        if data.len() < expected {
            return Err(RasterError::Truncated { expected, found: data.len() });
        }
        Ok(GrayImage { width, height, pixels: data[..expected].to_vec() })
    }

    pub fn save_pgm(&self, path: &Path) -> Result<(), RasterError> {
        fs::write(path, self.to_pgm()).map_err(|source| RasterError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load_pgm(path: &Path) -> Result<Self, RasterError> {
        let bytes = fs::read(path).map_err(|source| RasterError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_pgm(&bytes)
    }
}

fn skip_whitespace_and_comments(bytes: &[u8], cursor: &mut usize) {
    loop {
        while *cursor < bytes.len() && bytes[*cursor].is_ascii_whitespace() {
            *cursor += 1;
        }
        if *cursor < bytes.len() && bytes[*cursor] == b'#' {
            while *cursor < bytes.len() && bytes[*cursor] != b'\n' {
                *cursor += 1;
            }
        } else {
            return;
        }
    }
}

fn read_token<'a>(bytes: &'a [u8], cursor: &mut usize) -> Option<&'a [u8]> {
    skip_whitespace_and_comments(bytes, cursor);
    let start = *cursor;
    while *cursor < bytes.len() && !bytes[*cursor].is_ascii_whitespace() {
        *cursor += 1;
    }
    if *cursor > start {
        Some(&bytes[start..*cursor])
    } else {
        None
    }
}

fn read_number(bytes: &[u8], cursor: &mut usize) -> Result<usize, RasterError> {
    skip_whitespace_and_comments(bytes, cursor);
    let start = *cursor;
    while *cursor < bytes.len() && bytes[*cursor].is_ascii_digit() {
        *cursor += 1;
    }
    if *cursor == start {
        return Err(RasterError::BadHeader);
    }
    std::str::from_utf8(&bytes[start..*cursor])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or(RasterError::BadHeader)
}
