//! Grayscale raster type and binary PGM (P5) input/output.
//!
//! Pixels are stored row-major as `f64`. Intensities read from 8- or 16-bit
//! files are mapped linearly onto `[0, 1]`; in memory they are unconstrained
//! (Langevin samples routinely leave the unit box).

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{check_dim, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl Image {
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::param(format!(
                "image dimensions must be positive, got {height}x{width}"
            )));
        }
        check_dim("image data length", height * width, data.len())?;
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "non-finite pixel value {} at index {i}",
                data[i]
            )));
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Self::filled(height, width, 0.0)
    }

    pub fn filled(height: usize, width: usize, value: f64) -> Self {
        assert!(height > 0 && width > 0, "image dimensions must be positive");
        Self {
            height,
            width,
            data: vec![value; height * width],
        }
    }

    pub fn from_fn(height: usize, width: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        assert!(height > 0 && width > 0, "image dimensions must be positive");
        let mut data = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self {
            height,
            width,
            data,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Number of pixels, `height * width`.
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    /// Same shape, new contents. Fails on length mismatch or non-finite data.
    pub fn with_data(&self, data: Vec<f64>) -> Result<Self> {
        Self::new(self.height, self.width, data)
    }

    pub fn same_shape(&self, other: &Image) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::param(format!(
                "image shapes differ: {}x{} vs {}x{}",
                self.height, self.width, other.height, other.width
            )));
        }
        Ok(())
    }

    /// Centered `size x size` crop (clipped to the image bounds).
    pub fn center_crop(&self, size_h: usize, size_w: usize) -> Result<Self> {
        if size_h == 0 || size_w == 0 || size_h > self.height || size_w > self.width {
            return Err(Error::param(format!(
                "crop {size_h}x{size_w} does not fit in {}x{}",
                self.height, self.width
            )));
        }
        let r0 = (self.height - size_h) / 2;
        let c0 = (self.width - size_w) / 2;
        Ok(Self::from_fn(size_h, size_w, |r, c| self.get(r0 + r, c0 + c)))
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub fn read_pgm(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::decode_pgm(&bytes)
    }

    /// Writes the image clamped to `[0, 1]` and quantized to `maxval`
    /// (255 for 8-bit, up to 65535 for 16-bit big-endian samples).
    pub fn write_pgm(&self, path: impl AsRef<Path>, maxval: u16) -> Result<()> {
        let path = path.as_ref();
        let bytes = self.encode_pgm(maxval)?;
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&bytes).map_err(|e| Error::io(path, e))
    }

    pub fn encode_pgm(&self, maxval: u16) -> Result<Vec<u8>> {
        if maxval == 0 {
            return Err(Error::param("PGM maxval must be positive"));
        }
        let mut out = format!("P5\n{} {}\n{}\n", self.width, self.height, maxval).into_bytes();
        let scale = f64::from(maxval);
        for &v in &self.data {
            let q = (v.clamp(0.0, 1.0) * scale).round() as u16;
            if maxval < 256 {
                out.push(q as u8);
            } else {
                out.extend_from_slice(&q.to_be_bytes());
            }
        }
        Ok(out)
    }

    pub fn decode_pgm(bytes: &[u8]) -> Result<Self> {
        let mut pos = 0usize;
        let magic = next_token(bytes, &mut pos)?;
        if magic != "P5" {
            return Err(Error::Format(format!(
                "expected binary PGM magic P5, found {magic:?}"
            )));
        }
        let width: usize = parse_token(bytes, &mut pos, "width")?;
        let height: usize = parse_token(bytes, &mut pos, "height")?;
        let maxval: u32 = parse_token(bytes, &mut pos, "maxval")?;
        if maxval == 0 || maxval > 65535 {
            return Err(Error::Format(format!("PGM maxval {maxval} out of range")));
        }
        // exactly one whitespace byte separates the header from the raster
        pos += 1;
        let bytes_per = if maxval < 256 { 1 } else { 2 };
        let need = width * height * bytes_per;
        let raster = bytes.get(pos..).unwrap_or(&[]);
        if raster.len() < need {
            return Err(Error::Truncated(format!(
                "PGM raster has {} bytes, expected {need}",
                raster.len()
            )));
        }
        let scale = f64::from(maxval);
        let data = if bytes_per == 1 {
            raster[..need].iter().map(|&b| f64::from(b) / scale).collect()
        } else {
            raster[..need]
                .chunks_exact(2)
                .map(|c| f64::from(u16::from_be_bytes([c[0], c[1]])) / scale)
                .collect()
        };
        Self::new(height, width, data)
    }
}

fn next_token(bytes: &[u8], pos: &mut usize) -> Result<String> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::Truncated("PGM header ended early".into()));
    }
    Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
}

fn parse_token<T: std::str::FromStr>(bytes: &[u8], pos: &mut usize, what: &str) -> Result<T> {
    let tok = next_token(bytes, pos)?;
    tok.parse()
        .map_err(|_| Error::Format(format!("bad PGM {what}: {tok:?}")))
}

/// Piecewise-constant test scene: background, a bright square, a dark disc
/// and a mid-gray bar. Values span the full `[0, 1]` range.
pub fn phantom(height: usize, width: usize) -> Image {
    let (h, w) = (height as f64, width as f64);
    Image::from_fn(height, width, |r, c| {
        let (y, x) = (r as f64 / h, c as f64 / w);
        let disc = (y - 0.62).powi(2) + (x - 0.35).powi(2) < 0.22f64.powi(2);
        if (0.15..0.45).contains(&y) && (0.55..0.85).contains(&x) {
            1.0
        } else if disc {
            0.0
        } else if (0.78..0.88).contains(&y) && (0.5..0.95).contains(&x) {
            0.55
        } else {
            0.3 + 0.2 * x
        }
    })
}
