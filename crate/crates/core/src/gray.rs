//! Quantized grayscale images and the loaders that produce them.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::pgm;

/// A row-major grid of gray levels in `[0, levels)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuantizedImage {
    width: usize,
    height: usize,
    levels: u16,
    data: Vec<u8>,
}

impl QuantizedImage {
    pub fn new(width: usize, height: usize, levels: u16, data: Vec<u8>) -> Result<Self> {
        check_levels(levels)?;
        if width == 0 || height == 0 {
            return Err(Error::validation("image dimensions must be positive"));
        }
        if data.len() != width * height {
            return Err(Error::validation(format!(
                "pixel count {} does not match {width}x{height}",
                data.len()
            )));
        }
        if let Some(&v) = data.iter().find(|&&v| u16::from(v) >= levels) {
            return Err(Error::validation(format!(
                "gray level {v} out of range for {levels} levels"
            )));
        }
        Ok(QuantizedImage {
            width,
            height,
            levels,
            data,
        })
    }

    /// Quantize 8-bit intensities into `levels` bins.
    pub fn from_gray8(width: usize, height: usize, pixels: &[u8], levels: u16) -> Result<Self> {
        check_levels(levels)?;
        let data = pixels.iter().map(|&v| quantize(v, levels)).collect();
        Self::new(width, height, levels, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn levels(&self) -> u16 {
        self.levels
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> u8 {
        self.data[row * self.width + col]
    }

    /// Copy out the `w`x`h` block whose top-left corner is `(col, row)`.
    pub fn crop(&self, col: usize, row: usize, w: usize, h: usize) -> Result<Self> {
        if w == 0 || h == 0 || col + w > self.width || row + h > self.height {
            return Err(Error::validation(format!(
                "crop {w}x{h}+{col}+{row} outside {}x{} image",
                self.width, self.height
            )));
        }
        let mut data = Vec::with_capacity(w * h);
        for r in row..row + h {
            let start = r * self.width + col;
            data.extend_from_slice(&self.data[start..start + w]);
        }
        Ok(QuantizedImage {
            width: w,
            height: h,
            levels: self.levels,
            data,
        })
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for c in 0..self.width {
            for r in 0..self.height {
                data.push(self.get(c, r));
            }
        }
        QuantizedImage {
            width: self.height,
            height: self.width,
            levels: self.levels,
            data,
        }
    }

    /// Mirror left-to-right.
    pub fn flip_horizontal(&self) -> Self {
        let mut data = self.data.clone();
        for row in data.chunks_mut(self.width) {
            row.reverse();
        }
        QuantizedImage { data, ..*self }
    }

    pub fn rotate_180(&self) -> Self {
        let mut data = self.data.clone();
        data.reverse();
        QuantizedImage { data, ..*self }
    }
}

fn check_levels(levels: u16) -> Result<()> {
    if !(2..=256).contains(&levels) {
        return Err(Error::validation(format!(
            "gray-level count {levels} not in [2, 256]"
        )));
    }
    Ok(())
}

/// Map an 8-bit intensity to `floor(v * levels / 256)`.
#[inline]
pub fn quantize(v: u8, levels: u16) -> u8 {
    ((u32::from(v) * u32::from(levels)) >> 8) as u8
}

/// ITU-R BT.601 luma, rounded to the nearest 8-bit value.
#[inline]
pub fn luminance(r: u8, g: u8, b: u8) -> u8 {
    let y = 0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b);
    y.round().clamp(0.0, 255.0) as u8
}

fn has_extension(path: &Path, exts: &[&str]) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| exts.iter().any(|x| e.eq_ignore_ascii_case(x)))
        .unwrap_or(false)
}

const FRAME_EXTENSIONS: &[&str] = &["pgm", "png"];

/// Load a PGM (P2/P5) or PNG file as a quantized grayscale image.
///
/// PGM files with `maxval < 255` quantize as `floor(v * levels / (maxval + 1))`,
/// which coincides with the 8-bit rule at `maxval = 255`. Color PNGs are
/// reduced to luma first; alpha is ignored.
pub fn load_grayscale(path: impl AsRef<Path>, levels: u16) -> Result<QuantizedImage> {
    let path = path.as_ref();
    check_levels(levels)?;
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_grayscale(path, &bytes, levels)
}

pub(crate) fn decode_grayscale(path: &Path, bytes: &[u8], levels: u16) -> Result<QuantizedImage> {
    if bytes.starts_with(b"P") {
        let map = pgm::decode(bytes).map_err(|reason| Error::Format {
            path: path.to_path_buf(),
            reason,
        })?;
        let denom = u32::from(map.maxval) + 1;
        let data = map
            .samples
            .iter()
            .map(|&v| (u32::from(v) * u32::from(levels) / denom) as u8)
            .collect();
        return QuantizedImage::new(map.width, map.height, levels, data);
    }
    if bytes.starts_with(b"\x89PNG") {
        let decoded = ::image::load_from_memory_with_format(bytes, ::image::ImageFormat::Png)
            .map_err(|e| Error::Format {
                path: path.to_path_buf(),
                reason: e.to_string(),
            })?;
        let rgb = decoded.to_rgb8();
        let (w, h) = rgb.dimensions();
        let gray: Vec<u8> = if decoded.color().has_color() {
            rgb.pixels().map(|p| luminance(p[0], p[1], p[2])).collect()
        } else {
            rgb.pixels().map(|p| p[0]).collect()
        };
        return QuantizedImage::from_gray8(w as usize, h as usize, &gray, levels);
    }
    Err(Error::Format {
        path: path.to_path_buf(),
        reason: "expected a PGM (P2/P5) or PNG file".into(),
    })
}

/// Supported frame files in `dir`, sorted by file name.
pub fn list_frames(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let mut frames = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if path.is_file() && has_extension(&path, FRAME_EXTENSIONS) {
            frames.push(path);
        }
    }
    frames.sort();
    if frames.is_empty() {
        return Err(Error::EmptyCorpus {
            path: dir.to_path_buf(),
        });
    }
    Ok(frames)
}

/// Paths of every `stride`-th frame starting from the first.
pub fn sample_frames(dir: impl AsRef<Path>, stride: usize) -> Result<Vec<PathBuf>> {
    if stride == 0 {
        return Err(Error::validation("frame stride must be at least 1"));
    }
    Ok(list_frames(dir)?.into_iter().step_by(stride).collect())
}

/// Load every `stride`-th frame of a directory of images, in name order.
pub fn load_video_frames(
    dir: impl AsRef<Path>,
    stride: usize,
    levels: u16,
) -> Result<Vec<QuantizedImage>> {
    sample_frames(dir, stride)?
        .iter()
        .map(|p| load_grayscale(p, levels))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantization_boundaries() {
        assert_eq!(quantize(0, 16), 0);
        assert_eq!(quantize(255, 16), 15);
        assert_eq!(quantize(128, 16), 8);
        assert_eq!(quantize(255, 256), 255);
        assert_eq!(quantize(127, 2), 0);
        assert_eq!(quantize(128, 2), 1);
    }

    #[test]
    fn quantization_monotone_and_surjective() {
        for levels in 2..=256u16 {
            let mut seen = vec![false; levels as usize];
            let mut prev = 0;
            for v in 0..=255u8 {
                let q = quantize(v, levels);
                assert!(q >= prev);
                prev = q;
                seen[q as usize] = true;
            }
            assert!(seen.iter().all(|&s| s), "levels={levels}");
        }
    }

    #[test]
    fn luminance_weights() {
        assert_eq!(luminance(255, 255, 255), 255);
        assert_eq!(luminance(0, 0, 0), 0);
        assert_eq!(luminance(255, 0, 0), 76);
        assert_eq!(luminance(0, 255, 0), 150);
        assert_eq!(luminance(0, 0, 255), 29);
    }

    #[test]
    fn rejects_invalid_construction() {
        assert!(QuantizedImage::new(2, 2, 1, vec![0; 4]).is_err());
        assert!(QuantizedImage::new(2, 2, 4, vec![0; 3]).is_err());
        assert!(QuantizedImage::new(2, 2, 4, vec![0, 1, 2, 4]).is_err());
        assert!(QuantizedImage::from_gray8(1, 1, &[0], 257).is_err());
    }

    #[test]
    fn transpose_and_rotate() {
        let img = QuantizedImage::new(3, 2, 8, vec![0, 1, 2, 3, 4, 5]).unwrap();
        let t = img.transpose();
        assert_eq!((t.width(), t.height()), (2, 3));
        assert_eq!(t.data(), &[0, 3, 1, 4, 2, 5]);
        assert_eq!(img.rotate_180().data(), &[5, 4, 3, 2, 1, 0]);
        assert_eq!(img.flip_horizontal().data(), &[2, 1, 0, 5, 4, 3]);
        assert_eq!(t.transpose(), img);
    }

    #[test]
    fn crop_block() {
        let img = QuantizedImage::new(3, 3, 16, (0..9).collect()).unwrap();
        assert_eq!(img.crop(1, 1, 2, 2).unwrap().data(), &[4, 5, 7, 8]);
        assert!(img.crop(2, 2, 2, 2).is_err());
    }
}
