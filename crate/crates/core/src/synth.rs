//! Synthetic textures and two-texture composite corpora.
//!
//! Used for tests and for demo corpora (`hetex synth`). Images are generated as
//! 8-bit intensities so they can be written as PGM files and quantized by the
//! regular loader.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gray::QuantizedImage;
use crate::manifest::{read_manifest, CorpusEntry, EntryKind, Manifest};
use crate::pgm::{encode_p5, Graymap};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Texture {
    Flat { level: u8 },
    Checker { period: usize, lo: u8, hi: u8 },
    VerticalStripes { period: usize, lo: u8, hi: u8 },
    HorizontalStripes { period: usize, lo: u8, hi: u8 },
    DiagonalStripes { period: usize, lo: u8, hi: u8 },
    Noise { lo: u8, hi: u8 },
}

impl Texture {
    /// A fixed palette of mutually distinct textures.
    pub fn palette() -> Vec<Texture> {
        vec![
            Texture::Flat { level: 120 },
            Texture::Checker {
                period: 1,
                lo: 40,
                hi: 210,
            },
            Texture::VerticalStripes {
                period: 2,
                lo: 30,
                hi: 200,
            },
            Texture::HorizontalStripes {
                period: 2,
                lo: 30,
                hi: 200,
            },
            Texture::DiagonalStripes {
                period: 3,
                lo: 60,
                hi: 240,
            },
            Texture::Noise { lo: 0, hi: 255 },
        ]
    }

    fn base(&self, x: usize, y: usize, rng: &mut ChaCha8Rng) -> f64 {
        let pick = |on: bool, lo: u8, hi: u8| f64::from(if on { hi } else { lo });
        match *self {
            Texture::Flat { level } => f64::from(level),
            Texture::Checker { period, lo, hi } => pick((x / period + y / period) % 2 == 1, lo, hi),
            Texture::VerticalStripes { period, lo, hi } => pick((x / period) % 2 == 1, lo, hi),
            Texture::HorizontalStripes { period, lo, hi } => pick((y / period) % 2 == 1, lo, hi),
            Texture::DiagonalStripes { period, lo, hi } => {
                pick(((x + y) / period) % 2 == 1, lo, hi)
            }
            Texture::Noise { lo, hi } => f64::from(rng.gen_range(lo..=hi)),
        }
    }
}

/// Render `texture` over a `w`x`h` grid with uniform additive noise of +-`noise`.
pub fn render(texture: Texture, w: usize, h: usize, noise: f64, rng: &mut ChaCha8Rng) -> Vec<u8> {
    composite(texture, texture, w, h, w, noise, rng)
}

/// Columns `[0, split)` show `left`, the rest `right`.
pub fn composite(
    left: Texture,
    right: Texture,
    w: usize,
    h: usize,
    split: usize,
    noise: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<u8> {
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let tex = if x < split { left } else { right };
            let mut v = tex.base(x, y, rng);
            if noise > 0.0 {
                v += rng.gen_range(-noise..=noise);
            }
            out.push(v.round().clamp(0.0, 255.0) as u8);
        }
    }
    out
}

/// A labelled in-memory image.
#[derive(Debug, Clone)]
pub struct SyntheticImage {
    pub id: String,
    pub class_label: String,
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
    /// First column of the right-hand texture.
    pub split: usize,
}

impl SyntheticImage {
    pub fn quantize(&self, levels: u16) -> Result<QuantizedImage> {
        QuantizedImage::from_gray8(self.width, self.height, &self.pixels, levels)
    }
}

/// Corpus where each class is an unordered pair of palette textures.
#[derive(Debug, Clone)]
pub struct CompositeCorpus {
    pub classes: Vec<(Texture, Texture)>,
    pub per_class: usize,
    pub width: usize,
    pub height: usize,
    /// Fraction of the width given to the first texture, sampled uniformly.
    pub split_range: (f64, f64),
    /// Split columns are snapped to multiples of this.
    pub split_step: usize,
    pub noise: f64,
    pub seed: u64,
}

impl CompositeCorpus {
    /// Classes are palette pairs, enumerated in order and truncated to `n_classes`.
    pub fn pairs(n_classes: usize, per_class: usize, seed: u64) -> Self {
        let pal = Texture::palette();
        let mut classes = Vec::new();
        for i in 0..pal.len() {
            for j in i + 1..pal.len() {
                classes.push((pal[i], pal[j]));
            }
        }
        classes.truncate(n_classes);
        CompositeCorpus {
            classes,
            per_class,
            width: 96,
            height: 96,
            split_range: (0.0, 1.0),
            split_step: 8,
            noise: 40.0,
            seed,
        }
    }

    pub fn generate(&self) -> Vec<SyntheticImage> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = Vec::new();
        for (c, &(a, b)) in self.classes.iter().enumerate() {
            for n in 0..self.per_class {
                let (left, right) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
                let frac = rng.gen_range(self.split_range.0..=self.split_range.1);
                let step = self.split_step.max(1);
                let split = ((frac * self.width as f64 / step as f64).round() as usize * step)
                    .clamp(step, self.width - step);
                let pixels = composite(
                    left,
                    right,
                    self.width,
                    self.height,
                    split,
                    self.noise,
                    &mut rng,
                );
                out.push(SyntheticImage {
                    id: format!("c{c:02}_{n:03}"),
                    class_label: format!("class{c:02}"),
                    width: self.width,
                    height: self.height,
                    pixels,
                    split,
                });
            }
        }
        out
    }

    /// Write every image as a P5 PGM plus `manifest.csv` into `dir`, and return
    /// the manifest as read back from disk.
    pub fn write(&self, dir: &Path) -> Result<Manifest> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut entries = Vec::new();
        for img in self.generate() {
            let name = format!("{}.pgm", img.id);
            let path = dir.join(&name);
            let map = Graymap {
                width: img.width,
                height: img.height,
                maxval: 255,
                samples: img.pixels,
            };
            let mut buf = Vec::new();
            encode_p5(&map, &mut buf).map_err(|e| Error::io(&path, e))?;
            fs::write(&path, buf).map_err(|e| Error::io(&path, e))?;
            entries.push(CorpusEntry {
                id: img.id,
                source: name.into(),
                class_label: img.class_label,
                kind: EntryKind::Static,
            });
        }
        let manifest = Manifest::new("synthetic", entries)?;
        let path = dir.join("manifest.csv");
        fs::write(&path, manifest.to_csv()).map_err(|e| Error::io(&path, e))?;
        read_manifest(&path)
    }
}
