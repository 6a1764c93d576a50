//! Loading corpus entries into window descriptors, with an optional on-disk cache.
//!
//! Cache files are keyed by a SHA-256 over the source pixels' file bytes and the
//! extraction parameters, so renaming or moving an image still hits the cache.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use log::{debug, warn};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::gray::{decode_grayscale, sample_frames, QuantizedImage};
use crate::haralick::{Descriptor32, DESCRIPTOR_LEN};
use crate::manifest::{CorpusEntry, EntryKind, Manifest};
use crate::window::{pool_video_with, whole_image_descriptor, WindowRecord, WindowedImage};

/// Everything the pipeline needs from one entry before normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct EntryFeatures {
    pub entry_id: String,
    pub class_label: String,
    pub windows: WindowedImage,
    /// Whole-image descriptor (per-frame mean for video entries).
    pub classical: Descriptor32,
}

const CACHE_MAGIC: &[u8; 8] = b"HETEXW01";

/// Source files that make up an entry: one image, or the sampled video frames.
pub fn entry_files(entry: &CorpusEntry, stride: usize) -> Result<Vec<PathBuf>> {
    match entry.kind {
        EntryKind::Static => Ok(vec![entry.source.clone()]),
        EntryKind::Video => sample_frames(&entry.source, stride),
    }
}

pub fn load_entry_frames(entry: &CorpusEntry, cfg: &RunConfig) -> Result<Vec<QuantizedImage>> {
    let files = entry_files(entry, cfg.frame_stride)?;
    files
        .iter()
        .map(|p| {
            let bytes = fs::read(p).map_err(|e| Error::io(p, e))?;
            decode_grayscale(p, &bytes, cfg.gray_levels)
        })
        .collect()
}

/// Features from frames already in memory (one frame for a static image).
pub fn features_from_frames(
    entry_id: &str,
    class_label: &str,
    frames: &[QuantizedImage],
    cfg: &RunConfig,
) -> Result<EntryFeatures> {
    let windows = pool_video_with(frames, cfg.window_size, cfg.symmetric)?.with_entry_id(entry_id);
    let classical = whole_image_descriptor(frames, cfg.symmetric)?;
    Ok(EntryFeatures {
        entry_id: entry_id.to_string(),
        class_label: class_label.to_string(),
        windows,
        classical,
    })
}

/// Compute features for one entry, consulting the cache when configured.
pub fn extract_entry(entry: &CorpusEntry, cfg: &RunConfig) -> Result<EntryFeatures> {
    let Some(cache_dir) = &cfg.cache_dir else {
        let frames = load_entry_frames(entry, cfg)?;
        return features_from_frames(&entry.id, &entry.class_label, &frames, cfg);
    };

    let files = entry_files(entry, cfg.frame_stride)?;
    let mut blobs = Vec::with_capacity(files.len());
    for p in &files {
        blobs.push(fs::read(p).map_err(|e| Error::io(p, e))?);
    }
    let key = cache_key(&blobs, cfg);
    let path = cache_dir.join(format!("{key}.win"));
    if let Ok(bytes) = fs::read(&path) {
        match decode_cache(&bytes) {
            Ok((windows, classical)) => {
                debug!("cache hit for {} ({key})", entry.id);
                return Ok(EntryFeatures {
                    entry_id: entry.id.clone(),
                    class_label: entry.class_label.clone(),
                    windows: windows.with_entry_id(&entry.id),
                    classical,
                });
            }
            Err(reason) => warn!("ignoring corrupt cache file {}: {reason}", path.display()),
        }
    }
    let frames: Vec<QuantizedImage> = files
        .iter()
        .zip(&blobs)
        .map(|(p, b)| decode_grayscale(p, b, cfg.gray_levels))
        .collect::<Result<_>>()?;
    let features = features_from_frames(&entry.id, &entry.class_label, &frames, cfg)?;
    store_cache(cache_dir, &path, &features)?;
    Ok(features)
}

/// Features for every manifest entry, in manifest order.
pub fn extract_corpus(manifest: &Manifest, cfg: &RunConfig) -> Result<Vec<EntryFeatures>> {
    manifest
        .entries
        .par_iter()
        .map(|e| extract_entry(e, cfg))
        .collect()
}

fn cache_key(blobs: &[Vec<u8>], cfg: &RunConfig) -> String {
    let mut h = Sha256::new();
    h.update(CACHE_MAGIC);
    for v in [
        cfg.window_size as u64,
        u64::from(cfg.gray_levels),
        u64::from(cfg.symmetric),
        blobs.len() as u64,
    ] {
        h.update(v.to_le_bytes());
    }
    for b in blobs {
        h.update((b.len() as u64).to_le_bytes());
        h.update(b);
    }
    hex::encode(h.finalize())
}

fn store_cache(dir: &Path, path: &Path, f: &EntryFeatures) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let bytes = encode_cache(&f.windows, &f.classical);
    // write-then-rename so concurrent readers never see a partial file
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    let mut file = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    file.write_all(&bytes).map_err(|e| Error::io(&tmp, e))?;
    drop(file);
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn encode_cache(w: &WindowedImage, classical: &Descriptor32) -> Vec<u8> {
    let mut out = Vec::with_capacity(64 + w.len() * (24 + 8 * DESCRIPTOR_LEN));
    out.extend_from_slice(CACHE_MAGIC);
    for v in [w.window_size, w.grid_rows, w.grid_cols, w.frames, w.len()] {
        out.extend_from_slice(&(v as u64).to_le_bytes());
    }
    for v in classical.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for r in &w.windows {
        for v in [r.frame, r.row, r.col] {
            out.extend_from_slice(&(v as u64).to_le_bytes());
        }
        for v in r.descriptor.values() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

fn decode_cache(bytes: &[u8]) -> std::result::Result<(WindowedImage, Descriptor32), String> {
    let mut r = bytes;
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(|e| e.to_string())?;
    if &magic != CACHE_MAGIC {
        return Err("bad magic".into());
    }
    let mut word = || -> std::result::Result<[u8; 8], String> {
        let mut b = [0u8; 8];
        r.read_exact(&mut b).map_err(|e| e.to_string())?;
        Ok(b)
    };
    let mut header = [0usize; 5];
    for h in header.iter_mut() {
        *h = u64::from_le_bytes(word()?) as usize;
    }
    let [window_size, grid_rows, grid_cols, frames, n] = header;
    if n != grid_rows * grid_cols * frames {
        return Err("window count does not match grid".into());
    }
    let mut descriptor = || -> std::result::Result<Descriptor32, String> {
        let mut d = [0.0; DESCRIPTOR_LEN];
        for v in d.iter_mut() {
            *v = f64::from_le_bytes(word()?);
        }
        Ok(Descriptor32(d))
    };
    let classical = descriptor()?;
    let mut windows = Vec::with_capacity(n);
    for _ in 0..n {
        let frame = u64::from_le_bytes(word()?) as usize;
        let row = u64::from_le_bytes(word()?) as usize;
        let col = u64::from_le_bytes(word()?) as usize;
        let mut d = [0.0; DESCRIPTOR_LEN];
        for v in d.iter_mut() {
            *v = f64::from_le_bytes(word()?);
        }
        windows.push(WindowRecord {
            frame,
            row,
            col,
            descriptor: Descriptor32(d),
        });
    }
    Ok((
        WindowedImage {
            entry_id: String::new(),
            window_size,
            grid_rows,
            grid_cols,
            frames,
            windows,
        },
        classical,
    ))
}
