//! Non-overlapping window tiling with a descriptor per window.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gray::QuantizedImage;
use crate::haralick::{describe_with, Descriptor32, DESCRIPTOR_LEN};

/// Smallest window for which distance-2 matrices have pixel pairs.
pub const MIN_WINDOW: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowRecord {
    pub frame: usize,
    pub row: usize,
    pub col: usize,
    pub descriptor: Descriptor32,
}

/// Window descriptors for one entry, in frame-major then row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedImage {
    pub entry_id: String,
    pub window_size: usize,
    pub grid_rows: usize,
    pub grid_cols: usize,
    pub frames: usize,
    pub windows: Vec<WindowRecord>,
}

impl WindowedImage {
    pub fn with_entry_id(mut self, id: impl Into<String>) -> Self {
        self.entry_id = id.into();
        self
    }

    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    pub fn windows_per_frame(&self) -> usize {
        self.grid_rows * self.grid_cols
    }

    pub fn descriptors(&self) -> impl Iterator<Item = &Descriptor32> + Clone {
        self.windows.iter().map(|w| &w.descriptor)
    }

    /// Component-wise mean of the raw window descriptors.
    pub fn mean_descriptor(&self) -> Descriptor32 {
        let mut acc = [0.0; DESCRIPTOR_LEN];
        for w in &self.windows {
            for (a, v) in acc.iter_mut().zip(w.descriptor.values()) {
                *a += v;
            }
        }
        let n = self.windows.len().max(1) as f64;
        Descriptor32(acc.map(|a| a / n))
    }
}

fn check_size(img: &QuantizedImage, size: usize) -> Result<()> {
    if size < MIN_WINDOW {
        return Err(Error::validation(format!(
            "window size {size} is below the minimum of {MIN_WINDOW}"
        )));
    }
    if img.width() < size || img.height() < size {
        return Err(Error::EmptyDecomposition {
            width: img.width(),
            height: img.height(),
            size,
        });
    }
    Ok(())
}

/// Tile `img` into `size`x`size` windows using symmetric co-occurrence matrices.
pub fn decompose(img: &QuantizedImage, size: usize) -> Result<WindowedImage> {
    decompose_with(img, size, true)
}

pub fn decompose_with(img: &QuantizedImage, size: usize, symmetric: bool) -> Result<WindowedImage> {
    check_size(img, size)?;
    let windows = describe_frame(img, size, symmetric, 0)?;
    Ok(WindowedImage {
        entry_id: String::new(),
        window_size: size,
        grid_rows: img.height() / size,
        grid_cols: img.width() / size,
        frames: 1,
        windows,
    })
}

fn describe_frame(
    img: &QuantizedImage,
    size: usize,
    symmetric: bool,
    frame: usize,
) -> Result<Vec<WindowRecord>> {
    let rows = img.height() / size;
    let cols = img.width() / size;
    (0..rows * cols)
        .into_par_iter()
        .map(|idx| {
            let (row, col) = (idx / cols, idx % cols);
            let tile = img.crop(col * size, row * size, size, size)?;
            Ok(WindowRecord {
                frame,
                row,
                col,
                descriptor: describe_with(&tile, symmetric)?,
            })
        })
        .collect()
}

/// Decompose every frame and concatenate the windows under one entry.
pub fn pool_video(frames: &[QuantizedImage], size: usize) -> Result<WindowedImage> {
    pool_video_with(frames, size, true)
}

pub fn pool_video_with(
    frames: &[QuantizedImage],
    size: usize,
    symmetric: bool,
) -> Result<WindowedImage> {
    let first = frames
        .first()
        .ok_or_else(|| Error::validation("video has no frames"))?;
    check_frames(frames)?;
    check_size(first, size)?;
    let per_frame: Vec<Vec<WindowRecord>> = frames
        .par_iter()
        .enumerate()
        .map(|(f, img)| describe_frame(img, size, symmetric, f))
        .collect::<Result<_>>()?;
    Ok(WindowedImage {
        entry_id: String::new(),
        window_size: size,
        grid_rows: first.height() / size,
        grid_cols: first.width() / size,
        frames: frames.len(),
        windows: per_frame.into_iter().flatten().collect(),
    })
}

fn check_frames(frames: &[QuantizedImage]) -> Result<()> {
    let first = &frames[0];
    for (i, f) in frames.iter().enumerate().skip(1) {
        if f.width() != first.width()
            || f.height() != first.height()
            || f.levels() != first.levels()
        {
            return Err(Error::validation(format!(
                "frame {i} is {}x{} with {} levels, expected {}x{} with {}",
                f.width(),
                f.height(),
                f.levels(),
                first.width(),
                first.height(),
                first.levels()
            )));
        }
    }
    Ok(())
}

/// Whole-image descriptor; for several frames, the mean of the per-frame descriptors.
pub fn whole_image_descriptor(frames: &[QuantizedImage], symmetric: bool) -> Result<Descriptor32> {
    if frames.is_empty() {
        return Err(Error::validation("no frames to describe"));
    }
    check_frames(frames)?;
    let per_frame: Vec<Descriptor32> = frames
        .par_iter()
        .map(|f| describe_with(f, symmetric))
        .collect::<Result<_>>()?;
    let mut acc = [0.0; DESCRIPTOR_LEN];
    for d in &per_frame {
        for (a, v) in acc.iter_mut().zip(d.values()) {
            *a += v;
        }
    }
    let n = per_frame.len() as f64;
    Ok(Descriptor32(acc.map(|a| a / n)))
}
