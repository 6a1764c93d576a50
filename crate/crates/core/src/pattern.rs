//! Per-image pattern extraction: z-scored window descriptors are clustered with
//! k-means, the windows farthest from each cluster mean are trimmed, and each
//! pattern is summarized by the mean of its surviving windows.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::haralick::{Descriptor32, DESCRIPTOR_LEN};
use crate::pgm::Graymap;
use crate::window::WindowedImage;

/// A descriptor after z-scoring.
pub type FeatureVector = [f64; DESCRIPTOR_LEN];

pub const MAX_LLOYD_ITERATIONS: usize = 300;

/// Per-dimension mean and population standard deviation of a window population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl NormalizationStats {
    /// Dimensions whose spread is negligible relative to their magnitude.
    pub fn is_zero_variance(&self, dim: usize) -> bool {
        self.std[dim] <= 1e-12 * self.mean[dim].abs().max(1.0)
    }

    pub fn zero_variance_dims(&self) -> Vec<usize> {
        (0..DESCRIPTOR_LEN)
            .filter(|&d| self.is_zero_variance(d))
            .collect()
    }

    /// Z-score a descriptor; zero-variance dimensions map to 0.
    pub fn scale(&self, d: &Descriptor32) -> FeatureVector {
        let mut out = [0.0; DESCRIPTOR_LEN];
        for (i, o) in out.iter_mut().enumerate() {
            *o = if self.is_zero_variance(i) {
                0.0
            } else {
                (d[i] - self.mean[i]) / self.std[i]
            };
        }
        out
    }

    /// Stable short hash identifying these statistics.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for v in self.mean.iter().chain(&self.std) {
            h.update(v.to_le_bytes());
        }
        hex::encode(&h.finalize()[..8])
    }
}

pub fn fit_normalization<'a, I>(windows: I) -> Result<NormalizationStats>
where
    I: IntoIterator<Item = &'a Descriptor32>,
    I::IntoIter: Clone,
{
    let iter = windows.into_iter();
    let mut sum = [0.0; DESCRIPTOR_LEN];
    let mut n = 0usize;
    for d in iter.clone() {
        for (s, v) in sum.iter_mut().zip(d.values()) {
            *s += v;
        }
        n += 1;
    }
    if n < 2 {
        return Err(Error::validation(format!(
            "normalization needs at least 2 windows, got {n}"
        )));
    }
    let mean = sum.map(|s| s / n as f64);
    let mut sq = [0.0; DESCRIPTOR_LEN];
    for d in iter {
        for ((s, v), m) in sq.iter_mut().zip(d.values()).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let std = sq.map(|s| (s / n as f64).sqrt());
    Ok(NormalizationStats {
        mean: mean.to_vec(),
        std: std.to_vec(),
    })
}

#[inline]
pub fn squared_distance(a: &FeatureVector, b: &FeatureVector) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Arithmetic mean, accumulated in iteration order.
pub fn mean_vector<'a>(points: impl IntoIterator<Item = &'a FeatureVector>) -> FeatureVector {
    let mut acc = [0.0; DESCRIPTOR_LEN];
    let mut n = 0usize;
    for p in points {
        for (a, v) in acc.iter_mut().zip(p) {
            *a += v;
        }
        n += 1;
    }
    if n > 0 {
        acc.iter_mut().for_each(|a| *a /= n as f64);
    }
    acc
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub assignments: Vec<usize>,
    pub centroids: Vec<FeatureVector>,
    pub iterations: usize,
    /// Objective after the seeding assignment and after every Lloyd step.
    pub objective_history: Vec<f64>,
    /// An empty cluster was re-seeded at some point.
    pub repaired: bool,
    /// At least one cluster is still empty because all points coincide with centroids.
    pub degenerate: bool,
}

impl Clustering {
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.centroids.len()];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }
}

fn nearest(p: &FeatureVector, centroids: &[FeatureVector]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = squared_distance(p, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn assign(points: &[FeatureVector], centroids: &[FeatureVector]) -> (Vec<usize>, f64) {
    let mut objective = 0.0;
    let labels = points
        .iter()
        .map(|p| {
            let (c, d) = nearest(p, centroids);
            objective += d;
            c
        })
        .collect();
    (labels, objective)
}

fn seed_plus_plus(points: &[FeatureVector], k: usize, rng: &mut ChaCha8Rng) -> Vec<FeatureVector> {
    let mut centroids = vec![points[rng.gen_range(0..points.len())]];
    let mut d2: Vec<f64> = points
        .iter()
        .map(|p| squared_distance(p, &centroids[0]))
        .collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.gen::<f64>() * total;
            let mut cum = 0.0;
            let mut chosen = None;
            for (i, &w) in d2.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                cum += w;
                chosen = Some(i);
                if cum > target {
                    break;
                }
            }
            chosen.unwrap_or(0)
        } else {
            // every point already sits on a centroid
            0
        };
        let c = points[pick];
        for (w, p) in d2.iter_mut().zip(points) {
            *w = w.min(squared_distance(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

/// Re-seed empty clusters at the point farthest from its own centroid.
/// Returns `true` if every empty cluster could be re-seeded.
fn repair_empty(
    points: &[FeatureVector],
    assignments: &mut [usize],
    centroids: &mut [FeatureVector],
) -> bool {
    let k = centroids.len();
    let mut sizes = vec![0usize; k];
    for &a in assignments.iter() {
        sizes[a] += 1;
    }
    let mut all_fixed = true;
    for empty in 0..k {
        if sizes[empty] > 0 {
            continue;
        }
        let mut best: Option<(usize, f64)> = None;
        for (i, p) in points.iter().enumerate() {
            let owner = assignments[i];
            if sizes[owner] < 2 {
                continue;
            }
            let d = squared_distance(p, &centroids[owner]);
            if d > 0.0 && best.is_none_or(|(_, bd)| d > bd) {
                best = Some((i, d));
            }
        }
        match best {
            Some((i, _)) => {
                sizes[assignments[i]] -= 1;
                assignments[i] = empty;
                sizes[empty] = 1;
                centroids[empty] = points[i];
            }
            None => all_fixed = false,
        }
    }
    all_fixed
}

fn update_centroids(
    points: &[FeatureVector],
    assignments: &[usize],
    centroids: &mut [FeatureVector],
) {
    let k = centroids.len();
    let mut sums = vec![[0.0; DESCRIPTOR_LEN]; k];
    let mut counts = vec![0usize; k];
    for (p, &a) in points.iter().zip(assignments) {
        for (s, v) in sums[a].iter_mut().zip(p) {
            *s += v;
        }
        counts[a] += 1;
    }
    for c in 0..k {
        if counts[c] > 0 {
            centroids[c] = sums[c].map(|s| s / counts[c] as f64);
        }
    }
}

/// Lloyd's k-means with k-means++ seeding on already-scaled points.
pub fn kmeans(points: &[FeatureVector], k: usize, seed: u64) -> Result<Clustering> {
    if k == 0 {
        return Err(Error::validation("pattern count must be at least 1"));
    }
    if points.len() < k {
        return Err(Error::validation(format!(
            "{} windows cannot form {k} patterns",
            points.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = seed_plus_plus(points, k, &mut rng);
    let (mut assignments, objective) = assign(points, &centroids);
    let mut history = vec![objective];
    let mut repaired = false;
    let mut degenerate = false;
    let mut iterations = 0;

    while iterations < MAX_LLOYD_ITERATIONS {
        iterations += 1;
        update_centroids(points, &assignments, &mut centroids);
        let mut scratch = assignments.clone();
        let sizes_before = scratch.iter().fold(vec![0usize; k], |mut s, &a| {
            s[a] += 1;
            s
        });
        if sizes_before.contains(&0) {
            repaired = true;
            degenerate = !repair_empty(points, &mut scratch, &mut centroids);
        }
        let (next, objective) = assign(points, &centroids);
        history.push(objective);
        if next == assignments {
            break;
        }
        assignments = next;
    }
    update_centroids(points, &assignments, &mut centroids);
    let sizes = assignments.iter().fold(vec![0usize; k], |mut s, &a| {
        s[a] += 1;
        s
    });
    degenerate |= sizes.contains(&0);

    Ok(Clustering {
        assignments,
        centroids,
        iterations,
        objective_history: history,
        repaired,
        degenerate,
    })
}

/// Scale a window set and cluster it.
pub fn cluster_windows(
    win: &WindowedImage,
    k: usize,
    stats: &NormalizationStats,
    seed: u64,
) -> Result<Clustering> {
    let points: Vec<FeatureVector> = win.descriptors().map(|d| stats.scale(d)).collect();
    kmeans(&points, k, seed)
}

/// Per cluster, drop the `floor(fraction * n)` members farthest from the cluster
/// mean. Returns each point's surviving cluster, or `None` if it was trimmed.
/// Among equal distances the earlier point survives.
pub fn trim_survivors(
    assignments: &[usize],
    points: &[FeatureVector],
    k: usize,
    fraction: f64,
) -> Result<Vec<Option<usize>>> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::validation(format!(
            "trim fraction {fraction} not in [0, 1)"
        )));
    }
    if assignments.len() != points.len() {
        return Err(Error::validation("assignment and point counts differ"));
    }
    let mut out: Vec<Option<usize>> = assignments.iter().map(|&a| Some(a)).collect();
    for c in 0..k {
        let members: Vec<usize> = (0..points.len()).filter(|&i| assignments[i] == c).collect();
        let drop = (fraction * members.len() as f64).floor() as usize;
        if drop == 0 {
            continue;
        }
        let center = mean_vector(members.iter().map(|&i| &points[i]));
        let mut ranked: Vec<(f64, usize)> = members
            .iter()
            .map(|&i| (squared_distance(&points[i], &center), i))
            .collect();
        ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.cmp(&a.1)));
        for &(_, i) in &ranked[..drop] {
            out[i] = None;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternSignature {
    pub cluster_index: usize,
    pub member_count: usize,
    pub mean_vector: Vec<f64>,
}

/// Parameters a signature was built with; distances require equal parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignatureParams {
    pub k: usize,
    pub window_size: usize,
    pub gray_levels: u16,
    pub trim_fraction: f64,
    pub seed: u64,
    pub symmetric: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageSignature {
    pub entry_id: String,
    pub k: usize,
    pub params: SignatureParams,
    pub stats_fingerprint: String,
    pub patterns: Vec<PatternSignature>,
    /// Whole-image descriptor, z-scored with the window statistics.
    pub classical: Vec<f64>,
    /// Mean of all z-scored window descriptors, before clustering and trimming.
    pub window_mean: Vec<f64>,
    /// Some patterns are copies because the window set had fewer than k distinct points.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowLabel {
    Pattern(usize),
    Discarded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationMap {
    pub entry_id: String,
    pub k: usize,
    pub frames: usize,
    pub grid_rows: usize,
    pub grid_cols: usize,
    pub window_size: usize,
    /// One label per window, frame-major then row-major.
    pub labels: Vec<WindowLabel>,
}

impl SegmentationMap {
    pub fn discarded_count(&self) -> usize {
        self.labels
            .iter()
            .filter(|l| **l == WindowLabel::Discarded)
            .count()
    }

    pub fn count(&self, pattern: usize) -> usize {
        self.labels
            .iter()
            .filter(|l| **l == WindowLabel::Pattern(pattern))
            .count()
    }

    /// Label raster for one frame, each window cell upscaled to `window_size` pixels.
    /// Pattern `i` is gray value `i`; discarded windows take `maxval = k`.
    pub fn to_graymap(&self, frame: usize) -> Result<Graymap> {
        if frame >= self.frames {
            return Err(Error::validation(format!(
                "frame {frame} out of range ({} frames)",
                self.frames
            )));
        }
        let s = self.window_size;
        let (w, h) = (self.grid_cols * s, self.grid_rows * s);
        let per_frame = self.grid_rows * self.grid_cols;
        let labels = &self.labels[frame * per_frame..(frame + 1) * per_frame];
        let maxval = self.k as u8;
        let mut samples = vec![0u8; w * h];
        for y in 0..h {
            for x in 0..w {
                samples[y * w + x] = match labels[(y / s) * self.grid_cols + x / s] {
                    WindowLabel::Pattern(p) => p as u8,
                    WindowLabel::Discarded => maxval,
                };
            }
        }
        Ok(Graymap {
            width: w,
            height: h,
            maxval: u16::from(maxval),
            samples,
        })
    }
}

fn check_params(params: &SignatureParams) -> Result<()> {
    if params.k == 0 || params.k > crate::matching::MAX_PATTERNS {
        return Err(Error::validation(format!(
            "pattern count {} not in [1, {}]",
            params.k,
            crate::matching::MAX_PATTERNS
        )));
    }
    if !(0.0..1.0).contains(&params.trim_fraction) {
        return Err(Error::validation(format!(
            "trim fraction {} not in [0, 1)",
            params.trim_fraction
        )));
    }
    Ok(())
}

/// Cluster, trim and summarize one entry's windows.
pub fn build_signature(
    entry_id: &str,
    win: &WindowedImage,
    classical: &Descriptor32,
    params: &SignatureParams,
    stats: &NormalizationStats,
) -> Result<(ImageSignature, SegmentationMap)> {
    check_params(params)?;
    let k = params.k;
    let points: Vec<FeatureVector> = win.descriptors().map(|d| stats.scale(d)).collect();
    let clustering = kmeans(&points, k, params.seed)?;
    let survivors = trim_survivors(&clustering.assignments, &points, k, params.trim_fraction)?;

    let mut patterns: Vec<Option<PatternSignature>> = (0..k)
        .map(|c| {
            let members: Vec<&FeatureVector> = survivors
                .iter()
                .zip(&points)
                .filter(|(s, _)| **s == Some(c))
                .map(|(_, p)| p)
                .collect();
            (!members.is_empty()).then(|| PatternSignature {
                cluster_index: c,
                member_count: members.len(),
                mean_vector: mean_vector(members).to_vec(),
            })
        })
        .collect();

    let degenerate = patterns.iter().any(Option::is_none);
    if degenerate {
        let template = patterns
            .iter()
            .flatten()
            .max_by(|a, b| {
                a.member_count
                    .cmp(&b.member_count)
                    .then(b.cluster_index.cmp(&a.cluster_index))
            })
            .cloned()
            .ok_or_else(|| Error::Internal("clustering produced no patterns".into()))?;
        for (c, slot) in patterns.iter_mut().enumerate() {
            if slot.is_none() {
                *slot = Some(PatternSignature {
                    cluster_index: c,
                    ..template.clone()
                });
            }
        }
    }

    let signature = ImageSignature {
        entry_id: entry_id.to_string(),
        k,
        params: params.clone(),
        stats_fingerprint: stats.fingerprint(),
        patterns: patterns.into_iter().flatten().collect(),
        classical: stats.scale(classical).to_vec(),
        window_mean: mean_vector(&points).to_vec(),
        degenerate,
    };
    let map = SegmentationMap {
        entry_id: entry_id.to_string(),
        k,
        frames: win.frames,
        grid_rows: win.grid_rows,
        grid_cols: win.grid_cols,
        window_size: win.window_size,
        labels: survivors
            .iter()
            .map(|s| s.map_or(WindowLabel::Discarded, WindowLabel::Pattern))
            .collect(),
    };
    Ok((signature, map))
}
