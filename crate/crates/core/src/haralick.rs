//! Contrast, correlation, energy and homogeneity of a co-occurrence matrix,
//! and the 32-value window descriptor built from them.
//!
//! Descriptor layout is distance-major, then angle, then feature:
//!
//! ```text
//! index = (distance_index * 4 + angle_index) * 4 + feature_index
//! distances = [1, 2]
//! angles    = [0, 45, 90, 135]
//! features  = [contrast, correlation, energy, homogeneity]
//! ```

use std::ops::Index;

use crate::error::Result;
use crate::glcm::{compute_glcm, glcm_marginals, Angle, Glcm, GlcmSpec};
use crate::gray::QuantizedImage;

pub const DESCRIPTOR_LEN: usize = 32;
pub const DISTANCES: [usize; 2] = [1, 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Feature {
    Contrast,
    Correlation,
    Energy,
    Homogeneity,
}

impl Feature {
    pub const ALL: [Feature; 4] = [
        Feature::Contrast,
        Feature::Correlation,
        Feature::Energy,
        Feature::Homogeneity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::Contrast => "contrast",
            Feature::Correlation => "correlation",
            Feature::Energy => "energy",
            Feature::Homogeneity => "homogeneity",
        }
    }
}

/// Position of a feature inside a [`Descriptor32`].
pub fn layout_index(distance_index: usize, angle: Angle, feature: Feature) -> usize {
    let a = Angle::ALL.iter().position(|&x| x == angle).unwrap();
    let f = Feature::ALL.iter().position(|&x| x == feature).unwrap();
    (distance_index * 4 + a) * 4 + f
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Descriptor32(pub [f64; DESCRIPTOR_LEN]);

impl Descriptor32 {
    pub fn values(&self) -> &[f64; DESCRIPTOR_LEN] {
        &self.0
    }

    pub fn get(&self, distance_index: usize, angle: Angle, feature: Feature) -> f64 {
        self.0[layout_index(distance_index, angle, feature)]
    }

    /// Check every entry against its feature's admissible range.
    pub fn in_range(&self) -> bool {
        self.0.iter().enumerate().all(|(idx, &v)| {
            v.is_finite()
                && match Feature::ALL[idx % 4] {
                    Feature::Contrast => v >= 0.0,
                    Feature::Correlation => (-1.0..=1.0).contains(&v),
                    Feature::Energy => (0.0..=1.0).contains(&v),
                    Feature::Homogeneity => v > 0.0 && v <= 1.0,
                }
        })
    }
}

impl Index<usize> for Descriptor32 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

pub fn contrast(m: &Glcm) -> f64 {
    let g = m.levels();
    let mut acc = 0.0;
    for i in 0..g {
        for j in 0..g {
            let d = i as f64 - j as f64;
            acc += d * d * m.p(i, j);
        }
    }
    acc
}

/// Pearson correlation of the gray-level pair; 0 when either marginal has zero spread.
pub fn correlation(m: &Glcm) -> f64 {
    let mg = glcm_marginals(m);
    let g = m.levels();
    let mut cross = 0.0;
    for i in 0..g {
        for j in 0..g {
            cross += (i * j) as f64 * m.p(i, j);
        }
    }
    correlation_from(cross, mg.mu_x, mg.mu_y, mg.sigma_x, mg.sigma_y)
}

#[inline]
fn correlation_from(cross: f64, mu_x: f64, mu_y: f64, sigma_x: f64, sigma_y: f64) -> f64 {
    let spread = sigma_x * sigma_y;
    if spread < 1e-15 {
        return 0.0;
    }
    ((cross - mu_x * mu_y) / spread).clamp(-1.0, 1.0)
}

pub fn energy(m: &Glcm) -> f64 {
    m.probabilities().iter().map(|&v| v * v).sum()
}

pub fn homogeneity(m: &Glcm) -> f64 {
    let g = m.levels();
    let mut acc = 0.0;
    for i in 0..g {
        for j in 0..g {
            acc += m.p(i, j) / (1.0 + i.abs_diff(j) as f64);
        }
    }
    acc
}

/// All four features in one pass, in [`Feature::ALL`] order.
#[allow(clippy::needless_range_loop)]
pub fn features(m: &Glcm) -> [f64; 4] {
    let g = m.levels();
    let mut px = vec![0.0; g];
    let mut py = vec![0.0; g];
    let (mut con, mut cross, mut ene, mut hom) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..g {
        for j in 0..g {
            let v = m.p(i, j);
            if v == 0.0 {
                continue;
            }
            let diff = i.abs_diff(j) as f64;
            con += diff * diff * v;
            cross += (i * j) as f64 * v;
            ene += v * v;
            hom += v / (1.0 + diff);
            px[i] += v;
            py[j] += v;
        }
    }
    let (mu_x, sigma_x) = moments(&px);
    let (mu_y, sigma_y) = moments(&py);
    [
        con,
        correlation_from(cross, mu_x, mu_y, sigma_x, sigma_y),
        ene,
        hom,
    ]
}

fn moments(dist: &[f64]) -> (f64, f64) {
    let mu: f64 = dist.iter().enumerate().map(|(i, &p)| i as f64 * p).sum();
    let var: f64 = dist
        .iter()
        .enumerate()
        .map(|(i, &p)| (i as f64 - mu).powi(2) * p)
        .sum();
    (mu, var.sqrt())
}

/// Describe an image with symmetric co-occurrence matrices.
pub fn describe(img: &QuantizedImage) -> Result<Descriptor32> {
    describe_with(img, true)
}

pub fn describe_with(img: &QuantizedImage, symmetric: bool) -> Result<Descriptor32> {
    let mut out = [0.0; DESCRIPTOR_LEN];
    for (di, &d) in DISTANCES.iter().enumerate() {
        for (ai, &angle) in Angle::ALL.iter().enumerate() {
            let spec = GlcmSpec::new(d, angle, img.levels(), symmetric)?;
            let m = compute_glcm(img, &spec)?;
            let base = (di * 4 + ai) * 4;
            out[base..base + 4].copy_from_slice(&features(&m));
        }
    }
    Ok(Descriptor32(out))
}
