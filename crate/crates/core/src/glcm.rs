//! Gray-level co-occurrence matrices.

use std::fmt;

use crate::error::{Error, Result};
use crate::gray::QuantizedImage;

/// Direction of the pixel displacement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Angle {
    Deg0,
    Deg45,
    Deg90,
    Deg135,
}

impl Angle {
    pub const ALL: [Angle; 4] = [Angle::Deg0, Angle::Deg45, Angle::Deg90, Angle::Deg135];

    pub fn degrees(self) -> u32 {
        match self {
            Angle::Deg0 => 0,
            Angle::Deg45 => 45,
            Angle::Deg90 => 90,
            Angle::Deg135 => 135,
        }
    }

    pub fn from_degrees(deg: u32) -> Option<Angle> {
        match deg {
            0 => Some(Angle::Deg0),
            45 => Some(Angle::Deg45),
            90 => Some(Angle::Deg90),
            135 => Some(Angle::Deg135),
            _ => None,
        }
    }

    /// `(column, row)` offset of the neighbor at `distance`, with row 0 at the top.
    pub fn offset(self, distance: usize) -> (isize, isize) {
        let d = distance as isize;
        match self {
            Angle::Deg0 => (d, 0),
            Angle::Deg45 => (d, -d),
            Angle::Deg90 => (0, -d),
            Angle::Deg135 => (-d, -d),
        }
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.degrees())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GlcmSpec {
    pub distance: usize,
    pub angle: Angle,
    pub levels: u16,
    pub symmetric: bool,
}

impl GlcmSpec {
    pub fn new(distance: usize, angle: Angle, levels: u16, symmetric: bool) -> Result<Self> {
        if distance == 0 {
            return Err(Error::validation(
                "co-occurrence distance must be at least 1",
            ));
        }
        if levels < 2 {
            return Err(Error::validation(
                "co-occurrence matrix needs at least 2 levels",
            ));
        }
        Ok(GlcmSpec {
            distance,
            angle,
            levels,
            symmetric,
        })
    }
}

/// A normalized co-occurrence matrix, stored row-major as `levels * levels` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Glcm {
    spec: GlcmSpec,
    counts: Vec<u64>,
    p: Vec<f64>,
    pair_count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Marginals {
    pub mu_x: f64,
    pub mu_y: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
}

impl Glcm {
    /// Wrap an already-normalized probability matrix (no pair counts attached).
    pub fn from_probabilities(spec: GlcmSpec, p: Vec<f64>) -> Result<Self> {
        let g = spec.levels as usize;
        if p.len() != g * g {
            return Err(Error::validation(format!(
                "expected {} matrix entries, found {}",
                g * g,
                p.len()
            )));
        }
        if p.iter().any(|&v| !v.is_finite() || v < 0.0) {
            return Err(Error::validation(
                "matrix entries must be finite and non-negative",
            ));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::validation(format!(
                "matrix entries sum to {total}, expected 1"
            )));
        }
        Ok(Glcm {
            spec,
            counts: Vec::new(),
            p,
            pair_count: 0,
        })
    }

    pub fn spec(&self) -> &GlcmSpec {
        &self.spec
    }

    pub fn levels(&self) -> usize {
        self.spec.levels as usize
    }

    /// Raw co-occurrence counts; empty for matrices built from probabilities.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    /// Number of in-bounds displaced pixel pairs that contributed.
    pub fn pair_count(&self) -> u64 {
        self.pair_count
    }

    #[inline]
    pub fn p(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.levels() + j]
    }

    pub fn marginals(&self) -> Marginals {
        glcm_marginals(self)
    }
}

/// Count displaced gray-level pairs and normalize to relative frequencies.
pub fn compute_glcm(img: &QuantizedImage, spec: &GlcmSpec) -> Result<Glcm> {
    if img.levels() != spec.levels {
        return Err(Error::validation(format!(
            "image has {} gray levels but the matrix expects {}",
            img.levels(),
            spec.levels
        )));
    }
    let g = spec.levels as usize;
    let (dx, dy) = spec.angle.offset(spec.distance);
    let (w, h) = (img.width(), img.height());

    // source columns/rows whose neighbor stays inside the image
    let col_range = if dx >= 0 {
        0..w.saturating_sub(dx as usize)
    } else {
        (-dx) as usize..w.max((-dx) as usize)
    };
    let row_range = if dy >= 0 {
        0..h.saturating_sub(dy as usize)
    } else {
        (-dy) as usize..h.max((-dy) as usize)
    };
    let pair_count = (col_range.len() * row_range.len()) as u64;
    if pair_count == 0 {
        return Err(Error::DegenerateMatrix(format!(
            "{w}x{h} image has no pixel pairs at distance {} angle {}",
            spec.distance, spec.angle
        )));
    }

    let data = img.data();
    let mut counts = vec![0u64; g * g];
    for r in row_range {
        let nr = (r as isize + dy) as usize;
        let row = &data[r * w..(r + 1) * w];
        let neighbor_row = &data[nr * w..(nr + 1) * w];
        for c in col_range.clone() {
            let nc = (c as isize + dx) as usize;
            let i = row[c] as usize;
            let j = neighbor_row[nc] as usize;
            counts[i * g + j] += 1;
        }
    }
    if spec.symmetric {
        for i in 0..g {
            for j in i + 1..g {
                let s = counts[i * g + j] + counts[j * g + i];
                counts[i * g + j] = s;
                counts[j * g + i] = s;
            }
            counts[i * g + i] *= 2;
        }
    }
    let total = if spec.symmetric {
        2 * pair_count
    } else {
        pair_count
    } as f64;
    let p = counts.iter().map(|&c| c as f64 / total).collect();
    Ok(Glcm {
        spec: *spec,
        counts,
        p,
        pair_count,
    })
}

/// Means and standard deviations of the row and column marginal distributions.
#[allow(clippy::needless_range_loop)]
pub fn glcm_marginals(m: &Glcm) -> Marginals {
    let g = m.levels();
    let mut px = vec![0.0; g];
    let mut py = vec![0.0; g];
    for i in 0..g {
        for j in 0..g {
            let v = m.p(i, j);
            px[i] += v;
            py[j] += v;
        }
    }
    let (mu_x, sigma_x) = moments(&px);
    let (mu_y, sigma_y) = moments(&py);
    Marginals {
        mu_x,
        mu_y,
        sigma_x,
        sigma_y,
    }
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

#[cfg(test)]
mod tests {
    use super::*;

    fn img(w: usize, h: usize, levels: u16, data: &[u8]) -> QuantizedImage {
        QuantizedImage::new(w, h, levels, data.to_vec()).unwrap()
    }

    fn spec(d: usize, a: Angle, levels: u16) -> GlcmSpec {
        GlcmSpec::new(d, a, levels, true).unwrap()
    }

    #[test]
    fn constant_image_point_mass() {
        let m = compute_glcm(&img(2, 2, 2, &[0, 0, 0, 0]), &spec(1, Angle::Deg0, 2)).unwrap();
        assert_eq!(m.probabilities(), &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(m.pair_count(), 2);
        let mg = m.marginals();
        assert_eq!(
            (mg.mu_x, mg.mu_y, mg.sigma_x, mg.sigma_y),
            (0.0, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn two_column_image() {
        let m = compute_glcm(&img(2, 2, 2, &[0, 1, 0, 1]), &spec(1, Angle::Deg0, 2)).unwrap();
        assert_eq!(m.probabilities(), &[0.0, 0.5, 0.5, 0.0]);
        assert_eq!(m.counts(), &[0, 2, 2, 0]);
        let mg = m.marginals();
        assert_eq!((mg.mu_x, mg.mu_y), (0.5, 0.5));
        assert_eq!((mg.sigma_x, mg.sigma_y), (0.5, 0.5));
    }

    #[test]
    fn asymmetric_counts_one_direction() {
        let s = GlcmSpec::new(1, Angle::Deg0, 2, false).unwrap();
        let m = compute_glcm(&img(2, 2, 2, &[0, 1, 0, 1]), &s).unwrap();
        assert_eq!(m.counts(), &[0, 2, 0, 0]);
        assert_eq!(m.probabilities(), &[0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn offsets_follow_convention() {
        assert_eq!(Angle::Deg0.offset(2), (2, 0));
        assert_eq!(Angle::Deg45.offset(2), (2, -2));
        assert_eq!(Angle::Deg90.offset(2), (0, -2));
        assert_eq!(Angle::Deg135.offset(2), (-2, -2));
        // 45 degrees pairs a pixel with its upper-right neighbor
        let s = GlcmSpec::new(1, Angle::Deg45, 4, false).unwrap();
        let m = compute_glcm(&img(2, 2, 4, &[0, 1, 2, 3]), &s).unwrap();
        assert_eq!(m.pair_count(), 1);
        assert_eq!(m.counts()[2 * 4 + 1], 1);
    }

    #[test]
    fn pair_counts_match_geometry() {
        let image = img(5, 3, 2, &[0; 15]);
        for d in 1..=2 {
            for a in Angle::ALL {
                let m = compute_glcm(&image, &spec(d, a, 2)).unwrap();
                let (dx, dy) = a.offset(d);
                let expected = (5 - dx.unsigned_abs()) * (3 - dy.unsigned_abs());
                assert_eq!(m.pair_count(), expected as u64, "d={d} a={a}");
            }
        }
    }

    #[test]
    fn degenerate_when_displacement_too_large() {
        let err = compute_glcm(&img(2, 2, 2, &[0; 4]), &spec(2, Angle::Deg0, 2)).unwrap_err();
        assert!(matches!(err, Error::DegenerateMatrix(_)));
        let err = compute_glcm(&img(1, 3, 2, &[0; 3]), &spec(1, Angle::Deg45, 2)).unwrap_err();
        assert!(matches!(err, Error::DegenerateMatrix(_)));
    }

    #[test]
    fn level_mismatch_rejected() {
        assert!(compute_glcm(&img(2, 2, 4, &[0; 4]), &spec(1, Angle::Deg0, 2)).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(GlcmSpec::new(0, Angle::Deg0, 4, true).is_err());
        assert_eq!(Angle::from_degrees(135), Some(Angle::Deg135));
        assert_eq!(Angle::from_degrees(30), None);
    }

    #[test]
    fn from_probabilities_checks_mass() {
        let s = spec(1, Angle::Deg0, 2);
        assert!(Glcm::from_probabilities(s, vec![0.25; 4]).is_ok());
        assert!(Glcm::from_probabilities(s, vec![0.3; 4]).is_err());
        assert!(Glcm::from_probabilities(s, vec![1.5, -0.5, 0.0, 0.0]).is_err());
        assert!(Glcm::from_probabilities(s, vec![1.0]).is_err());
    }
}
