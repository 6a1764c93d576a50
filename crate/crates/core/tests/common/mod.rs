//! Independent oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use hetex::glcm::{Angle, Glcm, GlcmSpec};
use hetex::pattern::{ImageSignature, PatternSignature, SignatureParams};
use hetex::QuantizedImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_image(rng: &mut impl Rng, w: usize, h: usize, levels: u16) -> QuantizedImage {
    let data = (0..w * h).map(|_| rng.gen_range(0..levels) as u8).collect();
    QuantizedImage::new(w, h, levels, data).unwrap()
}

/// Displacement from polar coordinates, with y pointing up (row index decreasing).
pub fn polar_offset(distance: usize, degrees: u32) -> (i64, i64) {
    let t = f64::from(degrees).to_radians();
    let d = distance as f64;
    // the diagonal steps are d in each axis, not d along the hypotenuse
    let (c, s) = (t.cos(), t.sin());
    let scale = d / c.abs().max(s.abs());
    ((c * scale).round() as i64, -(s * scale).round() as i64)
}

/// Count matrix by enumerating every ordered pixel pair in the image.
pub fn oracle_counts(
    img: &QuantizedImage,
    distance: usize,
    degrees: u32,
    symmetric: bool,
) -> Vec<u64> {
    let g = img.levels() as usize;
    let (dx, dy) = polar_offset(distance, degrees);
    let mut counts = vec![0u64; g * g];
    let coords: Vec<(i64, i64)> = (0..img.height() as i64)
        .flat_map(|r| (0..img.width() as i64).map(move |c| (c, r)))
        .collect();
    for &(c1, r1) in &coords {
        for &(c2, r2) in &coords {
            if c2 - c1 == dx && r2 - r1 == dy {
                let i = img.get(c1 as usize, r1 as usize) as usize;
                let j = img.get(c2 as usize, r2 as usize) as usize;
                counts[i * g + j] += 1;
                if symmetric {
                    counts[j * g + i] += 1;
                }
            }
        }
    }
    counts
}

/// Textbook Haralick values `[contrast, correlation, energy, homogeneity]`
/// from a row-major probability matrix.
pub fn oracle_features(p: &[f64], g: usize) -> [f64; 4] {
    let at = |i: usize, j: usize| p[i * g + j];
    let px: Vec<f64> = (0..g).map(|i| (0..g).map(|j| at(i, j)).sum()).collect();
    let py: Vec<f64> = (0..g).map(|j| (0..g).map(|i| at(i, j)).sum()).collect();
    let mean = |m: &[f64]| m.iter().enumerate().map(|(i, v)| i as f64 * v).sum::<f64>();
    let (mx, my) = (mean(&px), mean(&py));
    let var = |m: &[f64], mu: f64| {
        m.iter()
            .enumerate()
            .map(|(i, v)| (i as f64 - mu).powi(2) * v)
            .sum::<f64>()
    };
    let (sx, sy) = (var(&px, mx).sqrt(), var(&py, my).sqrt());
    let mut contrast = 0.0;
    let mut cov = 0.0;
    let mut energy = 0.0;
    let mut homog = 0.0;
    for i in 0..g {
        for j in 0..g {
            let v = at(i, j);
            let diff = i as f64 - j as f64;
            contrast += diff * diff * v;
            cov += (i as f64 - mx) * (j as f64 - my) * v;
            energy += v * v;
            homog += v / (1.0 + diff.abs());
        }
    }
    let corr = if sx * sy == 0.0 {
        0.0
    } else {
        (cov / (sx * sy)).clamp(-1.0, 1.0)
    };
    [contrast, corr, energy, homog]
}

pub fn glcm_from(p: Vec<f64>, g: u16) -> Glcm {
    let spec = GlcmSpec::new(1, Angle::Deg0, g, false).unwrap();
    Glcm::from_probabilities(spec, p).unwrap()
}

/// A random normalized matrix; roughly a third of the cells are zero.
pub fn random_probabilities(rng: &mut impl Rng, g: usize) -> Vec<f64> {
    let mut p: Vec<f64> = (0..g * g)
        .map(|_| {
            if rng.gen_bool(0.35) {
                0.0
            } else {
                rng.gen::<f64>()
            }
        })
        .collect();
    if p.iter().all(|&v| v == 0.0) {
        p[0] = 1.0;
    }
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= total);
    p
}

pub fn params(k: usize) -> SignatureParams {
    SignatureParams {
        k,
        window_size: 8,
        gray_levels: 16,
        trim_fraction: 0.25,
        seed: 42,
        symmetric: true,
    }
}

pub fn signature(patterns: &[Vec<f64>]) -> ImageSignature {
    let dim = patterns.first().map_or(32, Vec::len);
    ImageSignature {
        entry_id: String::new(),
        k: patterns.len(),
        params: params(patterns.len()),
        stats_fingerprint: "fixture".into(),
        patterns: patterns
            .iter()
            .enumerate()
            .map(|(i, m)| PatternSignature {
                cluster_index: i,
                member_count: 1,
                mean_vector: m.clone(),
            })
            .collect(),
        classical: vec![0.0; dim],
        window_mean: vec![0.0; dim],
        degenerate: false,
    }
}

pub fn random_signature(rng: &mut impl Rng, k: usize, dim: usize) -> ImageSignature {
    let patterns: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect())
        .collect();
    let mut s = signature(&patterns);
    s.classical = (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
    s
}

/// Minimum over all permutations, enumerated recursively in lexicographic
/// order; the first minimum wins.
pub fn oracle_assignment(cost: &[Vec<f64>]) -> (Vec<usize>, f64) {
    fn rec(cost: &[Vec<f64>], prefix: &mut Vec<usize>, best: &mut Option<(Vec<usize>, f64)>) {
        let k = cost.len();
        if prefix.len() == k {
            let total: f64 = prefix.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
            if best.as_ref().is_none_or(|b| total < b.1) {
                *best = Some((prefix.clone(), total));
            }
            return;
        }
        for j in 0..k {
            if !prefix.contains(&j) {
                prefix.push(j);
                rec(cost, prefix, best);
                prefix.pop();
            }
        }
    }
    let mut best = None;
    rec(cost, &mut Vec::new(), &mut best);
    best.unwrap()
}

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

pub fn cost_of(a: &ImageSignature, b: &ImageSignature) -> Vec<Vec<f64>> {
    a.patterns
        .iter()
        .map(|pa| {
            b.patterns
                .iter()
                .map(|pb| euclid(&pa.mean_vector, &pb.mean_vector))
                .collect()
        })
        .collect()
}

/// Fraction of windows whose label agrees with the ground-truth half, under
/// the better of the two label-to-half mappings. Trimmed windows are skipped.
pub fn half_purity(labels: &[Option<usize>], truth: &[usize]) -> f64 {
    let scored: Vec<(usize, usize)> = labels
        .iter()
        .zip(truth)
        .filter_map(|(l, &t)| l.map(|l| (l, t)))
        .collect();
    let direct = scored.iter().filter(|(l, t)| l == t).count();
    let swapped = scored.iter().filter(|(l, t)| *l == 1 - *t).count();
    direct.max(swapped) as f64 / scored.len() as f64
}
