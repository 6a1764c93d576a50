mod common;

use common::*;
use hetex::haralick::{Descriptor32, DESCRIPTOR_LEN};
use hetex::pattern::{
    build_signature, cluster_windows, fit_normalization, kmeans, trim_survivors, FeatureVector,
    WindowLabel,
};
use hetex::synth::{composite, Texture};
use hetex::window::{decompose, whole_image_descriptor};
use hetex::QuantizedImage;
use proptest::prelude::*;
use rand::Rng;

fn fv(values: &[f64]) -> FeatureVector {
    let mut out = [0.0; DESCRIPTOR_LEN];
    out[..values.len()].copy_from_slice(values);
    out
}

fn sq(a: &FeatureVector, b: &FeatureVector) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

#[test]
fn normalization_examples() {
    let same = [Descriptor32([3.0; 32]), Descriptor32([3.0; 32])];
    let s = fit_normalization(&same).unwrap();
    assert!(s.std.iter().all(|&v| v == 0.0));
    assert_eq!(s.zero_variance_dims().len(), 32);
    assert!(s.scale(&same[0]).iter().all(|&v| v == 0.0));

    let mut a = [5.0; 32];
    let mut b = [5.0; 32];
    a[0] = 0.0;
    b[0] = 2.0;
    let s = fit_normalization(&[Descriptor32(a), Descriptor32(b)]).unwrap();
    assert_eq!((s.mean[0], s.std[0]), (1.0, 1.0));
    assert_eq!(s.scale(&Descriptor32(a))[0], -1.0);

    assert!(fit_normalization(&[Descriptor32(a)]).is_err());
}

#[test]
fn scaled_training_set_has_zero_mean() {
    let mut r = rng(3);
    let set: Vec<Descriptor32> = (0..200)
        .map(|_| {
            Descriptor32(std::array::from_fn(|i| {
                r.gen_range(0.0..(i + 1) as f64 * 10.0)
            }))
        })
        .collect();
    let s = fit_normalization(&set).unwrap();
    for dim in 0..32 {
        let m: f64 = set.iter().map(|d| s.scale(d)[dim]).sum::<f64>() / set.len() as f64;
        assert!(m.abs() < 1e-9);
    }
}

/// Two blobs whose centers are 100x farther apart than their spread.
fn blobs(r: &mut impl Rng, n: usize) -> (Vec<FeatureVector>, Vec<usize>) {
    let centers = [fv(&[0.0, 0.0, 0.0]), fv(&[100.0, -50.0, 30.0])];
    let mut pts = Vec::new();
    let mut truth = Vec::new();
    for i in 0..n {
        let c = i % 2;
        let mut p = centers[c];
        for v in p.iter_mut().take(3) {
            *v += r.gen_range(-0.5..0.5);
        }
        pts.push(p);
        truth.push(c);
    }
    (pts, truth)
}

#[test]
fn separated_blobs_are_recovered() {
    let mut r = rng(5);
    for seed in 0..20 {
        let (pts, truth) = blobs(&mut r, 60);
        let c = kmeans(&pts, 2, seed).unwrap();
        let labels: Vec<Option<usize>> = c.assignments.iter().map(|&a| Some(a)).collect();
        assert_eq!(half_purity(&labels, &truth), 1.0);
        // every point is with its nearest final centroid
        for (p, &a) in pts.iter().zip(&c.assignments) {
            let d: Vec<f64> = c.centroids.iter().map(|m| sq(p, m)).collect();
            assert!(d[a] <= d[1 - a]);
        }
    }
}

#[test]
fn single_cluster_centroid_is_the_mean() {
    let mut r = rng(9);
    let (pts, _) = blobs(&mut r, 31);
    let c = kmeans(&pts, 1, 0).unwrap();
    assert!(c.assignments.iter().all(|&a| a == 0));
    for d in 0..DESCRIPTOR_LEN {
        let m = pts.iter().map(|p| p[d]).sum::<f64>() / pts.len() as f64;
        assert!((c.centroids[0][d] - m).abs() < 1e-9);
    }
}

#[test]
fn identical_points_are_repaired() {
    let pts = vec![fv(&[1.0, 2.0]); 10];
    let c = kmeans(&pts, 2, 0).unwrap();
    assert!(c.degenerate);
    assert_eq!(c.cluster_sizes().iter().filter(|&&s| s == 10).count(), 1);
    assert!(kmeans(&pts[..1], 2, 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn objective_never_increases(
        pts in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 4), 4..60),
        k in 1usize..5,
        seed in any::<u64>(),
    ) {
        let pts: Vec<FeatureVector> = pts.iter().map(|p| fv(p)).collect();
        prop_assume!(pts.len() >= k);
        let c = kmeans(&pts, k, seed).unwrap();
        for w in c.objective_history.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-12);
        }
        prop_assert!(c.iterations <= hetex::pattern::MAX_LLOYD_ITERATIONS);
        prop_assert_eq!(c.assignments.len(), pts.len());
        prop_assert_eq!(kmeans(&pts, k, seed).unwrap(), c);
    }

    #[test]
    fn trimming_keeps_n_minus_floor(
        sizes in prop::collection::vec(1usize..40, 1..5),
        fraction in prop::sample::select(vec![0.0, 0.1, 0.25, 0.5, 0.9]),
        seed in any::<u64>(),
    ) {
        let mut r = rng(seed);
        let mut assignments = Vec::new();
        let mut pts = Vec::new();
        for (c, &n) in sizes.iter().enumerate() {
            for _ in 0..n {
                assignments.push(c);
                pts.push(fv(&[r.gen_range(-1.0..1.0), c as f64 * 10.0]));
            }
        }
        let s = trim_survivors(&assignments, &pts, sizes.len(), fraction).unwrap();
        for (c, &n) in sizes.iter().enumerate() {
            let kept = s.iter().filter(|&&x| x == Some(c)).count();
            prop_assert_eq!(kept, n - (fraction * n as f64).floor() as usize);
            // no survivor is farther from the cluster mean than a trimmed member
            let members: Vec<usize> = (0..pts.len()).filter(|&i| assignments[i] == c).collect();
            let mut mean = [0.0; DESCRIPTOR_LEN];
            for &i in &members {
                for d in 0..DESCRIPTOR_LEN { mean[d] += pts[i][d] / n as f64; }
            }
            let kept_max = members.iter().filter(|&&i| s[i].is_some()).map(|&i| sq(&pts[i], &mean)).fold(0.0, f64::max);
            let cut_min = members.iter().filter(|&&i| s[i].is_none()).map(|&i| sq(&pts[i], &mean)).fold(f64::INFINITY, f64::min);
            prop_assert!(kept_max <= cut_min);
        }
    }
}

#[test]
fn trimming_examples_and_ties() {
    let four: Vec<FeatureVector> = [0.0, 1.0, 2.0, 10.0].iter().map(|&v| fv(&[v])).collect();
    let s = trim_survivors(&[0; 4], &four, 1, 0.25).unwrap();
    assert_eq!(s, vec![Some(0), Some(0), Some(0), None]);
    let s = trim_survivors(&[0; 3], &four[..3], 1, 0.25).unwrap();
    assert!(s.iter().all(Option::is_some));
    assert!(trim_survivors(&[0; 4], &four, 1, 0.0)
        .unwrap()
        .iter()
        .all(Option::is_some));
    // -1 and +1 tie around mean 0; the later one is dropped
    let tied: Vec<FeatureVector> = [-1.0, 1.0, 0.0, 0.0].iter().map(|&v| fv(&[v])).collect();
    let s = trim_survivors(&[0; 4], &tied, 1, 0.25).unwrap();
    assert_eq!(s, vec![Some(0), None, Some(0), Some(0)]);
    assert!(trim_survivors(&[0; 4], &four, 1, 1.0).is_err());
}

fn composite_image(seed: u64) -> (QuantizedImage, usize) {
    let mut r = rng(seed);
    let px = composite(
        Texture::Checker {
            period: 1,
            lo: 20,
            hi: 230,
        },
        Texture::Flat { level: 128 },
        64,
        64,
        32,
        4.0,
        &mut r,
    );
    (QuantizedImage::from_gray8(64, 64, &px, 16).unwrap(), 32)
}

#[test]
fn signature_invariants() {
    let (img, _) = composite_image(1);
    let win = decompose(&img, 8).unwrap();
    let classical = whole_image_descriptor(&[img], true).unwrap();
    let stats = fit_normalization(win.descriptors()).unwrap();
    let p = params(2);
    let (sig, map) = build_signature("x", &win, &classical, &p, &stats).unwrap();
    assert_eq!(sig.patterns.len(), 2);
    assert!(!sig.degenerate);
    assert_eq!(
        build_signature("x", &win, &classical, &p, &stats)
            .unwrap()
            .0,
        sig
    );

    let points: Vec<FeatureVector> = win.descriptors().map(|d| stats.scale(d)).collect();
    for pat in &sig.patterns {
        let members: Vec<&FeatureVector> = map
            .labels
            .iter()
            .zip(&points)
            .filter(|(l, _)| **l == WindowLabel::Pattern(pat.cluster_index))
            .map(|(_, p)| p)
            .collect();
        assert_eq!(members.len(), pat.member_count);
        for d in 0..DESCRIPTOR_LEN {
            let m = members.iter().map(|p| p[d]).sum::<f64>() / members.len() as f64;
            assert!((pat.mean_vector[d] - m).abs() < 1e-9);
        }
    }
    let total: usize = sig.patterns.iter().map(|p| p.member_count).sum();
    assert_eq!(total + map.discarded_count(), win.len());

    // trimming removes floor(n/4) from each raw cluster
    let clustering = cluster_windows(&win, 2, &stats, p.seed).unwrap();
    let expected_discard: usize = clustering.cluster_sizes().iter().map(|n| n / 4).sum();
    assert_eq!(map.discarded_count(), expected_discard);
}

#[test]
fn single_pattern_without_trim_is_the_window_mean() {
    let (img, _) = composite_image(2);
    let win = decompose(&img, 8).unwrap();
    let classical = whole_image_descriptor(&[img], true).unwrap();
    let stats = fit_normalization(win.descriptors()).unwrap();
    let p = hetex::SignatureParams {
        trim_fraction: 0.0,
        ..params(1)
    };
    let (sig, map) = build_signature("x", &win, &classical, &p, &stats).unwrap();
    assert_eq!(map.discarded_count(), 0);
    assert_eq!(sig.patterns[0].member_count, win.len());
    let raw_mean = win.mean_descriptor();
    let scaled = stats.scale(&raw_mean);
    for (d, s) in scaled.iter().enumerate() {
        assert!((sig.patterns[0].mean_vector[d] - s).abs() < 1e-9);
        assert!((sig.window_mean[d] - sig.patterns[0].mean_vector[d]).abs() < 1e-9);
    }
}

#[test]
fn composite_segmentation_purity() {
    for seed in 0..5 {
        let (img, split) = composite_image(seed);
        let win = decompose(&img, 8).unwrap();
        let classical = whole_image_descriptor(&[img], true).unwrap();
        let stats = fit_normalization(win.descriptors()).unwrap();
        let (_, map) = build_signature("x", &win, &classical, &params(2), &stats).unwrap();
        let truth: Vec<usize> = win
            .windows
            .iter()
            .map(|w| usize::from(w.col * 8 >= split))
            .collect();
        let labels: Vec<Option<usize>> = map
            .labels
            .iter()
            .map(|l| match l {
                WindowLabel::Pattern(p) => Some(*p),
                WindowLabel::Discarded => None,
            })
            .collect();
        assert!(half_purity(&labels, &truth) >= 0.9);
    }
}

#[test]
fn constant_image_duplicates_its_pattern() {
    let img = QuantizedImage::new(32, 32, 16, vec![4; 1024]).unwrap();
    let win = decompose(&img, 8).unwrap();
    let classical = whole_image_descriptor(&[img], true).unwrap();
    let stats = fit_normalization(win.descriptors()).unwrap();
    let (sig, map) = build_signature("c", &win, &classical, &params(2), &stats).unwrap();
    assert!(sig.degenerate);
    assert_eq!(sig.patterns.len(), 2);
    assert_eq!(sig.patterns[0].mean_vector, sig.patterns[1].mean_vector);
    let raster = map.to_graymap(0).unwrap();
    assert_eq!(raster.maxval, 2);
    let labels: std::collections::BTreeSet<u8> =
        raster.samples.iter().copied().filter(|&v| v != 2).collect();
    assert_eq!(labels.len(), 1);
}

#[test]
fn raster_upscales_grid() {
    let (img, _) = composite_image(3);
    let win = decompose(&img, 8).unwrap();
    let classical = whole_image_descriptor(&[img], true).unwrap();
    let stats = fit_normalization(win.descriptors()).unwrap();
    let (_, map) = build_signature("x", &win, &classical, &params(2), &stats).unwrap();
    let g = map.to_graymap(0).unwrap();
    assert_eq!((g.width, g.height, g.maxval), (64, 64, 2));
    for (i, l) in map.labels.iter().enumerate() {
        let (r, c) = (i / 8, i % 8);
        let want = match l {
            WindowLabel::Pattern(p) => *p as u8,
            WindowLabel::Discarded => 2,
        };
        for y in r * 8..r * 8 + 8 {
            for x in c * 8..c * 8 + 8 {
                assert_eq!(g.samples[y * 64 + x], want);
            }
        }
    }
    assert!(map.to_graymap(1).is_err());
}
