//! Image distances, k-NN voting and stratified fold planning.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifest::Manifest;
use crate::matching::{euclidean, match_signatures};
use crate::pattern::ImageSignature;

pub const DEFAULT_FOLDS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// One descriptor for the whole image.
    Classical,
    /// Best matching between pattern sets.
    Heterogeneous,
    /// Euclidean distance between mean window descriptors.
    WindowMean,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Classical => "classical",
            Method::Heterogeneous => "heterogeneous",
            Method::WindowMean => "window-mean",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classical" => Ok(Method::Classical),
            "heterogeneous" => Ok(Method::Heterogeneous),
            "window-mean" => Ok(Method::WindowMean),
            other => Err(Error::validation(format!("unknown method `{other}`"))),
        }
    }
}

pub fn image_distance(a: &ImageSignature, b: &ImageSignature, method: Method) -> Result<f64> {
    if a.params != b.params || a.stats_fingerprint != b.stats_fingerprint {
        return Err(Error::validation(format!(
            "signatures `{}` and `{}` were built with different parameters",
            a.entry_id, b.entry_id
        )));
    }
    match method {
        Method::Classical => euclidean(&a.classical, &b.classical),
        Method::Heterogeneous => Ok(match_signatures(a, b)?.total_cost),
        Method::WindowMean => euclidean(&a.window_mean, &b.window_mean),
    }
}

/// Majority vote among the `knn_k` nearest training signatures.
///
/// Distance ties keep training order; vote ties go to the tied class whose
/// member ranks nearest.
pub fn knn_classify<'a>(
    test: &ImageSignature,
    train: &[(&ImageSignature, &'a str)],
    knn_k: usize,
    method: Method,
) -> Result<&'a str> {
    if train.is_empty() {
        return Err(Error::validation("k-NN needs at least one training sample"));
    }
    if knn_k == 0 {
        return Err(Error::validation("k-NN neighbor count must be at least 1"));
    }
    let mut ranked: Vec<(f64, usize)> = train
        .iter()
        .enumerate()
        .map(|(i, (sig, _))| Ok((image_distance(test, sig, method)?, i)))
        .collect::<Result<_>>()?;
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    ranked.truncate(knn_k);

    let mut votes: BTreeMap<&str, usize> = BTreeMap::new();
    for &(_, i) in &ranked {
        *votes.entry(train[i].1).or_default() += 1;
    }
    let top = votes.values().copied().max().unwrap_or(0);
    let winner = ranked
        .iter()
        .map(|&(_, i)| train[i].1)
        .find(|label| votes[label] == top)
        .expect("ranked is non-empty");
    Ok(winner)
}

/// Fold index per manifest entry, stratified by class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub seed: u64,
    pub n_folds: usize,
    /// `folds[i]` is the test fold of manifest entry `i`.
    pub folds: Vec<usize>,
}

impl FoldPlan {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.folds.len())
            .filter(|&i| self.folds[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.folds.len())
            .filter(|&i| self.folds[i] != fold)
            .collect()
    }
}

pub fn plan_folds(manifest: &Manifest, seed: u64) -> Result<FoldPlan> {
    plan_folds_with(manifest, seed, DEFAULT_FOLDS)
}

/// Shuffle each class with the seed and deal its entries round-robin over the
/// folds. The dealing position carries over between classes (taken in label
/// order) so that overall fold sizes stay balanced too.
pub fn plan_folds_with(manifest: &Manifest, seed: u64, n_folds: usize) -> Result<FoldPlan> {
    if n_folds < 2 {
        return Err(Error::validation("cross-validation needs at least 2 folds"));
    }
    let mut by_class: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, e) in manifest.entries.iter().enumerate() {
        by_class.entry(e.class_label.as_str()).or_default().push(i);
    }
    if let Some((label, _)) = by_class.iter().find(|(_, v)| v.len() < 2) {
        return Err(Error::validation(format!(
            "class `{label}` has a single entry"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![0; manifest.entries.len()];
    let mut next = 0;
    for members in by_class.values_mut() {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            folds[i] = next % n_folds;
            next += 1;
        }
    }
    Ok(FoldPlan {
        seed,
        n_folds,
        folds,
    })
}
