//! Cross-validated comparison of the classical and heterogeneous methods.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use log::info;
use rayon::prelude::*;

use crate::classify::{knn_classify, plan_folds, FoldPlan, Method};
use crate::config::{MethodSelection, RunConfig};
use crate::error::{Error, Result};
use crate::features::EntryFeatures;
use crate::manifest::Manifest;
use crate::pattern::{build_signature, fit_normalization, ImageSignature};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassTally {
    pub label: String,
    pub correct: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyReport {
    pub dataset: String,
    pub method: Method,
    pub fold_correct: Vec<usize>,
    pub fold_total: Vec<usize>,
    pub per_class: Vec<ClassTally>,
}

impl AccuracyReport {
    pub fn correct(&self) -> usize {
        self.fold_correct.iter().sum()
    }

    pub fn total(&self) -> usize {
        self.fold_total.iter().sum()
    }

    /// Percentage of test entries classified correctly over all folds.
    pub fn overall_accuracy(&self) -> f64 {
        percent(self.correct(), self.total())
    }

    pub fn fold_accuracy(&self) -> Vec<f64> {
        self.fold_correct
            .iter()
            .zip(&self.fold_total)
            .map(|(&c, &t)| percent(c, t))
            .collect()
    }
}

fn percent(correct: usize, total: usize) -> f64 {
    if total == 0 {
        f64::NAN
    } else {
        100.0 * correct as f64 / total as f64
    }
}

/// Predicted label per manifest entry for one method.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Predictions {
    pub method: Method,
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkOutcome {
    pub dataset: String,
    pub config: RunConfig,
    pub plan: FoldPlan,
    pub class_count: usize,
    pub predictions: Vec<Predictions>,
    pub reports: Vec<AccuracyReport>,
    /// Signatures whose pattern set had to be padded with copies.
    pub degenerate_signatures: usize,
}

impl BenchmarkOutcome {
    pub fn report(&self, method: Method) -> Option<&AccuracyReport> {
        self.reports.iter().find(|r| r.method == method)
    }

    /// Heterogeneous minus classical overall accuracy, when both ran.
    pub fn delta(&self) -> Option<f64> {
        Some(
            self.report(Method::Heterogeneous)?.overall_accuracy()
                - self.report(Method::Classical)?.overall_accuracy(),
        )
    }
}

pub fn selected_methods(sel: MethodSelection) -> Vec<Method> {
    match sel {
        MethodSelection::Classical => vec![Method::Classical],
        MethodSelection::Heterogeneous => vec![Method::Heterogeneous],
        MethodSelection::Both => vec![Method::Classical, Method::Heterogeneous],
    }
}

struct FoldResult {
    predictions: Vec<(usize, Vec<String>)>,
    degenerate: usize,
}

/// Signatures for the given entries under statistics fit on `train` windows only.
pub fn fold_signatures(
    features: &[EntryFeatures],
    train: &[usize],
    cfg: &RunConfig,
) -> Result<Vec<ImageSignature>> {
    let stats = fit_normalization(
        train
            .iter()
            .flat_map(|&i| features[i].windows.descriptors()),
    )?;
    let params = cfg.signature_params();
    features
        .par_iter()
        .map(|f| {
            build_signature(&f.entry_id, &f.windows, &f.classical, &params, &stats)
                .map(|(sig, _)| sig)
        })
        .collect()
}

/// Run stratified cross-validation over precomputed entry features.
///
/// `methods` may include [`Method::WindowMean`] in addition to the two compared
/// methods. All methods share one fold plan and one set of signatures per fold.
pub fn run_benchmark(
    manifest: &Manifest,
    features: &[EntryFeatures],
    cfg: &RunConfig,
    methods: &[Method],
) -> Result<BenchmarkOutcome> {
    cfg.validate()?;
    if features.len() != manifest.len() {
        return Err(Error::Internal(format!(
            "{} feature sets for {} manifest entries",
            features.len(),
            manifest.len()
        )));
    }
    if methods.is_empty() {
        return Err(Error::validation("no methods selected"));
    }
    let plan = plan_folds(manifest, cfg.seed)?;
    let labels: Vec<&str> = manifest
        .entries
        .iter()
        .map(|e| e.class_label.as_str())
        .collect();

    let fold_results: Vec<FoldResult> = (0..plan.n_folds)
        .into_par_iter()
        .map(|fold| {
            let train = plan.train_indices(fold);
            let test = plan.test_indices(fold);
            if test.is_empty() {
                return Ok(FoldResult {
                    predictions: Vec::new(),
                    degenerate: 0,
                });
            }
            let sigs = fold_signatures(features, &train, cfg)?;
            let degenerate = test.iter().filter(|&&i| sigs[i].degenerate).count();
            let train_set: Vec<(&ImageSignature, &str)> =
                train.iter().map(|&i| (&sigs[i], labels[i])).collect();
            let predictions = test
                .par_iter()
                .map(|&i| {
                    let per_method = methods
                        .iter()
                        .map(|&m| {
                            knn_classify(&sigs[i], &train_set, cfg.knn, m).map(str::to_string)
                        })
                        .collect::<Result<Vec<_>>>()?;
                    Ok((i, per_method))
                })
                .collect::<Result<Vec<_>>>()?;
            info!("fold {fold}: {} test entries", test.len());
            Ok(FoldResult {
                predictions,
                degenerate,
            })
        })
        .collect::<Result<_>>()?;

    let mut predicted = vec![vec![String::new(); manifest.len()]; methods.len()];
    let mut degenerate_signatures = 0;
    for fr in &fold_results {
        degenerate_signatures += fr.degenerate;
        for (i, per_method) in &fr.predictions {
            for (m, label) in per_method.iter().enumerate() {
                predicted[m][*i] = label.clone();
            }
        }
    }

    let class_counts = manifest.class_counts();
    let reports = methods
        .iter()
        .zip(&predicted)
        .map(|(&method, preds)| {
            let mut fold_correct = vec![0; plan.n_folds];
            let mut fold_total = vec![0; plan.n_folds];
            let mut per_class: BTreeMap<&str, (usize, usize)> =
                class_counts.keys().map(|&c| (c, (0, 0))).collect();
            for (i, truth) in labels.iter().enumerate() {
                let ok = preds[i] == *truth;
                let f = plan.folds[i];
                fold_total[f] += 1;
                fold_correct[f] += usize::from(ok);
                let t = per_class.get_mut(truth).expect("label from manifest");
                t.0 += usize::from(ok);
                t.1 += 1;
            }
            AccuracyReport {
                dataset: manifest.name.clone(),
                method,
                fold_correct,
                fold_total,
                per_class: per_class
                    .into_iter()
                    .map(|(label, (correct, total))| ClassTally {
                        label: label.to_string(),
                        correct,
                        total,
                    })
                    .collect(),
            }
        })
        .collect();

    Ok(BenchmarkOutcome {
        dataset: manifest.name.clone(),
        config: cfg.clone(),
        plan,
        class_count: class_counts.len(),
        predictions: methods
            .iter()
            .zip(predicted)
            .map(|(&method, labels)| Predictions { method, labels })
            .collect(),
        reports,
        degenerate_signatures,
    })
}

fn quote(s: &str) -> String {
    serde_json::to_string(s).expect("string serialization cannot fail")
}

fn fmt2(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:.2}")
    }
}

fn list<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    let parts: Vec<String> = items.into_iter().map(|x| x.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

/// Render the outcome as a TOML document. Accuracies are percentages with two decimals.
pub fn render_report(outcome: &BenchmarkOutcome) -> String {
    let c = &outcome.config;
    let mut s = String::new();
    let _ = writeln!(s, "# hetex benchmark report");
    let _ = writeln!(s, "[run]");
    let _ = writeln!(s, "dataset = {}", quote(&outcome.dataset));
    let _ = writeln!(s, "entries = {}", outcome.plan.folds.len());
    let _ = writeln!(s, "classes = {}", outcome.class_count);
    let _ = writeln!(s, "folds = {}", outcome.plan.n_folds);
    let _ = writeln!(s, "seed = {}", c.seed);
    let _ = writeln!(s, "window_size = {}", c.window_size);
    let _ = writeln!(s, "gray_levels = {}", c.gray_levels);
    let _ = writeln!(s, "patterns = {}", c.patterns);
    let _ = writeln!(s, "trim_fraction = {}", fmt_float(c.trim_fraction));
    let _ = writeln!(s, "knn = {}", c.knn);
    let _ = writeln!(s, "frame_stride = {}", c.frame_stride);
    let _ = writeln!(s, "symmetric = {}", c.symmetric);
    let _ = writeln!(s, "glcm_distances = {}", list(c.glcm_distances()));
    let _ = writeln!(s, "glcm_angles = {}", list(c.glcm_angles()));
    let _ = writeln!(s, "method = {}", quote(&c.method.to_string()));
    let _ = writeln!(
        s,
        "workers = {}",
        c.workers.map_or_else(|| quote("auto"), |w| w.to_string())
    );
    let _ = writeln!(
        s,
        "degenerate_signatures = {}",
        outcome.degenerate_signatures
    );

    for r in &outcome.reports {
        let name = r.method.name();
        let _ = writeln!(s);
        let _ = writeln!(s, "[{}]", name);
        let _ = writeln!(s, "overall_accuracy = {}", fmt2(r.overall_accuracy()));
        let _ = writeln!(s, "correct = {}", r.correct());
        let _ = writeln!(s, "total = {}", r.total());
        let _ = writeln!(
            s,
            "fold_accuracy = {}",
            list(r.fold_accuracy().into_iter().map(fmt2))
        );
        let _ = writeln!(s, "fold_correct = {}", list(&r.fold_correct));
        let _ = writeln!(s, "fold_total = {}", list(&r.fold_total));
        for t in &r.per_class {
            let _ = writeln!(s);
            let _ = writeln!(s, "[[{}.class]]", name);
            let _ = writeln!(s, "label = {}", quote(&t.label));
            let _ = writeln!(s, "correct = {}", t.correct);
            let _ = writeln!(s, "total = {}", t.total);
        }
    }
    if let Some(delta) = outcome.delta() {
        let _ = writeln!(s);
        let _ = writeln!(s, "[comparison]");
        let _ = writeln!(s, "heterogeneous_minus_classical = {}", fmt2(delta));
    }
    s
}

/// Shortest float text that still parses as a TOML float.
fn fmt_float(v: f64) -> String {
    let t = v.to_string();
    if t.contains('.') || t.contains('e') {
        t
    } else {
        format!("{t}.0")
    }
}
