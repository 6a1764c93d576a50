//! On-disk formats: the per-window feature dump and the signature store.
//!
//! The signature store is JSON Lines. The first line is a header object
//! (`"format": "hetex-signatures"`) carrying the signature parameters and the
//! normalization statistics; every following line is one entry's record.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::EntryFeatures;
use crate::haralick::DESCRIPTOR_LEN;
use crate::pattern::{ImageSignature, NormalizationStats, PatternSignature, SignatureParams};

pub const STORE_FORMAT: &str = "hetex-signatures";
pub const STORE_VERSION: u32 = 1;

/// Header line of the feature dump.
pub fn feature_dump_header() -> String {
    let mut cols = vec![
        "entry_id".to_string(),
        "window_row".to_string(),
        "window_col".to_string(),
    ];
    cols.extend((0..DESCRIPTOR_LEN).map(|i| format!("f{i}")));
    cols.join(",")
}

/// Write one CSV row per window. Video frames stack vertically: frame `f`
/// row `r` is written as `f * grid_rows + r`.
pub fn write_feature_dump(out: &mut impl Write, entries: &[EntryFeatures]) -> std::io::Result<()> {
    writeln!(out, "{}", feature_dump_header())?;
    for e in entries {
        let w = &e.windows;
        for rec in &w.windows {
            write!(
                out,
                "{},{},{}",
                e.entry_id,
                rec.frame * w.grid_rows + rec.row,
                rec.col
            )?;
            for v in rec.descriptor.values() {
                write!(out, ",{v}")?;
            }
            writeln!(out)?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreHeader {
    pub format: String,
    pub version: u32,
    pub params: SignatureParams,
    pub frame_stride: usize,
    pub stats_fingerprint: String,
    pub stats: NormalizationStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreRecord {
    pub entry_id: String,
    pub class_label: String,
    pub k: usize,
    pub seed: u64,
    pub pattern_means: Vec<Vec<f64>>,
    pub member_counts: Vec<usize>,
    pub classical: Vec<f64>,
    pub window_mean: Vec<f64>,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignatureStore {
    pub header: StoreHeader,
    pub entries: Vec<(ImageSignature, String)>,
}

impl SignatureStore {
    pub fn new(
        params: SignatureParams,
        frame_stride: usize,
        stats: NormalizationStats,
        entries: Vec<(ImageSignature, String)>,
    ) -> Self {
        SignatureStore {
            header: StoreHeader {
                format: STORE_FORMAT.into(),
                version: STORE_VERSION,
                params,
                frame_stride,
                stats_fingerprint: stats.fingerprint(),
                stats,
            },
            entries,
        }
    }

    pub fn write(&self, out: &mut impl Write) -> Result<()> {
        let to_io = |e: serde_json::Error| Error::Internal(format!("serializing store: {e}"));
        let line = serde_json::to_string(&self.header).map_err(to_io)?;
        writeln!(out, "{line}").map_err(|e| Error::io("<store>", e))?;
        for (sig, label) in &self.entries {
            let rec = StoreRecord {
                entry_id: sig.entry_id.clone(),
                class_label: label.clone(),
                k: sig.k,
                seed: sig.params.seed,
                pattern_means: sig.patterns.iter().map(|p| p.mean_vector.clone()).collect(),
                member_counts: sig.patterns.iter().map(|p| p.member_count).collect(),
                classical: sig.classical.clone(),
                window_mean: sig.window_mean.clone(),
                degenerate: sig.degenerate,
            };
            let line = serde_json::to_string(&rec).map_err(to_io)?;
            writeln!(out, "{line}").map_err(|e| Error::io("<store>", e))?;
        }
        Ok(())
    }

    pub fn read(input: impl BufRead, path: &Path) -> Result<Self> {
        let parse_err = |line: usize, reason: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            reason,
        };
        let mut lines = input.lines().enumerate().filter_map(|(i, l)| match l {
            Ok(text) if text.trim().is_empty() => None,
            other => Some((i + 1, other)),
        });
        let (n, first) = lines
            .next()
            .ok_or_else(|| parse_err(1, "empty signature store".into()))?;
        let first = first.map_err(|e| Error::io(path, e))?;
        let header: StoreHeader =
            serde_json::from_str(&first).map_err(|e| parse_err(n, e.to_string()))?;
        if header.format != STORE_FORMAT || header.version != STORE_VERSION {
            return Err(parse_err(
                n,
                format!("not a {STORE_FORMAT} v{STORE_VERSION} file"),
            ));
        }
        if header.stats.fingerprint() != header.stats_fingerprint {
            return Err(parse_err(n, "statistics fingerprint mismatch".into()));
        }
        let mut entries = Vec::new();
        for (n, line) in lines {
            let line = line.map_err(|e| Error::io(path, e))?;
            let rec: StoreRecord =
                serde_json::from_str(&line).map_err(|e| parse_err(n, e.to_string()))?;
            if rec.k != header.params.k
                || rec.pattern_means.len() != rec.k
                || rec.member_counts.len() != rec.k
            {
                return Err(parse_err(
                    n,
                    format!("record `{}` has the wrong pattern count", rec.entry_id),
                ));
            }
            if rec.seed != header.params.seed {
                return Err(parse_err(
                    n,
                    format!("record `{}` has a foreign seed", rec.entry_id),
                ));
            }
            let sig = ImageSignature {
                entry_id: rec.entry_id,
                k: rec.k,
                params: header.params.clone(),
                stats_fingerprint: header.stats_fingerprint.clone(),
                patterns: rec
                    .pattern_means
                    .into_iter()
                    .zip(rec.member_counts)
                    .enumerate()
                    .map(
                        |(cluster_index, (mean_vector, member_count))| PatternSignature {
                            cluster_index,
                            member_count,
                            mean_vector,
                        },
                    )
                    .collect(),
                classical: rec.classical,
                window_mean: rec.window_mean,
                degenerate: rec.degenerate,
            };
            entries.push((sig, rec.class_label));
        }
        Ok(SignatureStore { header, entries })
    }
}
