//! Dataset manifests: `id,source,class_label,kind` CSV files.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

pub const MANIFEST_HEADER: &str = "id,source,class_label,kind";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EntryKind {
    /// A single raster image.
    Static,
    /// A directory of frame images.
    Video,
}

impl fmt::Display for EntryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EntryKind::Static => "static",
            EntryKind::Video => "video",
        })
    }
}

impl FromStr for EntryKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "static" => Ok(EntryKind::Static),
            "video" => Ok(EntryKind::Video),
            other => Err(format!("unknown kind `{other}` (expected static or video)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusEntry {
    pub id: String,
    pub source: PathBuf,
    pub class_label: String,
    pub kind: EntryKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub name: String,
    pub entries: Vec<CorpusEntry>,
}

impl Manifest {
    /// Validate ids, labels and per-class counts.
    pub fn new(name: impl Into<String>, entries: Vec<CorpusEntry>) -> Result<Self> {
        let m = Manifest {
            name: name.into(),
            entries,
        };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        if self.entries.is_empty() {
            return Err(Error::validation("manifest has no entries"));
        }
        let mut ids = HashSet::new();
        for e in &self.entries {
            if e.id.is_empty() {
                return Err(Error::validation("entry id must be non-empty"));
            }
            if e.class_label.is_empty() {
                return Err(Error::validation(format!(
                    "entry `{}` has an empty class label",
                    e.id
                )));
            }
            if !ids.insert(e.id.as_str()) {
                return Err(Error::validation(format!("duplicate entry id `{}`", e.id)));
            }
        }
        let singletons: Vec<&str> = self
            .class_counts()
            .into_iter()
            .filter(|&(_, n)| n < 2)
            .map(|(c, _)| c)
            .collect();
        if !singletons.is_empty() {
            return Err(Error::validation(format!(
                "classes with a single entry cannot be cross-validated: {}",
                singletons.join(", ")
            )));
        }
        Ok(())
    }

    /// Entry count per class label, in label order.
    pub fn class_counts(&self) -> BTreeMap<&str, usize> {
        let mut counts = BTreeMap::new();
        for e in &self.entries {
            *counts.entry(e.class_label.as_str()).or_insert(0) += 1;
        }
        counts
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Serialize back to CSV with sources written as given.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(MANIFEST_HEADER);
        out.push('\n');
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{}\n",
                e.id,
                e.source.display(),
                e.class_label,
                e.kind
            ));
        }
        out
    }
}

/// Read a manifest file. Relative sources resolve against the manifest's directory.
pub fn read_manifest(path: impl AsRef<Path>) -> Result<Manifest> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_manifest(&text, path, base, name)
}

pub fn parse_manifest(text: &str, path: &Path, base: &Path, name: String) -> Result<Manifest> {
    let parse_err = |line: usize, reason: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end()));
    match lines.find(|(_, l)| !l.is_empty()) {
        Some((_, header)) if header.trim_start_matches('\u{feff}') == MANIFEST_HEADER => {}
        Some((n, header)) => {
            return Err(parse_err(
                n,
                format!("expected header `{MANIFEST_HEADER}`, found `{header}`"),
            ))
        }
        None => return Err(parse_err(1, "empty manifest".into())),
    }

    let mut entries = Vec::new();
    for (n, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let [id, source, class_label, kind] = fields[..] else {
            return Err(parse_err(
                n,
                format!("expected 4 fields, found {}", fields.len()),
            ));
        };
        let kind = kind.parse().map_err(|e| parse_err(n, e))?;
        if source.is_empty() {
            return Err(parse_err(n, "empty source path".into()));
        }
        let source = Path::new(source);
        let source = if source.is_absolute() {
            source.to_path_buf()
        } else {
            base.join(source)
        };
        entries.push(CorpusEntry {
            id: id.to_string(),
            source,
            class_label: class_label.to_string(),
            kind,
        });
    }
    Manifest::new(name, entries)
}
