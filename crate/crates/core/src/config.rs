//! Run configuration and the flat `key = value` config file.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::glcm::Angle;
use crate::haralick::DISTANCES;
use crate::matching::MAX_PATTERNS;
use crate::pattern::SignatureParams;
use crate::window::MIN_WINDOW;

/// Which classifiers a benchmark evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodSelection {
    Classical,
    Heterogeneous,
    Both,
}

impl FromStr for MethodSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classical" => Ok(MethodSelection::Classical),
            "heterogeneous" => Ok(MethodSelection::Heterogeneous),
            "both" => Ok(MethodSelection::Both),
            other => Err(Error::validation(format!(
                "method `{other}` is not one of classical, heterogeneous, both"
            ))),
        }
    }
}

impl fmt::Display for MethodSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MethodSelection::Classical => "classical",
            MethodSelection::Heterogeneous => "heterogeneous",
            MethodSelection::Both => "both",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub window_size: usize,
    pub gray_levels: u16,
    pub patterns: usize,
    pub trim_fraction: f64,
    pub knn: usize,
    pub seed: u64,
    pub frame_stride: usize,
    pub symmetric: bool,
    /// Worker threads; `None` uses one per processor.
    pub workers: Option<usize>,
    pub method: MethodSelection,
    pub cache_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            window_size: 8,
            gray_levels: 16,
            patterns: 2,
            trim_fraction: 0.25,
            knn: 1,
            seed: 42,
            frame_stride: 25,
            symmetric: true,
            workers: None,
            method: MethodSelection::Both,
            cache_dir: None,
        }
    }
}

/// Settings read from a config file; unset keys stay `None`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub window_size: Option<usize>,
    pub gray_levels: Option<u16>,
    pub patterns: Option<usize>,
    pub trim_fraction: Option<f64>,
    pub knn: Option<usize>,
    pub seed: Option<u64>,
    pub frame_stride: Option<usize>,
    pub symmetric: Option<bool>,
    pub workers: Option<usize>,
    pub method: Option<MethodSelection>,
    pub cache_dir: Option<PathBuf>,
}

impl ConfigOverrides {
    /// Fields set on `self` take precedence over `base`.
    pub fn or(self, base: ConfigOverrides) -> ConfigOverrides {
        ConfigOverrides {
            window_size: self.window_size.or(base.window_size),
            gray_levels: self.gray_levels.or(base.gray_levels),
            patterns: self.patterns.or(base.patterns),
            trim_fraction: self.trim_fraction.or(base.trim_fraction),
            knn: self.knn.or(base.knn),
            seed: self.seed.or(base.seed),
            frame_stride: self.frame_stride.or(base.frame_stride),
            symmetric: self.symmetric.or(base.symmetric),
            workers: self.workers.or(base.workers),
            method: self.method.or(base.method),
            cache_dir: self.cache_dir.or(base.cache_dir),
        }
    }

    pub fn resolve(self) -> Result<RunConfig> {
        let d = RunConfig::default();
        let cfg = RunConfig {
            window_size: self.window_size.unwrap_or(d.window_size),
            gray_levels: self.gray_levels.unwrap_or(d.gray_levels),
            patterns: self.patterns.unwrap_or(d.patterns),
            trim_fraction: self.trim_fraction.unwrap_or(d.trim_fraction),
            knn: self.knn.unwrap_or(d.knn),
            seed: self.seed.unwrap_or(d.seed),
            frame_stride: self.frame_stride.unwrap_or(d.frame_stride),
            symmetric: self.symmetric.unwrap_or(d.symmetric),
            workers: self.workers.filter(|&w| w > 0),
            method: self.method.unwrap_or(d.method),
            cache_dir: self.cache_dir,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_value<T: FromStr>(path: &Path, line: usize, key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        line,
        reason: format!("invalid value `{value}` for `{key}`"),
    })
}

/// Parse `key = value` lines; `#` starts a comment. Keys accept `-` or `_`.
pub fn parse_config(text: &str, path: &Path) -> Result<ConfigOverrides> {
    let mut o = ConfigOverrides::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                reason: format!("expected key = value, found `{content}`"),
            });
        };
        let key = key.trim().replace('-', "_");
        let value = value.trim().trim_matches('"');
        match key.as_str() {
            "window_size" => o.window_size = Some(parse_value(path, line, &key, value)?),
            "gray_levels" => o.gray_levels = Some(parse_value(path, line, &key, value)?),
            "patterns" => o.patterns = Some(parse_value(path, line, &key, value)?),
            "trim" | "trim_fraction" => {
                o.trim_fraction = Some(parse_value(path, line, &key, value)?)
            }
            "knn" => o.knn = Some(parse_value(path, line, &key, value)?),
            "seed" => o.seed = Some(parse_value(path, line, &key, value)?),
            "frame_stride" => o.frame_stride = Some(parse_value(path, line, &key, value)?),
            "symmetric" => o.symmetric = Some(parse_value(path, line, &key, value)?),
            "workers" => o.workers = Some(parse_value(path, line, &key, value)?),
            "method" => {
                o.method = Some(value.parse().map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    reason: format!("invalid method `{value}`"),
                })?)
            }
            "cache_dir" => o.cache_dir = Some(PathBuf::from(value)),
            _ => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    reason: format!("unknown key `{key}`"),
                })
            }
        }
    }
    Ok(o)
}

pub fn read_config(path: impl AsRef<Path>) -> Result<ConfigOverrides> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, path)
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_size < MIN_WINDOW {
            return Err(Error::validation(format!(
                "window size must be at least {MIN_WINDOW}"
            )));
        }
        if !(2..=256).contains(&self.gray_levels) {
            return Err(Error::validation("gray levels must be in [2, 256]"));
        }
        if self.patterns == 0 || self.patterns > MAX_PATTERNS {
            return Err(Error::validation(format!(
                "pattern count must be in [1, {MAX_PATTERNS}]"
            )));
        }
        if !(0.0..1.0).contains(&self.trim_fraction) {
            return Err(Error::validation("trim fraction must be in [0, 1)"));
        }
        if self.knn == 0 {
            return Err(Error::validation("knn must be at least 1"));
        }
        if self.frame_stride == 0 {
            return Err(Error::validation("frame stride must be at least 1"));
        }
        Ok(())
    }

    pub fn signature_params(&self) -> SignatureParams {
        SignatureParams {
            k: self.patterns,
            window_size: self.window_size,
            gray_levels: self.gray_levels,
            trim_fraction: self.trim_fraction,
            seed: self.seed,
            symmetric: self.symmetric,
        }
    }

    pub fn glcm_distances(&self) -> &'static [usize] {
        &DISTANCES
    }

    pub fn glcm_angles(&self) -> [u32; 4] {
        Angle::ALL.map(Angle::degrees)
    }

    /// Run `f` on a thread pool sized by `workers`.
    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> Result<R> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = self.workers {
            builder = builder.num_threads(n);
        }
        let pool = builder
            .build()
            .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
        Ok(pool.install(f))
    }
}
