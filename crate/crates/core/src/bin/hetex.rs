use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use rayon::prelude::*;

use hetex::benchmark::{render_report, run_benchmark, selected_methods};
use hetex::classify::knn_classify;
use hetex::config::{read_config, ConfigOverrides, RunConfig};
use hetex::features::{extract_corpus, features_from_frames, EntryFeatures};
use hetex::gray::{load_grayscale, load_video_frames};
use hetex::manifest::{read_manifest, Manifest};
use hetex::pattern::{build_signature, fit_normalization, NormalizationStats};
use hetex::pgm::encode_p5_with_comments;
use hetex::store::{write_feature_dump, SignatureStore};
use hetex::synth::CompositeCorpus;
use hetex::{Error, Result};

const AFTER_HELP: &str = "\
Run configuration (flag > --config file > default):
  window_size    8      --window-size
  gray_levels    16     --gray-levels
  patterns       2      --patterns
  trim_fraction  0.25   --trim
  knn            1      --knn
  seed           42     --seed
  frame_stride   25     --frame-stride
  symmetric      true   --symmetric
  workers        auto   --workers
  method         both   --method
  glcm distances 1, 2 (fixed)
  glcm angles    0, 45, 90, 135 (fixed)

Exit status: 0 success, 1 validation error, 2 I/O error, 3 internal error.";

#[derive(Parser)]
#[command(name = "hetex", version, about = "Texture classification with heterogeneous window patterns", after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the per-window 32-value descriptors of every manifest entry as CSV.
    #[command(after_help = AFTER_HELP)]
    Extract {
        #[arg(long)]
        manifest: PathBuf,
        /// Output CSV path, or `-` for standard output.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Write one PGM label raster per entry (per frame for video entries).
    #[command(after_help = AFTER_HELP)]
    Segment {
        #[arg(long)]
        manifest: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Build a signature store from a manifest, for use with `classify`.
    #[command(after_help = AFTER_HELP)]
    Index {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Classify one image (or frame directory) against a signature store.
    #[command(after_help = AFTER_HELP)]
    Classify {
        #[arg(long)]
        signatures: PathBuf,
        /// Query image, or a directory of frames.
        #[arg(long)]
        image: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Cross-validate both methods and write the comparison report.
    #[command(after_help = AFTER_HELP)]
    Benchmark {
        #[arg(long)]
        manifest: PathBuf,
        /// Report path, or `-` for standard output.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Generate a synthetic two-texture corpus with its manifest.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 15)]
        classes: usize,
        #[arg(long, default_value_t = 10)]
        per_class: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

#[derive(Args, Clone, Default)]
struct ConfigArgs {
    /// Flat key = value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Window edge in pixels [default: 8]
    #[arg(long)]
    window_size: Option<usize>,
    /// Gray-level count G [default: 16]
    #[arg(long)]
    gray_levels: Option<u16>,
    /// Patterns per image k [default: 2]
    #[arg(long)]
    patterns: Option<usize>,
    /// Fraction of windows trimmed per pattern [default: 0.25]
    #[arg(long)]
    trim: Option<f64>,
    /// Neighbors in the k-NN vote [default: 1]
    #[arg(long)]
    knn: Option<usize>,
    /// Seed for clustering and fold assignment [default: 42]
    #[arg(long)]
    seed: Option<u64>,
    /// Use every n-th video frame [default: 25]
    #[arg(long)]
    frame_stride: Option<usize>,
    /// Count each pixel pair in both directions [default: true]
    #[arg(long)]
    symmetric: Option<bool>,
    /// Worker threads [default: one per processor]
    #[arg(long)]
    workers: Option<usize>,
    /// classical, heterogeneous or both [default: both]
    #[arg(long)]
    method: Option<String>,
    /// Directory for cached window descriptors.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let flags = ConfigOverrides {
            window_size: self.window_size,
            gray_levels: self.gray_levels,
            patterns: self.patterns,
            trim_fraction: self.trim,
            knn: self.knn,
            seed: self.seed,
            frame_stride: self.frame_stride,
            symmetric: self.symmetric,
            workers: self.workers,
            method: self.method.as_deref().map(str::parse).transpose()?,
            cache_dir: self.cache_dir.clone(),
        };
        let file = match &self.config {
            Some(path) => read_config(path)?,
            None => ConfigOverrides::default(),
        };
        flags.or(file).resolve()
    }
}

fn write_output(path: &Path, bytes: &[u8]) -> Result<()> {
    if path == Path::new("-") {
        let mut out = std::io::stdout().lock();
        out.write_all(bytes).map_err(|e| Error::io("<stdout>", e))?;
        return out.flush().map_err(|e| Error::io("<stdout>", e));
    }
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn load_corpus(manifest_path: &Path, cfg: &RunConfig) -> Result<(Manifest, Vec<EntryFeatures>)> {
    let manifest = read_manifest(manifest_path)?;
    info!(
        "{}: {} entries, {} classes",
        manifest.name,
        manifest.len(),
        manifest.class_counts().len()
    );
    let features = extract_corpus(&manifest, cfg)?;
    Ok((manifest, features))
}

fn corpus_stats(features: &[EntryFeatures]) -> Result<NormalizationStats> {
    fit_normalization(features.iter().flat_map(|f| f.windows.descriptors()))
}

fn cmd_extract(manifest: &Path, out: &Path, cfg: &RunConfig) -> Result<()> {
    let (_, features) = load_corpus(manifest, cfg)?;
    let mut buf = Vec::new();
    write_feature_dump(&mut buf, &features).map_err(|e| Error::io(out, e))?;
    write_output(out, &buf)?;
    info!(
        "wrote {} windows (window_size={} gray_levels={} symmetric={})",
        features.iter().map(|f| f.windows.len()).sum::<usize>(),
        cfg.window_size,
        cfg.gray_levels,
        cfg.symmetric
    );
    Ok(())
}

fn cmd_segment(manifest: &Path, out: &Path, cfg: &RunConfig) -> Result<()> {
    let (_, features) = load_corpus(manifest, cfg)?;
    let stats = corpus_stats(&features)?;
    let params = cfg.signature_params();
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let comments = vec![
        format!(
            "hetex segment k={} window_size={} gray_levels={} trim_fraction={} seed={} symmetric={} frame_stride={}",
            params.k,
            params.window_size,
            params.gray_levels,
            params.trim_fraction,
            params.seed,
            params.symmetric,
            cfg.frame_stride
        ),
        format!("labels 0..{} are patterns, {} is discarded", params.k, params.k),
    ];
    let maps = features
        .par_iter()
        .map(|f| build_signature(&f.entry_id, &f.windows, &f.classical, &params, &stats))
        .collect::<Result<Vec<_>>>()?;
    for (sig, map) in &maps {
        if sig.degenerate {
            warn!(
                "{}: fewer than {} distinct window groups; duplicated a pattern to keep k patterns",
                sig.entry_id, params.k
            );
        }
        for frame in 0..map.frames {
            let name = if map.frames == 1 {
                format!("{}.pgm", map.entry_id)
            } else {
                format!("{}_f{frame:03}.pgm", map.entry_id)
            };
            let path = out.join(name);
            let mut buf = Vec::new();
            encode_p5_with_comments(&map.to_graymap(frame)?, &comments, &mut buf)
                .map_err(|e| Error::io(&path, e))?;
            fs::write(&path, buf).map_err(|e| Error::io(&path, e))?;
        }
        let counts: Vec<String> = (0..map.k).map(|p| map.count(p).to_string()).collect();
        info!(
            "{}: pattern windows [{}], discarded {}",
            map.entry_id,
            counts.join(", "),
            map.discarded_count()
        );
    }
    info!(
        "segmented {} entries (k={} trim={} seed={} window_size={} gray_levels={})",
        maps.len(),
        params.k,
        params.trim_fraction,
        params.seed,
        params.window_size,
        params.gray_levels
    );
    Ok(())
}

fn cmd_index(manifest: &Path, out: &Path, cfg: &RunConfig) -> Result<()> {
    let (manifest, features) = load_corpus(manifest, cfg)?;
    let stats = corpus_stats(&features)?;
    let params = cfg.signature_params();
    let sigs = features
        .par_iter()
        .map(|f| build_signature(&f.entry_id, &f.windows, &f.classical, &params, &stats))
        .collect::<Result<Vec<_>>>()?;
    let entries = sigs
        .into_iter()
        .zip(&manifest.entries)
        .map(|((sig, _), e)| (sig, e.class_label.clone()))
        .collect();
    let store = SignatureStore::new(params, cfg.frame_stride, stats, entries);
    let mut buf = Vec::new();
    store.write(&mut buf)?;
    write_output(out, &buf)
}

fn cmd_classify(store_path: &Path, image: &Path, args: &ConfigArgs) -> Result<()> {
    let file = fs::File::open(store_path).map_err(|e| Error::io(store_path, e))?;
    let store = SignatureStore::read(BufReader::new(file), store_path)?;
    let p = &store.header.params;
    let mut cfg = args.resolve()?;
    if args.window_size.is_some() || args.gray_levels.is_some() || args.patterns.is_some() {
        warn!("signature parameters come from the store; ignoring window/gray-level/pattern flags");
    }
    cfg.window_size = p.window_size;
    cfg.gray_levels = p.gray_levels;
    cfg.patterns = p.k;
    cfg.trim_fraction = p.trim_fraction;
    cfg.seed = p.seed;
    cfg.symmetric = p.symmetric;
    cfg.frame_stride = store.header.frame_stride;

    let frames = if image.is_dir() {
        load_video_frames(image, cfg.frame_stride, cfg.gray_levels)?
    } else {
        vec![load_grayscale(image, cfg.gray_levels)?]
    };
    let id = image.display().to_string();
    let features = features_from_frames(&id, "", &frames, &cfg)?;
    let (query, _) = build_signature(
        &id,
        &features.windows,
        &features.classical,
        p,
        &store.header.stats,
    )?;
    let train: Vec<_> = store
        .entries
        .iter()
        .map(|(s, label)| (s, label.as_str()))
        .collect();
    let mut out = String::new();
    for m in selected_methods(cfg.method) {
        let label = knn_classify(&query, &train, cfg.knn, m)?;
        out.push_str(&format!("{}\t{}\n", m.name(), label));
    }
    write_output(Path::new("-"), out.as_bytes())
}

fn cmd_benchmark(manifest: &Path, out: &Path, cfg: &RunConfig) -> Result<()> {
    let (manifest, features) = load_corpus(manifest, cfg)?;
    let methods = selected_methods(cfg.method);
    let outcome = run_benchmark(&manifest, &features, cfg, &methods)?;
    for r in &outcome.reports {
        info!("{}: {:.2}%", r.method, r.overall_accuracy());
    }
    if outcome.degenerate_signatures > 0 {
        warn!(
            "{} test signatures had duplicated patterns",
            outcome.degenerate_signatures
        );
    }
    write_output(out, render_report(&outcome).as_bytes())
}

fn cmd_synth(out: &Path, classes: usize, per_class: usize, seed: u64) -> Result<()> {
    if classes == 0 || classes > 15 {
        return Err(Error::validation("classes must be in [1, 15]"));
    }
    let manifest = CompositeCorpus::pairs(classes, per_class, seed).write(out)?;
    info!(
        "wrote {} images and manifest.csv to {}",
        manifest.len(),
        out.display()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Extract {
            manifest,
            out,
            config,
        } => {
            let cfg = config.resolve()?;
            cfg.install(|| cmd_extract(&manifest, &out, &cfg))?
        }
        Command::Segment {
            manifest,
            out,
            config,
        } => {
            let cfg = config.resolve()?;
            cfg.install(|| cmd_segment(&manifest, &out, &cfg))?
        }
        Command::Index {
            manifest,
            out,
            config,
        } => {
            let cfg = config.resolve()?;
            cfg.install(|| cmd_index(&manifest, &out, &cfg))?
        }
        Command::Classify {
            signatures,
            image,
            config,
        } => {
            let cfg = config.resolve()?;
            cfg.install(|| cmd_classify(&signatures, &image, &config))?
        }
        Command::Benchmark {
            manifest,
            out,
            config,
        } => {
            let cfg = config.resolve()?;
            cfg.install(|| cmd_benchmark(&manifest, &out, &cfg))?
        }
        Command::Synth {
            out,
            classes,
            per_class,
            seed,
        } => cmd_synth(&out, classes, per_class, seed),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(_) => ExitCode::from(3),
    }
}
