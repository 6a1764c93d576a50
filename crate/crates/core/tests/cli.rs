use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hetex::pgm::{decode, encode_p5, Graymap};
use hetex::synth::{composite, CompositeCorpus, Texture};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn hetex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hetex"))
        .args(args)
        .env("RUST_LOG", "info")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_pgm(path: &Path, w: usize, h: usize, samples: Vec<u8>) {
    let mut buf = Vec::new();
    encode_p5(
        &Graymap {
            width: w,
            height: h,
            maxval: 255,
            samples,
        },
        &mut buf,
    )
    .unwrap();
    fs::write(path, buf).unwrap();
}

fn corpus(dir: &Path) -> String {
    CompositeCorpus::pairs(4, 4, 3).write(dir).unwrap();
    s(&dir.join("manifest.csv")).to_string()
}

#[test]
fn help_lists_every_setting() {
    let o = hetex(&["benchmark", "--help"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    for needle in [
        "--window-size",
        "[default: 8]",
        "--gray-levels",
        "[default: 16]",
        "--patterns",
        "[default: 2]",
        "--trim",
        "[default: 0.25]",
        "--knn",
        "[default: 1]",
        "--seed",
        "[default: 42]",
        "--frame-stride",
        "[default: 25]",
        "--symmetric",
        "[default: true]",
        "--workers",
        "--method",
        "--config",
        "glcm distances",
        "glcm angles",
    ] {
        assert!(text.contains(needle), "help lacks {needle}");
    }
    assert_eq!(code(&hetex(&["--version"])), 0);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&hetex(&["frobnicate"])), 1);
    assert_eq!(code(&hetex(&["benchmark", "--manifest", "x.csv"])), 1);

    let o = hetex(&[
        "benchmark",
        "--manifest",
        s(&dir.path().join("none.csv")),
        "--out",
        "-",
    ]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("none.csv"));

    write_pgm(&dir.path().join("a.pgm"), 8, 8, vec![0; 64]);
    write_pgm(&dir.path().join("b.pgm"), 8, 8, vec![0; 64]);
    let m = dir.path().join("single.csv");
    fs::write(
        &m,
        "id,source,class_label,kind\na,a.pgm,x,static\nb,b.pgm,y,static\n",
    )
    .unwrap();
    let o = hetex(&[
        "benchmark",
        "--manifest",
        s(&m),
        "--out",
        s(&dir.path().join("r.toml")),
    ]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("single entry"));
    assert!(!dir.path().join("r.toml").exists());

    let m = corpus(&dir.path().join("c"));
    let o = hetex(&[
        "benchmark",
        "--manifest",
        &m,
        "--out",
        "-",
        "--patterns",
        "9",
    ]);
    assert_eq!(code(&o), 1);
    let o = hetex(&[
        "benchmark",
        "--manifest",
        &m,
        "--out",
        "-",
        "--method",
        "bogus",
    ]);
    assert_eq!(code(&o), 1);
    let cfg = dir.path().join("bad.conf");
    fs::write(&cfg, "seed = soon\n").unwrap();
    let o = hetex(&[
        "benchmark",
        "--manifest",
        &m,
        "--out",
        "-",
        "--config",
        s(&cfg),
    ]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.conf:1"));
}

#[test]
fn extract_writes_one_row_per_window() {
    let dir = tempfile::tempdir().unwrap();
    write_pgm(&dir.path().join("a.pgm"), 8, 8, (0..64).collect());
    write_pgm(
        &dir.path().join("b.pgm"),
        128,
        128,
        (0..128 * 128).map(|i| (i * 31 % 256) as u8).collect(),
    );
    let m = dir.path().join("m.csv");
    fs::write(
        &m,
        "id,source,class_label,kind\na,a.pgm,x,static\nb,b.pgm,x,static\n",
    )
    .unwrap();
    let out = dir.path().join("f.csv");
    let o = hetex(&["extract", "--manifest", s(&m), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("a,")).count(), 1);
    assert_eq!(text.lines().filter(|l| l.starts_with("b,")).count(), 256);
    assert!(o.stdout.is_empty());
}

#[test]
fn segment_rasters() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
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
        3.0,
        &mut rng,
    );
    write_pgm(&dir.path().join("comp.pgm"), 64, 64, px.clone());
    write_pgm(&dir.path().join("flat.pgm"), 64, 64, vec![77; 4096]);
    let vid = dir.path().join("vid");
    fs::create_dir(&vid).unwrap();
    for f in 0..4 {
        write_pgm(&vid.join(format!("{f:02}.pgm")), 64, 64, px.clone());
    }
    let m = dir.path().join("m.csv");
    fs::write(
        &m,
        "id,source,class_label,kind\ncomp,comp.pgm,x,static\nflat,flat.pgm,x,static\nvid,vid,x,video\n",
    )
    .unwrap();
    let out = dir.path().join("seg");
    let o = hetex(&[
        "segment",
        "--manifest",
        s(&m),
        "--out",
        s(&out),
        "--frame-stride",
        "2",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("flat") && stderr.contains("duplicated"));

    let raw = fs::read(out.join("comp.pgm")).unwrap();
    assert!(String::from_utf8_lossy(&raw[..200]).contains("seed=42"));
    let g = decode(&raw).unwrap();
    assert_eq!((g.width, g.height, g.maxval), (64, 64, 2));
    let majority = |x0: usize| {
        let mut n = [0usize; 3];
        for y in 0..64 {
            for x in x0..x0 + 32 {
                n[g.samples[y * 64 + x] as usize] += 1;
            }
        }
        if n[0] >= n[1] {
            0
        } else {
            1
        }
    };
    assert_ne!(majority(0), majority(32));
    // 64 windows split 32/32, floor(32/4) = 8 trimmed per pattern
    let discarded = g.samples.iter().filter(|&&v| v == 2).count() / 64;
    assert_eq!(discarded, 16);

    let flat = decode(&fs::read(out.join("flat.pgm")).unwrap()).unwrap();
    let labels: std::collections::BTreeSet<u8> =
        flat.samples.iter().copied().filter(|&v| v != 2).collect();
    assert_eq!(labels.len(), 1);

    assert!(out.join("vid_f000.pgm").exists() && out.join("vid_f001.pgm").exists());
    assert!(!out.join("vid_f002.pgm").exists());
}

#[test]
fn index_then_classify() {
    let dir = tempfile::tempdir().unwrap();
    let m = corpus(&dir.path().join("c"));
    let store = dir.path().join("s.jsonl");
    let o = hetex(&["index", "--manifest", &m, "--out", s(&store)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let query = dir.path().join("c").join("c02_001.pgm");
    let o = hetex(&["classify", "--signatures", s(&store), "--image", s(&query)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        String::from_utf8_lossy(&o.stdout),
        "classical\tclass02\nheterogeneous\tclass02\n"
    );
    let o = hetex(&[
        "classify",
        "--signatures",
        s(&store),
        "--image",
        s(&query),
        "--method",
        "heterogeneous",
    ]);
    assert_eq!(
        String::from_utf8_lossy(&o.stdout),
        "heterogeneous\tclass02\n"
    );

    fs::write(&store, "{\"format\":\"other\"}\n").unwrap();
    let o = hetex(&["classify", "--signatures", s(&store), "--image", s(&query)]);
    assert_eq!(code(&o), 1);
}

#[test]
fn benchmark_is_deterministic_and_echoes_config() {
    let dir = tempfile::tempdir().unwrap();
    let m = corpus(&dir.path().join("c"));
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "seed = 5\npatterns = 3\n").unwrap();
    let run = |name: &str, extra: &[&str]| {
        let out = dir.path().join(name);
        let mut args = vec![
            "benchmark",
            "--manifest",
            &m,
            "--out",
            s(&out),
            "--config",
            s(&cfg),
        ];
        args.extend_from_slice(extra);
        let o = hetex(&args);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        fs::read_to_string(out).unwrap()
    };
    let without_workers = |t: &str| -> String {
        t.lines()
            .filter(|l| !l.starts_with("workers = "))
            .collect::<Vec<_>>()
            .join("\n")
    };
    let a = run("a.toml", &["--seed", "6"]);
    let b = run("b.toml", &["--seed", "6", "--workers", "1"]);
    assert!(a == run("a2.toml", &["--seed", "6"]), "reruns differ");
    assert!(
        without_workers(&a) == without_workers(&b),
        "worker count changed the results"
    );
    assert!(b.contains("workers = 1\n"));
    let text = a;
    assert!(text.contains("seed = 6\n"));
    assert!(text.contains("patterns = 3\n"));
    assert!(text.contains("[classical]") && text.contains("[heterogeneous]"));
    assert!(text.contains("heterogeneous_minus_classical"));

    let cached = run(
        "c.toml",
        &["--seed", "6", "--cache-dir", s(&dir.path().join("cache"))],
    );
    assert!(cached == text, "cache changed the report");
    let again = run(
        "d.toml",
        &["--seed", "6", "--cache-dir", s(&dir.path().join("cache"))],
    );
    assert!(again == text, "cache hit changed the report");
}

#[test]
fn synth_writes_a_usable_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let o = hetex(&[
        "synth",
        "--out",
        s(dir.path()),
        "--classes",
        "3",
        "--per-class",
        "2",
    ]);
    assert_eq!(code(&o), 0);
    let m = hetex::read_manifest(dir.path().join("manifest.csv")).unwrap();
    assert_eq!(m.len(), 6);
    assert_eq!(
        code(&hetex(&[
            "synth",
            "--out",
            s(dir.path()),
            "--classes",
            "16"
        ])),
        1
    );
}
