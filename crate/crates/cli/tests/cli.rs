//! Black-box tests of the `lsbmark` binary: exit codes, stdout contracts,
//! key resolution, and report stability.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lsbmark::codec::HEADER_BYTES;
use lsbmark::keystream::{derive_permutation, Keystream};
use lsbmark::pixmap::{load_argb, load_gray, save_argb, save_gray};
use lsbmark::{Argb, ArgbImage, GrayImage, SecretKey};
use tempfile::TempDir;

fn run_with_env(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lsbmark"));
    cmd.env_remove("LSBMARK_KEY");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.args(args).output().expect("binary runs")
}

fn run(args: &[&str]) -> Output {
    run_with_env(args, &[])
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn assert_exit(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        stdout(out),
        stderr(out)
    );
}

/// Deterministic host PNG and watermark PGM under `dir`.
fn write_images(dir: &Path, hw: u32, hh: u32, mw: u32, mh: u32) -> (PathBuf, PathBuf) {
    let mut s = Keystream::from_seed(0xD0C5);
    let host_pixels = (0..hw as usize * hh as usize)
        .map(|_| {
            let v = s.next_u64();
            Argb::new((v >> 24) as u8, (v >> 16) as u8, (v >> 8) as u8, v as u8)
        })
        .collect();
    let host = ArgbImage::new(hw, hh, host_pixels).unwrap();
    let mark_pixels = (0..mw as usize * mh as usize).map(|_| s.next_u64() as u8).collect();
    let mark = GrayImage::new(mw, mh, mark_pixels).unwrap();
    let host_path = dir.join("host.png");
    let mark_path = dir.join("mark.pgm");
    save_argb(&host, &host_path).unwrap();
    save_gray(&mark, &mark_path).unwrap();
    (host_path, mark_path)
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn embed_extract_roundtrip() {
    let dir = TempDir::new().unwrap();
    let (host, mark) = write_images(dir.path(), 64, 64, 12, 10);
    let marked = dir.path().join("marked.png");
    let out = run(&[
        "embed", path_str(&host), path_str(&mark),
        "-o", path_str(&marked), "--key", "roundtrip",
    ]);
    assert_exit(&out, 0);
    let text = stdout(&out);
    assert!(text.contains("method: modified"), "{text}");
    assert!(text.contains("capacity: 32704 bits"), "{text}");
    assert!(text.contains("payload: 1024 bits (12x10 watermark + 64-bit header)"), "{text}");
    assert!(text.contains("psnr: "), "{text}");

    let recovered = dir.path().join("out.pgm");
    let out = run(&[
        "extract", path_str(&marked),
        "-o", path_str(&recovered), "--key", "roundtrip",
    ]);
    assert_exit(&out, 0);
    let text = stdout(&out);
    assert!(text.contains("watermark: 12x10"), "{text}");
    assert!(text.contains("header: ok"), "{text}");
    assert!(text.contains("checksum: ok"), "{text}");
    assert_eq!(load_gray(&recovered).unwrap(), load_gray(&mark).unwrap());
}

#[test]
fn classic_method_roundtrips_too() {
    let dir = TempDir::new().unwrap();
    let (host, mark) = write_images(dir.path(), 64, 64, 12, 10);
    let marked = dir.path().join("marked.png");
    let out = run(&[
        "embed", path_str(&host), path_str(&mark),
        "-o", path_str(&marked), "--key", "k", "--method", "classic",
    ]);
    assert_exit(&out, 0);
    let recovered = dir.path().join("out.pgm");
    let out = run(&[
        "extract", path_str(&marked),
        "-o", path_str(&recovered), "--key", "k", "--method", "classic",
    ]);
    assert_exit(&out, 0);
    assert_eq!(load_gray(&recovered).unwrap(), load_gray(&mark).unwrap());
}

#[test]
fn missing_input_exits_2() {
    let dir = TempDir::new().unwrap();
    let out = run(&[
        "extract", path_str(&dir.path().join("nope.png")),
        "-o", path_str(&dir.path().join("x.pgm")), "--key", "k",
    ]);
    assert_exit(&out, 2);
    assert!(stderr(&out).contains("error:"));
}

#[test]
fn oversized_watermark_exits_3() {
    let dir = TempDir::new().unwrap();
    let (host, _) = write_images(dir.path(), 16, 16, 1, 1);
    let big = dir.path().join("big.pgm");
    save_gray(&GrayImage::filled(40, 40, 7).unwrap(), &big).unwrap();
    let out = run(&[
        "embed", path_str(&host), path_str(&big),
        "-o", path_str(&dir.path().join("m.png")), "--key", "k",
    ]);
    assert_exit(&out, 3);
    assert!(stderr(&out).contains("capacity"), "{}", stderr(&out));
}

#[test]
fn wrong_key_exits_4() {
    let dir = TempDir::new().unwrap();
    let (host, mark) = write_images(dir.path(), 64, 64, 12, 10);
    let marked = dir.path().join("marked.png");
    assert_exit(
        &run(&["embed", path_str(&host), path_str(&mark), "-o", path_str(&marked), "--key", "a"]),
        0,
    );
    let out = run(&[
        "extract", path_str(&marked),
        "-o", path_str(&dir.path().join("x.pgm")), "--key", "b",
    ]);
    assert_exit(&out, 4);
    assert!(stderr(&out).contains("no watermark found"), "{}", stderr(&out));
}

#[test]
fn wiped_carrier_bits_exit_4() {
    let dir = TempDir::new().unwrap();
    let (host, mark) = write_images(dir.path(), 64, 64, 12, 10);
    let marked = dir.path().join("marked.png");
    assert_exit(
        &run(&["embed", path_str(&host), path_str(&mark), "-o", path_str(&marked), "--key", "k"]),
        0,
    );
    let wiped = dir.path().join("wiped.png");
    let out = run(&["attack", path_str(&marked), "zero-lsb:k=1", "-o", path_str(&wiped)]);
    assert_exit(&out, 0);
    assert!(stdout(&out).contains("applied zero-lsb:k=1"));
    let out = run(&[
        "extract", path_str(&wiped),
        "-o", path_str(&dir.path().join("x.pgm")), "--key", "k",
    ]);
    assert_exit(&out, 4);
}

#[test]
fn bad_usage_exits_1() {
    let dir = TempDir::new().unwrap();
    let (host, mark) = write_images(dir.path(), 16, 16, 2, 2);
    let out_png = dir.path().join("o.png");

    // malformed attack spec
    let out = run(&["attack", path_str(&host), "melt:all", "-o", path_str(&out_png)]);
    assert_exit(&out, 1);
    assert!(stderr(&out).contains("unknown attack"), "{}", stderr(&out));

    // unknown method value (rejected by argument parsing)
    let out = run(&[
        "embed", path_str(&host), path_str(&mark),
        "-o", path_str(&out_png), "--key", "k", "--method", "fancy",
    ]);
    assert_exit(&out, 1);

    // no key from any source
    let out = run(&["embed", path_str(&host), path_str(&mark), "-o", path_str(&out_png)]);
    assert_exit(&out, 1);
    assert!(stderr(&out).contains("LSBMARK_KEY"), "{}", stderr(&out));

    // --key and --key-file together
    let out = run(&[
        "embed", path_str(&host), path_str(&mark),
        "-o", path_str(&out_png), "--key", "a", "--key-file", path_str(&host),
    ]);
    assert_exit(&out, 1);
}

#[test]
fn help_and_version_exit_0() {
    let out = run(&["--help"]);
    assert_exit(&out, 0);
    assert!(stdout(&out).contains("lsbmark"));
    assert_exit(&run(&["--version"]), 0);
    assert_exit(&run(&["embed", "--help"]), 0);
}

#[test]
fn key_sources_resolve_in_order() {
    let dir = TempDir::new().unwrap();
    let (host, mark) = write_images(dir.path(), 48, 48, 8, 8);
    let by_flag = dir.path().join("flag.png");
    let by_env = dir.path().join("env.png");
    let by_file = dir.path().join("file.png");
    let flag_beats_env = dir.path().join("both.png");

    assert_exit(
        &run(&["embed", path_str(&host), path_str(&mark), "-o", path_str(&by_flag), "--key", "secret"]),
        0,
    );
    assert_exit(
        &run_with_env(
            &["embed", path_str(&host), path_str(&mark), "-o", path_str(&by_env)],
            &[("LSBMARK_KEY", "secret")],
        ),
        0,
    );
    // file key with a trailing newline matches the bare text key
    let key_path = dir.path().join("key.txt");
    std::fs::write(&key_path, "secret\n").unwrap();
    assert_exit(
        &run(&[
            "embed", path_str(&host), path_str(&mark),
            "-o", path_str(&by_file), "--key-file", path_str(&key_path),
        ]),
        0,
    );
    // an explicit flag wins over the environment
    assert_exit(
        &run_with_env(
            &["embed", path_str(&host), path_str(&mark), "-o", path_str(&flag_beats_env), "--key", "secret"],
            &[("LSBMARK_KEY", "something-else")],
        ),
        0,
    );

    let want = std::fs::read(&by_flag).unwrap();
    for p in [&by_env, &by_file, &flag_beats_env] {
        assert_eq!(std::fs::read(p).unwrap(), want, "{} diverged", p.display());
    }
}

#[test]
fn hex_keys_equal_their_utf8_spelling() {
    let dir = TempDir::new().unwrap();
    let (host, mark) = write_images(dir.path(), 48, 48, 8, 8);
    let a = dir.path().join("a.png");
    let b = dir.path().join("b.png");
    assert_exit(
        &run(&["embed", path_str(&host), path_str(&mark), "-o", path_str(&a), "--key", "key"]),
        0,
    );
    // 6b 65 79 spells "key"
    assert_exit(
        &run(&["embed", path_str(&host), path_str(&mark), "-o", path_str(&b), "--key", "hex:6b6579"]),
        0,
    );
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn attacks_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let (host, _) = write_images(dir.path(), 48, 48, 2, 2);
    let a = dir.path().join("a.png");
    let b = dir.path().join("b.png");
    for out_path in [&a, &b] {
        let out = run(&["attack", path_str(&host), "noise:amp=4,seed=9", "-o", path_str(out_path)]);
        assert_exit(&out, 0);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn checksum_mismatch_still_extracts() {
    let dir = TempDir::new().unwrap();
    let (host, mark) = write_images(dir.path(), 64, 64, 12, 10);
    let marked = dir.path().join("marked.png");
    assert_exit(
        &run(&["embed", path_str(&host), path_str(&mark), "-o", path_str(&marked), "--key", "sum"]),
        0,
    );
    // flip one carrier bit on the first payload pixel
    let mut img = load_argb(&marked).unwrap();
    let k = SecretKey::parse("sum").unwrap();
    let plan = derive_permutation(&k, img.pixel_count(), HEADER_BYTES + 1).unwrap();
    let victim = plan.indices()[HEADER_BYTES];
    let mut pixels = img.pixels().to_vec();
    pixels[victim].b ^= 0b01;
    img = ArgbImage::new(64, 64, pixels).unwrap();
    save_argb(&img, &marked).unwrap();

    let out = run(&[
        "extract", path_str(&marked),
        "-o", path_str(&dir.path().join("x.pgm")), "--key", "sum",
    ]);
    assert_exit(&out, 0);
    let text = stdout(&out);
    assert!(text.contains("header: ok"), "{text}");
    assert!(text.contains("checksum: MISMATCH"), "{text}");
}

#[test]
fn evaluate_writes_a_stable_ordered_report() {
    let dir = TempDir::new().unwrap();
    let (host, mark) = write_images(dir.path(), 64, 64, 12, 10);
    let report_path = dir.path().join("report.json");
    let out = run(&[
        "evaluate", path_str(&host), path_str(&mark),
        "-o", path_str(&report_path), "--key", "grid",
    ]);
    assert_exit(&out, 0);
    let table = stdout(&out);
    assert!(table.contains("method"), "{table}");
    assert!(table.contains("report: "), "{table}");

    let text = std::fs::read_to_string(&report_path).unwrap();
    let report: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(report["meta"]["host"]["width"], 64);
    assert_eq!(report["meta"]["watermark"]["height"], 10);
    assert_eq!(report["meta"]["detect_threshold"], 0.5);
    assert_eq!(report["meta"]["key_fingerprint"].as_str().unwrap().len(), 8);

    let cases = report["cases"].as_array().unwrap();
    assert_eq!(cases.len(), 10);
    let attacks: Vec<&str> = cases.iter().map(|c| c["attack"].as_str().unwrap()).collect();
    let methods: Vec<&str> = cases.iter().map(|c| c["method"].as_str().unwrap()).collect();
    assert_eq!(&methods[..5], ["classic"; 5]);
    assert_eq!(&methods[5..], ["modified"; 5]);
    let expected_attacks =
        ["none", "zero-lsb:k=1", "zero-lsb:k=2", "crop:x=4,y=4,w=55,h=55,fill=0", "noise:amp=4,seed=1"];
    assert_eq!(&attacks[..5], &expected_attacks);
    assert_eq!(&attacks[5..], &expected_attacks);

    for i in [0, 5] {
        // clean rows: exact recovery
        assert_eq!(cases[i]["ber"], 0.0);
        assert_eq!(cases[i]["nc"], 1.0);
        assert_eq!(cases[i]["detected"], true);
        assert_eq!(cases[i]["header_valid"], true);
        assert!(cases[i]["psnr_db"].is_number());
    }
    // one cleared plane: classic reads constant zeros and scores nothing,
    // modified detects through the AND-mask
    assert_eq!(cases[1]["detected"], false);
    assert_eq!(cases[1]["nc"], 0.0);
    assert_eq!(cases[6]["detected"], true);
    assert_eq!(cases[6]["header_valid"], false);
    let ber = cases[6]["ber"].as_f64().unwrap();
    assert!(ber > 0.1 && ber < 0.4, "masked read ber {ber}");
    // both planes cleared: even modified reads a constant
    assert_eq!(cases[7]["detected"], false);
    assert_eq!(cases[7]["nc"], 0.0);

    // byte-identical on rerun
    let rerun_path = dir.path().join("rerun.json");
    let out = run(&[
        "evaluate", path_str(&host), path_str(&mark),
        "-o", path_str(&rerun_path), "--key", "grid",
    ]);
    assert_exit(&out, 0);
    assert_eq!(std::fs::read(&report_path).unwrap(), std::fs::read(&rerun_path).unwrap());
}

#[test]
fn capacity_reports_both_schemes() {
    let dir = TempDir::new().unwrap();
    let (host, _) = write_images(dir.path(), 100, 100, 1, 1);
    let out = run(&["capacity", path_str(&host)]);
    assert_exit(&out, 0);
    let text = stdout(&out);
    assert!(text.contains("image: 100x100 (10000 pixels)"), "{text}");
    assert!(text.contains("modified: 79936 bits (9992 watermark pixels max)"), "{text}");
    assert!(text.contains("classic: 29936 bits (3742 watermark pixels max)"), "{text}");
}
