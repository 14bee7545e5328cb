use std::path::Path;
use std::process::Command;

use infcanvas::cli::run_with;
use infcanvas::report::Report;

fn run(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let code = run_with(std::iter::once("infcanvas").chain(args.iter().copied()), &mut out);
    (code, String::from_utf8(out).unwrap())
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

fn decode(p: &str) -> (u32, u32, Vec<u8>) {
    let dec = png::Decoder::new(std::io::BufReader::new(std::fs::File::open(p).unwrap()));
    let mut reader = dec.read_info().unwrap();
    let mut buf = vec![0; reader.output_buffer_size().unwrap()];
    let info = reader.next_frame(&mut buf).unwrap();
    buf.truncate(info.buffer_size());
    (info.width, info.height, buf)
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (path(dir.path(), "a.png"), path(dir.path(), "b.png"));
    for p in [&a, &b] {
        let (code, out) = run(&["generate", "--net", "g0", "--random-init", "--seed", "7", "--latent", "6x6", "-o", p]);
        assert_eq!(code, 0);
        assert!(out.contains("image = [33,97)x[33,97)"), "{out}");
        assert!(out.contains("geometry.stationarity_period = 32x32"), "{out}");
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let (w, h, _) = decode(&a);
    assert_eq!((w, h), (64, 64));
}

#[test]
fn exit_codes_for_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let o = path(dir.path(), "x.png");
    let small = ["generate", "--random-init", "--latent", "2x2", "-o", &o];
    assert_eq!(run(&small).0, 3);
    assert_eq!(run(&["generate", "--latent", "6x6", "-o", &o]).0, 2);
    assert_eq!(run(&["generate", "--net", "nope", "--random-init", "--latent", "6x6", "-o", &o]).0, 2);
    let missing = path(dir.path(), "missing.igw");
    assert_eq!(run(&["generate", "--weights", &missing, "--latent", "6x6", "-o", &o]).0, 2);
    let bad_toml = path(dir.path(), "bad.toml");
    std::fs::write(&bad_toml, "name = 3").unwrap();
    assert_eq!(run(&["generate", "--net", &bad_toml, "--random-init", "--latent", "6x6", "-o", &o]).0, 2);
    assert_eq!(run(&["verify", "redundancy", "--budget", "16", "--blocks", "3"]).0, 2);
    assert_eq!(run(&["frobnicate"]).0, 2);
    let tiled = ["generate-tiled", "--random-init", "--width", "64", "--height", "64", "--budget", "16", "-o", &o];
    assert_eq!(run(&tiled).0, 3);
}

#[test]
fn weights_and_spec_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (w, spec) = (path(dir.path(), "n.igw"), path(dir.path(), "n.toml"));
    assert_eq!(run(&["init-weights", "--net", "g0-small", "--seed", "3", "-o", &w]).0, 0);
    assert_eq!(run(&["export-spec", "--net", "g0-small", "-o", &spec]).0, 0);
    let (a, b) = (path(dir.path(), "a.png"), path(dir.path(), "b.png"));
    let from_files = ["generate", "--net", &spec, "--weights", &w, "--seed", "1", "--latent", "7x6", "-o", &a];
    assert_eq!(run(&from_files).0, 0);
    let random = [
        "generate", "--net", "g0-small", "--random-init", "--weight-seed", "3", "--seed", "1", "--latent", "7x6", "-o", &b,
    ];
    assert_eq!(run(&random).0, 0);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let mut bytes = std::fs::read(&w).unwrap();
    let last = bytes.len() - 1;
    bytes[last] ^= 1;
    std::fs::write(&w, bytes).unwrap();
    assert_eq!(run(&from_files).0, 2);
}

#[test]
fn tiled_orders_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for (k, order) in ["sorted", "shuffled"].iter().enumerate() {
        let o = path(dir.path(), &format!("{k}.png"));
        let args = [
            "generate-tiled", "--net", "g0-small", "--random-init", "--seed", "7", "--width", "150", "--height", "100",
            "--budget", "48", "--order", order, "--verify-seams", "-o", &o,
        ];
        let (code, out) = run(&args);
        assert_eq!(code, 0, "{out}");
        let r = Report::parse(&out).unwrap();
        assert_eq!(r.get("pixels_discarded"), Some("0"));
        assert_eq!(r.get("seam_max_abs_diff"), Some("0"));
        assert_ne!(r.get("seams_checked"), Some("0"));
        files.push(std::fs::read(&o).unwrap());
    }
    assert_eq!(files[0], files[1]);
    let (w, h, _) = decode(&path(dir.path(), "0.png"));
    assert_eq!((w, h), (150, 100));
}

#[test]
fn crop_mode_reports_interior_redundancy() {
    let dir = tempfile::tempdir().unwrap();
    let o = path(dir.path(), "c.png");
    let rep = path(dir.path(), "c.txt");
    let args = [
        "generate-tiled", "--mode", "inconsistent-crop", "--blocks", "3", "--budget", "64", "--random-init", "--width",
        "200", "--height", "200", "-o", &o, "--report", &rep,
    ];
    assert_eq!(run(&args).0, 0);
    let r = Report::parse(&std::fs::read_to_string(&rep).unwrap()).unwrap();
    assert_eq!(r.get("interior_discard_fraction"), Some("0.4375"));
    assert_eq!(r.get_table("tiles").unwrap().rows.len(), 25);
    let seams = [&args[..], &["--verify-seams"]].concat();
    assert_eq!(run(&seams).0, 2);
}

#[test]
fn verify_suites() {
    let (code, out) = run(&["verify", "redundancy", "--budget", "4096", "--blocks", "9"]);
    assert_eq!(code, 0);
    assert!(out.contains("redundancy_fraction = 0.4375"));

    let ok = ["verify", "consistency", "--net", "g0-small", "--random-init", "--trials", "4", "--seed", "1"];
    let (code, out) = run(&ok);
    assert_eq!(code, 0, "{out}");
    assert_eq!(Report::parse(&out).unwrap().get("failures"), Some("0"));

    let bad = [&ok[..], &["--zero-pad-layer", "6"]].concat();
    let (code, out) = run(&bad);
    assert_eq!(code, 1);
    let r = Report::parse(&out).unwrap();
    assert_eq!(r.get("failures"), Some("4"));
    let named = &r.get_table("trials").unwrap().rows[0][5];
    assert!(named.starts_with("6:conv3x3"), "{named}");

    let (code, out) = run(&["verify", "geometry", "--net", "g0"]);
    assert_eq!(code, 0, "{out}");

    let st = [
        "verify", "stationarity", "--net", "bilinear", "--random-init", "--samples", "20000", "--detect-shift", "1,0",
    ];
    let (code, out) = run(&st);
    assert_eq!(code, 0, "{out}");
    let r = Report::parse(&out).unwrap();
    assert_eq!(r.get("verdict"), Some("consistent_with_period"));
    assert_eq!(r.get("period_tested"), Some("2x2"));
    assert_eq!(r.get("detection_triggered"), Some("true"));
}

#[test]
fn analyze_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let mask = path(dir.path(), "mask.png");
    let (code, out) = run(&["analyze", "taint", "--blocks", "2", "--latent", "4x4", "-o", &mask]);
    assert_eq!(code, 0);
    assert!(out.contains("border_width = 3"));
    let (w, h, px) = decode(&mask);
    assert_eq!((w, h), (16, 16));
    for r in 0..16usize {
        for c in 0..16usize {
            let edge = r.min(c).min(15 - r).min(15 - c);
            assert_eq!(px[r * 16 + c], if edge < 3 { 255 } else { 0 }, "({r},{c})");
        }
    }

    let (code, out) = run(&["analyze", "redundancy", "--budget", "4096", "--blocks", "6..10"]);
    assert_eq!(code, 0);
    let r = Report::parse(&out).unwrap();
    let rows = &r.get_table("fractions").unwrap().rows;
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[3], ["4096", "9", "8", "0.4375"]);
    assert_eq!(run(&["analyze", "redundancy", "--budget", "8", "--blocks", "3"]).0, 2);
    assert_eq!(run(&["analyze", "taint", "--blocks", "0"]).0, 2);

    let st = ["analyze", "stationarity", "--net", "bilinear", "--random-init", "--samples", "10000"];
    let (code, out) = run(&st);
    assert_eq!(code, 0);
    assert!(out.contains("verdict = consistent_with_period"));
    assert!(out.contains("[table probe_pixels]"));

    let (code, out) = run(&["analyze", "geometry", "--net", "g0"]);
    assert_eq!(code, 0);
    assert!(out.contains("dependence_range = 160x160"), "{out}");
}

#[test]
fn thread_count_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_infcanvas");
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let o = path(dir.path(), &format!("t{threads}.png"));
        let status = Command::new(bin)
            .env("INFCANVAS_THREADS", threads)
            .args(["generate-tiled", "--net", "g0-small", "--random-init", "--width", "96", "--height", "96"])
            .args(["--budget", "32", "--order", "shuffled", "-o", &o])
            .output()
            .unwrap();
        assert!(status.status.success());
        outputs.push(std::fs::read(&o).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let bad = Command::new(bin)
        .env("INFCANVAS_THREADS", "zero")
        .args(["verify", "redundancy", "--budget", "64", "--blocks", "3"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
