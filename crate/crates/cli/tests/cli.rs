//! End-to-end tests of the command-line interface, driving the built binary
//! on synthetic and file-based inputs.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rangewarp"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "command failed:\nstdout: {}\nstderr: {}",
        stdout(out),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn tempdir() -> tempfile::TempDir {
    tempfile::tempdir().unwrap()
}

// Tiny two-point KITTI-format sample with an identity-ish calibration and a
// small PPM image.
fn write_file_sample(dir: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let cloud = dir.join("sweep.bin");
    let mut bytes = Vec::new();
    for v in [5.0f32, 0.5, 0.0, 0.8, 5.0, -0.5, 0.1, 0.6] {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(&cloud, bytes).unwrap();

    let calib = dir.join("calib.txt");
    fs::write(
        &calib,
        "P2: 100 0 32 0 0 100 16 0 0 0 1 0\n\
         R0_rect: 1 0 0 0 1 0 0 0 1\n\
         Tr_velo_to_cam: 0 -1 0 0 0 0 -1 0 1 0 0 0\n",
    )
    .unwrap();

    let image = dir.join("frame.ppm");
    let (w, h) = (64usize, 32usize);
    let mut ppm = format!("P6\n{w} {h}\n255\n").into_bytes();
    for i in 0..w * h {
        ppm.extend_from_slice(&[(i % 251) as u8, 40, 200]);
    }
    fs::write(&image, ppm).unwrap();

    (cloud, calib, image)
}

#[test]
fn range_image_on_demo_scene() {
    let dir = tempdir();
    let out = run(&[
        "range-image",
        "--demo",
        "--width",
        "64",
        "--beams",
        "8",
        "--fov-deg",
        "45.84",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_ok(&out);
    let text = stdout(&out);
    assert!(text.contains("width=64"), "{text}");
    assert!(text.contains("height=8"), "{text}");
    let rimg = dir.path().join("demo.rimg");
    assert!(rimg.exists());
    assert_eq!(&fs::read(&rimg).unwrap()[..4], b"RIMG");
}

#[test]
fn correspond_writes_text_rows() {
    let dir = tempdir();
    let out = run(&[
        "correspond",
        "--demo",
        "--width",
        "64",
        "--beams",
        "8",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_ok(&out);
    let text = fs::read_to_string(dir.path().join("demo_correspondences.txt")).unwrap();
    let first = text.lines().next().expect("at least one correspondence");
    let fields: Vec<&str> = first.split_whitespace().collect();
    assert_eq!(fields.len(), 4, "rcol rrow u v: {first}");
    for f in fields {
        f.parse::<f64>().unwrap();
    }
}

#[test]
fn warp_produces_a_ppm() {
    let dir = tempdir();
    let out = run(&[
        "warp",
        "--demo",
        "--width",
        "64",
        "--beams",
        "8",
        "--controls",
        "24",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_ok(&out);
    let bytes = fs::read(dir.path().join("demo_warped.ppm")).unwrap();
    assert!(bytes.starts_with(b"P6\n64 8\n255\n"));
    assert_eq!(bytes.len(), b"P6\n64 8\n255\n".len() + 64 * 8 * 3);
    // The coefficient dump has one line per control point plus the affine row.
    let dump = fs::read_to_string(dir.path().join("demo_spline.txt")).unwrap();
    assert_eq!(dump.lines().count(), 25, "{dump}");
    assert!(dump.lines().last().unwrap().starts_with("affine"));
}

#[test]
fn pipeline_reports_the_pinned_stage_names() {
    let dir = tempdir();
    let out = run(&[
        "pipeline",
        "--demo",
        "--width",
        "128",
        "--beams",
        "16",
        "--controls",
        "24",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_ok(&out);
    let text = stdout(&out);
    for key in [
        "fit_count=1",
        "build_range=",
        "correspondences=",
        "fps=",
        "fit=",
        "warp[p4]=",
        "fuse[p4]=",
        "warp[p8]=",
        "warp[p16]=",
    ] {
        assert!(text.contains(key), "missing {key} in:\n{text}");
    }
    assert!(dir.path().join("demo.timings").exists());
}

#[test]
fn pipeline_handles_parallel_jobs() {
    let dir = tempdir();
    let (cloud, calib, image) = write_file_sample(dir.path());
    // Second sample: a copy under another name.
    let cloud2 = dir.path().join("sweep2.bin");
    fs::copy(&cloud, &cloud2).unwrap();

    let out = run(&[
        "pipeline",
        "--cloud",
        cloud.to_str().unwrap(),
        "--calib",
        calib.to_str().unwrap(),
        "--image",
        image.to_str().unwrap(),
        "--extra-cloud",
        cloud2.to_str().unwrap(),
        "--jobs",
        "2",
        "--width",
        "32",
        "--beams",
        "4",
        "--controls",
        "3",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    // Two points give too few correspondences: both samples must fail, and
    // the command must say so rather than crash.
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("2 sample(s) failed"), "{err}");
}

#[test]
fn eval_computes_hand_counted_iou() {
    let dir = tempdir();
    // 3x3 grids as little-endian u32 label files.
    let write_grid = |name: &str, values: &[u32]| -> PathBuf {
        let path = dir.path().join(name);
        let bytes: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
        fs::write(&path, bytes).unwrap();
        path
    };
    let gt = write_grid("gt.labels", &[1, 1, 1, 1, 0, 0, 0, 0, 0]);
    let pred = write_grid("pred.labels", &[1, 1, 1, 0, 1, 0, 0, 0, 0]);
    let out = run(&[
        "eval",
        "--pred",
        pred.to_str().unwrap(),
        "--gt",
        gt.to_str().unwrap(),
        "--width",
        "3",
        "--beams",
        "3",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_ok(&out);
    let text = stdout(&out);
    assert!(text.contains("class 1 car iou=0.600000"), "{text}");
    assert!(text.contains("mean=0.600000"), "{text}");
    let kv = fs::read_to_string(dir.path().join("iou.kv")).unwrap();
    assert!(kv.contains("iou_1=0.600000"));
    assert!(kv.contains("mean=0.600000"));
}

#[test]
fn baseline_on_demo_scene_is_perfect() {
    let dir = tempdir();
    let out = run(&[
        "baseline",
        "--demo",
        "--width",
        "64",
        "--beams",
        "8",
        "--fov-deg",
        "45.8366236609",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_ok(&out);
    let text = stdout(&out);
    assert!(text.contains("mean=1.000000"), "{text}");
    assert!(dir.path().join("demo_baseline.labels").exists());
    assert!(dir.path().join("demo_baseline.ppm").exists());
}

#[test]
fn baseline_remap_folds_classes() {
    let dir = tempdir();
    let out = run(&[
        "baseline",
        "--demo",
        "--width",
        "64",
        "--beams",
        "8",
        "--fov-deg",
        "45.8366236609",
        "--remap",
        "2=1,3=1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_ok(&out);
    let labels = fs::read(dir.path().join("demo_baseline.labels")).unwrap();
    let classes: Vec<u32> = labels
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    assert!(classes.iter().all(|&c| c == 0 || c == 1 || c == u32::MAX));
    assert!(classes.contains(&1));
}

#[test]
fn bench_prints_one_row_per_count() {
    let dir = tempdir();
    let out = run(&[
        "bench",
        "--demo",
        "--width",
        "128",
        "--beams",
        "16",
        "--counts",
        "4,16,100000",
        "--reps",
        "3",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_ok(&out);
    let text = stdout(&out);
    assert!(text.contains("k=4 median_ms="), "{text}");
    assert!(text.contains("k=16 median_ms="), "{text}");
    assert!(text.contains("k=100000 skipped"), "{text}");
}

#[test]
fn bench_rejects_two_repetitions() {
    let out = run(&["bench", "--demo", "--width", "64", "--beams", "8", "--reps", "2"]);
    assert!(!out.status.success());
}

#[test]
fn spherical_mode_bins_by_zenith() {
    let dir = tempdir();
    // The demo rig sweeps elevations within +/-2.6 degrees; match the zenith
    // grid to that band.
    let out = run(&[
        "range-image",
        "--demo",
        "--width",
        "64",
        "--beams",
        "8",
        "--mode",
        "spherical",
        "--zenith-min-deg",
        "-2.6",
        "--zenith-step-deg",
        "0.65",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_ok(&out);
    let text = stdout(&out);
    let valid: usize = text
        .split_whitespace()
        .find_map(|f| f.strip_prefix("valid_pixels=").and_then(|v| v.parse().ok()))
        .unwrap();
    assert!(valid > 0, "{text}");
}

#[test]
fn render_validity_channel() {
    let dir = tempdir();
    let out = run(&[
        "render",
        "--demo",
        "--width",
        "64",
        "--beams",
        "8",
        "--channel",
        "validity",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_ok(&out);
    let bytes = fs::read(dir.path().join("demo_validity.pgm")).unwrap();
    assert!(bytes.starts_with(b"P5\n64 8\n255\n"));
}

#[test]
fn render_classes_from_scene_file() {
    let dir = tempdir();
    let scene = dir.path().join("two_walls.scene");
    fs::write(&scene, "box 6 -2 -3 6.01 2 3 1\ncylinder 10 3 1 -3 3 2\n").unwrap();
    let out = run(&[
        "render",
        "--scene",
        scene.to_str().unwrap(),
        "--width",
        "64",
        "--beams",
        "8",
        "--channel",
        "classes",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_ok(&out);
    assert!(dir.path().join("two_walls_classes.ppm").exists());
}

#[test]
fn kitti_file_inputs_flow_through_range_image_and_correspond() {
    let dir = tempdir();
    let (cloud, calib, image) = write_file_sample(dir.path());
    let out = run(&[
        "range-image",
        "--cloud",
        cloud.to_str().unwrap(),
        "--calib",
        calib.to_str().unwrap(),
        "--image",
        image.to_str().unwrap(),
        "--width",
        "32",
        "--beams",
        "4",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_ok(&out);
    assert!(stdout(&out).contains("points=2"));
    assert!(dir.path().join("sweep.rimg").exists());

    let out = run(&[
        "correspond",
        "--cloud",
        cloud.to_str().unwrap(),
        "--calib",
        calib.to_str().unwrap(),
        "--image",
        image.to_str().unwrap(),
        "--width",
        "32",
        "--beams",
        "4",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_ok(&out);
    let text = fs::read_to_string(dir.path().join("sweep_correspondences.txt")).unwrap();
    assert_eq!(text.lines().count(), 2, "both points project into the image:\n{text}");
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempdir();
    let config = dir.path().join("run.conf");
    fs::write(
        &config,
        format!(
            "# demo run\nwidth=32\nbeams=4\nout={}\n",
            dir.path().display()
        ),
    )
    .unwrap();

    // Width comes from the file.
    let out = run(&["range-image", "--demo", "--config", config.to_str().unwrap()]);
    assert_ok(&out);
    assert!(stdout(&out).contains("width=32 height=4"), "{}", stdout(&out));

    // An explicit flag overrides the file value.
    let out = run(&[
        "range-image",
        "--demo",
        "--config",
        config.to_str().unwrap(),
        "--width",
        "16",
    ]);
    assert_ok(&out);
    assert!(stdout(&out).contains("width=16 height=4"), "{}", stdout(&out));
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempdir();
    let config = dir.path().join("bad.conf");
    fs::write(&config, "wdith=32\n").unwrap();
    let out = run(&["range-image", "--demo", "--config", config.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown config key"));
}
