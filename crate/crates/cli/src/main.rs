//! Command-line surface for the rangewarp toolkit: build range images,
//! inspect correspondences, warp RGB data into the range domain, run the
//! fusion pipeline, evaluate segmentations and benchmark control-point
//! budgets.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use rangewarp::bench::benchmark_control_points;
use rangewarp::cloud::{reconstruct_beam_ids, PointCloud};
use rangewarp::eval::{
    compute_iou, range_class_grid, rgb_mask_lookup_baseline, ClassRemap, IoUReport,
};
use rangewarp::fusion::{
    make_stub_extractor, run_fusion_pipeline, warp_feature_layer, FusionPlan, LayerGeometry,
    StubExtractor,
};
use rangewarp::io::{
    load_kitti_calibration, load_kitti_velodyne, load_labels, load_native_extended, save_labels,
};
use rangewarp::projection::build_correspondences;
use rangewarp::range_image::{build_range_image, GridConfig, RangeImage, RowMode};
use rangewarp::render::{read_ppm, render_range_image, write_ppm, RenderChannel};
use rangewarp::sampling::{farthest_point_sample, resolve_seed, FeatureGrid, SeedPolicy};
use rangewarp::scene::{ClassGrid, NO_CLASS};
use rangewarp::spline::fit_spline;
use rangewarp::synthetic::{
    demo_scene, generate_synthetic_scene, parse_scene, render_class_mask, CameraRig, RigSpec,
    SceneSpec,
};
use rangewarp::{CalibrationSet, RgbImage};

#[derive(Parser)]
#[command(name = "rangewarp", version, about = "LiDAR range images and RGB feature warping")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a range image from a point cloud and cache it to disk.
    RangeImage(SampleCmd),
    /// Project valid range pixels into the RGB image and dump correspondences.
    Correspond(SampleCmd),
    /// Warp the RGB image into the range domain through the fitted spline.
    Warp(SampleCmd),
    /// Run the fusion pipeline and report per-stage timings.
    Pipeline(PipelineCmd),
    /// Compute per-class IoU between two class-grid files.
    Eval(EvalCmd),
    /// Label range pixels by looking up an RGB segmentation mask.
    Baseline(BaselineCmd),
    /// Benchmark fit+warp time against the control-point count.
    Bench(BenchCmd),
    /// Render a range-image channel to PGM/PPM.
    Render(RenderCmd),
}

/// Grid, spline and output options shared by the subcommands. Each may also
/// come from a `key=value` config file; explicit flags win.
#[derive(Args, Clone, Default)]
struct CommonOpts {
    /// Flat key=value config file (flags override file values).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Range image width (azimuth bins).
    #[arg(long)]
    width: Option<usize>,
    /// Range image height (beams).
    #[arg(long)]
    beams: Option<usize>,
    /// Horizontal field of view in degrees, centered on the forward axis.
    #[arg(long)]
    fov_deg: Option<f64>,
    /// Number of spline control points.
    #[arg(long)]
    controls: Option<usize>,
    /// Spline regularization.
    #[arg(long)]
    lambda: Option<f64>,
    /// How the first control point is chosen.
    #[arg(long, value_enum)]
    seed_policy: Option<SeedPolicyArg>,
    /// Row assignment mode.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Zenith of the lowest row in degrees (spherical mode).
    #[arg(long, allow_negative_numbers = true)]
    zenith_min_deg: Option<f64>,
    /// Zenith step per row in degrees (spherical mode).
    #[arg(long)]
    zenith_step_deg: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Beam,
    Spherical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SeedPolicyArg {
    Center,
    Index0,
}

/// Where the sample comes from: KITTI-format files or a synthetic scene.
#[derive(Args, Clone, Default)]
struct InputOpts {
    /// Point cloud file (.bin KITTI float32 quadruples; .rwp extended format
    /// with beam ids).
    #[arg(long)]
    cloud: Option<PathBuf>,
    /// KITTI calibration text file (P2, R0_rect, Tr_velo_to_cam).
    #[arg(long)]
    calib: Option<PathBuf>,
    /// RGB image as binary PPM (P6).
    #[arg(long)]
    image: Option<PathBuf>,
    /// Per-point class labels (little-endian u32 per point).
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Synthetic scene description file.
    #[arg(long)]
    scene: Option<PathBuf>,
    /// Use the built-in synthetic demo scene.
    #[arg(long)]
    demo: bool,
}

#[derive(Args)]
struct SampleCmd {
    #[command(flatten)]
    input: InputOpts,
    #[command(flatten)]
    common: CommonOpts,
}

#[derive(Args)]
struct PipelineCmd {
    #[command(flatten)]
    input: InputOpts,
    #[command(flatten)]
    common: CommonOpts,
    /// Additional point cloud files processed as separate samples.
    #[arg(long = "extra-cloud")]
    extra_clouds: Vec<PathBuf>,
    /// Number of samples processed concurrently.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct EvalCmd {
    /// Predicted class grid (little-endian u32 per pixel, row-major,
    /// width x beams).
    #[arg(long)]
    pred: PathBuf,
    /// Ground-truth class grid in the same layout.
    #[arg(long)]
    gt: PathBuf,
    /// Optional cached range image whose validity mask restricts evaluation.
    #[arg(long)]
    rimg: Option<PathBuf>,
    #[command(flatten)]
    common: CommonOpts,
}

#[derive(Args)]
struct BaselineCmd {
    #[command(flatten)]
    input: InputOpts,
    #[command(flatten)]
    common: CommonOpts,
    /// RGB-domain class mask (little-endian u32 per pixel, row-major, image
    /// dimensions). Synthetic inputs default to the exact generator mask.
    #[arg(long)]
    mask: Option<PathBuf>,
    /// Class remap pairs, e.g. "2=1,3=1".
    #[arg(long)]
    remap: Option<String>,
}

#[derive(Args)]
struct BenchCmd {
    #[command(flatten)]
    input: InputOpts,
    #[command(flatten)]
    common: CommonOpts,
    /// Comma-separated control-point counts.
    #[arg(long, default_value = "4,24,48,96,192,384")]
    counts: String,
    /// Timed repetitions per count (median reported).
    #[arg(long, default_value_t = 5)]
    reps: usize,
}

#[derive(Args)]
struct RenderCmd {
    #[command(flatten)]
    input: InputOpts,
    #[command(flatten)]
    common: CommonOpts,
    /// Channel to render.
    #[arg(long, value_enum, default_value_t = ChannelArg::Range)]
    channel: ChannelArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ChannelArg {
    Range,
    Intensity,
    Validity,
    Classes,
}

/// Fully resolved options: flag > config file > default.
struct Settings {
    width: usize,
    beams: usize,
    fov_deg: f64,
    controls: usize,
    lambda: f64,
    seed_policy: SeedPolicy,
    mode: ModeArg,
    zenith_min_deg: f64,
    zenith_step_deg: f64,
    out: PathBuf,
}

impl Settings {
    fn resolve(opts: &CommonOpts) -> Result<Self> {
        let file = match &opts.config {
            Some(path) => parse_config(path)?,
            None => HashMap::new(),
        };
        let lookup = |key: &str| file.get(key).cloned();
        let num = |key: &str| -> Result<Option<f64>> {
            lookup(key)
                .map(|v| {
                    v.parse::<f64>()
                        .with_context(|| format!("config key {key}: bad number {v:?}"))
                })
                .transpose()
        };
        let int = |key: &str| -> Result<Option<usize>> {
            lookup(key)
                .map(|v| {
                    v.parse::<usize>()
                        .with_context(|| format!("config key {key}: bad integer {v:?}"))
                })
                .transpose()
        };

        let mode = match opts.mode {
            Some(m) => m,
            None => match lookup("mode").as_deref() {
                Some("beam") => ModeArg::Beam,
                Some("spherical") => ModeArg::Spherical,
                Some(other) => bail!("config key mode: unknown value {other:?}"),
                None => ModeArg::Beam,
            },
        };
        let seed_policy = match opts.seed_policy {
            Some(SeedPolicyArg::Center) => SeedPolicy::Center,
            Some(SeedPolicyArg::Index0) => SeedPolicy::Index0,
            None => match lookup("seed-policy").as_deref() {
                Some("center") => SeedPolicy::Center,
                Some("index0") => SeedPolicy::Index0,
                Some(other) => bail!("config key seed-policy: unknown value {other:?}"),
                None => SeedPolicy::Center,
            },
        };

        Ok(Self {
            width: opts.width.or(int("width")?).unwrap_or(512),
            beams: opts.beams.or(int("beams")?).unwrap_or(64),
            fov_deg: opts.fov_deg.or(num("fov-deg")?).unwrap_or(90.0),
            controls: opts.controls.or(int("controls")?).unwrap_or(48),
            lambda: opts.lambda.or(num("lambda")?).unwrap_or(0.0),
            seed_policy,
            mode,
            zenith_min_deg: opts.zenith_min_deg.or(num("zenith-min-deg")?).unwrap_or(-24.9),
            zenith_step_deg: opts.zenith_step_deg.or(num("zenith-step-deg")?).unwrap_or(0.42),
            out: opts
                .out
                .clone()
                .or_else(|| lookup("out").map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from(".")),
        })
    }

    fn grid_config(&self) -> Result<GridConfig> {
        let half = (self.fov_deg / 2.0).to_radians();
        Ok(GridConfig::new(self.width, self.beams, -half, half)?)
    }

    fn row_mode(&self) -> RowMode {
        match self.mode {
            ModeArg::Beam => RowMode::BeamId,
            ModeArg::Spherical => RowMode::Spherical {
                zenith_min: self.zenith_min_deg.to_radians(),
                zenith_step: self.zenith_step_deg.to_radians(),
            },
        }
    }
}

const CONFIG_KEYS: [&str; 10] = [
    "width",
    "beams",
    "fov-deg",
    "controls",
    "lambda",
    "seed-policy",
    "mode",
    "zenith-min-deg",
    "zenith-step-deg",
    "out",
];

fn parse_config(path: &Path) -> Result<HashMap<String, String>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let mut map = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("{}:{}: expected key=value", path.display(), lineno + 1);
        };
        let key = key.trim().to_string();
        if !CONFIG_KEYS.contains(&key.as_str()) {
            bail!("{}:{}: unknown config key {key:?}", path.display(), lineno + 1);
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

/// One loaded sample, whatever the source.
struct Sample {
    cloud: PointCloud,
    rgb: RgbImage,
    calib: CalibrationSet,
    labels: Option<Vec<u32>>,
    /// Stem used to name output files.
    stem: String,
}

/// Synthetic scanner following the requested grid; the camera is fixed.
fn synthetic_rig(settings: &Settings) -> Result<RigSpec> {
    let cfg = settings.grid_config()?;
    let beams = settings.beams;
    Ok(RigSpec {
        beam_elevations: (0..beams)
            .map(|b| -0.05 + 0.1 * (b as f64 + 0.5) / beams as f64)
            .collect(),
        azimuth_steps: settings.width,
        azimuth_min: cfg.azimuth_min,
        azimuth_max: cfg.azimuth_max,
        camera: CameraRig::forward_centered(1024, 256, 600.0),
    })
}

fn synthetic_spec(input: &InputOpts) -> Result<SceneSpec> {
    match &input.scene {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read scene {}", path.display()))?;
            Ok(parse_scene(&text, &path.display().to_string())?)
        }
        None => Ok(demo_scene().0),
    }
}

fn load_cloud(path: &Path) -> Result<PointCloud> {
    if path.extension().is_some_and(|e| e == "rwp") {
        Ok(load_native_extended(path)?)
    } else {
        Ok(load_kitti_velodyne(path)?)
    }
}

fn load_sample(
    input: &InputOpts,
    settings: &Settings,
    cloud_override: Option<&Path>,
) -> Result<Sample> {
    if input.demo || input.scene.is_some() {
        let spec = synthetic_spec(input)?;
        let rig = synthetic_rig(settings)?;
        let scene = generate_synthetic_scene(&spec, &rig)?;
        let stem = input
            .scene
            .as_ref()
            .and_then(|p| p.file_stem())
            .map(|s| s.to_string_lossy().to_string())
            .unwrap_or_else(|| "demo".to_string());
        return Ok(Sample {
            cloud: scene.cloud,
            rgb: scene.rgb,
            calib: scene.calib,
            labels: Some(scene.per_point_class),
            stem,
        });
    }

    let cloud_path = cloud_override
        .map(Path::to_path_buf)
        .or_else(|| input.cloud.clone())
        .context("need --cloud (or --scene/--demo)")?;
    let calib_path = input.calib.as_ref().context("need --calib for file input")?;
    let image_path = input.image.as_ref().context("need --image for file input")?;

    let mut cloud = load_cloud(&cloud_path)?;
    if matches!(settings.mode, ModeArg::Beam) && cloud.beam_ids().is_none() {
        cloud = reconstruct_beam_ids(&cloud, settings.beams as u32)?;
    }
    let labels = input.labels.as_ref().map(|p| load_labels(p)).transpose()?;
    Ok(Sample {
        cloud,
        rgb: read_ppm(image_path)?,
        calib: load_kitti_calibration(calib_path)?,
        labels,
        stem: cloud_path
            .file_stem()
            .map(|s| s.to_string_lossy().to_string())
            .unwrap_or_else(|| "sample".to_string()),
    })
}

fn ensure_out(settings: &Settings) -> Result<()> {
    fs::create_dir_all(&settings.out)
        .with_context(|| format!("cannot create output directory {}", settings.out.display()))
}

fn write_text_atomic(path: &Path, text: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, text)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn class_name(id: usize) -> String {
    match id {
        0 => "background".to_string(),
        1 => "car".to_string(),
        2 => "pedestrian".to_string(),
        3 => "cyclist".to_string(),
        n => format!("class{n}"),
    }
}

fn print_iou_report(report: &IoUReport, out_dir: &Path) -> Result<()> {
    let mut machine = String::new();
    for (id, iou) in report.per_class.iter().enumerate() {
        match iou {
            Some(v) => {
                println!("class {id} {} iou={v:.6}", class_name(id));
                machine.push_str(&format!("iou_{id}={v:.6}\n"));
            }
            None => println!("class {id} {} iou=absent", class_name(id)),
        }
    }
    match report.mean_over_foreground {
        Some(m) => {
            println!("mean={m:.6}");
            machine.push_str(&format!("mean={m:.6}\n"));
        }
        None => println!("mean=absent"),
    }
    write_text_atomic(&out_dir.join("iou.kv"), &machine)
}

fn standard_extractors(plan: &FusionPlan) -> Result<(StubExtractor, StubExtractor)> {
    let rgb_levels: Vec<(usize, usize)> = plan
        .layer_pairs
        .iter()
        .enumerate()
        .map(|(i, p)| (p.rgb_stride as usize, 8 << i))
        .collect();
    let range_levels: Vec<(usize, usize)> = plan
        .layer_pairs
        .iter()
        .enumerate()
        .map(|(i, p)| (p.range_stride as usize, 16 << i))
        .collect();
    Ok((make_stub_extractor(&rgb_levels)?, make_stub_extractor(&range_levels)?))
}

fn cmd_range_image(cmd: &SampleCmd) -> Result<()> {
    let settings = Settings::resolve(&cmd.common)?;
    ensure_out(&settings)?;
    let sample = load_sample(&cmd.input, &settings, None)?;
    let cfg = settings.grid_config()?;
    let img = build_range_image(&sample.cloud, &cfg, settings.row_mode())?;
    let path = settings.out.join(format!("{}.rimg", sample.stem));
    img.save(&path)?;
    println!(
        "points={} valid_pixels={} width={} height={} file={}",
        sample.cloud.len(),
        img.valid_count(),
        img.width(),
        img.height(),
        path.display()
    );
    Ok(())
}

fn cmd_correspond(cmd: &SampleCmd) -> Result<()> {
    let settings = Settings::resolve(&cmd.common)?;
    ensure_out(&settings)?;
    let sample = load_sample(&cmd.input, &settings, None)?;
    let cfg = settings.grid_config()?;
    let img = build_range_image(&sample.cloud, &cfg, settings.row_mode())?;
    let corr = build_correspondences(&img, &sample.calib, sample.rgb.size());
    let mut text = String::with_capacity(corr.len() * 32);
    for c in &corr.items {
        text.push_str(&format!(
            "{} {} {:.6} {:.6}\n",
            c.range_px.0, c.range_px.1, c.rgb_px.0, c.rgb_px.1
        ));
    }
    let path = settings.out.join(format!("{}_correspondences.txt", sample.stem));
    write_text_atomic(&path, &text)?;
    println!("correspondences={} file={}", corr.len(), path.display());
    Ok(())
}

fn cmd_warp(cmd: &SampleCmd) -> Result<()> {
    let settings = Settings::resolve(&cmd.common)?;
    ensure_out(&settings)?;
    let sample = load_sample(&cmd.input, &settings, None)?;
    let cfg = settings.grid_config()?;
    let img = build_range_image(&sample.cloud, &cfg, settings.row_mode())?;
    let corr = build_correspondences(&img, &sample.calib, sample.rgb.size());
    if corr.len() < 3 {
        bail!("only {} correspondences; nothing to warp", corr.len());
    }
    let k = settings.controls.min(corr.len());
    let seed = resolve_seed(&corr, settings.seed_policy);
    let indices = farthest_point_sample(&corr.range_coords(), k, seed)?;
    let warp = fit_spline(&corr.subset(&indices), settings.lambda)?;

    let rgb_grid = FeatureGrid::from_rgb_image(&sample.rgb);
    let geom = LayerGeometry {
        width: img.width(),
        height: img.height(),
        stride: 1.0,
        source_size: img.size(),
    };
    let warped = warp_feature_layer(&rgb_grid, &warp, &geom, sample.rgb.size())?;
    let bytes: Vec<u8> = warped
        .data()
        .iter()
        .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    let path = settings.out.join(format!("{}_warped.ppm", sample.stem));
    write_ppm(&path, warped.width(), warped.height(), &bytes)?;

    // Coefficient dump for debugging: control points, kernel weights, affine tail.
    let mut dump = String::new();
    for (c, wgt) in warp.controls().iter().zip(warp.weights()) {
        dump.push_str(&format!("control {} {} weight {:e} {:e}\n", c[0], c[1], wgt[0], wgt[1]));
    }
    let aff = warp.affine();
    dump.push_str(&format!(
        "affine const {:e} {:e} x {:e} {:e} y {:e} {:e}\n",
        aff[0][0], aff[0][1], aff[1][0], aff[1][1], aff[2][0], aff[2][1]
    ));
    write_text_atomic(&settings.out.join(format!("{}_spline.txt", sample.stem)), &dump)?;

    println!("controls={k} fit_residual={:.3e} file={}", warp.fit_residual(), path.display());
    Ok(())
}

fn run_pipeline_sample(sample: &Sample, settings: &Settings) -> Result<String> {
    let cfg = settings.grid_config()?;
    let plan = FusionPlan::standard(settings.controls, settings.lambda);
    let (rgb_ex, range_ex) = standard_extractors(&plan)?;
    let result = run_fusion_pipeline(
        &sample.cloud,
        &sample.rgb,
        &sample.calib,
        &cfg,
        settings.row_mode(),
        &plan,
        &rgb_ex,
        &range_ex,
        settings.seed_policy,
    )?;
    let mut report = String::new();
    report.push_str(&format!("sample={}\n", sample.stem));
    report.push_str(&format!("correspondences={}\n", result.correspondence_count));
    report.push_str(&format!("controls={}\n", result.control_indices.len()));
    report.push_str(&format!("fit_count={}\n", result.fit_count));
    for layer in &result.layers {
        let g = &layer.grid;
        report.push_str(&format!(
            "fused[{}]={}x{}x{}\n",
            layer.label,
            g.width(),
            g.height(),
            g.channels()
        ));
    }
    report.push_str(&result.timing_report());
    Ok(report)
}

fn cmd_pipeline(cmd: &PipelineCmd) -> Result<()> {
    let settings = Settings::resolve(&cmd.common)?;
    ensure_out(&settings)?;
    if cmd.jobs == 0 {
        bail!("--jobs must be at least 1");
    }

    // The primary input plus any extra clouds, each an independent sample.
    let mut cloud_paths: Vec<Option<PathBuf>> = vec![None];
    for extra in &cmd.extra_clouds {
        cloud_paths.push(Some(extra.clone()));
    }

    let reports: Vec<Result<String>> = if cmd.jobs == 1 || cloud_paths.len() == 1 {
        cloud_paths
            .iter()
            .map(|p| {
                let sample = load_sample(&cmd.input, &settings, p.as_deref())?;
                run_pipeline_sample(&sample, &settings)
            })
            .collect()
    } else {
        // Fixed worker pool over a shared cursor; samples are independent.
        let cursor = AtomicUsize::new(0);
        let results: Vec<Mutex<Option<Result<String>>>> =
            cloud_paths.iter().map(|_| Mutex::new(None)).collect();
        std::thread::scope(|scope| {
            for _ in 0..cmd.jobs.min(cloud_paths.len()) {
                scope.spawn(|| loop {
                    let i = cursor.fetch_add(1, Ordering::Relaxed);
                    if i >= cloud_paths.len() {
                        break;
                    }
                    let outcome = load_sample(&cmd.input, &settings, cloud_paths[i].as_deref())
                        .and_then(|sample| run_pipeline_sample(&sample, &settings));
                    *results[i].lock().unwrap() = Some(outcome);
                });
            }
        });
        results
            .into_iter()
            .map(|slot| slot.into_inner().unwrap().expect("every slot filled"))
            .collect()
    };

    let mut failures = 0;
    for report in reports {
        match report {
            Ok(text) => {
                print!("{text}");
                let stem = text
                    .lines()
                    .next()
                    .and_then(|l| l.strip_prefix("sample="))
                    .unwrap_or("sample");
                write_text_atomic(&settings.out.join(format!("{stem}.timings")), &text)?;
            }
            Err(e) => {
                eprintln!("sample failed: {e:#}");
                failures += 1;
            }
        }
    }
    if failures > 0 {
        bail!("{failures} sample(s) failed");
    }
    Ok(())
}

fn cmd_eval(cmd: &EvalCmd) -> Result<()> {
    let settings = Settings::resolve(&cmd.common)?;
    ensure_out(&settings)?;
    let (w, h) = (settings.width, settings.beams);
    let pred = ClassGrid::from_data(w, h, load_labels(&cmd.pred)?)?;
    let gt = ClassGrid::from_data(w, h, load_labels(&cmd.gt)?)?;
    let mask = match &cmd.rimg {
        Some(path) => {
            let img = RangeImage::load(path)?;
            if img.size() != (w, h) {
                bail!("range image {}x{} does not match grid {w}x{h}", img.width(), img.height());
            }
            (0..h)
                .flat_map(|r| (0..w).map(move |c| (r, c)))
                .map(|(r, c)| img.is_valid(r, c))
                .collect()
        }
        None => vec![true; w * h],
    };
    let report = compute_iou(&pred, &gt, &mask)?;
    print_iou_report(&report, &settings.out)
}

fn parse_remap(spec: &str) -> Result<ClassRemap> {
    let mut pairs = Vec::new();
    for part in spec.split(',').filter(|s| !s.trim().is_empty()) {
        let (from, to) = part
            .split_once('=')
            .with_context(|| format!("remap entry {part:?}: expected FROM=TO"))?;
        pairs.push((
            from.trim().parse::<u32>().with_context(|| format!("bad class id {from:?}"))?,
            to.trim().parse::<u32>().with_context(|| format!("bad class id {to:?}"))?,
        ));
    }
    Ok(ClassRemap::from_pairs(&pairs))
}

fn cmd_baseline(cmd: &BaselineCmd) -> Result<()> {
    let settings = Settings::resolve(&cmd.common)?;
    ensure_out(&settings)?;
    let synthetic = cmd.input.demo || cmd.input.scene.is_some();
    let sample = load_sample(&cmd.input, &settings, None)?;
    let cfg = settings.grid_config()?;
    let img = build_range_image(&sample.cloud, &cfg, settings.row_mode())?;

    let mask = match &cmd.mask {
        Some(path) => {
            let (w, h) = sample.rgb.size();
            ClassGrid::from_data(w, h, load_labels(path)?)?
        }
        None if synthetic => {
            // The generator's own mask is exact by construction.
            render_class_mask(&synthetic_spec(&cmd.input)?, &synthetic_rig(&settings)?)?
        }
        None => bail!("file input needs --mask"),
    };

    let remap = match &cmd.remap {
        Some(spec) => parse_remap(spec)?,
        None => ClassRemap::identity(),
    };
    let pred = rgb_mask_lookup_baseline(&mask, &img, &sample.calib, &remap);

    let pred_path = settings.out.join(format!("{}_baseline.labels", sample.stem));
    save_labels(pred.data(), &pred_path)?;
    let overlay_path = settings.out.join(format!("{}_baseline.ppm", sample.stem));
    render_range_image(&img, RenderChannel::ClassOverlay(&pred), &overlay_path)?;
    println!("prediction={} overlay={}", pred_path.display(), overlay_path.display());

    if let Some(labels) = &sample.labels {
        let gt = range_class_grid(&img, labels)?;
        let eval_mask: Vec<bool> = pred.data().iter().map(|&c| c != NO_CLASS).collect();
        let report = compute_iou(&pred, &gt, &eval_mask)?;
        print_iou_report(&report, &settings.out)?;
    }
    Ok(())
}

fn cmd_bench(cmd: &BenchCmd) -> Result<()> {
    let settings = Settings::resolve(&cmd.common)?;
    ensure_out(&settings)?;
    let sample = load_sample(&cmd.input, &settings, None)?;
    let cfg = settings.grid_config()?;
    let counts: Vec<usize> = cmd
        .counts
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<usize>().with_context(|| format!("bad count {s:?}")))
        .collect::<Result<_>>()?;
    let rows = benchmark_control_points(
        &sample.cloud,
        &sample.rgb,
        &sample.calib,
        &cfg,
        settings.row_mode(),
        &counts,
        cmd.reps,
    )?;
    for row in &rows {
        match (row.median_ms, &row.note) {
            (Some(ms), _) => println!("k={} median_ms={ms:.3}", row.k),
            (None, Some(note)) => println!("k={} {note}", row.k),
            (None, None) => println!("k={} skipped", row.k),
        }
    }
    Ok(())
}

fn cmd_render(cmd: &RenderCmd) -> Result<()> {
    let settings = Settings::resolve(&cmd.common)?;
    ensure_out(&settings)?;
    let sample = load_sample(&cmd.input, &settings, None)?;
    let cfg = settings.grid_config()?;
    let img = build_range_image(&sample.cloud, &cfg, settings.row_mode())?;

    let path = match cmd.channel {
        ChannelArg::Range => {
            let p = settings.out.join(format!("{}_range.pgm", sample.stem));
            render_range_image(&img, RenderChannel::Range, &p)?;
            p
        }
        ChannelArg::Intensity => {
            let p = settings.out.join(format!("{}_intensity.pgm", sample.stem));
            render_range_image(&img, RenderChannel::Intensity, &p)?;
            p
        }
        ChannelArg::Validity => {
            let p = settings.out.join(format!("{}_validity.pgm", sample.stem));
            render_range_image(&img, RenderChannel::Validity, &p)?;
            p
        }
        ChannelArg::Classes => {
            let labels = sample
                .labels
                .as_ref()
                .context("--channel classes needs --labels (or a synthetic scene)")?;
            let classes = range_class_grid(&img, labels)?;
            let p = settings.out.join(format!("{}_classes.ppm", sample.stem));
            render_range_image(&img, RenderChannel::ClassOverlay(&classes), &p)?;
            p
        }
    };
    println!("channel={:?} file={}", cmd.channel, path.display());
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::RangeImage(cmd) => cmd_range_image(cmd),
        Command::Correspond(cmd) => cmd_correspond(cmd),
        Command::Warp(cmd) => cmd_warp(cmd),
        Command::Pipeline(cmd) => cmd_pipeline(cmd),
        Command::Eval(cmd) => cmd_eval(cmd),
        Command::Baseline(cmd) => cmd_baseline(cmd),
        Command::Bench(cmd) => cmd_bench(cmd),
        Command::Render(cmd) => cmd_render(cmd),
    }
}
