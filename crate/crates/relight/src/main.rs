//! Command-line surface: render, mask, normals, light sweeps, fitting and
//! self-checks. Exit codes: 0 ok, 1 usage error, 2 data error, 3 check
//! failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use relight::autodiff::forward_render;
use relight::checks;
use relight::geometry::{compute_normals, depth_to_points, DepthMap};
use relight::grid::Grid;
use relight::imgio;
use relight::losses;
use relight::optimizer::{fit, AdamParams, FitLoss, FitProblem, FreeParams};
use relight::pfm;
use relight::scene::SceneSpec;
use relight::shading::{ImagePlane, LightingParams};
use relight::shadow::{estimate_shadow_mask, LightDirection, ShadowConfig};
use relight::vec3::Vec3;
use relight::RelightError;

#[derive(Parser)]
#[command(name = "relight", version, about = "Relighting of 2.5D height fields with soft cast shadows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render the scene under the given lighting.
    Relight(RenderArgs),
    /// Write the soft shadow mask as a grayscale image.
    Mask(RenderArgs),
    /// Write the surface normal map (x, y, z → R, G, B).
    Normals(RenderArgs),
    /// Render a sequence of frames while rotating the light azimuth.
    Sweep(SweepArgs),
    /// Fit lighting and/or depth against a target image.
    Fit(FitArgs),
    /// Run the numerical self-checks (exit 3 if any fails).
    Check,
}

#[derive(Args)]
struct InputArgs {
    /// Depth map to load (1-channel PFM).
    #[arg(long, conflicts_with = "scene")]
    depth: Option<PathBuf>,
    /// Synthetic scene, e.g. flat:64, step:128,h=1, bump:128,sigma=0.3.
    #[arg(long)]
    scene: Option<String>,
    /// World units per pixel for --depth input (default 2/(width−1)).
    #[arg(long)]
    pixel_spacing: Option<f64>,
    /// Albedo image (PNG); default constant 0.65 gray.
    #[arg(long)]
    albedo: Option<PathBuf>,
    /// Light as azimuth,elevation in degrees (elevation from the image plane).
    #[arg(long, conflicts_with = "light_vec")]
    light: Option<String>,
    /// Light as a 3-vector x,y,z (normalized internally, z > 0).
    #[arg(long)]
    light_vec: Option<String>,
    /// Ambient intensity.
    #[arg(long, default_value_t = 0.5)]
    ambient: f64,
    /// Directional intensity.
    #[arg(long, default_value_t = 0.5)]
    directional: f64,
    /// Samples per shadow ray.
    #[arg(long, default_value_t = 160)]
    samples: usize,
    /// Start offset of the shadow walk in world units (default 2·spacing).
    #[arg(long)]
    start_offset: Option<f64>,
    /// Scale applied to ray distances inside the visibility sigmoid.
    #[arg(long)]
    distance_scale: Option<f64>,
}

#[derive(Args)]
struct RenderArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Output PNG path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Output directory for frames and manifest.json.
    #[arg(long)]
    out: PathBuf,
    /// Number of frames.
    #[arg(long, default_value_t = 8)]
    frames: usize,
    /// First azimuth (degrees).
    #[arg(long, default_value_t = 0.0)]
    azimuth_start: f64,
    /// Last azimuth (degrees); the range is sampled half-open.
    #[arg(long, default_value_t = 360.0)]
    azimuth_end: f64,
    /// Fixed elevation (degrees).
    #[arg(long, default_value_t = 45.0)]
    elevation: f64,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Target image: PNG or PFM by extension.
    #[arg(long)]
    target: PathBuf,
    /// Free parameters: comma list of depth, omega, ambient, directional.
    #[arg(long, default_value = "omega")]
    free: String,
    /// Iteration budget.
    #[arg(long, default_value_t = 2000)]
    iters: usize,
    /// Adam learning rate.
    #[arg(long, default_value_t = 1e-4)]
    lr: f64,
    /// Image objective: l1 or l2.
    #[arg(long, default_value = "l1")]
    fit_loss: String,
    /// Write a JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write the fitted depth map here (PFM).
    #[arg(long)]
    out_depth: Option<PathBuf>,
}

struct Inputs {
    depth: DepthMap,
    albedo: ImagePlane,
    lighting: LightingParams,
    cfg: ShadowConfig,
}

fn usage(msg: String) -> RelightError {
    RelightError::InvalidInput(msg)
}

fn parse_pair(s: &str, what: &str) -> Result<(f64, f64), RelightError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(usage(format!("{what} expects two comma-separated numbers, got '{s}'")));
    }
    let a = parts[0].trim().parse().map_err(|_| usage(format!("bad number in {what}: '{s}'")))?;
    let b = parts[1].trim().parse().map_err(|_| usage(format!("bad number in {what}: '{s}'")))?;
    Ok((a, b))
}

fn parse_light(input: &InputArgs) -> Result<LightDirection, RelightError> {
    if let Some(v) = &input.light_vec {
        let parts: Vec<&str> = v.split(',').collect();
        if parts.len() != 3 {
            return Err(usage(format!("--light-vec expects x,y,z, got '{v}'")));
        }
        let mut xyz = [0.0f64; 3];
        for (dst, p) in xyz.iter_mut().zip(&parts) {
            *dst = p.trim().parse().map_err(|_| usage(format!("bad number in --light-vec: '{v}'")))?;
        }
        let u = Vec3::new(xyz[0], xyz[1], xyz[2])
            .normalized()
            .ok_or_else(|| usage("--light-vec must be nonzero".into()))?;
        return LightDirection::new(u);
    }
    let (az, el) = match &input.light {
        Some(s) => parse_pair(s, "--light")?,
        None => (0.0, 45.0),
    };
    LightDirection::from_azimuth_elevation(az, el)
}

fn load_depth(input: &InputArgs) -> Result<DepthMap, RelightError> {
    match (&input.depth, &input.scene) {
        (Some(path), None) => {
            let img = pfm::read(path)?;
            if img.channels != 1 {
                return Err(RelightError::Pfm(format!(
                    "{}: expected 1-channel depth, got {} channels",
                    path.display(),
                    img.channels
                )));
            }
            let mut values = Grid::new(img.width, img.height, 0.0);
            for (dst, &src) in values.data_mut().iter_mut().zip(&img.data) {
                *dst = src as f64;
            }
            let spacing = input
                .pixel_spacing
                .unwrap_or(2.0 / (img.width.max(2) - 1) as f64);
            DepthMap::from_values(values, spacing)
        }
        (None, Some(spec)) => {
            let mut spec = SceneSpec::parse(spec)?;
            if let Some(s) = input.pixel_spacing {
                spec.pixel_spacing = s;
            }
            spec.build()
        }
        (None, None) => Err(usage("one of --depth or --scene is required".into())),
        (Some(_), Some(_)) => unreachable!("clap conflict"),
    }
}

fn load_inputs(input: &InputArgs) -> Result<Inputs, RelightError> {
    let depth = load_depth(input)?;
    let albedo = match &input.albedo {
        Some(path) => {
            let img = imgio::read_png(path)?;
            if img.width() != depth.width() || img.height() != depth.height() {
                return Err(RelightError::DimensionMismatch(format!(
                    "albedo {}x{} vs depth {}x{}",
                    img.width(),
                    img.height(),
                    depth.width(),
                    depth.height()
                )));
            }
            if img.channels() == 3 {
                img
            } else {
                let mut rgb = ImagePlane::new(img.width(), img.height(), 3);
                for i in 0..img.height() {
                    for j in 0..img.width() {
                        for c in 0..3 {
                            rgb.set(i, j, c, img.get(i, j, 0));
                        }
                    }
                }
                rgb
            }
        }
        None => ImagePlane::constant(depth.width(), depth.height(), 3, 0.65),
    };
    let lighting = LightingParams::new(parse_light(input)?, input.ambient, input.directional)?;
    let mut cfg = ShadowConfig { samples: input.samples, ..ShadowConfig::default() };
    cfg.start_offset = input.start_offset;
    if let Some(ds) = input.distance_scale {
        cfg.distance_scale = ds;
    }
    cfg.validate()?;
    Ok(Inputs { depth, albedo, lighting, cfg })
}

/// PNG (sRGB) or, when the extension is .pfm, lossless float output.
fn write_image(path: &Path, img: &ImagePlane) -> Result<(), RelightError> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("pfm") => pfm::write(path, &pfm::PfmImage::from_plane(img)?),
        _ => imgio::write_png(path, img),
    }
}

fn cmd_relight(args: &RenderArgs) -> Result<(), RelightError> {
    let inp = load_inputs(&args.input)?;
    let image = forward_render(&inp.depth, &inp.albedo, &inp.lighting, &inp.cfg)?;
    write_image(&args.out, &image)
}

fn cmd_mask(args: &RenderArgs) -> Result<(), RelightError> {
    let inp = load_inputs(&args.input)?;
    let mask = estimate_shadow_mask(&inp.depth, inp.lighting.omega, &inp.cfg);
    let mut img = ImagePlane::new(inp.depth.width(), inp.depth.height(), 1);
    for (dst, &src) in img.data_mut().iter_mut().zip(mask.values.data()) {
        *dst = src;
    }
    write_image(&args.out, &img)
}

fn cmd_normals(args: &RenderArgs) -> Result<(), RelightError> {
    let inp = load_inputs(&args.input)?;
    let points = depth_to_points(&inp.depth);
    let normals = compute_normals(&points, &inp.depth.valid);
    let mut img = ImagePlane::new(inp.depth.width(), inp.depth.height(), 3);
    for i in 0..inp.depth.height() {
        for j in 0..inp.depth.width() {
            let n = normals.normals.at(i, j);
            img.set(i, j, 0, (n.x + 1.0) / 2.0);
            img.set(i, j, 1, (n.y + 1.0) / 2.0);
            img.set(i, j, 2, (n.z + 1.0) / 2.0);
        }
    }
    imgio::write_png_linear(&args.out, &img)
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), RelightError> {
    if args.frames == 0 {
        return Err(usage("--frames must be at least 1".into()));
    }
    let inp = load_inputs(&args.input)?;
    std::fs::create_dir_all(&args.out)?;
    let mut manifest = Vec::new();
    for frame in 0..args.frames {
        let az = args.azimuth_start
            + (args.azimuth_end - args.azimuth_start) * frame as f64 / args.frames as f64;
        let omega = LightDirection::from_azimuth_elevation(az, args.elevation)?;
        let lighting = LightingParams::new(omega, inp.lighting.ambient, inp.lighting.directional)?;
        let image = forward_render(&inp.depth, &inp.albedo, &lighting, &inp.cfg)?;
        let name = format!("frame_{frame:04}.png");
        imgio::write_png(&args.out.join(&name), &image)?;
        let v = omega.as_vec();
        manifest.push(serde_json::json!({
            "frame": frame,
            "azimuth_deg": az,
            "elevation_deg": args.elevation,
            "light_vec": [v.x, v.y, v.z],
        }));
    }
    let json = serde_json::to_string_pretty(&serde_json::Value::Array(manifest))
        .expect("manifest serializes");
    std::fs::write(args.out.join("manifest.json"), json + "\n")?;
    Ok(())
}

fn load_target(path: &Path) -> Result<ImagePlane, RelightError> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("pfm") => Ok(pfm::read(path)?.to_plane()),
        _ => imgio::read_png(path),
    }
}

fn cmd_fit(args: &FitArgs) -> Result<(), RelightError> {
    let inp = load_inputs(&args.input)?;
    let target = load_target(&args.target)?;
    let mut free = FreeParams::default();
    for part in args.free.split(',') {
        match part.trim() {
            "depth" => free.depth = true,
            "omega" => free.omega = true,
            "ambient" => free.ambient = true,
            "directional" => free.directional = true,
            other => return Err(usage(format!("unknown free parameter '{other}'"))),
        }
    }
    let loss = match args.fit_loss.as_str() {
        "l1" => FitLoss::ReconL1,
        "l2" => FitLoss::ReconL2,
        other => return Err(usage(format!("unknown fit loss '{other}'"))),
    };
    let problem = FitProblem {
        target,
        depth: inp.depth,
        albedo: inp.albedo,
        lighting: inp.lighting,
        cfg: inp.cfg,
        free,
        loss,
        iters: args.iters,
        adam: AdamParams { lr: args.lr, ..AdamParams::default() },
        tol: 0.0,
    };
    let result = fit(&problem)?;
    let omega = result.lighting.omega.as_vec();
    let (first, last) = (result.trace.first().copied(), result.trace.last().copied());
    println!(
        "fit: {} iterations, loss {:?} -> {:?}",
        result.iterations, first, last
    );
    println!(
        "  omega = ({:.6}, {:.6}, {:.6}), ambient = {:.6}, directional = {:.6}",
        omega.x, omega.y, omega.z, result.lighting.ambient, result.lighting.directional
    );
    if let Some(path) = &args.report {
        let report = serde_json::json!({
            "iterations": result.iterations,
            "converged": result.converged,
            "initial_loss": first,
            "final_loss": last,
            "omega": [omega.x, omega.y, omega.z],
            "ambient": result.lighting.ambient,
            "directional": result.lighting.directional,
        });
        std::fs::write(path, serde_json::to_string_pretty(&report).expect("report serializes") + "\n")?;
    }
    if let Some(path) = &args.out_depth {
        let plane = {
            let mut img = ImagePlane::new(result.depth.width(), result.depth.height(), 1);
            for (dst, &src) in img.data_mut().iter_mut().zip(result.depth.values.data()) {
                *dst = src;
            }
            img
        };
        pfm::write(path, &pfm::PfmImage::from_plane(&plane)?)?;
    }
    // Keep the loss module exercised end to end: report the final L2 as well.
    let final_render = forward_render(&result.depth, &problem.albedo, &result.lighting, &problem.cfg)?;
    let l2 = losses::recon_loss(&final_render, &problem.target, &result.depth.valid)?;
    println!("  final masked MSE = {l2:.3e}");
    Ok(())
}

fn cmd_check() -> ExitCode {
    let results = checks::run_all();
    let mut all = true;
    for r in &results {
        println!(
            "[{}] {} ({:.2}s): {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.elapsed_s,
            r.detail
        );
        all &= r.passed;
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are not usage errors.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Relight(args) => cmd_relight(args),
        Command::Mask(args) => cmd_mask(args),
        Command::Normals(args) => cmd_normals(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Fit(args) => cmd_fit(args),
        Command::Check => return cmd_check(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ RelightError::InvalidInput(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
