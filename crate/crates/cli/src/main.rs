//! Command-line driver: segmentation (unsupervised or seeded), inpainting,
//! MPS export and the graph-cut comparison, with key/value and JSON reports.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use curvcomplex::energy::{
    data_cost_histogram, data_cost_unsupervised, unsupervised_means, DataCost, EnergyParams,
    WeightMode,
};
use curvcomplex::inpaint::{inpaint, InpaintOptions};
use curvcomplex::mincut::segment_length_mincut;
use curvcomplex::model::{build_curvature_model, build_length_model};
use curvcomplex::mps::write_mps_file;
use curvcomplex::optimize::{labels_to_image, segment, CrossingPolicy, SegmentOptions};
use curvcomplex::raster::{read_pnm, write_pgm, GrayImage, Pnm, RgbImage, SeedMask};
use curvcomplex::simplex::solve_model;
use curvcomplex::{build_complex, Connectivity};
use std::path::PathBuf;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "curvcomplex", about = "Segmentation and inpainting with curvature regularization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Unsupervised two-phase segmentation of a grayscale image.
    SegmentUnsup(SegmentUnsupArgs),
    /// Seeded segmentation of a color image with histogram data costs.
    SegmentSeeds(SegmentSeedsArgs),
    /// Fill damaged pixels guided by coherence directions.
    Inpaint(InpaintArgs),
    /// Write the linear program as a fixed-format MPS file without solving.
    ExportLp(ExportLpArgs),
    /// Solve the length-only model by LP and by max-flow and compare.
    CompareMincut(CompareMincutArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightsArg {
    Angle,
    Bruckstein,
}

#[derive(Clone, Copy, ValueEnum)]
enum CrossingsArg {
    Off,
    Lazy,
    Eager,
}

#[derive(Args)]
struct EnergyArgs {
    /// Pixel subdivision: 8 (4 faces/pixel) or 16 (32 faces/pixel).
    #[arg(long)]
    connectivity: Option<u8>,
    /// Length weight.
    #[arg(long)]
    nu: Option<f64>,
    /// Curvature weight.
    #[arg(long)]
    lambda: Option<f64>,
    /// Curvature exponent.
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Curvature weight scheme.
    #[arg(long, value_enum, default_value_t = WeightsArg::Angle)]
    weights: WeightsArg,
}

impl EnergyArgs {
    /// Resolves the preset defaults of a subcommand.
    fn resolve(&self, def_conn: u8, def_nu: f64, def_lambda: f64) -> Result<(Connectivity, EnergyParams)> {
        let connectivity = match self.connectivity.unwrap_or(def_conn) {
            8 => Connectivity::Conn8,
            16 => Connectivity::Conn16,
            other => bail!("unsupported connectivity {other}, want 8 or 16"),
        };
        let mode = match self.weights {
            WeightsArg::Angle => WeightMode::AnglePower,
            WeightsArg::Bruckstein => WeightMode::Bruckstein,
        };
        let params = EnergyParams::new(
            self.nu.unwrap_or(def_nu),
            self.lambda.unwrap_or(def_lambda),
            self.p,
            mode,
        )?;
        Ok((connectivity, params))
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Crossing-prevention handling.
    #[arg(long, value_enum, default_value_t = CrossingsArg::Lazy)]
    crossings: CrossingsArg,
    /// Foreground threshold on the relaxed region variables.
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    /// Also write the assembled model as a fixed-format MPS file.
    #[arg(long)]
    export_mps: Option<PathBuf>,
    /// Write the JSON report here (key/value always goes to stdout).
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct SegmentUnsupArgs {
    /// Input grayscale image (binary PGM).
    #[arg(long)]
    image: PathBuf,
    /// Output segmentation mask (binary PGM).
    #[arg(long)]
    output: PathBuf,
    #[command(flatten)]
    energy: EnergyArgs,
    #[command(flatten)]
    solve: SolveArgs,
}

#[derive(Args)]
struct SegmentSeedsArgs {
    /// Input image (binary PPM; a PGM is promoted to gray color).
    #[arg(long)]
    image: PathBuf,
    /// Seed mask (binary PGM; 0 = none, 1 = background, 2 = foreground).
    #[arg(long)]
    seeds: PathBuf,
    /// Output segmentation mask (binary PGM).
    #[arg(long)]
    output: PathBuf,
    /// Histogram bins per color channel.
    #[arg(long, default_value_t = 16)]
    bins: usize,
    /// Gaussian histogram smoothing (bins; 0 disables).
    #[arg(long, default_value_t = 1.0)]
    hist_smoothing: f64,
    #[command(flatten)]
    energy: EnergyArgs,
    #[command(flatten)]
    solve: SolveArgs,
}

#[derive(Args)]
struct InpaintArgs {
    /// Input grayscale image (binary PGM).
    #[arg(long)]
    image: PathBuf,
    /// Damage mask (binary PGM; nonzero = damaged).
    #[arg(long)]
    mask: PathBuf,
    /// Output grayscale image (binary PGM).
    #[arg(long)]
    output: PathBuf,
    /// Gradient pre-smoothing scale.
    #[arg(long, default_value_t = 1.5)]
    sigma: f64,
    /// Structure-tensor smoothing scale.
    #[arg(long, default_value_t = 4.0)]
    rho: f64,
    #[command(flatten)]
    energy: EnergyArgs,
    /// Write the JSON report here (key/value always goes to stdout).
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Length,
    Curvature,
}

#[derive(Args)]
struct ExportLpArgs {
    /// Input grayscale image (binary PGM).
    #[arg(long)]
    image: PathBuf,
    /// Output MPS path.
    #[arg(long)]
    output: PathBuf,
    /// Which program to export.
    #[arg(long, value_enum, default_value_t = ModelArg::Curvature)]
    model: ModelArg,
    /// Include all crossing-prevention rows (curvature model only).
    #[arg(long)]
    crossings: bool,
    #[command(flatten)]
    energy: EnergyArgs,
}

#[derive(Args)]
struct CompareMincutArgs {
    /// Input grayscale image (binary PGM).
    #[arg(long)]
    image: PathBuf,
    /// Optional output mask from the cut labeling (binary PGM).
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    energy: EnergyArgs,
    /// Write the JSON report here (key/value always goes to stdout).
    #[arg(long)]
    report: Option<PathBuf>,
}

fn iteration_cap() -> Result<u64> {
    match std::env::var("CURVCOMPLEX_ITER_CAP") {
        Ok(v) => v
            .parse()
            .with_context(|| format!("CURVCOMPLEX_ITER_CAP={v} is not a pivot count")),
        Err(_) => Ok(10_000_000),
    }
}

fn read_gray(path: &PathBuf) -> Result<GrayImage> {
    Ok(read_pnm(path)
        .with_context(|| format!("reading {}", path.display()))?
        .into_gray()?)
}

fn gray_to_rgb(g: &GrayImage) -> RgbImage {
    RgbImage {
        width: g.width,
        height: g.height,
        data: g.data.iter().map(|&v| [v, v, v]).collect(),
    }
}

fn crossings_of(arg: CrossingsArg) -> CrossingPolicy {
    match arg {
        CrossingsArg::Off => CrossingPolicy::Off,
        CrossingsArg::Lazy => CrossingPolicy::Lazy,
        CrossingsArg::Eager => CrossingPolicy::Eager,
    }
}

fn weights_name(w: WeightsArg) -> &'static str {
    match w {
        WeightsArg::Angle => "angle",
        WeightsArg::Bruckstein => "bruckstein",
    }
}

fn crossings_name(c: CrossingsArg) -> &'static str {
    match c {
        CrossingsArg::Off => "off",
        CrossingsArg::Lazy => "lazy",
        CrossingsArg::Eager => "eager",
    }
}

/// Prints the report as `key value` lines and optionally writes it as JSON.
fn emit_report(report: &serde_json::Value, path: Option<&PathBuf>) -> Result<()> {
    let obj = report.as_object().expect("report is an object");
    for (k, v) in obj {
        match v {
            serde_json::Value::String(s) => println!("{k} {s}"),
            other => println!("{k} {other}"),
        }
    }
    if let Some(path) = path {
        std::fs::write(path, format!("{}\n", serde_json::to_string_pretty(report)?))
            .with_context(|| format!("writing report {}", path.display()))?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_segment(
    command: &str,
    image_dims: (usize, usize),
    data_cost: &DataCost,
    seeds: Option<&SeedMask>,
    connectivity: Connectivity,
    params: EnergyParams,
    energy_args: &EnergyArgs,
    solve_args: &SolveArgs,
    output: &PathBuf,
) -> Result<()> {
    let start = Instant::now();
    let complex = build_complex(image_dims.0, image_dims.1, connectivity)?;
    let mut opts = SegmentOptions::new(params);
    opts.crossings = crossings_of(solve_args.crossings);
    opts.threshold = solve_args.threshold;
    opts.iteration_cap = iteration_cap()?;
    if let Some(path) = &solve_args.export_mps {
        let eager = opts.crossings == CrossingPolicy::Eager;
        let (mut model, var_map) = build_curvature_model(&complex, data_cost, &params, eager);
        if let Some(mask) = seeds {
            curvcomplex::model::fix_seeds(&mut model, &var_map, &complex, mask)?;
        }
        write_mps_file(&model, "CURVSEG", path)?;
    }
    let res = segment(&complex, data_cost, seeds, &opts)?;
    write_pgm(&labels_to_image(&complex, &res.labels), output)
        .with_context(|| format!("writing {}", output.display()))?;
    let report = serde_json::json!({
        "command": command,
        "connectivity": if connectivity == Connectivity::Conn8 { 8 } else { 16 },
        "nu": params.nu,
        "lambda": params.lambda,
        "p": params.p,
        "weights": weights_name(energy_args.weights),
        "crossings": crossings_name(solve_args.crossings),
        "threshold": solve_args.threshold,
        "objective": res.energy + data_cost.constant_offset,
        "energy": res.energy,
        "data_energy": res.data_energy,
        "length_energy": res.length_energy,
        "curvature_energy": res.curvature_energy,
        "lower_bound": res.lower_bound,
        "relative_gap": res.relative_gap,
        "crossing_passes": res.crossing_passes,
        "fractional_count": res.fractional_count,
        "lp_iterations": res.lp_iterations,
        "wall_time_seconds": start.elapsed().as_secs_f64(),
    });
    emit_report(&report, solve_args.report.as_ref())
}

fn cmd_segment_unsup(args: &SegmentUnsupArgs) -> Result<()> {
    let (connectivity, params) = args.energy.resolve(8, 10.0, 1000.0)?;
    let image = read_gray(&args.image)?;
    let complex = build_complex(image.width, image.height, connectivity)?;
    let (mu0, mu1) = unsupervised_means(&image)?;
    let dc = data_cost_unsupervised(&image, mu0, mu1, &complex)?;
    run_segment(
        "segment-unsup",
        (image.width, image.height),
        &dc,
        None,
        connectivity,
        params,
        &args.energy,
        &args.solve,
        &args.output,
    )
}

fn cmd_segment_seeds(args: &SegmentSeedsArgs) -> Result<()> {
    let (connectivity, params) = args.energy.resolve(16, 0.2, 4.0)?;
    let image = match read_pnm(&args.image)? {
        Pnm::Rgb(c) => c,
        Pnm::Gray(g) => gray_to_rgb(&g),
    };
    let seeds = SeedMask::from_image(&read_gray(&args.seeds)?)?;
    let complex = build_complex(image.width, image.height, connectivity)?;
    let dc = data_cost_histogram(&image, &seeds, args.bins, args.hist_smoothing, &complex)?;
    run_segment(
        "segment-seeds",
        (image.width, image.height),
        &dc,
        Some(&seeds),
        connectivity,
        params,
        &args.energy,
        &args.solve,
        &args.output,
    )
}

fn cmd_inpaint(args: &InpaintArgs) -> Result<()> {
    let start = Instant::now();
    let (connectivity, params) = args.energy.resolve(8, 0.2, 4.0)?;
    let image = read_gray(&args.image)?;
    let mask = read_gray(&args.mask)?;
    let mut opts = InpaintOptions::new(params);
    opts.sigma = args.sigma;
    opts.rho = args.rho;
    opts.iteration_cap = iteration_cap()?;
    let res = inpaint(&image, &mask, connectivity, &opts)?;
    write_pgm(&res.image, &args.output)
        .with_context(|| format!("writing {}", args.output.display()))?;
    let energy: f64 = res.fills.iter().map(|f| f.energy).sum();
    let lower: f64 = res.fills.iter().map(|f| f.lower_bound).sum();
    let gap = ((energy - lower) / energy.abs().max(1e-12)).max(0.0);
    let report = serde_json::json!({
        "command": "inpaint",
        "connectivity": if connectivity == Connectivity::Conn8 { 8 } else { 16 },
        "nu": params.nu,
        "lambda": params.lambda,
        "p": params.p,
        "weights": weights_name(args.energy.weights),
        "crossings": "eager",
        "sigma": args.sigma,
        "rho": args.rho,
        "components": res.components.len(),
        "objective": energy,
        "lower_bound": lower,
        "relative_gap": gap,
        "crossing_passes": 0,
        "fractional_count": res.fills.iter().map(|f| f.fractional_count).sum::<usize>(),
        "lp_iterations": res.fills.iter().map(|f| f.lp_iterations).sum::<u64>(),
        "wall_time_seconds": start.elapsed().as_secs_f64(),
    });
    emit_report(&report, args.report.as_ref())
}

fn cmd_export_lp(args: &ExportLpArgs) -> Result<()> {
    let (connectivity, params) = args.energy.resolve(8, 10.0, 1000.0)?;
    let image = read_gray(&args.image)?;
    let complex = build_complex(image.width, image.height, connectivity)?;
    let (mu0, mu1) = unsupervised_means(&image)?;
    let dc = data_cost_unsupervised(&image, mu0, mu1, &complex)?;
    let model = match args.model {
        ModelArg::Length => build_length_model(&complex, &dc, params.nu).0,
        ModelArg::Curvature => build_curvature_model(&complex, &dc, &params, args.crossings).0,
    };
    write_mps_file(&model, "CURVSEG", &args.output)?;
    println!("variables {}", model.num_vars());
    println!("rows {}", model.num_rows());
    Ok(())
}

fn cmd_compare_mincut(args: &CompareMincutArgs) -> Result<()> {
    let start = Instant::now();
    let (connectivity, params) = args.energy.resolve(8, 10.0, 0.0)?;
    let image = read_gray(&args.image)?;
    let complex = build_complex(image.width, image.height, connectivity)?;
    let (mu0, mu1) = unsupervised_means(&image)?;
    let dc = data_cost_unsupervised(&image, mu0, mu1, &complex)?;
    let (labels, cut_objective) = segment_length_mincut(&complex, &dc, params.nu)?;
    let (model, _) = build_length_model(&complex, &dc, params.nu);
    let lp = solve_model(&model)?;
    if let Some(path) = &args.output {
        write_pgm(&labels_to_image(&complex, &labels), path)?;
    }
    let report = serde_json::json!({
        "command": "compare-mincut",
        "connectivity": if connectivity == Connectivity::Conn8 { 8 } else { 16 },
        "nu": params.nu,
        "objective": cut_objective + dc.constant_offset,
        "cut_objective": cut_objective,
        "lp_objective": lp.objective,
        "difference": (lp.objective - cut_objective).abs(),
        "lower_bound": lp.objective,
        "relative_gap": 0.0,
        "crossing_passes": 0,
        "fractional_count": 0,
        "lp_iterations": lp.iterations,
        "wall_time_seconds": start.elapsed().as_secs_f64(),
    });
    emit_report(&report, args.report.as_ref())
}

fn main() -> Result<()> {
    match &Cli::parse().command {
        Command::SegmentUnsup(args) => cmd_segment_unsup(args),
        Command::SegmentSeeds(args) => cmd_segment_seeds(args),
        Command::Inpaint(args) => cmd_inpaint(args),
        Command::ExportLp(args) => cmd_export_lp(args),
        Command::CompareMincut(args) => cmd_compare_mincut(args),
    }
}
