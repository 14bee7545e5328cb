//! Command-line front end.
//!
//! Exit codes: 0 pass, 1 property failure, 2 input error, 3 geometry error,
//! 4 seam failure. `INFCANVAS_THREADS` caps the worker count.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{self, redundancy, stationarity, taint};
use crate::error::{Error, Result};
use crate::geometry::{self, backward_stack, forward_stack};
use crate::layers::{ActivationKind, LayerSpec};
use crate::network::{self, Generator, NetworkSpec};
use crate::png_out::{self, PngSink};
use crate::report::{self, Report};
use crate::tensor::Rect;
use crate::tiling::{self, BandSink, TilingMode};
use crate::weights::WeightStore;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_PROPERTY: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_GEOMETRY: i32 = 3;
pub const EXIT_SEAM: i32 = 4;

pub const THREADS_ENV: &str = "INFCANVAS_THREADS";

#[derive(Debug, Parser)]
#[command(name = "infcanvas", version, about = "Consistent generators for unbounded images")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate one image from a latent rect.
    Generate(GenerateArgs),
    /// Generate a large image tile by tile.
    GenerateTiled(TiledArgs),
    /// Run a property suite; exits 1 on failure.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Emit analysis reports.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Write random weights for a network to an `.igw` file.
    InitWeights(InitWeightsArgs),
    /// Write a network spec as TOML.
    ExportSpec(ExportSpecArgs),
}

/// Network selection shared by every command that runs a generator.
#[derive(Debug, Clone, Args)]
pub struct NetArgs {
    /// Built-in name (g0, g0-small, upscaler, bilinear, tanh, padded-k<K>) or
    /// a TOML spec file.
    #[arg(long, default_value = "g0")]
    pub net: String,
    /// Replace the unpadded convolution at this layer index by a zero-padded
    /// one.
    #[arg(long)]
    pub zero_pad_layer: Option<usize>,
    /// Weight file; without it, `--random-init` is required.
    #[arg(long, conflicts_with = "random_init")]
    pub weights: Option<PathBuf>,
    /// Draw random weights from `--weight-seed` (default: `--seed`).
    #[arg(long)]
    pub random_init: bool,
    #[arg(long)]
    pub weight_seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub net: NetArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Latent size `HxW`.
    #[arg(long)]
    pub latent: Size,
    /// Latent top-left corner `ROW,COL`.
    #[arg(long, default_value = "0,0")]
    pub origin: Point,
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Consistent,
    InconsistentCrop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OrderArg {
    Sorted,
    Shuffled,
}

#[derive(Debug, Args)]
pub struct TiledArgs {
    #[command(flatten)]
    pub net: NetArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub width: usize,
    #[arg(long)]
    pub height: usize,
    /// Image top-left corner `ROW,COL`.
    #[arg(long, default_value = "0,0")]
    pub origin: Point,
    /// Largest tile side in image pixels.
    #[arg(long, default_value_t = 64)]
    pub budget: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Consistent)]
    pub mode: ModeArg,
    /// Upsampling blocks of the crop-mode network (used when `--net` is left
    /// at its default).
    #[arg(long, default_value_t = 3)]
    pub blocks: u32,
    #[arg(long, value_enum, default_value_t = OrderArg::Sorted)]
    pub order: OrderArg,
    /// Seed of the shuffled order (default: `--seed`).
    #[arg(long)]
    pub order_seed: Option<u64>,
    /// Regenerate 2-pixel strips across every seam and require exact
    /// agreement.
    #[arg(long)]
    pub verify_seams: bool,
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// Sub-patch generation equals the crop of a larger generation.
    Consistency {
        #[command(flatten)]
        net: NetArgs,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Moments are invariant under the claimed period.
    Stationarity(StationarityArgs),
    /// Rect algebra agrees with the dependency tracer.
    Geometry {
        #[arg(long, default_value = "g0")]
        net: String,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Crop-and-stitch redundancy for one budget and block count.
    Redundancy {
        #[arg(long)]
        budget: u64,
        #[arg(long)]
        blocks: u32,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct StationarityArgs {
    #[command(flatten)]
    pub net: NetArgs,
    /// Claimed period `HxW` (default: the network's stationarity period).
    #[arg(long)]
    pub period: Option<Size>,
    #[arg(long, default_value = "2x4")]
    pub probe: Size,
    #[arg(long, default_value = "0,0")]
    pub probe_origin: Point,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Non-period shift `ROW,COL` for the detection probe.
    #[arg(long)]
    pub detect_shift: Option<Point>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeCommand {
    /// Redundancy fractions over a grid of budgets and block counts.
    Redundancy {
        /// Budgets, e.g. `4096` or `64,128,4096`.
        #[arg(long, default_value = "4096")]
        budget: IntList,
        /// Block counts, e.g. `6..10` (inclusive) or `2,3`.
        #[arg(long, default_value = "6..10")]
        blocks: IntList,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Padding-taint map of the crop-mode network as a PNG mask.
    Taint {
        #[arg(long)]
        blocks: u32,
        #[arg(long, default_value = "4x4")]
        latent: Size,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Stationarity report (exit 0 whatever the verdict).
    Stationarity(StationarityArgs),
    /// Geometry summary of a network.
    Geometry {
        #[arg(long, default_value = "g0")]
        net: String,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct InitWeightsArgs {
    #[arg(long, default_value = "g0")]
    pub net: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExportSpecArgs {
    #[arg(long, default_value = "g0")]
    pub net: String,
    #[arg(short, long)]
    pub output: PathBuf,
}

/// `HxW`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Size(pub usize, pub usize);

impl FromStr for Size {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Size, String> {
        let (h, w) = s.split_once('x').ok_or_else(|| format!("expected HxW, got `{s}`"))?;
        let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("`{v}`: {e}"));
        Ok(Size(parse(h)?, parse(w)?))
    }
}

/// `ROW,COL`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Point(pub i64, pub i64);

impl FromStr for Point {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Point, String> {
        let (r, c) = s.split_once(',').ok_or_else(|| format!("expected ROW,COL, got `{s}`"))?;
        let parse = |v: &str| v.trim().parse::<i64>().map_err(|e| format!("`{v}`: {e}"));
        Ok(Point(parse(r)?, parse(c)?))
    }
}

/// `a..b` (inclusive) or a comma-separated list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntList(pub Vec<u64>);

impl FromStr for IntList {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<IntList, String> {
        let parse = |v: &str| v.trim().parse::<u64>().map_err(|e| format!("`{v}`: {e}"));
        if let Some((a, b)) = s.split_once("..") {
            let (a, b) = (parse(a)?, parse(b)?);
            if a > b {
                return Err(format!("empty range `{s}`"));
            }
            return Ok(IntList((a..=b).collect()));
        }
        s.split(',').map(parse).collect::<std::result::Result<_, _>>().map(IntList)
    }
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Underflow { .. } | Error::Containment { .. } | Error::Planning(_) | Error::Inconsistent { .. } => {
            EXIT_GEOMETRY
        }
        _ => EXIT_INPUT,
    }
}

/// Resolves a built-in network name or a TOML spec path.
pub fn resolve_net(name: &str) -> Result<NetworkSpec> {
    let single = |layer: LayerSpec, label: &str| NetworkSpec {
        name: label.into(),
        input_channels: 1,
        layers: vec![layer],
        head: None,
    };
    match name {
        "g0" => Ok(network::reference_g0()),
        "g0-small" => Ok(network::g0_with_widths(8, 4)),
        "upscaler" => Ok(network::reference_upscaler()),
        "bilinear" => Ok(single(LayerSpec::BilinearUpCrop, "bilinear")),
        "tanh" => Ok(single(
            LayerSpec::Activation {
                function: ActivationKind::Tanh,
            },
            "tanh",
        )),
        _ => {
            if let Some(k) = name.strip_prefix("padded-k") {
                let blocks = k
                    .parse::<u32>()
                    .ok()
                    .filter(|&b| (1..=12).contains(&b))
                    .ok_or_else(|| Error::Parameter(format!("bad block count in `{name}`")))?;
                return Ok(network::padded_nearest_stack(blocks, 4, 16));
            }
            let path = Path::new(name);
            if path.extension().is_some_and(|e| e == "toml") {
                return NetworkSpec::load(path);
            }
            Err(Error::Parameter(format!(
                "unknown network `{name}` (built-ins: g0, g0-small, upscaler, bilinear, tanh, padded-k<K>; or a .toml file)"
            )))
        }
    }
}

fn build_generator(args: &NetArgs, seed: u64) -> Result<Generator> {
    let mut spec = resolve_net(&args.net)?;
    if let Some(k) = args.zero_pad_layer {
        spec = spec.with_zero_padding_at(k)?;
    }
    match (&args.weights, args.random_init) {
        (Some(path), _) => Generator::from_store(spec, &WeightStore::load(path)?),
        (None, true) => Generator::random(spec, args.weight_seed.unwrap_or(seed)),
        (None, false) => Err(Error::Parameter("give --weights FILE or --random-init".into())),
    }
}

fn emit(out: &mut dyn Write, report: &Report, path: Option<&Path>) -> Result<()> {
    write!(out, "{report}")?;
    if let Some(p) = path {
        report.save(p)?;
    }
    Ok(())
}

fn cmd_generate(a: &GenerateArgs, out: &mut dyn Write) -> Result<i32> {
    let gen = build_generator(&a.net, a.seed)?;
    let latent = Rect::with_size(a.origin.0, a.origin.1, a.latent.0, a.latent.1)?;
    let image = gen.generate(a.seed, latent)?.into_output();
    png_out::write_png(&a.output, &image)?;
    let mut r = Report::new("generate");
    r.field("network", &gen.spec().name)
        .field("seed", a.seed)
        .field("latent", latent)
        .field("image", image.anchor())
        .field("channels", image.channels());
    if gen.spec().is_consistent() {
        r.merge("geometry", &report::geometry_report(&gen.spec().name, &geometry::summarize(gen.spec())?));
    }
    emit(out, &r, a.report.as_deref())?;
    Ok(EXIT_PASS)
}

/// Writes bands to the PNG and keeps a copy for seam checks.
struct Tee<'a> {
    png: &'a mut PngSink,
    mem: tiling::MemorySink,
}

impl BandSink for Tee<'_> {
    fn write_band(&mut self, band: &crate::tensor::Tensor3) -> Result<()> {
        self.png.write_band(band)?;
        self.mem.write_band(band)
    }
}

fn cmd_generate_tiled(a: &TiledArgs, out: &mut dyn Write) -> Result<i32> {
    let mut net_args = a.net.clone();
    if a.mode == ModeArg::InconsistentCrop && net_args.net == "g0" {
        net_args.net = format!("padded-k{}", a.blocks);
    }
    let gen = build_generator(&net_args, a.seed)?;
    let target = Rect::with_size(a.origin.0, a.origin.1, a.height, a.width)?;
    let plan = match a.mode {
        ModeArg::Consistent => tiling::plan(gen.spec(), target, a.budget)?,
        ModeArg::InconsistentCrop => tiling::plan_inconsistent(gen.spec(), target, a.budget)?,
    };
    let order = match a.order {
        OrderArg::Sorted => (0..plan.tiles.len()).collect(),
        OrderArg::Shuffled => tiling::shuffled_order(plan.tiles.len(), a.order_seed.unwrap_or(a.seed)),
    };
    let channels = gen.spec().output_channels();
    let mut png = PngSink::create(&a.output, target, channels)?;
    let mut code = EXIT_PASS;
    let mut stitch;
    if a.verify_seams {
        if plan.mode != TilingMode::Consistent {
            return Err(Error::Parameter("--verify-seams needs --mode consistent".into()));
        }
        let mut tee = Tee {
            png: &mut png,
            mem: tiling::MemorySink::new(target, channels),
        };
        stitch = tiling::generate_tiled_streaming(&gen, &plan, a.seed, &order, &mut tee)?;
        let image = tee.mem.into_image();
        let (diff, n) = tiling::verify_seams(&gen, &plan, a.seed, &image)?;
        stitch.seam_max_abs_diff = diff;
        stitch.seams_checked = n;
        if diff != 0.0 {
            code = EXIT_SEAM;
        }
    } else {
        stitch = tiling::generate_tiled_streaming(&gen, &plan, a.seed, &order, &mut png)?;
    }
    png.finish()?;
    let mut r = report::stitch_report(&plan, &stitch);
    r.field("network", &gen.spec().name).field("seed", a.seed);
    emit(out, &r, a.report.as_deref())?;
    if code == EXIT_SEAM {
        eprintln!("seam verification failed: max |diff| = {}", stitch.seam_max_abs_diff);
    }
    Ok(code)
}

fn stationarity_run(a: &StationarityArgs) -> Result<Report> {
    let gen = build_generator(&a.net, a.seed)?;
    let period = match a.period {
        Some(Size(h, w)) => (h, w),
        None => geometry::summarize(gen.spec())?.stationarity_period,
    };
    let probe = Rect::with_size(a.probe_origin.0, a.probe_origin.1, a.probe.0, a.probe.1)?;
    let s = stationarity::test_cyclostationarity(
        &gen,
        period,
        probe,
        a.samples,
        a.seed,
        a.detect_shift.map(|Point(r, c)| (r, c)),
    )?;
    Ok(report::stationarity_report(&gen.spec().name, &s))
}

/// Output rects whose backward rects are cross-checked by the tracer.
fn geometry_probes(spec: &NetworkSpec) -> Result<Vec<Rect>> {
    let summary = geometry::summarize(spec)?;
    let (ph, pw) = summary.stationarity_period;
    let base = forward_stack(&spec.layers, Rect::sized(summary.min_input, summary.min_input)?)?;
    let (r, c) = (base.row_start, base.col_start);
    let mut probes = Vec::new();
    for (dr, dc) in [(0, 0), (1, 0), (0, 1), (ph as i64 - 1, pw as i64 - 1), (ph as i64 / 2, 3)] {
        probes.push(Rect::with_size(r + dr, c + dc, 1, 1)?);
    }
    probes.push(Rect::with_size(r + 1, c + 2, 3, 2)?);
    Ok(probes)
}

fn verify_geometry(name: &str) -> Result<(Report, bool)> {
    let spec = resolve_net(name)?;
    let summary = geometry::summarize(&spec)?;
    let mut ok = true;
    let mut rows = Vec::new();
    for probe in geometry_probes(&spec)? {
        let need = backward_stack(&spec.layers, probe);
        let covers = forward_stack(&spec.layers, need)?.contains(&probe);
        let traced = taint::verify_backward_rect(&spec, probe);
        ok &= covers && traced;
        rows.push(vec![probe.to_string(), need.to_string(), covers.to_string(), traced.to_string()]);
    }
    let mut r = report::geometry_report(&spec.name, &summary);
    r.kind = "verify-geometry".into();
    r.field("verdict", if ok { "pass" } else { "fail" });
    r.table("probes", &["output", "backward", "covers", "tracer_agrees"], rows);
    Ok((r, ok))
}

fn cmd_verify(v: &VerifyCommand, out: &mut dyn Write) -> Result<i32> {
    match v {
        VerifyCommand::Consistency {
            net,
            trials,
            seed,
            report: path,
        } => {
            let gen = build_generator(net, *seed)?;
            let c = analysis::verify_consistency(&gen, *trials, *seed)?;
            emit(out, &report::consistency_report(&gen.spec().name, &c), path.as_deref())?;
            if let Some(f) = c.failures().next() {
                let layer = f
                    .offending_layer
                    .as_ref()
                    .map_or("unknown layer".into(), |(k, d)| format!("layer {k} ({d})"));
                eprintln!(
                    "marginalization consistency failed in {} of {} trials; first: trial {} (reproduce with --trials 1 --seed {}), {layer}, max |diff| = {}",
                    c.failure_count(),
                    c.trials.len(),
                    f.trial,
                    f.seed,
                    f.max_abs_diff
                );
                return Ok(EXIT_PROPERTY);
            }
            Ok(EXIT_PASS)
        }
        VerifyCommand::Stationarity(a) => {
            let r = stationarity_run(a)?;
            emit(out, &r, a.report.as_deref())?;
            if r.get("verdict") != Some(stationarity::Verdict::ConsistentWithPeriod.name()) {
                eprintln!(
                    "stationarity violated: {} has |z| = {} (seed {})",
                    r.get("worst_statistic").unwrap_or("?"),
                    r.get("max_z_score_period_shift").unwrap_or("?"),
                    a.seed
                );
                return Ok(EXIT_PROPERTY);
            }
            Ok(EXIT_PASS)
        }
        VerifyCommand::Geometry { net, report: path } => {
            let (r, ok) = verify_geometry(net)?;
            emit(out, &r, path.as_deref())?;
            if !ok {
                eprintln!("backward rect disagrees with the dependency tracer");
                return Ok(EXIT_PROPERTY);
            }
            Ok(EXIT_PASS)
        }
        VerifyCommand::Redundancy {
            budget,
            blocks,
            report: path,
        } => {
            let f = redundancy::redundancy_fraction(*budget, *blocks)?;
            let mut r = Report::new("verify-redundancy");
            r.field("budget", budget)
                .field("blocks", blocks)
                .field("latent_side", redundancy::latent_tile_side(*budget, *blocks)?)
                .field("redundancy_fraction", f);
            emit(out, &r, path.as_deref())?;
            Ok(EXIT_PASS)
        }
    }
}

fn cmd_analyze(a: &AnalyzeCommand, out: &mut dyn Write) -> Result<i32> {
    match a {
        AnalyzeCommand::Redundancy {
            budget,
            blocks,
            report: path,
        } => {
            let ks = blocks
                .0
                .iter()
                .map(|&k| u32::try_from(k).map_err(|_| Error::Parameter(format!("{k} blocks"))))
                .collect::<Result<Vec<u32>>>()?;
            let rows = redundancy::redundancy_table(&budget.0, &ks);
            if rows.is_empty() {
                return Err(Error::Parameter("no (budget, blocks) pair satisfies N >= 3".into()));
            }
            emit(out, &report::redundancy_report(&rows), path.as_deref())?;
        }
        AnalyzeCommand::Taint {
            blocks,
            latent,
            output,
            report: path,
        } => {
            if !(1..=12).contains(blocks) {
                return Err(Error::Parameter(format!("{blocks} blocks is out of range 1..=12")));
            }
            let spec = network::padded_nearest_stack(*blocks, 1, 1);
            let t = taint::trace_taint(&spec, Rect::sized(latent.0, latent.1)?)?;
            if let Some(p) = output {
                png_out::write_taint_mask(p, &t)?;
            }
            let mut r = Report::new("taint");
            r.field("network", &spec.name)
                .field("latent", Rect::sized(latent.0, latent.1)?)
                .field("output", t.anchor())
                .field("tainted_pixels", t.tainted_count())
                .field(
                    "border_width",
                    t.border_width().map_or("irregular".into(), |w| w.to_string()),
                )
                .field("clean", t.clean_rect().map_or("none".into(), |c| c.to_string()));
            emit(out, &r, path.as_deref())?;
        }
        AnalyzeCommand::Stationarity(s) => {
            let r = stationarity_run(s)?;
            emit(out, &r, s.report.as_deref())?;
        }
        AnalyzeCommand::Geometry { net, report: path } => {
            let spec = resolve_net(net)?;
            emit(out, &report::geometry_report(&spec.name, &geometry::summarize(&spec)?), path.as_deref())?;
        }
    }
    Ok(EXIT_PASS)
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Generate(a) => cmd_generate(a, out),
        Command::GenerateTiled(a) => cmd_generate_tiled(a, out),
        Command::Verify(v) => cmd_verify(v, out),
        Command::Analyze(a) => cmd_analyze(a, out),
        Command::InitWeights(a) => {
            let spec = resolve_net(&a.net)?;
            WeightStore::init_random(&spec, a.seed)?.save(&a.output)?;
            writeln!(out, "wrote {} weights for {} to {}", crate::weights::parameter_count(&spec), spec.name, a.output.display())?;
            Ok(EXIT_PASS)
        }
        Command::ExportSpec(a) => {
            std::fs::write(&a.output, resolve_net(&a.net)?.to_toml_string())?;
            Ok(EXIT_PASS)
        }
    }
}

/// Sizes the global worker pool from `INFCANVAS_THREADS`, if set.
pub fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Parameter(format!("{THREADS_ENV}={value:?} is not a positive integer")))?;
    // a pool built earlier in this process keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parses `args` (including the program name) and runs the command, writing
/// reports to `out`. Returns the process exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_PASS };
        }
    };
    match configure_threads().and_then(|_| dispatch(&cli, out)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run() -> i32 {
    run_with(std::env::args_os(), &mut std::io::stdout().lock())
}
