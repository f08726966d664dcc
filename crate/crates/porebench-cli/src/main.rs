//! Command-line front end: generate unit cells, measure them, average
//! fields over them, and calibrate closure models.
//!
//! Failures print a one-line JSON object `{"error": {"kind", "message"}}`
//! to stderr and exit with status 1; command-line usage errors keep
//! clap's status 2.

mod analyze;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use porebench::averaging::{average, decompose, AveragingError, Scheme, Weighting};
use porebench::closure::{
    fit, ClosureError, ConstantModel, FitOptions, LinearModel, LossKind, SampleSet,
};
use porebench::field::{FieldError, ScalarField};
use porebench::geometry::{
    read_raster, write_raster, write_raster_plain, GeneratorKind, GeneratorSpec,
    DEFAULT_RESOLUTION,
};
use porebench::metrics::MetricsError;
use porebench::preprocess::PreprocessError;
use porebench::GeometryError;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "porebench", version, about = "Periodic porous-media unit cells: generation, pore metrics, volume averaging, closure fits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rasterize a generator description into a periodic binary image
    Generate(GenerateArgs),
    /// Measure pore-scale descriptors of netpbm images
    Analyze(analyze::AnalyzeArgs),
    /// Volume-average a scalar field over a pore mask
    Average(AverageArgs),
    /// Calibrate a closure model against a sample table
    Fit(FitArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Generator kind; its parameters follow as flags
    #[arg(long, value_enum, conflicts_with = "spec")]
    kind: Option<KindArg>,
    /// Full generator description as JSON, instead of --kind
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Half the square or cross width, or the rectangle/ellipse x half-axis
    #[arg(long)]
    half_width: Option<f64>,
    /// Rectangle or ellipse y half-axis
    #[arg(long)]
    half_height: Option<f64>,
    /// Circle or triangle radius
    #[arg(long)]
    radius: Option<f64>,
    /// Half the cross arm thickness
    #[arg(long)]
    half_thickness: Option<f64>,
    /// Noise wavelength in pixels; must divide both cell dimensions
    #[arg(long)]
    scale: Option<usize>,
    /// Noise cut level in [0, 1]
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    /// Octave count for fractal noise
    #[arg(long, default_value_t = 4)]
    octaves: usize,
    /// Per-octave amplitude factor for fractal noise
    #[arg(long, default_value_t = 0.5)]
    persistence: f64,
    /// Voronoi seed point count
    #[arg(long)]
    seeds: Option<usize>,
    /// Voronoi channel half-width in pixels
    #[arg(long, default_value_t = 3.0)]
    aperture: f64,
    /// Inclusion rotation in degrees; with --spec, overrides the file
    #[arg(long)]
    rotation: Option<f64>,
    /// Cell width in pixels
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    width: usize,
    /// Cell height in pixels
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    height: usize,
    /// RNG seed; with --spec, overrides the file
    #[arg(long)]
    seed: Option<u64>,
    /// Physical edge length of one pixel
    #[arg(long, value_parser = parse_positive)]
    pixel_length: Option<f64>,
    /// Output raster [default: <kind>.pbm]; a JSON sidecar lands next to it
    #[arg(long, short, visible_alias = "out")]
    output: Option<PathBuf>,
    /// Write plain-text P1 instead of binary P4
    #[arg(long)]
    plain: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Square,
    Rectangle,
    Circle,
    Ellipse,
    Triangle,
    Cross,
    Perlin,
    Fractal,
    Voronoi,
}

#[derive(Args)]
struct AverageArgs {
    /// Scalar field (PSF1)
    #[arg(long)]
    field: PathBuf,
    /// Pore mask the field lives on (netpbm)
    #[arg(long)]
    image: PathBuf,
    #[arg(long, value_enum)]
    scheme: SchemeArg,
    /// Subgrid count along x
    #[arg(long, required_if_eq("scheme", "subgrids"))]
    nx: Option<usize>,
    /// Subgrid count along y
    #[arg(long, required_if_eq("scheme", "subgrids"))]
    ny: Option<usize>,
    /// Moving-window width (odd)
    #[arg(long, required_if_eq("scheme", "moving"))]
    filter_width: Option<usize>,
    /// Moving-window height (odd)
    #[arg(long, required_if_eq("scheme", "moving"))]
    filter_height: Option<usize>,
    #[arg(long, value_enum, default_value_t = WeightingArg::Intrinsic)]
    weighting: WeightingArg,
    /// Averaged output: JSON scalars for full/subgrids (default stdout),
    /// a PSF1 field for moving (required there)
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Also write the pointwise variation (PSF1)
    #[arg(long)]
    variation: Option<PathBuf>,
    /// 8-bit preview of the averaged field (PGM)
    #[arg(long)]
    preview: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    /// One window over the whole cell
    Full,
    /// Disjoint rectangular blocks
    Subgrids,
    /// Moving window centered on every pixel
    Moving,
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightingArg {
    Intrinsic,
    Superficial,
}

#[derive(Args)]
struct FitArgs {
    /// Sample table, .csv or .json
    #[arg(long)]
    samples: PathBuf,
    #[arg(long, value_enum, default_value_t = ModelArg::Linear)]
    model: ModelArg,
    #[arg(long, value_enum, default_value_t = LossArg::Mse)]
    loss: LossArg,
    /// Simplex iteration budget per start
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    /// Independent starts
    #[arg(long, default_value_t = 8)]
    starts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the result here instead of stdout
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    /// Intercept plus one coefficient per feature
    Linear,
    /// Intercept only
    Constant,
}

#[derive(Clone, Copy, ValueEnum)]
enum LossArg {
    /// Mean squared residual
    Mse,
    /// Mean absolute relative residual, percent
    Mape,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Averaging(#[from] AveragingError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Closure(#[from] ClosureError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("POREBENCH_THREADS must be a positive integer, got {0:?}")]
    InvalidThreads(String),
    #[error("writing the sidecar {0} would overwrite the spec file; pick another output name")]
    SidecarCollision(PathBuf),
    #[error("{failures} of {total} inputs failed:{details}")]
    Batch {
        failures: usize,
        total: usize,
        details: String,
    },
}

impl CliError {
    /// Stable snake_case discriminator for scripts, derived from the
    /// underlying error variant.
    fn kind(&self) -> String {
        let debug = match self {
            CliError::Geometry(e) => format!("{e:?}"),
            CliError::Preprocess(e) => format!("{e:?}"),
            CliError::Metrics(e) => format!("{e:?}"),
            CliError::Averaging(e) => format!("{e:?}"),
            CliError::Field(e) => format!("{e:?}"),
            CliError::Closure(e) => format!("{e:?}"),
            CliError::Io(_) => "Io".into(),
            CliError::Json(_) => "Json".into(),
            CliError::InvalidThreads(_) => "InvalidThreads".into(),
            CliError::SidecarCollision(_) => "SidecarCollision".into(),
            CliError::Batch { .. } => "Batch".into(),
        };
        snake_case_head(&debug)
    }
}

/// First CamelCase identifier of a Debug rendering, as snake_case.
fn snake_case_head(debug: &str) -> String {
    let head = debug
        .split(|c: char| c == '(' || c == '{' || c.is_whitespace())
        .next()
        .unwrap_or("error");
    let mut out = String::new();
    for (i, ch) in head.chars().enumerate() {
        if ch.is_uppercase() {
            if i > 0 {
                out.push('_');
            }
            out.extend(ch.to_lowercase());
        } else {
            out.push(ch);
        }
    }
    out
}

fn parse_positive(raw: &str) -> Result<f64, String> {
    let v: f64 = raw.parse().map_err(|_| format!("{raw:?} is not a number"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("{raw} is not a positive finite number"))
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        let doc = serde_json::json!({"error": {"kind": e.kind(), "message": e.to_string()}});
        eprintln!("{doc}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Analyze(args) => analyze::cmd_analyze(args),
        Command::Average(args) => cmd_average(args),
        Command::Fit(args) => cmd_fit(args),
    }
}

/// Exits with clap's usage status for errors that are really misuse of
/// the command line rather than runtime failures.
fn usage_exit(message: &str) -> ! {
    use clap::CommandFactory;
    Cli::command()
        .error(clap::error::ErrorKind::MissingRequiredArgument, message)
        .exit()
}

fn kind_name(kind: &GeneratorKind) -> &'static str {
    match kind {
        GeneratorKind::Square { .. } => "square",
        GeneratorKind::Rectangle { .. } => "rectangle",
        GeneratorKind::Circle { .. } => "circle",
        GeneratorKind::Ellipse { .. } => "ellipse",
        GeneratorKind::Triangle { .. } => "triangle",
        GeneratorKind::Cross { .. } => "cross",
        GeneratorKind::Perlin { .. } => "perlin",
        GeneratorKind::Fractal { .. } => "fractal",
        GeneratorKind::Voronoi { .. } => "voronoi",
    }
}

impl GenerateArgs {
    fn build_kind(&self, kind: KindArg) -> GeneratorKind {
        let need_f = |value: Option<f64>, flag: &str| {
            value.unwrap_or_else(|| usage_exit(&format!("--{flag} is required for this kind")))
        };
        let need_u = |value: Option<usize>, flag: &str| {
            value.unwrap_or_else(|| usage_exit(&format!("--{flag} is required for this kind")))
        };
        match kind {
            KindArg::Square => GeneratorKind::Square {
                half_width: need_f(self.half_width, "half-width"),
            },
            KindArg::Rectangle => GeneratorKind::Rectangle {
                half_width: need_f(self.half_width, "half-width"),
                half_height: need_f(self.half_height, "half-height"),
            },
            KindArg::Circle => GeneratorKind::Circle {
                radius: need_f(self.radius, "radius"),
            },
            KindArg::Ellipse => GeneratorKind::Ellipse {
                half_width: need_f(self.half_width, "half-width"),
                half_height: need_f(self.half_height, "half-height"),
            },
            KindArg::Triangle => GeneratorKind::Triangle {
                radius: need_f(self.radius, "radius"),
            },
            KindArg::Cross => GeneratorKind::Cross {
                half_width: need_f(self.half_width, "half-width"),
                half_thickness: need_f(self.half_thickness, "half-thickness"),
            },
            KindArg::Perlin => GeneratorKind::Perlin {
                scale: need_u(self.scale, "scale"),
                threshold: self.threshold,
            },
            KindArg::Fractal => GeneratorKind::Fractal {
                scale: need_u(self.scale, "scale"),
                threshold: self.threshold,
                octaves: self.octaves,
                persistence: self.persistence,
            },
            KindArg::Voronoi => GeneratorKind::Voronoi {
                seeds: need_u(self.seeds, "seeds"),
                aperture: self.aperture,
            },
        }
    }
}

/// Everything needed to reproduce a generated raster byte for byte.
#[derive(Serialize)]
struct Sidecar<'a> {
    schema_version: u32,
    spec: &'a GeneratorSpec,
    width: usize,
    height: usize,
    pixel_length: f64,
    version: &'static str,
}

/// True when both names would resolve to the same file.
fn same_path(a: &Path, b: &Path) -> bool {
    let normalize = |p: &Path| {
        let parent = match p.parent() {
            Some(q) if !q.as_os_str().is_empty() => q,
            _ => Path::new("."),
        };
        let name = p.file_name()?;
        Some(fs::canonicalize(parent).ok()?.join(name))
    };
    matches!((normalize(a), normalize(b)), (Some(x), Some(y)) if x == y)
}

fn cmd_generate(args: GenerateArgs) -> Result<(), CliError> {
    let mut spec: GeneratorSpec = match (&args.spec, args.kind) {
        (Some(path), None) => serde_json::from_slice(&fs::read(path)?)?,
        (None, Some(kind)) => GeneratorSpec {
            kind: args.build_kind(kind),
            rotation_deg: 0.0,
            rng_seed: 0,
        },
        _ => usage_exit("one of --kind or --spec is required"),
    };
    if let Some(rotation) = args.rotation {
        spec.rotation_deg = rotation;
    }
    if let Some(seed) = args.seed {
        spec.rng_seed = seed;
    }

    let output = args
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.pbm", kind_name(&spec.kind))));
    let sidecar_path = output.with_extension("json");
    if let Some(spec_path) = &args.spec {
        if same_path(spec_path, &sidecar_path) {
            return Err(CliError::SidecarCollision(sidecar_path));
        }
    }

    let mut image = spec.generate(args.width, args.height)?;
    if let Some(l) = args.pixel_length {
        image.pixel_length = l;
    }
    if args.plain {
        write_raster_plain(&image, &output)?;
    } else {
        write_raster(&image, &output)?;
    }
    let sidecar = Sidecar {
        schema_version: 1,
        spec: &spec,
        width: args.width,
        height: args.height,
        pixel_length: image.pixel_length,
        version: VERSION,
    };
    let mut text = serde_json::to_string_pretty(&sidecar)?;
    text.push('\n');
    fs::write(sidecar_path, text)?;
    Ok(())
}

/// Scalar result of a full average.
#[derive(Serialize)]
struct FullAverageDoc {
    schema_version: u32,
    scheme: &'static str,
    weighting: &'static str,
    value: f64,
}

/// Block means of a subgrid average, row by row.
#[derive(Serialize)]
struct SubgridAverageDoc {
    schema_version: u32,
    scheme: &'static str,
    weighting: &'static str,
    nx: usize,
    ny: usize,
    values: Vec<Vec<f64>>,
}

fn cmd_average(args: AverageArgs) -> Result<(), CliError> {
    let mask = read_raster(&args.image)?;
    let field = ScalarField::read_psf1(&args.field, mask)?;
    let scheme = match args.scheme {
        SchemeArg::Full => Scheme::Full,
        SchemeArg::Subgrids => Scheme::Subgrids {
            nx: args.nx.expect("clap enforces --nx"),
            ny: args.ny.expect("clap enforces --ny"),
        },
        SchemeArg::Moving => Scheme::Convolutional {
            width: args.filter_width.expect("clap enforces --filter-width"),
            height: args.filter_height.expect("clap enforces --filter-height"),
        },
    };
    let weighting = match args.weighting {
        WeightingArg::Intrinsic => Weighting::Intrinsic,
        WeightingArg::Superficial => Weighting::Superficial,
    };
    let weighting_name = match weighting {
        Weighting::Intrinsic => "intrinsic",
        Weighting::Superficial => "superficial",
    };

    let averaged = if let Some(variation_path) = &args.variation {
        let (averaged, variation) = decompose(&field, scheme, weighting)?;
        variation.write_psf1(variation_path)?;
        averaged
    } else {
        average(&field, scheme, weighting)?
    };

    // Window schemes reduce to scalars, the moving window stays a field.
    match scheme {
        Scheme::Full => {
            let doc = FullAverageDoc {
                schema_version: 1,
                scheme: "full",
                weighting: weighting_name,
                value: averaged.values()[0],
            };
            write_json_doc(&doc, args.output.as_deref())?;
        }
        Scheme::Subgrids { nx, ny } => {
            let mask = averaged.mask();
            let (bw, bh) = (mask.width() / nx, mask.height() / ny);
            let values = (0..ny)
                .map(|by| (0..nx).map(|bx| averaged.get(bx * bw, by * bh)).collect())
                .collect();
            let doc = SubgridAverageDoc {
                schema_version: 1,
                scheme: "subgrids",
                weighting: weighting_name,
                nx,
                ny,
                values,
            };
            write_json_doc(&doc, args.output.as_deref())?;
        }
        Scheme::Convolutional { .. } => {
            let Some(output) = &args.output else {
                usage_exit("--output is required for the moving scheme");
            };
            averaged.write_psf1(output)?;
        }
    }
    if let Some(preview) = &args.preview {
        averaged.write_pgm_preview(preview)?;
    }
    Ok(())
}

fn write_json_doc<T: Serialize>(doc: &T, output: Option<&Path>) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(doc)?;
    text.push('\n');
    match output {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

#[derive(Serialize)]
struct FitDoc {
    schema_version: u32,
    model: &'static str,
    loss: &'static str,
    alpha: Vec<f64>,
    loss_value: f64,
    n_iterations: usize,
    converged: bool,
    underdetermined: bool,
    residuals: Vec<f64>,
    version: &'static str,
}

fn cmd_fit(args: FitArgs) -> Result<(), CliError> {
    let samples = match args.samples.extension().and_then(|e| e.to_str()) {
        Some("json") => SampleSet::read_json(&args.samples)?,
        _ => SampleSet::read_csv(&args.samples)?,
    };
    let loss = match args.loss {
        LossArg::Mse => LossKind::Mse,
        LossArg::Mape => LossKind::Mape,
    };
    let options = FitOptions {
        n_starts: args.starts,
        max_iter: args.max_iter,
        seed: args.seed,
        ..FitOptions::default()
    };
    let (model_name, result) = match args.model {
        ModelArg::Linear => ("linear", fit(&LinearModel, &samples, loss, &options)?),
        ModelArg::Constant => ("constant", fit(&ConstantModel, &samples, loss, &options)?),
    };
    let doc = FitDoc {
        schema_version: 1,
        model: model_name,
        loss: match loss {
            LossKind::Mse => "mse",
            LossKind::Mape => "mape",
        },
        alpha: result.alpha,
        loss_value: result.loss_value,
        n_iterations: result.n_iterations,
        converged: result.converged,
        underdetermined: result.underdetermined,
        residuals: result.per_sample_residuals,
        version: VERSION,
    };
    write_json_doc(&doc, args.output.as_deref())
}
