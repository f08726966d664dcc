//! The `analyze` subcommand: turn a netpbm raster into a JSON report of
//! pore-scale descriptors, optionally over many inputs in parallel.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use porebench::geometry::{parse_raster, write_pgm};
use porebench::metrics::{max_flow, pore_size_distribution, Axis, MetricsReport};
use porebench::preprocess::{check_periodic_connectivity, keep_largest_component};
use porebench::PoreImage;

use crate::{usage_exit, CliError, VERSION};

#[derive(Args)]
pub struct AnalyzeArgs {
    /// Input rasters (netpbm); with --batch, directories expand to the
    /// .pbm and .pgm files inside
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Measure only the largest void component
    #[arg(long)]
    clean: bool,
    /// Write the report here instead of stdout (single input only)
    #[arg(long, short, conflicts_with = "batch")]
    output: Option<PathBuf>,
    /// Process every input in parallel, writing <input>.analysis.json
    /// next to each; POREBENCH_THREADS caps the worker count
    #[arg(long)]
    batch: bool,
    /// Directory for diagnostic rasters (pore labels, minimum cuts)
    #[arg(long)]
    debug_dir: Option<PathBuf>,
}

#[derive(Serialize)]
struct AnalysisDoc {
    schema_version: u32,
    input: InputInfo,
    preprocess: PreprocessInfo,
    metrics: MetricsInfo,
    provenance: Provenance,
}

#[derive(Serialize)]
struct InputInfo {
    path: String,
    width: usize,
    height: usize,
    /// SHA-256 of the raw input bytes, hex with an algorithm prefix.
    checksum: String,
}

/// Topology of the raster as read, before any cleaning.
#[derive(Serialize)]
struct PreprocessInfo {
    cleaned: bool,
    components: usize,
    largest_component_fraction: f64,
    high_discontinuity: bool,
    periodic_connected_x: bool,
    periodic_connected_y: bool,
}

#[derive(Serialize)]
struct MetricsInfo {
    porosity: f64,
    n_pores: usize,
    mu_p: f64,
    sigma_p: f64,
    #[serde(rename = "S")]
    specific_surface: f64,
    #[serde(rename = "Di")]
    directionality: [f64; 8],
    #[serde(rename = "sigma_Di")]
    directionality_std: f64,
    connectivity: usize,
    tau: AxisPair<f64>,
    f_max: AxisPair<u64>,
}

/// Per-axis value; `null` marks an axis the void space does not cross.
#[derive(Serialize)]
struct AxisPair<T> {
    x: Option<T>,
    y: Option<T>,
}

#[derive(Serialize)]
struct Provenance {
    version: &'static str,
    timestamp: String,
    /// Unknown at analysis time; generation records it in the sidecar.
    seed: Option<u64>,
}

pub fn cmd_analyze(args: AnalyzeArgs) -> Result<(), CliError> {
    if !args.batch && args.inputs.len() != 1 {
        usage_exit("multiple inputs need --batch");
    }
    if let Some(dir) = &args.debug_dir {
        fs::create_dir_all(dir)?;
    }

    if args.batch {
        configure_thread_pool()?;
        let inputs = expand_inputs(&args.inputs)?;
        let failures: Vec<String> = inputs
            .par_iter()
            .filter_map(|path| {
                analyze_one(path, args.clean, args.debug_dir.as_deref())
                    .and_then(|text| {
                        fs::write(path.with_extension("analysis.json"), text).map_err(CliError::Io)
                    })
                    .err()
                    .map(|e| format!("\n  {}: {e}", path.display()))
            })
            .collect();
        if failures.is_empty() {
            Ok(())
        } else {
            Err(CliError::Batch {
                failures: failures.len(),
                total: inputs.len(),
                details: failures.concat(),
            })
        }
    } else {
        let text = analyze_one(&args.inputs[0], args.clean, args.debug_dir.as_deref())?;
        match &args.output {
            Some(path) => fs::write(path, text)?,
            None => print!("{text}"),
        }
        Ok(())
    }
}

/// Directories become the rasters inside them, sorted so batch order is
/// stable; plain files pass through.
fn expand_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Vec::new();
    for input in inputs {
        if !input.is_dir() {
            out.push(input.clone());
            continue;
        }
        let mut found = Vec::new();
        for entry in fs::read_dir(input)? {
            let path = entry?.path();
            let raster = path
                .extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| e.eq_ignore_ascii_case("pbm") || e.eq_ignore_ascii_case("pgm"));
            if raster {
                found.push(path);
            }
        }
        found.sort();
        out.extend(found);
    }
    Ok(out)
}

/// Applies POREBENCH_THREADS to the global rayon pool. Ignores the
/// already-built error so repeated calls stay harmless.
fn configure_thread_pool() -> Result<(), CliError> {
    match std::env::var("POREBENCH_THREADS") {
        Ok(raw) => {
            let n: usize = raw
                .parse()
                .ok()
                .filter(|&n| n > 0)
                .ok_or(CliError::InvalidThreads(raw))?;
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
            Ok(())
        }
        Err(_) => Ok(()),
    }
}

/// Full report for one raster, rendered as pretty JSON.
fn analyze_one(path: &Path, clean: bool, debug_dir: Option<&Path>) -> Result<String, CliError> {
    let bytes = fs::read(path)?;
    let checksum = format!("sha256:{:x}", Sha256::digest(&bytes));
    let raw = parse_raster(&bytes)?;
    let periodicity = check_periodic_connectivity(&raw);
    let image = if clean {
        keep_largest_component(&raw)?
    } else {
        raw
    };
    let report = MetricsReport::compute(&image)?;

    if let Some(dir) = debug_dir {
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "input".into());
        write_debug_rasters(dir, &stem, &image)?;
    }

    let doc = AnalysisDoc {
        schema_version: 1,
        input: InputInfo {
            path: path.display().to_string(),
            width: image.width(),
            height: image.height(),
            checksum,
        },
        preprocess: PreprocessInfo {
            cleaned: clean,
            components: periodicity.component_count,
            largest_component_fraction: periodicity.largest_component_fraction,
            high_discontinuity: periodicity.high_discontinuity,
            periodic_connected_x: periodicity.connected_x,
            periodic_connected_y: periodicity.connected_y,
        },
        metrics: MetricsInfo {
            porosity: report.porosity,
            n_pores: report.n_pores,
            mu_p: report.mean_pore_volume,
            sigma_p: report.std_pore_volume,
            specific_surface: report.specific_surface,
            directionality: report.directionality,
            directionality_std: report.directionality_std,
            connectivity: report.connectivity,
            tau: AxisPair {
                x: report.tortuosity_x,
                y: report.tortuosity_y,
            },
            f_max: AxisPair {
                x: report.max_flow_x,
                y: report.max_flow_y,
            },
        },
        provenance: Provenance {
            version: VERSION,
            timestamp: chrono::Utc::now().to_rfc3339(),
            seed: None,
        },
    };
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    Ok(text)
}

/// Pore labels as gray levels plus one minimum-cut overlay per crossable
/// axis. Label gray repeats past 255 pores; the overlays mark cut pixels
/// white over dim void.
fn write_debug_rasters(dir: &Path, stem: &str, image: &PoreImage) -> Result<(), CliError> {
    let (w, h) = (image.width(), image.height());

    let psd = pore_size_distribution(image)?;
    let pixels: Vec<u8> = psd
        .labels()
        .iter()
        .map(|&l| if l == 0 { 0 } else { 40 + (l % 216) as u8 })
        .collect();
    write_pgm(dir.join(format!("{stem}_pores.pgm")), w, h, &pixels)?;

    for (axis, name) in [(Axis::X, "x"), (Axis::Y, "y")] {
        let Ok(result) = max_flow(image, axis) else {
            continue;
        };
        let mut pixels: Vec<u8> = (0..w * h)
            .map(|i| if image.is_void(i % w, i / w) { 120 } else { 0 })
            .collect();
        for &((ax, ay), (bx, by)) in &result.cut {
            pixels[ay * w + ax] = 255;
            pixels[by * w + bx] = 255;
        }
        write_pgm(dir.join(format!("{stem}_cut_{name}.pgm")), w, h, &pixels)?;
    }
    Ok(())
}
