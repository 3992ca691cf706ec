use adcanvas::conditioning::{build_layout_tokens, GsaParams, HashEmbedder};
use adcanvas::dataset::{dataset_stats, evaluate_batch, load_dataset};
use adcanvas::layout::{parse_layout, parse_layout_with, CanvasSpec, OcclusionClass, ParseMode};
use adcanvas::metrics::raster::estimate;
use adcanvas::metrics::SubjectRegion;
use adcanvas::pipeline::{run_design, BackendsConfig, DesignJob, Intermediates, StageError};
use adcanvas::renderer::{region_mean_color, render, style_layout, Color, RenderKit, ShapeLibrary};
use adcanvas::{Error, Warning};
use clap::{Parser, Subcommand, ValueEnum};
use image::RgbaImage;
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "adcanvas", version, about = "Product poster layout, rendering and evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Occlusion {
    No,
    Allow,
}

#[derive(Subcommand)]
enum Command {
    /// Run the four-stage design pipeline for one product image.
    Design {
        #[arg(long)]
        foreground: PathBuf,
        #[arg(long = "tagline")]
        taglines: Vec<String>,
        /// Target size as WIDTHxHEIGHT.
        #[arg(long, value_parser = parse_size)]
        size: (u32, u32),
        #[arg(long = "class")]
        product_class: String,
        #[arg(long, value_enum)]
        occlusion: Occlusion,
        #[arg(long)]
        logo: Option<PathBuf>,
        /// Per-stage backend selection; all stages use stubs when omitted.
        #[arg(long)]
        backends: Option<PathBuf>,
        #[arg(long)]
        shapes: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Style and draw a layout's graphic elements onto a background.
    Render {
        #[arg(long)]
        layout: PathBuf,
        #[arg(long)]
        background: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Product colour as #rrggbb; defaults to the background mean under the subject box.
        #[arg(long)]
        foreground_color: Option<String>,
        #[arg(long)]
        logo: Option<PathBuf>,
        #[arg(long)]
        shapes: Option<PathBuf>,
    },
    /// Score prediction layouts against reference records.
    Evaluate {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        references: PathBuf,
        #[arg(long)]
        report: PathBuf,
        /// Cross-check area metrics against an N x N rasterization.
        #[arg(long, num_args = 0..=1, default_missing_value = "2000")]
        raster_oracle: Option<usize>,
    },
    /// Check every record of a manifest; exits non-zero on any rejection.
    ValidateDataset {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Summarize a dataset manifest.
    Stats {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write seeded random layout-conditioning parameters.
    GenParams {
        #[arg(long, default_value_t = 32)]
        dim: usize,
        #[arg(long, default_value_t = 16)]
        name_dim: usize,
        #[arg(long, value_delimiter = ',', default_value = "64")]
        hidden: Vec<usize>,
        #[arg(long, default_value_t = adcanvas::conditioning::DEFAULT_NUM_FREQS)]
        num_freqs: usize,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        gamma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Encode a layout into conditioning tokens with the given parameters.
    Embed {
        #[arg(long)]
        layout: PathBuf,
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_size(s: &str) -> Result<(u32, u32), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected WIDTHxHEIGHT, got {s:?}"))?;
    let dim = |v: &str| v.trim().parse::<u32>().ok().filter(|&n| n > 0).ok_or_else(|| format!("bad dimension {v:?}"));
    Ok((dim(w)?, dim(h)?))
}

/// Process exit codes.
enum Failure {
    /// Bad input: exit 2.
    Validation(String),
    /// A model backend failed or returned unusable output: exit 3.
    Backend(String),
    Other(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Backend(_) => 3,
            Failure::Other(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Backend(m) | Failure::Other(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Schema(_) | Error::InvalidInput(_) | Error::InvalidGeometry(_) | Error::Shape(_) => {
                Failure::Validation(e.to_string())
            }
            other => Failure::Other(other.to_string()),
        }
    }
}

impl From<image::ImageError> for Failure {
    fn from(e: image::ImageError) -> Self {
        Failure::Other(e.to_string())
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> CliResult {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Other(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, bytes).map_err(|e| Failure::Other(format!("{}: {e}", path.display())))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> CliResult {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Other(e.to_string()))?;
    text.push('\n');
    write_file(path, text)
}

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
}

fn open_rgba(path: &Path) -> CliResult<RgbaImage> {
    image::open(path)
        .map(|i| i.to_rgba8())
        .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
}

fn kit(shapes: Option<&Path>) -> CliResult<RenderKit> {
    let mut kit = RenderKit::default();
    if let Some(p) = shapes {
        kit.shapes = ShapeLibrary::load(p)?;
    }
    Ok(kit)
}

fn print_warnings(warnings: &[Warning]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

/// Timing-dependent warnings are kept out of the deterministic outputs.
fn split_warnings(warnings: &[Warning]) -> (Vec<&Warning>, Vec<&Warning>) {
    warnings.iter().partition(|w| !matches!(w, Warning::SlowStage { .. }))
}

fn save_intermediates(out: &Path, done: &Intermediates) -> CliResult {
    if let Some(p) = &done.prompt {
        write_json(&out.join("prompt.json"), p)?;
    }
    if let Some(l) = &done.layout {
        write_file(&out.join("layout.json"), adcanvas::layout::serialize_layout(l) + "\n")?;
    }
    if let Some(bg) = &done.background {
        bg.save(out.join("background.png"))?;
    }
    write_json(&out.join("timings.json"), &json!({"timings": done.timings, "warnings": done.warnings}))
}

#[allow(clippy::too_many_arguments)]
fn design(
    foreground: &Path,
    taglines: Vec<String>,
    size: (u32, u32),
    product_class: String,
    occlusion: Occlusion,
    logo: Option<&Path>,
    backends: Option<&Path>,
    shapes: Option<&Path>,
    out: &Path,
) -> CliResult {
    let fg = open_rgba(foreground)?;
    let logo = logo.map(open_rgba).transpose()?;
    let occlusion = match occlusion {
        Occlusion::No => OcclusionClass::NoOcc(product_class),
        Occlusion::Allow => OcclusionClass::AllowOcc(product_class),
    };
    let job = DesignJob::new(fg, taglines, size, occlusion, logo)?;
    let config = match backends {
        Some(p) => BackendsConfig::load(p)?,
        None => BackendsConfig::default(),
    }
    .with_env(|k| std::env::var(k).ok());
    let backends = config.build().map_err(|e| Failure::Validation(format!("backend configuration: {e}")))?;
    let kit = kit(shapes)?;
    std::fs::create_dir_all(out).map_err(|e| Failure::Other(format!("{}: {e}", out.display())))?;

    let result = match run_design(&job, &backends, &kit) {
        Ok(r) => r,
        Err(failure) => {
            save_intermediates(out, &failure.intermediates)?;
            print_warnings(&failure.intermediates.warnings);
            let msg = failure.to_string();
            return Err(match failure.error {
                StageError::Invalid(_) => Failure::Validation(msg),
                _ => Failure::Backend(msg),
            });
        }
    };

    let (kept, timing) = split_warnings(&result.warnings);
    result.image.save(out.join("final.png"))?;
    result.background.save(out.join("background.png"))?;
    write_file(&out.join("layout.json"), result.layout_json() + "\n")?;
    write_json(&out.join("prompt.json"), &result.prompt)?;
    write_json(&out.join("styles.json"), &result.styles)?;
    write_json(&out.join("report.json"), &json!({"canvas": result.canvas, "metrics": result.metrics, "warnings": kept}))?;
    write_json(&out.join("timings.json"), &json!({"timings": result.timings, "warnings": timing}))?;
    print_warnings(&result.warnings);
    println!("wrote {}", out.join("final.png").display());
    Ok(())
}

fn render_cmd(
    layout: &Path,
    background: &Path,
    out: &Path,
    foreground_color: Option<&str>,
    logo: Option<&Path>,
    shapes: Option<&Path>,
) -> CliResult {
    let parsed = parse_layout(&read_text(layout)?).map_err(Error::from)?;
    let layout = parsed.layout;
    let bg = open_rgba(background)?;
    let bg = image::DynamicImage::ImageRgba8(bg).to_rgb8();
    let logo = logo.map(open_rgba).transpose()?;
    let fg_color = match foreground_color {
        Some(hex) => Color::from_hex(hex)?,
        None => region_mean_color(&bg, layout.subject().bbox())?,
    };
    let s = layout.subject().bbox();
    let r1 = if s.w > 0.0 && s.h > 0.0 { s.w / s.h * f64::from(bg.width()) / f64::from(bg.height()) } else { 1.0 };
    let canvas = CanvasSpec::new(
        bg.width(),
        bg.height(),
        r1,
        OcclusionClass::AllowOcc("product".into()),
        logo.as_ref().map(|l| f64::from(l.width()) / f64::from(l.height())),
    )?;
    let kit = kit(shapes)?;
    let styles = style_layout(&layout, &bg, fg_color, &kit)?;
    let rendered = render(&layout, &canvas, &bg, &styles, &kit, logo.as_ref())?;
    print_warnings(&styles.warnings);
    print_warnings(&rendered.warnings);
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Other(e.to_string()))?;
    }
    rendered.image.save(out)?;
    Ok(())
}

fn evaluate(predictions: &Path, references: &Path, report: &Path, raster: Option<usize>) -> CliResult {
    let metrics = evaluate_batch(predictions, references)?;
    let mut doc = serde_json::to_value(&metrics).map_err(|e| Failure::Other(e.to_string()))?;
    if let Some(grid) = raster.filter(|&g| g > 0) {
        let mut rows = Vec::new();
        let mut worst = 0.0f64;
        for s in &metrics.samples {
            let text = read_text(&predictions.join(format!("{}.json", s.id)))?;
            let layout = parse_layout_with(&text, ParseMode::Clamp).map_err(Error::from)?.layout;
            let est = estimate(&layout, &SubjectRegion::BBox(*layout.subject().bbox()), grid);
            let dev = [
                (est.ove - s.metrics.ove).abs(),
                (est.uti - s.metrics.uti).abs(),
                (est.occ - s.metrics.occ).abs(),
            ]
            .into_iter()
            .fold(0.0, f64::max);
            worst = worst.max(dev);
            rows.push(json!({"id": s.id, "raster": est, "max_deviation": dev}));
        }
        eprintln!("raster oracle ({grid}x{grid}): max deviation {worst:.2e}");
        doc["raster_check"] = json!({"grid": grid, "max_deviation": worst, "samples": rows});
    }
    write_json(report, &doc)?;
    for (id, why) in &metrics.rejected_predictions {
        eprintln!("rejected prediction {id}: {why}");
    }
    for id in &metrics.unpaired_predictions {
        eprintln!("prediction without reference: {id}");
    }
    for id in &metrics.unpaired_references {
        eprintln!("reference without prediction: {id}");
    }
    let a = &metrics.aggregate;
    println!(
        "{} samples  val {:.4}  ove {:.4}  ali {:.4}  uti {:.4}  occ {:.4}  tmr {:.4}  frc {:.4}",
        metrics.samples.len(),
        a.val,
        a.ove,
        a.ali,
        a.uti,
        a.occ,
        a.tmr,
        a.frc
    );
    Ok(())
}

fn validate_dataset(manifest: &Path) -> CliResult {
    let (samples, invalid) = load_dataset(manifest)?;
    for rec in &invalid {
        for v in &rec.violations {
            println!("{}: {v}", rec.record);
        }
    }
    println!("{} valid, {} rejected", samples.len(), invalid.len());
    if invalid.is_empty() {
        Ok(())
    } else {
        Err(Failure::Validation(format!("{} record(s) rejected", invalid.len())))
    }
}

fn stats(manifest: &Path, out: &Path) -> CliResult {
    let (samples, invalid) = load_dataset(manifest)?;
    let stats = dataset_stats(&samples, &invalid);
    write_json(out, &stats)?;
    for b in &stats.aspect_ratios {
        println!("aspect {:.3}: {}", b.ratio, b.count);
    }
    println!(
        "{} samples, {} with more than five taglines ({:.1}%), {} invalid",
        stats.samples,
        stats.many_taglines,
        100.0 * stats.many_taglines_fraction,
        stats.invalid.len()
    );
    Ok(())
}

fn embed(layout: &Path, params: &Path, out: &Path) -> CliResult {
    let layout = parse_layout(&read_text(layout)?).map_err(Error::from)?.layout;
    let params: GsaParams = serde_json::from_str(&read_text(params)?)
        .map_err(|e| Failure::Validation(format!("{}: {e}", params.display())))?;
    params.validate()?;
    let embedder = HashEmbedder::new(params.name_dim());
    let elements: Vec<_> = std::iter::once(layout.subject())
        .chain(layout.nongraphic())
        .chain(layout.graphic())
        .map(|e| (embedder.embed(e.kind().type_name()), *e.bbox()))
        .collect();
    let tokens = build_layout_tokens(&elements, &params)?;
    write_json(out, &tokens)
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Design { foreground, taglines, size, product_class, occlusion, logo, backends, shapes, out } => design(
            &foreground,
            taglines,
            size,
            product_class,
            occlusion,
            logo.as_deref(),
            backends.as_deref(),
            shapes.as_deref(),
            &out,
        ),
        Command::Render { layout, background, out, foreground_color, logo, shapes } => render_cmd(
            &layout,
            &background,
            &out,
            foreground_color.as_deref(),
            logo.as_deref(),
            shapes.as_deref(),
        ),
        Command::Evaluate { predictions, references, report, raster_oracle } => {
            evaluate(&predictions, &references, &report, raster_oracle)
        }
        Command::ValidateDataset { manifest } => validate_dataset(&manifest),
        Command::Stats { manifest, out } => stats(&manifest, &out),
        Command::GenParams { dim, name_dim, hidden, num_freqs, gamma, seed, out } => {
            let params = GsaParams::random(dim, name_dim, &hidden, num_freqs, gamma, seed)?;
            write_json(&out, &params)
        }
        Command::Embed { layout, params, out } => embed(&layout, &params, &out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
