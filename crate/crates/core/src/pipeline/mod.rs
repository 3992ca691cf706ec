//! Four-stage poster design: prompt, layout, background, rendering.
//!
//! The three model-backed stages are reached through [`PromptBackend`],
//! [`LayoutBackend`] and [`BackgroundBackend`]; each can be a local stub or
//! a remote service, chosen per stage. Stages run strictly in order and
//! each output is validated before the next stage sees it.

mod config;
mod http;
mod request;
mod rules;
mod stub;

pub use config::{BackendsConfig, StageConfig, URL_ENV};
pub use http::{HttpBackend, HttpEndpoint, DEFAULT_TIMEOUT_MS};
pub use request::{LayoutRequest, TaglineSlot};
pub use rules::{nongraphic_mentions, rule_based_layout, rule_based_layout_with, RuleConfig, NONGRAPHIC_VOCABULARY};
pub use stub::{gradient_colors, paste_rect, stub_background, stub_prompts, StubBackground, StubLayout, StubPrompt};

use crate::layout::{serialize_layout, CanvasSpec, Layout, OcclusionClass, ParsedLayout, PromptPair};
use crate::metrics::{evaluate_layout, SampleReport, SubjectRegion};
use crate::renderer::{render, style_layout, Color, RenderKit, StyleAssignment};
use crate::{Error, SchemaViolation, Violation, Warning};
use image::{RgbImage, RgbaImage};
use serde::Serialize;
use std::fmt;
use std::sync::Arc;
use std::time::Instant;

/// Jobs with more taglines than this get a warning.
pub const MAX_COMFORTABLE_TAGLINES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Prompt,
    Layout,
    Background,
    Render,
}

impl Stage {
    pub const ALL: [Stage; 4] = [Stage::Prompt, Stage::Layout, Stage::Background, Stage::Render];

    pub fn name(&self) -> &'static str {
        match self {
            Stage::Prompt => "prompt",
            Stage::Layout => "layout",
            Stage::Background => "background",
            Stage::Render => "render",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// What a backend reports when it cannot produce its output.
#[derive(Debug, thiserror::Error)]
pub enum BackendFailure {
    #[error("timed out after {timeout_ms} ms")]
    Timeout { timeout_ms: u64 },
    #[error("{0}")]
    Error(String),
    #[error(transparent)]
    Schema(SchemaViolation),
}

impl From<Error> for BackendFailure {
    fn from(e: Error) -> Self {
        match e {
            Error::Schema(v) => BackendFailure::Schema(v),
            other => BackendFailure::Error(other.to_string()),
        }
    }
}

pub trait PromptBackend: Send + Sync {
    fn prompts(&self, foreground: &RgbaImage) -> Result<PromptPair, BackendFailure>;
}

pub trait LayoutBackend: Send + Sync {
    fn layout(&self, request: &LayoutRequest) -> Result<ParsedLayout, BackendFailure>;
}

pub trait BackgroundBackend: Send + Sync {
    fn background(
        &self,
        prompt: &PromptPair,
        layout: &Layout,
        foreground: &RgbaImage,
        canvas: &CanvasSpec,
    ) -> Result<RgbImage, BackendFailure>;
}

/// One backend per model stage plus optional slow-stage budgets, indexed
/// like [`Stage::ALL`].
#[derive(Clone)]
pub struct Backends {
    pub prompt: Arc<dyn PromptBackend>,
    pub layout: Arc<dyn LayoutBackend>,
    pub background: Arc<dyn BackgroundBackend>,
    pub budgets: [Option<u64>; 4],
}

impl Backends {
    pub fn stub() -> Self {
        Self {
            prompt: Arc::new(StubPrompt),
            layout: Arc::new(StubLayout),
            background: Arc::new(StubBackground),
            budgets: [None; 4],
        }
    }
}

/// Tight bounding box `(x0, y0, x1, y1)` (exclusive ends) of the pixels
/// with non-zero alpha.
pub fn foreground_bounds(foreground: &RgbaImage) -> Option<(u32, u32, u32, u32)> {
    let mut bounds: Option<(u32, u32, u32, u32)> = None;
    for (c, r, p) in foreground.enumerate_pixels() {
        if p[3] > 0 {
            bounds = Some(match bounds {
                None => (c, r, c + 1, r + 1),
                Some((x0, y0, x1, y1)) => (x0.min(c), y0.min(r), x1.max(c + 1), y1.max(r + 1)),
            });
        }
    }
    bounds
}

/// Alpha-weighted mean colour of the foreground.
pub fn mean_opaque_color(foreground: &RgbaImage) -> Option<Color> {
    let mut sum = [0u64; 3];
    let mut weight = 0u64;
    for p in foreground.pixels() {
        let a = u64::from(p[3]);
        for k in 0..3 {
            sum[k] += u64::from(p[k]) * a;
        }
        weight += a;
    }
    if weight == 0 {
        return None;
    }
    let avg = |s: u64| ((s + weight / 2) / weight) as u8;
    Some(Color::new(avg(sum[0]), avg(sum[1]), avg(sum[2])))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignJob {
    pub foreground: RgbaImage,
    pub taglines: Vec<String>,
    pub width: u32,
    pub height: u32,
    pub occlusion: OcclusionClass,
    pub logo: Option<RgbaImage>,
}

impl DesignJob {
    pub fn new(
        foreground: RgbaImage,
        taglines: Vec<String>,
        (width, height): (u32, u32),
        occlusion: OcclusionClass,
        logo: Option<RgbaImage>,
    ) -> crate::Result<Self> {
        let job = Self { foreground, taglines, width, height, occlusion, logo };
        job.validate()?;
        Ok(job)
    }

    pub fn validate(&self) -> crate::Result<()> {
        let mut v = Vec::new();
        if self.taglines.is_empty() && self.logo.is_none() {
            v.push(Violation::new("$.taglines", "a job needs at least one tagline or a logo"));
        }
        for (i, t) in self.taglines.iter().enumerate() {
            if t.trim().is_empty() {
                v.push(Violation::new(format!("$.taglines[{i}]"), "empty tagline text"));
            }
        }
        if self.width == 0 || self.height == 0 {
            v.push(Violation::new("$.size", format!("target size {}x{} must be positive", self.width, self.height)));
        }
        if foreground_bounds(&self.foreground).is_none() {
            v.push(Violation::new("$.foreground", "foreground has no opaque pixels"));
        }
        if let Some(logo) = &self.logo {
            if logo.width() == 0 || logo.height() == 0 {
                v.push(Violation::new("$.logo", "logo image is empty"));
            }
        }
        if self.occlusion.product_class().trim().is_empty() {
            v.push(Violation::new("$.product_class", "product class is empty"));
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(SchemaViolation { violations: v }.into())
        }
    }

    /// Canvas with r1 from the foreground's alpha bounds and the logo ratio
    /// from the logo image.
    pub fn canvas(&self) -> crate::Result<CanvasSpec> {
        let (x0, y0, x1, y1) = foreground_bounds(&self.foreground)
            .ok_or_else(|| Error::InvalidInput("foreground has no opaque pixels".into()))?;
        let r1 = f64::from(x1 - x0) / f64::from(y1 - y0);
        let logo_ratio = self.logo.as_ref().map(|l| f64::from(l.width()) / f64::from(l.height()));
        CanvasSpec::new(self.width, self.height, r1, self.occlusion.clone(), logo_ratio)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageTiming {
    pub stage: Stage,
    pub elapsed_ms: f64,
}

/// Outputs of the stages that completed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Intermediates {
    pub prompt: Option<PromptPair>,
    pub layout: Option<Layout>,
    pub background: Option<RgbImage>,
    pub timings: Vec<StageTiming>,
    pub warnings: Vec<Warning>,
}

#[derive(Debug, thiserror::Error)]
pub enum StageError {
    #[error("timed out after {timeout_ms} ms")]
    Timeout { timeout_ms: u64 },
    #[error("backend error: {0}")]
    Backend(String),
    #[error(transparent)]
    Schema(SchemaViolation),
    #[error(transparent)]
    Invalid(Error),
}

impl From<BackendFailure> for StageError {
    fn from(f: BackendFailure) -> Self {
        match f {
            BackendFailure::Timeout { timeout_ms } => StageError::Timeout { timeout_ms },
            BackendFailure::Error(d) => StageError::Backend(d),
            BackendFailure::Schema(v) => StageError::Schema(v),
        }
    }
}

impl From<Error> for StageError {
    fn from(e: Error) -> Self {
        match e {
            Error::Schema(v) => StageError::Schema(v),
            other => StageError::Invalid(other),
        }
    }
}

/// A failed run: the stage that failed, why, and everything before it.
#[derive(Debug, thiserror::Error)]
#[error("{stage} stage failed: {error}")]
pub struct DesignFailure {
    pub stage: Stage,
    #[source]
    pub error: StageError,
    pub intermediates: Box<Intermediates>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignResult {
    pub canvas: CanvasSpec,
    pub prompt: PromptPair,
    pub layout: Layout,
    pub background: RgbImage,
    pub styles: StyleAssignment,
    pub image: RgbImage,
    pub metrics: SampleReport,
    pub timings: Vec<StageTiming>,
    pub warnings: Vec<Warning>,
}

impl DesignResult {
    pub fn layout_json(&self) -> String {
        serialize_layout(&self.layout)
    }
}

struct Run<'a> {
    backends: &'a Backends,
    done: Intermediates,
}

impl Run<'_> {
    fn stage<T>(&mut self, stage: Stage, f: impl FnOnce(&mut Intermediates) -> Result<T, StageError>) -> Result<T, DesignFailure> {
        let start = Instant::now();
        let out = f(&mut self.done);
        let elapsed = start.elapsed();
        self.done.timings.push(StageTiming { stage, elapsed_ms: elapsed.as_secs_f64() * 1e3 });
        let idx = Stage::ALL.iter().position(|s| *s == stage).expect("known stage");
        if let Some(budget) = self.backends.budgets[idx] {
            if elapsed.as_millis() > u128::from(budget) {
                self.done.warnings.push(Warning::SlowStage { stage: stage.name().into(), elapsed_ms: elapsed.as_millis() });
            }
        }
        out.map_err(|error| DesignFailure { stage, error, intermediates: Box::new(self.done.clone()) })
    }
}

fn check_layout(layout: &Layout, job: &DesignJob) -> Result<(), StageError> {
    let got = layout.tagline_count();
    if got != job.taglines.len() {
        return Err(StageError::Schema(SchemaViolation::single(
            "$.graphic",
            format!("expected {} tagline boxes, got {got}", job.taglines.len()),
        )));
    }
    Ok(())
}

/// Runs the four stages for `job`.
pub fn run_design(job: &DesignJob, backends: &Backends, kit: &RenderKit) -> Result<DesignResult, DesignFailure> {
    let mut run = Run { backends, done: Intermediates::default() };
    let fail_early = |error: Error| DesignFailure {
        stage: Stage::Prompt,
        error: error.into(),
        intermediates: Box::default(),
    };
    job.validate().map_err(fail_early)?;
    let canvas = job.canvas().map_err(fail_early)?;
    if job.taglines.len() > MAX_COMFORTABLE_TAGLINES {
        run.done.warnings.push(Warning::ManyTaglines { count: job.taglines.len() });
    }

    let prompt = run.stage(Stage::Prompt, |_| {
        let p = backends.prompt.prompts(&job.foreground)?;
        p.validate()?;
        Ok(p)
    })?;
    run.done.prompt = Some(prompt.clone());

    let layout = run.stage(Stage::Layout, |done| {
        let request = LayoutRequest::new(&canvas, prompt.clone(), &job.taglines)?;
        let parsed = backends.layout.layout(&request)?;
        check_layout(&parsed.layout, job)?;
        done.warnings.extend(parsed.warnings);
        Ok(parsed.layout)
    })?;
    run.done.layout = Some(layout.clone());

    let background = run.stage(Stage::Background, |_| {
        let bg = backends.background.background(&prompt, &layout, &job.foreground, &canvas)?;
        if bg.dimensions() != (canvas.width(), canvas.height()) {
            return Err(StageError::Schema(SchemaViolation::single(
                "$",
                format!("background is {}x{}, expected {}x{}", bg.width(), bg.height(), canvas.width(), canvas.height()),
            )));
        }
        Ok(bg)
    })?;
    run.done.background = Some(background.clone());

    let (styles, rendered, metrics) = run.stage(Stage::Render, |done| {
        let fg_color = mean_opaque_color(&job.foreground).expect("validated foreground");
        let styles = style_layout(&layout, &background, fg_color, kit)?;
        done.warnings.extend(styles.warnings.iter().cloned());
        let rendered = render(&layout, &canvas, &background, &styles, kit, job.logo.as_ref())?;
        done.warnings.extend(rendered.warnings.iter().cloned());
        let region = SubjectRegion::BBox(*layout.subject().bbox());
        let (metrics, metric_warnings) =
            evaluate_layout(&layout, &region, Some(&background), (canvas.width(), canvas.height()))?;
        done.warnings.extend(metric_warnings.iter().cloned());
        let mut report = SampleReport::new("design", &layout, job.taglines.len(), &canvas, metrics);
        report.warnings = metric_warnings;
        Ok((styles, rendered, report))
    })?;

    let done = run.done;
    Ok(DesignResult {
        canvas,
        prompt,
        layout,
        background,
        styles,
        image: rendered.image,
        metrics,
        timings: done.timings,
        warnings: done.warnings,
    })
}
