use super::LayoutMetrics;
use crate::layout::{rkbr_decode_ratio, CanvasSpec, Layout};
use crate::{Error, Result, Warning};
use serde::Serialize;

/// Largest relative aspect error still counted as ratio-correct.
pub const FRC_TOLERANCE: f64 = 0.015;

/// Fraction of predictions whose tagline box count equals the number of
/// input taglines.
pub fn tagline_match_rate(predictions: &[(&Layout, usize)]) -> Result<f64> {
    if predictions.is_empty() {
        return Err(Error::InvalidInput("tagline match rate needs at least one prediction".into()));
    }
    let hits = predictions.iter().filter(|(l, n)| l.tagline_count() == *n).count();
    Ok(hits as f64 / predictions.len() as f64)
}

/// Relative error of the subject's rendered aspect ratio against `r1`.
pub fn fg_ratio_error(layout: &Layout, spec: &CanvasSpec) -> Option<f64> {
    let ratio = rkbr_decode_ratio(layout.subject().bbox(), spec).ok()?;
    Some((ratio - spec.fg_ratio()).abs() / spec.fg_ratio())
}

pub fn fg_ratio_correct(layout: &Layout, spec: &CanvasSpec) -> bool {
    fg_ratio_error(layout, spec).is_some_and(|e| e <= FRC_TOLERANCE)
}

/// Fraction of predictions whose subject keeps the foreground aspect ratio.
pub fn fg_ratio_correctness(predictions: &[(&Layout, &CanvasSpec)]) -> Result<f64> {
    if predictions.is_empty() {
        return Err(Error::InvalidInput("ratio correctness needs at least one prediction".into()));
    }
    let hits = predictions.iter().filter(|(l, s)| fg_ratio_correct(l, s)).count();
    Ok(hits as f64 / predictions.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleReport {
    pub id: String,
    #[serde(flatten)]
    pub metrics: LayoutMetrics,
    pub predicted_taglines: usize,
    pub input_taglines: usize,
    pub tagline_match: bool,
    pub fg_ratio_error: Option<f64>,
    pub fg_ratio_correct: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<Warning>,
}

impl SampleReport {
    pub fn new(id: impl Into<String>, prediction: &Layout, input_taglines: usize, spec: &CanvasSpec, metrics: LayoutMetrics) -> Self {
        let predicted = prediction.tagline_count();
        Self {
            id: id.into(),
            metrics,
            predicted_taglines: predicted,
            input_taglines,
            tagline_match: predicted == input_taglines,
            fg_ratio_error: fg_ratio_error(prediction, spec),
            fg_ratio_correct: fg_ratio_correct(prediction, spec),
            warnings: Vec::new(),
        }
    }
}

/// Means over a prediction set. Optional metrics average only over the
/// layouts where they are defined; the matching counts say how many.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub layouts: usize,
    pub val: f64,
    pub ove: f64,
    pub ali: f64,
    pub und_l: Option<f64>,
    pub und_s: Option<f64>,
    pub underlay_layouts: usize,
    pub uti: f64,
    pub occ: f64,
    pub rea: Option<f64>,
    pub rea_layouts: usize,
    pub tmr: f64,
    pub frc: f64,
}

fn mean(values: impl Iterator<Item = f64>) -> (Option<f64>, usize) {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    ((n > 0).then(|| sum / n as f64), n)
}

pub fn aggregate(samples: &[SampleReport]) -> Result<Aggregate> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("no samples to aggregate".into()));
    }
    let m = |f: fn(&LayoutMetrics) -> f64| mean(samples.iter().map(|s| f(&s.metrics))).0.unwrap();
    let (und_l, underlay_layouts) = mean(samples.iter().filter_map(|s| s.metrics.und_l));
    let (und_s, _) = mean(samples.iter().filter_map(|s| s.metrics.und_s));
    let (rea, rea_layouts) = mean(samples.iter().filter_map(|s| s.metrics.rea));
    let rate = |f: fn(&SampleReport) -> bool| {
        samples.iter().filter(|s| f(s)).count() as f64 / samples.len() as f64
    };
    Ok(Aggregate {
        layouts: samples.len(),
        val: m(|x| x.val),
        ove: m(|x| x.ove),
        ali: m(|x| x.ali),
        und_l,
        und_s,
        underlay_layouts,
        uti: m(|x| x.uti),
        occ: m(|x| x.occ),
        rea,
        rea_layouts,
        tmr: rate(|s| s.tagline_match),
        frc: rate(|s| s.fg_ratio_correct),
    })
}

/// Batch evaluation output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub aggregate: Aggregate,
    pub samples: Vec<SampleReport>,
    pub unpaired_predictions: Vec<String>,
    pub unpaired_references: Vec<String>,
    /// Prediction files that failed to parse, with the reason.
    pub rejected_predictions: Vec<(String, String)>,
}
