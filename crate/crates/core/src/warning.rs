use serde::Serialize;
use std::fmt;

/// Non-fatal conditions recorded while processing a layout or job.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    /// A coordinate was outside `[0, 1]` and has been clamped.
    Clamped { path: String, original: f64, clamped: f64 },
    /// Graphic elements arrived out of raster-scan order and were re-sorted.
    Reordered,
    /// The subject covers the whole canvas, so utility is undefined.
    DegenerateSubject,
    /// No up-stage blocks exist; only the middle block was selected.
    NoUpBlocks,
    /// No candidate colour reached the minimum contrast.
    ContrastFallback { group: usize, best_contrast: f64 },
    /// No library shape declares the underlay's aspect ratio.
    ShapeFallback { element: usize, aspect: f64, shape: String },
    /// Text could not fit at the minimum font size and was clipped.
    TextOverflow { element: usize, min_size: f64 },
    /// Taglines did not fit in the top band and went to the bottom band.
    TaglineOverflow { count: usize },
    /// The job carries more taglines than layouts handle well.
    ManyTaglines { count: usize },
    /// The layout has a logo box but the job supplied no logo image.
    MissingLogoImage,
    /// A stage took longer than its configured budget.
    SlowStage { stage: String, elapsed_ms: u128 },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::Clamped { path, original, clamped } => {
                write!(f, "{path}: clamped {original} to {clamped}")
            }
            Warning::Reordered => write!(f, "graphic elements re-sorted into raster order"),
            Warning::DegenerateSubject => write!(f, "subject covers the full canvas"),
            Warning::NoUpBlocks => write!(f, "no up blocks; middle block only"),
            Warning::ContrastFallback { group, best_contrast } => write!(
                f,
                "tagline group {group}: best scored colour had contrast {best_contrast:.3}; using max-contrast candidate"
            ),
            Warning::ShapeFallback { element, aspect, shape } => write!(
                f,
                "underlay {element}: aspect {aspect:.3} outside every shape range; using {shape}"
            ),
            Warning::TextOverflow { element, min_size } => {
                write!(f, "tagline {element}: text overflows at minimum size {min_size:.1}px")
            }
            Warning::TaglineOverflow { count } => {
                write!(f, "{count} tagline(s) moved to the bottom band")
            }
            Warning::ManyTaglines { count } => {
                write!(f, "{count} taglines; more than five tends to crowd the layout")
            }
            Warning::MissingLogoImage => write!(f, "layout has a logo box but no logo image was given"),
            Warning::SlowStage { stage, elapsed_ms } => {
                write!(f, "stage {stage} took {elapsed_ms} ms")
            }
        }
    }
}
