//! Graphics rendering: tagline grouping, font and colour choice, underlay
//! shapes and compositing onto the generated background.

mod color;
mod compose;
mod group;
mod shapes;
mod style;
mod text;

pub use color::{contrast_ratio, region_mean_color, region_mean_color_boxes, Color, BLACK, WHITE};
pub use compose::{render, Rendered};
pub use group::{group_taglines, Grouping};
pub use shapes::{Outline, ShapeEntry, ShapeLibrary};
pub use style::{
    select_tagline_style, select_underlay, style_layout, GroupStyle, StyleAssignment, UnderlayStyle,
};
pub use text::{draw_text, fit_text, Font, TextFit, TEXT_PADDING};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderConfig {
    pub contrast_weight: f64,
    pub similarity_weight: f64,
    pub min_contrast: f64,
    /// Relative height difference allowed within a tagline group.
    pub group_height_tolerance: f64,
    /// Normalized centre offset allowed for taglines sharing a row or column.
    pub group_center_tolerance: f64,
    /// Smallest font size in pixels on a canvas of `reference_width`.
    pub min_font_px: f64,
    pub reference_width: f64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            contrast_weight: 0.7,
            similarity_weight: 0.3,
            min_contrast: 1.5,
            group_height_tolerance: 0.1,
            group_center_tolerance: 0.02,
            min_font_px: 12.0,
            reference_width: 1024.0,
        }
    }
}

impl RenderConfig {
    /// Minimum font size for a canvas `width` pixels wide.
    pub fn min_font_size(&self, width: u32) -> f64 {
        self.min_font_px * f64::from(width) / self.reference_width
    }

    /// `w_c * (contrast - 1) / 20 + w_s * (1 - distance)`.
    pub fn score(&self, contrast: f64, distance: f64) -> f64 {
        self.contrast_weight * (contrast - 1.0) / 20.0 + self.similarity_weight * (1.0 - distance)
    }
}

/// Candidate colours used when none are configured.
pub fn default_palette() -> Vec<Color> {
    [
        "#000000", "#ffffff", "#1f2a44", "#c8102e", "#f2c94c", "#2d6a4f", "#6b4226", "#e5e5e5",
    ]
    .iter()
    .map(|h| Color::from_hex(h).expect("palette entries are valid"))
    .collect()
}

/// Fonts, colours, shapes and weights used to style and draw a layout.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderKit {
    pub config: RenderConfig,
    pub fonts: Vec<Font>,
    pub colors: Vec<Color>,
    pub shapes: ShapeLibrary,
}

impl Default for RenderKit {
    fn default() -> Self {
        Self {
            config: RenderConfig::default(),
            fonts: Font::builtin(),
            colors: default_palette(),
            shapes: ShapeLibrary::default(),
        }
    }
}
