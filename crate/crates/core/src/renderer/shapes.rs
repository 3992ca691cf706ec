//! Underlay shape library.
//!
//! A manifest lists shapes with the aspect-ratio range they suit and an
//! outline, either inline or in a separate JSON file:
//!
//! ```json
//! {"shapes": [
//!   {"id": "pill", "aspect": [4.0, 10.0], "outline": {"kind": "pill"}},
//!   {"id": "badge", "aspect": [0.8, 1.25], "outline": "badge.json"}
//! ]}
//! ```

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Outline in the unit square, stretched over the underlay box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outline {
    Rect,
    /// Corner radius as a fraction of the box's shorter side (at most 0.5).
    RoundedRect { radius: f64 },
    Pill,
    Ellipse,
    /// Closed polygon, vertices in unit-square coordinates.
    Polygon { points: Vec<[f64; 2]> },
}

impl Outline {
    /// Whether the point `(px, py)`, in pixels relative to the top-left of a
    /// `w x h` box, lies inside the fitted outline.
    pub fn contains(&self, px: f64, py: f64, w: f64, h: f64) -> bool {
        if px < 0.0 || py < 0.0 || px > w || py > h {
            return false;
        }
        match self {
            Outline::Rect => true,
            Outline::RoundedRect { radius } => in_rounded(px, py, w, h, radius.clamp(0.0, 0.5) * w.min(h)),
            Outline::Pill => in_rounded(px, py, w, h, 0.5 * w.min(h)),
            Outline::Ellipse => {
                let (dx, dy) = (px / w - 0.5, py / h - 0.5);
                dx * dx + dy * dy <= 0.25
            }
            Outline::Polygon { points } => in_polygon(px / w, py / h, points),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Outline::RoundedRect { radius } if !(0.0..=0.5).contains(radius) => {
                Err(Error::InvalidInput(format!("corner radius {radius} must be in [0, 0.5]")))
            }
            Outline::Polygon { points } if points.len() < 3 => {
                Err(Error::InvalidInput("polygon needs at least three points".into()))
            }
            _ => Ok(()),
        }
    }
}

fn in_rounded(px: f64, py: f64, w: f64, h: f64, r: f64) -> bool {
    let cx = px.clamp(r, w - r);
    let cy = py.clamp(r, h - r);
    (px - cx).powi(2) + (py - cy).powi(2) <= r * r
}

fn in_polygon(x: f64, y: f64, pts: &[[f64; 2]]) -> bool {
    let mut inside = false;
    let mut j = pts.len() - 1;
    for i in 0..pts.len() {
        let ([xi, yi], [xj, yj]) = (pts[i], pts[j]);
        if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
            inside = !inside;
        }
        j = i;
    }
    inside
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeEntry {
    pub id: String,
    /// Inclusive range of pixel aspect ratios (width / height) the shape suits.
    pub aspect: [f64; 2],
    pub outline: Outline,
}

impl ShapeEntry {
    fn midpoint(&self) -> f64 {
        (self.aspect[0] + self.aspect[1]) / 2.0
    }

    fn accepts(&self, aspect: f64) -> bool {
        self.aspect[0] <= aspect && aspect <= self.aspect[1]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapeLibrary {
    shapes: Vec<ShapeEntry>,
}

#[derive(Deserialize)]
struct Manifest {
    shapes: Vec<ManifestEntry>,
}

#[derive(Deserialize)]
struct ManifestEntry {
    id: String,
    aspect: [f64; 2],
    outline: OutlineRef,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OutlineRef {
    Inline(Outline),
    File(String),
}

impl ShapeLibrary {
    pub fn new(shapes: Vec<ShapeEntry>) -> Result<Self> {
        if shapes.is_empty() {
            return Err(Error::InvalidInput("shape library is empty".into()));
        }
        for s in &shapes {
            let [lo, hi] = s.aspect;
            if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
                return Err(Error::InvalidInput(format!("shape {}: bad aspect range [{lo}, {hi}]", s.id)));
            }
            s.outline.validate()?;
        }
        Ok(Self { shapes })
    }

    pub fn load(manifest: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(manifest).map_err(|e| Error::io(manifest, e))?;
        let parsed: Manifest = serde_json::from_str(&text)
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", manifest.display())))?;
        let dir = manifest.parent().unwrap_or(Path::new("."));
        let shapes = parsed
            .shapes
            .into_iter()
            .map(|e| {
                let outline = match e.outline {
                    OutlineRef::Inline(o) => o,
                    OutlineRef::File(rel) => {
                        let path = dir.join(rel);
                        let text = std::fs::read_to_string(&path).map_err(|err| Error::io(&path, err))?;
                        serde_json::from_str(&text)
                            .map_err(|err| Error::InvalidInput(format!("{}: {err}", path.display())))?
                    }
                };
                Ok(ShapeEntry { id: e.id, aspect: e.aspect, outline })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(shapes)
    }

    pub fn shapes(&self) -> &[ShapeEntry] {
        &self.shapes
    }

    pub fn get(&self, id: &str) -> Option<&ShapeEntry> {
        self.shapes.iter().find(|s| s.id == id)
    }

    /// Shape for a box of pixel aspect `aspect`: among entries whose range
    /// holds it, the one with the closest midpoint; otherwise the closest
    /// midpoint overall, flagged as a fallback.
    pub fn select(&self, aspect: f64) -> (&ShapeEntry, bool) {
        match closest(self.shapes.iter().filter(|s| s.accepts(aspect)), aspect) {
            Some(s) => (s, false),
            None => (closest(self.shapes.iter(), aspect).expect("library is non-empty"), true),
        }
    }
}

/// Entry whose midpoint is nearest `aspect`; the earliest wins ties.
fn closest<'a>(entries: impl Iterator<Item = &'a ShapeEntry>, aspect: f64) -> Option<&'a ShapeEntry> {
    entries.fold(None, |best, s| match best {
        Some(b) if (b.midpoint() - aspect).abs() <= (s.midpoint() - aspect).abs() => Some(b),
        _ => Some(s),
    })
}

impl Default for ShapeLibrary {
    fn default() -> Self {
        let entry = |id: &str, lo: f64, hi: f64, outline| ShapeEntry { id: id.into(), aspect: [lo, hi], outline };
        Self {
            shapes: vec![
                entry("rectangle", 2.5, 20.0, Outline::Rect),
                entry("rounded_rect", 0.4, 2.5, Outline::RoundedRect { radius: 0.2 }),
                entry("pill", 4.0, 10.0, Outline::Pill),
                entry("circle", 0.9, 1.1, Outline::Ellipse),
            ],
        }
    }
}
