//! Annotated sample records: loading, validation, statistics and batch
//! evaluation.
//!
//! A record is one JSON file with asset paths relative to its own
//! directory:
//!
//! ```json
//! {
//!   "id": "s0001",
//!   "image": "images/s0001.png",
//!   "mask": "masks/s0001.png",
//!   "background": "backgrounds/s0001.png",
//!   "prompt": {"foreground": "a red sneaker", "background": "a wooden floor"},
//!   "taglines": ["Run further"],
//!   "layout": {"subject": {...}, "elements": [...], "graphic": [...]},
//!   "width": 1024,
//!   "height": 1024,
//!   "occlusion": "no_occ",
//!   "product_class": "sneaker",
//!   "fg_ratio": 0.62
//! }
//! ```
//!
//! `background` and `fg_ratio` are optional. A manifest lists record files
//! relative to the manifest: `{"records": ["records/s0001.json", ...]}`.

mod evaluate;
mod stats;

pub use evaluate::evaluate_batch;
pub use stats::{dataset_stats, AspectBucket, DatasetStats, ASPECT_TOLERANCE};

use crate::layout::{parse_value, CanvasSpec, Layout, OcclusionClass, ParseMode, PromptPair};
use crate::{Error, Result, SchemaViolation, Violation};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub id: String,
    pub image: PathBuf,
    pub mask: PathBuf,
    pub background: Option<PathBuf>,
    pub prompt: PromptPair,
    pub taglines: Vec<String>,
    pub layout: Layout,
    pub width: u32,
    pub height: u32,
    pub occlusion: OcclusionClass,
    /// Foreground aspect ratio; taken from the reference subject box when
    /// the record does not state it.
    pub fg_ratio: f64,
}

impl Sample {
    pub fn canvas(&self) -> Result<CanvasSpec> {
        CanvasSpec::new(self.width, self.height, self.fg_ratio, self.occlusion.clone(), None)
    }
}

/// A record that failed to load, with every problem found.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvalidRecord {
    pub record: String,
    pub violations: Vec<Violation>,
}

struct Checker {
    violations: Vec<Violation>,
}

impl Checker {
    fn violate(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation::new(path, message));
    }

    fn string(&mut self, obj: &Map<String, Value>, key: &str) -> Option<String> {
        match obj.get(key) {
            None => self.violate(format!("$.{key}"), "missing"),
            Some(Value::String(s)) if !s.trim().is_empty() => return Some(s.clone()),
            Some(_) => self.violate(format!("$.{key}"), "expected a non-empty string"),
        }
        None
    }

    fn dimension(&mut self, obj: &Map<String, Value>, key: &str) -> Option<u32> {
        match obj.get(key).and_then(Value::as_u64) {
            Some(v) if v > 0 && v <= u64::from(u32::MAX) => Some(v as u32),
            _ => {
                self.violate(format!("$.{key}"), "expected a positive integer");
                None
            }
        }
    }

    /// Resolves an asset path and reads the image header for its size.
    fn asset(&mut self, obj: &Map<String, Value>, key: &str, root: &Path) -> Option<(PathBuf, (u32, u32))> {
        let rel = self.string(obj, key)?;
        let path = root.join(&rel);
        if !path.is_file() {
            self.violate(format!("$.{key}"), format!("file not found: {}", path.display()));
            return None;
        }
        match image::image_dimensions(&path) {
            Ok(dims) => Some((path, dims)),
            Err(e) => {
                self.violate(format!("$.{key}"), format!("unreadable image {}: {e}", path.display()));
                None
            }
        }
    }
}

/// Parses and validates one record. Asset paths resolve against `root`.
/// Either every invariant holds or every violation is reported.
pub fn load_sample(record: &str, root: &Path) -> Result<Sample> {
    let value: Value = serde_json::from_str(record)
        .map_err(|e| SchemaViolation::single("$", format!("malformed JSON: {e}")))?;
    let Some(obj) = value.as_object() else {
        return Err(SchemaViolation::single("$", "record must be an object").into());
    };
    let mut cx = Checker { violations: Vec::new() };

    let id = cx.string(obj, "id");
    let width = cx.dimension(obj, "width");
    let height = cx.dimension(obj, "height");
    let image = cx.asset(obj, "image", root);
    let mask = cx.asset(obj, "mask", root);
    let background = if obj.contains_key("background") { cx.asset(obj, "background", root) } else { None };

    if let (Some((_, img)), Some((_, m))) = (&image, &mask) {
        if img != m {
            cx.violate("$.mask", format!("mask is {}x{} but image is {}x{}", m.0, m.1, img.0, img.1));
        }
    }
    if let (Some((_, img)), Some(w), Some(h)) = (&image, width, height) {
        if *img != (w, h) {
            cx.violate("$.image", format!("image is {}x{} but the record says {w}x{h}", img.0, img.1));
        }
    }
    if let (Some((_, bg)), Some(w), Some(h)) = (&background, width, height) {
        if *bg != (w, h) {
            cx.violate("$.background", format!("background is {}x{} but the record says {w}x{h}", bg.0, bg.1));
        }
    }

    let prompt = match obj.get("prompt").map(|v| serde_json::from_value::<PromptPair>(v.clone())) {
        None => {
            cx.violate("$.prompt", "missing");
            None
        }
        Some(Ok(p)) if p.validate().is_ok() => Some(p),
        Some(Ok(_)) => {
            cx.violate("$.prompt", "captions must be non-empty");
            None
        }
        Some(Err(e)) => {
            cx.violate("$.prompt", e.to_string());
            None
        }
    };

    let taglines = match obj.get("taglines") {
        Some(Value::Array(items)) => {
            let mut out = Vec::new();
            for (i, t) in items.iter().enumerate() {
                match t.as_str() {
                    Some(s) if !s.trim().is_empty() => out.push(s.to_string()),
                    _ => cx.violate(format!("$.taglines[{i}]"), "expected non-empty text"),
                }
            }
            Some(out)
        }
        Some(_) => {
            cx.violate("$.taglines", "expected an array of strings");
            None
        }
        None => {
            cx.violate("$.taglines", "missing");
            None
        }
    };

    let layout = match obj.get("layout") {
        None => {
            cx.violate("$.layout", "missing");
            None
        }
        Some(v) => match parse_value(v, "$.layout", ParseMode::Strict) {
            Ok(parsed) => Some(parsed.layout),
            Err(e) => {
                cx.violations.extend(e.violations);
                None
            }
        },
    };
    if let (Some(l), Some(t)) = (&layout, &taglines) {
        if l.tagline_count() != t.len() {
            cx.violate(
                "$.layout.graphic",
                format!("{} tagline boxes for {} taglines", l.tagline_count(), t.len()),
            );
        }
    }

    let occlusion = match serde_json::from_value::<OcclusionClass>(Value::Object(
        [("occlusion", obj.get("occlusion")), ("product_class", obj.get("product_class"))]
            .into_iter()
            .filter_map(|(k, v)| v.map(|v| (k.to_string(), v.clone())))
            .collect(),
    )) {
        Ok(o) if !o.product_class().trim().is_empty() => Some(o),
        Ok(_) => {
            cx.violate("$.product_class", "expected a non-empty string");
            None
        }
        Err(e) => {
            cx.violate("$.occlusion", format!("expected \"no_occ\" or \"allow_occ\" with a product_class: {e}"));
            None
        }
    };

    let fg_ratio = match obj.get("fg_ratio") {
        None | Some(Value::Null) => match (&layout, width, height) {
            (Some(l), Some(w), Some(h)) => {
                let b = l.subject().bbox();
                if b.w > 0.0 && b.h > 0.0 {
                    Some(b.w / b.h * f64::from(w) / f64::from(h))
                } else {
                    cx.violate("$.layout.subject", "degenerate subject box gives no foreground ratio");
                    None
                }
            }
            _ => None,
        },
        Some(v) => match v.as_f64() {
            Some(r) if r.is_finite() && r > 0.0 => Some(r),
            _ => {
                cx.violate("$.fg_ratio", "expected a positive number");
                None
            }
        },
    };

    if !cx.violations.is_empty() {
        return Err(SchemaViolation { violations: cx.violations }.into());
    }
    let unwrap = "checked above";
    Ok(Sample {
        id: id.expect(unwrap),
        image: image.expect(unwrap).0,
        mask: mask.expect(unwrap).0,
        background: background.map(|b| b.0),
        prompt: prompt.expect(unwrap),
        taglines: taglines.expect(unwrap),
        layout: layout.expect(unwrap),
        width: width.expect(unwrap),
        height: height.expect(unwrap),
        occlusion: occlusion.expect(unwrap),
        fg_ratio: fg_ratio.expect(unwrap),
    })
}

/// Reads the record file at `path` and loads it against its directory.
pub fn load_sample_file(path: &Path) -> Result<Sample> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    load_sample(&text, path.parent().unwrap_or(Path::new(".")))
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestFile {
    records: Vec<String>,
}

/// Record paths listed by a manifest, resolved against its directory.
pub fn read_manifest(path: &Path) -> Result<Vec<PathBuf>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let m: ManifestFile = serde_json::from_str(&text)
        .map_err(|e| SchemaViolation::single("$", format!("{}: {e}", path.display())))?;
    let dir = path.parent().unwrap_or(Path::new("."));
    Ok(m.records.iter().map(|r| dir.join(r)).collect())
}

/// Loads every record in the manifest, splitting valid samples from
/// rejected records.
pub fn load_dataset(manifest: &Path) -> Result<(Vec<Sample>, Vec<InvalidRecord>)> {
    let mut samples = Vec::new();
    let mut invalid = Vec::new();
    for record in read_manifest(manifest)? {
        match load_sample_file(&record) {
            Ok(s) => samples.push(s),
            Err(e) => invalid.push(InvalidRecord {
                record: record.display().to_string(),
                violations: match e {
                    Error::Schema(v) => v.violations,
                    other => vec![Violation::new("$", other.to_string())],
                },
            }),
        }
    }
    Ok((samples, invalid))
}
