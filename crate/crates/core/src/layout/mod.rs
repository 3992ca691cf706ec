//! Layout domain model.
//!
//! A [`Layout`] has three parts: the product subject, the nongraphic
//! elements that the background generator should synthesise, and the
//! graphic elements (logo, taglines, underlays) drawn after generation.
//! Every box uses the centre-point convention `[x, y, w, h]` in normalized
//! canvas units.

mod cclp;
mod json;
mod rkbr;

pub use cclp::cclp_condition;
pub(crate) use json::parse_value;
pub use json::{parse_layout, parse_layout_with, serialize_layout, to_json_value, ParseMode, ParsedLayout};
pub use rkbr::{rkbr_decode_ratio, rkbr_encode, rkbr_encode_ratio, Encoded};

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

/// Corner-form rectangle in normalized units, `x0 <= x1`, `y0 <= y1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> f64 {
        (self.x1 - self.x0).max(0.0)
    }

    pub fn height(&self) -> f64 {
        (self.y1 - self.y0).max(0.0)
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn is_empty(&self) -> bool {
        self.x1 <= self.x0 || self.y1 <= self.y0
    }

    pub fn intersect(&self, other: &Rect) -> Option<Rect> {
        let r = Rect::new(
            self.x0.max(other.x0),
            self.y0.max(other.y0),
            self.x1.min(other.x1),
            self.y1.min(other.y1),
        );
        (!r.is_empty()).then_some(r)
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        self.x0 <= other.x0 && self.y0 <= other.y0 && self.x1 >= other.x1 && self.y1 >= other.y1
    }
}

/// Normalized centre-point box. All fields lie in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Result<Self> {
        for (name, v) in [("x", x), ("y", y), ("w", w), ("h", h)] {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidGeometry(format!("{name} = {v} is outside [0, 1]")));
            }
        }
        Ok(Self { x, y, w, h })
    }

    /// Builds a box from top-left and bottom-right corners.
    pub fn from_corners(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        Self::new((x0 + x1) / 2.0, (y0 + y1) / 2.0, x1 - x0, y1 - y0)
    }

    pub fn left(&self) -> f64 {
        self.x - self.w / 2.0
    }

    pub fn top(&self) -> f64 {
        self.y - self.h / 2.0
    }

    pub fn right(&self) -> f64 {
        self.x + self.w / 2.0
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h / 2.0
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    /// Corner rectangle, not clipped.
    pub fn rect(&self) -> Rect {
        Rect::new(self.left(), self.top(), self.right(), self.bottom())
    }

    /// Corner rectangle clipped to the unit canvas.
    pub fn clipped(&self) -> Rect {
        Rect::new(
            self.left().clamp(0.0, 1.0),
            self.top().clamp(0.0, 1.0),
            self.right().clamp(0.0, 1.0),
            self.bottom().clamp(0.0, 1.0),
        )
    }

    /// Pixel columns and rows whose centres fall inside the clipped box on a
    /// `width x height` canvas, as half-open ranges.
    pub fn pixel_span(&self, width: u32, height: u32) -> PixelSpan {
        let r = self.clipped();
        let span = |a: f64, b: f64, n: u32| {
            let n_f = f64::from(n);
            let lo = (a * n_f - 0.5).ceil().max(0.0) as u32;
            let hi = (b * n_f - 0.5).ceil().clamp(0.0, n_f) as u32;
            (lo.min(n), hi.max(lo.min(n)))
        };
        let (c0, c1) = span(r.x0, r.x1, width);
        let (r0, r1) = span(r.y0, r.y1, height);
        PixelSpan { c0, c1, r0, r1 }
    }
}

/// Half-open pixel ranges `[c0, c1) x [r0, r1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PixelSpan {
    pub c0: u32,
    pub c1: u32,
    pub r0: u32,
    pub r1: u32,
}

impl PixelSpan {
    pub fn is_empty(&self) -> bool {
        self.c0 >= self.c1 || self.r0 >= self.r1
    }

    pub fn width(&self) -> u32 {
        self.c1.saturating_sub(self.c0)
    }

    pub fn height(&self) -> u32 {
        self.r1.saturating_sub(self.r0)
    }

    pub fn contains(&self, c: u32, r: u32) -> bool {
        (self.c0..self.c1).contains(&c) && (self.r0..self.r1).contains(&r)
    }

    pub fn pixels(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (self.r0..self.r1).flat_map(move |r| (self.c0..self.c1).map(move |c| (c, r)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ElementKind {
    Subject,
    /// An object synthesised in the background, named by its instance label.
    Nongraphic(String),
    Logo,
    Tagline,
    Underlay,
}

impl ElementKind {
    pub fn is_graphic(&self) -> bool {
        matches!(self, ElementKind::Logo | ElementKind::Tagline | ElementKind::Underlay)
    }

    /// Name used in the JSON `type` key.
    pub fn type_name(&self) -> &str {
        match self {
            ElementKind::Subject => "subject",
            ElementKind::Nongraphic(name) => name,
            ElementKind::Logo => "Logo",
            ElementKind::Tagline => "Tagline",
            ElementKind::Underlay => "Underlay",
        }
    }

    fn graphic_rank(&self) -> u8 {
        match self {
            ElementKind::Logo => 0,
            ElementKind::Tagline => 1,
            ElementKind::Underlay => 2,
            _ => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    kind: ElementKind,
    bbox: BBox,
    content: Option<String>,
}

impl Element {
    /// Builds an element; `content` must be given exactly for taglines.
    pub fn new(kind: ElementKind, bbox: BBox, content: Option<String>) -> Result<Self> {
        match (&kind, &content) {
            (ElementKind::Tagline, None) => {
                return Err(Error::InvalidInput("tagline requires content".into()))
            }
            (ElementKind::Tagline, Some(_)) => {}
            (_, Some(_)) => {
                return Err(Error::InvalidInput(format!(
                    "content is only allowed on taglines, not {}",
                    kind.type_name()
                )))
            }
            (ElementKind::Nongraphic(name), None) if name.trim().is_empty() => {
                return Err(Error::InvalidInput("nongraphic element needs a name".into()))
            }
            _ => {}
        }
        Ok(Self { kind, bbox, content })
    }

    pub fn subject(bbox: BBox) -> Self {
        Self { kind: ElementKind::Subject, bbox, content: None }
    }

    pub fn tagline(bbox: BBox, content: impl Into<String>) -> Self {
        Self { kind: ElementKind::Tagline, bbox, content: Some(content.into()) }
    }

    pub fn underlay(bbox: BBox) -> Self {
        Self { kind: ElementKind::Underlay, bbox, content: None }
    }

    pub fn logo(bbox: BBox) -> Self {
        Self { kind: ElementKind::Logo, bbox, content: None }
    }

    pub fn nongraphic(name: impl Into<String>, bbox: BBox) -> Result<Self> {
        Self::new(ElementKind::Nongraphic(name.into()), bbox, None)
    }

    pub fn kind(&self) -> &ElementKind {
        &self.kind
    }

    pub fn bbox(&self) -> &BBox {
        &self.bbox
    }

    pub fn content(&self) -> Option<&str> {
        self.content.as_deref()
    }

    pub fn is_tagline(&self) -> bool {
        self.kind == ElementKind::Tagline
    }

    pub fn is_underlay(&self) -> bool {
        self.kind == ElementKind::Underlay
    }

    pub fn is_logo(&self) -> bool {
        self.kind == ElementKind::Logo
    }

    pub fn with_bbox(&self, bbox: BBox) -> Self {
        Self { bbox, ..self.clone() }
    }
}

/// Raster-scan order: top-left y, then top-left x, then Logo < Tagline <
/// Underlay. Remaining fields only separate otherwise identical boxes.
pub fn raster_cmp(a: &Element, b: &Element) -> Ordering {
    a.bbox
        .top()
        .total_cmp(&b.bbox.top())
        .then(a.bbox.left().total_cmp(&b.bbox.left()))
        .then(a.kind.graphic_rank().cmp(&b.kind.graphic_rank()))
        .then_with(|| a.content.cmp(&b.content))
        .then(a.bbox.w.total_cmp(&b.bbox.w))
        .then(a.bbox.h.total_cmp(&b.bbox.h))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    subject: Element,
    nongraphic: Vec<Element>,
    graphic: Vec<Element>,
}

impl Layout {
    /// Validates element kinds and sorts the graphic list into raster order.
    pub fn new(subject: Element, nongraphic: Vec<Element>, graphic: Vec<Element>) -> Result<Self> {
        Self::new_reporting(subject, nongraphic, graphic).map(|(l, _)| l)
    }

    /// Like [`Layout::new`] but also reports whether the graphic list had to
    /// be reordered.
    pub fn new_reporting(
        subject: Element,
        nongraphic: Vec<Element>,
        mut graphic: Vec<Element>,
    ) -> Result<(Self, bool)> {
        if subject.kind != ElementKind::Subject {
            return Err(Error::InvalidInput("subject element must have kind Subject".into()));
        }
        if let Some(e) = nongraphic.iter().find(|e| !matches!(e.kind, ElementKind::Nongraphic(_))) {
            return Err(Error::InvalidInput(format!(
                "nongraphic list holds a {} element",
                e.kind.type_name()
            )));
        }
        if let Some(e) = graphic.iter().find(|e| !e.kind.is_graphic()) {
            return Err(Error::InvalidInput(format!(
                "graphic list holds a {} element",
                e.kind.type_name()
            )));
        }
        let sorted = graphic.windows(2).all(|w| raster_cmp(&w[0], &w[1]) != Ordering::Greater);
        if !sorted {
            graphic.sort_by(raster_cmp);
        }
        Ok((Self { subject, nongraphic, graphic }, !sorted))
    }

    pub fn subject(&self) -> &Element {
        &self.subject
    }

    pub fn nongraphic(&self) -> &[Element] {
        &self.nongraphic
    }

    pub fn graphic(&self) -> &[Element] {
        &self.graphic
    }

    pub fn taglines(&self) -> impl Iterator<Item = &Element> {
        self.graphic.iter().filter(|e| e.is_tagline())
    }

    pub fn underlays(&self) -> impl Iterator<Item = &Element> {
        self.graphic.iter().filter(|e| e.is_underlay())
    }

    pub fn tagline_count(&self) -> usize {
        self.taglines().count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "occlusion", content = "product_class", rename_all = "snake_case")]
pub enum OcclusionClass {
    /// Taglines must never cover the product.
    NoOcc(String),
    /// Taglines may partially cover the product.
    AllowOcc(String),
}

impl OcclusionClass {
    pub fn product_class(&self) -> &str {
        match self {
            OcclusionClass::NoOcc(c) | OcclusionClass::AllowOcc(c) => c,
        }
    }

    pub fn allows_occlusion(&self) -> bool {
        matches!(self, OcclusionClass::AllowOcc(_))
    }
}

/// Target canvas plus the aspect ratios layout generation must preserve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanvasSpec {
    width: u32,
    height: u32,
    fg_ratio: f64,
    occlusion: OcclusionClass,
    logo_ratio: Option<f64>,
}

impl CanvasSpec {
    pub fn new(
        width: u32,
        height: u32,
        fg_ratio: f64,
        occlusion: OcclusionClass,
        logo_ratio: Option<f64>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput(format!("canvas {width}x{height} must be positive")));
        }
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(fg_ratio) {
            return Err(Error::InvalidInput(format!("foreground ratio {fg_ratio} must be positive")));
        }
        if let Some(r) = logo_ratio {
            if !positive(r) {
                return Err(Error::InvalidInput(format!("logo ratio {r} must be positive")));
            }
        }
        Ok(Self { width, height, fg_ratio, occlusion, logo_ratio })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Canvas aspect ratio `width / height` (r2).
    pub fn canvas_ratio(&self) -> f64 {
        f64::from(self.width) / f64::from(self.height)
    }

    /// Foreground aspect ratio (r1).
    pub fn fg_ratio(&self) -> f64 {
        self.fg_ratio
    }

    pub fn occlusion(&self) -> &OcclusionClass {
        &self.occlusion
    }

    pub fn logo_ratio(&self) -> Option<f64> {
        self.logo_ratio
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptPair {
    #[serde(rename = "foreground")]
    pub fore: String,
    #[serde(rename = "background")]
    pub back: String,
}

impl PromptPair {
    pub fn new(fore: impl Into<String>, back: impl Into<String>) -> Result<Self> {
        let pair = Self { fore: fore.into(), back: back.into() };
        pair.validate()?;
        Ok(pair)
    }

    pub fn validate(&self) -> Result<()> {
        if self.fore.trim().is_empty() || self.back.trim().is_empty() {
            return Err(Error::InvalidInput("prompt descriptions must be non-empty".into()));
        }
        Ok(())
    }
}
