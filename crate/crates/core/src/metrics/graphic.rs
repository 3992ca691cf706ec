//! Metrics over the relationships between graphic elements.

use super::geometry::iou;
use crate::layout::{Element, Layout, Rect};

/// Elements narrower or shorter than this (normalized) are invalid.
pub const VALIDITY_THRESHOLD: f64 = 0.001;

pub fn is_valid(e: &Element) -> bool {
    e.bbox().w > VALIDITY_THRESHOLD && e.bbox().h > VALIDITY_THRESHOLD
}

/// Valid graphic elements, in layout order.
pub fn valid_graphic(layout: &Layout) -> impl Iterator<Item = &Element> {
    layout.graphic().iter().filter(|e| is_valid(e))
}

/// Fraction of graphic elements above the size threshold; 1.0 when there
/// are none.
pub fn validity(layout: &Layout) -> f64 {
    let total = layout.graphic().len();
    if total == 0 {
        return 1.0;
    }
    let valid = layout.graphic().iter().filter(|e| is_valid(e)).count();
    valid as f64 / total as f64
}

/// Mean IoU over unordered pairs of valid non-underlay graphic elements.
pub fn overlap(layout: &Layout) -> f64 {
    let rects: Vec<Rect> = valid_graphic(layout)
        .filter(|e| !e.is_underlay())
        .map(|e| e.bbox().clipped())
        .collect();
    if rects.len() < 2 {
        return 0.0;
    }
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for i in 0..rects.len() {
        for j in i + 1..rects.len() {
            sum += iou(&rects[i], &rects[j]);
            pairs += 1;
        }
    }
    sum / pairs as f64
}

fn axes(r: &Rect) -> [f64; 6] {
    [
        r.x0,
        (r.x0 + r.x1) / 2.0,
        r.x1,
        r.y0,
        (r.y0 + r.y1) / 2.0,
        r.y1,
    ]
}

/// Mean over valid graphic elements of the smallest same-axis coordinate
/// gap to any other valid graphic element, over left, x-centre, right,
/// top, y-centre and bottom.
pub fn alignment(layout: &Layout) -> f64 {
    let coords: Vec<[f64; 6]> = valid_graphic(layout).map(|e| axes(&e.bbox().clipped())).collect();
    if coords.len() < 2 {
        return 0.0;
    }
    let total: f64 = coords
        .iter()
        .enumerate()
        .map(|(i, a)| {
            coords
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .flat_map(|(_, b)| a.iter().zip(b).map(|(p, q)| (p - q).abs()))
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    total / coords.len() as f64
}

/// Loose and strict underlay scores, or `None` without valid underlays.
///
/// Loose: for each underlay, the best fraction of a tagline's area it
/// covers. Strict: 1 if it fully contains some tagline.
pub fn underlay_scores(layout: &Layout) -> Option<(f64, f64)> {
    let taglines: Vec<Rect> = valid_graphic(layout)
        .filter(|e| e.is_tagline())
        .map(|e| e.bbox().clipped())
        .collect();
    let underlays: Vec<Rect> = valid_graphic(layout)
        .filter(|e| e.is_underlay())
        .map(|e| e.bbox().clipped())
        .collect();
    if underlays.is_empty() {
        return None;
    }
    let (mut loose, mut strict) = (0.0, 0.0);
    for u in &underlays {
        loose += taglines
            .iter()
            .filter(|t| t.area() > 0.0)
            .map(|t| u.intersect(t).map_or(0.0, |r| r.area()) / t.area())
            .fold(0.0, f64::max);
        if taglines.iter().any(|t| u.contains_rect(t)) {
            strict += 1.0;
        }
    }
    let n = underlays.len() as f64;
    Some((loose / n, strict / n))
}
