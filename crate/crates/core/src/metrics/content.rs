//! Metrics relating graphic elements to the subject and background.

use super::geometry::{union_area_rects, union_area_within};
use super::graphic::valid_graphic;
use super::SubjectRegion;
use crate::layout::{Layout, Rect};
use crate::{Error, Result, Warning};
use image::RgbImage;

fn graphic_rects(layout: &Layout) -> Vec<Rect> {
    valid_graphic(layout).map(|e| e.bbox().clipped()).collect()
}

/// Share of the non-subject canvas covered by valid graphic elements.
///
/// Returns 0 with [`Warning::DegenerateSubject`] when the subject covers
/// the whole canvas.
pub fn utility(layout: &Layout, subject: &SubjectRegion) -> (f64, Option<Warning>) {
    let region = subject.rects();
    let free = 1.0 - union_area_rects(&region);
    if free <= 1e-12 {
        return (0.0, Some(Warning::DegenerateSubject));
    }
    let rects = graphic_rects(layout);
    let outside = union_area_rects(&rects) - union_area_within(&rects, &region);
    ((outside.max(0.0) / free).clamp(0.0, 1.0), None)
}

/// Share of the valid graphic union lying on the subject.
pub fn occlusion(layout: &Layout, subject: &SubjectRegion) -> f64 {
    let rects = graphic_rects(layout);
    let total = union_area_rects(&rects);
    if total <= 0.0 {
        return 0.0;
    }
    (union_area_within(&rects, &subject.rects()) / total).clamp(0.0, 1.0)
}

const LUMA: [f64; 3] = [0.299, 0.587, 0.114];
/// Largest possible central-difference gradient magnitude on 8-bit input.
const MAX_GRADIENT: f64 = 127.5 * std::f64::consts::SQRT_2;

fn grayscale(image: &RgbImage) -> Vec<f64> {
    image
        .pixels()
        .map(|p| LUMA[0] * f64::from(p[0]) + LUMA[1] * f64::from(p[1]) + LUMA[2] * f64::from(p[2]))
        .collect()
}

/// Mean normalized gradient magnitude of the background under the valid
/// taglines, or `None` when no tagline covers a pixel.
pub fn unreadability(layout: &Layout, background: &RgbImage, canvas: (u32, u32)) -> Result<Option<f64>> {
    if background.dimensions() != canvas {
        return Err(Error::InvalidInput(format!(
            "background is {:?} but canvas is {:?}",
            background.dimensions(),
            canvas
        )));
    }
    let (w, h) = canvas;
    let gray = grayscale(background);
    let at = |c: i64, r: i64| {
        let c = c.clamp(0, i64::from(w) - 1) as usize;
        let r = r.clamp(0, i64::from(h) - 1) as usize;
        gray[r * w as usize + c]
    };
    let mut scores = Vec::new();
    for t in valid_graphic(layout).filter(|e| e.is_tagline()) {
        let span = t.bbox().pixel_span(w, h);
        if span.is_empty() {
            continue;
        }
        let sum: f64 = span
            .pixels()
            .map(|(c, r)| {
                let (c, r) = (i64::from(c), i64::from(r));
                let gx = (at(c + 1, r) - at(c - 1, r)) / 2.0;
                let gy = (at(c, r + 1) - at(c, r - 1)) / 2.0;
                gx.hypot(gy) / MAX_GRADIENT
            })
            .sum();
        scores.push(sum / f64::from(span.width() * span.height()));
    }
    Ok((!scores.is_empty()).then(|| scores.iter().sum::<f64>() / scores.len() as f64))
}
