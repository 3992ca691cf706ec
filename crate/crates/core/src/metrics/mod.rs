//! Layout quality metrics.
//!
//! Graphic metrics (validity, overlap, alignment, underlay) look only at
//! graphic elements. Content metrics (utility, occlusion, unreadability)
//! relate them to the subject region and the background image. Areas are
//! computed exactly by [`geometry`]; [`raster`] offers a pixel-sampling
//! cross-check.

mod content;
pub mod geometry;
mod graphic;
pub mod raster;
mod report;

pub use content::{occlusion, unreadability, utility};
pub use geometry::union_area;
pub use graphic::{alignment, is_valid, overlap, underlay_scores, validity, VALIDITY_THRESHOLD};
pub use report::{aggregate, fg_ratio_correct, fg_ratio_correctness, fg_ratio_error, tagline_match_rate, Aggregate, MetricsReport, SampleReport, FRC_TOLERANCE};

use crate::layout::{BBox, Layout, Rect};
use crate::{Error, Result, Warning};
use image::{GrayImage, RgbImage};
use serde::Serialize;

/// Binary subject mask at canvas resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    width: u32,
    height: u32,
    data: Vec<bool>,
}

/// Grey levels at or above this are treated as subject.
pub const MASK_THRESHOLD: u8 = 128;

impl Mask {
    pub fn new(width: u32, height: u32, data: Vec<bool>) -> Result<Self> {
        if data.len() != width as usize * height as usize {
            return Err(Error::InvalidInput(format!(
                "mask data has {} entries for {width}x{height}",
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn from_luma(image: &GrayImage) -> Self {
        let data = image.pixels().map(|p| p[0] >= MASK_THRESHOLD).collect();
        Self { width: image.width(), height: image.height(), data }
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn get(&self, c: u32, r: u32) -> bool {
        self.data[(r * self.width + c) as usize]
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&v| v).count()
    }

    /// Disjoint normalized rectangles whose union is the mask. Horizontal
    /// runs are merged with identical runs on the following rows.
    pub fn rects(&self) -> Vec<Rect> {
        let (w, h) = (self.width as usize, self.height as usize);
        let (wf, hf) = (self.width as f64, self.height as f64);
        let mut done = Vec::new();
        // (c0, c1, first row) for runs still extending downwards
        let mut open: Vec<(usize, usize, usize)> = Vec::new();
        for r in 0..=h {
            let mut runs = Vec::new();
            if r < h {
                let row = &self.data[r * w..(r + 1) * w];
                let mut c = 0;
                while c < w {
                    if row[c] {
                        let start = c;
                        while c < w && row[c] {
                            c += 1;
                        }
                        runs.push((start, c));
                    } else {
                        c += 1;
                    }
                }
            }
            let mut next = Vec::with_capacity(runs.len());
            for (c0, c1) in runs {
                match open.iter().position(|&(a, b, _)| a == c0 && b == c1) {
                    Some(i) => next.push(open.swap_remove(i)),
                    None => next.push((c0, c1, r)),
                }
            }
            for (c0, c1, r0) in open {
                done.push(Rect::new(c0 as f64 / wf, r0 as f64 / hf, c1 as f64 / wf, r as f64 / hf));
            }
            open = next;
        }
        done
    }
}

/// The product region used by content metrics.
#[derive(Debug, Clone, PartialEq)]
pub enum SubjectRegion {
    BBox(BBox),
    Mask(Mask),
}

impl SubjectRegion {
    pub fn rects(&self) -> Vec<Rect> {
        match self {
            SubjectRegion::BBox(b) => {
                let r = b.clipped();
                if r.is_empty() { vec![] } else { vec![r] }
            }
            SubjectRegion::Mask(m) => m.rects(),
        }
    }

    /// Checks a mask against the canvas size; boxes always fit.
    pub fn check_canvas(&self, canvas: (u32, u32)) -> Result<()> {
        match self {
            SubjectRegion::Mask(m) if m.dimensions() != canvas => Err(Error::InvalidInput(format!(
                "mask is {:?} but canvas is {canvas:?}",
                m.dimensions()
            ))),
            _ => Ok(()),
        }
    }
}

/// All per-layout metrics. Optional entries are absent when undefined.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayoutMetrics {
    pub val: f64,
    pub ove: f64,
    pub ali: f64,
    pub und_l: Option<f64>,
    pub und_s: Option<f64>,
    pub uti: f64,
    pub occ: f64,
    pub rea: Option<f64>,
}

/// Computes every per-layout metric. Rea needs a background image.
pub fn evaluate_layout(
    layout: &Layout,
    subject: &SubjectRegion,
    background: Option<&RgbImage>,
    canvas: (u32, u32),
) -> Result<(LayoutMetrics, Vec<Warning>)> {
    subject.check_canvas(canvas)?;
    let mut warnings = Vec::new();
    let (uti, w) = utility(layout, subject);
    warnings.extend(w);
    let und = underlay_scores(layout);
    let rea = match background {
        Some(bg) => unreadability(layout, bg, canvas)?,
        None => None,
    };
    let metrics = LayoutMetrics {
        val: validity(layout),
        ove: overlap(layout),
        ali: alignment(layout),
        und_l: und.map(|u| u.0),
        und_s: und.map(|u| u.1),
        uti,
        occ: occlusion(layout, subject),
        rea,
    };
    Ok((metrics, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mask_rects_cover_exactly_the_set_pixels() {
        // an L shape plus an isolated pixel
        let rows = ["##..", "##..", "###.", "...#"];
        let data: Vec<bool> = rows.iter().flat_map(|r| r.chars().map(|c| c == '#')).collect();
        let mask = Mask::new(4, 4, data).unwrap();
        let rects = mask.rects();
        let area: f64 = rects.iter().map(Rect::area).sum();
        assert!((area - mask.count() as f64 / 16.0).abs() < 1e-15);
        for r in 0..4 {
            for c in 0..4 {
                let (x, y) = ((c as f64 + 0.5) / 4.0, (r as f64 + 0.5) / 4.0);
                let hits = rects.iter().filter(|q| q.x0 < x && x < q.x1 && q.y0 < y && y < q.y1).count();
                assert_eq!(hits, usize::from(mask.get(c, r)), "pixel ({c},{r})");
            }
        }
        // the 2-wide run on rows 0..2 merges into one rect
        assert_eq!(rects.len(), 3);
    }

    #[test]
    fn mask_size_must_match_canvas() {
        let s = SubjectRegion::Mask(Mask::new(2, 2, vec![true; 4]).unwrap());
        assert!(s.check_canvas((2, 2)).is_ok());
        assert!(s.check_canvas((4, 4)).is_err());
        assert!(Mask::new(2, 2, vec![true; 3]).is_err());
    }
}
