//! Pixel-sampling estimates of the geometric metrics.
//!
//! A pixel belongs to a rectangle when its centre does. Each row is handled
//! as a set of merged column intervals, so a 2000x2000 grid stays cheap.
//! Used to cross-check the exact sweep results.

use super::SubjectRegion;
use crate::layout::{Layout, Rect};
use serde::Serialize;

/// Column range `[lo, hi)` of pixel centres inside `[a, b)` on `n` columns.
fn centre_range(a: f64, b: f64, n: usize) -> (usize, usize) {
    let nf = n as f64;
    let lo = (a * nf - 0.5).ceil().clamp(0.0, nf) as usize;
    let hi = (b * nf - 0.5).ceil().clamp(0.0, nf) as usize;
    (lo, hi.max(lo))
}

fn row_intervals(rects: &[Rect], y: f64, n: usize, out: &mut Vec<(usize, usize)>) {
    out.clear();
    out.extend(
        rects
            .iter()
            .filter(|r| r.y0 <= y && y < r.y1)
            .map(|r| centre_range(r.x0, r.x1, n))
            .filter(|(lo, hi)| hi > lo),
    );
    out.sort_unstable();
    let mut merged: Vec<(usize, usize)> = Vec::with_capacity(out.len());
    for &(lo, hi) in out.iter() {
        match merged.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => merged.push((lo, hi)),
        }
    }
    *out = merged;
}

fn overlap_len(a: &[(usize, usize)], b: &[(usize, usize)]) -> usize {
    let (mut i, mut j, mut total) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        let lo = a[i].0.max(b[j].0);
        let hi = a[i].1.min(b[j].1);
        if hi > lo {
            total += hi - lo;
        }
        if a[i].1 < b[j].1 { i += 1 } else { j += 1 }
    }
    total
}

/// Pixel counts of `union(a)`, `union(b)` and their intersection.
pub fn count_pixels(a: &[Rect], b: &[Rect], grid: usize) -> (usize, usize, usize) {
    let (mut ia, mut ib) = (Vec::new(), Vec::new());
    let (mut na, mut nb, mut nab) = (0, 0, 0);
    for row in 0..grid {
        let y = (row as f64 + 0.5) / grid as f64;
        row_intervals(a, y, grid, &mut ia);
        row_intervals(b, y, grid, &mut ib);
        na += ia.iter().map(|(lo, hi)| hi - lo).sum::<usize>();
        nb += ib.iter().map(|(lo, hi)| hi - lo).sum::<usize>();
        nab += overlap_len(&ia, &ib);
    }
    (na, nb, nab)
}

pub fn union_area(rects: &[Rect], grid: usize) -> f64 {
    let (n, _, _) = count_pixels(rects, &[], grid);
    n as f64 / (grid * grid) as f64
}

/// Raster estimates of the area-based metrics for one layout.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RasterEstimate {
    pub union_area: f64,
    pub ove: f64,
    pub uti: f64,
    pub occ: f64,
}

pub fn estimate(layout: &Layout, subject: &SubjectRegion, grid: usize) -> RasterEstimate {
    let valid: Vec<_> = super::graphic::valid_graphic(layout).collect();
    let rects: Vec<Rect> = valid.iter().map(|e| e.bbox().clipped()).collect();
    let subject_rects = subject.rects();
    let total = (grid * grid) as f64;
    let (n_g, n_s, n_gs) = count_pixels(&rects, &subject_rects, grid);

    let solid: Vec<Rect> = valid.iter().filter(|e| !e.is_underlay()).map(|e| e.bbox().clipped()).collect();
    let mut ove = 0.0;
    let mut pairs = 0;
    for i in 0..solid.len() {
        for j in i + 1..solid.len() {
            let (a, b, ab) = count_pixels(&solid[i..=i], &solid[j..=j], grid);
            let union = a + b - ab;
            ove += if union == 0 { 0.0 } else { ab as f64 / union as f64 };
            pairs += 1;
        }
    }
    let free = total - n_s as f64;
    RasterEstimate {
        union_area: n_g as f64 / total,
        ove: if pairs == 0 { 0.0 } else { ove / pairs as f64 },
        uti: if free <= 0.0 { 0.0 } else { (n_g - n_gs) as f64 / free },
        occ: if n_g == 0 { 0.0 } else { n_gs as f64 / n_g as f64 },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aligned_rects_are_exact() {
        let rects = [Rect::new(0.0, 0.0, 0.5, 0.5), Rect::new(0.25, 0.25, 0.75, 0.75)];
        assert_eq!(union_area(&rects, 100), 0.4375);
    }

    #[test]
    fn intersection_count() {
        let a = [Rect::new(0.0, 0.0, 0.5, 1.0)];
        let b = [Rect::new(0.25, 0.0, 1.0, 1.0)];
        assert_eq!(count_pixels(&a, &b, 8), (32, 48, 16));
    }
}
