//! Exact rectangle-union geometry by coordinate compression.

use crate::layout::{BBox, Rect};

/// Area of the union of `boxes`, each clipped to the unit canvas.
pub fn union_area(boxes: &[BBox]) -> f64 {
    let rects: Vec<Rect> = boxes.iter().map(BBox::clipped).collect();
    union_area_rects(&rects)
}

/// Area of the union of `rects`.
///
/// Sweeps the compressed x coordinates; within each vertical slab the
/// covering y intervals are merged and measured.
pub fn union_area_rects(rects: &[Rect]) -> f64 {
    let rects: Vec<&Rect> = rects.iter().filter(|r| !r.is_empty()).collect();
    match rects.len() {
        0 => return 0.0,
        1 => return rects[0].area(),
        _ => {}
    }
    let mut xs: Vec<f64> = rects.iter().flat_map(|r| [r.x0, r.x1]).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();

    let mut intervals: Vec<(f64, f64)> = Vec::with_capacity(rects.len());
    let mut area = 0.0;
    for slab in xs.windows(2) {
        let (xa, xb) = (slab[0], slab[1]);
        intervals.clear();
        intervals.extend(
            rects
                .iter()
                .filter(|r| r.x0 <= xa && r.x1 >= xb)
                .map(|r| (r.y0, r.y1)),
        );
        area += (xb - xa) * merged_length(&mut intervals);
    }
    area
}

fn merged_length(intervals: &mut [(f64, f64)]) -> f64 {
    intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut total = 0.0;
    let mut current: Option<(f64, f64)> = None;
    for &(lo, hi) in intervals.iter() {
        current = match current {
            Some((clo, chi)) if lo <= chi => Some((clo, chi.max(hi))),
            Some((clo, chi)) => {
                total += chi - clo;
                Some((lo, hi))
            }
            None => Some((lo, hi)),
        };
    }
    if let Some((lo, hi)) = current {
        total += hi - lo;
    }
    total
}

/// Area of `union(rects) ∩ union(region)` where `region` is a set of
/// pairwise-disjoint rectangles.
pub fn union_area_within(rects: &[Rect], region: &[Rect]) -> f64 {
    let mut clipped = Vec::with_capacity(rects.len());
    region
        .iter()
        .map(|cell| {
            clipped.clear();
            clipped.extend(rects.iter().filter_map(|r| r.intersect(cell)));
            union_area_rects(&clipped)
        })
        .sum()
}

pub fn iou(a: &Rect, b: &Rect) -> f64 {
    let inter = a.intersect(b).map_or(0.0, |r| r.area());
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(x0: f64, y0: f64, x1: f64, y1: f64) -> Rect {
        Rect::new(x0, y0, x1, y1)
    }

    #[test]
    fn empty_and_disjoint() {
        assert_eq!(union_area(&[]), 0.0);
        let a = BBox::new(0.25, 0.25, 0.5, 0.5).unwrap();
        let b = BBox::new(0.75, 0.75, 0.5, 0.5).unwrap();
        assert!((union_area(&[a, b]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn nested_and_overlapping() {
        assert!((union_area_rects(&[r(0.0, 0.0, 1.0, 1.0), r(0.2, 0.2, 0.4, 0.4)]) - 1.0).abs() < 1e-15);
        // two 0.5x0.5 squares sharing a 0.25x0.5 strip
        let u = union_area_rects(&[r(0.0, 0.0, 0.5, 0.5), r(0.25, 0.0, 0.75, 0.5)]);
        assert!((u - 0.375).abs() < 1e-15);
    }

    #[test]
    fn clipping_applies() {
        let edge = BBox::new(0.0, 0.5, 0.4, 0.4).unwrap();
        assert!((union_area(&[edge]) - 0.08).abs() < 1e-15);
    }

    #[test]
    fn within_region() {
        let rects = [r(0.0, 0.0, 0.5, 0.5), r(0.25, 0.25, 0.75, 0.75)];
        let region = [r(0.0, 0.0, 1.0, 0.3), r(0.0, 0.3, 1.0, 1.0)];
        let total = union_area_rects(&rects);
        assert!((union_area_within(&rects, &region) - total).abs() < 1e-15);
    }

    #[test]
    fn iou_cases() {
        assert_eq!(iou(&r(0.0, 0.0, 0.4, 0.4), &r(0.0, 0.0, 0.4, 0.4)), 1.0);
        assert_eq!(iou(&r(0.0, 0.0, 0.2, 0.2), &r(0.5, 0.5, 0.6, 0.6)), 0.0);
        // shifted by half-width: inter 0.2*0.4, union 2*0.16 - 0.08
        assert!((iou(&r(0.0, 0.0, 0.4, 0.4), &r(0.2, 0.0, 0.6, 0.4)) - 1.0 / 3.0).abs() < 1e-15);
    }

    fn arb_rect() -> impl Strategy<Value = Rect> {
        (0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0)
            .prop_map(|(a, b, c, d)| r(a.min(c), b.min(d), a.max(c), b.max(d)))
    }

    proptest! {
        #[test]
        fn monotone_and_subadditive(rects in prop::collection::vec(arb_rect(), 0..12), extra in arb_rect()) {
            let base = union_area_rects(&rects);
            let mut more = rects.clone();
            more.push(extra);
            let grown = union_area_rects(&more);
            prop_assert!(grown + 1e-12 >= base);
            let sum: f64 = more.iter().map(Rect::area).sum();
            prop_assert!(grown <= sum + 1e-12);
            prop_assert!(grown <= 1.0 + 1e-12);
        }

        #[test]
        fn order_independent(mut rects in prop::collection::vec(arb_rect(), 0..10)) {
            let a = union_area_rects(&rects);
            rects.reverse();
            prop_assert!((a - union_area_rects(&rects)).abs() < 1e-12);
        }
    }
}
