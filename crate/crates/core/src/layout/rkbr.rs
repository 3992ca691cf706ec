//! Ratio-keeping box encoding for the subject and logo.
//!
//! The generator predicts only the centre and the height; the width follows
//! from `w = h * r1 / r2` so the pasted foreground keeps its native shape on
//! any canvas.

use super::{BBox, CanvasSpec};
use crate::{Error, Result, Warning};

#[derive(Debug, Clone, PartialEq)]
pub struct Encoded {
    pub bbox: BBox,
    pub warnings: Vec<Warning>,
}

impl Encoded {
    pub fn clamped(&self) -> bool {
        !self.warnings.is_empty()
    }
}

/// Encodes the subject box for `spec`'s foreground ratio.
pub fn rkbr_encode(center_x: f64, center_y: f64, h: f64, spec: &CanvasSpec) -> Result<Encoded> {
    rkbr_encode_ratio(center_x, center_y, h, spec.fg_ratio(), spec.canvas_ratio())
}

/// Encodes a box of pixel aspect `ratio` on a canvas of aspect `canvas_ratio`.
pub fn rkbr_encode_ratio(
    center_x: f64,
    center_y: f64,
    h: f64,
    ratio: f64,
    canvas_ratio: f64,
) -> Result<Encoded> {
    if !h.is_finite() || h <= 0.0 {
        return Err(Error::InvalidGeometry(format!("height {h} must be positive")));
    }
    if !(ratio > 0.0 && canvas_ratio > 0.0 && ratio.is_finite() && canvas_ratio.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "aspect ratios must be positive (got {ratio}, {canvas_ratio})"
        )));
    }
    if !center_x.is_finite() || !center_y.is_finite() {
        return Err(Error::InvalidGeometry("centre must be finite".into()));
    }
    let mut warnings = Vec::new();
    let mut clamp = |name: &str, v: f64| {
        let c = v.clamp(0.0, 1.0);
        if c != v {
            warnings.push(Warning::Clamped { path: name.to_string(), original: v, clamped: c });
        }
        c
    };
    let x = clamp("x", center_x);
    let y = clamp("y", center_y);
    let h = clamp("h", h);
    let w = clamp("w", h * ratio / canvas_ratio);
    Ok(Encoded { bbox: BBox { x, y, w, h }, warnings })
}

/// Rendered pixel aspect ratio of `b`: `(w / h) * r2`.
pub fn rkbr_decode_ratio(b: &BBox, spec: &CanvasSpec) -> Result<f64> {
    if b.h <= 0.0 {
        return Err(Error::InvalidGeometry("box height is zero".into()));
    }
    Ok(b.w / b.h * spec.canvas_ratio())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::OcclusionClass;
    use proptest::prelude::*;

    fn spec(w: u32, h: u32, r1: f64) -> CanvasSpec {
        CanvasSpec::new(w, h, r1, OcclusionClass::NoOcc("cup".into()), None).unwrap()
    }

    #[test]
    fn identity_when_ratios_match() {
        let e = rkbr_encode(0.5, 0.5, 0.4, &spec(1000, 1000, 1.0)).unwrap();
        assert_eq!(e.bbox.w, 0.4);
        assert!(!e.clamped());
    }

    #[test]
    fn portrait_canvas_widens_box() {
        let e = rkbr_encode(0.5, 0.62, 0.5, &spec(684, 1000, 1.0)).unwrap();
        // 0.5 * 1.0 / 0.684
        assert!((e.bbox.w - 0.730_994_152_046_783_6).abs() < 1e-12);
    }

    #[test]
    fn wide_foreground_clamps_with_warning() {
        let e = rkbr_encode(0.5, 0.5, 0.9, &spec(1000, 1000, 2.0)).unwrap();
        assert_eq!(e.bbox.w, 1.0);
        assert!(e.clamped());
    }

    #[test]
    fn non_positive_height_rejected() {
        assert!(matches!(
            rkbr_encode(0.5, 0.5, 0.0, &spec(10, 10, 1.0)),
            Err(Error::InvalidGeometry(_))
        ));
        assert!(rkbr_encode(0.5, 0.5, -0.2, &spec(10, 10, 1.0)).is_err());
    }

    #[test]
    fn decode_examples() {
        let s = spec(684, 1000, 1.0);
        let sq = BBox::new(0.5, 0.5, 0.3, 0.3).unwrap();
        assert!((rkbr_decode_ratio(&sq, &s).unwrap() - 0.684).abs() < 1e-12);
        let wide = BBox::new(0.5, 0.5, 0.5, 0.25).unwrap();
        assert_eq!(rkbr_decode_ratio(&wide, &spec(10, 10, 1.0)).unwrap(), 2.0);
        let flat = BBox { x: 0.5, y: 0.5, w: 0.1, h: 0.0 };
        assert!(rkbr_decode_ratio(&flat, &s).is_err());
    }

    #[test]
    fn round_trip_fixed_case() {
        let s = spec(1000, 1000, 0.75);
        let e = rkbr_encode(0.5, 0.5, 0.3, &s).unwrap();
        assert!((rkbr_decode_ratio(&e.bbox, &s).unwrap() - 0.75).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn decode_inverts_encode(h in 0.01f64..1.0, r1 in 0.2f64..3.0, w in 200u32..2000, ht in 200u32..2000) {
            let s = spec(w, ht, r1);
            let e = rkbr_encode(0.5, 0.5, h, &s).unwrap();
            prop_assume!(!e.clamped());
            let back = rkbr_decode_ratio(&e.bbox, &s).unwrap();
            prop_assert!((back - r1).abs() <= 1e-9 * r1.max(1.0));
        }
    }
}
