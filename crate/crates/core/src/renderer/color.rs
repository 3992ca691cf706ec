use crate::layout::BBox;
use crate::{Error, Result};
use image::RgbImage;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

/// 8-bit sRGB colour, written as `#rrggbb` in JSON.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Color {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

pub const BLACK: Color = Color::new(0, 0, 0);
pub const WHITE: Color = Color::new(255, 255, 255);

impl Color {
    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Self { r, g, b }
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let hex = s.strip_prefix('#').unwrap_or(s);
        if hex.len() != 6 || !hex.chars().all(|c| c.is_ascii_hexdigit()) {
            return Err(Error::InvalidInput(format!("bad colour {s:?}, expected #rrggbb")));
        }
        let channel = |i: usize| u8::from_str_radix(&hex[i..i + 2], 16).expect("validated hex");
        Ok(Self::new(channel(0), channel(2), channel(4)))
    }

    pub fn channels(&self) -> [u8; 3] {
        [self.r, self.g, self.b]
    }

    /// WCAG relative luminance of the linearized channels.
    pub fn relative_luminance(&self) -> f64 {
        let lin = |c: u8| {
            let v = f64::from(c) / 255.0;
            if v <= 0.04045 {
                v / 12.92
            } else {
                ((v + 0.055) / 1.055).powf(2.4)
            }
        };
        0.2126 * lin(self.r) + 0.7152 * lin(self.g) + 0.0722 * lin(self.b)
    }

    /// Euclidean RGB distance scaled to `[0, 1]`.
    pub fn distance(&self, other: &Color) -> f64 {
        let d2: f64 = self
            .channels()
            .iter()
            .zip(other.channels())
            .map(|(&a, b)| (f64::from(a) - f64::from(b)).powi(2))
            .sum();
        d2.sqrt() / (255.0 * 3f64.sqrt())
    }
}

impl From<image::Rgb<u8>> for Color {
    fn from(p: image::Rgb<u8>) -> Self {
        Self::new(p[0], p[1], p[2])
    }
}

impl From<Color> for image::Rgb<u8> {
    fn from(c: Color) -> Self {
        image::Rgb([c.r, c.g, c.b])
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{:02x}{:02x}{:02x}", self.r, self.g, self.b)
    }
}

impl Serialize for Color {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Color {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Color::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

/// `(L_max + 0.05) / (L_min + 0.05)`, in `[1, 21]`.
pub fn contrast_ratio(a: Color, b: Color) -> f64 {
    let (la, lb) = (a.relative_luminance(), b.relative_luminance());
    let (hi, lo) = if la >= lb { (la, lb) } else { (lb, la) };
    (hi + 0.05) / (lo + 0.05)
}

/// Mean colour over the pixels whose centres lie in `b`.
pub fn region_mean_color(image: &RgbImage, b: &BBox) -> Result<Color> {
    region_mean_color_boxes(image, std::slice::from_ref(b))
}

/// Mean colour over the union of the boxes' pixels, each pixel counted once.
pub fn region_mean_color_boxes(image: &RgbImage, boxes: &[BBox]) -> Result<Color> {
    let (w, h) = image.dimensions();
    let spans: Vec<_> = boxes.iter().map(|b| b.pixel_span(w, h)).collect();
    let mut sum = [0u64; 3];
    let mut n = 0u64;
    for (i, span) in spans.iter().enumerate() {
        for (c, r) in span.pixels() {
            if spans[..i].iter().any(|s| s.contains(c, r)) {
                continue;
            }
            let p = image.get_pixel(c, r);
            for k in 0..3 {
                sum[k] += u64::from(p[k]);
            }
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::InvalidGeometry("region covers no pixels".into()));
    }
    let avg = |s: u64| ((s + n / 2) / n) as u8;
    Ok(Color::new(avg(sum[0]), avg(sum[1]), avg(sum[2])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn contrast_extremes() {
        assert_eq!(contrast_ratio(WHITE, WHITE), 1.0);
        // (1 + 0.05) / (0 + 0.05)
        assert!((contrast_ratio(BLACK, WHITE) - 21.0).abs() < 1e-12);
    }

    #[test]
    fn hex_round_trip() {
        let c = Color::from_hex("#1a2B3c").unwrap();
        assert_eq!(c, Color::new(0x1a, 0x2b, 0x3c));
        assert_eq!(c.to_string(), "#1a2b3c");
        assert!(Color::from_hex("#12345").is_err());
        assert!(Color::from_hex("zz0000").is_err());
    }

    #[test]
    fn uniform_region() {
        let img = RgbImage::from_pixel(10, 10, image::Rgb([255, 0, 0]));
        let b = BBox::new(0.5, 0.5, 0.4, 0.4).unwrap();
        assert_eq!(region_mean_color(&img, &b).unwrap(), Color::new(255, 0, 0));
    }

    #[test]
    fn half_black_half_white() {
        let img = RgbImage::from_fn(10, 10, |c, _| if c < 5 { image::Rgb([0; 3]) } else { image::Rgb([255; 3]) });
        let b = BBox::new(0.5, 0.5, 1.0, 1.0).unwrap();
        // 50 * 0 + 50 * 255 over 100 pixels = 127.5, rounded half up
        assert_eq!(region_mean_color(&img, &b).unwrap(), Color::new(128, 128, 128));
    }

    #[test]
    fn clipped_region_counts_visible_pixels_only() {
        // 4x4 image, column value = 10 * column; box centred on the left edge
        // covers columns 0..1 only (centres 0.5 within [0, 0.25)).
        let img = RgbImage::from_fn(4, 4, |c, _| image::Rgb([(10 * c) as u8; 3]));
        let b = BBox::new(0.0, 0.5, 0.5, 1.0).unwrap();
        assert_eq!(region_mean_color(&img, &b).unwrap(), Color::new(0, 0, 0));
        let wider = BBox::new(0.0, 0.5, 1.0, 1.0).unwrap();
        // columns 0 and 1: mean 5
        assert_eq!(region_mean_color(&img, &wider).unwrap(), Color::new(5, 5, 5));
    }

    #[test]
    fn empty_region_is_error() {
        let img = RgbImage::new(4, 4);
        let b = BBox::new(0.5, 0.5, 0.01, 0.01).unwrap();
        assert!(matches!(region_mean_color(&img, &b), Err(Error::InvalidGeometry(_))));
    }

    proptest! {
        #[test]
        fn contrast_is_symmetric_and_bounded(a in any::<[u8; 3]>(), b in any::<[u8; 3]>()) {
            let (a, b) = (Color::new(a[0], a[1], a[2]), Color::new(b[0], b[1], b[2]));
            let ab = contrast_ratio(a, b);
            prop_assert_eq!(ab, contrast_ratio(b, a));
            prop_assert!((1.0..=21.0 + 1e-12).contains(&ab));
        }
    }
}
