//! Deterministic stand-ins for the model-backed stages.

use super::{foreground_bounds, mean_opaque_color, BackgroundBackend, BackendFailure, LayoutBackend, PromptBackend};
use super::request::LayoutRequest;
use super::rules::{rule_based_layout, NONGRAPHIC_VOCABULARY};
use crate::layout::{CanvasSpec, Layout, ParsedLayout, PromptPair};
use crate::renderer::Color;
use image::imageops::{self, FilterType};
use image::{Rgb, RgbImage, RgbaImage};
use sha2::{Digest, Sha256};

const SCENES: &[&str] = &[
    "a sunlit marble {a} beside a small {b}",
    "a soft pastel studio with a {a} and a {b}",
    "a wooden {a} near a window, a {b} in the corner",
    "a calm beach scene with a {a} and a {b}",
    "a minimal concrete room with a {a} and a {b}",
];

const COLOR_NAMES: &[(&str, [u8; 3])] = &[
    ("black", [20, 20, 20]),
    ("white", [235, 235, 235]),
    ("grey", [128, 128, 128]),
    ("red", [200, 40, 40]),
    ("orange", [230, 130, 40]),
    ("yellow", [230, 210, 60]),
    ("green", [60, 160, 70]),
    ("blue", [50, 90, 200]),
    ("purple", [130, 60, 170]),
    ("pink", [230, 140, 180]),
    ("brown", [120, 80, 50]),
];

fn color_name(c: Color) -> &'static str {
    let d = |rgb: [u8; 3]| c.distance(&Color::new(rgb[0], rgb[1], rgb[2]));
    COLOR_NAMES
        .iter()
        .min_by(|a, b| d(a.1).total_cmp(&d(b.1)))
        .map(|(n, _)| *n)
        .expect("colour table is non-empty")
}

/// Captions derived from the foreground's colour, shape and pixel hash.
pub fn stub_prompts(foreground: &RgbaImage) -> Option<PromptPair> {
    let (x0, y0, x1, y1) = foreground_bounds(foreground)?;
    let ratio = f64::from(x1 - x0) / f64::from(y1 - y0);
    let shape = match ratio {
        r if r < 0.75 => "tall",
        r if r > 1.33 => "wide",
        _ => "compact",
    };
    let color = color_name(mean_opaque_color(foreground)?);
    let digest = Sha256::digest(foreground.as_raw());
    let scene = SCENES[digest[0] as usize % SCENES.len()];
    let a = NONGRAPHIC_VOCABULARY[digest[1] as usize % NONGRAPHIC_VOCABULARY.len()];
    let mut b = NONGRAPHIC_VOCABULARY[digest[2] as usize % NONGRAPHIC_VOCABULARY.len()];
    if a == b {
        b = NONGRAPHIC_VOCABULARY[(digest[2] as usize + 1) % NONGRAPHIC_VOCABULARY.len()];
    }
    Some(PromptPair {
        fore: format!("a {shape} {color} product photographed in soft light"),
        back: scene.replace("{a}", a).replace("{b}", b),
    })
}

fn lerp(a: u8, b: u8, t: f64) -> u8 {
    (f64::from(a) + (f64::from(b) - f64::from(a)) * t).round() as u8
}

fn blend(dst: &mut Rgb<u8>, src: [u8; 3], alpha: f64) {
    for k in 0..3 {
        dst[k] = (f64::from(dst[k]) * (1.0 - alpha) + f64::from(src[k]) * alpha).round() as u8;
    }
}

/// Gradient colours seeded by the background caption.
pub fn gradient_colors(back: &str) -> (Color, Color) {
    let d = Sha256::digest(back.as_bytes());
    (Color::new(d[0], d[1], d[2]), Color::new(d[3], d[4], d[5]))
}

/// Pixel rectangle `(left, top, width, height)` the foreground occupies
/// when fitted into the subject box with its aspect ratio kept.
pub fn paste_rect(layout: &Layout, foreground: &RgbaImage, width: u32, height: u32) -> Option<(i64, i64, u32, u32)> {
    let (x0, y0, x1, y1) = foreground_bounds(foreground)?;
    let (fw, fh) = (f64::from(x1 - x0), f64::from(y1 - y0));
    let b = layout.subject().bbox();
    let (bw, bh) = (b.w * f64::from(width), b.h * f64::from(height));
    let scale = (bw / fw).min(bh / fh);
    let (pw, ph) = ((fw * scale).round().max(1.0), (fh * scale).round().max(1.0));
    let left = (b.x * f64::from(width) - pw / 2.0).round() as i64;
    let top = (b.y * f64::from(height) - ph / 2.0).round() as i64;
    Some((left, top, pw as u32, ph as u32))
}

/// Vertical two-colour gradient, soft blobs for background objects and
/// the foreground pasted into the subject box.
pub fn stub_background(prompt: &PromptPair, layout: &Layout, foreground: &RgbaImage, canvas: &CanvasSpec) -> RgbImage {
    let (w, h) = (canvas.width(), canvas.height());
    let (top, bottom) = gradient_colors(&prompt.back);
    let mut image = RgbImage::from_fn(w, h, |_, r| {
        let t = (f64::from(r) + 0.5) / f64::from(h);
        Rgb([lerp(top.r, bottom.r, t), lerp(top.g, bottom.g, t), lerp(top.b, bottom.b, t)])
    });

    for e in layout.nongraphic() {
        let d = Sha256::digest(format!("{}|{}", e.kind().type_name(), prompt.back).as_bytes());
        let color = [d[0], d[1], d[2]];
        let b = e.bbox();
        let (cx, cy) = (b.x * f64::from(w), b.y * f64::from(h));
        let (rx, ry) = (b.w * f64::from(w) / 2.0, b.h * f64::from(h) / 2.0);
        if rx <= 0.0 || ry <= 0.0 {
            continue;
        }
        for (c, r) in b.pixel_span(w, h).pixels() {
            let dx = (f64::from(c) + 0.5 - cx) / rx;
            let dy = (f64::from(r) + 0.5 - cy) / ry;
            let alpha = (1.0 - (dx * dx + dy * dy)).clamp(0.0, 1.0) * 0.85;
            if alpha > 0.0 {
                blend(image.get_pixel_mut(c, r), color, alpha);
            }
        }
    }

    if let Some((left, top, pw, ph)) = paste_rect(layout, foreground, w, h) {
        let (x0, y0, x1, y1) = foreground_bounds(foreground).expect("paste_rect found bounds");
        let crop = imageops::crop_imm(foreground, x0, y0, x1 - x0, y1 - y0).to_image();
        let scaled = imageops::resize(&crop, pw, ph, FilterType::Triangle);
        for (sx, sy, p) in scaled.enumerate_pixels() {
            let (c, r) = (left + i64::from(sx), top + i64::from(sy));
            if c < 0 || r < 0 || c >= i64::from(w) || r >= i64::from(h) || p[3] == 0 {
                continue;
            }
            blend(image.get_pixel_mut(c as u32, r as u32), [p[0], p[1], p[2]], f64::from(p[3]) / 255.0);
        }
    }
    image
}

#[derive(Debug, Clone, Copy, Default)]
pub struct StubPrompt;

impl PromptBackend for StubPrompt {
    fn prompts(&self, foreground: &RgbaImage) -> Result<PromptPair, BackendFailure> {
        stub_prompts(foreground).ok_or_else(|| BackendFailure::Error("foreground has no opaque pixels".into()))
    }
}

/// The rule-based layout generator as a layout backend.
#[derive(Debug, Clone, Copy, Default)]
pub struct StubLayout;

impl LayoutBackend for StubLayout {
    fn layout(&self, request: &LayoutRequest) -> Result<ParsedLayout, BackendFailure> {
        rule_based_layout(request).map_err(BackendFailure::from)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct StubBackground;

impl BackgroundBackend for StubBackground {
    fn background(
        &self,
        prompt: &PromptPair,
        layout: &Layout,
        foreground: &RgbaImage,
        canvas: &CanvasSpec,
    ) -> Result<RgbImage, BackendFailure> {
        Ok(stub_background(prompt, layout, foreground, canvas))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::{BBox, Element, OcclusionClass};
    use image::Rgba;

    fn product(w: u32, h: u32) -> RgbaImage {
        // opaque w x h block with a transparent 3-pixel margin
        RgbaImage::from_fn(w + 6, h + 6, |c, r| {
            let inside = (3..w + 3).contains(&c) && (3..h + 3).contains(&r);
            if inside { Rgba([200, 30, 30, 255]) } else { Rgba([0, 0, 0, 0]) }
        })
    }

    fn setup() -> (PromptPair, Layout, RgbaImage, CanvasSpec) {
        let fg = product(30, 60);
        let canvas = CanvasSpec::new(200, 160, 0.5, OcclusionClass::NoOcc("bottle".into()), None).unwrap();
        let subject = crate::layout::rkbr_encode(0.5, 0.6, 0.5, &canvas).unwrap().bbox;
        let vase = Element::nongraphic("vase", BBox::new(0.15, 0.85, 0.2, 0.2).unwrap()).unwrap();
        let layout = Layout::new(Element::subject(subject), vec![vase], vec![]).unwrap();
        (stub_prompts(&fg).unwrap(), layout, fg, canvas)
    }

    #[test]
    fn same_inputs_same_image() {
        let (p, l, fg, c) = setup();
        assert_eq!(stub_background(&p, &l, &fg, &c), stub_background(&p, &l, &fg, &c));
        assert_eq!(stub_prompts(&fg), stub_prompts(&fg));
    }

    #[test]
    fn pasted_region_keeps_foreground_ratio() {
        let (p, l, fg, c) = setup();
        let img = stub_background(&p, &l, &fg, &c);
        let (_, _, pw, ph) = paste_rect(&l, &fg, 200, 160).unwrap();
        // r1 = 30 / 60
        assert!((f64::from(pw) - 0.5 * f64::from(ph)).abs() <= 1.0, "{pw}x{ph}");
        // the pasted product shows up as its own colour
        let red = img.pixels().filter(|p| p.0 == [200, 30, 30]).count() as u32;
        assert!(red > 0 && red <= pw * ph);
        let _ = p;
    }

    #[test]
    fn different_captions_seed_different_gradients() {
        let prompts = ["a beach", "a forest", "a kitchen table", "a marble room", "a neon street", "snowy hills"];
        let seeds: std::collections::HashSet<_> = prompts.iter().map(|p| gradient_colors(p)).collect();
        assert_eq!(seeds.len(), prompts.len());
    }

    #[test]
    fn captions_describe_the_product() {
        let p = stub_prompts(&product(30, 60)).unwrap();
        assert_eq!(p.fore, "a tall red product photographed in soft light");
        assert!(!super::super::rules::nongraphic_mentions(&p.back).is_empty());
        assert!(stub_prompts(&RgbaImage::new(4, 4)).is_none());
    }
}
