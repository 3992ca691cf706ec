use super::style::StyleAssignment;
use super::text::{draw_text, fit_text, Font};
use super::RenderKit;
use crate::layout::{BBox, CanvasSpec, Layout, Rect};
use crate::{Error, Result, Warning};
use image::imageops::{self, FilterType};
use image::{RgbImage, RgbaImage};

#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub image: RgbImage,
    pub warnings: Vec<Warning>,
}

fn frame(b: &BBox, w: u32, h: u32) -> Rect {
    let (wf, hf) = (f64::from(w), f64::from(h));
    Rect::new(b.left() * wf, b.top() * hf, b.right() * wf, b.bottom() * hf)
}

fn font<'a>(fonts: &'a [Font], id: &str) -> Result<&'a Font> {
    fonts
        .iter()
        .find(|f| f.id == id)
        .ok_or_else(|| Error::InvalidInput(format!("style refers to unknown font {id:?}")))
}

fn check_styles(layout: &Layout, styles: &StyleAssignment) -> Result<()> {
    let taglines = layout.tagline_count();
    let underlays = layout.underlays().count();
    if styles.tagline_group.len() != taglines || styles.underlays.len() != underlays {
        return Err(Error::InvalidInput(format!(
            "styles cover {} taglines and {} underlays, layout has {taglines} and {underlays}",
            styles.tagline_group.len(),
            styles.underlays.len()
        )));
    }
    if let Some(&g) = styles.tagline_group.iter().find(|&&g| g >= styles.groups.len()) {
        return Err(Error::InvalidInput(format!("tagline group {g} has no style")));
    }
    Ok(())
}

/// Alpha-composites `logo`, resized to the pixel span of `b`, over `image`.
fn paste_logo(image: &mut RgbImage, logo: &RgbaImage, b: &BBox) {
    let span = b.pixel_span(image.width(), image.height());
    if span.is_empty() || logo.width() == 0 || logo.height() == 0 {
        return;
    }
    let scaled = imageops::resize(logo, span.width(), span.height(), FilterType::Triangle);
    for (c, r) in span.pixels() {
        let src = scaled.get_pixel(c - span.c0, r - span.r0);
        let a = u32::from(src[3]);
        let dst = image.get_pixel_mut(c, r);
        for k in 0..3 {
            let blended = u32::from(src[k]) * a + u32::from(dst[k]) * (255 - a);
            dst[k] = ((blended + 127) / 255) as u8;
        }
    }
}

/// Draws the layout's graphics onto `background`: underlays, then
/// taglines, then the logo. Only pixels inside graphic boxes change.
pub fn render(
    layout: &Layout,
    canvas: &CanvasSpec,
    background: &RgbImage,
    styles: &StyleAssignment,
    kit: &RenderKit,
    logo: Option<&RgbaImage>,
) -> Result<Rendered> {
    let (w, h) = background.dimensions();
    if (w, h) != (canvas.width(), canvas.height()) {
        return Err(Error::InvalidInput(format!(
            "background is {w}x{h} but the canvas is {}x{}",
            canvas.width(),
            canvas.height()
        )));
    }
    check_styles(layout, styles)?;
    let mut image = background.clone();
    let mut warnings = Vec::new();

    for (u, style) in layout.underlays().zip(&styles.underlays) {
        let shape = kit
            .shapes
            .get(&style.shape)
            .ok_or_else(|| Error::InvalidInput(format!("style refers to unknown shape {:?}", style.shape)))?;
        let f = frame(u.bbox(), w, h);
        let fill: image::Rgb<u8> = style.fill.into();
        for (c, r) in u.bbox().pixel_span(w, h).pixels() {
            let (px, py) = (f64::from(c) + 0.5 - f.x0, f64::from(r) + 0.5 - f.y0);
            if shape.outline.contains(px, py, f.width(), f.height()) {
                image.put_pixel(c, r, fill);
            }
        }
    }

    let min_size = kit.config.min_font_size(w);
    for (i, t) in layout.taglines().enumerate() {
        let style = styles.tagline_style(i);
        let font = font(&kit.fonts, &style.font)?;
        let f = frame(t.bbox(), w, h);
        let fit = fit_text(t.content().unwrap_or_default(), f.width(), f.height(), font, min_size)?;
        if fit.overflow {
            warnings.push(Warning::TextOverflow { element: i, min_size });
        }
        draw_text(&mut image, &fit, font, style.color, f, t.bbox().pixel_span(w, h));
    }

    for l in layout.graphic().iter().filter(|e| e.is_logo()) {
        match logo {
            Some(img) => paste_logo(&mut image, img, l.bbox()),
            None => {
                if !warnings.contains(&Warning::MissingLogoImage) {
                    warnings.push(Warning::MissingLogoImage);
                }
            }
        }
    }
    Ok(Rendered { image, warnings })
}
