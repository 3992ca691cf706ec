//! Font metrics, box fitting and glyph drawing.
//!
//! Fonts are metric tables: a default advance, optional per-character
//! advances and a line height, all in em. Glyph shapes come from an 8x8
//! bitmap set stretched over each character cell, so any metric table can
//! be drawn without font files.

use crate::layout::{PixelSpan, Rect};
use crate::{Error, Result};
use font8x8::UnicodeFonts;
use image::RgbImage;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::Color;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Font {
    pub id: String,
    /// Advance width in em for characters without an entry in `advances`.
    pub advance: f64,
    #[serde(default)]
    pub advances: BTreeMap<char, f64>,
    pub line_height: f64,
    #[serde(default)]
    pub bold: bool,
}

impl Font {
    /// Fixed-advance square-cell font.
    pub fn block() -> Self {
        Self { id: "block".into(), advance: 1.0, advances: BTreeMap::new(), line_height: 1.25, bold: true }
    }

    pub fn condensed() -> Self {
        Self { id: "condensed".into(), advance: 0.75, advances: BTreeMap::new(), line_height: 1.25, bold: false }
    }

    /// The built-in candidate set, headline font first.
    pub fn builtin() -> Vec<Font> {
        vec![Self::block(), Self::condensed()]
    }

    pub fn char_advance(&self, c: char) -> f64 {
        self.advances.get(&c).copied().unwrap_or(self.advance)
    }

    /// Width of `text` in em.
    pub fn measure(&self, text: &str) -> f64 {
        text.chars().map(|c| self.char_advance(c)).sum()
    }

    fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.advance) || !positive(self.line_height) || !self.advances.values().all(|&v| positive(v)) {
            return Err(Error::InvalidInput(format!("font {}: metrics must be positive", self.id)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TextFit {
    /// Font size in pixels (one em).
    pub size: f64,
    pub lines: Vec<String>,
    /// The text does not fit even at the minimum size and will be clipped.
    pub overflow: bool,
}

/// Fraction of each box dimension kept clear on every side.
pub const TEXT_PADDING: f64 = 0.05;

/// Lines for `words` split into exactly `k` lines minimizing the widest line.
fn balanced_lines(words: &[&str], k: usize, font: &Font) -> (f64, Vec<String>) {
    let n = words.len();
    let space = font.char_advance(' ');
    let width = |i: usize, j: usize| {
        words[i..j].iter().map(|w| font.measure(w)).sum::<f64>() + space * (j - i - 1) as f64
    };
    // best[l][j]: minimal max-width for the first j words on l lines
    let mut best = vec![vec![f64::INFINITY; n + 1]; k + 1];
    let mut cut = vec![vec![0usize; n + 1]; k + 1];
    best[0][0] = 0.0;
    for l in 1..=k {
        for j in l..=n {
            for i in (l - 1)..j {
                let cand = best[l - 1][i].max(width(i, j));
                if cand < best[l][j] {
                    best[l][j] = cand;
                    cut[l][j] = i;
                }
            }
        }
    }
    let mut lines = Vec::with_capacity(k);
    let mut j = n;
    for l in (1..=k).rev() {
        let i = cut[l][j];
        lines.push(words[i..j].join(" "));
        j = i;
    }
    lines.reverse();
    (best[k][n], lines)
}

/// Largest font size at which `content` fits a `width x height` pixel box
/// with [`TEXT_PADDING`], wrapping at spaces only when that allows a larger
/// size.
pub fn fit_text(content: &str, width: f64, height: f64, font: &Font, min_size: f64) -> Result<TextFit> {
    font.validate()?;
    let words: Vec<&str> = content.split_whitespace().collect();
    if words.is_empty() {
        return Err(Error::InvalidInput("tagline text is empty".into()));
    }
    let avail_w = width * (1.0 - 2.0 * TEXT_PADDING);
    let avail_h = height * (1.0 - 2.0 * TEXT_PADDING);
    if !(avail_w > 0.0 && avail_h > 0.0) {
        return Ok(TextFit { size: min_size, lines: vec![words.join(" ")], overflow: true });
    }
    let mut best: Option<(f64, Vec<String>)> = None;
    for k in 1..=words.len() {
        let (em_width, lines) = balanced_lines(&words, k, font);
        let size = (avail_w / em_width).min(avail_h / (k as f64 * font.line_height));
        if best.as_ref().is_none_or(|(s, _)| size > *s) {
            best = Some((size, lines));
        }
    }
    let (size, lines) = best.expect("at least one word");
    if size < min_size {
        Ok(TextFit { size: min_size, lines, overflow: true })
    } else {
        Ok(TextFit { size, lines, overflow: false })
    }
}

fn glyph(c: char) -> [u8; 8] {
    font8x8::BASIC_FONTS
        .get(c)
        .or_else(|| font8x8::LATIN_FONTS.get(c))
        .or_else(|| font8x8::GREEK_FONTS.get(c))
        .or_else(|| font8x8::HIRAGANA_FONTS.get(c))
        .unwrap_or([0xff, 0x81, 0x81, 0x81, 0x81, 0x81, 0x81, 0xff])
}

fn glyph_bit(rows: &[u8; 8], gx: usize, gy: usize, bold: bool) -> bool {
    let on = |x: usize| rows[gy] >> x & 1 == 1;
    on(gx) || (bold && gx > 0 && on(gx - 1))
}

/// Draws `fit` centred in `frame` (pixel coordinates), touching no pixel
/// outside `clip`.
pub fn draw_text(image: &mut RgbImage, fit: &TextFit, font: &Font, color: Color, frame: Rect, clip: PixelSpan) {
    if clip.is_empty() {
        return;
    }
    let PixelSpan { c0, c1, r0, r1 } = clip;
    let size = fit.size;
    let line_px = font.line_height * size;
    let block_h = line_px * fit.lines.len() as f64;
    let cx = (frame.x0 + frame.x1) / 2.0;
    let top = (frame.y0 + frame.y1) / 2.0 - block_h / 2.0;
    let px: image::Rgb<u8> = color.into();
    for (li, line) in fit.lines.iter().enumerate() {
        let mut x = cx - font.measure(line) * size / 2.0;
        let y = top + li as f64 * line_px + (line_px - size) / 2.0;
        for ch in line.chars() {
            let cell_w = font.char_advance(ch) * size;
            let rows = glyph(ch);
            let col_lo = (x - 0.5).ceil().max(f64::from(c0)) as u32;
            let col_hi = (x + cell_w - 0.5).ceil().min(f64::from(c1)).max(f64::from(col_lo)) as u32;
            let row_lo = (y - 0.5).ceil().max(f64::from(r0)) as u32;
            let row_hi = (y + size - 0.5).ceil().min(f64::from(r1)).max(f64::from(row_lo)) as u32;
            for r in row_lo..row_hi {
                let gy = (((f64::from(r) + 0.5 - y) / size) * 8.0).floor().clamp(0.0, 7.0) as usize;
                for c in col_lo..col_hi {
                    let gx = (((f64::from(c) + 0.5 - x) / cell_w) * 8.0).floor().clamp(0.0, 7.0) as usize;
                    if glyph_bit(&rows, gx, gy, font.bold) {
                        image.put_pixel(c, r, px);
                    }
                }
            }
            x += cell_w;
        }
    }
}
