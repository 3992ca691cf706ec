use super::request::LayoutRequest;
use crate::layout::{rkbr_encode, rkbr_encode_ratio, BBox, Element, Layout, ParsedLayout};
use crate::{Result, Warning};
use serde::{Deserialize, Serialize};

/// Objects the rule-based generator recognises in background prompts.
pub const NONGRAPHIC_VOCABULARY: &[&str] = &[
    "table", "plant", "flower", "vase", "rock", "stone", "book", "lamp", "cup", "leaf", "pillow", "fruit", "candle",
    "shell", "box",
];

/// Constants of the rule-based layout generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RuleConfig {
    pub subject_center: [f64; 2],
    pub subject_height_no_occ: f64,
    pub subject_height_allow_occ: f64,
    pub max_subject_width: f64,
    pub top_margin: f64,
    pub headline_height: f64,
    pub tagline_height: f64,
    pub gap: f64,
    /// Average glyph advance as a fraction of line height.
    pub char_width: f64,
    pub tagline_width: [f64; 2],
    pub underlay_padding: f64,
    /// Lowest tagline edge in the top band when taglines may cover the subject.
    pub allow_occ_band: f64,
    pub bottom_margin: f64,
    pub logo_height: f64,
    pub logo_origin: [f64; 2],
    pub max_logo_width: f64,
    pub nongraphic_slots: Vec<[f64; 2]>,
    pub nongraphic_size: [f64; 2],
}

impl Default for RuleConfig {
    fn default() -> Self {
        Self {
            subject_center: [0.5, 0.62],
            subject_height_no_occ: 0.45,
            subject_height_allow_occ: 0.55,
            max_subject_width: 0.9,
            top_margin: 0.06,
            headline_height: 0.075,
            tagline_height: 0.055,
            gap: 0.02,
            char_width: 0.55,
            tagline_width: [0.1, 0.84],
            underlay_padding: 0.01,
            allow_occ_band: 0.5,
            bottom_margin: 0.04,
            logo_height: 0.04,
            logo_origin: [0.02, 0.01],
            max_logo_width: 0.3,
            nongraphic_slots: vec![[0.13, 0.89], [0.87, 0.89], [0.5, 0.89]],
            nongraphic_size: [0.16, 0.12],
        }
    }
}

/// Vocabulary words named in `prompt`, in order of first mention.
pub fn nongraphic_mentions(prompt: &str) -> Vec<&'static str> {
    let mut found = Vec::new();
    for word in prompt.split(|c: char| !c.is_alphanumeric()) {
        let word = word.to_lowercase();
        let singular = word.strip_suffix("es").filter(|s| NONGRAPHIC_VOCABULARY.contains(s));
        let singular = singular.or_else(|| word.strip_suffix('s'));
        let hit = NONGRAPHIC_VOCABULARY
            .iter()
            .find(|v| **v == word || Some(**v) == singular);
        if let Some(v) = hit {
            if !found.contains(v) {
                found.push(*v);
            }
        }
    }
    found
}

fn overlaps(a: &BBox, b: &BBox) -> bool {
    a.clipped().intersect(&b.clipped()).is_some_and(|r| r.area() > 0.0)
}

/// Deterministic layout: subject low and centred, taglines stacked above it,
/// one underlay behind each tagline, the logo top-left and any background
/// objects from the prompt in the bottom band.
pub fn rule_based_layout(req: &LayoutRequest) -> Result<ParsedLayout> {
    rule_based_layout_with(req, &RuleConfig::default())
}

pub fn rule_based_layout_with(req: &LayoutRequest, cfg: &RuleConfig) -> Result<ParsedLayout> {
    req.validate()?;
    let canvas = req.canvas()?;
    let r2 = canvas.canvas_ratio();
    let mut warnings = Vec::new();

    let allow = canvas.occlusion().allows_occlusion();
    let mut h = if allow { cfg.subject_height_allow_occ } else { cfg.subject_height_no_occ };
    if h * canvas.fg_ratio() / r2 > cfg.max_subject_width {
        h = cfg.max_subject_width * r2 / canvas.fg_ratio();
    }
    let [sx, sy] = cfg.subject_center;
    let subject = rkbr_encode(sx, sy, h, &canvas)?;
    warnings.extend(subject.warnings);
    let subject = subject.bbox;
    let band_limit = if allow { cfg.allow_occ_band } else { subject.top() };

    let heights: Vec<f64> = (0..req.taglines.len())
        .map(|i| if i == 0 { cfg.headline_height } else { cfg.tagline_height })
        .collect();
    let mut placed_top = Vec::new();
    let mut cursor = cfg.top_margin;
    for &th in &heights {
        if cursor + th + cfg.underlay_padding > band_limit {
            break;
        }
        placed_top.push(cursor);
        cursor += th + cfg.gap;
    }
    let overflow = heights.len() - placed_top.len();
    if overflow > 0 {
        warnings.push(Warning::TaglineOverflow { count: overflow });
        let rest = &heights[placed_top.len()..];
        let total: f64 = rest.iter().sum::<f64>() + cfg.gap * (rest.len() - 1) as f64;
        let mut y = (1.0 - cfg.bottom_margin - total).max(0.0);
        for &th in rest {
            placed_top.push(y);
            y += th + cfg.gap;
        }
    }

    let mut graphic = Vec::new();
    let mut occupied = Vec::new();
    for ((text, &th), &top) in req.tagline_texts().zip(&heights).zip(&placed_top) {
        let chars = text.chars().count() as f64;
        let tw = (chars * cfg.char_width * th / r2).clamp(cfg.tagline_width[0], cfg.tagline_width[1]);
        let tag = BBox::new(0.5, (top + th / 2.0).min(1.0), tw, th)?;
        let pad = cfg.underlay_padding;
        let under = BBox::new(tag.x, tag.y, (tw + 2.0 * pad).min(1.0), (th + 2.0 * pad).min(1.0))?;
        occupied.push(under);
        graphic.push(Element::tagline(tag, text));
        graphic.push(Element::underlay(under));
    }

    if let Some(ratio) = canvas.logo_ratio() {
        let mut lh = cfg.logo_height;
        if lh * ratio / r2 > cfg.max_logo_width {
            lh = cfg.max_logo_width * r2 / ratio;
        }
        let lw = lh * ratio / r2;
        let [ox, oy] = cfg.logo_origin;
        let logo = rkbr_encode_ratio(ox + lw / 2.0, oy + lh / 2.0, lh, ratio, r2)?;
        warnings.extend(logo.warnings);
        graphic.push(Element::logo(logo.bbox));
    }

    let mut nongraphic = Vec::new();
    let mut slots = cfg.nongraphic_slots.iter();
    let [nw, nh] = cfg.nongraphic_size;
    for name in nongraphic_mentions(&req.prompt.back) {
        let free = slots.by_ref().map(|&[x, y]| BBox::new(x, y, nw, nh)).find(|b| match b {
            Ok(b) => !occupied.iter().any(|o| overlaps(o, b)),
            Err(_) => true,
        });
        match free {
            Some(b) => nongraphic.push(Element::nongraphic(name, b?)?),
            None => break,
        }
    }

    let layout = Layout::new(Element::subject(subject), nongraphic, graphic)?;
    Ok(ParsedLayout { layout, warnings })
}
