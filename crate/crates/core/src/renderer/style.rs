use super::color::{contrast_ratio, region_mean_color_boxes, Color, BLACK};
use super::group::{group_taglines, Grouping};
use super::shapes::ShapeLibrary;
use super::text::Font;
use super::{RenderConfig, RenderKit};
use crate::layout::{BBox, Element, Layout};
use crate::{Error, Result, Warning};
use image::RgbImage;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupStyle {
    /// Tagline indices in this group.
    pub members: Vec<usize>,
    pub font: String,
    pub color: Color,
    /// Mean background colour under the group's boxes.
    pub region_mean: Color,
    pub contrast: f64,
    /// The scored choice missed the minimum contrast and the max-contrast
    /// candidate was used instead.
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnderlayStyle {
    /// Index among the layout's underlays.
    pub element: usize,
    pub shape: String,
    pub fill: Color,
    /// Pixel aspect ratio of the box the shape is stretched over.
    pub aspect: f64,
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StyleAssignment {
    /// Group index for each tagline, in layout order.
    pub tagline_group: Vec<usize>,
    pub groups: Vec<GroupStyle>,
    pub underlays: Vec<UnderlayStyle>,
    pub warnings: Vec<Warning>,
}

impl StyleAssignment {
    pub fn tagline_style(&self, tagline: usize) -> &GroupStyle {
        &self.groups[self.tagline_group[tagline]]
    }
}

/// Mean colour under `boxes`, or the pixel under the first box's centre
/// when the boxes cover no pixel centre.
fn region_mean(background: &RgbImage, boxes: &[BBox]) -> Result<Color> {
    match region_mean_color_boxes(background, boxes) {
        Ok(c) => Ok(c),
        Err(Error::InvalidGeometry(_)) if !boxes.is_empty() => {
            let (w, h) = background.dimensions();
            let at = |v: f64, n: u32| ((v * f64::from(n)).floor().max(0.0) as u32).min(n - 1);
            Ok((*background.get_pixel(at(boxes[0].x, w), at(boxes[0].y, h))).into())
        }
        Err(e) => Err(e),
    }
}

/// Index of the largest value; the lowest index wins ties.
fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

fn check_background(background: &RgbImage) -> Result<()> {
    if background.width() == 0 || background.height() == 0 {
        return Err(Error::InvalidInput("background image is empty".into()));
    }
    Ok(())
}

/// Font and colour for each tagline group. Groups are ranked by total box
/// area; the largest gets the first font, the next the second, and so on,
/// with the last font reused once the list runs out.
pub fn select_tagline_style(
    taglines: &[Element],
    grouping: &Grouping,
    fg_color: Color,
    background: &RgbImage,
    fonts: &[Font],
    colors: &[Color],
    cfg: &RenderConfig,
) -> Result<(Vec<GroupStyle>, Vec<Warning>)> {
    if fonts.is_empty() || colors.is_empty() {
        return Err(Error::InvalidInput("font and colour candidates must be non-empty".into()));
    }
    check_background(background)?;
    let areas: Vec<f64> = (0..grouping.len())
        .map(|g| grouping.members(g).iter().map(|&i| taglines[i].bbox().area()).sum())
        .collect();
    let mut order: Vec<usize> = (0..grouping.len()).collect();
    order.sort_by(|&a, &b| areas[b].total_cmp(&areas[a]).then(a.cmp(&b)));

    let mut styles: Vec<Option<GroupStyle>> = vec![None; grouping.len()];
    let mut warnings = Vec::new();
    for (rank, &g) in order.iter().enumerate() {
        let members = grouping.members(g);
        let boxes: Vec<BBox> = members.iter().map(|&i| *taglines[i].bbox()).collect();
        let mean = region_mean(background, &boxes)?;
        let contrasts: Vec<f64> = colors.iter().map(|&c| contrast_ratio(c, mean)).collect();
        let scored = argmax(colors.iter().zip(&contrasts).map(|(c, &cr)| cfg.score(cr, c.distance(&fg_color))));
        let (pick, fallback) = if contrasts[scored] >= cfg.min_contrast {
            (scored, false)
        } else {
            warnings.push(Warning::ContrastFallback { group: g, best_contrast: contrasts[scored] });
            (argmax(contrasts.iter().copied()), true)
        };
        styles[g] = Some(GroupStyle {
            members,
            font: fonts[rank.min(fonts.len() - 1)].id.clone(),
            color: colors[pick],
            region_mean: mean,
            contrast: contrasts[pick],
            fallback,
        });
    }
    Ok((styles.into_iter().map(|s| s.expect("every group visited")).collect(), warnings))
}

/// Fill colour and library shape for underlay `index`.
pub fn select_underlay(
    underlay: &Element,
    index: usize,
    tagline_color: Color,
    background: &RgbImage,
    lib: &ShapeLibrary,
    colors: &[Color],
    cfg: &RenderConfig,
) -> Result<(UnderlayStyle, Option<Warning>)> {
    if colors.is_empty() {
        return Err(Error::InvalidInput("colour candidates must be non-empty".into()));
    }
    check_background(background)?;
    let b = underlay.bbox();
    let mean = region_mean(background, std::slice::from_ref(b))?;
    let fill = colors[argmax(colors.iter().map(|&c| cfg.score(contrast_ratio(c, tagline_color), c.distance(&mean))))];
    let (w, h) = background.dimensions();
    let (pw, ph) = (b.w * f64::from(w), b.h * f64::from(h));
    let aspect = if ph > 0.0 { pw / ph } else if pw > 0.0 { f64::INFINITY } else { 1.0 };
    let (shape, fallback) = lib.select(aspect);
    let warning = fallback.then(|| Warning::ShapeFallback { element: index, aspect, shape: shape.id.clone() });
    Ok((UnderlayStyle { element: index, shape: shape.id.clone(), fill, aspect, fallback }, warning))
}

/// The tagline an underlay sits behind: the one it overlaps most, else the
/// one with the nearest centre.
fn host_tagline(underlay: &BBox, taglines: &[Element]) -> Option<usize> {
    let overlap = |t: &BBox| underlay.clipped().intersect(&t.clipped()).map_or(0.0, |r| r.area());
    let best = argmax(taglines.iter().map(|t| overlap(t.bbox())));
    if taglines.is_empty() {
        None
    } else if overlap(taglines[best].bbox()) > 0.0 {
        Some(best)
    } else {
        let dist = |t: &BBox| (t.x - underlay.x).powi(2) + (t.y - underlay.y).powi(2);
        Some(argmax(taglines.iter().map(|t| -dist(t.bbox()))))
    }
}

/// Groups taglines, picks their styles, then styles each underlay against
/// the colour of the tagline it hosts.
pub fn style_layout(layout: &Layout, background: &RgbImage, fg_color: Color, kit: &RenderKit) -> Result<StyleAssignment> {
    let taglines: Vec<Element> = layout.taglines().cloned().collect();
    let grouping = group_taglines(&taglines, &kit.config);
    let (groups, mut warnings) =
        select_tagline_style(&taglines, &grouping, fg_color, background, &kit.fonts, &kit.colors, &kit.config)?;
    let mut underlays = Vec::new();
    for (k, u) in layout.underlays().enumerate() {
        let text_color = host_tagline(u.bbox(), &taglines).map_or(BLACK, |t| groups[grouping.group_of(t)].color);
        let (style, warning) = select_underlay(u, k, text_color, background, &kit.shapes, &kit.colors, &kit.config)?;
        warnings.extend(warning);
        underlays.push(style);
    }
    Ok(StyleAssignment { tagline_group: grouping.assignments().to_vec(), groups, underlays, warnings })
}

#[cfg(test)]
mod tests {
    use super::super::color::WHITE;
    use super::super::shapes::{Outline, ShapeEntry};
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tag(x: f64, y: f64, w: f64, h: f64) -> Element {
        Element::tagline(BBox::new(x, y, w, h).unwrap(), "text")
    }

    fn one_group(n: usize) -> Grouping {
        let tags: Vec<Element> = (0..n).map(|i| tag(0.5, 0.1 + 0.1 * i as f64, 0.3, 0.05)).collect();
        group_taglines(&tags, &RenderConfig::default())
    }

    #[test]
    fn dominant_candidate_on_white() {
        let bg = RgbImage::from_pixel(32, 32, WHITE.into());
        let tags = [tag(0.5, 0.2, 0.5, 0.1)];
        let (styles, warnings) = select_tagline_style(
            &tags,
            &one_group(1),
            BLACK,
            &bg,
            &Font::builtin(),
            &[WHITE, BLACK],
            &RenderConfig::default(),
        )
        .unwrap();
        assert_eq!(styles[0].color, BLACK);
        assert!(warnings.is_empty());
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let bg = RgbImage::from_pixel(16, 16, WHITE.into());
        let red = Color::new(200, 0, 0);
        let tags = [tag(0.5, 0.5, 0.5, 0.5)];
        let cfg = RenderConfig::default();
        let (styles, _) = select_tagline_style(&tags, &one_group(1), red, &bg, &Font::builtin(), &[red, red], &cfg).unwrap();
        assert_eq!(styles[0].color, red);
        assert_eq!(argmax([1.0, 3.0, 3.0].into_iter()), 1);
    }

    #[test]
    fn low_contrast_falls_back_with_warning() {
        let grey = Color::new(128, 128, 128);
        let bg = RgbImage::from_pixel(16, 16, grey.into());
        let near = Color::new(130, 130, 130);
        let tags = [tag(0.5, 0.5, 0.5, 0.5)];
        // similarity to the foreground (near) outweighs contrast for `near`
        let cfg = RenderConfig { contrast_weight: 0.01, similarity_weight: 0.99, ..RenderConfig::default() };
        let (styles, warnings) =
            select_tagline_style(&tags, &one_group(1), near, &bg, &Font::builtin(), &[near, BLACK], &cfg).unwrap();
        assert_eq!(styles[0].color, BLACK);
        assert!(styles[0].fallback);
        assert!(matches!(warnings[0], Warning::ContrastFallback { group: 0, .. }));
    }

    #[test]
    fn empty_candidates_rejected() {
        let bg = RgbImage::new(4, 4);
        let cfg = RenderConfig::default();
        assert!(select_tagline_style(&[], &one_group(0), BLACK, &bg, &[], &[BLACK], &cfg).is_err());
        assert!(select_tagline_style(&[], &one_group(0), BLACK, &bg, &Font::builtin(), &[], &cfg).is_err());
    }

    #[test]
    fn fonts_follow_area_rank() {
        let bg = RgbImage::from_pixel(64, 64, WHITE.into());
        // small group first in layout order, large group second
        let tags = [tag(0.2, 0.1, 0.2, 0.04), tag(0.7, 0.6, 0.5, 0.12)];
        let cfg = RenderConfig::default();
        let grouping = group_taglines(&tags, &cfg);
        assert_eq!(grouping.len(), 2);
        let fonts = Font::builtin();
        let (styles, _) = select_tagline_style(&tags, &grouping, BLACK, &bg, &fonts, &[BLACK], &cfg).unwrap();
        assert_eq!(styles[grouping.group_of(1)].font, fonts[0].id);
        assert_eq!(styles[grouping.group_of(0)].font, fonts[1].id);
    }

    #[test]
    fn light_background_white_text_gets_dark_fill() {
        let bg = RgbImage::from_pixel(40, 40, image::Rgb([235, 235, 235]));
        let u = Element::underlay(BBox::new(0.5, 0.5, 0.6, 0.1).unwrap());
        let colors = [WHITE, Color::new(240, 240, 240), Color::new(20, 20, 60)];
        let cfg = RenderConfig::default();
        let (style, _) = select_underlay(&u, 0, WHITE, &bg, &ShapeLibrary::default(), &colors, &cfg).unwrap();
        let mean = Color::new(235, 235, 235);
        let brute = (0..colors.len())
            .max_by(|&a, &b| {
                let s = |i: usize| cfg.score(contrast_ratio(colors[i], WHITE), colors[i].distance(&mean));
                s(a).total_cmp(&s(b)).then(b.cmp(&a))
            })
            .unwrap();
        assert_eq!(style.fill, colors[brute]);
        assert_eq!(style.fill, Color::new(20, 20, 60));
    }

    #[test]
    fn underlay_shape_by_pixel_aspect() {
        let lib = ShapeLibrary::new(vec![
            ShapeEntry { id: "pill".into(), aspect: [4.0, 10.0], outline: Outline::Pill },
            ShapeEntry { id: "circle".into(), aspect: [0.9, 1.1], outline: Outline::Ellipse },
        ])
        .unwrap();
        let cfg = RenderConfig::default();
        // 0.6 x 0.1 on a square canvas is aspect 6
        let bg = RgbImage::new(100, 100);
        let u = Element::underlay(BBox::new(0.5, 0.5, 0.6, 0.1).unwrap());
        let (style, w) = select_underlay(&u, 0, WHITE, &bg, &lib, &[BLACK], &cfg).unwrap();
        assert_eq!((style.shape.as_str(), w), ("pill", None));
        let odd = Element::underlay(BBox::new(0.5, 0.5, 0.25, 0.1).unwrap());
        let (style, w) = select_underlay(&odd, 3, WHITE, &bg, &lib, &[BLACK], &cfg).unwrap();
        assert_eq!(style.shape, "circle");
        assert!(matches!(w, Some(Warning::ShapeFallback { element: 3, .. })));
    }

    #[test]
    fn layout_styles_share_within_groups() {
        let subject = Element::subject(BBox::new(0.5, 0.7, 0.4, 0.4).unwrap());
        let graphic = vec![
            tag(0.5, 0.1, 0.6, 0.06),
            tag(0.5, 0.2, 0.4, 0.06),
            Element::underlay(BBox::new(0.5, 0.2, 0.44, 0.08).unwrap()),
            tag(0.2, 0.9, 0.2, 0.03),
        ];
        let layout = Layout::new(subject, vec![], graphic).unwrap();
        let bg = RgbImage::from_pixel(64, 64, image::Rgb([40, 90, 160]));
        let s = style_layout(&layout, &bg, Color::new(200, 30, 30), &RenderKit::default()).unwrap();
        assert_eq!(s.tagline_group.len(), 3);
        assert_eq!(s.tagline_group[0], s.tagline_group[1]);
        assert_ne!(s.tagline_group[0], s.tagline_group[2]);
        assert_eq!(s.underlays.len(), 1);
    }

    fn brute_force(mean: Color, fg: Color, colors: &[Color], cfg: &RenderConfig) -> Color {
        let mut best = 0;
        for i in 1..colors.len() {
            let s = |k: usize| cfg.score(contrast_ratio(colors[k], mean), colors[k].distance(&fg));
            if s(i) > s(best) {
                best = i;
            }
        }
        if contrast_ratio(colors[best], mean) < cfg.min_contrast {
            best = 0;
            for i in 1..colors.len() {
                if contrast_ratio(colors[i], mean) > contrast_ratio(colors[best], mean) {
                    best = i;
                }
            }
        }
        colors[best]
    }

    proptest! {
        #[test]
        fn choice_matches_exhaustive_scoring(seed in any::<u64>(), n in 1usize..8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let bg = RgbImage::from_fn(24, 24, |_, _| image::Rgb(rng.gen()));
            let colors: Vec<Color> = (0..n).map(|_| { let c: [u8; 3] = rng.gen(); Color::new(c[0], c[1], c[2]) }).collect();
            let fg = Color::new(rng.gen(), rng.gen(), rng.gen());
            let tags = [tag(rng.gen_range(0.2..0.8), rng.gen_range(0.2..0.8), 0.3, 0.2)];
            let cfg = RenderConfig::default();
            let (styles, warnings) = select_tagline_style(&tags, &one_group(1), fg, &bg, &Font::builtin(), &colors, &cfg).unwrap();
            let mean = region_mean_color_boxes(&bg, &[*tags[0].bbox()]).unwrap();
            prop_assert_eq!(styles[0].color, brute_force(mean, fg, &colors, &cfg));
            prop_assert!(styles[0].contrast >= cfg.min_contrast || !warnings.is_empty());
        }
    }
}
