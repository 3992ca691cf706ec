//! JSON form of a layout.
//!
//! ```json
//! {
//!   "subject": {"type": "subject", "bbox": [0.5, 0.62, 0.45, 0.45]},
//!   "elements": [{"type": "vase", "bbox": [0.2, 0.8, 0.1, 0.2]}],
//!   "graphic": [{"type": "Tagline", "content": "New arrival", "bbox": [0.5, 0.1, 0.6, 0.08]}]
//! }
//! ```
//!
//! Numbers are written with at least four significant digits and always
//! round-trip exactly.

use super::{BBox, Element, ElementKind, Layout};
use crate::{SchemaViolation, Violation, Warning};
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{json, Map, Value};
use std::io;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    /// Out-of-range coordinates are schema violations.
    #[default]
    Strict,
    /// Out-of-range coordinates are clamped to `[0, 1]` with a warning.
    Clamp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedLayout {
    pub layout: Layout,
    pub warnings: Vec<Warning>,
}

impl ParsedLayout {
    pub fn reordered(&self) -> bool {
        self.warnings.contains(&Warning::Reordered)
    }
}

pub fn serialize_layout(layout: &Layout) -> String {
    to_json_text(&to_json_value(layout))
}

pub fn to_json_value(layout: &Layout) -> Value {
    let bbox = |b: &BBox| json!([b.x, b.y, b.w, b.h]);
    let element = |e: &Element| {
        let mut m = Map::new();
        m.insert("type".into(), Value::String(e.kind().type_name().to_string()));
        if let Some(c) = e.content() {
            m.insert("content".into(), Value::String(c.to_string()));
        }
        m.insert("bbox".into(), bbox(e.bbox()));
        Value::Object(m)
    };
    json!({
        "subject": element(layout.subject()),
        "elements": layout.nongraphic().iter().map(element).collect::<Vec<_>>(),
        "graphic": layout.graphic().iter().map(element).collect::<Vec<_>>(),
    })
}

/// Pretty-prints `value` using the layout number format.
pub(crate) fn to_json_text(value: &Value) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, DecimalFormatter::default());
    serde::Serialize::serialize(value, &mut ser).expect("serializing a Value cannot fail");
    String::from_utf8(out).expect("serde_json emits UTF-8")
}

pub fn parse_layout(text: &str) -> Result<ParsedLayout, SchemaViolation> {
    parse_layout_with(text, ParseMode::Strict)
}

pub fn parse_layout_with(text: &str, mode: ParseMode) -> Result<ParsedLayout, SchemaViolation> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| SchemaViolation::single("$", format!("malformed JSON: {e}")))?;
    parse_value(&value, "$", mode)
}

/// Parses an already-decoded layout object; `root` prefixes reported paths.
pub(crate) fn parse_value(
    value: &Value,
    root: &str,
    mode: ParseMode,
) -> Result<ParsedLayout, SchemaViolation> {
    let mut cx = Ctx { mode, violations: Vec::new(), warnings: Vec::new() };
    let Some(obj) = value.as_object() else {
        return Err(SchemaViolation::single(root, "layout must be an object"));
    };

    let subject = match obj.get("subject") {
        None => {
            cx.violate(root, "missing key \"subject\"");
            None
        }
        Some(v) => cx.subject(v, &format!("{root}.subject")),
    };
    let nongraphic = cx.list(obj, root, "elements", Ctx::nongraphic);
    let graphic = cx.list(obj, root, "graphic", Ctx::graphic);

    if !cx.violations.is_empty() {
        return Err(SchemaViolation { violations: cx.violations });
    }
    let (subject, nongraphic, graphic) = (subject.unwrap(), nongraphic.unwrap(), graphic.unwrap());
    let (layout, reordered) = Layout::new_reporting(subject, nongraphic, graphic)
        .map_err(|e| SchemaViolation::single(root, e.to_string()))?;
    if reordered {
        cx.warnings.push(Warning::Reordered);
    }
    Ok(ParsedLayout { layout, warnings: cx.warnings })
}

struct Ctx {
    mode: ParseMode,
    violations: Vec<Violation>,
    warnings: Vec<Warning>,
}

impl Ctx {
    fn violate(&mut self, path: &str, msg: impl Into<String>) {
        self.violations.push(Violation::new(path, msg));
    }

    fn list(
        &mut self,
        obj: &Map<String, Value>,
        root: &str,
        key: &str,
        item: fn(&mut Self, &Value, &str) -> Option<Element>,
    ) -> Option<Vec<Element>> {
        let path = format!("{root}.{key}");
        match obj.get(key) {
            None => {
                self.violate(root, format!("missing key \"{key}\""));
                None
            }
            Some(Value::Array(items)) => {
                let parsed: Vec<_> = items
                    .iter()
                    .enumerate()
                    .map(|(i, v)| item(self, v, &format!("{path}[{i}]")))
                    .collect();
                parsed.into_iter().collect()
            }
            Some(_) => {
                self.violate(&path, "must be an array");
                None
            }
        }
    }

    fn object<'a>(&mut self, v: &'a Value, path: &str) -> Option<&'a Map<String, Value>> {
        let obj = v.as_object();
        if obj.is_none() {
            self.violate(path, "element must be an object");
        }
        obj
    }

    fn type_name<'a>(&mut self, obj: &'a Map<String, Value>, path: &str) -> Option<&'a str> {
        match obj.get("type") {
            Some(Value::String(s)) if !s.trim().is_empty() => Some(s),
            Some(Value::String(_)) => {
                self.violate(&format!("{path}.type"), "type must be non-empty");
                None
            }
            Some(_) => {
                self.violate(&format!("{path}.type"), "type must be a string");
                None
            }
            None => {
                self.violate(path, "missing key \"type\"");
                None
            }
        }
    }

    fn no_content(&mut self, obj: &Map<String, Value>, path: &str) -> bool {
        match obj.get("content") {
            None | Some(Value::Null) => true,
            Some(_) => {
                self.violate(&format!("{path}.content"), "content is only allowed on taglines");
                false
            }
        }
    }

    fn subject(&mut self, v: &Value, path: &str) -> Option<Element> {
        let obj = self.object(v, path)?;
        if let Some(t) = obj.get("type") {
            if t.as_str().map(|s| s.eq_ignore_ascii_case("subject")) != Some(true) {
                self.violate(&format!("{path}.type"), "subject type must be \"subject\"");
            }
        }
        let ok = self.no_content(obj, path);
        let bbox = self.bbox(obj, path);
        (ok && bbox.is_some()).then(|| Element::subject(bbox.unwrap()))
    }

    fn nongraphic(&mut self, v: &Value, path: &str) -> Option<Element> {
        let obj = self.object(v, path)?;
        let name = self.type_name(obj, path);
        let ok = self.no_content(obj, path);
        let bbox = self.bbox(obj, path);
        match (name, bbox, ok) {
            (Some(n), Some(b), true) => Element::nongraphic(n, b).ok(),
            _ => None,
        }
    }

    fn graphic(&mut self, v: &Value, path: &str) -> Option<Element> {
        let obj = self.object(v, path)?;
        let name = self.type_name(obj, path);
        let kind = match name.map(str::to_ascii_lowercase).as_deref() {
            None => None,
            Some("logo") => Some(ElementKind::Logo),
            Some("tagline") => Some(ElementKind::Tagline),
            Some("underlay") => Some(ElementKind::Underlay),
            Some(other) => {
                self.violate(
                    &format!("{path}.type"),
                    format!("unknown graphic type \"{other}\" (expected Logo, Tagline or Underlay)"),
                );
                None
            }
        };
        let content = match (&kind, obj.get("content")) {
            (Some(ElementKind::Tagline), Some(Value::String(s))) => Some(Some(s.clone())),
            (Some(ElementKind::Tagline), None | Some(Value::Null)) => {
                self.violate(&format!("{path}.content"), "tagline requires content");
                None
            }
            (Some(ElementKind::Tagline), Some(_)) => {
                self.violate(&format!("{path}.content"), "content must be a string");
                None
            }
            (Some(_), _) => self.no_content(obj, path).then_some(None),
            (None, _) => None,
        };
        let bbox = self.bbox(obj, path);
        Element::new(kind?, bbox?, content?).ok()
    }

    fn bbox(&mut self, obj: &Map<String, Value>, path: &str) -> Option<BBox> {
        let path = format!("{path}.bbox");
        let Some(v) = obj.get("bbox") else {
            self.violate(path.trim_end_matches(".bbox"), "missing key \"bbox\"");
            return None;
        };
        let Some(items) = v.as_array().filter(|a| a.len() == 4) else {
            self.violate(&path, "bbox must be an array of four numbers [x, y, w, h]");
            return None;
        };
        let mut vals = [0.0; 4];
        let mut ok = true;
        for (i, item) in items.iter().enumerate() {
            let p = format!("{path}[{i}]");
            match item.as_f64() {
                None => {
                    self.violate(&p, "must be a number");
                    ok = false;
                }
                Some(x) if (0.0..=1.0).contains(&x) => vals[i] = x,
                Some(x) => match self.mode {
                    ParseMode::Strict => {
                        self.violate(&p, format!("{x} is outside [0, 1]"));
                        ok = false;
                    }
                    ParseMode::Clamp => {
                        let c = x.clamp(0.0, 1.0);
                        self.warnings.push(Warning::Clamped { path: p, original: x, clamped: c });
                        vals[i] = c;
                    }
                },
            }
        }
        ok.then(|| BBox { x: vals[0], y: vals[1], w: vals[2], h: vals[3] })
    }
}

/// Pretty formatter that pads floats to at least four significant digits.
#[derive(Default)]
struct DecimalFormatter {
    inner: PrettyFormatter<'static>,
}

fn pad_significant(v: f64) -> String {
    let mut s = format!("{v}");
    if !s.contains('.') {
        s.push('.');
    }
    let sig = s
        .chars()
        .filter(char::is_ascii_digit)
        .skip_while(|&c| c == '0')
        .count();
    for _ in sig..4 {
        s.push('0');
    }
    s
}

impl Formatter for DecimalFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(pad_significant(v).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(v))
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}
