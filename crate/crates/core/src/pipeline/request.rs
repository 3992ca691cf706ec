use crate::layout::{cclp_condition, CanvasSpec, OcclusionClass, PromptPair};
use crate::{Error, Result, SchemaViolation};
use serde::{Deserialize, Serialize};

/// A tagline handed to the layout model with an empty box to fill in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaglineSlot {
    #[serde(rename = "type")]
    pub kind: String,
    pub content: String,
    pub bbox: Vec<f64>,
}

impl TaglineSlot {
    pub fn new(content: impl Into<String>) -> Self {
        Self { kind: "tagline".into(), content: content.into(), bbox: Vec::new() }
    }
}

/// Input of the layout stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutRequest {
    pub width: u32,
    pub height: u32,
    /// Foreground aspect ratio (r1).
    pub fg_ratio: f64,
    /// Canvas aspect ratio (r2).
    pub canvas_ratio: f64,
    #[serde(flatten)]
    pub occlusion: OcclusionClass,
    pub condition: String,
    pub prompt: PromptPair,
    pub taglines: Vec<TaglineSlot>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logo_ratio: Option<f64>,
}

impl LayoutRequest {
    pub fn new(canvas: &CanvasSpec, prompt: PromptPair, taglines: &[String]) -> Result<Self> {
        Ok(Self {
            width: canvas.width(),
            height: canvas.height(),
            fg_ratio: canvas.fg_ratio(),
            canvas_ratio: canvas.canvas_ratio(),
            occlusion: canvas.occlusion().clone(),
            condition: cclp_condition(canvas.occlusion())?,
            prompt,
            taglines: taglines.iter().map(TaglineSlot::new).collect(),
            logo_ratio: canvas.logo_ratio(),
        })
    }

    pub fn canvas(&self) -> Result<CanvasSpec> {
        CanvasSpec::new(self.width, self.height, self.fg_ratio, self.occlusion.clone(), self.logo_ratio)
    }

    pub fn tagline_texts(&self) -> impl Iterator<Item = &str> {
        self.taglines.iter().map(|t| t.content.as_str())
    }

    /// Checks the condition string, the tagline slots and the canvas.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        match cclp_condition(&self.occlusion) {
            Ok(expected) if expected == self.condition => {}
            Ok(expected) => problems.push(("$.condition".to_string(), format!("expected {expected:?}"))),
            Err(e) => problems.push(("$.product_class".to_string(), e.to_string())),
        }
        for (i, t) in self.taglines.iter().enumerate() {
            if t.kind != "tagline" || !t.bbox.is_empty() {
                problems.push((format!("$.taglines[{i}]"), "expected a tagline with an empty bbox".into()));
            }
            if t.content.trim().is_empty() {
                problems.push((format!("$.taglines[{i}].content"), "empty tagline text".into()));
            }
        }
        if let Err(e) = self.prompt.validate() {
            problems.push(("$.prompt".into(), e.to_string()));
        }
        if let Err(Error::InvalidInput(msg)) = self.canvas() {
            problems.push(("$".into(), msg));
        }
        if problems.is_empty() {
            return Ok(());
        }
        Err(SchemaViolation {
            violations: problems.into_iter().map(|(p, m)| crate::Violation::new(p, m)).collect(),
        }
        .into())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn request() -> LayoutRequest {
        let canvas = CanvasSpec::new(1024, 768, 0.8, OcclusionClass::NoOcc("perfume".into()), None).unwrap();
        let prompt = PromptPair::new("a glass bottle", "a marble table").unwrap();
        LayoutRequest::new(&canvas, prompt, &["Spring sale".into()]).unwrap()
    }

    #[test]
    fn wire_form() {
        let v = serde_json::to_value(request()).unwrap();
        assert_eq!(v["occlusion"], "no_occ");
        assert_eq!(v["product_class"], "perfume");
        assert_eq!(v["taglines"][0]["type"], "tagline");
        assert_eq!(v["taglines"][0]["bbox"], serde_json::json!([]));
        assert_eq!(
            v["condition"],
            "The class of subject is perfume. The bounding boxes of taglines should never occlude the subject."
        );
        assert!(v.get("logo_ratio").is_none());
        let back: LayoutRequest = serde_json::from_value(v).unwrap();
        assert_eq!(back, request());
        back.validate().unwrap();
    }

    #[test]
    fn tampered_condition_is_rejected() {
        let mut r = request();
        r.condition.push('!');
        r.taglines[0].bbox = vec![0.5];
        let Err(Error::Schema(v)) = r.validate() else { panic!("expected schema violation") };
        assert!(v.mentions("$.condition"));
        assert!(v.mentions("$.taglines[0]"));
    }
}
