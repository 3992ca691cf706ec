use super::load_sample_file;
use crate::layout::{parse_layout_with, ParseMode};
use crate::metrics::{aggregate, evaluate_layout, MetricsReport, SampleReport, SubjectRegion};
use crate::{Error, Result};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

fn json_files(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "json") {
            let stem = path.file_stem().expect("file has a name").to_string_lossy().into_owned();
            out.insert(stem, path);
        }
    }
    Ok(out)
}

/// Scores each prediction layout in `predictions` (`<id>.json`) against
/// the reference record with the same id in `references`. Prediction files
/// are read leniently: out-of-range coordinates are clamped with a warning.
/// Utility and occlusion use the predicted subject box; unreadability uses
/// the reference's clean background when the record has one.
pub fn evaluate_batch(predictions: &Path, references: &Path) -> Result<MetricsReport> {
    let mut refs = BTreeMap::new();
    for path in json_files(references)?.into_values() {
        let sample = load_sample_file(&path)?;
        if let Some(prev) = refs.insert(sample.id.clone(), sample) {
            return Err(Error::InvalidInput(format!("duplicate reference id {}", prev.id)));
        }
    }
    let preds = json_files(predictions)?;

    let mut samples = Vec::new();
    let mut rejected = Vec::new();
    for (id, path) in &preds {
        let Some(sample) = refs.get(id) else { continue };
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let parsed = match parse_layout_with(&text, ParseMode::Clamp) {
            Ok(p) => p,
            Err(v) => {
                rejected.push((id.clone(), v.to_string()));
                continue;
            }
        };
        let canvas = sample.canvas()?;
        let background = match &sample.background {
            Some(p) => Some(image::open(p)?.to_rgb8()),
            None => None,
        };
        let region = SubjectRegion::BBox(*parsed.layout.subject().bbox());
        let (metrics, metric_warnings) =
            evaluate_layout(&parsed.layout, &region, background.as_ref(), (sample.width, sample.height))?;
        let mut report = SampleReport::new(id.clone(), &parsed.layout, sample.taglines.len(), &canvas, metrics);
        report.warnings = parsed.warnings;
        report.warnings.extend(metric_warnings);
        samples.push(report);
    }
    if samples.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no prediction in {} pairs with a reference in {}",
            predictions.display(),
            references.display()
        )));
    }
    Ok(MetricsReport {
        aggregate: aggregate(&samples)?,
        samples,
        unpaired_predictions: preds.keys().filter(|k| !refs.contains_key(*k)).cloned().collect(),
        unpaired_references: refs.keys().filter(|k| !preds.contains_key(*k)).cloned().collect(),
        rejected_predictions: rejected,
    })
}
