use super::{InvalidRecord, Sample};
use crate::layout::ElementKind;
use serde::Serialize;
use std::collections::BTreeMap;

/// Canvas aspect ratios closer than this share a bucket.
pub const ASPECT_TOLERANCE: f64 = 1e-3;

/// Tagline counts above this are tallied as the tail.
const TAIL_TAGLINES: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AspectBucket {
    /// Aspect ratio (width / height) of the first sample in the bucket.
    pub ratio: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DatasetStats {
    pub samples: usize,
    /// Sorted by ratio; counts sum to `samples`.
    pub aspect_ratios: Vec<AspectBucket>,
    /// Element counts by kind: subject, tagline, underlay, logo, nongraphic.
    pub element_counts: BTreeMap<String, usize>,
    /// Number of samples per tagline count.
    pub tagline_counts: BTreeMap<usize, usize>,
    /// Samples with more than five taglines.
    pub many_taglines: usize,
    pub many_taglines_fraction: f64,
    pub invalid: Vec<InvalidRecord>,
}

pub fn dataset_stats(samples: &[Sample], invalid: &[InvalidRecord]) -> DatasetStats {
    let mut stats = DatasetStats { samples: samples.len(), invalid: invalid.to_vec(), ..Default::default() };
    for kind in ["subject", "tagline", "underlay", "logo", "nongraphic"] {
        stats.element_counts.insert(kind.into(), 0);
    }
    for s in samples {
        let ratio = f64::from(s.width) / f64::from(s.height);
        match stats.aspect_ratios.iter_mut().find(|b| (b.ratio - ratio).abs() <= ASPECT_TOLERANCE) {
            Some(b) => b.count += 1,
            None => stats.aspect_ratios.push(AspectBucket { ratio, count: 1 }),
        }
        let l = &s.layout;
        let mut bump = |k: &str| *stats.element_counts.get_mut(k).expect("kind registered") += 1;
        bump("subject");
        for _ in l.nongraphic() {
            bump("nongraphic");
        }
        for e in l.graphic() {
            bump(match e.kind() {
                ElementKind::Tagline => "tagline",
                ElementKind::Underlay => "underlay",
                _ => "logo",
            });
        }
        let n = l.tagline_count();
        *stats.tagline_counts.entry(n).or_default() += 1;
        if n > TAIL_TAGLINES {
            stats.many_taglines += 1;
        }
    }
    stats.aspect_ratios.sort_by(|a, b| a.ratio.total_cmp(&b.ratio));
    if !samples.is_empty() {
        stats.many_taglines_fraction = stats.many_taglines as f64 / samples.len() as f64;
    }
    stats
}
