use adcanvas::dataset::{dataset_stats, evaluate_batch, load_dataset, load_sample};
use adcanvas::layout::{serialize_layout, to_json_value, BBox, Element, Layout};
use adcanvas::metrics::{aggregate, evaluate_layout, SubjectRegion};
use adcanvas::Error;
use image::{GrayImage, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::path::Path;

fn write_png(dir: &Path, rel: &str, w: u32, h: u32) {
    let path = dir.join(rel);
    std::fs::create_dir_all(path.parent().unwrap()).unwrap();
    if rel.starts_with("masks") {
        GrayImage::from_fn(w, h, |c, _| image::Luma([if c < w / 2 { 255 } else { 0 }])).save(path).unwrap();
    } else {
        RgbImage::from_fn(w, h, |c, r| image::Rgb([(c % 256) as u8, (r % 256) as u8, 100])).save(path).unwrap();
    }
}

fn layout(taglines: usize) -> Layout {
    let subject = Element::subject(BBox::new(0.5, 0.6, 0.4, 0.5).unwrap());
    let graphic = (0..taglines)
        .map(|i| Element::tagline(BBox::new(0.5, 0.05 + 0.05 * i as f64, 0.5, 0.04).unwrap(), format!("line {i}")))
        .collect();
    Layout::new(subject, vec![], graphic).unwrap()
}

fn record(id: &str, w: u32, h: u32, taglines: usize) -> Value {
    json!({
        "id": id,
        "image": format!("images/{id}.png"),
        "mask": format!("masks/{id}.png"),
        "prompt": {"foreground": "a red sneaker", "background": "a wooden floor"},
        "taglines": (0..taglines).map(|i| format!("line {i}")).collect::<Vec<_>>(),
        "layout": to_json_value(&layout(taglines)),
        "width": w,
        "height": h,
        "occlusion": "no_occ",
        "product_class": "sneaker",
    })
}

fn fixture(dir: &Path, id: &str, w: u32, h: u32, taglines: usize) -> Value {
    write_png(dir, &format!("images/{id}.png"), w, h);
    write_png(dir, &format!("masks/{id}.png"), w, h);
    record(id, w, h, taglines)
}

#[test]
fn minimal_record_loads() {
    let dir = tempfile::tempdir().unwrap();
    let rec = fixture(dir.path(), "a", 64, 64, 1);
    let s = load_sample(&rec.to_string(), dir.path()).unwrap();
    assert_eq!(s.id, "a");
    assert_eq!(s.taglines, vec!["line 0"]);
    // 0.4 / 0.5 on a square canvas
    assert!((s.fg_ratio - 0.8).abs() < 1e-12);
}

#[test]
fn tagline_without_content_names_the_element() {
    let dir = tempfile::tempdir().unwrap();
    let mut rec = fixture(dir.path(), "a", 64, 64, 2);
    rec["layout"]["graphic"][1].as_object_mut().unwrap().remove("content");
    let Err(Error::Schema(v)) = load_sample(&rec.to_string(), dir.path()) else { panic!("expected rejection") };
    assert!(v.mentions("$.layout.graphic[1].content"), "{v}");
}

#[test]
fn mask_size_mismatch_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let rec = fixture(dir.path(), "a", 64, 64, 1);
    write_png(dir.path(), "masks/a.png", 32, 32);
    let Err(Error::Schema(v)) = load_sample(&rec.to_string(), dir.path()) else { panic!("expected rejection") };
    assert!(v.mentions("$.mask"));
}

#[test]
fn every_violation_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let mut rec = record("a", 64, 64, 1);
    rec["occlusion"] = json!("sometimes");
    rec["width"] = json!(-3);
    rec["prompt"] = json!({"foreground": "", "background": "x"});
    let Err(Error::Schema(v)) = load_sample(&rec.to_string(), dir.path()) else { panic!("expected rejection") };
    for path in ["$.image", "$.mask", "$.occlusion", "$.width", "$.prompt"] {
        assert!(v.mentions(path), "missing {path} in {v}");
    }
    // idempotent
    let Err(Error::Schema(again)) = load_sample(&rec.to_string(), dir.path()) else { panic!() };
    assert_eq!(v, again);
}

#[test]
fn stats_over_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let sizes = [(171, 250, 1), (100, 100, 2), (100, 100, 6), (100, 150, 3), (75, 100, 1)];
    let mut records = Vec::new();
    for (i, &(w, h, n)) in sizes.iter().enumerate() {
        let id = format!("s{i}");
        let rec = fixture(dir.path(), &id, w, h, n);
        std::fs::write(dir.path().join(format!("{id}.json")), rec.to_string()).unwrap();
        records.push(format!("{id}.json"));
    }
    std::fs::write(dir.path().join("bad.json"), "{\"id\": 3}").unwrap();
    records.push("bad.json".into());
    let manifest = dir.path().join("manifest.json");
    std::fs::write(&manifest, json!({"records": records}).to_string()).unwrap();

    let (samples, invalid) = load_dataset(&manifest).unwrap();
    let stats = dataset_stats(&samples, &invalid);
    assert_eq!(stats.samples, 5);
    let ratios: Vec<f64> = stats.aspect_ratios.iter().map(|b| b.ratio).collect();
    assert_eq!(ratios.len(), 4);
    for (got, want) in ratios.iter().zip([0.667, 0.684, 0.75, 1.0]) {
        assert!((got - want).abs() < 2e-3, "{got} vs {want}");
    }
    assert_eq!(stats.aspect_ratios.iter().map(|b| b.count).sum::<usize>(), stats.samples);
    assert_eq!(stats.element_counts["tagline"], 13);
    assert_eq!(stats.element_counts["subject"], 5);
    assert_eq!(stats.many_taglines, 1);
    assert_eq!(stats.invalid.len(), 1);
    println!("tail fraction (more than five taglines): {:.3}", stats.many_taglines_fraction);

    let empty = dataset_stats(&[], &[]);
    assert_eq!(empty.samples, 0);
    assert!(empty.aspect_ratios.is_empty());
}

fn batch_dirs(n: usize) -> (tempfile::TempDir, tempfile::TempDir) {
    let refs = tempfile::tempdir().unwrap();
    let preds = tempfile::tempdir().unwrap();
    for i in 0..n {
        let id = format!("r{i}");
        let rec = fixture(refs.path(), &id, 40, 40, 2);
        std::fs::write(refs.path().join(format!("{id}.json")), rec.to_string()).unwrap();
    }
    (refs, preds)
}

#[test]
fn self_comparison_is_perfect() {
    let (refs, preds) = batch_dirs(3);
    for i in 0..3 {
        std::fs::write(preds.path().join(format!("r{i}.json")), serialize_layout(&layout(2))).unwrap();
    }
    std::fs::write(preds.path().join("stray.json"), serialize_layout(&layout(2))).unwrap();
    let report = evaluate_batch(preds.path(), refs.path()).unwrap();
    assert_eq!(report.aggregate.tmr, 1.0);
    assert_eq!(report.aggregate.frc, 1.0);
    assert_eq!(report.unpaired_predictions, vec!["stray"]);
    assert!(report.unpaired_references.is_empty());
}

#[test]
fn dropped_tagline_halves_tmr() {
    let (refs, preds) = batch_dirs(3);
    std::fs::write(preds.path().join("r0.json"), serialize_layout(&layout(2))).unwrap();
    std::fs::write(preds.path().join("r1.json"), serialize_layout(&layout(1))).unwrap();
    std::fs::write(preds.path().join("r2.json"), "{not json").unwrap();
    let report = evaluate_batch(preds.path(), refs.path()).unwrap();
    assert_eq!(report.aggregate.tmr, 0.5);
    assert_eq!(report.rejected_predictions.len(), 1);
    assert!(report.unpaired_references.is_empty());
}

#[test]
fn no_pairs_is_an_error() {
    let (refs, preds) = batch_dirs(1);
    std::fs::write(preds.path().join("other.json"), serialize_layout(&layout(2))).unwrap();
    assert!(matches!(evaluate_batch(preds.path(), refs.path()), Err(Error::InvalidInput(_))));
}

#[test]
fn aggregate_matches_second_pass() {
    let (refs, preds) = batch_dirs(12);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut layouts = Vec::new();
    for i in 0..12 {
        let subject = Element::subject(BBox::new(rng.gen_range(0.3..0.7), rng.gen_range(0.4..0.7), 0.3, 0.4).unwrap());
        let graphic: Vec<Element> = (0..rng.gen_range(0..4))
            .map(|k| {
                let b = BBox::new(rng.gen_range(0.1..0.9), rng.gen_range(0.1..0.9), rng.gen_range(0.05..0.4), rng.gen_range(0.02..0.2)).unwrap();
                if rng.gen_bool(0.5) { Element::underlay(b) } else { Element::tagline(b, format!("t{k}")) }
            })
            .collect();
        let l = Layout::new(subject, vec![], graphic).unwrap();
        std::fs::write(preds.path().join(format!("r{i}.json")), serialize_layout(&l)).unwrap();
        layouts.push(l);
    }
    let report = evaluate_batch(preds.path(), refs.path()).unwrap();
    assert_eq!(report.samples.len(), 12);

    // independent second pass: plain means over defined values
    let mut sums = [0.0; 4];
    let (mut und_sum, mut und_n) = (0.0, 0);
    for l in &layouts {
        let region = SubjectRegion::BBox(*l.subject().bbox());
        let (m, _) = evaluate_layout(l, &region, None, (40, 40)).unwrap();
        sums[0] += m.val;
        sums[1] += m.ove;
        sums[2] += m.ali;
        sums[3] += m.occ;
        if let Some(u) = m.und_l {
            und_sum += u;
            und_n += 1;
        }
    }
    let agg = &report.aggregate;
    for (got, sum) in [agg.val, agg.ove, agg.ali, agg.occ].iter().zip(sums) {
        assert!((got - sum / 12.0).abs() < 1e-12);
    }
    match agg.und_l {
        Some(u) => assert!((u - und_sum / f64::from(und_n)).abs() < 1e-12),
        None => assert_eq!(und_n, 0),
    }
    assert_eq!(&aggregate(&report.samples).unwrap(), agg);
}
