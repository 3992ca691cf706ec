use adcanvas::layout::{to_json_value, BBox, Element, Layout};
use serde_json::Value;

fn schema() -> Value {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../schema/layout.schema.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn schema_keys_match_serializer() {
    let s = schema();
    let layout = Layout::new(
        Element::subject(BBox::new(0.5, 0.6, 0.3, 0.4).unwrap()),
        vec![Element::nongraphic("vase", BBox::new(0.1, 0.9, 0.1, 0.1).unwrap()).unwrap()],
        vec![
            Element::logo(BBox::new(0.1, 0.05, 0.1, 0.04).unwrap()),
            Element::tagline(BBox::new(0.5, 0.1, 0.5, 0.05).unwrap(), "Hi"),
            Element::underlay(BBox::new(0.5, 0.1, 0.55, 0.07).unwrap()),
        ],
    )
    .unwrap();
    let v = to_json_value(&layout);
    let mut emitted: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    let mut required: Vec<&str> = s["required"].as_array().unwrap().iter().map(|k| k.as_str().unwrap()).collect();
    emitted.sort();
    required.sort();
    assert_eq!(emitted, required);

    let tagline = &s["properties"]["graphic"]["items"]["oneOf"][0];
    let mut tagline_keys: Vec<&str> = tagline["required"].as_array().unwrap().iter().map(|k| k.as_str().unwrap()).collect();
    tagline_keys.sort();
    let emitted_tagline = v["graphic"].as_array().unwrap().iter().find(|e| e["type"] == "Tagline").unwrap();
    let mut got: Vec<&str> = emitted_tagline.as_object().unwrap().keys().map(String::as_str).collect();
    got.sort();
    assert_eq!(got, tagline_keys);

    let bbox = &s["$defs"]["bbox"];
    assert_eq!((bbox["minItems"].as_u64(), bbox["maxItems"].as_u64()), (Some(4), Some(4)));
    assert_eq!((bbox["items"]["minimum"].as_f64(), bbox["items"]["maximum"].as_f64()), (Some(0.0), Some(1.0)));
}
