use adcanvas::layout::{
    parse_layout, serialize_layout, BBox, CanvasSpec, Element, Layout, OcclusionClass, PromptPair,
};
use adcanvas::pipeline::{
    BackendFailure, BackgroundBackend, HttpBackend, HttpEndpoint, LayoutBackend, LayoutRequest, PromptBackend,
};
use adcanvas::Warning;
use image::{ImageFormat, RgbImage, RgbaImage};
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::thread::JoinHandle;

struct Reply {
    status: u16,
    content_type: &'static str,
    body: Vec<u8>,
}

fn reply(status: u16, content_type: &'static str, body: impl Into<Vec<u8>>) -> Reply {
    Reply { status, content_type, body: body.into() }
}

/// Serves one canned reply per connection and returns the raw request bodies.
fn serve(replies: Vec<Reply>) -> (String, JoinHandle<Vec<Vec<u8>>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/stage", listener.local_addr().unwrap());
    let handle = std::thread::spawn(move || {
        let mut bodies = Vec::new();
        for r in replies {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream);
            let mut length = 0usize;
            let mut chunked = false;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                let lower = line.to_ascii_lowercase();
                if let Some(v) = lower.strip_prefix("content-length:") {
                    length = v.trim().parse().unwrap();
                }
                if lower.starts_with("transfer-encoding:") && lower.contains("chunked") {
                    chunked = true;
                }
                if line == "\r\n" || line.is_empty() {
                    break;
                }
            }
            let mut body = Vec::new();
            if chunked {
                loop {
                    let mut size = String::new();
                    reader.read_line(&mut size).unwrap();
                    let n = usize::from_str_radix(size.trim(), 16).unwrap();
                    let mut chunk = vec![0; n + 2];
                    reader.read_exact(&mut chunk).unwrap();
                    if n == 0 {
                        break;
                    }
                    body.extend_from_slice(&chunk[..n]);
                }
            } else {
                body.resize(length, 0);
                reader.read_exact(&mut body).unwrap();
            }
            bodies.push(body);
            let mut stream = reader.into_inner();
            let head = format!(
                "HTTP/1.1 {} X\r\ncontent-type: {}\r\ncontent-length: {}\r\nconnection: close\r\n\r\n",
                r.status,
                r.content_type,
                r.body.len()
            );
            stream.write_all(head.as_bytes()).unwrap();
            stream.write_all(&r.body).unwrap();
        }
        bodies
    });
    (url, handle)
}

fn canvas() -> CanvasSpec {
    CanvasSpec::new(64, 48, 0.5, OcclusionClass::NoOcc("mug".into()), None).unwrap()
}

fn fixture_layout() -> Layout {
    let subject = Element::subject(BBox::new(0.5, 0.6, 0.375, 0.5).unwrap());
    let graphic = vec![Element::tagline(BBox::new(0.5, 0.1, 0.6, 0.08).unwrap(), "Hot deals")];
    Layout::new(subject, vec![], graphic).unwrap()
}

fn request() -> LayoutRequest {
    LayoutRequest::new(&canvas(), PromptPair::new("a mug", "a desk").unwrap(), &["Hot deals".into()]).unwrap()
}

fn backend(url: String, retries: u32) -> HttpBackend {
    HttpBackend::new(HttpEndpoint { url, timeout_ms: 5_000, retries }).unwrap()
}

#[test]
fn layout_echo_round_trips() {
    let text = serialize_layout(&fixture_layout());
    let (url, server) = serve(vec![reply(200, "application/json", text.clone())]);
    let parsed = backend(url, 0).layout(&request()).unwrap();
    assert_eq!(parsed.layout, fixture_layout());
    let sent: LayoutRequest = serde_json::from_slice(&server.join().unwrap()[0]).unwrap();
    assert_eq!(sent, request());
}

#[test]
fn server_error_is_backend_error() {
    let (url, _server) = serve(vec![reply(500, "text/plain", "boom")]);
    match backend(url, 0).layout(&request()) {
        Err(BackendFailure::Error(msg)) => assert!(msg.contains("500") && msg.contains("boom"), "{msg}"),
        other => panic!("expected backend error, got {other:?}"),
    }
}

#[test]
fn retries_after_server_error() {
    let text = serialize_layout(&fixture_layout());
    let (url, server) = serve(vec![reply(503, "text/plain", "busy"), reply(200, "application/json", text)]);
    let parsed = backend(url, 1).layout(&request()).unwrap();
    assert_eq!(parsed.layout.tagline_count(), 1);
    assert_eq!(server.join().unwrap().len(), 2);
}

#[test]
fn out_of_range_box_is_clamped_with_warning() {
    let mut v: serde_json::Value = serde_json::from_str(&serialize_layout(&fixture_layout())).unwrap();
    v["graphic"][0]["bbox"][1] = serde_json::json!(-0.2);
    let (url, _server) = serve(vec![reply(200, "application/json", v.to_string())]);
    let parsed = backend(url, 0).layout(&request()).unwrap();
    assert_eq!(parsed.layout.graphic()[0].bbox().y, 0.0);
    assert!(parsed.warnings.iter().any(|w| matches!(w, Warning::Clamped { original, clamped, .. } if *original == -0.2 && *clamped == 0.0)));
    // the strict reader refuses the same document
    assert!(parse_layout(&v.to_string()).is_err());
}

#[test]
fn malformed_layout_is_schema_violation_with_excerpt() {
    let (url, _server) = serve(vec![reply(200, "application/json", "{\"subject\": 3}")]);
    match backend(url, 0).layout(&request()) {
        Err(BackendFailure::Schema(v)) => assert!(v.to_string().contains("{\"subject\": 3}"), "{v}"),
        other => panic!("expected schema violation, got {other:?}"),
    }
}

#[test]
fn prompt_stage_posts_png() {
    let (url, server) = serve(vec![reply(200, "application/json", r#"{"foreground": "a mug", "background": "a desk"}"#)]);
    let fg = RgbaImage::from_pixel(5, 7, image::Rgba([1, 2, 3, 255]));
    let pair = backend(url, 0).prompts(&fg).unwrap();
    assert_eq!(pair, PromptPair::new("a mug", "a desk").unwrap());
    let sent = image::load_from_memory_with_format(&server.join().unwrap()[0], ImageFormat::Png).unwrap();
    assert_eq!(sent.to_rgba8(), fg);
}

#[test]
fn background_stage_sends_multipart_and_checks_size() {
    let mut png = Vec::new();
    RgbImage::from_pixel(64, 48, image::Rgb([9, 9, 9]))
        .write_to(&mut std::io::Cursor::new(&mut png), ImageFormat::Png)
        .unwrap();
    let mut small = Vec::new();
    RgbImage::new(8, 8).write_to(&mut std::io::Cursor::new(&mut small), ImageFormat::Png).unwrap();
    let (url, server) = serve(vec![reply(200, "image/png", png), reply(200, "image/png", small)]);
    let b = backend(url, 0);
    let prompt = PromptPair::new("a mug", "a desk").unwrap();
    let fg = RgbaImage::from_pixel(4, 8, image::Rgba([200, 0, 0, 255]));
    let img = b.background(&prompt, &fixture_layout(), &fg, &canvas()).unwrap();
    assert_eq!(img.dimensions(), (64, 48));
    assert!(matches!(b.background(&prompt, &fixture_layout(), &fg, &canvas()), Err(BackendFailure::Schema(_))));
    let body = String::from_utf8_lossy(&server.join().unwrap()[0]).into_owned();
    for field in ["name=\"prompt\"", "name=\"layout\"", "name=\"foreground\"", "Hot deals"] {
        assert!(body.contains(field), "multipart body lacks {field}");
    }
}

#[test]
fn unreachable_endpoint_is_backend_error() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/", listener.local_addr().unwrap());
    drop(listener);
    assert!(matches!(backend(url, 0).layout(&request()), Err(BackendFailure::Error(_))));
}
