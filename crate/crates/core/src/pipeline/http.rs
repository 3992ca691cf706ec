//! Remote model services over HTTP.
//!
//! * prompt: `POST` the foreground PNG, answer `{"foreground": .., "background": ..}`
//! * layout: `POST` the layout request JSON, answer layout JSON
//! * background: `POST` multipart (`prompt`, `layout`, `foreground`), answer PNG

use super::request::LayoutRequest;
use super::{BackgroundBackend, BackendFailure, LayoutBackend, PromptBackend};
use crate::layout::{parse_layout_with, serialize_layout, CanvasSpec, Layout, ParseMode, ParsedLayout, PromptPair};
use crate::{SchemaViolation, Violation};
use image::{ImageFormat, RgbImage, RgbaImage};
use reqwest::blocking::{multipart, Client, RequestBuilder, Response};
use serde::{Deserialize, Serialize};
use std::io::Cursor;
use std::time::Duration;

pub const DEFAULT_TIMEOUT_MS: u64 = 60_000;
const EXCERPT_LEN: usize = 200;

fn default_timeout() -> u64 {
    DEFAULT_TIMEOUT_MS
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HttpEndpoint {
    pub url: String,
    #[serde(default = "default_timeout")]
    pub timeout_ms: u64,
    /// Extra attempts after a network failure or a 5xx answer.
    #[serde(default)]
    pub retries: u32,
}

impl HttpEndpoint {
    pub fn new(url: impl Into<String>) -> Self {
        Self { url: url.into(), timeout_ms: DEFAULT_TIMEOUT_MS, retries: 0 }
    }
}

/// Client for one stage's endpoint. Safe to share between threads.
#[derive(Debug, Clone)]
pub struct HttpBackend {
    endpoint: HttpEndpoint,
    client: Client,
}

fn excerpt(body: &[u8]) -> String {
    let text = String::from_utf8_lossy(body);
    let mut end = text.len().min(EXCERPT_LEN);
    while !text.is_char_boundary(end) {
        end -= 1;
    }
    let mut s = text[..end].to_string();
    if end < text.len() {
        s.push_str("...");
    }
    s
}

fn malformed(path: &str, message: impl Into<String>, body: &[u8]) -> BackendFailure {
    BackendFailure::Schema(SchemaViolation {
        violations: vec![Violation::new(path, message), Violation::new("$", format!("response body: {}", excerpt(body)))],
    })
}

fn png_bytes(image: &RgbaImage) -> Result<Vec<u8>, BackendFailure> {
    let mut buf = Cursor::new(Vec::new());
    image
        .write_to(&mut buf, ImageFormat::Png)
        .map_err(|e| BackendFailure::Error(format!("encoding foreground: {e}")))?;
    Ok(buf.into_inner())
}

impl HttpBackend {
    pub fn new(endpoint: HttpEndpoint) -> Result<Self, BackendFailure> {
        let client = Client::builder()
            .timeout(Duration::from_millis(endpoint.timeout_ms))
            .build()
            .map_err(|e| BackendFailure::Error(format!("building HTTP client: {e}")))?;
        Ok(Self { endpoint, client })
    }

    pub fn endpoint(&self) -> &HttpEndpoint {
        &self.endpoint
    }

    fn send(&self, build: impl Fn(&Client) -> Result<RequestBuilder, BackendFailure>) -> Result<Vec<u8>, BackendFailure> {
        let mut attempt = 0;
        loop {
            let failure = match build(&self.client)?.send() {
                Ok(resp) => match self.read(resp) {
                    Ok(body) => return Ok(body),
                    Err((retryable, f)) if retryable => f,
                    Err((_, f)) => return Err(f),
                },
                Err(e) if e.is_timeout() => BackendFailure::Timeout { timeout_ms: self.endpoint.timeout_ms },
                Err(e) => BackendFailure::Error(format!("{}: {e}", self.endpoint.url)),
            };
            if attempt >= self.endpoint.retries {
                return Err(failure);
            }
            attempt += 1;
        }
    }

    fn read(&self, resp: Response) -> Result<Vec<u8>, (bool, BackendFailure)> {
        let status = resp.status();
        let body = resp.bytes().map_err(|e| {
            let f = if e.is_timeout() { BackendFailure::Timeout { timeout_ms: self.endpoint.timeout_ms } } else { BackendFailure::Error(e.to_string()) };
            (true, f)
        })?;
        if status.is_success() {
            Ok(body.to_vec())
        } else {
            let f = BackendFailure::Error(format!("HTTP {}: {}", status.as_u16(), excerpt(&body)));
            Err((status.is_server_error(), f))
        }
    }
}

impl PromptBackend for HttpBackend {
    fn prompts(&self, foreground: &RgbaImage) -> Result<PromptPair, BackendFailure> {
        let png = png_bytes(foreground)?;
        let body = self.send(|c| Ok(c.post(&self.endpoint.url).header("content-type", "image/png").body(png.clone())))?;
        let pair: PromptPair =
            serde_json::from_slice(&body).map_err(|e| malformed("$", format!("expected a prompt pair: {e}"), &body))?;
        pair.validate().map_err(|e| malformed("$", e.to_string(), &body))?;
        Ok(pair)
    }
}

impl LayoutBackend for HttpBackend {
    fn layout(&self, request: &LayoutRequest) -> Result<ParsedLayout, BackendFailure> {
        let json = serde_json::to_vec(request).map_err(|e| BackendFailure::Error(e.to_string()))?;
        let body =
            self.send(|c| Ok(c.post(&self.endpoint.url).header("content-type", "application/json").body(json.clone())))?;
        let text = std::str::from_utf8(&body).map_err(|_| malformed("$", "response is not UTF-8", &body))?;
        parse_layout_with(text, ParseMode::Clamp).map_err(|mut v| {
            v.violations.push(Violation::new("$", format!("response body: {}", excerpt(&body))));
            BackendFailure::Schema(v)
        })
    }
}

impl BackgroundBackend for HttpBackend {
    fn background(
        &self,
        prompt: &PromptPair,
        layout: &Layout,
        foreground: &RgbaImage,
        canvas: &CanvasSpec,
    ) -> Result<RgbImage, BackendFailure> {
        let prompt_json = serde_json::to_string(prompt).map_err(|e| BackendFailure::Error(e.to_string()))?;
        let layout_json = serialize_layout(layout);
        let png = png_bytes(foreground)?;
        let body = self.send(|c| {
            let part = multipart::Part::bytes(png.clone())
                .file_name("foreground.png")
                .mime_str("image/png")
                .map_err(|e| BackendFailure::Error(e.to_string()))?;
            let form = multipart::Form::new()
                .text("prompt", prompt_json.clone())
                .text("layout", layout_json.clone())
                .text("width", canvas.width().to_string())
                .text("height", canvas.height().to_string())
                .part("foreground", part);
            Ok(c.post(&self.endpoint.url).multipart(form))
        })?;
        let image = image::load_from_memory_with_format(&body, ImageFormat::Png)
            .map_err(|e| malformed("$", format!("expected a PNG: {e}"), &body))?
            .to_rgb8();
        if image.dimensions() != (canvas.width(), canvas.height()) {
            return Err(BackendFailure::Schema(SchemaViolation::single(
                "$",
                format!(
                    "background is {}x{} but the canvas is {}x{}",
                    image.width(),
                    image.height(),
                    canvas.width(),
                    canvas.height()
                ),
            )));
        }
        Ok(image)
    }
}
