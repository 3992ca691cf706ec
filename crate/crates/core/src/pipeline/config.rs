use super::http::{HttpBackend, HttpEndpoint, DEFAULT_TIMEOUT_MS};
use super::{BackendFailure, Backends, Stage};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::sync::Arc;

/// Backend choice for one stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StageConfig {
    Stub {
        /// Time after which a slow-stage warning is recorded.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        budget_ms: Option<u64>,
    },
    Http(HttpEndpoint),
}

impl Default for StageConfig {
    fn default() -> Self {
        StageConfig::Stub { budget_ms: None }
    }
}

impl StageConfig {
    /// Slow-stage budget; remote stages are bounded by their timeout instead.
    pub fn budget_ms(&self) -> Option<u64> {
        match self {
            StageConfig::Stub { budget_ms } => *budget_ms,
            StageConfig::Http(_) => None,
        }
    }
}

/// Per-stage backend selection, e.g.
///
/// ```json
/// {"prompt": {"kind": "stub"},
///  "layout": {"kind": "http", "url": "http://localhost:8001/layout", "timeout_ms": 30000, "retries": 2},
///  "background": {"kind": "stub"}}
/// ```
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendsConfig {
    pub prompt: StageConfig,
    pub layout: StageConfig,
    pub background: StageConfig,
}

/// Environment variables that point a stage at a URL, overriding the file.
pub const URL_ENV: [(Stage, &str); 3] = [
    (Stage::Prompt, "ADCANVAS_PROMPT_URL"),
    (Stage::Layout, "ADCANVAS_LAYOUT_URL"),
    (Stage::Background, "ADCANVAS_BACKGROUND_URL"),
];

impl BackendsConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
    }

    fn stage_mut(&mut self, stage: Stage) -> Option<&mut StageConfig> {
        match stage {
            Stage::Prompt => Some(&mut self.prompt),
            Stage::Layout => Some(&mut self.layout),
            Stage::Background => Some(&mut self.background),
            Stage::Render => None,
        }
    }

    /// Applies URL overrides from `lookup` (normally the process environment).
    pub fn with_env(mut self, lookup: impl Fn(&str) -> Option<String>) -> Self {
        for (stage, var) in URL_ENV {
            let Some(url) = lookup(var).filter(|u| !u.trim().is_empty()) else { continue };
            let slot = self.stage_mut(stage).expect("model stages only");
            *slot = match slot {
                StageConfig::Http(e) => StageConfig::Http(HttpEndpoint { url, ..e.clone() }),
                StageConfig::Stub { .. } => {
                    StageConfig::Http(HttpEndpoint { url, timeout_ms: DEFAULT_TIMEOUT_MS, retries: 0 })
                }
            };
        }
        self
    }

    pub fn build(&self) -> std::result::Result<Backends, BackendFailure> {
        let http = |e: &HttpEndpoint| HttpBackend::new(e.clone()).map(Arc::new);
        let mut backends = Backends::stub();
        if let StageConfig::Http(e) = &self.prompt {
            backends.prompt = http(e)?;
        }
        if let StageConfig::Http(e) = &self.layout {
            backends.layout = http(e)?;
        }
        if let StageConfig::Http(e) = &self.background {
            backends.background = http(e)?;
        }
        backends.budgets = [self.prompt.budget_ms(), self.layout.budget_ms(), self.background.budget_ms(), None];
        Ok(backends)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_mixed_config() {
        let cfg: BackendsConfig = serde_json::from_str(
            r#"{"layout": {"kind": "http", "url": "http://x/layout", "retries": 2}, "background": {"kind": "stub", "budget_ms": 5}}"#,
        )
        .unwrap();
        assert_eq!(cfg.prompt, StageConfig::default());
        assert_eq!(
            cfg.layout,
            StageConfig::Http(HttpEndpoint { url: "http://x/layout".into(), timeout_ms: DEFAULT_TIMEOUT_MS, retries: 2 })
        );
        assert_eq!(cfg.background.budget_ms(), Some(5));
        assert!(serde_json::from_str::<BackendsConfig>(r#"{"render": {}}"#).is_err());
    }

    #[test]
    fn env_overrides_urls() {
        let base = BackendsConfig {
            layout: StageConfig::Http(HttpEndpoint { url: "http://old".into(), timeout_ms: 10, retries: 1 }),
            ..Default::default()
        };
        let cfg = base.with_env(|k| match k {
            "ADCANVAS_LAYOUT_URL" => Some("http://new".into()),
            "ADCANVAS_PROMPT_URL" => Some("http://p".into()),
            _ => None,
        });
        assert_eq!(cfg.layout, StageConfig::Http(HttpEndpoint { url: "http://new".into(), timeout_ms: 10, retries: 1 }));
        assert!(matches!(cfg.prompt, StageConfig::Http(ref e) if e.url == "http://p"));
        assert_eq!(cfg.background, StageConfig::default());
    }
}
