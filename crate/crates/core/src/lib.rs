//! Product-centric advertising poster engine.
//!
//! The crate is organised around the four stages of poster design:
//! prompt generation, layout generation, background generation and
//! graphics rendering. Model-backed stages are reached through the
//! [`pipeline`] backend traits; everything else (layout geometry, quality
//! metrics, layout conditioning math, rendering heuristics and dataset
//! validation) is implemented here directly.

pub mod conditioning;
pub mod dataset;
mod error;
pub mod layout;
pub mod metrics;
pub mod pipeline;
pub mod renderer;
mod warning;

pub use error::{Error, Result, SchemaViolation, Violation};
pub use warning::Warning;
