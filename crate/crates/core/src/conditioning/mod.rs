//! Layout conditioning math for the background generator.
//!
//! Each layout element becomes a token: a name embedding concatenated with
//! Fourier features of its corners, fused by a small MLP. A gated
//! self-attention layer mixes those tokens into the visual tokens, and only
//! the deepest UNet blocks receive it. No diffusion model runs here; this
//! module computes the conditioning tensors and block selection exactly.

mod embed;
mod fourier;
mod gsa;
mod matrix;
mod unet;

pub use embed::HashEmbedder;
pub use fourier::{fourier_embed, DEFAULT_NUM_FREQS};
pub use gsa::{build_layout_tokens, gated_self_attention, self_attention, Dense, GsaParams, Mlp};
pub use matrix::Matrix;
pub use unet::{dlc_blocks, BlockStage, TrainingDescriptor, TrainingPhase, UnetBlock, UnetSpec};
