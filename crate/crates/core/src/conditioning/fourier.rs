use crate::layout::BBox;
use crate::{Error, Result};
use std::f64::consts::PI;

pub const DEFAULT_NUM_FREQS: usize = 8;

/// Fourier features of a box's top-left and bottom-right corners.
///
/// For each coordinate `v` in `[x0, y0, x1, y1]` and each `k < num_freqs`
/// the output holds `sin(2^k π v)` followed by `cos(2^k π v)`, coordinate
/// by coordinate. Length is `8 * num_freqs`.
pub fn fourier_embed(b: &BBox, num_freqs: usize) -> Result<Vec<f64>> {
    if num_freqs == 0 {
        return Err(Error::InvalidInput("num_freqs must be positive".into()));
    }
    let r = b.clipped();
    let mut out = Vec::with_capacity(8 * num_freqs);
    for v in [r.x0, r.y0, r.x1, r.y1] {
        let mut freq = PI;
        for _ in 0..num_freqs {
            let (s, c) = (freq * v).sin_cos();
            out.push(s);
            out.push(c);
            freq *= 2.0;
        }
    }
    Ok(out)
}
