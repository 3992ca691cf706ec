use super::fourier::{fourier_embed, DEFAULT_NUM_FREQS};
use super::matrix::Matrix;
use crate::layout::BBox;
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Affine layer `x W + b` with `W` of shape `in x out`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub weight: Matrix,
    pub bias: Vec<f64>,
}

/// Stack of dense layers with SiLU between them (none after the last).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Dense>,
}

fn silu(x: f64) -> f64 {
    x / (1.0 + (-x).exp())
}

impl Mlp {
    pub fn input_dim(&self) -> usize {
        self.layers.first().map_or(0, |l| l.weight.rows())
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.weight.cols())
    }

    fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::Shape("MLP needs at least one layer".into()));
        }
        for (i, l) in self.layers.iter().enumerate() {
            if l.bias.len() != l.weight.cols() {
                return Err(Error::Shape(format!("layer {i}: bias length {} vs {} outputs", l.bias.len(), l.weight.cols())));
            }
            if let Some(next) = self.layers.get(i + 1) {
                if next.weight.rows() != l.weight.cols() {
                    return Err(Error::Shape(format!("layer {i} outputs {} but layer {} expects {}", l.weight.cols(), i + 1, next.weight.rows())));
                }
            }
        }
        Ok(())
    }

    pub fn forward(&self, x: &Matrix) -> Result<Matrix> {
        let mut h = x.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            h = h.matmul(&layer.weight)?.add_row_vector(&layer.bias)?;
            if i + 1 < self.layers.len() {
                h = h.map(silu);
            }
        }
        Ok(h)
    }
}

/// Parameters of the layout-token MLP and the gated self-attention layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GsaParams {
    pub wq: Matrix,
    pub wk: Matrix,
    pub wv: Matrix,
    pub wo: Matrix,
    /// Gate; the layer contributes `tanh(gamma)` of its attention output.
    pub gamma: f64,
    #[serde(default = "default_freqs")]
    pub num_freqs: usize,
    pub mlp: Mlp,
}

fn default_freqs() -> usize {
    DEFAULT_NUM_FREQS
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    let bound = 1.0 / (rows.max(1) as f64).sqrt();
    let data = (0..rows * cols).map(|_| rng.gen_range(-bound..bound)).collect();
    Matrix::from_vec(rows, cols, data).expect("shape is consistent")
}

impl GsaParams {
    /// Seeded random parameters for model dimension `dim`, name embeddings
    /// of `name_dim` and the given hidden MLP widths.
    pub fn random(dim: usize, name_dim: usize, hidden: &[usize], num_freqs: usize, gamma: f64, seed: u64) -> Result<Self> {
        if dim == 0 || num_freqs == 0 {
            return Err(Error::InvalidInput("dimension and num_freqs must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut widths = vec![name_dim + 8 * num_freqs];
        widths.extend_from_slice(hidden);
        widths.push(dim);
        let layers = widths
            .windows(2)
            .map(|w| Dense {
                weight: random_matrix(&mut rng, w[0], w[1]),
                bias: (0..w[1]).map(|_| rng.gen_range(-0.1..0.1)).collect(),
            })
            .collect();
        let params = Self {
            wq: random_matrix(&mut rng, dim, dim),
            wk: random_matrix(&mut rng, dim, dim),
            wv: random_matrix(&mut rng, dim, dim),
            wo: random_matrix(&mut rng, dim, dim),
            gamma,
            num_freqs,
            mlp: Mlp { layers },
        };
        params.validate()?;
        Ok(params)
    }

    pub fn dim(&self) -> usize {
        self.wq.rows()
    }

    /// Expected name-embedding length.
    pub fn name_dim(&self) -> usize {
        self.mlp.input_dim().saturating_sub(8 * self.num_freqs)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        for (name, m) in [("wq", &self.wq), ("wk", &self.wk), ("wv", &self.wv), ("wo", &self.wo)] {
            if m.shape() != (d, d) {
                return Err(Error::Shape(format!("{name} is {:?}, expected {d}x{d}", m.shape())));
            }
        }
        if !self.gamma.is_finite() {
            return Err(Error::InvalidInput("gamma must be finite".into()));
        }
        if self.num_freqs == 0 {
            return Err(Error::InvalidInput("num_freqs must be positive".into()));
        }
        self.mlp.validate()?;
        if self.mlp.output_dim() != d {
            return Err(Error::Shape(format!("MLP outputs {} but attention dimension is {d}", self.mlp.output_dim())));
        }
        if self.mlp.input_dim() < 8 * self.num_freqs {
            return Err(Error::Shape(format!(
                "MLP input {} is smaller than the {} Fourier features",
                self.mlp.input_dim(),
                8 * self.num_freqs
            )));
        }
        Ok(())
    }
}

/// Layout embeddings `E`: row `i` is `MLP(concat(name_i, fourier(box_i)))`.
pub fn build_layout_tokens(elements: &[(Vec<f64>, BBox)], params: &GsaParams) -> Result<Matrix> {
    let d = params.dim();
    if elements.is_empty() {
        return Ok(Matrix::zeros(0, d));
    }
    let name_dim = params.name_dim();
    let mut rows = Vec::with_capacity(elements.len());
    for (i, (name, bbox)) in elements.iter().enumerate() {
        if name.len() != name_dim {
            return Err(Error::Shape(format!("element {i}: name embedding has {} values, expected {name_dim}", name.len())));
        }
        let mut row = name.clone();
        row.extend(fourier_embed(bbox, params.num_freqs)?);
        rows.push(row);
    }
    let input = Matrix::from_rows(&rows, name_dim + 8 * params.num_freqs)?;
    params.mlp.forward(&input)
}

/// Single-head softmax self-attention with `1/sqrt(d)` scaling and an
/// output projection.
pub fn self_attention(x: &Matrix, params: &GsaParams) -> Result<Matrix> {
    let d = params.dim();
    if x.cols() != d {
        return Err(Error::Shape(format!("tokens have {} features, attention expects {d}", x.cols())));
    }
    let q = x.matmul(&params.wq)?;
    let k = x.matmul(&params.wk)?;
    let v = x.matmul(&params.wv)?;
    let scale = 1.0 / (d as f64).sqrt();
    let weights = q.matmul(&k.transpose())?.map(|s| s * scale).softmax_rows();
    weights.matmul(&v)?.matmul(&params.wo)
}

/// `V + tanh(gamma) * SA(cat(V, E))[:M]`, always `M x d`.
pub fn gated_self_attention(visual: &Matrix, layout: &Matrix, params: &GsaParams) -> Result<Matrix> {
    if visual.cols() != layout.cols() {
        return Err(Error::Shape(format!(
            "visual tokens have {} features but layout tokens have {}",
            visual.cols(),
            layout.cols()
        )));
    }
    let gate = params.gamma.tanh();
    if gate == 0.0 {
        // a closed gate passes V through untouched, including signed zeros
        return Ok(visual.clone());
    }
    let attended = self_attention(&visual.vcat(layout)?, params)?;
    visual.add_scaled(&attended.top_rows(visual.rows()), gate)
}
