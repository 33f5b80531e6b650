//! Fully-connected tanh network with hand-written forward and backward passes.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::NnError;

/// One dense layer. `w` is row-major `[out][in]`, `b` has length `out`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub w: Vec<f64>,
    pub b: Vec<f64>,
    pub rows: usize,
    pub cols: usize,
}

/// A multilayer perceptron: tanh on hidden layers, linear output.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layer_sizes: Vec<usize>,
    pub layers: Vec<Layer>,
}

/// Per-layer activations kept from a forward pass; consumed by `backward`.
///
/// `activations[0]` is the input batch, `activations[i]` the post-activation
/// output of layer `i-1` (linear for the last layer).
#[derive(Debug, Clone)]
pub struct Cache {
    pub activations: Vec<Vec<f64>>,
    pub batch: usize,
}

/// Parameter gradients, mirroring the `Mlp` shapes.
#[derive(Debug, Clone)]
pub struct Grads {
    pub layers: Vec<Layer>,
}

impl Grads {
    pub fn zeros_like(mlp: &Mlp) -> Self {
        Grads {
            layers: mlp
                .layers
                .iter()
                .map(|l| Layer {
                    w: vec![0.0; l.w.len()],
                    b: vec![0.0; l.b.len()],
                    rows: l.rows,
                    cols: l.cols,
                })
                .collect(),
        }
    }

    pub fn blocks(&self) -> Vec<&[f64]> {
        self.layers
            .iter()
            .flat_map(|l| [l.w.as_slice(), l.b.as_slice()])
            .collect()
    }

    /// Global L2 norm over every entry.
    pub fn global_norm(&self) -> f64 {
        self.layers
            .iter()
            .map(|l| {
                l.w.iter().map(|x| x * x).sum::<f64>() + l.b.iter().map(|x| x * x).sum::<f64>()
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&mut self, factor: f64) {
        for l in &mut self.layers {
            for x in l.w.iter_mut().chain(l.b.iter_mut()) {
                *x *= factor;
            }
        }
    }
}

impl Mlp {
    /// Scaled-uniform initialization `U(-1/sqrt(fan_in), 1/sqrt(fan_in))`,
    /// deterministic given `seed`.
    pub fn init(layer_sizes: &[usize], seed: u64) -> Result<Self, NnError> {
        Self::init_scaled(layer_sizes, seed, 1.0)
    }

    /// Like [`Mlp::init`] but with the final layer scaled by `final_scale`,
    /// so a policy head starts near-uniform when `final_scale` is small.
    pub fn init_scaled(layer_sizes: &[usize], seed: u64, final_scale: f64) -> Result<Self, NnError> {
        if layer_sizes.len() < 2 {
            return Err(NnError::InvalidSizes(format!(
                "need at least 2 sizes, got {}",
                layer_sizes.len()
            )));
        }
        if layer_sizes.iter().any(|&s| s == 0) {
            return Err(NnError::InvalidSizes("sizes must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::with_capacity(layer_sizes.len() - 1);
        for i in 0..layer_sizes.len() - 1 {
            let (cols, rows) = (layer_sizes[i], layer_sizes[i + 1]);
            let bound = 1.0 / (cols as f64).sqrt();
            let scale = if i == layer_sizes.len() - 2 { final_scale } else { 1.0 };
            let w = (0..rows * cols)
                .map(|_| rng.gen_range(-bound..bound) * scale)
                .collect();
            let b = (0..rows).map(|_| rng.gen_range(-bound..bound) * scale).collect();
            layers.push(Layer { w, b, rows, cols });
        }
        Ok(Mlp {
            layer_sizes: layer_sizes.to_vec(),
            layers,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    /// Forward pass over a row-major batch (`batch` rows of `input_dim`).
    /// Returns the output batch and the cache needed by [`Mlp::backward`].
    ///
    /// Uses an axpy-form inner loop over a transposed weight copy so the
    /// hot loop runs over contiguous memory.
    pub fn forward(&self, input: &[f64], batch: usize) -> Result<(Vec<f64>, Cache), NnError> {
        if input.len() != batch * self.input_dim() {
            return Err(NnError::ShapeMismatch {
                expected: batch * self.input_dim(),
                got: input.len(),
            });
        }
        let n_layers = self.layers.len();
        let mut activations = Vec::with_capacity(n_layers + 1);
        activations.push(input.to_vec());
        let mut cur = input.to_vec();
        let mut w_t = Vec::new();
        for (li, layer) in self.layers.iter().enumerate() {
            w_t.clear();
            w_t.resize(layer.rows * layer.cols, 0.0);
            for r in 0..layer.rows {
                for k in 0..layer.cols {
                    w_t[k * layer.rows + r] = layer.w[r * layer.cols + k];
                }
            }
            let mut next = vec![0.0; batch * layer.rows];
            for s in 0..batch {
                let x = &cur[s * layer.cols..(s + 1) * layer.cols];
                let out = &mut next[s * layer.rows..(s + 1) * layer.rows];
                out.copy_from_slice(&layer.b);
                for (k, xv) in x.iter().enumerate() {
                    let col = &w_t[k * layer.rows..(k + 1) * layer.rows];
                    for (o, wv) in out.iter_mut().zip(col.iter()) {
                        *o += xv * wv;
                    }
                }
            }
            if li + 1 < n_layers {
                for v in next.iter_mut() {
                    *v = v.tanh();
                }
            }
            activations.push(next.clone());
            cur = next;
        }
        Ok((cur, Cache { activations, batch }))
    }

    /// Backward pass. `dout` is dL/d(output), row-major, same shape as the
    /// forward output. Returns parameter gradients.
    pub fn backward(&self, cache: &Cache, dout: &[f64]) -> Result<Grads, NnError> {
        let batch = cache.batch;
        if dout.len() != batch * self.output_dim() {
            return Err(NnError::ShapeMismatch {
                expected: batch * self.output_dim(),
                got: dout.len(),
            });
        }
        if cache.activations.len() != self.layers.len() + 1 {
            return Err(NnError::ShapeMismatch {
                expected: self.layers.len() + 1,
                got: cache.activations.len(),
            });
        }
        let mut grads = Grads::zeros_like(self);
        let mut delta = dout.to_vec();
        for li in (0..self.layers.len()).rev() {
            let layer = &self.layers[li];
            let input = &cache.activations[li];
            let g = &mut grads.layers[li];
            for s in 0..batch {
                let d = &delta[s * layer.rows..(s + 1) * layer.rows];
                let x = &input[s * layer.cols..(s + 1) * layer.cols];
                for (r, dr) in d.iter().enumerate() {
                    g.b[r] += dr;
                    let grow = &mut g.w[r * layer.cols..(r + 1) * layer.cols];
                    for (gk, xk) in grow.iter_mut().zip(x.iter()) {
                        *gk += dr * xk;
                    }
                }
            }
            if li > 0 {
                // dL/d(input of this layer), then through the tanh of layer li-1
                let mut prev = vec![0.0; batch * layer.cols];
                for s in 0..batch {
                    let d = &delta[s * layer.rows..(s + 1) * layer.rows];
                    let p = &mut prev[s * layer.cols..(s + 1) * layer.cols];
                    for (r, dr) in d.iter().enumerate() {
                        let wrow = &layer.w[r * layer.cols..(r + 1) * layer.cols];
                        for (pk, wk) in p.iter_mut().zip(wrow.iter()) {
                            *pk += dr * wk;
                        }
                    }
                }
                let h = &cache.activations[li];
                for (pv, hv) in prev.iter_mut().zip(h.iter()) {
                    *pv *= 1.0 - hv * hv;
                }
                delta = prev;
            }
        }
        Ok(grads)
    }

    /// Mutable views of every parameter block, in a fixed order
    /// (w then b per layer). The same order as [`Grads::blocks`].
    pub fn param_blocks_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers
            .iter_mut()
            .flat_map(|l| {
                let Layer { w, b, .. } = l;
                [w.as_mut_slice(), b.as_mut_slice()]
            })
            .collect()
    }

    pub fn all_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.w.iter().chain(l.b.iter()).all(|x| x.is_finite()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_param_count_matches_shapes() {
        let mlp = Mlp::init(&[4, 64, 64, 3], 0).unwrap();
        assert_eq!(mlp.param_count(), 4 * 64 + 64 + 64 * 64 + 64 + 64 * 3 + 3);
        assert_eq!(mlp.param_count(), 4675);
    }

    #[test]
    fn init_minimal_network() {
        let mlp = Mlp::init(&[1, 1], 7).unwrap();
        assert_eq!(mlp.param_count(), 2);
    }

    #[test]
    fn init_is_deterministic() {
        let a = Mlp::init(&[3, 8, 2], 123).unwrap();
        let b = Mlp::init(&[3, 8, 2], 123).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn init_rejects_bad_sizes() {
        assert!(Mlp::init(&[4], 0).is_err());
        assert!(Mlp::init(&[4, 0, 2], 0).is_err());
        assert!(Mlp::init(&[], 0).is_err());
    }

    #[test]
    fn forward_identity_single_layer() {
        let mut mlp = Mlp::init(&[3, 3], 0).unwrap();
        mlp.layers[0].w = vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        mlp.layers[0].b = vec![0.0; 3];
        let x = [0.5, -1.5, 2.0];
        let (y, _) = mlp.forward(&x, 1).unwrap();
        assert_eq!(y, x.to_vec());
    }

    #[test]
    fn forward_zero_weights_returns_bias() {
        let mut mlp = Mlp::init(&[2, 3], 0).unwrap();
        mlp.layers[0].w = vec![0.0; 6];
        mlp.layers[0].b = vec![1.0, -2.0, 0.25];
        let (y, _) = mlp.forward(&[10.0, 20.0], 1).unwrap();
        assert_eq!(y, vec![1.0, -2.0, 0.25]);
    }

    #[test]
    fn forward_is_pure_across_batch_rows() {
        let mlp = Mlp::init(&[4, 8, 2], 42).unwrap();
        let row = [0.3, -0.7, 1.1, 0.0];
        let mut batch = row.to_vec();
        batch.extend_from_slice(&row);
        let (y, _) = mlp.forward(&batch, 2).unwrap();
        assert_eq!(&y[..2], &y[2..]);
    }

    #[test]
    fn forward_rejects_shape_mismatch() {
        let mlp = Mlp::init(&[4, 2], 0).unwrap();
        assert!(mlp.forward(&[1.0, 2.0, 3.0], 1).is_err());
    }

    #[test]
    fn backward_scalar_chain_rule() {
        // f(x) = w*x + b, dL/df = 1  =>  dL/dw = x, dL/db = 1
        let mut mlp = Mlp::init(&[1, 1], 0).unwrap();
        mlp.layers[0].w = vec![3.0];
        mlp.layers[0].b = vec![0.5];
        let (_, cache) = mlp.forward(&[2.0], 1).unwrap();
        let grads = mlp.backward(&cache, &[1.0]).unwrap();
        assert_eq!(grads.layers[0].w, vec![2.0]);
        assert_eq!(grads.layers[0].b, vec![1.0]);
    }

    #[test]
    fn backward_zero_dout_gives_zero_grads() {
        let mlp = Mlp::init(&[3, 5, 2], 9).unwrap();
        let (_, cache) = mlp.forward(&[0.1, 0.2, 0.3], 1).unwrap();
        let grads = mlp.backward(&cache, &[0.0, 0.0]).unwrap();
        assert!(grads.global_norm() == 0.0);
    }

    #[test]
    fn backward_rejects_mismatched_dout() {
        let mlp = Mlp::init(&[3, 2], 0).unwrap();
        let (_, cache) = mlp.forward(&[1.0, 2.0, 3.0], 1).unwrap();
        assert!(mlp.backward(&cache, &[1.0]).is_err());
    }
}
