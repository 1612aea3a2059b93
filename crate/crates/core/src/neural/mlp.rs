use rand::Rng;

use crate::error::{QclError, Result};

/// Fully connected network with rectified-linear hidden layers and a linear
/// output layer. All parameters live in one flat vector so optimizers and
/// gradient checks can treat them uniformly.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    params: Vec<f64>,
    /// Start of each layer's weight block; its bias follows the weights.
    offsets: Vec<usize>,
    hidden_relu: bool,
}

/// Activations recorded by [`Mlp::forward_cached`].
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardCache {
    /// Input of every layer, then the network output.
    activations: Vec<Vec<f64>>,
    sizes: Vec<usize>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        self.activations.last().expect("at least input and output")
    }
}

fn layout(sizes: &[usize]) -> (Vec<usize>, usize) {
    let mut offsets = Vec::with_capacity(sizes.len() - 1);
    let mut total = 0;
    for w in sizes.windows(2) {
        offsets.push(total);
        total += w[0] * w[1] + w[1];
    }
    (offsets, total)
}

impl Mlp {
    /// Zero-initialized network; `sizes` lists input, hidden and output widths.
    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(QclError::InvalidArgument(format!(
                "layer sizes must list at least input and output, all non-zero: {sizes:?}"
            )));
        }
        let (offsets, total) = layout(sizes);
        Ok(Self {
            sizes: sizes.to_vec(),
            params: vec![0.0; total],
            offsets,
            hidden_relu: true,
        })
    }

    /// Weights and biases uniform in `[−1/√fan_in, 1/√fan_in]`.
    pub fn new<R: Rng>(sizes: &[usize], rng: &mut R) -> Result<Self> {
        let mut net = Self::zeros(sizes)?;
        for l in 0..net.n_layers() {
            let bound = 1.0 / (net.sizes[l] as f64).sqrt();
            let (start, end) = net.layer_range(l);
            for p in &mut net.params[start..end] {
                *p = rng.gen_range(-bound..=bound);
            }
        }
        Ok(net)
    }

    /// Disables the hidden activation; every layer becomes affine.
    pub fn linear(mut self) -> Self {
        self.hidden_relu = false;
        self
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn n_layers(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn input_size(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_size(&self) -> usize {
        *self.sizes.last().expect("non-empty")
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    fn layer_range(&self, l: usize) -> (usize, usize) {
        let (i, o) = (self.sizes[l], self.sizes[l + 1]);
        (self.offsets[l], self.offsets[l] + i * o + o)
    }

    /// Row-major `out × in` weights and the bias of layer `l`.
    pub fn layer(&self, l: usize) -> (&[f64], &[f64]) {
        let (i, o) = (self.sizes[l], self.sizes[l + 1]);
        let start = self.offsets[l];
        let (w, b) = self.params[start..start + i * o + o].split_at(i * o);
        (w, b)
    }

    fn layer_mut(&mut self, l: usize) -> (&mut [f64], &mut [f64]) {
        let (i, o) = (self.sizes[l], self.sizes[l + 1]);
        let start = self.offsets[l];
        self.params[start..start + i * o + o].split_at_mut(i * o)
    }

    /// Copies the weights of `other` (same architecture) into `self`.
    pub fn copy_from(&mut self, other: &Mlp) {
        assert_eq!(self.sizes, other.sizes, "architectures differ");
        self.params.copy_from_slice(&other.params);
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.input_size() {
            return Err(QclError::DimensionMismatch {
                expected: self.input_size(),
                actual: input.len(),
            });
        }
        Ok(())
    }

    fn apply_layer(&self, l: usize, x: &[f64]) -> Vec<f64> {
        let (w, b) = self.layer(l);
        let n_in = self.sizes[l];
        let last = l + 1 == self.n_layers();
        w.chunks_exact(n_in)
            .zip(b)
            .map(|(row, bias)| {
                let z = row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + bias;
                if !last && self.hidden_relu {
                    z.max(0.0)
                } else {
                    z
                }
            })
            .collect()
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.check_input(input)?;
        let mut x = input.to_vec();
        for l in 0..self.n_layers() {
            x = self.apply_layer(l, &x);
        }
        Ok(x)
    }

    pub fn forward_cached(&self, input: &[f64]) -> Result<ForwardCache> {
        self.check_input(input)?;
        let mut activations = Vec::with_capacity(self.sizes.len());
        activations.push(input.to_vec());
        for l in 0..self.n_layers() {
            let next = self.apply_layer(l, activations.last().expect("non-empty"));
            activations.push(next);
        }
        Ok(ForwardCache {
            activations,
            sizes: self.sizes.clone(),
        })
    }

    /// Accumulates into `grads` the gradient of `Σ upstream_k · output_k`
    /// with respect to every parameter.
    pub fn backward_into(
        &self,
        cache: &ForwardCache,
        upstream: &[f64],
        grads: &mut [f64],
    ) -> Result<()> {
        if cache.sizes != self.sizes {
            return Err(QclError::ContractViolation(
                "forward cache was not produced by this network".into(),
            ));
        }
        if upstream.len() != self.output_size() {
            return Err(QclError::DimensionMismatch {
                expected: self.output_size(),
                actual: upstream.len(),
            });
        }
        if grads.len() != self.params.len() {
            return Err(QclError::DimensionMismatch {
                expected: self.params.len(),
                actual: grads.len(),
            });
        }

        let mut delta = upstream.to_vec();
        for l in (0..self.n_layers()).rev() {
            let n_in = self.sizes[l];
            let input = &cache.activations[l];
            let (w, _) = self.layer(l);
            let (start, end) = self.layer_range(l);
            let (gw, gb) = grads[start..end].split_at_mut(w.len());
            for (o, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                gb[o] += d;
                for (g, x) in gw[o * n_in..(o + 1) * n_in].iter_mut().zip(input) {
                    *g += d * x;
                }
            }
            if l == 0 {
                break;
            }
            let mut prev = vec![0.0; n_in];
            for (o, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                for (p, wv) in prev.iter_mut().zip(&w[o * n_in..(o + 1) * n_in]) {
                    *p += d * wv;
                }
            }
            if self.hidden_relu {
                // the cached layer input is the post-activation value
                for (p, a) in prev.iter_mut().zip(input) {
                    if *a <= 0.0 {
                        *p = 0.0;
                    }
                }
            }
            delta = prev;
        }
        Ok(())
    }

    /// Gradient of `Σ upstream_k · output_k` for one cached forward pass.
    pub fn backward(&self, cache: &ForwardCache, upstream: &[f64]) -> Result<Vec<f64>> {
        let mut grads = vec![0.0; self.params.len()];
        self.backward_into(cache, upstream, &mut grads)?;
        Ok(grads)
    }

    /// Sets layer `l` from row-major weights and a bias.
    pub fn set_layer(&mut self, l: usize, weights: &[f64], bias: &[f64]) -> Result<()> {
        let (w, b) = self.layer_mut(l);
        if weights.len() != w.len() || bias.len() != b.len() {
            return Err(QclError::DimensionMismatch {
                expected: w.len() + b.len(),
                actual: weights.len() + bias.len(),
            });
        }
        w.copy_from_slice(weights);
        b.copy_from_slice(bias);
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }
}

/// Rescales `grads` so its Euclidean norm is at most `max_norm`; returns the
/// norm before clipping.
pub fn clip_grad_norm(grads: &mut [f64], max_norm: f64) -> f64 {
    let norm = grads.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm > max_norm && norm > 0.0 {
        let scale = max_norm / norm;
        grads.iter_mut().for_each(|g| *g *= scale);
    }
    norm
}
