//! Classical MLP autoencoder baseline: mirrored dense layers around a
//! latent bottleneck, RMSE reconstruction loss, backpropagation, global
//! magnitude pruning, and Adam training.

use crate::error::{Error, Result};
use crate::optim::{adam_step, AdamState, TrainConfig, TrainOutcome};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Total scalar parameters of a dense chain: Σ lᵢ·lᵢ₊₁ weights plus one
/// bias per non-input neuron.
pub fn param_count(layer_sizes: &[usize]) -> Result<usize> {
    if layer_sizes.len() < 2 {
        return Err(Error::Argument("parameter count needs at least two layers".into()));
    }
    if layer_sizes.contains(&0) {
        return Err(Error::Argument("layer sizes must be positive".into()));
    }
    let weights: usize = layer_sizes.windows(2).map(|w| w[0] * w[1]).sum();
    let biases: usize = layer_sizes[1..].iter().sum();
    Ok(weights + biases)
}

/// Root mean square error between a vector and its reconstruction.
pub fn rmse_loss(x: &[f64], x_hat: &[f64]) -> Result<f64> {
    if x.len() != x_hat.len() {
        return Err(Error::Argument(format!(
            "rmse needs equal lengths, got {} and {}",
            x.len(),
            x_hat.len()
        )));
    }
    let sum_sq: f64 = x.iter().zip(x_hat).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((sum_sq / x.len() as f64).sqrt())
}

/// Dense autoencoder with a mirrored layer layout.
///
/// Hidden layers use leaky ReLU; the connection into the latent layer and
/// the output layer are linear. An optional prune mask pins individual
/// weights to zero through training.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "CaeParts", into = "CaeParts")]
pub struct MlpAutoencoder {
    layer_sizes: Vec<usize>,
    /// One row-major (out × in) matrix per consecutive layer pair.
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
    /// true = weight kept; same shapes as `weights` when present.
    prune_mask: Option<Vec<Vec<bool>>>,
    leaky_slope: f64,
}

/// Serialized form of [`MlpAutoencoder`]; shape-checked on load.
#[derive(Serialize, Deserialize)]
struct CaeParts {
    layer_sizes: Vec<usize>,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
    prune_mask: Option<Vec<Vec<bool>>>,
    leaky_slope: f64,
}

impl TryFrom<CaeParts> for MlpAutoencoder {
    type Error = Error;

    fn try_from(p: CaeParts) -> Result<Self> {
        validate_shape(&p.layer_sizes)?;
        let n_conn = p.layer_sizes.len() - 1;
        if p.weights.len() != n_conn || p.biases.len() != n_conn {
            return Err(Error::Consistency("weight/bias tensor count mismatch".into()));
        }
        for c in 0..n_conn {
            let (rows, cols) = (p.layer_sizes[c + 1], p.layer_sizes[c]);
            if p.weights[c].len() != rows * cols || p.biases[c].len() != rows {
                return Err(Error::Consistency(format!(
                    "tensor shapes at connection {c} do not match the layer sizes"
                )));
            }
            if let Some(mask) = &p.prune_mask {
                if mask.len() != n_conn || mask[c].len() != rows * cols {
                    return Err(Error::Consistency("prune mask shape mismatch".into()));
                }
            }
        }
        Ok(MlpAutoencoder {
            layer_sizes: p.layer_sizes,
            weights: p.weights,
            biases: p.biases,
            prune_mask: p.prune_mask,
            leaky_slope: p.leaky_slope,
        })
    }
}

impl From<MlpAutoencoder> for CaeParts {
    fn from(m: MlpAutoencoder) -> Self {
        CaeParts {
            layer_sizes: m.layer_sizes,
            weights: m.weights,
            biases: m.biases,
            prune_mask: m.prune_mask,
            leaky_slope: m.leaky_slope,
        }
    }
}

fn validate_shape(layer_sizes: &[usize]) -> Result<()> {
    if layer_sizes.len() < 3 || layer_sizes.len().is_multiple_of(2) {
        return Err(Error::Argument(
            "autoencoder needs an odd layer count: input, mirrored hiddens, output".into(),
        ));
    }
    if layer_sizes.contains(&0) {
        return Err(Error::Argument("layer sizes must be positive".into()));
    }
    let n = layer_sizes.len();
    for i in 0..n / 2 {
        if layer_sizes[i] != layer_sizes[n - 1 - i] {
            return Err(Error::Argument(
                "encoder and decoder sizes must mirror around the latent layer".into(),
            ));
        }
    }
    if layer_sizes[n / 2] >= layer_sizes[0] {
        return Err(Error::Argument(format!(
            "latent width {} must be strictly below the input width {}",
            layer_sizes[n / 2],
            layer_sizes[0]
        )));
    }
    Ok(())
}

/// Per-event activations saved by `forward` for use in `backward`.
#[derive(Clone, Debug)]
pub struct ForwardCache {
    /// post[0] is the input; post[l] the activation of layer l.
    post: Vec<Vec<f64>>,
    /// pre[l] is the pre-activation of layer l (pre[0] unused).
    pre: Vec<Vec<f64>>,
}

/// Weight and bias gradients, shaped like the model tensors.
#[derive(Clone, Debug)]
pub struct CaeGradients {
    pub d_weights: Vec<Vec<f64>>,
    pub d_biases: Vec<Vec<f64>>,
}

impl MlpAutoencoder {
    /// Build with He-style uniform weight init (±√(6/fan_in)), zero biases.
    pub fn new(layer_sizes: Vec<usize>, seed: u64) -> Result<Self> {
        validate_shape(&layer_sizes)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for pair in layer_sizes.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let bound = (6.0 / fan_in as f64).sqrt();
            weights.push(
                (0..fan_in * fan_out).map(|_| (rng.random::<f64>() * 2.0 - 1.0) * bound).collect(),
            );
            biases.push(vec![0.0; fan_out]);
        }
        Ok(MlpAutoencoder { layer_sizes, weights, biases, prune_mask: None, leaky_slope: 0.01 })
    }

    /// Build from the encoder half: hidden widths with the latent width
    /// last, mirrored into a full autoencoder.
    ///
    /// `from_encoder_layers(8, &[5,4,3,1], s)` gives [8,5,4,3,1,3,4,5,8].
    pub fn from_encoder_layers(n_input: usize, encoder_layers: &[usize], seed: u64) -> Result<Self> {
        if encoder_layers.is_empty() {
            return Err(Error::Argument("encoder needs at least the latent width".into()));
        }
        let mut sizes = Vec::with_capacity(2 * encoder_layers.len() + 1);
        sizes.push(n_input);
        sizes.extend_from_slice(encoder_layers);
        sizes.extend(encoder_layers.iter().rev().skip(1));
        sizes.push(n_input);
        Self::new(sizes, seed)
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn n_inputs(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn latent_size(&self) -> usize {
        self.layer_sizes[self.layer_sizes.len() / 2]
    }

    pub fn prune_mask(&self) -> Option<&[Vec<bool>]> {
        self.prune_mask.as_deref()
    }

    /// Count of scalars actually stored in the weight and bias tensors.
    pub fn stored_param_count(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>()
            + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    /// Stored scalars minus masked weights; the budget a pruned model
    /// actually spends.
    pub fn effective_param_count(&self) -> usize {
        let masked = match &self.prune_mask {
            Some(mask) => mask.iter().flatten().filter(|&&keep| !keep).count(),
            None => 0,
        };
        self.stored_param_count() - masked
    }

    fn latent_layer(&self) -> usize {
        self.layer_sizes.len() / 2
    }

    /// The connection into the latent layer and the output layer are
    /// linear; every other layer applies leaky ReLU.
    fn is_linear_layer(&self, layer: usize) -> bool {
        layer == self.latent_layer() || layer == self.layer_sizes.len() - 1
    }

    /// Reconstruct one event, keeping the activations for backprop.
    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
        if x.len() != self.n_inputs() {
            return Err(Error::Argument(format!(
                "input has {} features, model wants {}",
                x.len(),
                self.n_inputs()
            )));
        }
        let n_layers = self.layer_sizes.len();
        let mut post = Vec::with_capacity(n_layers);
        let mut pre = Vec::with_capacity(n_layers);
        post.push(x.to_vec());
        pre.push(Vec::new());
        for c in 0..n_layers - 1 {
            let cols = self.layer_sizes[c];
            let mut z = self.biases[c].clone();
            for (o, zo) in z.iter_mut().enumerate() {
                let row = &self.weights[c][o * cols..(o + 1) * cols];
                *zo += row.iter().zip(&post[c]).map(|(w, a)| w * a).sum::<f64>();
            }
            let a = if self.is_linear_layer(c + 1) {
                z.clone()
            } else {
                z.iter().map(|&v| if v >= 0.0 { v } else { self.leaky_slope * v }).collect()
            };
            pre.push(z);
            post.push(a);
        }
        let x_hat = post.last().unwrap().clone();
        Ok((x_hat, ForwardCache { post, pre }))
    }

    /// Reconstruction RMSE of one event; the anomaly score of this model.
    pub fn reconstruction_error(&self, x: &[f64]) -> Result<f64> {
        let (x_hat, _) = self.forward(x)?;
        rmse_loss(x, &x_hat)
    }

    /// Gradients of the RMSE loss for one event.
    ///
    /// At an exact zero loss every gradient is zero (the loss is flat at
    /// its minimum even though the square root is not differentiable
    /// there). Masked weights always receive zero gradient.
    pub fn backward(&self, x: &[f64], cache: &ForwardCache) -> Result<CaeGradients> {
        let n_layers = self.layer_sizes.len();
        if cache.post.len() != n_layers
            || cache.pre.len() != n_layers
            || cache.post.iter().enumerate().any(|(l, a)| a.len() != self.layer_sizes[l])
        {
            return Err(Error::Consistency("activation cache does not fit this model".into()));
        }
        if cache.post[0] != x {
            return Err(Error::Consistency("activation cache was built for another input".into()));
        }
        let x_hat = cache.post.last().unwrap();
        let n = x.len() as f64;
        let sum_sq: f64 = x.iter().zip(x_hat).map(|(a, b)| (a - b) * (a - b)).sum();
        let loss = (sum_sq / n).sqrt();
        let mut d_weights: Vec<Vec<f64>> =
            self.weights.iter().map(|w| vec![0.0; w.len()]).collect();
        let mut d_biases: Vec<Vec<f64>> = self.biases.iter().map(|b| vec![0.0; b.len()]).collect();
        if loss == 0.0 {
            return Ok(CaeGradients { d_weights, d_biases });
        }
        // dL/dx̂ᵢ = (x̂ᵢ − xᵢ) / (n·L); the output layer is linear.
        let mut delta: Vec<f64> =
            x_hat.iter().zip(x).map(|(h, a)| (h - a) / (n * loss)).collect();
        for c in (0..n_layers - 1).rev() {
            let (rows, cols) = (self.layer_sizes[c + 1], self.layer_sizes[c]);
            for o in 0..rows {
                d_biases[c][o] = delta[o];
                for i in 0..cols {
                    d_weights[c][o * cols + i] = delta[o] * cache.post[c][i];
                }
            }
            if c > 0 {
                let mut prev = vec![0.0; cols];
                for (o, &d) in delta.iter().enumerate() {
                    for (i, p) in prev.iter_mut().enumerate() {
                        *p += self.weights[c][o * cols + i] * d;
                    }
                }
                if !self.is_linear_layer(c) {
                    for (i, p) in prev.iter_mut().enumerate() {
                        if cache.pre[c][i] < 0.0 {
                            *p *= self.leaky_slope;
                        }
                    }
                }
                delta = prev;
            }
        }
        if let Some(mask) = &self.prune_mask {
            for (dw, m) in d_weights.iter_mut().zip(mask) {
                for (g, &keep) in dw.iter_mut().zip(m) {
                    if !keep {
                        *g = 0.0;
                    }
                }
            }
        }
        Ok(CaeGradients { d_weights, d_biases })
    }

    /// Mask the lowest-magnitude weights globally.
    ///
    /// Ranks every weight by |w| across all layers, zeroes the lowest
    /// floor(sparsity · total) of them, and pins them there for all later
    /// training. Biases are never pruned. Sparsity 0 clears the mask.
    pub fn apply_magnitude_pruning(&mut self, sparsity: f64) -> Result<()> {
        if !(0.0..1.0).contains(&sparsity) {
            return Err(Error::Argument(format!(
                "sparsity must be in [0,1), got {sparsity}"
            )));
        }
        if sparsity == 0.0 {
            self.prune_mask = None;
            return Ok(());
        }
        let total: usize = self.weights.iter().map(Vec::len).sum();
        let n_prune = (sparsity * total as f64).floor() as usize;
        let mut ranked: Vec<(f64, usize, usize)> = Vec::with_capacity(total);
        for (c, w) in self.weights.iter().enumerate() {
            for (i, &v) in w.iter().enumerate() {
                ranked.push((v.abs(), c, i));
            }
        }
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut mask: Vec<Vec<bool>> = self.weights.iter().map(|w| vec![true; w.len()]).collect();
        for &(_, c, i) in ranked.iter().take(n_prune) {
            mask[c][i] = false;
            self.weights[c][i] = 0.0;
        }
        self.prune_mask = Some(mask);
        Ok(())
    }

    /// All weights and biases as one vector: weights then biases, per
    /// connection in order.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.stored_param_count());
        for c in 0..self.weights.len() {
            flat.extend_from_slice(&self.weights[c]);
            flat.extend_from_slice(&self.biases[c]);
        }
        flat
    }

    /// Overwrite all parameters from `flat_params` layout; the prune mask
    /// is not enforced here.
    pub fn set_flat_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.stored_param_count() {
            return Err(Error::Argument(format!(
                "expected {} parameters, got {}",
                self.stored_param_count(),
                flat.len()
            )));
        }
        let mut at = 0;
        for c in 0..self.weights.len() {
            let w_len = self.weights[c].len();
            self.weights[c].copy_from_slice(&flat[at..at + w_len]);
            at += w_len;
            let b_len = self.biases[c].len();
            self.biases[c].copy_from_slice(&flat[at..at + b_len]);
            at += b_len;
        }
        Ok(())
    }

    /// Zero every masked weight; called after each optimizer step.
    fn enforce_mask(&mut self) {
        if let Some(mask) = &self.prune_mask {
            for (w, m) in self.weights.iter_mut().zip(mask) {
                for (v, &keep) in w.iter_mut().zip(m) {
                    if !keep {
                        *v = 0.0;
                    }
                }
            }
        }
    }

    fn flat_grad(&self, grads: &CaeGradients) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.stored_param_count());
        for c in 0..grads.d_weights.len() {
            flat.extend_from_slice(&grads.d_weights[c]);
            flat.extend_from_slice(&grads.d_biases[c]);
        }
        flat
    }
}

fn check_scaled_unit(data: &[Vec<f64>]) -> Result<()> {
    for (row, x) in data.iter().enumerate() {
        for (col, &v) in x.iter().enumerate() {
            if !(-1e-9..=1.0 + 1e-9).contains(&v) {
                return Err(Error::Data(format!(
                    "feature at row {row}, column {col} is {v}; expected the scaled range [0, 1]"
                )));
            }
        }
    }
    Ok(())
}

/// Train with Adam on mean per-event RMSE.
///
/// Unlike the circuit trainer this accepts zero epochs (a no-op) and does
/// not reinitialize weights: initialization happened at construction, so
/// a precomputed prune mask survives. Shuffling comes from the config
/// seed; the mask is re-applied after every step.
pub fn train_cae(
    model: &mut MlpAutoencoder,
    train_data: &[Vec<f64>],
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    if cfg.batch_size < 1 || cfg.batch_size > train_data.len() {
        return Err(Error::Argument(format!(
            "batch size {} invalid for {} training rows",
            cfg.batch_size,
            train_data.len()
        )));
    }
    for x in train_data {
        if x.len() != model.n_inputs() {
            return Err(Error::Argument(format!(
                "training row has {} features, model wants {}",
                x.len(),
                model.n_inputs()
            )));
        }
    }
    check_scaled_unit(train_data)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut adam = AdamState::new(model.stored_param_count(), cfg.lr);
    let mut loss_trace = Vec::with_capacity(cfg.epochs);
    let mut order: Vec<usize> = (0..train_data.len()).collect();
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss_sum = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let per_event: Vec<(f64, Vec<f64>)> = chunk
                .par_iter()
                .map(|&i| {
                    let x = &train_data[i];
                    let (x_hat, cache) = model.forward(x)?;
                    let loss = rmse_loss(x, &x_hat)?;
                    let grads = model.backward(x, &cache)?;
                    Ok((loss, model.flat_grad(&grads)))
                })
                .collect::<Result<_>>()?;
            let mut grad = vec![0.0; model.stored_param_count()];
            let mut batch_loss = 0.0;
            for (loss, g) in &per_event {
                batch_loss += loss;
                for (acc, v) in grad.iter_mut().zip(g) {
                    *acc += v;
                }
            }
            let scale = 1.0 / chunk.len() as f64;
            for g in &mut grad {
                *g *= scale;
            }
            epoch_loss_sum += batch_loss;
            let mut params = model.flat_params();
            adam_step(&mut adam, &mut params, &grad)?;
            model.set_flat_params(&params)?;
            model.enforce_mask();
        }
        loss_trace.push(epoch_loss_sum / train_data.len() as f64);
    }
    Ok(TrainOutcome { loss_trace, snapshots: Vec::new(), n_steps: adam.step })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// [2,1,2] model routing the first input straight through the latent
    /// neuron; reconstructs [a, 0] exactly.
    fn passthrough_model() -> MlpAutoencoder {
        let mut m = MlpAutoencoder::new(vec![2, 1, 2], 0).unwrap();
        m.set_flat_params(&[1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
        m
    }

    #[test]
    fn param_count_examples() {
        assert_eq!(param_count(&[5, 4, 3, 2, 3, 4, 5]).unwrap(), 97);
        assert_eq!(param_count(&[2, 1, 2]).unwrap(), 7);
        for n in 1..6 {
            assert_eq!(param_count(&[n, n]).unwrap(), n * n + n);
        }
        assert!(matches!(param_count(&[4]), Err(Error::Argument(_))));
        assert!(matches!(param_count(&[4, 0, 4]), Err(Error::Argument(_))));
    }

    #[test]
    fn param_count_matches_stored_scalars() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let half: Vec<usize> = (0..rng.random_range(1..4))
                .map(|_| rng.random_range(1..7))
                .collect();
            let n_input = half.iter().max().unwrap() + rng.random_range(1..5);
            let model = MlpAutoencoder::from_encoder_layers(n_input, &half, 7).unwrap();
            assert_eq!(model.stored_param_count(), param_count(model.layer_sizes()).unwrap());
        }
    }

    #[test]
    fn shape_validation() {
        assert!(MlpAutoencoder::new(vec![4, 2, 4], 0).is_ok());
        // Even layer count, broken mirror, and fat latent all rejected.
        assert!(MlpAutoencoder::new(vec![4, 2, 2, 4], 0).is_err());
        assert!(MlpAutoencoder::new(vec![4, 3, 2, 2, 4], 0).is_err());
        assert!(MlpAutoencoder::new(vec![4, 4, 4], 0).is_err());
        assert!(MlpAutoencoder::new(vec![2], 0).is_err());
    }

    #[test]
    fn encoder_layer_mirroring() {
        let m = MlpAutoencoder::from_encoder_layers(8, &[5, 4, 3, 1], 0).unwrap();
        assert_eq!(m.layer_sizes(), &[8, 5, 4, 3, 1, 3, 4, 5, 8]);
        assert_eq!(m.stored_param_count(), 183);
        assert_eq!(m.latent_size(), 1);

        let m = MlpAutoencoder::from_encoder_layers(8, &[1], 0).unwrap();
        assert_eq!(m.layer_sizes(), &[8, 1, 8]);
    }

    #[test]
    fn forward_zero_model_returns_zeros() {
        let mut m = MlpAutoencoder::new(vec![3, 2, 3], 5).unwrap();
        m.set_flat_params(&vec![0.0; m.stored_param_count()]).unwrap();
        let (x_hat, _) = m.forward(&[0.4, 0.9, 0.1]).unwrap();
        assert_eq!(x_hat, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn forward_passthrough_reconstructs_supported_input() {
        let m = passthrough_model();
        let (x_hat, _) = m.forward(&[0.7, 0.0]).unwrap();
        assert!((x_hat[0] - 0.7).abs() < 1e-15);
        assert!(x_hat[1].abs() < 1e-15);
        assert!(m.reconstruction_error(&[0.7, 0.0]).unwrap() < 1e-15);
    }

    #[test]
    fn forward_applies_leaky_slope_on_hidden_layers() {
        // [4,2,1,2,4]: the first connection is a hidden layer, so a
        // negative pre-activation there is scaled by 0.01.
        let mut m = MlpAutoencoder::new(vec![4, 2, 1, 2, 4], 0).unwrap();
        let mut flat = vec![0.0; m.stored_param_count()];
        // First weight row: -1 on input 0 → pre-activation −x₀.
        flat[0] = -1.0;
        m.set_flat_params(&flat).unwrap();
        let (_, cache) = m.forward(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((cache.pre[1][0] - (-1.0)).abs() < 1e-15);
        assert!((cache.post[1][0] - (-0.01)).abs() < 1e-15);
    }

    #[test]
    fn latent_connection_is_linear() {
        // [2,1,2]: both connections are linear, so negative values pass
        // through unscaled.
        let mut m = MlpAutoencoder::new(vec![2, 1, 2], 0).unwrap();
        m.set_flat_params(&[-1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
        let (x_hat, _) = m.forward(&[1.0, 0.0]).unwrap();
        assert!((x_hat[0] - (-1.0)).abs() < 1e-15);
    }

    #[test]
    fn rmse_examples() {
        assert_eq!(rmse_loss(&[0.3, 0.4], &[0.3, 0.4]).unwrap(), 0.0);
        assert_eq!(rmse_loss(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 1.0);
        let v = rmse_loss(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]).unwrap();
        assert!((v - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!(rmse_loss(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn backward_zero_at_perfect_reconstruction() {
        let m = passthrough_model();
        let x = [0.5, 0.0];
        let (_, cache) = m.forward(&x).unwrap();
        let grads = m.backward(&x, &cache).unwrap();
        assert!(grads.d_weights.iter().flatten().all(|&g| g == 0.0));
        assert!(grads.d_biases.iter().flatten().all(|&g| g == 0.0));
    }

    #[test]
    fn backward_sign_flips_around_identity_weight() {
        let grad_at = |w: f64| {
            let mut m = passthrough_model();
            m.set_flat_params(&[w, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
            let x = [1.0, 0.0];
            let (_, cache) = m.forward(&x).unwrap();
            m.backward(&x, &cache).unwrap().d_weights[0][0]
        };
        assert!(grad_at(0.5) < 0.0);
        assert!(grad_at(1.5) > 0.0);
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for sizes in [vec![4, 3, 2, 3, 4], vec![5, 4, 3, 2, 3, 4, 5]] {
            let model = MlpAutoencoder::new(sizes, rng.random()).unwrap();
            for _ in 0..3 {
                let x: Vec<f64> =
                    (0..model.n_inputs()).map(|_| rng.random::<f64>()).collect();
                let (_, cache) = model.forward(&x).unwrap();
                let grads = model.backward(&x, &cache).unwrap();
                let flat_grad = model.flat_grad(&grads);
                let base = model.flat_params();
                let h = 1e-5;
                for k in 0..base.len() {
                    let mut probe = model.clone();
                    let mut p = base.clone();
                    p[k] += h;
                    probe.set_flat_params(&p).unwrap();
                    let up = probe.reconstruction_error(&x).unwrap();
                    p[k] -= 2.0 * h;
                    probe.set_flat_params(&p).unwrap();
                    let down = probe.reconstruction_error(&x).unwrap();
                    let fd = (up - down) / (2.0 * h);
                    assert!(
                        (flat_grad[k] - fd).abs() < 1e-6,
                        "param {k}: backprop {} vs fd {fd}",
                        flat_grad[k]
                    );
                }
            }
        }
    }

    #[test]
    fn backward_rejects_stale_cache() {
        let m = passthrough_model();
        let (_, cache) = m.forward(&[0.5, 0.0]).unwrap();
        let err = m.backward(&[0.6, 0.0], &cache);
        assert!(matches!(err, Err(Error::Consistency(_))));
    }

    #[test]
    fn pruning_masks_smallest_magnitudes() {
        let mut m = MlpAutoencoder::new(vec![2, 1, 2], 0).unwrap();
        m.set_flat_params(&[-0.1, 0.5, 0.0, -0.3, 0.2, 0.0, 0.0]).unwrap();
        m.apply_magnitude_pruning(0.5).unwrap();
        let mask = m.prune_mask().unwrap();
        assert_eq!(mask[0], vec![false, true]); // -0.1 pruned
        assert_eq!(mask[1], vec![true, false]); // 0.2 pruned
        assert_eq!(m.flat_params()[0], 0.0);
        assert_eq!(m.flat_params()[4], 0.0);
        assert_eq!(m.effective_param_count(), 5);
        assert_eq!(m.stored_param_count(), 7);
    }

    #[test]
    fn pruning_edge_cases() {
        let mut m = MlpAutoencoder::new(vec![2, 1, 2], 0).unwrap();
        m.apply_magnitude_pruning(0.0).unwrap();
        assert!(m.prune_mask().is_none());
        assert!(m.apply_magnitude_pruning(1.0).is_err());
        assert!(m.apply_magnitude_pruning(-0.2).is_err());
    }

    #[test]
    fn pruning_count_for_published_sparsity() {
        // Input 8, encoder [5,4]: 120 weights; sparsity 0.553 masks
        // floor(66.36) = 66 of them, leaving 54 + 22 biases = 76 scalars.
        let mut m = MlpAutoencoder::from_encoder_layers(8, &[5, 4], 2).unwrap();
        m.apply_magnitude_pruning(0.553).unwrap();
        let masked: usize = m
            .prune_mask()
            .unwrap()
            .iter()
            .flatten()
            .filter(|&&keep| !keep)
            .count();
        assert_eq!(masked, 66);
        assert_eq!(m.effective_param_count(), 76);
    }

    #[test]
    fn train_zero_epochs_is_a_no_op() {
        let mut m = MlpAutoencoder::new(vec![3, 2, 3], 4).unwrap();
        let before = m.flat_params();
        let data = vec![vec![0.1, 0.5, 0.9], vec![0.2, 0.4, 0.6]];
        let cfg = TrainConfig { epochs: 0, batch_size: 2, lr: 0.001, ..TrainConfig::for_cae() };
        let out = train_cae(&mut m, &data, &cfg).unwrap();
        assert_eq!(out.n_steps, 0);
        assert!(out.loss_trace.is_empty());
        assert_eq!(m.flat_params(), before);
    }

    #[test]
    fn train_reduces_loss_and_respects_mask() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let data: Vec<Vec<f64>> = (0..40)
            .map(|_| {
                let a = rng.random::<f64>();
                vec![a, a * 0.5, 1.0 - a]
            })
            .collect();
        let mut m = MlpAutoencoder::new(vec![3, 2, 3], 11).unwrap();
        m.apply_magnitude_pruning(0.2).unwrap();
        let cfg = TrainConfig {
            epochs: 60,
            batch_size: 10,
            lr: 0.01,
            seed: 5,
            ..TrainConfig::for_cae()
        };
        let out = train_cae(&mut m, &data, &cfg).unwrap();
        assert!(out.loss_trace.last().unwrap() < out.loss_trace.first().unwrap());
        let mask = m.prune_mask().unwrap().to_vec();
        // Masked weights are still exactly zero after training.
        let flat = m.flat_params();
        let mut at = 0;
        for (c, layer_mask) in mask.iter().enumerate() {
            let w_len = m.layer_sizes()[c] * m.layer_sizes()[c + 1];
            for (i, &keep) in layer_mask.iter().enumerate() {
                if !keep {
                    assert_eq!(flat[at + i], 0.0);
                }
            }
            at += w_len + m.layer_sizes()[c + 1];
        }
    }

    #[test]
    fn train_is_deterministic() {
        let data: Vec<Vec<f64>> = (0..10).map(|i| vec![0.1 * i as f64, 0.05 * i as f64]).collect();
        let cfg = TrainConfig { epochs: 5, batch_size: 4, lr: 0.01, seed: 3, ..TrainConfig::for_cae() };
        let mut a = MlpAutoencoder::new(vec![2, 1, 2], 9).unwrap();
        let ta = train_cae(&mut a, &data, &cfg).unwrap();
        let mut b = MlpAutoencoder::new(vec![2, 1, 2], 9).unwrap();
        let tb = train_cae(&mut b, &data, &cfg).unwrap();
        assert_eq!(ta.loss_trace, tb.loss_trace);
        assert_eq!(a.flat_params(), b.flat_params());
    }

    #[test]
    fn train_rejects_unscaled_data() {
        let mut m = MlpAutoencoder::new(vec![2, 1, 2], 0).unwrap();
        let data = vec![vec![0.5, 1.8]];
        let cfg = TrainConfig { epochs: 1, batch_size: 1, ..TrainConfig::for_cae() };
        assert!(matches!(train_cae(&mut m, &data, &cfg), Err(Error::Data(_))));
    }

    #[test]
    fn json_round_trip_preserves_behavior() {
        let mut m = MlpAutoencoder::new(vec![4, 3, 2, 3, 4], 21).unwrap();
        m.apply_magnitude_pruning(0.3).unwrap();
        let text = serde_json::to_string(&m).unwrap();
        let back: MlpAutoencoder = serde_json::from_str(&text).unwrap();
        let x = [0.2, 0.9, 0.4, 0.6];
        assert_eq!(
            m.reconstruction_error(&x).unwrap(),
            back.reconstruction_error(&x).unwrap()
        );
        assert_eq!(back.prune_mask().unwrap(), m.prune_mask().unwrap());

        // Malformed shapes are rejected on load.
        let mut bad: serde_json::Value = serde_json::from_str(&text).unwrap();
        bad["weights"][0] = serde_json::json!([1.0, 2.0]);
        assert!(serde_json::from_value::<MlpAutoencoder>(bad).is_err());
    }
}
