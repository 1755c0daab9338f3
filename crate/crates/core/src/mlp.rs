//! Five-layer feed-forward network trained by full-batch gradient descent
//! with momentum.
//!
//! Topology is fixed apart from the ends: input width follows the feature
//! vector, the three hidden layers hold 100, 50 and 10 neurons, and the
//! output layer has one neuron per person. Every layer uses the
//! tan-sigmoid, so targets are one-hot vectors of +1/-1.
//!
//! The gradient is summed over all training examples and weights update
//! once per epoch:
//!
//! ```text
//! dw_t = mc * dw_(t-1) - (1 - mc) * lr * grad
//! ```
//!
//! At `mc = 0` this is a plain gradient step; at `mc = 1` the previous
//! change repeats and the gradient is ignored.

use crate::error::{Error, Result};
use crate::features::FeatureVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Hidden layer widths, in order.
pub const HIDDEN_LAYERS: [usize; 3] = [100, 50, 10];

/// Dense row-major matrix, `rows` x `cols`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// `out = self * v`
    fn apply(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (r, o) in out.iter_mut().enumerate() {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            *o = row.iter().zip(v).map(|(w, x)| w * x).sum();
        }
    }

    /// `out += self^T * v`
    fn apply_transposed_add(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        for (r, &c) in v.iter().enumerate() {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            for (o, w) in out.iter_mut().zip(row) {
                *o += w * c;
            }
        }
    }

    /// `self += scale * (v ⊗ u)`
    fn add_outer(&mut self, v: &[f64], u: &[f64], scale: f64) {
        debug_assert_eq!(v.len(), self.rows);
        debug_assert_eq!(u.len(), self.cols);
        for (r, &c) in v.iter().enumerate() {
            let row = &mut self.data[r * self.cols..(r + 1) * self.cols];
            for (w, x) in row.iter_mut().zip(u) {
                *w += scale * c * x;
            }
        }
    }
}

/// The network: weights, biases and the momentum state that training
/// carries between epochs. Momentum is transient and not persisted.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    layer_sizes: Vec<usize>,
    weights: Vec<Matrix>,
    biases: Vec<Vec<f64>>,
    momentum_w: Vec<Matrix>,
    momentum_b: Vec<Vec<f64>>,
}

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// Momentum constant, any number in [0, 1].
    pub momentum: f64,
    pub max_epochs: usize,
    /// Training stops once the summed squared-error loss drops to this.
    pub target_loss: f64,
    /// Seed for weight initialization in pipelines that build the model
    /// and train it in one step. Full-batch training itself draws no
    /// random numbers.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.05,
            momentum: 0.9,
            max_epochs: 5000,
            target_loss: 1e-3,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(0.0..=1.0).contains(&self.momentum) {
            return Err(Error::InvalidConfig(format!(
                "momentum constant must lie in [0, 1], got {}",
                self.momentum
            )));
        }
        if self.max_epochs == 0 {
            return Err(Error::InvalidConfig("max_epochs must be positive".into()));
        }
        if !(self.target_loss >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "target loss must be non-negative, got {}",
                self.target_loss
            )));
        }
        Ok(())
    }
}

/// One training example: features plus class index.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSample {
    pub features: Vec<f64>,
    pub class: usize,
}

/// Gradient of the summed loss, one entry per weight matrix and bias.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
}

/// Builds a model with weights drawn uniformly from
/// `[-1/sqrt(fan_in), +1/sqrt(fan_in)]` using a deterministic generator;
/// biases and momentum start at zero. The same seed always yields the
/// same model, bit for bit.
pub fn init_model(feature_dim: usize, num_classes: usize, seed: u64) -> Result<MlpModel> {
    if feature_dim == 0 {
        return Err(Error::InvalidTopology("feature dimension must be >= 1".into()));
    }
    if num_classes < 2 {
        return Err(Error::InvalidTopology(format!(
            "need at least 2 classes, got {num_classes}"
        )));
    }
    let mut layer_sizes = vec![feature_dim];
    layer_sizes.extend(HIDDEN_LAYERS);
    layer_sizes.push(num_classes);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    let mut momentum_w = Vec::new();
    let mut momentum_b = Vec::new();
    for win in layer_sizes.windows(2) {
        let (fan_in, fan_out) = (win[0], win[1]);
        let bound = 1.0 / (fan_in as f64).sqrt();
        let mut m = Matrix::zeros(fan_out, fan_in);
        for w in m.data.iter_mut() {
            *w = (2.0 * rand::Rng::random::<f64>(&mut rng) - 1.0) * bound;
        }
        weights.push(m);
        biases.push(vec![0.0; fan_out]);
        momentum_w.push(Matrix::zeros(fan_out, fan_in));
        momentum_b.push(vec![0.0; fan_out]);
    }
    Ok(MlpModel {
        layer_sizes,
        weights,
        biases,
        momentum_w,
        momentum_b,
    })
}

impl MlpModel {
    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn feature_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn num_classes(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn weights(&self) -> &[Matrix] {
        &self.weights
    }

    pub fn biases(&self) -> &[Vec<f64>] {
        &self.biases
    }

    /// Runs the network: every layer computes `tanh(W a + b)`. Returns the
    /// output activations, each strictly inside (-1, 1).
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.feature_dim() {
            return Err(Error::ShapeMismatch(format!(
                "input of length {}, network expects {}",
                x.len(),
                self.feature_dim()
            )));
        }
        let mut a = x.to_vec();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            let mut z = vec![0.0; w.rows];
            w.apply(&a, &mut z);
            for (z, b) in z.iter_mut().zip(b) {
                *z = (*z + b).tanh();
            }
            a = z;
        }
        Ok(a)
    }

    /// Class with the highest output score; ties break to the lowest
    /// index.
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        let scores = self.forward(x)?;
        let mut best = 0;
        for (i, &s) in scores.iter().enumerate() {
            if s > scores[best] {
                best = i;
            }
        }
        Ok(best)
    }

    /// Forward pass keeping every layer's activations, for backprop.
    fn forward_trace(&self, x: &[f64], activations: &mut Vec<Vec<f64>>) {
        activations.clear();
        activations.push(x.to_vec());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            let mut z = vec![0.0; w.rows];
            w.apply(activations.last().unwrap(), &mut z);
            for (z, b) in z.iter_mut().zip(b) {
                *z = (*z + b).tanh();
            }
            activations.push(z);
        }
    }
}

fn check_samples(model: &MlpModel, data: &[TrainSample]) -> Result<()> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    for s in data {
        if s.features.len() != model.feature_dim() {
            return Err(Error::ShapeMismatch(format!(
                "sample of length {}, network expects {}",
                s.features.len(),
                model.feature_dim()
            )));
        }
        if s.class >= model.num_classes() {
            return Err(Error::InvalidClass {
                index: s.class,
                classes: model.num_classes(),
            });
        }
    }
    Ok(())
}

/// Summed squared-error loss and its gradient over a whole batch.
///
/// Targets are one-hot with +1 for the true class and -1 elsewhere;
/// the loss is `0.5 * sum ||target - output||^2` over all samples.
pub fn batch_gradient(model: &MlpModel, data: &[TrainSample]) -> Result<(f64, Gradients)> {
    check_samples(model, data)?;
    let layers = model.weights.len();
    let mut grads = Gradients {
        weights: model
            .weights
            .iter()
            .map(|w| Matrix::zeros(w.rows, w.cols))
            .collect(),
        biases: model.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
    };
    let mut loss = 0.0;
    let mut activations: Vec<Vec<f64>> = Vec::new();
    for sample in data {
        model.forward_trace(&sample.features, &mut activations);
        let output = &activations[layers];

        // Output delta: (output - target) * tanh'.
        let mut delta: Vec<f64> = output
            .iter()
            .enumerate()
            .map(|(i, &o)| {
                let t = if i == sample.class { 1.0 } else { -1.0 };
                loss += 0.5 * (t - o) * (t - o);
                (o - t) * (1.0 - o * o)
            })
            .collect();

        for l in (0..layers).rev() {
            grads.weights[l].add_outer(&delta, &activations[l], 1.0);
            for (g, d) in grads.biases[l].iter_mut().zip(&delta) {
                *g += d;
            }
            if l > 0 {
                let mut prev = vec![0.0; model.weights[l].cols];
                model.weights[l].apply_transposed_add(&delta, &mut prev);
                for (p, a) in prev.iter_mut().zip(&activations[l]) {
                    *p *= 1.0 - a * a;
                }
                delta = prev;
            }
        }
    }
    Ok((loss, grads))
}

/// Trains in place with full-batch gradient descent plus momentum and
/// returns the per-epoch loss history (the loss measured at the start of
/// each epoch). Stops after `max_epochs` epochs or as soon as the loss
/// reaches `target_loss`.
pub fn train_batch(
    model: &mut MlpModel,
    data: &[TrainSample],
    cfg: &TrainConfig,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    check_samples(model, data)?;
    let mut history = Vec::new();
    for epoch in 0..cfg.max_epochs {
        let (loss, grads) = batch_gradient(model, data)?;
        if !loss.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "training diverged at epoch {epoch}: loss {loss}"
            )));
        }
        history.push(loss);
        if loss <= cfg.target_loss {
            break;
        }
        let step = (1.0 - cfg.momentum) * cfg.learning_rate;
        for l in 0..model.weights.len() {
            let mw = &mut model.momentum_w[l];
            for (m, g) in mw.data.iter_mut().zip(&grads.weights[l].data) {
                *m = cfg.momentum * *m - step * g;
            }
            for (w, m) in model.weights[l].data.iter_mut().zip(&mw.data) {
                *w += m;
            }
            for ((m, g), b) in model.momentum_b[l]
                .iter_mut()
                .zip(&grads.biases[l])
                .zip(model.biases[l].iter_mut())
            {
                *m = cfg.momentum * *m - step * g;
                *b += *m;
            }
        }
    }
    Ok(history)
}

/// Compares every analytic partial derivative against a central finite
/// difference with step 1e-5 and returns the largest relative error,
/// `|a - n| / max(|a|, |n|, 1)`. The floor makes near-zero entries compare
/// absolutely, where finite differences are pure rounding noise.
pub fn gradient_check(model: &MlpModel, x: &[f64], target: usize) -> Result<f64> {
    const H: f64 = 1e-5;
    let sample = TrainSample {
        features: x.to_vec(),
        class: target,
    };
    let data = std::slice::from_ref(&sample);
    let (_, analytic) = batch_gradient(model, data)?;

    let mut probe = model.clone();
    let mut worst: f64 = 0.0;
    let loss_of = |m: &MlpModel| -> f64 { batch_gradient(m, data).map(|(l, _)| l).unwrap() };

    for l in 0..model.weights.len() {
        for i in 0..model.weights[l].data.len() {
            let orig = model.weights[l].data[i];
            probe.weights[l].data[i] = orig + H;
            let up = loss_of(&probe);
            probe.weights[l].data[i] = orig - H;
            let down = loss_of(&probe);
            probe.weights[l].data[i] = orig;
            let numeric = (up - down) / (2.0 * H);
            let a = analytic.weights[l].data[i];
            worst = worst.max((a - numeric).abs() / a.abs().max(numeric.abs()).max(1.0));
        }
        for i in 0..model.biases[l].len() {
            let orig = model.biases[l][i];
            probe.biases[l][i] = orig + H;
            let up = loss_of(&probe);
            probe.biases[l][i] = orig - H;
            let down = loss_of(&probe);
            probe.biases[l][i] = orig;
            let numeric = (up - down) / (2.0 * H);
            let a = analytic.biases[l][i];
            worst = worst.max((a - numeric).abs() / a.abs().max(numeric.abs()).max(1.0));
        }
    }
    Ok(worst)
}

/// Pairs feature vectors with class indices. Classes are the sorted
/// distinct labels, so the mapping is reproducible from the data alone.
pub fn labeled_samples(vectors: &[FeatureVector]) -> Result<(Vec<TrainSample>, Vec<String>)> {
    if vectors.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut classes: Vec<String> = Vec::new();
    for v in vectors {
        let label = v.label.as_ref().ok_or_else(|| {
            Error::malformed("feature set", "vector without a label cannot train")
        })?;
        if !classes.contains(label) {
            classes.push(label.clone());
        }
    }
    classes.sort();
    let samples = vectors
        .iter()
        .map(|v| {
            let label = v.label.as_ref().unwrap();
            TrainSample {
                features: v.as_f64(),
                class: classes.iter().position(|c| c == label).unwrap(),
            }
        })
        .collect();
    Ok((samples, classes))
}

const MODEL_MAGIC: &str = "MLPv1";

impl MlpModel {
    /// Versioned line-oriented text form: magic, layer sizes, then each
    /// weight matrix row-major followed by its bias vector. Values carry
    /// enough digits to round-trip exactly.
    pub fn to_text(&self) -> String {
        let mut out = String::from(MODEL_MAGIC);
        out.push('\n');
        let sizes: Vec<String> = self.layer_sizes.iter().map(|s| s.to_string()).collect();
        out.push_str(&sizes.join(" "));
        out.push('\n');
        for (w, b) in self.weights.iter().zip(&self.biases) {
            for r in 0..w.rows {
                let row: Vec<String> = (0..w.cols)
                    .map(|c| format!("{:.17e}", w.get(r, c)))
                    .collect();
                out.push_str(&row.join(" "));
                out.push('\n');
            }
            let bias: Vec<String> = b.iter().map(|v| format!("{v:.17e}")).collect();
            out.push_str(&bias.join(" "));
            out.push('\n');
        }
        out
    }

    /// Parses the form written by [`MlpModel::to_text`]. Momentum state is
    /// not stored; it loads as zero.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(MODEL_MAGIC) => {}
            other => {
                return Err(Error::malformed(
                    "model file",
                    format!("expected `{MODEL_MAGIC}` header, got {other:?}"),
                ))
            }
        }
        let sizes_line = lines
            .next()
            .ok_or_else(|| Error::malformed("model file", "missing layer sizes"))?;
        let layer_sizes: Vec<usize> = sizes_line
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|e| Error::malformed("model file", format!("layer size: {e}")))
            })
            .collect::<Result<_>>()?;
        if layer_sizes.len() != 5 || layer_sizes[1..4] != HIDDEN_LAYERS {
            return Err(Error::InvalidTopology(format!(
                "layer sizes {layer_sizes:?} are not [D, 100, 50, 10, C]"
            )));
        }
        if layer_sizes[0] == 0 || layer_sizes[4] < 2 {
            return Err(Error::InvalidTopology(format!(
                "layer sizes {layer_sizes:?} have an empty end"
            )));
        }

        let mut values = text
            .lines()
            .skip(2)
            .flat_map(|l| l.split_whitespace())
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|e| Error::malformed("model file", format!("value {t:?}: {e}")))
            });
        let mut next = |what: &str| -> Result<f64> {
            values
                .next()
                .ok_or_else(|| Error::malformed("model file", format!("missing {what}")))?
        };

        let mut weights = Vec::new();
        let mut biases = Vec::new();
        let mut momentum_w = Vec::new();
        let mut momentum_b = Vec::new();
        for win in layer_sizes.windows(2) {
            let (fan_in, fan_out) = (win[0], win[1]);
            let mut m = Matrix::zeros(fan_out, fan_in);
            for w in m.data.iter_mut() {
                *w = next("weight")?;
            }
            let mut b = vec![0.0; fan_out];
            for v in b.iter_mut() {
                *v = next("bias")?;
            }
            if m.data.iter().chain(b.iter()).any(|v| !v.is_finite()) {
                return Err(Error::malformed("model file", "non-finite parameter"));
            }
            weights.push(m);
            biases.push(b);
            momentum_w.push(Matrix::zeros(fan_out, fan_in));
            momentum_b.push(vec![0.0; fan_out]);
        }
        if values.next().is_some() {
            return Err(Error::malformed("model file", "trailing values"));
        }
        Ok(MlpModel {
            layer_sizes,
            weights,
            biases,
            momentum_w,
            momentum_b,
        })
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}
