//! Mini-batch training of affine softmax classifiers under any
//! [`MarginSpec`], with SGD+momentum and Adam.
//!
//! Training is deterministic for a fixed `(dataset, spec, config)`: weights
//! start at zero, the per-epoch shuffle is driven by the seeded generator,
//! and gradients within a batch are reduced sequentially in index order.

use std::io::{BufRead, BufReader, Read, Write};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dist::LabeledDataset;
use crate::loss::MarginSpec;
use crate::rng::rng_from_seed;
use crate::{Error, Result};

/// Affine scorer: `score[y] = w_y . x + b_y` with `w_y` the rows of an
/// `L x D` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    weights: Vec<f64>,
    biases: Vec<f64>,
    dim: usize,
}

impl LinearModel {
    /// The all-zero model.
    pub fn zeros(num_classes: usize, dim: usize) -> Self {
        Self { weights: vec![0.0; num_classes * dim], biases: vec![0.0; num_classes], dim }
    }

    pub fn from_parts(weights: Vec<f64>, biases: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 || weights.len() != biases.len() * dim {
            return Err(Error::LengthMismatch { expected: biases.len() * dim, got: weights.len() });
        }
        if weights.iter().chain(biases.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("model parameters must be finite".into()));
        }
        Ok(Self { weights, biases, dim })
    }

    pub fn num_classes(&self) -> usize {
        self.biases.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weights_row(&self, y: usize) -> &[f64] {
        &self.weights[y * self.dim..(y + 1) * self.dim]
    }

    pub(crate) fn weights_row_mut(&mut self, y: usize) -> &mut [f64] {
        &mut self.weights[y * self.dim..(y + 1) * self.dim]
    }

    pub fn bias(&self, y: usize) -> f64 {
        self.biases[y]
    }

    pub(crate) fn bias_mut(&mut self, y: usize) -> &mut f64 {
        &mut self.biases[y]
    }

    /// Scores for one feature vector.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::LengthMismatch { expected: self.dim, got: x.len() });
        }
        let mut scores = vec![0.0; self.num_classes()];
        self.forward_into(x, &mut scores);
        Ok(scores)
    }

    fn forward_into(&self, x: &[f64], scores: &mut [f64]) {
        for y in 0..self.num_classes() {
            let row = self.weights_row(y);
            let mut s = self.biases[y];
            for (w, v) in row.iter().zip(x) {
                s += w * v;
            }
            scores[y] = s;
        }
    }

    /// Euclidean norm of each weight row, bias excluded.
    pub fn weight_norms(&self) -> Vec<f64> {
        (0..self.num_classes())
            .map(|y| self.weights_row(y).iter().map(|w| w * w).sum::<f64>().sqrt())
            .collect()
    }

    /// Plain-text checkpoint: a `L D` header line, one row of weights per
    /// class, then the bias row.
    pub fn write_checkpoint<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {}", self.num_classes(), self.dim)?;
        for y in 0..self.num_classes() {
            let row: Vec<String> = self.weights_row(y).iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", row.join(" "))?;
        }
        let biases: Vec<String> = self.biases.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", biases.join(" "))?;
        Ok(())
    }

    /// Reads a checkpoint written by [`LinearModel::write_checkpoint`].
    pub fn read_checkpoint<R: Read>(r: R) -> Result<Self> {
        let mut lines = BufReader::new(r).lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty checkpoint".into()))??;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|e| Error::Parse(format!("bad header `{header}`: {e}"))))
            .collect::<Result<_>>()?;
        if dims.len() != 2 {
            return Err(Error::Parse(format!("expected `L D` header, got `{header}`")));
        }
        let (l, d) = (dims[0], dims[1]);
        let parse_row = |line: &str, n: usize| -> Result<Vec<f64>> {
            let row: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse().map_err(|e| Error::Parse(format!("bad value `{t}`: {e}"))))
                .collect::<Result<_>>()?;
            if row.len() != n {
                return Err(Error::Parse(format!("expected {n} values, got {}", row.len())));
            }
            Ok(row)
        };
        let mut weights = Vec::with_capacity(l * d);
        for _ in 0..l {
            let line = lines.next().ok_or_else(|| Error::Parse("truncated checkpoint".into()))??;
            weights.extend(parse_row(&line, d)?);
        }
        let line = lines.next().ok_or_else(|| Error::Parse("missing bias row".into()))??;
        let biases = parse_row(&line, l)?;
        Self::from_parts(weights, biases, d)
    }
}

/// Optimizer selection and hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OptimizerKind {
    SgdMomentum { momentum: f64 },
    Adam { beta1: f64, beta2: f64, epsilon: f64 },
}

impl OptimizerKind {
    /// SGD with the customary momentum of 0.9.
    pub fn sgd_momentum() -> Self {
        Self::SgdMomentum { momentum: 0.9 }
    }

    pub fn adam() -> Self {
        Self::Adam { beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub weight_decay: f64,
    pub seed: u64,
}

impl OptimizerConfig {
    /// Defaults used by the synthetic studies: SGD momentum 0.9, learning
    /// rate 0.1, batch 128, 200 epochs, no weight decay.
    pub fn default_sgd(seed: u64) -> Self {
        Self {
            kind: OptimizerKind::sgd_momentum(),
            learning_rate: 0.1,
            epochs: 200,
            batch_size: 128,
            weight_decay: 0.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.epochs < 1 {
            return Err(Error::InvalidParameter("epochs must be at least 1".into()));
        }
        if self.batch_size < 1 {
            return Err(Error::InvalidParameter("batch size must be at least 1".into()));
        }
        if self.weight_decay < 0.0 || !self.weight_decay.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "weight decay must be nonnegative, got {}",
                self.weight_decay
            )));
        }
        match self.kind {
            OptimizerKind::SgdMomentum { momentum } => {
                if !(0.0..1.0).contains(&momentum) {
                    return Err(Error::InvalidParameter(format!(
                        "momentum must lie in [0,1), got {momentum}"
                    )));
                }
            }
            OptimizerKind::Adam { beta1, beta2, epsilon } => {
                if !(0.0..1.0).contains(&beta1) || !(0.0..1.0).contains(&beta2) || epsilon <= 0.0 || epsilon.is_nan() {
                    return Err(Error::InvalidParameter("invalid Adam parameters".into()));
                }
            }
        }
        Ok(())
    }
}

/// First-order update rule over a flat parameter vector.
///
/// SGD+momentum: `v <- momentum * v + g; p <- p - lr * v`.
/// Adam: bias-corrected first/second moments, `p <- p - lr * m_hat / (sqrt(v_hat) + eps)`.
#[derive(Debug, Clone)]
pub enum Optimizer {
    SgdMomentum { momentum: f64, velocity: Vec<f64> },
    Adam { beta1: f64, beta2: f64, epsilon: f64, m: Vec<f64>, v: Vec<f64>, t: u64 },
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, num_params: usize) -> Self {
        match kind {
            OptimizerKind::SgdMomentum { momentum } => {
                Self::SgdMomentum { momentum, velocity: vec![0.0; num_params] }
            }
            OptimizerKind::Adam { beta1, beta2, epsilon } => Self::Adam {
                beta1,
                beta2,
                epsilon,
                m: vec![0.0; num_params],
                v: vec![0.0; num_params],
                t: 0,
            },
        }
    }

    /// One update of `params` against `grads` at the given learning rate.
    pub fn step(&mut self, learning_rate: f64, params: &mut [f64], grads: &[f64]) {
        debug_assert_eq!(params.len(), grads.len());
        match self {
            Self::SgdMomentum { momentum, velocity } => {
                for i in 0..params.len() {
                    velocity[i] = *momentum * velocity[i] + grads[i];
                    params[i] -= learning_rate * velocity[i];
                }
            }
            Self::Adam { beta1, beta2, epsilon, m, v, t } => {
                *t += 1;
                let bc1 = 1.0 - beta1.powi(*t as i32);
                let bc2 = 1.0 - beta2.powi(*t as i32);
                for i in 0..params.len() {
                    m[i] = *beta1 * m[i] + (1.0 - *beta1) * grads[i];
                    v[i] = *beta2 * v[i] + (1.0 - *beta2) * grads[i] * grads[i];
                    let m_hat = m[i] / bc1;
                    let v_hat = v[i] / bc2;
                    params[i] -= learning_rate * m_hat / (v_hat.sqrt() + *epsilon);
                }
            }
        }
    }
}

/// A trained model together with its per-epoch mean training loss.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: LinearModel,
    pub epoch_loss: Vec<f64>,
}

impl TrainOutcome {
    /// Loss curve as CSV `epoch,mean_loss`.
    pub fn write_loss_curve<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "epoch,mean_loss")?;
        for (epoch, loss) in self.epoch_loss.iter().enumerate() {
            writeln!(w, "{epoch},{loss}")?;
        }
        Ok(())
    }
}

/// Trains an affine softmax classifier by mini-batch first-order updates on
/// the empirical mean of `spec`'s loss. Aborts with
/// [`Error::NonFiniteLoss`] if the loss diverges.
pub fn train(dataset: &LabeledDataset, spec: &MarginSpec, config: &OptimizerConfig) -> Result<TrainOutcome> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(Error::InvalidParameter("dataset must be nonempty".into()));
    }
    let l = spec.num_classes();
    if dataset.num_classes() != l {
        return Err(Error::LengthMismatch { expected: l, got: dataset.num_classes() });
    }
    let d = dataset.dim();
    let n = dataset.len();

    // Parameters are flattened as [weights (L*D), biases (L)].
    let mut params = vec![0.0; l * d + l];
    let mut optimizer = Optimizer::new(config.kind, params.len());
    let mut rng = rng_from_seed(config.seed);

    let mut indices: Vec<usize> = (0..n).collect();
    let mut scores = vec![0.0; l];
    let mut grad_scores = vec![0.0; l];
    let mut grads = vec![0.0; params.len()];
    let mut epoch_loss = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        indices.shuffle(&mut rng);
        let mut loss_sum = 0.0;

        for batch in indices.chunks(config.batch_size) {
            grads.iter_mut().for_each(|g| *g = 0.0);
            let inv = 1.0 / batch.len() as f64;

            for &idx in batch {
                let x = dataset.feature(idx);
                let y = dataset.label(idx);
                forward_flat(&params, l, d, x, &mut scores);
                loss_sum += spec.loss_value(y, &scores);
                spec.loss_grad_into(y, &scores, &mut grad_scores);
                for (c, &g) in grad_scores.iter().enumerate() {
                    let gw = g * inv;
                    let row = &mut grads[c * d..(c + 1) * d];
                    for (gr, v) in row.iter_mut().zip(x) {
                        *gr += gw * v;
                    }
                    grads[l * d + c] += gw;
                }
            }

            if config.weight_decay > 0.0 {
                for i in 0..l * d {
                    grads[i] += config.weight_decay * params[i];
                }
            }

            optimizer.step(config.learning_rate, &mut params, &grads);
        }

        let mean = loss_sum / n as f64;
        if !mean.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
        epoch_loss.push(mean);
    }

    let (weights, biases) = params.split_at(l * d);
    let model = LinearModel::from_parts(weights.to_vec(), biases.to_vec(), d)
        .map_err(|_| Error::NonFiniteLoss { epoch: config.epochs - 1 })?;
    Ok(TrainOutcome { model, epoch_loss })
}

fn forward_flat(params: &[f64], l: usize, d: usize, x: &[f64], scores: &mut [f64]) {
    for y in 0..l {
        let row = &params[y * d..(y + 1) * d];
        let mut s = params[l * d + y];
        for (w, v) in row.iter().zip(x) {
            s += w * v;
        }
        scores[y] = s;
    }
}

/// Mean of `spec`'s loss over the dataset under `model`.
pub fn mean_loss(dataset: &LabeledDataset, spec: &MarginSpec, model: &LinearModel) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::InvalidParameter("dataset must be nonempty".into()));
    }
    let mut scores = vec![0.0; model.num_classes()];
    let mut sum = 0.0;
    for n in 0..dataset.len() {
        model.forward_into(dataset.feature(n), &mut scores);
        sum += spec.loss_value(dataset.label(n), &scores);
    }
    Ok(sum / dataset.len() as f64)
}

/// Model predictions over a whole dataset.
pub fn predict_dataset(model: &LinearModel, dataset: &LabeledDataset) -> Result<Vec<usize>> {
    if dataset.dim() != model.dim() {
        return Err(Error::LengthMismatch { expected: model.dim(), got: dataset.dim() });
    }
    let mut scores = vec![0.0; model.num_classes()];
    let mut preds = Vec::with_capacity(dataset.len());
    for n in 0..dataset.len() {
        model.forward_into(dataset.feature(n), &mut scores);
        preds.push(crate::adjust::predict(&scores));
    }
    Ok(preds)
}

/// Standard Pearson correlation; errors on zero variance.
pub fn pearson_correlation(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { expected: a.len(), got: b.len() });
    }
    if a.len() < 2 {
        return Err(Error::InvalidParameter("need at least 2 points".into()));
    }
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (x, y) in a.iter().zip(b) {
        let da = x - mean_a;
        let db = y - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if var_a == 0.0 || var_b == 0.0 {
        return Err(Error::InvalidParameter("zero variance input".into()));
    }
    Ok(cov / (var_a.sqrt() * var_b.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adjust::{normalize_model, NormalizationSpec};
    use crate::dist::ClassPriors;

    #[test]
    fn forward_basics() {
        let zero = LinearModel::zeros(3, 2);
        assert_eq!(zero.forward(&[0.4, -1.0]).unwrap(), vec![0.0; 3]);

        let ident = LinearModel::from_parts(vec![1.0], vec![0.0], 1).unwrap();
        assert_eq!(ident.forward(&[3.0]).unwrap(), vec![3.0]);

        // Bayes separator weights w = mu_plus - mu_minus evaluated at mu_plus.
        let oracle = LinearModel::from_parts(vec![2.0, 2.0, -2.0, -2.0], vec![0.0, 0.0], 2).unwrap();
        let scores = oracle.forward(&[1.0, 1.0]).unwrap();
        assert_eq!(scores[0], 4.0);

        assert!(zero.forward(&[1.0]).is_err());
    }

    #[test]
    fn weight_norms_definition() {
        let zero = LinearModel::zeros(2, 3);
        assert_eq!(zero.weight_norms(), vec![0.0, 0.0]);

        let unit = LinearModel::from_parts(vec![1.0, 0.0, 0.0, 1.0], vec![5.0, -5.0], 2).unwrap();
        assert_eq!(unit.weight_norms(), vec![1.0, 1.0]);

        // Normalizing by the norms leaves unit rows.
        let m = LinearModel::from_parts(vec![3.0, 4.0, 0.0, 2.0], vec![1.0, 1.0], 2).unwrap();
        let spec = NormalizationSpec::new(m.weight_norms(), 1.0).unwrap();
        let normed = normalize_model(&m, &spec).unwrap();
        for norm in normed.weight_norms() {
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn checkpoint_round_trip() {
        let m = LinearModel::from_parts(vec![0.25, -1.5, 3.0, 0.125], vec![0.5, -0.75], 2).unwrap();
        let mut buf = Vec::new();
        m.write_checkpoint(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("2 2\n"));
        let back = LinearModel::read_checkpoint(&buf[..]).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn sgd_momentum_step_matches_closed_form() {
        // Quadratic objective q(p) = (p - 3)^2, gradient 2(p - 3).
        let mut params = vec![1.0f64];
        let grad = |p: f64| 2.0 * (p - 3.0);
        let mut opt = Optimizer::new(OptimizerKind::SgdMomentum { momentum: 0.9 }, 1);
        let lr = 0.1;

        let g1 = grad(params[0]);
        opt.step(lr, &mut params, &[g1]);
        // v1 = g1, p1 = p0 - lr*g1
        let p1 = 1.0 - lr * g1;
        assert!((params[0] - p1).abs() < 1e-12);

        let g2 = grad(params[0]);
        opt.step(lr, &mut params, &[g2]);
        // v2 = 0.9*g1 + g2, p2 = p1 - lr*v2
        let p2 = p1 - lr * (0.9 * g1 + g2);
        assert!((params[0] - p2).abs() < 1e-12);
    }

    #[test]
    fn adam_step_matches_closed_form() {
        let mut params = vec![1.0f64];
        let g = 2.0 * (params[0] - 3.0);
        let (beta1, beta2, eps, lr) = (0.9, 0.999, 1e-8, 0.1);
        let mut opt = Optimizer::new(OptimizerKind::Adam { beta1, beta2, epsilon: eps }, 1);
        opt.step(lr, &mut params, &[g]);

        let m = (1.0 - beta1) * g;
        let v = (1.0 - beta2) * g * g;
        let m_hat = m / (1.0 - beta1);
        let v_hat = v / (1.0 - beta2);
        let expected = 1.0 - lr * m_hat / (v_hat.sqrt() + eps);
        assert!((params[0] - expected).abs() < 1e-12);
    }

    fn separable_toy() -> LabeledDataset {
        // Class 0 on the right half-plane, class 1 on the left.
        LabeledDataset::new(
            vec![1.0, 1.0, 1.0, -1.0, -1.0, 1.0, -1.0, -1.0],
            2,
            vec![0, 0, 1, 1],
            2,
        )
        .unwrap()
    }

    #[test]
    fn erm_separates_a_separable_toy_set() {
        let data = separable_toy();
        let spec = MarginSpec::erm(2);
        let config = OptimizerConfig {
            kind: OptimizerKind::sgd_momentum(),
            learning_rate: 0.5,
            epochs: 200,
            batch_size: 4,
            weight_decay: 0.0,
            seed: 1,
        };
        let outcome = train(&data, &spec, &config).unwrap();
        let preds = predict_dataset(&outcome.model, &data).unwrap();
        assert_eq!(preds, data.labels());
    }

    #[test]
    fn training_is_deterministic() {
        let data = separable_toy();
        let spec = MarginSpec::balanced(&ClassPriors::from_counts(data.class_counts()).unwrap());
        let config = OptimizerConfig {
            kind: OptimizerKind::adam(),
            learning_rate: 0.05,
            epochs: 30,
            batch_size: 2,
            weight_decay: 0.01,
            seed: 7,
        };
        let a = train(&data, &spec, &config).unwrap();
        let b = train(&data, &spec, &config).unwrap();
        assert_eq!(a, b);

        let other = train(&data, &spec, &OptimizerConfig { seed: 8, ..config }).unwrap();
        assert_ne!(a.model, other.model);
    }

    #[test]
    fn training_reduces_empirical_risk() {
        let data = separable_toy();
        let spec = MarginSpec::erm(2);
        let config = OptimizerConfig {
            kind: OptimizerKind::sgd_momentum(),
            learning_rate: 0.1,
            epochs: 50,
            batch_size: 2,
            weight_decay: 0.0,
            seed: 3,
        };
        let outcome = train(&data, &spec, &config).unwrap();
        let initial = mean_loss(&data, &spec, &LinearModel::zeros(2, 2)).unwrap();
        let final_ = mean_loss(&data, &spec, &outcome.model).unwrap();
        assert!(final_ <= initial, "final {final_} vs initial {initial}");
    }

    #[test]
    fn divergent_learning_rate_reports_nonfinite_loss() {
        // Conflicting labels at the same point keep gradients alive, and the
        // oversized decoupled step blows the weights up past overflow.
        let data = LabeledDataset::new(vec![1.0, 0.0, 1.0, 0.0], 2, vec![0, 1], 2).unwrap();
        let spec = MarginSpec::erm(2);
        let config = OptimizerConfig {
            kind: OptimizerKind::SgdMomentum { momentum: 0.9 },
            learning_rate: 1e8,
            epochs: 100,
            batch_size: 1,
            weight_decay: 1e8,
            seed: 3,
        };
        match train(&data, &spec, &config) {
            Err(Error::NonFiniteLoss { .. }) => {}
            other => panic!("expected NonFiniteLoss, got {other:?}"),
        }
    }

    #[test]
    fn loss_curve_csv_schema() {
        let outcome = TrainOutcome { model: LinearModel::zeros(2, 2), epoch_loss: vec![0.7, 0.5] };
        let mut buf = Vec::new();
        outcome.write_loss_curve(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "epoch,mean_loss\n0,0.7\n1,0.5\n");
    }

    #[test]
    fn pearson_basics() {
        let a = [1.0, 2.0, 4.0, 8.0];
        let neg: Vec<f64> = a.iter().map(|v| -v).collect();
        assert!((pearson_correlation(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson_correlation(&a, &neg).unwrap() + 1.0).abs() < 1e-12);
        let r = pearson_correlation(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0001]).unwrap();
        assert!((r - 1.0).abs() < 1e-6);
        assert!(pearson_correlation(&[1.0, 1.0], &[1.0, 2.0]).is_err());
        assert!(pearson_correlation(&[1.0], &[1.0]).is_err());
    }
}
