use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::check_training_set;
use crate::dataset::Instance;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpParams {
    /// `None` means `ceil((features + 1) / 2)`.
    pub hidden_units: Option<usize>,
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Rescale every input and the target to `[-1, 1]` before training.
    pub normalize: bool,
    /// Undo any step that raises the loss and halve the learning rate.
    pub backtrack: bool,
}

impl Default for MlpParams {
    fn default() -> Self {
        Self {
            hidden_units: None,
            learning_rate: 0.3,
            momentum: 0.2,
            epochs: 500,
            seed: 1,
            normalize: true,
            backtrack: true,
        }
    }
}

impl MlpParams {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_units == Some(0) {
            return Err(Error::Config("mlp.hidden_units must be > 0".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "mlp.learning_rate must be > 0, got {}",
                self.learning_rate
            )));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Config(format!("mlp.momentum must be in [0, 1), got {}", self.momentum)));
        }
        if self.epochs == 0 {
            return Err(Error::Config("mlp.epochs must be > 0".into()));
        }
        Ok(())
    }

    pub fn hidden_for(&self, n_features: usize) -> usize {
        self.hidden_units.unwrap_or((n_features + 2) / 2)
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// One sigmoid hidden layer and a linear output unit.
///
/// Parameters are stored flat: hidden weights row by row (`hidden x inputs`),
/// hidden biases, output weights, output bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub n_inputs: usize,
    pub n_hidden: usize,
    pub params: Vec<f64>,
}

impl Network {
    pub fn n_params(n_inputs: usize, n_hidden: usize) -> usize {
        n_hidden * n_inputs + 2 * n_hidden + 1
    }

    pub fn random(n_inputs: usize, n_hidden: usize, rng: &mut impl Rng) -> Self {
        Self {
            n_inputs,
            n_hidden,
            params: (0..Self::n_params(n_inputs, n_hidden))
                .map(|_| rng.random_range(-0.5..0.5))
                .collect(),
        }
    }

    fn hidden(&self, x: &[f64], out: &mut [f64]) {
        let (d, h) = (self.n_inputs, self.n_hidden);
        let b1 = &self.params[h * d..h * d + h];
        for (k, a) in out.iter_mut().enumerate() {
            let w = &self.params[k * d..(k + 1) * d];
            *a = sigmoid(b1[k] + w.iter().zip(x).map(|(w, x)| w * x).sum::<f64>());
        }
    }

    fn output(&self, hidden: &[f64]) -> f64 {
        let (d, h) = (self.n_inputs, self.n_hidden);
        let w2 = &self.params[h * d + h..h * d + 2 * h];
        self.params[h * d + 2 * h] + w2.iter().zip(hidden).map(|(w, a)| w * a).sum::<f64>()
    }

    pub fn forward(&self, x: &[f64]) -> f64 {
        let mut hidden = vec![0.0; self.n_hidden];
        self.hidden(x, &mut hidden);
        self.output(&hidden)
    }

    /// `0.5 * sum (f(x) - y)^2` over the batch and its gradient by
    /// backpropagation.
    pub fn loss_and_grad(&self, xs: &[Vec<f64>], ys: &[f64]) -> (f64, Vec<f64>) {
        let (d, h) = (self.n_inputs, self.n_hidden);
        let mut grad = vec![0.0; self.params.len()];
        let mut loss = 0.0;
        let mut hidden = vec![0.0; h];
        let w2_at = h * d + h;
        for (x, &y) in xs.iter().zip(ys) {
            self.hidden(x, &mut hidden);
            let err = self.output(&hidden) - y;
            loss += 0.5 * err * err;
            grad[w2_at + h] += err;
            for k in 0..h {
                grad[w2_at + k] += err * hidden[k];
                let delta = err * self.params[w2_at + k] * hidden[k] * (1.0 - hidden[k]);
                grad[h * d + k] += delta;
                for (g, xj) in grad[k * d..(k + 1) * d].iter_mut().zip(x) {
                    *g += delta * xj;
                }
            }
        }
        (loss, grad)
    }
}

/// Affine map of one column to `[-1, 1]`; a constant column maps to 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scale {
    pub center: f64,
    pub half_range: f64,
}

impl Scale {
    fn fit(values: impl Iterator<Item = f64>, enabled: bool) -> Self {
        let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if !enabled || !(hi > lo) {
            let center = if enabled && lo.is_finite() { lo } else { 0.0 };
            return Self { center, half_range: 1.0 };
        }
        Self {
            center: (lo + hi) / 2.0,
            half_range: (hi - lo) / 2.0,
        }
    }

    fn apply(&self, v: f64) -> f64 {
        (v - self.center) / self.half_range
    }

    fn invert(&self, v: f64) -> f64 {
        v * self.half_range + self.center
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub network: Network,
    pub input_scale: Vec<Scale>,
    pub target_scale: Scale,
}

impl MlpModel {
    pub fn n_features(&self) -> usize {
        self.network.n_inputs
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let z: Vec<f64> = x.iter().zip(&self.input_scale).map(|(v, s)| s.apply(*v)).collect();
        self.target_scale.invert(self.network.forward(&z))
    }
}

/// Full-batch gradient descent with momentum on the summed squared error.
///
/// With `backtrack` on, a step that increases the loss is reverted, the
/// momentum is cleared and the learning rate halved for the rest of training.
pub fn fit_mlp(train: &[Instance], hp: &MlpParams) -> Result<MlpModel> {
    hp.validate()?;
    let d = check_training_set(train, 1)?;
    let input_scale: Vec<Scale> = (0..d)
        .map(|j| Scale::fit(train.iter().map(|i| i.x[j]), hp.normalize))
        .collect();
    let target_scale = Scale::fit(train.iter().map(|i| i.y), hp.normalize);
    let xs: Vec<Vec<f64>> = train
        .iter()
        .map(|i| i.x.iter().zip(&input_scale).map(|(v, s)| s.apply(*v)).collect())
        .collect();
    let ys: Vec<f64> = train.iter().map(|i| target_scale.apply(i.y)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
    let mut net = Network::random(d, hp.hidden_for(d), &mut rng);
    let mut velocity = vec![0.0; net.params.len()];
    let mut lr = hp.learning_rate;
    let diverged = |epoch: usize, lr: f64| {
        Error::Model(format!(
            "mlp: loss diverged at epoch {epoch} with learning rate {lr}; lower the learning rate"
        ))
    };
    let (mut loss, mut grad) = net.loss_and_grad(&xs, &ys);
    if !loss.is_finite() {
        return Err(diverged(0, lr));
    }
    for epoch in 0..hp.epochs {
        let previous = net.params.clone();
        for ((p, v), g) in net.params.iter_mut().zip(&mut velocity).zip(&grad) {
            *v = hp.momentum * *v - lr * g;
            *p += *v;
        }
        let (next_loss, next_grad) = net.loss_and_grad(&xs, &ys);
        let finite = next_loss.is_finite() && next_grad.iter().all(|g| g.is_finite());
        if hp.backtrack && !(finite && next_loss <= loss) {
            net.params = previous;
            velocity.iter_mut().for_each(|v| *v = 0.0);
            lr *= 0.5;
            continue;
        }
        if !finite {
            return Err(diverged(epoch, lr));
        }
        loss = next_loss;
        grad = next_grad;
    }
    Ok(MlpModel {
        network: net,
        input_scale,
        target_scale,
    })
}
