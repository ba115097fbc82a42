use serde::{Deserialize, Serialize};

use super::{check_training_set, Kernel};
use crate::dataset::Instance;
use crate::error::{Error, Result};

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvrParams {
    pub c: f64,
    pub epsilon: f64,
    pub kernel: Kernel,
    /// Stop once the maximal KKT violation falls below this.
    pub tolerance: f64,
    pub max_iter: usize,
    /// Rescale inputs and target to `[0, 1]` before solving.
    pub normalize: bool,
}

impl Default for SvrParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            epsilon: 1e-3,
            kernel: Kernel::Linear,
            tolerance: 1e-3,
            max_iter: 1_000_000,
            normalize: false,
        }
    }
}

impl SvrParams {
    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Config(format!("smoreg.c must be > 0, got {}", self.c)));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config(format!("smoreg.epsilon must be >= 0, got {}", self.epsilon)));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config(format!("smoreg.tolerance must be > 0, got {}", self.tolerance)));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("smoreg.max_iter must be > 0".into()));
        }
        Ok(())
    }
}

/// Min-max map of one column to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitScale {
    pub min: f64,
    pub range: f64,
}

impl UnitScale {
    const IDENTITY: UnitScale = UnitScale { min: 0.0, range: 1.0 };

    fn fit(values: impl Iterator<Item = f64>) -> Self {
        let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if hi > lo {
            Self { min: lo, range: hi - lo }
        } else {
            Self { min: lo, range: 1.0 }
        }
    }

    fn apply(&self, v: f64) -> f64 {
        (v - self.min) / self.range
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    pub kernel: Kernel,
    /// Training inputs after scaling.
    pub inputs: Vec<Vec<f64>>,
    pub alpha: Vec<f64>,
    pub alpha_star: Vec<f64>,
    pub bias: f64,
    pub input_scale: Vec<UnitScale>,
    pub target_scale: UnitScale,
    pub iterations: usize,
}

impl SvrModel {
    pub fn n_features(&self) -> usize {
        self.input_scale.len()
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let z: Vec<f64> = x.iter().zip(&self.input_scale).map(|(v, s)| s.apply(*v)).collect();
        let f = self.bias
            + self
                .inputs
                .iter()
                .zip(self.alpha.iter().zip(&self.alpha_star))
                .filter(|(_, (a, s))| **a != **s)
                .map(|(xi, (a, s))| (a - s) * self.kernel.eval(xi, &z))
                .sum::<f64>();
        f * self.target_scale.range + self.target_scale.min
    }
}

/// Epsilon-insensitive support vector regression trained by sequential
/// minimal optimization with second-order working-set selection.
///
/// The dual is solved over `2n` variables `[alpha; alpha*]` in the usual
/// single-constraint form `min 0.5 b'Qb + p'b`, `z'b = 0`, `0 <= b <= C`.
pub fn fit_smoreg(train: &[Instance], hp: &SvrParams) -> Result<SvrModel> {
    hp.validate()?;
    let d = check_training_set(train, 1)?;
    let n = train.len();
    let (input_scale, target_scale) = if hp.normalize {
        (
            (0..d).map(|j| UnitScale::fit(train.iter().map(|i| i.x[j]))).collect(),
            UnitScale::fit(train.iter().map(|i| i.y)),
        )
    } else {
        (vec![UnitScale::IDENTITY; d], UnitScale::IDENTITY)
    };
    let inputs: Vec<Vec<f64>> = train
        .iter()
        .map(|i| i.x.iter().zip(&input_scale).map(|(v, s)| s.apply(*v)).collect())
        .collect();
    let ys: Vec<f64> = train.iter().map(|i| target_scale.apply(i.y)).collect();

    let k: Vec<Vec<f64>> = inputs
        .iter()
        .map(|a| inputs.iter().map(|b| hp.kernel.eval(a, b)).collect())
        .collect();
    let l = 2 * n;
    let z = |t: usize| if t < n { 1.0 } else { -1.0 };
    let kk = |s: usize, t: usize| k[s % n][t % n];
    let q = |s: usize, t: usize| z(s) * z(t) * kk(s, t);
    let c = hp.c;

    let mut beta = vec![0.0f64; l];
    let mut grad: Vec<f64> = (0..l)
        .map(|t| if t < n { hp.epsilon - ys[t] } else { hp.epsilon + ys[t - n] })
        .collect();
    let upper = |b: f64| b >= c;
    let lower = |b: f64| b <= 0.0;

    let mut iterations = 0;
    loop {
        // Working-set selection.
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..l {
            if z(t) > 0.0 {
                if !upper(beta[t]) && -grad[t] >= gmax {
                    gmax = -grad[t];
                    i_sel = Some(t);
                }
            } else if !lower(beta[t]) && grad[t] >= gmax {
                gmax = grad[t];
                i_sel = Some(t);
            }
        }
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j_sel = None;
        if let Some(i) = i_sel {
            let mut obj_min = f64::INFINITY;
            for t in 0..l {
                let (grad_diff, quad) = if z(t) > 0.0 {
                    if lower(beta[t]) {
                        continue;
                    }
                    gmax2 = gmax2.max(grad[t]);
                    (gmax + grad[t], q(i, i) + q(t, t) - 2.0 * z(i) * q(i, t))
                } else {
                    if upper(beta[t]) {
                        continue;
                    }
                    gmax2 = gmax2.max(-grad[t]);
                    (gmax - grad[t], q(i, i) + q(t, t) + 2.0 * z(i) * q(i, t))
                };
                if grad_diff > 0.0 {
                    let obj = -(grad_diff * grad_diff) / if quad > 0.0 { quad } else { TAU };
                    if obj <= obj_min {
                        obj_min = obj;
                        j_sel = Some(t);
                    }
                }
            }
        }
        let (Some(i), Some(j)) = (i_sel, j_sel) else {
            break;
        };
        if gmax + gmax2 < hp.tolerance {
            break;
        }
        if iterations >= hp.max_iter {
            return Err(Error::Model(format!(
                "smoreg: no convergence after {iterations} iterations (violation {})",
                gmax + gmax2
            )));
        }
        iterations += 1;

        let (old_i, old_j) = (beta[i], beta[j]);
        if z(i) != z(j) {
            let quad = (q(i, i) + q(j, j) + 2.0 * q(i, j)).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = beta[i] - beta[j];
            beta[i] += delta;
            beta[j] += delta;
            if diff > 0.0 {
                if beta[j] < 0.0 {
                    beta[j] = 0.0;
                    beta[i] = diff;
                }
            } else if beta[i] < 0.0 {
                beta[i] = 0.0;
                beta[j] = -diff;
            }
            if diff > 0.0 {
                if beta[i] > c {
                    beta[i] = c;
                    beta[j] = c - diff;
                }
            } else if beta[j] > c {
                beta[j] = c;
                beta[i] = c + diff;
            }
        } else {
            let quad = (q(i, i) + q(j, j) - 2.0 * q(i, j)).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = beta[i] + beta[j];
            beta[i] -= delta;
            beta[j] += delta;
            if sum > c {
                if beta[i] > c {
                    beta[i] = c;
                    beta[j] = sum - c;
                }
            } else if beta[j] < 0.0 {
                beta[j] = 0.0;
                beta[i] = sum;
            }
            if sum > c {
                if beta[j] > c {
                    beta[j] = c;
                    beta[i] = sum - c;
                }
            } else if beta[i] < 0.0 {
                beta[i] = 0.0;
                beta[j] = sum;
            }
        }
        let (di, dj) = (beta[i] - old_i, beta[j] - old_j);
        for (t, g) in grad.iter_mut().enumerate() {
            *g += q(i, t) * di + q(j, t) * dj;
        }
    }

    // Bias from free variables, else the midpoint of the feasible interval.
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut n_free, mut sum_free) = (0usize, 0.0);
    for t in 0..l {
        let yg = z(t) * grad[t];
        if upper(beta[t]) {
            if z(t) < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if lower(beta[t]) {
            if z(t) > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 { sum_free / n_free as f64 } else { (ub + lb) / 2.0 };

    let model = SvrModel {
        kernel: hp.kernel,
        inputs,
        alpha: beta[..n].to_vec(),
        alpha_star: beta[n..].to_vec(),
        bias: -rho,
        input_scale,
        target_scale,
        iterations,
    };
    check_duals(&model, c)?;
    Ok(model)
}

fn check_duals(m: &SvrModel, c: f64) -> Result<()> {
    let in_box = m.alpha.iter().chain(&m.alpha_star).all(|&a| (0.0..=c).contains(&a));
    let balance: f64 = m.alpha.iter().zip(&m.alpha_star).map(|(a, s)| a - s).sum();
    if !in_box || balance.abs() > 1e-9 * c.max(1.0) * m.alpha.len() as f64 {
        return Err(Error::Model(format!(
            "smoreg: dual constraints violated (box ok: {in_box}, sum {balance})"
        )));
    }
    Ok(())
}
