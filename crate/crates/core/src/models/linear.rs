use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{check_training_set, dot};
use crate::dataset::Instance;
use crate::error::{Error, Result};

/// Ridge used when the normal equations are singular.
const FALLBACK_RIDGE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LrParams {
    pub ridge: f64,
}

impl Default for LrParams {
    fn default() -> Self {
        Self { ridge: 0.0 }
    }
}

impl LrParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return Err(Error::Config(format!("lr.ridge must be >= 0, got {}", self.ridge)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
}

impl LinearModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.intercept
    }
}

/// Solves `A w = b` for symmetric `A`, refusing (near-)singular systems.
pub(crate) fn solve_spd(a: DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let scale = a.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let chol = a.cholesky()?;
    let l = chol.l_dirty();
    let min_pivot = l.diagonal().iter().fold(f64::INFINITY, |m, v| m.min(v * v));
    if !(min_pivot > 1e-12 * scale.max(f64::MIN_POSITIVE)) {
        return None;
    }
    let w = chol.solve(b);
    w.iter().all(|v| v.is_finite()).then_some(w)
}

/// Least squares with an optional ridge penalty on the weights (never the
/// intercept). Inputs and target are centered, so the intercept is
/// `mean(y) - w . mean(x)`.
pub fn fit_lr(train: &[Instance], hp: &LrParams) -> Result<LinearModel> {
    hp.validate()?;
    let d = check_training_set(train, 2)?;
    let n = train.len();
    let mean_x: Vec<f64> = (0..d)
        .map(|j| train.iter().map(|i| i.x[j]).sum::<f64>() / n as f64)
        .collect();
    let mean_y = train.iter().map(|i| i.y).sum::<f64>() / n as f64;
    let xc = DMatrix::from_fn(n, d, |r, c| train[r].x[c] - mean_x[c]);
    let yc = DVector::from_iterator(n, train.iter().map(|i| i.y - mean_y));
    let xtx = xc.transpose() * &xc;
    let xty = xc.transpose() * yc;

    let with_ridge = |lambda: f64| {
        let mut a = xtx.clone();
        for k in 0..d {
            a[(k, k)] += lambda;
        }
        solve_spd(a, &xty)
    };
    let w = with_ridge(hp.ridge)
        .or_else(|| with_ridge(hp.ridge + FALLBACK_RIDGE))
        .or_else(|| {
            // Zero-variance columns leave XtX with zero rows: drop them.
            let live: Vec<usize> = (0..d).filter(|&k| xtx[(k, k)] > 0.0).collect();
            if live.is_empty() {
                return Some(DVector::zeros(d));
            }
            let a = DMatrix::from_fn(live.len(), live.len(), |r, c| {
                xtx[(live[r], live[c])] + if r == c { hp.ridge + FALLBACK_RIDGE } else { 0.0 }
            });
            let b = DVector::from_iterator(live.len(), live.iter().map(|&k| xty[k]));
            let sub = solve_spd(a, &b)?;
            let mut w = DVector::zeros(d);
            for (&k, v) in live.iter().zip(sub.iter()) {
                w[k] = *v;
            }
            Some(w)
        })
        .ok_or_else(|| Error::Model("linear regression: normal equations are singular".into()))?;
    let weights: Vec<f64> = w.iter().copied().collect();
    Ok(LinearModel {
        intercept: mean_y - dot(&weights, &mean_x),
        weights,
    })
}

#[cfg(test)]
mod tests {
    use super::super::testutil::instances;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn affine_fit() {
        let xs: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64 * 0.5]).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x[0] + 1.0).collect();
        let m = fit_lr(&instances(&xs, &ys), &LrParams::default()).unwrap();
        assert!((m.weights[0] - 2.0).abs() < 1e-6 && (m.intercept - 1.0).abs() < 1e-6);
        assert_eq!(LinearModel { weights: vec![2.0], intercept: 1.0 }.predict(&[3.0]), 7.0);
    }

    #[test]
    fn constant_target() {
        let xs: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let m = fit_lr(&instances(&xs, &[4.0; 6]), &LrParams::default()).unwrap();
        assert!(m.weights.iter().all(|w| w.abs() < 1e-6));
        assert!((m.intercept - 4.0).abs() < 1e-9);
    }

    #[test]
    fn duplicate_column_and_constant_column() {
        let xs: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64, i as f64, 3.0]).collect();
        let ys: Vec<f64> = (0..8).map(|i| 3.0 * i as f64 - 2.0).collect();
        let m = fit_lr(&instances(&xs, &ys), &LrParams::default()).unwrap();
        assert!(m.weights.iter().all(|w| w.is_finite()));
        for (x, y) in xs.iter().zip(&ys) {
            assert!((m.predict(x) - y).abs() < 1e-4);
        }
    }

    #[test]
    fn too_few() {
        assert!(fit_lr(&instances(&[vec![1.0]], &[1.0]), &LrParams::default()).is_err());
    }

    // Gaussian elimination with partial pivoting on the augmented system
    // [X 1]^T [X 1] beta = [X 1]^T y.
    fn oracle(xs: &[Vec<f64>], ys: &[f64]) -> Vec<f64> {
        let d = xs[0].len() + 1;
        let row = |x: &Vec<f64>| {
            let mut r = x.clone();
            r.push(1.0);
            r
        };
        let mut a = vec![vec![0.0; d + 1]; d];
        for (x, &y) in xs.iter().zip(ys) {
            let r = row(x);
            for i in 0..d {
                for j in 0..d {
                    a[i][j] += r[i] * r[j];
                }
                a[i][d] += r[i] * y;
            }
        }
        for col in 0..d {
            let p = (col..d).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
            a.swap(col, p);
            for r in 0..d {
                if r != col {
                    let f = a[r][col] / a[col][col];
                    for c in col..=d {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
        (0..d).map(|i| a[i][d] / a[i][i]).collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]
        #[test]
        fn matches_normal_equations(
            d in 1usize..=5,
            n_extra in 2usize..25,
            seed in proptest::collection::vec(-1.0f64..1.0, 30 * 6),
        ) {
            let n = d + n_extra;
            let xs: Vec<Vec<f64>> = (0..n).map(|i| (0..d).map(|j| seed[i * 6 + j] * 3.0).collect()).collect();
            let ys: Vec<f64> = (0..n).map(|i| seed[i * 6 + 5] * 5.0 + xs[i].iter().sum::<f64>()).collect();
            let m = fit_lr(&instances(&xs, &ys), &LrParams::default()).unwrap();
            let beta = oracle(&xs, &ys);
            for j in 0..d {
                prop_assert!((m.weights[j] - beta[j]).abs() < 1e-8, "w{} {} vs {}", j, m.weights[j], beta[j]);
            }
            prop_assert!((m.intercept - beta[d]).abs() < 1e-8);
        }
    }
}
