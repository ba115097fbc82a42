//! The five learners: Gaussian process, linear regression, multilayer
//! perceptron, SMO-trained support vector regression and random forest.
//!
//! Every learner fits on a slice of [`Instance`]s and predicts a real value.
//! Sign targets are treated as ordinary numeric targets.

mod forest;
mod gp;
mod linear;
mod mlp;
mod svr;

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use forest::{fit_rf, Forest, MaxFeatures, RfParams, Tree};
pub use gp::{fit_gp, GpModel, GpParams};
pub use linear::{fit_lr, LinearModel, LrParams};
pub use mlp::{fit_mlp, MlpModel, MlpParams, Network};
pub use svr::{fit_smoreg, SvrModel, SvrParams};

use crate::dataset::Instance;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "GP")]
    Gp,
    #[serde(rename = "LR")]
    Lr,
    #[serde(rename = "MLP")]
    Mlp,
    #[serde(rename = "SMOREG")]
    SmoReg,
    #[serde(rename = "RF")]
    Rf,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Gp,
        ModelKind::Lr,
        ModelKind::Mlp,
        ModelKind::SmoReg,
        ModelKind::Rf,
    ];

    /// Column heading used in reports.
    pub fn label(&self) -> &'static str {
        match self {
            Self::Gp => "GPs",
            Self::Lr => "LR",
            Self::Mlp => "MLP",
            Self::SmoReg => "SMOreg",
            Self::Rf => "RF",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "GP" | "GPS" => Some(Self::Gp),
            "LR" => Some(Self::Lr),
            "MLP" => Some(Self::Mlp),
            "SMOREG" | "SVR" => Some(Self::SmoReg),
            "RF" => Some(Self::Rf),
            _ => None,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Kernel functions shared by the GP and SVR learners.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Kernel {
    Linear,
    /// `(x . y + coef0)^degree`
    Poly { degree: u32, coef0: f64 },
    /// `exp(-|x - y|^2 / (2 l^2))`
    Rbf { length_scale: f64 },
}

impl Kernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => dot(a, b),
            Kernel::Poly { degree, coef0 } => (dot(a, b) + coef0).powi(degree as i32),
            Kernel::Rbf { length_scale } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-d2 / (2.0 * length_scale * length_scale)).exp()
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Kernel::Rbf { length_scale } if !(length_scale > 0.0) => Err(Error::Config(format!(
                "kernel length_scale must be > 0, got {length_scale}"
            ))),
            Kernel::Poly { degree: 0, .. } => Err(Error::Config("kernel degree must be >= 1".into())),
            _ => Ok(()),
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Per-learner hyperparameters.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparams {
    pub gp: GpParams,
    pub lr: LrParams,
    pub mlp: MlpParams,
    pub smoreg: SvrParams,
    pub rf: RfParams,
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        self.gp.validate()?;
        self.lr.validate()?;
        self.mlp.validate()?;
        self.smoreg.validate()?;
        self.rf.validate()
    }

    /// Copy with the seeded learners reseeded.
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut hp = self.clone();
        hp.mlp.seed = seed;
        hp.rf.seed = seed;
        hp
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params")]
pub enum TrainedModel {
    #[serde(rename = "GP")]
    Gp(GpModel),
    #[serde(rename = "LR")]
    Lr(LinearModel),
    #[serde(rename = "MLP")]
    Mlp(MlpModel),
    #[serde(rename = "SMOREG")]
    SmoReg(SvrModel),
    #[serde(rename = "RF")]
    Rf(Forest),
}

pub(crate) fn check_training_set(train: &[Instance], min: usize) -> Result<usize> {
    if train.len() < min {
        return Err(Error::Model(format!(
            "need at least {min} training instances, got {}",
            train.len()
        )));
    }
    let d = train[0].x.len();
    for inst in train {
        if inst.x.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: inst.x.len(),
            });
        }
        if !inst.y.is_finite() || inst.x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Model(format!(
                "non-finite value in training instance {}",
                inst.base_date
            )));
        }
    }
    Ok(d)
}

/// Fits one learner. `sign_targets` marks a classification dataset; it only
/// affects the random forest's default feature sampling.
pub fn fit(kind: ModelKind, train: &[Instance], hp: &Hyperparams, sign_targets: bool) -> Result<TrainedModel> {
    Ok(match kind {
        ModelKind::Gp => TrainedModel::Gp(fit_gp(train, &hp.gp)?),
        ModelKind::Lr => TrainedModel::Lr(fit_lr(train, &hp.lr)?),
        ModelKind::Mlp => TrainedModel::Mlp(fit_mlp(train, &hp.mlp)?),
        ModelKind::SmoReg => TrainedModel::SmoReg(fit_smoreg(train, &hp.smoreg)?),
        ModelKind::Rf => TrainedModel::Rf(fit_rf(train, &hp.rf, sign_targets)?),
    })
}

const FORMAT_NAME: &str = "newsstock-model";
const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Envelope {
    format: String,
    version: u32,
    model: TrainedModel,
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            Self::Gp(_) => ModelKind::Gp,
            Self::Lr(_) => ModelKind::Lr,
            Self::Mlp(_) => ModelKind::Mlp,
            Self::SmoReg(_) => ModelKind::SmoReg,
            Self::Rf(_) => ModelKind::Rf,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            Self::Gp(m) => m.n_features(),
            Self::Lr(m) => m.weights.len(),
            Self::Mlp(m) => m.n_features(),
            Self::SmoReg(m) => m.n_features(),
            Self::Rf(m) => m.n_features,
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                got: x.len(),
            });
        }
        Ok(match self {
            Self::Gp(m) => m.predict(x),
            Self::Lr(m) => m.predict(x),
            Self::Mlp(m) => m.predict(x),
            Self::SmoReg(m) => m.predict(x),
            Self::Rf(m) => m.predict(x),
        })
    }

    pub fn predict_all(&self, xs: &[Instance]) -> Result<Vec<f64>> {
        xs.iter().map(|i| self.predict(&i.x)).collect()
    }

    /// Self-describing JSON: `{"format", "version", "model": {"kind", "params"}}`.
    /// Floats are written with round-trip precision.
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(&Envelope {
            format: FORMAT_NAME.into(),
            version: FORMAT_VERSION,
            model: self.clone(),
        })
        .map_err(|e| Error::Model(format!("serialize: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let env: Envelope =
            serde_json::from_str(text).map_err(|e| Error::Model(format!("deserialize: {e}")))?;
        if env.format != FORMAT_NAME {
            return Err(Error::Model(format!("not a model file: format {:?}", env.format)));
        }
        if env.version != FORMAT_VERSION {
            return Err(Error::Model(format!(
                "unsupported model format version {} (expected {FORMAT_VERSION})",
                env.version
            )));
        }
        Ok(env.model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
pub(crate) mod testutil {
    use crate::dataset::Instance;
    use chrono::NaiveDate;

    pub fn instances(xs: &[Vec<f64>], ys: &[f64]) -> Vec<Instance> {
        xs.iter()
            .zip(ys)
            .enumerate()
            .map(|(i, (x, &y))| Instance {
                base_date: NaiveDate::from_ymd_opt(2019, 1, 1).unwrap() + chrono::Days::new(i as u64),
                x: x.clone(),
                y,
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::testutil::instances;
    use super::*;

    fn data() -> Vec<Instance> {
        let xs: Vec<Vec<f64>> = (0..12)
            .map(|i| vec![(i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()])
            .collect();
        let ys: Vec<f64> = xs.iter().map(|x| x[0] - 0.5 * x[1]).collect();
        instances(&xs, &ys)
    }

    #[test]
    fn persistence_round_trip_is_bit_exact() {
        let train = data();
        let hp = Hyperparams::default();
        let dir = tempfile::tempdir().unwrap();
        for kind in ModelKind::ALL {
            let m = fit(kind, &train, &hp, false).unwrap();
            let path = dir.path().join(format!("{kind}.json"));
            m.save(&path).unwrap();
            let back = TrainedModel::load(&path).unwrap();
            assert_eq!(back.kind(), kind);
            for inst in &train {
                let (a, b) = (m.predict(&inst.x).unwrap(), back.predict(&inst.x).unwrap());
                assert_eq!(a.to_bits(), b.to_bits(), "{kind}");
            }
        }
    }

    #[test]
    fn wrong_length_rejected() {
        let m = fit(ModelKind::Lr, &data(), &Hyperparams::default(), false).unwrap();
        assert!(matches!(m.predict(&[1.0]), Err(Error::DimensionMismatch { expected: 2, got: 1 })));
    }

    #[test]
    fn rejects_foreign_files() {
        assert!(TrainedModel::from_json(r#"{"format":"x","version":1,"model":null}"#).is_err());
        let m = fit(ModelKind::Lr, &data(), &Hyperparams::default(), false).unwrap();
        let text = m.to_json().unwrap().replace("\"version\":1", "\"version\":99");
        assert!(TrainedModel::from_json(&text).unwrap_err().to_string().contains("version"));
    }

    #[test]
    fn kinds_parse() {
        for k in ModelKind::ALL {
            assert_eq!(ModelKind::parse(k.label()), Some(k));
        }
    }

    #[test]
    fn kernels() {
        assert_eq!(Kernel::Linear.eval(&[1.0, 2.0], &[3.0, 4.0]), 11.0);
        assert_eq!(Kernel::Poly { degree: 2, coef0: 1.0 }.eval(&[1.0], &[2.0]), 9.0);
        assert_eq!(Kernel::Rbf { length_scale: 1.0 }.eval(&[0.0], &[0.0]), 1.0);
        assert!((Kernel::Rbf { length_scale: 1.0 }.eval(&[0.0], &[1.0]) - (-0.5f64).exp()).abs() < 1e-15);
    }
}
