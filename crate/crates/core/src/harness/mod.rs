//! Experiment grid, correlation evaluation, reports and synthetic data.

mod report;
mod synth;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use report::{plot_csv, ReportTable, ReportRow};
pub use synth::{gen_synthetic, SynthParams, SYNTH_SCORE_SCALE};

use crate::dataset::{
    build_dataset, split, DatasetInputs, DatasetOptions, Direction, MarketSeries, TaskKind, WindowSpec,
};
use crate::error::{Error, Result};
use crate::models::{fit, Hyperparams, ModelKind};

/// Sample Pearson correlation; `None` when either side has zero variance.
pub fn pearson(pred: &[f64], actual: &[f64]) -> Result<Option<f64>> {
    if pred.len() != actual.len() {
        return Err(Error::DimensionMismatch {
            expected: pred.len(),
            got: actual.len(),
        });
    }
    if pred.len() < 2 {
        return Err(Error::SeriesTooShort {
            needed: 2,
            got: pred.len(),
        });
    }
    let n = pred.len() as f64;
    let mp = pred.iter().sum::<f64>() / n;
    let ma = actual.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (p, a) in pred.iter().zip(actual) {
        let (dp, da) = (p - mp, a - ma);
        sxy += dp * da;
        sxx += dp * dp;
        syy += da * da;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(None);
    }
    Ok(Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub market: String,
    pub direction: Direction,
    pub task: TaskKind,
    pub window: WindowSpec,
    pub model: ModelKind,
    pub include_aux: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    /// `None` is UNDEFINED: predictions or targets were constant on the test split.
    pub correlation: Option<f64>,
    pub n_test: usize,
    /// Share of test instances whose prediction sign (zero counts as +1)
    /// matches the label; classification only.
    pub accuracy: Option<f64>,
}

/// Builds the dataset, fits on the chronological training prefix and
/// correlates raw test predictions with test targets.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    inputs: &DatasetInputs,
    hp: &Hyperparams,
    opts: &DatasetOptions,
) -> Result<ExperimentResult> {
    let ds = build_dataset(inputs, cfg.direction, cfg.task, cfg.window, cfg.include_aux, opts.zero_label)?;
    let (train, test) = split(&ds)?;
    let sign_targets = cfg.task == TaskKind::Classification;
    let model = fit(cfg.model, train, &hp.with_seed(cfg.seed), sign_targets)?;
    let pred = model.predict_all(test)?;
    let actual: Vec<f64> = test.iter().map(|i| i.y).collect();
    let correlation = if pred.len() >= 2 {
        pearson(&pred, &actual)?
    } else {
        None
    };
    let accuracy = sign_targets.then(|| {
        let hits = pred
            .iter()
            .zip(&actual)
            .filter(|(p, a)| (if **p < 0.0 { -1.0 } else { 1.0 }) == **a)
            .count();
        hits as f64 / actual.len() as f64
    });
    Ok(ExperimentResult {
        config: cfg.clone(),
        correlation,
        n_test: test.len(),
        accuracy,
    })
}

/// Which cells a grid run covers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    pub directions: Vec<Direction>,
    pub tasks: Vec<TaskKind>,
    pub windows: Vec<WindowSpec>,
    pub models: Vec<ModelKind>,
    pub include_aux: bool,
}

impl Default for GridSpec {
    /// Both directions and tasks, the widest-correlating lag window and the
    /// base-date window, all five models.
    fn default() -> Self {
        Self {
            directions: Direction::ALL.to_vec(),
            tasks: TaskKind::ALL.to_vec(),
            windows: vec![WindowSpec::new(5, true), WindowSpec::BASE_ONLY],
            models: ModelKind::ALL.to_vec(),
            include_aux: true,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.directions.is_empty() || self.tasks.is_empty() || self.windows.is_empty() || self.models.is_empty() {
            return Err(Error::Config("grid: directions, tasks, windows and models must be non-empty".into()));
        }
        Ok(())
    }

    /// Cells in report order: task, window, direction, market, then model.
    pub fn configs(&self, markets: &[String], seed: u64) -> Vec<ExperimentConfig> {
        let mut out = Vec::new();
        for &task in &self.tasks {
            for &window in &self.windows {
                for &direction in &self.directions {
                    for market in markets {
                        for &model in &self.models {
                            out.push(ExperimentConfig {
                                market: market.clone(),
                                direction,
                                task,
                                window,
                                model,
                                include_aux: self.include_aux,
                                seed,
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

/// Outcome of one grid cell. Errors stay inside their cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CellOutcome {
    Done(ExperimentResult),
    Failed(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub config: ExperimentConfig,
    pub outcome: CellOutcome,
}

impl Cell {
    pub fn correlation(&self) -> Option<f64> {
        match &self.outcome {
            CellOutcome::Done(r) => r.correlation,
            CellOutcome::Failed(_) => None,
        }
    }
}

/// Runs every cell of `grid` over `markets` (in parallel) and assembles the
/// report. Cell values do not depend on evaluation order.
pub fn run_grid(
    markets: &[MarketSeries],
    grid: &GridSpec,
    hp: &Hyperparams,
    opts: &DatasetOptions,
    seed: u64,
) -> Result<ReportTable> {
    grid.validate()?;
    let inputs: BTreeMap<&str, std::result::Result<DatasetInputs, String>> = markets
        .iter()
        .map(|m| {
            (
                m.market.as_str(),
                DatasetInputs::from_series(m, opts).map_err(|e| e.to_string()),
            )
        })
        .collect();
    if inputs.len() != markets.len() {
        return Err(Error::Config("grid: market names must be unique".into()));
    }
    let names: Vec<String> = markets.iter().map(|m| m.market.clone()).collect();
    let cells: Vec<Cell> = grid
        .configs(&names, seed)
        .into_par_iter()
        .map(|config| {
            let outcome = match &inputs[config.market.as_str()] {
                Ok(inp) => match run_experiment(&config, inp, hp, opts) {
                    Ok(r) => CellOutcome::Done(r),
                    Err(e) => CellOutcome::Failed(e.to_string()),
                },
                Err(e) => CellOutcome::Failed(e.clone()),
            };
            if let CellOutcome::Failed(msg) = &outcome {
                log::warn!(
                    "cell {} {} {} {} {} failed: {msg}",
                    config.task,
                    config.window,
                    config.direction,
                    config.market,
                    config.model
                );
            }
            Cell { config, outcome }
        })
        .collect();
    Ok(ReportTable::assemble(grid.models.clone(), cells))
}

/// The grid with and without the auxiliary volume / article-count features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ablation {
    pub with_aux: ReportTable,
    pub without_aux: ReportTable,
}

impl Ablation {
    /// Grand average with aux minus grand average without; `None` if either
    /// arm has no defined cell.
    pub fn difference(&self) -> Option<f64> {
        Some(self.with_aux.grand_average()? - self.without_aux.grand_average()?)
    }

    pub fn render_text(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.3}"));
        format!(
            "With auxiliary features\n{}\nWithout auxiliary features\n{}\nGrand average with aux: {}\nGrand average without aux: {}\nDifference: {}\n",
            self.with_aux.render_text(),
            self.without_aux.render_text(),
            fmt(self.with_aux.grand_average()),
            fmt(self.without_aux.grand_average()),
            fmt(self.difference()),
        )
    }
}

pub fn ablation(
    markets: &[MarketSeries],
    grid: &GridSpec,
    hp: &Hyperparams,
    opts: &DatasetOptions,
    seed: u64,
) -> Result<Ablation> {
    let with = GridSpec {
        include_aux: true,
        ..grid.clone()
    };
    let without = GridSpec {
        include_aux: false,
        ..grid.clone()
    };
    Ok(Ablation {
        with_aux: run_grid(markets, &with, hp, opts, seed)?,
        without_aux: run_grid(markets, &without, hp, opts, seed)?,
    })
}
