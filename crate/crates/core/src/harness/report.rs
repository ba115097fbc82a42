use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Cell, CellOutcome};
use crate::dataset::{DatasetInputs, DatasetOptions, Direction, MarketSeries, TaskKind, WindowSpec};
use crate::error::Result;
use crate::models::ModelKind;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CellValue {
    Value(f64),
    Undefined,
    Error,
}

impl CellValue {
    fn of(cell: &Cell) -> Self {
        match &cell.outcome {
            CellOutcome::Done(r) => r.correlation.map_or(CellValue::Undefined, CellValue::Value),
            CellOutcome::Failed(_) => CellValue::Error,
        }
    }

    fn text(&self) -> String {
        match self {
            CellValue::Value(v) => format!("{v:.3}"),
            CellValue::Undefined => "UNDEF".into(),
            CellValue::Error => "ERROR".into(),
        }
    }

    fn csv(&self) -> String {
        match self {
            CellValue::Value(v) => v.to_string(),
            CellValue::Undefined => "UNDEFINED".into(),
            CellValue::Error => "ERROR".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub task: TaskKind,
    pub window: WindowSpec,
    pub direction: Direction,
    pub market: String,
    /// One entry per report model column.
    pub values: Vec<CellValue>,
    pub n_test: Vec<Option<usize>>,
    /// Mean of the defined values.
    pub average: Option<f64>,
}

impl ReportRow {
    pub fn undefined(&self) -> usize {
        self.values.iter().filter(|v| matches!(v, CellValue::Undefined)).count()
    }

    pub fn errors(&self) -> usize {
        self.values.iter().filter(|v| matches!(v, CellValue::Error)).count()
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Grid results arranged as rows of (task, window, direction, market) with
/// one column per model plus the row average.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportTable {
    pub models: Vec<ModelKind>,
    pub cells: Vec<Cell>,
    pub rows: Vec<ReportRow>,
}

impl ReportTable {
    /// `cells` must already be in report order.
    pub fn assemble(models: Vec<ModelKind>, cells: Vec<Cell>) -> Self {
        let mut rows: Vec<ReportRow> = Vec::new();
        for cell in &cells {
            let c = &cell.config;
            let same = rows.last().is_some_and(|r| {
                r.task == c.task && r.window == c.window && r.direction == c.direction && r.market == c.market
            });
            if !same {
                rows.push(ReportRow {
                    task: c.task,
                    window: c.window,
                    direction: c.direction,
                    market: c.market.clone(),
                    values: vec![CellValue::Error; models.len()],
                    n_test: vec![None; models.len()],
                    average: None,
                });
            }
            let row = rows.last_mut().expect("row pushed above");
            if let Some(k) = models.iter().position(|m| *m == c.model) {
                row.values[k] = CellValue::of(cell);
                if let CellOutcome::Done(r) = &cell.outcome {
                    row.n_test[k] = Some(r.n_test);
                }
            }
        }
        for row in &mut rows {
            row.average = mean(row.values.iter().filter_map(|v| match v {
                CellValue::Value(x) => Some(*x),
                _ => None,
            }));
        }
        Self { models, cells, rows }
    }

    /// Mean correlation over defined cells matching `keep`.
    pub fn mean_where(&self, keep: impl Fn(&Cell) -> bool) -> Option<f64> {
        mean(self.cells.iter().filter(|c| keep(c)).filter_map(Cell::correlation))
    }

    pub fn grand_average(&self) -> Option<f64> {
        self.mean_where(|_| true)
    }

    /// Grand average per window, in first-appearance order.
    pub fn window_averages(&self) -> Vec<(WindowSpec, Option<f64>)> {
        let mut windows: Vec<WindowSpec> = Vec::new();
        for c in &self.cells {
            if !windows.contains(&c.config.window) {
                windows.push(c.config.window);
            }
        }
        windows
            .into_iter()
            .map(|w| (w, self.mean_where(|c| c.config.window == w)))
            .collect()
    }

    pub fn undefined_count(&self) -> usize {
        self.rows.iter().map(ReportRow::undefined).sum()
    }

    pub fn error_count(&self) -> usize {
        self.rows.iter().map(ReportRow::errors).sum()
    }

    pub fn render_text(&self) -> String {
        let mut header: Vec<String> = ["Task", "Window", "Direction", "Market"].map(String::from).to_vec();
        header.extend(self.models.iter().map(|m| m.label().to_string()));
        header.push("Average".into());
        let mut body: Vec<Vec<String>> = Vec::new();
        let mut last: Option<(TaskKind, WindowSpec, Direction)> = None;
        for r in &self.rows {
            let key = (r.task, r.window, r.direction);
            let shown = |same: bool, s: String| if same { String::new() } else { s };
            let (t, w, d) = match last {
                Some((lt, lw, ld)) => (lt == r.task, lt == r.task && lw == r.window, key == (lt, lw, ld)),
                None => (false, false, false),
            };
            let mut line = vec![
                shown(t, r.task.to_string()),
                shown(w, r.window.to_string()),
                shown(d, r.direction.to_string()),
                r.market.clone(),
            ];
            line.extend(r.values.iter().map(CellValue::text));
            let mut avg = r.average.map_or("n/a".into(), |a| format!("{a:.3}"));
            if r.undefined() > 0 {
                avg.push('*');
            }
            line.push(avg);
            body.push(line);
            last = Some(key);
        }
        let widths: Vec<usize> = (0..header.len())
            .map(|k| body.iter().map(|l| l[k].len()).chain([header[k].len()]).max().unwrap_or(0))
            .collect();
        let fmt_line = |cols: &[String]| {
            cols.iter()
                .enumerate()
                .map(|(k, c)| if k < 4 { format!("{c:<w$}", w = widths[k]) } else { format!("{c:>w$}", w = widths[k]) })
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        let mut out = String::new();
        let head = fmt_line(&header);
        let _ = writeln!(out, "{head}");
        let _ = writeln!(out, "{}", "-".repeat(head.len()));
        for l in &body {
            let _ = writeln!(out, "{}", fmt_line(l));
        }
        let _ = writeln!(out);
        for (w, avg) in self.window_averages() {
            let _ = writeln!(
                out,
                "Grand average [{w}]: {}",
                avg.map_or("n/a".into(), |a| format!("{a:.3}"))
            );
        }
        if self.undefined_count() > 0 {
            let _ = writeln!(
                out,
                "* {} UNDEFINED cell(s) (constant test series) excluded from averages",
                self.undefined_count()
            );
        }
        if self.error_count() > 0 {
            let _ = writeln!(out, "{} cell(s) failed with ERROR", self.error_count());
        }
        out
    }

    /// `task,window,direction,market,model,correlation,n_test`, one line per
    /// cell plus an `Average` line per row.
    pub fn render_csv(&self) -> String {
        let mut out = String::from("task,window,direction,market,model,correlation,n_test\n");
        for r in &self.rows {
            let prefix = format!("{},{},{},{}", r.task, r.window, r.direction, csv_field(&r.market));
            for ((m, v), n) in self.models.iter().zip(&r.values).zip(&r.n_test) {
                let _ = writeln!(
                    out,
                    "{prefix},{},{},{}",
                    m.label(),
                    v.csv(),
                    n.map_or(String::new(), |n| n.to_string())
                );
            }
            let _ = writeln!(
                out,
                "{prefix},Average,{},",
                r.average.map_or("UNDEFINED".into(), |a| a.to_string())
            );
        }
        out
    }

    /// Per-cell diagnostics, including classification accuracy and errors.
    pub fn render_cells_csv(&self) -> String {
        let mut out = String::from(
            "task,window,direction,market,model,include_aux,seed,correlation,n_test,accuracy,error\n",
        );
        for c in &self.cells {
            let k = &c.config;
            let (corr, n, acc, err) = match &c.outcome {
                CellOutcome::Done(r) => (
                    r.correlation.map_or("UNDEFINED".into(), |v| v.to_string()),
                    r.n_test.to_string(),
                    r.accuracy.map_or(String::new(), |a| a.to_string()),
                    String::new(),
                ),
                CellOutcome::Failed(e) => ("ERROR".into(), String::new(), String::new(), csv_field(e)),
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{corr},{n},{acc},{err}",
                k.task,
                k.window,
                k.direction,
                csv_field(&k.market),
                k.model.label(),
                k.include_aux,
                k.seed
            );
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// `date,stock_normalized,sentiment_normalized` for comparing the two curves.
pub fn plot_csv(series: &MarketSeries, opts: &DatasetOptions) -> Result<String> {
    let inp = DatasetInputs::from_series(series, opts)?;
    let mut out = String::from("date,stock_normalized,sentiment_normalized\n");
    for (s, t) in inp.stock.iter().zip(&inp.sentiment) {
        let _ = writeln!(out, "{},{},{}", s.date, s.normalized, t.normalized);
    }
    Ok(out)
}
