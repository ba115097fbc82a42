use chrono::{Datelike, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::{MarketDay, MarketSeries};
use crate::error::{Error, Result};

/// Sentiment points per standard deviation of the driving signal.
pub const SYNTH_SCORE_SCALE: f64 = 10.0;

const DAILY_RETURN_SD: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub seed: u64,
    pub n_days: usize,
    /// Trading days between a stock move and the sentiment it drives.
    pub lag: usize,
    pub coupling: f64,
    pub noise_sd: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            seed: 1,
            n_days: 120,
            lag: 1,
            coupling: 0.9,
            noise_sd: 0.1,
        }
    }
}

fn next_weekday(mut d: NaiveDate) -> NaiveDate {
    while matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
        d = d.succ_opt().expect("date in range");
    }
    d
}

/// A market whose stock drives its news sentiment.
///
/// Closes follow a geometric random walk with daily percent changes
/// `r_t ~ N(0, 1)`. The daily sentiment score is
/// `round(10 * (coupling * r_{t-lag} + noise_sd * z_t))` with `z_t ~ N(0, 1)`,
/// so the score is a sign-consistent linear function of the stock change rate
/// `lag` days earlier. Volumes are log-normal and article counts uniform on
/// 5..=25, both independent of everything else. Dates are consecutive
/// weekdays from 2019-04-03.
pub fn gen_synthetic(p: &SynthParams) -> Result<MarketSeries> {
    if p.n_days <= p.lag + 10 {
        return Err(Error::Validation(format!(
            "n_days ({}) must exceed lag + 10 ({})",
            p.n_days,
            p.lag + 10
        )));
    }
    if !(p.noise_sd >= 0.0 && p.noise_sd.is_finite() && p.coupling.is_finite()) {
        return Err(Error::Validation("coupling and noise_sd must be finite, noise_sd >= 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let step = Normal::new(0.0, DAILY_RETURN_SD).expect("valid sd");
    let unit = Normal::new(0.0, 1.0).expect("valid sd");
    let volume = LogNormal::<f64>::new(13.8, 0.3).expect("valid sd");

    // The first `lag` returns precede the visible window.
    let returns: Vec<f64> = (0..p.n_days + p.lag).map(|_| step.sample(&mut rng)).collect();
    let mut date = next_weekday(NaiveDate::from_ymd_opt(2019, 4, 3).expect("valid date"));
    let mut close = 100.0;
    let mut days = Vec::with_capacity(p.n_days);
    for t in 0..p.n_days {
        let r = returns[t + p.lag];
        if t > 0 {
            close *= 1.0 + r / 100.0;
        }
        let driver = returns[t] / DAILY_RETURN_SD;
        let score = SYNTH_SCORE_SCALE * (p.coupling * driver + p.noise_sd * unit.sample(&mut rng));
        days.push(MarketDay {
            date,
            close,
            volume: volume.sample(&mut rng).round(),
            sentiment: score.round() as i64,
            article_count: rng.random_range(5..=25),
        });
        date = next_weekday(date.succ_opt().expect("date in range"));
    }
    Ok(MarketSeries {
        market: "synthetic".into(),
        days,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sentiment::change_rate;

    fn params(coupling: f64, noise_sd: f64) -> SynthParams {
        SynthParams {
            seed: 5,
            n_days: 60,
            lag: 1,
            coupling,
            noise_sd,
        }
    }

    #[test]
    fn deterministic_and_weekdays() {
        let a = gen_synthetic(&params(0.9, 0.1)).unwrap();
        assert_eq!(a, gen_synthetic(&params(0.9, 0.1)).unwrap());
        assert_eq!(a.days.len(), 60);
        assert!(a.days.iter().all(|d| !matches!(d.date.weekday(), Weekday::Sat | Weekday::Sun)));
        assert!(a.days.windows(2).all(|w| w[0].date < w[1].date));
        assert!(a.days.iter().all(|d| d.close > 0.0 && (5..=25).contains(&d.article_count)));
    }

    #[test]
    fn noiseless_sentiment_follows_prior_stock_change() {
        let s = gen_synthetic(&params(0.9, 0.0)).unwrap();
        for t in 2..s.days.len() {
            let stock_rate = change_rate(s.days[t - 2].close, s.days[t - 1].close);
            let expected = (SYNTH_SCORE_SCALE * 0.9 * stock_rate).round() as i64;
            assert!((s.days[t].sentiment - expected).abs() <= 1, "day {t}");
        }
    }

    #[test]
    fn zero_coupling_is_noise_only() {
        let s = gen_synthetic(&params(0.0, 0.1)).unwrap();
        assert!(s.days.iter().all(|d| d.sentiment.abs() <= 6));
    }

    #[test]
    fn rejects_short_series() {
        assert!(gen_synthetic(&SynthParams { n_days: 11, lag: 1, ..SynthParams::default() }).is_err());
    }
}
