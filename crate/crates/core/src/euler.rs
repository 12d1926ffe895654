//! Explicit Euler stepping of the moment system, used as the baseline the
//! closed forms are benchmarked against.

use std::hint::black_box;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::engine::{
    transient_vector, CoefficientSystem, InitialMomentVector, MomentTime, MomentVector,
    OVERFLOW_MAGNITUDE,
};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EulerConfig {
    pub delta: f64,
    pub horizon: f64,
}

impl EulerConfig {
    pub fn new(delta: f64, horizon: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "step must be positive, got {delta}"
            )));
        }
        if !(horizon >= 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "horizon must be finite and nonnegative, got {horizon}"
            )));
        }
        Ok(Self { delta, horizon })
    }

    /// `round(t / Δ)`.
    pub fn steps(&self) -> u64 {
        (self.horizon / self.delta).round() as u64
    }

    /// `t - steps·Δ`, at most `Δ/2` in magnitude.
    pub fn remainder(&self) -> f64 {
        self.horizon - self.steps() as f64 * self.delta
    }
}

/// Iterates `s <- s + Δ(Θ s + θ₀)` from the initial powers.
///
/// Rows are updated bottom-up in place: row `k` only reads entries `j <= k`,
/// which still hold the previous iterate.
pub fn euler_solve(
    system: &CoefficientSystem,
    init: &InitialMomentVector,
    cfg: &EulerConfig,
) -> Result<MomentVector> {
    let n = system.order();
    if init.order() < n {
        return Err(Error::InvalidDimension {
            expected: n,
            found: init.order(),
        });
    }
    let theta = system.theta();
    let theta0 = system.theta0();
    let delta = cfg.delta;
    let mut s = init.powers()[..n].to_vec();
    for step in 0..cfg.steps() {
        let mut largest = 0.0f64;
        for k in (0..n).rev() {
            let row = theta.row(k);
            let mut d = theta0[k];
            for (c, v) in row.iter().zip(&s) {
                d += c * v;
            }
            s[k] += delta * d;
            largest = largest.max(s[k].abs());
        }
        if !(largest <= OVERFLOW_MAGNITUDE) {
            return Err(Error::Overflow(format!(
                "Euler iterate exceeded {OVERFLOW_MAGNITUDE:e} after {} steps of size {delta}",
                step + 1
            )));
        }
    }
    Ok(MomentVector {
        time: MomentTime::At(cfg.horizon),
        values: s,
    })
}

/// Componentwise `|m_D - m_M|` and `|m_D - m_M| / |m_M|`.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorMetrics {
    pub abs: Vec<f64>,
    /// `None` where the reference value is zero.
    pub rel: Vec<Option<f64>>,
}

pub fn error_metrics(approx: &MomentVector, exact: &MomentVector) -> Result<ErrorMetrics> {
    if approx.order() != exact.order() {
        return Err(Error::InvalidDimension {
            expected: exact.order(),
            found: approx.order(),
        });
    }
    let abs: Vec<f64> = approx
        .values
        .iter()
        .zip(&exact.values)
        .map(|(d, m)| (d - m).abs())
        .collect();
    let rel = abs
        .iter()
        .zip(&exact.values)
        .map(|(a, m)| (*m != 0.0).then(|| a / m.abs()))
        .collect();
    Ok(ErrorMetrics { abs, rel })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    Euler,
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::ClosedForm => "closed-form",
            Method::Euler => "euler",
        }
    }
}

/// One row of a benchmark: timing over `trials` runs and the error of the
/// `order`-th moment against the closed form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub method: Method,
    pub delta: Option<f64>,
    pub run_time_seconds: f64,
    pub median_run_time_seconds: f64,
    pub abs_error: f64,
    pub rel_error: Option<f64>,
    pub order: usize,
    pub trials: usize,
    pub steps: Option<u64>,
    /// `t - steps·Δ` for Euler rows.
    pub remainder: Option<f64>,
}

fn mean_and_median(mut samples: Vec<Duration>) -> (f64, f64) {
    samples.sort();
    let secs: Vec<f64> = samples.iter().map(Duration::as_secs_f64).collect();
    let mean = secs.iter().sum::<f64>() / secs.len() as f64;
    let mid = secs.len() / 2;
    let median = if secs.len().is_multiple_of(2) {
        0.5 * (secs[mid - 1] + secs[mid])
    } else {
        secs[mid]
    };
    (mean, median)
}

fn timed<T>(trials: usize, mut f: impl FnMut() -> Result<T>) -> Result<(T, Vec<Duration>)> {
    let mut times = Vec::with_capacity(trials);
    let mut last = None;
    for _ in 0..trials {
        let start = Instant::now();
        let out = black_box(f()?);
        times.push(start.elapsed());
        last = Some(out);
    }
    Ok((last.expect("at least one trial"), times))
}

/// Times the closed form and Euler at each step size, `trials` runs each.
/// Only the solves are timed; `system` is built by the caller. The first
/// record is the closed form, followed by one Euler record per entry of
/// `deltas`.
pub fn bench(
    system: &CoefficientSystem,
    init: &InitialMomentVector,
    t: f64,
    n: usize,
    deltas: &[f64],
    trials: usize,
) -> Result<Vec<BenchRecord>> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".to_string()));
    }
    if n == 0 || n > system.order() {
        return Err(Error::InvalidDimension {
            expected: system.order(),
            found: n,
        });
    }
    let system = system.leading(n);
    let configs = deltas
        .iter()
        .map(|&d| EulerConfig::new(d, t))
        .collect::<Result<Vec<_>>>()?;

    let (exact, times) = timed(trials, || transient_vector(&system, init, t))?;
    let (mean, median) = mean_and_median(times);
    let reference = exact.moment(n);
    let mut records = vec![BenchRecord {
        method: Method::ClosedForm,
        delta: None,
        run_time_seconds: mean,
        median_run_time_seconds: median,
        abs_error: 0.0,
        rel_error: Some(0.0),
        order: n,
        trials,
        steps: None,
        remainder: None,
    }];

    for cfg in configs {
        let (approx, times) = timed(trials, || euler_solve(&system, init, &cfg))?;
        let (mean, median) = mean_and_median(times);
        let abs_error = (approx.moment(n) - reference).abs();
        records.push(BenchRecord {
            method: Method::Euler,
            delta: Some(cfg.delta),
            run_time_seconds: mean,
            median_run_time_seconds: median,
            abs_error,
            rel_error: (reference != 0.0).then(|| abs_error / reference.abs()),
            order: n,
            trials,
            steps: Some(cfg.steps()),
            remainder: Some(cfg.remainder()),
        });
    }
    Ok(records)
}
