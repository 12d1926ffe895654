//! Monte Carlo estimates of the same moments, as an independent check on the
//! closed forms.
//!
//! Jump processes are simulated exactly, event by event. Diffusions use
//! Euler–Maruyama and carry an `O(Δ_sim)` weak bias.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Exp1, LogNormal, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::processes::{
    EphemeralSpec, GenericGeneratorSpec, GrowthCollapseSpec, HawkesSpec, ItoSpec, JumpMoments,
    ProcessSpec, ShotNoiseSpec,
};

pub const DEFAULT_DIFFUSION_STEP: f64 = 1e-3;

/// Relative standard errors above this are flagged as unreliable.
pub const HEAVY_TAIL_THRESHOLD: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimConfig {
    pub paths: usize,
    pub horizon: f64,
    pub seed: u64,
    /// Time step for diffusion paths.
    pub diffusion_step: f64,
}

impl SimConfig {
    pub fn new(paths: usize, horizon: f64, seed: u64) -> Self {
        Self {
            paths,
            horizon,
            seed,
            diffusion_step: DEFAULT_DIFFUSION_STEP,
        }
    }

    fn check(&self) -> Result<()> {
        if self.paths == 0 {
            return Err(Error::InvalidInput(
                "at least one path is required".to_string(),
            ));
        }
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "horizon must be finite and nonnegative, got {}",
                self.horizon
            )));
        }
        if !(self.diffusion_step > 0.0 && self.diffusion_step.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "diffusion step must be positive, got {}",
                self.diffusion_step
            )));
        }
        Ok(())
    }
}

/// A sampler for a [`JumpMoments`] law. Explicit moment lists have no law
/// attached and cannot be sampled.
#[derive(Clone, Copy, Debug)]
enum Sampler {
    Constant(f64),
    Exponential(Exp<f64>),
    LogNormal(LogNormal<f64>),
    Uniform,
}

impl Sampler {
    fn new(jumps: &JumpMoments, label: &str) -> Result<Self> {
        let bad =
            |e: &dyn std::fmt::Display| Error::InvalidInput(format!("{label} distribution: {e}"));
        match jumps {
            JumpMoments::Deterministic(c) => Ok(Sampler::Constant(*c)),
            JumpMoments::Exponential { rate } => Exp::new(*rate)
                .map(Sampler::Exponential)
                .map_err(|e| bad(&e)),
            JumpMoments::LogNormal { mu, sigma } => LogNormal::new(*mu, *sigma)
                .map(Sampler::LogNormal)
                .map_err(|e| bad(&e)),
            JumpMoments::Uniform => Ok(Sampler::Uniform),
            JumpMoments::Explicit(_) => Err(Error::InvalidInput(format!(
                "{label} distribution given only by its moments cannot be simulated"
            ))),
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Constant(c) => *c,
            Sampler::Exponential(d) => d.sample(rng),
            Sampler::LogNormal(d) => d.sample(rng),
            Sampler::Uniform => rng.random::<f64>(),
        }
    }
}

fn path_rng(seed: u64, path: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path as u64);
    rng
}

fn exp1<R: Rng>(rng: &mut R) -> f64 {
    rng.sample::<f64, _>(Exp1)
}

fn positive(value: f64, what: &str) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{what} must be positive for simulation, got {value}"
        )))
    }
}

/// Terminal values `X_t`, one per path, in path order. Path `i` draws from
/// its own ChaCha8 stream `i` under `cfg.seed`, so results do not depend on
/// how paths are scheduled across threads.
pub fn simulate(spec: &ProcessSpec, cfg: &SimConfig) -> Result<Vec<f64>> {
    cfg.check()?;
    let t = cfg.horizon;
    let seed = cfg.seed;
    let run = |f: &(dyn Fn(&mut ChaCha8Rng) -> f64 + Sync)| -> Vec<f64> {
        (0..cfg.paths)
            .into_par_iter()
            .map(|i| f(&mut path_rng(seed, i)))
            .collect()
    };
    match spec {
        ProcessSpec::Hawkes(s) => {
            positive(s.baseline, "hawkes baseline")?;
            positive(s.decay, "hawkes decay")?;
            if !(s.jump >= 0.0 && s.initial >= 0.0) {
                return Err(Error::InvalidInput(
                    "hawkes jump and initial intensity must be nonnegative".to_string(),
                ));
            }
            Ok(run(&|rng| hawkes_path(s, t, rng)))
        }
        ProcessSpec::ShotNoise(s) => {
            positive(s.rate, "shot noise rate")?;
            let jumps = Sampler::new(&s.jumps, "jump")?;
            Ok(run(&|rng| shot_noise_path(s, &jumps, t, rng)))
        }
        ProcessSpec::GrowthCollapse(s) => {
            positive(s.collapse_rate, "collapse rate")?;
            let collapse = Sampler::new(&s.collapse, "collapse")?;
            Ok(run(&|rng| growth_collapse_path(s, &collapse, t, rng)))
        }
        ProcessSpec::Ephemeral(s) => {
            positive(s.baseline, "baseline")?;
            if !(s.jump >= 0.0 && s.expiry >= 0.0) {
                return Err(Error::InvalidInput(
                    "jump and expiry rates must be nonnegative".to_string(),
                ));
            }
            Ok(run(&|rng| ephemeral_path(s, t, rng)))
        }
        ProcessSpec::Ito(s) => {
            if !(0.0..=2.0).contains(&s.gamma) {
                return Err(Error::UnsupportedGamma(s.gamma));
            }
            let steps = (t / cfg.diffusion_step).ceil().max(1.0) as u64;
            let dt = t / steps as f64;
            Ok(run(&|rng| ito_path(s, steps, dt, rng)))
        }
        ProcessSpec::Generic(s) => {
            let sim = GenericSim::new(s)?;
            if sim.has_diffusion() {
                let steps = (t / cfg.diffusion_step).ceil().max(1.0) as u64;
                let dt = t / steps as f64;
                Ok(run(&|rng| sim.discretized_path(steps, dt, rng)))
            } else {
                Ok(run(&|rng| sim.exact_path(t, rng)))
            }
        }
    }
}

/// Between arrivals the intensity is `λ* + (λ - λ*)e^{-βs}`. Above baseline
/// the next arrival is the first of two independent clocks: one for the
/// decaying excess, with inverse integrated hazard
/// `-ln(1 + β ln U / (λ - λ*)) / β` (never firing if the log argument is not
/// positive), and an `Exp(λ*)` clock for the baseline. Below baseline the
/// intensity is bounded by `λ*` and arrivals are thinned.
fn hawkes_path<R: Rng>(s: &HawkesSpec, t: f64, rng: &mut R) -> f64 {
    let (base, alpha, beta) = (s.baseline, s.jump, s.decay);
    let mut now = 0.0;
    let mut lambda = s.initial;
    loop {
        let excess = lambda - base;
        let wait = if excess > 0.0 {
            let d = 1.0 - beta * exp1(rng) / excess;
            let s1 = if d > 0.0 {
                -d.ln() / beta
            } else {
                f64::INFINITY
            };
            let s2 = exp1(rng) / base;
            Some(s1.min(s2))
        } else {
            let cand = exp1(rng) / base;
            if now + cand > t {
                None
            } else {
                let at = base + excess * (-beta * cand).exp();
                if rng.random::<f64>() * base <= at {
                    Some(cand)
                } else {
                    now += cand;
                    lambda = at;
                    continue;
                }
            }
        };
        match wait {
            Some(w) if now + w <= t => {
                now += w;
                lambda = base + excess * (-beta * w).exp() + alpha;
            }
            _ => return base + (lambda - base) * (-beta * (t - now)).exp(),
        }
    }
}

fn shot_noise_path<R: Rng>(s: &ShotNoiseSpec, jumps: &Sampler, t: f64, rng: &mut R) -> f64 {
    let mut now = 0.0;
    let mut x = s.initial;
    loop {
        let w = exp1(rng) / s.rate;
        if now + w > t {
            return x * (-s.decay * (t - now)).exp();
        }
        now += w;
        x = x * (-s.decay * w).exp() + jumps.sample(rng);
    }
}

fn growth_collapse_path<R: Rng>(
    s: &GrowthCollapseSpec,
    collapse: &Sampler,
    t: f64,
    rng: &mut R,
) -> f64 {
    let mut now = 0.0;
    let mut y = s.initial;
    loop {
        let w = exp1(rng) / s.collapse_rate;
        if now + w > t {
            return y + s.growth * (t - now);
        }
        now += w;
        y = (y + s.growth * w) * collapse.sample(rng);
    }
}

fn ephemeral_path<R: Rng>(s: &EphemeralSpec, t: f64, rng: &mut R) -> f64 {
    let mut now = 0.0;
    let mut q = s.initial as f64;
    loop {
        let up = s.baseline + s.jump * q;
        let down = s.expiry * q;
        let total = up + down;
        now += exp1(rng) / total;
        if now > t {
            return q;
        }
        if rng.random::<f64>() * total < up {
            q += 1.0;
        } else {
            q -= 1.0;
        }
    }
}

/// Euler–Maruyama with the state floored at zero inside `S^{γ/2}`.
fn ito_path<R: Rng>(s: &ItoSpec, steps: u64, dt: f64, rng: &mut R) -> f64 {
    let sqrt_dt = dt.sqrt();
    let half_gamma = 0.5 * s.gamma;
    let mut x = s.initial;
    for _ in 0..steps {
        let z: f64 = rng.sample(StandardNormal);
        let scale = if half_gamma == 0.0 {
            1.0
        } else {
            x.max(0.0).powf(half_gamma)
        };
        x += (s.mu + s.theta * x) * dt + s.sigma * scale * sqrt_dt * z;
    }
    x
}

struct GenericSim {
    a: [f64; 10],
    up: Option<Sampler>,
    down: Option<Sampler>,
    collapse: Option<Sampler>,
    initial: f64,
}

impl GenericSim {
    fn new(spec: &GenericGeneratorSpec) -> Result<Self> {
        let a = spec.coefficients;
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "generator coefficients must be finite".to_string(),
            ));
        }
        let sampler = |on: bool, jumps: &JumpMoments, label: &str| -> Result<Option<Sampler>> {
            if on {
                Sampler::new(jumps, label).map(Some)
            } else {
                Ok(None)
            }
        };
        Ok(Self {
            a,
            up: sampler(a[0] != 0.0 || a[1] != 0.0, &spec.up, "up-jump")?,
            down: sampler(a[2] != 0.0 || a[3] != 0.0, &spec.down, "down-jump")?,
            collapse: sampler(a[9] != 0.0, &spec.collapse, "collapse")?,
            initial: spec.initial,
        })
    }

    fn has_diffusion(&self) -> bool {
        self.a[6] != 0.0 || self.a[7] != 0.0 || self.a[8] != 0.0
    }

    /// Event rates (up, down, collapse) at state `x`, clamped at zero.
    fn rates(&self, x: f64) -> [f64; 3] {
        let a = &self.a;
        [
            if self.up.is_some() {
                (a[0] + a[1] * x).max(0.0)
            } else {
                0.0
            },
            if self.down.is_some() {
                (a[2] + a[3] * x).max(0.0)
            } else {
                0.0
            },
            if self.collapse.is_some() {
                a[9].max(0.0)
            } else {
                0.0
            },
        ]
    }

    /// State after following `dx/ds = a4 + a5 x` for time `s`.
    fn flow(&self, x: f64, s: f64) -> f64 {
        let (c, k) = (self.a[4], self.a[5]);
        if k == 0.0 {
            x + c * s
        } else {
            (x + c / k) * (k * s).exp() - c / k
        }
    }

    fn jump<R: Rng>(&self, x: f64, kind: usize, rng: &mut R) -> f64 {
        match kind {
            0 => x + self.up.as_ref().map_or(0.0, |d| d.sample(rng)),
            1 => x - self.down.as_ref().map_or(0.0, |d| d.sample(rng)),
            _ => x * self.collapse.as_ref().map_or(1.0, |d| d.sample(rng)),
        }
    }

    fn pick(rates: &[f64; 3], u: f64) -> usize {
        let mut acc = 0.0;
        for (i, r) in rates.iter().enumerate() {
            acc += r;
            if u < acc {
                return i;
            }
        }
        2
    }

    /// Thinning over windows along the deterministic flow. Rates are affine in
    /// `x` and the flow is monotone, so the rate over a window is bounded by
    /// its value at one of the endpoints.
    fn exact_path<R: Rng>(&self, t: f64, rng: &mut R) -> f64 {
        const WINDOW: f64 = 1.0;
        let total = |x: f64| self.rates(x).iter().sum::<f64>();
        let mut now = 0.0;
        let mut x = self.initial;
        while now < t {
            let h = WINDOW.min(t - now);
            let bound = total(x).max(total(self.flow(x, h)));
            if bound <= 0.0 {
                x = self.flow(x, h);
                now += h;
                continue;
            }
            let w = exp1(rng) / bound;
            if w >= h {
                x = self.flow(x, h);
                now += h;
                continue;
            }
            x = self.flow(x, w);
            now += w;
            let rates = self.rates(x);
            let u = rng.random::<f64>() * bound;
            if u < rates.iter().sum::<f64>() {
                x = self.jump(x, Self::pick(&rates, u), rng);
            }
        }
        x
    }

    /// Euler–Maruyama for the continuous part with Poisson event counts per step.
    fn discretized_path<R: Rng>(&self, steps: u64, dt: f64, rng: &mut R) -> f64 {
        let a = &self.a;
        let sqrt_dt = dt.sqrt();
        let mut x = self.initial;
        for _ in 0..steps {
            let z: f64 = rng.sample(StandardNormal);
            let var = 2.0 * (a[6] + a[7] * x + a[8] * x * x);
            let mut next = x + (a[4] + a[5] * x) * dt + var.max(0.0).sqrt() * sqrt_dt * z;
            let rates = self.rates(x);
            for (kind, r) in rates.iter().enumerate() {
                if *r > 0.0 {
                    let count = Poisson::new(r * dt).map_or(0.0, |p| p.sample(rng)) as u64;
                    for _ in 0..count {
                        next = self.jump(next, kind, rng);
                    }
                }
            }
            x = next;
        }
        x
    }
}

/// Sample moment `E[X^k]` across paths with its standard error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub order: usize,
    pub mean: f64,
    /// Sample standard deviation over `sqrt(paths)`.
    pub std_error: f64,
    pub paths: usize,
}

impl MomentEstimate {
    pub fn relative_std_error(&self) -> f64 {
        if self.mean == 0.0 {
            if self.std_error == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.std_error / self.mean.abs()
        }
    }

    /// Distance to `value` in standard errors.
    pub fn z_score(&self, value: f64) -> f64 {
        let diff = (self.mean - value).abs();
        if diff == 0.0 {
            0.0
        } else {
            diff / self.std_error
        }
    }
}

/// Means and standard errors of `x^1..x^n` over `terminals`, summed in order.
pub fn estimate_moments(terminals: &[f64], max_order: usize) -> Result<Vec<MomentEstimate>> {
    if terminals.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "at least 2 paths are required, got {}",
            terminals.len()
        )));
    }
    if max_order == 0 {
        return Err(Error::InvalidInput(
            "moment order must be at least 1".to_string(),
        ));
    }
    let count = terminals.len() as f64;
    let mut powers = vec![1.0; terminals.len()];
    let mut out = Vec::with_capacity(max_order);
    for k in 1..=max_order {
        for (p, x) in powers.iter_mut().zip(terminals) {
            *p *= x;
        }
        let mean = powers.iter().sum::<f64>() / count;
        let ss: f64 = powers.iter().map(|p| (p - mean) * (p - mean)).sum();
        let std_error = (ss / (count - 1.0) / count).sqrt();
        out.push(MomentEstimate {
            order: k,
            mean,
            std_error,
            paths: terminals.len(),
        });
    }
    Ok(out)
}

/// Warnings for estimates whose relative standard error exceeds 20%.
pub fn heavy_tail_warnings(estimates: &[MomentEstimate]) -> Vec<String> {
    estimates
        .iter()
        .filter(|e| e.relative_std_error() > HEAVY_TAIL_THRESHOLD)
        .map(|e| {
            format!(
                "moment {} has relative standard error {:.0}%; the estimate is unreliable",
                e.order,
                100.0 * e.relative_std_error()
            )
        })
        .collect()
}
