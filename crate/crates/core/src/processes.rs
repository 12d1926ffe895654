//! Moment systems for the supported process families.
//!
//! Each builder applies the process generator to `x^k` for `k = 1..n` and
//! collects the coefficients into a [`CoefficientSystem`]. Jump terms expand
//! through the binomial theorem, which is where the Pascal-type matrices come
//! from. [`build_generic`] covers every family at once; the specialised
//! builders exist because their closed forms are easier to audit and they
//! cross-check the generic path.

use std::str::FromStr;

use crate::engine::{powers, CoefficientSystem, InitialMomentVector};
use crate::error::{Error, Result};
use crate::matrix::MatryoshkanMatrix;

/// Largest `n` for which every `C(n, k)` is an exactly representable double.
pub const EXACT_BINOMIAL_LIMIT: usize = 56;

/// Rows `0..=n` of Pascal's triangle, built by the additive recurrence.
#[derive(Clone, Debug)]
pub struct Binomials {
    rows: Vec<Vec<f64>>,
}

impl Binomials {
    pub fn new(n: usize) -> Self {
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        rows.push(vec![1.0]);
        for i in 1..=n {
            let prev = &rows[i - 1];
            let mut row = vec![1.0; i + 1];
            for k in 1..i {
                row[k] = prev[k - 1] + prev[k];
            }
            rows.push(row);
        }
        Self { rows }
    }

    /// `C(n, k)`, zero outside `0..=n`.
    pub fn get(&self, n: usize, k: usize) -> f64 {
        if k > n {
            0.0
        } else {
            self.rows[n][k]
        }
    }

    pub fn exact(&self) -> bool {
        self.rows.len() <= EXACT_BINOMIAL_LIMIT + 1
    }
}

fn binomial_warning(n: usize) -> Option<String> {
    (n > EXACT_BINOMIAL_LIMIT).then(|| {
        format!(
            "binomial coefficients beyond order {EXACT_BINOMIAL_LIMIT} are not exact in double precision (order {n})"
        )
    })
}

/// Moment sequence `E[J^k]` of a jump, mark, or collapse-fraction distribution.
#[derive(Clone, Debug, PartialEq)]
pub enum JumpMoments {
    Deterministic(f64),
    Exponential {
        rate: f64,
    },
    LogNormal {
        mu: f64,
        sigma: f64,
    },
    /// Uniform on `(0, 1)`.
    Uniform,
    /// `E[J^1], E[J^2], ...` given directly.
    Explicit(Vec<f64>),
}

impl JumpMoments {
    /// `E[J^1..J^n]`.
    pub fn moments(&self, n: usize) -> Result<Vec<f64>> {
        match self {
            JumpMoments::Deterministic(c) => Ok(powers(*c, n)),
            JumpMoments::Exponential { rate } => {
                let mut out = Vec::with_capacity(n);
                let mut acc = 1.0;
                for k in 1..=n {
                    acc *= k as f64 / rate;
                    out.push(acc);
                }
                Ok(out)
            }
            JumpMoments::LogNormal { mu, sigma } => Ok((1..=n)
                .map(|k| {
                    let k = k as f64;
                    (k * mu + 0.5 * k * k * sigma * sigma).exp()
                })
                .collect()),
            JumpMoments::Uniform => Ok((1..=n).map(|k| 1.0 / (k as f64 + 1.0)).collect()),
            JumpMoments::Explicit(values) => {
                if values.len() < n {
                    Err(Error::InsufficientMoments {
                        needed: n,
                        available: values.len(),
                    })
                } else {
                    Ok(values[..n].to_vec())
                }
            }
        }
    }

    /// Orders `k` (one-based) where the sequence is not a valid moment
    /// sequence of a positive variable: `E[J^k] <= 0` or
    /// `E[J^{k+1}] E[J^{k-1}] < E[J^k]^2` (with `E[J^0] = 1`).
    pub fn log_convexity_violations(&self, n: usize) -> Vec<usize> {
        let Ok(m) = self.moments(n) else {
            return Vec::new();
        };
        let at = |k: usize| if k == 0 { 1.0 } else { m[k - 1] };
        let mut bad = Vec::new();
        for k in 1..=n {
            if !(at(k) > 0.0) {
                bad.push(k);
            } else if k < n {
                let lhs = at(k + 1) * at(k - 1);
                let rhs = at(k) * at(k);
                if lhs < rhs * (1.0 - 1e-12) {
                    bad.push(k);
                }
            }
        }
        bad
    }

    fn checked_moments(
        &self,
        n: usize,
        label: &str,
        warnings: &mut Vec<String>,
    ) -> Result<Vec<f64>> {
        let m = self.moments(n)?;
        if let Some(k) = m.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "{label} moment of order {} is not finite",
                k + 1
            )));
        }
        if matches!(self, JumpMoments::Explicit(_)) {
            let bad = self.log_convexity_violations(n);
            if !bad.is_empty() {
                warnings.push(format!(
                    "{label} moments are not a valid positive moment sequence at orders {bad:?}"
                ));
            }
        }
        Ok(m)
    }
}

impl FromStr for JumpMoments {
    type Err = Error;

    /// Parses `deterministic:c`, `exponential:rate`, `lognormal:mu,sigma`,
    /// `uniform` and `explicit:m1,m2,...`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, args) = s.split_once(':').unwrap_or((s, ""));
        let nums: Vec<f64> = if args.trim().is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|a| {
                    a.trim().parse::<f64>().map_err(|_| {
                        Error::InvalidInput(format!("bad number '{a}' in jump descriptor '{s}'"))
                    })
                })
                .collect::<Result<_>>()?
        };
        let arity = |k: usize| {
            if nums.len() == k {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!(
                    "jump descriptor '{s}' takes {k} argument(s)"
                )))
            }
        };
        match kind.trim().to_ascii_lowercase().as_str() {
            "deterministic" | "constant" => {
                arity(1)?;
                Ok(JumpMoments::Deterministic(nums[0]))
            }
            "exponential" | "exp" => {
                arity(1)?;
                if !(nums[0] > 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "exponential rate must be positive in '{s}'"
                    )));
                }
                Ok(JumpMoments::Exponential { rate: nums[0] })
            }
            "lognormal" => {
                arity(2)?;
                Ok(JumpMoments::LogNormal {
                    mu: nums[0],
                    sigma: nums[1],
                })
            }
            "uniform" => {
                if !(nums.is_empty() || nums == [0.0, 1.0]) {
                    return Err(Error::InvalidInput(format!(
                        "only uniform on (0, 1) is supported, got '{s}'"
                    )));
                }
                Ok(JumpMoments::Uniform)
            }
            "explicit" => {
                if nums.is_empty() {
                    return Err(Error::InvalidInput(format!(
                        "explicit moments missing in '{s}'"
                    )));
                }
                Ok(JumpMoments::Explicit(nums))
            }
            other => Err(Error::InvalidInput(format!(
                "unknown jump distribution '{other}'"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HawkesSpec {
    /// Baseline intensity `λ*`.
    pub baseline: f64,
    /// Intensity jump `α` at each arrival.
    pub jump: f64,
    /// Decay rate `β`.
    pub decay: f64,
    /// Initial intensity `λ0`.
    pub initial: f64,
}

impl HawkesSpec {
    /// Starts the intensity at its baseline.
    pub fn new(baseline: f64, jump: f64, decay: f64) -> Self {
        Self {
            baseline,
            jump,
            decay,
            initial: baseline,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShotNoiseSpec {
    pub rate: f64,
    pub decay: f64,
    pub jumps: JumpMoments,
    pub initial: f64,
}

/// `dS = (μ + θ S) dt + σ S^{γ/2} dB`.
#[derive(Clone, Debug, PartialEq)]
pub struct ItoSpec {
    pub mu: f64,
    pub theta: f64,
    pub sigma: f64,
    pub gamma: f64,
    pub initial: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthCollapseSpec {
    pub growth: f64,
    pub collapse_rate: f64,
    /// Distribution of the fraction kept at a collapse.
    pub collapse: JumpMoments,
    pub initial: f64,
}

impl GrowthCollapseSpec {
    pub fn uniform(growth: f64, collapse_rate: f64) -> Self {
        Self {
            growth,
            collapse_rate,
            collapse: JumpMoments::Uniform,
            initial: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EphemeralSpec {
    pub baseline: f64,
    pub jump: f64,
    pub expiry: f64,
    pub initial: u64,
}

/// Generator
///
/// ```text
/// L f(x) = (a0 + a1 x)(f(x + A) - f(x)) + (a2 + a3 x)(f(x - B) - f(x))
///        + (a4 + a5 x) f'(x) + (a6 + a7 x + a8 x^2) f''(x) + a9 (f(C x) - f(x))
/// ```
#[derive(Clone, Debug, PartialEq)]
pub struct GenericGeneratorSpec {
    pub coefficients: [f64; 10],
    pub up: JumpMoments,
    pub down: JumpMoments,
    pub collapse: JumpMoments,
    pub initial: f64,
}

impl Default for GenericGeneratorSpec {
    fn default() -> Self {
        Self {
            coefficients: [0.0; 10],
            up: JumpMoments::Deterministic(1.0),
            down: JumpMoments::Deterministic(1.0),
            collapse: JumpMoments::Deterministic(1.0),
            initial: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProcessSpec {
    Hawkes(HawkesSpec),
    ShotNoise(ShotNoiseSpec),
    Ito(ItoSpec),
    GrowthCollapse(GrowthCollapseSpec),
    Ephemeral(EphemeralSpec),
    Generic(GenericGeneratorSpec),
}

impl ProcessSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ProcessSpec::Hawkes(_) => "hawkes",
            ProcessSpec::ShotNoise(_) => "shotnoise",
            ProcessSpec::Ito(_) => "ito",
            ProcessSpec::GrowthCollapse(_) => "growthcollapse",
            ProcessSpec::Ephemeral(_) => "ephemeral",
            ProcessSpec::Generic(_) => "generic",
        }
    }

    /// True for families whose state never goes negative.
    pub fn nonnegative(&self) -> bool {
        matches!(
            self,
            ProcessSpec::Hawkes(_)
                | ProcessSpec::ShotNoise(_)
                | ProcessSpec::GrowthCollapse(_)
                | ProcessSpec::Ephemeral(_)
        )
    }

    pub fn build(&self, n: usize) -> Result<ProcessSystem> {
        match self {
            ProcessSpec::Hawkes(s) => build_hawkes(s, n),
            ProcessSpec::ShotNoise(s) => build_shot_noise(s, n),
            ProcessSpec::Ito(s) => build_ito(s, n),
            ProcessSpec::GrowthCollapse(s) => build_growth_collapse(s, n),
            ProcessSpec::Ephemeral(s) => build_ephemeral(s, n),
            ProcessSpec::Generic(s) => build_generic(s, n),
        }
    }
}

/// A built moment system with its initial condition, the jump moments it
/// consumed, and any construction warnings.
#[derive(Clone, Debug, PartialEq)]
pub struct ProcessSystem {
    pub system: CoefficientSystem,
    pub init: InitialMomentVector,
    pub jump_moments: Vec<(&'static str, Vec<f64>)>,
    pub warnings: Vec<String>,
}

impl ProcessSystem {
    fn new(system: CoefficientSystem, x0: f64) -> Self {
        let n = system.order();
        let mut warnings = Vec::new();
        warnings.extend(binomial_warning(n));
        Self {
            system,
            init: InitialMomentVector::new(x0, n),
            jump_moments: Vec::new(),
            warnings,
        }
    }
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidInput(msg()))
    }
}

fn require_order(n: usize) -> Result<()> {
    require(n >= 1, || "moment order must be at least 1".to_string())
}

/// `(P_n(a))_{i,j} = C(i, j-1) a^{i-j+1}` for `i >= j` (one-based).
pub fn pascal_matryoshkan(n: usize, a: f64) -> MatryoshkanMatrix {
    let binom = Binomials::new(n);
    let pw = powers(a, n);
    let mut m = MatryoshkanMatrix::empty();
    for i in 1..=n {
        let row: Vec<f64> = (1..=i).map(|j| binom.get(i, j - 1) * pw[i - j]).collect();
        m.push_row(&row[..i - 1], row[i - 1])
            .expect("row length matches order");
    }
    m
}

/// Lower Pascal matrix `L_k(a) = exp(a diag(1:k-1, -1))`, entries `C(i-1, j-1) a^{i-j}`.
pub fn pascal_lower(k: usize, a: f64) -> MatryoshkanMatrix {
    let binom = Binomials::new(k);
    let pw = powers(a, k);
    let mut m = MatryoshkanMatrix::empty();
    for i in 1..=k {
        let row: Vec<f64> = (1..=i)
            .map(|j| {
                let p = if i == j { 1.0 } else { pw[i - j - 1] };
                binom.get(i - 1, j - 1) * p
            })
            .collect();
        m.push_row(&row[..i - 1], row[i - 1])
            .expect("row length matches order");
    }
    m
}

/// Intensity of a Markovian Hawkes process. `Θ = βλ* diag(2:n,-1) - β diag(1:n) + P_n(α)`
/// with diagonals `-k(β-α)`, shift `(βλ*, 0, ..., 0)`.
pub fn build_hawkes(spec: &HawkesSpec, n: usize) -> Result<ProcessSystem> {
    require_order(n)?;
    require(spec.baseline > 0.0, || {
        format!("hawkes baseline must be positive, got {}", spec.baseline)
    })?;
    require(spec.jump > 0.0, || {
        format!("hawkes jump must be positive, got {}", spec.jump)
    })?;
    require(spec.initial > 0.0, || {
        format!(
            "hawkes initial intensity must be positive, got {}",
            spec.initial
        )
    })?;
    require(spec.decay.is_finite(), || {
        "hawkes decay must be finite".to_string()
    })?;

    let binom = Binomials::new(n);
    let pw = powers(spec.jump, n);
    let drift = spec.decay * spec.baseline;
    let mut system = CoefficientSystem::empty();
    for k in 1..=n {
        let kf = k as f64;
        let mut row: Vec<f64> = (1..k).map(|j| binom.get(k, j - 1) * pw[k - j]).collect();
        if k >= 2 {
            row[k - 2] += kf * drift;
        }
        let diag = -(kf * (spec.decay - spec.jump));
        let shift = if k == 1 { drift } else { 0.0 };
        system.push_equation(&row, diag, shift)?;
    }
    Ok(ProcessSystem::new(system, spec.initial))
}

/// Markovian shot noise: row entries `C(n,i) λ E[J^{n-i}]`, diagonal `-nβ`,
/// shift `λ E[J^n]`.
pub fn build_shot_noise(spec: &ShotNoiseSpec, n: usize) -> Result<ProcessSystem> {
    require_order(n)?;
    require(spec.rate > 0.0, || {
        format!("shot noise rate must be positive, got {}", spec.rate)
    })?;
    require(spec.decay > 0.0, || {
        format!("shot noise decay must be positive, got {}", spec.decay)
    })?;
    require(spec.initial >= 0.0, || {
        format!(
            "shot noise initial value must be nonnegative, got {}",
            spec.initial
        )
    })?;

    let mut warnings = Vec::new();
    let jm = spec.jumps.checked_moments(n, "jump", &mut warnings)?;
    let binom = Binomials::new(n);
    let mut system = CoefficientSystem::empty();
    for k in 1..=n {
        let row: Vec<f64> = (1..k)
            .map(|i| spec.rate * binom.get(k, i) * jm[k - i - 1])
            .collect();
        let diag = -(k as f64 * spec.decay);
        system.push_equation(&row, diag, spec.rate * jm[k - 1])?;
    }
    let mut out = ProcessSystem::new(system, spec.initial);
    out.jump_moments.push(("jump", jm));
    out.warnings.extend(warnings);
    Ok(out)
}

fn integer_gamma(gamma: f64) -> Result<u8> {
    match gamma {
        0.0 => Ok(0),
        1.0 => Ok(1),
        2.0 => Ok(2),
        g => Err(Error::UnsupportedGamma(g)),
    }
}

/// Itô diffusion with affine drift and `σ² S^γ` variance, `γ ∈ {0, 1, 2}`.
/// Diagonal `χ_n = nθ + n(n-1)σ²/2 [γ = 2]`.
pub fn build_ito(spec: &ItoSpec, n: usize) -> Result<ProcessSystem> {
    require_order(n)?;
    let gamma = integer_gamma(spec.gamma)?;
    let half_var = 0.5 * spec.sigma * spec.sigma;
    let mut system = CoefficientSystem::empty();
    for k in 1..=n {
        let kf = k as f64;
        let curvature = (k * (k - 1)) as f64 * half_var;
        let mut row = vec![0.0; k - 1];
        let mut shift = 0.0;
        if k >= 2 {
            row[k - 2] = kf * spec.mu + if gamma == 1 { curvature } else { 0.0 };
        } else {
            shift = spec.mu;
        }
        if gamma == 0 {
            match k {
                2 => shift += curvature,
                k if k >= 3 => row[k - 3] = curvature,
                _ => {}
            }
        }
        let diag = kf * spec.theta + if gamma == 2 { curvature } else { 0.0 };
        system.push_equation(&row, diag, shift)?;
    }
    Ok(ProcessSystem::new(system, spec.initial))
}

/// Exact systems bracketing a diffusion with non-integer `γ ∈ [0, 2]`, built with
/// `⌊γ⌋` and `⌈γ⌉`.
///
/// The bracket `E[S^{n+⌊γ⌋-2}] <= E[S^{n+γ-2}] <= E[S^{n+⌈γ⌉-2}]` only holds
/// pathwise when the state stays at or above 1, so the two solutions bound
/// the true moments only for such processes.
pub fn ito_gamma_bounds(spec: &ItoSpec, n: usize) -> Result<(ProcessSystem, ProcessSystem)> {
    if !(0.0..=2.0).contains(&spec.gamma) {
        return Err(Error::UnsupportedGamma(spec.gamma));
    }
    let lower = ItoSpec {
        gamma: spec.gamma.floor(),
        ..spec.clone()
    };
    let upper = ItoSpec {
        gamma: spec.gamma.ceil(),
        ..spec.clone()
    };
    Ok((build_ito(&lower, n)?, build_ito(&upper, n)?))
}

/// Linear growth at rate `λ` with multiplicative collapses at rate `μ`.
/// Diagonal `μ (E[C^k] - 1)`, which is `-kμ/(k+1)` for uniform fractions.
pub fn build_growth_collapse(spec: &GrowthCollapseSpec, n: usize) -> Result<ProcessSystem> {
    require_order(n)?;
    require(spec.growth > 0.0, || {
        format!("growth rate must be positive, got {}", spec.growth)
    })?;
    require(spec.collapse_rate > 0.0, || {
        format!("collapse rate must be positive, got {}", spec.collapse_rate)
    })?;
    require(spec.initial >= 0.0, || {
        format!("initial value must be nonnegative, got {}", spec.initial)
    })?;

    let mut warnings = Vec::new();
    let cm = spec
        .collapse
        .checked_moments(n, "collapse", &mut warnings)?;
    let mut system = CoefficientSystem::empty();
    for k in 1..=n {
        let mut row = vec![0.0; k - 1];
        if k >= 2 {
            row[k - 2] = k as f64 * spec.growth;
        }
        let diag = spec.collapse_rate * (cm[k - 1] - 1.0);
        let shift = if k == 1 { spec.growth } else { 0.0 };
        system.push_equation(&row, diag, shift)?;
    }
    let mut out = ProcessSystem::new(system, spec.initial);
    out.jump_moments.push(("collapse", cm));
    out.warnings.extend(warnings);
    Ok(out)
}

/// Ephemerally self-exciting count: arrivals at `ν* + αQ`, departures at `μQ`.
/// Row entries `C(n,j)ν* + C(n,j-1)α + C(n,j-1)μ(-1)^{n-j-1}`, diagonal `-n(μ-α)`,
/// shift `ν*`.
pub fn build_ephemeral(spec: &EphemeralSpec, n: usize) -> Result<ProcessSystem> {
    require_order(n)?;
    require(spec.baseline > 0.0, || {
        format!("baseline must be positive, got {}", spec.baseline)
    })?;
    require(spec.jump > 0.0, || {
        format!("jump must be positive, got {}", spec.jump)
    })?;
    require(spec.expiry > 0.0, || {
        format!("expiry rate must be positive, got {}", spec.expiry)
    })?;

    let binom = Binomials::new(n);
    let mut system = CoefficientSystem::empty();
    for k in 1..=n {
        let row: Vec<f64> = (1..k)
            .map(|j| {
                let sign = if (k - j + 1) % 2 == 0 { 1.0 } else { -1.0 };
                spec.baseline * binom.get(k, j)
                    + spec.jump * binom.get(k, j - 1)
                    + spec.expiry * binom.get(k, j - 1) * sign
            })
            .collect();
        let diag = -(k as f64 * (spec.expiry - spec.jump));
        system.push_equation(&row, diag, spec.baseline)?;
    }
    Ok(ProcessSystem::new(system, spec.initial as f64))
}

/// Applies the generic generator to `x^k`. Coefficient of `x^j` in `L x^k`:
///
/// * up-jumps: `a0 C(k,j) E[A^{k-j}] + a1 C(k,j-1) E[A^{k-j+1}]`
/// * down-jumps: the same with `a2, a3` and `E[(-B)^m]`
/// * drift: `a4 k` at `j = k-1`, `a5 k` at `j = k`
/// * diffusion: `a6, a7, a8` times `k(k-1)` at `j = k-2, k-1, k`
/// * collapse: `a9 (E[C^k] - 1)` at `j = k`
///
/// The `j = 0` coefficient is the shift.
pub fn build_generic(spec: &GenericGeneratorSpec, n: usize) -> Result<ProcessSystem> {
    require_order(n)?;
    let a = spec.coefficients;
    require(a.iter().all(|v| v.is_finite()), || {
        "generator coefficients must be finite".to_string()
    })?;

    let mut warnings = Vec::new();
    let mut jump_moments = Vec::new();
    let up = if a[0] != 0.0 || a[1] != 0.0 {
        let m = spec.up.checked_moments(n, "up-jump", &mut warnings)?;
        jump_moments.push(("up", m.clone()));
        Some(m)
    } else {
        None
    };
    let down = if a[2] != 0.0 || a[3] != 0.0 {
        let m = spec.down.checked_moments(n, "down-jump", &mut warnings)?;
        jump_moments.push(("down", m.clone()));
        // E[(-B)^m]
        Some(
            m.iter()
                .enumerate()
                .map(|(i, v)| if i % 2 == 0 { -v } else { *v })
                .collect::<Vec<f64>>(),
        )
    } else {
        None
    };
    let collapse = if a[9] != 0.0 {
        let m = spec
            .collapse
            .checked_moments(n, "collapse", &mut warnings)?;
        jump_moments.push(("collapse", m.clone()));
        Some(m)
    } else {
        None
    };

    // moment m >= 1 of a sequence, zero-based storage
    let at = |seq: &Vec<f64>, m: usize| seq[m - 1];
    let binom = Binomials::new(n);
    let mut system = CoefficientSystem::empty();
    for k in 1..=n {
        let kf = k as f64;
        let curvature = (k * (k - 1)) as f64;
        let coefficient = |j: usize| -> f64 {
            let mut c = 0.0;
            if let Some(up) = &up {
                if j < k {
                    c += a[0] * binom.get(k, j) * at(up, k - j);
                }
                if j >= 1 && j < k {
                    c += a[1] * binom.get(k, j - 1) * at(up, k - j + 1);
                }
            }
            if let Some(down) = &down {
                if j < k {
                    c += a[2] * binom.get(k, j) * at(down, k - j);
                }
                if j >= 1 && j < k {
                    c += a[3] * binom.get(k, j - 1) * at(down, k - j + 1);
                }
            }
            if j + 1 == k {
                c += kf * a[4];
            }
            if j + 2 == k {
                c += curvature * a[6];
            }
            if j + 1 == k {
                c += curvature * a[7];
            }
            c
        };
        let row: Vec<f64> = (1..k).map(coefficient).collect();
        let shift = coefficient(0);

        let mut jump_drift = 0.0;
        if let Some(up) = &up {
            jump_drift += a[1] * at(up, 1);
        }
        if let Some(down) = &down {
            // at(down, 1) is -E[B]
            jump_drift += a[3] * at(down, 1);
        }
        let mut diag = kf * (jump_drift + a[5]) + curvature * a[8];
        if let Some(collapse) = &collapse {
            diag += a[9] * (at(collapse, k) - 1.0);
        }
        system.push_equation(&row, diag, shift)?;
    }
    let mut out = ProcessSystem::new(system, spec.initial);
    out.jump_moments = jump_moments;
    out.warnings.extend(warnings);
    Ok(out)
}
