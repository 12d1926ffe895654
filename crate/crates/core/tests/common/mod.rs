#![allow(dead_code)]

use matryoshka::processes::*;
use matryoshka::MatryoshkanMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Dense = Vec<Vec<f64>>;

pub fn identity(n: usize) -> Dense {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

pub fn mat_mul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let m = b[0].len();
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for k in 0..b.len() {
            let aik = a[i][k];
            if aik != 0.0 {
                for j in 0..m {
                    out[i][j] += aik * b[k][j];
                }
            }
        }
    }
    out
}

pub fn mat_vec(a: &Dense, v: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

pub fn max_abs(a: &Dense) -> f64 {
    a.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn max_diff(a: &Dense, b: &Dense) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// `sum_{k < terms} (tA)^k / k!` on a dense copy.
pub fn taylor_exp(a: &Dense, t: f64, terms: usize) -> Dense {
    let n = a.len();
    let mut sum = identity(n);
    let mut term = identity(n);
    let scaled: Dense = a
        .iter()
        .map(|r| r.iter().map(|v| v * t).collect())
        .collect();
    for k in 1..terms {
        term = mat_mul(&term, &scaled);
        for row in term.iter_mut() {
            for v in row.iter_mut() {
                *v /= k as f64;
            }
        }
        for i in 0..n {
            for j in 0..n {
                sum[i][j] += term[i][j];
            }
        }
    }
    sum
}

pub fn repeated_product(a: &Dense, k: u32) -> Dense {
    let mut out = identity(a.len());
    for _ in 0..k {
        out = mat_mul(&out, a);
    }
    out
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

pub fn rel_err(approx: f64, exact: f64) -> f64 {
    if exact == 0.0 {
        approx.abs()
    } else {
        (approx - exact).abs() / exact.abs()
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Lower-triangular matrix with well separated diagonal entries in
/// `[-3, -0.1]` (one per jittered stratum, in random order) and
/// off-diagonal entries uniform in `[-1, 1] / n`.
pub fn random_stable(rng: &mut ChaCha8Rng, n: usize) -> MatryoshkanMatrix {
    let width = 2.9 / n as f64;
    let mut diag: Vec<f64> = (0..n)
        .map(|i| -0.1 - width * (i as f64 + 0.5 + rng.random_range(-0.3..0.3)))
        .collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        diag.swap(i, j);
    }
    let mut m = MatryoshkanMatrix::empty();
    for (i, d) in diag.iter().enumerate() {
        let row: Vec<f64> = (0..i)
            .map(|_| rng.random_range(-1.0..1.0) / n as f64)
            .collect();
        m.push_row(&row, *d).unwrap();
    }
    m
}

/// Lower-triangular matrix with entries uniform in `[-1, 1]`, diagonal kept
/// away from zero.
pub fn random_invertible(rng: &mut ChaCha8Rng, n: usize) -> MatryoshkanMatrix {
    let mut m = MatryoshkanMatrix::empty();
    for i in 0..n {
        let row: Vec<f64> = (0..i).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mag = rng.random_range(0.5..2.0);
        let d = if rng.random::<bool>() { mag } else { -mag };
        m.push_row(&row, d).unwrap();
    }
    m
}

pub fn hawkes() -> HawkesSpec {
    HawkesSpec::new(1.0, 1.0, 2.0)
}

pub fn shot_noise() -> ShotNoiseSpec {
    ShotNoiseSpec {
        rate: 1.0,
        decay: 4.0,
        jumps: JumpMoments::LogNormal {
            mu: 0.0,
            sigma: 1.0,
        },
        initial: 0.0,
    }
}

pub fn cir() -> ItoSpec {
    ItoSpec {
        mu: 1.0,
        theta: 1.0,
        sigma: 1.0,
        gamma: 1.0,
        initial: 1.0,
    }
}

pub fn growth_collapse() -> GrowthCollapseSpec {
    GrowthCollapseSpec::uniform(1.0, 0.5)
}

pub fn ephemeral() -> EphemeralSpec {
    EphemeralSpec {
        baseline: 1.0,
        jump: 2.0,
        expiry: 3.0,
        initial: 0,
    }
}

/// The five benchmark processes with their horizons.
pub fn fixtures() -> Vec<(&'static str, ProcessSpec, f64)> {
    vec![
        ("hawkes", ProcessSpec::Hawkes(hawkes()), 10.0),
        ("shotnoise", ProcessSpec::ShotNoise(shot_noise()), 5.0),
        ("cir", ProcessSpec::Ito(cir()), 5.0),
        (
            "growthcollapse",
            ProcessSpec::GrowthCollapse(growth_collapse()),
            8.0,
        ),
        ("ephemeral", ProcessSpec::Ephemeral(ephemeral()), 5.0),
    ]
}

/// Fixtures whose moment systems have a steady state.
pub fn stable_fixtures() -> Vec<(&'static str, ProcessSpec)> {
    let ou = ItoSpec {
        mu: 0.5,
        theta: -1.0,
        sigma: 0.7,
        gamma: 0.0,
        initial: 0.3,
    };
    let cir = ItoSpec {
        mu: 1.0,
        theta: -2.0,
        sigma: 0.5,
        gamma: 1.0,
        initial: 1.0,
    };
    vec![
        ("hawkes", ProcessSpec::Hawkes(hawkes())),
        ("shotnoise", ProcessSpec::ShotNoise(shot_noise())),
        ("ou", ProcessSpec::Ito(ou)),
        ("cir", ProcessSpec::Ito(cir)),
        (
            "growthcollapse",
            ProcessSpec::GrowthCollapse(growth_collapse()),
        ),
        ("ephemeral", ProcessSpec::Ephemeral(ephemeral())),
    ]
}

/// The same process written as a generic generator.
pub fn embed(spec: &ProcessSpec) -> GenericGeneratorSpec {
    let mut g = GenericGeneratorSpec::default();
    let a = &mut g.coefficients;
    match spec {
        ProcessSpec::Hawkes(s) => {
            a[1] = 1.0;
            g.up = JumpMoments::Deterministic(s.jump);
            a[4] = s.decay * s.baseline;
            a[5] = -s.decay;
            g.initial = s.initial;
        }
        ProcessSpec::ShotNoise(s) => {
            a[0] = s.rate;
            g.up = s.jumps.clone();
            a[5] = -s.decay;
            g.initial = s.initial;
        }
        ProcessSpec::Ito(s) => {
            a[4] = s.mu;
            a[5] = s.theta;
            let half_var = 0.5 * s.sigma * s.sigma;
            a[6 + s.gamma as usize] = half_var;
            g.initial = s.initial;
        }
        ProcessSpec::GrowthCollapse(s) => {
            a[4] = s.growth;
            a[9] = s.collapse_rate;
            g.collapse = s.collapse.clone();
            g.initial = s.initial;
        }
        ProcessSpec::Ephemeral(s) => {
            a[0] = s.baseline;
            a[1] = s.jump;
            a[3] = s.expiry;
            g.up = JumpMoments::Deterministic(1.0);
            g.down = JumpMoments::Deterministic(1.0);
            g.initial = s.initial as f64;
        }
        ProcessSpec::Generic(s) => return s.clone(),
    }
    g
}

/// Distance in units in the last place; equal values (including `0.0` and `-0.0`) are 0 apart.
pub fn ulps(a: f64, b: f64) -> u64 {
    if a == b {
        return 0;
    }
    if a.is_nan() || b.is_nan() || a.signum() != b.signum() {
        return u64::MAX;
    }
    a.to_bits().abs_diff(b.to_bits())
}

/// At least 50 parameter settings spread over the five families.
pub fn builder_grid() -> Vec<ProcessSpec> {
    let mut out = Vec::new();
    for &(base, jump, decay) in &[
        (1.0, 1.0, 2.0),
        (0.3, 0.7, 1.9),
        (2.5, 0.1, 0.4),
        (1.7, 3.3, 1.1),
    ] {
        out.push(ProcessSpec::Hawkes(HawkesSpec::new(base, jump, decay)));
        out.push(ProcessSpec::Hawkes(HawkesSpec {
            initial: 0.37,
            ..HawkesSpec::new(base, jump, decay)
        }));
    }
    let jumps = [
        JumpMoments::Deterministic(1.0),
        JumpMoments::Deterministic(0.3),
        JumpMoments::Exponential { rate: 1.7 },
        JumpMoments::LogNormal {
            mu: 0.0,
            sigma: 1.0,
        },
        JumpMoments::LogNormal {
            mu: -0.4,
            sigma: 0.3,
        },
        JumpMoments::Uniform,
    ];
    for (i, j) in jumps.iter().enumerate() {
        for &(rate, decay) in &[(1.0, 4.0), (0.6, 0.9)] {
            out.push(ProcessSpec::ShotNoise(ShotNoiseSpec {
                rate,
                decay,
                jumps: j.clone(),
                initial: 0.1 * i as f64,
            }));
        }
    }
    for gamma in [0.0, 1.0, 2.0] {
        for &(mu, theta, sigma) in &[
            (1.0, 1.0, 1.0),
            (0.2, -1.3, 0.7),
            (-0.5, -0.25, 1.9),
            (0.0, -3.0, 0.1),
            (2.0, 0.5, 0.3),
        ] {
            out.push(ProcessSpec::Ito(ItoSpec {
                mu,
                theta,
                sigma,
                gamma,
                initial: 0.8,
            }));
        }
    }
    let collapses = [
        JumpMoments::Uniform,
        JumpMoments::Deterministic(0.5),
        JumpMoments::Explicit((1..=40).map(|k| 0.9f64.powi(k)).collect()),
    ];
    for c in &collapses {
        for &(growth, rate) in &[(1.0, 0.5), (2.2, 1.3), (0.4, 3.0)] {
            out.push(ProcessSpec::GrowthCollapse(GrowthCollapseSpec {
                growth,
                collapse_rate: rate,
                collapse: c.clone(),
                initial: 0.2,
            }));
        }
    }
    for &(baseline, jump, expiry, initial) in &[
        (1.0, 2.0, 3.0, 0),
        (0.5, 0.5, 0.8, 2),
        (3.0, 1.1, 4.7, 5),
        (0.2, 2.9, 3.0, 1),
        (1.5, 0.25, 0.3, 0),
        (0.8, 4.0, 4.5, 3),
        (2.0, 1.0, 1.5, 7),
        (0.1, 0.1, 0.2, 0),
    ] {
        out.push(ProcessSpec::Ephemeral(EphemeralSpec {
            baseline,
            jump,
            expiry,
            initial,
        }));
    }
    out
}
