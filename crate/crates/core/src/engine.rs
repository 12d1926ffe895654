//! Moment systems `d/dt s(t) = Θ s(t) + θ₀` with lower-triangular `Θ`, and
//! their transient and stationary solutions.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matrix::{coincident, ExpCache, InverseCache, MatryoshkanMatrix};

/// Stationary magnitudes beyond this are reported as a predicted overflow.
pub const OVERFLOW_MAGNITUDE: f64 = 1e300;

/// The coefficient matrix `Θ` and shift vector `θ₀` of a closed moment system.
///
/// Row `k` of `Θ` holds the coefficients of `E[X^1..X^{k+1}]` in the derivative of
/// `E[X^{k+1}]`; entry `k` of `θ₀` is the constant term.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientSystem {
    theta: MatryoshkanMatrix,
    theta0: Vec<f64>,
}

impl CoefficientSystem {
    pub fn new(theta: MatryoshkanMatrix, theta0: Vec<f64>) -> Result<Self> {
        if theta0.len() != theta.order() {
            return Err(Error::InvalidDimension {
                expected: theta.order(),
                found: theta0.len(),
            });
        }
        Ok(Self { theta, theta0 })
    }

    pub fn empty() -> Self {
        Self {
            theta: MatryoshkanMatrix::empty(),
            theta0: Vec::new(),
        }
    }

    /// Appends the equation for the next moment.
    pub fn push_equation(&mut self, row: &[f64], diag: f64, shift: f64) -> Result<()> {
        self.theta.push_row(row, diag)?;
        self.theta0.push(shift);
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.theta.order()
    }

    pub fn theta(&self) -> &MatryoshkanMatrix {
        &self.theta
    }

    pub fn theta0(&self) -> &[f64] {
        &self.theta0
    }

    /// The system for the first `k` moments.
    pub fn leading(&self, k: usize) -> Self {
        Self {
            theta: self.theta.leading(k),
            theta0: self.theta0[..k].to_vec(),
        }
    }

    /// `Θ s + θ₀`.
    pub fn derivative(&self, s: &[f64]) -> Result<Vec<f64>> {
        let mut d = self.theta.mul_vec(s)?;
        for (v, c) in d.iter_mut().zip(&self.theta0) {
            *v += c;
        }
        Ok(d)
    }
}

/// Powers `x0, x0^2, ..., x0^n` of a deterministic initial state.
#[derive(Clone, Debug, PartialEq)]
pub struct InitialMomentVector {
    x0: f64,
    powers: Vec<f64>,
}

impl InitialMomentVector {
    pub fn new(x0: f64, order: usize) -> Self {
        Self {
            x0,
            powers: powers(x0, order),
        }
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn order(&self) -> usize {
        self.powers.len()
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }
}

/// `a, a^2, ..., a^n` by repeated multiplication.
pub fn powers(a: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut acc = 1.0;
    for _ in 0..n {
        acc *= a;
        out.push(acc);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MomentTime {
    At(f64),
    Stationary,
}

impl Serialize for MomentTime {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            MomentTime::At(t) => serializer.serialize_f64(*t),
            MomentTime::Stationary => serializer.serialize_str("stationary"),
        }
    }
}

impl<'de> Deserialize<'de> for MomentTime {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct TimeVisitor;

        impl Visitor<'_> for TimeVisitor {
            type Value = MomentTime;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a time or the string \"stationary\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<MomentTime, E> {
                Ok(MomentTime::At(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<MomentTime, E> {
                Ok(MomentTime::At(v as f64))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<MomentTime, E> {
                Ok(MomentTime::At(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<MomentTime, E> {
                if v == "stationary" {
                    Ok(MomentTime::Stationary)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
        }

        deserializer.deserialize_any(TimeVisitor)
    }
}

/// `E[X_t^k]` for `k = 1..n`; `values[k - 1]` is the `k`-th moment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentVector {
    pub time: MomentTime,
    pub values: Vec<f64>,
}

impl MomentVector {
    pub fn order(&self) -> usize {
        self.values.len()
    }

    /// The `k`-th moment, one-based.
    pub fn moment(&self, k: usize) -> f64 {
        self.values[k - 1]
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "time must be finite and nonnegative, got {t}"
        )));
    }
    Ok(())
}

fn check_init(system: &CoefficientSystem, init: &InitialMomentVector) -> Result<()> {
    if init.order() < system.order() {
        return Err(Error::InvalidDimension {
            expected: system.order(),
            found: init.order(),
        });
    }
    Ok(())
}

fn finite_or_overflow(values: &[f64], what: &str) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(k) => Err(Error::Overflow(format!(
            "{what} of order {} is not finite",
            k + 1
        ))),
        None => Ok(()),
    }
}

/// `e^{Θ̃t}` for the bordered matrix `Θ̃ = [[0, 0], [θ₀, Θ]]` of the first `n`
/// equations, i.e. the homogeneous system with the constant moment
/// `E[X^0] = 1` adjoined as row 0. Its first column below the corner is
/// `Θ^{-1}(e^{Θt} - I) θ₀` and the rest is `e^{Θt}`.
fn bordered_exp(system: &CoefficientSystem, n: usize, t: f64) -> Result<MatryoshkanMatrix> {
    let theta = system.theta();
    if let Some(k) = (0..n).find(|&k| theta.diag_entry(k) == 0.0) {
        return Err(Error::SingularMatrix { index: k });
    }
    let mut cache = ExpCache::exp(t);
    cache.push_row(&[], 0.0)?;
    let mut row = Vec::with_capacity(n);
    for k in 0..n {
        row.clear();
        row.push(system.theta0()[k]);
        row.extend_from_slice(theta.sub_row(k));
        cache
            .push_row(&row, theta.diag_entry(k))
            .map_err(|e| match e {
                Error::DegenerateSpectrum { first, second } => Error::DegenerateSpectrum {
                    first: first - 1,
                    second: second - 1,
                },
                other => other,
            })?;
    }
    Ok(cache.into_value())
}

/// `(1, x0, ..., x0^{n-1})`.
fn bordered_init(init: &InitialMomentVector, n: usize) -> Vec<f64> {
    let mut x = Vec::with_capacity(n);
    x.push(1.0);
    x.extend_from_slice(&init.powers()[..n - 1]);
    x
}

/// `s(t) = e^{Θt} s(0) - Θ^{-1}(I - e^{Θt}) θ₀`, evaluating one matrix
/// exponential at `t`.
///
/// Both terms come out of the bordered exponential of [`bordered_exp`], so the
/// inhomogeneous part is never formed as a difference of stationary-sized
/// quantities.
pub fn transient_vector(
    system: &CoefficientSystem,
    init: &InitialMomentVector,
    t: f64,
) -> Result<MomentVector> {
    check_time(t)?;
    check_init(system, init)?;
    let n = system.order();
    let exp = bordered_exp(system, n, t)?;
    let x = bordered_init(init, n + 1);
    let mut values = exp.mul_vec(&x)?;
    values.remove(0);
    finite_or_overflow(&values, "transient moment")?;
    Ok(MomentVector {
        time: MomentTime::At(t),
        values,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `E[X_t^n]` from the order `n - 1` blocks and row `n`:
///
/// ```text
/// θ_n (Θ_{n-1} - θ_{n,n} I)^{-1} (e^{Θ_{n-1} t} - e^{θ_{n,n} t} I)(x_{n-1} + θ₀_{n-1} / θ_{n,n})
///   + x0^n e^{θ_{n,n} t} - θ₀_n (1 - e^{θ_{n,n} t}) / θ_{n,n}
///   + (θ_n / θ_{n,n}) Θ_{n-1}^{-1} (I - e^{Θ_{n-1} t}) θ₀_{n-1}
/// ```
///
/// The formula is applied to the bordered system of [`bordered_exp`], which
/// has no shift, so the shift and inverse terms vanish and the block
/// exponential `e^{Θ̃_{n-1} t}` never has to be formed: the resolvent term is
/// the off-diagonal part of row `n` of `e^{Θ̃_n t}` applied to
/// `(1, x0, ..., x0^{n-1})`.
///
/// For `n = 1` this is the scalar ODE solution.
pub fn transient_scalar(
    system: &CoefficientSystem,
    init: &InitialMomentVector,
    t: f64,
    n: usize,
) -> Result<f64> {
    check_time(t)?;
    if n == 0 || n > system.order() {
        return Err(Error::InvalidDimension {
            expected: system.order(),
            found: n,
        });
    }
    if init.order() < n {
        return Err(Error::InvalidDimension {
            expected: n,
            found: init.order(),
        });
    }
    let d = system.theta().diag_entry(n - 1);
    let edt = (d * t).exp();
    if !edt.is_finite() {
        return Err(Error::Overflow(format!("exp({d} * {t}) is not finite")));
    }
    let exp = bordered_exp(system, n, t)?;
    let resolvent_term = dot(exp.sub_row(n), &bordered_init(init, n));
    let value = init.powers()[n - 1] * edt + resolvent_term;
    if !value.is_finite() {
        return Err(Error::Overflow(format!(
            "transient moment of order {n} is not finite"
        )));
    }
    Ok(value)
}

/// Stability gate for the stationary solves: every diagonal entry strictly
/// negative and pairwise distinct.
fn check_stationary(theta: &MatryoshkanMatrix) -> Result<()> {
    for k in 0..theta.order() {
        let d = theta.diag_entry(k);
        if d == 0.0 {
            return Err(Error::SingularMatrix { index: k });
        }
        if d.is_nan() || d > 0.0 {
            return Err(Error::NonStationary { index: k, value: d });
        }
    }
    if let Some((first, second)) = theta.first_coincidence() {
        return Err(Error::DegenerateSpectrum { first, second });
    }
    Ok(())
}

/// `s(∞) = -Θ^{-1} θ₀` by forward substitution.
pub fn steady_vector(system: &CoefficientSystem) -> Result<MomentVector> {
    check_stationary(system.theta())?;
    let mut values = system.theta().solve_lower(system.theta0())?;
    for v in values.iter_mut() {
        *v = -*v;
    }
    finite_or_overflow(&values, "stationary moment")?;
    Ok(MomentVector {
        time: MomentTime::Stationary,
        values,
    })
}

/// `E[X_∞^n] = (θ_n Θ_{n-1}^{-1} θ₀_{n-1} - θ₀_n) / θ_{n,n}`, using the
/// recursively built inverse of the leading block.
pub fn steady_nth(system: &CoefficientSystem, n: usize) -> Result<f64> {
    if n == 0 || n > system.order() {
        return Err(Error::InvalidDimension {
            expected: system.order(),
            found: n,
        });
    }
    let leading = system.leading(n);
    check_stationary(leading.theta())?;
    let theta = leading.theta();
    let k = n - 1;
    let mut inverse = InverseCache::new();
    for i in 0..k {
        inverse.push_row(theta.sub_row(i), theta.diag_entry(i))?;
    }
    let solved = inverse.value().mul_vec(&leading.theta0()[..k])?;
    let value = (dot(theta.sub_row(k), &solved) - leading.theta0()[k]) / theta.diag_entry(k);
    if !value.is_finite() {
        return Err(Error::Overflow(format!(
            "stationary moment of order {n} is not finite"
        )));
    }
    Ok(value)
}

/// Builds `s(∞)` bottom-up via `E[X^{k+1}] = -(θ_{k+1} s_k + θ₀_{k+1}) / θ_{k+1,k+1}`.
pub fn steady_recursive(system: &CoefficientSystem) -> Result<MomentVector> {
    check_stationary(system.theta())?;
    let theta = system.theta();
    let mut values: Vec<f64> = Vec::with_capacity(system.order());
    for k in 0..system.order() {
        let next = -(dot(theta.sub_row(k), &values) + system.theta0()[k]) / theta.diag_entry(k);
        values.push(next);
    }
    finite_or_overflow(&values, "stationary moment")?;
    Ok(MomentVector {
        time: MomentTime::Stationary,
        values,
    })
}

/// Structural report on a moment system. Never fails.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostics {
    pub order: usize,
    /// `(row, column)` of nonzero entries above the diagonal, zero-based.
    pub triangularity_violations: Vec<(usize, usize)>,
    pub zero_diagonals: Vec<usize>,
    pub coincident_diagonals: Vec<(usize, usize)>,
    /// Diagonal entries `>= 0`; any of these rules out a steady state.
    pub nonnegative_diagonals: Vec<usize>,
    /// Smallest moment order (one-based) whose stationary magnitude estimate exceeds 1e300.
    pub overflow_order: Option<usize>,
}

impl Diagnostics {
    pub fn singular(&self) -> bool {
        !self.zero_diagonals.is_empty()
    }

    pub fn distinct(&self) -> bool {
        self.coincident_diagonals.is_empty()
    }

    pub fn stationary(&self) -> bool {
        self.triangularity_violations.is_empty()
            && self.nonnegative_diagonals.is_empty()
            && self.coincident_diagonals.is_empty()
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.triangularity_violations.is_empty() {
            out.push(format!(
                "not lower triangular at {:?}",
                self.triangularity_violations
            ));
        }
        if let Some(&k) = self.zero_diagonals.first() {
            out.push(format!("SingularMatrix: diagonal entry {k} is zero"));
        }
        if let Some(&(i, j)) = self.coincident_diagonals.first() {
            out.push(format!(
                "DegenerateSpectrum: diagonal entries {i} and {j} coincide"
            ));
        }
        if let Some(k) = self.overflow_order {
            out.push(format!(
                "Overflow: stationary moment of order {k} exceeds 1e300"
            ));
        }
        out
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "order: {}; ", self.order)?;
        if self.stationary() {
            write!(f, "stationary: yes")?;
        } else {
            write!(f, "stationary: no")?;
        }
        if self.singular() {
            write!(f, "; singular")?;
        }
        if !self.distinct() {
            write!(f, "; coincident diagonals")?;
        }
        if let Some(k) = self.overflow_order {
            write!(f, "; overflow at order {k}")?;
        }
        Ok(())
    }
}

pub fn validate(system: &CoefficientSystem) -> Diagnostics {
    inspect(system.theta(), system.theta0(), Vec::new())
}

/// Validates a dense `Θ` that has not yet been checked for triangularity.
pub fn validate_dense<R: AsRef<[f64]>>(theta: &[R], theta0: &[f64]) -> Diagnostics {
    let n = theta.len();
    let mut violations = Vec::new();
    let mut packed = MatryoshkanMatrix::empty();
    for (i, row) in theta.iter().enumerate() {
        let row = row.as_ref();
        for (j, &v) in row.iter().enumerate().skip(i + 1) {
            if v != 0.0 {
                violations.push((i, j));
            }
        }
        let mut lower = vec![0.0; i + 1];
        for (dst, src) in lower.iter_mut().zip(row) {
            *dst = *src;
        }
        packed
            .push_row(&lower[..i], lower[i])
            .expect("row length matches order");
    }
    let mut shift = theta0.to_vec();
    shift.resize(n, 0.0);
    inspect(&packed, &shift, violations)
}

fn inspect(
    theta: &MatryoshkanMatrix,
    theta0: &[f64],
    violations: Vec<(usize, usize)>,
) -> Diagnostics {
    let n = theta.order();
    let diag = theta.diagonal_values();
    let zero_diagonals = (0..n).filter(|&k| diag[k] == 0.0).collect();
    let nonnegative_diagonals = (0..n).filter(|&k| !(diag[k] < 0.0)).collect();
    let mut coincident_diagonals = Vec::new();
    for j in 1..n {
        for i in 0..j {
            if coincident(diag[i], diag[j]) {
                coincident_diagonals.push((i, j));
            }
        }
    }

    let mut overflow_order = None;
    if diag.iter().all(|&d| d != 0.0) {
        let mut values: Vec<f64> = Vec::with_capacity(n);
        for k in 0..n {
            let v = -(dot(theta.sub_row(k), &values) + theta0[k]) / diag[k];
            if !(v.abs() <= OVERFLOW_MAGNITUDE) {
                overflow_order = Some(k + 1);
                break;
            }
            values.push(v);
        }
    }

    Diagnostics {
        order: n,
        triangularity_violations: violations,
        zero_diagonals,
        coincident_diagonals,
        nonnegative_diagonals,
        overflow_order,
    }
}
