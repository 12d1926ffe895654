//! Nested lower-triangular ("Matryoshkan") matrices.
//!
//! A matrix of order `n` is stored as its packed lower triangle in row-major
//! order, so the order-`k` leading block of any matrix is literally the first
//! `k(k+1)/2` stored values. Every recursive routine here (inverse, power,
//! exponential, eigenvectors) appends one row at a time: row `n` of the result
//! is a function of the order `n-1` result plus the new source row, which is
//! what lets the caches below grow in `O(n^2)` per order.
//!
//! Indices in this module are zero-based.

use crate::error::{Error, Result};

/// Relative tolerance under which two diagonal entries are treated as equal.
pub const DISTINCT_TOLERANCE: f64 = 1e-9;

/// Returns true when two diagonal entries are too close for the resolvent
/// `(M_{n-1} - m_{n,n} I)^{-1}` to be trusted.
pub fn coincident(a: f64, b: f64) -> bool {
    (a - b).abs() <= DISTINCT_TOLERANCE * 1f64.max(a.abs()).max(b.abs())
}

#[inline]
fn row_start(i: usize) -> usize {
    i * (i + 1) / 2
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct MatryoshkanMatrix {
    order: usize,
    data: Vec<f64>,
}

/// Eigenvectors `U` (unit lower triangular) and eigenvalues `D` with `M U = U diag(D)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair {
    pub vectors: MatryoshkanMatrix,
    pub values: Vec<f64>,
}

impl MatryoshkanMatrix {
    /// The order-0 matrix every sequence starts from.
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn scalar(value: f64) -> Self {
        Self {
            order: 1,
            data: vec![value],
        }
    }

    pub fn zeros(order: usize) -> Self {
        Self {
            order,
            data: vec![0.0; row_start(order)],
        }
    }

    pub fn identity(order: usize) -> Self {
        Self::diagonal(&vec![1.0; order])
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m.data[row_start(i) + i] = v;
        }
        m
    }

    /// Builds from ragged rows, row `i` holding its `i + 1` lower-triangle entries.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let mut m = Self::empty();
        for row in rows {
            let row = row.as_ref();
            if row.len() != m.order + 1 {
                return Err(Error::InvalidDimension {
                    expected: m.order + 1,
                    found: row.len(),
                });
            }
            m.data.extend_from_slice(row);
            m.order += 1;
        }
        Ok(m)
    }

    /// Builds from a square dense matrix; every entry above the diagonal must be zero.
    pub fn from_dense<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n {
                return Err(Error::InvalidDimension {
                    expected: n,
                    found: row.len(),
                });
            }
            if let Some(j) = (i + 1..n).find(|&j| row[j] != 0.0) {
                return Err(Error::InvalidInput(format!(
                    "entry ({i}, {j}) above the diagonal is nonzero"
                )));
            }
            m.data[row_start(i)..row_start(i) + i + 1].copy_from_slice(&row[..=i]);
        }
        Ok(m)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Packed row-major lower triangle.
    pub fn packed(&self) -> &[f64] {
        &self.data
    }

    /// Entry `(i, j)`; zero above the diagonal.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.order && j < self.order, "index out of range");
        if j > i {
            0.0
        } else {
            self.data[row_start(i) + j]
        }
    }

    pub fn diag_entry(&self, i: usize) -> f64 {
        self.data[row_start(i) + i]
    }

    pub fn diagonal_values(&self) -> Vec<f64> {
        (0..self.order).map(|i| self.diag_entry(i)).collect()
    }

    /// Row `i` through the diagonal (length `i + 1`).
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[row_start(i)..row_start(i + 1)]
    }

    /// Row `i` strictly below the diagonal (length `i`).
    pub fn sub_row(&self, i: usize) -> &[f64] {
        &self.data[row_start(i)..row_start(i) + i]
    }

    /// Leading principal block of order `k`.
    pub fn leading(&self, k: usize) -> Self {
        assert!(k <= self.order, "leading block larger than matrix");
        Self {
            order: k,
            data: self.data[..row_start(k)].to_vec(),
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.order)
            .map(|i| {
                let mut r = vec![0.0; self.order];
                r[..=i].copy_from_slice(self.row(i));
                r
            })
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn is_invertible(&self) -> bool {
        (0..self.order).all(|i| self.diag_entry(i) != 0.0)
    }

    /// First pair of coincident diagonal entries, if any.
    pub fn first_coincidence(&self) -> Option<(usize, usize)> {
        let d = self.diagonal_values();
        for j in 1..d.len() {
            for i in 0..j {
                if coincident(d[i], d[j]) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn has_distinct_spectrum(&self) -> bool {
        self.first_coincidence().is_none()
    }

    /// Appends a bottom row, returning the order `n + 1` matrix.
    pub fn extend(&self, row: &[f64], diag: f64) -> Result<Self> {
        let mut m = self.clone();
        m.push_row(row, diag)?;
        Ok(m)
    }

    pub fn push_row(&mut self, row: &[f64], diag: f64) -> Result<()> {
        if row.len() != self.order {
            return Err(Error::InvalidDimension {
                expected: self.order,
                found: row.len(),
            });
        }
        self.data.extend_from_slice(row);
        self.data.push(diag);
        self.order += 1;
        Ok(())
    }

    fn check_same_order(&self, other: &Self) -> Result<()> {
        if self.order != other.order {
            return Err(Error::InvalidDimension {
                expected: self.order,
                found: other.order,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_order(other)?;
        Ok(Self {
            order: self.order,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_order(other)?;
        Ok(Self {
            order: self.order,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            order: self.order,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_same_order(other)?;
        let n = self.order;
        let mut out = Self::zeros(n);
        for i in 0..n {
            let a = self.row(i);
            let base = row_start(i);
            for (k, &aik) in a.iter().enumerate() {
                if aik == 0.0 {
                    continue;
                }
                for (j, &bkj) in other.row(k).iter().enumerate() {
                    out.data[base + j] += aik * bkj;
                }
            }
        }
        Ok(out)
    }

    /// `M x` for a column vector.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.order {
            return Err(Error::InvalidDimension {
                expected: self.order,
                found: x.len(),
            });
        }
        Ok((0..self.order)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `y M` for a row vector.
    pub fn vec_mul(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.order {
            return Err(Error::InvalidDimension {
                expected: self.order,
                found: y.len(),
            });
        }
        Ok(row_times_lower(y, self, self.order))
    }

    /// Solves `M x = b` by forward substitution.
    pub fn solve_lower(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.order {
            return Err(Error::InvalidDimension {
                expected: self.order,
                found: b.len(),
            });
        }
        let mut x = Vec::with_capacity(self.order);
        for i in 0..self.order {
            let row = self.row(i);
            let d = row[i];
            if d == 0.0 {
                return Err(Error::SingularMatrix { index: i });
            }
            let acc: f64 = row[..i].iter().zip(&x).map(|(a, b)| a * b).sum();
            x.push((b[i] - acc) / d);
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<Self> {
        let mut cache = InverseCache::new();
        for i in 0..self.order {
            cache.push_row(self.sub_row(i), self.diag_entry(i))?;
        }
        Ok(cache.into_value())
    }

    /// `M^k` through the closed-form block identity; requires distinct diagonal entries.
    pub fn power(&self, k: u32) -> Result<Self> {
        if let Some((first, second)) = self.first_coincidence() {
            return Err(Error::DegenerateSpectrum { first, second });
        }
        match k {
            0 => return Ok(Self::identity(self.order)),
            1 => return Ok(self.clone()),
            _ => {}
        }
        let exponent =
            i32::try_from(k).map_err(|_| Error::InvalidInput(format!("exponent {k} too large")))?;
        let mut cache = FunctionCache::new(IntegerPower(exponent));
        for i in 0..self.order {
            cache.push_row(self.sub_row(i), self.diag_entry(i))?;
        }
        Ok(cache.into_value())
    }

    /// `M^k` by binary exponentiation; works for any spectrum.
    pub fn power_repeated(&self, mut k: u32) -> Self {
        let mut result = Self::identity(self.order);
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                result = result.multiply(&base).expect("same order");
            }
            k >>= 1;
            if k > 0 {
                base = base.multiply(&base).expect("same order");
            }
        }
        result
    }

    /// `e^{M t}` by the row recursion; requires distinct diagonal entries.
    pub fn exp_scaled(&self, t: f64) -> Result<Self> {
        let mut cache = ExpCache::exp(t);
        for i in 0..self.order {
            cache.push_row(self.sub_row(i), self.diag_entry(i))?;
        }
        Ok(cache.into_value())
    }

    /// Row vector `m (M - d I)^{-1}`, solved by back substitution.
    pub fn resolvent_row(&self, m: &[f64], d: f64) -> Result<Vec<f64>> {
        if m.len() != self.order {
            return Err(Error::InvalidDimension {
                expected: self.order,
                found: m.len(),
            });
        }
        resolvent_row(self, m, d)
    }

    pub fn eigendecompose(&self) -> Result<EigenPair> {
        let mut vectors = Self::empty();
        for n in 0..self.order {
            let d = self.diag_entry(n);
            let mut row = row_times_lower(self.sub_row(n), &vectors, n);
            for (j, r) in row.iter_mut().enumerate() {
                let dj = self.diag_entry(j);
                if coincident(dj, d) {
                    return Err(Error::DegenerateSpectrum {
                        first: j,
                        second: n,
                    });
                }
                *r /= dj - d;
            }
            vectors.push_row(&row, 1.0)?;
        }
        Ok(EigenPair {
            vectors,
            values: self.diagonal_values(),
        })
    }
}

/// `y L` where `L` is the order-`n` leading block of `lower` and `y` has length `n`.
fn row_times_lower(y: &[f64], lower: &MatryoshkanMatrix, n: usize) -> Vec<f64> {
    let mut z = vec![0.0; n];
    for (i, &yi) in y.iter().enumerate().take(n) {
        if yi == 0.0 {
            continue;
        }
        for (j, &lij) in lower.row(i).iter().enumerate() {
            z[j] += yi * lij;
        }
    }
    z
}

/// Solves the row system `y (M - d I) = m` against the leading block `prefix`
/// by back substitution over the columns.
fn resolvent_row(prefix: &MatryoshkanMatrix, m: &[f64], d: f64) -> Result<Vec<f64>> {
    let n = prefix.order();
    debug_assert_eq!(m.len(), n);
    let mut residual = m.to_vec();
    let mut y = vec![0.0; n];
    for i in (0..n).rev() {
        let row = prefix.row(i);
        if coincident(row[i], d) {
            return Err(Error::DegenerateSpectrum {
                first: i,
                second: n,
            });
        }
        let yi = residual[i] / (row[i] - d);
        y[i] = yi;
        if yi != 0.0 {
            for j in 0..i {
                residual[j] -= yi * row[j];
            }
        }
    }
    Ok(y)
}

/// Scalar map applied to each diagonal entry by [`FunctionCache`].
pub trait DiagonalMap {
    fn apply(&self, d: f64) -> f64;
}

/// `d -> e^{d t}`.
#[derive(Clone, Copy, Debug)]
pub struct ScaledExp(pub f64);

impl DiagonalMap for ScaledExp {
    fn apply(&self, d: f64) -> f64 {
        (d * self.0).exp()
    }
}

/// `d -> d^k`.
#[derive(Clone, Copy, Debug)]
pub struct IntegerPower(pub i32);

impl DiagonalMap for IntegerPower {
    fn apply(&self, d: f64) -> f64 {
        d.powi(self.0)
    }
}

/// Incrementally built `f(M)` for a scalar function `f` applied through the
/// block recursion: bottom row `m_n (M_{n-1} - m_{n,n} I)^{-1} (f(M_{n-1}) - f(m_{n,n}) I)`.
#[derive(Clone, Debug)]
pub struct FunctionCache<F> {
    f: F,
    source: MatryoshkanMatrix,
    value: MatryoshkanMatrix,
}

/// `e^{Mt}` by the divided-difference row recursion alone. Exact in exact
/// arithmetic, but the back substitution divides by gaps between diagonal
/// entries and loses accuracy when they cluster; [`ExpCache`] evaluates the
/// same bottom row without those divisions.
pub type DirectExpCache = FunctionCache<ScaledExp>;

impl DirectExpCache {
    pub fn exp(t: f64) -> Self {
        Self::new(ScaledExp(t))
    }
}

/// Base step norm for the series in [`ExpCache`].
const SERIES_NORM: f64 = 0.5;
const SERIES_TERMS: usize = 40;

/// Incremental `e^{Mt}`.
///
/// With `A = M_{n-1}` and `d = m_{n,n}`, the new bottom row is
/// `m_n (A - dI)^{-1} (e^{At} - e^{dt} I) = t e^{dt} m_n φ((A - dI) t)`, where
/// `φ(X) = Σ X^k / (k+1)!`. The series is summed at `τ = t / 2^s`, small
/// enough that it converges quickly, and the row is carried back up to `t`
/// with the bordered squaring identity `r(2τ) = r(τ) (e^{Aτ} + e^{dτ} I)`.
/// Each level `e^{A t / 2^j}` is kept so the next row can reuse it.
///
/// The work is done on `B = S M S^{-1}` with `S` diagonal and powers of two,
/// chosen row by row so that off-diagonal entries are comparable to the
/// diagonal; moment systems whose entries grow like `e^{k^2}` would otherwise
/// need dozens of squarings. Undoing the scaling is exact.
#[derive(Clone, Debug)]
pub struct ExpCache {
    t: f64,
    source: MatryoshkanMatrix,
    value: MatryoshkanMatrix,
    /// Diagonal of `S`.
    scales: Vec<f64>,
    /// `B`.
    balanced: MatryoshkanMatrix,
    /// `levels[j] = e^{B t / 2^j}`.
    levels: Vec<MatryoshkanMatrix>,
    /// Column sums of `|B|` strictly below the diagonal.
    column_mass: Vec<f64>,
    /// Largest `|m_{i,i}|` so far.
    spectral_scale: f64,
}

impl ExpCache {
    pub fn exp(t: f64) -> Self {
        Self {
            t,
            source: MatryoshkanMatrix::empty(),
            value: MatryoshkanMatrix::empty(),
            scales: Vec::new(),
            balanced: MatryoshkanMatrix::empty(),
            levels: vec![MatryoshkanMatrix::empty()],
            column_mass: Vec::new(),
            spectral_scale: 0.0,
        }
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn order(&self) -> usize {
        self.source.order()
    }

    pub fn source(&self) -> &MatryoshkanMatrix {
        &self.source
    }

    pub fn value(&self) -> &MatryoshkanMatrix {
        &self.value
    }

    pub fn into_value(self) -> MatryoshkanMatrix {
        self.value
    }

    /// Number of halvings currently in use.
    pub fn halvings(&self) -> usize {
        self.levels.len() - 1
    }

    /// Power-of-two scale for a new row and the row in balanced form.
    fn balance(&self, row: &[f64], diag: f64) -> (f64, Vec<f64>) {
        let relative: Vec<f64> = row.iter().zip(&self.scales).map(|(v, s)| v / s).collect();
        let largest = relative.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let target = self.spectral_scale.max(diag.abs()).max(1.0);
        let scale = if largest > 0.0 && largest.is_finite() {
            let e = (target / largest).log2().round().clamp(-1000.0, 1000.0);
            2f64.powi(e as i32)
        } else {
            1.0
        };
        (scale, relative.iter().map(|v| v * scale).collect())
    }

    fn halvings_for(&self, scaled_row: &[f64], d: f64) -> Result<usize> {
        let n = self.source.order();
        let norm = (0..n)
            .map(|j| {
                self.column_mass[j] + scaled_row[j].abs() + (self.balanced.diag_entry(j) - d).abs()
            })
            .fold(0.0, f64::max)
            * self.t.abs();
        if !norm.is_finite() {
            return Err(Error::Overflow(format!(
                "matrix norm is not finite at row {n}"
            )));
        }
        let mut s = 0;
        let mut scaled = norm;
        while scaled > SERIES_NORM {
            scaled *= 0.5;
            s += 1;
        }
        Ok(s)
    }

    fn rebuild(&mut self, halvings: usize) -> Result<()> {
        let source = std::mem::take(&mut self.source);
        let mut fresh = Self::exp(self.t);
        fresh.levels = vec![MatryoshkanMatrix::empty(); halvings + 1];
        for i in 0..source.order() {
            let (scale, scaled) = fresh.balance(source.sub_row(i), source.diag_entry(i));
            fresh.extend(source.sub_row(i), &scaled, scale, source.diag_entry(i))?;
        }
        *self = fresh;
        Ok(())
    }

    pub fn push_row(&mut self, row: &[f64], diag: f64) -> Result<()> {
        let n = self.source.order();
        if row.len() != n {
            return Err(Error::InvalidDimension {
                expected: n,
                found: row.len(),
            });
        }
        if let Some(i) = (0..n).find(|&i| coincident(self.source.diag_entry(i), diag)) {
            return Err(Error::DegenerateSpectrum {
                first: i,
                second: n,
            });
        }
        let (scale, scaled) = self.balance(row, diag);
        let needed = self.halvings_for(&scaled, diag)?;
        if needed > self.halvings() {
            self.rebuild(needed)?;
            let (scale, scaled) = self.balance(row, diag);
            return self.extend(row, &scaled, scale, diag);
        }
        self.extend(row, &scaled, scale, diag)
    }

    fn extend(&mut self, row: &[f64], scaled_row: &[f64], scale: f64, diag: f64) -> Result<()> {
        let n = self.source.order();
        let s = self.halvings();
        let tau = |j: usize| self.t / 2f64.powi(j as i32);

        // φ((B - dI)τ_s) applied to the row
        let ts = tau(s);
        let mut term = scaled_row.to_vec();
        let mut sum = scaled_row.to_vec();
        for k in 1..=SERIES_TERMS {
            let mut next = row_times_lower(&term, &self.balanced, n);
            for (v, t) in next.iter_mut().zip(&term) {
                *v = (*v - diag * t) * ts / (k + 1) as f64;
            }
            term = next;
            let mut small = true;
            for (acc, v) in sum.iter_mut().zip(&term) {
                *acc += v;
                small &= v.abs() <= f64::EPSILON * 1e-2 * acc.abs();
            }
            if small {
                break;
            }
        }
        let mut rows = vec![Vec::new(); s + 1];
        let factor = ts * (diag * ts).exp();
        rows[s] = sum.iter().map(|v| v * factor).collect();
        for j in (0..s).rev() {
            let below = &rows[j + 1];
            let mut up = row_times_lower(below, &self.levels[j + 1], n);
            let fd = (diag * tau(j + 1)).exp();
            for (u, b) in up.iter_mut().zip(below) {
                *u += fd * b;
            }
            rows[j] = up;
        }

        let fd = (diag * self.t).exp();
        if !fd.is_finite() {
            return Err(Error::Overflow(format!(
                "exp({diag} * {}) at diagonal entry {n} is not finite",
                self.t
            )));
        }
        let unscaled: Vec<f64> = rows[0]
            .iter()
            .zip(&self.scales)
            .map(|(v, sj)| v * sj / scale)
            .collect();
        if unscaled.iter().any(|v| !v.is_finite()) {
            return Err(Error::Overflow(format!(
                "row {n} of the exponential is not finite"
            )));
        }
        for (j, r) in rows.iter().enumerate() {
            self.levels[j].push_row(r, (diag * tau(j)).exp())?;
        }
        self.value.push_row(&unscaled, fd)?;
        for (mass, v) in self.column_mass.iter_mut().zip(scaled_row) {
            *mass += v.abs();
        }
        self.column_mass.push(0.0);
        self.scales.push(scale);
        self.spectral_scale = self.spectral_scale.max(diag.abs());
        self.balanced.push_row(scaled_row, diag)?;
        self.source.push_row(row, diag)?;
        Ok(())
    }
}

impl<F: DiagonalMap> FunctionCache<F> {
    pub fn new(f: F) -> Self {
        Self {
            f,
            source: MatryoshkanMatrix::empty(),
            value: MatryoshkanMatrix::empty(),
        }
    }

    pub fn order(&self) -> usize {
        self.source.order()
    }

    pub fn source(&self) -> &MatryoshkanMatrix {
        &self.source
    }

    pub fn value(&self) -> &MatryoshkanMatrix {
        &self.value
    }

    pub fn into_value(self) -> MatryoshkanMatrix {
        self.value
    }

    /// Extends the source by one row and the value by the matching row.
    pub fn push_row(&mut self, row: &[f64], diag: f64) -> Result<()> {
        let n = self.source.order();
        if row.len() != n {
            return Err(Error::InvalidDimension {
                expected: n,
                found: row.len(),
            });
        }
        let fd = self.f.apply(diag);
        if !fd.is_finite() {
            return Err(Error::Overflow(format!(
                "scalar function of diagonal entry {n} ({diag}) is not finite"
            )));
        }
        let mut w = row_times_lower(row, &self.value, n);
        for (wj, mj) in w.iter_mut().zip(row) {
            *wj -= fd * mj;
        }
        let z = resolvent_row(&self.source, &w, diag)?;
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::Overflow(format!(
                "row {n} of the matrix function is not finite"
            )));
        }
        self.source.push_row(row, diag)?;
        self.value.push_row(&z, fd)?;
        Ok(())
    }
}

/// Incremental `M^{-1}`: bottom row `-(1/m_{n,n}) m_n M_{n-1}^{-1}`, diagonal `1/m_{n,n}`.
#[derive(Clone, Debug, Default)]
pub struct InverseCache {
    source: MatryoshkanMatrix,
    value: MatryoshkanMatrix,
}

impl InverseCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn order(&self) -> usize {
        self.source.order()
    }

    pub fn source(&self) -> &MatryoshkanMatrix {
        &self.source
    }

    pub fn value(&self) -> &MatryoshkanMatrix {
        &self.value
    }

    pub fn into_value(self) -> MatryoshkanMatrix {
        self.value
    }

    pub fn push_row(&mut self, row: &[f64], diag: f64) -> Result<()> {
        let n = self.source.order();
        if row.len() != n {
            return Err(Error::InvalidDimension {
                expected: n,
                found: row.len(),
            });
        }
        if diag == 0.0 {
            return Err(Error::SingularMatrix { index: n });
        }
        let inv_d = 1.0 / diag;
        let mut b = row_times_lower(row, &self.value, n);
        for v in b.iter_mut() {
            *v *= -inv_d;
        }
        if b.iter().any(|v| !v.is_finite()) || !inv_d.is_finite() {
            return Err(Error::Overflow(format!(
                "row {n} of the inverse is not finite"
            )));
        }
        self.source.push_row(row, diag)?;
        self.value.push_row(&b, inv_d)?;
        Ok(())
    }
}
