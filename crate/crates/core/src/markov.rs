//! Homogeneous Markov chains in discrete and continuous time.
//!
//! Conventions:
//!
//! * Discrete time evolves a probability *row* vector from the right,
//!   `u(k) = u(0)·Pᵏ`.
//! * Continuous time evolves a *column* of masses with the master operator
//!   `L = Qᵀ`, so `|Ω_t) = e^{Lt}|Ω_0)`.
//!
//! Both act on the same mass vector; the column form of the discrete step is
//! `(Pᵀ)ᵏ`. [`StochasticMatrix::column_propagator`] and
//! [`Generator::master_operator`] convert between the two.

use std::fs;
use std::path::Path;

use log::warn;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::linalg::{self, expm, matrix_power, norm_inf};
use crate::prob::Observable;
use crate::{Error, Result};

/// Row sums of stochastic matrices must be within this of 1.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;
/// Masses of a [`SystemPKet`] must sum to 1 within this.
pub const PKET_TOLERANCE: f64 = 1e-10;
/// Amplitude vectors must have unit norm within this.
pub const AMPLITUDE_TOLERANCE: f64 = 1e-8;
/// Negative evolved masses beyond this are reported before clamping.
pub const NEGATIVE_MASS_TOLERANCE: f64 = 1e-12;

fn check_square(m: &DMatrix<f64>) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::Dimension {
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    Ok(m.nrows())
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("time must be finite and >= 0, got {t}")))
    }
}

/// Row-stochastic transition matrix, `p_ij = P(j, t+1 | i, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    entries: DMatrix<f64>,
}

impl StochasticMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        check_square(&entries)?;
        for (i, row) in entries.row_iter().enumerate() {
            let sum: f64 = row.iter().sum();
            if row.iter().any(|&p| p < 0.0) || (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::InvalidArgument(format!(
                    "row {i} is not a probability vector (sum {sum})"
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(matrix_from_rows(rows)?)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            entries: DMatrix::identity(n, n),
        }
    }

    /// Rows drawn uniformly from the simplex via normalised exponentials.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut entries = DMatrix::zeros(n, n);
        for i in 0..n {
            let weights: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
            let total: f64 = weights.iter().sum();
            for (j, w) in weights.iter().enumerate() {
                entries[(i, j)] = w / total;
            }
        }
        Self { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn power(&self, k: u64) -> DMatrix<f64> {
        matrix_power(&self.entries, k)
    }

    /// `Pᵀ`, the one-step propagator on column masses.
    pub fn column_propagator(&self) -> DMatrix<f64> {
        self.entries.transpose()
    }
}

/// Rate matrix of a continuous-time chain: non-negative off-diagonal rates,
/// rows summing to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    entries: DMatrix<f64>,
}

impl Generator {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let n = check_square(&entries)?;
        for i in 0..n {
            let row = entries.row(i);
            let sum: f64 = row.iter().sum();
            let scale = entries[(i, i)].abs().max(1.0);
            if (0..n).any(|j| j != i && row[j] < 0.0) || sum.abs() > ROW_SUM_TOLERANCE * scale {
                return Err(Error::InvalidArgument(format!(
                    "row {i} is not a generator row (sum {sum})"
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(matrix_from_rows(rows)?)
    }

    /// Builds a generator from off-diagonal rates; the diagonal is filled
    /// with minus the row sum.
    pub fn from_rates(mut rates: DMatrix<f64>) -> Result<Self> {
        let n = check_square(&rates)?;
        for i in 0..n {
            rates[(i, i)] = 0.0;
            let out: f64 = rates.row(i).iter().sum();
            rates[(i, i)] = -out;
        }
        Self::new(rates)
    }

    /// The two-state chain `[[-a, a], [b, -b]]`.
    pub fn two_state(a: f64, b: f64) -> Result<Self> {
        Self::new(DMatrix::from_row_slice(2, 2, &[-a, a, b, -b]))
    }

    pub fn zero(n: usize) -> Self {
        Self {
            entries: DMatrix::zeros(n, n),
        }
    }

    /// Off-diagonal rates uniform on `[0, max_rate)`.
    pub fn random<R: Rng + ?Sized>(n: usize, max_rate: f64, rng: &mut R) -> Self {
        let rates = DMatrix::from_fn(n, n, |_, _| max_rate * rng.random::<f64>());
        Self::from_rates(rates).expect("non-negative rates")
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// `L = Qᵀ`, the master operator on column masses.
    pub fn master_operator(&self) -> DMatrix<f64> {
        self.entries.transpose()
    }

    /// `e^{Qt}` without the non-negative time restriction.
    fn exp_raw(&self, t: f64) -> Result<DMatrix<f64>> {
        expm(&(&self.entries * t))
    }
}

/// Probability vector `|Ω_t)` of a chain at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemPKet {
    masses: Vec<f64>,
    time: f64,
}

impl SystemPKet {
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        Self::at(masses, 0.0)
    }

    pub fn at(masses: Vec<f64>, time: f64) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::InvalidArgument("P-ket has no states".into()));
        }
        let sum: f64 = masses.iter().sum();
        if masses.iter().any(|m| !m.is_finite() || *m < 0.0) || (sum - 1.0).abs() > PKET_TOLERANCE
        {
            return Err(Error::Normalization { sum });
        }
        Ok(Self { masses, time })
    }

    /// All mass on state `k`.
    pub fn point(n: usize, k: usize) -> Result<Self> {
        if k >= n {
            return Err(Error::Dimension {
                expected: n,
                got: k + 1,
            });
        }
        let mut masses = vec![0.0; n];
        masses[k] = 1.0;
        Self::new(masses)
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1.0 / n as f64; n])
    }

    /// A random point of the simplex.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let w: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let total: f64 = w.iter().sum();
        Self {
            masses: w.iter().map(|x| x / total).collect(),
            time: 0.0,
        }
    }

    /// Wraps the output of an evolution: negative round-off is clamped to
    /// zero and the masses renormalised.
    fn evolved(raw: impl IntoIterator<Item = f64>, time: f64) -> Self {
        let mut masses: Vec<f64> = raw.into_iter().collect();
        for (i, m) in masses.iter_mut().enumerate() {
            if *m < 0.0 {
                if *m < -NEGATIVE_MASS_TOLERANCE {
                    warn!("state {i}: evolved mass {m:e} clamped to 0");
                }
                *m = 0.0;
            }
        }
        let total: f64 = masses.iter().sum();
        if total > 0.0 {
            for m in &mut masses {
                *m /= total;
            }
        }
        Self { masses, time }
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn dim(&self) -> usize {
        self.masses.len()
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    fn column(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.masses)
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        if self.dim() == n {
            Ok(())
        } else {
            Err(Error::Dimension {
                expected: n,
                got: self.dim(),
            })
        }
    }
}

/// Quantum amplitudes `c(i, t) = ⟨i|Ψ_t⟩` with unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeVector {
    amplitudes: Vec<Complex64>,
}

impl AmplitudeVector {
    /// Rejects vectors whose squared norm is off 1 by more than
    /// [`AMPLITUDE_TOLERANCE`].
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm_sq: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum();
        if amplitudes.is_empty()
            || !norm_sq.is_finite()
            || (norm_sq - 1.0).abs() > AMPLITUDE_TOLERANCE
        {
            return Err(Error::Normalization { sum: norm_sq });
        }
        Ok(Self { amplitudes })
    }

    /// Rescales any nonzero vector to unit norm.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Normalization { sum: norm * norm });
        }
        Ok(Self {
            amplitudes: amplitudes.into_iter().map(|c| c / norm).collect(),
        })
    }

    pub(crate) fn from_unchecked(amplitudes: Vec<Complex64>) -> Self {
        Self { amplitudes }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }
}

/// `m(i) = |c(i)|²`. Phases are discarded.
pub fn amplitude_to_mass(c: &AmplitudeVector) -> SystemPKet {
    SystemPKet::evolved(c.amplitudes.iter().map(|a| a.norm_sqr()), 0.0)
}

/// A chain in either time domain.
#[derive(Debug, Clone, PartialEq)]
pub enum Chain {
    Discrete(StochasticMatrix),
    Continuous(Generator),
}

/// Elapsed time: whole steps for discrete chains, real time for continuous.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Elapsed {
    Steps(u64),
    Time(f64),
}

impl Elapsed {
    fn as_f64(self) -> f64 {
        match self {
            Elapsed::Steps(k) => k as f64,
            Elapsed::Time(t) => t,
        }
    }
}

impl Chain {
    pub fn dim(&self) -> usize {
        match self {
            Chain::Discrete(p) => p.dim(),
            Chain::Continuous(q) => q.dim(),
        }
    }

    /// Row-stochastic `P(t)`: `Pᵏ` or `e^{Qt}`.
    pub fn transition(&self, elapsed: Elapsed) -> Result<DMatrix<f64>> {
        match (self, elapsed) {
            (Chain::Discrete(p), Elapsed::Steps(k)) => Ok(p.power(k)),
            (Chain::Continuous(q), Elapsed::Time(t)) => {
                transition_matrix(q, t).map(|p| p.entries)
            }
            _ => Err(Error::InvalidArgument(
                "discrete chains take steps, continuous chains take time".into(),
            )),
        }
    }

    /// `Û(t)` acting on column masses: `P(t)ᵀ`.
    pub fn propagator(&self, elapsed: Elapsed) -> Result<DMatrix<f64>> {
        match (self, elapsed) {
            (Chain::Discrete(p), Elapsed::Steps(k)) => Ok(matrix_power(&p.column_propagator(), k)),
            (Chain::Continuous(q), Elapsed::Time(t)) => {
                check_time(t)?;
                expm(&(q.master_operator() * t))
            }
            _ => Err(Error::InvalidArgument(
                "discrete chains take steps, continuous chains take time".into(),
            )),
        }
    }

    /// Evolves a P-ket with the chain's own evolution routine.
    pub fn evolve(&self, initial: &SystemPKet, elapsed: Elapsed) -> Result<SystemPKet> {
        match (self, elapsed) {
            (Chain::Discrete(p), Elapsed::Steps(k)) => dtmc_evolve(initial, p, k),
            (Chain::Continuous(q), Elapsed::Time(t)) => ctmc_evolve(initial, q, t),
            _ => Err(Error::InvalidArgument(
                "discrete chains take steps, continuous chains take time".into(),
            )),
        }
    }
}

/// `u(k) = u(0)·Pᵏ`, applied one step at a time.
pub fn dtmc_evolve(initial: &SystemPKet, p: &StochasticMatrix, k: u64) -> Result<SystemPKet> {
    initial.check_dim(p.dim())?;
    let mut row = initial.column().transpose();
    for _ in 0..k {
        row = &row * &p.entries;
    }
    Ok(SystemPKet::evolved(
        row.iter().copied(),
        initial.time + k as f64,
    ))
}

/// `|Ω_t) = e^{Lt}|Ω_0)` with `L = Qᵀ`.
pub fn ctmc_evolve(initial: &SystemPKet, q: &Generator, t: f64) -> Result<SystemPKet> {
    check_time(t)?;
    initial.check_dim(q.dim())?;
    let u = expm(&(q.master_operator() * t))?;
    let out = u * initial.column();
    Ok(SystemPKet::evolved(out.iter().copied(), initial.time + t))
}

/// `P(t) = e^{Qt}`.
pub fn transition_matrix(q: &Generator, t: f64) -> Result<StochasticMatrix> {
    check_time(t)?;
    let mut p = q.exp_raw(t)?;
    for mut row in p.row_iter_mut() {
        for x in row.iter_mut() {
            if *x < 0.0 {
                *x = 0.0;
            }
        }
        let sum: f64 = row.iter().sum();
        row /= sum;
    }
    StochasticMatrix::new(p)
}

/// Finite-difference step used for derivative checks: `1e-5·max(1, t)`.
pub fn derivative_step(t: f64) -> f64 {
    1e-5 * t.max(1.0)
}

fn transition_derivative(q: &Generator, t: f64) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    check_time(t)?;
    let h = derivative_step(t);
    let plus = q.exp_raw(t + h)?;
    let minus = q.exp_raw(t - h)?;
    let derivative = (plus - minus) / (2.0 * h);
    Ok((q.exp_raw(t)?, derivative))
}

/// `‖P'(t) − P(t)·Q‖∞`, with `P'` from a central difference.
pub fn kolmogorov_forward_residual(q: &Generator, t: f64) -> Result<f64> {
    let (p, dp) = transition_derivative(q, t)?;
    Ok(norm_inf(&(dp - p * &q.entries)))
}

/// `‖P'(t) − Q·P(t)‖∞`, with `P'` from a central difference.
pub fn kolmogorov_backward_residual(q: &Generator, t: f64) -> Result<f64> {
    let (p, dp) = transition_derivative(q, t)?;
    Ok(norm_inf(&(dp - &q.entries * p)))
}

/// `‖P^{m+n} − P^m·P^n‖∞`.
pub fn chapman_kolmogorov_discrete(p: &StochasticMatrix, m: u64, n: u64) -> f64 {
    let whole = p.power(m + n);
    let split = p.power(m) * p.power(n);
    norm_inf(&(whole - split))
}

/// `‖P(s+t) − P(s)·P(t)‖∞`.
pub fn chapman_kolmogorov_continuous(q: &Generator, s: f64, t: f64) -> Result<f64> {
    check_time(s)?;
    check_time(t)?;
    let whole = q.exp_raw(s + t)?;
    let split = q.exp_raw(s)? * q.exp_raw(t)?;
    Ok(norm_inf(&(whole - split)))
}

/// Absolute distribution `P(i, t) = Σ_k p_0(k)·P_ki(t)`, built from the
/// transition matrix rather than by evolving the state.
pub fn apd_evolution(initial: &SystemPKet, chain: &Chain, elapsed: Elapsed) -> Result<SystemPKet> {
    let n = chain.dim();
    initial.check_dim(n)?;
    let p = chain.transition(elapsed)?;
    let masses = (0..n).map(|i| {
        initial
            .masses
            .iter()
            .enumerate()
            .map(|(k, pk)| pk * p[(k, i)])
            .sum::<f64>()
    });
    Ok(SystemPKet::evolved(
        masses.collect::<Vec<_>>(),
        initial.time + elapsed.as_f64(),
    ))
}

/// `X̂(t) = Û⁻¹(t)·X̂·Û(t)` for a diagonal observable.
#[derive(Debug, Clone)]
pub struct HeisenbergObservable {
    base: Vec<f64>,
    propagator: DMatrix<f64>,
    inverse: DMatrix<f64>,
    operator: DMatrix<f64>,
}

impl HeisenbergObservable {
    pub fn new(x: &Observable, chain: &Chain, elapsed: Elapsed) -> Result<Self> {
        let n = chain.dim();
        if x.values().len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: x.values().len(),
            });
        }
        let propagator = chain.propagator(elapsed)?;
        let inverse = linalg::checked_inverse(&propagator)?;
        let diag = DMatrix::from_diagonal(&DVector::from_column_slice(x.values()));
        let operator = &inverse * diag * &propagator;
        Ok(Self {
            base: x.values().to_vec(),
            propagator,
            inverse,
            operator,
        })
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn propagator(&self) -> &DMatrix<f64> {
        &self.propagator
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    /// The time-dependent operator `X̂(t)`.
    pub fn operator(&self) -> &DMatrix<f64> {
        &self.operator
    }

    /// `P(x,t|Ω_0) = P(x|Û(t)|Ω_0)` for every outcome `x`: the evolved
    /// P-bras against the fixed initial state.
    pub fn basis_weights(&self, initial: &SystemPKet) -> Result<Vec<f64>> {
        initial.check_dim(self.base.len())?;
        Ok((&self.propagator * initial.column()).iter().copied().collect())
    }

    /// `P(Ω|X̂(t)|Ω_0)` expanded in the eigenbasis `|x,t) = Û⁻¹|x)` of
    /// `X̂(t)`: `Σ_x x·P(Ω|x,t)·P(x,t|Ω_0)` with `P(Ω|x,t) = 1`.
    ///
    /// Summing the explicit [`operator`](Self::operator) instead gives the
    /// same value in exact arithmetic, but `P(Ω|Û⁻¹` formed numerically
    /// carries an error of order `cond(Û)·ε`, see
    /// [`conservation_defect`](Self::conservation_defect).
    pub fn expectation(&self, initial: &SystemPKet) -> Result<f64> {
        let weights = self.basis_weights(initial)?;
        Ok(self.base.iter().zip(&weights).map(|(x, w)| x * w).sum())
    }

    /// `max_x |P(Ω|x,t) − 1|` computed from the numerical inverse.
    pub fn conservation_defect(&self) -> f64 {
        self.inverse
            .column_iter()
            .map(|c| (c.sum() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Heisenberg-picture expectation: the observable evolves, the state stays.
pub fn heisenberg_expectation(
    x: &Observable,
    chain: &Chain,
    initial: &SystemPKet,
    elapsed: Elapsed,
) -> Result<f64> {
    HeisenbergObservable::new(x, chain, elapsed)?.expectation(initial)
}

/// Schrödinger-picture expectation `Σ x_i·m_i(t)`.
pub fn schrodinger_expectation(x: &Observable, state: &SystemPKet) -> Result<f64> {
    state.check_dim(x.values().len())?;
    Ok(x.values().iter().zip(&state.masses).map(|(v, m)| v * m).sum())
}

/// Parses a square matrix from JSON (`[[...], ...]`) or CSV (one row per
/// line, `#` comments allowed). The format is chosen by file extension.
pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let rows = read_rows(path)?;
    matrix_from_rows(&rows)
}

/// Parses a vector from JSON (`[...]` or `{"masses": [...]}`) or a single
/// CSV row.
pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    if is_json(path) {
        let value: serde_json::Value = serde_json::from_str(&fs::read_to_string(path)?)?;
        let target = value.get("masses").unwrap_or(&value);
        return Ok(serde_json::from_value(target.clone())?);
    }
    let rows = read_rows(path)?;
    if rows.len() != 1 {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: rows.len().min(2),
            message: format!("expected a single row, found {}", rows.len()),
        });
    }
    Ok(rows.into_iter().next().unwrap_or_default())
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

fn read_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path)?;
    if is_json(path) {
        return Ok(serde_json::from_str(&text)?);
    }
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .map(|cell| {
                cell.trim().parse::<f64>().map_err(|e| Error::Parse {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    message: format!("`{}`: {e}", cell.trim()),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if let Some(bad) = rows.iter().find(|r| r.len() != n) {
        return Err(Error::Dimension {
            expected: n,
            got: bad.len(),
        });
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}
