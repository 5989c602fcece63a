//! The three canonical homogeneous processes: Poisson counting, Wiener–Lévy
//! and Brownian motion with drift.
//!
//! Each has a closed-form transition kernel that depends only on the
//! differences `x₂ − x₁` and `t₂ − t₁`. Brownian densities also solve the
//! drift–diffusion equation `∂ₜP = −μ∂ₓP + D∂ₓₓP` with `D = σ²/2`, which
//! [`diffusion_solve`] integrates on a grid for cross-checking.

use std::f64::consts::PI;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Poisson terms below this are dropped once past the mode.
pub const POISSON_TAIL_CUTOFF: f64 = 1e-16;

/// Normal density with the given mean and variance.
pub fn gaussian_pdf(x: f64, mean: f64, variance: f64) -> f64 {
    let d = x - mean;
    (-d * d / (2.0 * variance)).exp() / (2.0 * PI * variance).sqrt()
}

fn positive(name: &str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive, got {value}")))
    }
}

fn ordered(t1: f64, t2: f64) -> Result<f64> {
    if t2 > t1 {
        Ok(t2 - t1)
    } else {
        Err(Error::TimeOrdering { start: t1, end: t2 })
    }
}

fn ln_factorial(k: u64) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// Poisson counting process with rate `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonSpec {
    rate: f64,
}

impl PoissonSpec {
    pub fn new(rate: f64) -> Result<Self> {
        Ok(Self {
            rate: positive("rate", rate)?,
        })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// `(λt)ᵏ e^{−λt} / k!`.
    pub fn pmf(&self, k: u64, t: f64) -> Result<f64> {
        let lt = self.rate * positive("t", t)?;
        Ok((k as f64 * lt.ln() - lt - ln_factorial(k)).exp())
    }

    /// `p_ij(t)`: probability of going from count `i` to count `j`.
    pub fn transition(&self, i: u64, j: u64, t: f64) -> Result<f64> {
        if j < i {
            positive("t", t)?;
            return Ok(0.0);
        }
        self.pmf(j - i, t)
    }

    /// `pmf(0..=K, t)` where `K` is the first index past the mode whose
    /// term falls below [`POISSON_TAIL_CUTOFF`].
    pub fn pmf_terms(&self, t: f64) -> Result<Vec<f64>> {
        let lt = self.rate * positive("t", t)?;
        let mut terms = Vec::new();
        let mut k = 0u64;
        loop {
            let p = self.pmf(k, t)?;
            terms.push(p);
            if k as f64 > lt && p < POISSON_TAIL_CUTOFF {
                break;
            }
            k += 1;
        }
        Ok(terms)
    }

    pub fn mean(&self, t: f64) -> f64 {
        self.rate * t
    }

    pub fn variance(&self, t: f64) -> f64 {
        self.rate * t
    }
}

/// Wiener–Lévy process with volatility `σ`, started at 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WienerSpec {
    sigma: f64,
}

impl WienerSpec {
    pub fn new(sigma: f64) -> Result<Self> {
        Ok(Self {
            sigma: positive("sigma", sigma)?,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Density of `W(t)`: `N(0, tσ²)`.
    pub fn density(&self, x: f64, t: f64) -> Result<f64> {
        let t = positive("t", t)?;
        Ok(gaussian_pdf(x, 0.0, self.sigma * self.sigma * t))
    }

    /// `P(x₂, t₂ | x₁, t₁)`.
    pub fn kernel(&self, x1: f64, t1: f64, x2: f64, t2: f64) -> Result<f64> {
        let dt = ordered(t1, t2)?;
        Ok(gaussian_pdf(x2 - x1, 0.0, self.sigma * self.sigma * dt))
    }

    pub fn variance(&self, t: f64) -> f64 {
        self.sigma * self.sigma * t
    }
}

/// Brownian motion with drift `μ` and volatility `σ`, started at 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrownianSpec {
    drift: f64,
    sigma: f64,
}

impl BrownianSpec {
    pub fn new(drift: f64, sigma: f64) -> Result<Self> {
        if !drift.is_finite() {
            return Err(Error::InvalidArgument("drift must be finite".into()));
        }
        Ok(Self {
            drift,
            sigma: positive("sigma", sigma)?,
        })
    }

    pub fn drift(&self) -> f64 {
        self.drift
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Diffusion coefficient `σ²/2` of the matching Fokker–Planck equation.
    pub fn diffusion_coefficient(&self) -> f64 {
        0.5 * self.sigma * self.sigma
    }

    /// Density of `X(t)`: `N(μt, σ²t)`.
    pub fn density(&self, x: f64, t: f64) -> Result<f64> {
        let t = positive("t", t)?;
        Ok(gaussian_pdf(x, self.drift * t, self.sigma * self.sigma * t))
    }

    /// `P(x₂, t₂ | x₁, t₁)`.
    pub fn kernel(&self, x1: f64, t1: f64, x2: f64, t2: f64) -> Result<f64> {
        let dt = ordered(t1, t2)?;
        Ok(gaussian_pdf(
            x2 - x1,
            self.drift * dt,
            self.sigma * self.sigma * dt,
        ))
    }
}

/// Uniform grid on `[x_min, x_max]` carrying one value per node.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    values: Vec<f64>,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least 3 nodes, got {}",
                values.len()
            )));
        }
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return Err(Error::InvalidArgument(format!(
                "invalid grid bounds [{x_min}, {x_max}]"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            values,
        })
    }

    pub fn zeros(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        Self::new(x_min, x_max, vec![0.0; n])
    }

    /// Samples `f` at every node.
    pub fn from_fn<F: Fn(f64) -> f64>(x_min: f64, x_max: f64, n: usize, f: F) -> Result<Self> {
        let mut grid = Self::zeros(x_min, x_max, n)?;
        for i in 0..n {
            grid.values[i] = f(grid.x(i));
        }
        Ok(grid)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.len() - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.x(i))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// `Δx·Σ values`.
    pub fn mass(&self) -> f64 {
        self.dx() * self.values.iter().sum::<f64>()
    }

    /// Mass-weighted mean position.
    pub fn center_of_mass(&self) -> f64 {
        let total: f64 = self.values.iter().sum();
        self.xs().zip(&self.values).map(|(x, v)| x * v).sum::<f64>() / total
    }

    /// Mass-weighted variance about the center of mass.
    pub fn spread(&self) -> f64 {
        let total: f64 = self.values.iter().sum();
        let mean = self.center_of_mass();
        self.xs()
            .zip(&self.values)
            .map(|(x, v)| (x - mean).powi(2) * v)
            .sum::<f64>()
            / total
    }

    /// `Δx·Σ |values − f(x)|`.
    pub fn l1_error<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.dx()
            * self
                .xs()
                .zip(&self.values)
                .map(|(x, v)| (v - f(x)).abs())
                .sum::<f64>()
    }
}

/// Largest explicit step satisfying `D·Δt/Δx² ≤ 1/2`.
pub fn stable_dt(diffusion: f64, dx: f64) -> f64 {
    0.5 * dx * dx / diffusion
}

/// Integrates `∂ₜP = −μ∂ₓP + D∂ₓₓP` with forward-time centred-space steps.
///
/// End nodes are held at zero (absorbing), so total mass is conserved up to
/// the flux through the boundary.
pub fn diffusion_solve(
    init: &Grid1D,
    diffusion: f64,
    drift: f64,
    horizon: f64,
    steps: usize,
) -> Result<Grid1D> {
    positive("diffusion coefficient", diffusion)?;
    if !(horizon.is_finite() && horizon >= 0.0) || !drift.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "horizon must be >= 0 and drift finite (T = {horizon}, mu = {drift})"
        )));
    }
    if horizon == 0.0 {
        return Ok(init.clone());
    }
    if steps == 0 {
        return Err(Error::InvalidArgument("need at least one time step".into()));
    }
    let dx = init.dx();
    let dt = horizon / steps as f64;
    let ratio = diffusion * dt / (dx * dx);
    if ratio > 0.5 {
        let suggested_dt = stable_dt(diffusion, dx);
        return Err(Error::Unstable {
            ratio,
            suggested_dt,
            suggested_steps: (horizon / suggested_dt).ceil() as usize,
        });
    }
    let advect = drift * dt / (2.0 * dx);
    let n = init.len();
    let mut current = init.values.clone();
    current[0] = 0.0;
    current[n - 1] = 0.0;
    let mut next = vec![0.0; n];
    for _ in 0..steps {
        for i in 1..n - 1 {
            let (left, mid, right) = (current[i - 1], current[i], current[i + 1]);
            next[i] = mid + ratio * (right - 2.0 * mid + left) - advect * (right - left);
        }
        std::mem::swap(&mut current, &mut next);
    }
    Grid1D::new(init.x_min, init.x_max, current)
}

/// Any of the three simulated processes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProcessSpec {
    Poisson(PoissonSpec),
    Wiener(WienerSpec),
    Brownian(BrownianSpec),
}

impl ProcessSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ProcessSpec::Poisson(_) => "poisson",
            ProcessSpec::Wiener(_) => "wiener",
            ProcessSpec::Brownian(_) => "brownian",
        }
    }

    /// Theoretical mean and variance of the value at time `t`.
    pub fn moments(&self, t: f64) -> (f64, f64) {
        match self {
            ProcessSpec::Poisson(p) => (p.mean(t), p.variance(t)),
            ProcessSpec::Wiener(w) => (0.0, w.variance(t)),
            ProcessSpec::Brownian(b) => (b.drift * t, b.sigma * b.sigma * t),
        }
    }
}

/// Simulation settings. Gaussian processes are sampled on a uniform mesh of
/// `mesh_steps` intervals; Poisson paths record every arrival.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationConfig {
    pub horizon: f64,
    pub paths: usize,
    pub seed: u64,
    pub mesh_steps: usize,
}

impl SimulationConfig {
    pub fn new(horizon: f64, paths: usize, seed: u64) -> Self {
        Self {
            horizon,
            paths,
            seed,
            mesh_steps: 100,
        }
    }
}

/// One realisation: strictly increasing times and the value at each.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub seed: u64,
    pub path_index: usize,
}

impl SamplePath {
    /// Value at the final recorded time.
    pub fn terminal(&self) -> f64 {
        *self.values.last().expect("paths are never empty")
    }
}

/// RNG for path `index`: the run seed selects the key, the index the stream.
pub fn path_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Draws `config.paths` independent sample paths on `[0, horizon]`.
///
/// Paths are generated in parallel but each uses its own derived RNG
/// stream, so output depends only on the seed.
pub fn simulate(spec: &ProcessSpec, config: &SimulationConfig) -> Result<Vec<SamplePath>> {
    let horizon = positive("horizon", config.horizon)?;
    if config.paths == 0 {
        return Err(Error::InvalidArgument("need at least one path".into()));
    }
    if config.mesh_steps == 0 {
        return Err(Error::InvalidArgument("need at least one mesh step".into()));
    }
    let paths = (0..config.paths)
        .into_par_iter()
        .map(|index| {
            let mut rng = path_rng(config.seed, index);
            let (times, values) = match spec {
                ProcessSpec::Poisson(p) => poisson_path(p.rate, horizon, &mut rng),
                ProcessSpec::Wiener(w) => {
                    gaussian_path(0.0, w.sigma, horizon, config.mesh_steps, &mut rng)
                }
                ProcessSpec::Brownian(b) => {
                    gaussian_path(b.drift, b.sigma, horizon, config.mesh_steps, &mut rng)
                }
            };
            SamplePath {
                times,
                values,
                seed: config.seed,
                path_index: index,
            }
        })
        .collect();
    Ok(paths)
}

fn poisson_path(rate: f64, horizon: f64, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let gaps = Exp::new(rate).expect("positive rate");
    let mut times = vec![0.0];
    let mut values = vec![0.0];
    let mut t = 0.0;
    let mut count = 0.0;
    loop {
        t += gaps.sample(rng);
        if t > horizon {
            break;
        }
        if t > *times.last().unwrap() {
            count += 1.0;
            times.push(t);
            values.push(count);
        }
    }
    if *times.last().unwrap() < horizon {
        times.push(horizon);
        values.push(count);
    }
    (times, values)
}

fn gaussian_path(
    drift: f64,
    sigma: f64,
    horizon: f64,
    steps: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<f64>, Vec<f64>) {
    let dt = horizon / steps as f64;
    let scale = sigma * dt.sqrt();
    let mut times = Vec::with_capacity(steps + 1);
    let mut values = Vec::with_capacity(steps + 1);
    let mut x = 0.0;
    times.push(0.0);
    values.push(0.0);
    for i in 1..=steps {
        let z: f64 = StandardNormal.sample(rng);
        x += drift * dt + scale * z;
        times.push(i as f64 * dt);
        values.push(x);
    }
    (times, values)
}

/// Writes `path_id,t,value` rows, with a header line.
pub fn write_paths_csv<W: Write>(paths: &[SamplePath], mut out: W) -> std::io::Result<()> {
    writeln!(out, "path_id,t,value")?;
    for path in paths {
        for (t, v) in path.times.iter().zip(&path.values) {
            writeln!(out, "{},{:?},{:?}", path.path_index, t, v)?;
        }
    }
    Ok(())
}

/// Sample mean and unbiased sample variance.
pub fn sample_moments(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::trapezoid;

    #[test]
    fn specs_reject_bad_parameters() {
        assert!(PoissonSpec::new(0.0).is_err());
        assert!(WienerSpec::new(-1.0).is_err());
        assert!(BrownianSpec::new(f64::NAN, 1.0).is_err());
        assert!(BrownianSpec::new(1.0, 0.0).is_err());
    }

    #[test]
    fn poisson_pmf_values() {
        let p = PoissonSpec::new(2.0).unwrap();
        assert!((p.pmf(0, 1.5).unwrap() - (-3.0f64).exp()).abs() < 1e-16);
        let unit = PoissonSpec::new(1.0).unwrap();
        assert!((unit.pmf(1, 1.0).unwrap() - 0.36787944117144233).abs() < 1e-15);
        assert!(p.pmf(1, 0.0).is_err());
        assert!(p.pmf(1, -1.0).is_err());
    }

    #[test]
    fn poisson_transition_structure() {
        let p = PoissonSpec::new(0.7).unwrap();
        assert_eq!(p.transition(5, 3, 2.0).unwrap(), 0.0);
        assert!((p.transition(4, 4, 2.0).unwrap() - (-1.4f64).exp()).abs() < 1e-16);
        assert!((p.transition(2, 5, 2.0).unwrap() - p.pmf(3, 2.0).unwrap()).abs() < 1e-18);
    }

    #[test]
    fn kernels_require_ordered_times() {
        let w = WienerSpec::new(1.0).unwrap();
        assert!(matches!(w.kernel(0.0, 1.0, 0.0, 1.0), Err(Error::TimeOrdering { .. })));
        let b = BrownianSpec::new(0.5, 1.0).unwrap();
        assert!(b.kernel(0.0, 2.0, 0.0, 1.0).is_err());
        assert!(b.density(0.0, 0.0).is_err());
    }

    #[test]
    fn zero_drift_brownian_is_wiener() {
        let w = WienerSpec::new(1.3).unwrap();
        let b = BrownianSpec::new(0.0, 1.3).unwrap();
        for x in [-2.0, -0.1, 0.0, 0.7, 3.0] {
            assert_eq!(b.density(x, 0.8).unwrap(), w.density(x, 0.8).unwrap());
        }
    }

    #[test]
    fn wiener_kernel_moments_by_quadrature() {
        let w = WienerSpec::new(0.8).unwrap();
        let (x1, t1, t2) = (0.4, 0.2, 1.7);
        let sd = (w.variance(t2 - t1)).sqrt();
        let (a, b) = (x1 - 8.0 * sd, x1 + 8.0 * sd);
        let k = |x: f64| w.kernel(x1, t1, x, t2).unwrap();
        let mass = trapezoid(k, a, b, 2001);
        let mean = trapezoid(|x| x * k(x), a, b, 2001);
        let var = trapezoid(|x| (x - x1).powi(2) * k(x), a, b, 2001);
        assert!((mass - 1.0).abs() < 1e-8);
        assert!((mean - x1).abs() < 1e-6);
        assert!((var - 0.64 * 1.5).abs() < 1e-6);
    }

    #[test]
    fn brownian_density_moments() {
        let b = BrownianSpec::new(0.6, 1.1).unwrap();
        let t: f64 = 2.0;
        let sd = 1.1 * t.sqrt();
        let (lo, hi) = (0.6 * t - 8.0 * sd, 0.6 * t + 8.0 * sd);
        let f = |x: f64| b.density(x, t).unwrap();
        assert!((trapezoid(f, lo, hi, 2001) - 1.0).abs() < 1e-8);
        assert!((trapezoid(|x| x * f(x), lo, hi, 2001) - 1.2).abs() < 1e-6);
    }

    #[test]
    fn grid_validation() {
        assert!(Grid1D::zeros(0.0, 1.0, 2).is_err());
        assert!(Grid1D::zeros(1.0, 1.0, 5).is_err());
        let g = Grid1D::zeros(-1.0, 1.0, 5).unwrap();
        assert_eq!(g.dx(), 0.5);
        assert_eq!(g.x(4), 1.0);
    }

    #[test]
    fn zero_horizon_returns_init() {
        let g = Grid1D::from_fn(-5.0, 5.0, 101, |x| gaussian_pdf(x, 0.0, 1.0)).unwrap();
        assert_eq!(diffusion_solve(&g, 3.0, 0.0, 0.0, 0).unwrap(), g);
    }

    #[test]
    fn unstable_step_is_rejected_with_suggestion() {
        let g = Grid1D::from_fn(-5.0, 5.0, 101, |x| gaussian_pdf(x, 0.0, 1.0)).unwrap();
        match diffusion_solve(&g, 1.0, 0.0, 1.0, 10) {
            Err(Error::Unstable {
                suggested_dt,
                suggested_steps,
                ..
            }) => {
                assert!((suggested_dt - 0.005).abs() < 1e-15);
                assert_eq!(suggested_steps, 200);
                assert!(diffusion_solve(&g, 1.0, 0.0, 1.0, suggested_steps).is_ok());
            }
            other => panic!("expected instability error, got {other:?}"),
        }
    }

    #[test]
    fn diffusion_conserves_mass() {
        let g = Grid1D::from_fn(-10.0, 10.0, 401, |x| gaussian_pdf(x, 0.0, 0.01)).unwrap();
        let out = diffusion_solve(&g, 0.5, 0.3, 1.0, 500).unwrap();
        assert!((out.mass() - g.mass()).abs() < 1e-8);
    }

    #[test]
    fn drift_moves_center_of_mass() {
        let g = Grid1D::from_fn(-10.0, 10.0, 401, |x| gaussian_pdf(x, 0.0, 0.01)).unwrap();
        let out = diffusion_solve(&g, 0.5, 1.0, 1.0, 500).unwrap();
        assert!((out.center_of_mass() - 1.0).abs() < 2.0 * g.dx());
    }

    #[test]
    fn simulation_is_deterministic_and_well_formed() {
        let spec = ProcessSpec::Poisson(PoissonSpec::new(3.0).unwrap());
        let cfg = SimulationConfig::new(2.0, 20, 7);
        let a = simulate(&spec, &cfg).unwrap();
        assert_eq!(a, simulate(&spec, &cfg).unwrap());
        for path in &a {
            assert!(path.times.windows(2).all(|w| w[1] > w[0]));
            assert!(path.values.windows(2).all(|w| w[1] >= w[0]));
            assert!(path.values.iter().all(|v| v.fract() == 0.0));
            assert_eq!(*path.times.last().unwrap(), 2.0);
        }
        let other = simulate(&spec, &SimulationConfig::new(2.0, 20, 8)).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn simulation_rejects_bad_config() {
        let spec = ProcessSpec::Wiener(WienerSpec::new(1.0).unwrap());
        assert!(simulate(&spec, &SimulationConfig::new(0.0, 5, 1)).is_err());
        assert!(simulate(&spec, &SimulationConfig::new(1.0, 0, 1)).is_err());
    }

    #[test]
    fn brownian_zero_drift_mean_is_near_zero() {
        let spec = ProcessSpec::Brownian(BrownianSpec::new(0.0, 1.0).unwrap());
        let paths = simulate(&spec, &SimulationConfig::new(1.0, 4000, 42)).unwrap();
        let ends: Vec<f64> = paths.iter().map(SamplePath::terminal).collect();
        let (mean, var) = sample_moments(&ends);
        assert!(mean.abs() < 4.0 * (var / 4000.0).sqrt());
    }

    #[test]
    fn csv_has_one_row_per_point() {
        let spec = ProcessSpec::Wiener(WienerSpec::new(1.0).unwrap());
        let mut cfg = SimulationConfig::new(1.0, 2, 1);
        cfg.mesh_steps = 4;
        let paths = simulate(&spec, &cfg).unwrap();
        let mut buf = Vec::new();
        write_paths_csv(&paths, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 2 * 5);
        assert!(text.starts_with("path_id,t,value\n0,0.0,0.0\n"));
    }
}
