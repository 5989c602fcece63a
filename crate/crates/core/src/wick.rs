//! Imaginary-time (`it → t`) image of Schrödinger dynamics.
//!
//! Under the rotation, `−Ĥ/ħ` for a particle of mass `m` in potential `V`
//! becomes the induced diffusion generator
//! `Ĝ = (1/2μ_h)∂ₓ² − μ_h·u(x)` with `μ_h = m/ħ` and `u = V/m`. The free
//! particle amplitude turns into a Gaussian transition density with
//! diffusion coefficient `D_h = ħ/2m`, and slicing the time interval gives a
//! path-integral composition of those densities.
//!
//! A non-Hermitian `Ĥ = Ĥ₁ − iĤ₂` with commuting symmetric parts splits into
//! a unitary factor driven by `Ĥ₁` and a decaying diffusion factor driven by
//! `Ĥ₂`; see [`SplitHamiltonian`].

use std::f64::consts::PI;

use log::warn;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::linalg::{expm, norm_inf};
use crate::markov::AmplitudeVector;
use crate::processes::Grid1D;
use crate::quadrature::trapezoid_weights;
use crate::{Error, Result};

/// Kernel grids extend this many total-time standard deviations past the
/// endpoints by default.
pub const DEFAULT_HALF_WIDTH_SDS: f64 = 8.0;
/// Estimated lost mass above this triggers a truncation warning.
pub const TRUNCATION_WARN_MASS: f64 = 1e-10;
/// Symmetry tolerance for split Hamiltonian parts.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;
/// Commutator tolerance `‖H₁H₂ − H₂H₁‖∞`.
pub const COMMUTATOR_TOLERANCE: f64 = 1e-10;

/// Mass and reduced Planck constant of the rotated particle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InducedDiffusion {
    mass: f64,
    hbar: f64,
}

impl InducedDiffusion {
    pub fn new(mass: f64, hbar: f64) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0 && hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "mass and hbar must be positive (m = {mass}, hbar = {hbar})"
            )));
        }
        Ok(Self { mass, hbar })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// `μ_h = m/ħ`.
    pub fn mu_h(&self) -> f64 {
        self.mass / self.hbar
    }

    /// `D_h = 1/(2μ_h) = ħ/(2m)`.
    pub fn diffusion(&self) -> f64 {
        1.0 / (2.0 * self.mu_h())
    }

    /// Free transition density `P(x_b, t_b | x_a, t_a)`.
    pub fn free_kernel(&self, xa: f64, ta: f64, xb: f64, tb: f64) -> Result<f64> {
        if tb <= ta {
            return Err(Error::TimeOrdering { start: ta, end: tb });
        }
        Ok(heat_kernel(xb - xa, self.diffusion() * (tb - ta)))
    }
}

/// `(4π·Dτ)^{−1/2}·exp(−d²/(4·Dτ))`.
fn heat_kernel(d: f64, d_tau: f64) -> f64 {
    (-d * d / (4.0 * d_tau)).exp() / (4.0 * PI * d_tau).sqrt()
}

/// Finite-difference discretisation of `Ĝ` on a uniform grid.
///
/// Boundary nodes see an absent neighbour, i.e. Dirichlet (absorbing)
/// conditions just outside the grid.
#[derive(Debug, Clone)]
pub struct GridGenerator {
    grid: Grid1D,
    model: InducedDiffusion,
    matrix: DMatrix<f64>,
}

/// Builds `Ĝ = (1/2μ_h)∂ₓ² − μ_h·u(x)` with a central-difference Laplacian.
/// `potential` carries `u(x)` at each node.
pub fn wick_generator(model: InducedDiffusion, potential: &Grid1D) -> Result<GridGenerator> {
    let n = potential.len();
    if n < 3 {
        return Err(Error::InvalidArgument("generator grid needs at least 3 nodes".into()));
    }
    let mu = model.mu_h();
    let dx = potential.dx();
    let coupling = 1.0 / (2.0 * mu * dx * dx);
    let mut matrix = DMatrix::zeros(n, n);
    for (i, u) in potential.values().iter().enumerate() {
        matrix[(i, i)] = -2.0 * coupling - mu * u;
        if i > 0 {
            matrix[(i, i - 1)] = coupling;
        }
        if i + 1 < n {
            matrix[(i, i + 1)] = coupling;
        }
    }
    Ok(GridGenerator {
        grid: potential.clone(),
        model,
        matrix,
    })
}

impl GridGenerator {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn model(&self) -> InducedDiffusion {
        self.model
    }

    /// `e^{Ĝt}` applied to a density sampled on the same grid.
    pub fn evolve(&self, state: &Grid1D, t: f64) -> Result<Grid1D> {
        if state.len() != self.grid.len() {
            return Err(Error::Dimension {
                expected: self.grid.len(),
                got: state.len(),
            });
        }
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidArgument(format!("time must be >= 0, got {t}")));
        }
        let propagator = expm(&(&self.matrix * t))?;
        let out = propagator * DVector::from_column_slice(state.values());
        Grid1D::new(state.x_min(), state.x_max(), out.iter().copied().collect())
    }
}

/// Time slicing for kernel composition: `slices` intermediate points, each
/// integrated over a `grid_points`-node trapezoid grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSlice {
    pub slices: usize,
    pub grid_points: usize,
    /// Half-width of the grid beyond the endpoints, in standard deviations
    /// of the total-time kernel.
    pub half_width_sds: f64,
}

impl KernelSlice {
    pub fn new(slices: usize, grid_points: usize) -> Self {
        Self {
            slices,
            grid_points,
            half_width_sds: DEFAULT_HALF_WIDTH_SDS,
        }
    }

    /// `Δt = (t_b − t_a)/(N + 1)`.
    pub fn step(&self, ta: f64, tb: f64) -> f64 {
        (tb - ta) / (self.slices + 1) as f64
    }
}

/// Result of a sliced kernel composition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Composition {
    pub value: f64,
    /// `1 − ∫_grid` of the density propagated through all slices.
    pub lost_mass: f64,
    pub grid_points: usize,
    pub dx: f64,
}

/// `Π_n ∫dx_n` of `N + 1` free kernels of duration `Δt`.
///
/// With `slices = 0` this is the closed-form kernel itself.
pub fn compose_kernels(
    model: InducedDiffusion,
    xa: f64,
    ta: f64,
    xb: f64,
    tb: f64,
    slicing: KernelSlice,
) -> Result<Composition> {
    if tb <= ta {
        return Err(Error::TimeOrdering { start: ta, end: tb });
    }
    if slicing.slices == 0 {
        return Ok(Composition {
            value: model.free_kernel(xa, ta, xb, tb)?,
            lost_mass: 0.0,
            grid_points: 0,
            dx: 0.0,
        });
    }
    if slicing.grid_points < 3 {
        return Err(Error::InvalidArgument("kernel grid needs at least 3 nodes".into()));
    }
    let d_tau = model.diffusion() * slicing.step(ta, tb);
    let sd = (2.0 * model.diffusion() * (tb - ta)).sqrt();
    let lo = xa.min(xb) - slicing.half_width_sds * sd;
    let hi = xa.max(xb) + slicing.half_width_sds * sd;
    let n = slicing.grid_points;
    let dx = (hi - lo) / (n - 1) as f64;
    let nodes: Vec<f64> = (0..n).map(|i| lo + i as f64 * dx).collect();
    let weights = trapezoid_weights(n, dx);

    // Density at the first intermediate time, then one convolution per slice.
    let mut density: Vec<f64> = nodes.iter().map(|&x| heat_kernel(x - xa, d_tau)).collect();
    for _ in 1..slicing.slices {
        let weighted: Vec<f64> = density.iter().zip(&weights).map(|(v, w)| v * w).collect();
        density = nodes
            .par_iter()
            .map(|&y| {
                nodes
                    .iter()
                    .zip(&weighted)
                    .map(|(&x, wv)| heat_kernel(y - x, d_tau) * wv)
                    .sum()
            })
            .collect();
    }
    let retained: f64 = density.iter().zip(&weights).map(|(v, w)| v * w).sum();
    let lost_mass = (1.0 - retained).max(0.0);
    if lost_mass > TRUNCATION_WARN_MASS {
        warn!("kernel grid [{lo:.3}, {hi:.3}] truncates an estimated mass of {lost_mass:.3e}");
    }
    let value = nodes
        .iter()
        .zip(density.iter().zip(&weights))
        .map(|(&x, (v, w))| heat_kernel(xb - x, d_tau) * v * w)
        .sum();
    Ok(Composition {
        value,
        lost_mass,
        grid_points: n,
        dx,
    })
}

/// `Ĥ = Ĥ₁ − iĤ₂` with commuting real symmetric parts and their
/// eigendecompositions (eigenvalues ascending, orthonormal eigenvectors as
/// columns).
#[derive(Debug, Clone)]
pub struct SplitHamiltonian {
    h1: DMatrix<f64>,
    h2: DMatrix<f64>,
    energies: DVector<f64>,
    energy_states: DMatrix<f64>,
    decay_rates: DVector<f64>,
    decay_states: DMatrix<f64>,
}

fn check_symmetric(name: &str, m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() || m.is_empty() {
        return Err(Error::Model(format!("{name} must be a non-empty square matrix")));
    }
    let asym = (m - m.transpose()).amax();
    if asym > SYMMETRY_TOLERANCE {
        return Err(Error::Model(format!("{name} is not symmetric (|A − Aᵀ| = {asym:e})")));
    }
    Ok(())
}

fn sorted_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(order.len(), order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = DMatrix::from_columns(
        &order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    (values, vectors)
}

impl SplitHamiltonian {
    pub fn new(h1: DMatrix<f64>, h2: DMatrix<f64>) -> Result<Self> {
        check_symmetric("H1", &h1)?;
        check_symmetric("H2", &h2)?;
        if h1.shape() != h2.shape() {
            return Err(Error::Dimension {
                expected: h1.nrows(),
                got: h2.nrows(),
            });
        }
        let commutator = norm_inf(&(&h1 * &h2 - &h2 * &h1));
        if commutator > COMMUTATOR_TOLERANCE {
            return Err(Error::Model(format!(
                "H1 and H2 do not commute (‖[H1, H2]‖∞ = {commutator:e})"
            )));
        }
        let (energies, energy_states) = sorted_eigen(&h1);
        let (decay_rates, decay_states) = sorted_eigen(&h2);
        Ok(Self {
            h1,
            h2,
            energies,
            energy_states,
            decay_rates,
            decay_states,
        })
    }

    /// Builds `H₁ = V·diag(ε)·Vᵀ`, `H₂ = V·diag(λ)·Vᵀ` from a shared
    /// orthonormal basis, which guarantees commutation.
    pub fn from_shared_basis(basis: &DMatrix<f64>, energies: &[f64], rates: &[f64]) -> Result<Self> {
        let diag = |v: &[f64]| DMatrix::from_diagonal(&DVector::from_column_slice(v));
        let sym = |m: DMatrix<f64>| (&m + m.transpose()) * 0.5;
        let h1 = sym(basis * diag(energies) * basis.transpose());
        let h2 = sym(basis * diag(rates) * basis.transpose());
        Self::new(h1, h2)
    }

    pub fn dim(&self) -> usize {
        self.h1.nrows()
    }

    pub fn h1(&self) -> &DMatrix<f64> {
        &self.h1
    }

    pub fn h2(&self) -> &DMatrix<f64> {
        &self.h2
    }

    /// Eigenvalues `ε_k` of `H₁`, ascending.
    pub fn energies(&self) -> &DVector<f64> {
        &self.energies
    }

    /// Eigenvalues `λ_μ` of `H₂`, ascending.
    pub fn decay_rates(&self) -> &DVector<f64> {
        &self.decay_rates
    }

    /// Eigenvector `ψ_k` of `H₁`.
    pub fn energy_state(&self, k: usize) -> Result<DVector<f64>> {
        self.check_index(k)?;
        Ok(self.energy_states.column(k).into_owned())
    }

    /// Eigenvector `φ_μ` of `H₂`.
    pub fn decay_state(&self, mu: usize) -> Result<DVector<f64>> {
        self.check_index(mu)?;
        Ok(self.decay_states.column(mu).into_owned())
    }

    /// Projections `φ_μᵀ·ω` of a P-ket onto the `H₂` eigenbasis.
    pub fn mode_coefficients(&self, omega: &[f64]) -> Result<Vec<f64>> {
        self.check_len(omega.len())?;
        let w = DVector::from_column_slice(omega);
        Ok((self.decay_states.transpose() * w).iter().copied().collect())
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < self.dim() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "eigen-index {i} out of range for dimension {}",
                self.dim()
            )))
        }
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len == self.dim() {
            Ok(())
        } else {
            Err(Error::Dimension {
                expected: self.dim(),
                got: len,
            })
        }
    }

    /// `E[(H₁)² + (H₂)²]` on the product eigenstate `ψ_k ⊗ φ_μ`, evaluated
    /// with the matrices rather than the eigenvalues.
    pub fn product_second_moment(&self, k: usize, mu: usize) -> Result<f64> {
        let psi = self.energy_state(k)?;
        let phi = self.decay_state(mu)?;
        let h1_psi = &self.h1 * &psi;
        let h2_phi = &self.h2 * &phi;
        Ok(h1_psi.dot(&h1_psi) / psi.dot(&psi) + h2_phi.dot(&h2_phi) / phi.dot(&phi))
    }
}

/// How the diffusion factor `e^{−H₂t/ħ}|Ω_0)` is normalised after evolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Renormalization {
    /// Keep the raw decayed vector.
    #[default]
    None,
    /// Divide by the sum of entries.
    TotalMass,
    /// Divide by the Euclidean norm.
    Euclidean,
}

/// Output of [`split_evolve`].
#[derive(Debug, Clone)]
pub struct SplitState {
    pub psi: AmplitudeVector,
    pub omega: Vec<f64>,
    /// `Σω_t / Σω_0` before any renormalisation; `None` when `Σω_0 = 0`.
    pub raw_mass_factor: Option<f64>,
    /// `‖ω_t‖ / ‖ω_0‖` before any renormalisation.
    pub raw_norm_factor: f64,
}

/// `|Ψ_t⟩ = e^{−iH₁t/ħ}|Ψ_0⟩` and `|Ω_t) = e^{−H₂t/ħ}|Ω_0)`, each applied
/// through its eigenbasis.
pub fn split_evolve(
    h: &SplitHamiltonian,
    hbar: f64,
    psi0: &AmplitudeVector,
    omega0: &[f64],
    t: f64,
    renormalize: Renormalization,
) -> Result<SplitState> {
    if !(hbar.is_finite() && hbar > 0.0) {
        return Err(Error::InvalidArgument(format!("hbar must be positive, got {hbar}")));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidArgument(format!("time must be >= 0, got {t}")));
    }
    h.check_len(psi0.dim())?;
    h.check_len(omega0.len())?;
    let mass0: f64 = omega0.iter().sum();
    let norm0 = omega0.iter().map(|w| w * w).sum::<f64>().sqrt();

    let (psi, raw) = if t == 0.0 {
        (psi0.clone(), omega0.to_vec())
    } else {
        let v1 = &h.energy_states;
        let amps = DVector::from_column_slice(psi0.amplitudes());
        let coeffs = v1.transpose().map(|x| Complex64::new(x, 0.0)) * amps;
        let phased = DVector::from_iterator(
            coeffs.len(),
            coeffs
                .iter()
                .zip(h.energies.iter())
                .map(|(c, e)| c * Complex64::from_polar(1.0, -e * t / hbar)),
        );
        let psi_t = v1.map(|x| Complex64::new(x, 0.0)) * phased;

        let v2 = &h.decay_states;
        let modes = v2.transpose() * DVector::from_column_slice(omega0);
        let decayed = DVector::from_iterator(
            modes.len(),
            modes
                .iter()
                .zip(h.decay_rates.iter())
                .map(|(c, l)| c * (-l * t / hbar).exp()),
        );
        let omega_t = v2 * decayed;
        (
            AmplitudeVector::from_unchecked(psi_t.iter().copied().collect()),
            omega_t.iter().copied().collect::<Vec<_>>(),
        )
    };

    let mass_t: f64 = raw.iter().sum();
    let norm_t = raw.iter().map(|w| w * w).sum::<f64>().sqrt();
    let raw_mass_factor = (mass0 != 0.0).then(|| mass_t / mass0);
    let raw_norm_factor = if norm0 > 0.0 { norm_t / norm0 } else { 0.0 };
    let divisor = match renormalize {
        Renormalization::None => 1.0,
        Renormalization::TotalMass => mass_t,
        Renormalization::Euclidean => norm_t,
    };
    if divisor == 0.0 || !divisor.is_finite() {
        return Err(Error::Model(format!(
            "cannot renormalise a state with {renormalize:?} divisor {divisor}"
        )));
    }
    Ok(SplitState {
        psi,
        omega: raw.into_iter().map(|w| w / divisor).collect(),
        raw_mass_factor,
        raw_norm_factor,
    })
}

/// `(ε_k − iλ_μ, √(ε_k² + λ_μ²))`.
pub fn split_expectation(h: &SplitHamiltonian, k: usize, mu: usize) -> Result<(Complex64, f64)> {
    h.check_index(k)?;
    h.check_index(mu)?;
    let e = h.energies[k];
    let l = h.decay_rates[mu];
    Ok((Complex64::new(e, -l), e.hypot(l)))
}
