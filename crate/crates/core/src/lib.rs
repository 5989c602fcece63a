//! Probability bracket numerics.
//!
//! Conditional probabilities `P(A|B)` are treated as a bra/ket pairing: an
//! event functional `P(A|` against an evidence state `|B)`. Everything in this
//! crate is that one idea evaluated numerically:
//!
//! * [`prob`]: finite sample spaces, events, expectations and product spaces.
//! * [`markov`]: homogeneous Markov chains in discrete and continuous time,
//!   Kolmogorov equations, Chapman–Kolmogorov checks and the Heisenberg picture.
//! * [`processes`]: Poisson, Wiener and Brownian kernels, simulators and an
//!   explicit diffusion PDE solver.
//! * [`wick`]: the imaginary-time image of Schrödinger dynamics: induced
//!   diffusion generators, free kernels, sliced kernel composition and
//!   split non-Hermitian Hamiltonians.
//! * [`docs`]: bag-of-words document relevance and threshold clustering.
//!
//! All values are immutable after construction and every operation is a pure
//! function, so everything here is `Send + Sync`.

pub mod docs;
mod error;
pub mod linalg;
pub mod markov;
pub mod prob;
pub mod processes;
pub mod quadrature;
pub mod wick;

pub use error::{Error, Result};
