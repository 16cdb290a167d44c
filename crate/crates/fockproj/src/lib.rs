//! Phase-space localized projectors on a truncated Fock space.
//!
//! A harmonic oscillator admits exact projection operators onto circular
//! phase-space regions: the rank-(N+1) sum of the lowest N+1 number states
//! projects onto the disc of radius sqrt(2N+2) (in units where hbar = m =
//! omega = 1), and displacing, squeezing, or rotating that operator moves the
//! region around phase space without spoiling idempotency. This crate builds
//! those projectors in a finite number-state basis, evaluates their Wigner
//! and Husimi functions, evolves them under the oscillator Hamiltonian, and
//! checks decoherence of phase-space histories built from them.
//!
//! Modules:
//! - [`fock`]: states, operators, ladder/quadrature matrices, displacement,
//!   squeeze, rotation, Hermitian eigendecomposition.
//! - [`special`]: regularized incomplete gamma, Poisson tails, weighted
//!   Laguerre sums. These carry the closed-form spectra everything else
//!   checks against.
//! - [`projector`]: quasi-projectors and exact projectors for circular,
//!   elliptical, and potential-well regions.
//! - [`phase_space`]: Wigner and Husimi evaluation on points and grids,
//!   region probabilities, coherent-state mixtures.
//! - [`dynamics`]: oscillator evolution operators, Heisenberg-picture
//!   quadratures, classical flow, projector transport.
//! - [`histories`]: class operators, the decoherence functional, and
//!   ready-made history specifications that follow a classical trajectory.
//!
//! All operators are dense `d x d` complex matrices. Truncation is the only
//! approximation anywhere: every identity in the library is exact in the
//! untruncated theory and holds to machine precision once the dimension
//! comfortably contains the states involved (as a rule, `d` at least
//! `N + 4|z|^2 + 25` for rank-(N+1) projectors displaced to label `z`).

pub mod dynamics;
pub mod error;
pub mod fock;
pub mod histories;
pub mod phase_space;
pub mod projector;
pub mod special;

pub use error::{Error, Result};
pub use fock::{ComplexLabel, FockDim, FockOperator, FockState, PhasePoint};

pub use num_complex::Complex64;

/// Dense complex matrix used for every operator in the crate.
pub type ComplexMatrix = nalgebra::DMatrix<Complex64>;
/// Dense complex vector used for state amplitudes.
pub type ComplexVector = nalgebra::DVector<Complex64>;
