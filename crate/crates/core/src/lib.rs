//! Spectral observability functionals for `-Δ + εV₀` with Dirichlet conditions on
//! the unit interval and the unit disk.
//!
//! The eigenbases are analytic (sines on the interval, Bessel modes on the disk);
//! perturbed modes use first-order Rayleigh-Schrödinger corrections.

pub mod basis;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod observability;
pub mod optimizer;
pub mod perturbation;
pub mod quadrature;
pub mod sampling;
pub mod selftest;
pub mod special;

pub use basis::{disk_pair, enumerate_basis, interval_pair, Domain, EigenPair, ModeIndex, Point, SpectralBasis};
pub use error::{Error, Result};
pub use observability::{
    alpha, asymptotic_constant, finite_time_constant, j_functional, mode_mass, GramBlock, ObservabilityReport,
};
pub use optimizer::{maximize_relaxed, search_indicator, AscentOptions, IndicatorSolution, RelaxedSolution};
pub use perturbation::{Coupling, KatoBound, KatoDiagnostics, PerturbedPair, Potential};
pub use quadrature::{integrate_1d, integrate_disk, Grid1D, GridDisk, Mesh, Rule, SubsetSpec};
pub use sampling::ModeFamily;
pub use special::{bessel_j, bessel_j_prime, bessel_zero};
