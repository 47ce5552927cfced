//! Monte Carlo laboratory for the Anderson model `H = Δ + V` on boxes of ℤ^d
//! with Hölder-continuous single-site disorder.
//!
//! The matrix kernels ([`lattice`], [`spectral`], [`linalg`]) are generic over
//! [`Real`]; the estimators and statistics work in `f64`. The aliases at the
//! crate root fix the scalar to `f64`.

// NaN-rejecting guards are written as negated comparisons; dense kernels index by loop.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod disorder;
pub mod ensemble;
pub mod error;
pub mod green_decay;
pub mod ids;
pub mod lattice;
pub mod linalg;
pub mod point_process;
pub mod poisson;
pub mod scalar;
pub mod spectral;

pub use disorder::{sample_potential, DisorderFamily, DisorderSpec, Realization, SeedPath};
pub use ensemble::Ensemble;
pub use error::{Error, Result};
pub use lattice::{boundary_layers, build_hamiltonian, partition_box, BoxGeometry, BoxPartition, Cell, Rect};
pub use scalar::Real;
pub use spectral::{eigensolve, green, inertia_count, GreenQuery, SpectralData};

pub type Hamiltonian = lattice::FiniteHamiltonian<f64>;
pub type Spectrum = spectral::SpectralData<f64>;
pub type Complex = num_complex::Complex<f64>;
