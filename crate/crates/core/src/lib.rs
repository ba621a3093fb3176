//! Hilbert–Schmidt non-Gaussianity of bosonic states.
//!
//! States live in a dense, truncated multi-mode Fock basis ([`FockState`]).
//! The measure compares a state with the Gaussian state that shares its
//! first and second moments:
//!
//! ```text
//! δ[ρ] = ½ Tr[(ρ − τ)²] / Tr[ρ²]
//! ```
//!
//! ```no_run
//! use nongauss::{catalog, measure};
//! let one = catalog::fock(1, 8).unwrap();
//! let r = measure::non_gaussianity(&one).unwrap();
//! assert!((r.delta - 5.0 / 12.0).abs() < 1e-9);
//! ```

pub mod elements;
pub mod error;
pub mod catalog;
pub mod channels;
pub mod fock;
pub mod gaussian;
pub mod linalg;
pub mod measure;
pub mod moments;
pub mod optimize;
pub mod passive;
pub mod phasespace;
pub mod special;
pub mod symplectic;

pub use error::{Error, Result};
pub use fock::{Basis, Flags, FockOperator, FockState, TwoModeGate};
pub use num_complex::Complex64 as C64;
pub use moments::Moments;
pub use symplectic::{EulerDecomposition, SymplecticFactorization};
pub use gaussian::{Ensemble, GaussianSpec, Recipe};
pub use channels::ChannelParams;
pub use measure::{non_gaussianity, NonGaussianityResult};
