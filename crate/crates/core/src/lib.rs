//! Numerical toolkit for Walsh analysis on the discrete cube and metric X_p
//! inequalities on discrete tori.
//!
//! * [`walsh`]: Fourier–Walsh transform, norms, differences, averaging and
//!   spectral multipliers (`Rad_k`, `Delta_S^alpha`, heat, Riesz).
//! * [`quadrature`]: `Delta^{-alpha}` through the heat semigroup.
//! * [`torus`]: functions on `Z_{2r}^n`, the smoothing operator `T_S`, the chaos
//!   lift and the difference statistics.
//! * [`inequalities`]: both sides of each inequality as an [`InequalityReport`].
//! * [`search`]: extremal-ratio search and dimension sweeps.
//! * [`geometry`]: closed-form embedding distortion calculators.
//! * [`verify`]: seeded property campaigns with JSON reports.

pub mod error;
pub mod geometry;
pub mod inequalities;
pub mod quadrature;
pub mod search;
pub mod subset;
pub mod torus;
pub mod verify;
pub mod walsh;

pub use error::{Error, Result};
pub use inequalities::InequalityReport;
pub use subset::Subset;
pub use torus::{DifferenceStats, Generator, Mode, Sampling, Scaling, TorusFunction};
pub use walsh::{CubeFunction, Multiplier, WalshSpectrum};
