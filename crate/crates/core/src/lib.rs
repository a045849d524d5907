//! Fundamental systems of solutions, Stokes multipliers and spectral data for
//! the matrix Sturm-Liouville equation
//!
//! ```text
//! -Y'' + (omega / x^2 + Q(x)) Y = lambda Y,   x in (0, T],
//! ```
//!
//! with `omega = diag(nu_q^2 - 1/4)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`scalar_fss`]: series solutions `c_j`, Jost solutions `e_k` and the
//!   connection constants `beta0` for a single channel.
//! * [`matrix_fss`]: diagonal families `C_j`, `E_k` and the Bessel-type
//!   solutions `S_j`, `S_j*` obtained from Volterra equations.
//! * [`birkhoff`]: Birkhoff-type solutions `Y_k` for large `|rho|`.
//! * [`stokes`]: Stokes multipliers `B_kj(rho)` and their asymptotics.
//! * [`spectral`]: boundary forms, characteristic function, eigenvalues,
//!   Weyl matrix and weight matrices.
//! * [`oracle`]: independent reference solvers used for cross-checks.
//! * [`verify`]: named invariant checks; [`catalog`]: reference problems.
//!
//! Independent evaluations (contour nodes, ladder points, circles) run on
//! rayon when the default `parallel` feature is on, and sequentially
//! otherwise; see [`par`].

pub mod birkhoff;
pub mod catalog;
pub mod error;
pub mod fit;
pub mod linalg;
pub mod matrix_fss;
pub mod oracle;
pub mod par;
pub mod quadrature;
pub mod scalar_fss;
pub mod spectral;
pub mod stokes;
pub mod verify;

pub use error::{Error, ErrorKind, Result};
pub use linalg::{CMat, C64};
pub use matrix_fss::{Equation, Family, FssEvaluation, Potential, SingularOrder, SolverSettings};
pub use spectral::{BoundaryProblem, ContourSettings, SpectralDatum};

/// Version of this crate, recorded in the command-line manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");



