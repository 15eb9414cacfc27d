//! Numerics for quantum speed limits at desk scale.
//!
//! The crate models states of an isolated quantum system by their energy
//! spectrum data (no Hamiltonian matrices), evaluates the survival amplitude
//! `S(t) = <psi(0)|psi(t)>`, locates the first orthogonalization time, and
//! computes the Mandelstam-Tamm, Margolus-Levitin and max-energy lower bounds
//! on that time. On top of the calculators sit the two three-level state
//! families that approach the unified bound (`alpha < 1` via a small ground
//! weight, `alpha > 1` via a sparse high level), spectrum folding/reflection
//! reductions, mixed-ensemble trace overlaps, and a constrained optimizer that
//! searches for the fastest-orthogonalizing state at a fixed `alpha`.
//!
//! Units: the Planck constant `h` defaults to 1 ([`UnitConvention`]), so a
//! two-level state with equal weights on energies 0 and `E1` orthogonalizes at
//! `t = 1/(2 E1)`. All operations are pure functions over immutable values.

pub mod bounds;
pub mod families;
pub mod mixed;
pub mod optimizer;
pub mod parse;
pub mod sampling;
pub mod state;
pub mod survival;
pub mod units;

mod error;

pub use error::{QslError, Result};
pub use state::{AmplitudeState, BasisLabel, Level, Moments, SpectralState};
pub use units::UnitConvention;
