//! Conservative solutions of the generalized Camassa–Holm equation
//!
//! ```text
//! u_t - mu u_txx + 2k u_x + eta u_xxx = (A u + B u^m) u_x + s (2 u_x u_xx + u u_xxx)
//! ```
//!
//! computed in Lagrangian variables `(u, v, q, y)` on a label grid `xi`, where
//! `v = 2 arctan u_x` passes smoothly through `-pi` at wave breaking.
//! Around the core solver sit an Eulerian reconstruction with energy-measure
//! bookkeeping, a characteristic tracer in the energy coordinate `beta`,
//! and an independent finite-difference reference solver.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases
//! at the crate root fix `f64`.

pub mod characteristics;
pub mod diagnostics;
pub mod error;
pub mod evolution;
pub mod grid;
pub mod init;
pub mod kernel;
pub mod oracle;
pub mod params;
pub mod profiles;
pub mod reconstruction;
pub mod scalar;
pub mod state;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Params = params::ModelParams<f64>;
pub type Grid = grid::XiGrid<f64>;
pub type State = state::LagrangianState<f64>;
pub type Initial = init::InitialData<f64>;
pub type Kernel = kernel::KernelFields<f64>;
pub type Derivative = evolution::StateDerivative<f64>;
pub type Traj = evolution::Trajectory<f64>;
pub type Field = reconstruction::EulerianField<f64>;
pub type Measure = reconstruction::EnergyMeasure<f64>;
pub type Chart = characteristics::BetaChart<f64>;
pub type Trace = characteristics::CharacteristicTrace<f64>;
