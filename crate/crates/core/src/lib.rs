//! Secrecy rates of OFDM wire-tap channels with finite input constellations,
//! and Lagrangian dual power allocation for the resulting non-concave problem.
//!
//! Powers are linear (not dB), noise is unit-variance complex Gaussian, and
//! rates are bits per carrier unless a name says otherwise.

pub mod channel;
pub mod constellation;
pub mod error;
pub mod harness;
pub mod mi;
pub mod oracle;
pub mod secrecy;
pub mod solver;

pub use channel::{iid_rayleigh, multipath, ChannelKind, ChannelRealization};
pub use constellation::Constellation;
pub use error::{Error, Result};
pub use mi::MiEvaluator;
pub use oracle::{brute_force_solve, gap_study, GapStudyResult};
pub use secrecy::{InputModel, PowerAllocation, SubcarrierChannel};
pub use solver::{equal_pa, gaussian_optimal_pa, solve_dual, DualSolution, SolverConfig};
