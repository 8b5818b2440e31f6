//! Simulator and security analyser for entanglement-swapping quantum key
//! distribution with random grouping.
//!
//! The crate is organised bottom-up:
//!
//! * [`quantum`]: dense states, Bell measurements, reduced states, entropies.
//! * [`swapping`]: entanglement swapping and its outcome-correlation tables.
//! * [`protocol`]: the Alice/Bob session (preparation, detection, key).
//! * [`adversary`]: intercept-and-resend and general ancilla attacks.
//! * [`analysis`]: the information–disturbance bound and sweeps over it.

pub mod adversary;
pub mod analysis;
pub mod error;
pub mod protocol;
pub mod quantum;
pub mod rng;
pub mod swapping;

pub use error::{Error, Result};
pub use quantum::{BellLabel, DensityMatrix, Ensemble, PureState};
pub use rng::{Phase, SeedTree};
