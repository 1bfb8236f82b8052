//! Exact small-system simulation of entanglement transfer between a qubit
//! target pair and a qubit or qutrit source pair coupled by the isotropic
//! Heisenberg exchange `H = s_a . s_b`.
//!
//! Particles 1 and 2 form the target pair, 3 and 4 the source pair; the
//! couplings act on (1,3) and (2,4). Everything is generic over the scalar
//! type ([`Real`], implemented for `f32` and `f64`); the aliases below fix it
//! to `f64`.
//!
//! ```
//! use spin_transfer::{evolve_reduced, negativity, QubitPairState, QutritPairState, SourceState};
//!
//! let tp = QubitPairState::new(std::f64::consts::FRAC_PI_4);
//! let sp = SourceState::Qutrit(QutritPairState::maximally_entangled());
//! let rho = evolve_reduced(&tp, &sp, 2.0 * std::f64::consts::PI / 3.0).unwrap();
//! assert!((negativity(&rho, 1).unwrap().value - 1.0).abs() < 1e-9);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod entanglement;
pub mod error;
pub mod model;
pub mod protocol;
pub mod qla;
pub mod qutritmax;
pub mod scalar;
pub mod transfer;
pub mod verify;

pub use entanglement::{negativity, negativity_xstate, schmidt_angle_from_negativity};
pub use error::{Error, Result};
pub use protocol::{iterate_transfer, IterationMode};
pub use qutritmax::{invariants, maximize_e12_half_period, SearchBudget};
pub use scalar::Real;
pub use transfer::evolve_reduced;

pub type Operator = qla::Operator<f64>;
pub type EigenDecomposition = qla::EigenDecomposition<f64>;
pub type TransferModel = model::TransferModel<f64>;
pub type XStateCoeffs = entanglement::XStateCoeffs<f64>;
pub type Negativity = entanglement::Negativity<f64>;
pub type QubitPairState = transfer::QubitPairState<f64>;
pub type QutritPairState = transfer::QutritPairState<f64>;
pub type SourceState = transfer::SourceState<f64>;
pub type TimeGrid = transfer::TimeGrid<f64>;
pub type TransferTrace = transfer::TransferTrace<f64>;
pub type InvariantPoint = qutritmax::InvariantPoint<f64>;
pub type MaximizationResult = qutritmax::MaximizationResult<f64>;
pub type IterationRecord = protocol::IterationRecord<f64>;
