//! Device-independent randomness from a continuous-wave photon-pair source.
//!
//! The pipeline: a pair-source model ([`physics`]) and its Monte Carlo event
//! stream ([`sim`]); time-binning into CHSH rounds ([`binning`]); finite-size
//! randomness rates ([`rates`]); a Trevisan extractor ([`extractor`]); the
//! spot-checking expansion protocol that ties them together ([`protocol`]); and
//! a small statistical test battery ([`stattests`]). [`io`] holds the file formats.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod binning;
pub mod error;
pub mod extractor;
pub mod io;
pub mod physics;
pub mod protocol;
pub mod rates;
pub mod sim;
pub mod stattests;

pub use binning::{ChshEstimate, RoundRecord};
pub use error::{Error, Result};
pub use extractor::{BitString, ExtractorSpec, WeakDesign};
pub use physics::{OutcomeDistribution, QuantumProbTable, SourceModel};
pub use protocol::{CalibrationResult, ProtocolRun};
pub use rates::{ProtocolParams, RateResult, SecurityBudget};
pub use sim::{DetectionEvent, EventStream, SettingsSchedule, SimulationConfig};
pub use stattests::TestReport;
