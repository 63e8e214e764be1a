//! Joint design of a MIMO-OFDM transceiver and a filter-and-forward relay.
//!
//! A source sends `N` OFDM subcarriers through a full-duplex relay that
//! applies a bank of FIR filters to its received samples and retransmits
//! immediately. Because the relay never demodulates, its filter couples all
//! subcarriers. This crate designs the relay taps, per-subcarrier precoders
//! and receive filters, and source power allocation by alternating
//! optimization, either for weighted sum MSE ([`altopt::algorithm1`]) or for
//! sum rate ([`altopt::algorithm2`]).
//!
//! Every analytic formula is cross-checked by [`oracle`], which pushes random
//! frames through the literal time-domain signal chain.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the aliases at the
//! crate root fix `f64`.

pub mod altopt;
pub mod blockmat;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod oracle;
pub mod quadforms;
pub mod relayopt;
pub mod sample;
pub mod scalar;
pub mod sysmodel;
pub mod txrxopt;

pub use error::{Error, Result};
pub use scalar::{CMat, CVec, Real, C};

pub type Config = sysmodel::SystemConfig<f64>;
pub type Channel = sysmodel::ChannelRealization<f64>;
pub type Relay = sysmodel::RelayFilter<f64>;
pub type Weights = quadforms::WeightMatrices<f64>;
pub type Qcqp = quadforms::QcqpInstance<f64>;
pub type Design = altopt::DesignResult<f64>;
pub type Matrix = CMat<f64>;
pub type Vector = CVec<f64>;
