//! Non-coherent over-the-air majority-vote computation.
//!
//! Each sensor encodes a vector of `m` ternary votes into the amplitudes of a
//! complementary sequence of length `2^m`. The sequences superpose over a
//! fading multiple-access channel, and the receiver recovers the `m` majority
//! votes by comparing the received energy on two halves of the subcarriers.
//! No channel state is needed at either end and the transmitted OFDM symbols
//! keep a PMEPR of at most 3 dB.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` aliases below are what most callers want.
//!
//! Module map:
//!
//! - [`cs`]: sequence synthesis from pseudo-Boolean functions, AACF, PMEPR.
//! - [`codec`]: vote vectors to transmitted sequences.
//! - [`channel`]: fading and noise draws, signal superposition.
//! - [`detector`]: half-energy metrics, majority decisions, closed-form means.
//! - [`experiment`]: seeded Monte Carlo drivers (CER, PMEPR, metric means).
//! - [`guidance`]: closed-loop UAV waypoint guidance driven by majority votes.

pub mod channel;
pub mod codec;
pub mod cs;
pub mod detector;
mod error;
pub mod experiment;
pub mod guidance;
pub mod rng;
mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use channel::{ChannelKind, ChannelModel, ChannelRealization};
pub use codec::{Alpha, Encoder, EncoderConfig, Vote, VoteVector};
pub use cs::{AmplitudeWeight, BitVector, ComplexSequence, CsParams, GrayTable, Permutation};
pub use detector::{MetricPair, VoteCensus};

pub type ComplexSequence64 = cs::ComplexSequence<f64>;
pub type ComplexSequence32 = cs::ComplexSequence<f32>;
pub type CsParams64 = cs::CsParams<f64>;
pub type CsParams32 = cs::CsParams<f32>;
pub type EncoderConfig64 = codec::EncoderConfig<f64>;
pub type Encoder64 = codec::Encoder<f64>;
pub type ChannelModel64 = channel::ChannelModel<f64>;
pub type ChannelRealization64 = channel::ChannelRealization<f64>;
pub type MetricPair64 = detector::MetricPair<f64>;
pub type GuidanceConfig64 = guidance::GuidanceConfig<f64>;
pub type TrajectoryLog64 = guidance::TrajectoryLog<f64>;
