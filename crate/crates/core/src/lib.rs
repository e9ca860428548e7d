//! Complex-baseband simulation and DSP for in-band full-duplex
//! self-interference cancellation.
//!
//! The crate models the chain from transmit samples to the digital
//! residual: a memory-polynomial PA, the circulator leakage channel, an RF
//! canceller made of a fixed delay and a quantized vector modulator, the
//! receiver noise and ADC, and a digital canceller built from a whitened
//! parallel Hammerstein basis and an RLS adaptive filter whose inner linear
//! solve uses dichotomous coordinate descent.
//!
//! | module | contents |
//! |---|---|
//! | [`waveform`] | seeded CP-OFDM transmit signal and signal of interest |
//! | [`analog`] | PA, leakage channel, canceller path, receiver |
//! | [`tuner`] | quantized coordinate-descent tuning of the RF canceller |
//! | [`dsic`] | basis, whitening, RLS-DCD, stream canceller, op counters |
//! | [`harness`] | config files, experiments, measurements, reports |
//!
//! The guide in `book/` walks through each stage with runnable snippets.

pub mod analog;
pub mod dsic;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod signal;
pub mod tuner;
pub mod waveform;

pub use error::{Error, Result};
pub use signal::ComplexSequence;

#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/signals.md")]
    mod signals {}
    #[doc = include_str!("../../../book/src/analog-chain.md")]
    mod analog_chain {}
    #[doc = include_str!("../../../book/src/rf-tuning.md")]
    mod rf_tuning {}
    #[doc = include_str!("../../../book/src/digital-canceller.md")]
    mod digital_canceller {}
    #[doc = include_str!("../../../book/src/complexity.md")]
    mod complexity {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
