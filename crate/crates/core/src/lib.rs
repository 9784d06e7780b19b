//! Learning Pareto-optimal downlink precoders for a two-cell MISO
//! interference channel.
//!
//! The crate is `no_std` with `alloc`. It contains the channel simulator,
//! the closed-form MRT / ZF / SLNR baselines with the MRT-ZF Pareto sweep,
//! the observation features (with optional phase ambiguity elimination),
//! a small multilayer perceptron with hand-written backpropagation, and the
//! multi-agent DDPG learner with a centralized critic. File formats and the
//! command line live in the `misoifc` companion crate.
#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

mod error;

pub mod environment;
pub mod features;
pub mod harness;
pub mod madrl;
pub mod numerics;
pub mod precoders;

pub use error::{Error, Result};
