//! Exact analysis of dynamic sender-receiver games with a Markovian state.
//!
//! The sender privately observes an irreducible, aperiodic Markov chain and
//! sends a cheap-talk message each stage; the receiver acts on the message.
//! This crate computes the limit set of equilibrium payoffs of such games,
//! tests the strictness and genericity conditions around it, simulates the
//! block-quota construction that attains it, and verifies the coupling used
//! to bound it from outside.

#![allow(clippy::needless_range_loop)]

pub mod assignment;
pub mod block_sim;
pub mod catalog;
pub mod chain;
pub mod copula;
pub mod coupling;
pub mod equilibrium;
pub mod error;
pub mod game;
pub mod gamefile;
pub mod lp;
pub mod rational;

pub use error::{Error, Result};
