//! Availability- and energy-aware placement of service function chains (SFCs) on
//! an NFV infrastructure.
//!
//! The crate contains a seeded discrete-event simulator of servers, customers and
//! SFC requests ([`sim`], [`model`]), a reliability-block-diagram availability
//! engine ([`rbd`]), an episodic MDP around the simulator ([`env`]), a small
//! dense network with hand-written gradients ([`nn`]), A2C/PPO2 agents plus greedy
//! and random baselines ([`agents`]), and the experiment runner behind the CLI
//! ([`experiments`]).

pub mod agents;
pub mod env;
pub mod error;
pub mod experiments;
pub mod model;
pub mod nn;
pub mod rbd;
pub mod sim;

pub use error::{Error, Result};
