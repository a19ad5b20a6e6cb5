//! Seeded discrete-event kernel: SFC arrivals and departures, server and VNF
//! failure/repair processes.

mod event;
mod kernel;
mod rng;

pub use event::{Event, EventKind, EventQueue};
pub use kernel::{
    placement_energy, Placer, Resolution, SimConfig, Simulation, SimulationReport, TraceRecord,
};
pub use rng::{sample_exponential, RngStream};
