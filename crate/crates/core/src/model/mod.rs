//! Infrastructure, customers, VNF catalog and SFC requests, with resource
//! bookkeeping.

mod customer;
mod infrastructure;
pub mod params;
mod request;
mod server;
mod topology;
mod vnf;

pub use customer::{generate_customers, Customer};
pub use infrastructure::{
    build_infrastructure, GroupParams, Infrastructure, InfrastructureConfig, ServerDecl,
};
pub use request::{generate_request, Assignment, Placement, SfcRequest, MAX_CHAIN_LEN, MIN_CHAIN_LEN};
pub use server::{AllocationFailure, HostedEntry, ServerRuntime, ServerSpec};
pub use topology::Topology;
pub use vnf::{VnfCatalog, VnfType};
