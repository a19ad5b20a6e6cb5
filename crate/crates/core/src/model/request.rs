use serde::{Deserialize, Serialize};

use super::customer::Customer;
use super::vnf::VnfCatalog;
use crate::error::{Error, Result};
use crate::sim::{sample_exponential, RngStream};

/// A service function chain request: an ordered list of VNF types.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SfcRequest {
    pub id: u64,
    pub customer: usize,
    /// Catalog ids, in chain order.
    pub vnf_sequence: Vec<usize>,
    pub availability_requirement: f64,
    pub arrival_time: f64,
    pub lifetime: f64,
}

pub const MIN_CHAIN_LEN: usize = 2;
pub const MAX_CHAIN_LEN: usize = 3;

/// Draws a chain of 2 or 3 uniformly chosen VNF types with an exponential lifetime
/// of mean `customer.mean_lifetime`.
pub fn generate_request(
    id: u64,
    customer: &Customer,
    now: f64,
    catalog: &VnfCatalog,
    rng: &mut RngStream,
) -> Result<SfcRequest> {
    if catalog.is_empty() {
        return Err(Error::Config("empty VNF catalog".into()));
    }
    let len = rng.int_inclusive(MIN_CHAIN_LEN as u32, MAX_CHAIN_LEN as u32) as usize;
    let vnf_sequence = (0..len).map(|_| rng.index(catalog.len())).collect();
    let lifetime = sample_exponential(1.0 / customer.mean_lifetime, rng)?;
    Ok(SfcRequest {
        id,
        customer: customer.id,
        vnf_sequence,
        availability_requirement: customer.availability_requirement,
        arrival_time: now,
        lifetime,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub server: usize,
    pub replicas: u32,
}

/// Where each VNF of a request went. `assignments[i]` corresponds to
/// `vnf_sequence[i]`; all replicas of one position share a server.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub request_id: u64,
    pub vnf_sequence: Vec<usize>,
    pub assignments: Vec<Assignment>,
}

impl Placement {
    pub fn new(request: &SfcRequest) -> Self {
        Self {
            request_id: request.id,
            vnf_sequence: request.vnf_sequence.clone(),
            assignments: Vec::with_capacity(request.vnf_sequence.len()),
        }
    }

    pub fn is_complete(&self) -> bool {
        self.assignments.len() == self.vnf_sequence.len()
    }

    /// Distinct servers in first-use order.
    pub fn distinct_servers(&self) -> Vec<usize> {
        let mut seen = Vec::new();
        for a in &self.assignments {
            if !seen.contains(&a.server) {
                seen.push(a.server);
            }
        }
        seen
    }
}
