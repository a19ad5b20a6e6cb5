use std::fmt;

use serde::{Deserialize, Serialize};

use super::vnf::VnfType;

/// Static description of one physical server.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServerSpec {
    pub id: usize,
    pub name: String,
    /// Index into the infrastructure's group table.
    pub group: usize,
    pub capacity: u32,
    pub mttf: f64,
    pub mttr: f64,
    pub cpu_power: f64,
    pub mem_power: f64,
}

impl ServerSpec {
    /// Power drawn by the server while it hosts at least one VNF.
    pub fn power(&self) -> f64 {
        self.cpu_power + self.mem_power
    }
}

/// One VNF deployment on a server: `replicas` redundant instances of a type for
/// a given request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HostedEntry {
    pub request_id: u64,
    pub vnf_type: usize,
    pub replicas: u32,
    pub units: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AllocationFailure {
    ServerDown,
    InsufficientCapacity { needed: u32, free: u32 },
    InvalidRedundancy { replicas: u32, vm_max: u32 },
    UnknownServer(usize),
}

impl fmt::Display for AllocationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ServerDown => write!(f, "server is down"),
            Self::InsufficientCapacity { needed, free } => {
                write!(f, "needs {needed} units, {free} free")
            }
            Self::InvalidRedundancy { replicas, vm_max } => {
                write!(f, "redundancy {replicas} outside 1..={vm_max}")
            }
            Self::UnknownServer(id) => write!(f, "no server {id}"),
        }
    }
}

impl std::error::Error for AllocationFailure {}

/// Live state of a server: what it hosts and whether it is up.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServerRuntime {
    pub spec: ServerSpec,
    allocated: u32,
    operational: bool,
    hosted: Vec<HostedEntry>,
}

impl ServerRuntime {
    pub fn new(spec: ServerSpec) -> Self {
        Self {
            spec,
            allocated: 0,
            operational: true,
            hosted: Vec::new(),
        }
    }

    pub fn allocated(&self) -> u32 {
        self.allocated
    }

    pub fn is_operational(&self) -> bool {
        self.operational
    }

    pub fn hosted(&self) -> &[HostedEntry] {
        &self.hosted
    }

    pub(crate) fn set_operational(&mut self, up: bool) {
        self.operational = up;
    }

    /// Capacity not bound to any hosted VNF, regardless of up/down state.
    pub fn unallocated(&self) -> u32 {
        self.spec.capacity - self.allocated
    }

    /// Capacity the placement layer may use. A down server exposes none.
    pub fn free_resources(&self) -> u32 {
        if self.operational {
            self.unallocated()
        } else {
            0
        }
    }

    /// Places `replicas` instances of `vnf` for `request_id`. On failure nothing
    /// changes.
    pub fn allocate(
        &mut self,
        vnf: &VnfType,
        replicas: u32,
        request_id: u64,
    ) -> Result<(), AllocationFailure> {
        if replicas == 0 {
            return Err(AllocationFailure::InvalidRedundancy {
                replicas,
                vm_max: u32::MAX,
            });
        }
        if !self.operational {
            return Err(AllocationFailure::ServerDown);
        }
        let needed = replicas.saturating_mul(vnf.resource_demand);
        let free = self.free_resources();
        if needed > free {
            return Err(AllocationFailure::InsufficientCapacity { needed, free });
        }
        self.allocated += needed;
        self.hosted.push(HostedEntry {
            request_id,
            vnf_type: vnf.id,
            replicas,
            units: needed,
        });
        Ok(())
    }

    /// Drops every entry of `request_id`; returns the units released.
    pub fn release(&mut self, request_id: u64) -> u32 {
        let mut released = 0;
        self.hosted.retain(|e| {
            if e.request_id == request_id {
                released += e.units;
                false
            } else {
                true
            }
        });
        self.allocated -= released;
        released
    }

    /// Checks `0 <= allocated <= capacity` and that `allocated` matches the hosted sum.
    pub fn audit(&self) -> Result<(), String> {
        let sum: u32 = self.hosted.iter().map(|e| e.units).sum();
        if sum != self.allocated {
            return Err(format!(
                "server {}: allocated {} but hosted entries sum to {}",
                self.spec.id, self.allocated, sum
            ));
        }
        if self.allocated > self.spec.capacity {
            return Err(format!(
                "server {}: allocated {} exceeds capacity {}",
                self.spec.id, self.allocated, self.spec.capacity
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::VnfCatalog;

    fn server(capacity: u32) -> ServerRuntime {
        ServerRuntime::new(ServerSpec {
            id: 0,
            name: "s0".into(),
            group: 0,
            capacity,
            mttf: 8760.0,
            mttr: 1.667,
            cpu_power: 40.0,
            mem_power: 30.17,
        })
    }

    #[test]
    fn free_resources_cases() {
        let catalog = VnfCatalog::default();
        let mut s = server(10);
        s.allocate(&catalog.types()[0], 3, 1).unwrap();
        assert_eq!(s.free_resources(), 7);

        let mut down = server(10);
        down.set_operational(false);
        assert_eq!(down.free_resources(), 0);

        let mut full = server(10);
        full.allocate(&catalog.types()[2], 2, 1).unwrap();
        full.allocate(&catalog.types()[1], 2, 2).unwrap();
        assert_eq!(full.free_resources(), 0);
    }

    #[test]
    fn allocate_wan_opt() {
        let catalog = VnfCatalog::default();
        let wan = &catalog.types()[2];
        let mut s = server(10);
        s.allocate(&catalog.types()[0], 3, 9).unwrap();
        s.allocate(wan, 1, 1).unwrap();
        assert_eq!(s.free_resources(), 3);

        let before = s.clone();
        let err = s.allocate(wan, 1, 2).unwrap_err();
        assert_eq!(err, AllocationFailure::InsufficientCapacity { needed: 4, free: 3 });
        assert_eq!(s, before);
    }

    #[test]
    fn allocate_firewall_four_replicas() {
        let catalog = VnfCatalog::default();
        let mut s = server(10);
        s.allocate(&catalog.types()[1], 4, 5).unwrap();
        assert_eq!(s.free_resources(), 6);
        // Oracle: sum over hosted entries of replicas * demand.
        let sum: u32 = s
            .hosted()
            .iter()
            .map(|e| e.replicas * catalog.get(e.vnf_type).unwrap().resource_demand)
            .sum();
        assert_eq!(sum, 4);
        assert_eq!(s.allocated(), sum);
        s.audit().unwrap();
    }

    #[test]
    fn down_server_refuses() {
        let catalog = VnfCatalog::default();
        let mut s = server(10);
        s.set_operational(false);
        assert_eq!(
            s.allocate(&catalog.types()[0], 1, 1),
            Err(AllocationFailure::ServerDown)
        );
        assert_eq!(s.allocated(), 0);
    }

    #[test]
    fn release_drops_all_entries_of_request() {
        let catalog = VnfCatalog::default();
        let mut s = server(10);
        s.allocate(&catalog.types()[0], 1, 4).unwrap();
        s.allocate(&catalog.types()[2], 1, 4).unwrap();
        s.allocate(&catalog.types()[1], 1, 5).unwrap();
        assert_eq!(s.release(4), 5);
        assert_eq!(s.allocated(), 1);
        s.audit().unwrap();
    }
}
