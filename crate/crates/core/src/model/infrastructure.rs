use serde::{Deserialize, Serialize};

use super::params;
use super::server::{AllocationFailure, ServerRuntime, ServerSpec};
use super::vnf::VnfType;
use crate::error::{Error, Result};

/// Reliability, capacity and power parameters shared by a group of servers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupParams {
    pub label: String,
    pub capacity: u32,
    pub mttf: f64,
    pub mttr: f64,
    pub cpu_power: f64,
    pub mem_power: f64,
}

impl GroupParams {
    /// Base-scenario server: 10 units, MTTF 8760 h, MTTR 1.667 h, 40 W + 30.17 W.
    pub fn reference(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            capacity: params::SERVER_CAPACITY,
            mttf: params::SERVER_MTTF_H,
            mttr: params::SERVER_MTTR_H,
            cpu_power: params::CPU_POWER_W,
            mem_power: params::MEM_POWER_W,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |what: &str| {
            Err(Error::Config(format!(
                "server group {:?}: {what}",
                self.label
            )))
        };
        if self.capacity == 0 {
            return bad("capacity must be at least 1");
        }
        if !(self.mttf > 0.0 && self.mttf.is_finite()) {
            return bad("mttf must be positive");
        }
        if !(self.mttr > 0.0 && self.mttr.is_finite()) {
            return bad("mttr must be positive");
        }
        if !(self.cpu_power >= 0.0 && self.mem_power >= 0.0) {
            return bad("power constants must be non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServerDecl {
    pub name: String,
    pub group: usize,
}

/// Everything needed to instantiate the server fleet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfrastructureConfig {
    pub groups: Vec<GroupParams>,
    pub servers: Vec<ServerDecl>,
    pub vm_max: u32,
}

impl InfrastructureConfig {
    /// Consecutive blocks of `count` servers per group, named `s0, s1, ...`.
    pub fn from_groups(groups: impl IntoIterator<Item = (GroupParams, usize)>, vm_max: u32) -> Self {
        let mut params = Vec::new();
        let mut servers = Vec::new();
        for (g, (p, count)) in groups.into_iter().enumerate() {
            params.push(p);
            for _ in 0..count {
                servers.push(ServerDecl {
                    name: format!("s{}", servers.len()),
                    group: g,
                });
            }
        }
        Self {
            groups: params,
            servers,
            vm_max,
        }
    }

    /// Homogeneous base scenario with `count` servers.
    pub fn base(count: usize) -> Self {
        Self::from_groups([(GroupParams::reference("group1"), count)], params::VM_MAX)
    }

    /// Two equally sized groups; the second has MTTF 7884 h. An odd count puts the
    /// extra server in group 1.
    pub fn two_group(count: usize) -> Self {
        let g1 = count - count / 2;
        let mut weak = GroupParams::reference("group2");
        weak.mttf = params::SERVER_MTTF_GROUP2_H;
        Self::from_groups(
            [(GroupParams::reference("group1"), g1), (weak, count / 2)],
            params::VM_MAX,
        )
    }

    pub fn with_capacity(mut self, capacity: u32) -> Self {
        for g in &mut self.groups {
            g.capacity = capacity;
        }
        self
    }

    pub fn server_count(&self) -> usize {
        self.servers.len()
    }
}

/// Instantiates all servers, operational and empty.
pub fn build_infrastructure(config: &InfrastructureConfig) -> Result<Infrastructure> {
    if config.servers.is_empty() {
        return Err(Error::Config("infrastructure has no servers".into()));
    }
    if config.vm_max == 0 {
        return Err(Error::Config("vm_max must be at least 1".into()));
    }
    for g in &config.groups {
        g.validate()?;
    }
    let servers = config
        .servers
        .iter()
        .enumerate()
        .map(|(id, decl)| {
            let g = config.groups.get(decl.group).ok_or_else(|| {
                Error::Config(format!(
                    "server {:?} refers to missing group {}",
                    decl.name, decl.group
                ))
            })?;
            Ok(ServerRuntime::new(ServerSpec {
                id,
                name: decl.name.clone(),
                group: decl.group,
                capacity: g.capacity,
                mttf: g.mttf,
                mttr: g.mttr,
                cpu_power: g.cpu_power,
                mem_power: g.mem_power,
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Infrastructure {
        servers,
        vm_max: config.vm_max,
    })
}

/// The server fleet with its resource bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct Infrastructure {
    servers: Vec<ServerRuntime>,
    vm_max: u32,
}

impl Infrastructure {
    pub fn servers(&self) -> &[ServerRuntime] {
        &self.servers
    }

    pub fn server(&self, id: usize) -> Option<&ServerRuntime> {
        self.servers.get(id)
    }

    pub fn len(&self) -> usize {
        self.servers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.servers.is_empty()
    }

    pub fn vm_max(&self) -> u32 {
        self.vm_max
    }

    pub fn allocate(
        &mut self,
        server: usize,
        vnf: &VnfType,
        replicas: u32,
        request_id: u64,
    ) -> Result<(), AllocationFailure> {
        if replicas == 0 || replicas > self.vm_max {
            return Err(AllocationFailure::InvalidRedundancy {
                replicas,
                vm_max: self.vm_max,
            });
        }
        self.servers
            .get_mut(server)
            .ok_or(AllocationFailure::UnknownServer(server))?
            .allocate(vnf, replicas, request_id)
    }

    /// Releases everything `request_id` holds on any server. Unknown ids are a no-op.
    pub fn deallocate(&mut self, request_id: u64) -> u32 {
        self.servers.iter_mut().map(|s| s.release(request_id)).sum()
    }

    pub(crate) fn set_operational(&mut self, server: usize, up: bool) -> Result<()> {
        self.servers
            .get_mut(server)
            .ok_or_else(|| Error::Internal(format!("unknown server {server}")))?
            .set_operational(up);
        Ok(())
    }

    pub fn total_capacity(&self) -> u64 {
        self.servers.iter().map(|s| s.spec.capacity as u64).sum()
    }

    pub fn total_allocated(&self) -> u64 {
        self.servers.iter().map(|s| s.allocated() as u64).sum()
    }

    pub fn total_unallocated(&self) -> u64 {
        self.servers.iter().map(|s| s.unallocated() as u64).sum()
    }

    /// Per-server consistency check plus fleet-wide conservation of units.
    pub fn audit(&self) -> Result<()> {
        for s in &self.servers {
            s.audit().map_err(Error::Internal)?;
        }
        if self.total_unallocated() + self.total_allocated() != self.total_capacity() {
            return Err(Error::Internal("resource units not conserved".into()));
        }
        Ok(())
    }
}
