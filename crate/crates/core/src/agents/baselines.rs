use crate::error::Result;
use crate::model::{Assignment, Infrastructure, Placement, SfcRequest, VnfCatalog};
use crate::sim::{Placer, RngStream};

/// Draws a redundancy level in `1..=vm_max`; when that does not fit in `free`
/// units, redraws once within what fits. `None` if not even one replica fits.
fn draw_replicas(rng: &mut RngStream, vm_max: u32, demand: u32, free: u32) -> Option<u32> {
    let fit = free / demand.max(1);
    if fit == 0 {
        return None;
    }
    let q = rng.int_inclusive(1, vm_max);
    if q <= fit {
        Some(q)
    } else {
        Some(rng.int_inclusive(1, fit.min(vm_max)))
    }
}

fn place_with(
    request: &SfcRequest,
    infra: &mut Infrastructure,
    catalog: &VnfCatalog,
    rng: &mut RngStream,
    mut choose_server: impl FnMut(&Infrastructure, &mut RngStream) -> usize,
) -> Result<Option<Placement>> {
    let mut placement = Placement::new(request);
    for &vnf_id in &request.vnf_sequence {
        let vnf = &catalog.types()[vnf_id];
        let server = choose_server(infra, rng);
        let free = infra.servers()[server].free_resources();
        let placed = match draw_replicas(rng, infra.vm_max(), vnf.resource_demand, free) {
            Some(q) => infra.allocate(server, vnf, q, request.id).ok().map(|_| q),
            None => None,
        };
        match placed {
            Some(replicas) => placement.assignments.push(Assignment { server, replicas }),
            None => {
                infra.deallocate(request.id);
                return Ok(None);
            }
        }
    }
    Ok(Some(placement))
}

/// Puts every VNF on the server with the most free resources (lowest id on ties)
/// with a random redundancy level.
#[derive(Debug, Clone)]
pub struct GreedyPlacer {
    rng: RngStream,
}

impl GreedyPlacer {
    pub fn new(seed: u64) -> Self {
        Self { rng: RngStream::new(seed, 10) }
    }
}

/// Index of the server with the most free resources; ties go to the lowest id.
pub fn most_free_server(infra: &Infrastructure) -> usize {
    let mut best = 0;
    for (i, s) in infra.servers().iter().enumerate() {
        if s.free_resources() > infra.servers()[best].free_resources() {
            best = i;
        }
    }
    best
}

impl Placer for GreedyPlacer {
    fn place(&mut self, request: &SfcRequest, infra: &mut Infrastructure, catalog: &VnfCatalog) -> Result<Option<Placement>> {
        place_with(request, infra, catalog, &mut self.rng, |infra, _| most_free_server(infra))
    }
}

/// Uniformly random server and redundancy level.
#[derive(Debug, Clone)]
pub struct RandomPlacer {
    rng: RngStream,
}

impl RandomPlacer {
    pub fn new(seed: u64) -> Self {
        Self { rng: RngStream::new(seed, 11) }
    }
}

impl Placer for RandomPlacer {
    fn place(&mut self, request: &SfcRequest, infra: &mut Infrastructure, catalog: &VnfCatalog) -> Result<Option<Placement>> {
        place_with(request, infra, catalog, &mut self.rng, |infra, rng| rng.index(infra.len()))
    }
}
