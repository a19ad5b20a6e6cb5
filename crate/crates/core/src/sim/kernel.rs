use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::event::{Event, EventKind, EventQueue};
use super::rng::{sample_exponential, RngStream};
use crate::error::{Error, Result};
use crate::model::{
    build_infrastructure, generate_customers, generate_request, params, Customer, Infrastructure,
    InfrastructureConfig, Placement, SfcRequest, VnfCatalog,
};
use crate::rbd;

// Stream ids; each stochastic process owns one so they do not perturb each other.
const STREAM_CUSTOMERS: u64 = 0;
const STREAM_ARRIVALS: u64 = 1;
const STREAM_REQUESTS: u64 = 2;
const STREAM_SERVER_FAILURES: u64 = 3;
const STREAM_VNF_FAILURES: u64 = 4;

/// Static description of a simulated scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub infrastructure: InfrastructureConfig,
    pub catalog: VnfCatalog,
    pub customers: usize,
    /// Base arrival rate per customer, requests/hour.
    pub arrival_rate: f64,
    /// Base mean SFC lifetime, hours.
    pub mean_lifetime: f64,
    pub availability_requirement: f64,
    pub vnf_mttf: f64,
    pub vnf_mttr: f64,
    /// Record every processed event for CSV export.
    pub trace: bool,
}

impl SimConfig {
    pub fn base() -> Self {
        Self {
            infrastructure: InfrastructureConfig::base(params::SERVER_COUNT),
            catalog: VnfCatalog::default(),
            customers: params::CUSTOMERS,
            arrival_rate: params::ARRIVAL_RATE,
            mean_lifetime: params::SFC_LIFETIME_H,
            availability_requirement: params::AVAILABILITY_REQUIREMENT,
            vnf_mttf: params::VNF_MTTF_H,
            vnf_mttr: params::VNF_MTTR_H,
            trace: false,
        }
    }

    pub fn two_group() -> Self {
        Self {
            infrastructure: InfrastructureConfig::two_group(params::SERVER_COUNT),
            customers: params::CUSTOMERS_TWO_GROUP,
            availability_requirement: params::AVAILABILITY_REQUIREMENT_TWO_GROUP,
            ..Self::base()
        }
    }

    pub fn vnf_availability(&self) -> Result<f64> {
        rbd::steady_state_availability(self.vnf_mttf, self.vnf_mttr)
    }
}

/// Decides where a request's VNFs go. Implementations allocate directly on the
/// infrastructure and must leave it untouched when they reject.
pub trait Placer {
    fn place(
        &mut self,
        request: &SfcRequest,
        infra: &mut Infrastructure,
        catalog: &VnfCatalog,
    ) -> Result<Option<Placement>>;
}

/// How one request ended.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolution {
    pub request_id: u64,
    pub placed: bool,
    pub accepted: bool,
    pub availability: Option<f64>,
    /// Watts drawn by the distinct servers the chain uses.
    pub energy: Option<f64>,
    pub distinct_servers: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub requests: u64,
    /// Fully placed, regardless of availability.
    pub placed: u64,
    /// Placed and meeting the customer's availability requirement.
    pub accepted: u64,
    /// Not placed.
    pub rejected: u64,
    pub energy_placed_total: f64,
    pub energy_accepted_total: f64,
    /// Placed SFCs spanning exactly two distinct servers, and their energy.
    pub two_server_placed: u64,
    pub two_server_energy_total: f64,
    pub departures: u64,
    pub server_failures: u64,
    pub server_repairs: u64,
    pub vnf_failures: u64,
    pub vnf_repairs: u64,
    pub events: u64,
    pub clock: f64,
}

impl SimulationReport {
    /// `accepted / requests`, undefined without requests.
    pub fn acceptance_rate(&self) -> Option<f64> {
        (self.requests > 0).then(|| self.accepted as f64 / self.requests as f64)
    }

    pub fn mean_energy_per_placed(&self) -> Option<f64> {
        (self.placed > 0).then(|| self.energy_placed_total / self.placed as f64)
    }

    pub fn mean_energy_per_accepted(&self) -> Option<f64> {
        (self.accepted > 0).then(|| self.energy_accepted_total / self.accepted as f64)
    }

    pub fn mean_energy_two_server(&self) -> Option<f64> {
        (self.two_server_placed > 0).then(|| self.two_server_energy_total / self.two_server_placed as f64)
    }

    fn record(&mut self, r: &Resolution) {
        if let (true, Some(e)) = (r.placed, r.energy) {
            self.placed += 1;
            self.energy_placed_total += e;
            if r.distinct_servers == 2 {
                self.two_server_placed += 1;
                self.two_server_energy_total += e;
            }
            if r.accepted {
                self.accepted += 1;
                self.energy_accepted_total += e;
            }
        } else {
            self.rejected += 1;
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceRecord {
    pub time: f64,
    pub kind: &'static str,
    pub id: u64,
}

#[derive(Debug, Clone)]
struct VnfInstance {
    alive: bool,
    up: bool,
}

#[derive(Debug, Clone)]
struct ActiveSfc {
    placement: Placement,
    instances: Vec<usize>,
}

/// The discrete-event state: clock, pending events, servers and live SFCs.
#[derive(Debug, Clone)]
pub struct Simulation {
    config: SimConfig,
    vnf_availability: f64,
    clock: f64,
    queue: EventQueue,
    infra: Infrastructure,
    customers: Vec<Customer>,
    active: BTreeMap<u64, ActiveSfc>,
    instances: Vec<VnfInstance>,
    next_request_id: u64,
    report: SimulationReport,
    trace: Option<Vec<TraceRecord>>,
    arrival_rng: RngStream,
    request_rng: RngStream,
    failure_rng: RngStream,
    vnf_rng: RngStream,
}

impl Simulation {
    /// Fresh state at clock 0 with customers drawn and initial events queued.
    pub fn new(config: SimConfig, seed: u64) -> Result<Self> {
        let infra = build_infrastructure(&config.infrastructure)?;
        let vnf_availability = config.vnf_availability()?;
        if !(config.vnf_mttf > 0.0 && config.vnf_mttr > 0.0) {
            return Err(Error::Config("VNF MTTF/MTTR must be positive".into()));
        }
        let customers = generate_customers(
            config.customers,
            config.arrival_rate,
            config.mean_lifetime,
            config.availability_requirement,
            &mut RngStream::new(seed, STREAM_CUSTOMERS),
        )?;
        let mut sim = Self::with_parts(config, infra, customers, seed)?;
        sim.vnf_availability = vnf_availability;
        sim.schedule_initial_events()?;
        Ok(sim)
    }

    /// State around explicit customers; nothing is scheduled yet.
    pub fn with_parts(
        config: SimConfig,
        infra: Infrastructure,
        customers: Vec<Customer>,
        seed: u64,
    ) -> Result<Self> {
        let vnf_availability = config.vnf_availability()?;
        let trace = config.trace.then(Vec::new);
        Ok(Self {
            config,
            vnf_availability,
            clock: 0.0,
            queue: EventQueue::new(),
            infra,
            customers,
            active: BTreeMap::new(),
            instances: Vec::new(),
            next_request_id: 0,
            report: SimulationReport::default(),
            trace,
            arrival_rng: RngStream::new(seed, STREAM_ARRIVALS),
            request_rng: RngStream::new(seed, STREAM_REQUESTS),
            failure_rng: RngStream::new(seed, STREAM_SERVER_FAILURES),
            vnf_rng: RngStream::new(seed, STREAM_VNF_FAILURES),
        })
    }

    /// One arrival per customer and one failure per server. VNF failures are
    /// scheduled when instances are created.
    pub fn schedule_initial_events(&mut self) -> Result<()> {
        if self.clock != 0.0 || !self.queue.is_empty() {
            return Err(Error::Usage("initial events can only be scheduled once, at clock 0".into()));
        }
        for c in &self.customers {
            let dt = sample_exponential(c.arrival_rate, &mut self.arrival_rng)?;
            self.queue.schedule(dt, EventKind::SfcArrival { customer: c.id });
        }
        for s in self.infra.servers() {
            let dt = sample_exponential(1.0 / s.spec.mttf, &mut self.failure_rng)?;
            self.queue.schedule(dt, EventKind::ServerFailure { server: s.spec.id });
        }
        Ok(())
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn infrastructure(&self) -> &Infrastructure {
        &self.infra
    }

    pub fn infrastructure_mut(&mut self) -> &mut Infrastructure {
        &mut self.infra
    }

    pub fn catalog(&self) -> &VnfCatalog {
        &self.config.catalog
    }

    pub fn customers(&self) -> &[Customer] {
        &self.customers
    }

    pub fn queue(&self) -> &EventQueue {
        &self.queue
    }

    pub fn report(&self) -> &SimulationReport {
        &self.report
    }

    pub fn active_placements(&self) -> impl Iterator<Item = &Placement> {
        self.active.values().map(|a| &a.placement)
    }

    pub fn vnf_availability(&self) -> f64 {
        self.vnf_availability
    }

    pub fn trace(&self) -> Option<&[TraceRecord]> {
        self.trace.as_deref()
    }

    /// Pops the next event if it is due at or before `t_end`.
    pub fn pop_event(&mut self, t_end: f64) -> Option<Event> {
        match self.queue.peek_time() {
            Some(t) if t <= t_end => self.queue.pop(),
            _ => None,
        }
    }

    /// Processes one event. An arrival is placed with `placer` and resolved.
    pub fn handle_event(&mut self, event: Event, placer: &mut dyn Placer) -> Result<Option<Resolution>> {
        match self.apply(event)? {
            Some(request) => {
                let placement = placer.place(&request, &mut self.infra, &self.config.catalog)?;
                self.resolve(&request, placement).map(Some)
            }
            None => Ok(None),
        }
    }

    /// Processes events up to `t_end` until an arrival, which is returned unplaced.
    /// The caller must pass it to [`Simulation::resolve`].
    pub fn next_arrival(&mut self, t_end: f64) -> Result<Option<SfcRequest>> {
        while let Some(event) = self.pop_event(t_end) {
            if let Some(request) = self.apply(event)? {
                return Ok(Some(request));
            }
        }
        Ok(None)
    }

    /// Drains events chronologically until none is due by `t_end`.
    pub fn run_until(&mut self, t_end: f64, placer: &mut dyn Placer) -> Result<SimulationReport> {
        while let Some(event) = self.pop_event(t_end) {
            self.handle_event(event, placer)?;
        }
        Ok(self.report.clone())
    }

    fn apply(&mut self, event: Event) -> Result<Option<SfcRequest>> {
        if event.time < self.clock {
            return Err(Error::Internal(format!(
                "event at {} precedes clock {}",
                event.time, self.clock
            )));
        }
        self.clock = event.time;
        self.report.clock = self.clock;
        self.report.events += 1;
        if let Some(trace) = &mut self.trace {
            trace.push(TraceRecord {
                time: event.time,
                kind: event.kind.label(),
                id: event.kind.subject(),
            });
        }
        let mut arrival = None;
        match event.kind {
            EventKind::SfcArrival { customer } => {
                let c = self
                    .customers
                    .get(customer)
                    .ok_or_else(|| Error::Internal(format!("unknown customer {customer}")))?;
                let request = generate_request(
                    self.next_request_id,
                    c,
                    self.clock,
                    &self.config.catalog,
                    &mut self.request_rng,
                )?;
                self.next_request_id += 1;
                self.report.requests += 1;
                let dt = sample_exponential(c.arrival_rate, &mut self.arrival_rng)?;
                self.queue.schedule(self.clock + dt, EventKind::SfcArrival { customer });
                arrival = Some(request);
            }
            EventKind::SfcDeparture { request } => {
                let sfc = self
                    .active
                    .remove(&request)
                    .ok_or_else(|| Error::Internal(format!("departure of unknown request {request}")))?;
                self.infra.deallocate(request);
                for i in sfc.instances {
                    self.instances[i].alive = false;
                }
                self.report.departures += 1;
            }
            EventKind::ServerFailure { server } => {
                let mttr = self.server_param(server, |s| s.mttr)?;
                self.infra.set_operational(server, false)?;
                self.report.server_failures += 1;
                let dt = sample_exponential(1.0 / mttr, &mut self.failure_rng)?;
                self.queue.schedule(self.clock + dt, EventKind::ServerRepair { server });
            }
            EventKind::ServerRepair { server } => {
                let mttf = self.server_param(server, |s| s.mttf)?;
                self.infra.set_operational(server, true)?;
                self.report.server_repairs += 1;
                let dt = sample_exponential(1.0 / mttf, &mut self.failure_rng)?;
                self.queue.schedule(self.clock + dt, EventKind::ServerFailure { server });
            }
            EventKind::VnfFailure { instance } | EventKind::VnfRepair { instance } => {
                let failing = matches!(event.kind, EventKind::VnfFailure { .. });
                let inst = self
                    .instances
                    .get_mut(instance)
                    .ok_or_else(|| Error::Internal(format!("unknown VNF instance {instance}")))?;
                // Events of departed instances are dropped.
                if inst.alive {
                    inst.up = !failing;
                    let (rate, next) = if failing {
                        self.report.vnf_failures += 1;
                        (1.0 / self.config.vnf_mttr, EventKind::VnfRepair { instance })
                    } else {
                        self.report.vnf_repairs += 1;
                        (1.0 / self.config.vnf_mttf, EventKind::VnfFailure { instance })
                    };
                    let dt = sample_exponential(rate, &mut self.vnf_rng)?;
                    self.queue.schedule(self.clock + dt, next);
                }
            }
        }
        self.infra.audit()?;
        Ok(arrival)
    }

    fn server_param(&self, server: usize, f: impl Fn(&crate::model::ServerSpec) -> f64) -> Result<f64> {
        self.infra
            .server(server)
            .map(|s| f(&s.spec))
            .ok_or_else(|| Error::Internal(format!("unknown server {server}")))
    }

    /// Steady-state availability and power of a complete placement.
    pub fn evaluate_placement(&self, placement: &Placement) -> Result<(f64, f64)> {
        let availability = rbd::sfc_availability(placement, &self.infra, self.vnf_availability)?;
        Ok((availability, placement_energy(placement, &self.infra)))
    }

    /// Books the outcome of an arrival. With a placement (already allocated on the
    /// infrastructure) the departure and VNF failure processes are scheduled.
    pub fn resolve(&mut self, request: &SfcRequest, placement: Option<Placement>) -> Result<Resolution> {
        let resolution = match placement {
            Some(p) => {
                if p.request_id != request.id || !p.is_complete() {
                    return Err(Error::Usage(format!(
                        "placement does not complete request {}",
                        request.id
                    )));
                }
                let (availability, energy) = self.evaluate_placement(&p)?;
                let distinct_servers = p.distinct_servers().len();
                let mut instances = Vec::new();
                for a in &p.assignments {
                    for _ in 0..a.replicas {
                        let id = self.instances.len();
                        self.instances.push(VnfInstance { alive: true, up: true });
                        let dt = sample_exponential(1.0 / self.config.vnf_mttf, &mut self.vnf_rng)?;
                        self.queue.schedule(self.clock + dt, EventKind::VnfFailure { instance: id });
                        instances.push(id);
                    }
                }
                self.queue.schedule(
                    self.clock + request.lifetime,
                    EventKind::SfcDeparture { request: request.id },
                );
                self.active.insert(request.id, ActiveSfc { placement: p, instances });
                Resolution {
                    request_id: request.id,
                    placed: true,
                    accepted: availability >= request.availability_requirement,
                    availability: Some(availability),
                    energy: Some(energy),
                    distinct_servers,
                }
            }
            None => Resolution {
                request_id: request.id,
                placed: false,
                accepted: false,
                availability: None,
                energy: None,
                distinct_servers: 0,
            },
        };
        self.report.record(&resolution);
        Ok(resolution)
    }

    /// Number of live VNF instances currently up.
    pub fn vnf_instances_up(&self) -> usize {
        self.instances.iter().filter(|i| i.alive && i.up).count()
    }

    pub fn write_trace_csv(&self, path: &Path) -> Result<()> {
        let trace = self
            .trace
            .as_ref()
            .ok_or_else(|| Error::Usage("tracing was not enabled".into()))?;
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
        for r in trace {
            w.serialize(r).map_err(|e| Error::csv(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

/// Sum of `cpu + memory` power over the distinct servers of a placement.
pub fn placement_energy(placement: &Placement, infra: &Infrastructure) -> f64 {
    placement
        .distinct_servers()
        .into_iter()
        .filter_map(|s| infra.server(s))
        .map(|s| s.spec.power())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Assignment;

    struct Reject;
    impl Placer for Reject {
        fn place(&mut self, _: &SfcRequest, _: &mut Infrastructure, _: &VnfCatalog) -> Result<Option<Placement>> {
            Ok(None)
        }
    }

    /// Everything on server 0 with one replica, if it fits.
    struct FirstServer;
    impl Placer for FirstServer {
        fn place(&mut self, r: &SfcRequest, infra: &mut Infrastructure, catalog: &VnfCatalog) -> Result<Option<Placement>> {
            let mut p = Placement::new(r);
            for &v in &r.vnf_sequence {
                if infra.allocate(0, &catalog.types()[v], 1, r.id).is_err() {
                    infra.deallocate(r.id);
                    return Ok(None);
                }
                p.assignments.push(Assignment { server: 0, replicas: 1 });
            }
            Ok(Some(p))
        }
    }

    #[test]
    fn initial_event_count() {
        let sim = Simulation::new(SimConfig::base(), 1).unwrap();
        assert_eq!(sim.queue().len(), 33);
    }

    #[test]
    fn initial_queue_deterministic() {
        let a = Simulation::new(SimConfig::base(), 5).unwrap();
        let b = Simulation::new(SimConfig::base(), 5).unwrap();
        assert_eq!(a.queue().snapshot(), b.queue().snapshot());
        let c = Simulation::new(SimConfig::base(), 6).unwrap();
        assert_ne!(a.queue().snapshot(), c.queue().snapshot());
    }

    #[test]
    fn zero_arrival_rate_rejected() {
        let mut cfg = SimConfig::base();
        cfg.arrival_rate = 0.0;
        assert!(matches!(Simulation::new(cfg, 1), Err(Error::Domain(_))));

        let infra = build_infrastructure(&InfrastructureConfig::base(2)).unwrap();
        let customers = vec![Customer { id: 0, arrival_rate: 0.0, mean_lifetime: 10.0, availability_requirement: 0.9 }];
        let mut sim = Simulation::with_parts(SimConfig::base(), infra, customers, 1).unwrap();
        assert!(matches!(sim.schedule_initial_events(), Err(Error::Domain(_))));
    }

    #[test]
    fn zero_horizon_processes_nothing() {
        let mut sim = Simulation::new(SimConfig::base(), 1).unwrap();
        let r = sim.run_until(0.0, &mut Reject).unwrap();
        assert_eq!(r.requests, 0);
        assert_eq!(r.events, 0);
    }

    #[test]
    fn failure_then_repair_restores_capacity() {
        let mut cfg = SimConfig::base();
        cfg.infrastructure = InfrastructureConfig::base(2);
        let mut sim = Simulation::new(cfg, 3).unwrap();
        let catalog = sim.catalog().clone();
        sim.infrastructure_mut().allocate(1, &catalog.types()[0], 2, 999).unwrap();
        let before = sim.infrastructure().server(1).unwrap().free_resources();
        let t = sim.clock();
        sim.apply(Event { time: t, sequence: 0, kind: EventKind::ServerFailure { server: 1 } }).unwrap();
        assert_eq!(sim.infrastructure().server(1).unwrap().free_resources(), 0);
        sim.apply(Event { time: t, sequence: 1, kind: EventKind::ServerRepair { server: 1 } }).unwrap();
        assert!(sim.infrastructure().server(1).unwrap().is_operational());
        assert_eq!(sim.infrastructure().server(1).unwrap().free_resources(), before);
    }

    #[test]
    fn unknown_ids_are_internal_errors() {
        let mut sim = Simulation::new(SimConfig::base(), 3).unwrap();
        let ev = |kind| Event { time: 0.0, sequence: 0, kind };
        assert!(matches!(sim.apply(ev(EventKind::SfcDeparture { request: 77 })), Err(Error::Internal(_))));
        assert!(matches!(sim.apply(ev(EventKind::ServerFailure { server: 99 })), Err(Error::Internal(_))));
        assert!(matches!(sim.apply(ev(EventKind::VnfFailure { instance: 5 })), Err(Error::Internal(_))));
        assert!(matches!(sim.apply(ev(EventKind::SfcArrival { customer: 50 })), Err(Error::Internal(_))));
    }

    #[test]
    fn departure_releases_two_servers() {
        let mut cfg = SimConfig::base();
        cfg.infrastructure = InfrastructureConfig::base(3);
        let mut sim = Simulation::new(cfg, 4).unwrap();
        let request = sim.next_arrival(f64::INFINITY).unwrap().unwrap();
        let catalog = sim.catalog().clone();
        let mut p = Placement::new(&request);
        let mut log = Vec::new();
        for (i, &v) in request.vnf_sequence.iter().enumerate() {
            let server = i % 2;
            sim.infrastructure_mut().allocate(server, &catalog.types()[v], 1, request.id).unwrap();
            p.assignments.push(Assignment { server, replicas: 1 });
            log.push((server, catalog.types()[v].resource_demand));
        }
        sim.resolve(&request, Some(p)).unwrap();
        let mut expected: Vec<u32> = sim.infrastructure().servers().iter().map(|s| s.allocated()).collect();
        for (server, units) in log {
            expected[server] -= units;
        }
        let t = sim.clock() + request.lifetime;
        sim.apply(Event { time: t, sequence: 0, kind: EventKind::SfcDeparture { request: request.id } }).unwrap();
        let after: Vec<u32> = sim.infrastructure().servers().iter().map(|s| s.allocated()).collect();
        assert_eq!(after, expected);
        assert_eq!(sim.report().departures, 1);
    }

    #[test]
    fn run_is_deterministic_and_alternates_failures() {
        let run = |seed| {
            let mut cfg = SimConfig::base();
            cfg.trace = true;
            let mut sim = Simulation::new(cfg, seed).unwrap();
            let report = sim.run_until(43_800.0, &mut FirstServer).unwrap();
            (report, sim.trace().unwrap().to_vec())
        };
        let (a, ta) = run(8);
        let (b, tb) = run(8);
        assert_eq!(a, b);
        assert_eq!(ta.len(), tb.len());
        // Clock never decreases and each server alternates failure/repair.
        let mut last = 0.0;
        let mut down = vec![false; 28];
        for r in &ta {
            assert!(r.time >= last);
            last = r.time;
            match r.kind {
                "server_failure" => {
                    assert!(!down[r.id as usize]);
                    down[r.id as usize] = true;
                }
                "server_repair" => {
                    assert!(down[r.id as usize]);
                    down[r.id as usize] = false;
                }
                _ => {}
            }
        }
        assert!(a.server_failures > 0);
        assert!(a.vnf_failures > 0);
        assert_eq!(a.placed + a.rejected, a.requests);
    }

    #[test]
    fn poisson_arrival_counts() {
        // Poisson-count oracle: one customer at rate λ over T hours expects λT
        // arrivals. Average 30 seeded runs of a single fixed-rate customer.
        let horizon = 43_800.0;
        let mut counts = Vec::new();
        for seed in 0..30 {
            let mut cfg = SimConfig::base();
            cfg.infrastructure = InfrastructureConfig::base(1);
            let infra = build_infrastructure(&cfg.infrastructure).unwrap();
            let customers = vec![Customer { id: 0, arrival_rate: 0.04, mean_lifetime: 1000.0, availability_requirement: 0.999 }];
            let mut sim = Simulation::with_parts(cfg, infra, customers, seed).unwrap();
            sim.schedule_initial_events().unwrap();
            counts.push(sim.run_until(horizon, &mut Reject).unwrap().requests as f64);
        }
        let mean = counts.iter().sum::<f64>() / counts.len() as f64;
        assert!((mean / 1752.0 - 1.0).abs() < 0.05, "{mean}");
    }
}
