use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EventKind {
    SfcArrival { customer: usize },
    SfcDeparture { request: u64 },
    ServerFailure { server: usize },
    ServerRepair { server: usize },
    VnfFailure { instance: usize },
    VnfRepair { instance: usize },
}

impl EventKind {
    pub fn label(&self) -> &'static str {
        match self {
            EventKind::SfcArrival { .. } => "sfc_arrival",
            EventKind::SfcDeparture { .. } => "sfc_departure",
            EventKind::ServerFailure { .. } => "server_failure",
            EventKind::ServerRepair { .. } => "server_repair",
            EventKind::VnfFailure { .. } => "vnf_failure",
            EventKind::VnfRepair { .. } => "vnf_repair",
        }
    }

    pub fn subject(&self) -> u64 {
        match *self {
            EventKind::SfcArrival { customer } => customer as u64,
            EventKind::SfcDeparture { request } => request,
            EventKind::ServerFailure { server } | EventKind::ServerRepair { server } => server as u64,
            EventKind::VnfFailure { instance } | EventKind::VnfRepair { instance } => instance as u64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Event {
    pub time: f64,
    pub sequence: u64,
    pub kind: EventKind,
}

impl Eq for Event {}

impl Ord for Event {
    // Reversed so that `BinaryHeap` pops the earliest event first; equal times
    // fall back to insertion order.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.sequence.cmp(&self.sequence))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Min-priority queue of events keyed by `(time, sequence)`.
#[derive(Debug, Clone, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Event>,
    next_sequence: u64,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn schedule(&mut self, time: f64, kind: EventKind) {
        let sequence = self.next_sequence;
        self.next_sequence += 1;
        self.heap.push(Event {
            time,
            sequence,
            kind,
        });
    }

    pub fn peek_time(&self) -> Option<f64> {
        self.heap.peek().map(|e| e.time)
    }

    pub fn pop(&mut self) -> Option<Event> {
        self.heap.pop()
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Events in pop order, without consuming the queue.
    pub fn snapshot(&self) -> Vec<Event> {
        let mut v = self.heap.clone().into_sorted_vec();
        v.reverse();
        v
    }
}
