//! Reliability block diagrams: steady-state availability of series/parallel
//! compositions, and the diagram of a placed SFC.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Infrastructure, Placement};

/// `mttf / (mttf + mttr)`.
pub fn steady_state_availability(mttf: f64, mttr: f64) -> Result<f64> {
    if !(mttf > 0.0) || !mttf.is_finite() {
        return Err(Error::Domain(format!("mttf must be positive, got {mttf}")));
    }
    if !(mttr >= 0.0) || !mttr.is_finite() {
        return Err(Error::Domain(format!("mttr must be non-negative, got {mttr}")));
    }
    Ok(mttf / (mttf + mttr))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RbdBlock {
    Leaf(f64),
    /// Up only if every child is up.
    Series(Vec<RbdBlock>),
    /// Up if at least one child is up.
    Parallel(Vec<RbdBlock>),
}

impl RbdBlock {
    pub fn evaluate(&self) -> f64 {
        match self {
            RbdBlock::Leaf(a) => *a,
            RbdBlock::Series(children) => children.iter().map(RbdBlock::evaluate).product(),
            RbdBlock::Parallel(children) => {
                1.0 - children.iter().map(|c| 1.0 - c.evaluate()).product::<f64>()
            }
        }
    }

    /// Leaves in [0, 1], composites non-empty.
    pub fn validate(&self) -> Result<()> {
        match self {
            RbdBlock::Leaf(a) if (0.0..=1.0).contains(a) => Ok(()),
            RbdBlock::Leaf(a) => Err(Error::Domain(format!("leaf availability {a} outside [0, 1]"))),
            RbdBlock::Series(c) | RbdBlock::Parallel(c) if c.is_empty() => {
                Err(Error::Domain("series/parallel block without children".into()))
            }
            RbdBlock::Series(c) | RbdBlock::Parallel(c) => c.iter().try_for_each(RbdBlock::validate),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            RbdBlock::Leaf(_) => 1,
            RbdBlock::Series(c) | RbdBlock::Parallel(c) => c.iter().map(RbdBlock::leaf_count).sum(),
        }
    }

    fn write_indented(&self, f: &mut fmt::Formatter<'_>, depth: usize) -> fmt::Result {
        let pad = "  ".repeat(depth);
        match self {
            RbdBlock::Leaf(a) => writeln!(f, "{pad}leaf {a:.12}"),
            RbdBlock::Series(c) | RbdBlock::Parallel(c) => {
                let kind = if matches!(self, RbdBlock::Series(_)) { "series" } else { "parallel" };
                writeln!(f, "{pad}{kind} = {:.12}", self.evaluate())?;
                c.iter().try_for_each(|b| b.write_indented(f, depth + 1))
            }
        }
    }
}

impl fmt::Display for RbdBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_indented(f, 0)
    }
}

/// Diagram of a complete placement: a series of one leaf per distinct server
/// (first use order) and, per chain position, a parallel block of `replicas` VNF
/// leaves. A server hosting several positions appears once.
pub fn sfc_rbd(placement: &Placement, infra: &Infrastructure, vnf_availability: f64) -> Result<RbdBlock> {
    if !placement.is_complete() || placement.assignments.is_empty() {
        return Err(Error::Usage(format!(
            "placement of request {} is incomplete ({}/{} VNFs)",
            placement.request_id,
            placement.assignments.len(),
            placement.vnf_sequence.len()
        )));
    }
    let mut blocks = Vec::new();
    let mut seen = Vec::new();
    for a in &placement.assignments {
        if a.replicas == 0 {
            return Err(Error::Usage("assignment with zero replicas".into()));
        }
        if !seen.contains(&a.server) {
            let s = infra
                .server(a.server)
                .ok_or_else(|| Error::Usage(format!("placement names unknown server {}", a.server)))?;
            blocks.push(RbdBlock::Leaf(steady_state_availability(s.spec.mttf, s.spec.mttr)?));
            seen.push(a.server);
        }
        blocks.push(RbdBlock::Parallel(vec![
            RbdBlock::Leaf(vnf_availability);
            a.replicas as usize
        ]));
    }
    Ok(RbdBlock::Series(blocks))
}

pub fn sfc_availability(placement: &Placement, infra: &Infrastructure, vnf_availability: f64) -> Result<f64> {
    Ok(sfc_rbd(placement, infra, vnf_availability)?.evaluate())
}
