//! Reference simulation parameters (base scenario and the two-group variation).

pub const SERVER_COUNT: usize = 28;
pub const SERVER_CAPACITY: u32 = 10;
pub const SERVER_MTTF_H: f64 = 8760.0;
/// MTTF of the less reliable second server group (10% below the first).
pub const SERVER_MTTF_GROUP2_H: f64 = 7884.0;
pub const SERVER_MTTR_H: f64 = 1.667;
pub const VNF_MTTF_H: f64 = 2880.0;
pub const VNF_MTTR_H: f64 = 0.17;
pub const CPU_POWER_W: f64 = 40.0;
pub const MEM_POWER_W: f64 = 30.17;
pub const VM_MAX: u32 = 4;
pub const CUSTOMERS: usize = 5;
pub const CUSTOMERS_TWO_GROUP: usize = 10;
pub const AVAILABILITY_REQUIREMENT: f64 = 0.999;
pub const AVAILABILITY_REQUIREMENT_TWO_GROUP: f64 = 0.99955;
/// Requests per hour per customer.
pub const ARRIVAL_RATE: f64 = 0.04;
/// Mean SFC lifetime in hours.
pub const SFC_LIFETIME_H: f64 = 1000.0;
/// Relative spread of the per-customer arrival rate and lifetime around the base.
pub const CUSTOMER_SPREAD: f64 = 0.10;
pub const HOURS_PER_YEAR: f64 = 8760.0;
pub const EVALUATION_HORIZON_H: f64 = 43_800.0;
