use serde::{Deserialize, Serialize};

use super::params::CUSTOMER_SPREAD;
use crate::error::{Error, Result};
use crate::sim::RngStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Customer {
    pub id: usize,
    /// Requests per hour.
    pub arrival_rate: f64,
    /// Mean SFC lifetime in hours.
    pub mean_lifetime: f64,
    pub availability_requirement: f64,
}

/// Draws `n` customers whose arrival rate and mean lifetime are uniform within
/// ±10% of the base values. All share the same availability requirement.
pub fn generate_customers(
    n: usize,
    base_lambda: f64,
    base_mu: f64,
    theta: f64,
    rng: &mut RngStream,
) -> Result<Vec<Customer>> {
    if n == 0 {
        return Err(Error::Config("at least one customer is required".into()));
    }
    if !(base_lambda > 0.0) || !(base_mu > 0.0) {
        return Err(Error::Domain(format!(
            "arrival rate ({base_lambda}) and lifetime ({base_mu}) must be positive"
        )));
    }
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Domain(format!(
            "availability requirement {theta} outside (0, 1)"
        )));
    }
    let (lo, hi) = (1.0 - CUSTOMER_SPREAD, 1.0 + CUSTOMER_SPREAD);
    Ok((0..n)
        .map(|id| {
            let arrival_rate = rng.uniform_range(lo * base_lambda, hi * base_lambda);
            let mean_lifetime = rng.uniform_range(lo * base_mu, hi * base_mu);
            Customer {
                id,
                arrival_rate,
                mean_lifetime,
                availability_requirement: theta,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rates_within_spread() {
        let mut rng = RngStream::new(3, 0);
        let cs = generate_customers(5, 0.04, 1000.0, 0.999, &mut rng).unwrap();
        assert_eq!(cs.len(), 5);
        for c in &cs {
            assert!((0.036..=0.044).contains(&c.arrival_rate), "{}", c.arrival_rate);
            assert_eq!(c.availability_requirement, 0.999);
        }
        let cs = generate_customers(10, 0.04, 1000.0, 0.999, &mut rng).unwrap();
        for c in &cs {
            assert!((900.0..=1100.0).contains(&c.mean_lifetime));
        }
    }

    #[test]
    fn deterministic() {
        let a = generate_customers(10, 0.04, 1000.0, 0.999, &mut RngStream::new(5, 1)).unwrap();
        let b = generate_customers(10, 0.04, 1000.0, 0.999, &mut RngStream::new(5, 1)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_inputs() {
        let mut rng = RngStream::new(0, 0);
        assert!(generate_customers(0, 0.04, 1000.0, 0.999, &mut rng).is_err());
        assert!(generate_customers(1, 0.0, 1000.0, 0.999, &mut rng).is_err());
        assert!(generate_customers(1, 0.04, 1000.0, 1.0, &mut rng).is_err());
    }
}
