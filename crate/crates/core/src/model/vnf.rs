use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A deployable network function and the resource units one instance consumes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VnfType {
    pub id: usize,
    pub name: String,
    pub resource_demand: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VnfCatalog {
    types: Vec<VnfType>,
}

impl VnfCatalog {
    /// Builds a catalog from `(name, demand)` pairs; ids follow insertion order.
    pub fn new<S: Into<String>>(entries: impl IntoIterator<Item = (S, u32)>) -> Result<Self> {
        let types: Vec<VnfType> = entries
            .into_iter()
            .enumerate()
            .map(|(id, (name, resource_demand))| VnfType {
                id,
                name: name.into(),
                resource_demand,
            })
            .collect();
        if types.is_empty() {
            return Err(Error::Config("VNF catalog is empty".into()));
        }
        if let Some(t) = types.iter().find(|t| t.resource_demand == 0) {
            return Err(Error::Config(format!(
                "VNF type {} has zero resource demand",
                t.name
            )));
        }
        Ok(Self { types })
    }

    pub fn get(&self, id: usize) -> Option<&VnfType> {
        self.types.get(id)
    }

    pub fn types(&self) -> &[VnfType] {
        &self.types
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn max_demand(&self) -> u32 {
        self.types.iter().map(|t| t.resource_demand).max().unwrap_or(1)
    }
}

impl Default for VnfCatalog {
    /// IDS and firewall take one resource unit, the WAN optimiser four.
    fn default() -> Self {
        Self::new([("IDS", 1), ("Firewall", 1), ("WAN-opt", 4)]).expect("static catalog")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_catalog() {
        let c = VnfCatalog::default();
        let demands: Vec<_> = c
            .types()
            .iter()
            .map(|t| (t.name.as_str(), t.resource_demand))
            .collect();
        assert_eq!(demands, [("IDS", 1), ("Firewall", 1), ("WAN-opt", 4)]);
        assert_eq!(c.max_demand(), 4);
    }

    #[test]
    fn zero_demand_rejected() {
        assert!(VnfCatalog::new([("x", 0)]).is_err());
        assert!(VnfCatalog::new(Vec::<(String, u32)>::new()).is_err());
    }
}
