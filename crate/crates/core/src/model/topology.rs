//! Topology files: a JSON list of named servers with group labels.
//!
//! ```json
//! { "name": "rnp",
//!   "servers": [{"name": "Manaus", "group": "group1"}, ...],
//!   "groups": {"group2": {"mttf": 7884}},
//!   "links": [["Manaus", "Brasilia"]] }
//! ```
//!
//! Groups are numbered in order of first appearance. `groups` blocks are optional
//! per-field overrides of the scenario's group parameters. Links are accepted and
//! ignored: any server can reach any other.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use super::infrastructure::{GroupParams, InfrastructureConfig, ServerDecl};
use crate::error::{Error, Result};

const RNP_JSON: &str = include_str!("../../data/rnp.json");

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct TopologyFile {
    #[serde(default)]
    name: Option<String>,
    servers: Vec<ServerEntry>,
    #[serde(default)]
    groups: BTreeMap<String, GroupOverride>,
    #[serde(default)]
    #[allow(dead_code)]
    links: Option<serde_json::Value>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ServerEntry {
    name: String,
    group: String,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupOverride {
    capacity: Option<u32>,
    mttf: Option<f64>,
    mttr: Option<f64>,
    cpu_power: Option<f64>,
    mem_power: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Topology {
    pub name: String,
    file: TopologyFile,
}

impl Topology {
    /// The 28-node RNP backbone shipped with the crate.
    pub fn rnp() -> Self {
        Self::parse(RNP_JSON, Path::new("<builtin rnp.json>")).expect("builtin topology parses")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    fn parse(text: &str, path: &Path) -> Result<Self> {
        let file: TopologyFile = serde_json::from_str(text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        if file.servers.is_empty() {
            return Err(Error::Config(format!("{}: no servers", path.display())));
        }
        Ok(Self {
            name: file.name.clone().unwrap_or_else(|| "custom".into()),
            file,
        })
    }

    pub fn server_count(&self) -> usize {
        self.file.servers.len()
    }

    /// Group labels in order of first appearance.
    pub fn group_labels(&self) -> Vec<String> {
        let mut labels: Vec<String> = Vec::new();
        for s in &self.file.servers {
            if !labels.contains(&s.group) {
                labels.push(s.group.clone());
            }
        }
        labels
    }

    /// Resolves group parameters: group `i` starts from `defaults[i]` (or the last
    /// default when there are fewer) and then takes the file's overrides.
    pub fn to_config(&self, defaults: &[GroupParams], vm_max: u32) -> Result<InfrastructureConfig> {
        if defaults.is_empty() {
            return Err(Error::Config("no default group parameters".into()));
        }
        let labels = self.group_labels();
        if let Some(unused) = self.file.groups.keys().find(|k| !labels.contains(k)) {
            return Err(Error::Config(format!(
                "topology group block {unused:?} matches no server"
            )));
        }
        let groups = labels
            .iter()
            .enumerate()
            .map(|(i, label)| {
                let mut p = defaults[i.min(defaults.len() - 1)].clone();
                p.label = label.clone();
                if let Some(o) = self.file.groups.get(label) {
                    p.capacity = o.capacity.unwrap_or(p.capacity);
                    p.mttf = o.mttf.unwrap_or(p.mttf);
                    p.mttr = o.mttr.unwrap_or(p.mttr);
                    p.cpu_power = o.cpu_power.unwrap_or(p.cpu_power);
                    p.mem_power = o.mem_power.unwrap_or(p.mem_power);
                }
                p
            })
            .collect();
        let servers = self
            .file
            .servers
            .iter()
            .map(|s| ServerDecl {
                name: s.name.clone(),
                group: labels.iter().position(|l| *l == s.group).expect("label collected"),
            })
            .collect();
        Ok(InfrastructureConfig {
            groups,
            servers,
            vm_max,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_infrastructure;

    #[test]
    fn rnp_has_28_nodes_in_two_groups() {
        let t = Topology::rnp();
        assert_eq!(t.server_count(), 28);
        assert_eq!(t.group_labels(), ["group1", "group2"]);
        let mut weak = GroupParams::reference("g2");
        weak.mttf = 7884.0;
        let cfg = t
            .to_config(&[GroupParams::reference("g1"), weak], 4)
            .unwrap();
        let infra = build_infrastructure(&cfg).unwrap();
        assert_eq!(infra.server(0).unwrap().spec.name, "Boa Vista");
        assert_eq!(infra.servers().iter().filter(|s| s.spec.mttf == 7884.0).count(), 14);
    }

    #[test]
    fn overrides_and_ignored_links() {
        let text = r#"{"servers": [{"name": "a", "group": "x"}, {"name": "b", "group": "y"}],
                       "groups": {"y": {"capacity": 16}},
                       "links": [["a", "b"]]}"#;
        let t = Topology::parse(text, Path::new("t.json")).unwrap();
        let cfg = t.to_config(&[GroupParams::reference("d")], 4).unwrap();
        assert_eq!(cfg.groups[0].capacity, 10);
        assert_eq!(cfg.groups[1].capacity, 16);
        assert_eq!(cfg.servers[1].group, 1);
    }

    #[test]
    fn unknown_keys_and_empty_rejected() {
        let p = Path::new("t.json");
        assert!(Topology::parse(r#"{"servers": [], "links": []}"#, p).is_err());
        assert!(Topology::parse(r#"{"servers": [{"name": "a", "group": "x"}], "bogus": 1}"#, p).is_err());
        let t = Topology::parse(r#"{"servers": [{"name": "a", "group": "x"}], "groups": {"z": {}}}"#, p).unwrap();
        assert!(t.to_config(&[GroupParams::reference("d")], 4).is_err());
    }
}
