//! Read-only scenario catalogue backed by a directory of `.rfscn` and
//! `.tgen` files. Scenario ids are the file stems.

use std::fs;
use std::path::{Path, PathBuf};

use super::format::{parse_rf_scenario, serialize_rf_scenario};
use super::model::{RfScenario, ScenarioError, TrafficScenario};
use super::tgen::{parse_traffic_script, serialize_traffic_script};

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioSummary {
    pub id: String,
    pub n_nodes: usize,
    pub duration_ms: u64,
    pub carrier_hz: f64,
}

pub struct Catalogue {
    root: PathBuf,
}

impl Catalogue {
    pub fn open(root: impl Into<PathBuf>) -> Self {
        Catalogue { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn rf_path(&self, id: &str) -> PathBuf {
        self.root.join(format!("{id}.rfscn"))
    }

    fn traffic_path(&self, id: &str) -> PathBuf {
        self.root.join(format!("{id}.tgen"))
    }

    /// Summaries of every installed RF scenario, sorted by id.
    pub fn list(&self) -> Result<Vec<ScenarioSummary>, ScenarioError> {
        let mut ids = Vec::new();
        if self.root.is_dir() {
            for entry in fs::read_dir(&self.root)? {
                let path = entry?.path();
                if path.extension().is_some_and(|e| e == "rfscn") {
                    if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                        ids.push(stem.to_string());
                    }
                }
            }
        }
        ids.sort();
        ids.iter()
            .map(|id| self.info(id).map(|s| summarize(&s)))
            .collect()
    }

    /// Full metadata for one scenario id.
    pub fn info(&self, id: &str) -> Result<RfScenario, ScenarioError> {
        let path = self.rf_path(id);
        if !path.is_file() {
            return Err(ScenarioError::UnknownScenario { id: id.to_string() });
        }
        parse_rf_scenario(&fs::read(path)?)
    }

    pub fn traffic(&self, id: &str) -> Result<TrafficScenario, ScenarioError> {
        let path = self.traffic_path(id);
        if !path.is_file() {
            return Err(ScenarioError::UnknownScenario { id: id.to_string() });
        }
        let mut scenario = parse_traffic_script(&fs::read_to_string(path)?)?;
        scenario.id = id.to_string();
        Ok(scenario)
    }

    /// Write a scenario into the catalogue in canonical form.
    pub fn install_rf(&self, scenario: &RfScenario) -> Result<PathBuf, ScenarioError> {
        scenario.validate()?;
        fs::create_dir_all(&self.root)?;
        let path = self.rf_path(&scenario.id);
        fs::write(&path, serialize_rf_scenario(scenario))?;
        Ok(path)
    }

    pub fn install_traffic(&self, scenario: &TrafficScenario) -> Result<PathBuf, ScenarioError> {
        scenario.validate()?;
        fs::create_dir_all(&self.root)?;
        let path = self.traffic_path(&scenario.id);
        fs::write(&path, serialize_traffic_script(scenario))?;
        Ok(path)
    }
}

fn summarize(s: &RfScenario) -> ScenarioSummary {
    ScenarioSummary {
        id: s.id.clone(),
        n_nodes: s.n_nodes,
        duration_ms: s.duration_ms,
        carrier_hz: s.carrier_hz,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::CirTaps;
    use crate::scenario::model::TapUpdate;
    use num_complex::Complex64;

    fn scenario(id: &str, n_nodes: usize) -> RfScenario {
        RfScenario {
            id: id.into(),
            n_nodes,
            duration_ms: 2000,
            sample_rate_hz: 1e6,
            carrier_hz: 1e9,
            noise_power_dbfs: -80.0,
            updates: vec![TapUpdate {
                t_ms: 0,
                carrier_hz: None,
                links: vec![CirTaps::single(0, 1, 0, Complex64::new(1.0, 0.0))],
            }],
        }
    }

    #[test]
    fn empty_directory_lists_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let cat = Catalogue::open(dir.path());
        assert!(cat.list().unwrap().is_empty());
    }

    #[test]
    fn installed_fixtures_are_listed_sorted() {
        let dir = tempfile::tempdir().unwrap();
        let cat = Catalogue::open(dir.path());
        for id in ["zeta", "alpha", "mid"] {
            cat.install_rf(&scenario(id, 2)).unwrap();
        }
        let list = cat.list().unwrap();
        assert_eq!(list.len(), 3);
        assert_eq!(
            list.iter().map(|s| s.id.as_str()).collect::<Vec<_>>(),
            vec!["alpha", "mid", "zeta"]
        );
    }

    #[test]
    fn unknown_id_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let cat = Catalogue::open(dir.path());
        match cat.info("missing") {
            Err(ScenarioError::UnknownScenario { id }) => assert_eq!(id, "missing"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
