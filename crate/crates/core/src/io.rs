//! JSON graph files.
//!
//! ```json
//! {"nodes": ["a", "b"], "links": [["a", "b"]], "monitors": ["a", "b"],
//!  "metrics": {"a|b": 1.0}}
//! ```
//!
//! Metric keys name a link by its endpoints joined with `|`; `monitors` and
//! `metrics` may be omitted.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::GraphError;
use crate::extended::monitor_ids;
use crate::graph::{Graph, NodeId};
use crate::solver::MetricAssignment;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed graph JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("metric key `{0}` does not name a link")]
    UnknownMetricLink(String),
    #[error("metric for `{0}` must be finite")]
    InvalidMetric(String),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub nodes: Vec<String>,
    pub links: Vec<(String, String)>,
    #[serde(default)]
    pub monitors: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metrics: BTreeMap<String, f64>,
}

/// A parsed graph file.
#[derive(Clone, Debug)]
pub struct Instance {
    pub graph: Graph,
    pub monitors: Vec<NodeId>,
    /// `None` when the file carries no metrics.
    pub metrics: Option<MetricAssignment>,
}

impl GraphFile {
    pub fn from_json(s: &str) -> Result<Self, FormatError> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn from_parts(g: &Graph, monitors: &[NodeId], metrics: Option<&MetricAssignment>) -> Self {
        GraphFile {
            nodes: g.names().to_vec(),
            links: g
                .links()
                .iter()
                .map(|l| (g.name(l.lo()).to_string(), g.name(l.hi()).to_string()))
                .collect(),
            monitors: monitors.iter().map(|&v| g.name(v).to_string()).collect(),
            metrics: metrics.map(|m| m.to_named(g)).unwrap_or_default(),
        }
    }

    pub fn to_instance(&self) -> Result<Instance, FormatError> {
        let pairs: Vec<(&str, &str)> = self
            .links
            .iter()
            .map(|(a, b)| (a.as_str(), b.as_str()))
            .collect();
        let graph = Graph::build(
            &self.nodes.iter().map(String::as_str).collect::<Vec<_>>(),
            &pairs,
        )?;
        let monitors = monitor_ids(&graph, &self.monitors)?;
        let metrics = if self.metrics.is_empty() {
            None
        } else {
            let mut w = MetricAssignment::default();
            for (key, &x) in &self.metrics {
                let l = graph
                    .parse_link_key(key)
                    .ok_or_else(|| FormatError::UnknownMetricLink(key.clone()))?;
                if !x.is_finite() {
                    return Err(FormatError::InvalidMetric(key.clone()));
                }
                w.insert(l, x);
            }
            Some(w)
        };
        Ok(Instance {
            graph,
            monitors,
            metrics,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{f1_metrics, k4};

    #[test]
    fn round_trip() {
        let g = k4();
        let file = GraphFile::from_parts(&g, &[0, 1, 2], Some(&f1_metrics()));
        assert_eq!(file.metrics["a|b"], 1.0);
        let back = GraphFile::from_json(&file.to_json())
            .unwrap()
            .to_instance()
            .unwrap();
        assert_eq!(back.graph, g);
        assert_eq!(back.monitors, vec![0, 1, 2]);
        assert_eq!(back.metrics, Some(f1_metrics()));
    }

    #[test]
    fn rejects_bad_files() {
        let bad_key = r#"{"nodes":["a","b"],"links":[["a","b"]],"metrics":{"a|c":1.0}}"#;
        assert!(matches!(
            GraphFile::from_json(bad_key).unwrap().to_instance(),
            Err(FormatError::UnknownMetricLink(_))
        ));
        let loop_ = r#"{"nodes":["a"],"links":[["a","a"]]}"#;
        assert!(matches!(
            GraphFile::from_json(loop_).unwrap().to_instance(),
            Err(FormatError::Graph(GraphError::SelfLoop(_)))
        ));
        assert!(GraphFile::from_json("{").is_err());
        let reversed = r#"{"nodes":["a","b"],"links":[["b","a"]],"metrics":{"b|a":2.0}}"#;
        let inst = GraphFile::from_json(reversed)
            .unwrap()
            .to_instance()
            .unwrap();
        assert_eq!(inst.metrics.unwrap().len(), 1);
    }
}
