//! Seeded random topologies.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, NodeId};

/// Regeneration attempts before giving up on a connected sample.
pub const MAX_ATTEMPTS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    /// Each pair linked independently with probability `p`.
    Er { p: f64 },
    /// Points uniform in the unit square, linked within distance `d_c`.
    Rg { d_c: f64 },
    /// Preferential attachment with `rho` links per arriving node.
    Ba { rho: usize },
}

impl Family {
    pub fn tag(&self) -> &'static str {
        match self {
            Family::Er { .. } => "er",
            Family::Rg { .. } => "rg",
            Family::Ba { .. } => "ba",
        }
    }

    pub fn param(&self) -> f64 {
        match *self {
            Family::Er { p } => p,
            Family::Rg { d_c } => d_c,
            Family::Ba { rho } => rho as f64,
        }
    }

    /// Parses `er|rg|ba` with its parameter.
    pub fn parse(tag: &str, param: f64) -> Result<Self, GenerationError> {
        match tag.to_ascii_lowercase().as_str() {
            "er" => Ok(Family::Er { p: param }),
            "rg" => Ok(Family::Rg { d_c: param }),
            "ba" if param >= 1.0 && param.fract() == 0.0 => Ok(Family::Ba {
                rho: param as usize,
            }),
            "ba" => Err(GenerationError::InvalidSpec(format!(
                "BA attachment count must be a positive integer, got {param}"
            ))),
            other => Err(GenerationError::InvalidSpec(format!(
                "unknown family `{other}`"
            ))),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.tag(), self.param())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub family: Family,
    pub nodes: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum GenerationError {
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("no connected sample after {0} attempts")]
    GenerationExhausted(usize),
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<(), GenerationError> {
        let bad = |s: String| Err(GenerationError::InvalidSpec(s));
        if self.nodes < 2 {
            return bad(format!("need at least 2 nodes, got {}", self.nodes));
        }
        match self.family {
            Family::Er { p } if !(p > 0.0 && p < 1.0) => {
                bad(format!("ER p must be in (0,1), got {p}"))
            }
            // d_c = 0 is accepted; it simply never yields a connected sample
            Family::Rg { d_c } if !(0.0..std::f64::consts::SQRT_2).contains(&d_c) => {
                bad(format!("RG d_c must be in [0, sqrt 2), got {d_c}"))
            }
            Family::Ba { rho } if rho == 0 || rho >= self.nodes => {
                bad(format!("BA rho must be in 1..{}, got {rho}", self.nodes))
            }
            _ => Ok(()),
        }
    }
}

/// `n000`-style identifiers, zero-padded so that name order is index order.
pub fn node_names(m: usize) -> Vec<String> {
    let width = (m.saturating_sub(1)).to_string().len().max(3);
    (0..m).map(|i| format!("n{i:0width$}")).collect()
}

fn erdos_renyi(m: usize, p: f64, rng: &mut ChaCha8Rng) -> Vec<(NodeId, NodeId)> {
    let mut out = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            if rng.gen_bool(p) {
                out.push((i, j));
            }
        }
    }
    out
}

fn geometric(m: usize, d_c: f64, rng: &mut ChaCha8Rng) -> Vec<(NodeId, NodeId)> {
    let pts: Vec<(f64, f64)> = (0..m)
        .map(|_| (rng.gen::<f64>(), rng.gen::<f64>()))
        .collect();
    let mut out = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            let (dx, dy) = (pts[i].0 - pts[j].0, pts[i].1 - pts[j].1);
            if (dx * dx + dy * dy).sqrt() <= d_c {
                out.push((i, j));
            }
        }
    }
    out
}

fn barabasi_albert(m: usize, rho: usize, rng: &mut ChaCha8Rng) -> Vec<(NodeId, NodeId)> {
    let mut out = Vec::new();
    // every link contributes both endpoints, so sampling from this list is
    // degree-proportional
    let mut ends: Vec<NodeId> = Vec::new();
    for i in 0..=rho {
        for j in i + 1..=rho {
            out.push((i, j));
            ends.extend([i, j]);
        }
    }
    for v in rho + 1..m {
        let mut targets: Vec<NodeId> = Vec::with_capacity(rho);
        while targets.len() < rho {
            let &w = ends.choose(rng).expect("seed clique has links");
            if !targets.contains(&w) {
                targets.push(w);
            }
        }
        for w in targets {
            out.push((w, v));
            ends.extend([w, v]);
        }
    }
    out
}

/// Samples a connected graph; deterministic per spec.
pub fn generate(spec: &GeneratorSpec) -> Result<Graph, GenerationError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let names = node_names(spec.nodes);
    for _ in 0..MAX_ATTEMPTS {
        let links = match spec.family {
            Family::Er { p } => erdos_renyi(spec.nodes, p, &mut rng),
            Family::Rg { d_c } => geometric(spec.nodes, d_c, &mut rng),
            Family::Ba { rho } => barabasi_albert(spec.nodes, rho, &mut rng),
        };
        let g = Graph::from_indexed(names.clone(), &links).expect("generated links are simple");
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(GenerationError::GenerationExhausted(MAX_ATTEMPTS))
}
