use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("duplicate node identifier `{0}`")]
    DuplicateNode(String),
    #[error("duplicate link {0}|{1}")]
    DuplicateLink(String, String),
    #[error("self-loop at `{0}`")]
    SelfLoop(String),
    #[error("link endpoint `{0}` is not a declared node")]
    UnknownEndpoint(String),
    #[error("monitor `{0}` is not a node of the graph")]
    UnknownMonitor(String),
    #[error("node identifier `{0}` is reserved for a virtual node")]
    ReservedIdentifier(String),
    #[error("at least two monitors are required, got {0}")]
    TooFewMonitors(usize),
    #[error("graph is not connected")]
    Disconnected,
    #[error("every monitor is a cutvertex; the network is not identifiable")]
    NoNonCutvertexMonitor,
    #[error(
        "root-adjacent monitor `{0}` must be a monitor distinct from the non-cutvertex monitor"
    )]
    InvalidRootMonitor(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("ear decomposition failed after {} ears: {reason}", .partial.len())]
pub struct DecompositionError {
    pub partial: Vec<Vec<String>>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("no eligible {tree} parent for node `{node}`")]
    NoEligibleParent { tree: &'static str, node: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PathError {
    #[error("segments of `{node}` on trees {a} and {b} intersect")]
    NonSimpleUnion { node: String, a: usize, b: usize },
    #[error("no embedding path for non-tree link {0}")]
    NoEmbeddingPath(String),
    #[error("non-tree path for {0} duplicates an existing path")]
    DuplicateNonTreePath(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("no metric available for link {0}")]
    MissingMetric(String),
    #[error("inconsistent derivations for link {link}: {values:?}")]
    InconsistentDerivation { link: String, values: Vec<f64> },
    #[error("measurement matrix is singular ({rows} paths, {cols} links)")]
    SingularMatrix { rows: usize, cols: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error("identity {name} violated: {detail}")]
    IdentityViolation { name: String, detail: String },
    #[error("residue of cycle {0} is not a simple monitor-to-monitor path")]
    NonPathResidue(usize),
}

/// Any failure of the end-to-end pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("network is not identifiable: extended graph is not 3-vertex-connected")]
    NotIdentifiable,
    #[error(transparent)]
    Decomposition(#[from] DecompositionError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
