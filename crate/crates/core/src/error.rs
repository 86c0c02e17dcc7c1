use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdecoError {
    #[error("invalid frame: sizes must be positive (lambda = {lambda}, mu = {mu})")]
    InvalidFrame { lambda: f64, mu: f64 },
    #[error("degenerate tensor: no preferred direction")]
    Degenerate,
    #[error("tensor has non-positive area {area}")]
    NonPositiveArea { area: f64 },
    #[error("recovered non-positive size at phi = {phi}: lambda = {lambda}, mu = {mu}")]
    NonPositiveSize { phi: f64, lambda: f64, mu: f64 },
}

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("{path}:{line}: parse error: {msg}")]
    Parse { path: String, line: usize, msg: String },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("unknown mesh format `{0}`")]
    UnknownFormat(String),
    #[error("triangle {tri} references missing node {node}")]
    MissingNode { tri: usize, node: usize },
    #[error("triangle {tri} is inverted or degenerate (signed area {area:e})")]
    InvertedTriangle { tri: usize, area: f64 },
    #[error("non-manifold edge ({a}, {b}) shared by triangles {tris:?}")]
    NonManifoldEdge { a: usize, b: usize, tris: Vec<usize> },
    #[error("non-manifold boundary at node {node}")]
    NonManifoldVertex { node: usize },
    #[error("tagged edge ({a}, {b}) is not a boundary edge")]
    TagOnInteriorEdge { a: usize, b: usize },
    #[error("mesh is empty")]
    Empty,
    #[error("mesh is not connected ({components} components)")]
    Disconnected { components: usize },
    #[error("sparse solver failure: {0}")]
    Solver(String),
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("boundary curve `{0}` has no size constraint")]
    UnconstrainedCurve(String),
    #[error("constraint refers to unknown boundary tag `{0}`")]
    UnknownTag(String),
    #[error("invalid size {size} for `{tag}` (sizes must be positive)")]
    InvalidSize { tag: String, size: f64 },
    #[error("curve `{0}` interpolates its neighbours' sizes but a neighbour does not define an endpoint size")]
    BlendNeighbor(String),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("node override {0} is not a boundary node")]
    OverrideNotOnBoundary(usize),
    #[error("linear solve failed for channel {channel}: {msg}")]
    LinearSolve { channel: usize, msg: String },
    #[error("initial state for stage {stage} (kappa = {kappa}) violates the area barrier")]
    InfeasibleStart { stage: usize, kappa: f64 },
}

#[derive(Debug, Error)]
pub enum ParamError {
    #[error("mesh region outside singular triangles is disconnected ({components} components)")]
    Disconnected { components: usize },
    #[error("inconsistent branch propagation at node {node}")]
    InconsistentBranch { node: usize },
    #[error("least-squares system is rank deficient (nullspace dimension {nullspace_dim})")]
    RankDeficient { nullspace_dim: usize },
    #[error("sparse solver failure: {0}")]
    Solver(String),
    #[error("frame count {frames} does not match node count {nodes}")]
    FrameCount { frames: usize, nodes: usize },
}
