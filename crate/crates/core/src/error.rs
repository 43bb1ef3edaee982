use crate::estimator::TrajectoryTrace;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong across the crate, from graph validation to
/// an aborted integration.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    // ---- graph construction & indexing -------------------------------------
    #[error("a graph needs at least one vertex")]
    EmptyGraph,

    #[error("edge {edge} is a self-loop on vertex {vertex}")]
    SelfLoop { edge: usize, vertex: usize },

    #[error("edge {edge} = ({head}, {tail}) references a vertex >= {n_vertices}")]
    EdgeIndexOutOfRange {
        edge: usize,
        head: usize,
        tail: usize,
        n_vertices: usize,
    },

    #[error("edge {edge} duplicates the directed pair ({head}, {tail})")]
    DuplicateEdge { edge: usize, head: usize, tail: usize },

    #[error("need at least {required} vertices, got {n}")]
    TooFewVertices { n: usize, required: usize },

    #[error("vertex index {vertex} out of range (graph has {n_vertices} vertices)")]
    VertexOutOfRange { vertex: usize, n_vertices: usize },

    #[error("edge index {edge} out of range (graph has {n_edges} edges)")]
    EdgeOutOfRange { edge: usize, n_edges: usize },

    // ---- framework geometry -------------------------------------------------
    #[error("{what}: expected {expected} entries, got {got}")]
    CountMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("{what} contains a non-finite value")]
    NonFinite { what: &'static str },

    #[error("edge {edge} = ({head}, {tail}) is degenerate: its endpoints coincide")]
    DegenerateEdge { edge: usize, head: usize, tail: usize },

    #[error("frameworks are built on different graphs")]
    GraphMismatch,

    #[error("scale must be positive, got {scale}")]
    NonPositiveScale { scale: f64 },

    #[error("all positions coincide; dilation and rotation generators are degenerate")]
    AllPositionsCoincident,

    // ---- rank / nullspace ---------------------------------------------------
    #[error("matrix contains non-finite entries")]
    NonFiniteMatrix,

    // ---- estimator ----------------------------------------------------------
    #[error("invalid estimator configuration: {reason}")]
    InvalidConfig { reason: String },

    #[error("reference agents iota and kappa coincide in space")]
    CoincidentAnchors,

    #[error(
        "estimate collapse on edge {edge} = ({head}, {tail}): \
         relative position norm {norm:.3e} is below the floor"
    )]
    EstimateCollapse {
        edge: usize,
        head: usize,
        tail: usize,
        norm: f64,
    },

    #[error("state became non-finite")]
    NonFiniteState,

    #[error("integration aborted at t = {time:.6} (step {step}): {cause}")]
    IntegrationAborted {
        time: f64,
        step: usize,
        cause: Box<Error>,
        /// Samples recorded before the abort, so callers can still flush a
        /// partial trace.
        partial: Box<TrajectoryTrace>,
    },

    #[error("seed {seed}: {cause}")]
    SeedRun { seed: u64, cause: Box<Error> },

    // ---- scenario files -----------------------------------------------------
    #[error("scenario field `{field}`: {reason}")]
    ScenarioInvalid { field: String, reason: String },

    #[error("scenario parse error: {0}")]
    ScenarioParse(#[from] toml::de::Error),

    #[error("scenario serialize error: {0}")]
    ScenarioSerialize(#[from] toml::ser::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
