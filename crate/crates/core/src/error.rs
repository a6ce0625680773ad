use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),
    #[error("polygon is not star-shaped with respect to a disc")]
    NotStarShaped,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("element {element}: {source}")]
    Element { element: usize, source: GeometryError },
    #[error("mesh parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("inconsistent mesh: {0}")]
    Inconsistent(String),
    #[error("element {0} has no admissible splitting chord")]
    NoAdmissibleChord(usize),
    #[error("elements {0} and {1} do not share an edge")]
    NotAdjacent(usize, usize),
    #[error("union of elements {0} and {1} is not star-shaped")]
    UnionNotStarShaped(usize, usize),
    #[error("unknown element id {0}")]
    UnknownElement(usize),
    #[error("elements {0} and {1} are not siblings of one split")]
    NotSiblings(usize, usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BemError {
    #[error("fundamental solution evaluated at coinciding points")]
    SingularEvaluation,
    #[error("single-layer Galerkin matrix is not positive definite")]
    SingleLayerNotSpd,
    #[error("evaluation point lies outside the element or on its boundary")]
    OutsideElement,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpaceError {
    #[error("approximation order must be at least 1, got {0}")]
    InvalidOrder(usize),
    #[error("no Dirichlet edge in the mesh")]
    MissingDirichlet,
    #[error("boundary data of degree {degree} exceeds order {order}")]
    DataOrderTooHigh { degree: usize, order: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("iterative solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("matrix is not positive definite")]
    Indefinite,
    #[error("dimension mismatch: matrix {matrix}, vector {vector}")]
    DimensionMismatch { matrix: usize, vector: usize },
}

/// Crate-level error.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Bem(#[from] BemError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("unknown problem '{0}'")]
    UnknownProblem(String),
    #[error("problem setup: {0}")]
    Problem(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
