use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{q} has no inverse modulo {p}")]
    NotCoprime { q: i64, p: i64 },
    #[error("invalid lens space: {0}")]
    InvalidSpec(String),
    #[error("edge {0} is not in the triangulation")]
    UnknownEdge(String),
    #[error("degenerate geometric parameters: {0}")]
    DegenerateParams(String),
    #[error("degenerate tetrahedron (volume {volume:e})")]
    DegenerateTet { volume: f64 },
    #[error("lengths are not realizable as a Euclidean tetrahedron (Cayley-Menger {cayley_menger:e})")]
    NotRealizable { cayley_menger: f64 },
    #[error("edge {edge} has zero length")]
    ZeroLengthEdge { edge: usize },
    #[error("representation index k={k} is not coprime to p={p}")]
    DegenerateK { p: usize, k: usize },
    #[error("block structure violated: {0}")]
    BlockStructureViolation(String),
    #[error("block {j}: no nonsingular minor of the predicted size")]
    RankDeficient { j: usize },
    #[error("block {j}: selected minor is singular")]
    SingularMinor { j: usize },
    #[error("{}: {source}", cell_label(*.j, *.k))]
    Cell {
        j: Option<usize>,
        k: usize,
        #[source]
        source: Box<Error>,
    },
}

fn cell_label(j: Option<usize>, k: usize) -> String {
    match j {
        Some(j) => format!("j={j}, k={k}"),
        None => format!("k={k}"),
    }
}

impl Error {
    pub(crate) fn in_cell(self, j: Option<usize>, k: usize) -> Self {
        match self {
            e @ Error::Cell { .. } => e,
            e => Error::Cell { j, k, source: Box::new(e) },
        }
    }

    /// The innermost error, with cell context stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Cell { source, .. } => source.root(),
            e => e,
        }
    }
}
