use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point outside the grid domain: {axis} = {value} not in [{lo}, {hi}]")]
    Domain { axis: String, value: f64, lo: f64, hi: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("bad magic: expected \"SSTF1\", found {0:?}")]
    BadMagic(Vec<u8>),

    #[error("truncated field file: needed {needed} bytes, found {found}")]
    Truncated { needed: usize, found: usize },

    #[error("payload length {found} does not match header shape ({expected} values)")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("invalid header: {0}")]
    Header(String),

    #[error("non-finite input at node {0}")]
    NonFinite(usize),

    #[error("rank-deficient design: deficient directions {0:?}")]
    RankDeficient(Vec<String>),

    #[error("radius {r} outside the resolvable range [{lo}, {hi}]")]
    Unresolvable { r: f64, lo: f64, hi: f64 },

    #[error("degenerate second blow-up: H = {h:e} below 10x quadrature error {err:e}")]
    DegenerateBlowup { h: f64, err: f64 },

    #[error("region under-resolved: {0} sample points (need at least 100)")]
    UnderResolved(usize),

    #[error("search failed: {0}")]
    SearchFailure(String),

    #[error("example construction failed: {0}")]
    Construction(String),

    #[error("supports of glued copies {0} and {1} overlap")]
    Overlap(usize, usize),

    #[error("polynomial text parse error at line {line}: {msg}")]
    PolyParse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
