use thiserror::Error;

/// Errors shared across the estimation, testing and simulation modules.
#[derive(Error, Debug)]
pub enum Error {
    /// An argument was outside its documented domain (non-finite, wrong
    /// sign, empty input, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// All observations of a column are identical where spread is required
    /// (e.g. Silverman's rule on a constant column).
    #[error("degenerate spread: all values are equal, bandwidth undefined")]
    DegenerateSpread,

    /// Every kernel weight underflowed to zero: the query point is too far
    /// from all design points at the chosen bandwidth.
    #[error("degenerate weights: kernel weight sum underflowed{}", match .row {
        Some(i) => format!(" while transforming row {i}"),
        None => String::new(),
    })]
    DegenerateWeights { row: Option<usize> },

    /// A correlation was requested on a constant margin.
    #[error("degenerate variance: {0} is constant")]
    DegenerateVariance(&'static str),

    /// Brute-force enumeration (or exhaustive permutation) would exceed the
    /// configured tuple budget.
    #[error("enumeration budget exceeded: {required} tuples needed, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    /// CSV input lacked a required column.
    #[error("missing column {name:?} in {path}")]
    MissingColumn { name: String, path: String },

    /// A CSV cell failed to parse as a finite number.
    #[error("bad cell at row {row}, column {column:?} of {path}: {reason}")]
    BadCell {
        row: usize,
        column: String,
        path: String,
        reason: String,
    },

    /// CSV input contained a header but no data rows.
    #[error("empty dataset: {path} has no data rows")]
    EmptyDataset { path: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
