use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found} ({context})")]
    DimensionMismatch {
        expected: usize,
        found: usize,
        context: String,
    },
    #[error("non-finite value in {context}")]
    NonFinite { context: String },
    #[error("duplicate row id `{0}`")]
    DuplicateId(String),
    #[error("dataset `{0}` is empty")]
    EmptyDataset(String),
    #[error("unknown dataset `{0}`")]
    UnknownDataset(String),
    #[error("row index {index} out of range ({len} rows)")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid mixture: {0}")]
    InvalidMixture(String),
    #[error("bandwidth for `{label}` is zero: {reason}")]
    DegenerateBandwidth { label: String, reason: String },
    #[error("gram cache needs {required} bytes, limit is {limit}")]
    ResourceLimit { required: usize, limit: usize },
    #[error("attribute `{name}` missing for rows {rows:?}")]
    MissingAttribute { name: String, rows: Vec<String> },
    #[error("attribute `{name}` is not numeric for row `{row}`: `{value}`")]
    NonNumericAttribute {
        name: String,
        row: String,
        value: String,
    },
    #[error("MMD² evaluated to {value}, below the -1e-9 roundoff tolerance")]
    NumericalIntegrity { value: f64 },
    #[error("greedy step stalled after {support_len} exemplars: every candidate is degenerate for all {active} active datasets")]
    Stall { support_len: usize, active: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
}
