//! Mamdani fuzzy inference: trapezoidal sets, rule tables, membership-function
//! genomes, a page-batched engine and a scalar reference engine.

mod batch;
mod genome;
mod scalar;
mod set;
mod spec;

pub use batch::{
    defuzzify_batch, evaluate_batch, fuzzify_batch, infer_batch, Activations, FisBatch,
    MembershipBatch,
};
pub use genome::{decode_genome, genome_len_for, MfGenome, GENOME_LEN};
pub use scalar::evaluate_scalar;
pub use set::{TrapezoidSet, VariablePartition};
pub use spec::{FisSpec, RuleTable, DEFAULT_N_DIS};


use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FisError {
    #[error("invalid trapezoid corners {0:?}: need a <= b <= c <= d")]
    InvalidSet([f64; 4]),
    #[error("invalid partition {0}")]
    InvalidPartition(String),
    #[error("invalid rule table: {0}")]
    InvalidRules(String),
    #[error("rule {rule} column {column}: index {index} outside 1..={n_sets}")]
    RuleIndex {
        rule: usize,
        column: usize,
        index: usize,
        n_sets: usize,
    },
    #[error("discretization count {0} is below 2")]
    Discretization(usize),
    #[error("genome must have {expected} genes, got {got}")]
    GenomeLength { expected: usize, got: usize },
    #[error("gene {index} = {value} is outside [0, 1]")]
    GeneOutOfRange { index: usize, value: f64 },
    #[error("{what}: expected {expected} entries, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("page {0} does not share the rule table, universes or discretization of page 0")]
    PageMismatch(usize),
    #[error("fis config: {0}")]
    Parse(String),
}
