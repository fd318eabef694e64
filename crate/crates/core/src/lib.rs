//! Disease co-occurrence mining over patient transaction data.
//!
//! The pipeline: ingest per-patient disease records ([`ingest`]), mine
//! frequent itemsets level-wise and derive directed support/confidence
//! rules ([`mining`]), and recompute metrics per demographic stratum
//! ([`strata`]). A seeded synthetic generator ([`synth`]) and an exhaustive
//! reference miner ([`oracle`]) back the test suites.
//!
//! All mining thresholds and percentages are handled in exact integer or
//! rational arithmetic; rounding happens only when values are formatted.

pub mod error;
pub mod ingest;
pub mod mining;
pub mod model;
pub mod oracle;
pub mod strata;
pub mod synth;

pub use error::{Error, Result};
pub use model::{
    DiseaseName, ItemSet, ItemsetCount, MiningConfig, Minsup, PatientId, Percentage, Rule,
    TransactionTable,
};
