//! Proof jobs: parsing, subdivided verification, certificates and reports.

pub mod cert;
pub mod geometry;
pub mod job;
pub mod report;
pub mod tail;
pub mod verify;

use thiserror::Error;

pub use cert::{parse_certificate, replay, render_certificate, ParsedCertificate, ReplayOutcome};
pub use geometry::Geometry;
pub use job::{FieldSpec, Mode, ProofJob, SetSpec};
pub use tail::{basis_from_segments, gencoords, TailBasis};
pub use verify::{prepare_tail, verify_job, Conclusion, InclusionResult, Outcome, PieceRecord, ProofCertificate, Strategy, VerifyOptions};

#[derive(Debug, Error, PartialEq)]
pub enum DriverError {
    #[error("job line {line}: {msg}")]
    Job { line: usize, msg: String },
    #[error("{0}")]
    Io(String),
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("malformed input: {0}")]
    Format(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
}
