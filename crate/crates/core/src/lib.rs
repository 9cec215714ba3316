//! Trace link recovery between architecture documentation, architecture
//! models and code.
//!
//! The pipeline: extract a simple architecture model (component names) from
//! documentation or code ([`exarch`]), recognize and match architecture
//! entities in the documentation ([`artemis`]), link components to files
//! ([`linker`]), compose the two link sets ([`transitive`]) and evaluate
//! against gold standards ([`eval`]).

pub mod artemis;
pub mod code;
pub mod eval;
pub mod exarch;
pub mod linker;
pub mod llm;
pub mod model;
pub mod similarity;
pub mod transitive;

pub use code::{CodeModel, ScanConfig};
pub use eval::{ConfusionCounts, Metrics, ProjectResult, Report, WilcoxonResult};
pub use llm::{Cassette, Gateway, LlmMode, ModelSettings};
pub use model::{
    CodeArtifact, Component, GoldStandard, LinkKind, LinkSet, Provenance, SadDocument, Sam, Sentence, TraceLink,
};
