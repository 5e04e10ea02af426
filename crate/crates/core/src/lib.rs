//! University profiling pipeline.
//!
//! Raw `def-instance` records are parsed by [`ingest`], deduplicated and
//! projected onto the canonical 20-attribute schema by [`integrate`],
//! serialized as ARFF by [`arff`] and summarised into class tables by
//! [`stats`]. User interest is modelled in [`profile`] as a smoothed
//! multinomial over attribute-value and keyword features, and
//! [`recommend`] ranks universities against it.

pub mod arff;
pub mod dataset_io;
pub mod ingest;
pub mod integrate;
pub mod lexicon;
pub mod profile;
pub mod recommend;
pub mod schema;
pub mod stats;

pub use arff::{emit_arff, parse_arff, ArffError};
pub use dataset_io::{load_dataset, read_canonical, write_canonical, DatasetIoError};
pub use ingest::{parse_raw, parse_raw_bytes, validate_raw, Diagnostic, RawRecord, Severity};
pub use integrate::{
    bin_applicants, bin_expenses, bin_students, build_dataset, dedupe, project, Dataset,
    IntegrationReport, UniversityProfile, Value,
};
pub use lexicon::Lexicon;
pub use profile::{
    EventPayload, ExplicitFields, Feature, ProfileConfig, ProfileError, ProfileEvent,
    ProfileStore, UserProfile,
};
pub use recommend::{Recommendation, RecommendError};
pub use schema::{AttributeDef, AttributeKind, AttributeSchema};
pub use stats::{ClassDistribution, ClassRow};
