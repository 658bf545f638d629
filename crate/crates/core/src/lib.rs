//! Analysis toolkit for two competing information streams, such as
//! disinformation posts and the fact-checks that debunk them: engagement
//! comparison, VAR-based causality, topic clustering and duplicate detection.

pub mod causality;
pub mod dedup;
pub mod engagement;
pub mod error;
pub mod ingest;
pub mod linalg;
pub mod report;
pub mod rng;
pub mod synth;
pub mod timeseries;
pub mod topics;

pub use error::{Error, Result};
pub use ingest::{DateWindow, DebunkRecord, DebunkSource, MatchedPost, PostRecord, StreamLabel};
pub use linalg::Matrix;
pub use timeseries::{DailySeries, SeriesMatrix};
