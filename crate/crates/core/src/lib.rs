//! Subgroup set discovery with information-gain thresholds and odds-ratio
//! driven pattern cutting.
//!
//! The pipeline is [`dataset`] → [`search`] → [`refine`], run once per target
//! class in a One-vs-Rest decomposition. [`measures`] holds the quality
//! metrics and [`oracle`] an exhaustive cross-check for small inputs.
//!
//! ```
//! use igsd::{read_csv, mine, RefineConfig, SchemaHints, SearchConfig};
//!
//! let csv = "a,b,t\nx,p,yes\nx,p,yes\nx,q,yes\ny,q,no\ny,p,no\ny,q,no\n";
//! let d = read_csv(csv.as_bytes(), &SchemaHints::new())?.resolve_target(&["t"], 2)?;
//! let mining = mine(&d, &SearchConfig::default(), &RefineConfig { min_orr: 1, ..Default::default() })?;
//! assert!(mining.patterns().all(|p| p.evaluated.stats.p_value <= 0.05));
//! # Ok::<(), igsd::Error>(())
//! ```

pub mod dataset;
pub mod error;
pub mod measures;
pub mod oracle;
pub mod par;
pub mod pattern;
pub mod refine;
pub mod rowset;
pub mod search;

pub use dataset::{
    Column, ColumnKind, Condition, Dataset, NumericPolicy, Op, SchemaHints, Selector, TargetSpec, load_csv,
    load_schema_hints, read_csv,
};
pub use error::{Error, Result};
pub use measures::{Confusion, PatternStats, SetStats, set_stats};
pub use pattern::{EvaluatedPattern, Pattern, evaluate};
pub use refine::{CutMode, Mining, PrefixProfile, RefineConfig, mine};
pub use search::{Association, SearchConfig, ThresholdMode};
