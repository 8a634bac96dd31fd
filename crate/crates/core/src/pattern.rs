use crate::dataset::{Dataset, Selector};
use crate::error::{Error, Result};
use crate::measures::{Confusion, PatternStats};

/// An ordered selector conjunction claimed to characterize `target`.
#[derive(Clone, Debug, PartialEq)]
pub struct Pattern {
    pub target: String,
    pub selectors: Vec<Selector>,
}

impl Pattern {
    pub fn new(target: impl Into<String>, selectors: Vec<Selector>) -> Self {
        Pattern {
            target: target.into(),
            selectors,
        }
    }

    pub fn len(&self) -> usize {
        self.selectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selectors.is_empty()
    }

    /// Human-readable rule, `a == x AND b >= 2 -> yes`.
    pub fn describe(&self, d: &Dataset) -> String {
        let body = self
            .selectors
            .iter()
            .map(|s| d.describe(s))
            .collect::<Vec<_>>()
            .join(" AND ");
        format!("{body} -> {}", self.target)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvaluatedPattern {
    pub pattern: Pattern,
    pub stats: PatternStats,
}

/// Scores a pattern against a dataset whose target is resolved.
pub fn evaluate(d: &Dataset, pattern: Pattern) -> Result<EvaluatedPattern> {
    if pattern.is_empty() {
        return Err(Error::data(format!("pattern for `{}` has no selectors", pattern.target)));
    }
    for s in &pattern.selectors {
        d.validate_selector(s)?;
    }
    let positives = d.class_rows(&pattern.target)?;
    let cover = d.cover(&pattern.selectors);
    if cover.is_empty() {
        return Err(Error::data(format!("pattern `{}` covers no rows", pattern.describe(d))));
    }
    let stats = PatternStats::from_confusion(Confusion::from_rows(&cover, &positives))?;
    Ok(EvaluatedPattern { pattern, stats })
}
