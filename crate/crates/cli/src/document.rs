//! The pattern document: discovered patterns plus everything needed to
//! reproduce and re-score them, as canonical JSON.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use igsd::refine::{Mining, PrefixProfile};
use igsd::{Condition, Dataset, EvaluatedPattern, Pattern, PatternStats, Selector, SetStats, set_stats};
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use serde_json::Value;

use crate::CliError;

pub const FORMAT_VERSION: u32 = 1;

/// An odds ratio; `+∞` is written as the string `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Odds(pub f64);

impl Serialize for Odds {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0 == f64::INFINITY {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Odds {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct OddsVisitor;

        impl Visitor<'_> for OddsVisitor {
            type Value = Odds;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a non-negative number or \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Odds, E> {
                Ok(Odds(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Odds, E> {
                Ok(Odds(v as f64))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Odds, E> {
                Ok(Odds(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Odds, E> {
                match v {
                    "inf" => Ok(Odds(f64::INFINITY)),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }

        d.deserialize_any(OddsVisitor)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub rows: usize,
    pub columns: Vec<String>,
    pub content_hash: String,
}

impl Fingerprint {
    pub fn of(raw: &Dataset) -> Self {
        Fingerprint {
            rows: raw.n_rows(),
            columns: raw.column_names(),
            content_hash: raw.content_hash(),
        }
    }
}

fn default_association() -> String {
    "any".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub target_columns: Vec<String>,
    pub bins: usize,
    pub t_mode: String,
    pub dmax: usize,
    pub cond_list: Vec<String>,
    pub time_budget: f64,
    pub cuts_per_column: usize,
    pub numeric_policy: String,
    #[serde(default = "default_association")]
    pub association: String,
    pub min_orr: u8,
    pub cut_mode: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectorDoc {
    pub attribute: String,
    pub op: String,
    /// A string for `==`, a number for `<=`/`>=`, `[lo, hi]` with `null`
    /// for an open end for `in`.
    pub value: Value,
}

impl SelectorDoc {
    pub fn of(d: &Dataset, s: &Selector) -> Self {
        let value = match &s.condition {
            Condition::Eq(v) => Value::from(v.as_str()),
            Condition::Le(x) | Condition::Ge(x) => Value::from(*x),
            Condition::In { lo, hi } => Value::Array(vec![Value::from(*lo), Value::from(*hi)]),
        };
        SelectorDoc {
            attribute: d.column_name(s.attribute).to_string(),
            op: s.op().to_string(),
            value,
        }
    }

    pub fn to_selector(&self, d: &Dataset) -> Result<Selector, CliError> {
        let attribute = d
            .column_index(&self.attribute)
            .ok_or_else(|| CliError::data(format!("pattern attribute `{}` is not a dataset column", self.attribute)))?;
        let bad = || CliError::data(format!("bad value {} for `{}` {}", self.value, self.attribute, self.op));
        let bound = |v: &Value| -> Result<Option<f64>, CliError> {
            match v {
                Value::Null => Ok(None),
                v => v.as_f64().map(Some).ok_or_else(bad),
            }
        };
        let condition = match self.op.as_str() {
            "==" => Condition::Eq(self.value.as_str().ok_or_else(bad)?.to_string()),
            "<=" => Condition::Le(self.value.as_f64().ok_or_else(bad)?),
            ">=" => Condition::Ge(self.value.as_f64().ok_or_else(bad)?),
            "in" => match self.value.as_array().map(Vec::as_slice) {
                Some([lo, hi]) => Condition::In {
                    lo: bound(lo)?,
                    hi: bound(hi)?,
                },
                _ => return Err(bad()),
            },
            other => return Err(CliError::data(format!("unknown operator `{other}`"))),
        };
        let selector = Selector { attribute, condition };
        d.validate_selector(&selector)?;
        Ok(selector)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileDoc {
    pub ig: Vec<f64>,
    pub odds: Vec<Odds>,
    pub orr: Vec<u8>,
    pub p_value: Vec<f64>,
}

impl From<&PrefixProfile> for ProfileDoc {
    fn from(p: &PrefixProfile) -> Self {
        ProfileDoc {
            ig: p.ig.clone(),
            odds: p.odds.iter().map(|&o| Odds(o)).collect(),
            orr: p.orr.clone(),
            p_value: p.p.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsDoc {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
    pub coverage: f64,
    pub confidence: f64,
    pub wracc: f64,
    pub accuracy: f64,
    pub info_gain: f64,
    pub odds: Odds,
    pub orr: u8,
    pub p_value: f64,
}

impl From<&PatternStats> for StatsDoc {
    fn from(s: &PatternStats) -> Self {
        StatsDoc {
            tp: s.confusion.tp,
            fp: s.confusion.fp,
            fn_: s.confusion.fn_,
            tn: s.confusion.tn,
            coverage: s.cov,
            confidence: s.cnf,
            wracc: s.wracc,
            accuracy: s.acc_contrib,
            info_gain: s.ig,
            odds: Odds(s.odds),
            orr: s.orr,
            p_value: s.p_value,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternDoc {
    pub target: String,
    pub selectors: Vec<SelectorDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<ProfileDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats: Option<StatsDoc>,
}

impl PatternDoc {
    pub fn to_pattern(&self, d: &Dataset) -> Result<Pattern, CliError> {
        let selectors = self
            .selectors
            .iter()
            .map(|s| s.to_selector(d))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Pattern::new(self.target.clone(), selectors))
    }
}

/// The nine summary metrics of a pattern set.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SetStatsDoc {
    pub size: usize,
    pub length: Option<f64>,
    pub coverage: Option<f64>,
    pub wracc: Option<f64>,
    pub confidence: Option<f64>,
    pub accuracy: Option<f64>,
    pub info_gained: Option<f64>,
    pub odd_range: Option<f64>,
    pub p_value: Option<f64>,
}

impl From<&SetStats> for SetStatsDoc {
    fn from(s: &SetStats) -> Self {
        SetStatsDoc {
            size: s.size,
            length: s.length,
            coverage: s.cov_mean,
            wracc: s.wracc_mean,
            confidence: s.cnf_mean,
            accuracy: s.accuracy,
            info_gained: s.ig_mean,
            odd_range: s.orr_mean,
            p_value: s.p_value_agg,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SetStatsGroup {
    pub overall: SetStatsDoc,
    pub by_target: BTreeMap<String, SetStatsDoc>,
}

impl SetStatsGroup {
    /// Overall and per-class aggregates; classes without patterns are listed
    /// with empty statistics.
    pub fn compute(d: &Dataset, patterns: &[EvaluatedPattern]) -> Result<Self, CliError> {
        let mut by_target = BTreeMap::new();
        for class in d.target_classes()? {
            let subset: Vec<EvaluatedPattern> =
                patterns.iter().filter(|p| p.pattern.target == class).cloned().collect();
            by_target.insert(class, SetStatsDoc::from(&set_stats(d, &subset)?));
        }
        Ok(SetStatsGroup {
            overall: SetStatsDoc::from(&set_stats(d, patterns)?),
            by_target,
        })
    }
}

/// A pattern set with provenance. Only `patterns` is required when reading,
/// so sets produced by other tools can be scored in the same schema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternDocument {
    #[serde(default = "default_version")]
    pub format_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<Fingerprint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<ConfigEcho>,
    #[serde(default)]
    pub truncated: bool,
    pub patterns: Vec<PatternDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set_stats: Option<SetStatsGroup>,
}

fn default_version() -> u32 {
    FORMAT_VERSION
}

impl PatternDocument {
    /// Document for a finished mining run on the target-resolved dataset `d`,
    /// loaded from `raw`.
    pub fn from_mining(raw: &Dataset, d: &Dataset, config: ConfigEcho, mining: &Mining) -> Result<Self, CliError> {
        let patterns = mining
            .patterns()
            .map(|p| PatternDoc {
                target: p.evaluated.pattern.target.clone(),
                selectors: p.evaluated.pattern.selectors.iter().map(|s| SelectorDoc::of(d, s)).collect(),
                profile: Some(ProfileDoc::from(&p.profile)),
                stats: Some(StatsDoc::from(&p.evaluated.stats)),
            })
            .collect();
        Ok(PatternDocument {
            format_version: FORMAT_VERSION,
            dataset: Some(Fingerprint::of(raw)),
            config: Some(config),
            truncated: mining.truncated(),
            patterns,
            set_stats: Some(SetStatsGroup::compute(d, &mining.evaluated())?),
        })
    }

    /// Canonical form: keys sorted, two-space indent, trailing newline.
    pub fn to_canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("documents serialize");
        let mut text = serde_json::to_string_pretty(&value).expect("values serialize");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::data(format!("invalid pattern document: {e}")))
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.to_canonical_json()).map_err(|e| CliError::io(path, e))
    }
}
