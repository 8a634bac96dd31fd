//! Optimal cut of candidate patterns and assembly of the final pattern sets.
//!
//! A candidate's selectors are in addition order, so each prefix is itself a
//! pattern. The cut keeps the prefix that ends at the best position among
//! those whose IG clears the dynamic threshold and whose p-value is
//! significant, scanning forward while the ORR band improves.

use std::collections::HashMap;
use std::fmt;
use std::time::Instant;

use crate::dataset::{Dataset, TargetSpec};
use crate::error::{Error, Result};
use crate::measures::{Confusion, PatternStats, SIGNIFICANCE, chi2_p, info_gain, odds_ratio, orr};
use crate::par::*;
use crate::pattern::{EvaluatedPattern, Pattern};
use crate::rowset::RowSet;
use crate::search::{Candidate, PassContext, SearchConfig, SearchSpace, SelectorId, SelectorSeq, ig_threshold};

/// Statistics of every prefix of a pattern; entry `j` describes the prefix of
/// length `j + 1`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PrefixProfile {
    pub confusion: Vec<Confusion>,
    pub ig: Vec<f64>,
    pub odds: Vec<f64>,
    pub orr: Vec<u8>,
    pub p: Vec<f64>,
}

impl PrefixProfile {
    /// Profile of an explicit sequence of prefix tables.
    pub fn from_confusions(confusion: Vec<Confusion>) -> Self {
        let ig = confusion.iter().map(info_gain).collect();
        let odds: Vec<f64> = confusion.iter().map(odds_ratio).collect();
        let orr = odds.iter().map(|&o| orr(o)).collect();
        let p = confusion.iter().map(chi2_p).collect();
        PrefixProfile {
            confusion,
            ig,
            odds,
            orr,
            p,
        }
    }

    /// Profile from raw IG / ORR / p sequences, for tracing the cut by hand.
    /// The odds entries are left as band representatives.
    pub fn from_parts(ig: Vec<f64>, orr: Vec<u8>, p: Vec<f64>) -> Self {
        assert!(ig.len() == orr.len() && ig.len() == p.len(), "profile sequences differ in length");
        assert!(orr.iter().all(|b| (1..=4).contains(b)), "ORR bands are 1..=4");
        let odds = orr.iter().map(|&b| [1.0, 2.0, 5.0, 7.0][b as usize - 1]).collect();
        PrefixProfile {
            confusion: Vec::new(),
            ig,
            odds,
            orr,
            p,
        }
    }

    pub fn len(&self) -> usize {
        self.ig.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ig.is_empty()
    }

    pub fn truncated(&self, len: usize) -> Self {
        PrefixProfile {
            confusion: self.confusion.iter().take(len).copied().collect(),
            ig: self.ig[..len].to_vec(),
            odds: self.odds[..len].to_vec(),
            orr: self.orr[..len].to_vec(),
            p: self.p[..len].to_vec(),
        }
    }
}

/// Confusion tables of the prefixes of `ids`.
fn prefix_confusions(space: &SearchSpace<'_>, positives: &RowSet, ids: &[SelectorId]) -> Vec<Confusion> {
    let n = space.dataset().n_rows();
    let mut cover = RowSet::full(n);
    ids.iter()
        .map(|&id| {
            cover.intersect_with(space.selector_cover(id));
            Confusion::from_rows(&cover, positives)
        })
        .collect()
}

pub fn prefix_profile(space: &SearchSpace<'_>, positives: &RowSet, ids: &[SelectorId]) -> PrefixProfile {
    PrefixProfile::from_confusions(prefix_confusions(space, positives, ids))
}

/// Profile of a pattern given by explicit selectors.
pub fn pattern_profile(d: &Dataset, pattern: &Pattern) -> Result<PrefixProfile> {
    let positives = d.class_rows(&pattern.target)?;
    let mut cover = RowSet::full(d.n_rows());
    let confusion = pattern
        .selectors
        .iter()
        .map(|s| {
            cover.intersect_with(&d.selector_cover(s));
            Confusion::from_rows(&cover, &positives)
        })
        .collect();
    Ok(PrefixProfile::from_confusions(confusion))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum CutMode {
    /// Keep the prefix through the best position.
    #[default]
    Inclusive,
    /// Keep the prefix before the best position.
    Exclusive,
}

impl CutMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CutMode::Inclusive => "inclusive",
            CutMode::Exclusive => "exclusive",
        }
    }
}

impl fmt::Display for CutMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for CutMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inclusive" => Ok(CutMode::Inclusive),
            "exclusive" => Ok(CutMode::Exclusive),
            other => Err(Error::config(format!("unknown cut mode `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RefineConfig {
    pub cut_mode: CutMode,
    /// Cut patterns whose ORR band is below this are discarded. 1 keeps all.
    pub min_orr: u8,
}

impl Default for RefineConfig {
    fn default() -> Self {
        RefineConfig {
            cut_mode: CutMode::Inclusive,
            min_orr: 2,
        }
    }
}

impl RefineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=4).contains(&self.min_orr) {
            return Err(Error::config(format!("min ORR {} outside 1..=4", self.min_orr)));
        }
        Ok(())
    }
}

/// Positions that clear both the dynamic IG threshold of the whole profile
/// and the significance level.
pub fn cut_candidates(profile: &PrefixProfile) -> Vec<usize> {
    if profile.is_empty() {
        return Vec::new();
    }
    let t = ig_threshold(&profile.ig);
    (0..profile.len())
        .filter(|&j| profile.ig[j] >= t && profile.p[j] <= SIGNIFICANCE)
        .collect()
}

/// Best position among the cut candidates, or `None` when none survive.
pub fn best_position(profile: &PrefixProfile) -> Option<usize> {
    let survivors = cut_candidates(profile);
    let (&first, rest) = survivors.split_first()?;
    let mut best = (0, first);
    let mut prev = first;
    for (k, &pos) in rest.iter().enumerate() {
        let k = k + 1;
        let (now, before) = (profile.orr[pos], profile.orr[prev]);
        if now > before {
            best = (k, pos);
        } else if now < before || k != best.0 + 1 {
            break;
        }
        prev = pos;
    }
    Some(best.1)
}

/// Number of leading selectors to keep; 0 discards the pattern.
pub fn optimal_cut(profile: &PrefixProfile, mode: CutMode) -> usize {
    match (best_position(profile), mode) {
        (None, _) => 0,
        (Some(pos), CutMode::Inclusive) => pos + 1,
        (Some(pos), CutMode::Exclusive) => pos,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CutResult<S> {
    pub kept_length: usize,
    pub pattern: Vec<S>,
    /// `None` iff the pattern was discarded.
    pub stats: Option<PatternStats>,
}

/// Applies the optimal cut to an explicit selector sequence.
pub fn cut<S: Clone>(profile: &PrefixProfile, selectors: &[S], mode: CutMode) -> CutResult<S> {
    assert_eq!(profile.len(), selectors.len(), "profile does not match the pattern");
    let kept_length = optimal_cut(profile, mode);
    let stats = (kept_length > 0)
        .then(|| profile.confusion.get(kept_length - 1))
        .flatten()
        .and_then(|c| PatternStats::from_confusion(*c).ok());
    CutResult {
        kept_length,
        pattern: selectors[..kept_length].to_vec(),
        stats,
    }
}

/// A cut pattern in selector-id form.
#[derive(Clone, Debug, PartialEq)]
pub struct Refined {
    pub selectors: SelectorSeq,
    pub profile: PrefixProfile,
    pub stats: PatternStats,
    /// IG of the uncut candidate this pattern came from.
    pub source_ig: f64,
}

const REFINE_CHUNK: usize = 1 << 16;

fn refine_one(ctx: &PassContext<'_, '_>, cfg: &RefineConfig, c: &Candidate) -> Option<Refined> {
    let profile = prefix_profile(ctx.space, &ctx.positives, &c.selectors);
    let kept = optimal_cut(&profile, cfg.cut_mode);
    if kept == 0 || profile.orr[kept - 1] < cfg.min_orr {
        return None;
    }
    let selectors = SelectorSeq::from_slice(&c.selectors[..kept]);
    let attrs: Vec<usize> = selectors.iter().map(|&id| ctx.space.attribute(id)).collect();
    if !ctx.cond_attrs.iter().all(|a| attrs.contains(a)) {
        return None;
    }
    let profile = profile.truncated(kept);
    let stats = PatternStats::from_confusion(profile.confusion[kept - 1]).ok()?;
    Some(Refined {
        selectors,
        profile,
        stats,
        source_ig: c.ig,
    })
}

/// Cuts every frontier candidate and merges the results in frontier order.
/// Patterns with equal selector sets keep the one from the candidate with the
/// higher IG, the earlier on ties, at the first occurrence's position.
pub fn refine_set(ctx: &PassContext<'_, '_>, cfg: &RefineConfig, frontier: &[Candidate]) -> Vec<Refined> {
    let mut slot_of: HashMap<SelectorSeq, usize> = HashMap::new();
    let mut out: Vec<Refined> = Vec::new();
    for chunk in frontier.chunks(REFINE_CHUNK) {
        let cut: Vec<Option<Refined>> = chunk.par_iter().map(|c| refine_one(ctx, cfg, c)).collect();
        for r in cut.into_iter().flatten() {
            let mut key = r.selectors.clone();
            key.sort_unstable();
            match slot_of.get(&key) {
                Some(&slot) => {
                    if r.source_ig > out[slot].source_ig {
                        out[slot] = r;
                    }
                }
                None => {
                    slot_of.insert(key, out.len());
                    out.push(r);
                }
            }
        }
    }
    out
}

/// Final patterns for one target class.
#[derive(Clone, Debug)]
pub struct PassOutcome {
    pub target: TargetSpec,
    pub frontier_size: usize,
    pub truncated: bool,
    pub patterns: Vec<ProfiledPattern>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProfiledPattern {
    pub evaluated: EvaluatedPattern,
    pub profile: PrefixProfile,
}

#[derive(Clone, Debug)]
pub struct Mining {
    pub passes: Vec<PassOutcome>,
}

impl Mining {
    pub fn truncated(&self) -> bool {
        self.passes.iter().any(|p| p.truncated)
    }

    pub fn patterns(&self) -> impl Iterator<Item = &ProfiledPattern> {
        self.passes.iter().flat_map(|p| &p.patterns)
    }

    pub fn evaluated(&self) -> Vec<EvaluatedPattern> {
        self.patterns().map(|p| p.evaluated.clone()).collect()
    }
}

/// Search and refinement for every One-vs-Rest pass. Each pass's frontier is
/// dropped once its patterns are cut.
pub fn mine(d: &Dataset, search: &SearchConfig, refine: &RefineConfig) -> Result<Mining> {
    refine.validate()?;
    search.cond_attributes(d)?;
    let space = SearchSpace::for_config(d, search)?;
    mine_in(&space, search, refine)
}

pub fn mine_in(space: &SearchSpace<'_>, search: &SearchConfig, refine: &RefineConfig) -> Result<Mining> {
    let deadline = Instant::now() + search.time_budget;
    let mut passes = Vec::new();
    for target in space.dataset().ovr_passes()? {
        let ctx = PassContext::new(space, &target, search)?;
        let (frontier, truncated) = ctx.run(deadline);
        let refined = refine_set(&ctx, refine, &frontier);
        let frontier_size = frontier.len();
        drop(frontier);
        let patterns = refined
            .into_iter()
            .map(|r| ProfiledPattern {
                evaluated: EvaluatedPattern {
                    pattern: Pattern::new(target.positive_class.clone(), space.resolve(&r.selectors)),
                    stats: r.stats,
                },
                profile: r.profile,
            })
            .collect();
        passes.push(PassOutcome {
            target,
            frontier_size,
            truncated,
            patterns,
        });
    }
    Ok(Mining { passes })
}
