//! Depth-bounded expansion of overlapping subgroup candidates.
//!
//! Every One-vs-Rest pass starts from the single selectors whose information
//! gain survives the threshold, then repeatedly extends each surviving
//! candidate by one selector on an unused attribute. At every step the IG
//! threshold is recomputed over the sibling group that shares a parent, so
//! the search width adapts to the data instead of a fixed beam width.

use std::collections::HashMap;
use std::fmt;
use std::time::{Duration, Instant};

use smallvec::SmallVec;

use crate::dataset::{Dataset, NumericPolicy, Selector, TargetSpec, selector_universe};
use crate::error::{Error, Result};
use crate::measures::{Confusion, PatternStats, info_gain};
use crate::par::*;
use crate::rowset::RowSet;

/// Index into a [`SearchSpace`]'s selector universe.
pub type SelectorId = u16;

/// Two IG values closer than this count as a tie for the maximum.
pub const MAX_TIE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum ThresholdMode {
    /// Keep only the candidates with the largest IG in their sibling group.
    Maximum,
    /// Keep candidates whose IG reaches the sample standard deviation of the
    /// group's IG values.
    #[default]
    Dynamic,
}

impl ThresholdMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ThresholdMode::Maximum => "maximum",
            ThresholdMode::Dynamic => "dynamic",
        }
    }
}

impl fmt::Display for ThresholdMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ThresholdMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "maximum" => Ok(ThresholdMode::Maximum),
            "dynamic" => Ok(ThresholdMode::Dynamic),
            other => Err(Error::config(format!("unknown threshold mode `{other}`"))),
        }
    }
}

/// Which candidates a One-vs-Rest pass may keep.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Association {
    /// Any candidate, whichever way it shifts the class distribution.
    #[default]
    Any,
    /// Only candidates whose confidence exceeds the class base rate.
    Positive,
}

impl Association {
    pub fn as_str(self) -> &'static str {
        match self {
            Association::Positive => "positive",
            Association::Any => "any",
        }
    }
}

impl fmt::Display for Association {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Association {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "positive" => Ok(Association::Positive),
            "any" => Ok(Association::Any),
            other => Err(Error::config(format!("unknown association `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    pub t_mode: ThresholdMode,
    /// Maximum pattern length; `None` means the number of non-target columns.
    pub dmax: Option<usize>,
    /// Attributes every returned pattern must contain.
    pub cond_list: Vec<String>,
    pub time_budget: Duration,
    pub cuts_per_column: usize,
    pub numeric_policy: NumericPolicy,
    pub association: Association,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            t_mode: ThresholdMode::Dynamic,
            dmax: None,
            cond_list: Vec::new(),
            time_budget: Duration::from_secs(3600),
            cuts_per_column: 9,
            numeric_policy: NumericPolicy::default(),
            association: Association::default(),
        }
    }
}

impl SearchConfig {
    pub fn effective_dmax(&self, d: &Dataset) -> usize {
        self.dmax.unwrap_or_else(|| d.attributes().count())
    }

    /// Column indices of the Cond_list attributes, validated against `d`.
    pub fn cond_attributes(&self, d: &Dataset) -> Result<Vec<usize>> {
        let dmax = self.effective_dmax(d);
        if dmax == 0 {
            return Err(Error::config("dmax must be at least 1"));
        }
        if self.cuts_per_column < 2 {
            return Err(Error::config("cuts per column must be at least 2"));
        }
        if self.cond_list.len() > dmax {
            return Err(Error::config(format!(
                "{} Cond_list attributes cannot fit in patterns of at most {dmax} selectors",
                self.cond_list.len()
            )));
        }
        let mut attrs = Vec::with_capacity(self.cond_list.len());
        for name in &self.cond_list {
            let idx = d
                .column_index(name)
                .ok_or_else(|| Error::config(format!("Cond_list attribute `{name}` not found")))?;
            if Some(idx) == d.target_column() {
                return Err(Error::config(format!("Cond_list attribute `{name}` is the target")));
            }
            if !attrs.contains(&idx) {
                attrs.push(idx);
            }
        }
        Ok(attrs)
    }
}

/// A dataset together with its selector universe and each selector's cover.
pub struct SearchSpace<'d> {
    dataset: &'d Dataset,
    selectors: Vec<Selector>,
    covers: Vec<RowSet>,
}

impl<'d> SearchSpace<'d> {
    pub fn new(dataset: &'d Dataset, cuts_per_column: usize, policy: NumericPolicy) -> Result<Self> {
        if dataset.target_column().is_none() {
            return Err(Error::config("target not resolved"));
        }
        let selectors = selector_universe(dataset, cuts_per_column, policy);
        if selectors.len() > SelectorId::MAX as usize {
            return Err(Error::data(format!(
                "{} candidate selectors exceed the limit of {}",
                selectors.len(),
                SelectorId::MAX
            )));
        }
        let covers = selectors.par_iter().map(|s| dataset.selector_cover(s)).collect();
        Ok(SearchSpace {
            dataset,
            selectors,
            covers,
        })
    }

    pub fn for_config(dataset: &'d Dataset, cfg: &SearchConfig) -> Result<Self> {
        Self::new(dataset, cfg.cuts_per_column, cfg.numeric_policy)
    }

    pub fn dataset(&self) -> &'d Dataset {
        self.dataset
    }

    pub fn selectors(&self) -> &[Selector] {
        &self.selectors
    }

    pub fn selector(&self, id: SelectorId) -> &Selector {
        &self.selectors[id as usize]
    }

    pub fn attribute(&self, id: SelectorId) -> usize {
        self.selectors[id as usize].attribute
    }

    pub fn selector_cover(&self, id: SelectorId) -> &RowSet {
        &self.covers[id as usize]
    }

    pub fn cover(&self, ids: &[SelectorId]) -> RowSet {
        let mut rows = RowSet::full(self.dataset.n_rows());
        for &id in ids {
            rows.intersect_with(&self.covers[id as usize]);
        }
        rows
    }

    pub fn resolve(&self, ids: &[SelectorId]) -> Vec<Selector> {
        ids.iter().map(|&id| self.selector(id).clone()).collect()
    }

    pub fn confusion(&self, ids: &[SelectorId], positives: &RowSet) -> Confusion {
        Confusion::from_rows(&self.cover(ids), positives)
    }
}

pub type SelectorSeq = SmallVec<[SelectorId; 12]>;

/// An ordered selector sequence with the counts of its full conjunction.
/// Kept small: a frontier can hold millions of these.
#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    /// Selector ids in the order they were added.
    pub selectors: SelectorSeq,
    pub covered: u32,
    pub tp: u32,
    pub ig: f64,
}

impl Candidate {
    pub fn new(selectors: SelectorSeq, confusion: Confusion) -> Self {
        Candidate {
            ig: info_gain(&confusion),
            selectors,
            covered: confusion.covered() as u32,
            tp: confusion.tp as u32,
        }
    }

    /// Full table given the dataset size and the pass's positive count.
    pub fn confusion(&self, n: u64, positives: u64) -> Confusion {
        Confusion::from_counts(n, positives, self.covered as u64, self.tp as u64)
    }

    pub fn len(&self) -> usize {
        self.selectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selectors.is_empty()
    }

    pub fn contains_attribute(&self, space: &SearchSpace<'_>, attribute: usize) -> bool {
        self.selectors.iter().any(|&id| space.attribute(id) == attribute)
    }

    fn sorted_ids(&self) -> SelectorSeq {
        let mut ids = self.selectors.clone();
        ids.sort_unstable();
        ids
    }
}

/// Sample standard deviation of the IG values, the dynamic threshold. A
/// single value gives 0.
pub fn ig_threshold(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    // Shifting by the first value keeps an all-equal group at exactly zero.
    let shift = values[0];
    let mean = values.iter().map(|v| v - shift).sum::<f64>() / n as f64;
    let ss: f64 = values.iter().map(|v| (v - shift - mean).powi(2)).sum();
    (ss / (n - 1) as f64).sqrt()
}

/// Positions of the values that survive the threshold, in input order.
pub fn surviving_positions(igs: &[f64], mode: ThresholdMode) -> Vec<usize> {
    if igs.is_empty() {
        return Vec::new();
    }
    match mode {
        ThresholdMode::Maximum => {
            let max = igs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (0..igs.len()).filter(|&i| max - igs[i] <= MAX_TIE_TOLERANCE).collect()
        }
        ThresholdMode::Dynamic => {
            let t = ig_threshold(igs);
            (0..igs.len()).filter(|&i| igs[i] >= t).collect()
        }
    }
}

pub fn filter_by_threshold(cands: Vec<Candidate>, mode: ThresholdMode) -> Vec<Candidate> {
    let igs: Vec<f64> = cands.iter().map(|c| c.ig).collect();
    let keep = surviving_positions(&igs, mode);
    let mut keep = keep.into_iter().peekable();
    cands
        .into_iter()
        .enumerate()
        .filter_map(|(i, c)| {
            if keep.peek() == Some(&i) {
                keep.next();
                Some(c)
            } else {
                None
            }
        })
        .collect()
}

/// Parents expanded per parallel batch; bounds the transient child buffers.
const EXPAND_CHUNK: usize = 1 << 14;

/// Per-pass context shared by the expansion steps.
pub struct PassContext<'s, 'd> {
    pub space: &'s SearchSpace<'d>,
    pub positives: RowSet,
    pub dmax: usize,
    pub cond_attrs: Vec<usize>,
    pub t_mode: ThresholdMode,
    pub association: Association,
    n: u64,
    n_pos: u64,
}

impl<'s, 'd> PassContext<'s, 'd> {
    pub fn new(space: &'s SearchSpace<'d>, target: &TargetSpec, cfg: &SearchConfig) -> Result<Self> {
        let d = space.dataset();
        let positives = d.positives(target)?;
        Ok(PassContext {
            space,
            n: d.n_rows() as u64,
            n_pos: positives.count() as u64,
            positives,
            dmax: cfg.effective_dmax(d),
            cond_attrs: cfg.cond_attributes(d)?,
            t_mode: cfg.t_mode,
            association: cfg.association,
        })
    }

    pub fn confusion(&self, c: &Candidate) -> Confusion {
        c.confusion(self.n, self.n_pos)
    }

    pub fn stats(&self, c: &Candidate) -> PatternStats {
        PatternStats::from_confusion(self.confusion(c)).expect("candidates have non-empty cover")
    }

    /// Whether a cover of `covered` rows, `tp` of them positive, may enter
    /// this pass.
    pub fn admits(&self, covered: u64, tp: u64) -> bool {
        covered > 0
            && match self.association {
                Association::Any => true,
                Association::Positive => tp as u128 * self.n as u128 > covered as u128 * self.n_pos as u128,
            }
    }

    /// Cond_list attributes not covered by `attrs`.
    fn missing_cond(&self, attrs: impl Iterator<Item = usize> + Clone) -> usize {
        self.cond_attrs
            .iter()
            .filter(|a| !attrs.clone().any(|x| x == **a))
            .count()
    }

    fn feasible(&self, c: &Candidate) -> bool {
        let attrs = c.selectors.iter().map(|&id| self.space.attribute(id));
        self.missing_cond(attrs) <= self.dmax.saturating_sub(c.len())
    }

    fn has_all_cond(&self, c: &Candidate) -> bool {
        self.missing_cond(c.selectors.iter().map(|&id| self.space.attribute(id))) == 0
    }

    /// Threshold-filtered single-selector candidates.
    pub fn depth_one(&self) -> Vec<Candidate> {
        let n = self.space.dataset().n_rows() as u64;
        let pos = self.positives.count() as u64;
        let all: Vec<Candidate> = (0..self.space.selectors().len() as SelectorId)
            .filter_map(|id| {
                let cover = self.space.selector_cover(id);
                let covered = cover.count() as u64;
                let tp = cover.intersection_count(&self.positives) as u64;
                if !self.admits(covered, tp) {
                    return None;
                }
                let mut seq = SelectorSeq::new();
                seq.push(id);
                Some(Candidate::new(seq, Confusion::from_counts(n, pos, covered, tp)))
            })
            .collect();
        let mut kept = filter_by_threshold(all, self.t_mode);
        kept.retain(|c| self.feasible(c));
        kept
    }

    /// Children of `parent` one selector longer, filtered by the sibling-group
    /// threshold. Children use an attribute not yet in `parent`, are admitted
    /// by the association rule and can still fit every Cond_list attribute.
    pub fn expand(&self, parent: &Candidate) -> Vec<Candidate> {
        let child_len = parent.len() + 1;
        if child_len > self.dmax {
            return Vec::new();
        }
        let space = self.space;
        let n = space.dataset().n_rows() as u64;
        let pos = self.positives.count() as u64;
        let parent_cover = space.cover(&parent.selectors);
        let parent_pos = parent_cover.intersection(&self.positives);
        let used: SmallVec<[usize; 8]> = parent.selectors.iter().map(|&id| space.attribute(id)).collect();
        let slack = self.dmax - child_len;

        let mut children = Vec::new();
        for id in 0..space.selectors().len() as SelectorId {
            let attr = space.attribute(id);
            if used.contains(&attr) {
                continue;
            }
            let missing = self
                .cond_attrs
                .iter()
                .filter(|a| **a != attr && !used.contains(a))
                .count();
            if missing > slack {
                continue;
            }
            let sel_cover = space.selector_cover(id);
            let covered = parent_cover.intersection_count(sel_cover) as u64;
            let tp = parent_pos.intersection_count(sel_cover) as u64;
            if !self.admits(covered, tp) {
                continue;
            }
            let mut seq = parent.selectors.clone();
            seq.push(id);
            children.push(Candidate::new(seq, Confusion::from_counts(n, pos, covered, tp)));
        }
        filter_by_threshold(children, self.t_mode)
    }

    /// Runs the depth loop for this pass. Returns the final frontier and
    /// whether the deadline cut the loop short.
    pub fn run(&self, deadline: Instant) -> (Vec<Candidate>, bool) {
        let mut frontier = self.depth_one();
        let mut truncated = false;
        for _depth in 2..=self.dmax {
            if frontier.is_empty() {
                break;
            }
            if Instant::now() >= deadline {
                truncated = true;
                break;
            }
            let mut next = Vec::new();
            for chunk in frontier.chunks(EXPAND_CHUNK) {
                if Instant::now() >= deadline {
                    truncated = true;
                    break;
                }
                let children: Vec<Vec<Candidate>> = chunk.par_iter().map(|parent| self.expand(parent)).collect();
                next.extend(children.into_iter().flatten());
            }
            if truncated {
                break;
            }
            frontier = next;
        }
        frontier.retain(|c| self.has_all_cond(c));
        (frontier, truncated)
    }
}

#[derive(Clone, Debug)]
pub struct PassFrontier {
    pub target: TargetSpec,
    pub frontier: Vec<Candidate>,
    pub truncated: bool,
}

#[derive(Clone, Debug)]
pub struct Discovery {
    pub passes: Vec<PassFrontier>,
}

impl Discovery {
    pub fn truncated(&self) -> bool {
        self.passes.iter().any(|p| p.truncated)
    }
}

/// Runs the expansion for every One-vs-Rest pass. The time budget covers all
/// passes; once it runs out the remaining work returns the last complete
/// frontier and is flagged as truncated.
pub fn discover(space: &SearchSpace<'_>, cfg: &SearchConfig) -> Result<Discovery> {
    let deadline = Instant::now() + cfg.time_budget;
    let d = space.dataset();
    let mut passes = Vec::new();
    for target in d.ovr_passes()? {
        let ctx = PassContext::new(space, &target, cfg)?;
        let (frontier, truncated) = ctx.run(deadline);
        passes.push(PassFrontier {
            target,
            frontier,
            truncated,
        });
    }
    Ok(discover_checked(passes))
}

fn discover_checked(passes: Vec<PassFrontier>) -> Discovery {
    Discovery { passes }
}

/// Collapses candidates with the same selector set, keeping the one with the
/// highest IG (the earliest on ties) at the position of the set's first
/// occurrence.
pub fn dedup(cands: Vec<Candidate>) -> Vec<Candidate> {
    let mut slot_of: HashMap<SelectorSeq, usize> = HashMap::new();
    let mut out: Vec<Candidate> = Vec::new();
    for c in cands {
        let key = c.sorted_ids();
        match slot_of.get(&key) {
            Some(&slot) => {
                if c.ig > out[slot].ig {
                    out[slot] = c;
                }
            }
            None => {
                slot_of.insert(key, out.len());
                out.push(c);
            }
        }
    }
    out
}

impl SearchSpace<'_> {
    /// `a == x AND b >= 2` rendering of a selector id sequence.
    pub fn describe_seq(&self, ids: &[SelectorId]) -> String {
        ids.iter()
            .map(|&id| self.dataset.describe(self.selector(id)))
            .collect::<Vec<_>>()
            .join(" AND ")
    }
}
