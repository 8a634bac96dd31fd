//! Exhaustive enumeration and naive replay of the search and the cut, used to
//! check the engine on small inputs.
//!
//! Nothing here calls the engine's scoring, threshold or cut code. Covers are
//! found by testing every row against every selector, and the chi-square tail
//! comes from a regularized incomplete gamma series instead of `erfc`. The
//! only shared pieces are the dataset and its selector universe.

use std::collections::HashMap;
use std::fmt;
use std::time::Duration;

use crate::dataset::{Dataset, Selector, TargetSpec, selector_universe};
use crate::error::{Error, Result};
use crate::refine::{RefineConfig, optimal_cut, prefix_profile, refine_set};
use crate::search::{Association, PassContext, SearchConfig, SearchSpace, SelectorId, ThresholdMode};

/// Largest `|selectors|^dmax` the oracle agrees to enumerate.
pub const GUARD_LIMIT: f64 = 1e7;

/// Independently computed statistics of one selector combination.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleStats {
    pub n: usize,
    pub covered: usize,
    pub tp: usize,
    pub positives: usize,
    pub cov: f64,
    pub cnf: f64,
    pub wracc: f64,
    pub ig: f64,
    pub odds: f64,
    pub orr: u8,
    pub p_value: f64,
}

fn plogp(count: usize, total: usize) -> f64 {
    if count == 0 || total == 0 {
        return 0.0;
    }
    let p = count as f64 / total as f64;
    p * p.ln()
}

/// Two-class entropy in bits of `a` versus `b` items.
fn split_entropy(a: usize, b: usize) -> f64 {
    let total = a + b;
    -(plogp(a, total) + plogp(b, total)) / std::f64::consts::LN_2
}

/// ln Γ(1/2).
const LN_GAMMA_HALF: f64 = 0.572_364_942_924_700_1;

/// Regularized upper incomplete gamma Q(1/2, x).
fn gamma_q_half(x: f64) -> f64 {
    let a = 0.5;
    if x <= 0.0 {
        return 1.0;
    }
    let prefactor = (-x + a * x.ln() - LN_GAMMA_HALF).exp();
    if x < a + 1.0 {
        let (mut term, mut sum, mut ap) = (1.0 / a, 1.0 / a, a);
        for _ in 0..10_000 {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * 1e-17 {
                break;
            }
        }
        1.0 - sum * prefactor
    } else {
        // Lentz's continued fraction.
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        prefactor * h
    }
}

impl OracleStats {
    pub fn from_counts(n: usize, positives: usize, covered: usize, tp: usize) -> Self {
        let fp = covered - tp;
        let fn_ = positives - tp;
        let tn = n - covered - fn_;
        let base = positives as f64 / n as f64;
        let cov = covered as f64 / n as f64;
        let cnf = tp as f64 / covered as f64;
        let before = split_entropy(positives, n - positives);
        let after = cov * split_entropy(tp, fp) + (1.0 - cov) * split_entropy(fn_, tn);
        let ig = f64::max(before - after, 0.0);

        let (num, den) = ((tp * tn) as f64, (fp * fn_) as f64);
        let odds = match (num == 0.0, den == 0.0) {
            (true, true) => 1.0,
            (false, true) => f64::INFINITY,
            _ => num / den,
        };
        let orr = if odds < 1.68 {
            1
        } else if odds < 3.47 {
            2
        } else if odds < 6.71 {
            3
        } else {
            4
        };

        let rows = [(tp, fp), (fn_, tn)];
        let cols = [tp + fn_, fp + tn];
        let p_value = if covered == 0 || covered == n || cols.contains(&0) {
            1.0
        } else {
            let mut chi2 = 0.0;
            for (r, &(a, b)) in rows.iter().enumerate() {
                let row_total = (rows[r].0 + rows[r].1) as f64;
                for (c, &obs) in [a, b].iter().enumerate() {
                    let expected = row_total * cols[c] as f64 / n as f64;
                    chi2 += (obs as f64 - expected).powi(2) / expected;
                }
            }
            gamma_q_half(chi2 / 2.0)
        };

        OracleStats {
            n,
            covered,
            tp,
            positives,
            cov,
            cnf,
            wracc: cov * (cnf - base),
            ig,
            odds,
            orr,
            p_value,
        }
    }
}

/// A selector combination; `ids` ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct Combination {
    pub ids: Vec<usize>,
    pub stats: OracleStats,
}

struct Universe<'d> {
    d: &'d Dataset,
    selectors: Vec<Selector>,
    /// `hits[s][row]`.
    hits: Vec<Vec<bool>>,
    positive: Vec<bool>,
}

impl<'d> Universe<'d> {
    fn new(d: &'d Dataset, cfg: &SearchConfig, target: &TargetSpec) -> Result<Self> {
        let selectors = selector_universe(d, cfg.cuts_per_column, cfg.numeric_policy);
        let t = d.target_column().ok_or_else(|| Error::config("target not resolved"))?;
        let positive = (0..d.n_rows())
            .map(|r| d.column(t).text(r).as_deref() == Some(target.positive_class.as_str()))
            .collect();
        let hits = selectors
            .iter()
            .map(|s| (0..d.n_rows()).map(|r| d.matches(s, r)).collect())
            .collect();
        Ok(Universe {
            d,
            selectors,
            hits,
            positive,
        })
    }

    fn attr(&self, s: usize) -> usize {
        self.selectors[s].attribute
    }

    fn stats_of_rows(&self, rows: &[usize]) -> OracleStats {
        let positives = self.positive.iter().filter(|&&p| p).count();
        let tp = rows.iter().filter(|&&r| self.positive[r]).count();
        OracleStats::from_counts(self.d.n_rows(), positives, rows.len(), tp)
    }
}

fn guard(n_selectors: usize, dmax: usize) -> Result<()> {
    let estimate = (n_selectors as f64).powi(dmax as i32);
    if estimate > GUARD_LIMIT {
        return Err(Error::GuardExceeded {
            estimate,
            limit: GUARD_LIMIT,
        });
    }
    Ok(())
}

fn enumerate_in(u: &Universe<'_>, dmax: usize) -> Vec<Combination> {
    fn walk(u: &Universe<'_>, dmax: usize, ids: &mut Vec<usize>, rows: &[usize], out: &mut Vec<Combination>) {
        let start = ids.last().map_or(0, |&l| l + 1);
        for s in start..u.selectors.len() {
            if ids.iter().any(|&i| u.attr(i) == u.attr(s)) {
                continue;
            }
            let kept: Vec<usize> = rows.iter().copied().filter(|&r| u.hits[s][r]).collect();
            if kept.is_empty() {
                continue;
            }
            ids.push(s);
            out.push(Combination {
                ids: ids.clone(),
                stats: u.stats_of_rows(&kept),
            });
            if ids.len() < dmax {
                walk(u, dmax, ids, &kept, out);
            }
            ids.pop();
        }
    }
    let all: Vec<usize> = (0..u.d.n_rows()).collect();
    let mut out = Vec::new();
    walk(u, dmax, &mut Vec::new(), &all, &mut out);
    out.sort_by(|a, b| a.ids.len().cmp(&b.ids.len()).then_with(|| a.ids.cmp(&b.ids)));
    out
}

/// Every attribute-distinct selector combination of at most `dmax` selectors
/// with a non-empty cover, ordered by length then by selector ids.
pub fn enumerate_all(d: &Dataset, target: &TargetSpec, cfg: &SearchConfig) -> Result<Vec<Combination>> {
    let dmax = cfg.effective_dmax(d);
    let u = Universe::new(d, cfg, target)?;
    guard(u.selectors.len(), dmax)?;
    Ok(enumerate_in(&u, dmax))
}

fn sample_std(values: &[f64]) -> f64 {
    let (mut mean, mut m2) = (0.0, 0.0);
    for (k, &x) in values.iter().enumerate() {
        let delta = x - mean;
        mean += delta / (k + 1) as f64;
        m2 += delta * (x - mean);
    }
    if values.len() < 2 { 0.0 } else { (m2 / (values.len() - 1) as f64).sqrt() }
}

fn keep_group(group: Vec<(Vec<usize>, f64)>, mode: ThresholdMode) -> Vec<(Vec<usize>, f64)> {
    let igs: Vec<f64> = group.iter().map(|g| g.1).collect();
    let cut = match mode {
        ThresholdMode::Maximum => igs.iter().cloned().fold(f64::MIN, f64::max) - 1e-12,
        ThresholdMode::Dynamic => sample_std(&igs),
    };
    group.into_iter().filter(|g| g.1 >= cut).collect()
}

struct Replayer<'u, 'd> {
    u: &'u Universe<'d>,
    table: HashMap<Vec<usize>, OracleStats>,
    dmax: usize,
    cond: Vec<usize>,
    mode: ThresholdMode,
    association: Association,
}

impl OracleStats {
    /// Cross-product form of "confidence above the base rate".
    fn positively_associated(&self) -> bool {
        let fp = self.covered - self.tp;
        let fn_ = self.positives - self.tp;
        let tn = self.n - self.covered - fn_;
        self.tp * tn > fp * fn_
    }
}

impl Replayer<'_, '_> {
    fn stats(&self, seq: &[usize]) -> Option<&OracleStats> {
        let mut key = seq.to_vec();
        key.sort();
        self.table
            .get(&key)
            .filter(|st| self.association == Association::Any || st.positively_associated())
    }

    /// Stats of a sequence already admitted by the search, whatever the association.
    fn known(&self, seq: &[usize]) -> &OracleStats {
        let mut key = seq.to_vec();
        key.sort();
        &self.table[&key]
    }

    fn fits_cond(&self, seq: &[usize]) -> bool {
        let missing = self.cond.iter().filter(|&&a| !seq.iter().any(|&s| self.u.attr(s) == a)).count();
        missing + seq.len() <= self.dmax
    }

    fn search(&self) -> Vec<Vec<usize>> {
        let first: Vec<(Vec<usize>, f64)> = (0..self.u.selectors.len())
            .filter_map(|s| self.stats(&[s]).map(|st| (vec![s], st.ig)))
            .collect();
        let mut level: Vec<Vec<usize>> = keep_group(first, self.mode)
            .into_iter()
            .map(|g| g.0)
            .filter(|seq| self.fits_cond(seq))
            .collect();
        for _ in 2..=self.dmax {
            if level.is_empty() {
                break;
            }
            let mut next = Vec::new();
            for parent in &level {
                let mut kids = Vec::new();
                for s in 0..self.u.selectors.len() {
                    if parent.iter().any(|&p| self.u.attr(p) == self.u.attr(s)) {
                        continue;
                    }
                    let mut child = parent.clone();
                    child.push(s);
                    if !self.fits_cond(&child) {
                        continue;
                    }
                    if let Some(st) = self.stats(&child) {
                        kids.push((child, st.ig));
                    }
                }
                next.extend(keep_group(kids, self.mode).into_iter().map(|g| g.0));
            }
            level = next;
        }
        level.retain(|seq| self.cond.iter().all(|&a| seq.iter().any(|&s| self.u.attr(s) == a)));
        level
    }

    fn prefix_stats(&self, seq: &[usize]) -> Vec<OracleStats> {
        (1..=seq.len()).map(|k| *self.known(&seq[..k])).collect()
    }

    /// Kept length after the cut, transcribed directly from the step list.
    fn cut(&self, seq: &[usize], cfg: &RefineConfig) -> usize {
        let prof = self.prefix_stats(seq);
        let igs: Vec<f64> = prof.iter().map(|s| s.ig).collect();
        let t = sample_std(&igs);
        let mut cands: Vec<usize> = (0..prof.len()).filter(|&j| igs[j] >= t).collect();
        cands.retain(|&j| prof[j].p_value <= 0.05);
        if cands.is_empty() {
            return 0;
        }
        let mut best = 0;
        for i in 1..cands.len() {
            let (cur, prev) = (prof[cands[i]].orr, prof[cands[i - 1]].orr);
            if cur > prev {
                best = i;
            } else if cur == prev && i - 1 == best {
                continue;
            } else {
                break;
            }
        }
        match cfg.cut_mode {
            crate::refine::CutMode::Inclusive => cands[best] + 1,
            crate::refine::CutMode::Exclusive => cands[best],
        }
    }

    fn refine(&self, frontier: &[Vec<usize>], cfg: &RefineConfig) -> Vec<Vec<usize>> {
        let mut out: Vec<(Vec<usize>, f64)> = Vec::new();
        for seq in frontier {
            let k = self.cut(seq, cfg);
            if k == 0 {
                continue;
            }
            let kept = seq[..k].to_vec();
            let st = *self.known(&kept);
            if st.orr < cfg.min_orr {
                continue;
            }
            if !self.cond.iter().all(|&a| kept.iter().any(|&s| self.u.attr(s) == a)) {
                continue;
            }
            let source_ig = self.known(seq).ig;
            let mut key = kept.clone();
            key.sort();
            let existing = out.iter().position(|(other, _)| {
                let mut k2 = other.clone();
                k2.sort();
                k2 == key
            });
            match existing {
                Some(i) if source_ig > out[i].1 => out[i] = (kept, source_ig),
                Some(_) => {}
                None => out.push((kept, source_ig)),
            }
        }
        out.into_iter().map(|(seq, _)| seq).collect()
    }
}

/// Largest absolute difference per metric between engine and oracle.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MetricDeltas {
    pub cov: f64,
    pub cnf: f64,
    pub wracc: f64,
    pub ig: f64,
    pub odds: f64,
    pub p_value: f64,
}

impl MetricDeltas {
    pub fn max(&self) -> f64 {
        [self.cov, self.cnf, self.wracc, self.ig, self.odds, self.p_value]
            .into_iter()
            .fold(0.0, f64::max)
    }

    fn absorb(&mut self, engine: &crate::measures::PatternStats, oracle: &OracleStats) {
        let d = |a: f64, b: f64| if a == b { 0.0 } else { (a - b).abs() };
        self.cov = self.cov.max(d(engine.cov, oracle.cov));
        self.cnf = self.cnf.max(d(engine.cnf, oracle.cnf));
        self.wracc = self.wracc.max(d(engine.wracc, oracle.wracc));
        self.ig = self.ig.max(d(engine.ig, oracle.ig));
        self.odds = self.odds.max(d(engine.odds, oracle.odds));
        self.p_value = self.p_value.max(d(engine.p_value, oracle.p_value));
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct OracleReport {
    pub enumerated_count: usize,
    pub frontier_match: bool,
    pub per_pattern_stat_deltas: MetricDeltas,
    pub mismatches: Vec<String>,
    pub engine_patterns: usize,
    pub oracle_patterns: usize,
}

/// Metric deltas above this count as a mismatch.
pub const DELTA_TOLERANCE: f64 = 1e-9;

const MAX_ITEMS: usize = 25;

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.frontier_match && self.per_pattern_stat_deltas.max() < DELTA_TOLERANCE && self.mismatches.is_empty()
    }

    fn note(&mut self, msg: String) {
        if self.mismatches.len() < MAX_ITEMS {
            self.mismatches.push(msg);
        }
    }
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", if self.passed() { "PASS" } else { "FAIL" })?;
        writeln!(f, "enumerated combinations: {}", self.enumerated_count)?;
        writeln!(f, "frontier match: {}", self.frontier_match)?;
        writeln!(f, "patterns: engine {} / oracle {}", self.engine_patterns, self.oracle_patterns)?;
        let m = &self.per_pattern_stat_deltas;
        writeln!(
            f,
            "max delta: {:e} (cov {:e}, cnf {:e}, wracc {:e}, ig {:e}, odds {:e}, p {:e})",
            m.max(),
            m.cov,
            m.cnf,
            m.wracc,
            m.ig,
            m.odds,
            m.p_value
        )?;
        for line in &self.mismatches {
            writeln!(f, "mismatch: {line}")?;
        }
        Ok(())
    }
}

/// Replays search and cut for every pass with the oracle and diffs against
/// the engine. The engine uses `engine_refine`, so a deliberately different
/// cut setting can act as a negative control.
pub fn replay_with(
    d: &Dataset,
    search: &SearchConfig,
    refine: &RefineConfig,
    engine_refine: &RefineConfig,
) -> Result<OracleReport> {
    let dmax = search.effective_dmax(d);
    let cond = search.cond_attributes(d)?;
    let space = SearchSpace::for_config(d, search)?;
    guard(space.selectors().len(), dmax)?;
    let engine_cfg = SearchConfig {
        time_budget: Duration::from_secs(u32::MAX as u64),
        ..search.clone()
    };

    let mut report = OracleReport {
        frontier_match: true,
        ..OracleReport::default()
    };
    for target in d.ovr_passes()? {
        let u = Universe::new(d, search, &target)?;
        let combos = enumerate_in(&u, dmax);
        report.enumerated_count += combos.len();
        let oracle = Replayer {
            u: &u,
            table: combos.into_iter().map(|c| (c.ids, c.stats)).collect(),
            dmax,
            cond: cond.clone(),
            mode: search.t_mode,
            association: search.association,
        };
        let render = |seq: &[usize]| -> String {
            let body: Vec<String> = seq.iter().map(|&s| d.describe(&u.selectors[s])).collect();
            format!("{} -> {}", body.join(" AND "), target.positive_class)
        };

        let ctx = PassContext::new(&space, &target, &engine_cfg)?;
        let (frontier, _) = ctx.run(std::time::Instant::now() + engine_cfg.time_budget);
        let engine_frontier: Vec<Vec<usize>> =
            frontier.iter().map(|c| c.selectors.iter().map(|&s| s as usize).collect()).collect();
        let oracle_frontier = oracle.search();

        for (c, seq) in frontier.iter().zip(&engine_frontier) {
            match oracle.stats(seq) {
                Some(o) => report.per_pattern_stat_deltas.absorb(&ctx.stats(c), o),
                None => report.note(format!("engine candidate `{}` is outside the enumeration", render(seq))),
            }
        }
        if engine_frontier != oracle_frontier {
            report.frontier_match = false;
            report.note(format!(
                "class {}: engine frontier has {} candidates, oracle {}",
                target.positive_class,
                engine_frontier.len(),
                oracle_frontier.len()
            ));
            for seq in engine_frontier.iter().filter(|s| !oracle_frontier.contains(s)).take(5) {
                report.note(format!("only in engine frontier: {}", render(seq)));
            }
            for seq in oracle_frontier.iter().filter(|s| !engine_frontier.contains(s)).take(5) {
                report.note(format!("only in oracle frontier: {}", render(seq)));
            }
            continue;
        }

        for (c, seq) in frontier.iter().zip(&engine_frontier) {
            let ids: Vec<SelectorId> = c.selectors.to_vec();
            let engine_kept = optimal_cut(&prefix_profile(&space, &ctx.positives, &ids), engine_refine.cut_mode);
            let oracle_kept = oracle.cut(seq, refine);
            if engine_kept != oracle_kept {
                report.note(format!(
                    "cut position differs for `{}`: engine keeps {engine_kept}, oracle keeps {oracle_kept}",
                    render(seq)
                ));
            }
        }

        let engine_final: Vec<Vec<usize>> = refine_set(&ctx, engine_refine, &frontier)
            .into_iter()
            .map(|r| {
                let seq: Vec<usize> = r.selectors.iter().map(|&s| s as usize).collect();
                if let Some(o) = oracle.stats(&seq) {
                    report.per_pattern_stat_deltas.absorb(&r.stats, o);
                }
                seq
            })
            .collect();
        let oracle_final = oracle.refine(&oracle_frontier, refine);
        report.engine_patterns += engine_final.len();
        report.oracle_patterns += oracle_final.len();
        if engine_final != oracle_final {
            report.note(format!(
                "class {}: final sets differ (engine {}, oracle {})",
                target.positive_class,
                engine_final.len(),
                oracle_final.len()
            ));
        }
    }
    if report.per_pattern_stat_deltas.max() >= DELTA_TOLERANCE {
        report.note(format!("metric delta {:e} exceeds {DELTA_TOLERANCE:e}", report.per_pattern_stat_deltas.max()));
    }
    Ok(report)
}

pub fn replay(d: &Dataset, search: &SearchConfig, refine: &RefineConfig) -> Result<OracleReport> {
    replay_with(d, search, refine, refine)
}
