//! Quality, statistical and agreement measures for patterns and pattern sets.
//!
//! Every per-pattern measure is a function of the 2×2 [`Confusion`] table of
//! pattern membership against the positive class, so they can be computed
//! once the table is known. Entropy and information gain are in bits.

pub mod agreement;

use libm::erfc;

use crate::dataset::{Dataset, Selector, TargetSpec};
use crate::error::{Error, Result};
use crate::pattern::EvaluatedPattern;
use crate::rowset::RowSet;

/// Significance level used for filtering and reporting.
pub const SIGNIFICANCE: f64 = 0.05;

/// Upper bounds of the first three odds-ratio bands. A value on a boundary
/// belongs to the band above it.
pub const ORR_BOUNDS: [f64; 3] = [1.68, 3.47, 6.71];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl Confusion {
    pub fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        Confusion { tp, fp, fn_, tn }
    }

    /// Counts from a cover and the positive rows over the same universe.
    pub fn from_rows(cover: &RowSet, positives: &RowSet) -> Self {
        let n = cover.universe() as u64;
        let covered = cover.count() as u64;
        let pos = positives.count() as u64;
        let tp = cover.intersection_count(positives) as u64;
        Self::from_counts(n, pos, covered, tp)
    }

    /// Builds the table from the row count, positive count, cover size and
    /// covered positives.
    pub fn from_counts(n: u64, positives: u64, covered: u64, tp: u64) -> Self {
        let fp = covered - tp;
        let fn_ = positives - tp;
        Confusion {
            tp,
            fp,
            fn_,
            tn: n - covered - fn_,
        }
    }

    pub fn n(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn covered(&self) -> u64 {
        self.tp + self.fp
    }

    pub fn positives(&self) -> u64 {
        self.tp + self.fn_
    }

    /// The same table with rows and columns swapped.
    pub fn transposed(&self) -> Self {
        Confusion {
            tp: self.tp,
            fp: self.fn_,
            fn_: self.fp,
            tn: self.tn,
        }
    }
}

/// Confusion counts of the conjunction `selectors` against `target`.
pub fn confusion(d: &Dataset, target: &TargetSpec, selectors: &[Selector]) -> Result<Confusion> {
    if selectors.is_empty() {
        return Err(Error::config("pattern has no selectors"));
    }
    Ok(Confusion::from_rows(&d.cover(selectors), &d.positives(target)?))
}

pub fn coverage(c: &Confusion) -> f64 {
    c.covered() as f64 / c.n() as f64
}

pub fn confidence(c: &Confusion) -> Result<f64> {
    if c.covered() == 0 {
        return Err(Error::UndefinedMeasure("confidence of a pattern that covers no rows"));
    }
    Ok(c.tp as f64 / c.covered() as f64)
}

/// Share of positive rows in the whole dataset.
pub fn base_rate(c: &Confusion) -> f64 {
    c.positives() as f64 / c.n() as f64
}

/// Weighted relative accuracy, `Cov · (Cnf − base rate)`.
pub fn wracc(c: &Confusion) -> Result<f64> {
    Ok(coverage(c) * (confidence(c)? - base_rate(c)))
}

/// Binary entropy in bits, with `0 · log 0 = 0`.
pub fn entropy(p: f64) -> f64 {
    let term = |x: f64| if x <= 0.0 { 0.0 } else { x * x.log2() };
    -(term(p) + term(1.0 - p))
}

/// Entropy of the target minus its entropy conditioned on pattern membership.
pub fn info_gain(c: &Confusion) -> f64 {
    let n = c.n() as f64;
    let covered = c.covered();
    let uncovered = c.fn_ + c.tn;
    let inside = if covered == 0 {
        0.0
    } else {
        covered as f64 / n * entropy(c.tp as f64 / covered as f64)
    };
    let outside = if uncovered == 0 {
        0.0
    } else {
        uncovered as f64 / n * entropy(c.fn_ as f64 / uncovered as f64)
    };
    (entropy(base_rate(c)) - inside - outside).max(0.0)
}

/// Information gain of a selector conjunction against a target class.
pub fn info_gain_of(d: &Dataset, target: &TargetSpec, selectors: &[Selector]) -> Result<f64> {
    confusion(d, target, selectors).map(|c| info_gain(&c))
}

/// `TP·TN / (FP·FN)`; `+∞` when only the denominator vanishes and `1` when
/// both products are zero.
pub fn odds_ratio(c: &Confusion) -> f64 {
    let num = c.tp as f64 * c.tn as f64;
    let den = c.fp as f64 * c.fn_ as f64;
    if den > 0.0 {
        num / den
    } else if num > 0.0 {
        f64::INFINITY
    } else {
        1.0
    }
}

/// Odds-ratio range: effect-size band 1 (very low) to 4 (high).
pub fn orr(odds: f64) -> u8 {
    1 + ORR_BOUNDS.iter().filter(|&&b| odds >= b).count() as u8
}

/// Pearson chi-square statistic of the 2×2 table, no continuity correction.
/// Zero when any marginal is empty.
pub fn chi2_statistic(c: &Confusion) -> f64 {
    let (tp, fp, fn_, tn) = (c.tp as f64, c.fp as f64, c.fn_ as f64, c.tn as f64);
    let margins = [tp + fp, fn_ + tn, tp + fn_, fp + tn];
    if margins.contains(&0.0) {
        return 0.0;
    }
    let diff = tp * tn - fp * fn_;
    c.n() as f64 * diff * diff / margins.iter().product::<f64>()
}

/// Upper-tail p-value of the chi-square statistic with one degree of freedom.
pub fn chi2_p(c: &Confusion) -> f64 {
    let x = chi2_statistic(c);
    if x <= 0.0 {
        return 1.0;
    }
    erfc((x / 2.0).sqrt()).clamp(0.0, 1.0)
}

/// Generic subgroup quality `n^a · (p − p0)`.
pub fn q_a(c: &Confusion, a: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&a) {
        return Err(Error::config(format!("q_a exponent {a} outside [0, 1]")));
    }
    Ok((c.covered() as f64).powf(a) * (confidence(c)? - base_rate(c)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PatternStats {
    pub confusion: Confusion,
    pub cov: f64,
    pub cnf: f64,
    pub wracc: f64,
    /// Accuracy of the pattern as a one-rule binary classifier.
    pub acc_contrib: f64,
    pub ig: f64,
    pub odds: f64,
    pub orr: u8,
    pub p_value: f64,
}

impl PatternStats {
    pub fn from_confusion(confusion: Confusion) -> Result<Self> {
        let odds = odds_ratio(&confusion);
        Ok(PatternStats {
            cov: coverage(&confusion),
            cnf: confidence(&confusion)?,
            wracc: wracc(&confusion)?,
            acc_contrib: (confusion.tp + confusion.tn) as f64 / confusion.n() as f64,
            ig: info_gain(&confusion),
            odds,
            orr: orr(odds),
            p_value: chi2_p(&confusion),
            confusion,
        })
    }
}

/// Aggregates over a pattern set. Means are `None` for an empty set.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SetStats {
    pub size: usize,
    pub length: Option<f64>,
    pub cov_mean: Option<f64>,
    pub cnf_mean: Option<f64>,
    pub wracc_mean: Option<f64>,
    pub ig_mean: Option<f64>,
    pub orr_mean: Option<f64>,
    /// Median of the per-pattern p-values.
    pub p_value_agg: Option<f64>,
    pub accuracy: Option<f64>,
}

fn mean(values: impl ExactSizeIterator<Item = f64>) -> Option<f64> {
    let n = values.len();
    (n > 0).then(|| values.sum::<f64>() / n as f64)
}

fn median(mut values: Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len().is_multiple_of(2) {
        (values[mid - 1] + values[mid]) / 2.0
    } else {
        values[mid]
    })
}

pub fn set_stats(d: &Dataset, patterns: &[EvaluatedPattern]) -> Result<SetStats> {
    if patterns.is_empty() {
        return Ok(SetStats::default());
    }
    let stats = || patterns.iter().map(|p| &p.stats);
    Ok(SetStats {
        size: patterns.len(),
        length: mean(patterns.iter().map(|p| p.pattern.selectors.len() as f64)),
        cov_mean: mean(stats().map(|s| s.cov)),
        cnf_mean: mean(stats().map(|s| s.cnf)),
        wracc_mean: mean(stats().map(|s| s.wracc)),
        ig_mean: mean(stats().map(|s| s.ig)),
        orr_mean: mean(stats().map(|s| s.orr as f64)),
        p_value_agg: median(stats().map(|s| s.p_value).collect()),
        accuracy: Some(set_accuracy(d, patterns)?),
    })
}

/// Predicted class index per row when the set is used as a classifier.
///
/// A row takes the class of its highest-confidence covering pattern (ties go
/// to the higher ORR, then to the earlier pattern). Uncovered rows take the
/// majority class, earliest class on a tie.
pub fn predict(d: &Dataset, patterns: &[EvaluatedPattern]) -> Result<Vec<usize>> {
    let classes = d.target_classes()?;
    let labels = d.target_labels()?;
    let mut counts = vec![0usize; classes.len()];
    for &l in &labels {
        counts[l] += 1;
    }
    let majority = (0..classes.len())
        .rev()
        .max_by_key(|&c| counts[c])
        .expect("resolved target has classes");

    let mut ranked: Vec<(usize, &EvaluatedPattern, RowSet)> = Vec::with_capacity(patterns.len());
    for p in patterns {
        let class = classes
            .iter()
            .position(|c| *c == p.pattern.target)
            .ok_or_else(|| Error::data(format!("pattern target `{}` is not a target class", p.pattern.target)))?;
        ranked.push((class, p, d.cover(&p.pattern.selectors)));
    }
    ranked.sort_by(|a, b| {
        b.1.stats
            .cnf
            .total_cmp(&a.1.stats.cnf)
            .then(b.1.stats.orr.cmp(&a.1.stats.orr))
    });

    Ok((0..d.n_rows())
        .map(|row| {
            ranked
                .iter()
                .find(|(_, _, cover)| cover.contains(row))
                .map_or(majority, |(class, _, _)| *class)
        })
        .collect())
}

/// Fraction of rows whose class the pattern-set classifier gets right.
pub fn set_accuracy(d: &Dataset, patterns: &[EvaluatedPattern]) -> Result<f64> {
    let labels = d.target_labels()?;
    let predicted = predict(d, patterns)?;
    let correct = predicted.iter().zip(&labels).filter(|(p, l)| p == l).count();
    Ok(correct as f64 / d.n_rows() as f64)
}
