//! Inter-rater agreement: Gwet's AC1 for accept/reject ratings and the
//! one-way random-effects intraclass correlation ICC(1,1).

use std::collections::HashMap;
use std::io;

use crate::error::{Error, Result};

/// Complete items × raters table of numeric ratings. `accept` is stored as 1
/// and `reject` as 0.
#[derive(Clone, Debug, PartialEq)]
pub struct RatingMatrix {
    pub items: Vec<String>,
    pub raters: Vec<String>,
    /// `values[item][rater]`.
    pub values: Vec<Vec<f64>>,
}

impl RatingMatrix {
    pub fn new(items: Vec<String>, raters: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() != items.len() || values.iter().any(|row| row.len() != raters.len()) {
            return Err(Error::data("rating matrix shape does not match items × raters"));
        }
        Ok(RatingMatrix { items, raters, values })
    }

    pub fn n_items(&self) -> usize {
        self.items.len()
    }

    pub fn n_raters(&self) -> usize {
        self.raters.len()
    }

    /// Whether every rating is an accept/reject code.
    pub fn is_binary(&self) -> bool {
        self.values.iter().flatten().all(|&v| v == 0.0 || v == 1.0)
    }

    fn column(&self, rater: usize) -> Vec<bool> {
        self.values.iter().map(|row| row[rater] == 1.0).collect()
    }
}

fn parse_rating(text: &str) -> Option<f64> {
    let t = text.trim();
    if t.eq_ignore_ascii_case("accept") {
        Some(1.0)
    } else if t.eq_ignore_ascii_case("reject") {
        Some(0.0)
    } else {
        t.parse::<f64>().ok().filter(|v| v.is_finite())
    }
}

/// Reads `item,rater,rating` records. Items and raters keep their order of
/// first appearance; every item must be rated exactly once by every rater.
pub fn read_ratings<R: io::Read>(reader: R) -> Result<RatingMatrix> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_ascii_lowercase()).collect();
    if header != ["item", "rater", "rating"] {
        return Err(Error::data("ratings header must be `item,rater,rating`"));
    }
    let mut items: Vec<String> = Vec::new();
    let mut raters: Vec<String> = Vec::new();
    let mut item_ix: HashMap<String, usize> = HashMap::new();
    let mut rater_ix: HashMap<String, usize> = HashMap::new();
    let mut cells: HashMap<(usize, usize), f64> = HashMap::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        let (item, rater, rating) = (record[0].trim(), record[1].trim(), &record[2]);
        let value = parse_rating(rating)
            .ok_or_else(|| Error::data(format!("line {}: rating `{rating}` is not accept/reject or a number", line + 2)))?;
        let i = *item_ix.entry(item.to_string()).or_insert_with(|| {
            items.push(item.to_string());
            items.len() - 1
        });
        let r = *rater_ix.entry(rater.to_string()).or_insert_with(|| {
            raters.push(rater.to_string());
            raters.len() - 1
        });
        if cells.insert((i, r), value).is_some() {
            return Err(Error::data(format!("item `{item}` rated twice by `{rater}`")));
        }
    }
    if items.is_empty() {
        return Err(Error::data("no ratings"));
    }
    let mut values = vec![vec![0.0; raters.len()]; items.len()];
    for (i, row) in values.iter_mut().enumerate() {
        for (r, cell) in row.iter_mut().enumerate() {
            *cell = *cells
                .get(&(i, r))
                .ok_or_else(|| Error::data(format!("item `{}` has no rating from `{}`", items[i], raters[r])))?;
        }
    }
    RatingMatrix::new(items, raters, values)
}

/// AC1 between two raters' accept (`true`) / reject (`false`) decisions.
pub fn ac1_pair(a: &[bool], b: &[bool]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::data("raters rated different numbers of items"));
    }
    if a.is_empty() {
        return Err(Error::UndefinedMeasure("AC1 of zero items"));
    }
    let n = a.len() as f64;
    let agree = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64;
    let accepts = (a.iter().filter(|&&x| x).count() + b.iter().filter(|&&x| x).count()) as f64;
    let p = agree / n;
    let q = accepts / (2.0 * n);
    let chance = 2.0 * q * (1.0 - q);
    if chance >= 1.0 {
        return Err(Error::UndefinedMeasure("AC1 chance agreement equals 1"));
    }
    Ok((p - chance) / (1.0 - chance))
}

/// Mean AC1 over all rater pairs.
pub fn ac1(m: &RatingMatrix) -> Result<f64> {
    if m.n_raters() < 2 {
        return Err(Error::data("AC1 needs at least two raters"));
    }
    if !m.is_binary() {
        return Err(Error::data("AC1 needs accept/reject ratings"));
    }
    let columns: Vec<Vec<bool>> = (0..m.n_raters()).map(|r| m.column(r)).collect();
    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..columns.len() {
        for j in i + 1..columns.len() {
            total += ac1_pair(&columns[i], &columns[j])?;
            pairs += 1;
        }
    }
    Ok(total / pairs as f64)
}

/// One-way random-effects ICC(1,1) = σ_b² / (σ_b² + σ_w²), with the variance
/// components taken from the one-way ANOVA mean squares.
pub fn icc(m: &RatingMatrix) -> Result<f64> {
    let (n, k) = (m.n_items(), m.n_raters());
    if n < 2 || k < 2 {
        return Err(Error::data("ICC needs at least two items and two raters"));
    }
    let grand = m.values.iter().flatten().sum::<f64>() / (n * k) as f64;
    let item_means: Vec<f64> = m.values.iter().map(|row| row.iter().sum::<f64>() / k as f64).collect();
    let ss_between = k as f64 * item_means.iter().map(|mu| (mu - grand).powi(2)).sum::<f64>();
    let ss_within: f64 = m
        .values
        .iter()
        .zip(&item_means)
        .map(|(row, mu)| row.iter().map(|x| (x - mu).powi(2)).sum::<f64>())
        .sum();
    if ss_between + ss_within == 0.0 {
        return Err(Error::UndefinedMeasure("ICC of ratings with zero variance"));
    }
    let ms_between = ss_between / (n - 1) as f64;
    let ms_within = ss_within / (n * (k - 1)) as f64;
    let denom = ms_between + (k - 1) as f64 * ms_within;
    if denom == 0.0 {
        return Err(Error::UndefinedMeasure("ICC denominator is zero"));
    }
    Ok((ms_between - ms_within) / denom)
}
