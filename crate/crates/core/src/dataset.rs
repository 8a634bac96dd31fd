//! Typed tabular data, target resolution and the selector universe.
//!
//! A [`Dataset`] is column-major and immutable once built. Cells are either a
//! value or missing; `""` and `"?"` are the missing markers on input. Missing
//! cells never match any selector, so confusion counts stay well defined
//! without imputation.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rowset::RowSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ColumnKind {
    Nominal,
    Numeric,
}

impl ColumnKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ColumnKind::Nominal => "nominal",
            ColumnKind::Numeric => "numeric",
        }
    }
}

impl std::str::FromStr for ColumnKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nominal" => Ok(ColumnKind::Nominal),
            "numeric" => Ok(ColumnKind::Numeric),
            other => Err(Error::config(format!("unknown column kind `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: ColumnKind,
    pub index: usize,
}

/// Column storage. Nominal levels are kept in order of first appearance.
#[derive(Clone, Debug, PartialEq)]
pub enum Column {
    Nominal {
        levels: Vec<String>,
        codes: Vec<Option<u32>>,
    },
    Numeric(Vec<Option<f64>>),
}

impl Column {
    fn nominal_from<'a>(cells: impl IntoIterator<Item = Option<&'a str>>) -> Column {
        let mut levels: Vec<String> = Vec::new();
        let mut lookup: HashMap<String, u32> = HashMap::new();
        let codes = cells
            .into_iter()
            .map(|cell| {
                cell.map(|v| {
                    *lookup.entry(v.to_string()).or_insert_with(|| {
                        levels.push(v.to_string());
                        (levels.len() - 1) as u32
                    })
                })
            })
            .collect();
        Column::Nominal { levels, codes }
    }

    pub fn kind(&self) -> ColumnKind {
        match self {
            Column::Nominal { .. } => ColumnKind::Nominal,
            Column::Numeric(_) => ColumnKind::Numeric,
        }
    }

    /// Canonical text of a cell, `None` when missing.
    pub fn text(&self, row: usize) -> Option<String> {
        match self {
            Column::Nominal { levels, codes } => codes[row].map(|c| levels[c as usize].clone()),
            Column::Numeric(values) => values[row].map(format_number),
        }
    }

    fn is_missing(&self, row: usize) -> bool {
        match self {
            Column::Nominal { codes, .. } => codes[row].is_none(),
            Column::Numeric(values) => values[row].is_none(),
        }
    }
}

/// Shortest round-trip decimal rendering (`5` for 5.0, `2.5` for 2.5).
pub fn format_number(x: f64) -> String {
    format!("{x}")
}

fn is_missing_marker(cell: &str) -> bool {
    let t = cell.trim();
    t.is_empty() || t == "?"
}

fn parse_real(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Per-column kind overrides, keyed by column name.
pub type SchemaHints = BTreeMap<String, ColumnKind>;

/// Parses `column=nominal|numeric` directives, one per line. Blank lines and
/// lines starting with `#` are ignored.
pub fn parse_schema_hints(text: &str) -> Result<SchemaHints> {
    let mut hints = SchemaHints::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (name, kind) = line.rsplit_once('=').ok_or_else(|| {
            Error::config(format!("schema hints line {}: expected `column=kind`", lineno + 1))
        })?;
        hints.insert(name.trim().to_string(), kind.parse()?);
    }
    Ok(hints)
}

pub fn load_schema_hints(path: impl AsRef<Path>) -> Result<SchemaHints> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_schema_hints(&text)
}

/// Loads a comma-separated file with a header row.
pub fn load_csv(path: impl AsRef<Path>, hints: &SchemaHints) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(io::BufReader::new(file), hints)
}

pub fn read_csv<R: io::Read>(reader: R, hints: &SchemaHints) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        if record.len() != header.len() {
            return Err(Error::data(format!(
                "ragged row {}: {} cells, header has {}",
                i + 2,
                record.len(),
                header.len()
            )));
        }
        rows.push(record.iter().map(str::to_string).collect::<Vec<_>>());
    }
    Dataset::from_rows(header, rows, hints)
}

/// The class under study for one One-vs-Rest pass.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TargetSpec {
    pub positive_class: String,
    pub source_columns: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    schema: Vec<ColumnSchema>,
    columns: Vec<Column>,
    n_rows: usize,
    target: Option<usize>,
    target_sources: Vec<String>,
}

impl Dataset {
    /// Builds a dataset from raw string cells. A column is numeric iff every
    /// non-missing cell parses as a finite real, unless `hints` says otherwise.
    pub fn from_rows(header: Vec<String>, rows: Vec<Vec<String>>, hints: &SchemaHints) -> Result<Dataset> {
        if header.is_empty() {
            return Err(Error::data("empty header"));
        }
        if rows.is_empty() {
            return Err(Error::data("table has no data rows"));
        }
        let mut seen = BTreeSet::new();
        for name in &header {
            if !seen.insert(name.as_str()) {
                return Err(Error::data(format!("duplicate column name `{name}`")));
            }
        }
        for name in hints.keys() {
            if !seen.contains(name.as_str()) {
                return Err(Error::config(format!("schema hint for unknown column `{name}`")));
            }
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != header.len() {
                return Err(Error::data(format!(
                    "ragged row {}: {} cells, header has {}",
                    i + 2,
                    row.len(),
                    header.len()
                )));
            }
        }

        let mut schema = Vec::with_capacity(header.len());
        let mut columns = Vec::with_capacity(header.len());
        for (index, name) in header.into_iter().enumerate() {
            let cells = || rows.iter().map(move |r| r[index].as_str());
            let inferred = if cells().filter(|c| !is_missing_marker(c)).all(|c| parse_real(c).is_some()) {
                ColumnKind::Numeric
            } else {
                ColumnKind::Nominal
            };
            let kind = hints.get(&name).copied().unwrap_or(inferred);
            let column = match kind {
                ColumnKind::Numeric => {
                    let mut values = Vec::with_capacity(rows.len());
                    for (r, cell) in cells().enumerate() {
                        if is_missing_marker(cell) {
                            values.push(None);
                        } else {
                            let v = parse_real(cell).ok_or_else(|| {
                                Error::data(format!(
                                    "column `{name}` is numeric but row {} holds `{cell}`",
                                    r + 2
                                ))
                            })?;
                            values.push(Some(v));
                        }
                    }
                    Column::Numeric(values)
                }
                ColumnKind::Nominal => Column::nominal_from(
                    cells().map(|c| if is_missing_marker(c) { None } else { Some(c.trim()) }),
                ),
            };
            schema.push(ColumnSchema { name, kind, index });
            columns.push(column);
        }

        Ok(Dataset {
            schema,
            columns,
            n_rows: rows.len(),
            target: None,
            target_sources: Vec::new(),
        })
    }

    pub fn schema(&self) -> &[ColumnSchema] {
        &self.schema
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_columns(&self) -> usize {
        self.schema.len()
    }

    pub fn column(&self, index: usize) -> &Column {
        &self.columns[index]
    }

    pub fn column_name(&self, index: usize) -> &str {
        &self.schema[index].name
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|c| c.name == name)
    }

    pub fn column_names(&self) -> Vec<String> {
        self.schema.iter().map(|c| c.name.clone()).collect()
    }

    /// Index of the resolved target column, if [`Dataset::resolve_target`] ran.
    pub fn target_column(&self) -> Option<usize> {
        self.target
    }

    fn require_target(&self) -> Result<usize> {
        self.target
            .ok_or_else(|| Error::config("target not resolved; call resolve_target first"))
    }

    /// Non-target column indices in schema order.
    pub fn attributes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.schema.len()).filter(move |&i| Some(i) != self.target)
    }

    /// Hex SHA-256 over the header and the canonical text of every cell.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        for col in &self.schema {
            hasher.update(col.name.as_bytes());
            hasher.update([0x1f]);
        }
        hasher.update([0x1e]);
        for row in 0..self.n_rows {
            for col in &self.columns {
                match col.text(row) {
                    Some(t) => hasher.update(t.as_bytes()),
                    None => hasher.update([0x00]),
                }
                hasher.update([0x1f]);
            }
            hasher.update([0x1e]);
        }
        hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Resolves the analysis target into a single nominal column.
    ///
    /// One nominal column is used as-is. A numeric column is cut into `bins`
    /// equal-frequency intervals labelled `[lo,hi]` / `(lo,hi]`. Several
    /// columns are conjoined into one column whose classes read
    /// `colA=a&colB=b`; it takes the place of the first source column.
    pub fn resolve_target<S: AsRef<str>>(&self, target_columns: &[S], bins: usize) -> Result<Dataset> {
        if target_columns.is_empty() {
            return Err(Error::config("at least one target column is required"));
        }
        if bins < 2 {
            return Err(Error::config("numeric target needs at least 2 bins"));
        }
        let mut indices = Vec::with_capacity(target_columns.len());
        for name in target_columns {
            let name = name.as_ref();
            let idx = self
                .column_index(name)
                .ok_or_else(|| Error::data(format!("target column `{name}` not found")))?;
            if indices.contains(&idx) {
                return Err(Error::config(format!("target column `{name}` given twice")));
            }
            indices.push(idx);
        }

        let mut labels: Vec<Vec<String>> = Vec::with_capacity(indices.len());
        for &idx in &indices {
            let col = &self.columns[idx];
            if (0..self.n_rows).any(|r| col.is_missing(r)) {
                return Err(Error::data(format!(
                    "target column `{}` has missing values",
                    self.schema[idx].name
                )));
            }
            labels.push(match col {
                Column::Nominal { .. } => (0..self.n_rows).map(|r| col.text(r).unwrap()).collect(),
                Column::Numeric(values) => {
                    let values: Vec<f64> = values.iter().map(|v| v.unwrap()).collect();
                    bin_labels(&values, bins)
                }
            });
        }

        let (name, cells): (String, Vec<String>) = if indices.len() == 1 {
            (self.schema[indices[0]].name.clone(), labels.pop().unwrap())
        } else {
            let name = indices
                .iter()
                .map(|&i| self.schema[i].name.as_str())
                .collect::<Vec<_>>()
                .join("&");
            let cells = (0..self.n_rows)
                .map(|r| {
                    indices
                        .iter()
                        .zip(&labels)
                        .map(|(&i, l)| format!("{}={}", self.schema[i].name, l[r]))
                        .collect::<Vec<_>>()
                        .join("&")
                })
                .collect();
            (name, cells)
        };

        let target_col = Column::nominal_from(cells.iter().map(|s| Some(s.as_str())));
        if let Column::Nominal { levels, .. } = &target_col {
            if levels.len() < 2 {
                return Err(Error::data(format!("target `{name}` is constant (single class)")));
            }
        }

        let position = *indices.iter().min().unwrap();
        let mut schema = Vec::with_capacity(self.schema.len());
        let mut columns = Vec::with_capacity(self.columns.len());
        let mut target = 0;
        for i in 0..self.schema.len() {
            if i == position {
                target = schema.len();
                schema.push(ColumnSchema {
                    name: name.clone(),
                    kind: ColumnKind::Nominal,
                    index: target,
                });
                columns.push(target_col.clone());
            } else if !indices.contains(&i) {
                let mut s = self.schema[i].clone();
                s.index = schema.len();
                schema.push(s);
                columns.push(self.columns[i].clone());
            }
        }
        if let Some(other) = schema.iter().filter(|s| s.name == name).nth(1) {
            return Err(Error::data(format!("combined target name `{}` collides with a column", other.name)));
        }

        Ok(Dataset {
            schema,
            columns,
            n_rows: self.n_rows,
            target: Some(target),
            target_sources: indices.iter().map(|&i| self.schema[i].name.clone()).collect(),
        })
    }

    /// Target classes in order of first appearance.
    pub fn target_classes(&self) -> Result<Vec<String>> {
        let t = self.require_target()?;
        match &self.columns[t] {
            Column::Nominal { levels, .. } => Ok(levels.clone()),
            Column::Numeric(_) => Err(Error::data("target column is not nominal")),
        }
    }

    /// One One-vs-Rest pass per target class, in order of first appearance.
    pub fn ovr_passes(&self) -> Result<Vec<TargetSpec>> {
        Ok(self
            .target_classes()?
            .into_iter()
            .map(|positive_class| TargetSpec {
                positive_class,
                source_columns: self.target_sources.clone(),
            })
            .collect())
    }

    /// Target class label of each row.
    pub fn target_labels(&self) -> Result<Vec<usize>> {
        let t = self.require_target()?;
        match &self.columns[t] {
            Column::Nominal { codes, .. } => Ok(codes.iter().map(|c| c.expect("target has no missing cells") as usize).collect()),
            Column::Numeric(_) => Err(Error::data("target column is not nominal")),
        }
    }

    /// Rows whose target equals `spec.positive_class`.
    pub fn positives(&self, spec: &TargetSpec) -> Result<RowSet> {
        self.class_rows(&spec.positive_class)
    }

    pub fn class_rows(&self, class: &str) -> Result<RowSet> {
        let t = self.require_target()?;
        let Column::Nominal { levels, codes } = &self.columns[t] else {
            return Err(Error::data("target column is not nominal"));
        };
        let code = levels
            .iter()
            .position(|l| l == class)
            .ok_or_else(|| Error::data(format!("class `{class}` does not occur in the target")))?
            as u32;
        Ok(RowSet::from_indices(
            self.n_rows,
            codes.iter().enumerate().filter(|(_, c)| **c == Some(code)).map(|(r, _)| r),
        ))
    }

    pub fn matches(&self, selector: &Selector, row: usize) -> bool {
        match (&self.columns[selector.attribute], &selector.condition) {
            (Column::Nominal { levels, codes }, Condition::Eq(value)) => {
                codes[row].is_some_and(|c| levels[c as usize] == *value)
            }
            (Column::Numeric(values), cond) => values[row].is_some_and(|v| cond.accepts_number(v)),
            _ => false,
        }
    }

    /// Rows matched by a single selector.
    pub fn selector_cover(&self, selector: &Selector) -> RowSet {
        match (&self.columns[selector.attribute], &selector.condition) {
            (Column::Nominal { levels, codes }, Condition::Eq(value)) => {
                match levels.iter().position(|l| l == value) {
                    Some(code) => RowSet::from_indices(
                        self.n_rows,
                        codes
                            .iter()
                            .enumerate()
                            .filter(|(_, c)| **c == Some(code as u32))
                            .map(|(r, _)| r),
                    ),
                    None => RowSet::empty(self.n_rows),
                }
            }
            (Column::Numeric(values), cond) => RowSet::from_indices(
                self.n_rows,
                values
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| v.is_some_and(|v| cond.accepts_number(v)))
                    .map(|(r, _)| r),
            ),
            _ => RowSet::empty(self.n_rows),
        }
    }

    /// Rows matched by every selector; the empty conjunction covers all rows.
    pub fn cover(&self, selectors: &[Selector]) -> RowSet {
        let mut rows = RowSet::full(self.n_rows);
        for s in selectors {
            rows.intersect_with(&self.selector_cover(s));
        }
        rows
    }

    /// Checks that a selector references an existing non-target column with a
    /// condition that suits its kind.
    pub fn validate_selector(&self, selector: &Selector) -> Result<()> {
        let col = self
            .schema
            .get(selector.attribute)
            .ok_or_else(|| Error::data(format!("selector references column {}", selector.attribute)))?;
        if Some(selector.attribute) == self.target {
            return Err(Error::data(format!("selector on target column `{}`", col.name)));
        }
        let ok = match selector.condition {
            Condition::Eq(_) => col.kind == ColumnKind::Nominal,
            _ => col.kind == ColumnKind::Numeric,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::data(format!(
                "operator `{}` is not valid on {} column `{}`",
                selector.condition.op(),
                col.kind.as_str(),
                col.name
            )))
        }
    }

    /// Renders a selector with its column name, e.g. `top-left == x`.
    pub fn describe(&self, selector: &Selector) -> String {
        selector.condition.render(self.column_name(selector.attribute))
    }
}

/// Equal-frequency labels for a numeric target.
fn bin_labels(values: &[f64], bins: usize) -> Vec<String> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let (min, max) = (sorted[0], sorted[n - 1]);
    let mut cuts: Vec<f64> = (1..bins)
        .map(|k| sorted[(k * n).div_ceil(bins) - 1])
        .filter(|&c| c < max)
        .collect();
    cuts.dedup();
    let mut names = Vec::with_capacity(cuts.len() + 1);
    for (j, &c) in cuts.iter().enumerate() {
        names.push(if j == 0 {
            format!("[{},{}]", format_number(min), format_number(c))
        } else {
            format!("({},{}]", format_number(cuts[j - 1]), format_number(c))
        });
    }
    names.push(match cuts.last() {
        Some(&c) => format!("({},{}]", format_number(c), format_number(max)),
        None => format!("[{},{}]", format_number(min), format_number(max)),
    });
    values
        .iter()
        .map(|&v| {
            let bin = cuts.iter().position(|&c| v <= c).unwrap_or(cuts.len());
            names[bin].clone()
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    Eq,
    Le,
    Ge,
    In,
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Op::Eq => "==",
            Op::Le => "<=",
            Op::Ge => ">=",
            Op::In => "in",
        })
    }
}

/// The test a selector applies to one cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Condition {
    Eq(String),
    Le(f64),
    Ge(f64),
    /// Half-open interval `[lo, hi)`; an absent bound is unbounded.
    In { lo: Option<f64>, hi: Option<f64> },
}

impl Condition {
    pub fn op(&self) -> Op {
        match self {
            Condition::Eq(_) => Op::Eq,
            Condition::Le(_) => Op::Le,
            Condition::Ge(_) => Op::Ge,
            Condition::In { .. } => Op::In,
        }
    }

    fn accepts_number(&self, v: f64) -> bool {
        match *self {
            Condition::Le(c) => v <= c,
            Condition::Ge(c) => v >= c,
            Condition::In { lo, hi } => lo.is_none_or(|lo| v >= lo) && hi.is_none_or(|hi| v < hi),
            Condition::Eq(_) => false,
        }
    }

    pub fn render(&self, column: &str) -> String {
        match self {
            Condition::Eq(v) => format!("{column} == {v}"),
            Condition::Le(c) => format!("{column} <= {}", format_number(*c)),
            Condition::Ge(c) => format!("{column} >= {}", format_number(*c)),
            Condition::In { lo: None, hi: None } => format!("{column} is present"),
            Condition::In { lo: Some(lo), hi: None } => format!("{column} >= {}", format_number(*lo)),
            Condition::In { lo: None, hi: Some(hi) } => format!("{column} < {}", format_number(*hi)),
            Condition::In { lo: Some(lo), hi: Some(hi) } => {
                format!("{} <= {column} < {}", format_number(*lo), format_number(*hi))
            }
        }
    }
}

/// One attribute–operator–value atom.
#[derive(Clone, Debug, PartialEq)]
pub struct Selector {
    pub attribute: usize,
    pub condition: Condition,
}

impl Selector {
    pub fn eq(attribute: usize, value: impl Into<String>) -> Self {
        Selector {
            attribute,
            condition: Condition::Eq(value.into()),
        }
    }

    pub fn le(attribute: usize, value: f64) -> Self {
        Selector {
            attribute,
            condition: Condition::Le(value),
        }
    }

    pub fn ge(attribute: usize, value: f64) -> Self {
        Selector {
            attribute,
            condition: Condition::Ge(value),
        }
    }

    pub fn op(&self) -> Op {
        self.condition.op()
    }
}

/// How numeric columns become selectors.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum NumericPolicy {
    /// One `<=` and one `>=` selector per quantile cut point.
    Thresholds,
    /// One selector per equal-frequency bin `[cut_j, cut_{j+1})`, open-ended
    /// at both extremes.
    #[default]
    Intervals,
}

impl NumericPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            NumericPolicy::Thresholds => "thresholds",
            NumericPolicy::Intervals => "intervals",
        }
    }
}

impl std::str::FromStr for NumericPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "thresholds" => Ok(NumericPolicy::Thresholds),
            "intervals" => Ok(NumericPolicy::Intervals),
            other => Err(Error::config(format!("unknown numeric policy `{other}`"))),
        }
    }
}

/// Interior equal-frequency cut points: the linearly interpolated quantiles
/// at `k / parts` for `k = 1..parts`, deduplicated. `sorted` must be ascending.
pub fn quantile_cuts(sorted: &[f64], parts: usize) -> Vec<f64> {
    if sorted.is_empty() || parts < 2 {
        return Vec::new();
    }
    let last = sorted.len() - 1;
    let mut cuts: Vec<f64> = (1..parts)
        .map(|k| {
            let h = last as f64 * k as f64 / parts as f64;
            let lo = h.floor() as usize;
            if lo >= last {
                sorted[last]
            } else {
                sorted[lo] + (h - lo as f64) * (sorted[lo + 1] - sorted[lo])
            }
        })
        .collect();
    cuts.dedup();
    cuts
}

/// Every candidate selector over the non-target columns, ordered by column
/// index, then operator, then value ascending. Columns with fewer than two
/// distinct values contribute nothing.
pub fn selector_universe(d: &Dataset, cuts_per_column: usize, policy: NumericPolicy) -> Vec<Selector> {
    let mut out = Vec::new();
    for attr in d.attributes() {
        match d.column(attr) {
            Column::Nominal { levels, codes } => {
                let present: BTreeSet<&str> = codes.iter().flatten().map(|&c| levels[c as usize].as_str()).collect();
                if present.len() < 2 {
                    continue;
                }
                out.extend(present.into_iter().map(|v| Selector::eq(attr, v)));
            }
            Column::Numeric(values) => {
                let mut sorted: Vec<f64> = values.iter().flatten().copied().collect();
                sorted.sort_by(f64::total_cmp);
                if sorted.first() == sorted.last() {
                    continue;
                }
                let cuts = quantile_cuts(&sorted, cuts_per_column);
                match policy {
                    NumericPolicy::Thresholds => {
                        out.extend(cuts.iter().map(|&c| Selector::le(attr, c)));
                        out.extend(cuts.iter().map(|&c| Selector::ge(attr, c)));
                    }
                    NumericPolicy::Intervals => {
                        let (min, _) = (sorted[0], sorted[sorted.len() - 1]);
                        let edges: Vec<f64> = cuts.into_iter().filter(|&c| c > min).collect();
                        let mut bounds: Vec<Option<f64>> = vec![None];
                        bounds.extend(edges.iter().map(|&e| Some(e)));
                        bounds.push(None);
                        for w in bounds.windows(2) {
                            let sel = Selector {
                                attribute: attr,
                                condition: Condition::In { lo: w[0], hi: w[1] },
                            };
                            if sorted.iter().any(|&v| sel.condition.accepts_number(v)) {
                                out.push(sel);
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv(text: &str) -> Dataset {
        read_csv(text.as_bytes(), &SchemaHints::new()).unwrap()
    }

    #[test]
    fn numeric_columns_and_missing_markers() {
        let d = csv("a,b,c\n1,2,3\n4,5,6\n7,8,9\n1.5,?,\n");
        assert_eq!(d.n_rows(), 4);
        assert!(d.schema().iter().all(|c| c.kind == ColumnKind::Numeric));
        assert_eq!(d.column(1).text(3), None);
        assert_eq!(d.column(2).text(3), None);
    }

    #[test]
    fn one_missing_numeric_cell() {
        let d = csv("x\n1\n2\n?\n");
        assert_eq!(d.schema()[0].kind, ColumnKind::Numeric);
        let Column::Numeric(v) = d.column(0) else { panic!() };
        assert_eq!(v, &vec![Some(1.0), Some(2.0), None]);
    }

    #[test]
    fn hints_override_inference() {
        let hints = parse_schema_hints("# kinds\nzip=nominal\n").unwrap();
        let d = read_csv("zip,v\n28223,a\n28660,b\n".as_bytes(), &hints).unwrap();
        assert_eq!(d.schema()[0].kind, ColumnKind::Nominal);
        let bad = parse_schema_hints("v=numeric").unwrap();
        assert!(read_csv("v\na\n".as_bytes(), &bad).is_err());
    }

    #[test]
    fn load_errors() {
        assert!(matches!(read_csv("a,b\n1,2\n3\n".as_bytes(), &SchemaHints::new()), Err(Error::Data(_))));
        assert!(matches!(read_csv("a,b\n".as_bytes(), &SchemaHints::new()), Err(Error::Data(_))));
        assert!(matches!(load_csv("/nonexistent/file.csv", &SchemaHints::new()), Err(Error::Io { .. })));
        assert!(read_csv("a,a\n1,2\n".as_bytes(), &SchemaHints::new()).is_err());
    }

    #[test]
    fn single_nominal_target_is_identity() {
        let d = csv("a,t\nx,yes\ny,no\n");
        let r = d.resolve_target(&["t"], 2).unwrap();
        assert_eq!(r.target_column(), Some(1));
        assert_eq!(r.schema(), d.schema());
        assert_eq!(r.target_classes().unwrap(), vec!["yes", "no"]);
    }

    #[test]
    fn numeric_target_equal_frequency_bins() {
        let text = (1..=10).fold(String::from("v\n"), |s, i| s + &format!("{i}\n"));
        let d = csv(&text).resolve_target(&["v"], 2).unwrap();
        assert_eq!(d.target_classes().unwrap(), vec!["[1,5]", "(5,10]"]);
        let labels = d.target_labels().unwrap();
        assert_eq!(labels.iter().filter(|&&l| l == 0).count(), 5);
        assert_eq!(labels.iter().filter(|&&l| l == 1).count(), 5);
    }

    #[test]
    fn multi_target_conjunction() {
        let d = csv("prog,stage,tox\nYES,1,NO\nNO,2,NO\nYES,1,YES\nNO,3,YES\nYES,2,NO\n");
        let r = d.resolve_target(&["prog", "tox"], 2).unwrap();
        assert_eq!(r.column_names(), vec!["prog&tox", "stage"]);
        assert_eq!(r.target_column(), Some(0));
        assert_eq!(
            r.target_classes().unwrap(),
            vec!["prog=YES&tox=NO", "prog=NO&tox=NO", "prog=YES&tox=YES", "prog=NO&tox=YES"]
        );
        assert_eq!(r.ovr_passes().unwrap().len(), 4);
        assert_eq!(r.ovr_passes().unwrap()[0].source_columns, vec!["prog", "tox"]);
    }

    #[test]
    fn constant_target_rejected() {
        let d = csv("a,t\nx,yes\ny,yes\n");
        assert!(matches!(d.resolve_target(&["t"], 2), Err(Error::Data(_))));
        assert!(d.resolve_target(&["nope"], 2).is_err());
    }

    #[test]
    fn ovr_partitions_rows() {
        let d = csv("a,t\nx,b\ny,a\nx,c\ny,a\n").resolve_target(&["t"], 2).unwrap();
        let passes = d.ovr_passes().unwrap();
        assert_eq!(passes.iter().map(|p| p.positive_class.as_str()).collect::<Vec<_>>(), vec!["b", "a", "c"]);
        let total: usize = passes.iter().map(|p| d.positives(p).unwrap().count()).sum();
        assert_eq!(total, d.n_rows());
    }

    #[test]
    fn nominal_universe_one_per_value() {
        let d = csv("cell,t\nx,1\no,0\nb,1\nx,0\n").resolve_target(&["t"], 2).unwrap();
        let u = selector_universe(&d, 9, NumericPolicy::Thresholds);
        let vals: Vec<_> = u.iter().map(|s| d.describe(s)).collect();
        assert_eq!(vals, vec!["cell == b", "cell == o", "cell == x"]);
    }

    #[test]
    fn quantile_cuts_interpolate() {
        let sorted: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(quantile_cuts(&sorted, 4), vec![25.75, 50.5, 75.25]);
        assert_eq!(quantile_cuts(&[3.0, 3.0, 3.0], 4), vec![3.0]);
    }

    #[test]
    fn threshold_universe_on_1_to_100() {
        let text = (1..=100).fold(String::from("v,t\n"), |s, i| s + &format!("{i},{}\n", i % 2));
        let d = csv(&text).resolve_target(&["t"], 2).unwrap();
        let u = selector_universe(&d, 4, NumericPolicy::Thresholds);
        assert_eq!(
            u,
            vec![
                Selector::le(0, 25.75),
                Selector::le(0, 50.5),
                Selector::le(0, 75.25),
                Selector::ge(0, 25.75),
                Selector::ge(0, 50.5),
                Selector::ge(0, 75.25),
            ]
        );
        let iv = selector_universe(&d, 4, NumericPolicy::Intervals);
        assert_eq!(iv.len(), 4);
        let sizes: Vec<usize> = iv.iter().map(|s| d.selector_cover(s).count()).collect();
        assert_eq!(sizes, vec![25, 25, 25, 25]);
    }

    #[test]
    fn constant_columns_are_skipped() {
        let d = csv("k,v,t\na,1,x\na,1,y\n").resolve_target(&["t"], 2).unwrap();
        assert!(selector_universe(&d, 9, NumericPolicy::Thresholds).is_empty());
    }

    #[test]
    fn missing_never_matches() {
        let d = csv("a,n,t\nx,1,p\n?,?,q\n").resolve_target(&["t"], 2).unwrap();
        assert!(d.matches(&Selector::eq(0, "x"), 0));
        assert!(!d.matches(&Selector::ge(1, 5.0), 1));
        assert!(!d.matches(&Selector::le(1, 5.0), 1));
        assert!(!d.matches(&Selector::eq(0, "?"), 1));
        assert_eq!(d.cover(&[]).count(), 2);
    }

    #[test]
    fn selector_validation() {
        let d = csv("a,n,t\nx,1,p\ny,2,q\n").resolve_target(&["t"], 2).unwrap();
        assert!(d.validate_selector(&Selector::eq(0, "x")).is_ok());
        assert!(d.validate_selector(&Selector::le(0, 1.0)).is_err());
        assert!(d.validate_selector(&Selector::eq(1, "1")).is_err());
        assert!(d.validate_selector(&Selector::eq(2, "p")).is_err());
    }

    #[test]
    fn content_hash_is_stable() {
        let a = csv("a,b\n1,x\n2,y\n");
        let b = csv("a,b\n1,x\n2,y\n");
        let c = csv("a,b\n1,x\n2,z\n");
        assert_eq!(a.content_hash(), b.content_hash());
        assert_ne!(a.content_hash(), c.content_hash());
        assert_eq!(a.content_hash().len(), 64);
    }
}
