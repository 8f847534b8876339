//! Paired observations of a nominal `x` and a nominal or real `y`.
//!
//! Labels are interned per column and kept in lexicographic order, so every
//! category index (and every numbering built on top of it) is reproducible
//! across runs and input orderings. Categories that never occur are not
//! represented at all.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};

/// A category label. Equality is exact string equality; no ordering is exposed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NominalValue(String);

impl NominalValue {
    pub fn new(label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        if label.is_empty() {
            return Err(Error::invalid("nominal labels must be non-empty"));
        }
        Ok(NominalValue(label))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NominalValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A nominal column stored as sorted distinct labels plus one code per observation.
#[derive(Clone, Debug, PartialEq)]
pub struct CodedColumn {
    labels: Vec<NominalValue>,
    codes: Vec<u32>,
}

impl CodedColumn {
    pub fn from_labels<S: AsRef<str>>(values: &[S]) -> Result<Self> {
        let mut index: BTreeMap<&str, u32> = BTreeMap::new();
        for v in values {
            let v = v.as_ref();
            if v.is_empty() {
                return Err(Error::invalid("nominal labels must be non-empty"));
            }
            index.entry(v).or_insert(0);
        }
        let mut labels = Vec::with_capacity(index.len());
        for (code, (label, slot)) in index.iter_mut().enumerate() {
            *slot = code as u32;
            labels.push(NominalValue((*label).to_string()));
        }
        let codes = values.iter().map(|v| index[v.as_ref()]).collect();
        Ok(CodedColumn { labels, codes })
    }

    /// Builds a column from caller-side codes into `labels`. Unobserved labels are
    /// dropped and the survivors re-sorted lexicographically.
    pub fn from_codes<S: AsRef<str>>(labels: &[S], codes: &[u32]) -> Result<Self> {
        let mut seen = vec![false; labels.len()];
        for &c in codes {
            let slot = seen.get_mut(c as usize).ok_or_else(|| {
                Error::invalid(format!("code {c} out of range for {} labels", labels.len()))
            })?;
            *slot = true;
        }
        let mut observed: Vec<usize> = (0..labels.len()).filter(|&i| seen[i]).collect();
        observed.sort_by(|&a, &b| labels[a].as_ref().cmp(labels[b].as_ref()));
        let mut remap = vec![u32::MAX; labels.len()];
        let mut out_labels = Vec::with_capacity(observed.len());
        for (new, &old) in observed.iter().enumerate() {
            if new > 0 && labels[observed[new - 1]].as_ref() == labels[old].as_ref() {
                return Err(Error::invalid(format!(
                    "duplicate label '{}'",
                    labels[old].as_ref()
                )));
            }
            remap[old] = new as u32;
            out_labels.push(NominalValue::new(labels[old].as_ref())?);
        }
        let codes = codes.iter().map(|&c| remap[c as usize]).collect();
        Ok(CodedColumn {
            labels: out_labels,
            codes,
        })
    }

    pub fn labels(&self) -> &[NominalValue] {
        &self.labels
    }

    pub fn codes(&self) -> &[u32] {
        &self.codes
    }

    pub fn categories(&self) -> usize {
        self.labels.len()
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleKind {
    NominalNominal,
    NominalReal,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Response {
    Nominal(CodedColumn),
    Real(Vec<f64>),
}

/// `n >= 2` observations of `(x, y)` with `x` nominal.
#[derive(Clone, Debug, PartialEq)]
pub struct PairedSample {
    x: CodedColumn,
    y: Response,
}

impl PairedSample {
    pub fn nominal_nominal<S: AsRef<str>, T: AsRef<str>>(x: &[S], y: &[T]) -> Result<Self> {
        Self::from_columns(
            CodedColumn::from_labels(x)?,
            Response::Nominal(CodedColumn::from_labels(y)?),
        )
    }

    pub fn nominal_real<S: AsRef<str>>(x: &[S], y: &[f64]) -> Result<Self> {
        Self::from_columns(CodedColumn::from_labels(x)?, Response::Real(y.to_vec()))
    }

    pub fn from_columns(x: CodedColumn, y: Response) -> Result<Self> {
        let n = x.len();
        let ny = match &y {
            Response::Nominal(c) => c.len(),
            Response::Real(v) => {
                if let Some(i) = v.iter().position(|v| !v.is_finite()) {
                    return Err(Error::invalid(format!(
                        "y value at observation {} is not finite",
                        i + 1
                    )));
                }
                v.len()
            }
        };
        if ny != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: ny,
            });
        }
        if n < 2 {
            return Err(Error::invalid(format!(
                "a sample needs at least 2 observations, got {n}"
            )));
        }
        Ok(PairedSample { x, y })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn kind(&self) -> SampleKind {
        match self.y {
            Response::Nominal(_) => SampleKind::NominalNominal,
            Response::Real(_) => SampleKind::NominalReal,
        }
    }

    pub fn x(&self) -> &CodedColumn {
        &self.x
    }

    pub fn y(&self) -> &Response {
        &self.y
    }

    /// Number of distinct observed x categories.
    pub fn k(&self) -> usize {
        self.x.categories()
    }

    /// Number of distinct observed y categories (nominal `y` only).
    pub fn l(&self) -> Option<usize> {
        match &self.y {
            Response::Nominal(c) => Some(c.categories()),
            Response::Real(_) => None,
        }
    }

    pub fn y_nominal(&self) -> Option<&CodedColumn> {
        match &self.y {
            Response::Nominal(c) => Some(c),
            Response::Real(_) => None,
        }
    }

    pub fn y_real(&self) -> Option<&[f64]> {
        match &self.y {
            Response::Real(v) => Some(v),
            Response::Nominal(_) => None,
        }
    }

    /// Exchanges the roles of `x` and `y` in a nominal-nominal sample.
    pub fn swapped(&self) -> Result<Self> {
        match &self.y {
            Response::Nominal(y) => Ok(PairedSample {
                x: y.clone(),
                y: Response::Nominal(self.x.clone()),
            }),
            Response::Real(_) => Err(Error::invalid(
                "only nominal-nominal samples can swap coordinates",
            )),
        }
    }

    /// Applies `f` to every real `y` value.
    pub fn map_y(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        match &self.y {
            Response::Real(v) => Self::from_columns(
                self.x.clone(),
                Response::Real(v.iter().map(|&y| f(y)).collect()),
            ),
            Response::Nominal(_) => Err(Error::invalid("map_y needs a real-valued y")),
        }
    }

    /// Reads a two-column CSV file with a header row.
    pub fn from_csv(path: impl AsRef<Path>, schema: &ColumnSpec) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())?;
        Self::from_csv_reader(file, schema)
    }

    /// `y` is parsed as real when every entry is a finite number, otherwise as nominal.
    pub fn from_csv_reader<R: Read>(reader: R, schema: &ColumnSpec) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.is_empty() {
            return Err(Error::Parse("empty file".into()));
        }
        let xi = schema.x.resolve(&headers)?;
        let yi = schema.y.resolve(&headers)?;
        if xi == yi {
            return Err(Error::Parse("x and y must be different columns".into()));
        }

        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let row = xs.len() + 1;
            let x = record.get(xi).unwrap_or_default();
            let y = record.get(yi).unwrap_or_default();
            if x.is_empty() {
                return Err(Error::Parse(format!("column x is empty at row {row}")));
            }
            if y.is_empty() {
                return Err(Error::Parse(format!("column y is empty at row {row}")));
            }
            xs.push(x.to_string());
            ys.push(y.to_string());
        }
        if xs.is_empty() {
            return Err(Error::Parse("no data rows".into()));
        }

        let parsed: Vec<Option<f64>> = ys
            .iter()
            .map(|s| s.parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect();
        let numeric = parsed[0].is_some();
        if let Some(pos) = parsed.iter().position(|p| p.is_some() != numeric) {
            return Err(Error::Parse(format!(
                "column y mixes numeric and non-numeric at row {}",
                pos + 1
            )));
        }
        if numeric {
            let ys: Vec<f64> = parsed.into_iter().map(Option::unwrap).collect();
            Self::nominal_real(&xs, &ys)
        } else {
            Self::nominal_nominal(&xs, &ys)
        }
    }
}

/// Selects the `x` and `y` columns of a CSV file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColumnSpec {
    pub x: ColumnRef,
    pub y: ColumnRef,
}

impl Default for ColumnSpec {
    fn default() -> Self {
        ColumnSpec {
            x: ColumnRef::Index(0),
            y: ColumnRef::Index(1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ColumnRef {
    Index(usize),
    Name(String),
}

impl ColumnRef {
    fn resolve(&self, headers: &csv::StringRecord) -> Result<usize> {
        match self {
            ColumnRef::Index(i) if *i < headers.len() => Ok(*i),
            ColumnRef::Index(i) => Err(Error::Parse(format!(
                "column index {i} out of range ({} columns)",
                headers.len()
            ))),
            ColumnRef::Name(name) => headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Parse(format!("no column named '{name}'"))),
        }
    }
}
