//! Labeled k×l contingency tables of counts or probabilities.

use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sample::{CodedColumn, NominalValue, PairedSample, Response, SampleKind};

const PROB_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableMode {
    Counts,
    Probabilities,
}

/// Rows and columns are sorted by label and carry positive mass.
#[derive(Clone, Debug, PartialEq)]
pub struct ContingencyTable {
    rows: Vec<NominalValue>,
    cols: Vec<NominalValue>,
    cells: Vec<f64>,
    mode: TableMode,
}

impl ContingencyTable {
    /// Validates the cells, drops rows and columns without mass, and sorts both
    /// axes lexicographically by label.
    pub fn new<S: AsRef<str>, T: AsRef<str>>(
        rows: &[S],
        cols: &[T],
        cells: &[Vec<f64>],
        mode: TableMode,
    ) -> Result<Self> {
        if cells.len() != rows.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                got: cells.len(),
            });
        }
        for r in cells {
            if r.len() != cols.len() {
                return Err(Error::DimensionMismatch {
                    expected: cols.len(),
                    got: r.len(),
                });
            }
        }
        let row_labels = distinct_labels(rows, "row")?;
        let col_labels = distinct_labels(cols, "column")?;
        for (i, row) in cells.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                if !c.is_finite() || c < 0.0 {
                    return Err(Error::invalid(format!(
                        "cell ({}, {}) must be finite and nonnegative, got {c}",
                        i + 1,
                        j + 1
                    )));
                }
                if mode == TableMode::Counts && c.fract() != 0.0 {
                    return Err(Error::invalid(format!(
                        "cell ({}, {}) is not an integer count: {c}",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }

        let mut keep_rows: Vec<usize> = (0..rows.len())
            .filter(|&i| cells[i].iter().any(|&c| c > 0.0))
            .collect();
        let mut keep_cols: Vec<usize> = (0..cols.len())
            .filter(|&j| cells.iter().any(|r| r[j] > 0.0))
            .collect();
        if keep_rows.is_empty() {
            return Err(Error::invalid("table has no positive cell"));
        }
        keep_rows.sort_by(|&a, &b| row_labels[a].as_str().cmp(row_labels[b].as_str()));
        keep_cols.sort_by(|&a, &b| col_labels[a].as_str().cmp(col_labels[b].as_str()));

        let mut out = Vec::with_capacity(keep_rows.len() * keep_cols.len());
        for &i in &keep_rows {
            out.extend(keep_cols.iter().map(|&j| cells[i][j]));
        }
        if mode == TableMode::Probabilities {
            let total: f64 = out.iter().sum();
            if (total - 1.0).abs() > PROB_TOL {
                return Err(Error::invalid(format!(
                    "probabilities must sum to 1, got {total}"
                )));
            }
        }
        Ok(ContingencyTable {
            rows: keep_rows.iter().map(|&i| row_labels[i].clone()).collect(),
            cols: keep_cols.iter().map(|&j| col_labels[j].clone()).collect(),
            cells: out,
            mode,
        })
    }

    /// Unlabeled convenience constructor; rows are `x1..`, columns `y1..`.
    pub fn from_matrix(cells: &[Vec<f64>], mode: TableMode) -> Result<Self> {
        let k = cells.len();
        let l = cells.first().map_or(0, Vec::len);
        Self::new(&axis_labels('x', k), &axis_labels('y', l), cells, mode)
    }

    /// Joint counts of a nominal-nominal sample.
    pub fn from_sample(sample: &PairedSample) -> Result<Self> {
        let y = match sample.y() {
            Response::Nominal(y) => y,
            Response::Real(_) => {
                return Err(Error::invalid(
                    "a contingency table needs a nominal-nominal sample",
                ))
            }
        };
        let (k, l) = (sample.k(), y.categories());
        let mut cells = vec![0.0; k * l];
        for (&x, &y) in sample.x().codes().iter().zip(y.codes()) {
            cells[x as usize * l + y as usize] += 1.0;
        }
        Ok(ContingencyTable {
            rows: sample.x().labels().to_vec(),
            cols: y.labels().to_vec(),
            cells,
            mode: TableMode::Counts,
        })
    }

    /// Upper Fréchet–Hoeffding coupling of two probability vectors: mass is
    /// placed by sweeping both cumulative distributions in lockstep.
    pub fn comonotonic(px: &[f64], py: &[f64]) -> Result<Self> {
        check_marginal(px, "px")?;
        check_marginal(py, "py")?;
        let (k, l) = (px.len(), py.len());
        let mut cells = vec![vec![0.0; l]; k];
        let (mut i, mut j) = (0usize, 0usize);
        let (mut rem_x, mut rem_y) = (px[0], py[0]);
        loop {
            let m = rem_x.min(rem_y);
            cells[i][j] += m;
            rem_x -= m;
            rem_y -= m;
            let next_i = rem_x <= PROB_TOL && i + 1 < k;
            let next_j = rem_y <= PROB_TOL && j + 1 < l;
            if !next_i && !next_j {
                break;
            }
            if next_i {
                i += 1;
                rem_x += px[i];
            }
            if next_j {
                j += 1;
                rem_y += py[j];
            }
        }
        // Drop rounding residue so the cells sum to one.
        let total: f64 = cells.iter().flatten().sum();
        cells[k - 1][l - 1] += 1.0 - total;
        if cells[k - 1][l - 1] < 0.0 {
            cells[k - 1][l - 1] = 0.0;
        }
        Self::from_matrix(&cells, TableMode::Probabilities)
    }

    /// Parses a CSV matrix: the header row holds column labels (its first field
    /// is ignored) and the first field of every row is the row label.
    pub fn from_csv(path: impl AsRef<Path>, mode: Option<TableMode>) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())?;
        Self::from_csv_reader(file, mode)
    }

    /// With `mode = None` the table is read as counts when every cell is an
    /// integer, and as probabilities otherwise.
    pub fn from_csv_reader<R: Read>(reader: R, mode: Option<TableMode>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() < 2 {
            return Err(Error::Parse(
                "table header needs a label column and at least one data column".into(),
            ));
        }
        let cols: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
        let mut rows = Vec::new();
        let mut cells = Vec::new();
        for (r, record) in rdr.records().enumerate() {
            let record = record?;
            rows.push(record.get(0).unwrap_or_default().to_string());
            let mut row = Vec::with_capacity(cols.len());
            for (c, field) in record.iter().skip(1).enumerate() {
                let v: f64 = field.replace('_', "").parse().map_err(|_| {
                    Error::Parse(format!(
                        "cell at row {}, column {} is not a number: '{field}'",
                        r + 1,
                        c + 2
                    ))
                })?;
                row.push(v);
            }
            cells.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Parse("table has no data rows".into()));
        }
        let mode = mode.unwrap_or_else(|| {
            if cells.iter().flatten().all(|v| v.fract() == 0.0) {
                TableMode::Counts
            } else {
                TableMode::Probabilities
            }
        });
        Self::new(&rows, &cols, &cells, mode)
    }

    /// Converts counts to probabilities; probability tables are returned unchanged.
    pub fn normalize(&self) -> Result<Self> {
        if self.mode == TableMode::Probabilities {
            return Ok(self.clone());
        }
        let total = self.total();
        if total <= 0.0 {
            return Err(Error::invalid("cannot normalize a table with zero total"));
        }
        Ok(ContingencyTable {
            rows: self.rows.clone(),
            cols: self.cols.clone(),
            cells: self.cells.iter().map(|c| c / total).collect(),
            mode: TableMode::Probabilities,
        })
    }

    /// Expands a counts table back into a nominal-nominal sample, row-major.
    pub fn expand(&self) -> Result<PairedSample> {
        if self.mode != TableMode::Counts {
            return Err(Error::invalid("only counts tables can be expanded"));
        }
        let (k, l) = (self.k(), self.l());
        let mut xc = Vec::new();
        let mut yc = Vec::new();
        for i in 0..k {
            for j in 0..l {
                let c = self.get(i, j) as usize;
                xc.extend(std::iter::repeat_n(i as u32, c));
                yc.extend(std::iter::repeat_n(j as u32, c));
            }
        }
        let rows: Vec<&str> = self.rows.iter().map(NominalValue::as_str).collect();
        let cols: Vec<&str> = self.cols.iter().map(NominalValue::as_str).collect();
        PairedSample::from_columns(
            CodedColumn::from_codes(&rows, &xc)?,
            Response::Nominal(CodedColumn::from_codes(&cols, &yc)?),
        )
    }

    pub fn transposed(&self) -> Self {
        let (k, l) = (self.k(), self.l());
        let mut cells = Vec::with_capacity(k * l);
        for j in 0..l {
            cells.extend((0..k).map(|i| self.get(i, j)));
        }
        ContingencyTable {
            rows: self.cols.clone(),
            cols: self.rows.clone(),
            cells,
            mode: self.mode,
        }
    }

    pub fn k(&self) -> usize {
        self.rows.len()
    }

    pub fn l(&self) -> usize {
        self.cols.len()
    }

    pub fn rows(&self) -> &[NominalValue] {
        &self.rows
    }

    pub fn cols(&self) -> &[NominalValue] {
        &self.cols
    }

    pub fn mode(&self) -> TableMode {
        self.mode
    }

    /// Row-major cells.
    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.cells[i * self.cols.len() + j]
    }

    pub fn total(&self) -> f64 {
        self.cells.iter().sum()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.cells.chunks(self.l()).map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.l()];
        for row in self.cells.chunks(self.l()) {
            for (o, c) in out.iter_mut().zip(row) {
                *o += c;
            }
        }
        out
    }

    /// Row-major probability matrix, normalizing counts on the fly.
    pub fn probabilities(&self) -> Vec<f64> {
        let total = self.total();
        self.cells.iter().map(|c| c / total).collect()
    }

    pub fn kind(&self) -> SampleKind {
        SampleKind::NominalNominal
    }
}

fn axis_labels(prefix: char, n: usize) -> Vec<String> {
    let width = n.max(1).to_string().len();
    (1..=n).map(|i| format!("{prefix}{i:0width$}")).collect()
}

fn distinct_labels<S: AsRef<str>>(labels: &[S], what: &str) -> Result<Vec<NominalValue>> {
    let out: Vec<NominalValue> = labels
        .iter()
        .map(|s| NominalValue::new(s.as_ref()))
        .collect::<Result<_>>()?;
    let mut sorted: Vec<&str> = out.iter().map(NominalValue::as_str).collect();
    sorted.sort_unstable();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::invalid(format!("duplicate {what} label '{}'", w[0])));
    }
    Ok(out)
}

fn check_marginal(p: &[f64], name: &str) -> Result<()> {
    if p.is_empty() {
        return Err(Error::invalid(format!("{name} is empty")));
    }
    if p.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::invalid(format!("{name} has a negative or non-finite entry")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > PROB_TOL {
        return Err(Error::invalid(format!("{name} sums to {s}, not 1")));
    }
    Ok(())
}
