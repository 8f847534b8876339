//! Integer cross-tabulation of x categories against ordered y levels.
//!
//! Every sample reduces to one of these: for a nominal `y` the columns are its
//! categories, for a real `y` they are the distinct values in increasing
//! order (ties collapse into one column, compared with exact float equality).
//! Pair counts, the H matrix and the variance kernels only depend on this view.

use crate::error::{Error, Result};
use crate::sample::{PairedSample, Response};
use crate::table::{ContingencyTable, TableMode};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossCounts {
    rows: usize,
    cols: usize,
    counts: Vec<u64>,
    y_nominal: bool,
}

impl CrossCounts {
    pub fn new(rows: usize, cols: usize, counts: Vec<u64>, y_nominal: bool) -> Result<Self> {
        if counts.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: counts.len(),
            });
        }
        Ok(CrossCounts {
            rows,
            cols,
            counts,
            y_nominal,
        })
    }

    pub fn from_sample(sample: &PairedSample) -> Self {
        Self::with_cells(sample).0
    }

    /// Also returns the flat cell index of every observation.
    pub fn with_cells(sample: &PairedSample) -> (Self, Vec<usize>) {
        let rows = sample.k();
        let xc = sample.x().codes();
        let (cols, ycol, y_nominal): (usize, Vec<usize>, bool) = match sample.y() {
            Response::Nominal(y) => (
                y.categories(),
                y.codes().iter().map(|&c| c as usize).collect(),
                true,
            ),
            Response::Real(v) => {
                let levels = distinct_sorted(v);
                let idx = v
                    .iter()
                    .map(|y| {
                        levels
                            .binary_search_by(|probe| probe.partial_cmp(y).unwrap())
                            .expect("level present")
                    })
                    .collect();
                (levels.len(), idx, false)
            }
        };
        let mut counts = vec![0u64; rows * cols];
        let cells: Vec<usize> = xc
            .iter()
            .zip(&ycol)
            .map(|(&x, &y)| x as usize * cols + y)
            .collect();
        for &c in &cells {
            counts[c] += 1;
        }
        (
            CrossCounts {
                rows,
                cols,
                counts,
                y_nominal,
            },
            cells,
        )
    }

    /// Counts-mode tables only; every cell must be a nonnegative integer.
    pub fn from_table(table: &ContingencyTable) -> Result<Self> {
        if table.mode() != TableMode::Counts {
            return Err(Error::invalid("expected a counts-mode table"));
        }
        let counts = table.cells().iter().map(|&c| c as u64).collect();
        Self::new(table.k(), table.l(), counts, true)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn y_nominal(&self) -> bool {
        self.y_nominal
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.cols + j]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn row_sums(&self) -> Vec<u64> {
        (0..self.rows)
            .map(|i| self.counts[i * self.cols..(i + 1) * self.cols].iter().sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        let mut out = vec![0u64; self.cols];
        for i in 0..self.rows {
            for (j, o) in out.iter_mut().enumerate() {
                *o += self.get(i, j);
            }
        }
        out
    }

    /// Row `r` of the result is row `x_order[r]` of `self`; likewise for columns.
    pub fn reordered(&self, x_order: &[usize], y_order: Option<&[usize]>) -> CrossCounts {
        let mut counts = Vec::with_capacity(self.counts.len());
        for &i in x_order {
            match y_order {
                Some(yo) => counts.extend(yo.iter().map(|&j| self.get(i, j))),
                None => counts.extend_from_slice(&self.counts[i * self.cols..(i + 1) * self.cols]),
            }
        }
        CrossCounts {
            rows: self.rows,
            cols: self.cols,
            counts,
            y_nominal: self.y_nominal,
        }
    }

    pub fn transposed(&self) -> CrossCounts {
        let mut counts = Vec::with_capacity(self.counts.len());
        for j in 0..self.cols {
            counts.extend((0..self.rows).map(|i| self.get(i, j)));
        }
        CrossCounts {
            rows: self.cols,
            cols: self.rows,
            counts,
            y_nominal: true,
        }
    }
}

fn distinct_sorted(values: &[f64]) -> Vec<f64> {
    let mut levels = values.to_vec();
    levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
    levels.dedup_by(|a, b| a == b);
    levels
}
