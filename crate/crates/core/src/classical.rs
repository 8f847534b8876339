//! Classical association measures for two nominal variables.
//!
//! All of them are computed on probabilities; counts tables are normalized
//! first. None of them is proper: each can stay far below 1 for perfectly
//! dependent variables when the marginals do not match.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::table::ContingencyTable;

/// Every classical measure for one table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClassicalReport {
    pub msc: f64,
    pub cramers_v: f64,
    pub tschuprow_t: f64,
    pub pearson_c: f64,
    pub sakoda_s: f64,
    pub lambda_x: f64,
    pub lambda_y: f64,
    pub lambda_sym: f64,
    pub gk_tau_x: f64,
    pub gk_tau_y: f64,
    pub gk_tau_sym: f64,
    pub uncertainty: f64,
}

/// Cramér's V, Tschuprow's T, Pearson's C and Sakoda's S.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContingencyFamily {
    pub cramers_v: f64,
    pub tschuprow_t: f64,
    pub pearson_c: f64,
    pub sakoda_s: f64,
}

/// Probabilities with their marginals, validated for the classical measures.
struct Joint {
    a: usize,
    b: usize,
    p: Vec<f64>,
    row: Vec<f64>,
    col: Vec<f64>,
}

impl Joint {
    fn new(t: &ContingencyTable) -> Result<Self> {
        let (a, b) = (t.k(), t.l());
        if a < 2 || b < 2 {
            return Err(Error::invalid(format!(
                "classical measures need at least a 2x2 table, got {a}x{b}"
            )));
        }
        let p = t.probabilities();
        let row: Vec<f64> = p.chunks(b).map(|r| r.iter().sum()).collect();
        let mut col = vec![0.0; b];
        for r in p.chunks(b) {
            for (c, v) in col.iter_mut().zip(r) {
                *c += v;
            }
        }
        if row.iter().chain(&col).any(|&m| m <= 0.0) {
            return Err(Error::invalid("every marginal probability must be positive"));
        }
        Ok(Joint { a, b, p, row, col })
    }

    fn p(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.b + j]
    }

    fn msc(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.a {
            for j in 0..self.b {
                let p = self.p(i, j);
                s += p * p / (self.row[i] * self.col[j]);
            }
        }
        (s - 1.0).max(0.0)
    }
}

/// Mean square contingency, the population χ² statistic: Σ p²/(p_i· p_·j) − 1.
pub fn msc(t: &ContingencyTable) -> Result<f64> {
    Ok(Joint::new(t)?.msc())
}

pub fn contingency_family(t: &ContingencyTable) -> Result<ContingencyFamily> {
    let j = Joint::new(t)?;
    Ok(family_from_msc(j.msc(), j.a, j.b))
}

fn family_from_msc(msc: f64, a: usize, b: usize) -> ContingencyFamily {
    let (a, b) = (a as f64, b as f64);
    let min_minus = (a - 1.0).min(b - 1.0);
    ContingencyFamily {
        cramers_v: (msc / min_minus).sqrt(),
        tschuprow_t: (msc / ((a - 1.0) * (b - 1.0)).sqrt()).sqrt(),
        pearson_c: (msc / (1.0 + msc)).sqrt(),
        sakoda_s: (msc * a.min(b) / ((1.0 + msc) * min_minus)).sqrt(),
    }
}

/// Goodman–Kruskal λ: (λ_x, λ_y, symmetric λ).
pub fn gk_lambda(t: &ContingencyTable) -> Result<(f64, f64, f64)> {
    let j = Joint::new(t)?;
    let max = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0f64, f64::max);
    let row_max: f64 = (0..j.a).map(|i| max(&mut (0..j.b).map(|c| j.p(i, c)))).sum();
    let col_max: f64 = (0..j.b).map(|c| max(&mut (0..j.a).map(|i| j.p(i, c)))).sum();
    let pm_col = max(&mut j.col.iter().copied());
    let pm_row = max(&mut j.row.iter().copied());
    if pm_col >= 1.0 || pm_row >= 1.0 {
        return Err(Error::degenerate("lambda undefined: a marginal is a point mass"));
    }
    let lambda_y = (row_max - pm_col) / (1.0 - pm_col);
    let lambda_x = (col_max - pm_row) / (1.0 - pm_row);
    let lambda = 0.5 * (row_max + col_max - pm_col - pm_row) / (1.0 - 0.5 * (pm_col + pm_row));
    Ok((clamp01(lambda_x), clamp01(lambda_y), clamp01(lambda)))
}

/// Goodman–Kruskal τ: (τ_x, τ_y, symmetric τ).
pub fn gk_tau(t: &ContingencyTable) -> Result<(f64, f64, f64)> {
    let j = Joint::new(t)?;
    let (mut by_row, mut by_col) = (0.0, 0.0);
    for i in 0..j.a {
        for c in 0..j.b {
            let p2 = j.p(i, c) * j.p(i, c);
            by_row += p2 / j.row[i];
            by_col += p2 / j.col[c];
        }
    }
    let sq_col: f64 = j.col.iter().map(|v| v * v).sum();
    let sq_row: f64 = j.row.iter().map(|v| v * v).sum();
    if sq_col >= 1.0 || sq_row >= 1.0 {
        return Err(Error::degenerate("tau undefined: a marginal is a point mass"));
    }
    let tau_y = (by_row - sq_col) / (1.0 - sq_col);
    let tau_x = (by_col - sq_row) / (1.0 - sq_row);
    let tau = 0.5 * (by_row + by_col - sq_col - sq_row) / (1.0 - 0.5 * (sq_col + sq_row));
    Ok((clamp01(tau_x), clamp01(tau_y), clamp01(tau)))
}

/// Symmetric uncertainty coefficient 2(H(X)+H(Y)−H(X,Y))/(H(X)+H(Y)), natural log.
pub fn uncertainty(t: &ContingencyTable) -> Result<f64> {
    let j = Joint::new(t)?;
    let hx = entropy(&j.row);
    let hy = entropy(&j.col);
    let hxy = entropy(&j.p);
    if hx + hy <= 0.0 {
        return Err(Error::degenerate("uncertainty coefficient undefined: both marginals degenerate"));
    }
    Ok(clamp01(2.0 * (hx + hy - hxy) / (hx + hy)))
}

pub fn classical_report(t: &ContingencyTable) -> Result<ClassicalReport> {
    let j = Joint::new(t)?;
    let m = j.msc();
    let f = family_from_msc(m, j.a, j.b);
    let (lambda_x, lambda_y, lambda_sym) = gk_lambda(t)?;
    let (gk_tau_x, gk_tau_y, gk_tau_sym) = gk_tau(t)?;
    Ok(ClassicalReport {
        msc: m,
        cramers_v: f.cramers_v,
        tschuprow_t: f.tschuprow_t,
        pearson_c: f.pearson_c,
        sakoda_s: f.sakoda_s,
        lambda_x,
        lambda_y,
        lambda_sym,
        gk_tau_x,
        gk_tau_y,
        gk_tau_sym,
        uncertainty: uncertainty(t)?,
    })
}

fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&v| v > 0.0).map(|&v| v * v.ln()).sum::<f64>()
}

// Rounding can push ratios a hair outside their range.
fn clamp01(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}
