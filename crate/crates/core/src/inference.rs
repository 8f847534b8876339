//! Asymptotic inference for γ̂*: plug-in variance from the first-order
//! U-statistic kernels, confidence intervals, the joint covariance across all
//! numberings, the max-type independence test and two classical baselines.
//!
//! Every quantity depends on the data only through the cross-tabulation, so
//! kernels are evaluated once per cell and weighted by the cell counts.

use serde::Serialize;

use crate::concordance::{count_pairs_cross, gamma_components, GammaComponents};
use crate::crosstab::CrossCounts;
use crate::distributions::{chi2_sf, f_sf, mvn_cdf, normal_quantile, MvnConfig};
use crate::error::{Error, Result};
use crate::gamma_star::{gamma_star_cross, SearchLimits};
use crate::numbering::{all_numberings, factorial, Numbering};
use crate::sample::{PairedSample, Response};
use crate::table::ContingencyTable;

/// Centered first-order kernels of τ̂ and ν̂, one value per observation.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelEstimates {
    pub k1_tau: Vec<f64>,
    pub k1_nu: Vec<f64>,
}

/// Per-cell kernels of one numbering, indexed like the original cross-tabulation.
#[derive(Clone, Debug)]
pub(crate) struct CellKernels {
    pub tau: Vec<f64>,
    pub nu: Vec<f64>,
    pub comps: GammaComponents,
}

impl CellKernels {
    /// Influence values of γ̂ per cell: (k_τ + γ̂ k_ν) / (1 − ν̂).
    fn gamma(&self) -> Vec<f64> {
        let c = &self.comps;
        let s = 1.0 / (1.0 - c.nu_hat);
        self.tau
            .iter()
            .zip(&self.nu)
            .map(|(t, v)| (t + c.gamma_hat * v) * s)
            .collect()
    }
}

pub(crate) fn cell_kernels(cc: &CrossCounts, nb: &Numbering) -> Result<CellKernels> {
    let x_order = nb.x_order();
    let y_order = nb.y_order();
    let comps = gamma_components(&count_pairs_cross(cc, x_order, y_order))?;
    let t = cc.reordered(x_order, y_order);
    let (k, m) = (t.rows(), t.cols());
    let n = t.total() as f64;
    let p = |i: usize, j: usize| t.get(i, j) as f64 / n;
    let row: Vec<f64> = t.row_sums().iter().map(|&v| v as f64 / n).collect();
    let col: Vec<f64> = t.col_sums().iter().map(|&v| v as f64 / n).collect();

    let mid = |marg: &[f64]| -> Vec<f64> {
        let mut acc = 0.0;
        marg.iter()
            .map(|&v| {
                let g = acc + 0.5 * v;
                acc += v;
                g
            })
            .collect()
    };
    let gx = mid(&row);
    let gy = mid(&col);

    let mut tau = vec![0.0; k * m];
    let mut nu = vec![0.0; k * m];
    // below[j]: mass with rank-x strictly below the current row, per column.
    let mut below = vec![0.0; m];
    for i in 0..k {
        let mut below_left = 0.0; // P(X < x, Y < y)
        let mut same_left = 0.0; // P(X = x, Y < y)
        for j in 0..m {
            let pij = p(i, j);
            let gxy = below_left + 0.5 * same_left + 0.5 * below[j] + 0.25 * pij;
            let orig = x_order[i] * m + y_order.map_or(j, |yo| yo[j]);
            tau[orig] = 4.0 * gxy - 2.0 * gx[i] - 2.0 * gy[j] + 1.0;
            nu[orig] = row[i] + col[j] - pij;
            below_left += below[j];
            same_left += pij;
        }
        for (j, b) in below.iter_mut().enumerate() {
            *b += p(i, j);
        }
    }
    // Center with the empirical weights so the kernels average to zero exactly.
    let w: Vec<f64> = cc.counts().iter().map(|&c| c as f64 / n).collect();
    for v in [&mut tau, &mut nu] {
        let mean: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        v.iter_mut().for_each(|a| *a -= mean);
    }
    Ok(CellKernels { tau, nu, comps })
}

fn check_numbering(cc: &CrossCounts, nb: &Numbering) -> Result<()> {
    let ok = nb.k() == cc.rows()
        && match nb.l() {
            Some(l) => cc.y_nominal() && l == cc.cols(),
            None => !cc.y_nominal(),
        };
    if ok {
        Ok(())
    } else {
        Err(Error::invalid("numbering does not match the sample's categories"))
    }
}

pub fn kernel_estimates(sample: &PairedSample, nb: &Numbering) -> Result<KernelEstimates> {
    let (cc, cells) = CrossCounts::with_cells(sample);
    check_numbering(&cc, nb)?;
    let ck = cell_kernels(&cc, nb)?;
    Ok(KernelEstimates {
        k1_tau: cells.iter().map(|&c| ck.tau[c]).collect(),
        k1_nu: cells.iter().map(|&c| ck.nu[c]).collect(),
    })
}

/// Asymptotic variance of √n(γ̂ − γ) under a fixed numbering:
/// 4·E[g²] with g = (k_τ + γ k_ν)/(1 − ν).
pub fn sigma2_gamma_hat(sample: &PairedSample, nb: &Numbering) -> Result<f64> {
    let cc = CrossCounts::from_sample(sample);
    check_numbering(&cc, nb)?;
    sigma2_cross(&cc, nb)
}

/// Square root of [`sigma2_gamma_hat`].
pub fn sigma_gamma_hat(sample: &PairedSample, nb: &Numbering) -> Result<f64> {
    Ok(sigma2_gamma_hat(sample, nb)?.sqrt())
}

pub(crate) fn sigma2_cross(cc: &CrossCounts, nb: &Numbering) -> Result<f64> {
    let ck = cell_kernels(cc, nb)?;
    if ck.comps.nu_hat >= 1.0 {
        return Err(Error::degenerate("all pairs tied"));
    }
    let g = ck.gamma();
    let n = cc.total() as f64;
    let s: f64 = g.iter().zip(cc.counts()).map(|(v, &c)| v * v * c as f64).sum::<f64>() / n;
    Ok((4.0 * s).max(0.0))
}

/// Budgets for the joint covariance and the independence test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InferenceLimits {
    pub max_k_real: usize,
    pub max_categories_nominal: usize,
}

impl Default for InferenceLimits {
    fn default() -> Self {
        InferenceLimits {
            max_k_real: 6,
            max_categories_nominal: 4,
        }
    }
}

impl InferenceLimits {
    fn check(&self, cc: &CrossCounts) -> Result<()> {
        let (k, l) = (cc.rows(), cc.cols());
        if cc.y_nominal() {
            let m = self.max_categories_nominal;
            if k > m || l > m {
                return Err(Error::budget(format!(
                    "the independence test for a {k}x{l} table needs {} numberings; the limit is \
                     {m} categories per variable, use the chi-square test instead",
                    factorial(k).zip(factorial(l)).map_or(u64::MAX, |(a, b)| a.saturating_mul(b))
                )));
            }
        } else if k > self.max_k_real {
            return Err(Error::budget(format!(
                "the independence test for {k} categories needs {k}! numberings; the limit is {}, \
                 use the F test instead",
                self.max_k_real
            )));
        }
        Ok(())
    }
}

/// Σ̂ over every numbering, row-major, with numberings in lexicographic order.
#[derive(Clone, Debug, PartialEq)]
pub struct JointCovariance {
    pub dimension: usize,
    pub sigma: Vec<f64>,
    pub numberings: Vec<Numbering>,
    /// γ̂ under each numbering.
    pub gammas: Vec<f64>,
}

pub fn joint_covariance(sample: &PairedSample, limits: &InferenceLimits) -> Result<JointCovariance> {
    joint_covariance_cross(&CrossCounts::from_sample(sample), limits)
}

pub(crate) fn joint_covariance_cross(cc: &CrossCounts, limits: &InferenceLimits) -> Result<JointCovariance> {
    limits.check(cc)?;
    let numberings = all_numberings(cc.rows(), cc.y_nominal().then_some(cc.cols()));
    let n = cc.total() as f64;
    // Only occupied cells matter.
    let occupied: Vec<(usize, f64)> = cc
        .counts()
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, &c)| (i, c as f64 / n))
        .collect();
    let mut rows = Vec::with_capacity(numberings.len());
    let mut gammas = Vec::with_capacity(numberings.len());
    for nb in &numberings {
        let ck = cell_kernels(cc, nb)?;
        gammas.push(ck.comps.gamma_hat);
        let g = ck.gamma();
        rows.push(occupied.iter().map(|&(c, _)| g[c]).collect::<Vec<f64>>());
    }
    let d = numberings.len();
    let mut sigma = vec![0.0; d * d];
    for a in 0..d {
        for b in a..d {
            let s: f64 = rows[a]
                .iter()
                .zip(&rows[b])
                .zip(&occupied)
                .map(|((x, y), &(_, w))| x * y * w)
                .sum();
            sigma[a * d + b] = 4.0 * s;
            sigma[b * d + a] = 4.0 * s;
        }
    }
    Ok(JointCovariance {
        dimension: d,
        sigma,
        numberings,
        gammas,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConfidenceInterval {
    pub level: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IndependenceTest {
    /// √n·γ̂*.
    pub statistic: f64,
    pub p_value: f64,
    pub mvn_error: f64,
    pub mvn_points: usize,
    /// Number of numberings in the joint law.
    pub dimension: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InferenceReport {
    pub n: u64,
    pub gamma_star: f64,
    /// σ̂, the asymptotic standard deviation of √n·γ̂* at the chosen numbering.
    pub sigma: f64,
    /// σ̂/√n.
    pub std_error: f64,
    pub argmax: Numbering,
    pub argmax_count: u64,
    pub ci: Option<ConfidenceInterval>,
    pub test: Option<IndependenceTest>,
}

/// What [`infer`] should compute.
#[derive(Clone, Debug, PartialEq)]
pub struct InferenceOptions {
    /// Confidence level; `None` skips the interval.
    pub level: Option<f64>,
    pub test: bool,
    pub mvn: MvnConfig,
    pub search: SearchLimits,
    pub limits: InferenceLimits,
}

impl Default for InferenceOptions {
    fn default() -> Self {
        InferenceOptions {
            level: Some(0.9),
            test: false,
            mvn: MvnConfig::default(),
            search: SearchLimits::default(),
            limits: InferenceLimits::default(),
        }
    }
}

pub fn infer(sample: &PairedSample, opts: &InferenceOptions) -> Result<InferenceReport> {
    infer_cross(&CrossCounts::from_sample(sample), opts)
}

pub fn infer_table(table: &ContingencyTable, opts: &InferenceOptions) -> Result<InferenceReport> {
    infer_cross(&CrossCounts::from_table(table)?, opts)
}

pub(crate) fn infer_cross(cc: &CrossCounts, opts: &InferenceOptions) -> Result<InferenceReport> {
    if let Some(level) = opts.level {
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::invalid(format!("confidence level must lie in (0, 1), got {level}")));
        }
    }
    if opts.test {
        opts.limits.check(cc)?;
    }
    let est = gamma_star_cross(cc, &opts.search)?;
    let n = cc.total();
    let sigma2 = sigma2_cross(cc, &est.argmax)?;
    let sigma = if est.value >= 1.0 { 0.0 } else { sigma2.sqrt() };
    let std_error = sigma / (n as f64).sqrt();
    let ci = match opts.level {
        Some(level) => Some(interval(est.value, std_error, level)?),
        None => None,
    };
    let test = if opts.test {
        Some(test_with_estimate(cc, est.value, &opts.limits, &opts.mvn)?)
    } else {
        None
    };
    Ok(InferenceReport {
        n,
        gamma_star: est.value,
        sigma,
        std_error,
        argmax: est.argmax,
        argmax_count: est.argmax_count,
        ci,
        test,
    })
}

fn interval(value: f64, std_error: f64, level: f64) -> Result<ConfidenceInterval> {
    let z = normal_quantile(1.0 - (1.0 - level) / 2.0)?;
    Ok(ConfidenceInterval {
        level,
        lo: (value - z * std_error).max(0.0),
        hi: (value + z * std_error).min(1.0),
    })
}

/// Interval at the numbering chosen by γ̂*, clipped to [0, 1].
pub fn confidence_interval(sample: &PairedSample, level: f64) -> Result<InferenceReport> {
    infer(
        sample,
        &InferenceOptions {
            level: Some(level),
            ..InferenceOptions::default()
        },
    )
}

/// Max-type test of independence: p = 1 − P(max_a W_a ≤ √n γ̂*), W ~ N(0, Σ̂).
pub fn independence_test(sample: &PairedSample, mvn: &MvnConfig) -> Result<IndependenceTest> {
    let cc = CrossCounts::from_sample(sample);
    let limits = InferenceLimits::default();
    limits.check(&cc)?;
    let est = gamma_star_cross(&cc, &SearchLimits::default())?;
    test_with_estimate(&cc, est.value, &limits, mvn)
}

pub(crate) fn test_with_estimate(
    cc: &CrossCounts,
    gamma_star: f64,
    limits: &InferenceLimits,
    mvn: &MvnConfig,
) -> Result<IndependenceTest> {
    let jc = joint_covariance_cross(cc, limits)?;
    let statistic = (cc.total() as f64).sqrt() * gamma_star;
    let upper = vec![statistic; jc.dimension];
    let r = mvn_cdf(&upper, &jc.sigma, mvn)?;
    Ok(IndependenceTest {
        statistic,
        p_value: (1.0 - r.probability).clamp(0.0, 1.0),
        mvn_error: r.error_estimate,
        mvn_points: r.points_used,
        dimension: jc.dimension,
    })
}

/// Global F test of the one-way model y = b₁ + Σ b_j 1{x = j} + u.
pub fn f_test_baseline(sample: &PairedSample) -> Result<f64> {
    let y = match sample.y() {
        Response::Real(v) => v,
        Response::Nominal(_) => return Err(Error::invalid("the F test needs a real-valued y")),
    };
    f_test_groups(sample.x().codes(), sample.k(), y)
}

pub(crate) fn f_test_groups(codes: &[u32], k: usize, y: &[f64]) -> Result<f64> {
    let n = y.len();
    if k < 2 {
        return Err(Error::degenerate("the F test needs at least two groups"));
    }
    if n <= k {
        return Err(Error::invalid(format!(
            "the F test needs more observations ({n}) than groups ({k})"
        )));
    }
    let mut sum = vec![0.0; k];
    let mut cnt = vec![0usize; k];
    for (&c, &v) in codes.iter().zip(y) {
        sum[c as usize] += v;
        cnt[c as usize] += 1;
    }
    let grand = sum.iter().sum::<f64>() / n as f64;
    let means: Vec<f64> = sum.iter().zip(&cnt).map(|(s, &c)| s / c as f64).collect();
    let ssb: f64 = means.iter().zip(&cnt).map(|(m, &c)| c as f64 * (m - grand).powi(2)).sum();
    let ssw: f64 = codes.iter().zip(y).map(|(&c, &v)| (v - means[c as usize]).powi(2)).sum();
    let (d1, d2) = ((k - 1) as u32, (n - k) as u32);
    let scale = y.iter().map(|v| (v - grand).powi(2)).sum::<f64>();
    if ssb <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
        return Ok(1.0);
    }
    if ssw <= 1e-14 * scale {
        return Ok(0.0);
    }
    f_sf((ssb / d1 as f64) / (ssw / d2 as f64), d1, d2)
}

/// Pearson's χ² test of independence on a nominal-nominal sample.
pub fn chi2_test_baseline(sample: &PairedSample) -> Result<f64> {
    if sample.y_nominal().is_none() {
        return Err(Error::invalid("the chi-square test needs a nominal y"));
    }
    chi2_test_cross(&CrossCounts::from_sample(sample))
}

pub fn chi2_test_table(table: &ContingencyTable) -> Result<f64> {
    chi2_test_cross(&CrossCounts::from_table(table)?)
}

pub(crate) fn chi2_test_cross(cc: &CrossCounts) -> Result<f64> {
    let (a, b) = (cc.rows(), cc.cols());
    if a < 2 || b < 2 {
        return Err(Error::degenerate(format!("the chi-square test needs a 2x2 table or larger, got {a}x{b}")));
    }
    let n = cc.total() as f64;
    let rs = cc.row_sums();
    let cs = cc.col_sums();
    let mut stat = 0.0;
    for i in 0..a {
        for j in 0..b {
            let e = rs[i] as f64 * cs[j] as f64 / n;
            if e <= 0.0 {
                return Err(Error::degenerate("an expected cell count is zero"));
            }
            stat += (cc.get(i, j) as f64 - e).powi(2) / e;
        }
    }
    chi2_sf(stat, ((a - 1) * (b - 1)) as u32)
}
