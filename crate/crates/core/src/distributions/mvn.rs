//! Orthant-type probabilities P(Z ≤ b) for Z ~ N(0, Σ), with Σ possibly singular.
//!
//! The covariance is clipped to its PSD part, factored by a pivoted Cholesky
//! decomposition that orders variables by smallest expected conditional
//! probability first, and the rank-deficient remainder is turned into exact
//! linear constraints on the leading variables. The resulting
//! separation-of-variables integrand is averaged over randomly shifted
//! Richtmyer lattice rules; the spread across shifts gives the error estimate.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::univariate::{normal_cdf, normal_pdf, quantile_unchecked};
use crate::error::{Error, Result};

/// Largest dimension accepted by [`mvn_cdf`].
pub const MAX_MVN_DIMENSION: usize = 720;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MvnConfig {
    /// Stop once the 3-sigma error estimate is below this.
    pub target_error: f64,
    /// Lattice points per randomization, upper limit.
    pub max_points: usize,
    pub randomizations: usize,
    pub seed: u64,
}

impl Default for MvnConfig {
    fn default() -> Self {
        MvnConfig {
            target_error: 1e-4,
            max_points: 1 << 17,
            randomizations: 12,
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MvnCdfResult {
    pub probability: f64,
    /// Three standard errors across randomizations; zero for exact evaluations.
    pub error_estimate: f64,
    pub points_used: usize,
}

impl MvnCdfResult {
    fn exact(p: f64) -> Self {
        MvnCdfResult {
            probability: p.clamp(0.0, 1.0),
            error_estimate: 0.0,
            points_used: 0,
        }
    }
}

/// `cov` is row-major `m × m`.
pub fn mvn_cdf(upper: &[f64], cov: &[f64], config: &MvnConfig) -> Result<MvnCdfResult> {
    let m = upper.len();
    if m == 0 {
        return Err(Error::invalid("mvn_cdf needs at least one dimension"));
    }
    if cov.len() != m * m {
        return Err(Error::DimensionMismatch {
            expected: m * m,
            got: cov.len(),
        });
    }
    if m > MAX_MVN_DIMENSION {
        return Err(Error::budget(format!(
            "multivariate normal dimension {m} exceeds {MAX_MVN_DIMENSION}; use a cheaper \
             independence test such as chi-square or F"
        )));
    }
    if upper.iter().any(|b| b.is_nan()) || cov.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("mvn_cdf inputs must be finite (limits may be +inf)"));
    }
    let scale = cov.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    for i in 0..m {
        for j in 0..i {
            if (cov[i * m + j] - cov[j * m + i]).abs() > 1e-8 * scale {
                return Err(Error::invalid("covariance matrix is not symmetric"));
            }
        }
    }
    if upper.contains(&f64::NEG_INFINITY) {
        return Ok(MvnCdfResult::exact(0.0));
    }

    // Unbounded coordinates integrate out.
    let keep: Vec<usize> = (0..m).filter(|&i| upper[i].is_finite()).collect();
    if keep.is_empty() {
        return Ok(MvnCdfResult::exact(1.0));
    }
    let d = keep.len();
    let b: Vec<f64> = keep.iter().map(|&i| upper[i]).collect();
    let sigma = DMatrix::from_fn(d, d, |r, c| {
        0.5 * (cov[keep[r] * m + keep[c]] + cov[keep[c] * m + keep[r]])
    });

    let sigma = psd_part(sigma)?;
    let problem = match Problem::factor(&sigma, &b) {
        Some(p) => p,
        None => return Ok(MvnCdfResult::exact(0.0)),
    };
    Ok(problem.integrate(config))
}

/// Clips small or slightly negative eigenvalues; fails on clearly negative ones.
fn psd_part(sigma: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let trace = sigma.trace().max(f64::MIN_POSITIVE);
    let eig = SymmetricEigen::new(sigma);
    let min = eig.eigenvalues.min();
    if min < -1e-8 * trace {
        return Err(Error::invalid(format!(
            "covariance matrix has a negative eigenvalue {min:.3e}"
        )));
    }
    let cut = 1e-10 * trace;
    if min >= cut {
        return Ok(eig.recompose());
    }
    let clipped = eig.eigenvalues.map(|l| if l < cut { 0.0 } else { l });
    let v = &eig.eigenvectors;
    Ok(v * DMatrix::from_diagonal(&clipped) * v.transpose())
}

/// A bound `z_var ≤ (b - Σ_{t<var} coef_t z_t) / lead` (or `≥` when `lead < 0`).
struct Constraint {
    b: f64,
    coefs: Vec<f64>,
    lead: f64,
}

struct Problem {
    /// `vars[j]` holds the constraints whose last active variable is `j`.
    vars: Vec<Vec<Constraint>>,
}

impl Problem {
    /// Pivoted Cholesky; `None` when a constraint is infeasible for sure.
    fn factor(sigma: &DMatrix<f64>, b: &[f64]) -> Option<Problem> {
        let d = b.len();
        let tol = 1e-10 * sigma.trace().max(f64::MIN_POSITIVE);
        let mut perm: Vec<usize> = (0..d).collect();
        let mut l = DMatrix::<f64>::zeros(d, d);
        let mut cond_var: Vec<f64> = (0..d).map(|i| sigma[(i, i)]).collect();
        let mut shift = vec![0.0; d]; // Σ_t L_it y_t with y the truncated means
        let mut rank = 0;

        for j in 0..d {
            // Among remaining variables, pick the smallest expected conditional probability.
            let mut pick = None;
            let mut best = f64::INFINITY;
            for (p, &i) in perm.iter().enumerate().skip(j) {
                if cond_var[i] > tol {
                    let v = normal_cdf((b[i] - shift[i]) / cond_var[i].sqrt());
                    if v < best {
                        best = v;
                        pick = Some(p);
                    }
                }
            }
            let Some(p) = pick else { break };
            perm.swap(j, p);
            let piv = perm[j];
            let s = cond_var[piv].sqrt();
            l[(piv, j)] = s;
            for &i in &perm[j + 1..] {
                let mut v = sigma[(i, piv)];
                for t in 0..j {
                    v -= l[(i, t)] * l[(piv, t)];
                }
                l[(i, j)] = v / s;
                cond_var[i] -= l[(i, j)] * l[(i, j)];
            }
            let a = (b[piv] - shift[piv]) / s;
            let y = truncated_mean(a);
            for &i in &perm[j + 1..] {
                shift[i] += l[(i, j)] * y;
            }
            rank = j + 1;
        }

        let mut vars: Vec<Vec<Constraint>> = (0..rank).map(|_| Vec::new()).collect();
        for (pos, &i) in perm.iter().enumerate() {
            let row_sd = sigma[(i, i)].sqrt();
            let coefs: Vec<f64> = (0..rank).map(|t| l[(i, t)]).collect();
            let last = if pos < rank {
                Some(pos)
            } else {
                (0..rank).rev().find(|&t| coefs[t].abs() > 1e-7 * row_sd.max(f64::MIN_POSITIVE))
            };
            match last {
                Some(t) => vars[t].push(Constraint {
                    b: b[i],
                    lead: coefs[t],
                    coefs: coefs[..t].to_vec(),
                }),
                // A constant zero coordinate: either always or never below its limit.
                None if b[i] < 0.0 => return None,
                None => {}
            }
        }
        Some(Problem { vars })
    }

    /// Integrand at a point of the unit cube of dimension `rank - 1`.
    fn eval(&self, w: &[f64], z: &mut [f64]) -> f64 {
        let r = self.vars.len();
        let mut f = 1.0;
        for j in 0..r {
            let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
            for c in &self.vars[j] {
                let acc: f64 = c.coefs.iter().zip(&z[..j]).map(|(a, b)| a * b).sum();
                let bound = (c.b - acc) / c.lead;
                if c.lead > 0.0 {
                    hi = hi.min(bound);
                } else {
                    lo = lo.max(bound);
                }
            }
            if lo >= hi {
                return 0.0;
            }
            let (dl, eh) = (normal_cdf(lo), normal_cdf(hi));
            let width = eh - dl;
            if width <= 0.0 {
                return 0.0;
            }
            f *= width;
            if j + 1 < r {
                let u = (dl + w[j] * width).clamp(1e-300, 1.0 - 1e-16);
                z[j] = quantile_unchecked(u);
            }
        }
        f
    }

    fn integrate(&self, config: &MvnConfig) -> MvnCdfResult {
        let r = self.vars.len();
        let mut z = vec![0.0; r];
        if r <= 1 {
            return MvnCdfResult::exact(self.eval(&[], &mut z));
        }
        let dim = r - 1;
        let gen: Vec<f64> = first_primes(dim).iter().map(|&p| (p as f64).sqrt().fract()).collect();
        let nrand = config.randomizations.max(2);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let shifts: Vec<Vec<f64>> = (0..nrand)
            .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
            .collect();

        let mut sums = vec![0.0; nrand];
        let mut done = 0usize;
        let mut n = 256usize.min(config.max_points.max(1));
        let mut w = vec![0.0; dim];
        loop {
            // Points done..n of each shifted rule.
            for (s, shift) in shifts.iter().enumerate() {
                for i in done..n {
                    let i1 = (i + 1) as f64;
                    for t in 0..dim {
                        let x = (i1 * gen[t] + shift[t]).fract();
                        w[t] = 1.0 - (2.0 * x - 1.0).abs();
                    }
                    sums[s] += self.eval(&w, &mut z);
                }
            }
            done = n;
            let means: Vec<f64> = sums.iter().map(|s| s / n as f64).collect();
            let mean = means.iter().sum::<f64>() / nrand as f64;
            let var = means.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nrand - 1) as f64;
            let err = 3.0 * (var / nrand as f64).sqrt();
            if err <= config.target_error || n >= config.max_points {
                return MvnCdfResult {
                    probability: mean.clamp(0.0, 1.0),
                    error_estimate: err,
                    points_used: n * nrand,
                };
            }
            n = (2 * n).min(config.max_points);
        }
    }
}

/// E[Z | Z ≤ a] for a standard normal Z.
fn truncated_mean(a: f64) -> f64 {
    let p = normal_cdf(a);
    if p > 1e-300 {
        -normal_pdf(a) / p
    } else {
        a
    }
}

fn first_primes(n: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(n);
    let mut c = 2u64;
    while primes.len() < n {
        if primes.iter().take_while(|&&p| p * p <= c).all(|&p| !c.is_multiple_of(p)) {
            primes.push(c);
        }
        c += 1;
    }
    primes
}
