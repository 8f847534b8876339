//! Population γ* of the simulation families and the α ↔ γ* calibration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::dgp::{cell_probabilities, mlogit_probabilities, regression_means, standard_cauchy, Family};
use crate::distributions::normal_cdf;
use crate::error::{Error, Result};
use crate::gamma_star::{population_gamma_star, population_gamma_star_h, HMatrix};
use crate::table::{ContingencyTable, TableMode};

/// Grid size of the u-space quadrature used for the multinomial logit families.
const MLOGIT_GRID: usize = 20_000;

/// Population H matrix of a continuous family: `H[a][b] = P(X = a, X' = b, Y < Y')`.
pub fn population_h(family: Family, alpha: f64) -> Result<HMatrix<f64>> {
    let h = match family {
        Family::RegressionNormal | Family::RegressionCauchy => {
            let mu = regression_means(alpha);
            let cdf_diff = |d: f64| match family {
                // U − U' is N(0, 2)
                Family::RegressionNormal => normal_cdf(d / std::f64::consts::SQRT_2),
                // U − U' is Cauchy with scale 2
                _ => 0.5 + (d / 2.0).atan() / std::f64::consts::PI,
            };
            let mut h = vec![0.0; 9];
            for a in 0..3 {
                for b in 0..3 {
                    if a != b {
                        h[a * 3 + b] = cdf_diff(mu[b] - mu[a]) / 9.0;
                    }
                }
            }
            h
        }
        Family::MlogitNormal | Family::MlogitCauchy => mlogit_h(family, alpha),
        _ => return Err(Error::invalid(format!("{family} has no continuous coordinate"))),
    };
    HMatrix::new(3, h)
}

/// H[a][b] = ∫₀¹ p_b(q(u)) ∫₀ᵘ p_a(q(v)) dv du with q the regressor quantile function.
fn mlogit_h(family: Family, alpha: f64) -> Vec<f64> {
    let quantile = |u: f64| match family {
        Family::MlogitNormal => crate::distributions::normal_quantile(u).expect("u in (0,1)"),
        _ => (std::f64::consts::PI * (u - 0.5)).tan(),
    };
    let du = 1.0 / MLOGIT_GRID as f64;
    let mut below = [0.0f64; 3];
    let mut h = vec![0.0; 9];
    for i in 0..MLOGIT_GRID {
        let p = mlogit_probabilities(alpha, quantile((i as f64 + 0.5) * du));
        // midpoint cell: half of its own mass counts as below
        for a in 0..3 {
            let inner = below[a] + 0.5 * p[a] * du;
            for b in 0..3 {
                if a != b {
                    h[a * 3 + b] += p[b] * inner * du;
                }
            }
        }
        for a in 0..3 {
            below[a] += p[a] * du;
        }
    }
    h
}

/// γ* of the family at `alpha`.
pub fn true_gamma_star(family: Family, alpha: f64) -> Result<f64> {
    if family.is_table() {
        let p = cell_probabilities(family, alpha)?;
        let rows: Vec<Vec<f64>> = p.chunks(3).map(<[f64]>::to_vec).collect();
        let t = ContingencyTable::from_matrix(&rows, TableMode::Probabilities)?;
        Ok(population_gamma_star(&t)?.value)
    } else {
        Ok(population_gamma_star_h(&population_h(family, alpha)?)?.value)
    }
}

/// Population γ of a continuous family under one fixed order of the categories.
pub fn true_gamma_fixed(family: Family, alpha: f64, order: &[usize]) -> Result<f64> {
    let h = population_h(family, alpha)?;
    let t = h.total();
    Ok((2.0 * h.concordant(order) - t) / t)
}

/// Monte Carlo estimate of the population H matrix from `pairs` independent
/// pairs; a check on the closed forms and the quadrature.
pub fn population_h_monte_carlo(family: Family, alpha: f64, pairs: usize, seed: u64) -> Result<HMatrix<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = vec![0.0; 9];
    let heavy = matches!(family, Family::RegressionCauchy | Family::MlogitCauchy);
    let noise = |rng: &mut ChaCha8Rng| -> f64 {
        if heavy {
            standard_cauchy(rng)
        } else {
            rng.sample(StandardNormal)
        }
    };
    match family {
        Family::RegressionNormal | Family::RegressionCauchy => {
            // Condition on the categories; only the noise difference is random.
            let mu = regression_means(alpha);
            for _ in 0..pairs {
                let d = noise(&mut rng) - noise(&mut rng);
                for a in 0..3 {
                    for b in 0..3 {
                        if a != b && d < mu[b] - mu[a] {
                            h[a * 3 + b] += 1.0;
                        }
                    }
                }
            }
            h.iter_mut().for_each(|v| *v /= 9.0 * pairs as f64);
        }
        Family::MlogitNormal | Family::MlogitCauchy => {
            // Condition on the regressors; category probabilities enter exactly.
            for _ in 0..pairs {
                let (x1, x2) = (noise(&mut rng), noise(&mut rng));
                let (lo, hi) = if x1 < x2 { (x1, x2) } else { (x2, x1) };
                let (p, q) = (mlogit_probabilities(alpha, lo), mlogit_probabilities(alpha, hi));
                for a in 0..3 {
                    for b in 0..3 {
                        if a != b {
                            h[a * 3 + b] += p[a] * q[b];
                        }
                    }
                }
            }
            // each unordered pair realizes one of the two ordered pairs
            h.iter_mut().for_each(|v| *v /= 2.0 * pairs as f64);
        }
        _ => return Err(Error::invalid(format!("{family} has no continuous coordinate"))),
    }
    HMatrix::new(3, h)
}

/// Nonnegative α with `true_gamma_star(family, α) = target` (to 1e-3 or better).
pub fn calibrate_alpha(family: Family, target: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&target) || target.is_nan() {
        return Err(Error::invalid(format!("target γ* must lie in [0, 1], got {target}")));
    }
    if target == 0.0 {
        return Ok(0.0);
    }
    let f = |a: f64| true_gamma_star(family, a);
    let (_, max_alpha) = family.alpha_range();
    let mut hi = if max_alpha.is_finite() { max_alpha } else { 1.0 };
    if !max_alpha.is_finite() {
        while f(hi)? < target {
            hi *= 2.0;
            if hi > 1e4 {
                return Err(Error::invalid(format!("γ* = {target} is not attainable for {family}")));
            }
        }
    } else if f(hi)? < target - 1e-12 {
        return Err(Error::invalid(format!(
            "γ* = {target} is not attainable for {family}: the largest admissible alpha {hi:.6} gives {:.6}",
            f(hi)?
        )));
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let v = f(mid)?;
        if (v - target).abs() < 1e-9 || hi - lo < 1e-12 {
            return Ok(mid);
        }
        if v < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
