use statrs::function::beta::beta_reg;
use statrs::function::erf::erfc;
use statrs::function::gamma::gamma_ur;

use crate::error::{Error, Result};

const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / SQRT_2PI
}

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Inverse of [`normal_cdf`]: Acklam's rational approximation refined by one
/// Halley step, accurate to about 1e-15 relative.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!("normal quantile needs p in (0, 1), got {p}")));
    }
    Ok(quantile_unchecked(p))
}

pub(crate) fn quantile_unchecked(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e1,
        2.209460984245205e2,
        -2.759285104469687e2,
        1.383577518672690e2,
        -3.066479806614716e1,
        2.506628277459239,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e1,
        1.615858368580409e2,
        -1.556989798598866e2,
        6.680131188771972e1,
        -1.328068155288572e1,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-3,
        -3.223964580411365e-1,
        -2.400758277161838,
        -2.549732539343734,
        4.374664141464968,
        2.938163982698783,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-3,
        3.224671290700398e-1,
        2.445134137142996,
        3.754408661907416,
    ];
    const P_LOW: f64 = 0.02425;

    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let x = if p < P_LOW {
        tail((-2.0 * p.ln()).sqrt())
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    };
    // Halley refinement; the residual is taken on the smaller tail for accuracy.
    let e = if x <= 0.0 {
        normal_cdf(x) - p
    } else {
        (1.0 - p) - normal_cdf(-x)
    };
    let u = e * SQRT_2PI * (0.5 * x * x).exp();
    let refined = x - u / (1.0 + 0.5 * x * u);
    if refined.is_finite() {
        refined
    } else {
        x
    }
}

/// Upper tail of the χ² distribution with `df` degrees of freedom.
pub fn chi2_sf(x: f64, df: u32) -> Result<f64> {
    if df == 0 {
        return Err(Error::invalid("chi-square needs at least one degree of freedom"));
    }
    if x.is_nan() {
        return Err(Error::invalid("chi-square statistic is NaN"));
    }
    if x <= 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(gamma_ur(df as f64 / 2.0, x / 2.0))
}

/// Upper tail of the F distribution with (`d1`, `d2`) degrees of freedom.
pub fn f_sf(x: f64, d1: u32, d2: u32) -> Result<f64> {
    if d1 == 0 || d2 == 0 {
        return Err(Error::invalid("F distribution needs positive degrees of freedom"));
    }
    if x.is_nan() {
        return Err(Error::invalid("F statistic is NaN"));
    }
    if x <= 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    let (d1, d2) = (d1 as f64, d2 as f64);
    Ok(beta_reg(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn normal_examples() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert_abs_diff_eq!(normal_quantile(0.95).unwrap(), 1.6449, epsilon = 1e-4);
        assert_abs_diff_eq!(normal_quantile(0.5).unwrap(), 0.0, epsilon = 1e-15);
        assert!(normal_quantile(0.0).is_err());
        assert!(normal_quantile(1.0).is_err());
    }

    /// Bisection on the CDF: slow but independent of the rational approximation.
    fn quantile_by_bisection(p: f64) -> f64 {
        let (mut lo, mut hi) = (-40.0f64, 40.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if normal_cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn quantile_matches_inversion() {
        for &p in &[1e-300, 1e-12, 1e-5, 0.01, 0.02425, 0.1, 0.3, 0.7, 0.9, 0.975, 0.999999] {
            let q = normal_quantile(p).unwrap();
            assert!((q - quantile_by_bisection(p)).abs() < 1e-9 * q.abs().max(1.0), "p={p}");
        }
    }

    /// Simpson integration of the χ² density, independent of the incomplete gamma.
    fn chi2_sf_by_quadrature(x: f64, df: f64) -> f64 {
        let dens = |t: f64| {
            if t <= 0.0 {
                return 0.0;
            }
            let lg = statrs::function::gamma::ln_gamma(df / 2.0);
            ((df / 2.0 - 1.0) * t.ln() - t / 2.0 - (df / 2.0) * 2f64.ln() - lg).exp()
        };
        // substitute t = x + s^2 / (1 - s)^2 style tail: integrate on [x, x + 200]
        let (a, b, n) = (x, x + 200.0, 200_000);
        let h = (b - a) / n as f64;
        let mut s = dens(a) + dens(b);
        for i in 1..n {
            s += dens(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn chi2_examples() {
        assert_eq!(chi2_sf(0.0, 3).unwrap(), 1.0);
        assert_abs_diff_eq!(chi2_sf(3.841, 1).unwrap(), 0.05, epsilon = 5e-4);
        for &(x, df) in &[(2.0, 3u32), (7.5, 4), (12.0, 9)] {
            let a = chi2_sf(x, df).unwrap();
            assert!((a - chi2_sf_by_quadrature(x, df as f64)).abs() < 1e-8);
        }
        assert!(chi2_sf(1.0, 0).is_err());
    }

    #[test]
    fn f_examples() {
        for d in [1, 2, 5, 30, 400] {
            assert_abs_diff_eq!(f_sf(1.0, d, d).unwrap(), 0.5, epsilon = 1e-12);
        }
        assert_eq!(f_sf(0.0, 2, 7).unwrap(), 1.0);
        // F(1, d) is the square of a t(d); with d large it tends to χ²(1).
        assert_abs_diff_eq!(f_sf(3.841, 1, 1_000_000).unwrap(), 0.05, epsilon = 5e-4);
        assert!(f_sf(1.0, 0, 3).is_err());
    }

    proptest! {
        #[test]
        fn quantile_inverts_cdf(p in 1e-10f64..(1.0 - 1e-10)) {
            let q = normal_quantile(p).unwrap();
            prop_assert!((normal_cdf(q) - p).abs() < 1e-14f64.max(p * 1e-12));
        }
    }
}
