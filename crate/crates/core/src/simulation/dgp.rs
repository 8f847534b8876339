//! Data generating processes for the simulation studies.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::crosstab::CrossCounts;
use crate::error::{Error, Result};
use crate::sample::{CodedColumn, PairedSample, Response};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Family {
    /// X uniform on {A, B, C}; Y = α1{X=B} − α1{X=C} + U with U standard normal.
    RegressionNormal,
    /// As above with U standard Cauchy.
    RegressionCauchy,
    /// X standard normal; nominal Y from a three-category multinomial logit.
    MlogitNormal,
    /// As above with X standard Cauchy.
    MlogitCauchy,
    /// 3×3 table with uniform rows and a skewed column marginal.
    TableSkewUniform,
    /// 3×3 table with uniform marginals.
    TableUniformUniform,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::RegressionNormal,
        Family::RegressionCauchy,
        Family::MlogitNormal,
        Family::MlogitCauchy,
        Family::TableSkewUniform,
        Family::TableUniformUniform,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::RegressionNormal => "regression-normal",
            Family::RegressionCauchy => "regression-cauchy",
            Family::MlogitNormal => "mlogit-normal",
            Family::MlogitCauchy => "mlogit-cauchy",
            Family::TableSkewUniform => "table-skew-uniform",
            Family::TableUniformUniform => "table-uniform-uniform",
        }
    }

    pub fn short(self) -> &'static str {
        match self {
            Family::RegressionNormal => "RN",
            Family::RegressionCauchy => "RC",
            Family::MlogitNormal => "MLN",
            Family::MlogitCauchy => "MLC",
            Family::TableSkewUniform => "SU",
            Family::TableUniformUniform => "UU",
        }
    }

    /// Both variables nominal.
    pub fn is_table(self) -> bool {
        matches!(self, Family::TableSkewUniform | Family::TableUniformUniform)
    }

    pub(crate) fn heavy_tailed(self) -> bool {
        matches!(self, Family::RegressionCauchy | Family::MlogitCauchy)
    }

    /// Closed interval of admissible α.
    pub fn alpha_range(self) -> (f64, f64) {
        match self {
            // 4/100 + 2α/30 ≥ 0 and 4/100 − α/30 ≥ 0
            Family::TableSkewUniform => (-0.6, 1.2),
            // 1/9 + 2α/30 ≥ 0 and 1/9 − 4α/30 ≥ 0
            Family::TableUniformUniform => (-5.0 / 3.0, 5.0 / 6.0),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s) || f.short().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown DGP family '{s}'")))
    }
}

impl TryFrom<String> for Family {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Family> for String {
    fn from(f: Family) -> String {
        f.name().to_string()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DgpSpec {
    pub family: Family,
    pub alpha: f64,
    pub n: usize,
}

impl DgpSpec {
    pub fn new(family: Family, alpha: f64, n: usize) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::invalid("alpha must be finite"));
        }
        let (lo, hi) = family.alpha_range();
        if alpha < lo - 1e-12 || alpha > hi + 1e-12 {
            return Err(Error::invalid(format!(
                "alpha = {alpha} is outside [{lo:.6}, {hi:.6}] for {family}"
            )));
        }
        if n < 2 {
            return Err(Error::invalid("sample size must be at least 2"));
        }
        Ok(DgpSpec { family, alpha: alpha.clamp(lo, hi), n })
    }
}

/// Row-major 3×3 cell probabilities of a table family.
pub fn cell_probabilities(family: Family, alpha: f64) -> Result<[f64; 9]> {
    let base = match family {
        Family::TableSkewUniform => [76.0 / 300.0, 4.0 / 100.0],
        Family::TableUniformUniform => [1.0 / 9.0, 1.0 / 9.0],
        _ => return Err(Error::invalid(format!("{family} is not a table family"))),
    };
    let (lo, hi) = family.alpha_range();
    if alpha < lo - 1e-12 || alpha > hi + 1e-12 {
        return Err(Error::invalid(format!("alpha = {alpha} is outside [{lo:.6}, {hi:.6}] for {family}")));
    }
    let a = alpha / 30.0;
    let top = [base[0] + 2.0 * a, base[1] - a, base[1] - a];
    let bottom = [base[0] - 4.0 * a, base[1] + 2.0 * a, base[1] + 2.0 * a];
    let mut p = [0.0; 9];
    p[..3].copy_from_slice(&top);
    p[3..6].copy_from_slice(&top);
    p[6..].copy_from_slice(&bottom);
    for v in &mut p {
        *v = v.max(0.0);
    }
    Ok(p)
}

/// Category probabilities (A, B, C) of the multinomial logit at `x`.
pub fn mlogit_probabilities(alpha: f64, x: f64) -> [f64; 3] {
    // softmax of (−αx, αx, 0), shifted by the maximum for stability
    let s = [-alpha * x, alpha * x, 0.0];
    let m = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e = s.map(|v| (v - m).exp());
    let z: f64 = e.iter().sum();
    e.map(|v| v / z)
}

/// Category means of the regression family: A → 0, B → α, C → −α.
pub(crate) fn regression_means(alpha: f64) -> [f64; 3] {
    [0.0, alpha, -alpha]
}

pub(crate) fn standard_cauchy<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        let v = (std::f64::consts::PI * (u - 0.5)).tan();
        if v.is_finite() {
            return v;
        }
    }
}

fn noise<R: Rng + ?Sized>(rng: &mut R, heavy: bool) -> f64 {
    if heavy {
        standard_cauchy(rng)
    } else {
        rng.sample(StandardNormal)
    }
}

const ABC: [&str; 3] = ["A", "B", "C"];

/// Raw draws: nominal codes in 0..3 and either nominal codes or real values.
pub(crate) enum Draw {
    Nominal(Vec<u32>, Vec<u32>),
    Real(Vec<u32>, Vec<f64>),
}

pub(crate) fn draw<R: Rng + ?Sized>(spec: &DgpSpec, rng: &mut R) -> Draw {
    let n = spec.n;
    let a = spec.alpha;
    match spec.family {
        Family::RegressionNormal | Family::RegressionCauchy => {
            let mu = regression_means(a);
            let heavy = spec.family.heavy_tailed();
            let mut x = Vec::with_capacity(n);
            let mut y = Vec::with_capacity(n);
            for _ in 0..n {
                let c = rng.random_range(0..3u32);
                x.push(c);
                y.push(mu[c as usize] + noise(rng, heavy));
            }
            Draw::Real(x, y)
        }
        Family::MlogitNormal | Family::MlogitCauchy => {
            // The nominal response sits in the x slot, the continuous regressor in y.
            let heavy = spec.family.heavy_tailed();
            let mut cat = Vec::with_capacity(n);
            let mut reg = Vec::with_capacity(n);
            for _ in 0..n {
                let x = noise(rng, heavy);
                let p = mlogit_probabilities(a, x);
                let u: f64 = rng.random();
                let c = if u < p[0] {
                    0
                } else if u < p[0] + p[1] {
                    1
                } else {
                    2
                };
                cat.push(c);
                reg.push(x);
            }
            Draw::Real(cat, reg)
        }
        Family::TableSkewUniform | Family::TableUniformUniform => {
            let p = cell_probabilities(spec.family, a).expect("validated spec");
            let mut cum = [0.0; 9];
            let mut acc = 0.0;
            for (c, v) in cum.iter_mut().zip(p) {
                acc += v;
                *c = acc;
            }
            let mut x = Vec::with_capacity(n);
            let mut y = Vec::with_capacity(n);
            for _ in 0..n {
                let u: f64 = rng.random::<f64>() * acc;
                let cell = cum.iter().position(|&c| u < c).unwrap_or(8) as u32;
                x.push(cell / 3);
                y.push(cell % 3);
            }
            Draw::Nominal(x, y)
        }
    }
}

impl Draw {
    pub(crate) fn into_sample(self) -> Result<PairedSample> {
        let ys = ["a", "b", "c"];
        match self {
            Draw::Nominal(x, y) => PairedSample::from_columns(
                CodedColumn::from_codes(&ABC, &x)?,
                Response::Nominal(CodedColumn::from_codes(&ys, &y)?),
            ),
            Draw::Real(x, y) => PairedSample::from_columns(CodedColumn::from_codes(&ABC, &x)?, Response::Real(y)),
        }
    }
}

/// One i.i.d. sample of size `spec.n`.
pub fn generate<R: Rng + ?Sized>(spec: &DgpSpec, rng: &mut R) -> Result<PairedSample> {
    draw(spec, rng).into_sample()
}

/// Cross-tabulation of one sample together with the data needed by the baselines.
pub(crate) fn generate_cross<R: Rng + ?Sized>(spec: &DgpSpec, rng: &mut R) -> Result<(CrossCounts, PairedSample)> {
    let s = generate(spec, rng)?;
    Ok((CrossCounts::from_sample(&s), s))
}
