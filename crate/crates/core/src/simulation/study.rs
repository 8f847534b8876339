//! Monte Carlo studies of coverage, bias, size and power.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{SimulationConfig, StudyKind, StudySpec};
use super::dgp::{generate_cross, DgpSpec, Family};
use super::truth::{calibrate_alpha, true_gamma_star};
use crate::distributions::MvnConfig;
use crate::error::{Error, Result};
use crate::gamma_star::{gamma_star_cross, SearchLimits};
use crate::inference::{chi2_test_cross, f_test_groups, infer_cross, test_with_estimate, InferenceLimits, InferenceOptions};

/// Global knobs shared by every study of a run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RunSettings {
    pub seed: u64,
    pub replications: usize,
    pub mvn_target_error: f64,
    pub mvn_max_points: usize,
    pub histogram_bins: usize,
}

impl RunSettings {
    pub fn from_config(cfg: &SimulationConfig, seed_override: Option<u64>) -> Self {
        RunSettings {
            seed: seed_override.or(cfg.seed).unwrap_or(0),
            replications: cfg.replications,
            mvn_target_error: cfg.mvn_target_error,
            mvn_max_points: cfg.mvn_max_points,
            histogram_bins: cfg.histogram_bins,
        }
    }
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            seed: 0,
            replications: 1000,
            mvn_target_error: 1e-3,
            mvn_max_points: 1 << 14,
            histogram_bins: 10,
        }
    }
}

/// One (family, dependence, n) cell of a study grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StudyRow {
    pub family: Family,
    pub n: usize,
    pub alpha: f64,
    /// Calibration target, when the grid was given in γ*.
    pub target_gamma_star: Option<f64>,
    pub true_gamma_star: f64,
    pub replications: usize,
    /// Replications where γ̂* was undefined; excluded from bias and coverage and
    /// counted as non-rejections.
    pub degenerate: usize,
    pub mean_estimate: f64,
    pub mean_bias: f64,
    pub coverage: f64,
    /// γ*-test rejection rate (size and power studies).
    pub rejection_rate: Option<f64>,
    /// F-test (continuous families) or χ²-test (tables) rejection rate.
    pub baseline_rejection_rate: Option<f64>,
    /// Kolmogorov–Smirnov distance of the γ*-test p-values from uniform.
    pub ks_statistic: Option<f64>,
    pub ks_reject_1pct: Option<bool>,
    pub baseline_ks_statistic: Option<f64>,
    pub p_histogram: Option<Vec<u64>>,
    pub baseline_p_histogram: Option<Vec<u64>>,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StudyResult {
    pub name: String,
    pub kind: StudyKind,
    pub level: f64,
    pub significance: f64,
    pub settings: RunSettings,
    pub rows: Vec<StudyRow>,
}

/// Outcome of one replication.
#[derive(Clone, Copy, Debug, Default)]
struct Rep {
    estimate: Option<f64>,
    covered: Option<bool>,
    p_gamma: Option<f64>,
    p_base: Option<f64>,
}

/// SplitMix64 finalizer; derives independent seeds from structured inputs.
pub fn mix_seed(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generator of replication `rep` within a row: one ChaCha stream per replication.
pub fn replication_rng(row_seed: u64, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(row_seed);
    rng.set_stream(rep as u64);
    rng
}

/// Grid rows of a study: family-major, then dependence value, then n.
pub fn study_grid(spec: &StudySpec) -> Result<Vec<(DgpSpec, Option<f64>)>> {
    let mut out = Vec::new();
    for &family in &spec.families {
        let deps: Vec<(f64, Option<f64>)> = match (&spec.alpha, &spec.gamma_star) {
            (Some(a), _) => a.iter().map(|&a| (a, None)).collect(),
            (None, Some(g)) => g
                .iter()
                .map(|&g| calibrate_alpha(family, g).map(|a| (a, Some(g))))
                .collect::<Result<_>>()?,
            (None, None) => vec![(0.0, None)],
        };
        for &(alpha, target) in &deps {
            for &n in &spec.n {
                out.push((DgpSpec::new(family, alpha, n)?, target));
            }
        }
    }
    Ok(out)
}

/// Runs every study of a configuration.
pub fn run_simulation(cfg: &SimulationConfig, settings: &RunSettings) -> Result<Vec<StudyResult>> {
    cfg.studies
        .iter()
        .enumerate()
        .map(|(i, s)| run_study(s, i, settings))
        .collect()
}

/// Runs one study. Results depend only on (settings.seed, study_index, spec),
/// never on the number of threads.
pub fn run_study(spec: &StudySpec, study_index: usize, settings: &RunSettings) -> Result<StudyResult> {
    let grid = study_grid(spec)?;
    let reps = spec.replications.unwrap_or(settings.replications);
    let study_seed = mix_seed(settings.seed, study_index as u64);
    let mut rows = Vec::with_capacity(grid.len());
    for (r, (dgp, target)) in grid.into_iter().enumerate() {
        let row_seed = mix_seed(study_seed, r as u64);
        rows.push(run_row(spec, &dgp, target, reps, row_seed, settings)?);
    }
    Ok(StudyResult {
        name: spec.name.clone(),
        kind: spec.kind,
        level: spec.level,
        significance: spec.significance,
        settings: *settings,
        rows,
    })
}

fn run_row(
    spec: &StudySpec,
    dgp: &DgpSpec,
    target: Option<f64>,
    reps: usize,
    row_seed: u64,
    settings: &RunSettings,
) -> Result<StudyRow> {
    let truth = true_gamma_star(dgp.family, dgp.alpha)?;
    let outcomes: Vec<Rep> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replication_rng(row_seed, rep);
            replicate(spec, dgp, truth, &mut rng, settings)
        })
        .collect::<Result<_>>()?;

    let ok: Vec<&Rep> = outcomes.iter().filter(|r| r.estimate.is_some()).collect();
    let degenerate = reps - ok.len();
    let mean = |v: &mut dyn Iterator<Item = f64>| {
        let (s, c) = v.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
        if c == 0 {
            f64::NAN
        } else {
            s / c as f64
        }
    };
    let mean_estimate = mean(&mut ok.iter().filter_map(|r| r.estimate));
    let coverage = mean(&mut ok.iter().filter_map(|r| r.covered.map(|c| c as u8 as f64)));

    let tests = spec.kind.tests();
    let sig = spec.significance;
    let rate = |get: fn(&Rep) -> Option<f64>| -> f64 {
        outcomes.iter().filter(|r| get(r).is_some_and(|p| p <= sig)).count() as f64 / reps as f64
    };
    let pvals = |get: fn(&Rep) -> Option<f64>| -> Vec<f64> { outcomes.iter().filter_map(get).collect() };
    let pg = pvals(|r| r.p_gamma);
    let pb = pvals(|r| r.p_base);
    let ks_g = ks_uniform(&pg);
    Ok(StudyRow {
        family: dgp.family,
        n: dgp.n,
        alpha: dgp.alpha,
        target_gamma_star: target,
        true_gamma_star: truth,
        replications: reps,
        degenerate,
        mean_estimate,
        mean_bias: mean_estimate - truth,
        coverage,
        rejection_rate: tests.then(|| rate(|r| r.p_gamma)),
        baseline_rejection_rate: tests.then(|| rate(|r| r.p_base)),
        ks_statistic: tests.then_some(ks_g),
        ks_reject_1pct: tests.then(|| !pg.is_empty() && ks_g > ks_critical_1pct(pg.len())),
        baseline_ks_statistic: tests.then(|| ks_uniform(&pb)),
        p_histogram: tests.then(|| histogram(&pg, settings.histogram_bins)),
        baseline_p_histogram: tests.then(|| histogram(&pb, settings.histogram_bins)),
        seed: row_seed,
    })
}

fn replicate(spec: &StudySpec, dgp: &DgpSpec, truth: f64, rng: &mut ChaCha8Rng, settings: &RunSettings) -> Result<Rep> {
    let (cc, sample) = generate_cross(dgp, rng)?;
    let mvn_seed: u64 = rng.random();
    let mut rep = Rep::default();

    let est = match gamma_star_cross(&cc, &SearchLimits::default()) {
        Ok(e) => e.value,
        Err(Error::Degenerate(_)) => return Ok(rep),
        Err(e) => return Err(e),
    };
    rep.estimate = Some(est);

    let opts = InferenceOptions {
        level: Some(spec.level),
        test: false,
        ..InferenceOptions::default()
    };
    rep.covered = match infer_cross(&cc, &opts) {
        Ok(r) => r.ci.map(|ci| ci.lo <= truth && truth <= ci.hi),
        Err(Error::Degenerate(_)) => None,
        Err(e) => return Err(e),
    };

    if spec.kind.tests() {
        let mvn = MvnConfig {
            target_error: settings.mvn_target_error,
            max_points: settings.mvn_max_points,
            seed: mvn_seed,
            ..MvnConfig::default()
        };
        rep.p_gamma = match test_with_estimate(&cc, est, &InferenceLimits::default(), &mvn) {
            Ok(t) => Some(t.p_value),
            Err(Error::Degenerate(_)) => None,
            Err(e) => return Err(e),
        };
        let base = if dgp.family.is_table() {
            chi2_test_cross(&cc)
        } else {
            f_test_groups(sample.x().codes(), sample.k(), sample.y_real().expect("real response"))
        };
        rep.p_base = match base {
            Ok(p) => Some(p),
            Err(Error::Degenerate(_)) | Err(Error::InvalidInput(_)) => None,
            Err(e) => return Err(e),
        };
    }
    Ok(rep)
}

/// Kolmogorov–Smirnov distance between the empirical CDF of `p` and U(0, 1).
pub fn ks_uniform(p: &[f64]) -> f64 {
    if p.is_empty() {
        return f64::NAN;
    }
    let mut v = p.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| ((i + 1) as f64 / m - x).max(x - i as f64 / m))
        .fold(0.0, f64::max)
}

/// Asymptotic 1% critical value of the one-sample KS distance.
pub fn ks_critical_1pct(m: usize) -> f64 {
    1.628 / (m as f64).sqrt()
}

fn histogram(p: &[f64], bins: usize) -> Vec<u64> {
    let mut h = vec![0u64; bins];
    for &x in p {
        let b = ((x * bins as f64) as usize).min(bins - 1);
        h[b] += 1;
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: StudyKind, families: Vec<Family>, n: Vec<usize>, reps: usize) -> StudySpec {
        StudySpec {
            name: "t".into(),
            kind,
            families,
            n,
            alpha: Some(vec![0.0]),
            gamma_star: None,
            level: 0.9,
            significance: 0.1,
            replications: Some(reps),
        }
    }

    #[test]
    fn ks_and_histogram() {
        let p: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        assert!((ks_uniform(&p) - 0.005).abs() < 1e-12);
        assert_eq!(histogram(&p, 10), vec![10; 10]);
        assert_eq!(histogram(&[1.0, 0.0], 4), vec![1, 0, 0, 1]);
    }

    #[test]
    fn reproducible_and_thread_independent() {
        let s = spec(StudyKind::Size, vec![Family::TableUniformUniform, Family::RegressionCauchy], vec![40], 30);
        let settings = RunSettings::default();
        let a = run_study(&s, 0, &settings).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| run_study(&s, 0, &settings).unwrap());
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
        let c = run_study(&s, 1, &settings).unwrap();
        assert_ne!(a.rows[0].seed, c.rows[0].seed);
        for r in &a.rows {
            let rate = r.rejection_rate.unwrap();
            assert!((0.0..=1.0).contains(&rate));
            assert_eq!(r.p_histogram.as_ref().unwrap().iter().sum::<u64>() as usize + r.degenerate, 30);
        }
    }

    #[test]
    fn bias_is_positive_under_independence() {
        let s = spec(StudyKind::Bias, vec![Family::TableSkewUniform], vec![50], 100);
        let r = run_study(&s, 0, &RunSettings::default()).unwrap();
        assert!(r.rows[0].mean_bias > 0.0);
        assert!(r.rows[0].rejection_rate.is_none());
    }

    #[test]
    fn grid_calibrates_targets() {
        let mut s = spec(StudyKind::Power, vec![Family::RegressionNormal], vec![50, 100], 1);
        s.alpha = None;
        s.gamma_star = Some(vec![0.1, 0.3]);
        let g = study_grid(&s).unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(g[0].0.alpha, g[1].0.alpha);
        assert!(g[2].0.alpha > g[0].0.alpha);
        assert_eq!(g[3].1, Some(0.3));
    }
}
