//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use nomcor::classical::classical_report;
use nomcor::concordance::{count_pairs_cross, gamma_components};
use nomcor::crosstab::CrossCounts;
use nomcor::distributions::{mvn_cdf, normal_cdf, MvnConfig};
use nomcor::gamma_star::{gamma_star_cross, gamma_star_estimate, population_gamma_star, SearchLimits};
use nomcor::inference::{independence_test, sigma2_gamma_hat};
use nomcor::simulation::{
    generate, run_study, true_gamma_fixed, DgpSpec, Family, RunSettings, StudyKind, StudyResult, StudySpec,
};
use nomcor::{ContingencyTable, Numbering, PairedSample, TableMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = (bool, String);

// ---------------------------------------------------------------------------
// independent oracles

/// All permutations of 0..n by recursive insertion.
fn perms(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in perms(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Concordant and discordant pair counts by the quadratic definition.
fn pair_counts(x: &[f64], y: &[f64]) -> (u64, u64) {
    let (mut c, mut d) = (0, 0);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let s = (x[i] - x[j]) * (y[i] - y[j]);
            if s > 0.0 {
                c += 1;
            } else if s < 0.0 {
                d += 1;
            }
        }
    }
    (c, d)
}

/// Maximal concordant count over every rank assignment; also the untied total.
fn brute_force(xcodes: &[u32], k: usize, y: &[f64], ycodes: Option<(&[u32], usize)>) -> (u64, u64) {
    let mut best = (0, 0);
    let y_perms = match ycodes {
        Some((_, l)) => perms(l),
        None => vec![vec![]],
    };
    for px in perms(k) {
        let xr: Vec<f64> = xcodes.iter().map(|&c| px[c as usize] as f64).collect();
        for py in &y_perms {
            let yr: Vec<f64> = match ycodes {
                Some((codes, _)) => codes.iter().map(|&c| py[c as usize] as f64).collect(),
                None => y.to_vec(),
            };
            let (c, d) = pair_counts(&xr, &yr);
            if c > best.0 || best == (0, 0) {
                best = (c, c + d);
            }
        }
    }
    best
}

/// Bivariate standard normal CDF with correlation `rho` by Simpson quadrature.
fn bvn_oracle(a: f64, b: f64, rho: f64) -> f64 {
    let lo = -9.0f64;
    let m = 20_000;
    let h = (a - lo) / m as f64;
    let s = (1.0 - rho * rho).sqrt();
    let f = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt() * normal_cdf((b - rho * t) / s);
    let mut acc = f(lo) + f(a);
    for i in 1..m {
        acc += f(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

fn random_probs(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 0.01).collect();
    let s: f64 = v.iter().sum();
    v.into_iter().map(|p| p / s).collect()
}

fn labels(codes: &[u32], prefix: &str) -> Vec<String> {
    codes.iter().map(|c| format!("{prefix}{c}")).collect()
}

// ---------------------------------------------------------------------------
// criteria

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut mismatches = 0;
    let mut checked = 0;
    for case in 0..600 {
        let nominal = case >= 300;
        let n = rng.random_range(2..=60);
        let k = rng.random_range(2..=if nominal { 4 } else { 6 });
        let l = rng.random_range(2..=4);
        let xc: Vec<u32> = (0..n).map(|_| rng.random_range(0..k as u32)).collect();
        let sample = if nominal {
            let yc: Vec<u32> = (0..n).map(|_| rng.random_range(0..l as u32)).collect();
            PairedSample::nominal_nominal(&labels(&xc, "x"), &labels(&yc, "y")).unwrap()
        } else {
            let y: Vec<f64> = (0..n).map(|_| rng.random_range(0..8) as f64).collect();
            PairedSample::nominal_real(&labels(&xc, "x"), &y).unwrap()
        };
        let x = sample.x();
        let (best, untied) = match sample.y_nominal() {
            Some(yc) => brute_force(x.codes(), sample.k(), &[], Some((yc.codes(), yc.categories()))),
            None => brute_force(x.codes(), sample.k(), sample.y_real().unwrap(), None),
        };
        let est = gamma_star_estimate(&sample);
        let ok = match est {
            Ok(r) => untied > 0 && r.concordant == best && r.untied == untied,
            Err(_) => untied == 0,
        };
        checked += 1;
        if !ok {
            mismatches += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    (
        mismatches == 0 && secs < 60.0,
        format!("{checked} samples (300 nominal-real, 300 nominal-nominal), {mismatches} mismatches, {secs:.1}s"),
    )
}

fn table_1a() -> ContingencyTable {
    let c = [
        vec![56_071_000.0, 127_000.0, 5_351_000.0],
        vec![36_782_000.0, 3_100.0, 39_200.0],
        vec![3_684_000.0, 3_700.0, 13_400.0],
    ];
    ContingencyTable::from_matrix(&c, TableMode::Counts).unwrap()
}

fn classical_reproduction() -> Outcome {
    let r = classical_report(&table_1a()).unwrap();
    let round = |v: f64| (v * 100.0).round() / 100.0;
    let got = [round(r.cramers_v), round(r.pearson_c), round(r.gk_tau_sym), round(r.uncertainty)];
    (
        got == [0.13, 0.19, 0.03, 0.05],
        format!("V={:.2} C={:.2} tau={:.2} U={:.2}", got[0], got[1], got[2], got[3]),
    )
}

fn perfect_dependence() -> Outcome {
    let a = ContingencyTable::from_matrix(
        &[vec![0.4, 0.2, 0.1], vec![0.2, 0.0, 0.0], vec![0.1, 0.0, 0.0]],
        TableMode::Probabilities,
    )
    .unwrap();
    let b = ContingencyTable::from_matrix(
        &[vec![0.7, 0.0, 0.0], vec![0.0, 0.2, 0.0], vec![0.0, 0.0, 0.1]],
        TableMode::Probabilities,
    )
    .unwrap();
    let ga = population_gamma_star(&a).unwrap().value;
    let gb = population_gamma_star(&b).unwrap().value;
    let (ca, cb) = (classical_report(&a).unwrap(), classical_report(&b).unwrap());
    let differ = (ca.cramers_v - cb.cramers_v).abs() > 1e-3 && (ca.uncertainty - cb.uncertainty).abs() > 1e-3;
    (
        (ga - 1.0).abs() <= 1e-12 && (gb - 1.0).abs() <= 1e-12 && differ && ca.cramers_v < cb.cramers_v,
        format!(
            "gamma* = {ga} / {gb}; V = {:.3} / {:.3}; U = {:.3} / {:.3}",
            ca.cramers_v, cb.cramers_v, ca.uncertainty, cb.uncertainty
        ),
    )
}

fn properness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut failures = Vec::new();

    // B: range, E: monotone invariance, F: symmetry
    for _ in 0..200 {
        let n = rng.random_range(5..=80);
        let k = rng.random_range(2..=5);
        let xc: Vec<u32> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0f64).round()).collect();
        let s = PairedSample::nominal_real(&labels(&xc, "x"), &y).unwrap();
        if let Ok(r) = gamma_star_estimate(&s) {
            if !(0.0..=1.0).contains(&r.value) {
                failures.push(format!("range {}", r.value));
            }
            let t = gamma_star_estimate(&s.map_y(|v| (0.7 * v).exp() - 4.0).unwrap()).unwrap();
            if t.concordant != r.concordant || t.untied != r.untied {
                failures.push("monotone invariance".into());
            }
        }
        let l = rng.random_range(2..=4);
        let yc: Vec<u32> = (0..n).map(|_| rng.random_range(0..l)).collect();
        let s = PairedSample::nominal_nominal(&labels(&xc, "x"), &labels(&yc, "y")).unwrap();
        if let (Ok(a), Ok(b)) = (gamma_star_estimate(&s), gamma_star_estimate(&s.swapped().unwrap())) {
            if a.concordant != b.concordant || a.untied != b.untied || !(0.0..=1.0).contains(&a.value) {
                failures.push("symmetry".into());
            }
        }
    }

    // D: attainability on comonotonic couplings of random marginals
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (k, l) = (rng.random_range(2..=6), rng.random_range(2..=6));
        let t = ContingencyTable::comonotonic(&random_probs(&mut rng, k), &random_probs(&mut rng, l)).unwrap();
        worst = worst.max((population_gamma_star(&t).unwrap().value - 1.0).abs());
    }
    if worst > 1e-12 {
        failures.push(format!("attainability off by {worst:e}"));
    }

    // C: independence
    let mut worst_c: f64 = 0.0;
    for _ in 0..50 {
        let (px, py) = (random_probs(&mut rng, 4), random_probs(&mut rng, 3));
        let rows: Vec<Vec<f64>> = px.iter().map(|a| py.iter().map(|b| a * b).collect()).collect();
        let t = ContingencyTable::from_matrix(&rows, TableMode::Probabilities).unwrap();
        worst_c = worst_c.max(population_gamma_star(&t).unwrap().value.abs());
    }
    if worst_c > 1e-12 {
        failures.push(format!("independence gives {worst_c:e}"));
    }

    (
        failures.is_empty(),
        format!(
            "range/monotone/symmetry on 200 samples, attainability |1-g| <= {worst:.1e}, independence |g| <= {worst_c:.1e}{}",
            if failures.is_empty() { String::new() } else { format!("; failures: {failures:?}") }
        ),
    )
}

fn variance_calibration() -> Outcome {
    let (alpha, n, reps) = (0.6, 800, 2000);
    // category means 0, α, −α: C < A < B
    let order = vec![2, 0, 1];
    let truth = true_gamma_fixed(Family::RegressionNormal, alpha, &order).unwrap();
    let nb = Numbering::new(order.clone(), None).unwrap();
    let spec = DgpSpec::new(Family::RegressionNormal, alpha, n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut sum, mut sum2, mut sig2) = (0.0, 0.0, 0.0);
    for _ in 0..reps {
        let s = generate(&spec, &mut rng).unwrap();
        let cc = CrossCounts::from_sample(&s);
        let g = gamma_components(&count_pairs_cross(&cc, &order, None)).unwrap().gamma_hat;
        let z = (n as f64).sqrt() * (g - truth);
        sum += z;
        sum2 += z * z;
        sig2 += sigma2_gamma_hat(&s, &nb).unwrap();
    }
    let r = reps as f64;
    let var = (sum2 - sum * sum / r) / (r - 1.0);
    let mean_sig2 = sig2 / r;
    let rel = (var / mean_sig2 - 1.0).abs();
    (
        rel < 0.10,
        format!("empirical var {var:.4}, mean sigma^2 {mean_sig2:.4}, relative error {:.1}%", 100.0 * rel),
    )
}

fn study(kind: StudyKind, families: Vec<Family>, n: Vec<usize>, alpha: Option<f64>, gamma: Option<f64>) -> StudyResult {
    let spec = StudySpec {
        name: kind.name().into(),
        kind,
        families,
        n,
        alpha: alpha.map(|a| vec![a]),
        gamma_star: gamma.map(|g| vec![g]),
        level: 0.9,
        significance: 0.10,
        replications: Some(1000),
    };
    let settings = RunSettings {
        seed: 20240501,
        ..RunSettings::default()
    };
    run_study(&spec, 0, &settings).unwrap()
}

fn coverage() -> Outcome {
    let r = study(
        StudyKind::Coverage,
        vec![Family::RegressionNormal, Family::MlogitNormal],
        vec![800],
        None,
        Some(0.4),
    );
    let ok = r.rows.iter().all(|row| (0.86..=0.94).contains(&row.coverage));
    let detail: Vec<String> = r.rows.iter().map(|row| format!("{} {:.3}", row.family.short(), row.coverage)).collect();
    (ok, format!("gamma*=0.4, n=800: coverage {}", detail.join(", ")))
}

fn size() -> Outcome {
    let r = study(StudyKind::Size, Family::ALL.to_vec(), vec![800], Some(0.0), None);
    let ok = r.rows.iter().all(|row| {
        (0.07..=0.13).contains(&row.rejection_rate.unwrap()) && row.ks_reject_1pct == Some(false)
    });
    let detail: Vec<String> = r
        .rows
        .iter()
        .map(|row| format!("{} {:.3} (KS {:.3})", row.family.short(), row.rejection_rate.unwrap(), row.ks_statistic.unwrap()))
        .collect();
    (ok, detail.join(", "))
}

fn power() -> Outcome {
    let r = study(StudyKind::Power, Family::ALL.to_vec(), vec![800], None, Some(0.1));
    let reference = |f: Family| match f {
        Family::RegressionNormal => (0.831, 0.860),
        Family::RegressionCauchy => (0.857, 0.053),
        Family::MlogitNormal => (0.859, 0.878),
        Family::MlogitCauchy => (0.859, 0.832),
        Family::TableSkewUniform => (0.43, 0.395),
        Family::TableUniformUniform => (0.718, 0.729),
    };
    let mut ok = true;
    let mut detail = Vec::new();
    for row in &r.rows {
        let (pg, pb) = reference(row.family);
        let (g, b) = (row.rejection_rate.unwrap(), row.baseline_rejection_rate.unwrap());
        let row_ok = (g - pg).abs() <= 0.04 && (b - pb).abs() <= 0.04;
        ok &= row_ok;
        detail.push(format!(
            "{} {:.3}/{:.3} (ref {pg}/{pb}){}",
            row.family.short(),
            g,
            b,
            if row_ok { "" } else { " !" }
        ));
    }
    (ok, format!("gamma*-test/baseline: {}", detail.join(", ")))
}

fn bias() -> Outcome {
    let r = study(StudyKind::Bias, Family::ALL.to_vec(), vec![50, 800], Some(0.0), None);
    let mut ok = true;
    let mut detail = Vec::new();
    for pair in r.rows.chunks(2) {
        let (small, large) = (&pair[0], &pair[1]);
        ok &= small.mean_bias > 0.0 && large.mean_bias > 0.0 && large.mean_bias < small.mean_bias;
        detail.push(format!("{} {:.3}->{:.3}", small.family.short(), small.mean_bias, large.mean_bias));
    }
    (ok, format!("mean bias n=50 -> n=800: {}", detail.join(", ")))
}

fn mvn_accuracy() -> Outcome {
    let cfg = MvnConfig::default();
    let p1 = mvn_cdf(&[0.0], &[1.0], &cfg).unwrap().probability;
    let p2 = mvn_cdf(&[0.0, 0.0], &[1.0, 0.0, 0.0, 1.0], &cfg).unwrap().probability;
    let eq = [1.0, 0.5, 0.5, 0.5, 1.0, 0.5, 0.5, 0.5, 1.0];
    let p3 = mvn_cdf(&[0.0; 3], &eq, &cfg).unwrap().probability;
    // third coordinate duplicates the first
    let rho = 0.3;
    let dup = [1.0, rho, 1.0, rho, 1.0, rho, 1.0, rho, 1.0];
    let (a, b) = (0.4, -0.2);
    let r = mvn_cdf(&[a, b, a], &dup, &cfg).unwrap();
    let reduced = bvn_oracle(a, b, rho);
    let analytic_ok = (p1 - 0.5).abs() <= 1e-3 && (p2 - 0.25).abs() <= 1e-3 && (p3 - 0.25).abs() <= 1e-3;
    let dup_ok = (r.probability - reduced).abs() <= r.error_estimate + 1e-9;
    (
        analytic_ok && dup_ok,
        format!(
            "Phi(0)={p1:.6}, orthant2={p2:.6}, orthant3={p3:.6}; singular {:.8} vs reduced {reduced:.8} (error estimate {:.1e})",
            r.probability, r.error_estimate
        ),
    )
}

fn performance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);

    let n = 10_000;
    let xc: Vec<u32> = (0..n).map(|_| rng.random_range(0..20)).collect();
    let y: Vec<f64> = xc.iter().map(|&c| (c % 7) as f64 * 0.1 + rng.random::<f64>()).collect();
    let s = PairedSample::nominal_real(&labels(&xc, "x"), &y).unwrap();
    let t = Instant::now();
    let r1 = gamma_star_estimate(&s).unwrap();
    let t1 = t.elapsed().as_secs_f64();

    let xc: Vec<u32> = (0..5000).map(|_| rng.random_range(0..7)).collect();
    let yc: Vec<u32> = xc.iter().map(|&c| if rng.random::<f64>() < 0.3 { c } else { rng.random_range(0..7) }).collect();
    let s = PairedSample::nominal_nominal(&labels(&xc, "x"), &labels(&yc, "y")).unwrap();
    let t = Instant::now();
    let cc = CrossCounts::from_sample(&s);
    let r2 = gamma_star_cross(&cc, &SearchLimits::default()).unwrap();
    let t2 = t.elapsed().as_secs_f64();

    let xc: Vec<u32> = (0..800).map(|_| rng.random_range(0..3)).collect();
    let yc: Vec<u32> = (0..800).map(|_| rng.random_range(0..3)).collect();
    let s = PairedSample::nominal_nominal(&labels(&xc, "x"), &labels(&yc, "y")).unwrap();
    let t = Instant::now();
    let test = independence_test(&s, &MvnConfig::default()).unwrap();
    let t3 = t.elapsed().as_secs_f64();

    (
        t1 < 10.0 && t2 < 60.0 && t3 < 10.0 && test.dimension == 36,
        format!(
            "k=20,n=1e4: {t1:.2}s (g*={:.3}); k=l=7: {t2:.2}s (g*={:.3}); test k=l=3 (dim {}): {t3:.2}s",
            r1.value, r2.value, test.dimension
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("oracle equivalence of the estimator", oracle_equivalence),
        ("classical measures on the minority table", classical_reproduction),
        ("perfect-dependence fixtures", perfect_dependence),
        ("properness properties", properness),
        ("variance estimator calibration", variance_calibration),
        ("interval coverage", coverage),
        ("test size", size),
        ("test power", power),
        ("bias pattern", bias),
        ("MVN CDF accuracy", mvn_accuracy),
        ("performance", performance),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = match catch_unwind(AssertUnwindSafe(f)) {
            Ok(r) => r,
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, format!("panicked: {msg}"))
            }
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {detail} [{:.1}s]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
