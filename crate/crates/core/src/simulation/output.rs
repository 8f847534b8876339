//! Tab-separated study tables.

use std::io::Write;

use super::study::{StudyResult, StudyRow};
use crate::error::Result;

/// Formats `x` with six significant digits; NaN becomes `NA`.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "NA".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "Inf".into() } else { "-Inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&mag) {
        return format!("{x:.5e}");
    }
    let decimals = (5 - mag).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".into(), fmt_sig)
}

fn hist(h: &Option<Vec<u64>>) -> String {
    h.as_ref().map_or_else(
        || "NA".into(),
        |v| v.iter().map(u64::to_string).collect::<Vec<_>>().join(","),
    )
}

pub const TSV_COLUMNS: [&str; 20] = [
    "study",
    "kind",
    "family",
    "n",
    "alpha",
    "target_gamma_star",
    "true_gamma_star",
    "replications",
    "degenerate",
    "mean_estimate",
    "mean_bias",
    "coverage",
    "rejection_rate",
    "baseline_rejection_rate",
    "ks_statistic",
    "ks_reject_1pct",
    "baseline_ks_statistic",
    "p_histogram",
    "baseline_p_histogram",
    "seed",
];

fn row_fields(study: &StudyResult, r: &StudyRow) -> Vec<String> {
    vec![
        study.name.clone(),
        study.kind.name().into(),
        r.family.short().into(),
        r.n.to_string(),
        fmt_sig(r.alpha),
        opt(r.target_gamma_star),
        fmt_sig(r.true_gamma_star),
        r.replications.to_string(),
        r.degenerate.to_string(),
        fmt_sig(r.mean_estimate),
        fmt_sig(r.mean_bias),
        fmt_sig(r.coverage),
        opt(r.rejection_rate),
        opt(r.baseline_rejection_rate),
        opt(r.ks_statistic),
        r.ks_reject_1pct.map_or_else(|| "NA".into(), |b| b.to_string()),
        opt(r.baseline_ks_statistic),
        hist(&r.p_histogram),
        hist(&r.baseline_p_histogram),
        format!("{:#018x}", r.seed),
    ]
}

/// Writes one header line and one line per grid row of every study.
pub fn write_tsv<W: Write>(mut out: W, results: &[StudyResult]) -> Result<()> {
    writeln!(out, "{}", TSV_COLUMNS.join("\t"))?;
    for s in results {
        for r in &s.rows {
            writeln!(out, "{}", row_fields(s, r).join("\t"))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(fmt_sig(0.123456789), "0.123457");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(-0.05), "-0.05");
        assert_eq!(fmt_sig(123456.7), "123457");
        assert_eq!(fmt_sig(1234567.0), "1.23457e6");
        assert_eq!(fmt_sig(12345.67), "12345.7");
        assert_eq!(fmt_sig(1.5e-7), "1.50000e-7");
        assert_eq!(fmt_sig(f64::NAN), "NA");
        assert_eq!(fmt_sig(0.0), "0");
    }

    #[test]
    fn header_matches_rows() {
        use crate::simulation::{run_study, RunSettings, StudyKind, StudySpec, Family};
        let spec = StudySpec {
            name: "x".into(),
            kind: StudyKind::Size,
            families: vec![Family::TableUniformUniform],
            n: vec![30],
            alpha: None,
            gamma_star: None,
            level: 0.9,
            significance: 0.1,
            replications: Some(5),
        };
        let res = run_study(&spec, 0, &RunSettings::default()).unwrap();
        let mut buf = Vec::new();
        write_tsv(&mut buf, &[res]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[1].split('\t').count(), TSV_COLUMNS.len());
        assert!(lines[1].starts_with("x\tsize\tUU\t30\t0\tNA\t"));
    }
}
