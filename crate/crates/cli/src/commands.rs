use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::time::Instant;

use nomcor::classical::{classical_report, ClassicalReport};
use nomcor::distributions::MvnConfig;
use nomcor::gamma_star::{gamma_star_table, gamma_star_with_limits, population_gamma_star, SearchLimits};
use nomcor::inference::{self, infer_table, ConfidenceInterval, IndependenceTest, InferenceLimits, InferenceOptions};
use nomcor::simulation::{fmt_sig, run_simulation, write_tsv, RunSettings, SimulationConfig, StudyResult, TSV_COLUMNS};
use nomcor::{ColumnRef, ColumnSpec, ContingencyTable, Error, NominalValue, Numbering, PairedSample, Result, TableMode};
use serde::Serialize;

use crate::manifest::{Budgets, RunManifest};
use crate::{Format, InferArgs, InputArgs, MeasureArgs, ModeArg, SimulateArgs};

enum Input {
    Sample(PairedSample),
    Table(ContingencyTable),
}

fn column(s: &str) -> ColumnRef {
    match s.parse::<usize>() {
        Ok(i) => ColumnRef::Index(i),
        Err(_) => ColumnRef::Name(s.to_string()),
    }
}

fn load(args: &InputArgs) -> Result<(Input, Vec<u8>)> {
    let bytes = fs::read(&args.input)?;
    let input = if args.table {
        let mode = args.mode.map(|m| match m {
            ModeArg::Counts => TableMode::Counts,
            ModeArg::Probabilities => TableMode::Probabilities,
        });
        Input::Table(ContingencyTable::from_csv_reader(&bytes[..], mode)?)
    } else {
        let spec = ColumnSpec {
            x: column(&args.x),
            y: column(&args.y),
        };
        Input::Sample(PairedSample::from_csv_reader(&bytes[..], &spec)?)
    };
    Ok((input, bytes))
}

fn search_limits(args: &InputArgs) -> SearchLimits {
    SearchLimits {
        max_k_real: args.max_k,
        max_categories_nominal: args.max_categories,
    }
}

#[derive(Serialize)]
struct InputSummary {
    kind: &'static str,
    y: &'static str,
    n: f64,
    k: usize,
    l: Option<usize>,
}

impl Input {
    fn summary(&self) -> InputSummary {
        match self {
            Input::Sample(s) => InputSummary {
                kind: "sample",
                y: if s.l().is_some() { "nominal" } else { "real" },
                n: s.len() as f64,
                k: s.k(),
                l: s.l(),
            },
            Input::Table(t) => InputSummary {
                kind: if t.mode() == TableMode::Counts { "table" } else { "probability-table" },
                y: "nominal",
                n: t.total(),
                k: t.k(),
                l: Some(t.l()),
            },
        }
    }

    /// Row and column labels in code order; `None` for a real y.
    fn labels(&self) -> (&[NominalValue], Option<&[NominalValue]>) {
        match self {
            Input::Sample(s) => (s.x().labels(), s.y_nominal().map(|c| c.labels())),
            Input::Table(t) => (t.rows(), Some(t.cols())),
        }
    }

    fn argmax(&self, nb: &Numbering) -> Argmax {
        let (xl, yl) = self.labels();
        let pick = |labels: &[NominalValue], order: &[usize]| -> Vec<String> {
            order.iter().map(|&i| labels[i].as_str().to_string()).collect()
        };
        Argmax {
            x: pick(xl, nb.x_order()),
            y: match (yl, nb.y_order()) {
                (Some(l), Some(o)) => Some(pick(l, o)),
                _ => None,
            },
        }
    }
}

/// Categories from lowest to highest rank.
#[derive(Serialize)]
struct Argmax {
    x: Vec<String>,
    y: Option<Vec<String>>,
}

#[derive(Serialize)]
struct GammaStarJson {
    value: f64,
    argmax: Argmax,
    argmax_count: u64,
    concordant: f64,
    untied: f64,
}

#[derive(Serialize)]
struct MeasureReport {
    input: InputSummary,
    gamma_star: GammaStarJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    classical: Option<ClassicalReport>,
    manifest: RunManifest,
}

#[derive(Serialize)]
struct InferReport {
    input: InputSummary,
    n: u64,
    gamma_star: f64,
    sigma: f64,
    std_error: f64,
    argmax: Argmax,
    argmax_count: u64,
    ci: Option<ConfidenceInterval>,
    #[serde(skip_serializing_if = "Option::is_none")]
    test: Option<IndependenceTest>,
    manifest: RunManifest,
}

fn json_error(e: serde_json::Error) -> Error {
    Error::Io(io::Error::other(e))
}

fn emit_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value).map_err(json_error)?;
    writeln!(out)?;
    Ok(())
}

/// Flat `key<TAB>value` lines, numbers with six significant digits.
fn emit_text<T: Serialize>(value: &T) -> Result<()> {
    fn walk(prefix: &str, v: &serde_json::Value, out: &mut Vec<(String, String)>) {
        use serde_json::Value;
        let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
        match v {
            Value::Object(m) => m.iter().for_each(|(k, v)| walk(&key(k), v, out)),
            Value::Array(a) if a.iter().all(|x| !x.is_object() && !x.is_array()) => {
                let items: Vec<String> = a.iter().map(scalar).collect();
                out.push((prefix.to_string(), items.join(" ")));
            }
            Value::Array(a) => a.iter().enumerate().for_each(|(i, v)| walk(&key(&i.to_string()), v, out)),
            _ => out.push((prefix.to_string(), scalar(v))),
        }
    }
    fn scalar(v: &serde_json::Value) -> String {
        match v {
            serde_json::Value::Number(n) if n.is_f64() => fmt_sig(n.as_f64().unwrap_or(f64::NAN)),
            serde_json::Value::String(s) => s.clone(),
            serde_json::Value::Null => "NA".into(),
            other => other.to_string(),
        }
    }
    let v = serde_json::to_value(value).map_err(json_error)?;
    let mut lines = Vec::new();
    walk("", &v, &mut lines);
    let mut out = io::stdout().lock();
    for (k, v) in lines {
        writeln!(out, "{k}\t{v}")?;
    }
    Ok(())
}

fn emit<T: Serialize>(format: Format, value: &T) -> Result<()> {
    match format {
        Format::Json => emit_json(value),
        Format::Text => emit_text(value),
    }
}

pub fn measure(args: &MeasureArgs, argv: &[String]) -> Result<()> {
    let started = Instant::now();
    let (input, bytes) = load(&args.input)?;
    let limits = search_limits(&args.input);
    let gamma_star = match &input {
        Input::Sample(s) => {
            let r = gamma_star_with_limits(s, &limits)?;
            GammaStarJson {
                value: r.value,
                argmax: input.argmax(&r.argmax),
                argmax_count: r.argmax_count,
                concordant: r.concordant as f64,
                untied: r.untied as f64,
            }
        }
        Input::Table(t) if t.mode() == TableMode::Counts => {
            let r = gamma_star_table(t, &limits)?;
            GammaStarJson {
                value: r.value,
                argmax: input.argmax(&r.argmax),
                argmax_count: r.argmax_count,
                concordant: r.concordant as f64,
                untied: r.untied as f64,
            }
        }
        Input::Table(t) => {
            if t.k() > limits.max_categories_nominal || t.l() > limits.max_categories_nominal {
                return Err(Error::Budget(format!(
                    "a {}x{} table exceeds the limit of {} categories per variable",
                    t.k(),
                    t.l(),
                    limits.max_categories_nominal
                )));
            }
            let r = population_gamma_star(t)?;
            GammaStarJson {
                value: r.value,
                argmax: input.argmax(&r.argmax),
                argmax_count: r.argmax_count,
                concordant: r.concordant,
                untied: r.untied,
            }
        }
    };
    let classical = if args.all_classical {
        Some(match &input {
            Input::Sample(s) if s.l().is_none() => {
                return Err(Error::InvalidInput(
                    "--all-classical needs a nominal y; the classical measures are defined for contingency tables"
                        .into(),
                ))
            }
            Input::Sample(s) => classical_report(&ContingencyTable::from_sample(s)?)?,
            Input::Table(t) => classical_report(t)?,
        })
    } else {
        None
    };
    let budgets = Budgets {
        max_k_real: limits.max_k_real,
        max_categories_nominal: limits.max_categories_nominal,
        ..Budgets::default()
    };
    let report = MeasureReport {
        input: input.summary(),
        gamma_star,
        classical,
        manifest: RunManifest::new(argv, &args.input.input, &bytes, None, budgets, started),
    };
    emit(args.input.format, &report)
}

pub fn infer(args: &InferArgs, argv: &[String]) -> Result<()> {
    let started = Instant::now();
    let (input, bytes) = load(&args.input)?;
    if !(args.mvn_error > 0.0) || args.mvn_points == 0 {
        return Err(Error::InvalidInput("--mvn-error and --mvn-points must be positive".into()));
    }
    let mvn = MvnConfig {
        target_error: args.mvn_error,
        max_points: args.mvn_points,
        seed: args.seed.unwrap_or(MvnConfig::default().seed),
        ..MvnConfig::default()
    };
    let opts = InferenceOptions {
        level: Some(args.level),
        test: args.test,
        mvn,
        search: search_limits(&args.input),
        limits: InferenceLimits::default(),
    };
    let r = match &input {
        Input::Sample(s) => inference::infer(s, &opts)?,
        Input::Table(t) => infer_table(t, &opts)?,
    };
    let budgets = Budgets {
        max_k_real: opts.search.max_k_real,
        max_categories_nominal: opts.search.max_categories_nominal,
        test_max_k_real: args.test.then_some(opts.limits.max_k_real),
        test_max_categories_nominal: args.test.then_some(opts.limits.max_categories_nominal),
        mvn_target_error: args.test.then_some(mvn.target_error),
        mvn_max_points: args.test.then_some(mvn.max_points),
        mvn_randomizations: args.test.then_some(mvn.randomizations),
    };
    let report = InferReport {
        input: input.summary(),
        n: r.n,
        gamma_star: r.gamma_star,
        sigma: r.sigma,
        std_error: r.std_error,
        argmax: input.argmax(&r.argmax),
        argmax_count: r.argmax_count,
        ci: r.ci,
        test: r.test,
        manifest: RunManifest::new(argv, &args.input.input, &bytes, args.test.then_some(mvn.seed), budgets, started),
    };
    emit(args.input.format, &report)
}

#[derive(Serialize)]
struct Sidecar<'a> {
    tsv_columns: &'a [&'a str],
    #[serde(flatten)]
    result: &'a StudyResult,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = io::BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value).map_err(json_error)?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}

pub fn simulate(args: &SimulateArgs, argv: &[String]) -> Result<()> {
    let started = Instant::now();
    let bytes = fs::read(&args.config)?;
    let text = String::from_utf8(bytes.clone()).map_err(|e| Error::Parse(format!("config is not UTF-8: {e}")))?;
    let mut cfg = SimulationConfig::from_toml(&text)?;
    if let Some(r) = args.replications {
        if r == 0 {
            return Err(Error::InvalidInput("--replications must be positive".into()));
        }
        cfg.replications = r;
        cfg.studies.iter_mut().for_each(|s| s.replications = None);
    }
    let settings = RunSettings::from_config(&cfg, args.seed);
    let results = run_simulation(&cfg, &settings)?;

    fs::create_dir_all(&args.out)?;
    for r in &results {
        let mut tsv = io::BufWriter::new(fs::File::create(args.out.join(format!("{}.tsv", r.name)))?);
        write_tsv(&mut tsv, std::slice::from_ref(r))?;
        tsv.flush()?;
        let sidecar = Sidecar {
            tsv_columns: &TSV_COLUMNS,
            result: r,
        };
        write_json(&args.out.join(format!("{}.json", r.name)), &sidecar)?;
        eprintln!("nomcor: wrote {} ({} rows)", args.out.join(format!("{}.tsv", r.name)).display(), r.rows.len());
    }
    let budgets = Budgets {
        max_k_real: SearchLimits::default().max_k_real,
        max_categories_nominal: SearchLimits::default().max_categories_nominal,
        test_max_k_real: Some(InferenceLimits::default().max_k_real),
        test_max_categories_nominal: Some(InferenceLimits::default().max_categories_nominal),
        mvn_target_error: Some(settings.mvn_target_error),
        mvn_max_points: Some(settings.mvn_max_points),
        mvn_randomizations: Some(MvnConfig::default().randomizations),
    };
    let manifest = RunManifest::new(argv, &args.config, &bytes, Some(settings.seed), budgets, started);
    write_json(&args.out.join("manifest.json"), &manifest)
}
