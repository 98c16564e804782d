//! Batch front end: JSON run configuration, experiment orchestration, CSV
//! report emission with a JSON sidecar for reproducibility.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ar1_model::{conditional_predictive, Ar1Params, SeedSpec, simulate_forward};
use crate::correction::{
    closed_form_c_interval, closed_form_c_limit, simulated_c, Correction, Source, Target,
};
use crate::error::{Error, Result};
use crate::estimators::EstimatorKind;
use crate::harness::{
    conditional_coverage, efficiency_study, scaling_study, CoverageOptions, Method,
};
use crate::prediction::{
    equal_density_interval, estimative_upper_limit, improved_interval, improved_upper_limit,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandName {
    Simulate,
    Predict,
    Correct,
    Coverage,
    Scaling,
    Efficiency,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrectionChoice {
    Closed,
    Simulated,
}

/// Raw JSON schema. Unknown keys are rejected.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    command: CommandName,
    rho: f64,
    sigma2: f64,
    y_n: Option<f64>,
    alpha: Option<f64>,
    k: Option<u32>,
    n: Option<usize>,
    n_grid: Option<Vec<usize>>,
    m: Option<usize>,
    estimator: Option<String>,
    estimators: Option<Vec<String>>,
    methods: Option<Vec<String>>,
    correction: Option<CorrectionChoice>,
    target: Option<String>,
    oracle: Option<bool>,
    master_seed: Option<u64>,
    workers: Option<usize>,
    out: Option<PathBuf>,
}

/// Fully validated configuration with defaults filled in.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: CommandName,
    pub rho: f64,
    pub sigma2: f64,
    pub y_n: Option<f64>,
    pub alpha: f64,
    pub k: u32,
    pub n: Option<usize>,
    pub n_grid: Option<Vec<usize>>,
    pub m: usize,
    pub estimator: Option<EstimatorKind>,
    pub estimators: Vec<EstimatorKind>,
    pub methods: Vec<Method>,
    pub correction: CorrectionChoice,
    pub target: Option<Target>,
    pub oracle: bool,
    pub master_seed: u64,
    pub workers: usize,
    pub out: Option<PathBuf>,
}

fn default_workers() -> usize {
    std::thread::available_parallelism()
        .map(|p| p.get())
        .unwrap_or(1)
}

/// Parse and validate a JSON run configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig =
        serde_json::from_str(text).map_err(|e| Error::Config(format!("malformed config: {e}")))?;

    // re-validate domain constraints up front so bad cells fail at parse time
    Ar1Params::new(raw.rho, raw.sigma2)?;
    let alpha = raw.alpha.unwrap_or(0.05);
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(format!(
            "alpha must lie strictly inside (0, 1), got {alpha}"
        )));
    }
    let k = raw.k.unwrap_or(1);
    if k == 0 {
        return Err(Error::Config("k must be >= 1".into()));
    }
    if let Some(n) = raw.n {
        if n < 3 {
            return Err(Error::Config(format!("n must be >= 3, got {n}")));
        }
    }

    let estimator = raw
        .estimator
        .as_deref()
        .map(str::parse::<EstimatorKind>)
        .transpose()?;
    let estimators = match &raw.estimators {
        Some(names) => names
            .iter()
            .map(|s| s.parse::<EstimatorKind>())
            .collect::<Result<Vec<_>>>()?,
        None => vec![
            EstimatorKind::LeastSquares,
            EstimatorKind::BackwardConditional,
        ],
    };
    let methods = match &raw.methods {
        Some(names) => names
            .iter()
            .map(|s| s.parse::<Method>())
            .collect::<Result<Vec<_>>>()?,
        None => Method::ALL.to_vec(),
    };
    let correction = raw.correction.unwrap_or(CorrectionChoice::Closed);
    let target = raw
        .target
        .as_deref()
        .map(|s| match s {
            "limit" => Ok(Target::Limit),
            "interval" => Ok(Target::Interval),
            other => Err(Error::Config(format!(
                "unknown target {other:?}; expected limit or interval"
            ))),
        })
        .transpose()?;

    let config = RunConfig {
        command: raw.command,
        rho: raw.rho,
        sigma2: raw.sigma2,
        y_n: raw.y_n,
        alpha,
        k,
        n: raw.n,
        n_grid: raw.n_grid,
        m: raw.m.unwrap_or(1_000_000),
        estimator,
        estimators,
        methods,
        correction,
        target,
        oracle: raw.oracle.unwrap_or(false),
        master_seed: raw.master_seed.unwrap_or(0),
        workers: raw.workers.unwrap_or_else(default_workers),
        out: raw.out,
    };
    validate_command(&config)?;
    Ok(config)
}

fn validate_command(c: &RunConfig) -> Result<()> {
    let need = |cond: bool, what: &str| {
        if cond {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "command {:?} requires {what}",
                c.command
            )))
        }
    };
    let closed = c.correction == CorrectionChoice::Closed;
    let yw_closed_bias = |kind: Option<EstimatorKind>| {
        if closed && kind == Some(EstimatorKind::YuleWalker) {
            Err(Error::UnsupportedBias("yule_walker"))
        } else {
            Ok(())
        }
    };
    match c.command {
        CommandName::Simulate => need(c.n.is_some(), "n")?,
        CommandName::Predict => {
            need(c.y_n.is_some(), "y_n")?;
            need(c.n.is_some(), "n")?;
            need(c.estimator.is_some(), "estimator")?;
            yw_closed_bias(c.estimator)?;
        }
        CommandName::Correct => {
            need(c.y_n.is_some(), "y_n")?;
            need(c.n.is_some(), "n")?;
            need(c.estimator.is_some(), "estimator")?;
            if c.target == Some(Target::Limit) || c.target.is_none() {
                yw_closed_bias(c.estimator)?;
            }
        }
        CommandName::Coverage => {
            need(c.y_n.is_some(), "y_n")?;
            need(c.n.is_some(), "n")?;
            need(c.estimator.is_some(), "estimator")?;
            if c.methods.iter().any(|m| m.is_improved()) && closed {
                yw_closed_bias(c.estimator)?;
            }
        }
        CommandName::Scaling => {
            need(c.y_n.is_some(), "y_n")?;
            need(c.n_grid.is_some(), "n_grid")?;
            need(c.estimator.is_some(), "estimator")?;
            if c.methods.iter().any(|m| m.is_improved()) && closed {
                yw_closed_bias(c.estimator)?;
            }
        }
        CommandName::Efficiency => {
            need(c.y_n.is_some(), "y_n")?;
            need(c.n.is_some(), "n")?;
            for &kind in &c.estimators {
                yw_closed_bias(Some(kind))?;
            }
        }
    }
    Ok(())
}

fn fmt(v: f64) -> String {
    // 17 significant digits, enough to round-trip any f64
    format!("{v:.16e}")
}

struct Emitter {
    rows: Vec<Vec<String>>,
    failures: Vec<String>,
}

impl Emitter {
    fn new() -> Self {
        Self {
            rows: Vec::new(),
            failures: Vec::new(),
        }
    }

    fn row(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }

    fn fail(&mut self, cell: &str, err: &Error) {
        self.failures.push(format!("{cell}: {err}"));
    }
}

/// Execute a run: compute the requested cells and write the CSV report plus
/// a `<out>.meta.json` sidecar with the resolved config and tool version.
/// Never overwrites existing outputs unless `overwrite` is set.
pub fn run(config: &RunConfig, overwrite: bool) -> Result<()> {
    let out = config
        .out
        .clone()
        .ok_or_else(|| Error::Config("no output path: set \"out\" or pass --out".into()))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config(format!("could not build worker pool: {e}")))?;
    let (header, emitter) = pool.install(|| compute(config))?;

    if !overwrite {
        if out.exists() {
            return Err(Error::WouldOverwrite(out.display().to_string()));
        }
        let side = sidecar_path(&out);
        if side.exists() {
            return Err(Error::WouldOverwrite(side.display().to_string()));
        }
    }

    let mut writer = csv::Writer::from_path(&out)?;
    writer.write_record(&header)?;
    for row in &emitter.rows {
        writer.write_record(row)?;
    }
    writer.flush()?;

    let sidecar = serde_json::json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
    });
    let mut f = fs::File::create(sidecar_path(&out))?;
    writeln!(f, "{}", serde_json::to_string_pretty(&sidecar)?)?;

    if !emitter.failures.is_empty() {
        return Err(Error::Config(format!(
            "{} cell(s) failed: {}",
            emitter.failures.len(),
            emitter.failures.join("; ")
        )));
    }
    Ok(())
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_os_string();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn compute(config: &RunConfig) -> Result<(Vec<&'static str>, Emitter)> {
    match config.command {
        CommandName::Simulate => cmd_simulate(config),
        CommandName::Predict => cmd_predict(config),
        CommandName::Correct => cmd_correct(config),
        CommandName::Coverage => cmd_coverage(config),
        CommandName::Scaling => cmd_scaling(config),
        CommandName::Efficiency => cmd_efficiency(config),
    }
}

fn params_of(config: &RunConfig) -> Result<Ar1Params<f64>> {
    Ar1Params::new(config.rho, config.sigma2)
}

fn cmd_simulate(config: &RunConfig) -> Result<(Vec<&'static str>, Emitter)> {
    let params = params_of(config)?;
    let n = config.n.unwrap();
    let series = simulate_forward(&params, n, SeedSpec::new(config.master_seed))?;
    let mut em = Emitter::new();
    for (t, y) in series.values().iter().enumerate() {
        em.row(vec![(t + 1).to_string(), fmt(*y)]);
    }
    Ok((vec!["t", "value"], em))
}

fn correction_for(
    config: &RunConfig,
    params: &Ar1Params<f64>,
    kind: EstimatorKind,
    target: Target,
) -> Result<Correction<f64>> {
    let y_n = config.y_n.unwrap();
    let n = config.n.unwrap();
    match config.correction {
        CorrectionChoice::Closed => match target {
            Target::Limit => closed_form_c_limit(params, y_n, config.alpha, n, kind),
            Target::Interval => closed_form_c_interval(params, y_n, config.alpha, n, kind),
        },
        CorrectionChoice::Simulated => simulated_c(
            params,
            y_n,
            config.alpha,
            n,
            config.m,
            kind,
            target,
            SeedSpec::new(config.master_seed),
        ),
    }
}

fn cmd_predict(config: &RunConfig) -> Result<(Vec<&'static str>, Emitter)> {
    let header = vec![
        "target", "flavor", "kind", "rho", "sigma2", "y_n", "alpha", "k", "n", "lower", "upper",
    ];
    let params = params_of(config)?;
    let kind = config.estimator.unwrap();
    let y_n = config.y_n.unwrap();
    let n = config.n.unwrap();
    let mut em = Emitter::new();
    let base = |target: Target, flavor: &str, lower: String, upper: String| {
        vec![
            target.name().to_string(),
            flavor.to_string(),
            kind.name().to_string(),
            fmt(config.rho),
            fmt(config.sigma2),
            fmt(y_n),
            fmt(config.alpha),
            config.k.to_string(),
            n.to_string(),
            lower,
            upper,
        ]
    };

    let est = estimative_upper_limit(&params, y_n, config.k, config.alpha)?;
    em.row(base(Target::Limit, "estimative", String::new(), fmt(est.value)));
    let dist = conditional_predictive(&params, y_n, config.k)?;
    let interval = equal_density_interval(&dist, config.alpha)?;
    em.row(base(
        Target::Interval,
        "estimative",
        fmt(interval.lower),
        fmt(interval.upper),
    ));

    // corrections are one-step-ahead only; estimative rows cover k > 1
    if config.k == 1 {
        let corr = correction_for(config, &params, kind, Target::Limit)?;
        let imp = improved_upper_limit(&params, y_n, 1, config.alpha, &corr)?;
        em.row(base(Target::Limit, "improved", String::new(), fmt(imp.value)));
        let corr = correction_for(config, &params, kind, Target::Interval)?;
        let imp = improved_interval(&params, y_n, 1, config.alpha, &corr)?;
        em.row(base(
            Target::Interval,
            "improved",
            fmt(imp.lower),
            fmt(imp.upper),
        ));
    }
    Ok((header, em))
}

fn cmd_correct(config: &RunConfig) -> Result<(Vec<&'static str>, Emitter)> {
    let header = vec![
        "target", "source", "kind", "rho", "sigma2", "y_n", "alpha", "n", "m", "c_over_n",
        "std_error", "seed",
    ];
    let params = params_of(config)?;
    let kind = config.estimator.unwrap();
    let targets: Vec<Target> = match config.target {
        Some(t) => vec![t],
        None => vec![Target::Limit, Target::Interval],
    };
    let mut em = Emitter::new();
    for target in targets {
        match correction_for(config, &params, kind, target) {
            Ok(corr) => {
                let simulated = corr.source == Source::Simulated;
                em.row(vec![
                    target.name().to_string(),
                    corr.source.name().to_string(),
                    kind.name().to_string(),
                    fmt(config.rho),
                    fmt(config.sigma2),
                    fmt(config.y_n.unwrap()),
                    fmt(config.alpha),
                    corr.n.to_string(),
                    if simulated {
                        config.m.to_string()
                    } else {
                        String::new()
                    },
                    fmt(corr.c_over_n),
                    fmt(corr.std_error),
                    if simulated {
                        config.master_seed.to_string()
                    } else {
                        String::new()
                    },
                ]);
            }
            Err(e) => em.fail(&format!("correct/{}", target.name()), &e),
        }
    }
    Ok((header, em))
}

fn coverage_options(config: &RunConfig) -> CoverageOptions {
    CoverageOptions {
        oracle: config.oracle,
        correction: match config.correction {
            CorrectionChoice::Closed => crate::harness::CorrectionMode::ClosedForm,
            CorrectionChoice::Simulated => crate::harness::CorrectionMode::NestedSimulation {
                replicates: 10_000,
            },
        },
    }
}

fn cmd_coverage(config: &RunConfig) -> Result<(Vec<&'static str>, Emitter)> {
    let header = vec![
        "method", "kind", "rho", "sigma2", "y_n", "alpha", "n", "m", "coverage", "std_error",
        "seed",
    ];
    let params = params_of(config)?;
    let kind = config.estimator.unwrap();
    let opts = coverage_options(config);
    let mut em = Emitter::new();
    for (i, &method) in config.methods.iter().enumerate() {
        let seed = SeedSpec::new(config.master_seed).stream((i as u64) << 48);
        match conditional_coverage(
            method,
            kind,
            &params,
            config.y_n.unwrap(),
            config.alpha,
            config.n.unwrap(),
            config.m,
            seed,
            &opts,
        ) {
            Ok(rep) => em.row(vec![
                method.name().to_string(),
                kind.name().to_string(),
                fmt(rep.rho),
                fmt(rep.sigma2),
                fmt(rep.y_n),
                fmt(rep.alpha),
                rep.n.to_string(),
                rep.m.to_string(),
                fmt(rep.coverage),
                fmt(rep.std_error),
                config.master_seed.to_string(),
            ]),
            Err(e) => em.fail(&format!("coverage/{}", method.name()), &e),
        }
    }
    Ok((header, em))
}

fn cmd_scaling(config: &RunConfig) -> Result<(Vec<&'static str>, Emitter)> {
    let header = vec![
        "row_type",
        "method",
        "kind",
        "rho",
        "sigma2",
        "y_n",
        "alpha",
        "n",
        "m",
        "coverage",
        "error",
        "std_error",
        "noise_dominated",
        "slope",
        "slope_se",
        "points_used",
        "seed",
    ];
    let params = params_of(config)?;
    let kind = config.estimator.unwrap();
    let n_grid = config.n_grid.clone().unwrap();
    let opts = coverage_options(config);
    let mut em = Emitter::new();
    for (i, &method) in config.methods.iter().enumerate() {
        let seed = SeedSpec::new(config.master_seed).stream((i as u64) << 48);
        let common = |row_type: &str, n: String| {
            vec![
                row_type.to_string(),
                method.name().to_string(),
                kind.name().to_string(),
                fmt(config.rho),
                fmt(config.sigma2),
                fmt(config.y_n.unwrap()),
                fmt(config.alpha),
                n,
                config.m.to_string(),
            ]
        };
        match scaling_study(
            method,
            kind,
            &params,
            config.y_n.unwrap(),
            config.alpha,
            &n_grid,
            config.m,
            seed,
            &opts,
        ) {
            Ok(rep) => {
                for cell in &rep.cells {
                    let mut row = common("data", cell.n.to_string());
                    row.extend([
                        fmt(cell.coverage),
                        fmt(cell.error),
                        fmt(cell.std_error),
                        cell.noise_dominated.to_string(),
                        String::new(),
                        String::new(),
                        String::new(),
                        config.master_seed.to_string(),
                    ]);
                    em.row(row);
                }
                let mut row = common("slope", String::new());
                match rep.slope {
                    Some(fit) => row.extend([
                        String::new(),
                        String::new(),
                        String::new(),
                        String::new(),
                        fmt(fit.slope),
                        fmt(fit.std_error),
                        fit.points_used.to_string(),
                        config.master_seed.to_string(),
                    ]),
                    None => row.extend([
                        String::new(),
                        String::new(),
                        String::new(),
                        String::new(),
                        String::new(),
                        String::new(),
                        "0".to_string(),
                        config.master_seed.to_string(),
                    ]),
                }
                em.row(row);
            }
            Err(e) => em.fail(&format!("scaling/{}", method.name()), &e),
        }
    }
    Ok((header, em))
}

fn cmd_efficiency(config: &RunConfig) -> Result<(Vec<&'static str>, Emitter)> {
    let header = vec![
        "target",
        "kind",
        "rho",
        "sigma2",
        "y_n",
        "alpha",
        "n",
        "m",
        "estimative_mean",
        "estimative_se",
        "improved_mean",
        "improved_se",
        "theoretical_improved",
        "seed",
    ];
    let params = params_of(config)?;
    let target = config.target.unwrap_or(Target::Limit);
    let mut em = Emitter::new();
    let rep = efficiency_study(
        &params,
        config.y_n.unwrap(),
        config.alpha,
        config.n.unwrap(),
        config.m,
        &config.estimators,
        target,
        SeedSpec::new(config.master_seed),
    )?;
    let common = |kind: String| {
        vec![
            target.name().to_string(),
            kind,
            fmt(config.rho),
            fmt(config.sigma2),
            fmt(config.y_n.unwrap()),
            fmt(config.alpha),
            config.n.unwrap().to_string(),
            config.m.to_string(),
        ]
    };
    for row in &rep.rows {
        let mut r = common(row.kind.name().to_string());
        r.extend([
            fmt(row.estimative_mean),
            fmt(row.estimative_se),
            fmt(row.improved_mean),
            fmt(row.improved_se),
            fmt(rep.theoretical_improved),
            config.master_seed.to_string(),
        ]);
        em.row(r);
    }
    if let Some(diff) = &rep.pair_diff {
        let mut r = common("paired_diff".to_string());
        r.extend([
            fmt(diff.estimative_mean),
            fmt(diff.estimative_se),
            fmt(diff.improved_mean),
            fmt(diff.improved_se),
            String::new(),
            config.master_seed.to_string(),
        ]);
        em.row(r);
    }
    Ok((header, em))
}
