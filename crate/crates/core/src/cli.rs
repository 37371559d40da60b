//! Command-line surface. Every subcommand renders a human-readable summary
//! for stdout and a JSON report embedding the [`RunManifest`], so a report
//! can be re-run from its own manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::appraisal::{self, ObBasis};
use crate::audit::{AuditFinding, RuleArgs, RuleRegistry};
use crate::optimism_bias::{
    mitigated_uplift, sensitivity_scenarios, BoundsMetric, CostKind, FactorBreakdown,
    MitigationAssessment, UpliftSchedules,
};
use crate::project::ProjectType;
use crate::qra::{
    brute_force_enumerate, expected_value, risk_allowance, simulate, CorrelationSpec,
    RiskRegister, SimulationConfig,
};
use crate::reference_class::ReferenceClass;

pub const TOOLKIT: &str = "riskcast";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser, Serialize)]
#[command(name = "riskcast", version, about = "Reference class forecasting, optimism-bias uplifts and QRA audits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Query a reference class of historic overruns
    Rcf {
        #[command(subcommand)]
        query: RcfQuery,
    },
    /// Simulate a risk register
    Qra(QraArgs),
    /// Run an audit rule
    Audit {
        #[command(subcommand)]
        rule: AuditCommand,
    },
    /// Look up optimism-bias schedules and adjustments
    Ob {
        /// Replacement schedule CSV (type,metric,anchor,value)
        #[arg(long, global = true)]
        schedule: Option<PathBuf>,
        #[command(subcommand)]
        query: ObQuery,
    },
    /// Compose a cost estimate from base cost, mean risk and an uplift
    Estimate(EstimateArgs),
    /// Re-run the manifest embedded in a report and compare the output
    Replay {
        report: PathBuf,
    },
}

#[derive(Debug, Args, Serialize)]
pub struct ClassArgs {
    /// Reference class CSV (project_id,category,overrun,baseline)
    #[arg(long)]
    pub class: PathBuf,
    /// Only use observations of this category
    #[arg(long)]
    pub category: Option<String>,
    /// Write the JSON report here
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RcfQuery {
    /// Share of observations at or below an overrun
    Cdf {
        #[command(flatten)]
        #[serde(flatten)]
        common: ClassArgs,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
    },
    /// Overrun at a P-level
    Quantile {
        #[command(flatten)]
        #[serde(flatten)]
        common: ClassArgs,
        #[arg(long)]
        p: f64,
    },
    /// Required uplift at a confidence level
    Uplift {
        #[command(flatten)]
        #[serde(flatten)]
        common: ClassArgs,
        #[arg(long)]
        p: f64,
    },
    /// Upper-fence outliers (Q3 + 1.5 IQR)
    Outliers {
        #[command(flatten)]
        #[serde(flatten)]
        common: ClassArgs,
    },
    /// S-curve as `uplift,probability` CSV
    Scurve {
        #[command(flatten)]
        #[serde(flatten)]
        common: ClassArgs,
        #[arg(long, default_value_t = 99)]
        resolution: usize,
    },
}

#[derive(Debug, Args, Serialize)]
pub struct QraArgs {
    /// Risk register JSON ({"risks": [...]})
    #[arg(long)]
    pub register: PathBuf,
    /// Correlation JSON ([{a, b, rho} | {group, rho}])
    #[arg(long)]
    pub correlation: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long)]
    pub seed: u64,
    /// P-levels to report
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.5, 0.8, 0.9])]
    pub p: Vec<f64>,
    /// Base cost for expressing quantiles as risk allowances
    #[arg(long)]
    pub base_cost: Option<f64>,
    /// Compare against exact enumeration (fixed impacts, <= 20 risks)
    #[arg(long)]
    pub oracle: bool,
    /// Worker threads (does not affect results)
    #[arg(long, default_value_t = 0)]
    #[serde(skip)]
    pub workers: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AuditCommand {
    /// P-level risk versus mean QRA + residual uplift
    MeanPlusSix {
        #[arg(long)]
        total: f64,
        #[arg(long)]
        p_risk: f64,
        #[arg(long)]
        mean_risk: f64,
        #[arg(long, default_value_t = appraisal::DEFAULT_RESIDUAL_UPLIFT)]
        uplift: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Benefit-cost ratio
    Bcr {
        #[arg(long)]
        benefits: f64,
        #[arg(long)]
        costs: f64,
        #[arg(long, default_value_t = 2)]
        precision: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Funding headroom over the estimate
    Headroom {
        #[arg(long)]
        funding: f64,
        #[arg(long)]
        estimate: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cost overrun of an outturn against its estimate
    Overrun {
        #[arg(long)]
        actual: f64,
        #[arg(long)]
        estimated: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Inside-view allowance against outside-view uplift
    Gap {
        #[arg(long)]
        inside: f64,
        #[arg(long)]
        outside: f64,
        #[arg(long, default_value_t = appraisal::DEFAULT_GAP_THRESHOLD)]
        threshold: f64,
        #[arg(long, default_value_t = 0.9)]
        p: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl AuditCommand {
    fn to_rule(&self) -> (&'static str, RuleArgs, Option<&PathBuf>) {
        match self {
            AuditCommand::MeanPlusSix { total, p_risk, mean_risk, uplift, out } => (
                "mean-plus-six",
                RuleArgs::new()
                    .with("total", *total)
                    .with("p_risk", *p_risk)
                    .with("mean_risk", *mean_risk)
                    .with("uplift", *uplift),
                out.as_ref(),
            ),
            AuditCommand::Bcr { benefits, costs, precision, out } => (
                "bcr",
                RuleArgs::new()
                    .with("benefits", *benefits)
                    .with("costs", *costs)
                    .with("precision", *precision as f64),
                out.as_ref(),
            ),
            AuditCommand::Headroom { funding, estimate, out } => (
                "headroom",
                RuleArgs::new().with("funding", *funding).with("estimate", *estimate),
                out.as_ref(),
            ),
            AuditCommand::Overrun { actual, estimated, out } => (
                "overrun",
                RuleArgs::new().with("actual", *actual).with("estimated", *estimated),
                out.as_ref(),
            ),
            AuditCommand::Gap { inside, outside, threshold, p, out } => (
                "gap",
                RuleArgs::new()
                    .with("inside", *inside)
                    .with("outside", *outside)
                    .with("threshold", *threshold)
                    .with("p", *p),
                out.as_ref(),
            ),
        }
    }
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObQuery {
    /// Staged uplift for a development level
    Stage {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        stage: u8,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Uplift at a confidence level
    Confidence {
        #[arg(long = "type")]
        project_type: String,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Upper bound reduced by managed factor shares
    Mitigate {
        #[arg(long = "type", default_value = "nonstandard_civil")]
        project_type: String,
        #[arg(long, default_value = "capex")]
        metric: String,
        /// Assessment JSON ({"factors": [{factor, managed, evidence}]})
        #[arg(long)]
        assessment: PathBuf,
        /// Count only objectively evidenced mitigation
        #[arg(long)]
        require_objective: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Low / central / high adjusted costs
    Sensitivity {
        #[arg(long)]
        base: f64,
        #[arg(long = "type")]
        project_type: String,
        #[arg(long, default_value = "capex")]
        metric: String,
        #[arg(long)]
        central: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args, Serialize)]
pub struct EstimateArgs {
    #[arg(long)]
    pub base: f64,
    #[arg(long, default_value_t = 0.0)]
    pub mean_risk: f64,
    #[arg(long)]
    pub uplift: f64,
    /// base_only or risk_adjusted
    #[arg(long, conflicts_with = "stage")]
    pub basis: Option<String>,
    /// Development level 1..5; selects the basis
    #[arg(long)]
    pub stage: Option<u8>,
    #[arg(long, default_value = "")]
    pub price_basis: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Everything needed to reproduce a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub toolkit: String,
    pub version: String,
    pub subcommand: String,
    /// Command-line arguments after the program name, minus `--workers`.
    pub arguments: Vec<String>,
    pub inputs: Vec<String>,
    pub parameters: Value,
    pub outputs: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Report {
    pub manifest: RunManifest,
    pub result: Value,
}

/// Result of executing one invocation, before anything touches the filesystem.
#[derive(Debug)]
pub struct Outcome {
    pub stdout: String,
    /// Pretty JSON report text, newline terminated.
    pub report: String,
    pub out_path: Option<PathBuf>,
    pub exit_code: i32,
}

fn path_string(p: &Path) -> String {
    p.display().to_string()
}

/// Drops `--workers N` / `--workers=N` so thread count never reaches a report.
pub fn recorded_arguments(args: &[String]) -> Vec<String> {
    let mut out = Vec::with_capacity(args.len());
    let mut skip = false;
    for a in args {
        if skip {
            skip = false;
            continue;
        }
        if a == "--workers" {
            skip = true;
            continue;
        }
        if a.starts_with("--workers=") {
            continue;
        }
        out.push(a.clone());
    }
    out
}

fn fmt_num(x: f64) -> String {
    format!("{x:.4}")
}

fn fmt_money(x: f64) -> String {
    format!("{x:.1}")
}

fn load_class(common: &ClassArgs, warnings: &mut Vec<String>) -> anyhow::Result<ReferenceClass> {
    let mut class = ReferenceClass::from_csv_path(&common.class)
        .with_context(|| format!("reading reference class {}", common.class.display()))?;
    if let Some(cat) = &common.category {
        let cat: ProjectType = cat.parse()?;
        class = class.filter_category(cat);
    }
    if let Some(w) = class.size_warning() {
        warnings.push(w);
    }
    Ok(class)
}

fn finding_table(f: &AuditFinding) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "rule     {}", f.rule_id);
    for (k, v) in &f.inputs {
        let _ = writeln!(s, "  input  {k:<24} {}", fmt_display(k, *v));
    }
    for (k, v) in &f.computed {
        let _ = writeln!(s, "  value  {k:<24} {}", fmt_display(k, *v));
    }
    let _ = writeln!(s, "verdict  {}", f.verdict);
    let _ = writeln!(s, "message  {}", f.message);
    s
}

/// Money-valued keys display to one decimal; ratios to four.
fn fmt_display(key: &str, v: f64) -> String {
    const MONEY: &[&str] = &[
        "total", "p_risk", "mean_risk", "base", "risk_adjusted", "residual_uplift", "benchmark",
        "benefits", "costs", "funding", "estimate", "margin", "actual", "estimated", "base_cost",
    ];
    if MONEY.contains(&key) {
        fmt_money(v)
    } else if key == "precision" || key == "reference_class_size" || key == "bcr_rounded" {
        format!("{v}")
    } else {
        fmt_num(v)
    }
}

/// Runs a parsed invocation. `arguments` are the raw argv after the program
/// name, recorded into the manifest.
pub fn execute(cli: &Cli, arguments: &[String]) -> anyhow::Result<Outcome> {
    let mut stdout = String::new();
    let mut warnings = Vec::new();
    let mut inputs: Vec<String> = Vec::new();
    let mut exit_code = 0;

    let (subcommand, out_path, result): (String, Option<PathBuf>, Value) = match &cli.command {
        Command::Rcf { query } => {
            let (name, common) = match query {
                RcfQuery::Cdf { common, .. } => ("cdf", common),
                RcfQuery::Quantile { common, .. } => ("quantile", common),
                RcfQuery::Uplift { common, .. } => ("uplift", common),
                RcfQuery::Outliers { common } => ("outliers", common),
                RcfQuery::Scurve { common, .. } => ("scurve", common),
            };
            inputs.push(path_string(&common.class));
            let class = load_class(common, &mut warnings)?;
            let base = json!({ "class": class.label(), "observations": class.len() });
            let result = match query {
                RcfQuery::Cdf { x, .. } => {
                    let v = class.empirical_cdf(*x)?;
                    let _ = writeln!(stdout, "{v}");
                    json!({ "query": "cdf", "x": x, "probability": v })
                }
                RcfQuery::Quantile { p, .. } => {
                    let v = class.quantile(*p)?;
                    let _ = writeln!(stdout, "{v}");
                    json!({ "query": "quantile", "p": p, "overrun": v })
                }
                RcfQuery::Uplift { p, .. } => {
                    let v = class.required_uplift(*p)?;
                    let _ = writeln!(stdout, "{v}");
                    json!({ "query": "uplift", "p": p, "uplift": v })
                }
                RcfQuery::Outliers { .. } => {
                    let r = class.detect_outliers()?;
                    let _ = writeln!(stdout, "q1         {}", r.q1);
                    let _ = writeln!(stdout, "q3         {}", r.q3);
                    let _ = writeln!(stdout, "iqr        {}", r.iqr);
                    let _ = writeln!(stdout, "threshold  {}", r.threshold);
                    let _ = writeln!(stdout, "outliers   {}", r.outlier_ids.len());
                    let _ = writeln!(stdout, "share      {}", r.outlier_share);
                    for id in &r.outlier_ids {
                        let _ = writeln!(stdout, "  {id}");
                    }
                    json!({ "query": "outliers", "report": r })
                }
                RcfQuery::Scurve { resolution, .. } => {
                    let pts = class.s_curve(*resolution)?;
                    stdout.push_str("uplift,probability\n");
                    for p in &pts {
                        let _ = writeln!(stdout, "{},{}", p.uplift, p.cumulative_probability);
                    }
                    json!({ "query": "scurve", "resolution": resolution, "points": pts })
                }
            };
            let mut merged = base;
            merged.as_object_mut().unwrap().extend(result.as_object().unwrap().clone());
            (format!("rcf {name}"), common.out.clone(), merged)
        }

        Command::Qra(args) => {
            inputs.push(path_string(&args.register));
            let register = RiskRegister::from_path(&args.register)?;
            let correlation = match &args.correlation {
                Some(p) => {
                    inputs.push(path_string(p));
                    CorrelationSpec::from_path(p)?
                }
                None => CorrelationSpec::none(),
            };
            let config = SimulationConfig::new(args.trials, args.seed).with_workers(args.workers);
            let result = simulate(&register, &correlation, &config)?;
            let ev = if register.is_empty() { 0.0 } else { expected_value(&register)? };

            let _ = writeln!(stdout, "risks              {}", register.len());
            let _ = writeln!(stdout, "trials             {}", result.count());
            let _ = writeln!(stdout, "seed               {}", args.seed);
            let _ = writeln!(stdout, "expected value     {}", fmt_num(ev));
            let _ = writeln!(stdout, "simulated mean     {}", fmt_num(result.mean()));
            let _ = writeln!(stdout, "std deviation      {}", fmt_num(result.std_dev()));
            let mut quantiles = Vec::new();
            for &p in &args.p {
                let q = result.quantile(p)?;
                let mut entry = json!({ "p": p, "value": q });
                let mut line = format!("P{:<17} {}", fmt_p(p), fmt_num(q));
                if let Some(base) = args.base_cost {
                    let a = risk_allowance(&result, p, base)?;
                    entry["allowance"] = json!(a);
                    let _ = write!(line, "  ({:.2}% of base)", a * 100.0);
                }
                let _ = writeln!(stdout, "{line}");
                quantiles.push(entry);
            }
            let excluded = result.excluded_catastrophic().to_vec();
            if !excluded.is_empty() {
                let _ = writeln!(stdout, "excluded catastrophic risks: {}", excluded.join(", "));
            }
            let mut report = json!({
                "risks": register.len(),
                "trials": result.count(),
                "seed": args.seed,
                "expected_value": ev,
                "mean": result.mean(),
                "std_dev": result.std_dev(),
                "min": result.totals().first(),
                "max": result.totals().last(),
                "quantiles": quantiles,
                "excluded_catastrophic": excluded,
            });
            if let Some(base) = args.base_cost {
                report["base_cost"] = json!(base);
            }
            if args.oracle {
                if !correlation.is_empty() {
                    bail!("--oracle requires independent risks; drop --correlation");
                }
                let exact = brute_force_enumerate(&register)?;
                let _ = writeln!(stdout, "oracle exact mean  {}  (delta {})", fmt_num(exact.mean()), fmt_num(result.mean() - exact.mean()));
                let mut oq = Vec::new();
                for &p in &args.p {
                    let e = exact.quantile(p)?;
                    let s = result.quantile(p)?;
                    let _ = writeln!(stdout, "oracle P{:<10} exact {}  simulated {}  delta {}", fmt_p(p), fmt_num(e), fmt_num(s), fmt_num(s - e));
                    oq.push(json!({ "p": p, "exact": e, "simulated": s, "delta": s - e }));
                }
                report["oracle"] = json!({
                    "exact_mean": exact.mean(),
                    "exact_std_dev": exact.std_dev(),
                    "mean_delta": result.mean() - exact.mean(),
                    "standard_error": exact.std_dev() / (result.count() as f64).sqrt(),
                    "outcomes": exact.outcomes.len(),
                    "quantiles": oq,
                });
            }
            ("qra".to_string(), args.out.clone(), report)
        }

        Command::Audit { rule } => {
            let (id, rule_args, out) = rule.to_rule();
            let finding = RuleRegistry::builtin().evaluate(id, &rule_args)?;
            stdout.push_str(&finding_table(&finding));
            exit_code = finding.verdict.exit_code();
            (format!("audit {id}"), out.cloned(), serde_json::to_value(&finding)?)
        }

        Command::Ob { schedule, query } => {
            let schedules = match schedule {
                Some(p) => {
                    inputs.push(path_string(p));
                    UpliftSchedules::from_path(p)?
                }
                None => UpliftSchedules::embedded(),
            };
            let (name, out, mut result) = match query {
                ObQuery::Stage { kind, stage, out } => {
                    let kind: CostKind = kind.parse()?;
                    let row = schedules.lookup_stage_uplift(kind, *stage)?;
                    let _ = writeln!(stdout, "{}", row.uplift);
                    ("stage", out, json!({ "row": row }))
                }
                ObQuery::Confidence { project_type, p, out } => {
                    let ty: ProjectType = project_type.parse()?;
                    let v = schedules.lookup_confidence_uplift(ty, *p)?;
                    let _ = writeln!(stdout, "{v}");
                    ("confidence", out, json!({ "project_type": ty, "p": p, "uplift": v }))
                }
                ObQuery::Mitigate { project_type, metric, assessment, require_objective, out } => {
                    inputs.push(path_string(assessment));
                    let ty: ProjectType = project_type.parse()?;
                    let metric: BoundsMetric = metric.parse()?;
                    let bounds = schedules.bounds(ty, metric)?;
                    let text = std::fs::read_to_string(assessment)
                        .with_context(|| format!("reading {}", assessment.display()))?;
                    let a = MitigationAssessment::from_json(&text)?;
                    let breakdown = FactorBreakdown::nonstandard_civils_capex();
                    let v = mitigated_uplift(&bounds, &breakdown, &a, *require_objective)?;
                    let _ = writeln!(stdout, "{v}");
                    ("mitigate", out, json!({ "bounds": bounds, "require_objective": require_objective, "uplift": v }))
                }
                ObQuery::Sensitivity { base, project_type, metric, central, out } => {
                    let ty: ProjectType = project_type.parse()?;
                    let metric: BoundsMetric = metric.parse()?;
                    let bounds = schedules.bounds(ty, metric)?;
                    let s = sensitivity_scenarios(*base, &bounds, *central)?;
                    let _ = writeln!(stdout, "low      {}", fmt_money(s.low));
                    let _ = writeln!(stdout, "central  {}", fmt_money(s.central));
                    let _ = writeln!(stdout, "high     {}", fmt_money(s.high));
                    ("sensitivity", out, json!({ "bounds": bounds, "central": central, "scenarios": s }))
                }
            };
            result["schedule_version"] = json!(schedules.version);
            (format!("ob {name}"), out.clone(), result)
        }

        Command::Estimate(args) => {
            let basis = match (&args.basis, args.stage) {
                (_, Some(stage)) => ObBasis::for_stage(stage)?,
                (Some(b), None) => match b.as_str() {
                    "base_only" => ObBasis::BaseOnly,
                    "risk_adjusted" => ObBasis::RiskAdjusted,
                    other => bail!("unknown basis `{other}` (expected base_only or risk_adjusted)"),
                },
                (None, None) => bail!("one of --basis or --stage is required"),
            };
            let e = appraisal::compose_estimate(args.base, args.mean_risk, args.uplift, basis)?
                .with_price_basis(args.price_basis.clone());
            let _ = writeln!(stdout, "base cost        {}", fmt_money(e.base_cost));
            let _ = writeln!(stdout, "risk adjustment  {}", fmt_money(e.risk_adjustment));
            let _ = writeln!(stdout, "OB adjustment    {}", fmt_money(e.ob_adjustment));
            let _ = writeln!(stdout, "total            {}", fmt_money(e.total));
            ("estimate".to_string(), args.out.clone(), serde_json::to_value(&e)?)
        }

        Command::Replay { report } => return replay(report),
    };

    let manifest = RunManifest {
        toolkit: TOOLKIT.to_string(),
        version: VERSION.to_string(),
        subcommand,
        arguments: recorded_arguments(arguments),
        inputs,
        parameters: serde_json::to_value(&cli.command)?,
        outputs: out_path.iter().map(|p| path_string(p)).collect(),
    };
    let mut result = result;
    if !warnings.is_empty() {
        result["warnings"] = json!(warnings);
    }
    let mut report = serde_json::to_string_pretty(&Report { manifest, result })?;
    report.push('\n');
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    Ok(Outcome { stdout, report, out_path, exit_code })
}

fn fmt_p(p: f64) -> String {
    let pct = p * 100.0;
    if (pct - pct.round()).abs() < 1e-9 {
        format!("{}", pct.round())
    } else {
        format!("{pct}")
    }
}

fn replay(report_path: &Path) -> anyhow::Result<Outcome> {
    let text = std::fs::read_to_string(report_path)
        .with_context(|| format!("reading {}", report_path.display()))?;
    let report: Report = serde_json::from_str(&text).context("parsing report")?;
    let argv = std::iter::once(TOOLKIT.to_string()).chain(report.manifest.arguments.iter().cloned());
    let cli = Cli::try_parse_from(argv).context("parsing recorded arguments")?;
    if matches!(cli.command, Command::Replay { .. }) {
        bail!("refusing to replay a replay");
    }
    let fresh = execute(&cli, &report.manifest.arguments)?;
    let identical = fresh.report == text;
    let stdout = if identical {
        format!("reproduced {} byte-for-byte\n", report_path.display())
    } else {
        format!("report {} differs from a fresh run\n", report_path.display())
    };
    Ok(Outcome {
        stdout,
        report: fresh.report,
        out_path: None,
        exit_code: if identical { 0 } else { 1 },
    })
}

/// Parses `args` (without the program name), executes, writes the report and
/// returns the exit status. Usage and runtime errors exit 1.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(std::iter::once(TOOLKIT.to_string()).chain(args.iter().cloned())) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match execute(&cli, &args).and_then(|o| {
        if let Some(path) = &o.out_path {
            std::fs::write(path, &o.report).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(o)
    }) {
        Ok(o) => {
            print!("{}", o.stdout);
            o.exit_code
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}
