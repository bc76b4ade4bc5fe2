use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use macjsc::gaussian::{
    gaussian_source_conditions, gmac_outer_bounds, lt_rate_region, rho_feasibility_interval,
    rho_sweep, GaussianSourceParams, GmacParams, LtRates, OuterBounds, RhoInterval,
    SourceEntropies, SweepRow,
};
use macjsc::mc::{
    estimate_all, lemma_on_identity, IdentityCheck, InputModel, McConfig, MiEstimate, Target,
};
use macjsc::mixture::{fit_mixture, FitOptions, FitResult};
use macjsc::region::{
    build_special_case, check_multiuser, check_orthogonal, check_theorem1, CaseKind, CaseParams,
    MultiSpec, RegionReport, SystemSpec,
};
use macjsc::report::{reproduce, sig6, ClaimReport, ReportOptions};
use macjsc::sim::{run_sweep, CodebookConfig, SimResult};
use macjsc::{Error, JointPmf, Result};

const EXIT_INFEASIBLE: u8 = 2;
const EXIT_ERROR: u8 = 1;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(
    name = "macjsc",
    version,
    about = "Correlated sources over multiple access channels with side information"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Entropies and pairwise informations of a joint pmf or of a system's source.
    Info(Common),
    /// Check a two-user system, a special case, or an orthogonal-link system.
    Region(Common),
    /// Check an M-user system.
    Multi(Common),
    /// Gaussian MAC bounds, correlation interval and sweeps.
    Gmac(Common),
    /// Fit per-symbol Gaussian mixtures to a correlated Gaussian target.
    Fit(Common),
    /// Monte Carlo mutual informations for mixture or Gaussian inputs.
    Mc(Common),
    /// Random-coding simulation at one or more blocklengths.
    Sim(Common),
    /// Recompute every reference number and compare.
    Paper(Common),
}

#[derive(Args)]
struct Common {
    /// Input JSON file.
    #[arg(long, visible_alias = "config")]
    spec: Option<PathBuf>,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Simulation trials per blocklength.
    #[arg(long)]
    trials: Option<usize>,
    /// Monte Carlo sample count.
    #[arg(long)]
    n: Option<usize>,
    /// Mixture fit starts.
    #[arg(long)]
    starts: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

/// A command's result: its JSON value, text and CSV renderings, and whether
/// it reports infeasibility.
struct Output {
    json: String,
    text: String,
    csv: String,
    infeasible: bool,
}

impl Output {
    fn new<T: Serialize>(value: &T, text: String, csv: String) -> Result<Self> {
        Ok(Output {
            json: serde_json::to_string_pretty(value)? + "\n",
            text: text + "\n",
            csv,
            infeasible: false,
        })
    }
}

fn read<T: for<'de> Deserialize<'de>>(path: &Option<PathBuf>) -> Result<T> {
    let path = path
        .as_ref()
        .ok_or_else(|| Error::MissingParam("--spec".into()))?;
    let text =
        fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

fn region_csv(reports: &[RegionReport]) -> String {
    let mut out = String::from("report,label,lhs,rhs,margin,status\n");
    for (k, r) in reports.iter().enumerate() {
        for row in &r.rows {
            out.push_str(&format!(
                "{k},\"{}\",{},{},{},{}\n",
                row.label,
                sig6(row.lhs),
                sig6(row.rhs),
                sig6(row.margin),
                serde_json::to_value(row.status)
                    .expect("status serializes")
                    .as_str()
                    .unwrap_or_default()
            ));
        }
    }
    out
}

#[derive(Serialize)]
struct InfoReport {
    variables: Vec<VariableInfo>,
    joint_entropy: f64,
    pairwise: Vec<PairInfo>,
}

#[derive(Serialize)]
struct VariableInfo {
    name: String,
    size: usize,
    entropy: f64,
}

#[derive(Serialize)]
struct PairInfo {
    a: String,
    b: String,
    mutual_info: f64,
}

fn info(c: &Common) -> Result<Output> {
    let value: serde_json::Value = read(&c.spec)?;
    let pmf: JointPmf = match value.get("source") {
        Some(s) => serde_json::from_value(s.clone())?,
        None => serde_json::from_value(value)?,
    };
    let names: Vec<String> = pmf.names().map(String::from).collect();
    let all: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut variables = Vec::new();
    for v in pmf.variables() {
        variables.push(VariableInfo {
            name: v.name.clone(),
            size: v.size,
            entropy: pmf.entropy(&[&v.name], &[])?,
        });
    }
    let mut pairwise = Vec::new();
    for (i, a) in all.iter().enumerate() {
        for b in &all[i + 1..] {
            pairwise.push(PairInfo {
                a: a.to_string(),
                b: b.to_string(),
                mutual_info: pmf.mutual_info(&[a], &[b], &[])?,
            });
        }
    }
    let r = InfoReport {
        joint_entropy: pmf.entropy(&all, &[])?,
        variables,
        pairwise,
    };
    let mut text = format!("H({}) = {}", all.join(","), sig6(r.joint_entropy));
    let mut csv = String::from("quantity,value\n");
    for v in &r.variables {
        text.push_str(&format!(
            "\nH({}) = {}  (alphabet {})",
            v.name,
            sig6(v.entropy),
            v.size
        ));
        csv.push_str(&format!("H({}),{}\n", v.name, sig6(v.entropy)));
    }
    for p in &r.pairwise {
        text.push_str(&format!("\nI({};{}) = {}", p.a, p.b, sig6(p.mutual_info)));
        csv.push_str(&format!("I({};{}),{}\n", p.a, p.b, sig6(p.mutual_info)));
    }
    Output::new(&r, text, csv)
}

#[derive(Deserialize)]
struct CaseInput {
    case: CaseKind,
    #[serde(default)]
    params: CaseParams,
}

#[derive(Deserialize)]
struct OrthogonalInput {
    orthogonal: SystemSpec,
    y_sizes: (usize, usize),
}

fn region(c: &Common) -> Result<Output> {
    let value: serde_json::Value = read(&c.spec)?;
    let reports = if value.get("case").is_some() {
        let input: CaseInput = serde_json::from_value(value)?;
        build_special_case(input.case, &input.params)?.check()?
    } else if value.get("orthogonal").is_some() {
        let input: OrthogonalInput = serde_json::from_value(value)?;
        vec![check_orthogonal(&input.orthogonal, input.y_sizes)?]
    } else {
        vec![check_theorem1(&serde_json::from_value::<SystemSpec>(
            value,
        )?)?]
    };
    let text = reports
        .iter()
        .map(|r| r.to_string())
        .collect::<Vec<_>>()
        .join("\n\n");
    let csv = region_csv(&reports);
    let infeasible = reports.iter().any(|r| !r.feasible);
    let mut out = if reports.len() == 1 {
        Output::new(&reports[0], text, csv)?
    } else {
        Output::new(&reports, text, csv)?
    };
    out.infeasible = infeasible;
    Ok(out)
}

fn multi(c: &Common) -> Result<Output> {
    let r = check_multiuser(&read::<MultiSpec>(&c.spec)?)?;
    let mut out = Output::new(&r, r.to_string(), region_csv(std::slice::from_ref(&r)))?;
    out.infeasible = !r.feasible;
    Ok(out)
}

#[derive(Deserialize)]
struct SweepRange {
    lo: f64,
    hi: f64,
    points: usize,
}

#[derive(Deserialize)]
struct GmacInput {
    channel: GmacParams,
    #[serde(default)]
    source: Option<JointPmf>,
    #[serde(default)]
    gaussian_source: Option<GaussianSourceParams>,
    #[serde(default)]
    sweep: Option<SweepRange>,
}

#[derive(Serialize)]
struct GmacReport {
    bounds: OuterBounds,
    #[serde(skip_serializing_if = "Option::is_none")]
    lt: Option<LtRates>,
    #[serde(skip_serializing_if = "Option::is_none")]
    interval: Option<RhoInterval>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gaussian_source: Option<RegionReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    sweep: Vec<SweepRow>,
}

fn opt6(x: Option<f64>) -> String {
    x.map(sig6).unwrap_or_else(|| "none".into())
}

fn gmac(c: &Common) -> Result<Output> {
    let input: GmacInput = read(&c.spec)?;
    let p = input.channel;
    let bounds = gmac_outer_bounds(&p)?;
    let lt = (p.rho.abs() < 1.0)
        .then(|| lt_rate_region(&p))
        .transpose()?;
    let interval = match &input.source {
        Some(pmf) => {
            let names: Vec<String> = pmf.names().map(String::from).collect();
            if names.len() != 2 {
                return Err(Error::InvalidParam(
                    "gmac source must have exactly two variables".into(),
                ));
            }
            let (a, b) = (names[0].as_str(), names[1].as_str());
            let s = SourceEntropies {
                h1: pmf.entropy(&[a], &[b])?,
                h2: pmf.entropy(&[b], &[a])?,
                hsum: pmf.entropy(&[a, b], &[])?,
                mi: pmf.mutual_info(&[a], &[b], &[])?,
            };
            Some(rho_feasibility_interval(&p, &s)?)
        }
        None => None,
    };
    let gaussian_source = input
        .gaussian_source
        .map(|g| gaussian_source_conditions(&g, &p))
        .transpose()?;
    let sweep = match input.sweep {
        Some(s) => rho_sweep(&p, s.lo, s.hi, s.points)?,
        None => Vec::new(),
    };
    let mut text = format!(
        "I(X1;Y|X2) = {}\nI(X2;Y|X1) = {}\nI(X1,X2;Y) = {}",
        sig6(bounds.i1),
        sig6(bounds.i2),
        sig6(bounds.isum)
    );
    if let Some(lt) = &lt {
        text.push_str(&format!(
            "\nLT rates: R1 <= {}, R2 <= {}, R1+R2 <= {}",
            sig6(lt.r1_max),
            sig6(lt.r2_max),
            sig6(lt.rsum_max)
        ));
    }
    if let Some(iv) = &interval {
        text.push_str(&format!(
            "\ncaps {} / {}, sum floor {}, correlation bound {}\ninterval: {}",
            opt6(iv.caps[0]),
            opt6(iv.caps[1]),
            opt6(iv.sum_floor),
            sig6(iv.lemma3),
            iv.interval
                .map(|(lo, hi)| format!("[{}, {}]", sig6(lo), sig6(hi)))
                .unwrap_or_else(|| "empty".into())
        ));
    }
    if let Some(r) = &gaussian_source {
        text.push('\n');
        text.push_str(&r.to_string());
    }
    let mut csv = String::from("rho,i1,i2,isum,lt_r1,lt_r2,lt_rsum\n");
    let rows = if sweep.is_empty() {
        vec![SweepRow {
            rho: p.rho,
            i1: bounds.i1,
            i2: bounds.i2,
            isum: bounds.isum,
            lt_r1: lt.map_or(f64::NAN, |l| l.r1_max),
            lt_r2: lt.map_or(f64::NAN, |l| l.r2_max),
            lt_rsum: lt.map_or(f64::NAN, |l| l.rsum_max),
        }]
    } else {
        sweep.clone()
    };
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            sig6(r.rho),
            sig6(r.i1),
            sig6(r.i2),
            sig6(r.isum),
            sig6(r.lt_r1),
            sig6(r.lt_r2),
            sig6(r.lt_rsum)
        ));
    }
    let infeasible = interval.as_ref().is_some_and(|iv| iv.interval.is_none())
        || gaussian_source.as_ref().is_some_and(|r| !r.feasible);
    let report = GmacReport {
        bounds,
        lt,
        interval,
        gaussian_source,
        sweep,
    };
    let mut out = Output::new(&report, text, csv)?;
    out.infeasible = infeasible;
    Ok(out)
}

#[derive(Deserialize)]
struct FitInput {
    source: JointPmf,
    rho: f64,
    #[serde(default = "default_counts")]
    counts: Vec<usize>,
    #[serde(default)]
    options: FitOptions,
}

fn default_counts() -> Vec<usize> {
    vec![2]
}

fn fit(c: &Common) -> Result<Output> {
    let mut input: FitInput = read(&c.spec)?;
    if let Some(seed) = c.seed {
        input.options.seed = seed;
    }
    if let Some(starts) = c.starts {
        input.options.starts = starts;
    }
    let r: FitResult = fit_mixture(&input.source, input.rho, &input.counts, &input.options)?;
    let mut text = format!(
        "target rho {}  induced rho {}\nnormalized L2 distortion {}\nlargest constraint residual {}\nbest start {} of {}",
        sig6(r.rho_target),
        sig6(r.induced_rho),
        sig6(r.normalized_distortion),
        sig6(r.constraint_residuals.max_abs()),
        r.best_start,
        r.starts
    );
    let mut csv = String::from("source,symbol,weight,mean,var\n");
    for (s, symbols) in r.spec.sources.iter().enumerate() {
        for (u, comps) in symbols.iter().enumerate() {
            for comp in comps {
                text.push_str(&format!(
                    "\nX{} | U{}={}: {} x N({}, {})",
                    s + 1,
                    s + 1,
                    u,
                    sig6(comp.weight),
                    sig6(comp.mean),
                    sig6(comp.var)
                ));
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    s + 1,
                    u,
                    sig6(comp.weight),
                    sig6(comp.mean),
                    sig6(comp.var)
                ));
            }
        }
    }
    Output::new(&r, text, csv)
}

#[derive(Deserialize)]
struct McInput {
    input: InputModel,
    #[serde(default)]
    config: McConfig,
}

#[derive(Serialize)]
struct McReport {
    config: McConfig,
    estimates: Vec<McRow>,
    identity: IdentityCheck,
}

#[derive(Serialize)]
struct McRow {
    target: Target,
    #[serde(flatten)]
    estimate: MiEstimate,
}

fn mc(c: &Common) -> Result<Output> {
    let mut input: McInput = read(&c.spec)?;
    if let Some(seed) = c.seed {
        input.config.seed = seed;
    }
    if let Some(n) = c.n {
        input.config.n = n;
    }
    let estimates: Vec<McRow> = estimate_all(&input.input, &input.config)?
        .into_iter()
        .map(|(target, estimate)| McRow { target, estimate })
        .collect();
    let identity = lemma_on_identity(&input.input, &input.config)?;
    let mut text = String::new();
    let mut csv = String::from("target,value,stderr,n\n");
    for r in &estimates {
        text.push_str(&format!(
            "{:<14} {} ± {}\n",
            r.target.label(),
            sig6(r.estimate.value),
            sig6(r.estimate.stderr)
        ));
        csv.push_str(&format!(
            "{},{},{},{}\n",
            r.target,
            sig6(r.estimate.value),
            sig6(r.estimate.stderr),
            r.estimate.n
        ));
    }
    text.push_str(&format!(
        "identity gap {} (stderr {})",
        sig6(identity.gap),
        sig6(identity.stderr)
    ));
    let report = McReport {
        config: input.config,
        estimates,
        identity,
    };
    Output::new(&report, text, csv)
}

#[derive(Deserialize)]
struct SimInput {
    #[serde(flatten)]
    config: CodebookConfig,
    #[serde(default)]
    lengths: Vec<usize>,
}

fn sim(c: &Common) -> Result<Output> {
    let mut input: SimInput = read(&c.spec)?;
    if let Some(seed) = c.seed {
        input.config.seed = seed;
    }
    if let Some(trials) = c.trials {
        input.config.trials = trials;
    }
    let lengths = if input.lengths.is_empty() {
        vec![input.config.n]
    } else {
        input.lengths
    };
    let results: Vec<SimResult> = run_sweep(&input.config, &lengths)?;
    let mut text = String::new();
    let mut csv =
        String::from("n,trials,block_error_rate,half_width,e1,erasure,e2,e3,e3_prime,e4\n");
    for r in &results {
        let e = &r.event_rates;
        text.push_str(&format!(
            "n={:<3} error {} ± {}  codebooks {:?}  E1 {} erasure {} E2 {} E3 {} E3' {} E4 {}\n",
            r.n,
            sig6(r.block_error_rate),
            sig6(r.block_error_half_width),
            r.codebook_sizes,
            r.counts.e1,
            r.counts.erasure,
            r.counts.e2,
            r.counts.e3,
            r.counts.e3_prime,
            r.counts.e4
        ));
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.n,
            r.trials,
            sig6(r.block_error_rate),
            sig6(r.block_error_half_width),
            sig6(e.e1),
            sig6(e.erasure),
            sig6(e.e2),
            sig6(e.e3),
            sig6(e.e3_prime),
            sig6(e.e4)
        ));
    }
    Output::new(&results, text.trim_end().to_string(), csv)
}

fn paper(c: &Common) -> Result<Output> {
    let mut opts: ReportOptions = match &c.spec {
        Some(_) => read(&c.spec)?,
        None => ReportOptions::default(),
    };
    if let Some(seed) = c.seed {
        opts.seed = seed;
    }
    if let Some(trials) = c.trials {
        opts.sim_trials = trials;
    }
    if let Some(n) = c.n {
        opts.mc_samples = n;
    }
    if let Some(starts) = c.starts {
        opts.fit_starts = starts;
    }
    let r: ClaimReport = reproduce(&opts)?;
    Output::new(&r, r.to_string(), r.to_csv())
}

fn emit(out: &Output, format: Format, path: Option<&Path>) -> Result<()> {
    let body = match format {
        Format::Json => &out.json,
        Format::Text => &out.text,
        Format::Csv => &out.csv,
    };
    match path {
        Some(p) => fs::write(p, body).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("MACJSC_THREADS") else {
        return Ok(());
    };
    let n: usize = v.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Error::InvalidParam(format!(
            "MACJSC_THREADS must be a positive integer, got `{v}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidParam(e.to_string()))
}

fn run(cli: &Cli) -> Result<bool> {
    configure_threads()?;
    let (common, out) = match &cli.command {
        Command::Info(c) => (c, info(c)?),
        Command::Region(c) => (c, region(c)?),
        Command::Multi(c) => (c, multi(c)?),
        Command::Gmac(c) => (c, gmac(c)?),
        Command::Fit(c) => (c, fit(c)?),
        Command::Mc(c) => (c, mc(c)?),
        Command::Sim(c) => (c, sim(c)?),
        Command::Paper(c) => (c, paper(c)?),
    };
    emit(&out, common.format, common.out.as_deref())?;
    Ok(out.infeasible)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(EXIT_INFEASIBLE),
        Err(Error::MissingParam(p)) if p == "--spec" => {
            eprintln!("error: this command needs --spec <file>");
            ExitCode::from(EXIT_USAGE)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
