//! Command-line front end. `dispatch` returns the process exit code:
//! 0 on success, 1 when an inequality is violated beyond the threshold,
//! 2 on usage errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::acceptance::{Suite, CRITERIA};
use crate::curvature::{curvature_report, verdict, CdeOptions};
use crate::error::{Error, Result};
use crate::estimates::{hamilton_check, liyau_global_check, liyau_local_check, InequalityReport};
use crate::graph::{generate, Family, MeasureKind, WeightedGraph, Weighting};
use crate::harnack::{harnack_check, kernel_bounds_check, rho_compute, Alpha, HarnackReport};
use crate::heat::{delta_like, evolve, linear_grid, log_grid, HeatSolution};
use crate::profiles::RateProfile;
use crate::report::{extended_float, fmt_float, render, to_json_string, Emit, Format, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "licurv", version, about = "Curvature, heat flow and Li-Yau estimate checks on weighted graphs")]
struct Cli {
    /// Replay a stored run configuration instead of parsing a subcommand.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Store the resolved run configuration as JSON.
    #[arg(long, value_name = "FILE")]
    save_config: Option<PathBuf>,

    #[command(flatten)]
    common: Common,

    #[command(subcommand)]
    command: Option<Command>,
}

/// Options shared by every subcommand.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct Common {
    /// Generator spec (`torus:2:5`, `path:4`, `random:12:0.3:7`, ...) or a graph JSON file.
    #[arg(long, global = true, default_value = "torus:2:5")]
    pub graph: String,
    /// `unit` or `random:SEED`.
    #[arg(long, global = true, default_value = "unit")]
    pub weights: String,
    /// `unit`, `degree` or `random:SEED`.
    #[arg(long, global = true, default_value = "unit")]
    pub measure: String,
    /// Report destination; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// `csv` or `json`; inferred from the output extension by default.
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// Minimum slack below which the exit code is 1.
    #[arg(long, global = true, default_value_t = -1e-9, allow_hyphen_values = true)]
    pub threshold: f64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct Flow {
    /// `log:A:B:M`, `lin:A:B:M` or a comma separated list.
    #[arg(long, default_value = "log:0.05:5:25")]
    pub tgrid: String,
    /// `delta:X` (1 at X, 1e-6 elsewhere), `const:C` or `random` (uses --seed).
    #[arg(long, default_value = "delta:0")]
    pub u0: String,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct Estimate {
    /// `power:G`, `powercubic:G`, `sinh2`, `expsq:G`, `expbeta:B:-` or `expbeta:B:+`.
    #[arg(long, default_value = "power:2")]
    pub profile: String,
    #[arg(long = "K", default_value_t = 0.0)]
    pub k: f64,
    #[arg(long, default_value_t = 4.0)]
    #[serde(with = "extended_float")]
    pub n: f64,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Write the graph as JSON.
    Gen,
    /// Best CDE constant at every vertex.
    Curvature {
        #[arg(long, default_value_t = 4.0)]
        #[serde(with = "extended_float")]
        n: f64,
        /// Report whether CDE(n, K) holds; exit 1 when it does not.
        #[arg(long = "K", allow_hyphen_values = true)]
        k: Option<f64>,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        #[arg(long, default_value_t = 512)]
        samples: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Solve the heat equation and write (t, vertex, u).
    Heat {
        #[command(flatten)]
        flow: Flow,
    },
    /// Global Li-Yau estimate.
    Liyau {
        #[command(flatten)]
        estimate: Estimate,
        #[command(flatten)]
        flow: Flow,
    },
    /// Li-Yau estimate on a ball.
    LiyauLocal {
        #[command(flatten)]
        estimate: Estimate,
        #[command(flatten)]
        flow: Flow,
        #[arg(long, default_value_t = 0)]
        x0: usize,
        #[arg(long = "R", default_value_t = 2)]
        r: usize,
    },
    /// Hamilton's estimate in both forms.
    Hamilton {
        #[arg(long = "K", default_value_t = 0.0)]
        k: f64,
        #[command(flatten)]
        flow: Flow,
    },
    /// Harnack inequality between (x, T1) and (y, T2).
    Harnack {
        #[command(flatten)]
        estimate: Estimate,
        #[arg(long, default_value = "delta:0")]
        u0: String,
        #[arg(long)]
        x: usize,
        #[arg(long)]
        y: usize,
        #[arg(long = "T1")]
        t1: f64,
        #[arg(long = "T2")]
        t2: f64,
    },
    /// Path cost between (x, T1) and (y, T2).
    Rho {
        #[arg(long)]
        x: usize,
        #[arg(long)]
        y: usize,
        #[arg(long = "T1")]
        t1: f64,
        #[arg(long = "T2")]
        t2: f64,
        /// `const:C` or `affine:A:B`.
        #[arg(long, default_value = "const:1")]
        alpha: String,
        #[arg(long)]
        k_max: Option<usize>,
    },
    /// Heat kernel ratio bands.
    Kernel {
        #[arg(long, default_value_t = 0)]
        x: usize,
        #[arg(long, default_value_t = 0)]
        y: usize,
        #[arg(long, default_value = "log:1.5:20:30")]
        tgrid: String,
        #[arg(long = "K", default_value_t = 0.0)]
        k: f64,
        #[arg(long, default_value_t = 4.0)]
        #[serde(with = "extended_float")]
        n: f64,
    },
    /// Run the acceptance suite.
    Selftest {
        /// Run only these criteria.
        #[arg(long)]
        criterion: Vec<usize>,
    },
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub common: Common,
    pub command: Command,
}

impl RunConfig {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        fs::write(path, to_json_string(self)?)?;
        Ok(())
    }
}

/// Parses `argv` (including the program name) and runs it.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let config = match (&cli.config, cli.command) {
        (Some(path), _) => match RunConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: cannot load {}: {e}", path.display());
                return EXIT_USAGE;
            }
        },
        (None, Some(command)) => RunConfig { common: cli.common, command },
        (None, None) => {
            eprintln!("error: a subcommand is required (see --help)");
            return EXIT_USAGE;
        }
    };
    if let Some(path) = &cli.save_config {
        if let Err(e) = config.save(path) {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    }
    configure_threads();
    match run(&config) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("LICURV_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // A second build in the same process fails harmlessly.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

pub fn parse_graph(common: &Common) -> Result<WeightedGraph> {
    let spec = common.graph.as_str();
    if let Some(path) = spec.strip_prefix("file:") {
        return WeightedGraph::load(path);
    }
    if spec.ends_with(".json") {
        return WeightedGraph::load(spec);
    }
    let family: Family = spec.parse()?;
    let weights: Weighting = common.weights.parse()?;
    let measure: MeasureKind = common.measure.parse()?;
    generate(family, weights, measure)
}

pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("time grid '{spec}': {e}")));
    let count = |s: &str| s.parse::<usize>().map_err(|e| Error::Parse(format!("time grid '{spec}': {e}")));
    match parts.as_slice() {
        ["log", a, b, m] => log_grid(num(a)?, num(b)?, count(m)?),
        ["lin", a, b, m] => linear_grid(num(a)?, num(b)?, count(m)?),
        [list] => list.split(',').map(|s| num(s.trim())).collect(),
        _ => Err(Error::Parse(format!("unknown time grid '{spec}' (log:A:B:M, lin:A:B:M or a list)"))),
    }
}

pub fn parse_initial(g: &WeightedGraph, spec: &str, seed: u64) -> Result<Vec<f64>> {
    use rand::{Rng, SeedableRng};
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::Parse(format!("unknown initial data '{spec}' (delta:X, const:C or random)"));
    match parts.as_slice() {
        ["delta", x] => delta_like(g, x.parse().map_err(|_| bad())?, 1e-6),
        ["const", c] => Ok(vec![c.parse().map_err(|_| bad())?; g.vertex_count()]),
        ["random"] => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            Ok((0..g.vertex_count()).map(|_| rng.gen_range(0.1..2.0)).collect())
        }
        _ => Err(bad()),
    }
}

fn solve(g: &WeightedGraph, flow: &Flow, seed: u64) -> Result<HeatSolution> {
    let u0 = parse_initial(g, &flow.u0, seed)?;
    evolve(g, &u0, &parse_grid(&flow.tgrid)?)
}

struct HeatRows<'a>(&'a HeatSolution);

impl Emit for HeatRows<'_> {
    fn table(&self) -> Table {
        let mut table = Table::new(vec!["t", "vertex", "u"]);
        for r in self.0.rows() {
            table.push(vec![fmt_float(r.t), r.vertex.to_string(), fmt_float(r.u)]);
        }
        table
    }

    fn json(&self) -> Result<String> {
        to_json_string(&self.0.rows())
    }
}

/// Several inequality reports written as one table.
struct ReportSet(Vec<InequalityReport>);

impl Emit for ReportSet {
    fn table(&self) -> Table {
        let mut tables = self.0.iter().map(|r| r.table());
        let mut first = tables.next().unwrap_or_else(|| Table::new(vec![]));
        for t in tables {
            first.rows.extend(t.rows);
        }
        first
    }

    fn json(&self) -> Result<String> {
        to_json_string(&self.0.iter().map(|r| r.summary()).collect::<Vec<_>>())
    }
}

struct GraphJson(WeightedGraph);

impl Emit for GraphJson {
    fn table(&self) -> Table {
        let mut table = Table::new(vec!["u", "v", "weight"]);
        for (u, v, w) in self.0.edges() {
            table.push(vec![u.to_string(), v.to_string(), fmt_float(w)]);
        }
        table
    }

    fn json(&self) -> Result<String> {
        let mut text = self.0.to_json()?;
        if !text.ends_with('\n') {
            text.push('\n');
        }
        Ok(text)
    }
}

struct Lines(Vec<String>);

impl Emit for Lines {
    fn table(&self) -> Table {
        let mut table = Table::new(vec!["line"]);
        for l in &self.0 {
            table.push(vec![l.clone()]);
        }
        table
    }

    fn json(&self) -> Result<String> {
        to_json_string(&self.0)
    }
}

fn write(common: &Common, report: &impl Emit, default: Format) -> Result<()> {
    let format = match (&common.format, &common.out) {
        (Some(f), _) => f.parse()?,
        (None, Some(path)) if path.extension().is_some() => Format::for_path(path),
        _ => default,
    };
    let text = render(report, format)?;
    match &common.out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn verdict_code(min_slack: Option<f64>, threshold: f64) -> i32 {
    match min_slack {
        Some(m) if m < threshold => EXIT_VIOLATION,
        _ => EXIT_OK,
    }
}

fn min_opt(values: impl IntoIterator<Item = Option<f64>>) -> Option<f64> {
    values.into_iter().flatten().reduce(f64::min)
}

/// Runs a resolved configuration and returns the exit code.
pub fn run(config: &RunConfig) -> Result<i32> {
    let common = &config.common;
    match &config.command {
        Command::Selftest { criterion } => {
            let suite = Suite::new();
            let ids: Vec<usize> = if criterion.is_empty() { (1..=CRITERIA.len()).collect() } else { criterion.clone() };
            if let Some(bad) = ids.iter().find(|&&i| i == 0 || i > CRITERIA.len()) {
                return Err(Error::InvalidArgument(format!("criterion {bad} does not exist (1 to 10)")));
            }
            let results: Vec<_> = ids.iter().map(|&i| suite.run(i)).collect();
            let lines: Vec<String> = results.iter().map(|r| r.line()).collect();
            if common.out.is_some() {
                write(common, &Lines(lines.clone()), Format::Csv)?;
            }
            for l in &lines {
                println!("{l}");
            }
            Ok(if results.iter().all(|r| r.passed()) { EXIT_OK } else { EXIT_VIOLATION })
        }
        Command::Rho { x, y, t1, t2, alpha, k_max } => {
            let g = parse_graph(common)?;
            let alpha: Alpha = alpha.parse()?;
            let r = rho_compute(&g, *x, *y, *t1, *t2, &alpha, *k_max)?;
            write(common, &r, Format::Json)?;
            Ok(EXIT_OK)
        }
        command => {
            let g = parse_graph(common)?;
            run_on_graph(common, command, g)
        }
    }
}

fn run_on_graph(common: &Common, command: &Command, g: WeightedGraph) -> Result<i32> {
    let threshold = common.threshold;
    match command {
        Command::Gen => {
            write(common, &GraphJson(g), Format::Json)?;
            Ok(EXIT_OK)
        }
        Command::Curvature { n, k, restarts, samples, tol } => {
            let opts = CdeOptions { restarts: *restarts, samples: *samples, seed: common.seed, tol: *tol };
            let report = curvature_report(&g, *n, &opts)?;
            write(common, &report, Format::Csv)?;
            Ok(match k {
                Some(k) if !verdict(&report, *k, *tol).passed => EXIT_VIOLATION,
                _ => EXIT_OK,
            })
        }
        Command::Heat { flow } => {
            let sol = solve(&g, flow, common.seed)?;
            write(common, &HeatRows(&sol), Format::Csv)?;
            Ok(EXIT_OK)
        }
        Command::Liyau { estimate, flow } => {
            let sol = solve(&g, flow, common.seed)?;
            let profile: RateProfile = estimate.profile.parse()?;
            let report = liyau_global_check(&sol, &profile, estimate.k, estimate.n)?;
            write(common, &report, Format::Csv)?;
            Ok(verdict_code(report.min_slack(), threshold))
        }
        Command::LiyauLocal { estimate, flow, x0, r } => {
            let sol = solve(&g, flow, common.seed)?;
            let profile: RateProfile = estimate.profile.parse()?;
            let report = liyau_local_check(&sol, &profile, estimate.k, estimate.n, *x0, *r)?;
            write(common, &report, Format::Csv)?;
            Ok(verdict_code(report.min_slack(), threshold))
        }
        Command::Hamilton { k, flow } => {
            let sol = solve(&g, flow, common.seed)?;
            let (a, b) = hamilton_check(&sol, *k)?;
            let code = verdict_code(min_opt([a.min_slack(), b.min_slack()]), threshold);
            write(common, &ReportSet(vec![a, b]), Format::Csv)?;
            Ok(code)
        }
        Command::Harnack { estimate, u0, x, y, t1, t2 } => {
            let u0 = parse_initial(&g, u0, common.seed)?;
            let sol = evolve(&g, &u0, &[*t1, *t2])?;
            let profile: RateProfile = estimate.profile.parse()?;
            let check = harnack_check(&sol, *x, *y, *t1, *t2, &profile, estimate.k, estimate.n)?;
            let report = HarnackReport { profile: profile.spec(), k: estimate.k, n: estimate.n, checks: vec![check] };
            write(common, &report, Format::Csv)?;
            Ok(verdict_code(report.overall_min_slack(), threshold))
        }
        Command::Kernel { x, y, tgrid, k, n } => {
            let report = kernel_bounds_check(&g, *x, *y, &parse_grid(tgrid)?, *k, *n)?;
            write(common, &report, Format::Csv)?;
            Ok(EXIT_OK)
        }
        Command::Rho { .. } | Command::Selftest { .. } => unreachable!("handled before graph construction"),
    }
}
