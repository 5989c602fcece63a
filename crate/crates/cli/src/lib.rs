//! Command-line harness: worked examples, chain evolution, simulation,
//! kernel composition, clustering and a bundled invariant suite.
//!
//! Every command produces a [`Report`]; the process exits 0 when all of its
//! checks pass, 1 when any fails and 2 on usage or input errors.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use pbn::docs::{cluster, relevance, row_stochastic, SparseCorpus};
use pbn::markov::{
    apd_evolution, chapman_kolmogorov_continuous, chapman_kolmogorov_discrete,
    heisenberg_expectation, kolmogorov_backward_residual, kolmogorov_forward_residual,
    read_matrix, read_vector, schrodinger_expectation, Chain, Elapsed, Generator,
    StochasticMatrix, SystemPKet,
};
use pbn::processes::{
    sample_moments, simulate, write_paths_csv, BrownianSpec, PoissonSpec, ProcessSpec,
    SimulationConfig, WienerSpec,
};
use pbn::prob::{Event, Observable, SampleSpace};
use pbn::wick::{compose_kernels, InducedDiffusion, KernelSlice};
use pbn::Error;
use serde_json::{Map, Number, Value};

/// Largest corpus for which the dense similarity check is run.
const DENSE_CHECK_LIMIT: usize = 2000;

#[derive(Debug, Parser)]
#[command(name = "pbn", version, about = "Probability bracket numerics")]
pub struct Cli {
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    pub report: Option<PathBuf>,
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Suppress the stdout report and warnings.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fair-die example: mean, P(even), P(i|even), second moment, variance.
    Die(DieArgs),
    /// Expectation of an observable over a sample space, optionally conditioned.
    Expect(ExpectArgs),
    /// Evolve a P-ket under a discrete or continuous chain.
    Evolve(EvolveArgs),
    /// Sample paths of a Poisson, Wiener or Brownian process.
    Simulate(SimulateArgs),
    /// Sliced composition of the free induced-diffusion kernel.
    Kernel(KernelArgs),
    /// Relevance matrix and threshold clusters of a TSV corpus.
    Cluster(ClusterArgs),
    /// Run every invariant suite on the shipped fixtures.
    Check(CheckArgs),
}

#[derive(Debug, Clone, Args, Default)]
pub struct DieArgs {
    /// Sample space JSON `{"labels": [...], "masses": [...]}`; defaults to a fair die.
    #[arg(long, value_name = "FILE")]
    pub space: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ExpectArgs {
    #[arg(long, value_name = "FILE")]
    pub space: PathBuf,
    /// Observable values, one per outcome; defaults to numeric labels.
    #[arg(long, value_delimiter = ',')]
    pub values: Option<Vec<f64>>,
    /// Outcome labels of the conditioning event.
    #[arg(long, value_delimiter = ',')]
    pub given: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Dtmc,
    Ctmc,
}

#[derive(Debug, Clone, Args)]
pub struct EvolveArgs {
    #[arg(long, value_enum)]
    pub mode: Mode,
    /// Transition (dtmc) or rate (ctmc) matrix, JSON or CSV.
    #[arg(long, value_name = "FILE")]
    pub matrix: PathBuf,
    /// Initial masses, JSON or CSV; defaults to uniform.
    #[arg(long, value_name = "FILE")]
    pub init: Option<PathBuf>,
    /// Elapsed time (ctmc).
    #[arg(long, conflicts_with = "k")]
    pub t: Option<f64>,
    /// Number of steps (dtmc).
    #[arg(long)]
    pub k: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProcessKind {
    Poisson,
    Wiener,
    Brownian,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub process: ProcessKind,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Drift of the Brownian process.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub mu: f64,
    /// Horizon.
    #[arg(long = "T", default_value_t = 1.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 1000)]
    pub paths: usize,
    /// Mesh intervals for Gaussian processes.
    #[arg(long, default_value_t = 100)]
    pub mesh_steps: usize,
    /// CSV of every sampled point: `path_id,t,value`.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct KernelArgs {
    #[arg(long, default_value_t = 1.0)]
    pub m: f64,
    #[arg(long, default_value_t = 1.0)]
    pub hbar: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub xa: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub ta: f64,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub xb: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub tb: f64,
    #[arg(long, default_value_t = 4)]
    pub slices: usize,
    #[arg(long, default_value_t = 200)]
    pub grid: usize,
    /// Report the closed form and require a relative error of at most 2%.
    #[arg(long)]
    pub compare_closed_form: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ClusterArgs {
    /// TSV corpus: `doc_id<TAB>term<TAB>count`.
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0.2)]
    pub threshold: f64,
    #[arg(long, value_name = "FILE")]
    pub matrix_out: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub clusters_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    /// Fixture directory.
    #[arg(long, value_name = "DIR", default_value = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures"))]
    pub fixtures: PathBuf,
}

/// One `|expected − got| ≤ tolerance` comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub expected: f64,
    pub got: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, expected: f64, got: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            expected,
            got,
            tolerance,
            pass: (expected - got).abs() <= tolerance,
        }
    }
}

/// Outcome of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    pub inputs: Map<String, Value>,
    pub outputs: Map<String, Value>,
    pub checks: Vec<Check>,
    pub seed: u64,
}

impl Report {
    fn new(command: &str, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            inputs: Map::new(),
            outputs: Map::new(),
            checks: Vec::new(),
            seed,
        }
    }

    fn input(&mut self, key: &str, value: impl Into<Value>) {
        self.inputs.insert(key.to_string(), value.into());
    }

    fn output(&mut self, key: &str, value: impl Into<Value>) {
        self.outputs.insert(key.to_string(), value.into());
    }

    fn check(&mut self, name: &str, expected: f64, got: f64, tolerance: f64) {
        self.checks.push(Check::new(name, expected, got, tolerance));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_value(&self) -> Value {
        let checks = self
            .checks
            .iter()
            .map(|c| {
                let mut m = Map::new();
                m.insert("name".into(), c.name.clone().into());
                m.insert("expected".into(), num(c.expected));
                m.insert("got".into(), num(c.got));
                m.insert("tolerance".into(), num(c.tolerance));
                m.insert("pass".into(), c.pass.into());
                Value::Object(m)
            })
            .collect();
        let mut m = Map::new();
        m.insert("command".into(), self.command.clone().into());
        m.insert("inputs".into(), Value::Object(self.inputs.clone()));
        m.insert("outputs".into(), Value::Object(self.outputs.clone()));
        m.insert("checks".into(), Value::Array(checks));
        m.insert("seed".into(), self.seed.into());
        Value::Object(m)
    }

    /// Compact JSON with sorted keys and every float written with 17
    /// significant digits, followed by a newline.
    pub fn to_json(&self) -> String {
        let mut buf = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloats);
        serde::Serialize::serialize(&self.to_value(), &mut ser).expect("in-memory JSON");
        buf.push(b'\n');
        String::from_utf8(buf).expect("JSON is UTF-8")
    }
}

struct FixedFloats;

impl serde_json::ser::Formatter for FixedFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

/// Floats become JSON numbers; non-finite values become `null`.
fn num(x: f64) -> Value {
    Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

fn path_value(p: &Path) -> Value {
    p.display().to_string().into()
}

/// Parses `argv` (including the program name), runs the command and writes
/// the report. Returns the process exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(stdout, "{text}")
            } else {
                write!(stderr, "{text}")
            };
            return code;
        }
    };
    let report = match execute(&cli) {
        Ok(report) => report,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return 2;
        }
    };
    let json = report.to_json();
    let written = match &cli.report {
        Some(path) => std::fs::write(path, &json),
        None if cli.quiet => Ok(()),
        None => stdout.write_all(json.as_bytes()),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: cannot write report: {e}");
        return 2;
    }
    if report.passed() {
        0
    } else {
        if !cli.quiet {
            for c in report.checks.iter().filter(|c| !c.pass) {
                let _ = writeln!(
                    stderr,
                    "check failed: {} (expected {}, got {}, tolerance {})",
                    c.name, c.expected, c.got, c.tolerance
                );
            }
        }
        1
    }
}

pub fn execute(cli: &Cli) -> pbn::Result<Report> {
    match &cli.command {
        Command::Die(a) => die(a, cli.seed),
        Command::Expect(a) => expect(a, cli.seed),
        Command::Evolve(a) => evolve(a, cli.seed),
        Command::Simulate(a) => simulate_paths(a, cli.seed),
        Command::Kernel(a) => kernel(a, cli.seed),
        Command::Cluster(a) => cluster_corpus(a, cli.seed),
        Command::Check(a) => check(a, cli.seed),
    }
}

fn read_space(path: &Path) -> pbn::Result<SampleSpace> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

pub fn die(args: &DieArgs, seed: u64) -> pbn::Result<Report> {
    let mut report = Report::new("die", seed);
    let space = match &args.space {
        Some(path) => {
            report.input("space", path_value(path));
            read_space(path)?
        }
        None => {
            report.input("space", "fair die");
            SampleSpace::fair_die()
        }
    };
    let x = Observable::label_values(&space)?;
    let even = Event::new(
        space
            .labels()
            .iter()
            .filter(|l| l.parse::<i64>().is_ok_and(|v| v % 2 == 0))
            .cloned(),
    );
    let mean = space.expectation(&x)?;
    let p_even = space.probability(&even)?;
    let second = space.expectation(&x.map(|v| v * v))?;
    let variance = space.variance(&x)?;
    let mut given = Map::new();
    for label in even.members() {
        given.insert(label.to_string(), num(space.p_bracket(&Event::new([label]), &even)?));
    }
    report.output("mean", num(mean));
    report.output("p_even", num(p_even));
    report.output("p_given_even", Value::Object(given));
    report.output("second_moment", num(second));
    report.output("variance", num(variance));
    report.check("normalization", 1.0, space.masses().iter().sum(), 1e-12);
    if args.space.is_none() {
        report.output(
            "variance_note",
            "E[X^2] - E[X]^2 = 91/6 - 49/4 = 35/12; the value 45/4 sometimes printed for this example is not the variance",
        );
        report.check("mean", 3.5, mean, 1e-14);
        report.check("p_even", 0.5, p_even, 1e-14);
        for label in even.members() {
            let p = space.p_bracket(&Event::new([label]), &even)?;
            report.check(&format!("p_{label}_given_even"), 1.0 / 3.0, p, 1e-14);
        }
        report.check("second_moment", 91.0 / 6.0, second, 1e-13);
        report.check("variance", 35.0 / 12.0, variance, 1e-13);
    }
    Ok(report)
}

pub fn expect(args: &ExpectArgs, seed: u64) -> pbn::Result<Report> {
    let mut report = Report::new("expect", seed);
    report.input("space", path_value(&args.space));
    let space = read_space(&args.space)?;
    let f = match &args.values {
        Some(v) => {
            if v.len() != space.len() {
                return Err(Error::Dimension {
                    expected: space.len(),
                    got: v.len(),
                });
            }
            report.input("values", nums(v));
            Observable::new(v.clone())
        }
        None => Observable::label_values(&space)?,
    };
    let mean = space.expectation(&f)?;
    report.output("expectation", num(mean));
    report.output("variance", num(space.variance(&f)?));
    report.check("normalization", 1.0, space.masses().iter().sum(), 1e-12);
    if let Some(labels) = &args.given {
        report.input("given", Value::Array(labels.iter().map(|l| l.clone().into()).collect()));
        let b = Event::new(labels.iter().cloned());
        for label in b.members() {
            space.position(label)?;
        }
        let p_b = space.probability(&b)?;
        let conditional = space.conditional_expectation(&f, &b)?;
        report.output("probability_given", num(p_b));
        report.output("conditional_expectation", num(conditional));
        let complement = Event::new(space.labels().iter().filter(|l| !b.contains(l)).cloned());
        let p_c = 1.0 - p_b;
        let rest = if p_c > 0.0 {
            space.conditional_expectation(&f, &complement)? * space.probability(&complement)?
        } else {
            0.0
        };
        report.check("total_expectation", mean, conditional * p_b + rest, 1e-12);
    }
    Ok(report)
}

pub fn evolve(args: &EvolveArgs, seed: u64) -> pbn::Result<Report> {
    let mut report = Report::new("evolve", seed);
    report.input("matrix", path_value(&args.matrix));
    let entries = read_matrix(&args.matrix)?;
    let n = entries.nrows();
    let initial = match &args.init {
        Some(path) => {
            report.input("init", path_value(path));
            SystemPKet::new(read_vector(path)?)?
        }
        None => SystemPKet::uniform(n)?,
    };
    let index = Observable::new((0..n).map(|i| i as f64).collect());
    let (chain, elapsed) = match args.mode {
        Mode::Dtmc => {
            let k = args
                .k
                .ok_or_else(|| Error::InvalidArgument("--mode dtmc needs --k".into()))?;
            report.input("mode", "dtmc");
            report.input("k", k);
            let p = StochasticMatrix::new(entries)?;
            report.check(
                "chapman_kolmogorov",
                0.0,
                chapman_kolmogorov_discrete(&p, k / 2, k - k / 2),
                1e-12,
            );
            (Chain::Discrete(p), Elapsed::Steps(k))
        }
        Mode::Ctmc => {
            let t = args
                .t
                .ok_or_else(|| Error::InvalidArgument("--mode ctmc needs --t".into()))?;
            report.input("mode", "ctmc");
            report.input("t", num(t));
            let q = Generator::new(entries)?;
            report.check(
                "chapman_kolmogorov",
                0.0,
                chapman_kolmogorov_continuous(&q, t / 2.0, t / 2.0)?,
                1e-10,
            );
            if t > 0.0 {
                report.check("kolmogorov_forward", 0.0, kolmogorov_forward_residual(&q, t)?, 1e-6);
                report.check("kolmogorov_backward", 0.0, kolmogorov_backward_residual(&q, t)?, 1e-6);
            }
            (Chain::Continuous(q), Elapsed::Time(t))
        }
    };
    let out = chain.evolve(&initial, elapsed)?;
    report.output("masses", nums(out.masses()));
    report.output("time", num(out.time()));
    report.check("mass_conservation", 1.0, out.total(), 1e-10);
    let apd = apd_evolution(&initial, &chain, elapsed)?;
    let apd_gap = apd
        .masses()
        .iter()
        .zip(out.masses())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    report.check("apd_agreement", 0.0, apd_gap, 1e-12);
    let schrodinger = schrodinger_expectation(&index, &out)?;
    report.output("mean_state_index", num(schrodinger));
    match heisenberg_expectation(&index, &chain, &initial, elapsed) {
        Ok(h) => report.check("picture_equivalence", schrodinger, h, 1e-10),
        Err(Error::SingularPropagator { pivot_ratio }) => {
            report.output("heisenberg", format!("propagator singular (pivot ratio {pivot_ratio:e})"))
        }
        Err(e) => return Err(e),
    }
    Ok(report)
}

pub fn simulate_paths(args: &SimulateArgs, seed: u64) -> pbn::Result<Report> {
    let mut report = Report::new("simulate", seed);
    let spec = match args.process {
        ProcessKind::Poisson => {
            report.input("lambda", num(args.lambda));
            ProcessSpec::Poisson(PoissonSpec::new(args.lambda)?)
        }
        ProcessKind::Wiener => {
            report.input("sigma", num(args.sigma));
            ProcessSpec::Wiener(WienerSpec::new(args.sigma)?)
        }
        ProcessKind::Brownian => {
            report.input("mu", num(args.mu));
            report.input("sigma", num(args.sigma));
            ProcessSpec::Brownian(BrownianSpec::new(args.mu, args.sigma)?)
        }
    };
    report.input("process", spec.name());
    report.input("T", num(args.horizon));
    report.input("paths", args.paths);
    report.input("mesh_steps", args.mesh_steps);
    let config = SimulationConfig {
        horizon: args.horizon,
        paths: args.paths,
        seed,
        mesh_steps: args.mesh_steps,
    };
    let paths = simulate(&spec, &config)?;
    if let Some(out) = &args.out {
        let mut w = BufWriter::new(File::create(out)?);
        write_paths_csv(&paths, &mut w)?;
        w.flush()?;
        report.output("out", path_value(out));
    }
    let terminal: Vec<f64> = paths.iter().map(|p| p.terminal()).collect();
    let (mean, var) = sample_moments(&terminal);
    let (theory_mean, theory_var) = spec.moments(args.horizon);
    report.output("terminal_mean", num(mean));
    report.output("terminal_variance", num(var));
    report.output("theory_mean", num(theory_mean));
    report.output("theory_variance", num(theory_var));
    // Five standard errors of each estimator.
    let n = args.paths as f64;
    report.check("terminal_mean", theory_mean, mean, 5.0 * (theory_var / n).sqrt());
    if args.paths > 1 {
        report.check(
            "terminal_variance",
            theory_var,
            var,
            5.0 * theory_var * (2.0 / (n - 1.0)).sqrt(),
        );
    }
    Ok(report)
}

pub fn kernel(args: &KernelArgs, seed: u64) -> pbn::Result<Report> {
    let mut report = Report::new("kernel", seed);
    for (k, v) in [
        ("m", args.m),
        ("hbar", args.hbar),
        ("xa", args.xa),
        ("ta", args.ta),
        ("xb", args.xb),
        ("tb", args.tb),
    ] {
        report.input(k, num(v));
    }
    report.input("slices", args.slices);
    report.input("grid", args.grid);
    let model = InducedDiffusion::new(args.m, args.hbar)?;
    let c = compose_kernels(
        model,
        args.xa,
        args.ta,
        args.xb,
        args.tb,
        KernelSlice::new(args.slices, args.grid),
    )?;
    report.output("value", num(c.value));
    report.output("lost_mass", num(c.lost_mass));
    report.output("dx", num(c.dx));
    report.output("diffusion", num(model.diffusion()));
    if args.compare_closed_form {
        let closed = model.free_kernel(args.xa, args.ta, args.xb, args.tb)?;
        report.output("closed_form", num(closed));
        report.output("rel_error", num(((c.value - closed) / closed).abs()));
        report.check("closed_form", closed, c.value, 0.02 * closed.abs());
    }
    Ok(report)
}

pub fn cluster_corpus(args: &ClusterArgs, seed: u64) -> pbn::Result<Report> {
    let mut report = Report::new("cluster", seed);
    report.input("input", path_value(&args.input));
    report.input("threshold", num(args.threshold));
    let corpus = SparseCorpus::ingest(&args.input)?;
    let r = relevance(&corpus);
    let clustering = cluster(&r, args.threshold)?;
    if let Some(path) = &args.matrix_out {
        let mut w = BufWriter::new(File::create(path)?);
        r.write_csv(&mut w)?;
        w.flush()?;
        report.output("matrix_out", path_value(path));
    }
    if let Some(path) = &args.clusters_out {
        let mut text = serde_json::to_string_pretty(&clustering)?;
        text.push('\n');
        std::fs::write(path, text)?;
        report.output("clusters_out", path_value(path));
    }
    report.output("documents", corpus.len());
    report.output("terms", corpus.vocab().len());
    report.output("nnz", corpus.nnz());
    report.output("max_off_diagonal", num(r.max_off_diagonal()));
    report.output("cluster_count", clustering.clusters.len());
    report.output(
        "clusters",
        Value::Array(
            clustering
                .clusters
                .iter()
                .map(|c| Value::Array(c.iter().map(|d| d.clone().into()).collect()))
                .collect(),
        ),
    );
    let diagonal = (0..r.len()).map(|i| (r.get(i, i) - 1.0).abs()).fold(0.0, f64::max);
    report.check("self_relevance", 0.0, diagonal, 1e-12);
    if corpus.len() <= DENSE_CHECK_LIMIT {
        let s = row_stochastic(&corpus);
        let imag = s.spectrum().iter().map(|l| l.im.abs()).fold(0.0, f64::max);
        report.check("similarity_row_sums", 0.0, s.row_sum_error(), 1e-12);
        report.check("similarity_spectrum_imag", 0.0, imag, 1e-10);
    }
    Ok(report)
}

/// Runs each command on the fixtures and merges their checks, prefixed by
/// suite name.
pub fn check(args: &CheckArgs, seed: u64) -> pbn::Result<Report> {
    let dir = &args.fixtures;
    let mut report = Report::new("check", seed);
    report.input("fixtures", path_value(dir));
    let suites = [
        die(&DieArgs::default(), seed)?,
        expect(
            &ExpectArgs {
                space: dir.join("biased_die.json"),
                values: None,
                given: Some(vec!["2".into(), "4".into(), "6".into()]),
            },
            seed,
        )?,
        evolve(
            &EvolveArgs {
                mode: Mode::Ctmc,
                matrix: dir.join("generator.json"),
                init: Some(dir.join("init.json")),
                t: Some(0.8),
                k: None,
            },
            seed,
        )?,
        evolve(
            &EvolveArgs {
                mode: Mode::Dtmc,
                matrix: dir.join("transition.csv"),
                init: None,
                t: None,
                k: Some(6),
            },
            seed,
        )?,
        simulate_paths(
            &SimulateArgs {
                process: ProcessKind::Poisson,
                lambda: 2.0,
                sigma: 1.0,
                mu: 0.0,
                horizon: 10.0,
                paths: 2000,
                mesh_steps: 100,
                out: None,
            },
            seed,
        )?,
        simulate_paths(
            &SimulateArgs {
                process: ProcessKind::Brownian,
                lambda: 1.0,
                sigma: 1.0,
                mu: 0.5,
                horizon: 4.0,
                paths: 2000,
                mesh_steps: 50,
                out: None,
            },
            seed,
        )?,
        kernel(
            &KernelArgs {
                m: 1.0,
                hbar: 1.0,
                xa: 0.0,
                ta: 0.0,
                xb: 0.5,
                tb: 1.0,
                slices: 4,
                grid: 200,
                compare_closed_form: true,
            },
            seed,
        )?,
        cluster_corpus(
            &ClusterArgs {
                input: dir.join("corpus.tsv"),
                threshold: 0.2,
                matrix_out: None,
                clusters_out: None,
            },
            seed,
        )?,
    ];
    let names = [
        "die",
        "expect",
        "evolve_ctmc",
        "evolve_dtmc",
        "simulate_poisson",
        "simulate_brownian",
        "kernel",
        "cluster",
    ];
    let mut counts = BTreeMap::new();
    for (name, suite) in names.into_iter().zip(suites) {
        counts.insert(name, Value::from(suite.checks.len()));
        for c in suite.checks {
            report.checks.push(Check {
                name: format!("{name}/{}", c.name),
                ..c
            });
        }
    }
    report.output(
        "suites",
        Value::Object(counts.into_iter().map(|(k, v)| (k.to_string(), v)).collect()),
    );
    report.output("checks", report.checks.len());
    Ok(report)
}
