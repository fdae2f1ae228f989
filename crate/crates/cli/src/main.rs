use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use wcga::experiments::{exp_lebesgue_sweep, run_experiment, ExperimentId, ExperimentOutput, ExperimentSpec, SpaceKind};
use wcga::fpq::haar::{haar_coefficients, haar_lp_norm};
use wcga::greedy::{sigma_n_bruteforce, sigma_n_greedy_upper, tga_run, wcga_run, GreedyTrace};
use wcga::io::{coeff_map_to_json, fpq_to_json, index_set_to_json, lpq_to_json, parse_step_function, parse_vector, trace_to_json, AnyVector, IndexJson};
use wcga::properties::{
    check_a2, check_a3_direct, check_d, check_democracy, check_disjoint_q_ineq, check_lorentz_sandwich, estimate_rho,
    AppendixCheck, Calibration, PropertyReport, Sampler, SamplerSpec,
};
use wcga::{FpqParams, GreedyConfig, LpqParams, LpqVector, SpaceVector, TieBreak};

#[derive(Parser)]
#[command(name = "wcga", version, about = "Greedy approximation in ℓ^p(ℓ^q) and f_{p,q}")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand)]
enum Command {
    /// Norm of the input vector.
    Norm,
    /// Norming functional of the input vector, or its value on --other.
    Functional,
    /// Weak Chebyshev Greedy Algorithm trace.
    Wcga,
    /// Thresholding Greedy Algorithm trace for --n steps.
    Tga,
    /// Best --n-term error and an optimal support.
    Sigma,
    /// Randomized property check; exits 1 on failure.
    Check {
        #[arg(value_enum)]
        property: Property,
    },
    /// Reproduction experiment; writes CSV or JSON, exits 1 if a check fails.
    Exp {
        #[arg(value_enum)]
        experiment: Experiment,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Property {
    A2,
    A3,
    D,
    Rho,
    Disjoint,
    Lorentz,
    Democracy,
}

#[derive(Clone, Copy, ValueEnum)]
enum Experiment {
    LpqLower,
    FpqLower,
    TgaVsWcga,
    Lebesgue,
    IterationDecay,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Space {
    Lpq,
    Fpq,
    Haar,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum TieBreakArg {
    Lexicographic,
    PreferBlockA,
    PreferBlockB,
}

#[derive(Args)]
struct Opts {
    #[arg(long, global = true, value_enum)]
    space: Option<Space>,
    #[arg(long, global = true)]
    p: Option<f64>,
    #[arg(long, global = true)]
    q: Option<f64>,
    #[arg(long, global = true)]
    d: Option<usize>,
    #[arg(long, global = true, default_value_t = 1.0)]
    tau: f64,
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, global = true)]
    max_steps: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true, value_enum)]
    tie_break: Option<TieBreakArg>,
    /// Lebesgue constant C.
    #[arg(long, global = true, default_value_t = 1.0)]
    c: f64,
    /// Vector JSON, or a step function for --space haar.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Second vector for `functional`.
    #[arg(long, global = true)]
    other: Option<PathBuf>,
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Term count for tga, sigma and the sparse-sum checks.
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    n_min: Option<u32>,
    #[arg(long, global = true)]
    n_max: Option<u32>,
    /// Reciprocal exponents for the regime map.
    #[arg(long, global = true, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    /// Fixed constant for the Lebesgue sweep bound.
    #[arg(long, global = true)]
    c_fit: Option<f64>,
}

enum Failure {
    Usage(String),
    Lib(wcga::Error),
}

impl From<wcga::Error> for Failure {
    fn from(e: wcga::Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CliResult<T> = Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(Failure::Usage(msg.into()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

impl Opts {
    fn config(&self) -> GreedyConfig {
        let mut config = GreedyConfig { tau: self.tau, tol: self.tol, ..GreedyConfig::default() };
        if let Some(m) = self.max_steps {
            config.max_steps = m;
        }
        config.tie_break = match self.tie_break {
            None | Some(TieBreakArg::Lexicographic) => TieBreak::Lexicographic,
            Some(TieBreakArg::PreferBlockA) => TieBreak::PreferBlockA,
            Some(TieBreakArg::PreferBlockB) => TieBreak::PreferBlockB,
        };
        config
    }

    fn pq(&self) -> CliResult<(f64, f64)> {
        match (self.p, self.q) {
            (Some(p), Some(q)) => Ok((p, q)),
            _ => usage("--p and --q are required"),
        }
    }

    fn n(&self) -> CliResult<usize> {
        self.n.ok_or_else(|| Failure::Usage("--n is required".into()))
    }

    fn read_input(&self) -> CliResult<String> {
        let path = self.input.as_ref().ok_or_else(|| Failure::Usage("--input is required".into()))?;
        Ok(fs::read_to_string(path)?)
    }

    /// The input vector, moved into the space given by the flags if any.
    fn vector(&self, text: &str) -> CliResult<AnyVector> {
        let v = parse_vector(text)?;
        match (self.space, v) {
            (Some(Space::Fpq), AnyVector::Lpq(_)) | (Some(Space::Lpq), AnyVector::Fpq(_)) => {
                usage("--space disagrees with the space declared in the input")
            }
            (Some(Space::Haar), _) => usage("--space haar takes a step function"),
            (_, AnyVector::Lpq(x)) => {
                let p = self.p.unwrap_or(x.params().p());
                let q = self.q.unwrap_or(x.params().q());
                let entries = x.entries().iter().map(|(i, v)| ((i.row, i.col), *v));
                Ok(AnyVector::Lpq(LpqVector::from_entries(LpqParams::new(p, q)?, entries)?))
            }
            (_, AnyVector::Fpq(x)) => {
                let pr = x.params();
                let params = FpqParams::new(self.p.unwrap_or(pr.p()), self.q.unwrap_or(pr.q()), self.d.unwrap_or(pr.d()))?;
                Ok(AnyVector::Fpq(x.reinterpret(params)?))
            }
        }
    }

    fn emit(&self, text: &str) -> CliResult<()> {
        match &self.output {
            Some(path) => fs::write(path, text)?,
            None => std::io::stdout().write_all(text.as_bytes())?,
        }
        Ok(())
    }

    fn emit_json(&self, value: &Value) -> CliResult<()> {
        self.emit(&(serde_json::to_string_pretty(value).expect("serializable") + "\n"))
    }
}

fn run(cli: &Cli) -> CliResult<bool> {
    let o = &cli.opts;
    match &cli.command {
        Command::Check { property } => return check(o, *property),
        Command::Exp { experiment } => return experiment_cmd(o, *experiment),
        _ => {}
    }
    let text = o.read_input()?;
    if o.space == Some(Space::Haar) {
        return haar(o, &cli.command, &text);
    }
    let other = o.other.as_ref().map(fs::read_to_string).transpose()?;
    let other = other.map(|t| o.vector(&t)).transpose()?;
    match (o.vector(&text)?, other) {
        (AnyVector::Lpq(x), None) => vector_cmd(o, &cli.command, &x, None, lpq_to_json),
        (AnyVector::Lpq(x), Some(AnyVector::Lpq(y))) => vector_cmd(o, &cli.command, &x, Some(&y), lpq_to_json),
        (AnyVector::Fpq(x), None) => vector_cmd(o, &cli.command, &x, None, fpq_to_json),
        (AnyVector::Fpq(x), Some(AnyVector::Fpq(y))) => vector_cmd(o, &cli.command, &x, Some(&y), fpq_to_json),
        _ => usage("--other lives in a different space"),
    }
}

fn haar(o: &Opts, command: &Command, text: &str) -> CliResult<bool> {
    if !matches!(command, Command::Norm) {
        return usage("--space haar supports only `norm`");
    }
    let f = parse_step_function(text, o.d.unwrap_or(1))?;
    let p = o.p.unwrap_or(2.0);
    let expansion = haar_coefficients(&f, p)?;
    o.emit(&format!("{}\n", haar_lp_norm(&expansion)?))?;
    Ok(true)
}

fn trace_csv<I>(trace: &GreedyTrace<I>) -> String {
    let mut out = String::from("step,residual_norm,coeff,sup\n");
    out.push_str(&format!("0,{},,\n", trace.residual_norms[0]));
    for (k, s) in trace.selections.iter().enumerate() {
        out.push_str(&format!("{},{},{},{}\n", k + 1, trace.residual_norms[k + 1], s.coeff, s.sup));
    }
    out
}

fn vector_cmd<V>(o: &Opts, command: &Command, x: &V, other: Option<&V>, to_json: fn(&V) -> Value) -> CliResult<bool>
where
    V: SpaceVector<f64>,
    V::Index: IndexJson,
{
    match command {
        Command::Norm => o.emit(&format!("{}\n", x.norm()?))?,
        Command::Functional => match other {
            Some(y) => o.emit(&format!("{}\n", x.norming_apply(y)?))?,
            None => {
                let g = x.norming_gradient()?;
                o.emit_json(&json!({"norm": x.norm()?, "vector": to_json(x), "functional": coeff_map_to_json(&g)}))?
            }
        },
        Command::Wcga | Command::Tga => {
            let trace = if matches!(command, Command::Wcga) { wcga_run(x, &o.config(), None, None)? } else { tga_run(x, o.n()?)? };
            match o.format {
                Some(Format::Csv) => o.emit(&trace_csv(&trace))?,
                _ => o.emit_json(&trace_to_json(&trace))?,
            }
        }
        Command::Sigma => {
            let n = o.n()?;
            let (sigma, support) = sigma_n_bruteforce(x, n)?;
            let upper = sigma_n_greedy_upper(x, n)?;
            o.emit_json(&json!({"n": n, "sigma": sigma, "support": index_set_to_json(&support), "greedy_upper": upper}))?
        }
        Command::Check { .. } | Command::Exp { .. } => unreachable!("dispatched earlier"),
    }
    Ok(true)
}

fn report(o: &Opts, r: &PropertyReport) -> CliResult<bool> {
    o.emit_json(&r.to_json())?;
    eprintln!("{}: {}", r.property, if r.passed() { "PASS" } else { "FAIL" });
    Ok(r.passed())
}

fn sampler_check<S: Sampler>(o: &Opts, s: &S, property: Property) -> CliResult<bool> {
    let spec = SamplerSpec::default();
    let samples = o.samples.unwrap_or(1000);
    let seed = o.seed.unwrap_or(0);
    match property {
        Property::A2 => report(o, &check_a2(s, &spec, o.n.unwrap_or(8), samples, seed)?),
        Property::A3 => report(o, &check_a3_direct(s, &spec, o.n.unwrap_or(8), 1.0, samples, seed)?),
        Property::D => report(o, &check_d(s, &spec, samples, seed, None, None)?),
        Property::Rho => {
            let t = [1e-3, 1e-2, 0.1, 0.5, 1.0];
            let est = estimate_rho(s, &spec, &t, samples, seed)?;
            o.emit_json(&serde_json::to_value(&est).expect("serializable"))?;
            Ok(true)
        }
        _ => unreachable!("f_{{p,q}} checks are dispatched separately"),
    }
}

fn check(o: &Opts, property: Property) -> CliResult<bool> {
    let (p, q) = o.pq()?;
    let space = o.space.unwrap_or(Space::Lpq);
    let appendix = match property {
        Property::Disjoint => Some(AppendixCheck::DisjointQ),
        Property::Lorentz => Some(AppendixCheck::Lorentz),
        Property::Democracy => Some(AppendixCheck::Democracy),
        _ => None,
    };
    let Some(kind) = appendix else {
        return match space {
            Space::Lpq => sampler_check(o, &LpqParams::new(p, q)?, property),
            Space::Fpq => sampler_check(o, &FpqParams::new(p, q, o.d.unwrap_or(1))?, property),
            Space::Haar => usage("property checks run in lpq or fpq"),
        };
    };
    if space != Space::Fpq {
        return usage("this check needs --space fpq");
    }
    let d = o.d.unwrap_or(1);
    let params = FpqParams::new(p, q, d)?;
    let spec = kind.spec(d);
    let samples = o.samples.unwrap_or(1000);
    let seed = o.seed.unwrap_or(0);
    let constant = || -> CliResult<f64> {
        let cal = Calibration::frozen()?;
        let c = cal.constant(kind, p, q, d).ok_or_else(|| {
            Failure::Usage(format!("no calibrated constant at p={p}, q={q}, d={d}; use a grid point"))
        })?;
        Ok(c * cal.headroom)
    };
    let r = match kind {
        AppendixCheck::DisjointQ => check_disjoint_q_ineq(params, &spec, samples, seed)?,
        AppendixCheck::Lorentz => check_lorentz_sandwich(params, &spec, samples, seed, constant()?)?,
        AppendixCheck::Democracy => check_democracy(params, &spec, samples, seed, constant()?)?,
        AppendixCheck::D1Log => unreachable!("not exposed"),
    };
    report(o, &r)
}

fn experiment_cmd(o: &Opts, experiment: Experiment) -> CliResult<bool> {
    let id = match experiment {
        Experiment::LpqLower => ExperimentId::LpqLower,
        Experiment::FpqLower => ExperimentId::FpqLower,
        Experiment::TgaVsWcga => ExperimentId::TgaVsWcga,
        Experiment::Lebesgue => ExperimentId::Lebesgue,
        Experiment::IterationDecay => ExperimentId::IterationDecay,
    };
    let mut spec = ExperimentSpec::new(id);
    spec.p = o.p.unwrap_or(spec.p);
    spec.q = o.q.unwrap_or(spec.q);
    spec.d = o.d.unwrap_or(spec.d);
    spec.c = o.c;
    spec.seed = o.seed.unwrap_or(spec.seed);
    spec.samples = o.samples.unwrap_or(spec.samples);
    spec.n_min = o.n_min.unwrap_or(spec.n_min);
    spec.n_max = o.n_max.unwrap_or(spec.n_max);
    spec.epsilon = o.epsilon.unwrap_or(spec.epsilon);
    if let Some(g) = &o.grid {
        spec.grid = g.clone();
    }
    spec.space = match o.space {
        None => spec.space,
        Some(Space::Lpq) => SpaceKind::Lpq,
        Some(Space::Fpq) => SpaceKind::Fpq,
        Some(Space::Haar) => return usage("experiments run in lpq or fpq"),
    };
    spec.config = o.config();
    let out: ExperimentOutput = match (id, o.c_fit) {
        (ExperimentId::Lebesgue, Some(c)) => exp_lebesgue_sweep(&spec, Some(c))?,
        _ => run_experiment(&spec)?,
    };
    match o.format {
        Some(Format::Json) => {
            let meta: serde_json::Map<String, Value> =
                out.table.metadata.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
            let fit = out.fit.as_ref().map(|f| json!({"slope": f.slope, "intercept": f.intercept, "r_squared": f.r_squared, "points": f.points}));
            let checks: Vec<Value> =
                out.checks.iter().map(|c| json!({"name": c.name, "passed": c.passed, "detail": c.detail})).collect();
            o.emit_json(&json!({"metadata": meta, "header": out.table.header, "rows": out.table.rows, "fit": fit, "checks": checks}))?;
        }
        _ => o.emit(&out.table.render())?,
    }
    if let Some(f) = &out.fit {
        eprintln!("fit: slope={} r_squared={}", f.slope, f.r_squared);
    }
    for c in &out.checks {
        eprintln!("{}: {} ({})", c.name, if c.passed { "PASS" } else { "FAIL" }, c.detail);
    }
    Ok(out.passed())
}
