//! Command-line front end.
//!
//! Every command echoes its resolved configuration into its output: JSON
//! outputs carry a `config` object, CSV outputs start with `# key=value`
//! lines. Exact quantities are written as `"p/q"` strings unless
//! `--mode float` is given. Exit codes: 0 on success, 2 for malformed input
//! or arguments, 3 when a size guard trips.

mod selftest;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bandit::{pac_best_contract, RegretSetup};
use crate::dist::{expected_utility, TypeDistribution};
use crate::error::{Error, Result};
use crate::hardness::{
    cover_contract, ell_value, example_system, reduce, verify_if_direction, verify_onlyif_bounds, SetCoverInput,
};
use crate::io::{instance_json, rationals_json, read_distribution, read_instance, write_atomic};
use crate::model::{DiscreteTypeInstance, Instance};
use crate::numerics::{parse_rational, ratio, Rational, Scalar};
use crate::ptas::{ptas_contract, PtasConfig};
use crate::solver::solve_discrete_optimal_logged;

pub use selftest::{run_selftest, SelftestCase};

/// Caps the rayon pool when set to a positive integer.
pub const THREADS_ENV: &str = "CONTRACTLAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "contractlab", version, about = "Contract design with single-dimensional agent types")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the output to this file (atomically) instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Rational,
    Float,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal contract for a discrete type distribution.
    SolveDiscrete {
        #[arg(long)]
        instance: PathBuf,
        /// Distribution file of kind "discrete".
        #[arg(long)]
        dist: PathBuf,
        /// Restrict every payment to the unit interval.
        #[arg(long)]
        bounded: bool,
        /// Include every solved tuple in the report.
        #[arg(long)]
        log_tuples: bool,
        #[arg(long, value_enum, default_value = "rational")]
        mode: Mode,
    },
    /// Additive approximation for a continuous type distribution.
    Ptas {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        dist: PathBuf,
        #[arg(long)]
        eps: String,
        /// Grid width; defaults to eps²/16.
        #[arg(long)]
        delta: Option<String>,
        /// Robustification step; defaults to eps/4.
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long)]
        bounded: bool,
        #[arg(long, value_enum, default_value = "rational")]
        mode: Mode,
    },
    /// Build the contract instance encoding a set-cover input.
    ReduceSetcover {
        #[arg(long)]
        universe: usize,
        /// Sets as 1-based element lists, e.g. "1,2;2;1,3;3".
        #[arg(long)]
        sets: String,
    },
    /// Check both directions of the set-cover reduction.
    VerifyReduction {
        /// Defaults to 3 with the sets "1,2;2;1,3;3".
        #[arg(long, requires = "sets")]
        universe: Option<usize>,
        #[arg(long, requires = "universe")]
        sets: Option<String>,
        /// 1-based indices of the sets forming the cover.
        #[arg(long)]
        cover: String,
        /// Also check the converse bounds on this many random contracts.
        #[arg(long, default_value_t = 0)]
        random: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Cumulative pseudo-regret of the bandit learner as CSV.
    BanditRegret {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        dist: PathBuf,
        /// Horizon.
        #[arg(short = 'T', long = "horizon")]
        horizon: u64,
        /// Number of independent replications.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        /// Base seed; replication r uses stream r.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Emit every stride-th round (the last round is always emitted).
        #[arg(long, default_value_t = 1)]
        stride: u64,
    },
    /// Identify an eta-optimal contract from bandit feedback.
    BanditPac {
        /// Defaults to the two-action instance.
        #[arg(long)]
        instance: Option<PathBuf>,
        /// Defaults to the uniform distribution.
        #[arg(long)]
        dist: Option<PathBuf>,
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        delta: f64,
        /// Grid width override; the default (eta/(24βn))² is usually too fine.
        #[arg(long)]
        eps: Option<String>,
        /// Misspecification assumed by the stopping rule; defaults to 2βnε.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the built-in example suite.
    Selftest,
}

/// Resolved parameters echoed into every output.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ExperimentConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dist: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seeds: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounded: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub universe: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sets: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cover: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

pub enum Output {
    Json(Value),
    Csv(String),
    Text(String),
}

impl Output {
    pub fn into_bytes(self) -> Vec<u8> {
        match self {
            Output::Json(v) => {
                let mut s = serde_json::to_string_pretty(&v).expect("values serialize");
                s.push('\n');
                s.into_bytes()
            }
            Output::Csv(s) | Output::Text(s) => s.into_bytes(),
        }
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Usage(_) | Error::Invalid { .. } => 2,
        Error::Resource(_) => 3,
    }
}

fn rational_arg(name: &str, s: &str) -> Result<Rational> {
    parse_rational(s).ok_or_else(|| Error::usage(format!("--{name}: cannot parse `{s}` as a number")))
}

fn path_str(p: &std::path::Path) -> String {
    p.display().to_string()
}

fn number(x: &Rational, mode: Mode) -> Value {
    match mode {
        Mode::Rational => json!(x.to_string()),
        Mode::Float => json!(x.as_f64()),
    }
}

fn numbers(xs: &[Rational], mode: Mode) -> Value {
    match mode {
        Mode::Rational => rationals_json(xs),
        Mode::Float => json!(xs.iter().map(Scalar::as_f64).collect::<Vec<f64>>()),
    }
}

/// `F = I₂`, `r = (0, 1)`, `c = (0, 1)`: shirking yields nothing, working costs θ.
pub fn two_action_instance() -> Instance<Rational> {
    Instance::new(
        vec![vec![ratio(1, 1), ratio(0, 1)], vec![ratio(0, 1), ratio(1, 1)]],
        vec![ratio(0, 1), ratio(1, 1)],
        vec![ratio(0, 1), ratio(1, 1)],
        Some(vec!["shirk".into(), "work".into()]),
    )
    .expect("valid literal")
}

fn parse_cover(s: &str, m: usize) -> Result<Vec<usize>> {
    let mut cover = Vec::new();
    for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let j: usize = tok
            .parse()
            .map_err(|_| Error::usage(format!("--cover: `{tok}` is not a set index")))?;
        if j == 0 || j > m {
            return Err(Error::usage(format!("--cover: set {j} outside 1..={m}")));
        }
        cover.push(j - 1);
    }
    Ok(cover)
}

/// Executes one parsed command and returns its output.
pub fn run(cli: &Cli) -> Result<Output> {
    let out = cli.out.as_deref().map(path_str);
    match &cli.command {
        Command::SolveDiscrete { instance, dist, bounded, log_tuples, mode } => {
            let cfg = ExperimentConfig {
                command: "solve-discrete".into(),
                instance: Some(path_str(instance)),
                dist: Some(path_str(dist)),
                bounded: Some(*bounded),
                mode: Some(*mode),
                out,
                ..Default::default()
            };
            let inst = read_instance(instance)?;
            let TypeDistribution::Discrete { points, weights } = read_distribution(dist)? else {
                return Err(Error::usage("solve-discrete needs a distribution of kind \"discrete\""));
            };
            let dti = DiscreteTypeInstance::new(points, weights)?;
            let rep = solve_discrete_optimal_logged(&inst, &dti, *bounded, *log_tuples)?;
            let mut v = json!({
                "config": cfg,
                "value": number(&rep.value, *mode),
                "lp_value": number(&rep.lp_value, *mode),
                "contract": numbers(&rep.best_contract.0, *mode),
                "best_tuple": rep.best_tuple.iter().map(|&a| inst.label(a)).collect::<Vec<_>>(),
                "tuples_solved": rep.tuples_solved,
            });
            if *log_tuples {
                v["per_tuple"] = serde_json::to_value(&rep.per_tuple).expect("records serialize");
            }
            Ok(Output::Json(v))
        }
        Command::Ptas { instance, dist, eps, delta, alpha, bounded, mode } => {
            let mut pc = PtasConfig::from_eps(rational_arg("eps", eps)?)?;
            if let Some(d) = delta {
                pc = pc.with_delta(rational_arg("delta", d)?);
            }
            if let Some(a) = alpha {
                pc = pc.with_alpha(rational_arg("alpha", a)?);
            }
            pc.bounded = *bounded;
            let cfg = ExperimentConfig {
                command: "ptas".into(),
                instance: Some(path_str(instance)),
                dist: Some(path_str(dist)),
                eps: Some(pc.eps.to_string()),
                delta: Some(pc.delta.to_string()),
                alpha: Some(pc.alpha.to_string()),
                bounded: Some(*bounded),
                mode: Some(*mode),
                out,
                ..Default::default()
            };
            let inst = read_instance(instance)?;
            let gamma = read_distribution(dist)?;
            let res = ptas_contract(&inst, &gamma, &pc)?;
            let value = expected_utility(&inst, &gamma, &res.contract);
            Ok(Output::Json(json!({
                "config": cfg,
                "contract": numbers(&res.contract.0, *mode),
                "discrete_contract": numbers(&res.discrete_contract.0, *mode),
                "discrete_value": number(&res.discrete_value, *mode),
                "value": number(&value, *mode),
                "bound": number(&res.bound, *mode),
                "k": res.k,
                "tuples_solved": res.tuples_solved,
            })))
        }
        Command::ReduceSetcover { universe, sets } => {
            let cfg = ExperimentConfig {
                command: "reduce-setcover".into(),
                universe: Some(*universe),
                sets: Some(sets.clone()),
                out,
                ..Default::default()
            };
            let sc = SetCoverInput::parse(*universe, sets)?;
            let ri = reduce(&sc);
            let p = &ri.params;
            let ells: Result<Vec<String>> = (0..=sc.m()).map(|k| ell_value(sc.n(), sc.m(), k).map(|e| e.to_string())).collect();
            Ok(Output::Json(json!({
                "config": cfg,
                "n": sc.n(),
                "m": sc.m(),
                "params": {
                    "rho": p.rho.to_string(),
                    "eta": p.eta.to_string(),
                    "eps": p.eps.to_string(),
                    "mu": p.mu.to_string(),
                },
                "ell_by_cover_size": ells?,
                "min_cover_size": sc.min_cover_size(),
                "instance": instance_json(&ri.inst),
                "types": rationals_json(ri.dti.types()),
                "weights": rationals_json(ri.dti.weights()),
            })))
        }
        Command::VerifyReduction { universe, sets, cover, random, seed } => {
            let sc = match (universe, sets) {
                (Some(n), Some(s)) => SetCoverInput::parse(*n, s)?,
                _ => example_system(),
            };
            let cfg = ExperimentConfig {
                command: "verify-reduction".into(),
                universe: Some(sc.n()),
                sets: Some(
                    sc.sets()
                        .iter()
                        .map(|s| s.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(","))
                        .collect::<Vec<_>>()
                        .join(";"),
                ),
                cover: Some(cover.clone()),
                seed: Some(*seed),
                out,
                ..Default::default()
            };
            let ri = reduce(&sc);
            let chosen = parse_cover(cover, sc.m())?;
            let if_report = verify_if_direction(&ri, &chosen)?;
            let at_cover = verify_onlyif_bounds(&ri, &cover_contract(&ri, &chosen)?)?;
            let mut rng = crate::numerics::rng_new(*seed);
            let mut violations = 0;
            for _ in 0..*random {
                let p = selftest::random_contract(&mut rng, ri.inst.n_outcomes(), &ri.params.mu);
                violations += verify_onlyif_bounds(&ri, &p)?.violations;
            }
            let passed = if_report.passed && at_cover.violations == 0 && violations == 0;
            Ok(Output::Json(json!({
                "config": cfg,
                "if_direction": if_report,
                "onlyif_at_cover": at_cover,
                "random_contracts": { "count": random, "violations": violations },
                "passed": passed,
            })))
        }
        Command::BanditRegret { instance, dist, horizon, seeds, seed, stride } => {
            if *stride == 0 {
                return Err(Error::usage("--stride must be positive"));
            }
            let inst = read_instance(instance)?;
            let gamma = read_distribution(dist)?;
            let setup = RegretSetup::new(&inst, &gamma, *horizon)?;
            let runs = setup.run_many(*seed, *seeds)?;
            let mut s = String::new();
            let header = [
                ("command", "bandit-regret".to_string()),
                ("instance", path_str(instance)),
                ("dist", path_str(dist)),
                ("horizon", horizon.to_string()),
                ("seeds", seeds.to_string()),
                ("seed", seed.to_string()),
                ("stride", stride.to_string()),
                ("eps", setup.env.eps.to_string()),
                ("delta", setup.delta.to_string()),
                ("d", setup.env.dim().to_string()),
                ("k", setup.env.arms.len().to_string()),
                ("candidates", setup.env.candidates.to_string()),
                ("opt_ref", setup.env.opt_ref.to_string()),
            ];
            for (k, v) in header {
                s.push_str(&format!("# {k}={v}\n"));
            }
            if let Some(o) = &out {
                s.push_str(&format!("# out={o}\n"));
            }
            s.push_str("seed,t,cum_regret\n");
            for run in &runs {
                for (i, r) in run.curve.iter().enumerate() {
                    let t = i as u64 + 1;
                    if t % stride == 0 || t == *horizon {
                        s.push_str(&format!("{},{t},{r}\n", run.replicate));
                    }
                }
            }
            Ok(Output::Csv(s))
        }
        Command::BanditPac { instance, dist, eta, delta, eps, alpha, seed } => {
            let cfg = ExperimentConfig {
                command: "bandit-pac".into(),
                instance: Some(instance.as_deref().map_or("builtin:two_action".into(), path_str)),
                dist: Some(dist.as_deref().map_or("builtin:uniform".into(), path_str)),
                eps: eps.clone(),
                alpha: alpha.map(|a| a.to_string()),
                eta: Some(*eta),
                confidence: Some(*delta),
                seed: Some(*seed),
                out,
                ..Default::default()
            };
            let inst = match instance {
                Some(p) => read_instance(p)?,
                None => two_action_instance(),
            };
            let gamma = match dist {
                Some(p) => read_distribution(p)?,
                None => TypeDistribution::uniform(),
            };
            let eps_q = eps.as_deref().map(|e| rational_arg("eps", e)).transpose()?;
            let res = pac_best_contract(&inst, &gamma, *eta, *delta, *seed, eps_q, *alpha)?;
            Ok(Output::Json(json!({
                "config": cfg,
                "contract": res.contract,
                "samples": res.result.samples,
                "eta": eta,
                "delta": delta,
                "eps": res.eps,
                "d": res.d,
                "k": res.k,
                "alpha": res.alpha,
                "blocks": res.result.blocks,
                "ell_star": res.result.ell_star,
                "sample_bound": res.result.sample_bound,
                "within_sample_bound": res.result.within_bound(),
                "value": res.value,
                "opt_ref": res.opt_ref,
            })))
        }
        Command::Selftest => {
            let results = run_selftest();
            let mut s = String::new();
            let mut failed = 0;
            for (name, ok) in &results {
                s.push_str(&format!("{} {name}\n", if *ok { "ok  " } else { "FAIL" }));
                failed += usize::from(!ok);
            }
            s.push_str(&format!("{} passed, {failed} failed\n", results.len() - failed));
            if failed > 0 {
                return Err(Error::usage(format!("selftest failed\n{s}")));
            }
            Ok(Output::Text(s))
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

/// Parses `args`, runs the command and writes its output. Returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    configure_threads();
    let output = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let bytes = output.into_bytes();
    let written = match &cli.out {
        Some(path) => write_atomic(path, &bytes),
        None => std::io::stdout().lock().write_all(&bytes),
    };
    match written {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: cannot write output: {e}");
            2
        }
    }
}
