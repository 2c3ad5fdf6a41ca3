//! Command-line front end: scenario in, deterministic report out.
//!
//! Exit codes: [`EXIT_PASS`] when every check holds, [`EXIT_FAIL`] when a
//! check fails (or a numerical routine does not converge), [`EXIT_INPUT`]
//! for unreadable or invalid input.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::duality::{self, DualityReport};
use crate::error::Error;
use crate::est::{self, EstConfig, EstReport};
use crate::ext::ExtReal;
use crate::scenario::{Scenario, ScenarioError, SupportCheck};
use crate::spectral::{self, SpectralResult};
use crate::system::{Measure, Potential};
use crate::tentropy::{self, LegendreOptions, TauResult};
use crate::transfer::TransferOperator;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// Slack allowed in `tau_direct >= tau_legendre`.
pub const SANDWICH_TOL: f64 = 1e-6;
/// Default tolerance for the lambda property suite.
pub const PROPERTY_TOL: f64 = 1e-7;
const GIBBS_INVARIANCE_TOL: f64 = 1e-8;
const PROPERTY_TRIALS: usize = 10;
const CERTIFICATE_PROBES: usize = 32;
const CERTIFICATE_SLACK: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Log spectral radius of the twisted operator.
    Lambda,
    /// Equilibrium measure at the scenario potential.
    Gibbs,
    /// t-entropy of the scenario measure by both routes.
    Tau,
    /// Variational gap at the scenario potential.
    Duality,
    /// Large-deviation rate table around the scenario measure.
    Est,
    /// Property suite for the scenario operator.
    Props,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Overrides for scenario settings; `None` keeps the scenario (or default) value.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Flags {
    pub tol: Option<f64>,
    pub eps: Option<f64>,
    pub n_max: Option<usize>,
    pub seed: Option<u64>,
    pub output: Option<Format>,
}

#[derive(Parser, Debug)]
#[command(
    name = "tdual",
    version,
    about = "Spectral potential and t-entropy of transfer operators on finite systems"
)]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    /// Scenario JSON file.
    #[arg(long)]
    pub scenario: PathBuf,
    /// Numerical tolerance (default depends on the command).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Neighborhood size for `est`; overrides the scenario.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Largest iterate for the direct t-entropy route; overrides the scenario.
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Seed for randomized checks; overrides the scenario.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Report format (`est` defaults to csv, everything else to json).
    #[arg(long, value_enum)]
    pub output: Option<Format>,
}

impl Args {
    pub fn flags(&self) -> Flags {
        Flags {
            tol: self.tol,
            eps: self.eps,
            n_max: self.n_max,
            seed: self.seed,
            output: self.output,
        }
    }
}

/// Exit code plus what goes to stdout and stderr.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn input(msg: impl std::fmt::Display) -> Self {
        Outcome {
            code: EXIT_INPUT,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        }
    }

    fn from_error(err: Error) -> Self {
        let code = match err {
            Error::Convergence { .. } => EXIT_FAIL,
            _ => EXIT_INPUT,
        };
        Outcome {
            code,
            stdout: String::new(),
            stderr: format!("error: {err}\n"),
        }
    }

    fn report(pass: bool, stdout: String) -> Self {
        Outcome {
            code: if pass { EXIT_PASS } else { EXIT_FAIL },
            stdout,
            stderr: String::new(),
        }
    }
}

/// Reads the scenario file and runs the command.
pub fn execute(args: &Args) -> Outcome {
    match std::fs::read(&args.scenario) {
        Ok(bytes) => run_bytes(args.command, &bytes, &args.flags()),
        Err(e) => Outcome::input(format!("cannot read {}: {e}", args.scenario.display())),
    }
}

/// Parses scenario bytes and runs the command. `props` accepts operators
/// that violate the support condition so it can report the violation.
pub fn run_bytes(cmd: Command, bytes: &[u8], flags: &Flags) -> Outcome {
    let support = match cmd {
        Command::Props => SupportCheck::Skip,
        _ => SupportCheck::Enforce,
    };
    match Scenario::parse(bytes, support) {
        Ok(sc) => run(cmd, &sc, flags),
        Err(e) => Outcome::input(e),
    }
}

struct Settings {
    tol: Option<f64>,
    eps: f64,
    n_max: usize,
    seed: u64,
    format: Format,
}

fn settings(cmd: Command, sc: &Scenario, flags: &Flags) -> Result<Settings, String> {
    if let Some(tol) = flags.tol {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(format!("--tol must be positive, got {tol}"));
        }
    }
    let eps = flags.eps.unwrap_or(sc.eps);
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(format!("--eps must be positive, got {eps}"));
    }
    let n_max = flags.n_max.unwrap_or(sc.n_max);
    if n_max == 0 {
        return Err("--n-max must be at least 1".into());
    }
    let default_format = match cmd {
        Command::Est => Format::Csv,
        _ => Format::Json,
    };
    Ok(Settings {
        tol: flags.tol,
        eps,
        n_max,
        seed: flags.seed.unwrap_or(sc.seed),
        format: flags.output.unwrap_or(default_format),
    })
}

pub fn run(cmd: Command, sc: &Scenario, flags: &Flags) -> Outcome {
    let s = match settings(cmd, sc, flags) {
        Ok(s) => s,
        Err(msg) => return Outcome::input(msg),
    };
    let a = if cmd == Command::Props {
        sc.operator_unchecked()
    } else {
        match sc.operator() {
            Ok(a) => a,
            Err(e) => {
                return Outcome::input(ScenarioError::Field {
                    field: "operator".into(),
                    source: e,
                })
            }
        }
    };
    let phi = sc.potential();
    let result = match cmd {
        Command::Lambda => cmd_lambda(&a, &phi, &s),
        Command::Gibbs => cmd_gibbs(&a, &phi, &s),
        Command::Tau => required_measure(sc).and_then(|mu| cmd_tau(&a, &mu, &s)),
        Command::Duality => cmd_duality(&a, &phi, &s),
        Command::Est => required_measure(sc).and_then(|mu| cmd_est(&a, &mu, &s)),
        Command::Props => Ok(cmd_props(&a, &phi, sc.measure().as_ref(), &s)),
    };
    result.unwrap_or_else(Outcome::from_error)
}

fn required_measure(sc: &Scenario) -> Result<Measure, Error> {
    sc.measure()
        .ok_or_else(|| Error::Argument("this command needs a `measure` in the scenario".into()))
}

fn json<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("reports serialize");
    out.push('\n');
    out
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn cmd_lambda(a: &TransferOperator, phi: &Potential, s: &Settings) -> Result<Outcome, Error> {
    let r: SpectralResult =
        spectral::spectral_potential(a, phi, s.tol.unwrap_or(spectral::DEFAULT_TOL))?;
    let out = match s.format {
        Format::Json => json(&r),
        Format::Csv => format!(
            "lambda,iterations,residual\n{},{},{}\n",
            r.lambda,
            r.iterations,
            num(r.residual)
        ),
    };
    Ok(Outcome::report(true, out))
}

#[derive(Serialize)]
struct GibbsReport {
    gibbs: Measure,
    invariant: bool,
}

fn cmd_gibbs(a: &TransferOperator, phi: &Potential, s: &Settings) -> Result<Outcome, Error> {
    let mu = spectral::gibbs_gradient(a, phi, s.tol.unwrap_or(spectral::DEFAULT_TOL))?;
    let invariant = a.system().is_invariant(&mu, GIBBS_INVARIANCE_TOL);
    let out = match s.format {
        Format::Json => json(&GibbsReport {
            gibbs: mu,
            invariant,
        }),
        Format::Csv => {
            let mut out = String::from("point,weight\n");
            for (x, w) in mu.weights().iter().enumerate() {
                let _ = writeln!(out, "{x},{}", num(*w));
            }
            out
        }
    };
    Ok(Outcome::report(invariant, out))
}

#[derive(Serialize)]
struct Sandwich {
    holds: bool,
    /// `tau_direct − tau_legendre`, when both are finite.
    gap: Option<f64>,
}

#[derive(Serialize)]
struct TauReport {
    /// `None` when the measure is not invariant.
    direct: Option<TauResult>,
    legendre: TauResult,
    sandwich: Sandwich,
}

fn cmd_tau(a: &TransferOperator, mu: &Measure, s: &Settings) -> Result<Outcome, Error> {
    let direct = if a.system().is_invariant(mu, tentropy::INVARIANCE_TOL) {
        Some(tentropy::tau_direct(a, mu, s.n_max, &[])?)
    } else {
        None
    };
    let mut opts = LegendreOptions::default();
    if let Some(tol) = s.tol {
        opts.tol = tol;
    }
    let legendre = tentropy::tau_legendre(a, mu, &opts)?;
    let sandwich = match &direct {
        None => Sandwich {
            holds: true,
            gap: None,
        },
        Some(d) => Sandwich {
            holds: legendre.tau.le_tol(d.tau, SANDWICH_TOL),
            gap: match (d.tau, legendre.tau) {
                (ExtReal::Finite(x), ExtReal::Finite(y)) => Some(x - y),
                _ => None,
            },
        },
    };
    let holds = sandwich.holds;
    let out = match s.format {
        Format::Json => json(&TauReport {
            direct,
            legendre,
            sandwich,
        }),
        Format::Csv => format!(
            "direct,legendre,gap,sandwich\n{},{},{},{}\n",
            direct
                .as_ref()
                .map(|d| d.tau.to_string())
                .unwrap_or_default(),
            legendre.tau,
            sandwich.gap.map(num).unwrap_or_default(),
            holds
        ),
    };
    Ok(Outcome::report(holds, out))
}

fn cmd_duality(a: &TransferOperator, phi: &Potential, s: &Settings) -> Result<Outcome, Error> {
    let r: DualityReport =
        duality::duality_check(a, phi, s.tol.unwrap_or(duality::DEFAULT_GAP_TOL))?;
    let out = match s.format {
        Format::Json => json(&r),
        Format::Csv => format!(
            "lambda,tau_at_maximizer,gap,pass\n{},{},{},{}\n",
            num(r.lambda),
            r.tau_at_maximizer,
            num(r.gap),
            r.pass
        ),
    };
    Ok(Outcome::report(r.pass, out))
}

#[derive(Serialize)]
struct EstOutput {
    config: EstConfig,
    report: EstReport,
}

fn cmd_est(a: &TransferOperator, mu: &Measure, s: &Settings) -> Result<Outcome, Error> {
    let cfg = est::build_neighborhood(a, mu, s.eps, (1..=est::DEFAULT_ROWS).collect())?;
    let report = est::est_rate_table(a, &cfg)?;
    let pass = report.pass;
    let out = match s.format {
        Format::Csv => report.to_csv(),
        Format::Json => json(&EstOutput {
            config: cfg,
            report,
        }),
    };
    Ok(Outcome::report(pass, out))
}

#[derive(Serialize)]
struct Check {
    name: String,
    pass: bool,
}

#[derive(Serialize)]
struct PropsReport {
    checks: Vec<Check>,
    pass: bool,
}

fn random_potential(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Potential {
    Potential::from_vec((0..n).map(|_| scale * rng.gen_range(-1.0..=1.0)).collect())
}

fn random_measure(rng: &mut ChaCha8Rng, n: usize) -> Measure {
    Measure::from_unnormalized((0..n).map(|_| rng.gen::<f64>() + 1e-3).collect())
}

fn cmd_props(a: &TransferOperator, phi: &Potential, mu: Option<&Measure>, s: &Settings) -> Outcome {
    let n = a.n_points();
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut checks = Vec::new();
    let mut push = |name: String, pass: bool| checks.push(Check { name, pass });

    push("support".into(), a.satisfies_support());
    push(
        "homological_identity".into(),
        a.check_homological(32, s.seed, 1e-10),
    );

    let tol = s.tol.unwrap_or(PROPERTY_TOL);
    let mut props = spectral::LambdaProperties::uniform(true);
    for _ in 0..PROPERTY_TRIALS {
        let psi = random_potential(&mut rng, n, 2.0);
        let t = rng.gen::<f64>();
        let trial = spectral::check_lambda_properties(a, phi, &psi, t, tol)
            .unwrap_or(spectral::LambdaProperties::uniform(false));
        props = props.and(trial);
    }
    for (name, ok) in props.entries() {
        push(format!("lambda.{name}"), ok);
    }

    for k in 1..=5 {
        let ok = spectral::check_power_inequality(a, phi, k, 1e-9).unwrap_or(false);
        push(format!("power_inequality[n={k}]"), ok);
    }
    for k in 1..=5 {
        let f = random_potential(&mut rng, n, 1.0);
        let ok = a.check_twist_iterate(phi, &f, k, 1e-12).unwrap_or(false);
        push(format!("twist_iterate[n={k}]"), ok);
    }

    if let Some(mu) = mu {
        let d = a.system().point_partition();
        for k in 1..=s.n_max.min(3) {
            let ok = certificate_holds(a, mu, &d, k, &mut rng).unwrap_or(false);
            push(format!("certificate[n={k}]"), ok);
        }
    }

    let pass = checks.iter().all(|c| c.pass);
    let out = match s.format {
        Format::Json => json(&PropsReport { checks, pass }),
        Format::Csv => {
            let mut out = String::from("check,pass\n");
            for c in &checks {
                let _ = writeln!(out, "{},{}", c.name, c.pass);
            }
            out
        }
    };
    Outcome::report(pass, out)
}

/// The inner-supremum optimizer dominates point masses and random probes.
fn certificate_holds(
    a: &TransferOperator,
    mu: &Measure,
    d: &crate::system::PartitionOfUnity,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Result<bool, Error> {
    let r = tentropy::inner_sup(a, mu, d, k, tentropy::INNER_TOL)?;
    if r.value == ExtReal::NegInf {
        return Ok(true);
    }
    let n = a.n_points();
    let probes = (0..n)
        .map(|x| Measure::point_mass(n, x))
        .chain((0..CERTIFICATE_PROBES).map(|_| random_measure(rng, n)));
    for m in probes {
        if tentropy::certificate_value(a, mu, d, k, &r.c_table, &m)? > 1.0 + CERTIFICATE_SLACK {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SYS2: &[u8] = br#"{"n":2,"alpha":[1,0],"operator":[[0,1,2.0],[1,0,3.0]],
        "measure":[0.5,0.5]}"#;

    #[test]
    fn tau_reports_both_routes() {
        let out = run_bytes(Command::Tau, SYS2, &Flags::default());
        assert_eq!(out.code, EXIT_PASS, "{}", out.stderr);
        let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
        let want = 0.5 * 6f64.ln();
        for route in ["direct", "legendre"] {
            let tau = v[route]["tau"].as_f64().unwrap();
            assert!((tau - want).abs() < 1e-3, "{route}: {tau}");
        }
        assert_eq!(v["sandwich"]["holds"], true);
    }

    #[test]
    fn missing_measure_is_an_input_error() {
        let doc = br#"{"n":2,"alpha":[1,0],"operator":[[0,1,2.0],[1,0,3.0]]}"#;
        assert_eq!(
            run_bytes(Command::Tau, doc, &Flags::default()).code,
            EXIT_INPUT
        );
        assert_eq!(
            run_bytes(Command::Lambda, doc, &Flags::default()).code,
            EXIT_PASS
        );
    }

    #[test]
    fn support_violation_only_reaches_props() {
        let doc = br#"{"n":2,"alpha":[1,0],"operator":[[0,1,1.0],[0,0,1.0]]}"#;
        assert_eq!(
            run_bytes(Command::Lambda, doc, &Flags::default()).code,
            EXIT_INPUT
        );
        let out = run_bytes(Command::Props, doc, &Flags::default());
        assert_eq!(out.code, EXIT_FAIL);
        assert!(out.stdout.contains("\"homological_identity\""));
    }

    #[test]
    fn bad_flags_are_input_errors() {
        let flags = Flags {
            eps: Some(-1.0),
            ..Flags::default()
        };
        assert_eq!(run_bytes(Command::Est, SYS2, &flags).code, EXIT_INPUT);
    }

    #[test]
    fn csv_outputs_have_headers() {
        let flags = Flags {
            output: Some(Format::Csv),
            ..Flags::default()
        };
        for (cmd, header) in [
            (Command::Lambda, "lambda,"),
            (Command::Gibbs, "point,weight"),
            (Command::Tau, "direct,legendre"),
            (Command::Duality, "lambda,tau_at_maximizer"),
            (Command::Props, "check,pass"),
        ] {
            let out = run_bytes(cmd, SYS2, &flags);
            assert!(out.stdout.starts_with(header), "{cmd:?}: {}", out.stdout);
        }
    }
}
