use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde_json::{json, Value};

use qrel_core::format::{load_family, load_positive, matrix_to_json, resolve_channel};
use qrel_core::verify::{
    check_theorem1, proof_trace, run_suite, Report, Residual, SuiteConfig, DEFAULT_SLACK, SUITES,
};
use qrel_core::{entropy_ext, relative_entropy, relative_entropy_scaled, JumpEstimate, KrausOperation, StateSequenceFamily};

use crate::config::{parse_dims, positive_tol, Cli, Command, Common, FileConfig, Format};
use crate::output::{emit, fixed12, json_num, write_atomic};
use crate::svg::{line_plot, Series};
use crate::{InputError, Status};

const DEFAULT_N_MAX: usize = 1000;
const DEFAULT_WINDOW: usize = 50;
const DEFAULT_M_MAX: usize = 10;

pub fn run(cli: Cli) -> Result<Status, InputError> {
    let file = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Div { rho, sigma, rank_tol } => div(&file, &rho, &sigma, rank_tol),
        Command::Entropy { rho } => {
            println!("{}", fixed12(entropy_ext(&load_positive(&rho)?).to_f64()));
            Ok(Status::Pass)
        }
        Command::Apply { channel, rho, common } => apply(&file, &channel, &rho, common),
        Command::Verify {
            suite,
            trials,
            dims,
            nmax,
            window,
            m_max,
            slack,
            common,
        } => {
            let dims = match file.pick(dims, &["dims"])? {
                Some(d) => parse_dims(&d)?,
                None => (2, 6),
            };
            let cfg = SuiteConfig {
                seed: seed(&file, common.seed, "verify")?,
                trials: file.pick(trials, &["trials"])?,
                dims,
                n_max: file.pick(nmax, &["nmax", "n_max"])?,
                window: file.pick(window, &["window"])?,
                m_max: file.pick(m_max, &["m_max"])?,
                slack: positive_tol("slack", file.pick(slack, &["slack"])?)?,
            };
            verify(&file, &suite, &cfg, &common)
        }
        Command::Jump {
            family,
            channel,
            nmax,
            window,
            slack,
            plot,
            common,
        } => {
            let n_max = file.pick(nmax, &["nmax", "n_max"])?.unwrap_or(DEFAULT_N_MAX);
            let window = file.pick(window, &["window"])?.unwrap_or(DEFAULT_WINDOW);
            let slack = positive_tol("slack", file.pick(slack, &["slack"])?)?.unwrap_or(DEFAULT_SLACK);
            let channel = channel_id(&file, channel)?;
            jump(&file, &family, &channel, n_max, window, slack, plot.as_deref(), &common)
        }
        Command::Trace {
            family,
            channel,
            m_max,
            nmax,
            slack,
            common,
        } => {
            let n_max = file.pick(nmax, &["nmax", "n_max"])?.unwrap_or(DEFAULT_N_MAX);
            let m_max = file.pick(m_max, &["m_max"])?.unwrap_or(DEFAULT_M_MAX);
            let slack = positive_tol("slack", file.pick(slack, &["slack"])?)?.unwrap_or(DEFAULT_SLACK);
            let channel = channel_id(&file, channel)?;
            trace(&file, &family, &channel, m_max, n_max, slack, &common)
        }
    }
}

fn seed(file: &FileConfig, flag: Option<u64>, what: &str) -> Result<u64, InputError> {
    file.pick(flag, &["seed"])?
        .ok_or_else(|| InputError(format!("{what} is randomized and needs --seed")))
}

fn channel_id(file: &FileConfig, flag: Option<String>) -> Result<String, InputError> {
    file.pick(flag, &["channel"])?
        .ok_or_else(|| InputError("--channel is required".into()))
}

fn format(file: &FileConfig, common: &Common) -> Result<Format, InputError> {
    Ok(file.pick(common.format, &["format"])?.unwrap_or(Format::Json))
}

fn out_path(file: &FileConfig, common: &Common) -> Result<Option<std::path::PathBuf>, InputError> {
    file.pick(common.out.clone(), &["out"])
}

fn div(file: &FileConfig, rho: &Path, sigma: &Path, rank_tol: Option<f64>) -> Result<Status, InputError> {
    let rank_tol = positive_tol("rank_tol", file.pick(rank_tol, &["rank_tol"])?)?;
    let (rho, sigma) = (load_positive(rho)?, load_positive(sigma)?);
    if rho.dim() != sigma.dim() {
        return Err(InputError(format!(
            "dimension mismatch: rho is {}x{0}, sigma is {}x{1}",
            rho.dim(),
            sigma.dim()
        )));
    }
    println!("{}", fixed12(relative_entropy(&rho, &sigma, rank_tol).to_f64()));
    Ok(Status::Pass)
}

fn apply(file: &FileConfig, channel: &str, rho: &Path, common: Common) -> Result<Status, InputError> {
    let rho = load_positive(rho)?;
    let op = resolve_channel(channel, rho.dim(), file.pick(common.seed, &["seed"])?)?;
    let image = matrix_to_json(op.apply(&rho)?.matrix());
    match out_path(file, &common)? {
        Some(path) => write_atomic(&path, &(image + "\n"))?,
        None => println!("{image}"),
    }
    Ok(Status::Pass)
}

fn verify(file: &FileConfig, suite: &str, cfg: &SuiteConfig, common: &Common) -> Result<Status, InputError> {
    if !SUITES.contains(&suite) {
        return Err(InputError(format!(
            "unknown suite {suite:?}\nusage: qrel verify <{}> --seed <SEED> [--trials N] [--dims LO..HI] [--out FILE]",
            SUITES.join("|")
        )));
    }
    let report = run_suite(suite, cfg)?;
    emit(&report, out_path(file, common)?.as_deref(), format(file, common)?)?;
    Ok(if report.pass { Status::Pass } else { Status::Fail })
}

fn estimate_json(e: &JumpEstimate) -> Value {
    json!({
        "limsup_tail": json_num(e.limsup_tail.to_f64()),
        "limit_value": json_num(e.limit_value),
        "estimate": json_num(e.estimate),
        "n_max": e.n_max,
        "window": e.window,
        "infinite": e.infinite,
        "decade_sups": e.decade_sups.iter().map(|&x| json_num(x)).collect::<Vec<_>>(),
        "converged": e.converged,
    })
}

fn family_with_channel(
    file: &FileConfig,
    family: &Path,
    channel: &str,
    common: &Common,
) -> Result<(StateSequenceFamily, KrausOperation), InputError> {
    let family = load_family(family)?;
    let op = resolve_channel(channel, family.dim(), file.pick(common.seed, &["seed"])?)?;
    Ok((family, op))
}

fn base_params(family: &StateSequenceFamily, channel: &str, n_max: usize, slack: f64) -> BTreeMap<String, Value> {
    let mut params = BTreeMap::new();
    params.insert("family".into(), json!(family.to_string()));
    params.insert("channel".into(), json!(channel));
    params.insert("n_max".into(), json!(n_max));
    params.insert("slack".into(), json!(slack));
    params
}

#[allow(clippy::too_many_arguments)]
fn jump(
    file: &FileConfig,
    family: &Path,
    channel: &str,
    n_max: usize,
    window: usize,
    slack: f64,
    plot: Option<&Path>,
    common: &Common,
) -> Result<Status, InputError> {
    let start = Instant::now();
    let (family, op) = family_with_channel(file, family, channel, common)?;
    let outcome = check_theorem1(&family, &op, n_max, window, slack)?;
    let mut params = base_params(&family, channel, n_max, slack);
    params.insert("window".into(), json!(window));
    params.insert("input_jump".into(), json_num(outcome.input_jump));
    if let Some(e) = &outcome.input_estimate {
        params.insert("input_estimate".into(), estimate_json(e));
    }
    params.insert("output_estimate".into(), estimate_json(&outcome.output));
    let excess = if outcome.input_jump.is_infinite() {
        f64::NEG_INFINITY
    } else {
        outcome.output.estimate - outcome.input_jump
    };
    let residuals = vec![Residual::at_most(0, "output_minus_input", excess, slack)];
    let mut report = Report::new("jump", params, file.pick(common.seed, &["seed"])?, residuals);
    report.runtime_ms = start.elapsed().as_millis() as u64;
    emit(&report, out_path(file, common)?.as_deref(), format(file, common)?)?;
    println!(
        "input jump {}, output estimate {}",
        fixed12(outcome.input_jump),
        fixed12(outcome.output.estimate)
    );
    if let Some(path) = plot {
        // plotting never changes the exit code
        if let Err(InputError(msg)) = write_plot(path, &family, &op, n_max) {
            eprintln!("warning: plot not written: {msg}");
        }
    }
    Ok(if report.pass { Status::Pass } else { Status::Fail })
}

fn write_plot(path: &Path, family: &StateSequenceFamily, op: &KrausOperation, n_max: usize) -> Result<(), InputError> {
    let indices: Vec<usize> = match family.defined_indices() {
        Some(ix) => ix.into_iter().filter(|&n| n <= n_max).collect(),
        None => (1..=n_max).collect(),
    };
    let mut input = Vec::with_capacity(indices.len());
    let mut output = Vec::with_capacity(indices.len());
    for n in indices {
        let t = family.term(n)?;
        input.push((n as f64, relative_entropy_scaled(&t.rho, &t.sigma, None).to_f64()));
        let (r, s) = (op.apply_scaled(&t.rho)?, op.apply_scaled(&t.sigma)?);
        output.push((n as f64, relative_entropy_scaled(&r, &s, None).to_f64()));
    }
    let svg = line_plot(
        &family.to_string(),
        "n",
        "relative entropy",
        &[
            Series {
                label: "D(rho_n || sigma_n)",
                color: "#1f77b4",
                points: input,
            },
            Series {
                label: "D(Phi(rho_n) || Phi(sigma_n))",
                color: "#d62728",
                points: output,
            },
        ],
    );
    write_atomic(path, &svg)
}

fn trace(
    file: &FileConfig,
    family: &Path,
    channel: &str,
    m_max: usize,
    n_max: usize,
    slack: f64,
    common: &Common,
) -> Result<Status, InputError> {
    let start = Instant::now();
    let (family, op) = family_with_channel(file, family, channel, common)?;
    if m_max == 0 {
        return Err(InputError("--m-max must be at least 1".into()));
    }
    let ms: Vec<usize> = (1..=m_max).collect();
    let traces = proof_trace(&family, &op, &ms, n_max, slack)?;
    let mut params = base_params(&family, channel, n_max, slack);
    params.insert("m_max".into(), json!(m_max));
    let mut residuals = Vec::new();
    for t in &traces {
        for (name, c) in &t.checks {
            residuals.push(Residual {
                trial: t.m,
                name: name.clone(),
                value: c.residual,
                bound: c.bound,
                pass: c.pass,
            });
        }
    }
    let mut report = Report::new("trace", params, file.pick(common.seed, &["seed"])?, residuals);
    report.runtime_ms = start.elapsed().as_millis() as u64;
    emit(&report, out_path(file, common)?.as_deref(), format(file, common)?)?;
    print_table(&traces);
    Ok(if report.pass { Status::Pass } else { Status::Fail })
}

fn print_table(traces: &[qrel_core::ProofTrace]) {
    let Some(first) = traces.first() else { return };
    let names: Vec<&String> = first.checks.keys().collect();
    let header: Vec<String> = names.iter().map(|n| format!("{n:>20}")).collect();
    println!("{:>4} {}", "m", header.join(" "));
    for t in traces {
        let row: Vec<String> = names
            .iter()
            .map(|n| {
                let c = &t.checks[*n];
                format!("{:>15.3e} {}", c.residual, if c.pass { "ok  " } else { "FAIL" })
            })
            .collect();
        println!("{:>4} {}", t.m, row.join(" "));
    }
}
