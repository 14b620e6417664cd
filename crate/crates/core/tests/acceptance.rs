//! Acceptance criteria, one line per criterion. Runs without the libtest
//! harness so the lines are printed even when output is captured.

use std::f64::consts::LN_2;
use std::process::ExitCode;
use std::time::Instant;

use qrel_core::channel::random_channel;
use qrel_core::sequence::make_jump_family;
use qrel_core::verify::{estimate_jump, proof_trace, run_suite, Report, SuiteConfig};
use qrel_core::{KrausOperation, Result};

const SEED: u64 = 20240917;

const DPI_TOL: f64 = 1e-8;
const IDENTITY_TOL: f64 = 1e-9;
const SUBADDITIVITY_TOL: f64 = 1e-9;
const DONALD_REL_TOL: f64 = 1e-9;
const CLASSICAL_TOL: f64 = 1e-10;
const REPRESENTATION_TOL: f64 = 1e-8;
const JUMP_TOL: f64 = 5e-3;
const COLLAPSE_TOL: f64 = 1e-6;
const POINTWISE_TOL: f64 = 1e-8;
const LEMMA3_TOL: f64 = 1e-3;
const ORTHOGONAL_TOL: f64 = 1e-10;
const REDUCTION_TOL: f64 = 1e-6;

const N_MAX: usize = 1000;
const WINDOW: usize = 50;

type Criterion = (&'static str, fn() -> Result<Outcome>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        pass,
        detail: detail.into(),
    })
}

fn suite(name: &str, trials: Option<usize>) -> Result<Report> {
    let mut cfg = SuiteConfig::new(SEED);
    cfg.trials = trials;
    run_suite(name, &cfg)
}

fn worst(report: &Report, name: &str) -> f64 {
    report.max_abs(name).unwrap_or(f64::NAN)
}

/// Largest `value` (signed) among residuals with the given name.
fn worst_signed(report: &Report, name: &str) -> f64 {
    report
        .residuals
        .iter()
        .filter(|r| r.name == name)
        .map(|r| r.value)
        .fold(f64::NEG_INFINITY, f64::max)
}

fn all_named_pass(report: &Report, name: &str, count: usize) -> bool {
    report.count(name) >= count && report.residuals.iter().filter(|r| r.name == name).all(|r| r.pass)
}

fn c1_dpi() -> Result<Outcome> {
    let r = suite("dpi", Some(1000))?;
    let gap = worst_signed(&r, "dpi_gap");
    outcome(
        r.count("dpi_gap") == 1000 && gap <= DPI_TOL && r.pass,
        format!("1000 trials, max gap {gap:.3e} (bound {DPI_TOL:e})"),
    )
}

fn c2_identities() -> Result<Outcome> {
    let scaling = suite("scaling", Some(500))?;
    let sums = suite("sums", Some(500))?;
    let s = worst(&scaling, "scale_both").max(worst(&scaling, "scale_sigma"));
    let a = worst(&sums, "additivity");
    let g = worst_signed(&sums, "subadditivity_neg_gap");
    let pass = all_named_pass(&scaling, "scale_both", 500)
        && all_named_pass(&scaling, "scale_sigma", 500)
        && all_named_pass(&sums, "additivity", 500)
        && all_named_pass(&sums, "subadditivity_neg_gap", 500)
        && s <= IDENTITY_TOL
        && a <= IDENTITY_TOL
        && g <= SUBADDITIVITY_TOL;
    outcome(
        pass,
        format!("500 each, scaling {s:.3e}, additivity {a:.3e}, min subadditivity gap {:.3e}", -g),
    )
}

fn c3_donald() -> Result<Outcome> {
    let r = suite("donald", Some(200))?;
    // each residual carries its own bound 1e-9 · max(1, lhs)
    let ok = r
        .residuals
        .iter()
        .all(|x| x.value.abs() <= x.bound && x.bound >= DONALD_REL_TOL);
    outcome(
        ok && r.count("donald_residual") == 200,
        format!("200 trials, max |residual| {:.3e}", worst(&r, "donald_residual")),
    )
}

/// `Σ p ln(p/q) + Σq − Σp`, with `+inf` when `p` leaves the support of `q`.
fn kl_lindblad(p: &[f64], q: &[f64]) -> f64 {
    let mut s = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b == 0.0 {
                return f64::INFINITY;
            }
            s += a * (a / b).ln();
        }
    }
    s + q.iter().sum::<f64>() - p.iter().sum::<f64>()
}

fn c4_oracle() -> Result<Outcome> {
    let r = suite("oracle", Some(500))?;
    let classical = worst(&r, "classical");
    let rep = worst(&r, "representation");
    // spot-check the oracle itself against hand values
    let hand = (kl_lindblad(&[0.5, 0.5], &[0.25, 0.75]) - (0.5 * 2f64.ln() + 0.5 * (2.0f64 / 3.0).ln())).abs()
        < 1e-15
        && kl_lindblad(&[0.0, 0.0], &[0.2, 0.3]) == 0.5
        && kl_lindblad(&[1.0, 0.0], &[0.0, 1.0]).is_infinite();
    let d = qrel_core::relative_entropy(
        &qrel_core::PositiveOperator::from_real_diagonal(&[0.5, 0.3, 0.0])?,
        &qrel_core::PositiveOperator::from_real_diagonal(&[0.2, 0.4, 0.1])?,
        None,
    )
    .to_f64();
    let direct = (d - kl_lindblad(&[0.5, 0.3, 0.0], &[0.2, 0.4, 0.1])).abs() <= CLASSICAL_TOL;
    outcome(
        hand && direct
            && all_named_pass(&r, "classical", 200)
            && all_named_pass(&r, "representation", 500)
            && classical <= CLASSICAL_TOL
            && rep <= REPRESENTATION_TOL,
        format!("classical {classical:.3e} over 500, representation {rep:.3e} over 500"),
    )
}

/// `a_n = c + (1−1/n) ln((1−1/n)/(1−q_n))`, `q_n = e^{−cn}/n`.
fn jump_oracle(c: f64, n: usize) -> f64 {
    let n = n as f64;
    let q = (-c * n).exp() / n;
    let head = if n == 1.0 { 0.0 } else { (1.0 - 1.0 / n) * ((1.0 - 1.0 / n) / (1.0 - q)).ln() };
    c + head
}

fn c5_jump_ground_truth() -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for c in [0.25, LN_2, 1.5] {
        let e = estimate_jump(&make_jump_family(c, 2)?, None, N_MAX, WINDOW)?;
        let oracle = (N_MAX - WINDOW + 1..=N_MAX).map(|n| jump_oracle(c, n)).fold(f64::MIN, f64::max);
        let err = (e.estimate - c).abs();
        pass &= err <= JUMP_TOL && (e.estimate - oracle).abs() <= 1e-9;
        parts.push(format!("c={c:.4}: {:.6} (err {err:.2e})", e.estimate));
    }
    outcome(pass, parts.join(", "))
}

fn c6_monotone() -> Result<Outcome> {
    let r = suite("theorem1", Some(200))?;
    let ch = worst_signed(&r, "channel_excess");
    let op = worst_signed(&r, "operation_excess");
    let eq = worst(&r, "dephasing_equality");
    outcome(
        r.pass
            && r.count("channel_excess") == 200
            && r.count("operation_excess") == 50
            && ch <= JUMP_TOL
            && op <= JUMP_TOL
            && eq <= JUMP_TOL,
        format!("200 channels max excess {ch:.3e}, 50 operations max excess {op:.3e}, dephasing |est − ln2| {eq:.3e}"),
    )
}

fn c7_collapse() -> Result<Outcome> {
    let e = estimate_jump(
        &make_jump_family(LN_2, 2)?,
        Some(&KrausOperation::depolarizing(2)),
        N_MAX,
        WINDOW,
    )?;
    outcome(
        e.estimate <= COLLAPSE_TOL,
        format!("output estimate {:.3e} (bound {COLLAPSE_TOL:e})", e.estimate),
    )
}

fn c8_proof_trace() -> Result<Outcome> {
    let family = make_jump_family(LN_2, 2)?;
    let ms: Vec<usize> = (1..=10).collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for (label, op) in [
        ("identity", KrausOperation::identity(2)),
        ("dephasing", KrausOperation::dephasing(2)),
        ("random 2->3", random_channel(2, 3, 2, SEED)?),
    ] {
        let traces = proof_trace(&family, &op, &ms, N_MAX, JUMP_TOL)?;
        let mut worst_pointwise: f64 = 0.0;
        for t in &traces {
            for name in ["i_monotone_in_m", "ii_below_a_n", "iii_tail_bound", "v_pinching"] {
                let c = &t.checks[name];
                pass &= c.pass && c.residual.abs() <= POINTWISE_TOL;
                worst_pointwise = worst_pointwise.max(c.residual.abs());
            }
            pass &= t.pass();
        }
        let last = traces.last().expect("non-empty m list");
        let sup = last
            .a_n
            .iter()
            .zip(&last.a_m_n)
            .map(|(a, b)| a - b)
            .fold(f64::NEG_INFINITY, f64::max);
        pass &= sup <= LN_2 + JUMP_TOL;
        parts.push(format!("{label}: pointwise {worst_pointwise:.1e}, sup(a−a^10) {sup:.4}"));
    }
    outcome(pass, parts.join("; "))
}

fn c9_ladder() -> Result<Outcome> {
    let r = suite("ladder", None)?;
    let n_max = r.params.get("n_max").and_then(|v| v.as_u64());
    let m_max = r.params.get("m_max").and_then(|v| v.as_u64());
    let conditions = ["monotone", "covering", "commutation", "rank", "convergence"]
        .iter()
        .all(|c| r.residuals.iter().any(|x| x.name == format!("jump_{c}") && x.pass));
    outcome(
        r.pass && conditions && n_max == Some(1000) && m_max == Some(20),
        format!(
            "5/5 conditions on n <= {}, m <= {}; fixtures fail only their named condition",
            n_max.unwrap_or(0),
            m_max.unwrap_or(0)
        ),
    )
}

fn c10_continuity() -> Result<Outcome> {
    let l2 = suite("lemma2", None)?;
    let l3 = suite("lemma3", None)?;
    let dev2 = worst(&l2, "jump_deviation");
    let dev3 = worst(&l3, "jump_deviation");
    let orth = worst(&l3, "orthogonal_pure");
    outcome(
        l2.pass
            && l3.pass
            && all_named_pass(&l2, "jump_trend", 10)
            && dev3 <= LEMMA3_TOL
            && orth <= ORTHOGONAL_TOL,
        format!("ladder m=1..10 max deviation {dev2:.2e}; truncation deviation {dev3:.2e}, 2ln2 residual {orth:.1e}"),
    )
}

fn c11_reduction() -> Result<Outcome> {
    let r = suite("reduction", Some(50))?;
    let excess = worst_signed(&r, "reduction_excess");
    outcome(
        r.pass && r.count("reduction_excess") == 50 && excess <= REDUCTION_TOL,
        format!("50 operations, max estimate(op) − estimate(extension) {excess:.3e}"),
    )
}

fn c12_determinism() -> Result<Outcome> {
    let mut differing = Vec::new();
    for name in qrel_core::verify::SUITES {
        let cfg = SuiteConfig::new(SEED ^ 0x5eed);
        let a = run_suite(name, &cfg)?.to_json_without_timing();
        let b = run_suite(name, &cfg)?.to_json_without_timing();
        if a != b {
            differing.push(*name);
        }
    }
    outcome(
        differing.is_empty(),
        if differing.is_empty() {
            format!("{} suites byte-identical on rerun", qrel_core::verify::SUITES.len())
        } else {
            format!("differing: {}", differing.join(", "))
        },
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("dpi", c1_dpi),
        ("identities", c2_identities),
        ("donald", c3_donald),
        ("classical oracle", c4_oracle),
        ("jump ground truth", c5_jump_ground_truth),
        ("jump monotonicity", c6_monotone),
        ("depolarizing collapse", c7_collapse),
        ("proof trace", c8_proof_trace),
        ("ladder", c9_ladder),
        ("ladder continuity", c10_continuity),
        ("operation reduction", c11_reduction),
        ("determinism", c12_determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<22} {}  {} [{:.1}s]",
            i + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
