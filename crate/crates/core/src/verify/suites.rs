//! Seeded verification suites. Trial `i` draws from `trial_seed(seed, i)`,
//! trials run in parallel and are collected in index order.

use std::collections::BTreeMap;
use std::f64::consts::LN_2;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::report::{Report, Residual};
use super::trace::{check_lemma2, check_lemma3, proof_trace};
use super::{check_dini, check_pinching_identity, check_theorem1, estimate_jump, DEFAULT_SLACK};
use crate::channel::{random_channel, random_operation, KrausOperation};
use crate::divergence::{
    donald, relative_entropy, relative_entropy_raw, relative_entropy_via_rep, scaling_residuals,
    sum_decomposition_check, symmetrized_divergence,
};
use crate::error::{Error, Result};
use crate::extended::Gap;
use crate::operator::{c, conjugate, CMatrix, PositiveOperator, Projector};
use crate::random::{haar_unitary, random_full_rank_state, random_positive, random_state, rng, trial_seed, SeededRng};
use crate::sequence::{
    build_threshold_ladder, jump_thresholds, make_continuous_family, make_jump_family, verify_ladder, ProjectorLadder,
    StateSequenceFamily,
};

/// Names accepted by [`run_suite`].
pub const SUITES: &[&str] = &[
    "dpi", "donald", "sums", "scaling", "pinching", "lemma2", "lemma3", "dini", "oracle", "theorem1", "ladder",
    "reduction",
];

/// Parameters shared by all suites; `None` selects the suite default.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    pub trials: Option<usize>,
    /// Inclusive range of Hilbert-space dimensions.
    pub dims: (usize, usize),
    pub n_max: Option<usize>,
    pub window: Option<usize>,
    pub m_max: Option<usize>,
    pub slack: Option<f64>,
}

impl SuiteConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            trials: None,
            dims: (2, 6),
            n_max: None,
            window: None,
            m_max: None,
            slack: None,
        }
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = Some(trials);
        self
    }

    fn trials(&self, default: usize) -> usize {
        self.trials.unwrap_or(default)
    }

    fn dim(&self, r: &mut SeededRng) -> usize {
        r.random_range(self.dims.0..=self.dims.1)
    }

    fn validate(&self) -> Result<()> {
        if self.dims.0 < 2 || self.dims.0 > self.dims.1 || self.dims.1 > 8 {
            return Err(Error::InvalidArgument(format!(
                "dimension range {}..{} must lie within 2..8",
                self.dims.0, self.dims.1
            )));
        }
        if self.slack.is_some_and(|s| s.is_nan() || s <= 0.0) {
            return Err(Error::InvalidArgument("slack must be positive".into()));
        }
        Ok(())
    }
}

type Params = BTreeMap<String, Value>;

/// Runs a named suite. Unknown names are an [`Error::InvalidArgument`].
pub fn run_suite(name: &str, cfg: &SuiteConfig) -> Result<Report> {
    cfg.validate()?;
    let start = Instant::now();
    let mut params = Params::new();
    params.insert("dims".into(), json!([cfg.dims.0, cfg.dims.1]));
    let residuals = match name {
        "dpi" => dpi(cfg, &mut params),
        "donald" => donald_suite(cfg, &mut params),
        "sums" => sums(cfg, &mut params),
        "scaling" => scaling(cfg, &mut params),
        "pinching" => pinching(cfg, &mut params),
        "lemma2" => lemma2(cfg, &mut params),
        "lemma3" => lemma3(cfg, &mut params),
        "dini" => dini(cfg, &mut params),
        "oracle" => oracle(cfg, &mut params),
        "theorem1" => theorem1(cfg, &mut params),
        "ladder" => ladder(cfg, &mut params),
        "reduction" => reduction(cfg, &mut params),
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown suite {other:?}; expected one of {}",
                SUITES.join(", ")
            )))
        }
    }?;
    let mut report = Report::new(name, params, Some(cfg.seed), residuals);
    report.runtime_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

fn per_trial(
    cfg: &SuiteConfig,
    trials: usize,
    f: impl Fn(usize, &mut SeededRng) -> Result<Vec<Residual>> + Sync,
) -> Result<Vec<Residual>> {
    let rows: Vec<Vec<Residual>> = (0..trials)
        .into_par_iter()
        .map(|i| f(i, &mut rng(trial_seed(cfg.seed, i as u64))))
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

/// Random positive operator with a random rank and trace.
fn any_positive(r: &mut SeededRng, d: usize) -> PositiveOperator {
    let rank = r.random_range(1..=d);
    if r.random_bool(0.5) {
        random_state(r, d, rank)
    } else {
        random_positive(r, d, rank)
    }
}

/// Full-rank positive operator with trace in `[0.2, 2]`.
fn full_rank_positive(r: &mut SeededRng, d: usize) -> PositiveOperator {
    let t = r.random_range(0.2..2.0);
    random_full_rank_state(r, d).scale(t).expect("positive scale")
}

fn dpi(cfg: &SuiteConfig, params: &mut Params) -> Result<Vec<Residual>> {
    let trials = cfg.trials(1000);
    params.insert("trials".into(), json!(trials));
    params.insert("kraus_ranks".into(), json!([1, 3]));
    params.insert("tolerance".into(), json!(1e-8));
    per_trial(cfg, trials, |i, r| {
        let d_in = cfg.dim(r);
        let d_out = cfg.dim(r);
        let k = r.random_range(1..=3usize).max(d_in.div_ceil(d_out));
        let seed: u64 = r.random();
        let op = if i % 4 == 3 {
            random_operation(d_in, d_out, k, seed)?.0
        } else {
            random_channel(d_in, d_out, k, seed)?
        };
        let rho = any_positive(r, d_in);
        let sigma = full_rank_positive(r, d_in);
        let before = relative_entropy(&rho, &sigma, None).to_f64();
        let after = relative_entropy(&op.apply(&rho)?, &op.apply(&sigma)?, None).to_f64();
        let gap = if before.is_infinite() { f64::NEG_INFINITY } else { after - before };
        Ok(vec![Residual::at_most(i, "dpi_gap", gap, 1e-8)])
    })
}

fn donald_suite(cfg: &SuiteConfig, params: &mut Params) -> Result<Vec<Residual>> {
    let trials = cfg.trials(200);
    params.insert("trials".into(), json!(trials));
    params.insert("tolerance".into(), json!("1e-9 * max(1, lhs)"));
    per_trial(cfg, trials, |i, r| {
        let d = cfg.dim(r);
        let rho = any_positive(r, d);
        let sigma = any_positive(r, d);
        let omega = full_rank_positive(r, d);
        let p = r.random_range(0.0..=1.0);
        let out = donald(&rho, &sigma, &omega, p)?;
        Ok(vec![Residual::abs_at_most(
            i,
            "donald_residual",
            out.residual,
            1e-9 * out.lhs.max(1.0),
        )])
    })
}

fn scaling(cfg: &SuiteConfig, params: &mut Params) -> Result<Vec<Residual>> {
    let trials = cfg.trials(500);
    params.insert("trials".into(), json!(trials));
    params.insert("tolerance".into(), json!(1e-9));
    per_trial(cfg, trials, |i, r| {
        let d = cfg.dim(r);
        let rho = any_positive(r, d);
        let sigma = full_rank_positive(r, d);
        let factor = (r.random_range(-1.0..1.0f64) * std::f64::consts::LN_10).exp();
        let (joint, single) = scaling_residuals(&rho, &sigma, factor)?;
        Ok(vec![
            Residual::abs_at_most(i, "scale_both", joint, 1e-9),
            Residual::abs_at_most(i, "scale_sigma", single, 1e-9),
        ])
    })
}

/// Embeds a `k × k` operator in the first (`low`) or last block of `d`.
fn embed(x: &PositiveOperator, d: usize, low: bool) -> PositiveOperator {
    let k = x.dim();
    let offset = if low { 0 } else { d - k };
    let mut m = CMatrix::zeros(d, d);
    m.view_mut((offset, offset), (k, k)).copy_from(x.matrix());
    PositiveOperator::from_psd_matrix(&m).expect("embedded PSD")
}

fn sums(cfg: &SuiteConfig, params: &mut Params) -> Result<Vec<Residual>> {
    let trials = cfg.trials(500);
    params.insert("trials".into(), json!(trials));
    params.insert("tolerance".into(), json!(1e-9));
    per_trial(cfg, trials, |i, r| {
        // orthogonal additivity on complementary blocks, rotated together
        let d = cfg.dim(r);
        let k = r.random_range(1..d);
        let w = haar_unitary(r, d);
        let rotate = |x: PositiveOperator| x.conjugate_by(&w);
        let rho = rotate(embed(&any_positive(r, k), d, true))?;
        let omega = rotate(embed(&full_rank_positive(r, k), d, true))?;
        let sigma = rotate(embed(&any_positive(r, d - k), d, false))?;
        let theta = rotate(embed(&full_rank_positive(r, d - k), d, false))?;
        let exact = sum_decomposition_check(&rho, &sigma, &omega, &theta)?;
        let additivity = match exact.gap {
            Gap::Finite(g) if exact.exact => Residual::abs_at_most(i, "additivity", g, 1e-9),
            _ => Residual::flag(i, "additivity", false),
        };
        // subadditivity for arbitrary positive operators
        let d = cfg.dim(r);
        let (rho, sigma) = (any_positive(r, d), any_positive(r, d));
        let (omega, theta) = (full_rank_positive(r, d), full_rank_positive(r, d));
        let general = sum_decomposition_check(&rho, &sigma, &omega, &theta)?;
        let sub = match general.gap {
            Gap::Finite(g) => Residual::at_most(i, "subadditivity_neg_gap", -g, 1e-9),
            Gap::PositiveInfinity => Residual::at_most(i, "subadditivity_neg_gap", f64::NEG_INFINITY, 1e-9),
            _ => Residual::flag(i, "subadditivity_neg_gap", false),
        };
        Ok(vec![additivity, sub])
    })
}

fn pinching(cfg: &SuiteConfig, params: &mut Params) -> Result<Vec<Residual>> {
    let trials = cfg.trials(300);
    params.insert("trials".into(), json!(trials));
    params.insert("tolerance".into(), json!(1e-8));
    per_trial(cfg, trials, |i, r| {
        let d = cfg.dim(r);
        let sigma = full_rank_positive(r, d);
        let rank = r.random_range(0..=d);
        let p = Projector::from_spectrum(sigma.spectrum(), |j, _| j < rank);
        let rho = any_positive(r, d);
        let out = check_pinching_identity(&rho, &sigma, &p)?;
        Ok(vec![Residual::abs_at_most(i, "pinching_residual", out.residual, 1e-8)])
    })
}

/// Classical KL with the Lindblad terms `Σq − Σp`; `+inf` on support violation.
pub fn classical_oracle(p: &[f64], q: &[f64]) -> f64 {
    let mut kl = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi > 0.0 {
            if qi == 0.0 {
                return f64::INFINITY;
            }
            kl += pi * (pi / qi).ln();
        }
    }
    kl + q.iter().sum::<f64>() - p.iter().sum::<f64>()
}

fn diagonal(values: &[f64], w: &CMatrix) -> PositiveOperator {
    let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(values.len(), values.iter().map(|&v| c(v))));
    PositiveOperator::from_psd_matrix(&conjugate(w, &d)).expect("rotated diagonal is PSD")
}

fn oracle(cfg: &SuiteConfig, params: &mut Params) -> Result<Vec<Residual>> {
    let trials = cfg.trials(500);
    params.insert("trials".into(), json!(trials));
    params.insert("tolerance_classical".into(), json!(1e-10));
    params.insert("tolerance_representation".into(), json!(1e-8));
    per_trial(cfg, trials, |i, r| {
        let d = cfg.dim(r);
        let mut draw = |zero_prob: f64| -> Vec<f64> {
            (0..d)
                .map(|_| if r.random_bool(zero_prob) { 0.0 } else { r.random_range(0.01..1.0) })
                .collect()
        };
        let p = draw(0.2);
        let q = draw(if i % 2 == 0 { 0.0 } else { 0.2 });
        let w = haar_unitary(r, d);
        let want = classical_oracle(&p, &q);
        let got = relative_entropy(&diagonal(&p, &w), &diagonal(&q, &w), None).to_f64();
        let classical = match (want.is_infinite(), got.is_infinite()) {
            (true, true) => Residual::abs_at_most(i, "classical", 0.0, 1e-10),
            (false, false) => Residual::abs_at_most(i, "classical", got - want, 1e-10),
            _ => Residual::flag(i, "classical", false),
        };
        let rho = any_positive(r, d);
        let sigma = full_rank_positive(r, d);
        let definition = relative_entropy_raw(&rho, &sigma, None);
        let representation = relative_entropy_via_rep(&rho, &sigma, None).to_f64();
        Ok(vec![
            classical,
            Residual::abs_at_most(i, "representation", representation - definition, 1e-8),
        ])
    })
}

fn jump_params(cfg: &SuiteConfig, params: &mut Params, n_max: usize, window: usize, slack: f64) {
    params.insert("n_max".into(), json!(cfg.n_max.unwrap_or(n_max)));
    params.insert("window".into(), json!(cfg.window.unwrap_or(window)));
    params.insert("slack".into(), json!(cfg.slack.unwrap_or(slack)));
}

fn lemma2(cfg: &SuiteConfig, params: &mut Params) -> Result<Vec<Residual>> {
    let n_max = cfg.n_max.unwrap_or(1000);
    let m_max = cfg.m_max.unwrap_or(10);
    let tol = 1e-3;
    params.insert("n_max".into(), json!(n_max));
    params.insert("m_max".into(), json!(m_max));
    params.insert("tolerance".into(), json!(tol));
    let family = make_jump_family(LN_2, 2)?;
    let ladder = build_threshold_ladder(&family, &jump_thresholds(LN_2, 1, m_max), 1, n_max)?;
    let mut out: Vec<Residual> = (1..=m_max)
        .into_par_iter()
        .map(|m| -> Result<Vec<Residual>> {
            let o = check_lemma2(&family, &ladder, m, n_max, tol)?;
            Ok(vec![
                Residual::at_most(m, "jump_deviation", o.deviation, tol),
                Residual::flag(m, "jump_trend", o.trend_non_increasing),
            ])
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let cont = make_continuous_family(cfg.dims.0.max(2), cfg.seed)?;
    let d = cont.dim();
    let identity = ProjectorLadder::explicit(1, 1, n_max, move |_, _| Projector::identity(d));
    let o = check_lemma2(&cont, &identity, 1, n_max, 1e-2)?;
    out.push(Residual::at_most(0, "continuous_deviation", o.deviation, 1e-2));
    out.push(Residual::flag(0, "continuous_trend", o.trend_non_increasing));
    Ok(out)
}

fn lemma3(cfg: &SuiteConfig, params: &mut Params) -> Result<Vec<Residual>> {
    let n_max = cfg.n_max.unwrap_or(1000);
    let trials = cfg.trials(100);
    params.insert("n_max".into(), json!(n_max));
    params.insert("trials".into(), json!(trials));
    params.insert("tolerance".into(), json!(1e-3));
    let mut out = Vec::new();
    let o = check_lemma3(&make_jump_family(LN_2, 2)?, n_max, 1e-3)?;
    out.push(Residual::at_most(0, "jump_deviation", o.deviation, 1e-3));
    out.push(Residual::flag(0, "jump_trend", o.trend_non_increasing));
    let e0 = PositiveOperator::from_real_diagonal(&[1.0, 0.0])?;
    let e1 = PositiveOperator::from_real_diagonal(&[0.0, 1.0])?;
    let orth = symmetrized_divergence(&e0.into(), &e1.into())?;
    out.push(Residual::abs_at_most(0, "orthogonal_pure", orth - 2.0 * LN_2, 1e-10));
    // finiteness and ρ = σ on random pairs, including orthogonal supports
    out.extend(per_trial(cfg, trials, |i, r| {
        let d = cfg.dim(r);
        let rho = any_positive(r, d);
        let sigma = any_positive(r, d);
        let v = symmetrized_divergence(&rho.clone().into(), &sigma.into())?;
        let same = symmetrized_divergence(&rho.clone().into(), &rho.into())?;
        Ok(vec![
            Residual::flag(i, "finite", v.is_finite()),
            Residual::abs_at_most(i, "equal_pair", same, 1e-12),
        ])
    })?);
    Ok(out)
}

fn dini(cfg: &SuiteConfig, params: &mut Params) -> Result<Vec<Residual>> {
    let n_max = cfg.n_max.unwrap_or(200);
    let m_max = cfg.m_max.unwrap_or(10);
    let slack = cfg.slack.unwrap_or(DEFAULT_SLACK);
    params.insert("n_max".into(), json!(n_max));
    params.insert("m_max".into(), json!(m_max));
    params.insert("slack".into(), json!(slack));
    let a: Vec<f64> = (0..=n_max).map(|n| if n == 0 { 0.0 } else { 1.0 }).collect();
    let mut out = Vec::new();
    let constant = check_dini(&a, &vec![a.clone(); m_max], 1.0, 1e-9)?;
    out.push(Residual::abs_at_most(0, "constant_ladder", constant.measured, 1e-12));
    let step: Vec<Vec<f64>> = (1..=m_max)
        .map(|m| (0..=n_max).map(|n| if n <= m { a[n] } else { 0.0 }).collect())
        .collect();
    let s = check_dini(&a, &step, 1.0, 1e-9)?;
    out.push(Residual::at_most(1, "step_ladder", s.measured - 1.0, 1e-9));
    let family = make_jump_family(LN_2, 2)?;
    let ms: Vec<usize> = (1..=m_max).collect();
    let traces = proof_trace(&family, &KrausOperation::identity(2), &ms, n_max, slack)?;
    let grid: Vec<Vec<f64>> = traces.iter().map(|t| t.a_m_n.clone()).collect();
    let replay = check_dini(&traces[0].a_n, &grid, LN_2, slack)?;
    out.push(Residual::at_most(2, "proof_trace_arrays", replay.measured - LN_2, slack));
    Ok(out)
}

fn theorem1(cfg: &SuiteConfig, params: &mut Params) -> Result<Vec<Residual>> {
    let channels = cfg.trials(200);
    let operations = channels.div_ceil(4);
    let n_max = cfg.n_max.unwrap_or(1000);
    let window = cfg.window.unwrap_or(50);
    let slack = cfg.slack.unwrap_or(DEFAULT_SLACK);
    jump_params(cfg, params, n_max, window, slack);
    params.insert("channels".into(), json!(channels));
    params.insert("operations".into(), json!(operations));
    let family = make_jump_family(LN_2, 2)?;
    let mut out = per_trial(cfg, channels + operations, |i, r| {
        let d_out = r.random_range(2..=4usize);
        let k = r.random_range(1..=3usize);
        let seed: u64 = r.random();
        let (op, name) = if i < channels {
            (random_channel(2, d_out, k, seed)?, "channel_excess")
        } else {
            (random_operation(2, d_out, k, seed)?.0, "operation_excess")
        };
        let o = check_theorem1(&family, &op, n_max, window, slack)?;
        Ok(vec![Residual::at_most(i, name, o.output.estimate - o.input_jump, slack)])
    })?;
    let t = channels + operations;
    let deph = estimate_jump(&family, Some(&KrausOperation::dephasing(2)), n_max, window)?;
    out.push(Residual::abs_at_most(t, "dephasing_equality", deph.estimate - LN_2, slack));
    let dep = estimate_jump(&family, Some(&KrausOperation::depolarizing(2)), n_max, window)?;
    out.push(Residual::at_most(t + 1, "depolarizing_collapse", dep.estimate, 1e-6));
    Ok(out)
}

fn reduction(cfg: &SuiteConfig, params: &mut Params) -> Result<Vec<Residual>> {
    let trials = cfg.trials(50);
    let n_max = cfg.n_max.unwrap_or(1000);
    let window = cfg.window.unwrap_or(50);
    jump_params(cfg, params, n_max, window, 1e-6);
    params.insert("trials".into(), json!(trials));
    let family = make_jump_family(LN_2, 2)?;
    per_trial(cfg, trials, |i, r| {
        let d_out = r.random_range(2..=4usize);
        let k = r.random_range(1..=3usize);
        let (op, _) = random_operation(2, d_out, k, r.random())?;
        let direct = estimate_jump(&family, Some(&op), n_max, window)?;
        let extended = estimate_jump(&family, Some(&op.extend_to_channel()?), n_max, window)?;
        Ok(vec![Residual::at_most(i, "reduction_excess", direct.estimate - extended.estimate, 1e-6)])
    })
}

/// Convergence tolerance for the explicit fixtures on the continuous family.
const FIXTURE_CONVERGENCE_TOL: f64 = 1e-2;

/// Explicit ladder on a full-rank family that fails only commutation:
/// `P = vv*` with `v = (1,…,1)/√d` for `m ≤ 2`, `P = I` above.
pub fn rotated_ladder_fixture(family: &StateSequenceFamily, n_max: usize) -> ProjectorLadder {
    let d = family.dim();
    ProjectorLadder::explicit(1, 4, n_max, move |_, m| {
        if m <= 2 {
            let v = CMatrix::from_element(d, 1, c(1.0 / (d as f64).sqrt()));
            Projector::from_orthonormal_columns(&v)
        } else {
            Projector::identity(d)
        }
    })
}

/// Explicit ladder on a full-rank family that fails only covering: the
/// top-`(d−1)` spectral projector of `σ_n` for every `m`.
pub fn truncated_ladder_fixture(family: &StateSequenceFamily, n_max: usize) -> ProjectorLadder {
    let family = family.clone();
    let d = family.dim();
    ProjectorLadder::explicit(1, 4, n_max, move |n, _| {
        let sigma = family.term(n).expect("family term").sigma.materialize();
        Projector::from_spectrum(sigma.spectrum(), |j, _| j + 1 < d)
    })
}

fn ladder(cfg: &SuiteConfig, params: &mut Params) -> Result<Vec<Residual>> {
    let n_max = cfg.n_max.unwrap_or(1000);
    let m_max = cfg.m_max.unwrap_or(20);
    params.insert("n_max".into(), json!(n_max));
    params.insert("m_max".into(), json!(m_max));
    let mut out = Vec::new();
    let family = make_jump_family(LN_2, 2)?;
    let threshold = build_threshold_ladder(&family, &jump_thresholds(LN_2, 1, m_max), 1, n_max)?;
    let report = verify_ladder(&threshold, &family, n_max, 1e-9)?;
    for cond in &report.conditions {
        out.push(Residual {
            trial: 0,
            name: format!("jump_{}", cond.name),
            value: cond.worst,
            bound: 0.0,
            pass: cond.pass,
        });
    }
    // ‖P_n − P_0‖ ≤ 2‖H‖/n for these fixtures, so n = 400 stays below the tolerance
    let fixture_n = n_max.min(400);
    let cont = make_continuous_family(3, cfg.seed)?;
    for (trial, name, ladder, expected) in [
        (1, "rotated_fails_only_commutation", rotated_ladder_fixture(&cont, fixture_n), "commutation"),
        (2, "truncated_fails_only_covering", truncated_ladder_fixture(&cont, fixture_n), "covering"),
    ] {
        let report = verify_ladder(&ladder, &cont, fixture_n, FIXTURE_CONVERGENCE_TOL)?;
        out.push(Residual::flag(trial, name, report.failing() == [expected]));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_values() {
        assert_eq!(classical_oracle(&[0.5, 0.5], &[0.5, 0.5]), 0.0);
        assert_eq!(classical_oracle(&[0.5, 0.5], &[1.0, 0.0]), f64::INFINITY);
        assert!((classical_oracle(&[0.0, 0.0], &[0.2, 0.3]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn unknown_suite_is_an_error() {
        assert!(matches!(run_suite("nope", &SuiteConfig::new(1)), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn small_suites_pass_and_repeat() {
        for name in ["dpi", "donald", "sums", "scaling", "pinching", "oracle"] {
            let cfg = SuiteConfig::new(42).with_trials(20);
            let a = run_suite(name, &cfg).unwrap();
            assert!(a.pass, "{}", a.summary());
            let b = run_suite(name, &cfg).unwrap();
            assert_eq!(a.to_json_without_timing(), b.to_json_without_timing());
        }
    }
}
