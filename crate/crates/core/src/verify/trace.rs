//! Step-by-step replay of the jump-monotonicity argument on a concrete
//! family, and the two continuity lemmas it rests on.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::{check_dini, check_pinching_scaled, estimate_jump, POINTWISE_TOL};
use crate::channel::KrausOperation;
use crate::divergence::{relative_entropy_scaled, symmetrized_divergence};
use crate::error::{Error, Result};
use crate::operator::{operator_norm, partial_trace_matrix};
use crate::sequence::{
    build_adaptive_ladder, jump_thresholds, verify_ladder_range, FamilyKind, ProjectorLadder, StateSequenceFamily,
    TREND_SLACK,
};

/// Pass/fail of one named check with its worst residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceCheck {
    pub pass: bool,
    pub residual: f64,
    pub bound: f64,
}

impl TraceCheck {
    fn at_most(residual: f64, bound: f64) -> Self {
        Self {
            pass: residual <= bound,
            residual,
            bound,
        }
    }
}

/// Quantities of the replay at one ladder level `m`, over `n = 0..=n_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProofTrace {
    pub m: usize,
    pub n_grid: Vec<usize>,
    /// `a_n = D(Vρ_nV*‖Vσ_nV*)`.
    pub a_n: Vec<f64>,
    /// `a^m_n`: the same with both arguments compressed by `P^n_m ⊗ I_E`.
    pub a_m_n: Vec<f64>,
    /// Compression by `P̄^n_m ⊗ I_E`.
    pub tail_div: Vec<f64>,
    /// `D(½(Φ(ρ_n) + UΦ(ρ_n)U*)‖Φ(σ_n))` with `U = 2P^n_m − I`.
    pub pinched_div: Vec<f64>,
    pub checks: BTreeMap<String, TraceCheck>,
}

impl ProofTrace {
    pub fn pass(&self) -> bool {
        self.checks.values().all(|c| c.pass)
    }
}

struct Row {
    a_n: f64,
    direct: f64,
    a_m_n: Vec<f64>,
    tail: Vec<f64>,
    pinched: Vec<f64>,
    pinching_residual: Vec<f64>,
    partial_trace_residual: Vec<f64>,
}

fn finite(x: crate::extended::ExtendedNonNegative, what: &str, n: usize) -> Result<f64> {
    x.value().ok_or_else(|| Error::IndeterminateIdentity {
        term: format!("{what} at n = {n}"),
    })
}

/// Preferred thresholds for a ladder on the image of `family`.
fn preferred_thresholds(family: &StateSequenceFamily, m0: usize, m_max: usize) -> Vec<f64> {
    let c = match family.kind() {
        FamilyKind::Jump { c } => *c,
        _ => 1.0,
    };
    jump_thresholds(c, m0, m_max)
}

/// Replays the argument for `Φ` (replaced by its extension to a channel when
/// it is only trace non-increasing) on `n = 0..=n_max`, one trace per `m`.
///
/// The ladder is a threshold ladder for `{Φ(σ_n)}`, with thresholds moved
/// off the grid spectrum where necessary.
pub fn proof_trace(
    family: &StateSequenceFamily,
    op: &KrausOperation,
    m_list: &[usize],
    n_max: usize,
    slack: f64,
) -> Result<Vec<ProofTrace>> {
    let channel = if op.is_channel() { op.clone() } else { op.extend_to_channel()? };
    let image = family.map_through(&channel, "channel")?;
    let (m0, m_max) = m_range(m_list)?;
    let ladder = build_adaptive_ladder(&image, &preferred_thresholds(family, m0, m_max), m0, n_max)
        .map_err(|e| match e {
            Error::LadderConstructionFailure(_) => e,
            other => Error::LadderConstructionFailure(other.to_string()),
        })?;
    proof_trace_with_ladder(family, &channel, &ladder, m_list, n_max, slack)
}

fn m_range(m_list: &[usize]) -> Result<(usize, usize)> {
    let m0 = m_list.iter().copied().min().ok_or_else(|| Error::InvalidArgument("empty m list".into()))?;
    let m_max = m_list.iter().copied().max().expect("non-empty");
    if m_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("m list must be strictly increasing".into()));
    }
    Ok((m0, m_max))
}

/// [`proof_trace`] with a caller-supplied ladder for `{Φ(σ_n)}`; `op` must be a channel.
pub fn proof_trace_with_ladder(
    family: &StateSequenceFamily,
    op: &KrausOperation,
    ladder: &ProjectorLadder,
    m_list: &[usize],
    n_max: usize,
    slack: f64,
) -> Result<Vec<ProofTrace>> {
    m_range(m_list)?;
    let dilation = op.stinespring()?;
    dilation.isometry()?;
    let (dim_out, dim_env) = (dilation.dim_out(), dilation.dim_env());
    let delta = match family.analytic_jump() {
        Some(j) => j.to_f64(),
        None => estimate_jump(family, None, n_max, (n_max / 20).max(1))?.estimate,
    };

    let rows: Vec<Row> = (0..=n_max)
        .into_par_iter()
        .map(|n| -> Result<Row> {
            let term = family.term(n)?;
            let rho_v = dilation.dilate_scaled(&term.rho)?;
            let sigma_v = dilation.dilate_scaled(&term.sigma)?;
            let rho_img = op.apply_scaled(&term.rho)?;
            let sigma_img = op.apply_scaled(&term.sigma)?;
            let a_n = finite(relative_entropy_scaled(&rho_v, &sigma_v, None), "a_n", n)?;
            let direct = finite(relative_entropy_scaled(&term.rho, &term.sigma, None), "D(rho_n||sigma_n)", n)?;
            let mut row = Row {
                a_n,
                direct,
                a_m_n: Vec::with_capacity(m_list.len()),
                tail: Vec::with_capacity(m_list.len()),
                pinched: Vec::with_capacity(m_list.len()),
                pinching_residual: Vec::with_capacity(m_list.len()),
                partial_trace_residual: Vec::with_capacity(m_list.len()),
            };
            for &m in m_list {
                let p = ladder.projector(n, m)?;
                let pe = p.tensor_identity(dim_env);
                let pbar = p.complement();
                let pbar_e = pbar.tensor_identity(dim_env);
                row.a_m_n.push(finite(
                    relative_entropy_scaled(&rho_v.compress(&pe)?, &sigma_v.compress(&pe)?, None),
                    "a^m_n",
                    n,
                )?);
                let (rho_tail, sigma_tail) = (rho_v.compress(&pbar_e)?, sigma_v.compress(&pbar_e)?);
                row.tail.push(finite(relative_entropy_scaled(&rho_tail, &sigma_tail, None), "tail", n)?);
                let pinching = check_pinching_scaled(&rho_img, &sigma_img, &p)?;
                row.pinched.push(pinching.rhs);
                row.pinching_residual.push(pinching.residual.abs());
                // Tr_E of the compressed dilation is the compressed image
                let mut pt = 0.0f64;
                for (dilated, image) in [(&rho_tail, &rho_img), (&sigma_tail, &sigma_img)] {
                    let lhs = partial_trace_matrix(dilated.materialize().matrix(), dim_out, dim_env)?;
                    let rhs = image.compress(&pbar)?.materialize();
                    pt = pt.max(operator_norm(&(lhs - rhs.matrix())));
                }
                row.partial_trace_residual.push(pt);
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;

    let n_grid: Vec<usize> = (0..=n_max).collect();
    let a_n: Vec<f64> = rows.iter().map(|r| r.a_n).collect();
    let grid: Vec<Vec<f64>> = (0..m_list.len())
        .map(|i| rows.iter().map(|r| r.a_m_n[i]).collect())
        .collect();
    let isometric = rows
        .iter()
        .map(|r| (r.a_n - r.direct).abs())
        .fold(0.0, f64::max);
    let dini = check_dini(&a_n, &grid, delta, slack);

    let mut traces = Vec::with_capacity(m_list.len());
    for (i, &m) in m_list.iter().enumerate() {
        let a_m_n = grid[i].clone();
        let tail_div: Vec<f64> = rows.iter().map(|r| r.tail[i]).collect();
        let pinched_div: Vec<f64> = rows.iter().map(|r| r.pinched[i]).collect();
        let mut checks = BTreeMap::new();
        let monotone = if i == 0 {
            0.0
        } else {
            grid[i - 1].iter().zip(&a_m_n).map(|(prev, cur)| prev - cur).fold(0.0, f64::max)
        };
        checks.insert("i_monotone_in_m".to_string(), TraceCheck::at_most(monotone, POINTWISE_TOL));
        let below = a_m_n.iter().zip(&a_n).map(|(x, a)| x - a).fold(f64::NEG_INFINITY, f64::max);
        checks.insert("ii_below_a_n".to_string(), TraceCheck::at_most(below, POINTWISE_TOL));
        let tail = tail_div
            .iter()
            .zip(a_n.iter().zip(&a_m_n))
            .map(|(t, (a, x))| t - (a - x))
            .fold(f64::NEG_INFINITY, f64::max);
        checks.insert("iii_tail_bound".to_string(), TraceCheck::at_most(tail, POINTWISE_TOL));
        let sup = a_n.iter().zip(&a_m_n).map(|(a, x)| a - x).fold(f64::NEG_INFINITY, f64::max);
        let mut dini_check = TraceCheck::at_most(sup - delta, slack);
        if i + 1 == m_list.len() {
            dini_check.pass &= matches!(&dini, Ok(d) if d.pass);
        }
        checks.insert("iv_dini".to_string(), dini_check);
        let pinching = rows.iter().map(|r| r.pinching_residual[i]).fold(0.0, f64::max);
        checks.insert("v_pinching".to_string(), TraceCheck::at_most(pinching, POINTWISE_TOL));
        let pt = rows.iter().map(|r| r.partial_trace_residual[i]).fold(0.0, f64::max);
        checks.insert("v_partial_trace".to_string(), TraceCheck::at_most(pt, 1e-10));
        checks.insert("isometric_invariance".to_string(), TraceCheck::at_most(isometric, POINTWISE_TOL));
        traces.push(ProofTrace {
            m,
            n_grid: n_grid.clone(),
            a_n: a_n.clone(),
            a_m_n,
            tail_div,
            pinched_div,
            checks,
        });
    }
    Ok(traces)
}

/// Convergence of a sequence of values to a limit over the last decade.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma2Outcome {
    pub m: usize,
    pub limit_value: f64,
    pub value_at_n_max: f64,
    pub deviation: f64,
    pub trend_non_increasing: bool,
    pub pass: bool,
}

fn decade_trend(values: &[(usize, f64)], limit: f64, n_max: usize) -> bool {
    let lo = (n_max / 10).max(1);
    let devs: Vec<f64> = values
        .iter()
        .filter(|(n, _)| *n >= lo)
        .map(|(_, v)| (v - limit).abs())
        .collect();
    devs.windows(2).all(|w| w[1] <= w[0] + TREND_SLACK)
}

/// `D(P^n_m ρ_n P^n_m‖P^n_m σ_n P^n_m) → D(P^0_m ρ₀ P^0_m‖P^0_m σ₀ P^0_m) < ∞`.
///
/// The ladder must commute with `σ_n`, satisfy the rank condition and converge
/// in `n` at level `m`; otherwise [`Error::LadderInconsistent`].
pub fn check_lemma2(
    family: &StateSequenceFamily,
    ladder: &ProjectorLadder,
    m: usize,
    n_max: usize,
    tol: f64,
) -> Result<Lemma2Outcome> {
    let report = verify_ladder_range(ladder, family, n_max, m..=m, 1e-6)?;
    for name in ["commutation", "rank", "convergence"] {
        if !report.condition(name).is_some_and(|c| c.pass) {
            return Err(Error::LadderInconsistent {
                condition: name.to_string(),
            });
        }
    }
    let compressed = |n: usize| -> Result<f64> {
        let t = family.term(n)?;
        let p = ladder.projector(n, m)?;
        Ok(relative_entropy_scaled(&t.rho.compress(&p)?, &t.sigma.compress(&p)?, None).to_f64())
    };
    let limit_value = compressed(0)?;
    if !limit_value.is_finite() {
        return Err(Error::InfiniteLimitDivergence);
    }
    let lo = (n_max / 10).max(1);
    let values: Vec<(usize, f64)> = (lo..=n_max)
        .into_par_iter()
        .map(|n| compressed(n).map(|v| (n, v)))
        .collect::<Result<_>>()?;
    let value_at_n_max = values.last().map_or(limit_value, |v| v.1);
    let deviation = (value_at_n_max - limit_value).abs();
    let trend = decade_trend(&values, limit_value, n_max);
    Ok(Lemma2Outcome {
        m,
        limit_value,
        value_at_n_max,
        deviation,
        trend_non_increasing: trend,
        pass: trend && deviation <= tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma3Outcome {
    pub limit_value: f64,
    pub value_at_n_max: f64,
    pub deviation: f64,
    pub trend_non_increasing: bool,
    pub pass: bool,
}

/// Continuity of `(ρ, σ) ↦ D(ρ‖½ρ+½σ) + D(σ‖½ρ+½σ)` along the family.
pub fn check_lemma3(family: &StateSequenceFamily, n_max: usize, tol: f64) -> Result<Lemma3Outcome> {
    let value = |n: usize| -> Result<f64> {
        let t = family.term(n)?;
        symmetrized_divergence(&t.rho, &t.sigma)
    };
    let limit_value = value(0)?;
    let lo = (n_max / 10).max(1);
    let values: Vec<(usize, f64)> = (lo..=n_max)
        .into_par_iter()
        .map(|n| value(n).map(|v| (n, v)))
        .collect::<Result<_>>()?;
    let value_at_n_max = values.last().map_or(limit_value, |v| v.1);
    let deviation = (value_at_n_max - limit_value).abs();
    let trend = decade_trend(&values, limit_value, n_max);
    Ok(Lemma3Outcome {
        limit_value,
        value_at_n_max,
        deviation,
        trend_non_increasing: trend,
        pass: trend && deviation <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::random_channel;
    use crate::verify::DEFAULT_SLACK as TRACE_SLACK;
    use crate::operator::{PositiveOperator, Projector};
    use crate::sequence::{build_threshold_ladder, make_continuous_family, make_jump_family};
    use std::f64::consts::LN_2;

    fn all_pass(traces: &[ProofTrace]) {
        for t in traces {
            assert!(t.pass(), "m = {}: {:?}", t.m, t.checks);
        }
    }

    #[test]
    fn replay_identity_and_dephasing() {
        let f = make_jump_family(LN_2, 2).unwrap();
        let ms: Vec<usize> = (1..=10).collect();
        let id = proof_trace(&f, &KrausOperation::identity(2), &ms, 200, TRACE_SLACK).unwrap();
        all_pass(&id);
        let deph = proof_trace(&f, &KrausOperation::dephasing(2), &ms, 200, TRACE_SLACK).unwrap();
        all_pass(&deph);
        // saturation: a^m_n = a_n for n <= m
        let t = &deph[4];
        for n in 1..=t.m {
            assert!((t.a_m_n[n] - t.a_n[n]).abs() < 1e-12);
        }
    }

    #[test]
    fn replay_random_channel() {
        let f = make_jump_family(LN_2, 2).unwrap();
        let ch = random_channel(2, 3, 2, 2024).unwrap();
        let traces = proof_trace(&f, &ch, &[1, 2, 3, 4, 5], 120, TRACE_SLACK).unwrap();
        all_pass(&traces);
    }

    #[test]
    fn lemma2_examples() {
        let f = make_jump_family(LN_2, 2).unwrap();
        let ladder = build_threshold_ladder(&f, &jump_thresholds(LN_2, 1, 10), 1, 300).unwrap();
        let out = check_lemma2(&f, &ladder, 3, 300, 1e-3).unwrap();
        assert!(out.pass && out.limit_value == 0.0, "{out:?}");

        let cont = make_continuous_family(3, 2).unwrap();
        let id = ProjectorLadder::explicit(1, 3, 300, |_, _| Projector::identity(3));
        assert!(check_lemma2(&cont, &id, 2, 300, 1e-2).unwrap().pass);

        let broken = ProjectorLadder::explicit(1, 3, 300, |_, _| Projector::identity(2));
        assert_eq!(
            check_lemma2(&f, &broken, 2, 300, 1e-3),
            Err(Error::LadderInconsistent {
                condition: "rank".into()
            })
        );
    }

    #[test]
    fn lemma3_examples() {
        let s = PositiveOperator::maximally_mixed(2);
        assert!(symmetrized_divergence(&s.clone().into(), &s.into()).unwrap().abs() < 1e-15);
        let a = PositiveOperator::from_real_diagonal(&[1.0, 0.0]).unwrap();
        let b = PositiveOperator::from_real_diagonal(&[0.0, 1.0]).unwrap();
        let v = symmetrized_divergence(&a.into(), &b.into()).unwrap();
        assert!((v - 2.0 * LN_2).abs() < 1e-10);
        let out = check_lemma3(&make_jump_family(LN_2, 2).unwrap(), 1000, 1e-3).unwrap();
        assert!(out.pass, "{out:?}");
    }
}
