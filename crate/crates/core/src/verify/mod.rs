//! Jump estimation and the checks built on it.

mod report;
mod suites;
mod trace;

use serde::Serialize;

use crate::channel::{unitary_from_projector, KrausOperation};
use crate::divergence::{donald, relative_entropy, relative_entropy_scaled};
use crate::error::{Error, Result};
use crate::extended::ExtendedNonNegative;
use crate::operator::{operator_norm, CMatrix, PositiveOperator, Projector};
use crate::scaled::TwoScaleOperator;
use crate::sequence::{StateSequenceFamily, TREND_SLACK};

pub use report::{Report, Residual};
pub use suites::{run_suite, SuiteConfig, SUITES};
pub use trace::{
    check_lemma2, check_lemma3, proof_trace, proof_trace_with_ladder, Lemma2Outcome, Lemma3Outcome, ProofTrace,
    TraceCheck,
};

/// Slack for jump comparisons at `n_max = 10³`.
pub const DEFAULT_SLACK: f64 = 5e-3;
/// Allowance for roundoff in pointwise divergence comparisons.
pub const POINTWISE_TOL: f64 = 1e-8;

/// Windowed estimate of `limsup_n D(ρ_n‖σ_n) − D(ρ₀‖σ₀)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JumpEstimate {
    /// Sup of `D(ρ_n‖σ_n)` over the trailing window (`+inf` if any member is).
    pub limsup_tail: ExtendedNonNegative,
    pub limit_value: f64,
    /// `limsup_tail − limit_value`; `f64::INFINITY` when `infinite`.
    pub estimate: f64,
    pub n_max: usize,
    pub window: usize,
    pub infinite: bool,
    /// Window sups at `n_max/100`, `n_max/10`, `n_max` (where defined).
    pub decade_sups: Vec<f64>,
    /// Changes of the window sup shrink across the last two decades.
    pub converged: bool,
}

fn divergence(t: &crate::sequence::SequenceTerm) -> ExtendedNonNegative {
    relative_entropy_scaled(&t.rho, &t.sigma, None)
}

fn window_sup(family: &StateSequenceFamily, hi: usize, window: usize) -> Result<ExtendedNonNegative> {
    let lo = hi.saturating_sub(window) + 1;
    let mut sup = ExtendedNonNegative::ZERO;
    for n in lo..=hi {
        sup = sup.max(divergence(&family.term(n)?));
    }
    Ok(sup)
}

/// Evaluates `D` (after `op`, if given) on `n ∈ [n_max − window + 1, n_max]`.
pub fn estimate_jump(
    family: &StateSequenceFamily,
    op: Option<&KrausOperation>,
    n_max: usize,
    window: usize,
) -> Result<JumpEstimate> {
    if window == 0 || window > n_max {
        return Err(Error::InvalidArgument(format!(
            "window {window} must lie in [1, n_max = {n_max}]"
        )));
    }
    let mapped;
    let family = match op {
        Some(op) => {
            mapped = family.map_through(op, "operation")?;
            &mapped
        }
        None => family,
    };
    let limit_value = divergence(&family.limit()?)
        .value()
        .ok_or(Error::InfiniteLimitDivergence)?;
    let limsup_tail = window_sup(family, n_max, window)?;
    let mut decade_sups = Vec::new();
    for hi in [n_max / 100, n_max / 10] {
        if hi >= window {
            decade_sups.push(window_sup(family, hi, window)?.to_f64());
        }
    }
    decade_sups.push(limsup_tail.to_f64());
    let converged = match decade_sups.as_slice() {
        [a, b, c] => ((c - b).abs() <= (b - a).abs() + TREND_SLACK) || (c - b).abs() <= TREND_SLACK,
        _ => true,
    };
    let infinite = limsup_tail.is_infinite();
    Ok(JumpEstimate {
        limsup_tail,
        limit_value,
        estimate: if infinite {
            f64::INFINITY
        } else {
            limsup_tail.to_f64() - limit_value
        },
        n_max,
        window,
        infinite,
        decade_sups,
        converged,
    })
}

/// Input and output jumps with the verdict `output ≤ input + slack`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem1Outcome {
    /// Analytic jump when the family carries one, else the estimate.
    pub input_jump: f64,
    pub input_estimate: Option<JumpEstimate>,
    pub output: JumpEstimate,
    pub slack: f64,
    pub pass: bool,
}

pub fn check_theorem1(
    family: &StateSequenceFamily,
    op: &KrausOperation,
    n_max: usize,
    window: usize,
    slack: f64,
) -> Result<Theorem1Outcome> {
    let (input_jump, input_estimate) = match family.analytic_jump() {
        Some(j) => (j.to_f64(), None),
        None => {
            let e = estimate_jump(family, None, n_max, window)?;
            (e.estimate, Some(e))
        }
    };
    let output = estimate_jump(family, Some(op), n_max, window)?;
    // an infinite output never passes; an infinite input bounds nothing finite
    let pass = !output.infinite && output.estimate <= input_jump + slack;
    Ok(Theorem1Outcome {
        input_jump,
        input_estimate,
        output,
        slack,
        pass,
    })
}

/// Result of the strengthened Dini check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiniOutcome {
    /// `sup_n |a_n − a^m_n|` for each `m`.
    pub sup_by_m: Vec<f64>,
    /// Value at the largest `m`.
    pub measured: f64,
    pub delta: f64,
    pub pass: bool,
}

/// Checks `lim_m sup_n |a_n − a^m_n| ≤ Δ` on finite arrays.
///
/// `a[n]` for `n = 0..N`; `a_grid[i][n]` is `a^m_n` for the `i`-th `m`.
/// Hypotheses, checked first with tolerance `tol`: `a^m_n` non-decreasing in
/// `m`; `a^m_n ≤ a_n` and `a^M_0 = a_0` (the finite stand-in for
/// `lim_m a^m_n = a_n`); `min` of `a^m_n` over the trailing half of `n`
/// at least `a^m_0` (for `liminf_n`). Conclusion: the sup at the largest `m`
/// is at most `Δ + tol` and is non-increasing over the last decade of `m`.
pub fn check_dini(a: &[f64], a_grid: &[Vec<f64>], delta: f64, tol: f64) -> Result<DiniOutcome> {
    let violation = |condition: String| Err(Error::HypothesisViolation { condition });
    if a.is_empty() || a_grid.is_empty() {
        return Err(Error::InvalidArgument("empty Dini arrays".into()));
    }
    if a_grid.iter().any(|row| row.len() != a.len()) {
        return Err(Error::InvalidArgument("a^m_n rows must match a_n in length".into()));
    }
    for (i, pair) in a_grid.windows(2).enumerate() {
        if let Some(n) = (0..a.len()).find(|&n| pair[1][n] < pair[0][n] - tol) {
            return violation(format!("a^m_n non-decreasing in m (row {}, n = {n})", i + 1));
        }
    }
    for (i, row) in a_grid.iter().enumerate() {
        if let Some(n) = (0..a.len()).find(|&n| row[n] > a[n] + tol) {
            return violation(format!("a^m_n <= a_n (row {i}, n = {n})"));
        }
    }
    let last = a_grid.last().expect("non-empty grid");
    if (last[0] - a[0]).abs() > tol {
        return violation(format!("lim_m a^m_0 = a_0 (|diff| = {:e})", (last[0] - a[0]).abs()));
    }
    let tail_start = a.len() / 2;
    for (i, row) in a_grid.iter().enumerate() {
        let liminf = row[tail_start.max(1).min(a.len() - 1)..]
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if liminf < row[0] - tol {
            return violation(format!("liminf_n a^m_n >= a^m_0 (row {i})"));
        }
    }
    let sup_by_m: Vec<f64> = a_grid
        .iter()
        .map(|row| a.iter().zip(row).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
        .collect();
    let measured = *sup_by_m.last().expect("non-empty grid");
    let from = sup_by_m.len() - (sup_by_m.len() * 9 / 10).max(1).min(sup_by_m.len());
    let trend = sup_by_m[from..].windows(2).all(|w| w[1] <= w[0] + TREND_SLACK);
    Ok(DiniOutcome {
        sup_by_m,
        measured,
        delta,
        pass: trend && measured <= delta + tol,
    })
}

/// Both sides of the pinching identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PinchingOutcome {
    /// `D(PρP‖PσP) + D(P̄ρP̄‖P̄σP̄)`.
    pub lhs: f64,
    /// `D(½(ρ + UρU*)‖σ)` with `U = 2P − I`.
    pub rhs: f64,
    pub residual: f64,
}

/// `D(PρP‖PσP) + D(P̄ρP̄‖P̄σP̄) = D(½(ρ + UρU*)‖σ)` for `P` commuting with `σ`.
pub fn check_pinching_identity(rho: &PositiveOperator, sigma: &PositiveOperator, p: &Projector) -> Result<PinchingOutcome> {
    check_pinching_scaled(&rho.clone().into(), &sigma.clone().into(), p)
}

/// [`check_pinching_identity`] for operators given at two scales.
pub fn check_pinching_scaled(rho: &TwoScaleOperator, sigma: &TwoScaleOperator, p: &Projector) -> Result<PinchingOutcome> {
    let s = sigma.materialize();
    let commutator = operator_norm(&(p.matrix() * s.matrix() - s.matrix() * p.matrix()));
    if commutator > 1e-9 {
        return Err(Error::NonCommutingSigma { commutator });
    }
    let pbar = p.complement();
    let finite = |x: ExtendedNonNegative, term: &str| {
        x.value().ok_or_else(|| Error::IndeterminateIdentity { term: term.to_string() })
    };
    let lhs = finite(
        relative_entropy_scaled(&rho.compress(p)?, &sigma.compress(p)?, None),
        "D(P rho P || P sigma P)",
    )? + finite(
        relative_entropy_scaled(&rho.compress(&pbar)?, &sigma.compress(&pbar)?, None),
        "D(Pbar rho Pbar || Pbar sigma Pbar)",
    )?;
    let u = unitary_from_projector(p);
    let rotated = rho.conjugate_by(u.matrix())?;
    let pinched = rho.scale(0.5)?.add(&rotated.scale(0.5)?)?;
    let rhs = finite(relative_entropy_scaled(&pinched, sigma, None), "D(pinched rho || sigma)")?;
    Ok(PinchingOutcome {
        lhs,
        rhs,
        residual: lhs - rhs,
    })
}

/// `D(ρ‖σ) = D(m‖σ) + ½D(ρ‖m) + ½D(UρU*‖m)` with `m = ½(ρ + UρU*)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DonaldStep {
    pub divergence: f64,
    /// `D(m‖σ)`.
    pub pinched: f64,
    /// `(½D(ρ‖m), ½D(UρU*‖m))`.
    pub corrections: (f64, f64),
    pub residual: f64,
    pub pass: bool,
}

pub fn check_donald_step(rho: &PositiveOperator, sigma: &PositiveOperator, u: &CMatrix) -> Result<DonaldStep> {
    let deviation = operator_norm(&(u * sigma.matrix() * u.adjoint() - sigma.matrix()));
    if deviation > 1e-9 {
        return Err(Error::SymmetryViolation { deviation });
    }
    let rotated = rho.conjugate_by(u)?;
    let d = donald(rho, &rotated, sigma, 0.5)?;
    let divergence = relative_entropy(rho, sigma, None)
        .value()
        .ok_or_else(|| Error::IndeterminateIdentity {
            term: "D(rho||sigma)".into(),
        })?;
    let residual = divergence - (d.outer_term + d.mixture_terms.0 + d.mixture_terms.1);
    let pass = residual.abs() <= POINTWISE_TOL && d.mixture_terms.0 >= -1e-9 && d.mixture_terms.1 >= -1e-9;
    Ok(DonaldStep {
        divergence,
        pinched: d.outer_term,
        corrections: d.mixture_terms,
        residual,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::random_channel;
    use crate::operator::{c, HermitianMatrix, C64};
    use crate::random::{random_full_rank_state, random_state, rng};
    use crate::sequence::{make_continuous_family, make_jump_family};
    use std::f64::consts::LN_2;

    #[test]
    fn jump_estimates() {
        let f = make_jump_family(LN_2, 2).unwrap();
        let e = estimate_jump(&f, None, 1000, 50).unwrap();
        assert!((e.estimate - LN_2).abs() < 5e-3);
        assert!(!e.infinite);
        let dep = estimate_jump(&f, Some(&KrausOperation::depolarizing(2)), 1000, 50).unwrap();
        assert!(dep.estimate.abs() < 1e-6);
        let cont = estimate_jump(&make_continuous_family(3, 7).unwrap(), None, 1000, 50).unwrap();
        assert!(cont.estimate <= 1e-3 && cont.estimate >= -1e-9);
    }

    #[test]
    fn infinite_limit_rejected() {
        let one = PositiveOperator::from_real_diagonal(&[1.0, 0.0]).unwrap();
        let other = PositiveOperator::from_real_diagonal(&[0.0, 1.0]).unwrap();
        let mut terms = std::collections::BTreeMap::new();
        terms.insert(1, (one.clone(), one.clone()));
        let f = StateSequenceFamily::custom(terms, (one, other), None).unwrap();
        assert_eq!(estimate_jump(&f, None, 1, 1), Err(Error::InfiniteLimitDivergence));
    }

    #[test]
    fn theorem1_examples() {
        let f = make_jump_family(LN_2, 2).unwrap();
        let deph = check_theorem1(&f, &KrausOperation::dephasing(2), 1000, 50, DEFAULT_SLACK).unwrap();
        assert!(deph.pass && (deph.output.estimate - LN_2).abs() < 5e-3);
        let ch = random_channel(2, 3, 2, 1).unwrap();
        assert!(check_theorem1(&f, &ch, 300, 30, DEFAULT_SLACK).unwrap().pass);
    }

    #[test]
    fn dini_examples() {
        let a: Vec<f64> = (0..50).map(|n| if n == 0 { 0.0 } else { 1.0 }).collect();
        let same = vec![a.clone(); 5];
        let out = check_dini(&a, &same, 1.0, 1e-9).unwrap();
        assert_eq!(out.measured, 0.0);
        assert!(out.pass);

        // a^m_n = a_n 1{n <= m}: sup_n |a_n - a^m_n| = c for every m
        let grid: Vec<Vec<f64>> = (1..=10)
            .map(|m| (0..50).map(|n| if n <= m { a[n] } else { 0.0 }).collect())
            .collect();
        let out = check_dini(&a, &grid, 1.0, 1e-9).unwrap();
        assert!(out.pass && (out.measured - 1.0).abs() < 1e-12);
        assert!(!check_dini(&a, &grid, 0.5, 1e-9).unwrap().pass);

        let mut decreasing = grid.clone();
        decreasing[3][20] = 2.0;
        assert!(matches!(
            check_dini(&a, &decreasing, 1.0, 1e-9),
            Err(Error::HypothesisViolation { .. })
        ));
    }

    #[test]
    fn pinching_examples() {
        let rho = PositiveOperator::from_matrix(CMatrix::from_row_slice(
            2,
            2,
            &[c(0.6), C64::new(0.3, 0.1), C64::new(0.3, -0.1), c(0.4)],
        ))
        .unwrap();
        let sigma = PositiveOperator::from_real_diagonal(&[0.3, 0.7]).unwrap();
        let id = check_pinching_identity(&rho, &sigma, &Projector::identity(2)).unwrap();
        assert!(id.residual.abs() < 1e-14);
        let p = Projector::new(HermitianMatrix::from_real_diagonal(&[1.0, 0.0]).into_matrix()).unwrap();
        assert!(check_pinching_identity(&rho, &sigma, &p).unwrap().residual.abs() <= 1e-8);

        let mut r = rng(12);
        let sigma = random_full_rank_state(&mut r, 4);
        let rho = random_state(&mut r, 4, 4);
        let p = Projector::from_spectrum(sigma.spectrum(), |i, _| i < 2);
        assert!(check_pinching_identity(&rho, &sigma, &p).unwrap().residual.abs() <= 1e-8);
        let q = Projector::new(crate::operator::conjugate(
            &crate::random::haar_unitary(&mut r, 4),
            p.matrix(),
        ))
        .unwrap();
        assert!(matches!(
            check_pinching_identity(&rho, &sigma, &q),
            Err(Error::NonCommutingSigma { .. })
        ));
    }

    #[test]
    fn donald_step_examples() {
        let mut r = rng(5);
        let sigma = random_full_rank_state(&mut r, 3);
        let rho = random_state(&mut r, 3, 2);
        let id = check_donald_step(&rho, &sigma, &CMatrix::identity(3, 3)).unwrap();
        assert!(id.residual.abs() < 1e-12 && id.corrections.0.abs() < 1e-12 && id.pass);
        let p = Projector::from_spectrum(sigma.spectrum(), |i, _| i == 0);
        let u = unitary_from_projector(&p);
        let step = check_donald_step(&rho, &sigma, u.matrix()).unwrap();
        assert!(step.pass, "{step:?}");
        let w = crate::random::haar_unitary(&mut r, 3);
        assert!(matches!(
            check_donald_step(&rho, &sigma, &w),
            Err(Error::SymmetryViolation { .. })
        ));
    }

    #[test]
    fn donald_step_on_channel_image() {
        let f = make_jump_family(LN_2, 2).unwrap();
        let ch = random_channel(2, 3, 2, 21).unwrap();
        let t = f.map_through(&ch, "random").unwrap().term(4).unwrap();
        let sigma = t.sigma.materialize();
        let p = Projector::from_spectrum(sigma.spectrum(), |i, _| i == 0);
        let u = unitary_from_projector(&p);
        let step = check_donald_step(&t.rho.materialize(), &sigma, u.matrix()).unwrap();
        assert!(step.pass, "{step:?}");
    }
}
