//! Lindblad's extension of the quantum relative entropy to positive
//! trace-class operators, the homogeneous von Neumann entropy, and the
//! identities relating them.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extended::{ExtendedNonNegative, Gap};
use crate::operator::{operator_norm, HermitianMatrix, PositiveOperator, check_dim};
use crate::operator::{support_projector, trace_h_rho, CMatrix};
use crate::scaled::{LogSpectrum, TwoScaleOperator};

/// `η(x) = -x ln x`, `η(0) = 0`.
pub fn eta(x: f64) -> Result<f64> {
    if x < 0.0 {
        return Err(Error::NegativeInput(x));
    }
    Ok(eta_unchecked(x))
}

fn eta_unchecked(x: f64) -> f64 {
    if x > 0.0 {
        -x * x.ln()
    } else {
        0.0
    }
}

/// `Σ λ ln λ` over the spectrum of `ρ`, with `0 ln 0 = 0`.
fn trace_x_ln_x(rho: &PositiveOperator) -> f64 {
    -rho.spectrum().values.iter().map(|&v| eta_unchecked(v)).sum::<f64>()
}

/// `S(ρ) = Tr η(ρ) − η(Tr ρ)`; always finite for matrices.
pub fn entropy_ext(rho: &PositiveOperator) -> ExtendedNonNegative {
    if rho.is_zero() {
        return ExtendedNonNegative::ZERO;
    }
    let value = -trace_x_ln_x(rho) - eta_unchecked(rho.trace());
    ExtendedNonNegative::finite(value).expect("extended entropy is non-negative")
}

/// Negative values are roundoff: nonnegativity holds exactly. Values below the
/// `-1e-9` window only arise from support leakage just under `rank_tol` and are
/// clamped as well; [`relative_entropy_raw`] exposes the unclamped number.
fn clamp_divergence(value: f64) -> ExtendedNonNegative {
    ExtendedNonNegative::Finite(value.max(0.0))
}

/// `D(ρ‖σ) = Σ⟨φ_i|ρ ln ρ − ρ ln σ|φ_i⟩ + Tr σ − Tr ρ`.
///
/// Returns `+inf` iff `‖(I−Q_σ)ρ(I−Q_σ)‖₁ > dim · rank_tol`, where `Q_σ` is
/// the support projector of `σ` at `rank_tol` (default `1e-9 · max(λ_max, 1)`).
/// The cross term is the double sum `Σ_ij λ_i ln μ_j |⟨v_i|w_j⟩|²`.
pub fn relative_entropy(
    rho: &PositiveOperator,
    sigma: &PositiveOperator,
    rank_tol: Option<f64>,
) -> ExtendedNonNegative {
    let raw = relative_entropy_raw(rho, sigma, rank_tol);
    if raw == f64::INFINITY {
        ExtendedNonNegative::PositiveInfinity
    } else {
        clamp_divergence(raw)
    }
}

/// [`relative_entropy`] before clamping; `+inf` on support violation.
pub fn relative_entropy_raw(rho: &PositiveOperator, sigma: &PositiveOperator, rank_tol: Option<f64>) -> f64 {
    assert_eq!(rho.dim(), sigma.dim(), "relative entropy of operators on different spaces");
    if rho.is_zero() {
        return sigma.trace();
    }
    let tol = rank_tol.unwrap_or_else(|| sigma.default_rank_tol());
    let s = sigma.spectrum();
    let q = support_projector(sigma, Some(tol));
    let outside = CMatrix::identity(rho.dim(), rho.dim()) - q.matrix();
    let leak = (&outside * rho.matrix() * &outside).trace().re;
    if leak > rho.dim() as f64 * tol {
        return f64::INFINITY;
    }
    let r = rho.spectrum();
    let mut cross = 0.0;
    for (i, &lambda) in r.values.iter().enumerate() {
        if lambda <= 0.0 {
            continue;
        }
        let v = r.vectors.column(i);
        for (j, &mu) in s.values.iter().enumerate() {
            if mu <= tol {
                continue;
            }
            let overlap = s.vectors.column(j).dotc(&v).norm_sqr();
            cross += lambda * mu.ln() * overlap;
        }
    }
    trace_x_ln_x(rho) - cross + sigma.trace() - rho.trace()
}

/// Relative entropy with `σ` given at two scales (see [`TwoScaleOperator`]).
///
/// `ρ` is materialized; its small scale contributes only `ε ln ε` terms.
pub fn relative_entropy_scaled(
    rho: &TwoScaleOperator,
    sigma: &TwoScaleOperator,
    rank_tol: Option<f64>,
) -> ExtendedNonNegative {
    relative_entropy_spectral(&rho.materialize(), sigma, &sigma.log_spectrum(rank_tol), rank_tol)
}

/// Relative entropy against a precomputed log spectrum of `σ`.
pub(crate) fn relative_entropy_spectral(
    rho: &PositiveOperator,
    sigma: &TwoScaleOperator,
    spectrum: &LogSpectrum,
    rank_tol: Option<f64>,
) -> ExtendedNonNegative {
    assert_eq!(rho.dim(), sigma.dim(), "relative entropy of operators on different spaces");
    if rho.is_zero() {
        return ExtendedNonNegative::Finite(sigma.trace());
    }
    let tol = rank_tol.unwrap_or_else(|| sigma.materialize().default_rank_tol());
    let weights = spectrum.diagonal_weights(rho.matrix());
    let mut leak = 0.0;
    let mut cross = 0.0;
    for (&ln_mu, &w) in spectrum.ln_values.iter().zip(&weights) {
        if ln_mu == f64::NEG_INFINITY {
            leak += w;
        } else {
            cross += w * ln_mu;
        }
    }
    if leak > rho.dim() as f64 * tol {
        return ExtendedNonNegative::PositiveInfinity;
    }
    clamp_divergence(trace_x_ln_x(rho) - cross + sigma.trace() - rho.trace())
}

/// `D(ρ‖σ) = Tr ρ(−ln σ) − S(ρ) − η(Tr ρ) + Tr σ − Tr ρ`, with `Tr ρ(−ln σ)`
/// evaluated by the `Tr Hρ` rule for `H = −ln σ` on `supp σ` and `+inf` when
/// `supp ρ` leaves `supp σ`.
pub fn relative_entropy_via_rep(
    rho: &PositiveOperator,
    sigma: &PositiveOperator,
    rank_tol: Option<f64>,
) -> ExtendedNonNegative {
    assert_eq!(rho.dim(), sigma.dim(), "relative entropy of operators on different spaces");
    if rho.is_zero() {
        return ExtendedNonNegative::Finite(sigma.trace());
    }
    let tol = rank_tol.unwrap_or_else(|| sigma.default_rank_tol());
    let q = support_projector(sigma, Some(tol));
    let outside = CMatrix::identity(rho.dim(), rho.dim()) - q.matrix();
    if (&outside * rho.matrix() * &outside).trace().re > rho.dim() as f64 * tol {
        return ExtendedNonNegative::PositiveInfinity;
    }
    // −ln σ is bounded below by −ln λ_max on supp σ; shift to a positive H
    let shift = sigma.max_eigenvalue().ln().max(0.0);
    let h = sigma
        .spectrum()
        .apply(|mu| if mu > tol { shift - mu.ln() } else { 0.0 });
    let h = HermitianMatrix::symmetrized(&h);
    let rho_on_support = rho
        .compress(&q)
        .expect("support projector has the dimension of sigma");
    let tr_h = trace_h_rho(&h, &rho_on_support)
        .expect("shifted -ln sigma is positive")
        .to_f64()
        - shift * rho_on_support.trace();
    let s = entropy_ext(rho).to_f64();
    clamp_divergence(tr_h - s - eta_unchecked(rho.trace()) + sigma.trace() - rho.trace())
}

/// Residuals of `D(cρ‖cσ) = cD(ρ‖σ)` and
/// `D(ρ‖cσ) = D(ρ‖σ) − Tr ρ ln c + (c−1) Tr σ`.
pub fn scaling_residuals(rho: &PositiveOperator, sigma: &PositiveOperator, c: f64) -> Result<(f64, f64)> {
    if c <= 0.0 {
        return Err(Error::InvalidArgument(format!("scaling factor {c} must be positive")));
    }
    let base = relative_entropy(rho, sigma, None)
        .value()
        .ok_or(Error::InfiniteBase)?;
    let (c_rho, c_sigma) = (rho.scale(c)?, sigma.scale(c)?);
    let both = relative_entropy(&c_rho, &c_sigma, None)
        .value()
        .ok_or(Error::InfiniteBase)?;
    let one = relative_entropy(rho, &c_sigma, None)
        .value()
        .ok_or(Error::InfiniteBase)?;
    let r1 = both - c * base;
    let r2 = one - (base - rho.trace() * c.ln() + (c - 1.0) * sigma.trace());
    Ok((r1, r2))
}

/// Outcome of comparing `D(ρ+σ‖ω+ϑ)` with `D(ρ‖ω) + D(σ‖ϑ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SumDecomposition {
    /// `D(ρ‖ω) + D(σ‖ϑ) − D(ρ+σ‖ω+ϑ)`.
    pub gap: Gap,
    /// All four cross products `ρσ, ρϑ, σω, ωϑ` vanish (operator norm ≤ 1e-10).
    pub exact: bool,
}

impl SumDecomposition {
    pub fn indeterminate(&self) -> bool {
        self.gap == Gap::Indeterminate
    }
}

pub fn sum_decomposition_check(
    rho: &PositiveOperator,
    sigma: &PositiveOperator,
    omega: &PositiveOperator,
    theta: &PositiveOperator,
) -> Result<SumDecomposition> {
    check_dim(rho.dim(), sigma.dim())?;
    check_dim(rho.dim(), omega.dim())?;
    check_dim(rho.dim(), theta.dim())?;
    let parts = relative_entropy(rho, omega, None) + relative_entropy(sigma, theta, None);
    let joint = relative_entropy(&rho.add(sigma)?, &omega.add(theta)?, None);
    let vanishes = |a: &PositiveOperator, b: &PositiveOperator| operator_norm(&(a.matrix() * b.matrix())) <= 1e-10;
    let exact = vanishes(rho, sigma) && vanishes(rho, theta) && vanishes(sigma, omega) && vanishes(omega, theta);
    Ok(SumDecomposition {
        gap: parts.minus(&joint),
        exact,
    })
}

/// Both sides of Donald's identity
/// `pD(ρ‖ω) + p̄D(σ‖ω) = pD(ρ‖m) + p̄D(σ‖m) + D(m‖ω)`, `m = pρ + p̄σ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DonaldDecomposition {
    pub lhs: f64,
    /// `(pD(ρ‖m), p̄D(σ‖m))`.
    pub mixture_terms: (f64, f64),
    /// `D(m‖ω)`.
    pub outer_term: f64,
    pub residual: f64,
}

/// Terms with zero weight are dropped (`0 · inf = 0`); any other infinite
/// term makes the identity indeterminate.
pub fn donald(
    rho: &PositiveOperator,
    sigma: &PositiveOperator,
    omega: &PositiveOperator,
    p: f64,
) -> Result<DonaldDecomposition> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("mixing weight {p} outside [0, 1]")));
    }
    check_dim(rho.dim(), sigma.dim())?;
    check_dim(rho.dim(), omega.dim())?;
    let q = 1.0 - p;
    let mixture = rho.scale(p)?.add(&sigma.scale(q)?)?;
    let weighted = |w: f64, a: &PositiveOperator, b: &PositiveOperator, name: &str| -> Result<f64> {
        if w == 0.0 {
            return Ok(0.0);
        }
        relative_entropy(a, b, None)
            .value()
            .map(|v| w * v)
            .ok_or_else(|| Error::IndeterminateIdentity { term: name.to_string() })
    };
    let lhs = weighted(p, rho, omega, "D(rho||omega)")? + weighted(q, sigma, omega, "D(sigma||omega)")?;
    let m_rho = weighted(p, rho, &mixture, "D(rho||mixture)")?;
    let m_sigma = weighted(q, sigma, &mixture, "D(sigma||mixture)")?;
    let outer = weighted(1.0, &mixture, omega, "D(mixture||omega)")?;
    Ok(DonaldDecomposition {
        lhs,
        mixture_terms: (m_rho, m_sigma),
        outer_term: outer,
        residual: lhs - (m_rho + m_sigma + outer),
    })
}

/// `D(ρ‖½ρ+½σ) + D(σ‖½ρ+½σ)`; finite for all inputs.
pub fn symmetrized_divergence(rho: &TwoScaleOperator, sigma: &TwoScaleOperator) -> Result<f64> {
    let mixture = rho.scale(0.5)?.add(&sigma.scale(0.5)?)?;
    let spec = mixture.log_spectrum(None);
    let a = relative_entropy_spectral(&rho.materialize(), &mixture, &spec, None);
    let b = relative_entropy_spectral(&sigma.materialize(), &mixture, &spec, None);
    (a + b)
        .value()
        .ok_or_else(|| Error::IndeterminateIdentity {
            term: "symmetrized divergence".to_string(),
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn diag(v: &[f64]) -> PositiveOperator {
        PositiveOperator::from_real_diagonal(v).unwrap()
    }

    #[test]
    fn eta_values() {
        assert_eq!(eta(0.0).unwrap(), 0.0);
        assert_eq!(eta(1.0).unwrap(), 0.0);
        let e = std::f64::consts::E;
        assert!((eta(1.0 / e).unwrap() - 1.0 / e).abs() < 1e-16);
        assert!(matches!(eta(-0.1), Err(Error::NegativeInput(_))));
    }

    #[test]
    fn entropy_examples() {
        assert!((entropy_ext(&diag(&[0.5, 0.5])).to_f64() - LN_2).abs() < 1e-15);
        assert!(entropy_ext(&PositiveOperator::pure(&[crate::operator::c(0.6), crate::operator::c(0.8)])).to_f64() < 1e-14);
        assert!((entropy_ext(&diag(&[1.0, 1.0])).to_f64() - 2.0 * LN_2).abs() < 1e-15);
        assert_eq!(entropy_ext(&PositiveOperator::zero(3)), ExtendedNonNegative::ZERO);
    }

    #[test]
    fn relative_entropy_examples() {
        let s = diag(&[0.3, 0.7]);
        assert!(relative_entropy(&s, &s, None).to_f64().abs() < 1e-15);
        assert_eq!(
            relative_entropy(&PositiveOperator::zero(2), &diag(&[0.3, 0.2]), None),
            ExtendedNonNegative::Finite(0.5)
        );
        let d = relative_entropy(&diag(&[0.5, 0.5]), &diag(&[0.75, 0.25]), None).to_f64();
        assert!((d - 0.5 * (4.0f64 / 3.0).ln()).abs() < 1e-15);
        assert_eq!(
            relative_entropy(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0]), None),
            ExtendedNonNegative::PositiveInfinity
        );
        assert_eq!(
            relative_entropy(&diag(&[1.0, 0.0]), &PositiveOperator::zero(2), None),
            ExtendedNonNegative::PositiveInfinity
        );
    }

    #[test]
    fn representation_examples() {
        let rho = diag(&[0.5, 0.5]);
        let d = relative_entropy_via_rep(&rho, &diag(&[1.0, 1.0]), None).to_f64();
        assert!((d - (1.0 - LN_2)).abs() < 1e-15);
        let d = relative_entropy_via_rep(&rho, &diag(&[0.75, 0.25]), None).to_f64();
        assert!((d - 0.5 * (4.0f64 / 3.0).ln()).abs() < 1e-14);
        assert_eq!(
            relative_entropy_via_rep(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0]), None),
            ExtendedNonNegative::PositiveInfinity
        );
        let pure = PositiveOperator::pure(&[crate::operator::c(0.6), crate::operator::c(0.8)]);
        assert!(relative_entropy_via_rep(&pure, &pure, None).to_f64() < 1e-12);
    }

    #[test]
    fn scaling_examples() {
        let s = diag(&[0.3, 0.7]);
        let (r1, r2) = scaling_residuals(&s, &s, 1.0).unwrap();
        assert!(r1.abs() < 1e-15 && r2.abs() < 1e-15);
        let (r1, r2) = scaling_residuals(&s, &s, 2.0).unwrap();
        assert!(r1.abs() < 1e-14 && r2.abs() < 1e-14);
        let d = relative_entropy(&s, &s.scale(2.0).unwrap(), None).to_f64();
        assert!((d - (1.0 - LN_2)).abs() < 1e-14);
        assert!(matches!(
            scaling_residuals(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0]), 2.0),
            Err(Error::InfiniteBase)
        ));
    }

    #[test]
    fn orthogonal_sum_is_exact() {
        let r = sum_decomposition_check(
            &diag(&[0.3, 0.0]),
            &diag(&[0.0, 0.6]),
            &diag(&[0.5, 0.0]),
            &diag(&[0.0, 0.2]),
        )
        .unwrap();
        assert!(r.exact);
        assert!(r.gap.value().unwrap().abs() < 1e-15);

        let rho = diag(&[0.3, 0.7]);
        let omega = diag(&[0.6, 0.4]);
        let r = sum_decomposition_check(&rho, &rho, &omega, &omega).unwrap();
        assert!(!r.exact);
        assert!(r.gap.value().unwrap().abs() < 1e-14);
    }

    #[test]
    fn infinite_sum_is_indeterminate() {
        let r = sum_decomposition_check(
            &diag(&[1.0, 0.0]),
            &diag(&[1.0, 0.0]),
            &diag(&[0.0, 1.0]),
            &diag(&[0.0, 1.0]),
        )
        .unwrap();
        assert!(r.indeterminate());
    }

    #[test]
    fn donald_examples() {
        let (rho, sigma, omega) = (diag(&[0.2, 0.8]), diag(&[0.6, 0.4]), diag(&[0.5, 0.5]));
        let d = donald(&rho, &sigma, &omega, 0.0).unwrap();
        assert!(d.residual.abs() < 1e-15);
        assert_eq!(d.mixture_terms.0, 0.0);

        let d = donald(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0]), &PositiveOperator::maximally_mixed(2), 0.5)
            .unwrap();
        assert!((d.lhs - LN_2).abs() < 1e-15);
        assert!((d.mixture_terms.0 + d.mixture_terms.1 - LN_2).abs() < 1e-15);
        assert!(d.outer_term.abs() < 1e-15);
        assert!(d.residual.abs() < 1e-15);

        assert!(matches!(
            donald(&diag(&[1.0, 0.0]), &sigma, &diag(&[0.0, 1.0]), 0.5),
            Err(Error::IndeterminateIdentity { .. })
        ));
    }

    #[test]
    fn orthogonal_pure_states_symmetrized() {
        let a: TwoScaleOperator = diag(&[1.0, 0.0]).into();
        let b: TwoScaleOperator = diag(&[0.0, 1.0]).into();
        assert!((symmetrized_divergence(&a, &b).unwrap() - 2.0 * LN_2).abs() < 1e-15);
        assert!(symmetrized_divergence(&a, &a).unwrap().abs() < 1e-15);
    }

    #[test]
    fn scaled_matches_closed_form_far_below_f64() {
        // D(diag(1-1/n, 1/n) ‖ diag(1-q, q)), ln q = -1.5 n - ln n, n = 1000
        let n = 1000.0f64;
        let ln_q = -1.5 * n - n.ln();
        let rho: TwoScaleOperator = diag(&[1.0 - 1.0 / n, 1.0 / n]).into();
        let sigma = TwoScaleOperator::new(diag(&[1.0, 0.0]), diag(&[0.0, 1.0]), ln_q).unwrap();
        let d = relative_entropy_scaled(&rho, &sigma, None).to_f64();
        let a = 1.0 - 1.0 / n;
        let expected = a * a.ln() + (1.0 / n) * ((1.0 / n).ln() - ln_q) + 1.0 - 1.0;
        assert!((d - expected).abs() < 1e-13, "{d} vs {expected}");
    }
}
