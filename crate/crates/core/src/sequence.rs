//! Converging sequences of operator pairs with known limits, and projector
//! ladders completely consistent with the second sequence.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, RwLock};

use serde::Serialize;

use crate::channel::KrausOperation;
use crate::error::{Error, Result};
use crate::extended::ExtendedNonNegative;
use nalgebra::DVector;

use crate::operator::{
    operator_norm, spectral_decompose, trace_norm, CMatrix, HermitianMatrix, PositiveOperator, Projector, Spectrum, C64,
};
use crate::random::{random_full_rank_state, random_hermitian, rng};
use crate::scaled::{LogSpectrum, TwoScaleOperator};

/// Relative distance every threshold keeps from every eigenvalue on the grid.
pub const THRESHOLD_MARGIN: f64 = 1e-6;
/// PSD-order slack for ladder monotonicity.
pub const MONOTONE_TOL: f64 = 1e-10;
/// `‖Pσ − σP‖` allowed by the commutation condition.
pub const COMMUTATION_TOL: f64 = 1e-9;
/// Slack of "non-increasing" checks over a decade of indices.
pub const TREND_SLACK: f64 = 1e-12;

/// `(ρ_n, σ_n)`; `n = 0` is the limit pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceTerm {
    pub rho: TwoScaleOperator,
    pub sigma: TwoScaleOperator,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FamilyKind {
    /// `ρ_n = diag(1−1/n, 1/n, 0…)`, `σ_n = diag(1−q_n, q_n, 0…)`, `q_n = e^{−cn}/n`.
    Jump { c: f64 },
    /// `ρ_n = (1+1/n²) U_n ρ₀ U_n*`, likewise `σ_n`, with `U_n = e^{iH/n}`
    /// and `‖H‖ = 1`. Both converge in trace norm at rate `O(1/n)` and
    /// `D(ρ_n‖σ_n) = (1+1/n²) D(ρ₀‖σ₀)`.
    Continuous {
        seed: u64,
        rho0: PositiveOperator,
        sigma0: PositiveOperator,
        generator: Spectrum,
    },
    /// Explicit terms for finitely many `n` plus the limit pair.
    Custom {
        terms: BTreeMap<usize, (PositiveOperator, PositiveOperator)>,
        limit: (PositiveOperator, PositiveOperator),
        analytic_jump: Option<ExtendedNonNegative>,
    },
    /// Image of another family under a quantum operation.
    Image {
        base: Box<StateSequenceFamily>,
        op: KrausOperation,
        label: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateSequenceFamily {
    dim: usize,
    kind: FamilyKind,
}

impl StateSequenceFamily {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    /// Members of a custom family that are defined, in ascending order.
    /// `None` for families defined for every `n ≥ 1`.
    pub fn defined_indices(&self) -> Option<Vec<usize>> {
        match &self.kind {
            FamilyKind::Custom { terms, .. } => Some(terms.keys().copied().collect()),
            FamilyKind::Image { base, .. } => base.defined_indices(),
            _ => None,
        }
    }

    pub fn custom(
        terms: BTreeMap<usize, (PositiveOperator, PositiveOperator)>,
        limit: (PositiveOperator, PositiveOperator),
        analytic_jump: Option<ExtendedNonNegative>,
    ) -> Result<Self> {
        let dim = limit.0.dim();
        if limit.1.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: limit.1.dim(),
            });
        }
        for (&n, (r, s)) in &terms {
            if n == 0 {
                return Err(Error::InvalidArgument("custom terms start at n = 1".into()));
            }
            if r.dim() != dim || s.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: if r.dim() != dim { r.dim() } else { s.dim() },
                });
            }
        }
        Ok(Self {
            dim,
            kind: FamilyKind::Custom {
                terms,
                limit,
                analytic_jump,
            },
        })
    }

    /// Term `n`, with `n = 0` the limit pair.
    pub fn term(&self, n: usize) -> Result<SequenceTerm> {
        match &self.kind {
            FamilyKind::Jump { c } => Ok(jump_term(*c, self.dim, n)),
            FamilyKind::Continuous {
                rho0,
                sigma0,
                generator,
                ..
            } => {
                if n == 0 {
                    return Ok(SequenceTerm {
                        rho: rho0.clone().into(),
                        sigma: sigma0.clone().into(),
                    });
                }
                let t = 1.0 / n as f64;
                let u = unitary_exp(generator, t);
                let move_ = |x: &PositiveOperator| -> Result<TwoScaleOperator> {
                    Ok(x.conjugate_by(&u)?.scale(1.0 + t * t)?.into())
                };
                Ok(SequenceTerm {
                    rho: move_(rho0)?,
                    sigma: move_(sigma0)?,
                })
            }
            FamilyKind::Custom { terms, limit, .. } => {
                let (r, s) = if n == 0 {
                    limit
                } else {
                    terms.get(&n).ok_or(Error::MissingTerm(n))?
                };
                Ok(SequenceTerm {
                    rho: r.clone().into(),
                    sigma: s.clone().into(),
                })
            }
            FamilyKind::Image { base, op, .. } => {
                let t = base.term(n)?;
                Ok(SequenceTerm {
                    rho: op.apply_scaled(&t.rho)?,
                    sigma: op.apply_scaled(&t.sigma)?,
                })
            }
        }
    }

    pub fn limit(&self) -> Result<SequenceTerm> {
        self.term(0)
    }

    /// Known value of the jump, if the family carries one.
    pub fn analytic_jump(&self) -> Option<ExtendedNonNegative> {
        match &self.kind {
            FamilyKind::Jump { c } => Some(ExtendedNonNegative::Finite(*c)),
            FamilyKind::Continuous { .. } => Some(ExtendedNonNegative::ZERO),
            FamilyKind::Custom { analytic_jump, .. } => *analytic_jump,
            FamilyKind::Image { .. } => None,
        }
    }

    pub fn description(&self) -> String {
        self.to_string()
    }

    /// The family `(Φ(ρ_n), Φ(σ_n))`.
    pub fn map_through(&self, op: &KrausOperation, label: impl Into<String>) -> Result<Self> {
        if op.dim_in() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: op.dim_in(),
            });
        }
        Ok(Self {
            dim: op.dim_out(),
            kind: FamilyKind::Image {
                base: Box::new(self.clone()),
                op: op.clone(),
                label: label.into(),
            },
        })
    }

    /// `(‖ρ_n − ρ₀‖₁, ‖σ_n − σ₀‖₁)`.
    pub fn distance_to_limit(&self, n: usize) -> Result<(f64, f64)> {
        let t = self.term(n)?;
        let l = self.limit()?;
        let d = |a: &TwoScaleOperator, b: &TwoScaleOperator| {
            trace_norm(&(a.materialize().matrix() - b.materialize().matrix()))
        };
        Ok((d(&t.rho, &l.rho), d(&t.sigma, &l.sigma)))
    }
}

impl fmt::Display for StateSequenceFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            FamilyKind::Jump { c } => write!(f, "jump family (c = {c}, dim = {})", self.dim),
            FamilyKind::Continuous { seed, .. } => {
                write!(f, "continuous family (seed = {seed}, dim = {})", self.dim)
            }
            FamilyKind::Custom { terms, .. } => {
                write!(f, "custom family ({} terms, dim = {})", terms.len(), self.dim)
            }
            FamilyKind::Image { base, label, .. } => write!(f, "{label} applied to {base}"),
        }
    }
}

/// `ln q_n = −cn − ln n`.
pub fn jump_ln_q(c: f64, n: usize) -> f64 {
    -c * n as f64 - (n as f64).ln()
}

fn jump_term(c: f64, dim: usize, n: usize) -> SequenceTerm {
    let diag = |a: f64, b: f64| {
        let mut v = vec![0.0; dim];
        v[0] = a;
        v[1] = b;
        PositiveOperator::from_real_diagonal(&v).expect("non-negative diagonal")
    };
    if n == 0 {
        let limit = diag(1.0, 0.0);
        return SequenceTerm {
            rho: limit.clone().into(),
            sigma: limit.into(),
        };
    }
    let inv = 1.0 / n as f64;
    let ln_q = jump_ln_q(c, n);
    let sigma = TwoScaleOperator::new(diag(-ln_q.exp_m1(), 0.0), diag(0.0, 1.0), ln_q)
        .expect("finite log weight");
    SequenceTerm {
        rho: diag(1.0 - inv, inv).into(),
        sigma,
    }
}

pub fn make_jump_family(c: f64, dim: usize) -> Result<StateSequenceFamily> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidArgument(format!("jump parameter c = {c} must be positive")));
    }
    if dim < 2 {
        return Err(Error::InvalidArgument(format!("jump family needs dim >= 2, got {dim}")));
    }
    Ok(StateSequenceFamily {
        dim,
        kind: FamilyKind::Jump { c },
    })
}

/// Closed form of `D(ρ_n‖σ_n)` for the jump family.
pub fn jump_closed_form(c: f64, n: usize) -> f64 {
    let inv = 1.0 / n as f64;
    let one_minus_q = -jump_ln_q(c, n).exp_m1();
    let head = if inv == 1.0 { 0.0 } else { (1.0 - inv) * ((1.0 - inv) / one_minus_q).ln() };
    c + head
}

pub fn make_continuous_family(dim: usize, seed: u64) -> Result<StateSequenceFamily> {
    if dim < 2 {
        return Err(Error::InvalidArgument(format!("continuous family needs dim >= 2, got {dim}")));
    }
    let mut r = rng(seed);
    let rho0 = random_full_rank_state(&mut r, dim);
    let sigma0 = random_full_rank_state(&mut r, dim);
    let mut generator = HermitianMatrix::symmetrized(&random_hermitian(&mut r, dim)).spectral();
    let norm = generator.max_abs();
    for v in generator.values.iter_mut() {
        *v /= norm;
    }
    Ok(StateSequenceFamily {
        dim,
        kind: FamilyKind::Continuous {
            seed,
            rho0,
            sigma0,
            generator,
        },
    })
}

/// `e^{itH}` from the spectral decomposition of `H`.
fn unitary_exp(h: &Spectrum, t: f64) -> CMatrix {
    let phases = DVector::from_iterator(h.dim(), h.values.iter().map(|&v| C64::from_polar(1.0, t * v)));
    &h.vectors * CMatrix::from_diagonal(&phases) * h.vectors.adjoint()
}

type ExplicitFn = dyn Fn(usize, usize) -> Projector + Send + Sync;

#[derive(Clone)]
enum LadderSource {
    Threshold {
        /// `ln δ_m`, indexed from `m0`.
        ln_thresholds: Vec<f64>,
        /// Log spectra of `σ_n`, `n = 0..=n_max`.
        spectra: Arc<Vec<LogSpectrum>>,
    },
    Explicit(Arc<ExplicitFn>),
}

/// Double sequence `P^n_m` for `0 ≤ n ≤ n_max`, `m0 ≤ m ≤ m_max`,
/// materialized lazily and memoized.
pub struct ProjectorLadder {
    m0: usize,
    m_max: usize,
    n_max: usize,
    /// Smallest eigenvalue the ladder can resolve (`ln` form); `None` for
    /// ladders whose supports are exact.
    ln_resolution: Option<f64>,
    source: LadderSource,
    cache: RwLock<HashMap<(usize, usize), Projector>>,
}

impl fmt::Debug for ProjectorLadder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProjectorLadder")
            .field("m0", &self.m0)
            .field("m_max", &self.m_max)
            .field("n_max", &self.n_max)
            .field("ln_resolution", &self.ln_resolution)
            .finish_non_exhaustive()
    }
}

impl ProjectorLadder {
    /// Ladder given by a closure `(n, m) ↦ P^n_m`.
    pub fn explicit(
        m0: usize,
        m_max: usize,
        n_max: usize,
        f: impl Fn(usize, usize) -> Projector + Send + Sync + 'static,
    ) -> Self {
        Self {
            m0,
            m_max,
            n_max,
            ln_resolution: None,
            source: LadderSource::Explicit(Arc::new(f)),
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn m0(&self) -> usize {
        self.m0
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// `δ_{m_max}` for threshold ladders.
    pub fn resolution(&self) -> Option<f64> {
        self.ln_resolution.map(f64::exp)
    }

    pub fn projector(&self, n: usize, m: usize) -> Result<Projector> {
        if n > self.n_max || m < self.m0 || m > self.m_max {
            return Err(Error::InvalidArgument(format!(
                "(n, m) = ({n}, {m}) outside the ladder grid n <= {}, {} <= m <= {}",
                self.n_max, self.m0, self.m_max
            )));
        }
        if let Some(p) = self.cache.read().expect("ladder cache poisoned").get(&(n, m)) {
            return Ok(p.clone());
        }
        let p = match &self.source {
            LadderSource::Threshold { ln_thresholds, spectra } => {
                spectra[n].projector_above(ln_thresholds[m - self.m0])
            }
            LadderSource::Explicit(f) => f(n, m),
        };
        self.cache
            .write()
            .expect("ladder cache poisoned")
            .insert((n, m), p.clone());
        Ok(p)
    }

    /// Support of `σ_n` as seen by the ladder: eigenvalues above the
    /// resolution floor `δ_{m_max}(1 − margin)` for threshold ladders, the
    /// exact support otherwise.
    pub fn resolved_support(&self, family: &StateSequenceFamily, n: usize) -> Result<Projector> {
        let spec = self.sigma_spectrum(family, n)?;
        Ok(match self.ln_floor() {
            Some(floor) => spec.projector_above(floor),
            None => spec.support(),
        })
    }

    /// Rank of a positive operator as seen by the ladder.
    fn resolved_rank(&self, x: &TwoScaleOperator) -> usize {
        let spec = x.log_spectrum(None);
        match self.ln_floor() {
            Some(floor) => spec.ln_values.iter().filter(|&&v| v > floor).count(),
            None => spec.rank(),
        }
    }

    fn ln_floor(&self) -> Option<f64> {
        self.ln_resolution.map(|r| r + (1.0 - THRESHOLD_MARGIN).ln())
    }

    fn sigma_spectrum(&self, family: &StateSequenceFamily, n: usize) -> Result<LogSpectrum> {
        match &self.source {
            LadderSource::Threshold { spectra, .. } if n < spectra.len() => Ok(spectra[n].clone()),
            _ => Ok(family.term(n)?.sigma.log_spectrum(None)),
        }
    }
}

/// `δ_m = e^{−c(m+½)}/(m+½)`, which sits strictly between consecutive
/// `q_n = e^{−cn}/n` of the jump family.
pub fn jump_thresholds(c: f64, m0: usize, m_max: usize) -> Vec<f64> {
    (m0..=m_max)
        .map(|m| {
            let x = m as f64 + 0.5;
            (-c * x - x.ln()).exp()
        })
        .collect()
}

/// Threshold ladder `P^n_m = 1{σ_n > δ_m}` over `0 ≤ n ≤ n_max`.
///
/// Fails with [`Error::ThresholdCollision`] when some `δ_m` is within the
/// relative margin of an eigenvalue of some `σ_n` on the grid.
pub fn build_threshold_ladder(
    family: &StateSequenceFamily,
    thresholds: &[f64],
    m0: usize,
    n_max: usize,
) -> Result<ProjectorLadder> {
    let ln_thresholds = validate_thresholds(thresholds)?;
    let spectra = sigma_spectra(family, n_max)?;
    for (n, spec) in spectra.iter().enumerate() {
        for (i, &ln_d) in ln_thresholds.iter().enumerate() {
            if let Some(&ln_l) = spec
                .ln_values
                .iter()
                .find(|&&l| l.is_finite() && (l - ln_d).abs() < THRESHOLD_MARGIN)
            {
                return Err(Error::ThresholdCollision {
                    m: m0 + i,
                    n,
                    threshold: ln_d.exp(),
                    eigenvalue: ln_l.exp(),
                });
            }
        }
    }
    Ok(ProjectorLadder {
        m0,
        m_max: m0 + ln_thresholds.len() - 1,
        n_max,
        ln_resolution: ln_thresholds.last().copied(),
        source: LadderSource::Threshold {
            ln_thresholds,
            spectra: Arc::new(spectra),
        },
        cache: RwLock::new(HashMap::new()),
    })
}

/// Threshold ladder whose `δ_m` start from `preferred` and are moved, where
/// needed, to the log-midpoint of the gap between the grid eigenvalues that
/// surround them.
pub fn build_adaptive_ladder(
    family: &StateSequenceFamily,
    preferred: &[f64],
    m0: usize,
    n_max: usize,
) -> Result<ProjectorLadder> {
    let ln_pref = validate_thresholds(preferred)?;
    let spectra = sigma_spectra(family, n_max)?;
    let mut eigen: Vec<f64> = spectra
        .iter()
        .flat_map(|s| s.ln_values.iter().copied().filter(|l| l.is_finite()))
        .collect();
    eigen.sort_by(f64::total_cmp);
    eigen.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let mut chosen = Vec::with_capacity(ln_pref.len());
    for &ln_d in &ln_pref {
        let pos = eigen.partition_point(|&l| l < ln_d);
        let below = pos.checked_sub(1).map(|i| eigen[i]);
        let above = eigen.get(pos).copied();
        let clear = |x: f64| below.is_none_or(|b| x - b >= 2.0 * THRESHOLD_MARGIN) && above.is_none_or(|a| a - x >= 2.0 * THRESHOLD_MARGIN);
        let pick = if clear(ln_d) {
            ln_d
        } else {
            match (below, above) {
                (Some(b), Some(a)) if a - b >= 4.0 * THRESHOLD_MARGIN => 0.5 * (a + b),
                (None, Some(a)) => a - 1.0,
                (Some(b), None) => b + 1.0,
                _ => {
                    return Err(Error::LadderConstructionFailure(format!(
                        "no eigenvalue gap near threshold {:e}",
                        ln_d.exp()
                    )))
                }
            }
        };
        if chosen.last().is_some_and(|&prev: &f64| pick >= prev) {
            return Err(Error::LadderConstructionFailure(
                "adjusted thresholds are not strictly decreasing".into(),
            ));
        }
        chosen.push(pick);
    }
    let thresholds: Vec<f64> = chosen.iter().map(|l| l.exp()).collect();
    build_threshold_ladder(family, &thresholds, m0, n_max)
}

fn validate_thresholds(thresholds: &[f64]) -> Result<Vec<f64>> {
    if thresholds.is_empty() {
        return Err(Error::LadderConstructionFailure("no thresholds".into()));
    }
    if thresholds.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
        return Err(Error::LadderConstructionFailure("thresholds must be positive".into()));
    }
    if thresholds.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::LadderConstructionFailure("thresholds must be strictly decreasing".into()));
    }
    Ok(thresholds.iter().map(|d| d.ln()).collect())
}

fn sigma_spectra(family: &StateSequenceFamily, n_max: usize) -> Result<Vec<LogSpectrum>> {
    use rayon::prelude::*;
    (0..=n_max)
        .into_par_iter()
        .map(|n| Ok(family.term(n)?.sigma.log_spectrum(None)))
        .collect()
}

/// Outcome of one ladder condition over the grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub name: &'static str,
    pub pass: bool,
    /// Worst residual found; for the rank condition, the number of mismatches.
    pub worst: f64,
    /// `(n, m)` where the worst residual occurred.
    pub at: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderReport {
    pub n_max: usize,
    pub m0: usize,
    pub m_max: usize,
    pub resolution: Option<f64>,
    pub conditions: Vec<ConditionReport>,
    /// The finite-grid proxy used for norm convergence.
    pub convergence_proxy: String,
}

impl LadderReport {
    pub fn pass(&self) -> bool {
        self.conditions.iter().all(|c| c.pass)
    }

    pub fn condition(&self, name: &str) -> Option<&ConditionReport> {
        self.conditions.iter().find(|c| c.name == name)
    }

    pub fn failing(&self) -> Vec<&'static str> {
        self.conditions.iter().filter(|c| !c.pass).map(|c| c.name).collect()
    }
}

struct Worst {
    value: f64,
    at: Option<(usize, usize)>,
}

impl Worst {
    fn new() -> Self {
        Self { value: 0.0, at: None }
    }

    fn update(&mut self, value: f64, n: usize, m: usize) {
        if value > self.value || self.at.is_none() {
            self.value = value;
            self.at = Some((n, m));
        }
    }
}

/// Checks monotonicity, covering, commutation, the rank condition and
/// norm convergence of the ladder on `0 ≤ n ≤ n_max` and the ladder's m-range.
///
/// Convergence is checked as `‖P^{n_max}_m − P^0_m‖ ≤ tol` with the distance
/// non-increasing over `n ∈ [n_max/10, n_max]`, for every `m`.
pub fn verify_ladder(ladder: &ProjectorLadder, family: &StateSequenceFamily, n_max: usize, tol: f64) -> Result<LadderReport> {
    verify_ladder_range(ladder, family, n_max, ladder.m0()..=ladder.m_max(), tol)
}

/// [`verify_ladder`] restricted to a sub-range of `m`.
pub fn verify_ladder_range(
    ladder: &ProjectorLadder,
    family: &StateSequenceFamily,
    n_max: usize,
    m_range: std::ops::RangeInclusive<usize>,
    tol: f64,
) -> Result<LadderReport> {
    use rayon::prelude::*;
    let n_max = n_max.min(ladder.n_max());
    let ms: Vec<usize> = m_range.collect();
    if ms.is_empty() {
        return Err(Error::InvalidArgument("empty m-range".into()));
    }

    struct Row {
        monotone: Worst,
        covering: Worst,
        commutation: Worst,
        rank: Worst,
    }

    let rows: Vec<Row> = (0..=n_max)
        .into_par_iter()
        .map(|n| -> Result<Row> {
            let term = family.term(n)?;
            let sigma = term.sigma.materialize();
            let d = family.dim();
            let mut row = Row {
                monotone: Worst::new(),
                covering: Worst::new(),
                commutation: Worst::new(),
                rank: Worst::new(),
            };
            let mut join = CMatrix::zeros(d, d);
            let mut prev: Option<Projector> = None;
            for &m in &ms {
                let p = ladder.projector(n, m)?;
                if let Some(q) = &prev {
                    let gap = spectral_decompose(&HermitianMatrix::symmetrized(&(p.matrix() - q.matrix())));
                    let min = gap.values.last().copied().unwrap_or(0.0);
                    row.monotone.update((-min).max(0.0), n, m);
                }
                let comm = operator_norm(&(p.matrix() * sigma.matrix() - sigma.matrix() * p.matrix()));
                row.commutation.update(comm, n, m);
                let rank_p_sigma = ladder.resolved_rank(&term.sigma.compress(&p)?);
                row.rank.update(rank_p_sigma.abs_diff(p.rank()) as f64, n, m);
                join += p.matrix();
                prev = Some(p);
            }
            let join = spectral_decompose(&HermitianMatrix::symmetrized(&join));
            let join_tol = crate::operator::default_rank_tol(&join);
            let join = Projector::from_spectrum(&join, |_, v| v > join_tol);
            let q = ladder.resolved_support(family, n)?;
            let uncovered = operator_norm(&((CMatrix::identity(d, d) - join.matrix()) * q.matrix()));
            row.covering.update(uncovered, n, *ms.last().expect("non-empty m-range"));
            Ok(row)
        })
        .collect::<Result<_>>()?;

    let mut monotone = Worst::new();
    let mut covering = Worst::new();
    let mut commutation = Worst::new();
    let mut rank = Worst::new();
    for r in &rows {
        for (acc, w) in [
            (&mut monotone, &r.monotone),
            (&mut covering, &r.covering),
            (&mut commutation, &r.commutation),
            (&mut rank, &r.rank),
        ] {
            if let Some((n, m)) = w.at {
                acc.update(w.value, n, m);
            }
        }
    }

    let lo = (n_max / 10).max(1);
    let mut convergence = Worst::new();
    let mut trend_ok = true;
    for &m in &ms {
        let p0 = ladder.projector(0, m)?;
        let mut last = f64::INFINITY;
        for n in lo..=n_max {
            let dev = operator_norm(&(ladder.projector(n, m)?.matrix() - p0.matrix()));
            if dev > last + TREND_SLACK {
                trend_ok = false;
            }
            last = dev;
        }
        convergence.update(last, n_max, m);
    }

    let conditions = vec![
        ConditionReport {
            name: "monotone",
            pass: monotone.value <= MONOTONE_TOL,
            worst: monotone.value,
            at: monotone.at,
        },
        ConditionReport {
            name: "covering",
            pass: covering.value <= 1e-8,
            worst: covering.value,
            at: covering.at,
        },
        ConditionReport {
            name: "commutation",
            pass: commutation.value <= COMMUTATION_TOL,
            worst: commutation.value,
            at: commutation.at,
        },
        ConditionReport {
            name: "rank",
            pass: rank.value == 0.0,
            worst: rank.value,
            at: rank.at,
        },
        ConditionReport {
            name: "convergence",
            pass: trend_ok && convergence.value <= tol,
            worst: convergence.value,
            at: convergence.at,
        },
    ];
    Ok(LadderReport {
        n_max,
        m0: ms[0],
        m_max: *ms.last().expect("non-empty m-range"),
        resolution: ladder.resolution(),
        conditions,
        convergence_proxy: format!(
            "|P^n_m - P^0_m| <= {tol:e} at n = {n_max}, non-increasing for n in [{lo}, {n_max}]"
        ),
    })
}
