//! Positive operators with two widely separated scales.
//!
//! Converging sequences with degenerating supports produce operators such as
//! `diag(1 - q, q)` with `q = e^{-cn}/n`, far below double precision relative
//! to the leading block (and below the `f64` range for large `n`). A
//! [`TwoScaleOperator`] stores such an operator as `L + e^w T` with the weight
//! kept in log form, and its [`LogSpectrum`] resolves the small eigenvalues
//! with full relative accuracy: the invariant subspaces are separated exactly
//! by solving the block Riccati equation, then each block is diagonalized at
//! its own scale.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::operator::{
    c, check_dim, conjugate, default_rank_tol, hermitian_part, spectral_decompose, CMatrix,
    HermitianMatrix, PositiveOperator, Projector, Spectrum, DEFAULT_RANK_TOL,
};

/// Separation (relative to the smallest leading eigenvalue) below which the
/// two-scale decomposition is used instead of a direct eigensolve.
const SEPARATION: f64 = 1e-6;
const RICCATI_MAX_ITER: usize = 60;

/// Leading eigenvalues below this many ulps of the reference magnitude
/// (per dimension) are roundoff.
const NOISE_ULPS: f64 = 8.0;

/// `leading + e^{log_weight} · tail`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoScaleOperator {
    leading: PositiveOperator,
    tail: Option<(PositiveOperator, f64)>,
    /// Magnitude of the operators this one was computed from; compressions
    /// leave roundoff of this size in the leading part.
    reference: f64,
}

impl From<PositiveOperator> for TwoScaleOperator {
    fn from(op: PositiveOperator) -> Self {
        let reference = op.max_eigenvalue().max(0.0);
        Self {
            leading: op,
            tail: None,
            reference,
        }
    }
}

impl TwoScaleOperator {
    pub fn new(leading: PositiveOperator, tail: PositiveOperator, log_weight: f64) -> Result<Self> {
        check_dim(leading.dim(), tail.dim())?;
        if log_weight.is_nan() || log_weight == f64::INFINITY {
            return Err(Error::InvalidArgument(format!("log weight {log_weight}")));
        }
        let tail = (log_weight > f64::NEG_INFINITY && !tail.is_zero()).then_some((tail, log_weight));
        let reference = leading.max_eigenvalue().max(0.0);
        Ok(Self {
            leading,
            tail,
            reference,
        })
    }

    fn with_reference(mut self, reference: f64) -> Self {
        self.reference = self.reference.max(reference);
        self
    }

    /// Absolute size of roundoff in the leading part.
    fn noise(&self) -> f64 {
        NOISE_ULPS * self.dim() as f64 * f64::EPSILON * self.reference
    }

    pub fn dim(&self) -> usize {
        self.leading.dim()
    }

    pub fn leading(&self) -> &PositiveOperator {
        &self.leading
    }

    pub fn tail(&self) -> Option<(&PositiveOperator, f64)> {
        self.tail.as_ref().map(|(t, w)| (t, *w))
    }

    pub fn trace(&self) -> f64 {
        self.leading.trace()
            + self
                .tail
                .as_ref()
                .map_or(0.0, |(t, w)| w.exp() * t.trace())
    }

    pub fn is_zero(&self) -> bool {
        self.leading.is_zero() && self.tail.is_none()
    }

    /// Collapses to a single `f64` operator; weights below the `f64` range vanish.
    pub fn materialize(&self) -> PositiveOperator {
        match &self.tail {
            None => self.leading.clone(),
            Some((t, w)) => {
                let eps = w.exp();
                if eps == 0.0 {
                    self.leading.clone()
                } else {
                    PositiveOperator::from_psd_matrix(&(self.leading.matrix() + t.matrix().scale(eps)))
                        .expect("sum of PSD operators is PSD")
                }
            }
        }
    }

    /// Applies a linear positive map of norm at most one (a quantum operation)
    /// to both scales.
    pub fn map(&self, f: impl Fn(&PositiveOperator) -> Result<PositiveOperator>) -> Result<Self> {
        self.map_with_gain(f, 1.0)
    }

    fn map_with_gain(&self, f: impl Fn(&PositiveOperator) -> Result<PositiveOperator>, gain: f64) -> Result<Self> {
        let leading = f(&self.leading)?;
        let out = match &self.tail {
            None => leading.into(),
            Some((t, w)) => Self::new(leading, f(t)?, *w)?,
        };
        Ok(out.with_reference(self.reference * gain))
    }

    /// `M X M*`.
    pub fn conjugate_by(&self, m: &CMatrix) -> Result<Self> {
        let gain = crate::operator::operator_norm(m).powi(2);
        self.map_with_gain(|x| x.conjugate_by(m), gain)
    }

    pub fn compress(&self, p: &Projector) -> Result<Self> {
        self.conjugate_by(p.matrix())
    }

    pub fn scale(&self, factor: f64) -> Result<Self> {
        let mut out = self.map(|x| x.scale(factor))?;
        out.reference = self.reference * factor;
        Ok(out)
    }

    /// Sum; the smaller of two tails is folded into the larger one.
    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        let leading = self.leading.add(&other.leading)?;
        let tail = match (&self.tail, &other.tail) {
            (None, None) => None,
            (Some(t), None) | (None, Some(t)) => Some(t.clone()),
            (Some((t1, w1)), Some((t2, w2))) => {
                let (big, wb, small, ws) = if w1 >= w2 { (t1, *w1, t2, *w2) } else { (t2, *w2, t1, *w1) };
                let merged = PositiveOperator::from_psd_matrix(
                    &(big.matrix() + small.matrix().scale((ws - wb).exp())),
                )?;
                Some((merged, wb))
            }
        };
        let out = match tail {
            None => leading.into(),
            Some((t, w)) => Self::new(leading, t, w)?,
        };
        Ok(out.with_reference(self.reference + other.reference))
    }

    /// Spectral decomposition with eigenvalues in log form.
    ///
    /// `rank_tol` is the absolute kernel threshold when a single eigensolve
    /// resolves both scales (default `1e-9 · max(λ_max, 1)`). Otherwise the
    /// leading block keeps every eigenvalue above roundoff of the reference
    /// magnitude, and eigenvalues at the tail scale use the default relative
    /// rule against the tail block.
    pub fn log_spectrum(&self, rank_tol: Option<f64>) -> LogSpectrum {
        let Some((tail, log_weight)) = &self.tail else {
            return LogSpectrum::direct(self.leading.spectrum(), rank_tol);
        };
        let lead = self.leading.spectrum();
        let tol_lead = rank_tol.unwrap_or_else(|| self.noise());
        let k = lead.values.iter().take_while(|&&v| v > tol_lead).count();
        let ln_tail_max = tail.max_eigenvalue().ln();
        if k == 0 {
            // the leading part is numerically zero: σ = e^w T
            let mut s = LogSpectrum::direct(tail.spectrum(), None);
            for v in s.ln_values.iter_mut() {
                *v += log_weight;
            }
            s.two_scale = true;
            return s;
        }
        let alpha_min = lead.values[k - 1];
        if log_weight + ln_tail_max > (SEPARATION * alpha_min).ln() {
            return LogSpectrum::direct(self.materialize().spectrum(), rank_tol);
        }
        riccati_split(lead, k, tail, *log_weight)
    }
}

/// Eigen-decomposition with `ln λ` in descending order; `-inf` marks the kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct LogSpectrum {
    pub ln_values: Vec<f64>,
    pub vectors: CMatrix,
    /// Whether the small scale was resolved separately.
    pub two_scale: bool,
}

impl LogSpectrum {
    fn direct(spec: &Spectrum, rank_tol: Option<f64>) -> Self {
        let tol = rank_tol.unwrap_or_else(|| default_rank_tol(spec));
        Self {
            ln_values: spec
                .values
                .iter()
                .map(|&v| if v > tol { v.ln() } else { f64::NEG_INFINITY })
                .collect(),
            vectors: spec.vectors.clone(),
            two_scale: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.ln_values.len()
    }

    pub fn rank(&self) -> usize {
        self.ln_values.iter().filter(|v| v.is_finite()).count()
    }

    /// Projector onto eigenvectors with `ln λ > ln_threshold`.
    pub fn projector_above(&self, ln_threshold: f64) -> Projector {
        let idx: Vec<usize> = (0..self.dim())
            .filter(|&i| self.ln_values[i] > ln_threshold)
            .collect();
        Projector::from_orthonormal_columns(&self.vectors.select_columns(idx.iter()))
    }

    /// Projector onto the support.
    pub fn support(&self) -> Projector {
        self.projector_above(f64::NEG_INFINITY)
    }

    /// `⟨w_j|X|w_j⟩` for every eigenvector.
    pub fn diagonal_weights(&self, x: &CMatrix) -> Vec<f64> {
        (0..self.dim())
            .map(|j| {
                let w = self.vectors.column(j);
                (w.adjoint() * x * w)[(0, 0)].re
            })
            .collect()
    }
}

fn inverse_sqrt(m: &CMatrix) -> CMatrix {
    spectral_decompose(&HermitianMatrix::symmetrized(m)).apply(|x| 1.0 / x.sqrt())
}

/// Block-diagonalizes `Λ ⊕ 0 + ε U*TU` where `Λ` holds the top `k` leading
/// eigenvalues, so that the bottom block can be rescaled by `1/ε` exactly.
fn riccati_split(lead: &Spectrum, k: usize, tail: &PositiveOperator, log_weight: f64) -> LogSpectrum {
    let d = lead.dim();
    let r = d - k;
    let eps = log_weight.exp();
    let u = &lead.vectors;
    let t = conjugate(&u.adjoint(), tail.matrix());

    let lambda = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        k,
        lead.values[..k].iter().map(|&v| c(v)),
    ));
    let b11 = t.view((0, 0), (k, k)).into_owned();
    let cross = t.view((0, k), (k, r)).into_owned();
    let lower = t.view((k, k), (r, r)).into_owned();

    let h = hermitian_part(&(&lambda + b11.scale(eps)));
    let h_inv = h.clone().try_inverse().expect("leading block is positive definite");

    // X = H⁻¹ (C + εXD − ε² X C* X)
    let mut x = &h_inv * &cross;
    for _ in 0..RICCATI_MAX_ITER {
        let next = &h_inv
            * (&cross + (&x * &lower).scale(eps) - (&x * cross.adjoint() * &x).scale(eps * eps));
        let change = (&next - &x).norm();
        let size = next.norm();
        x = next;
        if change <= 1e-16 * size.max(f64::MIN_POSITIVE) {
            break;
        }
    }

    let eps_x = x.scale(eps);
    let n_inv_half = inverse_sqrt(&(CMatrix::identity(r, r) + eps_x.adjoint() * &eps_x));
    let m_inv_half = inverse_sqrt(&(CMatrix::identity(k, k) + &eps_x * eps_x.adjoint()));

    // bottom block divided by ε, assembled without cancellation
    let y = &lower
        - (cross.adjoint() * &x + x.adjoint() * &cross - x.adjoint() * &h * &x).scale(eps);
    let w = HermitianMatrix::symmetrized(&(&n_inv_half * y * &n_inv_half));
    let w_spec = spectral_decompose(&w);
    let w_tol = DEFAULT_RANK_TOL * w_spec.values.first().copied().unwrap_or(0.0).max(1.0);

    let mut z_top = CMatrix::zeros(d, k);
    z_top.view_mut((0, 0), (k, k)).copy_from(&CMatrix::identity(k, k));
    z_top.view_mut((k, 0), (r, k)).copy_from(&eps_x.adjoint());
    let z_top = z_top * &m_inv_half;
    let mut z_bot = CMatrix::zeros(d, r);
    z_bot.view_mut((0, 0), (k, r)).copy_from(&(-&eps_x));
    z_bot.view_mut((k, 0), (r, r)).copy_from(&CMatrix::identity(r, r));
    let z_bot = z_bot * &n_inv_half;

    let mut sigma_u = t.scale(eps);
    for i in 0..k {
        sigma_u[(i, i)] += c(lead.values[i]);
    }
    let top = HermitianMatrix::symmetrized(&(z_top.adjoint() * &sigma_u * &z_top));
    let top_spec = spectral_decompose(&top);

    let mut entries: Vec<(f64, CMatrix)> = Vec::with_capacity(d);
    let top_vectors = u * &z_top * &top_spec.vectors;
    for i in 0..k {
        let v = top_spec.values[i];
        let ln = if v > 0.0 { v.ln() } else { f64::NEG_INFINITY };
        entries.push((ln, top_vectors.columns(i, 1).into_owned()));
    }
    let bottom_vectors = u * &z_bot * &w_spec.vectors;
    for j in 0..r {
        let s = w_spec.values[j];
        let ln = if s > w_tol {
            log_weight + s.ln()
        } else {
            f64::NEG_INFINITY
        };
        entries.push((ln, bottom_vectors.columns(j, 1).into_owned()));
    }
    entries.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut vectors = DMatrix::zeros(d, d);
    for (i, (_, v)) in entries.iter().enumerate() {
        vectors.set_column(i, &v.column(0));
    }
    LogSpectrum {
        ln_values: entries.into_iter().map(|(l, _)| l).collect(),
        vectors,
        two_scale: true,
    }
}
