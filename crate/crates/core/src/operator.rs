//! Dense Hermitian and positive-semidefinite matrix machinery.
//!
//! Every operator is a small dense complex matrix. Positive operators cache
//! their spectral decomposition on construction, since nearly every
//! downstream quantity (supports, logarithms, divergences) is spectral.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::extended::ExtendedNonNegative;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Relative hermiticity tolerance.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Relative PSD tolerance: eigenvalues in `[-eps_psd, 0)` are clamped to zero.
pub const PSD_TOL: f64 = 1e-10;
/// Relative rank tolerance used when none is given.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;
/// Eigenvalues closer than this (relative to the spectral scale) are treated
/// as one degenerate eigenspace when fixing eigenvector bases.
const DEGENERACY_TOL: f64 = 1e-12;

pub(crate) fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Largest absolute entry of a matrix.
pub fn max_abs_entry(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Operator (spectral) norm of an arbitrary complex matrix.
pub fn operator_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().iter().copied().fold(0.0, f64::max)
}

/// Trace norm of an arbitrary complex matrix.
pub fn trace_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().iter().sum()
}

/// `M X M*`.
pub fn conjugate(m: &CMatrix, x: &CMatrix) -> CMatrix {
    m * x * m.adjoint()
}

/// `(A + A*) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Kronecker product of two arbitrary matrices.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Partial trace over the second tensor factor of an operator on `B ⊗ E`.
///
/// Row/column index `(b, e)` is stored at `b * dim_e + e`.
pub fn partial_trace_matrix(x: &CMatrix, dim_b: usize, dim_e: usize) -> Result<CMatrix> {
    let d = dim_b * dim_e;
    if x.nrows() != d || x.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: x.nrows(),
        });
    }
    Ok(CMatrix::from_fn(dim_b, dim_b, |i, j| {
        (0..dim_e).map(|e| x[(i * dim_e + e, j * dim_e + e)]).sum()
    }))
}

/// Self-adjoint matrix with validated hermiticity.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    m: CMatrix,
}

impl HermitianMatrix {
    /// Validates `m = m*` within `1e-12 * max(1, max |entry|)`.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        let tolerance = HERMITICITY_TOL * max_abs_entry(&m).max(1.0);
        let deviation = max_abs_entry(&(&m - m.adjoint()));
        if deviation > tolerance {
            return Err(Error::NonHermitianInput {
                deviation,
                tolerance,
            });
        }
        Ok(Self {
            m: hermitian_part(&m),
        })
    }

    /// Takes the Hermitian part of `m` without validation. For results of
    /// algebra that is Hermitian in exact arithmetic.
    pub fn symmetrized(m: &CMatrix) -> Self {
        Self {
            m: hermitian_part(m),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let v = DVector::from_iterator(diag.len(), diag.iter().map(|&x| c(x)));
        Self {
            m: CMatrix::from_diagonal(&v),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            m: CMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            m: CMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    pub fn spectral(&self) -> Spectrum {
        spectral_decompose(self)
    }
}

/// Eigenvalues in descending order with matching orthonormal eigenvector columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, i: usize) -> CMatrix {
        self.vectors.columns(i, 1).into_owned()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// `Σ f(λ_i) |v_i⟩⟨v_i|`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let d = self.dim();
        let mut out = CMatrix::zeros(d, d);
        for (i, &lambda) in self.values.iter().enumerate() {
            let w = f(lambda);
            if w == 0.0 {
                continue;
            }
            let v = self.vectors.column(i);
            out += (v * v.adjoint()).scale(w);
        }
        out
    }

    /// Projector onto eigenvectors whose eigenvalue satisfies `keep`.
    pub fn projector_where(&self, keep: impl Fn(f64) -> bool) -> CMatrix {
        self.apply(|x| if keep(x) { 1.0 } else { 0.0 })
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.apply(|x| x)
    }
}

/// Spectral decomposition with eigenvalues sorted in descending order.
///
/// Within a numerically degenerate eigenspace the basis is replaced by the
/// Gram–Schmidt orthonormalization (in index order) of the projected canonical
/// basis vectors, so repeated runs agree up to the solver's roundoff.
pub fn spectral_decompose(a: &HermitianMatrix) -> Spectrum {
    let d = a.dim();
    if d == 0 {
        return Spectrum {
            values: vec![],
            vectors: CMatrix::zeros(0, 0),
        };
    }
    let eig = a.matrix().clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]).then(i.cmp(&j)));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(d, d);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }

    let scale = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && (values[start] - values[end]).abs() <= DEGENERACY_TOL * scale {
            end += 1;
        }
        if end - start > 1 {
            canonicalize_block(&mut vectors, start, end);
        } else {
            fix_phase(&mut vectors, start);
        }
        start = end;
    }
    Spectrum { values, vectors }
}

/// Rotates a single eigenvector so its largest-magnitude component is real positive.
fn fix_phase(vectors: &mut CMatrix, col: usize) {
    let v = vectors.column(col);
    let (mut best, mut best_abs) = (0, -1.0);
    for (i, z) in v.iter().enumerate() {
        // strict > keeps the first index among ties
        if z.norm() > best_abs + 1e-14 {
            best = i;
            best_abs = z.norm();
        }
    }
    let z = v[best];
    if z.norm() > 0.0 {
        let phase = z.conj() / z.norm();
        let mut col_mut = vectors.column_mut(col);
        col_mut *= phase;
    }
}

fn canonicalize_block(vectors: &mut CMatrix, start: usize, end: usize) {
    let d = vectors.nrows();
    let g = end - start;
    let block = vectors.columns(start, g).into_owned();
    let proj = &block * block.adjoint();
    let mut basis: Vec<DVector<C64>> = Vec::with_capacity(g);
    for threshold in [1e-3, 1e-8] {
        basis.clear();
        for k in 0..d {
            if basis.len() == g {
                break;
            }
            let mut w: DVector<C64> = proj.column(k).into_owned();
            for u in &basis {
                let overlap = u.dotc(&w);
                w -= u * overlap;
            }
            let norm = w.norm();
            if norm > threshold {
                basis.push(w / c(norm));
            }
        }
        if basis.len() == g {
            break;
        }
    }
    if basis.len() != g {
        // numerically ill-posed block; keep the solver's vectors
        return;
    }
    for (k, u) in basis.iter().enumerate() {
        vectors.set_column(start + k, u);
    }
}

/// `1e-9 * max(λ_max, 1)`.
pub fn default_rank_tol(spectrum: &Spectrum) -> f64 {
    DEFAULT_RANK_TOL * spectrum.values.first().copied().unwrap_or(0.0).max(1.0)
}

/// Positive semidefinite operator with cached spectrum and trace.
#[derive(Debug, Clone, PartialEq)]
pub struct PositiveOperator {
    matrix: HermitianMatrix,
    spectrum: Spectrum,
    trace: f64,
}

impl PositiveOperator {
    /// Validates positivity; eigenvalues in `[-eps_psd, 0)` are clamped to zero.
    pub fn new(matrix: HermitianMatrix) -> Result<Self> {
        let mut spectrum = spectral_decompose(&matrix);
        let tolerance = PSD_TOL * spectrum.max_abs().max(1.0);
        if let Some(&min) = spectrum.values.last() {
            if min < -tolerance {
                return Err(Error::NotPositive {
                    eigenvalue: min,
                    tolerance,
                });
            }
        }
        // remove only the negative part so the rest keeps full precision
        let mut negative = CMatrix::zeros(matrix.dim(), matrix.dim());
        let mut clamped = false;
        for (i, v) in spectrum.values.iter_mut().enumerate() {
            if *v < 0.0 {
                let w = spectrum.vectors.column(i);
                negative += (w * w.adjoint()).scale(*v);
                *v = 0.0;
                clamped = true;
            }
        }
        let matrix = if clamped {
            HermitianMatrix::symmetrized(&(matrix.matrix() - negative))
        } else {
            matrix
        };
        let trace = spectrum.values.iter().sum();
        Ok(Self {
            matrix,
            spectrum,
            trace,
        })
    }

    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        Self::new(HermitianMatrix::new(m)?)
    }

    /// For matrices that are PSD in exact arithmetic (images under CP maps,
    /// compressions, mixtures): symmetrizes before validation.
    pub fn from_psd_matrix(m: &CMatrix) -> Result<Self> {
        Self::new(HermitianMatrix::symmetrized(m))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(HermitianMatrix::from_real_diagonal(diag))
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(HermitianMatrix::zeros(dim)).expect("zero is PSD")
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(HermitianMatrix::identity(dim)).expect("identity is PSD")
    }

    /// `I / dim`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self::from_real_diagonal(&vec![1.0 / dim as f64; dim]).expect("diagonal is PSD")
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) vector.
    pub fn pure(psi: &[C64]) -> Self {
        let v = CMatrix::from_column_slice(psi.len(), 1, psi);
        Self::from_psd_matrix(&(&v * v.adjoint())).expect("rank-one is PSD")
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn matrix(&self) -> &CMatrix {
        self.matrix.matrix()
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn trace(&self) -> f64 {
        self.trace
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.spectrum.values.first().copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.max_eigenvalue() <= 0.0
    }

    pub fn default_rank_tol(&self) -> f64 {
        default_rank_tol(&self.spectrum)
    }

    pub fn scale(&self, factor: f64) -> Result<Self> {
        if factor < 0.0 {
            return Err(Error::NegativeInput(factor));
        }
        Self::from_psd_matrix(&self.matrix().scale(factor))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Self::from_psd_matrix(&(self.matrix() + other.matrix()))
    }

    /// `M ρ M*` for any matrix `M` with `dim(ρ)` columns.
    pub fn conjugate_by(&self, m: &CMatrix) -> Result<Self> {
        check_dim(self.dim(), m.ncols())?;
        Self::from_psd_matrix(&conjugate(m, self.matrix()))
    }

    pub fn compress(&self, p: &Projector) -> Result<Self> {
        self.conjugate_by(p.matrix())
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        Err(Error::DimensionMismatch { expected, found })
    } else {
        Ok(())
    }
}

/// Orthogonal projector.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    matrix: HermitianMatrix,
    rank: usize,
}

impl Projector {
    /// Validates `|P² - P| ≤ 1e-10` and near-integer trace.
    pub fn new(m: CMatrix) -> Result<Self> {
        let matrix = HermitianMatrix::new(m)?;
        let p = matrix.matrix();
        let idempotence = operator_norm(&(p * p - p));
        if idempotence > 1e-10 {
            return Err(Error::NotAProjector {
                reason: format!("|P^2 - P| = {idempotence:e}"),
            });
        }
        let tr = matrix.trace();
        let rank = tr.round();
        if (tr - rank).abs() > 1e-8 || rank < 0.0 {
            return Err(Error::NotAProjector {
                reason: format!("trace {tr} is not an integer"),
            });
        }
        Ok(Self {
            matrix,
            rank: rank as usize,
        })
    }

    /// Projector onto the span of the given orthonormal columns.
    pub fn from_orthonormal_columns(cols: &CMatrix) -> Self {
        let rank = cols.ncols();
        Self {
            matrix: HermitianMatrix::symmetrized(&(cols * cols.adjoint())),
            rank,
        }
    }

    /// Projector onto the eigenvectors of `spectrum` selected by `keep`.
    pub fn from_spectrum(spectrum: &Spectrum, keep: impl Fn(usize, f64) -> bool) -> Self {
        let idx: Vec<usize> = (0..spectrum.dim())
            .filter(|&i| keep(i, spectrum.values[i]))
            .collect();
        let cols = spectrum.vectors.select_columns(idx.iter());
        Self::from_orthonormal_columns(&cols)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: HermitianMatrix::identity(dim),
            rank: dim,
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            matrix: HermitianMatrix::zeros(dim),
            rank: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn matrix(&self) -> &CMatrix {
        self.matrix.matrix()
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.matrix
    }

    /// `I - P`.
    pub fn complement(&self) -> Self {
        let d = self.dim();
        Self {
            matrix: HermitianMatrix::symmetrized(&(CMatrix::identity(d, d) - self.matrix())),
            rank: d - self.rank,
        }
    }

    /// `P ⊗ I_E`.
    pub fn tensor_identity(&self, dim_e: usize) -> Self {
        Self {
            matrix: HermitianMatrix::symmetrized(&kron(
                self.matrix(),
                &CMatrix::identity(dim_e, dim_e),
            )),
            rank: self.rank * dim_e,
        }
    }
}

/// Matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct IsometryMatrix {
    m: CMatrix,
}

impl IsometryMatrix {
    /// Validates `V*V = I` within `1e-10` in operator norm.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() < m.ncols() {
            return Err(Error::NotAnIsometry {
                deviation: f64::INFINITY,
            });
        }
        let k = m.ncols();
        let deviation = operator_norm(&(m.adjoint() * &m - CMatrix::identity(k, k)));
        if deviation > 1e-10 {
            return Err(Error::NotAnIsometry { deviation });
        }
        Ok(Self { m })
    }

    pub fn rows(&self) -> usize {
        self.m.nrows()
    }

    pub fn cols(&self) -> usize {
        self.m.ncols()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }
}

/// Projector onto eigenvectors of `rho` with eigenvalue above `rank_tol`
/// (default `1e-9 * max(λ_max, 1)`).
pub fn support_projector(rho: &PositiveOperator, rank_tol: Option<f64>) -> Projector {
    let tol = rank_tol.unwrap_or_else(|| rho.default_rank_tol());
    Projector::from_spectrum(rho.spectrum(), |_, v| v > tol)
}

/// Kronecker product of positive operators.
pub fn tensor(a: &PositiveOperator, b: &PositiveOperator) -> PositiveOperator {
    PositiveOperator::from_psd_matrix(&kron(a.matrix(), b.matrix()))
        .expect("tensor product of PSD operators is PSD")
}

/// Partial trace over `E` of a positive operator on `B ⊗ E`.
pub fn partial_trace_e(x: &PositiveOperator, dim_b: usize, dim_e: usize) -> Result<PositiveOperator> {
    PositiveOperator::from_psd_matrix(&partial_trace_matrix(x.matrix(), dim_b, dim_e)?)
}

/// `Tr Hρ` for positive `H`, evaluated spectrally as `Σ h_i ⟨u_i|ρ|u_i⟩`.
///
/// The unbounded-operator branch that yields `+inf` when `supp ρ` leaves the
/// closure of the domain of `H` cannot occur for matrices, so the result is
/// always finite here.
pub fn trace_h_rho(h: &HermitianMatrix, rho: &PositiveOperator) -> Result<ExtendedNonNegative> {
    check_dim(h.dim(), rho.dim())?;
    let spec = spectral_decompose(h);
    let tolerance = PSD_TOL * spec.max_abs().max(1.0);
    if let Some(&min) = spec.values.last() {
        if min < -tolerance {
            return Err(Error::NonPositiveH { eigenvalue: min });
        }
    }
    let mut total = 0.0;
    for (i, &hv) in spec.values.iter().enumerate() {
        let u = spec.vectors.column(i);
        let weight = (u.adjoint() * rho.matrix() * u)[(0, 0)].re;
        total += hv.max(0.0) * weight;
    }
    ExtendedNonNegative::finite(total)
}
