//! Quantum operations in Kraus form, their Stinespring dilations and duals,
//! the extension of an operation to a channel with one extra output
//! dimension, and pinching channels.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::{
    c, check_dim, operator_norm, spectral_decompose, CMatrix, HermitianMatrix, IsometryMatrix,
    PositiveOperator, Projector, C64, PSD_TOL,
};
use crate::random::{haar_isometry, rng};
use crate::scaled::TwoScaleOperator;

/// `‖I − ΣK*K‖` at or below this makes an operation a channel.
pub const CHANNEL_TOL: f64 = 1e-9;

/// A completely positive map `ρ ↦ Σ K_i ρ K_i*` with `dim_out × dim_in` Kraus operators.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausOperation {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<CMatrix>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Validation {
    Channel,
    Operation,
    /// `defect` is the most negative eigenvalue of `I − ΣK*K`.
    Invalid { defect: f64 },
}

impl KrausOperation {
    /// Checks shapes only; use [`KrausOperation::validate`] for trace conditions.
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty Kraus family".into()))?;
        let (dim_out, dim_in) = first.shape();
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::InvalidArgument("zero-dimensional Kraus operator".into()));
        }
        for k in &kraus {
            check_dim(dim_out, k.nrows())?;
            check_dim(dim_in, k.ncols())?;
        }
        Ok(Self {
            dim_in,
            dim_out,
            kraus,
        })
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    /// `Σ K_i* K_i`.
    pub fn kraus_sum(&self) -> CMatrix {
        self.kraus
            .iter()
            .fold(CMatrix::zeros(self.dim_in, self.dim_in), |acc, k| acc + k.adjoint() * k)
    }

    /// Classifies by the spectrum of `I − ΣK*K`.
    pub fn validate(&self) -> Validation {
        let defect = CMatrix::identity(self.dim_in, self.dim_in) - self.kraus_sum();
        let spec = spectral_decompose(&HermitianMatrix::symmetrized(&defect));
        if spec.max_abs() <= CHANNEL_TOL {
            return Validation::Channel;
        }
        let min = spec.values.last().copied().unwrap_or(0.0);
        if min >= -PSD_TOL * spec.max_abs().max(1.0) {
            Validation::Operation
        } else {
            Validation::Invalid { defect: min }
        }
    }

    pub fn is_channel(&self) -> bool {
        self.validate() == Validation::Channel
    }

    fn require_valid(&self) -> Result<()> {
        match self.validate() {
            Validation::Invalid { defect } => Err(Error::InvalidOperation { defect }),
            _ => Ok(()),
        }
    }

    /// `Σ K_i X K_i*` for any `dim_in × dim_in` matrix.
    pub fn apply_matrix(&self, x: &CMatrix) -> Result<CMatrix> {
        check_dim(self.dim_in, x.nrows())?;
        Ok(self
            .kraus
            .iter()
            .fold(CMatrix::zeros(self.dim_out, self.dim_out), |acc, k| acc + k * x * k.adjoint()))
    }

    pub fn apply(&self, rho: &PositiveOperator) -> Result<PositiveOperator> {
        PositiveOperator::from_psd_matrix(&self.apply_matrix(rho.matrix())?)
    }

    pub fn apply_scaled(&self, rho: &TwoScaleOperator) -> Result<TwoScaleOperator> {
        rho.map(|x| self.apply(x))
    }

    /// Stinespring isometry `V = Σ_i K_i ⊗ |f_i⟩`, with output index
    /// `(b, i)` stored at `b · dim_env + i`.
    pub fn stinespring(&self) -> Result<StinespringDilation> {
        self.require_valid()?;
        let dim_env = self.kraus.len();
        let mut v = CMatrix::zeros(self.dim_out * dim_env, self.dim_in);
        for (i, k) in self.kraus.iter().enumerate() {
            for b in 0..self.dim_out {
                for a in 0..self.dim_in {
                    v[(b * dim_env + i, a)] = k[(b, a)];
                }
            }
        }
        Ok(StinespringDilation {
            v,
            dim_out: self.dim_out,
            dim_env,
        })
    }

    /// Heisenberg-picture map `B ↦ Σ K_i* B K_i`.
    pub fn dual(&self, b: &HermitianMatrix) -> Result<HermitianMatrix> {
        check_dim(self.dim_out, b.dim())?;
        let m = self
            .kraus
            .iter()
            .fold(CMatrix::zeros(self.dim_in, self.dim_in), |acc, k| acc + k.adjoint() * b.matrix() * k);
        Ok(HermitianMatrix::symmetrized(&m))
    }

    /// The channel `ρ ↦ Φ(ρ) ⊕ Tr[(I − Φ*(I))ρ]` on `dim_out + 1` outputs; the
    /// appended coordinate is last.
    pub fn extend_to_channel(&self) -> Result<KrausOperation> {
        self.require_valid()?;
        let (d_in, d_out) = (self.dim_in, self.dim_out);
        let mut kraus: Vec<CMatrix> = self
            .kraus
            .iter()
            .map(|k| {
                let mut padded = CMatrix::zeros(d_out + 1, d_in);
                padded.view_mut((0, 0), (d_out, d_in)).copy_from(k);
                padded
            })
            .collect();
        let defect = CMatrix::identity(d_in, d_in) - self.kraus_sum();
        let spec = spectral_decompose(&HermitianMatrix::symmetrized(&defect));
        for (i, &g) in spec.values.iter().enumerate() {
            if g <= 0.0 {
                continue;
            }
            let mut k = CMatrix::zeros(d_out + 1, d_in);
            let u = spec.vectors.column(i);
            for a in 0..d_in {
                k[(d_out, a)] = u[a].conj() * g.sqrt();
            }
            kraus.push(k);
        }
        KrausOperation::new(kraus)
    }

    /// Conjugates the channel by isometries/unitaries on both sides: `ρ ↦ W Φ(U ρ U*) W*`.
    pub fn compose_unitaries(&self, before: &CMatrix, after: &CMatrix) -> Result<KrausOperation> {
        check_dim(self.dim_in, before.nrows())?;
        check_dim(self.dim_out, after.ncols())?;
        KrausOperation::new(self.kraus.iter().map(|k| after * k * before).collect())
    }

    /// `√t · K_i`: scales the map by `t ∈ [0, 1]`.
    pub fn scaled(&self, t: f64) -> Result<KrausOperation> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidArgument(format!("scale {t} outside [0, 1]")));
        }
        KrausOperation::new(self.kraus.iter().map(|k| k.scale(t.sqrt())).collect())
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(vec![CMatrix::identity(dim, dim)]).expect("identity Kraus family")
    }

    /// Dephasing in the computational basis: `K_i = |i⟩⟨i|`.
    pub fn dephasing(dim: usize) -> Self {
        Self::new(
            (0..dim)
                .map(|i| {
                    let mut k = CMatrix::zeros(dim, dim);
                    k[(i, i)] = c(1.0);
                    k
                })
                .collect(),
        )
        .expect("dephasing Kraus family")
    }

    /// Completely depolarizing channel `ρ ↦ Tr ρ · I/d`, with the `d²`
    /// Weyl–Heisenberg Kraus operators `X^a Z^b / d` (the Pauli set for `d = 2`).
    pub fn depolarizing(dim: usize) -> Self {
        let d = dim as f64;
        let omega = |k: usize| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / d);
        let mut kraus = Vec::with_capacity(dim * dim);
        for a in 0..dim {
            for b in 0..dim {
                let mut k = CMatrix::zeros(dim, dim);
                for j in 0..dim {
                    k[((j + a) % dim, j)] = omega((b * j) % dim) / c(d);
                }
                kraus.push(k);
            }
        }
        Self::new(kraus).expect("depolarizing Kraus family")
    }

    /// Qubit amplitude damping with decay probability `gamma`.
    pub fn amplitude_damping(gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidArgument(format!("damping {gamma} outside [0, 1]")));
        }
        let k0 = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c((1.0 - gamma).sqrt())]);
        let k1 = CMatrix::from_row_slice(2, 2, &[c(0.0), c(gamma.sqrt()), c(0.0), c(0.0)]);
        Self::new(vec![k0, k1])
    }
}

/// `Φ(ρ) = Tr_E VρV*`.
#[derive(Debug, Clone, PartialEq)]
pub struct StinespringDilation {
    v: CMatrix,
    dim_out: usize,
    dim_env: usize,
}

impl StinespringDilation {
    pub fn v(&self) -> &CMatrix {
        &self.v
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn dim_env(&self) -> usize {
        self.dim_env
    }

    /// `V` as a validated isometry; fails for operations that are not channels.
    pub fn isometry(&self) -> Result<IsometryMatrix> {
        IsometryMatrix::new(self.v.clone())
    }

    pub fn dilate(&self, rho: &PositiveOperator) -> Result<PositiveOperator> {
        rho.conjugate_by(&self.v)
    }

    pub fn dilate_scaled(&self, rho: &TwoScaleOperator) -> Result<TwoScaleOperator> {
        rho.conjugate_by(&self.v)
    }
}

/// `ρ ↦ PρP + (I−P)ρ(I−P)`.
pub fn pinching(p: &Projector) -> KrausOperation {
    KrausOperation::new(vec![p.matrix().clone(), p.complement().matrix().clone()])
        .expect("pinching Kraus pair")
}

/// `U = 2P − I`.
pub fn unitary_from_projector(p: &Projector) -> HermitianMatrix {
    let d = p.dim();
    HermitianMatrix::symmetrized(&(p.matrix().scale(2.0) - CMatrix::identity(d, d)))
}

/// Channel read off a Haar-random isometry `dim_in → dim_out · kraus_rank`:
/// `K_i[b, a] = V[b · kraus_rank + i, a]`.
pub fn random_channel(dim_in: usize, dim_out: usize, kraus_rank: usize, seed: u64) -> Result<KrausOperation> {
    if kraus_rank == 0 || dim_in == 0 || dim_out == 0 {
        return Err(Error::InvalidArgument("dimensions and Kraus rank must be positive".into()));
    }
    if dim_out * kraus_rank < dim_in {
        return Err(Error::InvalidArgument(format!(
            "no isometry {dim_in} -> {dim_out}x{kraus_rank}"
        )));
    }
    let v = haar_isometry(&mut rng(seed), dim_out * kraus_rank, dim_in);
    let kraus = (0..kraus_rank)
        .map(|i| CMatrix::from_fn(dim_out, dim_in, |b, a| v[(b * kraus_rank + i, a)]))
        .collect();
    KrausOperation::new(kraus)
}

/// A random channel scaled by `√t`, `t` uniform in `[0.3, 1]`. Returns the
/// operation and `t` (so `I − Φ*(I) = (1 − t) I`).
pub fn random_operation(dim_in: usize, dim_out: usize, kraus_rank: usize, seed: u64) -> Result<(KrausOperation, f64)> {
    use rand::Rng;
    let channel = random_channel(dim_in, dim_out, kraus_rank, seed)?;
    let t: f64 = rng(seed ^ 0x005E_ED0F_7AC7).random_range(0.3..=1.0);
    Ok((channel.scaled(t)?, t))
}

/// `max |V*V − I|` of the Kraus family, i.e. the channel defect norm.
pub fn channel_defect(op: &KrausOperation) -> f64 {
    operator_norm(&(op.kraus_sum() - CMatrix::identity(op.dim_in(), op.dim_in())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::partial_trace_matrix;

    fn state() -> PositiveOperator {
        PositiveOperator::from_matrix(CMatrix::from_row_slice(
            2,
            2,
            &[c(0.7), C64::new(0.2, -0.1), C64::new(0.2, 0.1), c(0.3)],
        ))
        .unwrap()
    }

    #[test]
    fn validation_examples() {
        assert_eq!(KrausOperation::identity(3).validate(), Validation::Channel);
        let half = KrausOperation::new(vec![CMatrix::identity(2, 2).scale(0.5f64.sqrt())]).unwrap();
        assert_eq!(half.validate(), Validation::Operation);
        let over = KrausOperation::new(vec![CMatrix::identity(2, 2).scale(1.1)]).unwrap();
        match over.validate() {
            Validation::Invalid { defect } => assert!((defect + 0.21).abs() < 1e-12),
            v => panic!("expected invalid, got {v:?}"),
        }
        assert!(matches!(over.stinespring(), Err(Error::InvalidOperation { .. })));
    }

    #[test]
    fn apply_examples() {
        let rho = state();
        assert_eq!(KrausOperation::identity(2).apply(&rho).unwrap().matrix(), rho.matrix());
        let dep = KrausOperation::depolarizing(2).apply(&rho).unwrap();
        assert!((dep.matrix() - PositiveOperator::maximally_mixed(2).matrix()).norm() < 1e-15);
        let deph = KrausOperation::dephasing(2).apply(&rho).unwrap();
        assert!((deph.matrix() - PositiveOperator::from_real_diagonal(&[0.7, 0.3]).unwrap().matrix()).norm() < 1e-15);
        assert!(KrausOperation::dephasing(3).apply(&rho).is_err());
    }

    #[test]
    fn depolarizing_any_dimension() {
        for d in 2..5 {
            let op = KrausOperation::depolarizing(d);
            assert!(op.is_channel());
            let out = op.apply(&crate::random::random_state(&mut rng(d as u64), d, d)).unwrap();
            assert!((out.matrix() - PositiveOperator::maximally_mixed(d).matrix()).norm() < 1e-14);
        }
    }

    #[test]
    fn stinespring_examples() {
        let id = KrausOperation::identity(2).stinespring().unwrap();
        assert_eq!(id.dim_env(), 1);
        assert_eq!(id.v(), &CMatrix::identity(2, 2));

        let deph = KrausOperation::dephasing(2).stinespring().unwrap();
        assert_eq!(deph.dim_env(), 2);
        // e1 -> e1 ⊗ f1 (index 0), e2 -> e2 ⊗ f2 (index 3)
        assert_eq!(deph.v()[(0, 0)], c(1.0));
        assert_eq!(deph.v()[(3, 1)], c(1.0));
        let x = deph.dilate(&state()).unwrap();
        let reduced = partial_trace_matrix(x.matrix(), 2, 2).unwrap();
        assert!((reduced - KrausOperation::dephasing(2).apply(&state()).unwrap().matrix()).norm() < 1e-15);
        assert!(deph.isometry().is_ok());
    }

    #[test]
    fn dual_examples() {
        let ch = random_channel(2, 3, 2, 11).unwrap();
        let unital = ch.dual(&HermitianMatrix::identity(3)).unwrap();
        assert!((unital.matrix() - CMatrix::identity(2, 2)).norm() < 1e-9);
        let half = KrausOperation::new(vec![CMatrix::identity(2, 2).scale(0.5f64.sqrt())]).unwrap();
        let d = half.dual(&HermitianMatrix::identity(2)).unwrap();
        assert!((d.matrix() - CMatrix::identity(2, 2).scale(0.5)).norm() < 1e-15);
    }

    #[test]
    fn extension_appends_defect() {
        let half = KrausOperation::new(vec![CMatrix::identity(2, 2).scale(0.5f64.sqrt())]).unwrap();
        let ext = half.extend_to_channel().unwrap();
        assert_eq!(ext.dim_out(), 3);
        assert!(ext.is_channel());
        let out = ext.apply(&state()).unwrap();
        assert!((out.matrix()[(2, 2)].re - 0.5).abs() < 1e-12);
        let head = out.matrix().view((0, 0), (2, 2)).into_owned();
        assert!((head - half.apply(&state()).unwrap().matrix()).norm() < 1e-12);

        let ch = random_channel(2, 2, 2, 4).unwrap().extend_to_channel().unwrap();
        assert!(ch.apply(&state()).unwrap().matrix()[(2, 2)].norm() < 1e-12);
    }

    #[test]
    fn pinching_and_unitary() {
        let p = Projector::new(HermitianMatrix::from_real_diagonal(&[1.0, 0.0]).into_matrix()).unwrap();
        let out = pinching(&p).apply(&state()).unwrap();
        assert!((out.matrix() - KrausOperation::dephasing(2).apply(&state()).unwrap().matrix()).norm() < 1e-15);
        let u = unitary_from_projector(&p);
        assert_eq!(u.matrix(), HermitianMatrix::from_real_diagonal(&[1.0, -1.0]).matrix());
        assert_eq!(unitary_from_projector(&Projector::identity(2)).matrix(), &CMatrix::identity(2, 2));
        assert_eq!(unitary_from_projector(&Projector::zero(2)).matrix(), &(-CMatrix::identity(2, 2)));
        let id = pinching(&Projector::identity(2)).apply(&state()).unwrap();
        assert!((id.matrix() - state().matrix()).norm() < 1e-15);
    }

    #[test]
    fn random_channel_properties() {
        let a = random_channel(2, 3, 2, 5).unwrap();
        assert_eq!(a, random_channel(2, 3, 2, 5).unwrap());
        assert!(channel_defect(&a) <= 1e-10);
        let u = random_channel(2, 2, 1, 8).unwrap();
        let k = &u.kraus()[0];
        assert!((k.adjoint() * k - CMatrix::identity(2, 2)).norm() < 1e-12);
        assert!(random_channel(6, 2, 1, 0).is_err());
        let (op, t) = random_operation(2, 2, 2, 3).unwrap();
        assert!((0.3..=1.0).contains(&t));
        assert!(matches!(op.validate(), Validation::Operation | Validation::Channel));
    }
}
