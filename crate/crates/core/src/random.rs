//! Seeded generators for test inputs. Every generator takes an explicit seed;
//! trial `i` of a suite seeded with `s` uses [`trial_seed`]`(s, i)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::operator::{c, CMatrix, PositiveOperator, C64};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed of trial `index` in a suite run with `seed` (splitmix64 mixing).
pub fn trial_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Matrix of i.i.d. standard complex Gaussian entries.
pub fn ginibre(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Haar-random isometry `dim_in → dim_out` (`dim_out ≥ dim_in`) via QR of a
/// Ginibre matrix, with the phases of `R`'s diagonal moved into `Q`.
pub fn haar_isometry(rng: &mut impl Rng, dim_out: usize, dim_in: usize) -> CMatrix {
    assert!(dim_out >= dim_in, "isometry needs dim_out >= dim_in");
    let qr = ginibre(rng, dim_out, dim_in).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..dim_in {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Haar-random unitary.
pub fn haar_unitary(rng: &mut impl Rng, dim: usize) -> CMatrix {
    haar_isometry(rng, dim, dim)
}

/// Random state of the given rank: `G G* / Tr(G G*)` with `G` Ginibre `dim × rank`.
pub fn random_state(rng: &mut impl Rng, dim: usize, rank: usize) -> PositiveOperator {
    let g = ginibre(rng, dim, rank.clamp(1, dim));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    PositiveOperator::from_psd_matrix(&m.unscale(tr)).expect("Wishart matrix is PSD")
}

/// Full-rank random state with smallest eigenvalue bounded away from zero.
pub fn random_full_rank_state(rng: &mut impl Rng, dim: usize) -> PositiveOperator {
    let g = ginibre(rng, dim, dim);
    let mut m = &g * g.adjoint();
    let shift = 0.05 * m.trace().re / dim as f64;
    for i in 0..dim {
        m[(i, i)] += c(shift);
    }
    let tr = m.trace().re;
    PositiveOperator::from_psd_matrix(&m.unscale(tr)).expect("shifted Wishart matrix is PSD")
}

/// Random positive operator with trace uniform in `[0.2, 2]`.
pub fn random_positive(rng: &mut impl Rng, dim: usize, rank: usize) -> PositiveOperator {
    let t: f64 = rng.random_range(0.2..2.0);
    random_state(rng, dim, rank).scale(t).expect("positive scale")
}

/// Random Hermitian matrix with Gaussian entries.
pub fn random_hermitian(rng: &mut impl Rng, dim: usize) -> CMatrix {
    let g = ginibre(rng, dim, dim);
    (&g + g.adjoint()).scale(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::operator_norm;

    #[test]
    fn isometry_is_orthonormal() {
        let mut r = rng(3);
        let v = haar_isometry(&mut r, 6, 2);
        assert!(operator_norm(&(v.adjoint() * &v - CMatrix::identity(2, 2))) < 1e-13);
    }

    #[test]
    fn seeds_are_reproducible_and_split() {
        let a = random_state(&mut rng(9), 3, 3);
        let b = random_state(&mut rng(9), 3, 3);
        assert_eq!(a, b);
        assert_ne!(trial_seed(1, 0), trial_seed(1, 1));
        assert_ne!(trial_seed(1, 0), trial_seed(2, 0));
    }
}
