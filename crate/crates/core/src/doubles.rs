//! Quaternionic and co-quaternionic doubles.
//!
//! The quaternionic double of `X = T/G` is the fibrewise quotient of the
//! tangent bundle by the monodromy-invariant lattice; concretely a quotient
//! of the doubled torus by the diagonal action, with block complex structures
//!
//! ```text
//! I = [I_X  0; 0  -I_X],   J = [0  -1; 1  0],   K = [0  -I_X; -I_X  0]
//! ```
//!
//! satisfying `I² = J² = K² = IJK = -Id`. The co-quaternionic double uses the
//! cotangent bundle instead: generators act by `diag(r, (r^{-1})ᵀ)` and the
//! tautological pairing between the factors is an exact rational holomorphic
//! symplectic form. Both constructions double the first Betti number.

use crate::cohomology::{CohomologyError, TwoForm};
use crate::crystal::{AffineIsometry, CrystalError, FlatKahlerData};
use crate::exact::IntMatrix;
use crate::exact::{Rat, RationalMatrix};
use crate::hyperhermitian::{average_metric, HyperError};
use crate::numeric::{block2x2, blockdiag};
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

/// Errors from the double constructions.
#[derive(Debug, Error)]
pub enum DoubleError {
    #[error(transparent)]
    Crystal(#[from] CrystalError),
    #[error(transparent)]
    Hyper(#[from] HyperError),
    #[error(transparent)]
    Cohomology(#[from] CohomologyError),
}

/// A double together with its quaternionic block operators and the real part
/// of its canonical holomorphic symplectic form.
#[derive(Debug, Clone)]
pub struct DoubleResult {
    pub data: FlatKahlerData,
    pub block_i: DMatrix<f64>,
    pub block_j: DMatrix<f64>,
    pub block_k: DMatrix<f64>,
    pub canonical_sigma1: TwoForm,
}

impl DoubleResult {
    /// Largest entry of the canonical form restricted to the fibre directions
    /// (the second factor). Zero exactly: the fibres are isotropic.
    pub fn fibre_isotropy_defect(&self) -> f64 {
        let m = self.canonical_sigma1.matrix();
        let half = m.nrows() / 2;
        let mut worst: f64 = 0.0;
        for i in half..m.nrows() {
            for j in half..m.ncols() {
                worst = worst.max(m[(i, j)].abs());
            }
        }
        worst
    }
}

fn diag_int(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let n = a.rows();
    let m = b.rows();
    IntMatrix::from_fn(n + m, n + m, |i, j| match (i < n, j < n) {
        (true, true) => a.get(i, j).clone(),
        (false, false) => b.get(i - n, j - n).clone(),
        _ => BigInt::zero(),
    })
}

fn doubled_generator(
    g: &AffineIsometry,
    second_factor: impl Fn(&IntMatrix) -> IntMatrix,
) -> Result<AffineIsometry, CrystalError> {
    let rank = g.rank();
    let rotation = diag_int(g.rotation(), &second_factor(g.rotation()));
    let mut translation = g.translation().to_vec();
    translation.resize(2 * rank, Rat::zero());
    AffineIsometry::new(rotation, translation)
}

/// Quaternionic double `X₊`: the lattice rank doubles, each generator
/// `(r, t)` becomes `(diag(r, r), (t, 0))`, and the complex structure is the
/// block operator `I`. The canonical form is `ω_J` of the averaged metric,
/// the standard pairing between the two factors when the input is a flat
/// torus with orthogonal periods.
pub fn quaternionic_double(data: &FlatKahlerData) -> Result<DoubleResult, DoubleError> {
    let rank = data.rank();
    let j = data.cplx();
    let h1 = average_metric(data)?;

    let cplx = blockdiag(&[j, &(-j)]);
    let generators = data
        .generators()
        .iter()
        .map(|g| doubled_generator(g, |r| r.clone()))
        .collect::<Result<Vec<_>, _>>()?;
    let doubled = FlatKahlerData::new(
        2 * data.n(),
        cplx.clone(),
        generators,
        format!("{}_qdouble", data.label()),
    )?;

    let zero = DMatrix::zeros(rank, rank);
    let id = DMatrix::identity(rank, rank);
    let block_i = cplx;
    let block_j = block2x2(&zero, &(-&id), &id, &zero);
    let block_k = &block_i * &block_j;
    // ω_J(x, y) = g'(Jx, y) with g' = diag(h₁, h₁): the pairing [0 h; -h 0].
    let sigma = block2x2(&zero, &h1, &(-&h1), &zero);
    Ok(DoubleResult {
        data: doubled,
        block_i,
        block_j,
        block_k,
        canonical_sigma1: TwoForm::from_real(sigma)?,
    })
}

/// Co-quaternionic double `X⁺` built on the cotangent bundle: generators act
/// by `diag(r, (r^{-1})ᵀ)` in the dual lattice basis, the complex structure
/// is `diag(I_X, I_Xᵀ)`, and the canonical form is the exact tautological
/// pairing between the factor and its dual.
pub fn coquaternionic_double(data: &FlatKahlerData) -> Result<DoubleResult, DoubleError> {
    let rank = data.rank();
    let j = data.cplx();
    let h1 = average_metric(data)?;

    let cplx = blockdiag(&[j, &j.transpose()]);
    let generators = data
        .generators()
        .iter()
        .map(|g| {
            doubled_generator(g, |r| {
                r.inverse_unimodular()
                    .expect("rotation parts are unimodular")
                    .transpose()
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let doubled = FlatKahlerData::new(
        2 * data.n(),
        cplx.clone(),
        generators,
        format!("{}_cdouble", data.label()),
    )?;

    // Tautological pairing, exact over the rationals.
    let taut = RationalMatrix::from_fn(2 * rank, 2 * rank, |i, jx| {
        if jx == i + rank {
            Rat::one()
        } else if i == jx + rank {
            -Rat::one()
        } else {
            Rat::zero()
        }
    });
    let h_inv = h1
        .clone()
        .try_inverse()
        .expect("averaged metric is positive definite");
    let zero = DMatrix::zeros(rank, rank);
    let block_i = cplx;
    let block_j = block2x2(&zero, &(-&h_inv), &h1, &zero);
    let block_k = &block_i * &block_j;
    Ok(DoubleResult {
        data: doubled,
        block_i,
        block_j,
        block_k,
        canonical_sigma1: TwoForm::from_rational(taut)?,
    })
}
