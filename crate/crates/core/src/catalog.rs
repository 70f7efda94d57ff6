//! Built-in constructors: tori, bielliptic surfaces, Bagnera-de Franchis
//! quotients and the dihedral example with vanishing first Betti number,
//! together with a named catalog that includes the quaternionic double of
//! every entry.

use crate::crystal::{AffineIsometry, CrystalError, FlatKahlerData};
use crate::doubles::quaternionic_double;
use crate::exact::{rat, IntMatrix, Rat, RationalMatrix};
use crate::numeric::{blockdiag, inf_norm, rat_mat_to_f64, vstack};
use crate::tol::EPS_NUM;
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex;
use num_traits::Zero;
use thiserror::Error;

/// Errors from catalog constructors.
#[derive(Debug, Error)]
pub enum CatalogError {
    /// The real columns of the period matrix are linearly dependent.
    #[error("degenerate period matrix (smallest singular value {min_sv:e})")]
    DegeneratePeriod { min_sv: f64 },
    /// The requested automorphism order does not exist on the given lattice.
    #[error("order-{d} automorphism is not available on this lattice")]
    IncompatibleLattice { d: u32 },
    /// The supplied automorphism does not have the promised order.
    #[error("automorphism has order {got}, expected {expected}")]
    OrderMismatch { expected: u32, got: u32 },
    /// Factors of a product construction must be tori.
    #[error("expected a torus (no group generators), got `{label}`")]
    NotATorus { label: String },
    /// The automorphism must commute with the complex structure of its factor.
    #[error("automorphism does not commute with the complex structure (residual {residual:e})")]
    NotHolomorphicOnFactor { residual: f64 },
    #[error(transparent)]
    Crystal(#[from] CrystalError),
}

/// Lattice of an elliptic curve, normalized to periods `(1, τ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveLattice {
    /// Gaussian lattice, `τ = i`; carries the order-4 automorphism.
    Square,
    /// Hexagonal lattice, `τ = exp(iπ/3)`; carries the order-6 automorphism.
    Hexagonal,
    /// Arbitrary modulus in the upper half plane.
    Generic(Complex<f64>),
}

impl CurveLattice {
    pub fn modulus(&self) -> Complex<f64> {
        match self {
            CurveLattice::Square => Complex::new(0.0, 1.0),
            CurveLattice::Hexagonal => Complex::new(0.5, 0.75_f64.sqrt()),
            CurveLattice::Generic(tau) => *tau,
        }
    }

    /// Complex-structure operator on the lattice basis `(1, τ)`.
    pub fn cplx(&self) -> DMatrix<f64> {
        match self {
            CurveLattice::Square => DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]),
            _ => {
                let tau = self.modulus();
                let p = DMatrix::from_row_slice(2, 2, &[1.0, tau.re, 0.0, tau.im]);
                let s = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
                &p.clone().try_inverse().expect("upper half plane modulus") * s * p
            }
        }
    }

    /// Integer matrix of the multiplier automorphism of the given order, when
    /// the lattice supports it.
    fn automorphism(&self, d: u32) -> Option<IntMatrix> {
        match (d, self) {
            (2, _) => Some(IntMatrix::from_i64_rows(&[&[-1, 0], &[0, -1]])),
            (4, CurveLattice::Square) => Some(IntMatrix::from_i64_rows(&[&[0, -1], &[1, 0]])),
            (6, CurveLattice::Hexagonal) => Some(IntMatrix::from_i64_rows(&[&[0, -1], &[1, 1]])),
            _ => None,
        }
    }
}

/// Torus from an `n x 2n` period matrix whose real columns must be linearly
/// independent. The complex structure is conjugated from the standard one.
pub fn torus(period: &DMatrix<Complex<f64>>, label: &str) -> Result<FlatKahlerData, CatalogError> {
    let n = period.nrows();
    assert_eq!(period.ncols(), 2 * n, "period matrix must be n x 2n");
    let re = period.map(|z| z.re);
    let im = period.map(|z| z.im);
    let p = vstack(&re, &im);
    let svd = p.clone().svd(false, false);
    let max_sv = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let min_sv = svd
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if min_sv <= 1e-9 * max_sv.max(1.0) {
        return Err(CatalogError::DegeneratePeriod { min_sv });
    }
    let mut s = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        s[(k, n + k)] = -1.0;
        s[(n + k, k)] = 1.0;
    }
    let j = p.clone().try_inverse().expect("nondegenerate period") * s * p;
    Ok(FlatKahlerData::torus(n, j, label)?)
}

/// Bielliptic surface `(E₁ x E₂) / (Z/dZ)`: the cyclic group acts by the
/// order-`d` multiplier on `E₁` and translation by `τ` on `E₂`. Whether `τ`
/// actually has order `d` (and hence whether the action is free) is left to
/// validation.
pub fn bielliptic(
    d: u32,
    e1: CurveLattice,
    e2: CurveLattice,
    tau: [Rat; 2],
) -> Result<FlatKahlerData, CatalogError> {
    let phi = e1
        .automorphism(d)
        .ok_or(CatalogError::IncompatibleLattice { d })?;
    let rotation = IntMatrix::from_fn(4, 4, |i, j| match (i < 2, j < 2) {
        (true, true) => phi.get(i, j).clone(),
        (false, false) => {
            if i == j {
                BigInt::from(1)
            } else {
                BigInt::zero()
            }
        }
        _ => BigInt::zero(),
    });
    let translation = vec![Rat::zero(), Rat::zero(), tau[0].clone(), tau[1].clone()];
    let generator = AffineIsometry::new(rotation, translation)?;
    let cplx = blockdiag(&[&e1.cplx(), &e2.cplx()]);
    Ok(FlatKahlerData::new(
        2,
        cplx,
        vec![generator],
        format!("bielliptic_d{d}"),
    )?)
}

/// Bagnera-de Franchis quotient `(T₁ x T₂) / (Z/dZ)`: an order-`d`
/// automorphism on the first torus paired with translation by `τ` on the
/// second. The automorphism order is checked; the torsion order of `τ` is
/// left to validation.
pub fn bagnera_de_franchis(
    t1: &FlatKahlerData,
    t2: &FlatKahlerData,
    d: u32,
    automorphism: &IntMatrix,
    tau: &[Rat],
) -> Result<FlatKahlerData, CatalogError> {
    for t in [t1, t2] {
        if !t.generators().is_empty() {
            return Err(CatalogError::NotATorus {
                label: t.label().to_string(),
            });
        }
    }
    let rank1 = t1.rank();
    assert_eq!(
        automorphism.rows(),
        rank1,
        "automorphism must act on the first factor"
    );
    assert_eq!(
        tau.len(),
        t2.rank(),
        "translation must live on the second factor"
    );
    let phi_f = crate::numeric::int_mat_to_f64(automorphism);
    let residual = inf_norm(&(&phi_f * t1.cplx() - t1.cplx() * &phi_f));
    if residual > EPS_NUM {
        return Err(CatalogError::NotHolomorphicOnFactor { residual });
    }
    let mut power = automorphism.clone();
    let mut order = 1u32;
    while !power.is_identity() {
        power = power.mul(automorphism);
        order += 1;
        if order > 4 * d {
            break;
        }
    }
    if order != d {
        return Err(CatalogError::OrderMismatch {
            expected: d,
            got: order,
        });
    }
    let rank2 = t2.rank();
    let rotation = IntMatrix::from_fn(rank1 + rank2, rank1 + rank2, |i, j| {
        match (i < rank1, j < rank1) {
            (true, true) => automorphism.get(i, j).clone(),
            (false, false) => {
                if i == j {
                    BigInt::from(1)
                } else {
                    BigInt::zero()
                }
            }
            _ => BigInt::zero(),
        }
    });
    let mut translation = vec![Rat::zero(); rank1];
    translation.extend_from_slice(tau);
    let generator = AffineIsometry::new(rotation, translation)?;
    let cplx = blockdiag(&[t1.cplx(), t2.cplx()]);
    Ok(FlatKahlerData::new(
        t1.n() + t2.n(),
        cplx,
        vec![generator],
        format!("bdf_d{d}({},{})", t1.label(), t2.label()),
    )?)
}

/// Stored generic period block for a non-algebraic 2-torus: `(Id | Ω)` with
/// transcendental-flavoured entries and invertible imaginary part. Bounded
/// searches find no rational (1,1) class on it.
fn generic_omega() -> DMatrix<Complex<f64>> {
    DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex::new(0.316_225_886_183_790_7, 1.417_291_562_373_095),
            Complex::new(0.577_951_664_901_532_9, 0.271_569_182_845_904_5),
            Complex::new(0.691_324_180_559_945_3, 0.123_456_789_012_345_6),
            Complex::new(0.910_239_226_626_837_3, 1.734_714_807_568_877_2),
        ],
    )
}

/// Period matrix `(Id | Ω)` of complex dimension 2.
pub fn generic_2torus_period() -> DMatrix<Complex<f64>> {
    let omega = generic_omega();
    DMatrix::from_fn(2, 4, |i, j| {
        if j < 2 {
            if i == j {
                Complex::new(1.0, 0.0)
            } else {
                Complex::new(0.0, 0.0)
            }
        } else {
            omega[(i, j - 2)]
        }
    })
}

/// The dihedral example: a free action of the order-8 dihedral group on a
/// torus isogenous to `E x E x S` with `b₁ = 0`. `E` is the Gaussian curve;
/// `S` is a 2-dimensional torus, with the stored generic (non-algebraic)
/// period by default or a product of Gaussian curves when `algebraic_s` is
/// set.
///
/// On the covering torus the generators act by
/// `s: (x₁, x₂, y) -> (x₂ + τ₁, x₁ + τ₂, -y)` and
/// `r: (x₁, x₂, y) -> (x₂, -x₁, y + σ)` with `τ₁ = 1/2`, `τ₂ = i/2` and `σ`
/// a quarter period of `S`. Since `s²` is the diagonal translation by
/// `τ₁ + τ₂`, the action descends to the quotient by that vector; the lattice
/// here is enlarged accordingly, which makes `s² = (sr)² = r⁴ = Id` and the
/// closure a genuine dihedral group of order 8.
pub fn d4_threefold(algebraic_s: bool) -> FlatKahlerData {
    let (s_cover, r_cover) = d4_cover_generators();
    let e = CurveLattice::Square.cplx();
    let j_s = if algebraic_s {
        blockdiag(&[&e, &e])
    } else {
        torus(&generic_2torus_period(), "s")
            .expect("stored period is nondegenerate")
            .cplx()
            .clone()
    };
    let j_cover = blockdiag(&[&e, &e, &j_s]);

    // Basis of the enlarged lattice: v = (τ₁+τ₂, τ₁+τ₂, 0) replaces e₀.
    let mut p = RationalMatrix::identity(8);
    for i in 0..4 {
        p.set(i, 0, rat(1, 2));
    }
    let p_inv = p.inverse().expect("lattice basis is invertible");

    let conj = |g: &AffineIsometry| -> AffineIsometry {
        let rot = p_inv
            .mul(&g.rotation().to_rational())
            .mul(&p)
            .to_int()
            .expect("the enlarged lattice is stable under the group");
        let t = p_inv.mul_vec(g.translation());
        AffineIsometry::new(rot, t).expect("conjugated generator stays unimodular")
    };
    let s = conj(&s_cover);
    let r = conj(&r_cover);

    let p_f = rat_mat_to_f64(&p);
    let p_inv_f = rat_mat_to_f64(&p_inv);
    let cplx = &p_inv_f * j_cover * &p_f;
    let label = if algebraic_s {
        "d4_threefold_algebraic"
    } else {
        "d4_threefold"
    };
    FlatKahlerData::new(4, cplx, vec![s, r], label).expect("dihedral data is consistent")
}

/// The dihedral generators on the covering torus `E x E x S`, before the
/// lattice enlargement. Exposed for inspection and tests.
pub fn d4_cover_generators() -> (AffineIsometry, AffineIsometry) {
    let s_rot = IntMatrix::from_i64_rows(&[
        &[0, 0, 1, 0, 0, 0, 0, 0],
        &[0, 0, 0, 1, 0, 0, 0, 0],
        &[1, 0, 0, 0, 0, 0, 0, 0],
        &[0, 1, 0, 0, 0, 0, 0, 0],
        &[0, 0, 0, 0, -1, 0, 0, 0],
        &[0, 0, 0, 0, 0, -1, 0, 0],
        &[0, 0, 0, 0, 0, 0, -1, 0],
        &[0, 0, 0, 0, 0, 0, 0, -1],
    ]);
    let mut s_t = vec![Rat::zero(); 8];
    s_t[0] = rat(1, 2); // τ₁ = 1/2 lands on the first curve
    s_t[3] = rat(1, 2); // τ₂ = i/2 lands on the second
    let s = AffineIsometry::new(s_rot, s_t).expect("s is unimodular");

    let r_rot = IntMatrix::from_i64_rows(&[
        &[0, 0, 1, 0, 0, 0, 0, 0],
        &[0, 0, 0, 1, 0, 0, 0, 0],
        &[-1, 0, 0, 0, 0, 0, 0, 0],
        &[0, -1, 0, 0, 0, 0, 0, 0],
        &[0, 0, 0, 0, 1, 0, 0, 0],
        &[0, 0, 0, 0, 0, 1, 0, 0],
        &[0, 0, 0, 0, 0, 0, 1, 0],
        &[0, 0, 0, 0, 0, 0, 0, 1],
    ]);
    let mut r_t = vec![Rat::zero(); 8];
    r_t[4] = rat(1, 4); // σ is a quarter period of S
    let r = AffineIsometry::new(r_rot, r_t).expect("r is unimodular");
    (s, r)
}

/// A named catalog entry.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: String,
    pub complex_dim: usize,
    pub description: &'static str,
}

const BASE_ENTRIES: &[(&str, usize, &str)] = &[
    (
        "square_torus",
        1,
        "elliptic curve with the Gaussian lattice",
    ),
    (
        "nonalgebraic_2torus",
        2,
        "2-torus with a stored generic period",
    ),
    ("bielliptic_d2", 2, "bielliptic surface, order-2 action"),
    (
        "bielliptic_d4",
        2,
        "bielliptic surface on the Gaussian curve, order-4 action",
    ),
    (
        "bielliptic_d6",
        2,
        "bielliptic surface on the hexagonal curve, order-6 action",
    ),
    (
        "bdf_d2",
        3,
        "Bagnera-de Franchis quotient of a curve times a generic 2-torus",
    ),
    (
        "d4_threefold",
        4,
        "dihedral quotient with b1 = 0 over a non-algebraic torus factor",
    ),
    (
        "d4_threefold_algebraic",
        4,
        "dihedral quotient with b1 = 0, algebraic torus factor",
    ),
];

/// Names and metadata of every built-in, including the quaternionic double
/// of each entry.
pub fn list_catalog() -> Vec<CatalogEntry> {
    let mut out = Vec::with_capacity(2 * BASE_ENTRIES.len());
    for &(name, dim, description) in BASE_ENTRIES {
        out.push(CatalogEntry {
            name: name.to_string(),
            complex_dim: dim,
            description,
        });
    }
    for &(name, dim, _) in BASE_ENTRIES {
        out.push(CatalogEntry {
            name: format!("{name}_qdouble"),
            complex_dim: 2 * dim,
            description: "quaternionic double of a catalog entry",
        });
    }
    out
}

/// Builds a catalog entry by name; `None` for unknown names.
pub fn build(name: &str) -> Option<FlatKahlerData> {
    if let Some(base) = name.strip_suffix("_qdouble") {
        let data = build(base)?;
        return Some(
            quaternionic_double(&data)
                .expect("catalog entries double cleanly")
                .data,
        );
    }
    let e2 = CurveLattice::Generic(Complex::new(0.31, 0.97));
    match name {
        "square_torus" => Some(
            FlatKahlerData::torus(1, CurveLattice::Square.cplx(), "square_torus")
                .expect("square torus"),
        ),
        "nonalgebraic_2torus" => {
            Some(torus(&generic_2torus_period(), "nonalgebraic_2torus").expect("stored period"))
        }
        "bielliptic_d2" => Some(
            bielliptic(
                2,
                CurveLattice::Generic(Complex::new(0.23, 1.42)),
                e2,
                [rat(1, 2), Rat::zero()],
            )
            .expect("bielliptic d=2"),
        ),
        "bielliptic_d4" => Some(
            bielliptic(4, CurveLattice::Square, e2, [rat(1, 4), Rat::zero()])
                .expect("bielliptic d=4"),
        ),
        "bielliptic_d6" => Some(
            bielliptic(6, CurveLattice::Hexagonal, e2, [rat(1, 6), Rat::zero()])
                .expect("bielliptic d=6"),
        ),
        "bdf_d2" => {
            let t1 = FlatKahlerData::torus(1, CurveLattice::Square.cplx(), "E").expect("curve");
            let t2 = torus(&generic_2torus_period(), "S").expect("stored period");
            let neg = IntMatrix::from_i64_rows(&[&[-1, 0], &[0, -1]]);
            let tau = vec![rat(1, 2), Rat::zero(), Rat::zero(), Rat::zero()];
            Some(bagnera_de_franchis(&t1, &t2, 2, &neg, &tau).expect("Bagnera-de Franchis d=2"))
        }
        "d4_threefold" => Some(d4_threefold(false)),
        "d4_threefold_algebraic" => Some(d4_threefold(true)),
        _ => None,
    }
}
