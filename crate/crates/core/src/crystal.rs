//! Data model and validation for complex crystallographic quotients `X = T/G`.
//!
//! The torus `T` is described by a lattice `Z^{2n}` and a complex-structure
//! operator `J` on its real span (a real matrix with `J² = -Id`, possibly
//! irrational, stored floating point). The group `G` is generated by affine
//! isometries: an integer rotation part acting on the lattice basis plus a
//! rational translation taken modulo the lattice. Group theory stays exact;
//! only commutation with `J` is a floating check.

use crate::exact::{self, ExactError, IntMatrix, Rat, RationalMatrix};
use crate::numeric::{hstack, inf_norm, int_mat_to_f64};
use crate::tol::{DEFAULT_CLOSURE_CAP, EPS_NUM};
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex;
use num_traits::{One, Signed, Zero};
use std::collections::HashSet;
use thiserror::Error;

/// Errors from crystallographic validation.
#[derive(Debug, Error)]
pub enum CrystalError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    /// Rotation parts must be invertible over the integers.
    #[error("rotation part has determinant {det}, expected ±1")]
    NotUnimodular { det: String },
    /// The generated group exceeded the closure cap; the data is either not a
    /// finite group or mis-entered.
    #[error("group closure exceeded cap of {cap} elements")]
    ClosureCapExceeded { cap: usize },
    /// `complex_rotation` on an element whose rotation does not commute with J.
    #[error("element does not commute with the complex structure (residual {residual:e})")]
    NonHolomorphicElement { residual: f64 },
    /// The stored operator fails `J² = -Id`.
    #[error("complex structure violates J² = -Id (residual {residual:e})")]
    InvalidComplexStructure { residual: f64 },
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// A lattice-affine isometry `x -> r·x + t` with integer rotation part `r`
/// and rational translation `t` reduced modulo `Z^{2n}` into `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AffineIsometry {
    rotation: IntMatrix,
    translation: Vec<Rat>,
}

impl AffineIsometry {
    /// Builds an element, checking unimodularity and reducing the translation.
    pub fn new(rotation: IntMatrix, translation: Vec<Rat>) -> Result<Self, CrystalError> {
        if !rotation.is_square() || rotation.rows() != translation.len() {
            return Err(CrystalError::DimensionMismatch(format!(
                "rotation {}x{} with translation of length {}",
                rotation.rows(),
                rotation.cols(),
                translation.len()
            )));
        }
        let det = rotation.det();
        if !det.abs().is_one() {
            return Err(CrystalError::NotUnimodular {
                det: det.to_string(),
            });
        }
        Ok(Self {
            rotation,
            translation: reduce_mod_lattice(translation),
        })
    }

    pub fn identity(rank: usize) -> Self {
        Self {
            rotation: IntMatrix::identity(rank),
            translation: vec![Rat::zero(); rank],
        }
    }

    /// Pure translation by the given vector.
    pub fn translation_by(t: Vec<Rat>) -> Self {
        Self {
            rotation: IntMatrix::identity(t.len()),
            translation: reduce_mod_lattice(t),
        }
    }

    pub fn rotation(&self) -> &IntMatrix {
        &self.rotation
    }

    pub fn translation(&self) -> &[Rat] {
        &self.translation
    }

    pub fn rank(&self) -> usize {
        self.translation.len()
    }

    pub fn is_identity(&self) -> bool {
        self.rotation.is_identity() && self.translation.iter().all(Rat::is_zero)
    }

    /// Group law `self ∘ other`: `(r_a·r_b, r_a·t_b + t_a)` with the
    /// translation reduced modulo the lattice.
    pub fn compose(&self, other: &Self) -> Result<Self, CrystalError> {
        if self.rank() != other.rank() {
            return Err(CrystalError::DimensionMismatch(format!(
                "composing elements of rank {} and {}",
                self.rank(),
                other.rank()
            )));
        }
        let rotation = self.rotation.mul(&other.rotation);
        let rot_rat = self.rotation.to_rational();
        let mut translation = rot_rat.mul_vec(&other.translation);
        for (acc, t) in translation.iter_mut().zip(&self.translation) {
            *acc += t;
        }
        Ok(Self {
            rotation,
            translation: reduce_mod_lattice(translation),
        })
    }

    /// Exact group inverse.
    pub fn inverse(&self) -> Self {
        let inv_rot = self
            .rotation
            .inverse_unimodular()
            .expect("unimodular rotation is invertible over the integers");
        let t = inv_rot
            .to_rational()
            .mul_vec(&self.translation)
            .into_iter()
            .map(|x| -x)
            .collect();
        Self {
            rotation: inv_rot,
            translation: reduce_mod_lattice(t),
        }
    }
}

fn reduce_mod_lattice(t: Vec<Rat>) -> Vec<Rat> {
    t.into_iter().map(|x| x.clone() - x.floor()).collect()
}

/// Closure of the generated group under composition, deduplicated exactly.
/// Fails with [`CrystalError::ClosureCapExceeded`] when more than `cap`
/// distinct elements appear.
pub fn group_closure(
    rank: usize,
    generators: &[AffineIsometry],
    cap: usize,
) -> Result<Vec<AffineIsometry>, CrystalError> {
    assert!(cap >= 1, "closure cap must be positive");
    for g in generators {
        if g.rank() != rank {
            return Err(CrystalError::DimensionMismatch(format!(
                "generator of rank {} in a rank-{} lattice",
                g.rank(),
                rank
            )));
        }
    }
    let id = AffineIsometry::identity(rank);
    let mut seen: HashSet<AffineIsometry> = HashSet::new();
    seen.insert(id.clone());
    let mut list = vec![id];
    let mut next = 0usize;
    while next < list.len() {
        let current = list[next].clone();
        next += 1;
        for g in generators {
            let product = current.compose(g)?;
            if seen.insert(product.clone()) {
                if list.len() + 1 > cap {
                    return Err(CrystalError::ClosureCapExceeded { cap });
                }
                list.push(product);
            }
        }
    }
    Ok(list)
}

/// A compact flat Kähler manifold `X = T/G`: lattice rank `2n`, complex
/// structure on the real span of the lattice, and group generators. The torus
/// itself is the special case of no generators.
#[derive(Debug, Clone)]
pub struct FlatKahlerData {
    n: usize,
    cplx: DMatrix<f64>,
    generators: Vec<AffineIsometry>,
    label: String,
    // 2n x n real columns forming a C-basis of (V, J); fixed at construction
    // so complex rotation matrices are reproducible.
    complex_basis: DMatrix<f64>,
}

impl FlatKahlerData {
    /// Builds the record and checks `J² = -Id` plus shape consistency.
    pub fn new(
        n: usize,
        cplx: DMatrix<f64>,
        generators: Vec<AffineIsometry>,
        label: impl Into<String>,
    ) -> Result<Self, CrystalError> {
        let rank = 2 * n;
        if cplx.nrows() != rank || cplx.ncols() != rank {
            return Err(CrystalError::DimensionMismatch(format!(
                "complex structure is {}x{}, expected {}x{}",
                cplx.nrows(),
                cplx.ncols(),
                rank,
                rank
            )));
        }
        let residual = inf_norm(&(&cplx * &cplx + DMatrix::identity(rank, rank)));
        if residual > EPS_NUM {
            return Err(CrystalError::InvalidComplexStructure { residual });
        }
        for g in &generators {
            if g.rank() != rank {
                return Err(CrystalError::DimensionMismatch(format!(
                    "generator of rank {} in a rank-{} lattice",
                    g.rank(),
                    rank
                )));
            }
        }
        let complex_basis = extract_complex_basis(&cplx, n);
        Ok(Self {
            n,
            cplx,
            generators,
            label: label.into(),
            complex_basis,
        })
    }

    /// Torus data: no group generators.
    pub fn torus(
        n: usize,
        cplx: DMatrix<f64>,
        label: impl Into<String>,
    ) -> Result<Self, CrystalError> {
        Self::new(n, cplx, Vec::new(), label)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Lattice rank `2n`.
    pub fn rank(&self) -> usize {
        2 * self.n
    }

    pub fn cplx(&self) -> &DMatrix<f64> {
        &self.cplx
    }

    pub fn generators(&self) -> &[AffineIsometry] {
        &self.generators
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Real columns `u_1..u_n` forming a C-basis of `(V, J)`.
    pub fn complex_basis(&self) -> &DMatrix<f64> {
        &self.complex_basis
    }

    /// Group closure with an explicit cap.
    pub fn closure_with_cap(&self, cap: usize) -> Result<Vec<AffineIsometry>, CrystalError> {
        group_closure(self.rank(), &self.generators, cap)
    }

    /// Group closure with the default cap.
    pub fn closure(&self) -> Result<Vec<AffineIsometry>, CrystalError> {
        self.closure_with_cap(DEFAULT_CLOSURE_CAP)
    }
}

/// Greedy extraction of real vectors `u_1..u_n` such that `(u_k, J u_k)`
/// together span `R^{2n}`; deterministic over the standard basis.
fn extract_complex_basis(cplx: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    let rank = 2 * n;
    let mut picked: Vec<usize> = Vec::new();
    let mut ortho: Vec<nalgebra::DVector<f64>> = Vec::new();
    for cand in 0..rank {
        if picked.len() == n {
            break;
        }
        let e = DMatrix::<f64>::identity(rank, rank)
            .column(cand)
            .into_owned();
        let je = cplx * &e;
        let mut res = e.clone();
        for q in &ortho {
            res -= q * q.dot(&res);
        }
        if res.norm() < 1e-8 {
            continue;
        }
        picked.push(cand);
        let q1 = res.normalize();
        ortho.push(q1);
        let mut res2 = je;
        for q in &ortho {
            res2 -= q * q.dot(&res2);
        }
        ortho.push(res2.normalize());
    }
    assert_eq!(picked.len(), n, "complex basis extraction failed");
    DMatrix::from_fn(rank, n, |i, j| if i == picked[j] { 1.0 } else { 0.0 })
}

/// Fixed point of one affine element on the torus, if any.
///
/// `r·x + t = x + λ` has a solution with `λ ∈ Z^{2n}` iff `N·λ = N·t` is
/// integrally solvable, where the rows of `N` span the left kernel of
/// `r - Id`; solvability is decided through the Smith normal form of `N`.
pub fn element_fixed_point(g: &AffineIsometry) -> Option<Vec<Rat>> {
    let rank = g.rank();
    let m = g
        .rotation
        .to_rational()
        .sub(&RationalMatrix::identity(rank));
    let left_kernel = exact::kernel(&m.transpose());
    let minus_t: Vec<Rat> = g.translation.iter().map(|x| -x.clone()).collect();
    if left_kernel.is_empty() {
        // full row rank: solvable for any lattice vector, take λ = 0
        let x = exact::solve(&m, &minus_t).expect("full-row-rank system is consistent");
        return Some(reduce_mod_lattice(x));
    }
    // Clear each kernel vector to a primitive integer row of N.
    let k = left_kernel.len();
    let n_mat = IntMatrix::from_fn(k, rank, |i, j| {
        let mut lcm = BigInt::one();
        for x in &left_kernel[i] {
            lcm = num_integer::lcm(lcm, x.denom().clone());
        }
        (&left_kernel[i][j] * Rat::from_integer(lcm)).to_integer()
    });
    let c: Vec<Rat> = (0..k)
        .map(|i| {
            let mut acc = Rat::zero();
            for j in 0..rank {
                acc += Rat::from_integer(n_mat.get(i, j).clone()) * &g.translation[j];
            }
            acc
        })
        .collect();
    let snf = exact::smith_normal_form_int(&n_mat);
    let uc = snf.u.to_rational().mul_vec(&c);
    let r = snf.rank();
    let mut mu = vec![BigInt::zero(); rank];
    for (i, uc_i) in uc.iter().enumerate() {
        if i < r {
            let q = uc_i / Rat::from_integer(snf.d.get(i, i).clone());
            if !q.is_integer() {
                return None;
            }
            mu[i] = q.to_integer();
        } else if !uc_i.is_zero() {
            return None;
        }
    }
    let lambda: Vec<Rat> = (0..rank)
        .map(|i| {
            let mut acc = BigInt::zero();
            for (j, mu_j) in mu.iter().enumerate() {
                acc += snf.v.get(i, j) * mu_j;
            }
            Rat::from_integer(acc)
        })
        .collect();
    let rhs: Vec<Rat> = lambda
        .iter()
        .zip(&g.translation)
        .map(|(l, t)| l - t)
        .collect();
    let x = exact::solve(&m, &rhs).expect("divisibility test certified consistency");
    Some(reduce_mod_lattice(x))
}

/// Witness of a non-free action: the offending element and a point it fixes.
#[derive(Debug, Clone)]
pub struct FreenessWitness {
    pub element: AffineIsometry,
    pub fixed_point: Vec<Rat>,
}

/// Decides freeness of the action on the torus. Returns the first witness in
/// closure order when a fixed point exists.
pub fn is_free(data: &FlatKahlerData) -> Result<(bool, Option<FreenessWitness>), CrystalError> {
    let closure = data.closure()?;
    for g in &closure {
        if g.is_identity() {
            continue;
        }
        if let Some(fixed_point) = element_fixed_point(g) {
            return Ok((
                false,
                Some(FreenessWitness {
                    element: g.clone(),
                    fixed_point,
                }),
            ));
        }
    }
    Ok((true, None))
}

/// Checks that every closure element commutes with the complex structure;
/// returns the maximal commutator residual.
pub fn is_holomorphic(data: &FlatKahlerData) -> Result<(bool, f64), CrystalError> {
    let closure = data.closure()?;
    let j = data.cplx();
    let mut max_residual: f64 = 0.0;
    for g in &closure {
        let r = int_mat_to_f64(g.rotation());
        let residual = inf_norm(&(&r * j - j * &r));
        max_residual = max_residual.max(residual);
    }
    Ok((max_residual <= EPS_NUM, max_residual))
}

/// Matrix of a rotation part on `(V, J)` viewed as an n-dimensional complex
/// space, in the basis fixed at construction.
pub fn complex_rotation(
    data: &FlatKahlerData,
    g: &AffineIsometry,
) -> Result<DMatrix<Complex<f64>>, CrystalError> {
    let j = data.cplx();
    let r = int_mat_to_f64(g.rotation());
    let residual = inf_norm(&(&r * j - j * &r));
    if residual > EPS_NUM {
        return Err(CrystalError::NonHolomorphicElement { residual });
    }
    let u = data.complex_basis();
    let p = hstack(u, &(j * u));
    let rhs = &r * u;
    let lu = p.lu();
    let sol = lu
        .solve(&rhs)
        .ok_or_else(|| CrystalError::DimensionMismatch("complex basis is singular".to_string()))?;
    let n = data.n();
    Ok(DMatrix::from_fn(n, n, |i, k| {
        Complex::new(sol[(i, k)], sol[(n + i, k)])
    }))
}

/// Aggregate validation report.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub group_order: usize,
    pub free: bool,
    pub freeness_witness: Option<FreenessWitness>,
    pub holomorphic: bool,
    pub max_commutator_residual: f64,
    pub cplx_residual: f64,
    pub closed: bool,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.free && self.holomorphic && self.closed && self.cplx_residual <= EPS_NUM
    }
}

/// Runs the full validation: closure (with the given cap), exhaustive
/// closedness check, freeness, holomorphy and the `J² = -Id` residual.
pub fn validate(data: &FlatKahlerData, cap: usize) -> Result<ValidationReport, CrystalError> {
    let closure = data.closure_with_cap(cap)?;
    let set: HashSet<&AffineIsometry> = closure.iter().collect();
    let mut closed = true;
    'outer: for a in &closure {
        for b in &closure {
            if !set.contains(&a.compose(b)?) {
                closed = false;
                break 'outer;
            }
        }
    }

    let j = data.cplx();
    let rank = data.rank();
    let cplx_residual = inf_norm(&(j * j + DMatrix::identity(rank, rank)));

    let mut max_commutator_residual: f64 = 0.0;
    for g in &closure {
        let r = int_mat_to_f64(g.rotation());
        max_commutator_residual = max_commutator_residual.max(inf_norm(&(&r * j - j * &r)));
    }
    let holomorphic = max_commutator_residual <= EPS_NUM;

    let mut free = true;
    let mut freeness_witness = None;
    for g in &closure {
        if g.is_identity() {
            continue;
        }
        if let Some(fixed_point) = element_fixed_point(g) {
            free = false;
            freeness_witness = Some(FreenessWitness {
                element: g.clone(),
                fixed_point,
            });
            break;
        }
    }

    Ok(ValidationReport {
        group_order: closure.len(),
        free,
        freeness_witness,
        holomorphic,
        max_commutator_residual,
        cplx_residual,
        closed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat, rat_int};
    use crate::numeric::rat_vec_to_f64;
    use proptest::prelude::*;

    fn standard_j(n: usize) -> DMatrix<f64> {
        let mut j = DMatrix::zeros(2 * n, 2 * n);
        for k in 0..n {
            j[(k, n + k)] = -1.0;
            j[(n + k, k)] = 1.0;
        }
        j
    }

    /// J for one elliptic curve with lattice basis (1, τ).
    fn curve_j(re: f64, im: f64) -> DMatrix<f64> {
        let p = DMatrix::from_row_slice(2, 2, &[1.0, re, 0.0, im]);
        let s = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        &p.clone().try_inverse().unwrap() * s * p
    }

    fn neg_id_gen(rank: usize) -> AffineIsometry {
        AffineIsometry::new(
            IntMatrix::from_fn(rank, rank, |i, j| {
                if i == j {
                    BigInt::from(-1)
                } else {
                    BigInt::zero()
                }
            }),
            vec![Rat::zero(); rank],
        )
        .unwrap()
    }

    /// Bielliptic d=2 generator on E1 x E2: -Id on the first curve, shift by
    /// a half period on the second.
    fn bielliptic_gen() -> AffineIsometry {
        AffineIsometry::new(
            IntMatrix::from_i64_rows(&[
                &[-1, 0, 0, 0],
                &[0, -1, 0, 0],
                &[0, 0, 1, 0],
                &[0, 0, 0, 1],
            ]),
            vec![Rat::zero(), Rat::zero(), rat(1, 2), Rat::zero()],
        )
        .unwrap()
    }

    fn bielliptic_data() -> FlatKahlerData {
        let j = crate::numeric::blockdiag(&[&curve_j(0.23, 1.42), &curve_j(0.31, 0.97)]);
        FlatKahlerData::new(2, j, vec![bielliptic_gen()], "bielliptic-test").unwrap()
    }

    #[test]
    fn compose_identity_is_neutral() {
        let g = bielliptic_gen();
        let id = AffineIsometry::identity(4);
        assert_eq!(id.compose(&g).unwrap(), g);
        assert_eq!(g.compose(&id).unwrap(), g);
    }

    #[test]
    fn translations_reduce_into_unit_cube() {
        let t = AffineIsometry::translation_by(vec![rat(7, 2), rat(-1, 3), rat_int(4), rat(5, 4)]);
        assert_eq!(
            t.translation(),
            &[rat(1, 2), rat(2, 3), Rat::zero(), rat(1, 4)]
        );
    }

    #[test]
    fn closure_of_nothing_is_identity() {
        let c = group_closure(4, &[], 10).unwrap();
        assert_eq!(c.len(), 1);
        assert!(c[0].is_identity());
    }

    #[test]
    fn closure_of_bielliptic_generator_has_two_elements() {
        let c = group_closure(4, &[bielliptic_gen()], 100).unwrap();
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn closure_cap_detects_infinite_data() {
        let shear = AffineIsometry::new(
            IntMatrix::from_i64_rows(&[&[1, 1], &[0, 1]]),
            vec![Rat::zero(), Rat::zero()],
        )
        .unwrap();
        assert!(matches!(
            group_closure(2, &[shear], 50),
            Err(CrystalError::ClosureCapExceeded { cap: 50 })
        ));
    }

    #[test]
    fn negation_fixes_the_origin() {
        let g = neg_id_gen(2);
        let fp = element_fixed_point(&g).expect("-Id fixes the origin");
        assert!(fp.iter().all(Rat::is_zero));
    }

    #[test]
    fn bielliptic_action_is_free() {
        let (free, witness) = is_free(&bielliptic_data()).unwrap();
        assert!(free);
        assert!(witness.is_none());
    }

    #[test]
    fn pure_translations_are_free() {
        let g = AffineIsometry::translation_by(vec![rat(1, 3), Rat::zero()]);
        assert!(element_fixed_point(&g).is_none());
    }

    #[test]
    fn torus_validates_trivially() {
        let data = FlatKahlerData::torus(1, standard_j(1), "t1").unwrap();
        let report = validate(&data, 10).unwrap();
        assert!(report.is_valid());
        assert_eq!(report.group_order, 1);
        assert_eq!(report.max_commutator_residual, 0.0);
    }

    #[test]
    fn negation_is_not_free_but_holomorphic() {
        let data =
            FlatKahlerData::new(1, standard_j(1), vec![neg_id_gen(2)], "involution").unwrap();
        let report = validate(&data, 10).unwrap();
        assert_eq!(report.group_order, 2);
        assert!(!report.free);
        assert!(report.holomorphic);
        let w = report.freeness_witness.unwrap();
        assert!(w.fixed_point.iter().all(Rat::is_zero));
    }

    #[test]
    fn axis_swap_on_generic_curve_is_not_holomorphic() {
        let swap = AffineIsometry::new(
            IntMatrix::from_i64_rows(&[&[0, 1], &[1, 0]]),
            vec![Rat::zero(), Rat::zero()],
        )
        .unwrap();
        let data = FlatKahlerData::new(1, curve_j(0.3, 1.1), vec![swap], "swap").unwrap();
        let (holo, residual) = is_holomorphic(&data).unwrap();
        assert!(!holo);
        assert!(residual > 1e-3);
    }

    #[test]
    fn complex_rotation_of_identity_and_negation() {
        let data = bielliptic_data();
        let id = complex_rotation(&data, &AffineIsometry::identity(4)).unwrap();
        assert!((&id - DMatrix::<Complex<f64>>::identity(2, 2)).norm() < 1e-12);
        let neg = complex_rotation(&data, &neg_id_gen(4)).unwrap();
        assert!((&neg + DMatrix::<Complex<f64>>::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn complex_rotation_is_multiplicative_on_the_closure() {
        let data = bielliptic_data();
        let closure = data.closure().unwrap();
        for a in &closure {
            for b in &closure {
                let ab = complex_rotation(&data, &a.compose(b).unwrap()).unwrap();
                let ra = complex_rotation(&data, a).unwrap();
                let rb = complex_rotation(&data, b).unwrap();
                assert!((ab - ra * rb).norm() <= 10.0 * EPS_NUM);
            }
        }
    }

    #[test]
    fn complex_rotation_rejects_non_holomorphic_elements() {
        let swap = AffineIsometry::new(
            IntMatrix::from_i64_rows(&[&[0, 1], &[1, 0]]),
            vec![Rat::zero(), Rat::zero()],
        )
        .unwrap();
        let data = FlatKahlerData::torus(1, curve_j(0.3, 1.1), "t").unwrap();
        assert!(matches!(
            complex_rotation(&data, &swap),
            Err(CrystalError::NonHolomorphicElement { .. })
        ));
    }

    #[test]
    fn freeness_matches_brute_force_on_small_instances() {
        // Independent oracle: dense grid search plus per-sheet least squares.
        let cases: Vec<AffineIsometry> = vec![
            bielliptic_gen(),
            neg_id_gen(4),
            AffineIsometry::new(
                IntMatrix::from_i64_rows(&[
                    &[1, 0, 0, 0],
                    &[0, 1, 0, 0],
                    &[0, 0, 0, -1],
                    &[0, 0, 1, 0],
                ]),
                vec![rat(1, 4), Rat::zero(), Rat::zero(), Rat::zero()],
            )
            .unwrap(),
            AffineIsometry::translation_by(vec![rat(1, 2); 4]),
        ];
        for g in &cases {
            let oracle = brute_force_has_fixed_point(g, 24);
            assert_eq!(
                element_fixed_point(g).is_some(),
                oracle,
                "disagreement on {g:?}"
            );
        }
    }

    /// Grid search over the torus with least-squares refinement per candidate
    /// lattice sheet; independent of the Smith-normal-form path.
    fn brute_force_has_fixed_point(g: &AffineIsometry, grid: usize) -> bool {
        let rank = g.rank();
        assert_eq!(rank, 4);
        let m = int_mat_to_f64(g.rotation()) - DMatrix::<f64>::identity(rank, rank);
        let t = rat_vec_to_f64(g.translation());
        let mut sheets: std::collections::HashMap<[i64; 4], f64> = std::collections::HashMap::new();
        let step = 1.0 / grid as f64;
        for i0 in 0..grid {
            for i1 in 0..grid {
                for i2 in 0..grid {
                    for i3 in 0..grid {
                        let x = [
                            i0 as f64 * step,
                            i1 as f64 * step,
                            i2 as f64 * step,
                            i3 as f64 * step,
                        ];
                        let mut f = [0.0; 4];
                        for r in 0..4 {
                            f[r] = t[r] + (0..4).map(|c| m[(r, c)] * x[c]).sum::<f64>();
                        }
                        let mut dist2 = 0.0;
                        let mut lam = [0i64; 4];
                        for r in 0..4 {
                            lam[r] = f[r].round() as i64;
                            let d = f[r] - lam[r] as f64;
                            dist2 += d * d;
                        }
                        if dist2 < 0.35 * 0.35 {
                            let e = sheets.entry(lam).or_insert(f64::INFINITY);
                            *e = e.min(dist2);
                        }
                    }
                }
            }
        }
        for lam in sheets.keys() {
            let rhs = nalgebra::DVector::from_fn(4, |r, _| lam[r] as f64 - t[r]);
            let svd = m.clone().svd(true, true);
            if let Ok(x) = svd.solve(&rhs, 1e-12) {
                let f = &m * &x - &rhs;
                if f.norm() < 1e-7 {
                    return true;
                }
            }
        }
        false
    }

    fn pool_rotation(idx: usize) -> IntMatrix {
        match idx % 4 {
            0 => IntMatrix::from_i64_rows(&[&[0, -1], &[1, 0]]),
            1 => IntMatrix::from_i64_rows(&[&[1, 1], &[0, 1]]),
            2 => IntMatrix::from_i64_rows(&[&[0, 1], &[1, 0]]),
            _ => IntMatrix::identity(2),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn compose_is_associative(
            ra in 0usize..4, rb in 0usize..4, rc in 0usize..4,
            ta in proptest::collection::vec(-6i64..=6, 2),
            tb in proptest::collection::vec(-6i64..=6, 2),
            tc in proptest::collection::vec(-6i64..=6, 2),
        ) {
            let mk = |r: usize, t: &[i64]| {
                AffineIsometry::new(
                    pool_rotation(r),
                    t.iter().map(|&x| rat(x, 4)).collect(),
                ).unwrap()
            };
            let (a, b, c) = (mk(ra, &ta), mk(rb, &tb), mk(rc, &tc));
            let left = a.compose(&b).unwrap().compose(&c).unwrap();
            let right = a.compose(&b.compose(&c).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn inverse_cancels(r in 0usize..4, t in proptest::collection::vec(-6i64..=6, 2)) {
            let g = AffineIsometry::new(
                pool_rotation(r),
                t.iter().map(|&x| rat(x, 4)).collect(),
            ).unwrap();
            prop_assert!(g.compose(&g.inverse()).unwrap().is_identity());
            prop_assert!(g.inverse().compose(&g).unwrap().is_identity());
        }
    }
}
