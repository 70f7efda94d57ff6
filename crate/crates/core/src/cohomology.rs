//! Cohomological invariants of `X = T/G`: Betti numbers, Hodge numbers,
//! invariant rational 2-forms and the non-algebraic-deformation obstruction.
//!
//! Rational cohomology of the quotient is the `G`-invariant part of the
//! exterior algebra on `H¹(T, Q)`, so Betti numbers are exact character sums
//! over the rotation group. Hodge numbers need complex eigenvalue data and are
//! floating, rounded to integers under a strict tolerance; the exact Betti
//! sums double as a consistency check on the rounding.

use crate::crystal::{self, CrystalError, FlatKahlerData};
use crate::exact::{self, ExactError, Rat, RationalMatrix};
use crate::numeric::{inf_norm, rat_mat_to_f64};
use crate::tol::{EPS_NUM, EPS_ROUND};
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Errors from cohomology computations.
#[derive(Debug, Error)]
pub enum CohomologyError {
    /// An exact character sum failed to be an integer; indicates broken
    /// closure data.
    #[error("character sum for b_{degree} is not an integer: {value}")]
    NonIntegralInvariant { degree: usize, value: String },
    /// A floating Hodge entry was too far from an integer.
    #[error("h^{{{p},{q}}} = {value} is not within {tolerance} of an integer")]
    RoundingFailure {
        p: usize,
        q: usize,
        value: f64,
        tolerance: f64,
    },
    /// Rounded Hodge numbers contradict the exact Betti numbers or the
    /// diamond symmetries.
    #[error("hodge diamond inconsistency: {0}")]
    Inconsistent(String),
    /// A 2-form failed its skew-symmetry invariant.
    #[error("matrix is not skew-symmetric (residual {residual:e})")]
    NotSkew { residual: f64 },
    #[error(transparent)]
    Crystal(#[from] CrystalError),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// A real 2-form on the lattice span, `α(x, y) = xᵀ A y` with `A` skew. Forms
/// arising from exact computations carry their rational matrix as well.
#[derive(Debug, Clone)]
pub struct TwoForm {
    matrix: DMatrix<f64>,
    rational: Option<RationalMatrix>,
}

impl TwoForm {
    /// Floating form; skewness is enforced up to [`EPS_NUM`] and the matrix is
    /// re-skewed to kill roundoff.
    pub fn from_real(matrix: DMatrix<f64>) -> Result<Self, CohomologyError> {
        let residual = inf_norm(&(&matrix + matrix.transpose()));
        if residual > EPS_NUM {
            return Err(CohomologyError::NotSkew { residual });
        }
        let skew = (&matrix - matrix.transpose()) * 0.5;
        Ok(Self {
            matrix: skew,
            rational: None,
        })
    }

    /// Exact rational form; skewness is checked exactly.
    pub fn from_rational(matrix: RationalMatrix) -> Result<Self, CohomologyError> {
        if matrix.transpose().add(&matrix).is_zero() {
            let real = rat_mat_to_f64(&matrix);
            Ok(Self {
                matrix: real,
                rational: Some(matrix),
            })
        } else {
            Err(CohomologyError::NotSkew { residual: f64::NAN })
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn rational(&self) -> Option<&RationalMatrix> {
        self.rational.as_ref()
    }

    pub fn is_rational(&self) -> bool {
        self.rational.is_some()
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Exact integer combination of rational forms.
    pub fn integer_combination(basis: &[TwoForm], coeffs: &[i64]) -> Result<Self, CohomologyError> {
        assert_eq!(basis.len(), coeffs.len());
        assert!(!basis.is_empty());
        let dim = basis[0].dim();
        let mut acc = RationalMatrix::zeros(dim, dim);
        for (form, &c) in basis.iter().zip(coeffs) {
            let rational = form
                .rational()
                .expect("integer combinations need rational basis forms");
            acc = acc.add(&rational.scale(&exact::rat_int(c)));
        }
        Self::from_rational(acc)
    }
}

/// Hodge numbers `h^{p,q}` with the Betti vector they must sum to.
#[derive(Debug, Clone)]
pub struct HodgeDiamond {
    pub h: Vec<Vec<u64>>,
    pub b: Vec<u64>,
}

impl HodgeDiamond {
    /// Validates the diamond symmetries and the row sums against `b`.
    pub fn new(h: Vec<Vec<u64>>, b: Vec<u64>) -> Result<Self, CohomologyError> {
        let n = h.len() - 1;
        if b.len() != 2 * n + 1 {
            return Err(CohomologyError::Inconsistent(format!(
                "betti vector has length {}, expected {}",
                b.len(),
                2 * n + 1
            )));
        }
        for k in 0..=2 * n {
            let sum: u64 = (0..=n)
                .filter_map(|p| k.checked_sub(p).filter(|q| *q <= n).map(|q| h[p][q]))
                .sum();
            if sum != b[k] {
                return Err(CohomologyError::Inconsistent(format!(
                    "sum of h^{{p,q}} over p+q={k} is {sum}, but b_{k} = {}",
                    b[k]
                )));
            }
            if b[k] != b[2 * n - k] {
                return Err(CohomologyError::Inconsistent(format!(
                    "b_{k} = {} differs from b_{} = {}",
                    b[k],
                    2 * n - k,
                    b[2 * n - k]
                )));
            }
        }
        for p in 0..=n {
            for q in 0..=n {
                if h[p][q] != h[q][p] {
                    return Err(CohomologyError::Inconsistent(format!(
                        "h^{{{p},{q}}} = {} differs from h^{{{q},{p}}} = {}",
                        h[p][q], h[q][p]
                    )));
                }
            }
        }
        Ok(Self { h, b })
    }

    pub fn n(&self) -> usize {
        self.h.len() - 1
    }

    pub fn h20(&self) -> u64 {
        if self.n() >= 2 {
            self.h[2][0]
        } else {
            0
        }
    }
}

/// Betti numbers `b_0..b_{2n}` as exact character sums over the rotation
/// group, asserted integral.
pub fn betti_numbers(data: &FlatKahlerData) -> Result<Vec<u64>, CohomologyError> {
    let closure = data.closure()?;
    let rank = data.rank();
    let mut sums = vec![Rat::zero(); rank + 1];
    for g in &closure {
        let coeffs = exact::char_poly_exterior_int(g.rotation());
        for (k, c) in coeffs.iter().enumerate() {
            sums[k] += c;
        }
    }
    (0..=rank)
        .map(|k| character_average(&sums[k], closure.len(), k))
        .collect()
}

fn character_average(sum: &Rat, order: usize, degree: usize) -> Result<u64, CohomologyError> {
    let value = sum / Rat::from_integer(BigInt::from(order));
    if !value.is_integer() || value.is_negative() {
        return Err(CohomologyError::NonIntegralInvariant {
            degree,
            value: value.to_string(),
        });
    }
    Ok(value.to_integer().to_u64().expect("betti number fits u64"))
}

/// A single Betti number. For `k ∈ {0, 1, 2n-1, 2n}` the character sum only
/// involves traces and determinants and avoids the full exterior character
/// polynomial, which matters for large-rank doubles.
pub fn betti_number(data: &FlatKahlerData, k: usize) -> Result<u64, CohomologyError> {
    let rank = data.rank();
    assert!(k <= rank, "degree exceeds the real dimension");
    let int_trace = |r: &crate::exact::IntMatrix| {
        let mut acc = BigInt::zero();
        for i in 0..r.rows() {
            acc += r.get(i, i);
        }
        acc
    };
    let closure = data.closure()?;
    let sum: Rat = closure
        .iter()
        .map(|g| {
            let r = g.rotation();
            match k {
                0 => Rat::one(),
                1 => Rat::from_integer(int_trace(r)),
                _ if k == rank => Rat::from_integer(r.det()),
                // trace(Λ^{2n-1} r) = det(r) · trace(r^{-1})
                _ if k == rank - 1 => {
                    let inv = r.inverse_unimodular().expect("rotations are unimodular");
                    Rat::from_integer(r.det() * int_trace(&inv))
                }
                _ => exact::char_poly_exterior_int(r)[k].clone(),
            }
        })
        .sum();
    character_average(&sum, closure.len(), k)
}

/// Elementary symmetric functions `e_0..e_n` of the eigenvalues of `m`,
/// computed from power traces by Newton's identities.
fn elementary_symmetric(m: &DMatrix<Complex<f64>>) -> Vec<Complex<f64>> {
    let n = m.nrows();
    let mut powers = Vec::with_capacity(n);
    let mut acc = m.clone();
    for _ in 0..n {
        powers.push(acc.trace());
        acc = &acc * m;
    }
    let mut e = vec![Complex::new(0.0, 0.0); n + 1];
    e[0] = Complex::new(1.0, 0.0);
    for k in 1..=n {
        let mut sum = Complex::new(0.0, 0.0);
        for i in 1..=k {
            let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
            sum += e[k - i] * powers[i - 1] * sign;
        }
        e[k] = sum / k as f64;
    }
    e
}

fn rounded_hodge_entry(value: Complex<f64>, p: usize, q: usize) -> Result<u64, CohomologyError> {
    let rounded = value.re.round();
    if (value.re - rounded).abs() > EPS_ROUND || value.im.abs() > EPS_ROUND || rounded < 0.0 {
        return Err(CohomologyError::RoundingFailure {
            p,
            q,
            value: value.re,
            tolerance: EPS_ROUND,
        });
    }
    Ok(rounded as u64)
}

/// Hodge numbers of the quotient: `h^{p,q}` is the average over the group of
/// `e_p(μ(g)) · conj(e_q(μ(g)))`, where `μ(g)` are the eigenvalues of the
/// complex rotation of the inverse element (the action on forms). The exact
/// Betti numbers double as a cross-check on the rounding.
pub fn hodge_numbers(data: &FlatKahlerData) -> Result<HodgeDiamond, CohomologyError> {
    let closure = data.closure()?;
    let n = data.n();
    let mut acc = vec![vec![Complex::new(0.0, 0.0); n + 1]; n + 1];
    for g in &closure {
        let r_inv = crystal::complex_rotation(data, &g.inverse())?;
        let e = elementary_symmetric(&r_inv);
        for p in 0..=n {
            for q in 0..=n {
                acc[p][q] += e[p] * e[q].conj();
            }
        }
    }
    let order = closure.len() as f64;
    let mut h = vec![vec![0u64; n + 1]; n + 1];
    for p in 0..=n {
        for q in 0..=n {
            h[p][q] = rounded_hodge_entry(acc[p][q] / order, p, q)?;
        }
    }
    HodgeDiamond::new(h, betti_numbers(data)?)
}

/// A single Hodge number `h^{p,q}`, rounded under the same tolerance as the
/// full diamond but without the Betti cross-check.
pub fn hodge_number(data: &FlatKahlerData, p: usize, q: usize) -> Result<u64, CohomologyError> {
    let n = data.n();
    assert!(p <= n && q <= n, "indices exceed the complex dimension");
    let closure = data.closure()?;
    let mut acc = Complex::new(0.0, 0.0);
    for g in &closure {
        let r_inv = crystal::complex_rotation(data, &g.inverse())?;
        let e = elementary_symmetric(&r_inv);
        acc += e[p] * e[q].conj();
    }
    rounded_hodge_entry(acc / closure.len() as f64, p, q)
}

/// Lexicographic list of index pairs `(i, j)`, `i < j`, for the skew basis.
fn skew_pairs(rank: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(rank * (rank - 1) / 2);
    for i in 0..rank {
        for j in (i + 1)..rank {
            pairs.push((i, j));
        }
    }
    pairs
}

/// Exact rational basis of the `G`-invariant skew 2-forms, computed from the
/// averaging projector of the induced action on the second exterior power.
/// The basis size equals `b_2`.
pub fn invariant_two_forms(data: &FlatKahlerData) -> Result<Vec<TwoForm>, CohomologyError> {
    let closure = data.closure()?;
    let rank = data.rank();
    let pairs = skew_pairs(rank);
    let m = pairs.len();
    // Pullback action on skew forms: A -> rᵀ A r, expressed on the pair basis.
    let rep: Vec<RationalMatrix> = closure
        .iter()
        .map(|g| {
            let r = g.rotation();
            RationalMatrix::from_fn(m, m, |row, col| {
                let (k, l) = pairs[row];
                let (i, j) = pairs[col];
                Rat::from_integer(r.get(i, k) * r.get(j, l) - r.get(j, k) * r.get(i, l))
            })
        })
        .collect();
    let projector = exact::reynolds_projector(&rep)?;
    let fixed = exact::kernel(&RationalMatrix::identity(m).sub(&projector));
    let mut forms = Vec::with_capacity(fixed.len());
    for v in fixed {
        // Clear to a primitive integer vector for readable output.
        let mut lcm = BigInt::one();
        for x in &v {
            lcm = num_integer::lcm(lcm, x.denom().clone());
        }
        let ints: Vec<BigInt> = v
            .iter()
            .map(|x| (x * Rat::from_integer(lcm.clone())).to_integer())
            .collect();
        let mut gcd = BigInt::zero();
        for x in &ints {
            gcd = gcd.gcd(x);
        }
        if gcd.is_zero() {
            gcd = BigInt::one();
        }
        let mut a = RationalMatrix::zeros(rank, rank);
        for (idx, (i, j)) in pairs.iter().enumerate() {
            let value = Rat::from_integer(&ints[idx] / &gcd);
            a.set(*i, *j, value.clone());
            a.set(*j, *i, -value);
        }
        forms.push(TwoForm::from_rational(a)?);
    }
    Ok(forms)
}

/// Basis of the real parts of holomorphic 2-forms: the `G`-invariant skew
/// forms that are anti-invariant under the complex structure,
/// `σ₁(Jx, Jy) = -σ₁(x, y)`. The basis has dimension `2·h^{2,0}`.
pub fn holomorphic_two_forms(data: &FlatKahlerData) -> Result<Vec<TwoForm>, CohomologyError> {
    let invariant = invariant_two_forms(data)?;
    if invariant.is_empty() {
        return Ok(Vec::new());
    }
    let j = data.cplx();
    let rank = data.rank();
    let k = invariant.len();
    let columns: Vec<DMatrix<f64>> = invariant.iter().map(|f| f.matrix().clone()).collect();
    let stacked = DMatrix::from_fn(rank * rank, k, |row, col| {
        columns[col][(row / rank, row % rank)]
    });
    let svd = stacked.clone().svd(true, true);
    // Pullback by J expressed in the coordinates of the invariant basis.
    let mut t = DMatrix::zeros(k, k);
    for (col, a) in columns.iter().enumerate() {
        let pulled = j.transpose() * a * j;
        let vec = DMatrix::from_fn(rank * rank, 1, |row, _| pulled[(row / rank, row % rank)]);
        let coeffs = svd
            .solve(&vec, 1e-12)
            .expect("invariant basis is linearly independent");
        t.set_column(col, &coeffs.column(0));
    }
    // Anti-invariant directions span the kernel of Id + T (T is an involution,
    // so the spectrum is ±1 and the kernel is numerically clean).
    let kernel = crate::numeric::svd_kernel_basis(&(DMatrix::identity(k, k) + t), 1e-6);
    let mut forms = Vec::with_capacity(kernel.ncols());
    for c in 0..kernel.ncols() {
        let mut a = DMatrix::zeros(rank, rank);
        for (idx, col) in columns.iter().enumerate() {
            a += col * kernel[(idx, c)];
        }
        let anti_residual = inf_norm(&(j.transpose() * &a * j + &a));
        debug_assert!(anti_residual <= 1e-6 * inf_norm(&a).max(1.0));
        forms.push(TwoForm::from_real(a)?);
    }
    // Cross-check the dimension against the Hodge diamond.
    let diamond = hodge_numbers(data)?;
    if forms.len() as u64 != 2 * diamond.h20() {
        return Err(CohomologyError::Inconsistent(format!(
            "found {} anti-invariant directions, expected 2·h^{{2,0}} = {}",
            forms.len(),
            2 * diamond.h20()
        )));
    }
    Ok(forms)
}

/// `true` iff `h^{2,0} > 0`, i.e. the manifold carries a nonzero holomorphic
/// 2-form and therefore admits a non-algebraic deformation; `false` means
/// every deformation is algebraic.
pub fn obstruction_verdict(data: &FlatKahlerData) -> Result<bool, CohomologyError> {
    Ok(hodge_numbers(data)?.h20() > 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crystal::AffineIsometry;
    use crate::exact::{rat, IntMatrix};
    use crate::numeric::blockdiag;

    fn standard_j(n: usize) -> DMatrix<f64> {
        let mut j = DMatrix::zeros(2 * n, 2 * n);
        for k in 0..n {
            j[(k, n + k)] = -1.0;
            j[(n + k, k)] = 1.0;
        }
        j
    }

    fn curve_j(re: f64, im: f64) -> DMatrix<f64> {
        let p = DMatrix::from_row_slice(2, 2, &[1.0, re, 0.0, im]);
        let s = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        &p.clone().try_inverse().unwrap() * s * p
    }

    fn bielliptic_data() -> FlatKahlerData {
        let j = blockdiag(&[&curve_j(0.23, 1.42), &curve_j(0.31, 0.97)]);
        let g = AffineIsometry::new(
            IntMatrix::from_i64_rows(&[
                &[-1, 0, 0, 0],
                &[0, -1, 0, 0],
                &[0, 0, 1, 0],
                &[0, 0, 0, 1],
            ]),
            vec![Rat::zero(), Rat::zero(), rat(1, 2), Rat::zero()],
        )
        .unwrap();
        FlatKahlerData::new(2, j, vec![g], "bielliptic-test").unwrap()
    }

    #[test]
    fn torus_betti_is_binomial_row() {
        let data = FlatKahlerData::torus(2, standard_j(2), "t2").unwrap();
        assert_eq!(betti_numbers(&data).unwrap(), vec![1, 4, 6, 4, 1]);
        // independent of the complex structure
        let skew = blockdiag(&[&curve_j(0.1, 2.3), &curve_j(0.7, 0.6)]);
        let data = FlatKahlerData::torus(2, skew, "t2-generic").unwrap();
        assert_eq!(betti_numbers(&data).unwrap(), vec![1, 4, 6, 4, 1]);
    }

    #[test]
    fn bielliptic_betti_and_hodge() {
        let data = bielliptic_data();
        let b = betti_numbers(&data).unwrap();
        assert_eq!(b, vec![1, 2, 2, 2, 1]);
        let d = hodge_numbers(&data).unwrap();
        assert_eq!(d.h[1][0], 1);
        assert_eq!(d.h[2][0], 0);
        assert_eq!(d.h[1][1], 2);
        assert!(!obstruction_verdict(&data).unwrap());
    }

    #[test]
    fn torus_hodge_is_binomial_product() {
        for n in 1..=3 {
            let data = FlatKahlerData::torus(n, standard_j(n), "t").unwrap();
            let d = hodge_numbers(&data).unwrap();
            let binom =
                |n: u64, k: u64| -> u64 { (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1)) };
            for p in 0..=n {
                for q in 0..=n {
                    assert_eq!(
                        d.h[p][q],
                        binom(n as u64, p as u64) * binom(n as u64, q as u64)
                    );
                }
            }
        }
        let t2 = FlatKahlerData::torus(2, standard_j(2), "t2").unwrap();
        assert!(obstruction_verdict(&t2).unwrap());
    }

    #[test]
    fn invariant_forms_count_matches_b2() {
        let t1 = FlatKahlerData::torus(1, standard_j(1), "t1").unwrap();
        assert_eq!(invariant_two_forms(&t1).unwrap().len(), 1);

        let t2 = FlatKahlerData::torus(2, standard_j(2), "t2").unwrap();
        assert_eq!(invariant_two_forms(&t2).unwrap().len(), 6);

        let bi = bielliptic_data();
        let forms = invariant_two_forms(&bi).unwrap();
        assert_eq!(forms.len() as u64, betti_numbers(&bi).unwrap()[2]);
        // every basis form is exactly G-invariant
        let closure = bi.closure().unwrap();
        for f in &forms {
            let a = f.rational().unwrap();
            for g in &closure {
                let r = g.rotation().to_rational();
                assert_eq!(r.transpose().mul(a).mul(&r), a.clone());
            }
        }
    }

    #[test]
    fn holomorphic_forms_on_tori() {
        let t1 = FlatKahlerData::torus(1, standard_j(1), "t1").unwrap();
        assert!(holomorphic_two_forms(&t1).unwrap().is_empty());

        let t2 = FlatKahlerData::torus(2, standard_j(2), "t2").unwrap();
        let forms = holomorphic_two_forms(&t2).unwrap();
        assert_eq!(forms.len(), 2);
        let j = t2.cplx();
        for f in &forms {
            let a = f.matrix();
            // anti-invariance and the (2,0) reconstruction identity
            assert!(inf_norm(&(j.transpose() * a * j + a)) <= EPS_NUM);
            let sigma2 = -(j.transpose() * a);
            assert!(inf_norm(&(j.transpose() * &sigma2 - a)) <= EPS_NUM);
            assert!(inf_norm(&(&sigma2 + sigma2.transpose())) <= EPS_NUM);
        }
    }

    #[test]
    fn bielliptic_holomorphic_forms_vanish() {
        assert!(holomorphic_two_forms(&bielliptic_data())
            .unwrap()
            .is_empty());
    }
}
