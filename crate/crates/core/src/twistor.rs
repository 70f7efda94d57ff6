//! The twistor sphere: SU(2) action on 2-forms, the invariance criterion and
//! Hodge-locus scans.
//!
//! For a unit imaginary direction `q = (a, b, c)` the structure `J_q` acts as
//! the distinguished complex structure on `E` and as `aI + bJ + cK` on `F`. A
//! real 2-form is of type (1,1) for `J_q` exactly when it is `J_q`-invariant,
//! so the Hodge locus of a class is the zero set of a smooth residual on the
//! sphere. The scan samples a deterministic Fibonacci grid, classifies the
//! locus as FULL when the residual vanishes everywhere, and otherwise refines
//! grid minima by Gauss-Newton iteration on the sphere.

use crate::cohomology::{CohomologyError, TwoForm};
use crate::hyperhermitian::{HyperError, HyperHermitianStructure};
use crate::tol::{DELTA_SEP, EPS_NUM, TAU_FULL, TAU_ROOT, TAU_SEED};
use nalgebra::DMatrix;
use rayon::prelude::*;
use thiserror::Error;

/// Errors from twistor-sphere computations.
#[derive(Debug, Error)]
pub enum TwistorError {
    #[error("the zero form has no Hodge type")]
    ZeroForm,
    #[error("quaternion has norm {norm}, expected 1")]
    NonUnitQuaternion { norm: f64 },
    #[error("scan grid of {got} points is too coarse, need at least {min}")]
    GridTooSmall { got: usize, min: usize },
    #[error(transparent)]
    Hyper(#[from] HyperError),
    #[error(transparent)]
    Cohomology(#[from] CohomologyError),
}

/// A point of the twistor sphere: unit vector `(a, b, c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwistorPoint {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl TwistorPoint {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self, TwistorError> {
        let norm = (a * a + b * b + c * c).sqrt();
        if (norm - 1.0).abs() > EPS_NUM {
            return Err(TwistorError::NonUnitQuaternion { norm });
        }
        Ok(Self { a, b, c })
    }

    pub fn coords(&self) -> [f64; 3] {
        [self.a, self.b, self.c]
    }

    pub fn antipode(&self) -> Self {
        Self {
            a: -self.a,
            b: -self.b,
            c: -self.c,
        }
    }

    fn dist(&self, other: &Self) -> f64 {
        ((self.a - other.a).powi(2) + (self.b - other.b).powi(2) + (self.c - other.c).powi(2))
            .sqrt()
    }
}

/// Locus classification: the whole sphere, finitely many points, or nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocusClass {
    Full,
    Finite,
    Empty,
}

impl std::fmt::Display for LocusClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LocusClass::Full => write!(f, "FULL"),
            LocusClass::Finite => write!(f, "FINITE"),
            LocusClass::Empty => write!(f, "EMPTY"),
        }
    }
}

/// Result of a Hodge-locus scan.
#[derive(Debug, Clone)]
pub struct LocusReport {
    pub classification: LocusClass,
    pub points: Vec<TwistorPoint>,
    pub min_residual: f64,
    pub max_residual: f64,
    pub grid_size: usize,
    /// Residual per grid point, aligned with [`twistor_grid`].
    pub residuals: Vec<f64>,
}

/// Deterministic Fibonacci sphere with `n` points. The polar axis is the
/// first coordinate and both poles `(±1, 0, 0)` are grid points.
pub fn twistor_grid(n: usize) -> Vec<TwistorPoint> {
    assert!(n >= 2, "grid needs at least the two poles");
    let golden_angle = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
    (0..n)
        .map(|i| {
            let a = 1.0 - 2.0 * i as f64 / (n - 1) as f64;
            let r = (1.0 - a * a).max(0.0).sqrt();
            let phi = golden_angle * i as f64;
            TwistorPoint {
                a,
                b: r * phi.cos(),
                c: r * phi.sin(),
            }
        })
        .collect()
}

/// Relative deviation of `α` from type (1,1) with respect to `J_q`:
/// `‖J_qᵀ A J_q - A‖_F / ‖A‖_F`.
pub fn hodge_residual(alpha: &TwoForm, j_q: &DMatrix<f64>) -> Result<f64, TwistorError> {
    let a = alpha.matrix();
    let norm = a.norm();
    if norm == 0.0 {
        return Err(TwistorError::ZeroForm);
    }
    Ok((j_q.transpose() * a * j_q - a).norm() / norm)
}

/// Kähler form `g(J_q ·, ·)` of the twistor structure at `q`.
pub fn kahler_form(h: &HyperHermitianStructure, q: &TwistorPoint) -> Result<TwoForm, TwistorError> {
    let j_q = h.twistor_structure(q.coords())?;
    Ok(TwoForm::from_real(j_q.transpose() * h.metric())?)
}

/// The `E`-supported Kähler form: `g` paired with the complex structure on
/// `E`, extended by zero on `F`.
pub fn e_block_kahler_form(h: &HyperHermitianStructure) -> Result<TwoForm, TwistorError> {
    let dim = h.dim();
    let proj_e = DMatrix::identity(dim, dim) - h.proj_f();
    let m = proj_e.transpose() * h.cplx().transpose() * h.metric() * proj_e;
    Ok(TwoForm::from_real(m)?)
}

/// Pullback of `α` by the inverse of the SU(2) element `u = w + xi + yj + zk`
/// acting as the identity on `E` and through the quaternion module structure
/// on `F`.
pub fn su2_apply(
    h: &HyperHermitianStructure,
    alpha: &TwoForm,
    u: [f64; 4],
) -> Result<TwoForm, TwistorError> {
    let norm = (u.iter().map(|x| x * x).sum::<f64>()).sqrt();
    if (norm - 1.0).abs() > EPS_NUM {
        return Err(TwistorError::NonUnitQuaternion { norm });
    }
    let dim = h.dim();
    let proj_e = DMatrix::identity(dim, dim) - h.proj_f();
    let u_inv =
        &proj_e + h.proj_f() * u[0] - h.i_ext() * u[1] - h.j_ext() * u[2] - h.k_ext() * u[3];
    let pulled = u_inv.transpose() * alpha.matrix() * &u_inv;
    Ok(TwoForm::from_real(pulled)?)
}

/// Infinitesimal SU(2)-invariance: the Lie derivatives of `α` along the three
/// generators `0_E ⊕ I`, `0_E ⊕ J`, `0_E ⊕ K` must all vanish.
pub fn su2_invariance_test(
    h: &HyperHermitianStructure,
    alpha: &TwoForm,
) -> Result<bool, TwistorError> {
    let a = alpha.matrix();
    let norm = a.norm();
    if norm == 0.0 {
        return Err(TwistorError::ZeroForm);
    }
    for u in [h.i_ext(), h.j_ext(), h.k_ext()] {
        let lie = u.transpose() * a + a * u;
        if lie.norm() / norm > TAU_FULL {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Affine decomposition `J_q = C0 + a·X1 + b·X2 + c·X3`.
struct TwistorFamily {
    c0: DMatrix<f64>,
    x: [DMatrix<f64>; 3],
    alpha: DMatrix<f64>,
    alpha_norm: f64,
}

impl TwistorFamily {
    fn new(h: &HyperHermitianStructure, alpha: &TwoForm) -> Result<Self, TwistorError> {
        let alpha_norm = alpha.matrix().norm();
        if alpha_norm == 0.0 {
            return Err(TwistorError::ZeroForm);
        }
        Ok(Self {
            c0: h.cplx() - h.i_ext(),
            x: [h.i_ext().clone(), h.j_ext().clone(), h.k_ext().clone()],
            alpha: alpha.matrix().clone(),
            alpha_norm,
        })
    }

    fn j_q(&self, q: [f64; 3]) -> DMatrix<f64> {
        &self.c0 + &self.x[0] * q[0] + &self.x[1] * q[1] + &self.x[2] * q[2]
    }

    fn residual(&self, q: [f64; 3]) -> f64 {
        let j = self.j_q(q);
        (j.transpose() * &self.alpha * j - &self.alpha).norm() / self.alpha_norm
    }

    /// Gauss-Newton on the sphere, quadratically convergent near simple
    /// zeros of the residual.
    fn refine(&self, start: [f64; 3]) -> Option<(TwistorPoint, f64)> {
        let normalize = |q: [f64; 3]| -> [f64; 3] {
            let n = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt();
            [q[0] / n, q[1] / n, q[2] / n]
        };
        let mut q = normalize(start);
        for _ in 0..60 {
            let j = self.j_q(q);
            let m = j.transpose() * &self.alpha * &j - &self.alpha;
            let r = m.norm() / self.alpha_norm;
            if r <= TAU_ROOT * 1e-3 {
                break;
            }
            // orthonormal tangent frame at q
            let pivot = if q[0].abs() <= q[1].abs() && q[0].abs() <= q[2].abs() {
                [1.0, 0.0, 0.0]
            } else if q[1].abs() <= q[2].abs() {
                [0.0, 1.0, 0.0]
            } else {
                [0.0, 0.0, 1.0]
            };
            let cross = |u: [f64; 3], v: [f64; 3]| {
                [
                    u[1] * v[2] - u[2] * v[1],
                    u[2] * v[0] - u[0] * v[2],
                    u[0] * v[1] - u[1] * v[0],
                ]
            };
            let t1 = normalize(cross(pivot, q));
            let t2 = cross(q, t1);
            let dir_derivative = |t: [f64; 3]| {
                let dj = &self.x[0] * t[0] + &self.x[1] * t[1] + &self.x[2] * t[2];
                dj.transpose() * &self.alpha * &j + j.transpose() * &self.alpha * dj
            };
            let d1 = dir_derivative(t1);
            let d2 = dir_derivative(t2);
            let (a11, a12, a22) = (d1.dot(&d1), d1.dot(&d2), d2.dot(&d2));
            let (b1, b2) = (-d1.dot(&m), -d2.dot(&m));
            let det = a11 * a22 - a12 * a12;
            let ridge = 1e-14 * (a11 + a22).max(1e-300);
            let (s1, s2) = if det.abs() < ridge * ridge {
                return None; // flat direction, not an isolated zero
            } else {
                ((b1 * a22 - b2 * a12) / det, (b2 * a11 - b1 * a12) / det)
            };
            let clamp = 0.5f64 / (s1 * s1 + s2 * s2).sqrt().max(0.5);
            q = normalize([
                q[0] + clamp * (s1 * t1[0] + s2 * t2[0]),
                q[1] + clamp * (s1 * t1[1] + s2 * t2[1]),
                q[2] + clamp * (s1 * t1[2] + s2 * t2[2]),
            ]);
        }
        let r = self.residual(q);
        if r <= TAU_ROOT {
            Some((
                TwistorPoint {
                    a: q[0],
                    b: q[1],
                    c: q[2],
                },
                r,
            ))
        } else {
            None
        }
    }
}

/// Index offsets of candidate grid neighbours: on a Fibonacci sphere the
/// nearest neighbours sit at Fibonacci index distances.
fn fibonacci_offsets(n: usize) -> Vec<usize> {
    let mut offs = vec![1usize, 2];
    let (mut a, mut b) = (2usize, 3usize);
    while b < n {
        offs.push(b);
        let next = a + b;
        a = b;
        b = next;
    }
    offs
}

/// Scans the Hodge locus `{q : α ∈ H^{1,1}(X_q)}` over the twistor sphere.
///
/// FULL when the residual stays below [`TAU_FULL`] on the whole grid;
/// otherwise grid local minima are refined on the sphere and accepted at
/// [`TAU_ROOT`], deduplicated at separation [`DELTA_SEP`]. Minima above
/// [`TAU_SEED`] are normally discarded, but the few smallest ones are always
/// refined so that roots between grid points are still located; antipodes of
/// accepted points are polished as well. An empty refined set yields EMPTY.
pub fn scan_locus(
    h: &HyperHermitianStructure,
    alpha: &TwoForm,
    grid_size: usize,
) -> Result<LocusReport, TwistorError> {
    if grid_size < 100 {
        return Err(TwistorError::GridTooSmall {
            got: grid_size,
            min: 100,
        });
    }
    let family = TwistorFamily::new(h, alpha)?;
    let grid = twistor_grid(grid_size);
    let residuals: Vec<f64> = grid
        .par_iter()
        .map(|p| family.residual(p.coords()))
        .collect();
    let max_residual = residuals.iter().cloned().fold(0.0f64, f64::max);
    let min_residual = residuals.iter().cloned().fold(f64::INFINITY, f64::min);
    if max_residual <= TAU_FULL {
        return Ok(LocusReport {
            classification: LocusClass::Full,
            points: Vec::new(),
            min_residual,
            max_residual,
            grid_size,
            residuals,
        });
    }

    let offsets = fibonacci_offsets(grid_size);
    let mut minima: Vec<usize> = (0..grid_size)
        .into_par_iter()
        .filter(|&i| {
            offsets.iter().all(|&f| {
                let mut ok = true;
                if i >= f {
                    ok &= residuals[i] <= residuals[i - f];
                }
                if i + f < grid_size {
                    ok &= residuals[i] <= residuals[i + f];
                }
                ok
            })
        })
        .collect();
    minima.sort_by(|&x, &y| {
        residuals[x]
            .partial_cmp(&residuals[y])
            .unwrap()
            .then(x.cmp(&y))
    });

    const RESCUE: usize = 8;
    let seeds: Vec<usize> = minima
        .iter()
        .enumerate()
        .filter(|&(rank, &i)| residuals[i] <= TAU_SEED || rank < RESCUE)
        .map(|(_, &i)| i)
        .collect();

    let mut accepted: Vec<(TwistorPoint, f64)> = Vec::new();
    for &i in &seeds {
        if let Some(found) = family.refine(grid[i].coords()) {
            let anti = family.refine(found.0.antipode().coords());
            accepted.push(found);
            if let Some(anti) = anti {
                accepted.push(anti);
            }
        }
    }
    accepted.sort_by(|x, y| x.1.partial_cmp(&y.1).unwrap());
    let mut points: Vec<TwistorPoint> = Vec::new();
    for (p, _) in &accepted {
        if points.iter().all(|kept| kept.dist(p) >= DELTA_SEP) {
            points.push(*p);
        }
    }
    points.sort_by(|x, y| (x.a, x.b, x.c).partial_cmp(&(y.a, y.b, y.c)).unwrap());
    let classification = if points.is_empty() {
        LocusClass::Empty
    } else {
        LocusClass::Finite
    };
    Ok(LocusReport {
        classification,
        points,
        min_residual,
        max_residual,
        grid_size,
        residuals,
    })
}

/// Coefficient of `α ∧ β` against the volume element of a 4-dimensional
/// space; the wedge pairing entering the intersection form.
pub fn wedge_top_4(alpha: &TwoForm, beta: &TwoForm) -> f64 {
    let (a, b) = (alpha.matrix(), beta.matrix());
    assert_eq!(
        a.nrows(),
        4,
        "wedge pairing implemented for rank-4 lattices"
    );
    a[(0, 1)] * b[(2, 3)] - a[(0, 2)] * b[(1, 3)] + a[(0, 3)] * b[(1, 2)] + a[(1, 2)] * b[(0, 3)]
        - a[(1, 3)] * b[(0, 2)]
        + a[(2, 3)] * b[(0, 1)]
}
