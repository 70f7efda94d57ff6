//! Equivariant hyper-Hermitian synthesis from a holomorphic 2-form.
//!
//! Given `X = T/G` and the real part `σ₁` of a holomorphic 2-form, this
//! module splits the tangent space as `E ⊕ F` (kernel and complement of the
//! form), produces on `F` a metric `g_F` and an anticommuting complex
//! structure `J_F` via the operator `A = h₁⁻¹σ₁` and the spectral square
//! root `S = (-A²)^{-1/2}`, and assembles the full-space structure whose
//! twistor operators `J_q` act as the original complex structure on `E` and
//! as `aI + bJ + cK` on `F`.

use crate::cohomology::TwoForm;
use crate::crystal::{CrystalError, FlatKahlerData};
use crate::numeric::{
    blockdiag, hstack, inf_norm, int_mat_to_f64, min_singular_value, stability_residual,
    svd_kernel_basis, symmetric_eigenvalues, vstack,
};
use crate::tol::{EPS_DEG, EPS_NUM};
use nalgebra::DMatrix;
use thiserror::Error;

/// Errors from the synthesis pipeline.
#[derive(Debug, Error)]
pub enum HyperError {
    /// The 2-form restricted to the complement has a singular value at or
    /// below [`EPS_DEG`].
    #[error("form is degenerate on the complement (smallest singular value {min_sv:e})")]
    DegenerateOnComplement { min_sv: f64 },
    /// `A = h₁⁻¹σ₁` fails to anticommute with the complex structure; the
    /// input form is not of type (2,0).
    #[error("operator does not anticommute with the complex structure (residual {residual:e})")]
    NotAntiCommuting { residual: f64 },
    /// `A²` has nonnegative spectrum: the form is degenerate or the metric is
    /// not positive definite.
    #[error("spectrum of A² is not negative definite (worst eigenvalue {value:e})")]
    NonNegativeSpectrum { value: f64 },
    /// The supplied form is not usable: zero, not invariant, or not
    /// anti-invariant under the complex structure.
    #[error("invalid form: {0}")]
    InvalidSigma(String),
    /// Twistor direction must be a unit vector.
    #[error("twistor direction has norm {norm}, expected 1")]
    NonUnitDirection { norm: f64 },
    /// A structural invariant failed after assembly.
    #[error("invariant `{check}` violated with residual {residual:e}")]
    InvariantViolation { check: &'static str, residual: f64 },
    #[error(transparent)]
    Crystal(#[from] CrystalError),
}

/// Orthonormal bases of the kernel subspace `E` and its metric complement `F`.
#[derive(Debug, Clone)]
pub struct Splitting {
    pub e_basis: DMatrix<f64>,
    pub f_basis: DMatrix<f64>,
}

impl Splitting {
    pub fn e_dim(&self) -> usize {
        self.e_basis.ncols()
    }

    pub fn f_dim(&self) -> usize {
        self.f_basis.ncols()
    }
}

/// Spectrum of `A²` (all negative) and its conditioning.
#[derive(Debug, Clone)]
pub struct SpectralReport {
    pub eigenvalues: Vec<f64>,
    pub conditioning: f64,
}

/// Restriction of `(V, I, G, σ₁, h₁)` to the complement `F`, in the
/// coordinates of an orthonormal basis of `F`.
#[derive(Debug, Clone)]
pub struct FBlock {
    pub i_op: DMatrix<f64>,
    pub sigma: DMatrix<f64>,
    pub h1: DMatrix<f64>,
    pub rotations: Vec<DMatrix<f64>>,
}

/// Output of [`synthesize`]: metric and complex structure on `F`.
#[derive(Debug, Clone)]
pub struct Synthesis {
    pub g_f: DMatrix<f64>,
    pub j_f: DMatrix<f64>,
    pub report: SpectralReport,
}

/// Group-averaged `I`-Hermitian metric `h₁` on the lattice span: the standard
/// inner product is Hermitianized against the complex structure and averaged
/// over the closure.
pub fn average_metric(data: &FlatKahlerData) -> Result<DMatrix<f64>, HyperError> {
    let closure = data.closure()?;
    let rank = data.rank();
    let j = data.cplx();
    let h0 = (DMatrix::identity(rank, rank) + j.transpose() * j) * 0.5;
    let mut sum = DMatrix::zeros(rank, rank);
    for g in &closure {
        let r = int_mat_to_f64(g.rotation());
        sum += r.transpose() * &h0 * r;
    }
    let h1 = sum / closure.len() as f64;
    let min_eig = symmetric_eigenvalues(&h1)[0];
    if min_eig <= 0.0 {
        return Err(HyperError::NonNegativeSpectrum { value: -min_eig });
    }
    Ok(h1)
}

fn check_sigma(data: &FlatKahlerData, sigma1: &TwoForm) -> Result<(), HyperError> {
    let a = sigma1.matrix();
    let scale = inf_norm(a);
    if scale == 0.0 {
        return Err(HyperError::InvalidSigma("zero form".to_string()));
    }
    let j = data.cplx();
    let anti = inf_norm(&(j.transpose() * a * j + a));
    if anti > 1e-6 * scale.max(1.0) {
        return Err(HyperError::InvalidSigma(format!(
            "not anti-invariant under the complex structure (residual {anti:e})"
        )));
    }
    for g in data.closure()? {
        let r = int_mat_to_f64(g.rotation());
        let residual = inf_norm(&(r.transpose() * a * r - a));
        if residual > 1e-6 * scale.max(1.0) {
            return Err(HyperError::InvalidSigma(format!(
                "not invariant under the group (residual {residual:e})"
            )));
        }
    }
    Ok(())
}

/// Splits the lattice span as `E ⊕ F` with `E = ker σ₁ ∩ J(ker σ₁)` and `F`
/// the `h₁`-orthogonal complement. Both subspaces are stable under `J` and
/// the group; `σ₁` must restrict nondegenerately to `F`.
pub fn kernel_splitting(
    data: &FlatKahlerData,
    sigma1: &TwoForm,
    h1: &DMatrix<f64>,
) -> Result<Splitting, HyperError> {
    check_sigma(data, sigma1)?;
    let a = sigma1.matrix();
    let j = data.cplx();
    let rank = data.rank();
    let scale = inf_norm(a).max(1.0);
    let stacked = vstack(a, &(a * j));
    let e_basis = svd_kernel_basis(&stacked, 1e-9 * scale);
    let f_basis = if e_basis.ncols() == 0 {
        DMatrix::identity(rank, rank)
    } else {
        svd_kernel_basis(&(e_basis.transpose() * h1), 1e-10 * inf_norm(h1).max(1.0))
    };
    if e_basis.ncols() + f_basis.ncols() != rank {
        return Err(HyperError::InvariantViolation {
            check: "dim E + dim F = 2n",
            residual: (e_basis.ncols() + f_basis.ncols()) as f64 - rank as f64,
        });
    }
    for (name, basis) in [("E", &e_basis), ("F", &f_basis)] {
        let residual = stability_residual(j, basis);
        if residual > 1e-7 * scale {
            return Err(HyperError::InvariantViolation {
                check: if name == "E" {
                    "J-stability of E"
                } else {
                    "J-stability of F"
                },
                residual,
            });
        }
        for g in data.closure()? {
            let r = int_mat_to_f64(g.rotation());
            let residual = stability_residual(&r, basis);
            if residual > 1e-7 * scale * inf_norm(&r).max(1.0) {
                return Err(HyperError::InvariantViolation {
                    check: if name == "E" {
                        "G-stability of E"
                    } else {
                        "G-stability of F"
                    },
                    residual,
                });
            }
        }
    }
    let restricted = f_basis.transpose() * a * &f_basis;
    let min_sv = min_singular_value(&restricted);
    if min_sv <= EPS_DEG {
        return Err(HyperError::DegenerateOnComplement { min_sv });
    }
    Ok(Splitting { e_basis, f_basis })
}

/// Expresses the complex structure, form, metric and rotations in the
/// coordinates of the `F`-basis.
pub fn restrict_to_complement(
    data: &FlatKahlerData,
    sigma1: &TwoForm,
    h1: &DMatrix<f64>,
    splitting: &Splitting,
) -> Result<FBlock, HyperError> {
    let f = &splitting.f_basis;
    let rotations = data
        .closure()?
        .iter()
        .map(|g| f.transpose() * int_mat_to_f64(g.rotation()) * f)
        .collect();
    Ok(FBlock {
        i_op: f.transpose() * data.cplx() * f,
        sigma: f.transpose() * sigma1.matrix() * f,
        h1: f.transpose() * h1 * f,
        rotations,
    })
}

/// Core synthesis on the complement: solves `h₁·A = σ₁`, takes the spectral
/// inverse square root `S` of `-A²` in the `h₁` inner product, and returns
/// `J_F = A·S` together with `g_F(x, y) = h₁(Sx, y)`, normalized so that the
/// metric is invariant under rescaling of the input form.
pub fn synthesize(block: &FBlock) -> Result<Synthesis, HyperError> {
    let n = block.h1.nrows();
    assert!(n > 0, "empty complement");
    let chol = block
        .h1
        .clone()
        .cholesky()
        .ok_or(HyperError::NonNegativeSpectrum { value: 0.0 })?;
    let a = chol.solve(&block.sigma);
    let scale = inf_norm(&a).max(1e-300);
    let anti = inf_norm(&(&a * &block.i_op + &block.i_op * &a));
    if anti > 1e-6 * scale {
        return Err(HyperError::NotAntiCommuting {
            residual: anti / scale,
        });
    }
    // Whitened operator: Â = Lᵀ A L⁻ᵀ is skew, so -Â² is symmetric positive.
    let l = chol.l();
    let l_inv = l
        .solve_lower_triangular(&DMatrix::identity(n, n))
        .expect("Cholesky factor is invertible");
    let a_hat = l.transpose() * &a * l_inv.transpose();
    let sym = -(&a_hat * &a_hat);
    let sym = (&sym + sym.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let max_lambda = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let min_lambda = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if min_lambda <= 1e-12 * max_lambda.max(1e-300) {
        return Err(HyperError::NonNegativeSpectrum { value: -min_lambda });
    }
    let mut alphas: Vec<f64> = eig.eigenvalues.iter().map(|l| -l).collect();
    alphas.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let report = SpectralReport {
        eigenvalues: alphas,
        conditioning: max_lambda / min_lambda,
    };
    let inv_sqrt = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0 / eig.eigenvalues[i].sqrt()
        } else {
            0.0
        }
    });
    let s_hat = &eig.eigenvectors * inv_sqrt * eig.eigenvectors.transpose();
    let s = l_inv.transpose() * &s_hat * l.transpose();
    let j_f = &a * &s;
    // Normalize the metric by the trace of S so that rescaling σ₁ leaves the
    // output fixed.
    let factor = n as f64 / s.trace();
    let g_raw = &block.h1 * &s * factor;
    let g_f = (&g_raw + g_raw.transpose()) * 0.5;
    Ok(Synthesis { g_f, j_f, report })
}

/// Residuals of the synthesis postconditions, all of which should sit at
/// roundoff level for valid input.
#[derive(Debug, Clone)]
pub struct LemmaResiduals {
    pub j_squared: f64,
    pub anticommute: f64,
    pub metric_symmetry: f64,
    pub metric_min_eig: f64,
    pub j_orthogonality: f64,
    pub i_orthogonality: f64,
    pub metric_invariance: f64,
    pub j_invariance: f64,
}

impl LemmaResiduals {
    /// Worst residual over all checks (the minimum eigenvalue is reported
    /// separately and must be positive).
    pub fn max_residual(&self) -> f64 {
        [
            self.j_squared,
            self.anticommute,
            self.metric_symmetry,
            self.j_orthogonality,
            self.i_orthogonality,
            self.metric_invariance,
            self.j_invariance,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Evaluates the full postcondition suite of [`synthesize`].
pub fn verify_synthesis(block: &FBlock, g_f: &DMatrix<f64>, j_f: &DMatrix<f64>) -> LemmaResiduals {
    let n = j_f.nrows();
    let id = DMatrix::identity(n, n);
    let i_op = &block.i_op;
    let mut metric_invariance: f64 = 0.0;
    let mut j_invariance: f64 = 0.0;
    for r in &block.rotations {
        metric_invariance = metric_invariance.max(inf_norm(&(r.transpose() * g_f * r - g_f)));
        j_invariance = j_invariance.max(inf_norm(&(r * j_f - j_f * r)));
    }
    LemmaResiduals {
        j_squared: inf_norm(&(j_f * j_f + &id)),
        anticommute: inf_norm(&(i_op * j_f + j_f * i_op)),
        metric_symmetry: inf_norm(&(g_f - g_f.transpose())),
        metric_min_eig: symmetric_eigenvalues(g_f)[0],
        j_orthogonality: inf_norm(&(j_f.transpose() * g_f * j_f - g_f)),
        i_orthogonality: inf_norm(&(i_op.transpose() * g_f * i_op - g_f)),
        metric_invariance,
        j_invariance,
    }
}

/// The assembled structure: splitting, full-space metric, the distinguished
/// complex structure `I`, and the `F`-block operators `J`, `K` (extended by
/// zero on `E` when a full-space matrix is needed; only the twistor operators
/// `J_q`, which act as `I` on `E`, are exposed on the whole space).
#[derive(Debug, Clone)]
pub struct HyperHermitianStructure {
    dim: usize,
    e_basis: DMatrix<f64>,
    f_basis: DMatrix<f64>,
    metric: DMatrix<f64>,
    cplx: DMatrix<f64>,
    sigma1: TwoForm,
    j_f: DMatrix<f64>,
    k_f: DMatrix<f64>,
    proj_f: DMatrix<f64>,
    i_f_ext: DMatrix<f64>,
    j_ext: DMatrix<f64>,
    k_ext: DMatrix<f64>,
    rotations: Vec<DMatrix<f64>>,
    spectral: SpectralReport,
}

impl HyperHermitianStructure {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn e_dim(&self) -> usize {
        self.e_basis.ncols()
    }

    pub fn f_dim(&self) -> usize {
        self.f_basis.ncols()
    }

    pub fn e_basis(&self) -> &DMatrix<f64> {
        &self.e_basis
    }

    pub fn f_basis(&self) -> &DMatrix<f64> {
        &self.f_basis
    }

    /// Full-space invariant metric `g = g_E ⊕ g_F`.
    pub fn metric(&self) -> &DMatrix<f64> {
        &self.metric
    }

    /// The distinguished complex structure `I` (the one from the data).
    pub fn cplx(&self) -> &DMatrix<f64> {
        &self.cplx
    }

    pub fn sigma1(&self) -> &TwoForm {
        &self.sigma1
    }

    /// `J` in `F`-basis coordinates.
    pub fn j_on_f(&self) -> &DMatrix<f64> {
        &self.j_f
    }

    /// `K = I·J` in `F`-basis coordinates.
    pub fn k_on_f(&self) -> &DMatrix<f64> {
        &self.k_f
    }

    /// Projector onto `F` along `E`.
    pub fn proj_f(&self) -> &DMatrix<f64> {
        &self.proj_f
    }

    /// `I` restricted to `F`, extended by zero on `E`.
    pub fn i_ext(&self) -> &DMatrix<f64> {
        &self.i_f_ext
    }

    /// `J` extended by zero on `E`.
    pub fn j_ext(&self) -> &DMatrix<f64> {
        &self.j_ext
    }

    /// `K` extended by zero on `E`.
    pub fn k_ext(&self) -> &DMatrix<f64> {
        &self.k_ext
    }

    /// Closure rotations as floating matrices.
    pub fn rotations(&self) -> &[DMatrix<f64>] {
        &self.rotations
    }

    pub fn spectral(&self) -> &SpectralReport {
        &self.spectral
    }

    /// Twistor operator `J_q = I on E ⊕ (aI + bJ + cK) on F` for a unit
    /// `q = (a, b, c)`. At `q = (1, 0, 0)` this returns `I` exactly.
    pub fn twistor_structure(&self, q: [f64; 3]) -> Result<DMatrix<f64>, HyperError> {
        let norm = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt();
        if (norm - 1.0).abs() > EPS_NUM {
            return Err(HyperError::NonUnitDirection { norm });
        }
        Ok(&self.cplx + &self.i_f_ext * (q[0] - 1.0) + &self.j_ext * q[1] + &self.k_ext * q[2])
    }
}

fn ensure(check: &'static str, residual: f64, bound: f64) -> Result<(), HyperError> {
    if residual > bound {
        Err(HyperError::InvariantViolation { check, residual })
    } else {
        Ok(())
    }
}

/// Runs the full pipeline: averaged metric, kernel splitting, synthesis on
/// the complement, and assembly of the global structure. All structural
/// invariants are re-checked before the result is returned.
pub fn assemble(
    data: &FlatKahlerData,
    sigma1: &TwoForm,
) -> Result<HyperHermitianStructure, HyperError> {
    let rank = data.rank();
    let h1 = average_metric(data)?;
    let splitting = kernel_splitting(data, sigma1, &h1)?;
    let block = restrict_to_complement(data, sigma1, &h1, &splitting)?;
    let synth = synthesize(&block)?;

    let e = &splitting.e_basis;
    let f = &splitting.f_basis;
    let (e_dim, f_dim) = (splitting.e_dim(), splitting.f_dim());
    let p = hstack(e, f);
    let p_inv = p
        .clone()
        .try_inverse()
        .ok_or(HyperError::InvariantViolation {
            check: "E ⊕ F spans the lattice span",
            residual: f64::INFINITY,
        })?;

    let g_e = e.transpose() * &h1 * e;
    let g_block = blockdiag(&[&g_e, &synth.g_f]);
    let metric = p_inv.transpose() * g_block * &p_inv;
    let metric = (&metric + metric.transpose()) * 0.5;

    let zero_e = DMatrix::zeros(e_dim, e_dim);
    let k_f = &block.i_op * &synth.j_f;
    let extend = |op: &DMatrix<f64>| -> DMatrix<f64> { &p * blockdiag(&[&zero_e, op]) * &p_inv };
    let j_ext = extend(&synth.j_f);
    let k_ext = extend(&k_f);
    let proj_f = extend(&DMatrix::identity(f_dim, f_dim));
    let i_f_ext = data.cplx() * &proj_f;

    let rotations: Vec<DMatrix<f64>> = data
        .closure()?
        .iter()
        .map(|g| int_mat_to_f64(g.rotation()))
        .collect();

    // Postcondition suite on the complement.
    let residuals = verify_synthesis(&block, &synth.g_f, &synth.j_f);
    ensure("J_F² = -Id", residuals.j_squared, EPS_NUM)?;
    ensure("I J_F = -J_F I", residuals.anticommute, EPS_NUM)?;
    ensure("g_F symmetric", residuals.metric_symmetry, EPS_NUM)?;
    ensure("g_F J-Hermitian", residuals.j_orthogonality, EPS_NUM)?;
    ensure("g_F I-Hermitian", residuals.i_orthogonality, EPS_NUM)?;
    ensure("g_F G-invariant", residuals.metric_invariance, EPS_NUM)?;
    ensure("J_F G-equivariant", residuals.j_invariance, EPS_NUM)?;
    if residuals.metric_min_eig <= 0.0 {
        return Err(HyperError::InvariantViolation {
            check: "g_F positive definite",
            residual: -residuals.metric_min_eig,
        });
    }
    // Quaternion relations on F and global invariance.
    let id_f = DMatrix::identity(f_dim, f_dim);
    ensure("K² = -Id on F", inf_norm(&(&k_f * &k_f + &id_f)), EPS_NUM)?;
    ensure(
        "I J K = -Id on F",
        inf_norm(&(&block.i_op * &synth.j_f * &k_f + &id_f)),
        EPS_NUM,
    )?;
    let mut g_res: f64 = 0.0;
    let mut j_res: f64 = 0.0;
    let mut k_res: f64 = 0.0;
    for r in &rotations {
        g_res = g_res.max(inf_norm(&(r.transpose() * &metric * r - &metric)));
        j_res = j_res.max(inf_norm(&(r * &j_ext - &j_ext * r)));
        k_res = k_res.max(inf_norm(&(r * &k_ext - &k_ext * r)));
    }
    ensure("g G-invariant", g_res, EPS_NUM)?;
    ensure("J G-equivariant", j_res, EPS_NUM)?;
    ensure("K G-equivariant", k_res, EPS_NUM)?;

    Ok(HyperHermitianStructure {
        dim: rank,
        e_basis: splitting.e_basis,
        f_basis: splitting.f_basis,
        metric,
        cplx: data.cplx().clone(),
        sigma1: sigma1.clone(),
        j_f: synth.j_f,
        k_f,
        proj_f,
        i_f_ext,
        j_ext,
        k_ext,
        rotations,
        spectral: synth.report,
    })
}
