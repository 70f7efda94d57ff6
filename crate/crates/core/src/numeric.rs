//! Small floating-point helpers shared across modules: conversions from the
//! exact types, norms, block assembly and SVD-based subspace extraction.

use crate::exact::{IntMatrix, Rat, RationalMatrix};
use nalgebra::DMatrix;
use num_traits::ToPrimitive;

/// Max-absolute-entry norm.
pub fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub fn rat_to_f64(x: &Rat) -> f64 {
    x.to_f64().expect("rational out of f64 range")
}

pub fn rat_mat_to_f64(m: &RationalMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| rat_to_f64(m.get(i, j)))
}

pub fn int_mat_to_f64(m: &IntMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| {
        m.get(i, j).to_f64().expect("integer out of f64 range")
    })
}

pub fn rat_vec_to_f64(v: &[Rat]) -> Vec<f64> {
    v.iter().map(rat_to_f64).collect()
}

/// Stacks two matrices with equal column counts on top of each other.
pub fn vstack(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.ncols(), b.ncols());
    DMatrix::from_fn(a.nrows() + b.nrows(), a.ncols(), |i, j| {
        if i < a.nrows() {
            a[(i, j)]
        } else {
            b[(i - a.nrows(), j)]
        }
    })
}

/// Places two matrices side by side.
pub fn hstack(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.nrows(), b.nrows());
    DMatrix::from_fn(a.nrows(), a.ncols() + b.ncols(), |i, j| {
        if j < a.ncols() {
            a[(i, j)]
        } else {
            b[(i, j - a.ncols())]
        }
    })
}

/// 2x2 block matrix `[[a, b], [c, d]]`.
pub fn block2x2(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
    d: &DMatrix<f64>,
) -> DMatrix<f64> {
    assert_eq!(a.nrows(), b.nrows());
    assert_eq!(c.nrows(), d.nrows());
    assert_eq!(a.ncols(), c.ncols());
    assert_eq!(b.ncols(), d.ncols());
    let (r0, c0) = a.shape();
    DMatrix::from_fn(r0 + c.nrows(), c0 + b.ncols(), |i, j| {
        match (i < r0, j < c0) {
            (true, true) => a[(i, j)],
            (true, false) => b[(i, j - c0)],
            (false, true) => c[(i - r0, j)],
            (false, false) => d[(i - r0, j - c0)],
        }
    })
}

/// Block-diagonal assembly.
pub fn blockdiag(blocks: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(*b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// Orthonormal basis (as columns) of the kernel of `m`, using singular values
/// below `tol`. Wide matrices are padded with zero rows so the full right
/// factor is available.
pub fn svd_kernel_basis(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let cols = m.ncols();
    let padded = if m.nrows() < cols {
        vstack(m, &DMatrix::zeros(cols - m.nrows(), cols))
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("svd computed with V");
    let mut keep = Vec::new();
    for i in 0..cols {
        let s = if i < svd.singular_values.len() {
            svd.singular_values[i]
        } else {
            0.0
        };
        if s <= tol {
            keep.push(i);
        }
    }
    DMatrix::from_fn(cols, keep.len(), |i, j| v_t[(keep[j], i)])
}

/// Smallest singular value of a (possibly non-square) matrix; zero for empty.
pub fn min_singular_value(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let svd = m.clone().svd(false, false);
    svd.singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Eigenvalues of a symmetric matrix, sorted ascending.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Residual of a subspace (given by orthonormal columns `b`) under a map `m`:
/// the part of `m·b` sticking out of the span of `b`.
pub fn stability_residual(m: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    if b.ncols() == 0 {
        return 0.0;
    }
    let mb = m * b;
    let proj = b * (b.transpose() * &mb);
    inf_norm(&(mb - proj))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_basis_of_rank_one() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 2.0, 2.0]);
        let k = svd_kernel_basis(&m, 1e-10);
        assert_eq!(k.ncols(), 1);
        assert!(inf_norm(&(&m * &k)) < 1e-12);
    }

    #[test]
    fn kernel_basis_of_wide_zero() {
        let m = DMatrix::<f64>::zeros(1, 4);
        let k = svd_kernel_basis(&m, 1e-10);
        assert_eq!(k.ncols(), 4);
    }

    #[test]
    fn block_assembly() {
        let a = DMatrix::identity(2, 2);
        let b = DMatrix::zeros(2, 1);
        let c = DMatrix::zeros(1, 2);
        let d = DMatrix::from_element(1, 1, 5.0);
        let m = block2x2(&a, &b, &c, &d);
        assert_eq!(m.shape(), (3, 3));
        assert_eq!(m[(2, 2)], 5.0);
        let bd = blockdiag(&[&a, &d]);
        assert_eq!(bd.shape(), (3, 3));
        assert_eq!(bd[(2, 2)], 5.0);
    }
}
