//! Small dense helpers shared by the block and metric code.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{CMatrix, CVector};

pub fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vector_norm(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Direct sum of square blocks.
pub fn direct_sum<'a, I>(blocks: I) -> CMatrix
where
    I: IntoIterator<Item = &'a CMatrix>,
{
    let blocks: Vec<&CMatrix> = blocks.into_iter().collect();
    let dim: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMatrix::zeros(dim, dim);
    let mut offset = 0;
    for b in blocks {
        let n = b.nrows();
        out.view_mut((offset, offset), (n, n)).copy_from(b);
        offset += n;
    }
    out
}

/// `‖A − A†‖_F / ‖A‖_F`, zero for the zero matrix.
pub fn hermiticity_defect(a: &CMatrix) -> f64 {
    let scale = frobenius(a);
    if scale == 0.0 {
        return 0.0;
    }
    frobenius(&(a - a.adjoint())) / scale
}

/// Singular values in descending order together with the matching right
/// singular vectors (columns of `V`) and left singular vectors (columns of `U`).
pub(crate) struct SortedSvd {
    pub values: Vec<f64>,
    pub left: CMatrix,
    pub right: CMatrix,
}

/// Convergence threshold of the bidiagonal QR sweeps. Asking for plain
/// machine epsilon can end in a false convergence with wrong singular
/// vectors, so the decomposition is also checked by recomposition.
const SVD_EPSILON: f64 = 5.0 * f64::EPSILON;

pub(crate) fn sorted_svd(a: &CMatrix) -> Option<SortedSvd> {
    let svd = nalgebra::SVD::try_new(a.clone(), true, true, SVD_EPSILON, 10_000)?;
    let u = svd.u?;
    let v = svd.v_t?.adjoint();
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let values = order.iter().map(|&i| svd.singular_values[i]).collect();
    let left = CMatrix::from_columns(&order.iter().map(|&i| u.column(i)).collect::<Vec<_>>());
    let right = CMatrix::from_columns(&order.iter().map(|&i| v.column(i)).collect::<Vec<_>>());
    let sigma = CMatrix::from_diagonal(&CVector::from_iterator(
        order.len(),
        order.iter().map(|&i| Complex64::new(svd.singular_values[i], 0.0)),
    ));
    let recomposed = &left * sigma * right.adjoint();
    if frobenius(&(recomposed - a)) > 1e-12 * frobenius(a).max(f64::MIN_POSITIVE) {
        return None;
    }
    Some(SortedSvd { values, left, right })
}

/// Rotates `v` so that its largest-magnitude component is real and positive.
pub(crate) fn fix_phase(v: &mut CVector) {
    let pivot = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or_default();
    if pivot.norm() > 0.0 {
        let phase = pivot.conj() / pivot.norm();
        for z in v.iter_mut() {
            *z *= phase;
        }
    }
}
