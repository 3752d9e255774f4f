//! Cyclic Jacobi eigensolver for small complex Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot `a_pq` with a
//! diagonal unitary and then applies the classic real plane rotation, so the
//! combined transform is `U = D·R` and the update is `A ← Uᴴ A U`.

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, C64};

/// Largest `|H_ij − conj(H_ji)|` tolerated on input.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Default relative off-diagonal threshold.
pub const CONVERGENCE_TOL: f64 = 1e-14;
pub const MAX_SWEEPS: usize = 100;

/// Eigenvalues sorted descending with their orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<CVector>,
    pub sweeps: usize,
}

pub fn hermitian_asymmetry(h: &CMatrix) -> f64 {
    h.max_abs_diff(&h.adjoint())
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Sweeps stop once the off-diagonal Frobenius mass falls below
/// `tol·‖H‖_F` or after [`MAX_SWEEPS`]. Values come out in descending
/// order; values equal within `1e-12·max(1, ‖H‖_F)` keep the order of the
/// diagonal slot they converged in. Each vector is gauge-fixed so that its
/// largest component is real and positive.
pub fn hermitian_eigendecompose(h: &CMatrix, tol: f64) -> Result<HermitianEigen> {
    if !h.is_square() {
        return Err(Error::Dimension(format!(
            "expected square matrix, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    let asymmetry = hermitian_asymmetry(h);
    if asymmetry > HERMITIAN_TOL {
        return Err(Error::NotHermitian { asymmetry });
    }
    let n = h.rows();
    let mut a = h.hermitian_part();
    let mut v = CMatrix::identity(n);
    let scale = a.frobenius_norm();
    let threshold = tol.max(0.0) * scale;

    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS {
        if off_diagonal_norm(&a) <= threshold {
            break;
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    let order = descending_order(&diag, 1e-12 * scale.max(1.0));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| phase_normalize(&v.column(i)))
        .collect();
    Ok(HermitianEigen {
        values,
        vectors,
        sweeps,
    })
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.rows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[(i, j)].norm_sqr();
            }
        }
    }
    sum.sqrt()
}

fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 || !mag.is_normal() {
        return;
    }
    let phase_conj = (apq / mag).conj();
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;

    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        let sign = if theta < 0.0 { -1.0 } else { 1.0 };
        sign / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    let upp = C64::new(c, 0.0);
    let upq = C64::new(s, 0.0);
    let uqp = phase_conj * -s;
    let uqq = phase_conj * c;

    let n = a.rows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * upp + akq * uqp;
        a[(k, q)] = akp * upq + akq * uqq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = upp.conj() * apk + uqp.conj() * aqk;
        a[(q, k)] = upq.conj() * apk + uqq.conj() * aqk;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * upp + vkq * uqp;
        v[(k, q)] = vkp * upq + vkq * uqq;
    }
}

/// Indices sorting `values` descending; runs of values within `tie_tol` of
/// their neighbour are ordered by index.
pub(crate) fn descending_order(values: &[f64], tie_tol: f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && values[idx[end - 1]] - values[idx[end]] <= tie_tol {
            end += 1;
        }
        idx[start..end].sort_unstable();
        start = end;
    }
    idx
}

/// Rotates `v` so its largest-magnitude component is real and positive.
/// Components within a relative `1e-9` of the maximum count as tied and the
/// first one wins.
pub fn phase_normalize(v: &CVector) -> CVector {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return v.clone();
    }
    let pivot = v
        .iter()
        .position(|z| z.norm() >= max * (1.0 - 1e-9))
        .expect("max exists");
    let z = v[pivot];
    let rot = z.conj() / z.norm();
    let mut out = v.scale(rot);
    out[pivot] = C64::new(out[pivot].norm(), 0.0);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_decomposition(h: &CMatrix, eig: &HermitianEigen, tol: f64) {
        let scale = h.frobenius_norm().max(1.0);
        for (lambda, vec) in eig.values.iter().zip(&eig.vectors) {
            let hv = h.mul_vec(vec).unwrap();
            let lv = vec.scale(C64::new(*lambda, 0.0));
            assert!(hv.max_abs_diff(&lv) <= tol * scale, "residual too large");
        }
        for (i, a) in eig.vectors.iter().enumerate() {
            for (j, b) in eig.vectors.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((a.dot(b) - expected).norm() < tol);
            }
        }
        assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn diagonal_input() {
        let h = CMatrix::from_real_diag(&[0.36, 0.64]);
        let eig = hermitian_eigendecompose(&h, CONVERGENCE_TOL).unwrap();
        assert_eq!(eig.values, vec![0.64, 0.36]);
        assert_eq!(eig.vectors[0], CVector::basis(2, 1));
        assert_eq!(eig.vectors[1], CVector::basis(2, 0));
        assert_eq!(eig.sweeps, 0);
    }

    #[test]
    fn swap_matrix() {
        let h = CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let eig = hermitian_eigendecompose(&h, CONVERGENCE_TOL).unwrap();
        assert!((eig.values[0] - 1.0).abs() < 1e-15);
        assert!((eig.values[1] + 1.0).abs() < 1e-15);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let plus = CVector::from_real(&[r, r]).unwrap();
        let minus = CVector::from_real(&[r, -r]).unwrap();
        assert!(eig.vectors[0].max_abs_diff(&plus) < 1e-15);
        assert!(eig.vectors[1].max_abs_diff(&minus) < 1e-15);
    }

    #[test]
    fn complex_pivot() {
        let h = CMatrix::from_rows(&[
            vec![C64::new(2.0, 0.0), C64::new(0.0, -1.0), C64::new(0.5, 0.5)],
            vec![C64::new(0.0, 1.0), C64::new(3.0, 0.0), C64::new(-0.25, 0.0)],
            vec![
                C64::new(0.5, -0.5),
                C64::new(-0.25, 0.0),
                C64::new(-1.0, 0.0),
            ],
        ])
        .unwrap();
        let eig = hermitian_eigendecompose(&h, CONVERGENCE_TOL).unwrap();
        assert_decomposition(&h, &eig, 1e-12);
        let trace: f64 = eig.values.iter().sum();
        assert!((trace - 4.0).abs() < 1e-13);
    }

    #[test]
    fn rejects_non_hermitian() {
        let h = CMatrix::from_real_rows(&[&[1.0, 2.0], &[0.0, 1.0]]).unwrap();
        match hermitian_eigendecompose(&h, CONVERGENCE_TOL) {
            Err(Error::NotHermitian { asymmetry }) => assert_eq!(asymmetry, 2.0),
            other => panic!("unexpected {other:?}"),
        }
        assert!(hermitian_eigendecompose(&CMatrix::zeros(2, 3), CONVERGENCE_TOL).is_err());
    }

    #[test]
    fn ties_keep_index_order() {
        assert_eq!(descending_order(&[0.0, 0.0, 0.0], 1e-12), vec![0, 1, 2]);
        assert_eq!(
            descending_order(&[0.5, 1.0, 0.5 + 1e-15], 1e-12),
            vec![1, 0, 2]
        );
        let eig = hermitian_eigendecompose(&CMatrix::zeros(3, 3), CONVERGENCE_TOL).unwrap();
        for (i, v) in eig.vectors.iter().enumerate() {
            assert_eq!(*v, CVector::basis(3, i));
        }
    }

    #[test]
    fn phase_gauge() {
        let v = CVector::new(vec![C64::new(0.0, 0.6), C64::new(0.0, -0.8)]).unwrap();
        let n = phase_normalize(&v);
        assert!((n[1] - C64::new(0.8, 0.0)).norm() < 1e-15);
        assert!((n[0] - C64::new(-0.6, 0.0)).norm() < 1e-15);
    }
}
