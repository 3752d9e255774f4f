#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use retrowpt_core::network::PortPartition;
use retrowpt_core::synth::{random_lossless_reciprocal, random_partition};
use retrowpt_core::{CMatrix, CVector, ScatteringMatrix, C64};

/// Lossless reciprocal channel with 2..=max_ports ports and a random partition.
pub fn channel(seed: u64, max_ports: usize) -> (ScatteringMatrix, PortPartition, CMatrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let n = rng.random_range(2..=max_ports);
    let s = random_lossless_reciprocal(n, seed).unwrap();
    let p = random_partition(n, seed).unwrap();
    let s21 = s.transmission(&p).unwrap();
    (s, p, s21)
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> CVector {
    loop {
        let v: Vec<C64> = (0..n)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let v = CVector::new(v).unwrap();
        if v.norm() > 1e-3 {
            return v;
        }
    }
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    let data = (0..rows * cols)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    CMatrix::new(rows, cols, data).unwrap()
}

/// Eigenvalues of a Hermitian PSD matrix by power iteration with deflation,
/// largest first. Written against plain nested `Vec`s so it shares nothing
/// with the library's solver.
pub fn power_iteration_eigenvalues(h: &CMatrix) -> Vec<f64> {
    let n = h.rows();
    let a: Vec<Vec<C64>> = (0..n).map(|i| h.row(i).to_vec()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut found: Vec<Vec<C64>> = Vec::new();
    let mut values = Vec::new();
    let dot = |x: &[C64], y: &[C64]| x.iter().zip(y).map(|(a, b)| a.conj() * b).sum::<C64>();
    let normalize = |x: &mut Vec<C64>| {
        let norm = dot(x, x).re.sqrt();
        if norm > 0.0 {
            x.iter_mut().for_each(|z| *z /= norm);
        }
        norm
    };
    let deflate = |x: &mut Vec<C64>, found: &[Vec<C64>]| {
        for _ in 0..2 {
            for q in found {
                let c = dot(q, x);
                x.iter_mut().zip(q).for_each(|(z, qi)| *z -= c * qi);
            }
        }
    };
    for _ in 0..n {
        let mut v: Vec<C64> = (0..n)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        deflate(&mut v, &found);
        normalize(&mut v);
        let mut lambda = 0.0;
        let mut steady = 0;
        for _ in 0..500_000 {
            let mut w: Vec<C64> = (0..n)
                .map(|i| (0..n).map(|j| a[i][j] * v[j]).sum())
                .collect();
            deflate(&mut w, &found);
            let next = dot(&v, &w).re;
            if normalize(&mut w) == 0.0 {
                lambda = 0.0;
                break;
            }
            v = w;
            steady = if (next - lambda).abs() <= 1e-16 * next.abs().max(1.0) {
                steady + 1
            } else {
                0
            };
            lambda = next;
            if steady >= 200 {
                break;
            }
        }
        values.push(lambda.max(0.0));
        found.push(v);
    }
    values.sort_by(|a, b| b.total_cmp(a));
    values
}
