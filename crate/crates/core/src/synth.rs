//! Synthetic lossless reciprocal channels.
//!
//! All randomness comes from [`ChaCha8Rng`] seeded with `seed_from_u64`,
//! which is specified bit-for-bit and therefore reproduces on every
//! platform. Complex Gaussians have unit variance (`N(0, ½)` per part).

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, C64};
use crate::network::{PortPartition, ScatteringMatrix};

/// Frequency stamped on synthesized channels.
pub const DEFAULT_FREQUENCY_HZ: f64 = 2.4e9;

pub type ChannelRng = ChaCha8Rng;

pub fn rng(seed: u64) -> ChannelRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Circularly-symmetric complex Gaussian with variance `variance`.
pub fn complex_gaussian(rng: &mut ChannelRng, variance: f64) -> C64 {
    let s = (0.5 * variance).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(s * re, s * im)
}

pub fn gaussian_vector(rng: &mut ChannelRng, n: usize, variance: f64) -> CVector {
    CVector::from_vec_unchecked((0..n).map(|_| complex_gaussian(rng, variance)).collect())
}

/// Haar-distributed `n×n` unitary: Gram–Schmidt QR of a complex Gaussian
/// matrix. Gram–Schmidt leaves `R` with a positive real diagonal, which is
/// what makes the distribution Haar.
pub fn haar_unitary(n: usize, rng: &mut ChannelRng) -> CMatrix {
    let mut columns: Vec<CVector> = (0..n).map(|_| gaussian_vector(rng, n, 1.0)).collect();
    for j in 0..n {
        // two passes of modified Gram-Schmidt keep orthogonality at machine precision
        for _ in 0..2 {
            for i in 0..j {
                let proj = columns[i].dot(&columns[j]);
                columns[j] = columns[j].axpy(-proj, &columns[i]);
            }
        }
        let norm = columns[j].norm();
        columns[j] = columns[j].scale(C64::new(1.0 / norm, 0.0));
    }
    CMatrix::from_columns(&columns).expect("square")
}

/// Random symmetric unitary `S = U·Uᵀ` with Haar `U`.
pub fn random_lossless_reciprocal(n: usize, seed: u64) -> Result<ScatteringMatrix> {
    if n == 0 {
        return Err(Error::Domain("channel needs at least one port".into()));
    }
    let mut rng = rng(seed);
    let u = haar_unitary(n, &mut rng);
    let s = u.matmul(&u.transpose())?;
    ScatteringMatrix::with_frequency(symmetrize(&s), DEFAULT_FREQUENCY_HZ)
}

/// A `2m`-port lossless reciprocal channel whose receiver-by-generator block
/// has exactly the singular values `sigmas`.
///
/// The base network is `[[C, Σ], [Σ, −C]]` with `Σ = diag(σ)` and
/// `C = diag(√(1−σ²))`; it is then mixed by a congruence
/// `T·S·Tᵀ`, `T = blockdiag(T₁, T₂)` of seeded Haar unitaries. Seed `0`
/// skips the mixing. Ports `1..=m` are the receiver, `m+1..=2m` the
/// generator.
pub fn embed_singular_values(
    sigmas: &[f64],
    seed: u64,
) -> Result<(ScatteringMatrix, PortPartition)> {
    let m = sigmas.len();
    if m == 0 {
        return Err(Error::Domain(
            "at least one singular value is required".into(),
        ));
    }
    if let Some(bad) = sigmas.iter().find(|s| !(0.0..=1.0).contains(*s)) {
        return Err(Error::Domain(format!(
            "singular value {bad} outside [0, 1]"
        )));
    }
    let mut base = CMatrix::zeros(2 * m, 2 * m);
    for (i, &sigma) in sigmas.iter().enumerate() {
        let c = (1.0 - sigma * sigma).max(0.0).sqrt();
        base[(i, i)] = C64::new(c, 0.0);
        base[(m + i, m + i)] = C64::new(-c, 0.0);
        base[(i, m + i)] = C64::new(sigma, 0.0);
        base[(m + i, i)] = C64::new(sigma, 0.0);
    }
    let s = if seed == 0 {
        base
    } else {
        let mut rng = rng(seed);
        let t1 = haar_unitary(m, &mut rng);
        let t2 = haar_unitary(m, &mut rng);
        let mut t = CMatrix::zeros(2 * m, 2 * m);
        for i in 0..m {
            for j in 0..m {
                t[(i, j)] = t1[(i, j)];
                t[(m + i, m + j)] = t2[(i, j)];
            }
        }
        symmetrize(&t.matmul(&base)?.matmul(&t.transpose())?)
    };
    let partition =
        PortPartition::new((1..=m).collect(), (m + 1..=2 * m).collect(), vec![], vec![]);
    Ok((
        ScatteringMatrix::with_frequency(s, DEFAULT_FREQUENCY_HZ)?,
        partition,
    ))
}

/// Random non-empty, disjoint active sets on an `n`-port network; every
/// other port is absorbing.
pub fn random_partition(n: usize, seed: u64) -> Result<PortPartition> {
    if n < 2 {
        return Err(Error::Domain("a partition needs at least two ports".into()));
    }
    let mut rng = rng(seed);
    let mut ports: Vec<usize> = (1..=n).collect();
    ports.shuffle(&mut rng);
    let m = rng.random_range(1..n);
    let t = rng.random_range(1..=n - m);
    let mut rx = ports[..m].to_vec();
    let mut tx = ports[m..m + t].to_vec();
    rx.sort_unstable();
    tx.sort_unstable();
    let rest = ports[m + t..].to_vec();
    let (rx_absorbing, tx_absorbing) = rest.split_at(rest.len() / 2);
    let mut p = PortPartition::new(rx, tx, rx_absorbing.to_vec(), tx_absorbing.to_vec());
    p.rx_absorbing.sort_unstable();
    p.tx_absorbing.sort_unstable();
    p.validate(n)?;
    Ok(p)
}

fn symmetrize(s: &CMatrix) -> CMatrix {
    let n = s.rows();
    let mut out = s.clone();
    for i in 0..n {
        for j in i + 1..n {
            let avg = 0.5 * (s[(i, j)] + s[(j, i)]);
            out[(i, j)] = avg;
            out[(j, i)] = avg;
        }
    }
    out
}
