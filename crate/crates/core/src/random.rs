//! Seeded generators for random unitaries, states and channels, plus the
//! per-shot RNG stream rule.
//!
//! Every sampled quantity is drawn from a `ChaCha8Rng` seeded with the user
//! seed and switched to a stream selected by the shot (or trial) index, so
//! aggregate counts are bit-identical regardless of how shots are scheduled.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{CMatrix, CVector, C64};

pub type StreamRng = ChaCha8Rng;

/// RNG for the `stream`-th independent draw under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn seeded(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// Haar-random unitary: QR of a complex Ginibre matrix with the phases of
/// `diag(R)` folded back into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = DMatrix::from_fn(d, d, |_, _| gaussian_complex(rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..d {
        let diag = r[(j, j)];
        let phase = if diag.norm() > 0.0 { diag / diag.norm() } else { C64::from(1.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Uniformly random pure state of dimension `d`.
pub fn random_state_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVector {
    let v = CVector::from_fn(d, |_, _| gaussian_complex(rng));
    let norm = v.norm();
    v / C64::from(norm)
}

/// `k` Kraus operators on dimension `d` cut from the first `d` columns of a
/// Haar unitary on `d·k`; `M_i[s, t] = V[s·k + i, t]`.
pub fn random_kraus_operators<R: Rng + ?Sized>(d: usize, k: usize, rng: &mut R) -> Vec<CMatrix> {
    let u = haar_unitary(d * k, rng);
    (0..k).map(|i| CMatrix::from_fn(d, d, |s, t| u[(s * k + i, t)])).collect()
}

/// `r × c` matrix with orthonormal rows (`r ≤ c`).
pub fn random_row_isometry<R: Rng + ?Sized>(r: usize, c: usize, rng: &mut R) -> CMatrix {
    assert!(r <= c, "row isometry needs r <= c");
    let u = haar_unitary(c, rng);
    u.rows(0, r).into_owned()
}

/// Draws an index from a probability vector (need not be exactly
/// normalized; the last positive entry absorbs rounding).
pub fn sample_index<R: Rng + ?Sized>(probabilities: &[f64], rng: &mut R) -> usize {
    let total: f64 = probabilities.iter().sum();
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (k, &p) in probabilities.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = k;
        if target < acc {
            return k;
        }
    }
    last
}

/// Histogram of `shots` draws, each drawn from its own stream.
pub fn sample_counts(probabilities: &[f64], shots: u64, seed: u64) -> (Vec<u64>, Vec<usize>) {
    let mut counts = vec![0u64; probabilities.len()];
    let mut record = Vec::with_capacity(shots as usize);
    for shot in 0..shots {
        let mut rng = stream_rng(seed, shot);
        let k = sample_index(probabilities, &mut rng);
        counts[k] += 1;
        record.push(k);
    }
    (counts, record)
}
