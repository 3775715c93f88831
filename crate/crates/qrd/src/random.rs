//! Seeded random operators for tests, sweeps and verification suites.

use crate::opcore::{CMat, CVec, HermitianOperator, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type QrdRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> QrdRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` derived from `seed`.
pub fn rng_stream(seed: u64, stream: u64) -> QrdRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn ginibre<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| C64::new(gaussian(rng), gaussian(rng)))
}

/// `G G†` with `G` a `d × rank` Ginibre matrix.
pub fn random_psd<R: Rng>(d: usize, rank: usize, rng: &mut R) -> HermitianOperator {
    let g = ginibre(d, rank, rng);
    HermitianOperator::new(&g * g.adjoint()).expect("G G† is Hermitian")
}

/// Hilbert–Schmidt random state of full rank.
pub fn random_density<R: Rng>(d: usize, rng: &mut R) -> HermitianOperator {
    random_density_rank(d, d, rng)
}

pub fn random_density_rank<R: Rng>(d: usize, rank: usize, rng: &mut R) -> HermitianOperator {
    let p = random_psd(d, rank, rng);
    let t = p.trace();
    p.scaled(1.0 / t)
}

pub fn random_unit_vector<R: Rng>(d: usize, rng: &mut R) -> CVec {
    let v = CVec::from_fn(d, |_, _| C64::new(gaussian(rng), gaussian(rng)));
    let n = v.norm();
    v.unscale(n)
}

pub fn random_pure<R: Rng>(d: usize, rng: &mut R) -> HermitianOperator {
    HermitianOperator::pure(&random_unit_vector(d, rng)).expect("unit vector")
}

/// Haar unitary via QR of a Ginibre matrix with phase correction.
pub fn random_unitary<R: Rng>(d: usize, rng: &mut R) -> CMat {
    let qr = ginibre(d, d, rng).qr();
    let (q, r) = (qr.q(), qr.r());
    let mut q = q;
    for j in 0..d {
        let rd = r[(j, j)];
        let ph = if rd.norm() > 0.0 { rd / rd.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= ph;
        }
    }
    q
}

/// Random isometry `C^d_in → C^d_out` (first columns of a Haar unitary).
pub fn random_isometry<R: Rng>(d_in: usize, d_out: usize, rng: &mut R) -> CMat {
    random_unitary(d_out, rng).columns(0, d_in).into_owned()
}

/// Kraus operators of a random channel `C^d_in → C^d_out` with `k` terms,
/// cut from a random isometry into `C^{k·d_out}`.
pub fn random_kraus<R: Rng>(d_in: usize, d_out: usize, k: usize, rng: &mut R) -> Vec<CMat> {
    let v = random_isometry(d_in, k * d_out, rng);
    (0..k).map(|i| v.rows(i * d_out, d_out).into_owned()).collect()
}

/// Pair of states that commute: shared random eigenbasis, random spectra.
pub fn random_commuting_pair<R: Rng>(d: usize, rng: &mut R) -> (HermitianOperator, HermitianOperator) {
    let u = random_unitary(d, rng);
    let a = random_simplex(d, rng);
    let b = random_simplex(d, rng);
    (HermitianOperator::from_spectral(a, u.clone()), HermitianOperator::from_spectral(b, u))
}

/// Uniform point of the open probability simplex.
pub fn random_simplex<R: Rng>(d: usize, rng: &mut R) -> Vec<f64> {
    let mut v: Vec<f64> = (0..d).map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}
