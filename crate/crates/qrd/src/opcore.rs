//! Hermitian operator algebra: eigendecompositions, supported powers,
//! support projections, the projection meet, PSD order and the pinched
//! exponential used for z = ∞.

use crate::{Error, ExtendedReal, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

const HERMITIAN_TOL: f64 = 1e-10;
const PSD_REJECT: f64 = 1e-8;

/// Relative cutoff: eigenvalues `λ ≤ τ·λ_max` count as zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportCutoff {
    pub relative_tau: f64,
}

impl Default for SupportCutoff {
    fn default() -> Self {
        SupportCutoff { relative_tau: 1e-12 }
    }
}

impl SupportCutoff {
    pub fn new(relative_tau: f64) -> Self {
        SupportCutoff { relative_tau }
    }

    pub fn threshold(&self, lambda_max: f64) -> f64 {
        self.relative_tau * lambda_max.max(0.0)
    }
}

/// Complex Hermitian matrix together with its eigendecomposition.
///
/// Eigenvalues are stored in descending order; ties keep the order the
/// solver produced them in, which is deterministic.
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    mat: CMat,
    eigenvalues: Vec<f64>,
    eigenvectors: CMat,
}

impl HermitianOperator {
    /// Checks hermiticity (absolute tolerance 1e-10), symmetrizes and diagonalizes.
    pub fn new(mat: CMat) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimMismatch(mat.nrows(), mat.ncols()));
        }
        if mat.nrows() == 0 {
            return Err(Error::Malformed("empty matrix".into()));
        }
        let dev = hermitian_deviation(&mat);
        if !(dev <= HERMITIAN_TOL) {
            return Err(Error::NotHermitian(dev));
        }
        let sym = (&mat + mat.adjoint()).scale(0.5);
        let (vals, vecs) = jacobi_eigh(&sym);
        Ok(Self::from_unsorted(sym, vals, vecs))
    }

    /// Builds `U diag(values) U†` keeping the given decomposition as the cached one.
    pub fn from_spectral(values: Vec<f64>, vectors: CMat) -> Self {
        let d = values.len();
        assert_eq!(vectors.ncols(), d);
        let mut mat = CMat::zeros(vectors.nrows(), vectors.nrows());
        for (k, &v) in values.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let col = vectors.column(k);
            mat += (col * col.adjoint()).scale(v);
        }
        let mat = (&mat + mat.adjoint()).scale(0.5);
        Self::from_unsorted(mat, values, vectors)
    }

    fn from_unsorted(mat: CMat, values: Vec<f64>, vectors: CMat) -> Self {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&i, &j| values[j].partial_cmp(&values[i]).unwrap_or(std::cmp::Ordering::Equal));
        let eigenvalues = order.iter().map(|&i| values[i]).collect();
        let eigenvectors = CMat::from_fn(vectors.nrows(), order.len(), |r, c| vectors[(r, order[c])]);
        HermitianOperator { mat, eigenvalues, eigenvectors }
    }

    pub fn from_real_rows(dim: usize, re: &[f64], im: &[f64]) -> Result<Self> {
        if re.len() != dim * dim || im.len() != dim * dim {
            return Err(Error::Malformed(format!(
                "expected {} entries, got re={} im={}",
                dim * dim,
                re.len(),
                im.len()
            )));
        }
        Self::new(CMat::from_fn(dim, dim, |i, j| C64::new(re[i * dim + j], im[i * dim + j])))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let d = values.len();
        Self::from_spectral(values.to_vec(), CMat::identity(d, d))
    }

    pub fn identity(d: usize) -> Self {
        Self::diagonal(&vec![1.0; d])
    }

    pub fn zeros(d: usize) -> Self {
        Self::diagonal(&vec![0.0; d])
    }

    /// `|ψ⟩⟨ψ|`, with an exact rank-one decomposition.
    pub fn pure(psi: &CVec) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(Error::ZeroOperator);
        }
        let basis = complete_basis(&CMat::from_columns(&[psi.unscale(norm)]));
        let mut vals = vec![0.0; psi.len()];
        vals[0] = norm * norm;
        Ok(Self::from_spectral(vals, basis))
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMat {
        &self.eigenvectors
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }

    pub fn spectral_norm(&self) -> f64 {
        self.max_eigenvalue().abs().max(self.min_eigenvalue().abs())
    }

    /// Applies `f` to the spectrum, reusing the eigenvectors.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Self {
        let vals = self.eigenvalues.iter().map(|&x| f(x)).collect();
        Self::from_spectral(vals, self.eigenvectors.clone())
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map_spectrum(|x| c * x)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dims(self, other)?;
        Self::new(&self.mat + &other.mat)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dims(self, other)?;
        Self::new(&self.mat - &other.mat)
    }

    /// `K A K†` for a possibly rectangular `K`.
    pub fn conjugate_by(&self, k: &CMat) -> Result<Self> {
        if k.ncols() != self.dim() {
            return Err(Error::DimMismatch(k.ncols(), self.dim()));
        }
        Self::new(k * &self.mat * k.adjoint())
    }

    pub fn kron(&self, other: &Self) -> Self {
        let vals: Vec<f64> =
            self.eigenvalues.iter().flat_map(|&a| other.eigenvalues.iter().map(move |&b| a * b)).collect();
        Self::from_spectral(vals, self.eigenvectors.kronecker(&other.eigenvectors))
    }

    pub fn is_zero(&self) -> bool {
        self.spectral_norm() == 0.0
    }

    /// Number of eigenvalues above the cutoff.
    pub fn rank(&self, cutoff: SupportCutoff) -> usize {
        let thr = cutoff.threshold(self.max_eigenvalue());
        self.eigenvalues.iter().filter(|&&x| x > thr).count()
    }

    /// `NotPsd` when the smallest eigenvalue is below `-1e-8·λ_max`.
    pub fn check_psd(&self) -> Result<()> {
        let lmax = self.max_eigenvalue().max(0.0);
        let lmin = self.min_eigenvalue();
        if lmin < -PSD_REJECT * lmax || (lmax == 0.0 && lmin < 0.0) {
            return Err(Error::NotPsd(lmin));
        }
        Ok(())
    }

    /// Indices of eigenvalues above the cutoff (they come first).
    pub fn support_indices(&self, cutoff: SupportCutoff) -> std::ops::Range<usize> {
        0..self.rank(cutoff)
    }
}

fn check_dims(a: &HermitianOperator, b: &HermitianOperator) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch(a.dim(), b.dim()));
    }
    Ok(())
}

/// Equality of the underlying matrices; cached decompositions are ignored.
impl PartialEq for HermitianOperator {
    fn eq(&self, other: &Self) -> bool {
        self.mat == other.mat
    }
}

pub fn hermitian_deviation(m: &CMat) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Extends orthonormal columns to a full orthonormal basis (Gram–Schmidt on
/// the standard basis vectors, in index order).
pub fn complete_basis(cols: &CMat) -> CMat {
    let d = cols.nrows();
    let mut basis: Vec<CVec> = cols.column_iter().map(|c| c.into_owned()).collect();
    for e in 0..d {
        if basis.len() == d {
            break;
        }
        let mut v = CVec::zeros(d);
        v[e] = C64::new(1.0, 0.0);
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dotc(&v);
                v -= b * proj;
            }
        }
        let n = v.norm();
        if n > 1e-6 {
            basis.push(v.unscale(n));
        }
    }
    CMat::from_columns(&basis)
}

/// Cyclic Jacobi eigensolver for complex Hermitian matrices.
///
/// Slower than QR-based solvers but keeps high relative accuracy for graded
/// positive matrices, which is what the near-singular families need.
pub fn jacobi_eigh(a: &CMat) -> (Vec<f64>, CMat) {
    let n = a.nrows();
    let mut m = a.clone();
    let mut v = CMat::identity(n, n);
    for i in 0..n {
        m[(i, i)] = C64::new(m[(i, i)].re, 0.0);
    }
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                let g = apq.norm();
                if g == 0.0 {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                if g <= f64::EPSILON * 0.25 * (app.abs() * aqq.abs()).sqrt() || g < 1e-300 {
                    m[(p, q)] = C64::new(0.0, 0.0);
                    m[(q, p)] = C64::new(0.0, 0.0);
                    continue;
                }
                rotated = true;
                let theta = (aqq - app) / (2.0 * g);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let ph = apq / g;
                let phc = ph.conj();
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    let nkp = mkp * c - phc * mkq * s;
                    let nkq = mkp * s + phc * mkq * c;
                    m[(k, p)] = nkp;
                    m[(k, q)] = nkq;
                    m[(p, k)] = nkp.conj();
                    m[(q, k)] = nkq.conj();
                }
                m[(p, p)] = C64::new(app - t * g, 0.0);
                m[(q, q)] = C64::new(aqq + t * g, 0.0);
                m[(p, q)] = C64::new(0.0, 0.0);
                m[(q, p)] = C64::new(0.0, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - phc * vkq * s;
                    v[(k, q)] = vkp * s + phc * vkq * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    ((0..n).map(|i| m[(i, i)].re).collect(), v)
}

/// A Hermitian operator with spectrum in {0, 1}.
#[derive(Debug, Clone)]
pub struct Projection {
    pub op: HermitianOperator,
    pub rank: usize,
}

impl Projection {
    /// Projection onto the span of the first `rank` columns of an orthonormal basis.
    pub fn from_basis(basis: &CMat, rank: usize) -> Self {
        let d = basis.ncols();
        let vals = (0..d).map(|i| if i < rank { 1.0 } else { 0.0 }).collect();
        Projection { op: HermitianOperator::from_spectral(vals, basis.clone()), rank }
    }

    /// Orthonormal basis of the range, as columns.
    pub fn range_basis(&self) -> CMat {
        self.op.eigenvectors().columns(0, self.rank).into_owned()
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn matrix(&self) -> &CMat {
        self.op.matrix()
    }
}

/// `Σ_{s > cutoff} s^x P_s`; `x = 0` gives the support projection.
pub fn supported_power(a: &HermitianOperator, x: f64, cutoff: SupportCutoff) -> Result<HermitianOperator> {
    a.check_psd()?;
    let thr = cutoff.threshold(a.max_eigenvalue());
    Ok(a.map_spectrum(|s| if s > thr { s.powf(x) } else { 0.0 }))
}

pub fn support_projection(a: &HermitianOperator, cutoff: SupportCutoff) -> Result<Projection> {
    a.check_psd()?;
    Ok(Projection::from_basis(a.eigenvectors(), a.rank(cutoff)))
}

/// Projection onto `range(P) ∩ range(Q)`: the eigenspace of `P + Q` at 2.
pub fn projection_meet(p: &Projection, q: &Projection) -> Result<Projection> {
    if p.dim() != q.dim() {
        return Err(Error::DimMismatch(p.dim(), q.dim()));
    }
    let sum = p.op.add(&q.op)?;
    let rank = sum.eigenvalues().iter().filter(|&&x| (x - 2.0).abs() <= 1e-8).count();
    Ok(Projection::from_basis(sum.eigenvectors(), rank))
}

/// `A ≤ B` up to `slack` (default `1e-10·‖B‖_∞`).
pub fn psd_leq(a: &HermitianOperator, b: &HermitianOperator, slack: Option<f64>) -> Result<bool> {
    check_dims(a, b)?;
    let slack = slack.unwrap_or(1e-10 * b.spectral_norm());
    Ok(b.sub(a)?.min_eigenvalue() >= -slack)
}

/// Natural logarithm on the support, zero on the kernel.
pub fn logn(a: &HermitianOperator, cutoff: SupportCutoff) -> Result<HermitianOperator> {
    a.check_psd()?;
    let thr = cutoff.threshold(a.max_eigenvalue());
    Ok(a.map_spectrum(|s| if s > thr { s.ln() } else { 0.0 }))
}

/// `Σ λ_i^z` over eigenvalues above the cutoff.
pub fn trace_power(a: &HermitianOperator, z: f64, cutoff: SupportCutoff) -> Result<f64> {
    a.check_psd()?;
    if !(z > 0.0) {
        return Err(Error::BadParams(format!("trace_power needs z > 0, got {z}")));
    }
    let thr = cutoff.threshold(a.max_eigenvalue());
    Ok(a.eigenvalues().iter().filter(|&&s| s > thr).map(|s| s.powf(z)).sum())
}

/// Result of the support-containment test `ρ⁰ ≤ σ⁰`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportCheck {
    pub contained: bool,
    /// Minimum eigenvalue of `σ⁰ − ρ⁰` is close to the decision slack.
    pub borderline: bool,
}

/// `ρ⁰ ≤ σ⁰` decided with projection slack 1e-8.
pub fn support_contained(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    cutoff: SupportCutoff,
) -> Result<SupportCheck> {
    check_dims(rho, sigma)?;
    let pr = support_projection(rho, cutoff)?;
    let ps = support_projection(sigma, cutoff)?;
    if ps.rank == ps.dim() {
        return Ok(SupportCheck { contained: true, borderline: false });
    }
    let m = ps.op.sub(&pr.op)?.min_eigenvalue();
    Ok(SupportCheck { contained: m >= -1e-8, borderline: m < -1e-10 && m > -1e-6 })
}

/// `Q_{α,∞} = Tr P exp(α P logn ρ P + (1−α) P logn σ P)` with `P = ρ⁰ ∧ σ⁰`.
///
/// An empty meet gives 0 for α < 1 (see `pinch_meet_rank` for the flag).
pub fn pinch_exp(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    alpha: f64,
    cutoff: SupportCutoff,
) -> Result<ExtendedReal> {
    check_dims(rho, sigma)?;
    rho.check_psd()?;
    sigma.check_psd()?;
    if alpha > 1.0 && !support_contained(rho, sigma, cutoff)?.contained {
        return Ok(ExtendedReal::PosInf);
    }
    let meet = projection_meet(&support_projection(rho, cutoff)?, &support_projection(sigma, cutoff)?)?;
    if meet.rank == 0 {
        return Ok(ExtendedReal::Finite(0.0));
    }
    let b = meet.range_basis();
    let lr = logn(rho, cutoff)?;
    let ls = logn(sigma, cutoff)?;
    let m = (b.adjoint() * lr.matrix() * &b).scale(alpha) + (b.adjoint() * ls.matrix() * &b).scale(1.0 - alpha);
    let h = HermitianOperator::new((&m + m.adjoint()).scale(0.5))?;
    Ok(ExtendedReal::Finite(h.eigenvalues().iter().map(|x| x.exp()).sum()))
}

/// Rank of `ρ⁰ ∧ σ⁰`.
pub fn pinch_meet_rank(rho: &HermitianOperator, sigma: &HermitianOperator, cutoff: SupportCutoff) -> Result<usize> {
    Ok(projection_meet(&support_projection(rho, cutoff)?, &support_projection(sigma, cutoff)?)?.rank)
}

/// All `k`-subsets of `items`, in lexicographic order.
pub(crate) fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn rec(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            rec(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(items, k, 0, &mut Vec::new(), &mut out);
    out
}

/// Determinant of the submatrix with the given rows and columns.
pub(crate) fn minor(m: &CMat, rows: &[usize], cols: &[usize]) -> C64 {
    let k = rows.len();
    match k {
        0 => C64::new(1.0, 0.0),
        1 => m[(rows[0], cols[0])],
        2 => m[(rows[0], cols[0])] * m[(rows[1], cols[1])] - m[(rows[0], cols[1])] * m[(rows[1], cols[0])],
        _ => CMat::from_fn(k, k, |i, j| m[(rows[i], cols[j])]).determinant(),
    }
}

/// Operator norm of a general complex matrix.
pub fn op_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    // subnormal entries derail the bidiagonalization; anything this far below
    // the largest entry cannot change the norm
    let big = m.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if !(big > 0.0) {
        return big;
    }
    let floor = big * 1e-200;
    let m = m.map(|x| if x.norm() < floor { C64::new(0.0, 0.0) } else { x });
    m.svd(false, false).singular_values.max()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, random_psd, rng_from_seed};
    use proptest::prelude::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn max_abs(m: &CMat) -> f64 {
        m.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn op_norm_ignores_subnormal_entries() {
        let m = CMat::from_row_slice(
            3,
            3,
            &[
                C64::new(1e-323, 5e-324),
                c(0.0),
                c(0.0),
                C64::new(-2.6e-259, 1.7e-260),
                c(0.0),
                c(0.0),
                C64::new(-0.4964, 0.2701),
                C64::new(5.2e-100, 1.7e-100),
                c(0.0),
            ],
        );
        assert!((op_norm(&m) - C64::new(-0.4964, 0.2701).norm()).abs() < 1e-15);
    }

    #[test]
    fn jacobi_reconstructs_and_is_unitary() {
        let mut rng = rng_from_seed(3);
        for d in 1..=6 {
            let a = random_psd(d, d, &mut rng);
            let shifted = a.matrix() - CMat::identity(d, d).scale(0.3);
            let h = HermitianOperator::new(shifted.clone()).unwrap();
            let u = h.eigenvectors();
            let rec = u
                * CMat::from_diagonal(&DVector::from_iterator(d, h.eigenvalues().iter().map(|&x| c(x))))
                * u.adjoint();
            assert!(max_abs(&(rec - &shifted)) < 1e-12);
            assert!(max_abs(&(u.adjoint() * u - CMat::identity(d, d))) < 1e-12);
            assert!(h.eigenvalues().windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn jacobi_has_relative_accuracy_on_graded_matrix() {
        let e: f64 = 1e-5;
        let m = CMat::from_row_slice(2, 2, &[c(1.0 + e * e), c(e + e * e), c(e + e * e), c(2.0 * e * e)]);
        let h = HermitianOperator::new(m).unwrap();
        let det = (e - e * e).powi(2);
        let small = det / h.max_eigenvalue();
        assert!(((h.min_eigenvalue() - small) / small).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMat::from_row_slice(2, 2, &[c(1.0), c(1.0), c(0.0), c(1.0)]);
        assert!(matches!(HermitianOperator::new(m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn supported_power_examples() {
        let cut = SupportCutoff::default();
        let i = HermitianOperator::identity(3);
        let p = supported_power(&i, -3.0, cut).unwrap();
        assert!(max_abs(&(p.matrix() - i.matrix())) < 1e-14);

        let a = HermitianOperator::diagonal(&[4.0, 0.0]);
        let p = supported_power(&a, 0.5, cut).unwrap();
        assert!(max_abs(&(p.matrix() - HermitianOperator::diagonal(&[2.0, 0.0]).matrix())) < 1e-14);

        let a = HermitianOperator::diagonal(&[9.0, 1e-20]);
        let p = supported_power(&a, -1.0, cut).unwrap();
        assert!(max_abs(&(p.matrix() - HermitianOperator::diagonal(&[1.0 / 9.0, 0.0]).matrix())) < 1e-14);
    }

    #[test]
    fn supported_power_rejects_indefinite() {
        let a = HermitianOperator::diagonal(&[1.0, -0.1]);
        assert!(matches!(supported_power(&a, 0.5, SupportCutoff::default()), Err(Error::NotPsd(_))));
    }

    #[test]
    fn support_projection_examples() {
        let cut = SupportCutoff::default();
        assert_eq!(support_projection(&HermitianOperator::zeros(3), cut).unwrap().rank, 0);
        let mut rng = rng_from_seed(1);
        let full = random_psd(3, 3, &mut rng);
        let p = support_projection(&full, cut).unwrap();
        assert_eq!(p.rank, 3);
        assert!(max_abs(&(p.matrix() - CMat::identity(3, 3))) < 1e-12);
        let v = CVec::from_vec(vec![c(0.6), C64::new(0.0, 0.8)]);
        let rank1 = HermitianOperator::pure(&v).unwrap().scaled(2.5);
        let p = support_projection(&rank1, cut).unwrap();
        assert!(max_abs(&(p.matrix() - &v * v.adjoint())) < 1e-12);
    }

    #[test]
    fn projection_meet_examples() {
        let cut = SupportCutoff::default();
        let e0 = support_projection(&HermitianOperator::diagonal(&[1.0, 0.0]), cut).unwrap();
        let e1 = support_projection(&HermitianOperator::diagonal(&[0.0, 1.0]), cut).unwrap();
        assert_eq!(projection_meet(&e0, &e1).unwrap().rank, 0);
        let m = projection_meet(&e0, &e0).unwrap();
        assert!(max_abs(&(m.matrix() - e0.matrix())) < 1e-12);
        let id = support_projection(&HermitianOperator::identity(2), cut).unwrap();
        let m = projection_meet(&id, &e1).unwrap();
        assert_eq!(m.rank, 1);
        assert!(max_abs(&(m.matrix() - e1.matrix())) < 1e-12);
        let three = support_projection(&HermitianOperator::identity(3), cut).unwrap();
        assert!(matches!(projection_meet(&id, &three), Err(Error::DimMismatch(2, 3))));
    }

    #[test]
    fn psd_leq_examples() {
        let mut rng = rng_from_seed(2);
        let rho = random_density(3, &mut rng);
        assert!(psd_leq(&rho, &rho.scaled(2.0), None).unwrap());
        assert!(!psd_leq(&HermitianOperator::diagonal(&[1.0, 0.0]), &HermitianOperator::diagonal(&[0.0, 1.0]), None)
            .unwrap());
    }

    #[test]
    fn logn_examples() {
        let cut = SupportCutoff::default();
        assert!(max_abs(logn(&HermitianOperator::identity(2), cut).unwrap().matrix()) < 1e-15);
        let l = logn(&HermitianOperator::diagonal(&[std::f64::consts::E, 0.0]), cut).unwrap();
        assert!(max_abs(&(l.matrix() - HermitianOperator::diagonal(&[1.0, 0.0]).matrix())) < 1e-14);
        let v = CVec::from_vec(vec![C64::new(0.0, 1.0), c(0.0), c(0.0)]);
        let p = HermitianOperator::pure(&v).unwrap();
        let l = logn(&p.scaled(std::f64::consts::E), cut).unwrap();
        assert!(max_abs(&(l.matrix() - p.matrix())) < 1e-14);
    }

    #[test]
    fn pinch_exp_examples() {
        let cut = SupportCutoff::default();
        let half = HermitianOperator::diagonal(&[0.5, 0.5]);
        assert!((pinch_exp(&half, &half, 2.0, cut).unwrap().to_f64() - 1.0).abs() < 1e-14);
        let r = HermitianOperator::diagonal(&[0.75, 0.25]);
        assert!((pinch_exp(&r, &half, 2.0, cut).unwrap().to_f64() - 1.25).abs() < 1e-14);
        let s = HermitianOperator::diagonal(&[1.0, 0.0]);
        assert_eq!(pinch_exp(&r, &s, 1.5, cut).unwrap(), ExtendedReal::PosInf);
        let e1 = HermitianOperator::diagonal(&[0.0, 1.0]);
        assert_eq!(pinch_exp(&s, &e1, 0.5, cut).unwrap(), ExtendedReal::Finite(0.0));
    }

    #[test]
    fn trace_power_examples() {
        let cut = SupportCutoff::default();
        assert!((trace_power(&HermitianOperator::identity(4), 2.7, cut).unwrap() - 4.0).abs() < 1e-14);
        assert!((trace_power(&HermitianOperator::diagonal(&[4.0, 1.0]), 0.5, cut).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn power_inequality_on_random_compressions() {
        let cut = SupportCutoff::default();
        let mut rng = rng_from_seed(11);
        for _ in 0..50 {
            let a = random_psd(4, 4, &mut rng);
            let p = support_projection(&random_psd(4, 2, &mut rng), cut).unwrap();
            let pap = a.conjugate_by(p.matrix()).unwrap();
            for z in [0.5, 1.0, 2.0, 3.0] {
                let lhs = trace_power(&pap, z, cut).unwrap();
                let rhs = trace_power(&a, z, cut).unwrap();
                // A is full rank and P is not the identity, so the gap is strict.
                assert!(lhs < rhs - 1e-6, "z={z}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn trace_monotonicity_for_ordered_pairs() {
        let cut = SupportCutoff::default();
        let mut rng = rng_from_seed(12);
        for _ in 0..50 {
            let a = random_psd(3, 3, &mut rng);
            let b = a.add(&random_psd(3, 2, &mut rng)).unwrap();
            for z in [1.0, 1.5, 2.0, 3.0] {
                assert!(trace_power(&a, z, cut).unwrap() <= trace_power(&b, z, cut).unwrap() + 1e-9);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn prop_power_roundtrip(seed in 0u64..10_000, d in 1usize..=4, r in 1usize..=4) {
            let cut = SupportCutoff::default();
            let mut rng = rng_from_seed(seed);
            let a = random_psd(d, r.min(d), &mut rng);
            for x in [0.5, -0.5, 1.0, -1.0, 2.0] {
                let back = supported_power(&supported_power(&a, x, cut).unwrap(), 1.0 / x, cut).unwrap();
                prop_assert!(max_abs(&(back.matrix() - a.matrix())) < 1e-8);
                let prod = supported_power(&a, -x, cut).unwrap().matrix() * supported_power(&a, x, cut).unwrap().matrix();
                let proj = support_projection(&a, cut).unwrap();
                prop_assert!(max_abs(&(prod - proj.matrix())) < 1e-9);
            }
        }

        #[test]
        fn prop_meet_symmetric_and_rank_bounded(seed in 0u64..10_000, r1 in 1usize..=4, r2 in 1usize..=4) {
            let cut = SupportCutoff::default();
            let mut rng = rng_from_seed(seed);
            let p = support_projection(&random_psd(4, r1, &mut rng), cut).unwrap();
            let q = support_projection(&random_psd(4, r2, &mut rng), cut).unwrap();
            let pq = projection_meet(&p, &q).unwrap();
            let qp = projection_meet(&q, &p).unwrap();
            prop_assert_eq!(pq.rank, qp.rank);
            prop_assert!(max_abs(&(pq.matrix() - qp.matrix())) < 1e-8);
            prop_assert!(pq.rank <= p.rank.min(q.rank));
            prop_assert!(max_abs(&(pq.matrix() * pq.matrix() - pq.matrix())) < 1e-10);
        }
    }
}
