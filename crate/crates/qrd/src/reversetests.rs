//! Reverse tests: classical pairs (p, q) pushed through a preparation
//! `δ_i ↦ ω_i` onto (ρ, σ). They certify upper bounds on maximal
//! f-divergences, can be shortened by a convex-hull folding step, and
//! drive a local search for the maximal Rényi divergence beyond α = 2.

use crate::classical::{classical_fdiv, classical_q, classical_renyi, ConvexFunctionSpec, WeightVector};
use crate::divergences::{d_hat_alpha, validate_pair};
use crate::opcore::{op_norm, support_contained, supported_power, CMat, HermitianOperator, SupportCutoff};
use crate::random::{random_pure, rng_stream};
use crate::{Error, ExtendedReal, Result};
use argmin::core::{CostFunction, Executor};
use argmin::solver::neldermead::NelderMead;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

/// Reconstruction tolerance for `Σ p_i ω_i = ρ`, `Σ q_i ω_i = σ`.
pub const RECONSTRUCTION_TOL: f64 = 1e-9;
/// Residual below which a column counts as inside the hull of the others.
pub const HULL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ReverseTest {
    omegas: Vec<HermitianOperator>,
    p: WeightVector,
    q: WeightVector,
}

impl ReverseTest {
    /// Columns must be PSD with unit trace (within 1e-10) on a common space.
    pub fn new(omegas: Vec<HermitianOperator>, p: WeightVector, q: WeightVector) -> Result<Self> {
        let n = omegas.len();
        if n == 0 {
            return Err(Error::BadParams("reverse test needs at least one column".into()));
        }
        if p.len() != n || q.len() != n {
            return Err(Error::DimMismatch(n, if p.len() != n { p.len() } else { q.len() }));
        }
        let d = omegas[0].dim();
        for w in &omegas {
            if w.dim() != d {
                return Err(Error::DimMismatch(d, w.dim()));
            }
            if w.min_eigenvalue() < -1e-10 {
                return Err(Error::NotPsd(w.min_eigenvalue()));
            }
            if (w.trace() - 1.0).abs() > 1e-10 {
                return Err(Error::BadParams(format!("column trace {} is not 1", w.trace())));
            }
        }
        Ok(ReverseTest { omegas, p, q })
    }

    pub fn omegas(&self) -> &[HermitianOperator] {
        &self.omegas
    }

    pub fn p(&self) -> &WeightVector {
        &self.p
    }

    pub fn q(&self) -> &WeightVector {
        &self.q
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.omegas[0].dim()
    }

    fn push_forward(&self, w: &WeightVector) -> CMat {
        let d = self.dim();
        let mut m = CMat::zeros(d, d);
        for (o, &x) in self.omegas.iter().zip(w.values()) {
            m += o.matrix().scale(x);
        }
        m
    }
}

/// Both reconstruction identities within 1e-9 in operator norm.
pub fn validate_reverse_test(rt: &ReverseTest, rho: &HermitianOperator, sigma: &HermitianOperator) -> Result<bool> {
    if rt.dim() != rho.dim() {
        return Err(Error::DimMismatch(rt.dim(), rho.dim()));
    }
    if rt.dim() != sigma.dim() {
        return Err(Error::DimMismatch(rt.dim(), sigma.dim()));
    }
    let er = op_norm(&(rt.push_forward(&rt.p) - rho.matrix()));
    let es = op_norm(&(rt.push_forward(&rt.q) - sigma.matrix()));
    Ok(er <= RECONSTRUCTION_TOL && es <= RECONSTRUCTION_TOL)
}

/// `S_f^cl(p‖q)`: an upper bound on the maximal f-divergence of the target pair.
pub fn rt_f_divergence(rt: &ReverseTest, f: &ConvexFunctionSpec) -> Result<ExtendedReal> {
    classical_fdiv(f, &rt.p, &rt.q)
}

/// Reverse test built from the spectral decomposition of `σ^{−1/2}ρσ^{−1/2}`;
/// its classical Rényi divergence equals `D̂_α`.
///
/// When ρ⁰ ≰ σ⁰ the part of ρ outside the shorted operator becomes one extra
/// column with `q = 0`.
pub fn spectral_reverse_test(rho: &HermitianOperator, sigma: &HermitianOperator) -> Result<ReverseTest> {
    validate_pair(rho, sigma)?;
    let cutoff = SupportCutoff::default();
    let d = rho.dim();
    let rb = sigma.rank(cutoff);
    let w = sigma.eigenvectors();
    let ws = w.columns(0, rb).into_owned();
    let rs = w.adjoint() * rho.matrix() * w;
    let mut block = rs.view((0, 0), (rb, rb)).into_owned();
    let contained = support_contained(rho, sigma, cutoff)?.contained;
    if !contained && rb < d {
        let nn = rs.view((rb, rb), (d - rb, d - rb)).into_owned();
        let sn = rs.view((0, rb), (rb, d - rb)).into_owned();
        let nn = HermitianOperator::new((&nn + nn.adjoint()).scale(0.5))?;
        block -= &sn * supported_power(&nn, -1.0, cutoff)?.matrix() * sn.adjoint();
    }
    let b = &sigma.eigenvalues()[..rb];
    let k = CMat::from_fn(rb, rb, |i, j| block[(i, j)] / (b[i] * b[j]).sqrt());
    let k = HermitianOperator::new((&k + k.adjoint()).scale(0.5))?;
    let y = k.eigenvectors();
    let mut omegas = Vec::with_capacity(rb + 1);
    let (mut p, mut q) = (Vec::with_capacity(rb + 1), Vec::with_capacity(rb + 1));
    let mut shorted = CMat::zeros(d, d);
    for m in 0..rb {
        // σ^{1/2} y_m in the original basis
        let v = &ws * DVector::from_fn(rb, |i, _| y[(i, m)] * b[i].sqrt());
        let qm = v.norm_squared();
        let kappa = k.eigenvalues()[m].max(0.0);
        let proj = &v * v.adjoint();
        shorted += proj.scale(kappa);
        omegas.push(HermitianOperator::new(proj.unscale(qm))?);
        p.push(kappa * qm);
        q.push(qm);
    }
    if !contained {
        let rest = HermitianOperator::new(rho.matrix() - shorted)?;
        let t = rest.trace();
        if t > 1e-14 * rho.trace() {
            let rest = rest.map_spectrum(|x| x.max(0.0));
            omegas.push(rest.scaled(1.0 / rest.trace()));
            p.push(t);
            q.push(0.0);
        }
    }
    ReverseTest::new(omegas, WeightVector::new(p)?, WeightVector::new(q)?)
}

/// Real coordinates of a Hermitian matrix (diagonal, then Re/Im of the upper triangle).
fn real_vec(m: &CMat) -> Vec<f64> {
    let d = m.nrows();
    let mut v = Vec::with_capacity(d * d);
    for i in 0..d {
        v.push(m[(i, i)].re);
        for j in i + 1..d {
            v.push(m[(i, j)].re);
            v.push(m[(i, j)].im);
        }
    }
    v
}

/// Lawson–Hanson nonnegative least squares: `min ‖Ax − b‖, x ≥ 0`.
pub(crate) fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = a.ncols();
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let tol = 1e-13 * a.norm().max(1.0);
    for _ in 0..3 * n + 10 {
        let w = a.transpose() * (b - a * &x);
        let cand = (0..n).filter(|&j| !passive[j] && w[j] > tol).max_by(|&i, &j| w[i].partial_cmp(&w[j]).unwrap());
        let Some(j) = cand else { break };
        passive[j] = true;
        loop {
            let idx: Vec<usize> = (0..n).filter(|&k| passive[k]).collect();
            let ap = DMatrix::from_fn(a.nrows(), idx.len(), |r, c| a[(r, idx[c])]);
            let z = ap.clone().svd(true, true).solve(b, 1e-14).unwrap_or_else(|_| DVector::zeros(idx.len()));
            if z.iter().all(|&v| v > 0.0) {
                for (c, &k) in idx.iter().enumerate() {
                    x[k] = z[c];
                }
                break;
            }
            // step back toward the feasible region
            let mut t = 1.0;
            for (c, &k) in idx.iter().enumerate() {
                if z[c] <= 0.0 {
                    let denom = x[k] - z[c];
                    if denom > 0.0 {
                        t = f64::min(t, x[k] / denom);
                    }
                }
            }
            for (c, &k) in idx.iter().enumerate() {
                x[k] += t * (z[c] - x[k]);
                if x[k] <= 1e-15 {
                    x[k] = 0.0;
                    passive[k] = false;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    x
}

/// Convex weights expressing column k through the others, if they exist.
fn hull_weights(rt: &ReverseTest, k: usize) -> Option<Vec<f64>> {
    let others: Vec<usize> = (0..rt.len()).filter(|&i| i != k).collect();
    let cols: Vec<Vec<f64>> = others.iter().map(|&i| real_vec(rt.omegas[i].matrix())).collect();
    let rows = cols[0].len() + 1;
    let a = DMatrix::from_fn(rows, others.len(), |r, c| if r + 1 == rows { 1.0 } else { cols[c][r] });
    let mut target = real_vec(rt.omegas[k].matrix());
    target.push(1.0);
    let b = DVector::from_vec(target);
    let lam = nnls(&a, &b);
    let resid = (&a * &lam - &b).norm();
    if resid > HULL_TOL {
        return None;
    }
    let s: f64 = lam.iter().sum();
    let mut full = vec![0.0; rt.len()];
    for (c, &i) in others.iter().enumerate() {
        full[i] = lam[c] / s;
    }
    Some(full)
}

/// One folding step: find ω_k in the convex hull of the other columns,
/// `ω_k = Σ λ_i ω_i`, and redistribute its weights as `p̃_i = p_i + λ_i p_k`,
/// `q̃_i = q_i + λ_i q_k`. The result has one column fewer and reconstructs
/// the same pair; S_f^cl cannot increase since the fold is a stochastic map.
pub fn caratheodory_reduce(rt: &ReverseTest) -> Result<ReverseTest> {
    let d = rt.dim();
    if rt.len() <= d * d + 1 {
        return Err(Error::BadParams(format!("{} columns do not exceed d² + 1 = {}", rt.len(), d * d + 1)));
    }
    for k in (0..rt.len()).rev() {
        if let Some(lam) = hull_weights(rt, k) {
            let (pk, qk) = (rt.p.values()[k], rt.q.values()[k]);
            let mut omegas = Vec::with_capacity(rt.len() - 1);
            let (mut p, mut q) = (Vec::new(), Vec::new());
            for i in (0..rt.len()).filter(|&i| i != k) {
                omegas.push(rt.omegas[i].clone());
                p.push(rt.p.values()[i] + lam[i] * pk);
                q.push(rt.q.values()[i] + lam[i] * qk);
            }
            return ReverseTest::new(omegas, WeightVector::new(p)?, WeightVector::new(q)?);
        }
    }
    Err(Error::NoConvexWitness)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FixpointStop {
    /// Column count reached d² + 1.
    DimensionBound,
    /// No column lies in the hull of the others.
    NoConvexWitness,
}

/// Repeats [`caratheodory_reduce`] until it no longer applies.
pub fn caratheodory_fixpoint(rt: &ReverseTest) -> (ReverseTest, usize, FixpointStop) {
    let mut cur = rt.clone();
    let mut steps = 0;
    loop {
        match caratheodory_reduce(&cur) {
            Ok(next) => {
                cur = next;
                steps += 1;
            }
            Err(Error::NoConvexWitness) => return (cur, steps, FixpointStop::NoConvexWitness),
            Err(_) => return (cur, steps, FixpointStop::DimensionBound),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaximalUpper {
    pub value: ExtendedReal,
    pub rt: ReverseTest,
    /// The value is the maximal divergence itself, not only an upper bound.
    pub exact: bool,
}

/// Upper bound on the maximal Rényi divergence `D_α^max(ρ‖σ)` certified by a
/// reverse test. Exact (equal to `D̂_α`) for α ∈ (0,1)∪(1,2]; for α > 2 a
/// seeded local search starting from the spectral reverse test.
pub fn maximal_divergence_upper(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    alpha: f64,
    restarts: usize,
    seed: u64,
) -> Result<MaximalUpper> {
    validate_pair(rho, sigma)?;
    if !(alpha > 0.0) || alpha == 1.0 || !alpha.is_finite() {
        return Err(Error::BadAlpha(alpha));
    }
    if alpha > 1.0 && !support_contained(rho, sigma, SupportCutoff::default())?.contained {
        return Err(Error::SupportViolation);
    }
    let base = spectral_reverse_test(rho, sigma)?;
    if alpha <= 2.0 {
        let value = d_hat_alpha(rho, sigma, alpha)?.d;
        return Ok(MaximalUpper { value, rt: base, exact: true });
    }
    let runs: Vec<ReverseTest> =
        (0..restarts.max(1)).into_par_iter().map(|r| local_search(rho, sigma, &base, alpha, seed, r as u64)).collect();
    let mut best = base;
    let mut best_v = classical_renyi(best.p(), best.q(), alpha)?;
    for rt in runs {
        let v = classical_renyi(rt.p(), rt.q(), alpha)?;
        if v.to_f64() < best_v.to_f64() && validate_reverse_test(&rt, rho, sigma)? {
            best = rt;
            best_v = v;
        }
    }
    Ok(MaximalUpper { value: best_v, rt: best, exact: false })
}

fn q_cl(p: &[f64], q: &[f64], alpha: f64) -> f64 {
    match (WeightVector::new(p.to_vec()), WeightVector::new(q.to_vec())) {
        (Ok(p), Ok(q)) => classical_q(&p, &q, alpha).map(|v| v.to_f64()).unwrap_or(f64::INFINITY),
        _ => f64::INFINITY,
    }
}

/// Linear map `x ↦ Σ x_i ω_i` in real coordinates.
fn column_matrix(omegas: &[HermitianOperator]) -> DMatrix<f64> {
    let cols: Vec<Vec<f64>> = omegas.iter().map(|o| real_vec(o.matrix())).collect();
    DMatrix::from_fn(cols[0].len(), cols.len(), |r, c| cols[c][r])
}

/// Nonnegative weights reconstructing `target` from the columns, if exact.
fn solve_weights(a: &DMatrix<f64>, target: &HermitianOperator) -> Option<Vec<f64>> {
    let b = DVector::from_vec(real_vec(target.matrix()));
    let x = nnls(a, &b);
    if (a * &x - &b).norm() > 0.1 * RECONSTRUCTION_TOL {
        return None;
    }
    Some(x.iter().cloned().collect())
}

/// Moves (p, q) inside the kernel of the column map to lower the jointly
/// convex `Q_α^cl`, staying nonnegative.
struct KernelCost<'a> {
    p: &'a [f64],
    q: &'a [f64],
    kernel: &'a DMatrix<f64>,
    alpha: f64,
}

impl KernelCost<'_> {
    fn point(&self, c: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let k = self.kernel.ncols();
        let mut p = self.p.to_vec();
        let mut q = self.q.to_vec();
        for (i, (pi, qi)) in p.iter_mut().zip(q.iter_mut()).enumerate() {
            for j in 0..k {
                *pi += self.kernel[(i, j)] * c[j];
                *qi += self.kernel[(i, j)] * c[k + j];
            }
        }
        (p, q)
    }
}

impl CostFunction for KernelCost<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, c: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        let (p, q) = self.point(c);
        if p.iter().chain(&q).any(|&x| x < 0.0) {
            return Ok(f64::INFINITY);
        }
        Ok(q_cl(&p, &q, self.alpha))
    }
}

fn kernel_basis(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.ncols();
    let eig = (a.transpose() * a).symmetric_eigen();
    let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let idx: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] <= 1e-22 * top).collect();
    DMatrix::from_fn(n, idx.len(), |r, c| eig.eigenvectors[(r, idx[c])])
}

fn refine_weights(a: &DMatrix<f64>, p: Vec<f64>, q: Vec<f64>, alpha: f64) -> (Vec<f64>, Vec<f64>) {
    let kernel = kernel_basis(a);
    let k = kernel.ncols();
    if k == 0 {
        return (p, q);
    }
    let cost = KernelCost { p: &p, q: &q, kernel: &kernel, alpha };
    let x0 = vec![0.0; 2 * k];
    let mut simplex = vec![x0.clone()];
    let scale = 1e-3 * p.iter().chain(&q).cloned().fold(0.0, f64::max);
    for i in 0..2 * k {
        let mut y = x0.clone();
        y[i] = scale;
        simplex.push(y);
    }
    let best = NelderMead::new(simplex)
        .with_sd_tolerance(1e-15)
        .ok()
        .and_then(|s| Executor::new(cost, s).configure(|st| st.max_iters(500)).run().ok())
        .and_then(|r| r.state().best_param.clone());
    match best {
        Some(c) => {
            let cost = KernelCost { p: &p, q: &q, kernel: &kernel, alpha };
            let (np, nq) = cost.point(&c);
            if np.iter().chain(&nq).all(|&x| x >= 0.0) && q_cl(&np, &nq, alpha) <= q_cl(&p, &q, alpha) {
                (np, nq)
            } else {
                (p, q)
            }
        }
        None => (p, q),
    }
}

fn local_search(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    base: &ReverseTest,
    alpha: f64,
    seed: u64,
    stream: u64,
) -> ReverseTest {
    let mut rng = rng_stream(seed, stream);
    let d = rho.dim();
    let n = d * d + 1;
    let mut omegas: Vec<HermitianOperator> = base.omegas.clone();
    let mut p: Vec<f64> = base.p.values().to_vec();
    let mut q: Vec<f64> = base.q.values().to_vec();
    while omegas.len() < n {
        omegas.push(random_pure(d, &mut rng));
        p.push(0.0);
        q.push(0.0);
    }
    let mut best = q_cl(&p, &q, alpha);
    let mut step = 0.3;
    for _ in 0..200 {
        let i = rand::Rng::gen_range(&mut rng, 0..n);
        let dir = random_pure(d, &mut rng);
        let mixed = omegas[i].scaled(1.0 - step).add(&dir.scaled(step)).expect("same dimension");
        let mut trial = omegas.clone();
        trial[i] = mixed;
        let a = column_matrix(&trial);
        let (Some(tp), Some(tq)) = (solve_weights(&a, rho), solve_weights(&a, sigma)) else {
            step *= 0.9;
            continue;
        };
        let (tp, tq) = refine_weights(&a, tp, tq, alpha);
        let v = q_cl(&tp, &tq, alpha);
        if v < best {
            best = v;
            omegas = trial;
            p = tp;
            q = tq;
        } else {
            step = (step * 0.95).max(1e-3);
        }
    }
    let build = || -> Result<ReverseTest> {
        ReverseTest::new(omegas.clone(), WeightVector::new(p.clone())?, WeightVector::new(q.clone())?)
    };
    build().unwrap_or_else(|_| base.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergences::d_max;
    use crate::opcore::{CVec, C64};
    use crate::random::{random_commuting_pair, random_density, rng_from_seed};

    fn random_rt(d: usize, n: usize, seed: u64) -> ReverseTest {
        let mut rng = rng_from_seed(seed);
        let omegas: Vec<_> = (0..n).map(|_| random_density(d, &mut rng)).collect();
        let p = WeightVector::new(crate::random::random_simplex(n, &mut rng)).unwrap();
        let q = WeightVector::new(crate::random::random_simplex(n, &mut rng)).unwrap();
        ReverseTest::new(omegas, p, q).unwrap()
    }

    fn targets(rt: &ReverseTest) -> (HermitianOperator, HermitianOperator) {
        (
            HermitianOperator::new(rt.push_forward(rt.p())).unwrap(),
            HermitianOperator::new(rt.push_forward(rt.q())).unwrap(),
        )
    }

    #[test]
    fn spectral_rt_of_commuting_pair_is_valid() {
        let mut rng = rng_from_seed(51);
        let (r, s) = random_commuting_pair(3, &mut rng);
        let rt = spectral_reverse_test(&r, &s).unwrap();
        assert!(validate_reverse_test(&rt, &r, &s).unwrap());
        let mut p = rt.p().values().to_vec();
        p[0] *= 1.01;
        let bad = ReverseTest::new(rt.omegas().to_vec(), WeightVector::new(p).unwrap(), rt.q().clone()).unwrap();
        assert!(!validate_reverse_test(&bad, &r, &s).unwrap());
    }

    #[test]
    fn spectral_rt_reproduces_d_hat() {
        let mut rng = rng_from_seed(52);
        for _ in 0..10 {
            let r = random_density(3, &mut rng);
            let s = random_density(3, &mut rng);
            let rt = spectral_reverse_test(&r, &s).unwrap();
            assert!(validate_reverse_test(&rt, &r, &s).unwrap());
            for a in [0.5, 1.5, 2.0] {
                let v = classical_renyi(rt.p(), rt.q(), a).unwrap().to_f64();
                assert!((v - d_hat_alpha(&r, &s, a).unwrap().d.to_f64()).abs() < 1e-9);
            }
        }
        // α < 1 with ρ⁰ ≰ σ⁰
        let r = random_density(3, &mut rng);
        let s = crate::random::random_density_rank(3, 2, &mut rng);
        let rt = spectral_reverse_test(&r, &s).unwrap();
        assert!(validate_reverse_test(&rt, &r, &s).unwrap());
        let v = classical_renyi(rt.p(), rt.q(), 0.6).unwrap().to_f64();
        assert!((v - d_hat_alpha(&r, &s, 0.6).unwrap().d.to_f64()).abs() < 1e-9);
    }

    #[test]
    fn rt_f_divergence_matches_classical() {
        let rt = random_rt(2, 3, 53);
        let f = ConvexFunctionSpec::power(2.0).unwrap();
        assert_eq!(rt_f_divergence(&rt, &f).unwrap(), classical_fdiv(&f, rt.p(), rt.q()).unwrap());
    }

    #[test]
    fn nnls_small_cases() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let x = nnls(&a, &DVector::from_vec(vec![1.0, -1.0]));
        assert!((x[0] - 1.0).abs() < 1e-12 && x[1] == 0.0);
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.5, 0.0, 1.0, 0.5]);
        let x = nnls(&a, &DVector::from_vec(vec![0.5, 0.5]));
        assert!((&a * &x - DVector::from_vec(vec![0.5, 0.5])).norm() < 1e-12);
        assert!(x.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn duplicated_column_merges() {
        let base = random_rt(2, 5, 54);
        let mut omegas = base.omegas().to_vec();
        omegas.push(omegas[0].clone());
        let mut p = base.p().values().to_vec();
        let mut q = base.q().values().to_vec();
        let (p0, q0) = (p[0], q[0]);
        p[0] = 0.4 * p0;
        q[0] = 0.4 * q0;
        p.push(0.6 * p0);
        q.push(0.6 * q0);
        let rt = ReverseTest::new(omegas, WeightVector::new(p).unwrap(), WeightVector::new(q).unwrap()).unwrap();
        let (r, s) = targets(&rt);
        let red = caratheodory_reduce(&rt).unwrap();
        assert_eq!(red.len(), 5);
        assert!(validate_reverse_test(&red, &r, &s).unwrap());
        let f = ConvexFunctionSpec::power(2.0).unwrap();
        let before = rt_f_divergence(&rt, &f).unwrap().to_f64();
        let after = rt_f_divergence(&red, &f).unwrap().to_f64();
        assert!(after <= before + 1e-9);
    }

    #[test]
    fn reduction_keeps_validity_when_a_witness_exists() {
        // column 5 is an explicit mixture of the first two
        let mut base = random_rt(2, 5, 55);
        let mix = base.omegas[0].scaled(0.3).add(&base.omegas[1].scaled(0.7)).unwrap();
        base.omegas.push(mix);
        let p = [base.p.values(), &[0.2]].concat();
        let q = [base.q.values(), &[0.1]].concat();
        let rt = ReverseTest::new(base.omegas, WeightVector::new(p).unwrap(), WeightVector::new(q).unwrap()).unwrap();
        let (r, s) = targets(&rt);
        let red = caratheodory_reduce(&rt).unwrap();
        assert!(validate_reverse_test(&red, &r, &s).unwrap());
        for f in
            [ConvexFunctionSpec::power(1.5).unwrap(), ConvexFunctionSpec::power(2.0).unwrap(), ConvexFunctionSpec::Eta]
        {
            let before = rt_f_divergence(&rt, &f).unwrap().to_f64();
            let after = rt_f_divergence(&red, &f).unwrap().to_f64();
            assert!(after <= before + 1e-9);
        }
    }

    #[test]
    fn vertices_in_convex_position_have_no_witness() {
        // six pure qubit states are extreme points of the Bloch ball
        let mut rng = rng_from_seed(56);
        let omegas: Vec<_> = (0..6).map(|_| random_pure(2, &mut rng)).collect();
        let n = omegas.len();
        let rt = ReverseTest::new(
            omegas,
            WeightVector::new(crate::random::random_simplex(n, &mut rng)).unwrap(),
            WeightVector::new(crate::random::random_simplex(n, &mut rng)).unwrap(),
        )
        .unwrap();
        assert_eq!(caratheodory_reduce(&rt), Err(Error::NoConvexWitness));
        let (_, steps, stop) = caratheodory_fixpoint(&rt);
        assert_eq!((steps, stop), (0, FixpointStop::NoConvexWitness));
    }

    #[test]
    fn maximal_upper_examples() {
        let mut rng = rng_from_seed(57);
        let (r, s) = random_commuting_pair(2, &mut rng);
        let m = maximal_divergence_upper(&r, &s, 1.5, 1, 1).unwrap();
        assert!(m.exact);
        let eps: f64 = 0.3;
        let psi = CVec::from_vec(vec![C64::new(eps.sqrt(), 0.0), C64::new((1.0 - eps).sqrt(), 0.0)]);
        let rp = HermitianOperator::pure(&psi).unwrap();
        let sp = HermitianOperator::diagonal(&[0.5 * eps, 1.0 - 0.5 * eps]);
        let m = maximal_divergence_upper(&rp, &sp, 0.7, 1, 1).unwrap();
        assert!((m.value.to_f64() - d_max(&rp, &sp).unwrap().to_f64()).abs() < 1e-10);
        let r = random_density(2, &mut rng);
        let s = random_density(2, &mut rng);
        let m = maximal_divergence_upper(&r, &s, 3.0, 4, 2).unwrap();
        assert!(!m.exact && validate_reverse_test(&m.rt, &r, &s).unwrap());
        let dh = d_hat_alpha(&r, &s, 3.0).unwrap().d.to_f64();
        assert!(m.value.to_f64() <= dh + 1e-6);
        assert!(m.value.to_f64() <= d_max(&r, &s).unwrap().to_f64() + 1e-9);
        assert!(matches!(
            maximal_divergence_upper(
                &HermitianOperator::diagonal(&[0.5, 0.5]),
                &HermitianOperator::diagonal(&[1.0, 0.0]),
                3.0,
                1,
                1
            ),
            Err(Error::SupportViolation)
        ));
    }

    #[test]
    fn certificates_monotone_in_alpha() {
        let rt = random_rt(2, 4, 58);
        let mut prev = f64::NEG_INFINITY;
        for a in [0.3, 0.7, 1.2, 2.0, 3.5] {
            let v = classical_renyi(rt.p(), rt.q(), a).unwrap().to_f64();
            assert!(v >= prev - 1e-10);
            prev = v;
        }
    }
}
