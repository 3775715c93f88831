//! Measured and test-measured Rényi divergences by direct optimization over
//! measurements, and tensor-power estimates of the regularized measured value.
//!
//! Every returned value is recomputed from the returned measurement, so it is
//! a certified lower bound on the corresponding supremum.

use crate::classical::{classical_renyi, WeightVector};
use crate::divergences::validate_pair;
use crate::opcore::{jacobi_eigh, supported_power, CMat, CVec, HermitianOperator, SupportCutoff, C64};
use crate::random::{gaussian, rng_stream};
use crate::{Error, ExtendedReal, Result};
use argmin::core::{CostFunction, Executor};
use argmin::solver::neldermead::NelderMead;
use rayon::prelude::*;
use serde::Serialize;

const GRAD_STEP: f64 = 1e-6;
const MAX_ASCENT_ITERS: usize = 300;
const ASCENT_TOL: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<HermitianOperator>,
}

impl Povm {
    /// Checks `Σ M_i = I` within 1e-9 and `M_i ≥ −1e-10`.
    pub fn new(elements: Vec<HermitianOperator>) -> Result<Self> {
        let d = elements.first().ok_or_else(|| Error::BadParams("empty POVM".into()))?.dim();
        let mut sum = CMat::zeros(d, d);
        for m in &elements {
            if m.dim() != d {
                return Err(Error::DimMismatch(d, m.dim()));
            }
            if m.min_eigenvalue() < -1e-10 {
                return Err(Error::NotPsd(m.min_eigenvalue()));
            }
            sum += m.matrix();
        }
        let dev = crate::opcore::op_norm(&(sum - CMat::identity(d, d)));
        if dev > 1e-9 {
            return Err(Error::BadParams(format!("POVM elements sum to I only within {dev:e}")));
        }
        Ok(Povm { elements })
    }

    /// Projective measurement in the columns of a unitary.
    pub fn from_basis(u: &CMat) -> Result<Self> {
        let els =
            (0..u.ncols()).map(|j| HermitianOperator::pure(&u.column(j).into_owned())).collect::<Result<Vec<_>>>()?;
        Povm::new(els)
    }

    pub fn elements(&self) -> &[HermitianOperator] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }
}

/// Outcome weights `(Tr M_i ρ)_i`, tiny negatives clamped to 0.
pub fn apply_povm(povm: &Povm, rho: &HermitianOperator) -> Result<WeightVector> {
    if povm.dim() != rho.dim() {
        return Err(Error::DimMismatch(povm.dim(), rho.dim()));
    }
    let w = povm
        .elements
        .iter()
        .map(|m| {
            let x = (m.matrix() * rho.matrix()).trace().re;
            if (-1e-12..0.0).contains(&x) {
                0.0
            } else {
                x
            }
        })
        .collect();
    WeightVector::new(w)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasuredResult {
    pub value: ExtendedReal,
    pub povm: Povm,
    pub restarts_used: usize,
    pub converged: bool,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::BadAlpha(alpha));
    }
    Ok(())
}

fn clamp_weights(v: Vec<f64>) -> Result<WeightVector> {
    WeightVector::new(v.into_iter().map(|x| x.max(0.0)).collect())
}

fn value_of(p: Vec<f64>, q: Vec<f64>, alpha: f64) -> f64 {
    match (clamp_weights(p), clamp_weights(q)) {
        (Ok(p), Ok(q)) => classical_renyi(&p, &q, alpha).map(|v| v.to_f64()).unwrap_or(f64::NEG_INFINITY),
        _ => f64::NEG_INFINITY,
    }
}

/// `S^{−1/2}` for a positive definite `S`; `None` when S is numerically singular.
fn inv_sqrt(s: &CMat) -> Option<CMat> {
    let (vals, vecs) = jacobi_eigh(&((s + s.adjoint()).scale(0.5)));
    let top = vals.iter().cloned().fold(0.0, f64::max);
    if !(vals.iter().cloned().fold(f64::INFINITY, f64::min) > 1e-14 * top) {
        return None;
    }
    let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
        vals.len(),
        vals.iter().map(|v| C64::new(v.powf(-0.5), 0.0)),
    ));
    Some(&vecs * d * vecs.adjoint())
}

/// Rank-one factors `a_i` (columns of `A`, d × K) define `M_i = S^{−1/2} a_i a_i† S^{−1/2}`
/// with `S = A A†`; every parameter vector away from singular S is a valid POVM.
struct PovmModel<'a> {
    rho: &'a CMat,
    sigma: &'a CMat,
    d: usize,
    k: usize,
    alpha: f64,
}

impl<'a> PovmModel<'a> {
    fn unpack(&self, x: &[f64]) -> CMat {
        CMat::from_fn(self.d, self.k, |i, j| {
            let idx = 2 * (j * self.d + i);
            C64::new(x[idx], x[idx + 1])
        })
    }

    fn pack(a: &CMat) -> Vec<f64> {
        let mut x = Vec::with_capacity(2 * a.len());
        for j in 0..a.ncols() {
            for i in 0..a.nrows() {
                x.push(a[(i, j)].re);
                x.push(a[(i, j)].im);
            }
        }
        x
    }

    fn normalized(&self, x: &[f64]) -> Option<CMat> {
        let a = self.unpack(x);
        let s = &a * a.adjoint();
        Some(inv_sqrt(&s)? * a)
    }

    fn weights(&self, b: &CMat) -> (Vec<f64>, Vec<f64>) {
        let rb = self.rho * b;
        let sb = self.sigma * b;
        let p = (0..self.k).map(|j| b.column(j).dotc(&rb.column(j)).re).collect();
        let q = (0..self.k).map(|j| b.column(j).dotc(&sb.column(j)).re).collect();
        (p, q)
    }

    fn objective(&self, x: &[f64]) -> f64 {
        match self.normalized(x) {
            Some(b) => {
                let (p, q) = self.weights(&b);
                value_of(p, q, self.alpha)
            }
            None => f64::NEG_INFINITY,
        }
    }

    fn povm(&self, x: &[f64]) -> Result<Povm> {
        let b = self.normalized(x).ok_or(Error::BadParams("degenerate POVM parameters".into()))?;
        let els = (0..self.k)
            .map(|j| {
                let c: CVec = b.column(j).into_owned();
                HermitianOperator::new(&c * c.adjoint())
            })
            .collect::<Result<Vec<_>>>()?;
        Povm::new(els)
    }
}

fn numeric_gradient(f: &(impl Fn(&[f64]) -> f64 + Sync), x: &[f64]) -> Vec<f64> {
    (0..x.len())
        .into_par_iter()
        .map(|i| {
            let mut y = x.to_vec();
            y[i] = x[i] + GRAD_STEP;
            let fp = f(&y);
            y[i] = x[i] - GRAD_STEP;
            let fm = f(&y);
            let g = (fp - fm) / (2.0 * GRAD_STEP);
            if g.is_finite() {
                g
            } else {
                0.0
            }
        })
        .collect()
}

/// Gradient ascent with Armijo backtracking; returns (x, value, converged).
fn ascend(f: &(impl Fn(&[f64]) -> f64 + Sync), mut x: Vec<f64>) -> (Vec<f64>, f64, bool) {
    let mut fx = f(&x);
    let mut step = 1.0;
    for _ in 0..MAX_ASCENT_ITERS {
        let g = numeric_gradient(f, &x);
        let gg: f64 = g.iter().map(|v| v * v).sum();
        if gg < 1e-20 {
            return (x, fx, true);
        }
        let mut accepted = false;
        while step > 1e-14 {
            let y: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a + step * b).collect();
            let fy = f(&y);
            if fy >= fx + 1e-4 * step * gg {
                let gain = fy - fx;
                x = y;
                fx = fy;
                accepted = true;
                step *= 2.0;
                if gain < ASCENT_TOL {
                    return (x, fx, true);
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return (x, fx, true);
        }
    }
    (x, fx, false)
}

/// Eigenbasis of `σ^{−1/2}ρσ^{−1/2}` (on σ's support, completed arbitrarily).
fn ratio_basis(rho: &HermitianOperator, sigma: &HermitianOperator) -> Result<CMat> {
    let s = supported_power(sigma, -0.5, SupportCutoff::default())?;
    let k = HermitianOperator::new(s.matrix() * rho.matrix() * s.matrix())?;
    Ok(k.eigenvectors().clone())
}

fn basis_seed(u: &CMat, k: usize) -> CMat {
    let d = u.nrows();
    let mut a = CMat::zeros(d, k);
    a.view_mut((0, 0), (d, d)).copy_from(u);
    a
}

/// Lower bound on `D_α^meas(ρ‖σ)` over rank-one POVMs with d² outcomes.
///
/// Candidates are the eigenbases of ρ, σ and `σ^{−1/2}ρσ^{−1/2}` (evaluated
/// exactly and then refined) plus `restarts` random starting points, each on
/// its own RNG stream derived from `seed`.
pub fn measured_renyi_lower(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    alpha: f64,
    restarts: usize,
    seed: u64,
) -> Result<MeasuredResult> {
    check_alpha(alpha)?;
    validate_pair(rho, sigma)?;
    let d = rho.dim();
    let k = d * d;
    let model = PovmModel { rho: rho.matrix(), sigma: sigma.matrix(), d, k, alpha };
    let bases = vec![rho.eigenvectors().clone(), sigma.eigenvectors().clone(), ratio_basis(rho, sigma)?];

    // exact basis measurements first; +∞ needs no refinement
    let mut best: Option<(Vec<f64>, f64)> = None;
    for u in &bases {
        let x = PovmModel::pack(&basis_seed(u, k));
        let v = model.objective(&x);
        if best.as_ref().is_none_or(|b| v > b.1) {
            best = Some((x, v));
        }
    }
    let (bx, bv) = best.clone().unwrap();
    if bv == f64::INFINITY {
        return Ok(MeasuredResult {
            value: ExtendedReal::PosInf,
            povm: model.povm(&bx)?,
            restarts_used: 0,
            converged: true,
        });
    }

    let f = |x: &[f64]| model.objective(x);
    let starts: Vec<Vec<f64>> = (0..bases.len() + restarts)
        .map(|r| {
            let mut rng = rng_stream(seed, r as u64);
            let a = if r < bases.len() {
                // keep the basis, give the spare outcomes a small nonzero start
                let mut a = basis_seed(&bases[r], k);
                for j in d..k {
                    for i in 0..d {
                        a[(i, j)] = C64::new(1e-3 * gaussian(&mut rng), 1e-3 * gaussian(&mut rng));
                    }
                }
                a
            } else {
                CMat::from_fn(d, k, |_, _| C64::new(gaussian(&mut rng), gaussian(&mut rng)))
            };
            PovmModel::pack(&a)
        })
        .collect();
    let runs: Vec<(Vec<f64>, f64, bool)> = starts.into_par_iter().map(|x0| ascend(&f, x0)).collect();
    let mut converged = true;
    let (mut bx, mut bv) = (bx, bv);
    for (x, v, c) in runs {
        if v > bv {
            bx = x;
            bv = v;
            converged = c;
        }
    }
    let povm = model.povm(&bx)?;
    let value = classical_renyi(&apply_povm(&povm, rho)?, &apply_povm(&povm, sigma)?, alpha)?;
    Ok(MeasuredResult { value, povm, restarts_used: restarts, converged })
}

/// `T = f(H)` with f the logistic function applied to the spectrum.
fn logistic_op(h: &CMat) -> CMat {
    let (vals, vecs) = jacobi_eigh(h);
    let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
        vals.len(),
        vals.iter().map(|&v| C64::new(1.0 / (1.0 + (-v).exp()), 0.0)),
    ));
    &vecs * d * vecs.adjoint()
}

fn herm_from_params(x: &[f64], d: usize) -> CMat {
    let mut h = CMat::zeros(d, d);
    let mut idx = 0;
    for i in 0..d {
        h[(i, i)] = C64::new(x[idx], 0.0);
        idx += 1;
        for j in i + 1..d {
            let z = C64::new(x[idx], x[idx + 1]);
            idx += 2;
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}

fn params_from_herm(h: &CMat) -> Vec<f64> {
    let d = h.nrows();
    let mut x = Vec::with_capacity(d * d);
    for i in 0..d {
        x.push(h[(i, i)].re);
        for j in i + 1..d {
            x.push(h[(i, j)].re);
            x.push(h[(i, j)].im);
        }
    }
    x
}

fn test_value(t: &CMat, rho: &HermitianOperator, sigma: &HermitianOperator, alpha: f64) -> f64 {
    let tr = |m: &HermitianOperator| (t * m.matrix()).trace().re;
    let (pt, qt) = (tr(rho), tr(sigma));
    value_of(vec![pt, rho.trace() - pt], vec![qt, sigma.trace() - qt], alpha)
}

struct TestCost<'a> {
    rho: &'a HermitianOperator,
    sigma: &'a HermitianOperator,
    alpha: f64,
}

impl CostFunction for TestCost<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        let t = logistic_op(&herm_from_params(x, self.rho.dim()));
        let v = test_value(&t, self.rho, self.sigma, self.alpha);
        Ok(if v.is_finite() { -v } else { 1e300 })
    }
}

fn nelder_mead(cost: TestCost<'_>, x0: Vec<f64>, scale: f64) -> Option<(Vec<f64>, f64)> {
    let mut simplex = vec![x0.clone()];
    for i in 0..x0.len() {
        let mut y = x0.clone();
        y[i] += scale;
        simplex.push(y);
    }
    let solver = NelderMead::new(simplex).with_sd_tolerance(1e-13).ok()?;
    let res = Executor::new(cost, solver).configure(|s| s.max_iters(4000)).run().ok()?;
    let st = res.state();
    Some((st.best_param.clone()?, -st.best_cost))
}

fn two_outcome(t: &CMat) -> Result<Povm> {
    let d = t.nrows();
    let th = HermitianOperator::new((t + t.adjoint()).scale(0.5))?;
    let rest = HermitianOperator::new(CMat::identity(d, d) - th.matrix())?;
    Povm::new(vec![th, rest])
}

/// Lower bound on `D_α^test(ρ‖σ)` over tests `0 ≤ T ≤ I`.
///
/// Seeds are the top-k eigenprojections of `σ^{−1/2}ρσ^{−1/2}` and of ρ − σ,
/// each scored exactly, then refined by Nelder–Mead on `T = logistic(H)`.
pub fn test_measured(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    alpha: f64,
    restarts: usize,
    seed: u64,
) -> Result<MeasuredResult> {
    check_alpha(alpha)?;
    validate_pair(rho, sigma)?;
    let d = rho.dim();
    let mut projections: Vec<CMat> = Vec::new();
    let ratio = ratio_basis(rho, sigma)?;
    let diff = rho.sub(sigma)?;
    for u in [&ratio, diff.eigenvectors()] {
        for k in 1..d {
            let c = u.columns(0, k);
            projections.push(c * c.adjoint());
        }
    }
    // complement of σ's support detects ρ⁰ ≰ σ⁰
    let ns = sigma.rank(SupportCutoff::default());
    if ns < d {
        let c = sigma.eigenvectors().columns(ns, d - ns);
        projections.push(c * c.adjoint());
    }
    let mut best_t = projections[0].clone();
    let mut best_v = f64::NEG_INFINITY;
    for p in &projections {
        let v = test_value(p, rho, sigma, alpha);
        if v > best_v {
            best_v = v;
            best_t = p.clone();
        }
    }
    if best_v == f64::INFINITY {
        return Ok(MeasuredResult {
            value: ExtendedReal::PosInf,
            povm: two_outcome(&best_t)?,
            restarts_used: 0,
            converged: true,
        });
    }
    let eye = CMat::identity(d, d);
    let mut starts: Vec<Vec<f64>> =
        projections.iter().map(|p| params_from_herm(&(p.scale(2.0) - &eye).scale(6.0))).collect();
    for r in 0..restarts {
        let mut rng = rng_stream(seed, r as u64);
        starts.push((0..d * d).map(|_| 2.0 * gaussian(&mut rng)).collect());
    }
    let runs: Vec<Option<(Vec<f64>, f64)>> =
        starts.into_par_iter().map(|x0| nelder_mead(TestCost { rho, sigma, alpha }, x0, 0.5)).collect();
    let mut converged = true;
    for (x, v) in runs.into_iter().flatten() {
        if v > best_v {
            best_v = v;
            best_t = logistic_op(&herm_from_params(&x, d));
            converged = true;
        }
    }
    if best_v == f64::NEG_INFINITY {
        converged = false;
    }
    let povm = two_outcome(&best_t)?;
    let value = classical_renyi(&apply_povm(&povm, rho)?, &apply_povm(&povm, sigma)?, alpha)?;
    Ok(MeasuredResult { value, povm, restarts_used: restarts, converged })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularizedEstimate {
    /// `(n, D_α^meas(ρ^{⊗n}‖σ^{⊗n}) / n)` lower bounds.
    pub points: Vec<(usize, ExtendedReal)>,
    pub sandwiched: ExtendedReal,
    /// Every point is at most the sandwiched divergence + 1e-6 (checked for α ≥ ½).
    pub below_sandwiched: bool,
}

/// Per-copy measured lower bounds on tensor powers, n = 1..=max_n.
pub fn regularized_measured_estimate(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    alpha: f64,
    max_n: usize,
    restarts: usize,
    seed: u64,
) -> Result<RegularizedEstimate> {
    check_alpha(alpha)?;
    validate_pair(rho, sigma)?;
    let d = rho.dim();
    if max_n == 0 || max_n > 3 {
        return Err(Error::BadParams(format!("max_n must be in 1..=3, got {max_n}")));
    }
    let big = d.checked_pow(max_n as u32).unwrap_or(usize::MAX);
    if big > 64 {
        return Err(Error::DimTooLarge(big));
    }
    let mut points = Vec::with_capacity(max_n);
    let (mut rn, mut sn) = (rho.clone(), sigma.clone());
    for n in 1..=max_n {
        if n > 1 {
            rn = rn.kron(rho);
            sn = sn.kron(sigma);
        }
        let v = measured_renyi_lower(&rn, &sn, alpha, restarts, seed.wrapping_add(n as u64))?.value;
        points.push((n, v.finite().map_or(v, |x| ExtendedReal::Finite(x / n as f64))));
    }
    let sandwiched = if alpha == 1.0 {
        crate::divergences::umegaki(rho, sigma)?
    } else {
        crate::divergences::d_alpha_z(rho, sigma, crate::divergences::DivergenceParams::sandwiched(alpha)?)?.d
    };
    let below_sandwiched = alpha < 0.5 || points.iter().all(|(_, v)| v.le_within(sandwiched, 1e-6));
    Ok(RegularizedEstimate { points, sandwiched, below_sandwiched })
}
