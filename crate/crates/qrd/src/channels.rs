//! Channels given by Kraus operators, their Choi matrices, the CP order,
//! the channel max-relative entropy, and channel divergences optimized over
//! pure bipartite inputs.

use crate::classical::{classical_renyi, WeightVector};
use crate::divergences::{d_alpha_z, d_max, d_max_bisection, umegaki, DivergenceParams, ZParam};
use crate::measured::measured_renyi_lower;
use crate::opcore::{
    op_norm, psd_leq, support_contained, support_projection, CMat, CVec, HermitianOperator, SupportCutoff, C64,
};
use crate::random::{gaussian, rng_stream};
use crate::{Error, ExtendedReal, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

pub const DEFAULT_RESTARTS: usize = 32;
const GRAD_STEP: f64 = 1e-6;
const MAX_ITERS: usize = 150;

/// A completely positive map `ρ ↦ Σ K_i ρ K_i†` with its Choi matrix
/// `Σ_{ij} |i⟩⟨j| ⊗ N(|i⟩⟨j|)` (input factor first, computational basis).
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    d_in: usize,
    d_out: usize,
    kraus: Vec<CMat>,
    choi: HermitianOperator,
    trace_preserving: bool,
    cp_plus: bool,
}

impl Channel {
    pub fn from_kraus(kraus: Vec<CMat>) -> Result<Self> {
        let first =
            kraus.first().ok_or_else(|| Error::Malformed("channel needs at least one Kraus operator".into()))?;
        let (d_out, d_in) = first.shape();
        if d_in == 0 || d_out == 0 {
            return Err(Error::Malformed("empty Kraus operator".into()));
        }
        for k in &kraus {
            if k.shape() != (d_out, d_in) {
                return Err(Error::DimMismatch(d_out * d_in, k.nrows() * k.ncols()));
            }
        }
        let n = d_in * d_out;
        let choi = CMat::from_fn(n, n, |r, c| {
            let (i, a) = (r / d_out, r % d_out);
            let (j, b) = (c / d_out, c % d_out);
            kraus.iter().map(|k| k[(a, i)] * k[(b, j)].conj()).sum()
        });
        let choi = HermitianOperator::new(choi)?;
        let mut kk = CMat::zeros(d_in, d_in);
        for k in &kraus {
            kk += k.adjoint() * k;
        }
        let trace_preserving = op_norm(&(&kk - CMat::identity(d_in, d_in))) <= 1e-9;
        let kk = HermitianOperator::new(kk)?;
        let cp_plus = kk.min_eigenvalue() > 1e-12 * kk.max_eigenvalue().max(f64::MIN_POSITIVE);
        Ok(Channel { d_in, d_out, kraus, choi, trace_preserving, cp_plus })
    }

    /// Kraus operators from the eigen-decomposition of a PSD Choi matrix.
    pub fn from_choi(d_in: usize, d_out: usize, choi: &HermitianOperator) -> Result<Self> {
        if choi.dim() != d_in * d_out {
            return Err(Error::DimMismatch(d_in * d_out, choi.dim()));
        }
        choi.check_psd()?;
        let thr = SupportCutoff::default().threshold(choi.max_eigenvalue());
        let v = choi.eigenvectors();
        let kraus: Vec<CMat> = choi
            .eigenvalues()
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > thr)
            .map(|(m, &l)| CMat::from_fn(d_out, d_in, |a, i| v[(i * d_out + a, m)] * l.sqrt()))
            .collect();
        if kraus.is_empty() {
            return Err(Error::ZeroOperator);
        }
        Channel::from_kraus(kraus)
    }

    /// Classical channel with transition matrix `w[x][y] = W(y|x)`.
    pub fn classical(w: &[Vec<f64>]) -> Result<Self> {
        let d_in = w.len();
        let d_out = w.first().map_or(0, |r| r.len());
        if d_in == 0 || d_out == 0 || w.iter().any(|r| r.len() != d_out) {
            return Err(Error::Malformed("transition matrix must be rectangular and nonempty".into()));
        }
        let mut kraus = Vec::new();
        for (x, row) in w.iter().enumerate() {
            for (y, &p) in row.iter().enumerate() {
                if !(p >= 0.0) {
                    return Err(Error::BadParams("transition probabilities must be nonnegative".into()));
                }
                if p > 0.0 {
                    let mut k = CMat::zeros(d_out, d_in);
                    k[(y, x)] = C64::new(p.sqrt(), 0.0);
                    kraus.push(k);
                }
            }
        }
        Channel::from_kraus(kraus)
    }

    pub fn identity(d: usize) -> Self {
        Channel::from_kraus(vec![CMat::identity(d, d)]).expect("identity is a valid channel")
    }

    /// `ρ ↦ (1 − p) ρ + p Tr(ρ) I/d`, with Weyl operators as Kraus operators.
    pub fn depolarizing(d: usize, p: f64) -> Result<Self> {
        let dd = (d * d) as f64;
        if !(0.0..=dd / (dd - 1.0)).contains(&p) || d == 0 {
            return Err(Error::BadParams(format!("depolarizing parameter {p} outside [0, d²/(d²−1)]")));
        }
        let omega = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / d as f64);
        let mut kraus = Vec::with_capacity(d * d);
        for a in 0..d {
            for b in 0..d {
                let weight = if a == 0 && b == 0 { 1.0 - p + p / dd } else { p / dd };
                if weight == 0.0 {
                    continue;
                }
                // X^a Z^b
                let k = CMat::from_fn(d, d, |r, c| {
                    if r == (c + a) % d {
                        omega.powu((b * c) as u32) * weight.sqrt()
                    } else {
                        C64::new(0.0, 0.0)
                    }
                });
                kraus.push(k);
            }
        }
        Channel::from_kraus(kraus)
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    pub fn choi(&self) -> &HermitianOperator {
        &self.choi
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    /// Maps nonzero PSD operators to nonzero outputs.
    pub fn is_cp_plus(&self) -> bool {
        self.cp_plus
    }

    pub fn apply(&self, rho: &HermitianOperator) -> Result<HermitianOperator> {
        if rho.dim() != self.d_in {
            return Err(Error::DimMismatch(self.d_in, rho.dim()));
        }
        let mut out = CMat::zeros(self.d_out, self.d_out);
        for k in &self.kraus {
            out += k * rho.matrix() * k.adjoint();
        }
        HermitianOperator::new((&out + out.adjoint()).scale(0.5))
    }

    /// `(id ⊗ N)(ρ)` for ρ on `C^{aux} ⊗ C^{d_in}`.
    pub fn apply_extended(&self, rho: &HermitianOperator) -> Result<HermitianOperator> {
        let n = rho.dim();
        if !n.is_multiple_of(self.d_in) {
            return Err(Error::DimMismatch(self.d_in, n));
        }
        let aux = n / self.d_in;
        let eye = CMat::identity(aux, aux);
        let m = aux * self.d_out;
        let mut out = CMat::zeros(m, m);
        for k in &self.kraus {
            let big = eye.kronecker(k);
            out += &big * rho.matrix() * big.adjoint();
        }
        HermitianOperator::new((&out + out.adjoint()).scale(0.5))
    }

    fn same_shape(&self, other: &Channel) -> Result<()> {
        if self.d_in != other.d_in {
            return Err(Error::DimMismatch(self.d_in, other.d_in));
        }
        if self.d_out != other.d_out {
            return Err(Error::DimMismatch(self.d_out, other.d_out));
        }
        Ok(())
    }
}

/// Whether `λ N₂ − N₁` is completely positive (Choi matrix PSD within 1e-9).
pub fn cp_order_check(n1: &Channel, n2: &Channel, lambda: f64) -> Result<bool> {
    n1.same_shape(n2)?;
    psd_leq(&n1.choi, &n2.choi.scaled(lambda), Some(1e-9))
}

/// `D_max(N₁‖N₂)`: the max-relative entropy of the Choi matrices.
pub fn channel_dmax(n1: &Channel, n2: &Channel) -> Result<ExtendedReal> {
    n1.same_shape(n2)?;
    d_max(&n1.choi, &n2.choi)
}

/// `log inf{λ : λN₂ − N₁ is CP}` by bisection.
pub fn channel_dmax_bisection(n1: &Channel, n2: &Channel) -> Result<ExtendedReal> {
    n1.same_shape(n2)?;
    d_max_bisection(&n1.choi, &n2.choi, 1e-10)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelDivergenceKind {
    Renyi { alpha: f64, z: ZParam },
    Umegaki,
    Measured { alpha: f64 },
    Dmax,
}

impl fmt::Display for ChannelDivergenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelDivergenceKind::Renyi { alpha, z } => match z {
                ZParam::Finite(z) => write!(f, "renyi(alpha={alpha}, z={z})"),
                ZParam::Infinity => write!(f, "renyi(alpha={alpha}, z=inf)"),
                ZParam::ZeroLimit => write!(f, "renyi(alpha={alpha}, z=0)"),
            },
            ChannelDivergenceKind::Umegaki => write!(f, "umegaki"),
            ChannelDivergenceKind::Measured { alpha } => write!(f, "measured(alpha={alpha})"),
            ChannelDivergenceKind::Dmax => write!(f, "dmax"),
        }
    }
}

impl ChannelDivergenceKind {
    /// Only divergences monotone under channels are optimized:
    /// `max{α/2, α−1} ≤ z ≤ α` for α > 1, `z ≥ max{α, 1−α}` for α < 1.
    pub fn check_whitelisted(&self) -> Result<()> {
        let ok = match *self {
            ChannelDivergenceKind::Renyi { alpha, z } => {
                DivergenceParams::new(alpha, z).is_ok()
                    && match z {
                        ZParam::Finite(z) if alpha > 1.0 => (alpha / 2.0).max(alpha - 1.0) <= z && z <= alpha,
                        ZParam::Finite(z) if alpha < 1.0 => z >= alpha.max(1.0 - alpha),
                        ZParam::Finite(_) => true,
                        ZParam::Infinity => alpha < 1.0,
                        ZParam::ZeroLimit => false,
                    }
            }
            ChannelDivergenceKind::Measured { alpha } => alpha > 0.0 && alpha.is_finite(),
            ChannelDivergenceKind::Umegaki | ChannelDivergenceKind::Dmax => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::KindNotWhitelisted(self.to_string()))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDivergenceResult {
    pub value: ExtendedReal,
    /// Unit vector on `C^{d_in} ⊗ C^{d_in}`.
    pub argmax_state: CVec,
    pub restarts_used: usize,
    pub converged: bool,
}

/// `N₁ ⊗ id(ψ)` and `N₂ ⊗ id(ψ)`. When the Choi supports are nested, every
/// output pair satisfies `ρ⁰ ≤ σ⁰`, so ρ is compressed onto σ's support;
/// otherwise eigenvalues near the cutoff can fake a support violation.
fn outputs(n1: &Channel, n2: &Channel, psi: &CVec, nested: bool) -> Result<(HermitianOperator, HermitianOperator)> {
    let rho = HermitianOperator::pure(psi)?;
    let (a, b) = (n1.apply_extended(&rho)?, n2.apply_extended(&rho)?);
    if !nested {
        return Ok((a, b));
    }
    let p = support_projection(&b, SupportCutoff::default())?;
    let m = p.matrix() * a.matrix() * p.matrix();
    Ok((HermitianOperator::new((&m + m.adjoint()).scale(0.5))?, b))
}

fn choi_nested(n1: &Channel, n2: &Channel) -> Result<bool> {
    Ok(support_contained(&n1.choi, &n2.choi, SupportCutoff::default())?.contained)
}

/// The divergence of the two outputs on input `ψ`.
///
/// Measured kinds use the fixed-seed optimizer, so repeated calls agree.
pub fn evaluate_at(
    n1: &Channel,
    n2: &Channel,
    kind: ChannelDivergenceKind,
    psi: &CVec,
    seed: u64,
) -> Result<ExtendedReal> {
    n1.same_shape(n2)?;
    evaluate_nested(n1, n2, kind, psi, seed, choi_nested(n1, n2)?)
}

fn evaluate_nested(
    n1: &Channel,
    n2: &Channel,
    kind: ChannelDivergenceKind,
    psi: &CVec,
    seed: u64,
    nested: bool,
) -> Result<ExtendedReal> {
    let (a, b) = outputs(n1, n2, psi, nested)?;
    match kind {
        ChannelDivergenceKind::Renyi { alpha, .. } if alpha == 1.0 => umegaki(&a, &b),
        ChannelDivergenceKind::Renyi { alpha, z } => Ok(d_alpha_z(&a, &b, DivergenceParams::new(alpha, z)?)?.d),
        ChannelDivergenceKind::Umegaki => umegaki(&a, &b),
        ChannelDivergenceKind::Measured { alpha } => Ok(measured_renyi_lower(&a, &b, alpha, 2, seed)?.value),
        ChannelDivergenceKind::Dmax => d_max(&a, &b),
    }
}

/// Cheap objective used inside the state search.
fn inner_value(n1: &Channel, n2: &Channel, kind: ChannelDivergenceKind, psi: &CVec, nested: bool) -> f64 {
    let v = match kind {
        ChannelDivergenceKind::Measured { alpha } => {
            outputs(n1, n2, psi, nested).and_then(|(a, b)| basis_measured(&a, &b, alpha))
        }
        _ => evaluate_nested(n1, n2, kind, psi, 0, nested).map(|v| v.to_f64()),
    };
    v.unwrap_or(f64::NEG_INFINITY)
}

/// Best of the projective measurements in the eigenbases of a, b and b^{-1/2} a b^{-1/2}.
fn basis_measured(a: &HermitianOperator, b: &HermitianOperator, alpha: f64) -> Result<f64> {
    let s = crate::opcore::supported_power(b, -0.5, SupportCutoff::default())?;
    let ratio = HermitianOperator::new(s.matrix() * a.matrix() * s.matrix())?;
    let mut best = f64::NEG_INFINITY;
    for u in [a.eigenvectors(), b.eigenvectors(), ratio.eigenvectors()] {
        let w = |m: &HermitianOperator| -> Vec<f64> {
            (0..u.ncols()).map(|j| (u.column(j).adjoint() * m.matrix() * u.column(j))[(0, 0)].re.max(0.0)).collect()
        };
        if let (Ok(p), Ok(q)) = (WeightVector::new(w(a)), WeightVector::new(w(b))) {
            best = best.max(classical_renyi(&p, &q, alpha)?.to_f64());
        }
    }
    Ok(best)
}

fn unit_from(x: &[f64]) -> CVec {
    let n = x.len() / 2;
    let v = CVec::from_fn(n, |i, _| C64::new(x[2 * i], x[2 * i + 1]));
    let nrm = v.norm();
    v.unscale(nrm)
}

fn params_of(v: &CVec) -> Vec<f64> {
    v.iter().flat_map(|z| [z.re, z.im]).collect()
}

/// Gradient ascent on the sphere: numeric gradient, Armijo step, renormalization.
fn sphere_ascent(f: &(impl Fn(&CVec) -> f64 + Sync), start: CVec) -> (CVec, f64, bool) {
    let mut x = params_of(&start);
    let mut fx = f(&start);
    let mut step = 0.5;
    for _ in 0..MAX_ITERS {
        let g: Vec<f64> = (0..x.len())
            .map(|i| {
                let mut y = x.clone();
                y[i] += GRAD_STEP;
                let fp = f(&unit_from(&y));
                y[i] -= 2.0 * GRAD_STEP;
                let fm = f(&unit_from(&y));
                let g = (fp - fm) / (2.0 * GRAD_STEP);
                if g.is_finite() {
                    g
                } else {
                    0.0
                }
            })
            .collect();
        let gg: f64 = g.iter().map(|v| v * v).sum();
        if gg < 1e-20 {
            return (unit_from(&x), fx, true);
        }
        let mut moved = false;
        while step > 1e-12 {
            let y: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a + step * b).collect();
            let uy = unit_from(&y);
            let fy = f(&uy);
            if fy >= fx + 1e-4 * step * gg {
                let gain = fy - fx;
                x = params_of(&uy);
                fx = fy;
                moved = true;
                step *= 2.0;
                if gain < 1e-11 {
                    return (uy, fx, true);
                }
                break;
            }
            step *= 0.5;
        }
        if !moved {
            return (unit_from(&x), fx, true);
        }
    }
    (unit_from(&x), fx, false)
}

fn max_entangled(d: usize) -> CVec {
    let mut v = CVec::zeros(d * d);
    for i in 0..d {
        v[i * d + i] = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    }
    v
}

fn seed_states(d: usize, restarts: usize, seed: u64, warm: Option<&CVec>) -> Vec<CVec> {
    let mut starts = vec![max_entangled(d)];
    for i in 0..d {
        let mut v = CVec::zeros(d * d);
        v[i * d + i] = C64::new(1.0, 0.0);
        starts.push(v);
    }
    if let Some(w) = warm {
        starts.push(w.clone());
    }
    for r in 0..restarts {
        let mut rng = rng_stream(seed, r as u64);
        let v = CVec::from_fn(d * d, |_, _| C64::new(gaussian(&mut rng), gaussian(&mut rng)));
        let n = v.norm();
        starts.push(v.unscale(n));
    }
    starts
}

/// `sup_ψ D(N₁⊗id(ψ) ‖ N₂⊗id(ψ))` over pure inputs with a `d_in`-dimensional
/// reference, as a certified lower bound; exact for the D_max kind.
pub fn channel_divergence(
    n1: &Channel,
    n2: &Channel,
    kind: ChannelDivergenceKind,
    restarts: usize,
    seed: u64,
) -> Result<ChannelDivergenceResult> {
    channel_divergence_warm(n1, n2, kind, restarts, seed, None)
}

fn channel_divergence_warm(
    n1: &Channel,
    n2: &Channel,
    kind: ChannelDivergenceKind,
    restarts: usize,
    seed: u64,
    warm: Option<&CVec>,
) -> Result<ChannelDivergenceResult> {
    kind.check_whitelisted()?;
    n1.same_shape(n2)?;
    let d = n1.d_in;
    if kind == ChannelDivergenceKind::Dmax {
        return Ok(ChannelDivergenceResult {
            value: channel_dmax(n1, n2)?,
            argmax_state: max_entangled(d),
            restarts_used: 0,
            converged: true,
        });
    }
    let nested = choi_nested(n1, n2)?;
    let f = |psi: &CVec| inner_value(n1, n2, kind, psi, nested);
    let starts = seed_states(d, restarts, seed, warm);
    // an infinite value at a seed needs no search
    for s in &starts {
        if f(s) == f64::INFINITY {
            let value = evaluate_nested(n1, n2, kind, s, seed, nested)?;
            return Ok(ChannelDivergenceResult { value, argmax_state: s.clone(), restarts_used: 0, converged: true });
        }
    }
    let runs: Vec<(CVec, f64, bool)> = starts.into_par_iter().map(|s| sphere_ascent(&f, s)).collect();
    let (mut best, mut best_v, mut conv) = (runs[0].0.clone(), runs[0].1, runs[0].2);
    for (s, v, c) in runs.into_iter().skip(1) {
        if v > best_v {
            best = s;
            best_v = v;
            conv = c;
        }
    }
    let value = evaluate_nested(n1, n2, kind, &best, seed, nested)?;
    Ok(ChannelDivergenceResult { value, argmax_state: best, restarts_used: restarts, converged: conv })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    Sandwiched,
    Petz,
    Measured,
}

impl SweepKind {
    pub fn at(self, alpha: f64) -> ChannelDivergenceKind {
        if alpha == 1.0 {
            return ChannelDivergenceKind::Umegaki;
        }
        match self {
            SweepKind::Sandwiched => ChannelDivergenceKind::Renyi { alpha, z: ZParam::Finite(alpha) },
            SweepKind::Petz => ChannelDivergenceKind::Renyi { alpha, z: ZParam::Finite(1.0) },
            SweepKind::Measured => ChannelDivergenceKind::Measured { alpha },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaSweep {
    pub points: Vec<(f64, ExtendedReal)>,
    /// Nondecreasing in α up to 1e-3.
    pub monotone: bool,
}

/// Channel divergence along an α-grid; every point uses the same restart
/// seeds plus the previous maximizer as a warm start.
pub fn alpha_sweep_channel(
    n1: &Channel,
    n2: &Channel,
    kind: SweepKind,
    alpha_grid: &[f64],
    restarts: usize,
    seed: u64,
) -> Result<AlphaSweep> {
    for &a in alpha_grid {
        kind.at(a).check_whitelisted()?;
    }
    let mut points = Vec::with_capacity(alpha_grid.len());
    let mut warm: Option<CVec> = None;
    for &a in alpha_grid {
        let r = channel_divergence_warm(n1, n2, kind.at(a), restarts, seed, warm.as_ref())?;
        points.push((a, r.value));
        warm = Some(r.argmax_state);
    }
    let mut sorted = points.clone();
    sorted.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let monotone = sorted.windows(2).all(|w| w[0].1.le_within(w[1].1, 1e-3));
    Ok(AlphaSweep { points, monotone })
}

/// Brute-force oracle for classical channels: maximizes the Rényi divergence
/// of the joint distributions `π(x)W₁(y|x)` and `π(x)W₂(y|x)` over a grid
/// on the input simplex with the given step.
pub fn classical_channel_grid(w1: &[Vec<f64>], w2: &[Vec<f64>], alpha: f64, step: f64) -> Result<ExtendedReal> {
    let nx = w1.len();
    if nx == 0 || w2.len() != nx || !(step > 0.0 && step <= 1.0) {
        return Err(Error::BadParams("grid oracle needs matching nonempty channels and step in (0, 1]".into()));
    }
    let m = (1.0 / step).round() as usize;
    let mut best = ExtendedReal::NegInf;
    let mut counts = vec![0usize; nx];
    grid_walk(&mut counts, 0, m, &mut |c| {
        let pi: Vec<f64> = c.iter().map(|&k| k as f64 / m as f64).collect();
        let (mut p, mut q) = (Vec::new(), Vec::new());
        for x in 0..nx {
            for (a, b) in w1[x].iter().zip(&w2[x]) {
                p.push(pi[x] * a);
                q.push(pi[x] * b);
            }
        }
        if let (Ok(p), Ok(q)) = (WeightVector::new(p), WeightVector::new(q)) {
            if let Ok(v) = classical_renyi(&p, &q, alpha) {
                if v.to_f64() > best.to_f64() {
                    best = v;
                }
            }
        }
    });
    Ok(best)
}

fn grid_walk(counts: &mut Vec<usize>, pos: usize, left: usize, visit: &mut impl FnMut(&[usize])) {
    if pos + 1 == counts.len() {
        counts[pos] = left;
        visit(counts);
        return;
    }
    for k in 0..=left {
        counts[pos] = k;
        grid_walk(counts, pos + 1, left - k, visit);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimaxGap {
    /// `inf_α sup_π D_α`.
    pub inf_sup: f64,
    /// `sup_π inf_α D_α`.
    pub sup_inf: f64,
    pub gap: f64,
}

/// Both orders of inf over the α-grid and sup over the input grid, for classical channels.
pub fn classical_minimax_gap(w1: &[Vec<f64>], w2: &[Vec<f64>], alpha_grid: &[f64], step: f64) -> Result<MinimaxGap> {
    let nx = w1.len();
    if nx == 0 || w2.len() != nx || alpha_grid.is_empty() {
        return Err(Error::BadParams("minimax gap needs channels and a nonempty α-grid".into()));
    }
    let m = (1.0 / step).round() as usize;
    let mut sup_per_alpha = vec![f64::NEG_INFINITY; alpha_grid.len()];
    let mut sup_inf = f64::NEG_INFINITY;
    let mut counts = vec![0usize; nx];
    grid_walk(&mut counts, 0, m, &mut |c| {
        let (mut p, mut q) = (Vec::new(), Vec::new());
        for x in 0..nx {
            let pi = c[x] as f64 / m as f64;
            for (a, b) in w1[x].iter().zip(&w2[x]) {
                p.push(pi * a);
                q.push(pi * b);
            }
        }
        let (Ok(p), Ok(q)) = (WeightVector::new(p), WeightVector::new(q)) else { return };
        let mut inf = f64::INFINITY;
        for (i, &a) in alpha_grid.iter().enumerate() {
            let v = classical_renyi(&p, &q, a).map(|v| v.to_f64()).unwrap_or(f64::NAN);
            sup_per_alpha[i] = sup_per_alpha[i].max(v);
            inf = inf.min(v);
        }
        sup_inf = sup_inf.max(inf);
    });
    let inf_sup = sup_per_alpha.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(MinimaxGap { inf_sup, sup_inf, gap: inf_sup - sup_inf })
}
