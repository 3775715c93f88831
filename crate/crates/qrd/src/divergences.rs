//! Quantum Rényi divergences on operator pairs: the (α, z) family with its
//! z = ∞ and z → 0 limits, Umegaki's relative entropy, the max-relative
//! entropy, the maximal divergence D̂_α, the ALT chain, the D_max-domination
//! test and the variational formula.

use crate::classical::{log_sum_exp, WeightVector};
use crate::opcore::{
    combinations, jacobi_eigh, minor, op_norm, pinch_exp, pinch_meet_rank, psd_leq, support_contained, supported_power,
    trace_power, CMat, HermitianOperator, SupportCutoff, C64,
};
use crate::zlimits::{self, SpectralProfile};
use crate::{Error, ExtendedReal, Result};
use serde::{Deserialize, Serialize};

/// Minors of the overlap matrix below this are treated as exact zeros.
const MINOR_NOISE: f64 = 1e-14;
/// Largest dimension for which Q is evaluated through compound matrices.
const COMPOUND_MAX_DIM: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZParam {
    Finite(f64),
    Infinity,
    ZeroLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceParams {
    pub alpha: f64,
    pub z: ZParam,
}

impl DivergenceParams {
    pub fn new(alpha: f64, z: ZParam) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::BadAlpha(alpha));
        }
        match z {
            ZParam::Finite(z) if !(z > 0.0) || !z.is_finite() => {
                return Err(Error::BadParams(format!("z must be positive, got {z}")))
            }
            ZParam::ZeroLimit if alpha == 1.0 => {
                return Err(Error::BadParams("D_{1,0} is not defined".into()));
            }
            _ => {}
        }
        Ok(DivergenceParams { alpha, z })
    }

    pub fn finite(alpha: f64, z: f64) -> Result<Self> {
        Self::new(alpha, ZParam::Finite(z))
    }

    pub fn sandwiched(alpha: f64) -> Result<Self> {
        Self::new(alpha, ZParam::Finite(alpha))
    }

    pub fn petz(alpha: f64) -> Result<Self> {
        Self::new(alpha, ZParam::Finite(1.0))
    }
}

/// Metadata attached to a divergence value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Note {
    /// `ρ⁰ ∧ σ⁰ = 0` in the z = ∞ formula; Q was taken as 0.
    EmptyMeet,
    /// Support containment was decided close to the slack.
    SupportBorderline,
    /// z → 0 value came from extrapolation, not the spectral formula.
    Extrapolated,
    /// Value is an upper bound on the maximal divergence, not its exact value.
    UpperBoundOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceValue {
    pub q: ExtendedReal,
    pub d: ExtendedReal,
    pub psi: ExtendedReal,
    pub notes: Vec<Note>,
}

impl DivergenceValue {
    /// Builds Q, D and ψ from `log Q`.
    fn from_log_q(log_q: f64, trace_rho: f64, alpha: f64, notes: Vec<Note>) -> Self {
        let d = if log_q == f64::INFINITY {
            ExtendedReal::PosInf
        } else if log_q == f64::NEG_INFINITY {
            // α < 1 with Q = 0
            ExtendedReal::PosInf
        } else {
            ExtendedReal::Finite((log_q - trace_rho.ln()) / (alpha - 1.0))
        };
        let q = if log_q == f64::INFINITY { ExtendedReal::PosInf } else { ExtendedReal::Finite(log_q.exp()) };
        DivergenceValue { q, d, psi: ExtendedReal::from_f64(log_q), notes }
    }
}

pub(crate) fn validate_pair(rho: &HermitianOperator, sigma: &HermitianOperator) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimMismatch(rho.dim(), sigma.dim()));
    }
    for op in [rho, sigma] {
        op.check_psd()?;
        if !(op.max_eigenvalue() > 0.0) {
            return Err(Error::ZeroOperator);
        }
    }
    Ok(())
}

/// Both operators written in σ's eigenbasis: `U = W†V` (rows follow σ,
/// columns follow ρ), spectra restricted to their supports.
struct Frame {
    a: Vec<f64>,
    b: Vec<f64>,
    u: CMat,
}

impl Frame {
    fn new(rho: &HermitianOperator, sigma: &HermitianOperator, cutoff: SupportCutoff) -> Self {
        let ra = rho.rank(cutoff);
        let rb = sigma.rank(cutoff);
        let full = sigma.eigenvectors().adjoint() * rho.eigenvectors();
        Frame {
            a: rho.eigenvalues()[..ra].to_vec(),
            b: sigma.eigenvalues()[..rb].to_vec(),
            u: full.view((0, 0), (rb, ra)).into_owned(),
        }
    }
}

/// `log Tr(ρ^{α/2z} σ^{(1−α)/z} ρ^{α/2z})^z` for finite z (ρ⁰ ≤ σ⁰ or α < 1 assumed).
fn log_q_finite(rho: &HermitianOperator, sigma: &HermitianOperator, alpha: f64, z: f64, cutoff: SupportCutoff) -> f64 {
    let fr = Frame::new(rho, sigma, cutoff);
    let e = (1.0 - alpha) / (2.0 * z);
    let g = alpha / (2.0 * z);
    if rho.dim() <= COMPOUND_MAX_DIM {
        log_q_compound(&fr, e, g, z)
    } else {
        log_q_direct(&fr, e, g, z)
    }
}

/// Singular values of `X = D_b^e U D_a^g` through the norms of its compound
/// matrices, with every entry kept in the log domain.
///
/// `log(s_1⋯s_k) = log‖C_k(X)‖`, and the entries of `C_k(X)` factor as
/// `Π b^e · det U[I,J] · Π a^g`, so no power of an eigenvalue is ever formed.
fn log_q_compound(fr: &Frame, e: f64, g: f64, z: f64) -> f64 {
    let lb: Vec<f64> = fr.b.iter().map(|x| e * x.ln()).collect();
    let la: Vec<f64> = fr.a.iter().map(|x| g * x.ln()).collect();
    let rows: Vec<usize> = (0..fr.b.len()).collect();
    let cols: Vec<usize> = (0..fr.a.len()).collect();
    let r = rows.len().min(cols.len());
    let mut prev = 0.0;
    let mut terms = Vec::with_capacity(r);
    for k in 1..=r {
        let rs = combinations(&rows, k);
        let cs = combinations(&cols, k);
        let mut logs = vec![f64::NEG_INFINITY; rs.len() * cs.len()];
        let mut dets = vec![C64::new(0.0, 0.0); rs.len() * cs.len()];
        let mut lmax = f64::NEG_INFINITY;
        for (i, ri) in rs.iter().enumerate() {
            let li: f64 = ri.iter().map(|&x| lb[x]).sum();
            for (j, cj) in cs.iter().enumerate() {
                let det = minor(&fr.u, ri, cj);
                if det.norm() <= MINOR_NOISE {
                    continue;
                }
                let l = li + cj.iter().map(|&x| la[x]).sum::<f64>();
                logs[i * cs.len() + j] = l;
                dets[i * cs.len() + j] = det;
                lmax = lmax.max(l);
            }
        }
        if lmax == f64::NEG_INFINITY {
            break;
        }
        let m = CMat::from_fn(rs.len(), cs.len(), |i, j| {
            let idx = i * cs.len() + j;
            dets[idx] * (logs[idx] - lmax).exp()
        });
        let s = op_norm(&m);
        if !(s > 0.0) {
            break;
        }
        let logp = lmax + s.ln();
        terms.push(2.0 * z * (logp - prev));
        prev = logp;
    }
    log_sum_exp(terms.into_iter())
}

fn log_q_direct(fr: &Frame, e: f64, g: f64, z: f64) -> f64 {
    let x = CMat::from_fn(fr.b.len(), fr.a.len(), |i, j| fr.u[(i, j)] * (fr.b[i].powf(e) * fr.a[j].powf(g)));
    let m = x.adjoint() * &x;
    let (vals, _) = jacobi_eigh(&((&m + m.adjoint()).scale(0.5)));
    let lmax = vals.iter().cloned().fold(0.0, f64::max);
    let thr = 1e-14 * lmax;
    log_sum_exp(vals.into_iter().filter(|&v| v > thr).map(|v| z * v.ln()))
}

/// `log Q_{α,z}` together with notes, for any admissible z.
fn log_q(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    params: DivergenceParams,
    cutoff: SupportCutoff,
) -> Result<(f64, Vec<Note>)> {
    validate_pair(rho, sigma)?;
    let alpha = params.alpha;
    let sup = support_contained(rho, sigma, cutoff)?;
    let mut notes = Vec::new();
    if sup.borderline {
        notes.push(Note::SupportBorderline);
    }
    if alpha > 1.0 && !sup.contained {
        return Ok((f64::INFINITY, notes));
    }
    match params.z {
        ZParam::Finite(z) => Ok((log_q_finite(rho, sigma, alpha, z, cutoff), notes)),
        ZParam::Infinity => {
            let q = pinch_exp(rho, sigma, alpha, cutoff)?;
            if pinch_meet_rank(rho, sigma, cutoff)? == 0 {
                notes.push(Note::EmptyMeet);
            }
            Ok((q.to_f64().ln(), notes))
        }
        ZParam::ZeroLimit => {
            let v = d_alpha_zero_with(rho, sigma, alpha, cutoff)?;
            let lq = v.psi.to_f64();
            notes.extend(v.notes);
            Ok((lq, notes))
        }
    }
}

/// `Q_{α,z}(ρ‖σ)`; +∞ when α > 1 and ρ⁰ ≰ σ⁰.
pub fn q_alpha_z(rho: &HermitianOperator, sigma: &HermitianOperator, params: DivergenceParams) -> Result<ExtendedReal> {
    let (lq, _) = log_q(rho, sigma, params, SupportCutoff::default())?;
    Ok(if lq == f64::INFINITY { ExtendedReal::PosInf } else { ExtendedReal::Finite(lq.exp()) })
}

/// `D_{α,z}(ρ‖σ)` with Q and ψ; α = 1 gives Umegaki's relative entropy.
pub fn d_alpha_z(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    params: DivergenceParams,
) -> Result<DivergenceValue> {
    d_alpha_z_with(rho, sigma, params, SupportCutoff::default())
}

pub fn d_alpha_z_with(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    params: DivergenceParams,
    cutoff: SupportCutoff,
) -> Result<DivergenceValue> {
    validate_pair(rho, sigma)?;
    let tr = rho.trace();
    if params.alpha == 1.0 {
        let d = umegaki_with(rho, sigma, cutoff)?;
        let q = if d.is_finite() { ExtendedReal::Finite(tr) } else { ExtendedReal::PosInf };
        return Ok(DivergenceValue { q, d, psi: ExtendedReal::Finite(tr.ln()), notes: vec![] });
    }
    let (lq, notes) = log_q(rho, sigma, params, cutoff)?;
    Ok(DivergenceValue::from_log_q(lq, tr, params.alpha, notes))
}

/// Umegaki relative entropy `(1/Trρ) Tr ρ(logn ρ − logn σ)`.
pub fn umegaki(rho: &HermitianOperator, sigma: &HermitianOperator) -> Result<ExtendedReal> {
    umegaki_with(rho, sigma, SupportCutoff::default())
}

pub fn umegaki_with(rho: &HermitianOperator, sigma: &HermitianOperator, cutoff: SupportCutoff) -> Result<ExtendedReal> {
    validate_pair(rho, sigma)?;
    if !support_contained(rho, sigma, cutoff)?.contained {
        return Ok(ExtendedReal::PosInf);
    }
    let fr = Frame::new(rho, sigma, cutoff);
    let mut s = 0.0;
    for (j, &a) in fr.a.iter().enumerate() {
        s += a * a.ln();
        for (i, &b) in fr.b.iter().enumerate() {
            s -= a * fr.u[(i, j)].norm_sqr() * b.ln();
        }
    }
    Ok(ExtendedReal::Finite(s / rho.trace()))
}

/// The matrix `D_b^{-1/2} (W†ρW)|_{σ⁰} D_b^{-1/2}`, unitarily similar to `σ^{-1/2}ρσ^{-1/2}`.
fn ratio_operator(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    cutoff: SupportCutoff,
) -> Result<(HermitianOperator, Vec<f64>)> {
    let fr = Frame::new(rho, sigma, cutoff);
    let rb = fr.b.len();
    let m = CMat::from_fn(rb, rb, |i, j| {
        let mut acc = C64::new(0.0, 0.0);
        for (k, &a) in fr.a.iter().enumerate() {
            acc += fr.u[(i, k)] * fr.u[(j, k)].conj() * a;
        }
        acc / (fr.b[i] * fr.b[j]).sqrt()
    });
    Ok((HermitianOperator::new((&m + m.adjoint()).scale(0.5))?, fr.b))
}

/// `D_max(ρ‖σ) = log‖σ^{−1/2}ρσ^{−1/2}‖_∞`.
pub fn d_max(rho: &HermitianOperator, sigma: &HermitianOperator) -> Result<ExtendedReal> {
    d_max_with(rho, sigma, SupportCutoff::default())
}

pub fn d_max_with(rho: &HermitianOperator, sigma: &HermitianOperator, cutoff: SupportCutoff) -> Result<ExtendedReal> {
    validate_pair(rho, sigma)?;
    if !support_contained(rho, sigma, cutoff)?.contained {
        return Ok(ExtendedReal::PosInf);
    }
    let (k, _) = ratio_operator(rho, sigma, cutoff)?;
    Ok(ExtendedReal::Finite(k.max_eigenvalue().ln()))
}

/// `log inf{λ : ρ ≤ λσ}` by bisection on `psd_leq`; an independent route to D_max.
pub fn d_max_bisection(rho: &HermitianOperator, sigma: &HermitianOperator, tol: f64) -> Result<ExtendedReal> {
    validate_pair(rho, sigma)?;
    if !support_contained(rho, sigma, SupportCutoff::default())?.contained {
        return Ok(ExtendedReal::PosInf);
    }
    let leq = |l: f64| psd_leq(rho, &sigma.scaled(l.exp()), Some(0.0));
    let (mut lo, mut hi) = (-1.0, 1.0);
    while leq(lo)? {
        lo -= 2.0 * (hi - lo);
    }
    while !leq(hi)? {
        hi += 2.0 * (hi - lo);
        if hi > 800.0 {
            return Ok(ExtendedReal::PosInf);
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if leq(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(ExtendedReal::Finite(0.5 * (lo + hi)))
}

/// `D̂_α`: exact maximal divergence for α ∈ (0,1)∪(1,2], an upper bound beyond.
///
/// For α < 1 with ρ⁰ ≰ σ⁰ the value is the limit along `σ + εI`, which is
/// the same formula applied to the shorted operator of ρ onto σ's support.
pub fn d_hat_alpha(rho: &HermitianOperator, sigma: &HermitianOperator, alpha: f64) -> Result<DivergenceValue> {
    let cutoff = SupportCutoff::default();
    validate_pair(rho, sigma)?;
    if !(alpha > 0.0) || alpha == 1.0 || !alpha.is_finite() {
        return Err(Error::BadAlpha(alpha));
    }
    let mut notes = Vec::new();
    if alpha > 2.0 {
        notes.push(Note::UpperBoundOnly);
    }
    let sup = support_contained(rho, sigma, cutoff)?;
    if sup.borderline {
        notes.push(Note::SupportBorderline);
    }
    if alpha > 1.0 && !sup.contained {
        return Ok(DivergenceValue {
            q: ExtendedReal::PosInf,
            d: ExtendedReal::PosInf,
            psi: ExtendedReal::PosInf,
            notes,
        });
    }
    let d = rho.dim();
    let rb = sigma.rank(cutoff);
    let w = sigma.eigenvectors();
    let rs = w.adjoint() * rho.matrix() * w;
    let mut block = rs.view((0, 0), (rb, rb)).into_owned();
    if !sup.contained && rb < d {
        let nn = rs.view((rb, rb), (d - rb, d - rb)).into_owned();
        let sn = rs.view((0, rb), (rb, d - rb)).into_owned();
        let nn = HermitianOperator::new((&nn + nn.adjoint()).scale(0.5))?;
        let pinv = supported_power(&nn, -1.0, cutoff)?;
        block -= &sn * pinv.matrix() * sn.adjoint();
    }
    let b = &sigma.eigenvalues()[..rb];
    let k = CMat::from_fn(rb, rb, |i, j| block[(i, j)] / (b[i] * b[j]).sqrt());
    let k = HermitianOperator::new((&k + k.adjoint()).scale(0.5))?;
    let thr = cutoff.threshold(k.max_eigenvalue());
    let y = k.eigenvectors();
    let mut terms = Vec::new();
    for (m, &kappa) in k.eigenvalues().iter().enumerate() {
        if kappa <= thr {
            continue;
        }
        let weight: f64 = (0..rb).map(|i| b[i] * y[(i, m)].norm_sqr()).sum();
        terms.push(alpha * kappa.ln() + weight.ln());
    }
    let lq = log_sum_exp(terms.into_iter());
    Ok(DivergenceValue::from_log_q(lq, rho.trace(), alpha, notes))
}

/// `D_{α,0} = lim_{z↘0} D_{α,z}`.
///
/// Uses the spectral formula when the determinant genericity condition
/// holds, otherwise extrapolates from `z ∈ {1e-2, 5e-3, 2.5e-3}` and notes it.
pub fn d_alpha_zero(rho: &HermitianOperator, sigma: &HermitianOperator, alpha: f64) -> Result<DivergenceValue> {
    d_alpha_zero_with(rho, sigma, alpha, SupportCutoff::default())
}

fn d_alpha_zero_with(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    alpha: f64,
    cutoff: SupportCutoff,
) -> Result<DivergenceValue> {
    validate_pair(rho, sigma)?;
    if !(alpha > 0.0) || alpha == 1.0 || !alpha.is_finite() {
        return Err(Error::BadAlpha(alpha));
    }
    if alpha > 1.0 && sigma.rank(cutoff) < sigma.dim() {
        return Err(Error::SingularSigma);
    }
    let profile = SpectralProfile::new(rho, sigma, cutoff)?;
    let report = if alpha < 1.0 {
        zlimits::genericity_condition_b(&profile)
    } else {
        zlimits::genericity_condition_b_prime(&profile)
    };
    if report.undetermined {
        return Err(Error::GenericityUndetermined(report.ambiguous_minor.unwrap_or(0.0)));
    }
    let tr = rho.trace();
    if report.holds {
        let lq = log_sum_exp(zlimits::z_alpha_log_eigenvalues_unchecked(&profile, alpha).into_iter());
        return Ok(DivergenceValue::from_log_q(lq, tr, alpha, vec![]));
    }
    let q0 = q_zero_extrapolated(rho, sigma, alpha, cutoff);
    let lq = if q0 > 0.0 { q0.ln() } else { f64::NEG_INFINITY };
    Ok(DivergenceValue::from_log_q(lq, tr, alpha, vec![Note::Extrapolated]))
}

/// Richardson extrapolation of `Q_{α,z}` to z = 0 from z = 1e-2, 5e-3, 2.5e-3
/// (first- and second-order terms eliminated).
pub fn q_zero_extrapolated(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    alpha: f64,
    cutoff: SupportCutoff,
) -> f64 {
    let q = |z: f64| log_q_finite(rho, sigma, alpha, z, cutoff).exp();
    let (q1, q2, q4) = (q(1e-2), q(5e-3), q(2.5e-3));
    (8.0 * q4 - 6.0 * q2 + q1) / 3.0
}

/// Nussbaum–Szkoła pair: `p(i,j) = a_i |⟨v_i,w_j⟩|²`, `q(i,j) = b_j |⟨v_i,w_j⟩|²`,
/// flattened as `i·d + j`.
pub fn nussbaum_szkola(rho: &HermitianOperator, sigma: &HermitianOperator) -> Result<(WeightVector, WeightVector)> {
    validate_pair(rho, sigma)?;
    let cutoff = SupportCutoff::default();
    let d = rho.dim();
    let ta = cutoff.threshold(rho.max_eigenvalue());
    let tb = cutoff.threshold(sigma.max_eigenvalue());
    let a: Vec<f64> = rho.eigenvalues().iter().map(|&x| if x > ta { x } else { 0.0 }).collect();
    let b: Vec<f64> = sigma.eigenvalues().iter().map(|&x| if x > tb { x } else { 0.0 }).collect();
    let ov = rho.eigenvectors().adjoint() * sigma.eigenvectors();
    let mut p = Vec::with_capacity(d * d);
    let mut q = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let o = ov[(i, j)].norm_sqr();
            p.push(a[i] * o);
            q.push(b[j] * o);
        }
    }
    Ok((WeightVector::new(p)?, WeightVector::new(q)?))
}

fn check_variational(rho: &HermitianOperator, sigma: &HermitianOperator, params: DivergenceParams) -> Result<f64> {
    validate_pair(rho, sigma)?;
    let alpha = params.alpha;
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(Error::BadAlpha(alpha));
    }
    let z = match params.z {
        ZParam::Finite(z) => z,
        _ => return Err(Error::BadParams("variational formula needs finite z".into())),
    };
    if !support_contained(rho, sigma, SupportCutoff::default())?.contained {
        return Err(Error::SupportViolation);
    }
    Ok(z)
}

/// `α Tr(ρ^{α/2z} H ρ^{α/2z})^{z/α} + (1−α) Tr(σ^{(α−1)/2z} H σ^{(α−1)/2z})^{z/(α−1)}`.
pub fn variational_objective(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    params: DivergenceParams,
    h: &HermitianOperator,
) -> Result<f64> {
    let z = check_variational(rho, sigma, params)?;
    h.check_psd()?;
    let alpha = params.alpha;
    let cutoff = SupportCutoff::default();
    let rp = supported_power(rho, alpha / (2.0 * z), cutoff)?;
    let sp = supported_power(sigma, (alpha - 1.0) / (2.0 * z), cutoff)?;
    // Tr(XHX)^p = Σ s_i^{2p} over the singular values of X H^{1/2}; this keeps
    // the small eigenvalues of badly conditioned products accurate
    let g = h.map_spectrum(|l| l.max(0.0).sqrt());
    let pos = |x: &HermitianOperator, p: f64| -> f64 {
        (x.matrix() * g.matrix()).singular_values().iter().map(|s| s.powf(2.0 * p)).sum()
    };
    Ok(alpha * pos(&rp, z / alpha) + (1.0 - alpha) * pos(&sp, z / (alpha - 1.0)))
}

/// `H_{α,z} = σ^{(1−α)/2z}(σ^{(1−α)/2z} ρ^{α/z} σ^{(1−α)/2z})^{α−1} σ^{(1−α)/2z}`.
pub fn variational_optimizer_h(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    params: DivergenceParams,
) -> Result<HermitianOperator> {
    let z = check_variational(rho, sigma, params)?;
    let alpha = params.alpha;
    let cutoff = SupportCutoff::default();
    let s = supported_power(sigma, (1.0 - alpha) / (2.0 * z), cutoff)?;
    let r = supported_power(rho, alpha / z, cutoff)?;
    let inner = s.matrix() * r.matrix() * s.matrix();
    let inner = HermitianOperator::new((&inner + inner.adjoint()).scale(0.5))?;
    let inner_pow = supported_power(&inner, alpha - 1.0, cutoff)?;
    let h = s.matrix() * inner_pow.matrix() * s.matrix();
    HermitianOperator::new((&h + h.adjoint()).scale(0.5))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AltChain {
    pub q_z2: ExtendedReal,
    pub q_z1: ExtendedReal,
    pub upper: ExtendedReal,
    pub lower_holds: bool,
    pub upper_holds: bool,
}

/// `Q_{α,z₂} ≤ Q_{α,z₁} ≤ Q_{α,z₂}^{z₁/z₂} ‖ρ‖_∞^{α(1−z₁/z₂)} (Tr σ^{1−α})^{1−z₁/z₂}`
/// for `0 < z₁ ≤ z₂`, both checked within 1e-9 relative.
pub fn alt_chain(rho: &HermitianOperator, sigma: &HermitianOperator, alpha: f64, z1: f64, z2: f64) -> Result<AltChain> {
    if !(z1 > 0.0 && z1 <= z2 && z2.is_finite()) {
        return Err(Error::BadParams(format!("need 0 < z1 ≤ z2 < ∞, got z1={z1}, z2={z2}")));
    }
    let cutoff = SupportCutoff::default();
    let (l2, _) = log_q(rho, sigma, DivergenceParams::finite(alpha, z2)?, cutoff)?;
    let (l1, _) = log_q(rho, sigma, DivergenceParams::finite(alpha, z1)?, cutoff)?;
    let r = z1 / z2;
    let tr_sigma = trace_power(sigma, 1.0 - alpha, cutoff).or_else(|_| -> Result<f64> {
        // 1 − α ≤ 0: supported negative power
        let thr = cutoff.threshold(sigma.max_eigenvalue());
        Ok(sigma.eigenvalues().iter().filter(|&&s| s > thr).map(|s| s.powf(1.0 - alpha)).sum())
    })?;
    let lu = r * l2 + alpha * (1.0 - r) * rho.max_eigenvalue().ln() + (1.0 - r) * tr_sigma.ln();
    let ext = |l: f64| if l == f64::INFINITY { ExtendedReal::PosInf } else { ExtendedReal::Finite(l.exp()) };
    let rel_le = |a: f64, b: f64| -> bool {
        if b == f64::INFINITY || a == f64::NEG_INFINITY {
            return true;
        }
        if a == f64::INFINITY {
            return false;
        }
        a.exp() <= b.exp() * (1.0 + 1e-9) + 1e-300
    };
    Ok(AltChain {
        q_z2: ext(l2),
        q_z1: ext(l1),
        upper: ext(lu),
        lower_holds: rel_le(l2, l1),
        upper_holds: rel_le(l1, lu),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominationCheck {
    pub d_az: ExtendedReal,
    pub d_max: ExtendedReal,
    pub dominated: bool,
}

/// Compares `D_{α,z}` with `D_max`: dominated iff `D_{α,z} ≤ D_max + 1e-9`.
pub fn dmax_domination_check(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    params: DivergenceParams,
) -> Result<DominationCheck> {
    let d_az = d_alpha_z(rho, sigma, params)?.d;
    let dm = d_max(rho, sigma)?;
    Ok(DominationCheck { d_az, d_max: dm, dominated: d_az.le_within(dm, 1e-9) })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothingCurve {
    pub eps: Vec<f64>,
    pub values: Vec<ExtendedReal>,
    pub unsmoothed: ExtendedReal,
    /// Values nonincreasing in ε (within 1e-10).
    pub monotone: bool,
    /// Last value within 1e-3 of the unsmoothed divergence (`None` when that is +∞).
    pub converged: Option<bool>,
}

/// `ε ↦ D_{α,z}(ρ‖σ + εI)` along a descending ε-grid.
pub fn epsilon_smoothing_curve(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    params: DivergenceParams,
    eps_grid: &[f64],
) -> Result<SmoothingCurve> {
    validate_pair(rho, sigma)?;
    if eps_grid.is_empty() || eps_grid.iter().any(|&e| !(e > 0.0)) || eps_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::BadParams("eps grid must be positive and strictly descending".into()));
    }
    let mut values = Vec::with_capacity(eps_grid.len());
    for &eps in eps_grid {
        // σ + εI shares σ's eigenvectors; shifting the spectrum keeps tiny ε exact.
        let shifted = sigma.map_spectrum(|s| s.max(0.0) + eps);
        values.push(d_alpha_z(rho, &shifted, params)?.d);
    }
    let unsmoothed = d_alpha_z(rho, sigma, params)?.d;
    let monotone = values.windows(2).all(|w| w[0].le_within(w[1], 1e-10));
    let converged = unsmoothed.finite().map(|u| (values.last().unwrap().to_f64() - u).abs() <= 1e-3);
    Ok(SmoothingCurve { eps: eps_grid.to_vec(), values, unsmoothed, monotone, converged })
}
