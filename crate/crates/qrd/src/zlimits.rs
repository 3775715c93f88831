//! The z → 0 limit: spectral characterization of `Z_α`, determinant
//! genericity conditions, equality cases of the α → 1 gaps, and the
//! reducing-subspace test for top-k trace maximizers.

use crate::opcore::{combinations, minor, op_norm, CMat, HermitianOperator, Projection, SupportCutoff};
use crate::{Error, Result};
use serde::Serialize;

/// Consecutive eigenvalues closer than this (relative) share a block.
pub const CLUSTER_GAP: f64 = 1e-10;
/// Relative gaps in `(CLUSTER_GAP, AMBIGUOUS_GAP]` make the block structure ambiguous.
pub const AMBIGUOUS_GAP: f64 = 1e-8;
/// A minor counts as nonzero above this magnitude.
pub const MINOR_NONZERO: f64 = 1e-10;
/// Minors in `[MINOR_AMBIGUOUS, MINOR_NONZERO]` cannot be classified.
pub const MINOR_AMBIGUOUS: f64 = 1e-12;

/// Eigen-data of a pair with the block boundaries of repeated eigenvalues.
#[derive(Debug, Clone)]
pub struct SpectralProfile {
    /// Descending eigenvalues of ρ; values below the support cutoff are exactly 0.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub v: CMat,
    pub w: CMat,
    /// `0 = i₀ < i₁ < … < i_l = d`.
    pub i_bounds: Vec<usize>,
    pub j_bounds: Vec<usize>,
    /// Some eigenvalue gap fell in the ambiguous band.
    pub near_degenerate: bool,
}

fn clip(values: &[f64], cutoff: SupportCutoff) -> Vec<f64> {
    let thr = cutoff.threshold(values.first().copied().unwrap_or(0.0));
    values.iter().map(|&x| if x > thr { x } else { 0.0 }).collect()
}

/// Block boundaries of a descending list and whether any gap is ambiguous.
fn blocks(x: &[f64]) -> (Vec<usize>, bool) {
    let mut bounds = vec![0];
    let mut ambiguous = false;
    for k in 1..x.len() {
        let scale = x[k - 1].abs();
        let gap = x[k - 1] - x[k];
        if scale == 0.0 || gap <= CLUSTER_GAP * scale {
            continue;
        }
        if gap <= AMBIGUOUS_GAP * scale {
            ambiguous = true;
        }
        bounds.push(k);
    }
    bounds.push(x.len());
    (bounds, ambiguous)
}

impl SpectralProfile {
    pub fn new(rho: &HermitianOperator, sigma: &HermitianOperator, cutoff: SupportCutoff) -> Result<Self> {
        crate::divergences::validate_pair(rho, sigma)?;
        let a = clip(rho.eigenvalues(), cutoff);
        let b = clip(sigma.eigenvalues(), cutoff);
        let (i_bounds, amb_a) = blocks(&a);
        let (j_bounds, amb_b) = blocks(&b);
        Ok(SpectralProfile {
            a,
            b,
            v: rho.eigenvectors().clone(),
            w: sigma.eigenvectors().clone(),
            i_bounds,
            j_bounds,
            near_degenerate: amb_a || amb_b,
        })
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    /// `[⟨v_i, w_j⟩]`.
    pub fn overlap(&self) -> CMat {
        self.v.adjoint() * &self.w
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinorWitness {
    pub k: usize,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenericityReport {
    pub holds: bool,
    pub undetermined: bool,
    /// Largest admissible minor for every required k (0-based index sets).
    pub witnesses: Vec<MinorWitness>,
    pub failing_k: Option<usize>,
    /// Magnitude that triggered `undetermined`.
    pub ambiguous_minor: Option<f64>,
}

/// Index sets `{0..lo} ∪ S` with `S` a subset of `lo..hi` and `|·| = k`.
fn nested_sets(bounds: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for r in 1..bounds.len() {
        let (lo, hi) = (bounds[r - 1], bounds[r]);
        if lo <= k && k <= hi {
            let block: Vec<usize> = (lo..hi).collect();
            for s in combinations(&block, k - lo) {
                let mut set: Vec<usize> = (0..lo).collect();
                set.extend(s);
                out.push(set);
            }
        }
    }
    out
}

/// Index sets `{hi..d} ∪ S` with `S` a subset of `lo..hi` and `|·| = k`.
fn tail_sets(bounds: &[usize], d: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for s in 1..bounds.len() {
        let (lo, hi) = (bounds[s - 1], bounds[s]);
        let fixed = d - hi;
        if fixed <= k && k <= d - lo {
            let block: Vec<usize> = (lo..hi).collect();
            for sub in combinations(&block, k - fixed) {
                let mut set = sub;
                set.extend(hi..d);
                out.push(set);
            }
        }
    }
    out
}

fn interior(bounds: &[usize]) -> impl Iterator<Item = usize> + '_ {
    bounds[1..bounds.len() - 1].iter().copied()
}

fn search(profile: &SpectralProfile, ks: Vec<usize>, cols_for: impl Fn(usize) -> Vec<Vec<usize>>) -> GenericityReport {
    let ov = profile.overlap();
    let mut ks = ks;
    ks.sort_unstable();
    ks.dedup();
    let mut witnesses = Vec::new();
    let mut failing_k = None;
    let mut ambiguous_minor: Option<f64> = None;
    for k in ks {
        let mut best = MinorWitness { k, rows: vec![], cols: vec![], magnitude: 0.0 };
        for rows in nested_sets(&profile.i_bounds, k) {
            for cols in cols_for(k) {
                let m = minor(&ov, &rows, &cols).norm();
                if m > best.magnitude {
                    best = MinorWitness { k, rows: rows.clone(), cols, magnitude: m };
                }
            }
        }
        if best.magnitude < MINOR_AMBIGUOUS {
            failing_k.get_or_insert(k);
        } else if best.magnitude <= MINOR_NONZERO {
            ambiguous_minor = Some(ambiguous_minor.map_or(best.magnitude, |x: f64| x.min(best.magnitude)));
        }
        witnesses.push(best);
    }
    let undetermined = failing_k.is_none() && (ambiguous_minor.is_some() || profile.near_degenerate);
    GenericityReport {
        holds: failing_k.is_none() && !undetermined,
        undetermined,
        witnesses,
        failing_k,
        ambiguous_minor: if undetermined { Some(ambiguous_minor.unwrap_or(0.0)) } else { None },
    }
}

/// Condition (b): admissible minors for k ∈ {i₁,…,i_{l−1}, j₁,…,j_{m−1}}.
pub fn genericity_condition_b(profile: &SpectralProfile) -> GenericityReport {
    let ks: Vec<usize> = interior(&profile.i_bounds).chain(interior(&profile.j_bounds)).collect();
    search(profile, ks, |k| nested_sets(&profile.j_bounds, k))
}

/// Condition (b)′: σ-indices taken from the bottom of the spectrum.
pub fn genericity_condition_b_prime(profile: &SpectralProfile) -> GenericityReport {
    let d = profile.dim();
    let ks: Vec<usize> = interior(&profile.i_bounds).chain(interior(&profile.j_bounds).map(|j| d - j)).collect();
    search(profile, ks, |k| tail_sets(&profile.j_bounds, d, k))
}

fn check_report(report: &GenericityReport) -> Result<()> {
    if let Some(k) = report.failing_k {
        return Err(Error::GenericityFails(k));
    }
    if report.undetermined {
        return Err(Error::GenericityUndetermined(report.ambiguous_minor.unwrap_or(0.0)));
    }
    Ok(())
}

/// `log λ_i(α)` of `Z_α`, assuming the matching genericity condition; −∞ for zeros.
pub(crate) fn z_alpha_log_eigenvalues_unchecked(profile: &SpectralProfile, alpha: f64) -> Vec<f64> {
    let d = profile.dim();
    let mut out: Vec<f64> = (0..d)
        .map(|i| {
            let a = profile.a[i];
            let b = if alpha < 1.0 { profile.b[i] } else { profile.b[d - 1 - i] };
            if a == 0.0 || (b == 0.0 && alpha < 1.0) {
                f64::NEG_INFINITY
            } else {
                alpha * a.ln() + (1.0 - alpha) * b.ln()
            }
        })
        .collect();
    out.sort_by(|x, y| y.partial_cmp(x).unwrap());
    out
}

/// Eigenvalues of `Z_α(ρ‖σ)` in descending order: `a_i^α b_i^{1−α}` for α < 1,
/// `a_i^α b_{d+1−i}^{1−α}` for α > 1.
pub fn z_alpha_eigenvalues(profile: &SpectralProfile, alpha: f64) -> Result<Vec<f64>> {
    if !(alpha > 0.0) || alpha == 1.0 || !alpha.is_finite() {
        return Err(Error::BadAlpha(alpha));
    }
    if alpha > 1.0 {
        if profile.b.contains(&0.0) {
            return Err(Error::SingularSigma);
        }
        check_report(&genericity_condition_b_prime(profile))?;
    } else {
        check_report(&genericity_condition_b(profile))?;
    }
    Ok(z_alpha_log_eigenvalues_unchecked(profile, alpha).into_iter().map(f64::exp).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapDirection {
    /// `D^Um − lim_{α↗1} D_{α,0}`.
    Below,
    /// `lim_{α↘1} D_{α,0} − D^Um`.
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EqualityCase {
    pub gap: f64,
    pub commuting_aligned: bool,
    /// `gap ≤ 1e-8` exactly when `commuting_aligned`.
    pub consistent: bool,
}

/// Equality cases of the α → 1 gaps of `D_{α,0}` around Umegaki's relative entropy.
pub fn equality_case_check(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    direction: GapDirection,
) -> Result<EqualityCase> {
    let cutoff = SupportCutoff::default();
    let profile = SpectralProfile::new(rho, sigma, cutoff)?;
    if profile.b.contains(&0.0) {
        return Err(Error::SingularSigma);
    }
    let report = match direction {
        GapDirection::Below => genericity_condition_b(&profile),
        GapDirection::Above => genericity_condition_b_prime(&profile),
    };
    check_report(&report)?;
    let d = profile.dim();
    let ov = profile.overlap();
    let tr: f64 = profile.a.iter().sum();
    let mut tr_rho_log_sigma = 0.0;
    for (i, &a) in profile.a.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        for (j, &b) in profile.b.iter().enumerate() {
            tr_rho_log_sigma += a * ov[(i, j)].norm_sqr() * b.ln();
        }
    }
    let paired: f64 = (0..d)
        .filter(|&i| profile.a[i] > 0.0)
        .map(|i| {
            let b = match direction {
                GapDirection::Below => profile.b[i],
                GapDirection::Above => profile.b[d - 1 - i],
            };
            profile.a[i] * b.ln()
        })
        .sum();
    let gap = match direction {
        GapDirection::Below => (paired - tr_rho_log_sigma) / tr,
        GapDirection::Above => (tr_rho_log_sigma - paired) / tr,
    };
    let commuting_aligned = aligned(rho, sigma, &profile, direction)?;
    Ok(EqualityCase { gap, commuting_aligned, consistent: (gap <= 1e-8) == commuting_aligned })
}

/// Whether a joint eigenbasis realizes ρ = Σ a_i e_i e_i†, σ = Σ b_{π(i)} e_i e_i†
/// with π the identity (below) or the reversal (above).
fn aligned(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    profile: &SpectralProfile,
    direction: GapDirection,
) -> Result<bool> {
    let (r, s) = (rho.matrix(), sigma.matrix());
    let comm = op_norm(&(r * s - s * r));
    let scale = rho.spectral_norm() * sigma.spectral_norm();
    if comm > 1e-8 * scale {
        return Ok(false);
    }
    // σ compressed to each eigenblock of ρ gives the paired σ-eigenvalues.
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(profile.dim());
    for blk in profile.i_bounds.windows(2) {
        let basis = profile.v.columns(blk[0], blk[1] - blk[0]);
        let comp = basis.adjoint() * s * basis;
        let comp = HermitianOperator::new((&comp + comp.adjoint()).scale(0.5))?;
        for &beta in comp.eigenvalues() {
            pairs.push((profile.a[blk[0]], beta));
        }
    }
    // within equal a, order β so that the pairing can match
    pairs.sort_by(|x, y| {
        y.0.partial_cmp(&x.0).unwrap().then_with(|| match direction {
            GapDirection::Below => y.1.partial_cmp(&x.1).unwrap(),
            GapDirection::Above => x.1.partial_cmp(&y.1).unwrap(),
        })
    });
    let d = profile.dim();
    let bmax = profile.b[0];
    Ok(pairs.iter().enumerate().all(|(i, &(_, beta))| {
        let target = match direction {
            GapDirection::Below => profile.b[i],
            GapDirection::Above => profile.b[d - 1 - i],
        };
        (beta - target).abs() <= 1e-8 * bmax
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReducingCheck {
    pub trace_attains_topk: bool,
    pub trace_attains_bottomk: bool,
    pub reduces: bool,
    /// Attaining either extreme trace implies that the range of P reduces A.
    pub implication_holds: bool,
}

pub fn reducing_subspace_check(a: &HermitianOperator, p: &Projection) -> Result<ReducingCheck> {
    if a.dim() != p.dim() {
        return Err(Error::DimMismatch(a.dim(), p.dim()));
    }
    let k = p.rank;
    let pm = p.matrix();
    let ap = a.matrix() * pm;
    let tr_ap = ap.trace().re;
    let top: f64 = a.eigenvalues()[..k].iter().sum();
    let bottom: f64 = a.eigenvalues()[a.dim() - k..].iter().sum();
    let trace_attains_topk = (tr_ap - top).abs() <= 1e-8;
    let trace_attains_bottomk = (tr_ap - bottom).abs() <= 1e-8;
    let reduces = op_norm(&(&ap - pm * &ap)) <= 1e-8;
    Ok(ReducingCheck {
        trace_attains_topk,
        trace_attains_bottomk,
        reduces,
        implication_holds: !(trace_attains_topk || trace_attains_bottomk) || reduces,
    })
}
