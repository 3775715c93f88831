//! Explicit state families used to probe (dis)continuity of the divergences.
//!
//! Every generator returns `(ρ, σ)` as unit-trace states and checks its own
//! defining identity before returning.

use crate::classical::knife_edge_family;
use crate::opcore::{CMat, CVec, HermitianOperator, C64};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

pub use crate::classical::{knife_edge_limit, knife_edge_log_weights};

/// Tolerance for the self-checks run by the generators.
const SELF_CHECK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilySpec {
    /// Qubit pair with `c_n = 1 − 2^{−n}` unless `c` is given explicitly.
    A2Discont {
        gamma: f64,
        n: u32,
        #[serde(default)]
        c: Option<f64>,
    },
    PureFamily {
        c: f64,
        eps: f64,
    },
    KappaFamily {
        kappa: f64,
        lambda: f64,
        eps: f64,
        dim: usize,
    },
    #[serde(rename = "appE")]
    AppE {
        gamma: f64,
        eps: f64,
    },
    ClassicalKnife {
        c: f64,
        d: f64,
        beta: f64,
        gamma: f64,
        n: u64,
    },
}

impl FamilySpec {
    pub fn generate(&self) -> Result<(HermitianOperator, HermitianOperator)> {
        match *self {
            FamilySpec::A2Discont { gamma, n, c: None } => gen_a2(gamma, n),
            FamilySpec::A2Discont { gamma, c: Some(c), .. } => gen_a2_with_c(gamma, c),
            FamilySpec::PureFamily { c, eps } => gen_pure(c, eps),
            FamilySpec::KappaFamily { kappa, lambda, eps, dim } => gen_kappa(kappa, lambda, eps, dim),
            FamilySpec::AppE { gamma, eps } => gen_app_e(gamma, eps),
            FamilySpec::ClassicalKnife { c, d, beta, gamma, n } => gen_knife(c, d, beta, gamma, n),
        }
    }
}

/// Default schedule `c_n = 1 − 2^{−n}`.
pub fn a2_schedule(n: u32) -> f64 {
    1.0 - 0.5f64.powi(n as i32)
}

/// Parameters `(δ, a, b)` of the qubit family at a given `c`.
pub fn a2_parameters(gamma: f64, c: f64) -> (f64, f64, f64) {
    let delta = (1.0 - c).powf(1.0 + gamma);
    let b = c - delta;
    // c² − b² = δ(2c − δ), without cancellation
    let a = (delta * (2.0 * c - delta)).sqrt();
    (delta, a, b)
}

/// `ρ = ½(I + c_n Z)`, `σ = ½(I + a_n X + b_n Z)` with `c_n = 1 − 2^{−n}`.
pub fn gen_a2(gamma: f64, n: u32) -> Result<(HermitianOperator, HermitianOperator)> {
    if n < 1 {
        return Err(Error::BadParams("n must be at least 1".into()));
    }
    gen_a2_with_c(gamma, a2_schedule(n))
}

pub fn gen_a2_with_c(gamma: f64, c: f64) -> Result<(HermitianOperator, HermitianOperator)> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::BadParams(format!("gamma must be positive, got {gamma}")));
    }
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::BadParams(format!("c must lie in (0, 1), got {c}")));
    }
    let (delta, a, b) = a2_parameters(gamma, c);
    // both operators share the spectrum ((1 + c)/2, (1 − c)/2); 1 − c is exact for dyadic c
    let lo = 0.5 * (1.0 - c);
    let hi = 0.5 * (1.0 + c);
    let rho = HermitianOperator::diagonal(&[hi, lo]);
    let half = 0.5 * a.atan2(b);
    let (s, co) = half.sin_cos();
    let f = CMat::from_row_slice(2, 2, &[C64::new(co, 0.0), C64::new(-s, 0.0), C64::new(s, 0.0), C64::new(co, 0.0)]);
    let overlap = f[(0, 1)].norm_sqr();
    let expected = 0.5 * delta / c;
    if (overlap - expected).abs() > SELF_CHECK_TOL * expected {
        return Err(Error::BadParams(format!("overlap identity off: {overlap:e} vs {expected:e}")));
    }
    let sigma = HermitianOperator::from_spectral(vec![hi, lo], f);
    Ok((rho, sigma))
}

/// `‖σ_{c,ε}^{−1/2} ψ_ε‖² = 1/c + (1 − ε)/(1 − cε)`.
pub fn pure_dmax_closed_form(c: f64, eps: f64) -> f64 {
    1.0 / c + (1.0 - eps) / (1.0 - c * eps)
}

/// `ρ = |ψ_ε⟩⟨ψ_ε|` with `ψ_ε = (√ε, √(1 − ε))`, `σ = diag(cε, 1 − cε)`.
pub fn gen_pure(c: f64, eps: f64) -> Result<(HermitianOperator, HermitianOperator)> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::BadParams(format!("c must be positive, got {c}")));
    }
    if !(eps >= 0.0 && c * eps < 1.0) || eps > 1.0 {
        return Err(Error::BadParams(format!("eps must lie in [0, 1/c), got {eps}")));
    }
    let psi = CVec::from_vec(vec![C64::new(eps.sqrt(), 0.0), C64::new((1.0 - eps).sqrt(), 0.0)]);
    let rho = HermitianOperator::pure(&psi)?;
    let s = [c * eps, 1.0 - c * eps];
    let sigma = HermitianOperator::diagonal(&s);
    if eps > 0.0 {
        let direct = eps / s[0] + (1.0 - eps) / s[1];
        let closed = pure_dmax_closed_form(c, eps);
        if (direct - closed).abs() > SELF_CHECK_TOL * closed {
            return Err(Error::BadParams(format!("closed form off: {direct} vs {closed}")));
        }
    }
    Ok((rho, sigma))
}

/// The pure family embedded into `ℂ^dim` through the first two basis vectors,
/// with `c = 1/(λ − 1)` and `σ = σ̃^{1/κ} / Tr σ̃^{1/κ}`.
pub fn gen_kappa(kappa: f64, lambda: f64, eps: f64, dim: usize) -> Result<(HermitianOperator, HermitianOperator)> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::BadParams(format!("kappa must be positive, got {kappa}")));
    }
    if !(lambda > 1.0) || !lambda.is_finite() {
        return Err(Error::BadParams(format!("lambda must exceed 1, got {lambda}")));
    }
    if dim < 2 {
        return Err(Error::BadParams("dim must be at least 2".into()));
    }
    let c = 1.0 / (lambda - 1.0);
    if !(eps > 0.0 && c * eps < 1.0 && eps < 1.0) {
        return Err(Error::BadParams(format!("eps must lie in (0, min(1, 1/c)), got {eps}")));
    }
    let mut psi = CVec::zeros(dim);
    psi[0] = C64::new(eps.sqrt(), 0.0);
    psi[1] = C64::new((1.0 - eps).sqrt(), 0.0);
    let rho = HermitianOperator::pure(&psi)?;
    let mut tilde = vec![c * eps, 1.0 - c * eps];
    if dim > 2 {
        for t in tilde.iter_mut() {
            *t *= 1.0 - eps;
        }
        tilde.extend(std::iter::repeat_n(eps / (dim - 2) as f64, dim - 2));
    }
    let powered: Vec<f64> = tilde.iter().map(|t| t.powf(1.0 / kappa)).collect();
    let total: f64 = powered.iter().sum();
    let sigma = HermitianOperator::diagonal(&powered.iter().map(|p| p / total).collect::<Vec<_>>());
    Ok((rho, sigma))
}

/// `(1 + γ + √((1 − γ)² + 4γ²)) / 2`, the operator norm of `C_γ`.
pub fn app_e_norm(gamma: f64) -> f64 {
    0.5 * (1.0 + gamma + ((1.0 - gamma).powi(2) + 4.0 * gamma * gamma).sqrt())
}

fn app_e_check(gamma: f64, eps: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::BadParams(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::BadParams(format!("eps must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

fn real2(m: [f64; 4]) -> CMat {
    CMat::from_row_slice(2, 2, &m.map(|x| C64::new(x, 0.0)))
}

/// `σ_ε = S²` and `ρ = S C_γ S` with `S = [[1, ε], [ε, ε]]`, before normalization.
pub fn gen_app_e_unnormalized(gamma: f64, eps: f64) -> Result<(HermitianOperator, HermitianOperator)> {
    app_e_check(gamma, eps)?;
    let s = real2([1.0, eps, eps, eps]);
    let c = real2([1.0, gamma, gamma, gamma]);
    let rho = &s * &c * &s;
    let sigma = &s * &s;
    // S is the positive square root of σ, so S⁻¹ρS⁻¹ = C_γ
    let det = eps - eps * eps;
    let s_inv = real2([eps / det, -eps / det, -eps / det, 1.0 / det]);
    let back = &s_inv * &rho * &s_inv;
    let dev = (&back - &c).iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if dev > 1e-9 * (1.0 / (eps * eps)) {
        return Err(Error::BadParams(format!("S^-1 rho S^-1 deviates from C by {dev:e}")));
    }
    Ok((HermitianOperator::new(rho)?, HermitianOperator::new(sigma)?))
}

/// Unit-trace version of [`gen_app_e_unnormalized`].
pub fn gen_app_e(gamma: f64, eps: f64) -> Result<(HermitianOperator, HermitianOperator)> {
    let (rho, sigma) = gen_app_e_unnormalized(gamma, eps)?;
    let (tr, ts) = (rho.trace(), sigma.trace());
    Ok((rho.scaled(1.0 / tr), sigma.scaled(1.0 / ts)))
}

/// The classical knife-edge pair as diagonal qubit states.
pub fn gen_knife(c: f64, d: f64, beta: f64, gamma: f64, n: u64) -> Result<(HermitianOperator, HermitianOperator)> {
    let (p, q) = knife_edge_family(c, d, beta, gamma, n)?;
    Ok((HermitianOperator::diagonal(p.values()), HermitianOperator::diagonal(q.values())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergences::{d_alpha_z, d_max, q_alpha_z, DivergenceParams};

    fn unit_trace(pair: &(HermitianOperator, HermitianOperator)) {
        assert!((pair.0.trace() - 1.0).abs() < 1e-10);
        assert!((pair.1.trace() - 1.0).abs() < 1e-10);
        pair.0.check_psd().unwrap();
        pair.1.check_psd().unwrap();
    }

    #[test]
    fn a2_states_and_overlap() {
        for n in [1, 5, 20, 40] {
            let pair = gen_a2(1.0, n).unwrap();
            unit_trace(&pair);
            let c = a2_schedule(n);
            let (_, a, b) = a2_parameters(1.0, c);
            let m = pair.1.matrix();
            assert!((m[(0, 1)].re - 0.5 * a).abs() < 1e-14);
            assert!((m[(0, 0)].re - 0.5 * (1.0 + b)).abs() < 1e-14);
            assert_eq!(pair.1.eigenvalues()[1], pair.0.eigenvalues()[1]);
        }
    }

    #[test]
    fn a2_dmax_decreases() {
        let d5 = d_max(&gen_a2(1.0, 5).unwrap().0, &gen_a2(1.0, 5).unwrap().1).unwrap().to_f64();
        let (r, s) = gen_a2(1.0, 10).unwrap();
        let d10 = d_max(&r, &s).unwrap().to_f64();
        assert!(d10 < d5);
    }

    #[test]
    fn a2_petz_lower_bound() {
        let (gamma, n, alpha) = (1.0, 20, 3.5);
        let c = a2_schedule(n);
        let (r, s) = gen_a2(gamma, n).unwrap();
        let q = q_alpha_z(&r, &s, DivergenceParams::petz(alpha).unwrap()).unwrap().to_f64();
        let bound = (1.0 - c).powf(2.0 + gamma - alpha) * 0.25 * (1.0 + c).powf(alpha) / c;
        assert!(q >= bound * (1.0 - 1e-9), "{q} < {bound}");
    }

    #[test]
    fn a2_rejects_bad_params() {
        assert!(gen_a2(0.0, 3).is_err());
        assert!(gen_a2(1.0, 0).is_err());
        assert!(gen_a2_with_c(1.0, 1.0).is_err());
    }

    #[test]
    fn pure_family_limit() {
        let (r, s) = gen_pure(1.0, 1e-6).unwrap();
        let d = d_max(&r, &s).unwrap().to_f64();
        assert!((d - 2f64.ln()).abs() < 1e-5);
        let (r, s) = gen_pure(2.0, 1e-8).unwrap();
        assert!((d_max(&r, &s).unwrap().to_f64() - 1.5f64.ln()).abs() < 1e-6);
    }

    #[test]
    fn pure_family_equalities() {
        let (r, s) = gen_pure(1.0, 0.1).unwrap();
        unit_trace(&(r.clone(), s.clone()));
        let dm = d_max(&r, &s).unwrap().to_f64();
        assert!((dm - pure_dmax_closed_form(1.0, 0.1).ln()).abs() < 1e-12);
        for alpha in [1.5, 2.0, 3.0] {
            let v = d_alpha_z(&r, &s, DivergenceParams::finite(alpha, alpha - 1.0).unwrap()).unwrap();
            assert!((v.d.to_f64() - dm).abs() < 1e-9, "alpha {alpha}");
        }
    }

    #[test]
    fn pure_rejects_out_of_range() {
        assert!(gen_pure(2.0, 0.5).is_err());
        assert!(gen_pure(-1.0, 0.1).is_err());
        assert!(gen_pure(1.0, -0.1).is_err());
    }

    #[test]
    fn kappa_family_limits() {
        let (r, s) = gen_kappa(1.0, 2.0, 1e-6, 2).unwrap();
        unit_trace(&(r.clone(), s.clone()));
        let v = d_alpha_z(&r, &s, DivergenceParams::finite(2.0, 1.0).unwrap()).unwrap();
        assert!((v.d.to_f64() - 2f64.ln()).abs() < 1e-3);
        assert!((d_max(&r, &s).unwrap().to_f64() - 2f64.ln()).abs() < 1e-3);

        let (r, s) = gen_kappa(2.0, 3.0, 1e-10, 4).unwrap();
        unit_trace(&(r.clone(), s.clone()));
        let v = d_alpha_z(&r, &s, DivergenceParams::finite(2.0, 0.5).unwrap()).unwrap();
        assert!((v.d.to_f64() - 0.5 * 3f64.ln()).abs() < 1e-3, "{:?}", v.d);
    }

    #[test]
    fn kappa_below_one_blows_up() {
        let dm = |eps: f64| {
            let (r, s) = gen_kappa(0.5, 2.0, eps, 3).unwrap();
            d_max(&r, &s).unwrap().to_f64()
        };
        assert!(dm(1e-4) > dm(1e-2));
    }

    #[test]
    fn app_e_identity() {
        let (r, s) = gen_app_e_unnormalized(0.5, 1e-3).unwrap();
        let d = d_max(&r, &s).unwrap().to_f64();
        assert!((d - app_e_norm(0.5).ln()).abs() < 1e-9, "{d}");
        let pair = gen_app_e(0.5, 1e-5).unwrap();
        unit_trace(&pair);
        let d = d_max(&pair.0, &pair.1).unwrap().to_f64();
        assert!((d - app_e_norm(0.5).ln()).abs() < 1e-3);
    }

    #[test]
    fn app_e_liminf() {
        let (r, s) = gen_app_e(0.5, 1e-5).unwrap();
        let q = q_alpha_z(&r, &s, DivergenceParams::finite(2.0, 1.0).unwrap()).unwrap().to_f64();
        assert!(q >= 1.25 - 1e-3, "{q}");
    }

    #[test]
    fn spec_round_trip() {
        let spec = FamilySpec::PureFamily { c: 1.0, eps: 0.25 };
        let json = serde_json::to_string(&spec).unwrap();
        assert!(json.contains("pure_family"));
        let back: FamilySpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
        let (r, s) = back.generate().unwrap();
        assert!((d_max(&r, &s).unwrap().to_f64() - 2f64.ln()).abs() < 1e-12);
        let knife: FamilySpec =
            serde_json::from_str(r#"{"family":"classical_knife","c":1,"d":1,"beta":1,"gamma":2,"n":100}"#).unwrap();
        unit_trace(&knife.generate().unwrap());
    }
}
