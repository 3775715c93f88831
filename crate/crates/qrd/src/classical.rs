//! Classical Rényi divergences, perspective functions, f-divergences and
//! the two-point knife-edge family.

use crate::{Error, ExtendedReal, Result};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Nonnegative weights, not all zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector {
    values: Vec<f64>,
}

impl WeightVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
            return Err(Error::BadParams("weights must be finite and nonnegative".into()));
        }
        if !values.iter().any(|&x| x > 0.0) {
            return Err(Error::BadParams("weights must not all vanish".into()));
        }
        Ok(WeightVector { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        WeightVector::new(v)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(w: WeightVector) -> Vec<f64> {
        w.values
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::BadAlpha(alpha));
    }
    Ok(())
}

pub(crate) fn log_sum_exp(xs: impl Iterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = xs.collect();
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m.is_infinite() {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `D_α^cl(p‖q)`, computed in the log domain.
pub fn classical_renyi(p: &WeightVector, q: &WeightVector, alpha: f64) -> Result<ExtendedReal> {
    if p.len() != q.len() {
        return Err(Error::DimMismatch(p.len(), q.len()));
    }
    let lp: Vec<f64> = p.values().iter().map(|x| x.ln()).collect();
    let lq: Vec<f64> = q.values().iter().map(|x| x.ln()).collect();
    classical_renyi_log(&lp, &lq, alpha)
}

/// `D_α^cl` from log-weights (entries may be `-inf` for zero weights).
///
/// Lets weights far below the smallest positive double take part.
pub fn classical_renyi_log(log_p: &[f64], log_q: &[f64], alpha: f64) -> Result<ExtendedReal> {
    check_alpha(alpha)?;
    if log_p.len() != log_q.len() {
        return Err(Error::DimMismatch(log_p.len(), log_q.len()));
    }
    let log_total = log_sum_exp(log_p.iter().cloned());
    if log_total == f64::NEG_INFINITY {
        return Err(Error::BadParams("p must not vanish".into()));
    }
    let unsupported = log_p.iter().zip(log_q).any(|(&a, &b)| a > f64::NEG_INFINITY && b == f64::NEG_INFINITY);
    if alpha == 1.0 {
        if unsupported {
            return Ok(ExtendedReal::PosInf);
        }
        let s: f64 = log_p
            .iter()
            .zip(log_q)
            .filter(|(&a, _)| a > f64::NEG_INFINITY)
            .map(|(&a, &b)| (a - log_total).exp() * (a - b))
            .sum();
        return Ok(ExtendedReal::Finite(s));
    }
    if alpha > 1.0 && unsupported {
        return Ok(ExtendedReal::PosInf);
    }
    let log_q_alpha = log_sum_exp(
        log_p
            .iter()
            .zip(log_q)
            .filter(|(&a, &b)| a > f64::NEG_INFINITY && b > f64::NEG_INFINITY)
            .map(|(&a, &b)| alpha * a + (1.0 - alpha) * b),
    );
    if log_q_alpha == f64::NEG_INFINITY {
        // α < 1 with disjoint supports.
        return Ok(ExtendedReal::PosInf);
    }
    Ok(ExtendedReal::Finite((log_q_alpha - log_total) / (alpha - 1.0)))
}

/// `Q_α^cl(p‖q) = Σ p^α q^{1−α}` (+∞ when α > 1 and p is not dominated by q).
pub fn classical_q(p: &WeightVector, q: &WeightVector, alpha: f64) -> Result<ExtendedReal> {
    check_alpha(alpha)?;
    if p.len() != q.len() {
        return Err(Error::DimMismatch(p.len(), q.len()));
    }
    let mut s = 0.0;
    for (&a, &b) in p.values().iter().zip(q.values()) {
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            if alpha > 1.0 {
                return Ok(ExtendedReal::PosInf);
            }
            continue;
        }
        s += a.powf(alpha) * b.powf(1.0 - alpha);
    }
    Ok(ExtendedReal::Finite(s))
}

/// Convex function on `[0, ∞)` together with its boundary behaviour.
#[derive(Clone)]
pub enum ConvexFunctionSpec {
    /// `s(α)·x^α` with `s = −1` on (0,1) and `+1` on (1,∞).
    Power {
        alpha: f64,
    },
    /// `t log t`.
    Eta,
    Custom {
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        limit_at_zero: ExtendedReal,
        slope_at_infinity: ExtendedReal,
    },
}

impl std::fmt::Debug for ConvexFunctionSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConvexFunctionSpec::Power { alpha } => write!(f, "Power({alpha})"),
            ConvexFunctionSpec::Eta => write!(f, "Eta"),
            ConvexFunctionSpec::Custom { limit_at_zero, slope_at_infinity, .. } => {
                write!(f, "Custom(f(0+)={limit_at_zero}, slope(inf)={slope_at_infinity})")
            }
        }
    }
}

pub fn power_sign(alpha: f64) -> f64 {
    if alpha < 1.0 {
        -1.0
    } else {
        1.0
    }
}

impl ConvexFunctionSpec {
    pub fn power(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if alpha == 1.0 {
            return Err(Error::BadAlpha(alpha));
        }
        Ok(ConvexFunctionSpec::Power { alpha })
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            ConvexFunctionSpec::Power { alpha } => power_sign(*alpha) * x.powf(*alpha),
            ConvexFunctionSpec::Eta => {
                if x == 0.0 {
                    0.0
                } else {
                    x * x.ln()
                }
            }
            ConvexFunctionSpec::Custom { f, .. } => f(x),
        }
    }

    pub fn limit_at_zero(&self) -> ExtendedReal {
        match self {
            ConvexFunctionSpec::Power { .. } | ConvexFunctionSpec::Eta => ExtendedReal::Finite(0.0),
            ConvexFunctionSpec::Custom { limit_at_zero, .. } => *limit_at_zero,
        }
    }

    /// `lim_{x→∞} f(x)/x`.
    pub fn slope_at_infinity(&self) -> ExtendedReal {
        match self {
            ConvexFunctionSpec::Power { alpha } if *alpha > 1.0 => ExtendedReal::PosInf,
            ConvexFunctionSpec::Power { .. } => ExtendedReal::Finite(0.0),
            ConvexFunctionSpec::Eta => ExtendedReal::PosInf,
            ConvexFunctionSpec::Custom { slope_at_infinity, .. } => *slope_at_infinity,
        }
    }
}

fn times(c: f64, v: ExtendedReal) -> ExtendedReal {
    // 0·(±∞) = 0
    if c == 0.0 {
        return ExtendedReal::Finite(0.0);
    }
    match v {
        ExtendedReal::Finite(x) => ExtendedReal::Finite(c * x),
        ExtendedReal::PosInf => ExtendedReal::PosInf,
        ExtendedReal::NegInf => ExtendedReal::NegInf,
    }
}

/// Perspective `y f(x/y)` with the limiting conventions at `x = 0` or `y = 0`.
pub fn perspective(f: &ConvexFunctionSpec, x: f64, y: f64) -> Result<ExtendedReal> {
    if !(x >= 0.0) || !(y >= 0.0) {
        return Err(Error::BadParams(format!("perspective needs x, y ≥ 0, got ({x}, {y})")));
    }
    if y > 0.0 {
        if x == 0.0 {
            return Ok(times(y, f.limit_at_zero()));
        }
        return Ok(ExtendedReal::Finite(y * f.eval(x / y)));
    }
    Ok(times(x, f.slope_at_infinity()))
}

/// `S_f^cl(p‖q) = Σ P_f(p(x), q(x))`.
pub fn classical_fdiv(f: &ConvexFunctionSpec, p: &WeightVector, q: &WeightVector) -> Result<ExtendedReal> {
    if p.len() != q.len() {
        return Err(Error::DimMismatch(p.len(), q.len()));
    }
    let mut acc = 0.0;
    for (&x, &y) in p.values().iter().zip(q.values()) {
        match perspective(f, x, y)? {
            ExtendedReal::Finite(v) => acc += v,
            other => return Ok(other),
        }
    }
    Ok(ExtendedReal::Finite(acc))
}

fn knife_check(c: f64, d: f64, beta: f64, gamma: f64, n: u64) -> Result<()> {
    if !(c > 0.0 && d > 0.0 && beta > 0.0 && gamma > 0.0) || n == 0 {
        return Err(Error::BadParams("knife edge needs c, d, β, γ > 0 and n ≥ 1".into()));
    }
    let nl = (n as f64).ln();
    if c.ln() - beta * nl >= 0.0 || d.ln() - gamma * nl >= 0.0 {
        return Err(Error::BadParams("c n^-β and d n^-γ must be below 1".into()));
    }
    Ok(())
}

/// `((1 − c n^{−β}, c n^{−β}), (1 − d n^{−γ}, d n^{−γ}))`.
pub fn knife_edge_family(c: f64, d: f64, beta: f64, gamma: f64, n: u64) -> Result<(WeightVector, WeightVector)> {
    knife_check(c, d, beta, gamma, n)?;
    let x = (c * (n as f64).powf(-beta)).clamp(0.0, 1.0);
    let y = (d * (n as f64).powf(-gamma)).clamp(0.0, 1.0);
    Ok((WeightVector::new(vec![1.0 - x, x])?, WeightVector::new(vec![1.0 - y, y])?))
}

/// The same pair as log-weights, exact even when `c n^{−β}` underflows.
pub fn knife_edge_log_weights(c: f64, d: f64, beta: f64, gamma: f64, n: u64) -> Result<([f64; 2], [f64; 2])> {
    knife_check(c, d, beta, gamma, n)?;
    let nl = (n as f64).ln();
    let lx = c.ln() - beta * nl;
    let ly = d.ln() - gamma * nl;
    Ok(([(-lx.exp()).ln_1p(), lx], [(-ly.exp()).ln_1p(), ly]))
}

/// Limit of `D_α^cl` along the knife-edge family as `n → ∞`.
pub fn knife_edge_limit(c: f64, d: f64, beta: f64, gamma: f64, alpha: f64) -> ExtendedReal {
    let ratio = beta / gamma;
    let edge = 1.0 - 1.0 / alpha;
    if (ratio - edge).abs() < 1e-12 {
        ExtendedReal::Finite((1.0 + c.powf(alpha) * d.powf(1.0 - alpha)).ln() / (alpha - 1.0))
    } else if ratio < edge {
        ExtendedReal::PosInf
    } else {
        ExtendedReal::Finite(0.0)
    }
}
