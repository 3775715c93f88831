//! Property suites behind `qrd verify`.
//!
//! Each trial draws from its own stream `rng_stream(seed, trial)`, so results
//! do not depend on how trials are spread over threads.

use super::config::{Digest, ResultRecord};
use crate::channels::{
    channel_divergence, channel_dmax, channel_dmax_bisection, cp_order_check, Channel, ChannelDivergenceKind,
};
use crate::classical::{classical_q, ConvexFunctionSpec, WeightVector};
use crate::divergences::{
    alt_chain, d_alpha_z, d_alpha_zero, d_max, dmax_domination_check, epsilon_smoothing_curve, nussbaum_szkola,
    q_alpha_z, q_zero_extrapolated, umegaki, variational_objective, variational_optimizer_h, DivergenceParams, Note,
    ZParam,
};
use crate::families::{
    a2_schedule, app_e_norm, gen_a2, gen_app_e, gen_app_e_unnormalized, gen_kappa, gen_pure, pure_dmax_closed_form,
};
use crate::opcore::{op_norm, CMat, HermitianOperator, SupportCutoff};
use crate::random::{
    gaussian, random_density, random_density_rank, random_kraus, random_psd, random_pure, random_simplex, rng_stream,
    QrdRng,
};
use crate::reversetests::{caratheodory_reduce, rt_f_divergence, ReverseTest};
use crate::zlimits::{equality_case_check, GapDirection};
use crate::{Error, ExtendedReal, Result};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Alt,
    Variational,
    Dmaxbound,
    Nszkola,
    Caratheodory,
    Zlimits,
    Families,
    Channels,
    Smoothing,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Alt,
        Suite::Variational,
        Suite::Dmaxbound,
        Suite::Nszkola,
        Suite::Caratheodory,
        Suite::Zlimits,
        Suite::Families,
        Suite::Channels,
        Suite::Smoothing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Alt => "alt",
            Suite::Variational => "variational",
            Suite::Dmaxbound => "dmaxbound",
            Suite::Nszkola => "nszkola",
            Suite::Caratheodory => "caratheodory",
            Suite::Zlimits => "zlimits",
            Suite::Families => "families",
            Suite::Channels => "channels",
            Suite::Smoothing => "smoothing",
        }
    }

    fn trial(self, trial: usize, rng: &mut QrdRng) -> Result<ResultRecord> {
        match self {
            Suite::Alt => alt_trial(trial, rng),
            Suite::Variational => variational_trial(trial, rng),
            Suite::Dmaxbound => dmaxbound_trial(trial, rng),
            Suite::Nszkola => nszkola_trial(trial, rng),
            Suite::Caratheodory => caratheodory_trial(trial, rng),
            Suite::Zlimits => zlimits_trial(trial, rng),
            Suite::Families => families_trial(trial, rng),
            Suite::Channels => channels_trial(trial, rng),
            Suite::Smoothing => smoothing_trial(trial, rng),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| Error::BadParams(format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub case_id: String,
    pub invariant: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub trials: usize,
    pub seed: u64,
    pub passed: bool,
    pub assertions: usize,
    pub failures: Vec<Failure>,
    #[serde(skip)]
    pub records: Vec<ResultRecord>,
}

pub fn run_suite(suite: Suite, trials: usize, seed: u64) -> SuiteReport {
    let records: Vec<ResultRecord> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_stream(seed, t as u64);
            suite.trial(t, &mut rng).unwrap_or_else(|e| {
                let mut r =
                    ResultRecord::new(suite.name(), t.to_string(), Digest::default().str(suite.name()).finish());
                r.check("lab.trial_completes", false, || e.to_string());
                r
            })
        })
        .collect();
    let mut failures = Vec::new();
    let mut assertions = 0;
    for r in &records {
        assertions += r.assertions.len();
        for a in r.assertions.iter().filter(|a| !a.passed) {
            failures.push(Failure {
                case_id: r.case_id.clone(),
                invariant: a.invariant.clone(),
                detail: a.detail.clone(),
            });
        }
    }
    SuiteReport { suite, trials, seed, passed: failures.is_empty(), assertions, failures, records }
}

fn record(suite: Suite, trial: usize, ops: &[&HermitianOperator]) -> ResultRecord {
    let digest = ops.iter().fold(Digest::default().str(suite.name()), |d, op| d.matrix(op.matrix()));
    ResultRecord::new(suite.name(), trial.to_string(), digest.finish())
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

const ALT_ALPHAS: [f64; 5] = [0.3, 0.7, 1.5, 2.0, 3.0];
const ALT_ZS: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];

fn alt_trial(trial: usize, rng: &mut QrdRng) -> Result<ResultRecord> {
    let d = 2 + trial % 2;
    let rho = random_density(d, rng);
    let sigma = random_density(d, rng);
    let mut r = record(Suite::Alt, trial, &[&rho, &sigma]);
    for &alpha in &ALT_ALPHAS {
        for (i, &z1) in ALT_ZS.iter().enumerate() {
            for &z2 in &ALT_ZS[i + 1..] {
                let c = alt_chain(&rho, &sigma, alpha, z1, z2)?;
                r.check("divergences.alt_z_monotone", c.lower_holds, || {
                    format!("alpha={alpha} z1={z1} z2={z2}: Q_z2={} Q_z1={}", c.q_z2, c.q_z1)
                });
                r.check("divergences.alt_upper_bound", c.upper_holds, || {
                    format!("alpha={alpha} z1={z1} z2={z2}: Q_z1={} bound={}", c.q_z1, c.upper)
                });
            }
        }
    }
    Ok(r)
}

fn variational_trial(trial: usize, rng: &mut QrdRng) -> Result<ResultRecord> {
    let d = 2 + trial % 2;
    let rho = random_density(d, rng);
    let sigma = random_density(d, rng);
    let mut r = record(Suite::Variational, trial, &[&rho, &sigma]);
    for alpha in [1.3, 1.7, 2.0] {
        for z in [alpha, alpha / 2.0 + 0.5, 1.0] {
            let params = DivergenceParams::finite(alpha, z)?;
            let q = q_alpha_z(&rho, &sigma, params)?.to_f64();
            let h = variational_optimizer_h(&rho, &sigma, params)?;
            let at_opt = variational_objective(&rho, &sigma, params, &h)?;
            r.check("divergences.variational_optimizer", rel_close(at_opt, q, 1e-9), || {
                format!("alpha={alpha} z={z}: objective {at_opt} vs Q {q}")
            });
            let mut worst = f64::NEG_INFINITY;
            for _ in 0..100 {
                let scale = gaussian(rng).exp();
                let h = random_psd(d, d, rng).scaled(scale);
                worst = worst.max(variational_objective(&rho, &sigma, params, &h)?);
            }
            r.check("divergences.variational_domination", worst <= q * (1.0 + 1e-9), || {
                format!("alpha={alpha} z={z}: random H reached {worst} > Q {q}")
            });
        }
    }
    Ok(r)
}

fn dmaxbound_trial(trial: usize, rng: &mut QrdRng) -> Result<ResultRecord> {
    let d = 2 + trial % 2;
    let sigma = random_density(d, rng);
    let rho = random_pure(d, rng);
    let mut r = record(Suite::Dmaxbound, trial, &[&rho, &sigma]);
    for alpha in [1.5, 2.5, 4.0] {
        let below = dmax_domination_check(&rho, &sigma, DivergenceParams::finite(alpha, 0.9 * (alpha - 1.0))?)?;
        let gap = below.d_az.to_f64() - below.d_max.to_f64();
        r.check("divergences.dmax_strict_violation", gap > 1e-6, || {
            format!("alpha={alpha} z=0.9(alpha-1): gap {gap:e}")
        });
        for z in [alpha - 1.0, alpha, 2.0 * alpha] {
            let c = dmax_domination_check(&rho, &sigma, DivergenceParams::finite(alpha, z)?)?;
            r.check("divergences.dmax_domination", c.dominated, || {
                format!("alpha={alpha} z={z}: D={} > Dmax={}", c.d_az, c.d_max)
            });
        }
    }
    Ok(r)
}

fn nszkola_trial(trial: usize, rng: &mut QrdRng) -> Result<ResultRecord> {
    let d = 2 + trial % 3;
    let rho = random_density(d, rng);
    let sigma = random_density(d, rng);
    let mut r = record(Suite::Nszkola, trial, &[&rho, &sigma]);
    let (p, q) = nussbaum_szkola(&rho, &sigma)?;
    for alpha in [0.3, 0.8, 1.5, 3.0] {
        let quantum = q_alpha_z(&rho, &sigma, DivergenceParams::petz(alpha)?)?.to_f64();
        let classical = classical_q(&p, &q, alpha)?.to_f64();
        r.check("divergences.nussbaum_szkola_identity", rel_close(quantum, classical, 1e-10), || {
            format!("alpha={alpha}: Q_petz {quantum} vs classical {classical}")
        });
    }
    Ok(r)
}

fn push_forward(rt: &ReverseTest, w: &WeightVector) -> CMat {
    let d = rt.dim();
    rt.omegas().iter().zip(w.values()).fold(CMat::zeros(d, d), |acc, (o, &x)| acc + o.matrix().scale(x))
}

/// Qubit reverse test with 8 random columns; reduction must reach `n ≤ 5`.
pub fn random_qubit_reverse_test(rng: &mut QrdRng, n: usize) -> Result<ReverseTest> {
    let omegas = (0..n).map(|_| random_density(2, rng)).collect();
    ReverseTest::new(omegas, WeightVector::new(random_simplex(n, rng))?, WeightVector::new(random_simplex(n, rng))?)
}

fn caratheodory_trial(trial: usize, rng: &mut QrdRng) -> Result<ResultRecord> {
    let rt = random_qubit_reverse_test(rng, 8)?;
    let (rho, sigma) = (push_forward(&rt, rt.p()), push_forward(&rt, rt.q()));
    let digest = rt.omegas().iter().fold(Digest::default().str("caratheodory"), |d, o| d.matrix(o.matrix()));
    let mut r = ResultRecord::new(
        "caratheodory",
        trial.to_string(),
        digest.f64s(rt.p().values()).f64s(rt.q().values()).finish(),
    );
    let fs = [ConvexFunctionSpec::power(2.0)?, ConvexFunctionSpec::Eta];
    let mut cur = rt;
    let mut prev: Vec<f64> = fs.iter().map(|f| rt_f_divergence(&cur, f).map(|v| v.to_f64())).collect::<Result<_>>()?;
    let stop = loop {
        match caratheodory_reduce(&cur) {
            Ok(next) => {
                let er = op_norm(&(push_forward(&next, next.p()) - &rho))
                    .max(op_norm(&(push_forward(&next, next.q()) - &sigma)));
                r.check("reversetests.fold_reconstructs", er <= 1e-9, || format!("n={}: error {er:e}", next.len()));
                let vals: Vec<f64> =
                    fs.iter().map(|f| rt_f_divergence(&next, f).map(|v| v.to_f64())).collect::<Result<_>>()?;
                for (k, (a, b)) in vals.iter().zip(&prev).enumerate() {
                    r.check("reversetests.fold_nonincreasing", *a <= b + 1e-9, || {
                        format!("n={} f#{k}: {b} -> {a}", next.len())
                    });
                }
                prev = vals;
                cur = next;
            }
            Err(e) => break e.to_string(),
        }
    };
    r.value("final_columns", ExtendedReal::Finite(cur.len() as f64));
    r.check("reversetests.caratheodory_bound", cur.len() <= 5, || format!("stopped at n={}: {stop}", cur.len()));
    Ok(r)
}

fn zlimits_trial(trial: usize, rng: &mut QrdRng) -> Result<ResultRecord> {
    let d = 2 + trial % 2;
    let rho = random_density(d, rng);
    let sigma = random_density(d, rng);
    let mut r = record(Suite::Zlimits, trial, &[&rho, &sigma]);
    for alpha in [0.5, 2.0] {
        let v = d_alpha_zero(&rho, &sigma, alpha)?;
        let q0 = q_zero_extrapolated(&rho, &sigma, alpha, SupportCutoff::default());
        let oracle = q0.ln() / (alpha - 1.0);
        let spectral = v.d.to_f64();
        r.value(&format!("d_zero_{alpha}"), v.d);
        r.check("zlimits.generic_uses_spectral", !v.notes.contains(&Note::Extrapolated), || format!("alpha={alpha}"));
        r.check("zlimits.spectral_matches_extrapolation", (spectral - oracle).abs() <= 1e-4, || {
            format!("alpha={alpha}: spectral {spectral} vs extrapolated {oracle}")
        });
    }

    let psi = random_pure(d, rng);
    let lo = d_alpha_zero(&psi, &sigma, 0.5)?.d.to_f64();
    let hi = d_alpha_zero(&psi, &sigma, 2.0)?.d.to_f64();
    let (smax, smin) = (sigma.max_eigenvalue(), sigma.min_eigenvalue());
    r.check("zlimits.pure_lower_value", (lo + smax.ln()).abs() <= 1e-8, || format!("{lo} vs {}", -smax.ln()));
    r.check("zlimits.pure_upper_value", (hi + smin.ln()).abs() <= 1e-8, || format!("{hi} vs {}", -smin.ln()));
    let um = umegaki(&psi, &sigma)?.to_f64();
    let dm = d_max(&psi, &sigma)?.to_f64();
    r.check("zlimits.pure_strict_chain", lo + 1e-6 < um && um + 1e-6 < dm && dm + 1e-6 < hi, || {
        format!("{lo} < {um} < {dm} < {hi}")
    });

    // aligned: both spectra descending on the same basis; anti-aligned: σ reversed
    let mut a = random_simplex(d, rng);
    let mut b = random_simplex(d, rng);
    a.sort_by(|x, y| y.partial_cmp(x).unwrap());
    b.sort_by(|x, y| y.partial_cmp(x).unwrap());
    let ra = HermitianOperator::diagonal(&a);
    let below = equality_case_check(&ra, &HermitianOperator::diagonal(&b), GapDirection::Below)?;
    b.reverse();
    let above = equality_case_check(&ra, &HermitianOperator::diagonal(&b), GapDirection::Above)?;
    for (name, e) in [("below", below), ("above", above)] {
        r.check("zlimits.equality_case", e.commuting_aligned && e.consistent && e.gap.abs() <= 1e-8, || {
            format!("{name}: gap {:e}, aligned {}, consistent {}", e.gap, e.commuting_aligned, e.consistent)
        });
    }
    Ok(r)
}

fn families_trial(trial: usize, rng: &mut QrdRng) -> Result<ResultRecord> {
    let mut r = ResultRecord::new(
        "families",
        trial.to_string(),
        Digest::default().str("families").f64s(&[trial as f64]).finish(),
    );
    let unit = |ops: &(HermitianOperator, HermitianOperator)| {
        (ops.0.trace() - 1.0).abs() <= 1e-10 && (ops.1.trace() - 1.0).abs() <= 1e-10
    };

    let c = rng.gen_range(0.5..3.0);
    let eps = rng.gen_range(0.01..0.9) / c;
    let pair = gen_pure(c, eps.min(0.99))?;
    r.check("families.unit_trace", unit(&pair), || format!("pure c={c} eps={eps}"));
    let dm = d_max(&pair.0, &pair.1)?.to_f64();
    let closed = pure_dmax_closed_form(c, eps.min(0.99)).ln();
    r.check("families.pure_dmax_closed_form", (dm - closed).abs() <= 1e-9, || format!("{dm} vs {closed}"));
    let alpha = rng.gen_range(1.2..3.0);
    let v = d_alpha_z(&pair.0, &pair.1, DivergenceParams::finite(alpha, alpha - 1.0)?)?.d.to_f64();
    r.check("families.pure_equals_dmax", (v - dm).abs() <= 1e-9, || format!("alpha={alpha}: {v} vs {dm}"));

    let gamma = rng.gen_range(0.05..0.95);
    let eps = 10f64.powf(rng.gen_range(-4.0..-1.0));
    let un = gen_app_e_unnormalized(gamma, eps)?;
    let dm = d_max(&un.0, &un.1)?.to_f64();
    r.check("families.app_e_dmax_identity", (dm - app_e_norm(gamma).ln()).abs() <= 1e-9, || {
        format!("gamma={gamma} eps={eps}: {dm} vs {}", app_e_norm(gamma).ln())
    });
    r.check("families.unit_trace", unit(&gen_app_e(gamma, eps)?), || format!("appE gamma={gamma}"));

    let n = 5 + (trial % 16) as u32;
    let (ra, sa) = gen_a2(1.0, n)?;
    let (rb, sb) = gen_a2(1.0, n + 1)?;
    let (da, db) = (d_max(&ra, &sa)?.to_f64(), d_max(&rb, &sb)?.to_f64());
    r.check("families.a2_dmax_decreasing", db < da, || format!("n={n}: {da} -> {db}"));
    let cn = a2_schedule(n);
    let q = q_alpha_z(&ra, &sa, DivergenceParams::petz(3.5)?)?.to_f64();
    let bound = (1.0 - cn).powf(2.0 + 1.0 - 3.5) * 0.25 * (1.0 + cn).powf(3.5) / cn;
    r.check("families.a2_petz_lower_bound", q >= bound * (1.0 - 1e-9), || format!("n={n}: Q={q} < {bound}"));

    let kappa = rng.gen_range(0.5..2.0);
    let lambda = rng.gen_range(1.5..4.0);
    let dim = 2 + trial % 3;
    // small enough for the limit, large enough that (cε)^{1/κ} stays above the support cutoff
    let eps = if kappa < 1.0 { 1e-5 } else { 1e-8 };
    let pair = gen_kappa(kappa, lambda, eps, dim)?;
    r.check("families.unit_trace", unit(&pair), || format!("kappa={kappa}"));
    let v = d_alpha_z(&pair.0, &pair.1, DivergenceParams::finite(2.0, 1.0 / kappa)?)?.d.to_f64();
    let target = lambda.ln() / kappa;
    r.check("families.kappa_limit", (v - target).abs() <= 1e-3, || {
        format!("kappa={kappa} lambda={lambda}: {v} vs {target}")
    });
    Ok(r)
}

fn channels_trial(trial: usize, rng: &mut QrdRng) -> Result<ResultRecord> {
    let mut r = ResultRecord::new(
        "channels",
        trial.to_string(),
        Digest::default().str("channels").f64s(&[trial as f64]).finish(),
    );
    if trial == 0 {
        let v = channel_dmax(&Channel::identity(2), &Channel::depolarizing(2, 0.2)?)?.to_f64();
        r.check("channels.dmax_depolarizing", (v - (1.0 / 0.85f64).ln()).abs() <= 1e-8, || format!("{v}"));
    }
    let n1 = Channel::from_kraus(random_kraus(2, 2, 1 + trial % 3, rng))?;
    let n2 = Channel::depolarizing(2, rng.gen_range(0.1..0.9))?;
    r.check("channels.trace_preserving", n1.is_trace_preserving() && n2.is_trace_preserving(), String::new);
    let exact = channel_dmax(&n1, &n2)?;
    let bis = channel_dmax_bisection(&n1, &n2)?;
    r.value("dmax", exact);
    r.check("channels.dmax_routes_agree", (exact.to_f64() - bis.to_f64()).abs() <= 1e-6, || {
        format!("{exact} vs {bis}")
    });
    let lam = exact.to_f64().exp();
    r.check("channels.cp_order_at_dmax", cp_order_check(&n1, &n2, lam * (1.0 + 1e-9))?, || format!("lambda={lam}"));
    let kind = ChannelDivergenceKind::Renyi { alpha: 2.0, z: ZParam::Finite(2.0) };
    let sw = channel_divergence(&n1, &n2, kind, 4, trial as u64)?.value;
    r.value("sandwiched_2", sw);
    r.check("channels.dmax_domination", sw.le_within(exact, 1e-9), || format!("{sw} > {exact}"));
    Ok(r)
}

fn smoothing_trial(trial: usize, rng: &mut QrdRng) -> Result<ResultRecord> {
    let d = 2 + trial % 2;
    let rho = random_density(d, rng);
    let sigma = random_density(d, rng);
    let singular = random_density_rank(d, d - 1, rng);
    let mut r = record(Suite::Smoothing, trial, &[&rho, &sigma, &singular]);
    let grid = [1e-2, 1e-4, 1e-6, 1e-8];
    for alpha in [1.5, 2.0] {
        let params = DivergenceParams::sandwiched(alpha)?;
        let c = epsilon_smoothing_curve(&rho, &sigma, params, &grid)?;
        r.check("divergences.smoothing_monotone", c.monotone, || format!("alpha={alpha}: {:?}", c.values));
        r.check("divergences.smoothing_converges", c.converged == Some(true), || {
            format!("alpha={alpha}: last {} vs {}", c.values[3], c.unsmoothed)
        });
        let c = epsilon_smoothing_curve(&rho, &singular, params, &grid)?;
        r.check("divergences.smoothing_monotone", c.monotone, || format!("singular alpha={alpha}: {:?}", c.values));
        // without support containment the curve grows like log(1/ε)
        let rise = c.values[3].to_f64() - c.values[0].to_f64();
        let log_span = (grid[0] / grid[3]).ln();
        r.check("divergences.smoothing_diverges", c.unsmoothed.is_pos_inf() && rise >= 0.5 * log_span, || {
            format!("singular alpha={alpha}: rise {rise} over log-span {log_span}")
        });
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn small_runs_pass() {
        for s in [Suite::Alt, Suite::Nszkola, Suite::Dmaxbound, Suite::Zlimits, Suite::Smoothing, Suite::Families] {
            let rep = run_suite(s, 4, 7);
            assert!(rep.passed, "{s}: {:?}", rep.failures);
            assert_eq!(rep.records.len(), 4);
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let a = run_suite(Suite::Alt, 3, 11);
        let b = run_suite(Suite::Alt, 3, 11);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_eq!(a.records, b.records);
    }

    #[test]
    fn caratheodory_failures_name_the_invariant() {
        let rep = run_suite(Suite::Caratheodory, 3, 7);
        for f in &rep.failures {
            assert!(f.invariant.starts_with("reversetests."), "{f:?}");
        }
    }
}
