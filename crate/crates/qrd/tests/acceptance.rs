//! End-to-end acceptance checks, one line per criterion.
//!
//! Run with `cargo test -p qrd --test acceptance -- --nocapture` to see the
//! PASS/FAIL report. Criteria listed in `KNOWN_FAILING` are evaluated exactly
//! as stated and reported as FAIL; the test asserts that every other
//! criterion passes and that the known ones still fail, so a change in either
//! direction is noticed.

use qrd::channels::{
    alpha_sweep_channel, channel_divergence, channel_dmax, classical_channel_grid, classical_minimax_gap, Channel,
    ChannelDivergenceKind, SweepKind,
};
use qrd::classical::{classical_renyi, classical_renyi_log, WeightVector};
use qrd::divergences::{d_alpha_z, d_max, q_alpha_z, umegaki, DivergenceParams, ZParam};
use qrd::families::{app_e_norm, gen_a2, gen_app_e, gen_pure, knife_edge_log_weights};
use qrd::lab::{run_suite, Suite};
use qrd::measured::{measured_renyi_lower, test_measured};
use qrd::random::{random_commuting_pair, random_density, random_kraus, rng_stream};
use qrd::{ExtendedReal, HermitianOperator};

const SEED: u64 = 7;

/// Criteria that cannot be met as stated; see the notes next to each check.
const KNOWN_FAILING: &[u32] = &[3, 11, 14];

struct Outcome {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn d(rho: &HermitianOperator, sigma: &HermitianOperator, alpha: f64, z: f64) -> f64 {
    d_alpha_z(rho, sigma, DivergenceParams::finite(alpha, z).unwrap()).unwrap().d.to_f64()
}

fn dmax(rho: &HermitianOperator, sigma: &HermitianOperator) -> f64 {
    d_max(rho, sigma).unwrap().to_f64()
}

fn suite(id: u32, name: &'static str, s: Suite, trials: usize) -> Outcome {
    let report = run_suite(s, trials, SEED);
    let detail = match report.failures.first() {
        None => format!("{} trials, {} assertions", report.trials, report.assertions),
        Some(f) => format!(
            "{} of {} assertions failed; first: case {} {} ({})",
            report.failures.len(),
            report.assertions,
            f.case_id,
            f.invariant,
            f.detail
        ),
    };
    Outcome { id, name, pass: report.passed, detail }
}

fn pure_family_limit() -> Outcome {
    let (rho, sigma) = gen_pure(1.0, 1e-6).unwrap();
    let gap = (dmax(&rho, &sigma) - 2f64.ln()).abs();
    let (rho, sigma) = gen_pure(1.0, 0.1).unwrap();
    let dm = dmax(&rho, &sigma);
    let worst = [1.5, 2.0, 3.0].iter().map(|&a| (d(&rho, &sigma, a, a - 1.0) - dm).abs()).fold(0.0, f64::max);
    Outcome {
        id: 1,
        name: "pure-family limit",
        pass: gap <= 1e-5 && worst <= 1e-9,
        detail: format!("|D_max - ln 2| = {gap:.3e}; max |D_(a,a-1) - D_max| = {worst:.3e}"),
    }
}

fn app_e() -> Outcome {
    let (rho, sigma) = gen_app_e(0.5, 1e-5).unwrap();
    let target = ((1.5 + 1.25f64.sqrt()) / 2.0).ln();
    assert!((app_e_norm(0.5).ln() - target).abs() < 1e-15);
    let gap = (dmax(&rho, &sigma) - target).abs();
    let q = q_alpha_z(&rho, &sigma, DivergenceParams::petz(2.0).unwrap()).unwrap().to_f64();
    Outcome {
        id: 2,
        name: "appE discontinuity family",
        pass: gap <= 1e-3 && q >= 1.25 - 1e-3,
        detail: format!("|D_max - ln||C||| = {gap:.3e}; Q_(2,1) = {q:.6}"),
    }
}

// At n = 20 the lower bound (1−c)^{2+γ−α}·¼(1+c)^α/c gives Q ≈ 2.9e3, so
// D_(3.5,1) = ln Q / 2.5 ≈ 3.19; passing 10 needs n ≈ 70, where 1 − 2^{−n}
// is no longer representable. The threshold is checked as stated.
fn a2_blowup() -> Outcome {
    let dms: Vec<f64> = (5..=20)
        .map(|n| {
            let (rho, sigma) = gen_a2(1.0, n).unwrap();
            dmax(&rho, &sigma)
        })
        .collect();
    let decreasing = dms.windows(2).all(|w| w[1] < w[0]);
    let last = *dms.last().unwrap();
    let (rho, sigma) = gen_a2(1.0, 20).unwrap();
    let petz = d(&rho, &sigma, 3.5, 1.0);
    Outcome {
        id: 3,
        name: "a2 divergence blow-up",
        pass: decreasing && last < 0.05 && petz > 10.0,
        detail: format!("D_max strictly decreasing: {decreasing}; D_max(20) = {last:.4e}; D_(3.5,1)(20) = {petz:.4}"),
    }
}

// Only the ratio β/γ is fixed; γ = 200 puts the divergent branch past 10³ at
// n = 10⁶. Weights are handled as logarithms since n^{-γ} underflows.
fn knife_edge() -> Outcome {
    let gamma = 200.0;
    let at = |ratio: f64| {
        let (lp, lq) = knife_edge_log_weights(1.0, 1.0, ratio * gamma, gamma, 1_000_000).unwrap();
        classical_renyi_log(&lp, &lq, 2.0).unwrap()
    };
    let edge = at(0.5).to_f64();
    let below = at(0.25);
    let above = at(0.75).to_f64();
    let pass = (edge - 2f64.ln()).abs() <= 1e-3 && below.to_f64() > 1e3 && above.abs() <= 1e-3;
    Outcome {
        id: 4,
        name: "classical knife-edge",
        pass,
        detail: format!("edge {edge:.6} (ln 2 = {:.6}); below {below}; above {above:.3e}", 2f64.ln()),
    }
}

fn alpha_to_one() -> Outcome {
    let mut worst: f64 = 0.0;
    for t in 0..50u64 {
        let mut rng = rng_stream(SEED, 1000 + t);
        let dim = 2 + (t as usize) % 2;
        let rho = random_density(dim, &mut rng);
        let sigma = random_density(dim, &mut rng);
        let um = umegaki(&rho, &sigma).unwrap().to_f64();
        for alpha in [1.0 - 1e-4, 1.0 + 1e-4] {
            for z in [1.0, alpha, alpha / 2.0, 0.3] {
                worst = worst.max((d(&rho, &sigma, alpha, z) - um).abs());
            }
        }
    }
    Outcome { id: 5, name: "alpha -> 1 continuity", pass: worst <= 2e-3, detail: format!("max deviation {worst:.3e}") }
}

fn channels() -> Outcome {
    let id = Channel::identity(2);
    let dep = Channel::depolarizing(2, 0.2).unwrap();
    let dm = channel_dmax(&id, &dep).unwrap().to_f64();
    let dm_ok = (dm - (1.0 / 0.85f64).ln()).abs() <= 1e-8;

    let mut rng = rng_stream(SEED, 2000);
    let noisy = Channel::from_kraus(random_kraus(2, 2, 2, &mut rng)).unwrap();
    let grid: Vec<f64> = [1.001, 1.1, 1.25, 1.5, 1.75, 2.0].to_vec();
    let mut curves_ok = true;
    let mut notes = Vec::new();
    for (label, n1) in [("id", &id), ("random", &noisy)] {
        let um = channel_divergence(n1, &dep, ChannelDivergenceKind::Umegaki, 32, SEED).unwrap().value.to_f64();
        let sweep = alpha_sweep_channel(n1, &dep, SweepKind::Sandwiched, &grid, 32, SEED).unwrap();
        let right = (sweep.points[0].1.to_f64() - um).abs();
        let petz = ChannelDivergenceKind::Renyi { alpha: 0.999, z: ZParam::Finite(1.0) };
        let left = (channel_divergence(n1, &dep, petz, 32, SEED).unwrap().value.to_f64() - um).abs();
        curves_ok &= sweep.monotone && right <= 5e-3 && left <= 5e-3;
        notes.push(format!("{label}: monotone {} right {right:.2e} left {left:.2e}", sweep.monotone));
    }

    let w1 = vec![vec![0.9, 0.1], vec![0.3, 0.7]];
    let w2 = vec![vec![0.6, 0.4], vec![0.5, 0.5]];
    let c1 = Channel::classical(&w1).unwrap();
    let c2 = Channel::classical(&w2).unwrap();
    let mut classical_gap: f64 = 0.0;
    for &alpha in &grid {
        let kind = ChannelDivergenceKind::Renyi { alpha, z: ZParam::Finite(alpha) };
        let v = channel_divergence(&c1, &c2, kind, 32, SEED).unwrap().value.to_f64();
        let oracle = classical_channel_grid(&w1, &w2, alpha, 1e-3).unwrap().to_f64();
        classical_gap = classical_gap.max((v - oracle).abs());
    }
    let minimax = classical_minimax_gap(&w1, &w2, &grid, 1e-3).unwrap();

    Outcome {
        id: 12,
        name: "channel divergences",
        pass: dm_ok && curves_ok && classical_gap <= 1e-3 && minimax.gap <= 2e-3,
        detail: format!(
            "dmax {dm:.12} vs {:.12}; {}; classical max gap {classical_gap:.2e}; minimax gap {:.2e}",
            (1.0 / 0.85f64).ln(),
            notes.join("; "),
            minimax.gap
        ),
    }
}

fn measured() -> Outcome {
    let mut classical_gap: f64 = 0.0;
    let mut high_alpha_gap: f64 = 0.0;
    let mut excess = f64::NEG_INFINITY;
    for t in 0..20u64 {
        let mut rng = rng_stream(SEED, 3000 + t);
        let dim = 2 + (t as usize) % 2;
        let (rho, sigma) = random_commuting_pair(dim, &mut rng);
        let p = WeightVector::new(diagonal_in(&rho, &rho)).unwrap();
        let q = WeightVector::new(diagonal_in(&sigma, &rho)).unwrap();
        for alpha in [0.5, 1.5, 2.0] {
            let cl = classical_renyi(&p, &q, alpha).unwrap().to_f64();
            let m = measured_renyi_lower(&rho, &sigma, alpha, 8, SEED + t).unwrap().value.to_f64();
            classical_gap = classical_gap.max((m - cl).abs());
        }
        let tm = test_measured(&rho, &sigma, 64.0, 8, SEED + t).unwrap().value.to_f64();
        high_alpha_gap = high_alpha_gap.max((tm - dmax(&rho, &sigma)).abs());

        let rho = random_density(dim, &mut rng);
        let sigma = random_density(dim, &mut rng);
        for alpha in [0.5, 0.8, 1.5, 2.0, 3.0] {
            let sand = d(&rho, &sigma, alpha, alpha);
            let m = measured_renyi_lower(&rho, &sigma, alpha, 8, SEED + t).unwrap().value.to_f64();
            let tm = test_measured(&rho, &sigma, alpha, 8, SEED + t).unwrap().value.to_f64();
            excess = excess.max(m - sand).max(tm - sand);
        }
    }
    Outcome {
        id: 13,
        name: "measured divergences",
        pass: classical_gap <= 1e-4 && excess <= 1e-9 && high_alpha_gap <= 5e-2,
        detail: format!(
            "commuting gap {classical_gap:.2e}; max excess over sandwiched {excess:.2e}; |test_64 - D_max| {high_alpha_gap:.2e}"
        ),
    }
}

/// Diagonal of `a` in the eigenbasis of `basis`.
fn diagonal_in(a: &HermitianOperator, basis: &HermitianOperator) -> Vec<f64> {
    let v = basis.eigenvectors();
    let m = v.adjoint() * a.matrix() * v;
    (0..a.dim()).map(|i| m[(i, i)].re.max(0.0)).collect()
}

// Adding εI to σ raises D_α by at most about log(1/ε)/(α−1) when the support
// condition fails, so at ε = 1e-8 the value is about 17 and cannot pass 10³.
fn smoothing() -> Outcome {
    let base = suite(14, "smoothing", Suite::Smoothing, 20);
    let rho = HermitianOperator::diagonal(&[0.5, 0.5]);
    let sigma = HermitianOperator::diagonal(&[1.0, 0.0]);
    let params = DivergenceParams::sandwiched(2.0).unwrap();
    let curve = qrd::divergences::epsilon_smoothing_curve(&rho, &sigma, params, &[1e-2, 1e-4, 1e-6, 1e-8]).unwrap();
    let last = *curve.values.last().unwrap();
    let diverges = curve.unsmoothed == ExtendedReal::PosInf && last.to_f64() > 1e3;
    Outcome {
        id: 14,
        name: "smoothing surrogate",
        pass: base.pass && curve.monotone && diverges,
        detail: format!("{}; unsupported case at eps=1e-8: {last} (needs > 1e3)", base.detail),
    }
}

#[test]
fn acceptance_criteria() {
    let outcomes = vec![
        pure_family_limit(),
        app_e(),
        a2_blowup(),
        knife_edge(),
        alpha_to_one(),
        suite(6, "ALT inequalities", Suite::Alt, 200),
        suite(7, "variational formula", Suite::Variational, 50),
        suite(8, "D_max domination", Suite::Dmaxbound, 100),
        suite(9, "Nussbaum-Szkola identity", Suite::Nszkola, 500),
        suite(10, "z -> 0 limits", Suite::Zlimits, 100),
        // a column can only be folded away when its state lies inside the hull
        // of the others; eight random Bloch-ball points are mostly hull vertices
        suite(11, "Caratheodory reduction", Suite::Caratheodory, 100),
        channels(),
        measured(),
        smoothing(),
    ];
    for o in &outcomes {
        println!("{} [{:>2}] {}: {}", if o.pass { "PASS" } else { "FAIL" }, o.id, o.name, o.detail);
    }
    let unexpected: Vec<u32> =
        outcomes.iter().filter(|o| o.pass == KNOWN_FAILING.contains(&o.id)).map(|o| o.id).collect();
    assert!(unexpected.is_empty(), "criteria with unexpected outcome: {unexpected:?}");
}
