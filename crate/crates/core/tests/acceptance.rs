//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
//!
//! Run with `cargo test -p deltaprime-core --test acceptance`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use deltaprime::asymptotics::{count_tolerance, predicted_count};
use deltaprime::forms::{self, ExpProfile, TrialState};
use deltaprime::hermite::{self, OscLevel};
use deltaprime::jacobi;
use deltaprime::quadrature::simpson_nodes;
use deltaprime::solver::{
    self, discrete_spectrum, CouplingParams, Eigenfunction, SolverOptions, SpectralResult, CRITICAL_BETA,
};
use deltaprime::{par, Execution, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_611;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { passed, detail })
}

fn spectrum(beta: f64) -> Result<SpectralResult> {
    discrete_spectrum(&CouplingParams::new(beta)?, &SolverOptions::default())
}

fn spectra(betas: &[f64]) -> Result<Vec<SpectralResult>> {
    par::map(Execution::default(), betas, |&b| spectrum(b)).into_iter().collect()
}

fn weak_coupling_law() -> Result<Outcome> {
    let betas = [8.0, 12.0, 16.0, 24.0];
    let scaled: Vec<f64> = spectra(&betas)?
        .iter()
        .map(|r| r.params.beta.powi(4) * (0.5 - r.eigenvalues[0].lambda))
        .collect();
    let in_band = scaled.iter().all(|s| (3.5..=4.5).contains(s));
    let dev: Vec<f64> = scaled.iter().map(|s| (s - 4.0).abs()).collect();
    let monotone = dev.windows(2).all(|w| w[1] < w[0]);
    outcome(in_band && monotone, format!("beta^4 (1/2 - Lambda_1) = {scaled:.4?}"))
}

fn uniqueness_at_large_beta() -> Result<Outcome> {
    let counts: Vec<usize> = spectra(&[16.0, 24.0, 48.0])?.iter().map(SpectralResult::count).collect();
    outcome(counts.iter().all(|&c| c == 1), format!("counts at beta = 16, 24, 48: {counts:?}"))
}

fn nonempty_and_confined() -> Result<Outcome> {
    let (lo, hi) = ((CRITICAL_BETA * 1.001).ln(), 100f64.ln());
    let betas: Vec<f64> = (1..=20).map(|i| (lo + (hi - lo) * i as f64 / 21.0).exp()).collect();
    let rs = spectra(&betas)?;
    let bad: Vec<f64> = rs
        .iter()
        .filter(|r| r.count() == 0 || r.lambdas().iter().any(|&l| !(l > 0.0 && l < 0.5)))
        .map(|r| r.params.beta)
        .collect();
    let counts: Vec<usize> = rs.iter().map(SpectralResult::count).collect();
    outcome(bad.is_empty(), format!("counts {counts:?}; offending beta {bad:?}"))
}

fn counting_equivalence() -> Result<Outcome> {
    let betas = [2.835, 2.9, 4.0, 6.0, 10.0];
    let epss = [0.4, 0.2, 0.05, 0.01];
    let rs = spectra(&betas)?;
    let mut pairs = Vec::new();
    let mut mismatches = 0;
    for r in &rs {
        for &eps in &epss {
            let c = solver::cross_check_with(r, eps, 1e-10)?;
            if !c.agrees() {
                mismatches += 1;
            }
            pairs.push((c.count_secular, c.count_jacobi));
        }
    }
    outcome(mismatches == 0, format!("{mismatches} mismatches over 20 cases; (secular, sturm) = {pairs:?}"))
}

fn accumulation_law() -> Result<Outcome> {
    let offsets = [1e-2, 3e-3, 1e-3, 3e-4];
    let params = offsets
        .iter()
        .map(|d| CouplingParams::from_mu(1.0 + d))
        .collect::<Result<Vec<_>>>()?;
    let rs: Vec<SpectralResult> = params
        .iter()
        .map(|p| discrete_spectrum(p, &SolverOptions::default()))
        .collect::<Result<_>>()?;
    let mut ok = true;
    let mut rows = Vec::new();
    let mut prev_dev: Option<f64> = None;
    for (p, r) in params.iter().zip(&rs) {
        let pred = predicted_count(p)?;
        let count = r.count() as f64;
        ok &= (count - pred).abs() <= count_tolerance(pred);
        let dev = (count / pred - 1.0).abs();
        if let Some(prev) = prev_dev {
            ok &= dev <= prev + 1.0 / pred;
        }
        prev_dev = Some(dev);
        ok &= r.count_consistent;
        rows.push(format!("{}:{:.2}", r.count(), pred));
    }
    outcome(ok, format!("computed:predicted = {}", rows.join(", ")))
}

fn j0_sandwich() -> Result<Outcome> {
    let betas = [2.83, 2.85, 2.9, 3.0, 3.5, 4.0, 5.0, 8.0, 12.0, 20.0];
    let rs = spectra(&betas)?;
    let mut ok = true;
    let mut rows = Vec::new();
    for r in &rs {
        let (j0, _) = solver::stabilized_j0_count(r.params.mu)?;
        ok &= r.count() == j0 || r.count() == j0 + 1;
        rows.push((r.count(), j0));
    }
    outcome(ok, format!("(total, N+(mu, J0)) = {rows:?}"))
}

fn j0_eigenvalue_asymptotics() -> Result<Outcome> {
    let m = jacobi::build_j0(20_000)?;
    let ev = jacobi::eigenvalues_above(&m, 1.0, 12)?;
    if ev.len() < 12 {
        return outcome(false, format!("only {} eigenvalues above 1", ev.len()));
    }
    let scaled: Vec<f64> = (5..=12).map(|k| (k * k) as f64 * (ev[k - 1] - 1.0)).collect();
    let ok = scaled.iter().all(|s| (0.75 / 32.0..=1.25 / 32.0).contains(s));
    let times32: Vec<f64> = scaled.iter().map(|s| 32.0 * s).collect();
    outcome(ok, format!("32 k^2 (lambda_k - 1), k = 5..12: {times32:.4?}"))
}

fn form_bound() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for beta in [CRITICAL_BETA, 3.0, 5.0] {
        let p = CouplingParams::new(beta)?;
        for _ in 0..1000 {
            let r = forms::bound_check(&forms::random_state(&mut rng), &p);
            if !r.holds() {
                violations += 1;
            }
            worst = worst.min(r.b_margin / r.a0);
        }
    }
    outcome(violations == 0, format!("{violations} violations in 3000 states; min (2√2 a0 - |b|)/a0 = {worst:.3e}"))
}

fn trace_bound_sharpness() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut eq_err = 0.0f64;
    for _ in 0..100 {
        let (l, r) = forms::trace_bound_extremal(10f64.powf(rng.gen_range(-2.0..2.0)))?;
        eq_err = eq_err.max((l - 1.0).abs()).max((r - 1.0).abs());
    }
    let mut non_strict = 0;
    for _ in 0..1000 {
        let p = forms::random_profile(&mut rng);
        let (l, r) = p.trace_bound_sides(10f64.powf(rng.gen_range(-1.0..1.0)));
        if !(l < r) {
            non_strict += 1;
        }
    }
    outcome(
        eq_err <= 1e-12 && non_strict == 0,
        format!("equality error {eq_err:.2e}; {non_strict} non-strict of 1000"),
    )
}

fn hermite_identity() -> Result<Outcome> {
    let mut worst = 0.0f64;
    for n in 1..=50 {
        for i in 0..50 {
            let y = -10.0 + 20.0 * i as f64 / 49.0;
            let r = hermite::hermite_recurrence_residual(OscLevel(n), y)?;
            worst = worst.max(r.abs());
        }
    }
    let nodes = simpson_nodes(-12.0, 12.0, 6001);
    let chi = nodes.iter().map(|&(y, _)| hermite::hermite_values(12, y)).collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut b_err = 0.0f64;
    for _ in 0..50 {
        let len = rng.gen_range(1..=6usize);
        let start = rng.gen_range(0..=6usize);
        let state = TrialState::from_terms(
            (start..start + len).map(|n| (n, forms::random_profile(&mut rng))).collect::<Vec<(usize, ExpProfile)>>(),
        )?;
        let jumps = state.jumps();
        let quad: f64 = nodes
            .iter()
            .zip(&chi)
            .map(|(&(y, w), c)| {
                let d: f64 = jumps.iter().zip(c).map(|(j, c)| j * c).sum();
                w * y * d * d
            })
            .sum();
        b_err = b_err.max((forms::b_form(&state) - quad).abs());
    }
    outcome(
        worst <= 1e-10 && b_err <= 1e-6,
        format!("max recurrence residual {worst:.2e}; max |b - quadrature| {b_err:.2e}"),
    )
}

fn supercritical_collapse() -> Result<Outcome> {
    let mut ok = true;
    let mut rows = Vec::new();
    for mu in [0.5, 0.9] {
        let p = CouplingParams::from_mu(mu)?;
        let q = [50, 200, 800, 3200]
            .iter()
            .map(|&n0| forms::subcritical_collapse(&p, 0.1, n0, 32))
            .collect::<Result<Vec<_>>>()?;
        ok &= q.windows(2).all(|w| w[1] < w[0]) && q[3] < -100.0;
        rows.push(format!("mu={mu}: {q:.2?}"));
    }
    outcome(ok, rows.join("; "))
}

fn weak_coupling_witness() -> Result<Outcome> {
    let mut worst = 0.0f64;
    for beta in [3.0, 10.0, 50.0] {
        let (_, gap) = forms::weak_coupling_witness(&CouplingParams::new(beta)?)?;
        worst = worst.max((gap + 0.25).abs());
    }
    outcome(worst <= 1e-12, format!("max |gap + 1/4| = {worst:.2e}"))
}

fn eigenfunction_matching() -> Result<Outcome> {
    let r = spectrum(10.0)?;
    let cv = solver::eigenvector(&r.params, &r.eigenvalues[0])?;
    let ef = Eigenfunction::from_coefficients(&cv)?;
    let grid: Vec<f64> = (0..201).map(|i| -5.0 + 0.05 * i as f64).collect();
    let field = ef.sample(&grid, &grid, Execution::default())?;
    let m = solver::matching_check(&ef, &grid, 1e-4)?;
    let ok = m.samples > 100
        && m.jump_ratio_error <= 1e-4
        && m.derivative_mismatch <= 1e-6
        && m.derivative_fd_error <= 1e-6
        && field.len() == 201 * 201
        && field.antisymmetry_defect() <= 1e-12 * field.max_abs();
    outcome(
        ok,
        format!(
            "{} points; jump ratio err {:.2e}; derivative mismatch {:.2e}; series vs difference {:.2e}; {} y-samples",
            field.len(),
            m.jump_ratio_error,
            m.derivative_mismatch,
            m.derivative_fd_error,
            m.samples
        ),
    )
}

type Criterion = (&'static str, u64, fn() -> Result<Outcome>);

const CRITERIA: &[Criterion] = &[
    ("weak-coupling law beta^4 (1/2 - Lambda_1) -> 4", 10, weak_coupling_law),
    ("single eigenvalue at large beta", 10, uniqueness_at_large_beta),
    ("spectrum nonempty and inside (0, 1/2)", 120, nonempty_and_confined),
    ("secular count equals Sturm count of J(eps)", 120, counting_equivalence),
    ("eigenvalue accumulation near critical coupling", 600, accumulation_law),
    ("total count is N+(mu, J0) or N+(mu, J0) + 1", 120, j0_sandwich),
    ("J0 eigenvalues 1 + 1/(32 k^2)", 60, j0_eigenvalue_asymptotics),
    ("form lower bound on random states", 10, form_bound),
    ("trace inequality sharp and strict", 5, trace_bound_sharpness),
    ("Hermite recurrence and b-form quadrature", 30, hermite_identity),
    ("Rayleigh quotients unbounded below for mu < 1", 10, supercritical_collapse),
    ("weak-coupling variational gap -1/4", 1, weak_coupling_witness),
    ("eigenfunction interface conditions", 30, eigenfunction_matching),
];

fn main() -> ExitCode {
    let mut failures = 0;
    for (i, (name, limit, run)) in CRITERIA.iter().enumerate() {
        let start = Instant::now();
        let res = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(*limit);
        let (passed, detail) = match res {
            Ok(o) => (o.passed && in_time, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failures += 1;
        }
        println!(
            "[{}] criterion {:>2}: {name} ({:.2}s, limit {limit}s{}) {detail}",
            if passed { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64(),
            if in_time { "" } else { ", over time" },
        );
    }
    println!("{} of {} criteria passed", CRITERIA.len() - failures, CRITERIA.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
