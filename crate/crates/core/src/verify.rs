//! Invariant suite run by `deltaprime verify`.
//!
//! Every check reports a margin: the distance to its pass/fail boundary,
//! non-negative iff the check passed. Random inputs come from a ChaCha stream
//! keyed on the user seed and the check name, so results do not depend on
//! which checks run or in what order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::forms::{self, ExpProfile, TrialState};
use crate::hermite::{self, OscLevel};
use crate::jacobi::{self, Tridiagonal};
use crate::par::{self, Execution};
use crate::quadrature::simpson_nodes;
use crate::solver::{self, CouplingParams, SolverOptions, CRITICAL_BETA};

#[derive(Clone, Copy, Debug)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Constant in `|b| ≤ κ·a₀`; anything but `2√2` is a negative control.
    pub bound_constant: f64,
    pub exec: Execution,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 0,
            bound_constant: CRITICAL_BETA,
            exec: Execution::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckEntry {
    pub name: &'static str,
    pub passed: bool,
    pub margin: f64,
    /// Present for checks that draw random inputs.
    pub seed: Option<u64>,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub seed: u64,
    pub all_passed: bool,
    pub entries: Vec<CheckEntry>,
}

type Check = fn(&VerifyConfig) -> CheckEntry;

const CHECKS: &[Check] = &[
    hermite_recurrence,
    hermite_orthonormality,
    hermite_parity,
    cross_term_random,
    trace_bound_equality,
    trace_bound_strict,
    b_form_quadrature_check,
    bound_sweep,
    bound_adversarial,
    witness_gap,
    supercritical_collapse,
    psi_tilde_identity,
    jacobi_brute_force,
    j0_asymptotics,
    counting_equivalence,
    weak_coupling_eigenvalue,
    j0_sandwich,
    eigenvalue_floor,
    field_matching,
    form_stationarity,
];

pub fn run_verification(cfg: &VerifyConfig) -> VerificationReport {
    let entries = par::map(cfg.exec, CHECKS, |check| check(cfg));
    VerificationReport {
        seed: cfg.seed,
        all_passed: entries.iter().all(|e| e.passed),
        entries,
    }
}

fn rng_for(cfg: &VerifyConfig, name: &str) -> ChaCha8Rng {
    let salt = name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3));
    ChaCha8Rng::seed_from_u64(cfg.seed ^ salt)
}

fn entry(name: &'static str, margin: f64, seed: Option<u64>, detail: String) -> CheckEntry {
    CheckEntry {
        name,
        passed: margin >= 0.0 && margin.is_finite(),
        margin,
        seed,
        detail,
    }
}

/// Zero when nothing went wrong, minus the number of failures otherwise.
fn count_margin(bad: usize) -> f64 {
    if bad == 0 {
        0.0
    } else {
        -(bad as f64)
    }
}

fn failed(name: &'static str, err: impl std::fmt::Display) -> CheckEntry {
    CheckEntry {
        name,
        passed: false,
        margin: f64::NEG_INFINITY,
        seed: None,
        detail: err.to_string(),
    }
}

macro_rules! try_check {
    ($name:expr, $e:expr) => {
        match $e {
            Ok(v) => v,
            Err(err) => return failed($name, err),
        }
    };
}

/// `∫ y |Σ [ψₙ] χₙ(y)|² dy` by Simpson quadrature on `[−12, 12]`.
pub fn b_form_quadrature(state: &TrialState) -> Result<f64> {
    let jumps = state.jumps();
    let top = jumps.len() - 1;
    let mut acc = 0.0;
    for (y, w) in simpson_nodes(-12.0, 12.0, 6001) {
        let chi = hermite::hermite_values(top, y)?;
        let d: f64 = jumps.iter().zip(&chi).map(|(j, c)| j * c).sum();
        acc += w * y * d * d;
    }
    Ok(acc)
}

fn hermite_recurrence(_: &VerifyConfig) -> CheckEntry {
    let name = "hermite.recurrence_grid";
    let mut worst = 0.0f64;
    for n in 1..=50 {
        for i in 0..50 {
            let y = -10.0 + 20.0 * i as f64 / 49.0;
            let r = try_check!(name, hermite::hermite_recurrence_residual(OscLevel(n), y));
            let chi = try_check!(name, hermite::hermite_value(OscLevel(n), y));
            worst = worst.max(r.abs() / chi.abs().max(1.0));
        }
    }
    entry(name, 1e-10 - worst, None, format!("max scaled residual {worst:e} over 50x50 (n, y)"))
}

fn hermite_orthonormality(_: &VerifyConfig) -> CheckEntry {
    let name = "hermite.orthonormality";
    let nodes = simpson_nodes(-12.0, 12.0, 4001);
    let table = try_check!(
        name,
        nodes.iter().map(|&(y, _)| hermite::hermite_values(30, y)).collect::<Result<Vec<_>>>()
    );
    let mut worst = 0.0f64;
    for m in 0..=30 {
        for n in m..=30 {
            let s: f64 = nodes.iter().zip(&table).map(|(&(_, w), v)| w * v[m] * v[n]).sum();
            worst = worst.max((s - if m == n { 1.0 } else { 0.0 }).abs());
        }
    }
    entry(name, 1e-8 - worst, None, format!("max |<chi_m, chi_n> - delta| = {worst:e}, m, n <= 30"))
}

fn hermite_parity(cfg: &VerifyConfig) -> CheckEntry {
    let name = "hermite.parity";
    let mut rng = rng_for(cfg, name);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let n = rng.gen_range(0..=200usize);
        let y = rng.gen_range(-10.0..10.0);
        let a = try_check!(name, hermite::hermite_value(OscLevel(n), y));
        let b = try_check!(name, hermite::hermite_value(OscLevel(n), -y));
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        worst = worst.max((b - sign * a).abs() / a.abs().max(1e-300));
    }
    entry(name, 1e-14 - worst, Some(cfg.seed), format!("max relative parity defect {worst:e}"))
}

fn cross_term_random(cfg: &VerifyConfig) -> CheckEntry {
    let name = "forms.cross_term";
    let mut rng = rng_for(cfg, name);
    let mut worst = f64::INFINITY;
    for _ in 0..1000 {
        let mut c = || (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        let (a, b) = (c(), c());
        worst = worst.min(forms::cross_term_margin(a, b));
    }
    entry(name, worst + 1e-12, Some(cfg.seed), format!("min |c|^2+|d|^2-2|Re(c*d)| = {worst:e}"))
}

fn trace_bound_equality(cfg: &VerifyConfig) -> CheckEntry {
    let name = "forms.trace_bound_equality";
    let mut rng = rng_for(cfg, name);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let gamma = 10f64.powf(rng.gen_range(-2.0..2.0));
        let (l, r) = try_check!(name, forms::trace_bound_extremal(gamma));
        worst = worst.max((l - 1.0).abs()).max((r - 1.0).abs());
    }
    entry(name, 1e-12 - worst, Some(cfg.seed), format!("max deviation from 1: {worst:e}"))
}

fn trace_bound_strict(cfg: &VerifyConfig) -> CheckEntry {
    let name = "forms.trace_bound_strict";
    let mut rng = rng_for(cfg, name);
    let mut worst = f64::INFINITY;
    for _ in 0..1000 {
        let p = forms::random_profile(&mut rng);
        let gamma = 10f64.powf(rng.gen_range(-1.0..1.0));
        let (l, r) = p.trace_bound_sides(gamma);
        worst = worst.min((r - l) / r);
    }
    // Strict: a zero gap would mean an extremal profile was drawn.
    let margin = if worst > 0.0 { worst } else { worst - f64::MIN_POSITIVE };
    entry(name, margin, Some(cfg.seed), format!("min relative gap {worst:e}"))
}

fn b_form_quadrature_check(cfg: &VerifyConfig) -> CheckEntry {
    let name = "forms.b_quadrature";
    let mut rng = rng_for(cfg, name);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let len = rng.gen_range(1..=6usize);
        let start = rng.gen_range(0..=6usize);
        let terms: Vec<(usize, ExpProfile)> = (start..start + len).map(|n| (n, forms::random_profile(&mut rng))).collect();
        let Ok(state) = TrialState::from_terms(terms) else { continue };
        let quad = try_check!(name, b_form_quadrature(&state));
        worst = worst.max((forms::b_form(&state) - quad).abs());
    }
    entry(name, 1e-6 - worst, Some(cfg.seed), format!("max |b - quadrature| = {worst:e} on 50 states"))
}

fn bound_sweep(cfg: &VerifyConfig) -> CheckEntry {
    let name = "forms.bound_sweep";
    let mut rng = rng_for(cfg, name);
    let mut worst = f64::INFINITY;
    let mut violations = 0;
    for beta in [CRITICAL_BETA, 3.0, 5.0] {
        let params = try_check!(name, CouplingParams::new(beta));
        for _ in 0..1000 {
            let s = forms::random_state(&mut rng);
            let r = forms::bound_check_with(&s, &params, cfg.bound_constant);
            if !r.holds() {
                violations += 1;
            }
            worst = worst.min(r.b_margin / r.a0);
            if let Some(m) = r.form_margin {
                worst = worst.min(m / r.norm_sq);
            }
        }
    }
    entry(name, worst, Some(cfg.seed), format!("{violations} violations in 3000 states, min scaled margin {worst:e}"))
}

fn bound_adversarial(cfg: &VerifyConfig) -> CheckEntry {
    let name = "forms.bound_adversarial";
    let params = try_check!(name, CouplingParams::new(3.0));
    let state = try_check!(name, forms::psi_tilde_state(0.5 - 1e-9, &forms::alternating_window(50, 32)));
    let r = forms::bound_check_with(&state, &params, cfg.bound_constant);
    entry(name, r.b_margin / r.a0, None, format!("|b|/a0 = {:.6} on an alternating extremal window", r.b.abs() / r.a0))
}

fn witness_gap(_: &VerifyConfig) -> CheckEntry {
    let name = "forms.witness_gap";
    let mut worst = 0.0f64;
    for beta in [3.0, 10.0, 50.0] {
        let p = try_check!(name, CouplingParams::new(beta));
        let (_, gap) = try_check!(name, forms::weak_coupling_witness(&p));
        worst = worst.max((gap + 0.25).abs());
    }
    entry(name, 1e-12 - worst, None, format!("max |gap + 1/4| = {worst:e}"))
}

fn supercritical_collapse(_: &VerifyConfig) -> CheckEntry {
    let name = "forms.supercritical_collapse";
    let mut margin = f64::INFINITY;
    let mut detail = String::new();
    for mu in [0.5, 0.9] {
        let p = try_check!(name, CouplingParams::from_mu(mu));
        let q = try_check!(
            name,
            [50, 200, 800, 3200]
                .iter()
                .map(|&n0| forms::subcritical_collapse(&p, 0.1, n0, 32))
                .collect::<Result<Vec<_>>>()
        );
        for w in q.windows(2) {
            margin = margin.min(w[0] - w[1]);
        }
        margin = margin.min(-100.0 - q[3]);
        detail.push_str(&format!("mu={mu}: {q:.3?}; "));
    }
    entry(name, margin, None, detail)
}

fn psi_tilde_identity(_: &VerifyConfig) -> CheckEntry {
    let name = "forms.psi_tilde_identity";
    let mut worst = 0.0f64;
    for (mu, eps, n0) in [(1.3, 0.2, 1), (0.7, 0.05, 40), (2.0, 0.45, 0), (0.9, 0.1, 800)] {
        let p = try_check!(name, CouplingParams::from_mu(mu));
        let (l, r) = try_check!(name, forms::psi_tilde_identity(&p, eps, &forms::alternating_window(n0, 32)));
        worst = worst.max((l - r).abs() / r.abs().max(1.0));
    }
    entry(name, 1e-10 - worst, None, format!("max relative mismatch {worst:e}"))
}

fn jacobi_brute_force(cfg: &VerifyConfig) -> CheckEntry {
    let name = "jacobi.brute_force";
    let mut rng = rng_for(cfg, name);
    let mut count_errors = 0usize;
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let n = rng.gen_range(1..=12usize);
        let d = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let e = (1..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let m = try_check!(name, Tridiagonal::new(d, e));
        let t = rng.gen_range(-4.0..4.0);
        let mut ev: Vec<f64> = m.to_dense().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
        if ev.iter().any(|l| (l - t).abs() < 1e-9) {
            continue;
        }
        let r = try_check!(name, jacobi::count_above(&m, t));
        if r.count_above != ev.iter().filter(|&&l| l > t).count() || r.count_above + r.count_below != n {
            count_errors += 1;
        }
        let got = try_check!(name, jacobi::eigenvalues_above(&m, t, n));
        for (g, e) in got.iter().zip(ev.iter().filter(|&&l| l > t)) {
            worst = worst.max((g - e).abs());
        }
    }
    let margin = if count_errors > 0 { count_margin(count_errors) } else { 1e-10 - worst };
    entry(name, margin, Some(cfg.seed), format!("{count_errors} count mismatches, max eigenvalue error {worst:e}"))
}

fn j0_asymptotics(cfg: &VerifyConfig) -> CheckEntry {
    let name = "jacobi.j0_asymptotics";
    let m = try_check!(name, jacobi::build_j0(20_000));
    let ev = try_check!(name, jacobi::eigenvalues_above_with(&m, 1.0, 12, cfg.exec));
    if ev.len() < 12 {
        return failed(name, format!("only {} eigenvalues above 1", ev.len()));
    }
    let scaled: Vec<f64> = (5..=12).map(|k| 32.0 * (k * k) as f64 * (ev[k - 1] - 1.0)).collect();
    let margin = scaled.iter().map(|s| 0.25 - (s - 1.0).abs()).fold(f64::INFINITY, f64::min);
    entry(name, margin, None, format!("32 k^2 (lambda_k - 1), k = 5..12: {scaled:.4?}"))
}

fn spectrum(beta: f64, exec: Execution) -> Result<solver::SpectralResult> {
    let p = CouplingParams::new(beta)?;
    solver::discrete_spectrum(&p, &SolverOptions { exec, ..Default::default() })
}

fn counting_equivalence(cfg: &VerifyConfig) -> CheckEntry {
    let name = "solver.counting_equivalence";
    let mut mismatches = 0;
    let mut cases = 0;
    for beta in [2.9, 4.0, 10.0] {
        let r = try_check!(name, spectrum(beta, cfg.exec));
        for eps in [0.3, 0.1, 0.01] {
            let c = try_check!(name, solver::cross_check_with(&r, eps, 1e-10));
            cases += 1;
            if !c.agrees() {
                mismatches += 1;
            }
        }
    }
    entry(name, count_margin(mismatches), None, format!("{mismatches} mismatches in {cases} (beta, eps) cases"))
}

fn weak_coupling_eigenvalue(cfg: &VerifyConfig) -> CheckEntry {
    let name = "solver.weak_coupling";
    let r = try_check!(name, spectrum(10.0, cfg.exec));
    if r.count() != 1 {
        return failed(name, format!("expected one eigenvalue at beta = 10, found {}", r.count()));
    }
    let l = r.eigenvalues[0].lambda;
    entry(name, 5e-5 - (l - 0.4996).abs(), None, format!("Lambda_1 = {l:.12}"))
}

fn j0_sandwich(cfg: &VerifyConfig) -> CheckEntry {
    let name = "solver.j0_sandwich";
    let mut bad = 0;
    let mut detail = String::new();
    for beta in [2.85, 3.0, 4.0, 10.0] {
        let r = try_check!(name, spectrum(beta, cfg.exec));
        let (j0, _) = try_check!(name, solver::stabilized_j0_count(r.params.mu));
        if !(r.count() == j0 || r.count() == j0 + 1) {
            bad += 1;
        }
        detail.push_str(&format!("beta={beta}: {} vs {j0}; ", r.count()));
    }
    entry(name, count_margin(bad), None, detail)
}

fn eigenvalue_floor(cfg: &VerifyConfig) -> CheckEntry {
    let name = "solver.eigenvalue_floor";
    let mut margin = f64::INFINITY;
    for beta in [2.9, 3.5, 6.0, 20.0] {
        let r = try_check!(name, spectrum(beta, cfg.exec));
        let floor = 0.5 * (1.0 - 1.0 / r.params.mu);
        for l in r.lambdas() {
            margin = margin.min(l - floor).min(0.5 - l);
        }
    }
    entry(name, margin, None, format!("min distance to (floor, 1/2) = {margin:e}"))
}

fn field_matching(cfg: &VerifyConfig) -> CheckEntry {
    let name = "solver.field_matching";
    let p = try_check!(name, CouplingParams::new(10.0));
    let r = try_check!(name, spectrum(10.0, cfg.exec));
    let Some(est) = r.eigenvalues.first() else {
        return failed(name, "no eigenvalue at beta = 10");
    };
    let cv = try_check!(name, solver::eigenvector(&p, est));
    let ef = try_check!(name, solver::Eigenfunction::from_coefficients(&cv));
    let ys: Vec<f64> = (-40..=40).map(|i| i as f64 * 0.125).collect();
    let rep = try_check!(name, solver::matching_check(&ef, &ys, 1e-4));
    let margin = (1e-4 - rep.jump_ratio_error).min(1e-6 - rep.derivative_mismatch);
    entry(
        name,
        margin,
        None,
        format!("jump ratio error {:e}, derivative mismatch {:e}", rep.jump_ratio_error, rep.derivative_mismatch),
    )
}

fn form_stationarity(cfg: &VerifyConfig) -> CheckEntry {
    let name = "solver.form_stationarity";
    let mut worst = 0.0f64;
    for beta in [2.84, 4.0, 10.0] {
        let r = try_check!(name, spectrum(beta, cfg.exec));
        for est in &r.eigenvalues {
            let cv = try_check!(name, solver::eigenvector(&r.params, est));
            let terms = cv
                .q
                .iter()
                .enumerate()
                .filter(|(_, q)| q.abs() > 1e-300)
                .map(|(n, &q)| Ok((n, ExpProfile::odd(q, (n as f64 + 0.5 - est.lambda).sqrt())?)))
                .collect::<Result<Vec<_>>>();
            let state = try_check!(name, terms.and_then(TrialState::from_terms));
            let rel = forms::shifted_form(&state, &r.params, est.lambda) / state.norm_sq();
            worst = worst.max(rel.abs());
        }
    }
    entry(name, 1e-8 - worst, None, format!("max |a_beta - Lambda ||Psi||^2| / ||Psi||^2 = {worst:e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_run_passes() {
        let rep = run_verification(&VerifyConfig::default());
        for e in &rep.entries {
            assert!(e.passed, "{}: {}", e.name, e.detail);
        }
        assert!(rep.all_passed);
    }

    #[test]
    fn flipped_constant_fails_bound() {
        let rep = run_verification(&VerifyConfig {
            bound_constant: 2.0,
            ..Default::default()
        });
        let adv = rep.entries.iter().find(|e| e.name == "forms.bound_adversarial").unwrap();
        assert!(!adv.passed);
        assert!(!rep.all_passed);
    }

    #[test]
    fn seed_does_not_change_outcome() {
        let a = run_verification(&VerifyConfig { seed: 7, ..Default::default() });
        let b = run_verification(&VerifyConfig { seed: 7, ..Default::default() });
        let pa: Vec<_> = a.entries.iter().map(|e| (e.name, e.passed, e.margin)).collect();
        let pb: Vec<_> = b.entries.iter().map(|e| (e.name, e.passed, e.margin)).collect();
        assert_eq!(pa, pb);
        assert!(a.all_passed);
    }
}
