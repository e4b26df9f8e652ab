//! Quadratic forms on trial states `Ψ = Σ ψₙ(x) χₙ(y)` whose coefficient
//! functions are single exponentials on each halfline.
//!
//! For such states every integral is elementary:
//!
//! ```text
//! a₀[Ψ] = Σₙ ∫ |ψₙ'|² + (n + 1/2)|ψₙ|² dx
//! b[Ψ]  = √2 Σ_{n≥1} √n · [ψₙ]·[ψₙ₋₁]          ([ψ] = ψ(0+) − ψ(0−))
//! a_β   = a₀ + b/β
//! ```

use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jacobi;
use crate::solver::{CouplingParams, Regime, CRITICAL_BETA};

/// `ψ(x) = amp_plus·e^{−rate_plus·x}` for `x > 0`, `amp_minus·e^{rate_minus·x}` for `x < 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExpProfile {
    pub amp_plus: f64,
    pub amp_minus: f64,
    pub rate_plus: f64,
    pub rate_minus: f64,
}

impl ExpProfile {
    pub fn new(amp_plus: f64, amp_minus: f64, rate_plus: f64, rate_minus: f64) -> Result<Self> {
        if !(amp_plus.is_finite() && amp_minus.is_finite()) {
            return Err(Error::input("profile amplitudes must be finite"));
        }
        if !(rate_plus > 0.0 && rate_minus > 0.0 && rate_plus.is_finite() && rate_minus.is_finite()) {
            return Err(Error::input(format!(
                "profile rates must be positive and finite, got {rate_plus}, {rate_minus}"
            )));
        }
        Ok(ExpProfile {
            amp_plus,
            amp_minus,
            rate_plus,
            rate_minus,
        })
    }

    /// `ψ̃_γ(x) = sgn(x)/√(2γ) · e^{−γ|x|}`, the extremal profile at rate `γ`.
    pub fn extremal(gamma: f64) -> Result<Self> {
        let a = 1.0 / (2.0 * gamma).sqrt();
        Self::new(a, -a, gamma, gamma)
    }

    /// `c · sgn(x) e^{−rate·|x|}`.
    pub fn odd(c: f64, rate: f64) -> Result<Self> {
        Self::new(c, -c, rate, rate)
    }

    pub fn scaled(&self, c: f64) -> Self {
        ExpProfile {
            amp_plus: c * self.amp_plus,
            amp_minus: c * self.amp_minus,
            ..*self
        }
    }

    pub fn jump(&self) -> f64 {
        self.amp_plus - self.amp_minus
    }

    pub fn is_zero(&self) -> bool {
        self.amp_plus == 0.0 && self.amp_minus == 0.0
    }

    pub fn value(&self, x: f64) -> f64 {
        if x > 0.0 {
            self.amp_plus * (-self.rate_plus * x).exp()
        } else if x < 0.0 {
            self.amp_minus * (self.rate_minus * x).exp()
        } else {
            0.5 * (self.amp_plus + self.amp_minus)
        }
    }

    /// `∫|ψ|²`.
    pub fn norm_sq(&self) -> f64 {
        self.amp_plus.powi(2) / (2.0 * self.rate_plus) + self.amp_minus.powi(2) / (2.0 * self.rate_minus)
    }

    /// `∫|ψ'|² + weight·|ψ|²`.
    pub fn energy(&self, weight: f64) -> f64 {
        let side = |a: f64, r: f64| a * a * (0.5 * r + weight / (2.0 * r));
        side(self.amp_plus, self.rate_plus) + side(self.amp_minus, self.rate_minus)
    }

    /// `(γ(|ψ(0+)|² + |ψ(0−)|²), ∫|ψ'|² + γ²|ψ|²)`; the first never exceeds the second.
    pub fn trace_bound_sides(&self, gamma: f64) -> (f64, f64) {
        let lhs = gamma * (self.amp_plus.powi(2) + self.amp_minus.powi(2));
        (lhs, self.energy(gamma * gamma))
    }
}

/// Finite oscillator expansion with exponential coefficient functions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialState {
    terms: BTreeMap<usize, ExpProfile>,
}

impl TrialState {
    pub fn new(terms: BTreeMap<usize, ExpProfile>) -> Result<Self> {
        if terms.values().all(ExpProfile::is_zero) {
            return Err(Error::input("trial state needs at least one nonzero term"));
        }
        Ok(TrialState { terms })
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (usize, ExpProfile)>) -> Result<Self> {
        Self::new(terms.into_iter().collect())
    }

    pub fn terms(&self) -> &BTreeMap<usize, ExpProfile> {
        &self.terms
    }

    /// Jumps `[ψₙ]` for `n = 0..=max level`, zero for absent levels.
    pub fn jumps(&self) -> Vec<f64> {
        let top = self.terms.keys().next_back().copied().unwrap_or(0);
        let mut j = vec![0.0; top + 1];
        for (&n, p) in &self.terms {
            j[n] = p.jump();
        }
        j
    }

    /// `‖Ψ‖² = Σₙ ∫|ψₙ|²`.
    pub fn norm_sq(&self) -> f64 {
        self.terms.values().map(ExpProfile::norm_sq).sum()
    }
}

pub fn a0_form(state: &TrialState) -> f64 {
    state.terms.iter().map(|(&n, p)| p.energy(n as f64 + 0.5)).sum()
}

pub fn b_form(state: &TrialState) -> f64 {
    let j = state.jumps();
    SQRT_2 * (1..j.len()).map(|n| (n as f64).sqrt() * j[n] * j[n - 1]).sum::<f64>()
}

pub fn a_beta_form(state: &TrialState, params: &CouplingParams) -> f64 {
    a0_form(state) + b_form(state) / params.beta
}

/// `a_β[Ψ] − shift·‖Ψ‖²`, with the shift folded into each oscillator weight
/// so that large cancelling terms never appear.
pub fn shifted_form(state: &TrialState, params: &CouplingParams, shift: f64) -> f64 {
    let a: f64 = state.terms.iter().map(|(&n, p)| p.energy(n as f64 + 0.5 - shift)).sum();
    a + b_form(state) / params.beta
}

/// `|c|² + |d|² − 2|Re(c̄d)|` for complex `c = (re, im)`, `d = (re, im)`; never negative.
pub fn cross_term_margin(c: (f64, f64), d: (f64, f64)) -> f64 {
    let re = c.0 * d.0 + c.1 * d.1;
    c.0 * c.0 + c.1 * c.1 + d.0 * d.0 + d.1 * d.1 - 2.0 * re.abs()
}

/// Both sides of the trace inequality on `ψ̃_γ`; equal to 1 for every `γ > 0`.
pub fn trace_bound_extremal(gamma: f64) -> Result<(f64, f64)> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::input(format!("gamma must be positive, got {gamma}")));
    }
    Ok(ExpProfile::extremal(gamma)?.trace_bound_sides(gamma))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub a0: f64,
    pub b: f64,
    pub a_beta: f64,
    pub norm_sq: f64,
    /// `κ·a₀ − |b|` with `κ = 2√2` unless overridden.
    pub b_margin: f64,
    /// `a_β − (1/2)(1 − κ/β)‖Ψ‖²`; `None` when `β < κ`.
    pub form_margin: Option<f64>,
}

impl BoundReport {
    pub fn holds(&self) -> bool {
        self.b_margin >= 0.0 && self.form_margin.is_none_or(|m| m >= 0.0)
    }
}

pub fn bound_check(state: &TrialState, params: &CouplingParams) -> BoundReport {
    bound_check_with(state, params, CRITICAL_BETA)
}

/// [`bound_check`] with the constant `2√2` replaced by `critical`.
pub fn bound_check_with(state: &TrialState, params: &CouplingParams, critical: f64) -> BoundReport {
    let a0 = a0_form(state);
    let b = b_form(state);
    let a_beta = a0 + b / params.beta;
    let norm_sq = state.norm_sq();
    BoundReport {
        a0,
        b,
        a_beta,
        norm_sq,
        b_margin: critical * a0 - b.abs(),
        form_margin: (params.beta >= critical).then(|| a_beta - 0.5 * (1.0 - critical / params.beta) * norm_sq),
    }
}

/// Two-level state with `a_β − (1/2)‖Ψ‖² = −1/4` for every `β > 0`:
/// `ψ₀ = −(C/2) sgn(x) e^{−ε|x|}`, `ψ₁ = (1/2) sgn(x) e^{−|x|}`, `C = β/√2`, `ε = 2/β²`.
pub fn weak_coupling_witness(params: &CouplingParams) -> Result<(TrialState, f64)> {
    let beta = params.beta;
    let c = beta / SQRT_2;
    let eps = 2.0 / (beta * beta);
    let state = TrialState::from_terms([(0, ExpProfile::odd(-0.5 * c, eps)?), (1, ExpProfile::odd(0.5, 1.0)?)])?;
    let gap = shifted_form(&state, params, 0.5);
    Ok((state, gap))
}

/// State `Σ gₙ ψ̃_{√(n+ε)}(x) χₙ(y)` in the extremal subspace.
pub fn psi_tilde_state(eps: f64, coeffs: &[(usize, f64)]) -> Result<TrialState> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::domain(format!("eps must lie in (0, 1/2), got {eps}")));
    }
    let terms = coeffs
        .iter()
        .map(|&(n, g)| Ok((n, ExpProfile::extremal((n as f64 + eps).sqrt())?.scaled(g))))
        .collect::<Result<BTreeMap<_, _>>>()?;
    TrialState::new(terms)
}

/// `gₙ = (−1)ⁿ sin(π(n − n₀)/W)` for `n ∈ [n₀, n₀ + W]`.
pub fn alternating_window(n0: usize, width: usize) -> Vec<(usize, f64)> {
    (n0..=n0 + width)
        .map(|n| {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            (n, sign * (PI * (n - n0) as f64 / width as f64).sin())
        })
        .collect()
}

/// `(a_β − (1/2 − ε)‖Ψ‖², ((I + μ⁻¹J(ε))g, g))` for the extremal-subspace state
/// built from `coeffs`; the two agree identically.
pub fn psi_tilde_identity(params: &CouplingParams, eps: f64, coeffs: &[(usize, f64)]) -> Result<(f64, f64)> {
    let state = psi_tilde_state(eps, coeffs)?;
    let lhs = a_beta_form(&state, params) - (0.5 - eps) * state.norm_sq();

    let top = coeffs.iter().map(|c| c.0).max().unwrap_or(0);
    let mut g = vec![0.0; top + 1];
    for &(n, v) in coeffs {
        g[n] += v;
    }
    let j = jacobi::build_j_eps(eps, (top + 1).max(2))?;
    let jgg: f64 = 2.0 * (1..=top).map(|n| j.offdiag()[n - 1] * g[n] * g[n - 1]).sum::<f64>();
    let gg: f64 = g.iter().map(|v| v * v).sum();
    Ok((lhs, gg + jgg / params.mu))
}

/// Rayleigh quotient `a_β/‖Ψ‖²` of an alternating window at levels `n₀..n₀+W`,
/// which for `μ < 1` falls like `2n₀(1 − 1/μ)`.
pub fn subcritical_collapse(params: &CouplingParams, eps: f64, n0: usize, width: usize) -> Result<f64> {
    if params.regime != Regime::Supercritical {
        return Err(Error::Regime {
            beta: params.beta,
            mu: params.mu,
            regime: params.regime,
            reason: "Rayleigh-quotient collapse needs mu < 1",
        });
    }
    if n0 < 1 || width < 8 {
        return Err(Error::input(format!("collapse window needs n0 >= 1 and width >= 8, got {n0}, {width}")));
    }
    let state = psi_tilde_state(eps, &alternating_window(n0, width))?;
    Ok(a_beta_form(&state, params) / state.norm_sq())
}

/// Seeded random trial states: a contiguous block of 1–12 levels inside `0..=12`,
/// rates log-uniform on `[0.1, 10]`, amplitudes uniform on `[−1, 1]`.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R) -> TrialState {
    let len = rng.gen_range(1..=12usize);
    let start = rng.gen_range(0..=12 - len);
    loop {
        let terms: BTreeMap<usize, ExpProfile> =
            (start..start + len).map(|n| (n, random_profile(rng))).collect();
        if let Ok(s) = TrialState::new(terms) {
            return s;
        }
    }
}

pub fn random_profile<R: Rng + ?Sized>(rng: &mut R) -> ExpProfile {
    let mut rate = || 10f64.powf(rng.gen_range(-1.0..=1.0));
    let (rp, rm) = (rate(), rate());
    ExpProfile {
        amp_plus: rng.gen_range(-1.0..=1.0),
        amp_minus: rng.gen_range(-1.0..=1.0),
        rate_plus: rp,
        rate_minus: rm,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::simpson;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// ∫ ψ'² + w ψ² by quadrature of the explicit profile.
    fn quad_energy(p: &ExpProfile, w: f64) -> f64 {
        let side = |a: f64, r: f64| {
            let f = |x: f64| {
                let v = a * (-r * x).exp();
                r * r * v * v + w * v * v
            };
            simpson(f, 0.0, 60.0 / r, 200_000)
        };
        side(p.amp_plus, p.rate_plus) + side(p.amp_minus, p.rate_minus)
    }

    #[test]
    fn a0_ground_level_extremal() {
        let gamma = 0.5f64.sqrt();
        let s = TrialState::from_terms([(0, ExpProfile::extremal(gamma).unwrap())]).unwrap();
        let a0 = a0_form(&s);
        assert!((a0 - 1.0).abs() < 1e-14);
        assert!((a0 - quad_energy(&s.terms()[&0], 0.5)).abs() < 1e-10);
    }

    #[test]
    fn a0_third_level_against_quadrature() {
        let s = TrialState::from_terms([(3, ExpProfile::extremal(2.0).unwrap())]).unwrap();
        let a0 = a0_form(&s);
        assert!((a0 - 0.9375).abs() < 1e-14);
        assert!((a0 - quad_energy(&s.terms()[&3], 3.5)).abs() < 1e-10);
    }

    #[test]
    fn empty_or_zero_state_rejected() {
        assert!(TrialState::new(BTreeMap::new()).is_err());
        assert!(TrialState::from_terms([(0, ExpProfile::new(0.0, 0.0, 1.0, 1.0).unwrap())]).is_err());
        assert!(ExpProfile::new(1.0, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn b_form_examples() {
        let one = ExpProfile::odd(0.5, 1.0).unwrap();
        assert_eq!(b_form(&TrialState::from_terms([(0, one)]).unwrap()), 0.0);

        let c = 3.7;
        let s = TrialState::from_terms([(0, ExpProfile::new(-c / 2.0, c / 2.0, 0.3, 0.3).unwrap()), (1, one)]).unwrap();
        assert!((b_form(&s) + SQRT_2 * c).abs() < 1e-14);

        let s = TrialState::from_terms([(2, one), (3, one)]).unwrap();
        assert!((b_form(&s) - SQRT_2 * 3f64.sqrt()).abs() < 1e-14);
        assert!((b_form(&s) - 2.4495).abs() < 1e-4);
    }

    #[test]
    fn a_beta_limits() {
        let one = ExpProfile::odd(0.5, 1.0).unwrap();
        let s = TrialState::from_terms([(2, one), (3, one)]).unwrap();
        let p = CouplingParams::new(1e9).unwrap();
        assert!((a_beta_form(&s, &p) - a0_form(&s)).abs() <= b_form(&s).abs() / 1e9 + 1e-15);
        let single = TrialState::from_terms([(4, one)]).unwrap();
        assert_eq!(a_beta_form(&single, &CouplingParams::new(3.0).unwrap()), a0_form(&single));
    }

    #[test]
    fn trace_bound_equality() {
        for gamma in [1.0, 0.37, 12.5] {
            let (l, r) = trace_bound_extremal(gamma).unwrap();
            assert!((l - 1.0).abs() < 1e-12 && (r - 1.0).abs() < 1e-12);
        }
        assert!(trace_bound_extremal(0.0).is_err());
    }

    #[test]
    fn witness_gap_is_quarter() {
        for beta in [3.0, 10.0, 50.0] {
            let (_, gap) = weak_coupling_witness(&CouplingParams::new(beta).unwrap()).unwrap();
            assert!((gap + 0.25).abs() < 1e-12, "beta {beta}: {gap}");
        }
    }

    #[test]
    fn shifted_form_matches_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = CouplingParams::new(4.0).unwrap();
        for _ in 0..200 {
            let s = random_state(&mut rng);
            let shift = rng.gen_range(-1.0..1.0);
            let direct = a_beta_form(&s, &p) - shift * s.norm_sq();
            let scale = a0_form(&s) + s.norm_sq();
            assert!((shifted_form(&s, &p, shift) - direct).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn witness_gap_closed_form_at_ten() {
        let c: f64 = 10.0 / SQRT_2;
        let eps = 0.02;
        let closed = c * c * eps / 4.0 + 0.5 - SQRT_2 * c / 10.0;
        assert!((closed + 0.25).abs() < 1e-14);
    }

    #[test]
    fn collapse_examples() {
        let p = CouplingParams::from_mu(0.9).unwrap();
        let q50 = subcritical_collapse(&p, 0.1, 50, 32).unwrap();
        let q3200 = subcritical_collapse(&p, 0.1, 3200, 32).unwrap();
        assert!(q50 < 0.0);
        assert!(q3200 < q50 - 100.0);
        let sub = CouplingParams::from_mu(1.2).unwrap();
        assert!(matches!(subcritical_collapse(&sub, 0.1, 50, 32), Err(Error::Regime { .. })));
        assert!(subcritical_collapse(&p, 0.1, 50, 4).is_err());
    }

    #[test]
    fn psi_tilde_identity_holds() {
        for (mu, eps, n0) in [(1.3, 0.2, 1), (0.7, 0.05, 40), (2.0, 0.45, 0)] {
            let p = CouplingParams::from_mu(mu).unwrap();
            let (l, r) = psi_tilde_identity(&p, eps, &alternating_window(n0, 24)).unwrap();
            assert!((l - r).abs() < 1e-10 * r.abs().max(1.0), "{l} vs {r}");
        }
    }

    #[test]
    fn adversarial_bound_margin_shrinks() {
        let p = CouplingParams::new(3.0).unwrap();
        let margins: Vec<f64> = [(10, 16), (100, 64), (1000, 256)]
            .iter()
            .map(|&(n0, w)| {
                let s = psi_tilde_state(0.5 - 1e-9, &alternating_window(n0, w)).unwrap();
                let r = bound_check(&s, &p);
                assert!(r.holds());
                r.b_margin / r.a0
            })
            .collect();
        assert!(margins.windows(2).all(|m| m[1] < m[0]), "{margins:?}");
        assert!(margins[2] < 0.05);
    }

    #[test]
    fn seeded_sweep_respects_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for beta in [CRITICAL_BETA, 3.0, 5.0] {
            let p = CouplingParams::new(beta).unwrap();
            for _ in 0..1000 {
                let s = random_state(&mut rng);
                assert!(bound_check(&s, &p).holds());
            }
        }
    }

    proptest! {
        #[test]
        fn cross_term(a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0, d in -5.0f64..5.0) {
            prop_assert!(cross_term_margin((a, b), (c, d)) >= -1e-12);
        }

        #[test]
        fn trace_bound_inequality(ap in -1.0f64..1.0, am in -1.0f64..1.0,
                             rp in 0.1f64..10.0, rm in 0.1f64..10.0, gamma in 0.1f64..10.0) {
            let (l, r) = ExpProfile::new(ap, am, rp, rm).unwrap().trace_bound_sides(gamma);
            prop_assert!(l <= r * (1.0 + 1e-14));
        }
    }
}
