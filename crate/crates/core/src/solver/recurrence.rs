//! Backward (Miller-type) evaluation of the minimal solution of
//!
//! ```text
//! √(n+1)·Q_{n+1} + 2μ·ζₙ(Λ)·Qₙ + √n·Q_{n−1} = 0,   n ≥ 1
//! ```
//!
//! and the boundary row `Q₁ + 2μ·ζ₀(Λ)·Q₀ = 0` that selects eigenvalues.
//! The minimal solution decays like `rⁿ` with `r = μ − √(μ²−1)`, so running
//! the recurrence downward from a cut `N` is stable.

use serde::Serialize;

use super::{zeta, CouplingParams};
use crate::error::{Error, Result};

const RESCALE_ABOVE: f64 = 1e100;

/// Minimal-solution decay ratio `μ − √(μ²−1)`, written to avoid cancellation.
pub fn decay_ratio(mu: f64) -> f64 {
    1.0 / (mu + (mu * mu - 1.0).sqrt())
}

/// Starting cut `N*(μ) = ceil(40 / |ln r|) + 100`.
pub fn truncation_heuristic(mu: f64) -> usize {
    let r = decay_ratio(mu);
    (40.0 / r.ln().abs()).ceil() as usize + 100
}

fn check_args(params: &CouplingParams, lambda: f64, n: usize) -> Result<()> {
    params.require_subcritical()?;
    if !(lambda > 0.0 && lambda < 0.5) {
        return Err(Error::domain(format!("spectral parameter must lie in (0, 1/2), got {lambda}")));
    }
    if n < 2 {
        return Err(Error::input(format!("truncation must be >= 2, got {n}")));
    }
    Ok(())
}

/// Normalized minimal solution at a fixed spectral parameter.
#[derive(Clone, Debug, Serialize)]
pub struct CoefficientVector {
    pub params: CouplingParams,
    pub lambda: f64,
    /// `Q₀ … Q_N`, unit ℓ² norm, sign fixed by `Q₀ ≥ 0`.
    pub q: Vec<f64>,
    /// `Cₙ = (n+1/2)^{−1/4} Qₙ`.
    pub c: Vec<f64>,
    pub truncation: usize,
}

impl CoefficientVector {
    /// Residual of the interior row at `1 ≤ n ≤ N−1`, scaled by the row's largest term.
    pub fn interior_residual(&self, n: usize) -> f64 {
        let mu = self.params.mu;
        let nf = n as f64;
        let z = (nf + 0.5 - self.lambda).sqrt();
        let terms = [
            (nf + 1.0).sqrt() * self.q[n + 1],
            2.0 * mu * z * self.q[n],
            nf.sqrt() * self.q[n - 1],
        ];
        let scale = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        let sum: f64 = terms.iter().sum();
        if scale == 0.0 {
            0.0
        } else {
            sum.abs() / scale
        }
    }

    /// `Q₁ + 2μ√(1/2 − Λ)·Q₀` on the normalized vector.
    pub fn boundary_residual(&self) -> f64 {
        self.q[1] + 2.0 * self.params.mu * (0.5 - self.lambda).sqrt() * self.q[0]
    }

    /// Geometric-mean magnitude ratio `|Q_{n+1}/Qₙ|` over `n ∈ [N/2, 3N/4)`,
    /// away from both the boundary row and the cut.
    pub fn tail_ratio(&self) -> Option<f64> {
        let n = self.truncation;
        let (lo, hi) = (n / 2, 3 * n / 4);
        let a = self.q.get(lo)?.abs();
        let b = self.q.get(hi)?.abs();
        if a == 0.0 || b == 0.0 || hi <= lo {
            return None;
        }
        Some((b.ln() - a.ln()).exp().powf(1.0 / (hi - lo) as f64))
    }
}

/// `(−1)^N`: the minimal solution alternates in sign, so this seed keeps
/// `Q₀` and the secular function on the same branch for every `N`.
fn tail_seed(n: usize) -> f64 {
    if n.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Runs the recurrence from `Q_{N+1} = 0`, `Q_N = ±1` down to `Q₀`.
pub fn backward_minimal_solution(
    params: &CouplingParams,
    lambda: f64,
    n: usize,
) -> Result<CoefficientVector> {
    check_args(params, lambda, n)?;
    let mu = params.mu;
    let mut q = vec![0.0; n + 2];
    q[n] = tail_seed(n);
    for k in (1..=n).rev() {
        let kf = k as f64;
        let z = (kf + 0.5 - lambda).sqrt();
        let prev = -((kf + 1.0).sqrt() * q[k + 1] + 2.0 * mu * z * q[k]) / kf.sqrt();
        q[k - 1] = prev;
        if prev.abs() > RESCALE_ABOVE {
            let s = prev.abs();
            for v in &mut q[k - 1..] {
                *v /= s;
            }
        }
    }
    q.truncate(n + 1);
    let norm = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !norm.is_finite() || norm == 0.0 {
        return Err(Error::Numeric(format!(
            "backward recurrence lost the solution at beta = {}, lambda = {lambda}, N = {n}",
            params.beta
        )));
    }
    let sign = if q[0] < 0.0 { -1.0 } else { 1.0 };
    for v in &mut q {
        *v *= sign / norm;
    }
    let c = q
        .iter()
        .enumerate()
        .map(|(k, v)| v * (k as f64 + 0.5).powf(-0.25))
        .collect();
    Ok(CoefficientVector {
        params: *params,
        lambda,
        q,
        c,
        truncation: n,
    })
}

/// `F(Λ) = Q₁ + 2μ√(1/2 − Λ)·Q₀` with `Q` scaled so that `max |Qₙ| = 1`.
pub(crate) fn secular_unchecked(mu: f64, lambda: f64, n: usize) -> f64 {
    let mut next = 0.0;
    let mut cur = tail_seed(n);
    let mut max = 1.0f64;
    for k in (1..=n).rev() {
        let kf = k as f64;
        let z = (kf + 0.5 - lambda).sqrt();
        let prev = -((kf + 1.0).sqrt() * next + 2.0 * mu * z * cur) / kf.sqrt();
        next = cur;
        cur = prev;
        max = max.max(cur.abs());
        if max > RESCALE_ABOVE {
            next /= max;
            cur /= max;
            max = 1.0;
        }
    }
    (next + 2.0 * mu * zeta(0, lambda).unwrap_or(0.0) * cur) / max
}

/// Secular function whose zeros in `(0, 1/2)` are the eigenvalues.
pub fn secular_value(params: &CouplingParams, lambda: f64, n: usize) -> Result<f64> {
    check_args(params, lambda, n)?;
    let f = secular_unchecked(params.mu, lambda, n);
    if f.is_finite() {
        Ok(f)
    } else {
        Err(Error::Numeric(format!("secular function overflowed at lambda = {lambda}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(beta: f64) -> CouplingParams {
        CouplingParams::new(beta).unwrap()
    }

    #[test]
    fn interior_rows_vanish() {
        let p = params(10.0);
        let n = truncation_heuristic(p.mu);
        let v = backward_minimal_solution(&p, 0.3, n).unwrap();
        for k in 1..n {
            assert!(v.interior_residual(k) < 1e-12, "row {k}: {}", v.interior_residual(k));
        }
        let norm: f64 = v.q.iter().map(|x| x * x).sum();
        assert!((norm - 1.0).abs() < 1e-14);
    }

    #[test]
    fn weak_coupling_profile() {
        let p = params(10.0);
        let v = backward_minimal_solution(&p, 0.4996, truncation_heuristic(p.mu)).unwrap();
        let ratio = v.q[1] / v.q[0];
        assert!((ratio.abs() - 1.0 / (2.0 * p.mu)).abs() < 0.15 / (2.0 * p.mu), "{ratio}");
        // Q₀ and Q₁ carry opposite signs; ζ₀ = −Q₁/(2μQ₀) is then positive.
        assert!(ratio < 0.0);
        assert!(v.q[0] >= 0.95);
    }

    #[test]
    fn secular_brackets_weak_coupling_root() {
        let p = params(10.0);
        let n = truncation_heuristic(p.mu);
        let a = secular_value(&p, 0.4990, n).unwrap();
        let b = secular_value(&p, 0.4999, n).unwrap();
        assert!(a * b < 0.0);
    }

    #[test]
    fn secular_single_sign_change_at_beta_four() {
        let p = params(4.0);
        let n = truncation_heuristic(p.mu);
        let vals: Vec<f64> = (1..500)
            .map(|i| secular_value(&p, i as f64 * 1e-3, n).unwrap())
            .collect();
        let changes = vals.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
        assert_eq!(changes, 1);
    }

    #[test]
    fn secular_converges_under_doubling() {
        for beta in [3.0, 4.0, 10.0] {
            let p = params(beta);
            let n = truncation_heuristic(p.mu);
            for lambda in [0.05, 0.2, 0.4] {
                let a = secular_value(&p, lambda, n).unwrap();
                let b = secular_value(&p, lambda, 2 * n).unwrap();
                assert!((a - b).abs() < 1e-10, "beta {beta} lambda {lambda}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn tail_ratio_matches_characteristic_root() {
        for beta in [3.5, 5.0, 10.0] {
            let p = params(beta);
            let v = backward_minimal_solution(&p, 0.3, truncation_heuristic(p.mu)).unwrap();
            let r = decay_ratio(p.mu);
            let t = v.tail_ratio().unwrap();
            assert!((t - r).abs() < 0.1 * r, "beta {beta}: {t} vs {r}");
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let p = params(10.0);
        assert!(secular_value(&p, 0.5, 100).is_err());
        assert!(secular_value(&p, 0.0, 100).is_err());
        assert!(secular_value(&p, 0.3, 1).is_err());
        assert!(matches!(
            backward_minimal_solution(&params(2.0), 0.3, 100),
            Err(Error::Regime { .. })
        ));
    }

    #[test]
    fn heuristic_grows_toward_critical() {
        assert!(truncation_heuristic(1.001) > truncation_heuristic(1.1));
        assert!(truncation_heuristic(1.1) > truncation_heuristic(5.0));
        assert!((decay_ratio(2.0) - (2.0 - 3f64.sqrt())).abs() < 1e-15);
    }
}
