//! Leading-order predictions for the two coupling limits and the
//! absolutely continuous spectrum, plus the comparison tolerances used
//! against computed values.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::solver::{CouplingParams, Regime};

/// `μ − 1` at or below which the eigenvalue-count law is compared.
pub const COUNT_REGIME_WIDTH: f64 = 0.01;
/// `β` from which `1/2 − 4/β⁴` is reported without a caveat.
pub const WEAK_COUPLING_BETA: f64 = 8.0;
pub const DEFAULT_N_MAX: usize = 8;

/// `1/(4√(2(μ−1)))`, the leading number of eigenvalues as `μ → 1+`.
pub fn predicted_count(params: &CouplingParams) -> Result<f64> {
    params.require_subcritical()?;
    Ok(1.0 / (4.0 * (2.0 * (params.mu - 1.0)).sqrt()))
}

pub fn count_in_regime(params: &CouplingParams) -> bool {
    params.regime == Regime::Subcritical && params.mu - 1.0 <= COUNT_REGIME_WIDTH
}

/// Allowed `|computed − predicted|`: one eigenvalue or 25 %, whichever is larger.
pub fn count_tolerance(predicted: f64) -> f64 {
    (0.25 * predicted).max(1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GroundStatePrediction {
    pub lambda: f64,
    /// False when `β` is too small for the large-coupling expansion to mean much.
    pub in_regime: bool,
}

/// `1/2 − 4/β⁴`.
pub fn predicted_ground_state(params: &CouplingParams) -> GroundStatePrediction {
    GroundStatePrediction {
        lambda: 0.5 - 4.0 / params.beta.powi(4),
        in_regime: params.beta >= WEAK_COUPLING_BETA,
    }
}

/// `1 + 1/(32k²)`: the k-th eigenvalue of `J₀` above 1.
pub fn predicted_j0_eigenvalue(k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::input("eigenvalue index k starts at 1"));
    }
    Ok(1.0 + 1.0 / (32.0 * (k * k) as f64))
}

/// An interval of absolutely continuous spectrum with its multiplicity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AcBranch {
    /// `-inf` serializes as `null`.
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub multiplicity: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AcSummary {
    pub beta: f64,
    /// `(n − 1/2, n + 1/2)` with multiplicity `2n`, `n = 1..=n_max`.
    pub branches: Vec<AcBranch>,
    /// Extra simple branch for `μ ≤ 1`.
    pub extra_branch: Option<AcBranch>,
}

pub fn ac_summary(params: &CouplingParams, n_max: usize) -> AcSummary {
    let branches = (1..=n_max)
        .map(|n| AcBranch {
            lo: n as f64 - 0.5,
            hi: n as f64 + 0.5,
            lo_closed: false,
            multiplicity: 2 * n as u32,
        })
        .collect();
    let extra_branch = match params.regime {
        Regime::Subcritical => None,
        Regime::Critical => Some(AcBranch {
            lo: 0.0,
            hi: f64::INFINITY,
            lo_closed: true,
            multiplicity: 1,
        }),
        Regime::Supercritical => Some(AcBranch {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
            lo_closed: false,
            multiplicity: 1,
        }),
    };
    AcSummary {
        beta: params.beta,
        branches,
        extra_branch,
    }
}
