//! Discrete spectrum below the threshold `1/2` for subcritical coupling
//! `β > 2√2`.
//!
//! Writing `Ψ = Σ Cₙ ηₙ(x) χₙ(y)` with halfline exponentials
//! `ηₙ = ±(n+1/2)^{1/4} e^{∓ζₙ x}` turns the interface condition into a
//! three-term recurrence for `Qₙ = (n+1/2)^{1/4} Cₙ`. Eigenvalues are the
//! zeros of the boundary row evaluated on the minimal solution; see
//! [`recurrence`]. The count is cross-checked against the Sturm count of the
//! Jacobi matrix `J(ε)` at `μ = β/(2√2)`.

pub mod field;
pub mod recurrence;

use std::f64::consts::SQRT_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jacobi;
use crate::par::{self, Execution};

pub use field::{eigenfunction_field, matching_check, Eigenfunction, GridField, MatchingReport};
pub use recurrence::{
    backward_minimal_solution, decay_ratio, secular_value, truncation_heuristic, CoefficientVector,
};

/// Coupling at which the discrete spectrum disappears.
pub const CRITICAL_BETA: f64 = 2.0 * SQRT_2;
/// Lower end of the eigenvalue search interval.
pub const SEARCH_LO: f64 = 1e-9;
/// Upper end of the eigenvalue search interval, just below the branch point of ζ₀.
pub const SEARCH_HI: f64 = 0.5 - 1e-12;
/// Largest cut the solver or the Sturm count will try before giving up.
pub const MAX_TRUNCATION: usize = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `μ > 1`: discrete spectrum in `(0, 1/2)`.
    Subcritical,
    /// `μ = 1`.
    Critical,
    /// `μ < 1`: spectrum covers the real line.
    Supercritical,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Regime::Subcritical => "subcritical",
            Regime::Critical => "critical",
            Regime::Supercritical => "supercritical",
        };
        f.write_str(s)
    }
}

/// Validated coupling `β > 0` with `μ = β/(2√2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingParams {
    pub beta: f64,
    pub mu: f64,
    pub regime: Regime,
}

impl CouplingParams {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::input(format!("beta must be positive and finite, got {beta}")));
        }
        Ok(Self::classified(beta, beta / CRITICAL_BETA))
    }

    pub fn from_mu(mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::input(format!("mu must be positive and finite, got {mu}")));
        }
        Ok(Self::classified(mu * CRITICAL_BETA, mu))
    }

    fn classified(beta: f64, mu: f64) -> Self {
        let regime = if (mu - 1.0).abs() <= 4.0 * f64::EPSILON {
            Regime::Critical
        } else if mu > 1.0 {
            Regime::Subcritical
        } else {
            Regime::Supercritical
        };
        CouplingParams { beta, mu, regime }
    }

    pub fn require_subcritical(&self) -> Result<()> {
        match self.regime {
            Regime::Subcritical => Ok(()),
            regime => Err(Error::Regime {
                beta: self.beta,
                mu: self.mu,
                regime,
                reason: "no discrete spectrum in critical/supercritical regime",
            }),
        }
    }
}

/// `ζₙ(Λ) = √(n + 1/2 − Λ)` for real `Λ` below the level threshold.
pub fn zeta(n: usize, lambda: f64) -> Result<f64> {
    let gap = n as f64 + 0.5 - lambda;
    if gap > 0.0 {
        Ok(gap.sqrt())
    } else {
        Err(Error::domain(format!("lambda = {lambda} is not below threshold {}", n as f64 + 0.5)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Absolute tolerance on each eigenvalue.
    pub tol: f64,
    /// Fixed starting cut; `None` uses [`truncation_heuristic`].
    pub trunc: Option<usize>,
    pub max_trunc: usize,
    /// Uniform Λ step of the initial sign scan.
    pub scan_step: f64,
    /// Rescans with a finer grid allowed when the sign scan finds fewer roots
    /// than the Sturm count.
    pub max_refinements: usize,
    pub exec: Execution,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-10,
            trunc: None,
            max_trunc: MAX_TRUNCATION,
            scan_step: 1e-3,
            max_refinements: 3,
            exec: Execution::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EigenvalueEstimate {
    pub lambda: f64,
    /// `|F(Λ)|` at the final cut.
    pub residual: f64,
    /// Cut used for the final estimate.
    pub truncation: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralResult {
    pub params: CouplingParams,
    /// Increasing in `lambda`.
    pub eigenvalues: Vec<EigenvalueEstimate>,
    /// Sturm count `N₊(μ, J(1/2 − SEARCH_HI))`, i.e. the expected number of roots.
    pub jacobi_count: usize,
    pub jacobi_size: usize,
    /// Whether the number of secular roots equals `jacobi_count`.
    pub count_consistent: bool,
    /// How many times the scan grid had to be refined.
    pub refinements: usize,
}

impl SpectralResult {
    pub fn lambdas(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|e| e.lambda).collect()
    }

    pub fn count(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn all_converged(&self) -> bool {
        self.eigenvalues.iter().all(|e| e.converged)
    }

    /// Number of eigenvalues strictly below `threshold`.
    pub fn count_below(&self, threshold: f64) -> usize {
        self.eigenvalues.iter().filter(|e| e.lambda < threshold).count()
    }
}

/// Scan points: uniform with `step`, each uniform cell split into `split`
/// parts, plus the geometric sequence `1/2 − 2^{−k}/2` (also split) toward
/// the accumulation edge.
fn scan_grid(step: f64, split: usize) -> Vec<f64> {
    let mut pts = vec![SEARCH_LO, SEARCH_HI];
    let fine = step / split as f64;
    let mut x = SEARCH_LO;
    while x < SEARCH_HI {
        pts.push(x);
        x += fine;
    }
    let geo: Vec<f64> = (1..=40).map(|k| 0.5 - 0.5 * 0.5f64.powi(k)).collect();
    for w in geo.windows(2) {
        for j in 0..split {
            pts.push(w[0] + (w[1] - w[0]) * j as f64 / split as f64);
        }
    }
    pts.push(*geo.last().unwrap());
    pts.retain(|&p| (SEARCH_LO..=SEARCH_HI).contains(&p));
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    pts
}

fn bisect(mu: f64, mut a: f64, mut b: f64, n: usize, width: f64) -> Option<f64> {
    let mut fa = recurrence::secular_unchecked(mu, a, n);
    let fb = recurrence::secular_unchecked(mu, b, n);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa * fb > 0.0 {
        return None;
    }
    loop {
        let m = 0.5 * (a + b);
        if b - a <= width || m <= a || m >= b {
            return Some(m);
        }
        let fm = recurrence::secular_unchecked(mu, m, n);
        if fm == 0.0 {
            return Some(m);
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
}

fn refine_root(mu: f64, a: f64, b: f64, n0: usize, opts: &SolverOptions) -> EigenvalueEstimate {
    let width = opts.tol / 100.0;
    let mut n = n0;
    let mut root = bisect(mu, a, b, n, width).unwrap_or(0.5 * (a + b));
    let mut converged = false;
    while 2 * n <= opts.max_trunc {
        let n2 = 2 * n;
        let Some(root2) = bisect(mu, a, b, n2, width) else {
            break;
        };
        let moved = (root2 - root).abs();
        n = n2;
        root = root2;
        if moved < opts.tol / 10.0 {
            converged = true;
            break;
        }
    }
    EigenvalueEstimate {
        lambda: root,
        residual: recurrence::secular_unchecked(mu, root, n).abs(),
        truncation: n,
        converged,
    }
}

/// `N₊(μ, J(ε))` with the cut doubled until two consecutive counts agree.
/// Returns `(count, cut)`.
pub fn stabilized_jacobi_count(mu: f64, eps: f64) -> Result<(usize, usize)> {
    let mut n = (4 * truncation_heuristic(mu)).max(64);
    let count_at = |n: usize| -> Result<usize> {
        Ok(jacobi::count_above(&jacobi::build_j_eps(eps, n)?, mu)?.count_above)
    };
    let mut c = count_at(n)?;
    while 2 * n <= MAX_TRUNCATION {
        let c2 = count_at(2 * n)?;
        if c2 == c {
            return Ok((c, n));
        }
        n *= 2;
        c = c2;
    }
    Err(Error::Numeric(format!("Sturm count did not stabilize for mu = {mu}, eps = {eps}")))
}

/// `N₊(μ, J₀)` with the cut doubled until stable. Returns `(count, cut)`.
pub fn stabilized_j0_count(mu: f64) -> Result<(usize, usize)> {
    let mut n = (4 * truncation_heuristic(mu)).max(64);
    let count_at =
        |n: usize| -> Result<usize> { Ok(jacobi::count_above(&jacobi::build_j0(n)?, mu)?.count_above) };
    let mut c = count_at(n)?;
    while 2 * n <= MAX_TRUNCATION {
        let c2 = count_at(2 * n)?;
        if c2 == c {
            return Ok((c, n));
        }
        n *= 2;
        c = c2;
    }
    Err(Error::Numeric(format!("J0 Sturm count did not stabilize for mu = {mu}")))
}

/// All eigenvalues in `(0, 1/2)`.
pub fn discrete_spectrum(params: &CouplingParams, opts: &SolverOptions) -> Result<SpectralResult> {
    params.require_subcritical()?;
    if !(opts.tol > 0.0) {
        return Err(Error::input(format!("tol must be positive, got {}", opts.tol)));
    }
    let mu = params.mu;
    let n0 = opts.trunc.unwrap_or_else(|| truncation_heuristic(mu)).max(2);
    let (jacobi_count, jacobi_size) = stabilized_jacobi_count(mu, 0.5 - SEARCH_HI)?;

    let mut refinements = 0;
    let mut brackets;
    loop {
        let grid = scan_grid(opts.scan_step, 1 << (3 * refinements));
        let vals = par::map(opts.exec, &grid, |&l| recurrence::secular_unchecked(mu, l, n0));
        if let Some(i) = vals.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("secular function not finite at lambda = {}", grid[i])));
        }
        brackets = Vec::new();
        let mut i = 0;
        while i + 1 < grid.len() {
            if vals[i] == 0.0 {
                let lo = if i > 0 { grid[i - 1] } else { grid[i] };
                brackets.push((lo, grid[i + 1]));
                i += 2;
                continue;
            }
            if vals[i] * vals[i + 1] < 0.0 {
                brackets.push((grid[i], grid[i + 1]));
            }
            i += 1;
        }
        if brackets.len() >= jacobi_count || refinements >= opts.max_refinements {
            break;
        }
        refinements += 1;
    }

    let eigenvalues = par::map(opts.exec, &brackets, |&(a, b)| refine_root(mu, a, b, n0, opts));
    Ok(SpectralResult {
        params: *params,
        count_consistent: eigenvalues.len() == jacobi_count,
        eigenvalues,
        jacobi_count,
        jacobi_size,
        refinements,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CrossCheck {
    pub count_secular: usize,
    pub count_jacobi: usize,
    pub jacobi_size: usize,
}

impl CrossCheck {
    pub fn agrees(&self) -> bool {
        self.count_secular == self.count_jacobi
    }
}

/// Half-width of the window around `1/2 − ε` in which a root makes the count ambiguous.
pub fn ambiguity_window(tol: f64) -> f64 {
    (100.0 * tol).max(1e-9)
}

/// Secular-root count below `1/2 − ε` against `N₊(μ, J(ε))`, reusing a computed spectrum.
pub fn cross_check_with(result: &SpectralResult, eps: f64, tol: f64) -> Result<CrossCheck> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::domain(format!("eps must lie in (0, 1/2), got {eps}")));
    }
    let threshold = 0.5 - eps;
    let window = ambiguity_window(tol);
    if let Some(e) = result.eigenvalues.iter().find(|e| (e.lambda - threshold).abs() <= window) {
        return Err(Error::Ambiguous {
            threshold,
            root: e.lambda,
            window,
        });
    }
    let (count_jacobi, jacobi_size) = stabilized_jacobi_count(result.params.mu, eps)?;
    Ok(CrossCheck {
        count_secular: result.count_below(threshold),
        count_jacobi,
        jacobi_size,
    })
}

/// Counts eigenvalues below `1/2 − ε` by both routes.
pub fn count_cross_check(params: &CouplingParams, eps: f64, opts: &SolverOptions) -> Result<CrossCheck> {
    let result = discrete_spectrum(params, opts)?;
    cross_check_with(&result, eps, opts.tol)
}

/// Normalized coefficient vector at a converged eigenvalue.
pub fn eigenvector(params: &CouplingParams, estimate: &EigenvalueEstimate) -> Result<CoefficientVector> {
    if !estimate.converged {
        return Err(Error::Numeric(format!("eigenvalue {} did not converge", estimate.lambda)));
    }
    backward_minimal_solution(params, estimate.lambda, estimate.truncation)
}
