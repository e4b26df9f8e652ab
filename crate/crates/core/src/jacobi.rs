//! Finite symmetric tridiagonal (Jacobi) matrices.
//!
//! Three families are built here, all as finite sections (Dirichlet cut) of
//! semi-infinite operators on ℓ²:
//!
//! - `J(ε)`: zero diagonal, `j_{n,n-1} = √n / (2 (n+ε)^{1/4} (n-1+ε)^{1/4})`.
//!   Its eigenvalue count above `μ` equals the number of eigenvalues of the
//!   two-dimensional operator below `1/2 − ε`.
//! - `J₀`: the `ε → 0` limit restricted to `C₀ = 0`, entries
//!   `1 / (2 (1 − 1/n)^{1/4})` for `n ≥ 2`.
//! - `J₀(μ) = DS + S*D + 2μY₀`.
//!
//! Counting uses the signed pivots of the shifted LDLᵀ factorization
//! (Sturm sequence); eigenvalues come from bisection on that count.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::par::{self, Execution};

/// Pivot magnitude (relative to the matrix scale) treated as breakdown.
pub const PIVOT_GUARD: f64 = 1e-300;
/// Relative shift applied to the threshold after a pivot breakdown.
pub const BREAKDOWN_SHIFT: f64 = 1e-12;
/// Relative bisection tolerance for eigenvalues.
pub const EIGEN_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tridiagonal {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

/// Result of a Sturm count at one threshold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CountReport {
    /// Threshold actually used (differs from the request only when `shifted`).
    pub threshold: f64,
    pub count_above: usize,
    pub count_below: usize,
    pub size: usize,
    /// A pivot broke down at the requested threshold and it was nudged upward.
    pub shifted: bool,
}

impl Tridiagonal {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::input("tridiagonal matrix needs size >= 1"));
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(Error::input(format!(
                "off-diagonal length {} does not match size {}",
                offdiag.len(),
                diag.len()
            )));
        }
        if diag.iter().chain(&offdiag).any(|v| !v.is_finite()) {
            return Err(Error::input("tridiagonal entries must be finite"));
        }
        Ok(Tridiagonal { diag, offdiag })
    }

    pub fn size(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    /// Largest entry magnitude, at least 1.
    pub fn scale(&self) -> f64 {
        self.diag
            .iter()
            .chain(&self.offdiag)
            .fold(1.0f64, |m, v| m.max(v.abs()))
    }

    /// Gershgorin enclosure `[lo, hi]` of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.size();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.offdiag[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.offdiag[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    /// The matrix `−A`, whose eigenvalues above `−t` are those of `A` below `t`.
    pub fn negated(&self) -> Tridiagonal {
        Tridiagonal {
            diag: self.diag.iter().map(|v| -v).collect(),
            offdiag: self.offdiag.clone(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.size();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            if i + 1 < n {
                m[(i, i + 1)] = self.offdiag[i];
                m[(i + 1, i)] = self.offdiag[i];
            }
        }
        m
    }

    /// Signed pivot counts `(negative, positive, breakdown)` of `A − tI`.
    fn pivot_signs(&self, t: f64, guard: f64) -> (usize, usize, bool) {
        let mut neg = 0;
        let mut pos = 0;
        let mut broke = false;
        let mut pivot = 1.0;
        for i in 0..self.size() {
            let coupling = if i > 0 {
                let e = self.offdiag[i - 1];
                e * e / pivot
            } else {
                0.0
            };
            pivot = self.diag[i] - t - coupling;
            if pivot.abs() < guard {
                broke = true;
                pivot = -guard;
            }
            if pivot < 0.0 {
                neg += 1;
            } else {
                pos += 1;
            }
        }
        (neg, pos, broke)
    }

    pub fn count(&self, threshold: f64) -> Result<CountReport> {
        count_above(self, threshold)
    }

    pub fn eigenvalues_above(&self, threshold: f64, k_max: usize) -> Result<Vec<f64>> {
        eigenvalues_above(self, threshold, k_max)
    }
}

fn check_size(size: usize, min: usize) -> Result<()> {
    if size < min {
        Err(Error::input(format!("matrix size must be >= {min}, got {size}")))
    } else {
        Ok(())
    }
}

/// Finite section of `J(ε)`. `ε` must lie in `(0, 1/2]`.
pub fn build_j_eps(eps: f64, size: usize) -> Result<Tridiagonal> {
    check_size(size, 2)?;
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::domain(format!(
            "J(eps) needs 0 < eps <= 1/2 (the n = 1 entry diverges at eps = 0), got {eps}"
        )));
    }
    let offdiag = (1..size)
        .map(|n| {
            let n = n as f64;
            n.sqrt() / (2.0 * (n + eps).powf(0.25) * (n - 1.0 + eps).powf(0.25))
        })
        .collect();
    Tridiagonal::new(vec![0.0; size], offdiag)
}

/// Finite section of `J₀` on indices `n = 1..=size` (component `C₀` removed).
pub fn build_j0(size: usize) -> Result<Tridiagonal> {
    check_size(size, 2)?;
    let offdiag = (2..=size)
        .map(|n| 0.5 / (1.0 - 1.0 / n as f64).powf(0.25))
        .collect();
    Tridiagonal::new(vec![0.0; size], offdiag)
}

/// `dₙ = n^{1/2} (n+1/2)^{1/4} (n−1/2)^{1/4}`.
pub fn d_coefficient(n: usize) -> f64 {
    let n = n as f64;
    n.sqrt() * (n + 0.5).powf(0.25) * (n - 0.5).powf(0.25)
}

/// Finite section of `J₀(μ) = DS + S*D + 2μY₀`.
pub fn build_j0_mu(mu: f64, size: usize) -> Result<Tridiagonal> {
    check_size(size, 2)?;
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::domain(format!("J0(mu) needs mu > 0, got {mu}")));
    }
    let diag = (0..size).map(|n| 2.0 * mu * (n as f64 + 0.5)).collect();
    let offdiag = (0..size - 1).map(|n| d_coefficient(n + 1)).collect();
    Tridiagonal::new(diag, offdiag)
}

/// Number of eigenvalues strictly above and below `threshold`.
///
/// If a pivot breaks down (threshold numerically on an eigenvalue of a leading
/// block) the count is redone at `threshold + 1e-12·scale` and flagged.
pub fn count_above(m: &Tridiagonal, threshold: f64) -> Result<CountReport> {
    if !threshold.is_finite() {
        return Err(Error::input(format!("count threshold must be finite, got {threshold}")));
    }
    let scale = m.scale().max(threshold.abs());
    let guard = PIVOT_GUARD * scale;
    let (neg, pos, broke) = m.pivot_signs(threshold, guard);
    if !broke {
        return Ok(CountReport {
            threshold,
            count_above: pos,
            count_below: neg,
            size: m.size(),
            shifted: false,
        });
    }
    let shifted = threshold + BREAKDOWN_SHIFT * scale;
    let (neg, pos, _) = m.pivot_signs(shifted, guard);
    Ok(CountReport {
        threshold: shifted,
        count_above: neg,
        count_below: pos,
        size: m.size(),
        shifted: true,
    })
}

fn above(m: &Tridiagonal, t: f64) -> usize {
    let scale = m.scale().max(t.abs());
    let (_, pos, _) = m.pivot_signs(t, PIVOT_GUARD * scale);
    pos
}

/// Up to `k_max` largest eigenvalues above `threshold`, in decreasing order.
pub fn eigenvalues_above(m: &Tridiagonal, threshold: f64, k_max: usize) -> Result<Vec<f64>> {
    eigenvalues_above_with(m, threshold, k_max, Execution::default())
}

pub fn eigenvalues_above_with(
    m: &Tridiagonal,
    threshold: f64,
    k_max: usize,
    exec: Execution,
) -> Result<Vec<f64>> {
    if k_max == 0 {
        return Err(Error::input("k_max must be >= 1"));
    }
    let report = count_above(m, threshold)?;
    let k = report.count_above.min(k_max);
    if k == 0 {
        return Ok(Vec::new());
    }
    let (_, hi) = m.gershgorin();
    let upper = hi + EIGEN_TOL * m.scale();
    let lower = report.threshold;
    Ok(par::map_range(exec, 1..k + 1, |j| {
        let (mut lo, mut hi) = (lower, upper);
        loop {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= EIGEN_TOL * mid.abs().max(1.0) || mid <= lo || mid >= hi {
                break mid;
            }
            if above(m, mid) >= j {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }))
}
