//! L²(ℝ)-normalized Hermite functions χₙ, the eigenbasis of the oscillator
//! `(1/2)(-d²/dy² + y²)` with energies `n + 1/2`.
//!
//! Values are produced by the upward recurrence
//! `χₙ₊₁ = (√2·y·χₙ − √n·χₙ₋₁) / √(n+1)` applied to normalized values, never
//! to raw polynomials. The Gaussian factor is split off and the running pair is
//! rescaled with a tracked logarithm, so neither overflow nor premature
//! underflow occurs on the accuracy domain `n ≤ 200`, `|y| ≤ 10`.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Highest level for which the documented accuracy holds.
pub const MAX_ACCURATE_LEVEL: usize = 200;
/// Largest |y| for which the documented accuracy holds.
pub const MAX_ACCURATE_Y: f64 = 10.0;

const RESCALE_ABOVE: f64 = 1e150;

/// Oscillator level index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OscLevel(pub usize);

impl OscLevel {
    pub fn index(self) -> usize {
        self.0
    }

    /// Oscillator energy `n + 1/2`.
    pub fn energy(self) -> f64 {
        self.0 as f64 + 0.5
    }
}

impl From<usize> for OscLevel {
    fn from(n: usize) -> Self {
        OscLevel(n)
    }
}

fn check_y(y: f64) -> Result<()> {
    if y.is_finite() {
        Ok(())
    } else {
        Err(Error::input(format!("hermite argument must be finite, got {y}")))
    }
}

/// Whether `(n, y)` lies in the domain where relative accuracy 1e-10 is guaranteed.
pub fn in_accuracy_domain(n: usize, y: f64) -> bool {
    n <= MAX_ACCURATE_LEVEL && y.abs() <= MAX_ACCURATE_Y
}

/// χ₀(y), …, χ_{n_max}(y).
pub fn hermite_values(n_max: usize, y: f64) -> Result<Vec<f64>> {
    check_y(y)?;
    let gauss_log = -0.5 * y * y;
    let mut out = Vec::with_capacity(n_max + 1);

    // (prev, cur) hold χ_{n-1}, χ_n divided by exp(log_scale - y²/2).
    let mut log_scale = 0.0f64;
    let mut prev = 0.0f64;
    let mut cur = PI.powf(-0.25);
    out.push(cur * gauss_log.exp());
    for n in 0..n_max {
        let nf = n as f64;
        let next = (SQRT_2 * y * cur - nf.sqrt() * prev) / (nf + 1.0).sqrt();
        prev = cur;
        cur = next;
        let mag = cur.abs().max(prev.abs());
        if mag > RESCALE_ABOVE {
            prev /= mag;
            cur /= mag;
            log_scale += mag.ln();
        }
        out.push(cur * (gauss_log + log_scale).exp());
    }
    Ok(out)
}

/// χₙ(y).
pub fn hermite_value(n: OscLevel, y: f64) -> Result<f64> {
    let vals = hermite_values(n.0, y)?;
    Ok(vals[n.0])
}

/// `√(n+1)·χₙ₊₁(y) − √2·y·χₙ(y) + √n·χₙ₋₁(y)`, which vanishes identically.
pub fn hermite_recurrence_residual(n: OscLevel, y: f64) -> Result<f64> {
    if n.0 == 0 {
        return Err(Error::input("recurrence residual needs n >= 1"));
    }
    let v = hermite_values(n.0 + 1, y)?;
    let k = n.0;
    let nf = k as f64;
    Ok((nf + 1.0).sqrt() * v[k + 1] - SQRT_2 * y * v[k] + nf.sqrt() * v[k - 1])
}
