//! Eigenfunction reconstruction `Ψ(x,y) = sgn(x) Σ Qₙ e^{−ζₙ|x|} χₙ(y)`.

use serde::Serialize;

use super::recurrence::CoefficientVector;
use crate::error::{Error, Result};
use crate::hermite::{self, MAX_ACCURATE_LEVEL, MAX_ACCURATE_Y};
use crate::par::{self, Execution};

/// Terms with `|Qₙ| = |Cₙ|(n+1/2)^{1/4}` below this are dropped.
pub const TERM_CUTOFF: f64 = 1e-14;

#[derive(Clone, Debug, Serialize)]
pub struct Eigenfunction {
    pub beta: f64,
    pub lambda: f64,
    q: Vec<f64>,
    zeta: Vec<f64>,
}

impl Eigenfunction {
    pub fn from_coefficients(cv: &CoefficientVector) -> Result<Self> {
        let last = cv
            .q
            .iter()
            .rposition(|v| v.abs() >= TERM_CUTOFF)
            .ok_or_else(|| Error::Numeric("coefficient vector is identically zero".into()))?;
        if last > MAX_ACCURATE_LEVEL {
            return Err(Error::input(format!(
                "eigenfunction needs {} oscillator levels, beyond the accurate range {MAX_ACCURATE_LEVEL}",
                last + 1
            )));
        }
        let q = cv.q[..=last].to_vec();
        let zeta = (0..=last).map(|n| (n as f64 + 0.5 - cv.lambda).sqrt()).collect();
        Ok(Eigenfunction {
            beta: cv.params.beta,
            lambda: cv.lambda,
            q,
            zeta,
        })
    }

    pub fn levels(&self) -> usize {
        self.q.len()
    }

    fn chi(&self, y: f64) -> Result<Vec<f64>> {
        if !(y.abs() <= MAX_ACCURATE_Y) {
            return Err(Error::input(format!("y = {y} is outside [-{MAX_ACCURATE_Y}, {MAX_ACCURATE_Y}]")));
        }
        hermite::hermite_values(self.q.len() - 1, y)
    }

    fn sum_with_chi(&self, chi: &[f64], x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        let s: f64 = self
            .q
            .iter()
            .zip(&self.zeta)
            .zip(chi)
            .map(|((q, z), c)| q * (-z * x.abs()).exp() * c)
            .sum();
        s * x.signum()
    }

    /// `Ψ(x, y)`; the value on `x = 0` is the mean of the two one-sided limits, zero.
    pub fn value(&self, x: f64, y: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::input(format!("x must be finite, got {x}")));
        }
        Ok(self.sum_with_chi(&self.chi(y)?, x))
    }

    /// `Ψ(0±, y)`.
    pub fn trace(&self, y: f64, side: f64) -> Result<f64> {
        let chi = self.chi(y)?;
        Ok(side.signum() * self.q.iter().zip(&chi).map(|(q, c)| q * c).sum::<f64>())
    }

    /// `Ψ(0+, y) − Ψ(0−, y)`.
    pub fn jump(&self, y: f64) -> Result<f64> {
        Ok(2.0 * self.trace(y, 1.0)?)
    }

    /// `∂ₓΨ(0±, y)` from the series (equal on both sides).
    pub fn normal_derivative(&self, y: f64) -> Result<f64> {
        let chi = self.chi(y)?;
        Ok(-self
            .q
            .iter()
            .zip(&self.zeta)
            .zip(&chi)
            .map(|((q, z), c)| q * z * c)
            .sum::<f64>())
    }

    pub fn sample(&self, xs: &[f64], ys: &[f64], exec: Execution) -> Result<GridField> {
        check_grid("x", xs, f64::INFINITY)?;
        check_grid("y", ys, MAX_ACCURATE_Y)?;
        let chis = ys.iter().map(|&y| self.chi(y)).collect::<Result<Vec<_>>>()?;
        let rows = par::map(exec, xs, |&x| chis.iter().map(|c| self.sum_with_chi(c, x)).collect::<Vec<_>>());
        Ok(GridField {
            x: xs.to_vec(),
            y: ys.to_vec(),
            values: rows,
        })
    }
}

fn check_grid(name: &str, g: &[f64], bound: f64) -> Result<()> {
    if g.is_empty() {
        return Err(Error::input(format!("{name}-grid is empty")));
    }
    if g.iter().any(|v| !v.is_finite() || v.abs() > bound) {
        return Err(Error::input(format!("{name}-grid leaves the accurate range |{name}| <= {bound}")));
    }
    if g.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::input(format!("{name}-grid must be strictly increasing")));
    }
    Ok(())
}

/// Samples of `Ψ` on a tensor grid; `values[i][j] = Ψ(x[i], y[j])`.
#[derive(Clone, Debug, Serialize)]
pub struct GridField {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl GridField {
    pub fn len(&self) -> usize {
        self.x.len() * self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Largest `|Ψ(−x,y) + Ψ(x,y)|` over grid points whose mirror is also on the grid.
    pub fn antisymmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, &x) in self.x.iter().enumerate() {
            if let Some(k) = self.x.iter().position(|&z| z == -x) {
                for j in 0..self.y.len() {
                    worst = worst.max((self.values[i][j] + self.values[k][j]).abs());
                }
            }
        }
        worst
    }
}

pub fn eigenfunction_field(cv: &CoefficientVector, xs: &[f64], ys: &[f64]) -> Result<GridField> {
    Eigenfunction::from_coefficients(cv)?.sample(xs, ys, Execution::default())
}

/// Interface-condition check on sampled `y` values.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MatchingReport {
    /// Max relative error of `[Ψ]·y / ∂ₓΨ(0+)` against β.
    pub jump_ratio_error: f64,
    /// Max relative mismatch of one-sided finite-difference derivatives at `0±`.
    pub derivative_mismatch: f64,
    /// Max relative gap between the finite-difference and series derivatives.
    pub derivative_fd_error: f64,
    pub samples: usize,
}

/// Second-order one-sided differences with step `h` at `x = 0±`.
pub fn matching_check(ef: &Eigenfunction, ys: &[f64], h: f64) -> Result<MatchingReport> {
    let mut rep = MatchingReport {
        jump_ratio_error: 0.0,
        derivative_mismatch: 0.0,
        derivative_fd_error: 0.0,
        samples: 0,
    };
    for &y in ys {
        if y.abs() < 1e-3 {
            continue;
        }
        let chi = ef.chi(y)?;
        let at = |x: f64| ef.sum_with_chi(&chi, x);
        let plus0 = ef.trace(y, 1.0)?;
        let minus0 = ef.trace(y, -1.0)?;
        let jump = plus0 - minus0;
        if jump.abs() <= 1e-8 {
            continue;
        }
        let d_plus = (-3.0 * plus0 + 4.0 * at(h) - at(2.0 * h)) / (2.0 * h);
        let d_minus = (3.0 * minus0 - 4.0 * at(-h) + at(-2.0 * h)) / (2.0 * h);
        let series = ef.normal_derivative(y)?;
        rep.jump_ratio_error = rep.jump_ratio_error.max((jump * y / d_plus - ef.beta).abs() / ef.beta);
        rep.derivative_mismatch = rep.derivative_mismatch.max((d_plus - d_minus).abs() / d_plus.abs());
        rep.derivative_fd_error = rep.derivative_fd_error.max((d_plus - series).abs() / series.abs());
        rep.samples += 1;
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{discrete_spectrum, eigenvector, CouplingParams, SolverOptions};

    fn ground_state(beta: f64) -> Eigenfunction {
        let p = CouplingParams::new(beta).unwrap();
        let r = discrete_spectrum(&p, &SolverOptions::default()).unwrap();
        Eigenfunction::from_coefficients(&eigenvector(&p, &r.eigenvalues[0]).unwrap()).unwrap()
    }

    #[test]
    fn interface_conditions_hold() {
        let ef = ground_state(10.0);
        let ys: Vec<f64> = (-40..=40).map(|i| i as f64 * 0.125).collect();
        let rep = matching_check(&ef, &ys, 1e-4).unwrap();
        assert!(rep.samples > 50);
        assert!(rep.jump_ratio_error < 1e-4, "{rep:?}");
        assert!(rep.derivative_mismatch < 1e-6, "{rep:?}");
        assert!(rep.derivative_fd_error < 1e-6, "{rep:?}");
    }

    #[test]
    fn field_is_odd_in_x() {
        let ef = ground_state(10.0);
        let xs: Vec<f64> = (-20..=20).map(|i| i as f64 * 0.25).collect();
        let ys: Vec<f64> = (-8..=8).map(|i| i as f64 * 0.5).collect();
        let f = ef.sample(&xs, &ys, Execution::Sequential).unwrap();
        assert_eq!(f.len(), 41 * 17);
        assert!(f.antisymmetry_defect() <= 1e-12);
        assert!(f.max_abs() > 0.0);
    }

    #[test]
    fn rejects_out_of_domain_grids() {
        let ef = ground_state(10.0);
        assert!(ef.sample(&[0.0, 1.0], &[0.0, 11.0], Execution::Sequential).is_err());
        assert!(ef.sample(&[1.0, 0.0], &[0.0], Execution::Sequential).is_err());
        assert!(ef.sample(&[], &[0.0], Execution::Sequential).is_err());
        assert!(ef.value(f64::NAN, 0.0).is_err());
    }
}
