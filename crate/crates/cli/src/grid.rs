//! Parsing of `lo:hi:step` ranges and `lo:hi:points` sampling grids.

use std::str::FromStr;

fn three_parts(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected lo:hi:x, got '{s}'"));
    }
    let mut out = [0.0; 3];
    for (slot, p) in out.iter_mut().zip(&parts) {
        *slot = f64::from_str(p.trim()).map_err(|_| format!("'{p}' is not a number in '{s}'"))?;
        if !slot.is_finite() {
            return Err(format!("'{p}' is not finite in '{s}'"));
        }
    }
    Ok(out)
}

/// `lo:hi:step`, both ends inclusive; the last point is kept if it lies within
/// a relative `1e-9` of `hi`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRange(pub Vec<f64>);

impl FromStr for StepRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let [lo, hi, step] = three_parts(s)?;
        if !(step > 0.0) {
            return Err(format!("step must be positive in '{s}'"));
        }
        if hi < lo {
            return Err(format!("hi < lo in '{s}'"));
        }
        let n = ((hi - lo) / step * (1.0 + 1e-9)).floor() as usize + 1;
        if n > 1_000_000 {
            return Err(format!("'{s}' has {n} points; at most 1000000 are allowed"));
        }
        Ok(StepRange((0..n).map(|i| lo + step * i as f64).collect()))
    }
}

/// `lo:hi:points`, `points` equally spaced values including both ends.
#[derive(Clone, Debug, PartialEq)]
pub struct Linspace(pub Vec<f64>);

impl FromStr for Linspace {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let [lo, hi, points] = three_parts(s)?;
        if points.fract() != 0.0 || !(2.0..=100_000.0).contains(&points) {
            return Err(format!("point count must be an integer in [2, 100000] in '{s}'"));
        }
        if !(hi > lo) {
            return Err(format!("need lo < hi in '{s}'"));
        }
        let n = points as usize;
        let m = (n - 1) as f64;
        // Weighted form keeps a grid symmetric about zero exactly symmetric.
        Ok(Linspace(
            (0..n)
                .map(|i| match i {
                    0 => lo,
                    _ if i == n - 1 => hi,
                    _ => (lo * (m - i as f64) + hi * i as f64) / m,
                })
                .collect(),
        ))
    }
}

impl Default for Linspace {
    fn default() -> Self {
        "-5:5:201".parse().unwrap()
    }
}
