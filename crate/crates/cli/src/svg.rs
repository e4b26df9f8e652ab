//! Heat-map rendering of `|Ψ|` on a tensor grid.

use std::fmt::Write as _;

use deltaprime::solver::GridField;

const SIZE: f64 = 600.0;

/// White at zero to deep blue at the maximum of `|Ψ|`.
fn color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", lerp(255.0, 8.0), lerp(255.0, 48.0), lerp(255.0, 107.0))
}

pub fn render(field: &GridField, title: &str) -> String {
    let (nx, ny) = (field.x.len(), field.y.len());
    let (w, h) = (SIZE / nx as f64, SIZE / ny as f64);
    let max = field.max_abs().max(f64::MIN_POSITIVE);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 -30 {SIZE} {}" shape-rendering="crispEdges">"#,
        SIZE,
        SIZE + 30.0,
        SIZE + 30.0
    );
    let _ = writeln!(s, r#"<text x="4" y="-10" font-family="sans-serif" font-size="14">{title}</text>"#);
    for (i, row) in field.values.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            // y increases upwards.
            let _ = writeln!(
                s,
                r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{}"/>"#,
                i as f64 * w,
                (ny - 1 - j) as f64 * h,
                w,
                h,
                color(v.abs() / max)
            );
        }
    }
    s.push_str("</svg>\n");
    s
}
