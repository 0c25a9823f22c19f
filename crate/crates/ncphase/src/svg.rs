//! Heatmaps as plain SVG rectangles.

use std::fmt::Write;

use crate::report::Grid;

const LOW: [f64; 3] = [68.0, 1.0, 84.0];
const HIGH: [f64; 3] = [253.0, 231.0, 37.0];

/// Linear ramp between two endpoint colours; `t` is clamped to `[0, 1]`.
pub fn ramp(t: f64) -> String {
    if !t.is_finite() {
        return "#808080".into();
    }
    let t = t.clamp(0.0, 1.0);
    let c: Vec<u8> = (0..3).map(|k| (LOW[k] + t * (HIGH[k] - LOW[k])).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

fn label(x: f64) -> String {
    format!("{x:.3e}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render(grid: &Grid, title: &str) -> String {
    let (nx, ny) = (grid.xs.len().max(1), grid.ys.len().max(1));
    let (left, top, pw, ph) = (90.0, 40.0, 440.0, 440.0);
    let (cw, chh) = (pw / nx as f64, ph / ny as f64);
    let finite = grid.values.iter().copied().filter(|v| v.is_finite());
    let lo = finite.clone().fold(f64::INFINITY, f64::min);
    let hi = finite.fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="680" height="560" viewBox="0 0 680 560" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="680" height="560" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, left + pw / 2.0, escape(title));
    for j in 0..grid.ys.len() {
        for i in 0..grid.xs.len() {
            let v = grid.at(i, j);
            // Row 0 at the bottom.
            let y = top + ph - (j + 1) as f64 * chh;
            let _ = writeln!(
                s,
                r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{}"/>"#,
                left + i as f64 * cw,
                y,
                cw + 0.05,
                chh + 0.05,
                ramp((v - lo) / span)
            );
        }
    }
    let _ = writeln!(s, r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    let first = |v: &[f64]| v.first().copied().unwrap_or(0.0);
    let last = |v: &[f64]| v.last().copied().unwrap_or(0.0);
    let base = top + ph + 16.0;
    let _ = writeln!(s, r#"<text x="{left}" y="{base}" text-anchor="start">{}</text>"#, label(first(&grid.xs)));
    let _ = writeln!(s, r#"<text x="{}" y="{base}" text-anchor="end">{}</text>"#, left + pw, label(last(&grid.xs)));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, left + pw / 2.0, base + 20.0, escape(&grid.x_label));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, left - 6.0, top + ph, label(first(&grid.ys)));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, left - 6.0, top + 10.0, label(last(&grid.ys)));
    let cy = top + ph / 2.0;
    let _ = writeln!(
        s,
        r#"<text x="20" y="{cy}" text-anchor="middle" transform="rotate(-90 20 {cy})">{}</text>"#,
        escape(&grid.y_label)
    );

    // Colour bar.
    let bx = left + pw + 30.0;
    let steps = 64;
    let bh = ph / steps as f64;
    for k in 0..steps {
        let t = k as f64 / (steps - 1) as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{bx}" y="{:.3}" width="20" height="{:.3}" fill="{}"/>"#,
            top + ph - (k + 1) as f64 * bh,
            bh + 0.05,
            ramp(t)
        );
    }
    let _ = writeln!(s, r#"<rect x="{bx}" y="{top}" width="20" height="{ph}" fill="none" stroke="black"/>"#);
    let (lo_l, hi_l) = if lo.is_finite() { (label(lo), label(hi)) } else { ("n/a".into(), "n/a".into()) };
    let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, bx + 26.0, top + ph, lo_l);
    let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, bx + 26.0, top + 10.0, hi_l);
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::linspace;

    #[test]
    fn ramp_endpoints() {
        assert_eq!(ramp(0.0), "#440154");
        assert_eq!(ramp(1.0), "#fde725");
        assert_eq!(ramp(-3.0), ramp(0.0));
        assert_eq!(ramp(f64::NAN), "#808080");
    }

    #[test]
    fn one_rect_per_cell() {
        let g = Grid::tabulate("q", "p<x>", linspace(0.0, 1.0, 5), linspace(0.0, 1.0, 3), |x, y| x + y);
        let svg = render(&g, "t & u");
        // cells + frame + background + 64 bar steps + bar frame
        assert_eq!(svg.matches("<rect").count(), 15 + 1 + 1 + 64 + 1);
        assert!(svg.contains("p&lt;x&gt;"));
        assert!(svg.contains("t &amp; u"));
        assert!(svg.ends_with("</svg>\n"));
    }
}
