//! Minimal self-contained SVG line plots (polyline paths only). The plot
//! layer never feeds back into any computation.

use std::io::Write;
use std::path::Path;

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

pub struct Series<'a> {
    pub label: &'a str,
    pub points: &'a [(f64, f64)],
}

/// Write a line plot; y values can be mapped through log10 for decay plots.
pub fn write_line_plot(
    path: &Path,
    title: &str,
    series: &[Series],
    log_y: bool,
) -> std::io::Result<()> {
    let (w, h) = (640.0, 420.0);
    let (ml, mr, mt, mb) = (70.0, 20.0, 40.0, 50.0);
    let map_y = |y: f64| if log_y { y.abs().max(1e-300).log10() } else { y };
    let mut xmin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for s in series {
        for &(x, y) in s.points {
            let y = map_y(y);
            xmin = xmin.min(x);
            xmax = xmax.max(x);
            ymin = ymin.min(y);
            ymax = ymax.max(y);
        }
    }
    if !xmin.is_finite() || xmax <= xmin {
        xmax = xmin + 1.0;
    }
    if !ymin.is_finite() || ymax <= ymin {
        ymax = ymin + 1.0;
    }
    let sx = (w - ml - mr) / (xmax - xmin);
    let sy = (h - mt - mb) / (ymax - ymin);
    let px = |x: f64| ml + (x - xmin) * sx;
    let py = |y: f64| h - mb - (map_y(y) - ymin) * sy;

    let mut out = std::fs::File::create(path)?;
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    )?;
    writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#)?;
    writeln!(
        out,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        w / 2.0,
        title
    )?;
    // Axes.
    writeln!(
        out,
        r#"<path d="M {ml} {mt} L {ml} {yb} L {xr} {yb}" stroke="black" fill="none"/>"#,
        yb = h - mb,
        xr = w - mr,
    )?;
    for (k, s) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<String> = s.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        writeln!(
            out,
            r#"<polyline points="{}" stroke="{color}" fill="none" stroke-width="1.5"/>"#,
            pts.join(" ")
        )?;
        writeln!(
            out,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" fill="{color}">{}</text>"#,
            w - mr - 150.0,
            mt + 16.0 * (k as f64 + 1.0),
            s.label
        )?;
    }
    // Axis range labels.
    writeln!(
        out,
        r#"<text x="{ml}" y="{}" font-family="sans-serif" font-size="11">{:.3e} .. {:.3e}{}</text>"#,
        h - mb + 30.0,
        xmin,
        xmax,
        if log_y { " (y log10)" } else { "" }
    )?;
    writeln!(out, "</svg>")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_well_formed_svg() {
        let dir = std::env::temp_dir().join("cutdg_svg_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("plot.svg");
        let pts: Vec<(f64, f64)> = (0..10).map(|k| (k as f64, (k as f64 * 0.3).sin())).collect();
        write_line_plot(&path, "test", &[Series { label: "s", points: &pts }], false).unwrap();
        let body = std::fs::read_to_string(&path).unwrap();
        assert!(body.starts_with("<svg"));
        assert!(body.trim_end().ends_with("</svg>"));
        assert!(body.contains("polyline"));
    }
}
