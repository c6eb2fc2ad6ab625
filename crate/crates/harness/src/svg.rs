//! Deterministic SVG emission for the admissible-region figures and the
//! oscillation-decay plots.

use aniso_core::kernels::{in_gamma, CuspParams};

fn fmt(v: f64) -> String {
    format!("{v:.5}")
}

/// Fraction of a uniform sample grid of the square `[-1, 1]^2` that lies
/// in the admissible region.
pub fn gamma_fill_fraction(params: &CuspParams, samples_per_axis: usize) -> f64 {
    let n = samples_per_axis;
    let mut hits = 0usize;
    for i in 0..n {
        for j in 0..n {
            let x = -1.0 + 2.0 * (i as f64 + 0.5) / n as f64;
            let y = -1.0 + 2.0 * (j as f64 + 0.5) / n as f64;
            if in_gamma(&[x, y], params) {
                hits += 1;
            }
        }
    }
    hits as f64 / (n * n) as f64
}

/// Run-length encodes one sampled row into filled rectangles.
fn row_rects(
    out: &mut String,
    y: f64,
    cell: f64,
    n: usize,
    color: &str,
    mut member: impl FnMut(f64) -> bool,
) {
    let mut run_start: Option<usize> = None;
    for i in 0..=n {
        let inside = if i < n {
            let x = -1.0 + 2.0 * (i as f64 + 0.5) / n as f64;
            member(x)
        } else {
            false
        };
        match (inside, run_start) {
            (true, None) => run_start = Some(i),
            (false, Some(s)) => {
                let x0 = -1.0 + 2.0 * s as f64 / n as f64;
                let w = 2.0 * (i - s) as f64 / n as f64;
                out.push_str(&format!(
                    "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{color}\"/>\n",
                    fmt(x0),
                    fmt(y),
                    fmt(w),
                    fmt(cell)
                ));
                run_start = None;
            }
            _ => {}
        }
    }
}

/// The admissible region of the cusp kernel restricted to `[-1, 1]^2`,
/// shaded gray.
pub fn gamma_region_svg(params: &CuspParams, samples_per_axis: usize) -> String {
    let n = samples_per_axis;
    let cell = 2.0 / n as f64;
    let mut out = String::new();
    out.push_str(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"-1.1 -1.1 2.2 2.2\" width=\"480\" height=\"480\">\n",
    );
    out.push_str("<rect x=\"-1\" y=\"-1\" width=\"2\" height=\"2\" fill=\"white\" stroke=\"black\" stroke-width=\"0.01\"/>\n");
    for j in 0..n {
        let y_center = -1.0 + 2.0 * (j as f64 + 0.5) / n as f64;
        let y0 = -1.0 + 2.0 * j as f64 / n as f64;
        row_rects(&mut out, y0, cell, n, "#9a9a9a", |x| {
            in_gamma(&[x, y_center], params)
        });
    }
    out.push_str(&format!(
        "<text x=\"-1.05\" y=\"-1.02\" font-size=\"0.08\">orders ({}, {})</text>\n",
        fmt(params.alpha1),
        fmt(params.alpha2)
    ));
    out.push_str("</svg>\n");
    out
}

/// Near-axis (blue) and far-axis (red) decomposition of the admissible
/// region around a shifted center, clipped to the radius-`r` box of the
/// isotropic view square.
pub fn ab_decomposition_svg(
    params: &CuspParams,
    r_box: &aniso_core::geometry::AnisoBox,
    center: &[f64; 2],
    samples_per_axis: usize,
) -> String {
    let n = samples_per_axis;
    let cell = 2.0 / n as f64;
    let member_a = |z: &[f64; 2]| -> bool {
        let d1 = (z[0] - center[0]).abs();
        let d2 = (z[1] - center[1]).abs();
        let cusp = d2 <= d1.powf(1.0 / params.b1);
        let wide = d2 <= d1;
        r_box.contains(&[z[0], z[1]]) && if d1.max(d2) <= 1.0 { cusp } else { wide }
    };
    let member_b = |z: &[f64; 2]| -> bool {
        let d1 = (z[0] - center[0]).abs();
        let d2 = (z[1] - center[1]).abs();
        let cusp = d1 <= d2.powf(1.0 / params.b2);
        let wide = d1 <= d2;
        r_box.contains(&[z[0], z[1]]) && if d1.max(d2) <= 1.0 { cusp } else { wide }
    };
    let mut out = String::new();
    out.push_str(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"-1.1 -1.1 2.2 2.2\" width=\"480\" height=\"480\">\n",
    );
    out.push_str("<rect x=\"-1\" y=\"-1\" width=\"2\" height=\"2\" fill=\"white\"/>\n");
    for j in 0..n {
        let y_center = -1.0 + 2.0 * (j as f64 + 0.5) / n as f64;
        let y0 = -1.0 + 2.0 * j as f64 / n as f64;
        row_rects(&mut out, y0, cell, n, "#4a6fd4", |x| {
            member_a(&[x, y_center])
        });
        row_rects(&mut out, y0, cell, n, "#d44a4a", |x| {
            member_b(&[x, y_center]) && !member_a(&[x, y_center])
        });
    }
    // Outline of the clipping box.
    let (x_lo, x_hi) = r_box.side(0);
    let (y_lo, y_hi) = r_box.side(1);
    out.push_str(&format!(
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"0.012\"/>\n",
        fmt(x_lo),
        fmt(y_lo),
        fmt(x_hi - x_lo),
        fmt(y_hi - y_lo)
    ));
    out.push_str("</svg>\n");
    out
}

/// Log-scale decay plot: one polyline per series of oscillations.
pub fn oscillation_plot_svg(series: &[(String, Vec<f64>)]) -> String {
    let mut out = String::new();
    out.push_str(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 480 360\" width=\"480\" height=\"360\">\n",
    );
    out.push_str("<rect x=\"0\" y=\"0\" width=\"480\" height=\"360\" fill=\"white\"/>\n");
    out.push_str("<line x1=\"50\" y1=\"320\" x2=\"460\" y2=\"320\" stroke=\"black\"/>\n");
    out.push_str("<line x1=\"50\" y1=\"20\" x2=\"50\" y2=\"320\" stroke=\"black\"/>\n");
    out.push_str("<text x=\"200\" y=\"350\" font-size=\"14\">shrink level</text>\n");
    out.push_str("<text x=\"8\" y=\"170\" font-size=\"14\" transform=\"rotate(-90 14 170)\">log10 osc</text>\n");
    let all: Vec<f64> = series
        .iter()
        .flat_map(|(_, ys)| ys.iter())
        .filter(|v| **v > 0.0)
        .map(|v| v.log10())
        .collect();
    if all.is_empty() {
        out.push_str("</svg>\n");
        return out;
    }
    let y_min = all.iter().cloned().fold(f64::INFINITY, f64::min) - 0.2;
    let y_max = all.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 0.2;
    let max_len = series.iter().map(|(_, ys)| ys.len()).max().unwrap_or(2);
    let x_of = |i: usize| 50.0 + 410.0 * i as f64 / (max_len - 1).max(1) as f64;
    let y_of = |v: f64| 320.0 - 300.0 * (v.log10() - y_min) / (y_max - y_min);
    for (idx, (label, ys)) in series.iter().enumerate() {
        let hue = (idx * 47) % 360;
        let pts: Vec<String> = ys
            .iter()
            .enumerate()
            .filter(|(_, v)| **v > 0.0)
            .map(|(i, v)| format!("{},{}", fmt(x_of(i)), fmt(y_of(*v))))
            .collect();
        if pts.is_empty() {
            continue;
        }
        out.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"hsl({hue},60%,40%)\" stroke-width=\"1.5\"><title>{label}</title></polyline>\n",
            pts.join(" ")
        ));
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use aniso_core::kernels::cusp_params;

    #[test]
    fn isotropic_region_fills_the_square() {
        let p = cusp_params(1.3, 1.3, 0.5).unwrap();
        assert_eq!(gamma_fill_fraction(&p, 64), 1.0);
        let svg = gamma_region_svg(&p, 64);
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn strongly_anisotropic_region_is_pinched() {
        let p = cusp_params(0.1, 1.9, 0.1).unwrap();
        let frac = gamma_fill_fraction(&p, 128);
        assert!(frac < 0.2, "fraction {frac}");
        assert!(frac > 0.0);
    }

    #[test]
    fn svg_output_is_deterministic() {
        let p = cusp_params(0.5, 1.5, 0.5).unwrap();
        assert_eq!(gamma_region_svg(&p, 48), gamma_region_svg(&p, 48));
        let series = vec![("s0".to_string(), vec![1.0, 0.5, 0.2, 0.1])];
        assert_eq!(
            oscillation_plot_svg(&series),
            oscillation_plot_svg(&series)
        );
    }
}
