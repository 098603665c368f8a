//! Standalone SVG plot of the BSADF sequence against its critical-value
//! sequence, with shaded rectangles for stamped episodes and a dated axis.

use bubble_core::{BsadfSequence, CvSequence, Episode, Error, Series};

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 440.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 18.0;
const MARGIN_TOP: f64 = 42.0;
const MARGIN_BOTTOM: f64 = 58.0;

fn escape_xml(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
        .replace('\'', "&apos;")
}

/// Render the date-stamping picture: one polyline for the statistic
/// sequence, one for the threshold, and one shaded region per episode.
pub fn render_plot(
    bsadf: &BsadfSequence,
    cv: &CvSequence,
    episodes: &[Episode],
    series: &Series,
) -> Result<String, Error> {
    let n = bsadf.stats.len();
    if n != cv.values.len() {
        return Err(Error::LengthMismatch {
            left: n,
            right: cv.values.len(),
        });
    }
    if bsadf.endpoints.last() != Some(&(series.len() - 1)) {
        return Err(Error::LengthMismatch {
            left: bsadf.endpoints.last().map_or(0, |e| e + 1),
            right: series.len(),
        });
    }

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x_at = |i: usize| {
        if n <= 1 {
            MARGIN_LEFT + plot_w / 2.0
        } else {
            MARGIN_LEFT + i as f64 * plot_w / (n - 1) as f64
        }
    };

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in bsadf.stats.iter().flatten().chain(cv.values.iter()) {
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        lo = -1.0;
        hi = 1.0;
    }
    let pad = 0.08 * (hi - lo).max(1e-9);
    let (lo, hi) = (lo - pad, hi + pad);
    let y_at = |v: f64| MARGIN_TOP + (hi - v) * plot_h / (hi - lo);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    svg.push_str(&format!(
        "  <title>{} BSADF vs {:.0}% critical values</title>\n",
        escape_xml(series.name()),
        cv.level * 100.0
    ));

    // Episode shading underneath everything else.
    for ep in episodes {
        let x0 = x_at(ep.start_index);
        let x1 = x_at(ep.end_index);
        svg.push_str(&format!(
            "  <rect class=\"episode\" x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" \
             fill=\"#e8a33d\" fill-opacity=\"0.30\"/>\n",
            x0,
            MARGIN_TOP,
            (x1 - x0).max(1.0),
            plot_h
        ));
    }

    // Axes.
    svg.push_str(&format!(
        "  <line x1=\"{MARGIN_LEFT}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#333\"/>\n",
        MARGIN_TOP + plot_h,
        WIDTH - MARGIN_RIGHT,
        MARGIN_TOP + plot_h
    ));
    svg.push_str(&format!(
        "  <line x1=\"{MARGIN_LEFT}\" y1=\"{MARGIN_TOP}\" x2=\"{MARGIN_LEFT}\" y2=\"{:.2}\" stroke=\"#333\"/>\n",
        MARGIN_TOP + plot_h
    ));

    // Y ticks.
    for k in 0..=4 {
        let v = lo + (hi - lo) * k as f64 / 4.0;
        let y = y_at(v);
        svg.push_str(&format!(
            "  <line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{MARGIN_LEFT}\" y2=\"{y:.2}\" stroke=\"#333\"/>\n",
            MARGIN_LEFT - 4.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{v:.2}</text>\n",
            MARGIN_LEFT - 8.0,
            y + 4.0
        ));
    }

    // Date labels along the x axis.
    let ticks = 6.min(n);
    for k in 0..ticks {
        let i = if ticks <= 1 { 0 } else { k * (n - 1) / (ticks - 1) };
        let x = x_at(i);
        let label = series.date_label(bsadf.endpoints[i]);
        svg.push_str(&format!(
            "  <line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#333\"/>\n",
            MARGIN_TOP + plot_h,
            MARGIN_TOP + plot_h + 4.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>\n",
            MARGIN_TOP + plot_h + 18.0,
            escape_xml(&label)
        ));
    }

    // Critical-value sequence, then the statistic on top.
    let cv_points: Vec<String> = cv
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| format!("{:.2},{:.2}", x_at(i), y_at(*v)))
        .collect();
    svg.push_str(&format!(
        "  <polyline class=\"cv\" points=\"{}\" fill=\"none\" stroke=\"#c0392b\" \
         stroke-width=\"1.5\" stroke-dasharray=\"6 3\"/>\n",
        cv_points.join(" ")
    ));
    let stat_points: Vec<String> = bsadf
        .stats
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|v| format!("{:.2},{:.2}", x_at(i), y_at(v))))
        .collect();
    svg.push_str(&format!(
        "  <polyline class=\"bsadf\" points=\"{}\" fill=\"none\" stroke=\"#2c6fbb\" \
         stroke-width=\"1.8\"/>\n",
        stat_points.join(" ")
    ));

    // Legend.
    let legend_y = MARGIN_TOP - 18.0;
    svg.push_str(&format!(
        "  <line x1=\"{MARGIN_LEFT}\" y1=\"{legend_y}\" x2=\"{:.2}\" y2=\"{legend_y}\" \
         stroke=\"#2c6fbb\" stroke-width=\"1.8\"/>\n",
        MARGIN_LEFT + 26.0
    ));
    svg.push_str(&format!(
        "  <text x=\"{:.2}\" y=\"{:.2}\">BSADF</text>\n",
        MARGIN_LEFT + 32.0,
        legend_y + 4.0
    ));
    svg.push_str(&format!(
        "  <line x1=\"{:.2}\" y1=\"{legend_y}\" x2=\"{:.2}\" y2=\"{legend_y}\" \
         stroke=\"#c0392b\" stroke-width=\"1.5\" stroke-dasharray=\"6 3\"/>\n",
        MARGIN_LEFT + 110.0,
        MARGIN_LEFT + 136.0
    ));
    svg.push_str(&format!(
        "  <text x=\"{:.2}\" y=\"{:.2}\">{:.0}% critical value</text>\n",
        MARGIN_LEFT + 142.0,
        legend_y + 4.0,
        cv.level * 100.0
    ));

    svg.push_str("</svg>\n");
    Ok(svg)
}
