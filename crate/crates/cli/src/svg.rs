//! Minimal model-versus-data scatter plot.

/// A point: (empirical, predicted, is_us).
pub type Point = (f64, f64, bool);

pub fn scatter(points: &[Point], title: &str) -> String {
    const SIZE: f64 = 480.0;
    const MARGIN: f64 = 50.0;
    let (lo, hi) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(x, y, _)| {
        (lo.min(x).min(y), hi.max(x).max(y))
    });
    let (lo, hi) = if lo.is_finite() && hi > lo { (lo - 0.1, hi + 0.1) } else { (-1.0, 1.0) };
    let span = SIZE - 2.0 * MARGIN;
    let px = |v: f64| MARGIN + (v - lo) / (hi - lo) * span;
    let py = |v: f64| SIZE - MARGIN - (v - lo) / (hi - lo) * span;

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n"
    );
    svg.push_str(&format!("<rect width=\"{SIZE}\" height=\"{SIZE}\" fill=\"white\"/>\n"));
    svg.push_str(&format!(
        "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#999\" stroke-dasharray=\"4 4\"/>\n",
        px(lo),
        py(lo),
        px(hi),
        py(hi)
    ));
    svg.push_str(&format!(
        "<rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{span}\" height=\"{span}\" fill=\"none\" stroke=\"black\"/>\n"
    ));
    for &(x, y, us) in points {
        let color = if us { "#c0392b" } else { "#2471a3" };
        svg.push_str(&format!("<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3\" fill=\"{color}\"/>\n", px(x), py(y)));
    }
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"14\" text-anchor=\"middle\">{}</text>\n",
        SIZE / 2.0,
        MARGIN / 2.0,
        escape(title)
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">empirical mean z</text>\n",
        SIZE / 2.0,
        SIZE - 15.0
    ));
    svg.push_str(&format!(
        "<text x=\"15\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 15 {})\">predicted mean z</text>\n",
        SIZE / 2.0,
        SIZE / 2.0
    ));
    svg.push_str(&format!("<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"#2471a3\">UK</text>\n", MARGIN + 8.0, MARGIN + 16.0));
    svg.push_str(&format!("<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"#c0392b\">US</text>\n", MARGIN + 8.0, MARGIN + 30.0));
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
