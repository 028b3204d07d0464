//! Minimal SVG plotting for the `report` subcommand. Fixed 800x520
//! canvas, optional log axes with decade ticks, polyline or scatter
//! series. Coordinates are rounded to two decimals so the same data
//! always renders to the same bytes.

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 520.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 776.0;
const TOP: f64 = 42.0;
const BOTTOM: f64 = 466.0;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// Connect the points; otherwise draw a scatter.
    pub line: bool,
}

pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

struct Axis {
    min: f64,
    max: f64,
    log: bool,
}

impl Axis {
    /// Maps a data value into the transformed [min, max] coordinate;
    /// log axes work in log10 space and reject non-positive values.
    fn place(&self, v: f64) -> Option<f64> {
        let t = if self.log {
            if v <= 0.0 {
                return None;
            }
            v.log10()
        } else {
            v
        };
        t.is_finite().then_some((t - self.min) / (self.max - self.min))
    }

    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Axis {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for v in values {
            let t = if log {
                if v <= 0.0 {
                    continue;
                }
                v.log10()
            } else {
                v
            };
            if t.is_finite() {
                min = min.min(t);
                max = max.max(t);
            }
        }
        if min > max {
            // Nothing plottable; pick an arbitrary window.
            min = 0.0;
            max = 1.0;
        }
        if min == max {
            min -= 0.5;
            max += 0.5;
        }
        let pad = 0.04 * (max - min);
        Axis {
            min: min - pad,
            max: max + pad,
            log,
        }
    }

    /// Tick positions in data space with their labels.
    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let lo = self.min.ceil() as i64;
            let hi = self.max.floor() as i64;
            let span = (hi - lo).max(0) as usize + 1;
            let step = span.div_ceil(8).max(1) as i64;
            (lo..=hi)
                .step_by(step as usize)
                .map(|e| (10f64.powi(e as i32), log_label(e)))
                .collect()
        } else {
            let step = nice_step((self.max - self.min) / 5.0);
            let mut t = (self.min / step).ceil() * step;
            let mut out = Vec::new();
            while t <= self.max + step * 1e-9 {
                // Snap values like 0.30000000000000004 back to 0.3.
                let v = (t / step).round() * step;
                out.push((v, lin_label(v)));
                t += step;
            }
            out
        }
    }
}

/// Rounds up to the 1-2-5 ladder.
fn nice_step(raw: f64) -> f64 {
    if raw <= 0.0 || !raw.is_finite() {
        return 1.0;
    }
    let mag = 10f64.powf(raw.log10().floor());
    let frac = raw / mag;
    let nice = if frac <= 1.0 {
        1.0
    } else if frac <= 2.0 {
        2.0
    } else if frac <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn log_label(exp: i64) -> String {
    match exp {
        0 => "1".into(),
        1 => "10".into(),
        2 => "100".into(),
        3 => "1000".into(),
        e => format!("1e{e}"),
    }
}

fn lin_label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e5 || v.abs() < 1e-3 {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render(plot: &Plot) -> String {
    let xs = Axis::fit(
        plot.series.iter().flat_map(|s| s.points.iter().map(|p| p.0)),
        plot.log_x,
    );
    let ys = Axis::fit(
        plot.series.iter().flat_map(|s| s.points.iter().map(|p| p.1)),
        plot.log_y,
    );
    let px = |v: f64| xs.place(v).map(|f| LEFT + f * (RIGHT - LEFT));
    let py = |v: f64| ys.place(v).map(|f| BOTTOM - f * (BOTTOM - TOP));

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    out.push_str("<g font-family=\"monospace\" font-size=\"12\" fill=\"#222\">\n");
    out.push_str(&format!(
        "<text x=\"{:.2}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
        (LEFT + RIGHT) / 2.0,
        escape(&plot.title)
    ));

    for (v, label) in xs.ticks() {
        if let Some(x) = px(v) {
            out.push_str(&format!(
                "<line x1=\"{x:.2}\" y1=\"{TOP}\" x2=\"{x:.2}\" y2=\"{BOTTOM}\" stroke=\"#ddd\"/>\n"
            ));
            out.push_str(&format!(
                "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>\n",
                BOTTOM + 18.0,
                escape(&label)
            ));
        }
    }
    for (v, label) in ys.ticks() {
        if let Some(y) = py(v) {
            out.push_str(&format!(
                "<line x1=\"{LEFT}\" y1=\"{y:.2}\" x2=\"{RIGHT}\" y2=\"{y:.2}\" stroke=\"#ddd\"/>\n"
            ));
            out.push_str(&format!(
                "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>\n",
                LEFT - 6.0,
                y + 4.0,
                escape(&label)
            ));
        }
    }
    out.push_str(&format!(
        "<rect x=\"{LEFT}\" y=\"{TOP}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"#888\"/>\n",
        RIGHT - LEFT,
        BOTTOM - TOP
    ));
    out.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>\n",
        (LEFT + RIGHT) / 2.0,
        HEIGHT - 12.0,
        escape(&plot.x_label)
    ));
    out.push_str(&format!(
        "<text x=\"18\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.2})\">{}</text>\n",
        (TOP + BOTTOM) / 2.0,
        (TOP + BOTTOM) / 2.0,
        escape(&plot.y_label)
    ));

    for (i, series) in plot.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let placed: Vec<(f64, f64)> = series
            .points
            .iter()
            .filter_map(|&(x, y)| Some((px(x)?, py(y)?)))
            .collect();
        if series.line && placed.len() > 1 {
            let pts: Vec<String> = placed
                .iter()
                .map(|(x, y)| format!("{x:.2},{y:.2}"))
                .collect();
            out.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                pts.join(" ")
            ));
        }
        if !series.line || placed.len() <= 60 {
            for (x, y) in &placed {
                out.push_str(&format!(
                    "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"2.5\" fill=\"{color}\"/>\n"
                ));
            }
        }
    }

    if plot.series.len() > 1 {
        for (i, series) in plot.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let y = TOP + 16.0 + 16.0 * i as f64;
            out.push_str(&format!(
                "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
                RIGHT - 150.0,
                RIGHT - 126.0
            ));
            out.push_str(&format!(
                "<text x=\"{:.2}\" y=\"{:.2}\">{}</text>\n",
                RIGHT - 120.0,
                y + 4.0,
                escape(&series.label)
            ));
        }
    }

    out.push_str("</g>\n</svg>\n");
    out
}
