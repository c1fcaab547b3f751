//! Minimal SVG charts from the exported CSV files.
//!
//! `line`: first column on x, one polyline per remaining column.
//! `heatmap`: long format `y, x, z` (the map exports), one rect per cell.
//! Output depends only on the input bytes.

use std::fmt::Write as _;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];
const VIRIDIS: [(f64, f64, f64); 5] = [
    (68.0, 1.0, 84.0),
    (59.0, 82.0, 139.0),
    (33.0, 145.0, 140.0),
    (94.0, 201.0, 98.0),
    (253.0, 231.0, 37.0),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChartKind {
    Line,
    Heatmap,
}

#[derive(Debug)]
pub struct RenderError(pub String);

impl std::fmt::Display for RenderError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "malformed CSV: {}", self.0)
    }
}

impl std::error::Error for RenderError {}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

fn read_table(csv_text: &str) -> Result<Table, RenderError> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(csv_text.as_bytes());
    let header: Vec<String> =
        r.headers().map_err(|e| RenderError(e.to_string()))?.iter().map(str::to_string).collect();
    if header.len() < 2 {
        return Err(RenderError("need at least two columns".into()));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| RenderError(e.to_string()))?;
        let row = rec
            .iter()
            .map(|v| v.parse::<f64>().map_err(|_| RenderError(format!("row {}: `{v}` is not a number", i + 2))))
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(RenderError("no data rows".into()));
    }
    Ok(Table { header, rows })
}

fn label(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 {
        "0".into()
    } else if (1e-2..1e4).contains(&a) {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.2e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }

    fn axes(&self, out: &mut String, xlabel: &str, ylabel: &str) {
        let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
        let _ = writeln!(out, r##"<rect x="{x0}" y="{y0}" width="{}" height="{}" fill="none" stroke="#000"/>"##, x1 - x0, y1 - y0);
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let xv = self.x.0 + f * (self.x.1 - self.x.0);
            let yv = self.y.0 + f * (self.y.1 - self.y.0);
            let (px, py) = (self.px(xv), self.py(yv));
            let _ = writeln!(out, r##"<line x1="{px:.2}" y1="{y1}" x2="{px:.2}" y2="{:.2}" stroke="#000"/>"##, y1 + 5.0);
            let _ = writeln!(out, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, y1 + 18.0, label(xv));
            let _ = writeln!(out, r##"<line x1="{:.2}" y1="{py:.2}" x2="{x0}" y2="{py:.2}" stroke="#000"/>"##, x0 - 5.0);
            let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, x0 - 8.0, py + 4.0, label(yv));
        }
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, HEIGHT - 8.0, escape(xlabel));
        let _ = writeln!(
            out,
            r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0,
            escape(ylabel)
        );
    }
}

fn open() -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"11\">\n<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n"
    )
}

fn line_chart(t: &Table) -> String {
    let x: Vec<f64> = t.rows.iter().map(|r| r[0]).collect();
    let frame = Frame {
        x: range(x.iter().copied()),
        y: range(t.rows.iter().flat_map(|r| r[1..].iter().copied())),
    };
    let mut out = open();
    frame.axes(&mut out, &t.header[0], if t.header.len() == 2 { &t.header[1] } else { "" });
    for c in 1..t.header.len() {
        let color = PALETTE[(c - 1) % PALETTE.len()];
        let pts: Vec<String> = t
            .rows
            .iter()
            .filter(|r| r[0].is_finite() && r[c].is_finite())
            .map(|r| format!("{:.2},{:.2}", frame.px(r[0]), frame.py(r[c])))
            .collect();
        let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        let ly = TOP + 14.0 * c as f64;
        let lx = WIDTH - RIGHT + 10.0;
        let _ = writeln!(out, r#"<line x1="{lx}" y1="{:.2}" x2="{}" y2="{:.2}" stroke="{color}" stroke-width="2"/>"#, ly - 4.0, lx + 16.0, ly - 4.0);
        let _ = writeln!(out, r#"<text x="{}" y="{ly:.2}">{}</text>"#, lx + 20.0, escape(&t.header[c]));
    }
    out.push_str("</svg>\n");
    out
}

fn viridis(f: f64) -> String {
    let f = f.clamp(0.0, 1.0) * (VIRIDIS.len() - 1) as f64;
    let i = (f.floor() as usize).min(VIRIDIS.len() - 2);
    let s = f - i as f64;
    let (a, b) = (VIRIDIS[i], VIRIDIS[i + 1]);
    let mix = |p: f64, q: f64| (p + (q - p) * s).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

fn unique_sorted(v: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut u: Vec<f64> = v.collect();
    u.sort_by(f64::total_cmp);
    u.dedup();
    u
}

fn edges(centers: &[f64]) -> Vec<f64> {
    if centers.len() == 1 {
        return vec![centers[0] - 0.5, centers[0] + 0.5];
    }
    let n = centers.len();
    let mut e = Vec::with_capacity(n + 1);
    e.push(centers[0] - 0.5 * (centers[1] - centers[0]));
    for i in 0..n - 1 {
        e.push(0.5 * (centers[i] + centers[i + 1]));
    }
    e.push(centers[n - 1] + 0.5 * (centers[n - 1] - centers[n - 2]));
    e
}

fn heatmap(t: &Table) -> Result<String, RenderError> {
    if t.header.len() < 3 {
        return Err(RenderError("a heatmap needs columns `y, x, z`".into()));
    }
    let ys = unique_sorted(t.rows.iter().map(|r| r[0]));
    let xs = unique_sorted(t.rows.iter().map(|r| r[1]));
    let (ye, xe) = (edges(&ys), edges(&xs));
    let (zlo, zhi) = range(t.rows.iter().map(|r| r[2]));
    let frame = Frame { x: (xe[0], xe[xe.len() - 1]), y: (ye[0], ye[ye.len() - 1]) };
    let mut out = open();
    for r in &t.rows {
        if !r[2].is_finite() {
            continue;
        }
        let i = xs.binary_search_by(|v| v.total_cmp(&r[1])).expect("value from the same table");
        let j = ys.binary_search_by(|v| v.total_cmp(&r[0])).expect("value from the same table");
        let (x0, x1) = (frame.px(xe[i]), frame.px(xe[i + 1]));
        let (y0, y1) = (frame.py(ye[j + 1]), frame.py(ye[j]));
        let _ = writeln!(
            out,
            r#"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
            (x1 - x0).max(0.01),
            (y1 - y0).max(0.01),
            viridis((r[2] - zlo) / (zhi - zlo))
        );
    }
    frame.axes(&mut out, &t.header[1], &t.header[0]);
    let bx = WIDTH - RIGHT + 20.0;
    let bh = HEIGHT - TOP - BOTTOM;
    for k in 0..50 {
        let f = k as f64 / 49.0;
        let _ = writeln!(
            out,
            r#"<rect x="{bx}" y="{:.2}" width="16" height="{:.2}" fill="{}"/>"#,
            TOP + (1.0 - f) * bh - bh / 50.0,
            bh / 50.0 + 0.5,
            viridis(f)
        );
    }
    let _ = writeln!(out, r#"<text x="{}" y="{:.2}">{}</text>"#, bx + 20.0, TOP + 8.0, label(zhi));
    let _ = writeln!(out, r#"<text x="{}" y="{:.2}">{}</text>"#, bx + 20.0, TOP + bh, label(zlo));
    let _ = writeln!(out, r#"<text x="{}" y="{:.2}">{}</text>"#, bx + 20.0, TOP + bh / 2.0, escape(&t.header[2]));
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn render_svg(csv_text: &str, kind: ChartKind) -> Result<String, RenderError> {
    let t = read_table(csv_text)?;
    match kind {
        ChartKind::Line => Ok(line_chart(&t)),
        ChartKind::Heatmap => heatmap(&t),
    }
}
