//! Deterministic SVG drawings of instances and (fractional) solutions.

use std::fmt::Write;

use stabnum::geom::{self, Point, Segment};
use stabnum::instance::{Instance, Solution};
use stabnum::{Error, Result};

/// Stroke width of an edge with weight 1.
pub const BASE_STROKE: f64 = 4.0;
const CANVAS: f64 = 600.0;
const MARGIN: f64 = 24.0;
const RADIUS: f64 = 4.0;

/// What to draw on top of the points.
#[derive(Clone, Debug)]
pub enum Drawing<'a> {
    Points,
    Solution(&'a Solution),
    /// Edge weights of an LP solution and its value.
    Fractional { weights: &'a [(Segment, f64)], k: f64 },
}

struct Frame {
    xmin: f64,
    ymax: f64,
    scale: f64,
}

impl Frame {
    fn new(pts: &[Point]) -> Frame {
        let xs = pts.iter().map(|p| p.x as f64);
        let ys = pts.iter().map(|p| p.y as f64);
        let (xmin, xmax) = xs.fold((f64::MAX, f64::MIN), |(a, b), v| (a.min(v), b.max(v)));
        let (ymin, ymax) = ys.fold((f64::MAX, f64::MIN), |(a, b), v| (a.min(v), b.max(v)));
        let span = (xmax - xmin).max(ymax - ymin).max(1.0);
        Frame {
            xmin,
            ymax,
            scale: (CANVAS - 2.0 * MARGIN) / span,
        }
    }

    fn map(&self, p: Point) -> (f64, f64) {
        (
            MARGIN + (p.x as f64 - self.xmin) * self.scale,
            MARGIN + (self.ymax - p.y as f64) * self.scale,
        )
    }
}

fn num(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

/// Renders points as circles and edges as lines whose stroke width is
/// proportional to their weight. Identical input gives identical bytes.
pub fn render_svg(inst: &Instance, drawing: &Drawing<'_>) -> Result<String> {
    let pts = inst.points();
    let (edges, caption): (Vec<(Segment, f64)>, Option<String>) = match drawing {
        Drawing::Points => (Vec::new(), None),
        Drawing::Solution(sol) => {
            let mut edges = sol.edges.clone();
            edges.sort_unstable();
            geom::validate_edges(&edges, pts.len())?;
            let (k, _) = geom::stabbing_number(&edges, pts, sol.family)?;
            if k != sol.k {
                return Err(Error::InconsistentSolution(format!(
                    "stored k = {} but the edges give {k}",
                    sol.k
                )));
            }
            let caption = format!("{} {} k = {}", sol.problem, sol.family, sol.k);
            (edges.into_iter().map(|e| (e, 1.0)).collect(), Some(caption))
        }
        Drawing::Fractional { weights, k } => {
            let segs: Vec<Segment> = weights.iter().map(|w| w.0).collect();
            geom::validate_edges(&segs, pts.len())?;
            if weights.iter().any(|w| !w.1.is_finite() || w.1 < 0.0) {
                return Err(Error::InconsistentSolution("edge weights must be finite and nonnegative".into()));
            }
            let mut w: Vec<(Segment, f64)> = weights.iter().copied().filter(|w| w.1 > 1e-9).collect();
            w.sort_by_key(|a| a.0);
            (w, Some(format!("k = {}", num(*k))))
        }
    };

    let frame = Frame::new(pts);
    let mut out = String::new();
    let size = num(CANVAS);
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(out, r#"<g stroke="black" stroke-linecap="round">"#).unwrap();
    for (e, w) in &edges {
        let (x1, y1) = frame.map(pts[e.a()]);
        let (x2, y2) = frame.map(pts[e.b()]);
        writeln!(
            out,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke-width="{}"/>"#,
            num(x1),
            num(y1),
            num(x2),
            num(y2),
            num(BASE_STROKE * w)
        )
        .unwrap();
    }
    writeln!(out, "</g>").unwrap();
    writeln!(out, r#"<g fill="crimson">"#).unwrap();
    for &p in pts {
        let (x, y) = frame.map(p);
        writeln!(out, r#"<circle cx="{}" cy="{}" r="{}"/>"#, num(x), num(y), num(RADIUS)).unwrap();
    }
    writeln!(out, "</g>").unwrap();
    if let Some(text) = caption {
        writeln!(
            out,
            r#"<text x="{}" y="{}" font-family="monospace" font-size="14">{}</text>"#,
            num(MARGIN),
            num(MARGIN / 2.0 + 4.0),
            escape(&text)
        )
        .unwrap();
    }
    writeln!(out, "</svg>").unwrap();
    Ok(out)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
