//! Deterministic SVG rendering of base diagrams.
//!
//! Output is a pure function of the input: fixed element order, fixed
//! formatting (two decimals), no ids or timestamps.  The vertical axis is
//! flipped so diagrams appear in the usual mathematical orientation.

use crate::base::{cut_endpoint, opposite_endpoint, BaseDiagram};
use crate::coeff::Rational;

fn f2(v: f64) -> String {
    // Round first so "-0.00" cannot appear.
    let r = (v * 100.0).round() / 100.0 + 0.0;
    format!("{r:.2}")
}

fn pt(p: &(Rational, Rational)) -> (f64, f64) {
    (p.0.to_f64(), -p.1.to_f64())
}

/// Renders the polygon, each node as a labeled cross, its cut ray dashed,
/// and the opposite half of its eigenline dotted.
pub fn render_svg(d: &BaseDiagram) -> String {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for v in &d.polygon {
        let (x, y) = pt(v);
        xs.push(x);
        ys.push(y);
    }
    for n in &d.nodes {
        let (x, y) = pt(&n.pos);
        xs.push(x);
        ys.push(y);
    }
    let min_x = xs.iter().copied().fold(f64::INFINITY, f64::min).min(0.0);
    let max_x = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(min_x + 1.0);
    let min_y = ys.iter().copied().fold(f64::INFINITY, f64::min).min(0.0);
    let max_y = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(min_y + 1.0);
    let dim = (max_x - min_x).max(max_y - min_y);
    let margin = 0.05 * dim;
    let view = format!(
        "{} {} {} {}",
        f2(min_x - margin),
        f2(min_y - margin),
        f2(max_x - min_x + 2.0 * margin),
        f2(max_y - min_y + 2.0 * margin)
    );

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"{view}\">\n"
    ));

    let mut path = String::from("M");
    for (i, v) in d.polygon.iter().enumerate() {
        let (x, y) = pt(v);
        if i > 0 {
            path.push_str(" L");
        }
        path.push_str(&format!(" {} {}", f2(x), f2(y)));
    }
    path.push_str(" Z");
    out.push_str(&format!(
        "  <path class=\"polygon\" d=\"{path}\" fill=\"#f5efdf\" stroke=\"#272420\" \
         stroke-width=\"{}\" stroke-linejoin=\"round\"/>\n",
        f2(0.008 * dim)
    ));

    for (i, n) in d.nodes.iter().enumerate() {
        let (cx, cy) = pt(&n.pos);
        let ray = |target: Option<(Rational, Rational)>, flip: f64| -> (f64, f64) {
            match target {
                Some(p) => pt(&p),
                None => {
                    // Invalid diagrams may have no boundary hit; draw a stub.
                    let (ex, ey) = (n.eigen.0 as f64, -(n.eigen.1 as f64));
                    let norm = (ex * ex + ey * ey).sqrt();
                    let s = flip * n.cut.sign() as f64 * 0.2 * dim / norm;
                    (cx + s * ex, cy + s * ey)
                }
            }
        };
        let (ox, oy) = ray(opposite_endpoint(d, i), -1.0);
        out.push_str(&format!(
            "  <line class=\"eigen\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" \
             stroke=\"#6b675f\" stroke-width=\"{}\" stroke-linecap=\"round\" \
             stroke-dasharray=\"{} {}\"/>\n",
            f2(cx),
            f2(cy),
            f2(ox),
            f2(oy),
            f2(0.006 * dim),
            f2(0.001 * dim),
            f2(0.022 * dim)
        ));
        let (ux, uy) = ray(cut_endpoint(d, i), 1.0);
        out.push_str(&format!(
            "  <line class=\"cut\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" \
             stroke=\"#9c2f2f\" stroke-width=\"{}\" stroke-dasharray=\"{} {}\"/>\n",
            f2(cx),
            f2(cy),
            f2(ux),
            f2(uy),
            f2(0.008 * dim),
            f2(0.03 * dim),
            f2(0.018 * dim)
        ));
        let arm = 0.02 * dim;
        out.push_str(&format!(
            "  <g class=\"cross\" stroke=\"#1d54a0\" stroke-width=\"{}\">\n",
            f2(0.01 * dim)
        ));
        out.push_str(&format!(
            "    <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>\n",
            f2(cx - arm),
            f2(cy - arm),
            f2(cx + arm),
            f2(cy + arm)
        ));
        out.push_str(&format!(
            "    <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>\n",
            f2(cx - arm),
            f2(cy + arm),
            f2(cx + arm),
            f2(cy - arm)
        ));
        out.push_str("  </g>\n");
        out.push_str(&format!(
            "  <text class=\"node-label\" x=\"{}\" y=\"{}\" font-family=\"sans-serif\" \
             font-size=\"{}\" fill=\"#1d54a0\">c{} (m={})</text>\n",
            f2(cx + 1.6 * arm),
            f2(cy - 1.2 * arm),
            f2(0.035 * dim),
            i + 1,
            n.mult
        ));
    }
    out.push_str("</svg>\n");
    out
}
