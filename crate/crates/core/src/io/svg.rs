//! SVG rendering of a layout document.
//!
//! Rendering is cosmetic: inner parasite nodes with two non-switch children
//! are moved to the midpoint of their children, which the integer layout
//! deliberately does not do. When that would add crossings the unrefined
//! positions are drawn instead, so the marks always match the layout.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::layout::crossings::{arc_intersection, ArcGeom};
use crate::tree::{parse_newick_with, NewickOptions, PhyloTree};

use crate::layout::HPLayout;

use super::{IoError, LayoutDocument};

/// Environment variable naming a JSON style file used when none is given.
pub const STYLE_ENV: &str = "COPHY_STYLE";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvgStyle {
    /// Pixels per grid unit.
    pub scale: f64,
    /// Depth of the cut on a rectangle's inner top corner, in grid units.
    /// Zero gives plain rectangles.
    pub slant: f64,
    /// Margin around the drawing, in grid units.
    pub margin: f64,
    /// Radius of the rounded arc corners, in grid units.
    pub corner_radius: f64,
    pub node_radius: f64,
    pub crossing_radius: f64,
    pub stroke_width: f64,
    pub font_size: f64,
    pub show_labels: bool,
    pub host_fill: String,
    pub host_stroke: String,
    pub parasite_stroke: String,
    pub switch_stroke: String,
    pub switch_dash: String,
    pub loss_fill: String,
    pub crossing_stroke: String,
}

impl Default for SvgStyle {
    fn default() -> Self {
        SvgStyle {
            scale: 16.0,
            slant: 0.4,
            margin: 1.0,
            corner_radius: 0.35,
            node_radius: 0.2,
            crossing_radius: 0.45,
            stroke_width: 1.5,
            font_size: 10.0,
            show_labels: true,
            host_fill: "#e8e3d3".into(),
            host_stroke: "#8c8270".into(),
            parasite_stroke: "#1f4e79".into(),
            switch_stroke: "#b03a2e".into(),
            switch_dash: "4 3".into(),
            loss_fill: "#ffffff".into(),
            crossing_stroke: "#d4a017".into(),
        }
    }
}

impl SvgStyle {
    pub fn plain() -> Self {
        SvgStyle {
            slant: 0.0,
            ..SvgStyle::default()
        }
    }

    /// `plain`, `default`, or a path to a JSON file of overrides.
    pub fn named_or_file(spec: &str) -> Result<Self, IoError> {
        match spec {
            "plain" => Ok(SvgStyle::plain()),
            "default" | "slanted" => Ok(SvgStyle::default()),
            path => SvgStyle::load(Path::new(path)),
        }
    }

    pub fn load(path: &Path) -> Result<Self, IoError> {
        let text = std::fs::read_to_string(path).map_err(|e| IoError::Read {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Style from [`STYLE_ENV`] when set, the default otherwise.
    pub fn from_env() -> Result<Self, IoError> {
        match std::env::var(STYLE_ENV) {
            Ok(spec) if !spec.is_empty() => SvgStyle::named_or_file(&spec),
            _ => Ok(SvgStyle::default()),
        }
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

struct Canvas {
    s: f64,
    margin: f64,
    top: i64,
}

impl Canvas {
    /// Render coordinates are kept doubled so midpoints stay integral.
    fn x2(&self, x2: i64) -> f64 {
        (self.margin + x2 as f64 / 2.0) * self.s
    }

    fn y(&self, y: i64) -> f64 {
        (self.margin + (self.top - y) as f64) * self.s
    }
}

fn f(v: f64) -> String {
    let r = format!("{v:.2}");
    if r == "-0.00" {
        "0.00".into()
    } else {
        r
    }
}

/// Doubled render x of every point label.
fn refined_x(doc: &LayoutDocument, parasite: Option<&PhyloTree>) -> BTreeMap<String, i64> {
    let l = &doc.layout;
    let mut x2: BTreeMap<String, i64> =
        l.points.iter().map(|(k, p)| (k.clone(), 2 * p.x)).collect();
    let Some(p) = parasite else {
        return x2;
    };
    let switch: BTreeMap<(&str, &str), bool> = l
        .routes
        .iter()
        .map(|r| ((r.parent.as_str(), r.child.as_str()), r.switch))
        .collect();
    for v in p.postorder() {
        let Some([a, b]) = p.children(v) else {
            continue;
        };
        let (la, lb, lv) = (p.label(a), p.label(b), p.label(v));
        let sa = switch.get(&(lv, la)).copied().unwrap_or(false);
        let sb = switch.get(&(lv, lb)).copied().unwrap_or(false);
        let (Some(&xa), Some(&xb)) = (x2.get(la), x2.get(lb)) else {
            continue;
        };
        let nx = match (sa, sb) {
            (false, false) => (xa + xb) / 2,
            (false, true) => xa,
            (true, false) => xb,
            (true, true) => continue,
        };
        x2.insert(lv.to_string(), nx);
    }
    // loss nodes sit above their arc's child
    for (label, d) in &l.dummies {
        if let Some(&xc) = x2.get(&d.child) {
            x2.insert(label.clone(), xc);
        }
    }
    x2
}

/// Arc geometry in doubled coordinates.
fn render_geoms(l: &HPLayout, x2: &BTreeMap<String, i64>) -> Vec<ArcGeom> {
    // endpoint ids let shared endpoints be told apart from crossings
    let id: BTreeMap<&str, usize> = l
        .points
        .keys()
        .enumerate()
        .map(|(i, k)| (k.as_str(), i))
        .collect();
    let mut geoms = Vec::new();
    for r in &l.routes {
        let (Some(&sx), Some(&ex)) = (x2.get(&r.parent), x2.get(&r.child)) else {
            continue;
        };
        let (Some(sp), Some(ep)) = (l.points.get(&r.parent), l.points.get(&r.child)) else {
            continue;
        };
        geoms.push(ArcGeom {
            parent: id[r.parent.as_str()],
            child: id[r.child.as_str()],
            from: (sx, 2 * sp.y),
            to: (ex, 2 * ep.y),
        });
    }
    geoms
}

fn crossing_marks(geoms: &[ArcGeom]) -> Vec<(i64, i64)> {
    let mut marks = Vec::new();
    for i in 0..geoms.len() {
        for j in i + 1..geoms.len() {
            if let Some((pt, _)) = arc_intersection(&geoms[i], &geoms[j]) {
                marks.push(pt);
            }
        }
    }
    marks
}

pub fn emit_svg(doc: &LayoutDocument, style: &SvgStyle) -> String {
    let l = &doc.layout;
    let opts = NewickOptions {
        auto_label_internal: true,
    };
    let host = parse_newick_with(&doc.instance.host, opts).ok();
    let parasite = parse_newick_with(&doc.instance.parasite, opts).ok();
    let top = l.rects.values().map(|r| r.y_top).max().unwrap_or(0);
    let right = l.rects.values().map(|r| r.x_right).max().unwrap_or(0);
    let c = Canvas {
        s: style.scale,
        margin: style.margin,
        top,
    };
    let width = (right as f64 + 2.0 * style.margin) * style.scale;
    let height = (top as f64 + 2.0 * style.margin) * style.scale;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = f(width),
        h = f(height)
    );
    let _ = writeln!(
        out,
        r#"<g class="hosts" fill="{}" stroke="{}" stroke-width="1">"#,
        esc(&style.host_fill),
        esc(&style.host_stroke)
    );
    // which side of its sibling each host sits on
    let mut inner_right: BTreeMap<&str, Option<bool>> = BTreeMap::new();
    if let Some(h) = &host {
        for v in h.nodes() {
            if let Some([a, b]) = h.children(v) {
                let (ra, rb) = (l.rects.get(h.label(a)), l.rects.get(h.label(b)));
                if let (Some(ra), Some(rb)) = (ra, rb) {
                    let a_left = ra.x_left < rb.x_left;
                    inner_right.insert(h.label(a), Some(a_left));
                    inner_right.insert(h.label(b), Some(!a_left));
                }
            }
        }
    }
    for (label, r) in l.rects_sorted() {
        let (xl, xr) = (c.x2(2 * r.x_left), c.x2(2 * r.x_right));
        let (yb, yt) = (c.y(r.y_bottom), c.y(r.y_top));
        let cut = style
            .slant
            .min((r.x_right - r.x_left) as f64 / 2.0)
            .max(0.0)
            * style.scale;
        let side = inner_right.get(label).copied().flatten();
        match side {
            Some(on_right) if cut > 0.0 => {
                let pts = if on_right {
                    format!(
                        "{},{} {},{} {},{} {},{} {},{}",
                        f(xl),
                        f(yb),
                        f(xr),
                        f(yb),
                        f(xr),
                        f(yt + cut),
                        f(xr - cut),
                        f(yt),
                        f(xl),
                        f(yt)
                    )
                } else {
                    format!(
                        "{},{} {},{} {},{} {},{} {},{}",
                        f(xl),
                        f(yb),
                        f(xr),
                        f(yb),
                        f(xr),
                        f(yt),
                        f(xl + cut),
                        f(yt),
                        f(xl),
                        f(yt + cut)
                    )
                };
                let _ = writeln!(
                    out,
                    r#"<polygon data-host="{}" points="{}"/>"#,
                    esc(label),
                    pts
                );
            }
            _ => {
                let _ = writeln!(
                    out,
                    r#"<rect data-host="{}" x="{}" y="{}" width="{}" height="{}"/>"#,
                    esc(label),
                    f(xl),
                    f(yt),
                    f(xr - xl),
                    f(yb - yt)
                );
            }
        }
    }
    out.push_str("</g>\n");

    let plain_x = refined_x(doc, None);
    let mut x2 = refined_x(doc, parasite.as_ref());
    if crossing_marks(&render_geoms(l, &x2)).len()
        > crossing_marks(&render_geoms(l, &plain_x)).len()
    {
        x2 = plain_x;
    }
    let rad = style.corner_radius * style.scale;
    let _ = writeln!(
        out,
        r#"<g class="arcs" fill="none" stroke-width="{}">"#,
        f(style.stroke_width)
    );
    for r in &l.routes {
        let (Some(&sx), Some(&ex)) = (x2.get(&r.parent), x2.get(&r.child)) else {
            continue;
        };
        let (Some(sp), Some(ep)) = (l.points.get(&r.parent), l.points.get(&r.child)) else {
            continue;
        };
        let (ax, ay, bx, by) = (c.x2(sx), c.y(sp.y), c.x2(ex), c.y(ep.y));
        let d = if sx == ex {
            format!("M{},{} L{},{}", f(ax), f(ay), f(bx), f(by))
        } else {
            let dx = bx - ax;
            let dy = by - ay;
            let rr = rad.min(dx.abs() / 2.0).min(dy.abs() / 2.0);
            let (sxn, syn) = (dx.signum(), dy.signum());
            let sweep = if sxn * syn > 0.0 { 1 } else { 0 };
            format!(
                "M{},{} L{},{} A{},{} 0 0 {} {},{} L{},{}",
                f(ax),
                f(ay),
                f(bx - sxn * rr),
                f(ay),
                f(rr),
                f(rr),
                sweep,
                f(bx),
                f(ay + syn * rr),
                f(bx),
                f(by)
            )
        };
        let stroke = if r.switch {
            format!(
                r#" stroke="{}" stroke-dasharray="{}""#,
                esc(&style.switch_stroke),
                esc(&style.switch_dash)
            )
        } else {
            format!(r#" stroke="{}""#, esc(&style.parasite_stroke))
        };
        let _ = writeln!(
            out,
            r#"<path data-arc="{}-{}"{} d="{}"/>"#,
            esc(&r.parent),
            esc(&r.child),
            stroke,
            d
        );
    }
    out.push_str("</g>\n");

    let nr = style.node_radius * style.scale;
    let _ = writeln!(
        out,
        r#"<g class="nodes" stroke="{}" stroke-width="1">"#,
        esc(&style.parasite_stroke)
    );
    for (label, p) in &l.points {
        let Some(&x) = x2.get(label) else { continue };
        let fill = if l.dummies.contains_key(label) {
            esc(&style.loss_fill)
        } else {
            esc(&style.parasite_stroke)
        };
        let _ = writeln!(
            out,
            r#"<circle data-node="{}" cx="{}" cy="{}" r="{}" fill="{}"/>"#,
            esc(label),
            f(c.x2(x)),
            f(c.y(p.y)),
            f(nr),
            fill
        );
    }
    out.push_str("</g>\n");

    let marks = crossing_marks(&render_geoms(l, &x2));
    if !marks.is_empty() {
        let _ = writeln!(
            out,
            r#"<g class="crossings" fill="none" stroke="{}" stroke-width="2">"#,
            esc(&style.crossing_stroke)
        );
        for (x, y2) in marks {
            let _ = writeln!(
                out,
                r#"<circle cx="{}" cy="{}" r="{}"/>"#,
                f(c.x2(x)),
                f((c.margin + top as f64 - y2 as f64 / 2.0) * c.s),
                f(style.crossing_radius * style.scale)
            );
        }
        out.push_str("</g>\n");
    }

    if style.show_labels {
        let _ = writeln!(
            out,
            r#"<g class="labels" font-family="sans-serif" font-size="{}" text-anchor="middle">"#,
            f(style.font_size)
        );
        if let Some(p) = &parasite {
            for v in p.leaves() {
                let label = p.label(v);
                if let (Some(&x), Some(pt)) = (x2.get(label), l.points.get(label)) {
                    let _ = writeln!(
                        out,
                        r#"<text x="{}" y="{}">{}</text>"#,
                        f(c.x2(x)),
                        f(c.y(pt.y) + nr + style.font_size),
                        esc(label)
                    );
                }
            }
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::tests::rec;
    use crate::layout::{run_algorithm, Algorithm, LayoutOptions};

    fn doc(algo: Algorithm) -> LayoutDocument {
        let r = rec(
            "((a,b)u,(c,d)v)r;",
            "((x,(y,z)q)s,w)t;",
            &[("x", "b"), ("y", "a"), ("z", "d"), ("w", "c")],
            &[("q", "a"), ("s", "u"), ("t", "r")],
        );
        let l = run_algorithm(algo, &r, LayoutOptions::default()).unwrap();
        LayoutDocument::new(&r, "g", algo, LayoutOptions::default(), l).unwrap()
    }

    #[test]
    fn deterministic() {
        let d = doc(Algorithm::Shs);
        assert_eq!(
            emit_svg(&d, &SvgStyle::default()),
            emit_svg(&d, &SvgStyle::default())
        );
    }

    #[test]
    fn crossing_free_has_no_marks() {
        let d = doc(Algorithm::Smp);
        if d.crossing_count == 0 {
            assert!(!emit_svg(&d, &SvgStyle::default()).contains("class=\"crossings\""));
        }
        let planar = rec(
            "(a,b)r;",
            "(x,y)q;",
            &[("x", "a"), ("y", "b")],
            &[("q", "r")],
        );
        let l = run_algorithm(Algorithm::Planar, &planar, LayoutOptions::default()).unwrap();
        let d = LayoutDocument::new(&planar, "g", Algorithm::Planar, LayoutOptions::default(), l)
            .unwrap();
        assert!(!emit_svg(&d, &SvgStyle::default()).contains("class=\"crossings\""));
    }

    #[test]
    fn plain_style_uses_rectangles() {
        let d = doc(Algorithm::Shs);
        let plain = emit_svg(&d, &SvgStyle::plain());
        let slanted = emit_svg(&d, &SvgStyle::default());
        assert!(!plain.contains("<polygon"));
        assert!(slanted.contains("<polygon"));
        assert_eq!(plain.matches("data-host=").count(), 7);
        assert_eq!(slanted.matches("data-host=").count(), 7);
        // header and node positions agree between styles
        assert_eq!(plain.lines().next(), slanted.lines().next());
        let nodes = |s: &str| -> Vec<String> {
            s.lines()
                .filter(|l| l.contains("data-node"))
                .map(String::from)
                .collect()
        };
        assert_eq!(nodes(&plain), nodes(&slanted));
    }

    #[test]
    fn switch_arcs_are_dashed() {
        let d = doc(Algorithm::Shs);
        let svg = emit_svg(&d, &SvgStyle::default());
        let dashed = svg
            .lines()
            .filter(|l| l.contains("stroke-dasharray"))
            .count();
        assert_eq!(dashed, d.layout.routes.iter().filter(|r| r.switch).count());
        assert!(dashed > 0);
    }

    #[test]
    fn style_file_overrides() {
        let dir = std::env::temp_dir().join(format!("cophy-style-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("style.json");
        std::fs::write(&path, r#"{"scale": 8.0, "show_labels": false}"#).unwrap();
        let s = SvgStyle::named_or_file(path.to_str().unwrap()).unwrap();
        assert_eq!(s.scale, 8.0);
        assert!(!s.show_labels);
        assert_eq!(s.slant, 0.4);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
