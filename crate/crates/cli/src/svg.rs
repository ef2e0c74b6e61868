//! Planar region plots: fixed 800×800 canvas, 5% padding, equal axis
//! scale, members drawn in declaration order at 30% fill opacity.

use std::fmt::Write;

use flexreg::io::RegionDocument;
use flexreg::{vertices_2d, HPolytope, RegionUnion, Scalar};

use crate::error::CliError;

const SIZE: f64 = 800.0;
const PAD: f64 = SIZE * 0.05;
const PALETTE: [&str; 6] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];
const FROZEN: &str = "#7f7f7f";

pub struct Layer {
    pub name: String,
    pub color: &'static str,
    pub vertices: Vec<[f64; 2]>,
}

fn layer<S: Scalar>(name: String, color: &'static str, poly: &HPolytope<S>) -> Result<Layer, CliError> {
    let vertices = vertices_2d(poly)?.iter().map(|[x, y]| [x.to_f64_lossy(), y.to_f64_lossy()]).collect();
    Ok(Layer { name, color, vertices })
}

fn union_layers<S: Scalar>(
    prefix: &str,
    union: &RegionUnion<S>,
    provenance: &[String],
    frozen: bool,
) -> Result<Vec<Layer>, CliError> {
    union
        .members()
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let mut name = format!("{prefix}{i}");
            if let Some(t) = provenance.get(i) {
                name.push(' ');
                name.push_str(t);
            }
            layer(name, if frozen { FROZEN } else { PALETTE[i % PALETTE.len()] }, m)
        })
        .collect()
}

/// Layers of a region document: union members, or minuend members followed
/// by the frozen (subtrahend) members.
pub fn document_layers<S: Scalar>(doc: &RegionDocument<S>) -> Result<Vec<Layer>, CliError> {
    if doc.labels().len() != 2 {
        return Err(CliError::input(format!("plots need exactly 2 labels, found {}", doc.labels().len())));
    }
    match doc {
        RegionDocument::Union(f) => union_layers("member ", &f.union, &f.provenance, false),
        RegionDocument::Difference { minuend, subtrahend } => {
            let mut layers = union_layers("active ", &minuend.union, &minuend.provenance, false)?;
            layers.extend(union_layers("frozen ", &subtrahend.union, &subtrahend.provenance, true)?);
            Ok(layers)
        }
    }
}

fn num(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

pub fn render(labels: &[String], layers: &[Layer]) -> String {
    let points = layers.iter().flat_map(|l| l.vertices.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for [x, y] in points {
        x0 = x0.min(*x);
        x1 = x1.max(*x);
        y0 = y0.min(*y);
        y1 = y1.max(*y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (-1.0, 1.0, -1.0, 1.0);
    }
    if x1 - x0 <= 0.0 {
        (x0, x1) = (x0 - 1.0, x1 + 1.0);
    }
    if y1 - y0 <= 0.0 {
        (y0, y1) = (y0 - 1.0, y1 + 1.0);
    }
    let inner = SIZE - 2.0 * PAD;
    let scale = (inner / (x1 - x0)).min(inner / (y1 - y0));
    let ox = PAD + (inner - (x1 - x0) * scale) / 2.0;
    let oy = PAD + (inner - (y1 - y0) * scale) / 2.0;
    let sx = |x: f64| ox + (x - x0) * scale;
    let sy = |y: f64| SIZE - (oy + (y - y0) * scale);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{s}" height="{s}" viewBox="0 0 {s} {s}">"#,
        s = SIZE
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);

    let ax_y = if (y0..=y1).contains(&0.0) { 0.0 } else { y0 };
    let ax_x = if (x0..=x1).contains(&0.0) { 0.0 } else { x0 };
    let _ = writeln!(svg, r#"<g class="axes" stroke="black" stroke-width="1">"#);
    let _ = writeln!(
        svg,
        r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
        num(PAD),
        num(sy(ax_y)),
        num(SIZE - PAD),
        num(sy(ax_y))
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
        num(sx(ax_x)),
        num(SIZE - PAD),
        num(sx(ax_x)),
        num(PAD)
    );
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(svg, r#"<g class="labels" font-family="sans-serif" font-size="14">"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
        num(SIZE - PAD),
        num(sy(ax_y) - 6.0),
        escape(&labels[0])
    );
    let _ = writeln!(svg, r#"<text x="{}" y="{}">{}</text>"#, num(sx(ax_x) + 6.0), num(PAD + 14.0), escape(&labels[1]));
    for (x, anchor) in [(x0, "start"), (x1, "end")] {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="{anchor}">{}</text>"#,
            num(sx(x)),
            num(sy(ax_y) + 16.0),
            num(x)
        );
    }
    for y in [y0, y1] {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            num(sx(ax_x) - 4.0),
            num(sy(y) + 5.0),
            num(y)
        );
    }
    let _ = writeln!(svg, "</g>");

    for (i, l) in layers.iter().enumerate() {
        let pts: Vec<String> = l.vertices.iter().map(|[x, y]| format!("{},{}", num(sx(*x)), num(sy(*y)))).collect();
        let _ = writeln!(
            svg,
            r#"<polygon data-member="{i}" points="{}" fill="{c}" fill-opacity="0.3" stroke="{c}" stroke-width="1.5"><title>{}</title></polygon>"#,
            pts.join(" "),
            escape(&l.name),
            c = l.color,
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
