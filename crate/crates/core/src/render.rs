//! SVG output for a solved layout.

use std::fmt::Write as _;

use thiserror::Error;

use crate::geometry::{Point, Polygon};
use crate::treemap::{CellNode, LayoutDocument};

/// ColorBrewer Set3, in its published order.
pub const SET3: [&str; 12] = [
    "#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462", "#b3de69", "#fccde5", "#d9d9d9",
    "#bc80bd", "#ccebc5", "#ffed6f",
];

#[derive(Debug, Error, PartialEq)]
pub enum RenderError {
    #[error("leaf cell for {0:?} has no placement")]
    MissingPlacement(String),
    #[error("palette is empty")]
    EmptyPalette,
    #[error("stroke width must be finite and non-negative")]
    BadStroke,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TextColor {
    /// Black on light fills, white on dark ones.
    ContrastAuto,
    Fixed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderStyle {
    pub palette: Vec<String>,
    pub cell_stroke: String,
    pub cell_stroke_width: f64,
    pub cluster_stroke: String,
    pub cluster_stroke_width: f64,
    /// Overrides the family stored in the document.
    pub font_family: Option<String>,
    pub background: Option<String>,
    pub text_color: TextColor,
}

impl Default for RenderStyle {
    fn default() -> Self {
        RenderStyle {
            palette: SET3.iter().map(|s| s.to_string()).collect(),
            cell_stroke: "#ffffff".into(),
            cell_stroke_width: 1.0,
            cluster_stroke: "#ffffff".into(),
            cluster_stroke_width: 4.0,
            font_family: None,
            background: Some("#ffffff".into()),
            text_color: TextColor::ContrastAuto,
        }
    }
}

fn num(v: f64, places: usize) -> String {
    let s = format!("{v:.places$}");
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn parse_hex(color: &str) -> Option<(f64, f64, f64)> {
    let h = color.strip_prefix('#')?;
    let h = match h.len() {
        3 => h.chars().flat_map(|c| [c, c]).collect::<String>(),
        6 => h.to_string(),
        _ => return None,
    };
    let v = u32::from_str_radix(&h, 16).ok()?;
    let ch = |shift: u32| ((v >> shift) & 0xff) as f64 / 255.0;
    Some((ch(16), ch(8), ch(0)))
}

/// WCAG relative luminance; unknown colour syntax counts as light.
pub fn luminance(color: &str) -> f64 {
    let Some((r, g, b)) = parse_hex(color) else {
        return 1.0;
    };
    let lin = |c: f64| {
        if c <= 0.03928 {
            c / 12.92
        } else {
            ((c + 0.055) / 1.055).powf(2.4)
        }
    };
    0.2126 * lin(r) + 0.7152 * lin(g) + 0.0722 * lin(b)
}

fn text_color(style: &RenderStyle, fill: &str) -> String {
    match &style.text_color {
        TextColor::Fixed(c) => c.clone(),
        // the luminance at which black and white have equal contrast
        TextColor::ContrastAuto if luminance(fill) > 0.179 => "#000000".into(),
        TextColor::ContrastAuto => "#ffffff".into(),
    }
}

fn points(p: &Polygon) -> String {
    p.vertices()
        .iter()
        .map(|v| format!("{},{}", num(v.x, 3), num(v.y, 3)))
        .collect::<Vec<_>>()
        .join(" ")
}

fn path_data(p: &Polygon) -> String {
    let mut d = String::new();
    for (i, v) in p.vertices().iter().enumerate() {
        let _ = write!(d, "{}{},{} ", if i == 0 { "M" } else { "L" }, num(v.x, 3), num(v.y, 3));
    }
    d.push('Z');
    d
}

/// The `transform` attribute for a placement; 6 decimals so the round trip
/// stays well inside the cell tolerance.
pub fn transform_attr(p: &crate::fontfit::Placement) -> String {
    format!(
        "translate({} {}) rotate({}) scale({})",
        num(p.dx, 6),
        num(p.dy, 6),
        num(p.theta.to_degrees(), 6),
        num(p.scale, 6)
    )
}

/// Parses a `transform_attr` string back into the map `o -> S R o + t`.
pub fn parse_transform(attr: &str) -> Option<impl Fn(Point) -> Point> {
    let mut vals = Vec::new();
    for part in attr.split(')') {
        let Some((_, args)) = part.split_once('(') else { continue };
        for a in args.split_whitespace() {
            vals.push(a.parse::<f64>().ok()?);
        }
    }
    let [tx, ty, deg, s] = vals[..] else { return None };
    let (sin, cos) = deg.to_radians().sin_cos();
    Some(move |o: Point| Point::new(s * (cos * o.x - sin * o.y) + tx, s * (sin * o.x + cos * o.y) + ty))
}

fn word_label(doc: &LayoutDocument, cell: &CellNode) -> String {
    cell.word
        .and_then(|w| doc.words.get(w))
        .map(|w| w.text.clone())
        .unwrap_or_else(|| format!("#{}", cell.word.unwrap_or(usize::MAX)))
}

pub fn to_svg(doc: &LayoutDocument, style: &RenderStyle) -> Result<String, RenderError> {
    if style.palette.is_empty() {
        return Err(RenderError::EmptyPalette);
    }
    for w in [style.cell_stroke_width, style.cluster_stroke_width] {
        if !(w.is_finite() && w >= 0.0) {
            return Err(RenderError::BadStroke);
        }
    }
    let leaves = doc.leaves();
    for leaf in &leaves {
        if leaf.placement.is_none() {
            return Err(RenderError::MissingPlacement(word_label(doc, leaf)));
        }
    }

    let (lo, hi) = doc.container.bbox();
    let (w, h) = (hi.x - lo.x, hi.y - lo.y);
    let family = style
        .font_family
        .clone()
        .or_else(|| doc.font.as_ref().map(|f| f.family.clone()))
        .unwrap_or_else(|| "sans-serif".into());
    let pitch = doc.font.as_ref().map(|f| f.line_pitch()).unwrap_or(1.2);

    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"{} {} {} {}\" width=\"{}\" height=\"{}\">",
        num(lo.x, 3),
        num(lo.y, 3),
        num(w, 3),
        num(h, 3),
        num(w, 3),
        num(h, 3)
    );
    if let Some(bg) = &style.background {
        let _ = writeln!(
            out,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>",
            num(lo.x, 3),
            num(lo.y, 3),
            num(w, 3),
            num(h, 3),
            escape(bg)
        );
    }

    out.push_str("<g class=\"cells\">\n");
    for leaf in &leaves {
        let fill = &style.palette[leaf.color % style.palette.len()];
        let _ = writeln!(
            out,
            "<polygon points=\"{}\" fill=\"{}\" stroke=\"{}\" stroke-width=\"{}\"/>",
            points(&leaf.polygon),
            escape(fill),
            escape(&style.cell_stroke),
            num(style.cell_stroke_width, 3)
        );
    }
    out.push_str("</g>\n");

    let mut outlines = Vec::new();
    for c in &doc.cells {
        collect_internal(c, &mut outlines);
    }
    if !outlines.is_empty() {
        out.push_str("<g class=\"clusters\" fill=\"none\">\n");
        for p in outlines {
            let _ = writeln!(
                out,
                "<path d=\"{}\" stroke=\"{}\" stroke-width=\"{}\"/>",
                path_data(p),
                escape(&style.cluster_stroke),
                num(style.cluster_stroke_width, 3)
            );
        }
        out.push_str("</g>\n");
    }

    let _ = writeln!(out, "<g class=\"words\" font-family=\"{}\">", escape(&family));
    for leaf in &leaves {
        let p = leaf.placement.as_ref().expect("checked above");
        if p.overflow {
            log::warn!("{:?} overflows its cell at the minimum size", word_label(doc, leaf));
        }
        let fill = &style.palette[leaf.color % style.palette.len()];
        let _ = writeln!(out, "<g transform=\"{}\">", transform_attr(p));
        for (k, line) in p.lines.iter().enumerate() {
            let _ = writeln!(
                out,
                "<text x=\"0\" y=\"{}\" font-size=\"1\" fill=\"{}\">{}</text>",
                num(k as f64 * pitch, 6),
                text_color(style, fill),
                escape(line)
            );
        }
        out.push_str("</g>\n");
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}

fn collect_internal<'a>(cell: &'a CellNode, out: &mut Vec<&'a Polygon>) {
    if !cell.is_leaf() {
        out.push(&cell.polygon);
        for c in &cell.children {
            collect_internal(c, out);
        }
    }
}

pub fn to_json(doc: &LayoutDocument) -> String {
    doc.to_json()
}
