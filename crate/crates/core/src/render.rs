//! Grid heatmaps of final strengths. Red cells are negative (attack polarity),
//! blue cells non-negative (support polarity); colour intensity is |sigma|.
//! Layer 1 is the bottom row.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::grid::{Cell, DebateGrid};
use crate::qbaf::StrengthMap;
use crate::record::DebateRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RenderFormat {
    #[default]
    Ansi,
    Svg,
}

impl FromStr for RenderFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ansi" => Ok(RenderFormat::Ansi),
            "svg" => Ok(RenderFormat::Svg),
            other => Err(format!("unknown format {other:?} (expected ansi or svg)")),
        }
    }
}

impl fmt::Display for RenderFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RenderFormat::Ansi => "ansi",
            RenderFormat::Svg => "svg",
        })
    }
}

pub const ATTACK_RGB: (u8, u8, u8) = (214, 39, 40);
pub const SUPPORT_RGB: (u8, u8, u8) = (31, 119, 180);

/// Base colour and alpha in [0, 1] for a strength. Alpha is linear in |sigma|.
pub fn cell_colour(sigma: f64) -> ((u8, u8, u8), f64) {
    let base = if sigma < 0.0 { ATTACK_RGB } else { SUPPORT_RGB };
    (base, sigma.abs().min(1.0))
}

fn blend_on_white((r, g, b): (u8, u8, u8), alpha: f64) -> (u8, u8, u8) {
    let mix = |c: u8| (255.0 + (f64::from(c) - 255.0) * alpha).round() as u8;
    (mix(r), mix(g), mix(b))
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

const CELL_W: usize = 48;
const CELL_H: usize = 20;
const MARGIN_LEFT: usize = 48;
const MARGIN_BOTTOM: usize = 64;
const MARGIN_TOP: usize = 8;

pub fn render_svg(record: &DebateRecord, grid: &DebateGrid, sigma: &[f64]) -> String {
    let (layers, tokens) = (grid.num_layers(), grid.num_tokens());
    let width = MARGIN_LEFT + tokens * CELL_W + 8;
    let height = MARGIN_TOP + layers * CELL_H + MARGIN_BOTTOM;
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="monospace" font-size="10">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="{width}" height="{height}" fill="white"/>"#).unwrap();
    for layer in (1..=layers).rev() {
        let y = MARGIN_TOP + (layers - layer) * CELL_H;
        writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="end">L{layer}</text>"#,
            MARGIN_LEFT - 4,
            y + CELL_H / 2 + 3
        )
        .unwrap();
        for token in 1..=tokens {
            let i = grid.index_of(Cell { layer, token });
            let sigma = sigma[i];
            let ((r, g, b), alpha) = cell_colour(sigma);
            let x = MARGIN_LEFT + (token - 1) * CELL_W;
            writeln!(
                out,
                r#"<rect x="{x}" y="{y}" width="{CELL_W}" height="{CELL_H}" fill="rgb({r},{g},{b})" fill-opacity="{alpha:.4}" stroke="rgb(221,221,221)" stroke-width="0.5"><title>L{layer}T{token} sigma={sigma:.4}</title></rect>"#
            )
            .unwrap();
        }
    }
    let label_y = MARGIN_TOP + layers * CELL_H + 6;
    for (t, token) in record.tokens.iter().enumerate() {
        let x = MARGIN_LEFT + t * CELL_W + CELL_W / 2;
        writeln!(
            out,
            r#"<text x="{x}" y="{label_y}" text-anchor="end" transform="rotate(-60 {x} {label_y})">{}</text>"#,
            xml_escape(&token.text)
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

/// Terminal heatmap using 24-bit background colours.
pub fn render_ansi(record: &DebateRecord, grid: &DebateGrid, sigma: &[f64]) -> String {
    let (layers, tokens) = (grid.num_layers(), grid.num_tokens());
    let mut out = String::new();
    for layer in (1..=layers).rev() {
        write!(out, "L{layer:<4}").unwrap();
        for token in 1..=tokens {
            let sigma = sigma[grid.index_of(Cell { layer, token })];
            let (base, alpha) = cell_colour(sigma);
            let (r, g, b) = blend_on_white(base, alpha);
            write!(out, "\x1b[48;2;{r};{g};{b}m    \x1b[0m").unwrap();
        }
        out.push('\n');
    }
    out.push_str("     ");
    for token in 1..=tokens {
        write!(out, "{token:<4}").unwrap();
    }
    out.push('\n');
    for (t, token) in record.tokens.iter().enumerate() {
        writeln!(out, "  {}: {:?} (w={})", t + 1, token.text, token.weight).unwrap();
    }
    out
}

pub fn render(
    format: RenderFormat,
    record: &DebateRecord,
    grid: &DebateGrid,
    strengths: &StrengthMap,
) -> String {
    match format {
        RenderFormat::Ansi => render_ansi(record, grid, strengths.sigma()),
        RenderFormat::Svg => render_svg(record, grid, strengths.sigma()),
    }
}
