//! Diagram serialization: plain PGM, CSV and JSON.
//!
//! * PGM (`P2`, maxval 255): one pixel row per time step. Without intensities
//!   a pixel is `255 * state`. With intensities, rows 1.. are
//!   `round(255 * I / I_max)` over the whole run (0 for an all-dark run) and
//!   row 0, which no intensity decided, stays `255 * state`; each pixel row is
//!   then preceded by a `#s <bits>` comment so states survive a round trip.
//!   A `# boundary <name>` comment records the boundary.
//! * CSV: one line per step, cells as comma-separated `0`/`1`.
//! * JSON: width, boundary, rows as `0`/`1` strings and, when present, the
//!   intensity field at full `f64` precision.

use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::diagram::SpaceTimeDiagram;
use crate::error::{Error, Result};
use crate::generation::{Boundary, Generation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Pgm,
    Csv,
    Json,
}

impl Format {
    pub fn from_path(path: &Path) -> Option<Format> {
        path.extension()?.to_str()?.parse().ok()
    }

    pub fn extension(self) -> &'static str {
        match self {
            Format::Pgm => "pgm",
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pgm" => Ok(Format::Pgm),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidArgument(format!("unknown format `{other}` (expected pgm, csv or json)"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

#[derive(Serialize, Deserialize)]
struct DiagramJson {
    width: usize,
    steps: usize,
    boundary: Boundary,
    rows: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    intensities: Option<Vec<Vec<f64>>>,
}

fn bits_string(row: &Generation) -> String {
    row.iter().map(|b| if b { '1' } else { '0' }).collect()
}

pub fn diagram_to_string(d: &SpaceTimeDiagram, format: Format) -> String {
    match format {
        Format::Pgm => to_pgm(d),
        Format::Csv => to_csv(d),
        Format::Json => to_json(d),
    }
}

fn to_pgm(d: &SpaceTimeDiagram) -> String {
    let mut out = String::new();
    writeln!(out, "P2").unwrap();
    writeln!(out, "# boundary {}", d.boundary()).unwrap();
    writeln!(out, "{} {}", d.width(), d.steps() + 1).unwrap();
    writeln!(out, "255").unwrap();
    let field = d.intensities();
    let max = field.map_or(0.0, |f| f.iter().flatten().fold(0.0_f64, |m, &v| m.max(v)));
    for (t, row) in d.rows().iter().enumerate() {
        let pixels: Vec<String> = match (field, t) {
            (Some(f), t) if t > 0 => {
                writeln!(out, "#s {}", bits_string(row)).unwrap();
                f[t - 1]
                    .iter()
                    .map(|&v| if max > 0.0 { (255.0 * v / max).round() as u8 } else { 0 })
                    .map(|p| p.to_string())
                    .collect()
            }
            _ => {
                if field.is_some() {
                    writeln!(out, "#s {}", bits_string(row)).unwrap();
                }
                row.iter().map(|b| if b { "255" } else { "0" }.to_string()).collect()
            }
        };
        writeln!(out, "{}", pixels.join(" ")).unwrap();
    }
    out
}

fn to_csv(d: &SpaceTimeDiagram) -> String {
    let mut out = String::new();
    for row in d.rows() {
        let cells: Vec<&str> = row.iter().map(|b| if b { "1" } else { "0" }).collect();
        writeln!(out, "{}", cells.join(",")).unwrap();
    }
    out
}

fn to_json(d: &SpaceTimeDiagram) -> String {
    let doc = DiagramJson {
        width: d.width(),
        steps: d.steps(),
        boundary: d.boundary(),
        rows: d.rows().iter().map(bits_string).collect(),
        intensities: d.intensities().map(|f| f.to_vec()),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("diagram serializes");
    s.push('\n');
    s
}

pub fn export_diagram(d: &SpaceTimeDiagram, format: Format, path: &Path) -> Result<()> {
    std::fs::write(path, diagram_to_string(d, format)).map_err(|e| Error::io(path, e))
}

/// Reads a diagram; `boundary` applies when the file does not record one.
pub fn import_diagram(path: &Path, format: Format, boundary: Boundary) -> Result<SpaceTimeDiagram> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_diagram(&text, format, boundary)
}

pub fn parse_diagram(text: &str, format: Format, boundary: Boundary) -> Result<SpaceTimeDiagram> {
    match format {
        Format::Pgm => parse_pgm(text, boundary),
        Format::Csv => parse_csv(text, boundary),
        Format::Json => parse_json(text),
    }
}

fn parse_bits(s: &str, boundary: Boundary, line: usize) -> Result<Generation> {
    Generation::parse(s, boundary).map_err(|e| Error::parse(line, e.to_string()))
}

fn parse_csv(text: &str, boundary: Boundary) -> Result<SpaceTimeDiagram> {
    let mut rows = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut bits = String::with_capacity(line.len() / 2 + 1);
        for cell in line.split(',') {
            match cell.trim() {
                "0" => bits.push('0'),
                "1" => bits.push('1'),
                other => return Err(Error::parse(k + 1, format!("expected 0 or 1, found `{other}`"))),
            }
        }
        rows.push(parse_bits(&bits, boundary, k + 1)?);
    }
    finish_rows(rows, text.lines().count())
}

fn finish_rows(rows: Vec<Generation>, last_line: usize) -> Result<SpaceTimeDiagram> {
    if rows.is_empty() {
        return Err(Error::parse(last_line.max(1), "no rows"));
    }
    SpaceTimeDiagram::new(rows).map_err(|e| Error::parse(last_line.max(1), e.to_string()))
}

fn parse_pgm(text: &str, mut boundary: Boundary) -> Result<SpaceTimeDiagram> {
    let mut tokens: Vec<(usize, &str)> = Vec::new();
    let mut state_rows: Vec<(usize, &str)> = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let (body, comment) = match line.find('#') {
            Some(i) => (&line[..i], Some(&line[i + 1..])),
            None => (line, None),
        };
        tokens.extend(body.split_whitespace().map(|t| (k + 1, t)));
        match comment.map(str::trim_end) {
            Some(c) if c.starts_with("s ") => state_rows.push((k + 1, c[2..].trim())),
            Some(c) if c.trim_start().starts_with("boundary ") => {
                boundary = c.trim_start()["boundary ".len()..]
                    .trim()
                    .parse()
                    .map_err(|e: Error| Error::parse(k + 1, e.to_string()))?;
            }
            _ => {}
        }
    }
    let last_line = text.lines().count().max(1);
    let mut it = tokens.into_iter();
    let mut next = |what: &str| it.next().ok_or_else(|| Error::parse(last_line, format!("truncated file: missing {what}")));
    let (line, magic) = next("magic number")?;
    if magic != "P2" {
        return Err(Error::parse(line, format!("expected `P2`, found `{magic}`")));
    }
    let mut number = |what: &str| -> Result<(usize, u32)> {
        let (line, tok) = next(what)?;
        tok.parse().map(|v| (line, v)).map_err(|_| Error::parse(line, format!("bad {what} `{tok}`")))
    };
    let (line, width) = number("width")?;
    let (_, height) = number("height")?;
    if width == 0 || height == 0 {
        return Err(Error::parse(line, "empty image"));
    }
    let (line, maxval) = number("maxval")?;
    if maxval != 255 {
        return Err(Error::parse(line, format!("maxval must be 255, found {maxval}")));
    }
    let mut rows = Vec::with_capacity(height as usize);
    for t in 0..height {
        let mut bits = String::with_capacity(width as usize);
        for _ in 0..width {
            let (line, v) = number("pixel")?;
            if v > 255 {
                return Err(Error::parse(line, format!("pixel {v} exceeds maxval")));
            }
            bits.push(if v >= 128 { '1' } else { '0' });
        }
        if !state_rows.is_empty() {
            let Some(&(line, s)) = state_rows.get(t as usize) else {
                return Err(Error::parse(last_line, format!("missing state comment for row {t}")));
            };
            if s.len() != width as usize {
                return Err(Error::parse(line, "state comment width differs from image width"));
            }
            bits = s.to_string();
        }
        rows.push(parse_bits(&bits, boundary, last_line)?);
    }
    if let Some((line, tok)) = it.next() {
        return Err(Error::parse(line, format!("unexpected trailing data `{tok}`")));
    }
    finish_rows(rows, last_line)
}

fn parse_json(text: &str) -> Result<SpaceTimeDiagram> {
    let doc: DiagramJson = serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.to_string()))?;
    let rows = doc
        .rows
        .iter()
        .map(|r| Generation::parse(r, doc.boundary))
        .collect::<Result<Vec<_>>>()?;
    if rows.len() != doc.steps + 1 {
        return Err(Error::parse(1, format!("{} rows for {} steps", rows.len(), doc.steps)));
    }
    if rows.first().is_some_and(|r| r.width() != doc.width) {
        return Err(Error::parse(1, format!("rows have width {} but width is {}", rows[0].width(), doc.width)));
    }
    match doc.intensities {
        Some(f) => SpaceTimeDiagram::with_intensities(rows, f),
        None => SpaceTimeDiagram::new(rows),
    }
    .map_err(|e| Error::parse(1, e.to_string()))
}
