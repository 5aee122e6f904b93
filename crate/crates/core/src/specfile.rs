//! The `.cmm` manifold description format.
//!
//! ```text
//! # comment
//! [manifold]
//! name = example3
//! coordinates = x, y, z
//! nonzero = z
//! box.z = 0.5, 2
//!
//! [frame]
//! xi = 1, 0, 0
//! e = -2*y, 2*x*z - 1, 1
//! phie = 0, 1, 0
//! ```
//!
//! A `[tensor]` section may replace `[frame]`; it takes the six upper
//! metric components `g11 g12 g13 g22 g23 g33`, the rows `phi1 phi2 phi3`
//! of `φ` and `xi`. `nonzero` and `positive` accept comma-separated lists
//! and may repeat. Coordinates without a `box.` line are sampled from
//! `[-1, 1]`.

use std::fmt::Write as _;

use thiserror::Error;

use crate::expr::{parse, Coords, Expr, DIM};
use crate::fields::{TensorField11, VectorField};
use crate::structure::{
    build_from_frame, build_from_tensors, ChartSpec, ConstraintKind, ContactStructure, DomainConstraint, Matrix,
    SamplingBox, StructureError,
};

/// Error with 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct SpecError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

fn err(line: usize, col: usize, message: impl Into<String>) -> SpecError {
    SpecError { line, col, message: message.into() }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    Frame { xi: VectorField, e: VectorField, phie: VectorField },
    Tensor { g: Matrix, phi: TensorField11, xi: VectorField },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldSpec {
    pub chart: ChartSpec,
    pub body: Body,
}

impl ManifoldSpec {
    pub fn build(&self) -> Result<ContactStructure, StructureError> {
        match &self.body {
            Body::Frame { xi, e, phie } => build_from_frame(self.chart.clone(), xi.clone(), e.clone(), phie.clone()),
            Body::Tensor { g, phi, xi } => build_from_tensors(self.chart.clone(), g.clone(), phi.clone(), xi.clone()),
        }
    }

    /// The description of an already built structure, in frame form when
    /// the structure remembers its frame.
    pub fn from_structure(s: &ContactStructure) -> Self {
        let body = match &s.frame {
            Some(f) => Body::Frame { xi: f.xi.clone(), e: f.e.clone(), phie: f.phie.clone() },
            None => Body::Tensor { g: s.g.clone(), phi: s.phi.clone(), xi: s.xi.clone() },
        };
        ManifoldSpec { chart: s.chart.clone(), body }
    }

    pub fn render(&self) -> String {
        let c = &self.chart.coords;
        let show = |e: &Expr| e.display(c).to_string();
        let triple = |v: &[Expr; DIM]| v.iter().map(show).collect::<Vec<_>>().join(", ");
        let mut out = String::new();
        out.push_str("[manifold]\n");
        let _ = writeln!(out, "name = {}", self.chart.name);
        let _ = writeln!(out, "coordinates = {}", c.names().join(", "));
        for DomainConstraint { expr, kind } in &self.chart.constraints {
            let key = match kind {
                ConstraintKind::NonZero => "nonzero",
                ConstraintKind::Positive => "positive",
            };
            let _ = writeln!(out, "{key} = {}", show(expr));
        }
        for (i, (lo, hi)) in self.chart.sampling_box.bounds().iter().enumerate() {
            let _ = writeln!(out, "box.{} = {lo:?}, {hi:?}", c.name(i));
        }
        out.push('\n');
        match &self.body {
            Body::Frame { xi, e, phie } => {
                out.push_str("[frame]\n");
                let _ = writeln!(out, "xi = {}", triple(&xi.0));
                let _ = writeln!(out, "e = {}", triple(&e.0));
                let _ = writeln!(out, "phie = {}", triple(&phie.0));
            }
            Body::Tensor { g, phi, xi } => {
                out.push_str("[tensor]\n");
                for (i, j) in UPPER {
                    let _ = writeln!(out, "g{}{} = {}", i + 1, j + 1, show(&g[i][j]));
                }
                for (i, row) in phi.0.iter().enumerate() {
                    let _ = writeln!(out, "phi{} = {}", i + 1, triple(row));
                }
                let _ = writeln!(out, "xi = {}", triple(&xi.0));
            }
        }
        out
    }
}

const UPPER: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

#[derive(PartialEq, Clone, Copy)]
enum Section {
    None,
    Manifold,
    Frame,
    Tensor,
}

/// A `key = value` line with the 1-based column where the value starts.
struct Entry<'a> {
    line: usize,
    key: &'a str,
    key_col: usize,
    value: &'a str,
    value_col: usize,
}

fn char_col(line: &str, byte: usize) -> usize {
    line[..byte].chars().count() + 1
}

/// Splits a comma-separated value, yielding each piece with its column.
fn split_list(value: &str, value_col: usize) -> Vec<(&str, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, ch) in value.char_indices().chain(std::iter::once((value.len(), ','))) {
        if ch == ',' {
            let piece = &value[start..i];
            let lead = piece.len() - piece.trim_start().len();
            let col = value_col + value[..start + lead].chars().count();
            out.push((piece.trim(), col));
            start = i + 1;
        }
    }
    out
}

struct Parsed<'a> {
    entries: Vec<(Section, Entry<'a>)>,
    saw: [Option<usize>; 4],
}

fn scan(text: &str) -> Result<Parsed<'_>, SpecError> {
    let mut section = Section::None;
    let mut entries = Vec::new();
    let mut saw: [Option<usize>; 4] = [None; 4];
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = content.len() - content.trim_start().len();
        if trimmed.starts_with('[') {
            let col = char_col(raw, indent);
            section = match trimmed {
                "[manifold]" => Section::Manifold,
                "[frame]" => Section::Frame,
                "[tensor]" => Section::Tensor,
                _ => return Err(err(line_no, col, format!("unknown section `{trimmed}`"))),
            };
            let slot = &mut saw[section as usize];
            if slot.is_some() {
                return Err(err(line_no, col, format!("duplicate section `{trimmed}`")));
            }
            *slot = Some(line_no);
            continue;
        }
        let Some(eq) = content.find('=') else {
            return Err(err(line_no, char_col(raw, indent), "expected `key = value`"));
        };
        if section == Section::None {
            return Err(err(line_no, char_col(raw, indent), "entry outside of any section"));
        }
        let key = content[..eq].trim();
        let after = &content[eq + 1..];
        let lead = after.len() - after.trim_start().len();
        let value = after.trim();
        let value_col = char_col(raw, eq + 1 + lead);
        if key.is_empty() {
            return Err(err(line_no, char_col(raw, indent), "missing key"));
        }
        entries.push((section, Entry { line: line_no, key, key_col: char_col(raw, indent), value, value_col }));
    }
    Ok(Parsed { entries, saw })
}

fn parse_expr(e: &Entry, text: &str, col: usize, coords: &Coords) -> Result<Expr, SpecError> {
    parse(text, coords).map_err(|pe| {
        let offset = pe.position().unwrap_or(1);
        err(e.line, col + offset - 1, pe.to_string())
    })
}

fn parse_triple(e: &Entry, coords: &Coords) -> Result<[Expr; DIM], SpecError> {
    let pieces = split_list(e.value, e.value_col);
    if pieces.len() != DIM {
        return Err(err(
            e.line,
            e.value_col,
            format!("`{}` needs {DIM} comma-separated expressions, found {}", e.key, pieces.len()),
        ));
    }
    let mut out: Vec<Expr> = Vec::with_capacity(DIM);
    for (text, col) in pieces {
        out.push(parse_expr(e, text, col, coords)?);
    }
    Ok(out.try_into().expect("length checked"))
}

fn parse_number(e: &Entry, text: &str, col: usize) -> Result<f64, SpecError> {
    text.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| err(e.line, col, format!("expected a finite number, found `{text}`")))
}

pub fn parse_spec(text: &str) -> Result<ManifoldSpec, SpecError> {
    let parsed = scan(text)?;
    if parsed.saw[Section::Manifold as usize].is_none() {
        return Err(err(1, 1, "missing [manifold] section"));
    }
    let body_kind = match (parsed.saw[Section::Frame as usize], parsed.saw[Section::Tensor as usize]) {
        (Some(_), None) => Section::Frame,
        (None, Some(_)) => Section::Tensor,
        (Some(_), Some(line)) => return Err(err(line, 1, "a spec has either [frame] or [tensor], not both")),
        (None, None) => return Err(err(1, 1, "missing [frame] or [tensor] section")),
    };

    let manifold: Vec<&Entry> =
        parsed.entries.iter().filter(|(s, _)| *s == Section::Manifold).map(|(_, e)| e).collect();
    let mut name: Option<String> = None;
    let mut coords = Coords::xyz();
    if let Some(e) = manifold.iter().find(|e| e.key == "coordinates") {
        let names = split_list(e.value, e.value_col);
        if names.len() != DIM {
            return Err(err(e.line, e.value_col, format!("expected {DIM} coordinate names")));
        }
        coords =
            Coords::new([names[0].0, names[1].0, names[2].0]).map_err(|ce| err(e.line, e.value_col, ce.to_string()))?;
    }
    let mut bounds = SamplingBox::default().bounds();
    let mut constraints = Vec::new();
    let mut seen_keys: Vec<&str> = Vec::new();
    for e in &manifold {
        match e.key {
            "name" => {
                if e.value.is_empty() {
                    return Err(err(e.line, e.value_col, "empty name"));
                }
                name = Some(e.value.to_string());
            }
            "coordinates" => {}
            "nonzero" | "positive" => {
                let kind = if e.key == "nonzero" { ConstraintKind::NonZero } else { ConstraintKind::Positive };
                for (text, col) in split_list(e.value, e.value_col) {
                    constraints.push(DomainConstraint { expr: parse_expr(e, text, col, &coords)?, kind });
                }
                continue;
            }
            key if key.starts_with("box.") => {
                let coord = &key[4..];
                let index = coords
                    .index_of(coord)
                    .ok_or_else(|| err(e.line, e.key_col + 4, format!("unknown coordinate `{coord}`")))?;
                let pieces = split_list(e.value, e.value_col);
                if pieces.len() != 2 {
                    return Err(err(e.line, e.value_col, "a box interval is `low, high`"));
                }
                let lo = parse_number(e, pieces[0].0, pieces[0].1)?;
                let hi = parse_number(e, pieces[1].0, pieces[1].1)?;
                if lo >= hi {
                    return Err(err(e.line, e.value_col, format!("empty interval [{lo}, {hi}]")));
                }
                bounds[index] = (lo, hi);
            }
            other => return Err(err(e.line, e.key_col, format!("unknown key `{other}` in [manifold]"))),
        }
        if seen_keys.contains(&e.key) {
            return Err(err(e.line, e.key_col, format!("duplicate key `{}`", e.key)));
        }
        seen_keys.push(e.key);
    }
    let name = name.ok_or_else(|| err(parsed.saw[Section::Manifold as usize].unwrap_or(1), 1, "missing `name`"))?;
    let sampling_box = SamplingBox::new(bounds).map_err(|b| err(1, 1, b.to_string()))?;
    let chart = ChartSpec { name, coords: coords.clone(), constraints, sampling_box };

    let section_line = parsed.saw[body_kind as usize].unwrap_or(1);
    let body_entries: Vec<&Entry> = parsed.entries.iter().filter(|(s, _)| *s == body_kind).map(|(_, e)| e).collect();
    let allowed: &[&str] = match body_kind {
        Section::Frame => &["xi", "e", "phie"],
        _ => &["g11", "g12", "g13", "g22", "g23", "g33", "phi1", "phi2", "phi3", "xi"],
    };
    let mut seen: Vec<&str> = Vec::new();
    for e in &body_entries {
        if !allowed.contains(&e.key) {
            return Err(err(e.line, e.key_col, format!("unknown key `{}`", e.key)));
        }
        if seen.contains(&e.key) {
            return Err(err(e.line, e.key_col, format!("duplicate key `{}`", e.key)));
        }
        seen.push(e.key);
    }
    let get = |key: &str| {
        body_entries
            .iter()
            .find(|e| e.key == key)
            .copied()
            .ok_or_else(|| err(section_line, 1, format!("missing `{key}`")))
    };
    let body = match body_kind {
        Section::Frame => Body::Frame {
            xi: VectorField(parse_triple(get("xi")?, &coords)?),
            e: VectorField(parse_triple(get("e")?, &coords)?),
            phie: VectorField(parse_triple(get("phie")?, &coords)?),
        },
        _ => {
            let mut g: Matrix = std::array::from_fn(|_| std::array::from_fn(|_| Expr::zero()));
            for (i, j) in UPPER {
                let e = get(&format!("g{}{}", i + 1, j + 1))?;
                let v = parse_expr(e, e.value, e.value_col, &coords)?;
                g[j][i] = v.clone();
                g[i][j] = v;
            }
            let rows = [get("phi1")?, get("phi2")?, get("phi3")?];
            let mut phi: Vec<[Expr; DIM]> = Vec::with_capacity(DIM);
            for e in rows {
                phi.push(parse_triple(e, &coords)?);
            }
            Body::Tensor {
                g,
                phi: TensorField11(phi.try_into().expect("three rows")),
                xi: VectorField(parse_triple(get("xi")?, &coords)?),
            }
        }
    };
    Ok(ManifoldSpec { chart, body })
}
