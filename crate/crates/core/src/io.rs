//! Text formats: domain files (TOML), spectrum and trace tables, digests.
//!
//! Domain file, schema 1:
//!
//! ```toml
//! schema = 1
//! label = "quarter disk"
//! [[loops]]            # first loop outer (counterclockwise), then holes (clockwise)
//! [[loops.segments]]
//! kind = "line"        # line | arc | ellipse | bezier
//! from = [0.0, 0.0]
//! to = [1.0, 0.0]
//! [[loops.segments]]
//! kind = "arc"         # positive radius runs counterclockwise
//! from = [1.0, 0.0]
//! to = [0.0, 1.0]
//! center = [0.0, 0.0]
//! radius = 1.0
//! ```
//!
//! `ellipse` takes `center`, `semi_axes`, `rotation`, `start_angle`,
//! `end_angle`; `bezier` takes four `control` points.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::{BoundaryLoop, Curve, DomainSpec, Segment, Vec2};
use crate::heat_trace::TraceSamples;
use crate::spectrum::{Spectrum, SpectrumSource};

pub const DOMAIN_SCHEMA: u32 = 1;
/// Relative tolerance for the `multiplicity_hint` column.
pub const MULTIPLICITY_REL_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DomainFile {
    schema: u32,
    #[serde(default)]
    label: String,
    loops: Vec<LoopFile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LoopFile {
    segments: Vec<SegmentFile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum SegmentFile {
    Line { from: [f64; 2], to: [f64; 2] },
    Arc { from: [f64; 2], to: [f64; 2], center: [f64; 2], radius: f64 },
    Ellipse { center: [f64; 2], semi_axes: [f64; 2], rotation: f64, start_angle: f64, end_angle: f64 },
    Bezier { control: [[f64; 2]; 4] },
}

fn v(p: [f64; 2]) -> Vec2<f64> {
    Vec2::new(p[0], p[1])
}

fn a(p: Vec2<f64>) -> [f64; 2] {
    [p.x, p.y]
}

impl SegmentFile {
    fn to_segment(&self) -> Segment<f64> {
        match *self {
            SegmentFile::Line { from, to } => Segment::line(v(from), v(to)),
            SegmentFile::Arc { from, to, center, radius } => Segment::arc(v(from), v(to), v(center), radius),
            SegmentFile::Ellipse { center, semi_axes, rotation, start_angle, end_angle } => Segment::Parametric(Curve::Ellipse {
                center: v(center),
                semi_axes: (semi_axes[0], semi_axes[1]),
                rotation,
                start_angle,
                end_angle,
            }),
            SegmentFile::Bezier { control } => Segment::Parametric(Curve::Bezier { control: control.map(v) }),
        }
    }

    fn from_segment(s: &Segment<f64>) -> Self {
        match *s {
            Segment::Line { from, to } => SegmentFile::Line { from: a(from), to: a(to) },
            Segment::Arc { from, to, center, radius } => SegmentFile::Arc { from: a(from), to: a(to), center: a(center), radius },
            Segment::Parametric(Curve::Ellipse { center, semi_axes, rotation, start_angle, end_angle }) => SegmentFile::Ellipse {
                center: a(center),
                semi_axes: [semi_axes.0, semi_axes.1],
                rotation,
                start_angle,
                end_angle,
            },
            Segment::Parametric(Curve::Bezier { control }) => SegmentFile::Bezier { control: control.map(a) },
        }
    }
}

/// Parses and validates a domain file.
pub fn parse_domain(text: &str, source_name: &str) -> Result<DomainSpec<f64>> {
    let file: DomainFile = toml::from_str(text).map_err(|e| Error::parse(source_name, e.to_string()))?;
    if file.schema != DOMAIN_SCHEMA {
        return Err(Error::parse(source_name, format!("unsupported schema {} (expected {DOMAIN_SCHEMA})", file.schema)));
    }
    if file.loops.is_empty() {
        return Err(Error::InvalidDomain { loop_index: 0, segment: 0, reason: "domain file has no loops".into() });
    }
    let loops = file
        .loops
        .iter()
        .enumerate()
        .map(|(i, l)| {
            if l.segments.is_empty() {
                return Err(Error::InvalidDomain { loop_index: i, segment: 0, reason: "loop has no segments".into() });
            }
            Ok(BoundaryLoop::new(l.segments.iter().map(SegmentFile::to_segment).collect()))
        })
        .collect::<Result<Vec<_>>>()?;
    let label = if file.label.is_empty() { source_name.to_string() } else { file.label };
    DomainSpec::new(label, loops)
}

pub fn domain_to_toml(domain: &DomainSpec<f64>) -> Result<String> {
    let file = DomainFile {
        schema: DOMAIN_SCHEMA,
        label: domain.label().to_string(),
        loops: domain
            .loops()
            .iter()
            .map(|l| LoopFile { segments: l.segments.iter().map(SegmentFile::from_segment).collect() })
            .collect(),
    };
    toml::to_string(&file).map_err(|e| Error::numeric("domain serialization", e.to_string()))
}

pub fn read_domain(path: &Path) -> Result<DomainSpec<f64>> {
    parse_domain(&fs::read_to_string(path)?, &path.display().to_string())
}

/// `key=value` token; values with whitespace, quotes or `=` are quoted.
fn header_token(key: &str, value: &str) -> String {
    if !value.is_empty() && !value.chars().any(|c| c.is_whitespace() || c == '"' || c == '\\') {
        format!("{key}={value}")
    } else {
        let escaped = value.replace('\\', "\\\\").replace('"', "\\\"");
        format!("{key}=\"{escaped}\"")
    }
}

/// `# tool=… version=… key=value…` comment line for derived tables.
pub fn provenance_line(inputs: &[(String, String)]) -> String {
    let mut tokens = vec![header_token("tool", env!("CARGO_PKG_NAME")), header_token("version", env!("CARGO_PKG_VERSION"))];
    tokens.extend(inputs.iter().map(|(k, v)| header_token(k, v)));
    format!("# {}\n", tokens.join(" "))
}

fn parse_header(line: &str, source_name: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    let mut chars = line.chars().peekable();
    loop {
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        if chars.peek().is_none() {
            return Ok(out);
        }
        let mut key = String::new();
        while let Some(&c) = chars.peek() {
            if c == '=' || c.is_whitespace() {
                break;
            }
            key.push(c);
            chars.next();
        }
        if chars.next() != Some('=') || key.is_empty() {
            return Err(Error::parse(source_name, format!("malformed header token near {key:?}")));
        }
        let mut value = String::new();
        if chars.peek() == Some(&'"') {
            chars.next();
            loop {
                match chars.next() {
                    Some('\\') => value.push(chars.next().ok_or_else(|| Error::parse(source_name, "dangling escape"))?),
                    Some('"') => break,
                    Some(c) => value.push(c),
                    None => return Err(Error::parse(source_name, "unterminated quoted header value")),
                }
            }
        } else {
            while let Some(&c) = chars.peek() {
                if c.is_whitespace() {
                    break;
                }
                value.push(c);
                chars.next();
            }
        }
        out.push((key, value));
    }
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Spectrum table with a provenance header; 17 significant digits.
pub fn spectrum_to_text(spectrum: &Spectrum<f64>) -> String {
    let mut header = vec![header_token("cutoff", &num(spectrum.cutoff()))];
    if let Some(area) = spectrum.area_hint() {
        header.push(header_token("area_hint", &num(area)));
    }
    header.push(header_token("source", &spectrum.source().to_string()));
    header.push(header_token("label", spectrum.domain_label()));
    for (k, val) in &spectrum.annotations {
        header.push(header_token(k, val));
    }
    let mut out = format!("# {}\nindex,eigenvalue,multiplicity_hint\n", header.join(" "));
    let hints = spectrum.multiplicity_hints(MULTIPLICITY_REL_TOL);
    for (i, (l, m)) in spectrum.eigenvalues().iter().zip(hints).enumerate() {
        let _ = writeln!(out, "{},{},{m}", i + 1, num(*l));
    }
    out
}

pub fn parse_spectrum(text: &str, source_name: &str) -> Result<Spectrum<f64>> {
    let mut header = Vec::new();
    let mut values = Vec::new();
    let mut seen_columns = false;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        let at = |reason: String| Error::parse(source_name, format!("line {}: {reason}", lineno + 1));
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if seen_columns {
                return Err(at("header after data".into()));
            }
            header.extend(parse_header(rest, source_name)?);
            continue;
        }
        if !seen_columns {
            if line.replace(' ', "") != "index,eigenvalue,multiplicity_hint" {
                return Err(at(format!("expected column header, found {line:?}")));
            }
            seen_columns = true;
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 3 {
            return Err(at(format!("expected 3 columns, found {}", cols.len())));
        }
        let index: usize = cols[0].parse().map_err(|_| at(format!("bad index {:?}", cols[0])))?;
        if index != values.len() + 1 {
            return Err(at(format!("index {index} out of sequence")));
        }
        let value: f64 = cols[1].parse().map_err(|_| at(format!("bad eigenvalue {:?}", cols[1])))?;
        if !value.is_finite() {
            return Err(at(format!("non-finite eigenvalue {value}")));
        }
        cols[2].parse::<usize>().map_err(|_| at(format!("bad multiplicity hint {:?}", cols[2])))?;
        values.push(value);
    }
    let mut cutoff = None;
    let mut area_hint = None;
    let mut source = SpectrumSource::File;
    let mut label = source_name.to_string();
    let mut annotations = Vec::new();
    for (k, val) in header {
        let number = |s: &str| s.parse::<f64>().map_err(|_| Error::parse(source_name, format!("bad {k} value {s:?}")));
        match k.as_str() {
            "cutoff" => cutoff = Some(number(&val)?),
            "area_hint" => area_hint = Some(number(&val)?),
            "source" => source = val.parse()?,
            "label" => label = val,
            _ => annotations.push((k, val)),
        }
    }
    let cutoff = cutoff.ok_or_else(|| Error::parse(source_name, "header lacks cutoff="))?;
    if values.is_empty() {
        return Err(Error::EmptySpectrum(format!("{source_name} lists no eigenvalues")));
    }
    let mut spectrum = Spectrum::new(values, cutoff, source, label)?;
    if let Some(a) = area_hint {
        spectrum = spectrum.with_area_hint(a);
    }
    spectrum.annotations = annotations;
    Ok(spectrum)
}

pub fn read_spectrum(path: &Path) -> Result<Spectrum<f64>> {
    parse_spectrum(&fs::read_to_string(path)?, &path.display().to_string())
}

/// `t,h,tail_bound` table.
pub fn trace_to_text(samples: &TraceSamples<f64>) -> String {
    let mut out = format!(
        "# cutoff={} safety_factor={} area_used={}\nt,h,tail_bound\n",
        num(samples.cutoff),
        num(samples.safety_factor),
        num(samples.area_used)
    );
    for ((t, h), b) in samples.grid.iter().zip(&samples.values).zip(&samples.tail_bounds) {
        let _ = writeln!(out, "{},{},{}", num(*t), num(*h), num(*b));
    }
    out
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn file_digest(path: &Path) -> Result<String> {
    Ok(sha256_hex(&fs::read(path)?))
}

/// Writes `contents`, creating parent directories on demand.
pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents)?;
    Ok(())
}
