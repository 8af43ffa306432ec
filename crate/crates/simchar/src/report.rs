//! CSV and JSON-lines reports.
//!
//! Floats are written with 17 significant digits (`{:.16e}`), which
//! identifies every `f64` uniquely, so parsing a report and writing it again
//! reproduces it byte for byte. Lists go into one CSV cell separated by `;`
//! and become arrays in JSON. Non-finite floats are `nan`, `inf`, `-inf` in
//! CSV and `null`, `"inf"`, `"-inf"` in JSON.

use std::io::Write;
use std::str::FromStr;

use serde_json::{Map, Number, Value as Json};
use sha2::{Digest, Sha256};

use crate::{HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    /// `.jsonl`/`.json` means JSON lines, anything else CSV.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl" | "json") => Self::Jsonl,
            _ => Self::Csv,
        }
    }
}

impl FromStr for Format {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "jsonl" => Ok(Self::Jsonl),
            _ => Err(HarnessError::Format(format!("unknown report format `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Text(String),
    Ints(Vec<i64>),
    Floats(Vec<f64>),
}

/// The kind of a column, used when reading reports back.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Int,
    Float,
    Text,
    Ints,
    Floats,
}

pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

fn parse_float(s: &str) -> Result<f64> {
    match s {
        "nan" => Ok(f64::NAN),
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => s.parse().map_err(|_| HarnessError::Format(format!("bad float `{s}`"))),
    }
}

fn parse_int(s: &str) -> Result<i64> {
    s.parse().map_err(|_| HarnessError::Format(format!("bad integer `{s}`")))
}

fn split_list(s: &str) -> impl Iterator<Item = &str> {
    s.split(';').filter(|w| !w.is_empty())
}

impl Value {
    pub fn csv_cell(&self) -> String {
        match self {
            Self::Int(i) => i.to_string(),
            Self::Float(x) => format_float(*x),
            Self::Text(t) => t.clone(),
            Self::Ints(v) => v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(";"),
            Self::Floats(v) => v.iter().map(|x| format_float(*x)).collect::<Vec<_>>().join(";"),
        }
    }

    fn json_float(x: f64) -> Json {
        if x.is_nan() {
            Json::Null
        } else if x.is_infinite() {
            Json::String(format_float(x))
        } else {
            Json::Number(Number::from_str(&format_float(x)).expect("formatted floats are JSON numbers"))
        }
    }

    pub fn to_json(&self) -> Json {
        match self {
            Self::Int(i) => Json::from(*i),
            Self::Float(x) => Self::json_float(*x),
            Self::Text(t) => Json::String(t.clone()),
            Self::Ints(v) => Json::Array(v.iter().map(|&i| Json::from(i)).collect()),
            Self::Floats(v) => Json::Array(v.iter().map(|&x| Self::json_float(x)).collect()),
        }
    }

    pub fn from_csv(kind: Kind, s: &str) -> Result<Self> {
        Ok(match kind {
            Kind::Int => Self::Int(parse_int(s)?),
            Kind::Float => Self::Float(parse_float(s)?),
            Kind::Text => Self::Text(s.to_string()),
            Kind::Ints => Self::Ints(split_list(s).map(parse_int).collect::<Result<_>>()?),
            Kind::Floats => Self::Floats(split_list(s).map(parse_float).collect::<Result<_>>()?),
        })
    }

    fn float_from_json(j: &Json) -> Result<f64> {
        match j {
            Json::Null => Ok(f64::NAN),
            Json::String(s) => parse_float(s),
            Json::Number(n) => parse_float(&n.to_string()),
            _ => Err(HarnessError::Format(format!("expected a number, found {j}"))),
        }
    }

    pub fn from_json(kind: Kind, j: &Json) -> Result<Self> {
        let bad = || HarnessError::Format(format!("unexpected JSON value {j}"));
        let list = || j.as_array().ok_or_else(bad);
        Ok(match kind {
            Kind::Int => Self::Int(j.as_i64().ok_or_else(bad)?),
            Kind::Float => Self::Float(Self::float_from_json(j)?),
            Kind::Text => Self::Text(j.as_str().ok_or_else(bad)?.to_string()),
            Kind::Ints => Self::Ints(list()?.iter().map(|x| x.as_i64().ok_or_else(bad)).collect::<Result<_>>()?),
            Kind::Floats => Self::Floats(list()?.iter().map(Self::float_from_json).collect::<Result<_>>()?),
        })
    }
}

/// An ordered list of named values.
pub type Record = Vec<(String, Value)>;

pub fn json_object(record: &Record) -> Map<String, Json> {
    record.iter().map(|(k, v)| (k.clone(), v.to_json())).collect()
}

pub fn json_line(record: &Record) -> String {
    Json::Object(json_object(record)).to_string()
}

/// Something that turns into a report row and back.
pub trait Row: Sized {
    /// Column names and kinds, in output order.
    fn schema(&self) -> Vec<(&'static str, Kind)>;
    fn schema_for_header(header: &[String]) -> Result<Vec<Kind>>;
    fn to_record(&self) -> Record;
    fn from_record(record: &Record) -> Result<Self>;
}

/// Writes a header-only CSV when `rows` is empty and `header` is given.
pub fn emit_report<R: Row, W: Write>(rows: &[R], header: Option<&[&str]>, format: Format, mut out: W) -> Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(&mut out);
            let names: Vec<String> = match rows.first() {
                Some(r) => r.schema().into_iter().map(|(n, _)| n.to_string()).collect(),
                None => header.unwrap_or_default().iter().map(|s| s.to_string()).collect(),
            };
            if !names.is_empty() {
                w.write_record(&names)?;
            }
            for r in rows {
                w.write_record(r.to_record().iter().map(|(_, v)| v.csv_cell()))?;
            }
            w.flush()?;
        }
        Format::Jsonl => {
            for r in rows {
                writeln!(out, "{}", json_line(&r.to_record()))?;
            }
        }
    }
    Ok(())
}

pub fn parse_report<R: Row>(text: &str, format: Format) -> Result<Vec<R>> {
    match format {
        Format::Csv => {
            let mut rd = csv::ReaderBuilder::new().from_reader(text.as_bytes());
            let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
            let kinds = R::schema_for_header(&header)?;
            let mut out = Vec::new();
            for rec in rd.records() {
                let rec = rec?;
                let record = header
                    .iter()
                    .zip(&kinds)
                    .zip(rec.iter())
                    .map(|((h, &k), cell)| Ok((h.clone(), Value::from_csv(k, cell)?)))
                    .collect::<Result<Record>>()?;
                out.push(R::from_record(&record)?);
            }
            Ok(out)
        }
        Format::Jsonl => text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|line| {
                let Json::Object(m) = serde_json::from_str::<Json>(line)? else {
                    return Err(HarnessError::Format("JSON line is not an object".into()));
                };
                let header: Vec<String> = m.keys().cloned().collect();
                let kinds = R::schema_for_header(&header)?;
                let record =
                    m.iter().zip(kinds).map(|((k, v), kind)| Ok((k.clone(), Value::from_json(kind, v)?))).collect::<Result<Record>>()?;
                R::from_record(&record)
            })
            .collect(),
    }
}

/// First 16 hex digits of the SHA-256 of `text`.
pub fn config_hash(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// One level of a convergence run.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub manifold: String,
    pub level: i64,
    pub seed: i64,
    pub top_simplices: i64,
    pub mesh: f64,
    pub fullness: f64,
    pub betti: Vec<i64>,
    /// Smallest positive eigenvalue of `Δ_r` for every degree `r`.
    pub spectral_gaps: Vec<f64>,
    /// `log det Δ_r` on `im δ_{r+1}` for every degree `r`.
    pub log_det_coexact: Vec<f64>,
    /// `det h^{(r)}` for every degree `r`.
    pub det_h: Vec<f64>,
    pub partition: f64,
    pub log_partition: f64,
    pub class_sum: f64,
    /// Relative error of the first positive eigenvalue of `Δ_0` against the
    /// smooth value; `nan` when none is known.
    pub eigen_error: f64,
    /// Character approximation error; `nan` when not computed.
    pub character_error: f64,
    pub fitted_c: f64,
    /// `pass`, `fail` or `skipped`.
    pub model_check: String,
    pub stokes: f64,
    pub hodge_residual: f64,
    pub config_hash: String,
    /// Seconds; only written when timings are requested, since it breaks
    /// byte-for-byte reproducibility.
    pub wall_time: Option<f64>,
}

const COLUMNS: [(&str, Kind); 20] = [
    ("manifold", Kind::Text),
    ("level", Kind::Int),
    ("seed", Kind::Int),
    ("top_simplices", Kind::Int),
    ("mesh", Kind::Float),
    ("fullness", Kind::Float),
    ("betti", Kind::Ints),
    ("spectral_gaps", Kind::Floats),
    ("log_det_coexact", Kind::Floats),
    ("det_h", Kind::Floats),
    ("partition", Kind::Float),
    ("log_partition", Kind::Float),
    ("class_sum", Kind::Float),
    ("eigen_error", Kind::Float),
    ("character_error", Kind::Float),
    ("fitted_c", Kind::Float),
    ("model_check", Kind::Text),
    ("stokes", Kind::Float),
    ("hodge_residual", Kind::Float),
    ("config_hash", Kind::Text),
];

impl ConvergenceRow {
    pub fn header(timings: bool) -> Vec<&'static str> {
        let mut h: Vec<&str> = COLUMNS.iter().map(|(n, _)| *n).collect();
        if timings {
            h.push("wall_time");
        }
        h
    }
}

impl Row for ConvergenceRow {
    fn schema(&self) -> Vec<(&'static str, Kind)> {
        let mut s = COLUMNS.to_vec();
        if self.wall_time.is_some() {
            s.push(("wall_time", Kind::Float));
        }
        s
    }

    fn schema_for_header(header: &[String]) -> Result<Vec<Kind>> {
        header
            .iter()
            .map(|h| {
                COLUMNS
                    .iter()
                    .chain(&[("wall_time", Kind::Float)])
                    .find(|(n, _)| n == h)
                    .map(|&(_, k)| k)
                    .ok_or_else(|| HarnessError::Format(format!("unknown column `{h}`")))
            })
            .collect()
    }

    fn to_record(&self) -> Record {
        let mut r: Record = vec![
            ("manifold".into(), Value::Text(self.manifold.clone())),
            ("level".into(), Value::Int(self.level)),
            ("seed".into(), Value::Int(self.seed)),
            ("top_simplices".into(), Value::Int(self.top_simplices)),
            ("mesh".into(), Value::Float(self.mesh)),
            ("fullness".into(), Value::Float(self.fullness)),
            ("betti".into(), Value::Ints(self.betti.clone())),
            ("spectral_gaps".into(), Value::Floats(self.spectral_gaps.clone())),
            ("log_det_coexact".into(), Value::Floats(self.log_det_coexact.clone())),
            ("det_h".into(), Value::Floats(self.det_h.clone())),
            ("partition".into(), Value::Float(self.partition)),
            ("log_partition".into(), Value::Float(self.log_partition)),
            ("class_sum".into(), Value::Float(self.class_sum)),
            ("eigen_error".into(), Value::Float(self.eigen_error)),
            ("character_error".into(), Value::Float(self.character_error)),
            ("fitted_c".into(), Value::Float(self.fitted_c)),
            ("model_check".into(), Value::Text(self.model_check.clone())),
            ("stokes".into(), Value::Float(self.stokes)),
            ("hodge_residual".into(), Value::Float(self.hodge_residual)),
            ("config_hash".into(), Value::Text(self.config_hash.clone())),
        ];
        if let Some(t) = self.wall_time {
            r.push(("wall_time".into(), Value::Float(t)));
        }
        r
    }

    fn from_record(record: &Record) -> Result<Self> {
        let get = |name: &str| {
            record.iter().find(|(k, _)| k == name).map(|(_, v)| v).ok_or_else(|| HarnessError::Format(format!("missing column `{name}`")))
        };
        let wrong = |name: &str| HarnessError::Format(format!("column `{name}` has the wrong type"));
        let int = |n: &str| match get(n)? {
            Value::Int(i) => Ok(*i),
            _ => Err(wrong(n)),
        };
        let float = |n: &str| match get(n)? {
            Value::Float(x) => Ok(*x),
            _ => Err(wrong(n)),
        };
        let text = |n: &str| match get(n)? {
            Value::Text(t) => Ok(t.clone()),
            _ => Err(wrong(n)),
        };
        let floats = |n: &str| match get(n)? {
            Value::Floats(v) => Ok(v.clone()),
            _ => Err(wrong(n)),
        };
        let ints = |n: &str| match get(n)? {
            Value::Ints(v) => Ok(v.clone()),
            _ => Err(wrong(n)),
        };
        Ok(Self {
            manifold: text("manifold")?,
            level: int("level")?,
            seed: int("seed")?,
            top_simplices: int("top_simplices")?,
            mesh: float("mesh")?,
            fullness: float("fullness")?,
            betti: ints("betti")?,
            spectral_gaps: floats("spectral_gaps")?,
            log_det_coexact: floats("log_det_coexact")?,
            det_h: floats("det_h")?,
            partition: float("partition")?,
            log_partition: float("log_partition")?,
            class_sum: float("class_sum")?,
            eigen_error: float("eigen_error")?,
            character_error: float("character_error")?,
            fitted_c: float("fitted_c")?,
            model_check: text("model_check")?,
            stokes: float("stokes")?,
            hodge_residual: float("hodge_residual")?,
            config_hash: text("config_hash")?,
            wall_time: if record.iter().any(|(k, _)| k == "wall_time") { Some(float("wall_time")?) } else { None },
        })
    }
}
