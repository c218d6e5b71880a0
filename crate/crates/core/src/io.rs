//! Persistence: JSON solution files, the sphere-profile document and CSV tables.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphere_solver::{residual_fields, SphereProfile};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolutionKind {
    Landau,
    Hamel,
    Profile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool_version: String,
    pub seed: Option<u64>,
    pub timestamp: String,
}

impl Provenance {
    pub fn new(seed: Option<u64>, timestamp: impl Into<String>) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            timestamp: timestamp.into(),
        }
    }
}

/// Self-describing record of one constructed or solved field.
///
/// Landau files carry `v`, `f`, `p` (and `phi`) on a colatitude grid, Hamel
/// files carry `f`, `p` on the circle grid, profile files carry `g`, `f`, `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub schema_version: u32,
    pub kind: SolutionKind,
    pub n: usize,
    pub params: BTreeMap<String, f64>,
    pub grid: Vec<f64>,
    pub fields: BTreeMap<String, Vec<f64>>,
    pub residual_summary: BTreeMap<String, f64>,
    pub provenance: Provenance,
}

impl SolutionFile {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Format(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        for (name, v) in &self.fields {
            if v.len() != self.grid.len() {
                return Err(Error::Format(format!(
                    "field '{name}' has {} samples for a grid of {}",
                    v.len(),
                    self.grid.len()
                )));
            }
        }
        let required: &[&str] = match self.kind {
            SolutionKind::Landau => &["v", "f", "p"],
            SolutionKind::Hamel => &["f", "p"],
            SolutionKind::Profile => &["g", "f", "p"],
        };
        for r in required {
            if !self.fields.contains_key(*r) {
                return Err(Error::Format(format!("{:?} file lacks field '{r}'", self.kind)));
            }
        }
        Ok(())
    }

    pub fn field(&self, name: &str) -> Result<&[f64]> {
        self.fields
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Format(format!("missing field '{name}'")))
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.get(name).copied()
    }

    /// The sphere profile stored in a Landau or profile file.
    pub fn sphere_profile(&self) -> Result<SphereProfile> {
        let g = match self.kind {
            SolutionKind::Landau => self.field("v")?,
            SolutionKind::Profile => self.field("g")?,
            SolutionKind::Hamel => return Err(Error::Format("a Hamel file holds a circle profile".into())),
        };
        SphereProfile::new(
            self.n,
            self.grid.clone(),
            g.to_vec(),
            self.field("f")?.to_vec(),
            self.field("p")?.to_vec(),
        )
    }
}

/// Residual arrays of the axisymmetric system on the profile grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileResiduals {
    pub eq1: Vec<f64>,
    pub eq2: Vec<f64>,
    pub eq3: Vec<f64>,
}

/// The document written by `solve`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileFile {
    pub n: usize,
    pub thetas: Vec<f64>,
    pub g: Vec<f64>,
    pub f: Vec<f64>,
    pub p: Vec<f64>,
    pub residuals: ProfileResiduals,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matched_kappa: Option<f64>,
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

impl ProfileFile {
    pub fn from_profile(profile: &SphereProfile, matched_kappa: Option<f64>, provenance: Option<Provenance>) -> Self {
        let r = residual_fields(profile);
        Self {
            n: profile.n,
            thetas: profile.thetas.clone(),
            g: profile.g.clone(),
            f: profile.f.clone(),
            p: profile.p.clone(),
            residuals: ProfileResiduals {
                eq1: r.eq1,
                eq2: r.eq2,
                eq3: r.eq3,
            },
            matched_kappa,
            schema_version: SCHEMA_VERSION,
            provenance,
        }
    }

    pub fn profile(&self) -> Result<SphereProfile> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Format(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        SphereProfile::new(self.n, self.thetas.clone(), self.g.clone(), self.f.clone(), self.p.clone())
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

pub fn read_solution(path: &Path) -> Result<SolutionFile> {
    let s: SolutionFile = read_json(path)?;
    s.validate()?;
    Ok(s)
}

/// Column-oriented numeric table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Self {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            columns: vec![Vec::new(); headers.len()],
        }
    }

    pub fn push(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.headers.len(), "row width differs from header");
        for (c, v) in self.columns.iter_mut().zip(row) {
            c.push(*v);
        }
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.headers
            .iter()
            .position(|h| h == name)
            .map(|i| self.columns[i].as_slice())
    }

    pub fn has_columns(&self, names: &[&str]) -> bool {
        names.iter().all(|n| self.column(n).is_some())
    }

    pub fn write<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(&self.headers)?;
        for i in 0..self.rows() {
            let rec: Vec<String> = self.columns.iter().map(|c| format_float(c[i])).collect();
            wr.write_record(&rec)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn write_path(&self, path: &Path) -> Result<()> {
        self.write(BufWriter::new(File::create(path)?))
    }

    pub fn read<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let headers: Vec<String> = rd.headers()?.iter().map(|h| h.trim().to_string()).collect();
        let mut columns = vec![Vec::new(); headers.len()];
        for (line, rec) in rd.records().enumerate() {
            let rec = rec?;
            if rec.len() != headers.len() {
                return Err(Error::Format(format!("row {} has {} fields", line + 1, rec.len())));
            }
            for (c, field) in columns.iter_mut().zip(rec.iter()) {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| Error::Format(format!("row {}: '{field}' is not a number", line + 1)))?;
                c.push(v);
            }
        }
        Ok(Self { headers, columns })
    }

    pub fn read_path(path: &Path) -> Result<Self> {
        Self::read(BufReader::new(File::open(path)?))
    }
}

/// Shortest decimal that parses back to the same bits.
fn format_float(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-5..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

/// Any file the tool writes.
#[derive(Debug, Clone, PartialEq)]
pub enum Document {
    Solution(SolutionFile),
    Profile(ProfileFile),
    Table(Table),
}

/// Loads a document, choosing the format by content: JSON objects with a
/// `thetas` key are profile documents, other JSON objects are solution files,
/// anything else is read as CSV.
pub fn load_document(path: &Path) -> Result<Document> {
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    if text.trim_start().starts_with('{') {
        let value: serde_json::Value = serde_json::from_str(&text)?;
        if value.get("thetas").is_some() {
            let p: ProfileFile = serde_json::from_value(value)?;
            p.profile()?;
            return Ok(Document::Profile(p));
        }
        let s: SolutionFile = serde_json::from_value(value)?;
        s.validate()?;
        return Ok(Document::Solution(s));
    }
    Ok(Document::Table(Table::read(text.as_bytes())?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_solution() -> SolutionFile {
        let grid = vec![0.1, 0.2, 0.30000000000000004, 1.0 / 3.0];
        let mut fields = BTreeMap::new();
        fields.insert("f".to_string(), vec![1e-300, -2.5, std::f64::consts::PI, 6.02e23]);
        fields.insert("p".to_string(), vec![0.0, -0.0, 1.0 / 7.0, f64::MIN_POSITIVE]);
        SolutionFile {
            schema_version: SCHEMA_VERSION,
            kind: SolutionKind::Hamel,
            n: 2,
            params: [("k".to_string(), 3.0)].into_iter().collect(),
            grid,
            fields,
            residual_summary: BTreeMap::new(),
            provenance: Provenance::new(Some(7), "2026-01-01T00:00:00Z"),
        }
    }

    #[test]
    fn solution_round_trip_is_bit_exact() {
        let s = sample_solution();
        let text = to_json_string(&s).unwrap();
        let back: SolutionFile = serde_json::from_str(&text).unwrap();
        for (name, v) in &s.fields {
            let w = &back.fields[name];
            assert!(v.iter().zip(w).all(|(a, b)| a.to_bits() == b.to_bits()), "{name}");
        }
        assert!(s.grid.iter().zip(&back.grid).all(|(a, b)| a.to_bits() == b.to_bits()));
        assert_eq!(back, s);
    }

    #[test]
    fn schema_version_is_checked() {
        let mut s = sample_solution();
        s.schema_version = 99;
        assert!(matches!(s.validate(), Err(Error::Format(_))));
        let mut s = sample_solution();
        s.fields.remove("p");
        assert!(s.validate().is_err());
    }

    #[test]
    fn table_round_trip_is_bit_exact() {
        let mut t = Table::new(&["theta", "f"]);
        t.push(&[0.1, 1.0 / 3.0]);
        t.push(&[2.0f64.sqrt(), -1e-310]);
        let mut buf = Vec::new();
        t.write(&mut buf).unwrap();
        let back = Table::read(buf.as_slice()).unwrap();
        assert_eq!(back.headers, t.headers);
        for (a, b) in t.columns.iter().flatten().zip(back.columns.iter().flatten()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert!(Table::read("a,b\n1,x\n".as_bytes()).is_err());
    }

    #[test]
    fn profile_file_reloads() {
        let prof = SphereProfile::landau(1.0, 32).unwrap();
        let doc = ProfileFile::from_profile(&prof, Some(1.0), None);
        let text = to_json_string(&doc).unwrap();
        assert!(!text.contains("provenance"));
        let back: ProfileFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.profile().unwrap(), prof);
        assert_eq!(back.matched_kappa, Some(1.0));
    }
}
