//! Scale specifications, vector files and report files.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use sclab_core::scale::WeightKind;
use sclab_core::{GridLineScale, TruncatedScale, WeightSequence};

/// A weighted truncated scale: weight kind, ladder of truncations and the
/// number of modeled levels. Constant scales take their dimension from
/// `dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleSpec {
    pub kind: WeightKind,
    #[serde(default)]
    pub params: Vec<f64>,
    #[serde(default)]
    pub ladder: Vec<usize>,
    pub max_level: usize,
    #[serde(default)]
    pub dim: Option<usize>,
}

impl ScaleSpec {
    pub fn circle(ladder: Vec<usize>, max_level: usize) -> Self {
        Self {
            kind: WeightKind::SobolevCircle,
            params: Vec::new(),
            ladder,
            max_level,
            dim: None,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.kind == WeightKind::Constant {
            return match self.dim {
                Some(d) if d > 0 => Ok(()),
                _ => Err("constant scale needs a positive `dim`".into()),
            };
        }
        if self.ladder.is_empty() {
            return Err("ladder must not be empty".into());
        }
        if !self.ladder.windows(2).all(|w| w[0] < w[1]) {
            return Err(format!(
                "ladder {:?} is not strictly increasing",
                self.ladder
            ));
        }
        Ok(())
    }

    pub fn build(&self) -> Result<TruncatedScale> {
        self.validate().map_err(anyhow::Error::msg)?;
        if self.kind == WeightKind::Constant {
            return Ok(TruncatedScale::constant(
                self.dim.unwrap_or(0),
                self.max_level,
            ));
        }
        let weights = WeightSequence::new(self.kind, self.params.clone())?;
        Ok(TruncatedScale::new(
            weights,
            self.ladder.clone(),
            self.max_level,
        )?)
    }

    pub fn largest_truncation(&self) -> usize {
        self.ladder.last().copied().unwrap_or(0)
    }
}

/// Weighted grid on `[-L, L]` with `J` nodes and Hilbert weights `e^{δ_m|s|}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub half_width: f64,
    pub grid_size: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_grid_levels")]
    pub max_level: usize,
}

fn default_delta() -> f64 {
    0.5
}
fn default_grid_levels() -> usize {
    2
}

impl GridSpec {
    pub fn build(&self) -> Result<GridLineScale> {
        Ok(GridLineScale::hilbert(
            self.half_width,
            self.grid_size,
            self.delta,
            self.max_level,
        )?)
    }
}

/// A vector given inline or by a file path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VectorSource {
    Inline(Vec<f64>),
    File { path: PathBuf },
}

impl VectorSource {
    /// Relative paths are resolved against `base`.
    pub fn load(&self, base: &Path) -> Result<Vec<f64>> {
        match self {
            Self::Inline(v) => Ok(v.clone()),
            Self::File { path } => read_vector(&base.join(path)),
        }
    }
}

/// Reads a vector: `.json` files hold a JSON array, anything else the binary
/// layout of [`write_vector_binary`].
pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let bytes = fs::read(path).with_context(|| format!("cannot read vector {}", path.display()))?;
    if path.extension().is_some_and(|e| e == "json") {
        return serde_json::from_slice(&bytes)
            .with_context(|| format!("malformed vector {}", path.display()));
    }
    decode_binary(&bytes).with_context(|| format!("malformed vector {}", path.display()))
}

/// Little-endian `u64` length followed by that many `f64`.
pub fn encode_binary(v: &[f64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + 8 * v.len());
    out.extend_from_slice(&(v.len() as u64).to_le_bytes());
    for x in v {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

pub fn decode_binary(bytes: &[u8]) -> Result<Vec<f64>> {
    let Some((head, body)) = bytes.split_first_chunk::<8>() else {
        bail!("missing length prefix");
    };
    let n = u64::from_le_bytes(*head) as usize;
    if body.len() != n.saturating_mul(8) {
        bail!(
            "length prefix {n} does not match {} payload bytes",
            body.len()
        );
    }
    Ok(body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

pub fn write_vector_binary(path: &Path, v: &[f64]) -> Result<()> {
    write_atomic(path, &encode_binary(v))
}

pub fn write_vector_json(path: &Path, v: &[f64]) -> Result<()> {
    write_atomic(path, &serde_json::to_vec(v)?)
}

/// Writes through a temporary file in the same directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let name = path
        .file_name()
        .context("output path has no file name")?
        .to_string_lossy();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.with_context(|| format!("cannot write {}", path.display()))
}

/// Row-oriented CSV table.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))
    }

    /// Values of one column, for tests and summaries.
    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }
}

/// Shortest round-trip formatting; infinities as `inf`/`-inf`.
pub fn num(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:?}")
    }
}

/// Paths of the files written for one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputPaths {
    pub report: PathBuf,
    pub csv: PathBuf,
    pub meta: PathBuf,
}

impl OutputPaths {
    pub fn new(dir: &Path, stem: &str) -> Self {
        Self {
            report: dir.join(format!("{stem}.json")),
            csv: dir.join(format!("{stem}.csv")),
            meta: dir.join(format!("{stem}.meta.json")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_vectors_round_trip() {
        let v = vec![0.0, -1.5, f64::MIN_POSITIVE, 1e300];
        let bytes = encode_binary(&v);
        assert_eq!(bytes.len(), 8 + 32);
        assert_eq!(decode_binary(&bytes).unwrap(), v);
        assert!(decode_binary(&bytes[..bytes.len() - 1]).is_err());
        assert!(decode_binary(&[1, 2]).is_err());
    }

    #[test]
    fn vector_files_by_extension() {
        let dir = tempfile::tempdir().unwrap();
        let v = vec![1.0, 2.0, 3.5];
        write_vector_json(&dir.path().join("v.json"), &v).unwrap();
        write_vector_binary(&dir.path().join("v.bin"), &v).unwrap();
        assert_eq!(read_vector(&dir.path().join("v.json")).unwrap(), v);
        assert_eq!(read_vector(&dir.path().join("v.bin")).unwrap(), v);
        let src = VectorSource::File {
            path: "v.bin".into(),
        };
        assert_eq!(src.load(dir.path()).unwrap(), v);
    }

    #[test]
    fn atomic_write_leaves_no_temporaries() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub").join("r.json");
        write_atomic(&p, b"{}").unwrap();
        write_atomic(&p, b"[]").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"[]");
        let names: Vec<_> = fs::read_dir(p.parent().unwrap())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        assert_eq!(names.len(), 1);
    }

    #[test]
    fn ladders_must_increase() {
        assert!(ScaleSpec::circle(vec![64, 128], 3).build().is_ok());
        assert!(ScaleSpec::circle(vec![128, 64], 3).validate().is_err());
        assert!(ScaleSpec::circle(vec![], 3).validate().is_err());
        let c = ScaleSpec {
            kind: WeightKind::Constant,
            params: vec![],
            ladder: vec![],
            max_level: 2,
            dim: Some(3),
        };
        assert_eq!(c.build().unwrap().dim(0), 3);
    }

    #[test]
    fn csv_tables() {
        let mut t = Table::new(&["x", "index"]);
        t.push(vec![num(0.5), "1".into()]);
        t.push(vec![num(f64::INFINITY), "0".into()]);
        assert_eq!(
            String::from_utf8(t.to_csv().unwrap()).unwrap(),
            "x,index\n0.5,1\ninf,0\n"
        );
        assert_eq!(t.column("index").unwrap(), vec!["1", "0"]);
    }
}
