//! Row files, coreset files and run manifests.
//!
//! Row files are either CSV (one row per line) or the binary `SCR1` layout:
//! the magic bytes, `u64` row and column counts, then row-major
//! little-endian `f64` values. The format is detected from the first bytes.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CoresetError, Result};
use crate::sampler::CoresetEntry;

pub const BINARY_MAGIC: &[u8; 4] = b"SCR1";

/// Identity of an input file: shape plus SHA-256 of its bytes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub rows: usize,
    pub cols: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowFormat {
    Csv,
    Binary,
}

struct HashingReader<R> {
    inner: R,
    hasher: Sha256,
    bytes: u64,
}

impl<R: Read> Read for HashingReader<R> {
    fn read(&mut self, buf: &mut [u8]) -> std::io::Result<usize> {
        let n = self.inner.read(buf)?;
        self.hasher.update(&buf[..n]);
        self.bytes += n as u64;
        Ok(n)
    }
}

/// Streaming reader over a row file. Each row is parsed once, in order; the
/// digest covers every byte of the input.
pub struct RowReader<R: Read> {
    src: BufReader<HashingReader<R>>,
    format: RowFormat,
    cols: Option<usize>,
    /// Rows announced by a binary header.
    declared_rows: Option<usize>,
    rows: usize,
    line: usize,
    buf: String,
    done: bool,
}

impl RowReader<File> {
    pub fn open(path: &Path, header: bool) -> Result<Self> {
        let f = File::open(path)
            .map_err(|e| CoresetError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
        RowReader::new(f, header)
    }
}

impl<R: Read> RowReader<R> {
    /// `header` skips the first line of CSV input; it is ignored for binary
    /// input.
    pub fn new(inner: R, header: bool) -> Result<Self> {
        let mut src = BufReader::new(HashingReader {
            inner,
            hasher: Sha256::new(),
            bytes: 0,
        });
        let binary = src.fill_buf()?.starts_with(BINARY_MAGIC);
        let mut reader = RowReader {
            src,
            format: if binary { RowFormat::Binary } else { RowFormat::Csv },
            cols: None,
            declared_rows: None,
            rows: 0,
            line: 0,
            buf: String::new(),
            done: false,
        };
        if binary {
            let mut head = [0u8; 20];
            reader
                .src
                .read_exact(&mut head)
                .map_err(|_| CoresetError::invalid("truncated SCR1 header"))?;
            let rows = u64::from_le_bytes(head[4..12].try_into().expect("8 bytes"));
            let cols = u64::from_le_bytes(head[12..20].try_into().expect("8 bytes"));
            let rows = usize::try_from(rows).map_err(|_| CoresetError::invalid("SCR1 row count too large"))?;
            let cols = usize::try_from(cols).map_err(|_| CoresetError::invalid("SCR1 column count too large"))?;
            if rows > 0 && cols == 0 {
                return Err(CoresetError::invalid("SCR1 file has rows but zero columns"));
            }
            if rows.checked_mul(cols).and_then(|v| v.checked_mul(8)).is_none() {
                return Err(CoresetError::invalid("SCR1 shape overflows"));
            }
            reader.cols = Some(cols);
            reader.declared_rows = Some(rows);
        } else if header {
            reader.next_line()?;
        }
        Ok(reader)
    }

    pub fn format(&self) -> RowFormat {
        self.format
    }

    /// Column count, known after the first row (or the binary header).
    pub fn cols(&self) -> Option<usize> {
        self.cols
    }

    /// Row count announced by a binary header.
    pub fn declared_rows(&self) -> Option<usize> {
        self.declared_rows
    }

    pub fn rows_read(&self) -> usize {
        self.rows
    }

    fn next_line(&mut self) -> Result<bool> {
        self.buf.clear();
        let n = self.src.read_line(&mut self.buf)?;
        self.line += 1;
        Ok(n > 0)
    }

    pub fn next_row(&mut self) -> Result<Option<Vec<f64>>> {
        if self.done {
            return Ok(None);
        }
        let row = match self.format {
            RowFormat::Binary => self.next_binary()?,
            RowFormat::Csv => self.next_csv()?,
        };
        match row {
            Some(r) => {
                self.rows += 1;
                Ok(Some(r))
            }
            None => {
                self.done = true;
                Ok(None)
            }
        }
    }

    fn next_binary(&mut self) -> Result<Option<Vec<f64>>> {
        let cols = self.cols.expect("binary header read");
        if self.rows == self.declared_rows.expect("binary header read") {
            let mut extra = [0u8; 1];
            if self.src.read(&mut extra)? != 0 {
                return Err(CoresetError::invalid("SCR1 file has trailing bytes"));
            }
            return Ok(None);
        }
        let mut bytes = vec![0u8; cols * 8];
        self.src
            .read_exact(&mut bytes)
            .map_err(|_| CoresetError::invalid(format!("SCR1 file truncated at row {}", self.rows)))?;
        let row: Vec<f64> = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        if row.iter().any(|v| !v.is_finite()) {
            return Err(CoresetError::invalid(format!("non-finite value in row {}", self.rows)));
        }
        Ok(Some(row))
    }

    fn next_csv(&mut self) -> Result<Option<Vec<f64>>> {
        loop {
            if !self.next_line()? {
                return Ok(None);
            }
            let text = self.buf.trim();
            if text.is_empty() {
                continue;
            }
            let row =
                parse_csv_reals(text).map_err(|msg| CoresetError::invalid(format!("line {}: {msg}", self.line)))?;
            match self.cols {
                None => self.cols = Some(row.len()),
                Some(c) if c != row.len() => {
                    return Err(CoresetError::DimensionMismatch {
                        expected: c,
                        got: row.len(),
                    }
                    .at_row(self.rows))
                }
                Some(_) => {}
            }
            return Ok(Some(row));
        }
    }

    /// Consume whatever is left and return the digest of the whole input.
    pub fn finish(mut self) -> Result<InputDigest> {
        while self.next_row()?.is_some() {}
        std::io::copy(&mut self.src, &mut std::io::sink())?;
        let h = self.src.get_ref().hasher.clone().finalize();
        Ok(InputDigest {
            rows: self.rows,
            cols: self.cols.unwrap_or(0),
            sha256: h.iter().map(|b| format!("{b:02x}")).collect(),
        })
    }
}

impl<R: Read> Iterator for RowReader<R> {
    type Item = Result<Vec<f64>>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_row().transpose()
    }
}

fn parse_csv_reals(text: &str) -> std::result::Result<Vec<f64>, String> {
    text.split(',')
        .map(|f| {
            let f = f.trim();
            match f.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(format!("not a finite real: {f:?}")),
            }
        })
        .collect()
}

/// Read a whole row file into memory.
pub fn read_rows(path: &Path, header: bool) -> Result<(Vec<Vec<f64>>, InputDigest)> {
    let mut reader = RowReader::open(path, header)?;
    let mut rows = Vec::new();
    while let Some(r) = reader.next_row()? {
        rows.push(r);
    }
    Ok((rows, reader.finish()?))
}

pub fn write_csv_rows<R: AsRef<[f64]>>(path: &Path, rows: &[R]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for r in rows {
        write_reals(&mut w, r.as_ref())?;
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_binary_rows<R: AsRef<[f64]>>(path: &Path, rows: &[R], cols: usize) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(BINARY_MAGIC)?;
    w.write_all(&(rows.len() as u64).to_le_bytes())?;
    w.write_all(&(cols as u64).to_le_bytes())?;
    for r in rows {
        let r = r.as_ref();
        if r.len() != cols {
            return Err(CoresetError::DimensionMismatch {
                expected: cols,
                got: r.len(),
            });
        }
        for v in r {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

// `{}` on f64 prints the shortest string that parses back to the same value.
fn write_reals<W: Write>(w: &mut W, values: &[f64]) -> std::io::Result<()> {
    for (j, v) in values.iter().enumerate() {
        if j > 0 {
            w.write_all(b",")?;
        }
        write!(w, "{v}")?;
    }
    Ok(())
}

/// Write `index,probability,weight,x0..x{d-1}` with a header line; rows are
/// unscaled.
pub fn write_coreset<W: Write>(out: W, entries: &[CoresetEntry], dim: usize) -> Result<()> {
    let mut w = BufWriter::new(out);
    write!(w, "index,probability,weight")?;
    for j in 0..dim {
        write!(w, ",x{j}")?;
    }
    writeln!(w)?;
    for e in entries {
        if e.row.len() != dim {
            return Err(CoresetError::DimensionMismatch {
                expected: dim,
                got: e.row.len(),
            });
        }
        write!(w, "{},{},{},", e.index, e.probability, e.weight)?;
        write_reals(&mut w, &e.row)?;
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_coreset_file(path: &Path, entries: &[CoresetEntry], dim: usize) -> Result<()> {
    write_coreset(File::create(path)?, entries, dim)
}

/// Parse a coreset file; `p` rebuilds the pre-scaled rows.
pub fn read_coreset(path: &Path, p: u32) -> Result<(Vec<CoresetEntry>, usize)> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let Some((_, head)) = lines.next() else {
        return Err(CoresetError::invalid(format!("{}: empty coreset file", path.display())));
    };
    let cols: Vec<&str> = head.split(',').map(str::trim).collect();
    if cols.len() < 3 || cols[..3] != ["index", "probability", "weight"] {
        return Err(CoresetError::invalid(format!(
            "{}: expected header index,probability,weight,...",
            path.display()
        )));
    }
    let dim = cols.len() - 3;
    let mut entries = Vec::new();
    for (ln, line) in lines {
        let bad = |msg: String| CoresetError::invalid(format!("{} line {}: {msg}", path.display(), ln + 1));
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != dim + 3 {
            return Err(bad(format!("expected {} fields, got {}", dim + 3, fields.len())));
        }
        let index: usize = fields[0]
            .parse()
            .map_err(|_| bad(format!("bad index {:?}", fields[0])))?;
        let nums = parse_csv_reals(&fields[1..].join(",")).map_err(bad)?;
        let (probability, weight) = (nums[0], nums[1]);
        if !(probability > 0.0 && probability <= 1.0) || weight <= 0.0 {
            return Err(bad(format!("probability {probability} / weight {weight} out of range")));
        }
        entries.push(CoresetEntry::from_record(
            index,
            nums[2..].to_vec(),
            probability,
            weight,
            p,
        ));
    }
    Ok((entries, dim))
}

/// Provenance record written next to every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Echo of the effective configuration.
    pub config: BTreeMap<String, serde_json::Value>,
    pub input: Option<InputDigest>,
    pub outputs: Vec<String>,
    /// Wall times in seconds; only recorded on request so that reports stay
    /// byte-identical between runs.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timings: Option<BTreeMap<String, f64>>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            config: BTreeMap::new(),
            input: None,
            outputs: Vec::new(),
            timings: None,
        }
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        let v = serde_json::to_value(value).expect("config values serialize");
        self.config.insert(key.to_string(), v);
        self
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| CoresetError::invalid(format!("{}: {e}", path.display())))
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CoresetError::invalid(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// `out.csv` → `out.csv.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// JSON companion of a CSV report: `report.csv` → `report.json`.
pub fn report_json_path(out: &Path) -> PathBuf {
    if out.extension().is_some_and(|e| e == "json") {
        let mut s = out.as_os_str().to_owned();
        s.push(".report.json");
        PathBuf::from(s)
    } else {
        out.with_extension("json")
    }
}
