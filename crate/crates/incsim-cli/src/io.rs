//! Series file formats: a small headered CSV for interchange and a binary
//! layout for long paths. Readers sniff the format from the leading bytes.

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use incsim::TimeSeries;

use crate::CliError;

/// Leading bytes of the binary layout: magic plus format version.
pub const MAGIC: [u8; 16] = *b"INCSIMTS\0v1\0\0\0\0\0";

pub fn write_csv(path: &Path, ts: &TimeSeries) -> Result<(), CliError> {
    let file = fs::File::create(path)
        .map_err(|e| CliError::Runtime(format!("create {}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    let io_err = |e: std::io::Error| CliError::Runtime(format!("write {}: {e}", path.display()));
    writeln!(w, "# dt={}", ts.dt()).map_err(io_err)?;
    writeln!(w, "# n={}", ts.len()).map_err(io_err)?;
    for v in ts.values() {
        writeln!(w, "{v}").map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn write_binary(path: &Path, ts: &TimeSeries) -> Result<(), CliError> {
    let file = fs::File::create(path)
        .map_err(|e| CliError::Runtime(format!("create {}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    let io_err = |e: std::io::Error| CliError::Runtime(format!("write {}: {e}", path.display()));
    w.write_all(&MAGIC).map_err(io_err)?;
    w.write_all(&ts.dt().to_le_bytes()).map_err(io_err)?;
    w.write_all(&(ts.len() as u64).to_le_bytes()).map_err(io_err)?;
    for v in ts.values() {
        w.write_all(&v.to_le_bytes()).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Reads a series file, inspecting the magic to pick the decoder.
pub fn read_series(path: &Path) -> Result<TimeSeries, CliError> {
    let bytes = fs::read(path)
        .map_err(|e| CliError::Runtime(format!("read {}: {e}", path.display())))?;
    if bytes.len() >= MAGIC.len() && bytes[..MAGIC.len()] == MAGIC {
        read_binary_bytes(&bytes, path)
    } else {
        read_csv_bytes(&bytes, path)
    }
}

fn read_binary_bytes(bytes: &[u8], path: &Path) -> Result<TimeSeries, CliError> {
    let bad = |what: &str| CliError::Runtime(format!("{}: {what}", path.display()));
    let mut rest = &bytes[MAGIC.len()..];
    let mut take = |len: usize| -> Result<&[u8], CliError> {
        if rest.len() < len {
            return Err(bad("truncated binary series"));
        }
        let (head, tail) = rest.split_at(len);
        rest = tail;
        Ok(head)
    };
    let dt = f64::from_le_bytes(take(8)?.try_into().unwrap());
    let n = u64::from_le_bytes(take(8)?.try_into().unwrap()) as usize;
    let data = take(n * 8)?;
    if !rest.is_empty() {
        return Err(bad("trailing bytes after the declared sample count"));
    }
    let values: Vec<f64> = data
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    TimeSeries::new(values, dt).map_err(|e| bad(&e.to_string()))
}

fn read_csv_bytes(bytes: &[u8], path: &Path) -> Result<TimeSeries, CliError> {
    let bad = |what: String| CliError::Runtime(format!("{}: {what}", path.display()));
    let text = std::str::from_utf8(bytes).map_err(|_| bad("not valid UTF-8".into()))?;
    let mut lines = text.lines();
    let dt_line = lines.next().ok_or_else(|| bad("empty file".into()))?;
    let dt: f64 = dt_line
        .strip_prefix("# dt=")
        .ok_or_else(|| bad(format!("expected '# dt=<value>' header, got '{dt_line}'")))?
        .parse()
        .map_err(|e| bad(format!("bad dt header: {e}")))?;
    let n_line = lines.next().ok_or_else(|| bad("missing n header".into()))?;
    let n: usize = n_line
        .strip_prefix("# n=")
        .ok_or_else(|| bad(format!("expected '# n=<value>' header, got '{n_line}'")))?
        .parse()
        .map_err(|e| bad(format!("bad n header: {e}")))?;
    let mut values = Vec::with_capacity(n);
    for (k, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|e| bad(format!("value line {}: {e}", k + 3)))?;
        values.push(v);
    }
    if values.len() != n {
        return Err(bad(format!(
            "header declares n={n} but the file holds {} values",
            values.len()
        )));
    }
    TimeSeries::new(values, dt).map_err(|e| bad(e.to_string()))
}

/// Writes text atomically enough for this tool: straight to the final path.
pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text)
        .map_err(|e| CliError::Runtime(format!("write {}: {e}", path.display())))
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    let mut s = String::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_string(&mut s))
        .map_err(|e| CliError::Runtime(format!("read {}: {e}", path.display())))?;
    Ok(s)
}
