//! Atomic file output and the CSV layouts used for data sets and reports.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use anyhow::Context;
use cdinn::bench::{Dataset, Provenance};
use cdinn::nn::Matrix;

use crate::error::{CliError, CliResult};

/// Write `bytes` to `path` through a temporary file in the same directory
/// and a rename, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("temp file in {}", dir.display()))?;
    tmp.write_all(bytes).context("writing temp file")?;
    tmp.as_file().sync_all().context("syncing temp file")?;
    tmp.persist(path).map_err(|e| e.error).with_context(|| format!("renaming onto {}", path.display()))?;
    Ok(())
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).context("serializing JSON")?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{} is not valid: {e}", path.display())))
}

pub fn csv_bytes(header: &[String], rows: &[Vec<String>]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).context("writing CSV header")?;
    for r in rows {
        w.write_record(r).context("writing CSV row")?;
    }
    Ok(w.into_inner().context("flushing CSV")?)
}

pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> CliResult<()> {
    write_atomic(path, &csv_bytes(header, rows)?)
}

/// Pointwise data as `x0..x{d-1},y`; sequence data as one row per step,
/// `seq,step,u0..u{d-1},y`.
pub fn dataset_table(ds: &Dataset) -> (Vec<String>, Vec<Vec<String>>) {
    let d = ds.input_dim();
    let mut rows = Vec::new();
    match ds.seq_len {
        None => {
            let mut header: Vec<String> = (0..d).map(|j| format!("x{j}")).collect();
            header.push("y".into());
            for i in 0..ds.len() {
                let mut r: Vec<String> = ds.input(i).iter().map(|v| v.to_string()).collect();
                r.push(ds.target(i).to_string());
                rows.push(r);
            }
            (header, rows)
        }
        Some(_) => {
            let mut header = vec!["seq".to_string(), "step".to_string()];
            header.extend((0..d).map(|j| format!("u{j}")));
            header.push("y".into());
            for i in 0..ds.len() {
                for (t, (u, y)) in ds.sequence(i).iter().zip(ds.targets.row(i)).enumerate() {
                    let mut r = vec![i.to_string(), t.to_string()];
                    r.extend(u.iter().map(|v| v.to_string()));
                    r.push(y.to_string());
                    rows.push(r);
                }
            }
            (header, rows)
        }
    }
}

fn parse_cell(s: &str, line: usize, path: &Path) -> CliResult<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::usage(format!("{}:{line}: `{s}` is not a finite number", path.display())))
}

/// Read a data set written by [`dataset_table`] (or by hand in the same layout).
pub fn read_dataset(path: &Path) -> CliResult<Dataset> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header.len() < 2 || header.last().map(String::as_str) != Some("y") {
        return Err(CliError::usage(format!("{}: last column must be `y`", path.display())));
    }
    let sequence = header[0] == "seq";
    let mut cells: Vec<Vec<f64>> = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        if rec.len() != header.len() {
            return Err(CliError::usage(format!("{}:{}: expected {} fields", path.display(), k + 2, header.len())));
        }
        cells.push(rec.iter().map(|c| parse_cell(c, k + 2, path)).collect::<CliResult<_>>()?);
    }
    if cells.is_empty() {
        return Err(CliError::usage(format!("{}: no data rows", path.display())));
    }
    let provenance = Provenance {
        generator: "csv".into(),
        params: BTreeMap::from([("path".to_string(), path.display().to_string())]),
        seed: 0,
    };
    let width = header.len();
    if !sequence {
        let n = cells.len();
        let inputs: Vec<f64> = cells.iter().flat_map(|r| r[..width - 1].to_vec()).collect();
        let targets: Vec<f64> = cells.iter().map(|r| r[width - 1]).collect();
        return Ok(Dataset::new(
            Matrix::from_vec(n, width - 1, inputs)?,
            Matrix::from_vec(n, 1, targets)?,
            None,
            provenance,
        )?);
    }
    // group consecutive rows by sequence id; every sequence must have the same length
    let d = width - 3;
    let mut groups: Vec<Vec<&Vec<f64>>> = Vec::new();
    for r in &cells {
        match groups.last_mut() {
            Some(g) if g[0][0] == r[0] => g.push(r),
            _ => groups.push(vec![r]),
        }
    }
    let t = groups[0].len();
    if groups.iter().any(|g| g.len() != t) {
        return Err(CliError::usage(format!("{}: sequences have different lengths", path.display())));
    }
    let mut inputs = Vec::with_capacity(groups.len() * t * d);
    let mut targets = Vec::with_capacity(groups.len() * t);
    for g in &groups {
        for r in g {
            inputs.extend_from_slice(&r[2..2 + d]);
            targets.push(r[width - 1]);
        }
    }
    Ok(Dataset::new(
        Matrix::from_vec(groups.len(), t * d, inputs)?,
        Matrix::from_vec(groups.len(), t, targets)?,
        Some(t),
        provenance,
    )?)
}

/// Parse `g1 g2 ... gd <= h` rows; blank lines and `#` comments are skipped.
pub fn parse_constraints(text: &str, dim: usize) -> CliResult<Vec<(Vec<f64>, f64)>> {
    let mut rows = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |why: &str| CliError::usage(format!("constraints line {}: {why}", k + 1));
        let (lhs, rhs) = line.split_once("<=").ok_or_else(|| bad("expected `g1 ... gd <= h`"))?;
        let g: Vec<f64> = lhs
            .split_whitespace()
            .map(|s| s.parse::<f64>().map_err(|_| bad(&format!("`{s}` is not a number"))))
            .collect::<CliResult<_>>()?;
        if g.len() != dim {
            return Err(bad(&format!("{} coefficients for a {dim}-input model", g.len())));
        }
        let h = rhs.trim().parse::<f64>().map_err(|_| bad("right-hand side is not a number"))?;
        if !g.iter().chain([&h]).all(|v| v.is_finite()) {
            return Err(bad("coefficients must be finite"));
        }
        rows.push((g, h));
    }
    Ok(rows)
}

pub fn parse_list(s: &str, what: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| CliError::usage(format!("{what}: `{v}` is not a finite number")))
        })
        .collect()
}
