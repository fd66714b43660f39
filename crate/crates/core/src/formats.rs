//! Text formats for dense matrices and probability-table instances.
//!
//! Matrices are CSV with a `# rows cols` header:
//!
//! ```text
//! # 2 3
//! 1,0,0.5
//! 0,2,0.25
//! ```
//!
//! Instances start with `NNMTABLE 1 <U> <I> <Z> <D>` followed by one line of
//! `Z` probabilities per `(user, item)` pair in user-major order; `-` marks an
//! unknown entry.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use crate::bridge::NNMInstance;
use crate::dataset::ProbabilityTable;
use crate::error::{Error, Result};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

pub fn parse_matrix_csv(text: &str) -> Result<DMatrix<f64>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "missing `# rows cols` header"))?;
    let dims: Vec<&str> = header
        .trim()
        .strip_prefix('#')
        .ok_or_else(|| parse_err(1, "missing `# rows cols` header"))?
        .split_whitespace()
        .collect();
    let parse_dim = |s: &str| s.parse::<usize>().map_err(|_| parse_err(1, format!("bad dimension {s:?}")));
    if dims.len() != 2 {
        return Err(parse_err(1, "header must be `# rows cols`"));
    }
    let (rows, cols) = (parse_dim(dims[0])?, parse_dim(dims[1])?);
    let mut data = Vec::with_capacity(rows * cols);
    let mut seen = 0;
    for (idx, line) in lines {
        let lineno = idx + 1;
        if seen == rows {
            return Err(parse_err(lineno, format!("more than {rows} rows")));
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != cols {
            return Err(parse_err(lineno, format!("expected {cols} values, found {}", fields.len())));
        }
        for f in fields {
            let v: f64 = f.parse().map_err(|_| parse_err(lineno, format!("invalid number {f:?}")))?;
            if !v.is_finite() {
                return Err(parse_err(lineno, "non-finite value"));
            }
            data.push(v);
        }
        seen += 1;
    }
    if seen != rows {
        return Err(Error::invalid(format!("matrix has {seen} rows, header says {rows}")));
    }
    Ok(DMatrix::from_row_slice(rows, cols, &data))
}

pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix_csv(&text)
}

pub fn format_matrix_csv(m: &DMatrix<f64>) -> String {
    let mut out = format!("# {} {}\n", m.nrows(), m.ncols());
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn format_instance(instance: &NNMInstance) -> String {
    let t = &instance.table;
    let mut out = format!(
        "NNMTABLE 1 {} {} {} {}\n",
        t.num_users(),
        t.num_items(),
        t.levels(),
        instance.target_dimension
    );
    for u in 0..t.num_users() {
        for i in 0..t.num_items() {
            let cells: Vec<String> = t
                .row(u, i)
                .iter()
                .map(|v| v.map_or_else(|| "-".to_string(), |x| format!("{x:?}")))
                .collect();
            writeln!(out, "{}", cells.join(" ")).unwrap();
        }
    }
    out
}

pub fn parse_instance(text: &str) -> Result<NNMInstance> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty instance file"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 6 || fields[0] != "NNMTABLE" {
        return Err(parse_err(1, "header must be `NNMTABLE 1 U I Z D`"));
    }
    if fields[1] != "1" {
        return Err(parse_err(1, format!("unsupported version {}", fields[1])));
    }
    let nums = fields[2..]
        .iter()
        .map(|s| s.parse::<usize>().map_err(|_| parse_err(1, format!("bad count {s:?}"))))
        .collect::<Result<Vec<_>>>()?;
    let (users, items, levels, dim) = (nums[0], nums[1], nums[2], nums[3]);
    let mut entries = Vec::with_capacity(users * items * levels);
    let mut known = Vec::with_capacity(entries.capacity());
    for _ in 0..users * items {
        let (idx, line) = lines.next().ok_or_else(|| Error::invalid("instance file ends early"))?;
        let cells: Vec<&str> = line.split_whitespace().collect();
        if cells.len() != levels {
            return Err(parse_err(idx + 1, format!("expected {levels} values, found {}", cells.len())));
        }
        for c in cells {
            if c == "-" {
                entries.push(0.0);
                known.push(false);
            } else {
                let v: f64 = c.parse().map_err(|_| parse_err(idx + 1, format!("invalid number {c:?}")))?;
                entries.push(v);
                known.push(true);
            }
        }
    }
    if let Some((idx, line)) = lines.next() {
        if !line.trim().is_empty() {
            return Err(parse_err(idx + 1, "trailing data"));
        }
    }
    Ok(NNMInstance {
        table: ProbabilityTable::with_mask(users, items, levels, entries, known)?,
        target_dimension: dim,
    })
}
