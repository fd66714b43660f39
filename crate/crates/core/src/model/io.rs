//! Line-oriented text format for models.
//!
//! ```text
//! NNM 1 <mode> <D> <U> <I> <Z>
//! <U lines of D floats: user states>
//! <I lines: D floats (binary) or Z*D floats grouped by outcome (categorical)>
//! ```
//!
//! Floats are written in shortest round-trip decimal form (exponent notation
//! for very large or small magnitudes), so reading a written model
//! reproduces it bit for bit.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use super::{Items, LikeVector, Mode, NNModel, OutcomeSystem, StateVector};
use crate::error::{Error, Result};

const MAGIC: &str = "NNM";
const VERSION: u32 = 1;

fn push_row(out: &mut String, values: impl IntoIterator<Item = f64>) {
    let mut first = true;
    for v in values {
        if !first {
            out.push(' ');
        }
        first = false;
        write!(out, "{v:?}").unwrap();
    }
    out.push('\n');
}

pub fn serialize_model(model: &NNModel) -> Vec<u8> {
    let mut out = String::new();
    writeln!(
        out,
        "{MAGIC} {VERSION} {} {} {} {} {}",
        model.mode(),
        model.dim(),
        model.num_users(),
        model.num_items(),
        model.levels()
    )
    .unwrap();
    for p in model.users() {
        push_row(&mut out, p.as_slice().iter().copied());
    }
    match model.items() {
        Items::Binary(fs) => {
            for f in fs {
                push_row(&mut out, f.as_slice().iter().copied());
            }
        }
        Items::Categorical(es) => {
            for e in es {
                push_row(&mut out, e.vectors().iter().flatten().copied());
            }
        }
    }
    out.into_bytes()
}

pub fn write_model(model: &NNModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&serialize_model(model))
        .map_err(|e| Error::io(path, e))
}

pub fn read_model(path: impl AsRef<Path>) -> Result<NNModel> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    deserialize_model(&bytes)
}

fn eof() -> Error {
    Error::ModelFormat("unexpected end of model file".into())
}

struct Lines<'a> {
    text: &'a str,
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    /// Next line with its 1-based number and whether it is complete
    /// (newline-terminated).
    fn next_line(&mut self) -> Option<(usize, &'a str, bool)> {
        let (idx, line) = self.lines.next()?;
        let end = line.as_ptr() as usize - self.text.as_ptr() as usize + line.len();
        let complete = self.text[end..].starts_with('\n') || self.text[end..].starts_with("\r\n");
        Some((idx + 1, line, complete))
    }

    fn floats(&mut self, count: usize) -> Result<Vec<f64>> {
        let (lineno, line, complete) = self.next_line().ok_or_else(eof)?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != count {
            if !complete && tokens.len() < count {
                return Err(eof());
            }
            return Err(Error::ModelFormat(format!(
                "dimension mismatch on line {lineno}: expected {count} values, found {}",
                tokens.len()
            )));
        }
        let mut values = Vec::with_capacity(count);
        for t in tokens {
            let v: f64 = t.parse().map_err(|_| {
                if complete {
                    Error::ModelFormat(format!("invalid number {t:?} on line {lineno}"))
                } else {
                    eof()
                }
            })?;
            if !v.is_finite() {
                return Err(Error::ModelFormat(format!("non-finite value on line {lineno}")));
            }
            values.push(v);
        }
        Ok(values)
    }
}

fn parse_count(token: &str, name: &str) -> Result<usize> {
    token
        .parse()
        .map_err(|_| Error::ModelFormat(format!("malformed header: bad {name} {token:?}")))
}

pub fn deserialize_model(bytes: &[u8]) -> Result<NNModel> {
    let text = std::str::from_utf8(bytes)
        .map_err(|_| Error::ModelFormat("model file is not valid UTF-8".into()))?;
    let mut lines = Lines {
        text,
        lines: text.lines().enumerate(),
    };
    let (_, header, _) = lines.next_line().ok_or_else(eof)?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.first() != Some(&MAGIC) {
        return Err(Error::ModelFormat("malformed header: missing NNM tag".into()));
    }
    if fields.len() >= 2 && fields[1] != "1" {
        return Err(Error::ModelFormat(format!("unsupported version {}", fields[1])));
    }
    if fields.len() != 7 {
        return Err(Error::ModelFormat(format!(
            "malformed header: expected 7 fields, found {}",
            fields.len()
        )));
    }
    let mode: Mode = fields[2]
        .parse()
        .map_err(|_| Error::ModelFormat(format!("malformed header: bad mode {:?}", fields[2])))?;
    let dim = parse_count(fields[3], "dimension")?;
    let num_users = parse_count(fields[4], "user count")?;
    let num_items = parse_count(fields[5], "item count")?;
    let levels = parse_count(fields[6], "rating levels")?;
    if dim == 0 || levels == 0 {
        return Err(Error::ModelFormat(
            "malformed header: dimension and levels must be positive".into(),
        ));
    }

    let mut users = Vec::with_capacity(num_users);
    for _ in 0..num_users {
        users.push(StateVector::new_unchecked(lines.floats(dim)?));
    }
    let items = match mode {
        Mode::Binary => {
            let mut fs = Vec::with_capacity(num_items);
            for _ in 0..num_items {
                fs.push(LikeVector::new_unchecked(lines.floats(dim)?));
            }
            Items::Binary(fs)
        }
        Mode::Categorical => {
            let mut es = Vec::with_capacity(num_items);
            for _ in 0..num_items {
                let flat = lines.floats(levels * dim)?;
                let vectors = flat.chunks(dim).map(<[f64]>::to_vec).collect();
                es.push(OutcomeSystem::new_unchecked(vectors)?);
            }
            Items::Categorical(es)
        }
    };
    if let Some((lineno, line, _)) = lines.next_line() {
        if !line.trim().is_empty() {
            return Err(Error::ModelFormat(format!("trailing data on line {lineno}")));
        }
    }
    NNModel::new(dim, levels, users, items)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_binary() -> NNModel {
        NNModel::new(
            2,
            5,
            vec![
                StateVector::new_unchecked(vec![0.1, 0.9]),
                StateVector::new_unchecked(vec![1.0 / 3.0, 2.0 / 3.0]),
            ],
            Items::Binary(vec![LikeVector::new_unchecked(vec![0.7, 1e-300])]),
        )
        .unwrap()
    }

    #[test]
    fn header_and_layout() {
        let text = String::from_utf8(serialize_model(&sample_binary())).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "NNM 1 binary 2 2 1 5");
        assert_eq!(lines[1], "0.1 0.9");
        assert_eq!(lines.len(), 4);
    }

    #[test]
    fn categorical_grouped_by_outcome() {
        let e = OutcomeSystem::new(vec![vec![0.25, 1.0], vec![0.75, 0.0]]).unwrap();
        let m = NNModel::new(
            2,
            2,
            vec![StateVector::uniform(2)],
            Items::Categorical(vec![e]),
        )
        .unwrap();
        let text = String::from_utf8(serialize_model(&m)).unwrap();
        assert_eq!(text.lines().nth(2).unwrap(), "0.25 1.0 0.75 0.0");
        assert_eq!(deserialize_model(text.as_bytes()).unwrap(), m);
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let m = sample_binary();
        let back = deserialize_model(&serialize_model(&m)).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn truncated_stream() {
        let bytes = serialize_model(&sample_binary());
        let cut = &bytes[..bytes.len() - 4];
        let err = deserialize_model(cut).unwrap_err();
        assert_eq!(err.to_string(), "unexpected end of model file");
        let err = deserialize_model(b"NNM 1 binary 2 2 1 5\n0.1 0.9\n").unwrap_err();
        assert_eq!(err.to_string(), "unexpected end of model file");
        assert_eq!(
            deserialize_model(b"").unwrap_err().to_string(),
            "unexpected end of model file"
        );
    }

    #[test]
    fn version_and_header_errors() {
        let err = deserialize_model(b"NNM 2 binary 1 0 0 5\n").unwrap_err();
        assert!(err.to_string().starts_with("unsupported version"));
        assert!(deserialize_model(b"XYZ 1 binary 1 0 0 5\n")
            .unwrap_err()
            .to_string()
            .starts_with("malformed header"));
        assert!(deserialize_model(b"NNM 1 ternary 1 0 0 5\n").is_err());
        assert!(deserialize_model(b"NNM 1 binary 1 0 0\n").is_err());
    }

    #[test]
    fn value_errors() {
        let err = deserialize_model(b"NNM 1 binary 2 1 0 5\n0.5 0.5 0.1\n").unwrap_err();
        assert!(err.to_string().starts_with("dimension mismatch on line 2"));
        let err = deserialize_model(b"NNM 1 binary 2 1 0 5\n0.5 inf\n").unwrap_err();
        assert!(err.to_string().starts_with("non-finite value on line 2"));
        let err = deserialize_model(b"NNM 1 binary 1 1 0 5\n1\n7\n").unwrap_err();
        assert!(err.to_string().starts_with("trailing data"));
    }
}
