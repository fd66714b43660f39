//! Reading rating triples from MovieLens dumps and plain CSV.
//!
//! Raw user and item IDs are mapped to dense indices in order of first
//! appearance. Timestamps are ignored. A repeated `(user, item)` pair keeps
//! its last rating.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::{Rating, RatingDataset};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceFormat {
    /// `user::item::rating::timestamp`
    Movielens1m,
    /// `user<TAB>item<TAB>rating<TAB>timestamp`
    Movielens100k,
    /// `user,item,rating[,...]`, optional header line
    CsvTriples,
}

impl SourceFormat {
    fn separator(self) -> &'static str {
        match self {
            SourceFormat::Movielens1m => "::",
            SourceFormat::Movielens100k => "\t",
            SourceFormat::CsvTriples => ",",
        }
    }

    /// Guesses the format from a file name.
    pub fn detect(path: &Path) -> Option<Self> {
        let name = path.file_name()?.to_str()?;
        if name == "u.data" {
            Some(SourceFormat::Movielens100k)
        } else if name.ends_with(".dat") {
            Some(SourceFormat::Movielens1m)
        } else if name.ends_with(".csv") {
            Some(SourceFormat::CsvTriples)
        } else {
            None
        }
    }
}

impl fmt::Display for SourceFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SourceFormat::Movielens1m => "movielens-1m",
            SourceFormat::Movielens100k => "movielens-100k",
            SourceFormat::CsvTriples => "csv-triples",
        })
    }
}

impl std::str::FromStr for SourceFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "movielens-1m" | "ml-1m" => Ok(SourceFormat::Movielens1m),
            "movielens-100k" | "ml-100k" => Ok(SourceFormat::Movielens100k),
            "csv-triples" | "csv" => Ok(SourceFormat::CsvTriples),
            other => Err(Error::invalid(format!("unknown format {other:?}"))),
        }
    }
}

/// Where ratings came from and how raw IDs map to dense indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IngestManifest {
    pub source: PathBuf,
    pub format: SourceFormat,
    pub rating_levels: usize,
    /// Raw ID of each dense user index.
    pub user_ids: Vec<String>,
    pub item_ids: Vec<String>,
    pub num_ratings: usize,
    /// Lines that repeated an earlier `(user, item)` pair.
    pub duplicates: usize,
}

impl IngestManifest {
    pub fn num_users(&self) -> usize {
        self.user_ids.len()
    }

    pub fn num_items(&self) -> usize {
        self.item_ids.len()
    }

    pub fn user_index(&self, raw: &str) -> Option<usize> {
        self.user_ids.iter().position(|id| id == raw)
    }

    pub fn item_index(&self, raw: &str) -> Option<usize> {
        self.item_ids.iter().position(|id| id == raw)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("bad manifest: {e}")))
    }
}

/// Resolves a dataset directory to its ratings file.
pub fn resolve_source(path: &Path) -> Result<(PathBuf, SourceFormat)> {
    if path.is_dir() {
        for name in ["ratings.dat", "u.data", "ratings.csv"] {
            let candidate = path.join(name);
            if candidate.is_file() {
                let format = SourceFormat::detect(&candidate).expect("known name");
                return Ok((candidate, format));
            }
        }
        return Err(Error::invalid(format!(
            "{}: no ratings.dat, u.data or ratings.csv found",
            path.display()
        )));
    }
    match SourceFormat::detect(path) {
        Some(f) => Ok((path.to_path_buf(), f)),
        None => Err(Error::invalid(format!(
            "{}: cannot tell the format from the file name; pass it explicitly",
            path.display()
        ))),
    }
}

#[derive(Default)]
struct IdMap {
    ids: Vec<String>,
    index: HashMap<String, usize>,
}

impl IdMap {
    fn get_or_insert(&mut self, raw: &str) -> usize {
        if let Some(&k) = self.index.get(raw) {
            return k;
        }
        let k = self.ids.len();
        self.ids.push(raw.to_string());
        self.index.insert(raw.to_string(), k);
        k
    }
}

/// Parses ratings from any buffered reader.
pub fn parse_ratings<R: BufRead>(reader: R, format: SourceFormat, levels: usize) -> Result<(RatingDataset, Vec<String>, Vec<String>, usize)> {
    if levels == 0 || levels > u8::MAX as usize {
        return Err(Error::invalid(format!("rating levels must be in 1..=255, got {levels}")));
    }
    let sep = format.separator();
    let mut users = IdMap::default();
    let mut items = IdMap::default();
    let mut slot: HashMap<(usize, usize), usize> = HashMap::new();
    let mut ratings: Vec<Rating> = Vec::new();
    let mut duplicates = 0;

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(sep).map(str::trim).collect();
        if fields.len() < 3 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected at least 3 fields separated by {sep:?}, found {}", fields.len()),
            });
        }
        let value = match fields[2].parse::<i64>() {
            Ok(v) => v,
            Err(_) if format == SourceFormat::CsvTriples && lineno == 1 && fields[2].parse::<f64>().is_err() => {
                // header line
                continue;
            }
            Err(_) => {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("rating {:?} is not an integer", fields[2]),
                })
            }
        };
        if value < 1 || value > levels as i64 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("rating {value} outside [1,{levels}]"),
            });
        }
        if fields[0].is_empty() || fields[1].is_empty() {
            return Err(Error::Parse {
                line: lineno,
                message: "empty user or item ID".into(),
            });
        }
        let u = users.get_or_insert(fields[0]);
        let i = items.get_or_insert(fields[1]);
        let rating = Rating {
            user: u,
            item: i,
            value: value as u8,
        };
        match slot.get(&(u, i)) {
            Some(&k) => {
                ratings[k] = rating;
                duplicates += 1;
            }
            None => {
                slot.insert((u, i), ratings.len());
                ratings.push(rating);
            }
        }
    }
    if ratings.is_empty() {
        return Err(Error::NoRatings);
    }
    if duplicates > 0 {
        log::warn!("{duplicates} duplicate (user, item) pairs; kept the last rating of each");
    }
    let dataset = RatingDataset::new(users.ids.len(), items.ids.len(), levels, ratings)?;
    Ok((dataset, users.ids, items.ids, duplicates))
}

/// Reads a ratings file or dataset directory. `format` overrides detection.
pub fn ingest(path: impl AsRef<Path>, format: Option<SourceFormat>, levels: usize) -> Result<(RatingDataset, IngestManifest)> {
    let path = path.as_ref();
    let (file, format) = match format {
        Some(f) if path.is_file() => (path.to_path_buf(), f),
        Some(f) => {
            let (file, _) = resolve_source(path)?;
            (file, f)
        }
        None => resolve_source(path)?,
    };
    let handle = std::fs::File::open(&file).map_err(|e| Error::io(&file, e))?;
    let (dataset, user_ids, item_ids, duplicates) = parse_ratings(BufReader::new(handle), format, levels)?;
    let manifest = IngestManifest {
        source: file,
        format,
        rating_levels: levels,
        user_ids,
        item_ids,
        num_ratings: dataset.ratings().len(),
        duplicates,
    };
    Ok((dataset, manifest))
}
