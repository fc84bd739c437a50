//! Favorite Value lexicon with a default layer and per-persona layers.
//!
//! File format, one record per line, TAB separated:
//!
//! ```text
//! layer<TAB>term<TAB>value
//! ```
//!
//! `layer` is `default` or a persona id. Blank lines and lines starting with
//! `#` are ignored. A term may appear at most once per layer.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::RwLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_LAYER: &str = "default";

#[derive(Debug, Error)]
pub enum FvError {
    #[error("favorite value {0} outside [-1, 1]")]
    Range(f64),
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("invalid {what}: {value:?}")]
    InvalidName { what: &'static str, value: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Like/dislike degree of a term, always within [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct FavoriteValue(f64);

impl FavoriteValue {
    pub const NEUTRAL: FavoriteValue = FavoriteValue(0.0);

    pub fn new(value: f64) -> Result<Self, FvError> {
        if value.is_finite() && (-1.0..=1.0).contains(&value) {
            Ok(Self(value))
        } else {
            Err(FvError::Range(value))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for FavoriteValue {
    type Error = FvError;

    fn try_from(value: f64) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<FavoriteValue> for f64 {
    fn from(v: FavoriteValue) -> f64 {
        v.0
    }
}

impl fmt::Display for FavoriteValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Personal,
    Default,
    Unknown,
}

/// Where an upsert lands.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Layer {
    Default,
    Persona(String),
}

impl Layer {
    pub fn parse(s: &str) -> Result<Self, FvError> {
        if s == DEFAULT_LAYER {
            Ok(Layer::Default)
        } else {
            check_name("persona id", s)?;
            Ok(Layer::Persona(s.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        match self {
            Layer::Default => DEFAULT_LAYER,
            Layer::Persona(p) => p,
        }
    }
}

fn check_name(what: &'static str, s: &str) -> Result<(), FvError> {
    if s.is_empty() || s.trim() != s || s.chars().any(|c| c.is_control()) {
        return Err(FvError::InvalidName { what, value: s.to_string() });
    }
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FvDatabase {
    default: BTreeMap<String, FavoriteValue>,
    personal: BTreeMap<String, BTreeMap<String, FavoriteValue>>,
}

impl FvDatabase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.default.is_empty() && self.personal.values().all(BTreeMap::is_empty)
    }

    pub fn len(&self) -> usize {
        self.default.len() + self.personal.values().map(BTreeMap::len).sum::<usize>()
    }

    /// Personal layer first (when a persona is given), then default, then a
    /// neutral 0.0 marked unknown.
    pub fn lookup(&self, term: &str, persona: Option<&str>) -> (FavoriteValue, Provenance) {
        if let Some(v) = persona
            .and_then(|p| self.personal.get(p))
            .and_then(|layer| layer.get(term))
        {
            return (*v, Provenance::Personal);
        }
        match self.default.get(term) {
            Some(v) => (*v, Provenance::Default),
            None => (FavoriteValue::NEUTRAL, Provenance::Unknown),
        }
    }

    pub fn get(&self, layer: &Layer, term: &str) -> Option<FavoriteValue> {
        match layer {
            Layer::Default => self.default.get(term).copied(),
            Layer::Persona(p) => self.personal.get(p)?.get(term).copied(),
        }
    }

    pub fn upsert(&mut self, term: &str, value: f64, layer: &Layer) -> Result<(), FvError> {
        let value = FavoriteValue::new(value)?;
        check_name("term", term)?;
        let map = match layer {
            Layer::Default => &mut self.default,
            Layer::Persona(p) => {
                check_name("persona id", p)?;
                if p == DEFAULT_LAYER {
                    return Err(FvError::InvalidName { what: "persona id", value: p.clone() });
                }
                self.personal.entry(p.clone()).or_default()
            }
        };
        map.insert(term.to_string(), value);
        Ok(())
    }

    pub fn personas(&self) -> impl Iterator<Item = &str> {
        self.personal.keys().map(String::as_str)
    }

    /// All records as (layer, term, value), default layer first.
    pub fn records(&self) -> impl Iterator<Item = (&str, &str, FavoriteValue)> {
        let defaults = self.default.iter().map(|(t, v)| (DEFAULT_LAYER, t.as_str(), *v));
        let personal = self
            .personal
            .iter()
            .flat_map(|(p, m)| m.iter().map(move |(t, v)| (p.as_str(), t.as_str(), *v)));
        defaults.chain(personal)
    }

    pub fn parse(text: &str) -> Result<Self, FvError> {
        let mut db = FvDatabase::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim_end_matches('\r');
            if trimmed.trim().is_empty() || trimmed.trim_start().starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split('\t').collect();
            let [layer, term, value] = fields[..] else {
                return Err(FvError::Format {
                    line,
                    msg: format!("expected 3 TAB-separated fields, found {}", fields.len()),
                });
            };
            let fmt_err = |msg: String| FvError::Format { line, msg };
            let layer = Layer::parse(layer).map_err(|e| fmt_err(e.to_string()))?;
            check_name("term", term).map_err(|e| fmt_err(e.to_string()))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| fmt_err(format!("invalid number `{value}`")))?;
            if db.get(&layer, term).is_some() {
                return Err(fmt_err(format!("duplicate term `{term}` in layer `{}`", layer.as_str())));
            }
            db.upsert(term, value, &layer).map_err(|e| fmt_err(e.to_string()))?;
        }
        Ok(db)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (layer, term, value) in self.records() {
            out.push_str(layer);
            out.push('\t');
            out.push_str(term);
            out.push('\t');
            out.push_str(&value.get().to_string());
            out.push('\n');
        }
        out
    }
}

pub fn load_fv_file(path: &Path) -> Result<FvDatabase, FvError> {
    FvDatabase::parse(&fs::read_to_string(path)?)
}

/// Writes to a sibling temp file and renames it over `path`.
pub fn save_fv_file(db: &FvDatabase, path: &Path) -> Result<(), FvError> {
    atomic_write(path, db.render().as_bytes())?;
    Ok(())
}

pub(crate) fn atomic_write(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

/// A database shared between readers, optionally backed by a file. Writes
/// are serialized and persisted before `upsert` returns.
#[derive(Debug)]
pub struct FvStore {
    db: RwLock<FvDatabase>,
    path: Option<PathBuf>,
}

impl FvStore {
    pub fn in_memory(db: FvDatabase) -> Self {
        Self { db: RwLock::new(db), path: None }
    }

    /// Opens a file-backed store. A missing file starts empty.
    pub fn open(path: impl Into<PathBuf>) -> Result<Self, FvError> {
        let path = path.into();
        let db = match fs::read_to_string(&path) {
            Ok(text) => FvDatabase::parse(&text)?,
            Err(e) if e.kind() == io::ErrorKind::NotFound => FvDatabase::new(),
            Err(e) => return Err(e.into()),
        };
        Ok(Self { db: RwLock::new(db), path: Some(path) })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn lookup(&self, term: &str, persona: Option<&str>) -> (FavoriteValue, Provenance) {
        self.read().lookup(term, persona)
    }

    pub fn upsert(&self, term: &str, value: f64, layer: &Layer) -> Result<(), FvError> {
        let mut guard = self.db.write().unwrap_or_else(|e| e.into_inner());
        let mut next = guard.clone();
        next.upsert(term, value, layer)?;
        if let Some(path) = &self.path {
            save_fv_file(&next, path)?;
        }
        *guard = next;
        Ok(())
    }

    /// Replaces the whole database (import).
    pub fn replace(&self, db: FvDatabase) -> Result<(), FvError> {
        let mut guard = self.db.write().unwrap_or_else(|e| e.into_inner());
        if let Some(path) = &self.path {
            save_fv_file(&db, path)?;
        }
        *guard = db;
        Ok(())
    }

    pub fn snapshot(&self) -> FvDatabase {
        self.read().clone()
    }

    pub fn read(&self) -> std::sync::RwLockReadGuard<'_, FvDatabase> {
        self.db.read().unwrap_or_else(|e| e.into_inner())
    }
}
