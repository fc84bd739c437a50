//! Emotion-profile recommendation of sightseeing spots.
//!
//! Spot catalog format, one spot per line, TAB separated:
//!
//! ```text
//! name  lat  lon  happy  angry  surprise  sad  disgust  fear  description
//! ```
//!
//! The six feelings are questionnaire grades on a 0-4 scale and are divided
//! by 4 on load. Blank lines and `#` comments are skipped.

use std::cmp::Ordering;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::elicitation::GroupVector;

pub const MAX_GRADE: f64 = 4.0;
pub const DEFAULT_ALPHA: f64 = 0.5;
const EARTH_RADIUS_KM: f64 = 6371.0088;

#[derive(Debug, Error)]
pub enum RecommendError {
    #[error("no spot passes the filter")]
    EmptyCatalog,
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("line {line}: {msg}")]
    Range { line: usize, msg: String },
    #[error("a search radius needs a current location")]
    MissingLocation,
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Six feelings, each in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FeelingVector6 {
    pub happy: f64,
    pub angry: f64,
    pub surprise: f64,
    pub sad: f64,
    pub disgust: f64,
    pub fear: f64,
}

impl FeelingVector6 {
    pub const NAMES: [&'static str; 6] = ["happy", "angry", "surprise", "sad", "disgust", "fear"];

    pub fn from_array(a: [f64; 6]) -> Self {
        Self { happy: a[0], angry: a[1], surprise: a[2], sad: a[3], disgust: a[4], fear: a[5] }
    }

    pub fn to_array(self) -> [f64; 6] {
        [self.happy, self.angry, self.surprise, self.sad, self.disgust, self.fear]
    }

    pub fn from_grades(grades: [f64; 6]) -> Self {
        Self::from_array(grades.map(|g| g / MAX_GRADE))
    }

    pub fn is_valid(&self) -> bool {
        self.to_array().iter().all(|v| (0.0..=1.0).contains(v))
    }

    pub fn euclidean(&self, other: &Self) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// 1 - cosine similarity. A zero vector is at distance 1 from anything
    /// but another zero vector.
    pub fn cosine_distance(&self, other: &Self) -> f64 {
        let (a, b) = (self.to_array(), other.to_array());
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        match (na == 0.0, nb == 0.0) {
            (true, true) => 0.0,
            (true, false) | (false, true) => 1.0,
            _ => 1.0 - dot / (na * nb),
        }
    }
}

/// Collapses the nine emotion groups onto the six feelings.
pub fn feeling_vector_from_groups(e: &GroupVector) -> FeelingVector6 {
    FeelingVector6 {
        happy: e.get(1).max(e.get(2)),
        sad: e.get(3).max(e.get(4)).max(e.get(5)),
        disgust: e.get(6),
        angry: e.get(7),
        fear: e.get(8),
        surprise: e.get(9),
    }
}

/// Turns a feeling report into a stimulus, putting each feeling on its most
/// direct group: happy on 2 (joy), sad on 4 (sadness), disgust 6, angry 7,
/// fear 8, surprise 9.
pub fn groups_from_feelings(f: &FeelingVector6) -> GroupVector {
    let mut g = GroupVector::zero();
    g.set(2, f.happy);
    g.set(4, f.sad);
    g.set(6, f.disgust);
    g.set(7, f.angry);
    g.set(8, f.fear);
    g.set(9, f.surprise);
    g
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<Self, RecommendError> {
        if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
            return Err(RecommendError::Invalid(format!("coordinates ({lat}, {lon}) out of range")));
        }
        Ok(Self { lat, lon })
    }

    /// Great-circle distance in kilometres.
    pub fn haversine_km(&self, other: &GeoPoint) -> f64 {
        let (p1, p2) = (self.lat.to_radians(), other.lat.to_radians());
        let dp = p2 - p1;
        let dl = (other.lon - self.lon).to_radians();
        let a = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
        2.0 * EARTH_RADIUS_KM * a.sqrt().min(1.0).asin()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpotProfile {
    pub name: String,
    pub location: GeoPoint,
    pub profile: FeelingVector6,
    pub description: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SpotCatalog {
    pub spots: Vec<SpotProfile>,
}

impl SpotCatalog {
    pub fn parse(text: &str) -> Result<Self, RecommendError> {
        let mut spots = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let l = raw.trim_end_matches('\r');
            if l.trim().is_empty() || l.trim_start().starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = l.split('\t').collect();
            if fields.len() != 10 {
                return Err(RecommendError::Format {
                    line,
                    msg: format!("expected 10 TAB-separated fields, found {}", fields.len()),
                });
            }
            let num = |i: usize| -> Result<f64, RecommendError> {
                fields[i].trim().parse::<f64>().map_err(|_| RecommendError::Format {
                    line,
                    msg: format!("invalid number `{}`", fields[i]),
                })
            };
            let name = fields[0].trim();
            if name.is_empty() {
                return Err(RecommendError::Format { line, msg: "empty spot name".into() });
            }
            if spots.iter().any(|s: &SpotProfile| s.name == name) {
                return Err(RecommendError::Format { line, msg: format!("duplicate spot `{name}`") });
            }
            let (lat, lon) = (num(1)?, num(2)?);
            let location = GeoPoint::new(lat, lon).map_err(|e| RecommendError::Range { line, msg: e.to_string() })?;
            let mut grades = [0.0; 6];
            for (k, g) in grades.iter_mut().enumerate() {
                *g = num(3 + k)?;
                if !(0.0..=MAX_GRADE).contains(g) {
                    return Err(RecommendError::Range {
                        line,
                        msg: format!("{} grade {} outside 0-4", FeelingVector6::NAMES[k], g),
                    });
                }
            }
            spots.push(SpotProfile {
                name: name.to_string(),
                location,
                profile: FeelingVector6::from_grades(grades),
                description: fields[9].trim().to_string(),
            });
        }
        Ok(Self { spots })
    }

    pub fn len(&self) -> usize {
        self.spots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spots.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&SpotProfile> {
        self.spots.iter().find(|s| s.name == name)
    }
}

pub fn load_spot_catalog(path: &Path) -> Result<SpotCatalog, RecommendError> {
    SpotCatalog::parse(&fs::read_to_string(path)?)
}

/// The user's running feeling estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserAffectProfile {
    pub current: FeelingVector6,
    pub alpha: f64,
}

impl Default for UserAffectProfile {
    fn default() -> Self {
        Self::new(DEFAULT_ALPHA)
    }
}

impl UserAffectProfile {
    pub fn new(alpha: f64) -> Self {
        assert!(alpha > 0.0 && alpha <= 1.0, "smoothing factor must lie in (0, 1]");
        Self { current: FeelingVector6::default(), alpha }
    }

    /// Exponential smoothing: current <- alpha * v + (1 - alpha) * current.
    pub fn update(&mut self, v: &FeelingVector6) {
        let a = self.alpha;
        let cur = self.current.to_array();
        let new = v.to_array();
        let mut out = [0.0; 6];
        for i in 0..6 {
            out[i] = (a * new[i] + (1.0 - a) * cur[i]).clamp(0.0, 1.0);
        }
        self.current = FeelingVector6::from_array(out);
    }
}

pub fn update_user_profile(p: &UserAffectProfile, v: &FeelingVector6) -> UserAffectProfile {
    let mut next = *p;
    next.update(v);
    next
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceMetric {
    #[default]
    Euclidean,
    Cosine,
}

impl DistanceMetric {
    pub fn distance(self, a: &FeelingVector6, b: &FeelingVector6) -> f64 {
        match self {
            DistanceMetric::Euclidean => a.euclidean(b),
            DistanceMetric::Cosine => a.cosine_distance(b),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedSpot {
    pub name: String,
    pub emotion_distance: f64,
    /// Kilometres from the query location, when one was given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance_km: Option<f64>,
    pub location: GeoPoint,
    pub profile: FeelingVector6,
    pub description: String,
}

/// Orders spots by feeling-profile distance, nearest first, keeping only
/// those within `radius_km` of `here` when a radius is given. Ties go to the
/// alphabetically first name.
pub fn rank_spots(
    p: &UserAffectProfile,
    catalog: &SpotCatalog,
    here: Option<GeoPoint>,
    radius_km: Option<f64>,
    metric: DistanceMetric,
) -> Result<Vec<RankedSpot>, RecommendError> {
    if radius_km.is_some() && here.is_none() {
        return Err(RecommendError::MissingLocation);
    }
    if let Some(r) = radius_km {
        if r.is_nan() || r < 0.0 {
            return Err(RecommendError::Invalid(format!("radius {r} must be non-negative")));
        }
    }
    let mut out: Vec<RankedSpot> = catalog
        .spots
        .iter()
        .filter_map(|s| {
            let km = here.map(|h| h.haversine_km(&s.location));
            if let (Some(km), Some(r)) = (km, radius_km) {
                if km > r {
                    return None;
                }
            }
            Some(RankedSpot {
                name: s.name.clone(),
                emotion_distance: metric.distance(&p.current, &s.profile),
                distance_km: km,
                location: s.location,
                profile: s.profile,
                description: s.description.clone(),
            })
        })
        .collect();
    if out.is_empty() {
        return Err(RecommendError::EmptyCatalog);
    }
    out.sort_by(|a, b| {
        a.emotion_distance
            .partial_cmp(&b.emotion_distance)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.name.cmp(&b.name))
    });
    Ok(out)
}
