//! Per-character advance widths for the bundled fonts, in em units.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const HELVETICA: &str = include_str!("../../data/fonts/helvetica.json");
const COURIER: &str = include_str!("../../data/fonts/courier.json");

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("unknown font {0:?} (bundled: helvetica, courier)")]
    UnknownFont(String),
    #[error("cannot read font metrics {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid font metrics: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid font metrics: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FontMetricsTable {
    pub name: String,
    /// CSS font-family used when rendering.
    pub family: String,
    pub units_per_em: f64,
    pub ascent: f64,
    /// Negative: distance below the baseline.
    pub descent: f64,
    pub line_gap: f64,
    pub advances: BTreeMap<char, f64>,
}

impl FontMetricsTable {
    pub fn bundled(name: &str) -> Result<Self, MetricsError> {
        let src = match name {
            "helvetica" | "sans" => HELVETICA,
            "courier" | "mono" => COURIER,
            other => return Err(MetricsError::UnknownFont(other.to_string())),
        };
        Self::from_json(src)
    }

    pub fn helvetica() -> Self {
        Self::bundled("helvetica").expect("bundled metrics are valid")
    }

    /// A bundled font name, or a path to a metrics JSON file.
    pub fn resolve(name_or_path: &str) -> Result<Self, MetricsError> {
        match Self::bundled(name_or_path) {
            Err(MetricsError::UnknownFont(_)) if Path::new(name_or_path).is_file() => {
                let text = std::fs::read_to_string(name_or_path).map_err(|source| MetricsError::Io {
                    path: name_or_path.to_string(),
                    source,
                })?;
                Self::from_json(&text)
            }
            other => other,
        }
    }

    /// Parses a table whose numbers are in font units and normalizes to em.
    pub fn from_json(text: &str) -> Result<Self, MetricsError> {
        let raw: FontMetricsTable = serde_json::from_str(text)?;
        raw.normalized()
    }

    fn normalized(self) -> Result<Self, MetricsError> {
        let upm = self.units_per_em;
        if !(upm > 0.0) {
            return Err(MetricsError::Invalid("units_per_em must be positive".into()));
        }
        if !(self.ascent > 0.0) || self.descent > 0.0 || self.line_gap < 0.0 {
            return Err(MetricsError::Invalid(
                "need ascent > 0 >= descent and line_gap >= 0".into(),
            ));
        }
        if self.advances.is_empty() || self.advances.values().any(|a| !(*a > 0.0)) {
            return Err(MetricsError::Invalid("advances must be positive".into()));
        }
        Ok(FontMetricsTable {
            units_per_em: 1.0,
            ascent: self.ascent / upm,
            descent: self.descent / upm,
            line_gap: self.line_gap / upm,
            advances: self.advances.into_iter().map(|(c, a)| (c, a / upm)).collect(),
            ..self
        })
    }

    pub fn average_advance(&self) -> f64 {
        self.advances.values().sum::<f64>() / self.advances.len() as f64
    }

    /// Advance of `c`, or `None` when the font lacks it.
    pub fn advance(&self, c: char) -> Option<f64> {
        self.advances.get(&c).copied()
    }

    pub fn line_height(&self) -> f64 {
        self.ascent - self.descent
    }

    /// Baseline-to-baseline distance.
    pub fn line_pitch(&self) -> f64 {
        self.line_height() + self.line_gap
    }
}

/// What a renderer needs to reproduce the line layout, in em units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FontInfo {
    pub name: String,
    pub family: String,
    pub ascent: f64,
    pub descent: f64,
    pub line_gap: f64,
}

impl FontInfo {
    pub fn line_pitch(&self) -> f64 {
        self.ascent - self.descent + self.line_gap
    }
}

impl From<&FontMetricsTable> for FontInfo {
    fn from(m: &FontMetricsTable) -> Self {
        FontInfo {
            name: m.name.clone(),
            family: m.family.clone(),
            ascent: m.ascent,
            descent: m.descent,
            line_gap: m.line_gap,
        }
    }
}
