//! Morphological complexity from WALS morphology chapters.
//!
//! Each chapter value is mapped onto a declared final range in which larger
//! numbers mean more morphology, normalized to `[0, 1]` over that declared
//! range, and averaged over all chapters of the set.

use std::collections::{BTreeMap, HashSet};
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Failures, Result};
use crate::model::{Iso, MorphFeatureSpec, Transformation};

/// Number of chapters in the complexity feature set.
pub const CHAPTER_COUNT: usize = 26;

static BUNDLED_SPECS: &str = include_str!("../data/morph_specs.csv");

/// The complete chapter set used for complexity scoring.
#[derive(Debug, Clone, PartialEq)]
pub struct MorphSpecSet {
    specs: Vec<MorphFeatureSpec>,
}

impl MorphSpecSet {
    pub fn new(specs: Vec<MorphFeatureSpec>) -> Result<Self> {
        if specs.len() != CHAPTER_COUNT {
            return Err(Error::Invariant(format!(
                "expected {CHAPTER_COUNT} chapter specs, got {}",
                specs.len()
            )));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = specs.iter().find(|s| !seen.insert(s.chapter.as_str())) {
            return Err(Error::Invariant(format!(
                "duplicate chapter {}",
                dup.chapter
            )));
        }
        Ok(MorphSpecSet { specs })
    }

    pub fn bundled() -> Self {
        Self::parse(BUNDLED_SPECS.as_bytes(), "bundled specs").expect("bundled specs are valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::parse(file, &path.display().to_string())
    }

    /// Reads `chapter,name,transformation,final_min,final_max,value_map`
    /// records; `value_map` is empty or `raw=final` pairs joined by `;`.
    pub fn parse<R: Read>(reader: R, source_name: &str) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut specs = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let row = record.position().map_or(0, |p| p.line() as usize);
            let field = |i: usize| record.get(i).map(str::trim).unwrap_or("");
            let int = |i: usize, what: &str| {
                field(i).parse::<i64>().map_err(|_| {
                    Error::parse(source_name, format!("row {row}: bad {what} {:?}", field(i)))
                })
            };
            let value_map = match field(5) {
                "" => None,
                text => Some(
                    parse_value_map(text)
                        .map_err(|m| Error::parse(source_name, format!("row {row}: {m}")))?,
                ),
            };
            specs.push(MorphFeatureSpec::new(
                field(0),
                field(1),
                field(2).parse::<Transformation>()?,
                int(3, "final_min")?,
                int(4, "final_max")?,
                value_map,
            )?);
        }
        Self::new(specs)
    }

    pub fn get(&self, chapter: &str) -> Option<&MorphFeatureSpec> {
        self.specs.iter().find(|s| s.chapter == chapter)
    }

    pub fn iter(&self) -> impl Iterator<Item = &MorphFeatureSpec> {
        self.specs.iter()
    }

    pub fn chapters(&self) -> impl Iterator<Item = &str> {
        self.specs.iter().map(|s| s.chapter.as_str())
    }
}

fn parse_value_map(text: &str) -> std::result::Result<BTreeMap<i64, i64>, String> {
    text.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|pair| {
            let (raw, fin) = pair
                .split_once('=')
                .ok_or_else(|| format!("value_map entry {pair:?} is not raw=final"))?;
            let raw = raw
                .trim()
                .parse()
                .map_err(|_| format!("bad raw code {raw:?}"))?;
            let fin = fin
                .trim()
                .parse()
                .map_err(|_| format!("bad final value {fin:?}"))?;
            Ok((raw, fin))
        })
        .collect()
}

/// Maps a raw WALS category code onto the chapter's final scale.
pub fn transform_feature(raw: i64, spec: &MorphFeatureSpec) -> Result<i64> {
    let map = spec
        .value_map
        .as_ref()
        .ok_or_else(|| Error::NoValueMap(spec.chapter.clone()))?;
    map.get(&raw)
        .copied()
        .ok_or_else(|| Error::UnknownCategory {
            chapter: spec.chapter.clone(),
            code: raw,
        })
}

/// A normalized chapter value. `degenerate` marks a zero-width final
/// range, for which the value is defined as 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalized {
    pub value: f64,
    pub degenerate: bool,
}

pub fn normalize_feature(value: i64, spec: &MorphFeatureSpec) -> Result<Normalized> {
    if value < spec.final_min || value > spec.final_max {
        return Err(Error::OutOfRange {
            iso: String::new(),
            feature: spec.chapter.clone(),
            value,
            min: spec.final_min,
            max: spec.final_max,
        });
    }
    if spec.final_min == spec.final_max {
        return Ok(Normalized {
            value: 0.0,
            degenerate: true,
        });
    }
    Ok(Normalized {
        value: (value - spec.final_min) as f64 / (spec.final_max - spec.final_min) as f64,
        degenerate: false,
    })
}

/// Mean normalized value over every chapter of `specs`. All chapters must
/// be present; extra keys are ignored.
pub fn c_wals(values: &BTreeMap<String, i64>, specs: &MorphSpecSet) -> Result<f64> {
    let missing: Vec<String> = specs
        .chapters()
        .filter(|c| !values.contains_key(*c))
        .map(str::to_owned)
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingChapters {
            iso: None,
            chapters: missing,
        });
    }
    let mut sum = 0.0;
    for spec in specs.iter() {
        sum += normalize_feature(values[&spec.chapter], spec)?.value;
    }
    Ok(sum / CHAPTER_COUNT as f64)
}

/// Scores every row, keeping per-language failures separate. Output is
/// sorted by ISO code.
pub fn c_wals_table(
    rows: &[(Iso, BTreeMap<String, i64>)],
    specs: &MorphSpecSet,
) -> (Vec<(Iso, f64)>, Failures) {
    let mut scored = Vec::new();
    let mut failed = Vec::new();
    for (iso, values) in rows {
        match c_wals(values, specs) {
            Ok(v) => scored.push((iso.clone(), v)),
            Err(Error::MissingChapters { chapters, .. }) => failed.push((
                iso.clone(),
                Error::MissingChapters {
                    iso: Some(iso.to_string()),
                    chapters,
                },
            )),
            Err(Error::OutOfRange {
                feature,
                value,
                min,
                max,
                ..
            }) => failed.push((
                iso.clone(),
                Error::OutOfRange {
                    iso: iso.to_string(),
                    feature,
                    value,
                    min,
                    max,
                },
            )),
            Err(e) => failed.push((iso.clone(), e)),
        }
    }
    scored.sort_by(|a, b| a.0.cmp(&b.0));
    failed.sort_by(|a, b| a.0.cmp(&b.0));
    (scored, failed)
}
