//! Domain types shared by every stage of the pipeline.
//!
//! Constructors validate their invariants and return [`Error::Invariant`]
//! (or a more specific variant) naming the violated rule. Values are
//! immutable once built.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An ISO 639-3 language code: exactly three lowercase ASCII letters.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Iso(String);

impl Iso {
    pub fn parse(code: &str) -> Result<Self> {
        if code.len() == 3 && code.bytes().all(|b| b.is_ascii_lowercase()) {
            Ok(Iso(code.to_owned()))
        } else {
            Err(Error::InvalidIso {
                code: code.to_owned(),
                row: None,
            })
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Iso {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        Iso::parse(&value)
    }
}

impl From<Iso> for String {
    fn from(iso: Iso) -> Self {
        iso.0
    }
}

impl FromStr for Iso {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Iso::parse(s)
    }
}

impl fmt::Display for Iso {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Iso {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endangerment {
    Safe,
    Vulnerable,
    Endangered,
    Extinct,
    Unknown,
}

impl Endangerment {
    pub fn as_str(self) -> &'static str {
        match self {
            Endangerment::Safe => "safe",
            Endangerment::Vulnerable => "vulnerable",
            Endangerment::Endangered => "endangered",
            Endangerment::Extinct => "extinct",
            Endangerment::Unknown => "unknown",
        }
    }
}

impl FromStr for Endangerment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "safe" => Ok(Endangerment::Safe),
            "vulnerable" => Ok(Endangerment::Vulnerable),
            "endangered" => Ok(Endangerment::Endangered),
            "extinct" => Ok(Endangerment::Extinct),
            "unknown" => Ok(Endangerment::Unknown),
            other => Err(Error::Invariant(format!(
                "endangerment must be one of safe, vulnerable, endangered, extinct, unknown; got {other:?}"
            ))),
        }
    }
}

/// Identity and metadata for one language.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageRecord {
    pub iso: Iso,
    pub name: String,
    pub family: Option<String>,
    pub endangerment: Option<Endangerment>,
    /// Multiplier applied to the mean word length (logographic scripts).
    pub script_scale: f64,
}

impl LanguageRecord {
    pub fn new(
        iso: Iso,
        name: impl Into<String>,
        family: Option<String>,
        endangerment: Option<Endangerment>,
        script_scale: f64,
    ) -> Result<Self> {
        if !(script_scale.is_finite() && script_scale > 0.0) {
            return Err(Error::Invariant(format!(
                "script_scale must be > 0, got {script_scale} for {iso}"
            )));
        }
        Ok(LanguageRecord {
            iso,
            name: name.into(),
            family: family.filter(|f| !f.trim().is_empty()),
            endangerment,
            script_scale,
        })
    }

    /// A record carrying only the code, with default metadata.
    pub fn bare(iso: Iso) -> Self {
        LanguageRecord {
            name: iso.to_string(),
            iso,
            family: None,
            endangerment: None,
            script_scale: 1.0,
        }
    }
}

/// An ordered collection of languages, unique by ISO code.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LanguageSet {
    members: Vec<LanguageRecord>,
}

impl LanguageSet {
    pub fn new(members: Vec<LanguageRecord>) -> Result<Self> {
        let mut seen = HashSet::new();
        for m in &members {
            if !seen.insert(m.iso.clone()) {
                return Err(Error::DuplicateIso(m.iso.to_string()));
            }
        }
        Ok(LanguageSet { members })
    }

    pub fn members(&self) -> &[LanguageRecord] {
        &self.members
    }

    pub fn get(&self, iso: &Iso) -> Option<&LanguageRecord> {
        self.members.iter().find(|m| &m.iso == iso)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &LanguageRecord> {
        self.members.iter()
    }

    /// Restricts the set to the given codes, keeping this set's order.
    /// Codes absent from the set are returned separately.
    pub fn subset(&self, codes: &[Iso]) -> (LanguageSet, Vec<Iso>) {
        let wanted: HashSet<&Iso> = codes.iter().collect();
        let members = self
            .members
            .iter()
            .filter(|m| wanted.contains(&m.iso))
            .cloned()
            .collect();
        let unknown = codes
            .iter()
            .filter(|c| self.get(c).is_none())
            .cloned()
            .collect();
        (LanguageSet { members }, unknown)
    }
}

/// Text statistics for one language, computed on one contiguous sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextProfile {
    pub iso: Iso,
    pub mean_word_length: f64,
    pub ttr: f64,
    pub unigram_entropy: f64,
    pub token_count: usize,
    pub sample_offset: usize,
    pub seed: u64,
}

impl TextProfile {
    pub fn new(
        iso: Iso,
        mean_word_length: f64,
        ttr: f64,
        unigram_entropy: f64,
        token_count: usize,
        sample_offset: usize,
        seed: u64,
    ) -> Result<Self> {
        if token_count == 0 {
            return Err(Error::Invariant(format!(
                "{iso}: token_count must be positive"
            )));
        }
        // Scaled values may drop below one when script_scale < 1.
        if !(mean_word_length.is_finite() && mean_word_length > 0.0) {
            return Err(Error::Invariant(format!(
                "{iso}: mean_word_length must be positive, got {mean_word_length}"
            )));
        }
        if !(ttr > 0.0 && ttr <= 1.0) {
            return Err(Error::Invariant(format!(
                "{iso}: ttr must lie in (0, 1], got {ttr}"
            )));
        }
        let bound = (token_count as f64).log2();
        if !(unigram_entropy >= 0.0 && unigram_entropy <= bound + 1e-9) {
            return Err(Error::Invariant(format!(
                "{iso}: unigram_entropy {unigram_entropy} outside [0, log2({token_count})]"
            )));
        }
        Ok(TextProfile {
            iso,
            mean_word_length,
            ttr,
            unigram_entropy,
            token_count,
            sample_offset,
            seed,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    BinarySyntactic,
    MorphologicalOrdinal,
}

/// Languages × features table of small non-negative integers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    languages: Vec<Iso>,
    features: Vec<String>,
    values: Vec<Vec<i64>>,
    kind: MatrixKind,
}

impl FeatureMatrix {
    /// Builds a complete matrix. Binary matrices must hold only 0/1;
    /// ordinal matrices are range-checked separately against their
    /// feature specs (see [`FeatureMatrix::check_ranges`]).
    pub fn new(
        languages: Vec<Iso>,
        features: Vec<String>,
        values: Vec<Vec<i64>>,
        kind: MatrixKind,
    ) -> Result<Self> {
        if values.len() != languages.len() {
            return Err(Error::Invariant(format!(
                "{} value rows for {} languages",
                values.len(),
                languages.len()
            )));
        }
        let mut seen = HashSet::new();
        for iso in &languages {
            if !seen.insert(iso) {
                return Err(Error::DuplicateIso(iso.to_string()));
            }
        }
        let mut seen = HashSet::new();
        for f in &features {
            if !seen.insert(f) {
                return Err(Error::Invariant(format!("duplicate feature {f:?}")));
            }
        }
        for (iso, row) in languages.iter().zip(&values) {
            if row.len() != features.len() {
                return Err(Error::Invariant(format!(
                    "{iso}: {} cells for {} features",
                    row.len(),
                    features.len()
                )));
            }
            for (feature, &v) in features.iter().zip(row) {
                let (min, max) = match kind {
                    MatrixKind::BinarySyntactic => (0, 1),
                    MatrixKind::MorphologicalOrdinal => (0, i64::MAX),
                };
                if v < min || v > max {
                    return Err(Error::OutOfRange {
                        iso: iso.to_string(),
                        feature: feature.clone(),
                        value: v,
                        min,
                        max,
                    });
                }
            }
        }
        Ok(FeatureMatrix {
            languages,
            features,
            values,
            kind,
        })
    }

    /// Verifies each cell against a per-feature inclusive range. Features
    /// for which `range_of` returns `None` are rejected.
    pub fn check_ranges<F>(&self, range_of: F) -> Result<()>
    where
        F: Fn(&str) -> Option<(i64, i64)>,
    {
        for (j, feature) in self.features.iter().enumerate() {
            let (min, max) = range_of(feature).ok_or_else(|| {
                Error::Invariant(format!("no declared range for feature {feature:?}"))
            })?;
            for (iso, row) in self.languages.iter().zip(&self.values) {
                let v = row[j];
                if v < min || v > max {
                    return Err(Error::OutOfRange {
                        iso: iso.to_string(),
                        feature: feature.clone(),
                        value: v,
                        min,
                        max,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn languages(&self) -> &[Iso] {
        &self.languages
    }

    pub fn features(&self) -> &[String] {
        &self.features
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn row(&self, i: usize) -> &[i64] {
        &self.values[i]
    }

    pub fn rows(&self) -> impl Iterator<Item = (&Iso, &[i64])> {
        self.languages
            .iter()
            .zip(self.values.iter().map(Vec::as_slice))
    }

    /// Values of feature `j` over all languages.
    pub fn column(&self, j: usize) -> impl Iterator<Item = i64> + '_ {
        self.values.iter().map(move |row| row[j])
    }

    pub fn n_languages(&self) -> usize {
        self.languages.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transformation {
    None,
    Binarization,
    Reorder,
    Recategorization,
    Remove,
}

impl FromStr for Transformation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "none" => Ok(Transformation::None),
            "binarization" => Ok(Transformation::Binarization),
            "reorder" => Ok(Transformation::Reorder),
            "recategorization" => Ok(Transformation::Recategorization),
            "remove" => Ok(Transformation::Remove),
            other => Err(Error::Invariant(format!(
                "unknown transformation {other:?}"
            ))),
        }
    }
}

/// One morphology chapter: its final value range and optional raw mapping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorphFeatureSpec {
    pub chapter: String,
    pub name: String,
    pub transformation: Transformation,
    pub final_min: i64,
    pub final_max: i64,
    /// Raw category code → final value. `None` means only final values
    /// are accepted for this chapter.
    pub value_map: Option<BTreeMap<i64, i64>>,
}

impl MorphFeatureSpec {
    pub fn new(
        chapter: impl Into<String>,
        name: impl Into<String>,
        transformation: Transformation,
        final_min: i64,
        final_max: i64,
        value_map: Option<BTreeMap<i64, i64>>,
    ) -> Result<Self> {
        let chapter = chapter.into();
        if final_min > final_max {
            return Err(Error::Invariant(format!(
                "{chapter}: final_min {final_min} > final_max {final_max}"
            )));
        }
        if let Some(map) = &value_map {
            if let Some((raw, v)) = map.iter().find(|(_, v)| **v < final_min || **v > final_max) {
                return Err(Error::Invariant(format!(
                    "{chapter}: raw {raw} maps to {v}, outside [{final_min}, {final_max}]"
                )));
            }
        }
        Ok(MorphFeatureSpec {
            chapter,
            name: name.into(),
            transformation,
            final_min,
            final_max,
            value_map,
        })
    }
}

/// Weighted histogram over equal-width bins anchored at `anchor`.
///
/// Bin `k` covers the half-open interval `[anchor + k·w, anchor + (k+1)·w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedDistribution {
    bin_width: f64,
    anchor: f64,
    weights: BTreeMap<i64, f64>,
}

impl BinnedDistribution {
    pub fn new(bin_width: f64, anchor: f64, weights: BTreeMap<i64, f64>) -> Result<Self> {
        if !(bin_width.is_finite() && bin_width > 0.0) {
            return Err(Error::InvalidWidth(bin_width));
        }
        if !anchor.is_finite() {
            return Err(Error::NonFinite(anchor));
        }
        if weights.values().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Invariant(
                "bin weights must be finite and >= 0".into(),
            ));
        }
        if !weights.values().any(|w| *w > 0.0) {
            return Err(Error::Invariant(
                "at least one bin weight must be positive".into(),
            ));
        }
        Ok(BinnedDistribution {
            bin_width,
            anchor,
            weights,
        })
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    pub fn weights(&self) -> &BTreeMap<i64, f64> {
        &self.weights
    }

    pub fn weight(&self, bin: i64) -> f64 {
        self.weights.get(&bin).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.weights.values().sum()
    }

    pub fn bin_of(&self, value: f64) -> i64 {
        bin_index(value, self.bin_width, self.anchor)
    }

    pub fn label(&self, bin: i64) -> String {
        bin_label(bin, self.bin_width, self.anchor)
    }
}

pub(crate) fn bin_index(value: f64, width: f64, anchor: f64) -> i64 {
    ((value - anchor) / width).floor() as i64
}

/// Human-readable label for bin `k`, e.g. `[3,4)`.
pub fn bin_label(bin: i64, width: f64, anchor: f64) -> String {
    let lo = anchor + bin as f64 * width;
    let hi = anchor + (bin + 1) as f64 * width;
    format!("[{},{})", tidy(lo), tidy(hi))
}

fn tidy(x: f64) -> String {
    // Avoid printing accumulated float noise such as 0.30000000000000004.
    let rounded = (x * 1e9).round() / 1e9;
    let s = format!("{rounded}");
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreName {
    JmmMorph,
    JmmSyn,
    TiMorph,
    TiSyn,
    CWals,
}

impl ScoreName {
    pub fn is_jaccard(self) -> bool {
        matches!(self, ScoreName::JmmMorph | ScoreName::JmmSyn)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ScoreName::JmmMorph => "jmm_morph",
            ScoreName::JmmSyn => "jmm_syn",
            ScoreName::TiMorph => "ti_morph",
            ScoreName::TiSyn => "ti_syn",
            ScoreName::CWals => "c_wals",
        }
    }
}

/// One row of a per-bin overlap table. Weights are post-scaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinRow {
    pub bin: String,
    pub reference: f64,
    pub dataset: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurplusBin {
    pub bin: String,
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeficitBin {
    pub bin: String,
    pub shortfall: f64,
    /// Reference languages in this bin, lexicographic, at most five.
    pub examples: Vec<Iso>,
}

/// Where a data set's distribution departs from the reference.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GapReport {
    pub surplus_bins: Vec<SurplusBin>,
    pub deficit_bins: Vec<DeficitBin>,
}

impl GapReport {
    pub fn is_empty(&self) -> bool {
        self.surplus_bins.is_empty() && self.deficit_bins.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiversityReport {
    pub score_name: ScoreName,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_bin: Vec<BinRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalization_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap: Option<GapReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl DiversityReport {
    pub fn new(score_name: ScoreName, value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::Invariant(format!(
                "{} value {value} outside [0, 1]",
                score_name.as_str()
            )));
        }
        Ok(DiversityReport {
            score_name,
            value,
            per_bin: Vec::new(),
            normalization_c: None,
            gap: None,
            notes: Vec::new(),
        })
    }

    /// Attaches a per-bin table; for Jaccard scores the table must
    /// reproduce the value as Σmin ÷ Σmax.
    pub fn with_per_bin(mut self, rows: Vec<BinRow>) -> Result<Self> {
        if self.score_name.is_jaccard() && !rows.is_empty() {
            let num: f64 = rows.iter().map(|r| r.min).sum();
            let den: f64 = rows.iter().map(|r| r.max).sum();
            let ratio = if den > 0.0 { num / den } else { 0.0 };
            if (ratio - self.value).abs() > 1e-12 {
                return Err(Error::Invariant(format!(
                    "per-bin table gives {ratio}, report value is {}",
                    self.value
                )));
            }
        }
        self.per_bin = rows;
        Ok(self)
    }

    pub fn with_normalization(mut self, c: f64) -> Self {
        self.normalization_c = Some(c);
        self
    }

    pub fn with_gap(mut self, gap: GapReport) -> Self {
        self.gap = Some(gap);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iso_rejects_bad_codes() {
        assert!(Iso::parse("eng").is_ok());
        for bad in ["en", "ENG", "engl", "e1g", "", "ñen"] {
            assert!(Iso::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn record_rejects_non_positive_scale() {
        let iso = Iso::parse("cmn").unwrap();
        assert!(LanguageRecord::new(iso.clone(), "Mandarin", None, None, 0.0).is_err());
        assert!(LanguageRecord::new(iso.clone(), "Mandarin", None, None, f64::NAN).is_err());
        let r = LanguageRecord::new(iso, "Mandarin", Some("".into()), None, 0.45).unwrap();
        assert_eq!(r.family, None);
    }

    #[test]
    fn set_rejects_duplicates() {
        let a = LanguageRecord::bare(Iso::parse("eng").unwrap());
        let err = LanguageSet::new(vec![a.clone(), a]).unwrap_err();
        assert!(matches!(err, Error::DuplicateIso(code) if code == "eng"));
    }

    #[test]
    fn profile_invariants() {
        let iso = Iso::parse("eng").unwrap();
        assert!(TextProfile::new(iso.clone(), 4.0, 0.5, 2.0, 4, 0, 0).is_ok());
        assert!(TextProfile::new(iso.clone(), 4.0, 0.0, 2.0, 4, 0, 0).is_err());
        assert!(TextProfile::new(iso.clone(), 4.0, 0.5, 2.5, 4, 0, 0).is_err());
        assert!(TextProfile::new(iso, 4.0, 0.5, 0.0, 0, 0, 0).is_err());
    }

    #[test]
    fn binary_matrix_rejects_two() {
        let err = FeatureMatrix::new(
            vec![Iso::parse("eng").unwrap()],
            vec!["f".into()],
            vec![vec![2]],
            MatrixKind::BinarySyntactic,
        )
        .unwrap_err();
        assert!(matches!(err, Error::OutOfRange { value: 2, .. }));
    }

    #[test]
    fn spec_range_and_map_checked() {
        assert!(MorphFeatureSpec::new("22A", "x", Transformation::None, 7, 1, None).is_err());
        let map = BTreeMap::from([(1, 1), (2, 9)]);
        assert!(MorphFeatureSpec::new("22A", "x", Transformation::None, 1, 7, Some(map)).is_err());
    }

    #[test]
    fn binned_distribution_needs_mass() {
        assert!(BinnedDistribution::new(1.0, 0.0, BTreeMap::from([(0, 0.0)])).is_err());
        assert!(BinnedDistribution::new(0.0, 0.0, BTreeMap::from([(0, 1.0)])).is_err());
        assert!(BinnedDistribution::new(1.0, 0.0, BTreeMap::from([(0, -1.0), (1, 2.0)])).is_err());
    }

    #[test]
    fn labels_are_half_open_ranges() {
        assert_eq!(bin_label(3, 1.0, 0.0), "[3,4)");
        assert_eq!(bin_label(1, 0.5, 0.0), "[0.5,1)");
        assert_eq!(bin_label(-1, 1.0, 0.0), "[-1,0)");
        assert_eq!(bin_label(2, 0.1, 0.0), "[0.2,0.3)");
    }

    #[test]
    fn report_value_range_and_per_bin_consistency() {
        assert!(DiversityReport::new(ScoreName::TiSyn, 1.2).is_err());
        let rows = vec![BinRow {
            bin: "[0,1)".into(),
            reference: 1.0,
            dataset: 2.0,
            min: 1.0,
            max: 2.0,
        }];
        let ok = DiversityReport::new(ScoreName::JmmMorph, 0.5).unwrap();
        assert!(ok.with_per_bin(rows.clone()).is_ok());
        let bad = DiversityReport::new(ScoreName::JmmMorph, 0.4).unwrap();
        assert!(bad.with_per_bin(rows).is_err());
    }
}
