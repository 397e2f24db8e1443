//! Loading registries, feature tables, profile tables and corpora.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use unicode_normalization::{is_nfc_quick, IsNormalized, UnicodeNormalization};

use crate::error::{Error, Result};
use crate::grammar::MorphSpecSet;
use crate::model::{
    Endangerment, FeatureMatrix, Iso, LanguageRecord, LanguageSet, MatrixKind, TextProfile,
};

const REGISTRY_COLUMNS: [&str; 5] = ["iso", "name", "family", "endangerment", "script_scale"];
const MISSING: &str = "?";

static BUNDLED_REGISTRY: &str = include_str!("../data/registry.csv");
static BUNDLED_NAMES: &str = include_str!("../data/name_to_iso.csv");

/// The registry shipped with the crate.
pub fn bundled_registry() -> LanguageSet {
    parse_registry(BUNDLED_REGISTRY.as_bytes(), "bundled registry")
        .expect("bundled registry is valid")
}

pub fn load_registry(path: impl AsRef<Path>) -> Result<LanguageSet> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_registry(file, &path.display().to_string())
}

pub fn parse_registry<R: Read>(reader: R, source_name: &str) -> Result<LanguageSet> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let columns: Vec<&str> = headers.iter().map(str::trim).collect();
    if columns.len() < 2 || columns[..] != REGISTRY_COLUMNS[..columns.len().min(5)] {
        return Err(Error::parse(
            source_name,
            format!("registry header must be {}", REGISTRY_COLUMNS.join(",")),
        ));
    }

    let mut members = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| record.get(i).map(str::trim).unwrap_or("");
        let iso = Iso::parse(field(0)).map_err(|_| Error::InvalidIso {
            code: field(0).to_owned(),
            row: Some(row),
        })?;
        let family = Some(field(2).to_owned()).filter(|f| !f.is_empty());
        let endangerment = match field(3) {
            "" => None,
            s => Some(
                s.parse::<Endangerment>()
                    .map_err(|e| Error::parse(source_name, format!("row {row}: {e}")))?,
            ),
        };
        let script_scale = match field(4) {
            "" => 1.0,
            s => s.parse::<f64>().map_err(|_| {
                Error::parse(source_name, format!("row {row}: bad script_scale {s:?}"))
            })?,
        };
        members.push(LanguageRecord::new(
            iso,
            field(1),
            family,
            endangerment,
            script_scale,
        )?);
    }
    LanguageSet::new(members)
}

/// Writes a registry in the same format [`parse_registry`] reads.
pub fn write_registry<W: Write>(set: &LanguageSet, writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    w.write_record(REGISTRY_COLUMNS)?;
    for m in set.iter() {
        w.write_record([
            m.iso.as_str(),
            &m.name,
            m.family.as_deref().unwrap_or(""),
            m.endangerment.map_or("", Endangerment::as_str),
            &format!("{}", m.script_scale),
        ])?;
    }
    w.flush().map_err(|e| Error::io("registry output", e))?;
    Ok(())
}

/// A feature matrix together with the rows dropped for missing values.
#[derive(Debug, Clone)]
pub struct LoadedMatrix {
    pub matrix: FeatureMatrix,
    pub dropped: Vec<Iso>,
}

pub fn load_feature_matrix(
    path: impl AsRef<Path>,
    kind: MatrixKind,
    drop_incomplete: bool,
) -> Result<LoadedMatrix> {
    let specs = match kind {
        MatrixKind::MorphologicalOrdinal => Some(MorphSpecSet::bundled()),
        MatrixKind::BinarySyntactic => None,
    };
    load_feature_matrix_with(path, kind, drop_incomplete, specs.as_ref())
}

/// Like [`load_feature_matrix`], range-checking ordinal matrices against
/// `specs` instead of the bundled chapter set.
pub fn load_feature_matrix_with(
    path: impl AsRef<Path>,
    kind: MatrixKind,
    drop_incomplete: bool,
    specs: Option<&MorphSpecSet>,
) -> Result<LoadedMatrix> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_feature_matrix(
        file,
        &path.display().to_string(),
        kind,
        drop_incomplete,
        specs,
    )
}

pub fn parse_feature_matrix<R: Read>(
    reader: R,
    source_name: &str,
    kind: MatrixKind,
    drop_incomplete: bool,
    specs: Option<&MorphSpecSet>,
) -> Result<LoadedMatrix> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.get(0).map(str::trim) != Some("iso") {
        return Err(Error::parse(source_name, "first column must be iso"));
    }
    let features: Vec<String> = headers
        .iter()
        .skip(1)
        .map(|h| h.trim().to_owned())
        .collect();
    if features.is_empty() {
        return Err(Error::parse(source_name, "no feature columns"));
    }

    let mut languages = Vec::new();
    let mut values = Vec::new();
    let mut dropped = Vec::new();
    let mut missing = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        let code = record.get(0).unwrap_or("").trim();
        let iso = Iso::parse(code).map_err(|_| Error::InvalidIso {
            code: code.to_owned(),
            row: Some(row),
        })?;
        let mut cells = Vec::with_capacity(features.len());
        let mut complete = true;
        for (feature, cell) in features.iter().zip(record.iter().skip(1)) {
            let cell = cell.trim();
            if cell == MISSING || cell.is_empty() {
                complete = false;
                if !drop_incomplete {
                    missing.push((iso.to_string(), feature.clone()));
                }
                continue;
            }
            let v = cell.parse::<i64>().map_err(|_| {
                Error::parse(
                    source_name,
                    format!("row {row}, {feature}: not an integer: {cell:?}"),
                )
            })?;
            cells.push(v);
        }
        if record.len() != features.len() + 1 {
            return Err(Error::parse(
                source_name,
                format!(
                    "row {row}: expected {} fields, got {}",
                    features.len() + 1,
                    record.len()
                ),
            ));
        }
        if complete {
            languages.push(iso);
            values.push(cells);
        } else {
            dropped.push(iso);
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingValues(missing));
    }

    let matrix = FeatureMatrix::new(languages, features, values, kind)?;
    if let (MatrixKind::MorphologicalOrdinal, Some(specs)) = (kind, specs) {
        matrix.check_ranges(|f| specs.get(f).map(|s| (s.final_min, s.final_max)))?;
    }
    Ok(LoadedMatrix { matrix, dropped })
}

/// Per-language morphology rows that may be incomplete; blank or `?`
/// cells are left out of the row's map.
pub fn load_morph_table(path: impl AsRef<Path>) -> Result<Vec<(Iso, BTreeMap<String, i64>)>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_morph_table(file, &path.display().to_string())
}

pub fn parse_morph_table<R: Read>(
    reader: R,
    source_name: &str,
) -> Result<Vec<(Iso, BTreeMap<String, i64>)>> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.get(0).map(str::trim) != Some("iso") {
        return Err(Error::parse(source_name, "first column must be iso"));
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        let code = record.get(0).unwrap_or("").trim();
        let iso = Iso::parse(code).map_err(|_| Error::InvalidIso {
            code: code.to_owned(),
            row: Some(row),
        })?;
        let mut values = BTreeMap::new();
        for (chapter, cell) in headers.iter().skip(1).zip(record.iter().skip(1)) {
            let cell = cell.trim();
            if cell.is_empty() || cell == MISSING {
                continue;
            }
            let v = cell.parse::<i64>().map_err(|_| {
                Error::parse(
                    source_name,
                    format!("row {row}, {chapter}: not an integer: {cell:?}"),
                )
            })?;
            values.insert(chapter.trim().to_owned(), v);
        }
        rows.push((iso, values));
    }
    Ok(rows)
}

/// Text of one language, validated as UTF-8 and normalized to NFC.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSource {
    pub iso: Iso,
    pub path: PathBuf,
    pub text: String,
}

pub fn load_corpus(path: impl AsRef<Path>, iso: Iso) -> Result<CorpusSource> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    corpus_from_bytes(bytes, path, iso)
}

pub fn corpus_from_bytes(bytes: Vec<u8>, path: &Path, iso: Iso) -> Result<CorpusSource> {
    let text = String::from_utf8(bytes).map_err(|e| Error::Encoding {
        path: path.to_owned(),
        offset: e.utf8_error().valid_up_to(),
    })?;
    if text.trim().is_empty() {
        return Err(Error::EmptyCorpus(path.to_owned()));
    }
    let text = match is_nfc_quick(text.chars()) {
        IsNormalized::Yes => text,
        _ => text.nfc().collect(),
    };
    Ok(CorpusSource {
        iso,
        path: path.to_owned(),
        text,
    })
}

/// Lists `<iso>.txt` files in a corpus directory, sorted by code.
/// Files whose stem is not a valid code are returned as errors.
pub fn corpus_files(dir: impl AsRef<Path>) -> Result<Vec<(Iso, PathBuf)>> {
    let dir = dir.as_ref();
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if path.extension().and_then(|e| e.to_str()) != Some("txt") {
            continue;
        }
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("");
        let iso = Iso::parse(stem).map_err(|_| {
            Error::parse(
                dir.display().to_string(),
                format!("{} is not named <iso>.txt", path.display()),
            )
        })?;
        files.push((iso, path));
    }
    files.sort();
    Ok(files)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FamilyCount {
    pub count: usize,
    pub families: BTreeMap<String, Vec<Iso>>,
    pub unlabeled: Vec<Iso>,
}

/// Counts distinct family labels; unlabeled members are listed apart.
pub fn count_families(languages: &LanguageSet) -> FamilyCount {
    let mut families: BTreeMap<String, BTreeSet<Iso>> = BTreeMap::new();
    let mut unlabeled = BTreeSet::new();
    for m in languages.iter() {
        match &m.family {
            Some(f) => {
                families.entry(f.clone()).or_default().insert(m.iso.clone());
            }
            None => {
                unlabeled.insert(m.iso.clone());
            }
        }
    }
    FamilyCount {
        count: families.len(),
        families: families
            .into_iter()
            .map(|(f, members)| (f, members.into_iter().collect()))
            .collect(),
        unlabeled: unlabeled.into_iter().collect(),
    }
}

/// Static language-name → ISO 639-3 lookup.
#[derive(Debug, Clone)]
pub struct NameIndex {
    by_name: HashMap<String, Iso>,
}

impl NameIndex {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_NAMES.as_bytes(), "bundled name table")
            .expect("bundled names are valid")
    }

    pub fn parse<R: Read>(reader: R, source_name: &str) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.iter().map(str::trim).collect::<Vec<_>>() != ["name", "iso"] {
            return Err(Error::parse(
                source_name,
                "name table header must be name,iso",
            ));
        }
        let mut by_name = HashMap::new();
        for record in rdr.records() {
            let record = record?;
            let row = record.position().map_or(0, |p| p.line() as usize);
            let code = record.get(1).unwrap_or("").trim();
            let iso = Iso::parse(code).map_err(|_| Error::InvalidIso {
                code: code.to_owned(),
                row: Some(row),
            })?;
            by_name.insert(key(record.get(0).unwrap_or("")), iso);
        }
        Ok(NameIndex { by_name })
    }

    /// Case- and whitespace-insensitive lookup.
    pub fn resolve(&self, name: &str) -> Option<&Iso> {
        self.by_name.get(&key(name))
    }
}

fn key(name: &str) -> String {
    name.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// Reads a language list: one entry per line, either an ISO code or a
/// name resolvable through `names`. Returns the distinct codes in order of
/// first appearance and the entries that could not be resolved.
pub fn parse_language_list(text: &str, names: &NameIndex) -> (Vec<Iso>, Vec<String>) {
    let mut codes = Vec::new();
    let mut seen = BTreeSet::new();
    let mut unresolved = Vec::new();
    for line in text.lines() {
        let entry = line.trim();
        if entry.is_empty() || entry.starts_with('#') {
            continue;
        }
        let iso = names
            .resolve(entry)
            .cloned()
            .or_else(|| Iso::parse(entry).ok());
        match iso {
            Some(iso) => {
                if seen.insert(iso.clone()) {
                    codes.push(iso);
                }
            }
            None => unresolved.push(entry.to_owned()),
        }
    }
    (codes, unresolved)
}

const PROFILE_COLUMNS: [&str; 7] = [
    "iso",
    "mwl",
    "ttr",
    "entropy",
    "token_count",
    "offset",
    "seed",
];

pub fn write_profile_table<W: Write>(profiles: &[TextProfile], writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    w.write_record(PROFILE_COLUMNS)?;
    for p in profiles {
        w.write_record([
            p.iso.to_string(),
            p.mean_word_length.to_string(),
            p.ttr.to_string(),
            p.unigram_entropy.to_string(),
            p.token_count.to_string(),
            p.sample_offset.to_string(),
            p.seed.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("profile output", e))?;
    Ok(())
}

pub fn load_profile_table(path: impl AsRef<Path>) -> Result<Vec<TextProfile>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_profile_table(file, &path.display().to_string())
}

pub fn parse_profile_table<R: Read>(reader: R, source_name: &str) -> Result<Vec<TextProfile>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().map(str::trim).collect::<Vec<_>>() != PROFILE_COLUMNS {
        return Err(Error::parse(
            source_name,
            format!("profile table header must be {}", PROFILE_COLUMNS.join(",")),
        ));
    }
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        let bad = |col: &str| Error::parse(source_name, format!("row {row}: bad {col}"));
        let f = |i: usize| record.get(i).unwrap_or("").trim();
        let iso = Iso::parse(f(0)).map_err(|_| Error::InvalidIso {
            code: f(0).to_owned(),
            row: Some(row),
        })?;
        out.push(TextProfile::new(
            iso,
            f(1).parse().map_err(|_| bad("mwl"))?,
            f(2).parse().map_err(|_| bad("ttr"))?,
            f(3).parse().map_err(|_| bad("entropy"))?,
            f(4).parse().map_err(|_| bad("token_count"))?,
            f(5).parse().map_err(|_| bad("offset"))?,
            f(6).parse().map_err(|_| bad("seed"))?,
        )?);
    }
    Ok(out)
}

/// A table keyed by `iso` with named numeric columns. Non-numeric columns
/// are kept as absent values so that name columns do not break parsing.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NumericTable {
    pub columns: Vec<String>,
    pub rows: BTreeMap<Iso, HashMap<String, f64>>,
}

impl NumericTable {
    pub fn column(&self, name: &str) -> Option<BTreeMap<&Iso, f64>> {
        if !self.columns.iter().any(|c| c == name) {
            return None;
        }
        Some(
            self.rows
                .iter()
                .filter_map(|(iso, row)| row.get(name).map(|v| (iso, *v)))
                .collect(),
        )
    }
}

pub fn load_numeric_table(path: impl AsRef<Path>) -> Result<NumericTable> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_numeric_table(file, &path.display().to_string())
}

pub fn parse_numeric_table<R: Read>(reader: R, source_name: &str) -> Result<NumericTable> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    let iso_col = headers
        .iter()
        .position(|h| h.trim() == "iso")
        .ok_or_else(|| Error::parse(source_name, "table has no iso column"))?;
    let columns: Vec<String> = headers.iter().map(|h| h.trim().to_owned()).collect();
    let mut rows = BTreeMap::new();
    for record in rdr.records() {
        let record = record?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        let code = record.get(iso_col).unwrap_or("").trim();
        let iso = Iso::parse(code).map_err(|_| Error::InvalidIso {
            code: code.to_owned(),
            row: Some(row),
        })?;
        let values = columns
            .iter()
            .zip(record.iter())
            .filter_map(|(c, v)| v.trim().parse::<f64>().ok().map(|v| (c.clone(), v)))
            .collect();
        if rows.insert(iso.clone(), values).is_some() {
            return Err(Error::DuplicateIso(iso.to_string()));
        }
    }
    Ok(NumericTable { columns, rows })
}
