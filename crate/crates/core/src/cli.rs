//! The `divscore` command line.
//!
//! Data goes to stdout, diagnostics to stderr. Per-language failures are
//! reported and skipped; any such failure makes the exit code 1.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{self, DatasetScores, ReportFormat, SCHEMA_VERSION};
use crate::diversity::{self, SynDims};
use crate::error::{Error, Failures, Result};
use crate::grammar::{self, MorphSpecSet};
use crate::ingest::{self, NameIndex};
use crate::model::{
    bin_label, DiversityReport, FeatureMatrix, Iso, LanguageRecord, LanguageSet, MatrixKind,
    ScoreName, TextProfile,
};

static BUNDLED_MORPH_VALUES: &str = include_str!("../data/morph_final_values.csv");
static BUNDLED_MWL_CWALS: &str = include_str!("../data/mwl_cwals.csv");
static BUNDLED_MBERT: &str = include_str!("../data/mbert_languages.txt");

#[derive(Debug, Parser)]
#[command(
    name = "divscore",
    version,
    about = "Linguistic diversity of a data set against a reference sample"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Histogram bin width for word-length scores.
    #[arg(long, global = true, default_value_t = 1.0, value_parser = positive_f64)]
    pub bin_width: f64,

    /// Tokens per contiguous corpus sample.
    #[arg(long, global = true, default_value_t = 10_000, value_parser = positive_usize)]
    pub sample_target: usize,

    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Skip feature-matrix rows containing missing values.
    #[arg(long, global = true)]
    pub drop_incomplete: bool,

    /// Syntactic weight dimensions: one per feature (103) or per value (206).
    #[arg(long, global = true, default_value = "103", value_parser = ["103", "206"])]
    pub syn_dims: String,

    #[arg(long, global = true)]
    pub reference: Option<PathBuf>,

    #[arg(long, global = true)]
    pub dataset: Option<PathBuf>,

    /// Language registry CSV (defaults to the bundled one).
    #[arg(long, global = true)]
    pub registry: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Level {
    Morph,
    Syn,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Text statistics for every `<iso>.txt` corpus in --dataset.
    Profile,
    /// Jaccard and typology-index scores of --dataset against --reference.
    Score {
        #[arg(long, value_enum)]
        level: Level,
    },
    /// Morphological complexity per language (bundled table by default).
    Cwals {
        /// Chapter specification CSV (defaults to the bundled set).
        #[arg(long)]
        specs: Option<PathBuf>,
    },
    /// Spearman correlation of two columns joined by iso.
    Correlate {
        #[arg(long, default_value = "mwl")]
        x: String,
        #[arg(long, default_value = "c_wals")]
        y: String,
    },
    /// Distinct language families in a language list (bundled mBERT list by default).
    Families,
    /// Four scores per data set, from a manifest with columns name,role,syntax,morph.
    Table {
        #[arg(long)]
        manifest: PathBuf,
    },
}

fn positive_f64(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        _ => Err(format!("expected a positive number, got {s:?}")),
    }
}

fn positive_usize(s: &str) -> std::result::Result<usize, String> {
    match s.parse::<usize>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(format!("expected a positive integer, got {s:?}")),
    }
}

impl Cli {
    fn syn_dims(&self) -> SynDims {
        if self.syn_dims == "206" {
            SynDims::PerValue
        } else {
            SynDims::PerFeature
        }
    }

    fn registry(&self) -> Result<LanguageSet> {
        match &self.registry {
            Some(p) => ingest::load_registry(p),
            None => Ok(ingest::bundled_registry()),
        }
    }
}

/// Parses `args` (including the program name) and runs one command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    let mut diag = Diagnostics { err, failed: false };
    match execute(&cli, out, &mut diag) {
        Ok(()) if !diag.failed => 0,
        Ok(()) => 1,
        Err(e) => {
            diag.error(&e.to_string());
            1
        }
    }
}

struct Diagnostics<'a> {
    err: &'a mut dyn Write,
    failed: bool,
}

impl Diagnostics<'_> {
    fn note(&mut self, msg: &str) {
        let _ = writeln!(self.err, "{msg}");
    }

    fn error(&mut self, msg: &str) {
        let _ = writeln!(self.err, "error: {msg}");
    }

    fn item_failed(&mut self, item: &dyn std::fmt::Display, e: &Error) {
        self.failed = true;
        let _ = writeln!(self.err, "error: {item}: {e}");
    }
}

fn execute(cli: &Cli, out: &mut dyn Write, diag: &mut Diagnostics<'_>) -> Result<()> {
    let bytes = match &cli.command {
        Command::Profile => cmd_profile(cli, diag)?,
        Command::Score {
            level: Level::Morph,
        } => cmd_score_morph(cli, diag)?,
        Command::Score { level: Level::Syn } => cmd_score_syn(cli, diag)?,
        Command::Cwals { specs } => cmd_cwals(cli, specs.as_deref(), diag)?,
        Command::Correlate { x, y } => cmd_correlate(cli, x, y, diag)?,
        Command::Families => cmd_families(cli, diag)?,
        Command::Table { manifest } => cmd_table(cli, manifest, diag)?,
    };
    out.write_all(&bytes).map_err(|e| Error::io("stdout", e))?;
    out.flush().map_err(|e| Error::io("stdout", e))
}

fn require<'a>(path: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    path.as_deref()
        .ok_or_else(|| Error::Invariant(format!("--{flag} <path> is required for this command")))
}

fn unsupported(cli: &Cli, what: &str) -> Error {
    let name = format!("{:?}", cli.format).to_lowercase();
    Error::UnsupportedFormat(format!("{name} (for {what})"))
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

#[derive(Serialize)]
struct Versioned<'a, T: Serialize> {
    schema_version: u32,
    #[serde(flatten)]
    body: &'a T,
}

fn versioned<T: Serialize>(body: &T) -> Result<Vec<u8>> {
    json_bytes(&Versioned {
        schema_version: SCHEMA_VERSION,
        body,
    })
}

// ---- profile ----------------------------------------------------------

/// Profiles every corpus file in `dir`; failures are returned per language.
/// Work is parallel, output is sorted by iso.
fn profile_dir(
    dir: &Path,
    registry: &LanguageSet,
    target: usize,
    seed: u64,
) -> Result<(Vec<TextProfile>, Failures)> {
    let files = ingest::corpus_files(dir)?;
    let results: Vec<(Iso, Result<TextProfile>)> = files
        .into_par_iter()
        .map(|(iso, path)| {
            let record = registry
                .get(&iso)
                .cloned()
                .unwrap_or_else(|| LanguageRecord::bare(iso.clone()));
            let result = ingest::load_corpus(&path, iso.clone())
                .and_then(|corpus| crate::textstats::profile(&corpus, &record, target, seed));
            (iso, result)
        })
        .collect();
    let mut ok = Vec::new();
    let mut failed = Vec::new();
    for (iso, r) in results {
        match r {
            Ok(p) => ok.push(p),
            Err(e) => failed.push((iso, e)),
        }
    }
    ok.sort_by(|a, b| a.iso.cmp(&b.iso));
    Ok((ok, failed))
}

fn cmd_profile(cli: &Cli, diag: &mut Diagnostics<'_>) -> Result<Vec<u8>> {
    let dir = require(&cli.dataset, "dataset")?;
    let registry = cli.registry()?;
    let (profiles, failed) = profile_dir(dir, &registry, cli.sample_target, cli.seed)?;
    for (iso, e) in &failed {
        diag.item_failed(iso, e);
    }
    match cli.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                profiles: &'a [TextProfile],
            }
            versioned(&Doc {
                profiles: &profiles,
            })
        }
        Format::Csv => {
            let mut buf = Vec::new();
            ingest::write_profile_table(&profiles, &mut buf)?;
            Ok(buf)
        }
        Format::Svg => Err(unsupported(cli, "profile")),
    }
}

// ---- score ------------------------------------------------------------

/// Word lengths per language, from a corpus directory or a profile table.
fn word_lengths(
    path: &Path,
    cli: &Cli,
    registry: &LanguageSet,
    diag: &mut Diagnostics<'_>,
) -> Result<BTreeMap<Iso, f64>> {
    let profiles = if path.is_dir() {
        let (profiles, failed) = profile_dir(path, registry, cli.sample_target, cli.seed)?;
        for (iso, e) in &failed {
            diag.item_failed(iso, e);
        }
        profiles
    } else {
        ingest::load_profile_table(path)?
    };
    let mut map = BTreeMap::new();
    for p in profiles {
        if map.insert(p.iso.clone(), p.mean_word_length).is_some() {
            return Err(Error::DuplicateIso(p.iso.to_string()));
        }
    }
    Ok(map)
}

#[derive(Serialize)]
struct ScoreDocument {
    level: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    bin_width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    syn_dims: Option<usize>,
    dataset_languages: Vec<Iso>,
    reference_languages: Vec<Iso>,
    jmm: DiversityReport,
    ti_dataset: DiversityReport,
    ti_reference: DiversityReport,
}

fn emit_score(cli: &Cli, doc: &ScoreDocument) -> Result<Vec<u8>> {
    match cli.format {
        Format::Json => versioned(doc),
        Format::Csv => analysis::serialize_report(&doc.jmm, ReportFormat::Csv),
        Format::Svg => analysis::serialize_report(&doc.jmm, ReportFormat::Svg),
    }
}

fn cmd_score_morph(cli: &Cli, diag: &mut Diagnostics<'_>) -> Result<Vec<u8>> {
    let registry = cli.registry()?;
    let reference = word_lengths(require(&cli.reference, "reference")?, cli, &registry, diag)?;
    let dataset = word_lengths(require(&cli.dataset, "dataset")?, cli, &registry, diag)?;
    let rv: Vec<f64> = reference.values().copied().collect();
    let dv: Vec<f64> = dataset.values().copied().collect();
    let width = cli.bin_width;

    let cmp = diversity::compare_measurements(&dv, &rv, width)?;
    let mut members: BTreeMap<String, Vec<Iso>> = BTreeMap::new();
    for (iso, &v) in &reference {
        let bin = diversity::bin_measurements(&[v], width)?.bin_of(v);
        members
            .entry(bin_label(bin, width, diversity::ANCHOR))
            .or_default()
            .push(iso.clone());
    }
    let gap = analysis::gap_report(&cmp.dataset, &cmp.reference, &members)?;
    diag.note(&format!("normalization scalar c = {}", cmp.normalization_c));
    let jmm = cmp.into_report(ScoreName::JmmMorph)?.with_gap(gap);

    let doc = ScoreDocument {
        level: "morph",
        bin_width: Some(width),
        syn_dims: None,
        dataset_languages: dataset.keys().cloned().collect(),
        reference_languages: reference.keys().cloned().collect(),
        jmm,
        ti_dataset: diversity::ti_morph_report(&dv, width)?,
        ti_reference: diversity::ti_morph_report(&rv, width)?,
    };
    emit_score(cli, &doc)
}

fn load_syntax(path: &Path, cli: &Cli, diag: &mut Diagnostics<'_>) -> Result<FeatureMatrix> {
    let loaded =
        ingest::load_feature_matrix(path, MatrixKind::BinarySyntactic, cli.drop_incomplete)?;
    if !loaded.dropped.is_empty() {
        let n = loaded.dropped.len();
        let codes: Vec<String> = loaded.dropped.iter().map(Iso::to_string).collect();
        diag.note(&format!(
            "{}: {n} row{} dropped ({})",
            path.display(),
            if n == 1 { "" } else { "s" },
            codes.join(", ")
        ));
    }
    Ok(loaded.matrix)
}

fn cmd_score_syn(cli: &Cli, diag: &mut Diagnostics<'_>) -> Result<Vec<u8>> {
    let reference = load_syntax(require(&cli.reference, "reference")?, cli, diag)?;
    let dataset = load_syntax(require(&cli.dataset, "dataset")?, cli, diag)?;
    let dims = cli.syn_dims();

    let cmp = diversity::compare_syntax(&dataset, &reference, dims)?;
    // A dimension's reference members are the languages showing that value.
    let mut members: BTreeMap<String, Vec<Iso>> = BTreeMap::new();
    for (j, feature) in reference.features().iter().enumerate() {
        for ((iso, _), v) in reference.rows().zip(reference.column(j)) {
            let label = match dims {
                SynDims::PerFeature if v == 1 => feature.clone(),
                SynDims::PerFeature => continue,
                SynDims::PerValue => format!("{feature}={v}"),
            };
            members.entry(label).or_default().push(iso.clone());
        }
    }
    let gap = analysis::gap_report(&cmp.dataset, &cmp.reference, &members)?;
    diag.note(&format!("normalization scalar c = {}", cmp.normalization_c));
    let jmm = cmp.into_report(ScoreName::JmmSyn)?.with_gap(gap);

    let doc = ScoreDocument {
        level: "syn",
        bin_width: None,
        syn_dims: Some(jmm.per_bin.len()),
        dataset_languages: dataset.languages().to_vec(),
        reference_languages: reference.languages().to_vec(),
        jmm,
        ti_dataset: diversity::ti_syn_report(&dataset)?,
        ti_reference: diversity::ti_syn_report(&reference)?,
    };
    emit_score(cli, &doc)
}

// ---- cwals ------------------------------------------------------------

fn cmd_cwals(cli: &Cli, specs: Option<&Path>, diag: &mut Diagnostics<'_>) -> Result<Vec<u8>> {
    let specs = match specs {
        Some(p) => MorphSpecSet::load(p)?,
        None => MorphSpecSet::bundled(),
    };
    let rows = match &cli.dataset {
        Some(p) => ingest::load_morph_table(p)?,
        None => {
            ingest::parse_morph_table(BUNDLED_MORPH_VALUES.as_bytes(), "bundled morphology table")?
        }
    };
    let (scored, failed) = grammar::c_wals_table(&rows, &specs);
    for (iso, e) in &failed {
        diag.item_failed(iso, e);
    }
    match cli.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Row<'a> {
                iso: &'a Iso,
                c_wals: f64,
            }
            #[derive(Serialize)]
            struct Doc<'a> {
                rows: Vec<Row<'a>>,
            }
            versioned(&Doc {
                rows: scored
                    .iter()
                    .map(|(iso, c)| Row { iso, c_wals: *c })
                    .collect(),
            })
        }
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(Vec::new());
            w.write_record(["iso", "c_wals"])?;
            for (iso, c) in &scored {
                w.write_record([iso.to_string(), c.to_string()])?;
            }
            w.into_inner()
                .map_err(|e| Error::io("csv output", e.into_error()))
        }
        Format::Svg => Err(unsupported(cli, "cwals")),
    }
}

// ---- correlate --------------------------------------------------------

fn cmd_correlate(cli: &Cli, x: &str, y: &str, diag: &mut Diagnostics<'_>) -> Result<Vec<u8>> {
    let left = match &cli.dataset {
        Some(p) => ingest::load_numeric_table(p)?,
        None => {
            ingest::parse_numeric_table(BUNDLED_MWL_CWALS.as_bytes(), "bundled MWL/C_WALS table")?
        }
    };
    let right = match &cli.reference {
        Some(p) => ingest::load_numeric_table(p)?,
        None => left.clone(),
    };
    let missing = |name: &str| Error::Parse {
        source_name: "correlate".into(),
        message: format!("no numeric column {name:?}"),
    };
    let xs = left.column(x).ok_or_else(|| missing(x))?;
    let ys = right.column(y).ok_or_else(|| missing(y))?;

    let only_x: Vec<String> = xs
        .keys()
        .filter(|k| !ys.contains_key(*k))
        .map(|k| k.to_string())
        .collect();
    let only_y: Vec<String> = ys
        .keys()
        .filter(|k| !xs.contains_key(*k))
        .map(|k| k.to_string())
        .collect();
    let (a, b): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .filter_map(|(iso, &vx)| ys.get(iso).map(|&vy| (vx, vy)))
        .unzip();
    if a.is_empty() {
        return Err(Error::NoOverlap);
    }
    if !only_x.is_empty() {
        diag.note(&format!("excluded (only {x}): {}", only_x.join(", ")));
    }
    if !only_y.is_empty() {
        diag.note(&format!("excluded (only {y}): {}", only_y.join(", ")));
    }
    let result = analysis::spearman(&a, &b)?;
    match cli.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                x: &'a str,
                y: &'a str,
                rho: f64,
                n: usize,
            }
            versioned(&Doc {
                x,
                y,
                rho: result.rho,
                n: result.n,
            })
        }
        Format::Csv => Ok(format!("x,y,rho,n\n{x},{y},{},{}\n", result.rho, result.n).into_bytes()),
        Format::Svg => Err(unsupported(cli, "correlate")),
    }
}

// ---- families ---------------------------------------------------------

fn cmd_families(cli: &Cli, diag: &mut Diagnostics<'_>) -> Result<Vec<u8>> {
    let registry = cli.registry()?;
    let text = match &cli.dataset {
        Some(p) => std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?,
        None => BUNDLED_MBERT.to_owned(),
    };
    let (codes, unresolved) = ingest::parse_language_list(&text, &NameIndex::bundled());
    for entry in &unresolved {
        diag.note(&format!("warning: unknown language {entry:?}, excluded"));
    }
    let (set, unknown) = registry.subset(&codes);
    for iso in &unknown {
        diag.note(&format!("warning: {iso} is not in the registry, excluded"));
    }
    let count = ingest::count_families(&set);
    if !count.unlabeled.is_empty() {
        let codes: Vec<String> = count.unlabeled.iter().map(Iso::to_string).collect();
        diag.note(&format!("unlabeled (no family): {}", codes.join(", ")));
    }
    match cli.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                languages: usize,
                family_count: usize,
                families: &'a BTreeMap<String, Vec<Iso>>,
                unlabeled: &'a [Iso],
            }
            versioned(&Doc {
                languages: set.len(),
                family_count: count.count,
                families: &count.families,
                unlabeled: &count.unlabeled,
            })
        }
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(Vec::new());
            w.write_record(["family", "iso"])?;
            for (family, members) in &count.families {
                for iso in members {
                    w.write_record([family.as_str(), iso.as_str()])?;
                }
            }
            w.into_inner()
                .map_err(|e| Error::io("csv output", e.into_error()))
        }
        Format::Svg => Err(unsupported(cli, "families")),
    }
}

// ---- table ------------------------------------------------------------

struct ManifestEntry {
    name: String,
    syntax: FeatureMatrix,
    mwl: Vec<f64>,
    families: Option<usize>,
}

fn inputs(e: &ManifestEntry) -> DatasetScores<'_> {
    DatasetScores {
        name: &e.name,
        syntax: &e.syntax,
        word_lengths: &e.mwl,
        families: e.families,
    }
}

fn cmd_table(cli: &Cli, manifest: &Path, diag: &mut Diagnostics<'_>) -> Result<Vec<u8>> {
    let registry = cli.registry()?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    let file = std::fs::File::open(manifest).map_err(|e| Error::io(manifest, e))?;
    let source = manifest.display().to_string();
    let mut rdr = csv::Reader::from_reader(file);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::parse(&source, format!("missing column {name:?}")))
    };
    let (c_name, c_role, c_syn, c_morph) =
        (col("name")?, col("role")?, col("syntax")?, col("morph")?);

    let mut reference = None;
    let mut datasets = Vec::new();
    let mut names = BTreeSet::new();
    for record in rdr.records() {
        let record = record?;
        let get = |i: usize| record.get(i).unwrap_or("").trim().to_owned();
        let name = get(c_name);
        if !names.insert(name.clone()) {
            return Err(Error::parse(
                &source,
                format!("duplicate data set name {name:?}"),
            ));
        }
        let syntax = load_syntax(&base.join(get(c_syn)), cli, diag)?;
        let mwl: Vec<f64> = word_lengths(&base.join(get(c_morph)), cli, &registry, diag)?
            .into_values()
            .collect();
        let (set, _) = registry.subset(syntax.languages());
        let families =
            (set.len() == syntax.n_languages()).then(|| ingest::count_families(&set).count);
        let entry = ManifestEntry {
            name,
            syntax,
            mwl,
            families,
        };
        match get(c_role).as_str() {
            "reference" if reference.is_none() => reference = Some(entry),
            "reference" => return Err(Error::parse(&source, "more than one reference row")),
            "dataset" => datasets.push(entry),
            other => return Err(Error::parse(&source, format!("unknown role {other:?}"))),
        }
    }
    let reference = reference.ok_or_else(|| Error::parse(&source, "no reference row"))?;
    let rows: Vec<DatasetScores<'_>> = datasets.iter().map(inputs).collect();
    let table = analysis::score_table(&rows, inputs(&reference), cli.bin_width, cli.syn_dims())?;
    match cli.format {
        Format::Json => json_bytes(&table),
        Format::Csv => analysis::score_table_csv(&table),
        Format::Svg => Err(unsupported(cli, "table")),
    }
}
