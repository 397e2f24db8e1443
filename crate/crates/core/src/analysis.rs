//! Rank correlation, gap diagnosis and report serialization.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::diversity::{self, SynDims, WeightVector};
use crate::error::{Error, Result};
use crate::model::{
    BinRow, DeficitBin, DiversityReport, FeatureMatrix, GapReport, Iso, SurplusBin,
};

/// Version of the JSON documents written by this crate.
pub const SCHEMA_VERSION: u32 = 1;

/// Most reference languages listed per deficit bin.
pub const MAX_EXAMPLES: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub rho: f64,
    pub n: usize,
    pub pairs: Vec<(f64, f64)>,
}

/// 1-based ranks; tied values share the mean of the ranks they span.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman's rho: the Pearson correlation of average ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<CorrelationResult> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    let n = xs.len();
    if n < 3 {
        return Err(Error::TooFewPairs(n));
    }
    if let Some(v) = xs.iter().chain(ys).find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(*v));
    }
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    let mean = (n as f64 + 1.0) / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        let (dx, dy) = (a - mean, b - mean);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok(CorrelationResult {
        rho: (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0),
        n,
        pairs: xs.iter().copied().zip(ys.iter().copied()).collect(),
    })
}

/// Bins where the (size-normalized) data set carries more or less weight
/// than the reference. Deficit bins list up to five reference languages
/// from `reference_members`, lexicographically.
pub fn gap_report(
    dataset: &WeightVector,
    reference: &WeightVector,
    reference_members: &BTreeMap<String, Vec<Iso>>,
) -> Result<GapReport> {
    if dataset.labels() != reference.labels() {
        return Err(Error::LabelMismatch);
    }
    let mut gap = GapReport::default();
    for ((label, d), &r) in dataset.iter().zip(reference.weights()) {
        if d > r {
            gap.surplus_bins.push(SurplusBin {
                bin: label.to_owned(),
                excess: d - r,
            });
        } else if d < r {
            let mut examples = reference_members.get(label).cloned().unwrap_or_default();
            examples.sort();
            examples.dedup();
            examples.truncate(MAX_EXAMPLES);
            gap.deficit_bins.push(DeficitBin {
                bin: label.to_owned(),
                shortfall: r - d,
                examples,
            });
        }
    }
    Ok(gap)
}

/// Per-bin union/intersection table for two aligned vectors; `a` is the
/// data set and `b` the reference.
pub fn overlap_series(a: &WeightVector, b: &WeightVector) -> Result<Vec<BinRow>> {
    if a.labels() != b.labels() {
        return Err(Error::LabelMismatch);
    }
    Ok(a.iter()
        .zip(b.weights())
        .map(|((label, x), &y)| BinRow {
            bin: label.to_owned(),
            reference: y,
            dataset: x,
            min: x.min(y),
            max: x.max(y),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Svg,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "svg" | "svg-histogram" => Ok(ReportFormat::Svg),
            other => Err(Error::UnsupportedFormat(other.to_owned())),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ReportDocument {
    schema_version: u32,
    #[serde(flatten)]
    report: DiversityReport,
}

pub const BIN_TABLE_HEADER: [&str; 5] = ["bin", "dataset", "reference", "min", "max"];

pub fn serialize_report(report: &DiversityReport, format: ReportFormat) -> Result<Vec<u8>> {
    match format {
        ReportFormat::Json => {
            let doc = ReportDocument {
                schema_version: SCHEMA_VERSION,
                report: report.clone(),
            };
            let mut out = serde_json::to_vec_pretty(&doc)?;
            out.push(b'\n');
            Ok(out)
        }
        ReportFormat::Csv => bin_table_csv(&report.per_bin),
        ReportFormat::Svg => {
            Ok(histogram_svg(&report.per_bin, report.score_name.as_str()).into_bytes())
        }
    }
}

pub fn parse_report_json(bytes: &[u8]) -> Result<DiversityReport> {
    let doc: ReportDocument = serde_json::from_slice(bytes)?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(Error::parse(
            "report",
            format!("unsupported schema_version {}", doc.schema_version),
        ));
    }
    Ok(doc.report)
}

pub fn bin_table_csv(rows: &[BinRow]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(BIN_TABLE_HEADER)?;
    for r in rows {
        w.write_record([
            r.bin.clone(),
            r.dataset.to_string(),
            r.reference.to_string(),
            r.min.to_string(),
            r.max.to_string(),
        ])?;
    }
    w.into_inner()
        .map_err(|e| Error::io("csv output", e.into_error()))
}

const SVG_BAR: f64 = 36.0;
const SVG_HEIGHT: f64 = 240.0;
const SVG_MARGIN: f64 = 40.0;

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Overlaid bar chart of reference and data set weights per bin, with the
/// intersection (per-bin minimum) shaded.
pub fn histogram_svg(rows: &[BinRow], title: &str) -> String {
    let peak = rows.iter().map(|r| r.max).fold(0.0_f64, f64::max);
    let scale = if peak > 0.0 { SVG_HEIGHT / peak } else { 0.0 };
    let width = 2.0 * SVG_MARGIN + SVG_BAR * rows.len().max(1) as f64;
    let height = SVG_HEIGHT + 2.0 * SVG_MARGIN;
    let base = SVG_MARGIN + SVG_HEIGHT;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(svg, "  <title>{}</title>", escape(title));
    let _ = writeln!(
        svg,
        "  <style>.reference{{fill:#9ecae1;}} .dataset{{fill:none;stroke:#e6550d;stroke-width:2;}} .intersection{{fill:#3182bd;fill-opacity:0.6;}} text{{font:10px sans-serif;}}</style>"
    );
    for (i, r) in rows.iter().enumerate() {
        let x = SVG_MARGIN + i as f64 * SVG_BAR;
        let bar = |class: &str, w: f64, svg: &mut String| {
            let h = w * scale;
            let _ = writeln!(
                svg,
                r#"  <rect class="{class}" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}"><title>{} {class}: {w}</title></rect>"#,
                x + 2.0,
                base - h,
                SVG_BAR - 4.0,
                h,
                escape(&r.bin)
            );
        };
        if r.reference > 0.0 {
            bar("reference", r.reference, &mut svg);
        }
        if r.min > 0.0 {
            bar("intersection", r.min, &mut svg);
        }
        if r.dataset > 0.0 {
            bar("dataset", r.dataset, &mut svg);
        }
        let _ = writeln!(
            svg,
            r#"  <text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            x + SVG_BAR / 2.0,
            base + 14.0,
            escape(&r.bin)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Inputs describing one data set for the score table.
#[derive(Debug, Clone, Copy)]
pub struct DatasetScores<'a> {
    pub name: &'a str,
    pub syntax: &'a FeatureMatrix,
    pub word_lengths: &'a [f64],
    pub families: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub name: String,
    pub n_languages: usize,
    pub n_families: Option<usize>,
    pub ti_syn: f64,
    pub jmm_syn: Option<f64>,
    pub ti_morph: f64,
    pub jmm_morph: Option<f64>,
}

/// Four scores per data set, plus the reference's own typology indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub schema_version: u32,
    pub bin_width: f64,
    pub rows: Vec<ScoreRow>,
    pub reference: ScoreRow,
}

pub fn score_table(
    datasets: &[DatasetScores<'_>],
    reference: DatasetScores<'_>,
    bin_width: f64,
    dims: SynDims,
) -> Result<ScoreTable> {
    let mut rows = Vec::with_capacity(datasets.len());
    for d in datasets {
        rows.push(ScoreRow {
            name: d.name.to_owned(),
            n_languages: d.syntax.n_languages(),
            n_families: d.families,
            ti_syn: diversity::ti_syn(d.syntax)?,
            jmm_syn: Some(diversity::jmm_syn(d.syntax, reference.syntax, dims)?.value),
            ti_morph: diversity::ti_morph(d.word_lengths, bin_width)?,
            jmm_morph: Some(
                diversity::jmm_score(d.word_lengths, reference.word_lengths, bin_width)?.value,
            ),
        });
    }
    let reference = ScoreRow {
        name: reference.name.to_owned(),
        n_languages: reference.syntax.n_languages(),
        n_families: reference.families,
        ti_syn: diversity::ti_syn(reference.syntax)?,
        jmm_syn: None,
        ti_morph: diversity::ti_morph(reference.word_lengths, bin_width)?,
        jmm_morph: None,
    };
    Ok(ScoreTable {
        schema_version: SCHEMA_VERSION,
        bin_width,
        rows,
        reference,
    })
}

pub const SCORE_TABLE_HEADER: [&str; 7] = [
    "name",
    "n_languages",
    "n_families",
    "ti_syn",
    "jmm_syn",
    "ti_morph",
    "jmm_morph",
];

pub fn score_table_csv(table: &ScoreTable) -> Result<Vec<u8>> {
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(SCORE_TABLE_HEADER)?;
    for r in table.rows.iter().chain(std::iter::once(&table.reference)) {
        w.write_record([
            r.name.clone(),
            r.n_languages.to_string(),
            r.n_families.map(|f| f.to_string()).unwrap_or_default(),
            r.ti_syn.to_string(),
            opt(r.jmm_syn),
            r.ti_morph.to_string(),
            opt(r.jmm_morph),
        ])?;
    }
    w.into_inner()
        .map_err(|e| Error::io("csv output", e.into_error()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ScoreName;

    fn wv(labels: &[&str], weights: &[f64]) -> WeightVector {
        WeightVector::new(
            labels.iter().map(|s| s.to_string()).collect(),
            weights.to_vec(),
        )
        .unwrap()
    }

    fn iso(s: &str) -> Iso {
        Iso::parse(s).unwrap()
    }

    #[test]
    fn ranks_average_ties() {
        assert_eq!(
            average_ranks(&[10.0, 20.0, 20.0, 5.0]),
            [2.0, 3.5, 3.5, 1.0]
        );
    }

    #[test]
    fn spearman_extremes() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(
            spearman(&xs, &[2.0, 4.0, 8.0, 16.0, 32.0]).unwrap().rho,
            1.0
        );
        assert_eq!(spearman(&xs, &[5.0, 4.0, 3.0, 2.0, 1.0]).unwrap().rho, -1.0);
    }

    #[test]
    fn spearman_errors() {
        assert!(matches!(
            spearman(&[1.0, 2.0], &[1.0, 2.0]),
            Err(Error::TooFewPairs(2))
        ));
        assert!(matches!(
            spearman(&[1.0, 2.0, 3.0], &[1.0, 2.0]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(Error::ZeroVariance)
        ));
    }

    #[test]
    fn spearman_with_ties_matches_pearson_on_ranks() {
        // Pearson on average ranks computed by hand: x ranks [1,2.5,2.5,4],
        // y ranks [1,2,3,4] → rho = 4.5 / sqrt(4.5 * 5).
        let r = spearman(&[1.0, 2.0, 2.0, 3.0], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((r.rho - 4.5 / (4.5f64 * 5.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn gap_examples() {
        let members = BTreeMap::new();
        let a = wv(&["b0", "b1"], &[1.0, 2.0]);
        assert!(gap_report(&a, &a, &members).unwrap().is_empty());

        let d = wv(&["b0", "b1"], &[3.0, 0.0]);
        let r = wv(&["b0", "b1"], &[1.0, 2.0]);
        let members = BTreeMap::from([(
            "b1".to_string(),
            vec![
                iso("zul"),
                iso("apu"),
                iso("kal"),
                iso("ckt"),
                iso("crk"),
                iso("gyd"),
            ],
        )]);
        let g = gap_report(&d, &r, &members).unwrap();
        assert_eq!(
            g.surplus_bins,
            [SurplusBin {
                bin: "b0".into(),
                excess: 2.0
            }]
        );
        assert_eq!(g.deficit_bins.len(), 1);
        assert_eq!(g.deficit_bins[0].shortfall, 2.0);
        assert_eq!(
            g.deficit_bins[0].examples,
            [iso("apu"), iso("ckt"), iso("crk"), iso("gyd"), iso("kal")]
        );
        let e = wv(&["b0", "b2"], &[1.0, 2.0]);
        assert!(gap_report(&d, &e, &members).is_err());
    }

    #[test]
    fn overlap_examples() {
        let a = wv(&["b2", "b3", "b4"], &[1.0, 2.0, 0.0]);
        let b = wv(&["b2", "b3", "b4"], &[0.0, 1.5, 1.5]);
        let rows = overlap_series(&a, &b).unwrap();
        let mins: Vec<f64> = rows.iter().map(|r| r.min).collect();
        let maxs: Vec<f64> = rows.iter().map(|r| r.max).collect();
        assert_eq!(mins, [0.0, 1.5, 0.0]);
        assert_eq!(maxs, [1.0, 2.0, 1.5]);

        let same = overlap_series(&a, &a).unwrap();
        assert!(same.iter().all(|r| r.min == r.max && r.max == r.dataset));
    }

    #[test]
    fn format_parsing() {
        assert_eq!("svg".parse::<ReportFormat>().unwrap(), ReportFormat::Svg);
        assert!(matches!(
            "xml".parse::<ReportFormat>(),
            Err(Error::UnsupportedFormat(_))
        ));
    }

    #[test]
    fn csv_header_is_fixed() {
        let r = diversity::jmm_score(&[2.5, 3.5, 3.7], &[3.2, 4.1], 1.0).unwrap();
        let out = String::from_utf8(serialize_report(&r, ReportFormat::Csv).unwrap()).unwrap();
        assert_eq!(out.lines().next().unwrap(), "bin,dataset,reference,min,max");
        assert_eq!(out.lines().count(), 4);
    }

    #[test]
    fn json_round_trip() {
        let mut r = diversity::jmm_score(&[2.5, 3.5, 3.7, 0.1], &[3.2, 4.1], 0.3).unwrap();
        r.gap = Some(GapReport {
            surplus_bins: vec![],
            deficit_bins: vec![DeficitBin {
                bin: "[3,4)".into(),
                shortfall: 0.1,
                examples: vec![iso("eng")],
            }],
        });
        let bytes = serialize_report(&r, ReportFormat::Json).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(v["schema_version"], SCHEMA_VERSION);
        assert_eq!(parse_report_json(&bytes).unwrap(), r);
    }

    #[test]
    fn ti_report_json_has_no_bins() {
        let r = DiversityReport::new(ScoreName::TiSyn, 0.5).unwrap();
        let bytes = serialize_report(&r, ReportFormat::Json).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        assert!(v.get("per_bin").is_none());
        assert_eq!(v["score_name"], "ti_syn");
    }
}
