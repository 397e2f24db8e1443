//! Diversity scores: binning, size normalization, minmax Jaccard and the
//! entropy-based typology indices.
//!
//! A data set and a reference are each reduced to a vector of weights
//! (languages per bin, or languages per feature value). The smaller set's
//! weights are multiplied by `max(|A|,|B|) / min(|A|,|B|)` so that both
//! describe the same number of languages, and the score is
//! `Σ min(a_j, b_j) / Σ max(a_j, b_j)` over the aligned dimensions.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::error::{Error, Result};
use crate::model::{
    bin_index, BinRow, BinnedDistribution, DiversityReport, FeatureMatrix, MatrixKind, ScoreName,
};

/// Left edge of bin 0 for every binned measurement.
pub const ANCHOR: f64 = 0.0;

/// Labelled non-negative weights, one per dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    labels: Vec<String>,
    weights: Vec<f64>,
}

impl WeightVector {
    pub fn new(labels: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        if labels.len() != weights.len() {
            return Err(Error::LengthMismatch {
                left: labels.len(),
                right: weights.len(),
            });
        }
        let mut seen = HashSet::new();
        if let Some(dup) = labels.iter().find(|l| !seen.insert(l.as_str())) {
            return Err(Error::Invariant(format!("duplicate label {dup:?}")));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Invariant("weights must be finite and >= 0".into()));
        }
        if !weights.iter().any(|w| *w > 0.0) {
            return Err(Error::Invariant(
                "weight vector has no positive weight".into(),
            ));
        }
        Ok(WeightVector { labels, weights })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.labels
            .iter()
            .map(String::as_str)
            .zip(self.weights.iter().copied())
    }

    /// Every weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> WeightVector {
        WeightVector {
            labels: self.labels.clone(),
            weights: self.weights.iter().map(|w| w * factor).collect(),
        }
    }
}

fn check_width(width: f64) -> Result<()> {
    if width.is_finite() && width > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidWidth(width))
    }
}

/// Counts measurements per bin `floor(v / width)`.
pub fn bin_measurements(values: &[f64], width: f64) -> Result<BinnedDistribution> {
    check_width(width)?;
    if values.is_empty() {
        return Err(Error::EmptyInput("measurements"));
    }
    let mut weights = BTreeMap::new();
    for &v in values {
        if !v.is_finite() {
            return Err(Error::NonFinite(v));
        }
        *weights.entry(bin_index(v, width, ANCHOR)).or_insert(0.0) += 1.0;
    }
    BinnedDistribution::new(width, ANCHOR, weights)
}

/// Size-normalization factor applied to the smaller of two sets.
pub fn normalization_scalar(size_a: usize, size_b: usize) -> Result<f64> {
    if size_a == 0 || size_b == 0 {
        return Err(Error::ZeroSize);
    }
    Ok(size_a.max(size_b) as f64 / size_a.min(size_b) as f64)
}

/// Expresses two distributions over the union of their occupied bins,
/// zero-filling bins a side does not occupy.
pub fn align_bins(
    a: &BinnedDistribution,
    b: &BinnedDistribution,
) -> Result<(WeightVector, WeightVector)> {
    if a.bin_width() != b.bin_width() || a.anchor() != b.anchor() {
        return Err(Error::BinMismatch {
            left_width: a.bin_width(),
            left_anchor: a.anchor(),
            right_width: b.bin_width(),
            right_anchor: b.anchor(),
        });
    }
    let bins: BTreeSet<i64> = a
        .weights()
        .iter()
        .chain(b.weights())
        .filter(|(_, w)| **w > 0.0)
        .map(|(k, _)| *k)
        .collect();
    let labels: Vec<String> = bins.iter().map(|k| a.label(*k)).collect();
    let wa = bins.iter().map(|k| a.weight(*k)).collect();
    let wb = bins.iter().map(|k| b.weight(*k)).collect();
    Ok((
        WeightVector::new(labels.clone(), wa)?,
        WeightVector::new(labels, wb)?,
    ))
}

/// `Σ min(a_j, b_j) / Σ max(a_j, b_j)` over identically labelled vectors.
pub fn jaccard_minmax(a: &WeightVector, b: &WeightVector) -> Result<f64> {
    if a.labels != b.labels {
        return Err(Error::LabelMismatch);
    }
    let (num, den) = a
        .weights
        .iter()
        .zip(&b.weights)
        .fold((0.0, 0.0), |(num, den), (x, y)| {
            (num + x.min(*y), den + x.max(*y))
        });
    if den == 0.0 {
        return Err(Error::AllZero);
    }
    Ok(num / den)
}

/// Two aligned, size-normalized weight vectors and their minmax Jaccard.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub dataset: WeightVector,
    pub reference: WeightVector,
    pub normalization_c: f64,
    pub value: f64,
}

impl Comparison {
    /// Aligns nothing; scales the smaller side (by language count) and
    /// scores. Equal sizes leave both sides untouched.
    pub fn new(
        dataset: WeightVector,
        reference: WeightVector,
        dataset_size: usize,
        reference_size: usize,
    ) -> Result<Self> {
        let c = normalization_scalar(dataset_size, reference_size)?;
        let (dataset, reference) = match dataset_size.cmp(&reference_size) {
            std::cmp::Ordering::Less => (dataset.scaled(c), reference),
            std::cmp::Ordering::Greater => (dataset, reference.scaled(c)),
            std::cmp::Ordering::Equal => (dataset, reference),
        };
        let value = jaccard_minmax(&dataset, &reference)?;
        Ok(Comparison {
            dataset,
            reference,
            normalization_c: c,
            value,
        })
    }

    /// Per-dimension rows; their Σmin / Σmax is exactly `value`.
    pub fn rows(&self) -> Vec<BinRow> {
        self.dataset
            .iter()
            .zip(self.reference.weights())
            .map(|((label, d), &r)| BinRow {
                bin: label.to_owned(),
                reference: r,
                dataset: d,
                min: d.min(r),
                max: d.max(r),
            })
            .collect()
    }

    pub fn into_report(self, name: ScoreName) -> Result<DiversityReport> {
        let rows = self.rows();
        Ok(DiversityReport::new(name, self.value)?
            .with_per_bin(rows)?
            .with_normalization(self.normalization_c))
    }
}

/// Bins both measurement lists, normalizes set sizes and aligns the bins.
pub fn compare_measurements(dataset: &[f64], reference: &[f64], width: f64) -> Result<Comparison> {
    let d = bin_measurements(dataset, width)?;
    let r = bin_measurements(reference, width)?;
    let (dv, rv) = align_bins(&d, &r)?;
    Comparison::new(dv, rv, dataset.len(), reference.len())
}

/// Minmax Jaccard between two lists of per-language measurements.
pub fn jmm_score(dataset: &[f64], reference: &[f64], width: f64) -> Result<DiversityReport> {
    compare_measurements(dataset, reference, width)?.into_report(ScoreName::JmmMorph)
}

/// How syntactic feature values become weight dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SynDims {
    /// One dimension per feature: languages with value 1.
    #[default]
    PerFeature,
    /// Two dimensions per feature: languages with value 0 and with value 1.
    PerValue,
}

fn require_binary(matrix: &FeatureMatrix) -> Result<()> {
    if matrix.kind() != MatrixKind::BinarySyntactic {
        return Err(Error::Invariant(
            "expected a binary syntactic matrix".into(),
        ));
    }
    Ok(())
}

/// Per-feature counts of observed values across the matrix's languages.
pub fn syntactic_weights(matrix: &FeatureMatrix, dims: SynDims) -> Result<WeightVector> {
    require_binary(matrix)?;
    let n = matrix.n_languages();
    let mut labels = Vec::new();
    let mut weights = Vec::new();
    for (j, feature) in matrix.features().iter().enumerate() {
        let ones = matrix.column(j).filter(|v| *v == 1).count();
        match dims {
            SynDims::PerFeature => {
                labels.push(feature.clone());
                weights.push(ones as f64);
            }
            SynDims::PerValue => {
                labels.push(format!("{feature}=0"));
                weights.push((n - ones) as f64);
                labels.push(format!("{feature}=1"));
                weights.push(ones as f64);
            }
        }
    }
    WeightVector::new(labels, weights)
}

fn check_same_features(a: &FeatureMatrix, b: &FeatureMatrix) -> Result<()> {
    let (fa, fb) = (a.features(), b.features());
    if let Some((x, _)) = fa.iter().zip(fb).find(|(x, y)| x != y) {
        return Err(Error::FeatureMismatch { column: x.clone() });
    }
    if fa.len() != fb.len() {
        let longer = if fa.len() > fb.len() { fa } else { fb };
        return Err(Error::FeatureMismatch {
            column: longer[fa.len().min(fb.len())].clone(),
        });
    }
    Ok(())
}

pub fn compare_syntax(
    dataset: &FeatureMatrix,
    reference: &FeatureMatrix,
    dims: SynDims,
) -> Result<Comparison> {
    check_same_features(dataset, reference)?;
    Comparison::new(
        syntactic_weights(dataset, dims)?,
        syntactic_weights(reference, dims)?,
        dataset.n_languages(),
        reference.n_languages(),
    )
}

/// Minmax Jaccard over syntactic feature-value counts.
pub fn jmm_syn(
    dataset: &FeatureMatrix,
    reference: &FeatureMatrix,
    dims: SynDims,
) -> Result<DiversityReport> {
    compare_syntax(dataset, reference, dims)?.into_report(ScoreName::JmmSyn)
}

/// Entropy in bits of a two-outcome distribution.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Probability(p));
    }
    Ok(plogp(p) + plogp(1.0 - p))
}

fn plogp(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.log2()
    }
}

/// Binary entropy of `k` successes out of `n`, symmetric in `k ↔ n−k`.
fn count_entropy(k: usize, n: usize) -> f64 {
    let (lo, hi) = (k.min(n - k), k.max(n - k));
    plogp(lo as f64 / n as f64) + plogp(hi as f64 / n as f64)
}

/// Mean over features of the entropy of each feature's value distribution.
pub fn ti_syn(matrix: &FeatureMatrix) -> Result<f64> {
    require_binary(matrix)?;
    let n = matrix.n_languages();
    if n < 2 {
        return Err(Error::TooFewLanguages { needed: 2, got: n });
    }
    if matrix.n_features() == 0 {
        return Err(Error::EmptyInput("features"));
    }
    let total: f64 = (0..matrix.n_features())
        .map(|j| count_entropy(matrix.column(j).filter(|v| *v == 1).count(), n))
        .sum();
    Ok(total / matrix.n_features() as f64)
}

/// Typology index over binned measurements: every occupied bin is a binary
/// feature (in the bin or not), averaged over occupied bins.
pub fn ti_morph(values: &[f64], width: f64) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::TooFewLanguages {
            needed: 2,
            got: values.len(),
        });
    }
    let bins = bin_measurements(values, width)?;
    let n = values.len();
    let occupied: Vec<usize> = bins.weights().values().map(|w| *w as usize).collect();
    let total: f64 = occupied.iter().map(|&k| count_entropy(k, n)).sum();
    Ok(total / occupied.len() as f64)
}

pub const OCCUPIED_BINS_NOTE: &str = "averaged over occupied bins only";

pub fn ti_morph_report(values: &[f64], width: f64) -> Result<DiversityReport> {
    Ok(
        DiversityReport::new(ScoreName::TiMorph, ti_morph(values, width)?)?
            .with_note(OCCUPIED_BINS_NOTE),
    )
}

pub fn ti_syn_report(matrix: &FeatureMatrix) -> Result<DiversityReport> {
    DiversityReport::new(ScoreName::TiSyn, ti_syn(matrix)?)
}
