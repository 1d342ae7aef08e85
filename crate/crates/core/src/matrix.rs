//! All-pairs distance matrices: computation for any of the six metrics,
//! normalization, CSV persistence, smallest-pair extraction, and the
//! cross-metric comparison report.

use std::io::{Read, Write};

use rayon::prelude::*;

use crate::edit::ted;
use crate::error::{Error, Result};
use crate::ingest::{build_frequency_table, build_tree, PatientDataset};
use crate::pqgram::{pqgram_profile, profile_distances, PQGramProfile, PQParams};
use crate::tree::LabeledTree;
use crate::vector::{euclidean, hamming, manhattan, minkowski, FeatureVector};

/// One of the six distance metrics with its parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MetricSpec {
    Euclidean,
    Minkowski { p: f64 },
    Manhattan,
    Hamming,
    EditDistance,
    PqGram { p: usize, q: usize },
}

/// Formats a float without a trailing `.0` when it is integral.
fn fmt_num(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

impl MetricSpec {
    /// Validates metric parameters.
    pub fn validate(&self) -> Result<()> {
        match *self {
            MetricSpec::Minkowski { p } => {
                if p < 1.0 || !p.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "minkowski order must be a finite number >= 1, got {p}"
                    )));
                }
            }
            MetricSpec::PqGram { p, q } => {
                PQParams::new(p, q)?;
            }
            _ => {}
        }
        Ok(())
    }

    /// Stable machine-friendly name, used in file names and CSV headers.
    pub fn tag(&self) -> String {
        match *self {
            MetricSpec::Euclidean => "euclidean".to_string(),
            MetricSpec::Minkowski { p } => format!("minkowski_p{}", fmt_num(p)),
            MetricSpec::Manhattan => "manhattan".to_string(),
            MetricSpec::Hamming => "hamming".to_string(),
            MetricSpec::EditDistance => "ted".to_string(),
            MetricSpec::PqGram { p, q } => format!("pqgram_p{p}_q{q}"),
        }
    }

    /// Human-readable name for summaries.
    pub fn label(&self) -> String {
        match *self {
            MetricSpec::Euclidean => "Euclidean".to_string(),
            MetricSpec::Minkowski { p } => format!("Minkowski (p={})", fmt_num(p)),
            MetricSpec::Manhattan => "Manhattan".to_string(),
            MetricSpec::Hamming => "Hamming".to_string(),
            MetricSpec::EditDistance => "Edit Distance".to_string(),
            MetricSpec::PqGram { p, q } => format!("{p},{q}-grams"),
        }
    }

    /// Whether the metric defines its own per-pair normalization.
    pub fn has_native_norm(&self) -> bool {
        matches!(
            self,
            MetricSpec::EditDistance | MetricSpec::PqGram { .. }
        )
    }
}

/// How a raw matrix is turned into a normalized one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormalizeMode {
    /// Per-pair normalization for tree metrics; min-max for vector metrics
    /// (which define none of their own).
    Native,
    /// Min-max over the off-diagonal for every metric.
    MinMax,
}

/// A symmetric matrix of pairwise distances with zero diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    ids: Vec<String>,
    values: Vec<f64>, // row-major n×n
    metric: String,
    normalized: bool,
}

impl DistanceMatrix {
    /// Builds a matrix from the strict upper triangle in `(i, j)` order with
    /// `i < j` (row by row). Validates the distance-matrix invariants.
    pub fn from_offdiag(
        ids: Vec<String>,
        offdiag: &[f64],
        metric: impl Into<String>,
        normalized: bool,
    ) -> Result<Self> {
        let n = ids.len();
        if n == 0 {
            return Err(Error::Format("distance matrix must not be empty".to_string()));
        }
        {
            let mut sorted: Vec<&String> = ids.iter().collect();
            sorted.sort();
            sorted.dedup();
            if sorted.len() != n {
                return Err(Error::Format("duplicate id in distance matrix".to_string()));
            }
        }
        if offdiag.len() != n * (n - 1) / 2 {
            return Err(Error::Format(format!(
                "expected {} off-diagonal entries for {} ids, got {}",
                n * (n - 1) / 2,
                n,
                offdiag.len()
            )));
        }
        let mut values = vec![0.0; n * n];
        let mut next = offdiag.iter();
        for i in 0..n {
            for j in (i + 1)..n {
                let d = *next.next().expect("length checked");
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::Format(format!(
                        "distance between {:?} and {:?} is not a non-negative finite number: {d}",
                        ids[i], ids[j]
                    )));
                }
                if normalized && d > 1.0 {
                    return Err(Error::Format(format!(
                        "normalized distance between {:?} and {:?} exceeds 1: {d}",
                        ids[i], ids[j]
                    )));
                }
                values[i * n + j] = d;
                values[j * n + i] = d;
            }
        }
        Ok(DistanceMatrix {
            ids,
            values,
            metric: metric.into(),
            normalized,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn metric(&self) -> &str {
        &self.metric
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.len() + j]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    /// Strict-upper-triangle entries in `(i, j)`, `i < j` order.
    pub fn off_diagonal(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.len();
        (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| self.get(i, j)))
    }

    /// Writes `id,<id1>,...` then one row per id, floats at 6 decimals.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["id".to_string()];
        header.extend(self.ids.iter().cloned());
        w.write_record(&header)?;
        for i in 0..self.len() {
            let mut row = vec![self.ids[i].clone()];
            row.extend((0..self.len()).map(|j| format!("{:.6}", self.get(i, j))));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a matrix in `write_csv`'s layout. The normalized flag is
    /// inferred from the value range.
    pub fn read_csv<R: Read>(reader: R, metric: impl Into<String>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(reader);
        let mut records = rdr.records();
        let header = records
            .next()
            .transpose()?
            .ok_or_else(|| Error::Format("matrix CSV is empty".to_string()))?;
        if header.get(0) != Some("id") {
            return Err(Error::Format(
                "matrix CSV must start with an `id` header column".to_string(),
            ));
        }
        let ids: Vec<String> = header.iter().skip(1).map(|s| s.to_string()).collect();
        let n = ids.len();
        if n == 0 {
            return Err(Error::Format("matrix CSV has no ids".to_string()));
        }

        let mut values = vec![0.0f64; n * n];
        let mut row_count = 0usize;
        for (i, record) in records.enumerate() {
            let record = record?;
            if i >= n {
                return Err(Error::Format(format!(
                    "matrix CSV has more than {n} data rows"
                )));
            }
            if record.get(0) != Some(ids[i].as_str()) {
                return Err(Error::Format(format!(
                    "row {} is labeled {:?}, expected {:?}",
                    i + 2,
                    record.get(0).unwrap_or(""),
                    ids[i]
                )));
            }
            if record.len() != n + 1 {
                return Err(Error::Format(format!(
                    "row {} has {} fields, expected {}",
                    i + 2,
                    record.len(),
                    n + 1
                )));
            }
            for j in 0..n {
                let text = record.get(j + 1).unwrap();
                let d: f64 = text.parse().map_err(|_| {
                    Error::Format(format!("bad number {text:?} at row {}, column {}", i + 2, j + 2))
                })?;
                values[i * n + j] = d;
            }
            row_count += 1;
        }
        if row_count != n {
            return Err(Error::Format(format!(
                "matrix CSV has {row_count} data rows, expected {n}"
            )));
        }

        let mut max = 0.0f64;
        for i in 0..n {
            let diag = values[i * n + i];
            if diag.abs() > 1e-9 {
                return Err(Error::Format(format!(
                    "diagonal entry for {:?} is {diag}, expected 0",
                    ids[i]
                )));
            }
            values[i * n + i] = 0.0;
            for j in (i + 1)..n {
                let (a, b) = (values[i * n + j], values[j * n + i]);
                if !a.is_finite() || a < 0.0 {
                    return Err(Error::Format(format!(
                        "distance between {:?} and {:?} is not a non-negative finite number: {a}",
                        ids[i], ids[j]
                    )));
                }
                if (a - b).abs() > 1e-9 {
                    return Err(Error::Format(format!(
                        "matrix is not symmetric at ({:?}, {:?}): {a} vs {b}",
                        ids[i], ids[j]
                    )));
                }
                values[j * n + i] = a;
                max = max.max(a);
            }
        }
        Ok(DistanceMatrix {
            ids,
            values,
            metric: metric.into(),
            normalized: max <= 1.0,
        })
    }
}

/// What the pairwise kernel reads, precomputed once per dataset.
enum Prepared {
    Rows(Vec<FeatureVector>),
    /// Trees with their node counts (for edit-distance normalization).
    Trees(Vec<(LabeledTree, usize)>),
    Profiles(Vec<PQGramProfile>),
}

fn prepare(dataset: &PatientDataset, metric: &MetricSpec) -> Result<Prepared> {
    match metric {
        MetricSpec::Euclidean
        | MetricSpec::Minkowski { .. }
        | MetricSpec::Manhattan
        | MetricSpec::Hamming => Ok(Prepared::Rows(build_frequency_table(dataset)?.rows)),
        MetricSpec::EditDistance => Ok(Prepared::Trees(
            dataset
                .patients()
                .iter()
                .map(|p| {
                    let tree = build_tree(p);
                    let size = tree.size();
                    (tree, size)
                })
                .collect(),
        )),
        MetricSpec::PqGram { p, q } => {
            let params = PQParams::new(*p, *q)?;
            dataset
                .patients()
                .iter()
                .map(|patient| pqgram_profile(&build_tree(patient), params))
                .collect::<Result<Vec<_>>>()
                .map(Prepared::Profiles)
        }
    }
}

/// Raw distance plus the metric's own normalized value, when it has one.
fn pair_value(
    prepared: &Prepared,
    metric: &MetricSpec,
    i: usize,
    j: usize,
) -> Result<(f64, Option<f64>)> {
    match (prepared, metric) {
        (Prepared::Rows(rows), MetricSpec::Euclidean) => {
            Ok((euclidean(&rows[i], &rows[j])?, None))
        }
        (Prepared::Rows(rows), MetricSpec::Minkowski { p }) => {
            Ok((minkowski(&rows[i], &rows[j], *p)?, None))
        }
        (Prepared::Rows(rows), MetricSpec::Manhattan) => {
            Ok((manhattan(&rows[i], &rows[j])?, None))
        }
        (Prepared::Rows(rows), MetricSpec::Hamming) => {
            Ok((hamming(rows[i].values(), rows[j].values())? as f64, None))
        }
        (Prepared::Trees(trees), MetricSpec::EditDistance) => {
            let raw = ted(&trees[i].0, &trees[j].0);
            let norm = raw as f64 / (trees[i].1 + trees[j].1) as f64;
            Ok((raw as f64, Some(norm)))
        }
        (Prepared::Profiles(profiles), MetricSpec::PqGram { .. }) => {
            let (raw, norm) = profile_distances(&profiles[i], &profiles[j]);
            Ok((raw as f64, Some(norm)))
        }
        _ => unreachable!("prepared representation always matches the metric"),
    }
}

fn pairwise(
    dataset: &PatientDataset,
    metric: &MetricSpec,
) -> Result<(DistanceMatrix, Option<DistanceMatrix>)> {
    metric.validate()?;
    let n = dataset.len();
    if n < 2 {
        return Err(Error::Format(format!(
            "need at least 2 patients to compute pairwise distances, got {n}"
        )));
    }
    let prepared = prepare(dataset, metric)?;
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    // Each pair is pure; parallel order cannot affect the collected values.
    let computed: Vec<(f64, Option<f64>)> = pairs
        .par_iter()
        .map(|&(i, j)| pair_value(&prepared, metric, i, j))
        .collect::<Result<_>>()?;

    let raw_values: Vec<f64> = computed.iter().map(|(raw, _)| *raw).collect();
    let raw = DistanceMatrix::from_offdiag(dataset.ids(), &raw_values, metric.tag(), false)?;
    let native = if metric.has_native_norm() {
        let norm_values: Vec<f64> = computed
            .iter()
            .map(|(_, norm)| norm.expect("tree metrics always produce a normalized value"))
            .collect();
        Some(DistanceMatrix::from_offdiag(
            dataset.ids(),
            &norm_values,
            metric.tag(),
            true,
        )?)
    } else {
        None
    };
    Ok((raw, native))
}

/// Raw all-pairs distances under one metric.
pub fn pairwise_distances(dataset: &PatientDataset, metric: &MetricSpec) -> Result<DistanceMatrix> {
    pairwise(dataset, metric).map(|(raw, _)| raw)
}

/// A raw matrix together with its normalized counterpart.
#[derive(Clone, Debug)]
pub struct PairwiseRun {
    pub raw: DistanceMatrix,
    pub normalized: DistanceMatrix,
}

/// Computes raw distances and normalizes them per `mode`.
pub fn compute_pairwise(
    dataset: &PatientDataset,
    metric: &MetricSpec,
    mode: NormalizeMode,
) -> Result<PairwiseRun> {
    let (raw, native) = pairwise(dataset, metric)?;
    let normalized = match (mode, native) {
        (NormalizeMode::Native, Some(native)) => native,
        _ => minmax_normalize(&raw),
    };
    Ok(PairwiseRun { raw, normalized })
}

/// Min-max normalization over the off-diagonal entries:
/// `x -> (x - min) / (max - min)`, or all zeros when `max == min`.
/// Matrices already flagged normalized pass through unchanged.
pub fn minmax_normalize(matrix: &DistanceMatrix) -> DistanceMatrix {
    if matrix.normalized {
        return matrix.clone();
    }
    let n = matrix.len();
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    for d in matrix.off_diagonal() {
        min = min.min(d);
        max = max.max(d);
    }
    let mut values = vec![0.0; n * n];
    if min < max {
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    values[i * n + j] = (matrix.get(i, j) - min) / (max - min);
                }
            }
        }
    }
    DistanceMatrix {
        ids: matrix.ids.clone(),
        values,
        metric: matrix.metric.clone(),
        normalized: true,
    }
}

/// One reported pair: ids plus their distance.
#[derive(Clone, Debug, PartialEq)]
pub struct PairDistance {
    pub a: String,
    pub b: String,
    pub distance: f64,
}

/// Off-diagonal pairs sorted ascending by distance, ties broken by the id
/// pair; at most `limit` entries.
pub fn smallest_pairs(matrix: &DistanceMatrix, limit: usize) -> Vec<PairDistance> {
    let n = matrix.len();
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (&matrix.ids[i], &matrix.ids[j]);
            let (a, b) = if a <= b { (a, b) } else { (b, a) };
            pairs.push(PairDistance {
                a: a.clone(),
                b: b.clone(),
                distance: matrix.get(i, j),
            });
        }
    }
    pairs.sort_by(|x, y| {
        x.distance
            .total_cmp(&y.distance)
            .then_with(|| x.a.cmp(&y.a))
            .then_with(|| x.b.cmp(&y.b))
    });
    pairs.truncate(limit);
    pairs
}

/// One row of the cross-metric table: a pair and its distance under every
/// reported metric, in the matrices' order.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossMetricRow {
    pub a: String,
    pub b: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrossMetricReport {
    /// Metric tags, one per value column.
    pub columns: Vec<String>,
    pub rows: Vec<CrossMetricRow>,
}

impl CrossMetricReport {
    /// Writes `patient_a,patient_b,<tag>,...` rows, floats at 6 decimals.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["patient_a".to_string(), "patient_b".to_string()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header)?;
        for row in &self.rows {
            let mut record = vec![row.a.clone(), row.b.clone()];
            record.extend(row.values.iter().map(|v| format!("{v:.6}")));
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Looks up each listed pair in every matrix. All matrices must share the
/// same id ordering.
pub fn cross_metric_report(
    matrices: &[&DistanceMatrix],
    pairs: &[(String, String)],
) -> Result<CrossMetricReport> {
    let first = matrices
        .first()
        .ok_or_else(|| Error::Format("cross-metric report needs at least one matrix".to_string()))?;
    for m in matrices {
        if m.ids() != first.ids() {
            return Err(Error::Format(
                "cross-metric matrices do not share one id ordering".to_string(),
            ));
        }
    }
    let mut rows = Vec::with_capacity(pairs.len());
    for (a, b) in pairs {
        let i = first
            .index_of(a)
            .ok_or_else(|| Error::UnknownId(a.clone()))?;
        let j = first
            .index_of(b)
            .ok_or_else(|| Error::UnknownId(b.clone()))?;
        rows.push(CrossMetricRow {
            a: a.clone(),
            b: b.clone(),
            values: matrices.iter().map(|m| m.get(i, j)).collect(),
        });
    }
    Ok(CrossMetricReport {
        columns: matrices.iter().map(|m| m.metric.clone()).collect(),
        rows,
    })
}
