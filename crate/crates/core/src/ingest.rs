//! Reading patient event records from CSV and shaping them into the two
//! representations the metrics work on: per-patient labeled trees and a
//! dataset-wide frequency table.
//!
//! Input format: a header row `patient_id,sex,age,event_code` followed by one
//! row per recorded event. A patient may appear on many rows (one per event);
//! sex must be consistent across a patient's rows. Event codes are truncated
//! to their first three characters before any counting.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Read;

use crate::error::{Error, Result};
use crate::pqgram::DUMMY_LABEL;
use crate::tree::LabeledTree;
use crate::vector::FeatureVector;

pub const EXPECTED_HEADER: [&str; 4] = ["patient_id", "sex", "age", "event_code"];

/// Root label of every patient tree.
pub const ROOT_LABEL: &str = "patient";

/// Patient sex, coded 1 (male) / 2 (female) as in the input data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sex {
    Male = 1,
    Female = 2,
}

impl Sex {
    pub fn code(self) -> u32 {
        self as u32
    }

    pub fn parse(s: &str) -> Option<Sex> {
        match s {
            "1" => Some(Sex::Male),
            "2" => Some(Sex::Female),
            _ => None,
        }
    }
}

impl fmt::Display for Sex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

/// One validated input row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventRecord {
    pub patient_id: String,
    pub sex: Sex,
    pub age: u32,
    /// Raw event code as given, before truncation.
    pub event_code: String,
}

/// All data for one patient, aggregated over their event rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Patient {
    pub id: String,
    pub sex: Sex,
    /// Distinct ages at which events were recorded.
    pub ages: BTreeSet<u32>,
    /// Truncated event code -> occurrence count.
    pub events: BTreeMap<String, u32>,
}

/// Patients sorted by id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatientDataset {
    patients: Vec<Patient>,
}

impl PatientDataset {
    pub fn new(mut patients: Vec<Patient>) -> Result<Self> {
        patients.sort_by(|a, b| a.id.cmp(&b.id));
        for pair in patients.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(Error::Format(format!(
                    "duplicate patient id {:?}",
                    pair[0].id
                )));
            }
        }
        Ok(PatientDataset { patients })
    }

    pub fn patients(&self) -> &[Patient] {
        &self.patients
    }

    pub fn ids(&self) -> Vec<String> {
        self.patients.iter().map(|p| p.id.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.patients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patients.is_empty()
    }
}

/// Counters describing one load.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IngestSummary {
    /// Data rows encountered (valid or not; the header is not counted).
    pub rows_read: u64,
    /// Rows dropped in lenient mode.
    pub rows_skipped: u64,
}

/// Truncates an event code to its first three characters.
pub fn truncate_code(code: &str) -> &str {
    match code.char_indices().nth(3) {
        Some((i, _)) => &code[..i],
        None => code,
    }
}

fn validate_code(truncated: &str) -> std::result::Result<(), String> {
    if truncated.is_empty() {
        return Err("event code is empty".to_string());
    }
    if truncated == DUMMY_LABEL {
        return Err(format!("event code {DUMMY_LABEL:?} is reserved"));
    }
    if truncated.contains(['{', '}', '\n', '\r']) {
        return Err(format!("event code {truncated:?} contains {{, }} or a line break"));
    }
    Ok(())
}

fn parse_row(record: &csv::StringRecord, line: u64) -> Result<EventRecord> {
    let field = |idx: usize, name: &str| -> Result<&str> {
        record
            .get(idx)
            .map(str::trim)
            .ok_or_else(|| Error::Row {
                line,
                message: format!("missing field {name}"),
            })
    };
    let patient_id = field(0, "patient_id")?;
    if patient_id.is_empty() {
        return Err(Error::Row {
            line,
            message: "patient_id is empty".to_string(),
        });
    }
    let sex_text = field(1, "sex")?;
    let sex = Sex::parse(sex_text).ok_or_else(|| Error::Row {
        line,
        message: format!("sex must be 1 or 2, got {sex_text:?}"),
    })?;
    let age_text = field(2, "age")?;
    let age: u32 = age_text.parse().map_err(|_| Error::Row {
        line,
        message: format!("age must be a non-negative integer, got {age_text:?}"),
    })?;
    let event_code = field(3, "event_code")?;
    validate_code(truncate_code(event_code)).map_err(|message| Error::Row { line, message })?;
    Ok(EventRecord {
        patient_id: patient_id.to_string(),
        sex,
        age,
        event_code: event_code.to_string(),
    })
}

/// Reads event rows and aggregates them into a dataset.
///
/// In strict mode the first bad row aborts the load; in lenient mode bad rows
/// are skipped and counted in the summary. A sex value that contradicts a
/// patient's earlier rows counts as a bad row.
pub fn load_records<R: Read>(reader: R, strict: bool) -> Result<(PatientDataset, IngestSummary)> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(reader);
    let headers = rdr.headers()?.clone();
    let names: Vec<&str> = headers.iter().map(str::trim).collect();
    if names != EXPECTED_HEADER {
        return Err(Error::Format(format!(
            "expected header {:?}, got {:?}",
            EXPECTED_HEADER.join(","),
            names.join(",")
        )));
    }

    let mut summary = IngestSummary::default();
    let mut patients: BTreeMap<String, Patient> = BTreeMap::new();
    for result in rdr.records() {
        summary.rows_read += 1;
        let outcome = result.map_err(Error::from).and_then(|record| {
            let line = record.position().map_or(0, |p| p.line());
            let row = parse_row(&record, line)?;
            apply_row(&mut patients, row, line)
        });
        match outcome {
            Ok(()) => {}
            Err(err) if strict => return Err(err),
            Err(_) => summary.rows_skipped += 1,
        }
    }

    let dataset = PatientDataset::new(patients.into_values().collect())?;
    Ok((dataset, summary))
}

fn apply_row(patients: &mut BTreeMap<String, Patient>, row: EventRecord, line: u64) -> Result<()> {
    let code = truncate_code(&row.event_code).to_string();
    match patients.get_mut(&row.patient_id) {
        Some(patient) => {
            if patient.sex != row.sex {
                return Err(Error::Row {
                    line,
                    message: format!(
                        "sex {} for patient {:?} contradicts earlier rows ({})",
                        row.sex, row.patient_id, patient.sex
                    ),
                });
            }
            patient.ages.insert(row.age);
            *patient.events.entry(code).or_insert(0) += 1;
        }
        None => {
            patients.insert(
                row.patient_id.clone(),
                Patient {
                    id: row.patient_id,
                    sex: row.sex,
                    ages: BTreeSet::from([row.age]),
                    events: BTreeMap::from([(code, 1)]),
                },
            );
        }
    }
    Ok(())
}

/// Builds the depth-2 tree for one patient:
/// `{patient{sex:S}{age:A}...{code}...}` with ages ascending and event-code
/// leaves in sorted order, one leaf per occurrence.
pub fn build_tree(patient: &Patient) -> LabeledTree {
    let mut children = Vec::with_capacity(1 + patient.ages.len() + patient.events.len());
    children.push(LabeledTree::new_unchecked(
        format!("sex:{}", patient.sex),
        Vec::new(),
    ));
    for age in &patient.ages {
        children.push(LabeledTree::new_unchecked(format!("age:{age}"), Vec::new()));
    }
    for (code, &count) in &patient.events {
        let leaf = LabeledTree::new(code.clone(), Vec::new())
            .expect("event codes are validated at ingest");
        for _ in 0..count {
            children.push(leaf.clone());
        }
    }
    LabeledTree::new_unchecked(ROOT_LABEL, children)
}

/// Column schema and per-patient rows of the frequency table.
///
/// Columns, in order: one count column per distinct truncated event code
/// (sorted), one 0/1 indicator per distinct age (ascending), then sex coded
/// 1/2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrequencyTable {
    pub event_codes: Vec<String>,
    pub ages: Vec<u32>,
    pub patient_ids: Vec<String>,
    pub rows: Vec<FeatureVector>,
}

impl FrequencyTable {
    pub fn columns(&self) -> usize {
        self.event_codes.len() + self.ages.len() + 1
    }
}

pub fn build_frequency_table(dataset: &PatientDataset) -> Result<FrequencyTable> {
    if dataset.is_empty() {
        return Err(Error::Format(
            "cannot build a frequency table from an empty dataset".to_string(),
        ));
    }
    let mut codes: BTreeSet<&str> = BTreeSet::new();
    let mut ages: BTreeSet<u32> = BTreeSet::new();
    for patient in dataset.patients() {
        codes.extend(patient.events.keys().map(String::as_str));
        ages.extend(patient.ages.iter().copied());
    }
    let event_codes: Vec<String> = codes.iter().map(|c| c.to_string()).collect();
    let ages: Vec<u32> = ages.into_iter().collect();

    let mut rows = Vec::with_capacity(dataset.len());
    for patient in dataset.patients() {
        let mut row = Vec::with_capacity(event_codes.len() + ages.len() + 1);
        for code in &event_codes {
            row.push(patient.events.get(code).copied().unwrap_or(0));
        }
        for age in &ages {
            row.push(u32::from(patient.ages.contains(age)));
        }
        row.push(patient.sex.code());
        rows.push(FeatureVector::new(row)?);
    }
    Ok(FrequencyTable {
        event_codes,
        ages,
        patient_ids: dataset.ids(),
        rows,
    })
}
