//! CSV ingestion and per-patient aggregation, plus the matching writers.
//!
//! Transaction files carry one `(patient_id, disease)` observation per row;
//! demographics files carry one `(patient_id, age, sex)` row per patient.
//! Malformed rows are recorded and skipped, never fatal: clinical extracts
//! are dirty and the report keeps every skip visible.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::model::{
    Demographics, DiseaseName, PatientId, PatientRecord, Sex, TransactionTable, MAX_AGE,
};

pub const TRANSACTIONS_HEADER: [&str; 2] = ["patient_id", "disease"];
pub const DEMOGRAPHICS_HEADER: [&str; 3] = ["patient_id", "age", "sex"];

/// Tally of a transaction-file parse.
///
/// `rows_read` always equals accepted rows + `duplicate_rows_dropped` +
/// `malformed_rows.len()`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub rows_read: u64,
    pub duplicate_rows_dropped: u64,
    pub patients: u64,
    pub distinct_diseases: u64,
    /// (line number, reason) for every skipped row.
    pub malformed_rows: Vec<(u64, String)>,
}

/// Tally of a demographics-file parse.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DemographicsReport {
    pub rows_read: u64,
    /// Rows that replaced an earlier row for the same patient.
    pub overridden_rows: u64,
    pub malformed_rows: Vec<(u64, String)>,
}

fn check_header(actual: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    let fields: Vec<&str> = actual.iter().map(str::trim).collect();
    if fields != expected {
        return Err(Error::format(format!(
            "expected header {:?}, got {:?}",
            expected.join(","),
            fields.join(",")
        )));
    }
    Ok(())
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

/// Parses the transaction CSV into a table of per-patient disease sets.
///
/// Duplicate `(patient, disease)` rows collapse into one set membership and
/// are tallied; row order never affects the result.
pub fn parse_transactions<R: Read>(reader: R) -> Result<(TransactionTable, IngestReport)> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    check_header(csv_reader.headers()?, &TRANSACTIONS_HEADER)?;

    let mut table = TransactionTable::new();
    let mut report = IngestReport::default();

    for record in csv_reader.records() {
        report.rows_read += 1;
        let record = match record {
            Ok(record) => record,
            Err(err) => {
                let line = err.position().map_or(0, |p| p.line());
                report.malformed_rows.push((line, err.to_string()));
                continue;
            }
        };
        let line = record_line(&record);
        let patient = match PatientId::new(&record[0]) {
            Ok(patient) => patient,
            Err(err) => {
                report.malformed_rows.push((line, err.to_string()));
                continue;
            }
        };
        let disease = match DiseaseName::new(&record[1]) {
            Ok(disease) => disease,
            Err(err) => {
                report.malformed_rows.push((line, err.to_string()));
                continue;
            }
        };
        if !table.insert(patient, disease) {
            report.duplicate_rows_dropped += 1;
        }
    }

    report.patients = table.total_patients();
    report.distinct_diseases = table.disease_universe().len() as u64;
    Ok((table, report))
}

/// Parses the demographics CSV. Later rows for the same patient override
/// earlier ones; each override is tallied.
pub fn parse_demographics<R: Read>(
    reader: R,
) -> Result<(BTreeMap<PatientId, Demographics>, DemographicsReport)> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    check_header(csv_reader.headers()?, &DEMOGRAPHICS_HEADER)?;

    let mut map = BTreeMap::new();
    let mut report = DemographicsReport::default();

    for record in csv_reader.records() {
        report.rows_read += 1;
        let record = match record {
            Ok(record) => record,
            Err(err) => {
                let line = err.position().map_or(0, |p| p.line());
                report.malformed_rows.push((line, err.to_string()));
                continue;
            }
        };
        let line = record_line(&record);
        match parse_demographics_row(&record) {
            Ok(demo) => {
                if map.insert(demo.patient.clone(), demo).is_some() {
                    report.overridden_rows += 1;
                }
            }
            Err(err) => report.malformed_rows.push((line, err.to_string())),
        }
    }

    Ok((map, report))
}

fn parse_demographics_row(record: &csv::StringRecord) -> Result<Demographics> {
    let patient = PatientId::new(&record[0])?;
    let age_field = record[1].trim();
    let age = if age_field.is_empty() {
        None
    } else {
        let age: u16 = age_field
            .parse()
            .map_err(|_| Error::format(format!("age {age_field:?} is not an integer")))?;
        if age > MAX_AGE {
            return Err(Error::format(format!("age {age} outside [0, {MAX_AGE}]")));
        }
        Some(age)
    };
    let sex_field = record[2].trim();
    let sex = if sex_field.is_empty() {
        None
    } else {
        Some(Sex::from_token(sex_field)?)
    };
    Demographics::new(patient, age, sex)
}

/// Aggregates the table into one record per patient, sorted by patient id,
/// with each disease list in canonical order.
pub fn count_diseases(table: &TransactionTable) -> Vec<PatientRecord> {
    table
        .entries()
        .iter()
        .map(|(patient, diseases)| PatientRecord {
            patient: patient.clone(),
            count: diseases.len() as u64,
            diseases: diseases.iter().cloned().collect(),
        })
        .collect()
}

/// Writes the transaction CSV, rows sorted by (patient, disease).
/// `parse_transactions` round-trips this output exactly.
pub fn write_transactions<W: Write>(table: &TransactionTable, writer: W) -> Result<()> {
    let mut csv_writer = csv::Writer::from_writer(writer);
    csv_writer.write_record(TRANSACTIONS_HEADER)?;
    for (patient, diseases) in table.entries() {
        for disease in diseases {
            csv_writer.write_record([patient.as_str(), disease.as_str()])?;
        }
    }
    csv_writer.flush()?;
    Ok(())
}

/// Writes the demographics CSV, one row per patient, sorted by patient id.
pub fn write_demographics<W: Write>(
    demographics: &BTreeMap<PatientId, Demographics>,
    writer: W,
) -> Result<()> {
    let mut csv_writer = csv::Writer::from_writer(writer);
    csv_writer.write_record(DEMOGRAPHICS_HEADER)?;
    for (patient, demo) in demographics {
        let age = demo.age.map_or(String::new(), |a| a.to_string());
        let sex = demo.sex.map_or("", |s| s.token());
        csv_writer.write_record([patient.as_str(), &age, sex])?;
    }
    csv_writer.flush()?;
    Ok(())
}
