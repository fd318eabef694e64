//! CSV rendering for the three report files, plus atomic file writes.
//!
//! All percentages print with exactly two decimals (half-up); itemset
//! fields join disease names with `|`, antecedent first.

use std::io;
use std::path::Path;

use cscp_core::mining::{FrequentItemsets, RuleSet};
use cscp_core::model::Percentage;
use cscp_core::strata::StratifiedReport;

pub const ITEMSETS_FILE: &str = "itemsets.csv";
pub const RULES_FILE: &str = "rules.csv";
pub const STRATIFIED_FILE: &str = "stratified.csv";
pub const TRANSACTIONS_FILE: &str = "transactions.csv";
pub const DEMOGRAPHICS_FILE: &str = "demographics.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

fn into_bytes(writer: csv::Writer<Vec<u8>>) -> Vec<u8> {
    writer.into_inner().expect("csv writer over Vec cannot fail")
}

/// `pass,itemset,support_count,support_pct`, sorted by pass then itemset.
pub fn render_itemsets(frequent: &FrequentItemsets) -> Vec<u8> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["pass", "itemset", "support_count", "support_pct"])
        .expect("write to Vec");
    for (pass, entries) in &frequent.by_pass {
        for entry in entries {
            writer
                .write_record([
                    pass.to_string(),
                    entry.itemset.join("|"),
                    entry.support_count.to_string(),
                    Percentage::new(entry.support_count, frequent.total_patients).to_string(),
                ])
                .expect("write to Vec");
        }
    }
    into_bytes(writer)
}

/// `antecedent,consequent,support_count,support_pct,confidence_pct`, sorted
/// by (antecedent, consequent).
pub fn render_rules(rules: &RuleSet) -> Vec<u8> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record([
            "antecedent",
            "consequent",
            "support_count",
            "support_pct",
            "confidence_pct",
        ])
        .expect("write to Vec");
    for rule in &rules.rules {
        writer
            .write_record([
                rule.antecedent.join("|"),
                rule.consequent.join("|"),
                rule.support_count.to_string(),
                rule.support_pct().to_string(),
                rule.confidence_pct().to_string(),
            ])
            .expect("write to Vec");
    }
    into_bytes(writer)
}

/// `stratum,itemset,patient_count,support_pct,confidence_pct`; the itemset
/// field lists antecedent diseases before consequent diseases.
pub fn render_stratified(report: &StratifiedReport) -> Vec<u8> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record([
            "stratum",
            "itemset",
            "patient_count",
            "support_pct",
            "confidence_pct",
        ])
        .expect("write to Vec");
    for row in &report.rows {
        let itemset = format!("{}|{}", row.antecedent.join("|"), row.consequent.join("|"));
        writer
            .write_record([
                row.stratum.clone(),
                itemset,
                row.patient_count.to_string(),
                row.support_pct.to_string(),
                row.confidence_pct.to_string(),
            ])
            .expect("write to Vec");
    }
    into_bytes(writer)
}

/// Writes via a temp file in the same directory plus rename, so readers
/// never observe a half-written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(dir) => tempfile::NamedTempFile::new_in(dir)?,
        None => tempfile::NamedTempFile::new()?,
    };
    io::Write::write_all(&mut tmp, bytes)?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
