//! Demographic stratification: partition patients by age band or sex, mine
//! each stratum locally, and assemble plot-ready metric rows.
//!
//! Percentages inside a stratum are always normalized by that stratum's
//! patient count, so series are comparable across unevenly sized groups. A
//! relative minimum support is likewise resolved against each stratum's
//! size; an absolute one applies unchanged.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::mining::{self, find_support, mine_frequent};
use crate::model::{
    Demographics, DiseaseName, ItemSet, MiningConfig, PatientId, Percentage, Sex, StratumSpec,
    TransactionTable,
};

/// Label used for patients whose stratification attribute is missing or
/// uncovered.
pub const UNKNOWN_STRATUM: &str = "unknown";

/// One partition cell: a label and the patients that fell into it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stratum {
    pub label: String,
    pub patients: BTreeSet<PatientId>,
}

/// A directed metric target: confidence is `supp(antecedent U consequent) /
/// supp(antecedent)` within each stratum. Built from an ordered disease
/// list where the first name is the antecedent.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Target {
    pub antecedent: ItemSet,
    pub consequent: ItemSet,
}

impl Target {
    pub fn new(antecedent: ItemSet, consequent: ItemSet) -> Result<Self> {
        if !antecedent.is_disjoint(&consequent) {
            return Err(Error::validation(
                "target antecedent and consequent must be disjoint",
            ));
        }
        Ok(Target {
            antecedent,
            consequent,
        })
    }

    /// First name is the antecedent, the rest form the consequent.
    pub fn from_ordered(names: &[DiseaseName]) -> Result<Self> {
        if names.len() < 2 {
            return Err(Error::validation(
                "a target needs at least two diseases (antecedent, consequent)",
            ));
        }
        Target::new(
            ItemSet::singleton(names[0].clone()),
            ItemSet::new(names[1..].to_vec())?,
        )
    }

    pub fn combined(&self) -> ItemSet {
        self.antecedent.union(&self.consequent)
    }
}

/// One report row: metrics for a directed itemset within one stratum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportRow {
    pub stratum: String,
    pub antecedent: ItemSet,
    pub consequent: ItemSet,
    pub patient_count: u64,
    pub support_pct: Percentage,
    pub confidence_pct: Percentage,
}

/// The stratified mining result. `strata` lists every cell with its
/// population (including empty ones) so the report schema is stable;
/// `rows` carries the metrics in (stratum, antecedent, consequent) order.
#[derive(Debug, Clone, PartialEq)]
pub struct StratifiedReport {
    pub spec: StratumSpec,
    pub strata: Vec<(String, u64)>,
    pub rows: Vec<ReportRow>,
    /// Target rows skipped because the antecedent had zero support in the
    /// stratum.
    pub omitted_rows: u64,
}

/// Partitions `patients` by the spec'd attribute. Every spec cell appears
/// in the output (even when empty) followed by the `unknown` stratum, which
/// collects patients with a missing or uncovered attribute.
pub fn stratify(
    demographics: &BTreeMap<PatientId, Demographics>,
    patients: &BTreeSet<PatientId>,
    spec: &StratumSpec,
) -> Result<Vec<Stratum>> {
    spec.validate()?;
    let mut strata: Vec<Stratum> = match spec {
        StratumSpec::Age(bands) => bands
            .iter()
            .map(|band| Stratum {
                label: band.label(),
                patients: BTreeSet::new(),
            })
            .collect(),
        StratumSpec::Sex => [Sex::Female, Sex::Male, Sex::Other]
            .iter()
            .map(|sex| Stratum {
                label: sex.label().to_owned(),
                patients: BTreeSet::new(),
            })
            .collect(),
    };
    let mut unknown = Stratum {
        label: UNKNOWN_STRATUM.to_owned(),
        patients: BTreeSet::new(),
    };

    for patient in patients {
        let idx = match (spec, demographics.get(patient)) {
            (StratumSpec::Age(bands), Some(demo)) => demo
                .age
                .and_then(|age| bands.iter().position(|band| band.contains(age))),
            (StratumSpec::Sex, Some(demo)) => demo.sex.map(|sex| match sex {
                Sex::Female => 0,
                Sex::Male => 1,
                Sex::Other => 2,
            }),
            (_, None) => None,
        };
        match idx {
            Some(idx) => {
                strata[idx].patients.insert(patient.clone());
            }
            None => {
                unknown.patients.insert(patient.clone());
            }
        }
    }

    strata.push(unknown);
    Ok(strata)
}

fn check_partition(table: &TransactionTable, strata: &[Stratum]) -> Result<()> {
    let mut seen: BTreeSet<&PatientId> = BTreeSet::new();
    let mut total = 0u64;
    for stratum in strata {
        for patient in &stratum.patients {
            if !seen.insert(patient) {
                return Err(Error::validation(format!(
                    "patient {patient} appears in more than one stratum"
                )));
            }
            total += 1;
        }
    }
    if total != table.total_patients()
        || !table.entries().keys().all(|patient| seen.contains(patient))
    {
        return Err(Error::validation(
            "strata do not partition the table's patients",
        ));
    }
    Ok(())
}

/// Mines each stratum and assembles the report.
///
/// With `targets`, each stratum reports the given directed itemsets (one
/// series per target across strata); without, each stratum's frequent pairs
/// are mined and reported in both directions, the first-listed disease
/// being the antecedent. Strata with no patients contribute their label
/// only.
pub fn mine_strata(
    table: &TransactionTable,
    spec: &StratumSpec,
    strata: &[Stratum],
    config: &MiningConfig,
    targets: Option<&[Target]>,
) -> Result<StratifiedReport> {
    config.validate()?;
    check_partition(table, strata)?;

    let mut report = StratifiedReport {
        spec: spec.clone(),
        strata: strata
            .iter()
            .map(|s| (s.label.clone(), s.patients.len() as u64))
            .collect(),
        rows: Vec::new(),
        omitted_rows: 0,
    };

    for stratum in strata {
        let population = stratum.patients.len() as u64;
        if population == 0 {
            continue;
        }
        let local = table.restrict(&stratum.patients);
        match targets {
            Some(targets) => {
                for target in targets {
                    let candidates = [target.combined(), target.antecedent.clone()];
                    let counts = find_support(&local, &candidates);
                    let (pair_count, antecedent_count) =
                        (counts[0].support_count, counts[1].support_count);
                    if antecedent_count == 0 {
                        report.omitted_rows += 1;
                        continue;
                    }
                    report.rows.push(ReportRow {
                        stratum: stratum.label.clone(),
                        antecedent: target.antecedent.clone(),
                        consequent: target.consequent.clone(),
                        patient_count: population,
                        support_pct: Percentage::new(pair_count, population),
                        confidence_pct: Percentage::new(pair_count, antecedent_count),
                    });
                }
            }
            None => {
                let mut pair_config = config.clone();
                pair_config.maxpass = config.maxpass.min(2);
                let frequent = mine_frequent(&local, &pair_config)?;
                let singles = frequent.support_index();
                let Some(pairs) = frequent.by_pass.get(&2) else {
                    continue;
                };
                for entry in pairs {
                    let items = entry.itemset.items();
                    for (ante, cons) in [(0, 1), (1, 0)] {
                        let antecedent = ItemSet::singleton(items[ante].clone());
                        let consequent = ItemSet::singleton(items[cons].clone());
                        let antecedent_count = singles[&antecedent];
                        if !mining::meets_min_conf(
                            entry.support_count,
                            antecedent_count,
                            config.min_conf,
                        ) {
                            continue;
                        }
                        report.rows.push(ReportRow {
                            stratum: stratum.label.clone(),
                            antecedent,
                            consequent,
                            patient_count: population,
                            support_pct: Percentage::new(entry.support_count, population),
                            confidence_pct: Percentage::new(
                                entry.support_count,
                                antecedent_count,
                            ),
                        });
                    }
                }
            }
        }
    }

    let order: BTreeMap<&str, usize> = strata
        .iter()
        .enumerate()
        .map(|(idx, s)| (s.label.as_str(), idx))
        .collect();
    report.rows.sort_by(|a, b| {
        (order[a.stratum.as_str()], &a.antecedent, &a.consequent).cmp(&(
            order[b.stratum.as_str()],
            &b.antecedent,
            &b.consequent,
        ))
    });
    Ok(report)
}
