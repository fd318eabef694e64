//! Seeded synthetic dataset generator.
//!
//! Each patient draws diseases independently by catalog prevalence, in
//! catalog order; pairwise boosts then multiply the conditional probability
//! of a later disease once an earlier one has been drawn. Patients drawing
//! nothing are redrawn (bounded), so every transaction carries at least one
//! disease. This is a test-data model, not a faithful clinical simulation.
//!
//! Determinism contract: the stream is ChaCha8 keyed by the 64-bit seed.
//! Draw order per patient is diseases (with redraws), then age, then sex;
//! uniform doubles come from the top 53 bits of `next_u64`. Identical
//! configs therefore produce byte-identical datasets on every platform.

use std::collections::BTreeMap;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Demographics, DiseaseName, PatientId, Sex, TransactionTable, MAX_AGE};

/// Redraw budget per patient before generation fails.
const MAX_REDRAWS: u32 = 1000;

/// Largest ordinal that fits the zero-padded id format.
pub const MAX_ORDINAL: u64 = 999_999_999;

/// One disease with its marginal prevalence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub name: DiseaseName,
    pub prevalence: f64,
}

/// Multiplies the conditional probability of drawing `target` once `given`
/// has been drawn for the same patient. `given` must precede `target` in
/// the catalog, since draws happen in catalog order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Boost {
    pub given: DiseaseName,
    pub target: DiseaseName,
    pub multiplier: f64,
}

/// Uniform integer age range, inclusive on both ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgeRange {
    pub lo: u16,
    pub hi: u16,
}

/// Categorical sex distribution; probabilities must sum to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SexDistribution {
    pub female: f64,
    pub male: f64,
    pub other: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub patient_count: u64,
    pub seed: u64,
    pub catalog: Vec<CatalogEntry>,
    pub boosts: Vec<Boost>,
    pub age_range: AgeRange,
    pub sex_distribution: SexDistribution,
}

/// The five-disease catalog used throughout the test suites, with
/// prevalences matching its reference singleton supports per thousand.
pub fn default_catalog() -> Vec<CatalogEntry> {
    [
        ("Heart-Block", 0.334),
        ("Hypertension", 0.549),
        ("Myocarditis", 0.532),
        ("Cardiac-Arrest", 0.536),
        ("Bradycardia", 0.305),
    ]
    .iter()
    .map(|(name, prevalence)| CatalogEntry {
        name: DiseaseName::new(name).expect("static catalog names are valid"),
        prevalence: *prevalence,
    })
    .collect()
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            patient_count: 1000,
            seed: 0,
            catalog: default_catalog(),
            boosts: Vec::new(),
            age_range: AgeRange { lo: 0, hi: 99 },
            sex_distribution: SexDistribution {
                female: 0.5,
                male: 0.5,
                other: 0.0,
            },
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.patient_count < 1 {
            return Err(Error::config("patient_count must be at least 1"));
        }
        if self.patient_count > MAX_ORDINAL {
            return Err(Error::config(format!(
                "patient_count exceeds the id space of {MAX_ORDINAL}"
            )));
        }
        if self.catalog.is_empty() {
            return Err(Error::config("catalog must list at least one disease"));
        }
        for entry in &self.catalog {
            if !entry.prevalence.is_finite() || !(0.0..=1.0).contains(&entry.prevalence) {
                return Err(Error::config(format!(
                    "prevalence for {} must lie in [0, 1], got {}",
                    entry.name, entry.prevalence
                )));
            }
        }
        let names: Vec<&DiseaseName> = self.catalog.iter().map(|e| &e.name).collect();
        for window in 0..names.len() {
            if names[window + 1..].contains(&names[window]) {
                return Err(Error::config(format!(
                    "catalog lists {} more than once",
                    names[window]
                )));
            }
        }
        for boost in &self.boosts {
            if !boost.multiplier.is_finite() || boost.multiplier < 0.0 {
                return Err(Error::config(format!(
                    "boost multiplier for ({}, {}) must be finite and non-negative",
                    boost.given, boost.target
                )));
            }
            let given_pos = names.iter().position(|n| **n == boost.given);
            let target_pos = names.iter().position(|n| **n == boost.target);
            match (given_pos, target_pos) {
                (Some(g), Some(t)) if g < t => {}
                (Some(_), Some(_)) => {
                    return Err(Error::config(format!(
                        "boost ({}, {}) is inert: the given disease must precede the target in the catalog",
                        boost.given, boost.target
                    )));
                }
                _ => {
                    return Err(Error::config(format!(
                        "boost ({}, {}) names a disease missing from the catalog",
                        boost.given, boost.target
                    )));
                }
            }
        }
        if self.age_range.lo > self.age_range.hi || self.age_range.hi > MAX_AGE {
            return Err(Error::config(format!(
                "age range [{}, {}] must be ordered and end at or below {MAX_AGE}",
                self.age_range.lo, self.age_range.hi
            )));
        }
        let s = self.sex_distribution;
        for (label, value) in [("female", s.female), ("male", s.male), ("other", s.other)] {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::config(format!(
                    "sex probability {label} must be non-negative, got {value}"
                )));
            }
        }
        if (s.female + s.male + s.other - 1.0).abs() > 1e-9 {
            return Err(Error::config("sex probabilities must sum to 1"));
        }
        Ok(())
    }
}

/// Formats a 1-based ordinal as a patient id: "P" plus nine zero-padded
/// decimal digits.
pub fn id_format(ordinal: u64) -> Result<PatientId> {
    if !(1..=MAX_ORDINAL).contains(&ordinal) {
        return Err(Error::validation(format!(
            "ordinal {ordinal} outside [1, {MAX_ORDINAL}]"
        )));
    }
    PatientId::new(&format!("P{ordinal:09}"))
}

// Top 53 bits of a u64 mapped to [0, 1); the standard double mapping.
fn uniform_f64(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn draw_diseases(config: &GeneratorConfig, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut drawn = Vec::new();
    for (idx, entry) in config.catalog.iter().enumerate() {
        let mut probability = entry.prevalence;
        for boost in &config.boosts {
            if boost.target == entry.name
                && drawn
                    .iter()
                    .any(|&d: &usize| config.catalog[d].name == boost.given)
            {
                probability *= boost.multiplier;
            }
        }
        let probability = probability.clamp(0.0, 1.0);
        if uniform_f64(rng) < probability {
            drawn.push(idx);
        }
    }
    drawn
}

/// Generates a seeded dataset: `patient_count` patients with sequential
/// ids, every one carrying at least one disease, plus full demographics.
pub fn generate(
    config: &GeneratorConfig,
) -> Result<(TransactionTable, BTreeMap<PatientId, Demographics>)> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut table = TransactionTable::new();
    let mut demographics = BTreeMap::new();

    let age_span = (config.age_range.hi - config.age_range.lo + 1) as u64;
    for ordinal in 1..=config.patient_count {
        let patient = id_format(ordinal)?;

        let mut drawn = draw_diseases(config, &mut rng);
        let mut attempts = 1;
        while drawn.is_empty() {
            if attempts >= MAX_REDRAWS {
                return Err(Error::generation(format!(
                    "patient {patient} drew no diseases after {MAX_REDRAWS} attempts; \
                     prevalences are too small"
                )));
            }
            drawn = draw_diseases(config, &mut rng);
            attempts += 1;
        }
        for idx in drawn {
            table.insert(patient.clone(), config.catalog[idx].name.clone());
        }

        let age = config.age_range.lo + (rng.next_u64() % age_span) as u16;
        let u = uniform_f64(&mut rng);
        let sex = if u < config.sex_distribution.female {
            Sex::Female
        } else if u < config.sex_distribution.female + config.sex_distribution.male {
            Sex::Male
        } else {
            Sex::Other
        };
        demographics.insert(
            patient.clone(),
            Demographics::new(patient, Some(age), Some(sex))?,
        );
    }

    Ok((table, demographics))
}
