//! Domain types shared by every other module.
//!
//! All types here are immutable after construction and safe to share across
//! threads. Constructors validate; nothing else mutates.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound (exclusive for bands, inclusive for recorded ages) of the
/// valid age range.
pub const MAX_AGE: u16 = 150;

/// A normalized disease label: trimmed, internal whitespace collapsed to a
/// single space, case preserved.
///
/// Names never contain commas, pipes, or line breaks, so they embed safely
/// in every file format this crate reads or writes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct DiseaseName(String);

impl DiseaseName {
    pub fn new(raw: &str) -> Result<Self> {
        let normalized: String = raw.split_whitespace().collect::<Vec<_>>().join(" ");
        if normalized.is_empty() {
            return Err(Error::validation("disease name is empty"));
        }
        if normalized.contains(',') || normalized.contains('|') {
            return Err(Error::validation(format!(
                "disease name {normalized:?} contains a reserved separator character"
            )));
        }
        Ok(DiseaseName(normalized))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for DiseaseName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for DiseaseName {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        DiseaseName::new(&value)
    }
}

impl From<DiseaseName> for String {
    fn from(name: DiseaseName) -> String {
        name.0
    }
}

/// Opaque patient key. Equality is exact text equality; no normalization.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PatientId(String);

impl PatientId {
    pub fn new(raw: &str) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::validation("patient id is empty"));
        }
        Ok(PatientId(raw.to_owned()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PatientId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for PatientId {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        PatientId::new(&value)
    }
}

impl From<PatientId> for String {
    fn from(id: PatientId) -> String {
        id.0
    }
}

/// The transaction database: one non-empty disease set per patient.
///
/// The total number of patients is the denominator of every global support
/// percentage.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TransactionTable {
    entries: BTreeMap<PatientId, BTreeSet<DiseaseName>>,
}

impl TransactionTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a table from complete per-patient sets, rejecting empty sets.
    pub fn from_entries(entries: BTreeMap<PatientId, BTreeSet<DiseaseName>>) -> Result<Self> {
        for (patient, diseases) in &entries {
            if diseases.is_empty() {
                return Err(Error::validation(format!(
                    "patient {patient} has an empty disease set"
                )));
            }
        }
        Ok(TransactionTable { entries })
    }

    /// Records one (patient, disease) observation. Returns `false` when the
    /// pair was already present.
    pub fn insert(&mut self, patient: PatientId, disease: DiseaseName) -> bool {
        self.entries.entry(patient).or_default().insert(disease)
    }

    pub fn entries(&self) -> &BTreeMap<PatientId, BTreeSet<DiseaseName>> {
        &self.entries
    }

    pub fn get(&self, patient: &PatientId) -> Option<&BTreeSet<DiseaseName>> {
        self.entries.get(patient)
    }

    pub fn total_patients(&self) -> u64 {
        self.entries.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn patient_ids(&self) -> BTreeSet<PatientId> {
        self.entries.keys().cloned().collect()
    }

    /// Every distinct disease across all patients, in canonical order.
    pub fn disease_universe(&self) -> BTreeSet<DiseaseName> {
        self.entries.values().flatten().cloned().collect()
    }

    /// The sub-table containing only the given patients.
    pub fn restrict(&self, patients: &BTreeSet<PatientId>) -> TransactionTable {
        TransactionTable {
            entries: self
                .entries
                .iter()
                .filter(|(id, _)| patients.contains(*id))
                .map(|(id, set)| (id.clone(), set.clone()))
                .collect(),
        }
    }
}

/// One patient's aggregated itemset with its cardinality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatientRecord {
    pub patient: PatientId,
    pub count: u64,
    pub diseases: Vec<DiseaseName>,
}

/// Recorded sex, a closed enumeration; missing data is `Option::None` at the
/// use site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sex {
    Female,
    Male,
    Other,
}

impl Sex {
    /// Parses the one-letter file token (`F`/`M`/`O`, case-insensitive).
    pub fn from_token(token: &str) -> Result<Self> {
        match token.trim().to_ascii_uppercase().as_str() {
            "F" => Ok(Sex::Female),
            "M" => Ok(Sex::Male),
            "O" => Ok(Sex::Other),
            other => Err(Error::format(format!("unrecognized sex token {other:?}"))),
        }
    }

    pub fn token(&self) -> &'static str {
        match self {
            Sex::Female => "F",
            Sex::Male => "M",
            Sex::Other => "O",
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Sex::Female => "female",
            Sex::Male => "male",
            Sex::Other => "other",
        }
    }
}

/// Demographic attributes for one patient; both attributes may be absent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Demographics {
    pub patient: PatientId,
    pub age: Option<u16>,
    pub sex: Option<Sex>,
}

impl Demographics {
    pub fn new(patient: PatientId, age: Option<u16>, sex: Option<Sex>) -> Result<Self> {
        if let Some(age) = age {
            if age > MAX_AGE {
                return Err(Error::validation(format!(
                    "age {age} outside [0, {MAX_AGE}]"
                )));
            }
        }
        Ok(Demographics { patient, age, sex })
    }
}

/// A canonical set of disease names: strictly sorted, deduplicated,
/// non-empty. Two itemsets built from permutations of the same names
/// compare equal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ItemSet {
    items: Vec<DiseaseName>,
}

impl ItemSet {
    /// Canonicalizes a list of names into an itemset: sorts, deduplicates,
    /// rejects empty input. Idempotent.
    pub fn new(items: Vec<DiseaseName>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::validation("itemset is empty"));
        }
        let mut items = items;
        items.sort_unstable();
        items.dedup();
        Ok(ItemSet { items })
    }

    pub fn singleton(item: DiseaseName) -> Self {
        ItemSet { items: vec![item] }
    }

    /// Internal fast path for inputs already sorted and deduplicated.
    pub(crate) fn from_sorted(items: Vec<DiseaseName>) -> Self {
        debug_assert!(!items.is_empty());
        debug_assert!(items.windows(2).all(|w| w[0] < w[1]));
        ItemSet { items }
    }

    pub fn items(&self) -> &[DiseaseName] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, item: &DiseaseName) -> bool {
        self.items.binary_search(item).is_ok()
    }

    pub fn is_disjoint(&self, other: &ItemSet) -> bool {
        self.items.iter().all(|item| !other.contains(item))
    }

    pub fn union(&self, other: &ItemSet) -> ItemSet {
        let mut items = self.items.clone();
        items.extend(other.items.iter().cloned());
        items.sort_unstable();
        items.dedup();
        ItemSet { items }
    }

    /// Item labels joined with the given separator.
    pub fn join(&self, sep: &str) -> String {
        self.items
            .iter()
            .map(DiseaseName::as_str)
            .collect::<Vec<_>>()
            .join(sep)
    }
}

impl fmt::Display for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.join(", "))
    }
}

/// An itemset together with its absolute support count.
///
/// The pass (level) of an itemset is its size; it is derived, never stored,
/// so it cannot drift out of sync.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItemsetCount {
    pub itemset: ItemSet,
    pub support_count: u64,
}

impl ItemsetCount {
    pub fn new(itemset: ItemSet, support_count: u64) -> Self {
        ItemsetCount {
            itemset,
            support_count,
        }
    }

    pub fn pass(&self) -> usize {
        self.itemset.len()
    }
}

/// Minimum support threshold: an absolute patient count or a fraction of
/// the total.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Minsup {
    Absolute(u64),
    Relative(f64),
}

impl Minsup {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Minsup::Absolute(count) if count >= 1 => Ok(()),
            Minsup::Absolute(count) => Err(Error::config(format!(
                "absolute minsup must be at least 1, got {count}"
            ))),
            Minsup::Relative(f) if f.is_finite() && f > 0.0 && f <= 1.0 => Ok(()),
            Minsup::Relative(f) => Err(Error::config(format!(
                "relative minsup must lie in (0, 1], got {f}"
            ))),
        }
    }
}

/// Mining parameters: maximum itemset size, minimum support, minimum
/// confidence for rule emission.
#[derive(Debug, Clone, PartialEq)]
pub struct MiningConfig {
    pub maxpass: usize,
    pub minsup: Minsup,
    pub min_conf: f64,
}

impl MiningConfig {
    pub fn new(maxpass: usize, minsup: Minsup) -> Self {
        MiningConfig {
            maxpass,
            minsup,
            min_conf: 0.0,
        }
    }

    pub fn with_min_conf(mut self, min_conf: f64) -> Self {
        self.min_conf = min_conf;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.maxpass < 1 {
            return Err(Error::config("maxpass must be at least 1"));
        }
        self.minsup.validate()?;
        if !self.min_conf.is_finite() || !(0.0..=1.0).contains(&self.min_conf) {
            return Err(Error::config(format!(
                "min_conf must lie in [0, 1], got {}",
                self.min_conf
            )));
        }
        Ok(())
    }
}

/// An exact percentage `100 * count / base`, kept as a rational and rounded
/// half-up to two decimals only for display.
#[derive(Debug, Clone, Copy)]
pub struct Percentage {
    count: u64,
    base: u64,
}

impl Percentage {
    /// Requires `base >= 1` and `count <= base`; callers validate counts
    /// before constructing.
    pub fn new(count: u64, base: u64) -> Self {
        assert!(base >= 1, "percentage base must be positive");
        assert!(count <= base, "percentage count exceeds base");
        Percentage { count, base }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn as_f64(&self) -> f64 {
        100.0 * self.count as f64 / self.base as f64
    }

    /// The percentage in hundredths, rounded half-up: 8.5246% -> 852.
    pub fn hundredths(&self) -> u64 {
        let p = self.count as u128 * 10_000;
        let q = self.base as u128;
        ((2 * p + q) / (2 * q)) as u64
    }
}

impl fmt::Display for Percentage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h = self.hundredths();
        write!(f, "{}.{:02}", h / 100, h % 100)
    }
}

impl PartialEq for Percentage {
    fn eq(&self, other: &Self) -> bool {
        self.count as u128 * other.base as u128 == other.count as u128 * self.base as u128
    }
}

impl Eq for Percentage {}

impl PartialOrd for Percentage {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Percentage {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.count as u128 * other.base as u128).cmp(&(other.count as u128 * self.base as u128))
    }
}

/// A directed association rule. The stored counts are exact; percentages
/// are derived from them on demand so the rational identity
/// `confidence * antecedent_count == 100 * support_count` holds by
/// construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub antecedent: ItemSet,
    pub consequent: ItemSet,
    /// Patients containing antecedent and consequent together.
    pub support_count: u64,
    /// Patients containing the antecedent.
    pub antecedent_count: u64,
    pub total_patients: u64,
}

impl Rule {
    pub fn support_pct(&self) -> Percentage {
        Percentage::new(self.support_count, self.total_patients)
    }

    pub fn confidence_pct(&self) -> Percentage {
        Percentage::new(self.support_count, self.antecedent_count)
    }
}

/// A half-open age range `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AgeBand {
    pub lo: u16,
    pub hi: u16,
}

impl AgeBand {
    pub fn new(lo: u16, hi: u16) -> Self {
        AgeBand { lo, hi }
    }

    pub fn contains(&self, age: u16) -> bool {
        self.lo <= age && age < self.hi
    }

    pub fn label(&self) -> String {
        format!("{}-{}", self.lo, self.hi)
    }
}

/// The default stratification granularity: 5-year bands over `[0, 150)`.
pub fn default_age_bands() -> Vec<AgeBand> {
    (0..MAX_AGE)
        .step_by(5)
        .map(|lo| AgeBand::new(lo, lo + 5))
        .collect()
}

/// Which demographic attribute to stratify by.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StratumSpec {
    Age(Vec<AgeBand>),
    Sex,
}

impl StratumSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            StratumSpec::Sex => Ok(()),
            StratumSpec::Age(bands) => validate_age_bands(bands),
        }
    }
}

/// Age bands must ascend without overlap or gap and cover exactly
/// `[0, MAX_AGE)`.
pub fn validate_age_bands(bands: &[AgeBand]) -> Result<()> {
    if bands.is_empty() {
        return Err(Error::validation("age bands are empty"));
    }
    if bands[0].lo != 0 {
        return Err(Error::validation("age bands must start at 0"));
    }
    for band in bands {
        if band.lo >= band.hi {
            return Err(Error::validation(format!(
                "age band {} is empty or inverted",
                band.label()
            )));
        }
    }
    for pair in bands.windows(2) {
        if pair[1].lo != pair[0].hi {
            return Err(Error::validation(format!(
                "age bands {} and {} do not tile",
                pair[0].label(),
                pair[1].label()
            )));
        }
    }
    let last = bands[bands.len() - 1];
    if last.hi != MAX_AGE {
        return Err(Error::validation(format!(
            "age bands must end at {MAX_AGE}, got {}",
            last.hi
        )));
    }
    Ok(())
}
