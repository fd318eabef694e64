//! Level-wise frequent-itemset mining and directed rule derivation.
//!
//! Candidate generation is the classic join of (k-1)-prefix-sharing frequent
//! itemsets followed by the subset prune; support counting scans patients
//! once per pass and tests subset inclusion against sorted disease lists.
//! All thresholds are compared in exact integer/rational arithmetic.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::model::{
    DiseaseName, ItemSet, ItemsetCount, MiningConfig, Minsup, Percentage, Rule, TransactionTable,
};

/// Frequent itemsets grouped by pass (itemset size). Only non-empty passes
/// are stored; within a pass itemsets are unique and sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequentItemsets {
    pub by_pass: BTreeMap<usize, Vec<ItemsetCount>>,
    pub total_patients: u64,
    pub config: MiningConfig,
}

impl FrequentItemsets {
    /// All itemsets across passes, in (pass, itemset) order.
    pub fn iter(&self) -> impl Iterator<Item = &ItemsetCount> {
        self.by_pass.values().flatten()
    }

    /// Lookup table from itemset to support count.
    pub fn support_index(&self) -> HashMap<&ItemSet, u64> {
        self.iter()
            .map(|entry| (&entry.itemset, entry.support_count))
            .collect()
    }
}

/// Directed rules sorted by (antecedent, consequent); no two rules share
/// that pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSet {
    pub rules: Vec<Rule>,
    pub total_patients: u64,
}

// Fractional thresholds arriving as f64 are snapped to the nearest 9-digit
// decimal so that values like 0.07 * 300 resolve the way the decimal reads,
// not the way the binary float rounds.
const FRACTION_DENOMINATOR: u128 = 1_000_000_000;

fn fraction_numerator(f: f64) -> u128 {
    (f * FRACTION_DENOMINATOR as f64).round() as u128
}

/// Resolves a minimum-support threshold to an absolute patient count.
///
/// A relative fraction `f` maps to `ceil(f * total_patients)`, never below 1
/// when the table is non-empty; an absolute count passes through.
pub fn resolve_minsup(minsup: &Minsup, total_patients: u64) -> Result<u64> {
    minsup.validate()?;
    match *minsup {
        Minsup::Absolute(count) => Ok(count),
        Minsup::Relative(f) => {
            let num = fraction_numerator(f) * total_patients as u128;
            let resolved = num.div_ceil(FRACTION_DENOMINATOR) as u64;
            if total_patients >= 1 {
                Ok(resolved.max(1))
            } else {
                Ok(resolved)
            }
        }
    }
}

fn contains_all(diseases: &[&DiseaseName], items: &[DiseaseName]) -> bool {
    // both sides sorted: single merge walk
    let mut cursor = diseases.iter();
    'outer: for item in items {
        for disease in cursor.by_ref() {
            match (*disease).cmp(item) {
                std::cmp::Ordering::Less => continue,
                std::cmp::Ordering::Equal => continue 'outer,
                std::cmp::Ordering::Greater => return false,
            }
        }
        return false;
    }
    true
}

fn sorted_patient_lists(table: &TransactionTable) -> Vec<Vec<&DiseaseName>> {
    table
        .entries()
        .values()
        .map(|set| set.iter().collect())
        .collect()
}

/// Counts, for each candidate, the patients whose disease set contains it.
/// Output order matches input order; counts are exact.
pub fn find_support(table: &TransactionTable, candidates: &[ItemSet]) -> Vec<ItemsetCount> {
    let patients = sorted_patient_lists(table);
    candidates
        .iter()
        .map(|candidate| {
            let count = patients
                .iter()
                .filter(|diseases| contains_all(diseases, candidate.items()))
                .count() as u64;
            ItemsetCount::new(candidate.clone(), count)
        })
        .collect()
}

/// Joins prefix-sharing k-itemsets into (k+1)-candidates and prunes every
/// candidate with an infrequent k-subset. Input must be same-sized,
/// canonical itemsets; output is canonical and sorted.
pub fn generate_candidates(frequent: &[ItemSet]) -> Result<Vec<ItemSet>> {
    let Some(first) = frequent.first() else {
        return Ok(Vec::new());
    };
    let k = first.len();
    if frequent.iter().any(|set| set.len() != k) {
        return Err(Error::validation(
            "candidate generation requires itemsets of a single size",
        ));
    }

    let mut sorted: Vec<&ItemSet> = frequent.iter().collect();
    sorted.sort_unstable();
    sorted.dedup();

    let known: HashMap<&[DiseaseName], ()> =
        sorted.iter().map(|set| (set.items(), ())).collect();

    let mut candidates = Vec::new();
    let mut scratch: Vec<DiseaseName> = Vec::with_capacity(k);
    for (i, left) in sorted.iter().enumerate() {
        for right in &sorted[i + 1..] {
            let (left_items, right_items) = (left.items(), right.items());
            if left_items[..k - 1] != right_items[..k - 1] {
                // sorted input: once prefixes diverge no later join exists
                break;
            }
            let mut items = left_items.to_vec();
            items.push(right_items[k - 1].clone());
            // prune: every k-subset must itself be frequent
            let frequent_subsets = (0..items.len()).all(|skip| {
                scratch.clear();
                scratch.extend(
                    items
                        .iter()
                        .enumerate()
                        .filter(|(idx, _)| *idx != skip)
                        .map(|(_, d)| d.clone()),
                );
                known.contains_key(scratch.as_slice())
            });
            if frequent_subsets {
                candidates.push(ItemSet::from_sorted(items));
            }
        }
    }
    candidates.sort_unstable();
    candidates.dedup();
    Ok(candidates)
}

/// Runs level-wise mining: frequent singletons first, then join + prune +
/// count per pass, stopping at `maxpass` or on the first empty pass.
pub fn mine_frequent(table: &TransactionTable, config: &MiningConfig) -> Result<FrequentItemsets> {
    config.validate()?;
    let total_patients = table.total_patients();
    let minsup = resolve_minsup(&config.minsup, total_patients)?;

    let mut by_pass = BTreeMap::new();
    let singletons: Vec<ItemSet> = table
        .disease_universe()
        .into_iter()
        .map(ItemSet::singleton)
        .collect();

    let mut current: Vec<ItemsetCount> = find_support(table, &singletons)
        .into_iter()
        .filter(|entry| entry.support_count >= minsup)
        .collect();

    let mut pass = 1;
    while !current.is_empty() && pass <= config.maxpass {
        by_pass.insert(pass, current.clone());
        if pass == config.maxpass {
            break;
        }
        let frequent: Vec<ItemSet> = current.into_iter().map(|entry| entry.itemset).collect();
        let candidates = generate_candidates(&frequent)?;
        current = find_support(table, &candidates)
            .into_iter()
            .filter(|entry| entry.support_count >= minsup)
            .collect();
        pass += 1;
    }

    Ok(FrequentItemsets {
        by_pass,
        total_patients,
        config: config.clone(),
    })
}

/// Exact support and confidence percentages for a directed rule, from raw
/// counts. Rounding to two decimals happens only at display time.
pub fn compute_rule_metrics(
    pair_count: u64,
    antecedent_count: u64,
    total: u64,
) -> Result<(Percentage, Percentage)> {
    if antecedent_count == 0 {
        return Err(Error::validation(
            "confidence is undefined for an antecedent with zero support",
        ));
    }
    if total == 0 || pair_count > antecedent_count || antecedent_count > total {
        return Err(Error::validation(format!(
            "inconsistent counts: pair {pair_count}, antecedent {antecedent_count}, total {total}"
        )));
    }
    Ok((
        Percentage::new(pair_count, total),
        Percentage::new(pair_count, antecedent_count),
    ))
}

/// True when `pair_count / antecedent_count >= min_conf`, compared as exact
/// rationals.
pub(crate) fn meets_min_conf(pair_count: u64, antecedent_count: u64, min_conf: f64) -> bool {
    pair_count as u128 * FRACTION_DENOMINATOR
        >= fraction_numerator(min_conf) * antecedent_count as u128
}

/// Derives every directed rule from itemsets of size >= 2: each ordered
/// split of a frequent itemset into non-empty (antecedent, consequent)
/// halves becomes a rule when its confidence clears `min_conf`. Both
/// directions of every pair are candidates.
pub fn derive_rules(
    frequent: &FrequentItemsets,
    table: &TransactionTable,
    min_conf: f64,
) -> Result<RuleSet> {
    if !min_conf.is_finite() || !(0.0..=1.0).contains(&min_conf) {
        return Err(Error::config(format!(
            "min_conf must lie in [0, 1], got {min_conf}"
        )));
    }
    let index = frequent.support_index();
    let mut rules = Vec::new();

    for (&pass, entries) in &frequent.by_pass {
        if pass < 2 {
            continue;
        }
        for entry in entries {
            let items = entry.itemset.items();
            let splits = 1u32 << items.len();
            for mask in 1..splits - 1 {
                let mut antecedent = Vec::new();
                let mut consequent = Vec::new();
                for (idx, item) in items.iter().enumerate() {
                    if mask & (1 << idx) != 0 {
                        antecedent.push(item.clone());
                    } else {
                        consequent.push(item.clone());
                    }
                }
                let antecedent = ItemSet::from_sorted(antecedent);
                let consequent = ItemSet::from_sorted(consequent);
                // downward closure puts every subset in the index; fall back
                // to a direct scan only if handed inconsistent inputs
                let antecedent_count = match index.get(&antecedent) {
                    Some(&count) => count,
                    None => find_support(table, std::slice::from_ref(&antecedent))[0]
                        .support_count,
                };
                if antecedent_count == 0
                    || !meets_min_conf(entry.support_count, antecedent_count, min_conf)
                {
                    continue;
                }
                rules.push(Rule {
                    antecedent,
                    consequent,
                    support_count: entry.support_count,
                    antecedent_count,
                    total_patients: frequent.total_patients,
                });
            }
        }
    }

    rules.sort_unstable_by(|a, b| {
        (&a.antecedent, &a.consequent).cmp(&(&b.antecedent, &b.consequent))
    });
    Ok(RuleSet {
        rules,
        total_patients: frequent.total_patients,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PatientId;

    fn d(name: &str) -> DiseaseName {
        DiseaseName::new(name).unwrap()
    }

    fn set(names: &[&str]) -> ItemSet {
        ItemSet::new(names.iter().map(|n| d(n)).collect()).unwrap()
    }

    fn table(rows: &[(&str, &[&str])]) -> TransactionTable {
        let mut table = TransactionTable::new();
        for (patient, diseases) in rows {
            for disease in *diseases {
                table.insert(PatientId::new(patient).unwrap(), d(disease));
            }
        }
        table
    }

    #[test]
    fn resolve_minsup_examples() {
        assert_eq!(resolve_minsup(&Minsup::Relative(0.01), 1000).unwrap(), 10);
        assert_eq!(resolve_minsup(&Minsup::Absolute(9), 1000).unwrap(), 9);
        assert_eq!(resolve_minsup(&Minsup::Relative(0.005), 1000).unwrap(), 5);
    }

    #[test]
    fn resolve_minsup_is_decimal_exact() {
        // float products that land a hair above the integer must not bump
        // the ceiling: 0.07 * 300 resolves to 21, 0.003 * 1000 to 3
        assert_eq!(resolve_minsup(&Minsup::Relative(0.07), 300).unwrap(), 21);
        assert_eq!(resolve_minsup(&Minsup::Relative(0.003), 1000).unwrap(), 3);
        // non-exact products still round up
        assert_eq!(resolve_minsup(&Minsup::Relative(0.0101), 1000).unwrap(), 11);
        assert_eq!(resolve_minsup(&Minsup::Relative(1.0), 77).unwrap(), 77);
    }

    #[test]
    fn resolve_minsup_floors_at_one_for_nonempty_tables() {
        assert_eq!(resolve_minsup(&Minsup::Relative(1e-9), 5).unwrap(), 1);
        assert_eq!(resolve_minsup(&Minsup::Relative(0.5), 0).unwrap(), 0);
    }

    #[test]
    fn resolve_minsup_rejects_bad_config() {
        assert!(resolve_minsup(&Minsup::Relative(0.0), 10).is_err());
        assert!(resolve_minsup(&Minsup::Relative(1.5), 10).is_err());
        assert!(resolve_minsup(&Minsup::Absolute(0), 10).is_err());
    }

    #[test]
    fn find_support_counts_by_hand() {
        let table = table(&[("P1", &["A", "B"]), ("P2", &["A"]), ("P3", &["B", "C"])]);
        let candidates = vec![set(&["A"]), set(&["B"]), set(&["A", "B"])];
        let counts = find_support(&table, &candidates);
        let values: Vec<u64> = counts.iter().map(|c| c.support_count).collect();
        assert_eq!(values, vec![2, 2, 1]);
        // output order matches input order
        assert_eq!(counts[2].itemset, set(&["A", "B"]));
        assert_eq!(counts[2].pass(), 2);
    }

    #[test]
    fn find_support_absent_disease_counts_zero() {
        let table = table(&[("P1", &["A"])]);
        let counts = find_support(&table, &[set(&["Z"])]);
        assert_eq!(counts[0].support_count, 0);
    }

    #[test]
    fn find_support_single_transaction() {
        let table = table(&[("P1", &["X", "Y"])]);
        let counts = find_support(&table, &[set(&["X", "Y"])]);
        assert_eq!(counts[0].support_count, 1);
    }

    #[test]
    fn candidates_from_singletons_are_all_pairs() {
        let frequent = vec![set(&["A"]), set(&["B"]), set(&["C"])];
        let candidates = generate_candidates(&frequent).unwrap();
        assert_eq!(
            candidates,
            vec![set(&["A", "B"]), set(&["A", "C"]), set(&["B", "C"])]
        );
    }

    #[test]
    fn prune_drops_candidate_with_infrequent_subset() {
        let frequent = vec![set(&["A", "B"]), set(&["A", "C"])];
        // {A,B,C} joins but its subset {B,C} is not frequent
        assert!(generate_candidates(&frequent).unwrap().is_empty());
    }

    #[test]
    fn prune_keeps_candidate_with_all_subsets_frequent() {
        let frequent = vec![set(&["A", "B"]), set(&["A", "C"]), set(&["B", "C"])];
        let candidates = generate_candidates(&frequent).unwrap();
        assert_eq!(candidates, vec![set(&["A", "B", "C"])]);
    }

    #[test]
    fn mixed_size_input_is_rejected() {
        let err = generate_candidates(&[set(&["A"]), set(&["A", "B"])]).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn empty_input_yields_no_candidates() {
        assert!(generate_candidates(&[]).unwrap().is_empty());
    }

    #[test]
    fn mine_frequent_two_passes() {
        let table = table(&[("P1", &["A", "B"]), ("P2", &["A", "B"]), ("P3", &["A"])]);
        let config = MiningConfig::new(2, Minsup::Absolute(2));
        let frequent = mine_frequent(&table, &config).unwrap();
        assert_eq!(frequent.total_patients, 3);
        assert_eq!(
            frequent.by_pass[&1],
            vec![
                ItemsetCount::new(set(&["A"]), 3),
                ItemsetCount::new(set(&["B"]), 2)
            ]
        );
        assert_eq!(
            frequent.by_pass[&2],
            vec![ItemsetCount::new(set(&["A", "B"]), 2)]
        );
    }

    #[test]
    fn minsup_one_maxpass_one_keeps_every_disease() {
        let table = table(&[("P1", &["A", "B"]), ("P2", &["C"])]);
        let config = MiningConfig::new(1, Minsup::Absolute(1));
        let frequent = mine_frequent(&table, &config).unwrap();
        assert_eq!(frequent.by_pass.len(), 1);
        assert_eq!(frequent.by_pass[&1].len(), 3);
    }

    #[test]
    fn minsup_above_total_empties_every_pass() {
        let table = table(&[("P1", &["A"]), ("P2", &["A"])]);
        let config = MiningConfig::new(3, Minsup::Absolute(3));
        let frequent = mine_frequent(&table, &config).unwrap();
        assert!(frequent.by_pass.is_empty());
    }

    #[test]
    fn empty_table_mines_empty() {
        let config = MiningConfig::new(2, Minsup::Absolute(1));
        let frequent = mine_frequent(&TransactionTable::new(), &config).unwrap();
        assert!(frequent.by_pass.is_empty());
        assert_eq!(frequent.total_patients, 0);
    }

    #[test]
    fn rule_metrics_two_decimal_rounding() {
        let (supp, conf) = compute_rule_metrics(26, 305, 1000).unwrap();
        assert_eq!(supp.to_string(), "2.60");
        assert_eq!(conf.to_string(), "8.52");

        let (supp, conf) = compute_rule_metrics(10, 549, 1000).unwrap();
        assert_eq!(supp.to_string(), "1.00");
        assert_eq!(conf.to_string(), "1.82");
    }

    #[test]
    fn rule_metrics_saturated_case() {
        let (supp, conf) = compute_rule_metrics(7, 7, 7).unwrap();
        assert_eq!(supp.to_string(), "100.00");
        assert_eq!(conf.to_string(), "100.00");
    }

    #[test]
    fn rule_metrics_reject_zero_antecedent() {
        assert!(compute_rule_metrics(0, 0, 10).is_err());
    }

    /// 1000 patients manufactured so that {A,B} occurs 26 times, A 305
    /// times and B 536 times.
    fn manufactured_pair_table() -> TransactionTable {
        let mut table = TransactionTable::new();
        let mut ordinal = 0;
        let mut add = |n: usize, diseases: &[&str]| {
            for _ in 0..n {
                ordinal += 1;
                for disease in diseases {
                    table.insert(
                        PatientId::new(&format!("P{ordinal:09}")).unwrap(),
                        d(disease),
                    );
                }
            }
        };
        add(26, &["A", "B"]);
        add(279, &["A"]);
        add(510, &["B"]);
        add(185, &["C"]);
        table
    }

    #[test]
    fn derive_rules_emits_both_directions() {
        let table = manufactured_pair_table();
        assert_eq!(table.total_patients(), 1000);
        let config = MiningConfig::new(2, Minsup::Absolute(26));
        let frequent = mine_frequent(&table, &config).unwrap();
        let rules = derive_rules(&frequent, &table, 0.0).unwrap();

        assert_eq!(rules.rules.len(), 2);
        let forward = &rules.rules[0];
        assert_eq!(forward.antecedent, set(&["A"]));
        assert_eq!(forward.consequent, set(&["B"]));
        assert_eq!(forward.support_count, 26);
        assert_eq!(forward.antecedent_count, 305);
        assert_eq!(forward.support_pct().to_string(), "2.60");
        assert_eq!(forward.confidence_pct().to_string(), "8.52");

        let reverse = &rules.rules[1];
        assert_eq!(reverse.antecedent, set(&["B"]));
        assert_eq!(reverse.antecedent_count, 536);
        assert_eq!(reverse.confidence_pct().to_string(), "4.85");
    }

    #[test]
    fn min_conf_one_keeps_only_saturated_rules() {
        let table = table(&[
            ("P1", &["A", "B"]),
            ("P2", &["A", "B"]),
            ("P3", &["B"]),
        ]);
        let config = MiningConfig::new(2, Minsup::Absolute(2));
        let frequent = mine_frequent(&table, &config).unwrap();
        let rules = derive_rules(&frequent, &table, 1.0).unwrap();
        // A -> B holds with confidence 2/2; B -> A only 2/3
        assert_eq!(rules.rules.len(), 1);
        assert_eq!(rules.rules[0].antecedent, set(&["A"]));
        assert_eq!(rules.rules[0].confidence_pct().to_string(), "100.00");
    }

    #[test]
    fn singletons_only_yield_no_rules() {
        let table = table(&[("P1", &["A"]), ("P2", &["B"])]);
        let config = MiningConfig::new(1, Minsup::Absolute(1));
        let frequent = mine_frequent(&table, &config).unwrap();
        let rules = derive_rules(&frequent, &table, 0.0).unwrap();
        assert!(rules.rules.is_empty());
    }

    #[test]
    fn triple_itemsets_split_into_six_rules() {
        let table = table(&[
            ("P1", &["A", "B", "C"]),
            ("P2", &["A", "B", "C"]),
            ("P3", &["A", "B"]),
        ]);
        let config = MiningConfig::new(3, Minsup::Absolute(2));
        let frequent = mine_frequent(&table, &config).unwrap();
        assert_eq!(frequent.by_pass[&3].len(), 1);
        let rules = derive_rules(&frequent, &table, 0.0).unwrap();
        // splits of {A,B,C}: 6 ordered partitions, plus 2 per frequent pair
        let triple_rules: Vec<&Rule> = rules
            .rules
            .iter()
            .filter(|r| r.antecedent.len() + r.consequent.len() == 3)
            .collect();
        assert_eq!(triple_rules.len(), 6);
        for rule in &rules.rules {
            assert!(rule.antecedent.is_disjoint(&rule.consequent));
            assert!(rule.antecedent_count >= rule.support_count);
        }
    }
}
