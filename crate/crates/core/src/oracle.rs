//! Brute-force reference miner for verification.
//!
//! Enumerates every subset of the disease universe and counts support by a
//! direct hash-set scan. It deliberately shares no counting or candidate
//! code with the mining module, so a bug in one cannot hide in the other.

use std::collections::{BTreeMap, HashSet};

use crate::error::{Error, Result};
use crate::mining::FrequentItemsets;
use crate::model::{DiseaseName, ItemSet, ItemsetCount, MiningConfig, Minsup, TransactionTable};

/// Largest disease universe the exhaustive enumeration accepts.
pub const MAX_UNIVERSE: usize = 20;

/// Enumerates all itemsets of size 1..=maxk over the table's disease
/// universe, counts each by scanning every patient, and keeps those with
/// support at or above `minsup`. Output shape and ordering match
/// `mine_frequent` exactly.
pub fn brute_force_frequent(
    table: &TransactionTable,
    minsup: u64,
    maxk: usize,
) -> Result<FrequentItemsets> {
    if minsup < 1 {
        return Err(Error::config("minsup must be at least 1"));
    }
    if maxk < 1 {
        return Err(Error::config("maxk must be at least 1"));
    }
    let universe: Vec<DiseaseName> = table.disease_universe().into_iter().collect();
    if universe.len() > MAX_UNIVERSE {
        return Err(Error::validation(format!(
            "universe of {} diseases exceeds the brute-force guard of {MAX_UNIVERSE}",
            universe.len()
        )));
    }

    let patients: Vec<HashSet<&DiseaseName>> = table
        .entries()
        .values()
        .map(|set| set.iter().collect())
        .collect();

    let mut by_pass = BTreeMap::new();
    for k in 1..=maxk.min(universe.len()) {
        let mut level = Vec::new();
        for combo in combinations(&universe, k) {
            let count = patients
                .iter()
                .filter(|patient| combo.iter().all(|item| patient.contains(item)))
                .count() as u64;
            if count >= minsup {
                level.push(ItemsetCount::new(
                    ItemSet::new(combo.to_vec()).expect("combination is non-empty"),
                    count,
                ));
            }
        }
        if level.is_empty() {
            break;
        }
        by_pass.insert(k, level);
    }

    Ok(FrequentItemsets {
        by_pass,
        total_patients: table.total_patients(),
        config: MiningConfig::new(maxk, Minsup::Absolute(minsup)),
    })
}

/// All k-element combinations of `pool`, in lexicographic index order.
fn combinations(pool: &[DiseaseName], k: usize) -> Vec<Vec<DiseaseName>> {
    let n = pool.len();
    let mut out = Vec::new();
    if k == 0 || k > n {
        return out;
    }
    let mut indices: Vec<usize> = (0..k).collect();
    loop {
        out.push(indices.iter().map(|&i| pool[i].clone()).collect());
        // rightmost index that can still advance
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if indices[i] != i + n - k {
                break;
            }
        }
        indices[i] += 1;
        for j in i + 1..k {
            indices[j] = indices[j - 1] + 1;
        }
    }
}
