//! End-to-end CLI behavior: exit codes, file outputs, determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn cscp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cscp"))
        .args(args)
        .output()
        .expect("spawn cscp")
}

fn out_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cscp-cli-{name}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(path: &Path, text: &str) {
    fs::write(path, text).unwrap();
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap_or_else(|err| panic!("read {}: {err}", path.display()))
}

/// 1000 patients shaped so that {Bradycardia, Cardiac-Arrest} has pair
/// count 26, Bradycardia 305 and Cardiac-Arrest 536.
fn reference_dataset_csv() -> String {
    let mut text = String::from("patient_id,disease\n");
    let mut ordinal = 0;
    let mut add = |n: usize, diseases: &[&str]| {
        for _ in 0..n {
            ordinal += 1;
            for disease in diseases {
                text.push_str(&format!("P{ordinal:09},{disease}\n"));
            }
        }
    };
    add(26, &["Bradycardia", "Cardiac-Arrest"]);
    add(279, &["Bradycardia"]);
    add(510, &["Cardiac-Arrest"]);
    add(185, &["Hypertension"]);
    text
}

#[test]
fn gen_rejects_zero_patients_with_exit_2() {
    let dir = out_dir("gen-zero");
    let config = dir.join("config.toml");
    write(&config, "patient_count = 0\n");
    let output = cscp(&[
        "gen",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn gen_rejects_unparseable_config_with_exit_2() {
    let dir = out_dir("gen-bad-toml");
    let config = dir.join("config.toml");
    write(&config, "patient_count = \"many\"\n");
    let output = cscp(&[
        "gen",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn gen_same_seed_is_byte_identical() {
    let dir_a = out_dir("gen-det-a");
    let dir_b = out_dir("gen-det-b");
    for dir in [&dir_a, &dir_b] {
        let output = cscp(&["gen", "--out", dir.to_str().unwrap(), "--seed", "7"]);
        assert!(output.status.success());
    }
    for name in ["transactions.csv", "demographics.csv"] {
        assert_eq!(
            fs::read(dir_a.join(name)).unwrap(),
            fs::read(dir_b.join(name)).unwrap(),
            "{name} differs between identical runs"
        );
    }
}

#[test]
fn gen_honors_config_file() {
    let dir = out_dir("gen-config");
    let config = dir.join("config.toml");
    write(
        &config,
        r#"
patient_count = 25
seed = 3

[[catalog]]
name = "Asthma"
prevalence = 0.9

[[catalog]]
name = "Eczema"
prevalence = 0.4

[[boosts]]
given = "Asthma"
target = "Eczema"
multiplier = 2.0

[age_range]
lo = 10
hi = 20

[sex_distribution]
female = 1.0
male = 0.0
other = 0.0
"#,
    );
    let output = cscp(&[
        "gen",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let transactions = read(&dir.join("transactions.csv"));
    assert!(transactions.lines().count() >= 26);
    assert!(transactions.contains("Asthma"));
    let demographics = read(&dir.join("demographics.csv"));
    // all female, ages within [10, 20]
    for line in demographics.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let age: u16 = fields[1].parse().unwrap();
        assert!((10..=20).contains(&age));
        assert_eq!(fields[2], "F");
    }
    let manifest = read(&dir.join("manifest.json"));
    assert!(manifest.contains("\"seed\": 3"));
    assert!(manifest.contains("config.toml"));
}

#[test]
fn mine_missing_input_exits_3() {
    let dir = out_dir("mine-missing");
    let output = cscp(&[
        "mine",
        "--input",
        "/nonexistent/input.csv",
        "--minsup",
        "2",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(3));
}

#[test]
fn mine_rejects_relative_minsup_above_one() {
    let dir = out_dir("mine-minsup");
    let input = dir.join("transactions.csv");
    write(&input, "patient_id,disease\nP1,A\n");
    let output = cscp(&[
        "mine",
        "--input",
        input.to_str().unwrap(),
        "--minsup",
        "1.01",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn mine_bad_header_exits_2() {
    let dir = out_dir("mine-header");
    let input = dir.join("transactions.csv");
    write(&input, "id,name\nP1,A\n");
    let output = cscp(&[
        "mine",
        "--input",
        input.to_str().unwrap(),
        "--minsup",
        "1",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn mine_empty_dataset_writes_valid_empty_outputs() {
    let dir = out_dir("mine-empty");
    let input = dir.join("transactions.csv");
    write(&input, "patient_id,disease\n");
    let output = cscp(&[
        "mine",
        "--input",
        input.to_str().unwrap(),
        "--minsup",
        "1",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    assert_eq!(
        read(&dir.join("itemsets.csv")),
        "pass,itemset,support_count,support_pct\n"
    );
    assert_eq!(
        read(&dir.join("rules.csv")),
        "antecedent,consequent,support_count,support_pct,confidence_pct\n"
    );
}

#[test]
fn mine_maxpass_one_yields_singletons_and_no_rules() {
    let dir = out_dir("mine-maxpass1");
    let input = dir.join("transactions.csv");
    write(&input, "patient_id,disease\nP1,A\nP1,B\nP2,A\n");
    let output = cscp(&[
        "mine",
        "--input",
        input.to_str().unwrap(),
        "--minsup",
        "1",
        "--maxpass",
        "1",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let itemsets = read(&dir.join("itemsets.csv"));
    assert!(itemsets.lines().skip(1).all(|line| line.starts_with("1,")));
    assert_eq!(itemsets.lines().count(), 3);
    assert_eq!(read(&dir.join("rules.csv")).lines().count(), 1);
}

#[test]
fn mine_reproduces_reference_rule_metrics() {
    let dir = out_dir("mine-paper");
    let input = dir.join("transactions.csv");
    write(&input, &reference_dataset_csv());
    let output = cscp(&[
        "mine",
        "--input",
        input.to_str().unwrap(),
        "--minsup",
        "0.005",
        "--maxpass",
        "2",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let itemsets = read(&dir.join("itemsets.csv"));
    assert!(itemsets.contains("1,Bradycardia,305,30.50"));
    assert!(itemsets.contains("2,Bradycardia|Cardiac-Arrest,26,2.60"));
    let rules = read(&dir.join("rules.csv"));
    assert!(rules.contains("Bradycardia,Cardiac-Arrest,26,2.60,8.52"));
    assert!(rules.contains("Cardiac-Arrest,Bradycardia,26,2.60,4.85"));
}

#[test]
fn stratify_rejects_unknown_attribute_with_exit_2() {
    let dir = out_dir("strat-by");
    let input = dir.join("transactions.csv");
    let demo = dir.join("demographics.csv");
    write(&input, "patient_id,disease\nP1,A\n");
    write(&demo, "patient_id,age,sex\nP1,40,F\n");
    let output = cscp(&[
        "stratify",
        "--input",
        input.to_str().unwrap(),
        "--demographics",
        demo.to_str().unwrap(),
        "--by",
        "profession",
        "--minsup",
        "1",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn stratify_all_female_reports_single_stratum() {
    let dir = out_dir("strat-female");
    let input = dir.join("transactions.csv");
    let demo = dir.join("demographics.csv");
    write(
        &input,
        "patient_id,disease\nP1,A\nP1,B\nP2,A\nP2,B\nP3,A\n",
    );
    write(
        &demo,
        "patient_id,age,sex\nP1,40,F\nP2,50,F\nP3,60,F\n",
    );
    let output = cscp(&[
        "stratify",
        "--input",
        input.to_str().unwrap(),
        "--demographics",
        demo.to_str().unwrap(),
        "--by",
        "sex",
        "--minsup",
        "1",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let report = read(&dir.join("stratified.csv"));
    let rows: Vec<&str> = report.lines().skip(1).collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|row| row.starts_with("female,")));
}

#[test]
fn stratify_without_demographics_rows_lands_everyone_in_unknown() {
    let dir = out_dir("strat-unknown");
    let input = dir.join("transactions.csv");
    let demo = dir.join("demographics.csv");
    write(&input, "patient_id,disease\nP1,A\nP1,B\nP2,A\nP2,B\n");
    write(&demo, "patient_id,age,sex\n");
    let output = cscp(&[
        "stratify",
        "--input",
        input.to_str().unwrap(),
        "--demographics",
        demo.to_str().unwrap(),
        "--by",
        "age",
        "--minsup",
        "1",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let report = read(&dir.join("stratified.csv"));
    let rows: Vec<&str> = report.lines().skip(1).collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|row| row.starts_with("unknown,")));
}

#[test]
fn stratify_with_unseen_target_warns_and_writes_empty_report() {
    let dir = out_dir("strat-empty");
    let input = dir.join("transactions.csv");
    let demo = dir.join("demographics.csv");
    write(&input, "patient_id,disease\nP1,A\nP2,B\n");
    write(&demo, "patient_id,age,sex\nP1,40,F\nP2,50,M\n");
    let output = cscp(&[
        "stratify",
        "--input",
        input.to_str().unwrap(),
        "--demographics",
        demo.to_str().unwrap(),
        "--by",
        "sex",
        "--target",
        "Nonexistent,AlsoMissing",
        "--minsup",
        "1",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let report = read(&dir.join("stratified.csv"));
    assert_eq!(report.lines().count(), 1);
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("warning"));
}

#[test]
fn stratify_custom_bands_are_honored() {
    let dir = out_dir("strat-bands");
    let input = dir.join("transactions.csv");
    let demo = dir.join("demographics.csv");
    write(&input, "patient_id,disease\nP1,A\nP1,B\nP2,A\nP2,B\n");
    write(&demo, "patient_id,age,sex\nP1,47,F\nP2,10,M\n");
    let output = cscp(&[
        "stratify",
        "--input",
        input.to_str().unwrap(),
        "--demographics",
        demo.to_str().unwrap(),
        "--by",
        "age",
        "--age-bands",
        "0:45,45:50,50:150",
        "--target",
        "A,B",
        "--minsup",
        "1",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let report = read(&dir.join("stratified.csv"));
    assert!(report.contains("45-50,A|B,1,100.00,100.00"));
    assert!(report.contains("0-45,A|B,1,100.00,100.00"));

    // bands that do not tile [0, 150) are rejected
    let output = cscp(&[
        "stratify",
        "--input",
        input.to_str().unwrap(),
        "--demographics",
        demo.to_str().unwrap(),
        "--by",
        "age",
        "--age-bands",
        "0:45,50:150",
        "--minsup",
        "1",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn malformed_rows_are_diagnosed_but_not_fatal() {
    let dir = out_dir("mine-dirty");
    let input = dir.join("transactions.csv");
    write(
        &input,
        "patient_id,disease\nP1,A\n,B\nP2,\nP2,A\n",
    );
    let output = cscp(&[
        "mine",
        "--input",
        input.to_str().unwrap(),
        "--minsup",
        "1",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("2 malformed"));
}
