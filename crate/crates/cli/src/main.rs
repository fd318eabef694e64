//! `cscp`: generate, mine, and stratify disease co-occurrence datasets.
//!
//! Exit codes are a stable contract: 0 on success, 2 for usage/config/format
//! problems, 3 for I/O failures. Data files are deterministic given inputs
//! and flags; the manifest alone carries the run timestamp.

mod manifest;
mod output;

use std::fmt;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use cscp_core::ingest::{
    parse_demographics, parse_transactions, write_demographics, write_transactions, IngestReport,
};
use cscp_core::mining::{derive_rules, mine_frequent};
use cscp_core::model::{
    default_age_bands, AgeBand, DiseaseName, MiningConfig, Minsup, StratumSpec, TransactionTable,
};
use cscp_core::strata::{mine_strata, stratify, Target};
use cscp_core::synth::{generate, GeneratorConfig};

use manifest::RunManifest;
use output::{
    render_itemsets, render_rules, render_stratified, write_atomic, DEMOGRAPHICS_FILE,
    ITEMSETS_FILE, MANIFEST_FILE, RULES_FILE, STRATIFIED_FILE, TRANSACTIONS_FILE,
};

#[derive(Parser)]
#[command(name = "cscp", version, about = "Mine disease co-occurrence rules from patient transaction data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded synthetic dataset (transactions + demographics)
    Gen {
        /// TOML generator config; defaults to the built-in five-disease setup
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
        /// Override the config's seed
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Mine frequent itemsets and directed association rules
    Mine {
        /// Transaction CSV (header: patient_id,disease)
        #[arg(long)]
        input: PathBuf,
        /// Minimum support: integer count, or decimal fraction of patients
        #[arg(long, value_parser = parse_minsup)]
        minsup: Minsup,
        /// Largest itemset size to mine
        #[arg(long, default_value_t = 2)]
        maxpass: usize,
        /// Minimum confidence for emitted rules, in [0, 1]
        #[arg(long, default_value_t = 0.0)]
        min_conf: f64,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute support/confidence per demographic stratum
    Stratify {
        /// Transaction CSV (header: patient_id,disease)
        #[arg(long)]
        input: PathBuf,
        /// Demographics CSV (header: patient_id,age,sex)
        #[arg(long)]
        demographics: PathBuf,
        /// Attribute to stratify by
        #[arg(long, value_enum)]
        by: ByAttr,
        /// Age bands as lo:hi pairs tiling 0..150, e.g. 0:45,45:50,50:150
        #[arg(long)]
        age_bands: Option<String>,
        /// Ordered disease list "d1,d2,..."; the first is the rule antecedent
        #[arg(long)]
        target: Option<String>,
        /// Minimum support: integer count, or decimal fraction of patients
        #[arg(long, value_parser = parse_minsup)]
        minsup: Minsup,
        /// Largest itemset size to mine
        #[arg(long, default_value_t = 2)]
        maxpass: usize,
        /// Minimum confidence for emitted rows, in [0, 1]
        #[arg(long, default_value_t = 0.0)]
        min_conf: f64,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ByAttr {
    Age,
    Sex,
}

#[derive(Debug)]
enum CliError {
    Core(cscp_core::Error),
    Io { path: PathBuf, source: std::io::Error },
    Config(String),
    Internal(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(err) => write!(f, "{err}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Internal(msg) => write!(f, "internal error: {msg}"),
        }
    }
}

impl From<cscp_core::Error> for CliError {
    fn from(err: cscp_core::Error) -> Self {
        CliError::Core(err)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(cscp_core::Error::Io(_)) => 3,
            CliError::Core(cscp_core::Error::Csv(err))
                if matches!(err.kind(), csv::ErrorKind::Io(_)) =>
            {
                3
            }
            CliError::Core(_) | CliError::Config(_) => 2,
            CliError::Io { .. } | CliError::Internal(_) => 3,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Gen { config, out, seed } => cmd_gen(config, out, seed),
        Command::Mine {
            input,
            minsup,
            maxpass,
            min_conf,
            out,
        } => cmd_mine(input, minsup, maxpass, min_conf, out),
        Command::Stratify {
            input,
            demographics,
            by,
            age_bands,
            target,
            minsup,
            maxpass,
            min_conf,
            out,
        } => cmd_stratify(
            input,
            demographics,
            by,
            age_bands,
            target,
            minsup,
            maxpass,
            min_conf,
            out,
        ),
    }
}

fn parse_minsup(raw: &str) -> Result<Minsup, String> {
    if raw.contains('.') {
        raw.parse::<f64>()
            .map(Minsup::Relative)
            .map_err(|err| format!("invalid relative minsup {raw:?}: {err}"))
    } else {
        raw.parse::<u64>()
            .map(Minsup::Absolute)
            .map_err(|err| format!("invalid absolute minsup {raw:?}: {err}"))
    }
}

fn parse_age_bands(raw: &str) -> Result<Vec<AgeBand>, CliError> {
    raw.split(',')
        .map(|part| {
            let (lo, hi) = part
                .split_once(':')
                .ok_or_else(|| CliError::Config(format!("age band {part:?} is not lo:hi")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<u16>()
                    .map_err(|err| CliError::Config(format!("age band bound {s:?}: {err}")))
            };
            Ok(AgeBand::new(parse(lo)?, parse(hi)?))
        })
        .collect()
}

fn parse_target(raw: &str) -> Result<Target, CliError> {
    let names = raw
        .split(',')
        .map(DiseaseName::new)
        .collect::<cscp_core::Result<Vec<_>>>()?;
    Ok(Target::from_ordered(&names)?)
}

fn io_error(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_owned(),
        source,
    }
}

fn read_transactions(path: &Path) -> Result<(TransactionTable, IngestReport), CliError> {
    let file = File::open(path).map_err(io_error(path))?;
    Ok(parse_transactions(BufReader::new(file))?)
}

fn report_malformed(path: &Path, label: &str, malformed: &[(u64, String)]) {
    for (line, reason) in malformed {
        eprintln!("{}: line {line}: skipped {label} row: {reason}", path.display());
    }
}

fn write_output(
    dir: &Path,
    name: &str,
    bytes: &[u8],
    manifest: &mut RunManifest,
) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    manifest.record_output(&path, bytes);
    write_atomic(&path, bytes).map_err(io_error(&path))?;
    Ok(path)
}

fn finish_manifest(dir: &Path, manifest: &RunManifest) -> Result<(), CliError> {
    let bytes = manifest
        .to_json()
        .map_err(|err| CliError::Internal(err.to_string()))?;
    let path = dir.join(MANIFEST_FILE);
    write_atomic(&path, &bytes).map_err(io_error(&path))
}

fn cmd_gen(config_path: Option<PathBuf>, out: PathBuf, seed: Option<u64>) -> Result<(), CliError> {
    let mut config = match &config_path {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(io_error(path))?;
            toml::from_str::<GeneratorConfig>(&text)
                .map_err(|err| CliError::Config(format!("{}: {err}", path.display())))?
        }
        None => GeneratorConfig::default(),
    };
    if let Some(seed) = seed {
        config.seed = seed;
    }
    let (table, demographics) = generate(&config)?;

    fs::create_dir_all(&out).map_err(io_error(&out))?;
    let mut transactions_bytes = Vec::new();
    write_transactions(&table, &mut transactions_bytes)?;
    let mut demographics_bytes = Vec::new();
    write_demographics(&demographics, &mut demographics_bytes)?;

    let config_json =
        serde_json::to_value(&config).map_err(|err| CliError::Internal(err.to_string()))?;
    let mut manifest = RunManifest::new(config_json, Some(config.seed));
    if let Some(path) = &config_path {
        manifest.record_input(path).map_err(io_error(path))?;
    }
    write_output(&out, TRANSACTIONS_FILE, &transactions_bytes, &mut manifest)?;
    write_output(&out, DEMOGRAPHICS_FILE, &demographics_bytes, &mut manifest)?;
    finish_manifest(&out, &manifest)?;

    println!(
        "wrote {} patients over {} diseases to {} (seed {})",
        table.total_patients(),
        table.disease_universe().len(),
        out.display(),
        config.seed
    );
    Ok(())
}

fn cmd_mine(
    input: PathBuf,
    minsup: Minsup,
    maxpass: usize,
    min_conf: f64,
    out: PathBuf,
) -> Result<(), CliError> {
    let (table, report) = read_transactions(&input)?;
    report_malformed(&input, "transaction", &report.malformed_rows);
    eprintln!(
        "{}: {} rows, {} patients, {} diseases, {} duplicates dropped, {} malformed",
        input.display(),
        report.rows_read,
        report.patients,
        report.distinct_diseases,
        report.duplicate_rows_dropped,
        report.malformed_rows.len()
    );

    let config = MiningConfig::new(maxpass, minsup).with_min_conf(min_conf);
    let frequent = mine_frequent(&table, &config)?;
    let rules = derive_rules(&frequent, &table, min_conf)?;

    fs::create_dir_all(&out).map_err(io_error(&out))?;
    let mut manifest = RunManifest::new(
        json!({
            "minsup": minsup_json(&minsup),
            "maxpass": maxpass,
            "min_conf": min_conf,
        }),
        None,
    );
    manifest.record_input(&input).map_err(io_error(&input))?;
    write_output(&out, ITEMSETS_FILE, &render_itemsets(&frequent), &mut manifest)?;
    write_output(&out, RULES_FILE, &render_rules(&rules), &mut manifest)?;
    finish_manifest(&out, &manifest)?;

    let itemset_total: usize = frequent.by_pass.values().map(Vec::len).sum();
    println!(
        "wrote {} itemsets across {} passes and {} rules to {}",
        itemset_total,
        frequent.by_pass.len(),
        rules.rules.len(),
        out.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_stratify(
    input: PathBuf,
    demographics_path: PathBuf,
    by: ByAttr,
    age_bands: Option<String>,
    target: Option<String>,
    minsup: Minsup,
    maxpass: usize,
    min_conf: f64,
    out: PathBuf,
) -> Result<(), CliError> {
    let (table, tx_report) = read_transactions(&input)?;
    report_malformed(&input, "transaction", &tx_report.malformed_rows);

    let demo_file = File::open(&demographics_path).map_err(io_error(&demographics_path))?;
    let (demo_map, demo_report) = parse_demographics(BufReader::new(demo_file))?;
    report_malformed(
        &demographics_path,
        "demographics",
        &demo_report.malformed_rows,
    );
    if demo_report.overridden_rows > 0 {
        eprintln!(
            "{}: {} duplicate patient rows overridden",
            demographics_path.display(),
            demo_report.overridden_rows
        );
    }

    let spec = match by {
        ByAttr::Age => StratumSpec::Age(match &age_bands {
            Some(raw) => parse_age_bands(raw)?,
            None => default_age_bands(),
        }),
        ByAttr::Sex => {
            if age_bands.is_some() {
                return Err(CliError::Config("--age-bands requires --by age".into()));
            }
            StratumSpec::Sex
        }
    };
    let targets = target.as_deref().map(parse_target).transpose()?;

    let config = MiningConfig::new(maxpass, minsup).with_min_conf(min_conf);
    let strata = stratify(&demo_map, &table.patient_ids(), &spec)?;
    let report = mine_strata(
        &table,
        &spec,
        &strata,
        &config,
        targets.as_ref().map(std::slice::from_ref),
    )?;

    if report.rows.is_empty() {
        eprintln!("warning: no stratum produced a metric row");
    }
    if report.omitted_rows > 0 {
        eprintln!(
            "warning: {} target rows omitted (antecedent unseen in stratum)",
            report.omitted_rows
        );
    }

    fs::create_dir_all(&out).map_err(io_error(&out))?;
    let mut manifest = RunManifest::new(
        json!({
            "by": match by { ByAttr::Age => "age", ByAttr::Sex => "sex" },
            "age_bands": age_bands,
            "target": target,
            "minsup": minsup_json(&minsup),
            "maxpass": maxpass,
            "min_conf": min_conf,
        }),
        None,
    );
    manifest.record_input(&input).map_err(io_error(&input))?;
    manifest
        .record_input(&demographics_path)
        .map_err(io_error(&demographics_path))?;
    write_output(&out, STRATIFIED_FILE, &render_stratified(&report), &mut manifest)?;
    finish_manifest(&out, &manifest)?;

    println!(
        "wrote {} rows across {} strata to {}",
        report.rows.len(),
        report.strata.len(),
        out.display()
    );
    Ok(())
}

fn minsup_json(minsup: &Minsup) -> serde_json::Value {
    match *minsup {
        Minsup::Absolute(count) => json!(count),
        Minsup::Relative(f) => json!(f),
    }
}
