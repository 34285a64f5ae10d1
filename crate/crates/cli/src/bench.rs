//! Corpus sweeps over classic orders and compressed-context bit orders.
//!
//! Every run is written to `runs.csv`. That file is then read back and all
//! later tables and plots are computed from what was read:
//!
//! * `tradeoffs.csv`: for each file and classic order k, the largest swept
//!   bit order whose normalized trie is smaller than the classic trie, with
//!   both runs' sizes and bits per symbol and the two gain percentages.
//! * `gains.csv`: the gain percentages as a file × order matrix followed by
//!   AVG, MAX and MIN rows.
//! * `bps_classic.svg`, `bps_ccm.svg`, `escapes_classic.svg`,
//!   `escapes_ccm.svg`: per-file curves against order.
//! * `tradeoff.svg`: memory gain against compression gain.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use ppmx::container::ContextMode;
use ppmx::ppm_codec::{encode, ModelConfig, Pitch};
use ppmx::stats::{gain_percentages, pick_ccm_order, round2, summarize};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::plot::{line_chart, scatter_chart, Series};
use crate::CliError;

pub const RUNS_CSV: &str = "runs.csv";
pub const TRADEOFFS_CSV: &str = "tradeoffs.csv";
pub const GAINS_CSV: &str = "gains.csv";

#[derive(Debug, Clone, PartialEq)]
pub struct BenchPlan {
    pub corpus: PathBuf,
    pub out: PathBuf,
    pub classic_orders: Vec<u8>,
    pub ccm_bits: Vec<u8>,
    pub pitch: Pitch,
}

impl BenchPlan {
    /// One configuration per classic order and per bit order. A fixed pitch
    /// larger than a bit order is clamped to it.
    pub fn configs(&self) -> Result<Vec<ModelConfig>, CliError> {
        let classic = self.classic_orders.iter().map(|&k| ModelConfig::classic(k));
        let ccm = self.ccm_bits.iter().map(|&bits| {
            let pitch = match self.pitch {
                Pitch::Auto => Pitch::Auto,
                Pitch::Fixed(p) => Pitch::Fixed(p.min(bits)),
            };
            ModelConfig::ccm(bits, pitch)
        });
        let configs: Vec<ModelConfig> = classic.chain(ccm).collect();
        for cfg in &configs {
            cfg.validate().map_err(ppmx::ppm_codec::CodecError::from)?;
        }
        Ok(configs)
    }
}

/// One row of `runs.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub file: String,
    pub mode: String,
    pub order: u8,
    pub pitch: u8,
    pub nodes: u64,
    pub normalized_nodes: f64,
    pub bits_per_symbol: f64,
    pub bps_excl_header: f64,
    pub escapes_per_symbol: f64,
}

impl RunRecord {
    fn mode_rank(&self) -> u8 {
        u8::from(self.mode != ContextMode::Classic.name())
    }

    fn is_classic(&self) -> bool {
        self.mode == ContextMode::Classic.name()
    }
}

/// One row of `tradeoffs.csv`. Gains are rounded to two decimals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffRecord {
    pub file: String,
    pub classic_order: u8,
    pub ccm_order: u8,
    pub classic_nodes: f64,
    pub classic_bps: f64,
    pub ccm_nodes: f64,
    pub ccm_bps: f64,
    pub memory_gain_pct: f64,
    pub compression_gain_pct: f64,
}

/// Gain matrix: one row per file, then AVG, MAX and MIN. Columns alternate
/// memory and compression gain for each classic order.
#[derive(Debug, Clone, PartialEq)]
pub struct GainsTable {
    pub header: Vec<String>,
    pub rows: Vec<(String, Vec<Option<f64>>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub runs: Vec<RunRecord>,
    pub tradeoffs: Vec<TradeoffRecord>,
    pub gains: GainsTable,
    pub warnings: Vec<String>,
    pub written: Vec<PathBuf>,
}

/// Parses `3`, `1..6` (inclusive), `1..=6` or comma-separated mixes of them.
pub fn parse_order_list(s: &str) -> Result<Vec<u8>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim) {
        let parse = |t: &str| {
            t.trim()
                .parse::<u8>()
                .map_err(|_| format!("{t:?} is not an order"))
        };
        if let Some((a, b)) = part.split_once("..") {
            let (a, b) = (parse(a)?, parse(b.trim_start_matches('='))?);
            if a > b {
                return Err(format!("empty range {part:?}"));
            }
            out.extend(a..=b);
        } else {
            out.push(parse(part)?);
        }
    }
    if out.contains(&0) {
        return Err("orders start at 1".into());
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// A corpus file's name and contents.
pub type CorpusFile = (String, Vec<u8>);

/// Reads every regular file in `dir`, sorted by name. Files that cannot be
/// read or are empty are skipped with a warning.
pub fn load_corpus(dir: &Path) -> Result<(Vec<CorpusFile>, Vec<String>), CliError> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    entries.sort();
    let mut files = Vec::new();
    let mut warnings = Vec::new();
    for path in entries {
        let name = path
            .file_name()
            .unwrap_or_default()
            .to_string_lossy()
            .into_owned();
        if path.is_dir() {
            continue;
        }
        match fs::read(&path) {
            Ok(bytes) if bytes.is_empty() => warnings.push(format!("{name}: empty, skipped")),
            Ok(bytes) => files.push((name, bytes)),
            Err(e) => warnings.push(format!("{name}: {e}, skipped")),
        }
    }
    Ok((files, warnings))
}

/// Runs every configuration on every file.
pub fn sweep(files: &[CorpusFile], configs: &[ModelConfig]) -> Result<Vec<RunRecord>, CliError> {
    let jobs: Vec<(&str, &[u8], &ModelConfig)> = files
        .iter()
        .flat_map(|(name, data)| {
            configs
                .iter()
                .map(move |cfg| (name.as_str(), data.as_slice(), cfg))
        })
        .collect();
    let mut runs = jobs
        .par_iter()
        .map(|&(file, data, cfg)| {
            let s = encode(data, cfg)?.stats;
            Ok(RunRecord {
                file: file.to_owned(),
                mode: s.mode.name().to_owned(),
                order: s.order,
                pitch: s.pitch,
                nodes: s.node_count,
                normalized_nodes: s.normalized_nodes(),
                bits_per_symbol: s.bits_per_symbol(),
                bps_excl_header: s.bps_excl_header(),
                escapes_per_symbol: s.escapes_per_symbol(),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    sort_runs(&mut runs);
    Ok(runs)
}

pub fn sort_runs(runs: &mut [RunRecord]) {
    runs.sort_by(|a, b| (&a.file, a.mode_rank(), a.order).cmp(&(&b.file, b.mode_rank(), b.order)));
}

/// Pairs each classic order with its compressed-context counterpart. Orders
/// with no smaller compressed-context trie produce a warning instead.
pub fn tradeoffs(runs: &[RunRecord], classic_orders: &[u8]) -> (Vec<TradeoffRecord>, Vec<String>) {
    let mut by_file: BTreeMap<&str, Vec<&RunRecord>> = BTreeMap::new();
    for r in runs {
        by_file.entry(&r.file).or_default().push(r);
    }
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for (file, runs) in by_file {
        let classic: BTreeMap<u8, &RunRecord> = runs
            .iter()
            .filter(|r| r.is_classic())
            .map(|r| (r.order, *r))
            .collect();
        let ccm: BTreeMap<u8, &RunRecord> = runs
            .iter()
            .filter(|r| !r.is_classic())
            .map(|r| (r.order, *r))
            .collect();
        let classic_sizes = classic
            .iter()
            .map(|(&k, r)| (k, r.normalized_nodes))
            .collect();
        let ccm_sizes = ccm.iter().map(|(&k, r)| (k, r.normalized_nodes)).collect();
        for &k in classic_orders {
            let bits = match pick_ccm_order(&classic_sizes, &ccm_sizes, k) {
                Ok(bits) => bits,
                Err(e) => {
                    warnings.push(format!("{file}: {e}"));
                    continue;
                }
            };
            let (c, cc) = (classic[&k], ccm[&bits]);
            match gain_percentages(
                c.normalized_nodes,
                c.bits_per_symbol,
                cc.normalized_nodes,
                cc.bits_per_symbol,
            ) {
                Ok((m, g)) => rows.push(TradeoffRecord {
                    file: file.to_owned(),
                    classic_order: k,
                    ccm_order: bits,
                    classic_nodes: c.normalized_nodes,
                    classic_bps: c.bits_per_symbol,
                    ccm_nodes: cc.normalized_nodes,
                    ccm_bps: cc.bits_per_symbol,
                    memory_gain_pct: round2(m),
                    compression_gain_pct: round2(g),
                }),
                Err(e) => warnings.push(format!("{file}: {e}")),
            }
        }
    }
    (rows, warnings)
}

pub fn gains_table(tradeoffs: &[TradeoffRecord], classic_orders: &[u8]) -> GainsTable {
    let mut header = vec!["file".to_owned()];
    for k in classic_orders {
        header.push(format!("order{k}_memory"));
        header.push(format!("order{k}_compression"));
    }
    let column = |k: u8| classic_orders.iter().position(|&o| o == k);
    let mut files: BTreeMap<&str, Vec<Option<f64>>> = BTreeMap::new();
    for t in tradeoffs {
        let Some(i) = column(t.classic_order) else {
            continue;
        };
        let cells = files
            .entry(&t.file)
            .or_insert_with(|| vec![None; 2 * classic_orders.len()]);
        cells[2 * i] = Some(t.memory_gain_pct);
        cells[2 * i + 1] = Some(t.compression_gain_pct);
    }
    let mut rows: Vec<(String, Vec<Option<f64>>)> = files
        .into_iter()
        .map(|(f, cells)| (f.to_owned(), cells))
        .collect();
    let summaries: Vec<_> = (0..2 * classic_orders.len())
        .map(|col| {
            let values: Vec<f64> = rows.iter().filter_map(|(_, cells)| cells[col]).collect();
            summarize(&values)
        })
        .collect();
    for (label, pick) in [
        (
            "AVG",
            (|s: &ppmx::stats::Summary| s.avg) as fn(&ppmx::stats::Summary) -> f64,
        ),
        ("MAX", |s| s.max),
        ("MIN", |s| s.min),
    ] {
        rows.push((
            label.to_owned(),
            summaries.iter().map(|s| s.as_ref().map(pick)).collect(),
        ));
    }
    GainsTable { header, rows }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> CliError + '_ {
    move |source| CliError::Csv {
        path: path.to_owned(),
        source,
    }
}

pub fn write_records<T: Serialize>(path: &Path, records: &[T]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for r in records {
        w.serialize(r).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_records<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    r.deserialize()
        .collect::<Result<_, _>>()
        .map_err(csv_err(path))
}

pub fn write_gains(path: &Path, table: &GainsTable) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(&table.header).map_err(csv_err(path))?;
    for (label, cells) in &table.rows {
        let mut record = vec![label.clone()];
        record.extend(
            cells
                .iter()
                .map(|c| c.map_or_else(String::new, |v| v.to_string())),
        );
        w.write_record(&record).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_gains(path: &Path) -> Result<GainsTable, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let header = r
        .headers()
        .map_err(csv_err(path))?
        .iter()
        .map(str::to_owned)
        .collect();
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record.map_err(csv_err(path))?;
        let cells = record
            .iter()
            .skip(1)
            .map(|c| if c.is_empty() { None } else { c.parse().ok() })
            .collect();
        rows.push((record[0].to_owned(), cells));
    }
    Ok(GainsTable { header, rows })
}

fn per_file_series(runs: &[RunRecord], classic: bool, value: fn(&RunRecord) -> f64) -> Vec<Series> {
    let mut by_file: BTreeMap<&str, Vec<(f64, f64)>> = BTreeMap::new();
    for r in runs.iter().filter(|r| r.is_classic() == classic) {
        by_file
            .entry(&r.file)
            .or_default()
            .push((f64::from(r.order), value(r)));
    }
    by_file
        .into_iter()
        .map(|(name, points)| Series {
            name: name.to_owned(),
            points,
        })
        .collect()
}

/// SVG files named by output file name.
pub fn render_plots(
    runs: &[RunRecord],
    tradeoffs: &[TradeoffRecord],
) -> Vec<(&'static str, String)> {
    let bps = |r: &RunRecord| r.bits_per_symbol;
    let esc = |r: &RunRecord| r.escapes_per_symbol;
    let mut by_order: BTreeMap<u8, Vec<(f64, f64)>> = BTreeMap::new();
    for t in tradeoffs {
        by_order
            .entry(t.classic_order)
            .or_default()
            .push((t.memory_gain_pct, t.compression_gain_pct));
    }
    let tradeoff_series: Vec<Series> = by_order
        .into_iter()
        .map(|(k, points)| Series {
            name: format!("order {k}"),
            points,
        })
        .collect();
    vec![
        (
            "bps_classic.svg",
            line_chart(
                "Classic PPM",
                "order (symbols)",
                "bits per symbol",
                &per_file_series(runs, true, bps),
            ),
        ),
        (
            "bps_ccm.svg",
            line_chart(
                "Compressed-context PPM",
                "order (bits)",
                "bits per symbol",
                &per_file_series(runs, false, bps),
            ),
        ),
        (
            "escapes_classic.svg",
            line_chart(
                "Classic PPM",
                "order (symbols)",
                "escapes per symbol",
                &per_file_series(runs, true, esc),
            ),
        ),
        (
            "escapes_ccm.svg",
            line_chart(
                "Compressed-context PPM",
                "order (bits)",
                "escapes per symbol",
                &per_file_series(runs, false, esc),
            ),
        ),
        (
            "tradeoff.svg",
            scatter_chart(
                "Memory vs compression trade-off",
                "memory gain (%)",
                "compression gain (%)",
                &tradeoff_series,
            ),
        ),
    ]
}

/// Runs the whole plan and writes all tables and plots to `plan.out`.
pub fn run(plan: &BenchPlan) -> Result<BenchReport, CliError> {
    let configs = plan.configs()?;
    let (files, mut warnings) = load_corpus(&plan.corpus)?;
    if files.is_empty() {
        return Err(CliError::NoResults(format!(
            "no readable files in {}",
            plan.corpus.display()
        )));
    }
    fs::create_dir_all(&plan.out).map_err(|e| CliError::io(&plan.out, e))?;
    let mut written = Vec::new();

    let runs_path = plan.out.join(RUNS_CSV);
    write_records(&runs_path, &sweep(&files, &configs)?)?;
    let runs: Vec<RunRecord> = read_records(&runs_path)?;
    written.push(runs_path);

    let (rows, pair_warnings) = tradeoffs(&runs, &plan.classic_orders);
    warnings.extend(pair_warnings);
    let tradeoffs_path = plan.out.join(TRADEOFFS_CSV);
    write_records(&tradeoffs_path, &rows)?;
    let rows: Vec<TradeoffRecord> = read_records(&tradeoffs_path)?;
    written.push(tradeoffs_path);

    let gains = gains_table(&rows, &plan.classic_orders);
    let gains_path = plan.out.join(GAINS_CSV);
    write_gains(&gains_path, &gains)?;
    written.push(gains_path);

    for (name, svg) in render_plots(&runs, &rows) {
        let path = plan.out.join(name);
        fs::write(&path, svg).map_err(|e| CliError::io(&path, e))?;
        written.push(path);
    }
    Ok(BenchReport {
        runs,
        tradeoffs: rows,
        gains,
        warnings,
        written,
    })
}
