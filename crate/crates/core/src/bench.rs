//! Scaling benchmark harness: median per-query latency of each scoring
//! method against catalogue size, with memory-budget skips and CSV/JSON
//! report emission.

use std::fmt;
use std::hint::black_box;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::PQConfig;
use crate::error::{Error, Result};
use crate::scoring::{
    compute_sub_id_scores, matmul_topk, pq_topk, recjpq_score, DenseEmbeddingMatrix, ItemSubset,
    DEFAULT_CHUNK_ITEMS,
};
use crate::synthetic::{
    default_memory_budget, generate_synthetic_with_budget, random_sequence_embedding,
};

/// One of the three scoring methods under measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dense,
    RecJpq,
    PqTopk,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Dense, Method::RecJpq, Method::PqTopk];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Dense => "dense",
            Method::RecJpq => "recjpq",
            Method::PqTopk => "pqtopk",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(Method::Dense),
            "recjpq" => Ok(Method::RecJpq),
            "pqtopk" => Ok(Method::PqTopk),
            other => Err(Error::UnknownMethod(other.to_string())),
        }
    }
}

/// Sweep configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    /// Catalogue sizes, strictly increasing.
    pub sizes: Vec<u64>,
    pub num_splits: usize,
    pub num_sub_ids: usize,
    pub embed_dim: usize,
    /// Top-K cutoff applied inside the timed region.
    pub k: usize,
    /// Measured queries per (method, size) cell.
    pub queries: usize,
    /// Discarded leading queries per cell.
    pub warmup: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub memory_budget_bytes: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sizes: vec![1_000, 10_000, 100_000, 1_000_000, 10_000_000],
            num_splits: 8,
            num_sub_ids: 256,
            embed_dim: 512,
            k: 10,
            queries: 30,
            warmup: 5,
            seed: 0,
            methods: Method::ALL.to_vec(),
            memory_budget_bytes: default_memory_budget(),
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::InvalidConfig("no catalogue sizes given".into()));
        }
        for pair in self.sizes.windows(2) {
            if pair[0] >= pair[1] {
                return Err(Error::InvalidConfig(format!(
                    "sizes must be strictly increasing, found {} before {}",
                    pair[0], pair[1]
                )));
            }
        }
        if self.queries == 0 {
            return Err(Error::InvalidConfig("queries must be >= 1".into()));
        }
        if self.k == 0 {
            return Err(Error::InvalidConfig("k must be >= 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig("no methods selected".into()));
        }
        // shape check independent of size
        PQConfig::new(1, self.num_splits, self.num_sub_ids, self.embed_dim)?;
        Ok(())
    }
}

/// Measured cell of the sweep. Skipped cells carry a reason and no latency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchEntry {
    pub method: Method,
    pub num_items: u64,
    pub median_ms: Option<f64>,
    pub p10_ms: Option<f64>,
    pub p90_ms: Option<f64>,
    /// Median of the sub-id score precomputation alone (PQ methods only);
    /// always part of `median_ms`, reported separately as well.
    pub precompute_median_ms: Option<f64>,
    pub samples: usize,
    pub est_bytes: u64,
    pub skipped: bool,
    pub reason: Option<String>,
}

/// Full sweep result plus the settings needed to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub num_splits: usize,
    pub num_sub_ids: usize,
    pub embed_dim: usize,
    pub k: usize,
    pub queries: usize,
    pub warmup: usize,
    pub seed: u64,
    /// Worker threads available to the item-major scan during the run.
    pub threads: usize,
    pub entries: Vec<BenchEntry>,
}

impl BenchReport {
    pub fn entry(&self, method: Method, num_items: u64) -> Option<&BenchEntry> {
        self.entries
            .iter()
            .find(|e| e.method == method && e.num_items == num_items)
    }
}

fn instance_seed(seed: u64, size_index: usize) -> u64 {
    seed.wrapping_add((size_index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn query_seed(instance_seed: u64, query_index: usize) -> u64 {
    instance_seed ^ (query_index as u64 + 1).wrapping_mul(0xD1B5_4A32_D192_ED03)
}

fn worker_threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

/// Estimated resident bytes of the structures a method touches per query.
fn estimated_bytes(method: Method, config: &PQConfig, k: usize) -> u64 {
    let n = config.num_items;
    match method {
        Method::Dense => config.dense_bytes() + n * 4,
        Method::RecJpq => {
            config.instance_bytes()
                + (config.num_splits * config.num_sub_ids) as u64 * 4
                + n * 4
        }
        Method::PqTopk => {
            let chunks = n.div_ceil(DEFAULT_CHUNK_ITEMS as u64);
            config.instance_bytes()
                + (config.num_splits * config.num_sub_ids) as u64 * 4
                + chunks * k as u64 * 16
        }
    }
}

struct Percentiles {
    median: f64,
    p10: f64,
    p90: f64,
}

fn percentiles(samples: &[f64]) -> Percentiles {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    let rank = |q: f64| sorted[((q * n as f64).ceil() as usize).clamp(1, n) - 1];
    Percentiles {
        median,
        p10: rank(0.10),
        p90: rank(0.90),
    }
}

/// Run the full sweep. Each (method, size) cell generates its per-size
/// instance, draws a fresh query embedding per repetition and times the
/// score path end to end: sub-id precomputation (PQ methods) or the full
/// matrix product (dense), scoring, and top-K selection. Cells whose
/// structures exceed the memory budget are skipped with a reason; the run
/// fails only if every cell is skipped.
pub fn run_scaling_benchmark(config: &BenchConfig) -> Result<BenchReport> {
    config.validate()?;

    let mut entries = Vec::with_capacity(config.sizes.len() * config.methods.len());
    for (size_index, &size) in config.sizes.iter().enumerate() {
        let pq_config = PQConfig::new(size, config.num_splits, config.num_sub_ids, config.embed_dim)?;
        let seed = instance_seed(config.seed, size_index);
        run_size(config, &pq_config, seed, &mut entries)?;
    }

    if entries.iter().all(|e| e.skipped) {
        return Err(Error::AllCellsSkipped(format!(
            "no (method, size) cell fits the {} byte budget",
            config.memory_budget_bytes
        )));
    }

    Ok(BenchReport {
        num_splits: config.num_splits,
        num_sub_ids: config.num_sub_ids,
        embed_dim: config.embed_dim,
        k: config.k,
        queries: config.queries,
        warmup: config.warmup,
        seed: config.seed,
        threads: worker_threads(),
        entries,
    })
}

fn run_size(
    config: &BenchConfig,
    pq_config: &PQConfig,
    seed: u64,
    entries: &mut Vec<BenchEntry>,
) -> Result<()> {
    let budget = config.memory_budget_bytes;
    let skipped_entry = |method: Method, reason: String| BenchEntry {
        method,
        num_items: pq_config.num_items,
        median_ms: None,
        p10_ms: None,
        p90_ms: None,
        precompute_median_ms: None,
        samples: 0,
        est_bytes: estimated_bytes(method, pq_config, config.k),
        skipped: true,
        reason: Some(reason),
    };

    // every method scores against the same generated instance
    if pq_config.instance_bytes() > budget {
        for &method in &config.methods {
            entries.push(skipped_entry(
                method,
                format!(
                    "memory budget: instance requires {} bytes, budget {}",
                    pq_config.instance_bytes(),
                    budget
                ),
            ));
        }
        return Ok(());
    }
    let (codebook, embeddings, _) = generate_synthetic_with_budget(pq_config, seed, budget)?;

    for &method in &config.methods {
        let est = estimated_bytes(method, pq_config, config.k);
        if est > budget {
            entries.push(skipped_entry(
                method,
                format!("memory budget: requires {est} bytes, budget {budget}"),
            ));
            continue;
        }

        let dense_matrix = match method {
            Method::Dense => Some(DenseEmbeddingMatrix::from_reconstruction(
                &codebook,
                &embeddings,
                budget,
            )?),
            _ => None,
        };

        let mut samples = Vec::with_capacity(config.queries);
        let mut precompute_samples = Vec::with_capacity(config.queries);
        for q in 0..config.warmup + config.queries {
            let phi = random_sequence_embedding(pq_config.embed_dim, query_seed(seed, q))?;
            let (total_ms, precompute_ms) = match method {
                Method::Dense => {
                    let w = dense_matrix.as_ref().expect("dense matrix built above");
                    let start = Instant::now();
                    let result = matmul_topk(w, &phi, config.k, &ItemSubset::All)?;
                    let total = start.elapsed().as_secs_f64() * 1e3;
                    black_box(result);
                    (total, None)
                }
                Method::RecJpq => {
                    let start = Instant::now();
                    let scores = compute_sub_id_scores(&embeddings, &phi)?;
                    let pre = start.elapsed().as_secs_f64() * 1e3;
                    let result = recjpq_score(&codebook, &scores, config.k, &ItemSubset::All)?;
                    let total = start.elapsed().as_secs_f64() * 1e3;
                    black_box(result);
                    (total, Some(pre))
                }
                Method::PqTopk => {
                    let start = Instant::now();
                    let scores = compute_sub_id_scores(&embeddings, &phi)?;
                    let pre = start.elapsed().as_secs_f64() * 1e3;
                    let result = pq_topk(&codebook, &scores, config.k, &ItemSubset::All)?;
                    let total = start.elapsed().as_secs_f64() * 1e3;
                    black_box(result);
                    (total, Some(pre))
                }
            };
            if q >= config.warmup {
                samples.push(total_ms);
                if let Some(pre) = precompute_ms {
                    precompute_samples.push(pre);
                }
            }
        }

        let stats = percentiles(&samples);
        let precompute_median_ms = if precompute_samples.is_empty() {
            None
        } else {
            Some(percentiles(&precompute_samples).median)
        };
        entries.push(BenchEntry {
            method,
            num_items: pq_config.num_items,
            median_ms: Some(stats.median),
            p10_ms: Some(stats.p10),
            p90_ms: Some(stats.p90),
            precompute_median_ms,
            samples: samples.len(),
            est_bytes: est,
            skipped: false,
            reason: None,
        });
    }
    Ok(())
}

/// Least-squares slope of log(median latency) against log(catalogue size)
/// for one method over sizes in `[min_items, max_items]`.
pub fn fit_scaling_slope(
    report: &BenchReport,
    method: Method,
    min_items: u64,
    max_items: u64,
) -> Result<f64> {
    let points: Vec<(f64, f64)> = report
        .entries
        .iter()
        .filter(|e| {
            e.method == method
                && !e.skipped
                && e.num_items >= min_items
                && e.num_items <= max_items
        })
        .filter_map(|e| {
            e.median_ms
                .filter(|&ms| ms > 0.0)
                .map(|ms| ((e.num_items as f64).ln(), ms.ln()))
        })
        .collect();
    if points.len() < 3 {
        return Err(Error::InsufficientPoints {
            needed: 3,
            found: points.len(),
        });
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var = 0.0;
    for &(x, y) in &points {
        cov += (x - mean_x) * (y - mean_y);
        var += (x - mean_x) * (x - mean_x);
    }
    Ok(cov / var)
}

/// Output encoding for [`emit_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::InvalidConfig(format!(
                "unknown report format '{other}' (expected csv or json)"
            ))),
        }
    }
}

/// Serialise a report. CSV rows carry one cell each with a fixed column
/// order; JSON carries the full report structure and parses back losslessly.
pub fn emit_report(report: &BenchReport, format: ReportFormat) -> Result<Vec<u8>> {
    match format {
        ReportFormat::Json => {
            let mut bytes = serde_json::to_vec_pretty(report)
                .map_err(|e| Error::Format(e.to_string()))?;
            bytes.push(b'\n');
            Ok(bytes)
        }
        ReportFormat::Csv => {
            let mut writer = csv::Writer::from_writer(Vec::new());
            writer
                .write_record([
                    "method",
                    "num_items",
                    "m",
                    "b",
                    "d",
                    "K",
                    "queries",
                    "median_ms",
                    "p10_ms",
                    "p90_ms",
                    "est_bytes",
                    "skipped",
                    "reason",
                ])
                .map_err(|e| Error::Format(e.to_string()))?;
            let fmt_ms = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            for entry in &report.entries {
                writer
                    .write_record([
                        entry.method.name().to_string(),
                        entry.num_items.to_string(),
                        report.num_splits.to_string(),
                        report.num_sub_ids.to_string(),
                        report.embed_dim.to_string(),
                        report.k.to_string(),
                        report.queries.to_string(),
                        fmt_ms(entry.median_ms),
                        fmt_ms(entry.p10_ms),
                        fmt_ms(entry.p90_ms),
                        entry.est_bytes.to_string(),
                        entry.skipped.to_string(),
                        entry.reason.clone().unwrap_or_default(),
                    ])
                    .map_err(|e| Error::Format(e.to_string()))?;
            }
            writer
                .into_inner()
                .map_err(|e| Error::Format(e.to_string()))
        }
    }
}

/// Parse a JSON report produced by [`emit_report`].
pub fn parse_report_json(bytes: &[u8]) -> Result<BenchReport> {
    serde_json::from_slice(bytes).map_err(|e| Error::Format(e.to_string()))
}

/// A self-contained gnuplot script: log-log latency against catalogue size,
/// one series per method, data inlined from the report.
pub fn emit_plot_script(report: &BenchReport) -> String {
    let mut script = String::new();
    let mut series = Vec::new();
    for method in Method::ALL {
        let points: Vec<(u64, f64)> = report
            .entries
            .iter()
            .filter(|e| e.method == method && !e.skipped)
            .filter_map(|e| e.median_ms.map(|ms| (e.num_items, ms)))
            .collect();
        if points.is_empty() {
            continue;
        }
        script.push_str(&format!("${} << EOD\n", method.name()));
        for (items, ms) in points {
            script.push_str(&format!("{items} {ms}\n"));
        }
        script.push_str("EOD\n");
        series.push(format!(
            "${} using 1:2 with linespoints title \"{}\"",
            method.name(),
            method.name()
        ));
    }
    script.push_str("set logscale xy\n");
    script.push_str("set xlabel \"catalogue size |I|\"\n");
    script.push_str("set ylabel \"median latency (ms)\"\n");
    script.push_str(&format!(
        "set title \"scoring latency (m={}, b={}, d={}, K={})\"\n",
        report.num_splits, report.num_sub_ids, report.embed_dim, report.k
    ));
    script.push_str(&format!("plot {}\n", series.join(", \\\n     ")));
    script
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_report(entries: Vec<BenchEntry>) -> BenchReport {
        BenchReport {
            num_splits: 8,
            num_sub_ids: 256,
            embed_dim: 512,
            k: 10,
            queries: 30,
            warmup: 5,
            seed: 0,
            threads: 1,
            entries,
        }
    }

    fn measured(method: Method, num_items: u64, median_ms: f64) -> BenchEntry {
        BenchEntry {
            method,
            num_items,
            median_ms: Some(median_ms),
            p10_ms: Some(median_ms * 0.9),
            p90_ms: Some(median_ms * 1.1),
            precompute_median_ms: None,
            samples: 30,
            est_bytes: 0,
            skipped: false,
            reason: None,
        }
    }

    #[test]
    fn slope_of_exact_linearity_is_one() {
        let entries = [1_000u64, 10_000, 100_000, 1_000_000]
            .iter()
            .map(|&n| measured(Method::PqTopk, n, n as f64 * 1e-4))
            .collect();
        let slope =
            fit_scaling_slope(&toy_report(entries), Method::PqTopk, 1, u64::MAX).unwrap();
        assert!((slope - 1.0).abs() < 1e-9, "slope = {slope}");
    }

    #[test]
    fn slope_of_constant_latency_is_zero() {
        let entries = [1_000u64, 10_000, 100_000]
            .iter()
            .map(|&n| measured(Method::Dense, n, 5.0))
            .collect();
        let slope =
            fit_scaling_slope(&toy_report(entries), Method::Dense, 1, u64::MAX).unwrap();
        assert!(slope.abs() < 1e-9, "slope = {slope}");
    }

    #[test]
    fn slope_needs_three_points() {
        let entries = vec![
            measured(Method::PqTopk, 1_000, 1.0),
            measured(Method::PqTopk, 10_000, 10.0),
        ];
        assert!(matches!(
            fit_scaling_slope(&toy_report(entries), Method::PqTopk, 1, u64::MAX),
            Err(Error::InsufficientPoints { .. })
        ));
    }

    #[test]
    fn empty_report_is_header_only_csv() {
        let csv = emit_report(&toy_report(vec![]), ReportFormat::Csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with("method,num_items,m,b,d,K,queries,median_ms"));
    }

    #[test]
    fn single_entry_is_two_line_csv() {
        let csv = emit_report(
            &toy_report(vec![measured(Method::PqTopk, 1_000, 1.5)]),
            ReportFormat::Csv,
        )
        .unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.lines().nth(1).unwrap().starts_with("pqtopk,1000,8,256,512,10,30,1.5,"));
    }

    #[test]
    fn json_round_trips() {
        let mut skipped = measured(Method::Dense, 1_000_000, 0.0);
        skipped.median_ms = None;
        skipped.p10_ms = None;
        skipped.p90_ms = None;
        skipped.samples = 0;
        skipped.skipped = true;
        skipped.reason = Some("memory budget: requires 1 bytes, budget 0".into());
        let report = toy_report(vec![
            measured(Method::PqTopk, 1_000, 1.5),
            skipped,
        ]);
        let bytes = emit_report(&report, ReportFormat::Json).unwrap();
        assert_eq!(parse_report_json(&bytes).unwrap(), report);
    }

    #[test]
    fn small_sweep_measures_all_methods() {
        let config = BenchConfig {
            sizes: vec![500, 1_000],
            num_splits: 4,
            num_sub_ids: 16,
            embed_dim: 32,
            k: 5,
            queries: 3,
            warmup: 1,
            seed: 42,
            methods: Method::ALL.to_vec(),
            memory_budget_bytes: default_memory_budget(),
        };
        let report = run_scaling_benchmark(&config).unwrap();
        assert_eq!(report.entries.len(), 6);
        for entry in &report.entries {
            assert!(!entry.skipped, "{entry:?}");
            let median = entry.median_ms.unwrap();
            assert!(entry.p10_ms.unwrap() <= median && median <= entry.p90_ms.unwrap());
            assert_eq!(entry.samples, 3);
        }
    }

    #[test]
    fn dense_skipped_under_budget_without_poisoning_pq() {
        // instance fits easily, dense matrix does not
        let config = BenchConfig {
            sizes: vec![2_000],
            num_splits: 4,
            num_sub_ids: 16,
            embed_dim: 64,
            k: 5,
            queries: 2,
            warmup: 0,
            seed: 1,
            methods: Method::ALL.to_vec(),
            memory_budget_bytes: 200_000,
        };
        let report = run_scaling_benchmark(&config).unwrap();
        let dense = report.entry(Method::Dense, 2_000).unwrap();
        assert!(dense.skipped);
        assert!(dense.reason.as_deref().unwrap().contains("memory budget"));
        assert!(dense.median_ms.is_none());
        assert!(!report.entry(Method::PqTopk, 2_000).unwrap().skipped);
        assert!(!report.entry(Method::RecJpq, 2_000).unwrap().skipped);
    }

    #[test]
    fn all_cells_skipped_is_an_error() {
        let config = BenchConfig {
            sizes: vec![10_000],
            num_splits: 8,
            num_sub_ids: 256,
            embed_dim: 512,
            k: 5,
            queries: 2,
            warmup: 0,
            seed: 1,
            methods: Method::ALL.to_vec(),
            memory_budget_bytes: 1_000,
        };
        assert!(matches!(
            run_scaling_benchmark(&config),
            Err(Error::AllCellsSkipped(_))
        ));
    }

    #[test]
    fn rejects_unsorted_sizes() {
        let config = BenchConfig {
            sizes: vec![1_000, 1_000],
            ..BenchConfig::default()
        };
        assert!(config.validate().is_err());
    }

    #[test]
    fn plot_script_lists_measured_series() {
        let report = toy_report(vec![
            measured(Method::PqTopk, 1_000, 1.5),
            measured(Method::PqTopk, 10_000, 15.0),
        ]);
        let script = emit_plot_script(&report);
        assert!(script.contains("$pqtopk << EOD"));
        assert!(script.contains("set logscale xy"));
        assert!(!script.contains("$dense"));
    }
}
