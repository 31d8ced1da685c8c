//! File-level commands: generate, label, verify, bench. Each command is a
//! plain function so harnesses can call it without spawning the binary.

use crate::pipeline::{build_labels, BuildOutput, Scheme, SchemeParams};
use geolabel::error::{Error, Result};
use geolabel::instance::{generate_instance, oracle_adjacent, Family, GenParams, Instance};
use geolabel::labeling::{decode_adjacent, LabelSet};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;
use std::collections::VecDeque;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Mutex;
use std::time::Instant;

pub fn load_instance(path: &Path) -> Result<Instance> {
    let f = File::open(path)?;
    let inst: Instance = serde_json::from_reader(BufReader::new(f))?;
    Ok(inst)
}

pub fn cmd_gen(family: Family, n: usize, seed: u64, gen: &GenParams, out: &Path) -> Result<()> {
    let inst = generate_instance(family, n, seed, gen)?;
    let mut w = BufWriter::new(File::create(out)?);
    serde_json::to_writer(&mut w, &inst)?;
    writeln!(w)?;
    Ok(())
}

pub fn cmd_label(
    instance: &Path,
    scheme: Scheme,
    params: &SchemeParams,
    out: &Path,
) -> Result<BuildOutput> {
    let inst = load_instance(instance)?;
    let built = build_labels(&inst, scheme, params)?;
    let mut w = BufWriter::new(File::create(out)?);
    built.labels.write_dump(&mut w)?;
    // Standalone descriptor next to the dump for tooling that only needs
    // the decoder parameters.
    let mut desc_path = out.as_os_str().to_owned();
    desc_path.push(".descriptor.json");
    let mut dw = BufWriter::new(File::create(Path::new(&desc_path))?);
    serde_json::to_writer(&mut dw, &built.labels.descriptor)?;
    writeln!(dw)?;
    Ok(built)
}

/// Pair budget above which verification samples instead of sweeping.
pub const VERIFY_PAIR_BUDGET: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct VerifyReport {
    pub pairs_checked: u64,
    pub mismatches: u64,
    pub sampled: bool,
    pub sampler_seed: Option<u64>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.mismatches == 0
    }
}

/// Compares the stateless decoder against the instance oracle on all pairs,
/// or on a seeded sample when the pair count exceeds the budget. A decode
/// error counts as a mismatch: the labels failed to answer the query.
pub fn verify_labels(inst: &Instance, ls: &LabelSet) -> Result<VerifyReport> {
    if ls.labels.len() != inst.n {
        return Err(Error::arg(format!(
            "label count {} does not match instance n = {}",
            ls.labels.len(),
            inst.n
        )));
    }
    let n = inst.n as u64;
    let total = n * (n - 1) / 2;
    let mut mismatches = 0u64;
    let mut check = |u: usize, v: usize| -> Result<()> {
        let truth = oracle_adjacent(inst, u, v)?;
        match decode_adjacent(&ls.descriptor, &ls.labels[u], &ls.labels[v]) {
            Ok(d) if d == truth => {}
            _ => mismatches += 1,
        }
        Ok(())
    };
    if total <= VERIFY_PAIR_BUDGET {
        for u in 0..inst.n {
            for v in u + 1..inst.n {
                check(u, v)?;
            }
        }
        return Ok(VerifyReport {
            pairs_checked: total,
            mismatches,
            sampled: false,
            sampler_seed: None,
        });
    }
    let sampler_seed = inst.seed ^ 0x7665_7269_6679; // "verify"
    let mut rng = ChaCha12Rng::seed_from_u64(sampler_seed);
    for _ in 0..VERIFY_PAIR_BUDGET {
        let u = rng.gen_range(0..inst.n);
        let mut v = rng.gen_range(0..inst.n - 1);
        if v >= u {
            v += 1;
        }
        check(u.min(v), u.max(v))?;
    }
    Ok(VerifyReport {
        pairs_checked: VERIFY_PAIR_BUDGET,
        mismatches,
        sampled: true,
        sampler_seed: Some(sampler_seed),
    })
}

pub fn cmd_verify(instance: &Path, labels: &Path) -> Result<VerifyReport> {
    let inst = load_instance(instance)?;
    let f = File::open(labels)?;
    let ls = LabelSet::read_dump(BufReader::new(f))?;
    let report = verify_labels(&inst, &ls)?;
    println!("{}", serde_json::to_string(&report)?);
    Ok(report)
}

// ---------------------------------------------------------------------------
// Bench

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub family: Family,
    pub ns: Vec<usize>,
    pub seeds: Vec<u64>,
    pub scheme: Scheme,
    pub params: SchemeParams,
    pub gen: GenParams,
    /// Also measure the star baseline on the same instances (where the
    /// brute-force adjacency matrix is affordable).
    pub baseline: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ns.is_empty() || self.seeds.is_empty() {
            return Err(Error::arg("bench needs at least one n and one seed"));
        }
        if self.ns.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::arg("bench n values must be strictly ascending"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchRecord {
    pub family: String,
    pub n: usize,
    pub seed: u64,
    pub scheme: String,
    pub max_label_bits: usize,
    pub total_label_bits: usize,
    pub nu_max: usize,
    pub decomposition_size: usize,
    pub build_millis: u64,
    pub verified: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilySummary {
    pub family: String,
    pub scheme: String,
    pub status: String,
    pub slope_max_label_bits: Option<f64>,
    pub slope_nu_max: Option<f64>,
    pub baseline_slope_max_label_bits: Option<f64>,
    pub baseline_slope_nu_max: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchSummary {
    pub records: usize,
    pub families: Vec<FamilySummary>,
}

/// n beyond which the star baseline (which needs the full matrix) is skipped.
const BASELINE_BUDGET: usize = 4096;

fn bench_one(
    family: Family,
    n: usize,
    seed: u64,
    scheme: Scheme,
    params: &SchemeParams,
    gen: &GenParams,
) -> Result<BenchRecord> {
    let inst = generate_instance(family, n, seed, gen)?;
    let t0 = Instant::now();
    let built = build_labels(&inst, scheme, params)?;
    let build_millis = t0.elapsed().as_millis() as u64;
    let report = verify_labels(&inst, &built.labels)?;
    Ok(BenchRecord {
        family: family.tag().to_string(),
        n,
        seed,
        scheme: scheme.tag().to_string(),
        max_label_bits: built.labels.stats.max_bits,
        total_label_bits: built.labels.stats.total_bits,
        nu_max: built.nu_max,
        decomposition_size: built.decomposition_size,
        build_millis,
        verified: report.ok(),
    })
}

fn thread_cap() -> usize {
    std::env::var("GEOLABEL_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&v| v > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|v| v.get())
                .unwrap_or(1)
        })
}

/// Least-squares slope of log2(mean metric per n) against log2(n), over
/// verified records only. None when fewer than two usable n values remain
/// or any value is zero.
fn loglog_slope(records: &[&BenchRecord], metric: impl Fn(&BenchRecord) -> usize) -> Option<f64> {
    let mut by_n: Vec<(usize, f64, usize)> = Vec::new();
    for r in records {
        if !r.verified {
            continue;
        }
        match by_n.iter_mut().find(|e| e.0 == r.n) {
            Some(e) => {
                e.1 += metric(r) as f64;
                e.2 += 1;
            }
            None => by_n.push((r.n, metric(r) as f64, 1)),
        }
    }
    let pts: Vec<(f64, f64)> = by_n
        .iter()
        .filter(|(_, sum, cnt)| *cnt > 0 && *sum / *cnt as f64 > 0.0)
        .map(|(n, sum, cnt)| ((*n as f64).log2(), (sum / *cnt as f64).log2()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = m * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return None;
    }
    Some((m * sxy - sx * sy) / denom)
}

pub fn run_bench(configs: &[ExperimentConfig]) -> Result<(Vec<BenchRecord>, BenchSummary)> {
    for c in configs {
        c.validate()?;
    }
    // One work item per (config, n, seed, scheme) cell; baseline cells are
    // separate items so they parallelize too.
    let mut cells: Vec<(usize, usize, u64, Scheme)> = Vec::new();
    for (ci, c) in configs.iter().enumerate() {
        for &n in &c.ns {
            for &seed in &c.seeds {
                cells.push((ci, n, seed, c.scheme));
                if c.baseline && c.scheme != Scheme::Star && n <= BASELINE_BUDGET {
                    cells.push((ci, n, seed, Scheme::Star));
                }
            }
        }
    }
    let queue: Mutex<VecDeque<(usize, usize, u64, Scheme)>> = Mutex::new(cells.into());
    let results: Mutex<Vec<Result<BenchRecord>>> = Mutex::new(Vec::new());
    let workers = thread_cap();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let job = queue.lock().unwrap().pop_front();
                let Some((ci, n, seed, scheme)) = job else {
                    break;
                };
                let c = &configs[ci];
                let rec = bench_one(c.family, n, seed, scheme, &c.params, &c.gen);
                results.lock().unwrap().push(rec);
            });
        }
    });
    let mut records = Vec::new();
    for r in results.into_inner().unwrap() {
        records.push(r?);
    }
    records.sort_by(|a, b| {
        (&a.family, a.n, a.seed, &a.scheme).cmp(&(&b.family, b.n, b.seed, &b.scheme))
    });

    let mut families = Vec::new();
    for c in configs {
        let tag = c.family.tag();
        let main: Vec<&BenchRecord> = records
            .iter()
            .filter(|r| r.family == tag && r.scheme == c.scheme.tag())
            .collect();
        let base: Vec<&BenchRecord> = records
            .iter()
            .filter(|r| r.family == tag && r.scheme == Scheme::Star.tag())
            .collect();
        let failed = main.iter().any(|r| !r.verified) || base.iter().any(|r| !r.verified);
        families.push(FamilySummary {
            family: tag.to_string(),
            scheme: c.scheme.tag().to_string(),
            status: if failed { "FAILED" } else { "ok" }.to_string(),
            slope_max_label_bits: loglog_slope(&main, |r| r.max_label_bits),
            slope_nu_max: loglog_slope(&main, |r| r.nu_max),
            baseline_slope_max_label_bits: if c.baseline {
                loglog_slope(&base, |r| r.max_label_bits)
            } else {
                None
            },
            baseline_slope_nu_max: if c.baseline {
                loglog_slope(&base, |r| r.nu_max)
            } else {
                None
            },
        });
    }
    let summary = BenchSummary {
        records: records.len(),
        families,
    };
    Ok((records, summary))
}

pub fn write_bench_csv(records: &[BenchRecord], out: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(out)?));
    for r in records {
        w.serialize(r)
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_bench(
    configs: &[ExperimentConfig],
    csv_out: &Path,
    summary_out: &Path,
) -> Result<BenchSummary> {
    let (records, summary) = run_bench(configs)?;
    write_bench_csv(&records, csv_out)?;
    let mut w = BufWriter::new(File::create(summary_out)?);
    serde_json::to_writer_pretty(&mut w, &summary)?;
    writeln!(w)?;
    Ok(summary)
}
