//! End-to-end acceptance checks. Each test prints a single pass/fail line so
//! a batch run reads as a checklist. Tolerances and grids are pinned here.

use geolabel::biclique::validate_decomposition;
use geolabel::instance::{
    adjacency_matrix, generate_instance, oracle_adjacent, Family, GenParams, Instance,
};
use geolabel::labeling::{bipartize, decode_adjacent, SchemeDescriptor};
use geolabel::matrix::AdjacencyMatrix;
use geolabel::partition_tree::{
    axis_line_crossings, classify, dual_range, point_partition, range_partition, Class,
};
use geolabel::predicate::unit_disk_spec;
use geolabel::rat::{qr, Pt};
use geolabel::visibility::{capped_check, hst_observation_report, BichromaticSegments};
use geolabel_cli::commands::{cmd_gen, cmd_label, cmd_verify, run_bench, ExperimentConfig};
use geolabel_cli::pipeline::{
    build_labels, unit_disk_decomposition, Scheme, SchemeParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::path::PathBuf;
use std::time::Instant;

fn criterion(num: u32, desc: &str, f: impl FnOnce() + std::panic::UnwindSafe) {
    let result = std::panic::catch_unwind(f);
    println!(
        "criterion {num} ({desc}): {}",
        if result.is_ok() { "pass" } else { "FAIL" }
    );
    if let Err(e) = result {
        std::panic::resume_unwind(e);
    }
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("geolabel-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

/// Rational grid fine enough that per-axis coordinate collisions stay rare
/// at vertex count n (the generators insist on distinct coordinates).
fn scaled_denom(n: usize) -> i64 {
    let need = 64 * (n as u64) * (n as u64);
    need.max(1 << 10).next_power_of_two() as i64
}

fn gen_params(preset: &str, n: usize) -> GenParams {
    GenParams {
        denom: scaled_denom(n),
        preset: preset.into(),
        ..GenParams::default()
    }
}

fn ceil_log2(n: usize) -> usize {
    (usize::BITS - n.saturating_sub(1).leading_zeros()) as usize
}

// ---------------------------------------------------------------------------

/// Every family/scheme pair round-trips through gen -> label -> verify with
/// zero mismatches, five seeds each, under the per-cell time budget.
#[test]
fn criterion_01_round_trip_exactness() {
    criterion(1, "round-trip exactness", || {
        let cells: &[(Family, &str, usize, Scheme)] = &[
            (Family::UnitDisk, "interval", 256, Scheme::PartitionTree),
            (Family::SegmentIntersection, "interval", 256, Scheme::Composed),
            (Family::SemilinearDnf, "interval", 256, Scheme::Semilinear),
            (Family::SemilinearDnf, "permutation", 256, Scheme::Semilinear),
            (Family::Boxicity, "interval", 256, Scheme::Semilinear),
            (Family::SemilinearDnf, "circle", 256, Scheme::Semilinear),
            (Family::BichromaticSegments, "interval", 256, Scheme::Hst),
            (Family::TerrainVisibility, "interval", 256, Scheme::Capped),
            (Family::CappedAbstract, "interval", 256, Scheme::Capped),
            (Family::PolygonVisibility, "interval", 128, Scheme::PolygonLabels),
        ];
        // Lighter cutting parameters keep the eight composed relation trees
        // inside the time budget without changing the decode contract.
        let composed_params = SchemeParams {
            d: 2,
            r: 4,
            ..SchemeParams::default()
        };
        for (family, preset, n, scheme) in cells {
            for seed in 1..=5u64 {
                let t0 = Instant::now();
                let inst_path = scratch(&format!("c1-{}-{preset}-{seed}.json", family.tag()));
                let labels_path = scratch(&format!("c1-{}-{preset}-{seed}.labels", family.tag()));
                let params = GenParams {
                    preset: (*preset).into(),
                    ..GenParams::default()
                };
                cmd_gen(*family, *n, seed, &params, &inst_path).unwrap();
                let sp = if *scheme == Scheme::Composed {
                    composed_params
                } else {
                    SchemeParams::default()
                };
                cmd_label(&inst_path, *scheme, &sp, &labels_path).unwrap();
                let report = cmd_verify(&inst_path, &labels_path).unwrap();
                assert_eq!(
                    report.mismatches,
                    0,
                    "{} / {} seed {seed}",
                    family.tag(),
                    scheme.tag()
                );
                let secs = t0.elapsed().as_secs_f64();
                assert!(
                    secs < 60.0,
                    "{} / {} seed {seed} took {secs:.1}s",
                    family.tag(),
                    scheme.tag()
                );
            }
        }
    });
}

/// The merged bipartized partition-tree decomposition exactly partitions the
/// edge set across the full (n, seed, D, r) grid.
#[test]
fn criterion_02_decomposition_validity() {
    criterion(2, "decomposition validity", || {
        for n in [256usize, 512, 1024, 2048] {
            for seed in 1..=3u64 {
                let inst = generate_instance(
                    Family::UnitDisk,
                    n,
                    seed,
                    &gen_params("interval", n),
                )
                .unwrap();
                let m = adjacency_matrix(&inst).unwrap();
                for d in [2usize, 4] {
                    for r in [4usize, 16] {
                        let params = SchemeParams {
                            d,
                            r,
                            ..SchemeParams::default()
                        };
                        let dec = unit_disk_decomposition(&inst, &params).unwrap();
                        let report = validate_decomposition(&dec, &m).unwrap();
                        assert!(report.ok, "n={n} seed={seed} D={d} r={r}: {report:?}");
                    }
                }
            }
        }
    });
}

/// Scaling contrast on unit disks: the partition-tree scheme's nu_max and
/// max_label_bits grow with log-log slope below 0.75 and strictly below the
/// star baseline measured on the same instances.
#[test]
fn criterion_03_balance_trend() {
    criterion(3, "partition-tree balance trend", || {
        let t0 = Instant::now();
        // Box side grows ~ n^0.15 so the expected degree rises polynomially
        // but sublinearly; at a fixed box the max degree itself grows
        // linearly in n and every scheme's slope just measures density.
        let grid: &[(usize, i64)] = &[(512, 16), (1024, 18), (2048, 20), (4096, 22)];
        let configs: Vec<ExperimentConfig> = grid
            .iter()
            .map(|&(n, range)| ExperimentConfig {
                family: Family::UnitDisk,
                ns: vec![n],
                seeds: vec![1],
                scheme: Scheme::PartitionTree,
                params: SchemeParams::default(),
                gen: GenParams {
                    range,
                    denom: 1 << 26,
                    ..GenParams::default()
                },
                baseline: true,
            })
            .collect();
        let (records, _) = run_bench(&configs).unwrap();
        assert!(records.iter().all(|r| r.verified));
        let fit = |scheme: &str, pick: fn(&geolabel_cli::commands::BenchRecord) -> usize| {
            let pts: Vec<(f64, f64)> = records
                .iter()
                .filter(|r| r.scheme == scheme)
                .map(|r| ((r.n as f64).log2(), (pick(r) as f64).log2()))
                .collect();
            let k = pts.len() as f64;
            let (mx, my) = (
                pts.iter().map(|p| p.0).sum::<f64>() / k,
                pts.iter().map(|p| p.1).sum::<f64>() / k,
            );
            let num: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let den: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
            num / den
        };
        let slope_nu = fit("partition_tree", |r| r.nu_max);
        let slope_bits = fit("partition_tree", |r| r.max_label_bits);
        let base_nu = fit("star", |r| r.nu_max);
        let base_bits = fit("star", |r| r.max_label_bits);
        assert!(slope_nu < 0.75, "nu slope {slope_nu}");
        assert!(slope_bits < 0.75, "bits slope {slope_bits}");
        assert!(slope_nu < base_nu, "nu {slope_nu} vs star {base_nu}");
        assert!(slope_bits < base_bits, "bits {slope_bits} vs star {base_bits}");
        let secs = t0.elapsed().as_secs_f64();
        assert!(secs < 600.0, "took {secs:.0}s");
    });
}

/// Exact semilinear size bound: max bits <= id_bits + 2*k*l*ceil(log2 2n) + 8.
#[test]
fn criterion_04_semilinear_size_bound() {
    criterion(4, "semilinear size bound", || {
        for n in [256usize, 1024, 4096, 16384] {
            let mut cases: Vec<(Family, &str)> = vec![
                (Family::SemilinearDnf, "interval"),
                (Family::SemilinearDnf, "permutation"),
                (Family::SemilinearDnf, "circle"),
                (Family::Boxicity, "interval"),
            ];
            if n > 4096 {
                // keep the largest size to the two lightest presets
                cases.truncate(2);
            }
            for (family, preset) in cases {
                let inst =
                    generate_instance(family, n, 1, &gen_params(preset, n)).unwrap();
                let built = build_labels(&inst, Scheme::Semilinear, &SchemeParams::default())
                    .unwrap();
                let (k, l, id_bits) = match &built.labels.descriptor {
                    SchemeDescriptor::Semilinear { k, l, id_bits, .. } => (*k, *l, *id_bits),
                    SchemeDescriptor::Boxicity { d, id_bits, .. } => (*d, 2, *id_bits),
                    other => panic!("unexpected descriptor {other:?}"),
                };
                let bound = id_bits + 2 * k * l * ceil_log2(2 * n) + 8;
                assert!(
                    built.labels.stats.max_bits <= bound,
                    "{} {preset} n={n}: {} > {bound}",
                    family.tag(),
                    built.labels.stats.max_bits
                );
                if family == Family::SemilinearDnf && preset == "interval" {
                    let interval_bound = ceil_log2(n) + 4 * ceil_log2(2 * n) + 8;
                    assert!(built.labels.stats.max_bits <= interval_bound);
                }
            }
        }
    });
}

/// Exact size bounds for the hereditary-segment-tree and capped schemes.
#[test]
fn criterion_05_visibility_size_bounds() {
    criterion(5, "hst and capped size bounds", || {
        // hst: the per-segment node-count hard assert fires inside
        // hst_labels; on top, the whole label fits the closed-form budget.
        for (n, seed) in [(64usize, 1u64), (256, 1), (256, 2), (1024, 1)] {
            let inst = generate_instance(
                Family::BichromaticSegments,
                n,
                seed,
                &GenParams::default(),
            )
            .unwrap();
            let built = build_labels(&inst, Scheme::Hst, &SchemeParams::default()).unwrap();
            let (id_bits, node_bits, rank_bits) = match &built.labels.descriptor {
                SchemeDescriptor::Hst {
                    id_bits,
                    node_bits,
                    rank_bits,
                    ..
                } => (*id_bits, *node_bits, *rank_bits),
                other => panic!("unexpected descriptor {other:?}"),
            };
            let levels = ceil_log2(2 * n);
            let gamma_bits = 2 * ceil_log2(4 * levels + 2) + 1;
            let bound =
                id_bits + 1 + gamma_bits + 4 * levels * (node_bits + 1 + 3 * rank_bits);
            assert!(
                built.labels.stats.max_bits <= bound,
                "hst n={n}: {} > {bound}",
                built.labels.stats.max_bits
            );
        }
        // capped: id_bits + ceil(log2 n) * (2 ceil(log2 n) + 2).
        for n in [64usize, 256, 1024] {
            for seed in 1..=3u64 {
                let inst =
                    generate_instance(Family::CappedAbstract, n, seed, &GenParams::default())
                        .unwrap();
                let built =
                    build_labels(&inst, Scheme::Capped, &SchemeParams::default()).unwrap();
                let id_bits = match &built.labels.descriptor {
                    SchemeDescriptor::Capped { id_bits, .. } => *id_bits,
                    other => panic!("unexpected descriptor {other:?}"),
                };
                let lg = ceil_log2(n);
                let bound = id_bits + lg * (2 * lg + 2);
                assert!(
                    built.labels.stats.max_bits <= bound,
                    "capped n={n} seed={seed}: {} > {bound}",
                    built.labels.stats.max_bits
                );
            }
        }
    });
}

/// Partitioner contracts, checked from outside the library: cutting cells
/// cross at most m/D ranges; kd cells hold at most ceil(m/r) + ceil(log4 r)
/// points and any axis-parallel line meets at most 2*sqrt(r) cells.
#[test]
fn criterion_06_partitioner_contracts() {
    criterion(6, "partitioner contracts", || {
        let inst = generate_instance(
            Family::UnitDisk,
            1024,
            1,
            &gen_params("interval", 1024),
        )
        .unwrap();
        let pts: Vec<Pt> = match &inst.payload {
            geolabel::instance::Payload::Points(p) => p.clone(),
            _ => unreachable!(),
        };
        // range_partition: the m/D crossing bound is also a hard library
        // post-condition; recheck it here via independent classification.
        let spec = unit_disk_spec();
        let ranges: Vec<_> = pts[..256]
            .iter()
            .enumerate()
            .map(|(i, p)| dual_range(&spec, p, i).unwrap())
            .collect();
        for d in [2usize, 4] {
            let cells = range_partition(&ranges, d, 7).unwrap();
            for cell in &cells {
                let crossing = ranges
                    .iter()
                    .filter(|r| matches!(classify(r, cell).unwrap(), Class::Crosses))
                    .count();
                assert!(crossing * d <= ranges.len(), "D={d}: {crossing} crossings");
            }
        }
        // point_partition bounds plus the 100-random-line crossing check.
        let mut rng = ChaCha12Rng::seed_from_u64(0x6c69_6e65); // "line"
        for r in [4usize, 16, 64] {
            let cells = point_partition(&pts, r).unwrap();
            let cap = 1024usize.div_ceil(r) + ceil_log2(r).div_ceil(2);
            for (_, members) in &cells {
                assert!(members.len() <= cap, "r={r}: cell holds {}", members.len());
            }
            let line_cap = 2 * (r as f64).sqrt() as usize;
            for _ in 0..100 {
                let vertical = rng.gen_bool(0.5);
                let v = qr(rng.gen_range(-70_000..70_000), 1024);
                let crossings = axis_line_crossings(&cells, vertical, &v);
                assert!(crossings <= line_cap, "r={r}: line meets {crossings} cells");
            }
        }
    });
}

/// Structural observations on the hereditary segment tree, exhaustive at
/// n = 256. The second observation is checked in the form the decoder
/// relies on: every crossing pair shares a node where at least one of the
/// two is long (the wall ranks settle both-long pairs exactly).
#[test]
fn criterion_07_structural_observations() {
    criterion(7, "hst structural observations", || {
        for seed in 1..=3u64 {
            let inst = generate_instance(
                Family::BichromaticSegments,
                256,
                seed,
                &GenParams::default(),
            )
            .unwrap();
            let segs = BichromaticSegments::from_instance(&inst).unwrap();
            let report = hst_observation_report(&segs).unwrap();
            assert!(
                report.max_nodes_per_segment <= report.node_bound,
                "seed {seed}: {report:?}"
            );
            assert!(report.obs1_ok, "seed {seed}: {report:?}");
            assert!(report.obs2_ok, "seed {seed}: {report:?}");
        }
    });
}

/// Capped structure: the realization decode-equivalence is a hard
/// post-condition inside every capped build; on top, terrain visibility
/// matrices pass the exhaustive 4-tuple capped check for n <= 64.
#[test]
fn criterion_08_capped_realization() {
    criterion(8, "capped realization", || {
        for n in [8usize, 16, 32, 64] {
            for seed in 1..=3u64 {
                let inst =
                    generate_instance(Family::TerrainVisibility, n, seed, &GenParams::default())
                        .unwrap();
                let m = adjacency_matrix(&inst).unwrap();
                let order: Vec<usize> = (0..n).collect();
                let witness = capped_check(&m, &order).unwrap();
                assert!(witness.is_none(), "n={n} seed={seed}: {witness:?}");
                // Exercises capped_cross_realization (and its verify-on-build
                // post-condition) at every recursion level.
                build_labels(&inst, Scheme::Capped, &SchemeParams::default()).unwrap();
            }
        }
    });
}

/// Bipartization: each vertex appears in at most ceil(log2 n) pieces and
/// each unordered pair in exactly one, exhaustively up to n = 1024.
#[test]
fn criterion_09_bipartization() {
    criterion(9, "bipartization", || {
        for n in 2usize..=1024 {
            let pieces = bipartize(n).unwrap();
            let mut per_vertex = vec![0usize; n];
            let mut pair_count = vec![0u8; n * n];
            for p in &pieces {
                for v in p.left.0..p.left.1 {
                    per_vertex[v] += 1;
                }
                for v in p.right.0..p.right.1 {
                    per_vertex[v] += 1;
                }
                for u in p.left.0..p.left.1 {
                    for v in p.right.0..p.right.1 {
                        pair_count[u * n + v] += 1;
                    }
                }
            }
            let cap = ceil_log2(n);
            assert!(per_vertex.iter().all(|&c| c <= cap), "n={n}");
            for u in 0..n {
                for v in u + 1..n {
                    assert_eq!(pair_count[u * n + v], 1, "n={n} pair ({u},{v})");
                }
            }
        }
    });
}

/// Fault detection: single-bit label corruption never goes unnoticed.
#[test]
fn criterion_10_fault_detection() {
    criterion(10, "single-bit fault detection", || {
        let inst = generate_instance(Family::UnitDisk, 64, 1, &GenParams::default()).unwrap();
        let built = build_labels(&inst, Scheme::PartitionTree, &SchemeParams::default()).unwrap();
        let m = adjacency_matrix(&inst).unwrap();
        check_against(&inst, &built.labels.descriptor, &built.labels.labels, &m, None);
        let mut rng = ChaCha12Rng::seed_from_u64(0x666c_6970); // "flip"
        let mut labels = built.labels.labels.clone();
        for round in 0..200 {
            let v = rng.gen_range(0..inst.n);
            let bit = rng.gen_range(0..labels[v].bits.len());
            labels[v].bits.flip(bit);
            let detected =
                check_against(&inst, &built.labels.descriptor, &labels, &m, Some(v));
            assert!(detected > 0, "round {round}: flip of bit {bit} of label {v} undetected");
            labels[v].bits.flip(bit);
        }
    });
}

/// Returns the number of pairs where decode disagrees with the matrix or
/// errors; with `must_involve` unset, asserts there are none.
fn check_against(
    inst: &Instance,
    desc: &SchemeDescriptor,
    labels: &[geolabel::labeling::Label],
    m: &AdjacencyMatrix,
    corrupted: Option<usize>,
) -> usize {
    let mut bad = 0;
    for u in 0..inst.n {
        for v in u + 1..inst.n {
            if let Some(c) = corrupted {
                if u != c && v != c {
                    continue;
                }
            }
            match decode_adjacent(desc, &labels[u], &labels[v]) {
                Ok(d) if d == m.get(u, v) => {}
                _ => bad += 1,
            }
        }
    }
    if corrupted.is_none() {
        assert_eq!(bad, 0, "clean labels must verify");
        // sanity against the oracle as well
        assert!(oracle_adjacent(inst, 0, 1).unwrap() == m.get(0, 1));
    }
    bad
}
